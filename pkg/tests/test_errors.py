import pytest
from ndsident.errors import (
    AssumptionViolation, ConfigError, DataFileError, DimensionError, EigenvalueCollision,
    EvaluationError, IdentifiabilityError, InsufficientData, NdsIdentException,
    NumericalError, PreSettlingSample, UnsupportedDescriptorSimulation, WellPosednessError,
)


@pytest.mark.parametrize("cls", [DimensionError, ConfigError, DataFileError, InsufficientData, PreSettlingSample])
def test_input_errors_exit_3(cls):
    assert cls("ctx", "msg").exit_code == 3


@pytest.mark.parametrize("cls", [AssumptionViolation, UnsupportedDescriptorSimulation, WellPosednessError, NumericalError])
def test_numerical_errors_exit_4(cls):
    assert cls("ctx", "msg").exit_code == 4


def test_identifiability_exits_2():
    assert IdentifiabilityError("diagnose", "fails").exit_code == 2


def test_message_format():
    e = DimensionError("subsystem 2", "B_xv must be 2x1")
    assert str(e) == "B_xv must be 2x1 (subsystem 2)"
    assert isinstance(e, NdsIdentException)


def test_evaluation_error_keeps_point():
    e = EvaluationError(-1.0 + 0j)
    assert e.s == -1.0 + 0j
    assert e.exit_code == 4


def test_collision_keeps_both_eigenvalues():
    e = EigenvalueCollision(0.5j, 0.5j + 1e-12)
    assert e.generator_eig == 0.5j
    assert e.pencil_eig == 0.5j + 1e-12
