from __future__ import print_function


class NdsIdentException(Exception):
    exit_code = 4

    def __init__(self, context="", message=""):
        self.context = context
        self.message = message
        super().__init__('{} ({})'.format(self.message, self.context))


# Input problems: exit code 3.

class DimensionError(NdsIdentException):
    exit_code = 3


class ConfigError(NdsIdentException):
    exit_code = 3


class DataFileError(NdsIdentException):
    exit_code = 3


class InsufficientData(NdsIdentException):
    exit_code = 3


class PreSettlingSample(NdsIdentException):
    exit_code = 3


# Numerical failures: exit code 4.

class EvaluationError(NdsIdentException):
    def __init__(self, s, message="pencil sE - A is singular"):
        self.s = s
        super().__init__("s={!r}".format(s), message)


class AssumptionViolation(NdsIdentException):
    pass


class EigenvalueCollision(NdsIdentException):
    def __init__(self, generator_eig, pencil_eig, message="generator eigenvalue coincides with a pencil eigenvalue"):
        self.generator_eig = generator_eig
        self.pencil_eig = pencil_eig
        super().__init__("{!r} ~ {!r}".format(generator_eig, pencil_eig), message)


class UnsupportedDescriptorSimulation(NdsIdentException):
    pass


class WellPosednessError(NdsIdentException):
    pass


class NumericalError(NdsIdentException):
    pass


class IdentifiabilityError(NdsIdentException):
    exit_code = 2


# vim: expandtab tabstop=4 shiftwidth=4 softtabstop=4 nowrap
