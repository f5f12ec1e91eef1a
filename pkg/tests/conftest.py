import os

import numpy
import pytest

from ndsident.bench import ChainSpec, build_chain
from ndsident.errorlog import errorlog
from ndsident.generator import InputGenerator
from ndsident.model import DescriptorSubsystem, Topology, assemble_nds, check_regularity
from ndsident.simulate import ScheduleSpec, make_schedule, measure


def slow_enabled():
    return os.environ.get("NDSIDENT_SLOW", "") == "1"


slow = pytest.mark.skipif(
    not slow_enabled(),
    reason="long run; set NDSIDENT_SLOW=1"
)


@pytest.fixture(autouse=True)
def clean_errorlog():
    """Each test starts with an empty process-wide error log."""
    errorlog.clear()
    yield
    errorlog.clear()


def make_scalar_model():
    sub = DescriptorSubsystem(E=[[1.0]], A_xx=[[-1.0]], B_xu=[[1.0]], C_yx=[[1.0]], dims=(1, 0, 1, 0, 1))
    return assemble_nds([sub], Topology(numpy.zeros((0, 0))))


def make_constant_generator(value=1.0):
    return InputGenerator([[0.0]], [[1.0]], [value])


def make_benchmark_generator(xi0=(1.0, 1.0)):
    return InputGenerator([[0.0, 0.32], [-0.32, 0.0]], [[1.5, 2.0], [2.0, 1.0]], list(xi0))


def make_chain(n=6, seed=0, **kwargs):
    chain = build_chain(ChainSpec(n_carts=n, seed=seed, **kwargs))
    return chain, chain.nds()


def make_descriptor_model():
    """Singular E with a regular pencil: det(sE - A) = s + 1."""
    sub = DescriptorSubsystem(
        E=[[1.0, 0.0], [0.0, 0.0]],
        A_xx=[[-1.0, 1.0], [0.0, -1.0]],
        B_xu=[[1.0], [1.0]],
        C_yx=[[1.0, 1.0]],
        dims=(2, 0, 1, 0, 1),
    )
    return assemble_nds([sub], Topology(numpy.zeros((0, 0))))


def make_random_model(seed=0, n_sub=2, m_x=3):
    """Dense, well-posed, stable network of n_sub subsystems with one internal port each.

    Every subsystem has one input and one output; theta has one entry.
    """
    rng = numpy.random.default_rng(seed)
    blocks = []
    for _ in range(n_sub):
        blocks.append(dict(
            E=numpy.eye(m_x) + 0.1 * rng.standard_normal((m_x, m_x)),
            A_xx=rng.standard_normal((m_x, m_x)),
            B_xv=rng.standard_normal((m_x, 1)),
            B_xu=rng.standard_normal((m_x, 1)),
            C_zx=rng.standard_normal((1, m_x)),
            D_zv=0.2 * rng.standard_normal((1, 1)),
            D_zu=0.5 * rng.standard_normal((1, 1)),
            C_yx=rng.standard_normal((1, m_x)),
            D_yv=0.5 * rng.standard_normal((1, 1)),
            D_yu=0.5 * rng.standard_normal((1, 1)),
        ))
    phi0 = 0.3 * rng.standard_normal((n_sub, n_sub))
    basis = [0.3 * rng.standard_normal((n_sub, n_sub))]
    topology = Topology(phi0, basis, [0.7])
    shift = 1.0
    while True:
        subs = []
        for b in blocks:
            kw = dict(b)
            kw["A_xx"] = b["A_xx"] - shift * b["E"]
            subs.append(DescriptorSubsystem(dims=(m_x, 1, 1, 1, 1), **kw))
        nds = assemble_nds(subs, topology)
        diag = check_regularity(nds)
        if diag.wellposed and diag.stable:
            return nds
        shift *= 2.0


def make_random_generator(m_u, seed=0, omega=0.32):
    """Constant mode plus one oscillation, Pi dense, all xi0 entries nonzero."""
    rng = numpy.random.default_rng(seed + 1000)
    Xi = numpy.zeros((3, 3))
    Xi[0, 1] = omega
    Xi[1, 0] = -omega
    Pi = rng.uniform(0.5, 2.0, size=(m_u, 3))
    xi0 = rng.uniform(0.5, 1.5, size=3)
    return InputGenerator(Xi, Pi, xi0)


@pytest.fixture
def scalar_model():
    return make_scalar_model()


@pytest.fixture
def benchmark_generator():
    return make_benchmark_generator()


@pytest.fixture
def chain2():
    return make_chain(2, seed=3)


@pytest.fixture
def chain6():
    return make_chain(6, seed=1)


@pytest.fixture
def random_model():
    return make_random_model(seed=5)


def make_steady_dataset(nds, gen, per_subsystem, seed=0, noise_std=0.0, t_settle=50.0, mode="steady", x0=None):
    """Samples from every subsystem with outputs, `per_subsystem` of them after t_settle."""
    subsystems = [k for k, (a, b) in enumerate(nds.y_offsets) if b > a]
    spec = ScheduleSpec.uniform(subsystems, t_start=t_settle, max_samples=per_subsystem, count_from=t_settle)
    return measure(nds, gen, x0, make_schedule(spec, seed), noise_std, seed, mode=mode, t_settle=t_settle)
