import numpy
import pytest
from ndsident.errorlog import errorlog
from ndsident.identify import run_identification
from ndsident.simulate import solve_sylvester

from .conftest import make_chain, make_benchmark_generator, make_random_generator, make_random_model, make_steady_dataset


def test_noiseless_end_to_end(chain6):
    chain, nds = chain6
    gen = make_benchmark_generator()
    ds = make_steady_dataset(nds, gen, 25)
    rep = run_identification(nds, gen, ds, sweep=[20, 50])
    assert rep.identifiable
    assert rep.errors.e_theta <= 1e-6
    assert rep.errors.e_eta <= 1e-7
    assert [p.samples for p in rep.curve] == [20, 50]
    assert all(p.e_theta <= 1e-6 for p in rep.curve)
    assert len(rep.curve_theta) == 2


def test_noiseless_full_simulation_from_steady_state(chain6):
    chain, nds = chain6
    gen = make_benchmark_generator()
    x0 = solve_sylvester(nds, gen).X_top @ gen.xi0
    ds = make_steady_dataset(nds, gen, 25, mode="full", t_settle=0.0, x0=x0)
    rep = run_identification(nds, gen, ds)
    assert rep.errors.e_theta <= 1e-6


def test_noiseless_rls(chain6):
    chain, nds = chain6
    gen = make_benchmark_generator()
    ds = make_steady_dataset(nds, gen, 25)
    rep = run_identification(nds, gen, ds, sweep=[20], estimator="rls")
    assert rep.estimator == "rls"
    assert rep.errors.e_theta <= 1e-4
    assert rep.curve[0].samples == 20


def test_sweep_larger_than_dataset_is_skipped(chain6):
    chain, nds = chain6
    gen = make_benchmark_generator()
    ds = make_steady_dataset(nds, gen, 5)
    rep = run_identification(nds, gen, ds, sweep=[4, 100])
    assert [p.samples for p in rep.curve] == [4]
    assert errorlog.source_has_errors("identify")


def test_more_samples_lower_error():
    chain, nds = make_chain(4, seed=3)
    gen = make_benchmark_generator()
    ds = make_steady_dataset(nds, gen, 800, seed=5, noise_std=0.3)
    rep = run_identification(nds, gen, ds, sweep=[100, 1600])
    assert rep.curve[1].e_eta < rep.curve[0].e_eta


def test_reference_values_can_be_supplied(chain6):
    chain, nds = chain6
    gen = make_benchmark_generator()
    ds = make_steady_dataset(nds, gen, 10)
    rep = run_identification(nds, gen, ds, theta_true=nds.theta * 2.0)
    assert rep.errors.e_theta == pytest.approx(numpy.sqrt(0.5), rel=1e-5)


def test_three_subsystem_noiseless_stage1():
    nds = make_random_model(seed=3, n_sub=3)
    gen = make_random_generator(nds.m_u, seed=3)
    ds = make_steady_dataset(nds, gen, 12)
    rep = run_identification(nds, gen, ds)
    assert rep.stage1.rank_ok
    assert rep.errors.e_eta <= 1e-8
