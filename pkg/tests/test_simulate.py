import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delaykv import (
    DelayHistory,
    NumericalError,
    ValidationError,
    check_dissipativity,
    dirichlet_modes_1d,
    energy_trace,
    fit_decay_rate,
    make_modes,
    make_params,
    simulate_mode,
    spectral_abscissa,
    synthesize_wave,
)
from delaykv.simulate import EnergyTrace, RK4_STIFF_LIMIT


def witness_run(witness, m, periods=10):
    p = witness.params
    hist = DelayHistory.cosine(witness.y, p.tau, m)
    return simulate_mode(1.0, p, hist, 1.0, 0.0, periods * p.tau, m)


def tracking_error(witness, m):
    tr = witness_run(witness, m)
    return float(np.abs(tr.u - np.cos(witness.y * tr.times)).max())


def test_zero_data_stays_zero():
    p = make_params(1, 1)
    tr = simulate_mode(3.0, p, DelayHistory.constant(0.0, 1.0, 32), 0.0, 0.0, 5.0)
    assert not tr.u.any() and not tr.v.any()
    et = energy_trace(tr, p)
    assert not et.E.any()


def test_grid_reaches_final_time():
    p = make_params(1, 0.3)
    tr = simulate_mode(1.0, p, DelayHistory.constant(1.0, 0.3, 10), 1.0, 0.0, 1.0)
    assert tr.times[-1] >= 1.0 - 1e-12 and tr.times[-1] - tr.h < 1.0
    assert tr.h == pytest.approx(0.03)


def test_witness_tracks_cosine(witness):
    assert tracking_error(witness, 200) <= 1e-4


def test_witness_fourth_order(witness):
    e = [tracking_error(witness, m) for m in (100, 200, 400)]
    for coarse, fine in zip(e, e[1:]):
        assert 12.0 <= coarse / fine <= 20.0


def test_witness_energy_periodic(witness):
    p = witness.params
    m = 200
    tr = witness_run(witness, m, periods=12)
    E = energy_trace(tr, p).E
    period = 2 * math.pi / witness.y
    n_per = int(round(period / tr.h))
    # grid does not divide the period exactly; compare against interpolation
    e_shift = np.interp(tr.times[: E.size - n_per] + period, tr.times, E)
    drift = np.abs(e_shift - E[: E.size - n_per]).max() / E.max()
    assert drift <= 5e-3


def test_stable_mode_decays():
    p = make_params(1, 0.5)
    lk = math.pi ** 2
    x, _ = spectral_abscissa(make_modes([lk]), p)
    T = 40 * p.tau
    tr = simulate_mode(lk, p, DelayHistory.constant(1.0, p.tau, 64), 1.0, 0.0, T)
    late = np.abs(tr.u[tr.times >= T / 2]).max()
    assert late <= math.exp(x * T / 4)


def test_energy_initial_value():
    # history == 1: E(0) = (0 + 1 + 4 * 1) / 2
    p = make_params(1, 1)
    tr = simulate_mode(1.0, p, DelayHistory.constant(1.0, 1.0, 40), 1.0, 0.0, 1.0)
    et = energy_trace(tr, p)
    assert p.xi == 4.0
    assert et.E[0] == pytest.approx(2.5, abs=1e-14)
    assert et.kinetic[0] == 0.0 and et.potential[0] == 0.5 and et.history[0] == pytest.approx(2.0)


def test_energy_addition():
    p = make_params(1, 1)
    tr = simulate_mode(1.0, p, DelayHistory.constant(1.0, 1.0, 16), 1.0, 0.0, 2.0)
    et = energy_trace(tr, p)
    both = et + et
    np.testing.assert_allclose(both.E, 2 * et.E)
    other = energy_trace(simulate_mode(1.0, p, DelayHistory.constant(1.0, 1.0, 32), 1.0, 0.0, 2.0), p)
    with pytest.raises(ValidationError):
        et + other


def test_fit_decay_rate_exact_exponential():
    t = np.linspace(0, 4, 401)
    E = np.exp(-3.0 * t)
    trace = EnergyTrace(t, E, np.zeros_like(t), np.zeros_like(t))
    fit = fit_decay_rate(trace, 0.0)
    assert fit.omega == pytest.approx(3.0, abs=1e-10)
    assert fit.residual <= 1e-10 and not fit.poor_fit


def test_fit_decay_rate_rejects_bad_data():
    t = np.linspace(0, 1, 11)
    z = np.zeros_like(t)
    with pytest.raises(ValidationError, match="positive"):
        fit_decay_rate(EnergyTrace(t, z, z, z), 0.0)
    with pytest.raises(ValidationError, match="samples"):
        fit_decay_rate(EnergyTrace(t, z + 1, z, z), 0.55, 0.6)


@pytest.mark.parametrize("a,tau,lk", [(1, 0.5, math.pi ** 2), (2, 1, 1)])
def test_decay_rate_matches_abscissa(a, tau, lk):
    p = make_params(a, tau)
    x, _ = spectral_abscissa(make_modes([lk]), p)
    tr = simulate_mode(lk, p, DelayHistory.constant(1.0, tau, 128), 1.0, 0.0, 40 * tau)
    fit = fit_decay_rate(energy_trace(tr, p), 5 * tau, 40 * tau)
    assert fit.omega == pytest.approx(-2 * x, rel=0.05)


def test_dissipativity_zero_trajectory():
    p = make_params(1, 1)
    tr = simulate_mode(1.0, p, DelayHistory.constant(0.0, 1.0, 16), 0.0, 0.0, 3.0)
    rep = check_dissipativity(tr, energy_trace(tr, p), p)
    assert rep.ok and rep.max_violation == 0.0 and rep.fd_defect == 0.0


@pytest.mark.parametrize("a,tau,lk", [(1, 1, 1), (2, 1, 1), (1, 0.5, math.pi ** 2)])
def test_dissipativity_holds_and_slack_shrinks(a, tau, lk):
    p = make_params(a, tau)
    slack, defect = [], []
    for m in (100, 200):
        hist = DelayHistory.cosine(1.3, tau, m)
        tr = simulate_mode(lk, p, hist, 1.0, 0.0, 10 * tau, m)
        rep = check_dissipativity(tr, energy_trace(tr, p), p)
        assert rep.ok, rep
        slack.append(rep.max_slack)
        defect.append(rep.fd_defect)
    assert 3.0 <= slack[0] / slack[1] <= 5.0
    assert 3.0 <= defect[0] / defect[1] <= 5.0


def test_dissipativity_short_trace_rejected():
    p = make_params(1, 1)
    tr = simulate_mode(1.0, p, DelayHistory.constant(1.0, 1.0, 8), 1.0, 0.0, 0.3)
    with pytest.raises(ValidationError):
        check_dissipativity(tr, energy_trace(tr, p), p)


@settings(max_examples=15, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-1, 1), st.floats(0.3, 2))
def test_linearity(c1, c2, v0, omega):
    p = make_params(1.2, 0.9)
    m = 24
    h1 = DelayHistory.cosine(omega, p.tau, m)
    h2 = DelayHistory.constant(1.0, p.tau, m)
    hs = DelayHistory.from_samples(c1 * h1.values + c2 * h2.values, p.tau,
                                   c1 * h1.derivs + c2 * h2.derivs)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        t1 = simulate_mode(2.0, p, h1, 1.0, v0, 3.0)
        t2 = simulate_mode(2.0, p, h2, 1.0, 0.0, 3.0)
        ts = simulate_mode(2.0, p, hs, c1 + c2, c1 * v0, 3.0)
    np.testing.assert_allclose(ts.u, c1 * t1.u + c2 * t2.u, atol=1e-11)


def test_energy_decreases_on_certified_configs():
    rng = np.random.default_rng(11)
    for _ in range(50):
        a = rng.uniform(0.2, 3)
        tau = rng.uniform(0.1, 1) * a
        lk = rng.uniform(0.1, 30)
        p = make_params(a, tau)
        m = max(32, math.ceil(tau * a * lk / RK4_STIFF_LIMIT) + 1)
        hist = DelayHistory.cosine(rng.uniform(0.1, 3), tau, m, phase=rng.uniform(0, 6))
        tr = simulate_mode(lk, p, hist, hist.values[-1], rng.normal(), 20 * tau)
        E = energy_trace(tr, p).E
        assert (E > 0).all()
        assert E[-1] < E[0]


def test_stiffness_guard_names_minimum_m():
    p = make_params(1, 1)
    with pytest.raises(ValidationError, match=r"m >= 371"):
        simulate_mode(1000.0, p, DelayHistory.constant(0.0, 1.0, 64), 0.0, 0.0, 1.0)


def test_blowup_reported():
    p = make_params(0.05, 3.0)
    with pytest.raises(NumericalError, match="diverged"):
        simulate_mode(1.0, p, DelayHistory.constant(1.0, 3.0, 16), 1.0, 0.0, 1e5)


def test_input_validation():
    p = make_params(1, 1)
    hist = DelayHistory.constant(1.0, 1.0, 16)
    with pytest.raises(ValidationError):
        simulate_mode(0.0, p, hist, 1.0, 0.0, 1.0)
    with pytest.raises(ValidationError):
        simulate_mode(1.0, p, hist, 1.0, 0.0, -1.0)
    with pytest.raises(ValidationError):
        simulate_mode(1.0, make_params(1, 0.5), hist, 1.0, 0.0, 1.0)
    with pytest.raises(ValidationError):
        simulate_mode(1.0, p, hist, 1.0, 0.0, 1.0, m=4)
    with pytest.warns(UserWarning, match="differs from u0"):
        simulate_mode(1.0, p, hist, 0.0, 0.0, 1.0)


def test_history_constructors_agree():
    f = DelayHistory.from_function(np.sin, 1.0, 50, dfunc=np.cos)
    s = DelayHistory.from_samples(f.values, 1.0)
    np.testing.assert_allclose(s.derivs, f.derivs, atol=1e-5)
    c = DelayHistory.cosine(1.0, 1.0, 50, phase=-math.pi / 2)
    np.testing.assert_allclose(c.values, f.values, atol=1e-15)
    r = f.resample(100)
    assert r.m == 100 and r.times[0] == -1.0 and r.times[-1] == 0.0
    np.testing.assert_allclose(r.values, np.sin(r.times), atol=1e-15)


def test_history_validation():
    with pytest.raises(ValidationError):
        DelayHistory.from_samples([1.0, np.nan, 1.0], 1.0)
    with pytest.raises(ValidationError):
        DelayHistory.constant(1.0, -1.0, 10)


def _field_run(modes, T=2.0, m=64, zero=False):
    p = make_params(1, 0.5)
    trajs = []
    for k, lk in enumerate(modes, start=1):
        c = 0.0 if zero else 1.0 / k
        trajs.append(simulate_mode(lk, p, DelayHistory.constant(c, p.tau, m), c, 0.0, T, m))
    return p, trajs


def test_wave_field_dirichlet_and_parseval():
    modes = dirichlet_modes_1d(1.0, 4)
    p, trajs = _field_run(modes)
    field = synthesize_wave(trajs, modes, 801, [0.0, 1.0, 2.0])
    assert np.all(field.u[:, 0] == 0) and np.all(field.u[:, -1] == 0)
    for i, t in enumerate(field.times):
        j = int(round(t / trajs[0].h))
        modal = sum(0.5 * (tr.v[j] ** 2 + tr.lambda_k * tr.u[j] ** 2) for tr in trajs)
        assert field.energy(i) == pytest.approx(modal, rel=0.01)


def test_wave_field_single_mode_shape():
    modes = dirichlet_modes_1d(2.0, 1)
    _, trajs = _field_run(modes)
    field = synthesize_wave(trajs, modes, 101, [0.0])
    expected = math.sqrt(2 / 2.0) * np.sin(math.pi * field.x / 2.0)
    expected[[0, -1]] = 0.0
    np.testing.assert_allclose(field.u[0], trajs[0].u[0] * expected, atol=1e-15)


def test_wave_field_zero():
    modes = dirichlet_modes_1d(1.0, 3)
    _, trajs = _field_run(modes, zero=True)
    field = synthesize_wave(trajs, modes, 11, [0.5])
    assert not field.u.any() and field.energy(0) == 0.0


def test_wave_field_snaps_snapshot_times():
    modes = dirichlet_modes_1d(1.0, 2)
    _, trajs = _field_run(modes)
    field = synthesize_wave(trajs, modes, 11, [0.1234])
    assert abs(field.times[0] - 0.1234) <= trajs[0].h / 2


def test_wave_field_validation():
    modes = dirichlet_modes_1d(1.0, 2)
    _, trajs = _field_run(modes)
    with pytest.raises(ValidationError):
        synthesize_wave(trajs[:1], modes, 11, [0.0])
    with pytest.raises(ValidationError):
        synthesize_wave(trajs, make_modes(list(modes)), 11, [0.0])
    with pytest.raises(ValidationError):
        synthesize_wave(trajs, modes, 2, [0.0])
    with pytest.raises(ValidationError):
        synthesize_wave(trajs, modes, 11, [5.0])
    _, other = _field_run(modes, m=32)
    with pytest.raises(ValidationError):
        synthesize_wave([trajs[0], other[1]], modes, 11, [0.0])
    with pytest.raises(ValidationError):
        synthesize_wave(list(reversed(trajs)), modes, 11, [0.0])


def test_neutral_witness_has_zero_decay_rate(witness):
    tr = witness_run(witness, 100, periods=40)
    fit = fit_decay_rate(energy_trace(tr, witness.params), witness.params.tau)
    assert abs(fit.omega) <= 0.01
