import math

import numpy as np
import pytest

from skewharm.operators import Grid, auto_grid
from skewharm.potentials import Constant, Linear, PowerDecay, Quadratic, SmoothedLinear
from skewharm.hypocoercivity import (DecayTrace, beta_profile,
                                     beta_profile_check, contraction_margin,
                                     default_A, default_u0, elem_consistency,
                                     evolve, fit_envelope, growth_bound,
                                     hatH_scaling, lambda_star, make_params,
                                     phi_upper_bound, phi_value,
                                     semigroup_norms, smallness_beta0,
                                     verify_decay)


def rand_state(g, seed=0):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(g.N) + 1j * rng.standard_normal(g.N)
    return u / math.sqrt(g.h * float(np.sum(np.abs(u) ** 2)))


def test_recipe_parameter_constraints():
    cases = [(Quadratic(), "quadratic"), (Linear(), "linear"),
             (SmoothedLinear(1.0), "smoothed-linear"),
             (PowerDecay(4.0), "general"), (PowerDecay(4.0), "beta-profile")]
    for p, recipe in cases:
        params = make_params(p, 0.01, recipe=recipe)
        a = np.asarray(params.alpha, dtype=float)
        b = np.asarray(params.beta, dtype=float)
        c = np.asarray(params.gamma, dtype=float)
        assert params.eta > 0.0
        assert np.all(a > 0.0) and np.all(b > 0.0)
        if np.all(c == 0.0):
            assert np.all(b * b <= a / 4.0 + 1e-15)
        else:
            assert np.all(4.0 * b * b <= a * c * (1.0 + 1e-12))


def test_recipe_validation_errors():
    with pytest.raises(ValueError):
        make_params(Linear(), 0.1, recipe="quadratic")
    with pytest.raises(ValueError):
        make_params(Quadratic(), 0.1, recipe="beta-profile")
    with pytest.raises(ValueError):
        make_params(Quadratic(), 0.1, recipe="frobnicate")
    with pytest.raises(ValueError):
        make_params(Constant(1.0), 0.1, recipe="general")


def test_auto_recipe_follows_the_potential():
    assert make_params(Quadratic(), 0.1).recipe == "quadratic"
    assert make_params(Linear(), 0.1).recipe == "linear"
    assert make_params(SmoothedLinear(1.0), 0.1).recipe == "smoothed-linear"
    assert make_params(PowerDecay(4.0), 0.1).recipe == "general"


def test_lambda_star_quadratic_closed_form():
    # w (f')^2 = 4 w x^2 turns the form into a scaled oscillator with ground
    # energy sqrt(1 + 4w)
    eps = 0.01
    for w in (0.5, 1.0 / (8.0 * eps)):
        got = lambda_star(Quadratic(), eps, w)
        assert abs(got - math.sqrt(1.0 + 4.0 * w)) < 1e-3 * math.sqrt(1.0 + 4.0 * w)


def test_quadratic_eta_band():
    # eta ~ lambda_*/4 = sqrt(1/(8 eps))/4 for small eps: the band below is
    # asymptotically [0.088, ...] eps^-1/2
    for eps in (0.1, 0.01, 0.001):
        eta = make_params(Quadratic(), eps).eta
        assert 0.05 <= eta * math.sqrt(eps) <= 10.0


def test_phi_is_coercive_on_random_states():
    p = PowerDecay(4.0)
    eps = 0.05
    g = Grid(8.0, 501)
    params = make_params(p, eps, recipe="general")
    for seed in range(5):
        u = rand_state(g, seed)
        val = phi_value(u, g, p, params)
        norm_sq = g.h * float(np.sum(np.abs(u) ** 2))
        assert val >= 0.25 * norm_sq * (1.0 - 1e-12)
        assert phi_upper_bound(u, g, p, params) >= val - 1e-12


def test_beta_profile_shape_and_smallness():
    p = PowerDecay(4.0)
    eps = 2.0**-10
    A = default_A(p)
    b0 = smallness_beta0(p)
    x = np.linspace(0.0, 300.0, 20001)
    b = beta_profile(p, eps, x)
    assert np.all(b >= b0 * (1.0 - 1e-12))
    assert abs(b[0] - b0) < 1e-12
    cap = b0 * eps ** (-p.k / (p.k + 4.0))
    assert abs(b.max() - cap) < 1e-9 * cap
    assert np.all(np.diff(b) >= -1e-12)  # nondecreasing in |x|
    assert beta_profile_check(p, eps, c=1.0)
    assert not beta_profile_check(p, eps, c=1e-9)
    with pytest.raises(ValueError):
        beta_profile_check(p, eps, c=0.0)


def test_evolution_audit_quadratic():
    p = Quadratic()
    eps = 0.1
    params = make_params(p, eps)
    trace = evolve(p, eps, T=1.5, params=params)
    assert trace.flags == []
    assert trace.id1_max < 1e-10
    assert contraction_margin(trace) <= 1.0 + 1e-6
    assert np.all(np.diff(trace.norm_sq) <= 0.0)
    rep = verify_decay(trace, params.eta)
    assert rep["holds"]
    # the certified eta is conservative (true decay here is ~2 Sigma ~ 4.7),
    # so the contrast envelope must out-run the actual decay, not just eta
    assert not verify_decay(trace, 30.0 * params.eta)["holds"]


def test_evolve_accepts_explicit_state_and_grid():
    p = PowerDecay(4.0)
    eps = 0.1
    g = auto_grid(p, eps)
    u0 = default_u0(g)
    params = make_params(p, eps, recipe="general", g=g)
    trace = evolve(p, eps, g=g, u0=u0, T=0.5, params=params)
    assert abs(trace.norm_sq[0] - 1.0) < 1e-12
    assert trace.times[-1] >= 0.5 - trace.dt


def test_fit_envelope_recovers_synthetic_decay():
    g = Grid(4.0, 11)
    t = np.linspace(0.0, 6.0, 121)
    rel = np.minimum(1.0, 2.0 * np.exp(-1.3 * t))
    trace = DecayTrace("synthetic", 0.1, g, t[1], t, rel**2, rel**2,
                       fitted_rate=0.0, id1_max=0.0)
    C, mu = fit_envelope(trace)
    assert abs(mu - 1.3) < 1e-6
    assert abs(C - 2.0) < 1e-6
    short = DecayTrace("synthetic", 0.1, g, 1.0, t[:2], rel[:2] ** 2,
                       rel[:2] ** 2, 0.0, 0.0)
    with pytest.raises(ValueError):
        fit_envelope(short)


def test_semigroup_norms_free_oscillator():
    # f = 0: ||e^{-tH}|| = e^{-e0 t} exactly, e0 = discrete ground energy ~ 1
    p = Constant(0.0)
    times = np.array([0.25, 0.5, 1.0])
    norms = semigroup_norms(p, 1.0, times, dt=5e-3)
    want = np.exp(-times)
    assert np.all(np.abs(norms - want) < 3e-3)
    assert np.all(np.diff(norms) < 0.0)


def test_growth_bound_matches_quadratic_closed_form():
    eps = 0.01
    got = growth_bound(Quadratic(), eps)
    want = complex(1.0, 1.0 / eps) ** 0.5
    assert abs(got - want.real) < 0.02 * want.real


def test_elem_consistency_quadratic():
    p = Quadratic()
    eps = 0.1
    params = make_params(p, eps)
    trace = evolve(p, eps, T=3.0, params=params)
    sigma = complex(1.0, 1.0 / eps) ** 0.5
    report = elem_consistency(p, eps, float(sigma.real), psi=2.0940,
                              trace=trace)
    assert report["consistent"]
    assert report["C"] >= 1.0
    assert report["sigma_dominates_mu"]
    assert report["psi_dominates_lemma_rate"]
    assert report["proxy_within_bound"]


def test_hatH_flat_for_zero_drift():
    out = hatH_scaling(Constant(0.0), "inverse-square",
                       [1e-1, 1e-2, 1e-3, 1e-4])
    assert abs(out["fit"].exponent) < 1e-3
    assert all(abs(v - 1.0) < 1e-3 for v in out["lambda_star"])
