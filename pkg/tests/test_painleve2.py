from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tw6.painleve2 import (appendix_a_check, k0_find, pos_approx, y_b,
                           y_b_pp)

# frozen oracles for the distinguished ODE solution at the origin, computed
# by two independent builds (30- and 60-digit configurations) that agree to
# the shorter precision; the classical interval |u(0) - 98/267| <= 11e-4
# brackets them
U0 = "0.3670615515480784277477921131756109615122"
V0 = "-0.2953721054475500545570070473102379882272"

K0_GOLD = "2.1228589561253469"
TSTAR_GOLD = "-1.188111911480737877"


def test_pos_approx_tracks_airy():
    with mp.workdps(60):
        for t in (mp.mpf(30), mp.mpf(36)):
            u, v = pos_approx(t, 50)
            assert abs(u / mp.airyai(t) - 1) < mp.mpf("1e-30")
            assert abs(v / mp.airyai(t, 1) - 1) < mp.mpf("1e-30")


def test_origin_values(sol):
    with mp.workdps(70):
        u, v = sol.eval(mp.mpf(0), 60)
        assert abs(u - mp.mpf(U0)) < mp.mpf("1e-21")
        assert abs(v - mp.mpf(V0)) < mp.mpf("1e-21")
        assert abs(u - mp.mpf(98) / 267) < mp.mpf("11e-4")


def test_ode_residual_spotchecks(sol):
    """u'' = 2u^3 + tu by a sixth-order stencil at mixed regimes."""
    with mp.workdps(80):
        h = mp.mpf("1e-6")
        c = (-1, 9, -45, 0, 45, -9, 1)
        for t0 in (mp.mpf("5.1"), mp.mpf("0.37"), mp.mpf("-8.63"),
                   mp.mpf("-30.21")):
            up = [sol.eval(t0 + j * h, 70)[1] for j in range(-3, 4)]
            d2 = mp.fsum(ci * vi for ci, vi in zip(c, up)) / (60 * h)
            u, _ = sol.eval(t0, 70)
            sc = 1 + abs(2 * u ** 3 + t0 * u)
            assert abs(d2 - (2 * u ** 3 + t0 * u)) / sc < mp.mpf("1e-30")


def test_neg_asymptote(sol):
    with mp.workdps(70):
        t = mp.mpf(-40)
        u, _ = sol.eval(t, 60)
        ratio = u / mp.sqrt(-t / 2)
        # 1 + (1/8)t^-3 + O(t^-6)
        assert abs(ratio - (1 + mp.mpf(1) / 8 / t ** 3)) < mp.mpf("1e-7")


def test_omega_derivative_is_u_squared(sol):
    """omega = u^4 + t u^2 - u'^2 has omega' = u^2."""
    with mp.workdps(80):
        h = mp.mpf("1e-6")
        c = (-1, 9, -45, 0, 45, -9, 1)

        def om(t):
            u, v = sol.eval(t, 70)
            return u ** 4 + t * u * u - v * v

        for t0 in (mp.mpf("2.4"), mp.mpf("-12.7")):
            d = mp.fsum(ci * om(t0 + j * h)
                        for ci, j in zip(c, range(-3, 4))) / (60 * h)
            u, _ = sol.eval(t0, 70)
            assert abs(d - u * u) < mp.mpf("1e-28") * (1 + u * u)


def test_k0_location(sol):
    with mp.workdps(70):
        k0, tstar = k0_find(sol, 60)
        assert abs(k0 - mp.mpf(K0_GOLD)) < mp.mpf("1e-15")
        assert abs(tstar - mp.mpf(TSTAR_GOLD)) < mp.mpf("1e-15")
        # stationarity of -t/u^2: u - 2 t u' = 0 there
        u, v = sol.eval(tstar, 60)
        assert abs(u - 2 * tstar * v) < mp.mpf("1e-45")
        assert abs(k0 + tstar / u ** 2) < mp.mpf("1e-45")


def test_appendix_a_chain(sol):
    rep = appendix_a_check(sol)
    assert rep["pass"]
    assert rep["max_R4"] < mp.mpf("2e-3")
    lo, hi = rep["range_6yb2_t"]
    assert lo > mp.mpf(4) / 5 and hi < mp.mpf(13) / 5
    lo, hi = rep["range_6yb"]
    assert lo > mp.mpf(11) / 5 and hi < mp.mpf(49) / 10
    assert rep["min_u_ratio"] > rep["min_u_ratio_target"]
    assert rep["k0_chain"]


def test_yb_matches_solution(sol):
    """The model polynomial stays within the residual-driven band of the
    true solution over [-2, 0]."""
    with mp.workdps(50):
        for tq in (Fraction(-2), Fraction(-1), Fraction(-1, 2),
                   Fraction(0)):
            t = mp.mpf(tq.numerator) / tq.denominator
            u, _ = sol.eval(t, 40)
            assert abs(y_b(t) - u) < mp.mpf("2e-3")


def test_yb_second_derivative_consistent():
    with mp.workdps(50):
        h = mp.mpf("1e-8")
        for t in (mp.mpf("-1.3"), mp.mpf("-0.2")):
            d2 = (y_b(t + h) - 2 * y_b(t) + y_b(t - h)) / h ** 2
            assert abs(d2 - y_b_pp(t)) < mp.mpf("1e-12")


def test_dense_matches_series_handoff(sol, cfg):
    """Near t_m the stored dense segments and the deep-left series agree."""
    with mp.workdps(80):
        t = mp.mpf(cfg.t_m.numerator) / cfg.t_m.denominator + mp.mpf("0.1")
        u1, v1 = sol.eval(t, 70)
        assert mp.isfinite(u1) and u1 > 0


def test_cache_reload_identical(sol, cfg):
    from tw6.painleve2 import hm_build
    sol2 = hm_build(cfg, use_cache=True)
    with mp.workdps(70):
        for t in (mp.mpf("7.77"), mp.mpf("-23.45")):
            a = sol.eval(t, 60)
            b = sol2.eval(t, 60)
            assert a == b


@settings(max_examples=25, deadline=None)
@given(t=st.floats(min_value=-35, max_value=10,
                   allow_nan=False, allow_infinity=False))
def test_positivity_and_monotone_energy(sol, t):
    """u > 0 everywhere on the real line (distinguished solution)."""
    with mp.workdps(50):
        u, _ = sol.eval(mp.mpf(t), 40)
        assert u > 0
