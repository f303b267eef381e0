import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tw6 import dist
from tw6.config import TW6Error

# closed form of the beta=6 tail constant; the integral route must agree
C6_CLOSED = ("-97/72*ln2 - 7/36*ln3 - ln(2pi)/6 + lnGamma(1/3)/3 "
             "+ zeta'(-1)/3")


def _c6_closed(dps):
    with mp.workdps(dps):
        return +(-mp.mpf(97) / 72 * mp.log(2)
                 - mp.mpf(7) / 36 * mp.log(3)
                 - mp.log(2 * mp.pi) / 6
                 + mp.loggamma(mp.mpf(1) / 3) / 3
                 + mp.zeta(-1, derivative=1) / 3)


def _c2_classical(dps):
    with mp.workdps(dps):
        return +(mp.log(2) / 24 + mp.zeta(-1, derivative=1))


def test_scaled_arg():
    with mp.workdps(40):
        s = dist.scaled_arg(mp.mpf(2))
        assert abs(s - 2 * mp.mpf(9) ** (mp.mpf(1) / 3)) < mp.mpf("1e-35")


def test_bexp_series_matches_direct():
    with mp.workdps(45):
        for t in (mp.mpf("0.3"), mp.mpf("2.5"), mp.mpf("4.9")):
            direct = t / mp.expm1(t) - 1 + t / 2 - t * t / 12
            assert abs(dist._bexp_series(t, 35) - direct) \
                < mp.mpf("1e-33") * (1 + abs(direct))


def test_c_beta_2_classical():
    """beta = 2 closes to ln2/24 + zeta'(-1)."""
    got = dist.c_beta(2, 45).c_beta
    with mp.workdps(50):
        assert abs(got - _c2_classical(50)) < mp.mpf("1e-42")


def test_c_beta_6_closed_form():
    """The Bose-kernel integral route agrees with the closed form to well
    past 25 digits."""
    got = dist.c_beta(6, 70).c_beta
    with mp.workdps(75):
        assert abs(got - _c6_closed(75)) < mp.mpf("1e-65")


def test_c_beta_rejects_nonpositive():
    with pytest.raises(TW6Error):
        dist.c_beta(0)


def test_ln_c_kappa_closed_value():
    got = dist.ln_c_kappa_closed(45)
    with mp.workdps(50):
        gold = mp.mpf("-0.3445050500286934815501994065702518")
        assert abs(got - gold) < mp.mpf("1e-33")
        # consistency with the tail constant: ln C_kappa = c6 - ln3/36
        # + (5/4) ln2
        alt = _c6_closed(50) - mp.log(3) / 36 + mp.mpf(5) / 4 * mp.log(2)
        assert abs(got - alt) < mp.mpf("1e-42")


def test_f6_tail_shape():
    with mp.workdps(45):
        cb = dist.c_beta(6, 40).c_beta
        a = dist.f6_tail(mp.mpf(-5), cb, 40)
        b = dist.f6_tail(mp.mpf(-6), cb, 40)
        assert 0 < b < a < 1
        lr = mp.log(a) - mp.log(b)
        # dominated by the |t|^3/4 term
        assert abs(lr - (216 - 125) / mp.mpf(4)) < 8


@settings(max_examples=15, deadline=None)
@given(b=st.floats(min_value=1, max_value=10))
def test_c_beta_duality_symmetry(b):
    """c_beta depends on beta/2 + 2/beta through its closed terms and the
    integral is smooth; sanity: finite and real."""
    got = dist.c_beta(b, 25).c_beta
    assert mp.isfinite(got)


class TestEvaluator:
    def test_f6_monotone_bounded(self, ev):
        with mp.workdps(75):
            prev = None
            for i in range(20):
                t = mp.mpf(-8) + mp.mpf(14) * i / 19
                f = ev.f6(t)
                assert 0 < f < 1
                if prev is not None:
                    assert f > prev
                prev = f

    def test_two_route_agreement(self, ev):
        with mp.workdps(75):
            for i in range(20):
                t = mp.mpf(-8) + mp.mpf(14) * i / 19
                f = ev.f6(t)
                g = ev.f6_alt(t)
                assert abs(f - g) <= mp.mpf("1e-20") * abs(f)

    def test_density_positive(self, ev):
        with mp.workdps(75):
            for t in (mp.mpf(-3), mp.mpf(-1), mp.mpf("0.5")):
                assert ev.density(t) > 0

    def test_tail_reproduction(self, ev):
        """|ln F6 - ln tail| <= 10 |t|^{-3/2}, improving as t decreases."""
        with mp.workdps(75):
            cb = dist.c_beta(6, 60).c_beta
            prev = None
            for tv in (-4, -5, -6, -7, -8):
                t = mp.mpf(tv)
                gap = abs(mp.log(ev.f6(t))
                          - mp.log(dist.f6_tail(t, cb, 60)))
                assert gap <= 10 * abs(t) ** mp.mpf("-1.5")
                if prev is not None:
                    assert gap < prev
                prev = gap

    def test_c_kappa_estimate(self, ev):
        with mp.workdps(75):
            closed = dist.ln_c_kappa_closed(60)
            for tn in (-40, -50, -60):
                val, err = ev.c_kappa_estimate(tn)
                assert abs(val - closed) <= 3 * err
        with pytest.raises(TW6Error):
            ev.c_kappa_estimate(-30)

    def test_omega(self, ev):
        with mp.workdps(75):
            om = ev.omega(mp.mpf(-10))
            u, v = ev.sol.eval(mp.mpf(-10), 60)
            assert abs(om - (u ** 4 - 10 * u * u - v * v)) < mp.mpf("1e-55")

    def test_below_range_rejected(self, ev):
        with pytest.raises(TW6Error):
            ev.f6(mp.mpf(-40))

    def test_table_rows(self, ev):
        rows = ev.table_rows([mp.mpf(-5), mp.mpf(0)])
        assert rows[0][3] is not None and rows[1][3] is None
        assert 0 < rows[0][1] < rows[1][1] < 1
