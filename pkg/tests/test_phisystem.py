import random
from fractions import Fraction

import mpmath as mp
import pytest

from tw6.config import TW6Error
from tw6.phisystem import (contraction_constant, phi_boundary,
                           phi_boundary_all, picard_boundary, q2_alpha)


def test_boundary_needs_deep_tp():
    with pytest.raises(TW6Error):
        phi_boundary_all(20, 40)


def test_boundary_column_values(sol, cfg):
    """Column 0 at t_P: Phi00 - 1 is exponentially small and Phi10, Phi20
    are Airy-sized."""
    with mp.workdps(80):
        M, m00 = phi_boundary_all(36, 60)
        t32 = mp.mpf(36) ** mp.mpf("1.5")
        assert 0 < abs(m00) < mp.e ** (-mp.mpf(4) / 3 * t32) * 1000
        assert abs(M[2][2] - 1) < mp.mpf("1e-60")
        assert 0 < abs(M[0][2]) < mp.e ** (-mp.mpf(2) / 3 * t32) * 1000


def test_phi_boundary_accessor():
    with mp.workdps(80):
        M, _ = phi_boundary_all(36, 60)
        f1, f2, f0 = phi_boundary(1, 36, 60)
        assert (f1, f2, f0) == (M[0][0], M[1][0], M[2][0])


def test_contraction_constants_decay():
    """The iteration constants eventually decay geometrically in j."""
    with mp.workdps(40):
        for k in (1, 2, 0):
            cs = [contraction_constant(1, k, j) for j in (3, 4, 5, 6)]
            for a, b in zip(cs, cs[1:]):
                assert abs(b) < abs(a)
            assert abs(cs[-1]) < 1


def test_picard_boundary_oracle(sol):
    its, rep = picard_boundary(1, 4, 6, 30, sol)
    assert rep["pass"]
    assert not rep["violations"]


class TestSweep:
    def test_det_drift(self, basis, cfg):
        with mp.workdps(basis.work_digits + 5):
            d0 = basis.det_at(cfg.t_p)
            worst = mp.mpf(0)
            for tf in basis.det_safe_points(cfg.digits)[::5]:
                worst = max(worst, abs(basis.det_at(tf) / d0 - 1))
            assert worst <= mp.mpf("1e-45")

    def test_q2_alpha_positive_asymptote(self, basis, sol):
        """(0,0,1) at t=8: q2 + 1 matches the leading Airy-squared decay
        within 20%."""
        with mp.workdps(basis.work_digits + 5):
            q2, al = q2_alpha(basis, 0, 0, 1, Fraction(8))
            t = mp.mpf(8)
            lead = 1 / (8 * mp.pi) * t ** mp.mpf("-1.5") \
                * mp.e ** (-mp.mpf(4) / 3 * t ** mp.mpf("1.5"))
            assert abs((q2 + 1) / lead - 1) < mp.mpf("0.2")

    def test_q2_alpha_negative_asymptote(self, basis, sol):
        """(0,0,1) at t=-30 against the two-term deep-left expansions,
        within next-term error."""
        with mp.workdps(basis.work_digits + 5):
            q2, al = q2_alpha(basis, 0, 0, 1, Fraction(-30))
            at = mp.mpf(30)
            r2 = mp.sqrt(2)
            q_ref = 1 / r2 * at ** mp.mpf("-1.5") \
                + mp.mpf(21) / 8 * at ** -3
            q_next = mp.mpf(1707) / (64 * r2) * at ** mp.mpf("-4.5")
            a_ref = mp.sqrt(at / 2) - mp.mpf(1) / 8 / at
            a_next = mp.mpf(37) / (64 * r2) * at ** mp.mpf("-2.5")
            assert abs(q2 - q_ref) < 2 * q_next
            assert abs(al - a_ref) < 2 * a_next

    def test_q2_alpha_ode_residuals(self, basis, sol, cfg):
        """Residuals of the nonlinear (q2, alpha) system on 50 deterministic
        pseudo-random grid points in [-30, 20].  The derivatives of
        q2 = u phi1/phi0 - 1 and alpha = u phi2/phi0 follow from the linear
        system by the chain rule, so the residual is a pure algebra check of
        the swept values against equations that were never integrated."""
        rng = random.Random(20260825)
        with mp.workdps(basis.work_digits + 5):
            pts = set()
            while len(pts) < 50:
                x = Fraction(rng.randint(-1200, 800), 40)
                if abs(x) <= Fraction(3, 2) or x not in basis.index:
                    continue
                pts.add(x)
            worst = mp.mpf(0)
            for tf in sorted(pts):
                t = mp.mpf(tf.numerator) / tf.denominator
                M = basis.fast_matrix(tf)
                f1, f2, f0 = M[0][2], M[1][2], M[2][2]
                u, v = sol.eval(t, cfg.digits + 10)
                q2 = u * f1 / f0 - 1
                al = u * f2 / f0
                d1 = -mp.mpf(2) / 3 * f2
                d2 = -mp.mpf(2) / 3 * u * f0 - (t + 2 * u * u) / 6 * f1
                d0 = v / 3 * f1 - mp.mpf(2) / 3 * u * f2
                dq = (v * f1 + u * d1) / f0 - u * f1 * d0 / f0 ** 2
                da = (v * f2 + u * d2) / f0 - u * f2 * d0 / f0 ** 2
                rhs_q = mp.mpf(2) / 3 * al * q2 \
                    + v / u * (1 + q2) * (2 - q2) / 3
                rhs_a = al * (mp.mpf(2) / 3 * al + v / u * (2 - q2) / 3) \
                    - t / 6 * (1 + q2) - u * u / 3 * (3 + q2)
                sc = 1 + abs(q2) + abs(al) + abs(t)
                worst = max(worst, abs(dq - rhs_q) / sc,
                            abs(da - rhs_a) / sc)
            assert worst <= mp.mpf("1e-30")

    def test_accumulator_omega_consistency(self, basis, ev):
        """d/dt of the omega accumulator equals omega itself on the
        grid (checked by a symmetric difference of grid values)."""
        with mp.workdps(basis.work_digits + 5):
            hq = Fraction(1, 20)
            t0 = Fraction(-10)
            h = mp.mpf(hq.numerator) / hq.denominator
            im = basis.accumulators(t0 + hq)[1]
            ip = basis.accumulators(t0 - hq)[1]
            d = (ip - im) / (2 * h)      # accumulators run downward
            om = ev.omega(mp.mpf(-10))
            assert abs(d + om) < mp.mpf("1e-3") * (1 + abs(om))

    def test_pole_free_distinguished_column(self, basis):
        """Phi00-combination of (0,0,1) never vanishes on the grid: q2_alpha
        succeeds at every 8th grid point."""
        for tf, tag, _ in basis.points[::8]:
            q2_alpha(basis, 0, 0, 1, tf)
