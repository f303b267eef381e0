"""Printed-coefficient fixtures for the three asymptotic engines and the
deep-left basis, plus ODE residual checks that need only the solution."""

import mpmath as mp
import pytest

from tw6.connection import neg_basis, o_series, pn_phi_series, qa_series

DPS = 50


def _close(a, b, tol="1e-40"):
    return abs(a - b) <= mp.mpf(tol) * (1 + abs(b))


class TestQASeries:
    def test_leading_q_coefficients(self):
        with mp.workdps(DPS):
            q, a = qa_series("+", 16, DPS)
            r2 = mp.sqrt(2)
            assert _close(q[3], 1 / r2)
            assert _close(q[6], mp.mpf(21) / 8)
            assert _close(q[9], mp.mpf(1707) / (64 * r2))
            assert _close(q[12], mp.mpf(49123) / 256)

    def test_leading_alpha_coefficients(self):
        with mp.workdps(DPS):
            q, a = qa_series("+", 16, DPS)
            r2 = mp.sqrt(2)
            assert _close(a[2], mp.mpf(-1) / 8)
            assert _close(a[5], mp.mpf(-37) / (64 * r2))
            assert _close(a[8], mp.mpf(-373) / 256)

    def test_branch_sign_flip(self):
        with mp.workdps(DPS):
            qp, ap = qa_series("+", 12, DPS)
            qm, am = qa_series("-", 12, DPS)
            # odd orders flip with the square-root branch
            assert _close(qm[3], -qp[3])
            assert _close(qm[6], qp[6])
            assert _close(am[2], ap[2])
            assert _close(am[5], -ap[5])

    def test_rejects_bad_branch(self):
        with pytest.raises(ValueError):
            qa_series("P", 8, DPS)


class TestOSeries:
    def test_printed_coefficients(self):
        with mp.workdps(DPS):
            s1, s2, s0 = o_series(20, DPS)
            r2 = mp.sqrt(2)
            assert _close(s2[2], mp.mpf(-1) / 4)
            assert _close(s0[5], 1 / r2)
            assert _close(s1[6], mp.mpf(67) / 72)
            assert _close(s1[12], mp.mpf(551671) / 10368)
            assert _close(s2[8], mp.mpf(-1273) / 288)
            assert _close(s0[11], mp.mpf(1009) / (18 * r2))

    def test_deep_coefficients(self):
        with mp.workdps(DPS):
            s1, s2, s0 = o_series(26, DPS)
            r2 = mp.sqrt(2)
            assert _close(s1[18], mp.mpf(22894539769) / 2239488)
            assert _close(s2[14], mp.mpf(-20411827) / 41472)
            assert _close(s0[17], mp.mpf(6873355) / (648 * r2))


class TestPNPhiSeries:
    def test_p_branch_phi1(self):
        with mp.workdps(DPS):
            f1, f2, f0 = pn_phi_series("+", 16, DPS)
            r2 = mp.sqrt(2)
            assert _close(f1[1], r2)
            assert _close(f1[4], mp.mpf(55) / 48)
            assert _close(f1[7], mp.mpf(9107) / (1536 * r2))

    def test_p_branch_phi2_phi0(self):
        with mp.workdps(DPS):
            f1, f2, f0 = pn_phi_series("+", 16, DPS)
            r2 = mp.sqrt(2)
            assert _close(f2[0], 1)
            assert _close(f2[3], mp.mpf(-5) / (48 * r2))
            assert _close(f2[6], mp.mpf(-1013) / 3072)
            assert _close(f2[9], mp.mpf(-2547101) / (1327104 * r2))
            assert _close(f0[0], 1)
            assert _close(f0[3], mp.mpf(7) / (48 * r2))
            assert _close(f0[6], mp.mpf(145) / 1024)
            assert _close(f0[9], mp.mpf(1496311) / (1327104 * r2))

    def test_n_branch_leading(self):
        with mp.workdps(DPS):
            f1, f2, f0 = pn_phi_series("-", 12, DPS)
            r2 = mp.sqrt(2)
            assert _close(f1[1], -r2)
            assert _close(f2[0], 1)
            assert _close(f0[0], -1)


class TestNegBasisODE:
    """Each asymptotic branch solves the t-direction system at deep real t:
    phi1' = -(2/3) phi2, phi2' = -(2/3) u phi0 - (1/6)(t + 2u^2) phi1,
    phi0' = (1/3) u' phi1 - (2/3) u phi2, checked by central differences."""

    @pytest.mark.parametrize("branch,tol", [
        ("P", "1e-20"), ("N", "1e-30"), ("O", "1e-22")])
    def test_residual(self, cfg, sol, branch, tol):
        nb = neg_basis(cfg)
        with mp.workdps(70):
            t = mp.mpf(-60)
            h = mp.mpf("1e-9")
            fd = (1, -8, 0, 8, -1)          # 4th-order central / 12h
            vals = {}
            for c in ("phi1", "phi2", "phi0"):
                vals[c] = [nb.eval(c, branch, t + j * h)[0]
                           for j in (-2, -1, 0, 1, 2)]
            u, v = sol.eval(t, 60)
            f1, f2, f0 = (vals["phi1"][2], vals["phi2"][2],
                          vals["phi0"][2])
            ders = {c: mp.fsum(ci * vi for ci, vi in zip(fd, vals[c]))
                    / (12 * h) for c in vals}
            sc = abs(f1) + abs(f2) + abs(f0)
            r1 = ders["phi1"] + mp.mpf(2) / 3 * f2
            r2 = ders["phi2"] + mp.mpf(2) / 3 * u * f0 \
                + (t + 2 * u * u) / 6 * f1
            r0 = ders["phi0"] - v / 3 * f1 + mp.mpf(2) / 3 * u * f2
            for r in (r1, r2, r0):
                assert abs(r) / sc < mp.mpf(tol)
