import mpmath as mp
from hypothesis import given, settings
from hypothesis import strategies as st

from tw6.airy import ai, aip, airy_bounds_check, bi, bip, constants, wronskian
from tw6.precision import Precision

PREC = Precision(50)


def test_known_values():
    with mp.workdps(60):
        # Ai(0) = 3^(-2/3)/Gamma(2/3), Ai'(0) = -3^(-1/3)/Gamma(1/3)
        a0 = mp.mpf(3) ** (mp.mpf(-2) / 3) / mp.gamma(mp.mpf(2) / 3)
        ap0 = -mp.mpf(3) ** (mp.mpf(-1) / 3) / mp.gamma(mp.mpf(1) / 3)
        assert abs(ai(mp.mpf(0), PREC) - a0) < mp.mpf("1e-48")
        assert abs(aip(mp.mpf(0), PREC) - ap0) < mp.mpf("1e-48")


def test_wronskian_pi():
    with mp.workdps(60):
        for t in (mp.mpf("-7.3"), mp.mpf(0), mp.mpf("11.25")):
            assert abs(wronskian(t, PREC) - 1 / mp.pi) < mp.mpf("1e-52")


def test_airy_ode_residual():
    """Ai'' = t Ai via a central difference on Ai'."""
    with mp.workdps(60):
        h = mp.mpf("1e-12")
        for t in (mp.mpf(2), mp.mpf("-3.5")):
            d2 = (aip(t + h, PREC) - aip(t - h, PREC)) / (2 * h)
            assert abs(d2 - t * ai(t, PREC)) < mp.mpf("1e-22")


def test_bounds_check():
    with mp.workdps(60):
        assert airy_bounds_check(mp.mpf(5), PREC)
        u_fake = mp.mpf(2)    # violates |u| < e^{-(2/3)t^{3/2}}
        assert not airy_bounds_check(mp.mpf(5), PREC, u=u_fake)


def test_constants_table():
    with mp.workdps(60):
        cst = constants(PREC)
        assert abs(cst["euler"] - mp.euler) < mp.mpf("1e-48")
        assert abs(cst["gamma_third"] - mp.gamma(mp.mpf(1) / 3)) \
            < mp.mpf("1e-48")
        assert abs(cst["zeta_prime_minus1"] - mp.zeta(-1, derivative=1)) \
            < mp.mpf("1e-48")


@settings(max_examples=40, deadline=None)
@given(t=st.floats(min_value=-12, max_value=12,
                   allow_nan=False, allow_infinity=False))
def test_real_in_real_out_and_wronskian(t):
    with mp.workdps(60):
        tv = mp.mpf(t)
        for f in (ai, bi, aip, bip):
            v = f(tv, PREC)
            assert isinstance(v, mp.mpf)
        w = ai(tv, PREC) * bip(tv, PREC) - aip(tv, PREC) * bi(tv, PREC)
        assert abs(w - 1 / mp.pi) < mp.mpf("1e-45")
