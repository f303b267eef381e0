import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tw6.config import InsufficientDepthError
from tw6.precision import (AsymptoticSeries, IRKScheme, PanelQuad, Precision,
                           gl_nodes, integrate_path, quad_fn, tail_panels)

PREC = Precision(40)


def test_gl_nodes_integrate_polynomials():
    with mp.workdps(PREC.dps + 10):
        x, w = gl_nodes(12, PREC)
        assert len(x) == 12 and len(w) == 12
        # exact through degree 2n-1 on [0, 1]
        for d in (0, 1, 5, 17, 23):
            got = mp.fsum(wi * xi ** d for xi, wi in zip(x, w))
            assert abs(got - mp.mpf(1) / (d + 1)) < mp.mpf("1e-45")


def test_gl_nodes_symmetry():
    with mp.workdps(PREC.dps + 10):
        x, w = gl_nodes(9, PREC)
        for i in range(9):
            assert abs(x[i] + x[8 - i] - 1) < mp.mpf("1e-45")
            assert abs(w[i] - w[8 - i]) < mp.mpf("1e-45")
        assert abs(mp.fsum(w) - 1) < mp.mpf("1e-45")


def test_irk_exponential():
    """y' = -y over [0, 2] with 8 stages and h=1/4 hits e^-2 to scheme
    order."""
    with mp.workdps(60):
        scheme = IRKScheme.get(8, Precision(50))
        field = lambda t, y: [-y[0]]
        steps = [mp.mpf(1) / 4] * 8
        _, y = integrate_path(field, [mp.mpf(1)], mp.mpf(0), steps, scheme,
                              mp.mpf("1e-50"))
        assert abs(y[0] - mp.e ** -2) < mp.mpf("1e-28")


def test_irk_stiff_decay_stable():
    """A-stability: lambda h = -50 keeps the numerical solution bounded."""
    with mp.workdps(40):
        scheme = IRKScheme.get(6, Precision(30))
        field = lambda t, y: [-50 * y[0]]
        _, y = integrate_path(field, [mp.mpf(1)], mp.mpf(0), [mp.mpf(1)] * 4,
                              scheme, mp.mpf("1e-30"))
        assert abs(y[0]) < 1


def test_integrate_path_complex_direction():
    """y' = i y along a complex ray reproduces exp."""
    with mp.workdps(50):
        scheme = IRKScheme.get(10, Precision(40))
        field = lambda t, y: [mp.mpc(0, 1) * y[0]]
        h = mp.mpc("0.1", "0.05")
        _, y = integrate_path(field, [mp.mpc(1)], mp.mpc(0), [h] * 10,
                              scheme, mp.mpf("1e-40"))
        assert abs(y[0] - mp.exp(mp.mpc(0, 1) * 10 * h)) < mp.mpf("1e-35")


def test_panel_quad_cumulative():
    """Right-tail cumulative integrals of e^-t match 1 - e^-B + e^-x
    structure."""
    with mp.workdps(50):
        pq = PanelQuad([(0, 2), (2, 5), (5, 9)], 24, Precision(40))
        fvals = [[mp.e ** -t for t in row] for row in pq.nodes]
        total = pq.integrate(fvals)
        assert abs(total - (1 - mp.e ** -9)) < mp.mpf("1e-38")
        cum = pq.cumulative_right(fvals)
        for row_t, row_v in zip(pq.nodes, cum):
            for t, v in zip(row_t, row_v):
                assert abs(v - (mp.e ** -t - mp.e ** -9)) < mp.mpf("1e-27")


def test_tail_panels_extends_until_cutoff():
    with mp.workdps(30):
        panels = tail_panels(0, 3, lambda t: mp.e ** -t, mp.mpf("1e-12"))
        assert panels[0] == (0, 3)
        assert len(panels) > 3
        mid = (panels[-1][0] + panels[-1][1]) / 2
        assert mp.e ** -mid < mp.mpf("1e-12")


def test_quad_fn():
    with mp.workdps(40):
        got = quad_fn(lambda t: mp.sin(t), 0, mp.pi, 30, Precision(30))
        assert abs(got - 2) < mp.mpf("1e-28")


def test_asymptotic_series_geometric():
    """Sum w^m for w = (-t)^(-1/2) is 1/(1-w); all terms decrease, so the
    full sum is kept."""
    with mp.workdps(40):
        s = AsymptoticSeries([mp.mpf(1)] * 80)
        t = mp.mpf(-25)
        val, err = s.eval(t)
        w = mp.mpf("0.2")
        assert abs(val - (1 - w ** 80) / (1 - w)) < mp.mpf("1e-30")
        assert err < mp.mpf("1e-50")


def test_asymptotic_series_optimal_truncation():
    """Factorially divergent coefficients: error matches the smallest
    term and the tol gate raises when unreachable."""
    with mp.workdps(40):
        coeffs = [mp.factorial(m) for m in range(60)]
        s = AsymptoticSeries(coeffs)
        val, err = s.eval(mp.mpf(-100))
        assert err < mp.mpf("1e-3")
        assert abs(val - 1) < mp.mpf("0.2")
        with pytest.raises(InsufficientDepthError):
            s.eval(mp.mpf(-100), tol=mp.mpf("1e-30"))


def test_asymptotic_series_prefactor():
    with mp.workdps(40):
        s = AsymptoticSeries([mp.mpf(1)], pref_power=mp.mpf("0.5"),
                             pref_exp=mp.mpf(-2) / 3)
        t = mp.mpf(-9)
        val, _ = s.eval(t)
        assert abs(val - 3 * mp.e ** (-2 * 27 / mp.mpf(3))) < mp.mpf("1e-30")


@settings(max_examples=20, deadline=None)
@given(deg=st.integers(min_value=0, max_value=15),
       n=st.integers(min_value=8, max_value=20))
def test_gl_exactness_property(deg, n):
    with mp.workdps(45):
        x, w = gl_nodes(n, Precision(35))
        got = mp.fsum(wi * xi ** deg for xi, wi in zip(x, w))
        assert abs(got - mp.mpf(1) / (deg + 1)) < mp.mpf("1e-32")
