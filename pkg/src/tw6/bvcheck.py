"""Boundary-picture verification in the x direction.

The two Y columns satisfy 2x2 linear ODEs in x at fixed t; they are started
from truncated asymptotic data deep on their respective sides (col6 from
x = +infinity, col3 from x = -infinity) and integrated toward 0.  Both
integrations run against the locally fast direction, so boundary truncation
error injected into the fast mode is crushed rather than amplified.

F(x, t) is then assembled from kappa, q2, alpha and the columns; the report
samples it along finite proxies for the arcs of the boundary diagram.
"""

import json
from collections import namedtuple

import mpmath as mp

from .config import TW6Error
from .phisystem import q2_alpha
from .precision import IRKScheme, Precision, integrate_path

YColumn = namedtuple("YColumn", "which t xs values")

BOUNDARY_TERMS = 40


def default_x_start(t):
    return max(3 * mp.sqrt(max(mp.mpf(t), mp.mpf(1))), mp.mpf(12))


def _boundary_series(which, t, u, v, x, terms):
    """Truncated 1/x expansion of the column at the starting point,
    summed with optimal truncation.  col3 at x < 0 maps onto the col6
    recursion via (x, Y11, Y21) -> (-x, second, first component)."""
    t = mp.mpf(t)
    x = abs(mp.mpf(x))
    tu2 = t + u * u
    p = [mp.mpf(0), -u]               # first-row coefficients p_k
    q = [mp.mpf(1)]                   # second-row coefficients q_k

    def at(seq, i):
        return seq[i] if i >= 0 else mp.mpf(0)

    for k in range(3, terms + 3):
        # second row at order k-2 (the p_{k-1} dependency substituted out)
        qk = u / (k - 2) * ((k - 3) * at(p, k - 3) - tu2 * at(p, k - 2)
                            + v / u * ((k - 4) * at(p, k - 4)
                                       - tu2 * at(p, k - 3))
                            - v * v / u * at(q, k - 3))
        q.append(qk)
        # first row at order k-1
        p.append(-(k - 4) * at(p, k - 4) + tu2 * at(p, k - 3)
                 - u * qk + v * at(q, k - 3))
    xi = 1 / x
    s1 = mp.mpf(0)
    s2 = mp.mpf(0)
    last = mp.inf
    best = None
    for k in range(len(q)):
        tp = at(p, k) * xi ** k
        tq = q[k] * xi ** k
        mag = abs(tp) + abs(tq)
        if k > 2 and mag > last:
            break
        s1 += tp
        s2 += tq
        last = mag
        best = mag
    if which == "col3":
        return s2, s1, best
    return s1, s2, best


def y_column(which, t, x_grid, sol, digits=40, x_start=None,
             terms=BOUNDARY_TERMS, h=None):
    """Column values on x_grid (list of x >= 0 for col6, x <= 0 for col3),
    integrated in from the asymptotic side."""
    if which not in ("col6", "col3"):
        raise TW6Error("which must be col6 or col3")
    prec = Precision(digits)
    wd = prec.dps + 10
    with mp.workdps(wd):
        t = mp.mpf(t)
        u, v = sol.eval(t, digits + 10)
        xs = sorted((mp.mpf(x) for x in x_grid),
                    reverse=(which == "col6"))
        sgn = 1 if which == "col6" else -1
        for x in xs:
            if sgn * x < 0:
                raise TW6Error("%s needs x with sign %+d" % (which, sgn))
        x0 = mp.mpf(x_start) if x_start is not None \
            else default_x_start(t)
        if abs(xs[0]) > x0:
            x0 = abs(xs[0])
        x0 *= sgn
        if which == "col6":
            def field(x, y):
                return [(-t + x * x - u * u) * y[0] + (x * u - v) * y[1],
                        (x * u + v) * y[0] + u * u * y[1]]
        else:
            def field(x, y):
                return [-u * u * y[0] + (x * u - v) * y[1],
                        (x * u + v) * y[0] + (t - x * x + u * u) * y[1]]
        y1, y2, trunc = _boundary_series(which, t, u, v, x0, terms)
        y = [y1, y2]
        scheme = IRKScheme.get(max(8, digits // 4 + 4), prec)
        tol = mp.mpf(10) ** (-wd + 3)
        hh = mp.mpf(h) if h is not None else mp.mpf("0.25")
        out = []
        xc = x0
        for x in xs:
            span = x - xc                 # toward zero
            if abs(span) > 0:
                n = max(1, int(mp.ceil(abs(span) / hh)))
                steps = [span / n] * n
                _, y = integrate_path(field, y, xc, steps, scheme, tol)
                xc = x
            out.append((+y[0], +y[1]))
        return YColumn(which, +t, [+x for x in xs], out)


_FD6 = (-1, 9, -45, 0, 45, -9, 1)    # 6th-order central difference / 60h


def y_column_residual(which, t, probe_xs, sol, digits=30, h="1e-3"):
    """Max relative x-derivative residual at the probe points, by a
    7-point sixth-order stencil on freshly integrated column values."""
    with mp.workdps(Precision(digits).dps + 10):
        t = mp.mpf(t)
        h = mp.mpf(h)
        u, v = sol.eval(t, digits + 10)
        cluster = []
        for x in probe_xs:
            cluster.extend(mp.mpf(x) + j * h for j in range(-3, 4))
        col = y_column(which, t, cluster, sol, digits)
        lut = {}
        for x, val in zip(col.xs, col.values):
            lut[mp.nstr(x, 25)] = val
        worst = mp.mpf(0)
        for x in probe_xs:
            x = mp.mpf(x)
            y = lut[mp.nstr(x, 25)]
            if which == "col6":
                rhs = [(-t + x * x - u * u) * y[0] + (x * u - v) * y[1],
                       (x * u + v) * y[0] + u * u * y[1]]
            else:
                rhs = [-u * u * y[0] + (x * u - v) * y[1],
                       (x * u + v) * y[0] + (t - x * x + u * u) * y[1]]
            sc = abs(y[0]) + abs(y[1]) + 1
            for m in range(2):
                d = mp.fsum(c * lut[mp.nstr(x + j * h, 25)][m]
                            for c, j in zip(_FD6, range(-3, 4))) / (60 * h)
                worst = max(worst, abs(d - rhs[m])
                            / (sc * (1 + abs(x) ** 2 + abs(t))))
        return +worst


def bv_F(x, t, ev, digits=40):
    """F(beta=6; x/3^(1/3), t/3^(2/3)) from the column data and the sweep
    state at t."""
    with mp.workdps(Precision(digits).dps + 10):
        x = mp.mpf(x)
        t = mp.mpf(t)
        q2, al, lnk, _, _ = ev.state(t)
        u, _ = ev.sol.eval(t, digits + 10)
        pref = mp.e ** lnk * mp.sqrt(u)
        lin = ((1 + q2) / 2 * x - al) / u
        if x >= 0:
            col = y_column("col6", t, [x], ev.sol, digits)
            y12, y22 = col.values[0]
            return +(pref * (lin * y12 + y22))
        col = y_column("col3", t, [x], ev.sol, digits)
        y11, y21 = col.values[0]
        return +(-pref * mp.e ** (x ** 3 / 3 - x * t) * (lin * y11 + y21))


def branch_continuity(ev, t, digits=40):
    """|F(0-,t) - F(0+,t)| / scale between the two branch formulas."""
    with mp.workdps(Precision(digits).dps + 10):
        fp = bv_F(mp.mpf(0), t, ev, digits)
        fn = bv_F(mp.mpf("-1e-25"), t, ev, digits)
        return +(abs(fp - fn) / (1 + abs(fp)))


def c1c2_necessity_probe(basis, sol, c1, c2, t):
    """Blow-up indicator along x = -sqrt(t): e^{(2/3)t^{3/2}} u^{-1}
    |−sqrt(t)(1+q2)/2 − alpha| for the combination (c1, c2, 1)."""
    with mp.workdps(basis.work_digits + 5):
        q2, al = q2_alpha(basis, c1, c2, 1, t)
        tv = mp.mpf(t)
        u, _ = sol.eval(tv, basis.cfg.digits + 10)
        ind = mp.e ** (mp.mpf(2) / 3 * tv ** mp.mpf("1.5")) / u \
            * abs(-mp.sqrt(tv) * (1 + q2) / 2 - al)
        return +ind


ARCS = (
    # (arc, params, expected description, tolerance, kind)
    ("HA", {"t": 4, "x": 20}, "F6 value at t", None, "f6"),
    ("AB", {"t": 12, "x": 12}, 1, mp.mpf("1e-6"), "value"),
    ("BC", {"t": 8, "x": 0}, 1, mp.mpf("1e-3"), "value"),
    ("CD", {"t": 9, "x": "-2sqrt"}, 0, mp.mpf("1e-3"), "value"),
    ("DE", {"t": 2, "x": -12}, 0, mp.mpf("1e-4"), "value"),
    ("FG", {"t": -12, "x": -6}, 0, mp.mpf("1e-2"), "value"),
    ("GH", {"t": -12, "x": 6}, 0, mp.mpf("1e-2"), "value"),
)


def arc_limits_report(ev, digits=40):
    """Finite-proxy samples of F along the boundary arcs, as a JSON-ready
    list of {arc, probe, observed, expected, pass}."""
    out = []
    with mp.workdps(Precision(digits).dps + 10):
        for arc, pr, expected, tol, kind in ARCS:
            t = mp.mpf(pr["t"])
            x = pr["x"]
            if x == "-2sqrt":
                x = -2 * mp.sqrt(t)
            x = mp.mpf(x)
            f = bv_F(x, t, ev, digits)
            if kind == "f6":
                ref = ev.f6(t / mp.cbrt(9))
                tol = mp.mpf(10) ** (-digits // 3)
                ok = abs(f - ref) <= tol * (1 + abs(ref))
                expected = float(ref)
            else:
                ref = mp.mpf(expected)
                ok = abs(f - ref) <= tol
            out.append({"arc": arc,
                        "probe": {"t": float(t), "x": float(x)},
                        "observed": mp.nstr(f, 12),
                        "expected": expected if kind == "f6"
                        else float(ref),
                        "tol": float(tol),
                        "pass": bool(ok)})
        # transition window midpoint: no numeric target, report only
        t = mp.mpf(16)
        x = -mp.sqrt(t)
        f = bv_F(x, t, ev, digits)
        out.append({"arc": "CD-transition",
                    "probe": {"t": float(t), "x": float(x)},
                    "observed": mp.nstr(f, 12),
                    "expected": "in (0,1)",
                    "tol": None,
                    "pass": bool(0 < f < 1)})
    return out


def report_json(report):
    return json.dumps(report, indent=2)
