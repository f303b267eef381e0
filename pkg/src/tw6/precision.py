"""Arbitrary-precision core: Gauss-Legendre nodes, implicit Runge-Kutta
collocation, composite panel quadrature and asymptotic series with optimal
truncation.

The IRK scheme is the classical s-stage Gauss collocation method (order 2s).
Stage equations are solved by fixed-point iteration, which for a step of
size h converges like (h L)^m / m! — factorially — so no Newton solve is
needed even for moderately stiff coefficients.  A polynomial extrapolation
of the previous step's stage values serves as predictor.

PanelQuad integrates functions known at Gauss nodes of a panel decomposition
and can also produce the cumulative integral from the right end at every
node (Legendre antiderivative identity), which is what the semi-infinite
tail integrals of the boundary data need.
"""

import mpmath as mp
from dataclasses import dataclass

from .config import InsufficientDepthError, StageDivergenceError


@dataclass(frozen=True)
class Precision:
    digits: int

    def __post_init__(self):
        if self.digits < 15:
            raise ValueError("digits >= 15 required")

    @property
    def dps(self):
        return self.digits + 5

    def tol(self, guard=5):
        return mp.mpf(10) ** (-self.digits + guard)


_legendre_cache = {}


def _legendre_pair(n, x):
    # returns (P_n(x), P_{n-1}(x)) by upward recurrence
    p0, p1 = mp.mpf(1), x
    if n == 0:
        return p0, mp.mpf(0)
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    return p1, p0


def gl_nodes(n, prec):
    """Gauss-Legendre nodes and weights on (0,1), ascending nodes."""
    if n < 1:
        raise ValueError("n >= 1")
    key = (n, prec.dps)
    if key in _legendre_cache:
        return _legendre_cache[key]
    with mp.workdps(prec.dps + 10):
        nodes, weights = [], []
        for k in range(1, n + 1):
            x = mp.cos(mp.pi * (4 * k - 1) / (4 * n + 2))
            converged = False
            for _ in range(prec.dps + 40):
                pn, pnm1 = _legendre_pair(n, x)
                dpn = n * (x * pn - pnm1) / (x * x - 1)
                dx = pn / dpn
                x = x - dx
                if abs(dx) < mp.mpf(10) ** (-prec.dps - 6):
                    converged = True
                    break
            if not converged:
                raise ArithmeticError("Legendre root %d/%d did not converge" % (k, n))
            pn, pnm1 = _legendre_pair(n, x)
            dpn = n * (x * pn - pnm1) / (x * x - 1)
            w = 2 / ((1 - x * x) * dpn * dpn)
            nodes.append((x + 1) / 2)
            weights.append(w / 2)
        order = sorted(range(n), key=lambda i: nodes[i])
        nodes = [+nodes[i] for i in order]
        weights = [+weights[i] for i in order]
    _legendre_cache[key] = (nodes, weights)
    return nodes, weights


def _lagrange_weights(cs, x):
    # values of the Lagrange basis polynomials through nodes cs at point x
    out = []
    for j, cj in enumerate(cs):
        num, den = mp.mpf(1), mp.mpf(1)
        for k, ck in enumerate(cs):
            if k == j:
                continue
            num *= (x - ck)
            den *= (cj - ck)
        out.append(num / den)
    return out


_scheme_cache = {}


class IRKScheme:
    """Gauss collocation tableau: nodes c, weights b, coupling A with
    A[i][j] = integral of the j-th Lagrange basis over [0, c_i]."""

    def __init__(self, stages, prec):
        self.stages = stages
        self.prec = prec
        with mp.workdps(prec.dps + 10):
            c, b = gl_nodes(stages, Precision(prec.digits + 10))
            self.nodes = [+x for x in c]
            self.weights = [+w for w in b]
            # quadrature exact for degree stages-1 with stages points
            qx, qw = gl_nodes(stages, Precision(prec.digits + 10))
            A = []
            for ci in self.nodes:
                row_pts = [ci * x for x in qx]
                row = [mp.mpf(0)] * stages
                for p, wq in zip(row_pts, qw):
                    lw = _lagrange_weights(self.nodes, p)
                    for j in range(stages):
                        row[j] += ci * wq * lw[j]
                A.append(row)
            self.coupling = A
            # predictor: extrapolate previous stage polynomial to 1 + c_i
            self.extrap = [_lagrange_weights(self.nodes, 1 + ci)
                           for ci in self.nodes]

    @classmethod
    def get(cls, stages, prec):
        key = (stages, prec.dps)
        if key not in _scheme_cache:
            _scheme_cache[key] = cls(stages, prec)
        return _scheme_cache[key]


def irk_step(field, y, t, h, scheme, tol, max_iter=220, init_stages=None):
    """One collocation step.  field(t, y) -> dy/dt (lists of mpf/mpc).
    Returns (y_next, stage_times, stage_values, stage_fields).
    Raises StageDivergenceError if the fixed point fails to settle."""
    s = scheme.stages
    n = len(y)
    A, b, c = scheme.coupling, scheme.weights, scheme.nodes
    ts = [t + ci * h for ci in c]
    if init_stages is None:
        Y = [list(y) for _ in range(s)]
    else:
        Y = [list(v) for v in init_stages]
    F = [field(ts[i], Y[i]) for i in range(s)]
    # relative per-component scales; a norm-based floor keeps components
    # that pass through zero from demanding unattainable absolute accuracy,
    # but there is no absolute floor: when the whole solution is tiny
    # (e.g. Airy-sized) convergence must still be relative to it
    smax = max(abs(v) for v in y) or mp.mpf(1)
    scales = [max(abs(v), mp.mpf("1e-3") * smax) for v in y]
    last = None
    for it in range(max_iter):
        delta = mp.mpf(0)
        for i in range(s):
            Ai = A[i]
            for m in range(n):
                acc = mp.fsum(Ai[j] * F[j][m] for j in range(s))
                new = y[m] + h * acc
                d = abs(new - Y[i][m]) / scales[m]
                if d > delta:
                    delta = d
                Y[i][m] = new
        for i in range(s):
            F[i] = field(ts[i], Y[i])
        if delta < tol:
            break
        if last is not None and delta > 4 * last and delta > 1:
            raise StageDivergenceError("stage iteration diverging", t=t)
        last = delta
    else:
        raise StageDivergenceError("stage iteration exceeded budget", t=t)
    y_next = [y[m] + h * mp.fsum(b[j] * F[j][m] for j in range(s))
              for m in range(n)]
    return y_next, ts, Y, F


def integrate_path(field, y0, t0, steps, scheme, tol, on_step=None,
                   max_halvings=6):
    """Integrate y' = field(t, y) through the given list of complex/real
    steps h (so the path is t0, t0+h1, t0+h1+h2, ...).  Uses the previous
    step's collocation polynomial as stage predictor.  On divergence a step
    is split in halves, recursively up to max_halvings.

    on_step(t_new, y_new, stage_times, stage_values) is called after each
    top-level step."""
    t, y = t0, list(y0)
    prev = None   # (h, stage_values) for predictor

    def one(t, y, h, depth, prev):
        init = None
        if prev is not None and depth == 0:
            ph, pY = prev
            if ph == h:
                init = []
                for row in scheme.extrap:
                    init.append([mp.fsum(row[j] * pY[j][m]
                                         for j in range(scheme.stages))
                                 for m in range(len(y))])
        try:
            return irk_step(field, y, t, h, scheme, tol, init_stages=init)
        except StageDivergenceError:
            if depth >= max_halvings:
                raise
            y_mid, _, _, _ = one(t, y, h / 2, depth + 1, None)
            return one(t + h / 2, y_mid, h / 2, depth + 1, None)

    for h in steps:
        y, ts, Y, F = one(t, y, h, 0, prev)
        prev = (h, Y)
        t = t + h
        if on_step is not None:
            on_step(t, y, ts, Y)
    return t, y


class PanelQuad:
    """Composite Gauss-Legendre quadrature over explicit panels with
    cumulative right-tail integrals at the nodes."""

    def __init__(self, panels, n, prec):
        self.panels = [(mp.mpf(a), mp.mpf(b)) for a, b in panels]
        self.n = n
        self.prec = prec
        x, w = gl_nodes(n, prec)
        self.ref_nodes, self.ref_weights = x, w
        self.nodes = [[a + (b - a) * xi for xi in x] for a, b in self.panels]
        # Legendre values P_k(2x-1) at the reference nodes, k = 0..n
        key = ("ptab", n, prec.dps)
        if key not in _legendre_cache:
            with mp.workdps(prec.dps + 10):
                tab = []
                for xi in x:
                    z = 2 * xi - 1
                    row = [mp.mpf(1), z]
                    for k in range(2, n + 1):
                        row.append(((2 * k - 1) * z * row[-1]
                                    - (k - 1) * row[-2]) / k)
                    tab.append(row)
            _legendre_cache[key] = tab
        self.ptab = _legendre_cache[key]

    def all_nodes(self):
        return [t for row in self.nodes for t in row]

    def integrate(self, fvals):
        """fvals: per-panel lists of node values."""
        total = mp.mpf(0)
        for (a, b), row in zip(self.panels, fvals):
            total += (b - a) * mp.fsum(w * f for w, f in
                                       zip(self.ref_weights, row))
        return total

    def cumulative_right(self, fvals):
        """Returns per-panel lists: at node x, integral of f over [x, B]
        where B is the right end of the last panel."""
        n = self.n
        # antiderivative values A(node) with A(right edge) = 0, per panel
        per_panel = []
        panel_totals = []
        for (a, b), row in zip(self.panels, fvals):
            # Legendre coefficients of the degree n-1 interpolant
            coef = []
            for k in range(n):
                s = mp.fsum(self.ref_weights[i] * self.ptab[i][k] * row[i]
                            for i in range(n))
                coef.append((2 * k + 1) * s)
            # antiderivative in z = 2x-1: int P_k = (P_{k+1}-P_{k-1})/(2k+1)
            vals = []
            for i in range(n):
                P = self.ptab[i]
                acc = coef[0] * P[1]
                for k in range(1, n):
                    acc += coef[k] * (P[k + 1] - P[k - 1]) / (2 * k + 1)
                vals.append(acc)
            # value of the antiderivative at z = 1: P_{k+1}(1)-P_{k-1}(1)=0
            right = coef[0]     # only k=0 survives: P_1(1) = 1
            scale = (b - a) / 4  # dz = 2 dx/(b-a); integral scale (b-a)/2
            tail_in_panel = [(right - v) * 2 * scale for v in vals]
            per_panel.append(tail_in_panel)
            left = -coef[0]
            panel_totals.append((right - left) * 2 * scale)
        # add the totals of the panels to the right
        out = []
        for p in range(len(self.panels)):
            add = mp.fsum(panel_totals[p + 1:]) if p + 1 < len(self.panels) \
                else mp.mpf(0)
            out.append([v + add for v in per_panel[p]])
        return out


def tail_panels(a, width, decay_probe, cutoff, max_panels=400):
    """Panel decomposition [a, a+width, ...] extended until
    |decay_probe(panel midpoint)| < cutoff."""
    panels = []
    lo = mp.mpf(a)
    for _ in range(max_panels):
        hi = lo + width
        panels.append((lo, hi))
        if abs(decay_probe((lo + hi) / 2)) < cutoff:
            break
        lo = hi
    return panels


def quad_fn(f, a, b, n, prec):
    pq = PanelQuad([(a, b)], n, prec)
    vals = [[f(t) for t in pq.nodes[0]]]
    return pq.integrate(vals)


class AsymptoticSeries:
    """Series sum_m coeffs[m] * w^(offset + stride*m) with w = (-t)^(-1/2),
    times the prefactor (-t)^pref_power * exp(pref_exp * (-t)^(3/2)).

    Evaluation truncates at the smallest term and reports that term's
    magnitude (times the prefactor) as the error."""

    def __init__(self, coeffs, stride=1, offset=0, pref_power=0, pref_exp=0):
        self.coeffs = list(coeffs)
        self.stride = stride
        self.offset = offset
        self.pref_power = mp.mpf(pref_power)
        self.pref_exp = mp.mpf(pref_exp)

    def prefactor(self, t):
        mt = -mp.mpmathify(t)
        out = mt ** self.pref_power if self.pref_power else mp.mpf(1)
        if self.pref_exp:
            out = out * mp.exp(self.pref_exp * mt ** mp.mpf("1.5"))
        return out

    def eval(self, t, tol=None):
        mt = -mp.mpmathify(t)
        w = mt ** mp.mpf("-0.5")
        wp = w ** self.offset
        wstep = w ** self.stride
        terms = []
        growing = False
        for c in self.coeffs:
            terms.append(c * wp)
            wp = wp * wstep
            if len(terms) >= 3 and abs(terms[-1]) > abs(terms[-2]) \
                    and abs(terms[-2]) > abs(terms[-3]):
                growing = True
                break
        mags = [abs(x) for x in terms]
        if growing:
            # truncate just before the smallest term; that term is the error
            kstar = min(range(len(mags)), key=lambda i: mags[i])
            value = sum(terms[:kstar], mp.mpf(0))
            err = mags[kstar]
        else:
            # exhausted while still decreasing: keep everything
            value = sum(terms, mp.mpf(0))
            err = mags[-1] if len(terms) > 1 else mp.mpf(0)
        pre = self.prefactor(t)
        value = value * pre
        err = err * abs(pre)
        if tol is not None and err > tol:
            raise InsufficientDepthError(
                "asymptotic depth insufficient: achieved %s" % mp.nstr(err, 3),
                achieved=err)
        return value, err


def eval_series(series, t, tol=None):
    return series.eval(t, tol=tol)
