"""The third-order linear system

    phi1' = -(2/3) phi2
    phi2' = -(2/3) u phi0 - (1/6)(t + 2u^2) phi1
    phi0' = (1/3) u' phi1 - (2/3) u phi2

around the Hastings-McLeod u: boundary triples of the three canonical
columns at t_P from Airy tail integrals, the Picard-iteration oracle with
its contraction constants, the master downward sweep in slow variables
(regime switches at t = +-1), and Cole-Hopf recovery of (q2, alpha).

The sweep state is 12-dimensional: the nine slow column components plus
three accumulators (ln kappa, the integral of omega, and the integral of
(u'/u)(1+q2)/q2) that the distribution module consumes.  u is never part
of the state; its values at the collocation stage times come from the HM
build's stage table at matching grid keys, so the unstable direction of
Painleve II never contaminates the sweep.
"""

import os
from fractions import Fraction

import mpmath as mp

from . import airy
from .config import (CacheError, PoleError, TW6Error, grid_steps,
                     read_cache, write_cache)
from .precision import (IRKScheme, PanelQuad, Precision, _lagrange_weights,
                        irk_step, quad_fn, tail_panels)
from .painleve2 import neg_series


def _gamma():
    return mp.cbrt(9)        # 3^(2/3)


MIN_TP = 30


# -- boundary triples at t_P ----------------------------------------------

_boundary_cache = {}


def phi_boundary_all(t_p, digits):
    """3x3 fast matrix [rows phi1,phi2,phi0][cols 1,2,0] at t_p, with the
    (0,0)-column entry returned as Phi00 - 1 (third element of the extra
    slot) to keep the exponentially small part addressable.

    Returns (M, m00) where M[i][j] are fast values (M[2][2] = Phi00 full)
    and m00 = Phi00 - 1."""
    key = (mp.mpf(t_p), digits)
    if key in _boundary_cache:
        return _boundary_cache[key]
    if t_p < MIN_TP:
        raise TW6Error("boundary error orders need t_P >= %d" % MIN_TP)
    prec = Precision(digits)
    with mp.workdps(prec.dps + 10):
        t = mp.mpf(t_p)
        g = _gamma()
        cutoff = mp.mpf(10) ** (-digits - 12)
        # slowest integrand decay is Ai(s)Bi(s/g) ~ e^{-(4/9)s^{3/2}}
        ref = airy.ai(t, prec) * airy.bi(t / g, prec)

        def probe(s):
            return airy.ai(s, prec) * airy.bi(s / g, prec) / ref

        panels = tail_panels(t, mp.mpf("1.5"), probe, cutoff)
        n = max(40, int(0.7 * digits) + 20)
        pq = PanelQuad(panels, n, prec)
        # per-node Airy data
        A, Ap, Ag, Apg, Bg, Bpg = [], [], [], [], [], []
        for row in pq.nodes:
            ra, rap, rag, rapg, rbg, rbpg = [], [], [], [], [], []
            for s in row:
                ra.append(airy.ai(s, prec))
                rap.append(airy.aip(s, prec))
                rag.append(airy.ai(s / g, prec))
                rapg.append(airy.aip(s / g, prec))
                rbg.append(airy.bi(s / g, prec))
                rbpg.append(airy.bip(s / g, prec))
            A.append(ra)
            Ap.append(rap)
            Ag.append(rag)
            Apg.append(rapg)
            Bg.append(rbg)
            Bpg.append(rbpg)

        def tails(fvals):
            # int_inf^x f = -int_x^B f at every node
            cum = pq.cumulative_right(fvals)
            return [[-v for v in row] for row in cum]

        def total(fvals):
            return -pq.integrate(fvals)   # int_inf^{t_p}

        npan = len(panels)
        rng = range(n)
        # column 1
        p11 = airy.bi(t / g, prec)
        p21 = -mp.cbrt(3) / 2 * airy.bip(t / g, prec)
        f01 = [[Ap[p][i] * Bg[p][i] / 3 + A[p][i] * Bpg[p][i] / g
                for i in rng] for p in range(npan)]
        p01 = total(f01)
        # column 2
        p12 = airy.ai(t / g, prec)
        p22 = -mp.cbrt(3) / 2 * airy.aip(t / g, prec)
        f02 = [[Ap[p][i] * Ag[p][i] / 3 + A[p][i] * Apg[p][i] / g
                for i in rng] for p in range(npan)]
        p02 = total(f02)
        # column 0: inner tails of Bi(s/g)Ai(s) and Ai(s/g)Ai(s)
        fb = [[Bg[p][i] * A[p][i] for i in rng] for p in range(npan)]
        fa = [[Ag[p][i] * A[p][i] for i in rng] for p in range(npan)]
        IB = tails(fb)
        IA = tails(fa)
        ib0 = total(fb)
        ia0 = total(fa)
        c10 = -4 * mp.pi / 3 ** mp.mpf("4/3")
        c20 = 2 * mp.pi / 3
        p10 = c10 * (airy.ai(t / g, prec) * ib0 - airy.bi(t / g, prec) * ia0)
        p20 = c20 * (airy.aip(t / g, prec) * ib0
                     - airy.bip(t / g, prec) * ia0)
        # Phi00 - 1 = int_inf^t ( (1/3)Ai' Phi10 - (2/3)Ai Phi20 )
        f00 = []
        for p in range(npan):
            row = []
            for i in rng:
                p10s = c10 * (Ag[p][i] * IB[p][i] - Bg[p][i] * IA[p][i])
                p20s = c20 * (Apg[p][i] * IB[p][i] - Bpg[p][i] * IA[p][i])
                row.append(Ap[p][i] * p10s / 3 - 2 * A[p][i] * p20s / 3)
            f00.append(row)
        m00 = total(f00)
        M = [[+p11, +p12, +p10],
             [+p21, +p22, +p20],
             [+p01, +p02, 1 + m00]]
        out = (M, +m00)
    _boundary_cache[key] = out
    return out


def phi_boundary(k, t_p, digits):
    """Boundary triple (phi1, phi2, phi0) of column k in {1, 2, 0}."""
    M, _ = phi_boundary_all(t_p, digits)
    col = {1: 0, 2: 1, 0: 2}[k]
    return (M[0][col], M[1][col], M[2][col])


# -- Picard iteration oracle ----------------------------------------------

def contraction_constant(i, k, j, dps=30):
    """C_{ik}^{(j)} of the contraction proposition."""
    with mp.workdps(dps):
        base = mp.pi ** j * mp.mpf(3) ** (-mp.mpf(j) / 3)
        p = mp.mpf(1)
        if k == 1:
            if i in (1, 2):
                for m in range(1, j + 1):
                    p *= mp.mpf(6 * m - 1) / ((3 * m - 1) * (3 * m - 2))
                c = base * p / (2 if i == 2 else 1)
            else:
                for m in range(1, j + 1):
                    p *= mp.mpf(6 * m - 1) / ((3 * m - 1) * (3 * m + 1))
                c = base * p
        elif k == 2:
            if i in (1, 2):
                for m in range(1, j + 1):
                    p *= mp.mpf(6 * m + 1) / (3 * m * (3 * m - 1))
                c = base * p / (2 if i == 2 else 1)
            else:
                for m in range(1, j + 1):
                    p *= mp.mpf(6 * m + 1) / (3 * m * (3 * m + 2))
                c = base * p / 2
        elif k == 0:
            for m in range(1, j + 1):
                p *= mp.mpf(2 * m - 1) / (3 * m - 2)
            if i in (1, 2):
                c = 3 * base * p / mp.factorial(j - 1)
                if i == 2:
                    c = c / 2
            else:
                c = base * p / mp.factorial(j)
        else:
            raise ValueError("column must be 1, 2 or 0")
        return +c


def contraction_rate(i, k, j):
    """Exponential rate r in |Phi^{(j)} - Phi^{(j-1)}| < C t^{p} e^{-r t^{3/2}}
    (difference index j >= 1); rows 1,2 carry p=0,1/2 and base 2/3, row 0
    carries base 4/3."""
    kk = {1: 1, 2: 2, 0: 0}[k]
    base = mp.mpf(2) / 3 if i in (1, 2) else mp.mpf(4) / 3
    return mp.mpf(4) / 3 * (j - 1) + mp.mpf(4) / 9 * kk + base


def picard_boundary(k, j_max, t0, digits, sol):
    """Picard iterates of column k at t0.  Returns (iterates, report):
    iterates[j] = (phi1, phi2, phi0) for j = 0..j_max; the report lists
    contraction-bound violations (i, j, observed, bound)."""
    if j_max < 0 or j_max > 6:
        raise TW6Error("j_max limited to 0..6")
    prec = Precision(digits)
    with mp.workdps(prec.dps + 10):
        t = mp.mpf(t0)
        g = _gamma()
        cutoff = mp.mpf(10) ** (-digits - 12)
        ref = airy.ai(t, prec) * airy.bi(t / g, prec)
        panels = tail_panels(t, mp.mpf("1.5"),
                             lambda s: airy.ai(s, prec)
                             * airy.bi(s / g, prec) / ref, cutoff)
        n = max(40, int(0.7 * digits) + 20)
        pq = PanelQuad(panels, n, prec)
        npan, rng = len(panels), range(n)
        U, V, A, Ag, Bg = [], [], [], [], []
        for row in pq.nodes:
            ru, rv, ra, rag, rbg = [], [], [], [], []
            for s in row:
                uu, vv = sol.eval(s, digits + 5)
                ru.append(uu)
                rv.append(vv)
                ra.append(airy.ai(s, prec))
                rag.append(airy.ai(s / g, prec))
                rbg.append(airy.bi(s / g, prec))
            U.append(ru)
            V.append(rv)
            A.append(ra)
            Ag.append(rag)
            Bg.append(rbg)
        gk = {1: (airy.bi, airy.bip), 2: (airy.ai, airy.aip),
              0: (None, None)}[k]

        def gk_at(x):
            if k == 0:
                return mp.mpf(0), mp.mpf(0)
            f, fp = gk
            return f(x / g, prec), fp(x / g, prec) / g

        def tails(fvals):
            cum = pq.cumulative_right(fvals)
            return [[-v for v in row] for row in cum]

        def total(fvals):
            return -pq.integrate(fvals)

        d0 = 1 if k == 0 else 0
        g0, g0p = gk_at(t)
        # iterate 0 on the node grid; seeds use g_k(s) = Airy(s/gamma)
        if k == 0:
            P1 = [[mp.mpf(0)] * n for p in range(npan)]
            P2 = [[mp.mpf(0)] * n for p in range(npan)]
        else:
            src = Bg if k == 1 else Ag
            P1 = [[src[p][i] for i in rng] for p in range(npan)]
            # -(3/2) g_k'(s) with g_k(s) = Airy(s/gamma): derivative /gamma
            srcp = []
            for p in range(npan):
                rowp = []
                for i, s in enumerate(pq.nodes[p]):
                    ap = airy.bip(s / g, prec) if k == 1 \
                        else airy.aip(s / g, prec)
                    rowp.append(-mp.mpf(3) / 2 * ap / g)
                srcp.append(rowp)
            P2 = srcp
        f0 = [[V[p][i] * P1[p][i] / 3 - 2 * U[p][i] * P2[p][i] / 3
               for i in rng] for p in range(npan)]
        P0tail = tails(f0)
        P0 = [[d0 + P0tail[p][i] for i in rng] for p in range(npan)]
        it0 = (g0 if k != 0 else mp.mpf(0),
               -mp.mpf(3) / 2 * g0p if k != 0 else mp.mpf(0),
               d0 + total(f0))
        iterates = [it0]
        cA = 2 * mp.pi / mp.cbrt(3)
        for _ in range(j_max):
            K = [[-2 * U[p][i] * P0[p][i] / 3
                  - U[p][i] ** 2 * P1[p][i] / 3 for i in rng]
                 for p in range(npan)]
            fbK = [[Bg[p][i] * K[p][i] for i in rng] for p in range(npan)]
            faK = [[Ag[p][i] * K[p][i] for i in rng] for p in range(npan)]
            IbK, IaK = tails(fbK), tails(faK)
            ib0, ia0 = total(fbK), total(faK)
            nP1, nP2 = [], []
            for p in range(npan):
                r1, r2 = [], []
                for i, s in enumerate(pq.nodes[p]):
                    ags = Ag[p][i]
                    bgs = Bg[p][i]
                    gv = bgs if k == 1 else (ags if k == 2 else mp.mpf(0))
                    apg = airy.aip(s / g, prec)
                    bpg = airy.bip(s / g, prec)
                    gpv = (bpg if k == 1 else apg if k == 2 else 0) / g \
                        if k != 0 else mp.mpf(0)
                    r1.append(gv + cA * (ags * IbK[p][i] - bgs * IaK[p][i]))
                    r2.append(-mp.mpf(3) / 2 * gpv
                              - mp.pi * (apg * IbK[p][i] - bpg * IaK[p][i]))
                nP1.append(r1)
                nP2.append(r2)
            P1, P2 = nP1, nP2
            f0 = [[V[p][i] * P1[p][i] / 3 - 2 * U[p][i] * P2[p][i] / 3
                   for i in rng] for p in range(npan)]
            P0tail = tails(f0)
            P0 = [[d0 + P0tail[p][i] for i in rng] for p in range(npan)]
            v1 = (g0 if k != 0 else mp.mpf(0)) \
                + cA * (airy.ai(t / g, prec) * ib0
                        - airy.bi(t / g, prec) * ia0)
            v2 = (-mp.mpf(3) / 2 * g0p if k != 0 else mp.mpf(0)) \
                - mp.pi * (airy.aip(t / g, prec) * ib0
                           - airy.bip(t / g, prec) * ia0)
            v0 = d0 + total(f0)
            iterates.append((+v1, +v2, +v0))
        # contraction report
        violations = []
        t32 = t ** mp.mpf("1.5")
        for j in range(1, len(iterates)):
            for idx, i in enumerate((1, 2, 0)):
                diff = abs(iterates[j][idx] - iterates[j - 1][idx])
                c = contraction_constant(i, k, j, dps=prec.dps)
                bound = c * mp.e ** (-contraction_rate(i, k, j) * t32)
                if i == 2:
                    bound *= mp.sqrt(t)
                if diff > bound:
                    violations.append((i, j, +diff, +bound))
        return iterates, {"violations": violations,
                          "pass": not violations}


# -- master sweep ----------------------------------------------------------

POS, MID, NEG = "pos", "mid", "neg"


def regime_of(t):
    if t > 1:
        return POS
    if t >= -1:
        return MID
    return NEG


def _convert(y, t, src, dst, dps):
    """Convert the 9 slow components between regime conventions at a
    boundary point (t = 1 or t = -1).  Accumulators pass through."""
    if src == dst:
        return list(y)
    with mp.workdps(dps):
        t = mp.mpf(t)
        out = list(y)
        if src == POS and dst == MID:
            t32 = t ** mp.mpf("1.5")
            e = mp.e
            s29 = e ** (mp.mpf(2) / 9 * t32)
            s49 = e ** (mp.mpf(4) / 9 * t32)
            s89 = e ** (mp.mpf(8) / 9 * t32)
            s23 = e ** (mp.mpf(2) / 3 * t32)
            s43 = e ** (mp.mpf(4) / 3 * t32)
            out[0] = y[0] * s29          # Phi11
            out[1] = y[1] * s29
            out[2] = y[2] / s49
            out[3] = y[3] / s29
            out[4] = y[4] / s29
            out[5] = y[5] / s89
            out[6] = y[6] / s23
            out[7] = y[7] / s23
            out[8] = 1 + y[8] / s43      # Phi00
            return out
        if src == MID and dst == NEG:
            s = mp.e ** (-2 * mp.sqrt(2) / 9 * (-t) ** mp.mpf("1.5"))
            for i in range(9):
                out[i] = y[i] * s
            return out
        raise TW6Error("unsupported regime conversion %s->%s" % (src, dst))


def _make_field(regime, stage_map, fallback, accumulate):
    """RHS of the 12-component slow sweep in the given regime.  stage_map
    maps the exact stage times of the current step to (u, u', extras)."""

    def uv_at(tt):
        d = stage_map.get(tt)
        if d is None:
            d = fallback(tt)
        return d

    if regime == NEG:
        def field(tt, y):
            u, v, gp = uv_at(tt)
            u2 = u * u
            a = (tt + 2 * u2) / 6
            b = 2 * u / 3
            c = v / 3
            out = [0] * 12
            for o in (0, 3, 6):
                y1, y2, y0 = y[o], y[o + 1], y[o + 2]
                out[o] = -mp.mpf(2) / 3 * y2 + gp * y1
                out[o + 1] = -a * y1 - b * y0 + gp * y2
                out[o + 2] = c * y1 - b * y2 + gp * y0
            if accumulate:
                _accumulators(out, tt, u, v, y[6] / y[8], y[7] / y[8])
            return out
        return field

    if regime == MID:
        def field(tt, y):
            u, v = uv_at(tt)[:2]
            u2 = u * u
            a = (tt + 2 * u2) / 6
            b = 2 * u / 3
            c = v / 3
            out = [0] * 12
            for o in (0, 3, 6):
                y1, y2, y0 = y[o], y[o + 1], y[o + 2]
                out[o] = -mp.mpf(2) / 3 * y2
                out[o + 1] = -a * y1 - b * y0
                out[o + 2] = c * y1 - b * y2
            if accumulate:
                _accumulators(out, tt, u, v, y[6] / y[8], y[7] / y[8])
            return out
        return field

    def field(tt, y):
        # t > 1: per-column scalings of Table-1 type
        u, v, st, ue, ve, uei = uv_at(tt)
        # ue = u e^{(2/3)t^{3/2}}, ve likewise, uei = u e^{-(2/3)t^{3/2}}
        u2 = u * u
        a = (tt + 2 * u2) / 6
        out = [0] * 12
        third = mp.mpf(1) / 3
        # column 1
        out[0] = -2 * third * y[1] - third * st * y[0]
        out[1] = -a * y[0] - 2 * third * uei * y[2] - third * st * y[1]
        out[2] = third * ve * y[0] - 2 * third * ue * y[1] \
            + 2 * third * st * y[2]
        # column 2
        out[3] = -2 * third * y[4] + third * st * y[3]
        out[4] = -a * y[3] - 2 * third * uei * y[5] + third * st * y[4]
        out[5] = third * ve * y[3] - 2 * third * ue * y[4] \
            + 4 * third * st * y[5]
        # column 0 (affine: Phi00 = 1 + p00 e^{-(4/3)t^{3/2}})
        out[6] = -2 * third * y[7] + st * y[6]
        out[7] = -a * y[6] - 2 * third * ue - 2 * third * uei * y[8] \
            + st * y[7]
        out[8] = third * ve * y[6] - 2 * third * ue * y[7] + 2 * st * y[8]
        if accumulate:
            e43 = uei / ue if ue else mp.mpf(0)    # e^{-(4/3)t^{3/2}}
            den = 1 + y[8] * e43
            r1 = uei * y[6] / den
            r2 = uei * y[7] / den
            _acc_pos(out, tt, u, v, r1, r2)
        return out
    return field


def _accumulators(out, t, u, v, r1, r2):
    # r1 = phi1/phi0, r2 = phi2/phi0 in shared-scale variables
    q2t = u * r1               # tilde q2
    al = u * r2
    q2 = q2t - 1
    u2 = u * u
    vu = v / u
    out[9] = -mp.mpf(2) / 3 * al - (t + u2) * u2 / 3 \
        + vu / 6 * (2 * q2 - 1) + v * v / 3
    out[10] = u2 * (u2 + t) - v * v
    # regular part of (2/3)(u'/u)(1+q2)/q2: the q2 equation gives
    # (2/3)(u'/u)(1+q2)/q2 = (ln q2)' - (2/3) alpha + (u'/u)(1+q2)/3,
    # and the (ln q2)' piece cancels the 1/(2 q2) prefactor exactly
    out[11] = -mp.mpf(2) / 3 * al + vu * (1 + q2) / 3


def _acc_pos(out, t, u, v, q2t, al):
    # here q2t, al already are tilde q2 and alpha
    q2 = q2t - 1
    u2 = u * u
    vu = v / u
    out[9] = -mp.mpf(2) / 3 * al - (t + u2) * u2 / 3 \
        + vu / 6 * (2 * q2 - 1) + v * v / 3
    out[10] = u2 * (u2 + t) - v * v
    out[11] = -mp.mpf(2) / 3 * al + vu * (1 + q2) / 3


class PhiBasis:
    """Grid record of the master sweep: slow states with regime tags on
    the exact rational grid, plus accumulator values."""

    def __init__(self, cfg, sol, points, work_digits):
        self.cfg = cfg
        self.sol = sol
        self.points = points     # list of (Fraction t, tag, [12 values])
        self.work_digits = work_digits
        self.index = {p[0]: i for i, p in enumerate(points)}

    def t_values(self):
        return [p[0] for p in self.points]

    def state_at(self, tf):
        i = self.index.get(Fraction(tf))
        if i is None:
            raise TW6Error("t=%s not on the sweep grid" % tf)
        return self.points[i]

    def accumulators(self, tf):
        _, _, y = self.state_at(tf)
        return y[9], y[10], y[11]

    def fast_matrix(self, tf):
        """3x3 fast values [[Phi11,Phi12,Phi10],[Phi21,..],[Phi01,..,Phi00]]
        at grid point tf."""
        tf = Fraction(tf)
        _, tag, y = self.state_at(tf)
        with mp.workdps(self.work_digits + 5):
            t = mp.mpf(tf.numerator) / tf.denominator
            if tag == MID:
                f = list(y[:9])
            elif tag == NEG:
                s = mp.e ** (2 * mp.sqrt(2) / 9 * (-t) ** mp.mpf("1.5"))
                f = [v * s for v in y[:9]]
            else:
                t32 = t ** mp.mpf("1.5")
                e = mp.e
                s29 = e ** (mp.mpf(2) / 9 * t32)
                f = [y[0] * s29, y[1] * s29, y[2] * e ** (-mp.mpf(4) / 9 * t32),
                     y[3] / s29, y[4] / s29, y[5] * e ** (-mp.mpf(8) / 9 * t32),
                     y[6] * e ** (-mp.mpf(2) / 3 * t32),
                     y[7] * e ** (-mp.mpf(2) / 3 * t32),
                     1 + y[8] * e ** (-mp.mpf(4) / 3 * t32)]
            return [[f[0], f[3], f[6]],
                    [f[1], f[4], f[7]],
                    [f[2], f[5], f[8]]]

    def det_at(self, tf):
        M = self.fast_matrix(tf)
        with mp.workdps(self.work_digits + 5):
            return (M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1])
                    - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0])
                    + M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]))

    def det_safe_points(self, keep_digits):
        """Grid points where reconstructing the fast determinant keeps at
        least keep_digits after the slow-variable cancellation."""
        out = []
        with mp.workdps(30):
            for tf, tag, _ in self.points:
                t = mp.mpf(tf.numerator) / tf.denominator
                if tag == NEG:
                    loss = 3 * (2 * mp.sqrt(2) / 9) \
                        * (-t) ** mp.mpf("1.5") / mp.log(10)
                else:
                    loss = 0
                if self.work_digits - loss >= keep_digits:
                    out.append(tf)
        return out

    def interp_slow(self, t, m=16):
        """Slow 12-vector at off-grid t by Lagrange interpolation through
        the m nearest grid points of t's canonical regime.  Returns
        (tag, values)."""
        with mp.workdps(self.work_digits + 5):
            t = mp.mpf(t)
            tag = regime_of(t)
            cands = [(abs(mp.mpf(p[0].numerator) / p[0].denominator - t), i)
                     for i, p in enumerate(self.points) if p[1] == tag]
            cands.sort(key=lambda z: z[0])
            sel = sorted(i for _, i in cands[:m])
            ts = [mp.mpf(self.points[i][0].numerator)
                  / self.points[i][0].denominator for i in sel]
            w = _lagrange_weights(ts, t)
            vals = []
            for c in range(12):
                vals.append(mp.fsum(w[j] * self.points[i][2][c]
                                    for j, i in enumerate(sel)))
            return tag, vals

    def to_csv(self, fh):
        cols = ["p11", "p21", "p01", "p12", "p22", "p02",
                "p10", "p20", "p00", "ln_kappa", "I_omega", "I_r"]
        fh.write("# slow variables; pos/neg tags follow the regime table, "
                 "p00 in pos regime is (Phi00-1)e^{(4/3)t^{3/2}}\n")
        fh.write("t,regime," + ",".join(cols) + "\n")
        with mp.workdps(self.work_digits + 5):
            for tf, tag, y in self.points:
                t = mp.mpf(tf.numerator) / tf.denominator
                fh.write(mp.nstr(t, 17) + "," + tag + ","
                         + ",".join(mp.nstr(v, self.cfg.digits)
                                    for v in y) + "\n")


def _stage_extras(regime, t, u, v, dps):
    if regime == NEG:
        return (u, v, mp.sqrt(2) / 3 * mp.sqrt(-t))
    if regime == MID:
        return (u, v)
    t32 = t ** mp.mpf("1.5")
    E = mp.e ** (mp.mpf(2) / 3 * t32)
    return (u, v, mp.sqrt(t), u * E, v * E, u / E)


def phi_integrate(cfg, sol, use_cache=True, force_rebuild=False,
                  t_bottom=None, work_digits=None, accumulate=True):
    """Master downward sweep t_p -> t_bottom (default t_n).  Returns a
    PhiBasis of slow states on the exact rational grid."""
    t_bottom = Fraction(t_bottom if t_bottom is not None else cfg.t_n)
    wd = work_digits or cfg.work_digits
    path = os.path.join(cfg.cache_dir,
                        "phi_%s_%s_%s.txt" % (cfg.grid_key("phi"),
                                              t_bottom.numerator, wd))
    if use_cache and not force_rebuild:
        cached = read_cache(path)
        if cached is not None:
            return _load_basis(cfg, sol, cached)
    basis = _sweep(cfg, sol, t_bottom, wd, accumulate)
    if use_cache:
        _store_basis(basis, path)
    return basis


def _sweep(cfg, sol, t_bottom, wd, accumulate):
    prec = Precision(wd)
    steps = grid_steps(cfg.clipped_plan(cfg.t_p, t_bottom))
    t_m = cfg.t_m
    series_u, series_v = neg_series(cfg.series_depth, wd + 10)
    with mp.workdps(prec.dps):
        t_p = mp.mpf(cfg.t_p.numerator) / cfg.t_p.denominator
        M, m00 = phi_boundary_all(t_p, wd + 5)
        t32 = t_p ** mp.mpf("1.5")
        e = mp.e
        s29 = e ** (mp.mpf(2) / 9 * t32)
        y = [M[0][0] / s29, M[1][0] / s29, M[2][0] * e ** (mp.mpf(4) / 9 * t32),
             M[0][1] * s29, M[1][1] * s29, M[2][1] * e ** (mp.mpf(8) / 9 * t32),
             M[0][2] * e ** (mp.mpf(2) / 3 * t32),
             M[1][2] * e ** (mp.mpf(2) / 3 * t32),
             m00 * e ** (mp.mpf(4) / 3 * t32)]
        u_p, _ = sol.eval(t_p, wd + 5)
        y += [-mp.log(u_p) / 2, mp.mpf(0), mp.mpf(0)]
        scheme = IRKScheme.get(cfg.stages, prec)
        tol = mp.mpf(10) ** (-(wd - 3))
        points = [(cfg.t_p, POS, [+v for v in y])]
        t = t_p
        prev = None
        regime = POS
        for t0f, hf in steps:
            h = -mp.mpf(hf.numerator) / hf.denominator
            te_f = t0f - hf
            mid_t = t0f - hf / 2
            reg = regime_of(mp.mpf(mid_t.numerator) / mid_t.denominator)
            if reg != regime:
                y = _convert(y, t, regime, reg, prec.dps)
                regime = reg
                prev = None
            # stage data for this step
            stage_map = {}
            for i, ci in enumerate(scheme.nodes):
                tt = t + ci * h
                if t0f > t_m:
                    uu, vv = sol.eval(tt, wd + 5)
                else:
                    uu, eu = series_u.eval(tt)
                    vv, ev = series_v.eval(tt)
                stage_map[tt] = _stage_extras(reg, tt, uu, vv, prec.dps)

            def fallback(tt, _r=reg):
                uu, vv = sol.eval(tt, wd + 5)
                return _stage_extras(_r, tt, uu, vv, prec.dps)

            field = _make_field(reg, stage_map, fallback, accumulate)
            init = None
            if prev is not None and prev[0] == h:
                init = []
                for row in scheme.extrap:
                    init.append([mp.fsum(row[j] * prev[1][j][m]
                                         for j in range(cfg.stages))
                                 for m in range(12)])
            y, ts, Y, F = irk_step(field, y, t, h, scheme, tol,
                                   init_stages=init)
            prev = (h, Y)
            t = t + h
            if te_f == 1:
                y = _convert(y, t, POS, MID, prec.dps)
                regime = MID
                prev = None
                points.append((te_f, MID, [+v for v in y]))
            else:
                points.append((te_f, regime, [+v for v in y]))
    return PhiBasis(cfg, sol, points, wd)


def _store_basis(basis, path):
    lines = []
    with mp.workdps(basis.work_digits + 5):
        for tf, tag, y in basis.points:
            lines.append("%s/%s %s %s" % (
                tf.numerator, tf.denominator, tag,
                " ".join(mp.nstr(v, basis.work_digits) for v in y)))
    write_cache(path, {"kind": "phi", "work_digits": str(basis.work_digits),
                       "stages": str(basis.cfg.stages)}, lines)


def _load_basis(cfg, sol, cached):
    header, lines = cached
    try:
        wd = int(header["work_digits"])
        points = []
        with mp.workdps(wd + 5):
            for ln in lines:
                parts = ln.split()
                if len(parts) != 14:
                    raise ValueError("bad record width")
                num, den = parts[0].split("/")
                points.append((Fraction(int(num), int(den)), parts[1],
                               [mp.mpf(x) for x in parts[2:]]))
    except (KeyError, ValueError, IndexError) as e:
        raise CacheError("unparseable phi cache: %s" % e)
    return PhiBasis(cfg, sol, points, wd)


# -- Cole-Hopf recovery ----------------------------------------------------

def q2_alpha(basis, c1, c2, c0, t, sol=None):
    """(q2, alpha) of the solution with parameters (c1, c2, c0) at grid
    point t; q2 = tilde q2 - 1."""
    sol = sol or basis.sol
    tf = Fraction(t)
    M = basis.fast_matrix(tf)
    with mp.workdps(basis.work_digits + 5):
        tv = mp.mpf(tf.numerator) / tf.denominator
        f1 = c1 * M[0][0] + c2 * M[0][1] + c0 * M[0][2]
        f2 = c1 * M[1][0] + c2 * M[1][1] + c0 * M[1][2]
        f0 = c1 * M[2][0] + c2 * M[2][1] + c0 * M[2][2]
        scale = abs(c1 * M[2][0]) + abs(c2 * M[2][1]) + abs(c0 * M[2][2])
        if scale == 0 or abs(f0) < mp.mpf(10) ** (-basis.cfg.digits // 2) \
                * scale:
            raise PoleError("phi0 vanishes near t=%s" % mp.nstr(tv, 8),
                            t0=tv)
        u, _ = sol.eval(tv, basis.work_digits)
        return +(f1 / f0 * u - 1), +(f2 / f0 * u)


# -- Appendix B log-norm bounds -------------------------------------------

def norm_growth_check(trajectory, coeff, digits=30, quad_n=60):
    """Two-sided log-norm bounds for a 2-vector linear ODE trajectory.
    trajectory: list of (t, (v1, v2)); coeff(t) -> ((f11, f12), (f21, f22)).
    Verifies ln|v(t1)| <= ln|v(t0)| + (1/2) int (tr + s) and the lower
    bound with -s, s = sqrt((f11-f22)^2 + (f12+f21)^2)."""
    prec = Precision(digits)
    with mp.workdps(prec.dps + 5):
        t0, v0 = trajectory[0]
        t1, v1 = trajectory[-1]
        n0 = mp.sqrt(abs(v0[0]) ** 2 + abs(v0[1]) ** 2)
        n1 = mp.sqrt(abs(v1[0]) ** 2 + abs(v1[1]) ** 2)

        def mu(t, sign):
            (f11, f12), (f21, f22) = coeff(t)
            s = mp.sqrt((f11 - f22) ** 2 + (f12 + f21) ** 2)
            return (f11 + f22 + sign * s) / 2

        upper = quad_fn(lambda s: mu(s, 1), t0, t1, quad_n, prec)
        lower = quad_fn(lambda s: mu(s, -1), t0, t1, quad_n, prec)
        if t1 < t0:
            # downward trajectory: the roles of the bounds swap
            upper, lower = lower, upper
        ln_ratio = mp.log(n1 / n0)
        slack = mp.mpf(10) ** (-digits + 8) * (1 + abs(upper) + abs(lower))
        return bool(lower - slack <= ln_ratio <= upper + slack)
