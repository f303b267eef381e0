"""The Hastings-McLeod solution of Painleve II, u'' = t u + 2 u^3.

Three regimes:
  t >= t_h : closed approximation u = Ai - 2 pi Ai int_inf^t Bi Ai^3
             + 2 pi Bi int_inf^t Ai^4 (relative error e^{-(8/3) t^{3/2}});
  [t_m, t_h] : implicit Runge-Kutta integration downward from t_h, run at
             strongly boosted precision because perturbations grow like
             e^{(1/3)(-2t)^{3/2}} toward -infinity;
  t < t_m  : the sqrt(-t/2) series with recursion-generated coefficients,
             evaluated by optimal truncation.

The hot integration runs in (ln u, u'/u), where the solution is smooth and
non-oscillatory on the whole line; in the raw variables u itself is the
fast Airy mode for t >> 0 and collocation truncation there would be
amplified fatally on the way down.  The build stores the per-step stage
values as dense collocation segments, so everything downstream evaluates
(u, u') anywhere in [t_m, t_h] by local polynomial interpolation.
"""

import os
from fractions import Fraction

import mpmath as mp

from . import airy
from .config import CacheError, TW6Error, read_cache, write_cache
from .precision import (AsymptoticSeries, IRKScheme, PanelQuad, Precision,
                        _lagrange_weights, gl_nodes, integrate_path,
                        tail_panels)


_coeff_cache = {}


def u_series_coeffs(depth, dps):
    """Coefficients a_k of u = sqrt(-t/2) * sum a_k (-t)^{-3k}, a_0 = 1.
    Recursion from substituting the ansatz into Painleve II:
    2 a_m = -(1/4)(1 - 36(m-1)^2) a_{m-1} - conv_m,
    conv_m = sum over i+j+k = m, all < m, of a_i a_j a_k."""
    key = (depth, dps)
    if key in _coeff_cache:
        return _coeff_cache[key]
    with mp.workdps(dps):
        a = [mp.mpf(1)]
        for m in range(1, depth):
            conv = mp.mpf(0)
            for i in range(m + 1):
                for j in range(m + 1 - i):
                    k = m - i - j
                    if i < m and j < m and k < m:
                        conv += a[i] * a[j] * a[k]
            j1 = 6 * (m - 1)
            a.append(((j1 * j1 - 1) * a[m - 1] / 4 - conv) / 2)
        a = [+x for x in a]
    _coeff_cache[key] = a
    return a


def neg_series(depth, dps):
    """(u, u') as AsymptoticSeries in w = (-t)^{-1/2} for t << 0.
    u  = (-t)^{ 1/2} * sum (a_k/sqrt2) w^{6k}
    u' = (-t)^{-1/2} * sum (-(1-6k) a_k/(2 sqrt2)) w^{6k}"""
    a = u_series_coeffs(depth, dps)
    with mp.workdps(dps):
        r2 = mp.sqrt(2)
        cu = [ak / r2 for ak in a]
        cv = [-(1 - 6 * k) * ak / (2 * r2) for k, ak in enumerate(a)]
    su = AsymptoticSeries(cu, stride=6, offset=0, pref_power=mp.mpf("0.5"))
    sv = AsymptoticSeries(cv, stride=6, offset=0, pref_power=mp.mpf("-0.5"))
    return su, sv


def pos_approx(t, digits):
    """(u, u') for t >= ~30 from the Airy-integral closed form.  The u'
    formula drops the integrand terms, which cancel exactly."""
    prec = Precision(digits)
    with mp.workdps(prec.dps + 10):
        t = mp.mpf(t)
        # quadrature nodes: integrand ~ e^{-(4/3) s^{3/2}}
        cutoff = mp.mpf(10) ** (-digits - 10)
        ref = airy.ai(t, prec) ** 3 * airy.bi(t, prec)
        panels = tail_panels(
            t, mp.mpf("1.5"),
            lambda s: airy.ai(s, prec) ** 3 * airy.bi(s, prec) / ref,
            cutoff)
        n = max(40, int(0.7 * digits) + 15)
        pq = PanelQuad(panels, n, prec)
        fa4, fba3 = [], []
        for row in pq.nodes:
            ra, rb = [], []
            for s in row:
                A = airy.ai(s, prec)
                B = airy.bi(s, prec)
                ra.append(A ** 4)
                rb.append(B * A ** 3)
            fa4.append(ra)
            fba3.append(rb)
        ia4 = -pq.integrate(fa4)      # int_inf^t = -int_t^inf
        iba3 = -pq.integrate(fba3)
        A, B = airy.ai(t, prec), airy.bi(t, prec)
        Ap, Bp = airy.aip(t, prec), airy.bip(t, prec)
        tp = 2 * mp.pi
        u = A - tp * A * iba3 + tp * B * ia4
        v = Ap - tp * Ap * iba3 + tp * Bp * ia4
        return +u, +v


class HMSolution:
    """Immutable three-regime evaluator with dense collocation output."""

    def __init__(self, cfg, checkpoints, segments, build_digits,
                 build_stages, store_digits):
        self.cfg = cfg
        self.t_m = mp.mpf(cfg.t_m.numerator) / cfg.t_m.denominator
        self.t_h = mp.mpf(cfg.t_h.numerator) / cfg.t_h.denominator
        # checkpoints: list of (Fraction t, mpf u, mpf v), descending t
        self.checkpoints = checkpoints
        # segments: list of (Fraction t0, Fraction h, [(l_i, m_i)] at the
        # build scheme's Gauss nodes of [t0, t0 - h]), descending t0
        self.segments = segments
        self.build_digits = build_digits
        self.build_stages = build_stages
        self.store_digits = store_digits
        self.series_u, self.series_v = neg_series(
            cfg.series_depth, build_digits + 10)
        self._eval_cache = {}

    # -- regime dispatch ---------------------------------------------------

    def eval(self, t, digits=None):
        """(u, u') at real t."""
        digits = digits or self.cfg.digits
        t = mp.mpf(t)
        key = (t, digits)
        if key in self._eval_cache:
            return self._eval_cache[key]
        if t > self.t_h:
            out = pos_approx(t, digits + 10)
        elif t < self.t_m:
            with mp.workdps(digits + 15):
                u, eu = self.series_u.eval(t)
                v, ev = self.series_v.eval(t)
                tol = mp.mpf(10) ** (-digits)
                if eu > tol * abs(u):
                    raise TW6Error(
                        "series regime reaches only %s digits at t=%s"
                        % (mp.nstr(-mp.log10(eu / abs(u)), 4), mp.nstr(t, 8)))
            out = (+u, +v)
        else:
            out = self._eval_mid(t, digits)
        self._eval_cache[key] = out
        return out

    def _nearest_checkpoint_above(self, t):
        lo, hi = 0, len(self.checkpoints) - 1
        # checkpoints descending; find last with t_c >= t
        best = 0
        while lo <= hi:
            mid = (lo + hi) // 2
            tc = self.checkpoints[mid][0]
            if mp.mpf(tc.numerator) / tc.denominator >= t:
                best = mid
                lo = mid + 1
            else:
                hi = mid - 1
        return self.checkpoints[best]

    def _eval_mid(self, t, digits=None):
        if self.segments:
            return self._dense(t, digits)
        # fallback: short re-integration from the nearest checkpoint above;
        # spans are <= 0.25 so error growth is benign
        tcf, u0, v0 = self._nearest_checkpoint_above(t)
        wp = min(self.build_digits, (digits or self.cfg.digits) + 15)
        wp = max(wp, 30)
        with mp.workdps(wp + 5):
            tc = mp.mpf(tcf.numerator) / tcf.denominator
            if tc == t:
                return +u0, +v0
            span = tc - t
            nsub = max(1, int(mp.ceil(span / mp.mpf("0.05"))))
            h = -span / nsub
            scheme = IRKScheme.get(self.cfg.stages, Precision(wp))
            tol = mp.mpf(10) ** (-(wp - 8))
            _, y = integrate_path(pii_field, [u0, v0], tc, [h] * nsub,
                                  scheme, tol)
            return +y[0], +y[1]

    def _segment_for(self, t):
        lo, hi = 0, len(self.segments) - 1
        best = None
        while lo <= hi:
            mid = (lo + hi) // 2
            t0f, hf, _ = self.segments[mid]
            t0 = mp.mpf(t0f.numerator) / t0f.denominator
            if t0 >= t:
                best = mid
                lo = mid + 1
            else:
                hi = mid - 1
        if best is None:
            best = 0
        t0f, hf, vals = self.segments[best]
        return t0f, hf, vals

    def _dense(self, t, digits=None):
        """(u, u') from the local collocation polynomial in (ln u, u'/u)."""
        wp = min(self.store_digits, (digits or self.cfg.digits) + 15)
        with mp.workdps(wp + 8):
            t0f, hf, vals = self._segment_for(t)
            t0 = mp.mpf(t0f.numerator) / t0f.denominator
            h = mp.mpf(hf.numerator) / hf.denominator
            c, _ = gl_nodes(self.build_stages, Precision(wp + 5))
            x = (t0 - t) / h      # position in [0, 1] along the step
            lw = _lagrange_weights(c, x)
            l = mp.fsum(w * vals[i][0] for i, w in enumerate(lw))
            m = mp.fsum(w * vals[i][1] for i, w in enumerate(lw))
            u = mp.exp(l)
            return +u, +(m * u)


def pii_field(t, y):
    u, v = y
    return [v, t * u + 2 * u ** 3]


def lm_field(t, y):
    """Painleve II for (l, m) = (ln u, u'/u).  u is positive and l is
    smooth and non-oscillatory on the whole line, so high-order collocation
    truncation error is negligible here, while in the raw (u, u') variables
    the solution itself is the fast Airy mode for t >> 0 and every relative
    truncation slip gets amplified by e^{(1/3)(-2t)^{3/2}} on the way down."""
    l, m = y
    return [m, t + 2 * mp.exp(2 * l) - m * m]


# -- build / cache ---------------------------------------------------------

def _cache_path(cfg):
    return os.path.join(cfg.cache_dir, "u_%s.txt" % cfg.grid_key("u"))


def hm_build(cfg, use_cache=True, force_rebuild=False):
    if cfg.digits < 30:
        raise TW6Error("hm_build needs >= 30 digits")
    path = _cache_path(cfg)
    if use_cache and not force_rebuild:
        cached = read_cache(path)
        if cached is not None:
            return _load(cfg, cached)
    sol = _build(cfg)
    if use_cache:
        _store(cfg, sol, path)
    return sol


def _build(cfg):
    wd = cfg.u_work_digits
    s_build = cfg.u_build_stages
    prec = Precision(wd)
    plan = cfg.clipped_plan(cfg.t_h, cfg.t_m)
    checkpoints = []
    segments = []
    with mp.workdps(prec.dps):
        u0, v0 = pos_approx(mp.mpf(cfg.t_h.numerator) / cfg.t_h.denominator,
                            wd)
        scheme = IRKScheme.get(s_build, prec)
        tol = mp.mpf(10) ** (-(wd - 8))
        t = mp.mpf(cfg.t_h.numerator) / cfg.t_h.denominator
        y = [mp.log(u0), v0 / u0]
        checkpoints.append((cfg.t_h, u0, v0))
        for a, b, hf in plan:
            n = int((a - b) / hf)
            h = -mp.mpf(hf.numerator) / hf.denominator
            seg_pos = [0]

            def grab(t_new, y_new, ts, Y, _a=a, _hf=hf, _p=seg_pos):
                t0f = _a - _p[0] * _hf
                _p[0] += 1
                segments.append((t0f, _hf, [(+Yi[0], +Yi[1]) for Yi in Y]))
                tf = t0f - _hf
                if tf.denominator <= 4:
                    uc = mp.exp(y_new[0])
                    checkpoints.append((tf, +uc, +(y_new[1] * uc)))

            # no step halving: the dense segments must cover whole steps
            t, y = integrate_path(lm_field, y, t, [h] * n, scheme, tol,
                                  on_step=grab, max_halvings=0)
        # regime consistency against the series at t_m (meaningful only
        # when t_m is deep enough for the series to converge well)
        if cfg.t_m <= -30:
            su, _ = neg_series(cfg.series_depth, wd)
            sval, serr = su.eval(t)
            uend = mp.exp(y[0])
            if abs(sval - uend) > mp.mpf(10) ** (-cfg.digits // 2) \
                    and abs(sval - uend) > 10 * serr:
                raise TW6Error("regime inconsistency at t_m: |diff|=%s"
                               % mp.nstr(abs(sval - uend), 5))
    return HMSolution(cfg, checkpoints, segments, wd, s_build, wd)


def _store(cfg, sol, path):
    wd = sol.build_digits
    sd = cfg.digits + 25
    lines = []
    with mp.workdps(wd + 5):
        for tf, u, v in sol.checkpoints:
            lines.append("C %s/%s %s %s" % (tf.numerator, tf.denominator,
                                            mp.nstr(u, sd),
                                            mp.nstr(v, sd)))
        for t0f, hf, vals in sol.segments:
            flat = " ".join("%s %s" % (mp.nstr(l, sd), mp.nstr(m, sd))
                            for l, m in vals)
            lines.append("G %s/%s %s/%s %s" % (t0f.numerator,
                                               t0f.denominator,
                                               hf.numerator, hf.denominator,
                                               flat))
    write_cache(path, {"kind": "u", "digits": str(cfg.digits),
                       "build_digits": str(wd),
                       "build_stages": str(sol.build_stages),
                       "store_digits": str(sd)}, lines)


def _load(cfg, cached):
    header, lines = cached
    try:
        wd = int(header["build_digits"])
        sd = int(header["store_digits"])
        s_build = int(header["build_stages"])
        checkpoints, segments = [], []
        with mp.workdps(sd + 5):
            for ln in lines:
                parts = ln.split()
                if parts[0] == "C":
                    num, den = parts[1].split("/")
                    checkpoints.append((Fraction(int(num), int(den)),
                                        mp.mpf(parts[2]), mp.mpf(parts[3])))
                elif parts[0] == "G":
                    num, den = parts[1].split("/")
                    hn, hd = parts[2].split("/")
                    rest = parts[3:]
                    if len(rest) != 2 * s_build:
                        raise ValueError("bad segment width")
                    vals = [(mp.mpf(rest[2 * i]), mp.mpf(rest[2 * i + 1]))
                            for i in range(s_build)]
                    segments.append((Fraction(int(num), int(den)),
                                     Fraction(int(hn), int(hd)), vals))
                else:
                    raise ValueError(ln)
    except (KeyError, ValueError, IndexError) as e:
        raise CacheError("unparseable u-cache: %s" % e)
    return HMSolution(cfg, checkpoints, segments, wd, s_build, sd)


# -- k0 and the Appendix A chain ------------------------------------------

def k0_find(sol, digits=None):
    """k0 = -min t/u^2 via Newton on psi = u - 2 t u'."""
    digits = digits or sol.cfg.digits
    with mp.workdps(digits + 10):
        t = mp.mpf("-1.2")
        for _ in range(60):
            u, v = sol.eval(t, digits + 5)
            psi = u - 2 * t * v
            dpsi = -v - 2 * t * (t * u + 2 * u ** 3)
            dt = psi / dpsi
            t = t - dt
            if abs(dt) < mp.mpf(10) ** (-digits - 2):
                break
        else:
            # bracket-scan fallback
            ts = [mp.mpf(-3) + i * mp.mpf("0.01") for i in range(290)]
            vals = [x / sol.eval(x, digits)[0] ** 2 for x in ts]
            t = ts[min(range(len(ts)), key=lambda i: vals[i])]
        u, _ = sol.eval(t, digits + 5)
        return +(-t / u ** 2), +t


_YB_NUM = [98, -153, 33530, 203, -360, -224, -93, -17, 18, 39, 13, 11, 1, 1,
           1, 1]
_YB_DEN = [267, 518, 688889, 10806, 36911, 30615, 35396, 20578, 61523,
           53333, 24088, 47200, 15201, 81755, 717099, 13206825]


def y_b(t):
    acc = mp.mpf(0)
    for k in range(15, -1, -1):
        acc = acc * t + mp.mpf(_YB_NUM[k]) / _YB_DEN[k]
    return acc


def y_b_pp(t):
    acc = mp.mpf(0)
    for k in range(15, 1, -1):
        acc = acc * t + k * (k - 1) * mp.mpf(_YB_NUM[k]) / _YB_DEN[k]
    return acc


def appendix_a_check(sol, digits=40, npts=1200):
    """The bound chain behind k0 < 2662/1203 < 10/3."""
    rep = {"pass": True, "violations": []}
    with mp.workdps(digits + 10):
        a, b = mp.mpf(-11) / 8, mp.mpf(0)
        grid = [a + (b - a) * i / (npts - 1) for i in range(npts)]
        r4max, r4arg = mp.mpf(0), a
        sq_lo, sq_hi = mp.inf, -mp.inf
        y6_lo, y6_hi = mp.inf, -mp.inf
        for t in grid:
            yb = y_b(t)
            r4 = abs(y_b_pp(t) - t * yb - 2 * yb ** 3)
            if r4 > r4max:
                r4max, r4arg = r4, t
            s = 6 * yb * yb + t
            sq_lo, sq_hi = min(sq_lo, s), max(sq_hi, s)
            y6 = 6 * yb
            y6_lo, y6_hi = min(y6_lo, y6), max(y6_hi, y6)
        rep["max_R4"] = r4max
        rep["max_R4_at"] = r4arg
        if not r4max < mp.mpf(2) / 1000:
            rep["pass"] = False
            rep["violations"].append(("R4", r4arg))
        if not (mp.mpf(4) / 5 < sq_lo and sq_hi < mp.mpf(13) / 5):
            rep["pass"] = False
            rep["violations"].append(("6yb^2+t", (sq_lo, sq_hi)))
        if not (mp.mpf(11) / 5 < y6_lo and y6_hi < mp.mpf(49) / 10):
            rep["pass"] = False
            rep["violations"].append(("6yb", (y6_lo, y6_hi)))
        rep["range_6yb2_t"] = (sq_lo, sq_hi)
        rep["range_6yb"] = (y6_lo, y6_hi)
        # min of u / sqrt(-t/2) over [-50, -1e-3]
        target = mp.sqrt(mp.mpf(1203) / 1331)
        lo_t, lo_val = None, mp.inf

        def ratio(t):
            u, _ = sol.eval(t, digits)
            return u / mp.sqrt(-t / 2)

        scan = [mp.mpf(-50) + i * mp.mpf("0.25") for i in range(197)]
        scan += [mp.mpf("-2.0") + i * mp.mpf("0.02") for i in range(100)]
        scan += [mp.mpf("-0.05"), mp.mpf("-0.01"), mp.mpf("-0.001")]
        for t in scan:
            r = ratio(t)
            if r < lo_val:
                lo_val, lo_t = r, t
        # golden refinement around the scan minimum
        gr = (mp.sqrt(5) - 1) / 2
        a1, b1 = lo_t - mp.mpf("0.25"), lo_t + mp.mpf("0.25")
        if b1 > mp.mpf("-0.001"):
            b1 = mp.mpf("-0.001")
        x1 = b1 - gr * (b1 - a1)
        x2 = a1 + gr * (b1 - a1)
        f1, f2 = ratio(x1), ratio(x2)
        for _ in range(60):
            if f1 < f2:
                b1, x2, f2 = x2, x1, f1
                x1 = b1 - gr * (b1 - a1)
                f1 = ratio(x1)
            else:
                a1, x1, f1 = x1, x2, f2
                x2 = a1 + gr * (b1 - a1)
                f2 = ratio(x2)
        lo_val = min(lo_val, f1, f2)
        rep["min_u_ratio"] = lo_val
        rep["min_u_ratio_target"] = target
        if not lo_val > target:
            rep["pass"] = False
            rep["violations"].append(("u_ratio", lo_t))
        k0, _ = k0_find(sol, digits=min(digits, sol.cfg.digits))
        rep["k0"] = k0
        rep["k0_chain"] = bool(2 < k0 < mp.mpf(2662) / 1203 < mp.mpf(10) / 3)
        if not rep["k0_chain"]:
            rep["pass"] = False
            rep["violations"].append(("k0_chain", k0))
    return rep


# -- complex rays ----------------------------------------------------------

class RayPath:
    """Straight ray from the origin at angle theta, split at the series
    boundary r = 44 / cos(3 theta/2 - 3 pi/2)^{2/3}."""

    def __init__(self, theta, r_end):
        self.theta = mp.mpf(theta)
        self.r_end = mp.mpf(r_end)
        c = mp.cos(3 * self.theta / 2 - 3 * mp.pi / 2)
        self.r_series = mp.inf if c <= 0 else 44 / c ** (mp.mpf(2) / 3)
        self.direction = mp.expjpi(self.theta / mp.pi)

    def regime(self, r):
        return "integrate" if r <= self.r_series else "series"


def hm_eval_ray(sol, path, t, digits=None, step=None):
    """(u, u') at complex t on the given ray.  Integrates Painleve II from
    the real-line origin data; series beyond the green-region boundary."""
    digits = digits or sol.cfg.digits
    t = mp.mpc(t)
    r = abs(t)
    if r == 0 or mp.im(t) == 0:
        return sol.eval(mp.re(t), digits)
    wp = digits + 40    # error growth along the ray eats precision
    with mp.workdps(wp + 5):
        if path.regime(r) == "series":
            u, _ = sol.series_u.eval(t)
            v, _ = sol.series_v.eval(t)
            return +u, +v
        h = mp.mpf(step or "0.05")
        nsteps = int(mp.ceil(r / h))
        hc = (t / nsteps)
        u0, v0 = sol.eval(0, wp)
        scheme = IRKScheme.get(sol.cfg.stages, Precision(wp))
        tol = mp.mpf(10) ** (-(wp - 8))
        _, y = integrate_path(pii_field, [mp.mpc(u0), mp.mpc(v0)],
                              mp.mpc(0), [hc] * nsteps, scheme, tol)
        return +y[0], +y[1]
