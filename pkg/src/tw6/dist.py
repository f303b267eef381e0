"""The distribution payload: omega, F6, kappa, and the tail constants.

F6 comes out of the sweep accumulators: the master integration already
carries ln kappa, int omega and the regularized prefactor integral
downward from t_P, so an evaluation at t only needs the interpolated slow
state and the Hastings-McLeod values.  The argument scaling (the formula
produces F6(t/3^(2/3))) is centralized in scaled_arg.
"""

from collections import namedtuple
from fractions import Fraction

import mpmath as mp

from . import airy
from .config import PoleError, TW6Error
from .phisystem import MID, NEG, POS, regime_of
from .precision import Precision

TailConstants = namedtuple("TailConstants", "beta c_beta")


def scaled_arg(t):
    """3^(2/3) t at the ambient precision; the only place the factor
    appears."""
    return mp.cbrt(9) * mp.mpf(t)


def _bexp_series(t, dps):
    """t/(e^t - 1) - 1 + t/2 - t^2/12 by the Bernoulli series; accurate
    where the direct form cancels (|t| < 2 pi radius, used for t <= 5)."""
    acc = mp.mpf(0)
    tp = t ** 4
    n = 4
    tiny = mp.mpf(10) ** (-dps - 5)
    while True:
        term = mp.bernoulli(n) / mp.factorial(n) * tp
        acc += term
        if abs(term) < tiny * (1 + abs(acc)) and n > 8:
            return acc
        n += 2
        tp *= t * t
        if n > 40 * dps:
            raise TW6Error("Bernoulli tail did not converge")


def c_beta(beta, digits=40):
    """Tail constant c_beta of the left-tail expansion, closed terms plus
    the Bose-kernel integral."""
    prec = Precision(digits)
    with mp.workdps(prec.dps + 30):
        b = mp.mpf(beta)
        if b <= 0:
            raise TW6Error("beta must be positive")
        cst = airy.constants(prec)
        closed = (cst["euler"] / (6 * b)
                  + (mp.mpf(17) / 8 - mp.mpf(25) / 24 * (b / 2 + 2 / b))
                  * mp.log(2)
                  - mp.log(b / 2) / 2 - mp.log(2 * mp.pi) / 4
                  + b / 2 * (mp.mpf(1) / 12 - cst["zeta_prime_minus1"]))

        dps = mp.mp.dps

        def integrand(t):
            if t <= 0:
                return mp.mpf(0)
            num = _bexp_series(t, dps) if t <= 5 \
                else t / mp.expm1(t) - 1 + t / 2 - t * t / 12
            return num / (t * t * mp.expm1(b * t / 2))

        val = mp.quad(integrand, [0, 1, 3, 6, 12, 24, 48, 96, mp.inf])
        return TailConstants(+b, +(closed + val))


def ln_c_kappa_closed(digits=40):
    """Closed form of ln C_kappa in terms of Gamma(1/3) and zeta'(-1)."""
    prec = Precision(digits)
    with mp.workdps(prec.dps + 10):
        cst = airy.constants(prec)
        return +(-mp.mpf(7) / 72 * mp.log(2) - mp.mpf(2) / 9 * mp.log(3)
                 - mp.log(2 * mp.pi) / 6 + mp.log(cst["gamma_third"]) / 3
                 + cst["zeta_prime_minus1"] / 3)


def _ser_mul(x, y, lo, hi):
    out = {}
    for i, xi in x.items():
        for j, yj in y.items():
            n = i + j
            if lo <= n <= hi:
                out[n] = out.get(n, mp.mpf(0)) + xi * yj
    return out


def _ser_add(*xs):
    out = {}
    for x in xs:
        for n, v in x.items():
            out[n] = out.get(n, mp.mpf(0)) + v
    return out


def _ser_scale(x, c):
    return {n: c * v for n, v in x.items()}


def _ser_recip(x, hi):
    """1/x for a series with x[0] != 0 and no negative powers."""
    inv = {0: 1 / x[0]}
    for n in range(1, hi + 1):
        acc = mp.mpf(0)
        for i, xi in x.items():
            if 0 < i <= n and (n - i) in inv:
                acc += xi * inv[n - i]
        inv[n] = -acc / x[0]
    return {n: v for n, v in inv.items() if v}


_lnk_cache = {}


def ln_kappa_tail_series(depth_w=60, digits=60):
    """Coefficients {power: coeff} of the deep-left expansion
    ln kappa(t) = ln C_kappa + sum coeff * (-t)^(-power/2) + k2 * ln(-t),
    returned as (power dict, log coefficient).  Assembled from the
    asymptotic series of u, q2 and alpha through kappa'/kappa and exact
    term-by-term integration."""
    key = (depth_w, digits)
    if key in _lnk_cache:
        return _lnk_cache[key]
    from .connection import qa_series
    from .painleve2 import u_series_coeffs
    dps = digits + 25
    with mp.workdps(dps):
        hi = depth_w
        q, a = qa_series("+", depth_w, dps)
        q = {n: v for n, v in q.items() if v}
        a = {n: v for n, v in a.items() if v}
        cu = u_series_coeffs(depth_w // 6 + 2, dps)
        # u = w^{-1}/sqrt2 * U, U = sum cu[m] w^{6m}; w = (-t)^{-1/2}
        U = {6 * m: cu[m] for m in range(len(cu))}
        U2 = _ser_mul(U, U, 0, hi + 6)
        # u^2 = (1/2) w^{-2} U2;  t + u^2 = w^{-2} (U2/2 - 1)
        tu = _ser_add(_ser_scale(U2, mp.mpf(1) / 2), {0: mp.mpf(-1)})
        # -(1/3)(t+u^2)u^2 = -(1/6) w^{-4} tu*U2
        term_b = _ser_scale(_ser_mul(tu, U2, 0, hi + 4), mp.mpf(-1) / 6)
        term_b = {n - 4: v for n, v in term_b.items()}
        # u'/u = (w^2/2) N/U with N = sum (6m-1) cu[m] w^{6m}
        N = {6 * m: (6 * m - 1) * cu[m] for m in range(len(cu))}
        vu = _ser_mul(_ser_mul(N, _ser_recip(U, hi + 4), 0, hi + 4),
                      {2: mp.mpf(1) / 2}, 0, hi + 4)
        # (u'/(6u))(2 q2 - 1); the series q is tilde q2 = 1 + q2
        term_c = _ser_mul(_ser_scale(q, mp.mpf(1) / 3),
                          vu, -4, hi)
        term_c = _ser_add(term_c, _ser_scale(vu, mp.mpf(-1) / 2))
        # (1/3) u'^2 = (1/3)(u'/u)^2 u^2, with u^2 = (1/2) w^{-2} U2
        u2ser = {n - 2: v / 2 for n, v in U2.items()}
        term_d = _ser_scale(
            _ser_mul(_ser_mul(vu, vu, 0, hi + 4), u2ser, -4, hi),
            mp.mpf(1) / 3)
        term_a = _ser_scale(a, mp.mpf(-2) / 3)
        kk = _ser_add(term_a, term_b, term_c, term_d)   # kappa'/kappa
        kk = {n: v for n, v in kk.items() if n <= hi}   # trust region
        # integrate in t: w^n -> w^{n-2}/(n/2-1); n = 2 -> -ln(-t)
        out = {}
        logc = mp.mpf(0)
        for n, v in kk.items():
            if not v:
                continue
            if n == 2:
                logc = -v
            else:
                out[n - 2] = v / (mp.mpf(n) / 2 - 1)
        out = {n: +v for n, v in out.items() if v}
        _lnk_cache[key] = (out, +logc)
        return _lnk_cache[key]


def f6_tail(t, cb, digits=40):
    """Left-tail approximation exp(-|t|^3/4 + (2 sqrt2/3)|t|^(3/2)
    + ln|t|/24 + c_beta) for beta = 6; valid for t <= -4."""
    with mp.workdps(Precision(digits).dps + 10):
        at = abs(mp.mpf(t))
        ex = -at ** 3 / 4 + 2 * mp.sqrt(2) / 3 * at ** mp.mpf("1.5") \
            + mp.log(at) / 24 + cb
        return +mp.e ** ex


class TW6Evaluator:
    """F6 and kappa from a finished sweep.  The basis column with
    parameters (0, 0, 1) is the distinguished one; everything here reads
    that column."""

    def __init__(self, cfg, sol, basis):
        self.cfg = cfg
        self.sol = sol
        self.basis = basis
        self.wd = basis.work_digits

    @classmethod
    def from_config(cls, cfg, use_cache=True, force_rebuild=False):
        from .painleve2 import hm_build
        from .phisystem import phi_integrate
        sol = hm_build(cfg, use_cache=use_cache, force_rebuild=force_rebuild)
        basis = phi_integrate(cfg, sol, use_cache=use_cache,
                              force_rebuild=force_rebuild)
        return cls(cfg, sol, basis)

    def omega(self, t):
        with mp.workdps(Precision(self.cfg.digits).dps + 5):
            u, v = self.sol.eval(mp.mpf(t), self.cfg.digits + 5)
            return +(u * u * (u * u + mp.mpf(t)) - v * v)

    def state(self, s):
        """(q2, alpha, ln_kappa, I_omega, I_r) at real s in [t_n, t_p],
        off-grid by regime-aware interpolation of the slow sweep."""
        with mp.workdps(self.wd + 5):
            s = mp.mpf(s)
            tag, y = self.basis.interp_slow(s)
            if tag == POS:
                t32 = s ** mp.mpf("1.5")
                sc = mp.e ** (-mp.mpf(2) / 3 * t32)
                f1 = y[6] * sc
                f2 = y[7] * sc
                f0 = 1 + y[8] * mp.e ** (-mp.mpf(4) / 3 * t32)
            else:
                # shared per-point scale cancels in the ratios
                f1, f2, f0 = y[6], y[7], y[8]
            if abs(f0) < mp.mpf(10) ** (-self.cfg.digits // 2) \
                    * (1 + abs(y[8])):
                raise PoleError("phi0 vanishes near t=%s" % mp.nstr(s, 8),
                                t0=s)
            u, _ = self.sol.eval(s, self.wd)
            q2 = f1 / f0 * u - 1
            al = f2 / f0 * u
            return +q2, +al, +y[9], +y[10], +y[11]

    def f6(self, t):
        """F6(t) by the prefactor-integral route.  The printed exponent
        carries (2/3)(u'/u)(1+q2)/q2, which is singular at the zero of q2;
        the q2 equation splits off its (ln q2)' part, which cancels the
        1/(2 q2) prefactor against q2(+inf) = -1 and leaves the regular
        accumulator I_r.  The tail piece above t_P is Airy-small and
        dropped."""
        with mp.workdps(self.wd + 5):
            s = scaled_arg(t)
            if s < mp.mpf(self.cfg.t_n.numerator) / self.cfg.t_n.denominator:
                raise TW6Error("t below the sweep range")
            q2, _, _, i_om, i_r = self.state(s)
            return +((1 - q2) / 2 * mp.e ** (-i_om / 3 + i_r))

    def f6_alt(self, t):
        """Second route: (1/2) kappa sqrt(u) (1 - q2)."""
        with mp.workdps(self.wd + 5):
            s = scaled_arg(t)
            q2, _, lnk, _, _ = self.state(s)
            u, _ = self.sol.eval(s, self.wd)
            return +(mp.e ** lnk * mp.sqrt(u) * (1 - q2) / 2)

    def kappa_log(self, s):
        with mp.workdps(self.wd + 5):
            return +self.state(mp.mpf(s))[2]

    def c_kappa_estimate(self, t_n=None, depth_w=60):
        """(ln C_kappa, series error estimate) from ln kappa at a deep
        grid point minus the deep-left expansion, summed with optimal
        truncation."""
        tf = Fraction(t_n if t_n is not None else self.cfg.t_n)
        if tf > -40:
            raise TW6Error("c_kappa estimate needs t_n <= -40")
        coeffs, logc = ln_kappa_tail_series(depth_w, self.cfg.digits)
        with mp.workdps(self.wd + 5):
            lnk = self.basis.accumulators(tf)[0]
            at = -mp.mpf(tf.numerator) / tf.denominator
            w = at ** mp.mpf("-0.5")
            expn = logc * mp.log(at)
            # the growing part (negative powers) is mandatory; the inverse
            # ladder is asymptotic and truncated at its smallest term
            for n in sorted(k for k in coeffs if k < 0):
                expn += coeffs[n] * w ** n
            last = mp.inf
            err = mp.mpf(0)
            for n in sorted(k for k in coeffs if k > 0):
                term = coeffs[n] * w ** n
                if abs(term) >= last:
                    err = abs(term)
                    break
                expn += term
                last = abs(term)
                err = abs(term)
            return +(lnk - expn), +err

    def density(self, t, h=None):
        """Central-difference density at t."""
        with mp.workdps(self.wd + 5):
            h = mp.mpf(h) if h is not None else mp.mpf(10) ** (
                -self.cfg.digits // 3)
            return +((self.f6(mp.mpf(t) + h) - self.f6(mp.mpf(t) - h))
                     / (2 * h))

    def table_rows(self, ts, digits=None):
        """Rows (t, F6, dF6, tail_ratio); tail_ratio blank for t > -4."""
        digits = digits or self.cfg.digits
        cb = c_beta(6, digits).c_beta
        rows = []
        with mp.workdps(self.wd + 5):
            for t in ts:
                t = mp.mpf(t)
                f = self.f6(t)
                d = self.density(t)
                if t <= -4:
                    ratio = f / f6_tail(t, cb, digits)
                else:
                    ratio = None
                rows.append((+t, +f, +d, ratio if ratio is None else +ratio))
        return rows
