"""Airy functions Ai, Bi and derivatives at arbitrary precision, plus the
exponential-bound inequalities used as integration preconditions.

Backed by mpmath's airyai/airybi kernels behind this module's contract
(precision handling, argument cap, real-in real-out).  The constants that
the tail formulas mix (gamma_E, zeta'(-1), Gamma(1/3)) live here too;
zeta'(-1) goes through the Glaisher-Kinkelin route 1/12 - ln A.
"""

import mpmath as mp

AI, BI, AIP, BIP = "Ai", "Bi", "AiPrime", "BiPrime"
_KINDS = {AI: (mp.airyai, 0), BI: (mp.airybi, 0),
          AIP: (mp.airyai, 1), BIP: (mp.airybi, 1)}

ARG_CAP = 1.0e4


class AiryRangeError(ValueError):
    def __init__(self, message, achievable_digits=None):
        super().__init__(message)
        self.achievable_digits = achievable_digits


def airy(kind, z, prec):
    """Airy value at z, correct to >= prec.digits - 5 significant digits."""
    if kind not in _KINDS:
        raise ValueError("unknown Airy kind %r" % (kind,))
    fn, d = _KINDS[kind]
    z = mp.mpmathify(z)
    if abs(z) > ARG_CAP:
        # |ln Airy| ~ (2/3)|z|^{3/2}; past the cap the exponent alone
        # swamps any realistic precision request
        approx = int(prec.digits - 0.29 * float(abs(z)) ** 1.5)
        raise AiryRangeError("|z| exceeds cap %g" % ARG_CAP,
                             achievable_digits=approx)
    with mp.workdps(prec.dps + 10):
        val = fn(z, d) if d else fn(z)
        if mp.im(z) == 0:
            val = mp.re(val)
        return +val


def ai(z, prec):
    return airy(AI, z, prec)


def bi(z, prec):
    return airy(BI, z, prec)


def aip(z, prec):
    return airy(AIP, z, prec)


def bip(z, prec):
    return airy(BIP, z, prec)


def wronskian(t, prec):
    """Ai(t) Bi'(t) - Ai'(t) Bi(t); identically 1/pi."""
    return airy(AI, t, prec) * airy(BIP, t, prec) \
        - airy(AIP, t, prec) * airy(BI, t, prec)


def airy_bounds_check(t, prec, u=None, up=None):
    """The six inequalities |Bi|, |Bi'|/sqrt(t) < e^{(2/3)t^{3/2}} and
    |Ai|, |Ai'|/sqrt(t), |u|, |u'|/sqrt(t) < e^{-(2/3)t^{3/2}} for t >= 1.
    u, u' may be supplied; otherwise only the four Airy bounds are tested."""
    t = mp.mpf(t)
    if t < 1:
        raise ValueError("bounds are claimed for t >= 1")
    with mp.workdps(prec.dps + 10):
        g = mp.e ** (mp.mpf(2) / 3 * t ** mp.mpf("1.5"))
        rt = mp.sqrt(t)
        ok = abs(airy(BI, t, prec)) < g
        ok = ok and abs(airy(BIP, t, prec)) < g * rt
        ok = ok and abs(airy(AI, t, prec)) < 1 / g
        ok = ok and abs(airy(AIP, t, prec)) < rt / g
        if u is not None:
            ok = ok and abs(u) < 1 / g
        if up is not None:
            ok = ok and abs(up) < rt / g
        return bool(ok)


def constants(prec):
    """gamma_E, zeta'(-1), Gamma(1/3), Gamma(2/3), pi at working precision."""
    with mp.workdps(prec.dps + 10):
        return {
            "euler": +mp.euler,
            "zeta_prime_minus1": +(mp.mpf(1) / 12 - mp.log(mp.glaisher)),
            "gamma_third": +mp.gamma(mp.mpf(1) / 3),
            "gamma_two_thirds": +mp.gamma(mp.mpf(2) / 3),
            "pi": +mp.pi,
        }
