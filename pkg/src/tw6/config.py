"""Run configuration, cache layout and shared error types.

Everything downstream (HM solution build, the linear-system sweep, the
connection constants) is keyed by a RunConfig: working precision, collocation
stage count, grid bounds and step sizes.  Cache files live under
TW6_CACHE_DIR (or ~/.cache/tw6) and carry a payload checksum; a checksum or
parse failure is a hard CacheError, while a key mismatch simply misses.
"""

import hashlib
import os
from dataclasses import dataclass, field
from fractions import Fraction


class TW6Error(Exception):
    pass


class ConfigError(TW6Error):
    pass


class CacheError(TW6Error):
    pass


class PoleError(TW6Error):
    """phi0 combination vanishes; carries the approximate zero location."""

    def __init__(self, message, t0=None):
        super().__init__(message)
        self.t0 = t0


class InsufficientDepthError(TW6Error):
    """Asymptotic series cannot reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class StageDivergenceError(TW6Error):
    """Collocation stage iteration failed to converge."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


def default_cache_dir():
    env = os.environ.get("TW6_CACHE_DIR")
    if env:
        return env
    return os.path.join(os.path.expanduser("~"), ".cache", "tw6")


# step plan for the master sweep, as exact rationals so that grid points like
# t = 16, 12, 8, 0 are hit exactly and runs are reproducible bit-for-bit.
# list of (start, stop, step); traversed downward.
DEFAULT_STEP_PLAN = (
    (Fraction(36), Fraction(14), Fraction(1, 20)),
    (Fraction(14), Fraction(-2), Fraction(1, 40)),
    (Fraction(-2), Fraction(-60), Fraction(1, 20)),
)


@dataclass(frozen=True)
class RunConfig:
    digits: int = 60
    stages: int = 24
    t_p: Fraction = Fraction(36)
    t_n: Fraction = Fraction(-60)
    t_m: Fraction = Fraction(-44)
    t_h: Fraction = Fraction(36)
    step_plan: tuple = DEFAULT_STEP_PLAN
    series_depth: int = 124          # terms of the (-t)^{-3/2} ladder
    fmt: str = "csv"
    cache_dir: str = field(default_factory=default_cache_dir)

    def __post_init__(self):
        if self.digits < 15:
            raise ConfigError("digits must be >= 15")
        if self.stages < 1:
            raise ConfigError("stages must be >= 1")
        if not (self.t_n < self.t_m < 0 < self.t_h <= self.t_p):
            raise ConfigError("require t_n < t_m < 0 < t_h <= t_p")
        for a, b, h in self.step_plan:
            if h <= 0 or b >= a:
                raise ConfigError("step plan segments must run downward")
        if self.fmt not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        # the closed-form seed at t_h carries a relative error of roughly
        # exp(-(8/3) t_h^{3/2}); after downward amplification it must still
        # clear the requested accuracy, otherwise the build silently tracks
        # the wrong trajectory and blows up near a pole.
        import math
        seed_digits = (8.0 / 3.0) * float(self.t_h) ** 1.5 / math.log(10)
        if seed_digits < self.digits + self.stiff_amp_digits + 10:
            raise ConfigError(
                "t_h too small: seed accuracy %.0f digits, need %d"
                % (seed_digits, self.digits + self.stiff_amp_digits + 10))

    def with_(self, **kw):
        d = self.__dict__.copy()
        d.update(kw)
        return RunConfig(**d)

    @property
    def guard(self):
        return 10

    @property
    def work_digits(self):
        """Working precision for the linear sweep."""
        return self.digits + self.guard

    @property
    def stiff_amp_digits(self):
        """Decimal digits of perturbation growth over the integrated range:
        exp((1/3)(-2 t_m)^{3/2}).  Errors committed anywhere above t_m get
        amplified by up to this factor on the way down."""
        import math
        return int(math.ceil((-2 * float(self.t_m)) ** 1.5
                             / 3 / math.log(10)))

    @property
    def u_work_digits(self):
        """The HM build runs hot: roundoff must clear the downward
        amplification with room to spare."""
        return self.digits + self.stiff_amp_digits + 15

    @property
    def u_build_stages(self):
        """Collocation stage count for the HM build.  Per-step truncation
        behaves like base^(2s+1) with base ~ 10^-2.36 at the worst grid
        spots (measured), and must clear digits + amplification + margin."""
        import math
        return int(math.ceil((self.digits + self.stiff_amp_digits + 20)
                             / 4.7))

    def clipped_plan(self, top, bottom):
        """Restrict the step plan to [bottom, top]."""
        top = Fraction(top)
        bottom = Fraction(bottom)
        out = []
        for a, b, h in self.step_plan:
            lo, hi = max(b, bottom), min(a, top)
            if lo < hi:
                out.append((hi, lo, h))
        if not out:
            raise ConfigError("empty step plan for [%s, %s]" % (bottom, top))
        return tuple(out)

    def grid_key(self, kind):
        """Cache key: config fingerprint for files of the given kind."""
        parts = [
            "v1", kind, str(self.digits), str(self.stages),
            str(self.t_p), str(self.t_n), str(self.t_m), str(self.t_h),
            str(self.series_depth),
            ";".join("%s,%s,%s" % seg for seg in self.step_plan),
        ]
        return hashlib.sha256("|".join(parts).encode()).hexdigest()[:16]


def grid_steps(plan):
    """Enumerate the downward integration steps of a clipped plan as
    (t_start, h) pairs of exact Fractions (h > 0, direction downward)."""
    out = []
    for a, b, h in plan:
        count = (a - b) / h
        if count.denominator != 1:
            raise ConfigError("step %s does not divide [%s, %s]" % (h, b, a))
        t = a
        for _ in range(int(count)):
            out.append((t, h))
            t -= h
    return out


def write_cache(path, header_fields, payload_lines):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    payload = "\n".join(payload_lines) + "\n"
    digest = hashlib.sha256(payload.encode()).hexdigest()
    tmp = path + ".tmp"
    with open(tmp, "w") as f:
        f.write("# tw6-cache v1\n")
        for k, v in header_fields.items():
            f.write("# %s %s\n" % (k, v))
        f.write("# sha256 %s\n" % digest)
        f.write(payload)
    os.replace(tmp, path)


def read_cache(path):
    """Returns (header dict, payload lines).  Raises CacheError on any
    integrity problem; returns None if the file does not exist."""
    if not os.path.exists(path):
        return None
    with open(path) as f:
        first = f.readline()
        if first.strip() != "# tw6-cache v1":
            raise CacheError("bad cache magic in %s" % path)
        header = {}
        digest = None
        pos = f.tell()
        while True:
            line = f.readline()
            if not line.startswith("# "):
                break
            key, _, val = line[2:].strip().partition(" ")
            if key == "sha256":
                digest = val
                pos = f.tell()
                break
            header[key] = val
            pos = f.tell()
        f.seek(pos)
        payload = f.read()
    if digest is None:
        raise CacheError("missing checksum in %s" % path)
    if hashlib.sha256(payload.encode()).hexdigest() != digest:
        raise CacheError("checksum mismatch in %s" % path)
    lines = [ln for ln in payload.split("\n") if ln]
    return header, lines
