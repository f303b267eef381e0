"""Command line front end: constants, tables, region sweeps and checks."""

import argparse
import json
import os
import sys
from fractions import Fraction

import mpmath as mp

from . import airy, bvcheck, connection, dist
from .config import (CacheError, ConfigError, RunConfig, TW6Error,
                     default_cache_dir)
from .painleve2 import appendix_a_check, hm_build, k0_find
from .phisystem import phi_integrate, picard_boundary
from .precision import Precision

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_CACHE = 3


def build_parser():
    p = argparse.ArgumentParser(
        prog="tw6",
        description="High-precision Tracy-Widom beta=6 toolkit")
    p.add_argument("--digits", type=int, default=60)
    p.add_argument("--stages", type=int, default=24)
    p.add_argument("--tn", type=str, default=None,
                   help="lower sweep bound (default -60)")
    p.add_argument("--tp", type=str, default=None,
                   help="upper sweep bound (default 36)")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"),
                   default="csv")
    p.add_argument("--cache-dir", type=str, default=None)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("constants", help="connection constants and tail "
                   "constants as JSON")
    pt = sub.add_parser("table", help="F6 table as CSV")
    pt.add_argument("--tmin", type=float, default=-10.0)
    pt.add_argument("--tmax", type=float, default=6.0)
    pt.add_argument("--n", type=int, default=81)
    pr = sub.add_parser("region", help="smooth-region boundary samples")
    pr.add_argument("--c1min", type=float, default=-20.0)
    pr.add_argument("--c1max", type=float, default=4.0)
    pr.add_argument("--n", type=int, default=25)
    pc = sub.add_parser("check", help="verification suite")
    pc.add_argument("suite", choices=("fast", "full"))
    sub.add_parser("bv", help="boundary-picture arc report as JSON")
    return p


def build_config(args):
    kw = {"digits": args.digits, "stages": args.stages, "fmt": args.fmt}
    if args.tn is not None:
        kw["t_n"] = Fraction(args.tn)
    if args.tp is not None:
        kw["t_p"] = Fraction(args.tp)
    kw["cache_dir"] = args.cache_dir or default_cache_dir()
    return RunConfig(**kw)


class _Lock:
    """Advisory per-cache lock; a stale lock only warns."""

    def __init__(self, cache_dir):
        self.path = os.path.join(cache_dir, ".lock")

    def __enter__(self):
        os.makedirs(os.path.dirname(self.path), exist_ok=True)
        if os.path.exists(self.path):
            sys.stderr.write("warning: cache lock held (%s); continuing\n"
                             % self.path)
            self.owned = False
        else:
            with open(self.path, "w") as f:
                f.write(str(os.getpid()))
            self.owned = True
        return self

    def __exit__(self, *exc):
        if self.owned and os.path.exists(self.path):
            os.remove(self.path)
        return False


def _nstr(x, digits):
    return mp.nstr(x, digits, strip_zeros=False)


def _digits_agree(a, b):
    d = abs(a - b)
    if d == 0:
        return 999
    return int(-mp.log10(d / max(abs(a), abs(b), mp.mpf(1))))


def cmd_constants(cfg, out):
    ev = dist.TW6Evaluator.from_config(cfg)
    res = {}
    with mp.workdps(cfg.work_digits + 10):
        k0, tstar = k0_find(ev.sol, cfg.digits)
        res["k0"] = {"value": _nstr(k0, cfg.digits // 2),
                     "t_star": _nstr(tstar, cfg.digits // 2)}
        lnck, err = ev.c_kappa_estimate()
        closed = dist.ln_c_kappa_closed(cfg.digits)
        res["ln_C_kappa"] = {
            "value": _nstr(lnck, cfg.digits // 2),
            "closed_form": _nstr(closed, cfg.digits // 2),
            "achieved_digits": _digits_agree(lnck, closed),
            "series_error_estimate": _nstr(err, 3)}
        cb = dist.c_beta(6, cfg.digits)
        res["c_beta_6"] = {"value": _nstr(cb.c_beta, cfg.digits // 2)}
        conn = connection.connection_data(cfg, ev.sol, ev.basis,
                                          with_rays=False)
        res["kP"] = {"values": [_nstr(k, cfg.digits // 2)
                                for k in conn.kP],
                     "error_estimate": _nstr(conn.kP_err, 3)}
        if cfg.digits >= 80:
            cfg_hi = cfg.with_(digits=96, t_m=Fraction(-1, 20))
            sol_hi = hm_build(cfg_hi)
            basis_hi = phi_integrate(cfg_hi, sol_hi)
            kO, kN, eO, eN = connection.kON_compute(cfg, ev.sol, basis_hi,
                                                    conn.kP)
            res["kO"] = {"values": [str(k) for k in kO],
                         "error_estimate": _nstr(eO, 3)}
            res["kN"] = {"values": [str(k) for k in kN],
                         "error_estimate": _nstr(eN, 3)}
        else:
            msg = "refused: complex-ray constants need digits >= 80"
            res["kO"] = {"error": msg}
            res["kN"] = {"error": msg}
    json.dump(res, out, indent=2)
    out.write("\n")
    return EXIT_OK


def cmd_table(cfg, args, out):
    if args.n < 2:
        raise ConfigError("table needs n >= 2")
    ev = dist.TW6Evaluator.from_config(cfg)
    with mp.workdps(cfg.work_digits + 5):
        ts = [mp.mpf(args.tmin) + (mp.mpf(args.tmax) - mp.mpf(args.tmin))
              * i / (args.n - 1) for i in range(args.n)]
        rows = ev.table_rows(ts)
    d = cfg.digits
    if cfg.fmt == "json":
        payload = [{"t": _nstr(r[0], 17), "F6": _nstr(r[1], d),
                    "dF6": _nstr(r[2], d // 2),
                    "tail_ratio": None if r[3] is None
                    else _nstr(r[3], d // 3)} for r in rows]
        json.dump(payload, out, indent=2)
        out.write("\n")
    else:
        out.write("t,F6,dF6,tail_ratio\n")
        for r in rows:
            out.write("%s,%s,%s,%s\n" % (
                _nstr(r[0], 17), _nstr(r[1], d), _nstr(r[2], d // 2),
                "" if r[3] is None else _nstr(r[3], d // 3)))
    return EXIT_OK


def cmd_region(cfg, args, out):
    if cfg.digits < 30:
        raise ConfigError("connection commands need digits >= 30")
    ev = dist.TW6Evaluator.from_config(cfg)
    conn = connection.connection_data(cfg, ev.sol, ev.basis,
                                      with_rays=False)
    n = args.n
    c1s = [mp.mpf(args.c1min) + (mp.mpf(args.c1max) - mp.mpf(args.c1min))
           * i / (n - 1) for i in range(n)]
    connection.region_csv(ev.basis, conn, c1s, out)
    return EXIT_OK


def _run_checks(cfg, suite, out):
    """Returns (n_pass, n_fail); prints one line per criterion."""
    results = []

    def crit(name, ok, detail=""):
        results.append((name, bool(ok)))
        out.write("%-34s %s%s\n" % (name, "PASS" if ok else "FAIL",
                                    (" " + detail) if detail else ""))
        out.flush()

    ev = dist.TW6Evaluator.from_config(cfg)
    with mp.workdps(cfg.work_digits + 10):
        k0, tstar = k0_find(ev.sol, cfg.digits)
        ok = (_digits_agree(k0, mp.mpf("2.1228589561253469")) >= 12
              and _digits_agree(tstar,
                                mp.mpf("-1.188111911480737877")) >= 12)
        crit("k0-location", ok)

        rep = appendix_a_check(ev.sol)
        crit("appendix-a-chain", rep["pass"])

        lnck, _ = ev.c_kappa_estimate()
        closed = dist.ln_c_kappa_closed(cfg.digits)
        golden = mp.mpf("-0.344505050028693481550199406570251842")
        da = min(_digits_agree(lnck, golden), _digits_agree(lnck, closed))
        crit("ln-C-kappa", da >= 18, "agree %d digits" % da)

        cb = dist.c_beta(6, max(40, cfg.digits)).c_beta
        with mp.workdps(cfg.work_digits + 20):
            cst = airy.constants(Precision(cfg.digits + 10))
            cb_closed = (-mp.mpf(97) / 72 * mp.log(2)
                         - mp.mpf(7) / 36 * mp.log(3)
                         - mp.log(2 * mp.pi) / 6
                         + mp.log(cst["gamma_third"]) / 3
                         + cst["zeta_prime_minus1"] / 3)
        crit("c-beta-6", _digits_agree(cb, cb_closed) >= 25)

        conn = connection.connection_data(cfg, ev.sol, ev.basis,
                                          with_rays=False)
        gold_kP = (mp.mpf("-0.0969123435570255523226380385083332"),
                   mp.mpf("0.167857102921338590132168687360301197"),
                   mp.mpf("0.62357981669501424223251084362366955"))
        dk = min(_digits_agree(a, b) for a, b in zip(conn.kP, gold_kP))
        crit("kP-constants", dk >= 20, "agree %d digits" % dk)

        d0 = ev.basis.det_at(cfg.t_p)
        worst = mp.mpf(0)
        for tf in ev.basis.det_safe_points(cfg.digits)[::7]:
            worst = max(worst, abs(ev.basis.det_at(tf) / d0 - 1))
        crit("det-drift", worst <= mp.mpf("1e-45"),
             "max %s" % mp.nstr(worst, 3))

        w = airy.wronskian(mp.mpf("1.7"), Precision(cfg.digits))
        crit("airy-wronskian",
             abs(w * mp.pi - 1) <= mp.mpf("1e-52"))

        its, prep = picard_boundary(1, 3, 6, 30, ev.sol)
        crit("picard-contraction", prep["pass"])

        ts20 = [mp.mpf(-8) + mp.mpf(14) * i / 19 for i in range(20)]
        worst2 = mp.mpf(0)
        prev = None
        mono = True
        inside = True
        for t in ts20:
            f = ev.f6(t)
            g = ev.f6_alt(t)
            worst2 = max(worst2, abs(f - g) / abs(f))
            if not (0 < f < 1):
                inside = False
            if prev is not None and f <= prev:
                mono = False
            prev = f
        crit("two-route-F6", worst2 <= mp.mpf("1e-20"),
             "max %s" % mp.nstr(worst2, 3))
        crit("F6-monotone-bounded", mono and inside)

        cb6 = dist.c_beta(6, cfg.digits).c_beta
        prev_gap = None
        ok9 = True
        for tv in (-4, -5, -6, -7, -8):
            t = mp.mpf(tv)
            gap = abs(mp.log(ev.f6(t))
                      - mp.log(dist.f6_tail(t, cb6, cfg.digits)))
            if gap > 10 * abs(t) ** mp.mpf("-1.5"):
                ok9 = False
            if prev_gap is not None and gap > prev_gap:
                ok9 = False
            prev_gap = gap
        crit("tail-reproduction", ok9)

        if suite == "full":
            c1_0 = connection.region_boundary(ev.basis, conn, 0)
            c1_1 = connection.region_boundary(ev.basis, conn, 1)
            ok6 = (_digits_agree(c1_0[1],
                                 mp.mpf("-3.7141079331281264")) >= 10
                   and _digits_agree(c1_1[1],
                                     mp.mpf("-3.1374679841879924")) >= 10)
            crit("region-boundary", ok6)

            rep10 = bvcheck.arc_limits_report(ev, digits=40)
            crit("bv-arcs", all(r["pass"] for r in rep10))
            p00 = bvcheck.c1c2_necessity_probe(ev.basis, ev.sol, 0, 0, 12)
            p01 = bvcheck.c1c2_necessity_probe(ev.basis, ev.sol, 0, 1, 12)
            p10 = bvcheck.c1c2_necessity_probe(ev.basis, ev.sol, 1, 0, 12)
            crit("c1c2-necessity",
                 p00 < 1 and p01 > 100 * p00 and p10 > p01)

            if cfg.digits >= 80:
                cfg_hi = cfg.with_(digits=96, t_m=Fraction(-1, 20))
                sol_hi = hm_build(cfg_hi)
                basis_hi = phi_integrate(cfg_hi, sol_hi)
                kO, kN, _, _ = connection.kON_compute(
                    cfg, ev.sol, basis_hi, conn.kP)
                gO1 = mp.mpc("0.474787653555570800096",
                             "0.091372926529406526556")
                gN0 = mp.mpf("-0.360023975030083963185")
                okO = abs(kO[0] - gO1) <= mp.mpf("1e-10") * abs(gO1)
                okN = abs(kN[2] - gN0) <= mp.mpf("1e-6") * abs(gN0)
                idN2 = abs(kN[1] - (mp.sqrt(3) / 6 + mp.mpc(0, 1) / 2)
                           * conn.kP[1]) <= mp.mpf("1e-8")
                idN1 = abs(kN[0] - (7 * mp.sqrt(3) / 6 - mp.mpc(0, 1) / 2)
                           * conn.kP[0]) <= mp.mpf("1e-8")
                crit("complex-ray-constants",
                     okO and okN and idN1 and idN2)
            else:
                out.write("%-34s SKIP refused: needs digits >= 80\n"
                          % "complex-ray-constants")

    n_fail = sum(1 for _, ok in results if not ok)
    return len(results) - n_fail, n_fail


def cmd_check(cfg, suite, out):
    np, nf = _run_checks(cfg, suite, out)
    out.write("%d passed, %d failed\n" % (np, nf))
    return EXIT_OK if nf == 0 else EXIT_FAIL


def cmd_bv(cfg, out):
    ev = dist.TW6Evaluator.from_config(cfg)
    rep = bvcheck.arc_limits_report(ev, digits=min(cfg.digits, 40))
    out.write(bvcheck.report_json(rep))
    out.write("\n")
    return EXIT_OK if all(r["pass"] for r in rep
                          if r["pass"] is not None) else EXIT_FAIL


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = build_config(args)
    except SystemExit as e:
        return EXIT_CONFIG if e.code not in (0, None) else EXIT_OK
    except (ConfigError, ValueError) as e:
        sys.stderr.write("configuration error: %s\n" % e)
        return EXIT_CONFIG
    out = sys.stdout
    try:
        with _Lock(cfg.cache_dir):
            if args.command == "constants":
                return cmd_constants(cfg, out)
            if args.command == "table":
                return cmd_table(cfg, args, out)
            if args.command == "region":
                return cmd_region(cfg, args, out)
            if args.command == "check":
                return cmd_check(cfg, args.suite, out)
            if args.command == "bv":
                return cmd_bv(cfg, out)
            raise ConfigError("unknown command %s" % args.command)
    except CacheError as e:
        sys.stderr.write("cache-integrity failure: %s\n" % e)
        return EXIT_CACHE
    except ConfigError as e:
        sys.stderr.write("configuration error: %s\n" % e)
        return EXIT_CONFIG
    except TW6Error as e:
        sys.stderr.write("error: %s\n" % e)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
