"""Batch front-end: build objects from a JSON config, run checks, emit tables.

Exit codes: 0 when every asserted identity holds, 1 on an identity failure,
2 when a verdict is undecidable at the configured precision.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

from .arith.context import PrecisionContext
from .arith.rings import CyclotomicRing, make_unramified
from .arith.series import compose
from .errors import DegreeOverflow, IdentityFailure, LTColemanError, NoSolution, PrecisionAmbiguous
from .lubin_tate import FrobeniusLift, eta, eta_bar_at_zero, group_law, is_eisenstein, mult_by, torsion_poly

OK, FAILED, AMBIGUOUS = 0, 1, 2


@dataclass
class RunConfig:
    p: int = 3
    N: int = 6
    M: int = 40
    slack: int = 2
    lift: object = "multiplicative"
    weight: int = 4
    n_max: int = 2
    m: int = 1  # unramified degree carrying Omega
    gamma: int | None = None
    trials: int = 4
    seed: int = 0
    relative: dict = field(default_factory=lambda: {"d": 2})

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def validate(self):
        self.context()
        if self.weight < 2:
            raise ValueError("weight must be at least 2")
        if self.n_max < 1 or self.m < 1 or self.trials < 1:
            raise ValueError("n_max, m and trials must be positive")
        self.make_lift()

    def context(self) -> PrecisionContext:
        return PrecisionContext(self.p, self.N, self.M, self.slack)

    def make_lift(self) -> FrobeniusLift:
        ctx = self.context()
        if self.lift == "multiplicative":
            return FrobeniusLift.multiplicative(ctx)
        if isinstance(self.lift, dict) and "coeffs" in self.lift:
            return FrobeniusLift(ctx, tuple(self.lift["coeffs"]))
        if isinstance(self.lift, dict) and "g" in self.lift:
            return FrobeniusLift.from_descriptor({**self.lift, "p": self.p, "N": self.N, "M": self.M}, ctx)
        raise ValueError("lift must be 'multiplicative', {'coeffs': [...]} or a digit descriptor")

    def params(self) -> dict:
        return asdict(self)


class Outcome:
    """Collects rows and the worst status seen."""

    def __init__(self):
        self.status = OK
        self.messages = []

    def fail(self, msg: str):
        # a failed identity outranks an undecided one
        self.status = FAILED
        self.messages.append(msg)

    def ambiguous(self, msg: str):
        if self.status == OK:
            self.status = AMBIGUOUS
        self.messages.append(msg)

    def check(self, ok: bool, identity: str):
        if not ok:
            self.fail(f"identity failed: {identity}")


# subcommands -------------------------------------------------------------------

def cmd_fg_build(cfg: RunConfig, out: Outcome, jobs: int):
    lift = cfg.make_lift()
    F = group_law(lift)
    checks = F.verify()
    out.check(checks["unit"], "F(X, 0) = X")
    out.check(checks["commutative"], "F(X, Y) = F(Y, X)")
    out.check(checks["associative"], "F(F(X, Y), Z) = F(X, F(Y, Z))")
    out.check(checks["frobenius_endomorphism"], "g(F(X, Y)) = F(g(X), g(Y))")
    ctx = lift.ctx
    g = lift.series()
    pi_end = mult_by(lift.coeffs[1], F)
    checks["mult_by_pi_is_g"] = pi_end.equals(g, ctx.check_prec)
    out.check(checks["mult_by_pi_is_g"], "[pi] = g")
    a, b = 2, 1 + ctx.p
    ab = mult_by(a * b, F)
    checks["mult_by_composes"] = compose(mult_by(a, F), mult_by(b, F)).equals(ab, ctx.check_prec)
    out.check(checks["mult_by_composes"], "[a] o [b] = [ab]")
    lam = F.log
    lhs = compose(lam, F.apply(_x(ctx), _x(ctx)))
    checks["log_of_double"] = lhs.equals(lam * 2, lam.exp + ctx.check_prec)
    out.check(checks["log_of_double"], "lambda(F(X, X)) = 2 lambda(X)")
    terms = {f"{i},{j}": F.coefficient(i, j) for i in range(ctx.M + 1) for j in range(ctx.M + 1 - i)
             if F.coefficient(i, j)}
    law = _law_string(terms, ctx.modulus) if len(terms) <= 8 else None
    rows = [{"term": t, "coefficient": c} for t, c in sorted(terms.items(), key=_term_key)]
    return {"law": law, "checks": checks, "lift": lift.to_descriptor()}, rows


def cmd_fg_torsion(cfg: RunConfig, out: Outcome, jobs: int):
    lift = cfg.make_lift()
    ctx = lift.ctx
    from .tower import eta_root_check

    e = _eta(cfg, lift, out)
    rows = []
    for n in range(1, cfg.n_max + 1):
        try:
            E = torsion_poly(lift, n)
        except DegreeOverflow as exc:
            out.fail(f"E_{n}: {exc}")
            break
        eis = is_eisenstein(E, ctx.p, ctx.N)
        out.check(eis, f"E_{n} is Eisenstein")
        row = {"n": n, "degree": len(E) - 1, "E": " ".join(map(str, E)), "eisenstein": eis,
               "eta_root": None, "precision": None}
        if e is not None:
            chk = eta_root_check(e, n)
            row["eta_root"], row["precision"] = chk["holds"], chk["precision"]
            out.check(chk["holds"], f"E_{n}(eta^(phi^-{n})(zeta_(p^{n}) - 1)) = 0")
        rows.append(row)
    report = {}
    if e is not None:
        z = eta_bar_at_zero(e)
        report["eta_bar_at_zero"] = _elt_digits(z)
        report["eta_achieved_precision"] = e.achieved_precision
    return report, rows


def cmd_tower_traces(cfg: RunConfig, out: Outcome, jobs: int):
    from .tower import traces_table, tower_level

    lift = cfg.make_lift()
    rows = traces_table(lift, range(1, cfg.n_max + 1))
    for r in rows:
        out.check(r["trace_pi_prime_zero"], f"Tr_{r['level']}/{r['level'] - 1}(pi_{r['level']}') = 0")
        out.check(r["closed_form_holds"], "pi_1' = pi_1 + p/(p-1), pi_n' = pi_n + 1")
    L1 = tower_level(lift, 1)
    tr = L1.trace_down(L1.uniformizer())
    ok = tr.equals(L1.lower.scalar(-lift.p))
    out.check(ok, "Tr_1/0(pi_1) = -p")
    return {"trace_pi_1_is_minus_p": ok}, rows


def _spans_worker(args):
    cfg_dict, seed = args
    from .tower import spans_table

    cfg = RunConfig.from_dict(cfg_dict)
    return spans_table(cfg.make_lift(), cfg.n_max, 1, seed)


def cmd_tower_spans(cfg: RunConfig, out: Outcome, jobs: int):
    tasks = [(cfg.params(), cfg.seed * 1000 + t) for t in range(cfg.trials)]
    rows = []
    for t, chunk in enumerate(_map(_spans_worker, tasks, jobs)):
        for r in chunk:
            r["trial"] = t
            rows.append(r)
    rows.sort(key=lambda r: (len(r["S"]), r["S"], r["trial"]))
    for r in rows:
        if r["status"] == "ambiguous":
            out.ambiguous(f"rank of span for S = {r['S']} is undecidable at this precision")
        elif r["status"] != "ok":
            out.fail(f"identity failed: rank of conjugate span = sum of dim K^(i) for S = {r['S']}")
    return {"trials": cfg.trials}, rows


def cmd_logpm_emit(cfg: RunConfig, out: Outcome, jobs: int):
    from .coleman import character_point, log_zero_expected, pollack_log

    ctx = cfg.context()
    gamma = cfg.gamma or 1 + cfg.p
    report, rows = {}, []
    R = make_unramified(ctx, 1)
    for sign in "+-":
        # the largest number of cyclotomic layers that fits in X^M
        lg = None
        for n_log in range(cfg.n_max, 0, -1):
            try:
                lg = pollack_log(ctx, cfg.weight, sign, n_log, gamma)
                break
            except DegreeOverflow:
                continue
        if lg is None:
            out.fail(f"log{sign}: even one cyclotomic layer exceeds M = {ctx.M}")
            continue
        comp = lg.series.comps[0]
        report[f"log{sign}"] = {"layers": n_log, "degree": lg.degree, "achieved_precision": lg.achieved_precision,
                                "exp": comp.exp, "coefficients": [int(c[0]) for c in comp.to_monomial().coeffs]}
        # zero checks on the truncated product
        for level in range(1, 2 * cfg.n_max + 1):
            C = CyclotomicRing(R, level)
            for j in range(cfg.weight - 1):
                x = character_point(C, j, gamma)
                v = lg.series.evaluate(0, x)
                expected = log_zero_expected(sign, level, n_log)
                if v.is_zero(lg.achieved_precision):
                    verdict = "zero"
                elif v.valuation < lg.achieved_precision - ctx.slack:
                    verdict = "nonzero"
                else:
                    verdict = "ambiguous"
                rows.append({"sign": sign, "order_level": level, "j": j, "verdict": verdict,
                             "expected_zero": expected})
                if verdict == "ambiguous":
                    out.ambiguous(f"log{sign} at kappa^{j} theta (order p^{level}) is undecidable")
                elif (verdict == "zero") != expected:
                    out.fail(f"identity failed: log{sign} vanishes exactly at its prescribed characters "
                             f"(order p^{level}, j = {j})")
    return report, rows


def cmd_coleman_gamma(cfg: RunConfig, out: Outcome, jobs: int):
    from .coleman import gamma_table

    setup = _setup(cfg, out)
    rows = gamma_table(setup, range(1, cfg.n_max + 1), twists=range(cfg.weight - 1))
    flat = []
    for r in rows:
        if r["closed_form_agrees"] is False:
            out.fail(f"identity failed: closed form of gamma_(n,0) at n = {r['n']}, xi{r['sign']}")
        flat.append({**{k: v for k, v in r.items() if k not in ("omega_coord", "phi_omega_coord")},
                     "omega_coord": json.dumps(r["omega_coord"], sort_keys=True),
                     "phi_omega_coord": json.dumps(r["phi_omega_coord"], sort_keys=True)})
    return {}, flat


def _parity_worker(args):
    cfg_dict, n = args
    from .coleman import parity_table

    cfg = RunConfig.from_dict(cfg_dict)
    setup = _setup(cfg, Outcome())
    return parity_table(setup, [n])


def cmd_coleman_parity(cfg: RunConfig, out: Outcome, jobs: int):
    _setup(cfg, out)  # fail early on a bad lift
    rows = []
    for chunk in _map(_parity_worker, [(cfg.params(), n) for n in range(1, cfg.n_max + 1)], jobs):
        rows.extend(chunk)
    witnesses = {}
    for r in rows:
        r["witness"] = None if r["witness"] is None else json.dumps(r["witness"], sort_keys=True)
        if r["expected_zero"]:
            if r["verdict"] == "nonzero":
                out.fail(f"identity failed: log{r['sign']} | L_xi{r['sign']} forces zero at n = {r['n']}, "
                         f"theta = {r['theta']}, r = {r['r']}")
            elif r["verdict"] == "ambiguous":
                out.ambiguous(f"parity cell n = {r['n']}, theta = {r['theta']}, r = {r['r']} is undecidable")
        elif r["verdict"] == "nonzero":
            witnesses.setdefault(r["n"], f"{r['theta']} r={r['r']} xi{r['sign']}")
    return {"nonvanishing_witness": {str(n): witnesses.get(n) for n in range(1, cfg.n_max + 1)}}, rows


def cmd_relative_indep(cfg: RunConfig, out: Outcome, jobs: int):
    from .coleman import relative_independence

    rel = dict(cfg.relative or {})
    d = int(rel.get("d", 2))
    rep = relative_independence(cfg.context(), d, rel.get("zeta0_order"), weight=cfg.weight)
    out.check(rep.paths_agree, "bar-eta_i^phi(0) = phi^(i+1)(zeta0)")
    out.check(rep.unit, "bar-eta_i^phi(0), i < d, form a Z_p-basis of O_K")
    row = {"d": d, "zeta0": json.dumps(_elt_digits(rep.zeta0)), "determinant": rep.determinant,
           "unit": rep.unit, "paths_agree": rep.paths_agree, "lambda_congruence": rep.lambda_congruence}
    return {"verdict": "basis" if rep.unit else "not a basis"}, [row]


COMMANDS = {
    ("fg", "build"): cmd_fg_build,
    ("fg", "torsion"): cmd_fg_torsion,
    ("tower", "traces"): cmd_tower_traces,
    ("tower", "spans"): cmd_tower_spans,
    ("logpm", "emit"): cmd_logpm_emit,
    ("coleman", "gamma"): cmd_coleman_gamma,
    ("coleman", "parity"): cmd_coleman_parity,
    ("relative", "indep"): cmd_relative_indep,
}


# helpers ------------------------------------------------------------------------

def _x(ctx):
    from .arith.series import TruncatedSeries, scalar_ring

    return TruncatedSeries.X(scalar_ring(ctx))


def _term_key(item):
    i, j = map(int, item[0].split(","))
    return (i + j, -i)


def _law_string(terms, mod):
    parts = []
    for t, c in sorted(terms.items(), key=_term_key):
        i, j = map(int, t.split(","))
        c = c if c <= mod // 2 else c - mod
        mono = "".join(v if e == 1 else f"{v}^{e}" for v, e in (("X", i), ("Y", j)) if e)
        parts.append((c, mono))
    s = ""
    for c, mono in parts:
        coef = "" if abs(c) == 1 else str(abs(c))
        s += ("-" if c < 0 else "+") + coef + mono
    return s.lstrip("+")


def _elt_digits(x):
    import numpy as np

    return {"exp": int(x.exp), "rep": [[int(c) for c in row] for row in np.atleast_2d(x.rep)]}


def _eta(cfg, lift, out):
    try:
        return eta(lift, make_unramified(lift.ctx, cfg.m))
    except NoSolution as exc:
        out.fail(f"no Omega with Omega^phi = alpha Omega in degree {cfg.m}: {exc}")
        return None


def _setup(cfg, out):
    from .coleman import ColemanSetup

    return ColemanSetup(cfg.make_lift(), cfg.weight, cfg.gamma, make_unramified(cfg.context(), cfg.m))


def _map(fn, tasks, jobs):
    """Ordered map, in worker processes when ``jobs > 1``."""
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, tasks))


def _csv(params, report, rows) -> str:
    import csv
    import io

    buf = io.StringIO()
    buf.write("# params: " + json.dumps(params, sort_keys=True) + "\n")
    buf.write("# report: " + json.dumps(report, sort_keys=True, default=str) + "\n")
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return buf.getvalue()


def run(command, config: dict | RunConfig, out_path=None, fmt: str = "json", jobs: int = 1):
    """Run one subcommand; returns ``(exit_code, text)``."""
    cfg = config if isinstance(config, RunConfig) else RunConfig.from_dict(config)
    outcome = Outcome()
    key = tuple(command)
    if key not in COMMANDS:
        raise ValueError(f"unknown command {' '.join(command)!r}")
    try:
        report, rows = COMMANDS[key](cfg, outcome, jobs)
    except PrecisionAmbiguous as exc:
        outcome.ambiguous(str(exc))
        report, rows = {}, []
    except (IdentityFailure, NoSolution, DegreeOverflow) as exc:
        outcome.fail(f"{type(exc).__name__}: {exc}")
        report, rows = {}, []
    status = {OK: "ok", FAILED: "failed", AMBIGUOUS: "ambiguous"}[outcome.status]
    report = {**report, "status": status, "messages": outcome.messages,
              "precision": {"N": cfg.N, "slack": cfg.slack, "check": cfg.N - cfg.slack, "M": cfg.M}}
    if fmt == "csv":
        text = _csv(cfg.params(), report, rows)
    else:
        text = json.dumps({"command": " ".join(command), "params": cfg.params(), "report": report, "table": rows},
                          sort_keys=True, indent=1, default=str) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    return outcome.status, text


def build_parser():
    ap = argparse.ArgumentParser(prog="ltcoleman", description=__doc__.splitlines()[0])
    groups = ap.add_subparsers(dest="group", required=True)
    by_group = {}
    for g, c in COMMANDS:
        by_group.setdefault(g, []).append(c)
    for g, cs in by_group.items():
        sp = groups.add_parser(g).add_subparsers(dest="action", required=True)
        for c in cs:
            p = sp.add_parser(c)
            p.add_argument("--config", help="JSON file matching RunConfig")
            p.add_argument("--out", help="write the artifact here instead of stdout")
            p.add_argument("--format", choices=["json", "csv"], default="json")
            p.add_argument("--jobs", type=int, default=1)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = {}
        if args.config:
            with open(args.config) as fh:
                cfg = json.load(fh)
        code, text = run((args.group, args.action), cfg, args.out, args.format, args.jobs)
    except (ValueError, LTColemanError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILED
    if not args.out:
        sys.stdout.write(text)
    if code:
        try:
            msgs = json.loads(text)["report"]["messages"] if args.format == "json" else []
        except (KeyError, ValueError):
            msgs = []
        for m in msgs:
            print(m, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
