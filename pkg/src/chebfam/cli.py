"""Command-line front end.

Every subcommand writes its data artifact to standard output, or to a file in
``--out-dir`` (default: the ``CHEBFAM_OUT_DIR`` environment variable) next to
a JSON manifest recording the command, the full flag set and the wall time.
Data artifacts depend only on the flags, so reruns are byte-identical.

Exit status: 0 success, 1 validation or data error, 2 a size cap was hit,
64 command-line usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import classgroup as cg
from . import constants as K
from . import fields as F
from . import frobenius as fr
from . import heights as ht
from . import permgroup as pg
from . import poly as P
from . import ramcalc as rc
from .errors import CapExceededError, ChebfamError, ValidationError
from .primes import SIEVE_CAP

EXIT_USAGE = 64
OUT_DIR_ENV = "CHEBFAM_OUT_DIR"


# ---------------------------------------------------------------------------
# polynomial expressions


class _PolyParser:
    """Recursive descent over ``expr := term (('+'|'-') term)*``.

    ``term := unary ('*'? unary)*`` (juxtaposition multiplies, so ``3x^2``
    works), ``unary := ('+'|'-') unary | power``, ``power := atom ('^' INT)?``,
    ``atom := INT | 'x' | '(' expr ')'``.
    """

    def __init__(self, text: str, var: str = "x") -> None:
        self.text = text
        self.var = var
        self.pos = 0

    def fail(self, msg: str) -> None:
        raise ValidationError(f"cannot parse polynomial {self.text!r} at offset {self.pos}: {msg}")

    def peek(self) -> str:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def integer(self) -> int:
        self.peek()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.fail("expected an integer")
        return int(self.text[start : self.pos])

    def parse(self) -> list[int]:
        if not self.text.strip():
            self.fail("empty input")
        out = self.expr()
        if self.peek():
            self.fail(f"unexpected {self.peek()!r}")
        return out

    def expr(self) -> list[int]:
        acc = self.term()
        while True:
            if self.take("+"):
                acc = P.add(acc, self.term())
            elif self.take("-"):
                acc = P.sub(acc, self.term())
            else:
                return acc

    def term(self) -> list[int]:
        acc = self.unary()
        while True:
            if self.take("*"):
                acc = P.mul(acc, self.unary())
            elif self.peek() and (self.peek().isdigit() or self.peek() in (self.var, "(")):
                acc = P.mul(acc, self.unary())
            else:
                return acc

    def unary(self) -> list[int]:
        if self.take("-"):
            return P.neg(self.unary())
        if self.take("+"):
            return self.unary()
        return self.power()

    def power(self) -> list[int]:
        base = self.atom()
        if self.take("^"):
            e = self.integer()
            if e > 64:
                self.fail("exponent above 64")
            out = [1]
            for _ in range(e):
                out = P.mul(out, base)
            return out
        return base

    def atom(self) -> list[int]:
        ch = self.peek()
        if ch.isdigit():
            return [self.integer()]
        if ch == self.var:
            self.pos += 1
            return [0, 1]
        if self.take("("):
            inner = self.expr()
            if not self.take(")"):
                self.fail("expected ')'")
            return inner
        self.fail("expected a number, the variable or '('")
        raise AssertionError  # unreachable


def parse_poly(text: str, var: str = "x") -> list[int]:
    """Integer coefficients, lowest degree first, of an expression such as ``x^3-x-1``."""
    return list(P.trim(_PolyParser(text, var).parse()))


# ---------------------------------------------------------------------------
# output plumbing


@dataclass
class Artifact:
    name: str
    text: str


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # noqa: D401 - argparse hook
        raise _Usage(f"{self.prog}: {message}")


def _emit(args: argparse.Namespace, artifacts: list[Artifact], started: float, out=None) -> None:
    out_dir = args.out_dir or os.environ.get(OUT_DIR_ENV)
    if not out_dir:
        out = out or sys.stdout
        for a in artifacts:
            out.write(a.text)
        return
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    for a in artifacts:
        (path / a.name).write_text(a.text, encoding="utf-8", newline="\n")
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out_dir")}
    manifest = {
        "command": args.command_path,
        "flags": flags,
        "preset": flags.get("preset"),
        "caps": {"sieve": SIEVE_CAP, "discriminant": cg.DISC_CAP},
        "version": __version__,
        "artifacts": [a.name for a in artifacts],
        "wall_time_s": round(time.perf_counter() - started, 3),
    }
    stem = artifacts[0].name.rsplit(".", 1)[0] if artifacts else "run"
    (path / f"{stem}.manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _frac(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _int_arg(text: str) -> int:
    """Integers, also written in scientific notation such as ``1e6``."""
    try:
        if any(c in text for c in "eE."):
            v = float(text)
            if not v.is_integer():
                raise ValueError
            return int(v)
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None


def _pmap(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * threads))))


def _read_db(path: str) -> list[F.FieldRecord]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    out = []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        out.append(F.FieldRecord.from_json(line) if line.startswith("{") else F.FieldRecord.from_line(line))
    return out


def _records_ndjson(records) -> str:
    return "".join(r.to_json() + "\n" for r in records)


# ---------------------------------------------------------------------------
# subcommands


def cmd_group(args) -> list[Artifact]:
    G = pg.preset(args.preset)
    rows = []
    for c in G.classes:
        g = c.representative
        rows.append((c.label(), c.size, g.order, " ".join(map(str, c.cycle_type)), g.ind))
    text = _csv(("class", "size", "order", "cycle_type", "ind"), rows)
    text += f"# group={G.name} order={G.order} degree={G.n} a={_frac(pg.malle_exponent(G))}\n"
    return [Artifact(f"group_{args.preset.lower()}.csv", text)]


def cmd_ramtable(args) -> list[Artifact]:
    table = rc.ram_table(args.preset, args.param)
    text = table.to_csv() if args.format == "csv" else table.to_text()
    ext = "csv" if args.format == "csv" else "txt"
    return [Artifact(f"ramtable_{table.name.lower()}.{ext}", text)]


def cmd_fields_enumerate(args) -> list[Artifact]:
    recs = F.enumerate_squarefree_disc_fields(args.degree, args.X, args.height)
    return [Artifact(f"fields_deg{args.degree}_X{args.X}.ndjson", _records_ndjson(recs))]


def cmd_fields_cyclic(args) -> list[Artifact]:
    fam = F.cyclic_fields(args.p, args.X)
    cond = _csv(
        ("conductor", "omega", "constructed", "euler_coefficient", "ratio", "discriminant", "tame"),
        [(e.conductor, e.omega, e.constructed, e.euler_coefficient, f"{e.ratio:.6f}", e.discriminant, int(e.tame))
         for e in fam.conductors],
    )
    stem = f"cyclic_p{args.p}_X{args.X}"
    return [Artifact(f"{stem}.ndjson", _records_ndjson(fam.records)), Artifact(f"{stem}_conductors.csv", cond)]


def cmd_fields_census(args) -> list[Artifact]:
    recs = [r for r in _read_db(args.db) if r.degree == args.degree] if args.db else []
    hi = args.X or (max((r.abs_disc for r in recs), default=0))
    if hi <= 1:
        raise F.FitError("no records to census")
    grid = F.geometric_grid(max(1.0, hi / 10**args.decades), hi, args.points)
    rep = F.family_census(recs, grid, omega=args.omega or None)
    rows = [(f"{x:.6g}", c) for x, c in zip(rep.grid, rep.counts)]
    text = _csv(("X", "count"), rows)
    text += f"# exponent={rep.exponent:.6f} intercept={rep.intercept:.6f} residual={rep.residual:.6f}"
    text += f" max_multiplicity={rep.max_multiplicity} height_limited={int(rep.height_limited)}\n"
    return [Artifact(f"census_deg{args.degree}.csv", text)]


def cmd_cheb_report(args) -> list[Artifact]:
    f = parse_poly(args.poly)
    grid = [round(v) for v in F.geometric_grid(args.xmin, args.xmax, args.points)]
    stats = fr.chebotarev_report(f, args.group, sorted(set(grid)), args.cap)
    text = stats.to_csv()
    text += f"# group={stats.group_label} balanced={int(stats.balanced())}\n"
    return [Artifact("cheb_report.csv", text)]


def cmd_cheb_pattern(args) -> list[Artifact]:
    f = parse_poly(args.poly)
    pat = fr.frobenius_pattern(f, args.p)
    return [Artifact("pattern.csv", _csv(("p", "pattern"), [(pat.p, " ".join(map(str, pat.parts)))]))]


def cmd_cheb_count(args) -> list[Artifact]:
    f = parse_poly(args.poly)
    spec = [tuple(int(v) for v in part.split()) for part in args.cycle_type]
    n = fr.pi_class(f, spec, args.x, args.group)
    return [Artifact("pi_class.csv", _csv(("x", "cycle_types", "count"), [(args.x, ";".join(args.cycle_type), n)]))]


def cmd_torsion_classgroup(args) -> list[Artifact]:
    rec = cg.class_group(args.D)
    check = cg.verify_group(rec)
    rows = [(i, f.a, f.b, f.c) for i, f in enumerate(rec.forms)]
    text = _csv(("index", "a", "b", "c"), rows)
    inv = " ".join(map(str, rec.invariants))
    text += f"# D={args.D} h={rec.h} invariants={inv} group_ok={int(check.ok)}\n"
    return [Artifact(f"classgroup_{-args.D}.csv", text)]


def cmd_torsion_stats(args) -> list[Artifact]:
    s = cg.torsion_stats(args.X, args.ell, args.k)
    text = _csv(("X", "ell", "k", "moment", "count", "exceptional"), [(s.X, s.ell, s.k, s.moment, s.count, s.exceptional)])
    return [Artifact(f"torsion_X{args.X}_l{args.ell}_k{args.k}.csv", text)]


def cmd_torsion_correspondence(args) -> list[Artifact]:
    rep = cg.cubic_correspondence(args.X, args.height, args.max_height)
    rows = [(r.D, r.cubic_fields, r.torsion_prediction, int(r.match)) for r in rep.rows]
    text = _csv(("D", "cubic_fields", "torsion_prediction", "match"), rows)
    text += f"# X={rep.X} height={rep.height} stable={int(rep.stable)} all_match={int(rep.all_match)}\n"
    return [Artifact(f"correspondence_X{args.X}.csv", text)]


def _config(args) -> K.FamilyConfig:
    over = {"A": args.A, "C0": args.c0, "C1": args.c1, "C2": args.c2, "C5": args.c5, "C6": args.c6, "c_Q": args.cq}
    if args.eps0 is not None:
        over["eps0"] = K.as_fraction(args.eps0)
    return K.preset(args.preset, **over)


def cmd_constants_report(args) -> list[Artifact]:
    cfg = _config(args)
    rep = K.constants_report(cfg, audit_samples=args.audit, seed=args.seed, log10_D_values=tuple(args.log10_D or ()))
    text = rep.to_csv() if args.format == "csv" else rep.to_text()
    ext = "csv" if args.format == "csv" else "txt"
    return [Artifact(f"constants_{cfg.name}.{ext}", text)]


def cmd_constants_bound(args) -> list[Artifact]:
    kw = {}
    for item in args.arg or ():
        if "=" not in item:
            raise ValidationError(f"bound argument {item!r} is not key=value")
        k, v = item.split("=", 1)
        kw[k] = int(v) if v.lstrip("-").isdigit() else float(v)
    val = K.bound_eval(args.kind, **kw)
    args_txt = ";".join(f"{k}={v}" for k, v in sorted(kw.items()))
    return [Artifact(f"bound_{args.kind}.csv", _csv(("kind", "args", "value"), [(args.kind, args_txt, repr(val))]))]


def _audit_one(job: tuple[str, int, int, dict]) -> tuple:
    name, samples, seed, over = job
    rep = K.envelope_audit(K.preset(name, **over), n_samples=samples, seed=seed)
    fails = ";".join(f"{k}:{v}" for k, v in sorted({**rep.term_failures, **rep.condition_failures}.items()))
    return (name, _frac(rep.delta), rep.status, rep.n_samples, fails)


def cmd_audit(args) -> list[Artifact]:
    names = args.preset or sorted(K.PRESETS)
    over = {"A": args.A}
    jobs = [(n, args.samples, args.seed, over) for n in names]
    rows = _pmap(_audit_one, jobs, args.threads)
    return [Artifact("envelope_audit.csv", _csv(("preset", "delta", "status", "samples", "failures"), rows))]


def _smallgen_one(job: tuple[F.FieldRecord, int]) -> ht.SmallGenerator:
    rec, h = job
    return ht.small_generator(rec, h)


def cmd_heights_smallgen(args) -> list[Artifact]:
    recs = _read_db(args.db)
    results = _pmap(_smallgen_one, [(r, args.height) for r in recs], args.threads)
    return [Artifact("smallgen.csv", ht.smallgen_csv(results))]


def cmd_heights_weil(args) -> list[Artifact]:
    f = parse_poly(args.poly)
    H = ht.weil_height(f)
    return [Artifact("weil_height.csv", _csv(("poly", "H"), [(P.to_str(f), f"{H:.12f}")]))]


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out-dir", default=None, help=f"write artifacts here (default ${OUT_DIR_ENV}, else stdout)")
    common.add_argument("--threads", type=int, default=1, help="worker processes for independent jobs")

    root = _Parser(prog="chebfam", description="Chebotarev statistics and explicit constants for field families.")
    root.add_argument("--version", action="version", version=__version__)
    sub = root.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def leaf(parent, name: str, func, help_: str):
        p = parent.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    p = leaf(sub, "group", cmd_group, "conjugacy classes, ind and the Malle exponent")
    p.add_argument("--preset", required=True, help="S<n>, A<n>, C<n>, D<m> or V4")

    p = leaf(sub, "ramtable", cmd_ramtable, "discriminant exponent table of a preset group")
    p.add_argument("--preset", required=True, choices=["sn", "s4", "a4", "dp", "c2p", "d4"])
    p.add_argument("--param", type=int, default=None, help="n for sn, p for dp and c2p")
    p.add_argument("--format", choices=["text", "csv"], default="text")

    fp = sub.add_parser("fields", help="field enumeration and census")
    fsub = fp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = leaf(fsub, "enumerate", cmd_fields_enumerate, "monic polynomials with square-free discriminant")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--X", type=_int_arg, required=True, help="bound on |disc|")
    p.add_argument("--height", type=int, default=8, help="coefficient box")
    p = leaf(fsub, "cyclic", cmd_fields_cyclic, "cyclic fields of prime degree from conductors")
    p.add_argument("--p", type=int, default=3)
    p.add_argument("--X", type=_int_arg, required=True)
    p = leaf(fsub, "census", cmd_fields_census, "counts on a grid and growth fit")
    p.add_argument("--db", default=None, help="NDJSON field records")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--X", type=_int_arg, default=None)
    p.add_argument("--points", type=int, default=12)
    p.add_argument("--decades", type=float, default=3.0)
    p.add_argument("--omega", type=int, nargs="*", default=None, help="primes removed for the tame histogram")

    cp = sub.add_parser("cheb", help="Frobenius statistics")
    csub = cp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = leaf(csub, "report", cmd_cheb_report, "per-class counts against the density")
    p.add_argument("--poly", required=True)
    p.add_argument("--group", default=None, help="Galois label; identified when omitted")
    p.add_argument("--xmin", type=_int_arg, default=1000)
    p.add_argument("--xmax", type=_int_arg, required=True)
    p.add_argument("--points", type=int, default=10)
    p.add_argument("--cap", type=_int_arg, default=SIEVE_CAP)
    p = leaf(csub, "pattern", cmd_cheb_pattern, "factorization pattern at one prime")
    p.add_argument("--poly", required=True)
    p.add_argument("--p", type=int, required=True)
    p = leaf(csub, "count", cmd_cheb_count, "primes up to x with given cycle types")
    p.add_argument("--poly", required=True)
    p.add_argument("--x", type=_int_arg, required=True)
    p.add_argument("--cycle-type", action="append", required=True, help='e.g. "2 1"; repeat for a union')
    p.add_argument("--group", default=None)

    tp = sub.add_parser("torsion", help="class groups of imaginary quadratic fields")
    tsub = tp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = leaf(tsub, "classgroup", cmd_torsion_classgroup, "reduced forms and structure")
    p.add_argument("--D", type=int, required=True)
    p = leaf(tsub, "stats", cmd_torsion_stats, "torsion moments")
    p.add_argument("--X", type=_int_arg, required=True)
    p.add_argument("--ell", type=int, default=3)
    p.add_argument("--k", type=int, default=1)
    p = leaf(tsub, "correspondence", cmd_torsion_correspondence, "cubic fields against 3-torsion")
    p.add_argument("--X", type=_int_arg, required=True)
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--max-height", type=int, default=400)

    kp = sub.add_parser("constants", help="explicit constants")
    ksub = kp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = leaf(ksub, "report", cmd_constants_report, "full constants report for a preset family")
    p.add_argument("--preset", required=True, choices=sorted(K.PRESETS))
    p.add_argument("--eps0", type=float, default=None)
    p.add_argument("--A", type=int, default=2)
    for flag, default in (("c0", 1.0), ("c1", 1.0), ("c2", 1.0), ("c5", 1.0), ("c6", 1.0), ("cq", K.C_Q_DEFAULT)):
        p.add_argument(f"--{flag}", type=float, default=default)
    p.add_argument("--audit", type=int, default=0, help="envelope audit sample count (0 skips)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--log10-D", type=float, nargs="*", default=None, help="tabulate log x0 at these log10 D_L")
    p.add_argument("--format", choices=["text", "csv"], default="csv")
    p = leaf(ksub, "bound", cmd_constants_bound, "evaluate a closed-form bound")
    p.add_argument("--kind", required=True, choices=K.BOUND_KINDS)
    p.add_argument("--arg", action="append", help="key=value, repeatable")

    hp = sub.add_parser("heights", help="Weil heights and small generators")
    hsub = hp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = leaf(hsub, "smallgen", cmd_heights_smallgen, "smallest generator per field")
    p.add_argument("--db", required=True)
    p.add_argument("--height", type=int, default=10)
    p = leaf(hsub, "weil", cmd_heights_weil, "height of a root of an irreducible polynomial")
    p.add_argument("--poly", required=True)

    p = leaf(sub, "audit", cmd_audit, "envelope audit over preset families")
    p.add_argument("--preset", action="append", choices=sorted(K.PRESETS))
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--A", type=int, default=2)
    return root


def main(argv: Sequence[str] | None = None) -> int:
    started = time.perf_counter()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _Usage as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    args.command_path = " ".join(v for v in (args.command, getattr(args, "action", None)) if v)
    try:
        artifacts = args.func(args)
        _emit(args, artifacts, started)
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ChebfamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
