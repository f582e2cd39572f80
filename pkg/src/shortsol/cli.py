"""
Command-line front end.

Every run writes a header (``# config: <argv>`` and ``# version: ...``)
followed by a data section.  The data section depends only on the config,
never on ``--threads`` or ``--output``, so two runs can be compared byte
for byte after stripping the header.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import shlex
import sys
from dataclasses import dataclass, field
from typing import Sequence

from . import __version__
from .arith import as_modulus
from .errors import ShortSolError
from .expsums import bound_experiment
from .lattices import (
    congruence_from_lattice,
    count_L,
    enumerate_D_N,
    enumerate_hecke_orbit,
    hecke_average,
    lattice_from_congruence,
    snf_2x2,
)
from .montecarlo import (
    c2r_closed,
    compare_counts,
    pick_moduli,
    simulate_primitive_fraction,
    simulate_r_distribution,
    theory_aspect,
    theory_summary,
)
from .solver import (
    BoxSpec,
    CongruenceSystem,
    count_solutions_in_box,
    integer_root_floor,
    short_solution_census,
    shortest_nontrivial,
    solve_two_var,
)

PROG = "shortsol"
COMMANDS = ("solve", "lattices", "theory", "simulate-rdist", "simulate-primitive", "hecke-average", "expsum")
_MODULUS_KINDS = ("prime", "squarefree", "squarefree-composite", "any")


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    command: str
    argv: list[str]
    modulus: list[int] | None = None
    modulus_kind: str | None = None
    range: tuple[int, int] | None = None
    count: int = 1
    rows: list[list[int]] = field(default_factory=list)
    n: int = 2
    j: int = 1
    box: BoxSpec | None = field(default_factory=lambda: BoxSpec.square(1.0))
    samples: int = 1000
    seed: int = 0
    threads: int = 1
    output: str | None = None
    format: str = "csv"
    rmax: int = 9
    r: int = 1
    prime_range: tuple[int, int] | None = None

    def data_key(self) -> dict:
        """Everything that can influence the data section."""
        skip = {"argv", "threads", "output"}
        return {k: v for k, v in self.__dict__.items() if k not in skip}


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".9g")
    if x is None:
        return ""
    return str(x)


def _jsonable(x):
    if isinstance(x, float):
        if math.isfinite(x):
            return float(format(x, ".9g"))
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


# -- parsing -------------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _int_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}")
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=_positive, default=1)
    common.add_argument("--output")
    common.add_argument("--format", choices=("csv", "json"))

    modulus = _Parser(add_help=False)
    modulus.add_argument("--modulus", type=_int_list, action="append",
                         help="explicit modulus; repeat or comma-separate for several")
    modulus.add_argument("--modulus-kind", choices=_MODULUS_KINDS)
    modulus.add_argument("--range", type=_int_range, help="lo:hi for --modulus-kind")
    modulus.add_argument("--count", type=_positive, default=1)

    dims = _Parser(add_help=False)
    dims.add_argument("--n", type=int, default=2)
    dims.add_argument("--j", type=int, default=1)

    box = _Parser(add_help=False)
    box.add_argument("--box", choices=("square", "rect", "cube"), default=None)
    box.add_argument("--a", type=float, default=None)
    box.add_argument("--D", type=float, default=None)

    p = _Parser(prog=PROG, description="Short solutions of homogeneous linear congruences.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    s = sub.add_parser("solve", parents=[common, modulus, box], help="solve one system exactly")
    s.add_argument("--row", type=_int_list, action="append", required=True)
    sub.add_parser("lattices", parents=[common, modulus, dims], help="index-N sublattices and their congruences")
    t = sub.add_parser("theory", parents=[common, box], help="closed-form probabilities for n = 2")
    t.add_argument("--rmax", type=_positive, default=9)
    r = sub.add_parser("simulate-rdist", parents=[common, modulus, dims, box], help="Monte Carlo box-count histogram")
    r.add_argument("--samples", type=_positive, default=1000)
    q = sub.add_parser("simulate-primitive", parents=[common, modulus, box], help="Monte Carlo primitive fraction")
    q.add_argument("--samples", type=_positive, default=1000)
    h = sub.add_parser("hecke-average", parents=[common, modulus, dims, box], help="exact orbit average")
    h.add_argument("--r", type=_positive, default=1)
    e = sub.add_parser("expsum", parents=[common, box], help="binomial exponential sum bounds")
    e.add_argument("--prime-range", type=_int_range, required=True)
    e.add_argument("--count", type=_positive, default=1)
    e.add_argument("--samples", type=_positive, default=1)
    return p


def _make_box(ns, command: str) -> BoxSpec:
    shape = ns.box or ("cube" if ns.D is not None else "square")
    if ns.a is not None and not 0 < ns.a <= 2:
        raise UsageError(f"--a must lie in (0, 2], got {ns.a}")
    if ns.D is not None and not 0 < ns.D < 1:
        raise UsageError(f"--D must lie in (0, 1), got {ns.D}")
    if shape == "cube":
        if ns.D is None:
            raise UsageError("--box cube needs --D")
        return BoxSpec.cube(ns.D)
    return BoxSpec(shape, a=1.0 if ns.a is None else ns.a)


def parse_config(argv: Sequence[str]) -> ExperimentConfig:
    """Validated config, or `UsageError` naming the offending flag."""
    argv = list(argv)
    ns = _build_parser().parse_args(argv)
    cfg = ExperimentConfig(command=ns.command, argv=argv)
    cfg.seed = ns.seed
    cfg.threads = ns.threads
    cfg.output = ns.output
    cfg.format = ns.format or ("json" if ns.command == "solve" else "csv")
    if hasattr(ns, "n"):
        if ns.n < 2:
            raise UsageError(f"--n must be at least 2, got {ns.n}")
        if not 1 <= ns.j <= ns.n - 1:
            raise UsageError(f"--j must satisfy 1 <= j <= n-1, got n={ns.n}, j={ns.j}")
        cfg.n, cfg.j = ns.n, ns.j
    if hasattr(ns, "box"):
        cfg.box = _make_box(ns, ns.command)
        if ns.command in ("theory", "simulate-primitive", "expsum") and cfg.box.shape == "cube":
            raise UsageError(f"{ns.command} needs a square or rect box")
        if cfg.box.shape != "cube" and cfg.n != 2:
            raise UsageError(f"--box {cfg.box.shape} is two-dimensional; use --box cube for n={cfg.n}")
    if hasattr(ns, "modulus_kind"):
        if ns.modulus:
            if ns.modulus_kind:
                raise UsageError("--modulus and --modulus-kind are mutually exclusive")
            cfg.modulus = [m for group in ns.modulus for m in group]
            if any(m < 2 for m in cfg.modulus):
                raise UsageError("--modulus values must be at least 2")
        elif ns.modulus_kind:
            if ns.range is None:
                raise UsageError("--modulus-kind needs --range lo:hi")
            if ns.range[0] < 2:
                raise UsageError("--range must start at 2 or above")
            cfg.modulus_kind, cfg.range = ns.modulus_kind, ns.range
        else:
            raise UsageError("one of --modulus or --modulus-kind is required")
        cfg.count = ns.count
    for name in ("samples", "rmax", "r", "prime_range", "count"):
        if hasattr(ns, name):
            setattr(cfg, name, getattr(ns, name))
    if hasattr(ns, "row"):
        cfg.rows = ns.row
        widths = {len(r) for r in cfg.rows}
        if len(widths) != 1 or widths == {0}:
            raise UsageError("--row entries must all have the same positive length")
        cfg.n = widths.pop()
        cfg.j = len(cfg.rows)
        if cfg.j >= cfg.n:
            raise UsageError(f"need fewer rows than columns, got j={cfg.j}, n={cfg.n}")
        if len(cfg.modulus or []) != 1:
            raise UsageError("solve needs exactly one --modulus")
        if cfg.box.shape != "cube" and cfg.n != 2:
            if ns.box or ns.a is not None:
                raise UsageError(f"--box {cfg.box.shape} is two-dimensional; use --box cube for n={cfg.n}")
            cfg.box = None
    if ns.command == "expsum" and ns.prime_range[0] < 2:
        raise UsageError("--prime-range must start at 2 or above")
    return cfg


# -- commands ------------------------------------------------------------------


@dataclass
class Table:
    columns: list[str]
    rows: list[list]
    extra: dict = field(default_factory=dict)


def _moduli(cfg: ExperimentConfig) -> list[int]:
    if cfg.modulus is not None:
        return list(cfg.modulus)
    lo, hi = cfg.range
    return [M.value for M in pick_moduli(cfg.modulus_kind, lo, hi, cfg.count, cfg.seed)]


def _run_solve(cfg: ExperimentConfig):
    N = cfg.modulus[0]
    system = CongruenceSystem(cfg.rows, N)
    out = {
        "modulus": N,
        "rows": [list(r) for r in system.rows],
        "n": system.n,
        "j": system.j,
        "box": _box_dict(cfg.box) if cfg.box else None,
    }
    if system.n == 2:
        r1, r2 = system.rows[0]
        out["generator"] = list(solve_two_var(r1, r2, N))
        lat = lattice_from_congruence(system)
        out["lattice"] = {"d": lat.d, "a": lat.a}
    s = shortest_nontrivial(system)
    out["shortest_nontrivial"] = list(s.coords)
    out["sup_norm"] = s.sup_norm
    out["dirichlet_bound"] = integer_root_floor(N**system.j, system.n)
    if cfg.box is not None:
        out["count_in_box"] = count_solutions_in_box(system, cfg.box)
    if cfg.box is not None and cfg.box.shape != "cube":
        r1, r2 = system.rows[0]
        out["census"] = [
            {"k": k, "d": d, "point": list(pt)} for k, d, pt in short_solution_census(r1, r2, N, cfg.box)
        ]
    return out


def _box_dict(box: BoxSpec) -> dict:
    if box.shape == "cube":
        return {"shape": "cube", "D": box.D}
    return {"shape": box.shape, "a": box.a}


def _run_lattices(cfg: ExperimentConfig) -> Table:
    ms = _moduli(cfg)
    if cfg.n == 2:
        rows = []
        for N in ms:
            for b in enumerate_D_N(N):
                snf = snf_2x2(b)
                cong = congruence_from_lattice(b)
                rows.append([N, b.d, b.a, snf.d1, snf.d2, cong is not None,
                             cong[0] if cong else None, cong[1] if cong else None])
        return Table(["N", "d", "a", "snf1", "snf2", "cyclic", "r1", "r2"], rows)
    rows = []
    for N in ms:
        M = as_modulus(N)
        formula = count_L(cfg.n, cfg.j, M) if M.is_squarefree else None
        rows.append([N, cfg.n, cfg.j, formula, len(enumerate_hecke_orbit(cfg.n, cfg.j, M))])
    return Table(["N", "n", "j", "count_formula", "orbit_size"], rows)


def _run_theory(cfg: ExperimentConfig) -> Table:
    t = theory_summary(cfg.box.a, cfg.rmax)
    rows = [["c2r", r, v] for r, v in t.entries.items()]
    rows += [
        ["p_nontrivial", None, t.p_nontrivial],
        ["primitive_lower_bound", None, t.primitive_lower_bound],
        ["tail", None, t.tail],
    ]
    return Table(["quantity", "r", "value"], rows, {"a": t.a})


def _rdist_rows(N, counts, samples, a):
    top = max(counts) if counts else 1
    comp = compare_counts(counts, samples, a, top) if a is not None else None
    rows = []
    for r in range(1, top + 1):
        cnt = counts.get(r, 0)
        if comp is None:
            if cnt:
                rows.append([N, r, cnt, cnt / samples, None, None])
            continue
        _, _, freq, th, _, _, z = comp.row(r)
        rows.append([N, r, cnt, freq, th, z])
    return rows


def _run_rdist(cfg: ExperimentConfig) -> Table:
    ms = _moduli(cfg)
    dist = simulate_r_distribution(cfg.n, cfg.j, ms, cfg.box, cfg.samples, cfg.seed, workers=cfg.threads)
    a = theory_aspect(cfg.box, cfg.n, cfg.j)
    rows = []
    for N in ms:
        rows += _rdist_rows(N, dist.by_modulus[N], cfg.samples, a)
    rows += _rdist_rows("all", dist.counts, dist.samples, a)
    return Table(["N", "r", "count", "freq", "theory_freq", "z"], rows, {"samples": dist.samples})


def _run_primitive(cfg: ExperimentConfig) -> Table:
    ms = _moduli(cfg)
    a = cfg.box.a
    res = simulate_primitive_fraction(ms, a, cfg.samples, cfg.seed, workers=cfg.threads, shape=cfg.box.shape)
    t = theory_summary(a, 1)
    rows = []
    for N in ms:
        s, nt, pr = res.by_modulus[N]
        rows.append([N, s, nt, pr, nt / s, pr / s, t.p_nontrivial, t.primitive_lower_bound])
    rows.append(["all", res.samples, res.nontrivial, res.primitive, res.fraction_nontrivial,
                 res.fraction_primitive, t.p_nontrivial, t.primitive_lower_bound])
    cols = ["N", "samples", "nontrivial", "primitive", "fraction_nontrivial", "fraction_primitive",
            "theory_nontrivial", "primitive_lower_bound"]
    extra = {"d_distribution": dict(sorted(res.d_distribution.items()))}
    return Table(cols, rows, extra)


def _run_hecke(cfg: ExperimentConfig) -> Table:
    rows = []
    a = theory_aspect(cfg.box, cfg.n, cfg.j)
    for N in _moduli(cfg):
        orbit = enumerate_hecke_orbit(cfg.n, cfg.j, N)
        avg = hecke_average(orbit, cfg.box, cfg.r)
        limit = c2r_closed(a, cfg.r) if a is not None else None
        dev = abs(avg - limit) if limit is not None else None
        rows.append([N, cfg.n, cfg.j, len(orbit), cfg.r, avg, limit, dev])
    return Table(["N", "n", "j", "orbit_size", "r", "average", "limit", "deviation"], rows)


EXPSUM_COLUMNS = ["p", "g", "h1", "h2", "r1", "r2", "a1", "a2", "abs_S", "weil_bound",
                  "M_unsigned", "M_signed", "improved_holds"]


def _run_expsum(cfg: ExperimentConfig) -> Table:
    lo, hi = cfg.prime_range
    s = bound_experiment(lo, hi, cfg.count, cfg.box.a, cfg.samples, cfg.seed, workers=cfg.threads)
    rows = [[getattr(r, c) for c in EXPSUM_COLUMNS] for r in s.records]
    summary = {
        "records": len(s.records),
        "checked": s.checked,
        "excluded": s.excluded,
        "weil_ok": s.weil_ok,
        "fraction_improved": s.fraction_improved,
        "improved_bound_ok": s.improved_bound_ok,
        "max_form_gap": s.max_form_gap,
    }
    return Table(EXPSUM_COLUMNS, rows, {"summary": summary})


_DISPATCH = {
    "solve": _run_solve,
    "lattices": _run_lattices,
    "theory": _run_theory,
    "simulate-rdist": _run_rdist,
    "simulate-primitive": _run_primitive,
    "hecke-average": _run_hecke,
    "expsum": _run_expsum,
}


# -- output --------------------------------------------------------------------


def header(cfg: ExperimentConfig) -> str:
    return f"# config: {shlex.join([PROG, *cfg.argv])}\n# version: {__version__}\n"


def render(result, fmt: str) -> str:
    if fmt == "json":
        if isinstance(result, Table):
            obj = {"columns": result.columns, "rows": result.rows, **result.extra}
        else:
            obj = result
        return json.dumps(_jsonable(obj), indent=2, sort_keys=False) + "\n"
    if not isinstance(result, Table):
        result = Table(list(result), [list(result.values())])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(result.columns)
    for row in result.rows:
        w.writerow([_fmt(v) if not isinstance(v, (list, dict)) else json.dumps(_jsonable(v)) for v in row])
    return buf.getvalue()


def data_section(text: str) -> str:
    """Output with the ``# config`` / ``# version`` header lines removed."""
    return "".join(line for line in text.splitlines(keepends=True)
                   if not line.startswith(("# config:", "# version:")))


def _error_record(exc: Exception, fmt: str) -> str:
    rec = {"error": type(exc).__name__, "message": str(exc)}
    if fmt == "json":
        return json.dumps(rec) + "\n"
    return f"# error: {json.dumps(rec)}\n"


def run(cfg: ExperimentConfig, stdout=None) -> int:
    """Execute a parsed config; returns the process exit code."""
    stdout = stdout or sys.stdout
    try:
        body = render(_DISPATCH[cfg.command](cfg), cfg.format)
        code = 0
    except (ShortSolError, ValueError, RuntimeError, OverflowError) as exc:
        body = _error_record(exc, cfg.format)
        print(f"{PROG}: {type(exc).__name__}: {exc}", file=sys.stderr)
        code = 1
    text = header(cfg) + body
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
