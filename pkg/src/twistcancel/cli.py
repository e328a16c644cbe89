"""Command-line front end: ``verify``, ``expand`` and ``manifold``."""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import manifolds as mf
from . import theorems as th
from .modular import (
    CASES,
    build_p1,
    build_p2,
    get_case,
    modular_form,
    theta_ratio,
)
from .series import SeriesError, format_qseries, format_rational

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

EXPAND_TARGETS = ("delta1", "eps1", "delta2", "eps2", "theta-ratio", "theta-element", "P1", "P2")


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    dims: tuple[int, ...] = ()
    max_dim: int | None = None
    J: int | None = None
    D: int | None = None
    fmt: str = "text"
    jobs: int = 1
    seeds: tuple[int, ...] = (0,)
    theorem: str | None = None
    corollary: str | None = None
    all: bool = False
    out: str | None = None


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _check_dim(dim: int) -> None:
    if dim <= 0 or dim % 4:
        raise ConfigError(f"dimension {dim} is not a positive multiple of 4")


def _case_k(theorem_id: str, dim: int) -> int:
    case = get_case(th.THEOREMS[theorem_id].case)
    try:
        return case.k_of(dim)
    except ValueError:
        raise ConfigError(f"theorem {theorem_id} does not apply in dimension {dim}") from None


def _theorem_tasks(cfg: RunConfig, ids) -> list[tuple]:
    tasks = []
    for tid in ids:
        if cfg.dims:
            offset = get_case(th.THEOREMS[tid].case).offset
            dims = [d for d in cfg.dims if d % 8 == offset]
            if cfg.theorem and not dims:
                raise ConfigError(f"theorem {tid} needs dimensions = {offset} mod 8, got {list(cfg.dims)}")
        else:
            dims = th.theorem_dims(tid, cfg.max_dim)
        for d in dims:
            if cfg.D is not None and cfg.D < d // 2:
                raise ConfigError(f"--degree {cfg.D} is below the top degree {d // 2} of dimension {d}")
            k = _case_k(tid, d)
            if cfg.J is not None and cfg.J < k + 2:
                raise ConfigError(f"--order {cfg.J} is too short for dimension {d} (need >= {k + 2})")
            tasks.append(("theorem", tid, k, cfg.J, cfg.D))
    return tasks


def _build_tasks(cfg: RunConfig) -> list[tuple]:
    for d in cfg.dims:
        _check_dim(d)
    if cfg.max_dim is not None:
        _check_dim(cfg.max_dim)
    if cfg.J is not None and cfg.J < 0:
        raise ConfigError("--order must be non-negative")
    if cfg.theorem is not None:
        if cfg.theorem not in th.THEOREMS:
            raise ConfigError(f"unknown theorem {cfg.theorem!r}; choose from {', '.join(th.THEOREMS)}")
        return _theorem_tasks(cfg, [cfg.theorem])
    if cfg.corollary is not None:
        if cfg.corollary not in th.COROLLARIES:
            raise ConfigError(f"unknown corollary {cfg.corollary!r}")
        return [("corollary", cfg.corollary)]
    tasks = _theorem_tasks(cfg, list(th.THEOREMS))
    if not cfg.all:
        return tasks
    limit = cfg.max_dim or 28
    tasks += [("corollary", c) for c in th.COROLLARIES if th.COROLLARIES[c].dim <= limit]
    tasks += [("coefficients",), ("hyperbolic",), ("modular-forms",), ("jacobi",), ("basis",)]
    for name in CASES:
        c = get_case(name)
        top = 2 if c.twisted else 3
        for k in range(0 if c.offset else 1, top + 1):
            if c.dim(k) <= limit:
                tasks.append(("routes", name, k))
                if c.twisted:
                    tasks.append(("specialization", name, k))
    tasks += [("ring-laws", s) for s in cfg.seeds]
    tasks += [("manifold-values",), ("product-formula",), ("divisibility", min(limit, 28))]
    return tasks


def _run_task(task: tuple) -> list[th.VerificationReport]:
    kind = task[0]
    if kind == "theorem":
        return [th.verify_theorem(*task[1:])]
    if kind == "corollary":
        return [th.verify_corollary(task[1])]
    if kind == "coefficients":
        return th.verify_coefficient_formulas()
    if kind == "hyperbolic":
        return [th.verify_hyperbolic_identity(14)]
    if kind == "modular-forms":
        return [th.verify_modular_forms()]
    if kind == "jacobi":
        return [th.verify_jacobi(24)]
    if kind == "basis":
        return [th.verify_basis_expansions(3)]
    if kind == "routes":
        return [th.verify_routes(task[1], task[2])]
    if kind == "specialization":
        return [th.verify_specialization(task[1], task[2])]
    if kind == "ring-laws":
        return [th.verify_ring_laws(task[1])]
    if kind == "manifold-values":
        return [_manifold_values_report()]
    if kind == "product-formula":
        names = mf.CATALOG_NAMES
        return [mf.verify_product_formula(mf.catalog(a), mf.catalog(b))
                for i, a in enumerate(names) for b in names[i:]]
    if kind == "divisibility":
        return mf.divisibility_suite(task[1])
    raise ValueError(kind)


# known values for the catalog: (expression, functional, value)
KNOWN_VALUES = (
    ("HP2", "Sig", 1), ("HP2", "A-hat", 0), ("K3", "Sig", -16), ("K3", "A-hat", 2),
    ("K3", "Sig(T)", -256), ("K3", "Sig(T⊗T)", -1792), ("Bott8", "A-hat", 1), ("Bott8", "Sig", 0),
    ("Bott8", "Sig(T)", 2048), ("Bott8", "Sig(T⊗T)", 47104), ("K3×Bott8", "Sig(T⊗T)", -1802240),
    ("HP2", "Sig(T)", 0), ("HP2^2", "Sig(T)", 0), ("HP2^3", "Sig(T)", 0),
)


def _manifold_values_report() -> th.VerificationReport:
    rep = th.VerificationReport("manifold-values", None, None, None, "pass")
    bad = []
    for expr, fn, want in KNOWN_VALUES:
        got = mf.char_number(mf.parse_manifold(expr), fn).value
        ok = got == want
        rep.checks.append((f"{fn}({expr})", ok))
        if not ok:
            bad.append(f"{fn}({expr}) = {format_rational(got)}, expected {want}")
    if bad:
        rep.status, rep.detail = "fail", "; ".join(bad)
    return rep


def _sort_key(r: th.VerificationReport):
    return (r.case, r.dim if r.dim is not None else -1)


def run_verify(cfg: RunConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    tasks = _build_tasks(cfg)
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            batches = list(pool.map(_run_task, tasks))
    else:
        batches = [_run_task(t) for t in tasks]
    reports = sorted((r for b in batches for r in b), key=_sort_key)
    failed = [r for r in reports if not r.passed]
    status = "fail" if failed else "pass"
    if cfg.fmt == "json" or cfg.out:
        doc = {"status": status, "reports": [r.to_json() for r in reports]}
        text = json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        if cfg.fmt == "json":
            out.write(text)
    if cfg.fmt == "text":
        for r in reports:
            out.write(f"{r.summary_line()}  ({r.seconds:.2f}s)\n")
        out.write(f"{len(reports) - len(failed)}/{len(reports)} checks passed\n")
    else:
        total = sum(r.seconds for r in reports)
        err.write(f"{len(reports)} checks in {total:.2f}s\n")
    return EXIT_FAIL if failed else EXIT_OK


# ---------------------------------------------------------------------------
# expand
# ---------------------------------------------------------------------------

def _print_graded_series(series, out, rename: str | None = None) -> None:
    from .series import q_power_string
    for j, c in enumerate(series.coeffs):
        text = str(c)
        if rename:
            text = text.replace("u", rename)
        label = q_power_string(j) if j else "q^0"
        out.write(f"{label}: {text}\n")


def run_expand(args, out=None) -> int:
    out = out or sys.stdout
    target = args.target
    J = 4 if args.order is None else args.order
    if J < 0:
        raise ConfigError("--order must be non-negative")
    if target in ("delta1", "eps1", "delta2", "eps2"):
        s = modular_form(target, J).series
        if args.format == "json":
            out.write(json.dumps({"target": target, "J": J,
                                  "coeffs": [format_rational(c) for c in s.coeffs]}) + "\n")
        else:
            out.write(format_qseries(s) + "\n")
        return EXIT_OK
    dim = args.dim
    if dim is None:
        raise ConfigError(f"{target} needs --dim")
    _check_dim(dim)
    if target == "theta-ratio":
        Y = args.degree if args.degree is not None else dim // 2
        r = theta_ratio(args.kind, Y, J)
        out.write(f"scale: {format_rational(r.scale)}\n")
        _print_graded_series(r.series, out, None if args.kind.startswith("twist") else "x")
        return EXIT_OK
    name = ("8k+4" if dim % 8 == 4 else "8k") + ("/twisted" if args.twisted else "")
    case = get_case(name)
    k = case.k_of(dim)
    if target == "theta-element":
        from .genera import theta_element_ch
        ring = case.ring(k, args.degree)
        s = theta_element_ch(args.which, args.twisted, dim, ring, J)
    elif target == "P1":
        s = build_p1(case, k, J, args.degree)
    else:
        s = build_p2(case, k, J, args.degree)
    if args.format == "json":
        out.write(json.dumps({"target": target, "dim": dim, "J": J,
                              "coeffs": [c.to_json() for c in s.coeffs]}, ensure_ascii=False) + "\n")
    else:
        _print_graded_series(s, out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# manifold
# ---------------------------------------------------------------------------

def run_manifold(args, out=None) -> int:
    out = out or sys.stdout
    m = mf.parse_manifold(args.expr)
    limit = args.max_dim or mf.MAX_DIM
    if m.dim > limit:
        raise ConfigError(f"{m.name} has dimension {m.dim} > {limit}")
    if m.spin:
        results = mf.divisibility_report(m, limit)
    else:
        results = [mf.char_number(m, f, limit) for f in mf.FUNCTIONALS]
    if args.format == "json":
        doc = {"manifold": m.name, "dim": m.dim, "spin": m.spin,
               "values": {r.functional: format_rational(r.value) for r in results},
               "divisibility": [{"quantity": d.quantity, "divisor": d.divisor, "holds": d.holds,
                                 "quotient": format_rational(d.quotient), "witness": d.witness}
                                for r in results for d in r.annotations]}
        out.write(json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    else:
        out.write(f"{m.name}  (dim {m.dim}{', spin' if m.spin else ''})\n")
        for r in results:
            out.write(f"  {r.functional:<10} {format_rational(r.value)}\n")
            for d in r.annotations:
                out.write(f"      {d}\n")
    bad = any(not d.holds for r in results for d in r.annotations)
    return EXIT_FAIL if bad else EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twistcancel",
                                description="Exact verification of twisted cancellation formulas.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run verification checks")
    v.add_argument("--dim", type=int, action="append", default=[], help="dimension (repeatable)")
    v.add_argument("--max-dim", type=int, help="largest dimension for default sweeps")
    v.add_argument("--order", type=int, help="q truncation J in half-steps")
    v.add_argument("--degree", type=int, help="internal degree truncation D")
    v.add_argument("--format", choices=("text", "json"), default="text")
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--seed", type=int, action="append", default=[], help="ring-law seed (repeatable)")
    g = v.add_mutually_exclusive_group()
    g.add_argument("--theorem", help="theorem id, e.g. 2.1")
    g.add_argument("--corollary", help="corollary id, e.g. 2.8")
    g.add_argument("--all", action="store_true", help="full suite")
    v.add_argument("--out", help="also write the JSON report here")

    e = sub.add_parser("expand", help="print a q-expansion")
    e.add_argument("target", choices=EXPAND_TARGETS)
    e.add_argument("--order", type=int, help="truncation J in half-steps (default 4)")
    e.add_argument("--dim", type=int)
    e.add_argument("--degree", type=int)
    e.add_argument("--twisted", action="store_true")
    e.add_argument("--which", choices=("theta1", "theta2"), default="theta1")
    e.add_argument("--kind", choices=("L", "A", "twist-L", "twist-A"), default="A")
    e.add_argument("--format", choices=("text", "json"), default="text")

    m = sub.add_parser("manifold", help="characteristic numbers of a catalog product")
    m.add_argument("expr", help='e.g. "K3×Bott8", "HP2^2", "K3 x HP2"')
    m.add_argument("--max-dim", type=int)
    m.add_argument("--format", choices=("text", "json"), default="text")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            if args.jobs < 1:
                raise ConfigError("--jobs must be >= 1")
            cfg = RunConfig("verify", tuple(args.dim), args.max_dim, args.order, args.degree,
                            args.format, args.jobs, tuple(args.seed) or (0,), args.theorem,
                            args.corollary, args.all, args.out)
            return run_verify(cfg)
        if args.command == "expand":
            return run_expand(args)
        return run_manifold(args)
    except (ConfigError, mf.ManifoldError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SeriesError as exc:
        print(f"verification error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
