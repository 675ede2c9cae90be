"""Command line front end.

Six subcommands over the two input formats (.aut automorphism files,
.gm graph map files):

    analyze   stratify, grade growth, assign the metric, check the map
    probe     sweep short conjugacy classes for periodic orbits
    certify   search for a uniform growth certificate
    growth    exact conjugacy length series of one class
    nielsen   inventory periodic Nielsen paths
    validate  run one of the named inequality validators

Exit codes: 0 completed, 1 a validator found a violation, 2 input error.
Reports are deterministic byte-for-byte for a fixed config; floats are
printed at 12 significant digits.
"""

from __future__ import annotations

import argparse
import random
import sys
from dataclasses import dataclass

from . import growth as growth_mod
from .formats import (
    ParseError,
    canonical_json,
    format_float,
    load_automorphism,
    load_graph_map,
    render_csv,
)
from .graphs import (
    Circuit,
    GraphMap,
    induced_automorphism,
    random_circuit,
    random_tight_path,
    rose_of,
)
from .hyperbolicity import atoroidality_probe, certificate_search, growth_table
from .nielsen import find_nielsen_paths
from .strata import assign_metric, compute_filtration, verify_improved, verify_rtt
from .words import Automorphism, Word, generator_name, nielsen_inverse_search, spell

LEMMAS = ("bcc", "bw1", "bw2", "illen", "backgrowth", "tricho", "decomp")

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2


class CliError(Exception):
    """Input or configuration problem; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    """Validated bounds shared across subcommands."""

    fmt: str
    seed: int
    jobs: int
    tol: float

    def __post_init__(self):
        if self.fmt not in ("json", "csv", "text"):
            raise CliError(f"unknown format {self.fmt!r}")
        if self.jobs < 1:
            raise CliError("--jobs must be positive")
        if not 0.0 < self.tol <= 1e-3:
            raise CliError("--tol must lie in (0, 1e-3]")


def _positive(args, names):
    for n in names:
        v = getattr(args, n, None)
        if v is not None and v <= 0:
            raise CliError(f"--{n.replace('_', '-')} must be positive")


def _load_input(path: str):
    """Returns ('aut', Automorphism) or ('gm', GraphMap) by extension."""
    if path.endswith(".aut"):
        return "aut", load_automorphism(path)
    if path.endswith(".gm"):
        return "gm", load_graph_map(path)
    raise CliError(f"cannot tell the format of {path!r} (expected .aut or .gm)")


def _as_graph_map(kind, obj) -> GraphMap:
    return rose_of(obj) if kind == "aut" else obj


def _as_automorphism(kind, obj) -> Automorphism:
    if kind == "aut":
        return obj
    return induced_automorphism(obj)


def _with_inverse(phi: Automorphism) -> Automorphism:
    if phi.inverse_images is not None:
        return phi
    found = nielsen_inverse_search(phi, depth=4)
    if found is None:
        raise CliError(
            "no inverse known for this map and a short search found none; "
            "add inv lines to the input file"
        )
    return found


def _parse_class_word(text: str, rank: int) -> Word:
    index = {generator_name(i, rank): i for i in range(1, rank + 1)}
    letters = []
    for tok in text.split():
        name, sign = tok, 1
        if tok.endswith("^-1"):
            name, sign = tok[: -len("^-1")], -1
        if name not in index:
            raise CliError(f"unknown generator {name!r} (rank {rank})")
        letters.append(sign * index[name])
    if not letters:
        raise CliError("empty word")
    return Word(letters, rank)


# ---------------------------------------------------------------------------
# analyze


def cmd_analyze(cfg: RunConfig, args) -> tuple[int, str]:
    kind, obj = _load_input(args.file)
    f = _as_graph_map(kind, obj)
    g = f.graph
    filt = compute_filtration(f)
    metric = assign_metric(filt)
    rtt = verify_rtt(f, filt)
    improved = verify_improved(f, filt)

    strata_rows = []
    for s in filt.strata:
        strata_rows.append({
            "index": s.index,
            "edges": [g.edge_names[e - 1] for e in s.edges],
            "kind": s.kind,
            "lambda": s.pf_value,
            "vector": list(s.pf_vector) if s.pf_vector is not None else None,
        })
    report = {
        "input": f.label,
        "kind": "automorphism" if kind == "aut" else "graph-map",
        "vertices": len(g.vertices),
        "edges": g.edge_count,
        "rank": g.marking_rank,
        "strata": strata_rows,
        "metric": {g.edge_names[e - 1]: metric.lengths[e] for e in sorted(metric.lengths)},
        "rtt": {"passed": rtt.passed, "violations": rtt.violations},
        "improved": {"passed": improved.passed, "violations": improved.violations},
    }
    # the stronger conditions fail on honest train track maps whenever a
    # Nielsen path has period > 1, so they gate the exit code only on demand
    failed = not rtt.passed or (args.strict and not improved.passed)
    code = EXIT_VIOLATION if failed else EXIT_OK

    if cfg.fmt == "json":
        return code, canonical_json(report)
    if cfg.fmt == "csv":
        rows = [
            [r["index"], " ".join(r["edges"]), r["kind"],
             "" if r["lambda"] is None else r["lambda"]]
            for r in strata_rows
        ]
        return code, render_csv(["index", "edges", "kind", "lambda"], rows)
    lines = [
        f"input: {report['input']}",
        f"kind: {report['kind']}",
        f"rank: {report['rank']}",
    ]
    for r in strata_rows:
        lam = "" if r["lambda"] is None else f" lambda={format_float(r['lambda'])}"
        lines.append(
            f"stratum {r['index']}: {r['kind']} edges={' '.join(r['edges'])}{lam}"
        )
    lines.append(
        "metric: " + " ".join(
            f"{n}={format_float(v)}" for n, v in report["metric"].items()
        )
    )
    for label, rep in (("rtt", rtt), ("improved", improved)):
        lines.append(f"{label}: {'pass' if rep.passed else 'FAIL'}")
        for v in rep.violations:
            lines.append("  violation: " + " ".join(f"{k}={v[k]}" for k in sorted(v)))
    return code, "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# probe / certify / growth


def cmd_probe(cfg: RunConfig, args) -> tuple[int, str]:
    _positive(args, ["max_class_len", "max_period"])
    kind, obj = _load_input(args.file)
    phi = _with_inverse(_as_automorphism(kind, obj))
    rep = atoroidality_probe(
        phi, args.max_class_len, args.max_period, partitions=cfg.jobs
    )
    wit_rows = [
        {
            "class": spell(w.cls.letters, phi.rank),
            "norm": w.cls.norm,
            "period": w.period,
            "inverted": w.inverted,
            "inversion_step": w.inversion_step,
        }
        for w in rep.witnesses
    ]
    report = {
        "input": phi.label,
        "verdict": rep.verdict,
        "max_class_len": rep.exhausted[0],
        "max_period": rep.exhausted[1],
        "classes_enumerated": rep.classes_enumerated,
        "witnesses": wit_rows,
    }
    if cfg.fmt == "json":
        return EXIT_OK, canonical_json(report)
    if cfg.fmt == "csv":
        rows = [
            [w["class"], w["norm"], w["period"], w["inverted"], w["inversion_step"]]
            for w in wit_rows
        ]
        return EXIT_OK, render_csv(
            ["class", "norm", "period", "inverted", "inversion_step"], rows
        )
    lines = [
        f"input: {phi.label}",
        f"verdict: {rep.verdict}",
        f"classes: {rep.classes_enumerated} (norm <= {rep.exhausted[0]}, "
        f"period <= {rep.exhausted[1]})",
    ]
    for w in wit_rows:
        lines.append(
            f"witness: {w['class']} norm={w['norm']} period={w['period']} "
            f"inverted={'true' if w['inverted'] else 'false'} step={w['inversion_step']}"
        )
    return EXIT_OK, "\n".join(lines) + "\n"


def cmd_certify(cfg: RunConfig, args) -> tuple[int, str]:
    _positive(args, ["m_max", "max_class_len"])
    kind, obj = _load_input(args.file)
    phi = _with_inverse(_as_automorphism(kind, obj))
    cert = certificate_search(
        phi, args.m_max, args.max_class_len, partitions=cfg.jobs
    )
    history = [
        {"M": m, "num": num, "den": den, "ratio": num / den, "argmin": cls}
        for m, num, den, cls in cert.history
    ]
    report = {
        "input": phi.label,
        "verdict": cert.verdict,
        "m_max": args.m_max,
        "max_class_len": cert.L,
        "M": cert.M,
        "lambda": cert.lam,
        "lambda_exact": list(cert.lam_exact) if cert.lam_exact else None,
        "history": history,
        "table_size": len(cert.table),
    }
    if cfg.fmt == "json":
        return EXIT_OK, canonical_json(report)
    if cfg.fmt == "csv":
        rows = [[t.cls, t.norm, t.fwd, t.bwd, t.ratio] for t in cert.table]
        return EXIT_OK, render_csv(["class", "norm", "fwd", "bwd", "ratio"], rows)
    lines = [f"input: {phi.label}", f"verdict: {cert.verdict}"]
    if cert.M is not None:
        lines.append(f"M: {cert.M}")
        lines.append(
            f"lambda: {format_float(cert.lam)} "
            f"({cert.lam_exact[0]}/{cert.lam_exact[1]})"
        )
    for h in history:
        lines.append(
            f"history: M={h['M']} ratio={format_float(h['ratio'])} argmin={h['argmin']}"
        )
    return EXIT_OK, "\n".join(lines) + "\n"


def cmd_growth(cfg: RunConfig, args) -> tuple[int, str]:
    kind, obj = _load_input(args.file)
    phi = _as_automorphism(kind, obj)
    if args.k_min < 0:
        phi = _with_inverse(phi)
    if args.k_max < args.k_min:
        raise CliError("--k-max must be >= --k-min")
    g = _parse_class_word(args.word, phi.rank)
    rows = growth_table(phi, g, range(args.k_min, args.k_max + 1))
    if cfg.fmt == "json":
        report = {
            "input": phi.label,
            "word": spell(g.letters, phi.rank),
            "rows": [{"k": k, "norm": n} for k, n in rows],
        }
        return EXIT_OK, canonical_json(report)
    if cfg.fmt == "csv":
        return EXIT_OK, render_csv(["k", "norm"], rows)
    lines = [f"input: {phi.label}", f"word: {spell(g.letters, phi.rank)}"]
    lines += [f"k={k} norm={n}" for k, n in rows]
    return EXIT_OK, "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# nielsen


def cmd_nielsen(cfg: RunConfig, args) -> tuple[int, str]:
    _positive(args, ["len_bound", "period_bound"])
    kind, obj = _load_input(args.file)
    f = _as_graph_map(kind, obj)
    recs = find_nielsen_paths(
        f, len_bound=args.len_bound, period_bound=args.period_bound
    )
    recs = sorted(recs, key=lambda r: (r.height, len(r.path), f.graph.spell_path(r.path)))
    rows = [
        {
            "path": f.graph.spell_path(r.path),
            "period": r.period,
            "indivisible": r.indivisible,
            "illegal": r.illegal_count,
            "height": r.height,
            "exact": r.exact,
            "start_fraction": r.start_fraction,
            "end_fraction": r.end_fraction,
            "method": r.method,
        }
        for r in recs
    ]
    if cfg.fmt == "json":
        report = {
            "input": f.label,
            "len_bound": args.len_bound,
            "period_bound": args.period_bound,
            "count": len(rows),
            "paths": rows,
        }
        return EXIT_OK, canonical_json(report)
    if cfg.fmt == "csv":
        header = ["path", "period", "indivisible", "illegal", "height", "exact"]
        return EXIT_OK, render_csv(header, [[r[h] for h in header] for r in rows])
    lines = [f"input: {f.label}", f"count: {len(rows)}"]
    for r in rows:
        lines.append(
            f"path: {r['path']} period={r['period']} "
            f"indivisible={'true' if r['indivisible'] else 'false'} "
            f"illegal={r['illegal']} height={r['height']} "
            f"exact={'true' if r['exact'] else 'false'}"
        )
    return EXIT_OK, "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# validate


def _validator_csv(rows) -> str:
    header = ["circuit", "k", "L", "Lr", "i", "ir", "scriptL", "bound", "margin", "pass"]

    def cell(row, key):
        v = row.get(key)
        return "" if v is None else v

    return render_csv(header, [[cell(r, h) for h in header] for r in rows])


def _sample_circuits(f: GraphMap, count: int, len_bound: int, seed: int):
    rng = random.Random(seed)
    return [random_circuit(f.graph, len_bound, rng) for _ in range(count)]


def _top_exponential(filt):
    exp = [s for s in filt.strata if s.is_exponential]
    if not exp:
        raise CliError("the map has no exponential stratum")
    return exp[-1].index


def _inverse_pair(kind, obj):
    """(f, f_inv) as graph maps; only automorphism inputs carry an inverse."""
    if kind != "aut":
        raise CliError(
            "this validator iterates backwards and needs an automorphism "
            "input with inv lines"
        )
    phi = _with_inverse(obj)
    return rose_of(phi), rose_of(phi.inverse())


def cmd_validate(cfg: RunConfig, args) -> tuple[int, str]:
    _positive(
        args, ["pairs", "k_max", "len_bound", "samples", "m_max"]
    )
    if args.l0 <= 0:
        raise CliError("--l0 must be positive")
    kind, obj = _load_input(args.file)
    f = _as_graph_map(kind, obj)
    filt = compute_filtration(f)
    metric = assign_metric(filt)
    lemma = args.lemma

    constants: dict = {}
    rows: list[dict] = []
    code = EXIT_OK

    if lemma == "bcc":
        data = growth_mod.bcc_estimate(
            f, pair_len_bound=args.pairs, filtration=filt, metric=metric
        )
        constants = {
            "C_f": data.C_f,
            "window": data.window,
            "stable": data.stable,
        }
        for idx in sorted(data.critical):
            constants[f"critical_length_{idx}"] = data.critical[idx]
        if not data.stable:
            code = EXIT_VIOLATION
    elif lemma in ("bw1", "bw2"):
        fwd, bwd = _inverse_pair(kind, obj)
        filt = compute_filtration(fwd)
        metric = assign_metric(filt)
        circuits = _sample_circuits(fwd, args.samples, args.len_bound, cfg.seed)
        if lemma == "bw1":
            rep = growth_mod.validate_bw1(
                fwd, bwd, circuits, k_max=args.k_max,
                filtration=filt, metric=metric,
            )
        else:
            r = _top_exponential(filt)
            rep = growth_mod.validate_bw2(
                fwd, bwd, circuits, r=r, k_max=args.k_max,
                filtration=filt, metric=metric,
            )
        constants, rows = rep.constants, rep.rows
        if not rep.all_pass:
            code = EXIT_VIOLATION
    elif lemma == "illen":
        circuits = _sample_circuits(f, args.samples, args.len_bound, cfg.seed)
        relative = len(filt.strata) > 1
        if relative:
            r = _top_exponential(filt)
            c = growth_mod.validate_illen2(
                circuits, float(args.l0), r, filt, metric, circuit=True
            )
            constants = {"C": c, "L": float(args.l0), "stratum": r}
        else:
            c = growth_mod.validate_illen(
                circuits, float(args.l0), filt, metric, circuit=True
            )
            constants = {"C": c, "L": float(args.l0)}
    elif lemma == "backgrowth":
        fwd, bwd = _inverse_pair(kind, obj)
        filt = compute_filtration(fwd)
        metric = assign_metric(filt)
        circuits = _sample_circuits(fwd, args.samples, args.len_bound, cfg.seed)
        if len(filt.strata) > 1:
            rep = growth_mod.validate_bgrowth2(
                fwd, bwd, circuits, float(args.l0), r=_top_exponential(filt),
                n_max=args.k_max, m_search_max=args.m_max,
                filtration=filt, metric=metric,
            )
        else:
            rep = growth_mod.validate_backgrowth(
                fwd, bwd, circuits, float(args.l0),
                n_max=args.k_max, m_search_max=args.m_max,
                filtration=filt, metric=metric,
            )
        constants, rows = rep.constants, rep.rows
        vacuous = constants.get("qualifying", 0) == 0
        if not vacuous and (not rep.all_pass or not constants.get("found", True)):
            code = EXIT_VIOLATION
    elif lemma == "tricho":
        rng = random.Random(cfg.seed)
        unresolved = 0
        for _ in range(args.samples):
            p = random_tight_path(f.graph, args.len_bound, rng)
            verdict = growth_mod.trichotomy_classify(
                f, p, M=args.m_max, L=float(args.l0),
                filtration=filt, metric=metric,
            )
            rows.append({
                "path": f.graph.spell_path(p),
                "case": verdict.case,
                "pass": verdict.case != "unresolved",
            })
            if verdict.case == "unresolved":
                unresolved += 1
        constants = {"unresolved": unresolved, "M": args.m_max, "L": float(args.l0)}
        if unresolved:
            code = EXIT_VIOLATION
    elif lemma == "decomp":
        rng = random.Random(cfg.seed)
        for _ in range(args.samples):
            c = random_circuit(f.graph, args.len_bound, rng)
            try:
                rep = growth_mod.growth_decomposition(
                    c, float(args.l0), filt, metric
                )
            except AssertionError as exc:
                rows.append({
                    "circuit": f.graph.spell_path(c),
                    "case": "bound-violated",
                    "pass": False,
                })
                constants["violation"] = str(exc)
                code = EXIT_VIOLATION
                continue
            rows.append({
                "circuit": f.graph.spell_path(c),
                "case": rep.case,
                "fraction": rep.fraction,
                "pieces": len(rep.pieces),
                "pass": True,
            })
        constants.setdefault("L0", float(args.l0))
    else:
        raise CliError(f"unknown lemma {lemma!r}")

    report = {
        "input": f.label,
        "lemma": lemma,
        "seed": cfg.seed,
        "constants": constants,
        "rows": rows,
        "all_pass": code == EXIT_OK,
    }
    if cfg.fmt == "json":
        return code, canonical_json(report)
    if cfg.fmt == "csv":
        if lemma in ("bw1", "bw2", "backgrowth"):
            return code, _validator_csv(rows)
        if lemma == "tricho":
            return code, render_csv(
                ["path", "case", "pass"],
                [[r["path"], r["case"], r["pass"]] for r in rows],
            )
        if lemma == "decomp":
            return code, render_csv(
                ["circuit", "case", "fraction", "pieces", "pass"],
                [[r["circuit"], r["case"], r.get("fraction", ""),
                  r.get("pieces", ""), r["pass"]] for r in rows],
            )
        # bcc and illen reduce to named constants
        return code, render_csv(
            ["quantity", "value"],
            [[k, constants[k]] for k in constants],
        )
    lines = [f"input: {f.label}", f"lemma: {lemma}"]
    for k in constants:
        v = constants[k]
        lines.append(
            f"{k}: " + (format_float(v) if isinstance(v, float) else
                        ("true" if v is True else "false" if v is False else str(v)))
        )
    failures = [r for r in rows if not r.get("pass", True)]
    lines.append(f"rows: {len(rows)} failures: {len(failures)}")
    for r in failures[:10]:
        lines.append("  fail: " + " ".join(f"{k}={r[k]}" for k in r))
    lines.append("pass" if code == EXIT_OK else "FAIL")
    return code, "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="traintrack",
        description="Train track maps, stratified growth, and hyperbolicity probes.",
    )
    sub = top.add_subparsers(dest="subcommand", required=True)

    def common(p, default_fmt):
        p.add_argument("file", help="input file (.aut or .gm)")
        p.add_argument("--format", default=default_fmt,
                       choices=["json", "csv", "text"])
        p.add_argument("--jobs", type=int, default=1,
                       help="partition count for class enumeration")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=1e-9)

    p = sub.add_parser("analyze", help="strata, growth rates, metric, map checks")
    common(p, "json")
    p.add_argument("--strict", action="store_true",
                   help="fail on the improved-map conditions as well")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("probe", help="bounded periodic conjugacy class sweep")
    common(p, "json")
    p.add_argument("-L", "--max-class-len", type=int, default=4)
    p.add_argument("-P", "--max-period", type=int, default=2)
    p.set_defaults(handler=cmd_probe)

    p = sub.add_parser("certify", help="uniform growth certificate search")
    common(p, "json")
    p.add_argument("-M", "--m-max", type=int, default=20)
    p.add_argument("-L", "--max-class-len", type=int, default=8)
    p.set_defaults(handler=cmd_certify)

    p = sub.add_parser("growth", help="conjugacy length series of one class")
    common(p, "csv")
    p.add_argument("word", help="class word, e.g. 'a b^-1'")
    p.add_argument("--k-min", type=int, default=0)
    p.add_argument("--k-max", type=int, default=6)
    p.set_defaults(handler=cmd_growth)

    p = sub.add_parser("nielsen", help="periodic Nielsen path inventory")
    common(p, "json")
    p.add_argument("--len-bound", type=int, default=6)
    p.add_argument("--period-bound", type=int, default=4)
    p.set_defaults(handler=cmd_nielsen)

    p = sub.add_parser("validate", help="run one inequality validator")
    common(p, "csv")
    p.add_argument("lemma", choices=LEMMAS)
    p.add_argument("--pairs", type=int, default=8,
                   help="bcc: concatenation factor length bound")
    p.add_argument("--k-max", type=int, default=5,
                   help="iteration depth (bw1/bw2/backgrowth)")
    p.add_argument("--len-bound", type=int, default=12,
                   help="sampled circuit/path length bound")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--m-max", type=int, default=12,
                   help="exponent search cap (backgrowth) / iterate (tricho)")
    p.add_argument("--l0", type=float, default=12.0,
                   help="length threshold (illen/backgrowth/tricho/decomp)")
    p.set_defaults(handler=cmd_validate)

    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(fmt=args.format, seed=args.seed, jobs=args.jobs, tol=args.tol)
        code, out = args.handler(cfg, args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ParseError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
