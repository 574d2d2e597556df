"""Batch front door: parse a system description, run analyses, write files.

Every run writes a structured ``report.json``, a delimited ``summary.tsv``
and figures next to them.  All outputs are deterministic: two runs of the
same configuration are byte-identical.  Exit codes: 0 for a successful
run, 2 when ``--assert-positive`` was given and a certified-negative
finding is present, 1 for configuration or execution errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace
from typing import Optional

from . import analysis, corpus, orbit, render, sensitivity, setmap, space
from .space import Q, as_q

COMMANDS = ("analyze", "orbit", "transition", "density", "sensitivity",
            "report")


class ParseError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ValidationError(ValueError):
    def __init__(self, fieldname: str, message: str):
        super().__init__(f"{fieldname}: {message}")
        self.field = fieldname


@dataclass(frozen=True)
class RunConfig:
    source: tuple  # ("builtin", name, params) | ("file", path)
    command: str
    eps: Q = Q(1, 8)
    depth: int = 4
    horizon: int = 40
    sens_eps: Q = Q(1, 4)
    point: Q = Q(0)
    out: str = "orbitkit-out"
    assert_positive: bool = False


# -- map source resolution ---------------------------------------------------


def parse_map_source(text: str) -> tuple:
    """A builtin name with optional parameters, or a piece-list path."""
    text = text.strip()
    if "(" in text and text.endswith(")"):
        name, raw = text[:-1].split("(", 1)
        params = {}
        if raw.strip():
            for item in raw.split(","):
                if "=" not in item:
                    raise ValidationError("map", f"bad parameter {item!r}")
                k, v = item.split("=", 1)
                params[k.strip()] = v.strip()
        return ("builtin", name.strip(), params)
    if text in corpus.CATALOG:
        return ("builtin", text, {})
    if os.path.exists(text):
        return ("file", text)
    raise ValidationError(
        "map", f"{text!r} is neither a builtin nor an existing file")


def load_map_file(path: str) -> setmap.SetValuedMap:
    """Parse the line-oriented piece grammar into a map."""
    pieces = []
    name = os.path.splitext(os.path.basename(path))[0]
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                head, *rest = line.split()
                if head == "name":
                    name = " ".join(rest)
                    continue
                body = " ".join(rest)
                if head == "segment":
                    left, right = body.split("->")
                    lo, hi, flags = left.split()
                    y0, y1 = right.split()
                    pieces.append(setmap.segment(lo, hi, y0, y1, flags))
                elif head == "rect":
                    left, right = body.split("->")
                    lo, hi, flags = left.split()
                    pieces.append(setmap.rectangle(
                        lo, hi, space.parse_set(right.strip()), flags))
                elif head == "point":
                    left, right = body.split("->")
                    pieces.append(setmap.point_rule(
                        left.strip(), space.parse_set(right.strip())))
                elif head == "band":
                    left, right = body.split("->")
                    lo, hi, flags = left.split()
                    lower, upper = right.split(";")
                    l0, l1 = lower.split()
                    u0, u1 = upper.split()
                    pieces.append(setmap.band(
                        lo, hi, (l0, l1), (u0, u1), flags))
                else:
                    raise ValueError(f"unknown piece kind {head!r}")
            except ParseError:
                raise
            except Exception as exc:
                raise ParseError(line_no, str(exc)) from exc
    if not pieces:
        raise ParseError(0, "map file declares no pieces")
    return setmap.make_map(pieces, name=name)


def resolve_map(source: tuple):
    if source[0] == "builtin":
        _, name, params = source
        return corpus.builtin(name, **params).obj
    return load_map_file(source[1])


# -- config text --------------------------------------------------------


_PARAM_FIELDS = {
    "eps": ("eps", "rational"),
    "depth": ("depth", "int"),
    "horizon": ("horizon", "int"),
    "sens-eps": ("sens_eps", "rational"),
    "point": ("point", "rational"),
    "out": ("out", "str"),
    "assert-positive": ("assert_positive", "bool"),
}


def _validated(fieldname: str, kind: str, value: str):
    if kind == "int":
        try:
            n = int(value)
        except ValueError as exc:
            raise ValidationError(fieldname, f"{value!r} is not an integer") from exc
        if n <= 0:
            raise ValidationError(fieldname, "must be positive")
        return n
    if kind == "rational":
        try:
            q = as_q(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(fieldname, f"{value!r} is not rational") from exc
        if fieldname in ("eps", "sens-eps") and q <= 0:
            raise ValidationError(fieldname, "must be positive")
        if fieldname == "point" and not 0 <= q <= 1:
            raise ValidationError(fieldname, "must lie in [0, 1]")
        return q
    if kind == "bool":
        if value.lower() in ("true", "1", "yes"):
            return True
        if value.lower() in ("false", "0", "no"):
            return False
        raise ValidationError(fieldname, f"{value!r} is not a boolean")
    return value


def parse_config(text: str) -> RunConfig:
    """Line-oriented run configuration; ' / ' also separates statements."""
    source: Optional[tuple] = None
    command: Optional[str] = None
    overrides: dict = {}
    line_no = 0
    statements: list[tuple[int, str]] = []
    for raw_line in text.splitlines():
        line_no += 1
        for stmt in raw_line.split(" / "):
            stmt = stmt.strip()
            if stmt and not stmt.startswith("#"):
                statements.append((line_no, stmt))
    for line_no, stmt in statements:
        parts = stmt.split()
        head = parts[0]
        if head == "map":
            if len(parts) < 2:
                raise ParseError(line_no, "map needs a source")
            if parts[1] == "builtin":
                if len(parts) < 3:
                    raise ParseError(line_no, "map builtin needs a name")
                params = {}
                for item in parts[3:]:
                    if "=" not in item:
                        raise ParseError(line_no, f"bad parameter {item!r}")
                    k, v = item.split("=", 1)
                    params[k] = v
                source = ("builtin", parts[2], params)
            elif parts[1] == "file":
                if len(parts) != 3:
                    raise ParseError(line_no, "map file needs a path")
                source = ("file", parts[2])
            else:
                raise ParseError(line_no, f"unknown map source {parts[1]!r}")
        elif head == "cmd":
            if len(parts) != 2:
                raise ParseError(line_no, "cmd needs exactly one command")
            if parts[1] not in COMMANDS:
                raise ValidationError("cmd", f"unknown command {parts[1]!r}")
            command = parts[1]
        elif head == "param":
            if len(parts) < 3:
                raise ParseError(line_no, "param needs a key and a value")
            key = parts[1]
            if key not in _PARAM_FIELDS:
                raise ValidationError(key, "unknown parameter")
            fieldname, kind = _PARAM_FIELDS[key]
            overrides[fieldname] = _validated(key, kind, " ".join(parts[2:]))
        else:
            raise ParseError(line_no, f"unknown statement {head!r}")
    if source is None:
        raise ValidationError("map", "configuration declares no map")
    if command is None:
        raise ValidationError("cmd", "configuration declares no command")
    return RunConfig(source=source, command=command, **overrides)


# -- report assembly -----------------------------------------------------


def qjson(q: Q) -> dict:
    """Dual numeric form: the exact rational plus a float rendering."""
    return {"exact": str(q), "approx": float(q)}


def _verdict_json(v: analysis.Verdict) -> dict:
    return {"status": v.status, "witness": v.witness, "budget": v.budget}


def _semicontinuity_json(verdict) -> dict:
    out = {"holds": verdict.holds}
    if verdict.witness is not None:
        x, lim = verdict.witness
        out["witness"] = {"x": qjson(x), "limit_set": space.format_set(lim)}
    return out


def _probe_json(outcome) -> dict:
    witnesses = []
    for w in outcome.witnesses:
        if isinstance(w, sensitivity.SensitivityWitness):
            witnesses.append(json.loads(w.to_json()))
        else:
            witnesses.append(w)
    certificates = (list(getattr(outcome, "impossibilities", ()))
                    + list(getattr(outcome, "refutations", ())))
    return {
        "status": outcome.status,
        "witnesses": witnesses,
        "certificates": certificates,
        "gaps": list(outcome.gaps),
        "budget": outcome.budget,
    }


def _section_analyze(f, cfg: RunConfig) -> dict:
    usc = setmap.usc_check(f)
    lsc = setmap.lsc_check(f)
    connected, witness = setmap.values_connected_check(f)
    const = setmap.constant_value(f)
    trans = analysis.transitivity_probe(f, cfg.eps, cfg.horizon)
    return {
        "usc": _semicontinuity_json(usc),
        "lsc": _semicontinuity_json(lsc),
        "values_connected": {
            "holds": connected,
            "witness": qjson(witness) if witness is not None else None,
        },
        "constant_value": space.format_set(const) if const is not None else None,
        "transitive": _verdict_json(trans),
    }


def _section_orbit(f, cfg: RunConfig, outdir: str, files: list[str]) -> dict:
    section: dict = {"start": qjson(cfg.point), "depth": cfg.depth}
    try:
        tree = orbit.orbit_tree(f, cfg.point, cfg.depth)
        section["kind"] = "tree"
        section["branch_count"] = sum(1 for _ in tree.branches())
        section["projections"] = [
            {"k": k, "value": space.format_set(orbit.project_k(tree, k))}
            for k in range(1, cfg.depth + 1)
        ]
        _write(outdir, "orbit_tree.svg", render.render(tree), files)
        _write(outdir, "orbit_tree.json", orbit.to_json(tree), files)
    except orbit.NotFiniteValued:
        cover = orbit.orbit_cover(f, cfg.point, cfg.depth, cfg.eps)
        section["kind"] = "cover"
        section["eps"] = qjson(cfg.eps)
        section["path_count"] = len(cover.paths)
        section["projections"] = [
            {"k": k, "cells": list(orbit.project_k(cover, k))}
            for k in range(1, cfg.depth + 1)
        ]
        _write(outdir, "orbit_cover.svg", render.render(cover), files)
        _write(outdir, "orbit_cover.json", orbit.to_json(cover), files)
    return section


def _section_transition(f, cfg: RunConfig, outdir: str, files: list[str]) -> dict:
    graph = analysis.transition_graph(f, cfg.eps)
    _write(outdir, "transition.dot", analysis.to_dot(graph), files)
    _write(outdir, "transition.svg", render.render(graph), files)
    return {
        "eps": qjson(cfg.eps),
        "cells": graph.cells,
        "edges": [{"from": c, "to": list(graph.succ[c])}
                  for c in range(graph.cells)],
    }


def _section_density(f, cfg: RunConfig) -> dict:
    res = analysis.weak_dense_probe(f, cfg.point, cfg.eps, cfg.horizon)
    section = {
        "point": qjson(cfg.point),
        "weak_dense": _verdict_json(res.verdict),
        "first_hit": list(res.report.first_hit),
    }
    try:
        prefix = analysis.dense_orbit_build(f, cfg.point, cfg.eps, cfg.horizon)
        section["dense_prefix"] = [str(x) for x in prefix]
    except analysis.NotWeakDense as exc:
        section["dense_prefix"] = None
        section["dense_prefix_blocked_cell"] = exc.cell
    return section


def _section_sensitivity(f, cfg: RunConfig) -> dict:
    budget = sensitivity.ProbeBudget(horizon=min(64, max(16, cfg.horizon)))
    out = {}
    for kind in sensitivity.KINDS:
        out[kind] = _probe_json(sensitivity.sensitivity_probe(
            kind, f, cfg.sens_eps, budget))
    out["recurrent_separation"] = _probe_json(
        sensitivity.recurrent_separation_probe(
            f, cfg.sens_eps, cfg.sens_eps / 4, (1, budget.horizon), budget))
    return out


def _write(outdir: str, name: str, text: str, files: list[str]) -> None:
    path = os.path.join(outdir, name)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    files.append(name)


def _run_finite(fs, cfg: RunConfig) -> tuple[dict, int]:
    if cfg.command not in ("analyze", "report"):
        raise ValidationError(
            "cmd", f"{cfg.command!r} is not available for finite systems")
    rep = analysis.finite_oracle(fs)
    mini = analysis.minimality_check(fs)
    outdir = cfg.out
    os.makedirs(outdir, exist_ok=True)
    files: list[str] = []
    sections = {
        "oracle": {
            "states": list(fs.states),
            "transitive": rep.transitive,
            "dense_orbit": dict(rep.dense_orbit),
            "weak_dense_orbit": dict(rep.weak_dense_orbit),
            "dense_minimal": rep.dense_minimal,
            "weak_dense_minimal": rep.weak_dense_minimal,
            "weakly_sensitive": rep.weakly_sensitive,
        },
        "minimality": {
            "dense_minimal": _verdict_json(mini.dense_minimal),
            "weak_dense_minimal": _verdict_json(mini.weak_dense_minimal),
        },
    }
    report = {
        "tool": "orbitkit",
        "version": "0.1.0",
        "config": {"map": _source_json(cfg.source), "command": cfg.command},
        "map_name": "finite system",
        "results": sections,
    }
    negatives = _collect_negatives(sections)
    if not rep.transitive:
        negatives.append({"where": "oracle.transitive", "status": "certified_no"})
    report["certified_negatives"] = negatives
    _write(outdir, "report.json",
           json.dumps(report, indent=2, sort_keys=True) + "\n", files)
    rows = [("section", "key", "value"),
            ("oracle", "transitive", str(rep.transitive)),
            ("oracle", "dense_minimal", str(rep.dense_minimal)),
            ("oracle", "weak_dense_minimal", str(rep.weak_dense_minimal))]
    _write(outdir, "summary.tsv",
           "\n".join("\t".join(r) for r in rows) + "\n", files)
    report["files"] = sorted(files)
    return report, 2 if cfg.assert_positive and negatives else 0


def run(cfg: RunConfig) -> tuple[dict, int]:
    """Execute the configured command; returns (report, exit code)."""
    f = resolve_map(cfg.source)
    if isinstance(f, setmap.FiniteSystem):
        return _run_finite(f, cfg)
    outdir = cfg.out
    os.makedirs(outdir, exist_ok=True)
    files: list[str] = []
    sections: dict = {}

    wanted = ([cfg.command] if cfg.command != "report"
              else ["analyze", "orbit", "transition", "density", "sensitivity"])
    if "analyze" in wanted:
        sections["analyze"] = _section_analyze(f, cfg)
    if "orbit" in wanted:
        sections["orbit"] = _section_orbit(f, cfg, outdir, files)
    if "transition" in wanted:
        sections["transition"] = _section_transition(f, cfg, outdir, files)
    if "density" in wanted:
        sections["density"] = _section_density(f, cfg)
    if "sensitivity" in wanted:
        sections["sensitivity"] = _section_sensitivity(f, cfg)

    _write(outdir, "map.svg", render.render(f), files)
    from . import figures

    fig_path = os.path.join(outdir, "figure_map.svg")
    figures.save_map_figure(f, fig_path)
    files.append("figure_map.svg")

    report = {
        "tool": "orbitkit",
        "version": "0.1.0",
        "config": {
            "map": _source_json(cfg.source),
            "command": cfg.command,
            "eps": qjson(cfg.eps),
            "depth": cfg.depth,
            "horizon": cfg.horizon,
            "sens_eps": qjson(cfg.sens_eps),
            "point": qjson(cfg.point),
        },
        "map_name": f.name,
        "results": sections,
    }
    negatives = _collect_negatives(sections)
    report["certified_negatives"] = negatives
    _write(outdir, "report.json",
           json.dumps(report, indent=2, sort_keys=True) + "\n", files)
    _write(outdir, "summary.tsv", _summary_tsv(report), files)
    report["files"] = sorted(files)
    exit_code = 2 if cfg.assert_positive and negatives else 0
    return report, exit_code


def _source_json(source: tuple) -> dict:
    if source[0] == "builtin":
        return {"kind": "builtin", "name": source[1],
                "params": {k: str(v) for k, v in sorted(source[2].items())}}
    return {"kind": "file", "path": source[1]}


def _collect_negatives(sections: dict) -> list[dict]:
    found = []

    def walk(path: str, node):
        if isinstance(node, dict):
            if node.get("status") == "certified_no":
                found.append({"where": path, "status": "certified_no"})
            for k in sorted(node):
                walk(f"{path}.{k}" if path else k, node[k])
        elif isinstance(node, list):
            for i, item in enumerate(node):
                walk(f"{path}[{i}]", item)

    walk("", sections)
    return found


def _summary_tsv(report: dict) -> str:
    rows = [("section", "key", "value")]
    results = report["results"]
    if "analyze" in results:
        a = results["analyze"]
        rows.append(("analyze", "usc", str(a["usc"]["holds"])))
        rows.append(("analyze", "lsc", str(a["lsc"]["holds"])))
        rows.append(("analyze", "values_connected",
                     str(a["values_connected"]["holds"])))
        rows.append(("analyze", "transitive", a["transitive"]["status"]))
    if "orbit" in results:
        o = results["orbit"]
        rows.append(("orbit", "kind", o["kind"]))
        count_key = "branch_count" if o["kind"] == "tree" else "path_count"
        rows.append(("orbit", count_key, str(o[count_key])))
    if "transition" in results:
        t = results["transition"]
        rows.append(("transition", "cells", str(t["cells"])))
        rows.append(("transition", "edge_count",
                     str(sum(len(e["to"]) for e in t["edges"]))))
    if "density" in results:
        d = results["density"]
        rows.append(("density", "weak_dense", d["weak_dense"]["status"]))
        rows.append(("density", "dense_prefix_found",
                     str(d["dense_prefix"] is not None)))
    if "sensitivity" in results:
        s = results["sensitivity"]
        for kind in ("strong", "sensitive", "weak", "recurrent_separation"):
            rows.append(("sensitivity", kind, s[kind]["status"]))
    rows.append(("run", "certified_negatives",
                 str(len(report["certified_negatives"]))))
    return "\n".join("\t".join(row) for row in rows) + "\n"


# -- argparse front end ----------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orbitkit",
        description="exact analysis of multivalued interval dynamics")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--map", required=True,
                       help="builtin name, name(k=v,...), or piece-list file")
        p.add_argument("--eps", default="1/8", help="grid resolution 1/m")
        p.add_argument("--depth", type=int, default=4)
        p.add_argument("--horizon", type=int, default=40)
        p.add_argument("--sens-eps", default="1/4", dest="sens_eps")
        p.add_argument("--point", default="0")
        p.add_argument("--out", default="orbitkit-out")
        p.add_argument("--assert-positive", action="store_true",
                       dest="assert_positive",
                       help="exit 2 when a certified-negative finding appears")

    for name in COMMANDS:
        add_common(sub.add_parser(name))
    sub.add_parser("list-builtins")
    runp = sub.add_parser("run", help="execute a line-oriented config file")
    runp.add_argument("--config", required=True)
    runp.add_argument("--out", default=None,
                      help="override the configured output directory")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        source=parse_map_source(args.map),
        command=args.command,
        eps=_validated("eps", "rational", args.eps),
        depth=_validated("depth", "int", str(args.depth)),
        horizon=_validated("horizon", "int", str(args.horizon)),
        sens_eps=_validated("sens-eps", "rational", args.sens_eps),
        point=_validated("point", "rational", args.point),
        out=args.out,
        assert_positive=args.assert_positive,
    )


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "list-builtins":
            print(json.dumps(corpus.list_builtins(), indent=2, sort_keys=True))
            return 0
        if args.command == "run":
            with open(args.config, "r", encoding="utf-8") as handle:
                cfg = parse_config(handle.read())
            if args.out is not None:
                cfg = replace(cfg, out=args.out)
        else:
            cfg = _config_from_args(args)
        space.grid_size(cfg.eps)  # validate the grid form early
        report, code = run(cfg)
        print(json.dumps({
            "out": cfg.out,
            "files": report["files"],
            "certified_negatives": len(report["certified_negatives"]),
        }, indent=2, sort_keys=True))
        return code
    except (ParseError, ValidationError, space.SpaceError, setmap.MapError,
            corpus.UnknownName, corpus.BadParams, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
