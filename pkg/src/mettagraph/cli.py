"""Command-line driver: ``mettagraph <command> [options] [SOURCE]``.

SOURCE is literal text, ``-f FILE`` reads a file and no source reads stdin.
Exit codes: 0 success, 1 Distinguished verdict or type error, 2 budget
exhausted, 3 input/config error (bad flags, unreadable file, parse error).
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .atomspace import Atomspace, AtomspaceError, check_mconstraints, node_text
from .engine import BudgetExhausted, evaluate, json_trace, result_node
from .lts import (Bisimilar, Distinguished, bisim_check, lts_from_json, lts_to_dot,
                  prob_bisim_check)
from .sexpr import ParseError
from .types import TypeSyntaxError, type_to_text

SCHEMA = "mettagraph.report/1"
LANGS = ("atoms", "stlc", "untyped", "pdts", "pts")
MODES = ("eval", "full-eval", "sample", "bisim", "typecheck", "encode")

EXIT_OK, EXIT_FAIL, EXIT_BUDGET, EXIT_INPUT = 0, 1, 2, 3


class InputError(Exception):
    """Bad input or configuration; maps to exit code 3."""


@dataclass
class RunConfig:
    mode: str
    budget: int = 10_000
    seed: int = 0
    lang: str = "pdts"
    ctx: str | None = None
    pts_spec: str | None = None
    output: str = "text"
    runs: int = 1
    engine: bool = True
    emit_dot: str | None = None
    trace: str | None = None
    demo: str | None = None
    mutated: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise InputError(f"unknown mode {self.mode!r}")
        if self.budget < 1:
            raise InputError("--budget must be at least 1")
        if self.runs < 1:
            raise InputError("--runs must be at least 1")
        if self.lang not in LANGS:
            raise InputError(f"unknown language {self.lang!r}")


@dataclass
class Report:
    command: str
    exit_code: int = EXIT_OK
    status: str = "ok"
    body: dict = None
    text: str = ""

    def as_json(self) -> dict:
        out = {"schema": SCHEMA, "command": self.command, "status": self.status,
               "exit_code": self.exit_code}
        out.update(self.body or {})
        return out


# -- helpers ----------------------------------------------------------------

def _show(t) -> str:
    from .langs.terms import Term, show
    return show(t) if isinstance(t, Term) else type_to_text(t)


def _spec(cfg: RunConfig):
    from .langs.pts import LAMBDA_ARROW
    from .langs.syntax import parse_pts_spec
    if cfg.pts_spec is None:
        return LAMBDA_ARROW
    try:
        return parse_pts_spec(Path(cfg.pts_spec).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read PTS spec {cfg.pts_spec}: {exc.strerror}") from exc
    except ValueError as exc:
        raise InputError(f"bad PTS spec {cfg.pts_spec}: {exc}") from exc


def _context(cfg: RunConfig, spec=None):
    """Parsed ``--ctx``; stlc/pdts default to the corpus contexts."""
    from .langs.corpus import PDTS_CONTEXT, STLC_CONTEXT
    from .langs.syntax import parse_context
    if cfg.ctx is None:
        return {"stlc": STLC_CONTEXT, "pdts": PDTS_CONTEXT}.get(cfg.lang, {})
    mode = "pts" if cfg.lang == "pts" else "simple"
    return parse_context(cfg.ctx, mode, spec.sorts if spec else ())


def _term(cfg: RunConfig, src: str, spec=None):
    from .langs.syntax import parse_term
    mode = {"pts": "pts", "untyped": "untyped"}.get(cfg.lang, "simple")
    return parse_term(src.strip(), mode, spec.sorts if spec else ())


def _encode(cfg: RunConfig, src: str):
    from .langs.encode import encode_pdts, encode_pts, encode_stlc, encode_untyped
    spec = _spec(cfg) if cfg.lang == "pts" else None
    e = _term(cfg, src, spec)
    if cfg.lang == "stlc":
        return encode_stlc(_context(cfg), e), e
    if cfg.lang == "untyped":
        return encode_untyped(e), e
    if cfg.lang == "pdts":
        return encode_pdts(_context(cfg), e), e
    return encode_pts(spec, _context(cfg, spec), e, cfg.budget), e


def _trace_sink(cfg):
    if cfg.trace is None:
        return None, None
    try:
        fh = open(cfg.trace, "w", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot open trace file {cfg.trace}: {exc.strerror}") from exc
    return fh, json_trace(fh)


def _budget_report(rep: Report, exhausted: bool) -> Report:
    if exhausted:
        rep.status, rep.exit_code = "budget-exhausted", EXIT_BUDGET
        rep.text += f"\nbudget of steps exhausted"
    return rep


# -- modes ------------------------------------------------------------------

def do_eval(cfg: RunConfig, src: str) -> Report:
    fh, sink = _trace_sink(cfg)
    try:
        if cfg.lang == "atoms":
            space = Atomspace().add(src)
            if space.pointer is None:
                raise InputError("no pointed atom (mark the expression with '!')")
            res = evaluate(space, cfg.budget, sink)
            spaces = res.normal if isinstance(res, BudgetExhausted) else res.spaces
            forms = sorted({node_text(result_node(s)) for s in spaces if s.pointer is not None})
            exhausted = isinstance(res, BudgetExhausted)
            steps = res.steps
        elif not cfg.engine:
            forms, steps, exhausted = _object_eval(cfg, src)
        else:
            from .langs.encode import run_encoded
            enc, _ = _encode(cfg, src)
            res = run_encoded(enc, cfg.budget, sink)
            forms = sorted({_show(t) for t in res.normal_forms})
            steps, exhausted = res.steps, res.exhausted
    finally:
        if fh is not None:
            fh.close()
    text = "\n".join(forms) + f"\n({steps} steps)"
    rep = Report("eval", body={"lang": cfg.lang, "normal_forms": forms, "steps": steps,
                               "exhausted": exhausted}, text=text)
    return _budget_report(rep, exhausted)


def _object_eval(cfg, src):
    """Object-level reduction (no atomspace); all weak cbv normal forms."""
    from .langs.views import object_steps
    spec = _spec(cfg) if cfg.lang == "pts" else None
    e = _term(cfg, src, spec)
    lang = "pts" if cfg.lang == "pts" else "pdts"
    frontier, seen, forms, steps = [e], {e}, set(), 0
    while frontier:
        nxt = []
        for t in frontier:
            succ = [x for x, w in object_steps(lang, t) if w > 0]
            if not succ:
                forms.add(_show(t))
                continue
            if steps >= cfg.budget:
                return sorted(forms), steps, True
            steps += 1
            for x in succ:
                if x not in seen:
                    seen.add(x)
                    nxt.append(x)
        frontier = nxt
    return sorted(forms), steps, False


def _canonical_dist(dist: dict) -> list:
    rows = sorted(((_show(t), p) for t, p in dist.items()), key=lambda r: r[0])
    merged = {}
    for k, p in rows:
        merged[k] = merged.get(k, 0.0) + p
    return sorted(merged.items())


def do_full_eval(cfg: RunConfig, src: str) -> Report:
    from .langs.pdts import pdts_full_eval
    if cfg.lang != "pdts":
        raise InputError("full-eval needs --lang pdts")
    e = _term(cfg, src)
    fe = pdts_full_eval(e, cfg.budget)
    rows = _canonical_dist(fe.dist)
    body = {"lang": "pdts", "distribution": {k: p for k, p in rows}, "mass": fe.mass,
            "residual": fe.residual, "steps": fe.steps, "exhausted": fe.exhausted}
    text = "\n".join(f"{k}\t{p:.12g}" for k, p in rows)
    if cfg.engine and not fe.exhausted:
        from .langs.encode import encode_pdts, run_encoded
        res = run_encoded(encode_pdts(_context(cfg), e), cfg.budget)
        support = sorted({_show(t) for t in res.normal_forms})
        body["engine_support"] = support
        body["engine_agrees"] = (not res.exhausted) and support == sorted(body["distribution"])
        text += f"\nengine support {'agrees' if body['engine_agrees'] else 'DIFFERS'}: {support}"
    rep = Report("full-eval", body=body, text=text)
    return _budget_report(rep, fe.exhausted)


def do_sample(cfg: RunConfig, src: str) -> Report:
    from .langs.pdts import EvaluationBudgetError, pdts_sample
    if cfg.lang != "pdts":
        raise InputError("sample needs --lang pdts")
    e = _term(cfg, src)
    rng = random.Random(cfg.seed)
    counts = Counter()
    try:
        for _ in range(cfg.runs):
            counts[_show(pdts_sample(e, rng, cfg.budget))] += 1
    except EvaluationBudgetError as exc:
        rep = Report("sample", body={"seed": cfg.seed, "runs": cfg.runs, "counts": dict(sorted(counts.items()))},
                     text=str(exc))
        return _budget_report(rep, True)
    rows = sorted(counts.items())
    body = {"lang": "pdts", "seed": cfg.seed, "runs": cfg.runs, "counts": dict(rows)}
    if cfg.runs == 1:
        body["result"] = rows[0][0]
        text = rows[0][0]
    else:
        text = "\n".join(f"{k}\t{n}" for k, n in rows)
    return Report("sample", body=body, text=text)


def do_typecheck(cfg: RunConfig, src: str) -> Report:
    from .langs.pdts import pdts_typecheck
    from .langs.pts import ConversionBudgetError, pts_typecheck
    from .langs.stlc import ObjectTypeError, stlc_typecheck
    if cfg.lang in ("atoms", "untyped"):
        raise InputError(f"typecheck is not defined for --lang {cfg.lang}")
    spec = _spec(cfg) if cfg.lang == "pts" else None
    e = _term(cfg, src, spec)
    ctx = _context(cfg, spec)
    try:
        if cfg.lang == "stlc":
            ty = stlc_typecheck(ctx, e)
        elif cfg.lang == "pdts":
            ty = pdts_typecheck(ctx, e)
        else:
            ty = pts_typecheck(spec, ctx, e, cfg.budget)
    except ConversionBudgetError as exc:
        rep = Report("typecheck", body={"lang": cfg.lang, "error": str(exc),
                                        "error_kind": "ConversionBudgetError"}, text=str(exc))
        return _budget_report(rep, True)
    except ObjectTypeError as exc:
        return Report("typecheck", EXIT_FAIL, "type-error",
                      {"lang": cfg.lang, "error": str(exc), "error_kind": type(exc).__name__},
                      f"type error: {exc}")
    return Report("typecheck", body={"lang": cfg.lang, "type": _show(ty)},
                  text=f"{_show(e)} : {_show(ty)}")


def do_encode(cfg: RunConfig, src: str) -> Report:
    if cfg.lang == "atoms":
        space = Atomspace().add(src)
        table = {}
    else:
        enc, _ = _encode(cfg, src)
        space = enc.space
        table = {k: _show(lam) for k, (lam, _fv) in enc.table.items()}
    text = space.text()
    if cfg.emit_dot:
        _write(cfg.emit_dot, _space_dot(space))
    return Report("encode", body={"lang": cfg.lang, "atoms": text.splitlines(), "lambdas": table,
                                  "violations": [str(v) for v in check_mconstraints(space)]},
                  text=text)


def _space_dot(space: Atomspace) -> str:
    """One tree per atom; the pointed node is drawn bold, activated ones boxed."""
    lines = ["digraph atomspace {", "  node [fontname=monospace];"]
    ptr = space.pointer
    for i, atom in enumerate(space.atoms):
        for path, n in atom.walk():
            nid = "n" + "_".join(map(str, (i,) + path))
            label = f"{n.label}\n{type_to_text(n.type)}"
            style = ["shape=box"] if n.act is not None else []
            if ptr is not None and ptr == (i,) + path:
                style.append("penwidth=3")
            lines.append(f"  {nid} [label={json.dumps(label)}{''.join(', ' + x for x in style)}];")
            if path:
                lines.append(f"  {nid[:nid.rindex('_')]} -> {nid};")
    lines.append("}")
    return "\n".join(lines)


def _write(path, text):
    try:
        Path(path).write_text(text + "\n", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from exc


def do_bisim(cfg: RunConfig, sources: list) -> Report:
    if cfg.demo is not None:
        if cfg.demo != "minisys":
            raise InputError(f"unknown demo {cfg.demo!r}")
        return do_demo_minisys(cfg)
    if len(sources) == 2:
        return _bisim_files(cfg, sources)
    if len(sources) == 1 and cfg.lang in ("stlc", "pdts", "untyped"):
        return _bisim_term(cfg, sources[0])
    raise InputError("bisim takes two LTS JSON files, one object term, or --demo minisys")


def _verdict_report(cmd, verdict, body, text) -> Report:
    body = dict(body, verdict=type(verdict).__name__, detail=str(verdict))
    if isinstance(verdict, Bisimilar):
        body["relation_size"] = len(verdict.relation)
        return Report(cmd, body=body, text=f"{verdict}\n{text}".strip())
    if isinstance(verdict, Distinguished):
        body["witness"] = str(verdict.witness)
        body["depth"] = verdict.depth
        return Report(cmd, EXIT_FAIL, "distinguished", body, f"{verdict}\n{text}".strip())
    return Report(cmd, EXIT_BUDGET, "budget-exhausted", body, f"{verdict}\n{text}".strip())


def _bisim_files(cfg, paths) -> Report:
    systems = []
    for p in paths:
        try:
            systems.append(lts_from_json(Path(p).read_text(encoding="utf-8")))
        except OSError as exc:
            raise InputError(f"cannot read {p}: {exc.strerror}") from exc
        except (ValueError, KeyError, TypeError) as exc:
            raise InputError(f"{p} is not an LTS document: {exc}") from exc
    (l1, s1), (l2, s2) = systems
    if l1.weighted and l2.weighted:
        verdict = prob_bisim_check(l1, s1, l2, s2, cfg.budget)
    else:
        from .langs.views import erase_weights
        verdict = bisim_check(erase_weights(l1), s1, erase_weights(l2), s2, cfg.budget)
    return _verdict_report("bisim", verdict, {"inputs": list(paths)}, "")


def _bisim_term(cfg, src) -> Report:
    """Object-language system of a term against its encoded atomspace."""
    from .langs.views import lts_of_atomspace, lts_of_object
    enc, e = _encode(cfg, src)
    lang = "pdts" if cfg.lang == "untyped" else cfg.lang
    heads = sorted({n for n in _context(cfg)})
    probes = [("head", h) for h in heads] + [("is-body-of-lambda",)]
    obj = lts_of_object(lang, _context(cfg), e, probes)
    spc = lts_of_atomspace(enc, probes)
    verdict = bisim_check(obj, e, spc, spc.initial, cfg.budget)
    if cfg.emit_dot:
        _write(cfg.emit_dot + ".object.dot", lts_to_dot(obj, e, show=_show, name="object"))
        _write(cfg.emit_dot + ".atomspace.dot",
               lts_to_dot(spc, spc.initial, show=lambda s: s.text().splitlines()[-1], name="atomspace"))
    return _verdict_report("bisim", verdict, {"lang": cfg.lang, "term": _show(e)}, "")


def do_demo_minisys(cfg: RunConfig) -> Report:
    from .minisys import prove_bisim, systems_dot
    r = prove_bisim(cfg.mutated)
    body = {"demo": "minisys", "mutated": cfg.mutated, "states_str1": r.states1,
            "states_str2": r.states2, "relation_size": len(r.relation),
            "violations": [str(v) for v in r.violations], "seconds": round(r.seconds, 4)}
    if cfg.emit_dot:
        d1, d2 = systems_dot(cfg.mutated)
        _write(cfg.emit_dot + ".str1.dot", d1)
        _write(cfg.emit_dot + ".str2.dot", d2)
    text = (f"relation size {len(r.relation)}; states str1={r.states1} str2={r.states2}; "
            f"{len(r.violations)} transfer violations; {r.seconds:.3f}s")
    rep = _verdict_report("demo minisys", r.verdict, body, text)
    if r.violations and rep.exit_code == EXIT_OK:
        rep.exit_code, rep.status = EXIT_FAIL, "invalid-relation"
    return rep


_MODE_FUNCS = {"eval": do_eval, "full-eval": do_full_eval, "sample": do_sample,
               "typecheck": do_typecheck, "encode": do_encode}


def run(cfg: RunConfig, inputs: list) -> Report:
    """Dispatch ``cfg.mode`` on source texts (or paths, for bisim)."""
    if cfg.mode == "bisim":
        return do_bisim(cfg, inputs)
    if len(inputs) != 1:
        raise InputError(f"{cfg.mode} takes exactly one source")
    return _MODE_FUNCS[cfg.mode](cfg, inputs[0])


# -- argument parsing -------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _common(p, lang_default="pdts"):
    p.add_argument("--budget", type=int, default=10_000, help="step budget (>= 1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lang", choices=LANGS, default=lang_default)
    p.add_argument("--ctx", help='typing context, e.g. "x:A, f:A -> B"')
    p.add_argument("--pts-spec", metavar="FILE", help="PTS spec file (default: simply typed)")
    p.add_argument("--json", action="store_true", help="emit a JSON report")
    p.add_argument("--emit-dot", metavar="PREFIX", help="write Graphviz output")
    p.add_argument("--trace", metavar="FILE", help="JSON-lines engine trace (eval)")
    p.add_argument("--runs", type=int, default=1, help="number of samples (sample)")
    p.add_argument("--object", dest="engine", action="store_false",
                   help="evaluate with the object reducer instead of the atomspace engine")
    p.add_argument("-f", "--file", action="append", default=[], help="read source from FILE")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mettagraph", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {"eval": "evaluate a program to its normal forms",
             "full-eval": "exact distribution over normal forms (pdts)",
             "sample": "seeded sampling of reduction paths (pdts)",
             "typecheck": "typecheck an object-language term",
             "encode": "print the atomspace encoding of a term",
             "bisim": "check two transition systems, or a term against its encoding"}
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        _common(p)
        p.add_argument("source", nargs="*")
        if name == "bisim":
            p.add_argument("--demo", choices=("minisys",))
            p.add_argument("--mutated", action="store_true")
    p = sub.add_parser("run", help="generic driver selected by --mode")
    _common(p)
    p.add_argument("--mode", choices=MODES, required=True)
    p.add_argument("--demo", choices=("minisys",))
    p.add_argument("--mutated", action="store_true")
    p.add_argument("source", nargs="*")
    p = sub.add_parser("demo", help="built-in demonstrations")
    p.add_argument("name", choices=("minisys",))
    p.add_argument("--json", action="store_true")
    p.add_argument("--emit-dot", metavar="PREFIX")
    p.add_argument("--mutated", action="store_true", help="swap the f1 equations for identities")
    return ap


def _sources(args) -> list:
    out = []
    for path in args.file:
        try:
            out.append(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    out += list(args.source)
    if not out:
        out.append(sys.stdin.read())
    return out


def config_from_args(args) -> RunConfig:
    if args.command == "demo":
        return RunConfig("bisim", demo=args.name, output="json" if args.json else "text",
                         emit_dot=args.emit_dot, mutated=args.mutated)
    mode = args.mode if args.command == "run" else args.command
    return RunConfig(mode, args.budget, args.seed, args.lang, args.ctx, args.pts_spec,
                     "json" if args.json else "text", args.runs, args.engine, args.emit_dot,
                     args.trace, getattr(args, "demo", None), getattr(args, "mutated", False))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    as_json = getattr(args, "json", False)
    try:
        cfg = config_from_args(args)
        if cfg.mode == "bisim" and (cfg.demo or args.command == "demo"):
            inputs = []
        elif cfg.mode == "bisim" and len(args.source) + len(args.file) == 2:
            inputs = list(args.file) + list(args.source)
        else:
            inputs = _sources(args)
        rep = run(cfg, inputs)
    except (InputError, ParseError, TypeSyntaxError, AtomspaceError) as exc:
        kind = "parse-error" if isinstance(exc, (ParseError, TypeSyntaxError)) else "input-error"
        rep = Report(args.command, EXIT_INPUT, kind, {"error": str(exc)}, f"error: {exc}")
    except _object_errors() as exc:
        rep = Report(args.command, EXIT_FAIL, "type-error",
                     {"error": str(exc), "error_kind": type(exc).__name__}, f"type error: {exc}")
    if as_json:
        print(json.dumps(rep.as_json(), indent=2, sort_keys=True))
    else:
        stream = sys.stderr if rep.exit_code == EXIT_INPUT else sys.stdout
        print(rep.text, file=stream)
    return rep.exit_code


def _object_errors():
    from .langs.stlc import ObjectTypeError
    return (ObjectTypeError,)


if __name__ == "__main__":
    sys.exit(main())
