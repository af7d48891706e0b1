"""``nilword`` command line: canonical forms, distributions and bound checks.

Exit codes: 0 pass, 1 semantic failure, 2 parse error, 3 invalid flags,
4 enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .canonical import (
    Certificate,
    CertificateError,
    canonicalize,
    verify_certificate,
)
from .catalog import CATALOG_FAMILIES, CatalogError, catalog_group
from .distribution import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    bound_report,
    budget_from_env,
    exact_distribution,
    same_distribution,
    sampled_distribution,
)
from .groups import GroupConsistencyError, prime_factors, structure_report
from .words import WordSyntaxError, class2_normal_form, parse_word

EXIT_PASS, EXIT_FAIL, EXIT_PARSE, EXIT_FLAGS, EXIT_BUDGET = 0, 1, 2, 3, 4
DEFAULT_EXP = 4


class FlagError(Exception):
    pass


class ParseError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FLAGS, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    command: str
    words: tuple[str, ...]
    group: str | None
    p: int | None
    E: int
    k: int | None
    budget: int
    samples: int | None
    seed: int
    jobs: int
    out: str | None
    fmt: str

    def echo(self) -> str:
        parts = [f"command={self.command}"]
        if self.group:
            parts.append(f"group={self.group}")
        if self.p is not None:
            parts.append(f"p={self.p} E={self.E}")
        if self.k is not None:
            parts.append(f"k={self.k}")
        parts.append(f"budget={self.budget}")
        if self.samples is not None:
            parts.append(f"samples={self.samples} seed={self.seed}")
        parts.append(f"jobs={self.jobs}")
        return "config: " + " ".join(parts)


def _config(args) -> RunConfig:
    words = tuple(getattr(args, "words", None) or ()) + tuple(getattr(args, "word", None) or ())
    group = getattr(args, "group", None)
    if args.command == "group":
        group = args.spec
    if args.p is not None and (args.p < 2 or prime_factors(args.p) != [args.p]):
        raise FlagError(f"--p must be prime, got {args.p}")
    if args.exp < 1:
        raise FlagError("--exp must be >= 1")
    if args.k is not None and args.k < 1:
        raise FlagError("--k must be >= 1")
    if args.samples is not None and args.samples < 1:
        raise FlagError("--samples must be >= 1")
    if args.jobs is not None and args.jobs < 1:
        raise FlagError("--jobs must be >= 1")
    budget = budget_from_env() if args.budget is None else args.budget
    if budget < 1:
        raise FlagError("--budget must be positive")
    return RunConfig(args.command, words, group, args.p, args.exp, args.k, budget,
                     args.samples, args.seed, args.jobs or os.cpu_count() or 1,
                     args.out, args.format)


def _word(text: str, rank=None):
    try:
        return parse_word(text, rank)
    except WordSyntaxError as exc:
        raise ParseError(f"cannot parse word {text!r}: {exc}") from exc


def _group(spec: str):
    if not spec:
        raise FlagError("--group is required")
    try:
        return catalog_group(spec)
    except (CatalogError, GroupConsistencyError, OSError) as exc:
        raise ParseError(f"cannot resolve group {spec!r}: {exc}") from exc


def _one_word(cfg: RunConfig):
    if len(cfg.words) != 1:
        raise FlagError(f"{cfg.command} takes exactly one word, got {len(cfg.words)}")
    return _word(cfg.words[0])


def _verdict(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


# --- commands ----------------------------------------------------------------------


def cmd_canonicalize(cfg: RunConfig) -> tuple[int, str]:
    if cfg.p is None:
        raise FlagError("canonicalize needs --p")
    w = _one_word(cfg)
    if cfg.k is not None:
        if cfg.k < w.rank:
            raise FlagError(f"--k {cfg.k} is below the word rank {w.rank}")
        w = w.with_rank(cfg.k)
    chain, _, vf, _, cert = canonicalize(w, cfg.p, cfg.E)
    q = cfg.p ** cfg.E
    lines = [
        cfg.echo(),
        f"word: {w}",
        f"class2: {class2_normal_form(w).reduced(q).describe()}",
        f"chain: {chain}",
        f"chain word: {chain.word()}",
        f"v-form: {vf}",
        f"v-form word: {vf.word()}",
        "certificate:",
        cert.to_transcript().rstrip("\n"),
    ]
    return EXIT_PASS, "\n".join(lines) + "\n"


def cmd_dist(cfg: RunConfig) -> tuple[int, str]:
    G = _group(cfg.group)
    w = _one_word(cfg)
    k = w.rank if cfg.k is None else cfg.k
    if k < w.rank:
        raise FlagError(f"--k {k} is below the word rank {w.rank}")
    if cfg.samples is not None:
        sd = sampled_distribution(G, w, k, cfg.samples, cfg.seed)
        if cfg.fmt == "csv":
            rows = ["element,count,estimate"]
            for idx, c in enumerate(sd.counts):
                rows.append(f"{G.element(idx)},{int(c)},{int(c)}/{cfg.samples}")
            return EXIT_PASS, "\n".join(rows) + "\n"
        lines = [cfg.echo(), f"word: {w}", f"group: {G.name} (order {G.order})",
                 f"approximate: {cfg.samples} samples, seed {cfg.seed}"]
        for idx, c in enumerate(sd.counts):
            if c:
                lines.append(f"{G.element(idx)}\t{int(c)}\t~{int(c)}/{cfg.samples}")
        return EXIT_PASS, "\n".join(lines) + "\n"
    d = exact_distribution(G, w, k, budget=cfg.budget, jobs=cfg.jobs)
    if cfg.fmt == "csv":
        return EXIT_PASS, d.to_csv()
    lines = [cfg.echo(), f"word: {w}", f"group: {G.name} (order {G.order})",
             f"tuples: {d.total}", f"image size: {d.image_size()}",
             f"uniform: {str(d.is_uniform()).lower()}"]
    for idx, c in enumerate(d.counts):
        if c:
            lines.append(f"{G.element(idx)}\t{int(c)}\t{_frac(Fraction(int(c), d.total))}")
    return EXIT_PASS, "\n".join(lines) + "\n"


def cmd_check(cfg: RunConfig) -> tuple[int, str]:
    G = _group(cfg.group)
    w = _one_word(cfg)
    rep = bound_report(G, w, cfg.k, budget=cfg.budget, jobs=cfg.jobs)
    m = _frac(rep.min_prob_on_image)
    lines = [cfg.echo(), f"word: {w}", f"group: {rep.group}",
             f"|G| = {rep.order}", f"|G'| = {rep.derived_order}",
             f"min P on image = {m}",
             f"uniform: {str(rep.uniform).lower()}",
             f"improved: {m} >= {_frac(rep.improved_bound)} {_verdict(rep.improved_holds)}"]
    amit_asserted = rep.hypotheses.get("extraspecial")
    lines.append(f"amit: {m} >= {_frac(rep.amit_bound)} {_verdict(rep.amit_holds_on_image)}"
                 + ("" if amit_asserted else " (informational)"))
    if rep.square_bound is not None:
        lines.append(f"square: {m} >= {_frac(rep.square_bound)} {_verdict(rep.square_holds)}")
    else:
        lines.append("square: n/a (needs odd p, g^p in G' and a non-primitive word)")
    lines.append(f"verdict: {_verdict(rep.passed)}")
    return (EXIT_PASS if rep.passed else EXIT_FAIL), "\n".join(lines) + "\n"


def cmd_same(cfg: RunConfig) -> tuple[int, str]:
    G = _group(cfg.group)
    if len(cfg.words) != 2:
        raise FlagError(f"same takes exactly two words, got {len(cfg.words)}")
    w1, w2 = (_word(t) for t in cfg.words)
    res = same_distribution(G, w1, w2, budget=cfg.budget, jobs=cfg.jobs)
    lines = [cfg.echo(), f"w1: {w1}", f"w2: {w2}"]
    if res.equal:
        lines.append("result: equal")
    else:
        lines.append(f"result: diverge at {res.first_divergence}: "
                     f"{_frac(res.p1)} vs {_frac(res.p2)}")
    return (EXIT_PASS if res.equal else EXIT_FAIL), "\n".join(lines) + "\n"


def cmd_group(cfg: RunConfig) -> tuple[int, str]:
    G = _group(cfg.group)
    lines = [cfg.echo()] + structure_report(G).lines()
    return EXIT_PASS, "\n".join(lines) + "\n"


def cmd_catalog(cfg: RunConfig) -> tuple[int, str]:
    return EXIT_PASS, "\n".join(CATALOG_FAMILIES) + "\n"


def cmd_verify_cert(cfg: RunConfig) -> tuple[int, str]:
    if len(cfg.words) != 1:
        raise FlagError("verify-cert takes one transcript path")
    try:
        text = Path(cfg.words[0]).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {cfg.words[0]}: {exc}") from exc
    try:
        cert = Certificate.from_transcript(text)
    except CertificateError as exc:
        raise ParseError(f"malformed certificate: {exc}") from exc
    p = cert.p if cfg.p is None else cfg.p
    E = cert.E if cfg.p is None else cfg.E
    G = _group(cfg.group) if cfg.group else None
    try:
        v = verify_certificate(cert, p, E, G=G, budget=cfg.budget)
    except ValueError as exc:
        raise FlagError(str(exc)) from exc
    lines = [cfg.echo(), f"steps: {len(cert.steps)}",
             f"algebraic: {_verdict(v.algebraic)}"]
    if v.empirical is not None:
        lines.append(f"empirical on {G.name}: {_verdict(v.empirical)}")
    for idx, reason in v.failures:
        lines.append(f"failure at {'certificate' if idx < 0 else f'step {idx + 1}'}: {reason}")
    lines.append(f"verdict: {_verdict(v.passed)}")
    return (EXIT_PASS if v.passed else EXIT_FAIL), "\n".join(lines) + "\n"


COMMANDS = {
    "canonicalize": cmd_canonicalize,
    "dist": cmd_dist,
    "check": cmd_check,
    "same": cmd_same,
    "group": cmd_group,
    "catalog": cmd_catalog,
    "verify-cert": cmd_verify_cert,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, help="prime for canonical forms")
    common.add_argument("--exp", type=int, default=DEFAULT_EXP,
                        help=f"work modulo p^exp (default {DEFAULT_EXP})")
    common.add_argument("--k", type=int, help="number of variables (default: word rank)")
    common.add_argument("--budget", type=int,
                        help=f"max word evaluations (default {DEFAULT_BUDGET}, or NILWORD_BUDGET)")
    common.add_argument("--samples", type=int, help="estimate from this many random tuples")
    common.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
    common.add_argument("--jobs", type=int, help="enumeration workers (default: CPU count)")
    common.add_argument("--format", choices=("text", "csv"), default="text")
    common.add_argument("--out", help="write the report here instead of stdout")

    parser = _Parser(prog="nilword", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    c = sub.add_parser("canonicalize", parents=[common], help="chain form, v-form, certificate")
    c.add_argument("words", nargs="*", metavar="WORD")
    for name, helptext in (("dist", "exact or sampled distribution"),
                           ("check", "probability bounds"),
                           ("same", "compare two distributions")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("words", nargs="*", metavar="WORD")
        s.add_argument("--word", action="append", help="word (alternative to positional)")
        s.add_argument("--group", help="group spec, e.g. heisenberg:3:1 or file:PATH")
    g = sub.add_parser("group", parents=[common], help="structure report")
    g.add_argument("spec", metavar="GROUP")
    sub.add_parser("catalog", parents=[common], help="list group families")
    v = sub.add_parser("verify-cert", parents=[common], help="replay a certificate transcript")
    v.add_argument("words", nargs=1, metavar="TRANSCRIPT")
    v.add_argument("--group", help="also compare distributions on this group")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        code, report = COMMANDS[cfg.command](cfg)
    except FlagError as exc:
        print(f"nilword: error: {exc}", file=sys.stderr)
        return EXIT_FLAGS
    except ParseError as exc:
        print(f"nilword: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BudgetExceeded as exc:
        print(f"nilword: error: {exc} (required {exc.required})", file=sys.stderr)
        return EXIT_BUDGET
    if cfg.out:
        Path(cfg.out).write_text(report)
        if cfg.fmt == "csv":
            print(cfg.echo(), file=sys.stderr)
    else:
        sys.stdout.write(report)
    return code


if __name__ == "__main__":
    sys.exit(main())
