"""Rewriting words into chain form and v-form with replayable certificates.

Everything happens on class-2 forms modulo ``q = p**E``: two forms that agree
modulo ``q`` induce the same word map on every class-2 group whose exponent
divides ``q``.  Each rewriting step is a :class:`~nilword.words.Substitution`
that permutes ``G^k`` for such groups, so source and target words are
identically distributed there.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Sequence

from .distribution import BudgetExceeded, exact_distribution, same_distribution
from .groups import Group, prime_factors
from .words import (
    Class2Form,
    Substitution,
    SubstitutionError,
    Word,
    chain_word,
    class2_normal_form,
    commutator_word,
    make_nielsen,
    parse_substitution,
    parse_word,
    render_word,
    substitute_form,
)

__all__ = [
    "ChainForm",
    "VForm",
    "DisjointForm",
    "Step",
    "Certificate",
    "CertificateError",
    "Verdict",
    "SurjectivityReport",
    "chain_form",
    "disjoint_reduce",
    "v_form",
    "canonicalize",
    "verify_certificate",
    "classify_surjectivity",
    "valuation",
    "TAGS",
]

TAGS = ("nielsen", "class2-identity", "unit-power", "central-tweak", "variable-permutation")

_TAG_KINDS = {
    "nielsen": {"right-multiply", "invert"},
    "variable-permutation": {"swap", "cycle"},
    "unit-power": {"power-by-unit"},
    "central-tweak": {"central-tweak"},
    "class2-identity": {"identity"},
}


class CertificateError(ValueError):
    pass


def _check_prime(p: int, E: int):
    if p < 2 or prime_factors(p) != [p]:
        raise ValueError(f"{p} is not prime")
    if E < 1:
        raise ValueError(f"precision E must be >= 1, got {E}")


def valuation(x: int, p: int, E: int) -> int:
    """p-adic valuation of ``x`` modulo ``p**E``; ``E`` for zero."""
    x %= p ** E
    if x == 0:
        return E
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def _vdiv(x: int, y: int, p: int, E: int) -> int:
    """``c`` with ``c*y = x (mod p^E)``, assuming ``v(x) >= v(y)``."""
    q = p ** E
    x, y = x % q, y % q
    if x == 0:
        return 0
    v = valuation(y, p, E)
    u = y // p ** v
    return (x // p ** v) * pow(u, -1, q) % q


def _sym(c: int, q: int) -> int:
    c %= q
    return c - q if c > q // 2 else c


# --- certificates ------------------------------------------------------------------


@dataclass(frozen=True)
class Step:
    substitution: Substitution
    tag: str
    anchor: str

    def line(self) -> str:
        s = self.substitution
        return f"{self.tag}\t{s.kind}: {s.describe()}\t{self.anchor}"


@dataclass(frozen=True)
class Certificate:
    source: Word
    target: Word
    p: int
    E: int
    steps: tuple[Step, ...] = ()

    @property
    def rank(self) -> int:
        return self.source.rank

    def to_transcript(self) -> str:
        lines = [f"rank: {self.rank}", f"modulus: {self.p}^{self.E}",
                 f"source: {render_word(self.source)}"]
        lines += [st.line() for st in self.steps]
        lines.append(f"target: {render_word(self.target)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_transcript(cls, text: str) -> "Certificate":
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if len(lines) < 4:
            raise CertificateError("transcript needs rank, modulus, source and target lines")
        try:
            rank = int(_field(lines[0], "rank"))
            p_txt, _, e_txt = _field(lines[1], "modulus").partition("^")
            p, E = int(p_txt), int(e_txt)
            source = parse_word(_field(lines[2], "source"), rank)
            target = parse_word(_field(lines[-1], "target"), rank)
        except ValueError as exc:
            raise CertificateError(f"bad header: {exc}") from exc
        steps = []
        for lineno, line in enumerate(lines[3:-1], 4):
            parts = line.split("\t")
            if len(parts) != 3:
                raise CertificateError(f"line {lineno}: expected three tab-separated fields")
            tag, sub, anchor = parts
            if tag not in TAGS:
                raise CertificateError(f"line {lineno}: unknown tag {tag!r}")
            try:
                s = parse_substitution(sub, rank, p, E)
            except (SubstitutionError, ValueError) as exc:
                raise CertificateError(f"line {lineno}: {exc}") from exc
            steps.append(Step(s, tag, anchor))
        return cls(source, target, p, E, tuple(steps))


def _field(line: str, name: str) -> str:
    prefix = f"{name}: "
    if not line.startswith(prefix):
        raise ValueError(f"expected '{prefix}...', got {line!r}")
    return line[len(prefix):]


class _Rewriter:
    """Current class-2 form modulo ``p^E`` plus the steps applied so far."""

    def __init__(self, form: Class2Form, p: int, E: int):
        self.p, self.E, self.q = p, E, p ** E
        self.k = form.rank
        self.form = form.reduced(self.q)
        self.steps: list[Step] = []

    def apply(self, s: Substitution, tag: str, anchor: str):
        self.form = substitute_form(self.form, s, self.q)
        self.steps.append(Step(s, tag, anchor))

    def coef(self, m: int, n: int) -> int:
        return self.form.coef(m, n) % self.q

    def val(self, m: int, n: int) -> int:
        return valuation(self.coef(m, n), self.p, self.E)

    def swap(self, i: int, j: int, anchor: str):
        if i != j:
            self.apply(make_nielsen("swap", (i, j), self.k), "variable-permutation", anchor)

    def right_multiply(self, i: int, j: int, c: int, anchor: str):
        c = _sym(c, self.q)
        if c:
            self.apply(make_nielsen("right-multiply", (i, j, c), self.k), "nielsen", anchor)

    def unit_power(self, i: int, d: int, anchor: str):
        d = _sym(d, self.q)
        if d != 1:
            s = make_nielsen("power-by-unit", (i, d), self.k, self.p, self.E)
            self.apply(s, "unit-power", anchor)

    def tweak(self, a: int, b: int, m: int, anchor: str):
        """``x1 -> x1 [xa, xb]^m``."""
        m = _sym(m, self.q)
        if m:
            s = make_nielsen("central-tweak", (1, a, b, m), self.k, self.p, self.E)
            self.apply(s, "central-tweak", anchor)

    def edges(self) -> dict[tuple[int, int], int]:
        return {key: v % self.q for key, v in self.form.beta.items() if v % self.q}

    def cancel(self, x: int, y: int, z: int, anchor: str):
        """Use edge ``(x, y)`` to kill edge ``(y, z)`` via ``x -> x z^lam``."""
        lam = _vdiv(self.coef(y, z), self.coef(x, y), self.p, self.E)
        self.right_multiply(x, z, lam, anchor)
        if self.coef(y, z):
            raise AssertionError(f"edge ({y},{z}) survived cancellation")

    def relabel(self, order: Sequence[int], anchor: str):
        """Rename variable ``order[i]`` to ``x_{i+1}`` using transpositions."""
        order = list(order) + [v for v in range(1, self.k + 1) if v not in order]
        where = {v: v for v in range(1, self.k + 1)}  # original -> current label
        holder = {v: v for v in range(1, self.k + 1)}  # current label -> original
        for target, orig in enumerate(order, 1):
            cur = where[orig]
            if cur != target:
                other = holder[target]
                self.swap(target, cur, anchor)
                where[orig], where[other] = target, cur
                holder[target], holder[cur] = orig, other

    def certificate(self, source: Word, target: Word) -> Certificate:
        return Certificate(source, target, self.p, self.E, tuple(self.steps))


# --- chain form --------------------------------------------------------------------


@dataclass(frozen=True)
class ChainForm:
    """``x1^t0 [x1,x2]^t1 ... [x_{k-1},x_k]^t_{k-1}`` with ``t_i`` in ``{0, 1, p, ..., p^(E-1)}``."""

    rank: int
    p: int
    E: int
    t: tuple[int, ...]

    def word(self) -> Word:
        return chain_word(self.t)

    def is_valid(self) -> bool:
        allowed = {0} | {self.p ** s for s in range(self.E)}
        return len(self.t) == self.rank and all(x in allowed for x in self.t)

    def __str__(self):
        return "t = (" + ", ".join(map(str, self.t)) + ")"


def chain_form(f: Class2Form | Word, p: int, E: int) -> tuple[ChainForm, Certificate]:
    """Reduce to chain form by abelian elimination, row elimination and unit scaling."""
    _check_prime(p, E)
    source = f if isinstance(f, Word) else f.reconstruction_word()
    form = class2_normal_form(f) if isinstance(f, Word) else f
    rw = _Rewriter(form, p, E)
    k, q = rw.k, rw.q

    # abelianization -> (p^v u, 0, ..., 0)
    a = rw.form.a
    if any(a):
        vals = [valuation(x, p, E) for x in a]
        i = vals.index(min(vals))
        for j in range(1, k + 1):
            if j != i + 1 and rw.form.a[j - 1]:
                c = _vdiv(rw.form.a[j - 1], rw.form.a[i], p, E)
                rw.right_multiply(i + 1, j, -c, "abelianization elimination")
        rw.swap(1, i + 1, "abelianization elimination")

    # commutator rows: keep only [x_m, x_{m+1}]
    for m in range(1, k - 1):
        row = [(rw.val(m, n), n) for n in range(m + 1, k + 1) if rw.coef(m, n)]
        if not row:
            continue
        _, pivot = min(row)
        rw.swap(m + 1, pivot, "row pivot")
        for n in range(m + 2, k + 1):
            if rw.coef(m, n):
                c = _vdiv(rw.coef(m, n), rw.coef(m, m + 1), p, E)
                rw.right_multiply(m + 1, n, -c, "row elimination")

    # unit normalization along the chain
    d = [1] * (k + 1)
    a1 = rw.form.a[0] % q
    if a1:
        u0 = a1 // p ** valuation(a1, p, E)
        d[1] = pow(u0, -1, q)
    for i in range(1, k):
        c = rw.coef(i, i + 1)
        if c:
            u = c // p ** valuation(c, p, E)
            d[i + 1] = pow(u * d[i], -1, q)
    for i in range(1, k + 1):
        rw.unit_power(i, d[i], "unit normalization")

    t = [_p_power(rw.form.a[0], p, E)]
    t += [_p_power(rw.coef(i, i + 1), p, E) for i in range(1, k)]
    chain = ChainForm(k, p, E, tuple(t))
    expected = class2_normal_form(chain.word()).reduced(q)
    if rw.form != expected:
        raise AssertionError(f"chain elimination ended at {rw.form}, expected {expected}")
    return chain, rw.certificate(source, chain.word())


def _p_power(x: int, p: int, E: int) -> int:
    x %= p ** E
    return 0 if x == 0 else p ** valuation(x, p, E)


# --- path reduction shared by disjoint_reduce and v_form ----------------------------


def _components(edges: dict[tuple[int, int], int], first: int | None) -> list[list[int]]:
    """Vertex sequences of the path components of ``edges``.

    The component containing ``first`` is listed first and starts at ``first``.
    """
    adj: dict[int, list[int]] = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    if any(len(nb) > 2 for nb in adj.values()):
        raise AssertionError(f"commutator graph is not a union of paths: {sorted(edges)}")
    seen: set[int] = set()
    paths = []
    starts = sorted(v for v, nb in adj.items() if len(nb) == 1)
    if first is not None and first in adj:
        if len(adj[first]) != 1:
            raise AssertionError("x1 must be an endpoint of its path")
        starts = [first] + [s for s in starts if s != first]
    for s in starts:
        if s in seen:
            continue
        path = [s]
        seen.add(s)
        while True:
            nxt = [v for v in adj[path[-1]] if v not in seen]
            if not nxt:
                break
            path.append(nxt[0])
            seen.add(nxt[0])
        paths.append(path)
    if len(seen) != len(adj):
        raise AssertionError("commutator graph contains a cycle")
    return paths


def _reduce_paths(rw: _Rewriter, power_r: int | None):
    """Split every path into disjoint commutators.

    With ``power_r`` set, ``x1`` carries ``x1^(p^r)``: commutators of
    valuation ``>= r`` are absorbed into the power, and the path through
    ``x1`` is kept once its valuations strictly increase away from ``x1``.
    """
    while True:
        if power_r is not None:
            for (u, v), c in sorted(rw.edges().items()):
                s = valuation(c, rw.p, rw.E)
                if s >= power_r:
                    m = c // rw.p ** power_r
                    rw.tweak(v, u, m, "power absorption")
        edges = rw.edges()
        paths = _components(edges, 1 if power_r is not None else None)
        work = None
        for path in paths:
            if len(path) < 3:
                continue
            protected = power_r is not None and path[0] == 1
            vals = [rw.val(path[i], path[i + 1]) for i in range(len(path) - 1)]
            L = len(vals)
            if vals[L - 1] <= vals[L - 2]:
                work = ("end", path)
                break
            start = L - 1
            while start > 0 and vals[start - 1] < vals[start]:
                start -= 1
            if start == 0 and protected:
                continue
            work = ("run", path, start)
            break
        if work is None:
            return
        path = work[1]
        L = len(path) - 1
        if work[0] == "end":
            rw.cancel(path[L], path[L - 1], path[L - 2], "split last commutator")
        elif work[2] == 0:
            rw.cancel(path[0], path[1], path[2], "split first commutator")
        else:
            i = work[2]
            a, b, c, d = path[i - 1], path[i], path[i + 1], path[i + 2]
            rw.cancel(b, c, d, "bridge commutator")
            rw.cancel(c, b, a, "bridge commutator")


def _normalize_and_order(rw: _Rewriter, linked: list[int], disjoint: list[tuple[int, int]]):
    """Scale commutator exponents to exact p-powers, then relabel variables."""
    q = rw.q
    d: dict[int, int] = {}

    def unit(c):
        return c // rw.p ** valuation(c, rw.p, rw.E)

    if linked:
        d[linked[0]] = 1
        for x, y in zip(linked, linked[1:]):
            c = rw.coef(x, y)
            d[y] = pow(unit(c) * d[x], -1, q)
    for x, y in disjoint:
        d[x] = 1
        d[y] = pow(unit(rw.coef(x, y)), -1, q)
    for v in sorted(d):
        rw.unit_power(v, d[v], "unit normalization")
    order = list(linked)
    for x, y in disjoint:
        order += [x, y]
    rw.relabel(order, "relabel variables")


def _disjoint_edges(rw: _Rewriter, exclude: set[int]) -> list[tuple[int, int]]:
    out = []
    for (u, v), c in rw.edges().items():
        if u not in exclude and v not in exclude:
            out.append((valuation(c, rw.p, rw.E), u, v))
    return [(u, v) for _, u, v in sorted(out)]


# --- disjoint commutators --------------------------------------------------------


@dataclass(frozen=True)
class DisjointForm:
    """``[x1,x2]^t1 [x3,x4]^t3 ...``; ``t`` lists the exponents in order."""

    rank: int
    p: int
    E: int
    t: tuple[int, ...]

    def word(self) -> Word:
        w = Word.identity(self.rank)
        for j, e in enumerate(self.t):
            if e:
                w = w * commutator_word(self.rank, 2 * j + 1, 2 * j + 2, e)
        return w

    def is_valid(self) -> bool:
        allowed = {0} | {self.p ** s for s in range(self.E)}
        return all(e in allowed for e in self.t) and 2 * len(self.t) <= self.rank


def disjoint_reduce(s: Sequence[int | None], p: int, E: int,
                    rank: int | None = None) -> tuple[DisjointForm, Certificate]:
    """Rewrite ``[x1,x2]^(p^s1) ... [x_{n-1},x_n]^(p^s_{n-1})`` as disjoint commutators.

    ``None`` in ``s`` omits that commutator.  Output exponents are ordered
    by increasing valuation.
    """
    _check_prime(p, E)
    n = len(s) + 1
    rank = n if rank is None else rank
    if rank < n:
        raise ValueError("rank must cover every variable of the chain")
    src = Word.identity(rank)
    for i, si in enumerate(s, 1):
        if si is not None:
            src = src * commutator_word(rank, i, i + 1, p ** si)
    rw = _Rewriter(class2_normal_form(src), p, E)
    _reduce_paths(rw, None)
    disjoint = _disjoint_edges(rw, set())
    _normalize_and_order(rw, [], disjoint)
    t = [_p_power(rw.coef(2 * j + 1, 2 * j + 2), p, E) for j in range(len(disjoint))]
    t += [0] * (n // 2 - len(t))
    form = DisjointForm(rank, p, E, tuple(t))
    if rw.form != class2_normal_form(form.word()).reduced(rw.q):
        raise AssertionError("disjoint reduction did not reach its target")
    return form, rw.certificate(src, form.word())


# --- v-form ------------------------------------------------------------------------


@dataclass(frozen=True)
class VForm:
    """Word ``v_p(t0, l; s_1, ..., s_{n-1})`` with absent entries as ``None``.

    The word is ``x1^t0`` times the linked commutators ``[x_i, x_{i+1}]``
    for ``i < l`` and the disjoint ones ``[x_l, x_{l+1}], [x_{l+2}, x_{l+3}], ...``,
    each raised to ``p^s_i`` and omitted when ``s_i`` is ``None``.
    ``t0`` is ``1`` (primitive), ``0`` (pure-commutator) or ``p^r``.
    """

    rank: int
    p: int
    E: int
    variant: str
    r: int | None
    ell: int
    n: int
    s: tuple[int | None, ...] = field(default=())

    @property
    def t0(self) -> int:
        if self.variant == "primitive":
            return 1
        if self.variant == "pure-commutator":
            return 0
        return self.p ** self.r

    def word(self) -> Word:
        w = Word(self.rank, ((1, self.t0),))
        for i in range(1, self.n):
            si = self.s[i - 1]
            if si is None:
                continue
            if i >= self.ell and (i - self.ell) % 2:
                raise ValueError(f"s_{i} lies between disjoint commutators")
            w = w * commutator_word(self.rank, i, i + 1, self.p ** si)
        return w

    def satisfies_constraints(self) -> bool:
        if len(self.s) != max(self.n - 1, 0) or self.n > self.rank or self.ell < 1:
            return False
        present = [(i, si) for i, si in enumerate(self.s, 1) if si is not None]
        if any(not 0 <= si < self.E for _, si in present):
            return False
        if any(i >= self.ell and (i - self.ell) % 2 for i, _ in present):
            return False
        if self.variant == "primitive":
            return self.r == 0 and not present
        if self.variant == "pure-commutator":
            return self.ell == 1 and self.r is None
        if self.variant != "power-with-tail" or self.r is None or not 0 < self.r < self.E:
            return False
        linked = [si for i, si in present if i < self.ell]
        if any(x >= y for x, y in zip(linked, linked[1:])):
            return False
        return all(si < self.r for _, si in present)

    def __str__(self):
        s = ", ".join("-" if x is None else str(x) for x in self.s)
        if self.variant == "primitive":
            return "primitive: automorphic to x1"
        if self.variant == "pure-commutator":
            return f"pure-commutator: l = 1, s = ({s})"
        return f"power-with-tail: r = {self.r}, l = {self.ell}, s = ({s})"


def v_form(c: ChainForm) -> tuple[VForm, Certificate]:
    """Refine a chain form into the v-form with ordered valuations."""
    p, E, k = c.p, c.E, c.rank
    source = c.word()
    rw = _Rewriter(class2_normal_form(source), p, E)
    t0 = c.t[0] % rw.q
    if t0 == 1:
        for (u, v), coef in sorted(rw.edges().items()):
            rw.tweak(v, u, coef, "absorb into primitive")
        vf = VForm(k, p, E, "primitive", 0, 1, 1, ())
    elif t0 == 0:
        _reduce_paths(rw, None)
        disjoint = _disjoint_edges(rw, set())
        _normalize_and_order(rw, [], disjoint)
        s: list[int | None] = []
        for j, _ in enumerate(disjoint):
            s += [rw.val(2 * j + 1, 2 * j + 2), None]
        n = max(1, 2 * len(disjoint))
        vf = VForm(k, p, E, "pure-commutator", None, 1, n, tuple(s[: n - 1]))
    else:
        r = valuation(t0, p, E)
        _reduce_paths(rw, r)
        edges = rw.edges()
        paths = _components(edges, 1)
        linked = paths[0] if paths and paths[0][0] == 1 else [1]
        disjoint = _disjoint_edges(rw, set(linked))
        _normalize_and_order(rw, linked, disjoint)
        Lv = len(linked)
        s = [rw.val(i, i + 1) for i in range(1, Lv)]
        if disjoint:
            ell = Lv + 1
            s.append(None)
            for j in range(len(disjoint)):
                x = ell + 2 * j
                s += [rw.val(x, x + 1), None]
            n = ell + 2 * len(disjoint) - 1
            s = s[: n - 1]
        else:
            ell = n = Lv
        vf = VForm(k, p, E, "power-with-tail", r, ell, n, tuple(s))
    if rw.form != class2_normal_form(vf.word()).reduced(rw.q):
        raise AssertionError(f"v-form reduction ended at {rw.form}, expected {vf}")
    return vf, rw.certificate(source, vf.word())


def canonicalize(w: Word, p: int, E: int):
    """Chain form, v-form and one certificate leading from ``w`` to the v-form word."""
    chain, cert1 = chain_form(w, p, E)
    vf, cert2 = v_form(chain)
    combined = Certificate(w, vf.word(), p, E, cert1.steps + cert2.steps)
    return chain, cert1, vf, cert2, combined


# --- verification ------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    passed: bool
    failures: tuple[tuple[int, str], ...] = ()
    algebraic: bool = True
    empirical: bool | None = None

    def __bool__(self):
        return self.passed


def verify_certificate(cert: Certificate, p: int | None = None, E: int | None = None,
                       G: Group | None = None, budget: int | None = None) -> Verdict:
    """Replay ``cert`` on class-2 forms modulo ``p^E``; optionally compare distributions on ``G``.

    Failures are reported as ``(step index, reason)``; index ``-1`` refers to
    the certificate as a whole.
    """
    p = cert.p if p is None else p
    E = cert.E if E is None else E
    _check_prime(p, E)
    q = p ** E
    failures: list[tuple[int, str]] = []
    form = class2_normal_form(cert.source).reduced(q)
    for idx, st in enumerate(cert.steps):
        s = st.substitution
        if st.tag not in _TAG_KINDS:
            failures.append((idx, f"unknown tag {st.tag!r}"))
            continue
        if s.kind not in _TAG_KINDS[st.tag]:
            failures.append((idx, f"kind {s.kind} is not allowed under tag {st.tag}"))
        if s.rank != cert.rank:
            failures.append((idx, "rank mismatch"))
            continue
        if s.kind == "power-by-unit":
            gamma = s.params[1]
            if gcd(gamma, p) != 1:
                failures.append((idx, f"non-unit exponent {gamma} modulo {p}^{E}"))
                continue
        form = substitute_form(form, s, q)
    target = class2_normal_form(cert.target).reduced(q)
    if form != target:
        failures.append((-1, f"replay ends at {form.describe()}, target is {target.describe()}"))
    algebraic = not failures
    empirical = None
    if G is not None:
        if q % G.exponent:
            failures.append((-1, f"exp(G) = {G.exponent} does not divide {p}^{E}"))
            empirical = False
        else:
            res = same_distribution(G, cert.source, cert.target, budget=budget)
            empirical = res.equal
            if not res.equal:
                failures.append((-1, f"distributions diverge at {res.first_divergence}"))
    return Verdict(not failures, tuple(failures), algebraic, empirical)


@dataclass(frozen=True)
class SurjectivityReport:
    primes: tuple[int, ...]
    abelian_gcd: int
    predicted_surjective: bool
    predicted_uniform: bool
    empirical_surjective: bool | None = None
    empirical_uniform: bool | None = None

    @property
    def equivalence_holds(self) -> bool | None:
        if self.empirical_surjective is None:
            return None
        return (self.predicted_surjective == self.empirical_surjective
                == self.empirical_uniform)


def classify_surjectivity(w: Word, G: Group, budget: int | None = None,
                          require_empirical: bool = False, dist=None) -> SurjectivityReport:
    """Predict surjectivity from the abelianization gcd and check it by enumeration."""
    a = class2_normal_form(w).a
    g = 0
    for x in a:
        g = gcd(g, x)
    primes = tuple(prime_factors(G.order))
    predicted = all(g % p != 0 for p in primes)
    es = eu = None
    try:
        dist = dist or exact_distribution(G, w, budget=budget)
        es, eu = dist.is_surjective(), dist.is_uniform()
    except BudgetExceeded:
        if require_empirical:
            raise
    return SurjectivityReport(primes, g, predicted, predicted, es, eu)
