"""Free-group words, substitutions, and the free class-2 normal form.

A :class:`Word` is a freely reduced element of ``F_k`` stored as syllables
``(gen, exp)``.  :class:`Class2Form` is its image in the free nilpotent group
of class 2: an abelianization vector plus commutator exponents ``beta[m, n]``
for ``m < n``, meaning

    x1^a1 ... xk^ak * prod_{m<n} [xm, xn]^beta[m, n]

with ``[g, h] = g h g^-1 h^-1``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Mapping, Sequence

__all__ = [
    "Word",
    "WordSyntaxError",
    "Class2Form",
    "Substitution",
    "SubstitutionError",
    "parse_word",
    "render_word",
    "substitute",
    "compose",
    "class2_normal_form",
    "substitute_form",
    "make_nielsen",
    "chain_word",
    "commutator_word",
    "parse_substitution",
    "NIELSEN_KINDS",
    "FREE_KINDS",
]


class WordSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class SubstitutionError(ValueError):
    pass


def _reduce(syllables: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    stack: list[list[int]] = []
    for gen, exp in syllables:
        if exp == 0:
            continue
        if stack and stack[-1][0] == gen:
            stack[-1][1] += exp
            if stack[-1][1] == 0:
                stack.pop()
        else:
            stack.append([gen, exp])
    return tuple((g, e) for g, e in stack)


@dataclass(frozen=True)
class Word:
    """Freely reduced word of ``F_rank``; reduction happens on construction."""

    rank: int
    syllables: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be positive")
        syl = _reduce((int(g), int(e)) for g, e in self.syllables)
        for g, _ in syl:
            if not 1 <= g <= self.rank:
                raise ValueError(f"generator x{g} outside rank {self.rank}")
        object.__setattr__(self, "syllables", syl)

    @classmethod
    def identity(cls, rank: int) -> "Word":
        return cls(rank, ())

    @classmethod
    def generator(cls, rank: int, i: int, exp: int = 1) -> "Word":
        return cls(rank, ((i, exp),))

    def is_identity(self) -> bool:
        return not self.syllables

    def __len__(self):
        return sum(abs(e) for _, e in self.syllables)

    def __mul__(self, other: "Word") -> "Word":
        if other.rank != self.rank:
            raise ValueError("rank mismatch")
        return Word(self.rank, self.syllables + other.syllables)

    def inverse(self) -> "Word":
        return Word(self.rank, tuple((g, -e) for g, e in reversed(self.syllables)))

    def __pow__(self, n: int) -> "Word":
        if n < 0:
            return self.inverse() ** (-n)
        return Word(self.rank, self.syllables * n)

    def commutator(self, other: "Word") -> "Word":
        return self * other * self.inverse() * other.inverse()

    def with_rank(self, rank: int) -> "Word":
        return Word(rank, self.syllables)

    def used_generators(self) -> set[int]:
        return {g for g, _ in self.syllables}

    def __str__(self):
        return render_word(self)


def commutator_word(rank: int, m: int, n: int, exp: int = 1) -> Word:
    """The word ``[xm, xn]^exp`` expanded in the free group."""
    c = Word(rank, ((m, 1), (n, 1), (m, -1), (n, -1)))
    return c ** exp


def chain_word(t: Sequence[int]) -> Word:
    """``x1^t0 [x1,x2]^t1 ... [x_{k-1},x_k]^t_{k-1}`` with ``k = len(t)``."""
    k = len(t)
    w = Word(k, ((1, t[0]),))
    for i in range(1, k):
        if t[i]:
            w = w * commutator_word(k, i, i + 1, t[i])
    return w


# --- parsing -----------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.max_gen = 0

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            found = repr(self.peek()) if self.peek() else "end of input"
            raise WordSyntaxError(f"expected {ch!r}, found {found}", self.pos)
        self.pos += 1

    def posint(self) -> int:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            raise WordSyntaxError("expected digits", start)
        return int(self.text[start:self.pos])

    def integer(self) -> int:
        sign = 1
        if self.peek() == "-":
            self.pos += 1
            sign = -1
        return sign * self.posint()

    # Letters are returned as flat syllable lists; rank is fixed afterwards.
    def word(self) -> list[tuple[int, int]]:
        out: list[tuple[int, int]] = []
        while self.peek() in ("x", "["):
            out.extend(self.factor())
        return out

    def factor(self) -> list[tuple[int, int]]:
        atom = self.atom()
        if self.peek() == "^":
            self.pos += 1
            n = self.integer()
            if n < 0:
                atom = [(g, -e) for g, e in reversed(atom)]
                n = -n
            atom = atom * n
        return atom

    def atom(self) -> list[tuple[int, int]]:
        ch = self.peek()
        if ch == "x":
            start = self.pos
            self.pos += 1
            idx = self.posint()
            if idx == 0:
                raise WordSyntaxError("generator index 0", start)
            self.max_gen = max(self.max_gen, idx)
            return [(idx, 1)]
        if ch == "[":
            self.pos += 1
            g = self.word()
            self.expect(",")
            h = self.word()
            self.expect("]")
            inv = lambda s: [(a, -e) for a, e in reversed(s)]  # noqa: E731
            return g + h + inv(g) + inv(h)
        raise WordSyntaxError("expected generator or '['", self.pos)


def parse_word(text: str, rank: int | None = None) -> Word:
    """Parse ``text`` into a freely reduced :class:`Word`.

    >>> parse_word("[x1,x2]^2") == parse_word("x1 x2 x1^-1 x2^-1 x1 x2 x1^-1 x2^-1")
    True
    """
    p = _Parser(text)
    syl = p.word()
    p.skip()
    if p.pos != len(text):
        raise WordSyntaxError(f"unexpected {text[p.pos]!r}", p.pos)
    if rank is None:
        rank = max(1, p.max_gen)
    elif p.max_gen > rank:
        raise WordSyntaxError(f"generator x{p.max_gen} exceeds rank {rank}", 0)
    return Word(rank, tuple(syl))


def render_word(w: Word) -> str:
    return " ".join(f"x{g}" if e == 1 else f"x{g}^{e}" for g, e in w.syllables)


# --- class-2 normal form -----------------------------------------------------


@dataclass(frozen=True)
class Class2Form:
    """Element of the free class-2 nilpotent group of rank ``rank``.

    ``beta`` only holds nonzero entries keyed ``(m, n)`` with ``m < n``.
    Group operations are exact over the integers; :meth:`reduced` maps to
    coordinates modulo ``q``, which is a homomorphism because the product
    law is polynomial with integer coefficients.
    """

    rank: int
    a: tuple[int, ...]
    beta: Mapping[tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.a) != self.rank:
            raise ValueError("abelianization length must equal rank")
        clean = {}
        for (m, n), v in self.beta.items():
            if not 1 <= m < n <= self.rank:
                raise ValueError(f"bad commutator key {(m, n)}")
            if v:
                clean[(m, n)] = int(v)
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))
        object.__setattr__(self, "beta", dict(sorted(clean.items())))

    def __hash__(self):
        return hash((self.rank, self.a, tuple(self.beta.items())))

    @classmethod
    def identity(cls, rank: int) -> "Class2Form":
        return cls(rank, (0,) * rank, {})

    @classmethod
    def generator(cls, rank: int, i: int) -> "Class2Form":
        a = [0] * rank
        a[i - 1] = 1
        return cls(rank, tuple(a), {})

    def coef(self, m: int, n: int) -> int:
        """Alternating coefficient: ``coef(n, m) == -coef(m, n)``."""
        if m == n:
            return 0
        if m < n:
            return self.beta.get((m, n), 0)
        return -self.beta.get((n, m), 0)

    def __mul__(self, other: "Class2Form") -> "Class2Form":
        k = self.rank
        beta = dict(self.beta)
        for key, v in other.beta.items():
            beta[key] = beta.get(key, 0) + v
        # x^a x^a' -> x^(a+a'): moving x_i^{a'_i} left past x_j^{a_j}, j > i
        for i in range(1, k + 1):
            ai = other.a[i - 1]
            if not ai:
                continue
            for j in range(i + 1, k + 1):
                aj = self.a[j - 1]
                if aj:
                    beta[(i, j)] = beta.get((i, j), 0) - aj * ai
        a = tuple(x + y for x, y in zip(self.a, other.a))
        return Class2Form(k, a, beta)

    def inverse(self) -> "Class2Form":
        k = self.rank
        beta = {}
        for m in range(1, k + 1):
            for n in range(m + 1, k + 1):
                beta[(m, n)] = -self.beta.get((m, n), 0) - self.a[m - 1] * self.a[n - 1]
        return Class2Form(k, tuple(-x for x in self.a), beta)

    def __pow__(self, n: int) -> "Class2Form":
        base = self if n >= 0 else self.inverse()
        n = abs(n)
        result = Class2Form.identity(self.rank)
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def commutator(self, other: "Class2Form") -> "Class2Form":
        return self * other * self.inverse() * other.inverse()

    def reduced(self, q: int) -> "Class2Form":
        return Class2Form(
            self.rank,
            tuple(x % q for x in self.a),
            {key: v % q for key, v in self.beta.items()},
        )

    def is_commutator(self) -> bool:
        return not any(self.a)

    def reconstruction_word(self) -> Word:
        """``x1^a1 ... xk^ak prod [xm, xn]^beta`` as a word of ``F_k``."""
        w = Word(self.rank, tuple((i + 1, e) for i, e in enumerate(self.a)))
        for (m, n), v in self.beta.items():
            w = w * commutator_word(self.rank, m, n, v)
        return w

    def describe(self) -> str:
        parts = [f"a=({', '.join(map(str, self.a))})"]
        parts.append(
            "beta={" + ", ".join(f"{m}{n}: {v}" for (m, n), v in self.beta.items()) + "}"
        )
        return " ".join(parts)


def class2_normal_form(w: Word) -> Class2Form:
    """Collect ``w`` left to right into its class-2 normal form.

    Appending ``x_g^e`` to ``x^a c`` moves it left past ``x_j^{a_j}`` for
    every ``j > g``, depositing ``[x_j, x_g]^{a_j e} = [x_g, x_j]^{-a_j e}``.
    Weight-3 commutators produced by the move are dropped.
    """
    k = w.rank
    a = [0] * k
    beta: dict[tuple[int, int], int] = {}
    for g, e in w.syllables:
        for j in range(g + 1, k + 1):
            if a[j - 1]:
                beta[(g, j)] = beta.get((g, j), 0) - a[j - 1] * e
        a[g - 1] += e
    return Class2Form(k, tuple(a), beta)


# --- substitutions -----------------------------------------------------------

FREE_KINDS = ("swap", "cycle", "invert", "right-multiply")
NIELSEN_KINDS = FREE_KINDS + ("power-by-unit", "central-tweak", "identity")


@dataclass(frozen=True)
class Substitution:
    """Endomorphism ``x_i -> images[i-1]`` of ``F_rank`` with inverse data.

    ``validity`` is ``"free-automorphism"`` for the Nielsen kinds and
    ``"FkG-automorphism"`` for unit powers and central tweaks; the latter
    are only invertible relative to groups of exponent dividing ``p**E``.
    """

    rank: int
    images: tuple[Word, ...]
    kind: str
    validity: str
    params: tuple = ()
    inverse_images: tuple[Word, ...] = ()
    p: int | None = None
    E: int | None = None

    def image(self, i: int) -> Word:
        return self.images[i - 1]

    def inverse(self) -> "Substitution":
        return Substitution(
            self.rank, self.inverse_images, self.kind, self.validity,
            self.params, self.images, self.p, self.E,
        )

    def describe(self) -> str:
        """Changed images in the word grammar, e.g. ``x2 -> x2 x3^-2``."""
        k = self.kind
        if k == "central-tweak":
            i, a, b, m = self.params
            img = f"x{i} [x{a},x{b}]" + ("" if m == 1 else f"^{m}")
            return f"x{i} -> {img}"
        items = []
        for i, img in enumerate(self.images, 1):
            if img != Word.generator(self.rank, i):
                items.append(f"x{i} -> {render_word(img)}")
        return "; ".join(items) if items else "id"


def _identity_images(rank):
    return tuple(Word.generator(rank, i) for i in range(1, rank + 1))


def _check_index(rank, *idx):
    for i in idx:
        if not 1 <= i <= rank:
            raise SubstitutionError(f"generator index {i} out of range 1..{rank}")


def make_nielsen(kind: str, params, rank: int, p: int | None = None,
                 E: int | None = None) -> Substitution:
    """Build a substitution of the given ``kind``.

    ``params`` per kind:

    * ``swap``: ``(i, j)``
    * ``cycle``: ``()``; x1 -> x2 -> ... -> xk -> x1
    * ``invert``: ``(i,)``
    * ``right-multiply``: ``(i, j, c)``; xi -> xi xj^c, ``c`` defaults to 1
    * ``power-by-unit``: ``(i, gamma)`` with ``p`` and ``E`` given
    * ``central-tweak``: ``(i, a, b, m)``; xi -> xi [xa, xb]^m
    """
    params = tuple(params)
    ident = list(_identity_images(rank))
    images = list(ident)
    inverse = list(ident)
    validity = "free-automorphism"
    if kind == "identity":
        params = ()
    elif kind == "swap":
        i, j = params
        _check_index(rank, i, j)
        if i == j:
            raise SubstitutionError("swap needs two distinct generators")
        images[i - 1], images[j - 1] = ident[j - 1], ident[i - 1]
        inverse = list(images)
    elif kind == "cycle":
        params = ()
        for i in range(1, rank + 1):
            images[i - 1] = ident[i % rank]
            inverse[i % rank] = ident[i - 1]
    elif kind == "invert":
        (i,) = params
        _check_index(rank, i)
        images[i - 1] = ident[i - 1].inverse()
        inverse = list(images)
    elif kind == "right-multiply":
        if len(params) == 2:
            params = params + (1,)
        i, j, c = params
        _check_index(rank, i, j)
        if i == j or c == 0:
            raise SubstitutionError("right-multiply needs i != j and c != 0")
        images[i - 1] = Word(rank, ((i, 1), (j, c)))
        inverse[i - 1] = Word(rank, ((i, 1), (j, -c)))
    elif kind == "power-by-unit":
        i, gamma = params
        _check_index(rank, i)
        if p is None or E is None or E < 1:
            raise SubstitutionError("power-by-unit needs a (p, E) context")
        q = p ** E
        if gcd(gamma, p) != 1:
            raise SubstitutionError(f"exponent {gamma} is not a unit modulo {p}^{E}")
        images[i - 1] = ident[i - 1] ** gamma
        inverse[i - 1] = ident[i - 1] ** pow(gamma, -1, q)
        validity = "FkG-automorphism"
    elif kind == "central-tweak":
        i, a, b, m = params
        _check_index(rank, i, a, b)
        images[i - 1] = ident[i - 1] * commutator_word(rank, a, b, m)
        inverse[i - 1] = ident[i - 1] * commutator_word(rank, a, b, -m)
        validity = "FkG-automorphism"
    else:
        raise SubstitutionError(f"unknown substitution kind {kind!r}")
    return Substitution(rank, tuple(images), kind, validity, params,
                        tuple(inverse), p, E)


_IMG = re.compile(r"\s*x(\d+)\s*->\s*(.*?)\s*$")


def parse_substitution(text: str, rank: int, p: int | None = None,
                       E: int | None = None) -> Substitution:
    """Inverse of ``f"{s.kind}: {s.describe()}"``."""
    kind, _, body = text.partition(":")
    kind = kind.strip()
    body = body.strip()
    if kind not in NIELSEN_KINDS:
        raise SubstitutionError(f"unknown substitution kind {kind!r}")
    images: dict[int, str] = {}
    if body != "id":
        for part in body.split(";"):
            m = _IMG.match(part)
            if not m:
                raise SubstitutionError(f"cannot parse image {part!r}")
            images[int(m.group(1))] = m.group(2)
    if kind in ("identity", "cycle"):
        params: tuple = ()
    elif kind == "swap":
        params = tuple(sorted(images))
    elif kind == "invert":
        params = tuple(images)
    elif kind == "right-multiply":
        (i, img), = images.items()
        w = parse_word(img, rank)
        (_, _), (j, c) = w.syllables
        params = (i, j, c)
    elif kind == "power-by-unit":
        (i, img), = images.items()
        ((_, gamma),) = parse_word(img, rank).syllables
        params = (i, gamma)
        if p is not None and E is not None and gcd(gamma, p) != 1:
            # kept so that verification can reject the step by index
            images_ = list(_identity_images(rank))
            images_[i - 1] = Word.generator(rank, i, gamma)
            return Substitution(rank, tuple(images_), kind, "FkG-automorphism",
                                params, (), p, E)
    else:
        (i, img), = images.items()
        m = re.fullmatch(r"x(\d+) \[x(\d+),x(\d+)\](?:\^(-?\d+))?", img)
        if not m:
            raise SubstitutionError(f"cannot parse central tweak {img!r}")
        params = (i, int(m.group(2)), int(m.group(3)), int(m.group(4) or 1))
    s = make_nielsen(kind, params, rank, p, E)
    if s.describe() != (body or "id"):
        raise SubstitutionError(f"non-canonical substitution text {text!r}")
    return s


def substitute(w: Word, s: Substitution) -> Word:
    if s.rank != w.rank:
        raise SubstitutionError(f"rank mismatch: word {w.rank}, substitution {s.rank}")
    out: list[tuple[int, int]] = []
    for g, e in w.syllables:
        img = s.images[g - 1]
        out.extend((img ** e).syllables)
    return Word(w.rank, tuple(out))


def compose(s2: Substitution, s1: Substitution) -> Substitution:
    """The substitution ``s2 . s1`` (apply ``s1`` first)."""
    if s1.rank != s2.rank:
        raise SubstitutionError("rank mismatch")
    images = tuple(substitute(img, s2) for img in s1.images)
    inverse = tuple(substitute(img, s1.inverse()) for img in s2.inverse_images)
    validity = ("free-automorphism"
                if s1.validity == s2.validity == "free-automorphism"
                else "FkG-automorphism")
    return Substitution(s1.rank, images, "composite", validity, (), inverse,
                        s1.p or s2.p, s1.E or s2.E)


def substitute_form(f: Class2Form, s: Substitution, q: int | None = None) -> Class2Form:
    """Apply ``s`` to a class-2 form, optionally reducing modulo ``q``.

    Agrees with ``class2_normal_form(substitute(w, s))`` because every
    endomorphism of ``F_k`` maps ``gamma_3(F_k)`` into itself.
    """
    if s.rank != f.rank:
        raise SubstitutionError("rank mismatch")
    imgs = [class2_normal_form(img) for img in s.images]
    if q is not None:
        imgs = [g.reduced(q) for g in imgs]
    result = Class2Form.identity(f.rank)
    for i, e in enumerate(f.a):
        if e:
            result = result * imgs[i] ** e
            if q is not None:
                result = result.reduced(q)
    for (m, n), v in f.beta.items():
        result = result * imgs[m - 1].commutator(imgs[n - 1]) ** v
        if q is not None:
            result = result.reduced(q)
    return result
