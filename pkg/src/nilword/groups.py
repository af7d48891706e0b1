"""Finite class-2 groups presented as central extensions.

Elements are normal-form words ``g1^n1 ... gd^nd * z`` with ``0 <= n_i < m_i``
and ``z`` a vector in the central part ``Z/c1 x ... x Z/cs``.  The
presentation records ``[g_j, g_i]`` (``j > i``) and the tails ``g_i^{m_i}``,
both central.  Enumeration order is lexicographic on the exponent vector
``(n_1, ..., n_d, z_1, ..., z_s)``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from math import gcd, prod
from typing import Iterator, Mapping, Sequence

import numpy as np

from .words import Word

__all__ = [
    "GroupSpec",
    "Group",
    "Element",
    "GroupConsistencyError",
    "StructureReport",
    "build_group",
    "evaluate_word",
    "structure_report",
    "prime_factors",
]

# multiplication tables are only materialized up to this order
TABLE_LIMIT = 2200


class GroupConsistencyError(ValueError):
    def __init__(self, condition: str, detail: str):
        super().__init__(f"condition ({condition}) violated: {detail}")
        self.condition = condition
        self.detail = detail


@dataclass(frozen=True)
class GroupSpec:
    name: str
    noncentral: tuple[tuple[str, int], ...]
    central: tuple[tuple[str, int], ...] = ()
    # (j, i) with j > i, 1-based noncentral indices -> value of [g_j, g_i]
    commutator_table: Mapping[tuple[int, int], tuple[int, ...]] = field(default_factory=dict)
    # i -> central tail of g_i^{m_i}
    power_tails: Mapping[int, tuple[int, ...]] = field(default_factory=dict)


@dataclass(frozen=True)
class Element:
    n: tuple[int, ...]
    z: tuple[int, ...]

    def __str__(self):
        return " ".join(map(str, self.n)) + " | " + " ".join(map(str, self.z))


def prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


class Group:
    """A validated class-2 group; build instances with :func:`build_group`."""

    def __init__(self, spec: GroupSpec):
        self.spec = spec
        self.name = spec.name
        self.m = tuple(int(m) for _, m in spec.noncentral)
        self.c = tuple(int(c) for _, c in spec.central)
        self.d = len(self.m)
        self.s = len(self.c)
        self.order = prod(self.m) * prod(self.c)
        comm = np.zeros((max(self.d, 1), max(self.d, 1), max(self.s, 1)), dtype=np.int64)
        for (j, i), vec in spec.commutator_table.items():
            comm[j - 1, i - 1, : self.s] = vec
        self._comm = comm[:, :, : self.s]
        tails = np.zeros((max(self.d, 1), max(self.s, 1)), dtype=np.int64)
        for i, vec in spec.power_tails.items():
            tails[i - 1, : self.s] = vec
        self._tails = tails[: self.d, : self.s]
        self._cvec = np.array(self.c, dtype=np.int64)
        radices = self.m + self.c
        self.radices = radices
        strides = [1] * len(radices)
        for i in range(len(radices) - 2, -1, -1):
            strides[i] = strides[i + 1] * radices[i + 1]
        self._strides = np.array(strides, dtype=np.int64)

    def __repr__(self):
        return f"Group({self.name!r}, order={self.order})"

    # --- scalar arithmetic ---------------------------------------------------

    def identity(self) -> Element:
        return Element((0,) * self.d, (0,) * self.s)

    def _check(self, x: Element):
        if len(x.n) != self.d or len(x.z) != self.s:
            raise ValueError(f"element {x} does not belong to {self.name}")

    def multiply(self, x: Element, y: Element) -> Element:
        self._check(x)
        self._check(y)
        z = [a + b for a, b in zip(x.z, y.z)]
        for i in range(self.d):
            if y.n[i]:
                for j in range(i + 1, self.d):
                    if x.n[j]:
                        f = x.n[j] * y.n[i]
                        for t in range(self.s):
                            z[t] += self._comm[j, i, t] * f
        n = []
        for i in range(self.d):
            carry, r = divmod(x.n[i] + y.n[i], self.m[i])
            n.append(r)
            if carry:
                for t in range(self.s):
                    z[t] += self._tails[i, t] * carry
        return Element(tuple(n), tuple(int(v) % c for v, c in zip(z, self.c)))

    def central(self, z: Sequence[int]) -> Element:
        return Element((0,) * self.d, tuple(int(v) % c for v, c in zip(z, self.c)))

    def inverse(self, x: Element) -> Element:
        y0 = Element(tuple((-v) % m for v, m in zip(x.n, self.m)), (0,) * self.s)
        r = self.multiply(x, y0)
        return self.multiply(y0, self.central([-v for v in r.z]))

    def power(self, x: Element, n: int) -> Element:
        if n < 0:
            x, n = self.inverse(x), -n
        result = self.identity()
        while n:
            if n & 1:
                result = self.multiply(result, x)
            x = self.multiply(x, x)
            n >>= 1
        return result

    def commutator(self, x: Element, y: Element) -> Element:
        return self.multiply(
            self.multiply(x, y), self.multiply(self.inverse(x), self.inverse(y))
        )

    def generators(self) -> list[Element]:
        gens = []
        for i in range(self.d):
            n = [0] * self.d
            n[i] = 1
            gens.append(Element(tuple(n), (0,) * self.s))
        for t in range(self.s):
            z = [0] * self.s
            z[t] = 1
            gens.append(Element((0,) * self.d, tuple(z)))
        return gens

    # --- enumeration ---------------------------------------------------------

    def index(self, x: Element) -> int:
        return int(np.dot(np.array(x.n + x.z, dtype=np.int64), self._strides))

    def element(self, idx: int) -> Element:
        coords = []
        for r in reversed(self.radices):
            idx, v = divmod(idx, r)
            coords.append(v)
        coords.reverse()
        return Element(tuple(coords[: self.d]), tuple(coords[self.d:]))

    def elements(self) -> Iterator[Element]:
        for idx in range(self.order):
            yield self.element(idx)

    def random_element(self, rng: random.Random) -> Element:
        return self.element(rng.randrange(self.order))

    # --- vectorized arithmetic on (N, d) / (N, s) coordinate arrays -----------

    def all_coords(self) -> tuple[np.ndarray, np.ndarray]:
        idx = np.arange(self.order, dtype=np.int64)
        return self.coords(idx)

    def coords(self, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        cols = []
        rem = np.asarray(idx, dtype=np.int64)
        for r in reversed(self.radices):
            cols.append(rem % r)
            rem = rem // r
        cols.reverse()
        full = np.stack(cols, axis=1) if cols else np.zeros((len(idx), 0), np.int64)
        return full[:, : self.d], full[:, self.d:]

    def indices(self, n: np.ndarray, z: np.ndarray) -> np.ndarray:
        return np.concatenate([n, z], axis=1) @ self._strides

    def mul_arrays(self, n1, z1, n2, z2):
        z = z1 + z2
        for i in range(self.d):
            for j in range(i + 1, self.d):
                if self._comm[j, i].any():
                    z = z + np.outer(n1[:, j] * n2[:, i], self._comm[j, i])
        nsum = n1 + n2
        carry = nsum // np.array(self.m, dtype=np.int64)
        n = nsum - carry * np.array(self.m, dtype=np.int64)
        if self.s:
            z = z + carry @ self._tails
            z = z % self._cvec
        return n, z

    def pow_arrays(self, n, z, e: int):
        if e < 0:
            n, z = self.inv_arrays(n, z)
            e = -e
        rn = np.zeros_like(n)
        rz = np.zeros_like(z)
        while e:
            if e & 1:
                rn, rz = self.mul_arrays(rn, rz, n, z)
            n, z = self.mul_arrays(n, z, n, z)
            e >>= 1
        return rn, rz

    def inv_arrays(self, n, z):
        m = np.array(self.m, dtype=np.int64)
        n0 = (-n) % m
        z0 = np.zeros_like(z)
        _, rz = self.mul_arrays(n, z, n0, z0)
        return self.mul_arrays(n0, z0, np.zeros_like(n), (-rz) % self._cvec if self.s else rz)

    @cached_property
    def mul_table(self) -> np.ndarray:
        """``mul_table[i, j]`` is the index of ``element(i) * element(j)``."""
        if self.order > TABLE_LIMIT:
            raise ValueError(f"order {self.order} exceeds table limit {TABLE_LIMIT}")
        n, z = self.all_coords()
        N = self.order
        table = np.empty((N, N), dtype=np.int32)
        for i in range(N):
            rn, rz = self.mul_arrays(np.repeat(n[i:i + 1], N, 0),
                                     np.repeat(z[i:i + 1], N, 0), n, z)
            table[i] = self.indices(rn, rz)
        return table

    @cached_property
    def pow_table(self) -> np.ndarray:
        """``pow_table[i, e]`` is the index of ``element(i)**e``, ``0 <= e < exponent``."""
        n, z = self.all_coords()
        cols = [self.indices(*self.pow_arrays(n, z, e)) for e in range(self.exponent)]
        return np.stack(cols, axis=1).astype(np.int32)

    # --- invariants ----------------------------------------------------------

    @cached_property
    def exponent(self) -> int:
        n, z = self.all_coords()
        orders = np.zeros(self.order, dtype=np.int64)
        cn, cz = n.copy(), z.copy()
        k = 1
        while True:
            done = (cn == 0).all(axis=1) & (cz == 0).all(axis=1) & (orders == 0)
            orders[done] = k
            if (orders > 0).all():
                break
            cn, cz = self.mul_arrays(cn, cz, n, z)
            k += 1
        e = 1
        for o in np.unique(orders):
            e = e * int(o) // gcd(e, int(o))
        return e

    @cached_property
    def derived_subgroup(self) -> frozenset[Element]:
        gens = []
        for j in range(self.d):
            for i in range(j):
                gens.append(self.central(self._comm[j, i]))
        return frozenset(self.closure(gens))

    @property
    def derived_order(self) -> int:
        return len(self.derived_subgroup)

    @cached_property
    def center_mask(self) -> np.ndarray:
        n, z = self.all_coords()
        mask = np.ones(self.order, dtype=bool)
        for g in self.generators()[: self.d]:
            gn = np.repeat(np.array([g.n]), self.order, 0)
            gz = np.repeat(np.array([g.z], dtype=np.int64).reshape(1, -1), self.order, 0)
            an, az = self.mul_arrays(n, z, gn, gz)
            bn, bz = self.mul_arrays(gn, gz, n, z)
            mask &= (an == bn).all(axis=1) & (az == bz).all(axis=1)
        return mask

    @property
    def center_order(self) -> int:
        return int(self.center_mask.sum())

    def closure(self, gens: Sequence[Element]) -> set[Element]:
        """Subgroup generated by ``gens`` (breadth-first on right multiplication)."""
        ident = self.identity()
        seen = {ident}
        frontier = [ident]
        gens = [g for g in gens if g != ident]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.multiply(x, g)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return seen

    @property
    def is_abelian(self) -> bool:
        return self.derived_order == 1


def _vec(v, s):
    v = tuple(int(x) for x in v)
    if len(v) != s:
        raise GroupConsistencyError("syntax", f"central vector {v} must have length {s}")
    return v


def build_group(spec: GroupSpec, samples: int = 1000, seed: int = 0) -> Group:
    """Validate ``spec`` and return the :class:`Group` it presents.

    Checks: (a) ``[g_j, g_i]`` has order dividing ``m_i`` and ``m_j``;
    (b) associativity on all generator triples and ``samples`` seeded
    random triples; (c) the derived subgroup is central.
    """
    s = len(spec.central)
    d = len(spec.noncentral)
    for label, m in spec.noncentral + spec.central:
        if m < 2:
            raise GroupConsistencyError("syntax", f"order of {label} must be >= 2")
    for (j, i), v in spec.commutator_table.items():
        if not (1 <= i < j <= d):
            raise GroupConsistencyError("syntax", f"commutator key {(j, i)} needs j > i")
        _vec(v, s)
    for i, v in spec.power_tails.items():
        if not 1 <= i <= d:
            raise GroupConsistencyError("syntax", f"power tail for unknown generator {i}")
        _vec(v, s)
    G = Group(spec)
    c = G.c
    for (j, i), v in spec.commutator_table.items():
        for mult, who in ((G.m[i - 1], i), (G.m[j - 1], j)):
            if any((mult * x) % cj for x, cj in zip(v, c)):
                lj, li = spec.noncentral[j - 1][0], spec.noncentral[i - 1][0]
                raise GroupConsistencyError(
                    "a",
                    f"[{lj},{li}] = {v} has order not dividing m_{who} = {mult}, "
                    f"so [{spec.noncentral[who - 1][0]}^{mult}, ...] != 1",
                )
    gens = G.generators()
    triples = [(x, y, w) for x in gens for y in gens for w in gens]
    rng = random.Random(seed)
    triples += [tuple(G.random_element(rng) for _ in range(3)) for _ in range(samples)]
    for x, y, w in triples:
        lhs = G.multiply(G.multiply(x, y), w)
        rhs = G.multiply(x, G.multiply(y, w))
        if lhs != rhs:
            raise GroupConsistencyError("b", f"({x})({y})({w}): {lhs} != {rhs}")
    for x in gens:
        for y in gens:
            cm = G.commutator(x, y)
            if any(cm.n):
                raise GroupConsistencyError("c", f"[{x}, {y}] = {cm} is not central")
            for g in gens:
                if G.multiply(cm, g) != G.multiply(g, cm):
                    raise GroupConsistencyError("c", f"[{x}, {y}] does not commute with {g}")
    return G


def evaluate_word(G: Group, w: Word, values: Sequence[Element]) -> Element:
    if len(values) != w.rank:
        raise ValueError(f"word of rank {w.rank} needs {w.rank} values, got {len(values)}")
    acc = G.identity()
    for g, e in w.syllables:
        acc = G.multiply(acc, G.power(values[g - 1], e))
    return acc


@dataclass(frozen=True)
class StructureReport:
    name: str
    order: int
    derived_order: int
    center_order: int
    exponent: int
    is_p_group: bool
    p: int | None
    gp_in_derived: bool | None
    is_special: bool
    is_extraspecial: bool
    quotient_ge_derived: bool

    @property
    def quotient_order(self) -> int:
        return self.order // self.derived_order

    def lines(self) -> list[str]:
        return [
            f"group: {self.name}",
            f"|G| = {self.order}",
            f"|G'| = {self.derived_order}",
            f"|G/G'| = {self.quotient_order}",
            f"|Z(G)| = {self.center_order}",
            f"exp(G) = {self.exponent}",
            f"p-group: {str(self.is_p_group).lower()}"
            + (f" (p = {self.p})" if self.p else ""),
            f"g^p in G' for all g: {str(self.gp_in_derived).lower() if self.gp_in_derived is not None else 'n/a'}",
            f"special: {str(self.is_special).lower()}",
            f"extraspecial: {str(self.is_extraspecial).lower()}",
            f"|G/G'| >= |G'|: {str(self.quotient_ge_derived).lower()}",
            f"|G/G'| < |G'|: {str(not self.quotient_ge_derived).lower()}",
        ]


def structure_report(G: Group) -> StructureReport:
    primes = prime_factors(G.order)
    is_p = len(primes) == 1
    p = primes[0] if is_p else None
    derived = G.derived_subgroup
    derived_idx = np.array(sorted(G.index(x) for x in derived), dtype=np.int64)
    gp_in_derived = None
    is_special = False
    if is_p:
        n, z = G.all_coords()
        pn, pz = G.pow_arrays(n, z, p)
        powers = G.indices(pn, pz)
        gp_in_derived = bool(np.isin(powers, derived_idx).all())
        # Frattini subgroup of a p-group: G^p G'
        pgens = [G.power(g, p) for g in G.generators()] + list(derived)
        frattini = G.closure(pgens)
        center = {G.element(int(i)) for i in np.nonzero(G.center_mask)[0]}
        center_idx = np.array(sorted(G.index(x) for x in center), dtype=np.int64)
        center_elementary = all(G.power(x, p) == G.identity() for x in center)
        quotient_elementary = bool(np.isin(powers, center_idx).all())
        is_special = (
            G.order > 1
            and set(derived) == frattini == center
            and center_elementary
            and quotient_elementary
        )
    return StructureReport(
        name=G.name,
        order=G.order,
        derived_order=G.derived_order,
        center_order=G.center_order,
        exponent=G.exponent,
        is_p_group=is_p,
        p=p,
        gp_in_derived=gp_in_derived,
        is_special=is_special,
        is_extraspecial=is_special and G.center_order == p,
        quotient_ge_derived=G.order // G.derived_order >= G.derived_order,
    )
