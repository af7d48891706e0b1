"""Exact word-map distributions by fiber enumeration, and the probability bounds.

``P_{w,G}(g) = |w^{-1}(g)| / |G|^k`` is computed by evaluating ``w`` on every
tuple of ``G^k`` in lexicographic order.  All probabilities are
:class:`fractions.Fraction`; sampled estimates live in :class:`SampledDist`
and never feed a verdict.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Sequence

import numpy as np

from . import _kernels
from .groups import TABLE_LIMIT, Element, Group, evaluate_word, structure_report
from .words import Word, chain_word

__all__ = [
    "DEFAULT_BUDGET",
    "BudgetExceeded",
    "Dist",
    "SampledDist",
    "SameResult",
    "BoundReport",
    "KernelBound",
    "budget_from_env",
    "evaluation_cost",
    "exact_distribution",
    "sampled_distribution",
    "same_distribution",
    "bound_report",
    "chain_word",
    "kernel_lower_bound",
    "phi_maps",
    "evaluate_many",
]

DEFAULT_BUDGET = 5 * 10**8
_CHUNK = 1 << 16


class BudgetExceeded(RuntimeError):
    def __init__(self, required: int, budget: int):
        super().__init__(f"enumeration needs {required} word evaluations, budget is {budget}")
        self.required = required
        self.budget = budget


def budget_from_env() -> int:
    return int(os.environ.get("NILWORD_BUDGET", DEFAULT_BUDGET))


def evaluation_cost(G: Group, w: Word, k: int) -> int:
    """Tuples times syllables: long words on big groups are charged in full."""
    return G.order ** k * max(1, len(w.syllables))


@dataclass(frozen=True)
class Dist:
    group: Group
    k: int
    counts: np.ndarray

    @property
    def total(self) -> int:
        return self.group.order ** self.k

    def count(self, g: Element) -> int:
        return int(self.counts[self.group.index(g)])

    def probability(self, g: Element) -> Fraction:
        return Fraction(self.count(g), self.total)

    def probabilities(self) -> list[Fraction]:
        return [Fraction(int(c), self.total) for c in self.counts]

    def image(self) -> list[Element]:
        return [self.group.element(int(i)) for i in np.nonzero(self.counts)[0]]

    def image_size(self) -> int:
        return int(np.count_nonzero(self.counts))

    def is_uniform(self) -> bool:
        return bool((self.counts == self.counts[0]).all())

    def is_surjective(self) -> bool:
        return bool((self.counts > 0).all())

    def min_on_image(self) -> Fraction:
        return Fraction(int(self.counts[self.counts > 0].min()), self.total)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["element", "count", "probability"])
        for idx, c in enumerate(self.counts):
            fr = Fraction(int(c), self.total)
            writer.writerow([str(self.group.element(idx)), int(c),
                             f"{fr.numerator}/{fr.denominator}"])
        return buf.getvalue()


@dataclass(frozen=True)
class SampledDist:
    group: Group
    k: int
    counts: np.ndarray
    n_samples: int
    seed: int
    approximate: bool = True

    def estimate(self, g: Element) -> Fraction:
        return Fraction(int(self.counts[self.group.index(g)]), self.n_samples)

    def support(self) -> list[Element]:
        return [self.group.element(int(i)) for i in np.nonzero(self.counts)[0]]


def _syllable_arrays(G: Group, w: Word):
    e = G.exponent
    gens = np.array([g - 1 for g, _ in w.syllables], dtype=np.int64)
    exps = np.array([x % e for _, x in w.syllables], dtype=np.int64)
    return gens, exps


def _coords_eval(G: Group, w: Word, tuples: np.ndarray) -> np.ndarray:
    """Evaluate ``w`` on rows of element indices without a multiplication table."""
    M = tuples.shape[0]
    rn = np.zeros((M, G.d), dtype=np.int64)
    rz = np.zeros((M, G.s), dtype=np.int64)
    cache = {}
    for g, e in w.syllables:
        if g not in cache:
            cache[g] = G.coords(tuples[:, g - 1])
        n, z = G.pow_arrays(*cache[g], e % G.exponent)
        rn, rz = G.mul_arrays(rn, rz, n, z)
    return G.indices(rn, rz)


def evaluate_many(G: Group, w: Word, tuples: np.ndarray) -> np.ndarray:
    """Element indices of ``w`` evaluated on each row of ``tuples`` (indices)."""
    tuples = np.asarray(tuples, dtype=np.int64).reshape(-1, w.rank)
    if G.order > TABLE_LIMIT:
        return _coords_eval(G, w, tuples)
    mul, powt = G.mul_table, G.pow_table
    acc = np.zeros(tuples.shape[0], dtype=np.int64)
    for g, e in w.syllables:
        acc = mul[acc, powt[tuples[:, g - 1], e % G.exponent]]
    return acc


def _count_coords(G, w, k, start, stop):
    counts = np.zeros(G.order, dtype=np.int64)
    radix = G.order ** np.arange(k - 1, -1, -1, dtype=object)
    for lo in range(start, stop, _CHUNK):
        hi = min(stop, lo + _CHUNK)
        t = np.arange(lo, hi, dtype=np.int64)
        cols = [(t // int(r)) % G.order for r in radix]
        tuples = np.stack(cols, axis=1) if cols else np.zeros((hi - lo, 0), np.int64)
        counts += np.bincount(_coords_eval(G, w, tuples), minlength=G.order)
    return counts


def _count_range(G, w, k, start, stop):
    if G.order > TABLE_LIMIT:
        return _count_coords(G, w, k, start, stop)
    counts = np.zeros(G.order, dtype=np.int64)
    gens, exps = _syllable_arrays(G, w)
    _kernels.count_range(G.mul_table, G.pow_table, gens, exps, k, G.order,
                         start, stop, counts)
    return counts


def exact_distribution(G: Group, w: Word, k: int | None = None,
                       budget: int | None = None, jobs: int = 1) -> Dist:
    """Exact fiber counts of ``w`` on ``G^k`` (``k`` defaults to ``w.rank``).

    The tuple index space is split into ``jobs`` contiguous ranges whose
    count vectors are summed, so the result does not depend on ``jobs``.
    """
    k = w.rank if k is None else k
    if k < w.rank:
        raise ValueError(f"k = {k} is smaller than the word rank {w.rank}")
    budget = budget_from_env() if budget is None else budget
    cost = evaluation_cost(G, w, k)
    if cost > budget:
        raise BudgetExceeded(cost, budget)
    total = G.order ** k
    if not w.syllables:
        counts = np.zeros(G.order, dtype=np.int64)
        counts[0] = total
        return Dist(G, k, counts)
    if G.order <= TABLE_LIMIT:
        G.mul_table, G.pow_table  # materialize before threads share them
    jobs = max(1, min(jobs, total))
    bounds = [total * i // jobs for i in range(jobs + 1)]
    ranges = list(zip(bounds[:-1], bounds[1:]))
    if jobs == 1:
        parts = [_count_range(G, w, k, *ranges[0])]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda r: _count_range(G, w, k, *r), ranges))
    counts = np.zeros(G.order, dtype=np.int64)
    for part in parts:
        counts += part
    return Dist(G, k, counts)


def sampled_distribution(G: Group, w: Word, k: int | None, n_samples: int,
                         seed: int) -> SampledDist:
    """Estimate from ``n_samples`` uniform tuples drawn from a seeded PCG64 stream."""
    k = w.rank if k is None else k
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    counts = np.zeros(G.order, dtype=np.int64)
    done = 0
    while done < n_samples:
        m = min(_CHUNK, n_samples - done)
        tuples = rng.integers(0, G.order, size=(m, k), dtype=np.int64)
        vals = evaluate_many(G, w, tuples[:, : w.rank]) if w.syllables else np.zeros(m, np.int64)
        counts += np.bincount(vals, minlength=G.order)
        done += m
    return SampledDist(G, k, counts, n_samples, seed)


@dataclass(frozen=True)
class SameResult:
    equal: bool
    first_divergence: Element | None = None
    p1: Fraction | None = None
    p2: Fraction | None = None

    def __bool__(self):
        return self.equal


def same_distribution(G: Group, w1: Word, w2: Word, budget: int | None = None,
                      jobs: int = 1, dists: tuple[Dist, Dist] | None = None) -> SameResult:
    d1, d2 = dists or (exact_distribution(G, w1, budget=budget, jobs=jobs),
                       exact_distribution(G, w2, budget=budget, jobs=jobs))
    if d1.k == d2.k:
        diff = np.nonzero(d1.counts != d2.counts)[0]
    else:
        s1 = G.order ** (max(d1.k, d2.k) - d1.k)
        s2 = G.order ** (max(d1.k, d2.k) - d2.k)
        diff = [i for i in range(G.order)
                if int(d1.counts[i]) * s1 != int(d2.counts[i]) * s2]
    if len(diff) == 0:
        return SameResult(True)
    i = int(diff[0])
    return SameResult(False, G.element(i), Fraction(int(d1.counts[i]), d1.total),
                      Fraction(int(d2.counts[i]), d2.total))


@dataclass(frozen=True)
class BoundReport:
    group: str
    order: int
    derived_order: int
    min_prob_on_image: Fraction
    improved_bound: Fraction
    amit_bound: Fraction
    square_bound: Fraction | None
    improved_holds: bool
    amit_holds_on_image: bool
    square_holds: bool | None
    uniform: bool
    hypotheses: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        ok = self.improved_holds
        if self.square_holds is not None:
            ok = ok and self.square_holds
        if self.hypotheses.get("extraspecial"):
            ok = ok and self.amit_holds_on_image
        return ok


def _abelian_gcd(w: Word) -> int:
    sums: dict[int, int] = {}
    for g, e in w.syllables:
        sums[g] = sums.get(g, 0) + e
    return gcd(*sums.values()) if sums else 0


def bound_report(G: Group, w: Word, k: int | None = None, dist: Dist | None = None,
                 budget: int | None = None, jobs: int = 1) -> BoundReport:
    dist = dist or exact_distribution(G, w, k, budget=budget, jobs=jobs)
    rep = structure_report(G)
    m = dist.min_on_image()
    improved = Fraction(1, rep.derived_order * rep.order)
    amit = Fraction(1, rep.order)
    odd_p = rep.is_p_group and rep.p != 2
    # the square bound needs x1^t0 in G', which fails exactly for primitive words
    primitive = bool(rep.is_p_group and _abelian_gcd(w) % rep.p != 0)
    square_applies = bool(odd_p and rep.gp_in_derived and not primitive)
    square = Fraction(1, rep.derived_order ** 2) if square_applies else None
    hyp = {
        "p_group": rep.is_p_group,
        "odd_p": odd_p,
        "gp_in_derived": bool(rep.gp_in_derived),
        "extraspecial": bool(odd_p and rep.is_extraspecial),
        "primitive": primitive,
    }
    return BoundReport(
        group=G.name,
        order=rep.order,
        derived_order=rep.derived_order,
        min_prob_on_image=m,
        improved_bound=improved,
        amit_bound=amit,
        square_bound=square,
        improved_holds=m >= improved,
        amit_holds_on_image=m >= amit,
        square_holds=(m >= square) if square is not None else None,
        uniform=dist.is_uniform(),
        hypotheses=hyp,
    )


# --- kernels of the slot-freezing homomorphisms ------------------------------------


@dataclass(frozen=True)
class KernelBound:
    g: Element
    ker_odd: int
    ker_even: int
    ker_psi: int | None

    @property
    def phi_bound(self) -> int:
        return self.ker_odd * self.ker_even

    @property
    def psi_bound(self) -> int | None:
        return None if self.ker_psi is None else self.ker_psi * self.ker_even


def phi_maps(G: Group, t: Sequence[int], witness: Sequence[Element]):
    """The maps obtained by freezing alternate slots of the chain word at ``witness``.

    Returns ``(phi_odd, phi_even, psi_odd)``; each takes a tuple of elements
    for the free slots (odd slots ``1, 3, ...`` or even slots ``2, 4, ...``).
    ``phi_odd`` is meant for a first argument in ``G'``; ``psi_odd`` for
    arbitrary arguments.
    """
    w = chain_word(t)
    k = len(t)
    g1_inv_t0 = G.power(G.inverse(witness[0]), t[0])

    def fill(values, parity):
        slots = list(witness)
        it = iter(values)
        for i in range(parity, k, 2):
            slots[i] = next(it)
        return slots

    def odd(ys):
        return evaluate_word(G, w, fill(ys, 0))

    def even(ys):
        return G.multiply(g1_inv_t0, evaluate_word(G, w, fill(ys, 1)))

    return odd, even, odd


def _kernel_size(G: Group, w: Word, witness_idx: np.ndarray, parity: int,
                 first_slot: np.ndarray | None, target: int, prefix: int | None,
                 budget: int) -> int:
    k = w.rank
    slots = []
    for i in range(k):
        if i % 2 == parity:
            if i == 0 and first_slot is not None:
                slots.append(first_slot)
            else:
                slots.append(np.arange(G.order, dtype=np.int64))
        else:
            slots.append(np.array([witness_idx[i]], dtype=np.int64))
    size = int(np.prod([len(s) for s in slots], dtype=object))
    if size * max(1, len(w.syllables)) > budget:
        raise BudgetExceeded(size * max(1, len(w.syllables)), budget)
    grids = np.meshgrid(*slots, indexing="ij")
    tuples = np.stack([g.ravel() for g in grids], axis=1)
    vals = evaluate_many(G, w, tuples)
    if prefix is not None:
        vals = G.mul_table[prefix, vals] if G.order <= TABLE_LIMIT else np.array(
            [G.index(G.multiply(G.element(prefix), G.element(int(v)))) for v in vals])
    return int(np.count_nonzero(vals == target))


def kernel_lower_bound(G: Group, t: Sequence[int], witness: Sequence[Element],
                       budget: int | None = None) -> KernelBound:
    """``|ker phi_odd| * |ker phi_even|`` (and the ``psi_odd`` variant) at a witness.

    ``phi_odd`` ranges over ``G' x G^{ceil(k/2)-1}`` on odd slots;
    ``phi_even`` over ``G^{floor(k/2)}`` on even slots, premultiplied by
    ``g1^{-t0}``.  ``psi_odd`` ranges over ``G^{ceil(k/2)}`` and is computed
    when ``p`` is odd, ``g^p`` lies in ``G'`` and ``t0 != 1``.

    The ``psi`` product is not always a lower bound for the fiber: for
    ``t = (0, 1, 1)`` with ``g2`` and ``g1 g3^-1`` central both kernels are
    everything, while the fiber over 1 is a proper subset of ``G^3``.
    """
    budget = budget_from_env() if budget is None else budget
    w = chain_word(t)
    if len(witness) != w.rank:
        raise ValueError("witness must have one element per variable")
    widx = np.array([G.index(x) for x in witness], dtype=np.int64)
    g = evaluate_word(G, w, list(witness))
    derived = np.array(sorted(G.index(x) for x in G.derived_subgroup), dtype=np.int64)
    ident = G.index(G.identity())
    # the odd map is a homomorphism, so its kernel is the fiber over 1 with odd slots free
    ker_odd = _kernel_size(G, w, widx, 0, derived, ident, None, budget)
    if w.rank >= 2:
        pre = G.index(G.power(G.inverse(witness[0]), t[0]))
        ker_even = _kernel_size(G, w, widx, 1, None, ident, pre, budget)
    else:
        ker_even = 1
    ker_psi = None
    rep = structure_report(G)
    if rep.is_p_group and rep.p != 2 and rep.gp_in_derived and t[0] != 1:
        ker_psi = _kernel_size(G, w, widx, 0, None, ident, None, budget)
    return KernelBound(g, ker_odd, ker_even, ker_psi)
