"""Linear Bohr sets and the span/sumset calculus on degree-one characters.

All phases, radii and thresholds are exact rationals, so every ball membership
decision and every set identity here is exact, never tolerance-based.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .errors import CapExceededError, FalsifiedError, HypothesisError
from .groups import FiniteGroup, GroupSubset
from .harmonic import LinearCharacter, linear_characters
from .metric import PseudoMetricNorm, ball, validate_norm

SPAN_GUARD = 20


@dataclass(frozen=True)
class CharSet:
    """Finite set of degree-one characters over one group, canonically ordered."""

    group: FiniteGroup
    chars: tuple[LinearCharacter, ...]

    @classmethod
    def build(cls, group: FiniteGroup, chars: Iterable[LinearCharacter]) -> "CharSet":
        uniq = {}
        for c in chars:
            if c.group is not group:
                raise ValueError("character belongs to a different group")
            uniq[c.phases] = c
        ordered = tuple(uniq[p] for p in sorted(uniq))
        return cls(group, ordered)

    @classmethod
    def empty(cls, group: FiniteGroup) -> "CharSet":
        return cls(group, ())

    @classmethod
    def trivial(cls, group: FiniteGroup) -> "CharSet":
        e = LinearCharacter(group, (Fraction(0),) * group.order)
        return cls(group, (e,))

    def __len__(self) -> int:
        return len(self.chars)

    def __iter__(self):
        return iter(self.chars)

    def __contains__(self, c: LinearCharacter) -> bool:
        return any(c.phases == d.phases for d in self.chars)

    @property
    def contains_identity(self) -> bool:
        return any(c.is_trivial for c in self.chars)

    @property
    def symmetric(self) -> bool:
        return all(c.negate() in self for c in self.chars)

    def union(self, other: "CharSet") -> "CharSet":
        if self.group is not other.group:
            raise ValueError("character sets over different groups")
        return CharSet.build(self.group, self.chars + other.chars)

    def negate(self) -> "CharSet":
        return CharSet.build(self.group, tuple(c.negate() for c in self.chars))


def charset_sum(a: CharSet, b: CharSet) -> CharSet:
    if a.group is not b.group:
        raise ValueError("character sets over different groups")
    return CharSet.build(a.group, tuple(x.add(y) for x in a for y in b))


def kfold_charset(lam: CharSet, k: int) -> CharSet:
    if k < 1:
        raise ValueError("kfold_charset needs k >= 1")
    out = lam
    for _ in range(k - 1):
        out = charset_sum(out, lam)
    return out


def char_span(x: CharSet) -> CharSet:
    """All {-1,0,1}-combinations of the characters of X under phase addition."""
    if len(x) > SPAN_GUARD:
        raise CapExceededError(f"char_span refused for |X| = {len(x)} > {SPAN_GUARD}")
    group = x.group
    zero = LinearCharacter(group, (Fraction(0),) * group.order)
    combos = [zero]
    for c in x:
        neg = c.negate()
        combos = [base.add(step) for base in combos for step in (zero, c, neg)]
    return CharSet.build(group, combos)


# ---------------------------------------------------------------------------
# norms and balls


def phase_norm(q: Fraction) -> Fraction:
    """Distance of e^{2 pi i q} to 1 along the circle: min(q mod 1, 1 - q mod 1)."""
    q = q % 1
    return min(q, 1 - q)


def bohr_norm(charset: CharSet) -> PseudoMetricNorm:
    group = charset.group
    vals = []
    for g in range(group.order):
        if charset.chars:
            vals.append(max(phase_norm(c.phases[g]) for c in charset))
        else:
            vals.append(Fraction(0))
    rho = PseudoMetricNorm(group, tuple(vals), "bohr")
    report = validate_norm(rho)
    if not report.valid:
        raise AssertionError(f"bohr norm failed validation: {report.witnesses}")
    return rho


def linbohr(charset: CharSet, delta) -> GroupSubset:
    if delta < 0:
        raise ValueError("linbohr needs delta >= 0")
    return ball(bohr_norm(charset), delta)


def linbohr_squared(charset: CharSet, delta_sq: Fraction) -> GroupSubset:
    """{x : rho(x)^2 <= delta_sq}: exact membership for irrational radii sqrt(delta_sq)."""
    if delta_sq < 0:
        raise ValueError("linbohr_squared needs delta_sq >= 0")
    rho = bohr_norm(charset)
    members = [x for x in range(charset.group.order)
               if Fraction(rho.values[x]) ** 2 <= delta_sq]
    return GroupSubset.from_indices(charset.group, members)


# ---------------------------------------------------------------------------
# Corollary-style contraction


@dataclass(frozen=True, eq=False)
class ContractionReport:
    hypothesis_ok: bool
    k_delta: Fraction
    forward_inclusion: bool
    equal: bool
    lhs_size: int
    rhs_size: int
    witness: Optional[int]


def cor53_check(lam: CharSet, k: int, delta: Fraction) -> ContractionReport:
    """LinBohr(k Lambda, k delta) against LinBohr(Lambda, delta)."""
    if k < 1:
        raise ValueError("cor53_check needs k >= 1")
    delta = Fraction(delta)
    k_delta = k * delta
    hypothesis_ok = lam.contains_identity and k_delta < Fraction(1, 3)

    lhs = linbohr(kfold_charset(lam, k), k_delta)
    rhs = linbohr(lam, delta)
    forward = rhs.is_subset_of(lhs)     # triangle inequality: always expected
    equal = lhs.mask == rhs.mask
    witness = None
    if not equal:
        diff = (lhs.mask | rhs.mask) & ~(lhs.mask & rhs.mask)
        witness = (diff & -diff).bit_length() - 1
    if hypothesis_ok and not (equal and forward):
        raise FalsifiedError(
            "LinBohr(k*Lambda, k*delta) != LinBohr(Lambda, delta) under a valid hypothesis",
            ContractionReport(hypothesis_ok, k_delta, forward, equal,
                              len(lhs), len(rhs), witness),
        )
    return ContractionReport(hypothesis_ok, k_delta, forward, equal,
                             len(lhs), len(rhs), witness)


# ---------------------------------------------------------------------------
# growth of structured Bohr sets


@dataclass(frozen=True, eq=False)
class ChainStep:
    name: str
    holds: bool
    hypothesis_status: str   # "unconditional" | "holds" | "fails"
    note: str = ""


@dataclass(frozen=True, eq=False)
class BohrGrowthReport:
    hypothesis_ok: bool
    hypothesis_witness: Optional[tuple]
    delta: Fraction
    x_size: int
    t_size: int
    t_bound: int
    ratio: Fraction
    ratio_bound: int
    ratio_ok: bool
    steps: tuple[ChainStep, ...]

    @property
    def all_inclusions_ok(self) -> bool:
        return all(s.holds for s in self.steps)


def _signed_phase(q: Fraction) -> Fraction:
    q = q % 1
    return q if q <= Fraction(1, 2) else q - 1


def _round_half_up(q: Fraction) -> int:
    from math import floor
    return floor(q + Fraction(1, 2))


def prop51_check(gamma: CharSet, x: CharSet, delta: Fraction) -> BohrGrowthReport:
    """Replay the covering-by-translates growth bound for structured Bohr sets."""
    delta = Fraction(delta)
    if not gamma.symmetric or not gamma.contains_identity:
        raise HypothesisError("Gamma must be symmetric and contain the identity character")
    if not 0 < delta <= Fraction(1, 16):
        raise HypothesisError("delta must lie in (0, 2^-4]")
    if len(x) < 1:
        raise ValueError("X must contain at least one character")
    group = gamma.group

    span = char_span(x)
    # hypothesis: Gamma + Gamma inside Span(X) + Gamma, checked as exact char sets
    target = charset_sum(span, gamma)
    hypothesis_ok = True
    witness = None
    for a in gamma:
        for b in gamma:
            if a.add(b) not in target:
                hypothesis_ok = False
                witness = (a.phases, b.phases)
                break
        if not hypothesis_ok:
            break

    nx = len(x)
    grid_unit = delta / (4 * nx)
    grid_limit = 16 * nx

    big = linbohr(gamma.union(x), 2 * delta)
    small = linbohr(gamma.union(x), delta)
    ratio = Fraction(len(big), len(small))
    ratio_bound = (32 * nx + 1) ** nx

    # partition the big ball by rounded phase signatures on X; per signature
    # class the smallest element acts as the translate representative
    classes: dict[tuple[int, ...], int] = {}
    for g in big:
        sig = []
        for c in x.chars:
            k = _round_half_up(_signed_phase(c.phases[g]) / grid_unit)
            sig.append(max(-grid_limit, min(grid_limit, k)))
        key = tuple(sig)
        if key not in classes or g < classes[key]:
            classes[key] = g
    t_elems = sorted(classes.values())
    t_set = GroupSubset.from_indices(group, t_elems)
    t_bound = (2 * grid_limit + 1) ** nx

    from .setops import product_set

    inner1 = linbohr(gamma, 4 * delta) & linbohr(x, grid_unit * 2)  # delta / 2|X|
    step1 = big.is_subset_of(product_set(t_set, inner1))

    span8 = kfold_charset(span, 8)
    inner2 = linbohr(charset_sum(gamma, span8), 8 * delta)
    step2 = inner1.is_subset_of(inner2)

    inner3 = linbohr(kfold_charset(gamma, 8), 8 * delta) & linbohr(span8, 8 * delta)
    step3 = inner2.is_subset_of(inner3)
    step3_status = "holds" if hypothesis_ok else "fails"

    inner4 = linbohr(gamma, delta) & linbohr(x, delta)
    step4 = inner3.is_subset_of(inner4)
    contraction_status = "holds" if 8 * delta < Fraction(1, 3) else "fails"

    final_match = inner4.mask == small.mask

    steps = (
        ChainStep("ball covered by translates of the refined ball", step1, "unconditional"),
        ChainStep("refined ball inside the span-augmented ball", step2, "unconditional"),
        ChainStep("span-augmented ball inside the 8-fold balls", step3, step3_status,
                  "needs Gamma+Gamma inside Span(X)+Gamma"),
        ChainStep("8-fold contraction back to radius delta", step4, contraction_status,
                  "needs 8*delta < 1/3"),
        ChainStep("intersection equals the small ball", final_match, "unconditional"),
    )

    ratio_ok = ratio <= ratio_bound
    if hypothesis_ok and contraction_status == "holds" and not (ratio_ok and all(
            s.holds for s in steps)):
        raise FalsifiedError(
            "Bohr growth chain failed with all hypotheses in force",
            BohrGrowthReport(hypothesis_ok, witness, delta, nx, len(t_set), t_bound,
                             ratio, ratio_bound, ratio_ok, steps),
        )
    return BohrGrowthReport(hypothesis_ok, witness, delta, nx, len(t_set), t_bound,
                            ratio, ratio_bound, ratio_ok, steps)
