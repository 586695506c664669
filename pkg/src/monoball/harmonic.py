"""Characters, class-function Fourier analysis, induction, and monomiality certificates.

No representation matrices are built anywhere: for class functions every Fourier
coefficient is the scalar mu = (E_x f(x) chi(x)) / d, so the spectral radius of the
transform at an irreducible is just |mu|.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import CapExceededError, GroupValidationError
from .groups import (
    ConjugacyPartition,
    FiniteGroup,
    GroupSubset,
    Subgroup,
    SubgroupView,
    abelianization,
    conjugacy_classes,
    closure,
    enumerate_subgroups,
    subgroup_view,
)

TABLE_ORDER_CAP = 256
MONOMIAL_ORDER_CAP = 128
_DIM_RESIDUAL = 1e-6
_ORTHO_TOL = 1e-8
_CLASS_TOL = 1e-9
_EIG_RETRIES = 8


@dataclass(frozen=True, eq=False)
class ClassFunction:
    group: FiniteGroup
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != (self.group.order,):
            raise ValueError("class function needs one value per group element")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def class_constancy_defect(self) -> float:
        part = conjugacy_classes(self.group)
        worst = 0.0
        for cls in part.classes:
            vals = self.values[list(cls)]
            worst = max(worst, float(np.abs(vals - vals[0]).max()))
        return worst

    def is_class_function(self, tol: float = _CLASS_TOL) -> bool:
        return self.class_constancy_defect() <= tol

    def is_hermitian(self, tol: float = _CLASS_TOL) -> bool:
        inv = self.group.inv_table
        return bool(np.abs(self.values[inv] - np.conj(self.values)).max() <= tol)


@dataclass(frozen=True)
class LinearCharacter:
    """Degree-one character stored as exact rational phases, gamma(x) = e^{2 pi i q(x)}."""

    group: FiniteGroup
    phases: tuple[Fraction, ...]

    def phase(self, x: int) -> Fraction:
        return self.phases[x]

    def value(self, x: int) -> complex:
        q = self.phases[x]
        return cmath.exp(2j * math.pi * float(q))

    def as_values(self) -> np.ndarray:
        return np.array([self.value(x) for x in range(self.group.order)],
                        dtype=np.complex128)

    def as_class_function(self) -> ClassFunction:
        return ClassFunction(self.group, self.as_values())

    @property
    def is_trivial(self) -> bool:
        return all(q == 0 for q in self.phases)

    def add(self, other: "LinearCharacter") -> "LinearCharacter":
        if self.group is not other.group:
            raise ValueError("characters live on different groups")
        return LinearCharacter(
            self.group,
            tuple((a + b) % 1 for a, b in zip(self.phases, other.phases)),
        )

    def negate(self) -> "LinearCharacter":
        return LinearCharacter(self.group, tuple((-a) % 1 for a in self.phases))

    def verify_homomorphism(self) -> None:
        g = self.group
        if self.phases[g.identity] != 0:
            raise AssertionError("linear character must vanish at the identity")
        for x in range(g.order):
            for y in range(g.order):
                if (self.phases[x] + self.phases[y]) % 1 != self.phases[g.mul(x, y)]:
                    raise AssertionError(f"phase additivity fails at ({x},{y})")


@dataclass(frozen=True, eq=False)
class CharacterTable:
    group: FiniteGroup
    partition: ConjugacyPartition
    characters: tuple[ClassFunction, ...]
    dims: tuple[int, ...]
    seed: int

    @property
    def size(self) -> int:
        return len(self.characters)

    def entry(self, i: int) -> tuple[ClassFunction, int]:
        return self.characters[i], self.dims[i]

    def class_values(self, i: int) -> np.ndarray:
        reps = self.partition.representatives()
        return self.characters[i].values[list(reps)]


@dataclass(frozen=True, eq=False)
class FourierScalar:
    gamma: ClassFunction
    dim: int
    mu: complex

    @property
    def spec_rad(self) -> float:
        return abs(self.mu)


@dataclass(frozen=True, eq=False)
class MonomialCertificate:
    char_index: int
    dim: int
    matched: bool
    subgroup: Optional[GroupSubset]
    linear: Optional[LinearCharacter]


@dataclass(frozen=True, eq=False)
class LinearityScanRow:
    char_index: int
    dim: int
    spec_rad: float
    exceeds_threshold: bool


@dataclass(frozen=True, eq=False)
class LinearityScanReport:
    threshold: Fraction
    rows: tuple[LinearityScanRow, ...]
    hypothesis_violations: tuple[str, ...]
    consistent: bool


# ---------------------------------------------------------------------------
# linear characters


def linear_characters(group: FiniteGroup) -> list[LinearCharacter]:
    """All of Lin(G), pulled back from the abelianization, phases exact."""
    cached = group.__dict__.get("_linear_characters")
    if cached is not None:
        return list(cached)
    ab = abelianization(group)
    q = ab.quotient
    qn = q.order

    # grow a subgroup chain of the abelian quotient, extending characters stepwise
    sub_elems = [q.identity]
    sub_pos = {q.identity: 0}
    chars: list[list[Fraction]] = [[Fraction(0)]]  # phases indexed like sub_elems
    orders = q.element_orders
    while len(sub_elems) < qn:
        outside = [x for x in range(qn) if x not in sub_pos]
        y = max(outside, key=lambda x: (orders[x], -x))
        # relative order: least m with y^m inside the current subgroup
        m, p = 1, y
        while p not in sub_pos:
            p = q.mul(p, y)
            m += 1
        anchor = sub_pos[p]  # index of y^m in sub_elems
        new_elems = list(sub_elems)
        new_pos = dict(sub_pos)
        powers = [q.identity]
        for _ in range(m - 1):
            powers.append(q.mul(powers[-1], y))
        for j in range(1, m):
            for h in sub_elems:
                z = q.mul(h, powers[j])
                new_pos[z] = len(new_elems)
                new_elems.append(z)
        new_chars = []
        for lam in chars:
            base = lam[anchor]  # phase of y^m under lam
            for j in range(m):
                r = (base + j) / m
                ext = [Fraction(0)] * len(new_elems)
                for idx, h in enumerate(sub_elems):
                    ext[idx] = lam[idx]
                pos = len(sub_elems)
                for jj in range(1, m):
                    for idx in range(len(sub_elems)):
                        ext[pos] = (lam[idx] + jj * r) % 1
                        pos += 1
                new_chars.append(ext)
        sub_elems, sub_pos, chars = new_elems, new_pos, new_chars

    # reorder phases to quotient element index, then pull back through the projection
    out = []
    for lam in chars:
        q_phases = [Fraction(0)] * qn
        for idx, elem in enumerate(sub_elems):
            q_phases[elem] = lam[idx]
        phases = tuple(q_phases[ab.projection[x]] for x in range(group.order))
        out.append(LinearCharacter(group, phases))
    out.sort(key=lambda c: c.phases)
    group.__dict__["_linear_characters"] = tuple(out)
    return out


# ---------------------------------------------------------------------------
# character table


def _class_structure_counts(group: FiniteGroup, part: ConjugacyPartition) -> np.ndarray:
    k = len(part.classes)
    cls = np.asarray(part.class_of, dtype=np.int64)
    r = cls[:, None]
    s = cls[None, :]
    t = cls[group.mul_table]
    flat = ((r * k + s) * k + t).ravel()
    counts = np.bincount(flat, minlength=k ** 3).reshape(k, k, k)
    return counts


def character_table(group: FiniteGroup, seed: int = 0) -> CharacterTable:
    if group.order > TABLE_ORDER_CAP:
        raise CapExceededError(
            f"character table refused at order {group.order} > {TABLE_ORDER_CAP}"
        )
    cache = group.__dict__.setdefault("_char_tables", {})
    if seed in cache:
        return cache[seed]

    part = conjugacy_classes(group)
    k = len(part.classes)
    sizes = np.array(part.sizes, dtype=np.float64)
    counts = _class_structure_counts(group, part)
    # counts[r,s,t] = N_rst * |C_t|
    struct = counts / sizes[None, None, :]

    omega = None
    for attempt in range(_EIG_RETRIES):
        rng = np.random.default_rng(seed + attempt)
        coef = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        combo = np.tensordot(coef, struct, axes=(0, 0))
        eigvals, eigvecs = np.linalg.eig(combo)
        gap = np.abs(eigvals[:, None] - eigvals[None, :])
        np.fill_diagonal(gap, np.inf)
        scale = max(1.0, float(np.abs(eigvals).max()))
        if gap.min() / scale > 1e-10:
            omega = eigvecs / eigvecs[0, :]
            break
    if omega is None:
        raise ArithmeticError("class-matrix eigenvalues kept colliding after 8 seeds")

    n = group.order
    raw = []
    for col in range(k):
        v = omega[:, col]
        denom = float(np.sum(np.abs(v) ** 2 / sizes))
        d = math.sqrt(n / denom)
        d_int = round(d)
        if abs(d - d_int) >= _DIM_RESIDUAL or d_int < 1:
            raise ArithmeticError(f"character dimension {d} does not round to an integer")
        chi_on_classes = d_int * v / sizes
        raw.append((d_int, chi_on_classes))

    if sum(d * d for d, _ in raw) != n:
        raise ArithmeticError("sum of squared dimensions misses the group order")

    lin = linear_characters(group)
    reps = part.representatives()
    used = [False] * len(raw)
    ordered: list[tuple[int, np.ndarray]] = []
    for lam in lin:
        target = np.array([lam.value(g) for g in reps])
        best, best_err = None, None
        for i, (d, vals) in enumerate(raw):
            if used[i] or d != 1:
                continue
            err = float(np.abs(vals - target).max())
            if best is None or err < best_err:
                best, best_err = i, err
        if best is None or best_err > _DIM_RESIDUAL:
            raise ArithmeticError("a linear character is missing from the recovered table")
        used[best] = True
        ordered.append((1, target))  # exact phases replace the float row
    rest = [raw[i] for i in range(len(raw)) if not used[i]]
    rest.sort(key=lambda item: (
        item[0],
        tuple((round(z.real, 9), round(z.imag, 9)) for z in item[1]),
    ))
    ordered.extend(rest)

    class_of = np.asarray(part.class_of)
    characters = []
    dims = []
    for d, vals_on_classes in ordered:
        characters.append(ClassFunction(group, np.asarray(vals_on_classes)[class_of]))
        dims.append(d)
    table = CharacterTable(group, part, tuple(characters), tuple(dims), seed)

    gram = _char_gram(table)
    if float(np.abs(gram - np.eye(k)).max()) > _ORTHO_TOL:
        raise ArithmeticError("character rows are not orthonormal")
    cache[seed] = table
    return table


def _char_gram(table: CharacterTable) -> np.ndarray:
    sizes = np.array(table.partition.sizes, dtype=np.float64)
    reps = list(table.partition.representatives())
    rows = np.stack([c.values[reps] for c in table.characters])
    return (np.conj(rows) * sizes) @ rows.T / table.group.order


# ---------------------------------------------------------------------------
# transforms


def indicator(group: FiniteGroup, a: GroupSubset) -> ClassFunction:
    vals = np.zeros(group.order, dtype=np.complex128)
    vals[list(a)] = 1.0
    return ClassFunction(group, vals)


def constant_one(group: FiniteGroup) -> ClassFunction:
    return ClassFunction(group, np.ones(group.order, dtype=np.complex128))


def inner(f: ClassFunction, g: ClassFunction) -> complex:
    """E_x conj(f(x)) g(x); conjugate-linear in the first slot."""
    if f.group is not g.group:
        raise ValueError("inner product needs a common group")
    return complex(np.vdot(f.values, g.values) / f.group.order)


def convolve(f: ClassFunction, g: ClassFunction) -> ClassFunction:
    if f.group is not g.group:
        raise ValueError("convolve needs a common group")
    grp = f.group
    gathered = g.values[grp.mul_table[grp.inv_table, :]]   # [y, x] -> g(y^-1 x)
    vals = f.values @ gathered / grp.order
    out = ClassFunction(grp, vals)
    if not out.is_class_function(1e-9):
        raise AssertionError("convolution left the class-function space")
    return out


def fourier_scalar(f: ClassFunction, gamma: ClassFunction,
                   allow_general: bool = False) -> FourierScalar:
    """mu with hat f(gamma) = mu I; the character enters unconjugated."""
    if f.group is not gamma.group:
        raise ValueError("fourier_scalar needs a common group")
    d = int(round(gamma.values[gamma.group.identity].real))
    if d < 1:
        raise ValueError("gamma must be an irreducible character (positive dimension)")
    hermitian = f.is_hermitian()
    if not hermitian and not allow_general:
        raise ValueError("f is not hermitian; pass allow_general=True to force")
    mu = complex(np.mean(f.values * gamma.values)) / d
    if hermitian and abs(mu.imag) > 1e-9:
        raise AssertionError(f"hermitian input produced non-real mu = {mu}")
    return FourierScalar(gamma, d, mu)


def plancherel_check(f: ClassFunction, g: ClassFunction, seed: int = 0) -> float:
    if f.group is not g.group:
        raise ValueError("plancherel_check needs a common group")
    table = character_table(f.group, seed)
    lhs = inner(f, g)
    rhs = 0
    for chi, d in zip(table.characters, table.dims):
        mu_f = fourier_scalar(f, chi, allow_general=True).mu
        mu_g = fourier_scalar(g, chi, allow_general=True).mu
        rhs += d * d * np.conj(mu_f) * mu_g
    return abs(lhs - complex(rhs))


# ---------------------------------------------------------------------------
# induction


def induce_class_function(view: SubgroupView, f: ClassFunction) -> ClassFunction:
    """Average of the zero-extension over conjugations, scaled by the index."""
    if f.group is not view.group:
        raise ValueError("f must live on the subgroup view's standalone group")
    if not f.is_class_function(1e-9):
        raise ValueError("f is not constant on the subgroup's conjugacy classes")
    parent = view.parent
    ext = np.zeros(parent.order, dtype=np.complex128)
    for sub_idx, par_idx in enumerate(view.to_parent):
        ext[par_idx] = f.values[sub_idx]
    index = parent.order // view.group.order
    vals = index * ext[parent.conj_table].mean(axis=0)
    out = ClassFunction(parent, vals)
    d_sub = f.values[view.group.identity]
    if abs(d_sub - round(d_sub.real)) < 1e-9 and round(d_sub.real) >= 1:
        # induced dimension law for characters
        if abs(out.values[parent.identity] - index * d_sub) > 1e-9:
            raise AssertionError("induced dimension law failed")
    return out


def frobenius_residual(view: SubgroupView, f: ClassFunction, g: ClassFunction) -> float:
    """| <f, g|_H> - <f^G, g> | for f on H and g on G."""
    if g.group is not view.parent:
        raise ValueError("g must live on the parent group")
    restricted = ClassFunction(view.group, g.values[list(view.to_parent)])
    lhs = inner(f, restricted)
    rhs = inner(induce_class_function(view, f), g)
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# monomiality


def is_monomial(group: FiniteGroup, seed: int = 0,
                max_order_cap: int = MONOMIAL_ORDER_CAP) -> tuple[bool, list[MonomialCertificate]]:
    """Certify each irreducible as induced from a linear character of a subgroup."""
    if group.order > max_order_cap:
        raise CapExceededError(
            f"monomiality check refused at order {group.order} > {max_order_cap}"
        )
    table = character_table(group, seed)
    subs = enumerate_subgroups(group, max_order_cap)
    certs: list[MonomialCertificate] = []
    views: dict[int, SubgroupView] = {}
    all_ok = True
    for i, (chi, d) in enumerate(zip(table.characters, table.dims)):
        if d == 1:
            lam = _match_linear(group, chi)
            certs.append(MonomialCertificate(i, 1, True, GroupSubset.full(group), lam))
            continue
        if group.order % d:
            certs.append(MonomialCertificate(i, d, False, None, None))
            all_ok = False
            continue
        target_order = group.order // d
        found = None
        for sub in subs:
            if len(sub) != target_order:
                continue
            key = sub.elements.mask
            if key not in views:
                views[key] = subgroup_view(group, sub.elements)
            view = views[key]
            for lam in linear_characters(view.group):
                induced = induce_class_function(view, lam.as_class_function())
                if float(np.abs(induced.values - chi.values).max()) <= 1e-8:
                    found = (sub.elements, lam)
                    break
            if found:
                break
        if found:
            certs.append(MonomialCertificate(i, d, True, found[0], found[1]))
        else:
            certs.append(MonomialCertificate(i, d, False, None, None))
            all_ok = False
    return all_ok, certs


def _match_linear(group: FiniteGroup, chi: ClassFunction) -> LinearCharacter:
    for lam in linear_characters(group):
        if float(np.abs(lam.as_values() - chi.values).max()) <= 1e-6:
            return lam
    raise AssertionError("degree-one character missing from Lin(G)")


def is_hereditarily_monomial(group: FiniteGroup, seed: int = 0,
                             max_order_cap: int = MONOMIAL_ORDER_CAP
                             ) -> tuple[bool, Optional[GroupSubset]]:
    if group.order > max_order_cap:
        raise CapExceededError(
            f"hereditary monomiality refused at order {group.order} > {max_order_cap}"
        )
    for sub in enumerate_subgroups(group, max_order_cap):
        view = subgroup_view(group, sub.elements)
        ok, _ = is_monomial(view.group, seed, max_order_cap)
        if not ok:
            return False, sub.elements
    return True, None


# ---------------------------------------------------------------------------
# the high-value linearity scan


def high_value_linearity_check(group: FiniteGroup, s: GroupSubset, a: GroupSubset,
                               seed: int = 0) -> LinearityScanReport:
    """Scan for irreducibles whose indicator transform is larger than half P(S A)."""
    from .setops import product_set, set_predicates

    violations = []
    if group.identity not in s:
        violations.append("identity not in S")
    if len(closure(group, s.indices())) != group.order:
        violations.append("S does not generate the group")
    preds = set_predicates(a)
    if not preds.symmetric:
        violations.append("A is not symmetric")
    if not preds.normal:
        violations.append("A is not a union of conjugacy classes")

    threshold = Fraction(len(product_set(s, a)), group.order)
    table = character_table(group, seed)
    f = indicator(group, a)
    rows = []
    consistent = True
    for i, (chi, d) in enumerate(zip(table.characters, table.dims)):
        mu = fourier_scalar(f, chi, allow_general=True)
        exceeds = 2 * mu.spec_rad > float(threshold) + 1e-9
        rows.append(LinearityScanRow(i, d, mu.spec_rad, exceeds))
        if exceeds and d > 1:
            consistent = False
    return LinearityScanReport(threshold, tuple(rows), tuple(violations), consistent)
