"""Exact measure computations on the tree space, in arbitrary-precision rationals.

Everything here is computed with ``fractions.Fraction``; no floating point
enters any value. Write ``alpha`` as a Fraction, int, or a decimal string
such as ``"0.3"`` (floats are rejected: ``Fraction(0.3)`` is not 3/10).

Measure algebra used throughout (``P_k = N_1 ... N_k``, ``N_k = k!``, and
per-length atom weights chosen so a length-k atom carries ``2**-k / P_k``):

* an open subtree rooted at a depth-k prefix has infinite-part mass
  ``alpha / P_k`` and finite-part mass ``(1-alpha) * 2**(1-k) / P_k``;
* the closed variant adjoins the root's ancestor, adding that ancestor's
  atom ``(1-alpha) * 2**-(k-1) / P_{k-1}`` (zero when the ancestor is the
  empty root, which carries no mass);
* summed over depths ``j >= k``, atom weights total ``2**(1-k)`` before the
  ``(1-alpha)`` factor.

Partitions are described symbolically as groups of isomorphic cells (a
shape, a depth, a multiplicity) because materializing ``P_k`` individual
cells is hopeless beyond tiny depths. Constructors check that group masses
plus any explicit residual add to exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .preiss import SeqPoint, branching, prefix_product

__all__ = [
    "ExactMeasure",
    "CellShapeError",
    "CellType",
    "CellGroup",
    "PartitionSpec",
    "as_exact",
    "atom_mass",
    "tail_atom_mass",
    "tail_atom_mass_partial",
    "mu_subtree",
    "mu_subtree_partial",
    "mu_subtree_infinite_part",
    "subtree_mass",
    "classify_impure_cell",
    "true_majority",
    "partition_error",
    "constant_partition",
    "ideal_partition",
    "canonical_net_partition",
    "inconsistent_partition",
    "besicovitch_ratio",
]

#: Alias: oracle values are plain Fractions in [0, 1].
ExactMeasure = Fraction


class CellShapeError(ValueError):
    """A Voronoi cell did not match any admissible impure shape."""


def as_exact(alpha) -> Fraction:
    """Normalize alpha to an exact Fraction; floats are refused."""
    if isinstance(alpha, float):
        raise TypeError(
            "pass alpha as a Fraction, int, or decimal string; floats are inexact"
        )
    val = Fraction(alpha)
    if not 0 < val < 1:
        raise ValueError("alpha must lie strictly between 0 and 1")
    return val


def atom_mass(depth: int, alpha) -> Fraction:
    """Mass of one finite point of the given depth (0 for the empty root)."""
    a = as_exact(alpha)
    if depth < 0:
        raise ValueError("negative depth")
    if depth == 0:
        return Fraction(0)
    return (1 - a) * Fraction(1, (1 << depth) * prefix_product(depth))


def tail_atom_mass(k: int) -> Fraction:
    """Total per-length atom weight at depths >= k (before the 1-alpha factor):
    ``sum_{j>=k} 2**-j = 2**(1-k)``."""
    if k < 1:
        raise ValueError("depths are 1-based")
    return Fraction(1, 1 << (k - 1))


def tail_atom_mass_partial(k: int, terms: int) -> Fraction:
    """Partial sum of the same series, for verifying the closed form."""
    return sum((Fraction(1, 1 << j) for j in range(k, k + terms)), Fraction(0))


def mu_subtree(k: int, alpha) -> Fraction:
    """Mass of the open subtree below any depth-k prefix:
    ``(alpha + (1-alpha) * 2**(1-k)) / P_k``."""
    a = as_exact(alpha)
    if k < 1:
        raise ValueError("depths are 1-based")
    return (a + (1 - a) * tail_atom_mass(k)) / prefix_product(k)


def mu_subtree_partial(k: int, alpha, terms: int) -> Fraction:
    """Direct summation form of :func:`mu_subtree` truncated after ``terms``
    descendant-depth layers; converges to the closed form from below."""
    a = as_exact(alpha)
    pk = prefix_product(k)
    finite = Fraction(1, (1 << k) * pk)  # the depth-k atom weight itself
    for j in range(1, terms + 1):
        # depth-(k+j) atoms under the prefix: count N_{k+1}...N_{k+j}
        count = prefix_product(k + j) // pk
        finite += count * Fraction(1, (1 << (k + j)) * prefix_product(k + j))
    return a / pk + (1 - a) * finite


def mu_subtree_infinite_part(k: int, alpha) -> Fraction:
    """Mass of the infinite-sequence (label-1) part of a depth-k subtree."""
    a = as_exact(alpha)
    return a / prefix_product(k)


def subtree_mass(level: int, alpha, closed: bool = False) -> Fraction:
    """Total mass of an open or closed subtree at the given depth."""
    total = mu_subtree(level, alpha)
    if closed:
        total += atom_mass(level - 1, alpha)
    return total


# ----------------------------------------------------------------------
# Impure-cell classification and exact majority votes
# ----------------------------------------------------------------------

_VARIANTS = ("Ia", "Ib", "IIa", "IIb")


@dataclass(frozen=True)
class CellType:
    """Shape of an impure Voronoi cell of a scale-``2**-k`` net.

    ``Ia``/``IIa`` live at depth k (open / closed), ``Ib``/``IIb`` at depth
    k+1. Closed means the subtree root's ancestor belongs to the cell.
    """

    variant: str
    k: int
    prefix: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown cell variant {self.variant!r}")
        if self.k < 1:
            raise ValueError("net scale index must be at least 1")

    @property
    def level(self) -> int:
        return self.k if self.variant in ("Ia", "IIa") else self.k + 1

    @property
    def closed(self) -> bool:
        return self.variant in ("IIa", "IIb")


def classify_impure_cell(net_scale_k: int, cell_points: Sequence[SeqPoint]) -> CellType:
    """Identify which of the four admissible shapes a sampled impure cell is.

    The cell must contain an infinite point z; all members must then lie in
    the closed depth-k subtree around z. Whether any member leaves the
    depth-(k+1) closed subtree decides the depth, and the presence of the
    corresponding ancestor decides open versus closed.
    """
    k = net_scale_k
    if k < 1:
        raise ValueError("net scale index must be at least 1")
    witnesses = [p for p in cell_points if p.is_infinite]
    if not witnesses:
        raise CellShapeError("cell has no infinite member; impure-cell analysis needs one")
    z = witnesses[0]
    base = z.prefix(k)
    child = z.prefix(k + 1)

    def in_closed(prefix: tuple[int, ...], p: SeqPoint) -> bool:
        l = len(prefix)
        if p.length >= l and p.prefix(l) == prefix:
            return True
        return p.length == l - 1 and p.prefix(l - 1) == prefix[: l - 1]

    outside_child = False
    has_base_ancestor = False  # the depth-(k-1) point
    has_child_ancestor = False  # the depth-k point
    for p in cell_points:
        if not in_closed(base, p):
            raise CellShapeError(
                f"member {p!r} falls outside the closed depth-{k} subtree of the witness"
            )
        if not in_closed(child, p):
            outside_child = True
        if p.length == k - 1:
            has_base_ancestor = True
        if p.length == k and not p.is_infinite and tuple(p.coords) == base:
            has_child_ancestor = True
    if outside_child:
        variant = "IIa" if has_base_ancestor else "Ia"
        return CellType(variant, k, prefix=base)
    variant = "IIb" if has_child_ancestor else "Ib"
    return CellType(variant, k, prefix=child)


def true_majority(cell_type: CellType, alpha) -> tuple[int, Fraction]:
    """Exact majority label of a cell shape, with its mass margin.

    Compares the infinite-part and finite-part masses exactly; a tie goes
    to the smaller label. No asymptotic shortcut: small-depth reversals are
    reported as computed.
    """
    a = as_exact(alpha)
    level = cell_type.level
    mass1 = mu_subtree_infinite_part(level, a)
    mass0 = mu_subtree(level, a) - mass1
    if cell_type.closed:
        mass0 += atom_mass(level - 1, a)
    label = 1 if mass1 > mass0 else 0
    return label, abs(mass1 - mass0)


# ----------------------------------------------------------------------
# Symbolic partitions and their exact error
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class CellGroup:
    """``count`` isomorphic disjoint cells with identical per-cell masses."""

    kind: str
    count: int
    label: int
    mass_label1: Fraction  # per-cell mass of infinite sequences
    mass_label0: Fraction  # per-cell mass of finite sequences
    diameter: Fraction
    level: int | None = None

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("empty cell group")
        if self.label not in (0, 1):
            raise ValueError("partition labels are binary here")
        if self.mass_label1 < 0 or self.mass_label0 < 0:
            raise ValueError("negative mass")


@dataclass(frozen=True)
class PartitionSpec:
    """A labeled partition of the space, described by cell groups.

    ``residual_*`` list the exactly computed mass of any region the groups
    deliberately leave uncovered; the residual carries no label and
    contributes nothing to :func:`partition_error`.
    """

    alpha: Fraction
    groups: tuple[CellGroup, ...]
    residual_mass_label1: Fraction = Fraction(0)
    residual_mass_label0: Fraction = Fraction(0)
    note: str = ""

    @property
    def total_mass(self) -> Fraction:
        total = self.residual_mass_label1 + self.residual_mass_label0
        for g in self.groups:
            total += g.count * (g.mass_label1 + g.mass_label0)
        return total

    @property
    def max_cell_diameter(self) -> Fraction:
        return max(g.diameter for g in self.groups)


def _checked(spec: PartitionSpec) -> PartitionSpec:
    if spec.total_mass != 1:
        raise AssertionError(
            f"partition masses total {spec.total_mass}, not 1: construction bug"
        )
    return spec


def partition_error(spec: PartitionSpec) -> Fraction:
    """Exact mass mislabeled by the partition's cells: a label-1 cell errs on
    its finite part, a label-0 cell on its infinite part."""
    err = Fraction(0)
    for g in spec.groups:
        err += g.count * (g.mass_label0 if g.label == 1 else g.mass_label1)
    return err


def constant_partition(alpha, label: int = 0) -> PartitionSpec:
    """One cell covering everything, with the given label."""
    a = as_exact(alpha)
    group = CellGroup(
        kind="whole_space",
        count=1,
        label=label,
        mass_label1=a,
        mass_label0=1 - a,
        diameter=Fraction(1),
    )
    return _checked(PartitionSpec(alpha=a, groups=(group,)))


def ideal_partition(alpha) -> PartitionSpec:
    """The zero-error partition: infinite sequences 1, finite sequences 0."""
    a = as_exact(alpha)
    groups = (
        CellGroup("label1_set", 1, 1, a, Fraction(0), Fraction(1)),
        CellGroup("label0_set", 1, 0, Fraction(0), 1 - a, Fraction(1)),
    )
    return _checked(PartitionSpec(alpha=a, groups=groups))


def canonical_net_partition(k: int, alpha) -> PartitionSpec:
    """The Voronoi partition of the canonical scale-``2**-k`` net of the whole
    space, with exact true-majority labels.

    The canonical net takes every finite point of depth <= k-2 plus every
    finite point of depth exactly k. Its impure cells are one closed
    depth-k subtree per depth-(k-1) parent (the parent ties to its first
    child) and open depth-k subtrees for the remaining anchors; every
    shallower anchor is a pure singleton.
    """
    a = as_exact(alpha)
    if k < 1:
        raise ValueError("net scale index must be at least 1")
    pk, pk1 = prefix_product(k), prefix_product(k - 1)
    diam = Fraction(1, 1 << (k - 1))
    mass1 = mu_subtree_infinite_part(k, a)
    open_mass0 = mu_subtree(k, a) - mass1
    closed_mass0 = open_mass0 + atom_mass(k - 1, a)
    closed_label, _ = true_majority(CellType("IIa", k), a)
    open_label, _ = true_majority(CellType("Ia", k), a)
    groups = [
        CellGroup("closed_subtree", pk1, closed_label, mass1, closed_mass0, diam, level=k)
    ]
    if pk > pk1:
        groups.append(
            CellGroup("open_subtree", pk - pk1, open_label, mass1, open_mass0, diam, level=k)
        )
    for d in range(0, k - 1):
        groups.append(
            CellGroup(
                "atom", prefix_product(d), 0, Fraction(0), atom_mass(d, a) if d else Fraction(0),
                Fraction(0), level=d,
            )
        )
    return _checked(PartitionSpec(alpha=a, groups=tuple(groups)))


def inconsistent_partition(k: int, truncation_l: int, alpha) -> PartitionSpec:
    """Vanishing-diameter partition whose impure cells are all closed subtrees.

    Anchors: every finite point of depth <= k-1, plus, for each stage
    m = 1..l, the depth-(k+m) points whose coordinates after depth k avoid
    the value 1 until an exact 1 at depth k+m. Each stage-m anchor owns the
    closed subtree below it (diameter ``2**-(k+m-1)`` <= ``2**-k``), which
    votes 0, so the infinite sequences it captures are all mislabeled.

    Sequences with no coordinate 1 anywhere in depths k+1..k+l are captured
    by no closed cell; they are returned as the explicit residual. Their
    mass is ``prod_{j<=l} (1 - 1/N_{k+j})`` of the relevant parts, which for
    factorial branching stays close to 1, so the mislabeled mass grows with
    l yet approaches ``alpha`` only in the vanishing-branching limit; see
    the package notes on this construction.
    """
    a = as_exact(alpha)
    if k < 1 or truncation_l < 1:
        raise ValueError("need k >= 1 and truncation >= 1")
    groups = []
    for d in range(0, k):
        groups.append(
            CellGroup(
                "atom", prefix_product(d), 0, Fraction(0), atom_mass(d, a) if d else Fraction(0),
                Fraction(0), level=d,
            )
        )
    survive = Fraction(1)  # probability the 1-avoiding pattern persists
    for m in range(1, truncation_l + 1):
        level = k + m
        count = prefix_product(k)
        for j in range(1, m):
            count *= branching(k + j) - 1
        mass1 = mu_subtree_infinite_part(level, a)
        mass0 = mu_subtree(level, a) - mass1 + atom_mass(level - 1, a)
        label, _ = true_majority(CellType("IIb", level - 1), a)
        groups.append(
            CellGroup(
                "closed_subtree", count, label, mass1, mass0,
                Fraction(1, 1 << (level - 1)), level=level,
            )
        )
        survive *= 1 - Fraction(1, branching(k + m))
    res1 = a * survive
    res0 = (1 - a) * Fraction(1, 1 << (k + truncation_l - 1)) * survive
    return _checked(
        PartitionSpec(
            alpha=a,
            groups=tuple(groups),
            residual_mass_label1=res1,
            residual_mass_label0=res0,
            note=(
                "residual = points of depth >= k+l whose coordinates at depths "
                "k+1..k+l all avoid the value 1"
            ),
        )
    )


def besicovitch_ratio(l: int, alpha) -> Fraction:
    """Mass ratio of the infinite part inside the closed ball of radius
    ``2**-(l-1)`` around an infinite point (prefix-independent)."""
    a = as_exact(alpha)
    if l < 1:
        raise ValueError("ball depth must be at least 1")
    return mu_subtree_infinite_part(l, a) / subtree_mass(l, a, closed=True)
