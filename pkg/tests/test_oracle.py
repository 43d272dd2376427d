from fractions import Fraction

import numpy as np
import pytest

from nearnet import PreissSpace, SeqPoint, assign_voronoi, build_net
from nearnet.oracle import (
    CellShapeError,
    CellType,
    as_exact,
    atom_mass,
    besicovitch_ratio,
    canonical_net_partition,
    classify_impure_cell,
    constant_partition,
    ideal_partition,
    inconsistent_partition,
    mu_subtree,
    mu_subtree_infinite_part,
    mu_subtree_partial,
    partition_error,
    subtree_mass,
    tail_atom_mass,
    tail_atom_mass_partial,
    true_majority,
)
from nearnet.preiss import branching, prefix_product, sample_preiss

ALPHA = Fraction(3, 10)

# Frozen exact regression anchors (recorded at first computation).
CANONICAL_ERR_K12 = Fraction(3353017337, 9809952768000)
OPEN_CELL_FIRST_MAJORITY_DEPTH = 3  # at alpha = 3/10
OPEN_CELL_FLIP_MARGIN = Fraction(1, 96)


def test_as_exact_rejects_floats():
    with pytest.raises(TypeError):
        as_exact(0.3)
    assert as_exact("0.3") == ALPHA
    with pytest.raises(ValueError):
        as_exact(2)


def test_tail_identity_against_partial_sums():
    # sum_{j>=k} (atom weight * count) telescopes; the exact remainder after
    # `terms` layers is 2**-(k+terms-1).
    for k in (1, 2, 5, 9):
        closed = tail_atom_mass(k)
        partial = tail_atom_mass_partial(k, 50)
        assert closed - partial == Fraction(1, 1 << (k + 49))
        assert closed == Fraction(1, 1 << (k - 1))


def test_mu_subtree_closed_form_vs_partial_sums():
    for k in (1, 2, 3, 6, 10):
        closed = mu_subtree(k, ALPHA)
        partial = mu_subtree_partial(k, ALPHA, 50)
        remainder = (1 - ALPHA) * Fraction(1, (1 << (k + 50)) * prefix_product(k))
        assert closed - partial == remainder


def test_mu_subtree_infinite_part():
    for k in (1, 2, 4, 7):
        assert mu_subtree_infinite_part(k, ALPHA) == ALPHA / prefix_product(k)


def test_level_one_exhausts_mass():
    # With a single admissible first coordinate the depth-1 subtree plus the
    # (massless) root atom account for everything.
    assert mu_subtree(1, ALPHA) + atom_mass(0, ALPHA) == 1


def test_canonical_partition_masses_and_curve():
    errs = [partition_error(canonical_net_partition(k, ALPHA)) for k in range(3, 13)]
    assert all(e2 < e1 for e1, e2 in zip(errs, errs[1:]))
    assert errs[-1] == CANONICAL_ERR_K12
    assert errs[-1] <= Fraction(1, 1000)
    # exact-value bound: both cell families together cannot beat the coarse cap
    for k in (4, 6, 9):
        err = partition_error(canonical_net_partition(k, ALPHA))
        cap = (1 - ALPHA) * tail_atom_mass(k) + ALPHA / branching(k)
        assert err <= cap


def test_canonical_partition_example_k6():
    spec = canonical_net_partition(6, ALPHA)
    assert spec.total_mass == 1
    assert partition_error(spec) == Fraction(5129, 230400)


def test_partition_error_trivial_examples():
    assert partition_error(constant_partition(ALPHA, label=0)) == ALPHA
    assert partition_error(constant_partition(ALPHA, label=1)) == 1 - ALPHA
    assert partition_error(ideal_partition(ALPHA)) == 0


def test_true_majority_votes_and_flip():
    # Open cells vote 1 once deep enough; closed cells vote 0 from the start.
    for k in range(1, 21):
        label, margin = true_majority(CellType("Ia", k), ALPHA)
        assert label == (1 if k >= OPEN_CELL_FIRST_MAJORITY_DEPTH else 0)
        if k == OPEN_CELL_FIRST_MAJORITY_DEPTH:
            assert margin == OPEN_CELL_FLIP_MARGIN
    for k in range(1, 21):
        label, _ = true_majority(CellType("IIa", k), ALPHA)
        assert label == 0
        label, _ = true_majority(CellType("IIb", k), ALPHA)
        assert label == 0
    # ratio of masses inside an open subtree tends to the infinite part
    deep_in = mu_subtree_infinite_part(20, ALPHA) / mu_subtree(20, ALPHA)
    assert deep_in > Fraction(999, 1000)


def test_true_majority_margin_is_exact_difference():
    for variant in ("Ia", "Ib", "IIa", "IIb"):
        ct = CellType(variant, 4)
        label, margin = true_majority(ct, ALPHA)
        mass1 = mu_subtree_infinite_part(ct.level, ALPHA)
        mass0 = subtree_mass(ct.level, ALPHA, closed=ct.closed) - mass1
        assert margin == abs(mass1 - mass0)
        assert label == (1 if mass1 > mass0 else 0)


def _synthetic_cell(variant, k, witness_seed=31):
    z = SeqPoint.infinite(seed=witness_seed)
    members = [z]
    if variant in ("Ia", "IIa"):
        # another branch at depth k+1 distinguishes the depth-k shapes
        base = z.prefix(k)
        other = list(z.prefix(k + 1))
        other[k] = other[k] + 1 if other[k] < branching(k + 1) else other[k] - 1
        members.append(SeqPoint.finite(tuple(other)))
        if variant == "IIa":
            members.append(SeqPoint.finite(base[: k - 1]))
    else:
        members.append(SeqPoint.finite(z.prefix(k + 2)))
        if variant == "IIb":
            members.append(SeqPoint.finite(z.prefix(k)))
    return members


@pytest.mark.parametrize("variant", ["Ia", "Ib", "IIa", "IIb"])
def test_classify_round_trip(variant):
    for k in (2, 3, 5):
        got = classify_impure_cell(k, _synthetic_cell(variant, k))
        assert got.variant == variant
        assert got.k == k


def test_classify_rejects_pure_and_foreign_cells():
    with pytest.raises(CellShapeError):
        classify_impure_cell(3, [SeqPoint.finite((1, 2))])
    z = SeqPoint.infinite(seed=5)
    stranger = SeqPoint.finite((1, branching(2) - z.coord(2) + 1))  # differs at depth 2
    with pytest.raises(CellShapeError):
        classify_impure_cell(3, [z, stranger])


def test_fitted_nets_only_produce_four_shapes(rng, preiss_params):
    # 10^3 fitted nets; classification must never report a fifth shape.
    space = PreissSpace(preiss_params)
    seen = set()
    impure_total = 0
    for trial in range(1000):
        n = int(rng.integers(30, 120))
        sample = sample_preiss(rng, n, preiss_params)
        k = int(rng.integers(1, 7))
        net = build_net(sample.points, float(2.0**-k), space)
        va = assign_voronoi(sample.points, net, space)
        for members_idx in va.cells:
            members = [sample.points[i] for i in members_idx]
            if any(p.is_infinite for p in members):
                seen.add(classify_impure_cell(k, members).variant)
                impure_total += 1
    assert seen <= {"Ia", "Ib", "IIa", "IIb"}
    assert impure_total > 1000  # plenty of impure cells were exercised


def test_inconsistent_partition_structure_and_curve():
    k = 2
    errs = []
    for l in range(1, 7):
        spec = inconsistent_partition(k, l, ALPHA)
        assert spec.total_mass == 1
        gamma_k = Fraction(1, 1 << k)
        for g in spec.groups:
            if g.kind == "closed_subtree":
                assert g.label == 0
                assert g.diameter <= gamma_k
            else:
                assert g.kind == "atom"
                assert g.diameter == 0
        errs.append(partition_error(spec))
    assert all(e2 > e1 for e1, e2 in zip(errs, errs[1:]))
    eps = [ALPHA - e for e in errs]
    assert all(e2 < e1 for e1, e2 in zip(eps, eps[1:]))
    assert all(e > 0 for e in eps)


def test_inconsistent_partition_residual_is_explicit():
    spec = inconsistent_partition(3, 4, ALPHA)
    survive = Fraction(1)
    for j in range(1, 5):
        survive *= 1 - Fraction(1, branching(3 + j))
    assert spec.residual_mass_label1 == ALPHA * survive
    assert partition_error(spec) == ALPHA * (1 - survive)


def test_besicovitch_ratio_examples():
    vals = [besicovitch_ratio(l, ALPHA) for l in range(2, 13)]
    assert all(v2 < v1 for v1, v2 in zip(vals, vals[1:]))
    assert vals[-1] <= Fraction(1, 100)
    for l in (2, 3, 6, 12):
        ratio = besicovitch_ratio(l, ALPHA)
        numerator = mu_subtree_infinite_part(l, ALPHA)
        assert ratio == numerator / subtree_mass(l, ALPHA, closed=True)
        # coarse closed-form cap: alpha / ((1-alpha) * 2**-(l-1) * N_l)
        cap = ALPHA / ((1 - ALPHA) * Fraction(1, 1 << (l - 1)) * branching(l))
        assert ratio <= cap


def test_group_masses_match_monte_carlo(rng, preiss_params):
    # ties exact arithmetic to the sampler on a handful of shapes
    space = PreissSpace(preiss_params)
    sample = sample_preiss(rng, 200_000, preiss_params)
    z = SeqPoint.infinite(seed=2024)
    from nearnet.preiss import SubtreeId

    for level, closed in ((1, False), (2, False), (2, True), (3, True)):
        sub = SubtreeId(prefix=z.prefix(level), closed=closed)
        want = float(subtree_mass(level, ALPHA, closed=closed))
        got = float(np.mean([sub.contains(p) for p in sample.points[:50_000]]))
        se = (want * (1 - want) / 50_000) ** 0.5
        assert abs(got - want) <= 4 * se + 1e-12, (level, closed, got, want)
