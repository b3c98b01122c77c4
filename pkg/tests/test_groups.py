import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shearlab.algebra import INT_S, INT_T, IntGroupElement, UTBPoint, mobius_act
from shearlab.groups import (PSL2Z, THIN4, BudgetExceeded, CosetLabel, Cusp,
                             GroupSpec, WordBudget, bottom_rows, builtin,
                             coset_label, coset_space, cusp_normalizer,
                             enumerate_words, reduce_points,
                             reduce_to_fundamental_domain)

# -- specs -------------------------------------------------------------------


def test_builtin_names():
    assert builtin("psl2z") is PSL2Z
    assert builtin("thin4") is THIN4
    with pytest.raises(KeyError):
        builtin("nope")


def test_psl2z_is_lattice_thin4_is_not():
    assert PSL2Z.lattice and not THIN4.lattice
    assert PSL2Z.cusps[0].width == 1.0
    assert THIN4.cusps[0].width == 4.0


def test_spec_json_round_trip():
    for spec in (PSL2Z, THIN4):
        again = GroupSpec.from_json(spec.to_json())
        assert again == spec


def test_gen_set_contains_inverses():
    gens = PSL2Z.gen_set()
    for g in gens:
        assert g.inverse() in gens


def test_conjugated_moves_cusps():
    n = cusp_normalizer(THIN4, 1)  # the cusp at 0
    moved = THIN4.conjugated(n, name="thin4@0")
    # the normalizer sends the chosen cusp to infinity
    assert math.isinf(moved.cusps[1].point) or moved.cusps[1].point > 1e12 \
        or any(math.isinf(c.point) for c in moved.cusps)


# -- word enumeration --------------------------------------------------------


def test_enumerate_words_small_ball_dedup():
    res = enumerate_words(PSL2Z, expand=lambda g: g.to_real().frobenius() < 12.0)
    assert res.saturated
    keys = [g.entries() for g in res.elements]
    assert len(keys) == len(set(keys))
    assert IntGroupElement.identity() in res.elements
    assert INT_S in res.elements and INT_T in res.elements


def test_enumerate_words_predicate_filters_collection():
    gate = lambda g: g.to_real().frobenius() < 12.0
    only_c0 = lambda g: g.c == 0
    res = enumerate_words(PSL2Z, predicate=only_c0, expand=gate)
    assert res.saturated
    assert all(g.c == 0 for g in res.elements)
    full = enumerate_words(PSL2Z, expand=gate)
    assert len(res.elements) == sum(1 for g in full.elements if g.c == 0)


def test_enumerate_words_budget_carries_partial():
    with pytest.raises(BudgetExceeded) as exc:
        enumerate_words(PSL2Z, budget=WordBudget(max_depth=512, max_nodes=50),
                        expand=lambda g: g.to_real().frobenius() < 1e9)
    assert len(exc.value.partial.elements) > 0
    assert not exc.value.partial.saturated


def test_thin_words_are_a_strict_subgroup_sample():
    # compare the saturated interiors; the raw element lists also hold the
    # boundary layer one generator step past the gate, and a thin shear
    # step lands much farther out than a unit shear does
    gate = lambda g: g.to_real().frobenius() < 30.0
    def ball(spec):
        found = enumerate_words(spec, expand=gate).elements
        return {g.entries() for g in found if gate(g)}
    thin, full = ball(THIN4), ball(PSL2Z)
    assert thin < full
    assert INT_T.entries() not in thin  # the shear by 1 is not in the thin group


# -- fundamental domain reduction --------------------------------------------

points = st.tuples(st.floats(-40.0, 40.0), st.floats(1e-6, 60.0))


@given(points)
@settings(deadline=None)
def test_reduce_word_acts_correctly(pt):
    p = UTBPoint(pt[0], pt[1], 0.2)
    red, word = reduce_to_fundamental_domain(p)
    assert red.x <= 0.5 + 1e-12 and red.x >= -0.5 - 1e-12
    assert red.x * red.x + red.y * red.y >= 1.0 - 1e-9
    img = mobius_act(word, p)
    # conditioning: applying the word in one shot loses digits in cz + d
    # when the point sits deep in a cusp, so scale with the magnification
    tol = 1e-9 + 5e-15 * red.y / p.y
    assert abs(img.x - red.x) < tol * (1.0 + abs(red.x))
    assert abs(img.y - red.y) < tol * red.y


@given(points)
@settings(deadline=None)
def test_reduce_points_matches_scalar_height(pt):
    p = UTBPoint(pt[0], pt[1])
    red, _ = reduce_to_fundamental_domain(p)
    rx, ry = reduce_points(np.array([pt[0]]), np.array([pt[1]]))
    # heights agree even when boundary points pick different representatives
    assert abs(ry[0] - red.y) < 1e-9 * red.y


def test_reduce_points_cocycle():
    xs = np.array([3.7, -0.2, 0.45, 12.125])
    ys = np.array([0.003, 0.08, 5.0, 0.4])
    rx, ry, j = reduce_points(xs, ys, want_j=True)
    assert np.all(np.abs(ys / np.abs(j) ** 2 - ry) < 1e-9 * ry)


# -- congruence structure ----------------------------------------------------


def test_coset_label_kills_sign():
    g = IntGroupElement(1, 2, 0, 1)
    minus = IntGroupElement(-1, -2, 0, -1)  # canonicalized on construction
    assert CosetLabel.of(g, 3) == CosetLabel.of(minus, 3)
    assert coset_label(g, 3).q == 3


def test_coset_space_sizes():
    # |PSL(2, Z/3)| = 12, and the level-3 thin image is all of it since
    # the width-4 shear reduces to the width-1 shear mod 3; at level 2
    # the shear generator dies and only the inversion survives
    assert len(coset_space(PSL2Z, 3)) == 12
    assert len(coset_space("psl2z", 3)) == 12
    assert len(coset_space(THIN4, 3)) == 12
    assert len(coset_space(THIN4, 2)) < len(coset_space(PSL2Z, 2))


# -- bottom rows -------------------------------------------------------------


def brute_force_coprime_rows(height):
    rows = set()
    h = int(height)
    for c in range(0, h + 1):
        for d in range(-h, h + 1):
            if c * c + d * d > height * height or (c, d) == (0, 0):
                continue
            if math.gcd(c, abs(d)) != 1:
                continue
            if c > 0 or (c == 0 and d > 0):
                rows.add((c, d))
    return rows


def test_bottom_rows_lattice_exact_cutoff():
    h = 30.0
    rows = bottom_rows(PSL2Z, h)
    got = {(int(c), int(d)) for _, _, c, d in rows}
    assert got == brute_force_coprime_rows(h)
    # completeness of the full matrices: each row is a genuine element
    for a, b, c, d in rows[:200]:
        assert a * d - b * c == 1


def test_bottom_rows_sorted_and_write_protected():
    rows = bottom_rows(PSL2Z, 20.0)
    order = np.lexsort((rows[:, 3], rows[:, 2]))
    assert np.all(order == np.arange(len(rows)))
    with pytest.raises(ValueError):
        rows[0, 0] = 99


def test_bottom_rows_cache_key_mixes_int_and_float():
    a = bottom_rows(PSL2Z, 16)
    b = bottom_rows(PSL2Z, 16.0)
    assert a is b


def test_bottom_rows_thin_subset_of_lattice():
    thin = {tuple(r) for r in bottom_rows(THIN4, 24.0)[:, 2:].tolist()}
    full = {tuple(r) for r in bottom_rows(PSL2Z, 24.0)[:, 2:].tolist()}
    assert thin <= full
    assert (0, 1) in thin  # identity row
    # thin rows repeat under left translation by the width-4 shear, so the
    # row (c, d) determines a coset of the cusp stabilizer
    assert len(thin) < len(full)


def test_cusp_normalizer_sends_cusp_to_infinity():
    for spec, idx in ((PSL2Z, 0), (THIN4, 0), (THIN4, 1)):
        n = cusp_normalizer(spec, idx)
        cusp = spec.cusps[idx].point
        if math.isinf(cusp):
            assert n == IntGroupElement.identity()
            continue
        p = mobius_act(n, UTBPoint(cusp, 1e-9))
        assert p.y > 1e5  # pushed far up the cusp neighborhood


def test_cusp_validation():
    with pytest.raises(ValueError):
        Cusp(0.0, -1.0)
