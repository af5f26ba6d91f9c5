import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dioph.dirichlet import (
    a_nonzero_threshold,
    epsilon_star,
    singularity_scan,
    solve_homogeneous,
    verify_homogeneous,
)
from dioph.errors import ValidationError
from dioph.exact import INF, Place, Radical, SMatrix, golden_ratio
from dioph.weights import Weights, eta_norm

from instances import random_instance
from oracles import binet_eps_star, brute_epsilon_star, brute_least_height, fibonacci

PHI = golden_ratio()
UNIT = Weights.uniform(1, 1, "inf")


def solution_height(sol, w):
    m = len(sol.a)
    if sol.places.has_infinity:
        return eta_norm(sol.a, w.eta[:m])
    return eta_norm(sol.a + sol.b, w.eta)


def test_golden_ratio_at_five():
    sol = solve_homogeneous(SMatrix.real([[PHI]]), 5, UNIT)
    assert (sol.a, sol.b) == ((3,), (5,))
    assert sol.ok
    assert Radical.of(abs(3 * PHI - 5)) < Radical.of(Fraction(1, 5))


@pytest.mark.parametrize("places", ["inf", "2", "3,inf"])
def test_zero_matrix(places):
    alpha = SMatrix({p: [[0, 0, 0], [0, 0, 0]] for p in places.split(",")}, 2, 3)
    w = Weights.uniform(2, 3, places)
    for H in (1, 7, 100):
        sol = solve_homogeneous(alpha, H, w, places)
        assert sol.a == (1, 0) and sol.b == (0, 0, 0)
        assert all(Radical.of(abs(v)).zero for v in sol.residuals.values())


def test_two_adic_example():
    alpha = SMatrix({"2": [[Fraction(1, 3)]]})
    w = Weights(1, 1, "2", {(0, Place(2)): 2}, (1, 1))
    assert verify_homogeneous(alpha, (3,), (1,), 3, w).ok
    assert not verify_homogeneous(alpha, (3,), (-1,), 3, w).ok
    sol = solve_homogeneous(alpha, 3, w)
    assert sol.ok
    assert solution_height(sol, w) <= Radical.of(3)
    # a/3 - b must be divisible by 8 at the 2-adic place
    assert (sol.a[0] - 3 * sol.b[0]) % 8 == 0


def test_verify_rejects_a_bad_pair():
    sol = verify_homogeneous(SMatrix.real([[PHI]]), (2,), (3,), 5, UNIT)
    assert not sol.ok


def test_height_must_be_positive():
    with pytest.raises(ValidationError):
        solve_homogeneous(SMatrix.real([[PHI]]), 0, UNIT)


def test_epsilon_star_rational_and_zero():
    half = SMatrix.real([[Fraction(1, 2)]])
    zero = SMatrix.real([[0]])
    for H in (2, 3, 10, 1000):
        pt = epsilon_star(half, H, UNIT)
        assert pt.eps_star.zero and pt.attained
        assert epsilon_star(zero, H, UNIT).eps_star.zero
    assert not epsilon_star(half, 1, UNIT).eps_star.zero


@pytest.mark.parametrize("k", range(10, 26))
def test_epsilon_star_matches_binet(k):
    H = fibonacci(k)
    pt = epsilon_star(SMatrix.real([[PHI]]), H, UNIT)
    assert pt.eps_star == Radical.of(binet_eps_star(k))
    assert pt.minimizer == ((H,), (fibonacci(k + 1),))


def test_profile_row_encloses_irrational_value():
    row = epsilon_star(SMatrix.real([[PHI]]), 13, UNIT).row()
    assert not row["exact"]
    assert Fraction(row["eps_star_num"], row["eps_star_den"]) >= Radical.of(binet_eps_star(7)).upper_rational(64) - Fraction(1, 2 ** 60)


def test_scan_rational_is_singular():
    for p, q in [(1, 3), (5, 7), (2, 9)]:
        v = singularity_scan(SMatrix.real([[Fraction(p, q)]]), threshold=Fraction(1, 10))
        assert v.classification == "SingularEvidence"
        assert all(pt.eps_star.zero for pt in v.profile if pt.H >= q)
        assert "evidence" in v.note


def test_scan_golden_ratio_is_non_singular():
    grid = [2 ** k for k in range(1, 18)]
    v = singularity_scan(SMatrix.real([[PHI]]), grid, Fraction(1, 5), UNIT)
    assert v.non_singular
    assert max(v.witness_heights) >= 2 ** 16


def test_liouville_profile_dips():
    value = sum(Fraction(1, 10 ** f) for f in (1, 2, 6, 24))
    v = singularity_scan(SMatrix.real([[value]]), [50, 500, 5000, 10 ** 5, 10 ** 6, 10 ** 7], Fraction(1, 10))
    eps = {pt.H: pt.eps_star for pt in v.profile}
    assert eps[5000] > Radical.of(Fraction(1, 4))
    assert eps[500] < Radical.of(Fraction(1, 10))
    assert eps[10 ** 6] < Radical.of(Fraction(1, 10 ** 11))
    assert v.classification == "SingularEvidence"


def test_scan_rejects_bad_grid():
    with pytest.raises(ValidationError):
        singularity_scan(SMatrix.real([[PHI]]), [4, 2])


def test_two_by_two_over_two_primes():
    alpha = SMatrix(
        {
            "2": [[Fraction(1, 3), Fraction(5, 7)], [Fraction(2, 9), 1]],
            "3": [[Fraction(1, 5), Fraction(5, 7)], [Fraction(2, 7), 1]],
        }
    )
    w = Weights.uniform(2, 2, "2,3")
    assert epsilon_star(alpha, 20, w).eps_star == Radical.of(Fraction(5, 16))
    assert solution_height(solve_homogeneous(alpha, 40, w), w) == Radical.of(15)


small_instances = st.integers(0, 2 ** 32).map(lambda s: random_instance(random.Random(s), max_dim=2, H_max=40))


@settings(max_examples=60, deadline=None)
@given(small_instances)
def test_solver_agrees_with_exhaustive_search(inst):
    sol = solve_homogeneous(inst.alpha, inst.H, inst.w, inst.places)
    assert sol.ok
    assert solution_height(sol, inst.w) == brute_least_height(inst.alpha, inst.H, inst.w, inst.places)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32).map(lambda s: random_instance(random.Random(s), max_dim=2, H_max=12)))
def test_epsilon_star_agrees_with_exhaustive_search(inst):
    if inst.alpha.m + inst.alpha.n > 3:
        inst.alpha = SMatrix({str(p): [[inst.alpha.at(p)[0][0]]] for p in inst.places}, 1, 1)
        inst.w = Weights.uniform(1, 1, inst.places)
    pt = epsilon_star(inst.alpha, inst.H, inst.w, inst.places)
    assert pt.eps_star == brute_epsilon_star(inst.alpha, inst.H, inst.w, inst.places)


@settings(max_examples=40, deadline=None)
@given(small_instances)
def test_a_nonzero_above_threshold(inst):
    h0 = a_nonzero_threshold(inst.w, inst.places)
    sol = solve_homogeneous(inst.alpha, inst.H, inst.w, inst.places)
    if INF in inst.places:
        assert h0 == Radical.of(1)
    if h0 is not None and Radical.of(inst.H) > h0:
        assert not sol.a_is_zero


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(1, 30), st.integers(1, 30))
def test_scaled_profile_is_monotone(seed, h1, h2):
    # the height-H box contains the height-H' box for H' <= H, so eps*/H cannot grow
    inst = random_instance(random.Random(seed), max_dim=2, H_max=8)
    lo, hi = sorted((h1, h2))
    e_lo = epsilon_star(inst.alpha, lo, inst.w, inst.places).eps_star
    e_hi = epsilon_star(inst.alpha, hi, inst.w, inst.places).eps_star
    assert e_hi * Radical.of(Fraction(1, hi)) <= e_lo * Radical.of(Fraction(1, lo))
