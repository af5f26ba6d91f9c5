import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dioph.errors import NoWitness, StrongApproxError, ValidationError
from dioph.exact import INF, AlgebraicReal, Place, Radical, SMatrix, SVector, golden_ratio
from dioph.twisted import (
    FlowLattice,
    Window,
    certificate_sequence,
    check_strong_approx,
    choose_epsilon,
    construct,
    construct_real,
    find_witness_heights,
    normalize,
    proximity_window,
    round_nonzero,
    sign_window,
    strong_approx,
)
from dioph.weights import Weights

from oracles import determinant, fibonacci, padic_valuation, recheck_certificate

PHI = golden_ratio()
UNIT = Weights.uniform(1, 1, "inf")


def two_adic_sqrt_minus_7(bits=40):
    x = 1
    for k in range(3, bits + 1):
        if (x * x + 7) % 2 ** (k + 1):
            x += 2 ** (k - 1)
    return x % 2 ** bits


def real_gamma(*values):
    return SVector({INF: list(values)})


def assert_certified(cert, alpha, gamma, w):
    assert cert.ok
    checks = recheck_certificate(cert, alpha, gamma, w)
    assert all(checks.values()), checks


# -- rounding ---------------------------------------------------------------

@pytest.mark.parametrize(
    "x, expected",
    [(Fraction(13, 5), 3), (Fraction(3, 10), 1), (Fraction(-3, 10), -1), (0, 1), (2.6, 3), (Fraction(-5, 2), -3)],
)
def test_round_nonzero(x, expected):
    assert round_nonzero(x) == expected


def test_round_nonzero_surd():
    assert round_nonzero(PHI - 2) == -1
    assert round_nonzero(PHI * 10) == 16


@given(st.fractions(min_value=-50, max_value=50))
def test_round_nonzero_is_close_and_nonzero(x):
    k = round_nonzero(x)
    assert k != 0
    assert abs(k - x) <= 1


# -- strong approximation ---------------------------------------------------

def test_strong_approx_integer_window():
    targets = {2: Fraction(5), 3: Fraction(1, 2)}
    window = Window(Fraction(6), Fraction(18), Fraction(12))
    r = strong_approx(targets, window)
    assert r == 12
    assert all(check_strong_approx(r, targets, window).values())
    # oracle: the admissible integers of the window by direct valuation checks
    ok = [k for k in range(6, 19) if padic_valuation(k - 5, 2) >= 0 and padic_valuation(Fraction(k) - Fraction(1, 2), 3) >= 0]
    assert r in ok


def test_strong_approx_sign_window():
    r = strong_approx({2: Fraction(0)}, sign_window(True, 2))
    assert r == 4
    assert padic_valuation(r, 2) >= 0 and 2 <= r <= 6


def test_strong_approx_denominators():
    targets = {2: Fraction(3, 8), 5: Fraction(7, 25)}
    r = strong_approx(targets, sign_window(False, 10))
    assert r.denominator == 8 * 25
    assert all(check_strong_approx(r, targets, sign_window(False, 10)).values())


def test_strong_approx_inconsistent_window():
    with pytest.raises(StrongApproxError):
        strong_approx({3: Fraction(0)}, Window(Fraction(1, 3), Fraction(1, 2), Fraction(5, 12)))


def test_strong_approx_rejects_infinite_target():
    with pytest.raises(ValidationError):
        strong_approx({"inf": Fraction(1)}, sign_window(True, 1))


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.sampled_from([2, 3, 5, 7]), min_size=1, max_size=4, unique=True),
    st.data(),
)
def test_strong_approx_constraints(primes, data):
    targets = {p: Fraction(data.draw(st.integers(-500, 500)), p ** data.draw(st.integers(0, 4))) for p in primes}
    P = 1
    for p in primes:
        P *= p
    if data.draw(st.booleans()):
        window = sign_window(data.draw(st.booleans()), P)
    else:
        window = proximity_window(Fraction(data.draw(st.integers(-10 ** 6, 10 ** 6)), data.draw(st.integers(1, 50))), P)
    r = strong_approx(targets, window)
    for p, x in targets.items():
        assert padic_valuation(r - x, p) >= 0
    den = r.denominator
    for p in primes:
        while den % p == 0:
            den //= p
    assert den == 1
    assert window.contains(r)


# -- normalization ----------------------------------------------------------

def test_normalize_moves_real_parts_into_unit_interval():
    alpha = SMatrix({"2": [[Fraction(7, 3)]], "inf": [[PHI + 3]]})
    gamma = SVector({"2": [Fraction(5)], "inf": [Fraction(-7, 2)]})
    new_alpha, new_gamma, shift = normalize(alpha, gamma, "2,inf")
    assert 0 <= new_alpha.at(INF)[0][0] < 1
    assert 0 <= new_gamma.at(INF)[0] < 1
    assert shift.K == ((4,),) and shift.g == (-4,)
    # a residual computed in shifted coordinates maps back unchanged
    a, b_shifted = (3,), (2,)
    b = shift.b_back(a, b_shifted)
    for p in ("2", "inf"):
        orig = a[0] * alpha.at(p)[0][0] - b[0] - gamma.at(p)[0]
        moved = a[0] * new_alpha.at(p)[0][0] - b_shifted[0] - new_gamma.at(p)[0]
        assert orig == moved


def test_normalize_without_infinity_is_trivial():
    alpha = SMatrix({"3": [[Fraction(1, 2)]]})
    _, _, shift = normalize(alpha, SVector({"3": [1]}), "3")
    assert shift.trivial


# -- flow lattice -----------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.integers(-300, 300), st.integers(-300, 300), st.integers(2, 500), st.fractions(min_value=Fraction(1, 8), max_value=4))
def test_flow_membership_matches_inequalities(a, b, H, R):
    w = Weights.real([Fraction(1, 3), Fraction(2, 3)], [1])
    alpha = SMatrix.real([[PHI, AlgebraicReal.sqrt(2) / 3]])
    flow = FlowLattice(alpha, w, H)
    bb = (b, b // 2 + 1)
    explicit = all(
        Radical.of(abs(a * alpha.at(INF)[0][i] - bb[i])) <= Radical.of(R) * Radical.of(Fraction(1, H), w.t(i, INF))
        for i in range(2)
    ) and (a == 0 or Radical.of(abs(a)) <= Radical.of(R) * Radical.of(H))
    assert flow.within((a,), bb, R) == explicit
    assert flow.box(R).contains((a,) + bb) == explicit
    assert flow.determinant() == Radical.of(1)


# -- witness heights --------------------------------------------------------

def test_golden_ratio_witnesses():
    hs = find_witness_heights(SMatrix.real([[PHI]]), UNIT, "inf", Fraction(2, 5), range(2, 10 ** 4, 7))
    assert hs
    fib = find_witness_heights(SMatrix.real([[PHI]]), UNIT, "inf", Fraction(2, 5), [fibonacci(k) for k in range(5, 20)])
    assert fib == [fibonacci(k) for k in range(5, 20)]


def test_rational_and_zero_have_no_witnesses():
    assert find_witness_heights(SMatrix.real([[Fraction(1, 2)]]), UNIT, "inf", Fraction(1, 10), range(10, 200)) == []
    for eps in (Fraction(1, 2), Fraction(9, 10)):
        assert find_witness_heights(SMatrix.real([[0]]), UNIT, "inf", eps, range(2, 100)) == []


def test_choose_epsilon():
    eps = choose_epsilon(SMatrix.real([[PHI]]), UNIT, "inf", range(2, 200))
    assert Fraction(1, 4) < eps <= 1
    assert choose_epsilon(SMatrix.real([[Fraction(1, 2)]]), UNIT, "inf", range(10, 50)) is None


# -- certificates -----------------------------------------------------------

def test_real_homogeneous_certificate():
    alpha = SMatrix.real([[PHI]])
    for H in find_witness_heights(alpha, UNIT, "inf", Fraction(2, 5), range(2, 60))[:6]:
        cert = construct_real(alpha, [0], H, UNIT, Fraction(2, 5))
        assert_certified(cert, alpha, real_gamma(0), UNIT)


def test_real_certificate_half_shift():
    alpha = SMatrix.real([[PHI]])
    cert = construct_real(alpha, [Fraction(1, 2)], 34, UNIT, Fraction(2, 5))
    assert_certified(cert, alpha, real_gamma(Fraction(1, 2)), UNIT)
    assert abs(cert.a[0]) >= 34
    # independent float check of the residual against the recorded constant
    resid = abs(cert.a[0] * float(PHI) - cert.b[0] - 0.5)
    assert resid * 34 < float(cert.limits["residual"])


def test_real_certificates_are_distinct_along_fibonacci():
    alpha = SMatrix.real([[PHI]])
    gamma = real_gamma(PHI / 2)
    certs = [construct_real(alpha, [PHI / 2], fibonacci(k), UNIT, Fraction(2, 5)) for k in (8, 10, 12)]
    for c in certs:
        assert_certified(c, alpha, gamma, UNIT)
    assert len({c.key() for c in certs}) == 3


def test_real_two_by_two():
    alpha = SMatrix.real([[AlgebraicReal.sqrt(2) - 1, AlgebraicReal.sqrt(3) / 2], [AlgebraicReal.sqrt(5) / 3, AlgebraicReal.sqrt(7) - 2]])
    w = Weights.uniform(2, 2, "inf")
    gamma = real_gamma(Fraction(1, 3), Fraction(2, 7))
    hs = find_witness_heights(alpha, w, "inf", Fraction(1, 8), range(2, 60))
    assert hs
    for H in hs[:4]:
        assert_certified(construct(alpha, gamma, Fraction(1, 8), H, w, "inf"), alpha, gamma, w)


def test_non_witness_is_rejected():
    with pytest.raises(NoWitness):
        construct_real(SMatrix.real([[PHI]]), [0], 34, UNIT, Fraction(1, 2))
    with pytest.raises(NoWitness):
        construct(SMatrix.real([[Fraction(1, 2)]]), real_gamma(0), Fraction(1, 10), 20, UNIT, "inf")


def test_s_finite_certificates():
    alpha = SMatrix({"2": [[two_adic_sqrt_minus_7()]]})
    w = Weights(1, 1, "2", {(0, Place(2)): 2}, (1, 1))
    eps = Fraction(1, 4)
    for H in (2, 5, 17, 40):
        for g in (Fraction(0), Fraction(1, 5)):
            gamma = SVector({"2": [g]})
            cert = construct(alpha, gamma, eps, H, w, "2")
            assert_certified(cert, alpha, gamma, w)
            if g == 0:
                # the 2-adic residual is an exact multiple of the required power of two
                assert padic_valuation(cert.a[0] * alpha.at("2")[0][0] - cert.b[0], 2) >= 2


def test_s_finite_basis_is_independent():
    alpha = SMatrix({"2": [[Fraction(1, 3), 5]], "3": [[Fraction(7, 2), 1]]})
    w = Weights.uniform(1, 2, "2,3")
    eps = Fraction(1, 2)
    hs = find_witness_heights(alpha, w, "2,3", eps, range(2, 30))
    assert hs
    gamma = SVector({"2": [1, Fraction(1, 3)], "3": [0, 2]})
    for H in hs[:3]:
        cert = construct(alpha, gamma, eps, H, w, "2,3")
        assert_certified(cert, alpha, gamma, w)
        assert determinant(cert.trace.basis) != 0


def s_infinite_instance():
    alpha = SMatrix({"2": [[Fraction(1, 3)]], "inf": [[PHI - 1]]})
    w = Weights(1, 1, "2,inf", {(0, Place(2)): Fraction(1, 2), (0, INF): Fraction(1, 2)}, (1,))
    return alpha, w


def test_s_infinite_certificates_grow():
    alpha, w = s_infinite_instance()
    gamma = SVector({"2": [0], "inf": [Fraction(1, 2)]})
    eps = Fraction(1, 4)
    hs = find_witness_heights(alpha, w, "2,inf", eps, range(2, 200))
    certs = certificate_sequence(alpha, gamma, eps, w, "2,inf", hs, count=10)
    assert len(certs) == 10
    for c in certs:
        assert_certified(c, alpha, gamma, w)
        assert abs(c.a[0]) >= c.H
    assert len({c.key() for c in certs}) == len({c.H for c in certs}) == 10
    # a pair certified at H stays admissible a little further up; the sequence passes over those heights
    first, second = certs[0], certs[1]
    skipped = [H for H in hs if first.H < H < second.H]
    if skipped:
        again = construct(alpha, gamma, eps, skipped[0], w, "2,inf")
        assert again.key() == first.key()


def test_s_infinite_with_real_shift():
    alpha = SMatrix({"3": [[Fraction(1, 2)]], "inf": [[AlgebraicReal.sqrt(2) + 2]]})
    w = Weights(1, 1, "3,inf", {(0, Place(3)): Fraction(1, 3), (0, INF): Fraction(2, 3)}, (1,))
    gamma = SVector({"3": [Fraction(1, 5)], "inf": [Fraction(-9, 4)]})
    hs = find_witness_heights(alpha, w, "3,inf", Fraction(1, 4), range(2, 40))
    for H in hs[:4]:
        cert = construct(alpha, gamma, Fraction(1, 4), H, w, "3,inf")
        assert_certified(cert, alpha, gamma, w)
        assert not cert.trace.translation.trivial


def test_infinity_only_matches_real_construction():
    alpha = SMatrix.real([[PHI]])
    gamma = real_gamma(Fraction(1, 3))
    a = construct(alpha, gamma, Fraction(2, 5), 55, UNIT, "inf")
    b = construct_real(alpha, gamma, 55, UNIT, Fraction(2, 5))
    assert a.key() == b.key()


def test_certificate_sequence_skips_repeats_and_non_witnesses():
    alpha = SMatrix.real([[PHI]])
    certs = certificate_sequence(alpha, real_gamma(0), Fraction(2, 5), UNIT, "inf", range(2, 60), count=8)
    assert len(certs) == 8
    assert len({c.key() for c in certs}) == 8
    assert [c.H for c in certs] == sorted(c.H for c in certs)


def test_certificate_config_is_plain_data():
    cert = construct_real(SMatrix.real([[PHI]]), [0], 21, UNIT, Fraction(2, 5))
    cfg = cert.to_config()
    assert cfg["a"] == list(cert.a) and cfg["H"] == 21
    assert all(cfg["checks"].values())
    assert "C_box" in cfg["constants"]


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_random_real_certificates(seed):
    rng = random.Random(seed)
    alpha = SMatrix.real([[(rng.randint(0, 3) + AlgebraicReal.sqrt(rng.choice([2, 3, 5, 7, 11]))) / rng.randint(1, 5)]])
    gamma = real_gamma(Fraction(rng.randint(-20, 20), rng.randint(1, 9)))
    for H in find_witness_heights(alpha, UNIT, "inf", Fraction(1, 4), range(2, 40))[:3]:
        assert_certified(construct(alpha, gamma, Fraction(1, 4), H, UNIT, "inf"), alpha, gamma, UNIT)
