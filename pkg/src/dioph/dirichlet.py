"""Homogeneous weighted Dirichlet solving and the singularity profile eps*(H).

Sign convention: residuals are ``a alpha - b`` at every place.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ResourceError, SolverError, ValidationError
from .exact import INF, Place, Radical, SMatrix, SVector, place_norm, simplify
from .lattice import (
    IntegerLattice,
    WeightedBox,
    archimedean_box,
    check_integral,
    congruences_to_lattice,
    enumerate_box,
    eta_radii,
    residual_congruences,
)
from .weights import PlaceSet, Weights, eta_norm, validate_weights

DEFAULT_GRID = tuple(2 ** k for k in range(1, 18))
DEFAULT_THRESHOLD = Fraction(1, 10)
SEARCH_CAP = 2_000


def residual_vector(alpha: SMatrix, a: Sequence[int], b: Sequence[int], places, gamma: SVector | None = None) -> dict:
    """place -> (a alpha - b - gamma) at that place."""
    out = {}
    for p in PlaceSet.parse(places):
        aa = alpha.apply(a, p)
        g = gamma.at(p) if gamma is not None else (0,) * alpha.n
        out[p] = tuple(simplify(x - bi - gi) for x, bi, gi in zip(aa, b, g))
    return out


def height_vector(a, b, places) -> tuple:
    """The coordinates whose eta-norm is the height: (a, b) if inf not in S, else a."""
    return tuple(a) if PlaceSet.parse(places).has_infinity else tuple(a) + tuple(b)


def canonical_sign(z: Sequence[int]) -> tuple[int, ...]:
    """z or -z, whichever has a positive first nonzero coordinate."""
    lead = next((x for x in z if x), 0)
    return tuple(z) if lead >= 0 else tuple(-x for x in z)


def _prefer_leading(z: tuple[int, ...]) -> tuple:
    # among equal heights: smallest l1 mass, then weight on the leading coordinates
    return (sum(abs(x) for x in z), tuple(-x for x in z))


def _radical_key(r: Radical):
    return functools.cmp_to_key(lambda x, y: x.compare(y))(r)


def _prepare(alpha: SMatrix, w: Weights, places) -> PlaceSet:
    places = w.places if places is None else PlaceSet.parse(places)
    check = validate_weights(w, places)
    if not check:
        raise ValidationError(check.report())
    if (alpha.m, alpha.n) != (w.m, w.n):
        raise ValidationError(f"alpha is {alpha.m}x{alpha.n} but weights are for {w.m}x{w.n}")
    missing = [p for p in places if p not in alpha.places]
    if missing:
        raise ValidationError(f"alpha has no value at {', '.join(map(str, missing))}")
    check_integral(alpha, places.finite)
    return places


# ---------------------------------------------------------------------------
# homogeneous solutions
# ---------------------------------------------------------------------------

@dataclass
class DirichletSolution:
    a: tuple[int, ...]
    b: tuple[int, ...]
    H: int
    places: PlaceSet
    residuals: dict[tuple[int, Place], object]
    bound_checks: dict[str, bool]
    a_nonzero_threshold: Radical | None = None

    @property
    def ok(self) -> bool:
        return all(self.bound_checks.values())

    @property
    def a_is_zero(self) -> bool:
        return not any(self.a)

    def to_config(self) -> dict:
        return {
            "a": list(self.a),
            "b": list(self.b),
            "H": self.H,
            "places": str(self.places),
            "residuals": {f"{i + 1}@{p}": str(v) for (i, p), v in self.residuals.items()},
            "checks": dict(self.bound_checks),
            "a_is_zero": self.a_is_zero,
        }


def a_nonzero_threshold(w: Weights, places=None) -> Radical | None:
    """H_0 such that every solution at height H > H_0 has a != 0, or None.

    With inf in S any H > 1 works.  Otherwise this needs eta_{m+i} < sum_nu tau_{i,nu}
    for every i; a solution with a = 0 then has an integer b_i != 0 whose product
    formula forces P * H**(eta_{m+i} - sum tau) >= 1, with P the product of S.
    """
    places = w.places if places is None else PlaceSet.parse(places)
    if places.has_infinity:
        return Radical.of(1)
    P = places.finite_product
    best = None
    for i in range(w.n):
        gap = sum(w.t(i, p) for p in places) - w.eta[w.m + i]
        if gap <= 0:
            return None
        h0 = Radical.of(P, 1 / gap)
        if best is None or h0 > best:
            best = h0
    return best


def verify_homogeneous(alpha: SMatrix, a, b, H: int, w: Weights, places=None) -> DirichletSolution:
    """Re-check every inequality of the homogeneous system from scratch."""
    places = w.places if places is None else PlaceSet.parse(places)
    H = int(H)
    a, b = tuple(int(x) for x in a), tuple(int(x) for x in b)
    res = residual_vector(alpha, a, b, places)
    residuals, checks = {}, {}
    checks["nonzero"] = any(a) or any(b)
    for p in places:
        for i, v in enumerate(res[p]):
            norm = place_norm(v, p)
            residuals[(i, p)] = norm
            bound = Radical.of(Fraction(1, H), w.t(i, p))
            if p.is_infinite:
                checks[f"residual[{i + 1}]@inf < H^-tau"] = Radical.of(norm) < bound
            else:
                checks[f"residual[{i + 1}]@{p} <= p H^-tau"] = Radical.of(norm) <= bound * p.prime
    for j, x in enumerate(a):
        checks[f"|a[{j + 1}]| <= H^eta"] = Radical.of(x) <= Radical.of(H, w.eta[j]) if x else True
    if not places.has_infinity:
        for i, x in enumerate(b):
            checks[f"|b[{i + 1}]| <= H^eta"] = Radical.of(x) <= Radical.of(H, w.eta[w.m + i]) if x else True
    h0 = a_nonzero_threshold(w, places)
    if h0 is not None and Radical.of(H) > h0:
        checks["a != 0 above threshold"] = any(a)
    return DirichletSolution(a, b, H, places, residuals, checks, h0)


def _least_height_point(lattice: IntegerLattice, box_at, H, key, cap: int = SEARCH_CAP, rough=None):
    """Lattice point of ``box_at(h)`` minimizing ``key`` among all points of ``box_at(H)``.

    ``box_at(h)`` must be increasing in h, with ``key`` ordering points by the least h
    whose box contains them.  When the full box holds too many points, h is lowered
    until the enumeration is complete but nonempty.  ``rough`` is an optional float
    approximation of the key's leading part used to discard clear losers.
    """
    hi_trunc, lo_empty = None, Fraction(0)
    h = Fraction(H)
    for _ in range(200):
        pts = enumerate_box(lattice, box_at(h), cap=cap)
        if pts.truncated:
            hi_trunc = h
            h = (lo_empty + h) / 2 if lo_empty else h / 8
            continue
        if not pts.points:
            if hi_trunc is None:
                return None
            lo_empty = h
            h = (h + hi_trunc) / 2
            continue
        cands = pts.points
        if rough is not None:
            approx = [rough(z) for z in cands]
            cut = min(approx) * (1 + 1e-9) + 1e-300
            cands = [z for z, v in zip(cands, approx) if v <= cut]
        return min(cands, key=key)
    raise ResourceError("could not bracket a complete enumeration")


def solve_homogeneous(alpha: SMatrix, H: int, w: Weights, places=None) -> DirichletSolution:
    """Nonzero (a, b) solving the weighted S-arithmetic Dirichlet system at height H.

    Among all solutions, the one of least height (eta-norm of a, or of (a, b) when
    inf is not in S) is returned, ties broken by sign (first nonzero
    coordinate positive), least l1 mass, then lexicographically from the largest.
    """
    places = _prepare(alpha, w, places)
    H = int(H)
    if H < 1:
        raise ValidationError("H must be a positive integer")
    m, n = alpha.m, alpha.n
    system, _ = residual_congruences(
        alpha, w, places, lambda i, p: Radical.of(Fraction(1, H), w.t(i, p)) * p.prime, strict=False, b_sign=-1
    )
    lattice = congruences_to_lattice(system, m + n)

    if places.has_infinity:
        def box_at(h):
            return archimedean_box(alpha, Fraction(1, H), H, w, b_sign=-1, strict_residual=True, eta_height=h)
    else:
        def box_at(h):
            return WeightedBox.axis(eta_radii(h, w.eta))

    def key(z):
        hv = height_vector(z[:m], z[m:], places)
        return (_radical_key(eta_norm(hv, w.eta[: len(hv)])), _prefer_leading(canonical_sign(z)))

    eta_f = [float(e) for e in w.eta]

    def rough(z):
        hv = height_vector(z[:m], z[m:], places)
        return max((abs(x) ** (1 / e) for x, e in zip(hv, eta_f) if x), default=0.0)

    z = _least_height_point(lattice, box_at, H, key, rough=rough)
    if z is not None:
        z = canonical_sign(z)
    if z is None:
        raise SolverError(f"no solution found at H={H}; the system is always solvable")
    sol = verify_homogeneous(alpha, z[:m], z[m:], H, w, places)
    if not sol.ok:
        bad = [k for k, v in sol.bound_checks.items() if not v]
        raise SolverError(f"search returned a point failing {bad}")
    return sol


# ---------------------------------------------------------------------------
# singularity profile
# ---------------------------------------------------------------------------

@dataclass
class ProfilePoint:
    H: int
    eps_star: Radical
    attained: bool
    minimizer: tuple[tuple[int, ...], tuple[int, ...]] | None = None

    def eps_fraction(self) -> Fraction | None:
        return self.eps_star.as_fraction()

    def row(self, bits: int = 64) -> dict:
        """CSV row; irrational values are given by a dyadic upper enclosure."""
        frac = self.eps_star.as_fraction()
        exact = frac is not None
        if frac is None:
            frac = self.eps_star.upper_rational(bits)
        return {
            "H": self.H,
            "eps_star_num": frac.numerator,
            "eps_star_den": frac.denominator,
            "attained": self.attained,
            "exact": exact,
            "eps_star_float": f"{float(self.eps_star):.12g}",
        }


@dataclass
class SingularityVerdict:
    profile: list[ProfilePoint]
    classification: str
    witness_heights: list[int]
    threshold: Fraction
    note: str = "finite scan: evidence only, not a proof"

    @property
    def non_singular(self) -> bool:
        return self.classification == "NonSingularEvidence"


def _start_level(w: Weights, places: PlaceSet) -> int:
    """An integer G with a Dirichlet solution of tau-residual < G / H guaranteed."""
    g = 2
    for p in places.finite:
        for i in range(w.n):
            g = max(g, p.prime ** math.ceil(1 / w.t(i, p)) + 1)
    return g


def _tau_residual(alpha, z, w, places) -> Radical:
    m = alpha.m
    res = residual_vector(alpha, z[:m], z[m:], places)
    parts = [Radical.of(place_norm(v, p), 1 / w.t(i, p)) for p in places for i, v in enumerate(res[p])]
    out = Radical.zero_value()
    for r in parts:
        if r > out:
            out = r
    return out


def epsilon_star(alpha: SMatrix, H: int, w: Weights, places=None, cap: int = SEARCH_CAP) -> ProfilePoint:
    """H times the least tau-residual of a nonzero (a, b) of height at most H.

    The singularity system at (eps, H) is solvable exactly when eps > eps*(H).
    """
    places = _prepare(alpha, w, places)
    H = int(H)
    m, n = alpha.m, alpha.n
    eps = Fraction(_start_level(w, places))
    floor_eps = None  # largest level known to give an empty candidate set
    ceil_eps = None  # smallest level known to give a truncated one
    for _ in range(400):
        scale = eps / H
        system, _ = residual_congruences(
            alpha, w, places, lambda i, p: Radical.of(scale, w.t(i, p)), strict=True, b_sign=-1
        )
        lattice = congruences_to_lattice(system, m + n)
        if places.has_infinity:
            box = archimedean_box(alpha, scale, H, w, b_sign=-1, strict_residual=True)
        else:
            box = WeightedBox.axis(eta_radii(H, w.eta))
        pts = enumerate_box(lattice, box, cap=cap)
        if pts.points and not pts.truncated:
            break
        if pts.truncated:
            zero = next((z for z in pts.points if _tau_residual(alpha, z, w, places).zero), None)
            if zero is not None:
                return ProfilePoint(H, Radical.zero_value(), True, (zero[:m], zero[m:]))
            ceil_eps = eps
            eps = (eps + floor_eps) / 2 if floor_eps is not None else eps / 4
        else:
            floor_eps = eps
            if ceil_eps is None:
                raise SolverError(f"no candidate below the Dirichlet level at H={H}")
            eps = (eps + ceil_eps) / 2
        if eps < Fraction(1, 2 ** 400):
            raise ResourceError("candidate set never became small enough")
    else:
        raise ResourceError("could not bracket the candidate set")
    scored = [(_tau_residual(alpha, z, w, places), z) for z in pts.points]
    best, z = min(scored, key=lambda rz: (_radical_key(rz[0]), _prefer_leading(canonical_sign(rz[1]))))
    z = canonical_sign(z)
    return ProfilePoint(H, best * H, True, (z[:m], z[m:]))


def singularity_scan(
    alpha: SMatrix,
    grid: Iterable[int] = DEFAULT_GRID,
    threshold=DEFAULT_THRESHOLD,
    w: Weights | None = None,
    places=None,
) -> SingularityVerdict:
    """Profile eps* over ``grid`` and classify.

    NonSingularEvidence when every dyadic band [2^k, 2^(k+1)) met by the upper half
    of the grid contains a height with eps* >= threshold.
    """
    grid = [int(h) for h in grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValidationError("grid must be strictly increasing")
    if not grid:
        raise ValidationError("empty grid")
    if w is None:
        w = Weights.uniform(alpha.m, alpha.n, places or "inf")
    threshold = Fraction(threshold)
    profile = [epsilon_star(alpha, h, w, places) for h in grid]
    witnesses = [pt.H for pt in profile if pt.eps_star >= Radical.of(threshold)]
    upper = grid[len(grid) // 2:]
    bands = {h.bit_length() for h in upper}
    hit = {h.bit_length() for h in witnesses if h in upper}
    verdict = "NonSingularEvidence" if bands <= hit else "SingularEvidence"
    return SingularityVerdict(profile, verdict, witnesses, threshold)
