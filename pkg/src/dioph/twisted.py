"""Inhomogeneous (twisted) Dirichlet solutions for non-singular matrices.

Three constructions, all ending in a certificate that is re-verified from scratch:

* real matrices: a successive-minima basis of the flow box at height H, real
  coordinates of (gamma, 0) in that basis, rounding to nonzero integers;
* inf not in S: a basis of the congruence lattice Gamma(eps, H) against the eta-box,
  coordinates per place, and rationals from strong approximation in a sign window;
* inf in S: as above with the finite places only in the lattice, the real residual in
  the box, and a padding value D that pushes |a_1| above H**eta_1.

Certificates use the caller's convention ``a alpha - b - gamma``.  The constructions
for finite places work internally with ``a alpha + b`` and flip b on the way out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .dirichlet import residual_vector
from .errors import NoWitness, SolverError, StrongApproxError, ValidationError
from .exact import (
    INF,
    AlgebraicReal,
    Place,
    Radical,
    SMatrix,
    SVector,
    as_place,
    crt_solve,
    inverse_mod,
    is_prime,
    radical_max,
    round_half_away,
    sign,
    simplify,
    valuation,
)
from .lattice import (
    IntegerLattice,
    MinimaReport,
    WeightedBox,
    archimedean_box,
    check_integral,
    enumerate_box,
    eta_radii,
    gamma_lattice,
    int_det,
    k_box,
    solve_rational,
    successive_minima,
)
from .weights import PlaceSet, Weights, WeightsReal, eta_norm, tau_norm_parts, validate_weights


# ---------------------------------------------------------------------------
# small helpers
# ---------------------------------------------------------------------------

def round_nonzero(x) -> int:
    """Nearest nonzero integer; 0 maps to +1 and ties round away from zero."""
    if isinstance(x, float):
        x = Fraction(repr(x))
    x = simplify(x)
    k = round_half_away(x)
    if k:
        return k
    return -1 if sign(x) < 0 else 1


def radical_ceil(r: Radical) -> int:
    """Least integer >= r, decided exactly."""
    k = max(0, math.floor(float(r)) - 1)
    while Radical.of(k) < r:
        k += 1
    return k


def _gamma_vector(gamma, n: int, places: PlaceSet) -> SVector:
    if isinstance(gamma, SVector):
        vec = gamma
    elif isinstance(gamma, Mapping):
        vec = SVector(gamma)
    else:
        vals = list(gamma)
        if len(vals) != n:
            raise ValidationError(f"gamma has {len(vals)} entries, expected {n}")
        if places.finite:
            raise ValidationError("a plain gamma sequence only makes sense when S = {inf}")
        vec = SVector({INF: vals})
    if vec.n != n:
        raise ValidationError(f"gamma has {vec.n} entries, expected {n}")
    missing = [p for p in places if p not in vec.places]
    if missing:
        raise ValidationError(f"gamma has no value at {', '.join(map(str, missing))}")
    for p in places.finite:
        for v in vec.at(p):
            if valuation(v, p) < 0:
                raise ValidationError(f"gamma entry {v} is not integral at {p}")
    return vec


def _prepare(alpha: SMatrix, w: Weights, places) -> PlaceSet:
    places = w.places if places is None else PlaceSet.parse(places)
    check = validate_weights(w, places)
    if not check:
        raise ValidationError(check.report())
    if (alpha.m, alpha.n) != (w.m, w.n):
        raise ValidationError(f"alpha is {alpha.m}x{alpha.n} but weights are for {w.m}x{w.n}")
    check_integral(alpha, places.finite)
    return places


# ---------------------------------------------------------------------------
# normalization of the real coordinates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Translation:
    """alpha' = alpha - K and gamma' = gamma - g (integer shifts, applied at every place)."""

    K: tuple[tuple[int, ...], ...]
    g: tuple[int, ...]

    def b_back(self, a: Sequence[int], b_shifted: Sequence[int]) -> tuple[int, ...]:
        """b for the original data from b' solving the shifted problem."""
        n = len(self.g)
        aK = [sum(a[j] * self.K[j][i] for j in range(len(a))) for i in range(n)]
        return tuple(int(bi + x - gi) for bi, x, gi in zip(b_shifted, aK, self.g))

    @property
    def trivial(self) -> bool:
        return not any(any(r) for r in self.K) and not any(self.g)


def normalize(alpha: SMatrix, gamma: SVector, places) -> tuple[SMatrix, SVector, Translation]:
    """Move the real parts of alpha and gamma into [0, 1) by integer shifts.

    The shift is applied at every place, so integrality at the finite places is kept
    and residuals a alpha - b - gamma are unchanged after mapping b back.
    """
    places = PlaceSet.parse(places)
    if not places.has_infinity:
        return alpha, gamma, Translation(tuple((0,) * alpha.n for _ in range(alpha.m)), (0,) * alpha.n)
    K = tuple(tuple(math.floor(v) for v in row) for row in alpha.at(INF))
    g = tuple(math.floor(v) for v in gamma.at(INF))
    new_alpha = SMatrix({p: [[simplify(alpha.at(p)[j][i] - K[j][i]) for i in range(alpha.n)] for j in range(alpha.m)] for p in alpha.places})
    new_gamma = SVector({p: [simplify(gamma.at(p)[i] - g[i]) for i in range(gamma.n)] for p in gamma.places})
    return new_alpha, new_gamma, Translation(K, g)


# ---------------------------------------------------------------------------
# strong approximation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Window:
    """Archimedean constraint lo <= r <= hi (endpoint strictness per flag)."""

    lo: object
    hi: object
    center: object
    lo_strict: bool = False
    hi_strict: bool = False
    label: str = ""

    def contains(self, r) -> bool:
        lo_ok = r > self.lo if self.lo_strict else r >= self.lo
        hi_ok = r < self.hi if self.hi_strict else r <= self.hi
        return bool(lo_ok and hi_ok)

    def to_config(self) -> dict:
        return {
            "lo": str(self.lo),
            "hi": str(self.hi),
            "lo_strict": self.lo_strict,
            "hi_strict": self.hi_strict,
            "label": self.label,
        }


def sign_window(positive: bool, P: int, strict_negative: bool = False) -> Window:
    """|r - 2P| <= P for the positive branch, |r + 2P| <= P (or < P) for the other."""
    P = Fraction(P)
    if positive:
        return Window(P, 3 * P, 2 * P, label="positive")
    return Window(-3 * P, -P, -2 * P, strict_negative, strict_negative, label="negative")


def proximity_window(x, radius) -> Window:
    """|r - x| <= radius."""
    x = simplify(x)
    radius = Fraction(radius)
    return Window(simplify(x - radius), simplify(x + radius), x, label="proximity")


def strong_approx(targets: Mapping, window: Window) -> Fraction:
    """A rational r with |r - x_p|_p <= 1 for each target place p, integral at every other
    prime, and inside ``window``.

    r is z / D with D the product of p**e_p (e_p the denominator exponent of x_p), z fixed
    modulo D by the Chinese remainder theorem; the remaining freedom r + k (k integer)
    is spent on the window, taking the admissible value nearest its center.
    """
    targets = {as_place(p): Fraction(x) for p, x in targets.items()}
    if any(p.is_infinite for p in targets):
        raise ValidationError("strong approximation targets live at finite places")
    exps = {p: max(0, -valuation(x, p)) if x else 0 for p, x in targets.items()}
    D = 1
    for p, e in exps.items():
        D *= p.prime ** e
    congruences = []
    for p, e in exps.items():
        if e:
            mod = p.prime ** e
            congruences.append((mod, inverse_mod(D * targets[p], mod)))
    z0 = crt_solve(congruences)
    base = Fraction(z0, D)
    k = math.floor(simplify(window.center - base))
    best = None
    for kk in range(k - 1, k + 3):
        r = base + kk
        if not window.contains(r):
            continue
        dist = abs(simplify(r - window.center))
        if best is None or dist < best[0]:
            best = (dist, r)
    if best is None:
        # windows of length < 1 may still contain a point further from the center
        lo = math.ceil(simplify(window.lo - base))
        hi = math.floor(simplify(window.hi - base))
        for kk in range(lo, hi + 1):
            r = base + kk
            if window.contains(r):
                best = (None, r)
                break
    if best is None:
        raise StrongApproxError(f"no admissible rational in window [{window.lo}, {window.hi}]")
    return best[1]


def check_strong_approx(r: Fraction, targets: Mapping, window: Window | None) -> dict[str, bool]:
    """Exact recomputation of every strong-approximation constraint."""
    r = Fraction(r)
    targets = {as_place(p): Fraction(x) for p, x in targets.items()}
    checks = {}
    for p, x in targets.items():
        checks[f"|r - x|_{p} <= 1"] = valuation(r - x, p) >= 0
    bad = [q for q in _prime_factors(r.denominator) if as_place(q) not in targets]
    checks["integral outside S"] = not bad
    if window is not None:
        checks[f"window {window.label}"] = window.contains(r)
    return checks


def _prime_factors(n: int) -> list[int]:
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


# ---------------------------------------------------------------------------
# the flow lattice of the real case
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlowLattice:
    """g_t u_alpha Z^{m+n} at e^t = H, kept symbolic.

    The image of (a, b) has coordinates H**tau_i (a alpha - b)_i and H**(-eta_j) a_j.
    """

    alpha: SMatrix
    w: Weights
    H: int

    @property
    def t(self) -> float:
        return math.log(self.H)

    def scalings(self) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
        """Exponents of H on the residual and on the a-coordinates."""
        return tuple(self.w.t(i, INF) for i in range(self.w.n)), tuple(-e for e in self.w.eta_a)

    def determinant(self) -> Radical:
        up, down = self.scalings()
        return Radical.of(self.H, sum(up) + sum(down))

    def image(self, a: Sequence[int], b: Sequence[int]) -> tuple[Radical, ...]:
        """Absolute values of the coordinates of g_t u_alpha (a, b)."""
        res = residual_vector(self.alpha, a, b, [INF])[INF]
        up, down = self.scalings()
        out = [Radical.of(v) * Radical.of(self.H, e) if v else Radical.zero_value() for v, e in zip(res, up)]
        out += [Radical.of(x) * Radical.of(self.H, e) if x else Radical.zero_value() for x, e in zip(a, down)]
        return tuple(out)

    def sup_norm(self, a, b) -> Radical:
        best = Radical.zero_value()
        for r in self.image(a, b):
            if r > best:
                best = r
        return best

    def within(self, a, b, R) -> bool:
        """|g_t u_alpha (a, b)|_inf <= R."""
        return self.sup_norm(a, b) <= Radical.of(R)

    def box(self, R=1) -> WeightedBox:
        """The same condition as a box in (a, b)-coordinates: |a alpha - b|_i <= R H^-tau_i, |a_j| <= R H^eta_j."""
        box = archimedean_box(self.alpha, Fraction(1, self.H), self.H, self.w, b_sign=-1, strict_residual=False)
        return box.scaled(Fraction(R))


# ---------------------------------------------------------------------------
# witness heights
# ---------------------------------------------------------------------------

def witness_box(alpha: SMatrix, eps, H, w: Weights, places: PlaceSet) -> tuple[IntegerLattice, WeightedBox]:
    """Lattice and body whose only common point must be 0 for H to witness non-singularity."""
    eps, H = Fraction(eps), int(H)
    if places.finite:
        lattice = gamma_lattice(alpha, eps, H, w, places)
    else:
        lattice = IntegerLattice.standard(alpha.m + alpha.n)
    box = k_box(alpha, eps, H, w, places, b_sign=1 if places.finite else -1)
    return lattice, box


def is_witness(alpha: SMatrix, eps, H, w: Weights, places=None) -> bool:
    """True when no nonzero lattice point lies in the closed body (so lambda_1 > 1)."""
    places = w.places if places is None else PlaceSet.parse(places)
    lattice, box = witness_box(alpha, eps, H, w, places)
    return not enumerate_box(lattice, box, cap=1, closed=True).points


def find_witness_heights(alpha: SMatrix, w: Weights, places, eps, H_range: Iterable[int]) -> list[int]:
    """Heights H in ``H_range`` at which the eps-tightened homogeneous system has no nonzero solution."""
    places = _prepare(alpha, w, places)
    eps = Fraction(eps)
    if eps <= 0:
        raise ValidationError("eps must be positive")
    return [int(H) for H in H_range if int(H) > 1 and is_witness(alpha, eps, H, w, places)]


def choose_epsilon(alpha: SMatrix, w: Weights, places, H_range: Sequence[int], steps: int = 6, floor=Fraction(1, 1024)) -> Fraction | None:
    """Largest dyadic eps <= 1 (to ``steps`` bisection steps) with a witness in ``H_range``."""
    H_range = list(H_range)
    hi = Fraction(1)
    if find_witness_heights(alpha, w, places, hi, H_range):
        return hi
    lo = hi / 2
    while not find_witness_heights(alpha, w, places, lo, H_range):
        hi, lo = lo, lo / 2
        if lo < floor:
            return None
    for _ in range(steps):
        mid = (lo + hi) / 2
        if find_witness_heights(alpha, w, places, mid, H_range):
            lo = mid
        else:
            hi = mid
    return lo


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

@dataclass
class TwistedTrace:
    basis: list[tuple[int, ...]]
    lambdas: list[Radical]
    exceed: list[tuple[str, int] | None] = field(default_factory=list)
    branch: tuple[str, int] | None = None
    coordinates: dict[Place, list] = field(default_factory=dict)
    rationals: list = field(default_factory=list)
    windows: list[Window] = field(default_factory=list)
    D: int | None = None
    translation: Translation | None = None
    notes: list[str] = field(default_factory=list)

    def to_config(self) -> dict:
        return {
            "basis": [list(v) for v in self.basis],
            "lambdas": [str(l) for l in self.lambdas],
            "exceed": [list(e) if e else None for e in self.exceed],
            "branch": list(self.branch) if self.branch else None,
            "coordinates": {str(p): [str(x) for x in xs] for p, xs in self.coordinates.items()},
            "rationals": [str(r) for r in self.rationals],
            "windows": [wd.to_config() for wd in self.windows],
            "D": self.D,
            "notes": list(self.notes),
        }


@dataclass
class TwistedCertificate:
    """(a, b) with |a alpha - b - gamma|_tau small at a witness height H.

    ``limits`` holds the bounds the construction guarantees, each as a Radical:
    ``residual`` (strict or weak per ``residual_strict``) for the real-case / whole
    tau-norm, ``residual_finite`` and ``residual_inf`` split by place family, and
    per-coordinate ``a[j]`` / ``b[i]`` caps, plus ``a1_lower`` when inf is in S.
    """

    kind: str
    a: tuple[int, ...]
    b: tuple[int, ...]
    H: int
    eps: Fraction
    places: PlaceSet
    residual_tau: Radical
    constants: dict[str, Radical]
    limits: dict[str, Radical]
    residual_strict: bool
    checks: dict[str, bool]
    trace: TwistedTrace

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def key(self) -> tuple:
        return (self.a, self.b)

    def to_config(self) -> dict:
        def show(r: Radical) -> str:
            f = r.as_fraction()
            return str(f) if f is not None else f"{r} ~ {float(r):.12g}"

        return {
            "kind": self.kind,
            "a": list(self.a),
            "b": list(self.b),
            "H": self.H,
            "eps": str(self.eps),
            "places": str(self.places),
            "residual_tau": show(self.residual_tau),
            "residual_tau_upper": str(self.residual_tau.upper_rational(64)),
            "constants": {k: show(v) for k, v in self.constants.items()},
            "limits": {k: show(v) for k, v in self.limits.items()},
            "checks": dict(self.checks),
        }


def _tau_part(parts: Mapping, finite: bool | None) -> Radical:
    best = Radical.zero_value()
    for (i, p), r in parts.items():
        if finite is None or finite != p.is_infinite:
            if r > best:
                best = r
    return best


def verify_certificate(cert: TwistedCertificate, alpha: SMatrix, gamma, w: Weights) -> dict[str, bool]:
    """Recompute residuals and coordinates from (a, b) alone and test them against the limits."""
    places = cert.places
    gamma = _gamma_vector(gamma, alpha.n, places)
    a, b, H = cert.a, cert.b, cert.H
    checks = {}
    checks["integral"] = all(isinstance(x, int) for x in a + b)
    checks["nonzero"] = any(a) or any(b)
    res = residual_vector(alpha, a, b, places, gamma)
    parts = tau_norm_parts(res, w)
    total = _tau_part(parts, None)
    checks["residual matches record"] = total == cert.residual_tau
    invH = Radical.of(Fraction(1, H))
    lim = cert.limits
    if "residual" in lim:
        bound = lim["residual"] * invH
        checks["residual bound"] = total < bound if cert.residual_strict else total <= bound
    if "residual_finite" in lim:
        checks["finite residual bound"] = _tau_part(parts, True) <= lim["residual_finite"] * invH
    if "residual_inf" in lim:
        checks["real residual bound"] = _tau_part(parts, False) <= lim["residual_inf"] * invH
    for j, x in enumerate(a):
        key = f"a[{j + 1}]"
        if key in lim:
            checks[f"|{key}| bound"] = Radical.of(x) <= lim[key] if x else True
    for i, x in enumerate(b):
        key = f"b[{i + 1}]"
        if key in lim:
            checks[f"|{key}| bound"] = Radical.of(x) <= lim[key] if x else True
    if "height" in lim:
        hv = a if places.has_infinity else a + b
        checks["eta-norm bound"] = eta_norm(hv, w.eta[: len(hv)]) <= lim["height"] * Radical.of(H)
    if "a1_lower" in lim:
        checks["|a_1| >= H^eta_1"] = Radical.of(a[0]) >= lim["a1_lower"] if a[0] else False
    if "exceed_lower" in lim:
        kind, idx = cert.trace.branch
        x = (a if kind == "a" else b)[idx]
        checks["branch coordinate exceeds"] = Radical.of(x) > lim["exceed_lower"] if x else False
    return checks


def _finish(cert: TwistedCertificate, alpha, gamma, w) -> TwistedCertificate:
    cert.checks = verify_certificate(cert, alpha, gamma, w)
    if not cert.ok:
        bad = [k for k, v in cert.checks.items() if not v]
        raise SolverError(f"certificate at H={cert.H} fails {bad}")
    return cert


def _minima(lattice: IntegerLattice, box: WeightedBox, bound: Radical) -> MinimaReport:
    rep = successive_minima(lattice, box)
    if rep.lambdas[0] <= Radical.of(1):
        raise NoWitness("first minimum is at most 1")
    if rep.lambdas[-1] > bound:
        raise SolverError("last minimum exceeds the Minkowski bound")
    if int_det(rep.witnesses) == 0:
        raise SolverError("minima witnesses are dependent")
    return rep


def _combine(coeffs: Sequence, vectors: Sequence[Sequence[int]]) -> tuple:
    d = len(vectors[0])
    return tuple(simplify(sum((c * v[k] for c, v in zip(coeffs, vectors)), Fraction(0))) for k in range(d))


def _as_int_vector(v: Sequence, what: str) -> tuple[int, ...]:
    out = []
    for x in v:
        x = Fraction(x)
        if x.denominator != 1:
            raise SolverError(f"{what} is not integral: {x}")
        out.append(int(x))
    return tuple(out)


# ---------------------------------------------------------------------------
# the real construction
# ---------------------------------------------------------------------------

def construct_real(alpha: SMatrix, gamma, H: int, w: Weights, eps=Fraction(1, 2)) -> TwistedCertificate:
    """Round the coordinates of (gamma, 0) in a flow-lattice minima basis to nonzero integers.

    ``H`` must be a witness height for ``eps``.  With lambda_1 of the flow box above
    mu = min(1, eps**tau_max) and unit covolume, every minimum is below
    C_box = mu**-(m+n-1).  The target is padded by D in the a_1 coordinate, so the
    result satisfies |a alpha - b - gamma|_tau < C H^-1 with C = ((m+n) C_box)**(1/min tau),
    H^eta_1 <= |a_1| <= (m+n) C_box H^eta_1 + D and |a_j| < (m+n) C_box H^eta_j otherwise.
    """
    places = PlaceSet.parse("inf")
    if isinstance(w, WeightsReal):
        w = w.as_weights()
    _prepare(alpha, w, places)
    m, n = alpha.m, alpha.n
    d = m + n
    eps, H = Fraction(eps), int(H)
    gamma = _gamma_vector(gamma, n, places)
    if not is_witness(alpha, eps, H, w, places):
        raise NoWitness(f"H={H} is not a witness height for eps={eps}")
    flow = FlowLattice(alpha, w, H)
    taus = [w.t(i, INF) for i in range(n)]
    mu = min(Radical.of(1), Radical.of(eps, max(taus)))
    c_box = Radical.of(1) / mu ** (d - 1)
    rep = successive_minima(IntegerLattice.standard(d), flow.box(1))
    if rep.lambdas[-1] > c_box:
        raise SolverError("last minimum exceeds the Minkowski bound")
    basis = list(rep.witnesses)
    # aim at a point with a_1 = D exactly; rounding moves a_1 by at most sum |v_1|
    D = radical_ceil(Radical.of(H, w.eta[0])) + sum(abs(v[0]) for v in basis)
    g = gamma.at(INF)
    target = [Fraction(D)] + [Fraction(0)] * (m - 1)
    target += [simplify(D * alpha.at(INF)[0][i] - g[i]) for i in range(n)]
    x = solve_rational(basis, target)
    y = [round_nonzero(v) for v in x]
    z = _as_int_vector(_combine(y, basis), "rounded combination")
    a, b = z[:m], z[m:]
    scale = c_box * d
    limits = {"residual": scale ** (1 / min(taus)), "a1_lower": Radical.of(H, w.eta[0])}
    for j in range(m):
        cap = scale * Radical.of(H, w.eta[j])
        limits[f"a[{j + 1}]"] = Radical.of(_upper_sum(cap, D)) if j == 0 else cap
    limits["height"] = radical_max(
        (limits[f"a[{j + 1}]"] / Radical.of(H, w.eta[j])) ** (1 / w.eta[j]) for j in range(m)
    )
    res = residual_vector(alpha, a, b, places, gamma)
    total = _tau_part(tau_norm_parts(res, w), None)
    trace = TwistedTrace(basis, list(rep.lambdas), coordinates={INF: list(x)}, rationals=y, D=D)
    cert = TwistedCertificate(
        "real", a, b, H, eps, places, total,
        {"C_box": c_box, "lambda_last": rep.lambdas[-1], "mu": mu, "D": Radical.of(D)},
        limits, True, {}, trace,
    )
    return _finish(cert, alpha, gamma, w)


# ---------------------------------------------------------------------------
# inf not in S
# ---------------------------------------------------------------------------

def _exceed_index(v: Sequence[int], H: int, w: Weights) -> tuple[str, int] | None:
    m = w.m
    for i, x in enumerate(v[m:] if len(w.eta) > m else ()):
        if x and Radical.of(x) > Radical.of(H, w.eta[m + i]):
            return ("b", i)
    for j, x in enumerate(v[:m]):
        if x and Radical.of(x) > Radical.of(H, w.eta[j]):
            return ("a", j)
    return None


def construct_s_finite(alpha: SMatrix, gamma, eps, H: int, w: Weights, places=None) -> TwistedCertificate:
    """Twisted solution when inf is not in S.

    Returns (a, b) with |a alpha - b - gamma|_tau <= eps H^-1 and
    |z_k| <= 3 P (m+n) C_0 H^eta_k, where P is the product of S and
    C_0 = eps^-(m+n) prod nu^(m+2n) bounds the last minimum.
    """
    places = _prepare(alpha, w, places)
    if places.has_infinity:
        raise ValidationError("construct_s_finite needs inf outside S")
    m, n = alpha.m, alpha.n
    d = m + n
    eps, H = Fraction(eps), int(H)
    gamma = _gamma_vector(gamma, n, places)
    if not is_witness(alpha, eps, H, w, places):
        raise NoWitness(f"H={H} is not a witness height for eps={eps}")
    P = places.finite_product
    c0 = Radical.of(Fraction(1) / eps, d) * Radical.of(P, m + 2 * n)
    lattice, box = witness_box(alpha, eps, H, w, places)
    rep = _minima(lattice, box, c0)
    basis = list(rep.witnesses)
    exceed = [_exceed_index(v, H, w) for v in basis]
    if any(e is None for e in exceed):
        raise SolverError("a basis vector has height at most H at a witness height")
    branch = exceed[0]
    kind, idx = branch
    col = idx if kind == "a" else m + idx
    coords = {}
    for p in places.finite:
        coords[p] = solve_rational(basis, [Fraction(0)] * m + list(gamma.at(p)))
    rs, windows = [], []
    for l, v in enumerate(basis):
        window = sign_window(v[col] > 0, P)
        r = strong_approx({p: coords[p][l] for p in places.finite}, window)
        checks = check_strong_approx(r, {p: coords[p][l] for p in places.finite}, window)
        if not all(checks.values()):
            raise SolverError(f"strong approximation output violates {checks}")
        rs.append(r)
        windows.append(window)
    z = _as_int_vector(_combine(rs, basis), "assembled (a, b)")
    a, b_internal = z[:m], z[m:]
    b = tuple(-x for x in b_internal)
    K = Radical.of(3 * P * d) * c0
    limits = {"residual": Radical.of(eps), "exceed_lower": Radical.of(H, w.eta[col])}
    for j in range(m):
        limits[f"a[{j + 1}]"] = K * Radical.of(H, w.eta[j])
    for i in range(n):
        limits[f"b[{i + 1}]"] = K * Radical.of(H, w.eta[m + i])
    limits["height"] = K ** (1 / min(w.eta))
    res = residual_vector(alpha, a, b, places, gamma)
    total = _tau_part(tau_norm_parts(res, w), None)
    trace = TwistedTrace(
        basis, list(rep.lambdas), exceed, (kind, idx), coords, rs, windows,
        notes=["negative sign window taken as closed"],
    )
    cert = TwistedCertificate(
        "s_finite", a, b, H, eps, places, total,
        {"C_0": c0, "coordinate_factor": K, "lambda_last": rep.lambdas[-1]},
        limits, False, {}, trace,
    )
    return _finish(cert, alpha, gamma, w)


# ---------------------------------------------------------------------------
# inf in S
# ---------------------------------------------------------------------------

def construct_s_infinite(alpha: SMatrix, gamma, eps, H: int, w: Weights, places=None) -> TwistedCertificate:
    """Twisted solution when inf is in S.

    With S* = S minus inf, P* its product and C_0 = eps^-m P*^(m+n) bounding the last
    minimum, the result satisfies
    |a alpha - b - gamma|_{tau*} <= eps H^-1 at the finite places,
    |a alpha - b - gamma|_{tau_inf} <= eps ((m+n) P* C_0)^(1/min tau_inf) H^-1 at inf,
    H^eta_1 <= |a_1| <= (m+n) P* C_0 H^eta_1 + D and |a_k| <= (m+n) P* C_0 H^eta_k.
    For S = {inf} this is the real construction.
    """
    places = _prepare(alpha, w, places)
    if not places.has_infinity:
        raise ValidationError("construct_s_infinite needs inf in S")
    if not places.finite:
        return construct_real(alpha, gamma, H, w, eps)
    m, n = alpha.m, alpha.n
    d = m + n
    eps, H = Fraction(eps), int(H)
    gamma = _gamma_vector(gamma, n, places)
    orig_alpha, orig_gamma = alpha, gamma
    alpha, gamma, shift = normalize(alpha, gamma, places)
    if not is_witness(alpha, eps, H, w, places):
        raise NoWitness(f"H={H} is not a witness height for eps={eps}")
    P = places.finite_product
    c0 = Radical.of(Fraction(1) / eps, m) * Radical.of(P, d)
    lattice, box = witness_box(alpha, eps, H, w, places)
    rep = _minima(lattice, box, c0)
    basis = list(rep.witnesses)
    D = radical_ceil(Radical.of(H, w.eta[0])) + P * sum(abs(v[0]) for v in basis)
    coords = {}
    for p in places.finite:
        coords[p] = solve_rational(basis, [Fraction(0)] * m + list(gamma.at(p)))
    a_target = [Fraction(D)] + [Fraction(0)] * (m - 1)
    al_inf = alpha.at(INF)
    b_target = [simplify(gamma.at(INF)[i] - D * al_inf[0][i]) for i in range(n)]
    coords[INF] = solve_rational(basis, a_target + b_target)
    rs, windows = [], []
    for l in range(d):
        fin = {p: coords[p][l] for p in places.finite}
        window = proximity_window(coords[INF][l], P)
        r = strong_approx(fin, window)
        checks = check_strong_approx(r, fin, window)
        if not all(checks.values()):
            raise SolverError(f"strong approximation output violates {checks}")
        rs.append(r)
        windows.append(window)
    z = _as_int_vector(_combine(rs, basis), "assembled (a, b)")
    a, b_internal = z[:m], z[m:]
    b = shift.b_back(a, tuple(-x for x in b_internal))
    spread = Radical.of(d * P) * c0
    tau_inf_min = min(w.t(i, INF) for i in range(n))
    limits = {
        "residual_finite": Radical.of(eps),
        "residual_inf": Radical.of(eps) * spread ** (1 / tau_inf_min),
        "a1_lower": Radical.of(H, w.eta[0]),
    }
    for j in range(m):
        cap = spread * Radical.of(H, w.eta[j])
        limits[f"a[{j + 1}]"] = Radical.of(_upper_sum(cap, D)) if j == 0 else cap
    res = residual_vector(orig_alpha, a, b, places, orig_gamma)
    total = _tau_part(tau_norm_parts(res, w), None)
    trace = TwistedTrace(
        basis, list(rep.lambdas), [_exceed_index(v, H, w) for v in basis], None,
        coords, rs, windows, D, shift,
        notes=["D uses the ceiling of H^eta_1"],
    )
    cert = TwistedCertificate(
        "s_infinite", a, b, H, eps, places, total,
        {"C_0": c0, "spread": spread, "lambda_last": rep.lambdas[-1], "D": Radical.of(D)},
        limits, False, {}, trace,
    )
    return _finish(cert, orig_alpha, orig_gamma, w)


def _upper_sum(cap: Radical, D: int) -> Fraction:
    """A rational upper bound for cap + D (cap enclosed from above)."""
    return cap.upper_rational(64) + D


def construct(alpha: SMatrix, gamma, eps, H: int, w: Weights, places=None) -> TwistedCertificate:
    """Dispatch on S."""
    places = w.places if places is None else PlaceSet.parse(places)
    if places.has_infinity:
        return construct_s_infinite(alpha, gamma, eps, H, w, places)
    return construct_s_finite(alpha, gamma, eps, H, w, places)


def certificate_sequence(
    alpha: SMatrix,
    gamma,
    eps,
    w: Weights,
    places,
    heights: Iterable[int],
    count: int | None = None,
) -> list[TwistedCertificate]:
    """Certificates along increasing witness heights, one per new (a, b).

    A pair can stay admissible over a stretch of heights; a height whose
    construction repeats an earlier pair is passed over, so the returned
    certificates are pairwise distinct.  Non-witness heights are skipped.
    """
    out: list[TwistedCertificate] = []
    seen: set = set()
    for H in sorted(set(int(h) for h in heights)):
        try:
            cert = construct(alpha, gamma, eps, H, w, places)
        except NoWitness:
            continue
        if cert.key() in seen:
            continue
        seen.add(cert.key())
        out.append(cert)
        if count is not None and len(out) >= count:
            break
    return out
