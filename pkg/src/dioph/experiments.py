"""Shrinking-target experiments: sampling, target sets, liminf statistics, CI probe, emission.

Randomness comes from numpy's PCG64 generator.  A run has one master seed; sample
or shard ``s`` draws from ``SeedSequence([master, s])``, so any subset of shards can be
recomputed on its own and merged in any order.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .dirichlet import residual_vector
from .errors import ResourceError, ValidationError
from .exact import (
    INF,
    AlgebraicReal,
    Place,
    Radical,
    RealInterval,
    SMatrix,
    SVector,
    as_place,
    crt_solve,
    format_value,
    parse_value,
    place_norm,
    simplify,
)
from .lattice import (
    WeightedBox,
    archimedean_box,
    check_integral,
    congruences_to_lattice,
    enumerate_box,
    eta_radii,
    residual_congruences,
)
from .weights import PlaceSet, Weights, eta_norm, validate_weights

DEFAULT_PRECISION = 64
LIMINF_CAP = 5000
MEMBERSHIP_CAP = 100_000


# ---------------------------------------------------------------------------
# random sampling
# ---------------------------------------------------------------------------

def shard_rng(seed: int, shard: int) -> np.random.Generator:
    """Generator for shard ``shard`` of a run with master seed ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(shard)])))


def _random_bits(rng: np.random.Generator, bits: int) -> int:
    words = rng.integers(0, 2 ** 32, size=(bits + 31) // 32, dtype=np.uint64)
    x = 0
    for word in words:
        x = (x << 32) | int(word)
    return x >> (32 * len(words) - bits)


def _random_digits(rng: np.random.Generator, prime: int, digits: int) -> int:
    ds = rng.integers(0, prime, size=digits)
    return sum(int(d) * prime ** k for k, d in enumerate(ds))


def sample_gamma(seed: int, places, n: int, precision: int = DEFAULT_PRECISION, shard: int = 0) -> SVector:
    """A Haar-random point of Z_S^n (times [0, 1)^n at inf), truncated to ``precision``.

    Finite places get an integer below p**precision (its first ``precision`` p-adic
    digits); inf gets a dyadic rational in [0, 1) with ``precision`` bits.
    """
    if precision < 1:
        raise ValidationError("precision must be at least 1")
    places = PlaceSet.parse(places)
    rng = shard_rng(seed, shard)
    out = {}
    for p in places:
        if p.is_infinite:
            out[p] = [Fraction(_random_bits(rng, precision), 2 ** precision) for _ in range(n)]
        else:
            out[p] = [Fraction(_random_digits(rng, p.prime, precision)) for _ in range(n)]
    return SVector(out)


def sample_gammas(seed: int, places, n: int, count: int, precision: int = DEFAULT_PRECISION) -> list[SVector]:
    return [sample_gamma(seed, places, n, precision, shard=s) for s in range(count)]


# ---------------------------------------------------------------------------
# target sets
# ---------------------------------------------------------------------------

def _tau_residual(residuals: Mapping, w: Weights) -> Radical:
    best = Radical.zero_value()
    for p, vec in residuals.items():
        for i, v in enumerate(vec):
            r = Radical.of(place_norm(v, p), 1 / w.t(i, p))
            if r > best:
                best = r
    return best


def _prepare(alpha: SMatrix, w: Weights, places) -> PlaceSet:
    places = w.places if places is None else PlaceSet.parse(places)
    check = validate_weights(w, places)
    if not check:
        raise ValidationError(check.report())
    if (alpha.m, alpha.n) != (w.m, w.n):
        raise ValidationError(f"alpha is {alpha.m}x{alpha.n} but weights are for {w.m}x{w.n}")
    check_integral(alpha, places.finite)
    return places


@dataclass(frozen=True)
class TargetQuery:
    """Is gamma in B(delta): |a alpha + b + gamma|_tau <= delta / |phi(a, b)|_eta ?

    phi(a, b) is (a, b) when inf is not in S, and a when it is; in the latter case b
    is not given and the residual is minimised over b.
    """

    a: tuple[int, ...]
    delta: Fraction
    b: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))
        object.__setattr__(self, "delta", Fraction(self.delta))
        if self.b is not None:
            object.__setattr__(self, "b", tuple(int(x) for x in self.b))
        if self.delta < 0:
            raise ValidationError("delta must be non-negative")


@dataclass(frozen=True)
class MembershipResult:
    member: bool
    b: tuple[int, ...] | None
    residual: Radical | None
    bound: Radical

    def __bool__(self):
        return self.member


def _b_candidates(alpha: SMatrix, a, gamma: SVector, radii: Sequence[Radical]) -> list[range]:
    """Integer b_i with |(a alpha_inf + gamma_inf)_i + b_i| <= radius_i, padded by one."""
    centre = [simplify(-(x + g)) for x, g in zip(alpha.apply(a, INF), gamma.at(INF))]
    out = []
    for c, r in zip(centre, radii):
        lo = math.floor(c) - math.ceil(float(r.upper_rational(32))) - 1
        hi = math.ceil(c) + math.ceil(float(r.upper_rational(32))) + 1
        out.append(range(lo, hi + 1))
    return out


def target_membership(alpha: SMatrix, gamma: SVector, q: TargetQuery, w: Weights, places=None) -> MembershipResult:
    places = _prepare(alpha, w, places)
    m, n = alpha.m, alpha.n
    if len(q.a) != m:
        raise ValidationError(f"a has {len(q.a)} entries, expected {m}")
    if places.has_infinity:
        if q.b is not None:
            raise ValidationError("b is minimised over when inf is in S; do not pass it")
        phi = q.a
    else:
        if q.b is None or len(q.b) != n:
            raise ValidationError(f"b with {n} entries is required when inf is not in S")
        phi = q.a + q.b
    height = eta_norm(phi, w.eta)
    if height.zero:
        raise ValidationError("phi(a, b) must be nonzero")
    bound = Radical.of(q.delta) / height

    def residual(b):
        # B(delta) is defined with a alpha + b + gamma; residual_vector uses a alpha - b - gamma
        res = residual_vector(alpha, q.a, tuple(-x for x in b), places, _negate(gamma))
        return _tau_residual(res, w)

    if not places.has_infinity:
        r = residual(q.b)
        return MembershipResult(r <= bound, q.b, r, bound)
    radii = [bound ** w.t(i, INF) if not bound.zero else Radical.zero_value() for i in range(n)]
    ranges = _b_candidates(alpha, q.a, gamma, radii)
    if math.prod(len(r) for r in ranges) > MEMBERSHIP_CAP:
        raise ResourceError("b search box too large; lower delta")
    best = None
    for b in itertools.product(*ranges):
        r = residual(b)
        if best is None or r < best[0]:
            best = (r, tuple(b))
    r, b = best
    return MembershipResult(r <= bound, b, r, bound)


def _negate(gamma: SVector) -> SVector:
    return SVector({p: [simplify(-v) for v in gamma.at(p)] for p in gamma.places})


# ---------------------------------------------------------------------------
# liminf statistic
# ---------------------------------------------------------------------------

@dataclass
class LiminfRecord:
    """stat(A) = min over 0 < height <= A of height * |a alpha - b - gamma|_tau.

    The height is |a|_eta (b minimised over) when inf is in S, else |(a, b)|_eta.
    """

    gamma: SVector
    grid: tuple
    stats: tuple[Radical, ...]
    minimizers: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
    seed: int | None = None
    shard: int | None = None

    def monotone(self) -> bool:
        return all(not (y > x) for x, y in zip(self.stats, self.stats[1:]))

    def rows(self) -> list[dict]:
        out = []
        for A, s, (a, b) in zip(self.grid, self.stats, self.minimizers):
            out.append({
                "seed": "" if self.seed is None else self.seed,
                "shard": "" if self.shard is None else self.shard,
                "A": A,
                "stat": s,
                "stat_float": f"{float(s):.12g}",
                "a": list(a),
                "b": list(b),
            })
        return out

    def to_config(self) -> dict:
        return {
            "gamma": self.gamma.to_config(),
            "grid": [str(Fraction(A)) for A in self.grid],
            "stats": [radical_to_config(s) for s in self.stats],
            "minimizers": [[list(a), list(b)] for a, b in self.minimizers],
            "seed": self.seed,
            "shard": self.shard,
        }

    @classmethod
    def from_config(cls, cfg: Mapping) -> "LiminfRecord":
        return cls(
            gamma=SVector(cfg["gamma"]),
            grid=tuple(_grid_value(Fraction(A)) for A in cfg["grid"]),
            stats=tuple(radical_from_config(s) for s in cfg["stats"]),
            minimizers=tuple((tuple(a), tuple(b)) for a, b in cfg["minimizers"]),
            seed=cfg.get("seed"),
            shard=cfg.get("shard"),
        )


def _grid_value(A: Fraction):
    return int(A) if A.denominator == 1 else A


def _shell_bounds(grid: Sequence, start: Fraction) -> list[Fraction]:
    top = max(Fraction(A) for A in grid)
    marks = {start}
    k = 1
    while Fraction(2 ** k) < top:
        marks.add(Fraction(2 ** k))
        k += 1
    marks.update(Fraction(A) for A in grid)
    return sorted(x for x in marks if x >= start)


class _ShellSearch:
    """Candidates (a, b) with height <= hi and tau-residual <= s / lo, checked exactly."""

    def __init__(self, alpha: SMatrix, gamma: SVector, w: Weights, places: PlaceSet, cap: int, above=0):
        self.alpha, self.gamma, self.w, self.places, self.cap = alpha, gamma, w, places, cap
        self.above = Radical.of(above) if above else None
        self.m, self.n = alpha.m, alpha.n

    def height(self, z) -> Radical:
        coords = z[: self.m] if self.places.has_infinity else z
        return eta_norm(coords, self.w.eta)

    def product(self, z) -> tuple[Radical, Radical]:
        h = self.height(z)
        res = residual_vector(self.alpha, z[: self.m], z[self.m:], self.places, self.gamma)
        return h, h * _tau_residual(res, self.w)

    def candidates(self, lo: Fraction, hi: Fraction, s: Fraction):
        alpha, w, places, m, n = self.alpha, self.w, self.places, self.m, self.n
        ratio = s / lo
        system, offsets = residual_congruences(
            alpha, w, places, lambda i, p: Radical.of(ratio, w.t(i, p)),
            strict=False, b_sign=-1, gamma=self.gamma,
        )
        lattice = congruences_to_lattice(system, m + n)
        offset = (0,) * m + tuple(crt_solve(offsets[i]) if offsets[i] else 0 for i in range(n))
        if places.has_infinity:
            box = archimedean_box(alpha, ratio, hi, w, b_sign=-1, strict_residual=False)
            box = box.shifted(tuple([Fraction(0)] * m + list(self.gamma.at(INF))))
        else:
            box = WeightedBox.axis(eta_radii(hi, w.eta))
        pts = enumerate_box(lattice, box, cap=self.cap, offset=offset, closed=True, exclude_zero=True)
        keep = [z for z in pts.points if any(z[:m]) or (not places.has_infinity and any(z))]
        return keep, pts.truncated


def liminf_statistic(
    alpha: SMatrix,
    gamma,
    grid: Sequence,
    w: Weights,
    places=None,
    *,
    seed: int | None = None,
    shard: int | None = None,
    above=0,
    cap: int = LIMINF_CAP,
) -> LiminfRecord:
    """Exact stat(A) for every A in the increasing ``grid``.

    Heights are processed in shells (lo, hi] between dyadic marks and grid points.
    In a shell, any point beating the current best s has residual <= s / lo, which
    is a bounded (coset of a) lattice box; the level is raised or lowered until the
    box is small enough to enumerate and contains a point of product <= s.
    """
    places = _prepare(alpha, w, places)
    if isinstance(gamma, SVector):
        gvec = gamma
    else:
        gvec = SVector({INF: list(gamma)}) if places == PlaceSet.parse("inf") else SVector(gamma)
    grid = tuple(grid)
    above = Fraction(above)
    if not grid or any(Fraction(y) <= Fraction(x) for x, y in zip(grid, grid[1:])):
        raise ValidationError("grid must be non-empty and strictly increasing")
    if Fraction(grid[0]) < 1 or Fraction(grid[0]) <= above:
        raise ValidationError("grid heights must be at least 1 and above the height floor")
    for p in places.finite:
        for v in gvec.at(p):
            if Fraction(v).denominator % p.prime == 0:
                raise ValidationError(f"gamma entry {v} is not integral at {p}")
    search = _ShellSearch(alpha, gvec, w, places, cap, above)
    best: tuple[Radical, tuple] | None = None
    stats, minimizers = [], []
    grid_marks = {Fraction(A): i for i, A in enumerate(grid)}
    lo = max(Fraction(1), above)
    for hi in _shell_bounds(grid, lo):
        best = _scan_shell(search, lo, hi, best)
        lo = hi
        if hi in grid_marks:
            stats.append(best[0])
            z = best[1]
            minimizers.append((z[: alpha.m], z[alpha.m:]))
    return LiminfRecord(gvec, grid, tuple(stats), tuple(minimizers), seed, shard)


def _shell_has_heights(lo: Fraction, hi: Fraction, eta: Sequence[Fraction]) -> bool:
    """Does some integer vector have eta-height in (lo, hi]?  Heights are max |z_j|**(1/eta_j)."""
    for e in eta:
        k = math.floor(Radical.of(hi, e).upper_rational(64))
        while k >= 1 and Radical.of(k).compare(Radical.of(hi, e)) > 0:
            k -= 1
        if k >= 1 and Radical.of(k).compare(Radical.of(lo, e)) > 0:
            return True
    return False


def _scan_shell(search: _ShellSearch, lo: Fraction, hi: Fraction, best):
    eta = search.w.eta_a if search.places.has_infinity else search.w.eta
    if hi <= lo or not _shell_has_heights(lo, hi, eta) or (best is not None and best[0].zero):
        return best
    s = Fraction(4) if best is None else best[0].upper_rational(64)
    s_lo = s_hi = None
    for _ in range(200):
        pts, truncated = search.candidates(lo, hi, s)
        if truncated:
            s_hi = s
            s = (s + s_lo) / 2 if s_lo is not None else s / 4
            continue
        found = None
        for z in pts:
            h, q = search.product(z)
            if h.compare(Radical.of(hi)) > 0 or (search.above is not None and not (h > search.above)):
                continue
            if found is None or q < found[0]:
                found = (q, z)
        if found is not None and found[0] <= Radical.of(s):
            if best is None or found[0] < best[0]:
                return found
            return best
        if best is not None and not (Radical.of(s) < best[0]):
            # nothing in the shell beats the current best
            return best
        s_lo = s
        s = (s + s_hi) / 2 if s_hi is not None else 2 * s
    raise ResourceError(f"could not size the search at heights ({lo}, {hi}]")


# ---------------------------------------------------------------------------
# serialisation of exact values
# ---------------------------------------------------------------------------

def radical_to_config(r: Radical) -> dict:
    """Exact factor list plus a 64-bit dyadic enclosure for readers without the library."""
    if r.zero:
        return {"factors": [], "zero": True, "interval": ["0", "0"]}
    iv = r.enclose(64)
    return {
        "factors": [[format_value(base), str(Fraction(e))] for base, e in r.factors],
        "interval": [str(iv.lo), str(iv.hi)],
    }


def radical_from_config(cfg: Mapping) -> Radical:
    if cfg.get("zero"):
        return Radical.zero_value()
    return Radical([(parse_value(b), Fraction(e)) for b, e in cfg["factors"]])


# ---------------------------------------------------------------------------
# Monte-Carlo probe of scale invariance for limsup sets
# ---------------------------------------------------------------------------

TARGET_KINDS = ("dyadic", "rotation")
DEFAULT_WINDOWS = (1, 5, 10, 15)
SHARD_SIZE = 2500


@dataclass
class CIExperiment:
    """Hits of x in Delta(S_i, s * delta_i) for i in [1, levels], at scales s = c and s = C.

    ``dyadic``: S_i = 2^-i Z^n, delta_i = 2^-i; hits are decided exactly on dyadic samples.
    ``rotation``: S_i = {i alpha mod 1}, delta_i = 1 / (i log(i + 1)); decided in float64.
    """

    kind: str = "dyadic"
    c: Fraction = Fraction(1, 10)
    C: Fraction = Fraction(9, 10)
    samples: int = 10_000
    levels: int = 20
    n: int = 1
    alpha: tuple = ()
    windows: tuple[int, ...] = DEFAULT_WINDOWS
    seed: int = 0
    precision: int = DEFAULT_PRECISION

    def __post_init__(self):
        self.c, self.C = Fraction(self.c), Fraction(self.C)
        if self.kind not in TARGET_KINDS:
            raise ValidationError(f"unknown target sequence {self.kind!r}; choose from {TARGET_KINDS}")
        if not 0 < self.c <= self.C:
            raise ValidationError("scales must satisfy 0 < c <= C")
        if self.samples < 1 or self.levels < 1:
            raise ValidationError("samples and levels must be positive")
        if not 1 <= self.precision <= 64:
            raise ValidationError("precision must be between 1 and 64 bits")
        if self.kind == "dyadic" and self.levels >= self.precision:
            raise ValidationError("dyadic levels must stay below the sample precision")
        if self.kind == "rotation":
            self.alpha = tuple(float(x) for x in self.alpha) or ((1 + math.sqrt(5)) / 2,) * self.n
            self.n = len(self.alpha)
        self.windows = tuple(sorted(set(int(w) for w in self.windows if 1 <= int(w) <= self.levels))) or (1,)
        deltas = self.deltas()
        if any(not b < a for a, b in zip(deltas, deltas[1:])):
            raise ValidationError("delta_i must decrease strictly over the level range")

    def deltas(self) -> list[float]:
        if self.kind == "dyadic":
            return [2.0 ** -i for i in range(1, self.levels + 1)]
        return [1 / (i * math.log(i + 1)) for i in range(1, self.levels + 1)]


@dataclass
class CIEstimate:
    window: tuple[int, int]
    scale: Fraction
    hits: int
    samples: int

    @property
    def fraction(self) -> float:
        return self.hits / self.samples

    def half_width(self, z: float = 1.96) -> float:
        """Wilson score half-width."""
        n, p = self.samples, self.fraction
        return z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / (1 + z * z / n)


@dataclass
class CIResult:
    spec: CIExperiment
    estimates: dict
    subset_violations: int
    discretization: Fraction

    def pair(self, window_start: int) -> tuple[CIEstimate, CIEstimate]:
        return self.estimates[(window_start, self.spec.c)], self.estimates[(window_start, self.spec.C)]

    def rows(self) -> list[dict]:
        out = []
        for I0 in self.spec.windows:
            lo, hi = self.pair(I0)
            diff = hi.fraction - lo.fraction
            out.append({
                "window_lo": I0,
                "window_hi": self.spec.levels,
                "c": self.spec.c,
                "C": self.spec.C,
                "hits_c": lo.hits,
                "hits_C": hi.hits,
                "samples": lo.samples,
                "estimate_c": f"{lo.fraction:.6f}",
                "estimate_C": f"{hi.fraction:.6f}",
                "difference": f"{diff:.6f}",
                "half_width": f"{math.hypot(lo.half_width(), hi.half_width()):.6f}",
                "subset_violations": self.subset_violations,
                "discretization": self.discretization,
            })
        return out


def _dyadic_hits(spec: CIExperiment, rng: np.random.Generator, count: int, scale: Fraction) -> np.ndarray:
    """hits[k, i-1]: sample k lies within scale * 2^-i of 2^-i Z^n in every coordinate."""
    P = spec.precision
    mask = np.uint64((1 << P) - 1) if P < 64 else np.uint64(2 ** 64 - 1)
    X = rng.integers(0, 2 ** P, size=(count, spec.n), dtype=np.uint64, endpoint=False) if P < 64 else \
        rng.integers(0, 2 ** 64 - 1, size=(count, spec.n), dtype=np.uint64, endpoint=True)
    full = 1 << P
    below = min(full, math.ceil(scale * full))  # frac < s  <=>  Y < ceil(s 2^P)
    above = math.floor((1 - scale) * full)  # 1 - frac < s  <=>  Y > floor((1 - s) 2^P)
    hits = np.zeros((count, spec.levels), dtype=bool)
    for i in range(1, spec.levels + 1):
        Y = (X << np.uint64(i)) & mask
        near = Y < np.uint64(below) if below < full else np.ones_like(Y, dtype=bool)
        if above < 0:
            near |= True
        elif above < full:
            near |= Y > np.uint64(above)
        hits[:, i - 1] = near.all(axis=1)
    return hits


def _rotation_hits(spec: CIExperiment, rng: np.random.Generator, count: int, scale: Fraction) -> np.ndarray:
    P = spec.precision
    X = rng.integers(0, 2 ** min(P, 53), size=(count, spec.n)) / float(2 ** min(P, 53))
    alpha = np.array(spec.alpha)
    s = float(scale)
    hits = np.zeros((count, spec.levels), dtype=bool)
    for i, delta in enumerate(spec.deltas(), start=1):
        y = (X - i * alpha) % 1.0
        dist = np.minimum(y, 1.0 - y)
        hits[:, i - 1] = (dist < s * delta).all(axis=1)
    return hits


def _shard_hits(spec: CIExperiment, shard: int, count: int) -> dict:
    draw = _dyadic_hits if spec.kind == "dyadic" else _rotation_hits
    # both scales see the same sample points: one generator state per scale, same seed
    return {s: draw(spec, shard_rng(spec.seed, shard), count, s) for s in {spec.c, spec.C}}


def ci_simulation(spec: CIExperiment) -> CIResult:
    counts = {(I0, s): 0 for I0 in spec.windows for s in (spec.c, spec.C)}
    violations = 0
    shards = math.ceil(spec.samples / SHARD_SIZE)
    for shard in range(shards):
        count = min(SHARD_SIZE, spec.samples - shard * SHARD_SIZE)
        hits = _shard_hits(spec, shard, count)
        violations += int(np.sum(hits[spec.c] & ~hits[spec.C]))
        for I0 in spec.windows:
            for s in {spec.c, spec.C}:
                counts[(I0, s)] += int(np.sum(hits[s][:, I0 - 1:].any(axis=1)))
    estimates = {key: CIEstimate((key[0], spec.levels), key[1], v, spec.samples) for key, v in counts.items()}
    return CIResult(spec, estimates, violations, Fraction(1, 2 ** spec.precision))


def ci_hit_matrix(spec: CIExperiment, shard: int = 0, count: int | None = None) -> dict:
    """The raw boolean hit matrices (sample x level) of one shard, per scale."""
    count = min(SHARD_SIZE, spec.samples) if count is None else count
    return _shard_hits(spec, shard, count)


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

def to_jsonable(x: Any):
    """Plain JSON data; rationals become "num/den", irrationals a [lo, hi] dyadic pair."""
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, Radical):
        f = x.as_fraction() if not x.zero else Fraction(0)
        if f is not None:
            return to_jsonable(f)
        iv = x.enclose(64)
        return [to_jsonable(iv.lo), to_jsonable(iv.hi)]
    if isinstance(x, AlgebraicReal):
        iv = x.enclose(64)
        return [to_jsonable(iv.lo), to_jsonable(iv.hi)]
    if isinstance(x, RealInterval):
        return [to_jsonable(x.lo), to_jsonable(x.hi)]
    if isinstance(x, Place):
        return str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, Mapping):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if hasattr(x, "to_config"):
        return to_jsonable(x.to_config())
    raise ValidationError(f"cannot serialise {type(x).__name__}")


def _csv_cell(v) -> str:
    v = to_jsonable(v)
    if isinstance(v, list):
        return json.dumps(v, separators=(",", ":"))
    if v is None:
        return ""
    return str(v)


def render(results, fmt: str, header: Sequence[str] | None = None) -> str:
    """``results``: a list of row dicts (csv) or any serialisable value (json)."""
    if fmt == "json":
        return json.dumps(to_jsonable(results), indent=2, sort_keys=True) + "\n"
    if fmt != "csv":
        raise ValidationError(f"unknown format {fmt!r}; use csv or json")
    rows = list(results)
    if header is None:
        if not rows:
            raise ValidationError("an empty CSV needs an explicit header")
        header = list(rows[0])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(row.get(k)) for k in header])
    return buf.getvalue()


def emit(results, fmt: str, path=None, header: Sequence[str] | None = None) -> str:
    """Render and write to ``path`` (stdout-style return value when ``path`` is None)."""
    text = render(results, fmt, header)
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


LIMINF_HEADER = ("seed", "shard", "A", "stat", "stat_float", "a", "b")
PROFILE_HEADER = ("H", "eps_star_num", "eps_star_den", "attained", "exact", "eps_star_float")
