"""Weight systems and the weighted quasi-norms built from them.

Weights are rationals.  A quasi-norm value ``max |x|**(1/w)`` is returned as a
:class:`~dioph.exact.Radical`, so comparing it against ``eps / H`` (or any
other bound) is exact: no fractional power is ever evaluated in floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import ValidationError
from .exact import (
    INF,
    Place,
    Radical,
    SNumber,
    as_place,
    place_norm,
    radical_max,
    simplify,
)


@dataclass(frozen=True)
class PlaceSet:
    places: tuple[Place, ...]

    def __post_init__(self):
        ps = tuple(as_place(p) for p in self.places)
        if not ps:
            raise ValidationError("a place set needs at least one place")
        if len(set(ps)) != len(ps):
            raise ValidationError(f"duplicate places in {ps}")
        object.__setattr__(self, "places", tuple(sorted(ps, key=Place.sort_key)))

    @classmethod
    def parse(cls, spec) -> "PlaceSet":
        if isinstance(spec, PlaceSet):
            return spec
        if isinstance(spec, str):
            spec = [s for s in spec.replace(";", ",").split(",") if s.strip()]
        return cls(tuple(as_place(p) for p in spec))

    @property
    def has_infinity(self) -> bool:
        return INF in self.places

    @property
    def finite(self) -> tuple[Place, ...]:
        return tuple(p for p in self.places if not p.is_infinite)

    @property
    def l(self) -> int:  # noqa: E743  (cardinality of S)
        return len(self.places)

    @property
    def finite_product(self) -> int:
        out = 1
        for p in self.finite:
            out *= p.prime
        return out

    def __iter__(self):
        return iter(self.places)

    def __len__(self):
        return len(self.places)

    def __contains__(self, item):
        return as_place(item) in self.places

    def __str__(self):
        return ",".join(str(p) for p in self.places)


REAL_LINE = PlaceSet((INF,))


def omega_for(m: int, n: int, places: PlaceSet) -> int:
    return m if places.has_infinity else m + n


@dataclass(frozen=True)
class Weights:
    """tau[(i, place)] for 0 <= i < n and eta[0..omega)."""

    m: int
    n: int
    places: PlaceSet
    tau: Mapping[tuple[int, Place], Fraction]
    eta: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "places", PlaceSet.parse(self.places))
        object.__setattr__(
            self, "tau", {(int(i), as_place(p)): Fraction(v) for (i, p), v in dict(self.tau).items()}
        )
        object.__setattr__(self, "eta", tuple(Fraction(e) for e in self.eta))
        if self.m < 1 or self.n < 1:
            raise ValidationError("dimensions m, n must be at least 1")

    @property
    def omega(self) -> int:
        return omega_for(self.m, self.n, self.places)

    def t(self, i: int, place) -> Fraction:
        return self.tau[(i, as_place(place))]

    def tau_at(self, place) -> tuple[Fraction, ...]:
        place = as_place(place)
        return tuple(self.tau[(i, place)] for i in range(self.n))

    @property
    def eta_a(self) -> tuple[Fraction, ...]:
        return self.eta[: self.m]

    @property
    def eta_b(self) -> tuple[Fraction, ...]:
        return self.eta[self.m:]

    @classmethod
    def uniform(cls, m: int, n: int, places) -> "Weights":
        """Equal weights satisfying the balance condition."""
        places = PlaceSet.parse(places)
        omega = omega_for(m, n, places)
        t = Fraction(omega, n * len(places))
        tau = {(i, p): t for i in range(n) for p in places}
        return cls(m, n, places, tau, (Fraction(1),) * omega)

    @classmethod
    def real(cls, tau: Sequence, eta: Sequence) -> "Weights":
        """Weights for the purely real setting (S = {inf}); eta has m entries."""
        return WeightsReal(tuple(tau), tuple(eta)).as_weights()

    def to_config(self) -> dict:
        return {
            "tau": [[i + 1, str(p), str(v)] for (i, p), v in sorted(self.tau.items(), key=lambda kv: (kv[0][0], kv[0][1].sort_key()))],
            "eta": [str(e) for e in self.eta],
        }


@dataclass(frozen=True)
class WeightsReal:
    tau: tuple[Fraction, ...]
    eta: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "tau", tuple(Fraction(t) for t in self.tau))
        object.__setattr__(self, "eta", tuple(Fraction(e) for e in self.eta))
        if any(t <= 0 for t in self.tau + self.eta):
            raise ValidationError("weights must be positive")
        if sum(self.tau) != sum(self.eta):
            raise ValidationError(f"sum(tau) = {sum(self.tau)} differs from sum(eta) = {sum(self.eta)}")

    def as_weights(self) -> Weights:
        return Weights(
            len(self.eta),
            len(self.tau),
            REAL_LINE,
            {(i, INF): t for i, t in enumerate(self.tau)},
            self.eta,
        )


@dataclass
class WeightCheck:
    ok: bool
    omega: int
    tau_sum: Fraction
    eta_sum: Fraction
    violations: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.ok

    def report(self) -> str:
        if self.ok:
            return f"ok: sum(tau) = {self.tau_sum} = omega = {self.omega} = sum(eta)"
        return "; ".join(self.violations)


def validate_weights(w: Weights, places=None) -> WeightCheck:
    """Check positivity, shapes, and sum(tau) = omega = sum(eta)."""
    places = w.places if places is None else PlaceSet.parse(places)
    omega = omega_for(w.m, w.n, places)
    violations = []
    expected = {(i, p) for i in range(w.n) for p in places}
    missing = expected - set(w.tau)
    extra = set(w.tau) - expected
    if missing:
        violations.append(f"tau missing entries {sorted((i + 1, str(p)) for i, p in missing)}")
    if extra:
        violations.append(f"tau has entries outside S: {sorted((i + 1, str(p)) for i, p in extra)}")
    if len(w.eta) != omega:
        violations.append(f"eta has {len(w.eta)} entries but omega = {omega}")
    bad = [str(v) for v in list(w.tau.values()) + list(w.eta) if v <= 0]
    if bad:
        violations.append(f"non-positive weights {bad}")
    tau_sum = sum((w.tau[k] for k in expected & set(w.tau)), Fraction(0))
    eta_sum = sum(w.eta, Fraction(0))
    if tau_sum != omega:
        violations.append(f"sum(tau) = {tau_sum} != omega = {omega}")
    if eta_sum != omega:
        violations.append(f"sum(eta) = {eta_sum} != omega = {omega}")
    return WeightCheck(not violations, omega, tau_sum, eta_sum, violations)


def weights_from_config(cfg: Mapping, m: int, n: int, places) -> Weights:
    """``{"tau": [[i, place, "p/q"], ...], "eta": ["p/q", ...]}`` with 1-based i."""
    places = PlaceSet.parse(places)
    tau = {}
    for entry in cfg["tau"]:
        i, p, v = entry
        key = (int(i) - 1, as_place(p))
        if key in tau:
            raise ValidationError(f"duplicate tau entry {entry}")
        tau[key] = Fraction(str(v))
    eta = tuple(Fraction(str(e)) for e in cfg["eta"])
    return Weights(m, n, places, tau, eta)


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def _components(x, w: Weights) -> Iterable[tuple[int, Place, object]]:
    """Yield (i, place, value) from a list of SNumbers or a mapping place -> sequence."""
    if isinstance(x, Mapping):
        for p, vec in x.items():
            p = as_place(p)
            for i, v in enumerate(vec):
                yield i, p, v
        return
    for i, s in enumerate(x):
        if not isinstance(s, SNumber):
            raise ValidationError("tau_norm expects SNumbers or a place -> vector mapping")
        for p in w.places:
            yield i, p, s[p]


def weighted_power(value_norm, weight: Fraction) -> Radical:
    """norm ** (1/weight) as an exact Radical."""
    return Radical.of(value_norm, 1 / Fraction(weight))


def tau_norm(x, w: Weights) -> Radical:
    """max over places and coordinates of |x_{i,nu}|_nu ** (1/tau_{i,nu})."""
    parts = []
    for i, p, v in _components(x, w):
        if (i, p) not in w.tau:
            raise ValidationError(f"no weight for coordinate {i + 1} at place {p}")
        parts.append(weighted_power(place_norm(v, p), w.tau[(i, p)]))
    return radical_max(parts)


def tau_norm_parts(x, w: Weights) -> dict[tuple[int, Place], Radical]:
    return {(i, p): weighted_power(place_norm(v, p), w.tau[(i, p)]) for i, p, v in _components(x, w)}


def eta_norm(v: Sequence, w) -> Radical:
    """max_j |v_j| ** (1/eta_j).  ``w`` is a Weights or a plain eta sequence."""
    eta = w.eta if isinstance(w, Weights) else tuple(Fraction(e) for e in w)
    if len(v) > len(eta):
        raise ValidationError(f"vector of length {len(v)} but only {len(eta)} eta weights")
    return radical_max(weighted_power(abs(simplify(x)), e) for x, e in zip(v, eta))


def real_quasi_norm(x: Sequence, weights: Sequence) -> Radical:
    """|x|_tau = max |x_i|**(1/tau_i) for real vectors (rationals or surds)."""
    return radical_max(weighted_power(abs(simplify(v)), t) for v, t in zip(x, weights))
