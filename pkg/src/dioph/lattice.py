"""Integer lattices, weighted boxes, box enumeration and exact successive minima.

The search path runs in floating point (LLL preprocessing plus a Fincke-Pohst
walk over a ball that contains the box, with a small safety margin); every
candidate it produces is then re-checked exactly, so floating point only ever
decides what to look at, never what is reported.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ResourceError, ValidationError
from .exact import (
    INF,
    AlgebraicReal,
    Radical,
    SMatrix,
    as_place,
    inverse_mod,
    simplify,
    valuation,
)
from .weights import PlaceSet, Weights

MAX_DIMENSION = 10
DEFAULT_CAP = 200_000
_FLOAT_SLACK = 1e-7

Vector = tuple[int, ...]


# ---------------------------------------------------------------------------
# integer linear algebra
# ---------------------------------------------------------------------------

def int_det(rows: Sequence[Sequence[int]]) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    a = [list(map(int, r)) for r in rows]
    n = len(a)
    if n == 0:
        return 1
    sgn, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sgn = -sgn
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sgn * a[-1][-1]


def rank(rows: Sequence[Sequence]) -> int:
    return len(_echelon([list(map(Fraction, r)) for r in rows]))


def _echelon(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    out: list[list[Fraction]] = []
    pivots: list[int] = []
    for r in rows:
        r = list(r)
        for piv_row, c in zip(out, pivots):
            if r[c]:
                f = r[c] / piv_row[c]
                r = [x - f * y for x, y in zip(r, piv_row)]
        nz = next((c for c, x in enumerate(r) if x), None)
        if nz is not None:
            out.append(r)
            pivots.append(nz)
    return out


class IndependenceTracker:
    """Incremental exact rank test for integer vectors."""

    def __init__(self):
        self._rows: list[list[Fraction]] = []
        self._pivots: list[int] = []

    def add(self, v: Sequence[int]) -> bool:
        r = [Fraction(x) for x in v]
        for piv_row, c in zip(self._rows, self._pivots):
            if r[c]:
                f = r[c] / piv_row[c]
                r = [x - f * y for x, y in zip(r, piv_row)]
        nz = next((c for c, x in enumerate(r) if x), None)
        if nz is None:
            return False
        self._rows.append(r)
        self._pivots.append(nz)
        return True

    def __len__(self):
        return len(self._rows)


def hnf(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Row-style Hermite normal form of the lattice spanned by ``rows``.

    Zero rows are dropped; pivots are positive and entries above each pivot
    are reduced into [0, pivot).
    """
    a = [list(map(int, r)) for r in rows if any(r)]
    if not a:
        return []
    ncols = len(a[0])
    out: list[list[int]] = []
    for c in range(ncols):
        if not a:
            break
        while True:
            nz = [r for r in a if r[c]]
            if len(nz) <= 1:
                break
            piv = min(nz, key=lambda r: abs(r[c]))
            for r in nz:
                if r is not piv:
                    q = r[c] // piv[c]
                    for k in range(c, ncols):
                        r[k] -= q * piv[k]
            a = [r for r in a if any(r)]
        nz = [r for r in a if r[c]]
        if nz:
            piv = nz[0]
            if piv[c] < 0:
                piv[:] = [-x for x in piv]
            out.append(piv)
            a = [r for r in a if r is not piv]
    for i, row in enumerate(out):
        c = next(k for k, x in enumerate(row) if x)
        for j in range(i):
            q = out[j][c] // row[c]
            if q:
                out[j] = [x - q * y for x, y in zip(out[j], row)]
    return out


def solve_rational(vectors: Sequence[Sequence[int]], target: Sequence) -> list:
    """Coefficients x with sum_l x_l * vectors[l] == target.

    ``vectors`` are integer (linearly independent, square system); ``target``
    entries may be rationals or surds, the result lives in the same ring.
    """
    n = len(vectors)
    if any(len(v) != n for v in vectors) or len(target) != n:
        raise ValidationError("solve_rational expects a square system")
    # columns of the system are the vectors: A x = t with A[k][l] = vectors[l][k]
    a = [[Fraction(vectors[l][k]) for l in range(n)] for k in range(n)]
    t = [simplify(x) for x in target]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            raise ValidationError("vectors are linearly dependent")
        a[col], a[piv] = a[piv], a[col]
        t[col], t[piv] = t[piv], t[col]
        p = a[col][col]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col] / p
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                t[r] = t[r] - t[col] * f
    return [simplify(t[i] / a[i][i]) for i in range(n)]


# ---------------------------------------------------------------------------
# lattices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntegerLattice:
    """Sublattice of Z^d given by basis rows (full rank unless built as a kernel)."""

    basis: tuple[Vector, ...]

    def __post_init__(self):
        b = tuple(tuple(int(x) for x in row) for row in self.basis)
        if not b:
            raise ValidationError("empty basis")
        if len({len(r) for r in b}) != 1:
            raise ValidationError("ragged basis")
        object.__setattr__(self, "basis", b)
        if rank(b) != len(b):
            raise ValidationError("basis rows are linearly dependent")

    @classmethod
    def standard(cls, d: int) -> "IntegerLattice":
        return cls(tuple(tuple(int(i == j) for j in range(d)) for i in range(d)))

    @property
    def dimension(self) -> int:
        return len(self.basis[0])

    @property
    def rank(self) -> int:
        return len(self.basis)

    @functools.cached_property
    def determinant(self) -> int:
        if self.rank != self.dimension:
            raise ValidationError("determinant of a lattice that is not full rank")
        return abs(int_det(self.basis))

    @functools.cached_property
    def hermite(self) -> tuple[Vector, ...]:
        return tuple(tuple(r) for r in hnf(self.basis))

    def contains(self, z: Sequence[int]) -> bool:
        r = list(map(int, z))
        for row in self.hermite:
            c = next(k for k, x in enumerate(row) if x)
            if r[c] % row[c]:
                return False
            q = r[c] // row[c]
            r = [x - q * y for x, y in zip(r, row)]
        return not any(r)

    def to_config(self) -> list[list[int]]:
        return [list(r) for r in self.basis]

    def __eq__(self, other):
        return isinstance(other, IntegerLattice) and self.hermite == other.hermite

    def __hash__(self):
        return hash(self.hermite)


@dataclass(frozen=True)
class CongruenceSystem:
    """Rows (c, M) meaning c . z == 0 (mod M); M == 0 is an exact linear equation."""

    rows: tuple[tuple[Vector, int], ...] = ()

    def __post_init__(self):
        rows = tuple((tuple(int(x) for x in c), int(mod)) for c, mod in self.rows)
        if any(mod < 0 for _, mod in rows):
            raise ValidationError("moduli must be nonnegative")
        object.__setattr__(self, "rows", rows)

    def __add__(self, other: "CongruenceSystem") -> "CongruenceSystem":
        return CongruenceSystem(self.rows + other.rows)

    def satisfied_by(self, z: Sequence[int]) -> bool:
        for c, mod in self.rows:
            s = sum(x * y for x, y in zip(c, z))
            if (mod and s % mod) or (not mod and s):
                return False
        return True


def _gcd_transform(values: list[int]) -> tuple[list[list[int]], int]:
    """Unimodular U (as rows) with U @ values == (g, 0, ..., 0), g = gcd >= 0."""
    n = len(values)
    u = [[int(i == j) for j in range(n)] for i in range(n)]
    v = list(values)
    while True:
        nz = [i for i in range(n) if v[i]]
        if len(nz) <= 1:
            break
        p = min(nz, key=lambda i: abs(v[i]))
        for i in nz:
            if i != p:
                q = v[i] // v[p]
                v[i] -= q * v[p]
                u[i] = [x - q * y for x, y in zip(u[i], u[p])]
    p = next((i for i in range(n) if v[i]), 0)
    u[0], u[p] = u[p], u[0]
    v[0], v[p] = v[p], v[0]
    if v[0] < 0:
        u[0] = [-x for x in u[0]]
        v[0] = -v[0]
    return u, v[0]


def congruences_to_lattice(system: CongruenceSystem, d: int) -> IntegerLattice:
    """The lattice {z in Z^d : every congruence holds}, in Hermite normal form."""
    basis = [[int(i == j) for j in range(d)] for i in range(d)]
    for c, mod in system.rows:
        if len(c) != d:
            raise ValidationError(f"congruence row of length {len(c)} in dimension {d}")
        vals = [sum(x * y for x, y in zip(c, b)) for b in basis]
        if mod:
            vals = [v % mod for v in vals]
        u, g = _gcd_transform(vals)
        new = [[sum(u[i][k] * basis[k][j] for k in range(len(basis))) for j in range(d)] for i in range(len(basis))]
        if mod:
            factor = mod // math.gcd(g, mod)
            new[0] = [factor * x for x in new[0]]
        elif g:
            new = new[1:]
        basis = new
        if not basis:
            raise ValidationError("congruence system has only the zero solution")
    return IntegerLattice(tuple(tuple(r) for r in hnf(basis)))


# ---------------------------------------------------------------------------
# boxes
# ---------------------------------------------------------------------------

def _radical(r) -> Radical:
    return r if isinstance(r, Radical) else Radical.of(r)


@dataclass(frozen=True)
class WeightedBox:
    """{z : |L_k(z) - c_k| <= r_k (or < r_k when strict[k])}.

    With no forms given, L is the identity (an axis-aligned box).
    """

    radii: tuple[Radical, ...]
    strict: tuple[bool, ...] = ()
    forms: tuple[tuple, ...] | None = None
    center: tuple | None = None

    def __post_init__(self):
        radii = tuple(_radical(r) for r in self.radii)
        if any(r.zero for r in radii):
            raise ValidationError("box radii must be positive")
        object.__setattr__(self, "radii", radii)
        strict = tuple(self.strict) or (False,) * len(radii)
        if len(strict) != len(radii):
            raise ValidationError("strictness flags do not match radii")
        object.__setattr__(self, "strict", tuple(bool(s) for s in strict))
        if self.forms is not None:
            forms = tuple(tuple(simplify(c) for c in f) for f in self.forms)
            if len(forms) != len(radii):
                raise ValidationError("one radius per linear form")
            object.__setattr__(self, "forms", forms)
        if self.center is not None:
            object.__setattr__(self, "center", tuple(simplify(c) for c in self.center))

    @classmethod
    def axis(cls, radii, strict=()) -> "WeightedBox":
        return cls(tuple(radii), tuple(strict))

    @property
    def dimension(self) -> int:
        return len(self.forms[0]) if self.forms is not None else len(self.radii)

    def form_values(self, z: Sequence[int]) -> list:
        if self.forms is None:
            vals = [Fraction(x) for x in z]
        else:
            vals = [simplify(sum((c * x for c, x in zip(f, z) if x), Fraction(0))) for f in self.forms]
        if self.center is not None:
            vals = [simplify(v - c) for v, c in zip(vals, self.center)]
        return vals

    @functools.cached_property
    def _float_data(self):
        forms = self.float_forms()
        center = np.zeros(len(self.radii)) if self.center is None else np.array([float(c) for c in self.center])
        return forms, np.abs(forms), center, np.abs(center), self.float_radii()

    def contains(self, z: Sequence[int], scale=1, closed: bool = False) -> bool:
        scale = _radical(scale)
        undecided = range(len(self.radii))
        if all(abs(x) < 2 ** 50 for x in z):
            # float screen; only coordinates within rounding distance of a face go exact
            forms, abs_forms, center, abs_center, radii = self._float_data
            zf = np.array(z, dtype=float)
            vals = np.abs(forms @ zf - center)
            err = 1e-10 * (abs_forms @ np.abs(zf) + abs_center + radii) + 1e-300
            bound = radii * float(scale)
            if np.any(vals - err > bound):
                return False
            undecided = np.flatnonzero(vals + err >= bound)
        if len(undecided) == 0:
            return True
        values = self.form_values(z)
        for k in undecided:
            c = Radical.of(values[k]).compare(self.radii[k] * scale)
            if c > 0 or (c == 0 and self.strict[k] and not closed):
                return False
        return True

    def gauge(self, z: Sequence[int]) -> Radical:
        """Smallest dilation of the closed box containing z."""
        best = Radical.zero_value()
        for v, r in zip(self.form_values(z), self.radii):
            g = Radical.of(v) / r
            if g > best:
                best = g
        return best

    def scaled(self, factor) -> "WeightedBox":
        f = _radical(factor)
        return WeightedBox(tuple(r * f for r in self.radii), self.strict, self.forms, self.center)

    def shifted(self, center) -> "WeightedBox":
        return WeightedBox(self.radii, self.strict, self.forms, tuple(center))

    @functools.cached_property
    def form_determinant(self):
        if self.forms is None:
            return Fraction(1)
        k = len(self.forms)
        if k != self.dimension:
            raise ValidationError("volume needs a square system of forms")
        return _surd_det([list(f) for f in self.forms])

    def volume(self) -> Radical:
        out = Radical.of(Fraction(2) ** len(self.radii))
        for r in self.radii:
            out = out * r
        return out / Radical.of(self.form_determinant)

    def float_radii(self) -> np.ndarray:
        return np.array([float(r) for r in self.radii])

    def float_forms(self) -> np.ndarray:
        d = self.dimension
        if self.forms is None:
            return np.eye(d)
        return np.array([[float(c) for c in f] for f in self.forms])


def _surd_det(a: list[list]):
    """Determinant by cofactor expansion (small matrices with surd entries)."""
    n = len(a)
    if n == 1:
        return simplify(a[0][0])
    if n == 2:
        return simplify(a[0][0] * a[1][1] - a[0][1] * a[1][0])
    total = Fraction(0)
    for j in range(n):
        if a[0][j] == 0:
            continue
        minor = [row[:j] + row[j + 1:] for row in a[1:]]
        term = a[0][j] * _surd_det(minor)
        total = total + term if j % 2 == 0 else total - term
    return simplify(total)


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

def _embed(box: WeightedBox, rows: Sequence[Sequence[int]]) -> np.ndarray:
    """Float images (L_k(z) / r_k)_k of integer vectors, computed from exact form values."""
    radii = box.float_radii()
    out = np.empty((len(rows), len(radii)))
    for i, z in enumerate(rows):
        if box.forms is None:
            vals = [float(x) for x in z]
        else:
            vals = [float(simplify(sum((c * x for c, x in zip(f, z) if x), Fraction(0)))) for f in box.forms]
        out[i] = np.array(vals) / radii
    return out


def lll_transform(rows: np.ndarray, delta: float = 0.99, max_iter: int = 100_000) -> np.ndarray:
    """Integer unimodular U such that U @ rows is LLL-reduced (floating GSO)."""
    b = np.array(rows, dtype=float)
    n = b.shape[0]
    u = np.eye(n, dtype=object)
    u = np.array([[int(i == j) for j in range(n)] for i in range(n)], dtype=object)

    def gso(b):
        bstar = np.zeros_like(b)
        mu = np.zeros((n, n))
        norms = np.zeros(n)
        for i in range(n):
            v = b[i].copy()
            for j in range(i):
                mu[i, j] = b[i] @ bstar[j] / norms[j] if norms[j] else 0.0
                v -= mu[i, j] * bstar[j]
            bstar[i] = v
            norms[i] = v @ v
        return mu, norms

    mu, norms = gso(b)
    k, it = 1, 0
    while k < n and it < max_iter:
        it += 1
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q:
                b[k] -= q * b[j]
                u[k] = u[k] - q * u[j]
                mu, norms = gso(b)
        if norms[k] >= (delta - mu[k, k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            b[[k, k - 1]] = b[[k - 1, k]]
            u[[k, k - 1]] = u[[k - 1, k]]
            mu, norms = gso(b)
            k = max(k - 1, 1)
    return u


@dataclass
class BoxPoints:
    points: list[Vector]
    truncated: bool = False

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def __bool__(self):
        return bool(self.points)


def _check_dimension(d: int, limit: int):
    if d > limit:
        raise ResourceError(f"dimension {d} exceeds the enumeration limit {limit}")


def reduced_basis(lattice: IntegerLattice, box: WeightedBox) -> list[Vector]:
    basis = [list(r) for r in lattice.basis]
    emb = _embed(box, basis)
    if not np.all(np.isfinite(emb)):
        return [tuple(r) for r in basis]
    u = lll_transform(emb)
    out = []
    for row in u:
        out.append(tuple(sum(int(c) * basis[k][j] for k, c in enumerate(row)) for j in range(lattice.dimension)))
    return out


def _fincke_pohst(emb: np.ndarray, target: np.ndarray, radius_sq: float, visit, cap: int):
    """Call ``visit(x)`` for every integer x with ||x @ emb - target||^2 <= radius_sq.

    Returns False when ``visit`` asked to stop.
    """
    r = emb.shape[0]
    bstar = np.zeros_like(emb)
    mu = np.eye(r)
    norms = np.zeros(r)
    for i in range(r):
        v = emb[i].copy()
        for j in range(i):
            mu[i, j] = emb[i] @ bstar[j] / norms[j]
            v -= mu[i, j] * bstar[j]
        bstar[i] = v
        norms[i] = v @ v
    tau = np.array([target @ bstar[i] / norms[i] for i in range(r)])
    perp = target - tau @ bstar
    budget0 = radius_sq - perp @ perp
    if budget0 < 0:
        return True
    x = [0] * r

    def rec(i: int, budget: float) -> bool:
        c = tau[i] - sum(x[j] * mu[j, i] for j in range(i + 1, r))
        span = math.sqrt(max(budget, 0.0) / norms[i])
        lo, hi = math.ceil(c - span - 1e-12), math.floor(c + span + 1e-12)
        # walk outward from the center for earlier hits
        mid = round(c)
        order = [mid]
        for k in range(1, max(mid - lo, hi - mid) + 1):
            order.extend((mid + k, mid - k))
        for xi in order:
            if xi < lo or xi > hi:
                continue
            rest = budget - (xi - c) ** 2 * norms[i]
            if rest < -1e-12 * max(1.0, radius_sq):
                continue
            x[i] = xi
            if i == 0:
                if not visit(tuple(x)):
                    return False
            elif not rec(i - 1, rest):
                return False
        x[i] = 0
        return True

    return rec(r - 1, budget0)


def enumerate_box(
    lattice: IntegerLattice,
    box: WeightedBox,
    cap: int = DEFAULT_CAP,
    *,
    scale=1,
    offset: Sequence[int] | None = None,
    closed: bool = False,
    exclude_zero: bool = True,
    dimension_limit: int = MAX_DIMENSION,
) -> BoxPoints:
    """Every point of ``offset + lattice`` inside ``scale * box``, sorted lexicographically.

    Strict faces are honoured unless ``closed``.  The zero vector is skipped when
    ``exclude_zero``.  At most ``cap`` points are returned; ``truncated`` flags overflow.
    """
    d = lattice.dimension
    _check_dimension(d, dimension_limit)
    if box.dimension != d:
        raise ValidationError(f"box of dimension {box.dimension} for lattice of dimension {d}")
    work = box.scaled(scale) if scale != 1 else box
    basis = reduced_basis(lattice, work)
    emb = _embed(work, basis)
    k = len(work.radii)
    off = tuple(int(x) for x in offset) if offset is not None else (0,) * d
    target = np.zeros(k)
    if work.center is not None:
        radii = work.float_radii()
        target = np.array([float(c) for c in work.center]) / radii
    if any(off):
        target = target - _embed(WeightedBox(work.radii, work.strict, work.forms), [off])[0]
    radius_sq = k * (1 + _FLOAT_SLACK) + _FLOAT_SLACK
    found: list[Vector] = []
    state = {"truncated": False}

    def visit(x):
        y = np.array(x, dtype=float) @ emb - target
        if np.any(np.abs(y) > 1 + 1e-6):
            return True
        z = tuple(off[j] + sum(x[i] * basis[i][j] for i in range(len(basis)) if x[i]) for j in range(d))
        if exclude_zero and not any(z):
            return True
        if work.contains(z, closed=closed):
            if len(found) >= cap:
                state["truncated"] = True
                return False
            found.append(z)
        return True

    _fincke_pohst(emb, target, radius_sq, visit, cap)
    found.sort()
    return BoxPoints(found, state["truncated"])


def box_is_empty(lattice: IntegerLattice, box: WeightedBox, **kw) -> bool:
    return not enumerate_box(lattice, box, cap=1, **kw).points


# ---------------------------------------------------------------------------
# successive minima
# ---------------------------------------------------------------------------

@dataclass
class MinimaReport:
    lambdas: tuple[Radical, ...]
    witnesses: tuple[Vector, ...]
    box: WeightedBox
    lattice: IntegerLattice

    @property
    def dimension(self) -> int:
        return len(self.lambdas)

    def lambdas_fraction(self) -> tuple[Fraction | None, ...]:
        return tuple(l.as_fraction() for l in self.lambdas)

    def minkowski_terms(self) -> tuple[Radical, Radical, Radical]:
        """(2^d/d! * det, Vol * prod(lambda), 2^d * det)."""
        d = self.dimension
        det = self.lattice.determinant
        mid = self.box.volume()
        for l in self.lambdas:
            mid = mid * l
        lower = Radical.of(Fraction(2 ** d * det, math.factorial(d)))
        upper = Radical.of(2 ** d * det)
        return lower, mid, upper

    def satisfies_minkowski(self) -> bool:
        lower, mid, upper = self.minkowski_terms()
        return lower <= mid <= upper

    def check_invariants(self) -> list[str]:
        problems = []
        for a, b in zip(self.lambdas, self.lambdas[1:]):
            if a > b:
                problems.append("minima out of order")
        for lam, w in zip(self.lambdas, self.witnesses):
            if not self.box.contains(w, scale=lam, closed=True):
                problems.append(f"witness {w} not in its dilate")
            if not self.lattice.contains(w):
                problems.append(f"witness {w} not in the lattice")
        if rank(self.witnesses) != len(self.witnesses):
            problems.append("witnesses dependent")
        if not self.satisfies_minkowski():
            problems.append("Minkowski second theorem violated")
        return problems


MINIMA_LOG: list[MinimaReport] = []
"""Every report produced in this process (inspected by the acceptance suite)."""


def _canonical(z: Vector) -> Vector:
    lead = next((x for x in z if x), 0)
    return z if lead >= 0 else tuple(-x for x in z)


def _gauge_cmp(p, q) -> int:
    # gauge, then least l1 mass, then weight on the leading coordinates
    c = p[0].compare(q[0])
    if c:
        return c
    kp = (sum(map(abs, p[1])), tuple(-x for x in p[1]))
    kq = (sum(map(abs, q[1])), tuple(-x for x in q[1]))
    return (kp > kq) - (kp < kq)


def successive_minima(
    lattice: IntegerLattice,
    box: WeightedBox,
    *,
    cap: int = DEFAULT_CAP,
    dimension_limit: int = MAX_DIMENSION,
) -> MinimaReport:
    """Exact lambda_1 <= ... <= lambda_d of ``lattice`` against the closed ``box``."""
    if box.center is not None:
        raise ValidationError("successive minima need a box centered at the origin")
    d = lattice.dimension
    _check_dimension(d, dimension_limit)
    if lattice.rank != d:
        raise ValidationError("successive minima need a full-rank lattice")
    basis = reduced_basis(lattice, box)
    t = max((box.gauge(v) for v in basis), key=functools.cmp_to_key(lambda a, b: a.compare(b)))
    pts = enumerate_box(lattice, box, cap=cap, scale=t, closed=True)
    if pts.truncated:
        raise ResourceError(f"more than {cap} lattice points below the last minimum")
    candidates = {_canonical(z) for z in pts.points}
    ranked = sorted(((box.gauge(z), z) for z in candidates), key=functools.cmp_to_key(_gauge_cmp))
    tracker = IndependenceTracker()
    lambdas, witnesses = [], []
    for g, z in ranked:
        if tracker.add(z):
            lambdas.append(g)
            witnesses.append(z)
            if len(witnesses) == d:
                break
    if len(witnesses) < d:
        raise ResourceError("enumeration did not reach full rank")
    report = MinimaReport(tuple(lambdas), tuple(witnesses), box, lattice)
    MINIMA_LOG.append(report)
    return report


# ---------------------------------------------------------------------------
# the congruence lattices and boxes of the Dirichlet systems
# ---------------------------------------------------------------------------

def congruence_exponent(prime: int, bound: Radical, strict: bool) -> int:
    """Least k with prime**(-k) < bound (or <= bound when not strict)."""
    if bound.zero:
        raise ValidationError("zero bound admits no exponent")
    k = max(0, math.floor(-bound.log() / math.log(prime)) - 1)
    while True:
        c = Radical.of(Fraction(1, prime ** k)).compare(bound)
        if c < 0 or (c == 0 and not strict):
            break
        k += 1
    while k > 0:
        c = Radical.of(Fraction(1, prime ** (k - 1))).compare(bound)
        if c < 0 or (c == 0 and not strict):
            k -= 1
        else:
            break
    return k


def check_integral(alpha: SMatrix, places) -> None:
    for p in places:
        if p.is_infinite:
            continue
        for row in alpha.at(p):
            for v in row:
                if valuation(v, p) < 0:
                    raise ValidationError(f"entry {v} of alpha is not integral at {p}")


def residual_congruences(
    alpha: SMatrix,
    w: Weights,
    places,
    bound,
    strict: bool,
    b_sign: int = 1,
    gamma=None,
) -> tuple[CongruenceSystem, dict]:
    """Congruences encoding |a alpha_{.,i} + b_sign * b_i - gamma_i|_nu (< or <=) bound(i, nu).

    ``bound`` is a callable (i, place) -> Radical.  Returns the homogeneous system
    and, when ``gamma`` is given, a particular b-offset solving the inhomogeneous one
    (as a dict i -> (residue, modulus)).
    """
    m, n = alpha.m, alpha.n
    rows = []
    offsets: dict[int, list[tuple[int, int]]] = {i: [] for i in range(n)}
    for p in PlaceSet.parse(places).finite:
        for i in range(n):
            k = congruence_exponent(p.prime, bound(i, p), strict)
            if k <= 0:
                continue
            mod = p.prime ** k
            col = alpha.column_form(p, i)
            c = [inverse_mod(v, mod) for v in col] + [0] * n
            c[m + i] = b_sign % mod
            rows.append((tuple(c), mod))
            if gamma is not None:
                g = inverse_mod(gamma.at(p)[i], mod)
                # b_sign * b_i == gamma_i (mod p^k) at a = 0
                offsets[i].append((mod, g * b_sign % mod))
    return CongruenceSystem(tuple(rows)), offsets


def divisibility_system(d: int, coords: Sequence[int], places) -> CongruenceSystem:
    rows = []
    for p in PlaceSet.parse(places).finite:
        for k in coords:
            rows.append((tuple(int(j == k) for j in range(d)), p.prime))
    return CongruenceSystem(tuple(rows))


def gamma_lattice(alpha: SMatrix, eps, H, w: Weights, places=None) -> IntegerLattice:
    """The congruence sublattice of (a, b) in Z^{m+n} attached to (eps, H).

    Finite places impose |a alpha + b|_nu < (eps/H)**tau_{i,nu} as exact congruences,
    plus divisibility of every coordinate by nu (inf not in S) or of a only (inf in S).
    The archimedean condition is left to the box.
    """
    places = w.places if places is None else PlaceSet.parse(places)
    eps, H = Fraction(eps), Fraction(H)
    if eps <= 0 or H <= 0:
        raise ValidationError("eps and H must be positive")
    check_integral(alpha, places.finite)
    m, n = alpha.m, alpha.n
    ratio = eps / H
    system, _ = residual_congruences(
        alpha, w, places, lambda i, p: Radical.of(ratio, w.t(i, p)), strict=True, b_sign=1
    )
    coords = range(m) if places.has_infinity else range(m + n)
    system = system + divisibility_system(m + n, coords, places)
    return congruences_to_lattice(system, m + n)


def eta_radii(H, eta: Sequence[Fraction]) -> tuple[Radical, ...]:
    return tuple(Radical.of(Fraction(H), e) for e in eta)


def k_box(alpha: SMatrix, eps, H, w: Weights, places=None, b_sign: int = 1) -> WeightedBox:
    """The body K_H.

    inf not in S: |(a, b)|_eta <= H (axis-aligned).
    inf in S: |a alpha_inf + b_sign*b|_tau_inf < eps/H together with |a|_eta <= H.
    """
    places = w.places if places is None else PlaceSet.parse(places)
    m, n = alpha.m, alpha.n
    H = Fraction(H)
    if not places.has_infinity:
        return WeightedBox.axis(eta_radii(H, w.eta))
    return archimedean_box(alpha, Fraction(eps) / H, H, w, b_sign=b_sign, strict_residual=True)


def archimedean_box(
    alpha: SMatrix,
    residual_scale,
    H,
    w: Weights,
    *,
    b_sign: int = 1,
    strict_residual: bool = True,
    eta_height=None,
    residual_radii: Sequence[Radical] | None = None,
) -> WeightedBox:
    """Forms (a_j)_j and (a alpha_inf + b_sign b)_i with radii H**eta_j and residual_scale**tau_{i,inf}."""
    m, n = alpha.m, alpha.n
    d = m + n
    forms = []
    for j in range(m):
        forms.append(tuple(Fraction(int(k == j)) for k in range(d)))
    mat = alpha.at(INF)
    for i in range(n):
        f = [mat[j][i] for j in range(m)] + [Fraction(0)] * n
        f[m + i] = Fraction(b_sign)
        forms.append(tuple(f))
    height = Fraction(H if eta_height is None else eta_height)
    radii = list(eta_radii(height, w.eta_a))
    if residual_radii is None:
        residual_radii = [Radical.of(Fraction(residual_scale), w.t(i, INF)) for i in range(n)]
    radii += list(residual_radii)
    strict = [False] * m + [strict_residual] * n
    return WeightedBox(tuple(radii), tuple(strict), tuple(forms))
