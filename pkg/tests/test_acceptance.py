"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line (with its measured numbers and runtime);
the lines are printed together at the end of the pytest run.
"""

import json
import math
import random
import statistics
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from dioph.dirichlet import epsilon_star, singularity_scan, solve_homogeneous
from dioph.exact import INF, AlgebraicReal, Place, Radical, SMatrix, SVector, golden_ratio
from dioph.experiments import CIExperiment, ci_hit_matrix, ci_simulation, liminf_statistic, sample_gammas
from dioph.lattice import MINIMA_LOG, IntegerLattice, successive_minima
from dioph.twisted import (
    FlowLattice,
    certificate_sequence,
    find_witness_heights,
    proximity_window,
    sign_window,
    strong_approx,
)
from dioph.weights import PlaceSet, Weights, eta_norm, validate_weights

from conftest import ACCEPTANCE
from instances import SURD_RADICANDS, random_instance
from oracles import (
    _abs_at,
    binet_eps_star,
    brute_least_height,
    determinant,
    fibonacci,
    padic_valuation,
    recheck_certificate,
)

PHI = golden_ratio()
UNIT = Weights.uniform(1, 1, "inf")
FIXTURES = Path(__file__).resolve().parent / "fixtures"


class Criterion:
    def __init__(self, number: int, title: str, budget: float):
        self.number, self.title, self.budget = number, title, budget
        self.failures: list[str] = []
        self.details: list[str] = []

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def check(self, ok: bool, message: str):
        if not ok:
            self.failures.append(message)

    def note(self, text: str):
        self.details.append(text)

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        if exc is not None:
            self.failures.append(f"{exc_type.__name__}: {exc}")
        self.check(elapsed < self.budget, f"runtime {elapsed:.1f}s over {self.budget:.0f}s budget")
        verdict = "FAIL" if self.failures else "PASS"
        info = "; ".join(self.details + self.failures[:3])
        ACCEPTANCE[self.number] = f"{verdict} [{self.number}] {self.title} ({elapsed:.1f}s): {info}"
        print(ACCEPTANCE[self.number])
        if exc is None and self.failures:
            pytest.fail("; ".join(self.failures[:5]))
        return False


def weak_or_strict(value: Radical, bound: Radical, strict: bool) -> bool:
    return value < bound if strict else value <= bound


def homogeneous_ok(inst, a, b) -> bool:
    """Dirichlet system checked entry by entry with oracle absolute values.

    Archimedean rows are strict (< H^-tau); a p-adic row may reach p * H^-tau.
    """
    alpha, w, places, H = inst.alpha, inst.w, inst.places, inst.H
    if places.has_infinity:
        if not any(a) or eta_norm(a, w.eta) > Radical.of(H):
            return False
    elif not any(a + b) or eta_norm(a + b, w.eta) > Radical.of(H):
        return False
    for p in places:
        matrix = alpha.at(p)
        for i in range(alpha.n):
            x = sum((a[j] * matrix[j][i] for j in range(alpha.m)), Fraction(0)) - b[i]
            bound = Radical.of(Fraction(1, H), w.t(i, p))
            if p != INF:
                bound = bound * Radical.of(p.prime)
            if not weak_or_strict(_abs_at(x, p), bound, p == INF):
                return False
    return True


def least_height(sol, inst):
    z = sol.a if inst.places.has_infinity else sol.a + sol.b
    return eta_norm(z, inst.w.eta)


# -- 1 -----------------------------------------------------------------------

def test_homogeneous_dirichlet_totality():
    rng = random.Random(1)
    with Criterion(1, "homogeneous Dirichlet totality", 120) as crit:
        solved = compared = 0
        for k in range(500):
            inst = random_instance(rng, max_dim=3, max_places=3, H_max=1000)
            crit.check(validate_weights(inst.w, inst.places).ok, f"instance {k}: weights invalid")
            sol = solve_homogeneous(inst.alpha, inst.H, inst.w, inst.places)
            if sol.ok and homogeneous_ok(inst, sol.a, sol.b):
                solved += 1
            else:
                crit.check(False, f"instance {k} {inst!r}: unverified")
            if inst.H <= 50 and inst.alpha.m + inst.alpha.n <= 4:
                compared += 1
                crit.check(
                    least_height(sol, inst) == brute_least_height(inst.alpha, inst.H, inst.w, inst.places),
                    f"instance {k} {inst!r}: disagrees with exhaustive search",
                )
        crit.note(f"{solved}/500 verified, {compared} compared with exhaustive search")


# -- 5 -----------------------------------------------------------------------

def random_surd_matrix(seed: int) -> SMatrix:
    rng = random.Random(seed)

    def entry():
        d = rng.choice(SURD_RADICANDS)
        return (rng.randint(-5, 5) + rng.randint(1, 4) * AlgebraicReal.sqrt(d)) / rng.randint(1, 7)

    return SMatrix.real([[entry() for _ in range(2)] for _ in range(2)])


def twisted_cases():
    s_inf = SMatrix({"2": [[Fraction(1, 3)]], "inf": [[PHI - 1]]})
    w_inf = Weights(1, 1, "2,inf", {(0, Place(2)): Fraction(1, 2), (0, INF): Fraction(1, 2)}, (1,))
    return [
        ("golden ratio", SMatrix.real([[PHI]]), UNIT, "inf", Fraction(2, 5), range(2, 3000)),
        ("2x2 surds", random_surd_matrix(0), Weights.uniform(2, 2, "inf"), "inf", Fraction(1, 8), range(2, 400)),
        ("S={2,inf}", s_inf, w_inf, "2,inf", Fraction(1, 4), range(2, 400)),
    ]


def test_twisted_certificates():
    with Criterion(5, "twisted certificates", 300) as crit:
        for name, alpha, w, places, eps, heights in twisted_cases():
            hs = find_witness_heights(alpha, w, places, eps, heights)
            emitted = 0
            gammas = sample_gammas(5, PlaceSet.parse(places), alpha.n, 100)
            for g in gammas:
                certs = certificate_sequence(alpha, g, eps, w, places, hs, count=10)
                emitted += len(certs)
                crit.check(len(certs) >= 10, f"{name}: only {len(certs)} certificates")
                crit.check(len({c.key() for c in certs}) == len(certs), f"{name}: repeated certificate")
                crit.check(len({c.H for c in certs}) == len(certs), f"{name}: repeated height")
                for c in certs:
                    checks = recheck_certificate(c, alpha, g, w)
                    crit.check(all(checks.values()), f"{name} H={c.H}: {checks}")
                    e1 = w.eta[0]
                    crit.check(Radical.of(abs(c.a[0])) >= Radical.of(c.H, e1), f"{name} H={c.H}: |a_1| below H^eta_1")
            crit.note(f"{name}: {emitted} certificates over {len(hs)} witness heights")


# -- 2 -----------------------------------------------------------------------

def float_form_det(box) -> float:
    if box.forms is None:
        return 1.0
    return float(np.linalg.det(np.array([[float(c) for c in f] for f in box.forms])))


def test_minkowski_sandwich():
    with Criterion(2, "Minkowski sandwich", 120) as crit:
        # extra reports so the check is meaningful when this test runs on its own
        rng = random.Random(2)
        for _ in range(40):
            inst = random_instance(rng, max_dim=2, max_places=1, H_max=200)
            if inst.places != PlaceSet.parse("inf"):
                continue
            flow = FlowLattice(inst.alpha, inst.w, inst.H)
            successive_minima(IntegerLattice.standard(inst.alpha.m + inst.alpha.n), flow.box(1))
        reports = list(MINIMA_LOG)
        for rep in reports:
            lower, mid, upper = rep.minkowski_terms()
            crit.check(lower <= mid <= upper, f"sandwich violated: {lower} <= {mid} <= {upper}")
            det = abs(determinant(rep.lattice.basis))
            crit.check(det == rep.lattice.determinant, "lattice determinant disagrees with oracle")
            vol = 2.0 ** rep.dimension * math.prod(float(r) for r in rep.box.radii) / abs(float_form_det(rep.box))
            crit.check(math.isclose(vol, float(rep.box.volume()), rel_tol=1e-9), "box volume disagrees with float")
            crit.check(determinant(rep.witnesses) != 0, "minima witnesses dependent")
            for lam, z in zip(rep.lambdas, rep.witnesses):
                crit.check(rep.box.gauge(z) == lam, "witness gauge differs from its minimum")
        crit.check(len(reports) >= 20, f"only {len(reports)} reports")
        crit.note(f"{len(reports)} reports, {len(crit.failures)} violations")


# -- 3 -----------------------------------------------------------------------

def min_distance_product(H: int) -> float:
    """H * min_{1 <= a <= H} ||a phi|| in long double."""
    a = np.arange(1, H + 1, dtype=np.longdouble)
    phi = (1 + np.sqrt(np.longdouble(5))) / 2
    x = (a * phi) % 1
    return float(H * np.min(np.minimum(x, 1 - x)))


def test_golden_ratio_profile():
    with Criterion(3, "golden-ratio profile", 30) as crit:
        alpha = SMatrix.real([[PHI]])
        worst = 0.0
        for k in range(10, 26):
            H = fibonacci(k)
            pt = epsilon_star(alpha, H, UNIT)
            crit.check(pt.eps_star == Radical.of(binet_eps_star(k)), f"k={k}: differs from closed form")
            crit.check(math.isclose(float(pt.eps_star), min_distance_product(H), rel_tol=1e-9), f"k={k}: differs from direct minimum")
            if k >= 15:
                gap = abs(float(pt.eps_star) - 1 / math.sqrt(5))
                worst = max(worst, gap)
                crit.check(gap < 0.01, f"k={k}: {gap:.4g} from 1/sqrt(5)")
        verdict = singularity_scan(alpha, threshold=Fraction(1, 5), w=UNIT)
        crit.check(verdict.classification == "NonSingularEvidence", f"scan says {verdict.classification}")
        crit.note(f"max |eps* - 1/sqrt5| for k>=15 is {worst:.2e}; scan {verdict.classification}")


# -- 4 -----------------------------------------------------------------------

def test_rational_singularity():
    with Criterion(4, "rational alpha singularity", 120) as crit:
        count = 0
        for q in range(1, 21):
            for p in range(-q, 2 * q + 1):
                if math.gcd(p, q) != 1:
                    continue
                count += 1
                alpha = SMatrix.real([[Fraction(p, q)]])
                for H in list(range(q, q + 25)) + [10 ** 3, 10 ** 5]:
                    crit.check(epsilon_star(alpha, H, UNIT).eps_star.zero, f"{p}/{q} H={H}: eps* nonzero")
                grid = [q * 2 ** k for k in range(1, 8)]
                verdict = singularity_scan(alpha, grid, Fraction(1, 10), UNIT)
                crit.check(verdict.classification == "SingularEvidence", f"{p}/{q}: {verdict.classification}")
        crit.note(f"{count} fractions with q <= 20, eps* = 0 exactly from H = q")


# -- 6 -----------------------------------------------------------------------

def test_strong_approximation():
    rng = random.Random(6)
    with Criterion(6, "strong approximation", 60) as crit:
        for k in range(200):
            primes = rng.sample([2, 3, 5, 7], rng.randint(1, 4))
            targets = {p: Fraction(rng.randint(-10 ** 4, 10 ** 4), p ** rng.randint(0, 5)) for p in primes}
            P = math.prod(primes)
            if rng.random() < 0.5:
                radius = P * rng.randint(1, 3)
                center = 2 * radius if rng.random() < 0.5 else -2 * radius
                window = sign_window(center > 0, radius)
            else:
                radius, center = P, Fraction(rng.randint(-10 ** 6, 10 ** 6), rng.randint(1, 99))
                window = proximity_window(center, radius)
            r = strong_approx(targets, window)
            for p, x in targets.items():
                crit.check(padic_valuation(r - x, p) >= 0, f"instance {k}: |r - x|_{p} > 1")
            den = r.denominator
            for p in primes:
                while den % p == 0:
                    den //= p
            crit.check(den == 1, f"instance {k}: r not integral outside S")
            crit.check(abs(r - center) <= radius, f"instance {k}: |r - {center}| > {radius}")
        crit.note("200/200 instances" if not crit.failures else f"{len(crit.failures)} violations")


# -- 7 -----------------------------------------------------------------------

def test_liminf_experiment():
    fixture = json.loads((FIXTURES / "liminf_phi.json").read_text())
    with Criterion(7, "liminf experiment", 180) as crit:
        grid = fixture["grid"]
        alpha = SMatrix.real([[PHI]])
        gammas = sample_gammas(fixture["seed"], PlaceSet.parse("inf"), 1, fixture["samples"])
        columns = [[] for _ in grid]
        for g in gammas:
            rec = liminf_statistic(alpha, g, grid, UNIT)
            crit.check(rec.monotone(), f"gamma {g}: statistic increased")
            for col, s in zip(columns, rec.stats):
                col.append(float(s))
        medians = [statistics.median(col) for col in columns]
        for A, got, ref in zip(grid, medians, fixture["medians"]):
            crit.check(abs(got - ref) <= fixture["slack"] * ref, f"median at A={A} is {got:.5g}, fixture {ref:.5g}")
        ratio = medians[-1] / medians[0]
        crit.check(ratio <= 0.5, f"median ratio {ratio:.4f} > 1/2")
        crit.note(f"medians {', '.join(f'{m:.5g}' for m in medians)}; ratio {ratio:.4f} (fixture {fixture['ratio']:.4f})")


# -- 8 -----------------------------------------------------------------------

def test_ci_probe():
    with Criterion(8, "CI probe", 60) as crit:
        spec = CIExperiment("dyadic", Fraction(1, 10), Fraction(9, 10), samples=10_000, levels=20, windows=(1,))
        res = ci_simulation(spec)
        lo, hi = res.pair(1)
        crit.check(lo.fraction >= 0.95 and hi.fraction >= 0.95, f"estimates {lo.fraction:.4f}, {hi.fraction:.4f}")
        crit.check(hi.fraction - lo.fraction <= 0.05, f"difference {hi.fraction - lo.fraction:.4f}")
        crit.check(res.subset_violations == 0, f"{res.subset_violations} subset violations")
        hits = ci_hit_matrix(spec, count=2500)
        crit.check(not np.any(hits[spec.c] & ~hits[spec.C]), "subset property fails on the raw hit matrix")
        crit.note(f"c: {lo.fraction:.4f}, C: {hi.fraction:.4f}, diff {hi.fraction - lo.fraction:.4f}, {res.subset_violations} violations")
