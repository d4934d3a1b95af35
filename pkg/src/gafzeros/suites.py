"""Fixed-seed verification suites behind ``gafzeros verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import corr
from .gauss import hermitian_eig
from .spectral import ArcUniform, Atoms, CovarianceEvaluator, Lebesgue, poisson

SEED = 20240601


@dataclass
class Check:
    name: str
    residual: float
    tol: float

    @property
    def ok(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tol)


def _disk_points(rng, n, radius):
    return radius * np.sqrt(rng.random(n)) * np.exp(2j * math.pi * rng.random(n))


def _separated_points(rng, n, radius, sep=0.05):
    while True:
        a = _disk_points(rng, n, radius)
        if n == 1 or min(abs(a[i] - a[j]) for i in range(n) for j in range(i)) > sep:
            return a


def reference_measures():
    return {
        "lebesgue": Lebesgue(),
        "atoms4": Atoms.roots_of_unity(4),
        "arc": ArcUniform(-math.pi / 2, math.pi / 2),
    }


def identities_suite(seed: int = SEED):
    rng = np.random.default_rng(seed)
    checks = []
    for n in range(1, 7):
        a, b = _disk_points(rng, n, 0.5), _disk_points(rng, n, 0.5)
        checks.append(Check(f"cauchy n={n}", corr.cauchy_residual(a, b), 1e-9))
        checks.append(Check(f"borchardt n={n}", corr.verify_borchardt(a, b), 1e-9))
        checks.append(Check(f"prod (a_k - a_j) n={n}", corr.product_differences_residual(a), 1e-9))
        checks.append(Check(f"V(1/a) n={n}", corr.inverse_vandermonde_residual(a), 1e-9))
        A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        brute = corr.permanent_bruteforce(A)
        checks.append(Check(f"ryser vs brute force n={n}", abs(corr.permanent(A) - brute) / abs(brute), 1e-12))
    one = lambda z: np.ones(np.shape(z)[:-1])  # noqa: E731
    for n in (1, 2):
        a = _separated_points(rng, n, 0.6, sep=0.1)
        a = np.where(np.abs(a) < 0.05, 0.3, a)
        for label, Q in (("1", one), ("e1", corr.elementary_symmetric(1)), ("szego", corr.szego_product([0.3j, -0.2]))):
            for variant in ("plain", "over_z"):
                checks.append(Check(f"reproducing {variant} Q={label} n={n}", corr.verify_reproducing(Q, a, variant), 1e-9))
    for a in ([0.0], [0.5], [0.3, 0.4j], list(_separated_points(rng, 2, 0.7, 0.1))):
        res = corr.verify_volume_formula(a)
        checks.append(Check(f"volume formula mass a={np.round(a, 3).tolist()}", res.mass, 1e-9))
        checks.append(Check(f"volume formula kernel a={np.round(a, 3).tolist()}", res.kernel, 1e-9))
    return checks


def correlations_suite(seed: int = SEED):
    rng = np.random.default_rng(seed + 1)
    checks = []
    lebesgue = CovarianceEvaluator(Lebesgue())
    checks.append(
        Check("rho2(0, 0.5) = 7/(9 pi^2) direct", abs(corr.rho_n_direct(lebesgue, (0, 0.5)).value - 7 / (9 * math.pi**2)), 1e-12)
    )
    quad = CovarianceEvaluator(Lebesgue(), closed_form=None)
    checks.append(
        Check("rho2(0, 0.5) = 7/(9 pi^2) spectral", abs(corr.rho_n_spectral(quad, (0, 0.5)).value - 7 / (9 * math.pi**2)), 1e-4)
    )
    for i in range(5):
        a = _separated_points(rng, 2, 0.7, 0.05)
        pv = corr.bergman_dpp_density(a)
        checks.append(Check(f"Peres-Virag direct #{i}", abs(corr.rho_n_direct(lebesgue, a).value - pv), 1e-4))
        checks.append(Check(f"Peres-Virag spectral #{i}", abs(corr.rho_n_spectral(quad, a).value - pv), 1e-4))
    for name, measure in reference_measures().items():
        ev = CovarianceEvaluator(measure)
        worst = 0.0
        for r in np.linspace(0.1, 0.9, 5):
            for th in np.linspace(-math.pi, math.pi, 8, endpoint=False):
                z = r * np.exp(1j * th)
                worst = max(worst, abs(corr.rho1_ek(ev, z) - corr.rho1_spectral(ev, z)) / corr.rho1_ek(ev, z))
        checks.append(Check(f"rho1 EK vs spectral {name}", worst, 1e-8))
        for i in range(2):
            a = _separated_points(rng, 2, 0.6, 0.1)
            d = corr.rho_n_direct(ev, a)
            s = corr.rho_n_spectral(ev, a)
            checks.append(Check(f"rho2 direct vs spectral {name} #{i}", abs(d.value - s.value), max(1e-4, 3 * s.error_estimate)))
    arc = CovarianceEvaluator(ArcUniform(-math.pi / 2, math.pi / 2))
    const = 1 - (2 / math.pi) ** 2
    for r in (0.25, 0.5, 0.75):
        g = math.pi * (1 - r * r) ** 2 * corr.rho1_ek(arc, 1j * r)
        checks.append(Check(f"arc constant r={r}", abs(g - const), 1e-8))
    return checks


def kernels_suite(seed: int = SEED):
    rng = np.random.default_rng(seed + 2)
    checks = []
    for name, measure in reference_measures().items():
        ev = CovarianceEvaluator(measure)
        z, w = _disk_points(rng, 100, 0.95), _disk_points(rng, 100, 0.95)
        herm = np.max(np.abs(ev.kernel(z, w) - np.conj(ev.kernel(w, z))))
        checks.append(Check(f"hermitian symmetry {name}", herm, 1e-14))
        worst = 0.0
        for _ in range(5):
            a = _disk_points(rng, 6, 0.9)
            lam, _ = hermitian_eig(ev.kernel(a[:, None], a[None, :]))
            worst = max(worst, -lam[0])
        checks.append(Check(f"PSD Gram {name}", max(worst, 0.0), 1e-10))
        zz = _disk_points(rng, 50, 0.95)
        excess = np.max(ev.kernel(zz, zz).real - (1 - np.abs(zz)) ** -2)
        checks.append(Check(f"diagonal bound {name}", max(excess, 0.0), 0.0))
        if not isinstance(measure, Atoms):
            # periodic midpoint aliasing decays like |z|^M, so stay inside |z| <= 0.9
            zz = _disk_points(rng, 50, 0.9)
            quad = CovarianceEvaluator(measure, closed_form=None)
            r, th = np.abs(zz), np.angle(zz)
            pois = poisson(r[:, None], th[:, None] - quad.rule.nodes[None, :]) @ quad.rule.weights
            checks.append(Check(f"Poisson form {name}", np.max(np.abs((1 - r * r) * quad.kernel(zz, zz).real - pois)), 1e-10))
            checks.append(Check(f"closed form vs quadrature {name}", np.max(np.abs(ev.kernel(zz, zz) - quad.kernel(zz, zz))), 1e-10))
    arc = CovarianceEvaluator(ArcUniform(-math.pi / 2, math.pi / 2), closed_form=None)
    gam = max(abs(arc.gamma(k) - 2 / math.pi * math.sin(k * math.pi / 2) / k) for k in range(1, 51))
    checks.append(Check("arc gamma(k) closed form, k <= 50", gam, 1e-12))
    return checks


SUITES = {"identities": identities_suite, "correlations": correlations_suite, "kernels": kernels_suite}


def run_suite(name: str):
    if name == "all":
        return [c for key in SUITES for c in SUITES[key]()]
    return SUITES[name]()
