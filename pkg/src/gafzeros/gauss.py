"""Sampling the stationary complex Gaussian coefficient sequence.

Three samplers are provided: i.i.d. coefficients (Lebesgue spectral measure),
periodic coefficients (uniform atoms on the n-th roots of unity) and the
Toeplitz square-root construction xi = A zeta with A^2 = (gamma(j - k)),
which works for any spectral measure.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import InvalidArgumentError, NotPSDError, NumericFailure
from .spectral import CovarianceEvaluator

JACOBI_MAX_SWEEPS = 64
PSD_CLAMP = 1e-8


class ComplexNormalSource:
    """Seeded stream of standard complex normals (g1 + i g2) / sqrt(2).

    Uniforms come from numpy's PCG64 seeded with ``seed``. Each complex draw
    consumes exactly two consecutive uniforms (u1, u2) through Box-Muller:
    zeta = sqrt(-log(1 - u1)) * exp(2 pi i u2).
    """

    def __init__(self, seed: int):
        if not 0 <= int(seed) < 2**64:
            raise InvalidArgumentError("seed must be an unsigned 64-bit integer")
        self.seed = int(seed)
        self._rng = np.random.Generator(np.random.PCG64(self.seed))

    def uniforms(self, n: int) -> np.ndarray:
        return self._rng.random(n)

    def draw(self, n: int) -> np.ndarray:
        u = self.uniforms(2 * n).reshape(n, 2)
        radius = np.sqrt(-np.log1p(-u[:, 0]))
        return radius * np.exp(2j * math.pi * u[:, 1])


# ---------------------------------------------------------------------------
# Hermitian eigensolver


def _round_robin(n):
    """Rounds of disjoint index pairs covering every pair once (circle method)."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        rounds.append((np.array([p for p, _ in pairs], dtype=int), np.array([q for _, q in pairs], dtype=int)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _off_norm(A):
    off = A.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def hermitian_eig(H, tol: float = 1e-12, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Each sweep annihilates every off-diagonal pair once, visiting the pairs in
    round-robin order so that the disjoint rotations of one round are applied
    together.

    Returns
    -------
    eigenvalues : ndarray
        Real, ascending.
    eigenvectors : ndarray
        Unitary matrix whose columns are the eigenvectors.
    """
    H = np.asarray(H, dtype=complex)
    n = H.shape[0]
    if H.ndim != 2 or H.shape[1] != n:
        raise InvalidArgumentError("matrix must be square")
    A = 0.5 * (H + H.conj().T)
    V = np.eye(n, dtype=complex)
    scale = np.linalg.norm(A)
    if n < 2 or scale == 0.0:
        return np.real(np.diag(A)).copy(), V
    target = tol * scale
    rounds = _round_robin(n)
    off = _off_norm(A)
    sweeps = 0
    while off >= target:
        if sweeps == max_sweeps:
            raise NumericFailure(f"Jacobi did not converge in {max_sweeps} sweeps (off-norm {off:.3e})")
        for P, Q in rounds:
            apq = A[P, Q]
            mag = np.abs(apq)
            active = mag > 1e-300
            if not np.any(active):
                continue
            P, Q, apq, mag = P[active], Q[active], apq[active], mag[active]
            phase = apq / mag
            app = A[P, P].real
            aqq = A[Q, Q].real
            tau = (aqq - app) / (2.0 * mag)
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            # columns: A <- A Q with Q = diag(1, conj(phase)) * [[c, s], [-s, c]]
            cp = A[:, P].copy()
            cq = A[:, Q]
            A[:, P] = c * cp - s * phase.conj() * cq
            A[:, Q] = s * cp + c * phase.conj() * cq
            rp = A[P, :].copy()
            rq = A[Q, :]
            A[P, :] = c[:, None] * rp - (s * phase)[:, None] * rq
            A[Q, :] = s[:, None] * rp + (c * phase)[:, None] * rq
            A[P, Q] = 0.0
            A[Q, P] = 0.0
            vp = V[:, P].copy()
            vq = V[:, Q]
            V[:, P] = c * vp - s * phase.conj() * vq
            V[:, Q] = s * vp + c * phase.conj() * vq
        sweeps += 1
        off = _off_norm(A)
    lam = np.real(np.diag(A))
    order = np.argsort(lam, kind="stable")
    return lam[order], V[:, order]


def psd_sqrt(H) -> np.ndarray:
    """The unique Hermitian positive semidefinite square root of H.

    Eigenvalues in [-1e-8, 0) are clamped to zero; anything more negative
    raises :class:`NotPSDError`.
    """
    lam, V = hermitian_eig(H)
    if lam.size and lam[0] < -PSD_CLAMP:
        raise NotPSDError(lam[0])
    root = np.sqrt(np.clip(lam, 0.0, None))
    A = (V * root) @ V.conj().T
    return 0.5 * (A + A.conj().T)


# ---------------------------------------------------------------------------
# samplers


@dataclass(frozen=True)
class IIDSampler:
    tag = "iid"


@dataclass(frozen=True)
class PeriodicSampler:
    period: int

    tag = "periodic"

    def __post_init__(self):
        if self.period < 1:
            raise InvalidArgumentError("period must be >= 1")


@dataclass(frozen=True)
class ToeplitzSqrtSampler:
    """xi_i = sum_j A_ij zeta_j with A the PSD square root of (gamma(i - j))."""

    matrix: np.ndarray = field(repr=False)
    measure: dict = field(default_factory=dict)

    tag = "toeplitz"

    @classmethod
    def from_evaluator(cls, ev: CovarianceEvaluator, size: int) -> "ToeplitzSqrtSampler":
        A = psd_sqrt(ev.toeplitz(size))
        A.setflags(write=False)
        return cls(A, ev.measure.to_dict())

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


CoefficientSampler = Union[IIDSampler, PeriodicSampler, ToeplitzSqrtSampler]


def sampler_tag(sampler: CoefficientSampler) -> str:
    if isinstance(sampler, PeriodicSampler):
        return f"periodic:{sampler.period}"
    return sampler.tag


@dataclass
class GafPolynomial:
    """One sample xi_0 + xi_1 z + ... + xi_N z^N."""

    coefficients: np.ndarray
    provenance: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, z):
        return np.polyval(self.coefficients[::-1], z)

    def to_dict(self):
        c = np.asarray(self.coefficients)
        return {"n": self.N, "re": c.real.tolist(), "im": c.imag.tolist(), "provenance": self.provenance}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        re, im = np.asarray(d["re"], dtype=float), np.asarray(d["im"], dtype=float)
        if re.shape != im.shape or len(re) != d["n"] + 1:
            raise InvalidArgumentError("coefficient arrays do not match n")
        return cls(re + 1j * im, dict(d.get("provenance", {})))

    @classmethod
    def from_json(cls, text: str) -> "GafPolynomial":
        return cls.from_dict(json.loads(text))


def _draw_coefficients(sampler, N, src):
    if isinstance(sampler, IIDSampler):
        return src.draw(N + 1)
    if isinstance(sampler, PeriodicSampler):
        base = src.draw(sampler.period)
        return base[np.arange(N + 1) % sampler.period]
    if isinstance(sampler, ToeplitzSqrtSampler):
        if sampler.size < N + 1:
            raise InvalidArgumentError(f"Toeplitz root has size {sampler.size}, need {N + 1}")
        A = sampler.matrix[: N + 1, : N + 1]
        return A @ src.draw(N + 1)
    raise InvalidArgumentError(f"unknown sampler {sampler!r}")


def sample_coefficients(sampler: CoefficientSampler, N: int, src: ComplexNormalSource, measure=None) -> GafPolynomial:
    """Draw the coefficients of the degree-N truncation from ``src``."""
    if N < 0:
        raise InvalidArgumentError("N must be nonnegative")
    coeffs = _draw_coefficients(sampler, N, src)
    while not np.any(coeffs):
        coeffs = _draw_coefficients(sampler, N, src)
    if measure is None and isinstance(sampler, ToeplitzSqrtSampler):
        measure = sampler.measure
    elif measure is not None and not isinstance(measure, dict):
        measure = measure.to_dict()
    provenance = {"measure": measure, "sampler": sampler_tag(sampler), "seed": src.seed}
    return GafPolynomial(coeffs, provenance)


def empirical_covariance(samples, lag: int):
    """Estimate gamma(lag) = E[xi_{j+lag} conj(xi_j)] from independent samples.

    Each sample contributes the average of xi_{j+lag} conj(xi_j) over its
    admissible positions; the standard error is taken across samples, which
    are independent even though positions within one sample are not.

    Returns
    -------
    (estimate, standard_error)
    """
    coeffs = np.array([np.asarray(p.coefficients if isinstance(p, GafPolynomial) else p) for p in samples])
    if coeffs.ndim != 2 or coeffs.shape[0] < 2:
        raise InvalidArgumentError("need at least two samples of equal length")
    n = coeffs.shape[1]
    if not 0 <= lag < n:
        raise InvalidArgumentError(f"lag {lag} out of range for N = {n - 1}")
    per_sample = np.mean(coeffs[:, lag:] * coeffs[:, : n - lag].conj(), axis=1)
    est = complex(per_sample.mean())
    se = float(np.std(per_sample, ddof=1) / math.sqrt(len(per_sample)))
    return est, se
