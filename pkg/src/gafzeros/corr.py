"""Correlation functions of GAF zeros and the identities behind them.

rho_1 is available through the Edelman-Kostlan formula and through a double
integral against the spectral measure. rho_n is available through the
permanent of mixed derivatives of the conditional kernel (``rho_n_direct``)
and through integrals over T^n and T^(n+1) of squared Vandermonde weights
(``rho_n_spectral``). The ``verify_*`` functions check the determinant,
permanent and contour identities used to relate the two.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import (
    DegenerateKernelError,
    DomainError,
    IllConditionedError,
    InvalidArgumentError,
    SizeLimitError,
)
from .spectral import Atoms, CovarianceEvaluator, Lebesgue, build_rule

MIN_SEPARATION = 1e-8
GRAM_DET_MIN = 1e-12
PERMANENT_MAX_N = 20
# quadrature nodes per dimension for integrals over T^d
TENSOR_ORDER = {1: 128, 2: 64, 3: 48, 4: 32}
TENSOR_ORDER_CAP = {1: 2048, 2: 512, 3: 256, 4: 64}
ALIASING_TARGET = 1e-10


@dataclass(frozen=True)
class PointConfig:
    """Pairwise distinct points a_1, ..., a_n of the open unit disk."""

    a: tuple
    min_separation: float = MIN_SEPARATION

    def __post_init__(self):
        pts = tuple(complex(x) for x in np.atleast_1d(np.asarray(self.a, dtype=complex)))
        if not pts:
            raise InvalidArgumentError("need at least one point")
        if any(abs(x) >= 1 for x in pts):
            raise DomainError("points must lie in the open unit disk")
        for i, j in itertools.combinations(range(len(pts)), 2):
            if abs(pts[i] - pts[j]) < self.min_separation:
                raise InvalidArgumentError(f"points {i} and {j} closer than {self.min_separation}")
        object.__setattr__(self, "a", pts)

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.a, dtype=complex)


def _points(a) -> np.ndarray:
    return a.array if isinstance(a, PointConfig) else PointConfig(tuple(np.atleast_1d(a))).array


@dataclass
class CorrelationResult:
    value: float
    method: str
    points: tuple
    error_estimate: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.points)

    def to_dict(self):
        return {
            "n": self.n,
            "points": [[z.real, z.imag] for z in self.points],
            "method": self.method,
            "value": self.value,
            "error": self.error_estimate,
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# ---------------------------------------------------------------------------
# algebraic helpers


def vandermonde(x) -> complex:
    """V(x) = prod_{j<k} (x_k - x_j)."""
    x = np.asarray(x, dtype=complex)
    out = 1.0 + 0j
    for j, k in itertools.combinations(range(len(x)), 2):
        out *= x[k] - x[j]
    return out


def _sign_n_choose_2(n):
    return -1 if (n * (n - 1) // 2) % 2 else 1


def permanent(A) -> complex:
    """Permanent by Ryser's inclusion-exclusion formula over a Gray code.

    Consecutive subsets differ by one column, so each term updates the row
    sums in O(n).
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise InvalidArgumentError("permanent needs a square matrix")
    if n > PERMANENT_MAX_N:
        raise SizeLimitError(f"permanent limited to n <= {PERMANENT_MAX_N}, got {n}")
    if n == 0:
        return 1.0 + 0j
    row_sums = np.zeros(n, dtype=complex)
    in_set = [False] * n
    total = 0j
    size = 0
    for k in range(1, 1 << n):
        j = (k & -k).bit_length() - 1
        if in_set[j]:
            row_sums -= A[:, j]
            size -= 1
        else:
            row_sums += A[:, j]
            size += 1
        in_set[j] = not in_set[j]
        term = np.prod(row_sums)
        total += -term if size % 2 else term
    return total if n % 2 == 0 else -total


def permanent_bruteforce(A) -> complex:
    """Sum over all permutations; O(n! n), for checking small cases."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    return complex(sum(np.prod(A[np.arange(n), list(s)]) for s in itertools.permutations(range(n))))


def cue_kernel(n: int, theta, phi):
    """k_n(theta, phi) = sin(n d / 2) / sin(d / 2) with d = theta - phi."""
    d = np.asarray(theta, dtype=float) - np.asarray(phi, dtype=float)
    den = np.sin(d / 2)
    singular = np.abs(den) < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(singular, n * np.cos(n * d / 2) / np.cos(d / 2), np.sin(n * d / 2) / den)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# 1-point intensity


def rho1_ek(ev, z) -> float:
    """First intensity (1/pi) d_z d_wbar log K(z, w) at w = z.

    ``ev`` is anything with ``kernel_derivatives(z, w)``: a
    :class:`CovarianceEvaluator` or a truncated kernel.
    """
    K, Kz, Kw, Kzw = ev.kernel_derivatives(z, z)
    K = K.real
    if not K > 0:
        raise DegenerateKernelError(f"K(z, z) = {K!r} is not positive")
    return float(((K * Kzw - Kz * Kw) / (math.pi * K * K)).real)


def rho1_hyperbolic(z, N: int | None = None) -> float:
    """Closed-form first intensity for i.i.d. coefficients, optionally truncated at degree N."""
    r2 = abs(z) ** 2
    out = 1.0 / (1.0 - r2) ** 2
    if N is not None:
        out -= (N + 1) ** 2 * r2**N / (1.0 - r2 ** (N + 1)) ** 2
    return out / math.pi


def rho1_spectral(ev: CovarianceEvaluator, z, M: int | None = None) -> float:
    """First intensity from the symmetrized double integral over T^2."""
    rule = ev.rule if M is None else build_rule(ev.measure, M)
    K = ev.kernel(z, z).real
    if not K > 0:
        raise DegenerateKernelError(f"K(z, z) = {K!r} is not positive")
    e = np.exp(-1j * rule.nodes)
    s4 = np.abs(1.0 / (1.0 - complex(z) * e)) ** 4
    w = rule.weights
    integrand = np.abs(e[:, None] - e[None, :]) ** 2 * (s4[:, None] * s4[None, :])
    total = float(w @ integrand @ w)
    return total / (2.0 * math.pi * K * K)


# ---------------------------------------------------------------------------
# conditional kernel and the permanent route


def _gram(ev, a):
    return np.asarray(ev.kernel(a[:, None], a[None, :]), dtype=complex)


def _checked_gram_det(G):
    det = np.linalg.det(G).real
    if not det > GRAM_DET_MIN:
        raise IllConditionedError(det)
    return det


def conditional_kernel(ev: CovarianceEvaluator, a, z, w) -> complex:
    """Kernel of the GAF conditioned to vanish at a_1, ..., a_n.

    Computed as det of the Gram matrix bordered by K(z, a_k), K(a_j, w) and
    K(z, w), divided by det of the Gram matrix.
    """
    a = _points(a)
    G = _gram(ev, a)
    det = _checked_gram_det(G)
    n = len(a)
    B = np.empty((n + 1, n + 1), dtype=complex)
    B[0, 0] = ev.kernel(z, w)
    B[0, 1:] = ev.kernel(z, a)
    B[1:, 0] = ev.kernel(a, w)
    B[1:, 1:] = G
    return complex(np.linalg.det(B) / det)


def rho_n_direct(ev: CovarianceEvaluator, a) -> CorrelationResult:
    """rho_n = per(d_z d_wbar K^a(a_p, a_q)) / (pi^n det K(a_j, a_k)).

    The mixed derivative of the bordered determinant is the determinant with
    its corner replaced by d_z d_wbar K(z, w), its first row by d_z K(z, a_k)
    and its first column by d_wbar K(a_j, w): the determinant is linear in
    that row and column, and only they depend on z and w.
    """
    a = _points(a)
    n = len(a)
    if n > 4:
        raise SizeLimitError("rho_n_direct supports n <= 4")
    K, Kz, Kw, Kzw = (np.asarray(x, dtype=complex) for x in ev.kernel_derivatives(a[:, None], a[None, :]))
    det = _checked_gram_det(K)
    D = np.empty((n, n), dtype=complex)
    B = np.empty((n + 1, n + 1), dtype=complex)
    B[1:, 1:] = K
    for p in range(n):
        for q in range(n):
            B[0, 0] = Kzw[p, q]
            B[0, 1:] = Kz[p, :]
            B[1:, 0] = Kw[:, q]
            D[p, q] = np.linalg.det(B)
    per = permanent(D / det)
    value = per.real / (math.pi**n * det)
    return CorrelationResult(
        value=float(value),
        method="DirectPermanent",
        points=tuple(a),
        diagnostics={"det_K": float(det), "per": [per.real, per.imag]},
    )


# ---------------------------------------------------------------------------
# integrals over T^d


def _tensor_moments(rule, d, a, probes=None):
    """Mass and probe matrix of the measure

        (1/d!) |V(e^{-it_1}, ..., e^{-it_d})|^2 prod_k prod_j |s(a_j, t_k)|^2 F(dt_1) ... F(dt_d).

    The probe matrix has entries int S(x_p, t) conj(S(x_q, t)) against that
    measure, where S(x, t) = prod_k s(x, t_k). The first axis is looped in
    a fixed order so the result does not depend on chunking.
    """
    e = np.exp(-1j * rule.nodes)
    M = len(e)
    g = np.prod(np.abs(1.0 / (1.0 - a[:, None] * e[None, :])) ** 2, axis=0)
    base = rule.weights * g
    probes = np.zeros(0, dtype=complex) if probes is None else np.asarray(probes, dtype=complex)
    sp = 1.0 / (1.0 - probes[:, None] * e[None, :])
    if d == 1:
        e_rest = np.zeros((0, 1), dtype=complex)
        w_rest = np.ones(1)
        s_rest = np.ones((len(probes), 1), dtype=complex)
        v_rest = np.ones(1)
    else:
        idx = np.indices((M,) * (d - 1)).reshape(d - 1, -1)
        e_rest = e[idx]
        w_rest = np.prod(base[idx], axis=0)
        s_rest = np.prod(sp[:, idx], axis=1)
        v_rest = np.ones(idx.shape[1])
        for j, k in itertools.combinations(range(d - 1), 2):
            v_rest = v_rest * np.abs(e_rest[k] - e_rest[j]) ** 2
    mass = 0.0
    mat = np.zeros((len(probes), len(probes)), dtype=complex)
    for i0 in range(M):
        v2 = v_rest * np.prod(np.abs(e_rest - e[i0]) ** 2, axis=0)
        wt = base[i0] * w_rest * v2
        mass += float(np.sum(wt))
        if len(probes):
            sf = sp[:, i0, None] * s_rest
            mat += (sf * wt) @ sf.conj().T
    fact = math.factorial(d)
    return mass / fact, mat / fact


def _order_for(ev, d, M, a=None):
    """Nodes per dimension: ``M`` if given, else the default raised for points near the circle.

    The integrands are analytic in t with poles at distance -log|a_j| from
    the real axis, so the quadrature error decays like max|a_j|^M.
    """
    if M is not None:
        return M
    base = TENSOR_ORDER.get(d, 32)
    r = 0.0 if a is None else float(np.max(np.abs(a)))
    if r <= 0.0:
        return base
    need = math.ceil(math.log(ALIASING_TARGET) / math.log(r))
    return int(min(max(base, need), TENSOR_ORDER_CAP.get(d, 32)))


def mu_mass(ev: CovarianceEvaluator, a, M: int | None = None) -> float:
    """Total mass of mu_a on T^n; equals det K(a_j, a_k) / |V(a)|^2."""
    a = _points(a)
    n = len(a)
    if n > 3:
        raise SizeLimitError("mu_mass uses tensor quadrature and supports n <= 3")
    rule = build_rule(ev.measure, _order_for(ev, n, M, a))
    mass, _ = _tensor_moments(rule, n, a)
    return mass


def det_gram_residual(ev: CovarianceEvaluator, a, M: int | None = None) -> float:
    """Relative gap between det K(a_j, a_k) and |V(a)|^2 mu_a(T^n)."""
    a = _points(a)
    det = np.linalg.det(_gram(ev, a)).real
    rhs = abs(vandermonde(a)) ** 2 * mu_mass(ev, a, M)
    return abs(det - rhs) / abs(det)


def _spectral_rho(ev, a, M_mu, M_tilde):
    n = len(a)
    mu, _ = _tensor_moments(build_rule(ev.measure, M_mu), n, a)
    mu_t, mat = _tensor_moments(build_rule(ev.measure, M_tilde), n + 1, a, probes=a)
    Ka = mat / mu_t
    per = permanent(Ka)
    value = abs(vandermonde(a)) ** 2 * mu_t**n / mu ** (n + 1) * per.real / math.pi**n
    return value, mu, mu_t, per


def rho_n_spectral(ev: CovarianceEvaluator, a, M: int | None = None) -> CorrelationResult:
    """rho_n from the masses of mu_a, mu~_a and the permanent of K_a^(n+1)(a_p, a_q).

    Integrals over T^n and T^(n+1) use tensor quadrature; the error estimate
    is the change in value when the number of nodes per dimension is halved.
    """
    a = _points(a)
    n = len(a)
    if n > 3:
        raise SizeLimitError("rho_n_spectral supports n <= 3")
    M_mu, M_t = _order_for(ev, n, M, a), _order_for(ev, n + 1, M, a)
    value, mu, mu_t, per = _spectral_rho(ev, a, M_mu, M_t)
    if isinstance(ev.measure, Atoms):
        err = 0.0
    else:
        coarse, *_ = _spectral_rho(ev, a, max(2, M_mu // 2), max(2, M_t // 2))
        err = abs(value - coarse)
    diagnostics = {
        "mu_mass": mu,
        "mu_tilde_mass": mu_t,
        "per": [per.real, per.imag],
        "orders": [M_mu, M_t],
    }
    if err > 1e-3 * abs(value):
        msg = f"quadrature not converged: error estimate {err:.3e} vs value {value:.3e}"
        diagnostics["warning"] = msg
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return CorrelationResult(float(value), "Theorem4", tuple(a), float(err), diagnostics)


def rho1_result(ev, z, method: str = "EdelmanKostlan") -> CorrelationResult:
    if method == "EdelmanKostlan":
        value = rho1_ek(ev, z)
    elif method == "SpectralRho1":
        value = rho1_spectral(ev, z)
    else:
        raise InvalidArgumentError(f"unknown method {method!r}")
    return CorrelationResult(value, method, (complex(z),), 0.0, {"K": ev.kernel(z, z).real})


def bergman_dpp_density(a) -> float:
    """det(S(a_p, a_q)^2) / pi^n with S(z, w) = 1 / (1 - z conj(w))."""
    a = _points(a)
    S = 1.0 / (1.0 - a[:, None] * a[None, :].conj())
    return float(np.linalg.det(S * S).real / math.pi ** len(a))


# ---------------------------------------------------------------------------
# identity checks


def _rel(lhs, rhs, scale=None):
    den = abs(rhs) if scale is None else scale
    return 0.0 if lhs == rhs else abs(lhs - rhs) / den


def cauchy_residual(a, b) -> float:
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    C = 1.0 / (1.0 - a[:, None] * b[None, :])
    rhs = vandermonde(a) * vandermonde(b) * np.prod(C)
    return _rel(complex(np.linalg.det(C)), complex(rhs))


def product_differences_residual(a) -> float:
    """prod_{j != k} (a_k - a_j) against (-1)^(n choose 2) V(a)^2."""
    a = np.asarray(a, dtype=complex)
    n = len(a)
    lhs = 1.0 + 0j
    for j, k in itertools.permutations(range(n), 2):
        lhs *= a[k] - a[j]
    return _rel(lhs, _sign_n_choose_2(n) * vandermonde(a) ** 2)


def inverse_vandermonde_residual(a) -> float:
    """V(1/a) against (-1)^(n choose 2) V(a) / (a_1 ... a_n)^(n-1)."""
    a = np.asarray(a, dtype=complex)
    n = len(a)
    rhs = _sign_n_choose_2(n) * vandermonde(a) / np.prod(a) ** (n - 1)
    return _rel(vandermonde(1.0 / a), rhs)


def verify_cauchy(a, b) -> float:
    """Worst relative residual of the Cauchy determinant identity and the two
    Vandermonde identities (the latter checked on ``a``, and on ``b`` too)."""
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    if len(a) != len(b):
        raise InvalidArgumentError("a and b must have equal length")
    res = [cauchy_residual(a, b), product_differences_residual(a), product_differences_residual(b)]
    for x in (a, b):
        if np.all(x != 0):
            res.append(inverse_vandermonde_residual(x))
    return max(res)


def verify_borchardt(a, b) -> float:
    """Relative residual of det(C) per(C) = det(C o C) for C = (1 / (1 - a_p b_q))."""
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    if len(a) > 10:
        raise SizeLimitError("verify_borchardt supports n <= 10")
    C = 1.0 / (1.0 - a[:, None] * b[None, :])
    lhs = complex(np.linalg.det(C)) * permanent(C)
    rhs = complex(np.linalg.det(C * C))
    return _rel(lhs, rhs)


def elementary_symmetric(k: int) -> Callable:
    """e_k(z_1, ..., z_n) evaluated along the last axis."""

    def Q(z):
        z = np.asarray(z, dtype=complex)
        n = z.shape[-1]
        out = np.zeros(z.shape[:-1], dtype=complex)
        for idx in itertools.combinations(range(n), k):
            out = out + np.prod(z[..., list(idx)], axis=-1)
        return out

    return Q


def szego_product(b) -> Callable:
    """Q(z) = prod_k prod_j 1 / (1 - z_k conj(b_j)); analytic on the closed disk for |b_j| < 1."""
    b = np.asarray(b, dtype=complex)

    def Q(z):
        z = np.asarray(z, dtype=complex)
        return np.prod(1.0 / (1.0 - z[..., :, None] * b.conj()), axis=(-2, -1))

    return Q


def _contour_integral(Q, a, variant, M):
    """(1/2 pi i)^n times the n-fold integral over the unit circle, midpoint rule in angle."""
    n = len(a)
    z = np.exp(1j * 2 * math.pi * (np.arange(M) + 0.5) / M)
    total = 0j
    rest = np.indices((M,) * (n - 1)).reshape(n - 1, -1) if n > 1 else np.zeros((0, 1), dtype=int)
    z_rest = z[rest]
    for i0 in range(M):
        pts = np.vstack([np.full(z_rest.shape[1], z[i0]), z_rest])
        v = np.ones(pts.shape[1], dtype=complex)
        for j, k in itertools.combinations(range(n), 2):
            v = v * (pts[k] - pts[j])
        c = np.prod(1.0 / (pts[:, None, :] - a[None, :, None]), axis=(0, 1))
        f = v * v * c * Q(pts.T)
        if variant == "plain":
            f = f * np.prod(pts, axis=0)
        total += np.sum(f)
    return total / M**n


def verify_reproducing(Q: Callable, a, variant: str = "plain", M: int = 256) -> float:
    """Relative residual of the Cauchy-type reproducing formula on the torus C^n.

    ``variant="plain"`` integrates against dz_1 ... dz_n and compares with
    (-1)^(n choose 2) n! Q(a); ``variant="over_z"`` integrates against
    dz_1/z_1 ... dz_n/z_n and adds the residues at the origin. The residual
    is scaled by the largest term on the right-hand side.
    """
    a = np.asarray(a, dtype=complex)
    n = len(a)
    if n > 3:
        raise SizeLimitError("verify_reproducing supports n <= 3")
    if variant not in ("plain", "over_z"):
        raise InvalidArgumentError("variant must be 'plain' or 'over_z'")
    if variant == "over_z" and np.any(a == 0):
        raise InvalidArgumentError("over_z variant needs nonzero points")
    lhs = _contour_integral(Q, a, variant, M)
    pref = _sign_n_choose_2(n) * math.factorial(n)
    qa = complex(Q(a))
    if variant == "plain":
        rhs = pref * qa
        scale = abs(rhs)
    else:
        terms = [qa]
        for p in range(n):
            others = np.delete(a, p)
            coef = np.prod(others / (others - a[p]))
            terms.append(-coef * complex(Q(np.concatenate([[0.0], others]))))
        inv = 1.0 / np.prod(a)
        rhs = pref * inv * sum(terms)
        scale = abs(pref * inv) * max(abs(t) for t in terms)
    return _rel(lhs, rhs, max(scale, 1e-300))


class VolumeResiduals(NamedTuple):
    mass: float
    kernel: float


def verify_volume_formula(a, M: int | None = None, ev: CovarianceEvaluator | None = None, probes: int = 5, seed: int = 0):
    """Check the Lebesgue-case closed forms for mu_a, mu~_a and K_a^(n+1).

    Expected: both masses equal S(a, a) = prod_{j,k} 1 / (1 - a_j conj(a_k)),
    and K_a^(n+1)(z, w) = S(z, w) S(z, a) conj(S(w, a)), checked at (0, 0)
    and ``probes`` random pairs.
    """
    if ev is None:
        ev = CovarianceEvaluator(Lebesgue())
    elif not isinstance(ev.measure, Lebesgue):
        raise InvalidArgumentError("the volume formula holds for the Lebesgue measure only")
    a = _points(a)
    n = len(a)
    if n > 2:
        raise SizeLimitError("verify_volume_formula supports n <= 2")
    S_aa = float(np.prod(1.0 / (1.0 - a[:, None] * a[None, :].conj())).real)
    rng = np.random.default_rng(seed)
    pts = 0.5 * np.sqrt(rng.random(2 * probes)) * np.exp(2j * math.pi * rng.random(2 * probes))
    pts = np.concatenate([[0.0], pts])
    mu, _ = _tensor_moments(build_rule(ev.measure, _order_for(ev, n, M, a)), n, a)
    mu_t, mat = _tensor_moments(build_rule(ev.measure, _order_for(ev, n + 1, M, a)), n + 1, a, probes=pts)
    Ka = mat / mu_t
    mass_res = max(abs(mu - S_aa), abs(mu_t - S_aa)) / S_aa

    def S_point(z, w):
        return 1.0 / (1.0 - z * np.conj(w))

    pairs = [(0, 0)] + [(1 + 2 * i, 2 + 2 * i) for i in range(probes)]
    kern_res = 0.0
    for i, j in pairs:
        z, w = pts[i], pts[j]
        expected = S_point(z, w) * np.prod(S_point(z, a)) * np.conj(np.prod(S_point(w, a)))
        kern_res = max(kern_res, abs(Ka[i, j] - expected) / abs(expected))
    return VolumeResiduals(float(mass_res), float(kern_res))
