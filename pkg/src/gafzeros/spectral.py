"""Spectral measures on the circle and the covariance kernels they induce.

A probability measure F on T = (-pi, pi] determines the autocovariance
gamma(k) = int exp(-ikt) F(dt) of a stationary coefficient sequence and the
covariance kernel of the random power series with those coefficients,

    K_F(z, w) = int s(z, t) conj(s(w, t)) F(dt),    s(z, t) = 1 / (1 - z exp(-it)).

Four measure shapes are supported: normalized Lebesgue measure, finitely many
atoms, normalized Lebesgue measure on an arc, and a tabulated piecewise-linear
density.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.linalg import toeplitz

from .errors import DomainError, InvalidArgumentError

TWO_PI = 2.0 * math.pi
DEFAULT_ORDER = 256
ANGLE_TOL = 1e-12


def normalize_angle(t):
    """Map angles into (-pi, pi]."""
    t = np.asarray(t, dtype=float)
    out = math.pi - np.mod(math.pi - t, TWO_PI)
    return float(out) if out.ndim == 0 else out


def _circular_gap(a, b):
    d = abs(a - b) % TWO_PI
    return min(d, TWO_PI - d)


# ---------------------------------------------------------------------------
# measures


@dataclass(frozen=True)
class Lebesgue:
    """Normalized Lebesgue measure dt / (2 pi); i.i.d. coefficients."""

    def to_dict(self):
        return {"type": "lebesgue"}


@dataclass(frozen=True)
class Atoms:
    angles: tuple
    weights: tuple

    def __post_init__(self):
        angles = tuple(float(a) for a in normalize_angle(np.atleast_1d(self.angles)))
        weights = tuple(float(w) for w in np.atleast_1d(self.weights))
        if len(angles) == 0 or len(angles) != len(weights):
            raise InvalidArgumentError("atoms need matching, non-empty angles and weights")
        if min(weights) <= 0:
            raise InvalidArgumentError("atom weights must be positive")
        if abs(math.fsum(weights) - 1.0) > 1e-12 * max(1, len(weights)):
            raise InvalidArgumentError(f"atom weights sum to {math.fsum(weights)!r}, not 1")
        for i in range(len(angles)):
            for j in range(i):
                if _circular_gap(angles[i], angles[j]) <= ANGLE_TOL:
                    raise InvalidArgumentError(f"duplicate atom at angle {angles[i]!r}")
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def roots_of_unity(cls, n: int) -> "Atoms":
        """Uniform mass on the n-th roots of unity."""
        if n < 1:
            raise InvalidArgumentError("n must be positive")
        return cls(tuple(TWO_PI * k / n for k in range(n)), (1.0 / n,) * n)

    def to_dict(self):
        return {"type": "atoms", "angles": list(self.angles), "weights": list(self.weights)}


@dataclass(frozen=True)
class ArcUniform:
    """Normalized Lebesgue measure on the arc [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not hi > lo or hi - lo > TWO_PI + ANGLE_TOL:
            raise InvalidArgumentError(f"invalid arc [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def to_dict(self):
        return {"type": "arc", "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class TabulatedDensity:
    """Piecewise-linear density (w.r.t. dt) through (nodes[i], values[i])."""

    nodes: tuple
    values: tuple

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape or nodes.size < 2:
            raise InvalidArgumentError("nodes and values must be 1-d of equal length >= 2")
        if np.any(np.diff(nodes) <= 0):
            raise InvalidArgumentError("density nodes must be strictly increasing")
        if nodes[0] > -math.pi + ANGLE_TOL or nodes[-1] < math.pi - ANGLE_TOL:
            raise InvalidArgumentError("density nodes must cover (-pi, pi]")
        if np.any(values < 0):
            raise InvalidArgumentError("density values must be nonnegative")
        mass = float(np.sum(0.5 * (values[1:] + values[:-1]) * np.diff(nodes)))
        if abs(mass - 1.0) > 1e-8:
            raise InvalidArgumentError(f"density integrates to {mass!r}, not 1")
        object.__setattr__(self, "nodes", tuple(nodes.tolist()))
        object.__setattr__(self, "values", tuple(values.tolist()))

    @classmethod
    def normalized(cls, nodes, values) -> "TabulatedDensity":
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        mass = np.sum(0.5 * (values[1:] + values[:-1]) * np.diff(nodes))
        return cls(tuple(nodes), tuple(values / mass))

    def density(self, t):
        return np.interp(t, self.nodes, self.values)

    def to_dict(self):
        return {"type": "density", "nodes": list(self.nodes), "values": list(self.values)}


SpectralMeasure = Union[Lebesgue, Atoms, ArcUniform, TabulatedDensity]


def measure_from_dict(d: dict) -> SpectralMeasure:
    kind = d.get("type")
    if kind == "lebesgue":
        return Lebesgue()
    if kind == "atoms":
        return Atoms(tuple(d["angles"]), tuple(d["weights"]))
    if kind == "arc":
        return ArcUniform(d["lo"], d["hi"])
    if kind == "density":
        return TabulatedDensity(tuple(d["nodes"]), tuple(d["values"]))
    raise InvalidArgumentError(f"unknown measure type {kind!r}")


def measure_to_json(measure: SpectralMeasure) -> str:
    return json.dumps(measure.to_dict())


def measure_from_json(text: str) -> SpectralMeasure:
    return measure_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def integrate(self, values):
        """Integrate samples at the nodes (last axis) against the measure."""
        return np.asarray(values) @ self.weights


def build_rule(measure: SpectralMeasure, M: int = DEFAULT_ORDER) -> QuadratureRule:
    """Quadrature rule for int f dF with M nodes (exact for atoms)."""
    if isinstance(measure, Atoms):
        return QuadratureRule(np.array(measure.angles), np.array(measure.weights), len(measure.angles))
    if M < 2:
        raise InvalidArgumentError(f"quadrature order must be >= 2 for continuous measures, got {M}")
    if isinstance(measure, Lebesgue):
        nodes = -math.pi + TWO_PI * (np.arange(M) + 0.5) / M
        weights = np.full(M, 1.0 / M)
    elif isinstance(measure, ArcUniform):
        x, w = np.polynomial.legendre.leggauss(M)
        half = 0.5 * (measure.hi - measure.lo)
        nodes = measure.lo + half * (x + 1.0)
        weights = w / w.sum()
    elif isinstance(measure, TabulatedDensity):
        mesh = np.asarray(measure.nodes)
        per = max(1, math.ceil(M / (mesh.size - 1)))
        frac = (np.arange(per) + 0.5) / per
        widths = np.diff(mesh)
        nodes = (mesh[:-1, None] + widths[:, None] * frac[None, :]).ravel()
        weights = measure.density(nodes) * np.repeat(widths / per, per)
        weights = weights / weights.sum()
    else:
        raise InvalidArgumentError(f"unsupported measure {measure!r}")
    return QuadratureRule(nodes, weights, M)


# ---------------------------------------------------------------------------
# elementary kernels


def _check_disk(*points):
    for p in points:
        if np.any(np.abs(p) >= 1.0):
            raise DomainError("points must lie in the open unit disk")


def szego(z, t):
    """Szego kernel s(z, t) = 1 / (1 - z exp(-it)) for |z| < 1."""
    _check_disk(z)
    return 1.0 / (1.0 - np.asarray(z) * np.exp(-1j * np.asarray(t)))


def poisson(r, theta):
    """Poisson kernel (1 - r^2) / (1 - 2 r cos(theta) + r^2) for 0 <= r < 1."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r >= 1):
        raise DomainError("Poisson kernel needs 0 <= r < 1")
    return (1 - r * r) / (1 - 2 * r * np.cos(theta) + r * r)


# ---------------------------------------------------------------------------
# covariance evaluator


def detect_closed_form(measure: SpectralMeasure):
    """Return (tag, period) for measures with exact kernel formulas."""
    if isinstance(measure, Lebesgue):
        return "hyperbolic", None
    if isinstance(measure, Atoms):
        n = len(measure.angles)
        expected = Atoms.roots_of_unity(n).angles
        if all(abs(w - 1.0 / n) <= 1e-12 for w in measure.weights) and all(
            any(_circular_gap(a, b) <= 1e-10 for b in expected) for a in measure.angles
        ):
            return "periodic", n
    if isinstance(measure, ArcUniform):
        if abs(measure.lo + math.pi / 2) <= ANGLE_TOL and abs(measure.hi - math.pi / 2) <= ANGLE_TOL:
            return "arc_half", None
    return None, None


def _scalar_or_array(x):
    return complex(x) if np.ndim(x) == 0 else x


@dataclass
class CovarianceEvaluator:
    """Evaluates gamma(k), K_F(z, w) and its first mixed derivatives.

    ``closed_form="auto"`` enables exact formulas for the Lebesgue measure,
    uniform atoms on roots of unity and the half-circle arc; ``None`` forces
    quadrature everywhere.
    """

    measure: SpectralMeasure
    order: int = DEFAULT_ORDER
    closed_form: str | None = "auto"
    cache_cap: int | None = None
    rule: QuadratureRule = field(init=False, repr=False)
    period: int | None = field(init=False, default=None)
    _gamma_cache: dict = field(init=False, repr=False, default_factory=dict)
    _lock: threading.Lock = field(init=False, repr=False, default_factory=threading.Lock)

    def __post_init__(self):
        self.rule = build_rule(self.measure, self.order)
        if self.closed_form == "auto":
            self.closed_form, self.period = detect_closed_form(self.measure)
        elif self.closed_form is not None:
            tag, period = detect_closed_form(self.measure)
            if tag != self.closed_form:
                raise InvalidArgumentError(f"closed form {self.closed_form!r} does not apply to {self.measure!r}")
            self.period = period

    # -- autocovariance -----------------------------------------------------

    def _gamma_nonneg(self, k: int) -> complex:
        if self.closed_form == "hyperbolic":
            return 1.0 + 0j if k == 0 else 0j
        if self.closed_form == "periodic":
            return 1.0 + 0j if k % self.period == 0 else 0j
        if self.closed_form == "arc_half":
            return 1.0 + 0j if k == 0 else complex(2.0 / math.pi * math.sin(k * math.pi / 2) / k)
        if k == 0:
            return 1.0 + 0j
        return complex(self.rule.integrate(np.exp(-1j * k * self.rule.nodes)))

    def gamma(self, k: int) -> complex:
        """Autocovariance gamma(k) = E[xi_{j+k} conj(xi_j)]."""
        k = int(k)
        key = abs(k)
        val = self._gamma_cache.get(key)
        if val is None:
            val = self._gamma_nonneg(key)
            with self._lock:
                if self.cache_cap is None or len(self._gamma_cache) < self.cache_cap:
                    self._gamma_cache[key] = val
        return val if k >= 0 else val.conjugate()

    def gammas(self, n: int) -> np.ndarray:
        """gamma(0), ..., gamma(n - 1)."""
        return np.array([self.gamma(k) for k in range(n)])

    def toeplitz(self, n: int) -> np.ndarray:
        """The n x n covariance matrix (gamma(j - k))."""
        g = self.gammas(n)
        return toeplitz(g, g.conj())

    # -- kernel ---------------------------------------------------------------

    def _szego_table(self, z):
        e = np.exp(-1j * self.rule.nodes)
        return e, 1.0 / (1.0 - np.asarray(z)[..., None] * e)

    def kernel(self, z, w):
        """K_F(z, w) for z, w in the unit disk (broadcasts over arrays)."""
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        _check_disk(z, w)
        if self.closed_form == "hyperbolic":
            return _scalar_or_array(1.0 / (1.0 - z * w.conj()))
        if self.closed_form == "periodic":
            n = self.period
            zw = z * w.conj()
            return _scalar_or_array((1 - zw**n) / ((1 - zw) * (1 - z**n) * (1 - w.conj() ** n)))
        _, sz = self._szego_table(z)
        _, sw = self._szego_table(w)
        out = self.rule.integrate(sz * sw.conj())
        if self.closed_form == "arc_half":
            diag = np.broadcast_to(z == w, np.shape(out))
            if np.any(diag):
                zz = np.broadcast_to(z, np.shape(out))
                out = np.where(diag, _arc_half_diagonal(zz), out)
        return _scalar_or_array(out)

    def kernel_derivatives(self, z, w):
        """(K, dK/dz, dK/dconj(w), d2K/dz dconj(w)) by differentiating under the integral."""
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        _check_disk(z, w)
        if self.closed_form == "hyperbolic":
            q = 1.0 / (1.0 - z * w.conj())
            out = (q, w.conj() * q * q, z * q * q, (1.0 + z * w.conj()) * q**3)
            return tuple(_scalar_or_array(x) for x in out)
        e, sz = self._szego_table(z)
        _, sw = self._szego_table(w)
        dz = e * sz * sz
        dw = e * sw * sw
        sw_c, dw_c = sw.conj(), dw.conj()
        out = (sz * sw_c, dz * sw_c, sz * dw_c, dz * dw_c)
        return tuple(_scalar_or_array(self.rule.integrate(x)) for x in out)

    def truncated(self, N: int) -> "TruncatedKernel":
        return TruncatedKernel(self, N)

    def truncated_kernel(self, N: int, z, w) -> complex:
        """sum_{j,k <= N} gamma(j - k) z^j conj(w)^k; entire in z and w."""
        return self.truncated(N).kernel(z, w)


def _arc_half_diagonal(z):
    # harmonic extension of the density 1/pi on [-pi/2, pi/2], times 1/(1 - r^2)
    r = np.abs(z)
    theta = np.angle(z)
    return (1.0 + 2.0 / math.pi * np.arctan(2 * r * np.cos(theta) / (1 - r * r))) / (1 - r * r)


class TruncatedKernel:
    """Covariance of the degree-N truncation sum_{k<=N} xi_k z^k."""

    def __init__(self, ev: CovarianceEvaluator, N: int):
        if N < 0:
            raise InvalidArgumentError("N must be nonnegative")
        self.ev = ev
        self.N = N
        self.matrix = ev.toeplitz(N + 1)

    def _powers(self, z):
        j = np.arange(self.N + 1)
        pw = complex(z) ** j
        dpw = np.zeros_like(pw)
        dpw[1:] = j[1:] * pw[:-1]
        return pw, dpw

    def kernel(self, z, w) -> complex:
        pz, _ = self._powers(z)
        pw, _ = self._powers(w)
        return complex(pz @ self.matrix @ pw.conj())

    def kernel_derivatives(self, z, w):
        pz, dz = self._powers(z)
        pw, dw = self._powers(w)
        T = self.matrix
        return (
            complex(pz @ T @ pw.conj()),
            complex(dz @ T @ pw.conj()),
            complex(pz @ T @ dw.conj()),
            complex(dz @ T @ dw.conj()),
        )
