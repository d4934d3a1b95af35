"""Roots of sampled polynomials and Monte Carlo zero statistics."""

from __future__ import annotations

import concurrent.futures
import csv
import io
import math
import os
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, NumericFailure
from .gauss import ComplexNormalSource, GafPolynomial, sample_coefficients

BOUNDARY_TOL = 1e-9
RESIDUAL_TOL = 1e-8
ABERTH_MAX_ITER = 200
STEP_TOL = 1e-13


@dataclass
class ZeroSet:
    roots: np.ndarray
    boundary_tol: float = BOUNDARY_TOL
    provenance: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.roots)


@dataclass
class CountSummary:
    inside_disk: int
    outside_disk: int
    on_boundary: int
    inside_left_half: int
    inside_right_half: int
    radius: float = 1.0

    @property
    def total(self) -> int:
        return self.inside_disk + self.outside_disk + self.on_boundary


# ---------------------------------------------------------------------------
# root finding


def _horner(desc, z):
    """p(z) and p'(z) for rows of descending coefficients, evaluated at z (batch, m)."""
    p = np.broadcast_to(desc[:, :1], z.shape).astype(complex)
    dp = np.zeros_like(p)
    for k in range(1, desc.shape[1]):
        dp = dp * z + p
        p = p * z + desc[:, k : k + 1]
    return p, dp


def _initial_guesses(monic_desc):
    batch, m1 = monic_desc.shape
    deg = m1 - 1
    radius = np.abs(monic_desc[:, -1]) ** (1.0 / deg)
    radius = np.where(radius > 0, radius, 1.0)
    angles = 2 * math.pi * np.arange(deg) / deg + 0.4 + math.pi / (2 * deg)
    return radius[:, None] * np.exp(1j * angles)[None, :]


def _aberth(monic_desc, max_iter=ABERTH_MAX_ITER):
    """Aberth-Ehrlich iteration on a batch of monic polynomials of equal degree.

    Returns (roots, converged_mask_per_polynomial).
    """
    z = _initial_guesses(monic_desc)
    deg = z.shape[1]
    active = np.ones(z.shape, dtype=bool)
    eye = np.eye(deg, dtype=bool)
    for _ in range(max_iter):
        rows = np.flatnonzero(active.any(axis=1))
        if rows.size == 0:
            break
        zr = z[rows]
        p, dp = _horner(monic_desc[rows], zr)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            diff = zr[:, :, None] - zr[:, None, :]
            diff[:, eye] = np.inf
            repulsion = np.sum(1.0 / diff, axis=2)
            step = ratio / (1.0 - ratio * repulsion)
        step = np.where(np.isfinite(step), step, 0.0)
        step = np.where(active[rows], step, 0.0)
        zr = zr - step
        z[rows] = zr
        active[rows] &= np.abs(step) >= STEP_TOL * (1.0 + np.abs(zr))
    return z, ~active.any(axis=1)


def _newton_polish(monic_desc, z):
    p, dp = _horner(monic_desc, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        step = p / dp
    step = np.where(np.isfinite(step), step, 0.0)
    z_new = z - step
    p_new, _ = _horner(monic_desc, z_new)
    return np.where(np.abs(p_new) <= np.abs(p), z_new, z)


def residual_bounds(coeffs, roots):
    """Per-root (|p(root)|, bound) with bound = 1e-8 max|xi| max(1, |root|)^deg."""
    coeffs = np.asarray(coeffs)
    deg = len(coeffs) - 1
    values = np.abs(np.polyval(coeffs[::-1], roots))
    scale = np.max(np.abs(coeffs)) * np.maximum(1.0, np.abs(roots)) ** deg
    return values, RESIDUAL_TOL * scale


def _strip(coeffs):
    """Drop vanishing top coefficients and factor out roots at the origin."""
    c = np.asarray(coeffs, dtype=complex)
    nz = np.flatnonzero(c)
    if nz.size == 0:
        raise InvalidArgumentError("zero polynomial has no well-defined roots")
    c = c[: nz[-1] + 1]
    low = nz[0]
    return c, low


def _roots_many(coeff_rows):
    """Roots of several polynomials; returns list of arrays or NumericFailure per row."""
    prepared = [_strip(c) for c in coeff_rows]
    out = [None] * len(prepared)
    groups = {}
    for i, (c, low) in enumerate(prepared):
        deg = len(c) - 1
        if deg < 1:
            raise InvalidArgumentError("polynomial must have degree >= 1")
        if deg - low == 0:
            out[i] = np.zeros(deg, dtype=complex)
            continue
        groups.setdefault(deg - low, []).append(i)
    for reduced_deg, idx in groups.items():
        desc = np.array([prepared[i][0][prepared[i][1] :][::-1] for i in idx])
        desc = desc / desc[:, :1]
        if reduced_deg == 1:
            z = -desc[:, 1:2]
            converged = np.ones(len(idx), dtype=bool)
        else:
            z, converged = _aberth(desc)
            z = _newton_polish(desc, z)
        for row, i in enumerate(idx):
            c, low = prepared[i]
            roots = np.concatenate([np.zeros(low, dtype=complex), z[row]])
            values, bound = residual_bounds(c, roots)
            if not converged[row] or np.any(values > bound):
                roots = np.concatenate([np.zeros(low, dtype=complex), np.roots(c[low:][::-1])])
                values, bound = residual_bounds(c, roots)
                if np.any(values > bound):
                    worst = float(np.max(values / bound))
                    out[i] = NumericFailure(f"root residual exceeds bound by factor {worst:.3e}")
                    continue
            out[i] = roots
    return out


def find_roots(p: GafPolynomial) -> ZeroSet:
    """All roots of ``p`` by Aberth-Ehrlich iteration with Newton polishing.

    Falls back to companion-matrix eigenvalues if the iteration stalls; the
    backward-error bound is enforced either way.
    """
    coeffs = p.coefficients if isinstance(p, GafPolynomial) else np.asarray(p)
    provenance = p.provenance if isinstance(p, GafPolynomial) else {}
    (roots,) = _roots_many([coeffs])
    if isinstance(roots, Exception):
        raise roots
    return ZeroSet(roots, BOUNDARY_TOL, dict(provenance))


def root_classes(zs: ZeroSet, r: float = 1.0) -> np.ndarray:
    """Per-root label: 'in', 'bd' or 'out' relative to the circle |z| = r."""
    mod = np.abs(zs.roots)
    labels = np.full(mod.shape, "out", dtype=object)
    labels[np.abs(mod - r) <= zs.boundary_tol] = "bd"
    labels[mod < r - zs.boundary_tol] = "in"
    return labels


def classify(zs: ZeroSet, r: float = 1.0) -> CountSummary:
    """Count roots inside, on and outside |z| = r; split the inside ones by Re z.

    Roots with Re z = 0 count toward the right half-plane.
    """
    if not r > 0:
        raise InvalidArgumentError("radius must be positive")
    labels = root_classes(zs, r)
    inside = labels == "in"
    left = int(np.sum(inside & (zs.roots.real < 0)))
    return CountSummary(
        inside_disk=int(np.sum(inside)),
        outside_disk=int(np.sum(labels == "out")),
        on_boundary=int(np.sum(labels == "bd")),
        inside_left_half=left,
        inside_right_half=int(np.sum(inside)) - left,
        radius=r,
    )


def _bose_remainder(x):
    """h(x) = 1/(e^x - 1) - 1/x + 1/2, evaluated without cancellation."""
    if x < 1e-2:
        x2 = x * x
        return x / 12 * (1 - x2 / 60 * (1 - x2 / 42))
    return math.exp(-x) / -math.expm1(-x) - 1 / x + 0.5


def expected_count_in_disk(N: int, r: float) -> float:
    """Expected number of zeros of the degree-N i.i.d. polynomial in |z| < r.

    The closed form r^2/(1 - r^2) - (N+1) r^{2(N+1)}/(1 - r^{2(N+1)}) cancels
    badly as r -> 1, so for r^2 > 1/2 it is rewritten as
    N/2 + h(u) - (N+1) h((N+1) u) with u = -2 log r.
    """
    if not 0 < r <= 1:
        raise InvalidArgumentError("radius must lie in (0, 1]")
    if r == 1:
        return N / 2
    r2 = r * r
    if r2 <= 0.5:
        rN = r2 ** (N + 1)
        return r2 / (1 - r2) - (N + 1) * rN / (1 - rN)
    u = -2.0 * math.log(r)
    return N / 2 + _bose_remainder(u) - (N + 1) * _bose_remainder((N + 1) * u)


# ---------------------------------------------------------------------------
# Monte Carlo


REGIONS = ("disk", "left", "right")


@dataclass
class McHistogram:
    region: str
    frequencies: dict
    mean: float
    variance: float
    se: float
    runs: int
    failures: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["count", "frequency"])
        for k in sorted(self.frequencies):
            w.writerow([k, self.frequencies[k]])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "region": self.region,
            "runs": self.runs,
            "mean": self.mean,
            "variance": self.variance,
            "se": self.se,
            "failed_runs": [f["run_id"] for f in self.failures],
        }


def _threads():
    env = os.environ.get("GAFZEROS_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass
class McRun:
    run_id: int
    seed: int
    roots: np.ndarray | None
    error: str | None = None


def mc_zero_sets(sampler, N: int, runs: int, seed_base: int, chunk: int = 256, threads: int | None = None):
    """Sample and root ``runs`` polynomials; run i uses seed ``seed_base + i``.

    Output order and content depend only on the seeds, not on the number of
    worker threads.
    """
    if runs < 1:
        raise InvalidArgumentError("runs must be >= 1")

    def work(start):
        ids = range(start, min(runs, start + chunk))
        polys = [sample_coefficients(sampler, N, ComplexNormalSource(seed_base + i)) for i in ids]
        results = _roots_many([p.coefficients for p in polys])
        out = []
        for i, res in zip(ids, results):
            if isinstance(res, Exception):
                out.append(McRun(i, seed_base + i, None, str(res)))
            else:
                out.append(McRun(i, seed_base + i, res))
        return out

    starts = range(0, runs, chunk)
    threads = threads or _threads()
    if threads == 1:
        batches = [work(s) for s in starts]
    else:
        with concurrent.futures.ThreadPoolExecutor(threads) as pool:
            batches = list(pool.map(work, starts))
    return [run for batch in batches for run in batch]


def histogram_from_runs(run_list, region: str = "disk", r: float = 1.0) -> McHistogram:
    if region not in REGIONS:
        raise InvalidArgumentError(f"region must be one of {REGIONS}")
    counts = []
    failures = []
    for run in run_list:
        if run.roots is None:
            failures.append({"run_id": run.run_id, "seed": run.seed, "error": run.error})
            continue
        s = classify(ZeroSet(run.roots), r)
        counts.append({"disk": s.inside_disk, "left": s.inside_left_half, "right": s.inside_right_half}[region])
    arr = np.array(counts, dtype=float)
    n = len(arr)
    mean = float(arr.mean()) if n else float("nan")
    var = float(arr.var(ddof=1)) if n > 1 else 0.0
    return McHistogram(
        region=region,
        frequencies=dict(sorted(Counter(counts).items())),
        mean=mean,
        variance=var,
        se=math.sqrt(var / n) if n else float("nan"),
        runs=n,
        failures=failures,
    )


def mc_count_histogram(sampler, N: int, runs: int, seed_base: int, region: str = "disk", r: float = 1.0) -> McHistogram:
    """Histogram of inside-counts over ``runs`` seeded samples.

    ``region`` is ``"disk"`` (zeros in |z| < r), ``"left"`` or ``"right"``
    (zeros inside the disk with negative, resp. nonnegative, real part).
    Failed root-finding runs are reported in ``failures`` and excluded.
    """
    return histogram_from_runs(mc_zero_sets(sampler, N, runs, seed_base), region, r)


# ---------------------------------------------------------------------------
# export


def zeros_csv(run_list, r: float = 1.0) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["run_id", "seed", "re", "im", "abs", "class"])
    for run in run_list:
        if run.roots is None:
            continue
        labels = root_classes(ZeroSet(run.roots), r)
        for z, label in zip(run.roots, labels):
            w.writerow([run.run_id, run.seed, repr(float(z.real)), repr(float(z.imag)), repr(float(abs(z))), label])
    return buf.getvalue()


def zeros_svg(run_list, size: int = 600, extent: float = 1.6, r: float = 1.0) -> str:
    """Scatter plot: inside zeros red, outside blue, unit circle in black."""
    half = size / 2
    scale = half / extent

    def xy(z):
        return half + scale * z.real, half - scale * z.imag

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<line x1="0" y1="{half}" x2="{size}" y2="{half}" stroke="#bbb" stroke-width="0.5"/>',
        f'<line x1="{half}" y1="0" x2="{half}" y2="{size}" stroke="#bbb" stroke-width="0.5"/>',
        f'<circle cx="{half}" cy="{half}" r="{scale * r:.3f}" fill="none" stroke="black" stroke-width="1"/>',
    ]
    colors = {"in": "red", "out": "blue", "bd": "green"}
    for run in run_list:
        if run.roots is None:
            continue
        for z, label in zip(run.roots, root_classes(ZeroSet(run.roots), r)):
            x, y = xy(z)
            if 0 <= x <= size and 0 <= y <= size:
                parts.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="1.6" fill="{colors[label]}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
