"""Command line entry point: ``gafzeros <sample-zeros|intensity|mc-counts|verify>``.

Experiments read a JSON config::

    {"measure": {"type": "arc", "lo": -1.5707963267948966, "hi": 1.5707963267948966},
     "sampler": "auto", "N": 100, "runs": 25, "seed_base": 42, "output_dir": "out",
     "formats": ["csv", "json", "svg"],
     "thetas": 181, "radii": [0.25, 0.5, 0.75, 0.99], "truncate": false}

Exit codes: 0 success, 2 config error, 3 numeric failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import corr, suites, zeros
from .errors import GafError, InvalidArgumentError, NumericFailure
from .gauss import IIDSampler, PeriodicSampler, ToeplitzSqrtSampler
from .spectral import CovarianceEvaluator, detect_closed_form, measure_from_dict

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4
MAX_FAILURE_RATE = 0.01
FORMATS = ("csv", "json", "svg")


class ConfigError(GafError):
    pass


@dataclass
class ExperimentConfig:
    measure: dict = field(default_factory=lambda: {"type": "lebesgue"})
    sampler: str = "auto"
    N: int = 100
    runs: int = 1
    seed_base: int = 0
    output_dir: str = "."
    formats: list = field(default_factory=lambda: list(FORMATS))
    thetas: int = 181
    radii: list = field(default_factory=lambda: [0.25, 0.5, 0.75])
    truncate: bool = False

    def __post_init__(self):
        try:
            self.measure_obj = measure_from_dict(self.measure)
        except (KeyError, TypeError, InvalidArgumentError) as exc:
            raise ConfigError(f"bad measure: {exc}") from exc
        if self.sampler not in ("auto", "iid", "periodic", "toeplitz"):
            raise ConfigError(f"unknown sampler {self.sampler!r}")
        if int(self.N) < 1 or int(self.runs) < 1:
            raise ConfigError("N and runs must be >= 1")
        if not 0 <= int(self.seed_base) < 2**64:
            raise ConfigError("seed_base must be an unsigned 64-bit integer")
        if any(f not in FORMATS for f in self.formats):
            raise ConfigError(f"formats must be drawn from {FORMATS}")
        if any(not 0 <= r < 1 for r in self.radii) or int(self.thetas) < 2:
            raise ConfigError("radii must lie in [0, 1) and thetas >= 2")

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("measure_obj", None)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__) - {"measure_obj"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc


def build_sampler(cfg: ExperimentConfig):
    measure = cfg.measure_obj
    tag, period = detect_closed_form(measure)
    kind = cfg.sampler
    if kind == "auto":
        kind = {"hyperbolic": "iid", "periodic": "periodic"}.get(tag, "toeplitz")
    if kind == "iid":
        if tag != "hyperbolic":
            raise ConfigError("the iid sampler needs the lebesgue measure")
        return IIDSampler()
    if kind == "periodic":
        if tag != "periodic":
            raise ConfigError("the periodic sampler needs uniform atoms on roots of unity")
        return PeriodicSampler(period)
    return ToeplitzSqrtSampler.from_evaluator(CovarianceEvaluator(measure), cfg.N + 1)


def _write(out: Path, name: str, text: str):
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _failures(run_list):
    return [{"run_id": r.run_id, "seed": r.seed, "error": r.error} for r in run_list if r.roots is None]


# ---------------------------------------------------------------------------
# commands


def cmd_sample_zeros(cfg: ExperimentConfig) -> int:
    runs = zeros.mc_zero_sets(build_sampler(cfg), cfg.N, cfg.runs, cfg.seed_base)
    out = Path(cfg.output_dir)
    failed = _failures(runs)
    if "csv" in cfg.formats:
        _write(out, "zeros.csv", zeros.zeros_csv(runs))
    if "svg" in cfg.formats:
        _write(out, "zeros.svg", zeros.zeros_svg(runs))
    if "json" in cfg.formats:
        hist = zeros.histogram_from_runs(runs)
        _write(out, "zeros_summary.json", _dump({"config": cfg.to_dict(), "inside_disk": hist.summary(), "failures": failed}))
    if len(failed) > MAX_FAILURE_RATE * cfg.runs:
        print(f"root finding failed in {len(failed)} of {cfg.runs} runs", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def intensity_table(cfg: ExperimentConfig):
    """Rows (theta, r, g) with g = pi (1 - r^2)^2 rho_1(r e^{i theta})."""
    ev = CovarianceEvaluator(cfg.measure_obj)
    source = ev.truncated(cfg.N) if cfg.truncate else ev
    thetas = np.linspace(-math.pi, math.pi, int(cfg.thetas))
    rows = []
    for r in cfg.radii:
        for th in thetas:
            g = math.pi * (1 - r * r) ** 2 * corr.rho1_ek(source, r * np.exp(1j * th))
            rows.append((float(th), float(r), g))
    return rows


def _intensity_svg(rows, width=640, height=400):
    radii = sorted({r for _, r, _ in rows})
    gmax = max(1.0, max(g for *_, g in rows)) * 1.05
    palette = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

    def xy(th, g):
        return 40 + (th + math.pi) / (2 * math.pi) * (width - 60), height - 30 - g / gmax * (height - 50)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="40" y1="{height - 30}" x2="{width - 20}" y2="{height - 30}" stroke="black"/>',
        f'<line x1="40" y1="20" x2="40" y2="{height - 30}" stroke="black"/>',
    ]
    for i, r in enumerate(radii):
        pts = " ".join("{:.2f},{:.2f}".format(*xy(th, g)) for th, rr, g in rows if rr == r)
        color = palette[i % len(palette)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{width - 110}" y="{30 + 16 * i}" font-size="12" fill="{color}">r = {r:g}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_intensity(cfg: ExperimentConfig) -> int:
    rows = intensity_table(cfg)
    out = Path(cfg.output_dir)
    if "csv" in cfg.formats:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "r", "g"])
        for th, r, g in rows:
            w.writerow([repr(th), repr(r), repr(g)])
        _write(out, "intensity.csv", buf.getvalue())
    if "svg" in cfg.formats:
        _write(out, "intensity.svg", _intensity_svg(rows))
    if "json" in cfg.formats:
        _write(out, "intensity.json", _dump({"config": cfg.to_dict(), "rows": rows}))
    return EXIT_OK


def cmd_mc_counts(cfg: ExperimentConfig) -> int:
    runs = zeros.mc_zero_sets(build_sampler(cfg), cfg.N, cfg.runs, cfg.seed_base)
    hists = {region: zeros.histogram_from_runs(runs, region) for region in zeros.REGIONS}
    out = Path(cfg.output_dir)
    if "csv" in cfg.formats:
        for region, h in hists.items():
            _write(out, f"hist_{region}.csv", h.to_csv())
    summary = {
        "config": cfg.to_dict(),
        "regions": {region: h.summary() for region, h in hists.items()},
        "variance_ratio_left_over_right": hists["left"].variance / hists["right"].variance
        if hists["right"].variance > 0
        else None,
        "failures": _failures(runs),
    }
    _write(out, "summary.json", _dump(summary))
    if len(summary["failures"]) > MAX_FAILURE_RATE * cfg.runs:
        print(f"root finding failed in {len(summary['failures'])} of {cfg.runs} runs", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_verify(suite: str, stream=None) -> int:
    stream = stream or sys.stdout
    checks = suites.run_suite(suite)
    width = max(len(c.name) for c in checks)
    for c in checks:
        print(f"{'PASS' if c.ok else 'FAIL'}  {c.name:<{width}}  residual={c.residual:.3e}  tol={c.tol:.1e}", file=stream)
    failed = [c.name for c in checks if not c.ok]
    if failed:
        print(f"{len(failed)} check(s) failed: {', '.join(failed)}", file=stream)
        return EXIT_VERIFY
    print(f"all {len(checks)} checks passed", file=stream)
    return EXIT_OK


# ---------------------------------------------------------------------------


def _parser():
    p = argparse.ArgumentParser(prog="gafzeros", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("sample-zeros", "intensity", "mc-counts"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON experiment config")
        sp.add_argument("--seed", type=int, help="override seed_base")
        sp.add_argument("--out", help="override output_dir")
    sp = sub.add_parser("verify")
    sp.add_argument("suite", nargs="?", default="all", choices=("identities", "correlations", "kernels", "all"))
    return p


def load_config(path, seed=None, out=None) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    cfg = ExperimentConfig.from_json(text)
    if seed is not None:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "seed_base": seed})
    if out is not None:
        cfg.output_dir = out
    target = Path(cfg.output_dir)
    target.mkdir(parents=True, exist_ok=True)
    if not os.access(target, os.W_OK):
        raise ConfigError(f"output directory {target} is not writable")
    return cfg


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "verify":
        return cmd_verify(args.suite)
    try:
        cfg = load_config(args.config, args.seed, args.out)
        command = {"sample-zeros": cmd_sample_zeros, "intensity": cmd_intensity, "mc-counts": cmd_mc_counts}[args.command]
        return command(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InvalidArgumentError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
