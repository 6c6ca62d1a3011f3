"""Batch command line interface for the heat-wave transmission toolkit.

Usage::

    waveheat <subcommand> [--config run.toml] [--output-dir DIR] [--tag TAG]

Each subcommand reads the flat table of the same name from the TOML file
(all keys optional).  Artifacts are written as ``<subcommand>-<tag>.csv``
next to ``<subcommand>-<tag>-manifest.json``, which echoes every resolved
setting.  The default tag is a short hash of the resolved configuration, so
identical configurations write identical files.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
import typing
from dataclasses import dataclass
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import evolution, spectral
from .carleman import probe, select, symbols, weights
from .errors import ConfigError, NumericalError
from .generator import SystemState, assemble_generator
from .geometry import DomainConfig, build_grid

OUTPUT_ENV = "WAVEHEAT_OUTPUT_DIR"
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


# resolved configurations ------------------------------------------------------

@dataclass
class DomainOptions:
    length: float = 1.0
    gamma: float = 0.5
    n1: int = 50
    n2: int = 50
    coupling: str = "coupled"
    seed: int = 0

    def domain(self) -> DomainConfig:
        return DomainConfig(self.length, self.gamma, self.n1, self.n2)

    def check(self):
        self.domain().validate()
        _choice(self, "coupling", ("coupled", "decoupled"))


@dataclass
class SimulateConfig(DomainOptions):
    scheme: str = "implicit-euler"
    dt: float = 1e-3
    t_end: float = 1.0
    stride: int = 10
    initial: str = "bump"

    def check(self):
        super().check()
        _choice(self, "scheme", evolution.SCHEMES)
        _choice(self, "initial", ("bump", "random", "zero", "heat-mode"))
        _positive(self, "dt", "t_end", "stride")


@dataclass
class SpectrumConfig(DomainOptions):
    block: str = "all"
    tol: float = 1e-8

    def check(self):
        super().check()
        _choice(self, "block", ("all", "heat", "wave"))
        if self.block != "all" and self.coupling != "decoupled":
            raise ConfigError("block", "heat/wave blocks are invariant only with coupling = 'decoupled'")
        _positive(self, "tol")


@dataclass
class ResolventConfig(DomainOptions):
    mu_min: float = 1.0
    mu_max: float = 100.0
    count: int = 50
    method: str = "lanczos"
    workers: int = 1

    def check(self):
        super().check()
        _choice(self, "method", ("lanczos", "dense"))
        _positive(self, "mu_min", "count", "workers")
        if not self.mu_max > self.mu_min:
            raise ConfigError("mu_max", f"must exceed mu_min={self.mu_min!r}")
        if self.count < 2:
            raise ConfigError("count", "must be >= 2")


@dataclass
class WeightOptions:
    delta: float = 1.0
    alpha: float = 1.0
    M: typing.Optional[float] = None  # None: choose beta automatically
    seed: int = 0

    def check(self):
        weights.WeightConfig(self.delta, self.alpha, self.M if self.M is not None else 1.0)


@dataclass
class CarlemanCheckConfig(WeightOptions):
    interface_samples: int = 1000
    region_samples: int = 10000
    zero_band: float = 1e-6
    char_tol: float = 1e-3
    bracket_floor: float = 1e-2

    def check(self):
        super().check()
        _positive(self, "interface_samples", "region_samples", "zero_band", "char_tol",
                  "bracket_floor")


@dataclass
class ClassifyConfig(WeightOptions):
    samples: int = 1000
    zero_band: float = 1e-6
    xi_scale: float = 4.0
    interface: bool = False

    def check(self):
        super().check()
        _positive(self, "samples", "zero_band", "xi_scale")


@dataclass
class ProbeConfig(WeightOptions):
    a: float = 0.25
    b: float = 0.25
    nx: int = 128
    ny: int = 129
    bumps: int = 20
    mu0: float = 1.0
    mu_count: int = 10

    def check(self):
        super().check()
        probe.Grid2D(self.a, self.b, self.nx, self.ny)
        _positive(self, "bumps", "mu0", "mu_count")


CONFIGS = {
    "simulate": SimulateConfig,
    "spectrum": SpectrumConfig,
    "resolvent": ResolventConfig,
    "carleman-check": CarlemanCheckConfig,
    "classify": ClassifyConfig,
    "probe": ProbeConfig,
}


def _choice(cfg, name, allowed):
    if getattr(cfg, name) not in allowed:
        raise ConfigError(name, f"must be one of {list(allowed)}, got {getattr(cfg, name)!r}")


def _positive(cfg, *names):
    for name in names:
        if not getattr(cfg, name) > 0:
            raise ConfigError(name, f"must be positive, got {getattr(cfg, name)!r}")


def _coerce(name, value, hint):
    base = [t for t in typing.get_args(hint) if t is not type(None)] or [hint]
    target = base[0]
    if value is None:
        return None
    if target is bool:
        if not isinstance(value, bool):
            raise ConfigError(name, f"expected a boolean, got {value!r}")
        return value
    if target is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(name, f"expected an integer, got {value!r}")
        return value
    if target is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(name, f"expected a number, got {value!r}")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(name, f"expected a string, got {value!r}")
    return value


def resolve_config(subcommand: str, table: dict | None = None):
    """Fill defaults, type-check and validate one subcommand table."""
    cls = CONFIGS[subcommand]
    table = dict(table or {})
    hints = typing.get_type_hints(cls)
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(table) - known)
    if unknown:
        raise ConfigError(unknown[0], f"unknown key for [{subcommand}]")
    cfg = cls(**{k: _coerce(k, v, hints[k]) for k, v in table.items()})
    cfg.check()
    return cfg


def load_table(path, subcommand: str) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"invalid TOML: {exc}") from exc
    table = data.get(subcommand, {})
    if not isinstance(table, dict):
        raise ConfigError(subcommand, "must be a table")
    return table


def config_tag(subcommand: str, cfg) -> str:
    blob = json.dumps({"subcommand": subcommand, **dataclasses.asdict(cfg)}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


# subcommands --------------------------------------------------------------------

def _generator(cfg: DomainOptions):
    return assemble_generator(build_grid(cfg.domain()), coupling=cfg.coupling)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x) if np.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def run_simulate(cfg: SimulateConfig, stem: Path):
    g = _generator(cfg)
    rng = np.random.default_rng(cfg.seed)
    if cfg.initial == "bump":
        s0 = evolution.bump_state(g)
    elif cfg.initial == "random":
        s0 = evolution.random_state(g, rng)
    elif cfg.initial == "heat-mode":
        s0 = evolution.heat_mode_state(g, 1)
    else:
        s0 = SystemState.zeros(g.layout)
    trace = evolution.simulate(g, s0, cfg.t_end, cfg.dt, cfg.scheme, cfg.stride)
    path = stem.with_suffix(".csv")
    trace.to_csv(path)
    fits = {}
    for model in ("logarithmic", "polynomial"):
        try:
            fits[model] = evolution.fit_decay(trace, model).as_dict()
        except ValueError as exc:
            fits[model] = {"skipped": str(exc)}
    e = trace.energies
    results = {"steps": int(round(cfg.t_end / cfg.dt)), "E0": e[0], "E_final": e[-1],
               "monotone": bool(np.all(np.diff(e) <= 0)),
               "max_abs_balance_residual": float(np.abs(trace.balance_residual).max()),
               "fits": fits}
    return [path], results


def run_spectrum(cfg: SpectrumConfig, stem: Path):
    g = _generator(cfg)
    block = None
    if cfg.block != "all":
        heat, v, w = g.block_slices()
        block = heat if cfg.block == "heat" else slice(v.start, w.stop)
    rep = spectral.eigenvalues(g, tol=cfg.tol, block=block)
    path = stem.with_suffix(".csv")
    rep.to_csv(path)
    results = {"count": int(rep.eigenvalues.size), "max_real": rep.max_real,
               "max_residual": rep.max_residual, "dissipative": rep.dissipative,
               "residuals_ok": rep.residuals_ok}
    return [path], results


def run_resolvent(cfg: ResolventConfig, stem: Path):
    g = _generator(cfg)
    sw = spectral.resolvent_sweep(g, cfg.mu_min, cfg.mu_max, cfg.count, cfg.method, cfg.workers)
    path = stem.with_suffix(".csv")
    fit_path = stem.with_name(stem.name + "-fit.json")
    sw.to_csv(path)
    sw.write_fit_json(fit_path)
    return [path, fit_path], sw.fit_summary()


def _weight(cfg: WeightOptions, extra: dict):
    if cfg.M is not None:
        return weights.WeightConfig(cfg.delta, cfg.alpha, cfg.M)
    choice = select.choose_weight(cfg.delta, cfg.alpha)
    cfg.M = choice.weight.M
    extra["beta_selection"] = choice.summary()
    return choice.weight


def run_carleman_check(cfg: CarlemanCheckConfig, stem: Path):
    results = {}
    wc = _weight(cfg, results)
    rng = np.random.default_rng(cfg.seed)
    xi = np.linspace(-0.25, 0.25, cfg.interface_samples)
    h1 = weights.check_h1(wc, xi)
    path = stem.with_suffix(".csv")
    h1.to_csv(path)
    results["h1"] = h1.summary()
    results["h2"] = select.h2_on_compact(wc, select.CompactSet(), cfg.bracket_floor,
                                         cfg.char_tol)
    roots = {}
    for j in (1, 2):
        for region in (symbols.E_PLUS, symbols.ZERO, symbols.E_MINUS):
            pt = symbols.sample_region(wc, rng, cfg.region_samples, region, j)
            rep = symbols.check_root_signs(wc, pt, j, zero_band=cfg.zero_band)
            roots[f"j{j}_{region}"] = {
                "samples": cfg.region_samples,
                "label_mismatch": int((rep.labels != region).sum()),
                "disagreements": rep.n_disagree,
                "branch_agreement": bool(rep.branch_agree.all()),
                "max_root_residual": float(symbols.root_residual(wc, pt, j).max()),
            }
    results["root_signs"] = roots
    ipt = symbols.sample_points(rng, cfg.region_samples, wc=wc, interface=True)
    ids = symbols.interface_identities(wc, ipt)
    lab1 = symbols.classify_region(wc, ipt, 1, cfg.zero_band)
    lab2 = symbols.classify_region(wc, ipt, 2, cfg.zero_band)
    contain = ~(ids.gap_gt_one & (lab1 == symbols.E_PLUS)) | (lab2 == symbols.E_PLUS)
    results["interface"] = {"samples": cfg.region_samples,
                            "max_gap_err": float(ids.gap_err.max()),
                            "gap_implies_order": bool(ids.gap_implies_order.all()),
                            "containment": bool(contain.all())}
    return [path], results


def run_classify(cfg: ClassifyConfig, stem: Path):
    results = {}
    wc = _weight(cfg, results)
    rng = np.random.default_rng(cfg.seed)
    pt = symbols.sample_points(rng, cfg.samples, xi_scale=cfg.xi_scale, wc=wc,
                               interface=cfg.interface)
    path = stem.with_suffix(".csv")
    symbols.write_region_map(path, wc, pt, cfg.zero_band)
    for j in (1, 2):
        lab = symbols.classify_region(wc, pt, j, cfg.zero_band)
        results[f"j{j}"] = {r: int((lab == r).sum())
                            for r in (symbols.E_PLUS, symbols.ZERO, symbols.E_MINUS)}
    return [path], results


def run_probe(cfg: ProbeConfig, stem: Path):
    results = {}
    wc = _weight(cfg, results)
    grid = probe.Grid2D(cfg.a, cfg.b, cfg.nx, cfg.ny)
    rng = np.random.default_rng(cfg.seed)
    fields = [probe.bump_field(grid, [p], [q]) for p, q in probe.random_bumps(rng, grid, cfg.bumps)]
    mus = np.geomspace(cfg.mu0, 10 * cfg.mu0, cfg.mu_count)
    sw = probe.probe_sweep(grid, wc, fields, mus)
    path = stem.with_suffix(".csv")
    sw.to_csv(path)
    r = sw.ratio
    results.update({"min_ratio": sw.min_ratio, "max_ratio": float(np.nanmax(r)),
                    "min_ratio_per_bump": [float(v) for v in np.nanmin(r, axis=1)]})
    return [path], results


RUNNERS = {
    "simulate": run_simulate,
    "spectrum": run_spectrum,
    "resolvent": run_resolvent,
    "carleman-check": run_carleman_check,
    "classify": run_classify,
    "probe": run_probe,
}


def run(subcommand: str, cfg, output_dir, tag: str | None = None) -> dict:
    """Execute a resolved configuration and write its artifacts and manifest."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    tag = tag or config_tag(subcommand, cfg)
    stem = out / f"{subcommand}-{tag}"
    artifacts, results = RUNNERS[subcommand](cfg, stem)
    manifest_path = stem.with_name(stem.name + "-manifest.json")
    manifest = {"subcommand": subcommand, "tag": tag, "config": dataclasses.asdict(cfg),
                "artifacts": [p.name for p in artifacts] + [manifest_path.name],
                "results": _jsonable(results)}
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="waveheat", description=__doc__.splitlines()[0])
    p.add_argument("subcommand", choices=sorted(CONFIGS))
    p.add_argument("--config", default=None, help="TOML file; the [<subcommand>] table is used")
    p.add_argument("--output-dir", default=None,
                   help=f"artifact directory (default ${OUTPUT_ENV} or the working directory)")
    p.add_argument("--tag", default=None, help="artifact name tag (default: config hash)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = args.output_dir or os.environ.get(OUTPUT_ENV) or "."
    try:
        cfg = resolve_config(args.subcommand, load_table(args.config, args.subcommand))
        manifest = run(args.subcommand, cfg, out, args.tag)
    except ConfigError as exc:
        print(f"error: kind=config field={exc.field} message={exc.message}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"error: kind=numerical operation={exc.operation} message={exc.message}",
              file=sys.stderr)
        return EXIT_NUMERICAL
    for name in manifest["artifacts"]:
        print(Path(out) / name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
