"""Command line front end: ``hdqkd <rate|sweep|validate|quadrature|export-sdp>``.

Scenarios come from a flat ``key = value`` file (``#`` starts a comment);
command line flags override file values.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import validation
from .entropy import (
    SolverOptions,
    assemble_sdp,
    available_backends,
    export_sdp,
    gauss_radau,
)
from .keyrate import KeyRateResult, bbm92_noise, compute_rate, sweep
from .model import Protocol, ProtocolConfig, isotropic_time_state
from .noise import (
    DEFAULT_DARK_HZ,
    DEFAULT_ETA_D,
    DEFAULT_FRAME_S,
    DEFAULT_LOSS_DB,
    DEFAULT_PAIRS_PER_FRAME,
    NoiseParams,
    VisibilityError,
    loss_db_to_prob,
    loss_prob_to_db,
    visibility,
)
from .povm import click_probabilities, constraints_from_clicks, protocol_povms

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VALIDATION = 0, 1, 2, 3

CSV_COLUMNS = (
    "protocol", "d", "m", "frame_length_s", "pair_rate_hz", "dark_rate_hz", "solar_rate_hz",
    "loss_db", "eta_d", "v", "qber", "s_ae_lb_bits", "h_ab_bits", "rate_per_coincidence",
    "rate_per_second", "upper_bound_only", "status",
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    axis: str = "solar_rate"
    start: float = 0.0
    stop: float = 0.0
    points: int = 1
    log_scale: bool = True

    def grid(self) -> np.ndarray:
        if self.points < 1:
            raise ConfigError("sweep_points must be >= 1")
        if self.log_scale:
            if self.start <= 0 or self.stop <= 0:
                raise ConfigError("log-spaced sweeps need positive sweep_start and sweep_stop")
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class ScenarioConfig:
    protocol: str = ""
    d: int = 0
    frame_length_s: float = DEFAULT_FRAME_S
    pair_rate_hz: float | None = None  # None: 0.1 pairs per frame
    dark_rate_hz: float = DEFAULT_DARK_HZ
    solar_rate_hz: float = 0.0
    loss_db: float | None = None
    loss_prob: float | None = None
    eta_d: float = DEFAULT_ETA_D
    quadrature_m: int = 10
    sweep: SweepSpec | None = None
    seed: int = 0
    solver: str = "clarabel"
    solver_tol: float = 1e-8
    jobs: int = 1
    mc_frames: int = 10_000_000

    @property
    def loss_db_value(self) -> float:
        if self.loss_prob is not None:
            return loss_prob_to_db(self.loss_prob)
        return DEFAULT_LOSS_DB if self.loss_db is None else self.loss_db

    @property
    def pair_rate(self) -> float:
        if self.pair_rate_hz is None:
            return DEFAULT_PAIRS_PER_FRAME / self.frame_length_s
        return self.pair_rate_hz

    def noise(self) -> NoiseParams:
        p_loss = self.loss_prob if self.loss_prob is not None else loss_db_to_prob(self.loss_db_value)
        return NoiseParams(T=self.frame_length_s, lambda_p=self.pair_rate, lambda_d=self.dark_rate_hz,
                           lambda_e_B=self.solar_rate_hz, eta_D=self.eta_d, p_loss_B=p_loss)

    def solver_options(self) -> SolverOptions:
        return SolverOptions(backend=self.solver, tol=self.solver_tol)

    def protocol_config(self) -> ProtocolConfig:
        """The evaluated protocol; BBM92 runs at d = 2 (``d`` is the reference dimension)."""
        proto = Protocol(self.protocol)
        return ProtocolConfig(proto, 2 if proto is Protocol.BBM92 else self.d)

    def evaluated_noise(self) -> NoiseParams:
        noise = self.noise()
        if Protocol(self.protocol) is Protocol.BBM92:
            return bbm92_noise(noise, self.d)
        return noise


_FLOAT_KEYS = {"frame_length_s", "pair_rate_hz", "dark_rate_hz", "solar_rate_hz", "loss_db",
               "loss_prob", "eta_d", "solver_tol", "sweep_start", "sweep_stop"}
_INT_KEYS = {"d", "quadrature_m", "seed", "jobs", "mc_frames", "sweep_points"}
_STR_KEYS = {"protocol", "solver", "sweep_axis"}
_BOOL_KEYS = {"sweep_log_scale"}
_ALIASES = {"m": "quadrature_m"}
KNOWN_KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS | _BOOL_KEYS


def _convert(key: str, raw: str, where: str):
    try:
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _INT_KEYS:
            return int(raw)
        if key in _BOOL_KEYS:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return raw
    except ValueError:
        raise ConfigError(f"{where}: bad value {raw!r} for {key}") from None


def read_config_file(path: str | Path) -> dict:
    """Raw ``key -> value`` map from a config file, with line-aware diagnostics."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"{path}: no such config file")
    values: dict = {}
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        where = f"{path}:{lineno}: {line.strip()!r}"
        if "=" not in text:
            raise ConfigError(f"{where}: expected key = value")
        key, raw = (s.strip() for s in text.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{where}: {key} set twice")
        values[key] = _convert(key, raw, where)
    return values


def build_config(values: dict, require_scenario: bool = True) -> ScenarioConfig:
    """Validate merged values and fill defaults."""
    values = dict(values)
    if values.get("loss_db") is not None and values.get("loss_prob") is not None:
        raise ConfigError("loss_db and loss_prob are mutually exclusive; set only one")
    sweep_keys = {k: values.pop(k) for k in list(values) if k.startswith("sweep_")}
    spec = None
    if sweep_keys:
        axis = sweep_keys.get("sweep_axis", "solar_rate")
        if axis not in ("solar_rate", "loss_db"):
            raise ConfigError(f"sweep_axis must be solar_rate or loss_db, got {axis!r}")
        for k in ("sweep_start", "sweep_stop"):
            if k not in sweep_keys:
                raise ConfigError(f"sweep needs {k}")
        spec = SweepSpec(axis=axis, start=sweep_keys["sweep_start"], stop=sweep_keys["sweep_stop"],
                         points=sweep_keys.get("sweep_points", 5),
                         log_scale=sweep_keys.get("sweep_log_scale", axis == "solar_rate"))
        if spec.stop < spec.start:
            raise ConfigError("sweep_stop must not be below sweep_start")
    cfg = ScenarioConfig(**{k: v for k, v in values.items() if v is not None}, sweep=spec)

    if require_scenario:
        if not cfg.protocol:
            raise ConfigError("protocol is required (p1, p2 or bbm92)")
        if not cfg.d:
            raise ConfigError("d is required")
    if cfg.protocol and cfg.protocol not in {p.value for p in Protocol}:
        raise ConfigError(f"unknown protocol {cfg.protocol!r}")
    if cfg.d and (cfg.d < 2 or cfg.d % 2):
        raise ConfigError(f"d must be an even integer >= 2, got {cfg.d}")
    for name in ("frame_length_s",):
        if not getattr(cfg, name) > 0:
            raise ConfigError(f"{name} must be positive")
    for name in ("pair_rate_hz", "dark_rate_hz", "solar_rate_hz", "loss_db"):
        val = getattr(cfg, name)
        if val is not None and val < 0:
            raise ConfigError(f"{name} must be >= 0")
    if cfg.loss_prob is not None and not 0 <= cfg.loss_prob < 1:
        raise ConfigError("loss_prob must lie in [0, 1)")
    if not 0 <= cfg.eta_d <= 1:
        raise ConfigError("eta_d must lie in [0, 1]")
    if cfg.quadrature_m < 1:
        raise ConfigError("quadrature_m must be >= 1")
    if cfg.solver not in available_backends():
        raise ConfigError(f"unknown solver {cfg.solver!r}; have {available_backends()}")
    if cfg.jobs < 1:
        raise ConfigError("jobs must be >= 1")
    return cfg


def parse_config(path: str | Path | None, overrides: dict | None = None,
                 require_scenario: bool = True) -> ScenarioConfig:
    """Read ``path`` (optional), apply ``overrides`` and validate."""
    values = read_config_file(path) if path else {}
    for k, v in (overrides or {}).items():
        if v is None:
            continue
        if k in ("loss_db", "loss_prob"):
            values.pop("loss_db", None)
            values.pop("loss_prob", None)
        values[k] = v
    return build_config(values, require_scenario)


# -- output -------------------------------------------------------------------

def _num(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".9g")


def csv_row(res: KeyRateResult) -> dict:
    n = res.noise
    return {
        "protocol": res.protocol, "d": res.d, "m": res.m,
        "frame_length_s": _num(n.T), "pair_rate_hz": _num(n.lambda_p), "dark_rate_hz": _num(n.lambda_d),
        "solar_rate_hz": _num(n.lambda_e_B), "loss_db": _num(loss_prob_to_db(n.p_loss_B)),
        "eta_d": _num(n.eta_D), "v": _num(res.v), "qber": _num(res.qber),
        "s_ae_lb_bits": _num(res.s_ae_lb), "h_ab_bits": _num(res.h_ab),
        "rate_per_coincidence": _num(res.rate_per_coincidence),
        "rate_per_second": _num(res.rate_per_second),
        "upper_bound_only": _num(res.upper_bound_only), "status": res.status,
    }


def write_csv(rows: list[KeyRateResult], out) -> None:
    w = csv.DictWriter(out, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(csv_row(r))


def _open_out(path):
    return open(path, "w", newline="") if path else sys.stdout


# -- subcommands ----------------------------------------------------------------

def cmd_rate(cfg: ScenarioConfig, out: str | None) -> int:
    res = compute_rate(cfg.protocol_config(), cfg.evaluated_noise(), cfg.quadrature_m, cfg.solver_options())
    row = csv_row(res)
    width = max(len(k) for k in row)
    for k in ("rate_unclipped", "duality_gap"):
        row[k] = _num(getattr(res, k))
    for k, v in row.items():
        print(f"{k:<{width}}  {v}")
    if out:
        with _open_out(out) as fh:
            write_csv([res], fh)
    if not res.ok:
        print(f"solver failure: {res.message}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_sweep(cfg: ScenarioConfig, out: str | None) -> int:
    spec = cfg.sweep or SweepSpec(start=1e2, stop=1e6, points=5)
    grid = spec.grid()
    rows = sweep(cfg.protocol_config(), cfg.evaluated_noise(), spec.axis, grid, cfg.quadrature_m,
                 cfg.solver_options(), jobs=cfg.jobs)
    if out:
        with _open_out(out) as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)
    bad = [(x, r) for x, r in zip(grid, rows) if not r.ok]
    for x, r in bad:
        print(f"{spec.axis}={x:g}: {r.status} {r.message}", file=sys.stderr)
    return EXIT_SOLVER if bad else EXIT_OK


def cmd_validate(cfg: ScenarioConfig) -> int:
    checks = validation.run_all(cfg.noise(), seed=cfg.seed, m=cfg.quadrature_m,
                                n_frames=cfg.mc_frames, opts=cfg.solver_options())
    w = max(len(c.name) for c in checks)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.suite:<10}  {c.name:<{w}}  {c.detail}")
    n_fail = sum(not c.passed for c in checks)
    print(f"{len(checks) - n_fail}/{len(checks)} checks passed")
    return EXIT_VALIDATION if n_fail else EXIT_OK


def cmd_quadrature(cfg: ScenarioConfig) -> int:
    q = gauss_radau(cfg.quadrature_m)
    print(f"{'i':>3}  {'t_i':>20}  {'w_i':>20}  {'t_i (rational)':>16}  {'w_i (rational)':>16}")
    for i, (t, w) in enumerate(q, 1):
        tr = Fraction(float(t)).limit_denominator(1000)
        wr = Fraction(float(w)).limit_denominator(1000)
        print(f"{i:>3}  {t:>20.15f}  {w:>20.15f}  {tr!s:>16}  {wr!s:>16}")
    return EXIT_OK


def cmd_export(cfg: ScenarioConfig, out: str | None) -> int:
    pc = cfg.protocol_config()
    proto = Protocol.P1 if pc.protocol is Protocol.BBM92 else pc.protocol
    v = visibility(cfg.evaluated_noise(), pc.protocol)
    rho = isotropic_time_state(v, pc.d)
    cons = constraints_from_clicks(protocol_povms(proto, pc.d), click_probabilities(rho, pc.d, proto))
    problem = assemble_sdp(cons, pc.d, gauss_radau(cfg.quadrature_m))
    path = out or f"sdp_{pc.protocol.value}_d{pc.d}_m{cfg.quadrature_m}.json"
    export_sdp(problem, path)
    print(f"wrote {path} (v = {v:.9g}, {problem.conic.n_vars} variables, "
          f"{len(problem.conic.psd_dims)} PSD blocks of size {problem.conic.psd_dims[0]})")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hdqkd", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=["rate", "sweep", "validate", "quadrature", "export-sdp"])
    p.add_argument("--config", help="flat key = value scenario file")
    p.add_argument("--protocol", choices=[x.value for x in Protocol])
    p.add_argument("--d", type=int)
    p.add_argument("--m", type=int, help="Gauss-Radau node count (default 10)")
    p.add_argument("--solar-rate-hz", type=float)
    p.add_argument("--loss-db", type=float)
    p.add_argument("--out", help="output file (CSV, or JSON for export-sdp)")
    p.add_argument("--jobs", type=int)
    p.add_argument("--seed", type=int)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"protocol": args.protocol, "d": args.d, "quadrature_m": args.m,
                 "solar_rate_hz": args.solar_rate_hz, "loss_db": args.loss_db,
                 "jobs": args.jobs, "seed": args.seed}
    need_scenario = args.command in ("rate", "sweep", "export-sdp")
    try:
        cfg = parse_config(args.config, overrides, require_scenario=need_scenario)
        if args.command == "rate":
            return cmd_rate(cfg, args.out)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.out)
        if args.command == "validate":
            return cmd_validate(cfg)
        if args.command == "quadrature":
            return cmd_quadrature(cfg)
        return cmd_export(cfg, args.out)
    except (ConfigError, VisibilityError, ValueError) as exc:
        print(f"hdqkd: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
