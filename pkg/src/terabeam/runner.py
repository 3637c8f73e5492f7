"""Config loading, deterministic Monte-Carlo sweeps and CSV output."""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .channel import (
    AbsorptionTable,
    PowerProfile,
    SystemConfig,
    UserPath,
    available_window,
    gen_channel,
    load_config_table,
    path_loss_db,
    sample_users,
)
from .metrics import (
    array_gain_profile,
    beam_pattern,
    energy_efficiency,
    gain_matrices,
    sin_grid,
    sum_rate_curve,
)
from .precoders import SCHEMES, SingularChannelError, build_precoder

log = logging.getLogger(__name__)

SWEEP_KINDS = ("sumrate-sweep", "ee-sweep", "beampattern", "pathloss")
MULTIUSER_SCHEMES = tuple(s for s in SCHEMES if s != "analog")
DEFAULT_SNR_GRID = tuple(float(x) for x in range(-10, 21, 2))
DEFAULT_USER_GRID = (1, 2, 4, 8)
DEFAULT_OPERATING_SNR_DB = -10.0
MAX_RESAMPLE_FRACTION = 0.1
MAX_ATTEMPTS_PER_TRIAL = 1000
RESULT_COLUMNS = ("scheme", "sweep_value", "metric_mean", "metric_std", "n_trials", "n_resamples")

_POWER_KEYS = {
    "baseband_w": "p_baseband_w",
    "rf_chain_w": "p_rf_chain_w",
    "ps_w": "p_ps_w",
    "td_w": "p_td_w",
    "transmit_w": "p_transmit_w",
}
_SYSTEM_KEYS = tuple(f.name for f in fields(SystemConfig) if f.name != "power_profile")
_SPEC_KEYS = ("schemes", "snr_grid_db", "user_grid", "operating_snr_db")
CONFIG_KEYS = _SYSTEM_KEYS + _SPEC_KEYS + ("power",)


class ConfigError(ValueError):
    """Raised for unreadable or invalid configuration files."""


class ResampleBudgetError(RuntimeError):
    """Too many channel draws had to be discarded as singular."""


@dataclass(frozen=True)
class SweepSpec:
    kind: str = "sumrate-sweep"
    snr_grid_db: tuple[float, ...] = DEFAULT_SNR_GRID
    user_grid: tuple[int, ...] = DEFAULT_USER_GRID
    schemes: tuple[str, ...] = MULTIUSER_SCHEMES
    output_path: str | None = None
    operating_snr_db: float = DEFAULT_OPERATING_SNR_DB

    def __post_init__(self):
        if self.kind not in SWEEP_KINDS:
            raise ConfigError(f"kind: unknown sweep kind {self.kind!r}")
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad:
            raise ConfigError(f"schemes: unknown scheme(s) {bad}; expected names from {list(SCHEMES)}")
        if not self.schemes:
            raise ConfigError("schemes: must not be empty")
        if self.kind == "sumrate-sweep" and not self.snr_grid_db:
            raise ConfigError("snr_grid_db: must not be empty for a sum-rate sweep")
        if self.kind == "ee-sweep" and not self.user_grid:
            raise ConfigError("user_grid: must not be empty for an energy-efficiency sweep")
        if not all(math.isfinite(x) for x in self.snr_grid_db):
            raise ConfigError("snr_grid_db: values must be finite")
        if any(isinstance(k, bool) or not isinstance(k, int) or k < 1 for k in self.user_grid):
            raise ConfigError("user_grid: values must be positive integers")
        if not math.isfinite(self.operating_snr_db):
            raise ConfigError("operating_snr_db: must be finite")


@dataclass
class SweepResult:
    rows: list[tuple] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# configuration


def _parse_json(text: str, path) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        lines = text.splitlines()
        context = lines[exc.lineno - 1] if 0 < exc.lineno <= len(lines) else ""
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}\n    {context}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return doc


def config_from_dict(doc: dict, kind: str = "sumrate-sweep", output_path=None) -> tuple[SystemConfig, SweepSpec]:
    """Validate a config mapping and fill in defaults.

    ``n_rf`` defaults to ``n_users``.
    """
    unknown = sorted(set(doc) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    sys_kw = {k: doc[k] for k in _SYSTEM_KEYS if k in doc}
    if "n_rf" not in sys_kw and "n_users" in sys_kw:
        sys_kw["n_rf"] = sys_kw["n_users"]
    for k in ("carrier_hz", "bandwidth_hz", "window_threshold_db"):
        if k in sys_kw and isinstance(sys_kw[k], int) and not isinstance(sys_kw[k], bool):
            sys_kw[k] = float(sys_kw[k])
    if "apply_pathloss" in sys_kw and not isinstance(sys_kw["apply_pathloss"], bool):
        raise ConfigError("apply_pathloss: must be true or false")
    power = doc.get("power", {})
    if not isinstance(power, dict):
        raise ConfigError("power: must be an object")
    bad_power = sorted(set(power) - set(_POWER_KEYS))
    if bad_power:
        raise ConfigError(f"unknown power key(s): {', '.join('power.' + k for k in bad_power)}")
    try:
        profile = PowerProfile(**{_POWER_KEYS[k]: float(v) for k, v in power.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"power: {exc}") from exc
    try:
        config = SystemConfig(power_profile=profile, **sys_kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    spec_kw = {}
    for key in ("schemes", "snr_grid_db", "user_grid"):
        if key in doc:
            if not isinstance(doc[key], list):
                raise ConfigError(f"{key}: must be a list")
            spec_kw[key] = tuple(doc[key])
    if "snr_grid_db" in spec_kw:
        try:
            spec_kw["snr_grid_db"] = tuple(float(x) for x in spec_kw["snr_grid_db"])
        except (TypeError, ValueError):
            raise ConfigError("snr_grid_db: values must be numbers") from None
    if "operating_snr_db" in doc:
        spec_kw["operating_snr_db"] = float(doc["operating_snr_db"])
    spec = SweepSpec(kind=kind, output_path=None if output_path is None else str(output_path), **spec_kw)
    return config, spec


def load_config(path, kind: str = "sumrate-sweep", output_path=None) -> tuple[SystemConfig, SweepSpec]:
    """Read a JSON config file; missing keys take the full-size defaults."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(_parse_json(text, path), kind=kind, output_path=output_path)


def config_to_dict(config: SystemConfig, spec: SweepSpec | None = None) -> dict:
    """Inverse of :func:`config_from_dict`; the result loads back to an equal config."""
    doc = {k: getattr(config, k) for k in _SYSTEM_KEYS}
    doc["power"] = {k: getattr(config.power_profile, attr) for k, attr in _POWER_KEYS.items()}
    if spec is not None:
        doc["schemes"] = list(spec.schemes)
        doc["snr_grid_db"] = list(spec.snr_grid_db)
        doc["user_grid"] = list(spec.user_grid)
        doc["operating_snr_db"] = spec.operating_snr_db
    return doc


# ---------------------------------------------------------------------------
# Monte-Carlo machinery


def trial_rng(seed: int, *key: int) -> np.random.Generator:
    """Private stream for one trial, independent of execution order."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


def _check_schemes(config: SystemConfig, schemes: Sequence[str]):
    k, n = config.n_users, config.n_antennas
    for s in schemes:
        if s == "analog" and k != 1:
            raise ConfigError(f"analog beamforming serves one user; n_users is {k}")
        if s in ("hybrid-sub-ps", "hybrid-sub-td") and n % k:
            raise ConfigError(f"{s}: n_antennas ({n}) must be divisible by n_users ({k})")
        if s == "delay-phase" and (config.n_td_per_rf < 1 or n % config.n_td_per_rf):
            raise ConfigError(f"delay-phase: n_antennas ({n}) must be divisible by n_td_per_rf "
                              f"({config.n_td_per_rf})")
        if s != "digital" and s != "analog" and config.n_rf != k:
            raise ConfigError(f"{s}: hybrid schemes need n_rf == n_users, got {config.n_rf} and {k}")


def _paired_trial(config: SystemConfig, schemes: Sequence[str], rng: np.random.Generator, table):
    """Draw one channel realization and build every scheme on it.

    Draws for which any scheme's ZF stage is singular are discarded and
    redrawn from the same stream, so all schemes stay paired.
    """
    for attempt in range(MAX_ATTEMPTS_PER_TRIAL):
        users = sample_users(config, rng)
        channels = gen_channel(config, users, table)
        try:
            built = {s: build_precoder(s, channels, config.n_td_per_rf) for s in schemes}
        except SingularChannelError as exc:
            log.debug("discarding singular draw: %s", exc)
            continue
        return channels, built, attempt
    raise ResampleBudgetError(f"{MAX_ATTEMPTS_PER_TRIAL} consecutive singular draws in one trial")


def _run_trials(config: SystemConfig, schemes, snr_grid_db, threads: int, key_prefix=()):
    """Sum-rate per (trial, scheme, snr) plus resample counts, in trial order."""
    table = load_config_table(config) if config.apply_pathloss else None
    snrs = np.asarray(snr_grid_db, dtype=float)
    rates = np.empty((config.trials, len(schemes), snrs.size))
    resamples = np.zeros(config.trials, dtype=int)

    def work(t):
        rng = trial_rng(config.seed, *key_prefix, t)
        channels, built, n_bad = _paired_trial(config, schemes, rng, table)
        for i, s in enumerate(schemes):
            rates[t, i] = sum_rate_curve(gain_matrices(channels, built[s]), snrs)
        resamples[t] = n_bad
        return {s: built[s].hardware for s in schemes}

    if threads <= 1:
        hardware = [work(t) for t in range(config.trials)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            hardware = list(pool.map(work, range(config.trials)))
    total = int(resamples.sum())
    if total > MAX_RESAMPLE_FRACTION * config.trials:
        raise ResampleBudgetError(
            f"{total} singular channel draws over {config.trials} trials exceeds the "
            f"{MAX_RESAMPLE_FRACTION:.0%} budget; user angles are too often coincident")
    return rates, total, hardware[0]


def _metadata(config, spec, **extra) -> dict:
    meta = {
        "version": __version__,
        "kind": spec.kind,
        "seed": config.seed,
        "config": json.dumps(config_to_dict(config, spec), sort_keys=True),
    }
    meta.update(extra)
    return meta


def _stats(samples: np.ndarray) -> tuple[float, float]:
    return float(np.mean(samples)), float(np.std(samples))


def run_sumrate_sweep(config: SystemConfig, spec: SweepSpec, threads: int = 1) -> SweepResult:
    """Sum-rate against SNR for every scheme on shared channel draws."""
    schemes = list(spec.schemes)
    _check_schemes(config, schemes)
    start = time.perf_counter()
    rates, n_resamples, _ = _run_trials(config, schemes, spec.snr_grid_db, threads)
    rows = []
    for i, s in enumerate(schemes):
        for j, snr in enumerate(spec.snr_grid_db):
            mean, std = _stats(rates[:, i, j])
            rows.append((s, float(snr), mean, std, config.trials, n_resamples))
    meta = _metadata(config, spec, metric="sum_rate_bpshz", sweep_variable="snr_db")
    meta["wall_time_s"] = time.perf_counter() - start
    return SweepResult(rows, meta)


def run_ee_sweep(config: SystemConfig, spec: SweepSpec, threads: int = 1) -> SweepResult:
    """Energy efficiency against the number of users at ``spec.operating_snr_db``.

    The RF-chain count follows the user count at every grid point. Analog
    beamforming only contributes at ``K = 1``.
    """
    start = time.perf_counter()
    rows = []
    for k in spec.user_grid:
        cfg = replace(config, n_users=k, n_rf=k)
        schemes = [s for s in spec.schemes if s != "analog" or k == 1]
        if len(schemes) < len(spec.schemes):
            log.info("skipping analog beamforming at K=%d", k)
        _check_schemes(cfg, schemes)
        rates, n_resamples, hardware = _run_trials(cfg, schemes, [spec.operating_snr_db], threads, key_prefix=(k,))
        for i, s in enumerate(schemes):
            ee = np.array([energy_efficiency(r, hardware[s], cfg) for r in rates[:, i, 0]])
            mean, std = _stats(ee)
            rows.append((s, float(k), mean, std, cfg.trials, n_resamples))
    meta = _metadata(config, spec, metric="energy_efficiency_gbps_per_w", sweep_variable="n_users",
                     operating_snr_db=spec.operating_snr_db)
    meta["wall_time_s"] = time.perf_counter() - start
    return SweepResult(rows, meta)


def run_beampattern(config: SystemConfig, scheme: str, user: UserPath, grid_points: int = 8192) -> list[tuple]:
    """Beam pattern of a single-user precoder at every subcarrier.

    Returns rows ``(kind, freq_hz, sin_angle, magnitude)``: ``pattern`` rows
    hold the full grid, then per subcarrier one ``peak`` row (peak location
    and magnitude) and one ``user`` row (gain toward the true direction).
    """
    cfg = replace(config, n_users=1, n_rf=1)
    _check_schemes(cfg, [scheme])
    channels = gen_channel(cfg, [user])
    pre = build_precoder(scheme, channels, cfg.n_td_per_rf)
    grid = sin_grid(grid_points)
    gains = array_gain_profile(pre, user, cfg)
    pattern_rows, summary_rows = [], []
    for m, f in enumerate(channels.subcarrier_hz):
        pat = beam_pattern(pre.f_matrices[m, :, 0], f, cfg, grid_points)
        pattern_rows.extend(("pattern", float(f), float(s), float(v)) for s, v in zip(grid, pat))
        peak = int(np.argmax(pat))
        summary_rows.append(("peak", float(f), float(grid[peak]), float(pat[peak])))
        summary_rows.append(("user", float(f), user.sin_angle, float(gains[m])))
    return pattern_rows + summary_rows


def run_pathloss(config: SystemConfig, table: AbsorptionTable | str | Path | None,
                 distances: Sequence[float], step_hz: float = 1e9) -> list[tuple]:
    """Rows ``(freq_hz, distance_m, pathloss_db, in_window)`` over the table coverage."""
    if table is None:
        table = load_config_table(config)
    elif not isinstance(table, AbsorptionTable):
        table = AbsorptionTable.from_json(table)
    lo, hi = table.coverage
    n = int(round((hi - lo) / step_hz))
    freqs = lo + step_hz * np.arange(n + 1)
    freqs[-1] = min(freqs[-1], hi)
    rows = []
    for d in distances:
        windows = available_window(float(d), table, config.window_threshold_db)
        loss = path_loss_db(freqs, float(d), table)
        flags = np.zeros(freqs.size, dtype=int)
        for w_lo, w_hi in windows:
            flags[(freqs >= w_lo) & (freqs <= w_hi)] = 1
        rows.extend((float(f), float(d), float(p), int(b)) for f, p, b in zip(freqs, loss, flags))
    return rows


# ---------------------------------------------------------------------------
# CSV


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    return str(value)


def write_table(path, header: Sequence[str], rows, metadata: dict | None = None):
    """Write ``#`` metadata lines, a header and rows; floats get 9 significant digits."""
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            for key, value in (metadata or {}).items():
                fh.write(f"# {key}: {value}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def write_csv(result: SweepResult, path):
    """Write a sweep result.

    Wall time depends on the machine, so it goes to a ``<path>.meta.json``
    sidecar instead of the CSV; the CSV is then a pure function of config
    and seed.
    """
    meta = {k: v for k, v in result.metadata.items() if k != "wall_time_s"}
    write_table(path, RESULT_COLUMNS, result.rows, meta)
    sidecar = Path(str(path) + ".meta.json")
    try:
        sidecar.write_text(json.dumps(result.metadata, indent=2, sort_keys=True))
    except OSError as exc:
        raise OSError(f"cannot write {sidecar}: {exc}") from exc


def read_csv(path) -> tuple[dict, list[str], list[list[str]]]:
    """Read back ``(metadata, header, rows)`` from a file written by :func:`write_table`."""
    meta, lines = {}, []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("# "):
                key, _, value = line[2:].rstrip("\n").partition(": ")
                meta[key] = value
            else:
                lines.append(line)
    reader = csv.reader(lines)
    header = next(reader)
    return meta, header, list(reader)


def read_result(path) -> SweepResult:
    meta, header, rows = read_csv(path)
    if tuple(header) != RESULT_COLUMNS:
        raise ValueError(f"{path}: unexpected columns {header}")
    parsed = [(r[0], float(r[1]), float(r[2]), float(r[3]), int(r[4]), int(r[5])) for r in rows]
    return SweepResult(parsed, meta)


def result_table(result: SweepResult) -> dict[str, dict[float, tuple[float, float]]]:
    """``{scheme: {sweep_value: (mean, std)}}`` view of a result."""
    out: dict = {}
    for scheme, x, mean, std, *_ in result.rows:
        out.setdefault(scheme, {})[x] = (mean, std)
    return out


def snr_shift_db(result: SweepResult, reference: str, other: str, at_snr_db: float = 10.0) -> float:
    """Extra SNR ``other`` needs to reach the rate ``reference`` has at ``at_snr_db``.

    The other scheme's curve is linearly interpolated between grid points;
    raises if the target rate lies outside the swept range.
    """
    tab = result_table(result)
    ref = tab[reference]
    if at_snr_db not in ref:
        raise ValueError(f"{at_snr_db} dB is not on the SNR grid")
    target = ref[at_snr_db][0]
    snrs = np.array(sorted(tab[other]))
    curve = np.array([tab[other][s][0] for s in snrs])
    if not np.all(np.diff(curve) > 0):
        raise ValueError(f"{other} sum-rate is not increasing over the grid")
    if not curve[0] <= target <= curve[-1]:
        raise ValueError(f"{other} never reaches {target:.4g} bps/Hz on the swept grid")
    return float(np.interp(target, curve, snrs) - at_snr_db)
