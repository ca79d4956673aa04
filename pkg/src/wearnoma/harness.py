"""
Seeded Monte-Carlo campaigns.

Every drop owns a random stream derived from ``(master_seed, drop_index,
attempt)``, so drops can be evaluated in any order or in parallel and every
scheme or sweep value sees the same topologies and fades.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .allocation import NOMA, OMA, allocate
from .beamforming import IllConditionedError, build_plan, effective_gains
from .channel import sample_channels
from .linkmetrics import DropMetrics, d2d_interference, drop_metrics
from .scenario import ScenarioConfig, config_from_dict, sample_topology, validate_config

__all__ = [
    "SCHEMES",
    "DropError",
    "CampaignError",
    "SchemeStats",
    "SweepPoint",
    "AggregateReport",
    "drop_streams",
    "run_drop",
    "run_drop_schemes",
    "run_campaign",
    "ccdf",
    "latency_thresholds",
    "emit_report",
    "load_report",
    "CSV_COLUMNS",
]

log = logging.getLogger(__name__)

SCHEMES = {
    "NOMA+D2D": (NOMA, True),
    "OMA+D2D": (OMA, True),
    "NOMA": (NOMA, False),
    "OMA": (OMA, False),
}
MAX_RETRIES = 100
REFERENCE_SCHEME = "NOMA+D2D"

CSV_COLUMNS = ["scheme", "sweep_name", "sweep_value", "mean_sum_se", "std_sum_se",
               "mean_cwd_se", "mean_dwd_se", "pct_normalized", "outage_rate",
               "connectivity", "drops"]


class DropError(RuntimeError):
    """A drop could not be completed within the retry bound."""

    def __init__(self, drop_index, attempts, last_condition):
        self.drop_index = drop_index
        self.attempts = attempts
        self.last_condition = last_condition
        super().__init__(
            f"drop {drop_index}: head channels ill-conditioned on all {attempts} attempts "
            f"(last condition number {last_condition:.3g})")


class CampaignError(RuntimeError):
    """A campaign aborted; ``partial`` holds the sweep points already completed."""

    def __init__(self, message, partial):
        self.partial = partial
        super().__init__(message)


def drop_streams(master_seed: int, drop_index: int, attempt: int = 0):
    """Independent topology and channel generators of one drop attempt."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(drop_index, attempt))
    return tuple(np.random.Generator(np.random.PCG64(s)) for s in ss.spawn(2))


def _check_schemes(schemes):
    unknown = [s for s in schemes if s not in SCHEMES]
    if unknown:
        raise ValueError(f"unknown scheme(s) {unknown}; choose from {list(SCHEMES)}")


def run_drop_schemes(cfg: ScenarioConfig, schemes, drop_index: int):
    """Evaluate one drop under several schemes on the same realization.

    Gives a drop whose head channels are ill-conditioned a fresh stream, up
    to 100 times.

    Returns
    -------
    dict
        Scheme name to DropMetrics.
    """
    _check_schemes(schemes)
    cond = float("nan")
    for attempt in range(MAX_RETRIES):
        topo_rng, chan_rng = drop_streams(cfg.master_seed, drop_index, attempt)
        topology = sample_topology(cfg, topo_rng)
        channels = sample_channels(topology, cfg, chan_rng)
        try:
            plan = build_plan(channels, cfg)
        except IllConditionedError as exc:
            cond = exc.condition
            log.debug("drop %d attempt %d resampled: %s", drop_index, attempt, exc)
            continue
        out = {}
        for name in schemes:
            access, d2d = SCHEMES[name]
            gains, ordered = effective_gains(
                channels, plan, d2d_interference(channels, cfg, d2d), cfg)
            allocation = allocate(gains, cfg.per_beam_power, cfg.min_rate_Rmin, access)
            m = drop_metrics(ordered, allocation, channels, cfg, d2d)
            out[name] = dataclasses.replace(m, scheme=name, resampled=attempt)
        return out
    raise DropError(drop_index, MAX_RETRIES, cond)


def run_drop(cfg: ScenarioConfig, scheme: str, drop_index: int) -> DropMetrics:
    """Run the full pipeline of one drop for one scheme."""
    return run_drop_schemes(cfg, [scheme], drop_index)[scheme]


def ccdf(samples, thresholds):
    """Empirical ``P(X > t)`` for every threshold `t`.

    Raises
    ------
    ValueError
        If `samples` is empty or holds non-finite values.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size == 0:
        raise ValueError("ccdf of an empty sample")
    if not np.all(np.isfinite(x)):
        raise ValueError("ccdf samples must be finite")
    t = np.asarray(thresholds, dtype=float)
    return 1.0 - np.searchsorted(x, t, side="right") / x.size


def latency_thresholds(cfg: ScenarioConfig, points_per_decade: int = 10):
    """Log grid spanning 1/100 to 1000 times the delay at 1 bit/s/Hz."""
    base = cfg.packet_bits_L / cfg.bandwidth_B
    return base * np.logspace(-2, 3, 5 * points_per_decade + 1)


@dataclass
class SchemeStats:
    scheme: str
    mean_sum_se: float
    std_sum_se: float
    mean_cwd_se: float
    std_cwd_se: float
    mean_dwd_se: float
    std_dwd_se: float
    pct_normalized: float
    outage_rate: float
    connectivity: int
    drops: int
    resampled: int
    infeasible_beam_rate: float
    median_latency: float
    ccdf_at_reference: float
    ccdf: list = field(default_factory=list)   # [threshold_s, probability] pairs


@dataclass
class SweepPoint:
    sweep_value: float
    # Pooled median latency over every scheme at this point; the CCDFs
    # are compared there.
    reference_threshold: float
    schemes: dict = field(default_factory=dict)


@dataclass
class AggregateReport:
    master_seed: int
    sweep_name: str
    schemes: list
    points: list
    config: dict
    normalization: str
    latency_model: str = "transmission delay of one packet, L / (B * SE)"

    def stats(self, scheme, sweep_value=None):
        for point in self.points:
            if sweep_value is None or point.sweep_value == sweep_value:
                return point.schemes[scheme]
        raise KeyError(sweep_value)

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data["points"] = [
            SweepPoint(sweep_value=p["sweep_value"],
                       reference_threshold=p["reference_threshold"],
                       schemes={k: SchemeStats(**v) for k, v in p["schemes"].items()})
            for p in data["points"]]
        return cls(**data)


def _run_chunk(args):
    cfg, schemes, indices = args
    return [run_drop_schemes(cfg, schemes, i) for i in indices]


def _run_drops(cfg, schemes, workers):
    indices = list(range(cfg.drops_N))
    if workers <= 1:
        return _run_chunk((cfg, schemes, indices))
    size = max(1, math.ceil(len(indices) / (4 * workers)))
    chunks = [(cfg, schemes, indices[i:i + size]) for i in range(0, len(indices), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves chunk order, so results stay in drop-index order.
        return [r for chunk in pool.map(_run_chunk, chunks) for r in chunk]


def _summarize(name, drops, thresholds, reference):
    total = np.array([m.sum_se_total for m in drops])
    cwd = np.array([m.sum_se_cwd for m in drops])
    dwd = np.array([m.sum_se_dwd for m in drops])
    lat = np.concatenate([m.latencies for m in drops])
    finite = lat[np.isfinite(lat)]
    n_beams = sum(len(m.cwd_se) for m in drops)
    curve = ccdf(finite, thresholds) if finite.size else np.zeros(len(thresholds))
    return SchemeStats(
        scheme=name,
        mean_sum_se=float(total.mean()),
        std_sum_se=float(total.std()),
        mean_cwd_se=float(cwd.mean()),
        std_cwd_se=float(cwd.std()),
        mean_dwd_se=float(dwd.mean()),
        std_dwd_se=float(dwd.std()),
        pct_normalized=float("nan"),
        outage_rate=float(sum(m.outage_count for m in drops) / lat.size) if lat.size else 0.0,
        connectivity=int(drops[0].connectivity),
        drops=len(drops),
        resampled=int(sum(m.resampled for m in drops)),
        infeasible_beam_rate=float(sum(m.infeasible_beams for m in drops)) / max(n_beams, 1),
        median_latency=float(np.median(finite)) if finite.size else float("inf"),
        ccdf_at_reference=float(ccdf(finite, [reference])[0]) if finite.size else 0.0,
        ccdf=[[float(t), float(p)] for t, p in zip(thresholds, curve)],
    )


def _cast_sweep(cfg, name, value):
    current = getattr(cfg, name)
    if isinstance(current, int) and not isinstance(current, bool):
        if float(value) != int(value):
            raise ValueError(f"sweep value {value!r} is not an integer for {name}")
        return int(value)
    return float(value)


def run_campaign(cfg: ScenarioConfig, schemes=("NOMA+D2D", "OMA+D2D"),
                 sweep=None, workers: int = 1, keep_drops: bool = False):
    """Run ``drops_N`` paired drops per scheme and sweep value.

    Parameters
    ----------
    cfg : ScenarioConfig
    schemes : sequence of str
        Names from `SCHEMES`.
    sweep : (str, sequence) or None
        Config field name and the values it takes. None runs `cfg` as is.
    workers : int
        Worker processes; results are identical for any count.
    keep_drops : bool
        Also return the per-drop metrics, as ``{sweep_value: {scheme: [...]}}``.

    Returns
    -------
    AggregateReport, or (AggregateReport, dict) with `keep_drops`.
    """
    schemes = list(schemes)
    _check_schemes(schemes)
    validate_config(cfg)
    if sweep is None:
        sweep_name, values = "none", [0]
    else:
        sweep_name, values = sweep[0], list(sweep[1])
        if sweep_name not in cfg.to_dict():
            raise ValueError(f"unknown sweep parameter {sweep_name!r}")

    points, kept = [], {}
    if sweep is not None:
        values = [_cast_sweep(cfg, sweep_name, v) for v in values]
    for value in values:
        point_cfg = cfg if sweep is None else validate_config(
            cfg.replace(**{sweep_name: value}))
        try:
            results = _run_drops(point_cfg, schemes, workers)
        except DropError as exc:
            raise CampaignError(f"campaign aborted at {sweep_name}={value}: {exc}",
                                partial=points) from exc
        per_scheme = {s: [r[s] for r in results] for s in schemes}
        lat = np.concatenate([m.latencies for s in schemes for m in per_scheme[s]])
        lat = lat[np.isfinite(lat)]
        reference = float(np.median(lat)) if lat.size else float("inf")
        thresholds = latency_thresholds(point_cfg)
        point = SweepPoint(sweep_value=value, reference_threshold=reference)
        for s in schemes:
            point.schemes[s] = _summarize(s, per_scheme[s], thresholds, reference)
        points.append(point)
        if keep_drops:
            kept[value] = per_scheme

    ref_scheme = REFERENCE_SCHEME if REFERENCE_SCHEME in schemes else schemes[0]
    ref_mean = points[-1].schemes[ref_scheme].mean_sum_se
    for point in points:
        for st in point.schemes.values():
            st.pct_normalized = 100.0 * st.mean_sum_se / ref_mean
    report = AggregateReport(
        master_seed=cfg.master_seed,
        sweep_name=sweep_name,
        schemes=schemes,
        points=points,
        config=cfg.to_dict(),
        normalization=(f"pct_normalized = 100 * mean_sum_se / mean_sum_se of {ref_scheme} "
                       f"at {sweep_name}={values[-1]}"),
    )
    return (report, kept) if keep_drops else report


def _fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".9g")


def _slug(scheme):
    return scheme.replace("+", "-")


def emit_report(report: AggregateReport, out_path, fmt: str = "csv"):
    """Write `report` under directory `out_path`.

    ``csv`` writes ``summary.csv`` (one row per scheme and sweep value, in
    `CSV_COLUMNS` order), one ``ccdf_<scheme>_<sweep>=<value>.csv`` per row
    and ``summary_meta.json`` with the percentage normalization and seed.
    ``json`` writes ``report.json`` with the config echo and seed.

    Returns
    -------
    list of Path
        Every file written.
    """
    out = Path(out_path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot write report to {out}: {exc}") from exc
    written = []
    if fmt == "json":
        path = out / "report.json"
        path.write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
        return [path]
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")

    meta = out / "summary_meta.json"
    meta.write_text(json.dumps({
        "normalization": report.normalization,
        "latency_model": report.latency_model,
        "master_seed": report.master_seed,
        "columns": CSV_COLUMNS,
        "config": report.config,
    }, indent=2) + "\n", encoding="utf-8")
    written.append(meta)
    summary = out / "summary.csv"
    with open(summary, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for point in report.points:
            for name in report.schemes:
                st = point.schemes[name]
                writer.writerow([_fmt(v) for v in (
                    name, report.sweep_name, point.sweep_value, st.mean_sum_se,
                    st.std_sum_se, st.mean_cwd_se, st.mean_dwd_se, st.pct_normalized,
                    st.outage_rate, st.connectivity, st.drops)])
    written.append(summary)
    for point in report.points:
        for name in report.schemes:
            path = out / f"ccdf_{_slug(name)}_{report.sweep_name}={_fmt(point.sweep_value)}.csv"
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["threshold_s", "probability"])
                for t, p in point.schemes[name].ccdf:
                    writer.writerow([_fmt(t), _fmt(p)])
            written.append(path)
    return written


def load_report(path) -> AggregateReport:
    """Reload a report written with ``fmt='json'``."""
    path = Path(path)
    if path.is_dir():
        path = path / "report.json"
    return AggregateReport.from_dict(json.loads(path.read_text(encoding="utf-8")))


def config_of(report: AggregateReport) -> ScenarioConfig:
    return config_from_dict(report.config)
