"""Batch orchestration: tail-probability sweeps and end-to-end recovery runs.

A sweep walks a grid of (edge count, RIP constant, stop time,
deployment), computing the searched worst-case tail of the deployment's
measurement matrix and the matched i.i.d. Gaussian baseline at the same
measurement count.  Every record's randomness is derived from the
master seed and the record key, so grid points can be computed in any
order (or concurrently) without changing results, partially written
output can be resumed, and a finished output file is byte-identical
across runs.
"""

from __future__ import annotations

import configparser
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .coding import (QuantizerSpec, calibrate_dynamic_range, draw_coefficients,
                     gateway_selector, run_qnc, transfer_matrix)
from .errors import ConfigError
from .network import DeploymentConfig, NetworkGraph, generate_deployment
from .recovery import (RecoveryMetrics, RecoveryProblem, generate_sparse_message,
                       l1_min_decode, random_orthonormal_basis, recovery_report)
from .rip import min_rank_limited_tail, rip_probability_bound, worst_case_tail_gram
from .tail import gaussian_tail

_DEPLOY_TAG = 0xD0
_COEFF_TAG = 0xC0
_SEARCH_TAG = 0x5E
_TARGET_GRID = (1e-1, 1e-2, 1e-3)


def derive_seed(master: int, *key: int) -> int:
    """Stable per-record seed from the master seed and a record key."""
    ss = np.random.SeedSequence([int(master), *[int(k) & 0xFFFFFFFF for k in key]])
    return int(ss.generate_state(1)[0])


def _delta_key(delta: float) -> int:
    return int(round(delta * 1e9))


@dataclass(frozen=True)
class SweepConfig:
    """Grid definition for a tail-probability sweep."""

    node_count: int
    edge_counts: tuple[int, ...]
    deltas: tuple[float, ...]
    stop_times: tuple[int, ...]
    deployments: int
    search_budget: int = 512
    seed: int = 0
    output: str | None = None
    workers: int = 1
    capacity: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "edge_counts", tuple(int(e) for e in self.edge_counts))
        object.__setattr__(self, "deltas", tuple(float(d) for d in self.deltas))
        object.__setattr__(self, "stop_times", tuple(int(t) for t in self.stop_times))
        if not self.edge_counts or not self.deltas or not self.stop_times:
            raise ConfigError("edge_counts, deltas, and stop_times must be nonempty")
        if any(not 0.0 < d < 1.0 for d in self.deltas):
            raise ConfigError("every delta must lie in (0, 1)")
        if any(t < 2 for t in self.stop_times):
            raise ConfigError("stop times start at 2")
        if self.deployments < 1 or self.search_budget < 1 or self.workers < 1:
            raise ConfigError("deployments, search_budget, workers must be positive")


@dataclass(frozen=True)
class SweepRecord:
    """One grid point; wall_time is informational and never written."""

    edge_count: int
    delta: float
    stop_time: int
    deployment: int
    m: int
    p_tail_qnc: float
    p_tail_gauss: float
    wall_time: float = 0.0

    @property
    def key(self) -> tuple:
        return (self.edge_count, _delta_key(self.delta), self.stop_time, self.deployment)


@dataclass(frozen=True)
class SweepSummary:
    """Per-(edge count, delta, stop time) aggregate across deployments."""

    edge_count: int
    delta: float
    stop_time: int
    mean_m: float
    geomean_p_qnc: float
    mean_p_qnc: float
    geomean_p_gauss: float
    mean_p_gauss: float


class TailCurveEvaluator:
    """Lazily extends one deployment's mixing operator over stop times.

    Transfer matrices are regenerated from their per-step seeds, so the
    Gram of the mixing operator at any stop time can be replayed from
    the nearest cached snapshot; probing stop times out of order stays
    cheap during bisection.
    """

    def __init__(self, graph: NetworkGraph, coeff_seed: int, *, redraw: bool = True):
        self.graph = graph
        self.coeff_seed = coeff_seed
        self.redraw = redraw
        self.selector = gateway_selector(graph)
        self.arity = self.selector.shape[0]
        gram0 = self.selector.T @ self.selector
        fro0 = float((self.selector ** 2).sum())
        prod0 = np.eye(graph.edge_count)
        self._snaps: dict[int, tuple[np.ndarray, np.ndarray, float]] = {
            2: (gram0, prod0, fro0)
        }

    def measurements(self, stop_time: int) -> int:
        return (stop_time - 1) * self.arity

    def stop_time_for(self, measurements: int) -> int:
        return max(2, math.ceil(measurements / self.arity) + 1)

    def gram(self, stop_time: int) -> tuple[np.ndarray, float]:
        """Mixing Gram and calibrated injection variance at a stop time."""
        if stop_time < 2:
            raise ConfigError("stop time must be at least 2")
        if stop_time not in self._snaps:
            base = max(t for t in self._snaps if t <= stop_time)
            gram, prod, fro2 = self._snaps[base]
            gram, prod = gram.copy(), prod.copy()
            for t in range(base + 1, stop_time + 1):
                f = transfer_matrix(self.graph, t, self.coeff_seed, redraw=self.redraw)
                prod = f @ prod
                block = self.selector @ prod
                gram += block.T @ block
                fro2 += float((block ** 2).sum())
            self._snaps[stop_time] = (gram, prod, fro2)
        gram, _, fro2 = self._snaps[stop_time]
        return gram, self.graph.node_count / fro2

    def worst_tail(self, stop_time: int, epsilon: float, budget: int, seed: int) -> float:
        gram, var = self.gram(stop_time)
        return worst_case_tail_gram(gram, self.graph, var, epsilon, budget, seed).p_tail


def _deployment(cfg: SweepConfig, edge_count: int, deployment: int) -> NetworkGraph:
    seed = derive_seed(cfg.seed, _DEPLOY_TAG, edge_count, deployment)
    return generate_deployment(
        DeploymentConfig(cfg.node_count, edge_count, cfg.capacity, seed=seed)
    )


def _evaluator(cfg: SweepConfig, edge_count: int, deployment: int) -> TailCurveEvaluator:
    graph = _deployment(cfg, edge_count, deployment)
    coeff_seed = derive_seed(cfg.seed, _COEFF_TAG, edge_count, deployment)
    return TailCurveEvaluator(graph, coeff_seed)


SWEEP_HEADER = "edge_count,delta,stop_time,deployment,m,p_tail_qnc,p_tail_gauss"


def _record_line(rec: SweepRecord) -> str:
    return (
        f"{rec.edge_count},{rec.delta!r},{rec.stop_time},{rec.deployment},"
        f"{rec.m},{rec.p_tail_qnc!r},{rec.p_tail_gauss!r}"
    )


def write_records(path: str, records) -> None:
    """Write sweep records (canonically ordered, without timings)."""
    lines = [SWEEP_HEADER] + [_record_line(r) for r in records]
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def load_records(path: str) -> list[SweepRecord]:
    """Read records written by `write_records`."""
    with open(path, "r", encoding="utf-8") as handle:
        lines = [line.strip() for line in handle if line.strip()]
    if not lines or lines[0] != SWEEP_HEADER:
        raise ConfigError(f"{path}: not a sweep record file")
    out = []
    for line in lines[1:]:
        ec, delta, st, dep, m, pq, pg = line.split(",")
        out.append(SweepRecord(int(ec), float(delta), int(st), int(dep),
                               int(m), float(pq), float(pg)))
    return out


def run_sweep(cfg: SweepConfig) -> list[SweepRecord]:
    """Evaluate the whole grid; resumable and deterministic.

    For every (edge count, deployment) pair one deployment and one
    coefficient stream are generated; each (delta, stop time) cell then
    searches the worst-case tail at deviation delta/sqrt(2) and computes
    the Gaussian baseline at the same measurement count.  Existing
    records in cfg.output are reused (idempotent by record key), and
    partial results are flushed after every deployment.
    """
    existing: dict[tuple, SweepRecord] = {}
    if cfg.output and os.path.exists(cfg.output):
        for rec in load_records(cfg.output):
            existing[rec.key] = rec

    def canonical_keys():
        for ec in cfg.edge_counts:
            for delta in cfg.deltas:
                for st in cfg.stop_times:
                    for dep in range(cfg.deployments):
                        yield (ec, _delta_key(delta), st, dep)

    def task(ec: int, dep: int) -> list[SweepRecord]:
        wanted = [
            (delta, st)
            for delta in cfg.deltas for st in cfg.stop_times
            if (ec, _delta_key(delta), st, dep) not in existing
        ]
        if not wanted:
            return []
        evaluator = _evaluator(cfg, ec, dep)
        out = []
        for delta, st in wanted:
            begin = time.perf_counter()
            seed = derive_seed(cfg.seed, _SEARCH_TAG, ec, dep, st, _delta_key(delta))
            p_qnc = float(evaluator.worst_tail(st, delta / math.sqrt(2.0),
                                               cfg.search_budget, seed))
            m = evaluator.measurements(st)
            p_gauss = float(gaussian_tail(m, delta / math.sqrt(2.0)))
            out.append(SweepRecord(ec, delta, st, dep, m, p_qnc, p_gauss,
                                   wall_time=time.perf_counter() - begin))
        return out

    tasks = [(ec, dep) for ec in cfg.edge_counts for dep in range(cfg.deployments)]
    done: dict[tuple, SweepRecord] = dict(existing)

    def flush() -> None:
        if cfg.output:
            ordered = [done[k] for k in canonical_keys() if k in done]
            write_records(cfg.output, ordered)

    try:
        if cfg.workers == 1:
            for ec, dep in tasks:
                for rec in task(ec, dep):
                    done[rec.key] = rec
                flush()
        else:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                futures = [pool.submit(task, ec, dep) for ec, dep in tasks]
                for fut in futures:
                    for rec in fut.result():
                        done[rec.key] = rec
                    flush()
    except Exception:
        flush()
        raise
    records = [done[k] for k in canonical_keys()]
    flush()
    return records


def _geomean(values) -> float:
    vals = np.asarray(values, dtype=float)
    if (vals <= 0.0).any():
        return 0.0
    return float(np.exp(np.mean(np.log(vals))))


def summarize_records(records) -> list[SweepSummary]:
    """Aggregate per grid cell: geometric means across deployments.

    Tail probabilities are averaged geometrically (they live on a log
    axis); arithmetic means are also reported.
    """
    groups: dict[tuple, list[SweepRecord]] = {}
    for rec in records:
        groups.setdefault((rec.edge_count, _delta_key(rec.delta), rec.stop_time), []).append(rec)
    out = []
    for key in sorted(groups):
        recs = groups[key]
        out.append(SweepSummary(
            edge_count=recs[0].edge_count,
            delta=recs[0].delta,
            stop_time=recs[0].stop_time,
            mean_m=float(np.mean([r.m for r in recs])),
            geomean_p_qnc=_geomean([r.p_tail_qnc for r in recs]),
            mean_p_qnc=float(np.mean([r.p_tail_qnc for r in recs])),
            geomean_p_gauss=_geomean([r.p_tail_gauss for r in recs]),
            mean_p_gauss=float(np.mean([r.p_tail_gauss for r in recs])),
        ))
    return out


SUMMARY_HEADER = ("edge_count,delta,stop_time,mean_m,geomean_p_qnc,mean_p_qnc,"
                  "geomean_p_gauss,mean_p_gauss")


def write_summary(path: str, summaries) -> None:
    lines = [SUMMARY_HEADER]
    for s in summaries:
        lines.append(
            f"{s.edge_count},{s.delta!r},{s.stop_time},{s.mean_m!r},"
            f"{s.geomean_p_qnc!r},{s.mean_p_qnc!r},{s.geomean_p_gauss!r},{s.mean_p_gauss!r}"
        )
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def minimum_measurements_gaussian(epsilon: float, target: float,
                                  m_cap: int = 10 ** 6) -> int | None:
    """Smallest m with gaussian_tail(m, epsilon) <= target (bisection)."""
    if gaussian_tail(1, epsilon) <= target:
        return 1
    lo, hi = 1, 2
    while gaussian_tail(hi, epsilon) > target:
        lo, hi = hi, hi * 2
        if hi > m_cap:
            return None
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if gaussian_tail(mid, epsilon) <= target:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class EnsembleTailPoint:
    stop_time: int
    mean_m: float
    geomean_p: float


def ensemble_tail(evaluators, stop_time: int, epsilon: float, budget: int,
                  seed_for) -> EnsembleTailPoint:
    """Geometric-mean worst-case tail across deployments at one stop time."""
    ps, ms = [], []
    for idx, ev in enumerate(evaluators):
        ps.append(ev.worst_tail(stop_time, epsilon, budget, seed_for(idx, stop_time)))
        ms.append(ev.measurements(stop_time))
    return EnsembleTailPoint(stop_time, float(np.mean(ms)), _geomean(ps))


def minimum_measurements_qnc(evaluators, epsilon: float, target: float,
                             budget: int, seed_for, m_cap: float
                             ) -> tuple[EnsembleTailPoint | None, list[EnsembleTailPoint]]:
    """Smallest ensemble stop time whose geomean tail meets the target.

    Climbs a doubling ladder of stop times until the target is met or
    the mean measurement count passes m_cap, then bisects (the tail is
    treated as monotone in the stop time, matching the Gaussian
    baseline's behaviour).  Returns (first meeting point or None,
    every probed point) so callers can inspect an unreachable target.
    """
    probed: list[EnsembleTailPoint] = []

    def probe(stop_time: int) -> EnsembleTailPoint:
        point = ensemble_tail(evaluators, stop_time, epsilon, budget, seed_for)
        probed.append(point)
        return point

    stop = 2
    last_fail = None
    while True:
        point = probe(stop)
        if point.geomean_p <= target:
            break
        last_fail = stop
        if point.mean_m >= m_cap:
            return None, probed
        stop = 2 * stop - 1
    if last_fail is None:
        return point, probed
    lo, hi = last_fail, stop
    best = point
    while hi - lo > 1:
        mid = (lo + hi) // 2
        point = probe(mid)
        if point.geomean_p <= target:
            hi, best = mid, point
        else:
            lo = mid
    return best, probed


@dataclass(frozen=True)
class MeasurementRatio:
    """Matched-tail comparison of one (edge count, delta) cell."""

    edge_count: int
    delta: float
    target: float
    m_gauss: int
    m_qnc: float
    log10_ratio: float
    achieved_p_qnc: float
    rank_limited_floor: float


def measurement_ratio(cfg: SweepConfig, edge_count: int, delta: float,
                      target: float = 1e-2, m_cap_factor: float = 10.0,
                      evaluators=None) -> MeasurementRatio:
    """Minimum-measurement ratio at a matched tail-probability level.

    Finds the smallest Gaussian m reaching the target, then the
    smallest ensemble stop time whose geometric-mean worst-case tail
    reaches it, capped at m_cap_factor times the Gaussian requirement.
    An unreachable target reports an infinite ratio; the rank-limited
    floor explains why when the edge count itself forbids the target.
    """
    epsilon = delta / math.sqrt(2.0)
    m_gauss = minimum_measurements_gaussian(epsilon, target)
    if m_gauss is None:
        raise ConfigError(f"Gaussian baseline cannot reach target {target}")
    if evaluators is None:
        evaluators = [
            _evaluator(cfg, edge_count, dep) for dep in range(cfg.deployments)
        ]

    def seed_for(dep: int, stop_time: int) -> int:
        return derive_seed(cfg.seed, _SEARCH_TAG, edge_count, dep, stop_time,
                           _delta_key(delta))

    best, _ = minimum_measurements_qnc(
        evaluators, epsilon, target, cfg.search_budget, seed_for,
        m_cap=m_cap_factor * m_gauss,
    )
    if best is None:
        m_qnc, ratio, achieved = math.inf, math.inf, math.nan
    else:
        m_qnc = best.mean_m
        ratio = math.log10(m_qnc / m_gauss)
        achieved = best.geomean_p
    return MeasurementRatio(
        edge_count=edge_count,
        delta=delta,
        target=target,
        m_gauss=m_gauss,
        m_qnc=m_qnc,
        log10_ratio=ratio,
        achieved_p_qnc=achieved,
        rank_limited_floor=min_rank_limited_tail(edge_count, epsilon, grid=40),
    )


@dataclass(frozen=True)
class EndToEndRecord:
    """Outcome of one full pipeline run."""

    node_count: int
    edge_count: int
    sparsity: int
    horizon: int
    quantizer_bits: float | None
    seed: int
    measurement_count: int
    noise_radius: float
    residual: float
    saturations: int
    feasible: bool
    metrics: RecoveryMetrics


def run_end_to_end(node_count: int, edge_count: int, sparsity: int, horizon: int,
                   quantizer_bits: float | None, seed: int, *,
                   basis_kind: str = "haar", law: str = "rademacher",
                   capacity: float = 1.0, decode_tol: float = 1e-7) -> EndToEndRecord:
    """Deployment -> coefficients -> message -> recursion -> l1 decode.

    The decoder's residual radius is the measured norm of the
    accumulated quantization noise (zero when quantizers are disabled),
    padded by a relative float guard so the ground truth stays feasible.
    """
    graph = generate_deployment(DeploymentConfig(
        node_count, edge_count, capacity, seed=derive_seed(seed, _DEPLOY_TAG)
    ))
    schedule = draw_coefficients(graph, horizon, derive_seed(seed, _COEFF_TAG))
    signal = generate_sparse_message(node_count, sparsity, law,
                                     seed=derive_seed(seed, 0x51))
    basis = random_orthonormal_basis(node_count, seed=derive_seed(seed, 0xB5),
                                     kind=basis_kind)
    message = basis @ signal.values
    if quantizer_bits is None:
        quantizer = QuantizerSpec.disabled()
    else:
        q_range = calibrate_dynamic_range(graph, schedule, message)
        quantizer = QuantizerSpec(quantizer_bits, q_range)
    observed, noise_effect, system = run_qnc(graph, schedule, quantizer, message)
    radius = float(np.linalg.norm(noise_effect))
    radius += 1e-12 * (1.0 + float(np.linalg.norm(observed)))
    sensing = system.matrix @ basis
    problem = RecoveryProblem(observed, sensing, radius, truth=signal.values)
    estimate = l1_min_decode(problem, tol=decode_tol)
    residual = float(np.linalg.norm(sensing @ estimate - observed))
    return EndToEndRecord(
        node_count=node_count,
        edge_count=edge_count,
        sparsity=sparsity,
        horizon=horizon,
        quantizer_bits=quantizer_bits,
        seed=seed,
        measurement_count=system.measurement_count,
        noise_radius=radius,
        residual=residual,
        saturations=system.saturations,
        feasible=residual <= radius + decode_tol,
        metrics=recovery_report(estimate, signal.values, basis),
    )


END_TO_END_HEADER = ("node_count,edge_count,sparsity,horizon,quantizer_bits,seed,"
                     "measurement_count,noise_radius,residual,saturations,feasible,"
                     "coefficient_error,message_error,support_precision,"
                     "support_recall,sdr_db")


def end_to_end_line(rec: EndToEndRecord) -> str:
    """One delimited record per end-to-end instance."""
    bits = "none" if rec.quantizer_bits is None else repr(rec.quantizer_bits)
    met = rec.metrics
    return ",".join([
        str(rec.node_count), str(rec.edge_count), str(rec.sparsity),
        str(rec.horizon), bits, str(rec.seed), str(rec.measurement_count),
        repr(rec.noise_radius), repr(rec.residual), str(rec.saturations),
        str(int(rec.feasible)), repr(met.coefficient_error),
        repr(met.message_error), repr(met.support_precision),
        repr(met.support_recall), repr(met.sdr_db),
    ])


@dataclass(frozen=True)
class RipBoundRow:
    """RIP probability bound applied to one sweep record and one k."""

    edge_count: int
    delta: float
    stop_time: int
    deployment: int
    m: int
    k: int
    p_rip: float
    vacuous: bool


def rip_report(records, node_count: int, k_values) -> list[RipBoundRow]:
    """Apply the RIP probability bound to sweep records.

    Each record's searched tail (taken at deviation delta/sqrt(2))
    feeds the covering-number bound for every requested sparsity; rows
    whose bound collapses to zero are flagged vacuous.
    """
    rows = []
    for rec in records:
        for k in k_values:
            p = rip_probability_bound(rec.p_tail_qnc, node_count, int(k), rec.delta)
            rows.append(RipBoundRow(
                edge_count=rec.edge_count, delta=rec.delta,
                stop_time=rec.stop_time, deployment=rec.deployment,
                m=rec.m, k=int(k), p_rip=p, vacuous=p == 0.0,
            ))
    return rows


RIP_REPORT_HEADER = "edge_count,delta,stop_time,deployment,m,k,p_rip,vacuous"


def write_rip_report(path: str, rows) -> None:
    lines = [RIP_REPORT_HEADER]
    for r in rows:
        lines.append(
            f"{r.edge_count},{r.delta!r},{r.stop_time},{r.deployment},"
            f"{r.m},{r.k},{r.p_rip!r},{int(r.vacuous)}"
        )
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def parse_sweep_config(path: str) -> SweepConfig:
    """Read a sweep config from key = value text (a [sweep] section)."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read or "sweep" not in parser:
        raise ConfigError(f"{path}: missing [sweep] section")
    section = parser["sweep"]

    def int_list(name: str) -> tuple[int, ...]:
        return tuple(int(v) for v in section[name].replace(",", " ").split())

    def float_list(name: str) -> tuple[float, ...]:
        return tuple(float(v) for v in section[name].replace(",", " ").split())

    try:
        return SweepConfig(
            node_count=section.getint("node_count"),
            edge_counts=int_list("edge_counts"),
            deltas=float_list("deltas"),
            stop_times=int_list("stop_times"),
            deployments=section.getint("deployments"),
            search_budget=section.getint("search_budget", fallback=512),
            seed=section.getint("seed", fallback=0),
            output=section.get("output", fallback=None),
            workers=section.getint("workers", fallback=1),
            capacity=section.getfloat("capacity", fallback=1.0),
        )
    except (KeyError, ValueError, configparser.Error) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
