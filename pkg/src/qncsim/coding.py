"""Network-coding coefficients, the quantized recursion, and measurement assembly.

Coefficient design: message injection happens only at the second time
step, through one independent zero-mean Gaussian per edge; afterwards
edge contents mix through deterministic per-node transfer coefficients.
Under that design the map from messages to stacked gateway measurements
factors into a fixed mixing operator applied to the random injection,
which is what makes the measurement matrix entries Gaussian and lets
the tail analysis work on the mixing operator alone.

Per node, the transfer rows of distinct outgoing edges are orthonormal
over the node's incoming edges (zero rows where out-degree exceeds
in-degree), which empirically improves norm conservation of the
resulting measurement matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError
from .network import NetworkGraph

_TRANSFER_TAG = 0x7E
_ALPHA_TAG = 0xA1


def _rng(seed, *key: int) -> np.random.Generator:
    if seed is None:
        return np.random.default_rng()
    return np.random.default_rng(np.random.SeedSequence([int(seed), *key]))


@dataclass(frozen=True)
class QuantizerSpec:
    """Uniform mid-rise quantizer with 2^ceil(bits*C_e) levels on [-q, q].

    Inputs outside the dynamic range clip and count as saturations.
    `mode="disabled"` passes contents through exactly (zero error).
    """

    bits_per_capacity: float = 6.0
    dynamic_range: float = 1.0
    mode: str = "uniform"

    def __post_init__(self):
        if self.mode not in ("uniform", "disabled"):
            raise ConfigError(f"unknown quantizer mode {self.mode!r}")
        if self.mode == "uniform":
            if not self.dynamic_range > 0:
                raise ConfigError("dynamic_range must be positive")
            if not self.bits_per_capacity > 0:
                raise ConfigError("bits_per_capacity must be positive")

    @classmethod
    def disabled(cls) -> "QuantizerSpec":
        return cls(mode="disabled")

    def levels(self, capacities: np.ndarray) -> np.ndarray:
        counts = 2 ** np.ceil(self.bits_per_capacity * np.asarray(capacities))
        if (counts < 2).any():
            raise ConfigError("quantizer needs at least 2 levels on every edge")
        return counts

    def apply(self, values: np.ndarray, capacities: np.ndarray) -> tuple[np.ndarray, int]:
        """Quantize `values`; returns (quantized, saturation_count)."""
        if self.mode == "disabled":
            return values.copy(), 0
        q = self.dynamic_range
        step = 2.0 * q / self.levels(capacities)
        saturated = int(np.count_nonzero(np.abs(values) > q))
        idx = np.floor((values + q) / step)
        idx = np.clip(idx, 0, self.levels(capacities) - 1)
        return -q + (idx + 0.5) * step, saturated


@dataclass(frozen=True)
class CoefficientSchedule:
    """All coding coefficients of one deployment up to a stop time.

    injection: |E| x n, row e nonzero only at column tail(e); nonzeros
        i.i.d. zero-mean Gaussian with variance `injection_variance`.
    transfers: t -> |E| x |E| matrix for t in 3..horizon, entry (e, e')
        nonzero only when tail(e) = head(e').
    gateway_selector: |In(gateway)| x |E|, one unit entry per incoming
        gateway edge (identity extraction), shared by every time step.
    """

    injection: np.ndarray
    transfers: dict[int, np.ndarray]
    gateway_selector: np.ndarray
    injection_variance: float
    horizon: int

    def transfer(self, t: int) -> np.ndarray:
        if t < 3 or t > self.horizon:
            raise ConfigError(f"no transfer matrix for t={t} (horizon {self.horizon})")
        return self.transfers[t]


@dataclass(frozen=True)
class NetworkState:
    """Edge contents at one time step plus the quantization-error log."""

    t: int
    contents: np.ndarray
    noise_log: tuple[np.ndarray, ...] = ()
    saturations: int = 0


@dataclass(frozen=True)
class MeasurementSystem:
    """Mixing operator, injection matrix, and their product.

    `matrix` is always constructed as mixing @ injection, so the
    factorisation identity holds exactly.
    """

    mixing: np.ndarray
    injection: np.ndarray
    matrix: np.ndarray
    horizon: int
    saturations: int = 0

    @property
    def measurement_count(self) -> int:
        return self.mixing.shape[0]


def gateway_selector(graph: NetworkGraph) -> np.ndarray:
    """Identity-extraction selector onto the gateway's incoming edges."""
    inc = graph.incoming_edges(graph.gateway)
    sel = np.zeros((len(inc), graph.edge_count))
    for i, e in enumerate(inc):
        sel[i, e] = 1.0
    return sel


def transfer_matrix(graph: NetworkGraph, t: int, seed, *, redraw: bool = True) -> np.ndarray:
    """Deterministic transfer coefficients for time step t.

    Per node the |Out(v)| x |In(v)| block has orthonormal rows; when the
    out-degree exceeds the in-degree the surplus rows are zero.  With
    `redraw=False` every t reuses the t=3 draw.
    """
    if t < 3:
        raise ConfigError("transfer matrices start at t=3")
    rng = _rng(seed, _TRANSFER_TAG, t if redraw else 3)
    mat = np.zeros((graph.edge_count, graph.edge_count))
    for v in range(graph.node_count):
        out = graph.outgoing_edges(v)
        inc = graph.incoming_edges(v)
        if not out or not inc:
            continue
        rows = min(len(out), len(inc))
        draw = rng.standard_normal((len(inc), rows))
        q, _ = np.linalg.qr(draw)
        mat[np.ix_(out[:rows], inc)] = q.T
    return mat


def build_mixing_matrix(schedule: CoefficientSchedule, graph: NetworkGraph,
                        horizon: int | None = None) -> np.ndarray:
    """Stack the per-step gateway views of the injected contents.

    Block for t=2 is the bare selector; the block for t >= 3 is the
    selector applied to the product of transfers from 3 up to t.
    """
    stop = schedule.horizon if horizon is None else horizon
    if stop < 2:
        raise ConfigError("horizon must be at least 2")
    sel = schedule.gateway_selector
    blocks = [sel]
    prod = np.eye(graph.edge_count)
    for t in range(3, stop + 1):
        prod = schedule.transfer(t) @ prod
        blocks.append(sel @ prod)
    return np.vstack(blocks)


def injection_variance(mixing: np.ndarray, node_count: int) -> float:
    """Variance for the injection Gaussians given the mixing operator.

    Returns node_count / ||mixing||_F^2, which makes the average of
    E||measurement_matrix @ x||^2 over the unit sphere equal to one
    (E[x_u x_v] = delta_uv / n on the sphere).
    """
    fro2 = float(np.sum(mixing * mixing))
    if fro2 == 0.0:
        raise ConfigError("mixing operator is identically zero")
    return node_count / fro2


def draw_coefficients(graph: NetworkGraph, horizon: int, seed=None, *,
                      redraw_transfers: bool = True) -> CoefficientSchedule:
    """Draw a full coefficient schedule for one deployment.

    Transfers for each t are seeded independently of the horizon, so
    schedules with different stop times agree on their common steps.
    The injection variance follows `injection_variance` computed on the
    mixing operator of the requested horizon.
    """
    if horizon < 2:
        raise ConfigError("horizon must be at least 2")
    transfers = {
        t: transfer_matrix(graph, t, seed, redraw=redraw_transfers)
        for t in range(3, horizon + 1)
    }
    sel = gateway_selector(graph)
    skeleton = CoefficientSchedule(
        injection=np.zeros((graph.edge_count, graph.node_count)),
        transfers=transfers,
        gateway_selector=sel,
        injection_variance=0.0,
        horizon=horizon,
    )
    mixing = build_mixing_matrix(skeleton, graph)
    var = injection_variance(mixing, graph.node_count)
    rng = _rng(seed, _ALPHA_TAG)
    inj = np.zeros((graph.edge_count, graph.node_count))
    inj[np.arange(graph.edge_count), graph.tails()] = (
        math.sqrt(var) * rng.standard_normal(graph.edge_count)
    )
    return replace(skeleton, injection=inj, injection_variance=var)


def initial_state(graph: NetworkGraph) -> NetworkState:
    """Initial rest: all edge contents zero at t=1."""
    return NetworkState(t=1, contents=np.zeros(graph.edge_count))


def step(state: NetworkState, schedule: CoefficientSchedule, graph: NetworkGraph,
         quantizer: QuantizerSpec, message: np.ndarray) -> NetworkState:
    """Advance the recursion one time unit.

    The new contents are the quantized mix of previous contents (t >= 3)
    plus, at t=2 only, the injected messages.  The appended noise-log
    entry is quantized minus unquantized; it is exactly zero when the
    quantizer is disabled.
    """
    if state.t < 1:
        raise ConfigError("state time index must be at least 1")
    message = np.asarray(message, dtype=float)
    if message.shape != (graph.node_count,):
        raise ConfigError(
            f"message has shape {message.shape}, expected ({graph.node_count},)"
        )
    if state.contents.shape != (graph.edge_count,):
        raise ConfigError("state contents do not match the edge count")
    t_next = state.t + 1
    if t_next == 2:
        pre = schedule.injection @ message
    else:
        pre = schedule.transfer(t_next) @ state.contents
    quantized, saturated = quantizer.apply(pre, graph.capacities())
    return NetworkState(
        t=t_next,
        contents=quantized,
        noise_log=state.noise_log + (quantized - pre,),
        saturations=state.saturations + saturated,
    )


def run_qnc(graph: NetworkGraph, schedule: CoefficientSchedule,
            quantizer: QuantizerSpec, message: np.ndarray,
            horizon: int | None = None
            ) -> tuple[np.ndarray, np.ndarray, MeasurementSystem]:
    """Run the recursion from rest and collect gateway measurements.

    Returns (measurements, noise_effect, system): the stacked gateway
    readings for t=2..horizon, the accumulated quantization error seen
    at the gateway (measurements - matrix @ message), and the assembled
    measurement system.
    """
    stop = schedule.horizon if horizon is None else horizon
    if stop < 2 or stop > schedule.horizon:
        raise ConfigError(f"horizon must be in 2..{schedule.horizon}")
    state = initial_state(graph)
    readings = []
    for _ in range(2, stop + 1):
        state = step(state, schedule, graph, quantizer, message)
        readings.append(schedule.gateway_selector @ state.contents)
    measurements = np.concatenate(readings)
    mixing = build_mixing_matrix(schedule, graph, stop)
    system = MeasurementSystem(
        mixing=mixing,
        injection=schedule.injection,
        matrix=mixing @ schedule.injection,
        horizon=stop,
        saturations=state.saturations,
    )
    noise_effect = measurements - system.matrix @ message
    return measurements, noise_effect, system


def calibrate_dynamic_range(graph: NetworkGraph, schedule: CoefficientSchedule,
                            message: np.ndarray, horizon: int | None = None,
                            spread: float = 4.0) -> float:
    """Dynamic range from a dry run with quantizers disabled.

    Returns `spread` times the standard deviation of the edge contents
    observed over the run (1.0 when the dry run stays identically zero,
    so a quantizer can still be built).
    """
    stop = schedule.horizon if horizon is None else horizon
    state = initial_state(graph)
    pool = []
    for _ in range(2, stop + 1):
        state = step(state, schedule, graph, QuantizerSpec.disabled(), message)
        pool.append(state.contents)
    sigma = float(np.std(np.concatenate(pool)))
    return spread * sigma if sigma > 0 else 1.0


def _format_block(name: str, array: np.ndarray) -> list[str]:
    lines = [f"[{name}] rows={array.shape[0]} cols={array.shape[1]}"]
    for row in array:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    return lines


def save_measurement_system(system: MeasurementSystem, path: str) -> None:
    """Write a measurement system as text, lossless for doubles.

    A dimensions header is followed by the mixing, injection, and total
    measurement matrices in row-major decimal with 17 significant
    digits.
    """
    m, e = system.mixing.shape
    n = system.injection.shape[1]
    lines = [
        f"measurements={m} edges={e} nodes={n} "
        f"horizon={system.horizon} saturations={system.saturations}"
    ]
    lines += _format_block("mixing", system.mixing)
    lines += _format_block("injection", system.injection)
    lines += _format_block("matrix", system.matrix)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def _parse_block(lines: list[str], pos: int, name: str) -> tuple[np.ndarray, int]:
    head = lines[pos].split()
    if head[0] != f"[{name}]":
        raise ConfigError(f"expected [{name}] block, found {lines[pos]!r}")
    rows = int(head[1].split("=")[1])
    cols = int(head[2].split("=")[1])
    data = np.array(
        [[float(v) for v in lines[pos + 1 + r].split()] for r in range(rows)]
    ).reshape(rows, cols)
    return data, pos + 1 + rows


def load_measurement_system(path: str) -> MeasurementSystem:
    """Read a measurement system written by `save_measurement_system`."""
    with open(path, "r", encoding="utf-8") as handle:
        lines = [line.rstrip("\n") for line in handle if line.strip()]
    header = dict(item.split("=") for item in lines[0].split())
    mixing, pos = _parse_block(lines, 1, "mixing")
    injection, pos = _parse_block(lines, pos, "injection")
    matrix, _ = _parse_block(lines, pos, "matrix")
    return MeasurementSystem(
        mixing=mixing,
        injection=injection,
        matrix=matrix,
        horizon=int(header["horizon"]),
        saturations=int(header["saturations"]),
    )
