"""Seeded Monte Carlo engine for the transmission protocols.

Trials are drawn in fixed-size batches; batch b of a run with seed s uses
the counter-based stream Philox(key=[s, b]) with a fixed draw order inside
the batch, so results are bit-for-bit reproducible and the batch reductions
can run in any order.  Per-batch partial sums are combined with exact
(fsum) accumulation.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .frames import (
    AxisPairEstimate,
    EulerAngles,
    Frame,
    axes_to_euler,
    best_fit_frame,
    euler_to_axes,
    frame_infidelity,
    naive_euler_estimate,
)
from .geometry import Direction, sphere_quadrature
from .groups import d3_directions
from .optimize import ChiDensity, chi_density, coherent_code, d3_coherent_error
from .protocols import (
    ENUMERATION_LIMIT,
    ProtocolScore,
    ProtocolSpec,
    d3_coherent_score,
    d3_covariant_two_spin_score,
    d3_outcome_matrix,
    d3_repeated_single_score,
    d3_single_spin_score,
    frame_two_axis_score,
)
from .spins import SpinJ

BATCH_TRIALS = 8192
CHI_GRID_POINTS = 2048
_UINT64_SPAN = 2 ** 64


@dataclass(frozen=True)
class RunConfig:
    """One simulation request: protocol, sample size, stream seed.

    n_theta/n_phi override the quadrature used for the deterministic
    reference of the coherent protocol; they must resolve the overlap
    kernel (degree 2N + 2 for N spins).
    """

    protocol: ProtocolSpec
    trials: int
    seed: int
    n_theta: int | None = None
    n_phi: int | None = None
    output_path: str | None = None

    def __post_init__(self):
        if not isinstance(self.trials, (int, np.integer)) or self.trials < 1:
            raise ValueError("trials must be a positive integer")
        if not isinstance(self.seed, (int, np.integer)):
            raise ValueError("seed must be an integer")
        if not 0 <= self.seed < _UINT64_SPAN:
            raise ValueError("seed must fit in 64 bits")
        sizes = (self.n_theta, self.n_phi)
        if (sizes[0] is None) != (sizes[1] is None):
            raise ValueError("give both quadrature sizes or neither")
        if sizes[0] is not None:
            if self.protocol.kind != "d3-coherent":
                raise ValueError(
                    "quadrature sizes only configure the d3-coherent reference"
                )
            quad = sphere_quadrature(self.n_theta, self.n_phi)
            needed = 2 * self.protocol.num_spins + 2
            if quad.max_exact_degree < needed:
                raise ValueError(
                    f"quadrature exact to degree {quad.max_exact_degree} cannot "
                    f"resolve the degree-{needed} kernel"
                )


@dataclass(frozen=True)
class RunResult:
    """Estimates from one run.  Everything except wall_time is a pure
    function of (config, seed)."""

    config: RunConfig
    estimates: dict
    stderrs: dict
    trials: int
    wall_time: float

    def score(self) -> ProtocolScore:
        per_axis = self.estimates.get("per_axis")
        return ProtocolScore(
            fidelity=self.estimates["fidelity"],
            infidelity=self.estimates["infidelity"],
            method="monte-carlo",
            stderr=self.stderrs["fidelity"],
            per_axis=tuple(per_axis) if per_axis is not None else None,
        )


def _batch_rng(seed: int, batch: int) -> np.random.Generator:
    key = np.array([seed, batch], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_haar_direction(rng: np.random.Generator, size=None):
    """Uniform direction(s): cos(theta) uniform on [-1,1], phi uniform."""
    n = 1 if size is None else int(size)
    c = rng.uniform(-1.0, 1.0, n)
    phi = rng.uniform(0.0, 2.0 * math.pi, n)
    dirs = [Direction(theta=math.acos(ci), phi=pi) for ci, pi in zip(c, phi)]
    return dirs[0] if size is None else dirs


def _quaternion_matrices(q: np.ndarray) -> np.ndarray:
    """Rotation matrices for unit quaternion rows (w, x, y, z)."""
    q = q / np.linalg.norm(q, axis=1, keepdims=True)
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    out = np.empty((q.shape[0], 3, 3))
    out[:, 0, 0] = 1 - 2 * (y * y + z * z)
    out[:, 0, 1] = 2 * (x * y - w * z)
    out[:, 0, 2] = 2 * (x * z + w * y)
    out[:, 1, 0] = 2 * (x * y + w * z)
    out[:, 1, 1] = 1 - 2 * (x * x + z * z)
    out[:, 1, 2] = 2 * (y * z - w * x)
    out[:, 2, 0] = 2 * (x * z - w * y)
    out[:, 2, 1] = 2 * (y * z + w * x)
    out[:, 2, 2] = 1 - 2 * (x * x + y * y)
    return out


def sample_haar_rotation(rng: np.random.Generator) -> EulerAngles:
    """Haar-uniform rotation as Euler angles: four standard normals make a
    uniform unit quaternion, whose matrix is read back in the zxz convention."""
    q = rng.standard_normal((1, 4))
    m = _quaternion_matrices(q)[0]
    frame = Frame(z_axis=m[:, 2], x_axis=m[:, 0], y_axis=m[:, 1])
    return axes_to_euler(frame)


def sample_chi(density: ChiDensity, rng: np.random.Generator, size=None):
    """Draw chi from a direction-code density by inverse CDF on a fixed
    cumulative grid in cos(chi) with linear interpolation."""
    grid, cdf = density.cumulative_in_cos(CHI_GRID_POINTS)
    n = 1 if size is None else int(size)
    u = rng.random(n)
    c = np.interp(u, cdf, grid)
    chi = np.arccos(np.clip(c, -1.0, 1.0))
    return float(chi[0]) if size is None else chi


def _perturb_units(units: np.ndarray, cos_chi: np.ndarray, azimuth: np.ndarray) -> np.ndarray:
    """Tilt each unit row away by chi at the given tangent azimuth.

    The tangent basis comes from the coordinate axis with the smallest
    |component| (deterministic, never parallel to the direction)."""
    n = units.shape[0]
    rows = np.arange(n)
    idx = np.argmin(np.abs(units), axis=1)
    smallest = units[rows, idx]
    t1 = -units * smallest[:, None]
    t1[rows, idx] += 1.0
    t1 /= np.linalg.norm(t1, axis=1, keepdims=True)
    t2 = np.cross(units, t1)
    sin_chi = np.sqrt(np.clip(1.0 - cos_chi * cos_chi, 0.0, None))
    tangent = np.cos(azimuth)[:, None] * t1 + np.sin(azimuth)[:, None] * t2
    return cos_chi[:, None] * units + sin_chi[:, None] * tangent


def perturb_direction(true_dir: Direction, chi: float, azimuth: float) -> Direction:
    out = _perturb_units(
        true_dir.unit_vector[None, :],
        np.array([math.cos(chi)]),
        np.array([azimuth]),
    )
    return Direction.from_vector(out[0])


class _Accumulator:
    """Exact cross-batch accumulation of per-batch (sum, sum of squares)."""

    def __init__(self):
        self.sums = []
        self.sumsqs = []
        self.count = 0

    def add(self, values: np.ndarray):
        v = np.asarray(values, dtype=float)
        self.sums.append(float(np.sum(v)))
        self.sumsqs.append(float(np.sum(v * v)))
        self.count += v.size

    def mean(self) -> float:
        return math.fsum(self.sums) / self.count

    def stderr(self) -> float:
        n = self.count
        if n < 2:
            return 0.0
        s1 = math.fsum(self.sums)
        s2 = math.fsum(self.sumsqs)
        var = max(0.0, (s2 - s1 * s1 / n) / (n - 1))
        return math.sqrt(var / n)


def _batches(trials: int):
    full, rem = divmod(trials, BATCH_TRIALS)
    for b in range(full):
        yield b, BATCH_TRIALS
    if rem:
        yield full, rem


def _run_d3_finite(config: RunConfig) -> dict:
    spec = config.protocol
    matrix = d3_outcome_matrix(1 if spec.kind != "d3-covariant" else 2)
    cum = np.cumsum(matrix, axis=1)
    repeats = spec.num_spins if spec.kind == "d3-repeated" else 1
    acc = _Accumulator()
    for b, take in _batches(config.trials):
        rng = _batch_rng(config.seed, b)
        true = rng.integers(0, 6, take)
        draws = rng.random((take, repeats))
        tie = rng.random(take)
        row_cum = cum[true]
        counts = np.zeros((take, 6))
        rows = np.arange(take)
        for k in range(repeats):
            outcome = (draws[:, k, None] > row_cum).sum(axis=1)
            counts[rows, outcome] += 1.0
        top = counts.max(axis=1)
        is_win = counts == top[:, None]
        if spec.kind == "d3-repeated" and spec.tie_break == "random":
            n_win = is_win.sum(axis=1)
            pick = np.floor(tie * n_win).astype(int)
            order = np.cumsum(is_win, axis=1)
            guess = np.argmax(order == (pick + 1)[:, None], axis=1)
        else:
            guess = np.argmax(is_win, axis=1)
        acc.add((guess == true).astype(float))
    return {"fidelity": acc}


def _run_d3_coherent(config: RunConfig) -> dict:
    spec = config.protocol
    density = chi_density(coherent_code(SpinJ(spec.num_spins)))
    grid, cdf = density.cumulative_in_cos(CHI_GRID_POINTS)
    units = np.array([d.unit_vector for d in d3_directions()])
    acc = _Accumulator()
    for b, take in _batches(config.trials):
        rng = _batch_rng(config.seed, b)
        true = rng.integers(0, 6, take)
        u_chi = rng.random(take)
        azimuth = rng.uniform(0.0, 2.0 * math.pi, take)
        cos_chi = np.interp(u_chi, cdf, grid)
        est = _perturb_units(units[true], cos_chi, azimuth)
        guess = np.argmax(est @ units.T, axis=1)
        acc.add((guess == true).astype(float))
    return {"fidelity": acc}


def _naive_frame(pair: AxisPairEstimate) -> tuple:
    """Decode with the closed-form inversion; clamp |sin phi| to 1 on failure
    so every trial still yields a frame, and report whether it failed."""
    est = naive_euler_estimate(pair)
    if not est.failed:
        return euler_to_axes(est.angles)[0], False
    phi = math.copysign(0.5 * math.pi, est.sin_phi)
    wrapped = (0.5 * math.pi - pair.z_dir.phi + math.pi) % (2.0 * math.pi) - math.pi
    angles = EulerAngles(phi=phi, theta=pair.z_dir.theta, psi=wrapped)
    return euler_to_axes(angles)[0], True


def _run_frame(config: RunConfig) -> dict:
    spec = config.protocol
    proto = frame_two_axis_score(
        spec.num_spins, encoding=spec.encoding, fitter=spec.decoder
    )
    grid, cdf = proto.chi.cumulative_in_cos(CHI_GRID_POINTS)
    total = _Accumulator()
    axis_z = _Accumulator()
    axis_x = _Accumulator()
    failures = 0
    for b, take in _batches(config.trials):
        rng = _batch_rng(config.seed, b)
        quats = rng.standard_normal((take, 4))
        u_z = rng.random(take)
        az_z = rng.uniform(0.0, 2.0 * math.pi, take)
        u_x = rng.random(take)
        az_x = rng.uniform(0.0, 2.0 * math.pi, take)
        mats = _quaternion_matrices(quats)
        cos_z = np.interp(u_z, cdf, grid)
        cos_x = np.interp(u_x, cdf, grid)
        z_est = _perturb_units(mats[:, :, 2], cos_z, az_z)
        x_est = _perturb_units(mats[:, :, 0], cos_x, az_x)
        scores = np.empty(take)
        for i in range(take):
            true_frame = Frame(
                z_axis=mats[i, :, 2], x_axis=mats[i, :, 0], y_axis=mats[i, :, 1]
            )
            pair = AxisPairEstimate(
                z_dir=Direction.from_vector(z_est[i]),
                x_dir=Direction.from_vector(x_est[i]),
            )
            if spec.decoder == "naive-euler":
                fitted, failed = _naive_frame(pair)
                failures += int(failed)
            else:
                fitted, _ = best_fit_frame(pair)
            scores[i] = frame_infidelity(true_frame, fitted)
        total.add(scores)
        axis_z.add(0.5 * (1.0 - cos_z))
        axis_x.add(0.5 * (1.0 - cos_x))
    return {
        "infidelity": total,
        "per_axis": (axis_z, axis_x),
        "naive_failures": failures,
    }


def run_experiment(config: RunConfig) -> RunResult:
    """Execute the configured protocol.  Deterministic given (config, seed)."""
    start = time.perf_counter()
    kind = config.protocol.kind
    if kind in ("d3-single", "d3-repeated", "d3-covariant"):
        parts = _run_d3_finite(config)
    elif kind == "d3-coherent":
        parts = _run_d3_coherent(config)
    else:
        parts = _run_frame(config)
    estimates = {}
    stderrs = {}
    if "fidelity" in parts:
        acc = parts["fidelity"]
        estimates["fidelity"] = acc.mean()
        estimates["infidelity"] = 1.0 - estimates["fidelity"]
        stderrs["fidelity"] = acc.stderr()
    else:
        acc = parts["infidelity"]
        estimates["infidelity"] = acc.mean()
        estimates["fidelity"] = 1.0 - estimates["infidelity"]
        stderrs["fidelity"] = acc.stderr()
    if "per_axis" in parts:
        estimates["per_axis"] = [a.mean() for a in parts["per_axis"]]
        stderrs["per_axis"] = [a.stderr() for a in parts["per_axis"]]
        if config.protocol.decoder == "naive-euler":
            estimates["naive_failures"] = parts["naive_failures"]
    wall = time.perf_counter() - start
    return RunResult(
        config=config,
        estimates=estimates,
        stderrs=stderrs,
        trials=config.trials,
        wall_time=wall,
    )


def reference_score(config: RunConfig) -> ProtocolScore | None:
    """The deterministic (exact or quadrature) score for the configured
    protocol, when one exists; None for frame runs, whose full-frame score
    is only defined by sampling."""
    spec = config.protocol
    if spec.kind == "d3-single":
        return d3_single_spin_score()
    if spec.kind == "d3-repeated":
        if spec.num_spins > ENUMERATION_LIMIT:
            return None
        return d3_repeated_single_score(spec.num_spins, tie_break=spec.tie_break)
    if spec.kind == "d3-covariant":
        return d3_covariant_two_spin_score()
    if spec.kind == "d3-coherent":
        if config.n_theta is not None:
            quad = sphere_quadrature(config.n_theta, config.n_phi)
            err = d3_coherent_error(SpinJ(spec.num_spins), quad)
            return ProtocolScore(
                fidelity=1.0 - err, infidelity=err, method="quadrature"
            )
        return d3_coherent_score(spec.num_spins)
    return None
