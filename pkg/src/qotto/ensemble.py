"""Stochastic phase-space engine for the driven, damped oscillator.

The oscillator state is represented by N particles with dimensionless
quadrature coordinates (x, y); the particle density is the Wigner
quasiprobability distribution.  A thermal state at occupation-plus-half
nu is the isotropic Gaussian with variance nu/2 per axis, so the energy
convention is E = omega <x^2 + y^2> = omega nu, zero point included.

Dynamics follow the Langevin system

    dx/dt =  omega y - (omega'/2 omega) x - (gamma/2) x + xi_x
    dy/dt = -omega x + (omega'/2 omega) y - (gamma/2) y + xi_y

with <xi(t) xi(0)> = D delta(t) and D = (gamma/4)(1 + 2 nbar) = gamma nu/2.
Each time step composes three exactly solvable factors:

    1. rotation by the swept phase angle (midpoint omega times dt, which
       is the exact integral of omega over the step for a linear ramp);
    2. the ramp scaling  x *= sqrt(omega_a/omega_b), y /= the same factor
       (exact for any monotone omega(t) given the endpoint frequencies);
    3. when a bath is attached, the exact Ornstein-Uhlenbeck update
       x -> x e^{-gamma dt/2} + sqrt((D/gamma)(1 - e^{-gamma dt})) n.

The rotation factor conserves each particle radius to rounding, and the
rotation/scaling pair is volume preserving, so the scheme has no secular
energy drift; the only splitting error is the O(dt) rotation-scaling
commutator on ramps.

A frequency jump is the zero-duration limit of a ramp: the rotation angle
vanishes and only the scaling factor sqrt(omega_old/omega_new) survives.
Applied to a thermal state it produces the anisotropic Gaussian with
variances nu/(2s) and nu s/2, s = omega_new/omega_old.

Noise is drawn from counter-based streams keyed by (seed, segment,
in-segment step, particle index), so results are bit-identical for any
number of workers, and identical hold segments reuse identical kicks
across schedule variants.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional

import numpy as np

from . import _rng
from .thermo import thermal_occupation

__all__ = [
    "Ensemble",
    "BathSpec",
    "Hold",
    "LinearRamp",
    "Jump",
    "FrequencySchedule",
    "Snapshot",
    "SnapshotContext",
    "sample_squeezed_thermal",
    "diffusion_coefficient",
    "step",
    "evolve_schedule",
    "energy",
    "mean_occupation",
    "squeezing",
]

OMEGA_DT_GUARD = 0.1  # stability guard: omega * dt and gamma * dt must stay below
STAT_PARTICLE_FLOOR = 1000


@dataclass(frozen=True)
class Ensemble:
    """N phase-space points plus the provenance needed to continue them.

    `x[i], y[i]` are the quadratures of particle i.  `segment` and
    `step_in_segment` index the noise stream; continuing an ensemble with
    the same seed and counters reproduces the same trajectory bit for bit.
    """

    x: np.ndarray
    y: np.ndarray
    rng_seed: int
    time: float = 0.0
    segment: int = 0
    step_in_segment: int = 0

    def __post_init__(self):
        if self.x.shape != self.y.shape or self.x.ndim != 1:
            raise ValueError("x and y must be 1-d arrays of equal length")
        if len(self.x) < 1:
            raise ValueError("ensemble needs at least one particle")

    @property
    def particle_count(self) -> int:
        return len(self.x)

    def radius_squared(self) -> np.ndarray:
        return self.x * self.x + self.y * self.y


@dataclass(frozen=True)
class BathSpec:
    """Ohmic bath contact: decay rate gamma >= 0 and temperature > 0."""

    gamma: float
    temperature: float

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.temperature <= 0:
            raise ValueError(f"temperature must be > 0, got {self.temperature}")


@dataclass(frozen=True)
class Hold:
    """Constant frequency for `duration`, optionally coupled to a bath."""

    omega: float
    duration: float
    bath: Optional[BathSpec] = None

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError(f"omega must be > 0, got {self.omega}")
        if self.duration <= 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")


@dataclass(frozen=True)
class LinearRamp:
    """Linear frequency sweep with the system isolated (no bath on ramps)."""

    omega_start: float
    omega_end: float
    duration: float

    def __post_init__(self):
        if self.omega_start <= 0 or self.omega_end <= 0:
            raise ValueError("ramp frequencies must be > 0")
        if self.duration <= 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")


@dataclass(frozen=True)
class Jump:
    """Instantaneous frequency change (sudden approximation)."""

    omega_new: float

    def __post_init__(self):
        if self.omega_new <= 0:
            raise ValueError(f"omega must be > 0, got {self.omega_new}")


Segment = Hold | LinearRamp | Jump


@dataclass(frozen=True)
class FrequencySchedule:
    """Ordered segment program for omega(t).

    Consecutive segments must agree on the frequency at their boundary;
    discontinuities must be spelled out as Jump segments.  If the first
    segment is a Jump, `omega_initial` must name the frequency it jumps
    from.
    """

    segments: tuple[Segment, ...]
    omega_initial: Optional[float] = None

    def __init__(self, segments, omega_initial: Optional[float] = None):
        object.__setattr__(self, "segments", tuple(segments))
        object.__setattr__(self, "omega_initial", omega_initial)
        self.__post_init__()

    def __post_init__(self):
        if not self.segments:
            raise ValueError("schedule must contain at least one segment")
        omega = self.omega_initial
        for i, seg in enumerate(self.segments):
            if isinstance(seg, Jump):
                if omega is None:
                    raise ValueError(
                        "schedule starts with a Jump; omega_initial is required"
                    )
                omega = seg.omega_new
                continue
            start = seg.omega if isinstance(seg, Hold) else seg.omega_start
            if omega is not None and not math.isclose(start, omega, rel_tol=1e-12):
                raise ValueError(
                    f"segment {i} starts at omega={start} but the previous "
                    f"segment ends at omega={omega}; insert a Jump for "
                    f"discontinuous frequency changes"
                )
            omega = seg.omega if isinstance(seg, Hold) else seg.omega_end

    @property
    def omega_max(self) -> float:
        out = 0.0
        for seg in self.segments:
            if isinstance(seg, Hold):
                out = max(out, seg.omega)
            elif isinstance(seg, LinearRamp):
                out = max(out, seg.omega_start, seg.omega_end)
            else:
                out = max(out, seg.omega_new)
        return out

    @property
    def total_duration(self) -> float:
        return sum(getattr(seg, "duration", 0.0) for seg in self.segments)


@dataclass(frozen=True)
class Snapshot:
    """Observables of the ensemble at one instant."""

    time: float
    omega: float
    energy: float
    energy_stderr: float
    mean_occupation: float
    squeezing_s: float
    beta_ratio: float
    s_e: Optional[float] = None
    s_qc: Optional[float] = None
    segment: int = -1
    boundary: bool = False


@dataclass(frozen=True)
class SnapshotContext:
    """Metadata handed to an observer hook alongside the live ensemble."""

    time: float
    omega: float
    segment: int
    boundary: bool


ObserverHook = Callable[[Ensemble, SnapshotContext], Optional[Mapping[str, float]]]


def sample_squeezed_thermal(
    nu: float, s: float, angle: float, n: int, seed: int
) -> Ensemble:
    """Draw N particles from a (rotated) squeezed thermal Gaussian.

    Before rotation the variances are Var(x) = nu/(2s) and Var(y) = nu s/2;
    s = 1 gives the isotropic thermal state, nu = 1/2 the vacuum.
    """
    if nu < 0.5:
        raise ValueError(f"nu must be >= 1/2 (vacuum), got {nu}")
    if s < 1.0:
        raise ValueError(f"squeezing parameter must be >= 1, got {s}")
    if n < 1:
        raise ValueError(f"particle count must be >= 1, got {n}")
    nx, ny = _rng.normals(seed, _rng.CTX_INIT, segment=0, step=0, count=n)
    x = math.sqrt(nu / (2.0 * s)) * nx
    y = math.sqrt(nu * s / 2.0) * ny
    if angle != 0.0:
        c, sn = math.cos(angle), math.sin(angle)
        x, y = c * x - sn * y, sn * x + c * y
    return Ensemble(x=x, y=y, rng_seed=seed)


def diffusion_coefficient(bath: BathSpec, omega: float) -> float:
    """Effective phase-space diffusion constant D = (gamma/4)(1 + 2 nbar).

    Equals gamma nu / 2, so the stationary Ornstein-Uhlenbeck variance
    D/gamma per axis reproduces the thermal value nu/2.
    """
    if omega <= 0:
        raise ValueError(f"omega must be > 0, got {omega}")
    return 0.25 * bath.gamma * (1.0 + 2.0 * thermal_occupation(omega, bath.temperature))


# ---------------------------------------------------------------------------
# stepping core


def _chunk_bounds(n: int, workers: int) -> list[tuple[int, int]]:
    workers = max(1, min(workers, n))
    edges = np.linspace(0, n, workers + 1, dtype=int)
    return [(int(edges[i]), int(edges[i + 1])) for i in range(workers)]


def _drift_kick_chunk(x, y, tx, ty, lo, hi, a, b, c, d, kick_std, nx, ny):
    """Advance particles [lo, hi) through one affine update plus noise kick.

    (a, b, c, d) encode rotation, ramp scaling and OU decay premultiplied
    into a single map x' = a x + b y, y' = c y - d x.  All operations are
    elementwise into preallocated scratch, which keeps chunked and
    unchunked execution bit-identical and allocation-free.
    """
    xs = x[lo:hi]
    ys = y[lo:hi]
    txs = tx[lo:hi]
    tys = ty[lo:hi]
    np.multiply(ys, b, out=tys)
    np.multiply(xs, a, out=txs)
    txs += tys
    np.multiply(xs, d, out=tys)
    np.multiply(ys, c, out=ys)
    ys -= tys
    xs[:] = txs
    if kick_std != 0.0:
        np.multiply(nx[lo:hi], kick_std, out=txs)
        xs += txs
        np.multiply(ny[lo:hi], kick_std, out=tys)
        ys += tys


def _advance(
    x: np.ndarray,
    y: np.ndarray,
    tx: np.ndarray,
    ty: np.ndarray,
    seed: int,
    segment: int,
    step_index: int,
    omega: float,
    omega_dot: float,
    bath: Optional[BathSpec],
    dt: float,
    pool: Optional[ThreadPoolExecutor],
    bounds: list[tuple[int, int]],
) -> None:
    """One in-place time step over all particles."""
    omega_b = omega + omega_dot * dt
    theta = 0.5 * (omega + omega_b) * dt  # exact swept phase for a linear ramp
    rot_cos = math.cos(theta)
    rot_sin = math.sin(theta)
    scale = math.sqrt(omega / omega_b) if omega_dot != 0.0 else 1.0

    decay = 1.0
    kick_std = 0.0
    nx = ny = None
    if bath is not None and bath.gamma > 0.0:
        dcoef = diffusion_coefficient(bath, omega)
        decay = math.exp(-0.5 * bath.gamma * dt)
        kick_std = math.sqrt((dcoef / bath.gamma) * -math.expm1(-bath.gamma * dt))
        # Noise for the whole step is generated in one deterministic call;
        # workers only partition the arithmetic.
        nx, ny = _rng.normals(seed, _rng.CTX_BATH, segment, step_index, len(x))

    a = decay * scale * rot_cos
    b = decay * scale * rot_sin
    c = decay * rot_cos / scale
    d = decay * rot_sin / scale
    if pool is None or len(bounds) == 1:
        _drift_kick_chunk(x, y, tx, ty, 0, len(x), a, b, c, d, kick_std, nx, ny)
    else:
        futures = [
            pool.submit(_drift_kick_chunk, x, y, tx, ty, lo, hi, a, b, c, d, kick_std, nx, ny)
            for lo, hi in bounds
        ]
        for fut in futures:
            fut.result()


def _ou_kick_chunk(x, y, tx, ty, lo, hi, decay, kick_std, nx, ny):
    xs = x[lo:hi]
    ys = y[lo:hi]
    xs *= decay
    ys *= decay
    np.multiply(nx[lo:hi], kick_std, out=tx[lo:hi])
    xs += tx[lo:hi]
    np.multiply(ny[lo:hi], kick_std, out=ty[lo:hi])
    ys += ty[lo:hi]


def _ou_kick(
    x: np.ndarray,
    y: np.ndarray,
    tx: np.ndarray,
    ty: np.ndarray,
    seed: int,
    segment: int,
    kick_index: int,
    bath: BathSpec,
    omega: float,
    tau: float,
    pool: Optional[ThreadPoolExecutor],
    bounds: list[tuple[int, int]],
) -> None:
    """Exact Ornstein-Uhlenbeck update accumulated over a horizon tau.

    On a hold the rotation factor and the isotropic bath factor commute in
    law, so applying the decay and a single Gaussian kick with variance
    (D/gamma)(1 - e^{-gamma tau}) at observation boundaries reproduces the
    per-step statistics exactly while drawing far less noise.
    """
    dcoef = diffusion_coefficient(bath, omega)
    decay = math.exp(-0.5 * bath.gamma * tau)
    kick_std = math.sqrt((dcoef / bath.gamma) * -math.expm1(-bath.gamma * tau))
    nx, ny = _rng.normals(seed, _rng.CTX_BATH, segment, kick_index, len(x))
    if pool is None or len(bounds) == 1:
        _ou_kick_chunk(x, y, tx, ty, 0, len(x), decay, kick_std, nx, ny)
    else:
        futures = [
            pool.submit(_ou_kick_chunk, x, y, tx, ty, lo, hi, decay, kick_std, nx, ny)
            for lo, hi in bounds
        ]
        for fut in futures:
            fut.result()


def _check_guards(omega: float, bath: Optional[BathSpec], dt: float) -> None:
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if omega * dt > OMEGA_DT_GUARD:
        raise ValueError(
            f"omega*dt = {omega * dt:.4g} exceeds the stability guard {OMEGA_DT_GUARD}"
        )
    if bath is not None and bath.gamma * dt > OMEGA_DT_GUARD:
        raise ValueError(
            f"gamma*dt = {bath.gamma * dt:.4g} exceeds the stability guard {OMEGA_DT_GUARD}"
        )


def step(
    ensemble: Ensemble,
    omega: float,
    omega_dot: float,
    bath: Optional[BathSpec],
    dt: float,
    workers: int = 1,
) -> Ensemble:
    """Advance every particle by one time step and return a new ensemble.

    The result is independent of `workers` (noise is a pure function of
    seed, segment, step and particle index).
    """
    if omega <= 0:
        raise ValueError(f"omega must be > 0, got {omega}")
    _check_guards(omega, bath, dt)
    x = ensemble.x.copy()
    y = ensemble.y.copy()
    tx = np.empty_like(x)
    ty = np.empty_like(y)
    bounds = _chunk_bounds(len(x), workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=len(bounds)) as pool:
            _advance(
                x, y, tx, ty, ensemble.rng_seed, ensemble.segment,
                ensemble.step_in_segment, omega, omega_dot, bath, dt, pool, bounds,
            )
    else:
        _advance(
            x, y, tx, ty, ensemble.rng_seed, ensemble.segment,
            ensemble.step_in_segment, omega, omega_dot, bath, dt, None, bounds,
        )
    return replace(
        ensemble,
        x=x,
        y=y,
        time=ensemble.time + dt,
        step_in_segment=ensemble.step_in_segment + 1,
    )


def apply_jump(ensemble: Ensemble, omega_old: float, omega_new: float) -> Ensemble:
    """Sudden frequency change: the zero-duration limit of a ramp.

    Only the ramp scaling factor survives: x *= sqrt(omega_old/omega_new)
    and y by the reciprocal.  A thermal state at nu becomes the squeezed
    Gaussian with parameter s = omega_new/omega_old.
    """
    f = math.sqrt(omega_old / omega_new)
    return replace(ensemble, x=ensemble.x * f, y=ensemble.y / f)


# ---------------------------------------------------------------------------
# observables


def energy(ensemble: Ensemble, omega: float) -> tuple[float, float]:
    """Mean energy omega <x^2 + y^2> and its Monte Carlo standard error."""
    r2 = ensemble.radius_squared()
    n = len(r2)
    mean = float(r2.mean())
    stderr = float(r2.std() / math.sqrt(n)) if n > 1 else 0.0
    return omega * mean, omega * stderr


def mean_occupation(ensemble: Ensemble) -> float:
    """Mean photon number <x^2 + y^2> - 1/2."""
    return float(ensemble.radius_squared().mean()) - 0.5


def squeezing(ensemble: Ensemble) -> tuple[float, float]:
    """Squeezing parameter and raw quadrature-variance ratio.

    Returns (s, beta) with s = sqrt(lambda_max / lambda_min) of the second
    moment matrix [[<x^2>, <xy>], [<xy>, <y^2>]], which is invariant under
    rotation of the state and equals the parameter of a matching squeezed
    thermal Gaussian (variances nu/(2s), nu s/2 give eigenvalue ratio s^2).
    beta = <x^2>/<y^2> is the axis-frame ratio and oscillates as the state
    rotates.
    """
    if ensemble.particle_count < STAT_PARTICLE_FLOOR:
        warnings.warn(
            f"squeezing estimate from {ensemble.particle_count} particles; "
            f"at least {STAT_PARTICLE_FLOOR} recommended",
            stacklevel=2,
        )
    x, y = ensemble.x, ensemble.y
    n = len(x)
    xx = float(x @ x) / n
    yy = float(y @ y) / n
    xy = float(x @ y) / n
    half_tr = 0.5 * (xx + yy)
    disc = math.sqrt(max(0.25 * (xx - yy) ** 2 + xy * xy, 0.0))
    lam_max = half_tr + disc
    lam_min = max(half_tr - disc, 1e-300)
    return math.sqrt(lam_max / lam_min), xx / yy


def _make_snapshot(
    ensemble: Ensemble,
    omega: float,
    segment: int,
    boundary: bool,
    observer: Optional[ObserverHook],
) -> Snapshot:
    e, se = energy(ensemble, omega)
    s, beta = squeezing(ensemble)
    extras: Mapping[str, float] = {}
    if observer is not None:
        ctx = SnapshotContext(
            time=ensemble.time, omega=omega, segment=segment, boundary=boundary
        )
        extras = observer(ensemble, ctx) or {}
    return Snapshot(
        time=ensemble.time,
        omega=omega,
        energy=e,
        energy_stderr=se,
        mean_occupation=mean_occupation(ensemble),
        squeezing_s=s,
        beta_ratio=beta,
        s_e=extras.get("s_e"),
        s_qc=extras.get("s_qc"),
        segment=segment,
        boundary=boundary,
    )


def evolve_schedule(
    ensemble: Ensemble,
    schedule: FrequencySchedule,
    dt: float,
    observer_stride: int,
    workers: int = 1,
    observer: Optional[ObserverHook] = None,
) -> list[Snapshot]:
    """Run the full frequency program, collecting snapshots along the way.

    A snapshot is emitted for the initial state, every `observer_stride`
    steps within a segment, and at every segment boundary.  Within ramps
    omega_dot is the segment slope and the system is isolated; within
    holds omega_dot = 0 and the segment bath (if any) is active.  Jumps
    rescale the quadratures instantly and advance neither time nor the
    step counter.

    On bath holds the rotation is integrated per step while the decay and
    noise are applied as the exact accumulated Ornstein-Uhlenbeck update
    at each emitted snapshot (the two factors commute in law for an
    isotropic bath), so every observed state carries the exact statistics
    at a fraction of the noise cost.

    Per segment, the number of steps is round(duration/dt) and the actual
    step is duration/n_steps, so segment boundaries land exactly on the
    requested times.  The snapshot list is bit-identical for any `workers`.
    """
    if observer_stride < 1:
        raise ValueError(f"observer_stride must be >= 1, got {observer_stride}")
    _check_guards(schedule.omega_max, None, dt)

    x = ensemble.x.copy()
    y = ensemble.y.copy()
    tx = np.empty_like(x)
    ty = np.empty_like(y)
    seed = ensemble.rng_seed
    t0 = ensemble.time
    seg_base = ensemble.segment
    elapsed = 0.0

    if isinstance(schedule.segments[0], Jump):
        omega = float(schedule.omega_initial)
    else:
        first = schedule.segments[0]
        omega = first.omega if isinstance(first, Hold) else first.omega_start

    def live(seg_idx: int, step_in_seg: int) -> Ensemble:
        return Ensemble(
            x=x,
            y=y,
            rng_seed=seed,
            time=t0 + elapsed,
            segment=seg_base + seg_idx,
            step_in_segment=step_in_seg,
        )

    snapshots = [_make_snapshot(live(0, 0), omega, seg_base - 1, True, observer)]

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    bounds = _chunk_bounds(len(x), workers)
    try:
        for seg_idx, seg in enumerate(schedule.segments):
            seg_id = seg_base + seg_idx
            if isinstance(seg, Jump):
                f = math.sqrt(omega / seg.omega_new)
                x *= f
                y /= f
                omega = seg.omega_new
                snapshots.append(
                    _make_snapshot(live(seg_idx + 1, 0), omega, seg_id, True, observer)
                )
                continue

            n_steps = max(1, int(round(seg.duration / dt)))
            dt_seg = seg.duration / n_steps
            seg_t0 = elapsed
            if isinstance(seg, Hold):
                bath = seg.bath if (seg.bath and seg.bath.gamma > 0.0) else None
                slope = 0.0
            else:
                bath = None
                slope = (seg.omega_end - seg.omega_start) / seg.duration
            w_lo = seg.omega if isinstance(seg, Hold) else min(seg.omega_start, seg.omega_end)
            w_hi = seg.omega if isinstance(seg, Hold) else max(seg.omega_start, seg.omega_end)
            _check_guards(w_hi, bath, dt_seg)

            kick_index = 0
            last_kick_step = 0
            for k in range(n_steps):
                w_here = w_lo if slope == 0.0 else seg.omega_start + slope * (k * dt_seg)
                _advance(
                    x, y, tx, ty, seed, seg_id, k, w_here, slope, None, dt_seg, pool, bounds
                )
                elapsed = seg_t0 + (k + 1) * dt_seg
                last = k == n_steps - 1
                if last or (k + 1) % observer_stride == 0:
                    if bath is not None:
                        tau = ((k + 1) - last_kick_step) * dt_seg
                        _ou_kick(
                            x, y, tx, ty, seed, seg_id, kick_index, bath, seg.omega,
                            tau, pool, bounds,
                        )
                        kick_index += 1
                        last_kick_step = k + 1
                    omega_now = (
                        w_lo if slope == 0.0 else seg.omega_start + slope * ((k + 1) * dt_seg)
                    )
                    snapshots.append(
                        _make_snapshot(
                            live(seg_idx + (1 if last else 0), 0 if last else k + 1),
                            omega_now, seg_id, last, observer,
                        )
                    )
            omega = seg.omega if isinstance(seg, Hold) else seg.omega_end
    finally:
        if pool is not None:
            pool.shutdown()
    return snapshots
