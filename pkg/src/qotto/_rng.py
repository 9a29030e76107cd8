"""Counter-based Gaussian noise streams for reproducible parallel stepping.

Every random number is a pure function of (seed, context, segment, step,
component, particle index), produced by the splitmix64 output mixer in
counter mode.  Because nothing is stateful, any partitioning of the
particle range across workers regenerates bit-identical noise, and two
schedules that share a segment layout reuse identical bath kicks.

Normals come from Box-Muller on two counter-derived uniforms, which
consumes a fixed number of draws per particle (rejection-free), so the
draw-index -> particle mapping never depends on previous values.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA_INT = 0x9E3779B97F4A7C15  # golden-gamma counter increment
_GAMMA = np.uint64(_GAMMA_INT)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)

# Context tags keep independent uses of the same seed decorrelated.
CTX_INIT = 0x1B873593  # sampling initial ensembles
CTX_BATH = 0xCC9E2D51  # bath kicks during stepping

_TWO_NEG53 = 2.0 ** -53


def _mix_int(z: int) -> int:
    """splitmix64 finalizer on a Python int, masked to 64 bits."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _subkey(seed: int, ctx: int, segment: int, step: int, component: int) -> np.uint64:
    k = _mix_int((seed & _MASK) * _GAMMA_INT ^ ctx)
    k = _mix_int(k + segment * _GAMMA_INT)
    k = _mix_int(k + step * _GAMMA_INT)
    return np.uint64(_mix_int(k + component * 0x632BE59BD9B4E019))


_INDEX_CACHE: dict[int, np.ndarray] = {}


def _indices(count: int) -> np.ndarray:
    idx = _INDEX_CACHE.get(count)
    if idx is None:
        idx = np.arange(count, dtype=np.uint64) * _GAMMA
        if len(_INDEX_CACHE) > 8:
            _INDEX_CACHE.clear()
        _INDEX_CACHE[count] = idx
    return idx


def _uniforms(key: np.uint64, idx: np.ndarray) -> np.ndarray:
    """Uniforms in (0, 1] for pre-scaled counter values `idx`."""
    with np.errstate(over="ignore"):
        z = key + idx
        z ^= z >> np.uint64(30)
        z *= _M1
        z ^= z >> np.uint64(27)
        z *= _M2
        z ^= z >> np.uint64(31)
        z >>= np.uint64(11)
        z += np.uint64(1)
    return z * _TWO_NEG53


def normals(
    seed: int, ctx: int, segment: int, step: int, count: int
) -> tuple[np.ndarray, np.ndarray]:
    """Two arrays of `count` independent standard normals.

    Particle i draws its pair from counter position i of two per-component
    streams, so a worker handling a slice of particles regenerates exactly
    its slice of this stream.  Intermediate work is done in place; this is
    the hot path of every bath-coupled time step.
    """
    idx = _indices(count)
    u1 = _uniforms(_subkey(seed, ctx, segment, step, 0), idx)
    u2 = _uniforms(_subkey(seed, ctx, segment, step, 1), idx)
    np.log(u1, out=u1)
    u1 *= -2.0
    np.sqrt(u1, out=u1)  # Box-Muller radius
    u2 *= 2.0 * np.pi
    out_cos = np.cos(u2)
    np.sin(u2, out=u2)
    out_cos *= u1
    u2 *= u1
    return out_cos, u2
