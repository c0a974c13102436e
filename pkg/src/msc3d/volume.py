"""Dense 3-D scalar fields and synthetic test phantoms.

Axis convention: volumes are indexed (x, y, z) in C order, z fastest,
matching the payload layout of the ``.npy`` files this package reads and
writes. All arithmetic is done in float64 regardless of on-disk dtype.

Phantom reproducibility: random phantoms are drawn from numpy's PCG64
generator seeded with ``PhantomSpec.rng_seed``, so a spec always yields
the same volume, bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PhantomError

PHANTOM_KINDS = ("constant", "white_noise", "axis_stripes", "smoothed_noise")
AXIS_NAMES = ("x", "y", "z")


class InvalidSpecError(PhantomError):
    """PhantomSpec violates its invariants."""


@dataclass(frozen=True, eq=False)
class Volume3D:
    """Immutable 3-D scalar field.

    The backing array is coerced to C-contiguous float64 and marked
    read-only; every voxel must be finite.
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.data, dtype=np.float64)
        if arr.ndim != 3:
            raise ValueError(f"volume must be 3-D, got ndim={arr.ndim}")
        if min(arr.shape) < 1:
            raise ValueError(f"every dimension must be >= 1, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("volume contains NaN or Inf values")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def shape(self) -> tuple[int, int, int]:
        x, y, z = self.data.shape
        return (x, y, z)

    @property
    def size(self) -> int:
        return int(self.data.size)


@dataclass(frozen=True)
class PhantomSpec:
    """Recipe for a synthetic volume.

    ``level`` is kind-specific: the fill value for ``constant``, the noise
    amplitude for ``white_noise``, the stripe amplitude for ``axis_stripes``
    and the smoothing radius (window side ``2*level + 1``) for
    ``smoothed_noise``. ``period`` only matters for ``axis_stripes``.
    """

    kind: str
    shape: tuple[int, int, int]
    level: float = 1.0
    period: int = 1
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in PHANTOM_KINDS:
            raise InvalidSpecError(
                f"unknown phantom kind {self.kind!r}; expected one of {PHANTOM_KINDS}"
            )
        if len(self.shape) != 3 or min(self.shape) < 1:
            raise InvalidSpecError(f"shape must be a positive triple, got {self.shape}")
        if not np.isfinite(self.level) or self.level < 0:
            raise InvalidSpecError(f"level must be finite and >= 0, got {self.level}")
        if self.period < 1:
            raise InvalidSpecError(f"stripe period must be >= 1, got {self.period}")
        if self.kind == "smoothed_noise" and self.level != int(self.level):
            raise InvalidSpecError(
                f"smoothing radius must be an integer, got {self.level}"
            )
        if self.rng_seed < 0:
            raise InvalidSpecError(f"rng_seed must be >= 0, got {self.rng_seed}")


def spatial_mean(v: Volume3D) -> float:
    """Arithmetic mean over all voxels."""
    return float(np.mean(v.data))


def pad_to_multiple(v: Volume3D, factor: int) -> Volume3D:
    """Edge-replicate pad so each dimension becomes a multiple of ``factor``.

    The original region is unchanged; padding is appended at the high end
    of each axis. Already-divisible volumes are returned as-is.
    """
    if factor < 1:
        raise ValueError(f"factor must be >= 1, got {factor}")
    pads = tuple((-dim) % factor for dim in v.shape)
    if not any(pads):
        return v
    padded = np.pad(v.data, [(0, p) for p in pads], mode="edge")
    return Volume3D(padded)


def _axis_index(axis: int | str) -> int:
    if isinstance(axis, str):
        name = axis.lower()
        if name not in AXIS_NAMES:
            raise ValueError(f"axis must be one of {AXIS_NAMES}, got {axis!r}")
        return AXIS_NAMES.index(name)
    if axis not in (0, 1, 2):
        raise ValueError(f"axis must be 0, 1 or 2, got {axis}")
    return axis


def mid_slice(v: Volume3D, axis: int | str) -> np.ndarray:
    """The plane at index ``floor(dim/2)`` along the chosen axis."""
    ax = _axis_index(axis)
    return np.take(v.data, v.shape[ax] // 2, axis=ax)


def generate_phantom(spec: PhantomSpec) -> Volume3D:
    """Deterministically build the volume described by ``spec``.

    white_noise draws i.i.d. uniforms in [0, level); smoothed_noise applies
    a cubic sliding mean of side ``2*level + 1`` to unit-amplitude noise;
    axis_stripes alternates 0 and ``level`` along x, switching every
    ``period`` voxels starting with 0.
    """
    x, y, z = spec.shape
    if spec.kind == "constant":
        return Volume3D(np.full(spec.shape, float(spec.level)))
    if spec.kind == "axis_stripes":
        stripe = (np.arange(x) // spec.period) % 2
        vals = spec.level * stripe.astype(np.float64)
        return Volume3D(np.broadcast_to(vals[:, None, None], spec.shape).copy())
    rng = np.random.Generator(np.random.PCG64(spec.rng_seed))
    if spec.kind == "white_noise":
        return Volume3D(rng.random(spec.shape) * spec.level)
    # smoothed_noise: reuse the box-filter fast path on unit noise
    from .coarse import sliding_mean_integral

    noise = Volume3D(rng.random(spec.shape))
    side = 2 * int(spec.level) + 1
    return sliding_mean_integral(noise, side)
