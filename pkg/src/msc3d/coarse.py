"""Coarse-graining kernels: block averaging and sliding cubic means.

Two sliding-mean implementations are provided on purpose. ``sliding_mean``
accumulates per-axis running sums; ``sliding_mean_integral`` uses a 3-D
summed-volume table, making its cost independent of the window side. Both
honor the same contract and are cross-checked against a plain loop oracle
in the test suite.

Window placement for even sides: a window of side ``s`` centered at voxel
``i`` spans ``i - s//2 .. i + s - 1 - s//2`` inclusive per axis (for even
``s`` that is s/2 voxels before and s/2 - 1 after). At volume boundaries
the window is clipped and the mean renormalized by the in-bounds count.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeMismatchError
from .volume import Volume3D, pad_to_multiple


def block_downsample(v: Volume3D, factor: int) -> Volume3D:
    """Replace each ``factor**3`` block by its mean.

    The volume is edge-padded to divisibility first, so the output shape is
    ``ceil(dim / factor)`` per axis.
    """
    if factor < 1:
        raise ValueError(f"factor must be >= 1, got {factor}")
    if factor == 1:
        return v
    padded = pad_to_multiple(v, factor).data
    nx, ny, nz = (dim // factor for dim in padded.shape)
    blocks = (
        padded.reshape(nx, factor, ny, factor, nz, factor)
        .transpose(0, 2, 4, 1, 3, 5)
        .reshape(nx, ny, nz, factor**3)
    )
    return Volume3D(blocks.mean(axis=3))


def block_upsample(v: Volume3D, factor: int, target_shape: tuple[int, int, int]) -> Volume3D:
    """Replicate each voxel over a ``factor**3`` block, cropped to ``target_shape``."""
    if factor < 1:
        raise ValueError(f"factor must be >= 1, got {factor}")
    if len(target_shape) != 3 or min(target_shape) < 1:
        raise ShapeMismatchError(f"target_shape must be a positive triple, got {target_shape}")
    for dim, tdim in zip(v.shape, target_shape):
        if tdim > dim * factor:
            raise ShapeMismatchError(
                f"target_shape {target_shape} exceeds upsampled extent of {v.shape} x {factor}"
            )
    if factor == 1 and tuple(target_shape) == v.shape:
        return v
    arr = v.data
    for axis in range(3):
        arr = np.repeat(arr, factor, axis=axis)
    tx, ty, tz = target_shape
    return Volume3D(arr[:tx, :ty, :tz])


def _window_bounds(n: int, side: int) -> tuple[np.ndarray, np.ndarray]:
    """Clipped inclusive (lo, hi) window bounds for every position on an axis."""
    pos = np.arange(n)
    lo = np.clip(pos - side // 2, 0, n - 1)
    hi = np.clip(pos + (side - 1 - side // 2), 0, n - 1)
    return lo, hi


def sliding_mean(v: Volume3D, side: int) -> Volume3D:
    """Mean over the cubic window of ``side`` centered at each voxel.

    Output shape equals input shape; boundary windows are clipped and
    renormalized. Implemented as three per-axis running-sum passes.
    """
    if side < 1:
        raise ValueError(f"side must be >= 1, got {side}")
    if side == 1:
        return v
    # Working relative to the first voxel keeps constant fields exact and
    # bounds the magnitude of the running sums.
    offset = float(v.data.flat[0])
    sums = v.data - offset
    count = np.ones((), dtype=np.float64)
    for axis in range(3):
        n = v.shape[axis]
        lo, hi = _window_bounds(n, side)
        prefix_shape = list(sums.shape)
        prefix_shape[axis] += 1
        prefix = np.zeros(prefix_shape)
        idx = [slice(None)] * 3
        idx[axis] = slice(1, None)
        prefix[tuple(idx)] = np.cumsum(sums, axis=axis)
        sums = np.take(prefix, hi + 1, axis=axis) - np.take(prefix, lo, axis=axis)
        axis_count = (hi - lo + 1).astype(np.float64)
        shape = [1, 1, 1]
        shape[axis] = n
        count = count * axis_count.reshape(shape)
    return Volume3D(sums / count + offset)


def sliding_mean_integral(v: Volume3D, side: int) -> Volume3D:
    """Same contract as :func:`sliding_mean`, via a 3-D summed-volume table.

    Box sums are recovered by inclusion-exclusion over the 8 corners, so the
    cost does not depend on ``side``.
    """
    if side < 1:
        raise ValueError(f"side must be >= 1, got {side}")
    if side == 1:
        return v
    offset = float(v.data.flat[0])
    arr = v.data - offset
    x, y, z = arr.shape
    table = np.zeros((x + 1, y + 1, z + 1))
    table[1:, 1:, 1:] = arr.cumsum(axis=0).cumsum(axis=1).cumsum(axis=2)

    bounds = [_window_bounds(n, side) for n in arr.shape]
    (xlo, xhi), (ylo, yhi), (zlo, zhi) = bounds
    x1, y1, z1 = xhi + 1, yhi + 1, zhi + 1
    sums = (
        table[np.ix_(x1, y1, z1)]
        - table[np.ix_(xlo, y1, z1)]
        - table[np.ix_(x1, ylo, z1)]
        - table[np.ix_(x1, y1, zlo)]
        + table[np.ix_(xlo, ylo, z1)]
        + table[np.ix_(xlo, y1, zlo)]
        + table[np.ix_(x1, ylo, zlo)]
        - table[np.ix_(xlo, ylo, zlo)]
    )
    counts = (
        (xhi - xlo + 1).astype(np.float64)[:, None, None]
        * (yhi - ylo + 1).astype(np.float64)[None, :, None]
        * (zhi - zlo + 1).astype(np.float64)[None, None, :]
    )
    return Volume3D(sums / counts + offset)
