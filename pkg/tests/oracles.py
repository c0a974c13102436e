"""Independent naive reference implementations used as test oracles.

Everything here is deliberately written the slow, obvious way: explicit
loops, index clipping by hand, no integral volumes, no vectorized sweeps,
no code shared with the production kernels.
"""

from __future__ import annotations

import math

import numpy as np


def pad_replicate(arr: np.ndarray, factor: int) -> np.ndarray:
    """Edge-replicate pad to divisibility by gathering clipped indices."""
    dims = arr.shape
    out_dims = [((d + factor - 1) // factor) * factor for d in dims]
    idx = [np.minimum(np.arange(od), d - 1) for od, d in zip(out_dims, dims)]
    return arr[np.ix_(*idx)]


def block_means(arr: np.ndarray, factor: int) -> np.ndarray:
    """Triple loop over blocks of an already-padded array."""
    nx, ny, nz = (d // factor for d in arr.shape)
    out = np.empty((nx, ny, nz))
    for bx in range(nx):
        for by in range(ny):
            for bz in range(nz):
                block = arr[
                    bx * factor : (bx + 1) * factor,
                    by * factor : (by + 1) * factor,
                    bz * factor : (bz + 1) * factor,
                ]
                out[bx, by, bz] = block.mean()
    return out


def sliding_window_mean(arr: np.ndarray, side: int) -> np.ndarray:
    """Seven-loop clipped-window cubic mean."""
    X, Y, Z = arr.shape
    lo = -(side // 2)
    hi = side - 1 - side // 2
    out = np.empty_like(arr)
    for x in range(X):
        for y in range(Y):
            for z in range(Z):
                total = 0.0
                count = 0
                for i in range(max(0, x + lo), min(X, x + hi + 1)):
                    for j in range(max(0, y + lo), min(Y, y + hi + 1)):
                        for k in range(max(0, z + lo), min(Z, z + hi + 1)):
                            total += arr[i, j, k]
                            count += 1
                out[x, y, z] = total / count
    return out


def shift_overlaps(block: np.ndarray) -> tuple[float, float, float]:
    """Forward-difference form: o_axis = -mean of squared forward diffs / 2."""
    wx, wy, wz = block.shape
    sums = [0.0, 0.0, 0.0]
    count = (wx - 1) * (wy - 1) * (wz - 1)
    for x in range(wx - 1):
        for y in range(wy - 1):
            for z in range(wz - 1):
                sums[0] += (block[x + 1, y, z] - block[x, y, z]) ** 2
                sums[1] += (block[x, y + 1, z] - block[x, y, z]) ** 2
                sums[2] += (block[x, y, z + 1] - block[x, y, z]) ** 2
    return tuple(-0.5 * s / count for s in sums)


def window_sweep_map(arr: np.ndarray, window, stride) -> np.ndarray:
    """Per-window complexity map via explicit offsets and shift overlaps."""
    wx, wy, wz = window
    sx, sy, sz = stride
    X, Y, Z = arr.shape
    nx = (X - wx) // sx + 1
    ny = (Y - wy) // sy + 1
    nz = (Z - wz) // sz + 1
    out = np.empty((nx, ny, nz))
    for i in range(nx):
        ox = i * sx
        for j in range(ny):
            oy = j * sy
            for l in range(nz):
                oz = l * sz
                block = arr[ox : ox + wx, oy : oy + wy, oz : oz + wz]
                o_x, o_y, o_z = shift_overlaps(block)
                out[i, j, l] = -(o_x + o_y + o_z) / 3.0
    return out


def algorithm1(arr: np.ndarray, factors, window, stride):
    """Straight-line multiscale run: pad, block-average, sweep, average.

    Window and stride are clipped per axis to the downsampled extent the
    same way the production pipeline documents (floor 2 for the window,
    floor 1 for the stride). Returns (scale values, maps).
    """
    values = []
    maps = []
    for factor in factors:
        padded = pad_replicate(arr, factor) if any(d % factor for d in arr.shape) else arr
        down = block_means(padded, factor) if factor > 1 else arr
        w_used = tuple(max(2, min(w, d)) for w, d in zip(window, down.shape))
        s_used = tuple(max(1, min(s, d)) for s, d in zip(stride, down.shape))
        cmap = window_sweep_map(down, w_used, s_used)
        values.append(cmap.mean())
        maps.append(cmap)
    return values, maps


def block_cascade(arr: np.ndarray, factors):
    """Loop cascade: downsample by each factor ratio, re-upsample, overlap."""
    values = []
    current = arr
    prev = 1
    for factor in factors:
        inc = factor // prev
        prev = factor
        if inc == 1:
            values.append(0.0)
            continue
        padded = pad_replicate(current, inc) if any(d % inc for d in current.shape) else current
        down = block_means(padded, inc)
        recon = np.empty_like(current)
        X, Y, Z = current.shape
        for x in range(X):
            for y in range(Y):
                for z in range(Z):
                    recon[x, y, z] = down[x // inc, y // inc, z // inc]
        values.append(0.5 * np.mean((current - recon) ** 2))
        current = down
    return values


def pearson_mp(pairs):
    """High-precision regression oracle (50 significant digits via mpmath)."""
    import mpmath as mp

    with mp.workdps(50):
        xs = [mp.mpf(x) for x, _ in pairs]
        ys = [mp.mpf(y) for _, y in pairs]
        n = len(xs)
        xm = mp.fsum(xs) / n
        ym = mp.fsum(ys) / n
        sxx = mp.fsum((x - xm) ** 2 for x in xs)
        syy = mp.fsum((y - ym) ** 2 for y in ys)
        sxy = mp.fsum((x - xm) * (y - ym) for x, y in zip(xs, ys))
        slope = sxy / sxx
        intercept = ym - slope * xm
        r = sxy / mp.sqrt(sxx * syy)
        df = n - 2
        t_sq = r * r * df / (1 - r * r)
        x_beta = mp.mpf(df) / (df + t_sq)
        p = mp.betainc(mp.mpf(df) / 2, mp.mpf("0.5"), 0, x_beta, regularized=True)
        return float(r), float(slope), float(intercept), float(p)
