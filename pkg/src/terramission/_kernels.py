"""Visibility hot kernels: frustum culling + ray-marched voxel occlusion.

Two interchangeable backends producing identical results:

* a numba @njit scalar kernel (default when numba imports), and
* a vectorized pure-numpy fallback.

Set TERRAMISSION_NO_NUMBA=1 to force the numpy path. The arithmetic is
written identically in both (same operations, same order per element) so
outputs are bit-equal; benchmarks/bench_visibility.py compares the two.
"""

import os

import numpy as np

_DISABLED = os.environ.get("TERRAMISSION_NO_NUMBA", "") not in ("", "0")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def _visible_mask_py(
    points, cam, fwd, right, up, tan_h, tan_v, max_range, occ, gmin, voxel, slack
):
    n = points.shape[0]
    out = np.zeros(n, dtype=np.bool_)
    max_r2 = max_range * max_range
    h = voxel * 0.5
    nx, ny, nz = occ.shape
    for i in range(n):
        vx = points[i, 0] - cam[0]
        vy = points[i, 1] - cam[1]
        vz = points[i, 2] - cam[2]
        d2 = vx * vx + vy * vy + vz * vz
        if d2 > max_r2:
            continue
        zc = vx * fwd[0] + vy * fwd[1] + vz * fwd[2]
        if zc <= 0.0:
            continue
        xc = vx * right[0] + vy * right[1] + vz * right[2]
        if abs(xc) > zc * tan_h:
            continue
        yc = vx * up[0] + vy * up[1] + vz * up[2]
        if abs(yc) > zc * tan_v:
            continue
        d = np.sqrt(d2)
        limit = d - slack
        pvx = int(np.floor((points[i, 0] - gmin[0]) / voxel))
        pvy = int(np.floor((points[i, 1] - gmin[1]) / voxel))
        pvz = int(np.floor((points[i, 2] - gmin[2]) / voxel))
        blocked = False
        if limit > 0.0 and d > 0.0:
            steps = int(limit / h)
            for k in range(1, steps + 1):
                t = k * h
                sx = cam[0] + vx / d * t
                sy = cam[1] + vy / d * t
                sz = cam[2] + vz / d * t
                ix = int(np.floor((sx - gmin[0]) / voxel))
                iy = int(np.floor((sy - gmin[1]) / voxel))
                iz = int(np.floor((sz - gmin[2]) / voxel))
                if ix < 0 or iy < 0 or iz < 0 or ix >= nx or iy >= ny or iz >= nz:
                    continue
                if occ[ix, iy, iz] and not (ix == pvx and iy == pvy and iz == pvz):
                    blocked = True
                    break
        if not blocked:
            out[i] = True
    return out


def _visible_mask_np(
    points, cam, fwd, right, up, tan_h, tan_v, max_range, occ, gmin, voxel, slack
):
    v = points - cam  # (n, 3)
    d2 = np.einsum("ij,ij->i", v, v)
    zc = v @ fwd
    xc = v @ right
    yc = v @ up
    cand = (
        (d2 <= max_range * max_range)
        & (zc > 0.0)
        & (np.abs(xc) <= zc * tan_h)
        & (np.abs(yc) <= zc * tan_v)
    )
    out = np.zeros(points.shape[0], dtype=np.bool_)
    idx = np.flatnonzero(cand)
    if idx.size == 0:
        return out

    h = voxel * 0.5
    shape = np.array(occ.shape)
    pv = np.floor((points[idx] - gmin) / voxel).astype(np.int64)
    d = np.sqrt(d2[idx])
    limit = d - slack
    steps = np.where((limit > 0.0) & (d > 0.0), (limit / h).astype(np.int64), 0)
    blocked = np.zeros(idx.size, dtype=np.bool_)

    # Chunk candidate points so the (points x steps) sample block stays small.
    max_steps = int(steps.max()) if steps.size else 0
    if max_steps > 0:
        dirs = v[idx] / d[:, None]
        chunk = max(1, int(2_000_000 / max(max_steps, 1)))
        ks = np.arange(1, max_steps + 1)
        for s in range(0, idx.size, chunk):
            e = min(s + chunk, idx.size)
            t = ks[None, :] * h  # (1, S)
            valid = ks[None, :] <= steps[s:e, None]
            samples = cam + dirs[s:e, None, :] * t[:, :, None]  # (c, S, 3)
            cells = np.floor((samples - gmin) / voxel).astype(np.int64)
            in_grid = ((cells >= 0) & (cells < shape)).all(axis=2)
            cc = np.clip(cells, 0, shape - 1)
            hit = occ[cc[:, :, 0], cc[:, :, 1], cc[:, :, 2]]
            own = (cells == pv[s:e, None, :]).all(axis=2)
            blocked[s:e] = (valid & in_grid & hit & ~own).any(axis=1)

    out[idx[~blocked]] = True
    return out


if HAVE_NUMBA:
    visible_mask = njit(cache=True)(_visible_mask_py)
else:
    visible_mask = _visible_mask_np

visible_mask_numpy = _visible_mask_np
visible_mask_python = _visible_mask_py
