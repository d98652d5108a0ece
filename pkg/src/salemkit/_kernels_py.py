"""Pure-numpy versions of the compiled kernels, with identical signatures."""
import math

import numpy as np

_CHUNK = 1 << 22


def exp_sum(pts, w, inv_scale, xi):
    pts = np.asarray(pts, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    xi = np.asarray(xi, dtype=np.float64)
    out = np.empty(xi.shape[0], dtype=np.complex128)
    step = max(1, _CHUNK // max(1, pts.shape[0]))
    for j0 in range(0, xi.shape[0], step):
        ph = (xi[j0:j0 + step] @ pts.T) * (-2.0 * math.pi * inv_scale)
        out[j0:j0 + step] = (np.cos(ph) + 1j * np.sin(ph)) @ w
    return out


def ball_sums(pts, w, centers, lhs_mul, rhs):
    pts = np.asarray(pts, dtype=np.int64)
    w = np.asarray(w, dtype=np.int64)
    centers = np.asarray(centers, dtype=np.int64)
    out = np.zeros(centers.shape[0], dtype=np.int64)
    step = max(1, _CHUNK // max(1, pts.shape[0]))
    for j0 in range(0, centers.shape[0], step):
        c = centers[j0:j0 + step]
        diff = pts[None, :, :] - c[:, None, :]
        s = np.einsum("jkl,jkl->jk", diff, diff)
        out[j0:j0 + step] = np.where(lhs_mul * s < rhs, w[None, :], 0).sum(axis=1)
    return out


def grid_disc_counts(cum, centers, R2):
    cum = np.asarray(cum, dtype=np.int64)
    centers = np.asarray(centers, dtype=np.int64)
    G0, G1 = cum.shape[0], cum.shape[1] - 1
    R = math.isqrt(int(R2))
    out = np.zeros(centers.shape[0], dtype=np.int64)
    cy, cx = centers[:, 0], centers[:, 1]
    for dy in range(-R, R + 1):
        if dy * dy >= R2:
            continue
        half = math.isqrt(int(R2) - dy * dy - 1)
        row = cy + dy
        ok = (row >= 0) & (row < G0)
        lo = np.clip(cx - half, 0, G1)
        hi = np.clip(cx + half + 1, 0, G1)
        r = np.where(ok, row, 0)
        val = cum[r, hi] - cum[r, lo]
        out += np.where(ok & (hi > lo), val, 0)
    return out
