"""Block partitions of lattice sets, sparsity predicates and residue-separated sums."""
from dataclasses import dataclass

import numpy as np

from ..errors import ModulusNotDivisible, PreconditionViolated


@dataclass(frozen=True)
class BlockPartition:
    """q-blocks of Z^d (modulus None) or q-blocks taken modulo Q (q divides Q)."""
    q: int
    Q: int | None = None

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("block side must be >= 1")
        if self.Q is not None and self.Q % self.q:
            raise ModulusNotDivisible(f"q={self.q} does not divide Q={self.Q}")

    @property
    def kind(self):
        return "plain" if self.Q is None else "modular"

    def keys(self, points):
        pts = np.asarray(points, dtype=np.int64)
        if self.Q is not None:
            pts = np.mod(pts, self.Q)
        return np.floor_divide(pts, self.q)


def plain(q):
    return BlockPartition(int(q))


def modular(q, Q):
    return BlockPartition(int(q), int(Q))


def cell_labels(points, kind):
    """Integer cell label per point, labels numbered in lexicographic order of cell keys."""
    keys = kind.keys(points)
    _, labels = np.unique(keys, axis=0, return_inverse=True)
    return labels.reshape(-1)


def build_partition_blocks(kind, points):
    """Cells of `kind` restricted to the given points, each cell a sorted index array."""
    labels = cell_labels(points, kind)
    order = np.argsort(labels, kind="stable")
    bounds = np.flatnonzero(np.diff(labels[order])) + 1
    return [np.sort(c) for c in np.split(order, bounds)]


def digit_box(M, s, d):
    """All points of {0..s(M-1)}^d in lexicographic order."""
    top = s * (M - 1)
    axes = [np.arange(top + 1, dtype=np.int64)] * d
    return np.array(np.meshgrid(*axes, indexing="ij")).reshape(d, -1).T


def block_collision(A, kind):
    """First pair of points of A sharing a cell, or None."""
    pts = np.asarray(A, dtype=np.int64).reshape(len(A), -1)
    if len(pts) < 2:
        return None
    keys = kind.keys(pts)
    _, first, inv = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    inv = inv.reshape(-1)
    clash = np.flatnonzero(first[inv] != np.arange(len(pts)))
    if len(clash) == 0:
        return None
    j = int(clash[0])
    i = int(first[inv[j]])
    return tuple(int(v) for v in pts[i]), tuple(int(v) for v in pts[j])


def is_block_sparse(A, kind):
    return block_collision(A, kind) is None


def residue_separated_sum(A_grid, A_sparse, q, Q):
    """Sumset of a subset of Q Z^d and a set that is q-block sparse modulo Q.

    Returns the sumset (sorted, one row per pair) and the index pairs (i, j) that
    produced each row; the pairs form a bijection with the product set.
    """
    A_grid = np.asarray(A_grid, dtype=np.int64)
    A_sparse = np.asarray(A_sparse, dtype=np.int64)
    kind = modular(q, Q)
    off = np.flatnonzero(np.any(np.mod(A_grid, Q) != 0, axis=1))
    if len(off):
        v = tuple(int(x) for x in A_grid[off[0]])
        raise PreconditionViolated(f"grid point {v} is not in Q Z^d", witness=v)
    clash = block_collision(A_sparse, kind)
    if clash is not None:
        raise PreconditionViolated(f"points {clash} share a q-block modulo Q", witness=clash)
    ii, jj = np.meshgrid(np.arange(len(A_grid)), np.arange(len(A_sparse)), indexing="ij")
    ii = ii.ravel()
    jj = jj.ravel()
    sums = A_grid[ii] + A_sparse[jj]
    order = np.lexsort(sums.T[::-1])
    sums, ii, jj = sums[order], ii[order], jj[order]
    distinct = len(np.unique(sums, axis=0)) == len(sums)
    if not distinct or not is_block_sparse(sums, plain(q)):
        # unreachable when the preconditions hold; kept as a certificate
        raise PreconditionViolated("addition map is not injective", witness=None)
    return sums, np.stack([ii, jj], axis=1)
