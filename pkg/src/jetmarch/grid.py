"""Regular 2D grid geometry: node coordinates, neighborhoods, cell topology.

Nodes live at ``(xmin + i*h, ymin + j*h)`` for ``0 <= i, j < M`` and sit on
the domain boundary.  Per-node fields are stored flat in row-major order
(``flat = i*M + j``) so index math in the marching loop is O(1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Counterclockwise king-move ring starting from (+1, 0).  A fixed ordering
# keeps update enumeration and tie-breaking deterministic.
RING8 = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))
RING4 = ((1, 0), (0, 1), (-1, 0), (0, -1))

STENCILS = ("four", "eight")


def _ring(stencil):
    if stencil == "eight":
        return RING8
    if stencil == "four":
        return RING4
    raise ValueError(f"unknown stencil {stencil!r}, expected one of {STENCILS}")


@dataclass(frozen=True)
class Grid2:
    """Square-cell lattice with M nodes per axis and spacing h.

    Parameters
    ----------
    xmin, ymin : float
        Physical coordinates of node (0, 0).
    M : int
        Nodes per axis, at least 2.
    h : float
        Node spacing, positive.
    """

    xmin: float
    ymin: float
    M: int
    h: float

    def __post_init__(self):
        if self.M < 2:
            raise ValueError("grid needs at least 2 nodes per axis")
        if not self.h > 0:
            raise ValueError("node spacing must be positive")

    @classmethod
    def from_domain(cls, xmin, ymin, extent, M):
        """Grid covering ``[xmin, xmin+extent] x [ymin, ymin+extent]``."""
        return cls(xmin, ymin, M, extent / (M - 1))

    # -- node indexing ---------------------------------------------------

    @property
    def node_count(self):
        return self.M * self.M

    @property
    def cell_count(self):
        return (self.M - 1) * (self.M - 1)

    def contains(self, n):
        i, j = n
        return 0 <= i < self.M and 0 <= j < self.M

    def point(self, n):
        return (self.xmin + n[0] * self.h, self.ymin + n[1] * self.h)

    def flat(self, n):
        return n[0] * self.M + n[1]

    def unflat(self, k):
        return (k // self.M, k % self.M)

    def axes(self):
        """Coordinate arrays (x_i, y_j), each of length M."""
        idx = np.arange(self.M)
        return self.xmin + idx * self.h, self.ymin + idx * self.h

    def points(self):
        """All node coordinates as an (M, M, 2) array."""
        x, y = self.axes()
        out = np.empty((self.M, self.M, 2))
        out[..., 0] = x[:, None]
        out[..., 1] = y[None, :]
        return out

    # -- neighborhoods ---------------------------------------------------

    def neighbors8(self, n):
        """Up to 8 nodes at Chebyshev distance 1, in fixed CCW order."""
        i, j = n
        return [
            (i + di, j + dj)
            for di, dj in RING8
            if self.contains((i + di, j + dj))
        ]

    def neighbors4(self, n):
        """Axis-aligned neighbors, boundary-clipped."""
        i, j = n
        return [
            (i + di, j + dj)
            for di, dj in RING4
            if self.contains((i + di, j + dj))
        ]

    def update_triangles(self, n, stencil="eight"):
        """Adjacent neighbor pairs forming triangle-update bases.

        Consecutive in-grid pairs of the stencil ring; every returned pair
        spans a nondegenerate triangle of area h**2/2 with ``n``.
        """
        ring = _ring(stencil)
        i, j = n
        r = len(ring)
        pairs = []
        for k in range(r):
            a = (i + ring[k][0], j + ring[k][1])
            b = (i + ring[(k + 1) % r][0], j + ring[(k + 1) % r][1])
            if self.contains(a) and self.contains(b):
                pairs.append((a, b))
        return pairs

    # -- cells -------------------------------------------------------------

    def cell_flat(self, c):
        return c[0] * (self.M - 1) + c[1]

    def cell_corners(self, c):
        """Corner nodes of cell c, CCW from the lower-left corner."""
        ci, cj = c
        if not (0 <= ci < self.M - 1 and 0 <= cj < self.M - 1):
            raise ValueError(f"cell {c} outside grid")
        return [(ci, cj), (ci + 1, cj), (ci + 1, cj + 1), (ci, cj + 1)]

    def cells_incident(self, n):
        """Cells having node n as a corner (up to 4)."""
        i, j = n
        out = []
        for ci in (i - 1, i):
            for cj in (j - 1, j):
                if 0 <= ci < self.M - 1 and 0 <= cj < self.M - 1:
                    out.append((ci, cj))
        return out
