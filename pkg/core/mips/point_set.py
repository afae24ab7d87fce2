"""
Point sets indexed for maximum inner product search.

A PointSet is immutable after construction: points are stored sorted by id,
so row order and id order agree and "smallest id" tie-breaks reduce to
"smallest row". CSV format: one row per point, d comma-separated decimals,
no header; ids are the row numbers unless given explicitly.
"""
from __future__ import annotations
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

NORM_TOLERANCE = 1e-12


class PointSet:
    """K points with ||p||_2 <= 1 and unique integer ids."""

    def __init__(self, points, ids: Optional[Sequence[int]] = None):
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("a PointSet needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points contain non-finite values")

        if ids is None:
            id_arr = np.arange(pts.shape[0], dtype=np.int64)
        else:
            id_arr = np.asarray(ids, dtype=np.int64).reshape(-1)
            if id_arr.shape[0] != pts.shape[0]:
                raise ValueError(f"{id_arr.shape[0]} ids for {pts.shape[0]} points")
            if np.unique(id_arr).shape[0] != id_arr.shape[0]:
                raise ValueError("point ids must be unique")

        norms = np.linalg.norm(pts, axis=1)
        worst = int(np.argmax(norms))
        if norms[worst] > 1.0 + NORM_TOLERANCE:
            raise ValueError(
                f"point id={int(id_arr[worst])} has norm {norms[worst]:.15g} > 1"
            )

        order = np.argsort(id_arr, kind="stable")
        self._points = np.ascontiguousarray(pts[order])
        self._ids = id_arr[order]
        self._points.setflags(write=False)
        self._ids.setflags(write=False)
        self._row_of = {int(i): r for r, i in enumerate(self._ids)}

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def ids(self) -> np.ndarray:
        return self._ids

    @property
    def dim(self) -> int:
        return int(self._points.shape[1])

    @property
    def size(self) -> int:
        return int(self._points.shape[0])

    def __len__(self) -> int:
        return self.size

    def row(self, point_id: int) -> int:
        try:
            return self._row_of[int(point_id)]
        except KeyError:
            raise ValueError(f"unknown point id: {point_id}") from None

    def vector(self, point_id: int) -> np.ndarray:
        return self._points[self.row(point_id)]

    def subset(self, point_ids: Sequence[int]) -> "PointSet":
        rows = [self.row(i) for i in point_ids]
        return PointSet(self._points[rows], ids=self._ids[rows])

    def map(self, fn) -> "PointSet":
        """New PointSet with fn applied row-wise, ids preserved."""
        return PointSet(fn(self._points), ids=self._ids)

    # --- CSV ---

    @classmethod
    def from_csv(cls, path: str | Path) -> "PointSet":
        data = np.loadtxt(Path(path), delimiter=",", ndmin=2, dtype=np.float64)
        return cls(data)

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        np.savetxt(path, self._points, delimiter=",", fmt="%.17g")
        return path
