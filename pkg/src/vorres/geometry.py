"""Planar geometry: windows, Voronoi tessellation, pixel grids.

Cells are convex polygons clipped to a rectangular observation window.
Construction goes through Qhull (scipy) on the pattern augmented with its
reflections across the four window edges: the bisector between a point and
its own mirror is exactly the window edge, so every cell of an original
point comes out finite and already confined to the window.  A direct
half-plane intersection builder is kept as a fallback for degenerate
Qhull output and as an independent construction path for tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Voronoi as _QhullVoronoi

__all__ = [
    "Window",
    "ConvexCell",
    "VoronoiDiagram",
    "PixelGrid",
    "tessellate",
    "triangulate_cell",
    "contains",
]


@dataclass(frozen=True)
class Window:
    """Axis-aligned rectangular observation region."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError(
                f"degenerate window [{self.xmin},{self.xmax}]x[{self.ymin},{self.ymax}]"
            )

    @property
    def area(self) -> float:
        return (self.xmax - self.xmin) * (self.ymax - self.ymin)

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    def buffered(self, margin: float) -> "Window":
        """Window expanded by `margin` on all four sides."""
        if margin < 0:
            raise ValueError("margin must be >= 0")
        return Window(self.xmin - margin, self.xmax + margin,
                      self.ymin - margin, self.ymax + margin)

    def contains(self, x, y, strict: bool = False):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if strict:
            return (x > self.xmin) & (x < self.xmax) & (y > self.ymin) & (y < self.ymax)
        return (x >= self.xmin) & (x <= self.xmax) & (y >= self.ymin) & (y <= self.ymax)

    def corners(self) -> np.ndarray:
        """Counterclockwise corner vertices."""
        return np.array([
            [self.xmin, self.ymin],
            [self.xmax, self.ymin],
            [self.xmax, self.ymax],
            [self.xmin, self.ymax],
        ])


@dataclass(frozen=True)
class ConvexCell:
    """One Voronoi cell: a convex polygon with its generator point.

    `vertices` are counterclockwise-ordered with no repeated points;
    `area` is the shoelace value; `touches_boundary` is set when any
    polygon edge lies on the window boundary.
    """

    generator: np.ndarray
    vertices: np.ndarray
    area: float
    touches_boundary: bool

    def __post_init__(self):
        object.__setattr__(self, "generator", np.asarray(self.generator, dtype=float))
        v = np.asarray(self.vertices, dtype=float)
        object.__setattr__(self, "vertices", v)
        v.setflags(write=False)
        self.generator.setflags(write=False)


@dataclass(frozen=True)
class VoronoiDiagram:
    """Tessellation of a point pattern, index-aligned with the input points."""

    window: Window
    cells: tuple[ConvexCell, ...]

    @property
    def areas(self) -> np.ndarray:
        return np.array([c.area for c in self.cells])

    @property
    def interior_mask(self) -> np.ndarray:
        """True for cells that do not touch the window boundary."""
        return np.array([not c.touches_boundary for c in self.cells])

    @property
    def generators(self) -> np.ndarray:
        return np.array([c.generator for c in self.cells])

    def __len__(self) -> int:
        return len(self.cells)


def shoelace_area(vertices: np.ndarray) -> float:
    """Unsigned polygon area by the shoelace formula."""
    x = vertices[:, 0]
    y = vertices[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _signed_area(vertices: np.ndarray) -> float:
    x = vertices[:, 0]
    y = vertices[:, 1]
    return 0.5 * (np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _clip_halfplane(vertices: np.ndarray, a: float, b: float, c: float) -> np.ndarray:
    """Clip a polygon to the half-plane a*x + b*y <= c (Sutherland-Hodgman)."""
    if len(vertices) == 0:
        return vertices
    d = a * vertices[:, 0] + b * vertices[:, 1] - c
    if np.all(d <= 0):
        return vertices
    out = []
    n = len(vertices)
    for i in range(n):
        j = (i + 1) % n
        di, dj = d[i], d[j]
        if di <= 0:
            out.append(vertices[i])
            if dj > 0:
                t = di / (di - dj)
                out.append(vertices[i] + t * (vertices[j] - vertices[i]))
        elif dj <= 0:
            t = di / (di - dj)
            out.append(vertices[i] + t * (vertices[j] - vertices[i]))
    if not out:
        return np.empty((0, 2))
    return np.asarray(out)


def _clip_to_window(vertices: np.ndarray, window: Window) -> np.ndarray:
    v = vertices
    v = _clip_halfplane(v, -1.0, 0.0, -window.xmin)
    v = _clip_halfplane(v, 1.0, 0.0, window.xmax)
    v = _clip_halfplane(v, 0.0, -1.0, -window.ymin)
    v = _clip_halfplane(v, 0.0, 1.0, window.ymax)
    return v


def _dedup_ring(vertices: np.ndarray, tol: float) -> np.ndarray:
    """Drop consecutive vertices closer than tol (cyclically)."""
    if len(vertices) < 2:
        return vertices
    keep = []
    for v in vertices:
        if not keep or np.hypot(*(v - keep[-1])) > tol:
            keep.append(v)
    if len(keep) > 1 and np.hypot(*(keep[0] - keep[-1])) <= tol:
        keep.pop()
    return np.asarray(keep)


def _order_ccw(vertices: np.ndarray) -> np.ndarray:
    """Angular sort around the vertex centroid (valid for convex rings)."""
    center = vertices.mean(axis=0)
    ang = np.arctan2(vertices[:, 1] - center[1], vertices[:, 0] - center[0])
    return vertices[np.argsort(ang)]


def _touches_window_boundary(vertices: np.ndarray, window: Window, tol: float) -> bool:
    """True when some polygon edge lies on one of the four window sides."""
    n = len(vertices)
    for k, (coord, val) in enumerate([(0, window.xmin), (0, window.xmax),
                                      (1, window.ymin), (1, window.ymax)]):
        on = np.abs(vertices[:, coord] - val) <= tol
        if on.sum() < 2:
            continue
        for i in range(n):
            j = (i + 1) % n
            if on[i] and on[j] and np.hypot(*(vertices[j] - vertices[i])) > tol:
                return True
    return False


def _halfplane_cell(points: np.ndarray, i: int, window: Window) -> np.ndarray:
    """Cell of points[i] by direct intersection of bisector half-planes.

    Candidates are processed by increasing distance from the generator so
    the loop can stop once no remaining point can cut the current polygon.
    """
    p = points[i]
    poly = window.corners()
    others = np.delete(np.arange(len(points)), i)
    d2 = np.sum((points[others] - p) ** 2, axis=1)
    for j in others[np.argsort(d2)]:
        q = points[j]
        dist_pq = np.hypot(*(q - p))
        rmax = np.sqrt(np.max(np.sum((poly - p) ** 2, axis=1)))
        if dist_pq / 2.0 > rmax:
            break
        # half-plane of locations nearer p than q: (u - m) . (q - p) <= 0
        m = 0.5 * (p + q)
        a, b = q - p
        poly = _clip_halfplane(poly, a, b, a * m[0] + b * m[1])
        if len(poly) < 3:
            break
    return poly


def _mirror_points(points: np.ndarray, window: Window) -> np.ndarray:
    reflections = [
        np.column_stack([2 * window.xmin - points[:, 0], points[:, 1]]),
        np.column_stack([2 * window.xmax - points[:, 0], points[:, 1]]),
        np.column_stack([points[:, 0], 2 * window.ymin - points[:, 1]]),
        np.column_stack([points[:, 0], 2 * window.ymax - points[:, 1]]),
    ]
    return np.vstack([points] + reflections)


def tessellate(points, window: Window) -> VoronoiDiagram:
    """Voronoi tessellation of a point pattern, clipped to the window.

    Points must lie strictly inside the window and be pairwise distinct.
    Raises ValueError naming the offending point or colliding pair.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (n, 2) array")
    n = len(pts)
    if n == 0:
        raise ValueError("need at least one point")

    inside = window.contains(pts[:, 0], pts[:, 1], strict=True)
    if not np.all(inside):
        k = int(np.argmin(inside))
        raise ValueError(
            f"point {k} at ({pts[k, 0]}, {pts[k, 1]}) is not strictly inside the window"
        )

    scale = max(window.width, window.height)
    dup_tol = 1e-12 * scale
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    for a, b in zip(order[:-1], order[1:]):
        if np.hypot(*(pts[a] - pts[b])) <= dup_tol:
            i, j = sorted((int(a), int(b)))
            raise ValueError(f"duplicate points at indices {i} and {j}")

    edge_tol = 1e-9 * scale

    if n == 1:
        verts = window.corners()
        cell = ConvexCell(generator=pts[0], vertices=verts,
                          area=shoelace_area(verts), touches_boundary=True)
        return VoronoiDiagram(window=window, cells=(cell,))

    vor = _QhullVoronoi(_mirror_points(pts, window))
    cells = []
    for i in range(n):
        region = vor.regions[vor.point_region[i]]
        if -1 in region or len(region) < 3:
            verts = _halfplane_cell(pts, i, window)
        else:
            verts = vor.vertices[np.asarray(region)]
        verts = _order_ccw(verts)
        verts = _clip_to_window(verts, window)
        verts = _dedup_ring(verts, dup_tol)
        if len(verts) < 3:
            verts = _dedup_ring(_clip_to_window(_halfplane_cell(pts, i, window), window), dup_tol)
        if _signed_area(verts) < 0:
            verts = verts[::-1]
        cells.append(ConvexCell(
            generator=pts[i],
            vertices=verts,
            area=shoelace_area(verts),
            touches_boundary=_touches_window_boundary(verts, window, edge_tol),
        ))
    return VoronoiDiagram(window=window, cells=tuple(cells))


def triangulate_cell(cell: ConvexCell) -> np.ndarray:
    """Fan triangulation from vertex 0; returns an (m, 3, 2) array."""
    v = cell.vertices
    if len(v) < 3:
        raise ValueError("cell has fewer than 3 vertices")
    if cell.area <= 0.0:
        raise ValueError("degenerate zero-area cell")
    m = len(v) - 2
    tris = np.empty((m, 3, 2))
    tris[:, 0] = v[0]
    tris[:, 1] = v[1:-1]
    tris[:, 2] = v[2:]
    return tris


def contains(cell: ConvexCell, p) -> bool:
    """Point-in-convex-polygon test with 1e-12 distance slack on each edge."""
    p = np.asarray(p, dtype=float)
    v = cell.vertices
    n = len(v)
    lo = v.min(axis=0)
    hi = v.max(axis=0)
    eps = 1e-12 * max(1.0, float(np.hypot(*(hi - lo))))
    for i in range(n):
        a = v[i]
        b = v[(i + 1) % n]
        e = b - a
        elen = math.hypot(e[0], e[1])
        if elen == 0.0:
            continue
        cross = e[0] * (p[1] - a[1]) - e[1] * (p[0] - a[0])
        if cross / elen < -eps:
            return False
    return True


def triangle_areas(tris: np.ndarray) -> np.ndarray:
    """Unsigned areas of an (m, 3, 2) triangle array."""
    a = tris[:, 1] - tris[:, 0]
    b = tris[:, 2] - tris[:, 0]
    return 0.5 * np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])


@dataclass(frozen=True)
class PixelGrid:
    """Regular nx-by-ny pixel partition of a window.

    Pixels are indexed row-major from the lower-left corner:
    index = iy * nx + ix.
    """

    window: Window
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid must have at least one pixel per axis")

    @classmethod
    def square(cls, n_pixels: int, window: Window) -> "PixelGrid":
        """n-pixel grid laid out sqrt(n) x sqrt(n); n must be a perfect square."""
        side = int(round(math.sqrt(n_pixels)))
        if side * side != n_pixels:
            raise ValueError(f"pixel count {n_pixels} is not a perfect square")
        return cls(window=window, nx=side, ny=side)

    @property
    def n_pixels(self) -> int:
        return self.nx * self.ny

    @property
    def pixel_area(self) -> float:
        return self.window.area / self.n_pixels

    def x_edges(self) -> np.ndarray:
        return np.linspace(self.window.xmin, self.window.xmax, self.nx + 1)

    def y_edges(self) -> np.ndarray:
        return np.linspace(self.window.ymin, self.window.ymax, self.ny + 1)

    def rect(self, index: int) -> tuple[float, float, float, float]:
        """(x0, x1, y0, y1) bounds of a pixel."""
        iy, ix = divmod(index, self.nx)
        xe = self.x_edges()
        ye = self.y_edges()
        return xe[ix], xe[ix + 1], ye[iy], ye[iy + 1]

    def counts(self, x, y) -> np.ndarray:
        """Per-pixel point counts (flat, row-major); points outside are ignored."""
        h, _, _ = np.histogram2d(
            np.asarray(x, dtype=float), np.asarray(y, dtype=float),
            bins=[self.x_edges(), self.y_edges()],
        )
        return h.T.ravel().astype(int)
