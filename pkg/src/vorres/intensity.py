"""Conditional intensity models and their integrals over cells and pixels.

Builtin spatial families (homogeneous, product_xy, indicator, beta_family,
user_grid) are purely spatial; the etas kind is spatial-temporal and is
integrated over its declared time span, using the closed-form antiderivative
of the (t + c)^-p decay in time and adaptive triangle quadrature in space.

Quadrature pairs a degree-2 and a degree-5 rule on each triangle of a fan
triangulation; their disagreement is the local error estimate, and
triangles are dyadically subdivided until each cell's estimate passes its
relative tolerance (default 1e-4 builtin, 1e-3 etas) or the depth cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from vorres.catalog import Catalog
from vorres.geometry import ConvexCell, PixelGrid, Window, triangulate_cell

__all__ = [
    "IntensityModel",
    "EtasParams",
    "CellIntegral",
    "c_beta",
    "evaluate",
    "integrate_cell",
    "integrate_cells",
    "integrate_pixels",
    "integrate_window",
    "etas_branching_ratio",
]

BUILTIN_KINDS = ("homogeneous", "product_xy", "indicator", "beta_family", "user_grid")
KINDS = BUILTIN_KINDS + ("etas",)

DEFAULT_REL_TOL = {"etas": 1e-3}
DEFAULT_REL_TOL_BUILTIN = 1e-4
MAX_REFINE_DEPTH = 12


def c_beta(beta: float) -> float:
    """Normalizer making the tent-product term integrate to one on the unit square."""
    if beta <= 0:
        raise ValueError("beta must be > 0")
    return ((beta + 1.0) * 2.0 ** beta) ** 2


@dataclass(frozen=True)
class EtasParams:
    """ETAS parameter block: background rate plus triggering kernel constants.

    The triggering kernel is K (t + c)^-p exp(a (M - M0)) (r^2 + d)^-q and
    the background is mu * rho with rho the uniform density 1/|S|.
    """

    mu: float
    K: float
    c: float
    p: float
    a: float
    M0: float
    d: float
    q: float
    rho: float

    def __post_init__(self):
        checks = [
            ("mu", self.mu >= 0),
            ("K", self.K >= 0),
            ("c", self.c > 0),
            ("p", self.p > 1),
            ("a", self.a > 0),
            ("d", self.d > 0),
            ("q", self.q > 1),
            ("rho", self.rho > 0),
        ]
        for name, ok in checks:
            if not ok:
                raise ValueError(f"ETAS parameter {name}={getattr(self, name)} out of range")

    def time_kernel_mass(self) -> float:
        """Integral of (t + c)^-p over all positive lags."""
        return self.c ** (1.0 - self.p) / (self.p - 1.0)

    def space_kernel_mass(self) -> float:
        """Integral of (r^2 + d)^-q over the whole plane."""
        return math.pi * self.d ** (1.0 - self.q) / (self.q - 1.0)

    def offspring_mean(self, mag: float) -> float:
        """Expected direct offspring of an event with the given magnitude."""
        return (self.K * math.exp(self.a * (mag - self.M0))
                * self.time_kernel_mass() * self.space_kernel_mass())


def etas_branching_ratio(params: EtasParams, b: float = 1.0) -> float:
    """Expected offspring per event with Gutenberg-Richter magnitudes.

    Magnitudes are exponential above M0 with rate b*ln(10); the ratio is
    infinite when the productivity exponent reaches that rate.
    """
    beta_m = b * math.log(10.0)
    if params.a >= beta_m:
        return math.inf
    mag_factor = beta_m / (beta_m - params.a)
    return params.K * params.time_kernel_mass() * params.space_kernel_mass() * mag_factor


@dataclass(frozen=True, eq=False)
class UserGrid:
    """Tabulated intensity on a complete rectangular lattice of pixel centers."""

    x_centers: np.ndarray
    y_centers: np.ndarray
    rates: np.ndarray  # (ny, nx)

    def __post_init__(self):
        x = np.asarray(self.x_centers, dtype=float)
        y = np.asarray(self.y_centers, dtype=float)
        r = np.asarray(self.rates, dtype=float)
        if x.ndim != 1 or y.ndim != 1 or r.shape != (len(y), len(x)):
            raise ValueError("rates must be (len(y_centers), len(x_centers))")
        if np.any(np.diff(x) <= 0) or np.any(np.diff(y) <= 0):
            raise ValueError("grid centers must be strictly increasing")
        if np.any(r < 0):
            raise ValueError("grid rates must be nonnegative")
        object.__setattr__(self, "x_centers", x)
        object.__setattr__(self, "y_centers", y)
        object.__setattr__(self, "rates", r)

    def interpolate(self, x, y) -> np.ndarray:
        """Bilinear interpolation, clamped to the lattice hull."""
        xq = np.clip(np.asarray(x, dtype=float), self.x_centers[0], self.x_centers[-1])
        yq = np.clip(np.asarray(y, dtype=float), self.y_centers[0], self.y_centers[-1])
        ix = np.clip(np.searchsorted(self.x_centers, xq) - 1, 0, len(self.x_centers) - 2)
        iy = np.clip(np.searchsorted(self.y_centers, yq) - 1, 0, len(self.y_centers) - 2)
        x0 = self.x_centers[ix]
        x1 = self.x_centers[ix + 1]
        y0 = self.y_centers[iy]
        y1 = self.y_centers[iy + 1]
        tx = np.where(x1 > x0, (xq - x0) / (x1 - x0), 0.0)
        ty = np.where(y1 > y0, (yq - y0) / (y1 - y0), 0.0)
        r00 = self.rates[iy, ix]
        r01 = self.rates[iy, ix + 1]
        r10 = self.rates[iy + 1, ix]
        r11 = self.rates[iy + 1, ix + 1]
        return ((1 - ty) * ((1 - tx) * r00 + tx * r01)
                + ty * ((1 - tx) * r10 + tx * r11))


@dataclass(frozen=True, eq=False)
class IntensityModel:
    """Evaluable conditional intensity with a declared parameterization."""

    kind: str
    params: dict
    window: Window
    time_span: tuple[float, float] | None = None
    etas: EtasParams | None = None
    grid: UserGrid | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")

    # -- constructors -------------------------------------------------

    @classmethod
    def homogeneous(cls, rate: float, window: Window) -> "IntensityModel":
        if rate < 0:
            raise ValueError("parameter rate must be >= 0")
        return cls(kind="homogeneous", params={"rate": float(rate)}, window=window)

    @classmethod
    def product_xy(cls, window: Window, scale: float = 200.0) -> "IntensityModel":
        """scale * x^2 * |y|."""
        if scale < 0:
            raise ValueError("parameter scale must be >= 0")
        return cls(kind="product_xy", params={"scale": float(scale)}, window=window)

    @classmethod
    def indicator(cls, window: Window, rate: float = 100.0,
                  threshold: float = 0.35) -> "IntensityModel":
        """rate * 1{|x| > threshold and |y| > threshold}."""
        if rate < 0:
            raise ValueError("parameter rate must be >= 0")
        return cls(kind="indicator",
                   params={"rate": float(rate), "threshold": float(threshold)},
                   window=window)

    @classmethod
    def beta_family(cls, beta: float, window: Window | None = None,
                    base: float = 100.0, amplitude: float = 200.0) -> "IntensityModel":
        """base + amplitude * (xt^beta * yt^beta * c_beta) with tent maps
        xt = max(0, 1/2 - |x - 1/2|); the bump term integrates to one over
        the unit square and vanishes outside it."""
        if beta <= 0:
            raise ValueError("parameter beta must be > 0")
        if window is None:
            window = Window(0.0, 1.0, 0.0, 1.0)
        return cls(kind="beta_family",
                   params={"beta": float(beta), "base": float(base),
                           "amplitude": float(amplitude), "c_beta": c_beta(beta)},
                   window=window)

    @classmethod
    def etas_model(cls, params: EtasParams, window: Window,
                   time_span: tuple[float, float]) -> "IntensityModel":
        if abs(params.rho * window.area - 1.0) > 1e-8:
            raise ValueError("parameter rho must equal 1/|S| for the model window")
        t0, t1 = time_span
        if not t0 < t1:
            raise ValueError("empty time span")
        return cls(kind="etas", params={}, window=window,
                   time_span=(float(t0), float(t1)), etas=params)

    @classmethod
    def user_grid(cls, x_centers, y_centers, rates, window: Window) -> "IntensityModel":
        return cls(kind="user_grid", params={}, window=window,
                   grid=UserGrid(x_centers, y_centers, rates))

    # -- evaluation ---------------------------------------------------

    def rate_xy(self, x, y) -> np.ndarray:
        """Vectorized spatial rate for the purely spatial kinds."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "homogeneous":
            return np.full(np.broadcast(x, y).shape, self.params["rate"])
        if self.kind == "product_xy":
            return self.params["scale"] * x ** 2 * np.abs(y)
        if self.kind == "indicator":
            thr = self.params["threshold"]
            mask = (np.abs(x) > thr) & (np.abs(y) > thr)
            return self.params["rate"] * mask.astype(float)
        if self.kind == "beta_family":
            beta = self.params["beta"]
            xt = np.maximum(0.0, 0.5 - np.abs(x - 0.5))
            yt = np.maximum(0.0, 0.5 - np.abs(y - 0.5))
            bump = self.params["c_beta"] * xt ** beta * yt ** beta
            return self.params["base"] + self.params["amplitude"] * bump
        if self.kind == "user_grid":
            return self.grid.interpolate(x, y)
        raise ValueError("rate_xy is undefined for spatial-temporal kinds; "
                         "use evaluate() with a history")

    def max_rate(self, region: Window | None = None) -> float:
        """Finite upper bound of the spatial rate over a region (for thinning)."""
        region = region or self.window
        if self.kind == "homogeneous":
            return self.params["rate"]
        if self.kind == "product_xy":
            xm = max(abs(region.xmin), abs(region.xmax))
            ym = max(abs(region.ymin), abs(region.ymax))
            return self.params["scale"] * xm ** 2 * ym
        if self.kind == "indicator":
            return self.params["rate"]
        if self.kind == "beta_family":
            beta = self.params["beta"]
            return self.params["base"] + self.params["amplitude"] * (beta + 1.0) ** 2
        if self.kind == "user_grid":
            return float(self.grid.rates.max())
        raise ValueError("max_rate is undefined for spatial-temporal kinds")


def evaluate(model: IntensityModel, t: float | None, x: float, y: float,
             history: Catalog | None = None) -> float:
    """Conditional intensity at (t, x, y) given the events before t."""
    if model.kind != "etas":
        return float(model.rate_xy(x, y))
    par = model.etas
    lam = par.mu * par.rho
    if history is not None and len(history) > 0:
        sel = history.t < t
        if np.any(sel):
            dt = t - history.t[sel]
            r2 = (x - history.x[sel]) ** 2 + (y - history.y[sel]) ** 2
            mags = history.mag[sel] if history.mag is not None else np.full(sel.sum(), par.M0)
            lam += np.sum(par.K * (dt + par.c) ** (-par.p)
                          * np.exp(par.a * (mags - par.M0))
                          * (r2 + par.d) ** (-par.q))
    return float(lam)


def etas_time_integrated_weights(par: EtasParams, history: Catalog,
                                 time_span: tuple[float, float]) -> np.ndarray:
    """Per-event triggering weight: K e^{a(M-M0)} integral of the time decay
    from each event over the span (zero for events after the span)."""
    t0, t1 = time_span
    tj = history.t
    mags = history.mag if history.mag is not None else np.full(len(history), par.M0)
    s0 = np.maximum(t0 - tj, 0.0)
    s1 = t1 - tj
    w = np.zeros(len(history))
    live = s1 > 0
    em1 = 1.0 - par.p
    w[live] = ((s0[live] + par.c) ** em1 - (s1[live] + par.c) ** em1) / (par.p - 1.0)
    return par.K * np.exp(par.a * (mags - par.M0)) * w


def spatial_profile(model: IntensityModel, history: Catalog | None = None):
    """Vectorized spatial surface f(x, y) whose cell integrals are the
    model's expected counts: the rate itself for spatial kinds, the
    time-span-integrated intensity for etas."""
    if model.kind != "etas":
        return model.rate_xy
    if history is None:
        history = Catalog(t=np.empty(0), x=np.empty(0), y=np.empty(0), mag=None,
                          window=model.window, time_span=model.time_span)
    par = model.etas
    background = par.mu * par.rho * (model.time_span[1] - model.time_span[0])
    weights = etas_time_integrated_weights(par, history, model.time_span)
    ex = history.x
    ey = history.y

    def profile(x, y, _chunk=4096):
        x = np.asarray(x, dtype=float).ravel()
        y = np.asarray(y, dtype=float).ravel()
        out = np.full(x.shape, background)
        if len(ex) == 0:
            return out
        for lo in range(0, len(x), _chunk):
            hi = lo + _chunk
            r2 = ((x[lo:hi, None] - ex[None, :]) ** 2
                  + (y[lo:hi, None] - ey[None, :]) ** 2)
            out[lo:hi] += (weights[None, :] * (r2 + par.d) ** (-par.q)).sum(axis=1)
        return out

    return profile


# -- adaptive triangle quadrature ------------------------------------

# degree-2 rule: edge midpoints
_BARY_LOW = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
_W_LOW = np.full(3, 1.0 / 3.0)

# degree-5 rule (7 points)
_A1 = 0.0597158717897698
_B1 = 0.4701420641051151
_A2 = 0.7974269853530873
_B2 = 0.1012865073234563
_BARY_HIGH = np.array([
    [1 / 3, 1 / 3, 1 / 3],
    [_A1, _B1, _B1], [_B1, _A1, _B1], [_B1, _B1, _A1],
    [_A2, _B2, _B2], [_B2, _A2, _B2], [_B2, _B2, _A2],
])
_W_HIGH = np.array([9.0 / 40.0] + [(155.0 + math.sqrt(15)) / 1200.0] * 3
                   + [(155.0 - math.sqrt(15)) / 1200.0] * 3)


@dataclass(frozen=True)
class CellIntegral:
    """Integral estimate for one region with its error estimate."""

    value: float
    error: float
    converged: bool

    def __float__(self) -> float:
        return self.value


def _rule_sums(f, tris: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(low, high) rule values for each triangle in an (m, 3, 2) batch."""
    areas = 0.5 * np.abs(
        (tris[:, 1, 0] - tris[:, 0, 0]) * (tris[:, 2, 1] - tris[:, 0, 1])
        - (tris[:, 1, 1] - tris[:, 0, 1]) * (tris[:, 2, 0] - tris[:, 0, 0]))
    pts_low = np.einsum("kb,mbi->mki", _BARY_LOW, tris)
    pts_high = np.einsum("kb,mbi->mki", _BARY_HIGH, tris)
    f_low = f(pts_low[..., 0].ravel(), pts_low[..., 1].ravel()).reshape(len(tris), -1)
    f_high = f(pts_high[..., 0].ravel(), pts_high[..., 1].ravel()).reshape(len(tris), -1)
    low = areas * (f_low @ _W_LOW)
    high = areas * (f_high @ _W_HIGH)
    return low, high


def _subdivide(tris: np.ndarray) -> np.ndarray:
    """Midpoint subdivision of each triangle into four."""
    v0, v1, v2 = tris[:, 0], tris[:, 1], tris[:, 2]
    m01 = 0.5 * (v0 + v1)
    m12 = 0.5 * (v1 + v2)
    m02 = 0.5 * (v0 + v2)
    children = np.empty((len(tris) * 4, 3, 2))
    children[0::4] = np.stack([v0, m01, m02], axis=1)
    children[1::4] = np.stack([m01, v1, m12], axis=1)
    children[2::4] = np.stack([m02, m12, v2], axis=1)
    children[3::4] = np.stack([m01, m12, m02], axis=1)
    return children


def integrate_profile_over_triangles(f, tris: np.ndarray, owner: np.ndarray,
                                     n_regions: int, rel_tol: float,
                                     max_depth: int = MAX_REFINE_DEPTH) -> list[CellIntegral]:
    """Adaptive integration of f over triangles grouped by owning region.

    Returns one CellIntegral per region; regions whose error estimate still
    exceeds tolerance at the depth cap come back flagged unconverged.
    """
    value = np.zeros(n_regions)
    err = np.zeros(n_regions)
    active_tris = tris
    active_owner = owner.astype(int)

    for depth in range(max_depth + 1):
        if len(active_tris) == 0:
            break
        low, high = _rule_sums(f, active_tris)
        tri_err = np.abs(high - low)
        total = value + np.bincount(active_owner, weights=high, minlength=n_regions)
        total_err = err + np.bincount(active_owner, weights=tri_err, minlength=n_regions)
        tol = rel_tol * np.maximum(np.abs(total), 1e-300)
        converged = total_err <= tol

        if depth == max_depth:
            value = total
            err = total_err
            break

        leaves = np.bincount(active_owner, minlength=n_regions).astype(float)
        # triangles already within their share of the owner's budget settle now
        allowance = np.where(leaves > 0, tol / np.maximum(leaves, 1.0), 0.0)
        settle = converged[active_owner] | (tri_err <= 0.25 * allowance[active_owner])
        value += np.bincount(active_owner[settle], weights=high[settle], minlength=n_regions)
        err += np.bincount(active_owner[settle], weights=tri_err[settle], minlength=n_regions)

        refine = ~settle
        if not np.any(refine):
            break
        active_tris = _subdivide(active_tris[refine])
        active_owner = np.repeat(active_owner[refine], 4)

    converged_final = err <= rel_tol * np.maximum(np.abs(value), 1e-300)
    return [CellIntegral(float(value[i]), float(err[i]), bool(converged_final[i]))
            for i in range(n_regions)]


def _default_rel_tol(model: IntensityModel) -> float:
    return DEFAULT_REL_TOL.get(model.kind, DEFAULT_REL_TOL_BUILTIN)


def _cells_to_triangles(cells) -> tuple[np.ndarray, np.ndarray]:
    tri_list = []
    owner_list = []
    for i, cell in enumerate(cells):
        if len(cell.vertices) < 3 or cell.area <= 0.0:
            continue
        t = triangulate_cell(cell)
        tri_list.append(t)
        owner_list.append(np.full(len(t), i))
    if not tri_list:
        return np.empty((0, 3, 2)), np.empty(0, dtype=int)
    return np.concatenate(tri_list), np.concatenate(owner_list)


def integrate_cells(model: IntensityModel, cells, history: Catalog | None = None,
                    rel_tol: float | None = None,
                    max_depth: int = MAX_REFINE_DEPTH) -> list[CellIntegral]:
    """Batch integral of the model over a sequence of convex cells."""
    cells = list(cells)
    f = spatial_profile(model, history)
    tris, owner = _cells_to_triangles(cells)
    return integrate_profile_over_triangles(
        f, tris, owner, len(cells),
        rel_tol if rel_tol is not None else _default_rel_tol(model),
        max_depth)


def integrate_cell(model: IntensityModel, cell: ConvexCell,
                   history: Catalog | None = None, rel_tol: float | None = None,
                   max_depth: int = MAX_REFINE_DEPTH) -> CellIntegral:
    """Integral of the model over one cell (over the full time span for etas)."""
    return integrate_cells(model, [cell], history, rel_tol, max_depth)[0]


def _rect_cell(x0: float, x1: float, y0: float, y1: float) -> ConvexCell:
    verts = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    return ConvexCell(generator=np.array([(x0 + x1) / 2, (y0 + y1) / 2]),
                      vertices=verts, area=(x1 - x0) * (y1 - y0),
                      touches_boundary=False)


def integrate_pixels(model: IntensityModel, grid: PixelGrid,
                     history: Catalog | None = None, rel_tol: float | None = None,
                     max_depth: int = MAX_REFINE_DEPTH) -> np.ndarray:
    """Per-pixel integrals, flat and index-aligned with PixelGrid.counts()."""
    cells = [_rect_cell(*grid.rect(i)) for i in range(grid.n_pixels)]
    results = integrate_cells(model, cells, history, rel_tol, max_depth)
    return np.array([r.value for r in results])


def integrate_window(model: IntensityModel, window: Window | None = None,
                     history: Catalog | None = None,
                     rel_tol: float | None = None) -> CellIntegral:
    """Integral of the model over a whole window (expected total count)."""
    w = window or model.window
    return integrate_cell(model, _rect_cell(w.xmin, w.xmax, w.ymin, w.ymax),
                          history, rel_tol)
