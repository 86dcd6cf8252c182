"""Truncated-domain tensor meshes, finite differences, and weighted quadrature.

All solvers share one 2D grid abstraction: strictly increasing x-nodes on
[1, x_max] and y-nodes on [0, y_max], with optional geometric or tanh
stretching. Differentiation uses Fornberg stencils (centered in the interior,
one-sided of the same formal order at the edges); integration uses composite
trapezoid or Simpson rules. Integrals over the truncated far field assume a
zero tail and record a warning when the integrand has not decayed enough.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.integrate import simpson, trapezoid

VALID_FRAMES = ("physical_y", "von_mises_eta", "euler_Y")
VALID_STENCIL_ORDERS = (2, 4)

# Cheap global switch used by the tail-closure helpers.
TAIL_TOL_DEFAULT = 1e-4


class GridError(ValueError):
    pass


@dataclass(eq=False)
class Grid:
    """Tensor-product mesh on [1, x_max] x [0, y_max]."""

    x_nodes: np.ndarray
    y_nodes: np.ndarray
    stretch_law: str
    stencil_order: int

    def __post_init__(self):
        self.x_nodes = np.asarray(self.x_nodes, dtype=np.float64)
        self.y_nodes = np.asarray(self.y_nodes, dtype=np.float64)
        if self.x_nodes.ndim != 1 or self.y_nodes.ndim != 1:
            raise GridError("node arrays must be 1-D")
        if self.x_nodes.size < 8 or self.y_nodes.size < 8:
            raise GridError("node counts must be >= 8 in each direction")
        if self.x_nodes[0] != 1.0:
            raise GridError("x_nodes[0] must equal 1 exactly")
        if self.y_nodes[0] != 0.0:
            raise GridError("y_nodes[0] must equal 0 exactly")
        if np.any(np.diff(self.x_nodes) <= 0) or np.any(np.diff(self.y_nodes) <= 0):
            raise GridError("node arrays must be strictly increasing")
        if self.stencil_order not in VALID_STENCIL_ORDERS:
            raise GridError(f"stencil_order must be one of {VALID_STENCIL_ORDERS}")

    @property
    def nx(self) -> int:
        return self.x_nodes.size

    @property
    def ny(self) -> int:
        return self.y_nodes.size

    @property
    def x_max(self) -> float:
        return float(self.x_nodes[-1])

    @property
    def y_max(self) -> float:
        return float(self.y_nodes[-1])

    def meshes(self):
        """(X, Y) arrays of shape (nx, ny)."""
        return np.meshgrid(self.x_nodes, self.y_nodes, indexing="ij")


def _geometric_spacings(length: float, n_nodes: int, ratio: float) -> np.ndarray:
    n_int = n_nodes - 1
    if abs(ratio - 1.0) < 1e-14:
        return np.full(n_int, length / n_int)
    d0 = length * (ratio - 1.0) / (ratio**n_int - 1.0)
    return d0 * ratio ** np.arange(n_int)


def _parse_stretch(stretch_law: str):
    """'uniform' | 'geometric:<ratio>' | 'tanh:<beta>' -> (kind, param)."""
    if stretch_law == "uniform":
        return "uniform", None
    kind, _, raw = stretch_law.partition(":")
    if kind not in ("geometric", "tanh") or not raw:
        raise GridError(f"unknown stretch law {stretch_law!r}")
    return kind, float(raw)


def make_grid(
    x_max: float,
    nx: int,
    y_max: float,
    ny: int,
    stretch_law: str = "uniform",
    stencil_order: int = 2,
) -> Grid:
    """Build a Grid.

    'geometric:r' stretches both axes with spacing ratio r in (1, 1.2].
    'tanh:b' clusters y-nodes toward the wall and log-spaces the x-nodes
    (equivalent to geometric x-spacing with ratio x_max**(1/(nx-1)), the
    natural choice for the time-like marching variable).
    """
    if nx < 8 or ny < 8:
        raise GridError("nx and ny must be >= 8")
    if x_max < 10.0:
        raise GridError("x_max must be >= 10")
    if y_max <= 0.0:
        raise GridError("y_max must be positive")
    if stencil_order not in VALID_STENCIL_ORDERS:
        raise GridError(f"stencil_order must be one of {VALID_STENCIL_ORDERS}")

    kind, param = _parse_stretch(stretch_law)
    if kind == "uniform":
        x_nodes = np.linspace(1.0, x_max, nx)
        y_nodes = np.linspace(0.0, y_max, ny)
    elif kind == "geometric":
        ratio = param
        if not (1.0 < ratio <= 1.2):
            raise GridError("geometric ratio must lie in (1, 1.2]")
        x_nodes = 1.0 + np.concatenate(
            ([0.0], np.cumsum(_geometric_spacings(x_max - 1.0, nx, ratio)))
        )
        y_nodes = np.concatenate(
            ([0.0], np.cumsum(_geometric_spacings(y_max, ny, ratio)))
        )
    else:  # tanh
        beta = param
        if beta <= 0.0:
            raise GridError("tanh beta must be positive")
        t = np.linspace(0.0, 1.0, ny)
        y_nodes = y_max * (1.0 + np.tanh(0.5 * beta * (t - 1.0)) / np.tanh(0.5 * beta))
        y_nodes[0] = 0.0
        y_nodes[-1] = y_max
        if y_max > 5.0:
            frac = np.count_nonzero(y_nodes <= 5.0) / ny
            if frac < 0.25:
                raise GridError(
                    f"tanh stretching leaves only {frac:.0%} of y-nodes in [0, 5]; "
                    "increase beta"
                )
        s = np.linspace(0.0, 1.0, nx)
        x_nodes = x_max**s
        x_nodes[0] = 1.0
        x_nodes[-1] = x_max

    x_nodes = np.ascontiguousarray(x_nodes)
    y_nodes = np.ascontiguousarray(y_nodes)
    x_nodes[0] = 1.0
    y_nodes[0] = 0.0
    return Grid(x_nodes, y_nodes, stretch_law, stencil_order)


@dataclass(eq=False)
class Field2D:
    """Scalar samples on a Grid with a coordinate-frame tag."""

    grid: Grid
    values: np.ndarray
    frame: str
    quantity_name: str = ""
    warnings: tuple = field(default_factory=tuple)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.frame not in VALID_FRAMES:
            raise GridError(f"frame must be one of {VALID_FRAMES}")
        if self.values.shape != (self.grid.nx, self.grid.ny):
            raise GridError(
                f"values shape {self.values.shape} does not match grid "
                f"({self.grid.nx}, {self.grid.ny})"
            )
        if not np.all(np.isfinite(self.values)):
            raise GridError(f"non-finite values in field {self.quantity_name!r}")

    def with_values(self, values, name=None, extra_warnings=()) -> "Field2D":
        return Field2D(
            self.grid,
            values,
            self.frame,
            self.quantity_name if name is None else name,
            tuple(self.warnings) + tuple(extra_warnings),
        )

    def column(self, i_x: int) -> np.ndarray:
        return self.values[i_x, :]


def field_from_function(grid: Grid, fn, frame: str = "physical_y", name: str = "") -> Field2D:
    X, Y = grid.meshes()
    return Field2D(grid, fn(X, Y), frame, name)


def zero_field(grid: Grid, frame: str = "physical_y", name: str = "") -> Field2D:
    return Field2D(grid, np.zeros((grid.nx, grid.ny)), frame, name)


# ---------------------------------------------------------------------------
# Finite differences
# ---------------------------------------------------------------------------


def fornberg_weights(x0: float, nodes: np.ndarray, m: int) -> np.ndarray:
    """Weights of the m-th derivative at x0 on arbitrary nodes (Fornberg 1988)."""
    n = len(nodes)
    c = np.zeros((n, m + 1))
    c1 = 1.0
    c4 = nodes[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            for k in range(mn, 0, -1):
                c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
            c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


@lru_cache(maxsize=256)
def _diff_operator(grid: Grid, axis: int, k: int):
    """(weights, indices) arrays realizing the k-th derivative along an axis."""
    nodes = grid.x_nodes if axis == 0 else grid.y_nodes
    order = grid.stencil_order
    n = nodes.size
    npts_interior = k + order - 1
    if npts_interior % 2 == 0:
        npts_interior += 1
    npts_boundary = k + order
    npts = max(npts_interior, npts_boundary)
    if n < npts:
        raise GridError(f"grid too coarse for k={k}, order={order} stencils")

    weights = np.zeros((n, npts))
    indices = np.zeros((n, npts), dtype=np.intp)
    half = npts_interior // 2
    for i in range(n):
        if i < half or i > n - 1 - half:
            # one-sided stencil of the same formal order
            width = npts_boundary
            start = min(max(i - width // 2, 0), n - width)
        else:
            width = npts_interior
            start = i - half
        sl = slice(start, start + width)
        weights[i, :width] = fornberg_weights(nodes[i], nodes[sl], k)
        indices[i, :width] = np.arange(start, start + width)
    return weights, indices


def diff(f: Field2D, axis: str, k: int = 1) -> Field2D:
    """k-th partial derivative along 'x' or 'y' (k <= 3)."""
    if k < 1 or k > 3:
        raise GridError("derivative order k must satisfy 1 <= k <= 3")
    ax = 0 if axis == "x" else 1 if axis == "y" else None
    if ax is None:
        raise GridError("axis must be 'x' or 'y'")
    w, idx = _diff_operator(f.grid, ax, k)
    if ax == 0:
        gathered = f.values[idx, :]  # (nx, npts, ny)
        out = np.einsum("ip,ipj->ij", w, gathered)
    else:
        gathered = f.values[:, idx]  # (nx, ny, npts)
        out = np.einsum("jp,ijp->ij", w, gathered)
    suffix = {"x": "x", "y": "y"}[axis] * k
    name = f"d{suffix}({f.quantity_name})" if f.quantity_name else ""
    return f.with_values(out, name=name)


def diff_values(grid: Grid, values: np.ndarray, axis: str, k: int = 1) -> np.ndarray:
    """diff() on a bare array (skips Field2D bookkeeping in hot paths)."""
    ax = 0 if axis == "x" else 1
    w, idx = _diff_operator(grid, ax, k)
    if ax == 0:
        return np.einsum("ip,ipj->ij", w, values[idx, :])
    return np.einsum("jp,ijp->ij", w, values[:, idx])


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


def _integrate_y(grid: Grid, integrand: np.ndarray) -> np.ndarray:
    """Integrate along the last axis over y; Simpson when stencil_order == 4."""
    if grid.stencil_order == 4:
        return simpson(integrand, x=grid.y_nodes, axis=-1)
    return trapezoid(integrand, x=grid.y_nodes, axis=-1)


def quad_y(f: Field2D, x_index: int, weight=None) -> float:
    """Integral over [0, y_max] of weight(y) * f(x_i, y); tail assumed zero."""
    col = f.values[x_index, :]
    if weight is not None:
        wv = weight(f.grid.y_nodes) if callable(weight) else np.asarray(weight)
        if not np.all(np.isfinite(wv)):
            raise GridError("quadrature weight is not finite on the grid")
        col = col * wv
    return float(_integrate_y(f.grid, col))


def quad_y_all(f: Field2D, weight=None) -> np.ndarray:
    """quad_y at every x-station at once."""
    vals = f.values
    if weight is not None:
        wv = weight(f.grid.y_nodes) if callable(weight) else np.asarray(weight)
        vals = vals * wv[None, :]
    return _integrate_y(f.grid, vals)


def _reverse_cumtrapz(nodes: np.ndarray, vals: np.ndarray, axis: int) -> np.ndarray:
    """F(s) = integral from s to nodes[-1], composite trapezoid."""
    v = np.moveaxis(vals, axis, 0)
    dn = np.diff(nodes)
    panels = 0.5 * (v[1:] + v[:-1]) * dn.reshape((-1,) + (1,) * (v.ndim - 1))
    out = np.zeros_like(v)
    out[:-1] = np.cumsum(panels[::-1], axis=0)[::-1]
    return np.moveaxis(out, 0, axis)


def cumulative_tail_x(f: Field2D, tail_tol: float = TAIL_TOL_DEFAULT) -> Field2D:
    """F(x, y) = integral of f from x to x_max; F(x_max, .) = 0.

    The tail beyond x_max is assumed zero; if the field has not decayed to
    tail_tol times its own maximum at x_max, a warning is attached to the
    result (computation proceeds).
    """
    warnings = []
    fmax = np.max(np.abs(f.values))
    edge = np.max(np.abs(f.values[-1, :]))
    if fmax > 0 and edge > tail_tol * fmax:
        warnings.append(
            f"tail_tol violated in cumulative_tail_x({f.quantity_name}): "
            f"|f(x_max)| = {edge:.3e} vs {tail_tol:.1e} * max|f| = {tail_tol * fmax:.3e}"
        )
    out = _reverse_cumtrapz(f.grid.x_nodes, f.values, axis=0)
    name = f"tailint_x({f.quantity_name})" if f.quantity_name else ""
    return f.with_values(out, name=name, extra_warnings=warnings)


def cumulative_tail_y(f: Field2D, tail_tol: float = TAIL_TOL_DEFAULT) -> Field2D:
    """F(x, y) = integral of f from y to y_max; F(., y_max) = 0."""
    warnings = []
    fmax = np.max(np.abs(f.values))
    edge = np.max(np.abs(f.values[:, -1]))
    if fmax > 0 and edge > tail_tol * fmax:
        warnings.append(
            f"tail_tol violated in cumulative_tail_y({f.quantity_name}): "
            f"|f(y_max)| = {edge:.3e} vs {tail_tol:.1e} * max|f| = {tail_tol * fmax:.3e}"
        )
    out = _reverse_cumtrapz(f.grid.y_nodes, f.values, axis=1)
    name = f"tailint_y({f.quantity_name})" if f.quantity_name else ""
    return f.with_values(out, name=name, extra_warnings=warnings)


def cumulative_from_zero_y(f: Field2D) -> Field2D:
    """F(x, y) = integral of f from 0 to y."""
    v = f.values
    dn = np.diff(f.grid.y_nodes)
    panels = 0.5 * (v[:, 1:] + v[:, :-1]) * dn[None, :]
    out = np.zeros_like(v)
    out[:, 1:] = np.cumsum(panels, axis=1)
    return f.with_values(out, name=f"int0_y({f.quantity_name})" if f.quantity_name else "")


def tail_integral_x(f: Field2D, tail: str = "zero", fit_points: int = 9) -> Field2D:
    """Reverse cumulative x-integral with an optional power-law tail closure.

    tail='zero' is cumulative_tail_x. tail='powerlaw' fits, per y-column, a
    local decay exponent p from the last fit_points stations and adds the
    analytic remainder integral f(x_max) * x_max / (-p - 1) for columns with a
    clean decaying power tail (p < -1.05); other columns fall back to the
    zero-tail closure. Truncating integrals of x^(-q) tails at x_max otherwise
    distorts every value by O(x_max^(1-q)), which for q ~ 3/2 decays far too
    slowly to ignore.
    """
    base = cumulative_tail_x(f, tail_tol=np.inf if tail == "powerlaw" else TAIL_TOL_DEFAULT)
    if tail == "zero":
        return base
    if tail != "powerlaw":
        raise GridError("tail must be 'zero' or 'powerlaw'")

    xs = f.grid.x_nodes
    k = min(fit_points, len(xs) - 1)
    tail_x = xs[-k:]
    tail_v = f.values[-k:, :]
    closure = np.zeros(f.grid.ny)
    fmax = np.max(np.abs(f.values)) or 1.0
    lo = np.log(tail_x)
    lo = lo - lo.mean()
    denom = np.sum(lo * lo)
    for j in range(f.grid.ny):
        col = tail_v[:, j]
        if np.min(col) > 0:
            sign = 1.0
        elif np.max(col) < 0:
            sign = -1.0
        else:
            continue  # sign change or exact zero: no reliable power law
        lg = np.log(sign * col)
        p = float(np.sum(lo * (lg - lg.mean())) / denom)
        if p < -1.05:
            closure[j] = f.values[-1, j] * xs[-1] / (-p - 1.0)
        elif sign * col[-1] > 1e-3 * fmax:
            # non-integrable-looking tail on a non-negligible column
            base = base.with_values(
                base.values,
                extra_warnings=(
                    f"powerlaw tail closure skipped at column {j}: fitted p = {p:.2f}",
                ),
            )
    return base.with_values(base.values + closure[None, :], name=base.quantity_name)


# ---------------------------------------------------------------------------
# Serialization: CSV with header x,y,value plus a JSON sidecar.
# ---------------------------------------------------------------------------


def field_write(f: Field2D, path_base) -> None:
    path_base = Path(path_base)
    path_base.parent.mkdir(parents=True, exist_ok=True)
    with open(path_base.with_suffix(".csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "value"])
        xs, ys = f.grid.x_nodes, f.grid.y_nodes
        for i in range(f.grid.nx):
            for j in range(f.grid.ny):
                writer.writerow(
                    [f"{xs[i]:.17g}", f"{ys[j]:.17g}", f"{f.values[i, j]:.17g}"]
                )
    meta = {
        "frame": f.frame,
        "quantity_name": f.quantity_name,
        "nx": f.grid.nx,
        "ny": f.grid.ny,
        "stretch_law": f.grid.stretch_law,
        "warnings": list(f.warnings),
    }
    with open(path_base.with_suffix(".json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)


def field_read(path_base, stencil_order: int = 2) -> Field2D:
    path_base = Path(path_base)
    with open(path_base.with_suffix(".json")) as fh:
        meta = json.load(fh)
    data = np.loadtxt(path_base.with_suffix(".csv"), delimiter=",", skiprows=1)
    nx, ny = meta["nx"], meta["ny"]
    xs = data[::ny, 0]
    ys = data[:ny, 1]
    vals = data[:, 2].reshape(nx, ny)
    grid = Grid(xs, ys, meta["stretch_law"], stencil_order)
    return Field2D(grid, vals, meta["frame"], meta["quantity_name"], tuple(meta["warnings"]))
