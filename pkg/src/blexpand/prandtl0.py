"""Zeroth Prandtl layer: von Mises march, inversion to physical y, defect w.

The layer solves the quasilinear parabolic problem for the shifted unknown
q = u0p + delta in von Mises variables (x, eta),

    q_x = d_eta((1 - delta + q) q_eta),  q(x,0) = 0,  q(x, eta_max) = delta,

marching in x with an implicit conservative scheme (backward Euler by
default; variable-step BDF2 is available for runs where the first-order
marching error would pollute downstream remainders). The physical fields
come from integrating d eta/dy = 1 - delta + q(x, eta) per station, and the
vertical velocity from the divergence-free tail integral.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline

from . import _kernels
from .front import FrontProfile, front_eval
from .grid import Field2D, Grid, cumulative_tail_y, diff
from .norms import NormReport, decay_fit, q_norm, sup_profile


class MarchError(RuntimeError):
    pass


class DegeneracyError(MarchError):
    pass


SCHEMES = {"backward_euler": 1, "bdf2": 2}


@dataclass(eq=False)
class InitialData:
    """In-flow data for the layer-0 march.

    Either a callable U0(y) with U0(0) = -delta (converted to von Mises
    coordinates by integrating eta(y) = int_0^y (1 + U0)), or the exact
    self-similar front (q(1, eta) = phi_star(eta), bypassing the conversion).
    """

    kind: str
    fn: object = None

    @classmethod
    def from_callable(cls, fn):
        return cls("callable", fn)

    @classmethod
    def front_exact(cls):
        return cls("front_exact")

    @classmethod
    def builtin(cls, name: str, delta: float):
        if name == "front_exact":
            return cls.front_exact()
        if name == "gaussian_decay":
            return cls("callable", lambda y: -delta * (1.0 + y * y) * np.exp(-y * y))
        if name == "perturbed_sine":
            return cls("callable", lambda y: -delta * np.exp(-y) * (1.0 + 0.3 * np.sin(y)))
        raise ValueError(f"unknown builtin initial data {name!r}")

    @classmethod
    def from_table(cls, y, u0):
        spline = CubicSpline(np.asarray(y, float), np.asarray(u0, float))
        ymax = float(np.asarray(y)[-1])

        def fn(yv):
            yv = np.asarray(yv, float)
            return np.where(yv <= ymax, spline(np.clip(yv, 0, ymax)), spline(ymax))

        return cls("callable", fn)

    def q0_on_eta(self, etas: np.ndarray, delta: float, front: FrontProfile,
                  bc_tol: float = 1e-8) -> tuple[np.ndarray, list]:
        warnings = []
        if self.kind == "front_exact":
            q0 = np.asarray(front.phi(etas), dtype=np.float64)
        else:
            fn = self.fn
            u00 = float(fn(0.0))
            if abs(u00 + delta) > bc_tol:
                raise MarchError(
                    f"initial data violates U0(0) = -delta: U0(0) = {u00:.3e}"
                )
            # first-order corner compatibility: d_yy U0(0) = 0 (warn only above tol)
            hh = 1e-4
            d2 = (fn(2 * hh) - 2 * fn(hh) + fn(0.0)) / hh**2
            if abs(d2) > 1e-3 * max(delta, 1e-12):
                warnings.append(
                    f"initial data has d_yy U0(0) = {d2:.3e}; corner layer expected"
                )
            # convert y -> eta at x = 1 on a refined y-grid
            yf = np.linspace(0.0, etas[-1] / max(1.0 - delta, 0.5), 8 * len(etas) + 1)
            eta_of_y = cumulative_trapezoid(1.0 + fn(yf), yf, initial=0.0)
            y_of_eta = CubicSpline(eta_of_y, yf)
            q0 = delta + fn(y_of_eta(np.clip(etas, 0.0, eta_of_y[-1])))
        q0 = np.asarray(q0, dtype=np.float64)
        q0[0] = 0.0
        if abs(q0[-1] - delta) > max(bc_tol, 1e-10):
            warnings.append(
                f"initial data not settled at eta_max: q0(eta_max) - delta = "
                f"{q0[-1] - delta:.3e}"
            )
        q0[-1] = delta
        return q0, warnings


@dataclass(eq=False)
class Prandtl0Solution:
    q: Field2D            # shifted unknown on the (x, eta) grid
    u0p: Field2D          # physical frame
    v0p: Field2D          # physical frame
    w: Field2D            # defect q - phi_star(eta/sqrt(x))
    eta_of_y: Field2D     # the von Mises map eta(x, y)
    delta: float
    front: FrontProfile
    roundtrip_err: float = 0.0

    def min_shear(self) -> float:
        """min over the grid of 1 + u0p (maximum principle says >= 1 - delta)."""
        return float(1.0 + np.min(self.u0p.values))


def eta_grid_for(grid: Grid, delta: float) -> Grid:
    """Companion (x, eta) grid: y-nodes rescaled by (1 + delta)."""
    return Grid(
        grid.x_nodes.copy(),
        grid.y_nodes * (1.0 + delta),
        f"vonmises[{grid.stretch_law}]",
        grid.stencil_order,
    )


def march_q(
    U0,
    delta: float,
    front: FrontProfile,
    grid: Grid,
    newton_tol: float = 1e-12,
    scheme: str = "backward_euler",
    bc_tol: float = 1e-8,
) -> Field2D:
    """March the shifted unknown q on the companion (x, eta) grid."""
    if callable(U0):
        U0 = InitialData.from_callable(U0)
    egrid = eta_grid_for(grid, delta)
    q0, warns = U0.q0_on_eta(egrid.y_nodes, delta, front, bc_tol)
    qvals, status, si, sj, last_res = _kernels.nonlinear_march(
        egrid.x_nodes, egrid.y_nodes, q0, delta,
        newton_tol=newton_tol, scheme=SCHEMES[scheme],
    )
    if status == 1:
        raise MarchError(
            f"Newton stalled at station x = {egrid.x_nodes[si]:.4g}; "
            f"last residual {last_res:.3e}"
        )
    if status == 2:
        raise DegeneracyError(
            f"parabolicity lost: 1 - delta + q <= 0 first at "
            f"(x, eta) = ({egrid.x_nodes[si]:.4g}, {egrid.y_nodes[sj]:.4g})"
        )
    return Field2D(egrid, qvals, "von_mises_eta", "q", tuple(warns))


def von_mises_invert(q: Field2D, delta: float, grid: Grid) -> tuple[Field2D, Field2D, float]:
    """(u0p, eta_of_y, roundtrip error): physical fields from the q solution.

    Integrates d eta / dy = 1 - delta + q(x, eta) per x-station with RK4 on
    the y-nodes, interpolating q cubically in eta. Out-of-range lookups
    extend q by its boundary values.
    """
    egrid = q.grid
    ys = grid.y_nodes
    nx = egrid.nx
    eta = np.zeros((nx, ys.size))
    u0p = np.zeros_like(eta)
    rt_err = 0.0
    warns = list(q.warnings)
    clipped = False
    for i in range(nx):
        sp = CubicSpline(egrid.y_nodes, q.values[i])
        lo, hi = egrid.y_nodes[0], egrid.y_nodes[-1]

        def g(e):
            nonlocal clipped
            e_cl = np.clip(e, lo, hi)
            if np.any(e != e_cl):
                clipped = True
            return 1.0 - delta + sp(e_cl)

        e = 0.0
        eta[i, 0] = 0.0
        for j in range(ys.size - 1):
            h = ys[j + 1] - ys[j]
            k1 = g(e)
            k2 = g(e + 0.5 * h * k1)
            k3 = g(e + 0.5 * h * k2)
            k4 = g(e + h * k3)
            e = e + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            eta[i, j + 1] = e
        u0p[i] = sp(np.clip(eta[i], lo, hi)) - delta
        # round trip: y(eta) = int_0^eta d eta' / (1 - delta + q)
        dens = 1.0 / (1.0 - delta + q.values[i])
        y_back = CubicSpline(
            egrid.y_nodes, cumulative_trapezoid(dens, egrid.y_nodes, initial=0.0)
        )(np.clip(eta[i], lo, hi))
        rt_err = max(rt_err, float(np.max(np.abs(y_back - ys))))
    if clipped:
        warns.append("von Mises inversion hit the eta-grid edge; q extended by boundary values")
    u0p_f = Field2D(grid, u0p, "physical_y", "u0p", tuple(warns))
    eta_f = Field2D(grid, eta, "physical_y", "eta_of_y", tuple(warns))
    return u0p_f, eta_f, rt_err


def v0p_from_u0p(u0p: Field2D, tail_tol: float = 1e-4) -> Field2D:
    """v0p(x, y) = integral from y to y_max of d_x u0p (so v0p -> 0 above)."""
    dux = diff(u0p, "x", 1)
    out = cumulative_tail_y(dux, tail_tol=tail_tol)
    return out.with_values(out.values, name="v0p")


def solve_prandtl0(
    U0,
    delta: float,
    front: FrontProfile,
    grid: Grid,
    newton_tol: float = 1e-12,
    scheme: str = "backward_euler",
    bc_tol: float = 1e-8,
    tail_tol: float = 1e-4,
    mp_tol: float = 1e-10,
    interp_tol: float = 1e-6,
) -> Prandtl0Solution:
    """Full layer-0 pipeline: march, invert, divergence closure, defect."""
    q = march_q(U0, delta, front, grid, newton_tol, scheme, bc_tol)
    u0p, eta_of_y, rt = von_mises_invert(q, delta, grid)
    if rt > interp_tol:
        u0p = u0p.with_values(
            u0p.values, extra_warnings=(f"von Mises round-trip error {rt:.3e}",)
        )
    v0p = v0p_from_u0p(u0p, tail_tol)
    egrid = q.grid
    X, E = egrid.meshes()
    w_vals = q.values - np.asarray(front.phi(E / np.sqrt(X)))
    w = Field2D(egrid, w_vals, "von_mises_eta", "w")
    sol = Prandtl0Solution(q, u0p, v0p, w, eta_of_y, delta, front, rt)
    if sol.min_shear() < 1.0 - delta - mp_tol:
        raise DegeneracyError(
            f"maximum principle violated: min(1 + u0p) = {sol.min_shear():.12f} "
            f"< 1 - delta - {mp_tol}"
        )
    eta_ratio = eta_of_y.values[:, 1:] / grid.y_nodes[None, 1:]
    if np.any(eta_ratio < 1.0 - delta - 1e-8) or np.any(eta_ratio > 1.0 + delta + 1e-8):
        raise MarchError("von Mises map left the (1 +- delta) y equivalence band")
    return sol


def w_report(
    q: Field2D,
    front: FrontProfile,
    sigma0: float,
    k_max: int = 1,
    m_max: int = 2,
    fit_window=(10.0, 1000.0),
) -> NormReport:
    """Q-norms of the defect w = q - phi_star and decay fits of its profiles."""
    if not (0.0 < sigma0 < 0.25):
        raise ValueError("sigma0 must lie in (0, 1/4)")
    egrid = q.grid
    X, E = egrid.meshes()
    w = Field2D(egrid, q.values - np.asarray(front.phi(E / np.sqrt(X))), "von_mises_eta", "w")
    rep = NormReport()
    for k in range(k_max + 1):
        for m in range(m_max + 1):
            rep.add_entry(
                f"Q(sigma0={sigma0},k={k},m={m})",
                q_norm(w, sigma0, k, m),
                weight_spec=f"z^{m}, k={k}",
            )
    xs = egrid.x_nodes
    prof = sup_profile(w) * xs ** (0.25 - sigma0)
    floor = np.max(np.abs(w.values)) * 1e-12 + 1e-300
    keep = prof > floor
    if np.count_nonzero(keep & (xs >= fit_window[0]) & (xs <= fit_window[1])) >= 8:
        fit = decay_fit(xs[keep], prof[keep], window=fit_window)
        rep.add_slope(
            "x^{1/4-sigma0} sup_eta |w|",
            fit,
            target="slope <= 0.05",
            passed=fit["slope"] <= 0.05,
        )
    else:
        rep.add_flag(
            "w decay fit",
            True,
            "defect at discretization floor; fit skipped (degenerate)",
        )
    return rep
