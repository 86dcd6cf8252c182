"""Higher layers: forcing assembly, auxiliary pressures, layer solves, cutoff.

Layer i >= 1 solves the linearized Prandtl system

  (1+u0p) u_px + u_sx u_p + v_s u_py + u0py (v_p - v_p(x,0)) = u_pyy + f^(i)

with u_p(x,0) = -u_e^i(x,0), marched implicitly with frozen coefficients after
homogenizing the wall data through the cutoff chi(y) = (1 + y - y^2) e^{-y}
(chi(0)=1, chi'(0)=0, integral 0). The forcing collects the previous layer's
closed-form residual, the Euler-Prandtl interaction terms, and the x-gradient
of the auxiliary Prandtl pressure; the purely Eulerian quadratic terms cancel
against the auxiliary Euler pressure gradient, which is checked numerically.

The final layer solves with v_p(x,0) = 0 and is then cut off in the
self-similar region sqrt(eps) z ~ 1, with the cutoff error assembled in
closed form.

Scaled Laplacian convention: Delta_eps = eps d_xx + d_yy in boundary-layer
variables (the x-diffusion is the small one).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .euler import EulerLayer
from .front import FrontProfile
from .grid import (
    Field2D,
    Grid,
    cumulative_from_zero_y,
    cumulative_tail_x,
    cumulative_tail_y,
    diff,
)
from .prandtl0 import SCHEMES, Prandtl0Solution


class LayerError(RuntimeError):
    pass


def sigma_values(n: int) -> np.ndarray:
    """sigma_i = 3^i / (3^n * 10^4) for i = 1..n."""
    i = np.arange(1, n + 1)
    return 3.0**i / (3.0**n * 1e4)


# Homogenization cutoff: chi(0) = 1, chi'(0) = 0, integral_0^inf chi = 0.
# (A one-parameter (1 - a y) e^{-y} family cannot satisfy both side
# conditions; this is the minimal two-parameter member.)


def chi_hom(y, deriv: int = 0):
    y = np.asarray(y, dtype=np.float64)
    e = np.exp(-y)
    if deriv == 0:
        return (1.0 + y - y * y) * e
    if deriv == 1:
        return (y * y - 3.0 * y) * e
    if deriv == 2:
        return (-y * y + 5.0 * y - 3.0) * e
    raise ValueError("chi_hom supports deriv in {0, 1, 2}")


def I_chi(y):
    """integral from y to infinity of chi_hom."""
    y = np.asarray(y, dtype=np.float64)
    return -y * (1.0 + y) * np.exp(-y)


# Self-similar cutoff for the final layer: 1 below s=1/2, 0 above s=1,
# C^3 polynomial ramp in between (third derivatives needed in closed form).


def cutoff_chi(s, deriv: int = 0):
    s = np.asarray(s, dtype=np.float64)
    t = np.clip((s - 0.5) * 2.0, 0.0, 1.0)
    inside = (s > 0.5) & (s < 1.0)
    if deriv == 0:
        ramp = 35 * t**4 - 84 * t**5 + 70 * t**6 - 20 * t**7
        out = np.where(s <= 0.5, 1.0, np.where(s >= 1.0, 0.0, 1.0 - ramp))
    elif deriv == 1:
        ramp = 140 * t**3 - 420 * t**4 + 420 * t**5 - 140 * t**6
        out = np.where(inside, -2.0 * ramp, 0.0)
    elif deriv == 2:
        ramp = 420 * t**2 - 1680 * t**3 + 2100 * t**4 - 840 * t**5
        out = np.where(inside, -4.0 * ramp, 0.0)
    elif deriv == 3:
        ramp = 840 * t - 5040 * t**2 + 8400 * t**3 - 4200 * t**4
        out = np.where(inside, -8.0 * ramp, 0.0)
    else:
        raise ValueError("cutoff_chi supports deriv <= 3")
    return out if out.ndim else float(out)


@dataclass(eq=False)
class PrandtlLayer:
    """One constructed Prandtl corrector [u_p^i, v_p^i]."""

    index: int
    u: Field2D
    v: Field2D
    picard_delta: float
    # final layer only: pre-cutoff fields and the cutoff error
    u_precut: Field2D | None = None
    v_precut: Field2D | None = None
    cutoff_error: Field2D | None = None


@dataclass(eq=False)
class LayerSet:
    """The indexed family of Prandtl/Euler layers and auxiliary pressures."""

    epsilon: float
    delta: float
    n: int
    gamma: float
    front: FrontProfile
    grid: Grid
    euler_grid: Grid
    layer0: Prandtl0Solution
    euler: list = field(default_factory=list)     # EulerLayer, index i-1 holds layer i
    prandtl: list = field(default_factory=list)   # PrandtlLayer, index i-1 holds layer i
    aux_e: list = field(default_factory=list)     # P_e^{i,a} on the Euler grid
    aux_p: list = field(default_factory=list)     # P_p^{i,a} on the physical grid
    bc_tol: float = 1e-10
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not (self.epsilon > 0.0 and self.epsilon <= self.delta**2):
            raise LayerError("requires 0 < epsilon <= delta^2")
        if not (0.0 <= self.gamma < 0.25):
            raise LayerError("gamma must lie in [0, 1/4)")
        if self.n < 1:
            raise LayerError("n must be >= 1")

    @property
    def sigma(self) -> np.ndarray:
        return sigma_values(self.n)

    def euler_layer(self, i: int) -> EulerLayer:
        if i < 1 or i > len(self.euler):
            raise LayerError(f"Euler layer {i} not constructed yet")
        return self.euler[i - 1]

    def prandtl_layer(self, i: int) -> PrandtlLayer:
        if i == 0:
            raise LayerError("layer 0 lives in .layer0")
        if i < 1 or i > len(self.prandtl):
            raise LayerError(f"Prandtl layer {i} not constructed yet")
        return self.prandtl[i - 1]

    # -- resampling of Euler-frame fields onto the boundary-layer grid ------

    def euler_on_bl(self, i: int, name: str) -> np.ndarray:
        """Euler layer-i component (or FD derivative) at (x, Y = sqrt(eps) y)."""
        key = ("ebl", i, name)
        if key not in self._cache:
            X, Y = self.grid.meshes()
            lay = self.euler_layer(i)
            self._cache[key] = lay.sample(name, X.ravel(), np.sqrt(self.epsilon) * Y.ravel()).reshape(X.shape)
        return self._cache[key]

    def prandtl_field(self, j: int, name: str) -> np.ndarray:
        """u/v of Prandtl layer j or FD derivatives: name in
        {'u','v','ux','uy','uyy','uxx','vx','vy','vyy','vxx'}."""
        key = ("pbl", j, name)
        if key in self._cache:
            return self._cache[key]
        base = {"u": self.layer0.u0p, "v": self.layer0.v0p} if j == 0 else {
            "u": self.prandtl_layer(j).u,
            "v": self.prandtl_layer(j).v,
        }
        f = base[name[0]]
        for ch in name[1:]:
            f = diff(f, "x" if ch == "x" else "y", 1)
        self._cache[key] = f.values
        return self._cache[key]

    # -- partial-sum coefficient fields on the boundary-layer grid ----------

    def u_s_coeffs(self, i: int) -> dict:
        """Fields of u_s^{(i)}, v_s^{(i)} and the derivatives the solver needs."""
        key = ("coef", i)
        if key in self._cache:
            return self._cache[key]
        eps = self.epsilon
        se = np.sqrt(eps)
        shape = (self.grid.nx, self.grid.ny)
        u_sx = np.zeros(shape)
        v_s = np.zeros(shape)
        v_sx = np.zeros(shape)
        v_sy = np.zeros(shape)
        u_s = np.ones(shape)
        for j in range(0, i):
            w = eps ** (j / 2.0)
            u_s += w * self.prandtl_field(j, "u")
            u_sx += w * self.prandtl_field(j, "ux")
            v_s += w * self.prandtl_field(j, "v")
            v_sx += w * self.prandtl_field(j, "vx")
            v_sy += w * self.prandtl_field(j, "vy")
        for j in range(1, i + 1):
            w = eps ** (j / 2.0)
            u_s += w * self.euler_on_bl(j, "u")
            u_sx += w * self.euler_on_bl(j, "ux")
            v_s += eps ** ((j - 1) / 2.0) * self.euler_on_bl(j, "v")
            v_sx += eps ** ((j - 1) / 2.0) * self.euler_on_bl(j, "vx")
            v_sy += eps ** ((j - 1) / 2.0) * se * self.euler_on_bl(j, "vY")
        out = {"u_s": u_s, "u_sx": u_sx, "v_s": v_s, "v_sx": v_sx, "v_sy": v_sy}
        self._cache[key] = out
        return out


# ---------------------------------------------------------------------------
# Closed-form layer remainders (the substance behind the forcing)
# ---------------------------------------------------------------------------


def r_u_layer(ls: LayerSet, m: int) -> np.ndarray:
    """R^{u,m}: what layer m leaves in the streamwise equation.

    eps^{m/2} [ -eps u^m_pxx + u^m_px sum_{j=1}^m eps^{j/2}(u^j_e + u^j_p)
                + v^m_p sum_{j=1}^m eps^{j/2}(u^j_py + sqrt(eps) u^j_eY)
                + (v^{m+1}_e(x, Y) - v^{m+1}_e(x, 0)) u^0_py ]
    with the Taylor difference of the next Euler layer evaluated exactly.
    Requires Euler layer m+1.
    """
    eps = ls.epsilon
    se = np.sqrt(eps)
    core = -eps * ls.prandtl_field(m, "uxx")
    if m >= 1:
        s_ue = np.zeros_like(core)
        s_dy = np.zeros_like(core)
        for j in range(1, m + 1):
            w = eps ** (j / 2.0)
            s_ue += w * (ls.euler_on_bl(j, "u") + ls.prandtl_field(j, "u"))
            s_dy += w * (ls.prandtl_field(j, "uy") + se * ls.euler_on_bl(j, "uY"))
        core = core + ls.prandtl_field(m, "ux") * s_ue + ls.prandtl_field(m, "v") * s_dy
    v_next = ls.euler_on_bl(m + 1, "v")
    u0py = ls.prandtl_field(0, "uy")
    core = core + (v_next - v_next[:, :1]) * u0py
    return eps ** (m / 2.0) * core


def r_v_layer(ls: LayerSet, m: int) -> np.ndarray:
    """R^{v,m}: the normal-equation residual of layer m (closed form)."""
    eps = ls.epsilon
    vxx = ls.prandtl_field(m, "vxx")
    vyy = ls.prandtl_field(m, "vyy")
    vx = ls.prandtl_field(m, "vx")
    vy = ls.prandtl_field(m, "vy")
    up = ls.prandtl_field(m, "u")
    vp = ls.prandtl_field(m, "v")
    if m == 0:
        u_s = 1.0
        v_s = 0.0
        v_sx = 0.0
        v_sy = 0.0
    else:
        c = ls.u_s_coeffs(m)
        u_s, v_s, v_sx, v_sy = c["u_s"], c["v_s"], c["v_sx"], c["v_sy"]
    core = (
        -(eps * vxx + vyy)
        + u_s * vx
        + v_sx * up
        + v_s * vy
        + v_sy * vp
        + eps ** (m / 2.0) * (up * vx + vp * vy)
    )
    return eps ** (m / 2.0) * core


def r_uE(ls: LayerSet, i: int) -> np.ndarray:
    """Euler-Prandtl interaction terms of order i in the streamwise equation."""
    eps = ls.epsilon
    se = np.sqrt(eps)
    shape = (ls.grid.nx, ls.grid.ny)
    p_u = np.zeros(shape)
    p_ux = np.zeros(shape)
    p_v = np.zeros(shape)
    p_uy1 = np.zeros(shape)
    for j in range(0, i):
        w = eps ** (j / 2.0)
        p_u += w * ls.prandtl_field(j, "u")
        p_ux += w * ls.prandtl_field(j, "ux")
        p_v += w * ls.prandtl_field(j, "v")
        if j >= 1:
            p_uy1 += w * ls.prandtl_field(j, "uy")
    wi = eps ** (i / 2.0)
    return (
        wi * ls.euler_on_bl(i, "ux") * p_u
        + wi * ls.euler_on_bl(i, "u") * p_ux
        + wi * se * ls.euler_on_bl(i, "uY") * p_v
        + eps ** ((i - 1) / 2.0) * ls.euler_on_bl(i, "v") * p_uy1
    )


def r_vE(ls: LayerSet, i: int) -> np.ndarray:
    """Euler-Prandtl interaction terms of order i in the normal equation."""
    eps = ls.epsilon
    se = np.sqrt(eps)
    shape = (ls.grid.nx, ls.grid.ny)
    p_u = np.zeros(shape)
    p_vx = np.zeros(shape)
    p_vy = np.zeros(shape)
    p_v = np.zeros(shape)
    for j in range(0, i):
        w = eps ** (j / 2.0)
        p_u += w * ls.prandtl_field(j, "u")
        p_vx += w * ls.prandtl_field(j, "vx")
        p_vy += w * ls.prandtl_field(j, "vy")
        p_v += w * ls.prandtl_field(j, "v")
    wim = eps ** ((i - 1) / 2.0)
    return (
        wim * ls.euler_on_bl(i, "vx") * p_u
        + eps ** (i / 2.0) * ls.euler_on_bl(i, "u") * p_vx
        + wim * ls.euler_on_bl(i, "v") * p_vy
        + se * wim * ls.euler_on_bl(i, "vY") * p_v
    )


# ---------------------------------------------------------------------------
# Auxiliary pressures
# ---------------------------------------------------------------------------


def aux_pressure_prandtl(i: int, ls: LayerSet, tail_tol: float = 1e-4) -> Field2D:
    """P^{i,a}_p with eps^{(i+1)/2} P^{i,a}_p = eps int_y^inf (R^{v,i-1} + R^{v,i}_E)."""
    rv = r_v_layer(ls, i - 1) + r_vE(ls, i)
    g = cumulative_tail_y(Field2D(ls.grid, rv, "physical_y", f"Rv{i - 1}+RvE{i}"), tail_tol)
    eps = ls.epsilon
    scale = eps / eps ** ((i + 1) / 2.0)
    return g.with_values(scale * g.values, name=f"P{i}a_p")


def aux_pressure_euler(i: int, ls: LayerSet) -> tuple[Field2D, float]:
    """P^{i,a}_e and the relative defect of the gradient-cancellation identity.

    P^{i,a}_e = - sum_{j<i} eps^{(j-i)/2} (v^i_e v^j_e + u^i_e u^j_e)
                - (|v^i_e|^2 + |u^i_e|^2) / 2
    should satisfy (d_x, d_Y/sqrt(eps)) eps^i P + (E^u_i, E^v_i) = 0 exactly
    on Cauchy-Riemann fields; the residual measures the broken structure.
    """
    eps = ls.epsilon
    eg = ls.euler_grid
    li = ls.euler_layer(i)
    ui, vi = li.u.values, li.v.values
    p = -0.5 * (ui * ui + vi * vi)
    for j in range(1, i):
        lj = ls.euler_layer(j)
        p = p - eps ** ((j - i) / 2.0) * (vi * lj.v.values + ui * lj.u.values)
    p_f = Field2D(eg, p, "euler_Y", f"P{i}a_e")

    eu, ev = pure_euler_terms(ls, i)
    resid_u = eps**i * diff(p_f, "x", 1).values + eu
    resid_v = eps**i / np.sqrt(eps) * diff(p_f, "y", 1).values + ev
    scale = max(np.max(np.abs(eu)), np.max(np.abs(ev)), 1e-300)
    resid = max(np.max(np.abs(resid_u)), np.max(np.abs(resid_v))) / scale
    return p_f, float(resid)


def pure_euler_terms(ls: LayerSet, i: int) -> tuple[np.ndarray, np.ndarray]:
    """(E^{u,i}_e, E^{v,i}_e): the purely Eulerian quadratic interactions."""
    eps = ls.epsilon
    se = np.sqrt(eps)
    li = ls.euler_layer(i)
    f = li.fields()
    ui, vi = f["u"].values, f["v"].values
    uix, uiY = f["ux"].values, f["uY"].values
    vix, viY = f["vx"].values, f["vY"].values
    eu = eps**i * (ui * uix + vi * uiY)
    ev = eps ** (i - 0.5) * (ui * vix + vi * viY)
    for j in range(1, i):
        lj = ls.euler_layer(j).fields()
        uj, vj = lj["u"].values, lj["v"].values
        ujx, ujY = lj["ux"].values, lj["uY"].values
        vjx, vjY = lj["vx"].values, lj["vY"].values
        eu += (
            eps ** (i / 2.0) * eps ** (j / 2.0) * (uix * uj + ui * ujx)
            + se * eps ** (i / 2.0) * eps ** ((j - 1) / 2.0) * uiY * vj
            + eps ** ((i - 1) / 2.0) * se * eps ** (j / 2.0) * vi * ujY
        )
        ev += (
            eps ** (i / 2.0) * eps ** ((j - 1) / 2.0) * ui * vjx
            + eps ** ((i - 1) / 2.0) * eps ** (j / 2.0) * vix * uj
            + se * eps ** ((i - 1) / 2.0) * eps ** ((j - 1) / 2.0) * (vi * vjY + viY * vj)
        )
    return eu, ev


# ---------------------------------------------------------------------------
# Forcing
# ---------------------------------------------------------------------------


def assemble_forcing(i: int, ls: LayerSet, tail_tol: float = 1e-4) -> Field2D:
    """f^(i) = -eps^{-i/2} [R^{u,i-1} + R^{u,i}_E + eps^{(i+1)/2} P^{i,a}_px]."""
    if len(ls.euler) < i:
        raise LayerError(f"assemble_forcing({i}) needs Euler layer {i}")
    if len(ls.prandtl) < i - 1:
        raise LayerError(f"assemble_forcing({i}) needs Prandtl layers through {i - 1}")
    eps = ls.epsilon
    ru = r_u_layer(ls, i - 1) + r_uE(ls, i)
    rv = r_v_layer(ls, i - 1) + r_vE(ls, i)
    g = cumulative_tail_y(Field2D(ls.grid, rv, "physical_y", "Rv"), tail_tol)
    paux_x = eps * diff(g, "x", 1).values  # = eps^{(i+1)/2} P^{i,a}_px
    vals = -(ru + paux_x) / eps ** (i / 2.0)
    return Field2D(ls.grid, vals, "physical_y", f"f{i}", tuple(g.warnings))


# ---------------------------------------------------------------------------
# Layer solve
# ---------------------------------------------------------------------------


def default_inflow(ls: LayerSet, i: int):
    """U_i(y) = -u^i_e(1, 0) exp(-y^2): compatible and rapidly decaying."""
    a1 = float(ls.euler_layer(i).u.values[0, 0])

    def fn(y):
        return -a1 * np.exp(-np.asarray(y) ** 2)

    return fn


def solve_layer(
    i: int,
    ls: LayerSet,
    Ui=None,
    forcing: Field2D | None = None,
    scheme: str = "backward_euler",
    final: bool | None = None,
    picard: int = 2,
) -> PrandtlLayer:
    """Construct Prandtl layer i by the homogenized implicit march.

    final=True takes the wall condition v_p(x,0) = 0 and produces the
    pre-cutoff pair (v from the from-zero integral); otherwise
    v^i_p = int_y^ymax u^i_px. The caller appends the result to ls.prandtl.
    """
    if final is None:
        final = i == ls.n
    grid = ls.grid
    eps = ls.epsilon
    xs, ys = grid.x_nodes, grid.y_nodes
    f = forcing if forcing is not None else assemble_forcing(i, ls)

    lay_e = ls.euler_layer(i)
    a_bc = lay_e.u.values[:, 0].copy()  # u^i_e(x, 0)
    a_bc_f = Field2D(ls.euler_grid, np.repeat(a_bc[:, None], ls.euler_grid.ny, 1), "euler_Y", "abc")
    a_bc_x = diff(a_bc_f, "x", 1).values[:, 0]

    coef = ls.u_s_coeffs(i)
    u0p = ls.prandtl_field(0, "u")
    u0py = ls.prandtl_field(0, "uy")
    c0 = 1.0 + u0p
    a_lin = coef["u_sx"]
    b_conv = coef["v_s"]

    chi = chi_hom(ys)[None, :]
    chi2 = chi_hom(ys, 2)[None, :]
    chi1 = chi_hom(ys, 1)[None, :]
    ichi = I_chi(ys)[None, :]
    a_x = a_bc_x[:, None]
    a_v = a_bc[:, None]
    j_terms = (
        c0 * chi * a_x
        + a_lin * chi * a_v
        + b_conv * chi1 * a_v
        + u0py * ichi * a_x
        - chi2 * a_v
    )
    rhs = f.values + j_terms

    if Ui is None:
        Ui = default_inflow(ls, i)
    u0_hom = np.asarray(Ui(ys), dtype=np.float64) + chi_hom(ys) * a_bc[0]
    if abs(float(Ui(0.0)) + a_bc[0]) > max(ls.bc_tol, 1e-8):
        raise LayerError(
            f"in-flow data incompatible at the corner: U_{i}(0) = {float(Ui(0.0)):.3e} "
            f"vs -u^{i}_e(1,0) = {-a_bc[0]:.3e}"
        )
    u0_hom[0] = 0.0

    u_hom, pic = _kernels.linear_march(
        xs, ys, u0_hom, c0, a_lin, b_conv, u0py, rhs,
        np.zeros(grid.nx), scheme=SCHEMES[scheme], picard=picard,
    )
    if not np.all(np.isfinite(u_hom)):
        raise LayerError(f"layer-{i} march produced non-finite values")

    u_p = u_hom - chi * a_v
    u_f = Field2D(grid, u_p, "physical_y", f"u{i}p", f.warnings)
    dux = diff(u_f, "x", 1)
    if final:
        v_f = cumulative_from_zero_y(dux)
        v_f = v_f.with_values(-v_f.values, name=f"v{i}p_precut")
    else:
        v_f = cumulative_tail_y(dux)
        v_f = v_f.with_values(v_f.values, name=f"v{i}p")
    return PrandtlLayer(i, u_f, v_f, pic)


# ---------------------------------------------------------------------------
# Final-layer cutoff
# ---------------------------------------------------------------------------


def cutoff_final_layer(
    u_pre: Field2D,
    v_pre: Field2D,
    epsilon: float,
    ls: LayerSet,
    forcing: Field2D | None = None,
) -> tuple[Field2D, Field2D, Field2D]:
    """Cut the final layer off in the region sqrt(eps) z >~ 1.

    v^n_p = chi(sqrt(eps) z) v_p;  u^n_p = int_x^inf d_y [chi v_p] dx';
    returns (u^n_p, v^n_p, E^(n)) with the cutoff error assembled from the
    closed-form expansion of the commutator terms.
    """
    grid = u_pre.grid
    eps = epsilon
    se = np.sqrt(eps)
    xs, ys = grid.x_nodes, grid.y_nodes
    X, Y = grid.meshes()
    Z = Y / np.sqrt(X)
    s = se * Z
    chi = cutoff_chi(s)
    chi1 = cutoff_chi(s, 1)
    chi2 = cutoff_chi(s, 2)
    chi3 = cutoff_chi(s, 3)

    vp = v_pre.values
    up = u_pre.values
    vn = Field2D(grid, chi * vp, "physical_y", "vnp", v_pre.warnings)

    n = ls.n
    coef = ls.u_s_coeffs(n)
    u0p = ls.prandtl_field(0, "u")
    f_n = forcing if forcing is not None else assemble_forcing(n, ls)

    upy = diff(u_pre, "y", 1).values
    upyy = diff(u_pre, "y", 2).values
    vpy = diff(v_pre, "y", 1).values
    vpyy = diff(v_pre, "y", 2).values

    sqx = np.sqrt(X)
    fac = se / sqx
    i1 = _tail_x(grid, fac * chi1 * vp - (se * Z / (2.0 * X)) * chi1 * up)
    # u^n_p = int_x^inf d_y[chi v_p] dx' = chi u_p + i1 after integrating the
    # chi u_px piece by parts; the latter form keeps the wall trace exact and
    # its x'-integrand compactly supported (chi' vanishes off the cutoff band).
    un = Field2D(grid, chi * up + i1, "physical_y", "unp", u_pre.warnings)
    i2 = _tail_x(
        grid,
        (eps / X) * chi2 * vp + 2.0 * fac * chi1 * vpy - (se * Z / (2.0 * X)) * chi1 * upy,
    )
    i3 = _tail_x(
        grid,
        (eps**1.5 / X**1.5) * chi3 * vp
        + 3.0 * (eps / X) * chi2 * vpy
        + 3.0 * fac * chi1 * vpyy
        - (se * Z / (2.0 * X)) * chi1 * upyy,
    )
    e_n = (
        -(1.0 + u0p) * fac * chi1 * vp
        + coef["u_sx"] * i1
        + coef["v_s"] * i2
        - i3
        + (1.0 - chi) * f_n.values
    )
    e_f = Field2D(grid, e_n, "physical_y", "En", f_n.warnings)
    return un, vn, e_f


def _tail_x(grid: Grid, vals: np.ndarray) -> np.ndarray:
    return cumulative_tail_x(Field2D(grid, vals, "physical_y", ""), tail_tol=np.inf).values


def finalize_layer(i: int, ls: LayerSet, lay: PrandtlLayer,
                   forcing: Field2D | None = None) -> PrandtlLayer:
    """Apply the final-layer cutoff, storing pre-cutoff fields and E^(n)."""
    un, vn, e_n = cutoff_final_layer(lay.u, lay.v, ls.epsilon, ls, forcing)
    wall_u = lay.u.values[:, 0] - un.values[:, 0]
    if np.max(np.abs(wall_u)) > 1e-12 * max(1.0, np.max(np.abs(lay.u.values))):
        raise LayerError("cutoff changed the wall trace of u_p")
    return PrandtlLayer(
        index=i,
        u=un,
        v=vn,
        picard_delta=lay.picard_delta,
        u_precut=lay.u,
        v_precut=lay.v,
        cutoff_error=e_n,
    )


def check_boundary_matching(ls: LayerSet, tol: float | None = None) -> list:
    """u^i_p(x,0) + u^i_e(x,0) = 0 and v^{i-1}_p(x,0) + v^i_e(x,0) = 0."""
    tol = ls.bc_tol if tol is None else tol
    issues = []
    for i in range(1, len(ls.prandtl) + 1):
        du = ls.prandtl_layer(i).u.values[:, 0] + ls.euler_layer(i).u.values[:, 0]
        if np.max(np.abs(du)) > tol:
            issues.append(f"u-matching violated at layer {i}: {np.max(np.abs(du)):.3e}")
    for i in range(1, len(ls.euler) + 1):
        v_prev = ls.layer0.v0p.values[:, 0] if i == 1 else ls.prandtl_layer(i - 1).v.values[:, 0]
        dv = v_prev + ls.euler_layer(i).v.values[:, 0]
        if np.max(np.abs(dv)) > tol:
            issues.append(f"v-matching violated at layer {i}: {np.max(np.abs(dv)):.3e}")
    return issues
