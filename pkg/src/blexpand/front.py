"""Self-similar front profile bridging the wall slip to the free stream.

The profile solves (1 - delta + p) p'' + (p')^2 + (z/2) p' = 0 with p(0) = 0
and p(inf) = delta, and is a nonlinear deformation of the Gaussian error
profile e_delta(z) = delta * erf(z/2). The production solver is Newton
collocation on a uniform z-grid initialized at e_delta; a shooting/bisection
solver is kept as an independent oracle for tests.

Downstream layers consume the front through front_eval, which assembles
(x, eta) derivatives of p(eta/sqrt(x)) from z-derivatives via the chain rule
identities dz/deta = x^(-1/2), dz/dx = -z/(2x). Second and third z-derivatives
are recovered exactly from the ODE rather than from spline differentiation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import erf

from . import _kernels
from .grid import fornberg_weights


class FrontError(RuntimeError):
    pass


def erf_front(delta: float, z, k: int = 0):
    """Gaussian front e_delta and its first two z-derivatives."""
    z = np.asarray(z, dtype=np.float64)
    if k == 0:
        out = delta * erf(0.5 * z)
    elif k == 1:
        out = (delta / np.sqrt(np.pi)) * np.exp(-0.25 * z * z)
    elif k == 2:
        out = -(0.5 * z) * (delta / np.sqrt(np.pi)) * np.exp(-0.25 * z * z)
    else:
        raise ValueError("erf_front supports derivatives k in {0, 1, 2}")
    return out if out.ndim else float(out)


@dataclass(eq=False)
class FrontProfile:
    """Sampled front phi_star and its defect psi = phi_star - e_delta."""

    delta: float
    z_nodes: np.ndarray
    phi_star: np.ndarray
    psi: np.ndarray
    dphi0: float
    residual: float
    _spline: CubicSpline | None = field(default=None, repr=False)

    def __post_init__(self):
        if not (0.0 <= self.delta <= 0.1):
            raise FrontError("delta must lie in [0, 0.1]")
        if self.phi_star[0] != 0.0:
            raise FrontError("phi_star[0] must be 0")
        if self.dphi0 < 0.0:
            raise FrontError("front slope at the wall must be nonnegative")
        if np.max(np.abs(self.psi)) > max(self.delta, 1e-12):
            raise FrontError("defect psi exceeds delta")

    @property
    def z_max(self) -> float:
        return float(self.z_nodes[-1])

    def spline(self) -> CubicSpline:
        if self._spline is None:
            self._spline = CubicSpline(self.z_nodes, self.phi_star)
        return self._spline

    def phi(self, z, deriv: int = 0):
        """phi_star and z-derivatives up to order 3; constant-delta tail."""
        z = np.asarray(z, dtype=np.float64)
        inside = z < self.z_max
        zc = np.clip(z, 0.0, self.z_max)
        sp = self.spline()
        p = sp(zc)
        if deriv == 0:
            out = np.where(inside, p, self.delta)
            return out if out.ndim else float(out)
        p1 = sp(zc, 1)
        if deriv == 1:
            out = np.where(inside, p1, 0.0)
            return out if out.ndim else float(out)
        denom = 1.0 - self.delta + p
        p2 = -(p1 * p1 + 0.5 * zc * p1) / denom
        if deriv == 2:
            out = np.where(inside, p2, 0.0)
            return out if out.ndim else float(out)
        if deriv == 3:
            p3 = -(3.0 * p1 * p2 + 0.5 * p1 + 0.5 * zc * p2) / denom
            out = np.where(inside, p3, 0.0)
            return out if out.ndim else float(out)
        raise ValueError("deriv must be in {0, 1, 2, 3}")


def solve_front(
    delta: float,
    z_max: float = 16.0,
    bc_tol: float = 1e-10,
    newton_tol: float = 1e-10,
    n_nodes: int = 2049,
    max_newton: int = 60,
) -> FrontProfile:
    """Newton collocation for the front BVP, initialized at e_delta."""
    if not (0.0 <= delta <= 0.1):
        raise FrontError("delta must lie in (0, 0.1]; delta = 0 collapses to zero")
    if z_max < 12.0:
        raise FrontError("z_max must be >= 12 so the Gaussian tail is negligible")
    z = np.linspace(0.0, z_max, n_nodes)
    h = z[1] - z[0]
    phi = erf_front(delta, z)
    phi[0] = 0.0
    phi[-1] = delta

    def interior_residual(p):
        d1 = (p[2:] - p[:-2]) / (2.0 * h)
        d2 = (p[2:] - 2.0 * p[1:-1] + p[:-2]) / (h * h)
        return (1.0 - delta + p[1:-1]) * d2 + d1 * d1 + 0.5 * z[1:-1] * d1

    res = interior_residual(phi)
    last = float(np.max(np.abs(res))) if res.size else 0.0
    for _ in range(max_newton):
        if last <= newton_tol:
            break
        d1 = (phi[2:] - phi[:-2]) / (2.0 * h)
        d2 = (phi[2:] - 2.0 * phi[1:-1] + phi[:-2]) / (h * h)
        coef = 1.0 - delta + phi[1:-1]
        if np.any(coef <= 0.0):
            j = int(np.argmin(coef)) + 1
            raise FrontError(f"degenerate front: 1 - delta + phi <= 0 at z = {z[j]:.4f}")
        diag = d2 - 2.0 * coef / (h * h)
        off = d1 + 0.5 * z[1:-1]
        lower = np.concatenate(([0.0], coef / (h * h) - off / (2.0 * h), [0.0]))
        upper = np.concatenate(([0.0], coef / (h * h) + off / (2.0 * h), [0.0]))
        dmain = np.concatenate(([1.0], diag, [1.0]))
        rhs = np.concatenate(([0.0], -res, [0.0]))
        # shift sub/super diagonals to the banded-layout convention
        lo = np.zeros_like(dmain)
        up = np.zeros_like(dmain)
        lo[1:-1] = lower[1:-1]
        up[1:-1] = upper[1:-1]
        step = _kernels.thomas_solve(lo, dmain, up, rhs)
        phi = phi + step
        phi[0] = 0.0
        phi[-1] = delta
        res = interior_residual(phi)
        last = float(np.max(np.abs(res)))
    else:
        raise FrontError(f"front Newton stalled; last sup residual = {last:.3e}")

    if abs(phi[-1] - delta) > bc_tol:
        raise FrontError("far boundary condition violated")
    psi = phi - erf_front(delta, z)
    w0 = fornberg_weights(0.0, z[:6], 1)
    dphi0 = float(w0 @ phi[:6])
    return FrontProfile(delta, z, phi, psi, dphi0, last)


def solve_front_shooting(
    delta: float,
    z_max: float = 16.0,
    h: float = 1e-3,
    tol: float = 1e-14,
    max_bisect: int = 200,
) -> tuple[float, float]:
    """Shooting + bisection oracle: returns (phi'(0), phi(z_max)).

    Independent of the collocation path: fixed-step RK4 on the first-order
    system, bisecting the wall slope until the far value hits delta.
    """
    if delta == 0.0:
        return 0.0, 0.0

    def endpoint(s):
        p, _ = _kernels.shoot_front(delta, s, z_max, h)
        return p - delta

    s_lo, s_hi = 1e-6 * delta, 2.0 * delta
    f_lo, f_hi = endpoint(s_lo), endpoint(s_hi)
    if f_lo > 0 or f_hi < 0:
        raise FrontError("shooting bracket does not straddle the target")
    for _ in range(max_bisect):
        s_mid = 0.5 * (s_lo + s_hi)
        f_mid = endpoint(s_mid)
        if f_mid > 0:
            s_hi = s_mid
        else:
            s_lo = s_mid
        if s_hi - s_lo < tol * max(delta, 1.0):
            break
    s = 0.5 * (s_lo + s_hi)
    p, _ = _kernels.shoot_front(delta, s, z_max, h)
    return s, p


def shoot_profile(delta: float, slope0: float, z_nodes: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """Front profile samples from the RK4 shot (oracle helper)."""
    out = np.empty_like(z_nodes)
    for i, zv in enumerate(z_nodes):
        if zv == 0.0:
            out[i] = 0.0
        else:
            out[i], _ = _kernels.shoot_front(delta, slope0, zv, h)
    return out


def front_eval(front: FrontProfile, x, eta, k: int = 0, l: int = 0):
    """d^k/dx^k d^l/deta^l of phi_star(eta/sqrt(x)); k, l <= 2, k + l <= 3."""
    if k < 0 or l < 0 or k > 2 or l > 2 or k + l > 3:
        raise ValueError("front_eval requires k, l <= 2 and k + l <= 3")
    x = np.asarray(x, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    if np.any(x < 1.0) or np.any(eta < 0.0):
        raise ValueError("front_eval requires x >= 1 and eta >= 0")
    z = eta / np.sqrt(x)
    out = _chain_eval(front.phi, front.delta, x, z, k, l)
    return out if np.ndim(out) else float(out)


def gaussian_front_eval(delta: float, x, eta, k: int = 0, l: int = 0):
    """front_eval with the exact Gaussian front e_delta (closed forms)."""
    x = np.asarray(x, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    z = eta / np.sqrt(x)

    def phi(zv, deriv=0):
        zv = np.asarray(zv, dtype=np.float64)
        if deriv <= 2:
            return erf_front(delta, zv, deriv)
        e1 = erf_front(delta, zv, 1)
        return e1 * (zv * zv - 2.0) / 4.0

    out = _chain_eval(phi, delta, x, z, k, l)
    return out if np.ndim(out) else float(out)


def _chain_eval(phi, delta, x, z, k, l):
    if (k, l) == (0, 0):
        return phi(z, 0)
    p1 = phi(z, 1)
    if (k, l) == (0, 1):
        return p1 / np.sqrt(x)
    if (k, l) == (1, 0):
        return -(z / (2.0 * x)) * p1
    p2 = phi(z, 2)
    if (k, l) == (0, 2):
        return p2 / x
    if (k, l) == (1, 1):
        return -(0.5 * p1 + 0.5 * z * p2) * x**-1.5
    if (k, l) == (2, 0):
        return (0.75 * z * p1 + 0.25 * z * z * p2) / (x * x)
    p3 = phi(z, 3)
    if (k, l) == (1, 2):
        return -(p2 + 0.5 * z * p3) / (x * x)
    if (k, l) == (2, 1):
        return (0.75 * p1 + 1.25 * z * p2 + 0.25 * z * z * p3) * x**-2.5
    raise AssertionError("unreachable")
