"""Hot numeric kernels: numba-jitted implementations with numpy fallbacks.

The jitted path is the default. Set PRANDTL_NO_NUMBA=1 (or run without numba
installed) to select the pure-numpy path; both implementations are exported
unconditionally so the benchmark and the equivalence tests can compare them
directly. PRANDTL_THREADS caps the numba thread pool.

Kernels:
  thomas_solve          tridiagonal solve
  nonlinear_march       implicit von Mises march of q_x = d_eta((1-d+q) q_eta)
  linear_march          implicit march of the linearized Prandtl systems
  poisson_node          graded-panel Gauss-Legendre quadrature of P_Y * f
  shoot_front           fixed-step RK4 shot of the self-similar front ODE
  ppoly_eval            piecewise-cubic evaluation (scipy PPoly layout)
"""

from __future__ import annotations

import os

import numpy as np

_FORCE_NUMPY = os.environ.get("PRANDTL_NO_NUMBA", "").strip() not in ("", "0")

try:  # pragma: no cover - exercised via the env-flag tests
    if _FORCE_NUMPY:
        raise ImportError("numba disabled by PRANDTL_NO_NUMBA")
    import numba
    from numba import njit, prange

    _threads = os.environ.get("PRANDTL_THREADS", "").strip()
    if _threads:
        numba.set_num_threads(max(1, min(int(_threads), numba.get_num_threads())))
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        if args and callable(args[0]):
            return args[0]

        def deco(fn):
            return fn

        return deco

    prange = range  # type: ignore[assignment]


def backend() -> str:
    return "numba" if HAS_NUMBA else "numpy"


# 4-point Gauss-Legendre rule on [-1, 1]
_GL_X = np.array(
    [-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526]
)
_GL_W = np.array(
    [0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538]
)


# ---------------------------------------------------------------------------
# Piecewise cubic evaluation, scipy PPoly layout: breaks (n+1,), coef (4, n)
# ---------------------------------------------------------------------------


def _ppoly_eval_py(breaks, coef, t):
    t = np.asarray(t, dtype=np.float64)
    idx = np.clip(np.searchsorted(breaks, t, side="right") - 1, 0, coef.shape[1] - 1)
    dt = t - breaks[idx]
    return ((coef[0, idx] * dt + coef[1, idx]) * dt + coef[2, idx]) * dt + coef[3, idx]


@njit(cache=True)
def _ppoly_scalar_nb(breaks, coef, t):  # pragma: no cover - jitted
    n = coef.shape[1]
    lo, hi = 0, breaks.shape[0] - 1
    if t <= breaks[0]:
        i = 0
    elif t >= breaks[hi]:
        i = n - 1
    else:
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if breaks[mid] <= t:
                lo = mid
            else:
                hi = mid
        i = lo
    dt = t - breaks[i]
    return ((coef[0, i] * dt + coef[1, i]) * dt + coef[2, i]) * dt + coef[3, i]


@njit(cache=True)
def _ppoly_eval_nb(breaks, coef, t):  # pragma: no cover - jitted
    out = np.empty(t.shape[0])
    for k in range(t.shape[0]):
        out[k] = _ppoly_scalar_nb(breaks, coef, t[k])
    return out


def ppoly_eval(breaks, coef, t):
    if HAS_NUMBA:
        return _ppoly_eval_nb(breaks, coef, np.ascontiguousarray(t, dtype=np.float64))
    return _ppoly_eval_py(breaks, coef, t)


# ---------------------------------------------------------------------------
# Tridiagonal solve
# ---------------------------------------------------------------------------


def _thomas_py(lower, diag, upper, rhs):
    from scipy.linalg import solve_banded

    n = diag.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    return solve_banded((1, 1), ab, rhs)


@njit(cache=True)
def _thomas_nb(lower, diag, upper, rhs):  # pragma: no cover - jitted
    n = diag.shape[0]
    cp = np.empty(n)
    dp = np.empty(n)
    x = np.empty(n)
    cp[0] = upper[0] / diag[0]
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        m = diag[i] - lower[i] * cp[i - 1]
        cp[i] = upper[i] / m
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / m
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def thomas_solve(lower, diag, upper, rhs):
    if HAS_NUMBA:
        return _thomas_nb(lower, diag, upper, rhs)
    return _thomas_py(lower, diag, upper, rhs)


# ---------------------------------------------------------------------------
# Nonlinear von Mises march:  q_x = d_eta( (1 - delta + q) q_eta )
# Implicit in x (backward Euler or variable-step BDF2), conservative flux
# form in eta, Newton with an analytic tridiagonal Jacobian.
# Status codes: 0 ok, 1 Newton stall, 2 parabolicity lost (1 - delta + q <= 0).
# ---------------------------------------------------------------------------


def _march_core(xs, etas, q0, delta, newton_tol, max_newton, scheme, numpy_solver):
    nx, ne = xs.shape[0], etas.shape[0]
    q = np.empty((nx, ne))
    q[0] = q0
    h = np.diff(etas)
    hbar = 0.5 * (h[:-1] + h[1:])
    status = 0
    stat_i = -1
    stat_j = -1
    last_res = 0.0
    for m in range(1, nx):
        dx = xs[m] - xs[m - 1]
        if scheme == 2 and m >= 2:
            dx_prev = xs[m - 1] - xs[m - 2]
            rho = dx / dx_prev
            ct = (1.0 + 2.0 * rho) / (dx * (1.0 + rho))
            expl = -(-(1.0 + rho) / dx) * q[m - 1] - (rho * rho / (dx * (1.0 + rho))) * q[m - 2]
        else:
            ct = 1.0 / dx
            expl = q[m - 1] / dx
        qn = q[m - 1].copy()
        qn[0] = 0.0
        qn[-1] = delta
        converged = False
        for _ in range(max_newton):
            a_face = 1.0 - delta + 0.5 * (qn[1:] + qn[:-1])
            grad = (qn[1:] - qn[:-1]) / h
            flux = a_face * grad
            res = np.empty(ne)
            res[0] = 0.0
            res[-1] = 0.0
            res[1:-1] = ct * qn[1:-1] - expl[1:-1] - (flux[1:] - flux[:-1]) / hbar
            rmax = np.max(np.abs(res))
            last_res = rmax
            if rmax <= newton_tol:
                converged = True
                break
            dfl_l = 0.5 * grad - a_face / h  # d flux / d q_left
            dfl_r = 0.5 * grad + a_face / h  # d flux / d q_right
            lower = np.zeros(ne)
            diagm = np.ones(ne)
            upper = np.zeros(ne)
            lower[1:-1] = dfl_l[:-1] / hbar
            upper[1:-1] = -dfl_r[1:] / hbar
            diagm[1:-1] = ct - (dfl_l[1:] - dfl_r[:-1]) / hbar
            delta_q = numpy_solver(lower, diagm, upper, -res)
            qn = qn + delta_q
            qn[0] = 0.0
            qn[-1] = delta
        q[m] = qn
        if not converged:
            return q, 1, m, -1, last_res
        pmin = np.min(1.0 - delta + qn)
        if pmin <= 0.0:
            j = int(np.argmin(1.0 - delta + qn))
            return q, 2, m, j, last_res
    return q, status, stat_i, stat_j, last_res


def _nonlinear_march_py(xs, etas, q0, delta, newton_tol, max_newton, scheme):
    return _march_core(xs, etas, q0, delta, newton_tol, max_newton, scheme, _thomas_py)


@njit(cache=True)
def _nonlinear_march_nb(xs, etas, q0, delta, newton_tol, max_newton, scheme):  # pragma: no cover
    nx, ne = xs.shape[0], etas.shape[0]
    q = np.empty((nx, ne))
    q[0] = q0
    h = np.diff(etas)
    hbar = 0.5 * (h[:-1] + h[1:])
    last_res = 0.0
    for m in range(1, nx):
        dx = xs[m] - xs[m - 1]
        if scheme == 2 and m >= 2:
            dx_prev = xs[m - 1] - xs[m - 2]
            rho = dx / dx_prev
            ct = (1.0 + 2.0 * rho) / (dx * (1.0 + rho))
            expl = ((1.0 + rho) / dx) * q[m - 1] - (rho * rho / (dx * (1.0 + rho))) * q[m - 2]
        else:
            ct = 1.0 / dx
            expl = q[m - 1] / dx
        qn = q[m - 1].copy()
        qn[0] = 0.0
        qn[-1] = delta
        converged = False
        for _ in range(max_newton):
            a_face = 1.0 - delta + 0.5 * (qn[1:] + qn[:-1])
            grad = (qn[1:] - qn[:-1]) / h
            flux = a_face * grad
            res = np.zeros(ne)
            for i in range(1, ne - 1):
                res[i] = ct * qn[i] - expl[i] - (flux[i] - flux[i - 1]) / hbar[i - 1]
            rmax = np.max(np.abs(res))
            last_res = rmax
            if rmax <= newton_tol:
                converged = True
                break
            dfl_l = 0.5 * grad - a_face / h
            dfl_r = 0.5 * grad + a_face / h
            lower = np.zeros(ne)
            diagm = np.ones(ne)
            upper = np.zeros(ne)
            for i in range(1, ne - 1):
                lower[i] = dfl_l[i - 1] / hbar[i - 1]
                upper[i] = -dfl_r[i] / hbar[i - 1]
                diagm[i] = ct - (dfl_l[i] - dfl_r[i - 1]) / hbar[i - 1]
            dq = _thomas_nb(lower, diagm, upper, -res)
            qn = qn + dq
            qn[0] = 0.0
            qn[-1] = delta
        q[m] = qn
        if not converged:
            return q, 1, m, -1, last_res
        pmin = 1.0
        jmin = -1
        for i in range(ne):
            v = 1.0 - delta + qn[i]
            if v < pmin:
                pmin = v
                jmin = i
        if pmin <= 0.0:
            return q, 2, m, jmin, last_res
    return q, 0, -1, -1, last_res


def nonlinear_march(xs, etas, q0, delta, newton_tol=1e-12, max_newton=40, scheme=1):
    args = (
        np.ascontiguousarray(xs, dtype=np.float64),
        np.ascontiguousarray(etas, dtype=np.float64),
        np.ascontiguousarray(q0, dtype=np.float64),
        float(delta),
        float(newton_tol),
        int(max_newton),
        int(scheme),
    )
    if HAS_NUMBA:
        return _nonlinear_march_nb(*args)
    return _nonlinear_march_py(*args)


# ---------------------------------------------------------------------------
# Linear implicit march for the layer-i systems:
#   c0(y) u_x + a(y) u + b(y) u_y - u_yy = rhs(y),  u(0) = bc0(x), u(ymax) = 0
# c0, a, b, rhs are frozen per station (arrays over (nx, ny)); x-derivative by
# backward Euler (scheme 1) or variable-step BDF2 (scheme 2).
# ---------------------------------------------------------------------------


def _cumtrapz_from_zero(ys, col):
    out = np.zeros_like(col)
    out[1:] = np.cumsum(0.5 * (col[1:] + col[:-1]) * np.diff(ys))
    return out


def _linear_march_py(xs, ys, u0, c0, a, b, cpl, rhs, bc0, scheme, picard):
    nx, ny = c0.shape
    u = np.empty((nx, ny))
    u[0] = u0
    h = np.diff(ys)
    hl = h[:-1]
    hr = h[1:]
    d1l = -hr / (hl * (hl + hr))
    d1c = (hr - hl) / (hl * hr)
    d1r = hl / (hr * (hl + hr))
    d2l = 2.0 / (hl * (hl + hr))
    d2c = -2.0 / (hl * hr)
    d2r = 2.0 / (hr * (hl + hr))
    has_cpl = np.any(cpl != 0.0)
    picard_delta = 0.0
    for m in range(1, nx):
        dx = xs[m] - xs[m - 1]
        if scheme == 2 and m >= 2:
            dx_prev = xs[m - 1] - xs[m - 2]
            rho = dx / dx_prev
            alpha = (1.0 + 2.0 * rho) / (dx * (1.0 + rho))
            expl = ((1.0 + rho) / dx) * u[m - 1] - (rho * rho / (dx * (1.0 + rho))) * u[m - 2]
        else:
            alpha = 1.0 / dx
            expl = u[m - 1] / dx
        lower = np.zeros(ny)
        diagm = np.ones(ny)
        upper = np.zeros(ny)
        diagm[1:-1] = c0[m, 1:-1] * alpha + a[m, 1:-1] + b[m, 1:-1] * d1c - d2c
        lower[1:-1] = b[m, 1:-1] * d1l - d2l
        upper[1:-1] = b[m, 1:-1] * d1r - d2r
        if has_cpl and m >= 2:
            ux_lag = (u[m - 1] - u[m - 2]) / (xs[m - 1] - xs[m - 2])
        else:
            ux_lag = np.zeros(ny)
        u_prev_sweep = None
        for sweep in range(max(1, picard)):
            vlag = -_cumtrapz_from_zero(ys, ux_lag) if has_cpl else 0.0
            r = np.zeros(ny)
            r[1:-1] = rhs[m, 1:-1] + c0[m, 1:-1] * expl[1:-1] - (
                cpl[m, 1:-1] * vlag[1:-1] if has_cpl else 0.0
            )
            r[0] = bc0[m]
            r[-1] = 0.0
            u[m] = _thomas_py(lower, diagm, upper, r)
            if sweep + 1 < max(1, picard):
                u_prev_sweep = u[m].copy()
                ux_lag = (u[m] - u[m - 1]) / dx
        if u_prev_sweep is not None:
            picard_delta = max(picard_delta, float(np.max(np.abs(u[m] - u_prev_sweep))))
    return u, picard_delta


@njit(cache=True)
def _linear_march_nb(xs, ys, u0, c0, a, b, cpl, rhs, bc0, scheme, picard):  # pragma: no cover
    nx, ny = c0.shape
    u = np.empty((nx, ny))
    u[0] = u0
    h = np.diff(ys)
    has_cpl = False
    for i in range(nx):
        for j in range(ny):
            if cpl[i, j] != 0.0:
                has_cpl = True
                break
        if has_cpl:
            break
    picard_delta = 0.0
    lower = np.zeros(ny)
    diagm = np.ones(ny)
    upper = np.zeros(ny)
    r = np.zeros(ny)
    expl = np.zeros(ny)
    ux_lag = np.zeros(ny)
    vlag = np.zeros(ny)
    usweep = np.zeros(ny)
    for m in range(1, nx):
        dx = xs[m] - xs[m - 1]
        if scheme == 2 and m >= 2:
            dx_prev = xs[m - 1] - xs[m - 2]
            rho = dx / dx_prev
            alpha = (1.0 + 2.0 * rho) / (dx * (1.0 + rho))
            for i in range(ny):
                expl[i] = ((1.0 + rho) / dx) * u[m - 1, i] - (
                    rho * rho / (dx * (1.0 + rho))
                ) * u[m - 2, i]
        else:
            alpha = 1.0 / dx
            for i in range(ny):
                expl[i] = u[m - 1, i] / dx
        for i in range(1, ny - 1):
            hl = h[i - 1]
            hr = h[i]
            d1l = -hr / (hl * (hl + hr))
            d1c = (hr - hl) / (hl * hr)
            d1r = hl / (hr * (hl + hr))
            d2l = 2.0 / (hl * (hl + hr))
            d2c = -2.0 / (hl * hr)
            d2r = 2.0 / (hr * (hl + hr))
            diagm[i] = c0[m, i] * alpha + a[m, i] + b[m, i] * d1c - d2c
            lower[i] = b[m, i] * d1l - d2l
            upper[i] = b[m, i] * d1r - d2r
        diagm[0] = 1.0
        upper[0] = 0.0
        diagm[ny - 1] = 1.0
        lower[ny - 1] = 0.0
        if has_cpl and m >= 2:
            dxp = xs[m - 1] - xs[m - 2]
            for i in range(ny):
                ux_lag[i] = (u[m - 1, i] - u[m - 2, i]) / dxp
        else:
            for i in range(ny):
                ux_lag[i] = 0.0
        nsweep = picard if picard > 1 else 1
        did_multi = False
        for sweep in range(nsweep):
            if has_cpl:
                vlag[0] = 0.0
                for i in range(1, ny):
                    vlag[i] = vlag[i - 1] - 0.5 * (ux_lag[i] + ux_lag[i - 1]) * h[i - 1]
            for i in range(1, ny - 1):
                r[i] = rhs[m, i] + c0[m, i] * expl[i]
                if has_cpl:
                    r[i] -= cpl[m, i] * vlag[i]
            r[0] = bc0[m]
            r[ny - 1] = 0.0
            sol = _thomas_nb(lower, diagm, upper, r)
            for i in range(ny):
                u[m, i] = sol[i]
            if sweep + 1 < nsweep:
                did_multi = True
                for i in range(ny):
                    usweep[i] = sol[i]
                    ux_lag[i] = (sol[i] - u[m - 1, i]) / dx
        if did_multi:
            # usweep holds the previous sweep's solution
            dmax = 0.0
            for i in range(ny):
                d = abs(u[m, i] - usweep[i])
                if d > dmax:
                    dmax = d
            if dmax > picard_delta:
                picard_delta = dmax
    return u, picard_delta


def linear_march(xs, ys, u0, c0, a, b, cpl, rhs, bc0, scheme=1, picard=2):
    """March  c0 u_x + a u + b u_y + cpl * v - u_yy = rhs,  v = -int_0^y u_x.

    Dirichlet data bc0 at y=0 and 0 at y_max. The v-coupling term is lagged
    one x-step (Picard); picard=2 re-solves each station once with the
    updated u_x. Returns (u, largest between-sweep correction).
    """
    args = tuple(
        np.ascontiguousarray(v, dtype=np.float64)
        for v in (xs, ys, u0, c0, a, b, cpl, rhs, bc0)
    ) + (int(scheme), int(picard))
    if HAS_NUMBA:
        return _linear_march_nb(*args)
    return _linear_march_py(*args)


# ---------------------------------------------------------------------------
# Poisson extension quadrature.
# v(x, Y) = integral over [t_lo, t_hi] of (1/pi) Y / (Y^2 + (x-t)^2) f(t) dt
# with f a piecewise cubic (PPoly). Panels: width <= Y/4 / 2^level within
# |t - x| <= 8 Y, geometrically graded (ratio 1.5) outside.
# ---------------------------------------------------------------------------


def _cap_width(x, Y, a, b, level):
    """Largest admissible panel width on [a, b]: Y/4 within |t - x| <= 8 Y,
    growing proportionally to the distance from the kernel peak outside."""
    if a <= x <= b:
        dmin = 0.0
    elif b < x:
        dmin = x - b
    else:
        dmin = a - x
    return max(Y, dmin / 8.0) / (4.0 * 2.0**level)


def _poisson_node_py(x, Y, breaks, coef, t_lo, t_hi, level):
    acc = 0.0
    nseg = breaks.shape[0] - 1
    for seg in range(nseg):
        a = max(breaks[seg], t_lo)
        b = min(breaks[seg + 1], t_hi)
        if b <= a:
            continue
        nsub = int(np.ceil((b - a) / _cap_width(x, Y, a, b, level)))
        nsub = min(max(nsub, 1), 100000)
        edges = np.linspace(a, b, nsub + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        t = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
        fv = _ppoly_eval_py(breaks, coef, t)
        kern = (Y / np.pi) / (Y * Y + (x - t) ** 2)
        w = (half[:, None] * _GL_W[None, :]).ravel()
        acc += float(np.sum(w * kern * fv))
    return acc


@njit(cache=True)
def _poisson_node_nb(x, Y, breaks, coef, t_lo, t_hi, level):  # pragma: no cover
    acc = 0.0
    nseg = breaks.shape[0] - 1
    for seg in range(nseg):
        a = breaks[seg]
        if a < t_lo:
            a = t_lo
        b = breaks[seg + 1]
        if b > t_hi:
            b = t_hi
        if b <= a:
            continue
        if a <= x <= b:
            dmin = 0.0
        elif b < x:
            dmin = x - b
        else:
            dmin = a - x
        half_scale = dmin / 8.0
        cap = Y if Y > half_scale else half_scale
        cap = cap / (4.0 * 2.0**level)
        nsub = int(np.ceil((b - a) / cap))
        if nsub < 1:
            nsub = 1
        if nsub > 100000:
            nsub = 100000
        hstep = (b - a) / nsub
        c3 = coef[0, seg]
        c2 = coef[1, seg]
        c1 = coef[2, seg]
        c0 = coef[3, seg]
        bleft = breaks[seg]
        for kk in range(nsub):
            mid = a + (kk + 0.5) * hstep
            half = 0.5 * hstep
            for g in range(4):
                t = mid + half * _GL_X[g]
                dt = t - bleft
                fv = ((c3 * dt + c2) * dt + c1) * dt + c0
                kern = (Y / np.pi) / (Y * Y + (x - t) * (x - t))
                acc += half * _GL_W[g] * kern * fv
    return acc


@njit(cache=True, parallel=True)
def _poisson_grid_nb(xs, Ys, breaks, coef, t_lo, t_hi, level):  # pragma: no cover
    nx = xs.shape[0]
    nY = Ys.shape[0]
    out = np.empty((nx, nY))
    for flat in prange(nx * nY):
        i = flat // nY
        j = flat % nY
        Y = Ys[j]
        if Y <= 0.0:
            out[i, j] = _ppoly_scalar_nb(breaks, coef, xs[i])
        else:
            out[i, j] = _poisson_node_nb(xs[i], Y, breaks, coef, t_lo, t_hi, level)
    return out


def _poisson_grid_py(xs, Ys, breaks, coef, t_lo, t_hi, level):
    out = np.empty((xs.size, Ys.size))
    for j, Y in enumerate(Ys):
        if Y <= 0.0:
            out[:, j] = _ppoly_eval_py(breaks, coef, xs)
            continue
        for i, x in enumerate(xs):
            out[i, j] = _poisson_node_py(x, Y, breaks, coef, t_lo, t_hi, level)
    return out


def poisson_grid(xs, Ys, breaks, coef, t_lo, t_hi, level=0):
    args = (
        np.ascontiguousarray(xs, dtype=np.float64),
        np.ascontiguousarray(Ys, dtype=np.float64),
        np.ascontiguousarray(breaks, dtype=np.float64),
        np.ascontiguousarray(coef, dtype=np.float64),
        float(t_lo),
        float(t_hi),
        int(level),
    )
    if HAS_NUMBA:
        return _poisson_grid_nb(*args)
    return _poisson_grid_py(*args)


# ---------------------------------------------------------------------------
# Front ODE shooting:  (1 - delta + p) p'' + (p')^2 + (z/2) p' = 0
# ---------------------------------------------------------------------------


def _shoot_steps(delta, slope0, z_max, h):
    n = int(np.ceil(z_max / h))
    p = 0.0
    v = slope0
    z = 0.0
    hh = z_max / n
    for _ in range(n):
        k1p = v
        k1v = -(v * v + 0.5 * z * v) / (1.0 - delta + p)
        p2 = p + 0.5 * hh * k1p
        v2 = v + 0.5 * hh * k1v
        k2p = v2
        k2v = -(v2 * v2 + 0.5 * (z + 0.5 * hh) * v2) / (1.0 - delta + p2)
        p3 = p + 0.5 * hh * k2p
        v3 = v + 0.5 * hh * k2v
        k3p = v3
        k3v = -(v3 * v3 + 0.5 * (z + 0.5 * hh) * v3) / (1.0 - delta + p3)
        p4 = p + hh * k3p
        v4 = v + hh * k3v
        k4p = v4
        k4v = -(v4 * v4 + 0.5 * (z + hh) * v4) / (1.0 - delta + p4)
        p += (hh / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        v += (hh / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        z += hh
        if p > 10.0 * max(delta, 1e-300) or v < -1.0:
            break
    return p, v


_shoot_steps_nb = njit(cache=True)(_shoot_steps) if HAS_NUMBA else _shoot_steps


def shoot_front(delta, slope0, z_max, h):
    """(phi(z_max), phi'(z_max)) for the front ODE with phi(0)=0, phi'(0)=slope0."""
    return _shoot_steps_nb(float(delta), float(slope0), float(z_max), float(h))
