"""Small dense primal-dual interior-point solver for second-order cone programs.

Solves

    minimize    c^T x
    subject to  G x + s = h,   s in Q_1 x ... x Q_p

where each Q_i = {(u0, u1) : u0 >= ||u1||} is a second-order cone (a cone
of dimension one is the nonnegative ray). The method is an infeasible
start path-following scheme with Nesterov-Todd scaling and a Mehrotra
predictor-corrector step, following the standard textbook construction
used by CVXOPT's ``conelp``. It is meant for the few-hundred-variable
problems that appear in backhaul precoder design, not for general use.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
import scipy.linalg

from .errors import NumericalFailure

MAX_ITERS = 500
# accept the best iterate when full accuracy is out of reach
INACCURATE_TOL = 1e-7
REFINEMENT_STEPS = 2


@dataclass
class SocpResult:
    status: str  # "optimal", "inaccurate", "stopped" (callback asked to stop)
    x: np.ndarray
    s: np.ndarray
    z: np.ndarray
    primal_objective: float
    dual_objective: float
    iterations: int
    trace: List[dict] = field(default_factory=list)


def _split(v, dims):
    out, i = [], 0
    for q in dims:
        out.append(v[i:i + q])
        i += q
    return out


def jdot(u, v):
    return u[0] * v[0] - u[1:] @ v[1:]


def min_eig(u, dims):
    """Smallest 'eigenvalue' u0 - ||u1|| over all cones."""
    return min(b[0] - np.linalg.norm(b[1:]) for b in _split(u, dims))


def identity(dims):
    e = np.zeros(sum(dims))
    i = 0
    for q in dims:
        e[i] = 1.0
        i += q
    return e


def max_step(x, d, dims):
    """Largest alpha >= 0 with x + alpha d in the cone (inf if unbounded).

    Computed in the frame where x maps to the identity element, which
    avoids cancellation in the quadratic near the boundary.
    """
    alpha = np.inf
    for xb, db in zip(_split(x, dims), _split(d, dims)):
        nrm = np.sqrt(max(jdot(xb, xb), 0.0))
        if nrm <= 0:
            return 0.0
        xh = xb / nrm
        dh = db / nrm
        if xb.size == 1:
            lam = dh[0] / xh[0]
        else:
            rho0 = jdot(xh, dh)
            rho1 = dh[1:] - ((rho0 + dh[0]) / (xh[0] + 1.0)) * xh[1:]
            lam = rho0 - np.linalg.norm(rho1)
        if lam < 0:
            alpha = min(alpha, -1.0 / lam)
    return alpha


def _nt_block(s, z):
    """Nesterov-Todd scaling W (symmetric) with W z = W^{-1} s.

    Returns W, W^{-1} and the pair (beta, v) with W = beta (2 v v^T - J).
    """
    q = s.size
    ss = jdot(s, s)
    zz = jdot(z, z)
    if ss <= 0 or zz <= 0:
        raise NumericalFailure("iterate left the cone interior")
    sn = s / np.sqrt(ss)
    zn = z / np.sqrt(zz)
    gamma = np.sqrt((1.0 + sn @ zn) / 2.0)
    wbar = sn.copy()
    wbar[0] += zn[0]
    wbar[1:] -= zn[1:]
    wbar /= 2.0 * gamma
    v = wbar.copy()
    v[0] += 1.0
    v /= np.sqrt(2.0 * (wbar[0] + 1.0))
    beta = (ss / zz) ** 0.25
    J = np.eye(q)
    J[1:, 1:] *= -1.0
    W = beta * (2.0 * np.outer(v, v) - J)
    Jv = v.copy()
    Jv[1:] *= -1.0
    Winv = (2.0 * np.outer(Jv, Jv) - J) / beta
    return W, Winv, beta, v


def _jprod(u, v):
    out = np.empty_like(u)
    out[0] = u @ v
    out[1:] = u[0] * v[1:] + v[0] * u[1:]
    return out


def _jdiv(lam, r):
    """Solve lam o u = r for u (Jordan product, one cone)."""
    if lam.size == 1:
        return r / lam
    det = lam[0] ** 2 - lam[1:] @ lam[1:]
    u0 = (lam[0] * r[0] - lam[1:] @ r[1:]) / det
    u1 = (r[1:] - u0 * lam[1:]) / lam[0]
    return np.concatenate([[u0], u1])


def solve(c, G, h, dims, *, feastol=1e-8, abstol=1e-8, reltol=1e-8,
          max_iters=MAX_ITERS, callback: Optional[Callable] = None,
          trace=False) -> SocpResult:
    """Run the interior-point method.

    Parameters
    ----------
    c, G, h : ndarray
        Problem data; ``G`` must have full column rank.
    dims : list of int
        Cone sizes; ``sum(dims) == G.shape[0]``.
    callback : callable, optional
        Called as ``callback(x, s, z, info)`` after each iteration; a truthy
        return value stops the solver with status ``"stopped"``.
    trace : bool
        Keep one record per iteration in ``SocpResult.trace``.

    Raises
    ------
    NumericalFailure
        Iteration cap reached, or the Newton system broke down.
    """
    c = np.asarray(c, dtype=float)
    G = np.asarray(G, dtype=float)
    h = np.asarray(h, dtype=float)
    dims = [int(q) for q in dims]
    n = c.size
    if G.shape != (sum(dims), n) or h.size != G.shape[0]:
        raise ValueError("inconsistent problem dimensions")
    ncones = len(dims)
    e = identity(dims)
    starts = np.cumsum([0] + dims)

    # initial point: least-squares x, minimum-norm dual z, then shift into cone
    GtG = G.T @ G
    try:
        cf = scipy.linalg.cho_factor(GtG)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("G is rank deficient") from exc
    x = scipy.linalg.cho_solve(cf, G.T @ h)
    s = h - G @ x
    z = -G @ scipy.linalg.cho_solve(cf, c)
    for v in (s, z):
        lm = min_eig(v, dims)
        if lm < 1e-8 * max(np.linalg.norm(v), 1.0):
            v += (1.0 - lm) * e

    # W^{-2} = (I + rank two) / beta^2, so each cone's share of the Newton
    # matrix is a rescaled G_k^T G_k plus a rank-two correction
    GtG_blocks = np.stack([G[starts[k]:starts[k] + q].T @ G[starts[k]:starts[k] + q]
                           for k, q in enumerate(dims)])

    records = []
    best = None
    nrm_h = max(1.0, np.linalg.norm(h))
    nrm_c = max(1.0, np.linalg.norm(c))
    for it in range(max_iters + 1):
        rx = G.T @ z + c
        rz = G @ x + s - h
        gap = s @ z
        pcost = c @ x
        dcost = -h @ z
        pres = np.linalg.norm(rz) / nrm_h
        dres = np.linalg.norm(rx) / nrm_c
        if pcost < 0:
            relgap = gap / -pcost
        elif dcost > 0:
            relgap = gap / dcost
        else:
            relgap = np.inf
        info = dict(iteration=it, pcost=pcost, dcost=dcost, gap=gap,
                    pres=pres, dres=dres)
        if trace:
            records.append(info)
        if callback is not None and callback(x, s, z, info):
            return SocpResult("stopped", x, s, z, pcost, dcost, it, records)
        if pres <= feastol and dres <= feastol and (gap <= abstol or relgap <= reltol):
            return SocpResult("optimal", x, s, z, pcost, dcost, it, records)
        score = max(pres, dres, min(gap, relgap))
        if best is None or score < best[0]:
            best = (score, x, s, z, pcost, dcost, it)
        elif best[0] < INACCURATE_TOL and score > 1e3 * best[0]:
            # roundoff has taken over; fall back to the best iterate seen
            break
        if it == max_iters:
            break

        mu = gap / ncones
        Ws, Winvs, lams = [], [], []
        inv_b2 = np.empty(ncones)
        GA = np.empty((ncones, n))
        GV = np.empty((ncones, n))
        vv = np.empty(ncones)
        for k, q in enumerate(dims):
            sl = slice(starts[k], starts[k] + q)
            try:
                W, Winv, beta, v = _nt_block(s[sl], z[sl])
            except NumericalFailure:
                break
            Ws.append(W)
            Winvs.append(Winv)
            lams.append(W @ z[sl])
            a = v.copy()
            a[1:] *= -1.0
            GA[k] = G[sl].T @ a
            GV[k] = G[sl].T @ v
            vv[k] = v @ v
            inv_b2[k] = beta ** -2
        if len(Ws) < ncones:
            break
        H = np.tensordot(inv_b2, GtG_blocks, axes=1)
        H += (GA.T * (4.0 * vv * inv_b2)) @ GA
        cross = (GA.T * (2.0 * inv_b2)) @ GV
        H -= cross + cross.T
        try:
            Hf = scipy.linalg.cho_factor(H)
        except np.linalg.LinAlgError:
            H += 1e-14 * np.trace(H) / n * np.eye(n)
            try:
                Hf = scipy.linalg.cho_factor(H)
            except np.linalg.LinAlgError as exc:
                raise NumericalFailure("Newton system is singular") from exc

        def blockwise(mats, v):
            return np.concatenate([A @ v[starts[k]:starts[k] + dims[k]]
                                   for k, A in enumerate(mats)])

        def kkt(bx, bz, bu):
            # G^T dz = bx;  G dx + ds = bz;  W dz + W^{-1} ds = bu
            t = blockwise(Ws, bu) - bz
            dx = scipy.linalg.cho_solve(Hf, bx - G.T @ blockwise(Winvs, blockwise(Winvs, t)))
            dz = blockwise(Winvs, blockwise(Winvs, G @ dx + t))
            ds = blockwise(Ws, bu - blockwise(Ws, dz))
            return dx, ds, dz

        def newton(rc_blocks):
            bu = np.concatenate([_jdiv(lam, rc) for lam, rc in zip(lams, rc_blocks)])
            bx, bz = -rx, -rz
            dx, ds, dz = kkt(bx, bz, bu)
            for _ in range(REFINEMENT_STEPS):
                ex = bx - G.T @ dz
                ez = bz - G @ dx - ds
                eu = bu - blockwise(Ws, dz) - blockwise(Winvs, ds)
                cx, cs, cz = kkt(ex, ez, eu)
                dx, ds, dz = dx + cx, ds + cs, dz + cz
            return dx, ds, dz

        # predictor
        rc_aff = [-_jprod(lam, lam) for lam in lams]
        dx_a, ds_a, dz_a = newton(rc_aff)
        a_aff = min(1.0, max_step(s, ds_a, dims), max_step(z, dz_a, dims))
        gap_aff = (s + a_aff * ds_a) @ (z + a_aff * dz_a)
        sigma = min(1.0, max(0.0, gap_aff / gap)) ** 3

        # corrector
        rc = []
        for k, (W, Winv, lam) in enumerate(zip(Ws, Winvs, lams)):
            sl = slice(starts[k], starts[k] + dims[k])
            corr = _jprod(Winv @ ds_a[sl], W @ dz_a[sl])
            ek = np.zeros(dims[k])
            ek[0] = 1.0
            rc.append(-_jprod(lam, lam) - corr + sigma * mu * ek)
        dx, ds, dz = newton(rc)
        alpha = min(1.0, 0.99 * min(max_step(s, ds, dims), max_step(z, dz, dims)))
        if not np.isfinite(alpha) or alpha <= 1e-14:
            break
        x = x + alpha * dx
        s = s + alpha * ds
        z = z + alpha * dz

    if best is not None and best[0] <= INACCURATE_TOL:
        _, x, s, z, pcost, dcost, it = best
        return SocpResult("inaccurate", x, s, z, pcost, dcost, it, records)
    raise NumericalFailure(f"no convergence within {max_iters} iterations")
