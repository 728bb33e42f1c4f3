"""Standard-form geometric programs solved in log space.

With ``y = log x`` every monomial becomes affine and every posynomial a
log-sum-exp of affine functions, so the problem is convex. Monomial
equalities are eliminated through a nullspace basis; an infeasible
starting point is first repaired by a phase-I slack problem; both
phases use primal-dual interior-point iterations.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from .algebra import Monomial, Posynomial, as_posynomial

log = logging.getLogger(__name__)


def _lse(z: np.ndarray) -> float:
    # scipy.special.logsumexp carries array-API overhead that dominates on tiny inputs
    top = float(np.max(z))
    return top + float(np.log(np.sum(np.exp(z - top))))


class GpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    MAX_ITERATIONS = "max-iterations"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class GpProblem:
    """minimize ``objective`` s.t. each constraint ``<= 1`` and each equality ``== 1``."""

    objective: Posynomial | Monomial
    constraints: Sequence[Posynomial | Monomial] = ()
    equalities: Sequence[Monomial] = ()
    variables: tuple[str, ...] | None = None

    def __post_init__(self):
        used = set(as_posynomial(self.objective).variables)
        for c in self.constraints:
            used |= as_posynomial(c).variables
        for e in self.equalities:
            used |= e.variables
        if self.variables is None:
            object.__setattr__(self, "variables", tuple(sorted(used)))
        else:
            missing = used - set(self.variables)
            if missing:
                raise ValueError(f"undeclared variables: {sorted(missing)}")
            if len(set(self.variables)) != len(self.variables):
                raise ValueError("variable names must be unique")

    def dump(self) -> str:
        """Listing of all monomials, for debugging and regression snapshots."""
        out = ["variables: " + " ".join(self.variables), "minimize:",
               as_posynomial(self.objective).dump()]
        for i, c in enumerate(self.constraints):
            out += [f"constraint {i} (<= 1):", as_posynomial(c).dump()]
        for i, e in enumerate(self.equalities):
            out += [f"equality {i} (== 1):", as_posynomial(e).dump()]
        return "\n".join(out)


@dataclass
class GpSolution:
    values: dict[str, float]
    objective_value: float
    status: GpStatus
    kkt_residual: float
    max_violation: float = 0.0
    newton_steps: int = 0
    log_values: dict[str, float] = field(default_factory=dict, repr=False)

    @property
    def ok(self) -> bool:
        return self.status is GpStatus.OPTIMAL


class _Compiled:
    """Log-space data for one problem, parametrized as ``y = y_p + Z u``."""

    def __init__(self, problem: GpProblem):
        names = problem.variables
        self.names = names
        n = len(names)
        index = {v: i for i, v in enumerate(names)}
        self.obj_b, self.obj_F = as_posynomial(problem.objective).compile(index, n)

        aff_rows, aff_b, self.blocks = [], [], []
        for c in problem.constraints:
            b, F = as_posynomial(c).compile(index, n)
            if b.size == 1:
                aff_rows.append(F[0])
                aff_b.append(b[0])
            else:
                self.blocks.append((b, F))
        self.G = np.array(aff_rows).reshape(-1, n)
        self.h = np.array(aff_b, dtype=float)
        self.m = self.G.shape[0] + len(self.blocks)

        if problem.equalities:
            A = np.zeros((len(problem.equalities), n))
            d = np.zeros(len(problem.equalities))
            for i, e in enumerate(problem.equalities):
                b, F = as_posynomial(e).compile(index, n)
                A[i], d[i] = F[0], b[0]
            y_p, *_ = np.linalg.lstsq(A, -d, rcond=None)
            self.eq_residual = float(np.max(np.abs(A @ y_p + d)))
            _, sv, Vt = np.linalg.svd(A)
            rank = int(np.sum(sv > 1e-12 * max(1.0, sv[0])))
            self.Z = Vt[rank:].T
            self.y_p = y_p
        else:
            self.eq_residual = 0.0
            self.Z = np.eye(n)
            self.y_p = np.zeros(n)
        # Precompose every affine map with Z so the barrier works directly in u.
        self.obj_Fu = self.obj_F @ self.Z
        self.obj_bu = self.obj_b + self.obj_F @ self.y_p
        self.Gu = self.G @ self.Z
        self.hu = self.h + self.G @ self.y_p
        self.blocks_u = [(b + F @ self.y_p, F @ self.Z) for b, F in self.blocks]
        self.k = self.Z.shape[1]

    def y_of(self, u):
        return self.y_p + self.Z @ u

    def u_of(self, y):
        return self.Z.T @ (y - self.y_p)

    def objective(self, u, order=2):
        z = self.obj_bu + self.obj_Fu @ u
        if z.size == 1:
            return z[0], self.obj_Fu[0], (np.zeros((self.k, self.k)) if order > 1 else None)
        lse = _lse(z)
        p = np.exp(z - lse)
        g = self.obj_Fu.T @ p
        H = None
        if order > 1:
            Fp = self.obj_Fu * np.sqrt(p)[:, None]
            H = Fp.T @ Fp - np.outer(g, g)
        return lse, g, H

    def constraints(self, u, order=2):
        """Constraint values, Jacobian rows, and per-block curvature terms."""
        f = [self.Gu @ u + self.hu]
        J = [self.Gu]
        curv = []
        for b, F in self.blocks_u:
            z = b + F @ u
            lse = _lse(z)
            p = np.exp(z - lse)
            g = F.T @ p
            f.append(np.array([lse]))
            J.append(g[None, :])
            if order > 1:
                Fp = F * np.sqrt(p)[:, None]
                curv.append(Fp.T @ Fp - np.outer(g, g))
            else:
                curv.append(None)
        return np.concatenate(f), np.vstack(J), curv


def _newton_direction(H, g):
    try:
        c = cho_factor(H, lower=True, check_finite=False)
        return -cho_solve(c, g, check_finite=False)
    except (LinAlgError, ValueError):
        pass
    scale = max(1.0, float(np.max(np.abs(np.diag(H))))) if H.size else 1.0
    for reg in (1e-12, 1e-9, 1e-6, 1e-3):
        try:
            c = cho_factor(H + reg * scale * np.eye(H.shape[0]), lower=True, check_finite=False)
            return -cho_solve(c, g, check_finite=False)
        except (LinAlgError, ValueError):
            continue
    # Gradient step when curvature information is unusable.
    return -g / max(1.0, float(np.linalg.norm(g)))


class _Barrier:
    """Log-barrier method for ``min c(v)`` s.t. ``f_i(v) <= 0``.

    ``phase1`` adds a trailing slack variable ``s`` so constraints read
    ``f_i(u) - s <= 0`` and the objective is ``s`` itself.
    """

    def __init__(self, cp: _Compiled, phase1: bool, center=None, radius: float = 100.0):
        self.cp = cp
        self.phase1 = phase1
        # Phase I searches a log-space box around the start point; this keeps
        # the slack problem bounded and its Newton system definite.
        self.center_u = center
        self.radius = radius

    def split(self, v):
        return (v[:-1], v[-1]) if self.phase1 else (v, 0.0)

    def obj(self, v, order=2):
        if self.phase1:
            k = v.size
            g = np.zeros(k)
            g[-1] = 1.0
            return v[-1], g, (np.zeros((k, k)) if order > 1 else None)
        return self.cp.objective(v, order)

    def cons(self, v, order=2):
        u, s = self.split(v)
        f, J, curv = self.cp.constraints(u, order)
        if self.phase1:
            k = u.size
            d = u - self.center_u
            f = np.concatenate([f - s, d - self.radius, -d - self.radius])
            eye = np.eye(k)
            box = np.vstack([eye, -eye])
            J = np.vstack([np.hstack([J, -np.ones((J.shape[0], 1))]),
                           np.hstack([box, np.zeros((2 * k, 1))])])
            if order > 1:
                curv = [np.pad(H, ((0, 1), (0, 1))) for H in curv]
        return f, J, curv

    def phi(self, v, t):
        f, _, _ = self.cons(v, order=1)
        if f.size and not np.all(f < 0):
            return np.inf
        c0, _, _ = self.obj(v, order=1)
        return t * c0 - np.sum(np.log(-f))

    def grad_hess(self, v, t):
        c0, g0, H0 = self.obj(v)
        f, J, curv = self.cons(v)
        w = -1.0 / f
        g = t * g0 + J.T @ w
        Jw = J * w[:, None]
        H = t * H0 + Jw.T @ Jw
        naff = self.cp.G.shape[0]
        for i, Hi in enumerate(curv):
            H += w[naff + i] * Hi
        return g, H

    def center(self, v, t, budget, stop=None):
        """Newton iterations on the barrier function; returns (v, steps, stopped_early)."""
        steps = 0
        while steps < budget:
            g, H = self.grad_hess(v, t)
            dv = _newton_direction(H, g)
            dec = -float(g @ dv)
            steps += 1
            if dec < 0:
                dv = -g
                dec = float(g @ g)
            if dec / 2 <= 1e-13:
                break
            phi0 = self.phi(v, t)
            s = 1.0
            while s > 1e-14 and not np.isfinite(self.phi(v + s * dv, t)):
                s *= 0.5
            while s > 1e-14 and self.phi(v + s * dv, t) > phi0 - 0.01 * s * dec:
                s *= 0.5
            if s <= 1e-14:
                break
            v = v + s * dv
            if stop is not None and stop(v):
                return v, steps, True
            if not np.all(np.isfinite(v)) or np.max(np.abs(v)) > 1e4:
                break
        return v, steps, False


def _primal_dual(bar: _Barrier, v, lam, tol, budget, stop=None):
    """Primal-dual interior-point iterations; returns (v, lam, eta, r_dual, steps, stopped)."""
    m = lam.size
    mu = 10.0
    steps = 0
    f, J, curv = bar.cons(v)
    _, g0, H0 = bar.obj(v)
    naff = bar.cp.G.shape[0]

    def residual(v_, lam_, t_):
        f_, J_, _ = bar.cons(v_, order=1)
        _, g_, _ = bar.obj(v_, order=1)
        r_dual = g_ + J_.T @ lam_
        r_cent = -lam_ * f_ - 1.0 / t_
        return np.concatenate([r_dual, r_cent]), f_

    eta = float(-f @ lam)
    r_dual = g0 + J.T @ lam
    while steps < budget:
        t = mu * m / eta
        w = lam / -f
        Hpd = H0 + (J * w[:, None]).T @ J
        for i, Hi in enumerate(curv):
            Hpd += lam[naff + i] * Hi
        rhs = -(g0 + J.T @ (1.0 / (t * -f)))
        dv = _newton_direction(Hpd, -rhs)
        dlam = -lam + (1.0 / t + lam * (J @ dv)) / -f
        steps += 1

        neg = dlam < 0
        s = min(1.0, float(np.min(-lam[neg] / dlam[neg]))) if np.any(neg) else 1.0
        s *= 0.99
        s_lam = s
        r0 = np.linalg.norm(residual(v, lam, t)[0])
        while s > 1e-16:
            f_new = bar.cons(v + s * dv, order=1)[0]
            if np.all(f_new < 0):
                break
            s *= 0.5
        s_feas = s
        while s > 1e-16:
            r_new, _ = residual(v + s * dv, lam + s * dlam, t)
            if np.linalg.norm(r_new) <= (1 - 0.01 * s) * r0:
                break
            s *= 0.5
        if s <= 1e-16:
            break
        v = v + s * dv
        lam = lam + s * dlam
        log.debug("step %d: s=%.3g (dual cap %.3g, primal cap %.3g) eta=%.3g", steps, s, s_lam, s_feas, eta)
        f, J, curv = bar.cons(v)
        _, g0, H0 = bar.obj(v)
        eta = float(-f @ lam)
        r_dual = g0 + J.T @ lam
        if stop is not None and stop(v, lam, eta):
            return v, lam, eta, r_dual, steps, True
        if float(np.max(np.abs(r_dual))) <= tol and eta <= tol * 1e-2:
            break
        if not np.all(np.isfinite(v)) or np.max(np.abs(v)) > 1e4:
            break
    return v, lam, eta, r_dual, steps, False


def solve_gp(problem: GpProblem, initial: Mapping[str, float] | None = None,
             tol: float = 1e-8, max_iter: int = 500) -> GpSolution:
    """Solve a GP to KKT residual ``tol`` in log space.

    Args:
        problem: the GP in standard form.
        initial: strictly positive starting point; need not be feasible.
            Missing variables start at 1.
        tol: KKT residual tolerance (log space).
        max_iter: total Newton-step budget across both phases.

    Returns:
        GpSolution whose status is ``infeasible`` with ``max_violation`` set
        to the smallest constraint violation reached when no feasible point
        exists.
    """
    cp = _Compiled(problem)
    names = problem.variables
    y0 = np.zeros(len(names))
    if initial is not None:
        for i, n in enumerate(names):
            if n in initial:
                if not initial[n] > 0:
                    raise ValueError(f"initial value for {n!r} must be positive")
                y0[i] = np.log(initial[n])
    if cp.eq_residual > 1e-9:
        return _finish(cp, cp.u_of(y0), GpStatus.INFEASIBLE, np.inf, 0, cp.eq_residual)
    u = cp.u_of(y0)
    steps = 0

    if cp.m == 0:
        u, n_steps, _ = _Barrier(cp, phase1=False).center(u, 1.0, max_iter)
        _, g0, _ = cp.objective(u, order=1)
        kkt = float(np.max(np.abs(g0))) if g0.size else 0.0
        status = GpStatus.OPTIMAL if kkt <= tol else GpStatus.MAX_ITERATIONS
        return _finish(cp, u, status, kkt, n_steps, 0.0)

    f, _, _ = cp.constraints(u, order=1)
    if not np.all(f < 0):
        p1 = _Barrier(cp, phase1=True, center=u.copy())
        s0 = float(np.max(f)) + 1.0
        v = np.append(u, s0)
        lam = np.full(cp.m + 2 * u.size, 1.0 / cp.m)

        def feasible(w, lam_, eta):
            # stop once strictly feasible, or once a positive lower bound on s is certified
            return w[-1] < 0 or (w[-1] - eta > 0 and eta < 1e-3)

        v, lam, eta, _, steps, _ = _primal_dual(p1, v, lam, tol, max_iter, stop=feasible)
        u = v[:-1]
        f, _, _ = cp.constraints(u, order=1)
        if not np.all(f < 0):
            status = GpStatus.MAX_ITERATIONS if steps >= max_iter else GpStatus.INFEASIBLE
            return _finish(cp, u, status, np.inf, steps, float(np.max(f)))

    p2 = _Barrier(cp, phase1=False)
    # Warm starts sit on the boundary of the previous problem; move to the
    # t = 1 central point first and take the matching dual start.
    u, n_center, _ = p2.center(u, 1.0, min(50, max(1, max_iter - steps)))
    steps += n_center
    f, _, _ = cp.constraints(u, order=1)
    lam = 1.0 / -f
    u, lam, eta, r_dual, n_steps, _ = _primal_dual(p2, u, lam, tol, max(1, max_iter - steps))
    steps += n_steps
    f, _, _ = cp.constraints(u, order=1)
    viol = max(0.0, float(np.max(f)))
    kkt = max(float(np.max(np.abs(r_dual))) if r_dual.size else 0.0, eta, viol)
    status = GpStatus.OPTIMAL if kkt <= tol else GpStatus.MAX_ITERATIONS
    return _finish(cp, u, status, kkt, steps, viol)


def _finish(cp: _Compiled, u, status, kkt, steps, viol) -> GpSolution:
    y = cp.y_of(u)
    obj = float(np.exp(_lse(cp.obj_b + cp.obj_F @ y)))
    return GpSolution(
        values={n: float(np.exp(v)) for n, v in zip(cp.names, y)},
        objective_value=obj,
        status=status,
        kkt_residual=float(kkt),
        max_violation=float(viol),
        newton_steps=int(steps),
        log_values={n: float(v) for n, v in zip(cp.names, y)},
    )
