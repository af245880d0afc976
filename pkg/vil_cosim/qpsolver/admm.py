"""
Dense operator-splitting QP solver.

The problem is rewritten in the two-sided form l <= Ax <= u and solved by
over-relaxed ADMM on a Ruiz-equilibrated copy. Every ``check_interval``
iterations the iterate is tested against the KKT conditions of the original
problem, a primal infeasibility certificate is looked for, the step size rho
is rebalanced and a polishing step solves the equality-constrained QP on the
guessed active set.
"""
import itertools
import logging
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import linalg

from .problem import QpSolution, QpStatus, kkt_residuals

logger = logging.getLogger(__name__)

NORM_FLOOR = 1e-4
NORM_CEIL = 1e4
EQUALITY_RHO_SCALE = 1e3
_dump_counter = itertools.count()


@dataclass
class AdmmSettings:
    tol: float = 1e-6
    max_iter: int = 4000
    sigma: float = 1e-6
    alpha: float = 1.6
    rho: float = 0.1
    rho_min: float = 1e-6
    rho_max: float = 1e6
    adaptive_rho: bool = True
    check_interval: int = 25
    eps_infeasible: float = 1e-4
    scaling_iter: int = 10
    polish: bool = True
    polish_delta: float = 1e-10
    polish_refine_iter: int = 5
    regularization: float = 1e-9
    dump_dir: str = ''

    @classmethod
    def from_config(cls, config):
        return cls(
            tol=config['qp.tol'],
            max_iter=config['qp.max_iter'],
            dump_dir=config['qp_dump_dir'],
        )


def _safe_norms(norms):
    norms = norms.copy()
    norms[norms < NORM_FLOOR] = 1.0
    return np.minimum(norms, NORM_CEIL)


def _equilibrate(P, A, iterations):
    """Ruiz scaling of the KKT matrix; returns scaled P, A and the D, E diagonals."""
    n, m = P.shape[0], A.shape[0]
    D = np.ones(n)
    E = np.ones(m)
    P = P.copy()
    A = A.copy()
    for _ in range(iterations):
        cols = np.abs(P).max(axis=0) if n else np.zeros(0)
        if m:
            cols = np.maximum(cols, np.abs(A).max(axis=0))
            e = 1.0 / np.sqrt(_safe_norms(np.abs(A).max(axis=1)))
        else:
            e = np.ones(0)
        d = 1.0 / np.sqrt(_safe_norms(cols))
        P = d[:, None] * P * d[None, :]
        A = e[:, None] * A * d[None, :]
        D *= d
        E *= e
    return P, A, D, E


def dump_problem(problem, directory, label='qp'):
    """Write H, g, G, h and the box to text matrices for offline reproduction."""
    stamp = time.strftime('%Y%m%d-%H%M%S')
    target = Path(directory) / f'{label}-{stamp}-{next(_dump_counter):04d}'
    target.mkdir(parents=True, exist_ok=True)
    for name in ('H', 'g', 'G', 'h', 'lb', 'ub'):
        np.savetxt(target / f'{name}.txt', np.atleast_1d(getattr(problem, name)), fmt='%.17g')
    return target


class AdmmSolver:
    """
    Stateful solver for a sequence of related problems. Scaling is reused
    while H and the constraint matrix stay the same, and the previous
    primal/dual answer seeds the next solve.
    """

    def __init__(self, settings=None):
        self.settings = settings or AdmmSettings()
        self.reset()

    def reset(self):
        self._H = None
        self._A = None
        self._scaled = None
        self._rho = self.settings.rho
        self._x = None
        self._y = None

    def warm_start(self, x, y):
        self._x = np.array(x, dtype=float)
        self._y = np.array(y, dtype=float)

    def _prepare(self, H, A):
        if (self._scaled is not None and self._H.shape == H.shape and self._A.shape == A.shape
                and np.array_equal(self._H, H) and np.array_equal(self._A, A)):
            return self._scaled
        self._H = H.copy()
        self._A = A.copy()
        self._scaled = _equilibrate(H, A, self.settings.scaling_iter)
        self._rho = self.settings.rho
        self._x = self._y = None
        return self._scaled

    def _rho_vector(self, lower, upper):
        rho = np.full(lower.shape[0], self._rho)
        rho[np.isinf(lower) & np.isinf(upper)] = self.settings.rho_min
        rho[np.abs(upper - lower) < 1e-4] = self._rho * EQUALITY_RHO_SCALE
        return rho

    def _multipliers(self, problem, y):
        m = problem.m
        lam = np.maximum(y[:m], 0.0)
        lam_lb = np.zeros(problem.n)
        lam_ub = np.zeros(problem.n)
        rows = problem.box_rows()
        lam_ub[rows] = np.maximum(y[m:], 0.0)
        lam_lb[rows] = np.maximum(-y[m:], 0.0)
        return lam, lam_lb, lam_ub

    def _kkt(self, problem, x, y):
        lam, lam_lb, lam_ub = self._multipliers(problem, y)
        return max(kkt_residuals(problem, x, lam, lam_lb, lam_ub))

    def _polish(self, H, A, lower, upper, g, z, y):
        """Solve the equality QP on the active set guessed from (z, y)."""
        s = self.settings
        low = np.flatnonzero(z - lower < -y)
        upp = np.setdiff1d(np.flatnonzero(upper - z < y), low)
        active = np.concatenate([low, upp])
        n, k = H.shape[0], active.size
        A_red = A[active]
        K = np.block([[H, A_red.T], [A_red, np.zeros((k, k))]])
        K_reg = K + np.diag(np.concatenate([np.full(n, s.polish_delta), np.full(k, -s.polish_delta)]))
        rhs = np.concatenate([-g, lower[low], upper[upp]])
        try:
            factor = linalg.lu_factor(K_reg, check_finite=False)
        except (linalg.LinAlgError, ValueError):
            return None
        sol = linalg.lu_solve(factor, rhs, check_finite=False)
        for _ in range(s.polish_refine_iter):
            sol = sol + linalg.lu_solve(factor, rhs - K @ sol, check_finite=False)
        if not np.all(np.isfinite(sol)):
            return None
        y_full = np.zeros(A.shape[0])
        y_full[active] = sol[n:]
        return sol[:n], y_full

    def solve(self, problem, warm_start=True):
        s = self.settings
        H = problem.H + s.regularization * np.eye(problem.n)
        A, lower, upper = problem.stacked()
        P_bar, A_bar, D, E = self._prepare(H, A)
        n, m = problem.n, A.shape[0]

        q_bar = D * problem.g
        p_norm = np.mean(np.abs(P_bar).max(axis=0)) if n else 0.0
        c = 1.0 / min(max(p_norm, np.abs(q_bar).max(initial=0.0), NORM_FLOOR), NORM_CEIL)
        P_c = c * P_bar
        q_c = c * q_bar
        l_bar = E * lower
        u_bar = E * upper

        def factorize(rho):
            return linalg.cho_factor(P_c + s.sigma * np.eye(n) + A_bar.T @ (rho[:, None] * A_bar),
                                     check_finite=False)

        rho = self._rho_vector(lower, upper)
        factor = factorize(rho)

        warm = warm_start and self._x is not None and self._x.shape == (n,) and self._y.shape == (m,)
        if warm:
            x = self._x / D
            y = c * self._y / E
            z = np.clip(A_bar @ x, l_bar, u_bar)
        else:
            x = np.zeros(n)
            y = np.zeros(m)
            z = np.clip(np.zeros(m), l_bar, u_bar)

        best = None
        status = QpStatus.MAX_ITER
        polished = False
        iterations = 0
        delta_y = np.zeros(m)

        for k in range(s.max_iter + 1):
            check = k % s.check_interval == 0 and (k > 0 or warm)
            if check:
                x_orig = D * x
                y_orig = E * y / c
                kkt = self._kkt(problem, x_orig, y_orig)
                if best is None or kkt < best[0]:
                    best = (kkt, x_orig, y_orig)
                if kkt <= s.tol:
                    status = QpStatus.OPTIMAL
                    break

                if s.polish:
                    result = self._polish(H, A, lower, upper, problem.g, z / E, y_orig)
                    if result is not None:
                        x_pol, y_pol = result
                        kkt_pol = self._kkt(problem, x_pol, y_pol)
                        if kkt_pol < best[0]:
                            best = (kkt_pol, x_pol, y_pol)
                        if kkt_pol <= s.tol:
                            status = QpStatus.OPTIMAL
                            polished = True
                            break

                if k > 0 and self._primal_infeasible(A_bar, l_bar, u_bar, delta_y):
                    status = QpStatus.INFEASIBLE
                    break

                if k > 0 and s.adaptive_rho and m:
                    new_rho = self._rebalance(P_c, q_c, A_bar, x, z, y)
                    if new_rho is not None:
                        self._rho = new_rho
                        rho = self._rho_vector(lower, upper)
                        factor = factorize(rho)

            if k == s.max_iter:
                break

            rhs = s.sigma * x - q_c + A_bar.T @ (rho * z - y)
            x_tilde = linalg.cho_solve(factor, rhs, check_finite=False)
            z_tilde = A_bar @ x_tilde
            x = s.alpha * x_tilde + (1.0 - s.alpha) * x
            z_relaxed = s.alpha * z_tilde + (1.0 - s.alpha) * z
            z_new = np.clip(z_relaxed + y / rho, l_bar, u_bar)
            y_new = y + rho * (z_relaxed - z_new)
            delta_y = y_new - y
            z, y = z_new, y_new
            iterations = k + 1

        if best is None:
            x_orig, y_orig = D * x, E * y / c
            best = (self._kkt(problem, x_orig, y_orig), x_orig, y_orig)
        kkt, x_out, y_out = best
        lam, lam_lb, lam_ub = self._multipliers(problem, y_out)

        if status != QpStatus.INFEASIBLE:
            self.warm_start(x_out, y_out)
        else:
            self._x = self._y = None

        solution = QpSolution(
            x=x_out, lam=lam, status=status, kkt_residual=kkt,
            lam_lb=lam_lb, lam_ub=lam_ub, objective=float(problem.objective(x_out)),
            iterations=iterations, polished=polished,
        )
        if status != QpStatus.OPTIMAL:
            logger.warning("QP solve ended with status %s after %d iterations (kkt=%.3e)",
                           status.value, iterations, kkt)
            if s.dump_dir:
                path = dump_problem(problem, s.dump_dir)
                logger.warning("QP data written to %s", path)
        return solution

    def _primal_infeasible(self, A_bar, l_bar, u_bar, delta_y):
        eps = self.settings.eps_infeasible
        norm = np.abs(delta_y).max(initial=0.0)
        if norm <= eps:
            return False
        v = delta_y / norm
        pos = np.maximum(v, 0.0)
        neg = np.minimum(v, 0.0)
        if np.any((pos > 0) & np.isinf(u_bar)) or np.any((neg < 0) & np.isinf(l_bar)):
            return False
        support = (u_bar[pos > 0] @ pos[pos > 0]) + (l_bar[neg < 0] @ neg[neg < 0])
        if support >= -eps:
            return False
        return np.abs(A_bar.T @ v).max(initial=0.0) < eps

    def _rebalance(self, P_c, q_c, A_bar, x, z, y):
        s = self.settings
        Ax = A_bar @ x
        Px = P_c @ x
        Aty = A_bar.T @ y
        prim_scale = max(np.abs(Ax).max(initial=0.0), np.abs(z).max(initial=0.0), 1e-10)
        dual_scale = max(np.abs(Px).max(initial=0.0), np.abs(Aty).max(initial=0.0),
                         np.abs(q_c).max(initial=0.0), 1e-10)
        r_prim = np.abs(Ax - z).max(initial=0.0) / prim_scale
        r_dual = np.abs(Px + q_c + Aty).max(initial=0.0) / dual_scale
        if r_dual <= 0.0 or r_prim <= 0.0:
            return None
        new_rho = float(np.clip(self._rho * np.sqrt(r_prim / r_dual), s.rho_min, s.rho_max))
        if new_rho > 5.0 * self._rho or new_rho < self._rho / 5.0:
            return new_rho
        return None


def solve(problem, tol=1e-6, max_iter=4000):
    """Solve one problem with a fresh solver."""
    return AdmmSolver(AdmmSettings(tol=tol, max_iter=max_iter)).solve(problem)
