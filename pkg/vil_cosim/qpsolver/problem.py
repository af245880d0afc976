import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .validators import validate_box, validate_cost_matrix, validate_problem_dimensions


class QpStatus(str, enum.Enum):
    OPTIMAL = 'optimal'
    MAX_ITER = 'max_iter'
    INFEASIBLE = 'infeasible'


@dataclass
class OcpProblem:
    """
    minimize    1/2 x'Hx + g'x
    subject to  Gx <= h,  lb <= x <= ub

    Infinite box entries mean the variable is unbounded on that side.
    """
    H: np.ndarray
    g: np.ndarray
    G: np.ndarray
    h: np.ndarray
    lb: Optional[np.ndarray] = None
    ub: Optional[np.ndarray] = None

    def __post_init__(self):
        self.g = np.asarray(self.g, dtype=float).reshape(-1)
        n = self.g.shape[0]
        self.H = np.atleast_2d(np.asarray(self.H, dtype=float))
        G = np.asarray(self.G, dtype=float)
        self.G = G if G.size else np.zeros((0, n))
        self.h = np.asarray(self.h, dtype=float).reshape(-1)
        self.lb = np.full(n, -np.inf) if self.lb is None else np.asarray(self.lb, dtype=float).reshape(-1)
        self.ub = np.full(n, np.inf) if self.ub is None else np.asarray(self.ub, dtype=float).reshape(-1)
        validate_problem_dimensions(self.H, self.g, self.G, self.h, self.lb, self.ub)
        validate_cost_matrix(self.H)
        validate_box(self.lb, self.ub)

    @property
    def n(self):
        return self.g.shape[0]

    @property
    def m(self):
        return self.G.shape[0]

    def objective(self, x):
        return 0.5 * x @ self.H @ x + self.g @ x

    def box_rows(self):
        """Indices of variables with at least one finite box bound."""
        return np.flatnonzero(np.isfinite(self.lb) | np.isfinite(self.ub))

    def stacked(self):
        """Two-sided form l <= Ax <= u with the finite box rows under G."""
        rows = self.box_rows()
        A = np.vstack([self.G, np.eye(self.n)[rows]])
        lower = np.concatenate([np.full(self.m, -np.inf), self.lb[rows]])
        upper = np.concatenate([self.h, self.ub[rows]])
        return A, lower, upper


@dataclass
class QpSolution:
    x: np.ndarray
    lam: np.ndarray
    status: QpStatus
    kkt_residual: float
    lam_lb: np.ndarray = field(default_factory=lambda: np.zeros(0))
    lam_ub: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective: float = float('nan')
    iterations: int = 0
    polished: bool = False

    @property
    def optimal(self):
        return self.status == QpStatus.OPTIMAL


def kkt_residuals(problem, x, lam, lam_lb, lam_ub):
    """
    Primal violation, stationarity and complementarity of a candidate
    primal/dual pair, each as an infinity norm.
    """
    slack = problem.h - problem.G @ x
    primal = max(
        float(np.max(-slack, initial=0.0)),
        float(np.max(problem.lb - x, initial=0.0)),
        float(np.max(x - problem.ub, initial=0.0)),
    )
    stationarity = problem.H @ x + problem.g + problem.G.T @ lam + lam_ub - lam_lb
    dual = float(np.max(np.abs(stationarity), initial=0.0))

    def gap(multiplier, distance):
        finite = np.isfinite(distance)
        return float(np.max(np.abs(multiplier[finite] * distance[finite]), initial=0.0))

    comp = max(gap(lam, slack), gap(lam_lb, x - problem.lb), gap(lam_ub, problem.ub - x))
    return primal, dual, comp
