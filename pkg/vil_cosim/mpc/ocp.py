"""
Condensed quadratic program for one MPC step.

The ego state is taken relative to its own front bumper, x0 = [0, v, a],
and every PV position in the preview is measured from that point. The
decision vector is z = [u(0..N-1), eps], where eps holds the four slacks
(collision, speed, reverse, acceleration state) as shared scalars or, with
``per_stage_slacks``, one of each per stage.
"""
import logging
from dataclasses import dataclass

import numpy as np

from qpsolver.problem import OcpProblem

from .model import discretize, prediction_matrices
from .validators import validate_preview_length

logger = logging.getLogger(__name__)

COLLISION, SPEED, REVERSE, ACCEL = range(4)


@dataclass
class AssembledOcp:
    problem: OcpProblem
    constant: float
    N: int

    def cost(self, z):
        """Objective value including the terms that do not depend on z."""
        return float(self.problem.objective(np.asarray(z, dtype=float)) + self.constant)

    def inputs(self, z):
        return np.asarray(z)[:self.N]

    def slacks(self, z):
        return np.asarray(z)[self.N:]


class OcpBuilder:
    """
    Holds the parts of the QP fixed by the parameter profile: the Hessian,
    the constraint matrix and the prediction matrices. Only the linear cost
    and the right-hand side change between steps.
    """

    def __init__(self, params):
        self.params = params
        self.model = discretize(params.tau_a, params.dt_h)
        N = params.N
        self.N = N
        self.n_slack = 4 * N if params.per_stage_slacks else 4
        self.n = N + self.n_slack
        self.Phi, Gamma = prediction_matrices(self.model, N)
        self.S = Gamma[:, 0, :]
        self.V = Gamma[:, 1, :]
        self.A = Gamma[:, 2, :]
        self.H = self._hessian()
        self.G = self._constraints()
        self.lb = np.concatenate([np.full(N, params.u_min), np.zeros(self.n_slack)])
        self.ub = np.full(self.n, np.inf)
        self.rho = self._slack_weights()

    def slack_index(self, kind, stage):
        """Column of the slack of ``kind`` active at ``stage`` (1..N)."""
        if self.params.per_stage_slacks:
            return self.N + kind * self.N + (stage - 1)
        return self.N + kind

    def _slack_weights(self):
        if self.params.per_stage_slacks:
            return np.repeat(np.asarray(self.params.rho, dtype=float), self.N)
        return np.asarray(self.params.rho, dtype=float)

    def _tracking_rows(self):
        return self.S + self.params.T * self.V

    def _hessian(self):
        p = self.params
        E = self._tracking_rows()
        H_u = 2.0 * (p.q_g * E.T @ E + p.q_a * np.eye(self.N) + p.q_a * self.A.T @ self.A)
        H = np.zeros((self.n, self.n))
        H[:self.N, :self.N] = 0.5 * (H_u + H_u.T)
        return H

    def _constraints(self):
        p = self.params
        N = self.N
        rows = []

        def row(coeffs, slack=None):
            r = np.zeros(self.n)
            r[:N] = coeffs
            if slack is not None:
                r[self.slack_index(*slack)] = -1.0
            rows.append(r)

        unit = np.eye(N)
        for i in range(N):
            for m_k in p.m:
                row(unit[i] - m_k * self.V[i])
        for i in range(1, N + 1):
            row(self.V[i], (SPEED, i))
            row(-self.V[i], (REVERSE, i))
            for m_k in p.m:
                row(self.A[i] - m_k * self.V[i], (ACCEL, i))
            row(self.S[i], (COLLISION, i))
        return np.array(rows)

    def free_response(self, v0, a0):
        x0 = np.array([0.0, v0, a0])
        free = self.Phi @ x0
        return free[:, 0], free[:, 1], free[:, 2]

    def assemble(self, v0, a0, preview, v_bar):
        p = self.params
        N = self.N
        validate_preview_length('s_r', preview.s_r, N + 1)
        validate_preview_length('s_alpha', preview.s_alpha, N + 1)
        validate_preview_length('v_bar', v_bar, N + 1)

        s_f, v_f, a_f = self.free_response(v0, a0)
        e_f = s_f + p.T * v_f + p.d_r - np.asarray(preview.s_r, dtype=float)
        E = self._tracking_rows()

        g = np.zeros(self.n)
        g[:N] = 2.0 * (p.q_g * E.T @ e_f + p.q_a * self.A.T @ a_f)
        g[N:] = self.rho
        constant = p.q_g * float(e_f @ e_f) + p.q_a * float(a_f @ a_f)

        h = []
        for i in range(N):
            for m_k, b_k in zip(p.m, p.b):
                h.append(b_k + m_k * v_f[i])
        for i in range(1, N + 1):
            h.append(v_bar[i] - v_f[i])
            h.append(v_f[i])
            for m_k, b_k in zip(p.m, p.b):
                h.append(b_k - a_f[i] + m_k * v_f[i])
            h.append(preview.s_alpha[i] - p.d_min - s_f[i])

        problem = OcpProblem(H=self.H, g=g, G=self.G, h=np.array(h), lb=self.lb, ub=self.ub)
        return AssembledOcp(problem=problem, constant=constant, N=N)

    def trajectory(self, v0, a0, U):
        """Predicted ego states (N+1, 3) relative to the current front bumper."""
        x0 = np.array([0.0, v0, a0])
        Gamma = np.stack([self.S, self.V, self.A], axis=1)
        return self.Phi @ x0 + Gamma @ np.asarray(U, dtype=float)


def assemble_ocp(ego, preview, v_bar, params, builder=None):
    builder = builder or OcpBuilder(params)
    return builder.assemble(ego.v, ego.a, preview, v_bar)
