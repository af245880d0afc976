import logging
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from qpsolver.admm import AdmmSettings, AdmmSolver
from qpsolver.problem import QpStatus

from .ocp import OcpBuilder
from .preview import align_plan, preview_from_plan, preview_from_prediction
from .speed_limit import moving_speed_limit

logger = logging.getLogger(__name__)


@dataclass
class MpcResult:
    u0: float
    plan: np.ndarray
    v_final: float
    status: QpStatus
    fallback: bool = False
    slacks: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective: float = float('nan')
    solve_time: float = 0.0
    source: str = ''


class MpcController:
    """
    Receding-horizon controller for one vehicle. Owns its solver so the
    warm start carries from one tick to the next.
    """

    def __init__(self, params, track, settings: Optional[AdmmSettings] = None):
        self.params = params
        self.track = track
        self.builder = OcpBuilder(params)
        self.solver = AdmmSolver(settings or AdmmSettings())
        self.last_result = None

    def reset(self):
        self.solver.reset()
        self.last_result = None

    def step(self, ego, gap, pv=None, plan=None, now=0.0):
        """
        One control step.

        ``gap`` is the measured bumper gap to the PV. With a V2V ``plan`` the
        connected preview is used; otherwise the PV state ``pv`` is predicted.
        """
        p = self.params
        track = self.track
        ego_odometer = ego.odometer(track)
        v_bar = moving_speed_limit(ego, track, p.N, p.dt_h)

        if plan is not None:
            pv_odometer = ego_odometer + gap + track.vehicle_length
            plan = replace(plan, positions=align_plan(plan.positions, pv_odometer, track.circuit_length))
            preview = preview_from_plan(plan, now, ego_odometer, pv_odometer, track.vehicle_length, p)
        elif pv is not None:
            preview = preview_from_prediction(gap, pv, track.limit_at(pv.s), p, self.builder.model)
        else:
            raise ValueError('MPC step needs either a PV state or a PV plan')

        ocp = self.builder.assemble(ego.v, ego.a, preview, v_bar)
        started = time.perf_counter()
        solution = self.solver.solve(ocp.problem)
        elapsed = time.perf_counter() - started

        if solution.optimal:
            U = ocp.inputs(solution.x)
            u0 = float(np.clip(U[0], p.u_min, p.accel_limit(ego.v)))
            fallback = False
        else:
            logger.warning("%s solve failed (%s) at s=%.1f v=%.2f; braking at %.1f m/s²",
                           p.name, solution.status.value, ego.s, ego.v, track.a_c)
            U = np.full(p.N, track.a_c)
            u0 = track.a_c
            fallback = True

        states = self.builder.trajectory(ego.v, ego.a, U)
        result = MpcResult(
            u0=u0,
            plan=ego_odometer + states[1:, 0],
            v_final=float(states[-1, 1]),
            status=solution.status,
            fallback=fallback,
            slacks=ocp.slacks(solution.x),
            objective=ocp.cost(solution.x),
            solve_time=elapsed,
            source=preview.source,
        )
        logger.debug("%s u0=%.3f gap=%.2f slacks=%s iters=%d %.1f ms", p.name, u0, gap,
                     np.round(result.slacks, 4), solution.iterations, 1e3 * elapsed)
        self.last_result = result
        return result


def mpc_step(ego, gap, track, params, pv=None, plan=None, now=0.0, controller=None):
    """Single MPC step; builds a throwaway controller unless one is given."""
    controller = controller or MpcController(params, track)
    return controller.step(ego, gap, pv=pv, plan=plan, now=now)
