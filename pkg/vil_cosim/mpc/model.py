from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.signal import cont2discrete


@dataclass(frozen=True)
class DiscreteModel:
    """Sampled double integrator with first-order actuator lag, state [s, v, a]."""
    A_d: np.ndarray
    B_d: np.ndarray
    tau_a: float
    dt: float

    def step(self, x, u):
        return self.A_d @ x + self.B_d * u


def continuous_model(tau_a):
    A = np.array([[0.0, 1.0, 0.0],
                  [0.0, 0.0, 1.0],
                  [0.0, 0.0, -1.0 / tau_a]])
    B = np.array([[0.0], [0.0], [1.0 / tau_a]])
    return A, B


@lru_cache(maxsize=32)
def discretize(tau_a, dt):
    """Exact zero-order-hold discretization."""
    A, B = continuous_model(tau_a)
    C = np.eye(3)
    D = np.zeros((3, 1))
    A_d, B_d, _, _, _ = cont2discrete((A, B, C, D), dt, method='zoh')
    A_d.setflags(write=False)
    B_d = B_d.reshape(-1)
    B_d.setflags(write=False)
    return DiscreteModel(A_d=A_d, B_d=B_d, tau_a=tau_a, dt=dt)


def prediction_matrices(model, N):
    """
    Stacked free response Phi (N+1, 3, 3) and forced response Gamma
    (N+1, 3, N) so that x(i) = Phi[i] x0 + Gamma[i] U.
    """
    Phi = np.empty((N + 1, 3, 3))
    Phi[0] = np.eye(3)
    for i in range(1, N + 1):
        Phi[i] = model.A_d @ Phi[i - 1]
    Gamma = np.zeros((N + 1, 3, N))
    for i in range(1, N + 1):
        for k in range(i):
            Gamma[i, :, k] = Phi[i - 1 - k] @ model.B_d
    return Phi, Gamma
