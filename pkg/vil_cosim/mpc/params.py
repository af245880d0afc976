from dataclasses import dataclass, replace

from .validators import validate_mpc_params

PROFILES = ('mpc-u', 'mpc-c')


@dataclass(frozen=True)
class MpcParams:
    name: str = 'mpc-u'
    N: int = 16
    q_a: float = 2050.0
    q_g: float = 1.0
    T: float = 1.3
    d_r: float = 2.0
    d_min: float = 2.0
    rho: tuple = (1e6, 5e5, 5e5, 1e6)
    m: tuple = (0.285, -0.121)
    b: tuple = (2.00, 4.83)
    u_min: float = -5.5
    tau_a: float = 0.275
    dt_h: float = 1.0
    sigma_a: float = 10.84
    alpha_lo: float = 0.5
    alpha_hi: float = 0.99999
    t_f: float = 10.0
    per_stage_slacks: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'rho', tuple(self.rho))
        object.__setattr__(self, 'm', tuple(self.m))
        object.__setattr__(self, 'b', tuple(self.b))
        validate_mpc_params(self)

    @property
    def connected(self):
        return self.name == 'mpc-c'

    @classmethod
    def profile(cls, name, **overrides):
        """Table values for the unconnected or connected controller."""
        if name == 'mpc-c':
            values = dict(name='mpc-c', N=17, q_a=4000.0, T=0.0, d_r=6.0)
        else:
            values = dict(name='mpc-u')
        values.update(overrides)
        return cls(**values)

    @classmethod
    def from_config(cls, config, name):
        prefix = 'mpc_c' if name == 'mpc-c' else 'mpc_u'
        return cls(
            name=name,
            N=config[f'{prefix}.N'],
            q_a=config[f'{prefix}.q_a'],
            T=config[f'{prefix}.T'],
            d_r=config[f'{prefix}.d_r'],
            q_g=config['mpc.q_g'],
            d_min=config['mpc.d_min'],
            rho=tuple(config[f'mpc.rho{j}'] for j in range(1, 5)),
            m=(config['mpc.m1'], config['mpc.m2']),
            b=(config['mpc.b1'], config['mpc.b2']),
            u_min=config['mpc.u_min'],
            tau_a=config['mpc.tau_a'],
            dt_h=config['mpc.dt_h'],
            sigma_a=config['sigma_a'],
            alpha_lo=config['mpc.alpha_lo'],
            alpha_hi=config['mpc.alpha_hi'],
            t_f=config['mpc.t_f'],
            per_stage_slacks=config['mpc.per_stage_slacks'],
        )

    def with_overrides(self, **overrides):
        return replace(self, **overrides)

    def accel_limit(self, v):
        """Upper acceleration bound min(m1 v + b1, m2 v + b2)."""
        return min(self.m[0] * v + self.b[0], self.m[1] * v + self.b[1])
