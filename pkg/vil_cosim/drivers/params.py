from dataclasses import dataclass, replace

from .validators import validate_idm_params, validate_wie99_params

KMH_80 = 80.0 / 3.6


@dataclass(frozen=True)
class Wie99Params:
    """Wiedemann 99 calibration. CC6 is in VISSIM units of 1e-4 rad/s."""
    cc0: float = 3.00
    cc1: float = 1.35
    cc2: float = 8.00
    cc3: float = -8.00
    cc4: float = -0.35
    cc5: float = 0.35
    cc6: float = 11.4
    cc7: float = 0.25
    cc8: float = 3.50
    cc9: float = 1.50
    driver_random: float = 0.35

    def __post_init__(self):
        validate_wie99_params(self)

    @classmethod
    def from_config(cls, config, **overrides):
        values = {
            name: config[f'wie.{name}']
            for name in ('cc0', 'cc1', 'cc2', 'cc3', 'cc4', 'cc5',
                         'cc6', 'cc7', 'cc8', 'cc9', 'driver_random')
        }
        values.update(overrides)
        return cls(**values)

    def with_driver_random(self, value):
        return replace(self, driver_random=value)

    def accel_bound(self, v):
        """Maximum acceleration, CC8 at standstill falling linearly to CC9 at 80 km/h."""
        ratio = min(max(v, 0.0), KMH_80) / KMH_80
        return self.cc8 + (self.cc9 - self.cc8) * ratio


@dataclass(frozen=True)
class IdmParams:
    a0: float = 1.52
    b0: float = 3.24
    T: float = 1.02
    s0: float = 10.0
    delta: float = 4.0
    v0: float = 22.3

    def __post_init__(self):
        validate_idm_params(self)

    @classmethod
    def from_config(cls, config, **overrides):
        values = {
            'a0': config['idm.a0'],
            'b0': config['idm.b0'],
            'T': config['idm.T'],
            's0': config['idm.s0'],
            'delta': config['idm.delta'],
            'v0': config['v_straight'],
        }
        values.update(overrides)
        return cls(**values)
