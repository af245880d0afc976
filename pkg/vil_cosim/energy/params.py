from dataclasses import dataclass, replace

from .validators import validate_proxy_params


@dataclass(frozen=True)
class ProxyParams:
    """
    Road-load and drivetrain placeholders for simulated vehicles that have
    no measured trace. They are not calibrated against any test vehicle.
    """
    mass: float = 1500.0
    c0: float = 120.0
    c1: float = 1.0
    c2: float = 0.55
    eta_drive: float = 0.85
    eta_regen: float = 0.60
    icev_efficiency: float = 0.30
    rich_power_start: float = 30000.0
    rich_power_full: float = 60000.0
    lambda_min: float = 0.70
    fuel_lhv: float = 32.0e6

    def __post_init__(self):
        validate_proxy_params(self)

    @classmethod
    def from_config(cls, config):
        return cls(**{name: config[f'energy.{name}'] for name in cls.__dataclass_fields__})

    def without_regen(self):
        return replace(self, eta_regen=0.0)
