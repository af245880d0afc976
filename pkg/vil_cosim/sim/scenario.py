from dataclasses import dataclass, replace

from .validators import validate_choice, validate_scenario

MICROSIM = 'microsim'
US06 = 'us06'
UDDS = 'udds'
SCENARIOS = (MICROSIM, US06, UDDS)

WIE = 'wie'
IDM = 'idm'
MPC_U = 'mpc-u'
MPC_C = 'mpc-c'
CONTROLLERS = (WIE, IDM, MPC_U, MPC_C)
CONTROLLER_LABELS = {WIE: 'WIE', IDM: 'IDM', MPC_U: 'MPC-U', MPC_C: 'MPC-C'}


@dataclass(frozen=True)
class ScenarioConfig:
    """
    One experiment: the circuit scenario, the ego controller and the run
    size. Drive-cycle scenarios put a single cycle-playing vehicle in front
    of the ego, so ``n_vehicles`` is 2 for them.
    """
    kind: str = MICROSIM
    controller: str = WIE
    n_vehicles: int = 74
    n_cav_string: int = 5
    ego_index: int = 37
    laps: int = 6
    tick: float = 0.1
    seed: int = 0
    upstream_count: int = 11
    max_time: float = 3600.0

    def __post_init__(self):
        object.__setattr__(self, 'kind', self.kind.lower())
        object.__setattr__(self, 'controller', self.controller.lower())
        validate_choice('kind', self.kind, SCENARIOS)
        validate_choice('controller', self.controller, CONTROLLERS)
        validate_scenario(self)

    @property
    def is_cycle(self):
        return self.kind != MICROSIM

    @property
    def discard_first_lap(self):
        return self.kind == MICROSIM

    @property
    def label(self):
        return CONTROLLER_LABELS[self.controller]

    @property
    def ego_id(self):
        return self.ego_index

    @classmethod
    def from_config(cls, config, kind=MICROSIM, controller=WIE, **overrides):
        kind = kind.lower()
        if kind == MICROSIM:
            values = dict(
                n_vehicles=config['scenario.n_vehicles'],
                n_cav_string=config['scenario.n_cav_string'],
                ego_index=config['scenario.ego_index'],
                laps=config['scenario.laps'],
            )
        else:
            values = dict(n_vehicles=2, n_cav_string=0, ego_index=1, laps=config['scenario.cycle_laps'])
        values.update(
            kind=kind,
            controller=controller,
            tick=config['tick'],
            upstream_count=config['scenario.upstream_count'],
            max_time=config['scenario.max_time'],
        )
        values.update(overrides)
        return cls(**values)

    def with_overrides(self, **overrides):
        return replace(self, **overrides)
