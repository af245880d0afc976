"""
Message types exchanged between the simulation server and vehicle clients.

Every frame starts with a preamble byte naming its variant, followed by a
fixed little-endian layout (see ``codec``). The error flag follows the
wire convention OK = 1, error = 0.
"""
import enum
from dataclasses import dataclass, field
from typing import Tuple

SUBSCRIPTION = 0x16
V2SIM = 0x43
SIM2V = 0xEC
V2V = 0x6B
TIME_SYNC = 0x54

STATUS_OK = 1
STATUS_ERROR = 0


class VehicleType(enum.IntEnum):
    HUMAN = 0
    CAV = 1


@dataclass(frozen=True)
class ProbeData:
    v: float = 0.0
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0
    brake_on: int = 0
    timestamp: float = 0.0


@dataclass(frozen=True)
class Subscription:
    """Sent by a client to join (sub_flag=1) or leave (sub_flag=0) a run."""
    vehicle_id: int
    probe: ProbeData = field(default_factory=ProbeData)
    sim_physical_flag: int = 1
    sub_flag: int = 1
    error: int = STATUS_OK
    preamble = SUBSCRIPTION


@dataclass(frozen=True)
class V2Sim:
    vehicle_id: int
    probe: ProbeData = field(default_factory=ProbeData)
    error: int = STATUS_OK
    preamble = V2SIM


@dataclass(frozen=True)
class SimulatedVehicle:
    """
    One Sim2V entry. dx is the signed arc-length distance from the
    receiving vehicle, dy the lateral offset.
    """
    vehicle_id: int
    vehicle_type: int = VehicleType.HUMAN
    v: float = 0.0
    dx: float = 0.0
    dy: float = 0.0
    heading: float = 0.0
    brake_on: int = 0
    timestamp: float = 0.0


@dataclass(frozen=True)
class Sim2V:
    vehicles: Tuple[SimulatedVehicle, ...] = ()
    error: int = STATUS_OK
    preamble = SIM2V

    def __post_init__(self):
        object.__setattr__(self, 'vehicles', tuple(self.vehicles))

    @property
    def count(self):
        return len(self.vehicles)

    def vehicle(self, vehicle_id):
        for entry in self.vehicles:
            if entry.vehicle_id == vehicle_id:
                return entry
        return None


@dataclass(frozen=True)
class V2VPlan:
    """Planned odometer positions s_i at timestamp + i*dt_h, lateral l_i, final speed."""
    vehicle_id: int
    timestamp: float
    s: Tuple[float, ...] = ()
    l: Tuple[float, ...] = ()
    v_final: float = 0.0
    error: int = STATUS_OK
    preamble = V2V

    def __post_init__(self):
        object.__setattr__(self, 's', tuple(float(value) for value in self.s))
        lateral = self.l if self.l else (0.0,) * len(self.s)
        object.__setattr__(self, 'l', tuple(float(value) for value in lateral))

    @property
    def n(self):
        return len(self.s)


@dataclass(frozen=True)
class TimeSync:
    """
    Clock exchange: the client fills t0 and sends; the server adds its
    receive (t1) and transmit (t2) stamps and echoes the frame back.
    """
    t0: float
    t1: float = 0.0
    t2: float = 0.0
    error: int = STATUS_OK
    preamble = TIME_SYNC


MESSAGE_TYPES = {
    SUBSCRIPTION: Subscription,
    V2SIM: V2Sim,
    SIM2V: Sim2V,
    V2V: V2VPlan,
    TIME_SYNC: TimeSync,
}
