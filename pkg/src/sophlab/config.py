from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace

from .enumerator import EnumConfig
from .machine import MACHINE_ID
from .tables import Cutoff, Mode


@dataclass(frozen=True)
class RunConfig:
    lmax: int = 14
    tmax: int = 4096
    ocap: int = 64
    cmax: int = 8
    modes: tuple[Mode, ...] = (Mode.QP, Mode.QK)
    omega_cutoff: Cutoff = Cutoff.NONE
    workers: int = 1
    out: str = "."
    cond_sample: int = 20
    # conditional enumerations run at lmax - cond_reduction
    cond_reduction: int = 4
    seed: int = 0
    # surrogate constant in the K(P_k) upper bound
    c_p: int = 0
    # slack c' in the k_c - k_{c+c'} witness search
    c_prime: int = 1
    # |K(x) - n| <= w12_slack counts as incompressible in the count check
    w12_slack: int = 2
    # P_k with gap <= p2_slack count as sufficient in the P2 report
    p2_slack: int = 8
    # k ranges over 1 .. k_c(x) + p3_e in the second sufficiency scan
    p3_e: int = 2
    aux: str = ""
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(Mode(m) for m in self.modes))
        object.__setattr__(self, "omega_cutoff", Cutoff(self.omega_cutoff))

    @property
    def enum_config(self) -> EnumConfig:
        return EnumConfig(self.lmax, self.tmax, self.ocap, self.aux)

    @property
    def cond_lmax(self) -> int:
        return max(1, self.lmax - self.cond_reduction)

    def with_(self, **changes) -> RunConfig:
        return replace(self, **changes)

    def snapshot(self) -> dict:
        """Every field that can change a result (not workers or paths)."""
        d = asdict(self)
        for key in ("workers", "out", "extra"):
            d.pop(key)
        d["modes"] = [m.value for m in self.modes]
        d["omega_cutoff"] = self.omega_cutoff.value
        d["machine"] = MACHINE_ID
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.snapshot(), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]
