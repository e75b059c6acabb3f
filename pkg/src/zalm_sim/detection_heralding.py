"""Channel-resolved detectors and the heralding station."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

from .interferometer import SIGNAL_LABELS, Arm, Port
from .photon_source import FlyingPhoton
from .quantum_core import BellKind, Pauli, PauliOp


class DetectorType(str, Enum):
    STANDARD = "STANDARD"
    PNR = "PNR"


@dataclass(frozen=True)
class DetectorConfig:
    efficiency: float = 0.98
    detector_type: DetectorType = DetectorType.STANDARD


@dataclass(frozen=True, order=True)
class Click:
    port: Port
    arm: Arm
    channel_index: int
    photon_count: int = 1
    time_ps: float = 0.0


@dataclass(frozen=True)
class HeraldResult:
    bell: BellKind
    channel_index: int
    corrections: tuple
    herald_time_ps: float


# Pauli frame taking each heralded state to |Psi->, applied in list order
_TARGET = SIGNAL_LABELS[1]
CORRECTIONS = {
    BellKind.PSI_MINUS: (),
    BellKind.PSI_PLUS: (PauliOp(Pauli.Z, _TARGET),),
    BellKind.PHI_MINUS: (PauliOp(Pauli.X, _TARGET),),
    BellKind.PHI_PLUS: (PauliOp(Pauli.X, _TARGET), PauliOp(Pauli.Z, _TARGET)),
}


def detect(
    photons: Sequence[FlyingPhoton],
    port: Port,
    arm: Arm,
    channel_index: int,
    cfg: DetectorConfig,
    rng,
) -> Optional[Click]:
    """One detector behind (port, arm, channel). Each photon registers independently."""
    registered = [p for p in photons if p.alive and rng.random() < cfg.efficiency]
    if not registered:
        return None
    count = len(registered) if cfg.detector_type == DetectorType.PNR else 1
    return Click(Port(port), Arm(arm), channel_index, count, max(p.arrival_time_ps for p in registered))


def _check(click: Click, cfg: DetectorConfig) -> None:
    if not isinstance(click.port, Port) or not isinstance(click.arm, Arm):
        raise ValueError(f"malformed click arm: {click!r}")
    if click.photon_count < 1:
        raise ValueError(f"click with photon_count {click.photon_count}")
    if click.photon_count > 1 and cfg.detector_type != DetectorType.PNR:
        raise ValueError("only PNR detectors report more than one photon")


def herald(clicks: Iterable[Click], cfg: DetectorConfig) -> Optional[HeraldResult]:
    """Map a trial's click pattern to a heralded Bell state, or None."""
    clicks = sorted(clicks)
    for c in clicks:
        _check(c, cfg)

    kind = None
    if len(clicks) == 1 and clicks[0].photon_count == 2:
        c = clicks[0]
        kind = BellKind.PHI_PLUS if c.port is Port.I_PLUS else BellKind.PHI_MINUS
    elif len(clicks) == 2 and all(c.photon_count == 1 for c in clicks):
        a, b = clicks
        if a.channel_index != b.channel_index or a.arm == b.arm:
            return None
        kind = BellKind.PSI_PLUS if a.port == b.port else BellKind.PSI_MINUS
    if kind is None:
        return None
    return HeraldResult(
        bell=kind,
        channel_index=clicks[0].channel_index,
        corrections=CORRECTIONS[kind],
        herald_time_ps=max(c.time_ps for c in clicks),
    )
