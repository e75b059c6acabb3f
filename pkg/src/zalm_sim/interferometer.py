"""50:50 beam splitter with HOM interference, and the two polarizing beam splitters."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .photon_source import FlyingPhoton, Polarization, db_to_survival, fwhm_to_sigma
from .quantum_core import BellKind, DensityMatrix, dephase_bell, pure_state

SIGNAL_LABELS = ("s1", "s2")


class Port(str, Enum):
    I_PLUS = "I+"
    I_MINUS = "I-"  # reflected port, carries the pi phase shift


class Arm(str, Enum):
    H = "H"
    V = "V"


@dataclass(frozen=True)
class BsConfig:
    hom_threshold: float = 0.99
    insertion_loss_db: float = 0.20


@dataclass(frozen=True)
class PbsConfig:
    extinction_ratio: float = 0.001
    insertion_loss_db: float = 0.20


@dataclass(frozen=True)
class BsOutcome:
    """Routing at the 50:50 splitter.

    ``visibility`` includes polarization and drives bunching; ``mode_overlap``
    is the spectral-temporal part only and sets the coherence of the
    heralded pair.
    """

    port_of: dict
    bunched: bool
    visibility: float
    mode_overlap: float
    phase_flag: bool
    photons: tuple


def _sigma_omega(p1: FlyingPhoton, p2: FlyingPhoton) -> float:
    fwhm_ghz = 0.5 * (p1.spectral_fwhm_GHz + p2.spectral_fwhm_GHz)
    return fwhm_to_sigma(2.0 * math.pi * fwhm_ghz * 1e-3)  # rad/ps


def mode_overlap(p1: FlyingPhoton, p2: FlyingPhoton) -> float:
    """|<p1|p2>|^2 of two Gaussian wave packets, ignoring polarization."""
    if not (p1.alive and p2.alive):
        raise ValueError("visibility is undefined for a lost photon")
    s = _sigma_omega(p1, p2)
    d_omega = 2.0 * math.pi * (p1.center_freq_THz - p2.center_freq_THz)  # rad/ps
    dt = p1.arrival_time_ps - p2.arrival_time_ps
    v = math.exp(-(d_omega**2) / (4.0 * s * s) - s * s * dt * dt)
    return min(1.0, max(0.0, v))


def hom_visibility(p1: FlyingPhoton, p2: FlyingPhoton) -> float:
    for p in (p1, p2):
        if p.nominal_pol is Polarization.ENTANGLED:
            raise ValueError("resolve the idler polarization before computing visibility")
    pol = 1.0 if p1.nominal_pol == p2.nominal_pol else 0.0
    return pol * mode_overlap(p1, p2)


def resolve_polarization(photon: FlyingPhoton, rng) -> FlyingPhoton:
    """Fix the H/V value of an idler that is still polarization-entangled."""
    if photon.nominal_pol is not Polarization.ENTANGLED:
        return photon
    pol = Polarization.H if rng.random() < 0.5 else Polarization.V
    return photon.with_polarization(pol)


def _random_port(rng) -> Port:
    return Port.I_PLUS if rng.random() < 0.5 else Port.I_MINUS


def beamsplit(idler1: FlyingPhoton, idler2: FlyingPhoton, cfg: BsConfig, rng) -> BsOutcome:
    inputs = [p for p in (idler1, idler2) if p.alive]
    visibility = overlap = 0.0
    bunched = False
    if len(inputs) == 2:
        if Polarization.ENTANGLED in (idler1.nominal_pol, idler2.nominal_pol):
            raise ValueError("resolve the idler polarizations before the beam splitter")
        overlap = mode_overlap(idler1, idler2)
        visibility = overlap if idler1.nominal_pol == idler2.nominal_pol else 0.0
        if visibility >= cfg.hom_threshold or rng.random() < 0.5:
            bunched = True
            port = _random_port(rng)
            ports = [port, port]
        else:
            first = _random_port(rng)
            other = Port.I_MINUS if first is Port.I_PLUS else Port.I_PLUS
            ports = [first, other]
    else:
        ports = [_random_port(rng) for _ in inputs]

    keep = db_to_survival(cfg.insertion_loss_db)
    out = []
    for p in inputs:
        out.append(p if rng.random() < keep else p.lost())
    port_of = {p.photon_id: port for p, port in zip(inputs, ports)}
    return BsOutcome(
        port_of=port_of,
        bunched=bunched,
        visibility=visibility,
        mode_overlap=overlap,
        phase_flag=Port.I_MINUS in ports,
        photons=tuple(out),
    )


def pbs_route(photon: FlyingPhoton, cfg: PbsConfig, rng) -> tuple[Arm, FlyingPhoton]:
    """Route by polarization; returns the arm taken and the photon after loss."""
    if not photon.alive:
        raise ValueError("cannot route a lost photon")
    if photon.nominal_pol is Polarization.ENTANGLED:
        raise ValueError("resolve the photon polarization before the PBS")
    arm = Arm.H if photon.nominal_pol is Polarization.H else Arm.V
    if rng.random() < cfg.extinction_ratio:
        arm = Arm.V if arm is Arm.H else Arm.H
    if rng.random() >= db_to_survival(cfg.insertion_loss_db):
        photon = photon.lost()
    return arm, photon


def bell_kind_for_routing(port1: Port, arm1: Arm, port2: Port, arm2: Arm) -> Optional[BellKind]:
    """Bell state selected by a two-photon routing pattern.

    Same port and same arm gives Phi (sign from the port), same port and
    different arms gives Psi+, different ports and different arms gives
    Psi-. Different ports with the same arm is not a Bell pattern.
    """
    if port1 == port2:
        if arm1 == arm2:
            return BellKind.PHI_PLUS if port1 is Port.I_PLUS else BellKind.PHI_MINUS
        return BellKind.PSI_PLUS
    if arm1 != arm2:
        return BellKind.PSI_MINUS
    return None


_FLIP = {Polarization.H: np.array([0, 1]), Polarization.V: np.array([1, 0])}


def apply_bs_state_update(
    trial_state: DensityMatrix,
    outcome: BsOutcome,
    kind: Optional[BellKind],
    signal_qubits: Sequence,
) -> DensityMatrix:
    """Signal-pair state once the idlers are detected.

    ``kind`` is the Bell state realised by the routing; the result is that
    state with its coherence scaled by the mode overlap, labelled
    ``SIGNAL_LABELS``. With ``kind=None`` (no Bell pattern) each signal is
    left orthogonal to its partner idler's polarization.
    """
    if trial_state.n_qubits != 4:
        raise ValueError(f"expected the four-qubit trial state, got {trial_state.n_qubits} qubits")
    for q in signal_qubits:
        trial_state.index(q)
    if len(outcome.photons) != 2:
        raise ValueError("state update needs both idlers to have reached the splitter")
    if kind is not None:
        return dephase_bell(kind, outcome.mode_overlap, SIGNAL_LABELS)
    # idlers are ordered source 0, source 1 to match (s1, s2)
    idlers = sorted(outcome.photons, key=lambda p: p.photon_id)
    vec = np.kron(_FLIP[idlers[0].nominal_pol], _FLIP[idlers[1].nominal_pol])
    return pure_state(vec, SIGNAL_LABELS)
