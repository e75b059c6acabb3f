"""Delay line, Pockels-cell corrections and the fibre link to the receivers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .photon_source import FlyingPhoton, db_to_survival
from .quantum_core import DensityMatrix, PauliOp, apply_pauli, depolarize

C_KM_PER_PS = 299792.458e-12  # km/ps


@dataclass(frozen=True)
class NoiseConfig:
    gate_error_prob_single: float = 1e-4
    gate_error_prob_two: float = 1e-3
    measurement_dephase_prob: float = 1e-3
    memory_depolar_rate_hz: float = 1e3
    delay_line_ns: float = 20.0


@dataclass(frozen=True)
class FiberConfig:
    internode_length_km: float = 15.0
    attenuation_db_per_km: float = 0.2
    refractive_index: float = 1.468
    depolar_prob_per_km: float = 0.0


def delay_and_store(
    trial_state: DensityMatrix, signal_qubits: Sequence, duration_ps: float, cfg: NoiseConfig
) -> DensityMatrix:
    if duration_ps < 0:
        raise ValueError(f"negative storage duration {duration_ps} ps")
    p = 1.0 - math.exp(-cfg.memory_depolar_rate_hz * duration_ps * 1e-12)
    if p == 0.0:
        return trial_state
    for q in signal_qubits:
        trial_state = depolarize(trial_state, q, p)
    return trial_state


def apply_corrections(
    trial_state: DensityMatrix, corrections: Iterable[PauliOp], cfg: NoiseConfig
) -> DensityMatrix:
    """Apply each Pauli, followed by single-qubit gate depolarization on its target."""
    for op in corrections:
        trial_state = apply_pauli(trial_state, op)
        trial_state = depolarize(trial_state, op.target, cfg.gate_error_prob_single)
    return trial_state


def fiber_survival(cfg: FiberConfig) -> float:
    return db_to_survival(cfg.attenuation_db_per_km * cfg.internode_length_km)


def fiber_depolarization(cfg: FiberConfig) -> float:
    """Accumulated depolarization probability over the link (0 by default)."""
    return 1.0 - (1.0 - cfg.depolar_prob_per_km) ** cfg.internode_length_km


def fiber_transmit(photon: FlyingPhoton, cfg: FiberConfig, rng) -> FlyingPhoton:
    if not photon.alive:
        raise ValueError("cannot transmit a lost photon")
    delay = cfg.internode_length_km * cfg.refractive_index / C_KM_PER_PS
    photon = photon.delayed(delay)
    if rng.random() >= fiber_survival(cfg):
        photon = photon.lost()
    return photon
