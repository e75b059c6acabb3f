"""SPDC pair emission and signal/idler separation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .quantum_core import BellKind, DensityMatrix, bell_state, tensor

C_NM_THZ = 299792.458  # speed of light in nm * THz
FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


class Polarization(str, Enum):
    H = "H"
    V = "V"
    ENTANGLED = "Entangled"


class SeparationMode(str, Enum):
    DICHROIC = "DICHROIC"
    PBS = "PBS"


@dataclass(frozen=True)
class SpdcConfig:
    pump_wavelength_nm: float = 775.0
    degeneracy_bandwidth_fwhm_nm: float = 5.0
    temporal_jitter_stdev_ps: float = 20.0
    emission_success_probability: float = 0.95
    photon_fwhm_GHz: float = 30.0
    separation_mode: SeparationMode = SeparationMode.DICHROIC
    dm_insertion_loss_db: float = 0.1
    dm_crosstalk_probability: float = 0.01
    # test hook: pin both photons to the degenerate frequency
    force_degenerate: bool = False


@dataclass(frozen=True)
class FlyingPhoton:
    photon_id: int
    qubit_id: str
    center_freq_THz: float
    spectral_fwhm_GHz: float
    arrival_time_ps: float
    nominal_pol: Polarization
    alive: bool = True

    def __post_init__(self):
        if self.center_freq_THz <= 0 or self.spectral_fwhm_GHz <= 0:
            raise ValueError("photon frequency and spectral width must be positive")

    @property
    def wavelength_nm(self) -> float:
        return C_NM_THZ / self.center_freq_THz

    # direct constructor calls: dataclasses.replace is slow in the trial loop
    def lost(self) -> "FlyingPhoton":
        return FlyingPhoton(self.photon_id, self.qubit_id, self.center_freq_THz, self.spectral_fwhm_GHz,
                            self.arrival_time_ps, self.nominal_pol, False)

    def with_polarization(self, pol: Polarization) -> "FlyingPhoton":
        return FlyingPhoton(self.photon_id, self.qubit_id, self.center_freq_THz, self.spectral_fwhm_GHz,
                            self.arrival_time_ps, pol, self.alive)

    def delayed(self, dt_ps: float) -> "FlyingPhoton":
        return FlyingPhoton(self.photon_id, self.qubit_id, self.center_freq_THz, self.spectral_fwhm_GHz,
                            self.arrival_time_ps + dt_ps, self.nominal_pol, self.alive)


@dataclass(frozen=True)
class PhotonPair:
    signal: FlyingPhoton
    idler: FlyingPhoton
    source_index: int
    joint_state_qubits: tuple


def fwhm_to_sigma(fwhm: float) -> float:
    if fwhm <= 0:
        raise ValueError(f"FWHM must be positive, got {fwhm}")
    return fwhm / FWHM_PER_SIGMA


def db_to_survival(loss_db: float) -> float:
    return 10.0 ** (-loss_db / 10.0)


def degenerate_frequency_THz(pump_wavelength_nm: float) -> float:
    return C_NM_THZ / pump_wavelength_nm / 2.0


def degeneracy_sigma_THz(cfg: SpdcConfig) -> float:
    """Gaussian sigma of the frequency offset, from the nm FWHM at 2 x pump."""
    lam = 2.0 * cfg.pump_wavelength_nm
    return fwhm_to_sigma(C_NM_THZ * cfg.degeneracy_bandwidth_fwhm_nm / lam**2)


def sample_pair_frequencies(cfg: SpdcConfig, rng) -> tuple[float, float]:
    """Draw (signal, idler) centre frequencies in THz; they sum to the pump frequency."""
    nu0 = degenerate_frequency_THz(cfg.pump_wavelength_nm)
    if cfg.force_degenerate:
        return nu0, nu0
    delta = rng.normal(0.0, degeneracy_sigma_THz(cfg))
    return nu0 + delta, nu0 - delta


def emit(cfg: SpdcConfig, source_index: int, trial_state: Optional[DensityMatrix], rng):
    """Trigger one SPDC process.

    Returns ``(pair, state)``. On a vacuum event the pair is None and the
    incoming state is returned untouched; otherwise two new qubits in
    |Psi+> are appended to the trial state.
    """
    if source_index not in (0, 1):
        raise ValueError(f"source_index must be 0 or 1, got {source_index}")
    if rng.random() >= cfg.emission_success_probability:
        return None, trial_state
    if trial_state is not None and trial_state.n_qubits > 2:
        raise ValueError("trial state has no room for another pair")

    nu_a, nu_b = sample_pair_frequencies(cfg, rng)
    jitter = cfg.temporal_jitter_stdev_ps
    t = rng.normal(0.0, jitter) if jitter > 0 else 0.0
    qa, qb = f"q{2 * source_index}", f"q{2 * source_index + 1}"
    a = FlyingPhoton(2 * source_index, qa, nu_a, cfg.photon_fwhm_GHz, t, Polarization.ENTANGLED)
    b = FlyingPhoton(2 * source_index + 1, qb, nu_b, cfg.photon_fwhm_GHz, t, Polarization.ENTANGLED)
    state = tensor(trial_state, bell_state(BellKind.PSI_PLUS, (qa, qb)))
    return PhotonPair(a, b, source_index, (qa, qb)), state


def separate(pair: PhotonPair, cfg: SpdcConfig, rng) -> tuple[FlyingPhoton, FlyingPhoton]:
    """Split a pair into (signal, idler) paths.

    PBS: source 0 sends H to the signal arm, source 1 is configured
    inversely, so the two idlers are always orthogonal. DICHROIC: the
    longer-wavelength photon is the signal; crosstalk swaps the roles and
    each photon may be lost in the mirror.
    """
    a, b = pair.signal, pair.idler
    if not (a.alive and b.alive):
        raise ValueError("cannot separate a pair with a lost photon")

    if cfg.separation_mode == SeparationMode.PBS:
        sig_pol, idl_pol = (
            (Polarization.H, Polarization.V) if pair.source_index == 0 else (Polarization.V, Polarization.H)
        )
        return a.with_polarization(sig_pol), b.with_polarization(idl_pol)

    signal, idler = (b, a) if b.center_freq_THz < a.center_freq_THz else (a, b)
    if rng.random() < cfg.dm_crosstalk_probability:
        signal, idler = idler, signal
    keep = db_to_survival(cfg.dm_insertion_loss_db)
    if rng.random() >= keep:
        signal = signal.lost()
    if rng.random() >= keep:
        idler = idler.lost()
    return signal, idler
