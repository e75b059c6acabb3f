"""DWDM channel plan, channel assignment and filter transmission."""

from __future__ import annotations

import bisect
import csv
import functools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, TextIO

import numpy as np

from .photon_source import FlyingPhoton, db_to_survival, fwhm_to_sigma

ITU_ANCHOR_THZ = 193.1

# band edges in THz (inclusive bounds for channel centres)
BAND_EDGES_THZ = {
    "L": (184.40, 191.30),
    "C": (191.35, 196.10),
    "S": (196.20, 205.30),
}

_QUAD_POINTS = 129
_QUAD_HALF_WIDTH = 8.0  # in photon sigmas
_UNIT_NODES = np.linspace(-1.0, 1.0, _QUAD_POINTS)
_SIMPSON_W = np.ones(_QUAD_POINTS)
_SIMPSON_W[1:-1:2] = 4.0
_SIMPSON_W[2:-1:2] = 2.0


class FilterModel(str, Enum):
    GAUSSIAN = "GAUSSIAN"
    BRICKWALL = "BRICKWALL"


@dataclass(frozen=True)
class DwdmConfig:
    enabled_bands: tuple = ("C", "S", "L")
    grid_granularity_GHz: float = 100.0
    filter_passband_fraction: float = 0.8
    effective_filter_bandwidth_GHz: float = 80.0
    insertion_loss_db: float = 0.50
    filter_model: FilterModel = FilterModel.GAUSSIAN


@dataclass(frozen=True)
class Channel:
    index: int
    center_freq_THz: float
    passband_low_THz: float
    passband_high_THz: float
    band_label: str


@dataclass(frozen=True)
class DwdmGrid:
    channels: tuple
    granularity_THz: float

    def __len__(self):
        return len(self.channels)

    def __getitem__(self, i) -> Channel:
        return self.channels[i]

    @functools.cached_property
    def centers(self) -> list:
        return [ch.center_freq_THz for ch in self.channels]


def _band_centers(low: float, high: float, spacing: float) -> list[float]:
    eps = 1e-9
    k_lo = math.ceil((low - ITU_ANCHOR_THZ) / spacing - eps)
    k_hi = math.floor((high - ITU_ANCHOR_THZ) / spacing + eps)
    return [round(ITU_ANCHOR_THZ + k * spacing, 9) for k in range(k_lo, k_hi + 1)]


@functools.lru_cache(maxsize=32)
def build_grid(cfg: DwdmConfig) -> DwdmGrid:
    """Anchor-aligned channel centres inside each enabled band, sorted by frequency."""
    bands = tuple(dict.fromkeys(cfg.enabled_bands))
    if not bands:
        raise ValueError("at least one DWDM band must be enabled")
    unknown = [b for b in bands if b not in BAND_EDGES_THZ]
    if unknown:
        raise ValueError(f"unknown band(s) {unknown}; choose from {sorted(BAND_EDGES_THZ)}")
    spacing = cfg.grid_granularity_GHz * 1e-3
    half_pass = 0.5 * cfg.filter_passband_fraction * spacing
    found = []
    for band in bands:
        lo, hi = BAND_EDGES_THZ[band]
        found.extend((c, band) for c in _band_centers(lo, hi, spacing))
    found.sort()
    channels = tuple(
        Channel(i, c, round(c - half_pass, 9), round(c + half_pass, 9), band)
        for i, (c, band) in enumerate(found)
    )
    return DwdmGrid(channels, spacing)


def assign_channel(grid: DwdmGrid, nu_THz: float) -> Optional[int]:
    """Nearest channel within half a grid spacing; ties go to the lower index."""
    if not grid.channels:
        raise ValueError("empty grid")
    centers = grid.centers
    i = bisect.bisect_left(centers, nu_THz)
    best = None
    for j in (i - 1, i):
        if 0 <= j < len(centers):
            d = abs(nu_THz - centers[j])
            if best is None or d < best[0]:
                best = (d, j)
    d, j = best
    return j if d <= 0.5 * grid.granularity_THz + 1e-12 else None


def _simpson(y: np.ndarray, h: float) -> float:
    return float(h / 3.0 * np.dot(_SIMPSON_W, y))


def transmission_probability(photon: FlyingPhoton, channel: Channel, cfg: DwdmConfig) -> float:
    """Overlap of the photon's Gaussian spectrum with the filter, times insertion loss."""
    if not photon.alive:
        raise ValueError("cannot filter a lost photon")
    sigma = fwhm_to_sigma(photon.spectral_fwhm_GHz)
    mu = (photon.center_freq_THz - channel.center_freq_THz) * 1e3  # GHz from channel centre
    lo, hi = mu - _QUAD_HALF_WIDTH * sigma, mu + _QUAD_HALF_WIDTH * sigma
    brickwall = cfg.filter_model == FilterModel.BRICKWALL
    if brickwall:
        half = 0.5 * cfg.filter_passband_fraction * cfg.grid_granularity_GHz
        lo, hi = max(lo, -half), min(hi, half)
        if hi <= lo:
            return 0.0
    x = 0.5 * (hi + lo) + 0.5 * (hi - lo) * _UNIT_NODES
    exponent = -0.5 * ((x - mu) / sigma) ** 2
    if not brickwall:
        exponent -= 0.5 * (x / fwhm_to_sigma(cfg.effective_filter_bandwidth_GHz)) ** 2
    density = np.exp(exponent)
    t = _simpson(density, (hi - lo) / (_QUAD_POINTS - 1)) / (sigma * math.sqrt(2.0 * math.pi))
    return min(1.0, max(0.0, t)) * db_to_survival(cfg.insertion_loss_db)


GRID_COLUMNS = ("index", "band", "center_THz", "passband_low_THz", "passband_high_THz")


def write_grid_csv(grid: DwdmGrid, fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(GRID_COLUMNS)
    for ch in grid.channels:
        w.writerow([ch.index, ch.band_label, f"{ch.center_freq_THz:.4f}",
                    f"{ch.passband_low_THz:.4f}", f"{ch.passband_high_THz:.4f}"])
