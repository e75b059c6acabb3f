"""Trial pipeline, seeded Monte Carlo campaigns and parameter sweeps."""

from __future__ import annotations

import math
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from . import quantum_core as qc
from .config import SimConfig, apply_mode, canonical_key, validate, with_overrides
from .detection_heralding import DetectorType, detect, herald
from .feed_forward import apply_corrections, delay_and_store, fiber_depolarization, fiber_transmit
from .interferometer import (
    SIGNAL_LABELS,
    Arm,
    apply_bs_state_update,
    beamsplit,
    bell_kind_for_routing,
    pbs_route,
    resolve_polarization,
)
from .photon_source import Polarization, emit, separate
from .spectral_filtering import assign_channel, build_grid, transmission_probability

THREADS_ENV = "ZALM_SIM_THREADS"


class FailureStage(str, Enum):
    SOURCE = "SOURCE"
    BS_LOSS = "BS_LOSS"
    FILTER = "FILTER"
    DETECT = "DETECT"
    HERALD = "HERALD"
    FIBER = "FIBER"
    NONE = "NONE"


@dataclass(frozen=True)
class TrialOutcome:
    heralded: bool = False
    bell: Optional[qc.BellKind] = None
    delivered: bool = False
    fidelity: Optional[float] = None
    channel_index: Optional[int] = None
    failure_stage: FailureStage = FailureStage.NONE
    herald_time_ps: Optional[float] = None
    trial_id: int = -1


@dataclass(frozen=True)
class Metrics:
    n_trials: int
    herald_rate: float
    ebits_per_use: float
    avg_fidelity: float
    fidelity_stderr: float
    bell_counts: dict = field(default_factory=dict)
    failure_counts: dict = field(default_factory=dict)

    @property
    def n_delivered(self) -> int:
        return round(self.ebits_per_use * self.n_trials)

    @property
    def ebits_stderr(self) -> float:
        p = self.ebits_per_use
        return math.sqrt(p * (1 - p) / self.n_trials)


def trial_rng(seed: int, trial_id: int) -> np.random.Generator:
    """Counter-based stream for one trial: key = campaign seed, counter = trial id."""
    return np.random.Generator(np.random.Philox(key=seed, counter=[trial_id, 0, 0, 0]))


class TrialStreams:
    """Reuses one Philox generator, rewinding it to each trial's counter.

    ``streams.rng(t)`` yields the same draws as ``trial_rng(seed, t)`` at a
    fraction of the construction cost. The returned generator is shared.
    """

    def __init__(self, seed: int):
        self._bitgen = np.random.Philox(key=seed)
        self._key = self._bitgen.state["state"]["key"]
        self._gen = np.random.Generator(self._bitgen)

    def rng(self, trial_id: int) -> np.random.Generator:
        self._bitgen.state = {
            "bit_generator": "Philox",
            "state": {"counter": np.array([trial_id, 0, 0, 0], dtype=np.uint64), "key": self._key},
            "buffer": np.zeros(4, dtype=np.uint64),
            "buffer_pos": 4,
            "has_uint32": 0,
            "uinteger": 0,
        }
        return self._gen


def _true_arm(photon) -> Arm:
    return Arm.H if photon.nominal_pol is Polarization.H else Arm.V


def _fail(stage: FailureStage, **kw) -> TrialOutcome:
    return TrialOutcome(failure_stage=stage, **kw)


def run_trial(config: SimConfig, rng) -> TrialOutcome:
    """One use of the source: both SPDCs fire, idlers are heralded, signals are delivered."""
    cfg = apply_mode(config)
    return _trial(cfg, build_grid(cfg.dwdm), rng)


def _trial(cfg: SimConfig, grid, rng) -> TrialOutcome:
    # (i) sources and signal/idler separation
    state = None
    signals, idlers = [], []
    for src in (0, 1):
        pair, state = emit(cfg.spdc, src, state, rng)
        if pair is None:
            return _fail(FailureStage.SOURCE)
        sig, idl = separate(pair, cfg.spdc, rng)
        signals.append(sig)
        idlers.append(idl)
    if not all(p.alive for p in signals + idlers):
        return _fail(FailureStage.SOURCE)

    # (iii) beam splitter and (iv) polarizing beam splitters
    idlers = [resolve_polarization(p, rng) for p in idlers]
    bs = beamsplit(idlers[0], idlers[1], cfg.bs, rng)
    if not all(p.alive for p in bs.photons):
        return _fail(FailureStage.BS_LOSS)
    routed = []
    for p in bs.photons:
        arm, p = pbs_route(p, cfg.pbs, rng)
        if not p.alive:
            return _fail(FailureStage.BS_LOSS)
        routed.append((bs.port_of[p.photon_id], arm, p))

    # (v) DWDM filters
    filtered = []
    for port, arm, p in routed:
        ch = assign_channel(grid, p.center_freq_THz)
        if ch is None or rng.random() >= transmission_probability(p, grid[ch], cfg.dwdm):
            return _fail(FailureStage.FILTER)
        filtered.append((port, arm, ch, p))

    # (vi) detectors, (vii) heralding
    groups: dict = {}
    for port, arm, ch, p in filtered:
        groups.setdefault((port, arm, ch), []).append(p)
    clicks = []
    pnr = cfg.detector.detector_type is DetectorType.PNR
    for (port, arm, ch), photons in sorted(groups.items()):
        click = detect(photons, port, arm, ch, cfg.detector, rng)
        if click is None or (pnr and click.photon_count < len(photons)):
            return _fail(FailureStage.DETECT)
        clicks.append(click)
    result = herald(clicks, cfg.detector)
    if result is None:
        return _fail(FailureStage.HERALD)

    # signal pair state: the Bell state physically selected by the routing
    (port_a, _, pa), (port_b, _, pb) = routed
    realised = bell_kind_for_routing(port_a, _true_arm(pa), port_b, _true_arm(pb))
    state = apply_bs_state_update(state, bs, realised, [s.qubit_id for s in signals])

    # (viii) delay line and corrections, then measurement dephasing at the receivers
    state = delay_and_store(state, SIGNAL_LABELS, cfg.noise.delay_line_ns * 1e3, cfg.noise)
    state = apply_corrections(state, result.corrections, cfg.noise)
    for q in SIGNAL_LABELS:
        state = qc.dephase(state, q, cfg.noise.measurement_dephase_prob)

    heralded = dict(heralded=True, bell=result.bell, channel_index=result.channel_index,
                    herald_time_ps=result.herald_time_ps)
    for s in signals:
        if not fiber_transmit(s, cfg.fiber, rng).alive:
            return _fail(FailureStage.FIBER, **heralded)
    p_fiber = fiber_depolarization(cfg.fiber)
    for q in SIGNAL_LABELS:
        state = qc.depolarize(state, q, p_fiber)
    return TrialOutcome(delivered=True, fidelity=qc.fidelity(state, qc.BellKind.PSI_MINUS), **heralded)


def _run_range(config: SimConfig, seed: int, start: int, stop: int) -> list[TrialOutcome]:
    cfg = apply_mode(config)
    grid = build_grid(cfg.dwdm)
    streams = TrialStreams(seed)
    out = []
    for t in range(start, stop):
        o = _trial(cfg, grid, streams.rng(t))
        out.append(TrialOutcome(**{**o.__dict__, "trial_id": t}))
    return out


def resolve_workers(workers: Optional[int] = None) -> int:
    """Explicit count, else ``ZALM_SIM_THREADS`` (0 = one per CPU), else 1."""
    if workers is None:
        workers = int(os.environ.get(THREADS_ENV, "1") or 1)
    if workers <= 0:
        workers = os.cpu_count() or 1
    return workers


def run_trials(
    config: SimConfig, n_trials: int, seed: int, workers: Optional[int] = None
) -> list[TrialOutcome]:
    """Outcomes for trials 0..n_trials-1, in trial order, independent of ``workers``."""
    if n_trials < 1:
        raise ValueError(f"n_trials must be at least 1, got {n_trials}")
    cfg = apply_mode(validate(config))
    workers = min(resolve_workers(workers), n_trials)
    if workers == 1:
        return _run_range(cfg, seed, 0, n_trials)
    bounds = np.linspace(0, n_trials, workers + 1).astype(int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_run_range, [cfg] * workers, [seed] * workers, bounds[:-1], bounds[1:])
        return [o for part in parts for o in part]


def summarize(outcomes: Sequence[TrialOutcome]) -> Metrics:
    n = len(outcomes)
    if n == 0:
        raise ValueError("no outcomes to summarize")
    fids = [o.fidelity for o in outcomes if o.delivered]
    n_herald = sum(o.heralded for o in outcomes)
    if fids:
        mean = math.fsum(fids) / len(fids)
        var = math.fsum((f - mean) ** 2 for f in fids) / (len(fids) - 1) if len(fids) > 1 else 0.0
        stderr = math.sqrt(var / len(fids))
    else:
        mean = stderr = float("nan")
    bells = Counter(o.bell.value for o in outcomes if o.heralded)
    stages = Counter(o.failure_stage.value for o in outcomes)
    return Metrics(
        n_trials=n,
        herald_rate=n_herald / n,
        ebits_per_use=len(fids) / n,
        avg_fidelity=mean,
        fidelity_stderr=stderr,
        bell_counts={k.value: bells.get(k.value, 0) for k in qc.BellKind},
        failure_counts={k.value: stages.get(k.value, 0) for k in FailureStage},
    )


def run_campaign(
    config: SimConfig,
    n_trials: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> Metrics:
    n_trials = config.n_trials if n_trials is None else n_trials
    seed = config.seed if seed is None else seed
    return summarize(run_trials(config, n_trials, seed, workers))


def sweep(
    config: SimConfig,
    parameter_path: str,
    values: Iterable[Any],
    workers: Optional[int] = None,
) -> list[tuple[Any, Metrics]]:
    """One campaign per value, all sharing the base seed."""
    key = canonical_key(parameter_path)
    rows = []
    for v in values:
        point = with_overrides(config, {key: v})
        rows.append((v, run_campaign(point, workers=workers)))
    return rows
