"""Monte Carlo photon time tags for the pulsed acquisition protocol.

One run is one atom cloud: a train of excitation pulses, photons emitted
into the fiber either toward the detector (original fluorescence) or toward
the mirror (detected later as cascaded fluorescence, thinned by the cascade
transmission), time-tagged on a coarse clock and truncated at a photon cap.
Includes folded histogramming, windowed peak counting, count-rate
estimation, and plain-text I/O for records and run configuration.
"""

from __future__ import annotations

import typing
from dataclasses import dataclass, fields

import numpy as np

# Cs excited-state lifetime; sets the exponential emission lag after a
# pulse and the decay tail of each histogram peak.
CS_LIFETIME_NS = 30.4

TIMETAG_HEADER = "run_id,arrival_ns"


class ParseError(ValueError):
    """Malformed config or time-tag file; message carries the line number."""


@dataclass(frozen=True)
class RunConfig:
    """Acquisition settings for one simulated dataset.

    Times are in ns. mean_photons_per_pulse is the expected number of
    detected original photons per pulse; ratio_model is the cascade
    transmission fraction applied to mirror-path photons;
    background_rate is in dark counts per microsecond. A positive
    heating_tau_pulses makes the per-pulse mean decay exponentially with
    that constant (in pulses), mimicking probe heating; zero disables it.
    """

    pulse_length: int = 150
    pulse_period: int = 600
    pulses_per_run: int = 2000
    runs: int = 120
    tick: int = 5
    delay: int = 310
    window: int = 180
    cap: int = 1500
    mean_photons_per_pulse: float = 1.0
    ratio_model: float = 0.9
    background_rate: float = 0.0
    heating_tau_pulses: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.tick <= 0 or self.pulse_period % self.tick != 0:
            raise ValueError(
                f"tick ({self.tick} ns) must divide the pulse period "
                f"({self.pulse_period} ns) evenly"
            )
        if not 0 < self.pulse_length < self.pulse_period:
            raise ValueError("pulse length must lie inside the pulse period")
        if self.window > self.delay:
            raise ValueError(
                f"analysis window ({self.window} ns) may not exceed the "
                f"cascade delay ({self.delay} ns); the peaks would overlap"
            )
        if self.pulses_per_run <= 0 or self.runs <= 0 or self.cap <= 0:
            raise ValueError("pulses_per_run, runs and cap must be positive")
        if self.delay < 0 or self.window <= 0:
            raise ValueError("delay must be >= 0 and window > 0")
        if self.mean_photons_per_pulse < 0:
            raise ValueError("mean photons per pulse must be >= 0")
        if not 0.0 <= self.ratio_model <= 1.0:
            raise ValueError(f"ratio_model must be in [0, 1], got {self.ratio_model}")
        if self.background_rate < 0 or self.heating_tau_pulses < 0:
            raise ValueError("background_rate and heating_tau_pulses must be >= 0")


@dataclass(frozen=True)
class TimeTagRecord:
    """One detected photon: run index and arrival in ns since run start,
    quantized to the acquisition tick."""

    run_id: int
    arrival: int


@dataclass(frozen=True)
class Histogram:
    """Arrival-time histogram folded modulo the pulse period."""

    bin_starts: np.ndarray
    counts: np.ndarray
    bin_ns: int
    period_ns: int


def simulate_run(cfg: RunConfig, run_id: int = 0) -> list[TimeTagRecord]:
    """Simulate the detected photons of one atom cloud.

    Per pulse, a Poisson number of photon pairs is emitted with the
    configured mean; each photon independently heads toward the detector or
    the mirror with probability 1/2. Emission times are uniform over the
    pulse plus an exponential lag of one lifetime, so the histogram peak
    rises across the pulse and decays after it. Mirror-path photons survive
    with probability ratio_model and arrive one round-trip delay later.
    Arrivals are floored to the tick; the record list is time-ordered and
    truncated at the cap. Deterministic for a fixed (cfg.seed, run_id).
    """
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=cfg.seed, spawn_key=(run_id,))
    )
    means = np.full(cfg.pulses_per_run, cfg.mean_photons_per_pulse)
    if cfg.heating_tau_pulses > 0:
        means *= np.exp(-np.arange(cfg.pulses_per_run) / cfg.heating_tau_pulses)
    pairs = rng.poisson(means)
    n = int(2 * pairs.sum())

    pulse_start = np.repeat(
        np.arange(cfg.pulses_per_run, dtype=np.int64) * cfg.pulse_period, 2 * pairs
    )
    emit = rng.uniform(0.0, cfg.pulse_length, n) + rng.exponential(CS_LIFETIME_NS, n)
    toward_detector = rng.random(n) < 0.5
    survives_cascade = rng.random(n) < cfg.ratio_model
    arrival = pulse_start + emit + np.where(toward_detector, 0, cfg.delay)
    detected = arrival[toward_detector | survives_cascade]

    total_ns = cfg.pulses_per_run * cfg.pulse_period
    n_bg = rng.poisson(cfg.background_rate * total_ns / 1000.0)
    if n_bg:
        detected = np.concatenate([detected, rng.uniform(0.0, total_ns, n_bg)])

    ticks = (detected // cfg.tick).astype(np.int64) * cfg.tick
    ticks.sort()
    ticks = ticks[: cfg.cap]
    return [TimeTagRecord(run_id, int(t)) for t in ticks]


def histogram(
    tags: list[TimeTagRecord], bin_ns: int, cfg: RunConfig
) -> Histogram:
    """Fold arrivals modulo the pulse period and bin them.

    The bin width must be a multiple of the tick. With enough photons the
    two peak maxima sit one cascade delay apart.
    """
    if bin_ns <= 0 or bin_ns % cfg.tick != 0:
        raise ValueError(
            f"bin ({bin_ns} ns) must be a positive multiple of the tick ({cfg.tick} ns)"
        )
    n_bins = -(-cfg.pulse_period // bin_ns)  # ceil
    counts = np.zeros(n_bins, dtype=np.int64)
    if tags:
        arrivals = np.fromiter((t.arrival for t in tags), dtype=np.int64, count=len(tags))
        folded = (arrivals % cfg.pulse_period) // bin_ns
        counts += np.bincount(folded, minlength=n_bins)
    starts = np.arange(n_bins, dtype=np.int64) * bin_ns
    return Histogram(starts, counts, bin_ns, cfg.pulse_period)


def peak_separation(hist: Histogram) -> float:
    """Spacing of the two folded peaks in ns.

    The emission profile saturates toward the pulse end, so the top of each
    peak is flat to a fraction of a percent and the raw argmax bin wanders
    with counting noise. The circular histogram is instead cut at the two
    count minima between the coarse peak positions (where the mass is
    negligible, so the cut placement barely matters) and each peak is
    located by the centroid of its segment. The two peaks share one shape,
    so the centroid spacing equals the cascade delay, stable to about a bin
    from 1e4 photons up. The forward/backward ambiguity is resolved by
    taking the heavier peak as the original one and measuring forward from
    it, since the cascaded peak is the attenuated copy arriving later.
    """
    counts = hist.counts.astype(float)
    if counts.sum() == 0:
        raise ValueError("peak separation is undefined for an empty histogram")
    n_bins = len(counts)
    period = hist.period_ns
    starts = hist.bin_starts

    first = int(np.argmax(counts))
    rel = (starts - starts[first] + period / 2) % period - period / 2
    away = np.abs(rel) > period / 4
    if not away.any() or counts[away].sum() == 0:
        raise ValueError("no second peak in the histogram")
    second = int(np.where(away)[0][int(np.argmax(counts[away]))])

    def valley_between(a: int, b: int) -> int:
        gap = (b - a) % n_bins
        if gap < 2:
            raise ValueError("peaks are not separated")
        idx = (a + 1 + np.arange(gap - 1)) % n_bins
        return int(idx[int(np.argmin(counts[idx]))])

    cut_ab = valley_between(first, second)
    cut_ba = valley_between(second, first)

    def centroid_and_mass(cut_from: int, cut_to: int) -> tuple[float, float]:
        length = (cut_to - cut_from) % n_bins
        idx = (cut_from + np.arange(length)) % n_bins
        mass = counts[idx].sum()
        if mass == 0:
            raise ValueError("empty peak region")
        pos = starts[cut_from] + np.arange(length) * hist.bin_ns
        center = float((pos * counts[idx]).sum() / mass) % period
        return center, float(mass)

    c1, m1 = centroid_and_mass(cut_ba, cut_ab)
    c2, m2 = centroid_and_mass(cut_ab, cut_ba)
    original, cascaded = (c1, c2) if m1 >= m2 else (c2, c1)
    return (cascaded - original) % period


def window_counts(hist: Histogram, cfg: RunConfig) -> tuple[int, int]:
    """Sum the histogram inside the two analysis windows.

    Windows are anchored at the leading edge of each peak, which for this
    emission model is the pulse start (original) and one cascade delay
    later (cascaded): [0, window) and [delay, delay + window). A bin counts
    toward a window when its start lies inside. Windows must be disjoint
    and must not wrap past the period.
    """
    if cfg.delay + cfg.window > cfg.pulse_period:
        raise ValueError(
            "cascaded window wraps past the pulse period; shrink the window"
        )
    starts = hist.bin_starts
    original = int(hist.counts[(starts >= 0) & (starts < cfg.window)].sum())
    cascaded = int(
        hist.counts[(starts >= cfg.delay) & (starts < cfg.delay + cfg.window)].sum()
    )
    return original, cascaded


def count_rate(tags: list[TimeTagRecord], cfg: RunConfig) -> float:
    """Detected photons (capped) divided by the arrival time of the last
    counted photon, in counts per microsecond."""
    if not tags:
        raise ValueError("count rate is undefined for an empty record list")
    arrivals = np.sort(np.fromiter((t.arrival for t in tags), dtype=np.int64))
    counted = arrivals[: cfg.cap]
    last_us = counted[-1] / 1000.0
    if last_us <= 0:
        raise ValueError("count rate is undefined when the last photon is at t = 0")
    return len(counted) / last_us


def write_timetags(path, tags: list[TimeTagRecord]) -> None:
    """Write records as CSV with header run_id,arrival_ns."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(TIMETAG_HEADER + "\n")
        for t in tags:
            f.write(f"{t.run_id},{t.arrival}\n")


def read_timetags(path) -> list[TimeTagRecord]:
    """Read records written by write_timetags."""
    tags = []
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip()
        if header != TIMETAG_HEADER:
            raise ParseError(f"{path}:1: expected header '{TIMETAG_HEADER}', got '{header}'")
        for lineno, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ParseError(f"{path}:{lineno}: expected 2 fields, got {len(parts)}")
            try:
                tags.append(TimeTagRecord(int(parts[0]), int(parts[1])))
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
    return tags


def _field_types() -> dict[str, type]:
    hints = typing.get_type_hints(RunConfig)
    return {f.name: hints[f.name] for f in fields(RunConfig)}


def read_config(path) -> RunConfig:
    """Read a key = value config file mirroring RunConfig field names."""
    types = _field_types()
    values: dict[str, object] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"{path}:{lineno}: expected 'key = value', got '{line}'")
            key, _, value = (s.strip() for s in line.partition("="))
            if key not in types:
                raise ParseError(f"{path}:{lineno}: unknown config key '{key}'")
            try:
                values[key] = types[key](value)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: bad value for '{key}': {exc}") from exc
    try:
        return RunConfig(**values)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def write_config(path, cfg: RunConfig) -> None:
    """Write a config file readable by read_config."""
    with open(path, "w", encoding="utf-8") as f:
        for fld in fields(RunConfig):
            f.write(f"{fld.name} = {getattr(cfg, fld.name)}\n")
