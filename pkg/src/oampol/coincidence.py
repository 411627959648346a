"""Coincidence-histogram synthesis, normalization, and error propagation.

A tomography acquisition is one time-delay histogram per analyzer setting.
Each histogram carries a correlated peak riding on a flat background made
of accidental coincidences plus stray light and dark counts. The net peak
count, normalized by the accidental level, is proportional to the setting
probability with all detection efficiencies cancelled:

    G = sum_window(count - per_bin_level) / (per_bin_level - env_per_bin_level)

Probabilities follow by dividing each G by the sum over the four
computational-basis settings; uncertainties propagate the square root of
the net windowed count through the same normalization.

Monte Carlo error bars: each trial resamples the per-setting net counts as
N' = N + sqrt(max(N, 0)) * z with z standard normal (clamped at zero),
re-derives probabilities and sigmas, and re-runs the maximum-likelihood
fit. A record may instead request resampling of every raw bin
(``mc_resample="bins"``), which additionally re-noises the background
estimate. Sub-seeds are split deterministically from the caller's seed
with numpy's SeedSequence: stream tag 1 for histogram synthesis (entropy
[seed, 1, setting_index]) and tag 2 for Monte Carlo trials (entropy
[seed, 2, trial_index]).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptySignal,
    NumericalError,
    RegionTooSmall,
    ValidationError,
    ZeroDenominator,
)
from .quantum import (
    DensityMatrix,
    check_setting,
    chsh_max,
    fidelity,
    projection_probability,
)
from .tomography import (
    CANONICAL_SETTINGS,
    COMPUTATIONAL_SETTINGS,
    MLEConfig,
    ProbabilitySet,
    SigmaSet,
    mle_reconstruct,
)

MIN_TAIL_BINS = 10
DENOMINATOR_FLOOR = 1e-12
RESAMPLE_MODES = ("net", "bins")


@dataclass(frozen=True, eq=False)
class CoincidenceHistogram:
    """Time-delay histogram for one analyzer setting."""

    setting: str
    bin_width: float
    bins: np.ndarray
    acquisition_note: str = ""

    def __post_init__(self):
        check_setting(self.setting)
        if not (math.isfinite(self.bin_width) and self.bin_width > 0.0):
            raise ValidationError(f"bin_width must be positive, got {self.bin_width!r}")
        arr = np.asarray(self.bins)
        if arr.ndim != 1 or arr.size == 0:
            raise ValidationError("bins must be a non-empty 1-D sequence")
        if arr.dtype.kind == "f":
            if not np.allclose(arr, np.round(arr)):
                raise ValidationError("bin counts must be integers")
            arr = np.round(arr).astype(np.int64)
        elif arr.dtype.kind in "iu":
            arr = arr.astype(np.int64)
        else:
            raise ValidationError(f"bin counts must be numeric, got dtype {arr.dtype}")
        if np.any(arr < 0):
            raise ValidationError("bin counts must be nonnegative")
        arr.setflags(write=False)
        object.__setattr__(self, "bins", arr)

    @property
    def num_bins(self) -> int:
        return int(self.bins.size)


@dataclass(frozen=True)
class BackgroundEstimate:
    """Flat background levels per bin: total, and the uncorrelated part.

    ``per_bin_level`` is the full flat level under the peak (accidentals
    plus stray light); ``env_per_bin_level`` is the stray-light/dark part
    alone. The difference is the accidental level used as normalization
    denominator. Noise can push the estimated total below the stray level;
    that is reported by :func:`normalize_histogram` as ZeroDenominator
    rather than rejected here.
    """

    per_bin_level: float
    env_per_bin_level: float

    def __post_init__(self):
        if not (math.isfinite(self.per_bin_level) and self.per_bin_level >= 0.0):
            raise ValidationError(f"per_bin_level must be >= 0, got {self.per_bin_level!r}")
        if not (math.isfinite(self.env_per_bin_level) and self.env_per_bin_level >= 0.0):
            raise ValidationError(f"env_per_bin_level must be >= 0, got {self.env_per_bin_level!r}")


def _check_window(window, num_bins: int) -> tuple[int, int]:
    try:
        start, end = int(window[0]), int(window[1])
    except (TypeError, ValueError, IndexError):
        raise ValidationError(f"window must be a (start_bin, end_bin) pair, got {window!r}")
    if not 0 <= start < end <= num_bins:
        raise ValidationError(
            f"window [{start}, {end}) does not fit a histogram of {num_bins} bins")
    return start, end


def estimate_background(hist: CoincidenceHistogram, region) -> float:
    """Mean count per bin over a flat region (at least 10 bins)."""
    start, end = _check_window(region, hist.num_bins)
    if end - start < MIN_TAIL_BINS:
        raise RegionTooSmall(
            f"background region [{start}, {end}) has fewer than {MIN_TAIL_BINS} bins")
    return float(np.mean(hist.bins[start:end]))


def net_windowed_counts(hist: CoincidenceHistogram, background: BackgroundEstimate,
                        window) -> float:
    """Windowed counts minus the flat background; may be negative under noise."""
    start, end = _check_window(window, hist.num_bins)
    return float(np.sum(hist.bins[start:end])) - background.per_bin_level * (end - start)


def normalize_histogram(hist: CoincidenceHistogram, background: BackgroundEstimate,
                        window) -> float:
    """Net windowed counts divided by the accidental level.

    Both the numerator and the accidental denominator scale with detection
    efficiency and acquisition time, so the ratio is calibrated across
    settings. A negative numerator (pure noise) is returned as-is.
    """
    denom = background.per_bin_level - background.env_per_bin_level
    if denom <= DENOMINATOR_FLOOR:
        raise ZeroDenominator(
            f"per-bin level {background.per_bin_level!r} does not exceed the"
            f" stray-light level {background.env_per_bin_level!r}")
    return net_windowed_counts(hist, background, window) / denom


@dataclass(frozen=True, eq=False)
class TomographyRecord:
    """Sixteen setting histograms plus background estimates and the peak window."""

    histograms: dict[str, CoincidenceHistogram]
    background: dict[str, BackgroundEstimate]
    window: tuple[int, int]
    mc_resample: str = "net"

    def __post_init__(self):
        if set(self.histograms) != set(CANONICAL_SETTINGS):
            raise ValidationError("record must hold exactly the 16 canonical settings")
        if set(self.background) != set(CANONICAL_SETTINGS):
            raise ValidationError("record must hold one background estimate per setting")
        for s, h in self.histograms.items():
            if h.setting != s:
                raise ValidationError(f"histogram keyed {s!r} labels itself {h.setting!r}")
        min_bins = min(h.num_bins for h in self.histograms.values())
        win = _check_window(self.window, min_bins)
        if self.mc_resample not in RESAMPLE_MODES:
            raise ValidationError(
                f"mc_resample must be one of {RESAMPLE_MODES}, got {self.mc_resample!r}")
        object.__setattr__(self, "histograms",
                           {s: self.histograms[s] for s in CANONICAL_SETTINGS})
        object.__setattr__(self, "background",
                           {s: self.background[s] for s in CANONICAL_SETTINGS})
        object.__setattr__(self, "window", win)


def build_record(histograms, env_per_bin, window, *, mc_resample: str = "net",
                 tail=None) -> TomographyRecord:
    """Assemble a record, estimating per-setting backgrounds from a flat tail.

    ``env_per_bin`` is a scalar or a per-setting mapping of stray-light
    levels. The tail defaults to everything after the peak window.
    """
    hists = {h.setting: h for h in histograms} if not isinstance(histograms, dict) \
        else dict(histograms)
    if set(hists) != set(CANONICAL_SETTINGS):
        missing = set(CANONICAL_SETTINGS) - set(hists)
        raise ValidationError(f"record needs all 16 settings; missing {sorted(missing)}")
    min_bins = min(h.num_bins for h in hists.values())
    start, end = _check_window(window, min_bins)
    backgrounds = {}
    for s in CANONICAL_SETTINGS:
        h = hists[s]
        region = (end, h.num_bins) if tail is None else tail
        env = env_per_bin[s] if isinstance(env_per_bin, dict) else float(env_per_bin)
        backgrounds[s] = BackgroundEstimate(
            per_bin_level=estimate_background(h, region),
            env_per_bin_level=env)
    return TomographyRecord(histograms=hists, background=backgrounds,
                            window=(start, end), mc_resample=mc_resample)


def _probs_sigmas_from_net(net: np.ndarray, denom: np.ndarray):
    """Shared normalization: net counts and accidental denominators to (P, sigma)."""
    if np.any(denom <= DENOMINATOR_FLOOR):
        bad = CANONICAL_SETTINGS[int(np.argmin(denom))]
        raise ZeroDenominator(f"accidental level for setting {bad} is not positive")
    g = net / denom
    g_comp = np.clip(g[:4], 0.0, None)
    if float(g[:4].sum()) <= 0.0 or float(g_comp.sum()) <= 0.0:
        raise EmptySignal("computational-basis coincidences sum to nothing")
    total = float(g_comp.sum())
    p = np.empty(16)
    p[:4] = g_comp / total
    p[4:] = np.clip(g[4:] / total, 0.0, 1.0)
    sigma = np.sqrt(np.clip(net, 0.0, None)) / (denom * total)
    return p, sigma


def _record_net_and_denom(record: TomographyRecord):
    net = np.empty(16)
    denom = np.empty(16)
    for i, s in enumerate(CANONICAL_SETTINGS):
        bg = record.background[s]
        d = bg.per_bin_level - bg.env_per_bin_level
        if d <= DENOMINATOR_FLOOR:
            raise ZeroDenominator(
                f"per-bin level for setting {s} does not exceed its stray-light level")
        net[i] = net_windowed_counts(record.histograms[s], bg, record.window)
        denom[i] = d
    return net, denom


def probabilities_from_record(record: TomographyRecord):
    """Setting probabilities and their counting-statistics sigmas.

    Negative computational-basis net counts are clamped to zero before the
    normalization so the quadruple sums to one; superposition settings are
    clipped into [0, 1]. Sigmas are sqrt(net counts) pushed through the
    same normalization, floored at 1e-6.
    """
    net, denom = _record_net_and_denom(record)
    p, sigma = _probs_sigmas_from_net(net, denom)
    return ProbabilitySet.from_vector(p), SigmaSet.from_vector(sigma)


# --- synthesis ----------------------------------------------------------


@dataclass(frozen=True)
class SourceModel:
    """Count-rate model for one tomography acquisition.

    The correlated peak decays exponentially with time constant
    ``peak_decay_time`` (same unit as ``bin_width``); the integration
    window spans eight decay times from ``peak_start_bin``. Flat
    backgrounds: ``accidental_per_bin`` uncorrelated coincidences plus
    ``env_per_bin`` stray light and dark counts. Defaults give a few-percent
    error-bar acquisition with a long background tail for calibration.
    """

    total_correlated_pairs: float = 2e4
    peak_decay_time: float = 50.0
    peak_start_bin: int = 100
    accidental_per_bin: float = 50.0
    env_per_bin: float = 5.0
    num_bins: int = 3000
    bin_width: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.total_correlated_pairs) and self.total_correlated_pairs >= 0.0):
            raise ValidationError("total_correlated_pairs must be >= 0")
        if not (math.isfinite(self.peak_decay_time) and self.peak_decay_time > 0.0):
            raise ValidationError("peak_decay_time must be positive")
        if not (math.isfinite(self.bin_width) and self.bin_width > 0.0):
            raise ValidationError("bin_width must be positive")
        if self.accidental_per_bin < 0.0 or self.env_per_bin < 0.0:
            raise ValidationError("background levels must be >= 0")
        if self.num_bins < 1:
            raise ValidationError("num_bins must be >= 1")
        start, end = self.peak_window
        if not 0 <= start < end <= self.num_bins:
            raise ValidationError(
                f"peak window [{start}, {end}) does not fit {self.num_bins} bins")

    @property
    def peak_window(self) -> tuple[int, int]:
        span = max(1, int(round(8.0 * self.peak_decay_time / self.bin_width)))
        return int(self.peak_start_bin), int(self.peak_start_bin) + span


def _as_state(state) -> DensityMatrix:
    """Accept a DensityMatrix, a 4x4 matrix, or a two-qubit ket."""
    if isinstance(state, DensityMatrix):
        return state
    arr = np.asarray(state)
    if arr.shape == (4,):
        return DensityMatrix.from_ket(arr)
    return DensityMatrix(np.asarray(arr, dtype=complex))


def _signal_weights(model: SourceModel) -> np.ndarray:
    start, end = model.peak_window
    j = np.arange(end - start, dtype=float)
    w = np.exp(-j * model.bin_width / model.peak_decay_time)
    return w / w.sum()


def simulate_histogram(rho, setting: str, model: SourceModel,
                       seed: int) -> CoincidenceHistogram:
    """Poisson-sample one setting histogram from a state and a rate model.

    Expected counts: the flat backgrounds everywhere, plus an exponential
    peak whose windowed total is total_correlated_pairs times the setting
    probability. Deterministic for a fixed seed.
    """
    if not (isinstance(seed, (int, np.integer)) and seed >= 0):
        raise ValidationError(f"seed must be a nonnegative integer, got {seed!r}")
    prob = min(max(projection_probability(_as_state(rho), setting), 0.0), 1.0)
    means = np.full(model.num_bins, model.accidental_per_bin + model.env_per_bin)
    start, end = model.peak_window
    means[start:end] += model.total_correlated_pairs * prob * _signal_weights(model)
    rng = np.random.default_rng(int(seed))
    bins = rng.poisson(means)
    return CoincidenceHistogram(setting=setting, bin_width=model.bin_width, bins=bins,
                                acquisition_note=f"synthetic seed={int(seed)}")


def subseed(seed: int, stream: int, index: int) -> int:
    """Deterministic 64-bit sub-seed: SeedSequence hash of (seed, stream, index)."""
    ss = np.random.SeedSequence([int(seed), int(stream), int(index)])
    return int(ss.generate_state(1, np.uint64)[0])


def simulate_record(rho, model: SourceModel, seed: int, *,
                    mc_resample: str = "net") -> TomographyRecord:
    """Simulate all 16 setting histograms and assemble a record.

    Setting nu uses the independent sub-seed subseed(seed, 1, nu), so the
    full record is reproducible and individual histograms are independent.
    Backgrounds are estimated from the post-window tail, not taken from the
    model, keeping the analysis path identical to ingested data.
    """
    hists = {s: simulate_histogram(rho, s, model, subseed(seed, 1, i))
             for i, s in enumerate(CANONICAL_SETTINGS)}
    return build_record(hists, model.env_per_bin, model.peak_window,
                        mc_resample=mc_resample)


# --- Monte Carlo --------------------------------------------------------


@dataclass(frozen=True)
class UncertaintyReport:
    """Means and standard deviations over Monte Carlo re-reconstructions."""

    fidelity_mean: float
    fidelity_std: float
    chsh_mean: float
    chsh_std: float
    trials: int
    failures: int = 0
    note: str = ""

    def to_json_dict(self) -> dict:
        return {
            "fidelity_mean": self.fidelity_mean,
            "fidelity_std": self.fidelity_std,
            "chsh_mean": self.chsh_mean,
            "chsh_std": self.chsh_std,
            "trials": self.trials,
            "failures": self.failures,
            "note": self.note,
        }


def _resample_net(net, denom, rng):
    z = rng.standard_normal(16)
    jitter = np.sqrt(np.clip(net, 0.0, None)) * z
    return np.clip(net + jitter, 0.0, None), denom


def _resample_bins(record: TomographyRecord, rng):
    start, end = record.window
    net = np.empty(16)
    denom = np.empty(16)
    for i, s in enumerate(CANONICAL_SETTINGS):
        h = record.histograms[s]
        counts = h.bins.astype(float)
        counts = np.clip(counts + np.sqrt(counts) * rng.standard_normal(counts.size),
                         0.0, None)
        per_bin = float(np.mean(counts[end:])) if h.num_bins - end >= MIN_TAIL_BINS \
            else record.background[s].per_bin_level
        env = record.background[s].env_per_bin_level
        d = per_bin - env
        if d <= DENOMINATOR_FLOOR:
            raise ZeroDenominator(f"resampled background for {s} fell below stray level")
        net[i] = float(np.sum(counts[start:end])) - per_bin * (end - start)
        denom[i] = d
    return net, denom


def monte_carlo_uncertainty(record: TomographyRecord, target, trials: int, seed: int,
                            mle_config: MLEConfig | None = None) -> UncertaintyReport:
    """Fidelity and CHSH error bars by resampling counting noise.

    Trial t perturbs the record with the generator seeded by
    subseed(seed, 2, t), re-derives probabilities, re-runs the
    maximum-likelihood fit, and evaluates fidelity to ``target`` (a ket or
    DensityMatrix) and the CHSH maximum. Failed trials (for example a
    resampled background falling below the stray level) are excluded and
    counted. Means and standard deviations are over the surviving trials;
    a single trial reports zero spread.
    """
    if not (isinstance(trials, (int, np.integer)) and trials >= 1):
        raise ValidationError(f"trials must be a positive integer, got {trials!r}")
    if not (isinstance(seed, (int, np.integer)) and seed >= 0):
        raise ValidationError(f"seed must be a nonnegative integer, got {seed!r}")
    target_dm = _as_state(target)
    cfg = mle_config or MLEConfig()
    base_net, base_denom = _record_net_and_denom(record)

    fids = np.empty(trials)
    chshs = np.empty(trials)
    kept = 0
    failures = 0
    for t in range(int(trials)):
        rng = np.random.default_rng(subseed(seed, 2, t))
        try:
            if record.mc_resample == "bins":
                net, denom = _resample_bins(record, rng)
            else:
                net, denom = _resample_net(base_net, base_denom, rng)
            p, sigma = _probs_sigmas_from_net(net, denom)
            result = mle_reconstruct(p, sigma, cfg)
            fids[kept] = fidelity(result.rho, target_dm)
            chshs[kept] = chsh_max(result.rho)
            kept += 1
        except NumericalError:
            failures += 1
    if kept == 0:
        raise EmptySignal(f"all {trials} Monte Carlo trials failed")
    fids = fids[:kept]
    chshs = chshs[:kept]
    note = f"{failures} of {trials} trials failed" if failures else ""
    return UncertaintyReport(
        fidelity_mean=float(fids.mean()), fidelity_std=float(fids.std()),
        chsh_mean=float(chshs.mean()), chsh_std=float(chshs.std()),
        trials=int(trials), failures=failures, note=note)


# --- serialization ------------------------------------------------------


def record_to_json_obj(record: TomographyRecord) -> list:
    out = []
    for s in CANONICAL_SETTINGS:
        h = record.histograms[s]
        out.append({
            "setting": s,
            "bin_width_ns": h.bin_width,
            "bins": h.bins.tolist(),
            "env_per_bin": record.background[s].env_per_bin_level,
        })
    trailer = {"window": [record.window[0], record.window[1]]}
    if record.mc_resample != "net":
        trailer["mc_resample"] = record.mc_resample
    out.append(trailer)
    return out


def record_from_json_obj(obj) -> TomographyRecord:
    if not isinstance(obj, list) or len(obj) != 17:
        raise ValidationError(
            "record JSON must be an array of 16 histogram objects plus a window object")
    hists = {}
    envs = {}
    for entry in obj[:16]:
        if not isinstance(entry, dict):
            raise ValidationError("histogram entries must be JSON objects")
        for key in ("setting", "bin_width_ns", "bins", "env_per_bin"):
            if key not in entry:
                raise ValidationError(f"histogram entry is missing the {key!r} field")
        s = entry["setting"]
        hists[s] = CoincidenceHistogram(
            setting=s, bin_width=float(entry["bin_width_ns"]),
            bins=np.asarray(entry["bins"]),
            acquisition_note=str(entry.get("acquisition_note", "")))
        envs[s] = float(entry["env_per_bin"])
    trailer = obj[16]
    if not isinstance(trailer, dict) or "window" not in trailer:
        raise ValidationError('record JSON must end with an object holding "window"')
    return build_record(hists, envs, trailer["window"],
                        mc_resample=trailer.get("mc_resample", "net"))


def save_record(record: TomographyRecord, path) -> None:
    try:
        with open(path, "w", encoding="ascii") as fh:
            json.dump(record_to_json_obj(record), fh, indent=1)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write record to {path}: {exc}") from exc


def load_record(path) -> TomographyRecord:
    try:
        with open(path, encoding="ascii") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read record from {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}")
    return record_from_json_obj(obj)


def histogram_from_csv(path, setting: str, bin_width: float,
                       env_per_bin: float = 0.0) -> tuple[CoincidenceHistogram, float]:
    """Read one histogram from a two-column bin_index,count CSV file.

    A non-numeric first row is treated as a header. Bin indices must cover
    0..n-1 exactly (any order). Returns the histogram and the stray-light
    level to feed :func:`build_record`.
    """
    rows = []
    try:
        with open(path, newline="", encoding="ascii") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or all(not cell.strip() for cell in row):
                    continue
                if len(row) < 2:
                    raise ValidationError(f"{path}:{lineno}: expected bin_index,count")
                try:
                    rows.append((int(row[0]), int(row[1])))
                except ValueError:
                    if lineno == 1:
                        continue  # header line
                    raise ValidationError(
                        f"{path}:{lineno}: non-integer bin_index/count {row[:2]!r}")
    except OSError as exc:
        raise OSError(f"cannot read histogram from {path}: {exc}") from exc
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    rows.sort()
    indices = [i for i, _ in rows]
    if indices != list(range(len(rows))):
        raise ValidationError(f"{path}: bin indices must cover 0..{len(rows) - 1} exactly")
    bins = np.array([c for _, c in rows])
    hist = CoincidenceHistogram(setting=setting, bin_width=bin_width, bins=bins,
                                acquisition_note=f"csv {path}")
    return hist, float(env_per_bin)
