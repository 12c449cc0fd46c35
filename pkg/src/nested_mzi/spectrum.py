"""Power spectra of the detector amplitude.

The optical carrier (~1e15 rad/s) is factored out, so the numeric record is
the complex baseband amplitude on the detector mode; mirror vibrations show up
as phase-modulation sidebands at ±f around 0 Hz.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.signal import windows
from scipy.special import j1

from .network import PHASE_COEFFICIENTS, ConfigurationError, InterferometerConfig, Network, propagate

DETECTION_THRESHOLD_DB = 20.0
FLOOR_GUARD_BINS = 3
# relative power of white float64 roundoff; floors never go below it, so a
# noiseless record cannot "detect" lines in its own rounding errors
ROUNDOFF_REL = 1e-24


class RangeError(ValueError):
    """Modulation too deep for the first-order sideband picture."""


@dataclass(frozen=True)
class TimeSeries:
    samples: np.ndarray
    rate: float

    @property
    def n(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return self.n / self.rate

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n) / self.rate


@dataclass(frozen=True)
class Spectrum:
    """Two-sided power spectral density on an ascending frequency grid.

    ``power`` is normalised so that ``sum(power) * df`` equals the mean
    square of the record.
    """

    freqs: np.ndarray
    power: np.ndarray
    floor: float

    @property
    def df(self) -> float:
        return float(self.freqs[1] - self.freqs[0])

    def nearest_bin(self, f: float) -> int:
        return int(np.argmin(np.abs(self.freqs - f)))

    def line_power(self, f: float) -> float:
        """Power of a line at ``f``: the Hann main lobe (nearest bin ±1) integrated."""
        k = self.nearest_bin(f)
        lo, hi = max(k - 1, 0), min(k + 2, len(self.power))
        return float(np.sum(self.power[lo:hi]) * self.df)

    def total_power(self) -> float:
        return float(np.sum(self.power) * self.df)

    def scaled(self, c: float) -> "Spectrum":
        return Spectrum(self.freqs, self.power * c, self.floor * c)


def check_sampling(freqs: Sequence[float], duration: float, rate: float) -> None:
    """Raise if the record would alias the fastest mirror or blur neighbouring ones."""
    freqs = sorted(freqs)
    if rate < 20 * freqs[-1]:
        raise ConfigurationError(
            f"sample rate {rate} Hz is below 20x the highest mirror frequency ({freqs[-1]} Hz); "
            f"use a rate of at least {20 * freqs[-1]:g} Hz"
        )
    gaps = np.diff(freqs)
    if np.any(gaps <= 0):
        raise ConfigurationError("mirror frequencies must be pairwise distinct")
    need = 10 / float(np.min(gaps))
    if duration < need:
        raise ConfigurationError(
            f"duration {duration} s cannot resolve a {np.min(gaps):g} Hz frequency gap; "
            f"increase duration to at least {need:g} s"
        )


def sample_detector(net: Network, alpha: complex = 1.0, duration: float = 64.0, rate: float = 1024.0) -> TimeSeries:
    """Sample the detector amplitude on ``t_k = k / rate``."""
    freqs = list(net.config.freqs.values())
    check_sampling(freqs, duration, rate)
    n = int(round(duration * rate))
    t = np.arange(n) / rate
    samples = propagate(net, alpha, t)[net.detector_mode]
    return TimeSeries(np.asarray(samples, dtype=complex), float(rate))


def _floor(freqs, power, exclude, guard):
    df = freqs[1] - freqs[0]
    numeric = float(np.mean(power)) * ROUNDOFF_REL
    mask = np.ones(len(power), dtype=bool)
    for f in exclude:
        k = int(np.argmin(np.abs(freqs - f)))
        if abs(freqs[k] - f) <= df:
            mask[max(k - guard, 0): k + guard + 1] = False
    vals = power[mask] if mask.any() else power
    return float(max(np.median(vals), numeric, np.finfo(float).tiny))


def psd(ts: TimeSeries, window: str = "hann", exclude_freqs: Sequence[float] = ()) -> Spectrum:
    """Hann-windowed single periodogram of a complex record.

    The floor is the median bin, skipping a guard band around 0 Hz and around
    each of ``exclude_freqs``, but never below the float64 roundoff level.
    """
    if window != "hann":
        raise ValueError(f"unsupported window {window!r}")
    x = np.asarray(ts.samples, dtype=complex)
    n = len(x)
    if n < 1024:
        raise ConfigurationError(f"need at least 1024 samples, got {n}")
    w = windows.hann(n, sym=False)
    X = np.fft.fftshift(np.fft.fft(w * x))
    freqs = np.fft.fftshift(np.fft.fftfreq(n, d=1 / ts.rate))
    df = ts.rate / n
    raw = np.abs(X) ** 2
    mean_sq = float(np.mean(np.abs(x) ** 2))
    total = float(np.sum(raw)) * df
    power = raw * (mean_sq / total) if total > 0 else raw
    excl = [0.0] + [s * f for f in exclude_freqs for s in (1, -1)]
    return Spectrum(freqs, power, _floor(freqs, power, excl, FLOOR_GUARD_BINS))


# ---------------------------------------------------------------- line lists


@dataclass(frozen=True)
class Line:
    freq: float
    weight: complex
    label: str = ""


@dataclass(frozen=True)
class LineList:
    lines: tuple[Line, ...]

    def __len__(self):
        return len(self.lines)

    def __iter__(self):
        return iter(self.lines)

    def weight_at(self, freq: float, tol: float = 1e-9) -> complex:
        """Summed weight of every line at ``freq``."""
        return sum((ln.weight for ln in self.lines if abs(ln.freq - freq) <= tol), 0.0)

    def to_dict(self) -> list[dict]:
        out = []
        for ln in self.lines:
            w = complex(ln.weight)
            out.append({"label": ln.label, "freq": ln.freq, "weight_re": w.real, "weight_im": w.imag})
        return out


def analytic_lines(setup: int, config: InterferometerConfig, alpha: complex = 1.0) -> LineList:
    """First-order sidebands of the detector amplitude.

    A phase term ``c (Ψ_i - Φ_i)`` with depth ``m = c (ψ0 - φ0)`` puts
    ``|α_det|² J1(m)²`` at each of ±f_i.
    """
    coeffs = PHASE_COEFFICIENTS[setup]
    amp2 = abs(alpha) ** 2 * (1.0 if setup == 1 else 1 / 9)
    lines = []
    for label, c in coeffs.items():
        mirror = config.mirror(label)
        if abs(mirror.depth) > 0.1:
            raise RangeError(f"mirror {label}: |psi0 - phi0| = {abs(mirror.depth):g} exceeds 0.1 rad")
        w = amp2 * j1(c * mirror.depth) ** 2
        lines.append(Line(mirror.freq_hz, w, label))
        lines.append(Line(-mirror.freq_hz, w, label))
    return LineList(tuple(lines))


def quantum_psd_lines(alpha: complex, omega0: float, x_zpf: float) -> LineList:
    """Delta-line weights of the position-quadrature spectrum of a coherent state.

    Four terms: α² and (1 + |α|²) at +ω₀, α*² and |α|² at -ω₀, each scaled by
    ``2π x_zpf²``.  Lines of zero weight are dropped.
    """
    if x_zpf <= 0:
        raise ValueError("x_zpf must be positive")
    a = complex(alpha)
    k = 2 * np.pi * x_zpf**2
    terms = [
        (omega0, a**2, "alpha^2"),
        (-omega0, a.conjugate() ** 2, "conj(alpha)^2"),
        (-omega0, abs(a) ** 2 + 0j, "|alpha|^2"),
        (omega0, 1 + abs(a) ** 2 + 0j, "1+|alpha|^2"),
    ]
    return LineList(tuple(Line(f, k * w, lab) for f, w, lab in terms if w != 0))


# ---------------------------------------------------------------- peaks


@dataclass(frozen=True)
class PeakRow:
    label: str
    freq_hz: float
    peak_power: float
    prominence_db: float
    present: bool

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "freq_hz": self.freq_hz,
            "peak_power": self.peak_power,
            "prominence_db": self.prominence_db,
            "present": self.present,
        }


@dataclass(frozen=True)
class PeakTable:
    rows: tuple[PeakRow, ...]
    floor: float
    threshold_db: float = DETECTION_THRESHOLD_DB

    def __getitem__(self, label: str) -> PeakRow:
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)

    @property
    def present(self) -> frozenset[str]:
        return frozenset(r.label for r in self.rows if r.present)


def peak_report(spec: Spectrum, mirror_freqs: Mapping[str, float], threshold_db: float = DETECTION_THRESHOLD_DB) -> PeakTable:
    """Nearest-bin power at each mirror frequency against the median floor."""
    fs = sorted(mirror_freqs.values())
    if len(fs) > 1 and spec.df > np.min(np.diff(fs)) / 2:
        raise ConfigurationError("spectrum resolution is coarser than half the smallest mirror-frequency gap")
    excl = [0.0] + [s * f for f in fs for s in (1, -1)]
    floor = _floor(spec.freqs, spec.power, excl, FLOOR_GUARD_BINS)
    rows = []
    for label, f in mirror_freqs.items():
        p = float(spec.power[spec.nearest_bin(f)])
        prom = 10 * np.log10(max(p, np.finfo(float).tiny) / floor)
        rows.append(PeakRow(label, float(f), p, float(prom), bool(prom >= threshold_db)))
    return PeakTable(tuple(rows), floor, threshold_db)


# ---------------------------------------------------------------- classical mixtures


@dataclass(frozen=True)
class PointMass:
    alpha: complex = 1.0

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return np.full(n, complex(self.alpha))


@dataclass(frozen=True)
class Thermal:
    """Gaussian P-function with mean photon number ``nbar``."""

    nbar: float = 1.0

    def __post_init__(self):
        if not self.nbar > 0:
            raise ValueError("nbar must be positive")

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        sd = np.sqrt(self.nbar / 2)
        return rng.normal(0, sd, n) + 1j * rng.normal(0, sd, n)


@dataclass(frozen=True)
class DiscreteMixture:
    alphas: tuple[complex, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(w) != len(self.alphas) or len(w) == 0:
            raise ValueError("need one weight per amplitude")
        if np.any(w < 0):
            raise ValueError("mixture weights must be non-negative")
        if abs(w.sum() - 1) > 1e-12:
            raise ValueError(f"mixture weights must sum to 1, got {w.sum()}")

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        idx = rng.choice(len(self.alphas), size=n, p=np.asarray(self.weights, dtype=float))
        return np.asarray(self.alphas, dtype=complex)[idx]


Ensemble = PointMass | Thermal | DiscreteMixture


@dataclass(frozen=True)
class MixtureSpectrum:
    spectrum: Spectrum
    draws: np.ndarray = field(repr=False)

    @property
    def mean_photons(self) -> float:
        return float(np.mean(np.abs(self.draws) ** 2))


def classical_mixture_spectrum(
    ensemble: Ensemble,
    net: Network,
    n_draws: int = 1000,
    seed: int = 0,
    duration: float = 64.0,
    rate: float = 1024.0,
) -> MixtureSpectrum:
    """Average the detector spectrum over coherent amplitudes drawn from a P-function.

    The network is linear in the input amplitude, so each draw's spectrum is
    ``|α_k|²`` times the unit-amplitude spectrum and the average reduces to one
    periodogram scaled by the mean photon number of the draws.
    """
    rng = np.random.default_rng(seed)
    draws = ensemble.draw(n_draws, rng)
    unit = psd(sample_detector(net, 1.0, duration, rate), exclude_freqs=list(net.config.freqs.values()))
    return MixtureSpectrum(unit.scaled(float(np.mean(np.abs(draws) ** 2))), draws)

