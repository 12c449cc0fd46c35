"""Nested Mach-Zehnder topology and quasi-static propagation of coherent amplitudes.

The outer interferometer runs BS1 -> {mirror C | inner interferometer} -> BS4,
the inner one BS2 -> {mirror A | mirror B} -> BS3, with mirror E before BS2
and mirror F after BS3.  All elements are evaluated at the same frozen time t;
light transit is nanoseconds against millisecond mirror periods.

Two propagation conventions are offered for the second setup:

``paper-literal``
    Recombining splitters are phase-locked: each input is read as the image
    of a single source behind the splitter, the two source estimates are
    merged by their geometric mean, and all light leaves the locked port.
    The dark-port phase condition is then substituted into the detector
    amplitude.  This reproduces the closed-form states exactly.
``physical``
    Plain linear superposition everywhere.  The dark port toward mirror F
    leaks, with leaked power second order in the mirror modulation.
"""
from __future__ import annotations

import enum
import graphlib
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Union

import numpy as np

from .optics import (
    MIRROR_LABELS,
    BSMatrix,
    CoherentAmp,
    EulerAngles,
    MirrorSpec,
    bs_matrix,
    mirror_matrix,
)

DEFAULT_FREQS = {"A": 31.0, "B": 37.0, "C": 41.0, "E": 43.25, "F": 47.75}
DEFAULT_PSI0 = 0.02
DEFAULT_PHI0 = 0.0

# intensity transmittance of BS1..BS4
TRANSMITTANCE = (1 / 3, 1 / 2, 1 / 2, 1 / 3)

TERMINAL_MODES = frozenset("abcdefgh")
VACUUM_MODES = frozenset({"L1", "T2", "L3", "T4", "L5", "T7", "L8"})


class NetworkError(ValueError):
    """Malformed topology: dangling or doubly-driven ports, cycles."""


class ConfigurationError(ValueError):
    """Inconsistent simulation parameters."""


class Mode(str, enum.Enum):
    PAPER_LITERAL = "paper-literal"
    PHYSICAL = "physical"


def wrap_phase(x):
    """Wrap to (-π, π]."""
    y = np.mod(np.asarray(x, dtype=float) + np.pi, 2 * np.pi) - np.pi
    y = np.where(y == -np.pi, np.pi, y)
    return y if y.ndim else float(y)


@dataclass(frozen=True)
class InterferometerConfig:
    """Mirror table plus the constant Euler phases of BS1..BS4.

    ``lam`` is the extra phase on the inner arm in the second setup; ``None``
    selects the value that darkens the port toward mirror F at zero
    modulation for the chosen convention.
    """

    mirrors: tuple[MirrorSpec, ...] = field(
        default_factory=lambda: tuple(
            MirrorSpec(k, f, DEFAULT_PSI0, DEFAULT_PHI0) for k, f in DEFAULT_FREQS.items()
        )
    )
    phis: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    psis: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    lam: float | None = None

    def __post_init__(self):
        labels = sorted(m.label for m in self.mirrors)
        if labels != sorted(MIRROR_LABELS):
            raise ConfigurationError(f"need exactly one mirror per label {MIRROR_LABELS}, got {labels}")
        if len(self.phis) != 4 or len(self.psis) != 4:
            raise ConfigurationError("phis and psis need one entry per beam splitter")
        object.__setattr__(self, "phis", tuple(float(x) for x in self.phis))
        object.__setattr__(self, "psis", tuple(float(x) for x in self.psis))
        vals = list(self.phis) + list(self.psis) + ([self.lam] if self.lam is not None else [])
        if not np.all(np.isfinite(vals)):
            raise ConfigurationError("constant phases must be finite")

    @classmethod
    def default(cls, psi0=DEFAULT_PSI0, phi0=DEFAULT_PHI0, freqs=None, **kw) -> "InterferometerConfig":
        freqs = {**DEFAULT_FREQS, **(freqs or {})}
        mirrors = tuple(MirrorSpec(k, float(freqs[k]), psi0, phi0) for k in MIRROR_LABELS)
        return cls(mirrors=mirrors, **kw)

    def mirror(self, label: str) -> MirrorSpec:
        for m in self.mirrors:
            if m.label == label:
                return m
        raise KeyError(label)

    @property
    def freqs(self) -> dict[str, float]:
        return {m.label: m.freq_hz for m in self.mirrors}

    @property
    def uniform_amplitudes(self) -> bool:
        return len({(m.psi0, m.phi0) for m in self.mirrors}) == 1

    @property
    def degenerate(self) -> bool:
        """No mirror imprints any modulation."""
        return all(m.degenerate for m in self.mirrors)

    def splitter(self, i: int) -> EulerAngles:
        """Euler angles of BS``i`` (1-based)."""
        return EulerAngles.from_transmittance(TRANSMITTANCE[i - 1], self.phis[i - 1], self.psis[i - 1])

    def lambda_for(self, mode: Mode | str = Mode.PAPER_LITERAL) -> float:
        if self.lam is not None:
            return self.lam
        s = self.psis[1] + self.psis[2]
        if Mode(mode) is Mode.PHYSICAL:
            return -np.pi - s
        return np.pi + s

    def with_mirror(self, label: str, **changes) -> "InterferometerConfig":
        mirrors = tuple(replace(m, **changes) if m.label == label else m for m in self.mirrors)
        return replace(self, mirrors=mirrors)

    def with_modulation(self, psi0: float, phi0: float) -> "InterferometerConfig":
        return replace(self, mirrors=tuple(replace(m, psi0=psi0, phi0=phi0) for m in self.mirrors))


# ---------------------------------------------------------------- elements


@dataclass(frozen=True)
class BeamSplitter:
    angles: EulerAngles
    # recombining splitters act with the adjoint of their Euler matrix
    adjoint: bool = False
    # exit port ("T" or "L") of a phase-locked recombiner
    lock: str | None = None

    def __post_init__(self):
        if self.lock not in (None, "T", "L"):
            raise NetworkError(f"lock port must be 'T' or 'L', got {self.lock!r}")
        if self.lock is not None and not 0 < self.angles.theta < np.pi:
            raise NetworkError("a locked recombiner needs both ports partially transmitting")

    def matrix(self, t=0.0) -> BSMatrix:
        B = bs_matrix(self.angles)
        return B.adjoint() if self.adjoint else B


@dataclass(frozen=True)
class Mirror:
    spec: MirrorSpec

    def matrix(self, t=0.0) -> BSMatrix:
        return mirror_matrix(self.spec, t)


@dataclass(frozen=True)
class PhaseShift:
    """Constant phase ``e^{i phase}`` on the top port; the other port is idle."""

    phase: float

    def matrix(self, t=0.0) -> BSMatrix:
        return BSMatrix(np.exp(1j * self.phase), 0j, 0j, 1 + 0j)


@dataclass(frozen=True)
class PhaseLock:
    """Carries the dark-port phase condition onto the detector amplitude.

    Multiplies the top port by ``exp(-i r(t))`` where ``r`` is the residual of
    the inner-arm phase relation; this is the algebraic substitution that the
    paper-literal convention performs.
    """

    config: InterferometerConfig

    def matrix(self, t=0.0) -> BSMatrix:
        r = phase_relation_residual(self.config, t, wrap=False)
        one = np.ones_like(np.asarray(r, dtype=complex))
        return BSMatrix(np.exp(-1j * r), 0 * one, 0 * one, one)


ElementKind = Union[BeamSplitter, Mirror, PhaseShift, PhaseLock]


@dataclass(frozen=True)
class Element:
    id: str
    kind: ElementKind
    inputs: tuple[str | None, str | None]
    outputs: tuple[str | None, str | None]


@dataclass(frozen=True)
class ModeAmplitudes:
    """Snapshot of every mode amplitude at one time (or a grid of times)."""

    amplitudes: dict[str, np.ndarray]
    time: np.ndarray
    lock_error: dict[str, np.ndarray] = field(default_factory=dict)

    def __getitem__(self, mode: str):
        return self.amplitudes[mode]

    def terminal_power(self, terminals=TERMINAL_MODES):
        return sum(np.abs(self.amplitudes[m]) ** 2 for m in terminals)


@dataclass(frozen=True)
class Network:
    elements: tuple[Element, ...]
    source_mode: str = "T1"
    detector_mode: str = "h"
    terminal_modes: frozenset[str] = TERMINAL_MODES
    vacuum_modes: frozenset[str] = VACUUM_MODES
    name: str = ""
    setup: int | None = None
    mode: Mode | None = None
    config: InterferometerConfig | None = None

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "order", self._toposort())

    def _toposort(self) -> tuple[Element, ...]:
        producers: dict[str, str] = {}
        consumers: dict[str, str] = {}
        ids = [e.id for e in self.elements]
        if len(set(ids)) != len(ids):
            raise NetworkError("duplicate element ids")
        for e in self.elements:
            for m in e.outputs:
                if m is None:
                    continue
                if m in producers or m in (self.source_mode, *self.vacuum_modes):
                    raise NetworkError(f"mode {m} driven twice")
                producers[m] = e.id
            for m in e.inputs:
                if m is None:
                    continue
                if m in consumers:
                    raise NetworkError(f"mode {m} feeds both {consumers[m]} and {e.id}")
                consumers[m] = e.id
        for e in self.elements:
            for m in e.inputs:
                if m is not None and m not in producers and m != self.source_mode and m not in self.vacuum_modes:
                    raise NetworkError(f"input {m} of {e.id} is dangling")
        for m, src in producers.items():
            if m not in consumers and m not in self.terminal_modes:
                raise NetworkError(f"output {m} of {src} goes nowhere")
        if self.detector_mode not in producers:
            raise NetworkError(f"detector mode {self.detector_mode} is never produced")

        graph = {e.id: {producers[m] for m in e.inputs if m in producers} for e in self.elements}
        try:
            order = tuple(graphlib.TopologicalSorter(graph).static_order())
        except graphlib.CycleError as exc:
            raise NetworkError(f"wiring has a cycle: {exc.args[1]}") from None
        by_id = {e.id: e for e in self.elements}
        return tuple(by_id[i] for i in order)

    def element(self, id: str) -> Element:
        for e in self.elements:
            if e.id == id:
                return e
        raise KeyError(id)

    @cached_property
    def lock_references(self) -> dict[str, float]:
        """Lock-point phase of each locked recombiner, taken at zero modulation (t = 0)."""
        refs: dict[str, float] = {}
        _run(self, 1.0 + 0j, np.asarray(0.0), refs, learn=True)
        return refs


def _locked_combine(M: BSMatrix, port: str, top, left, ref):
    """Merge the two source estimates of a phase-locked recombiner.

    Returns ``(out_top, out_left, rho, error)`` where ``rho`` is the estimate
    phase difference followed continuously from the lock point ``ref``.
    """
    m = M.array
    p = 0 if port == "T" else 1
    est_t = top / np.conj(m[p, 0])
    est_l = left / np.conj(m[p, 1])
    raw = np.angle(est_l * np.conj(est_t))
    if ref is None:
        ref = float(raw)
        if ref <= -np.pi + 1e-9:
            ref = np.pi
    err = wrap_phase(raw - ref)
    rho = ref + err
    out = np.sqrt(np.abs(est_t) * np.abs(est_l)) * np.exp(1j * (np.angle(est_t) + rho / 2))
    zero = np.zeros_like(out)
    return (out, zero, ref, err) if p == 0 else (zero, out, ref, err)


def _run(net: Network, alpha, t: np.ndarray, refs: dict, learn: bool = False) -> ModeAmplitudes:
    base = np.ones_like(t, dtype=complex)
    amps: dict[str, np.ndarray] = {net.source_mode: alpha * base}
    for v in net.vacuum_modes:
        amps[v] = 0 * base
    lock_error = {}
    for el in net.order:
        top, left = (amps[m] if m is not None else 0 * base for m in el.inputs)
        kind = el.kind
        M = kind.matrix(t)
        if isinstance(kind, BeamSplitter) and kind.lock is not None:
            out_t, out_l, ref, err = _locked_combine(M, kind.lock, top, left, None if learn else refs[el.id])
            if learn:
                refs[el.id] = ref
            lock_error[el.id] = err
        else:
            out_t, out_l = M.apply(top, left)
        for m, v in zip(el.outputs, (out_t, out_l)):
            if m is not None:
                amps[m] = v * base
    return ModeAmplitudes(amps, t, lock_error)


def propagate(net: Network, input: CoherentAmp | complex, t) -> ModeAmplitudes:
    """Amplitude on every mode at time(s) ``t`` for a coherent input on the source mode."""
    alpha = input.alpha if isinstance(input, CoherentAmp) else input
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise ValueError("t must be finite")
    return _run(net, complex(alpha), t, net.lock_references)


# ---------------------------------------------------------------- presets


def _common_elements(config: InterferometerConfig, b_out: str):
    M = config.mirror
    return [
        Element("BS1", BeamSplitter(config.splitter(1)), ("T1", "L1"), ("T8", "L2")),
        Element("E", Mirror(M("E")), ("T2", "L2"), ("T3", "a")),
        Element("BS2", BeamSplitter(config.splitter(2)), ("T3", "L3"), ("T5", "L4")),
        Element("A", Mirror(M("A")), ("T4", "L4"), ("T6", "b")),
        Element("B", Mirror(M("B")), ("T5", "L5"), ("c", b_out)),
        Element("F", Mirror(M("F")), ("T7", "L7"), ("T9", "e")),
        Element("C", Mirror(M("C")), ("T8", "L8"), ("f", "L9")),
    ]


def build_setup1(config: InterferometerConfig | None = None, mode: Mode | str = Mode.PAPER_LITERAL) -> Network:
    """Both inner paths end on mirror F; the detector sees all five mirrors."""
    config = config or InterferometerConfig.default()
    mode = Mode(mode)
    if mode is not Mode.PAPER_LITERAL:
        raise ConfigurationError("setup 1 is only defined in the paper-literal convention")
    elements = _common_elements(config, "L6") + [
        Element("BS3", BeamSplitter(config.splitter(3), adjoint=True, lock="L"), ("T6", "L6"), ("d", "L7")),
        Element("BS4", BeamSplitter(config.splitter(4), adjoint=True, lock="L"), ("T9", "L9"), ("g", "h")),
    ]
    return Network(tuple(elements), name="setup1", setup=1, mode=mode, config=config)


def build_setup2(config: InterferometerConfig | None = None, mode: Mode | str = Mode.PAPER_LITERAL) -> Network:
    """Inner arm shifted by λ so the port toward mirror F is dark."""
    config = config or InterferometerConfig.default()
    mode = Mode(mode)
    lam = config.lambda_for(mode)
    locked = "T" if mode is Mode.PAPER_LITERAL else None
    elements = _common_elements(config, "L6pre") + [
        Element("lambda", PhaseShift(lam), ("L6pre", None), ("L6", None)),
        Element("BS3", BeamSplitter(config.splitter(3), adjoint=True, lock=locked), ("T6", "L6"), ("d", "L7")),
    ]
    if mode is Mode.PAPER_LITERAL:
        lock_cfg = replace(config, lam=lam)
        elements += [
            Element("BS4", BeamSplitter(config.splitter(4)), ("T9", "L9"), ("g", "h0")),
            Element("lock", PhaseLock(lock_cfg), ("h0", None), ("h", None)),
        ]
    else:
        elements.append(Element("BS4", BeamSplitter(config.splitter(4)), ("T9", "L9"), ("g", "h")))
    return Network(tuple(elements), name=f"setup2-{mode.value}", setup=2, mode=mode, config=config)


def build_network(setup: int, config: InterferometerConfig | None = None, mode: Mode | str = Mode.PAPER_LITERAL) -> Network:
    if setup == 1:
        return build_setup1(config, mode)
    if setup == 2:
        return build_setup2(config, mode)
    raise ConfigurationError(f"setup must be 1 or 2, got {setup}")


# ---------------------------------------------------------------- phase relation


def phase_relation_residual(config: InterferometerConfig, t, wrap: bool = True, lam: float | None = None):
    """``(Ψ2 + Ψ3) - [(Ψ_A - Φ_A + Ψ_B - Φ_B)/2 - π + λ]`` at time ``t``.

    Zero means the two estimates of the field behind BS3 agree, so the port
    toward mirror F is exactly dark.
    """
    lam = config.lambda_for(Mode.PAPER_LITERAL) if lam is None else lam
    mod = (config.mirror("A").modulation(t) + config.mirror("B").modulation(t)) / 2
    r = config.psis[1] + config.psis[2] - (mod - np.pi + lam)
    return wrap_phase(r) if wrap else r


def verify_phase_relation(config: InterferometerConfig, t) -> float | np.ndarray:
    """Wrapped residual of the inner-arm dark-port phase relation."""
    return phase_relation_residual(config, t)


def physical_mismatch(config: InterferometerConfig, t, lam: float | None = None):
    """Phase error between the two arms at BS3 under honest superposition.

    With ``lam`` at its physical default this vanishes at zero modulation;
    the leak toward mirror F is then ``|α| sqrt(2/3) |sin(mismatch/2)|``.
    """
    lam = config.lambda_for(Mode.PHYSICAL) if lam is None else lam
    mod = (config.mirror("A").modulation(t) + config.mirror("B").modulation(t)) / 2
    return wrap_phase(config.psis[1] + config.psis[2] + lam + np.pi - mod)


# ---------------------------------------------------------------- closed forms


def _mod(config, label, t):
    return config.mirror(label).modulation(t)


def closed_form_states(setup: int, config: InterferometerConfig, t, alpha: complex = 1.0) -> dict:
    """Closed-form amplitudes at each stage, written out element by element.

    Independent of the graph code.  Returns ``{stage: (mode, value, exact)}``.
    ``exact`` is True for a strict match and False where the reference
    constant phase is not self-consistent, so only a fixed global phase is
    left free.  An integer ``k`` marks values behind a phase-locked
    recombiner: its output phase is a half angle, so the constant is fixed
    only up to a k-th root of unity.  With the default angles the match is
    strict.
    """
    t = np.asarray(t, dtype=float)
    P1, P2, P3, P4 = config.phis
    S1, S2, S3, S4 = config.psis
    A, B, C, E, F = (_mod(config, k, t) for k in "ABCEF")
    e = lambda x: np.exp(1j * x)  # noqa: E731
    r3, r23, r12 = np.sqrt(1 / 3), np.sqrt(2 / 3), np.sqrt(1 / 2)
    zero = 0 * t + 0j

    t8 = alpha * r3 * e((S1 + P1) / 2)
    l2 = -alpha * r23 * e(-(S1 - P1) / 2)
    alpha_e = l2
    t3 = alpha_e * e(E / 2)
    t5 = t3 * r12 * e((S2 + P2) / 2)
    l4 = -t3 * r12 * e(-(S2 - P2) / 2)
    t6 = l4 * e(A / 2)
    l6 = -t5 * e(-B / 2)
    l9 = -alpha * r3 * e((S1 + P1) / 2) * e(-C / 2)

    states = {
        "BS1": [("T8", t8, True), ("L2", l2, True)],
        "mirror E": [("T3", t3, True), ("a", zero, True)],
        "BS2": [("T5", t5, True), ("L4", l4, True)],
        "mirror A": [("T6", t6, True), ("b", zero, True)],
        "mirror C": [("f", zero, True), ("L9", l9, True)],
    }
    if setup == 1:
        gamma = alpha * r23 * e(-(S1 - P1) / 2) * e((P2 + P3) / 2) * e(E / 2) * e(A / 4) * e(-B / 4)
        beta = closed_form_beta(1, config, t, alpha).alpha
        states.update({
            "mirror B": [("c", zero, True), ("L6", l6, True)],
            "BS3": [("d", zero, True), ("L7", gamma, 2)],
            "mirror F": [("T9", gamma * e(F / 2), 2), ("e", zero, True)],
            "BS4": [("g", zero, True), ("h", beta, 4)],
        })
    elif setup == 2:
        lam = config.lambda_for(Mode.PAPER_LITERAL)
        a_prime = alpha * r3 * e(-(S1 - P1) / 2) * e(E / 2) * e(-(S2 - P2) / 2) * e(A / 2)
        b_prime = alpha * r3 * e(-(S1 - P1) / 2) * e(E / 2) * e((S2 + P2) / 2) * e(-B / 2) * e(lam)
        chi = (
            alpha * r23 * e(-(S1 - P1) / 2) * e((P2 - P3 + np.pi) / 2)
            * e(E / 2) * e(A / 4) * e(-B / 4) * e(lam)
        )
        alpha_1 = -alpha * (np.sqrt(2) / 3) * e((S1 + P1) / 2) * e((S4 - P4) / 2) * e(-C / 2)
        states.update({
            "mirror B": [("c", zero, True), ("L6pre", l6, True)],
            "BS3 inputs": [("T6", a_prime, True), ("L6", b_prime, True)],
            "BS3": [("d", chi, False), ("L7", zero, True)],
            "BS4 inputs": [("T9", zero, True), ("L9", l9, True)],
            "BS4": [("g", alpha_1, True), ("h", closed_form_beta(2, config, t, alpha).alpha, True)],
        })
    else:
        raise ConfigurationError(f"setup must be 1 or 2, got {setup}")
    return states


def closed_form_beta(setup: int, config: InterferometerConfig, t, alpha: complex = 1.0) -> CoherentAmp:
    """Detector amplitude written directly from the closed-form result of each setup."""
    t = np.asarray(t, dtype=float)
    P1, P2, P3, P4 = config.phis
    S1, S2, S3, S4 = config.psis
    A, B, C, E, F = (_mod(config, k, t) for k in "ABCEF")
    if setup == 1:
        phase = (
            (P1 + P4) / 2 + (P2 + P3) / 4 + np.pi / 2
            + E / 4 + F / 4 + A / 8 - B / 8 - C / 4
        )
        return CoherentAmp(alpha * np.exp(1j * phase), "h")
    if setup == 2:
        lam = config.lambda_for(Mode.PAPER_LITERAL)
        phase = (
            -(S2 + S3) + (S1 + P1) / 2 - (S4 + P4) / 2 + lam
            + A / 2 + B / 2 - C / 2
        )
        return CoherentAmp(alpha / 3 * np.exp(1j * phase), "h")
    raise ConfigurationError(f"setup must be 1 or 2, got {setup}")


# first-order phase coefficient of each mirror's Ψ - Φ in the detector amplitude
PHASE_COEFFICIENTS = {
    1: {"A": 1 / 8, "B": -1 / 8, "C": -1 / 4, "E": 1 / 4, "F": 1 / 4},
    2: {"A": 1 / 2, "B": 1 / 2, "C": -1 / 2},
}
