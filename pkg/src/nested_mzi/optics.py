"""Lossless two-port elements: Euler-angle beam splitters and vibrating mirrors.

Every element acts on the pair of mode amplitudes ``(top, left)`` through a
2x2 SU(2) matrix

    [[ cos(θ/2) e^{ i(ψ+φ)/2},  sin(θ/2) e^{ i(ψ-φ)/2}],
     [-sin(θ/2) e^{-i(ψ-φ)/2},  cos(θ/2) e^{-i(ψ+φ)/2}]]

A mirror is the θ = π member of the family whose φ, ψ oscillate in time.
Matrix entries may be numpy arrays so that a whole time grid is evaluated in
one pass.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

ArrayLike = Union[complex, float, np.ndarray]

MIRROR_LABELS = ("A", "B", "C", "E", "F")


class InvalidInputError(ValueError):
    """Raised for non-finite or out-of-range element parameters."""


def _check_finite(name, value):
    if not np.all(np.isfinite(value)):
        raise InvalidInputError(f"{name} must be finite, got {value!r}")


def half_angle(theta: float) -> tuple[float, float]:
    """Return ``(cos(θ/2), sin(θ/2))`` with exact values at θ = 0 and θ = π."""
    if theta == 0.0:
        return 1.0, 0.0
    if theta == np.pi:
        return 0.0, 1.0
    return float(np.cos(theta / 2)), float(np.sin(theta / 2))


@dataclass(frozen=True)
class EulerAngles:
    """Rotation angles (Φ, Θ, Ψ) of one lossless two-port.

    ``phi`` and ``psi`` are kept unreduced so composed phases compare exactly.
    """

    phi: float = 0.0
    theta: float = 0.0
    psi: float = 0.0

    def __post_init__(self):
        for name in ("phi", "theta", "psi"):
            _check_finite(name, getattr(self, name))
        if not 0.0 <= self.theta <= np.pi:
            raise InvalidInputError(f"theta must lie in [0, pi], got {self.theta}")

    @classmethod
    def from_transmittance(cls, tau: float, phi: float = 0.0, psi: float = 0.0) -> "EulerAngles":
        """Angles for an intensity transmittance ``tau = cos²(Θ/2)``."""
        _check_finite("tau", tau)
        if not 0.0 <= tau <= 1.0:
            raise InvalidInputError(f"transmittance must lie in [0, 1], got {tau}")
        if tau == 0.5:
            theta = np.pi / 2
        elif tau == 0.0:
            theta = np.pi
        else:
            theta = 2.0 * np.arccos(np.sqrt(tau))
        return cls(phi=phi, theta=theta, psi=psi)

    @property
    def transmittance(self) -> float:
        return half_angle(self.theta)[0] ** 2


@dataclass(frozen=True)
class BSMatrix:
    """2x2 transfer matrix acting on ``(top, left)`` amplitudes.

    Entries are complex scalars or broadcast-compatible complex arrays.
    """

    b11: ArrayLike
    b12: ArrayLike
    b21: ArrayLike
    b22: ArrayLike

    @classmethod
    def from_array(cls, m) -> "BSMatrix":
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise InvalidInputError(f"expected a 2x2 matrix, got shape {m.shape}")
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @property
    def array(self) -> np.ndarray:
        """Stacked matrix, shape ``(..., 2, 2)``."""
        b11, b12, b21, b22 = np.broadcast_arrays(
            *(np.asarray(b, dtype=complex) for b in (self.b11, self.b12, self.b21, self.b22))
        )
        return np.stack([np.stack([b11, b12], -1), np.stack([b21, b22], -1)], -2)

    def adjoint(self) -> "BSMatrix":
        return BSMatrix(
            np.conj(self.b11), np.conj(self.b21), np.conj(self.b12), np.conj(self.b22)
        )

    def __matmul__(self, other: "BSMatrix") -> "BSMatrix":
        return BSMatrix(
            self.b11 * other.b11 + self.b12 * other.b21,
            self.b11 * other.b12 + self.b12 * other.b22,
            self.b21 * other.b11 + self.b22 * other.b21,
            self.b21 * other.b12 + self.b22 * other.b22,
        )

    def apply(self, top: ArrayLike, left: ArrayLike) -> tuple[ArrayLike, ArrayLike]:
        return self.b11 * top + self.b12 * left, self.b21 * top + self.b22 * left

    def unitarity_error(self) -> float:
        """Largest entrywise deviation of B†B from the identity."""
        m = self.array
        gram = np.conj(np.swapaxes(m, -1, -2)) @ m
        return float(np.max(np.abs(gram - np.eye(2))))

    def det(self) -> ArrayLike:
        return self.b11 * self.b22 - self.b12 * self.b21

    @property
    def transmittance(self) -> ArrayLike:
        return np.abs(self.b11) ** 2

    @property
    def reflectance(self) -> ArrayLike:
        return np.abs(self.b12) ** 2


def bs_matrix(angles: EulerAngles) -> BSMatrix:
    """Transfer matrix of a lossless beam splitter with the given Euler angles."""
    c, s = half_angle(angles.theta)
    plus = (angles.psi + angles.phi) / 2
    minus = (angles.psi - angles.phi) / 2
    return BSMatrix(
        c * np.exp(1j * plus),
        s * np.exp(1j * minus),
        -s * np.exp(-1j * minus),
        c * np.exp(-1j * plus),
    )


@dataclass(frozen=True)
class MirrorSpec:
    """A harmonically vibrating mirror.

    Its Euler phases are ``Ψ(t) = psi0 sin(2π f t)`` and
    ``Φ(t) = phi0 sin(2π f t)``; only the difference ``Ψ - Φ`` reaches the
    reflected beam.
    """

    label: str
    freq_hz: float
    psi0: float = 0.02
    phi0: float = 0.0

    def __post_init__(self):
        if self.label not in MIRROR_LABELS:
            raise InvalidInputError(f"mirror label must be one of {MIRROR_LABELS}, got {self.label!r}")
        for name in ("freq_hz", "psi0", "phi0"):
            _check_finite(name, getattr(self, name))
        if self.freq_hz <= 0:
            raise InvalidInputError(f"mirror {self.label}: frequency must be positive")

    @property
    def depth(self) -> float:
        """Amplitude of the oscillating phase difference ``Ψ - Φ``."""
        return self.psi0 - self.phi0

    @property
    def degenerate(self) -> bool:
        """True when ψ₀ == φ₀, so the mirror imprints no modulation at all."""
        return self.psi0 == self.phi0

    def psi(self, t: ArrayLike) -> ArrayLike:
        return self.psi0 * np.sin(2 * np.pi * self.freq_hz * np.asarray(t, dtype=float))

    def phi(self, t: ArrayLike) -> ArrayLike:
        return self.phi0 * np.sin(2 * np.pi * self.freq_hz * np.asarray(t, dtype=float))

    def modulation(self, t: ArrayLike) -> ArrayLike:
        """``Ψ(t) - Φ(t)``."""
        return self.depth * np.sin(2 * np.pi * self.freq_hz * np.asarray(t, dtype=float))


def mirror_matrix(mirror: MirrorSpec, t: ArrayLike) -> BSMatrix:
    """Full reflector (Θ = π) carrying the mirror's phases at time ``t``."""
    _check_finite("t", t)
    half = mirror.modulation(t) / 2
    zero = np.zeros_like(half, dtype=complex)
    return BSMatrix(zero, np.exp(1j * half), -np.exp(-1j * half), zero.copy())


@dataclass(frozen=True)
class CoherentAmp:
    """Complex amplitude α of a single-mode coherent state on a named mode."""

    alpha: ArrayLike
    mode: str = ""

    def __post_init__(self):
        _check_finite("alpha", self.alpha)

    @property
    def mean_photons(self) -> ArrayLike:
        return np.abs(self.alpha) ** 2


def apply_bs_coherent(
    B: BSMatrix,
    in_top: CoherentAmp,
    in_left: CoherentAmp,
    out_modes: tuple[str, str] = ("T'", "L'"),
) -> tuple[CoherentAmp, CoherentAmp]:
    """Coherent inputs stay coherent: only the amplitudes are mixed by ``B``."""
    top, left = B.apply(in_top.alpha, in_left.alpha)
    return CoherentAmp(top, out_modes[0]), CoherentAmp(left, out_modes[1])
