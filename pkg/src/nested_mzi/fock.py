"""Truncated two-mode Fock space and the general photon-number beam splitter map.

Used as a brute-force oracle: a coherent input expanded in the Fock basis and
pushed through the splitter term by term must coincide with the product
coherent state predicted by the amplitude shortcut.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .optics import BSMatrix, apply_bs_coherent, CoherentAmp


class CapacityError(ValueError):
    """Requested photon numbers do not fit in the truncated space."""


class TruncationError(ValueError):
    """Cutoff too small to hold a coherent expansion to the required accuracy."""

    def __init__(self, message, achieved_norm):
        super().__init__(f"{message} (achieved norm {achieved_norm:.12f})")
        self.achieved_norm = achieved_norm


@dataclass
class FockVector:
    """Coefficients ``coeffs[n_top, n_left]`` with ``0 <= n <= cutoff``."""

    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.ndim != 2 or self.coeffs.shape[0] != self.coeffs.shape[1]:
            raise ValueError(f"coeffs must be square, got shape {self.coeffs.shape}")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("coeffs must be finite")

    @classmethod
    def vacuum(cls, cutoff: int) -> "FockVector":
        c = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
        c[0, 0] = 1.0
        return cls(c)

    @property
    def cutoff(self) -> int:
        return self.coeffs.shape[0] - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def overlap(self, other: "FockVector") -> complex:
        if other.cutoff != self.cutoff:
            raise ValueError("cutoffs differ")
        return complex(np.vdot(self.coeffs, other.coeffs))

    def __add__(self, other: "FockVector") -> "FockVector":
        return FockVector(self.coeffs + other.coeffs)

    def __mul__(self, scalar) -> "FockVector":
        return FockVector(self.coeffs * scalar)

    __rmul__ = __mul__


def _log_binom(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def fock_bs_output(n: int, m: int, B: BSMatrix, cutoff: int | None = None) -> FockVector:
    """Output of the splitter ``B`` for the input ``|n>_T |m>_L``.

    Each (j, k) term sends ``n-j+m-k`` photons to the top output and ``j+k``
    to the left output with amplitude

        (n! m!)^{-1/2} C(n,j) C(m,k) [(n-j+m-k)! (j+k)!]^{1/2}
            B11^{n-j} B21^j B12^{m-k} B22^k

    The factorial weights are assembled in log space.
    """
    if n < 0 or m < 0:
        raise ValueError("photon numbers must be non-negative")
    if cutoff is None:
        cutoff = n + m
    if n + m > cutoff:
        raise CapacityError(f"n + m = {n + m} exceeds cutoff {cutoff}")
    b11, b12, b21, b22 = (complex(b) for b in (B.b11, B.b12, B.b21, B.b22))

    out = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    log_norm = -0.5 * (gammaln(n + 1) + gammaln(m + 1))
    for j in range(n + 1):
        for k in range(m + 1):
            top, left = n - j + m - k, j + k
            log_w = (
                log_norm
                + _log_binom(n, j)
                + _log_binom(m, k)
                + 0.5 * (gammaln(top + 1) + gammaln(left + 1))
            )
            out[top, left] += math.exp(log_w) * b11 ** (n - j) * b21**j * b12 ** (m - k) * b22**k
    return FockVector(out)


def required_cutoff(*alphas: complex) -> int:
    """Cutoff keeping the Poisson tail of the total photon number below ~1e-10."""
    total = sum(abs(a) ** 2 for a in alphas)
    span = sum(abs(a) for a in alphas)
    return int(math.ceil(total + 6 * span + 10))


def _coherent_weights(alpha: complex, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff + 1)
    mag = abs(alpha)
    if mag == 0:
        w = np.zeros(cutoff + 1, dtype=complex)
        w[0] = 1.0
        return w
    logs = -mag**2 / 2 + n * np.log(mag) - 0.5 * gammaln(n + 1)
    return np.exp(logs) * np.exp(1j * n * np.angle(alpha))


def coherent_fock_expand(alpha: complex, cutoff: int) -> FockVector:
    """Fock expansion of ``|alpha>`` on the top mode, left mode in vacuum."""
    need = required_cutoff(alpha)
    w = _coherent_weights(alpha, cutoff)
    achieved = float(np.linalg.norm(w))
    if cutoff < need:
        raise TruncationError(f"cutoff {cutoff} below required {need} for |alpha| = {abs(alpha):.3g}", achieved)
    if achieved < 1 - 1e-10:
        raise TruncationError(f"cutoff {cutoff} loses norm for alpha = {alpha}", achieved)
    c = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    c[:, 0] = w
    return FockVector(c)


def product_coherent(alpha_top: complex, alpha_left: complex, cutoff: int) -> FockVector:
    """Product state ``|alpha_top>|alpha_left>`` truncated per mode at ``cutoff``."""
    return FockVector(np.outer(_coherent_weights(alpha_top, cutoff), _coherent_weights(alpha_left, cutoff)))


def apply_fock(state: FockVector, B: BSMatrix) -> FockVector:
    """Apply the splitter to every basis component of ``state`` with n + m <= cutoff.

    Components beyond the total photon budget are dropped; they would not fit
    in the output array.
    """
    N = state.cutoff
    out = np.zeros_like(state.coeffs)
    for n in range(N + 1):
        for m in range(N + 1 - n):
            c = state.coeffs[n, m]
            if c != 0:
                out += c * fock_bs_output(n, m, B, N).coeffs
    return FockVector(out)


def oracle_compare(alpha_top: complex, alpha_left: complex, B: BSMatrix, cutoff: int | None = None) -> float:
    """Fidelity between brute-force Fock propagation and the coherent shortcut."""
    need = required_cutoff(alpha_top, alpha_left)
    if cutoff is None:
        cutoff = need
    if cutoff < need:
        mean = abs(alpha_top) ** 2 + abs(alpha_left) ** 2
        achieved = float(np.sqrt(poisson.cdf(cutoff, mean)))
        raise TruncationError(f"cutoff {cutoff} below required {need}", achieved)

    inp = product_coherent(alpha_top, alpha_left, cutoff)
    oracle = apply_fock(inp, B)
    top, left = apply_bs_coherent(B, CoherentAmp(alpha_top), CoherentAmp(alpha_left))
    shortcut = product_coherent(complex(top.alpha), complex(left.alpha), cutoff)
    return abs(oracle.overlap(shortcut)) ** 2
