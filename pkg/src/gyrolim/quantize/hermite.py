"""Harmonic-oscillator basis at scale hbar, ladder matrices and coherent states.

Per axis, |n> has wavefunction (pi hbar)^{-1/4} (2^n n!)^{-1/2} H_n(x/sqrt(hbar)) e^{-x^2/2hbar},
so X = sqrt(hbar/2)(a + a^dag) and P = -i sqrt(hbar/2)(a - a^dag). Two-dimensional
objects are Kronecker products with the first axis as the slow index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class HermiteTruncation:
    hbar: float
    M: int

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if self.M < 4:
            raise ValueError(f"truncation degree must be at least 4, got {self.M}")

    @property
    def size1(self) -> int:
        return self.M + 1

    @property
    def size(self) -> int:
        return (self.M + 1) ** 2

    # one-axis operators ------------------------------------------------

    def lowering(self) -> np.ndarray:
        return np.diag(np.sqrt(np.arange(1, self.M + 1, dtype=float)), 1)

    def X(self) -> np.ndarray:
        a = self.lowering()
        return math.sqrt(self.hbar / 2) * (a + a.T)

    def P(self) -> np.ndarray:
        a = self.lowering()
        return -1j * math.sqrt(self.hbar / 2) * (a - a.T)

    def X2(self) -> np.ndarray:
        """Exact matrix elements <m|X^2|n> for m, n <= M (no truncation of the intermediate sum)."""
        n = np.arange(self.M + 1, dtype=float)
        off = np.sqrt((n[:-2] + 1) * (n[:-2] + 2))
        return self.hbar / 2 * (np.diag(2 * n + 1) + np.diag(off, 2) + np.diag(off, -2))

    def P2(self) -> np.ndarray:
        n = np.arange(self.M + 1, dtype=float)
        off = np.sqrt((n[:-2] + 1) * (n[:-2] + 2))
        return self.hbar / 2 * (np.diag(2 * n + 1) - np.diag(off, 2) - np.diag(off, -2))

    # two-axis operators ------------------------------------------------

    def lift(self, op, axis: int) -> np.ndarray:
        eye = np.eye(self.size1)
        return np.kron(op, eye) if axis == 0 else np.kron(eye, op)

    def magnetic_kinetic(self, eps: float) -> np.ndarray:
        """(-i hbar d + x^perp/(2 eps))^2 with exact per-axis quadratic forms.

        Equals P1^2 + P2^2 + (X1^2 + X2^2)/(4 eps^2) + (X1 P2 - X2 P1)/eps.
        """
        if not eps > 0:
            raise ValueError("eps must be positive")
        X, P = self.X(), self.P()
        out = self.lift(self.P2(), 0) + self.lift(self.P2(), 1)
        out = out + (self.lift(self.X2(), 0) + self.lift(self.X2(), 1)) / (4 * eps**2)
        out = out + (np.kron(X, P) - np.kron(P, X)) / eps
        return out

    def position_square(self) -> np.ndarray:
        return self.lift(self.X2(), 0) + self.lift(self.X2(), 1)

    def interior_mask(self, margin: int = 2) -> np.ndarray:
        """Boolean mask of 2D basis indices with both degrees <= M - margin."""
        d = np.arange(self.size1) <= self.M - margin
        return np.kron(d, d).astype(bool)

    # wavefunctions -----------------------------------------------------

    def functions(self, x) -> np.ndarray:
        """Basis functions psi_0..psi_M on points x (shape (M+1, len(x))), by the stable recurrence."""
        x = np.asarray(x, dtype=float) / math.sqrt(self.hbar)
        out = np.empty((self.M + 1,) + x.shape)
        out[0] = math.pi ** -0.25 * np.exp(-0.5 * x**2) / self.hbar**0.25
        if self.M >= 1:
            out[1] = math.sqrt(2.0) * x * out[0]
        for n in range(1, self.M):
            out[n + 1] = math.sqrt(2.0 / (n + 1)) * x * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
        return out


def coherent_state(q, p, hbar: float, x) -> np.ndarray:
    """|z, hbar>(x) = (pi hbar)^{-d/4} exp(-|x - q|^2/2hbar) exp(i p.x/hbar).

    ``q``, ``p`` have length d; ``x`` has shape (..., d).
    """
    if not hbar > 0:
        raise ValueError("hbar must be positive")
    q = np.atleast_1d(np.asarray(q, dtype=float))
    p = np.atleast_1d(np.asarray(p, dtype=float))
    x = np.asarray(x, dtype=float)
    d = q.size
    if x.ndim == 0 or x.shape[-1] != d:
        x = x[..., None]
    r2 = np.sum((x - q) ** 2, axis=-1)
    phase = np.sum(p * x, axis=-1) / hbar
    return (math.pi * hbar) ** (-d / 4) * np.exp(-r2 / (2 * hbar) + 1j * phase)


def coherent_overlap(q1, p1, q2, p2, hbar: float) -> complex:
    """<z1|z2> in closed form, from <alpha|beta> = exp(-|alpha|^2/2 - |beta|^2/2 + conj(alpha) beta)."""
    q1, p1, q2, p2 = (np.atleast_1d(np.asarray(v, dtype=float)) for v in (q1, p1, q2, p2))
    a1 = (q1 + 1j * p1) / math.sqrt(2 * hbar)
    a2 = (q2 + 1j * p2) / math.sqrt(2 * hbar)
    expo = np.sum(-0.5 * np.abs(a1) ** 2 - 0.5 * np.abs(a2) ** 2 + np.conj(a1) * a2)
    expo += 1j * np.sum(p2 * q2 - p1 * q1) / (2 * hbar)
    return complex(np.exp(expo))


def coherent_coefficients(q, p, hbar: float, M: int) -> np.ndarray:
    """Per-axis coefficients <n|z> for n = 0..M; vectorized over arrays q, p (result (..., M+1)).

    <n|z> = exp(i p q/2hbar) exp(-|alpha|^2/2) alpha^n / sqrt(n!) with alpha = (q + i p)/sqrt(2 hbar).
    """
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    alpha = (q + 1j * p) / math.sqrt(2 * hbar)
    out = np.empty(q.shape + (M + 1,), dtype=complex)
    out[..., 0] = np.exp(1j * p * q / (2 * hbar) - 0.5 * np.abs(alpha) ** 2)
    for n in range(M):
        out[..., n + 1] = out[..., n] * alpha / math.sqrt(n + 1)
    return out


def coherent_coefficients_2d(points, hbar: float, M: int) -> np.ndarray:
    """Rows <n1 n2|z> for phase points (K, 4) ordered (q1, q2, p1, p2); shape (K, (M+1)^2)."""
    z = np.atleast_2d(np.asarray(points, dtype=float))
    c1 = coherent_coefficients(z[:, 0], z[:, 2], hbar, M)
    c2 = coherent_coefficients(z[:, 1], z[:, 3], hbar, M)
    return (c1[:, :, None] * c2[:, None, :]).reshape(z.shape[0], -1)
