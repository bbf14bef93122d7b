"""Toeplitz quantization of discrete phase-space measures on a truncated Hermite basis.

OP(nu) = (2 pi hbar)^{-2} sum_k w_k |z_k><z_k|, with phase points ordered
(q1, q2, p1, p2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gyrolim.quantize.hermite import HermiteTruncation, coherent_coefficients_2d


def _validate_measure(points, weights):
    z = np.atleast_2d(np.asarray(points, dtype=float))
    w = np.atleast_1d(np.asarray(weights, dtype=float))
    if z.ndim != 2 or z.shape[1] != 4 or z.shape[0] != w.size:
        raise ValueError("phase points must be (K, 4) with one weight each")
    if np.any(w < 0):
        raise ValueError("Toeplitz symbol must be a positive measure")
    if not np.all(np.isfinite(z)):
        raise ValueError("phase points must be finite")
    return z, w


def toeplitz_matrix(points, weights, trunc: HermiteTruncation, chunk: int = 4096) -> np.ndarray:
    """Matrix of (2 pi hbar)^{-2} sum_k w_k |z_k><z_k| in the truncated basis."""
    z, w = _validate_measure(points, weights)
    hbar = trunc.hbar
    out = np.zeros((trunc.size, trunc.size), dtype=complex)
    for a in range(0, z.shape[0], chunk):
        C = coherent_coefficients_2d(z[a:a + chunk], hbar, trunc.M)
        out += (C.T * w[a:a + chunk]) @ C.conj()
    out /= (2 * math.pi * hbar) ** 2
    return 0.5 * (out + out.conj().T)


def density_operator(points, weights, trunc: HermiteTruncation) -> np.ndarray:
    """OP((2 pi hbar)^2 nu) for a probability measure nu: trace one up to truncation."""
    z, w = _validate_measure(points, weights)
    return toeplitz_matrix(z, w * (2 * math.pi * trunc.hbar) ** 2, trunc)


def _gh_phase_plane(K: int):
    """Gauss-Hermite nodes/weights for the weight e^{-a^2} on each phase-plane axis."""
    x, w = np.polynomial.hermite.hermgauss(K)
    A, B = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w)
    return A.ravel(), B.ravel(), W.ravel()


def axis_symbol_matrix(f, hbar: float, M: int, K: int | None = None) -> np.ndarray:
    """One-axis Toeplitz matrix of a polynomial symbol f(q, p) by exact Gauss-Hermite quadrature.

    Uses <m|z><z|n> = e^{-|alpha|^2} alpha^m conj(alpha)^n / sqrt(m! n!) and
    dq dp = 2 hbar d^2 alpha, so OP(f)_{mn} = (1/pi) int f e^{-|alpha|^2} alpha^m conj(alpha)^n / sqrt(m! n!).
    Exact for polynomial f of degree <= 2 once K >= M + 2.
    """
    K = K or (M + 3)
    a, b, w = _gh_phase_plane(K)
    alpha = a + 1j * b
    v = np.empty((M + 1, alpha.size), dtype=complex)
    v[0] = 1.0
    for n in range(M):
        v[n + 1] = v[n] * alpha / math.sqrt(n + 1)
    s = math.sqrt(2 * hbar)
    fw = w * np.asarray(f(s * a, s * b), dtype=float) / math.pi
    return (v * fw) @ v.conj().T


@dataclass
class QuadraticIdentityReport:
    M: int
    hbar: float
    err_q2: float
    err_p2: float
    err_q2_ladder: float
    err_p2_ladder: float
    correction: float

    @property
    def max_error(self) -> float:
        return max(self.err_q2, self.err_p2, self.err_q2_ladder, self.err_p2_ladder)


def quadratic_symbol_identities(trunc: HermiteTruncation) -> QuadraticIdentityReport:
    """Check OP(|q|^2) = |x|^2 + hbar and OP(|p|^2) = -hbar^2 Laplacian + hbar on the interior block.

    The left sides come from phase-space quadrature of the symbols, the right
    sides from the ladder operators twice: exact quadratic forms, and products
    X @ X, P @ P of truncated first-order matrices (exact for degrees <= M - 1).
    """
    M, hbar = trunc.M, trunc.hbar
    if M < 4:
        raise ValueError("truncation too small")
    eye1 = np.eye(M + 1)
    q2_axis = axis_symbol_matrix(lambda q, p: q**2, hbar, M)
    p2_axis = axis_symbol_matrix(lambda q, p: p**2, hbar, M)
    one_axis = axis_symbol_matrix(lambda q, p: np.ones_like(q), hbar, M)
    # the symbol |q|^2 = q1^2 + q2^2 factorizes over axes against the constant symbol 1
    op_q2 = np.kron(q2_axis, one_axis) + np.kron(one_axis, q2_axis)
    op_p2 = np.kron(p2_axis, one_axis) + np.kron(one_axis, p2_axis)
    I = np.eye(trunc.size)
    mask = trunc.interior_mask(2)
    blk = np.ix_(mask, mask)

    def err(A, B):
        return float(np.max(np.abs(A[blk] - B[blk])))

    X, P = trunc.X(), trunc.P()
    xx = np.kron(X @ X, eye1) + np.kron(eye1, X @ X)
    pp = np.kron(P @ P, eye1) + np.kron(eye1, P @ P)
    return QuadraticIdentityReport(
        M, hbar,
        err(op_q2, trunc.position_square() + hbar * I),
        err(op_p2, trunc.lift(trunc.P2(), 0) + trunc.lift(trunc.P2(), 1) + hbar * I),
        err(op_q2, xx + hbar * I),
        err(op_p2, pp + hbar * I),
        float(np.real(np.mean(np.diag(op_q2 - trunc.position_square())[mask]))),
    )


@dataclass
class TraceIdentity:
    closed_form: float
    numeric: float
    M: int

    @property
    def relerr(self) -> float:
        return abs(self.numeric - self.closed_form) / abs(self.closed_form)


def kinetic_closed_form(points, weights, eps: float, hbar: float) -> float:
    """int |p + q^perp/2eps|^2 nu + hbar/(4 eps^2) + hbar for a probability measure nu."""
    z, w = _validate_measure(points, weights)
    total = w.sum()
    if not total > 0:
        raise ValueError("measure has zero mass")
    w = w / total
    v1 = z[:, 2] - z[:, 1] / (2 * eps)
    v2 = z[:, 3] + z[:, 0] / (2 * eps)
    with np.errstate(over="raise"):
        try:
            moment = float(np.dot(w, v1**2 + v2**2))
        except FloatingPointError:
            raise OverflowError("second moment of the symbol overflows") from None
    if not math.isfinite(moment):
        raise OverflowError("second moment of the symbol is not finite")
    return moment + hbar / (4 * eps**2) + hbar


def kinetic_trace_identity(points, weights, eps: float, hbar: float, M: int, chunk: int = 2048) -> TraceIdentity:
    """trace(v^2 R) for R = sum_k w_k |z_k><z_k| (w normalized) against its closed form.

    The numeric side is sum_k w_k <z_k|v^2|z_k> with coherent states truncated
    at degree M per axis and v^2 assembled from exact ladder quadratic forms.
    """
    if not eps > 0 or not hbar > 0:
        raise ValueError("eps and hbar must be positive")
    z, w = _validate_measure(points, weights)
    trunc = HermiteTruncation(hbar, M)
    # a coherent state at |alpha|^2 has Poisson(|alpha|^2) degree weights; p ~ q/2eps
    # makes |alpha| grow like 1/eps, so the basis must reach past the largest mean
    alpha2 = np.maximum(z[:, 0] ** 2 + z[:, 2] ** 2, z[:, 1] ** 2 + z[:, 3] ** 2) / (2 * hbar)
    if alpha2.max() > M:
        raise ValueError(f"truncation M = {M} too small: symbol reaches |alpha|^2 = {alpha2.max():.3g}")
    closed = kinetic_closed_form(z, w, eps, hbar)
    w = w / w.sum()
    V = trunc.magnetic_kinetic(eps)
    num = 0.0
    for a in range(0, z.shape[0], chunk):
        C = coherent_coefficients_2d(z[a:a + chunk], hbar, M)
        num += float(np.real(np.einsum("k,ki,ij,kj->", w[a:a + chunk], C.conj(), V, C, optimize=True)))
    return TraceIdentity(closed, num, M)
