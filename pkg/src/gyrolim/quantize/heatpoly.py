"""Exact Gaussian smoothing of polynomials.

A polynomial in d variables is a coefficient array of shape (7,) * d with
``c[i, j, ...]`` multiplying x1^i x2^j ...; total degree is capped at 6.
G_{hbar/2} * g = sum_n (hbar/4)^n Delta^n g / n!.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from numpy.polynomial import polynomial as P

MAX_DEGREE = 6


def _validate(c) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.ndim < 1 or any(s != MAX_DEGREE + 1 for s in c.shape):
        raise ValueError(f"coefficients must have shape (7,)*d, got {c.shape}")
    for idx in zip(*np.nonzero(c)):
        if sum(idx) > MAX_DEGREE:
            raise ValueError(f"polynomial degree {sum(idx)} exceeds {MAX_DEGREE}")
    return c


def zeros(d: int) -> np.ndarray:
    return np.zeros((MAX_DEGREE + 1,) * d)


def monomial(exponents, coef: float = 1.0) -> np.ndarray:
    c = zeros(len(exponents))
    c[tuple(exponents)] = coef
    return _validate(c)


def laplacian(c) -> np.ndarray:
    c = _validate(c)
    out = np.zeros_like(c)
    for ax in range(c.ndim):
        d2 = P.polyder(c, 2, axis=ax)
        pad = [(0, 0)] * c.ndim
        pad[ax] = (0, 2)
        out += np.pad(d2, pad)
    return out


def degree(c) -> int:
    nz = np.nonzero(np.asarray(c))
    return max((sum(i) for i in zip(*nz)), default=0)


def heat_poly_expansion(c, hbar: float) -> np.ndarray:
    """Coefficients of G_{hbar/2} * g."""
    c = _validate(c)
    out = c.copy()
    term = c
    for n in range(1, degree(c) // 2 + 1):
        term = laplacian(term) * (hbar / 4) / n
        out = out + term
    return out


def evaluate(c, *coords) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    coords = np.broadcast_arrays(*[np.asarray(x, dtype=float) for x in coords])
    if len(coords) != c.ndim:
        raise ValueError("need one coordinate array per variable")
    out = np.zeros(coords[0].shape)
    for idx in zip(*np.nonzero(c)):
        term = c[idx]
        for x, k in zip(coords, idx):
            term = term * x**k
        out = out + term
    return out


def gauss_hermite_smoothing(c, hbar: float, points, nodes: int = 8) -> np.ndarray:
    """E[g(x + Z)] with Z ~ N(0, hbar/2 I) at points (m, d), by tensor Gauss-Hermite quadrature."""
    c = _validate(c)
    d = c.ndim
    t, w = np.polynomial.hermite_e.hermegauss(nodes)
    w = w / math.sqrt(2 * math.pi)
    s = math.sqrt(hbar / 2)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.zeros(pts.shape[0])
    for combo in itertools.product(range(nodes), repeat=d):
        shift = s * t[list(combo)]
        weight = float(np.prod(w[list(combo)]))
        out += weight * evaluate(c, *(pts[:, k] + shift[k] for k in range(d)))
    return out
