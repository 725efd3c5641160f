"""Eigenvector-preserving spectral maps and spectrum reversal.

A monotonically increasing scalar map ``f`` applied to a symmetric operator
keeps its eigenvectors and their ordering while reshaping the eigenvalue
distribution.  Combining ``f`` with the reversal ``lambda* I - f(L)`` turns
the bottom-k eigenvectors of ``L`` into the top-k eigenvectors of the result,
which is what streaming top-k SVD solvers consume.

Two application strategies exist:

* exact maps (``log``, ``negexp``) go through a dense eigendecomposition and
  are desk-scale oracles;
* polynomial maps (``identity``, ``log-taylor``, ``negexp-taylor``,
  ``negexp-limit``) are applied with repeated sparse Laplacian matvecs and
  scale with the edge count.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .graph import (
    Graph,
    LaplacianOperator,
    build_laplacian,
    degree_bounds,
    dense_laplacian,
)
from .metrics import dense_eig

__all__ = [
    "SpectralTransform",
    "TransformedOperator",
    "scalar_map",
    "polynomial_coefficients",
    "choose_lambda_star",
    "exact_transform_dense",
    "apply_transform_matvec",
    "make_reversed_operator",
    "TRANSFORM_KINDS",
]

TRANSFORM_KINDS = (
    "identity",
    "log",
    "log-taylor",
    "negexp",
    "negexp-taylor",
    "negexp-limit",
)

_POLYNOMIAL_KINDS = {"identity", "log-taylor", "negexp-taylor", "negexp-limit"}
_LOG_KINDS = {"log", "log-taylor"}
_SERIES_KINDS = {"log-taylor", "negexp-taylor", "negexp-limit"}


@dataclass(frozen=True)
class SpectralTransform:
    """A tagged scalar spectrum map.

    ``ell`` is the series degree for the Taylor/limit kinds; ``epsilon``
    shifts the singular Laplacian before a logarithm.
    """

    kind: str
    ell: int | None = None
    epsilon: float = 1e-6

    def __post_init__(self):
        if self.kind not in TRANSFORM_KINDS:
            raise ValueError(f"unknown transform kind {self.kind!r}; "
                             f"expected one of {TRANSFORM_KINDS}")
        if self.kind in _SERIES_KINDS:
            min_ell = 0 if self.kind == "negexp-taylor" else 1
            if self.ell is None or self.ell < min_ell:
                raise ValueError(f"{self.kind} requires a series degree >= {min_ell}")
            if self.kind == "negexp-limit" and self.ell % 2 == 0:
                raise ValueError("negexp-limit requires an odd series degree")
        if self.kind in _LOG_KINDS and self.epsilon <= 0:
            raise ValueError("log transforms require epsilon > 0")

    @property
    def is_polynomial(self) -> bool:
        return self.kind in _POLYNOMIAL_KINDS

    @property
    def is_exact(self) -> bool:
        return not self.is_polynomial


def identity() -> SpectralTransform:
    return SpectralTransform("identity")


def exact_log(epsilon: float = 1e-6) -> SpectralTransform:
    return SpectralTransform("log", epsilon=epsilon)


def log_taylor(ell: int, epsilon: float = 1e-6) -> SpectralTransform:
    return SpectralTransform("log-taylor", ell=ell, epsilon=epsilon)


def exact_neg_exp() -> SpectralTransform:
    return SpectralTransform("negexp")


def neg_exp_taylor(ell: int) -> SpectralTransform:
    return SpectralTransform("negexp-taylor", ell=ell)


def neg_exp_limit(ell: int) -> SpectralTransform:
    return SpectralTransform("negexp-limit", ell=ell)


def scalar_map(t: SpectralTransform, lam):
    """Evaluate the scalar spectrum map f at one or many eigenvalues."""
    lam = np.asarray(lam, dtype=np.float64)
    if t.kind in _LOG_KINDS and np.any(lam + t.epsilon <= 0):
        raise ValueError("logarithm undefined: lambda + epsilon must be positive")
    if t.kind == "identity":
        out = lam.copy()
    elif t.kind == "log":
        out = np.log(lam + t.epsilon)
    elif t.kind == "log-taylor":
        y = lam + t.epsilon - 1.0
        out = np.zeros_like(y)
        term = np.ones_like(y)
        for i in range(1, t.ell + 1):
            term = term * y
            out += (1.0 if i % 2 == 1 else -1.0) * term / i
    elif t.kind == "negexp":
        out = -np.exp(-lam)
    elif t.kind == "negexp-taylor":
        out = np.zeros_like(lam)
        term = np.ones_like(lam)
        out -= term
        for i in range(1, t.ell + 1):
            term = term * (-lam) / i
            out -= term
    elif t.kind == "negexp-limit":
        out = -((1.0 - lam / t.ell) ** t.ell)
    else:  # pragma: no cover
        raise AssertionError(t.kind)
    return out if out.ndim else float(out)


def polynomial_coefficients(t: SpectralTransform) -> np.ndarray:
    """Monomial coefficients of a polynomial transform, constant term first.

    Only meaningful for the polynomial kinds; expanding high-degree series in
    the monomial basis is numerically delicate, so this is intended for the
    walk-sampling estimators at small degree.
    """
    if not t.is_polynomial:
        raise ValueError(f"{t.kind} has no polynomial expansion")
    if t.kind == "identity":
        return np.array([0.0, 1.0])
    if t.kind == "negexp-taylor":
        coeffs = np.array([-((-1.0) ** i) / math.factorial(i)
                           for i in range(t.ell + 1)])
        return coeffs
    if t.kind == "negexp-limit":
        base = np.array([1.0, -1.0 / t.ell])
        return -P.polypow(base, t.ell)
    # log-taylor: sum_i (-1)^{i+1} (lambda + eps - 1)^i / i
    shift = np.array([t.epsilon - 1.0, 1.0])
    out = np.zeros(t.ell + 1)
    power = np.array([1.0])
    for i in range(1, t.ell + 1):
        power = P.polymul(power, shift)
        out[: power.size] += ((1.0 if i % 2 == 1 else -1.0) / i) * power
    return out


def choose_lambda_star(t: SpectralTransform, lambda_upper: float) -> float:
    """Reversal shift strictly above the transformed spectrum's maximum.

    The negative-exponential family maps everything below zero, so zero is a
    valid shift.  The identity and log kinds get a 1% margin over the mapped
    degree bound.
    """
    if t.kind == "identity":
        return 1.01 * lambda_upper
    if t.kind in _LOG_KINDS:
        top = math.log(lambda_upper + t.epsilon)
        return top + 0.01 * abs(top)
    return 0.0


def exact_transform_dense(t: SpectralTransform, lap_dense: np.ndarray) -> np.ndarray:
    """Apply f through a dense eigendecomposition: ``V diag(f(lambda)) V^T``."""
    gt = dense_eig(lap_dense)  # validates symmetry and size
    mapped = scalar_map(t, gt.eigenvalues)
    return (gt.eigenvectors * mapped) @ gt.eigenvectors.T


@dataclass
class TransformedOperator:
    """Reversed spectrum operator ``v -> lambda* v - f(L) v``.

    Polynomial kinds evaluate f(L)v with repeated Laplacian matvecs (cost
    ``O(ell |E|)`` per application); exact kinds multiply by a precomputed
    dense f(L).  Immutable and safe to share across threads.
    """

    laplacian: LaplacianOperator
    transform: SpectralTransform
    lambda_star: float
    lambda_upper: float
    dense_f: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.transform.kind == "log-taylor" and \
                self.lambda_upper >= 2.0 - self.transform.epsilon:
            warnings.warn(
                "log-taylor series diverges when the spectrum radius reaches "
                f"2: degree bound {self.lambda_upper:.3g} >= "
                f"{2.0 - self.transform.epsilon:.3g}", RuntimeWarning)

    @property
    def n(self) -> int:
        return self.laplacian.n

    def apply(self, x: np.ndarray) -> np.ndarray:
        """The reversed matvec, accepting a vector or an (n, k) block."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[0] != self.n:
            raise ValueError("dimension mismatch in transformed matvec")
        t = self.transform
        if t.is_exact:
            if self.dense_f is None:
                raise ValueError(f"exact transform {t.kind!r} needs its dense "
                                 "oracle; build with make_reversed_operator")
            return self.lambda_star * x - self.dense_f @ x
        L = self.laplacian
        if t.kind == "identity":
            return self.lambda_star * x - L.matvec(x)
        if t.kind == "negexp-limit":
            w = x.copy()
            inv = 1.0 / t.ell
            for _ in range(t.ell):
                w -= inv * L.matvec(w)
            return self.lambda_star * x + w
        if t.kind == "negexp-taylor":
            coeffs = [-((-1.0) ** i) / math.factorial(i) for i in range(t.ell + 1)]
            w = coeffs[-1] * x
            for i in range(t.ell - 1, -1, -1):
                w = coeffs[i] * x + L.matvec(w)
            return self.lambda_star * x - w
        # log-taylor, Horner in y = L + (eps - 1) I
        shift = t.epsilon - 1.0
        coeffs = [0.0] + [(1.0 if i % 2 == 1 else -1.0) / i
                          for i in range(1, t.ell + 1)]
        w = coeffs[-1] * x
        for i in range(t.ell - 1, -1, -1):
            w = coeffs[i] * x + L.matvec(w) + shift * w
        return self.lambda_star * x - w

    __call__ = apply


def apply_transform_matvec(op: TransformedOperator, v: np.ndarray) -> np.ndarray:
    return op.apply(v)


def make_reversed_operator(g: Graph, transform: SpectralTransform,
                           mode: str = "unnormalized",
                           lambda_upper: float | None = None) -> TransformedOperator:
    """Build the reversed operator for a graph, choosing lambda* automatically.

    Exact transform kinds materialize f(L) through the dense oracle and are
    therefore restricted to desk-scale graphs.
    """
    lap = build_laplacian(g, mode)
    if lambda_upper is None:
        if mode == "normalized":
            lambda_upper = 2.0
        else:
            lambda_upper = degree_bounds(g).lambda_upper
    lam_star = choose_lambda_star(transform, lambda_upper)
    dense_f = None
    if transform.is_exact:
        dense_f = exact_transform_dense(transform, dense_laplacian(g, mode))
    return TransformedOperator(lap, transform, lam_star, lambda_upper, dense_f)
