"""Fourier multipliers: <nabla>_m, |nabla|, inverse Laplacian, Riesz
operators and the Helmholtz splitting of vector fields.

Every operator acts diagonally on Fourier coefficients. Symbols that are
singular or direction-dependent at xi = 0 carry an explicit zero-mode rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError, SingularOperatorError
from .grid import Grid3, ScalarField, VectorField3

__all__ = [
    "MultiplierSymbol",
    "apply_multiplier",
    "riesz_inverse_grad",
    "helmholtz_split",
    "gradient",
    "divergence",
    "curl",
    "klein_gordon_symbol",
]

KINDS = (
    "klein_gordon",
    "klein_gordon_inverse",
    "wave",
    "wave_inverse",
    "inverse_laplacian",
    "riesz_inverse_grad",
    "custom",
)
ZERO_MODE_RULES = ("zero", "natural", "identity", "reject")
# Symbols with no finite value at xi = 0.
_SINGULAR = {"wave_inverse", "inverse_laplacian", "riesz_inverse_grad"}


def klein_gordon_symbol(grid: Grid3, m: float) -> np.ndarray:
    """<xi>_m = sqrt(m^2 + |xi|^2)."""
    return np.sqrt(m * m + grid.k2)


def _safe_inverse(values: np.ndarray, where: np.ndarray) -> np.ndarray:
    out = np.zeros(values.shape, dtype=np.result_type(values, float))
    np.divide(1.0, values, out=out, where=where)
    return out


def inverse_wave_symbol(grid: Grid3) -> np.ndarray:
    """1/|xi| on nonzero modes, 0 at xi = 0."""
    return _safe_inverse(grid.kabs, grid.nonzero)


def inverse_laplacian_symbol(grid: Grid3) -> np.ndarray:
    """-1/|xi|^2 on nonzero modes, 0 at xi = 0."""
    return -_safe_inverse(grid.k2, grid.nonzero)


@dataclass(frozen=True)
class MultiplierSymbol:
    """A scalar Fourier multiplier with an explicit zero-mode rule.

    kind
        ``klein_gordon`` (<xi>_m), ``klein_gordon_inverse`` ((i<xi>_m)^-1),
        ``wave`` (|xi|), ``wave_inverse`` ((i|xi|)^-1), ``inverse_laplacian``
        (-1/|xi|^2), ``riesz_inverse_grad`` (component ``axis`` of
        i xi / (-|xi|^2)) or ``custom``.
    zero_mode_rule
        ``zero`` maps the mean to 0, ``natural`` uses the symbol's own value
        at xi = 0, ``identity`` passes the mean through unchanged, ``reject``
        raises if the input has a nonzero mean (and otherwise maps it to 0).
    """

    kind: str
    zero_mode_rule: str = "natural"
    m: float = 0.0
    axis: int = 0
    function: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown multiplier kind {self.kind!r}")
        if self.zero_mode_rule not in ZERO_MODE_RULES:
            raise ConfigurationError(f"unknown zero-mode rule {self.zero_mode_rule!r}")
        if self.kind in _SINGULAR and self.zero_mode_rule in ("identity", "natural"):
            raise ConfigurationError(
                f"{self.kind} is singular at xi = 0; zero_mode_rule must be 'zero' or 'reject'"
            )
        if self.kind == "klein_gordon_inverse" and self.m <= 0 and self.zero_mode_rule == "natural":
            raise ConfigurationError("(i<nabla>_0)^-1 is singular at xi = 0")
        if self.m < 0:
            raise ConfigurationError(f"mass must be non-negative, got {self.m}")
        if self.kind == "custom" and self.function is None:
            raise ConfigurationError("custom multiplier needs a symbol function")
        if self.axis not in (0, 1, 2):
            raise ConfigurationError(f"axis must be 0, 1 or 2, got {self.axis}")

    def evaluate(self, grid: Grid3) -> np.ndarray:
        """Symbol on every grid mode, with the zero mode already resolved."""
        kind = self.kind
        if kind == "klein_gordon":
            sym = klein_gordon_symbol(grid, self.m).astype(complex)
        elif kind == "klein_gordon_inverse":
            kg = klein_gordon_symbol(grid, self.m)
            sym = -1j * _safe_inverse(kg, kg > 0)
        elif kind == "wave":
            sym = grid.kabs.astype(complex)
        elif kind == "wave_inverse":
            sym = -1j * inverse_wave_symbol(grid)
        elif kind == "inverse_laplacian":
            sym = inverse_laplacian_symbol(grid).astype(complex)
        elif kind == "riesz_inverse_grad":
            sym = 1j * grid.k[self.axis] * inverse_laplacian_symbol(grid)
        else:
            k1, k2, k3 = grid.k
            sym = np.broadcast_to(self.function(k1, k2, k3), grid.shape).astype(complex)
        sym = np.array(np.broadcast_to(sym, grid.shape))
        rule = self.zero_mode_rule
        if rule in ("zero", "reject"):
            sym[0, 0, 0] = 0.0
        elif rule == "identity":
            sym[0, 0, 0] = 1.0
        return sym


def apply_multiplier(sym: MultiplierSymbol, f: ScalarField) -> ScalarField:
    """Multiply the Fourier coefficients of ``f`` by ``sym``.

    The result is returned in Fourier representation and is tagged real
    only when ``f`` is real and the symbol is Hermitian (real and even, or
    imaginary and odd).

    Raises
    ------
    SingularOperatorError
        Rule ``reject`` and ``f`` has a nonzero mean.
    """
    hat = f.hat
    if sym.zero_mode_rule == "reject":
        scale = max(float(np.max(np.abs(hat))), np.finfo(float).tiny)
        if abs(hat[0, 0, 0]) > 1e-13 * scale:
            raise SingularOperatorError(
                f"{sym.kind} applied to a field with nonzero mean {hat[0, 0, 0]:.3e}"
            )
    out = sym.evaluate(f.grid) * hat
    keeps_real = sym.kind in ("klein_gordon", "wave", "inverse_laplacian", "riesz_inverse_grad")
    return ScalarField.from_hat(f.grid, out, real=f.real and keeps_real)


def gradient_hat(grid: Grid3, hat: np.ndarray) -> np.ndarray:
    return np.stack([1j * kj * hat for kj in grid.k])


def divergence_hat(grid: Grid3, vhat: np.ndarray) -> np.ndarray:
    k1, k2, k3 = grid.k
    return 1j * (k1 * vhat[0] + k2 * vhat[1] + k3 * vhat[2])


def curl_hat(grid: Grid3, vhat: np.ndarray) -> np.ndarray:
    k1, k2, k3 = grid.k
    return 1j * np.stack(
        [
            k2 * vhat[2] - k3 * vhat[1],
            k3 * vhat[0] - k1 * vhat[2],
            k1 * vhat[1] - k2 * vhat[0],
        ]
    )


def riesz_inverse_grad_hat(grid: Grid3, hat: np.ndarray) -> np.ndarray:
    """Delta^-1 grad: component j is i xi_j / (-|xi|^2) f_hat, zero mode -> 0."""
    inv_lap = inverse_laplacian_symbol(grid)
    return np.stack([1j * kj * inv_lap * hat for kj in grid.k])


def helmholtz_split_hat(grid: Grid3, vhat: np.ndarray):
    """Divergence-free part, curl-free part and mean of a vector field.

    Works on a ``(3, n, n, n)`` coefficient array and returns
    ``(df_hat, cf_hat, mean)``; modes with a zero derivative wavenumber
    other than xi = 0 (Nyquist planes) are dropped.
    """
    inv_lap = inverse_laplacian_symbol(grid)
    cf = riesz_inverse_grad_hat(grid, divergence_hat(grid, vhat))
    df = -inv_lap * curl_hat(grid, curl_hat(grid, vhat))
    mean = vhat[:, 0, 0, 0].copy()
    return df, cf, mean


def gradient(f: ScalarField) -> VectorField3:
    return VectorField3.from_hat(f.grid, gradient_hat(f.grid, f.hat), f.real)


def divergence(v: VectorField3) -> ScalarField:
    return ScalarField.from_hat(v.grid, divergence_hat(v.grid, v.hat), v.real)


def curl(v: VectorField3) -> VectorField3:
    return VectorField3.from_hat(v.grid, curl_hat(v.grid, v.hat), v.real)


def riesz_inverse_grad(f: ScalarField) -> VectorField3:
    """Apply Delta^-1 grad to a scalar field; the zero mode maps to 0."""
    return VectorField3.from_hat(f.grid, riesz_inverse_grad_hat(f.grid, f.hat), f.real)


def helmholtz_split(V: VectorField3) -> tuple[VectorField3, VectorField3, np.ndarray]:
    """Split ``V = V_df + V_cf + V_mean``.

    ``V_df = -Delta^-1 curl curl V`` and ``V_cf = Delta^-1 grad div V`` on
    nonzero modes; the mean is returned as three numbers (real parts for a
    real field).
    """
    grid = V.grid
    df, cf, mean = helmholtz_split_hat(grid, V.hat)
    if V.real:
        mean = mean.real
    return (
        VectorField3.from_hat(grid, df, V.real),
        VectorField3.from_hat(grid, cf, V.real),
        mean,
    )
