"""Periodic box discretization, normalized FFTs and 2/3-rule dealiasing.

Fields live on an ``n x n x n`` grid over the torus ``[0, L)^3``.  Fourier
coefficients use the *forward* normalization, so that a single mode
``exp(i k.x)`` has exactly one nonzero coefficient, equal to 1::

    f(x) = sum_k  f_hat(k) exp(i k.x)

The Nyquist plane of every axis is treated as unrepresentable: it carries a
zero derivative wavenumber and is excluded from the dealiasing mask, so it
never enters a product.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError, UsageError

__all__ = [
    "Grid3",
    "ScalarField",
    "VectorField3",
    "make_grid",
    "transform",
    "pointwise_product",
]

SPACE = "space"
FOURIER = "fourier"


def fft3(values: np.ndarray) -> np.ndarray:
    """Forward-normalized FFT over the last three axes."""
    return sfft.fftn(values, axes=(-3, -2, -1), norm="forward")


def ifft3(hat: np.ndarray) -> np.ndarray:
    """Inverse of :func:`fft3` (plain Fourier synthesis)."""
    return sfft.ifftn(hat, axes=(-3, -2, -1), norm="forward")


@dataclass(frozen=True)
class Grid3:
    """Uniform periodic grid with wavenumber tables and a dealiasing mask.

    Use :func:`make_grid` to construct; the dataclass itself does not
    validate. Instances are immutable and safe to share.
    """

    n: int
    L: float = 2 * np.pi

    @cached_property
    def dx(self) -> float:
        return self.L / self.n

    @cached_property
    def cell_volume(self) -> float:
        return self.dx**3

    @cached_property
    def volume(self) -> float:
        return self.L**3

    @cached_property
    def mode_index(self) -> np.ndarray:
        """Integer mode numbers per axis in FFT order; Nyquist stored as +n/2."""
        k = np.fft.fftfreq(self.n, d=1.0 / self.n).astype(int)
        k[self.n // 2] = self.n // 2
        return k

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Per-axis table xi_j in (2 pi / L) {-n/2+1, ..., n/2}, FFT order."""
        return (2 * np.pi / self.L) * self.mode_index

    @cached_property
    def derivative_wavenumbers(self) -> np.ndarray:
        """Wavenumbers used for differentiation: the Nyquist entry is zeroed."""
        kd = self.wavenumbers.copy()
        kd[self.n // 2] = 0.0
        return kd

    @cached_property
    def k(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable derivative wavenumber arrays (k1, k2, k3)."""
        kd = self.derivative_wavenumbers
        n = self.n
        return (kd.reshape(n, 1, 1), kd.reshape(1, n, 1), kd.reshape(1, 1, n))

    @cached_property
    def k_stack(self) -> np.ndarray:
        """Dense ``(3, n, n, n)`` array of derivative wavenumbers."""
        shape = (self.n,) * 3
        return np.stack([np.broadcast_to(kj, shape) for kj in self.k])

    @cached_property
    def k2(self) -> np.ndarray:
        """|xi|^2 on the derivative wavenumbers."""
        k1, k2, k3 = self.k
        return k1**2 + k2**2 + k3**2

    @cached_property
    def kabs(self) -> np.ndarray:
        return np.sqrt(self.k2)

    @cached_property
    def nonzero(self) -> np.ndarray:
        """Modes with a nonzero derivative wavenumber."""
        return self.k2 > 0

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """True where |xi_j| <= (2/3) (pi n / L) on every axis.

        In integer mode numbers this is ``3 |k_j| <= n``.
        """
        keep = 3 * np.abs(self.mode_index) <= self.n
        return keep[:, None, None] & keep[None, :, None] & keep[None, None, :]

    @cached_property
    def nyquist_free(self) -> np.ndarray:
        """All modes except those on a Nyquist plane."""
        keep = np.abs(self.mode_index) < self.n // 2
        return keep[:, None, None] & keep[None, :, None] & keep[None, None, :]

    @cached_property
    def coordinates(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = np.arange(self.n) * self.dx
        n = self.n
        return (x.reshape(n, 1, 1), x.reshape(1, n, 1), x.reshape(1, 1, n))

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    def dealias(self, hat: np.ndarray) -> np.ndarray:
        return np.where(self.dealias_mask, hat, 0.0)

    def integrate(self, values: np.ndarray) -> float | complex:
        """Plain grid-sum quadrature of a space-representation array."""
        return values.sum(axis=(-3, -2, -1)) * self.cell_volume

    def l2_norm(self, values: np.ndarray) -> float:
        """L2 norm of space values; leading axes are treated as components."""
        return float(np.sqrt(np.sum(np.abs(values) ** 2) * self.cell_volume))

    def l2_norm_hat(self, hat: np.ndarray) -> float:
        """L2 norm from Fourier coefficients (Parseval)."""
        return float(np.sqrt(np.sum(np.abs(hat) ** 2) * self.volume))

    def mode(self, k: tuple[int, int, int]) -> np.ndarray:
        """Space values of exp(i (2 pi / L) k.x) for integer mode numbers k."""
        x1, x2, x3 = self.coordinates
        scale = 2 * np.pi / self.L
        return np.exp(1j * scale * (k[0] * x1 + k[1] * x2 + k[2] * x3))

    def mode_slot(self, k: tuple[int, int, int]) -> tuple[int, int, int]:
        """Array index of integer mode ``k`` in FFT order."""
        return tuple(int(kj) % self.n for kj in k)


def make_grid(n: int, L: float = 2 * np.pi) -> Grid3:
    """Build a validated :class:`Grid3`.

    Raises
    ------
    ConfigurationError
        If ``n`` is odd or outside ``[8, 512]``, or ``L <= 0``.
    """
    if int(n) != n:
        raise ConfigurationError(f"grid size n must be an integer, got {n!r}")
    n = int(n)
    if n % 2:
        raise ConfigurationError(f"grid size n must be even, got {n}")
    if not 8 <= n <= 512:
        raise ConfigurationError(f"grid size n must lie in [8, 512], got {n}")
    if not (np.isfinite(L) and L > 0):
        raise ConfigurationError(f"box length L must be positive, got {L}")
    return Grid3(n=n, L=float(L))


@dataclass(frozen=True, eq=False)
class ScalarField:
    """A complex or real scalar field on a grid, in one representation.

    ``values`` holds space samples or forward-normalized Fourier
    coefficients according to ``representation``. ``real`` tags fields that
    are real in space (conjugate symmetric in Fourier).
    """

    grid: Grid3
    values: np.ndarray
    representation: str = SPACE
    real: bool = False

    def __post_init__(self):
        if self.representation not in (SPACE, FOURIER):
            raise UsageError(f"unknown representation {self.representation!r}")
        if self.values.shape != self.grid.shape:
            raise UsageError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    @classmethod
    def from_space(cls, grid: Grid3, values, real: bool | None = None) -> ScalarField:
        values = np.asarray(values)
        if real is None:
            real = not np.iscomplexobj(values)
        dtype = float if real else complex
        return cls(grid, np.array(values, dtype=dtype), SPACE, real)

    @classmethod
    def from_hat(cls, grid: Grid3, hat, real: bool = False) -> ScalarField:
        return cls(grid, np.asarray(hat, dtype=complex), FOURIER, real)

    @classmethod
    def zeros(cls, grid: Grid3, real: bool = True) -> ScalarField:
        return cls.from_space(grid, np.zeros(grid.shape), real=real)

    @property
    def hat(self) -> np.ndarray:
        """Fourier coefficients, transforming if needed."""
        if self.representation == FOURIER:
            return self.values
        return fft3(self.values)

    @property
    def x(self) -> np.ndarray:
        """Space values, transforming if needed; real dtype for real fields."""
        if self.representation == SPACE:
            return self.values
        out = ifft3(self.values)
        return out.real if self.real else out

    def to_space(self) -> ScalarField:
        return self if self.representation == SPACE else transform(self, "inverse")

    def to_fourier(self) -> ScalarField:
        return self if self.representation == FOURIER else transform(self, "forward")

    def l2_norm(self) -> float:
        if self.representation == FOURIER:
            return self.grid.l2_norm_hat(self.values)
        return self.grid.l2_norm(self.values)

    def mean(self) -> complex | float:
        m = self.hat[0, 0, 0]
        return float(m.real) if self.real else complex(m)


@dataclass(frozen=True, eq=False)
class VectorField3:
    """Three scalar components sharing one grid and reality tag."""

    components: tuple[ScalarField, ScalarField, ScalarField]

    def __post_init__(self):
        if len(self.components) != 3:
            raise UsageError("a VectorField3 needs exactly three components")
        g = self.components[0].grid
        if any(c.grid != g for c in self.components):
            raise UsageError("vector components live on different grids")

    @classmethod
    def from_hat(cls, grid: Grid3, hat: np.ndarray, real: bool = False) -> VectorField3:
        return cls(tuple(ScalarField.from_hat(grid, hat[j], real) for j in range(3)))

    @classmethod
    def from_space(cls, grid: Grid3, values, real: bool | None = None) -> VectorField3:
        return cls(tuple(ScalarField.from_space(grid, values[j], real) for j in range(3)))

    @classmethod
    def zeros(cls, grid: Grid3) -> VectorField3:
        return cls.from_space(grid, np.zeros((3,) + grid.shape), real=True)

    @property
    def grid(self) -> Grid3:
        return self.components[0].grid

    @property
    def real(self) -> bool:
        return all(c.real for c in self.components)

    @property
    def hat(self) -> np.ndarray:
        return np.stack([c.hat for c in self.components])

    @property
    def x(self) -> np.ndarray:
        return np.stack([c.x for c in self.components])

    def __getitem__(self, j: int) -> ScalarField:
        return self.components[j]

    def __iter__(self):
        return iter(self.components)

    def l2_norm(self) -> float:
        return float(np.sqrt(sum(c.l2_norm() ** 2 for c in self.components)))


def transform(field: ScalarField, direction: str) -> ScalarField:
    """Move a field between space and Fourier representation.

    ``direction`` is ``"forward"`` (space -> Fourier) or ``"inverse"``.
    """
    if direction == "forward":
        if field.representation != SPACE:
            raise UsageError("forward transform needs a space-representation field")
        return ScalarField(field.grid, fft3(field.values), FOURIER, field.real)
    if direction == "inverse":
        if field.representation != FOURIER:
            raise UsageError("inverse transform needs a Fourier-representation field")
        out = ifft3(field.values)
        return ScalarField(field.grid, out.real if field.real else out, SPACE, field.real)
    raise UsageError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def dealiased_product_hat(grid: Grid3, f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Fourier coefficients of the masked product of two space arrays."""
    return grid.dealias(fft3(f * g))


def pointwise_product(f: ScalarField, g: ScalarField) -> ScalarField:
    """Dealiased product ``f g``, returned in space representation.

    Both factors are first truncated to the 2/3 mask, multiplied on the
    grid, and the product is truncated again.
    """
    if f.grid != g.grid:
        raise UsageError("pointwise_product: fields live on different grids")
    grid = f.grid
    fx = ifft3(grid.dealias(f.hat))
    gx = ifft3(grid.dealias(g.hat))
    real = f.real and g.real
    hat = dealiased_product_hat(grid, fx, gx)
    return ScalarField.from_hat(grid, hat, real).to_space()
