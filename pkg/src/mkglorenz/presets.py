"""Ready-made constraint-compatible initial data.

All profiles are band limited (trigonometric polynomials of low degree), so
they are represented exactly on any grid whose dealiasing mask contains
their spectrum, and the finite-propagation picture of localized lumps is
kept while staying smooth and periodic.

``decoupled_real``
    Real ``phi0`` and ``phi1`` with ``E0 = B0 = 0``. The current vanishes
    identically, the potentials stay zero and ``phi`` follows the linear
    Klein-Gordon flow.
``gaussian_pulse``
    A complex lump ``a b(x) exp(i p.x)`` moving with envelope velocity ``v``
    and carrying a charge dipole of strength ``omega``, plus divergence-free
    electric and magnetic modes.
``neutral_pair``
    Two lumps with opposite phase gradients and opposite charges.
    ``imbalance != 0`` breaks neutrality on purpose.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError
from .gauge_data import CauchyData, complete_electric_data
from .grid import Grid3, ScalarField, VectorField3, fft3, ifft3

__all__ = ["bump", "decoupled_real", "gaussian_pulse", "neutral_pair", "PRESETS", "make_preset"]


def bump(grid: Grid3, center=(np.pi, np.pi, np.pi), kappa: float = 2.0, kcut: int = 3) -> np.ndarray:
    """Band-limited periodic bump centred at ``center``.

    The product of von Mises profiles ``exp(kappa (cos y_j - 1))`` with
    ``y = 2 pi (x - c) / L``, truncated to integer modes ``|k_j| <= kcut``.
    Real, peak value close to 1.
    """
    if kcut < 0 or 3 * kcut > grid.n:
        raise ConfigurationError(f"kcut must lie in [0, n/3], got {kcut}")
    x = grid.coordinates
    scale = 2 * np.pi / grid.L
    profile = np.ones(grid.shape)
    for xj, cj in zip(x, center):
        profile = profile * np.exp(kappa * (np.cos(scale * (xj - cj)) - 1.0))
    idx = np.abs(grid.mode_index) <= kcut
    keep = idx[:, None, None] & idx[None, :, None] & idx[None, None, :]
    return ifft3(np.where(keep, fft3(profile), 0.0)).real


def _check_mode(grid: Grid3, p, name: str) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (3,) or np.any(p != np.round(p)):
        raise ConfigurationError(f"{name} must be three integers (periodicity), got {p.tolist()}")
    return p * (2 * np.pi / grid.L)


def _plane(grid: Grid3, p) -> np.ndarray:
    x1, x2, x3 = grid.coordinates
    return np.exp(1j * (p[0] * x1 + p[1] * x2 + p[2] * x3))


def decoupled_real(
    grid: Grid3, m: float = 1.0, amplitude: float = 0.5, kappa: float = 2.0, kcut: int = 3, velocity: float = 0.5
) -> CauchyData:
    """Real scalar data with no electromagnetic field."""
    c = grid.L / 2
    phi0 = amplitude * bump(grid, (c, c, c), kappa, kcut)
    phi1 = velocity * amplitude * bump(grid, (c + grid.L / 8, c, c - grid.L / 8), kappa, kcut)
    zero = VectorField3.zeros(grid)
    return CauchyData(
        ScalarField.from_space(grid, phi0.astype(complex), real=False),
        ScalarField.from_space(grid, phi1.astype(complex), real=False),
        zero,
        zero,
        m,
    )


def gaussian_pulse(
    grid: Grid3,
    m: float = 1.0,
    amplitude: float = 1.0,
    kappa: float = 2.0,
    kcut: int = 3,
    momentum=(1, 0, 0),
    velocity=(0.3, 0.0, 0.0),
    omega: float = 1.0,
    field_amplitude: float = 0.5,
) -> CauchyData:
    """Moving complex lump with a neutral charge dipole and free EM modes.

    ``phi0 = a b exp(i p.x)`` and
    ``phi1 = a exp(i p.x) (-v.grad b + i omega sin(y_1) b)``, where ``y_1``
    is the first coordinate measured from the lump centre. The envelope
    translation carries no charge and the ``omega`` term gives a dipole
    whose total charge vanishes by symmetry. ``E0`` adds the Gauss-law
    curl-free part to the divergence-free modes ``field_amplitude *
    (sin y_3, cos y_1, 0)``, and ``B0 = field_amplitude * (cos y_2, 0, cos y_1)``
    with ``y = 2 pi x / L``.
    """
    c = grid.L / 2
    scale = 2 * np.pi / grid.L
    p = _check_mode(grid, momentum, "momentum")
    v = np.asarray(velocity, dtype=float)
    b_hat = fft3(bump(grid, (c, c, c), kappa, kcut))
    b = ifft3(b_hat).real
    grad_b = [ifft3(1j * kj * b_hat).real for kj in grid.k]
    wave = amplitude * _plane(grid, p)
    x1, x2, x3 = grid.coordinates
    phi0 = wave * b
    phi1 = wave * (-(v[0] * grad_b[0] + v[1] * grad_b[1] + v[2] * grad_b[2]) + 1j * omega * np.sin(scale * (x1 - c)) * b)
    shape = grid.shape
    f = field_amplitude
    E_df = np.stack(
        [np.broadcast_to(f * np.sin(scale * x3), shape), np.broadcast_to(f * np.cos(scale * x1), shape), np.zeros(shape)]
    )
    B0 = np.stack(
        [np.broadcast_to(f * np.cos(scale * x2), shape), np.zeros(shape), np.broadcast_to(f * np.cos(scale * x1), shape)]
    )
    phi0_f = ScalarField.from_space(grid, phi0)
    phi1_f = ScalarField.from_space(grid, phi1)
    E0 = complete_electric_data(phi0_f, phi1_f, VectorField3.from_space(grid, E_df, real=True))
    return CauchyData(phi0_f, phi1_f, E0, VectorField3.from_space(grid, B0, real=True), m)


def neutral_pair(
    grid: Grid3,
    m: float = 1.0,
    amplitude: float = 0.5,
    kappa: float = 2.0,
    kcut: int = 3,
    momentum=(1, 0, 0),
    omega: float = 1.0,
    separation: float | None = None,
    imbalance: float = 0.0,
) -> CauchyData:
    """Two lumps ``l1, l2`` with phases ``exp(+- i p.x)`` and opposite charge.

    ``phi0 = l1 + l2`` and ``phi1 = -i omega (l1 - (1 + imbalance) l2)``.
    With ``imbalance = 0`` the total charge vanishes; any other value makes
    the data incompatible with the torus and construction fails.
    """
    c = grid.L / 2
    d = grid.L / 4 if separation is None else separation
    p = _check_mode(grid, momentum, "momentum")
    l1 = amplitude * bump(grid, (c - d / 2, c, c), kappa, kcut) * _plane(grid, p)
    l2 = amplitude * bump(grid, (c + d / 2, c, c), kappa, kcut) * _plane(grid, -p)
    phi0 = ScalarField.from_space(grid, l1 + l2)
    phi1 = ScalarField.from_space(grid, -1j * omega * (l1 - (1 + imbalance) * l2))
    E0 = complete_electric_data(phi0, phi1, VectorField3.zeros(grid))
    return CauchyData(phi0, phi1, E0, VectorField3.zeros(grid), m)


PRESETS = {
    "decoupled_real": decoupled_real,
    "gaussian_pulse": gaussian_pulse,
    "neutral_pair": neutral_pair,
}


def make_preset(name: str, grid: Grid3, m: float, **params) -> CauchyData:
    """Build preset ``name``; unknown names or parameters raise ConfigurationError."""
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ConfigurationError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}") from None
    try:
        return factory(grid, m, **params)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for preset {name!r}: {exc}") from None
