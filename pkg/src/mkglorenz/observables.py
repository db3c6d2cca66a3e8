"""Physical observables and constraint residuals of a half-wave state.

Sign conventions: ``D_mu = d_mu - i A_mu`` with metric ``diag(-1, 1, 1, 1)``,
``E = grad A0 - d_t A``, ``B = curl A``, the Maxwell equations
``div E = rho`` and ``curl B - d_t E = J``, and the current
``J_mu = -Im(phi conj(D_mu phi))``::

    rho =  Im(phi conj(d_t phi)) + |phi|^2 A0
    J   = -Im(phi grad conj(phi)) - |phi|^2 A

This is the sign for which the energy below is conserved; the opposite
sign conserves ``E_phi - E_field`` instead.

Densities that enter the evolution (rho, J) are computed with dealiased
products, exactly as in the right-hand side. The energy is a plain grid-sum
quadrature of undealiased pointwise values.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass, fields

import numpy as np

from .gauge_data import CauchyData, HalfWaveState, PotentialData, reconstruct_hat
from .grid import Grid3, ScalarField, VectorField3, fft3, ifft3
from .multipliers import curl_hat, divergence_hat, gradient_hat

__all__ = [
    "DiagnosticsRecord",
    "CSV_HEADER",
    "em_fields",
    "current",
    "energy",
    "initial_energy",
    "interaction_energy",
    "constraint_residuals",
    "lorenz_residual",
]


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One row of time-series diagnostics.

    Attributes
    ----------
    t : float
    energy : float
        Total energy.
    charge : float
        ``int rho dx``.
    lorenz_res, gauss_res, divB_res : float
        L2 norms of ``d_t A0 - div A``, ``div E - rho`` and ``div B``.
    phi_l2, phi_h1 : float
        ``||phi||_{L2}`` and ``(||phi||^2 + ||grad phi||^2)^{1/2}``.
    A_norm : float
        L2 norm of the four potential components together.
    max_field : float
        Largest pointwise value of ``|phi|``, ``|E|`` or ``|B|``.
    """

    t: float
    energy: float
    charge: float
    lorenz_res: float
    gauss_res: float
    divB_res: float
    phi_l2: float
    phi_h1: float
    A_norm: float
    max_field: float

    def as_row(self) -> list[str]:
        """Values formatted with 17 significant digits."""
        return [f"{v:.17g}" for v in astuple(self)]


CSV_HEADER = [f.name for f in fields(DiagnosticsRecord)]


def _em_hat(grid: Grid3, A_hat: np.ndarray, dtA_hat: np.ndarray):
    E = gradient_hat(grid, A_hat[0]) - dtA_hat[1:]
    B = curl_hat(grid, A_hat[1:])
    return E, B


def em_fields(A, dtA) -> tuple[VectorField3, VectorField3]:
    """``E = grad A0 - d_t A`` and ``B = curl A`` (Fourier representation).

    The mean of ``B`` is 0; the mean of ``E`` is ``-mean(d_t A)``.
    """
    grid = A[0].grid
    E, B = _em_hat(grid, np.stack([a.hat for a in A]), np.stack([a.hat for a in dtA]))
    return VectorField3.from_hat(grid, E, real=True), VectorField3.from_hat(grid, B, real=True)


def _current_hat(grid: Grid3, phi_hat, dtphi_hat, A_hat):
    """Dealiased ``(rho, J)`` coefficient arrays from mask-projected inputs."""
    phi = ifft3(grid.dealias(phi_hat))
    dtphi = ifft3(grid.dealias(dtphi_hat))
    grad = ifft3(gradient_hat(grid, grid.dealias(phi_hat)))
    A = ifft3(grid.dealias(A_hat)).real
    abs2 = ifft3(grid.dealias(fft3((phi * np.conj(phi)).real))).real
    rho = np.imag(phi * np.conj(dtphi)) + A[0] * abs2
    J = -np.imag(phi * np.conj(grad)) - A[1:] * abs2
    return grid.dealias(fft3(rho)), grid.dealias(fft3(J))


def current(phi: ScalarField, dtphi: ScalarField, A) -> tuple[ScalarField, VectorField3]:
    """Charge density and current, dealiased, Fourier representation."""
    grid = phi.grid
    rho, J = _current_hat(grid, phi.hat, dtphi.hat, np.stack([a.hat for a in A]))
    return ScalarField.from_hat(grid, rho, real=True), VectorField3.from_hat(grid, J, real=True)


def _energy_density_integral(grid: Grid3, m, phi_hat, dtphi_hat, A_hat, dtA_hat) -> float:
    phi = ifft3(phi_hat)
    A = ifft3(A_hat).real
    d0 = ifft3(dtphi_hat) - 1j * A[0] * phi
    dj = ifft3(gradient_hat(grid, phi_hat)) - 1j * A[1:] * phi
    E_hat, B_hat = _em_hat(grid, A_hat, dtA_hat)
    E = ifft3(E_hat).real
    B = ifft3(B_hat).real
    density = (
        np.abs(d0) ** 2
        + np.sum(np.abs(dj) ** 2, axis=0)
        + m * m * np.abs(phi) ** 2
        + np.sum(E**2, axis=0)
        + np.sum(B**2, axis=0)
    )
    return 0.5 * float(grid.integrate(density))


def energy(state: HalfWaveState) -> float:
    """``1/2 int (|D phi|^2 + m^2 |phi|^2 + |E|^2 + |B|^2) dx``.

    ``|D phi|^2`` sums all four covariant components, with the time
    component ``(d_t - i A0) phi``.
    """
    phi, dtphi, A, dtA = reconstruct_hat(state)
    return _energy_density_integral(state.grid, state.m, phi, dtphi, A, dtA)


def interaction_energy(state: HalfWaveState) -> float:
    """Coupling part of the energy, ``1/2 int (|D phi|^2 - |d phi|^2) dx``.

    The difference between the covariant and the plain kinetic terms of the
    scalar field; its size relative to :func:`energy` measures how strongly
    the potentials act on ``phi``.
    """
    grid = state.grid
    phi_hat, dtphi_hat, A_hat, _ = reconstruct_hat(state)
    phi = ifft3(phi_hat)
    A = ifft3(A_hat).real
    dtphi = ifft3(dtphi_hat)
    grad = ifft3(gradient_hat(grid, phi_hat))
    covariant = np.abs(dtphi - 1j * A[0] * phi) ** 2 + np.sum(np.abs(grad - 1j * A[1:] * phi) ** 2, axis=0)
    plain = np.abs(dtphi) ** 2 + np.sum(np.abs(grad) ** 2, axis=0)
    return 0.5 * float(grid.integrate(covariant - plain))


def initial_energy(cd: CauchyData, pd: PotentialData) -> float:
    """Energy of Cauchy data, ``1/2 int (|U0|^2 + |U|^2 + m^2|phi0|^2 + |E0|^2 + |B0|^2)``.

    ``U0 = phi1`` and ``U = grad phi0 - i phi0 a``.
    """
    grid = cd.grid
    phi0 = cd.phi0.x
    a = pd.a_vec.x
    U = ifft3(gradient_hat(grid, cd.phi0.hat)) - 1j * phi0 * a
    density = (
        np.abs(cd.phi1.x) ** 2
        + np.sum(np.abs(U) ** 2, axis=0)
        + cd.m**2 * np.abs(phi0) ** 2
        + np.sum(cd.E0.x**2, axis=0)
        + np.sum(cd.B0.x**2, axis=0)
    )
    return 0.5 * float(grid.integrate(density))


def lorenz_residual(state: HalfWaveState) -> float:
    """``||d_t A0 - div A||_{L2}``."""
    _, _, A, dtA = reconstruct_hat(state)
    return state.grid.l2_norm_hat(dtA[0] - divergence_hat(state.grid, A[1:]))


def constraint_residuals(state: HalfWaveState) -> DiagnosticsRecord:
    """All diagnostics of a state, including the constraint residuals."""
    grid = state.grid
    phi, dtphi, A, dtA = reconstruct_hat(state)
    E_hat, B_hat = _em_hat(grid, A, dtA)
    rho_hat, _ = _current_hat(grid, phi, dtphi, A)
    lorenz = grid.l2_norm_hat(dtA[0] - divergence_hat(grid, A[1:]))
    gauss = grid.l2_norm_hat(divergence_hat(grid, E_hat) - rho_hat)
    div_b = grid.l2_norm_hat(divergence_hat(grid, B_hat))
    phi_l2 = grid.l2_norm_hat(phi)
    phi_h1 = float(np.sqrt(np.sum((1 + grid.k2) * np.abs(phi) ** 2) * grid.volume))
    E = ifft3(E_hat).real
    B = ifft3(B_hat).real
    max_field = max(
        float(np.max(np.abs(ifft3(phi)))),
        float(np.max(np.sqrt(np.sum(E**2, axis=0)))),
        float(np.max(np.sqrt(np.sum(B**2, axis=0)))),
    )
    return DiagnosticsRecord(
        t=float(state.t),
        energy=_energy_density_integral(grid, state.m, phi, dtphi, A, dtA),
        charge=float(rho_hat[0, 0, 0].real * grid.volume),
        lorenz_res=lorenz,
        gauss_res=gauss,
        divB_res=div_b,
        phi_l2=phi_l2,
        phi_h1=phi_h1,
        A_norm=grid.l2_norm_hat(A),
        max_field=max_field,
    )
