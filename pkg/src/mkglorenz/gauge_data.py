"""Constraint-compatible Cauchy data, the half-wave split and gauge changes.

The physical initial condition is the quadruple ``(phi0, phi1, E0, B0)``.
From it we build Lorenz-gauge potentials with ``a0 = adot0 = 0``,
``a = -Delta^-1 curl B0`` and ``adot = -E0``, and split every field into
half-waves::

    phi_pm = 1/2 (phi0 +- (i<nabla>_m)^-1 phi1)
    A_pm   = 1/2 (a    +- (i|nabla|)^-1  adot)      (nonzero modes)

The spatially constant modes of the potentials cannot be split (the
symbol ``|xi|`` vanishes there) and are carried as separate registers
``(mean A_mu, mean dA_mu/dt)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, ConstraintError, UsageError
from .grid import Grid3, ScalarField, VectorField3, fft3, ifft3
from .multipliers import (
    curl_hat,
    divergence_hat,
    gradient_hat,
    inverse_laplacian_symbol,
    inverse_wave_symbol,
    klein_gordon_symbol,
    riesz_inverse_grad_hat,
)

__all__ = [
    "CauchyData",
    "PotentialData",
    "HalfWaveState",
    "GaugedFields",
    "FreeWaveGauge",
    "charge_density_hat",
    "complete_electric_data",
    "build_potential_data",
    "split_half_waves",
    "reconstruct",
    "gauge_transform",
    "normalizing_gauge",
    "regauge_state",
]

CONSTRAINT_TOL = 1e-12


def charge_density_hat(grid: Grid3, phi0_hat: np.ndarray, phi1_hat: np.ndarray) -> np.ndarray:
    """Dealiased Fourier coefficients of Im(phi0 conj(phi1)).

    This is the charge density at ``t = 0`` when ``a0 = 0``.
    """
    p0 = ifft3(grid.dealias(phi0_hat))
    p1 = ifft3(grid.dealias(phi1_hat))
    return grid.dealias(fft3(np.imag(p0 * np.conj(p1))))


def _relative(residual: float, scale: float) -> float:
    return residual / scale if scale > 0 else residual


def _gradient_norm(grid: Grid3, vhat: np.ndarray) -> float:
    """sqrt(sum_j ||grad v_j||^2) from Fourier coefficients."""
    return float(np.sqrt(np.sum(grid.k2 * np.abs(vhat) ** 2) * grid.volume))


@dataclass(frozen=True, eq=False)
class CauchyData:
    """Physical initial data ``(phi0, phi1, E0, B0)`` and the mass ``m``.

    Call :meth:`validate` (done by :func:`split_half_waves`) to check the
    Gauss law, ``div B0 = 0`` and total charge neutrality, which is forced
    on a periodic box because ``int div E = 0``.
    """

    phi0: ScalarField
    phi1: ScalarField
    E0: VectorField3
    B0: VectorField3
    m: float

    @property
    def grid(self) -> Grid3:
        return self.phi0.grid

    def residuals(self) -> dict[str, float]:
        """Relative residuals of the three constraints."""
        grid = self.grid
        Ehat, Bhat = self.E0.hat, self.B0.hat
        s_hat = charge_density_hat(grid, self.phi0.hat, self.phi1.hat)
        div_b = grid.l2_norm_hat(divergence_hat(grid, Bhat))
        gauss = grid.l2_norm_hat(divergence_hat(grid, Ehat) - s_hat)
        # |Im(phi0 conj(phi1))| <= max|phi0| |phi1| bounds the size of the charge term
        s_scale = float(np.max(np.abs(self.phi0.x))) * self.phi1.l2_norm()
        charge = abs(s_hat[0, 0, 0]) * grid.volume
        charge_scale = grid.l2_norm_hat(self.phi0.hat) * grid.l2_norm_hat(self.phi1.hat)
        return {
            "div_B0": _relative(div_b, _gradient_norm(grid, Bhat)),
            "gauss": _relative(gauss, _gradient_norm(grid, Ehat) + s_scale),
            "charge": _relative(charge, charge_scale),
        }

    def validate(self, tol: float = CONSTRAINT_TOL) -> None:
        """Raise :class:`ConstraintError` if a constraint fails.

        The message names the violated relation.
        """
        if self.m <= 0:
            raise ConfigurationError(f"mass must be positive, got {self.m}")
        if not (self.E0.real and self.B0.real):
            raise ConstraintError("E0 and B0 must be real vector fields")
        res = self.residuals()
        if res["charge"] > tol:
            raise ConstraintError(
                "total charge int Im(phi0 conj(phi1)) dx must vanish on the torus "
                f"(relative value {res['charge']:.3e}); use charge-neutral data"
            )
        if res["div_B0"] > tol:
            raise ConstraintError(f"div B0 = 0 violated (relative residual {res['div_B0']:.3e})")
        if res["gauss"] > tol:
            raise ConstraintError(
                "Gauss law div E0 = Im(phi0 conj(phi1)) violated "
                f"(relative residual {res['gauss']:.3e})"
            )

    def data_norm(self) -> float:
        """||phi0||_{H^1} + ||phi1|| + ||E0|| + ||B0||, used to scale residuals."""
        grid = self.grid
        p0 = self.phi0.hat
        h1 = np.sqrt(np.sum((1 + grid.k2) * np.abs(p0) ** 2) * grid.volume)
        return float(h1 + self.phi1.l2_norm() + self.E0.l2_norm() + self.B0.l2_norm())


@dataclass(frozen=True, eq=False)
class PotentialData:
    """Lorenz-gauge potentials at ``t = 0`` built from Cauchy data."""

    a0: ScalarField
    adot0: ScalarField
    a_vec: VectorField3
    adot_vec: VectorField3


def complete_electric_data(
    phi0: ScalarField, phi1: ScalarField, E0_df: VectorField3, tol: float = CONSTRAINT_TOL
) -> VectorField3:
    """Add the curl-free part of ``E0`` fixed by the Gauss law.

    Returns ``E0 = E0_df + Delta^-1 grad Im(phi0 conj(phi1))``, so that
    ``div E0 = Im(phi0 conj(phi1))``, the charge density at ``t = 0``.

    Raises
    ------
    ConstraintError
        If the total charge ``int Im(phi0 conj(phi1)) dx`` is nonzero.
    """
    grid = phi0.grid
    if phi1.grid != grid or E0_df.grid != grid:
        raise UsageError("complete_electric_data: fields live on different grids")
    s_hat = charge_density_hat(grid, phi0.hat, phi1.hat)
    scale = grid.l2_norm_hat(phi0.hat) * grid.l2_norm_hat(phi1.hat)
    charge = abs(s_hat[0, 0, 0]) * grid.volume
    if charge > tol * max(scale, np.finfo(float).tiny):
        raise ConstraintError(
            "total charge int Im(phi0 conj(phi1)) dx must vanish on the torus "
            f"(got {s_hat[0, 0, 0].real * grid.volume:.6e})"
        )
    Ehat = E0_df.hat + riesz_inverse_grad_hat(grid, s_hat)
    return VectorField3(tuple(c.to_space() for c in VectorField3.from_hat(grid, Ehat, real=True)))


def build_potential_data(cd: CauchyData) -> PotentialData:
    """Potentials with ``a0 = adot0 = 0``, ``a = -Delta^-1 curl B0``, ``adot = -E0``.

    ``a`` is divergence free with zero mean; ``adot`` keeps the mean of
    ``-E0``.
    """
    grid = cd.grid
    a_hat = -inverse_laplacian_symbol(grid) * curl_hat(grid, cd.B0.hat)
    zero = ScalarField.zeros(grid)
    return PotentialData(
        a0=zero,
        adot0=zero,
        a_vec=VectorField3.from_hat(grid, a_hat, real=True),
        adot_vec=VectorField3.from_hat(grid, -cd.E0.hat, real=True),
    )


@dataclass(frozen=True, eq=False)
class HalfWaveState:
    """Evolved unknowns of the half-wave system.

    All field arrays hold forward-normalized Fourier coefficients supported
    on the dealiasing mask.

    Attributes
    ----------
    phi_plus, phi_minus : ndarray, shape (n, n, n)
        Klein-Gordon half-waves.
    A_plus, A_minus : ndarray, shape (4, n, n, n)
        Wave half-waves of ``A_mu`` (index 0 is the scalar potential); the
        ``xi = 0`` entry is always 0.
    zero_mode : ndarray, shape (4, 2)
        Row ``mu`` holds ``(mean A_mu, mean dA_mu/dt)``.
    """

    grid: Grid3
    m: float
    t: float
    phi_plus: np.ndarray
    phi_minus: np.ndarray
    A_plus: np.ndarray
    A_minus: np.ndarray
    zero_mode: np.ndarray = field(default_factory=lambda: np.zeros((4, 2)))

    def __post_init__(self):
        shape = self.grid.shape
        if self.phi_plus.shape != shape or self.phi_minus.shape != shape:
            raise UsageError("phi half-waves do not match the grid")
        if self.A_plus.shape != (4,) + shape or self.A_minus.shape != (4,) + shape:
            raise UsageError("A half-waves must have shape (4, n, n, n)")
        if np.shape(self.zero_mode) != (4, 2):
            raise UsageError("zero_mode must have shape (4, 2)")

    def with_fields(self, **changes) -> HalfWaveState:
        return replace(self, **changes)

    def norm(self) -> float:
        """Coefficient 2-norm of all unknowns, used for blow-up detection."""
        return float(
            np.sqrt(
                np.sum(np.abs(self.phi_plus) ** 2)
                + np.sum(np.abs(self.phi_minus) ** 2)
                + np.sum(np.abs(self.A_plus) ** 2)
                + np.sum(np.abs(self.A_minus) ** 2)
                + np.sum(self.zero_mode**2)
            )
        )


def _split_hat(grid: Grid3, m: float, phi_hat, dtphi_hat, A_hat, dtA_hat, zero_mode, t):
    mask = grid.dealias_mask
    inv_kg = 1.0 / klein_gordon_symbol(grid, m)
    half_phi = -0.5j * inv_kg * dtphi_hat  # 1/2 (i<xi>)^-1 dtphi
    phi_plus = np.where(mask, 0.5 * phi_hat + half_phi, 0.0)
    phi_minus = np.where(mask, 0.5 * phi_hat - half_phi, 0.0)
    keep = mask & grid.nonzero
    half_A = -0.5j * inverse_wave_symbol(grid) * dtA_hat
    A_plus = np.where(keep, 0.5 * A_hat + half_A, 0.0)
    A_minus = np.where(keep, 0.5 * A_hat - half_A, 0.0)
    return HalfWaveState(grid, m, t, phi_plus, phi_minus, A_plus, A_minus, zero_mode)


def split_half_waves(cd: CauchyData, pd: PotentialData, validate: bool = True) -> HalfWaveState:
    """Half-wave decomposition of validated Cauchy data at ``t = 0``.

    Content outside the dealiasing mask is discarded.

    Raises
    ------
    ConfigurationError
        If ``m <= 0``.
    ConstraintError
        If ``validate`` is set and the data violate a constraint.
    """
    if cd.m <= 0:
        raise ConfigurationError(f"mass must be positive, got {cd.m}")
    if validate:
        cd.validate()
    grid = cd.grid
    A_hat = np.stack([pd.a0.hat] + [c.hat for c in pd.a_vec])
    dtA_hat = np.stack([pd.adot0.hat] + [c.hat for c in pd.adot_vec])
    zero_mode = np.stack([A_hat[:, 0, 0, 0].real, dtA_hat[:, 0, 0, 0].real], axis=1)
    return _split_hat(grid, cd.m, cd.phi0.hat, cd.phi1.hat, A_hat, dtA_hat, zero_mode, 0.0)


def state_from_fields(
    grid: Grid3, m: float, t: float, phi_hat, dtphi_hat, A_hat, dtA_hat
) -> HalfWaveState:
    """Split arbitrary ``(phi, dtphi, A, dtA)`` coefficient arrays into a state."""
    A_hat = np.asarray(A_hat)
    dtA_hat = np.asarray(dtA_hat)
    zero_mode = np.stack([A_hat[:, 0, 0, 0].real, dtA_hat[:, 0, 0, 0].real], axis=1)
    return _split_hat(grid, m, phi_hat, dtphi_hat, A_hat, dtA_hat, zero_mode, t)


def reconstruct_hat(state: HalfWaveState):
    """``(phi, dtphi, A, dtA)`` as coefficient arrays; ``A`` has shape (4, n, n, n)."""
    grid = state.grid
    kg = klein_gordon_symbol(grid, state.m)
    phi = state.phi_plus + state.phi_minus
    dtphi = 1j * kg * (state.phi_plus - state.phi_minus)
    A = state.A_plus + state.A_minus
    dtA = 1j * grid.kabs * (state.A_plus - state.A_minus)
    A[:, 0, 0, 0] = state.zero_mode[:, 0]
    dtA[:, 0, 0, 0] = state.zero_mode[:, 1]
    return phi, dtphi, A, dtA


def reconstruct(state: HalfWaveState):
    """Physical fields of a state.

    Returns
    -------
    phi, dtphi : ScalarField
        ``phi = phi_+ + phi_-`` and ``dtphi = i<nabla>_m (phi_+ - phi_-)``.
    A, dtA : tuple of 4 ScalarField
        ``A = A_+ + A_-`` and ``dtA = i|nabla| (A_+ - A_-)``, plus the
        zero-mode registers. Tagged real: the imaginary part of their
        synthesis is dropped.
    """
    grid = state.grid
    phi, dtphi, A, dtA = reconstruct_hat(state)
    return (
        ScalarField.from_hat(grid, phi),
        ScalarField.from_hat(grid, dtphi),
        tuple(ScalarField.from_hat(grid, A[mu], real=True) for mu in range(4)),
        tuple(ScalarField.from_hat(grid, dtA[mu], real=True) for mu in range(4)),
    )


@dataclass(frozen=True)
class FreeWaveGauge:
    """A solution of ``box chi = 0`` given by its data at time ``t0``.

    Nonzero modes follow ``cos(|nabla| s) chi0 + |nabla|^-1 sin(|nabla| s) chi1``
    with ``s = t - t0``; the mean moves linearly, ``mean chi0 + s mean chi1``.
    """

    chi0_hat: np.ndarray
    chi1_hat: np.ndarray
    t0: float = 0.0

    @classmethod
    def from_fields(cls, chi0: ScalarField, chi1: ScalarField, t0: float = 0.0) -> FreeWaveGauge:
        return cls(chi0.hat, chi1.hat, t0)

    def evaluate_hat(self, grid: Grid3, t: float) -> tuple[np.ndarray, np.ndarray]:
        """``(chi(t), dchi/dt(t))`` as coefficient arrays."""
        s = t - self.t0
        kabs = grid.kabs
        c = np.cos(kabs * s)
        sn = np.sin(kabs * s)
        # sin(|xi| s)/|xi| -> s at xi = 0
        sinc = np.where(grid.nonzero, sn * inverse_wave_symbol(grid), s)
        chi = c * self.chi0_hat + sinc * self.chi1_hat
        dchi = -kabs * sn * self.chi0_hat + c * self.chi1_hat
        return chi, dchi

    def negated(self) -> FreeWaveGauge:
        return FreeWaveGauge(-self.chi0_hat, -self.chi1_hat, self.t0)


@dataclass(frozen=True, eq=False)
class GaugedFields:
    """Fields after a gauge transformation, in space representation."""

    phi: ScalarField
    A: tuple[ScalarField, ...]
    dtA: tuple[ScalarField, ...]
    dtphi: ScalarField | None = None


def _gauge_apply_hat(grid: Grid3, chi_hat, dchi_hat, phi_hat, dtphi_hat, A_hat, dtA_hat):
    """Gauge-transform coefficient arrays; returns space phi, dtphi and hat A, dtA."""
    chi = ifft3(chi_hat).real
    dchi = ifft3(dchi_hat).real
    rot = np.exp(1j * chi)
    phi = ifft3(phi_hat)
    phi_new = rot * phi
    dtphi_new = None
    if dtphi_hat is not None:
        dtphi_new = rot * (ifft3(dtphi_hat) + 1j * dchi * phi)
    grad = gradient_hat(grid, chi_hat)
    A_new = np.array(A_hat, dtype=complex)
    A_new[0] = A_new[0] + dchi_hat
    A_new[1:] = A_new[1:] + grad
    dtA_new = np.array(dtA_hat, dtype=complex)
    # d^2 chi / dt^2 = Delta chi for a free wave
    dtA_new[0] = dtA_new[0] - grid.k2 * chi_hat
    dtA_new[1:] = dtA_new[1:] + gradient_hat(grid, dchi_hat)
    return phi_new, dtphi_new, A_new, dtA_new


def gauge_transform(
    phi: ScalarField,
    A,
    dtA,
    chi0: ScalarField,
    chi1: ScalarField,
    t: float,
    dtphi: ScalarField | None = None,
) -> GaugedFields:
    """Apply ``phi -> exp(i chi) phi``, ``A_mu -> A_mu + d_mu chi``.

    ``chi`` is the free wave with data ``(chi0, chi1)`` at time 0,
    evaluated at ``t``. ``dtA`` is transformed consistently, using
    ``d_t^2 chi = Delta chi``; ``dtphi`` is transformed when given.
    The phase factor is applied pointwise, so ``|phi'| = |phi|`` exactly
    on the grid.
    """
    grid = phi.grid
    chi_hat, dchi_hat = FreeWaveGauge.from_fields(chi0, chi1).evaluate_hat(grid, t)
    A_hat = np.stack([a.hat for a in A])
    dtA_hat = np.stack([a.hat for a in dtA])
    phi_new, dtphi_new, A_new, dtA_new = _gauge_apply_hat(
        grid, chi_hat, dchi_hat, phi.hat, None if dtphi is None else dtphi.hat, A_hat, dtA_hat
    )
    return GaugedFields(
        phi=ScalarField.from_space(grid, phi_new, real=False),
        A=tuple(ScalarField.from_hat(grid, A_new[mu], real=True).to_space() for mu in range(4)),
        dtA=tuple(ScalarField.from_hat(grid, dtA_new[mu], real=True).to_space() for mu in range(4)),
        dtphi=None if dtphi_new is None else ScalarField.from_space(grid, dtphi_new, real=False),
    )


def normalizing_gauge_hat(grid: Grid3, A_hat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Data ``(chi0, chi1)`` with ``Delta chi0 = -div a`` and ``chi1 = -a0``.

    The mean of ``chi0`` is set to 0.
    """
    chi0 = -inverse_laplacian_symbol(grid) * divergence_hat(grid, A_hat[1:])
    chi1 = -np.asarray(A_hat[0], dtype=complex)
    return chi0, chi1


def normalizing_gauge(A) -> tuple[ScalarField, ScalarField]:
    """Gauge data that removes ``a0`` and ``div a`` at the current time.

    Parameters
    ----------
    A : sequence of 4 ScalarField
        Potentials ``(a0, a1, a2, a3)``.

    Returns
    -------
    chi0, chi1 : ScalarField
        Real fields in Fourier representation.
    """
    grid = A[0].grid
    chi0, chi1 = normalizing_gauge_hat(grid, np.stack([a.hat for a in A]))
    return ScalarField.from_hat(grid, chi0, real=True), ScalarField.from_hat(grid, chi1, real=True)


def regauge_state(state: HalfWaveState, gauge: FreeWaveGauge) -> HalfWaveState:
    """Gauge-transform a state by ``gauge`` evaluated at ``state.t``.

    The transformed fields are split again and projected onto the
    dealiasing mask; the phase factor ``exp(i chi)`` is not band limited,
    so the result is exact only up to that spectral truncation.
    """
    grid = state.grid
    phi, dtphi, A, dtA = reconstruct_hat(state)
    chi_hat, dchi_hat = gauge.evaluate_hat(grid, state.t)
    phi_new, dtphi_new, A_new, dtA_new = _gauge_apply_hat(grid, chi_hat, dchi_hat, phi, dtphi, A, dtA)
    A_new = fft3(ifft3(A_new).real)
    dtA_new = fft3(ifft3(dtA_new).real)
    return state_from_fields(grid, state.m, state.t, fft3(phi_new), fft3(dtphi_new), A_new, dtA_new)
