"""Nonlinearities of the half-wave system and the Lawson RK4 time stepper.

The evolved system reads::

    d/dt phi_pm = +- i <nabla>_m phi_pm +- i (2 <nabla>_m)^-1 M
    d/dt A_pm   = +- i |nabla|   A_pm   +- i (2 |nabla|)^-1   N      (xi != 0)

so that ``phi = phi_+ + phi_-`` solves ``(box - m^2) phi = M`` and each
potential solves ``box A_mu = N_mu`` with ``box = -d_t^2 + Delta``. The
spatial means of the potentials obey ``d_t^2 mean(A_mu) = -mean(N_mu)``.

``M`` can be assembled in two algebraically equivalent ways. The *direct*
form is ``2i A^mu d_mu phi + A_mu A^mu phi``. The *decomposed* form
replaces ``-A0 d_t phi + A.grad phi`` by null forms: the bilinear form
``sum +-_2 Afrak(A_{0,+-_1}, phi_{+-_2})`` (which encodes the curl-free part
of ``A`` through ``d_t A0`` via the Lorenz condition) plus
``(grad w_l x grad phi)^l`` with ``w = Delta^-1 curl A``. On the torus the
constant modes of ``A`` are invisible to both null forms and contribute
``2i(-mean(A0) d_t phi + mean(A).grad phi)`` separately. The two forms
coincide exactly when ``d_t A0 = div A``.

Every pairwise product is dealiased with the 2/3 rule; the cubic term is a
nested pair of dealiased products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable

import numpy as np

from .errors import BlowUpError, ConfigurationError, UsageError
from .gauge_data import FreeWaveGauge, HalfWaveState, normalizing_gauge_hat, reconstruct_hat, regauge_state
from .grid import Grid3, ScalarField, fft3, ifft3
from .multipliers import (
    curl_hat,
    gradient_hat,
    inverse_laplacian_symbol,
    inverse_wave_symbol,
    klein_gordon_symbol,
)

__all__ = [
    "IntegratorConfig",
    "NonlinearityOutput",
    "StateDerivative",
    "Trajectory",
    "null_form_A",
    "P1_decomposed",
    "P2_null_form",
    "assemble_M",
    "assemble_N",
    "nonlinearity",
    "rhs",
    "step",
    "evolve",
    "undo_regauge",
]

FORMS = ("decomposed", "direct")
SCHEMES = ("lawson_rk4",)
BLOWUP_FACTOR = 1e6


@dataclass(frozen=True)
class IntegratorConfig:
    """Time-stepping parameters.

    The exponential integrator treats the linear part exactly, so there is
    no CFL-type restriction on ``dt``; the step is limited only by the
    accuracy of the nonlinear terms.
    """

    dt: float
    scheme: str = "lawson_rk4"
    nonlinearity_form: str = "decomposed"

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ConfigurationError(f"time step must be positive, got {self.dt}")
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.nonlinearity_form not in FORMS:
            raise ConfigurationError(
                f"unknown nonlinearity form {self.nonlinearity_form!r}; expected one of {FORMS}"
            )


class _Symbols:
    """Per-(grid, mass) tables reused by every right-hand side evaluation."""

    def __init__(self, grid: Grid3, m: float):
        self.grid = grid
        self.mask = grid.dealias_mask
        self.kg = klein_gordon_symbol(grid, m)
        self.kabs = grid.kabs
        inv_w = inverse_wave_symbol(grid)
        keep = self.mask & grid.nonzero
        # +- i/(2<xi>) and +- i/(2|xi|), already restricted to the mask
        self.half_kg = np.where(self.mask, 0.5j / self.kg, 0.0)
        self.half_w = np.where(keep, 0.5j * inv_w, 0.0)
        self.riesz = np.stack([1j * kj * inv_w for kj in grid.k])  # |nabla|^-1 grad
        self.ik = np.stack([1j * np.broadcast_to(kj, grid.shape) for kj in grid.k])
        self.omega = np.concatenate(
            [self.kg[None], -self.kg[None], np.repeat(self.kabs[None], 4, 0), np.repeat(-self.kabs[None], 4, 0)]
        )
        # curl-free projector k k^T / |k|^2 on nonzero modes
        self.k_over_k2 = np.stack([kj * (inv_w * inv_w) for kj in grid.k])
        self.k = grid.k
        self._propagators: dict[float, tuple[np.ndarray, np.ndarray]] = {}

    def propagators(self, h: float) -> tuple[np.ndarray, np.ndarray]:
        """``(exp(i Omega h), exp(i Omega h / 2))``, cached per step size."""
        if h not in self._propagators:
            if len(self._propagators) > 4:
                self._propagators.clear()
            self._propagators[h] = (np.exp(1j * h * self.omega), np.exp(0.5j * h * self.omega))
        return self._propagators[h]

    def divergence_free(self, v_hat: np.ndarray) -> np.ndarray:
        k1, k2, k3 = self.k
        div = k1 * v_hat[0] + k2 * v_hat[1] + k3 * v_hat[2]
        return v_hat - self.k_over_k2 * div


@lru_cache(maxsize=16)
def _symbols(grid: Grid3, m: float) -> _Symbols:
    return _Symbols(grid, m)


def _dealias_fft(grid: Grid3, values: np.ndarray) -> np.ndarray:
    return grid.dealias(fft3(values))


# ---------------------------------------------------------------------------
# null forms


def null_form_A(f: ScalarField, g: ScalarField, signs: tuple[int, int], m: float) -> ScalarField:
    """Bilinear null form ``f <nabla>_m g + |nabla|^-1 grad(+-_1 f) . grad(+-_2 g)``.

    Its symbol on a pair of modes ``(eta, zeta)`` of ``(f, g)`` is
    ``<zeta>_m - (+-_1 eta).(+-_2 zeta)/|eta|``, which vanishes on parallel
    null pairs when ``m = 0``. The mean of ``f`` is dropped from the Riesz
    term. The result is in Fourier representation and dealiased.
    """
    if f.grid != g.grid:
        raise UsageError("null_form_A: fields live on different grids")
    s1, s2 = _check_signs(signs)
    grid = f.grid
    fh = grid.dealias(f.hat)
    gh = grid.dealias(g.hat)
    fx = ifft3(fh)
    total = fx * ifft3(klein_gordon_symbol(grid, m) * gh)
    riesz = inverse_wave_symbol(grid)
    for kj in grid.k:
        total = total + (s1 * s2) * ifft3(1j * kj * riesz * fh) * ifft3(1j * kj * gh)
    return ScalarField.from_hat(grid, _dealias_fft(grid, total))


def _check_signs(signs) -> tuple[int, int]:
    s1, s2 = (int(s) for s in signs)
    if s1 not in (1, -1) or s2 not in (1, -1):
        raise UsageError(f"signs must be +1 or -1, got {signs!r}")
    return s1, s2


def P1_decomposed(
    A0_plus: ScalarField,
    A0_minus: ScalarField,
    phi_plus: ScalarField,
    phi_minus: ScalarField,
    m: float,
) -> ScalarField:
    """``P1 = -i sum_{+-_1, +-_2} (+-_2) Afrak_(+-_1, +-_2)(A_{0,+-_1}, phi_{+-_2})``.

    Equal to ``-A0 d_t phi + Delta^-1 grad(d_t A0) . grad phi`` when the
    inputs are half-waves of ``A0`` (mean free) and ``phi``.
    """
    A0 = {1: A0_plus, -1: A0_minus}
    phi = {1: phi_plus, -1: phi_minus}
    total = 0
    for s1 in (1, -1):
        for s2 in (1, -1):
            total = total + s2 * null_form_A(A0[s1], phi[s2], (s1, s2), m).values
    return ScalarField.from_hat(phi_plus.grid, -1j * total)


def P2_null_form(A_vec, phi: ScalarField) -> ScalarField:
    """``sum_l (grad w_l x grad phi)^l`` with ``w = Delta^-1 curl A``.

    Equal to ``A_df . grad phi``. Dealiased, Fourier representation.
    """
    grid = phi.grid
    A_hat = np.stack([a.hat for a in A_vec])
    w_hat = inverse_laplacian_symbol(grid) * curl_hat(grid, grid.dealias(A_hat))
    grad_phi = [ifft3(g) for g in gradient_hat(grid, grid.dealias(phi.hat))]
    total = np.zeros(grid.shape, dtype=complex)
    for l in range(3):
        grad_w = [ifft3(g) for g in gradient_hat(grid, w_hat[l])]
        # l-th component of grad w_l x grad phi
        a, b = (l + 1) % 3, (l + 2) % 3
        total += grad_w[a] * grad_phi[b] - grad_w[b] * grad_phi[a]
    return ScalarField.from_hat(grid, _dealias_fft(grid, total))


# ---------------------------------------------------------------------------
# assembled nonlinearities


@dataclass(frozen=True, eq=False)
class NonlinearityOutput:
    """``M`` and ``N_mu`` as dealiased coefficient arrays.

    ``zero_mode_force[mu] = mean(J_mu) = -mean(N_mu)`` drives the
    second-order equations of the potential means.
    """

    M_hat: np.ndarray
    N_hat: np.ndarray
    zero_mode_force: np.ndarray

    def M_field(self, grid: Grid3) -> ScalarField:
        return ScalarField.from_hat(grid, self.M_hat)

    def N_field(self, grid: Grid3) -> tuple[ScalarField, ...]:
        return tuple(ScalarField.from_hat(grid, self.N_hat[mu], real=True) for mu in range(4))


def _nonlinear_arrays(grid, m, phi_p, phi_m, A_p, A_m, zero_mode, form):
    """Core kernel shared by :func:`nonlinearity` and the stepper."""
    sy = _symbols(grid, m)
    dphi = phi_p - phi_m
    phi_hat = phi_p + phi_m
    phi = ifft3(phi_hat)
    dtphi = ifft3(1j * sy.kg * dphi)
    grad_phi = ifft3(sy.ik * phi_hat)
    A_nz_hat = A_p + A_m
    A_nz = ifft3(A_nz_hat).real
    mean_A = zero_mode[:, 0]
    A = A_nz + mean_A[:, None, None, None]

    if form == "direct":
        quad = -A[0] * dtphi + np.einsum("jxyz,jxyz->xyz", A[1:], grad_phi)
    else:
        # sum +-_2 Afrak(A_{0,+-_1}, phi_{+-_2}) = A0 <nabla>(phi_+ - phi_-) + R . grad phi
        # with R = |nabla|^-1 grad(A_{0,+} - A_{0,-}); the first term is -i A0 d_t phi.
        R = ifft3(sy.riesz * (A_p[0] - A_m[0]))
        A_df = ifft3(sy.divergence_free(A_nz_hat[1:])).real
        p1_times_i = -1j * A_nz[0] * dtphi + np.einsum("jxyz,jxyz->xyz", R, grad_phi)
        # P2 = (grad w_l x grad phi)^l, evaluated through the identity P2 = A_df . grad phi
        p2 = np.einsum("jxyz,jxyz->xyz", A_df, grad_phi)
        torus = -mean_A[0] * dtphi + np.einsum("j,jxyz->xyz", mean_A[1:], grad_phi)
        quad = -1j * p1_times_i + p2 + torus
    square = -A[0] ** 2 + A[1] ** 2 + A[2] ** 2 + A[3] ** 2
    square = ifft3(_dealias_fft(grid, square)).real
    M_hat = _dealias_fft(grid, 2j * quad + square * phi)

    abs2 = ifft3(_dealias_fft(grid, (phi * np.conj(phi)).real)).real
    N_x = np.empty((4,) + grid.shape)
    N_x[0] = np.imag(phi * np.conj(dtphi)) + A[0] * abs2
    N_x[1:] = np.imag(phi * np.conj(grad_phi)) + A[1:] * abs2
    N_hat = _dealias_fft(grid, N_x)
    force = -N_hat[:, 0, 0, 0].real
    return M_hat, N_hat, force


def nonlinearity(state: HalfWaveState, form: str = "decomposed") -> NonlinearityOutput:
    """Evaluate ``M``, ``N`` and the zero-mode forcing of a state."""
    if form not in FORMS:
        raise ConfigurationError(f"unknown nonlinearity form {form!r}")
    M_hat, N_hat, force = _nonlinear_arrays(
        state.grid, state.m, state.phi_plus, state.phi_minus, state.A_plus, state.A_minus, state.zero_mode, form
    )
    return NonlinearityOutput(M_hat, N_hat, force)


def assemble_M(state: HalfWaveState, form: str = "decomposed") -> ScalarField:
    """Dealiased ``M`` in the requested form (Fourier representation).

    Uses the metric ``diag(-1, 1, 1, 1)``: ``A_mu A^mu = -A0^2 + |A|^2``.
    """
    return nonlinearity(state, form).M_field(state.grid)


def assemble_N(state: HalfWaveState) -> tuple[ScalarField, ...]:
    """Dealiased ``N_mu = -J_mu = Im(phi conj(D_mu phi))`` (real, Fourier representation).

    ``N_0 = -Im[phi i<nabla>_m (conj(phi_+) - conj(phi_-))] + A0 |phi|^2``
    equals the charge density; ``N_j = Im(phi d_j conj(phi)) + A_j |phi|^2``.
    """
    return nonlinearity(state).N_field(state.grid)


# ---------------------------------------------------------------------------
# right-hand side and stepping


@dataclass(frozen=True, eq=False)
class StateDerivative:
    """Time derivative of every unknown of a :class:`HalfWaveState`."""

    phi_plus: np.ndarray
    phi_minus: np.ndarray
    A_plus: np.ndarray
    A_minus: np.ndarray
    zero_mode: np.ndarray


def rhs(state: HalfWaveState, form: str = "decomposed") -> StateDerivative:
    """Full right-hand side, linear part included."""
    sy = _symbols(state.grid, state.m)
    out = nonlinearity(state, form)
    Mk = sy.half_kg * out.M_hat
    Nk = sy.half_w * out.N_hat
    lin_phi = 1j * sy.kg
    lin_A = 1j * sy.kabs
    dzero = np.stack([state.zero_mode[:, 1], out.zero_mode_force], axis=1)
    return StateDerivative(
        phi_plus=lin_phi * state.phi_plus + Mk,
        phi_minus=-lin_phi * state.phi_minus - Mk,
        A_plus=lin_A * state.A_plus + Nk,
        A_minus=-lin_A * state.A_minus - Nk,
        zero_mode=dzero,
    )


def _pack(state: HalfWaveState) -> np.ndarray:
    return np.concatenate([state.phi_plus[None], state.phi_minus[None], state.A_plus, state.A_minus])


def _unpack(state: HalfWaveState, y: np.ndarray, z: np.ndarray, t: float) -> HalfWaveState:
    return HalfWaveState(state.grid, state.m, t, y[0], y[1], y[2:6], y[6:10], z)


def _forcing(grid, m, y, z, form):
    """Nonlinear part of the packed right-hand side."""
    sy = _symbols(grid, m)
    M_hat, N_hat, force = _nonlinear_arrays(grid, m, y[0], y[1], y[2:6], y[6:10], z, form)
    Mk = sy.half_kg * M_hat
    Nk = sy.half_w * N_hat
    fy = np.concatenate([Mk[None], -Mk[None], Nk, -Nk])
    fz = np.stack([z[:, 1], force], axis=1)
    return fy, fz


def _lawson_rk4(grid, m, y, z, h, form):
    """One Lawson (integrating-factor) RK4 step of size ``h``.

    The oscillatory unknowns ``y`` use the exact propagator
    ``exp(i Omega h)``; the zero-mode registers ``z`` use classical RK4.
    """
    sy = _symbols(grid, m)
    E, E2 = sy.propagators(h)
    k1, l1 = _forcing(grid, m, y, z, form)
    k2, l2 = _forcing(grid, m, E2 * (y + 0.5 * h * k1), z + 0.5 * h * l1, form)
    k3, l3 = _forcing(grid, m, E2 * y + 0.5 * h * k2, z + 0.5 * h * l2, form)
    k4, l4 = _forcing(grid, m, E * y + h * (E2 * k3), z + h * l3, form)
    y_new = E * y + (h / 6.0) * (E * k1 + 2.0 * E2 * (k2 + k3) + k4)
    z_new = z + (h / 6.0) * (l1 + 2.0 * (l2 + l3) + l4)
    return y_new, z_new


def step(
    state: HalfWaveState,
    cfg: IntegratorConfig,
    dt: float | None = None,
    norm_limit: float | None = None,
) -> HalfWaveState:
    """Advance ``state`` by one step (``cfg.dt`` unless ``dt`` is given).

    With vanishing nonlinearity the step is an exact phase rotation.

    Raises
    ------
    BlowUpError
        If the new state is not finite, or its norm exceeds ``norm_limit``.
    """
    h = cfg.dt if dt is None else dt
    if not h > 0:
        raise ConfigurationError(f"time step must be positive, got {h}")
    y_new, z_new = _lawson_rk4(state.grid, state.m, _pack(state), state.zero_mode, h, cfg.nonlinearity_form)
    new = _unpack(state, y_new, z_new, state.t + h)
    _check_finite(new, norm_limit)
    return new


def _check_finite(state: HalfWaveState, norm_limit: float | None) -> None:
    norm = state.norm()
    if not math.isfinite(norm):
        raise BlowUpError("non-finite values in the state", state.t)
    if norm_limit is not None and norm > norm_limit:
        raise BlowUpError(f"state norm {norm:.3e} exceeds limit {norm_limit:.3e}", state.t)


@dataclass(eq=False)
class Trajectory:
    """Result of :func:`evolve`.

    Attributes
    ----------
    state : HalfWaveState
        Final state.
    records : list
        Callback return values, in time order.
    regauge_history : list of FreeWaveGauge
        Gauge changes applied during the run, in order.
    steps : int
        Number of steps taken.
    """

    state: HalfWaveState
    records: list = field(default_factory=list)
    regauge_history: list = field(default_factory=list)
    steps: int = 0


def _segment_steps(span: float, dt: float) -> list[float]:
    """Step sizes covering ``span``: full steps then one shortened step."""
    if span <= 0:
        return []
    full = int(math.floor(span / dt * (1 + 1e-12)))
    sizes = [dt] * full
    rest = span - full * dt
    if rest > 1e-12 * max(span, 1.0):
        sizes.append(rest)
    return sizes


def evolve(
    state: HalfWaveState,
    T: float,
    cfg: IntegratorConfig,
    callback: Callable[[HalfWaveState], Any] | None = None,
    cadence: int = 1,
    regauge_at=(),
) -> Trajectory:
    """Integrate from ``state.t`` to ``state.t + T``.

    ``callback`` is invoked on the initial state, after every ``cadence``
    steps and on the final state (once). At each time in ``regauge_at``
    (measured from ``state.t``) the potentials are re-normalized by the
    free-wave gauge with ``Delta chi0 = -div A`` and ``chi1 = -A0``; the
    gauges used are stored in the trajectory so that :func:`undo_regauge`
    can map the final state back.

    Raises
    ------
    BlowUpError
        If a step produces non-finite values or the norm grows beyond
        ``1e6`` times its initial value.
    """
    if not T >= 0:
        raise ConfigurationError(f"final time must be non-negative, got {T}")
    if int(cadence) != cadence or cadence < 1:
        raise ConfigurationError(f"cadence must be a positive integer, got {cadence}")
    t0 = state.t
    breaks = sorted(float(t) for t in regauge_at if 0 < t < T)
    init_norm = state.norm()
    limit = BLOWUP_FACTOR * init_norm if init_norm > 0 else None
    traj = Trajectory(state=state)
    if callback is not None:
        traj.records.append(callback(state))
    last_recorded = 0
    edges = [0.0] + breaks + [float(T)]
    for seg, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        sizes = _segment_steps(b - a, cfg.dt)
        for i, h in enumerate(sizes):
            new = step(state, cfg, dt=h, norm_limit=limit)
            # pin the clock to avoid accumulated rounding in t
            t_exact = t0 + b if i == len(sizes) - 1 else state.t + h
            state = new.with_fields(t=t_exact)
            traj.steps += 1
            if callback is not None and traj.steps % cadence == 0:
                traj.records.append(callback(state))
                last_recorded = traj.steps
        if seg < len(breaks):
            A_hat = reconstruct_hat(state)[2]
            chi0, chi1 = normalizing_gauge_hat(state.grid, A_hat)
            gauge = FreeWaveGauge(chi0, chi1, state.t)
            state = regauge_state(state, gauge)
            traj.regauge_history.append(gauge)
    if callback is not None and last_recorded != traj.steps:
        traj.records.append(callback(state))
    traj.state = state
    return traj


def undo_regauge(state: HalfWaveState, history) -> HalfWaveState:
    """Apply the inverse of every recorded gauge change, latest first."""
    for gauge in reversed(list(history)):
        state = regauge_state(state, gauge.negated())
    return state
