"""Discrete wave-Sobolev norms on a space-time torus and a bilinear probe.

A space-time field is an array of shape ``(n_t, n, n, n)`` sampled on
``[0, Lt) x [0, L)^3``. With ``u_hat = fftn(u, norm="forward")`` Parseval reads
``||u||_{L^2}^2 = Lt L^3 sum |u_hat|^2``, and the norms below insert weights
into that sum::

    ||u||_{H^{s,b}}   : <xi>^s <|tau| - |xi|>^b
    ||u||_{X^{s,b}_+-}: <xi>^s <-tau +- |xi|>^b

where ``<x> = sqrt(1 + |x|^2)`` and a single mode ``exp(i(tau t + xi.x))``
has frequency ``(tau, xi)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .products import ExponentMatrix, is_product

__all__ = [
    "SpaceTimeGrid",
    "spacetime_grid",
    "hsb_weight",
    "xsb_weight",
    "hsb_norm",
    "xsb_norm",
    "brute_force_hsb_norm",
    "comparability_ratio",
    "single_mode_ratio",
    "ProbeReport",
    "bilinear_probe",
]


@dataclass(frozen=True)
class SpaceTimeGrid:
    """Frequency tables of an ``n_t x n^3`` space-time torus.

    Attributes
    ----------
    n_t, n : int
    Lt, L : float
        Time and space periods.
    tau : ndarray, shape (n_t, 1, 1, 1)
    xi_abs : ndarray, shape (1, n, n, n)
        Modulus of the spatial frequency.
    """

    n_t: int
    n: int
    Lt: float
    L: float
    tau: np.ndarray = field(repr=False)
    xi_abs: np.ndarray = field(repr=False)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.n_t, self.n, self.n, self.n)

    @property
    def volume(self) -> float:
        return self.Lt * self.L**3

    def coordinates(self):
        """Broadcastable sample coordinates ``(t, x1, x2, x3)``."""
        t = np.arange(self.n_t) * (self.Lt / self.n_t)
        x = np.arange(self.n) * (self.L / self.n)
        return (
            t[:, None, None, None],
            x[None, :, None, None],
            x[None, None, :, None],
            x[None, None, None, :],
        )


def spacetime_grid(n_t: int, n: int, Lt: float = 2 * np.pi, L: float = 2 * np.pi) -> SpaceTimeGrid:
    """Build the frequency tables of a space-time torus."""
    tau = 2 * np.pi * sfft.fftfreq(n_t, Lt / n_t)
    k = 2 * np.pi * sfft.fftfreq(n, L / n)
    k2 = k[:, None, None] ** 2 + k[None, :, None] ** 2 + k[None, None, :] ** 2
    return SpaceTimeGrid(n_t, n, Lt, L, tau[:, None, None, None], np.sqrt(k2)[None])


def _jb(x):
    return np.sqrt(1.0 + x * x)


def hsb_weight(g: SpaceTimeGrid, s: float, b: float) -> np.ndarray:
    """Weight ``<xi>^s <|tau| - |xi|>^b`` on the frequency lattice."""
    return _jb(g.xi_abs) ** s * _jb(np.abs(g.tau) - g.xi_abs) ** b


def xsb_weight(g: SpaceTimeGrid, s: float, b: float, sign: int) -> np.ndarray:
    """Weight ``<xi>^s <-tau + sign |xi|>^b`` with ``sign`` in ``{+1, -1}``."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return _jb(g.xi_abs) ** s * _jb(-g.tau + sign * g.xi_abs) ** b


def _weighted_norm(u: np.ndarray, g: SpaceTimeGrid, weight: np.ndarray) -> float:
    if u.shape != g.shape:
        raise ValueError(f"field shape {u.shape} does not match grid {g.shape}")
    uh = sfft.fftn(u, norm="forward")
    return float(np.sqrt(g.volume * np.sum(weight**2 * np.abs(uh) ** 2)))


def hsb_norm(u: np.ndarray, s: float, b: float, Lt: float = 2 * np.pi, L: float = 2 * np.pi) -> float:
    """Discrete ``H^{s,b}`` norm of a space-time field.

    Parameters
    ----------
    u : ndarray, shape (n_t, n, n, n)
        Samples at ``t = j Lt / n_t`` and ``x = k L / n``.
    s, b : float
        Spatial and hyperbolic regularity.
    Lt, L : float
        Periods in time and space.

    Returns
    -------
    float
        ``sqrt(Lt L^3 sum <xi>^{2s} <|tau|-|xi|>^{2b} |u_hat|^2)``; for
        ``s = b = 0`` this is the space-time ``L^2`` norm.
    """
    g = spacetime_grid(u.shape[0], u.shape[1], Lt, L)
    return _weighted_norm(u, g, hsb_weight(g, s, b))


def xsb_norm(u: np.ndarray, s: float, b: float, sign: int, Lt: float = 2 * np.pi, L: float = 2 * np.pi) -> float:
    """Discrete ``X^{s,b}_{sign}`` norm, weight ``<xi>^s <-tau + sign|xi|>^b``."""
    g = spacetime_grid(u.shape[0], u.shape[1], Lt, L)
    return _weighted_norm(u, g, xsb_weight(g, s, b, sign))


def brute_force_hsb_norm(u: np.ndarray, s: float, b: float, Lt: float = 2 * np.pi, L: float = 2 * np.pi) -> float:
    """Reference ``H^{s,b}`` norm by explicit DFT sums (no FFT); small grids only.

    Every coefficient ``u_hat(tau, xi) = N^{-1} sum u exp(-i(tau t + xi.x))`` is
    formed as a dense matrix product along each axis.
    """
    n_t, n = u.shape[0], u.shape[1]

    def dft_matrix(size, period):
        j = np.arange(size)
        freq = 2 * np.pi * sfft.fftfreq(size, period / size)
        pts = j * (period / size)
        return np.exp(-1j * np.outer(freq, pts)) / size, freq

    Ft, tau = dft_matrix(n_t, Lt)
    Fx, k = dft_matrix(n, L)
    uh = np.einsum("at,bx,cy,dz,txyz->abcd", Ft, Fx, Fx, Fx, u.astype(complex), optimize=True)
    total = 0.0
    for a in range(n_t):
        for i in range(n):
            for j in range(n):
                for l in range(n):
                    xi = np.sqrt(k[i] ** 2 + k[j] ** 2 + k[l] ** 2)
                    w = _jb(xi) ** s * _jb(abs(tau[a]) - xi) ** b
                    total += w * w * abs(uh[a, i, j, l]) ** 2
    return float(np.sqrt(Lt * L**3 * total))


def comparability_ratio(tau, xi_abs, m: float, sign: int = 1):
    """Ratio ``<-tau + sign <xi>_m> / <-tau + sign |xi|>``.

    The two modulation weights differ by at most ``m`` in their argument, so
    the ratio lies in ``[1/(1+m), 1+m]``; this is why the ``X^{s,b}`` spaces
    of the Klein-Gordon and wave half-wave operators coincide.
    """
    tau, xi_abs = np.asarray(tau, float), np.asarray(xi_abs, float)
    kg = np.sqrt(m * m + xi_abs**2)
    return _jb(-tau + sign * kg) / _jb(-tau + sign * xi_abs)


def single_mode_ratio(M: ExponentMatrix, mode_u, mode_v, Lt: float = 2 * np.pi, L: float = 2 * np.pi) -> float:
    """Closed-form probe ratio for ``u``, ``v`` single space-time modes.

    Parameters
    ----------
    mode_u, mode_v : sequence of 4 numbers
        ``(tau, xi1, xi2, xi3)`` angular frequencies of each mode.
    """
    tu, xu = float(mode_u[0]), np.asarray(mode_u[1:], float)
    tv, xv = float(mode_v[0]), np.asarray(mode_v[1:], float)
    s0, s1, s2, b0, b1, b2 = (float(v) for v in M.as_tuple())

    def w(tau, xi, s, b):
        r = np.linalg.norm(xi)
        return _jb(r) ** s * _jb(abs(tau) - r) ** b

    return float(w(tu + tv, xu + xv, -s0, -b0) / (w(tu, xu, s1, b1) * w(tv, xv, s2, b2)) / np.sqrt(Lt * L**3))


@dataclass
class ProbeReport:
    """Result of :func:`bilinear_probe`.

    Attributes
    ----------
    matrix : ExponentMatrix
    accepted : bool
        Verdict of :func:`is_product` for the matrix.
    trials : int
    sup_ratio : dict
        Grid size ``n`` to the largest ratio seen.
    """

    matrix: ExponentMatrix
    accepted: bool
    trials: int
    sup_ratio: dict

    @property
    def non_increasing(self) -> bool:
        values = [self.sup_ratio[n] for n in sorted(self.sup_ratio)]
        return all(b <= a for a, b in zip(values, values[1:]))

    def format(self) -> str:
        lines = [
            f"bilinear probe: matrix = {self.matrix}, product = {self.accepted}, trials = {self.trials}",
            f"{'n':>4}  {'sup ratio':>22}",
        ]
        for n in sorted(self.sup_ratio):
            lines.append(f"{n:>4}  {self.sup_ratio[n]:>22.15e}")
        lines.append(f"trend non-increasing: {self.non_increasing}")
        return "\n".join(lines)


def _random_field(rng: np.random.Generator, g: SpaceTimeGrid, band: int, width: float) -> np.ndarray:
    kt = np.rint(g.tau * g.Lt / (2 * np.pi))
    ki = np.rint(sfft.fftfreq(g.n, 1.0 / g.n))
    kx = ki[None, :, None, None]
    ky = ki[None, None, :, None]
    kz = ki[None, None, None, :]
    inside = (np.abs(kt) <= band) & (np.abs(kx) <= band) & (np.abs(ky) <= band) & (np.abs(kz) <= band)
    r2 = kt**2 + kx**2 + ky**2 + kz**2
    coeff = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    uh = np.where(inside, coeff * np.exp(-r2 / (2 * width**2)), 0.0)
    return sfft.ifftn(uh, norm="forward")


def bilinear_probe(M: ExponentMatrix, trials: int = 1000, sizes=(8, 12, 16), seed: int = 0) -> ProbeReport:
    """Largest observed ``||uv||_{H^{-s0,-b0}} / (||u||_{H^{s1,b1}} ||v||_{H^{s2,b2}})``.

    For each grid size ``n`` (space-time grid ``n^4`` on the ``2 pi`` torus)
    ``trials`` pairs of random fields are drawn with complex Gaussian
    coefficients under a Gaussian envelope of width between ``n/16`` and
    ``n/8`` lattice units. Spectra are cut off below ``n/4`` in every
    direction so the product is computed without aliasing.

    A matrix that is not a product triggers a warning; the probe still runs.
    """
    verdict = is_product(M)
    if not verdict.accepted:
        warnings.warn(f"matrix {M} is not accepted as a product ({verdict.verdict})", stacklevel=2)
    s0, s1, s2, b0, b1, b2 = (float(v) for v in M.as_tuple())
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    sup = {}
    for n, ss in zip(sizes, streams):
        rng = np.random.default_rng(ss)
        g = spacetime_grid(n, n)
        band = (n - 1) // 4
        w_out = hsb_weight(g, -s0, -b0)
        w_u = hsb_weight(g, s1, b1)
        w_v = hsb_weight(g, s2, b2)
        best = 0.0
        for _ in range(trials):
            u = _random_field(rng, g, band, n / 8 * rng.uniform(0.5, 1.0))
            v = _random_field(rng, g, band, n / 8 * rng.uniform(0.5, 1.0))
            ratio = _weighted_norm(u * v, g, w_out) / (_weighted_norm(u, g, w_u) * _weighted_norm(v, g, w_v))
            best = max(best, ratio)
        sup[n] = best
    return ProbeReport(M, verdict.accepted, trials, sup)
