"""Null-form symbols, their explicit bounds and the null-cone angle probe.

For spatial frequencies ``eta`` (second factor) and ``zeta`` (first factor)
and signs ``(s1, s2)`` the symbols of the three null forms are::

    a = <zeta>_m - (s1 eta) . (s2 zeta) / |eta|
    b = <eta>_m (s2 zeta) - <zeta>_m (s1 eta)
    c = eta x zeta

with ``<x>_m = sqrt(m^2 + |x|^2)``. Writing ``theta`` for the angle between
``s1 eta`` and ``s2 zeta`` they obey::

    |a| <= m + |zeta| theta^2 / 2
    |b| <= m (|eta| + |zeta|) + |eta| |zeta| theta
    |c| <= |eta| |zeta| theta

All functions come in a single-sample form taking a :class:`SymbolSample` and
a vectorized ``*_batch`` form taking ``(N, 3)`` arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError

__all__ = [
    "SymbolSample",
    "SIGN_PAIRS",
    "angle",
    "symbol_a",
    "symbol_b",
    "symbol_c",
    "symbol_a_batch",
    "symbol_b_batch",
    "symbol_c_batch",
    "BoundReport",
    "sample_frequencies",
    "check_symbol_bounds",
    "angle_probe",
    "angle_probe_batch",
    "AngleProbeReport",
    "angle_probe_experiment",
]

SIGN_PAIRS = ((1, 1), (1, -1), (-1, 1), (-1, -1))

# Rounding allowance for the bound checks, in units of machine epsilon times
# the magnitude of the terms that cancel in each symbol.
_ROUNDING = 16 * np.finfo(float).eps


@dataclass(frozen=True)
class SymbolSample:
    """Frequency configuration at which symbols are evaluated.

    Attributes
    ----------
    eta, zeta : tuple of float
        Spatial frequencies (3-vectors), both nonzero for the symbols.
    lam, mu : float
        Temporal frequencies paired with ``eta`` and ``zeta`` (angle probe only).
    m : float
        Mass, ``m >= 0``.
    signs : tuple of int
        ``(s1, s2)`` with entries in ``{+1, -1}``.
    """

    eta: tuple = (1.0, 0.0, 0.0)
    zeta: tuple = (1.0, 0.0, 0.0)
    lam: float = 0.0
    mu: float = 0.0
    m: float = 0.0
    signs: tuple = field(default=(1, 1))

    def __post_init__(self):
        object.__setattr__(self, "eta", tuple(float(v) for v in self.eta))
        object.__setattr__(self, "zeta", tuple(float(v) for v in self.zeta))
        if len(self.eta) != 3 or len(self.zeta) != 3:
            raise DomainError("eta and zeta must be 3-vectors")
        if self.m < 0:
            raise DomainError(f"mass must be nonnegative, got {self.m}")
        if tuple(self.signs) not in SIGN_PAIRS:
            raise DomainError(f"signs must be a pair of +1/-1, got {self.signs}")

    def arrays(self):
        return np.asarray(self.eta)[None], np.asarray(self.zeta)[None]


def _norm(v: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("...i,...i->...", v, v))


def _bracket(v: np.ndarray, m: float) -> np.ndarray:
    return np.sqrt(m * m + np.einsum("...i,...i->...", v, v))


def _require_nonzero(*vectors: np.ndarray) -> None:
    for v in vectors:
        if np.any(np.all(v == 0, axis=-1)):
            raise DomainError("symbol evaluated at a zero frequency")


def angle(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Angle in ``[0, pi]`` between rows of ``u`` and ``v`` (robust near 0 and pi)."""
    cross = _norm(np.cross(u, v))
    dot = np.einsum("...i,...i->...", u, v)
    return np.arctan2(cross, dot)


def symbol_a_batch(eta, zeta, m: float, signs) -> np.ndarray:
    """Vectorized :func:`symbol_a` over ``(N, 3)`` frequency arrays."""
    eta, zeta = np.asarray(eta, float), np.asarray(zeta, float)
    _require_nonzero(eta)
    s1, s2 = signs
    dot = s1 * s2 * np.einsum("...i,...i->...", eta, zeta)
    return _bracket(zeta, m) - dot / _norm(eta)


def symbol_b_batch(eta, zeta, m: float, signs) -> np.ndarray:
    """Vectorized :func:`symbol_b`; returns ``(N, 3)``."""
    eta, zeta = np.asarray(eta, float), np.asarray(zeta, float)
    _require_nonzero(eta, zeta)
    s1, s2 = signs
    return _bracket(eta, m)[..., None] * (s2 * zeta) - _bracket(zeta, m)[..., None] * (s1 * eta)


def symbol_c_batch(eta, zeta) -> np.ndarray:
    """Vectorized :func:`symbol_c`; returns ``(N, 3)``."""
    eta, zeta = np.asarray(eta, float), np.asarray(zeta, float)
    _require_nonzero(eta, zeta)
    return np.cross(eta, zeta)


def symbol_a(s: SymbolSample) -> float:
    """Symbol of the scalar null form, ``<zeta>_m - (s1 eta).(s2 zeta)/|eta|``.

    Raises
    ------
    DomainError
        If ``eta = 0``.

    Examples
    --------
    >>> symbol_a(SymbolSample(eta=(1, 0, 0), zeta=(0, 1, 0), m=1.0))
    1.4142135623730951
    """
    eta, zeta = s.arrays()
    return float(symbol_a_batch(eta, zeta, s.m, s.signs)[0])


def symbol_b(s: SymbolSample) -> np.ndarray:
    """Vector symbol ``<eta>_m (s2 zeta) - <zeta>_m (s1 eta)``.

    Raises
    ------
    DomainError
        If ``eta`` or ``zeta`` vanishes.
    """
    eta, zeta = s.arrays()
    return symbol_b_batch(eta, zeta, s.m, s.signs)[0]


def symbol_c(s: SymbolSample) -> np.ndarray:
    """Vector symbol ``eta x zeta`` (independent of signs and mass).

    Raises
    ------
    DomainError
        If ``eta`` or ``zeta`` vanishes.
    """
    eta, zeta = s.arrays()
    return symbol_c_batch(eta, zeta)[0]


# ------------------------------------------------------------ bound checks


def sample_frequencies(rng: np.random.Generator, count: int, lo: float = 1e-3, hi: float = 1e3):
    """Random nonzero 3-vectors with log-uniform magnitudes and uniform directions.

    A tenth of the ``zeta`` samples are placed exactly parallel or
    antiparallel to ``eta`` so the degenerate angles 0 and pi are exercised.
    """
    def draw():
        mag = np.exp(rng.uniform(np.log(lo), np.log(hi), count))
        d = rng.standard_normal((count, 3))
        d /= _norm(d)[:, None]
        return mag[:, None] * d

    eta, zeta = draw(), draw()
    k = count // 10
    if k:
        scale = np.exp(rng.uniform(np.log(lo), np.log(hi), k))
        direction = np.where(rng.random(k) < 0.5, 1.0, -1.0)
        zeta[:k] = (direction * scale / _norm(eta[:k]))[:, None] * eta[:k]
    return eta, zeta


@dataclass
class BoundReport:
    """Result of :func:`check_symbol_bounds`.

    Attributes
    ----------
    m : float
    count : int
        Samples per sign pair.
    violations : dict
        Number of violations per bound name (``"a"``, ``"b"``, ``"c"``).
    worst_ratio : dict
        Largest ``|symbol| / bound`` seen per bound name over samples whose
        bound exceeds the rounding allowance (ratios of two rounding errors
        carry no information).
    """

    m: float
    count: int
    violations: dict
    worst_ratio: dict

    @property
    def total_violations(self) -> int:
        return int(sum(self.violations.values()))

    def format(self) -> str:
        lines = [f"symbol bounds: m = {self.m:g}, {self.count} samples per sign pair"]
        for key in ("a", "b", "c"):
            lines.append(
                f"  {key}: violations = {self.violations[key]:d}, worst ratio = {self.worst_ratio[key]:.6f}"
            )
        lines.append(f"{self.total_violations} violations")
        return "\n".join(lines)


def _chunks(count: int, size: int):
    done = 0
    while done < count:
        n = min(size, count - done)
        yield n
        done += n


def check_symbol_bounds(m: float, count: int, seed: int = 0, chunk: int = 250_000) -> BoundReport:
    """Sample the three null symbols and test them against explicit bounds.

    Parameters
    ----------
    m : float
        Mass (``>= 0``).
    count : int
        Number of frequency pairs per sign pair.
    seed : int
        Seed of the sampler.
    chunk : int
        Samples processed per vectorized batch.

    Returns
    -------
    BoundReport
        A sample counts as a violation when the symbol exceeds its bound by
        more than rounding (16 machine epsilons times the size of the
        cancelling terms).
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if m < 0:
        raise DomainError(f"mass must be nonnegative, got {m}")
    rng = np.random.default_rng(seed)
    violations = {"a": 0, "b": 0, "c": 0}
    worst = {"a": 0.0, "b": 0.0, "c": 0.0}
    for signs in SIGN_PAIRS:
        for n in _chunks(count, chunk):
            eta, zeta = sample_frequencies(rng, n)
            ne, nz = _norm(eta), _norm(zeta)
            theta = angle(signs[0] * eta, signs[1] * zeta)
            values = {
                "a": np.abs(symbol_a_batch(eta, zeta, m, signs)),
                "b": _norm(symbol_b_batch(eta, zeta, m, signs)),
                "c": _norm(symbol_c_batch(eta, zeta)),
            }
            bounds = {
                "a": m + 0.5 * nz * theta**2,
                "b": m * (ne + nz) + ne * nz * theta,
                "c": ne * nz * theta,
            }
            slack = {
                "a": _ROUNDING * (_bracket(zeta, m) + nz),
                "b": _ROUNDING * (_bracket(eta, m) * nz + _bracket(zeta, m) * ne),
                "c": _ROUNDING * ne * nz,
            }
            for key in values:
                violations[key] += int(np.count_nonzero(values[key] > bounds[key] + slack[key]))
                pos = bounds[key] > slack[key]
                if np.any(pos):
                    worst[key] = max(worst[key], float(np.max(values[key][pos] / bounds[key][pos])))
    return BoundReport(m=m, count=count, violations=violations, worst_ratio=worst)


# -------------------------------------------------------------- angle probe


def _jb(x):
    return np.sqrt(1.0 + np.asarray(x, float) ** 2)


def angle_probe_batch(eta, zeta, lam, mu, signs, exponent: float) -> np.ndarray:
    """Vectorized :func:`angle_probe` over ``(N, 3)`` arrays and ``(N,)`` frequencies."""
    if not 0.0 <= exponent <= 0.5:
        raise DomainError(f"exponent must lie in [0, 1/2], got {exponent}")
    eta, zeta = np.asarray(eta, float), np.asarray(zeta, float)
    _require_nonzero(eta, zeta)
    s1, s2 = signs
    ne, nz = _norm(eta), _norm(zeta)
    theta = angle(s1 * eta, s2 * zeta)
    low = np.minimum(_jb(ne), _jb(nz))
    tau = np.asarray(lam, float) + np.asarray(mu, float)
    xi = _norm(eta + zeta)
    output = (_jb(np.abs(tau) - xi) / low) ** exponent
    inputs = ((_jb(-lam + s1 * ne) + _jb(-mu + s2 * nz)) / low) ** 0.5
    return theta / (output + inputs)


def angle_probe(s: SymbolSample, exponent: float) -> float:
    """Ratio of the null-cone angle to the right-hand side of the angle estimate.

    The estimate bounds ``theta(s1 eta, s2 zeta)`` by::

        (<|lam + mu| - |eta + zeta|> / min(<eta>, <zeta>))^s
          + ((<-lam + s1|eta|> + <-mu + s2|zeta|>) / min(<eta>, <zeta>))^(1/2)

    up to an unspecified constant, with ``<x> = sqrt(1 + |x|^2)``. The probe
    uses constant 1, so its values estimate that constant empirically.

    Raises
    ------
    DomainError
        If ``exponent`` is outside ``[0, 1/2]`` or a frequency vanishes.
    """
    eta, zeta = s.arrays()
    return float(angle_probe_batch(eta, zeta, np.array([s.lam]), np.array([s.mu]), s.signs, exponent)[0])


@dataclass
class AngleProbeReport:
    """Empirical constant of the angle estimate over random samples."""

    exponent: float
    count: int
    max_ratio: float
    argmax: SymbolSample

    def format(self) -> str:
        return (
            f"angle probe: exponent = {self.exponent:g}, samples = {self.count}, "
            f"max ratio = {self.max_ratio:.6f}"
        )


def angle_probe_experiment(count: int, exponent: float = 0.25, seed: int = 0) -> AngleProbeReport:
    """Maximize :func:`angle_probe` over random samples.

    Half of the temporal frequencies sit on the light cone (``lam = s1|eta|``,
    ``mu = s2|zeta|``) where the modulation weights are smallest; the rest are
    perturbed by log-uniform offsets.
    """
    rng = np.random.default_rng(seed)
    best, best_sample = -1.0, None
    per = max(1, count // len(SIGN_PAIRS))
    for signs in SIGN_PAIRS:
        eta, zeta = sample_frequencies(rng, per)
        ne, nz = _norm(eta), _norm(zeta)
        off = np.exp(rng.uniform(np.log(1e-3), np.log(1e3), (2, per))) * rng.choice([-1.0, 1.0], (2, per))
        off[:, : per // 2] = 0.0
        lam = signs[0] * ne + off[0]
        mu = signs[1] * nz + off[1]
        r = angle_probe_batch(eta, zeta, lam, mu, signs, exponent)
        i = int(np.argmax(r))
        if r[i] > best:
            best = float(r[i])
            best_sample = SymbolSample(tuple(eta[i]), tuple(zeta[i]), float(lam[i]), float(mu[i]), 0.0, signs)
    return AngleProbeReport(exponent, per * len(SIGN_PAIRS), best, best_sample)
