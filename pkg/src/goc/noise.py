"""Honest-node noise models and global scenario constants.

The honest report is the hidden value plus symmetric noise that is
bounded by ``delta`` and has a strictly increasing CDF on its support.
Two families are built in: uniform (every downstream quantity then has a
closed form usable as a cross-check) and a zero-mean truncated Gaussian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf, ndtri

UNIFORM = "uniform"
TRUNCATED_GAUSSIAN = "truncated_gaussian"

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

# delta / big_m must stay below this for the midpoint estimator and the
# value-curve approximation to be trustworthy.
MAX_DELTA_RATIO = 1e-2


def _phi(y: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * np.square(y)) / _SQRT2PI


def _big_phi(y: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + erf(y / _SQRT2))


@dataclass(frozen=True)
class HonestNoiseModel:
    """Symmetric, bounded noise law of the honest node.

    ``kind`` is ``"uniform"`` or ``"truncated_gaussian"``; the latter
    needs ``sigma`` (scale of the parent Gaussian before truncation to
    ``[-delta, delta]``). The normalization constant of the truncated
    family is computed once at construction.
    """

    kind: str
    delta: float
    sigma: float | None = None
    _norm: float = field(init=False, repr=False, compare=False, default=1.0)

    def __post_init__(self) -> None:
        if self.kind not in (UNIFORM, TRUNCATED_GAUSSIAN):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not (self.delta > 0.0 and math.isfinite(self.delta)):
            raise ValueError("delta must be a positive finite real")
        if self.kind == TRUNCATED_GAUSSIAN:
            if self.sigma is None or not (self.sigma > 0.0 and math.isfinite(self.sigma)):
                raise ValueError("truncated_gaussian requires sigma > 0")
            # mass of the parent Gaussian inside [-delta, delta]
            z = math.erf(self.delta / (self.sigma * _SQRT2))
            object.__setattr__(self, "_norm", z)
        elif self.sigma is not None:
            raise ValueError("sigma is only meaningful for truncated_gaussian")

    # -- density / distribution -------------------------------------------

    def pdf(self, x):
        """Density; exactly zero outside ``[-delta, delta]``."""
        x = np.asarray(x, dtype=float)
        if self.kind == UNIFORM:
            inside = np.abs(x) <= self.delta
            out = np.where(inside, 1.0 / (2.0 * self.delta), 0.0)
        else:
            inside = np.abs(x) <= self.delta
            dens = _phi(x / self.sigma) / (self.sigma * self._norm)
            out = np.where(inside, dens, 0.0)
        return out if out.ndim else float(out)

    def cdf(self, x):
        """Distribution function; 0 at ``-delta``, 1 at ``delta``."""
        x = np.asarray(x, dtype=float)
        if self.kind == UNIFORM:
            out = np.clip((x + self.delta) / (2.0 * self.delta), 0.0, 1.0)
        else:
            xc = np.clip(x, -self.delta, self.delta)
            lo = _big_phi(-self.delta / self.sigma)
            out = np.clip((_big_phi(xc / self.sigma) - lo) / self._norm, 0.0, 1.0)
        return out if out.ndim else float(out)

    def ppf(self, u):
        """Inverse CDF on [0, 1]; exists because the CDF is strictly increasing."""
        u = np.asarray(u, dtype=float)
        if self.kind == UNIFORM:
            out = (2.0 * u - 1.0) * self.delta
        else:
            lo = _big_phi(-self.delta / self.sigma)
            out = self.sigma * ndtri(lo + u * self._norm)
            out = np.clip(out, -self.delta, self.delta)
        return out if out.ndim else float(out)

    def sample(self, rng: np.random.Generator, size=None):
        """Draw i.i.d. noise via inverse-CDF sampling from ``rng``."""
        return self.ppf(rng.random(size))

    # -- partial moments ----------------------------------------------------

    def partial_moments(self, t):
        """Closed-form ``(M0, M1, M2)`` with ``Mj(t) = integral_t^delta x^j f(x) dx``.

        These power the acceptance / error integrals downstream; ``t`` is
        clipped to the support so callers may pass values slightly outside.
        """
        t = np.clip(np.asarray(t, dtype=float), -self.delta, self.delta)
        d = self.delta
        if self.kind == UNIFORM:
            inv = 1.0 / (2.0 * d)
            m0 = (d - t) * inv
            m1 = (d * d - t * t) * 0.5 * inv
            m2 = (d ** 3 - t ** 3) / 3.0 * inv
        else:
            s = self.sigma
            dd = d / s
            tt = t / s
            phi_d = _phi(dd)
            phi_t = _phi(tt)
            gap = _big_phi(dd) - _big_phi(tt)
            m0 = gap / self._norm
            m1 = s * (phi_t - phi_d) / self._norm
            m2 = s * s * (gap - (dd * phi_d - tt * phi_t)) / self._norm
        return m0, m1, m2


@dataclass(frozen=True)
class Scenario:
    """Global constants: noise bound ``delta``, value half-width ``big_m``, noise law."""

    delta: float
    big_m: float
    noise: HonestNoiseModel

    def __post_init__(self) -> None:
        if not (self.delta > 0.0 and math.isfinite(self.delta)):
            raise ValueError("scenario.delta: must be a positive finite real")
        if not (self.big_m > 0.0 and math.isfinite(self.big_m)):
            raise ValueError("scenario.big_m: must be a positive finite real")
        if self.delta / self.big_m > MAX_DELTA_RATIO:
            raise ValueError(
                "scenario.delta: delta << big_m violated "
                f"(delta/big_m = {self.delta / self.big_m:g} exceeds {MAX_DELTA_RATIO:g})"
            )
        if self.noise.delta != self.delta:
            raise ValueError("scenario.delta: noise model delta does not match scenario delta")


def uniform_scenario(delta: float = 1.0, big_m: float = 1e4) -> Scenario:
    return Scenario(delta, big_m, HonestNoiseModel(UNIFORM, delta))


def truncated_gaussian_scenario(sigma: float, delta: float = 1.0, big_m: float = 1e4) -> Scenario:
    return Scenario(delta, big_m, HonestNoiseModel(TRUNCATED_GAUSSIAN, delta, sigma))
