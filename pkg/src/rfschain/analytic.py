"""Closed-form reference results.

Two families:

- Four-site dimerized chain: exact ground energy per spin and its
  derivatives, and the susceptibility 3/[16 (1-a+a^2)^2] shared by
  both bonds, peaking at alpha = 0.5 with value 1/3.
- Thermodynamic limit: the fitted power law e0(eta) = (e00 - c eta^p)
  / (1+eta) in the bond-asymmetry variable eta = (1-alpha)/(1+alpha),
  with e00 = 1/4 - ln 2 the uniform-chain energy per spin. Derivatives
  with respect to alpha follow by differentiating this power law
  through the chain rule (they match central differences of
  thermo_energy to O(h^2)), and both susceptibilities then come from
  composing them into the energy-route kernel, which pins the overall
  sign and normalization unambiguously. Near alpha = 1 everything is
  evaluated in eta to avoid cancellation in (1 - alpha).

The fitted constants are only trusted on eta in [0.001, 0.1]; that
range rides along in ThermoParams so report metadata can carry it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainViolation
from .fidelity import rfs_energy_dimer

E00_UNIFORM = 0.25 - math.log(2.0)


@dataclass(frozen=True)
class ThermoParams:
    """Power-law fit constants for the thermodynamic-limit energy."""

    c: float = 0.3891
    p: float = 1.4417
    e00: float = E00_UNIFORM
    eta_fit_range: tuple[float, float] = (0.001, 0.1)

    def __post_init__(self):
        if not 1.0 < self.p < 2.0:
            raise DomainViolation(f"exponent p={self.p!r} outside (1, 2)")
        if self.c <= 0.0:
            raise DomainViolation(f"amplitude c={self.c!r} must be positive")


def eta_from_alpha(alpha: float) -> float:
    """Bond-asymmetry variable eta = (1-alpha)/(1+alpha) for alpha in [0, 1)."""
    if not 0.0 <= alpha < 1.0:
        raise DomainViolation(f"alpha={alpha!r} outside [0, 1)")
    return (1.0 - alpha) / (1.0 + alpha)


def alpha_from_eta(eta: float) -> float:
    """Inverse map alpha = (1-eta)/(1+eta) for eta in (0, 1]."""
    if not 0.0 < eta <= 1.0:
        raise DomainViolation(f"eta={eta!r} outside (0, 1]")
    return (1.0 - eta) / (1.0 + eta)


@dataclass(frozen=True)
class EtaAlpha:
    """A coupling-ratio point seen through both parametrizations."""

    eta: float
    alpha: float

    @classmethod
    def from_alpha(cls, alpha: float) -> "EtaAlpha":
        return cls(eta_from_alpha(alpha), alpha)

    @classmethod
    def from_eta(cls, eta: float) -> "EtaAlpha":
        return cls(eta, alpha_from_eta(eta))


def n4_energy(alpha: float) -> tuple[float, float, float]:
    """Exact four-site ground energy per spin with first two derivatives.

    e0 = -(1/4)[(1+alpha)/2 + sqrt(1-alpha+alpha^2)] and its
    alpha-derivatives; the square-root argument is positive for all
    real alpha.
    """
    root = math.sqrt(1.0 - alpha + alpha * alpha)
    e0 = -0.25 * (0.5 * (1.0 + alpha) + root)
    de0 = 0.125 * (-1.0 + (1.0 - 2.0 * alpha) / root)
    d2e0 = -3.0 / (16.0 * root ** 3)
    return e0, de0, d2e0


def n4_rfs(alpha: float) -> float:
    """Four-site susceptibility 3/[16 (1-alpha+alpha^2)^2], equal on both bonds."""
    q = 1.0 - alpha + alpha * alpha
    return 3.0 / (16.0 * q * q)


def thermo_energy(eta: float, params: ThermoParams = ThermoParams()) -> float:
    """Thermodynamic-limit energy per spin (e00 - c eta^p)/(1+eta).

    eta = 0 is accepted as the uniform-chain limit point e00.
    """
    if not 0.0 <= eta < 1.0:
        raise DomainViolation(f"eta={eta!r} outside [0, 1)")
    return (params.e00 - params.c * eta ** params.p) / (1.0 + eta)


def thermo_derivatives(alpha: float,
                       params: ThermoParams = ThermoParams()) -> tuple[float, float]:
    """Alpha-derivatives of the thermodynamic-limit energy per spin.

    Differentiating thermo_energy through eta(alpha) (using
    d eta/d alpha = -(1+eta)^2 / 2) gives

        de0  = (1/2) [e00 + c eta^(p-1) (p + (p-1) eta)]
        d2e0 = -(c/4) p (p-1) eta^(p-2) (1+eta)^3

    evaluated in eta for stability near alpha = 1. The first
    derivative tends to e00/2 there; the second diverges for p < 2.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainViolation(f"alpha={alpha!r} outside (0, 1)")
    eta = eta_from_alpha(alpha)
    c, p, e00 = params.c, params.p, params.e00
    de0 = 0.5 * (e00 + c * eta ** (p - 1.0) * (p + (p - 1.0) * eta))
    d2e0 = -0.25 * c * p * (p - 1.0) * eta ** (p - 2.0) * (1.0 + eta) ** 3
    return de0, d2e0


def thermo_rfs(alpha: float,
               params: ThermoParams = ThermoParams()) -> tuple[float, float]:
    """Thermodynamic-limit susceptibilities (chi12, chi23).

    Composes the power-law energy and its derivatives into the
    energy-route kernel. Both diverge toward alpha = 1 with the
    (1-alpha)^(2p-4) asymptote; well below the fit range the chi12
    denominator leaves its domain and a DomainViolation propagates.
    """
    eta = eta_from_alpha(alpha)
    e0 = thermo_energy(eta, params)
    de0, d2e0 = thermo_derivatives(alpha, params)
    return rfs_energy_dimer(e0, de0, d2e0, alpha)
