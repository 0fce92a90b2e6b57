"""Interferometer parameters, optomechanical couplings and the input-output model."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.constants
import scipy.linalg

from .exceptions import ContractError, SingularityError

HBAR = scipy.constants.hbar
C = scipy.constants.c


@dataclass(frozen=True)
class SensorParams:
    """Mechanical and optical parameters shared by all carriers (SI units).

    ``Omega`` is the sideband angular frequency; ``resonance`` is the
    mechanical (pendulum or optical-spring) resonance in rad/s, if any.
    """

    m: float
    L: float
    Omega: float
    eta: float = 1.0
    resonance: Optional[float] = None
    hbar: float = HBAR
    c: float = C

    def __post_init__(self):
        if self.m <= 0 or self.L <= 0:
            raise ContractError("mass and arm length must be positive")
        if self.Omega <= 0:
            raise SingularityError(f"sideband frequency must be positive, got {self.Omega}")
        if not 0.0 <= self.eta <= 1.0:
            raise ContractError(f"transmittivity must lie in [0, 1], got {self.eta}")

    def at(self, Omega: float) -> "SensorParams":
        return dataclasses.replace(self, Omega=Omega)


@dataclass(frozen=True)
class CarrierConfig:
    """One optical carrier: power, frequency, bandwidth, phase and protocol angles.

    ``I`` is the circulating arm power (W), ``omega`` the carrier angular
    frequency, ``gamma`` the cavity half-bandwidth, ``beta`` the propagation
    phase, ``r``/``phi`` the injected squeezing and ``theta`` the homodyne
    angle.
    """

    I: float
    omega: float
    gamma: float
    beta: float = 0.0
    r: float = 0.0
    phi: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if self.I < 0:
            raise ContractError("carrier power must be non-negative")
        if self.omega <= 0 or self.gamma <= 0:
            raise ContractError("carrier frequency and bandwidth must be positive")
        if self.r < 0:
            raise ContractError("squeezing magnitude must be non-negative")


@dataclass(frozen=True)
class CouplingSet:
    kappas: np.ndarray
    h_sql: float = 1.0
    betas: Optional[np.ndarray] = None
    chi: int = 1

    def __post_init__(self):
        kappas = np.atleast_1d(np.asarray(self.kappas, dtype=float))
        if np.any(kappas < 0):
            raise ContractError("couplings must be non-negative")
        betas = np.zeros_like(kappas) if self.betas is None else np.atleast_1d(np.asarray(self.betas, dtype=float))
        if betas.shape != kappas.shape:
            raise ContractError("one phase per carrier required")
        if self.chi not in (-1, 1):
            raise ContractError(f"response sign must be +1 or -1, got {self.chi}")
        object.__setattr__(self, "kappas", kappas)
        object.__setattr__(self, "betas", betas)

    @property
    def n_carriers(self) -> int:
        return self.kappas.size

    @property
    def kappa_tot(self) -> float:
        return float(self.kappas.sum())


@dataclass(frozen=True)
class InputOutputModel:
    """``b = M a + h V`` with ``M = B M_real B`` and ``V = B V_real``.

    Rows and columns follow the interleaved ``(x1, x2)`` ordering of each
    carrier.
    """

    M: np.ndarray
    V: np.ndarray
    B: np.ndarray

    @property
    def M_real(self) -> np.ndarray:
        Binv = np.conj(self.B)
        return (Binv @ self.M @ Binv).real

    @property
    def V_real(self) -> np.ndarray:
        return (np.conj(self.B) @ self.V).real


def kappa_tuned(carrier: CarrierConfig, params: SensorParams) -> float:
    """Coupling of a carrier in the tuned interferometer, linear in its power."""
    W = params.Omega
    return 16.0 * carrier.I * carrier.omega * carrier.gamma / (
        params.m * params.c * params.L * W**2 * (carrier.gamma**2 + W**2)
    )


def kappa_resonant(carrier: CarrierConfig, params: SensorParams):
    """Coupling magnitude and response sign with a mechanical resonance.

    Returns
    -------
    kappa : float
    chi : int
        ``sign(Omega^2 - resonance^2)``.
    """
    res = 0.0 if params.resonance is None else params.resonance
    gap = params.Omega**2 - res**2
    if gap == 0.0:
        raise SingularityError(
            f"sideband frequency {params.Omega} rad/s sits on the mechanical resonance"
        )
    kappa = abs(2.0 * np.sqrt(2.0) * carrier.I * carrier.omega / (params.m * params.c**2 * gap))
    return kappa, (1 if gap > 0 else -1)


def h_sql(params: SensorParams) -> float:
    return float(np.sqrt(8.0 * params.hbar / (params.m * params.Omega**2 * params.L**2)))


def couplings(carriers: Sequence[CarrierConfig], params: SensorParams, model: str = "tuned") -> CouplingSet:
    """Evaluate every carrier's coupling at ``params.Omega``.

    ``model`` is ``"tuned"`` or ``"resonant"``; it is never guessed.
    """
    if model == "tuned":
        if params.resonance is not None:
            raise ContractError("the tuned coupling model has no mechanical resonance")
        kappas = [kappa_tuned(c, params) for c in carriers]
        chi = 1
    elif model == "resonant":
        pairs = [kappa_resonant(c, params) for c in carriers]
        kappas = [k for k, _ in pairs]
        chi = pairs[0][1] if pairs else 1
    else:
        raise ContractError(f"unknown coupling model {model!r}")
    return CouplingSet(np.array(kappas), h_sql(params), np.array([c.beta for c in carriers]), chi)


def build_model(cs: CouplingSet) -> InputOutputModel:
    d = cs.n_carriers
    k = np.sqrt(cs.kappas)
    M_real = np.eye(2 * d)
    # x1 of carrier k drives x2 of carrier j
    M_real[1::2, 0::2] -= cs.chi * np.outer(k, k)
    V_real = np.zeros(2 * d)
    V_real[1::2] = cs.chi * np.sqrt(2.0) * k / cs.h_sql
    B = np.diag(np.repeat(np.exp(1j * cs.betas), 2))
    return InputOutputModel(B @ M_real @ B, B @ V_real, B)


def squeezed_covariance(r, phi) -> np.ndarray:
    """Direct sum of squeezed-vacuum ``(x1, x2)`` covariances, one block per carrier."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    phi = np.broadcast_to(np.asarray(phi, dtype=float), r.shape)
    ch, sh = np.cosh(2 * r), np.sinh(2 * r)
    blocks = [
        np.array([[c + s * np.cos(2 * p), s * np.sin(2 * p)], [s * np.sin(2 * p), c - s * np.cos(2 * p)]])
        for c, s, p in zip(ch, sh, phi)
    ]
    return scipy.linalg.block_diag(*blocks)


def input_covariance(carriers: Sequence[CarrierConfig]) -> np.ndarray:
    """x-sector covariance of the squeezed vacuum entering the dark port."""
    return squeezed_covariance([c.r for c in carriers], [c.phi for c in carriers])


def chi_negative_equivalent(carriers: Sequence[CarrierConfig]) -> list:
    """Map a configuration seen by a negative response onto the positive-response one.

    Squeezing and homodyne angles flip sign; everything else is unchanged.
    """
    return [dataclasses.replace(c, phi=-c.phi, theta=-c.theta) for c in carriers]


def variance_to_psd(variance_bound: float) -> float:
    """Single-sided spectral density equivalent of a variance bound."""
    if not variance_bound > 0:
        raise ContractError(f"variance bound must be positive, got {variance_bound}")
    return 4.0 * variance_bound


def variance_to_amplitude(variance_bound: float) -> float:
    """``2 * Delta h``, the amplitude-spectral-density-like quantity used in plots."""
    if not variance_bound > 0:
        raise ContractError(f"variance bound must be positive, got {variance_bound}")
    return 2.0 * float(np.sqrt(variance_bound))
