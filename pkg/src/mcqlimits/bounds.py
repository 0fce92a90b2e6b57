"""Closed-form Cramér-Rao bounds on the signal variance.

All bounds take per-carrier couplings ``kappas``, squeezing magnitudes
``r`` and angles ``phi`` (and homodyne angles ``thetas`` where relevant)
together with the detection transmittivity ``eta``.  The per-carrier
squeezing matrices are diagonal, so every ``<A>`` reduces to
``sum_i kappa_i A_ii`` and each bound costs O(d).

Values are variances in units of ``h**2`` and include the ``h_sql**2 / 8``
prefactor.  Pass ``chi=-1`` for a negative mechanical response; it is
mapped onto the positive response by flipping the squeezing and homodyne
angles.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import ContractError, DivergenceError


class FormulaId(str, enum.Enum):
    QCRB_GENERAL = "qcrb_general"
    QCRB_GENERAL_EXPANDED = "qcrb_general_expanded"
    CRB_HOMODYNE_GENERAL = "crb_homodyne_general"
    CRB_SIGNAL_QUADRATURE = "crb_signal_quadrature"
    CRB_SIGNAL_QUADRATURE_EXPANDED = "crb_signal_quadrature_expanded"
    QCRB_EQUAL_SQUEEZING = "qcrb_equal_squeezing"
    QCRB_EQUAL_SQUEEZING_SIN = "qcrb_equal_squeezing_sin"
    CRB_SIGNAL_EQUAL_SQUEEZING = "crb_signal_equal_squeezing"
    CRB_SIGNAL_OPTIMAL_SQUEEZE_ANGLE = "crb_signal_optimal_squeeze_angle"
    QCRB_UNSQUEEZED = "qcrb_unsqueezed"
    CRB_SIGNAL_UNSQUEEZED = "crb_signal_unsqueezed"
    QCRB_LOSSLESS = "qcrb_lossless"


@dataclass(frozen=True)
class BoundResult:
    """A variance bound and where it came from.

    ``attaining_angles`` maps ``"theta"`` or ``"phi"`` to the angle(s) that
    reach the bound, when the formula prescribes them.
    """

    variance_bound: float
    formula_id: FormulaId
    attaining_angles: Optional[dict] = None
    h_sql: float = 1.0

    @property
    def normalized(self) -> float:
        """The bound in units of ``h_sql**2 / 8``."""
        return 8.0 * self.variance_bound / self.h_sql**2


@dataclass(frozen=True)
class SqueezeMatrices:
    """Diagonals of the per-carrier matrices entering the closed forms.

    ``F`` and ``G`` (sine and cosine of the homodyne angles) and ``Y`` are
    only present when angles are given.
    """

    Q: np.ndarray
    R: np.ndarray
    S: np.ndarray
    T: np.ndarray
    Gamma: np.ndarray
    P: np.ndarray
    W: np.ndarray
    F: Optional[np.ndarray] = None
    G: Optional[np.ndarray] = None
    Y: Optional[np.ndarray] = None


def squeeze_matrices(r, phi, eta: float, thetas=None) -> SqueezeMatrices:
    r = np.atleast_1d(np.asarray(r, dtype=float))
    phi = np.broadcast_to(np.asarray(phi, dtype=float), r.shape)
    ch, sh = np.cosh(2 * r), np.sinh(2 * r)
    Q = ch + sh * np.cos(2 * phi)
    R = ch - sh * np.cos(2 * phi)
    S = sh * np.sin(2 * phi)
    T = (1 - eta) + eta * R
    Gamma = 1.0 / ((1 - eta) ** 2 + eta**2 + 2 * eta * (1 - eta) * ch)
    P = eta + (1 - eta) * Q
    W = (1 - eta) + eta * Q - eta**2 * S**2 / T
    if thetas is None:
        return SqueezeMatrices(Q, R, S, T, Gamma, P, W)
    thetas = np.broadcast_to(np.asarray(thetas, dtype=float), r.shape)
    F, G = np.sin(thetas), np.cos(thetas)
    Y = (1 - eta) + eta * (ch - sh * np.cos(2 * phi + 2 * thetas))
    return SqueezeMatrices(Q, R, S, T, Gamma, P, W, F, G, Y)


def expect(kappas, A) -> float:
    """Coupling-weighted sum ``sum_ij sqrt(k_i k_j) A_ij``.

    A 1-D ``A`` is read as the diagonal of a diagonal matrix.
    """
    k = np.asarray(kappas, dtype=float)
    A = np.asarray(A, dtype=float)
    if A.ndim <= 1:
        return float(np.sum(k * A))
    s = np.sqrt(k)
    return float(s @ A @ s)


def _carrier_arrays(kappas, r, phi, thetas=None, chi: int = 1):
    k = np.atleast_1d(np.asarray(kappas, dtype=float))
    if k.ndim != 1:
        raise ContractError("couplings must be a 1-D sequence")
    if np.any(k < 0):
        raise ContractError("couplings must be non-negative")
    if not np.any(k > 0):
        raise DivergenceError("all couplings vanish: the signal does not reach the output")
    try:
        r = np.broadcast_to(np.asarray(r, dtype=float), k.shape)
        phi = np.broadcast_to(np.asarray(phi, dtype=float), k.shape)
        if thetas is not None:
            thetas = np.broadcast_to(np.asarray(thetas, dtype=float), k.shape)
    except ValueError as exc:
        raise ContractError("squeezing/homodyne arrays do not match the number of carriers") from exc
    if np.any(r < 0):
        raise ContractError("squeezing magnitudes must be non-negative")
    if chi not in (-1, 1):
        raise ContractError(f"response sign must be +1 or -1, got {chi}")
    if chi == -1:
        phi = -phi
        thetas = None if thetas is None else -thetas
    return k, r, phi, thetas


def _check_eta(eta: float) -> None:
    if eta == 0:
        raise ContractError("eta = 0: the detected light is pure environment noise and carries no information")
    if not 0 < eta <= 1:
        raise ContractError(f"transmittivity must lie in (0, 1], got {eta}")


def _check_kappa_tot(kappa_tot: float) -> None:
    if kappa_tot < 0:
        raise ContractError("total coupling must be non-negative")
    if kappa_tot == 0:
        raise DivergenceError("zero total coupling: the bound diverges")


def qcrb_general(kappas, r, phi, eta: float, *, h_sql: float = 1.0, chi: int = 1,
                 form: str = "compact") -> BoundResult:
    """Fundamental (measurement-optimised) limit with squeezing and loss.

    ``form="expanded"`` evaluates the algebraically rearranged expression;
    both must agree to rounding.
    """
    _check_eta(eta)
    k, r, phi, _ = _carrier_arrays(kappas, r, phi, chi=chi)
    m = squeeze_matrices(r, phi, eta)
    g, qg, sg = expect(k, m.Gamma), expect(k, m.Q * m.Gamma), expect(k, m.S * m.Gamma)
    a = (1 - eta) * g + eta * qg
    if form == "compact":
        value = (1 - (1 - eta) * eta * sg) ** 2 / (eta * a) + (1 - eta) * expect(k, m.P * m.Gamma)
        fid = FormulaId.QCRB_GENERAL
    elif form == "expanded":
        value = 1 / (eta * (1 - eta) * g + eta**2 * qg) - (1 - eta) * (
            2 * sg / a - eta * (1 - eta) * sg**2 / a - (eta * g + (1 - eta) * qg)
        )
        fid = FormulaId.QCRB_GENERAL_EXPANDED
    else:
        raise ContractError(f"unknown form {form!r}")
    return BoundResult(h_sql**2 / 8 * value, fid, None, h_sql)


def crb_homodyne_general(kappas, r, phi, thetas, eta: float, *, h_sql: float = 1.0,
                         chi: int = 1) -> BoundResult:
    """Homodyne readout of ``sin(theta_i) x1 + cos(theta_i) x2`` on every carrier."""
    _check_eta(eta)
    k, r, phi, measured = _carrier_arrays(kappas, r, phi, thetas, chi=chi)
    m = squeeze_matrices(r, phi, eta, measured)
    g2y = expect(k, m.G**2 / m.Y)
    if g2y <= 1e-20 * expect(k, 1 / m.Y):
        raise DivergenceError("every measured quadrature is orthogonal to the signal")
    mix = expect(k, m.G**2 * m.S / m.Y) + expect(k, m.F * m.G * m.Q / m.Y)
    value = (1 - eta * mix) ** 2 / (eta * g2y) + (1 - eta) * expect(k, m.Q / m.Y) + eta * g2y
    return BoundResult(h_sql**2 / 8 * value, FormulaId.CRB_HOMODYNE_GENERAL,
                       {"theta": np.broadcast_to(np.asarray(thetas, dtype=float), k.shape).copy()}, h_sql)


def crb_signal_quadrature(kappas, r, phi, eta: float, *, h_sql: float = 1.0, chi: int = 1,
                          form: str = "compact") -> BoundResult:
    """Homodyne along the signal quadrature (every ``theta_i = 0``)."""
    _check_eta(eta)
    k, r, phi, _ = _carrier_arrays(kappas, r, phi, chi=chi)
    m = squeeze_matrices(r, phi, eta)
    t_inv = expect(k, 1 / m.T)
    lead = (1 - eta * expect(k, m.S / m.T)) ** 2 / (eta * t_inv)
    if form == "compact":
        value = lead + expect(k, m.P / m.T)
        fid = FormulaId.CRB_SIGNAL_QUADRATURE
    elif form == "expanded":
        value = lead + expect(k, m.Q) - eta * expect(k, m.S**2 / m.T)
        fid = FormulaId.CRB_SIGNAL_QUADRATURE_EXPANDED
    else:
        raise ContractError(f"unknown form {form!r}")
    return BoundResult(h_sql**2 / 8 * value, fid, {"theta": np.zeros_like(k)}, h_sql)


def optimal_homodyne_angle_equal(kappa_tot: float, r: float, phi: float, eta: float, *,
                                 variant: str = "cos") -> float:
    """Homodyne angle (same on every carrier) reaching the equal-squeezing QCRB.

    ``variant="cosh"`` puts ``cosh 2phi`` in place of ``cos 2phi`` inside the
    squeezed coupling; it does not saturate the bound and is kept only so
    the two can be compared.
    """
    ch, sh = np.cosh(2 * r), np.sinh(2 * r)
    if variant == "cos":
        weight = ch + sh * np.cos(2 * phi)
    elif variant == "cosh":
        weight = ch + sh * np.cosh(2 * phi)
    else:
        raise ContractError(f"unknown variant {variant!r}")
    num = kappa_tot * weight - sh * np.sin(2 * phi)
    den = 1 - eta + eta * (ch + sh * np.cos(2 * phi))
    return float(np.arctan(eta * num / den))


def qcrb_equal_squeezing(kappa_tot: float, r: float, phi: float, eta: float, *,
                         h_sql: float = 1.0, variant: str = "cos") -> BoundResult:
    """Fundamental limit when every carrier gets the same squeezing ``r e^{i phi}``.

    Depends on the couplings only through their sum.  ``variant="sin"``
    evaluates the squeezed coupling with ``sin 2phi`` instead of ``cos 2phi``;
    it disagrees with the exact state calculation and is kept for
    comparison only.
    """
    _check_eta(eta)
    _check_kappa_tot(kappa_tot)
    ch, sh = np.cosh(2 * r), np.sinh(2 * r)
    s2 = sh * np.sin(2 * phi)
    if variant == "cos":
        K = kappa_tot * (ch + sh * np.cos(2 * phi))
        value = (1 + 2 * eta * (1 - eta) * (ch - 1) - 2 * eta * (1 - eta) * kappa_tot * s2
                 + eta * (1 - eta) * kappa_tot * K) / (eta * ((1 - eta) * kappa_tot + eta * K))
        fid = FormulaId.QCRB_EQUAL_SQUEEZING
    elif variant == "sin":
        X = ch + s2
        value = (eta**2 + (1 - eta) * ((1 - eta) + 2 * eta * ch - 2 * eta * kappa_tot * s2
                                       + eta * kappa_tot**2 * X)) / (
            eta * kappa_tot * ((1 - eta) + eta * X))
        fid = FormulaId.QCRB_EQUAL_SQUEEZING_SIN
    else:
        raise ContractError(f"unknown variant {variant!r}")
    angles = None
    if variant == "cos":
        angles = {"theta": optimal_homodyne_angle_equal(kappa_tot, r, phi, eta)}
    return BoundResult(h_sql**2 / 8 * value, fid, angles, h_sql)


def crb_signal_equal_squeezing(kappa_tot: float, r: float, phi: float, eta: float, *,
                               h_sql: float = 1.0) -> BoundResult:
    _check_eta(eta)
    _check_kappa_tot(kappa_tot)
    ch, sh = np.cosh(2 * r), np.sinh(2 * r)
    value = ((1 - eta + eta * (ch - sh * np.cos(2 * phi))) / (eta * kappa_tot)
             + kappa_tot * (ch + sh * np.cos(2 * phi)) - 2 * sh * np.sin(2 * phi))
    return BoundResult(h_sql**2 / 8 * value, FormulaId.CRB_SIGNAL_EQUAL_SQUEEZING, {"theta": 0.0}, h_sql)


def crb_signal_optimal_squeeze_angle(kappa_tot: float, r: float, eta: float, *,
                                     h_sql: float = 1.0) -> BoundResult:
    """Signal-quadrature readout with the frequency-dependent squeezing angle ``arctan(kappa_tot)``."""
    _check_eta(eta)
    _check_kappa_tot(kappa_tot)
    e = np.exp(-2 * r)
    value = (1 - eta + eta * e) / (eta * kappa_tot) + e * kappa_tot
    return BoundResult(h_sql**2 / 8 * value, FormulaId.CRB_SIGNAL_OPTIMAL_SQUEEZE_ANGLE,
                       {"phi": float(np.arctan(kappa_tot)), "theta": 0.0}, h_sql)


def qcrb_unsqueezed(kappa_tot: float, eta: float, *, h_sql: float = 1.0) -> BoundResult:
    _check_eta(eta)
    _check_kappa_tot(kappa_tot)
    value = 1 / (eta * kappa_tot) + (1 - eta) * kappa_tot
    return BoundResult(h_sql**2 / 8 * value, FormulaId.QCRB_UNSQUEEZED,
                       {"theta": float(np.arctan(eta * kappa_tot))}, h_sql)


def crb_signal_unsqueezed(kappa_tot: float, eta: float, *, h_sql: float = 1.0) -> BoundResult:
    _check_eta(eta)
    _check_kappa_tot(kappa_tot)
    value = 1 / (eta * kappa_tot) + kappa_tot
    return BoundResult(h_sql**2 / 8 * value, FormulaId.CRB_SIGNAL_UNSQUEEZED, {"theta": 0.0}, h_sql)


def squeezed_kappa_tot(kappas, r, phi) -> float:
    """``K_tot = sum_i kappa_i (cosh 2r_i + sinh 2r_i cos 2phi_i)``."""
    k, r, phi, _ = _carrier_arrays(kappas, r, phi)
    return expect(k, np.cosh(2 * r) + np.sinh(2 * r) * np.cos(2 * phi))


def optimal_homodyne_angle_lossless(kappas, r, phi) -> np.ndarray:
    k, r, phi, _ = _carrier_arrays(kappas, r, phi)
    K = squeezed_kappa_tot(k, r, phi)
    ch, sh = np.cosh(2 * r), np.sinh(2 * r)
    return np.arctan((K - sh * np.sin(2 * phi)) / (ch + sh * np.cos(2 * phi)))


def qcrb_lossless(kappas, r, phi, *, h_sql: float = 1.0) -> BoundResult:
    """Lossless fundamental limit; shot-noise-like ``1 / K_tot``."""
    K = squeezed_kappa_tot(kappas, r, phi)
    return BoundResult(h_sql**2 / (8 * K), FormulaId.QCRB_LOSSLESS,
                       {"theta": optimal_homodyne_angle_lossless(kappas, r, phi)}, h_sql)
