"""Gaussian states in the two-photon quadrature basis.

States are described by a real mean vector ``d`` and a real covariance
``sigma`` normalised so that the vacuum has ``sigma = 1``.  A state of
``n`` modes carries ``2n`` quadratures arranged as ``n`` conjugate pairs.
In the two-photon basis the conjugate pairs are ``(x1, x2)`` and
``(p1, p2)`` of each carrier, so a sensor with ``d`` carriers is described
either by its x-sector alone (``n = d``) or by the full phase space
``(x-sector; p-sector)`` (``n = 2d``).

Everything here is a pure function of immutable values.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .exceptions import ContractError, DimensionError, IllConditionedError

#: Largest covariance condition number accepted before inversion.
MAX_CONDITION = 1e12

_PAIR_J = np.array([[0.0, 1.0], [-1.0, 0.0]])


class ModeOrdering(enum.Enum):
    """Layout of the ``2n`` quadratures of ``n`` conjugate pairs.

    ``INTERLEAVED`` is ``(a1, b1, a2, b2, ...)`` and ``BLOCKED`` is
    ``(a1, ..., an, b1, ..., bn)`` where ``(ai, bi)`` is the i-th pair,
    e.g. ``(x1, x2)`` of carrier i.
    """

    INTERLEAVED = "interleaved"
    BLOCKED = "blocked"

    def permutation(self, n_pairs: int) -> np.ndarray:
        """Orthogonal matrix taking interleaved vectors to this ordering."""
        size = 2 * n_pairs
        if self is ModeOrdering.INTERLEAVED:
            return np.eye(size)
        order = np.concatenate([np.arange(0, size, 2), np.arange(1, size, 2)])
        return np.eye(size)[order]


def commutation_matrix(n_pairs: int, ordering: ModeOrdering = ModeOrdering.INTERLEAVED) -> np.ndarray:
    """Commutation matrix ``J`` with ``[q_j, q_k] = i J_jk``."""
    J = np.kron(np.eye(n_pairs), _PAIR_J)
    P = ordering.permutation(n_pairs)
    return P @ J @ P.T


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GaussianState:
    """First and second moments of a Gaussian state.

    Parameters
    ----------
    d : array_like, shape (2n,)
        Quadrature means.
    sigma : array_like, shape (2n, 2n)
        Symmetric covariance matrix, vacuum = identity.
    ordering : ModeOrdering
        How the ``2n`` quadratures are laid out.
    """

    d: np.ndarray
    sigma: np.ndarray
    ordering: ModeOrdering = ModeOrdering.INTERLEAVED

    def __post_init__(self):
        d = _frozen(self.d)
        sigma = _frozen(self.sigma)
        if d.ndim != 1 or d.size % 2:
            raise DimensionError(f"mean vector must have even length, got shape {d.shape}")
        if sigma.shape != (d.size, d.size):
            raise DimensionError(f"covariance shape {sigma.shape} does not match mean length {d.size}")
        scale = max(np.max(np.abs(sigma)), 1.0)
        if np.max(np.abs(sigma - sigma.T)) > 1e-12 * scale:
            raise ContractError("covariance matrix is not symmetric")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "sigma", sigma)

    @property
    def n_modes(self) -> int:
        return self.d.size // 2

    @classmethod
    def vacuum(cls, n_modes: int, ordering: ModeOrdering = ModeOrdering.INTERLEAVED) -> "GaussianState":
        return cls(np.zeros(2 * n_modes), np.eye(2 * n_modes), ordering)

    def commutation_matrix(self) -> np.ndarray:
        return commutation_matrix(self.n_modes, self.ordering)

    def reordered(self, ordering: ModeOrdering) -> "GaussianState":
        """The same state with its quadratures laid out in ``ordering``."""
        if ordering is self.ordering:
            return self
        n = self.n_modes
        P = ordering.permutation(n) @ self.ordering.permutation(n).T
        return GaussianState(P @ self.d, P @ self.sigma @ P.T, ordering)


@dataclass(frozen=True)
class SymplecticMap:
    """Affine Gaussian channel ``d -> S d + d_shift``, ``sigma -> S sigma S^T``."""

    S: np.ndarray
    d_shift: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        S = _frozen(self.S)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise DimensionError(f"symplectic matrix must be square, got shape {S.shape}")
        shift = np.zeros(S.shape[0]) if self.d_shift is None else self.d_shift
        shift = _frozen(shift)
        if shift.shape != (S.shape[0],):
            raise DimensionError("displacement shift does not match the matrix size")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "d_shift", shift)

    def symplectic_error(self, ordering: ModeOrdering = ModeOrdering.INTERLEAVED) -> float:
        """Max-norm of ``S J S^T - J``."""
        J = commutation_matrix(self.S.shape[0] // 2, ordering)
        return float(np.max(np.abs(self.S @ J @ self.S.T - J)))

    def is_symplectic(self, atol: float = 1e-10, ordering: ModeOrdering = ModeOrdering.INTERLEAVED) -> bool:
        return self.symplectic_error(ordering) < atol


def symplectic_from_complex(M) -> SymplecticMap:
    """Real phase-space representation of a complex input-output matrix.

    The returned matrix is ``[[Re M, -Im M], [Im M, Re M]]`` acting on
    ``(x; p)``, each sector following the row order of ``M``.  When the rows
    of ``M`` are the interleaved ``(x1, x2)`` pairs of each carrier, the
    result is already in interleaved pair ordering of the full phase space.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"input-output matrix must be square, got shape {M.shape}")
    S = np.block([[M.real, -M.imag], [M.imag, M.real]])
    return SymplecticMap(S)


def displacement_from_signal(h, V) -> np.ndarray:
    """Mean shift ``sqrt(2) (Re[h V]; Im[h V])`` produced by a signal ``h``."""
    hV = complex(h) * np.asarray(V, dtype=complex)
    return np.sqrt(2.0) * np.concatenate([hV.real, hV.imag])


def apply_channel(state: GaussianState, channel: SymplecticMap) -> GaussianState:
    if channel.S.shape[0] != state.d.size:
        raise DimensionError(
            f"channel acts on {channel.S.shape[0]} quadratures, state has {state.d.size}"
        )
    S = channel.S
    sigma = S @ state.sigma @ S.T
    return GaussianState(S @ state.d + channel.d_shift, 0.5 * (sigma + sigma.T), state.ordering)


def apply_loss(state: GaussianState, eta: float, sigma_env=None) -> GaussianState:
    """Beam splitter of transmittivity ``eta`` mixing in an environment state."""
    if not 0.0 <= eta <= 1.0:
        raise ContractError(f"transmittivity must lie in [0, 1], got {eta}")
    env = np.eye(state.d.size) if sigma_env is None else np.asarray(sigma_env, dtype=float)
    if env.shape != state.sigma.shape:
        raise DimensionError("environment covariance does not match the state")
    return GaussianState(np.sqrt(eta) * state.d, eta * state.sigma + (1.0 - eta) * env, state.ordering)


def homodyne_rotation(thetas: Sequence[float], n_pairs: int) -> SymplecticMap:
    """Rotation by ``theta_i`` within the ``(x1, x2)`` pair of every carrier.

    ``n_pairs`` is either ``len(thetas)`` (x-sector only) or twice that
    (full phase space, where the ``(p1, p2)`` pairs rotate identically).
    The measured quadrature ``x2`` becomes ``sin(theta) x1 + cos(theta) x2``.
    """
    thetas = np.asarray(thetas, dtype=float).ravel()
    if n_pairs == thetas.size:
        angles = thetas
    elif n_pairs == 2 * thetas.size:
        angles = np.concatenate([thetas, thetas])
    else:
        raise DimensionError(f"{thetas.size} homodyne angles do not fit a state of {n_pairs} pairs")
    blocks = [np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]]) for t in angles]
    return SymplecticMap(scipy.linalg.block_diag(*blocks))


def homodyne_rotate(state: GaussianState, thetas: Sequence[float]) -> GaussianState:
    rotation = homodyne_rotation(thetas, state.n_modes)
    if state.ordering is ModeOrdering.INTERLEAVED:
        return apply_channel(state, rotation)
    rotated = apply_channel(state.reordered(ModeOrdering.INTERLEAVED), rotation)
    return rotated.reordered(state.ordering)


def marginalize(state: GaussianState, indices: Sequence[int]):
    """Marginal mean and covariance of a set of mutually commuting quadratures.

    Returns
    -------
    w : ndarray
        Sub-vector of the means.
    Sigma : ndarray
        Principal sub-matrix of the covariance.
    """
    idx = np.asarray(indices, dtype=int).ravel()
    if idx.size == 0:
        raise ContractError("no quadratures selected")
    if np.unique(idx).size != idx.size:
        raise ContractError(f"repeated quadrature index in {idx.tolist()}")
    if idx.min() < 0 or idx.max() >= state.d.size:
        raise ContractError(f"quadrature index out of range for {state.d.size} quadratures")
    J = state.commutation_matrix()[np.ix_(idx, idx)]
    if np.any(J != 0.0):
        bad = np.argwhere(J != 0.0)[0]
        raise ContractError(
            f"quadratures {idx[bad[0]]} and {idx[bad[1]]} do not commute and cannot be measured jointly"
        )
    return state.d[idx].copy(), state.sigma[np.ix_(idx, idx)].copy()


def _cholesky(Sigma: np.ndarray):
    Sigma = np.atleast_2d(np.asarray(Sigma, dtype=float))
    eig = np.linalg.eigvalsh(Sigma)
    if eig[0] <= 0.0:
        raise IllConditionedError(f"covariance is not positive definite (smallest eigenvalue {eig[0]:.3e})")
    cond = eig[-1] / eig[0]
    if cond > MAX_CONDITION:
        raise IllConditionedError(
            f"covariance condition number {cond:.3e} exceeds {MAX_CONDITION:.0e}; "
            "squeezing or coupling too extreme for double precision"
        )
    return scipy.linalg.cho_factor(Sigma)


def gaussian_cfi(dw_dh, Sigma, dSigma_dh=None) -> float:
    """Classical Fisher information of a Gaussian distribution.

    ``2 dw^T Sigma^-1 dw + tr[(dSigma Sigma^-1)^2] / 2``; the factor 2 on
    the first term comes from the vacuum-is-identity normalisation.
    """
    dw = np.atleast_1d(np.asarray(dw_dh, dtype=float))
    Sigma = np.atleast_2d(np.asarray(Sigma, dtype=float))
    if Sigma.shape != (dw.size, dw.size):
        raise DimensionError("mean derivative and covariance sizes differ")
    chol = _cholesky(Sigma)
    info = 2.0 * float(dw @ scipy.linalg.cho_solve(chol, dw))
    if dSigma_dh is not None:
        dS = np.atleast_2d(np.asarray(dSigma_dh, dtype=float))
        if dS.shape != Sigma.shape:
            raise DimensionError("covariance derivative has the wrong shape")
        if np.any(dS):
            X = scipy.linalg.cho_solve(chol, dS.T).T  # dSigma Sigma^-1
            info += 0.5 * float(np.trace(X @ X))
    return info


def displacement_qfi(state: GaussianState, dd_dh) -> float:
    """QFI ``2 dd^T sigma^-1 dd`` for a parameter carried only by the means."""
    dd = np.asarray(dd_dh, dtype=float)
    if dd.shape != state.d.shape:
        raise DimensionError("mean derivative does not match the state")
    chol = _cholesky(state.sigma)
    return 2.0 * float(dd @ scipy.linalg.cho_solve(chol, dd))


def two_photon_basis_map(n_sidebands: int) -> SymplecticMap:
    """Change of basis from sideband to two-photon quadratures.

    Input ordering is ``(x+, p+, x-, p-)`` per carrier; output is the full
    two-photon phase space ``(x1, x2, ...; p1, p2, ...)``.
    """
    if n_sidebands < 1:
        raise ContractError("need at least one sideband pair")
    s = 1.0 / np.sqrt(2.0)
    n = n_sidebands
    S = np.zeros((4 * n, 4 * n))
    for i in range(n):
        xp, pp, xm, pm = 4 * i, 4 * i + 1, 4 * i + 2, 4 * i + 3
        x1, x2 = 2 * i, 2 * i + 1
        p1, p2 = 2 * n + 2 * i, 2 * n + 2 * i + 1
        S[x1, [xp, xm]] = s, s
        S[x2, [pp, pm]] = s, s
        S[p1, [pp, pm]] = s, -s
        S[p2, [xp, xm]] = -s, s
    return SymplecticMap(S)
