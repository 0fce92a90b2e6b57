"""Brute-force Fisher information from the explicit output Gaussian state.

These functions push the squeezed input through the assembled sensor map,
the loss channel and (for homodyne) the readout rotation, then invert the
resulting covariance numerically.  They share no algebra with
:mod:`mcqlimits.bounds` and serve as its independent check.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from . import gaussian as gc
from .exceptions import ContractError
from .sensor import CouplingSet, build_model, squeezed_covariance


def output_state(kappas, r, phi, eta, *, betas=None, chi=1, h_sql=1.0, h=0.0, full=True):
    """Detected state and the derivative of its means with respect to ``|h|``.

    Parameters
    ----------
    h : complex
        Signal value; only its phase matters for the derivative.
    full : bool
        Keep the p-sector.  With ``full=False`` the phases ``betas`` must
        vanish so the x-sector decouples.

    Returns
    -------
    state : GaussianState
    dd_dh : ndarray
    """
    cs = CouplingSet(kappas, h_sql, betas, chi)
    model = build_model(cs)
    sigma0 = squeezed_covariance(np.broadcast_to(r, cs.kappas.shape), np.broadcast_to(phi, cs.kappas.shape))
    phase = np.exp(1j * np.angle(h)) if h != 0 else 1.0
    if full:
        channel = gc.symplectic_from_complex(model.M)
        shift = gc.displacement_from_signal(h, model.V)
        direction = gc.displacement_from_signal(phase, model.V)
        state_in = gc.GaussianState(np.zeros(channel.S.shape[0]), scipy.linalg.block_diag(sigma0, sigma0))
    else:
        if np.any(cs.betas != 0):
            raise ContractError("the x-sector alone is only closed when every phase is zero")
        channel = gc.SymplecticMap(model.M_real)
        n = model.V.size
        shift = gc.displacement_from_signal(h, model.V)[:n]
        direction = gc.displacement_from_signal(phase, model.V)[:n]
        state_in = gc.GaussianState(np.zeros(n), sigma0)
    evolved = gc.apply_channel(state_in, gc.SymplecticMap(channel.S, shift))
    return gc.apply_loss(evolved, eta), np.sqrt(eta) * direction


def qfi_numeric(kappas, r, phi, eta, *, betas=None, chi=1, h_sql=1.0, signal_phase=0.0) -> float:
    """QFI for ``|h|`` from the full phase-space output state."""
    state, dd = output_state(kappas, r, phi, eta, betas=betas, chi=chi, h_sql=h_sql,
                             h=np.exp(1j * signal_phase), full=True)
    return gc.displacement_qfi(state, dd)


def homodyne_cfi_numeric(kappas, r, phi, thetas, eta, *, chi=1, h_sql=1.0) -> float:
    """CFI of per-carrier homodyne readout from the explicit marginal distribution."""
    state, dd = output_state(kappas, r, phi, eta, chi=chi, h_sql=h_sql, full=False)
    thetas = np.broadcast_to(np.asarray(thetas, dtype=float), (state.n_modes,))
    rotation = gc.homodyne_rotation(thetas, state.n_modes)
    rotated = gc.homodyne_rotate(state, thetas)
    measured = np.arange(1, state.d.size, 2)
    _, Sigma = gc.marginalize(rotated, measured)
    dw = (rotation.S @ dd)[measured]
    return gc.gaussian_cfi(dw, Sigma, np.zeros_like(Sigma))
