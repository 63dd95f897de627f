"""Numpy implementation of the quadrature-moment kernel.

Used when the compiled ``_ckernels`` module is unavailable, and as the
reference the compiled version is tested against.
"""
import math

import numpy as np

_SQRT2 = math.sqrt(2.0)


def offdiag_moments(coeff, lam, pp, pq):
    """First moments and cross-site second moments of the X/Y quadratures.

    Parameters
    ----------
    coeff : (G, T, N) complex
        ``exp(-i R.r_eta) u_t`` per direction, pair and atom.
    lam : (T, N) complex
        ``<|a><b|>`` on each atom.
    pp, pq : (T, N, N) complex
        ``<|a><b| x |a><b|>`` and ``<|a><b| x |b><a|>`` on atom pairs; the
        diagonal is ignored.

    Returns
    -------
    mean_x, mean_y, cross_x, cross_y : (G, T) float
        ``cross_*`` is ``sum_{eta != eta'} <G^eta G^eta'>``.
    """
    coeff = np.asarray(coeff, dtype=np.complex128)
    n = coeff.shape[-1]
    off = 1.0 - np.eye(n)
    pp = np.asarray(pp) * off
    pq = np.asarray(pq) * off
    m = np.einsum("gti,ti->gt", coeff, lam)
    cp = np.einsum("gti,gtj,tij->gt", coeff, coeff, pp).real
    cq = np.einsum("gti,gtj,tij->gt", coeff, coeff.conj(), pq).real
    return _SQRT2 * m.real, -_SQRT2 * m.imag, cp + cq, cq - cp
