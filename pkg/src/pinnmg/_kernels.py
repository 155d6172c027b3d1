"""Fused elementwise jet kernels for the hidden-layer activations.

Row layout matches ``autodiff._Plan``: ``m`` value rows (interior first), then
``ni`` rows each of x, y, xx and yy slots. The transcendental part of each
activation is evaluated beforehand by numpy (vectorized) and passed in as
``base``/``aux``; the kernels only do the polynomial jet algebra.
"""

import numba as nb
import numpy as np

_jit = {"cache": True, "nogil": True}

ACT_CODES = {"tanh": 0, "sigmoid": 1, "swish": 2, "sine": 3, "relu": 4}


def base_arrays(code, T):
    """Vectorized transcendental pieces for ``_act``: ``(base, aux)``."""
    if code == 0:
        return np.tanh(T), T
    if code in (1, 2):
        return np.tanh(0.5 * T), T
    if code == 3:
        return np.sin(T), np.cos(T)
    return T, T


@nb.njit(inline="always", **_jit)
def _act(code, b, a):
    # b, a as produced by base_arrays; returns (s, s', s'', s''')
    if code == 0:
        d1 = 1.0 - b * b
        d2 = -2.0 * b * d1
        return b, d1, d2, -2.0 * (d1 * d1 + b * d2)
    if code == 1 or code == 2:
        g = 0.5 * (1.0 + b)
        g1 = g * (1.0 - g)
        g2 = g1 * (1.0 - 2.0 * g)
        g3 = g2 * (1.0 - 2.0 * g) - 2.0 * g1 * g1
        if code == 1:
            return g, g1, g2, g3
        return a * g, g + a * g1, 2.0 * g1 + a * g2, 3.0 * g2 + a * g3
    if code == 3:
        return b, a, -b, -a
    if b > 0:
        return b, 1.0, 0.0, 0.0
    return 0.0 * b, 0.0 * b, 0.0 * b, 0.0 * b


@nb.njit(**_jit)
def jet_forward(Z, scale, code, m, ni, base, aux, out):
    """``out`` = activation jets of ``scale * Z``."""
    w = Z.shape[1]
    x0, y0, xx0, yy0 = m, m + ni, m + 2 * ni, m + 3 * ni
    for r in range(m):
        for k in range(w):
            s, d1, d2, _ = _act(code, base[r, k], aux[r, k])
            out[r, k] = s
            if r < ni:
                tx = scale * Z[x0 + r, k]
                ty = scale * Z[y0 + r, k]
                out[x0 + r, k] = d1 * tx
                out[y0 + r, k] = d1 * ty
                out[xx0 + r, k] = d2 * tx * tx + d1 * scale * Z[xx0 + r, k]
                out[yy0 + r, k] = d2 * ty * ty + d1 * scale * Z[yy0 + r, k]


@nb.njit(**_jit)
def jet_backward(Hbar, Z, scale, code, m, ni, base, aux, Zbar):
    """Pull the adjoint of the activation jets back to ``Z``.

    Writes ``Zbar`` and returns ``sum(Tbar * Z)``, the adjoint of ``scale``.
    """
    w = Z.shape[1]
    x0, y0, xx0, yy0 = m, m + ni, m + 2 * ni, m + 3 * ni
    acc = 0.0
    for r in range(m):
        for k in range(w):
            _, d1, d2, d3 = _act(code, base[r, k], aux[r, k])
            tb = Hbar[r, k] * d1
            if r < ni:
                tx = scale * Z[x0 + r, k]
                ty = scale * Z[y0 + r, k]
                txx = scale * Z[xx0 + r, k]
                tyy = scale * Z[yy0 + r, k]
                hx = Hbar[x0 + r, k]
                hy = Hbar[y0 + r, k]
                hxx = Hbar[xx0 + r, k]
                hyy = Hbar[yy0 + r, k]
                tb += (d2 * (hx * tx + hy * ty + hxx * txx + hyy * tyy)
                       + d3 * (hxx * tx * tx + hyy * ty * ty))
                tbx = hx * d1 + 2.0 * hxx * d2 * tx
                tby = hy * d1 + 2.0 * hyy * d2 * ty
                tbxx = hxx * d1
                tbyy = hyy * d1
                Zbar[x0 + r, k] = scale * tbx
                Zbar[y0 + r, k] = scale * tby
                Zbar[xx0 + r, k] = scale * tbxx
                Zbar[yy0 + r, k] = scale * tbyy
                acc += (tbx * Z[x0 + r, k] + tby * Z[y0 + r, k]
                        + tbxx * Z[xx0 + r, k] + tbyy * Z[yy0 + r, k])
            Zbar[r, k] = scale * tb
            acc += tb * Z[r, k]
    return acc
