"""Laplacian of the surrogate by second-order forward jets, the residual loss,
and its exact parameter gradient by a hand-written reverse pass.

Every network unit carries the jet ``(v, v_x, v_y, v_xx, v_yy)``. Affine
layers act linearly on all five slots (bias only on ``v``); an activation
``h = s(t)`` maps

    h_x  = s'(t) t_x
    h_xx = s''(t) t_x**2 + s'(t) t_xx

and likewise for ``y``. The mixed derivative is never formed.

Internally all jet slots of all points are stacked row-wise into one matrix
so each layer is a single GEMM: rows ``[0, M)`` hold values for the ``Ni``
interior points followed by the ``Nb`` boundary points, then come ``Ni`` rows
each of ``x``, ``y``, ``xx`` and ``yy`` slots for the interior points only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._kernels import ACT_CODES, base_arrays, jet_backward, jet_forward
from .net import NetworkConfig, unpack
from .problems import Problem
from .sampling import TrainingSet, source_values


class UnsupportedDerivativeError(ValueError):
    pass


class Jet2(NamedTuple):
    v: np.ndarray
    dx: np.ndarray
    dy: np.ndarray
    dxx: np.ndarray
    dyy: np.ndarray


@dataclass(frozen=True)
class LossBreakdown:
    total: float
    interior: float
    boundary: float
    n_interior: int
    n_boundary: int
    boundary_weight: float = 1.0


def tree_sum(values: np.ndarray) -> float:
    """Order-independent sum: sort, then numpy's pairwise reduction."""
    return float(np.sum(np.sort(np.ravel(values)), dtype=values.dtype))


def _check_smooth(config: NetworkConfig, allow_nonsmooth: bool):
    if not config.activation.smooth and not allow_nonsmooth:
        raise UnsupportedDerivativeError(
            f"{config.activation.value} has no usable second derivative; "
            "the Laplacian of the surrogate is undefined")


class _Plan:
    """Row bookkeeping for the stacked jet matrix."""

    def __init__(self, n_int: int, n_bnd: int):
        self.ni, self.nb = n_int, n_bnd
        self.m = n_int + n_bnd
        m, ni = self.m, n_int
        self.val = slice(0, m)
        self.val_int = slice(0, ni)
        self.val_bnd = slice(ni, m)
        self.x = slice(m, m + ni)
        self.y = slice(m + ni, m + 2 * ni)
        self.xx = slice(m + 2 * ni, m + 3 * ni)
        self.yy = slice(m + 3 * ni, m + 4 * ni)
        self.rows = m + 4 * ni

    def seed(self, interior: np.ndarray, boundary: np.ndarray, dtype) -> np.ndarray:
        H = np.zeros((self.rows, 2), dtype=dtype)
        H[self.val_int] = interior
        H[self.val_bnd] = boundary
        H[self.x, 0] = 1
        H[self.y, 1] = 1
        return H


def _forward_stack(layers, slopes, config, plan, H0, keep: bool):
    """Propagate stacked jets.

    Returns the output-layer matrix and, with ``keep``, the tape
    ``[(layer input, pre-activation, scale, base, aux), ...]``; the output
    layer entry holds only its input.
    """
    code = ACT_CODES[config.activation.base]
    dtype = config.dtype
    adaptive = config.activation.adaptive
    tape = []
    H = H0
    last = len(layers) - 1
    for l, (W, b) in enumerate(layers):
        Z = H @ W.T
        Z[plan.val] += b
        if keep:
            tape.append((H,))
        if l == last:
            return Z, tape
        scale = dtype(config.laaf_factor) * slopes[l] if adaptive else dtype(1)
        base, aux = base_arrays(code, scale * Z[plan.val] if adaptive else Z[plan.val])
        if keep:
            tape[-1] = (H, Z, scale, base, aux)
        H = np.empty_like(Z)
        jet_forward(Z, scale, code, plan.m, plan.ni, base, aux, H)
    raise AssertionError("network has no output layer")


def forward_laplacian(params, config: NetworkConfig, points, allow_nonsmooth: bool = False):
    """Return ``(u, lap u)`` at ``points`` (shape ``(n, 2)`` or a single pair)."""
    _check_smooth(config, allow_nonsmooth)
    layers, slopes = unpack(params, config)
    pts = np.atleast_2d(np.asarray(points, dtype=config.dtype))
    plan = _Plan(pts.shape[0], 0)
    Z, _ = _forward_stack(layers, slopes, config, plan, plan.seed(pts, pts[:0], config.dtype), False)
    u = Z[plan.val_int, 0]
    lap = Z[plan.xx, 0] + Z[plan.yy, 0]
    if np.ndim(points) == 1:
        return u[0], lap[0]
    return u, lap


def forward_jets(params, config: NetworkConfig, points) -> Jet2:
    """Full output jet ``(u, u_x, u_y, u_xx, u_yy)`` at ``points``."""
    _check_smooth(config, False)
    layers, slopes = unpack(params, config)
    pts = np.atleast_2d(np.asarray(points, dtype=config.dtype))
    plan = _Plan(pts.shape[0], 0)
    Z, _ = _forward_stack(layers, slopes, config, plan, plan.seed(pts, pts[:0], config.dtype), False)
    return Jet2(Z[plan.val_int, 0], Z[plan.x, 0], Z[plan.y, 0], Z[plan.xx, 0], Z[plan.yy, 0])


class LossFunction:
    """Residual loss bound to a training set; ``value`` and ``value_and_grad``.

    The training set and source values are cast once to the config precision.
    """

    def __init__(self, config: NetworkConfig, tset: TrainingSet, problem: Problem,
                 boundary_weight: float = 1.0, allow_nonsmooth: bool = False):
        _check_smooth(config, allow_nonsmooth)
        if tset.n_interior == 0:
            raise ValueError("training set has no interior points")
        self.config = config
        self.boundary_weight = float(boundary_weight)
        dtype = config.dtype
        self.plan = _Plan(tset.n_interior, tset.n_boundary)
        self.H0 = self.plan.seed(tset.interior, tset.boundary, dtype)
        self.f = source_values(problem, tset).astype(dtype)
        self.g = np.asarray(tset.boundary_values, dtype=dtype)
        self.n_evals = 0

    def _terms(self, Z):
        p = self.plan
        r = Z[p.xx, 0] + Z[p.yy, 0] - self.f
        e = Z[p.val_bnd, 0] - self.g
        interior = tree_sum(r * r) / p.ni
        boundary = tree_sum(e * e) / p.nb if p.nb else 0.0
        total = interior + self.boundary_weight * boundary
        return r, e, LossBreakdown(total, interior, boundary, p.ni, p.nb, self.boundary_weight)

    def value(self, params) -> LossBreakdown:
        layers, slopes = unpack(params, self.config)
        Z, _ = _forward_stack(layers, slopes, self.config, self.plan, self.H0, False)
        self.n_evals += 1
        return self._terms(Z)[2]

    def value_and_grad(self, params):
        config, p = self.config, self.plan
        dtype = config.dtype
        params = np.asarray(params, dtype=dtype)
        layers, slopes = unpack(params, config)
        Z, tape = _forward_stack(layers, slopes, config, p, self.H0, True)
        r, e, parts = self._terms(Z)
        self.n_evals += 1

        grad = np.zeros_like(params)
        glayers, gslopes = unpack(grad, config)
        Zbar = np.zeros_like(Z)
        Zbar[p.xx, 0] = (2.0 / p.ni) * r
        Zbar[p.yy, 0] = Zbar[p.xx, 0]
        if p.nb:
            Zbar[p.val_bnd, 0] = (2.0 * self.boundary_weight / p.nb) * e
        code = ACT_CODES[config.activation.base]
        for l in range(len(layers) - 1, -1, -1):
            W = layers[l][0]
            glayers[l][0][...] = Zbar.T @ tape[l][0]
            glayers[l][1][...] = Zbar[p.val].sum(axis=0)
            if l == 0:
                break
            Hbar = Zbar @ W
            _, Zp, scale, base, aux = tape[l - 1]
            Zbar = np.empty_like(Hbar)
            acc = jet_backward(Hbar, Zp, scale, code, p.m, p.ni, base, aux, Zbar)
            if config.activation.adaptive:
                gslopes[l - 1] = config.laaf_factor * acc
        return parts, grad


def residual_loss(params, config: NetworkConfig, tset: TrainingSet, problem: Problem,
                  boundary_weight: float = 1.0) -> LossBreakdown:
    """Mean squared PDE residual over interior points plus weighted boundary MSE."""
    return LossFunction(config, tset, problem, boundary_weight).value(params)


def loss_gradient(params, config: NetworkConfig, tset: TrainingSet, problem: Problem,
                  boundary_weight: float = 1.0):
    """``(LossBreakdown, gradient)`` with the gradient in the parameter layout."""
    return LossFunction(config, tset, problem, boundary_weight).value_and_grad(params)


# central first-derivative stencils: weights of (f(+j h) - f(-j h)), divisor
_STENCILS = {
    2: ((1.0,), 2.0),
    4: ((8.0, -1.0), 12.0),
    6: ((45.0, -9.0, 1.0), 60.0),
}


def fd_gradient(params, config: NetworkConfig, tset: TrainingSet, problem: Problem,
                h: float = 1e-6, boundary_weight: float = 1.0, order: int = 2) -> np.ndarray:
    """Central differences in float64 with step ``h * max(|theta_i|, 1)``.

    ``order`` selects the 2-, 4- or 6-th order central stencil.
    """
    if order not in _STENCILS:
        raise ValueError(f"order must be one of {sorted(_STENCILS)}")
    weights, denom = _STENCILS[order]
    config64 = config.with_precision(64)
    loss = LossFunction(config64, tset, problem, boundary_weight)
    theta = np.asarray(params, dtype=np.float64).copy()
    out = np.empty_like(theta)

    def shifted(i, orig, delta):
        theta[i] = orig + delta
        return loss.value(theta).total

    for i in range(theta.size):
        step = h * max(abs(theta[i]), 1.0)
        orig = theta[i]
        acc = 0.0
        for j, w in enumerate(weights, start=1):
            acc += w * (shifted(i, orig, j * step) - shifted(i, orig, -j * step))
        out[i] = acc / (denom * step)
        theta[i] = orig
    return out


def fd_check(params, config: NetworkConfig, tset: TrainingSet, problem: Problem,
             h: float = 5e-3, boundary_weight: float = 1.0, order: int = 6) -> float:
    """Worst entrywise ``|g_fd - g| / max(|g|, 1e-8)`` against the analytic gradient.

    The two-point stencil at ``h=1e-6`` loses about ``eps * loss / h`` to
    cancellation, which swamps gradient entries near 1e-8 in deep sigmoid
    nets. The default sixth-order stencil at ``h=5e-3`` keeps both
    truncation and cancellation far below 1e-5; pass ``order=2, h=1e-6`` for
    the textbook check.
    """
    config64 = config.with_precision(64)
    theta = np.asarray(params, dtype=np.float64)
    _, g = loss_gradient(theta, config64, tset, problem, boundary_weight)
    g_fd = fd_gradient(theta, config64, tset, problem, h, boundary_weight, order)
    return float(np.max(np.abs(g_fd - g) / np.maximum(np.abs(g), 1e-8)))
