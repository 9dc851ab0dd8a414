"""Matrix-free transfer matrices of the critical Ising strip and slit-strip.

``T = T_hor^{1/2} T_ver T_hor^{1/2}``.  The vertical factor is a product of
independent single-site 2x2 factors, except on the sites pinned by the
locally monochromatic conditions (``a``, ``b`` and, for the slit variant,
``0``), where it reduces to the scalar ``e^beta``.  One application costs
``O(l 2^l)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import GeometryError, Strip, StripGeometry
from .statespace import (BETA, full_spins, half_horizontal_weights, lift_boundary_function,
                         lift_split_function, ones, sector_indicator)

POWER_TOL = 1e-12
POWER_MAX_ITER = 100_000

_EB, _EMB = math.exp(BETA), math.exp(-BETA)
_SITE = np.array([[_EB, _EMB], [_EMB, _EB]])
_SITE_INV = np.linalg.inv(_SITE)


class ConvergenceError(RuntimeError):
    """Iterative method did not reach its tolerance."""


class TransferOperator:
    """``T`` (``slit=False``) or ``T^[l_L|l_R]`` (``slit=True``) acting on vectors.

    Vectors may live on the full space (length ``2^(l+1)``) or on ``V``
    (length ``2^l``); a trailing batch axis is allowed.
    """

    def __init__(self, geom: StripGeometry, slit: bool = False):
        self.geom = geom
        self.slit = slit
        self._c_full = half_horizontal_weights(geom, "full")
        pinned = {geom.site_index(geom.a), geom.site_index(geom.b)}
        if slit:
            pinned.add(geom.site_index(0))
        self.pinned = frozenset(pinned)

    def _weights(self, n: int) -> np.ndarray:
        full = 1 << (self.geom.width + 1)
        if n == full:
            return self._c_full
        if n == full // 2:
            return self._c_full[full // 2:]
        raise GeometryError(f"vector of length {n} does not match width {self.geom.width}")

    def _vertical(self, v: np.ndarray, site: np.ndarray, pin: float) -> np.ndarray:
        n = v.shape[0]
        nbits = n.bit_length() - 1
        batch = v.shape[1:]
        out = v
        npinned = 0
        for j in range(nbits):
            if j in self.pinned:
                npinned += 1
                continue
            t = out.reshape((n >> (j + 1), 2, 1 << j) + batch)
            out = np.einsum("ij,ajb...->aib...", site, t).reshape(v.shape)
        if nbits == self.geom.width:
            # V-space vectors: the pinned spin at b is implicit
            npinned += 1
        return out * pin ** npinned

    def apply(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        c = self._weights(v.shape[0]).reshape((-1,) + (1,) * (v.ndim - 1))
        return c * self._vertical(c * v, _SITE, _EB)

    def apply_inverse(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        c = self._weights(v.shape[0]).reshape((-1,) + (1,) * (v.ndim - 1))
        return self._vertical(v / c, _SITE_INV, _EMB) / c

    def power(self, v: np.ndarray, n: int) -> np.ndarray:
        for _ in range(n):
            v = self.apply(v)
        return v

    def dense(self, space: str = "v") -> np.ndarray:
        n = 1 << (self.geom.width + (1 if space == "full" else 0))
        return self.apply(np.eye(n))

    def __matmul__(self, v):
        return self.apply(v)


def dense_transfer_by_entries(geom: StripGeometry, slit: bool = False) -> np.ndarray:
    """Full-space transfer matrix assembled entry by entry from the Boltzmann weights."""
    s = full_spins(geom)
    n = s.shape[0]
    c = half_horizontal_weights(geom, "full")
    ia, ib, i0 = geom.site_index(geom.a), geom.site_index(geom.b), geom.site_index(0)
    t = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if s[i, ia] != s[j, ia] or s[i, ib] != s[j, ib]:
                continue
            if slit and s[i, i0] != s[j, i0]:
                continue
            t[i, j] = c[i] * math.exp(BETA * float(s[i] @ s[j])) * c[j]
    return t


@dataclass(frozen=True)
class PerronData:
    sector: tuple
    eigenvalue: float
    vector: np.ndarray
    gap_ratio: float | None
    iterations: int


def sector_mask_v(geom: StripGeometry, sector: Sequence[int]) -> np.ndarray:
    """Mask on ``V`` for ``(eps_L, eps_R)`` or ``(eps_L, eps_S, eps_R)``."""
    if len(sector) == 2:
        left, right = sector
        slit = None
    elif len(sector) == 3:
        left, slit, right = sector
    else:
        raise GeometryError(f"sector tag {sector!r} must have 2 or 3 entries")
    if right != 1:
        raise GeometryError("sectors of V have a +1 spin at b")
    return sector_indicator(geom, left, right, slit, space="v")


def perron_frobenius(op: TransferOperator, sector: Sequence[int], tol: float = POWER_TOL,
                     max_iter: int = POWER_MAX_ITER, gap: bool = False) -> PerronData:
    """Top eigenpair of ``op`` restricted to one boundary-spin sector of ``V``.

    Power iteration from the uniform vector; stops once successive Rayleigh
    quotients agree to ``tol`` relative and the relative residual
    ``|Tv - mu v| / mu`` is below ``100 tol``.  The optional gap estimate runs a second power
    iteration deflated against the converged vector.
    """
    mask = sector_mask_v(op.geom, sector).astype(float)
    v = mask / np.linalg.norm(mask)
    mu_old = 0.0
    for it in range(1, max_iter + 1):
        w = op.apply(v)
        mu = float(v @ w)
        res = np.linalg.norm(w - mu * v)
        v = w / np.linalg.norm(w)
        if abs(mu - mu_old) <= tol * mu and res <= 100 * tol * mu:
            break
        mu_old = mu
    else:
        raise ConvergenceError(f"power iteration in sector {tuple(sector)} did not converge")
    # a final Rayleigh quotient on the normalized iterate
    w = op.apply(v)
    mu = float(v @ w)
    v = np.where(np.abs(v) < 1e-300, 0.0, v)
    ratio = _deflated_ratio(op, mask, v, mu) if gap else None
    return PerronData(tuple(sector), mu, v, ratio, it)


def _deflated_ratio(op, mask, v, mu, iters: int = 2000) -> float:
    rng = np.random.default_rng(0)
    u = rng.standard_normal(v.shape) * mask
    est = 0.0
    for _ in range(iters):
        u = u - (v @ u) * v
        nu = np.linalg.norm(u)
        if nu == 0.0:
            return 0.0
        u = u / nu
        w = op.apply(u)
        new = float(u @ w)
        u = w
        if abs(new - est) <= 1e-10 * mu:
            est = new
            break
        est = new
    return est / mu


# ---------------------------------------------------------------------------
# finite-height observables


def _spin_diag(geom: StripGeometry, x: int) -> np.ndarray:
    return full_spins(geom)[:, geom.site_index(x)].astype(float)


def truncated_partition_function(geom: StripGeometry, h_top: int, h_bottom: int,
                                 slit: bool = False) -> float:
    top = TransferOperator(geom)
    bottom = TransferOperator(geom, slit=True) if slit else top
    one = lift_boundary_function(geom, ones)
    return float(one @ top.power(bottom.power(one, h_bottom), h_top))


def truncated_spin_correlation(geom: StripGeometry, h_top: int, h_bottom: int,
                               points: Sequence[tuple[int, int]], slit: bool = False) -> float:
    """Spin correlation in the truncated strip, points given as ``(x, y)``.

    Points must be ordered by nondecreasing height.
    """
    ys = [y for _, y in points]
    if any(y1 > y2 for y1, y2 in zip(ys, ys[1:])):
        raise GeometryError("insertion points must be ordered by height")
    if ys and (ys[0] < -h_bottom or ys[-1] > h_top):
        raise GeometryError("insertion point outside the truncated domain")
    top = TransferOperator(geom)
    bottom = TransferOperator(geom, slit=True) if slit else top
    one = lift_boundary_function(geom, ones)

    def advance(v, y_from, y_to):
        # propagate upwards row by row, slit rows are those below height 0
        for y in range(y_from, y_to):
            v = (bottom if y < 0 else top).apply(v)
        return v

    v, y = one, -h_bottom
    for x, yy in points:
        v = advance(v, y, yy)
        v = _spin_diag(geom, x) * v
        y = yy
    v = advance(v, y, h_top)
    z = truncated_partition_function(geom, h_top, h_bottom, slit)
    return float(one @ v) / z


def truncated_boundary_correlation(geom: StripGeometry, h_top: int, h_bottom: int,
                                   f_top, f_bottom=None, f_left=None, f_right=None,
                                   slit: bool = False) -> complex:
    """Boundary correlation: ``[[conj f_T]]^+ T^hT T'^hB [[f_B]] / Z``.

    For the slit variant the bottom function may be given as a split pair.
    """
    top = TransferOperator(geom)
    bottom = TransferOperator(geom, slit=True) if slit else top
    vt = lift_boundary_function(geom, lambda s: np.conj(f_top(s)))
    if f_left is not None:
        vb = lift_split_function(geom, f_left, f_right)
    else:
        vb = lift_boundary_function(geom, f_bottom)
    num = np.vdot(vt, top.power(bottom.power(vb.astype(complex), h_bottom), h_top))
    return complex(num) / truncated_partition_function(geom, h_top, h_bottom, slit)
