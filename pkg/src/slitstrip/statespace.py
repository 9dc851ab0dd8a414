"""Spin-row state spaces, boundary lifts and a brute-force Ising oracle.

Rows over the sites ``a..b`` are packed into integers: bit ``j`` holds the
spin at site ``a + j`` with bit value 1 meaning spin ``+1``.  The full space
has ``l + 1`` bits.  The irreducible space ``V`` fixes the spin at ``b`` to
``+1`` and is indexed by the ``l`` low bits alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .geometry import GeometryError, Strip, StripGeometry

BETA = 0.5 * math.log(math.sqrt(2.0) + 1.0)

ORACLE_SITE_CAP = 24


def row_spins(nbits: int) -> np.ndarray:
    """Array of shape ``(2**nbits, nbits)`` with entries ``+-1``."""
    idx = np.arange(1 << nbits)
    bits = (idx[:, None] >> np.arange(nbits)[None, :]) & 1
    return 2 * bits - 1


def full_spins(geom: StripGeometry) -> np.ndarray:
    return row_spins(geom.width + 1)


def v_spins(geom: StripGeometry) -> np.ndarray:
    """Spins of the rows of ``V`` (site ``b`` column is all ``+1``)."""
    return full_spins(geom)[1 << geom.width:]


def fold_mask(geom: StripGeometry, x2: int) -> int:
    """Bit mask of the sites strictly left of the dual site ``x2/2``."""
    geom.dual_index(x2)
    nflip = (x2 + 1) // 2 - geom.a
    return (1 << nflip) - 1


def fold_involution(geom: StripGeometry, row: int, x2: int) -> int:
    """Negate all spins left of ``x2/2``; the spin at ``b`` is never touched."""
    return row ^ fold_mask(geom, x2)


def half_horizontal_weights(geom: StripGeometry, space: str = "full") -> np.ndarray:
    """Diagonal ``c_rho`` of the square root of the horizontal transfer matrix."""
    s = full_spins(geom)
    c = np.exp(0.5 * BETA * np.sum(s[:, :-1] * s[:, 1:], axis=1))
    return c if space == "full" else c[1 << geom.width:]


def sector_indicator(geom: StripGeometry, left: int, right: int,
                     slit: int | None = None, space: str = "full") -> np.ndarray:
    """Boolean mask of rows with ``rho_a = left``, ``rho_b = right`` and optionally ``rho_0 = slit``."""
    s = full_spins(geom) if space == "full" else v_spins(geom)
    mask = (s[:, 0] == left) & (s[:, -1] == right)
    if slit is not None:
        mask &= s[:, geom.site_index(0)] == slit
    return mask


def lift_boundary_function(geom: StripGeometry, f, space: str = "full") -> np.ndarray:
    """The vector ``[[f]] = sum_rho c_rho f(rho) e_rho``.

    ``f`` is either an array of values over the rows of the chosen space or
    a callable taking the ``(rows, sites)`` spin array and returning values.
    """
    s = full_spins(geom) if space == "full" else v_spins(geom)
    c = half_horizontal_weights(geom, space)
    vals = f(s) if callable(f) else np.asarray(f)
    return c * vals


def lift_split_function(geom: StripGeometry, f_left: Callable, f_right: Callable,
                        space: str = "full") -> np.ndarray:
    """``[[f_L; f_R]]`` with ``f_L`` seeing sites ``a..0`` and ``f_R`` seeing ``0..b``."""
    s = full_spins(geom) if space == "full" else v_spins(geom)
    i0 = geom.site_index(0)
    c = half_horizontal_weights(geom, space)
    return c * f_left(s[:, :i0 + 1]) * f_right(s[:, i0:])


def ones(spins: np.ndarray) -> np.ndarray:
    return np.ones(spins.shape[0])


def global_flip_index(geom: StripGeometry) -> np.ndarray:
    """Permutation of full-space row indices induced by negating every spin."""
    n = 1 << (geom.width + 1)
    return np.arange(n) ^ (n - 1)


# ---------------------------------------------------------------------------
# exhaustive enumeration oracle


@dataclass(frozen=True)
class OracleResult:
    partition_function: float
    correlations: dict
    boundary: dict
    configurations: int


def _oracle_lattice(geom: StripGeometry, h_top: int, h_bottom: int, slit: bool):
    """Free variables and the map from them to all vertex spins."""
    ys = list(range(-h_bottom, h_top + 1))
    xs = list(geom.sites)
    groups: dict = {}
    for y in ys:
        for x in xs:
            if x == geom.a:
                key = ("L",)
            elif x == geom.b:
                key = ("R",)
            elif slit and x == 0 and y <= 0:
                key = ("S",)
            else:
                key = (x, y)
            groups.setdefault(key, []).append((x, y))
    keys = list(groups)
    owner = {}
    for gi, key in enumerate(keys):
        for v in groups[key]:
            owner[v] = gi
    return xs, ys, keys, owner


def oracle_partition_and_correlations(geom: StripGeometry, h_top: int, h_bottom: int,
                                      slit: bool = False,
                                      spins: Iterable[Sequence[tuple[int, int]]] = (),
                                      boundary: Iterable[tuple] = ()) -> OracleResult:
    """Sum Boltzmann weights over all locally monochromatic configurations.

    ``spins`` lists tuples of vertices ``(x, y)`` whose spin products are
    averaged.  ``boundary`` lists pairs ``(f_top, f_bottom)`` of callables on
    the top and bottom row spin vectors, whose product is averaged.
    """
    if h_top < 0 or h_bottom < 0:
        raise GeometryError("heights must be nonnegative")
    nsites = (geom.width + 1) * (h_top + h_bottom + 1)
    if nsites > ORACLE_SITE_CAP:
        raise GeometryError(
            f"enumeration over {nsites} sites exceeds the cap of {ORACLE_SITE_CAP}")
    xs, ys, keys, owner = _oracle_lattice(geom, h_top, h_bottom, slit)
    nvar = len(keys)
    conf = row_spins(nvar)

    def column(v):
        return conf[:, owner[v]]

    energy = np.zeros(conf.shape[0])
    for y in ys:
        for x in xs[:-1]:
            energy += column((x, y)) * column((x + 1, y))
    for y in ys[:-1]:
        for x in xs:
            energy += column((x, y)) * column((x, y + 1))
    weights = np.exp(BETA * energy)
    z = math.fsum(weights)

    corr = {}
    for pts in spins:
        prod = np.ones(conf.shape[0])
        for v in pts:
            prod = prod * column(tuple(v))
        corr[tuple(map(tuple, pts))] = math.fsum(weights * prod) / z

    bnd = {}
    top = np.stack([column((x, h_top)) for x in xs], axis=1)
    bottom = np.stack([column((x, -h_bottom)) for x in xs], axis=1)
    for i, (f_top, f_bottom) in enumerate(boundary):
        vals = weights * f_top(top) * f_bottom(bottom)
        bnd[i] = (math.fsum(vals.real) + 1j * math.fsum(np.imag(vals))) / z

    return OracleResult(z, corr, bnd, conf.shape[0])
