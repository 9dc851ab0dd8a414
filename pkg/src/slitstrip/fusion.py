"""Fusion coefficients ``B_{alpha; beta_L, beta_R}`` of the slit-strip.

Two independent routes:

* :class:`DirectFusion` builds the eigenvectors ``v_alpha`` of ``T`` and
  ``w_{beta_R; beta_L}`` of the slit transfer matrix by applying creation
  modes to Perron-Frobenius vacua, and takes their Hermitian inner product.
  Cost is ``O(l 2^l)`` per mode application.
* :class:`RecursiveFusion` evaluates the three peeling recursions from the
  pole-function inner products alone, normalized so that ``B_{0;0,0} = 1``.

Keys are triples ``(alpha, beta_left, beta_right)`` of sorted tuples of odd
integers ``2k``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .clifford import FermionAlgebra, mode_of_function
from .discrete_cx import PoleData, pole_functions, zero_extend
from .geometry import GeometryError, StripGeometry, half_set, signed_indicator, remove
from .statespace import half_horizontal_weights
from .transfer import PerronData, TransferOperator, perron_frobenius

DIRECT_WIDTH_CAP = 14
IMAG_TOL = 1e-10


def canonical_key(alpha, beta_left, beta_right, geom: StripGeometry | None = None):
    if geom is None:
        return half_set(alpha), half_set(beta_left), half_set(beta_right)
    return (half_set(alpha, geom.width), half_set(beta_left, geom.left_width),
            half_set(beta_right, geom.right_width))


def key_depth(key) -> int:
    return sum(len(s) for s in key)


def parity_allowed(key) -> bool:
    """Nonzero coefficients need ``|alpha| = |beta_L| + |beta_R|`` mod 2."""
    alpha, bl, br = key
    return (len(alpha) - len(bl) - len(br)) % 2 == 0


def all_keys(geom: StripGeometry, max_depth: int) -> list:
    """Every key of total size at most ``max_depth`` on ``geom``."""
    def subsets(modes):
        return [c for r in range(len(modes) + 1) for c in itertools.combinations(modes, r)]

    out = []
    for alpha in subsets(geom.modes):
        if len(alpha) > max_depth:
            continue
        for bl in subsets(geom.left_modes):
            if len(alpha) + len(bl) > max_depth:
                continue
            for br in subsets(geom.right_modes):
                if len(alpha) + len(bl) + len(br) <= max_depth:
                    out.append((alpha, bl, br))
    return out


class DirectFusion:
    """Eigenvector route on the ``2^l``-dimensional space ``V``."""

    def __init__(self, geom: StripGeometry, tol: float = 1e-13):
        if geom.width > DIRECT_WIDTH_CAP:
            raise GeometryError(
                f"direct route needs width <= {DIRECT_WIDTH_CAP} (got {geom.width})")
        self.geom = geom
        self.tol = tol
        self.poles: PoleData = pole_functions(geom)
        self.alg = FermionAlgebra(geom)
        self.top_op = TransferOperator(geom)
        self.slit_op = TransferOperator(geom, slit=True)

    @cached_property
    def top_vacuum(self) -> PerronData:
        return perron_frobenius(self.top_op, (1, 1), tol=self.tol)

    @cached_property
    def slit_vacuum(self) -> PerronData:
        return perron_frobenius(self.slit_op, (1, 1, 1), tol=self.tol)

    # modes -------------------------------------------------------------

    def top_mode(self, k2: int):
        """``a_k`` for signed ``k2``."""
        return mode_of_function(self.poles.top.f(k2))

    def leg_mode(self, leg: str, k2: int):
        """``b^L_k`` or ``b^R_k`` for signed ``k2``."""
        basis = self.poles.left if leg == "L" else self.poles.right
        return mode_of_function(zero_extend(basis.f(k2), self.geom, leg))

    def apply(self, elem, v):
        return self.alg.apply(elem, v)

    # eigenvectors ------------------------------------------------------

    def top_eigenvector(self, alpha: Sequence[int]) -> np.ndarray:
        """``v_alpha = a_{-k_m} ... a_{-k_1} v_0`` with ``k_1 < ... < k_m``."""
        alpha = half_set(alpha, self.geom.width)
        v = self.top_vacuum.vector.astype(complex)
        for k in alpha:
            v = self.apply(self.top_mode(-k), v)
        return v

    def slit_eigenvector(self, beta_left: Sequence[int], beta_right: Sequence[int]) -> np.ndarray:
        """``w = b^R_{-k''_m''} ... b^R_{-k''_1} b^L_{-k'_m'} ... b^L_{-k'_1} w_0``."""
        bl = half_set(beta_left, self.geom.left_width)
        br = half_set(beta_right, self.geom.right_width)
        v = self.slit_vacuum.vector.astype(complex)
        for k in bl:
            v = self.apply(self.leg_mode("L", -k), v)
        for k in br:
            v = self.apply(self.leg_mode("R", -k), v)
        return v

    def top_eigenvalue(self, alpha) -> float:
        lam = self.poles.top.eigenvalue
        modes = self.poles.top.modes
        return self.top_vacuum.eigenvalue / math.prod(lam[modes.index(k)] for k in alpha)

    def slit_eigenvalue(self, beta_left, beta_right) -> float:
        left, right = self.poles.left, self.poles.right
        denom = math.prod(left.eigenvalue[left.modes.index(k)] for k in beta_left)
        denom *= math.prod(right.eigenvalue[right.modes.index(k)] for k in beta_right)
        return self.slit_vacuum.eigenvalue / denom

    # coefficients ------------------------------------------------------

    def raw(self, key) -> complex:
        alpha, bl, br = canonical_key(*key, geom=self.geom)
        return complex(np.vdot(self.top_eigenvector(alpha), self.slit_eigenvector(bl, br)))

    @cached_property
    def vacuum(self) -> float:
        return self.raw(((), (), ())).real

    def value(self, key) -> float:
        b = self.raw(key)
        if abs(b.imag) > IMAG_TOL * max(1.0, abs(b)):
            raise ArithmeticError(f"fusion coefficient {key} has imaginary part {b.imag:.3g}")
        return b.real

    def ratio(self, key) -> float:
        return self.value(key) / self.vacuum

    def renormalization_constants(self) -> dict:
        """``z_mono = 2 v_0^+[[1]] [[1;1]]^+ w_0`` and ``z_-++ = v_{1/2}^+[[1]] [[1;1]]^+ w_{0;1/2}``."""
        one = half_horizontal_weights(self.geom, "v")
        mono = 2 * (self.top_vacuum.vector @ one) * (one @ self.slit_vacuum.vector)
        mpp = np.vdot(self.top_eigenvector((1,)), one) * np.vdot(one, self.slit_eigenvector((1,), ()))
        return {"mono": float(mono), "-++": complex(mpp)}


class FusionRecursion:
    """Peeling recursion for fusion coefficient ratios, with ``B_{0;0,0} = 1``.

    ``inner(ext, kind, kp, k)`` returns the coefficient ``<g_{kp}, p^ext_k>``
    where ``g`` is ``f_{-kp}`` for ``kind == "T"`` and ``f^L_{kp}`` or
    ``f^R_{kp}`` for the legs.  ``order`` is the priority in which the
    extremities are peeled.  ``left_rule="derived"`` applies the overall sign
    ``(-1)^{|beta_R|}`` that comes from moving ``b^L_{-k}`` past the right-leg
    creation modes; ``left_rule="printed"`` leaves it out.
    """

    def __init__(self, inner, order: str = "TLR", left_rule: str = "derived"):
        if sorted(order) != ["L", "R", "T"]:
            raise ValueError(f"order must be a permutation of 'TLR', got {order!r}")
        if left_rule not in ("derived", "printed"):
            raise ValueError(f"left_rule must be 'derived' or 'printed', got {left_rule!r}")
        self.inner = inner
        self.order = order
        self.left_rule = left_rule
        self._memo: dict = {}

    def canonical(self, key):
        return canonical_key(*key)

    def ratio(self, key) -> float:
        return self._eval(self.canonical(key))

    def _eval(self, key) -> float:
        if key in self._memo:
            return self._memo[key]
        alpha, bl, br = key
        if not (alpha or bl or br):
            val = 1.0
        elif not parity_allowed(key):
            val = 0.0
        else:
            sets = {"T": alpha, "L": bl, "R": br}
            ext = next(e for e in self.order if sets[e])
            val = self._peel(ext, alpha, bl, br)
        self._memo[key] = val
        return val

    def _peel(self, ext, alpha, bl, br) -> float:
        k = max({"T": alpha, "L": bl, "R": br}[ext])
        if ext == "T":
            alpha = remove(alpha, k)
            s_top, s_leg = -1.0, 1.0
        elif ext == "L":
            bl = remove(bl, k)
            s_top, s_leg = 1.0, -1.0
        else:
            br = remove(br, k)
            s_top, s_leg = 1.0, -1.0
        inner = self.inner
        total = 0.0
        for kp in alpha:
            total += s_top * inner(ext, "T", kp, k) * signed_indicator(alpha, kp) \
                * self._eval((remove(alpha, kp), bl, br))
        sign_r = -1.0 if len(br) % 2 else 1.0
        for kp in bl:
            total += s_leg * inner(ext, "L", kp, k) * sign_r * signed_indicator(bl, kp) \
                * self._eval((alpha, remove(bl, kp), br))
        for kp in br:
            total += s_leg * inner(ext, "R", kp, k) * signed_indicator(br, kp) \
                * self._eval((alpha, bl, remove(br, kp)))
        if ext == "L" and self.left_rule == "derived":
            total *= sign_r
        return total


class RecursiveFusion(FusionRecursion):
    """Lattice recursion fed by the discrete pole-function inner products."""

    def __init__(self, geom: StripGeometry, data: PoleData | None = None,
                 order: str = "TLR", left_rule: str = "derived"):
        self.geom = geom
        self.data = data if data is not None else pole_functions(geom)
        d = self.data
        table = {}
        for ext, modes in (("T", d.top.modes), ("L", d.left.modes), ("R", d.right.modes)):
            for k in modes:
                for kp in d.top.modes:
                    table[(ext, "T", kp, k)] = d.inner("T", -kp, ext, k)
                for kp in d.left.modes:
                    table[(ext, "L", kp, k)] = d.inner("L", kp, ext, k)
                for kp in d.right.modes:
                    table[(ext, "R", kp, k)] = d.inner("R", kp, ext, k)
        self.table = table
        super().__init__(lambda *idx: table[idx], order, left_rule)

    def canonical(self, key):
        return canonical_key(*key, geom=self.geom)


@dataclass
class FusionComparison:
    key: tuple
    direct: float
    recursive: float

    @property
    def gap(self) -> float:
        return abs(self.direct - self.recursive)


def compare_routes(geom: StripGeometry, keys: Iterable, left_rule: str = "derived") -> list:
    direct = DirectFusion(geom)
    rec = RecursiveFusion(geom, direct.poles, left_rule=left_rule)
    return [FusionComparison(k, direct.ratio(k), rec.ratio(k)) for k in keys]
