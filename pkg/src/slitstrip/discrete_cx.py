"""Vertical-translation eigenfunctions, discrete pole functions and their inner products.

Cross-section functions are complex arrays over the dual sites of a strip.
As a real vector space they are realified to ``(Re f, Im f)``, so the real
inner product ``<f, g> = Re sum f conj(g)`` becomes the Euclidean one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import bisect

from .clifford import (SQRT2, complexify, real_inner, realify, reflect,
                       rotation_on_functions, vertical_edge_value)
from .geometry import GeometryError, StripGeometry, mode_indices

RATIO = 3 - 2 * SQRT2
SPECTRUM_TOL = 1e-10
POLE_COND_MAX = 1e10
WIDTH_CAP = 512


class SpectrumError(ArithmeticError):
    """Induced rotation spectrum is not the expected reciprocal pairing."""


def _omega_equation(omega: float, w: int) -> float:
    return math.cos((w + 0.5) * omega) - RATIO * math.cos((w - 0.5) * omega)


def solve_omega(k2: int, w: int) -> float:
    """Root ``omega_k`` of ``cos((w+1/2) x) = (3 - 2 sqrt 2) cos((w-1/2) x)``.

    ``k2 = 2k`` is odd.  The root is bracketed by ``((k - 1/2) pi / w, k pi / w)``.
    """
    if k2 <= 0 or k2 % 2 == 0 or k2 > 2 * w - 1:
        raise GeometryError(f"index {k2}/2 not in K^({w})")
    lo = (k2 - 1) * math.pi / (2 * w)
    hi = k2 * math.pi / (2 * w)
    flo, fhi = _omega_equation(lo, w), _omega_equation(hi, w)
    if flo * fhi > 0:
        raise ArithmeticError(f"no sign change for k={k2}/2, w={w} on [{lo}, {hi}]")
    return bisect(_omega_equation, lo, hi, args=(w,), xtol=1e-15, rtol=4 * np.finfo(float).eps,
                  maxiter=200)


def eigenvalue_from_omega(omega: float) -> float:
    """``lambda_{+k} = 2 - cos w + sqrt((3 - cos w)(1 - cos w))``; its inverse is ``lambda_{-k}``."""
    c = math.cos(omega)
    return 2 - c + math.sqrt((3 - c) * (1 - c))


def extend_to_boundary_edge(f0: np.ndarray, f1: np.ndarray, side: str) -> complex:
    """Value on the left (``"L"``) or right (``"R"``) boundary vertical edge between rows 0 and 1."""
    if side == "L":
        return vertical_edge_value(f0[0], f1[0], "E")
    if side == "R":
        return vertical_edge_value(f0[-1], f1[-1], "W")
    raise ValueError(f"side must be 'L' or 'R', got {side!r}")


@dataclass(frozen=True)
class EigenfunctionBasis:
    """Normalized eigenfunctions of the induced rotation for one width.

    ``plus[i]`` is ``f_{+k}`` and ``minus[i]`` is ``f_{-k}`` for ``k = modes[i]/2``.
    """

    width: int
    modes: tuple
    omega: np.ndarray
    eigenvalue: np.ndarray
    plus: np.ndarray
    minus: np.ndarray

    def f(self, k2: int) -> np.ndarray:
        """``f_k`` for signed doubled index ``k2``."""
        i = self.modes.index(abs(k2))
        return self.plus[i] if k2 > 0 else self.minus[i]

    def gram(self) -> np.ndarray:
        fam = np.concatenate([self.plus, self.minus])
        real = np.array([realify(f) for f in fam])
        return real @ real.T


@lru_cache(maxsize=64)
def eigenfunction_basis(width: int) -> EigenfunctionBasis:
    """Eigenfunctions of the width-``w`` induced rotation ``P``.

    ``P f_{+k} = f_{+k} / lambda_k`` so that ``f_{+k}`` grows by ``lambda_k``
    per upward step.  Each ``f_{+k}`` is fixed up to sign by its normalization,
    and the sign is chosen so that the left boundary edge value lies in
    ``e^{-i pi/4} R_+``.  ``f_{-k}`` is the reflection of ``f_{+k}``.
    """
    if not 1 <= width <= WIDTH_CAP:
        raise GeometryError(f"width {width} outside [1, {WIDTH_CAP}]")
    modes = mode_indices(width)
    p = rotation_on_functions(width)
    vals, vecs = np.linalg.eig(p)
    if np.abs(vals.imag).max() > SPECTRUM_TOL * np.abs(vals).max():
        raise SpectrumError(f"complex eigenvalues in width {width}: {vals}")
    vals = vals.real
    vecs = vecs.real
    order = np.argsort(vals)
    # the smallest eigenvalue of P belongs to the largest index
    small, large = order[:width][::-1], order[width:]
    if np.abs(vals[small] * vals[large] - 1).max() > SPECTRUM_TOL:
        raise SpectrumError(f"eigenvalues of width {width} are not reciprocal pairs: {np.sort(vals)}")
    omega = np.array([solve_omega(k2, width) for k2 in modes])
    lam = 1 / vals[small]
    plus = []
    for j, i in enumerate(small):
        # one inverse-iteration step sharpens the eigenvector
        x = vecs[:, i]
        shift = 1 / eigenvalue_from_omega(omega[j])
        try:
            y = np.linalg.solve(p - (shift * (1 + 1e-13) + 1e-15) * np.eye(2 * width), x)
            x = y if np.all(np.isfinite(y)) else x
        except np.linalg.LinAlgError:
            pass
        f = complexify(x / np.linalg.norm(x))
        edge = extend_to_boundary_edge(f, lam[j] * f, "L")
        if (edge * np.exp(0.25j * math.pi)).real < 0:
            f = -f
        plus.append(f)
    plus = np.array(plus)
    minus = np.array([reflect(f) for f in plus])
    return EigenfunctionBasis(width, modes, omega, lam, plus, minus)


def boundary_phase_defect(basis: EigenfunctionBasis) -> float:
    """Largest distance of the normalized left edge values from the ray ``e^{-i pi/4} R_+``."""
    worst = 0.0
    for f, lam in zip(basis.plus, basis.eigenvalue):
        edge = extend_to_boundary_edge(f, lam * f, "L")
        worst = max(worst, abs(edge / abs(edge) - np.exp(-0.25j * math.pi)))
    return worst


def zero_extend(f: np.ndarray, geom: StripGeometry, leg: str) -> np.ndarray:
    out = np.zeros(geom.width, complex)
    if leg == "L":
        out[:geom.left_width] = f
    else:
        out[geom.left_width:] = f
    return out


# ---------------------------------------------------------------------------
# pole functions


@dataclass(frozen=True)
class PoleData:
    """Pole functions and the inner products consumed by the recursions.

    ``pole[ext][k2]`` is the pole function for extremity ``ext`` in
    ``{"T", "L", "R"}``.  ``ip[(g, ext, k2)]`` maps the signed doubled index
    ``k'`` of the test function ``g`` in ``{"T", "L", "R"}`` to ``<g_{k'}, p^ext_k>``.
    """

    geom: StripGeometry
    top: EigenfunctionBasis
    left: EigenfunctionBasis
    right: EigenfunctionBasis
    pole: dict
    condition: float

    def test_function(self, kind: str, k2: int) -> np.ndarray:
        if kind == "T":
            return self.top.f(k2)
        basis = self.left if kind == "L" else self.right
        return zero_extend(basis.f(k2), self.geom, kind)

    def inner(self, kind: str, k2_test: int, ext: str, k2: int) -> float:
        """``<g_{k'}, p^ext_k>`` with ``g`` the top or leg eigenfunction family."""
        return real_inner(self.test_function(kind, k2_test), self.pole[ext][k2])


def _constraint_rows(geom, top, left, right):
    rows = [realify(f) for f in top.plus]
    rows += [realify(zero_extend(f, geom, "L")) for f in left.minus]
    rows += [realify(zero_extend(f, geom, "R")) for f in right.minus]
    return np.array(rows)


def pole_functions(geom: StripGeometry) -> PoleData:
    """All discrete pole functions of a slit-strip geometry.

    The pole function ``p^T_k`` has ``<f_{+k'}, p> = delta_{k k'}`` and is
    orthogonal to the singular leg functions ``f^L_{-k'}`` and ``f^R_{-k'}``.
    ``p^L_k`` and ``p^R_k`` swap the roles of the Kronecker block.
    """
    if geom.width > WIDTH_CAP:
        raise GeometryError(f"width {geom.width} exceeds cap {WIDTH_CAP}")
    top = eigenfunction_basis(geom.width)
    left = eigenfunction_basis(geom.left_width)
    right = eigenfunction_basis(geom.right_width)
    m = _constraint_rows(geom, top, left, right)
    cond = float(np.linalg.cond(m))
    if cond > POLE_COND_MAX:
        raise ArithmeticError(f"pole function system has condition number {cond:.3g}")
    sol = np.linalg.solve(m, np.eye(2 * geom.width))
    pole = {"T": {}, "L": {}, "R": {}}
    offset = 0
    for ext, modes in (("T", top.modes), ("L", left.modes), ("R", right.modes)):
        for i, k2 in enumerate(modes):
            pole[ext][k2] = complexify(sol[:, offset + i])
        offset += len(modes)
    return PoleData(geom, top, left, right, pole, cond)


def inner_product_tables(data: PoleData) -> dict:
    """Tables ``{(ext, test): array}`` with entry ``[i, j] = <g_{s k'_i}, p^ext_{k_j}>``.

    The test functions are ``f_{-k'}`` for ``test="T"`` and ``f^L_{+k'}``,
    ``f^R_{+k'}`` for the legs, which are the ones the recursions need.
    """
    families = {
        "T": [-k2 for k2 in data.top.modes],
        "L": list(data.left.modes),
        "R": list(data.right.modes),
    }
    out = {}
    for ext in ("T", "L", "R"):
        poles = data.pole[ext]
        for test, idx in families.items():
            out[(ext, test)] = np.array([[data.inner(test, kp, ext, k) for k in poles]
                                         for kp in idx])
    return out


def pole_residuals(data: PoleData) -> dict:
    """Largest deviation in each block of the pole conditions, for diagnostics."""
    m = _constraint_rows(data.geom, data.top, data.left, data.right)
    sol = np.array([realify(data.pole[ext][k])
                    for ext in ("T", "L", "R") for k in data.pole[ext]]).T
    return {"system": float(np.abs(m @ sol - np.eye(m.shape[0])).max())}


def decomposition_defect(data: PoleData) -> float:
    """Check ``f_k - p^T_k`` lies in span ``f_{-k'}`` and the leg restrictions of ``p^T_k``
    expand in regular leg functions, reconstructing ``p^T_k`` from the tables."""
    geom = data.geom
    worst = 0.0
    for ext, modes in (("T", data.top.modes), ("L", data.left.modes), ("R", data.right.modes)):
        for k in modes:
            p = data.pole[ext][k]
            # the top singular part of p is f_k for ext T and nothing otherwise
            diff = data.top.f(k) - p if ext == "T" else -p
            recon = sum(real_inner(data.top.f(-kp), diff) * data.top.f(-kp)
                        for kp in data.top.modes)
            worst = max(worst, float(np.abs(recon - diff).max()))
            # pole function minus its own singular leg part is regular in each leg
            for leg, basis in (("L", data.left), ("R", data.right)):
                part = p.copy()
                keep = np.zeros(geom.width, bool)
                keep[:geom.left_width] = leg == "L"
                keep[geom.left_width:] = leg == "R"
                part[~keep] = 0
                if ext == leg:
                    part = part - zero_extend(basis.f(-k), geom, leg)
                recon = sum(real_inner(zero_extend(basis.f(kp), geom, leg), part)
                            * zero_extend(basis.f(kp), geom, leg) for kp in basis.modes)
                worst = max(worst, float(np.abs(recon - part).max()))
    return worst
