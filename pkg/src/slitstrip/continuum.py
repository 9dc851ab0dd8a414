"""Continuum counterparts: Fourier modes, the slit-strip conformal map,
Pfaffian kernels, continuum pole functions and continuum fusion coefficients.

Modes are labelled ``"T"`` (whole strip), ``"L"`` and ``"R"`` (legs) and
indexed by doubled half-integers ``k2``.  All quadrature is Gauss-Legendre.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .fusion import FusionRecursion, canonical_key, parity_allowed
from .geometry import GeometryError

SQRT_PI = math.sqrt(math.pi)
# sqrt(phi') = PREF * exp(-i pi z) / sqrt(phi), a branch continuous on the whole slit-strip
PREF = SQRT_PI * cmath.exp(0.25j * math.pi) / 2
QUAD_TOL = 1e-8
QUAD_NODES = (16, 32, 64, 128)
IP_NODES = 96
POLE_RESIDUAL_MAX = 1e-8
MAX_TUPLE = 4
SKEW_TOL = 1e-12


class QuadratureError(ArithmeticError):
    """Nested quadrature did not settle before the node cap."""


# ---------------------------------------------------------------------------
# modes


def mode_constant(label: str, k2: int) -> complex:
    k = k2 / 2
    if label == "T":
        return cmath.exp(1j * math.pi * (-k / 2 - 0.25))
    if label == "L":
        return math.sqrt(2) * cmath.exp(1j * math.pi * (-k - 0.25))
    if label == "R":
        return math.sqrt(2) * cmath.exp(-0.25j * math.pi)
    raise ValueError(f"mode label must be T, L or R, got {label!r}")


@dataclass(frozen=True)
class ContinuumMode:
    """``E_k``, ``E^L_k`` or ``E^R_k``; ``k2`` is the doubled signed index."""

    label: str
    k2: int

    def __post_init__(self):
        if self.k2 % 2 == 0:
            raise GeometryError(f"mode index {self.k2}/2 is not a half-integer")
        mode_constant(self.label, self.k2)

    @property
    def constant(self) -> complex:
        return mode_constant(self.label, self.k2)

    @property
    def frequency(self) -> float:
        """Coefficient ``c`` in ``E(z) = C exp(-i c z)``."""
        return math.pi * self.k2 / 2 * (1 if self.label == "T" else 2)

    @property
    def support(self) -> tuple:
        return {"T": (-0.5, 0.5), "L": (-0.5, 0.0), "R": (0.0, 0.5)}[self.label]

    def __call__(self, z):
        return self.constant * np.exp(-1j * self.frequency * np.asarray(z))

    def restriction(self, x):
        """``e_k(x)`` on the cross-section, zero off the support."""
        x = np.asarray(x, float)
        lo, hi = self.support
        return np.where((x >= lo) & (x <= hi), self(x), 0)


def l2_inner(f_vals, g_vals, weights) -> float:
    """``<f, g> = int Re(f conj g) dx`` from samples and quadrature weights."""
    return float(np.sum(weights * (np.asarray(f_vals) * np.conj(g_vals)).real))


def gauss_legendre(n: int, lo: float, hi: float):
    x, w = _gl(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1), half * w


@lru_cache(maxsize=32)
def _gl(n: int):
    return np.polynomial.legendre.leggauss(n)


def cross_section_rule(n: int = IP_NODES):
    """Nodes and weights on ``[-1/2, 0]`` and ``[0, 1/2]`` with ``x = -+t^4``.

    The substitution removes the ``|x|^{-1/4}`` singularity that pole
    functions carry at the slit tip.
    """
    t, w = gauss_legendre(n, 0.0, 0.5 ** 0.25)
    x = t ** 4
    wx = 4 * t ** 3 * w
    return (-x, wx), (x, wx)


def mode_gram(k2_max: int = 11, n: int = 64) -> np.ndarray:
    """Gram matrix of the top modes with ``|k| <= k2_max/2``."""
    x, w = gauss_legendre(n, -0.5, 0.5)
    idx = [k for k in range(-k2_max, k2_max + 1, 2)]
    vals = [ContinuumMode("T", k)(x) for k in idx]
    return np.array([[l2_inner(a, b, w) for b in vals] for a in vals])


# ---------------------------------------------------------------------------
# conformal map


def _upper_root(u):
    """Square root of ``u`` with nonnegative imaginary part."""
    r = np.sqrt(np.asarray(u, complex))
    return np.where(r.imag < 0, -r, r)


@dataclass(frozen=True)
class ConformalEval:
    """Values of the map ``phi`` to the upper half-plane and its derivative.

    ``s = 2 phi`` and ``q = exp(-2 i pi z)`` are kept because differences of
    ``phi`` are formed from them without cancellation.
    """

    z: np.ndarray
    q: np.ndarray
    s: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    sqrt_dphi: np.ndarray


def conformal_eval(z) -> ConformalEval:
    """Evaluate ``phi(z) = sqrt(1 - exp(-2 i pi z)) / 2`` with ``Im phi > 0``.

    ``sqrt(phi')`` is ``PREF exp(-i pi z) / sqrt(phi)`` with the principal
    root of ``phi``; this is continuous on the slit-strip since ``phi`` takes
    values in the upper half-plane, and squares to ``phi'``.
    """
    z = np.asarray(z, complex)
    tip = np.abs(z) == 0
    if np.any(tip):
        raise GeometryError("the slit tip 0 is not an interior point")
    on_slit = (z.real == 0) & (z.imag < 0)
    if np.any(on_slit):
        raise GeometryError("points on the slit are not interior")
    if np.any(np.abs(z.real) >= 0.5):
        raise GeometryError("point outside the open strip")
    q = np.exp(-2j * np.pi * z)
    s = _upper_root(1 - q)
    phi = s / 2
    dphi = 1j * np.pi * q / (4 * phi)
    sqrt_dphi = PREF * np.exp(-1j * np.pi * z) / np.sqrt(phi)
    return ConformalEval(z, q, s, phi, dphi, sqrt_dphi)


def phi_difference(s1, q1, s2, q2):
    """``(s1 - s2) / 2`` where ``s^2 = 1 - q``, without cancellation.

    Works elementwise with broadcasting.  Conjugate entries are passed as
    ``(conj s, conj q)``.
    """
    plus = s1 + s2
    direct = s1 - s2
    stable = (q2 - q1) / np.where(plus == 0, 1, plus)
    return 0.5 * np.where(np.abs(plus) >= np.abs(direct), stable, direct)


# ---------------------------------------------------------------------------
# kernels


def two_point_kernel(variant: str, k1, z1, k2, z2):
    """One of the four two-point kernels, ``variant`` in ``{"oo", "ob", "bo", "bb"}``.

    ``o`` marks a holomorphic slot and ``b`` an antiholomorphic one.  ``k1``
    and ``k2`` are callables (modes or pole functions).
    """
    c1, c2 = conformal_eval(z1), conformal_eval(z2)
    f1 = k1(c1.z) * c1.sqrt_dphi
    f2 = k2(c2.z) * c2.sqrt_dphi
    conj1, conj2 = variant[0] == "b", variant[1] == "b"
    if variant not in ("oo", "ob", "bo", "bb"):
        raise ValueError(f"unknown kernel variant {variant!r}")
    a = np.conj(f1) if conj1 else f1
    b = np.conj(f2) if conj2 else f2
    s1, q1 = (np.conj(c1.s), np.conj(c1.q)) if conj1 else (c1.s, c1.q)
    s2, q2 = (np.conj(c2.s), np.conj(c2.q)) if conj2 else (c2.s, c2.q)
    den = phi_difference(s1, q1, s2, q2)
    if np.any(den == 0):
        raise GeometryError("coincident points in a singular kernel")
    return a * b / den


def _summed_kernel(f1, s1, q1, f2, s2, q2):
    """Sum of the four kernels on an outer grid of two node sets."""
    f1, s1, q1 = f1[:, None], s1[:, None], q1[:, None]
    f2, s2, q2 = f2[None, :], s2[None, :], q2[None, :]
    g1, t1, r1 = np.conj(f1), np.conj(s1), np.conj(q1)
    g2, t2, r2 = np.conj(f2), np.conj(s2), np.conj(q2)
    return (f1 * f2 / phi_difference(s1, q1, s2, q2)
            + f1 * g2 / phi_difference(s1, q1, t2, r2)
            + g1 * f2 / phi_difference(t1, r1, s2, q2)
            + g1 * g2 / phi_difference(t1, r1, t2, r2))


def kernel_matrix(modes, points) -> np.ndarray:
    """Skew-symmetric matrix of summed two-point kernels at single points."""
    n = len(modes)
    if len(points) != n:
        raise ValueError("one point per mode")
    ev = [conformal_eval(np.array([p])) for p in points]
    f = [m(e.z) * e.sqrt_dphi for m, e in zip(modes, ev)]
    a = np.zeros((n, n), complex)
    for i in range(n):
        for j in range(i + 1, n):
            v = _summed_kernel(f[i], ev[i].s, ev[i].q, f[j], ev[j].s, ev[j].q)[0, 0]
            a[i, j], a[j, i] = v, -v
    return a


def pfaffian(a) -> complex:
    """Pfaffian by expansion along the first row."""
    a = np.asarray(a)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("Pfaffian needs a square matrix")
    scale = max(1.0, float(np.abs(a).max())) if n else 1.0
    if n and np.abs(a + a.T).max() > SKEW_TOL * scale:
        raise ValueError("matrix is not skew-symmetric")
    return _pf(a.astype(complex))


def _pf(a):
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0j
    if n % 2:
        return 0j
    if n == 2:
        return a[0, 1]
    total = 0j
    rest = np.arange(1, n)
    for idx, j in enumerate(rest):
        if a[0, j] == 0:
            continue
        keep = np.delete(rest, idx)
        sign = -1 if idx % 2 else 1
        total += sign * a[0, j] * _pf(a[np.ix_(keep, keep)])
    return total


def multipoint_kernel(modes, points) -> complex:
    return pfaffian(kernel_matrix(modes, points))


# ---------------------------------------------------------------------------
# integrated kernels


TOP_BASE, LEG_BASE, HEIGHT_STEP = 0.25, -0.25, 0.25


def default_heights(m: int, m_left: int, m_right: int, shift: float = 0.0,
                    top_base: float = TOP_BASE, leg_base: float = LEG_BASE,
                    step: float = HEIGHT_STEP):
    """Top heights ``top_base + (m - i) step`` (descending) and leg heights
    ``leg_base - (m' - i) step`` (increasing), all moved by ``shift``.

    Heights close to the cross-section keep the growing modes small, which
    limits cancellation in the quadrature.
    """
    top = [top_base + step * (m - i) + shift for i in range(1, m + 1)]
    left = [leg_base - step * (m_left - i) + shift for i in range(1, m_left + 1)]
    right = [leg_base - step * (m_right - i) + shift for i in range(1, m_right + 1)]
    return top, left, right


def _check_heights(top, left, right):
    if any(y <= 0 for y in top) or any(b >= a for a, b in zip(top, top[1:])):
        raise GeometryError("top heights must be positive and strictly decreasing")
    for leg in (left, right):
        if any(y >= 0 for y in leg) or any(b <= a for a, b in zip(leg, leg[1:])):
            raise GeometryError("leg heights must be negative and strictly increasing")


@dataclass
class IntegratedKernel:
    value: complex
    nodes: int
    change: float
    history: list = field(default_factory=list)


def _slot_samples(label, k2, y, n):
    lo, hi = ContinuumMode(label, k2).support
    x, w = gauss_legendre(n, lo, hi)
    ev = conformal_eval(x + 1j * y)
    f = ContinuumMode(label, k2)(ev.z) * ev.sqrt_dphi
    return w, f, ev.s, ev.q


def _pair_integrated_matrix(slots, n):
    samples = [_slot_samples(lab, k2, y, n) for lab, k2, y in slots]
    size = len(slots)
    m = np.zeros((size, size), complex)
    for i in range(size):
        wi, fi, si, qi = samples[i]
        for j in range(i + 1, size):
            wj, fj, sj, qj = samples[j]
            v = wi @ _summed_kernel(fi, si, qi, fj, sj, qj) @ wj
            m[i, j], m[j, i] = v, -v
    return m


def integrated_kernel(top, left=(), right=(), heights=None, tol: float = QUAD_TOL,
                      nodes=QUAD_NODES, leg_order: str = "literal") -> IntegratedKernel:
    """The integrated multipoint kernel for signed doubled-index tuples.

    ``top`` modes sit at decreasing heights, leg modes at increasing heights.
    The integrand is a Pfaffian whose every term uses each variable once, so
    the integral equals the Pfaffian of the pairwise integrated kernel
    matrix.  Node counts per axis are doubled until two successive values
    agree to ``tol``.

    ``leg_order="literal"`` lists the slots as top, left, right.
    ``leg_order="creation"`` lists the leg block in reverse (right tuple
    reversed, then left tuple reversed), matching the order in which leg
    creation operators are written in the lattice slit eigenvectors.  The two
    differ by ``(-1)^{n(n-1)/2}`` for ``n`` leg slots.
    """
    if leg_order not in ("literal", "creation"):
        raise ValueError(f"leg_order must be 'literal' or 'creation', got {leg_order!r}")
    top, left, right = tuple(top), tuple(left), tuple(right)
    n_total = len(top) + len(left) + len(right)
    if n_total > MAX_TUPLE:
        raise GeometryError(f"tuple length {n_total} exceeds {MAX_TUPLE}")
    if heights is None:
        heights = default_heights(len(top), len(left), len(right))
    _check_heights(*heights)
    legs = ([("L", k, y) for k, y in zip(left, heights[1])]
            + [("R", k, y) for k, y in zip(right, heights[2])])
    if leg_order == "creation":
        legs = legs[::-1]
    slots = [("T", k, y) for k, y in zip(top, heights[0])] + legs
    pref = (-1j / (2 * SQRT_PI)) ** n_total
    if n_total == 0:
        return IntegratedKernel(1.0 + 0j, 0, 0.0)
    if n_total % 2:
        return IntegratedKernel(0j, 0, 0.0)
    history = []
    prev = None
    for n in nodes:
        val = pref * _pf(_pair_integrated_matrix(slots, n))
        history.append(val)
        if prev is not None:
            change = abs(val - prev)
            if change < tol * max(1.0, abs(val)):
                return IntegratedKernel(val, n, change, history)
        prev = val
    raise QuadratureError(f"integrated kernel did not settle: {history}")


def fusion_tuples(key):
    """Signed tuples for a key: ``alpha`` ascending, legs ``-k`` with ``k`` ascending."""
    alpha, bl, br = canonical_key(*key)
    return tuple(alpha), tuple(-k for k in bl), tuple(-k for k in br)


@dataclass
class ContinuumValue:
    key: tuple
    value: float
    imag: float
    nodes: int
    change: float


def continuum_fusion(key, heights=None, tol: float = QUAD_TOL,
                     leg_order: str = "creation") -> ContinuumValue:
    """Continuum fusion coefficient by quadrature of the Pfaffian kernel.

    The default ``leg_order`` is the one whose values are the scaling limits
    of the lattice ratios; see :func:`integrated_kernel`.
    """
    key = canonical_key(*key)
    if not parity_allowed(key):
        return ContinuumValue(key, 0.0, 0.0, 0, 0.0)
    res = integrated_kernel(*fusion_tuples(key), heights=heights, tol=tol, leg_order=leg_order)
    if abs(res.value.imag) > tol * max(1.0, abs(res.value)):
        warnings.warn(f"continuum coefficient {key} has imaginary part {res.value.imag:.3g}")
    return ContinuumValue(key, float(res.value.real), float(res.value.imag), res.nodes, res.change)


# ---------------------------------------------------------------------------
# continuum pole functions


@dataclass(frozen=True)
class ContinuumPole:
    """``P(z) = i sum_j c_j g_j(phi(z)) sqrt(phi'(z))`` with real ``c_j``.

    ``g_j(w) = w^j`` for the top and ``(w +- 1/2)^{-j}`` for the legs.
    """

    extremity: str
    k2: int
    powers: tuple
    coefficients: np.ndarray
    residual: float

    def basis(self, ev: ConformalEval, j: int):
        if self.extremity == "T":
            g = ev.phi ** j
        elif self.extremity == "L":
            g = (ev.phi + 0.5) ** (-j)
        else:
            g = (ev.phi - 0.5) ** (-j)
        return 1j * g * ev.sqrt_dphi

    def __call__(self, z):
        ev = conformal_eval(z)
        return sum(c * self.basis(ev, j) for c, j in zip(self.coefficients, self.powers))


@lru_cache(maxsize=8)
def _cross_section(n: int):
    (xl, wl), (xr, wr) = cross_section_rule(n)
    return xl, wl, conformal_eval(xl + 0j), xr, wr, conformal_eval(xr + 0j)


def _project(label, k2, vals_l, vals_r, n):
    """``<e, f>`` for a mode ``e`` and samples of ``f`` on both halves."""
    xl, wl, _, xr, wr, _ = _cross_section(n)
    mode = ContinuumMode(label, k2)
    total = 0.0
    if label in ("T", "L"):
        total += l2_inner(mode(xl), vals_l, wl)
    if label in ("T", "R"):
        total += l2_inner(mode(xr), vals_r, wr)
    return total


def _targets(ext, k2):
    """Modes whose projections are fixed to Kronecker deltas."""
    if ext == "T":
        return [("T", kp) for kp in range(1, k2 + 1, 2)]
    return [(ext, -kp) for kp in range(1, k2 + 1, 2)]


@lru_cache(maxsize=256)
def continuum_pole_function(ext: str, k2: int, n: int = IP_NODES) -> ContinuumPole:
    """The continuum pole function with a pole of order ``k`` at extremity ``ext``."""
    if ext not in ("T", "L", "R"):
        raise ValueError(f"extremity must be T, L or R, got {ext!r}")
    if k2 <= 0 or k2 % 2 == 0:
        raise GeometryError(f"pole order {k2}/2 is not a positive half-integer")
    powers = tuple(range(0, (k2 + 1) // 2)) if ext == "T" else tuple(range(1, (k2 + 1) // 2 + 1))
    _, _, evl, _, _, evr = _cross_section(n)
    probe = ContinuumPole(ext, k2, powers, np.zeros(len(powers)), 0.0)
    cols = [(probe.basis(evl, j), probe.basis(evr, j)) for j in powers]
    targets = _targets(ext, k2)
    mat = np.array([[_project(lab, kp, cl, cr, n) for cl, cr in cols] for lab, kp in targets])
    rhs = np.array([1.0 if kp in (k2, -k2) else 0.0 for _, kp in targets])
    coef = np.linalg.solve(mat, rhs)
    residual = float(np.abs(mat @ coef - rhs).max())
    if residual > POLE_RESIDUAL_MAX:
        raise ArithmeticError(f"pole function solve residual {residual:.3g}")
    return ContinuumPole(ext, k2, powers, coef, residual)


def continuum_inner(label: str, k2_test: int, ext: str, k2: int, n: int = IP_NODES) -> float:
    """``<e_{k'}, P^ext_k>`` on the cross-section for ``label`` in ``{T, L, R}``."""
    pole = continuum_pole_function(ext, k2, n)
    xl, _, _, xr, _, _ = _cross_section(n)
    return _project(label, k2_test, pole(xl + 0j), pole(xr + 0j), n)


def stray_projections(ext: str, k2: int, extra: int = 2, n: int = IP_NODES) -> float:
    """Largest singular projection of a pole function that should vanish.

    Covers top poles ``e_{k'}`` with ``k < k' <= k + extra`` (all of them for
    leg poles) and leg poles ``e^L_{-k'}``, ``e^R_{-k'}`` in the same range.
    """
    top_max = k2 + 2 * extra
    worst = 0.0
    for lab in ("T", "L", "R"):
        for kp in range(1, top_max + 1, 2):
            if lab == ext and kp <= k2:
                continue
            test = kp if lab == "T" else -kp
            worst = max(worst, abs(continuum_inner(lab, test, ext, k2, n)))
    return worst


def residue_check(mode1, mode2, z2, radius: float = 1e-3, n: int = 64) -> tuple:
    """Return ``(oo_residue_error, ob_contour)`` for small circles around ``z2``.

    The first is the distance between ``(2 pi i)^{-1} oint K^oo dz1`` and
    ``K1(z2) K2(z2)``; the second is ``|oint K^ob dz1|``.
    """
    theta = 2 * np.pi * np.arange(n) / n
    z1 = z2 + radius * np.exp(1j * theta)
    dz = 1j * radius * np.exp(1j * theta) * (2 * np.pi / n)
    oo = np.sum(two_point_kernel("oo", mode1, z1, mode2, np.full(n, z2)) * dz) / (2j * np.pi)
    ob = np.sum(two_point_kernel("ob", mode1, z1, mode2, np.full(n, z2)) * dz)
    target = mode1(z2) * mode2(z2)
    return float(abs(oo - target)), float(abs(ob))


# ---------------------------------------------------------------------------
# continuum recursion


class ContinuumRecursion(FusionRecursion):
    """Peeling recursion fed by continuum pole-function inner products."""

    def __init__(self, order: str = "TLR", left_rule: str = "derived", n: int = IP_NODES):
        self.n = n
        self._table: dict = {}
        super().__init__(self._lookup, order, left_rule)

    def _lookup(self, ext, kind, kp, k):
        idx = (ext, kind, kp, k)
        if idx not in self._table:
            test = -kp if kind == "T" else kp
            self._table[idx] = continuum_inner(kind, test, ext, k, self.n)
        return self._table[idx]


def continuum_fusion_recursive(key, order: str = "TLR", left_rule: str = "derived") -> float:
    return ContinuumRecursion(order, left_rule).ratio(key)
