"""Clifford generators acting on the irreducible state space.

Every dual site ``x'`` carries two generators ``psi_x'`` and ``psi*_x'``.
Both flip the spins left of ``x'`` and multiply by a prefactor built from
the two spins adjacent to ``x'``.  A general element of their span is a
:class:`CliffordElement`, stored by its coefficient pair per dual site.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .geometry import Strip
from .statespace import v_spins
from .transfer import TransferOperator

LAMBDA = cmath.exp(0.25j * math.pi)
LAMBDA3 = LAMBDA ** 3
LAMBDA_M1 = 1 / LAMBDA
LAMBDA_M3 = 1 / LAMBDA3
SQRT2 = math.sqrt(2.0)

# phi(f) = KAPPA * sum(i f psi - i conj(f) psi*)
KAPPA = cmath.exp(0.25j * math.pi) / 2


class FermionAlgebra:
    """Generator actions on ``V`` for one strip, precomputed as permutations."""

    def __init__(self, strip: Strip):
        self.strip = strip
        w = strip.width
        self.dim = 1 << w
        spins = v_spins(strip)
        idx = np.arange(self.dim)
        self._perm = []
        self._pref = []
        self._pref_star = []
        for j in range(w):
            perm = idx ^ ((1 << (j + 1)) - 1)
            left, right = spins[:, j], spins[:, j + 1]
            pref = (-left + 1j * right) / SQRT2
            pref_star = (-1j * left + right) / SQRT2
            self._perm.append(perm)
            self._pref.append(pref[perm])
            self._pref_star.append(pref_star[perm])

    def psi(self, j: int, v: np.ndarray) -> np.ndarray:
        p = self._perm[j]
        return _bcast(self._pref[j], v) * v[p]

    def psi_star(self, j: int, v: np.ndarray) -> np.ndarray:
        p = self._perm[j]
        return _bcast(self._pref_star[j], v) * v[p]

    def apply(self, elem: "CliffordElement", v: np.ndarray) -> np.ndarray:
        out = np.zeros(v.shape, dtype=complex)
        for j in range(self.strip.width):
            if elem.c[j] != 0:
                out += elem.c[j] * self.psi(j, v)
            if elem.c_star[j] != 0:
                out += elem.c_star[j] * self.psi_star(j, v)
        return out

    def dense(self, elem: "CliffordElement") -> np.ndarray:
        return self.apply(elem, np.eye(self.dim, dtype=complex))

    def generator(self, kind: str, j: int) -> "CliffordElement":
        return CliffordElement.generator(self.strip.width, kind, j)


def _bcast(pref, v):
    return pref.reshape((-1,) + (1,) * (v.ndim - 1))


def apply_generator(strip: Strip, kind: str, x2: int, v: np.ndarray) -> np.ndarray:
    """Apply ``psi_x'`` (``kind="psi"``) or ``psi*_x'`` (``kind="psi*"``) to ``v``."""
    alg = FermionAlgebra(strip)
    j = strip.dual_index(x2)
    return alg.psi(j, v) if kind == "psi" else alg.psi_star(j, v)


@dataclass(frozen=True)
class CliffordElement:
    """``sum_j c[j] psi_j + c_star[j] psi*_j`` over the dual sites of a strip."""

    c: np.ndarray
    c_star: np.ndarray

    @classmethod
    def generator(cls, width: int, kind: str, j: int) -> "CliffordElement":
        c = np.zeros(width, complex)
        cs = np.zeros(width, complex)
        (c if kind == "psi" else cs)[j] = 1.0
        return cls(c, cs)

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "CliffordElement":
        w = vec.shape[0] // 2
        return cls(np.asarray(vec[:w], complex), np.asarray(vec[w:], complex))

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.c, self.c_star])

    def adjoint(self) -> "CliffordElement":
        # psi^dagger = -psi and psi*^dagger = psi*
        return CliffordElement(-np.conj(self.c), np.conj(self.c_star))

    def anticommutator(self, other: "CliffordElement") -> complex:
        """Scalar ``s`` with ``{self, other} = s id``."""
        return complex(np.sum(-2 * self.c * other.c + 2 * self.c_star * other.c_star))

    def __add__(self, other):
        return CliffordElement(self.c + other.c, self.c_star + other.c_star)

    def __mul__(self, z):
        return CliffordElement(z * self.c, z * self.c_star)

    __rmul__ = __mul__


def mode_of_function(f: np.ndarray) -> CliffordElement:
    """The integrated mode ``phi(f)``; real-linear in the cross-section function ``f``."""
    f = np.asarray(f, dtype=complex)
    return CliffordElement(KAPPA * 1j * f, -KAPPA * 1j * np.conj(f))


def function_of_mode(elem: CliffordElement) -> np.ndarray:
    """Inverse of :func:`mode_of_function` on its image (reads the ``psi`` part)."""
    return elem.c / (KAPPA * 1j)


def reflect(f: np.ndarray) -> np.ndarray:
    """``R f = -i conj(f)``, so that ``phi(f)^dagger = phi(R f)``."""
    return -1j * np.conj(f)


def real_inner(f: np.ndarray, g: np.ndarray) -> float:
    """``<f, g> = Re sum f conj(g)``."""
    return float(np.real(np.vdot(g, f)))


# ---------------------------------------------------------------------------
# induced rotation


def induced_rotation_table(width: int) -> np.ndarray:
    """Complex ``2w x 2w`` matrix of ``X -> T^-1 X T`` on generator coefficients.

    Column ``j`` holds the coefficients of ``T^-1 psi_j T`` and column
    ``w + j`` those of ``T^-1 psi*_j T`` (``psi`` coordinates first).
    """
    w = width
    if w == 1:
        return induced_rotation_by_conjugation(Strip(0, 1))
    m = np.zeros((2 * w, 2 * w), complex)
    r = 1 / SQRT2
    for j in range(w):
        col, cols = j, w + j
        if j == 0:
            m[j, col] = 1 + r
            m[w + j, col] = LAMBDA3 + LAMBDA_M3 * r
            m[j + 1, col] = LAMBDA3 * r
            m[w + j + 1, col] = r
            m[w + j, cols] = 1 + r
            m[j, cols] = LAMBDA_M3 + LAMBDA3 * r
            m[w + j + 1, cols] = LAMBDA_M3 * r
            m[j + 1, cols] = r
        elif j == w - 1:
            m[j, col] = 1 + r
            m[w + j, col] = LAMBDA_M3 + LAMBDA3 * r
            m[j - 1, col] = LAMBDA_M3 * r
            m[w + j - 1, col] = r
            m[w + j, cols] = 1 + r
            m[j, cols] = LAMBDA3 + LAMBDA_M3 * r
            m[w + j - 1, cols] = LAMBDA3 * r
            m[j - 1, cols] = r
        else:
            m[j, col] = 2
            m[w + j, col] = -SQRT2
            m[j + 1, col] = LAMBDA3 * r
            m[w + j + 1, col] = r
            m[j - 1, col] = LAMBDA_M3 * r
            m[w + j - 1, col] = r
            m[w + j, cols] = 2
            m[j, cols] = -SQRT2
            m[w + j + 1, cols] = LAMBDA_M3 * r
            m[j + 1, cols] = r
            m[w + j - 1, cols] = LAMBDA3 * r
            m[j - 1, cols] = r
    return m


def induced_rotation_by_conjugation(strip: Strip) -> np.ndarray:
    """Same matrix as :func:`induced_rotation_table`, by dense conjugation ``T^-1 X T``.

    Coefficients are read off with the anticommutator form, which is
    nondegenerate on the generator span.
    """
    w = strip.width
    alg = FermionAlgebra(strip)
    op = TransferOperator(strip)
    t = op.dense("v")
    t_inv = op.apply_inverse(np.eye(alg.dim))
    gens = [alg.dense(CliffordElement.generator(w, "psi", j)) for j in range(w)]
    gens += [alg.dense(CliffordElement.generator(w, "psi*", j)) for j in range(w)]
    m = np.zeros((2 * w, 2 * w), complex)
    for col, g in enumerate(gens):
        conj = t_inv @ g @ t
        for row, h in enumerate(gens):
            # {conj, h} = s id with s = -2 c_row (psi) or +2 c_row (psi*)
            s = np.trace(conj @ h + h @ conj) / alg.dim
            m[row, col] = s / (-2 if row < w else 2)
    return m


def realify(f: np.ndarray) -> np.ndarray:
    return np.concatenate([f.real, f.imag])


def complexify(x: np.ndarray) -> np.ndarray:
    w = x.shape[0] // 2
    return x[:w] + 1j * x[w:]


def rotation_on_functions(width: int, table: np.ndarray | None = None) -> np.ndarray:
    """Real ``2w x 2w`` matrix of ``P`` with ``T^-1 phi(f) T = phi(P f)``.

    Coordinates are ``(Re f, Im f)``.
    """
    m = induced_rotation_table(width) if table is None else table
    cols = []
    for basis in (np.eye(width), 1j * np.eye(width)):
        for j in range(width):
            image = m @ mode_of_function(basis[j]).vector
            cols.append(realify(function_of_mode(CliffordElement.from_vector(image))))
    return np.array(cols).T


def real_form_defect(width: int, table: np.ndarray | None = None) -> float:
    """Largest deviation of ``M phi(f)`` from the image of ``phi`` over a real basis."""
    m = induced_rotation_table(width) if table is None else table
    worst = 0.0
    for basis in (np.eye(width), 1j * np.eye(width)):
        for j in range(width):
            image = CliffordElement.from_vector(m @ mode_of_function(basis[j]).vector)
            back = mode_of_function(function_of_mode(image)).vector
            worst = max(worst, float(np.abs(back - image.vector).max()))
    return worst


# ---------------------------------------------------------------------------
# s-holomorphic values on vertical edges


def vertical_edge_value(f_south: complex, f_north: complex, side: str) -> complex:
    """Value on a vertical edge that is s-holomorphic with two horizontal neighbours.

    ``side="E"`` uses the horizontal edges to the east of the vertical edge
    (south-east and north-east), ``side="W"`` those to the west.  The two
    relations around the shared face and the two shared vertices determine
    the value uniquely.
    """
    if side == "E":
        eta_s, eta_n = -LAMBDA, LAMBDA_M1
    elif side == "W":
        eta_s, eta_n = LAMBDA3, LAMBDA
    else:
        raise ValueError(f"side must be 'E' or 'W', got {side!r}")
    rows, rhs = [], []
    for eta, val in ((eta_s, f_south), (eta_n, f_north)):
        target = val + eta * np.conj(val)
        # u + eta conj(u) as a real-linear map of (Re u, Im u)
        rows.append([1 + eta.real, eta.imag])
        rows.append([eta.imag, 1 - eta.real])
        rhs.extend([target.real, target.imag])
    sol = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)[0]
    return complex(sol[0], sol[1])


# ---------------------------------------------------------------------------
# operator-level checks of the fermion field on a strip


@dataclass
class FieldReport:
    vertical_expressions: float
    csh: float
    crbv: float
    closedness: float
    slidability: float
    height_independence: float

    def worst(self) -> float:
        return max(self.__dict__.values())


def verify_fermion_field_extension(strip: Strip, seed: int = 0,
                                   heights: range = range(-2, 3)) -> FieldReport:
    """Check the fermion field identities on ``strip`` as dense operator identities.

    Dense matrices of size ``2^w`` are used, so keep ``w <= 6``.
    """
    w = strip.width
    alg = FermionAlgebra(strip)
    op = TransferOperator(strip)
    t = op.dense("v")
    t_inv = op.apply_inverse(np.eye(alg.dim))
    psi0 = [alg.dense(CliffordElement.generator(w, "psi", j)) for j in range(w)]
    psis0 = [alg.dense(CliffordElement.generator(w, "psi*", j)) for j in range(w)]

    def at_height(mats, y):
        left = np.linalg.matrix_power(t_inv if y >= 0 else t, abs(y))
        right = np.linalg.matrix_power(t if y >= 0 else t_inv, abs(y))
        return [left @ m @ right for m in mats]

    rows = {y: (at_height(psi0, y), at_height(psis0, y)) for y in (0, 1)}
    r = 1 / SQRT2
    lam, lam3, lamm1, lamm3 = LAMBDA, LAMBDA3, LAMBDA_M1, LAMBDA_M3

    def east(j):
        ps, pss = rows[0][0][j], rows[0][1][j]
        pn, pns = rows[1][0][j], rows[1][1][j]
        hol = lam * r * pn + r * pns - lam3 * r * ps - r * pss
        anti = lamm1 * r * pns + r * pn - lamm3 * r * pss - r * ps
        return hol, anti

    def west(j):
        ps, pss = rows[0][0][j], rows[0][1][j]
        pn, pns = rows[1][0][j], rows[1][1][j]
        hol = lamm1 * r * pn + r * pns - lamm3 * r * ps - r * pss
        anti = lam * r * pns + r * pn - lam3 * r * pss - r * ps
        return hol, anti

    def left_boundary():
        ps, pss = rows[0][0][0], rows[0][1][0]
        pn, pns = rows[1][0][0], rows[1][1][0]
        c1, c2 = (1 - lam) / (2 * SQRT2), (1 - lamm1) / (2 * SQRT2)
        hol = c1 * (lam * pn + pns) + c2 * (lamm1 * ps - pss)
        anti = c2 * (lamm1 * pns + pn) + c1 * (lam * pss - ps)
        return hol, anti

    def right_boundary():
        ps, pss = rows[0][0][w - 1], rows[0][1][w - 1]
        pn, pns = rows[1][0][w - 1], rows[1][1][w - 1]
        c1, c2 = (1 - lamm1) / (2 * SQRT2), (1 - lam) / (2 * SQRT2)
        hol = c1 * (lamm1 * pn + pns) + c2 * (lam * ps - pss)
        anti = c2 * (lam * pns + pn) + c1 * (lamm1 * pss - ps)
        return hol, anti

    def norm(m):
        return float(np.linalg.norm(m, 2))

    # vertical edges indexed by column i = x - a, i = 0..w
    vert = {}
    dev_expr = 0.0
    for i in range(w + 1):
        if i < w:
            vert[i] = east(i)
        if 0 < i < w:
            we = west(i - 1)
            dev_expr = max(dev_expr, norm(vert[i][0] - we[0]), norm(vert[i][1] - we[1]))
        if i == 0:
            lb = left_boundary()
            dev_expr = max(dev_expr, norm(vert[0][0] - lb[0]), norm(vert[0][1] - lb[1]))
        if i == w:
            vert[w] = west(w - 1)
            rb = right_boundary()
            dev_expr = max(dev_expr, norm(vert[w][0] - rb[0]), norm(vert[w][1] - rb[1]))

    crbv = max(norm(vert[0][0] + 1j * vert[0][1]), norm(vert[w][0] - 1j * vert[w][1]))

    # plaquette at column j (face centre a + j + 1/2 + i/2), edges keyed by name
    def plaquette_edges(j):
        return {
            "S": (rows[0][0][j], rows[0][1][j]),
            "N": (rows[1][0][j], rows[1][1][j]),
            "W": vert[j],
            "E": vert[j + 1],
        }

    corners = {  # vertex - face offsets and the two plaquette edges meeting there
        (-0.5 - 0.5j): ("S", "W"),
        (0.5 - 0.5j): ("S", "E"),
        (0.5 + 0.5j): ("E", "N"),
        (-0.5 + 0.5j): ("N", "W"),
    }
    csh = 0.0
    for j in range(w):
        edges = plaquette_edges(j)
        for d, (e1, e2) in corners.items():
            eta = 1j * abs(d) / d
            lhs = edges[e1][0] + eta * edges[e1][1]
            rhs = edges[e2][0] + eta * edges[e2][1]
            csh = max(csh, norm(lhs - rhs))

    # closedness and slidability with the pair (iF, -i conj F) of an s-holomorphic F
    rng = np.random.default_rng(seed)
    f0 = rng.standard_normal(w) + 1j * rng.standard_normal(w)
    p = rotation_on_functions(w)
    f1 = complexify(np.linalg.solve(p, realify(f0)))
    fv = {i: vertical_edge_value(f0[i], f1[i], "E") for i in range(w)}
    fv[w] = vertical_edge_value(f0[w - 1], f1[w - 1], "W")

    def form(fval, pair, dz):
        m, ms = 1j * fval, -1j * np.conj(fval)
        return m * pair[0] * dz + ms * pair[1] * np.conj(dz)

    closed = 0.0
    for j in range(w):
        edges = plaquette_edges(j)
        vals = {"S": f0[j], "N": f1[j], "W": fv[j], "E": fv[j + 1]}
        total = (form(vals["S"], edges["S"], 1) + form(vals["E"], edges["E"], 1j)
                 + form(vals["N"], edges["N"], -1) + form(vals["W"], edges["W"], -1j))
        closed = max(closed, norm(total))
    slide = max(norm(form(fv[0], vert[0], 1j)), norm(form(fv[w], vert[w], 1j)))

    # integral across the strip at several heights
    def integral(f, y):
        ps, pss = at_height(psi0, y), at_height(psis0, y)
        return sum(1j * f[j] * ps[j] - 1j * np.conj(f[j]) * pss[j] for j in range(w))

    base = integral(f0, 0)
    height = 0.0
    for y in heights:
        fy = complexify(np.linalg.matrix_power(np.linalg.inv(p), y) @ realify(f0)) if y >= 0 \
            else complexify(np.linalg.matrix_power(p, -y) @ realify(f0))
        height = max(height, norm(integral(fy, y) - base) / max(1.0, norm(base)))

    return FieldReport(dev_expr, csh, crbv, closed, slide, height)
