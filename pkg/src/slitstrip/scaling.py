"""Convergence of lattice inner products and fusion ratios to their continuum limits."""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .continuum import continuum_fusion, continuum_inner
from .discrete_cx import pole_functions
from .fusion import DirectFusion, RecursiveFusion, canonical_key
from .geometry import GeometryError, StripGeometry, format_key, make_geometry

DEFAULT_WIDTHS = (4, 8, 16, 32, 64)
DIRECT_CAP = 12
DIRECT_TOL = 1e-9


@dataclass(frozen=True)
class WidthSchedule:
    """Increasing list of ``(a, b)`` pairs with ``a < 0 < b``."""

    entries: tuple

    def __post_init__(self):
        widths = [b - a for a, b in self.entries]
        for a, b in self.entries:
            if not a < 0 < b:
                raise GeometryError(f"schedule entry ({a}, {b}) needs a < 0 < b")
        if any(w2 <= w1 for w1, w2 in zip(widths, widths[1:])):
            raise GeometryError(f"schedule widths must increase: {widths}")

    @classmethod
    def balanced(cls, widths=DEFAULT_WIDTHS) -> "WidthSchedule":
        return cls(tuple((-(w // 2), w - w // 2) for w in widths))

    @property
    def widths(self) -> list:
        return [b - a for a, b in self.entries]

    def geometries(self) -> list:
        return [make_geometry(a, b) for a, b in self.entries]


@dataclass(frozen=True)
class ConvergenceRow:
    width: int
    quantity: str
    discrete: float
    continuum: float

    @property
    def gap(self) -> float:
        return abs(self.discrete - self.continuum)


def inner_product_id(ext: str, kind: str, kp: int, k: int) -> str:
    """Label for ``<g_{kp}, p^ext_k>``, with ``g`` as in the recursions."""
    return f"ip:{ext}:{kind}:{kp}:{k}"


def parse_inner_product_id(text: str) -> tuple:
    tag, ext, kind, kp, k = text.split(":")
    if tag != "ip" or ext not in "TLR" or kind not in "TLR":
        raise GeometryError(f"malformed inner product label {text!r}")
    return ext, kind, int(kp), int(k)


def default_inner_products(k2_max: int = 5) -> list:
    """Every recursion coefficient with both indices at most ``k2_max / 2``."""
    idx = range(1, k2_max + 1, 2)
    return [(ext, kind, kp, k) for ext in "TLR" for kind in "TLR" for k in idx for kp in idx]


def fusion_id(key) -> str:
    return "fusion:" + format_key(*canonical_key(*key))


def _fits(geom: StripGeometry, ext_or_kind: str, k2: int) -> bool:
    width = {"T": geom.width, "L": geom.left_width, "R": geom.right_width}[ext_or_kind]
    return k2 <= 2 * width - 1


def _key_fits(geom: StripGeometry, key) -> bool:
    alpha, bl, br = key
    return (all(_fits(geom, "T", k) for k in alpha) and all(_fits(geom, "L", k) for k in bl)
            and all(_fits(geom, "R", k) for k in br))


@dataclass
class WidthResult:
    width: int
    inner: dict
    fusion: dict
    direct_gap: float | None


def _discrete_at(entry, keys, ips, direct_cap):
    geom = make_geometry(*entry)
    data = pole_functions(geom)
    inner = {}
    for ext, kind, kp, k in ips:
        if _fits(geom, ext, k) and _fits(geom, kind, kp):
            test = -kp if kind == "T" else kp
            inner[(ext, kind, kp, k)] = data.inner(kind, test, ext, k)
    rec = RecursiveFusion(geom, data)
    fusion = {key: rec.ratio(key) for key in keys if _key_fits(geom, key)}
    direct_gap = None
    if geom.width <= direct_cap:
        direct = DirectFusion(geom)
        direct_gap = max((abs(direct.ratio(key) - v) for key, v in fusion.items()), default=0.0)
    return WidthResult(geom.width, inner, fusion, direct_gap)


def worker_count() -> int:
    """Workers from ``SLITSTRIP_THREADS`` (default 1)."""
    raw = os.environ.get("SLITSTRIP_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise GeometryError(f"SLITSTRIP_THREADS must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise GeometryError(f"SLITSTRIP_THREADS must be a positive integer, got {raw!r}")
    return n


@dataclass
class ConvergenceReport:
    schedule: WidthSchedule
    rows: list
    targets: dict
    direct_gaps: dict

    def series(self, quantity: str) -> list:
        return [(r.width, r.discrete) for r in self.rows if r.quantity == quantity]

    def gaps(self, quantity: str) -> list:
        return [r.gap for r in self.rows if r.quantity == quantity]

    def quantities(self) -> list:
        return list(dict.fromkeys(r.quantity for r in self.rows))

    def extrapolated(self, quantity: str, power: float = 1.0) -> float:
        return richardson(self.series(quantity), power)

    def extrapolated_gap(self, quantity: str, power: float = 1.0) -> float:
        return abs(self.extrapolated(quantity, power) - self.targets[quantity])

    def monotone(self, quantity: str, slack: float = 1e-12) -> bool:
        g = self.gaps(quantity)
        return all(b <= a + slack for a, b in zip(g, g[1:]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["width", "quantity", "discrete", "continuum", "gap"])
        for r in self.rows:
            out.writerow([r.width, r.quantity, f"{r.discrete:.17g}", f"{r.continuum:.17g}",
                          f"{r.gap:.17g}"])
        return buf.getvalue()


def richardson(series, power: float = 1.0) -> float:
    """Eliminate a ``C / width^power`` term using the last two points of ``series``."""
    if len(series) < 2:
        raise ValueError("extrapolation needs at least two widths")
    (l1, v1), (l2, v2) = series[-2], series[-1]
    w1, w2 = l1 ** power, l2 ** power
    return (w2 * v2 - w1 * v1) / (w2 - w1)


def run_convergence(schedule: WidthSchedule | None = None, keys=(), ips=None,
                    direct_cap: int = DIRECT_CAP, workers: int | None = None) -> ConvergenceReport:
    """Discrete values at every width next to their continuum targets.

    Quantities that do not exist at a width (index beyond the leg width) are
    skipped at that width.  Fusion ratios come from the recursion; widths up
    to ``direct_cap`` are also computed by the eigenvector route and the
    largest disagreement is recorded.
    """
    schedule = schedule or WidthSchedule.balanced()
    keys = [canonical_key(*k) for k in keys]
    ips = default_inner_products() if ips is None else list(ips)
    workers = worker_count() if workers is None else workers

    targets = {}
    for ext, kind, kp, k in ips:
        test = -kp if kind == "T" else kp
        targets[inner_product_id(ext, kind, kp, k)] = continuum_inner(kind, test, ext, k)
    for key in keys:
        targets[fusion_id(key)] = continuum_fusion(key).value

    args = [(e, keys, ips, direct_cap) for e in schedule.entries]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(args))) as pool:
            results = list(pool.map(_discrete_at, *zip(*args)))
    else:
        results = [_discrete_at(*a) for a in args]

    rows, direct_gaps = [], {}
    for res in results:
        for idx, v in res.inner.items():
            q = inner_product_id(*idx)
            rows.append(ConvergenceRow(res.width, q, v, targets[q]))
        for key, v in res.fusion.items():
            q = fusion_id(key)
            rows.append(ConvergenceRow(res.width, q, v, targets[q]))
        if res.direct_gap is not None:
            direct_gaps[res.width] = res.direct_gap
    return ConvergenceReport(schedule, rows, targets, direct_gaps)
