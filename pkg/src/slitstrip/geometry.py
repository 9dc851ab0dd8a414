"""Strip and slit-strip geometry with exact half-integer bookkeeping.

Half-integers are stored as odd integers ``2k`` throughout, so a dual site
``x' = a + 1/2`` is the integer ``2a + 1`` and the mode index ``k = 3/2`` is
``3``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


class GeometryError(ValueError):
    """Raised for inadmissible geometries or index sets."""


@dataclass(frozen=True)
class Strip:
    """Lattice strip between the vertical lines ``x = a`` and ``x = b``."""

    a: int
    b: int

    def __post_init__(self):
        if self.b <= self.a:
            raise GeometryError(f"need a < b (got a={self.a}, b={self.b})")

    @property
    def width(self) -> int:
        return self.b - self.a

    @property
    def sites(self) -> range:
        return range(self.a, self.b + 1)

    @property
    def dual_sites(self) -> tuple[int, ...]:
        """Dual cross-section ``a+1/2, ..., b-1/2`` in doubled coordinates."""
        return tuple(range(2 * self.a + 1, 2 * self.b, 2))

    @property
    def modes(self) -> tuple[int, ...]:
        return mode_indices(self.width)

    def dual_index(self, x2: int) -> int:
        """Position of the dual site ``x2/2`` in the cross-section arrays."""
        if x2 % 2 == 0 or not (2 * self.a < x2 < 2 * self.b):
            raise GeometryError(f"dual site {x2}/2 outside ({self.a}, {self.b})")
        return (x2 - 2 * self.a - 1) // 2

    def site_index(self, x: int) -> int:
        if not self.a <= x <= self.b:
            raise GeometryError(f"site {x} outside [{self.a}, {self.b}]")
        return x - self.a


@dataclass(frozen=True)
class StripGeometry(Strip):
    """Strip with the slit on ``x = 0``: left leg of width ``-a``, right leg of width ``b``."""

    def __post_init__(self):
        if self.a >= 0:
            raise GeometryError(f"a must be negative (got a={self.a})")
        if self.b <= 0:
            raise GeometryError(f"b must be positive (got b={self.b})")

    @property
    def left_width(self) -> int:
        return -self.a

    @property
    def right_width(self) -> int:
        return self.b

    @property
    def left_modes(self) -> tuple[int, ...]:
        return mode_indices(self.left_width)

    @property
    def right_modes(self) -> tuple[int, ...]:
        return mode_indices(self.right_width)

    @property
    def left_strip(self) -> Strip:
        return Strip(self.a, 0)

    @property
    def right_strip(self) -> Strip:
        return Strip(0, self.b)


def make_geometry(a: int, b: int) -> StripGeometry:
    return StripGeometry(int(a), int(b))


def symmetric_geometry(width: int) -> StripGeometry:
    """Geometry of the given width with the slit as central as possible."""
    if width < 2:
        raise GeometryError(f"width must be at least 2 (got {width})")
    a = -(width // 2)
    return StripGeometry(a, width + a)


def mode_indices(width: int) -> tuple[int, ...]:
    """``K^(w) = {1/2, ..., w - 1/2}`` encoded as ``(1, 3, ..., 2w-1)``."""
    return tuple(range(1, 2 * width, 2))


def half_set(values: Iterable[int], width: int | None = None) -> tuple[int, ...]:
    """Canonical sorted tuple of distinct positive odd integers.

    If ``width`` is given, every element must lie in ``K^(width)``.
    """
    items = sorted(int(v) for v in values)
    for v in items:
        if v <= 0 or v % 2 == 0:
            raise GeometryError(f"index {v} is not a positive odd integer")
    if len(set(items)) != len(items):
        raise GeometryError(f"repeated index in {items}")
    if width is not None and items and items[-1] > 2 * width - 1:
        raise GeometryError(f"index {items[-1]}/2 exceeds width {width}")
    return tuple(items)


def parse_half_set(text: str) -> tuple[int, ...]:
    """Parse ``"1,3,5"`` into ``(1, 3, 5)``; the empty string is the empty set."""
    text = text.strip()
    if not text:
        return ()
    try:
        values = [int(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise GeometryError(f"malformed index list {text!r}") from exc
    return half_set(values)


def format_half_set(values: Sequence[int]) -> str:
    return ",".join(str(v) for v in values)


def parse_key(text: str) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    """Parse ``"alpha;beta_left;beta_right"``."""
    parts = text.split(";")
    if len(parts) != 3:
        raise GeometryError(f"key {text!r} must have three ';'-separated slots")
    return tuple(parse_half_set(p) for p in parts)  # type: ignore[return-value]


def format_key(alpha, beta_left, beta_right) -> str:
    return ";".join(format_half_set(s) for s in (alpha, beta_left, beta_right))


def signed_indicator(alpha: Sequence[int], k: int) -> int:
    """``(-1)^(m-j)`` if ``k`` is the ``j``-th smallest of the ``m`` elements, else 0."""
    items = sorted(alpha)
    try:
        j = items.index(k) + 1
    except ValueError:
        return 0
    return -1 if (len(items) - j) % 2 else 1


def remove(alpha: Sequence[int], k: int) -> tuple[int, ...]:
    return tuple(v for v in alpha if v != k)
