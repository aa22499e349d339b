"""Rectangles and square windows used throughout the pipeline."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle, top-left anchored, in pixel units."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"box must have positive extent, got {self.w}x{self.h}")

    @property
    def x2(self) -> int:
        return self.x + self.w

    @property
    def y2(self) -> int:
        return self.y + self.h

    @property
    def area(self) -> int:
        return self.w * self.h

    def union_bounds(self, other: "Box") -> "Box":
        x1 = min(self.x, other.x)
        y1 = min(self.y, other.y)
        x2 = max(self.x2, other.x2)
        y2 = max(self.y2, other.y2)
        return Box(x1, y1, x2 - x1, y2 - y1)

    def contains_box(self, other: "Box") -> bool:
        return (
            self.x <= other.x
            and self.y <= other.y
            and self.x2 >= other.x2
            and self.y2 >= other.y2
        )


@dataclass(frozen=True)
class Window:
    """Square region of interest on a page."""

    page_id: int
    x: int
    y: int
    side: int

    def __post_init__(self):
        if self.side < 1:
            raise ValueError(f"window side must be >= 1, got {self.side}")

    @property
    def box(self) -> Box:
        return Box(self.x, self.y, self.side, self.side)

    def sort_key(self) -> tuple[int, int, int]:
        # Canonical emission order for deterministic window lists.
        return (self.y, self.x, self.side)


@dataclass(frozen=True)
class SearchHit:
    """One ranked search result: a window on a page plus its squared
    query-to-code distance."""

    page_id: int
    window: Window
    distance: float
