"""Event catalogs: time-ordered point patterns with optional magnitudes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from vorres.geometry import Window

__all__ = ["Catalog"]


@dataclass(frozen=True)
class Catalog:
    """Ordered events (t, x, y[, mag]) on a window over a time span.

    Times are strictly increasing; `mag` is None for purely spatial
    patterns.  `mag_cutoff` is the lower magnitude bound the catalog was
    filtered at (None when magnitudes are absent).
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    mag: np.ndarray | None
    window: Window
    time_span: tuple[float, float]
    mag_cutoff: float | None = None

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if not (len(t) == len(x) == len(y)):
            raise ValueError("t, x, y must have equal length")
        mag = self.mag
        if mag is not None:
            mag = np.asarray(mag, dtype=float)
            if len(mag) != len(t):
                raise ValueError("mag length mismatch")
        if len(t) > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("event times must be strictly increasing")
        t0, t1 = self.time_span
        if not t0 < t1:
            raise ValueError("empty time span")
        for arr in (t, x, y) + ((mag,) if mag is not None else ()):
            arr.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "mag", mag)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def points(self) -> np.ndarray:
        """(n, 2) array of event locations."""
        return np.column_stack([self.x, self.y])

    @property
    def duration(self) -> float:
        return self.time_span[1] - self.time_span[0]

    def subset(self, mask) -> "Catalog":
        """Catalog restricted to the selected events (same window/span)."""
        mask = np.asarray(mask)
        return Catalog(
            t=self.t[mask], x=self.x[mask], y=self.y[mask],
            mag=None if self.mag is None else self.mag[mask],
            window=self.window, time_span=self.time_span,
            mag_cutoff=self.mag_cutoff,
        )

    def with_window(self, window: Window) -> "Catalog":
        """Same events viewed on a different window (no filtering)."""
        return Catalog(t=self.t, x=self.x, y=self.y, mag=self.mag,
                       window=window, time_span=self.time_span,
                       mag_cutoff=self.mag_cutoff)
