"""Small analysis helpers for observable time series.

The oscillation measures reported by the experiment runner: empirical
periods from sign alternations or extrema spacings, and counting of
population-transfer events (clusters of zero crossings).
"""

from __future__ import annotations

import numpy as np


def sign_change_times(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Interpolated times at which the series changes sign."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    idx = np.where(np.diff(np.sign(y)) != 0)[0]
    frac = y[idx] / (y[idx] - y[idx + 1])
    return t[idx] + frac * (t[idx + 1] - t[idx])


def cluster_events(times: np.ndarray, min_gap: float) -> np.ndarray:
    """Collapse event times closer than min_gap into single events.

    Rapid ripples during one avoided-crossing passage otherwise count
    as several transfers.
    """
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        return times
    kept = [times[0]]
    for tt in times[1:]:
        if tt - kept[-1] >= min_gap:
            kept.append(tt)
    return np.array(kept)


def alternation_period(t: np.ndarray, y: np.ndarray,
                       min_gap: float = 0.0) -> float:
    """Mean spacing between sign changes of the series.

    For a symmetric oscillation this equals half the full period; for
    the inversion of a packet flipped once per zone traversal it is the
    traversal time itself.
    """
    crossings = sign_change_times(t, y)
    if min_gap > 0:
        crossings = cluster_events(crossings, min_gap)
    if crossings.size < 2:
        return np.nan
    return float(np.mean(np.diff(crossings)))


def extrema_period(t: np.ndarray, y: np.ndarray, order: int = 10,
                   kind: str = "min") -> float:
    """Mean spacing between local minima (or maxima) of the series."""
    from scipy.signal import argrelextrema

    comparator = np.less if kind == "min" else np.greater
    idx = argrelextrema(np.asarray(y), comparator, order=order)[0]
    if idx.size < 2:
        return np.nan
    return float(np.mean(np.diff(np.asarray(t)[idx])))


def count_transfers(t: np.ndarray, y: np.ndarray, min_gap: float,
                    level: float | None = None) -> int:
    """Number of crossings of the series through its midline.

    level defaults to the midpoint between the series extremes; nearby
    crossings within min_gap count once.
    """
    y = np.asarray(y, dtype=float)
    if level is None:
        level = 0.5 * (y.min() + y.max())
    events = sign_change_times(t, y - level)
    return int(cluster_events(events, min_gap).size)


def envelope(t: np.ndarray, y: np.ndarray, window: float) -> np.ndarray:
    """Rolling maximum of |y| over a centred window."""
    t = np.asarray(t, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    out = np.empty_like(y)
    for i, ti in enumerate(t):
        mask = (t >= ti - window / 2) & (t <= ti + window / 2)
        out[i] = y[mask].max()
    return out
