"""Finite-difference helpers on uniform grids."""

import numpy as np

from .errors import TailUnresolved


def spacing(grid):
    h = np.diff(grid)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0.0):
        raise ValueError("grid must be uniform")
    return float(h[0])


def d1(f, h, order=2):
    """First derivative; centered inside, one-sided of matching order at the ends."""
    f = np.asarray(f, dtype=float)
    out = np.empty_like(f)
    if order == 2:
        out[1:-1] = (f[2:] - f[:-2]) / (2 * h)
        out[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
        out[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
    elif order == 4:
        out[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
        c = np.array([-25, 48, -36, 16, -3]) / (12 * h)
        c1 = np.array([-3, -10, 18, -6, 1]) / (12 * h)
        out[0] = c @ f[:5]
        out[1] = c1 @ f[:5]
        out[-1] = -(c @ f[-1:-6:-1])
        out[-2] = -(c1 @ f[-1:-6:-1])
    else:
        raise ValueError("order must be 2 or 4")
    return out


def d2(f, h, order=2):
    """Second derivative; centered inside, one-sided at the ends."""
    f = np.asarray(f, dtype=float)
    out = np.empty_like(f)
    if order == 2:
        out[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2
        c = np.array([2, -5, 4, -1]) / h**2
        out[0] = c @ f[:4]
        out[-1] = c @ f[-1:-5:-1]
    elif order == 4:
        out[2:-2] = (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1] - f[4:]) / (12 * h**2)
        c = np.array([45, -154, 214, -156, 61, -10]) / (12 * h**2)
        c1 = np.array([10, -15, -4, 14, -6, 1]) / (12 * h**2)
        out[0] = c @ f[:6]
        out[1] = c1 @ f[:6]
        out[-1] = c @ f[-1:-7:-1]
        out[-2] = c1 @ f[-1:-7:-1]
    else:
        raise ValueError("order must be 2 or 4")
    return out


def derivative(f, h, k, order=2):
    """k-th derivative by repeated application of d1/d2."""
    out = np.asarray(f, dtype=float)
    while k >= 2:
        out = d2(out, h, order)
        k -= 2
    if k == 1:
        out = d1(out, h, order)
    return out


def trapezoid(f, h):
    f = np.asarray(f, dtype=float)
    return h * (f.sum() - 0.5 * (f[0] + f[-1]))


def cumtrapz(f, h):
    f = np.asarray(f, dtype=float)
    out = np.zeros_like(f)
    out[1:] = np.cumsum(0.5 * h * (f[1:] + f[:-1]))
    return out


def fit_tail_rate(x, f, far, side, lo=1e-9, hi=1e-3, min_nodes=20):
    """Least-squares decay rate of |f - far| over the window lo <= |f - far| <= hi.

    For ``side='left'`` the rate r fits |f - far| ~ C exp(r x); for ``side='right'``
    it fits C exp(-r x). The returned rate is positive for a decaying tail.
    """
    x = np.asarray(x, dtype=float)
    dev = np.abs(np.asarray(f, dtype=float) - far)
    mask = (dev >= lo) & (dev <= hi)
    mid = len(x) // 2
    if side == "left":
        mask[mid:] = False
    elif side == "right":
        mask[:mid] = False
    else:
        raise ValueError("side must be 'left' or 'right'")
    if mask.sum() < min_nodes:
        raise TailUnresolved(
            f"{side} tail has {int(mask.sum())} nodes in [{lo:g}, {hi:g}], need {min_nodes}"
        )
    slope = np.polyfit(x[mask], np.log(dev[mask]), 1)[0]
    return float(slope if side == "left" else -slope)
