"""Deterministic fixtures shared with the C++ tests (same formulas)."""
import numpy as np


def ellipse_gt(w=12, h=9):
    y, x = np.mgrid[0:h, 0:w]
    return ((x - 5.0) ** 2 / 16.0 + (y - 4.0) ** 2 / 9.0) < 1.0


def wave_map(w=12, h=9):
    y, x = np.mgrid[0:h, 0:w]
    return 0.5 + 0.5 * np.sin(1.3 * x + 0.7 * y)


def offset_rect_gt(w=16, h=10):
    y, x = np.mgrid[0:h, 0:w]
    return (x >= 9) & (x < 14) & (y >= 1) & (y < 7)


def ramp_map(w=16, h=10):
    y, x = np.mgrid[0:h, 0:w]
    return (x + 2.0 * y) / (w - 1 + 2.0 * (h - 1))


def disk(w, h, cx, cy, r):
    y, x = np.mgrid[0:h, 0:w]
    return (x - cx) ** 2 + (y - cy) ** 2 <= r * r
