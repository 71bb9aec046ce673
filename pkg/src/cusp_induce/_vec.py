"""Vectorized map kernels shared by the sampling and partition machinery.

Branch dispatch is positional (searchsorted over the interior boundaries,
ties resolved to the right-hand branch, matching MapSpec.branch_index).
Expression evaluation never raises here; exact landings on kinks or blowup
points come back as non-finite entries for the caller to mask out.
"""

from __future__ import annotations

import numpy as np


def branch_indices(m, x: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(m.interior_boundaries, x, side="right")
    return np.minimum(idx, len(m.branches) - 1)


def _per_branch(m, x, evaluators):
    x = np.asarray(x, dtype=float)
    outs = [np.empty(x.shape, dtype=float) for _ in evaluators]
    idx = branch_indices(m, x)
    with np.errstate(all="ignore"):
        for i, br in enumerate(m.branches):
            sel = idx == i
            if not sel.any():
                continue
            xv = x[sel]
            for out, name in zip(outs, evaluators):
                out[sel] = getattr(br, name)(xv)
    return outs


def step_values(m, x: np.ndarray) -> np.ndarray:
    """f(x) elementwise."""
    return _per_branch(m, x, ("values",))[0]


def step_with_derivative(m, x: np.ndarray):
    """(f(x), Df(x)) elementwise."""
    return tuple(_per_branch(m, x, ("values", "d1_values")))


def step_with_jets(m, x: np.ndarray):
    """(f(x), Df(x), D2f(x)) elementwise."""
    return tuple(_per_branch(m, x, ("values", "d1_values", "d2_values")))


def in_delta(m, x, delta: float) -> np.ndarray:
    """Membership in the union of the one-sided neighborhoods (open)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape, dtype=bool)
    for cp in m.critical_points:
        c = cp.location
        if cp.side == "+":
            out |= (x > c) & (x < c + delta)
        else:
            out |= (x > c - delta) & (x < c)
    return out


def invert_branch(m, i: int, targets, iters: int = 60):
    """Preimages under branch i by monotone bisection.

    Returns (solutions, ok); solutions has the shape of targets with NaN
    where ok is False.  ok marks targets inside the branch image (with a
    1e-12 slack; such targets are clamped onto the image first).
    """
    br = m.branches[i]
    img_lo, img_hi = m.branch_images[i]
    t = np.asarray(targets, dtype=float)
    ok = (t >= img_lo - 1e-12) & (t <= img_hi + 1e-12)
    tt = np.clip(t[ok], img_lo, img_hi)
    lo = np.full(tt.shape, br.a, dtype=float)
    hi = np.full(tt.shape, br.b, dtype=float)
    increasing = m.monotone_signs[i] > 0
    with np.errstate(all="ignore"):
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            v = br.values(mid)
            up = (v < tt) if increasing else (v > tt)
            lo = np.where(up, mid, lo)
            hi = np.where(up, hi, mid)
    out = np.full(t.shape, np.nan)
    out[ok] = 0.5 * (lo + hi)
    return out, ok


def preimages(m, targets, iters: int = 60) -> np.ndarray:
    """All f-preimages of the targets, concatenated over branches."""
    out = []
    for i in range(len(m.branches)):
        sol, ok = invert_branch(m, i, targets, iters)
        if ok.any():
            out.append(sol[ok])
    if not out:
        return np.empty(0, dtype=float)
    return np.concatenate(out)
