"""Box-constrained Nelder-Mead with projection onto the bounds."""

from __future__ import annotations

import numpy as np


def nelder_mead_box(func, x0, step, lower, upper, *, rtol=1e-6, xtol=1e-9,
                    max_evals=500):
    """Minimise ``func`` over the box [lower, upper].

    Trial points are clipped into the box before evaluation, so the simplex
    may collapse onto a face (e.g. a mixture weight of exactly 0).  Stops
    when the spread of function values across the simplex is at most
    ``rtol * max(1, |f_best|)``, when the simplex has shrunk below ``xtol``
    in every coordinate, or after ``max_evals`` evaluations.

    Returns (x_best, f_best, n_evals).
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)

    def clip(x):
        # np.minimum/np.maximum carry far less call overhead than np.clip
        return np.minimum(np.maximum(x, lower), upper)

    x0 = clip(np.asarray(x0, dtype=float))
    dim = x0.size
    evals = 0

    def f(x):
        nonlocal evals
        evals += 1
        return float(func(x))

    pts = [x0]
    for i in range(dim):
        x = x0.copy()
        x[i] += step[i]
        if x[i] > upper[i] or x[i] < lower[i]:
            x[i] = x0[i] - step[i]
        pts.append(clip(x))
    vals = [f(x) for x in pts]

    while evals < max_evals:
        order = sorted(range(len(vals)), key=vals.__getitem__)  # stable
        pts = [pts[i] for i in order]
        vals = [vals[i] for i in order]
        best, worst = vals[0], vals[-1]
        if worst - best <= rtol * max(1.0, abs(best)):
            break
        if max(float(np.abs(p - pts[0]).max()) for p in pts[1:]) <= xtol:
            break

        centroid = sum(pts[:-1]) / dim
        xr = clip(2.0 * centroid - pts[-1])
        fr = f(xr)
        if fr < vals[0]:
            xe = clip(3.0 * centroid - 2.0 * pts[-1])
            fe = f(xe)
            if fe < fr:
                pts[-1], vals[-1] = xe, fe
            else:
                pts[-1], vals[-1] = xr, fr
            continue
        if fr < vals[-2]:
            pts[-1], vals[-1] = xr, fr
            continue

        if fr < vals[-1]:
            xc = clip(centroid + 0.5 * (xr - centroid))
        else:
            xc = clip(centroid + 0.5 * (pts[-1] - centroid))
        fc = f(xc)
        if fc < min(fr, vals[-1]):
            pts[-1], vals[-1] = xc, fc
            continue

        # shrink toward the best vertex
        for i in range(1, len(pts)):
            pts[i] = pts[0] + 0.5 * (pts[i] - pts[0])
            vals[i] = f(pts[i])

    i = int(np.argmin(vals))
    return pts[i], vals[i], evals
