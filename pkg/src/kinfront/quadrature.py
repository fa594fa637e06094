"""Quadrature engines.

Two kinds of integrals arise. Plain integrals of smooth(ish) integrands
over the velocity set are handled by composite Gauss-Legendre / product
rules with level-doubling refinement (`refine_integral`). Directional
integrals of the form

    integral of  mbar(t) * k(vbar - t) dt      over t = v . e

with a kernel k that may blow up at t = vbar (the support edge in the
direction e) are handled by `GradedGrid`: geometrically graded panels
toward both ends of each smooth segment, with per-kernel tail
extrapolation and divergence classification on the panel increments.

All node/weight construction is done once per (model, direction) and the
per-kernel evaluation is a single vectorized pass, so repeated kernel
queries (root finding in the dispersion relation) are cheap.
"""

import numpy as np
from scipy.special import roots_legendre

from .errors import QuadratureNotConverged

# graded-ladder defaults
LADDER_LEVELS = 48
LADDER_ORDER = 16
DIVERGENCE_CAP = 1e8
DIVERGENCE_RATIO = 0.85
RATIO_SCATTER_TOL = 0.25
_TAIL_RATIO_FLOOR = 1e-3

_gl_cache = {}


def gl_rule(order):
    """Gauss-Legendre nodes/weights on [0, 1], cached per order."""
    try:
        return _gl_cache[order]
    except KeyError:
        x, w = roots_legendre(order)
        pair = (0.5 * (x + 1.0), 0.5 * w)
        _gl_cache[order] = pair
        return pair


def panel_nodes(a, b, order):
    """GL nodes and weights on the panel [a, b]."""
    x, w = gl_rule(order)
    return a + (b - a) * x, (b - a) * w


def composite_nodes(segments, panels_per_segment, order):
    """Composite GL rule over a list of (a, b) segments."""
    xs, ws = [], []
    for a, b in segments:
        edges = np.linspace(a, b, panels_per_segment + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            x, w = panel_nodes(lo, hi, order)
            xs.append(x)
            ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def refine_integral(eval_level, start_level=0, max_levels=10, rtol=1e-10, atol=1e-14):
    """Level-doubling refinement: call eval_level(level) until two
    successive values agree to rtol (relative) or atol (absolute).

    Raises QuadratureNotConverged if max_levels is exhausted.
    """
    prev = eval_level(start_level)
    for level in range(start_level + 1, start_level + max_levels):
        cur = eval_level(level)
        if abs(cur - prev) <= max(rtol * abs(cur), atol):
            return cur
        prev = cur
    raise QuadratureNotConverged(
        "integral did not stabilize after %d refinement levels" % max_levels
    )


class _Ladder:
    """One geometrically graded stack of GL panels.

    Nodes are stored level-major so per-level increments of any kernel are
    a reshape + row sum. `s0` is the distance of the ladder's own endpoint
    from the singular point s = 0; a ladder with s0 == 0 is the one whose
    increments decide convergence vs divergence of singular kernels.
    """

    def __init__(self, s_end, width, toward_end, levels, order):
        # panels cover distances d in (width*2^-levels, width] from s_end,
        # level k spanning d in [width*2^-(k+1), width*2^-k]
        x, w = gl_rule(order)
        ks = np.arange(levels)
        hi = width * np.exp2(-ks)
        lo = 0.5 * hi
        # offsets from the endpoint, shape (levels, order)
        offs = lo[:, None] + (hi - lo)[:, None] * x[None, :]
        wts = (hi - lo)[:, None] * w[None, :]
        if toward_end == "down":
            s = s_end + offs  # endpoint at small-s side
            self.s0 = s_end
        else:
            s = s_end - offs  # endpoint at large-s side
            self.s0 = None  # never the singular end
        self.s = s.ravel()
        self.w = wts.ravel()
        self.levels = levels
        self.order = order
        self.tail_width = width * 2.0 ** (-levels)

    def sum_levels(self, y):
        """Per-level increments of weighted kernel values y (aligned with self.s)."""
        return y.reshape(self.levels, self.order).sum(axis=1)


def _ladder_total(increments, singular):
    """Sum ladder increments, extrapolate the tail, classify divergence.

    Returns a float, possibly +inf. All kernels handled here are
    nonnegative; signed integrands go through `refine_integral` instead.
    """
    totals = np.cumsum(increments)
    if totals[-1] > DIVERGENCE_CAP:
        return np.inf
    last = increments[-7:]
    scale = totals[-1]
    if scale <= 0.0:
        return 0.0
    # negligible tail: nothing to classify
    if last.max() <= 1e-15 * scale:
        return totals[-1]
    ratios = last[1:] / np.maximum(last[:-1], 1e-300)
    rbar = ratios.mean()
    if singular and rbar >= DIVERGENCE_RATIO:
        return np.inf
    if np.abs(ratios - rbar).max() > RATIO_SCATTER_TOL * max(rbar, _TAIL_RATIO_FLOOR):
        raise QuadratureNotConverged(
            "graded-panel increments are not settling into a geometric tail"
        )
    if rbar >= DIVERGENCE_RATIO:
        # non-singular ladders never see singular kernels; a fat tail here
        # means the integrand misbehaves at a supposedly regular endpoint
        raise QuadratureNotConverged("unexpected slow decay at a regular endpoint")
    tail = increments[-1] * rbar / (1.0 - rbar) if rbar > _TAIL_RATIO_FLOOR else 0.0
    return totals[-1] + tail


class GradedGrid:
    """Quadrature grid for directional integrals against a slice marginal.

    Works in the distance variable s = vbar - t >= 0 so kernels singular
    at the support edge are evaluated without cancellation. The domain
    (s_min=0, s_max] is split at marginal breakpoints, and each segment
    carries two graded ladders meeting at its midpoint.

    Parameters
    ----------
    s_break : increasing array of segment edges in s, starting at 0.0
        (the singular end) and ending at s_max = vbar - t_min.
    marginal : vectorized callable s -> mbar(vbar - s) >= 0.
    vbar : support function value in the grid's direction.
    """

    def __init__(self, s_break, marginal, vbar, levels=LADDER_LEVELS, order=LADDER_ORDER):
        s_break = np.asarray(s_break, dtype=float)
        if s_break[0] != 0.0 or np.any(np.diff(s_break) <= 0):
            raise ValueError("segment edges must increase from 0")
        self.vbar = float(vbar)
        self.ladders = []
        for lo, hi in zip(s_break[:-1], s_break[1:]):
            half = 0.5 * (hi - lo)
            self.ladders.append(_Ladder(lo, half, "down", levels, order))
            self.ladders.append(_Ladder(hi, half, "up", levels, order))
        # innermost panel scale of the singular-end ladder; offsets below
        # ~2^7 of this are indistinguishable from 0 on the grid
        self.edge_tail = self.ladders[0].tail_width
        self.s = np.concatenate([lad.s for lad in self.ladders])
        m = np.asarray(marginal(self.s), dtype=float)
        if m.shape != self.s.shape:
            raise ValueError("marginal must map s-array to same-shape array")
        self.w = np.concatenate([lad.w for lad in self.ladders]) * m
        self._slices = []
        pos = 0
        for lad in self.ladders:
            self._slices.append(slice(pos, pos + lad.s.size))
            pos += lad.s.size

    def kernel_integral(self, kernel):
        """Integrate kernel(s) * mbar against the grid.

        kernel must be vectorized and nonnegative on s > 0. Returns +inf
        when the increments toward s = 0 classify as divergent.
        """
        y = kernel(self.s) * self.w
        total = 0.0
        for lad, sl in zip(self.ladders, self._slices):
            inc = lad.sum_levels(y[sl])
            part = _ladder_total(inc, singular=(lad.s0 == 0.0))
            if np.isinf(part):
                return np.inf
            total += part
        return total

    def power_kernel(self, d, beta, power):
        """Integral of 1/(d + beta*s)^power against the marginal.

        Covers every directional integral in the dispersion machinery:
        l (d=0, beta=1, power=1), j (d=0, beta=1, power=2), the implicit
        relation I(xi, p) (d = 1+xi-mu(p), beta=|p|, power=1) and the
        derivative integral (power=2).
        """
        if power == 1:
            return self.kernel_integral(lambda s: 1.0 / (d + beta * s))
        if power == 2:
            return self.kernel_integral(lambda s: 1.0 / (d + beta * s) ** 2)
        return self.kernel_integral(lambda s: (d + beta * s) ** (-power))
