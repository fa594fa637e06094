"""Spectral objects of the kinetic transport operator.

The central quantity is the Hamiltonian H(p), defined implicitly by

    I(H, p) = integral of M(v) / (1 + H - v.p) dv = 1

when a root exists in (mu(p) - 1, mu(p)], and H = mu(p) - 1 otherwise,
where mu(p) = |p| * vbar(p/|p|). The second regime is the singular set:
the eigenprofile picks up a Dirac mass at the velocity maximizing v.p.
Membership is decided by the marginal integral l(e): p is singular iff
l(p/|p|) <= |p|.

From H come the speed curves c(lambda, e), the critical decay
lambda_tilde(e) = (1+r) l(e) past which c(lambda, e) = vbar(e) - 1/lambda
exactly, the minimal speed c_star(e), and a four-way shape classification
of the curve (see minimal_speed).
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, RootNotBracketed, ValidationError
from .models import direction, edge_kernel_integral, j_integral, l_integral

# classification threshold on c'(lambda_tilde-); the zero-derivative case
# sits on a measure-zero boundary in r, the tolerance makes it observable
DERIV_TOL = 1e-6
LAMBDA_CAP = 1e3
_I_CAP = 1e6
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class DispersionResult:
    """Eigenvalue H(p) with its (possibly singular) eigenprofile.

    profile_density is the absolutely continuous part of the profile,
    v -> M(v) / (1 + H - v.p); for finite velocity sets it returns the
    per-atom masses instead (the profile relative to counting measure).
    dirac_weight is the mass at dirac_location, nonzero only on the
    singular set.
    """

    p: np.ndarray
    H: float
    regular: bool
    profile_density: Callable
    dirac_weight: float = 0.0
    dirac_location: Optional[np.ndarray] = None


@dataclass
class SpeedCurve:
    """Sampled speed curve c(., e) with its minimum and shape class.

    case_label is Case1 when lambda_tilde = +inf (no singular branch),
    Case2 when the minimum is interior, Case3 when it sits at
    lambda_tilde with |c'(lambda_tilde-)| <= DERIV_TOL, Case4 when the
    left derivative there is negative.
    """

    e: np.ndarray
    r: float
    lambda_grid: np.ndarray
    c_values: np.ndarray
    lambda_tilde: float
    lambda_star: float
    c_star: float
    case_label: str
    left_derivative_at_tilde: Optional[float] = None


def _mu_parts(model, p):
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if p.size != model.dim:
        raise ValidationError(
            "p has %d components, model is %d-dimensional" % (p.size, model.dim)
        )
    nrm = float(np.linalg.norm(p))
    if not np.isfinite(nrm):
        raise ValidationError("p must be finite")
    return p, nrm


def in_singular_set(model, p):
    """True iff p lies in the singular set, i.e. l(p/|p|) <= |p|.

    The origin is never singular; models with l = +inf (positive density
    near the support edge, or any finite velocity set) have an empty
    singular set.
    """
    p, nrm = _mu_parts(model, p)
    if nrm == 0.0:
        return False
    return l_integral(model, p / nrm) <= nrm


def singular_boundary_radius(model, e, tol=1e-9, r_max=1e9):
    """Radius where the ray t*e enters the singular set, by bisection.

    Returns +inf when the ray never enters (empty singular set in that
    direction). The radius equals l(e) by construction; this routine
    recovers it from in_singular_set alone.
    """
    e = direction(e)
    hi = 1.0
    while not in_singular_set(model, hi * e):
        hi *= 2.0
        if hi > r_max:
            return np.inf
    lo = 0.5 * hi if hi > 1.0 else 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if in_singular_set(model, mid * e):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _profile_closure(model, p, H):
    if model.is_discrete:
        pts = model.support.points
        wts = model.support.weights
        den = 1.0 + H - pts @ p

        def profile(v):
            v = np.atleast_2d(np.asarray(v, dtype=float))
            if v.shape[1] != pts.shape[1]:
                v = v.reshape(-1, pts.shape[1])
            out = np.zeros(v.shape[0])
            for i, row in enumerate(v):
                d2 = np.sum((pts - row) ** 2, axis=1)
                k = int(np.argmin(d2))
                if d2[k] < 1e-18:
                    out[i] = wts[k] / den[k] if den[k] != 0.0 else np.inf
            return out

        return profile

    def profile(v):
        v = np.asarray(v, dtype=float)
        dot = v * p[0] if model.dim == 1 else v @ p
        with np.errstate(divide="ignore"):
            return model.density(v) / (1.0 + H - dot)

    return profile


def _discrete_h(weights, dots):
    """Root of sum w_i/(1+H-a_i) = 1 for a finite velocity set.

    Always regular (the maximizing atom carries positive weight, so the
    relation blows up at mu - 1). Newton in t = H - (mu - 1) needs no
    bisection safeguard: F(t) = sum w_i/(t+b_i) - 1 is convex and
    decreasing with its root in [w_tie, 1], where w_tie is the weight
    sitting at the maximal projection, so starting at t = w_tie (where
    F >= 0) the iterates increase monotonically to the root.

    dots may be a (k,) vector of atom projections v_i . p, or an (m, k)
    matrix of m such rows solved simultaneously (the hot loops in the
    conjugate and speed-curve scans batch their frequency grids here).
    """
    dots = np.asarray(dots, dtype=float)
    scalar = dots.ndim == 1
    d = dots[None, :] if scalar else dots
    w = np.asarray(weights, dtype=float)[None, :]
    mu = d.max(axis=1)
    b = mu[:, None] - d
    t = (w * (b <= 0.0)).sum(axis=1)
    for _ in range(60):
        rat = w / (t[:, None] + b)
        F = rat.sum(axis=1) - 1.0
        slope = (rat * rat / w).sum(axis=1)
        step = F / slope
        t = t + step
        if (np.abs(step) < 4e-16 * (1.0 + t)).all():
            break
    H = mu - 1.0 + t
    return float(H[0]) if scalar else H


def _h_value(model, p):
    """Hamiltonian evaluation shared by the result-building and hot paths.

    Returns (H, regular, lval, nrm, mu).
    """
    p, nrm = _mu_parts(model, p)
    if nrm == 0.0:
        return 0.0, True, np.inf, 0.0, 0.0
    if model.is_discrete:
        dots = model.support.points @ p
        H = _discrete_h(model.support.weights, dots)
        return H, True, np.inf, nrm, float(np.max(dots))
    e = p / nrm
    mu = nrm * model.support_max(e)
    lval = l_integral(model, e)
    # the relative slack absorbs roundoff when p sits exactly on the
    # singular boundary (both branches agree there by continuity)
    if lval <= nrm * (1.0 + 1e-12):
        return mu - 1.0, False, lval, nrm, mu

    def f(xi):
        val = edge_kernel_integral(model, e, 1.0 + xi - mu, nrm, 1)
        # the cap keeps the sign usable when the quadrature reports +inf
        # in the deep near-singular regime
        return min(val, _I_CAP) - 1.0

    # The graded grid cannot separate offsets d = 1 + xi - mu below a few
    # powers of two above its innermost panel width; querying inside that
    # band gives panel tails that are neither flat nor geometric yet. The
    # bracket search therefore floors at eps_min, and if the relation is
    # still at most 1 there the root lies below quadrature resolution:
    # return the floor itself (H is mu - 1 to within eps). This is the
    # large-|p| regime where H - (mu - 1) decays like exp(-2|p|).
    eps = 1e-3 * (1.0 + nrm)
    eps_min = nrm * model.directional_grid(e).edge_tail * 2.0**13
    while f(mu - 1.0 + eps) <= 0.0:
        if eps <= eps_min:
            return mu - 1.0 + eps, True, lval, nrm, mu
        eps = max(eps * 0.1, eps_min)
    hi = mu
    step = max(1.0, abs(mu))
    for _ in range(64):
        if f(hi) <= 0.0:
            break
        hi = hi + step
        step *= 2.0
    else:
        raise RootNotBracketed("implicit relation stays above 1 far past mu(p)")
    H = brentq(f, mu - 1.0 + eps, hi, xtol=1e-12, rtol=4.0 * np.finfo(float).eps)
    return float(H), True, lval, nrm, mu


def hamiltonian_value(model, p):
    """H(p) alone, skipping eigenprofile construction (hot-loop path)."""
    return _h_value(model, p)[0]


def hamiltonian_values(model, P):
    """H along the rows of P (shape (m, dim)); batches discrete models."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if model.is_discrete:
        return _discrete_h(model.support.weights, P @ model.support.points.T)
    return np.array([_h_value(model, row)[0] for row in P])


def hamiltonian(model, p):
    """Solve the spectral problem at frequency p.

    Regular p: Brent root of the implicit relation on a bracket whose
    lower end creeps toward mu(p) - 1 (where I blows up or tends to
    l/|p| > 1) and whose upper end starts at mu(p) (where I <= 1 always).
    Singular p: H = mu(p) - 1 with Dirac weight 1 - l/|p| placed at the
    canonical maximizer of v.p.
    """
    H, regular, lval, nrm, _mu = _h_value(model, p)
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if nrm == 0.0:
        if model.is_discrete:
            prof = _profile_closure(model, p, 0.0)
        else:
            prof = lambda v: model.density(v)
        return DispersionResult(p, 0.0, True, prof, 0.0, None)
    if not regular:
        weight = max(1.0 - lval / nrm, 0.0)
        loc = model.arg_mu(p)[0]
        return DispersionResult(p, H, False, _profile_closure(model, p, H), weight, loc)
    return DispersionResult(p, H, True, _profile_closure(model, p, H))


def lambda_tilde(model, r, e):
    """Critical decay (1+r) l(e); +inf when l(e) diverges."""
    if r <= 0:
        raise ValidationError("growth rate r must be positive")
    return (1.0 + r) * l_integral(model, e)


def speed(model, r, e, lam):
    """Front speed c(lambda, e) = ((1+r) H(lambda e/(1+r)) + r) / lambda.

    On the singular branch lambda >= lambda_tilde(e) this reduces to
    vbar(e) - 1/lambda without any special-casing.
    """
    if r <= 0:
        raise ValidationError("growth rate r must be positive")
    if lam <= 0:
        raise ValidationError("decay rate lambda must be positive")
    e = direction(e)
    H = hamiltonian_value(model, (lam / (1.0 + r)) * e)
    return ((1.0 + r) * H + r) / lam


def speed_derivative_left(model, r, e, lam, c=None):
    """c'(lambda-, e) from the derivative of the dispersion relation.

    Uses c' = (1 - 1/((1+r) Jcal)) / lambda^2 with
    Jcal = integral of M / (1 + lambda(c - v.e))^2 dv, so no finite
    differences are involved. Valid for lambda <= lambda_tilde(e); at
    lambda_tilde this is the left derivative.
    """
    e = direction(e)
    if c is None:
        c = speed(model, r, e, lam)
    vbar = model.support_max(e)
    d = max(1.0 + lam * (c - vbar), 0.0)
    jcal = edge_kernel_integral(model, e, d, lam, 2)
    if np.isinf(jcal):
        return 1.0 / lam**2
    return (1.0 - 1.0 / ((1.0 + r) * jcal)) / lam**2


def _golden_min(f, a, b, rtol=1e-10, max_iter=200):
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    it = 0
    while b - a > rtol * (1.0 + b) and it < max_iter:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        it += 1
    xm = 0.5 * (a + b)
    return xm, f(xm)


def _zoom_min(fvec, a, b, rounds=6, n=65):
    """Minimize a unimodal function given as a vectorized batch evaluator.

    Each round evaluates n points and keeps the bracket around the
    winner, shrinking the window by (n-1)/2 per round; used instead of
    golden section when one batched call is far cheaper than n scalar
    ones (discrete models).
    """
    best_x, best_f = a, np.inf
    for _ in range(rounds):
        xs = np.linspace(a, b, n)
        fs = fvec(xs)
        k = int(np.argmin(fs))
        if fs[k] < best_f:
            best_x, best_f = float(xs[k]), float(fs[k])
        a = xs[max(k - 1, 0)]
        b = xs[min(k + 1, n - 1)]
    return best_x, best_f


def _sample_grid(lo, hi, n, focus=None, extra=4):
    grid = np.geomspace(lo, hi, n)
    if focus is not None:
        k = int(np.clip(np.searchsorted(grid, focus), 1, n - 1))
        a = grid[max(k - 2, 0)]
        b = grid[min(k + 2, n - 1)]
        grid = np.union1d(grid, np.geomspace(a, b, 4 * extra + 1))
    return grid


def minimal_speed(model, r, e, deriv_tol=DERIV_TOL, n_grid=64, sample=True):
    """Minimize c(., e) over decay rates and classify the curve shape.

    A log-spaced scan brackets the minimum, golden-section search
    refines it; with a finite lambda_tilde the sign of the left
    derivative there decides between an interior minimum (Case2) and a
    minimum at the kink (Case3 if the derivative vanishes within
    deriv_tol, Case4 if negative). With lambda_tilde = +inf (Case1) the
    scan is capped at LAMBDA_CAP; a curve still decreasing at the cap is
    reported as the ballistic limit c_star = vbar(e), lambda_star = inf.
    """
    if r <= 0:
        raise ValidationError("growth rate r must be positive")
    e = direction(e)
    vbar = model.support_max(e)
    lam_tilde = lambda_tilde(model, r, e)
    capped = not np.isfinite(lam_tilde)
    hi = LAMBDA_CAP if capped else lam_tilde

    cfun = lambda lam: speed(model, r, e, lam)

    def cvals_on(lams):
        H = hamiltonian_values(model, np.multiply.outer(lams / (1.0 + r), e))
        return ((1.0 + r) * H + r) / lams

    lam_star = None
    c_star = None
    case = None
    dleft = None

    if not capped:
        dleft = speed_derivative_left(model, r, e, lam_tilde)
        if dleft <= -deriv_tol:
            case, lam_star = "Case4", lam_tilde
        elif abs(dleft) <= deriv_tol:
            case, lam_star = "Case3", lam_tilde
        else:
            case = "Case2"
    else:
        case = "Case1"

    if lam_star is not None:
        c_star = cfun(lam_star)
    else:
        refine = (
            (lambda a, b: _zoom_min(cvals_on, a, b))
            if model.is_discrete
            else (lambda a, b: _golden_min(cfun, a, b))
        )
        grid = np.geomspace(1e-3, hi, n_grid)
        cvals = cvals_on(grid)
        k = int(np.argmin(cvals))
        if capped and k == n_grid - 1:
            # decide between a minimum hiding near the cap and a curve
            # that decreases toward its ballistic limit forever
            d_cap = speed_derivative_left(model, r, e, hi, c=cvals[-1])
            if d_cap < 0.0:
                lam_star, c_star = np.inf, vbar
            else:
                lam_star, c_star = refine(grid[k - 1], hi)
        else:
            a = grid[k - 1] if k > 0 else 0.5 * grid[0]
            b = grid[k + 1] if k < grid.size - 1 else hi
            lam_star, c_star = refine(a, b)

    if sample:
        focus = lam_star if np.isfinite(lam_star) else hi
        lambda_grid = _sample_grid(1e-3, hi, n_grid, focus=focus)
        c_values = cvals_on(lambda_grid)
    else:
        lambda_grid = np.empty(0)
        c_values = np.empty(0)
    return SpeedCurve(
        e=e,
        r=float(r),
        lambda_grid=lambda_grid,
        c_values=c_values,
        lambda_tilde=lam_tilde,
        lambda_star=float(lam_star),
        c_star=float(c_star),
        case_label=case,
        left_derivative_at_tilde=dleft,
    )


def case_from_square_criterion(model, r, e, deriv_tol=DERIV_TOL):
    """Classify the speed curve from the moment inequality alone.

    The minimum sits at lambda_tilde iff
    j(e) <= (1+r) l(e)^2, where j is the squared-edge integral; the
    borderline equality is Case3. This is an independent route to the
    label in SpeedCurve (which uses the sign of c'(lambda_tilde-)): the
    two are tied by c'(lambda_tilde-) = (1 - (1+r) l^2 / j) /
    lambda_tilde^2.
    """
    if r <= 0:
        raise ValidationError("growth rate r must be positive")
    e = direction(e)
    lval = l_integral(model, e)
    if np.isinf(lval):
        return "Case1"
    jval = j_integral(model, e)
    lam_tilde = (1.0 + r) * lval
    if np.isinf(jval):
        return "Case2"
    dleft = (1.0 - (1.0 + r) * lval**2 / jval) / lam_tilde**2
    if dleft <= -deriv_tol:
        return "Case4"
    if abs(dleft) <= deriv_tol:
        return "Case3"
    return "Case2"


@dataclass
class WaveProfile:
    """Travelling-wave velocity profile F at decay lambda in direction e.

    density(v) = (1+r) M(v) / (1 + lambda (c - v.e)); mass is its
    integral over the velocity set (1 up to quadrature error for every
    admissible lambda, including lambda_tilde itself).
    """

    lam: float
    e: np.ndarray
    r: float
    c: float
    density: Callable
    mass: float


def wave_profile(model, r, e, lam):
    """Profile of the linear wave with decay lam; DomainError past lambda_tilde.

    For lam <= lambda_tilde(e) the profile is integrable with unit mass;
    beyond lambda_tilde the dispersion relation no longer holds and no
    integrable profile exists.
    """
    if r <= 0:
        raise ValidationError("growth rate r must be positive")
    if lam <= 0:
        raise ValidationError("decay rate lambda must be positive")
    e = direction(e)
    lam_tilde = lambda_tilde(model, r, e)
    if lam > lam_tilde * (1.0 + 1e-12):
        raise DomainError(
            "lambda = %g exceeds lambda_tilde = %g; no integrable profile"
            % (lam, lam_tilde)
        )
    c = speed(model, r, e, lam)
    vbar = model.support_max(e)

    if model.is_discrete:
        pts = model.support.points
        wts = model.support.weights
        den = 1.0 + lam * (c - pts @ e)

        def density(v):
            v = np.atleast_2d(np.asarray(v, dtype=float))
            out = np.zeros(v.shape[0])
            for i, row in enumerate(v):
                d2 = np.sum((pts - row) ** 2, axis=1)
                k = int(np.argmin(d2))
                if d2[k] < 1e-18:
                    out[i] = (1.0 + r) * wts[k] / den[k] if den[k] != 0.0 else np.inf
            return out

    else:

        def density(v):
            v = np.asarray(v, dtype=float)
            dot = v * e[0] if model.dim == 1 else v @ e
            with np.errstate(divide="ignore"):
                return (1.0 + r) * model.density(v) / (1.0 + lam * (c - dot))

    d = max(1.0 + lam * (c - vbar), 0.0)
    mass = (1.0 + r) * edge_kernel_integral(model, e, d, lam, 1)
    return WaveProfile(lam=float(lam), e=e, r=float(r), c=float(c), density=density, mass=float(mass))
