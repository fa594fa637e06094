"""Acceptance battery: one test per numbered criterion.

Every expected number here is either a closed form evaluated with the
math module, or produced in-test by an independent oracle (scipy brentq
or QUADPACK on the defining identities); nothing is compared against a
value the package itself produced earlier.  Each test prints a single
[PASS]/[FAIL] line with the measured quantities (visible with -s, or in
the failure report).
"""

import math
import time
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize_scalar

import kinfront as kf

# closed forms for the quadratic equilibrium M(v) = (3/2)(1-|v|)^2
L_QUAD = 3.0 * (2.0 * math.log(2.0) - 1.0)  # edge integral l(1)
J_QUAD = 6.0 * (1.0 - math.log(2.0))        # squared-edge integral j(1)

model = lru_cache(maxsize=None)(kf.preset)


def _report(num, ok, detail):
    line = "[%s] criterion %d: %s" % ("PASS" if ok else "FAIL", num, detail)
    print(line)
    assert ok, line


def diamond_model():
    pts = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
    return kf.VelocityModel(kf.DiscreteSet(pts, [0.25] * 4), name="diamond")


# ---------------------------------------------------------------- oracles

def uniform_h_oracle(p):
    """Root of (1/(2p)) log((1+H+p)/(1+H-p)) = 1 by bracketed Brent."""
    if p == 0.0:
        return 0.0
    q = abs(p)

    def g(h):
        return math.log((1.0 + h + q) / (1.0 + h - q)) / (2.0 * q) - 1.0

    lo = max(0.0, q - 1.0) + 1e-13
    return brentq(g, lo, q + 1.0, xtol=1e-14, rtol=8.9e-16)


def discrete_h_oracle(weights, dots):
    """Root of sum w_i / (1 + H - a_i) = 1 for a finite velocity set."""
    a = np.asarray(dots, dtype=float)
    w = np.asarray(weights, dtype=float)
    top = float(a.max())

    def g(y):
        return float(np.sum(w / (y - a))) - 1.0

    # g decreases from +inf at y -> top to below 0 at y = top + 1
    y = brentq(g, top + 1e-14, top + 1.0, xtol=1e-15, rtol=8.9e-16)
    return y - 1.0


def diamond_cstar_oracle(theta, r=1.0):
    """Minimal speed of the four-point diamond set along (cos t, sin t)."""
    pts = np.array([(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)])
    w = np.full(4, 0.25)
    e = np.array([math.cos(theta), math.sin(theta)])

    def c(lam):
        h = discrete_h_oracle(w, (lam / (1.0 + r)) * (pts @ e))
        return ((1.0 + r) * h + r) / lam

    res = minimize_scalar(c, bounds=(1e-3, 64.0), method="bounded",
                          options={"xatol": 1e-10})
    return float(res.fun)


# --------------------------------------------------------------- criteria

def test_criterion_01_quadratic_closed_forms():
    t0 = time.monotonic()
    m = kf.preset("quadratic-1d")
    lv = kf.l_integral(m, 1.0)
    jv = kf.j_integral(m, 1.0)
    elapsed = time.monotonic() - t0
    ok = (abs(lv - L_QUAD) < 1e-8 and abs(jv - J_QUAD) < 1e-8
          and elapsed < 1.0)
    _report(1, ok, "l err %.2e, j err %.2e, %.2f s"
            % (abs(lv - L_QUAD), abs(jv - J_QUAD), elapsed))


def test_criterion_02_ball_edge_integral_and_boundary():
    parts = []
    ok = True
    for name, n in (("uniform-ball:2", 2), ("uniform-ball:3", 3)):
        m = model(name)
        e = np.eye(m.dim)[0]
        # the membership rule l(p/|p|) <= |p| puts the boundary of the
        # singular set at radius l(e); for the uniform ball l = n/(n-1)
        target = n / (n - 1.0)
        lv = kf.l_integral(m, e)
        rad = kf.singular_boundary_radius(m, e)
        ok = ok and abs(lv - target) < 1e-6 and abs(rad - target) < 1e-6
        parts.append("n=%d l=%.8f radius=%.8f (target %.8f)"
                     % (n, lv, rad, target))
    _report(2, ok, "; ".join(parts))


def test_criterion_03_uniform_hamiltonian_closed_form():
    m = model("uniform-1d")
    worst = 0.0
    for p in np.linspace(-5.0, 5.0, 101):
        h_pkg = kf.hamiltonian_value(m, p)
        h_ref = uniform_h_oracle(float(p))
        worst = max(worst, abs(h_pkg - h_ref))
    _report(3, worst < 1e-8, "max |H - oracle| = %.3e over 101 points" % worst)


def test_criterion_04_speed_curve_case_reproduction():
    quad_m = model("quadratic-1d")
    r_crit = J_QUAD / L_QUAD**2 - 1.0
    parts = []
    ok = True

    sc = kf.minimal_speed(quad_m, r_crit, 1.0, sample=False)
    good = (sc.case_label == "Case3"
            and abs(sc.left_derivative_at_tilde) < 1e-4
            and abs(sc.lambda_tilde - (1.0 + r_crit) * L_QUAD) < 1e-6
            and abs(sc.lambda_tilde - 1.5887) < 5e-5)
    ok = ok and good
    parts.append("quadratic r=%.4f -> %s lt=%.6f |c'|=%.1e"
                 % (r_crit, sc.case_label, sc.lambda_tilde,
                    abs(sc.left_derivative_at_tilde)))

    sc = kf.minimal_speed(quad_m, 1.0, 1.0, sample=False)
    good = (sc.case_label == "Case4"
            and sc.left_derivative_at_tilde < 0.0
            and abs(sc.lambda_tilde - 2.0 * L_QUAD) < 1e-6
            and abs(sc.lambda_tilde - 2.3178) < 5e-5)
    ok = ok and good
    parts.append("quadratic r=1 -> %s lt=%.6f c'=%.4f"
                 % (sc.case_label, sc.lambda_tilde,
                    sc.left_derivative_at_tilde))

    sc = kf.minimal_speed(model("uniform-ball:2"), 1.0, (1.0, 0.0),
                          sample=False)
    good = sc.case_label == "Case2" and abs(sc.lambda_tilde - 4.0) < 1e-6
    ok = ok and good
    parts.append("ball:2 r=1 -> %s lt=%.6f" % (sc.case_label, sc.lambda_tilde))

    sc = kf.minimal_speed(model("uniform-1d"), 1.0, 1.0, sample=False)
    good = sc.case_label == "Case1" and np.isinf(sc.lambda_tilde)
    ok = ok and good
    parts.append("uniform r=1 -> %s" % sc.case_label)

    _report(4, ok, "; ".join(parts))


def test_criterion_05_classifier_equivalence():
    rng = np.random.default_rng(20250814)
    names = ("uniform-1d", "quadratic-1d", "uniform-ball:2", "two-speed")
    mismatches = []
    for name in names:
        m = model(name)
        e = np.eye(m.dim)[0]
        for r in 3.0 * (1.0 - rng.random(20)):
            by_curve = kf.minimal_speed(m, r, e, sample=False).case_label
            by_square = kf.case_from_square_criterion(m, r, e)
            if by_curve != by_square:
                mismatches.append((name, float(r), by_curve, by_square))
    _report(5, not mismatches,
            "80 (model, r) cells, %d disagreements %s"
            % (len(mismatches), mismatches if mismatches else ""))


def test_criterion_06_hopf_lax_consistency():
    t0 = time.monotonic()
    m = diamond_model()
    r = 1.0
    e0 = np.array([1.0, 0.0])

    c_star = kf.minimal_speed(m, r, e0, sample=False).c_star
    w_star = kf.freidlin_gartner_speed(m, r, e0)

    c_ref = diamond_cstar_oracle(0.0, r)
    thetas = np.linspace(-1.2, 1.2, 25)
    ratios = [diamond_cstar_oracle(t, r) / math.cos(t) for t in thetas]
    w_ref = min(ratios)

    worst_planar = 0.0
    worst_point = 0.0
    for t in (0.5, 1.0, 2.0, 4.0):
        rp = kf.nullset_radius(m, r, e0, t, init="planar")
        rq = kf.nullset_radius(m, r, e0, t, init="point")
        worst_planar = max(worst_planar, abs(rp / t - c_star))
        worst_point = max(worst_point, abs(rq / t - w_star))
    elapsed = time.monotonic() - t0

    ok = (worst_planar < 1e-4 and worst_point < 1e-4
          and abs(c_star - c_ref) < 1e-6
          and abs(w_star - w_ref) < 1e-4
          and elapsed < 10.0)
    _report(6, ok,
            "c*=%.8f (oracle %.8f), w*=%.8f (oracle %.8f), "
            "planar dev %.2e, point dev %.2e, %.2f s"
            % (c_star, c_ref, w_star, w_ref, worst_planar, worst_point,
               elapsed))


def test_criterion_07_simulation_cross_validation():
    runs = (
        ("uniform-1d", dict(t_end=60.0)),
        ("quadratic-1d", dict(t_end=200.0, fit_fraction=0.4)),
        ("two-speed", dict(t_end=200.0)),
    )
    parts = []
    ok = True
    for name, overrides in runs:
        m = model(name)
        config = kf.SimConfig(dx=0.005, **overrides)
        t0 = time.monotonic()
        trace = kf.run_front_experiment(m, 1.0, config)
        elapsed = time.monotonic() - t0
        sc = kf.minimal_speed(m, 1.0, 1.0, sample=False)
        if name == "quadratic-1d":
            # minimum at the kink, so the predicted speed is the
            # singular-branch value vbar - 1/lambda_tilde
            assert abs(sc.c_star - (1.0 - 1.0 / (2.0 * L_QUAD))) < 1e-10
        rel = abs(trace.fitted_speed - sc.c_star) / sc.c_star
        ok = ok and rel < 0.03 and elapsed < 120.0
        parts.append("%s: fit %.4f vs c* %.4f (%.2f%%), %.0f s"
                     % (name, trace.fitted_speed, sc.c_star, 100.0 * rel,
                        elapsed))
    _report(7, ok, "; ".join(parts))


def test_criterion_08_diffusive_limit():
    r = 1e-3
    sc = kf.minimal_speed(model("uniform-1d"), r, 1.0, sample=False)
    target = 2.0 * math.sqrt(r / 3.0)  # 2 sqrt(r <v^2>), <v^2> = 1/3
    rel = abs(sc.c_star - target) / target
    _report(8, rel < 0.05,
            "c* = %.6g vs 2 sqrt(r/3) = %.6g (%.3f%%)"
            % (sc.c_star, target, 100.0 * rel))


def _ac_profile_mass(name, m, p):
    """Absolutely continuous eigenprofile mass by independent quadrature."""
    h = kf.hamiltonian_value(m, p)
    if name == "uniform-1d":
        q = abs(float(np.atleast_1d(p)[0]))
        if q == 0.0:
            return 1.0 / (1.0 + h)
        return math.log((1.0 + h + q) / (1.0 + h - q)) / (2.0 * q)
    if name == "quadratic-1d":
        q = float(np.atleast_1d(p)[0])

        def f(t):
            return 1.5 * (1.0 - abs(t)) ** 2 / (1.0 + h - q * t)

        val, err = quad(f, -1.0, 1.0, points=[0.0],
                        epsabs=1e-12, epsrel=1e-12, limit=400)[:2]
        return val
    if name == "uniform-ball:2":
        p = np.asarray(p, dtype=float)
        beta = float(np.linalg.norm(p))
        d = 1.0 + h - beta  # distance of 1+H from the edge value vbar|p|

        def f(u):
            # t = 1 - u^2 flattens the sqrt edge of the semicircle marginal
            return (4.0 / math.pi) * u * u * math.sqrt(2.0 - u * u) \
                / (d + beta * u * u)

        val, err = quad(f, 0.0, math.sqrt(2.0),
                        epsabs=1e-12, epsrel=1e-12, limit=400)[:2]
        return val
    raise AssertionError(name)


def test_criterion_09_property_suites():
    rng = np.random.default_rng(987)
    parts = []
    ok = True

    # maximum-principle clamp on a short front run
    config = kf.SimConfig(dx=0.02, t_end=5.0, length=12.0, nv=16)
    trace = kf.run_front_experiment(model("uniform-1d"), 1.0, config)
    good = trace.clamp_max < 1e-12
    ok = ok and good
    parts.append("clamp %.1e" % trace.clamp_max)

    # midpoint convexity of H on 200 sampled triples
    cases = [("uniform-1d", 3.0), ("quadratic-1d", 3.0),
             ("uniform-ball:2", 2.0), ("two-speed", 3.0)]
    worst = -np.inf
    for i in range(200):
        name, scale = cases[i % 4]
        m = model(name)
        p1 = scale * (2.0 * rng.random(m.dim) - 1.0)
        p2 = scale * (2.0 * rng.random(m.dim) - 1.0)
        h1 = kf.hamiltonian_value(m, p1)
        h2 = kf.hamiltonian_value(m, p2)
        hm = kf.hamiltonian_value(m, 0.5 * (p1 + p2))
        worst = max(worst, hm - 0.5 * (h1 + h2))
    good = worst < 1e-10
    ok = ok and good
    parts.append("convexity defect %.1e" % worst)

    # eigen-identity residual |I(H, p) - 1| at regular frequencies
    worst = 0.0
    for name, count, scale in (("uniform-1d", 20, 4.0),
                               ("quadratic-1d", 15, 0.8),
                               ("uniform-ball:2", 10, 1.5),
                               ("two-speed", 5, 4.0)):
        m = model(name)
        for _ in range(count):
            if name == "uniform-ball:2":
                # keep |p| below the singular radius 2
                ang = 2.0 * math.pi * rng.random()
                p = (0.1 + (scale - 0.1) * rng.random()) \
                    * np.array([math.cos(ang), math.sin(ang)])
            else:
                p = scale * (2.0 * rng.random(m.dim) - 1.0)
            if name == "two-speed":
                h = kf.hamiltonian_value(m, p)
                dots = m.support.points @ np.atleast_1d(p)
                mass = float(np.sum(m.support.weights / (1.0 + h - dots)))
            else:
                mass = _ac_profile_mass(name, m, p)
            worst = max(worst, abs(mass - 1.0))
    good = worst < 1e-10
    ok = ok and good
    parts.append("identity residual %.1e" % worst)

    # total eigenprofile mass (density + Dirac) at 50 p, singular included
    worst = 0.0
    n_sing = 0
    for name, count, scale in (("uniform-1d", 15, 4.0),
                               ("quadratic-1d", 15, 3.0),
                               ("uniform-ball:2", 10, 3.0),
                               ("two-speed", 10, 4.0)):
        m = model(name)
        for _ in range(count):
            p = scale * (2.0 * rng.random(m.dim) - 1.0)
            res = kf.hamiltonian(m, p)
            if name == "two-speed":
                mass = float(np.sum(res.profile_density(m.support.points)))
            else:
                mass = _ac_profile_mass(name, m, p)
            mass += res.dirac_weight
            if not res.regular:
                n_sing += 1
            worst = max(worst, abs(mass - 1.0))
    good = worst < 1e-8 and n_sing >= 5
    ok = ok and good
    parts.append("profile mass dev %.1e (%d singular)" % (worst, n_sing))

    _report(9, ok, "; ".join(parts))
