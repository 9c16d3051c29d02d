"""Quick invariant suites behind ``claw selftest``.

Each check exercises one structural property on seeded random data and
reports pass/fail; any failure makes the CLI exit with code 2.  These are
smoke-level versions of the full pytest suite, sized to run in seconds.
"""

from __future__ import annotations

import numpy as np

from .config import build_initial
from .fluxes import make_builtin
from .measures import (
    ParticleQuantiles,
    cdf_from_particles,
    eval_cdf,
    generalized_inverse,
    midpoint_nodes,
    moment,
    particles_from_cdf,
    tail_moment,
)
from .scheme import sh_as_cdf, sh_trajectory, th_step
from .viscous import heat_resample
from .wasserstein import w1_via_cdf, wp_cdf, wp_particles, quantile_staircase, wp_from_staircases

__all__ = ["run_selftest"]


def _random_pq(seed: int, n: int = 256) -> ParticleQuantiles:
    return build_initial({"preset": f"random({seed})"}, n)


def _check_roundtrip():
    for seed in range(12):
        pq = _random_pq(seed)
        back = particles_from_cdf(cdf_from_particles(pq), pq.n)
        if not np.array_equal(back.positions, pq.positions):
            return f"bijection broke for seed {seed}"
    return None


def _check_quantile_monotone():
    for seed in range(8):
        cdf = cdf_from_particles(_random_pq(seed))
        ws = np.linspace(0.01, 0.99, 97)
        qs = generalized_inverse(cdf, ws)
        if np.any(np.diff(qs) < 0):
            return f"quantile not monotone for seed {seed}"
        if np.any(eval_cdf(cdf, qs) < ws):
            return f"F(Q(w)) < w for seed {seed}"
    return None


def _check_w1_identity():
    for seed in range(10):
        f = cdf_from_particles(_random_pq(2 * seed))
        g = cdf_from_particles(_random_pq(2 * seed + 1))
        if abs(wp_cdf(f, g, 1.0) - w1_via_cdf(f, g)) > 1e-10:
            return f"W1 identity broke for seed {seed}"
    return None


def _check_metric():
    for seed in range(8):
        a, b, c = (_random_pq(3 * seed + i) for i in range(3))
        for p in (1.0, 2.0, 3.0):
            dab = wp_particles(a, b, p)
            if abs(dab - wp_particles(b, a, p)) > 1e-14:
                return "asymmetry"
            if dab > wp_particles(a, c, p) + wp_particles(c, b, p) + 1e-12:
                return "triangle inequality broke"
    return None


def _check_step_contraction():
    fluxes = [make_builtin(n) for n in ("burgers", "concave_quadratic", "cubic")]
    for seed in range(10):
        a = _random_pq(100 + 2 * seed)
        b = _random_pq(101 + 2 * seed)
        flux = fluxes[seed % 3]
        for p in (1.0, 2.0, 3.0):
            before = wp_particles(a, b, p)
            after = wp_particles(th_step(a, flux, 0.1), th_step(b, flux, 0.1), p)
            if after > before + 1e-12:
                return f"one-step expansion at seed {seed}, p={p}"
    return None


def _check_sh_contraction():
    flux = make_builtin("burgers")
    times = np.linspace(0.0, 1.0, 9)
    a = _random_pq(500)
    b = _random_pq(501)
    sa = sh_trajectory(a, flux, 0.07, times)
    sb = sh_trajectory(b, flux, 0.07, times)
    w0 = wp_particles(a, b, 2.0)
    for sta, stb in zip(sa, sb):
        w = wp_from_staircases(
            quantile_staircase(sh_as_cdf(sta)), quantile_staircase(sh_as_cdf(stb)), [2.0]
        )[0]
        if w > w0 * (1.0 + 1e-10):
            return "mixture-time expansion"
    return None


def _check_moment_bounds():
    flux = make_builtin("burgers")
    h, m = 0.13, 1.0
    for seed in range(10):
        pq = _random_pq(200 + seed)
        stepped = th_step(pq, flux, h)
        for p in (1.0, 2.0, 3.0):
            if moment(stepped, p) > 2.0 ** (p - 1.0) * (moment(pq, p) + (h * m) ** p):
                return f"moment bound broke at seed {seed}"
            r = 0.5
            lhs = tail_moment(stepped, p, r)
            rhs = (1.0 + h * m / (r - h * m)) ** p * tail_moment(pq, p, r - h * m)
            if lhs > rhs:
                return f"tail bound broke at seed {seed}"
    return None


def _check_heat_contraction():
    # particle count large enough that strict contraction dominates the
    # requantization quadrature overshoot
    for seed in range(3):
        a = _random_pq(300 + 2 * seed, n=1024)
        b = _random_pq(301 + 2 * seed, n=1024)
        ra = heat_resample(a, 0.5)
        rb = heat_resample(b, 0.5)
        for p in (1.0, 2.0):
            if wp_particles(ra, rb, p) > wp_particles(a, b, p) + 5e-10:
                return f"heat expansion at seed {seed}"
    return None


def _check_heat_shift():
    pq = _random_pq(400, n=64)
    shifted = ParticleQuantiles(pq.positions + 3.25)
    base = heat_resample(pq, 0.3)
    moved = heat_resample(shifted, 0.3)
    if np.max(np.abs(moved.positions - base.positions - 3.25)) > 1e-9:
        return "heat resampling is not shift-equivariant"
    return None


def _check_nodes():
    for n in (1, 2, 7, 100):
        w = midpoint_nodes(n)
        if not (w[0] > 0 and w[-1] < 1 and np.allclose(np.diff(w), 1.0 / n)):
            return f"bad node grid for n={n}"
    return None


CHECKS = [
    ("particle/cdf bijection", _check_roundtrip),
    ("generalized inverse monotone", _check_quantile_monotone),
    ("W1 equals L1 of CDFs", _check_w1_identity),
    ("metric axioms", _check_metric),
    ("one-step Wp contraction", _check_step_contraction),
    ("mixture-time Wp contraction", _check_sh_contraction),
    ("moment and tail bounds", _check_moment_bounds),
    ("heat-kernel Wp contraction", _check_heat_contraction),
    ("heat resample shift equivariance", _check_heat_shift),
    ("midpoint node grid", _check_nodes),
]


def run_selftest(out) -> int:
    """Run all checks, print one line each; return count of failures."""
    failures = 0
    for name, check in CHECKS:
        message = check()
        if message is None:
            out.write(f"pass  {name}\n")
        else:
            failures += 1
            out.write(f"FAIL  {name}: {message}\n")
    return failures
