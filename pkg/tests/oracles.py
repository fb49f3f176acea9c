"""Independent numerical oracles for the closed-form measures (no Gamma functions)."""
import numpy as np
from scipy import integrate


def quadrature_octant(omegas):
    """Iterated adaptive quadrature of the octant volume.

    The last coordinate is integrated in closed form, the rest with nquad.
    """
    omegas = list(omegas)
    d = len(omegas)

    def height(*xs):
        rem = 1.0 - sum(x**w for x, w in zip(xs, omegas))
        return max(rem, 0.0) ** (1.0 / omegas[-1])

    def bounds(j):
        # nquad hands the range for x_j the outer variables x_{j+1}, ..., x_{d-2}
        def rng(*outer):
            rem = 1.0 - sum(x**w for x, w in zip(outer, omegas[j + 1: d - 1]))
            return (0.0, max(rem, 0.0) ** (1.0 / omegas[j]))
        return rng

    opts = {"epsabs": 1e-11, "epsrel": 1e-11, "limit": 200}
    return integrate.nquad(height, [bounds(j) for j in range(d - 1)], opts=opts)[0]


def monte_carlo_octant(omegas, samples, seed, chunk=1_000_000):
    """Hit-or-miss estimate on the unit cube; returns (mean, standard error)."""
    rng = np.random.default_rng(seed)
    w = np.asarray(omegas, dtype=float)
    hits = 0
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        x = rng.random((n, len(w)))
        hits += int(np.count_nonzero(np.sum(x**w, axis=1) <= 1.0))
        done += n
    p = hits / samples
    return p, (p * (1 - p) / samples) ** 0.5
