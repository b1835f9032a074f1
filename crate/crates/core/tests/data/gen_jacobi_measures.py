"""Regenerates jacobi_measures.txt: random Jacobi matrices and their spectral
measures computed at 60 digits, rounded once to f64.

Each case is four lines: alpha, beta, nodes, weights (space separated).
"""

import random

import mpmath as mp

mp.mp.dps = 60
rng = random.Random(20240611)
lines = []
for _ in range(100):
    n = rng.randint(2, 30)
    # |alpha| + 2 max beta < 0.9 keeps the spectrum inside (-1, 1).
    alpha = [rng.uniform(-0.4, 0.4) for _ in range(n)]
    beta = [rng.uniform(0.02, 0.25) for _ in range(n - 1)]
    mass = rng.uniform(0.5, 3.0)
    J = mp.matrix(n, n)
    for i, a in enumerate(alpha):
        J[i, i] = mp.mpf(a)
    for i, b in enumerate(beta):
        J[i, i + 1] = J[i + 1, i] = mp.mpf(b)
    E, Q = mp.eigsy(J)
    nodes = [float(E[k]) for k in range(n)]
    weights = [float(mp.mpf(mass) * Q[0, k] ** 2) for k in range(n)]
    for row in (alpha, beta, nodes, weights):
        lines.append(" ".join(repr(x) for x in row))
with open("jacobi_measures.txt", "w") as f:
    f.write("\n".join(lines) + "\n")
