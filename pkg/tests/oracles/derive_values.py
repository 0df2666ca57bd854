"""Independent high-precision oracle for the frozen reference values.

Nothing here imports sigma2lab.  Metrics are sums of cosine waves with
analytic derivatives; Ricci comes from the coordinate formula in g, dg and
ddg evaluated with mpmath at 40 digits.  The linearization is the t-derivative
of sigma_2(g + t h), the second variation a t-derivative of a 1D quadrature.

Run ``python tests/oracles/derive_values.py`` to regenerate
``tests/data/oracle_values.json``.
"""

from __future__ import annotations

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 40
TWO_PI = 2 * mp.pi
N = 3

# (i, j, amplitude, wavevector, phase); the same layout as the default mixed perturbation
MIXED = [
    (0, 0, 1.0, (0, 1, 0), 0.0),
    (1, 1, 0.6, (0, 0, 1), -mp.pi / 2),
    (2, 2, 0.5, (1, 1, 0), 0.0),
    (0, 1, 0.3, (0, 0, 1), -mp.pi / 2),
    (1, 2, 0.25, (1, 0, 0), 0.0),
]

# direction for the pointwise linearization check
DIRECTION = [
    (0, 0, 1.0, (0, 1, 0), 0.0),
    (1, 2, 0.5, (1, 0, 0), -mp.pi / 2),
    (2, 2, 1.0, (1, 0, 1), 0.0),
]


class WaveTensor:
    """Symmetric tensor c_ij + sum A cos(2 pi k.x + phase) with exact derivatives."""

    def __init__(self, base=None, waves=(), scale=1.0):
        self.base = base or [[mp.mpf(0)] * N for _ in range(N)]
        self.waves = [(i, j, mp.mpf(scale) * a, k, mp.mpf(p)) for i, j, a, k, p in waves]

    def plus(self, other: "WaveTensor", t) -> "WaveTensor":
        out = WaveTensor([[self.base[i][j] + t * other.base[i][j] for j in range(N)] for i in range(N)])
        out.waves = list(self.waves) + [(i, j, t * a, k, p) for i, j, a, k, p in other.waves]
        return out

    def jets(self, x):
        g = mp.matrix(N, N)
        dg = [[[mp.mpf(0)] * N for _ in range(N)] for _ in range(N)]  # dg[m][i][j]
        ddg = [[[[mp.mpf(0)] * N for _ in range(N)] for _ in range(N)] for _ in range(N)]
        for i in range(N):
            for j in range(N):
                g[i, j] = self.base[i][j]
        for i, j, a, k, p in self.waves:
            arg = TWO_PI * sum(kk * xx for kk, xx in zip(k, x)) + p
            c, s = mp.cos(arg), mp.sin(arg)
            pairs = {(i, j), (j, i)}
            for (r, q) in pairs:
                g[r, q] += a * c
                for m in range(N):
                    dg[m][r][q] += -a * s * TWO_PI * k[m]
                    for l in range(N):
                        ddg[m][l][r][q] += -a * c * TWO_PI**2 * k[m] * k[l]
        return g, dg, ddg


def euclidean() -> WaveTensor:
    return WaveTensor([[mp.mpf(1) if i == j else mp.mpf(0) for j in range(N)] for i in range(N)])


def ricci(g, dg, ddg):
    gi = g ** -1
    first = [[[(dg[i][j][k] + dg[j][i][k] - dg[k][i][j]) / 2 for j in range(N)] for i in range(N)] for k in range(N)]
    gam = [[[sum(gi[l, k] * first[k][i][j] for k in range(N)) for j in range(N)] for i in range(N)] for l in range(N)]
    dgi = [-(gi * mp.matrix([[dg[m][a][b] for b in range(N)] for a in range(N)]) * gi) for m in range(N)]

    def dgam(m, l, i, j):
        dfirst = [(ddg[m][i][j][k] + ddg[m][j][i][k] - ddg[m][k][i][j]) / 2 for k in range(N)]
        return sum(dgi[m][l, k] * first[k][i][j] + gi[l, k] * dfirst[k] for k in range(N))

    ric = mp.matrix(N, N)
    for j in range(N):
        for k in range(N):
            val = mp.mpf(0)
            for i in range(N):
                val += dgam(i, i, j, k) - dgam(k, i, i, j)
                for p in range(N):
                    val += gam[i][i][p] * gam[p][j][k] - gam[i][k][p] * gam[p][i][j]
            ric[j, k] = val
    return gi, ric


def invariants(T: WaveTensor, x):
    g, dg, ddg = T.jets(x)
    gi, ric = ricci(g, dg, ddg)
    R = sum(gi[i, j] * ric[i, j] for i in range(N) for j in range(N))
    up = gi * ric * gi
    norm2 = sum(up[i, j] * ric[i, j] for i in range(N) for j in range(N))
    s2 = -norm2 / 2 + N * R**2 / (8 * (N - 1))
    return R, norm2, s2


def perturbed(a) -> WaveTensor:
    return euclidean().plus(WaveTensor(waves=MIXED), a)


def pointwise_values(a=0.1, grid=16, points=((3, 5, 11), (0, 0, 0), (8, 13, 2), (15, 7, 9))):
    g0 = perturbed(a)
    h = WaveTensor(waves=DIRECTION)
    out = []
    for idx in points:
        x = [mp.mpf(i) / grid for i in idx]
        R, norm2, s2 = invariants(g0, x)
        lin = mp.diff(lambda t: invariants(g0.plus(h, t), x)[2], 0)
        out.append({
            "index": list(idx),
            "scalar": float(R),
            "ricci_norm2": float(norm2),
            "sigma2": float(s2),
            "lambda_h": float(lin),
        })
    return out


def second_variation(eps, a=0.1):
    """d^2/dt^2 of F_eps(delta + t h) at t = 0, h_11 = a cos(2 pi x_2), dv of the flat metric."""
    h = WaveTensor(waves=[(0, 0, a, (0, 1, 0), 0.0)])
    c = mp.mpf(1) / (8 * N * (N - 1)) + eps

    def F(t):
        g = euclidean().plus(h, t)

        def dens(y):
            R, _, s2 = invariants(g, [0, y, 0])
            return s2 - c * R**2

        return mp.quad(dens, [0, 0.5, 1])

    return float(mp.diff(F, 0, 2))


def main():
    data = {
        "perturbed_mixed_a0.1_grid16": pointwise_values(),
        "second_variation": [
            {"eps": float(e), "value": second_variation(e)}
            for e in (mp.mpf(1) / 24, mp.mpf(1) / 12, mp.mpf(1) / 6)
        ],
    }
    path = Path(__file__).resolve().parent.parent / "data" / "oracle_values.json"
    path.parent.mkdir(exist_ok=True)
    path.write_text(json.dumps(data, indent=2) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
