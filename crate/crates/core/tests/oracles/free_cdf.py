# Distribution function at t = 1 of the free symmetric 0.5-stable process
# with jumps shorter than h = 1e-3 removed, by Gil-Pelaez inversion of
# phi(k) = exp(-|k|^b + 2c int_0^h (1 - cos ky) y^(-1-b) dy).
# Tabulated at x = tan(theta) on a uniform theta grid. Run: python3 free_cdf.py
import numpy as np
from math import gamma, factorial, pi
from scipy.integrate import quad

b, h = 0.5, 1e-3
c = b * 2 ** (b - 1) * gamma((1 + b) / 2) / (pi ** 0.5 * gamma(1 - b / 2))

def g_small(u):
    # int_0^1 (1 - cos us) s^(-1-b) ds as a series
    return -sum((-1) ** m * u ** (2 * m) / (factorial(2 * m) * (2 * m - b)) for m in range(1, 40))

def phi(k, truncated=True):
    v = -abs(k) ** b
    if truncated:
        v += 2 * c * h ** -b * g_small(k * h)
    return np.exp(v)

K = 4000.0  # phi(K) < 1e-27

def cdf(x, truncated=True):
    if x == 0:
        return 0.5
    f = lambda k: phi(k, truncated) / k
    head = quad(lambda k: np.sin(k * x) * phi(k, truncated) / k, 0, 1, limit=400, epsabs=1e-14)[0]
    tail = quad(f, 1, K, weight="sin", wvar=x, limit=4000, epsabs=1e-14)[0]
    return 0.5 + (head + tail) / pi

if __name__ == "__main__":
    from scipy.stats import levy_stable
    for x in [0.3, 2.0, 30.0]:
        print("# check untruncated", x, cdf(x, False), levy_stable.cdf(x, 0.5, 0.0))
    n = 2001
    thetas = np.linspace(-pi / 2, pi / 2, n)[1:-1]
    with open("free_cdf.txt", "w") as out:
        out.write("# theta F(tan theta), beta 0.5, h 1e-3, t 1\n")
        m = len(thetas)
        right = [cdf(np.tan(t)) for t in thetas[m // 2:]]
        vals = [1.0 - v for v in right[1:][::-1]] + right
        for t, v in zip(thetas, vals):
            out.write(f"{t:.17e} {v:.17e}\n")
