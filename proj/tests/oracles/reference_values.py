"""Independent reference values frozen into the C++ tests.

Run with python3; prints every value at 17 significant digits.
"""

import math

import mpmath as mp
import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp
from scipy.stats import norm

mp.mp.dps = 40


def show(name, value):
    print(f"{name} = {float(value):.17g}")


# ---- skewed generalized t: raw density, standardized numerically ----

def sgt_raw(y, p, q, lam):
    side = 1 + lam if y >= 0 else 1 - lam
    c = p / (2 * q ** (1 / p) * mp.beta(1 / p, q))
    return c * (1 + abs(y) ** p / (q * side ** p)) ** (-(1 / p + q))


def sgt_standardized(shape, df, lam):
    p, q = mp.mpf(shape), mp.mpf(df) / shape
    f = lambda y: sgt_raw(y, p, q, lam)
    mass = mp.quad(f, [-mp.inf, 0, mp.inf])
    mean = mp.quad(lambda y: y * f(y), [-mp.inf, 0, mp.inf])
    var = mp.quad(lambda y: (y - mean) ** 2 * f(y), [-mp.inf, 0, mp.inf])
    sd = mp.sqrt(var)
    skew = mp.quad(lambda y: (y - mean) ** 3 * f(y), [-mp.inf, 0, mp.inf]) / sd ** 3
    density = lambda z: sd * f(mean + sd * z)
    kink = -mean / sd
    cdf = lambda z: mp.quad(density, [-mp.inf, z] if z <= kink else [-mp.inf, kink, z])
    return mass, skew, density, cdf


mass, skew, dens, cdf = sgt_standardized(1.25, 5, -0.2)
show("sgt_mass", mass)
show("sgt_skew", skew)
for z in (-2.0, -0.5, 0.0, 1.0):
    show(f"sgt_density({z})", dens(z))
for z in (-1.0, 0.0, 1.5):
    show(f"sgt_cdf({z})", cdf(z))

# ---- calibration ----
tau = 20 / 252
show("location", math.log(4700) + (0.01 + 0.06) * tau)
show("scale", (0.18 - 0.02) * math.sqrt(tau))

# ---- Black-Scholes ----
def bs(kind, s, k, r, t, v):
    d1 = (math.log(s / k) + (r + v * v / 2) * t) / (v * math.sqrt(t))
    d2 = d1 - v * math.sqrt(t)
    if kind == "C":
        return s * norm.cdf(d1) - k * math.exp(-r * t) * norm.cdf(d2), norm.cdf(d1)
    return k * math.exp(-r * t) * norm.cdf(-d2) - s * norm.cdf(-d1), norm.cdf(d1) - 1

for kind in "CP":
    price, delta = bs(kind, 4700, 4600, 0.01, 30 / 365, 0.18)
    show(f"bs_{kind}_price", price)
    show(f"bs_{kind}_delta", delta)
d1 = (math.log(4700 / 4600) + (0.01 + 0.18 ** 2 / 2) * 30 / 365) / (0.18 * math.sqrt(30 / 365))
show("bs_vega", 4700 * norm.pdf(d1) * math.sqrt(30 / 365))

# ---- PIT band ----
half = 1.96 * math.sqrt(0.1 * 0.9 / 215)
show("pit_low", 0.1 - half)
show("pit_high", 0.1 + half)

# ---- layover premiums: shortfall LP for second order, big-M MILP for first order ----

def payoff(kind, strike, x):
    return max(0.0, x - strike) if kind == "C" else max(0.0, strike - x)


def premiums(x, mu, quotes, zero_payoff):
    x, mu = np.array(x, float), np.array(mu, float)
    n, m = len(x), len(quotes)
    theta = np.array([[payoff(q[0], q[1], xj) for xj in x] for q in quotes])
    cost = np.concatenate([[q[3] for q in quotes], [-q[2] for q in quotes]])
    bounds_hi = np.array([q[5] for q in quotes] + [q[4] for q in quotes], float)

    def zero_rows(nv):
        rows = []
        for coef in (lambda q: q[1] if q[0] == "C" else 0, lambda q: 1 if q[0] == "C" else 0,
                     lambda q: q[1] if q[0] == "P" else 0, lambda q: 1 if q[0] == "P" else 0):
            r = np.zeros(nv)
            for i, q in enumerate(quotes):
                r[i], r[m + i] = coef(q), -coef(q)
            rows.append(r)
        return rows

    # second order: s_jk >= x_k - y_j, sum_j mu_j s_jk <= E(x_k - X)+
    nv = 2 * m + n * n
    c = np.concatenate([cost, np.zeros(n * n)])
    a_ub, b_ub = [], []
    for j in range(n):
        for k in range(n):
            r = np.zeros(nv)
            r[:m], r[m:2 * m] = -theta[:, j], theta[:, j]
            r[2 * m + j * n + k] = -1
            a_ub.append(r)
            b_ub.append(x[j] - x[k])
    for k in range(n):
        r = np.zeros(nv)
        for j in range(n):
            r[2 * m + j * n + k] = mu[j]
        a_ub.append(r)
        b_ub.append(float(np.dot(mu, np.maximum(0, x[k] - x))))
    a_eq = zero_rows(nv) if zero_payoff else None
    b_eq = np.zeros(4) if zero_payoff else None
    bnds = [(0, h) for h in bounds_hi] + [(0, None)] * (n * n)
    lp = linprog(c, A_ub=np.array(a_ub), b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bnds,
                 method="highs", options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})

    # first order: delta_jk = 1 allows y_j < x_k; mass of such j bounded by F_X(x_k-)
    big = float(x[-1] - x[0] + np.abs(theta).sum(axis=0).max() * bounds_hi.max() + 1)
    nv = 2 * m + n * n
    rows, lo, hi = [], [], []
    for j in range(n):
        for k in range(n):
            r = np.zeros(nv)
            r[:m], r[m:2 * m] = theta[:, j], -theta[:, j]
            r[2 * m + j * n + k] = big
            rows.append(r)
            lo.append(x[k] - x[j])
            hi.append(np.inf)
    for k in range(n):
        r = np.zeros(nv)
        for j in range(n):
            r[2 * m + j * n + k] = mu[j]
        rows.append(r)
        lo.append(-np.inf)
        hi.append(float(mu[:k].sum()))
    if zero_payoff:
        for r in zero_rows(nv):
            rows.append(r)
            lo.append(0)
            hi.append(0)
    integrality = np.concatenate([np.zeros(2 * m), np.ones(n * n)])
    ub = np.concatenate([bounds_hi, np.ones(n * n)])
    res = milp(np.concatenate([cost, np.zeros(n * n)]), constraints=LinearConstraint(np.array(rows), lo, hi),
               integrality=integrality, bounds=Bounds(np.zeros(nv), ub),
               options={"mip_rel_gap": 0, "presolve": True})
    return -lp.fun, -res.fun


# quote tuples: kind, strike, bid, ask, bid_size, ask_size
generic = ([90, 95, 100, 105, 110], [0.1, 0.2, 0.4, 0.2, 0.1],
           [("P", 95, 0.4, 0.55, 4, 4), ("C", 100, 2.2, 2.4, 1, 1), ("C", 105, 0.9, 1.0, 4, 1)], False)
twin = ([95, 100, 105], [0.25, 0.5, 0.25],
        [("C", 100, 3.0, 3.2, 1, 1), ("C", 100, 2.0, 2.1, 1, 1)], False)
wide_x = [80, 85, 90, 95, 100, 105, 110, 115, 120]
wide_mu = [0.04, 0.1, 0.1, 0.16, 0.2, 0.16, 0.12, 0.08, 0.04]
augmented = (wide_x, wide_mu,
             [("P", 80, 0.1, 0.15, 3, 3), ("P", 85, 0.6, 0.65, 3, 3), ("P", 90, 1.0, 1.05, 3, 3),
              ("P", 95, 2.0, 2.1, 3, 3), ("C", 105, 1.85, 1.95, 2, 3), ("C", 110, 1.0, 1.1, 3, 2)], True)
for name, inst in (("generic", generic), ("twin", twin), ("augmented", augmented)):
    lp, mip = premiums(*inst)
    show(f"{name}_lp", lp)
    show(f"{name}_milp", mip)
