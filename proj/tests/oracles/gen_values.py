#!/usr/bin/env python3
"""Regenerates tests/oracle_values.hpp.

Every constant the unit tests compare against is computed here with plain
numpy (explicit inverses, direct determinants, scalar formulas) so the C++
library is checked against an independent implementation rather than against
itself. Run from the repository root:

    python3 tests/oracles/gen_values.py > tests/oracle_values.hpp
"""
import numpy as np


def g17(x):
    return np.format_float_scientific(x, precision=17) if False else repr(float(x))


lines = []


def emit(name, value):
    lines.append(f"inline constexpr double {name} = {float(value)!r};")


# --- test functions -------------------------------------------------------
def branin(x1, x2):
    xb1 = 15.0 * x1 - 5.0
    xb2 = 15.0 * x2
    return (
        (xb2 - 5.1 * xb1**2 / (4.0 * np.pi**2) + 5.0 * xb1 / np.pi - 6.0) ** 2
        + 10.0 * ((1.0 - 1.0 / (8.0 * np.pi)) * np.cos(xb1) + 1.0)
        + 5.0 * xb1
    )


def model2d(x1, x2, cubic):
    lead = 500.0 * x1**3 if cubic else 500.0 * x1**2
    denom = 100.0 * x1**2 + lead + 4.0 * x1 + 20.0
    return (1.0 - np.exp(-1.0 / (2.0 * x2))) * (2300.0 * x1**3 + 1900.0 * x1**2 + 2092.0 * x1 + 60.0) / denom


def toy1d(x):
    return 5.0 + x + np.cos(x) + 0.5 * np.sin(3.0 * x)


emit("kBranin00", branin(0.0, 0.0))
emit("kBranin11", branin(1.0, 1.0))
emit("kBraninThird0", branin(1.0 / 3.0, 0.0))
emit("kBraninHalfHalf", branin(0.5, 0.5))
emit("kModel2dHalfQuarter", model2d(0.5, 0.25, False))
emit("kModel2dCubicHalfQuarter", model2d(0.5, 0.25, True))
emit("kModel2dZeroHalf", model2d(0.0, 0.5, False))
emit("kToy1dZero", toy1d(0.0))
emit("kToy1dPi", toy1d(np.pi))
emit("kToy1dSeven", toy1d(7.0))

# --- Gaussian-process regression via explicit inverses --------------------
X = np.array(
    [
        [0.10, 0.20],
        [0.35, 0.90],
        [0.50, 0.45],
        [0.65, 0.10],
        [0.80, 0.75],
        [0.95, 0.30],
        [0.25, 0.60],
    ]
)
y = np.sin(3.0 * X[:, 0]) + X[:, 1] ** 2
phi = np.array([0.5, 1.25])
nugget = 0.01
n, p = X.shape
q = p + 1


def corr(a, b):
    return np.exp(-0.5 * np.sum((a - b) ** 2 / phi))


K = np.array([[corr(X[i], X[j]) for j in range(n)] for i in range(n)]) + nugget * np.eye(n)
H = np.hstack([np.ones((n, 1)), X])
Ki = np.linalg.inv(K)
G = H.T @ Ki @ H
Gi = np.linalg.inv(G)
beta = Gi @ H.T @ Ki @ y
resid_proj = Ki - Ki @ H @ Gi @ H.T @ Ki
sigma2 = float(y @ resid_proj @ y) / (n - q - 2)
log_det_k = float(np.log(np.linalg.det(K)))
log_det_g = float(np.log(np.linalg.det(G)))
neg_log_post = 0.5 * (n - q) * np.log(sigma2) + 0.5 * log_det_k + 0.5 * log_det_g

for i, b in enumerate(beta):
    emit(f"kGpBeta{i}", b)
emit("kGpSigma2", sigma2)
emit("kGpLogDetK", log_det_k)
emit("kGpLogDetHkh", log_det_g)
emit("kGpNegLogPost", neg_log_post)

xs = np.array([0.30, 0.70])
ws = np.array([0.55, 0.40])


def basis(x):
    return np.concatenate([[1.0], x])


def predict_mean(x):
    t = np.array([corr(x, X[i]) for i in range(n)])
    return float(basis(x) @ beta + t @ Ki @ (y - H @ beta))


def predict_cov(a, b, same_point):
    ta = np.array([corr(a, X[i]) for i in range(n)])
    tb = np.array([corr(b, X[i]) for i in range(n)])
    ua = basis(a) - H.T @ Ki @ ta
    ub = basis(b) - H.T @ Ki @ tb
    c = corr(a, b) - ta @ Ki @ tb + ua @ Gi @ ub
    if same_point:
        c += nugget
    return sigma2 * float(c)


emit("kGpMeanXs", predict_mean(xs))
emit("kGpMeanWs", predict_mean(ws))
emit("kGpCovXsWs", predict_cov(xs, ws, False))
emit("kGpVarXs", predict_cov(xs, xs, True))
emit("kGpVarXsNoNugget", predict_cov(xs, xs, False))
emit("kGpMeanTrain0", predict_mean(X[0]))

# --- temperature solver ----------------------------------------------------
rng = np.random.default_rng(314159)
h_pop = rng.uniform(2.0, 40.0, size=12)
lines.append(
    "inline constexpr double kEssPopulation[12] = {"
    + ", ".join(repr(float(v)) for v in h_pop)
    + "};"
)


def ess_tau(h, tau_old, gamma):
    n = len(h)

    def sum_sq(delta):
        w = np.exp(-(h - h.min()) * delta)
        w /= w.sum()
        return float((w**2).sum())

    target = 1.0 / (gamma * n)
    lo, hi = 0.0, 1.0
    inv_old = 0.0 if np.isinf(tau_old) else 1.0 / tau_old
    while sum_sq(hi) < target:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if sum_sq(mid) < target:
            lo = mid
        else:
            hi = mid
    delta = 0.5 * (lo + hi)
    return 1.0 / (inv_old + delta)


tau1 = ess_tau(h_pop, np.inf, 0.5)
tau2 = ess_tau(h_pop, tau1, 0.5)
emit("kEssTau1", tau1)
emit("kEssTau2", tau2)

# --- importance-mixture proposal density -----------------------------------
markers = np.array([[0.0, 0.0], [1.0, 0.5], [-0.4, 1.2]])
weights = np.array([0.5, 0.3, 0.2])
marker_h = np.array([0.9, 0.4, 1.7])
tau = 0.8
Sigma = np.array([[0.6, 0.2], [0.2, 0.9]])
spread = 0.25
C = spread * Sigma
Ci = np.linalg.inv(C)
log_norm = -0.5 * (2 * np.log(2.0 * np.pi) + np.log(np.linalg.det(C)))


def phat_log(z, h_z):
    total = 0.0
    for wj, zj, hj in zip(weights, markers, marker_h):
        d = z - zj
        dens = np.exp(log_norm - 0.5 * d @ Ci @ d)
        total += wj * dens * min(1.0, np.exp(-(h_z - hj) / tau))
    return float(np.log(total))


emit("kPhatLogA", phat_log(np.array([0.25, 0.25]), 0.55))
emit("kPhatLogB", phat_log(np.array([2.0, -1.0]), 3.0))

# --- weighted covariance ----------------------------------------------------
pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0], [1.0, 2.0]])
w = np.array([0.1, 0.2, 0.3, 0.4])
mu = (w[:, None] * pts).sum(axis=0)
cov = sum(wi * np.outer(pi - mu, pi - mu) for wi, pi in zip(w, pts))
for i in range(2):
    for j in range(2):
        emit(f"kWcov{i}{j}", cov[i, j])

# --- mixture moments ---------------------------------------------------------
mw = np.array([0.25, 0.75])
mmeans = np.array([1.5, -0.5])
mcovs = np.array([0.8, 0.3])
mix_mean = float(mw @ mmeans)
mix_var = float(sum(wi * ((mi - mix_mean) ** 2 + ci) for wi, mi, ci in zip(mw, mmeans, mcovs)))
emit("kMixMean", mix_mean)
emit("kMixVar", mix_var)

print("// Frozen reference values for the unit tests.")
print("// Generated by tests/oracles/gen_values.py -- edit that script, not this file.")
print("#pragma once")
print()
print("namespace oracle {")
print()
for l in lines:
    print(l)
print()
print("}  // namespace oracle")
