"""Independent reference computations used as test oracles.

Everything here deliberately avoids the library's composition tables and
closed forms: laws are obtained by enumerating weighted letter paths, by
direct definition scans, or by generic linear algebra, so that agreement
with the library is meaningful.
"""

from __future__ import annotations

import math

import numpy as np

from persistwalk.model import PLUS, ModelSpec


def brute_force_eta(spec: ModelSpec, n: int, start_letter: int = PLUS) -> np.ndarray:
    """pmf of the +1 local time by enumerating all 2^n weighted paths."""
    out = np.zeros(n + 1)

    def rec(t: int, letter: int, mem: int, prob: float, local: int) -> None:
        if t == n:
            out[local] += prob
            return
        a = spec.alphas[letter].value_at(mem)
        rec(t + 1, letter, mem + 1, prob * (1.0 - a), local + (letter == PLUS))
        rec(t + 1, 1 - letter, 1, prob * a, local + (1 - letter == PLUS))

    rec(0, start_letter, 1, 1.0, 0)
    return out


def brute_force_joint(spec: ModelSpec, n: int) -> np.ndarray:
    """P(L_n(1) = k, N_n = j) over k = 0..n, j = 0..n, by enumeration."""
    out = np.zeros((n + 1, n + 1))

    def rec(t, letter, mem, prob, local, jumps):
        if t == n:
            out[local, jumps] += prob
            return
        a = spec.alphas[letter].value_at(mem)
        rec(t + 1, letter, mem + 1, prob * (1.0 - a), local + (letter == PLUS), jumps)
        rec(t + 1, 1 - letter, 1, prob * a, local + (1 - letter == PLUS), jumps + 1)

    rec(0, PLUS, 1, 1.0, 0, 0)
    return out


def memory_scan(letters) -> np.ndarray:
    """Memories by the direct definition: smallest lookback hitting another
    letter, run length + 1 when the whole prefix is constant (start memory 1)."""
    letters = np.asarray(letters)
    out = np.empty(len(letters), dtype=np.int64)
    for t in range(len(letters)):
        hit = [i for i in range(1, t + 1) if letters[t - i] != letters[t]]
        out[t] = hit[0] if hit else t + 1
    return out


def lazy_markov_pmf(alpha_minus: float, alpha_plus: float, n: int) -> np.ndarray:
    """pmf of the +1 local time for the order-one chain by transfer powering."""
    f = {(PLUS, 0): 1.0}
    for _ in range(n):
        g: dict[tuple[int, int], float] = {}
        for (letter, local), p in f.items():
            stay = 1.0 - (alpha_plus if letter == PLUS else alpha_minus)
            for nxt, q in ((letter, stay), (1 - letter, 1.0 - stay)):
                key = (nxt, local + (nxt == PLUS))
                g[key] = g.get(key, 0.0) + p * q
        f = g
    out = np.zeros(n + 1)
    for (_, local), p in f.items():
        out[local] += p
    return out


def dense_left_eigenvector(P: np.ndarray) -> np.ndarray:
    """Left Perron vector by a dense eigen-solve, normalised to sum 1."""
    w, v = np.linalg.eig(np.asarray(P, dtype=float).T)
    idx = int(np.argmax(w.real))
    vec = np.abs(v[:, idx].real)
    return vec / vec.sum()


def first_gap_pmf_enumeration(spec: ModelSpec, letter: int, m0: int, length: int) -> np.ndarray:
    """P(first letter change at step i), i = 1..length, by path enumeration.

    Walks the full binary tree of length-``length`` letter paths and
    accumulates the weight of those whose first change is at i.
    """
    out = np.zeros(length + 1)

    def rec(t, cur, mem, prob, first_change):
        if first_change is not None:
            out[first_change] += prob
            return
        if t == length:
            return
        a = spec.alphas[cur].value_at(mem)
        rec(t + 1, cur, mem + 1, prob * (1.0 - a), None)
        rec(t + 1, 1 - cur, 1, prob * a, t + 1)

    rec(0, letter, m0, 1.0, None)
    return out[1:]


def phi_series(spec: ModelSpec, lam: float, rho: float, tol: float = 1e-12) -> float:
    """E[lam^{S_tau}] as the geometric mixture of exact fixed-time laws.

    The tail of ``sum_n rho^n E[lam^{S_n}]`` is bounded by
    ``lam (rho/lam)^n / (1 - rho/lam)`` since |S_n| <= n + 1.
    """
    from persistwalk.exact import ExactLawEngine

    q = rho / lam
    n_max = 1
    while lam * q ** (n_max + 1) / (1.0 - q) > tol:
        n_max += 1
    engine = ExactLawEngine(spec, n_max)
    terms = [lam]  # n = 0: S_0 = 1
    for n in range(1, n_max + 1):
        e = engine.eta(n)
        mean_lam = math.fsum(e[k] * lam ** (1 + 2 * k - n) for k in range(n + 1))
        terms.append(rho**n * mean_lam)
    return (1.0 - rho) * math.fsum(terms)


def l_tau_series(spec: ModelSpec, rho: float, k: int, tol: float = 1e-12) -> float:
    """P(L_tau(1) = k) as the geometric mixture of exact fixed-time laws."""
    from persistwalk.exact import ExactLawEngine

    n_max = max(k + 1, int(math.ceil(math.log(tol) / math.log(rho))))
    engine = ExactLawEngine(spec, n_max)
    terms = [1.0 if k == 0 else 0.0]  # n = 0: L_0 = 0
    for n in range(1, n_max + 1):
        e = engine.eta(n)
        terms.append(rho**n * (e[k] if k <= n else 0.0))
    return (1.0 - rho) * math.fsum(terms)


def merged_chi_square(counts: np.ndarray, probs: np.ndarray, min_expected: float = 5.0):
    """Chi-square p-value with low-expectation cells merged into a tail cell."""
    from scipy import stats

    total = counts.sum()
    expected = probs * total
    keep = expected >= min_expected
    obs = list(counts[keep])
    exp = list(expected[keep])
    if not np.all(keep):
        obs.append(counts[~keep].sum())
        exp.append(expected[~keep].sum())
    obs, exp = np.asarray(obs, dtype=float), np.asarray(exp, dtype=float)
    exp *= obs.sum() / exp.sum()
    return stats.chisquare(obs, exp)
