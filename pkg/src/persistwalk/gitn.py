"""Scaling pipeline to the generalized integrated telegraph noise.

On the discrete side, switch probabilities of order ``f_i(n eps) * eps``
make runs last order ``1/eps`` steps; rescaling time and space by ``eps``
produces a 1-Lipschitz zig-zag whose slope flips at epochs with hazard
``f_2`` (while climbing) and ``f_1`` (while descending).  This module
builds the eps-scaled models, samples the limit process exactly by
cumulative-hazard inversion, quantifies the convergence, and evaluates the
double Laplace transform of the limit three independent ways (closed form,
adaptive quadrature, Monte Carlo).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, stats

from .alphas import ScaledHazardAlpha
from .chain import Trajectory
from .errors import ConvergenceError, DomainError
from .exact import gen_fun_Phat
from .hazards import ConstantHazard, Hazard
from .model import MINUS, PLUS, ModelSpec, two_letter_spec

__all__ = [
    "eps_model",
    "RescaledPath",
    "rescale",
    "GitnPath",
    "sample_gitn",
    "gitn_evaluate",
    "convergence_check",
    "ConvergenceReport",
    "laplace_R",
    "double_laplace",
    "mc_laplace",
    "scaled_phi_limit_check",
    "ScaledPhiReport",
]


def eps_model(
    f1: Hazard,
    f2: Hazard,
    eps: float,
    correction: tuple[Callable, Callable] | None = None,
    alpha_inf: float = 0.5,
    horizon: float = 10.0,
) -> ModelSpec:
    """Two-letter model with switch probabilities ``f_i(n eps) eps``.

    Letter -1 carries ``f1`` and letter +1 carries ``f2``.  All switch
    probabilities up to the declared time horizon are validated to lie in
    (0, 1); beyond it they are still checked lazily at each evaluation.
    """
    if not eps > 0.0:
        raise DomainError(f"eps must be positive, got {eps}")
    c1, c2 = correction if correction is not None else (None, None)
    seq1 = ScaledHazardAlpha(rate=f1.rate, step=eps, correction=c1, alpha_inf=alpha_inf)
    seq2 = ScaledHazardAlpha(rate=f2.rate, step=eps, correction=c2, alpha_inf=alpha_inf)
    steps = max(1, int(math.ceil(horizon / eps)))
    for seq in (seq1, seq2):
        seq.values_at(np.arange(1, steps + 1))  # raises if any value leaves (0, 1)
    return two_letter_spec(seq1, seq2)


@dataclass(frozen=True)
class RescaledPath:
    """A trajectory with time and space shrunk by eps.

    The walk is linearly interpolated between grid points; letters and
    memories are piecewise constant and right-continuous.
    """

    traj: Trajectory
    eps: float

    @property
    def horizon(self) -> float:
        return self.traj.horizon * self.eps

    def _grid_index(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if np.any((t < 0) | (t > self.horizon)):
            raise DomainError(f"time outside [0, {self.horizon}]")
        return np.minimum(np.floor(t / self.eps).astype(np.intp), self.traj.horizon)

    def walk(self, t):
        """S^eps(t): linear interpolation of eps * S_n on the eps-grid."""
        t = np.asarray(t, dtype=float)
        if np.any((t < 0) | (t > self.horizon)):
            raise DomainError(f"time outside [0, {self.horizon}]")
        grid = self.eps * np.arange(len(self.traj))
        return np.interp(t, grid, self.eps * self.traj.sums)

    def letter(self, t):
        """X^eps(t) as +-1 values, piecewise constant cadlag."""
        idx = self._grid_index(t)
        return 2 * self.traj.letters[idx] - 1

    def memory(self, t):
        """M^eps(t) = eps * M_{floor(t/eps)}."""
        idx = self._grid_index(t)
        return self.eps * self.traj.memories[idx]


def rescale(traj: Trajectory, eps: float) -> RescaledPath:
    """Wrap a two-letter trajectory in its eps-rescaled function records."""
    if not traj.spec.is_walk:
        raise DomainError("rescaling requires a two-letter model")
    if not eps > 0.0:
        raise DomainError(f"eps must be positive, got {eps}")
    return RescaledPath(traj=traj, eps=eps)


@dataclass(frozen=True)
class GitnPath:
    """Zig-zag path: slope +1 from time 0, flipping at each epoch.

    ``epochs`` are the jump times within the horizon, strictly increasing;
    the next jump falls beyond the horizon.
    """

    epochs: np.ndarray
    horizon: float

    def _check(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if np.any((t < 0) | (t > self.horizon)):
            raise DomainError(f"time outside [0, {self.horizon}]")
        return t

    def counting(self, t):
        """Number of slope changes up to time t."""
        t = self._check(t)
        return np.searchsorted(self.epochs, t, side="right")

    def age(self, t):
        """Time since the last slope change (spent life)."""
        t = self._check(t)
        n = np.searchsorted(self.epochs, t, side="right")
        last = np.where(n > 0, self.epochs[np.maximum(n - 1, 0)], 0.0)
        return t - last

    def position(self, t):
        """Integral of the alternating slope, exactly piecewise linear."""
        t = self._check(t)
        aug = np.concatenate(([0.0], self.epochs))
        signs = (-1.0) ** np.arange(len(aug))
        pos = np.concatenate(([0.0], np.cumsum(signs[:-1] * np.diff(aug))))
        n = np.searchsorted(self.epochs, t, side="right")
        return pos[n] + signs[n] * (t - aug[n])

    def slope(self, t):
        return (-1.0) ** self.counting(t)


def sample_gitn(f1: Hazard, f2: Hazard, horizon: float, rng: np.random.Generator) -> GitnPath:
    """Draw a path by exact cumulative-hazard inversion of each duration.

    Odd gaps (climbing) have hazard ``f2``, even gaps ``f1``.
    """
    if not horizon > 0.0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    epochs = []
    t = 0.0
    k = 1
    while True:
        haz = f2 if k % 2 == 1 else f1
        t += float(haz.sample(rng))
        if t > horizon:
            break
        epochs.append(t)
        k += 1
    return GitnPath(epochs=np.array(epochs), horizon=horizon)


def gitn_evaluate(path: GitnPath, t):
    """(counting, age, position) at time t <= horizon, no quadrature."""
    return path.counting(t), path.age(t), path.position(t)


def _scaled_gap_sampler(seq: ScaledHazardAlpha, replicas: int, rng: np.random.Generator):
    """Draw inter-jump step counts of the eps-model by inverse CDF."""
    surv = [1.0]
    log_s = 0.0
    n = 0
    block = 8192
    while surv[-1] > 1e-13:
        a = seq.values_at(n + 1 + np.arange(block))
        logs = np.cumsum(np.log1p(-a))
        surv.extend(np.exp(log_s + logs).tolist())
        log_s += float(logs[-1])
        n += block
        if n > 10**8:
            raise ConvergenceError("eps-model gap survival did not reach 1e-13")
    cdf = 1.0 - np.asarray(surv)  # cdf[j] = P(gap <= j)
    u = rng.random(replicas)
    return np.searchsorted(cdf, u, side="right").astype(np.int64)


@dataclass(frozen=True)
class ConvergenceRecord:
    eps: float
    sup_gap: float
    ks_first: float
    ks_first_pvalue: float
    ks_second: float
    ks_second_pvalue: float
    gap_correlation: float
    correlation_bound: float


@dataclass(frozen=True)
class ConvergenceReport:
    records: tuple[ConvergenceRecord, ...]
    replicas: int
    t_max: float

    def sup_gap_ratios(self) -> list[float]:
        gaps = [r.sup_gap for r in self.records]
        return [gaps[i] / gaps[i + 1] for i in range(len(gaps) - 1)]

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "replicas": self.replicas,
            "t_max": self.t_max,
            "records": [vars(r) for r in self.records],
            "sup_gap_ratios": self.sup_gap_ratios(),
        }


def convergence_check(
    f1: Hazard,
    f2: Hazard,
    eps_list,
    replicas: int,
    rng: np.random.Generator,
    t_max: float = 3.0,
) -> ConvergenceReport:
    """Quantify convergence of the scaled first jumps to the limit epochs.

    Per eps: (a) the exact survival of the scaled first jump (a finite
    product of stay probabilities) against ``exp(-F_2)`` in sup norm on the
    eps-grid of [0, t_max] (evaluating both sides at the jump-resolution
    times keeps the comparison free of sub-grid aliasing), and (b)
    two-sample KS tests of the scaled first two gaps against exact draws of
    the limit durations, plus the empirical correlation of consecutive
    scaled gaps (independence check).
    """
    records = []
    for eps in eps_list:
        seq1 = ScaledHazardAlpha(rate=f1.rate, step=eps)
        seq2 = ScaledHazardAlpha(rate=f2.rate, step=eps)
        steps = int(math.floor(t_max / eps))
        t_grid = eps * np.arange(steps + 1)
        a2 = seq2.values_at(np.arange(1, steps + 1))
        exact_surv = np.exp(np.concatenate(([0.0], np.cumsum(np.log1p(-a2)))))
        limit_surv = np.exp(-np.asarray(f2.cumulative(t_grid), dtype=float))
        sup_gap = float(np.max(np.abs(exact_surv - limit_surv)))

        gap1 = eps * _scaled_gap_sampler(seq2, replicas, rng)
        gap2 = eps * _scaled_gap_sampler(seq1, replicas, rng)
        e1 = f2.sample(rng, replicas)
        e2 = f1.sample(rng, replicas)
        ks1 = stats.ks_2samp(gap1, e1)
        ks2 = stats.ks_2samp(gap2, e2)
        corr = float(np.corrcoef(gap1, gap2)[0, 1])
        records.append(
            ConvergenceRecord(
                eps=float(eps),
                sup_gap=sup_gap,
                ks_first=float(ks1.statistic),
                ks_first_pvalue=float(ks1.pvalue),
                ks_second=float(ks2.statistic),
                ks_second_pvalue=float(ks2.pvalue),
                gap_correlation=corr,
                correlation_bound=4.0 / math.sqrt(replicas),
            )
        )
    return ConvergenceReport(records=tuple(records), replicas=replicas, t_max=t_max)


def laplace_R(hazard: Hazard, z: float, method: str = "auto", rel_tol: float = 1e-10) -> float:
    """``R(z, f) = int_0^inf exp(-z t - F(t)) dt``.

    Closed form for a constant hazard; adaptive quadrature with the given
    relative tolerance otherwise.  Requires z > 0 (bounded hazards make the
    integral diverge at z <= 0).
    """
    if method not in ("auto", "closed", "quadrature"):
        raise DomainError(f"unknown method {method!r}")
    if not z > 0.0:
        raise DomainError(f"need z > 0 for a convergent transform, got z={z}")
    if method in ("auto", "closed") and isinstance(hazard, ConstantHazard):
        return 1.0 / (z + hazard.value)
    if method == "closed":
        raise DomainError(f"no closed form for {type(hazard).__name__}")

    def integrand(t: float) -> float:
        return math.exp(-z * t - float(hazard.cumulative(t)))

    val, err = integrate.quad(integrand, 0.0, np.inf, epsabs=0.0, epsrel=rel_tol, limit=400)
    if not math.isfinite(val) or (val > 0 and err / val > 100 * rel_tol):
        raise ConvergenceError(f"quadrature for R({z}, f) unreliable: value={val}, err={err}")
    return val


def double_laplace(
    f1: Hazard, f2: Hazard, r: float, gamma: float, method: str = "auto"
) -> float:
    """Double Laplace transform of the zig-zag limit at (r, gamma).

    This is also the Laplace transform of the path value at an independent
    exponential(r) time.  Requires r > gamma > 0 so that both transforms
    in the rational expression converge.
    """
    if not (r > 0.0 and gamma > 0.0):
        raise DomainError(f"need r > 0 and gamma > 0, got r={r}, gamma={gamma}")
    if not r > gamma:
        raise DomainError(
            f"need r > gamma (the descending-side transform diverges otherwise), "
            f"got r={r}, gamma={gamma}"
        )
    r1 = laplace_R(f1, r - gamma, method=method)
    r2 = laplace_R(f2, r + gamma, method=method)
    num = -(r + gamma) * r1 * r2 + r1 + r2
    den = (r - gamma) * r1 + (r + gamma) * r2 - (r * r - gamma * gamma) * r1 * r2
    return num / den


def mc_laplace(
    f1: Hazard,
    f2: Hazard,
    r: float,
    gamma: float,
    n_paths: int,
    rng: np.random.Generator,
    n_batches: int = 100,
) -> tuple[float, float]:
    """Monte Carlo estimate of E[exp(-gamma S0(xi))], xi ~ exponential(r).

    Paths are advanced in vectorised rounds (all live paths share the same
    slope parity).  Returns (estimate, batch-mean standard error).
    """
    if n_paths % n_batches != 0:
        raise DomainError(f"n_paths must be a multiple of n_batches={n_batches}")
    xi = rng.exponential(scale=1.0 / r, size=n_paths)
    s_final = np.empty(n_paths)
    t = np.zeros(n_paths)
    s = np.zeros(n_paths)
    alive = np.arange(n_paths)
    sign = 1.0
    rounds = 0
    while alive.size:
        haz = f2 if sign > 0 else f1
        gaps = np.asarray(haz.sample(rng, alive.size), dtype=float)
        end = t[alive] + gaps
        done = end >= xi[alive]
        idx_done = alive[done]
        s_final[idx_done] = s[idx_done] + sign * (xi[idx_done] - t[idx_done])
        idx_live = alive[~done]
        s[idx_live] += sign * gaps[~done]
        t[idx_live] = end[~done]
        alive = idx_live
        sign = -sign
        rounds += 1
        if rounds > 10**5:
            raise ConvergenceError("path advancement did not terminate (hazard too light?)")
    values = np.exp(-gamma * s_final)
    batches = values.reshape(n_batches, -1).mean(axis=1)
    estimate = float(batches.mean())
    stderr = float(batches.std(ddof=1) / math.sqrt(n_batches))
    return estimate, stderr


@dataclass(frozen=True)
class ScaledPhiEntry:
    letter: int
    z: float
    scaled_value: float
    limit_value: float

    @property
    def gap(self) -> float:
        return abs(self.scaled_value - self.limit_value)


@dataclass(frozen=True)
class ScaledPhiReport:
    eps: float
    entries: tuple[ScaledPhiEntry, ...]

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "eps": self.eps,
            "entries": [
                {**vars(e), "gap": e.gap} for e in self.entries
            ],
        }


def scaled_phi_limit_check(
    f1: Hazard, f2: Hazard, eps: float, r: float, gamma: float
) -> ScaledPhiReport:
    """Compare ``eps * Phat_i(exp(-eps z))`` against its limit ``R(z, f_i)``.

    Uses the survival generating functions of the eps-model at the
    arguments entering the double Laplace transform: z = r - gamma on the
    descending side (f1) and z = r + gamma on the climbing side (f2).
    """
    if not (r > gamma > 0.0):
        raise DomainError(f"need r > gamma > 0, got r={r}, gamma={gamma}")
    spec = eps_model(f1, f2, eps, horizon=eps)  # lazy validation beyond one step
    entries = []
    for letter, haz, z in ((MINUS, f1, r - gamma), (PLUS, f2, r + gamma)):
        scaled = eps * gen_fun_Phat(spec, letter, math.exp(-eps * z), tol=1e-12)
        limit = laplace_R(haz, z)
        entries.append(ScaledPhiEntry(letter=letter, z=z, scaled_value=scaled, limit_value=limit))
    return ScaledPhiReport(eps=eps, entries=tuple(entries))
