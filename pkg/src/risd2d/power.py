"""Per-coalition transmit power allocation by DC programming.

The coalition's sum of log-rates is written as ``sum_i g_i(P) - phi_i(P)``
with ``g_i = lg(interference_i + noise)`` and
``phi_i = lg(signal_i + interference_i + noise)``; both are concave in P.
Each outer step replaces ``g`` by its tangent at the current point (an upper
bound on the objective), then takes a projected gradient step on the
Lagrangian of the linearized problem and updates the multipliers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from .rate import SINR_SLACK_LG, LinkGains, Partition, State, System

LN10 = np.log(10.0)
ARMIJO_C = 1e-4
MAX_BACKTRACK = 40


class CoalitionPowerProblem:
    """DC terms of one coalition's power subproblem.

    ``B[i, j]`` is the squared effective gain from member ``j``'s transmitter
    to member ``i``'s receiver in the coalition's band.
    """

    def __init__(self, B, sigma2: float, p_max, gamma: float, bandwidth: float = 1.0, weights=None):
        self.B = np.asarray(B, dtype=float)
        self.K = self.B.shape[0]
        self.sigma2 = float(sigma2)
        self.p_max = np.broadcast_to(np.asarray(p_max, dtype=float), (self.K,)).copy()
        self.gamma = float(gamma)
        self.bandwidth = float(bandwidth)
        self.weights = np.ones(self.K) if weights is None else np.asarray(weights, dtype=float)
        self.signal_gain = np.diag(self.B).copy()
        self.cross = self.B - np.diag(self.signal_gain)
        self.lg_target = np.log10(1.0 + self.gamma)

    def interference(self, P) -> np.ndarray:
        return self.cross @ P + self.sigma2

    def total(self, P) -> np.ndarray:
        return self.signal_gain * P + self.interference(P)

    def g(self, P) -> np.ndarray:
        return np.log10(self.interference(P))

    def phi(self, P) -> np.ndarray:
        return np.log10(self.total(P))

    def dc_objective(self, P) -> float:
        P = np.asarray(P, dtype=float)
        return float(np.sum(self.g(P) - self.phi(P)))

    def grad_g(self, P) -> np.ndarray:
        """Jacobian ``[i, k] = d g_i / d p_k``."""
        return self.cross / (LN10 * self.interference(P))[:, None]

    def grad_phi(self, P) -> np.ndarray:
        return self.B / (LN10 * self.total(P))[:, None]

    def sinr(self, P) -> np.ndarray:
        P = np.asarray(P, dtype=float)
        return self.signal_gain * P / self.interference(P)

    def rate(self, P) -> float:
        """Coalition rate in bit/s, including the per-link weights."""
        return float(self.bandwidth * np.sum(self.weights * np.log2(1.0 + self.sinr(P))))

    def sinr_ok(self, P) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log10(self.sinr(P)) >= np.log10(self.gamma) - SINR_SLACK_LG

    def violation(self, P) -> np.ndarray:
        """``g - phi + lg(1 + gamma)``; positive entries violate the SINR floor."""
        return self.g(P) - self.phi(P) + self.lg_target

    def linearize(self, P_anchor) -> "LinearizedProblem":
        return LinearizedProblem(self, np.asarray(P_anchor, dtype=float))

    def min_power_solution(self):
        """Smallest power vector meeting every SINR floor, or ``None`` if none fits the box."""
        if np.any(self.signal_gain <= 0):
            return None
        F = self.gamma * self.cross / self.signal_gain[:, None]
        if self.K > 1 and np.max(np.abs(np.linalg.eigvals(F))) >= 1.0:
            return None
        u = self.gamma * self.sigma2 / self.signal_gain
        p = np.linalg.solve(np.eye(self.K) - F, u)
        if np.any(p < 0) or np.any(p > self.p_max * (1 + 1e-12)):
            return None
        return p

    def restoration_point(self):
        """Minimum-power solution scaled up until the first member hits its cap."""
        p = self.min_power_solution()
        if p is None:
            return None
        return np.minimum(p * np.min(self.p_max / p), self.p_max)


class LinearizedProblem:
    """``f_i(P) = g_i(P0) + grad g_i(P0) (P - P0) - phi_i(P)``, an upper bound on ``g_i - phi_i``."""

    def __init__(self, problem: CoalitionPowerProblem, anchor: np.ndarray):
        self.problem = problem
        self.anchor = anchor
        self.g0 = problem.g(anchor)
        self.J0 = problem.grad_g(anchor)

    def terms(self, P) -> np.ndarray:
        P = np.asarray(P, dtype=float)
        return self.g0 + self.J0 @ (P - self.anchor) - self.problem.phi(P)

    def value(self, P) -> float:
        return float(np.sum(self.terms(P)))

    def lagrangian(self, P, lam) -> float:
        f = self.terms(P)
        return float(np.sum(f + lam * (f + self.problem.lg_target)))

    def grad_p(self, P, lam) -> np.ndarray:
        w = 1.0 + np.asarray(lam, dtype=float)
        return w @ (self.J0 - self.problem.grad_phi(P))

    def grad_lam(self, P) -> np.ndarray:
        return self.terms(P) + self.problem.lg_target


def dc_objective(problem: CoalitionPowerProblem, P) -> float:
    return problem.dc_objective(P)


def linearize(problem: CoalitionPowerProblem, P_anchor) -> LinearizedProblem:
    return problem.linearize(P_anchor)


@dataclass
class PowerResult:
    power: np.ndarray
    rate: float
    feasible: bool
    region_feasible: bool
    iterations: int
    reason: str
    history: list[dict] = field(default_factory=list)

    def write_jsonl(self, fh: IO[str]) -> None:
        for row in self.history:
            fh.write(json.dumps(row) + "\n")


def _rank(problem: CoalitionPowerProblem, P) -> tuple[int, float]:
    return (int(np.sum(~problem.sinr_ok(P))), -problem.rate(P))


def ranking(problem: CoalitionPowerProblem, p0, repair: bool = True):
    """Key function ordering candidate power vectors (smaller is better).

    With ``repair`` the number of SINR violations comes first and rate second.
    Without it, candidates that break a floor ``p0`` meets are ranked last and
    the rest by rate alone, so the result never has a lower rate than ``p0``.
    """
    if repair:
        return lambda P: _rank(problem, P)
    ok0 = problem.sinr_ok(np.clip(np.asarray(p0, dtype=float), 0.0, problem.p_max))
    return lambda P: (int(not np.all(problem.sinr_ok(P) | ~ok0)), -problem.rate(P))


def solve_power(
    problem: CoalitionPowerProblem,
    p0,
    *,
    epsilon: float = 1e3,
    max_iter: int = 500,
    dual_update: str = "paper",
    step0: float = 50.0,
    mu0: float = 100.0,
    lam0: float = 100.0,
    record: bool = False,
    key=None,
) -> PowerResult:
    """Iterate linearize / projected Lagrangian step / multiplier update.

    The step direction is the Lagrangian gradient in cap-normalized units,
    scaled to unit max-norm, so the result does not depend on the log base
    or any positive factor on the objective. Each trial step starts at the
    current ``delta`` and is halved until it decreases the linearized
    Lagrangian sufficiently without pushing a satisfied link below the SINR
    floor. Returns the best iterate visited under ``key`` (default: number
    of SINR violations, then rate).
    """
    pb = problem
    p = np.clip(np.asarray(p0, dtype=float), 0.0, pb.p_max)
    region = pb.min_power_solution()
    key = ranking(pb, p) if key is None else key

    lam = np.full(pb.K, lam0, dtype=float)
    delta, mu = step0, mu0
    best, best_key = p.copy(), key(p)
    rate_prev = pb.rate(p)
    history = []
    reason = "max_iter"
    n = 0
    for n in range(1, max_iter + 1):
        lin = pb.linearize(p)
        ok_ref = pb.sinr_ok(p)
        grad = lin.grad_p(p, lam)
        gu = grad * pb.p_max
        scale = np.max(np.abs(gu))
        if not np.isfinite(scale) or scale == 0.0:
            reason = "stationary"
            break
        direction = gu / scale
        u = p / pb.p_max
        L0 = lin.lagrangian(p, lam)
        step = delta
        trial = None
        for _ in range(MAX_BACKTRACK):
            cand = np.clip(u - step * direction, 0.0, 1.0) * pb.p_max
            if np.array_equal(cand, p):
                break
            decrease = grad @ (cand - p)
            if lin.lagrangian(cand, lam) <= L0 + ARMIJO_C * decrease and np.all(pb.sinr_ok(cand) | ~ok_ref):
                trial = cand
                break
            step *= 0.5
        if trial is None:
            reason = "stationary"
            break

        if delta > 1.0:
            delta /= 2.0
        slack = lin.grad_lam(trial)
        if dual_update == "paper":
            lam = np.maximum(0.0, lam - mu * np.maximum(0.0, slack))
        else:
            lam = np.maximum(0.0, lam + mu * slack)
        if mu > 1.0:
            mu /= 2.0

        p = trial
        rate = pb.rate(p)
        k = key(p)
        if k < best_key:
            best, best_key = p.copy(), k
        if record:
            history.append(
                {
                    "iteration": n,
                    "objective": pb.dc_objective(p),
                    "rate": rate,
                    "max_violation": float(np.max(pb.violation(p))),
                }
            )
        if abs(rate - rate_prev) < epsilon:
            reason = "converged"
            break
        rate_prev = rate

    return PowerResult(
        power=best,
        rate=pb.rate(best),
        feasible=bool(np.all(pb.sinr_ok(best))),
        region_feasible=region is not None,
        iterations=n,
        reason=reason,
        history=history,
    )


def starting_points(problem: CoalitionPowerProblem, p0) -> list[np.ndarray]:
    """Current point, all caps, the repair point, and for each member ``i`` with the others at cap:
    ``p_i`` lowered to its own SINR floor, and ``p_i`` raised until another member reaches its floor.
    """
    pb = problem
    starts = [np.clip(np.asarray(p0, dtype=float), 0.0, pb.p_max), pb.p_max.copy()]
    interference = pb.interference(pb.p_max)
    for i in range(pb.K if pb.K > 1 else 0):
        others = np.arange(pb.K) != i
        if pb.signal_gain[i] > 0:
            p = pb.p_max.copy()
            p[i] = min(pb.p_max[i], pb.gamma * interference[i] / pb.signal_gain[i])
            starts.append(p)
        coupling = pb.cross[others, i]
        if np.all(coupling > 0):
            headroom = pb.signal_gain[others] * pb.p_max[others] / pb.gamma
            headroom -= interference[others] - coupling * pb.p_max[i]
            p = pb.p_max.copy()
            p[i] = np.clip(np.min(headroom / coupling), 0.0, pb.p_max[i])
            starts.append(p)
    repair = pb.restoration_point()
    if repair is not None:
        starts.append(repair)
    unique = []
    for p in starts:
        if not any(np.array_equal(p, q) for q in unique):
            unique.append(p)
    return unique


def optimize_power(problem: CoalitionPowerProblem, p0, repair: bool = True, **kwargs) -> PowerResult:
    """Best of :func:`solve_power` runs from :func:`starting_points`.

    The subproblem is non-convex and a single descent from the current point
    settles in whichever local optimum is closest; the extra starts cover the
    corners where one member sits on its SINR floor. With ``repair`` the
    repair point guarantees a feasible answer whenever the SINR floors can be
    met at all; without it the answer is the best-rate point that keeps every
    floor ``p0`` already meets (see :func:`ranking`).
    """
    key = ranking(problem, p0, repair)
    best = None
    total_iter = 0
    for start in starting_points(problem, p0):
        res = solve_power(problem, start, key=key, **kwargs)
        total_iter += res.iterations
        if best is None or key(res.power) < key(best.power):
            best = res
    best.iterations = total_iter
    return best


def coalition_problem(k: int, partition: Partition, gains: LinkGains, system: System):
    """Build the subproblem for coalition ``k``; returns ``(link ids, problem)``."""
    ids = partition.link_ids(k)
    mm = k == system.C
    G2 = gains.G2m if mm else gains.G2c
    B = G2[np.ix_(ids, ids)]
    p = system.params
    sigma2 = system.sigma2_m if mm else system.sigma2_c
    cap = p.p_max_m if mm else p.p_max_c
    W = p.W_m if mm else p.W_c
    weights = system.outage_weight[ids] if mm else np.ones(len(ids))
    return ids, CoalitionPowerProblem(B, sigma2, np.full(len(ids), cap), system.gamma, W, weights)


def allocate_power(
    k: int, state: State, system: System, gains: LinkGains | None = None, record: bool = False, repair: bool = True
):
    """Optimize the powers of coalition ``k`` (members plus owner), others fixed.

    Returns ``(power vector for all links, PowerResult)``. ``repair`` is
    passed to :func:`optimize_power`.
    """
    gains = system.gains(state.phases) if gains is None else gains
    ids, problem = coalition_problem(k, state.partition, gains, system)
    power = np.array(state.power, dtype=float, copy=True)
    if ids.size == 0:
        return power, PowerResult(np.zeros(0), 0.0, True, True, 0, "empty")
    p = system.params
    res = optimize_power(
        problem,
        power[ids],
        repair=repair,
        epsilon=p.epsilon_inner,
        max_iter=p.max_inner,
        dual_update=p.dual_update,
        record=record,
    )
    power[ids] = res.power
    return power, res
