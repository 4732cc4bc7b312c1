"""Soundness attacks: maximize combined acceptance over separable witnesses.

The pair witness is eliminated analytically (for fixed psi the best phi
yields the coupling value sqrt(S(psi))), which reduces the attack to
projected gradient ascent over the unit sphere of psi alone:

    objective(psi) = 1/2 (1/2 + sqrt(S(psi))/(3m)) + 1/2 (1 - reject(psi))

where reject is the mean squared clause-vector overlap. Multi-start ascent
with backtracking line search is paired with an exhaustive oracle over all
canonical proper states, which scores overlaps combinatorially from the
signed sums in {0, +-2, +-4}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantError
from .qstate import StateVec, nearest_proper, s_value
from .sat_io import Assignment, TwoFourInstance, _assignment_from_index, _min_violation_scan
from .verifier import ClauseVectorSet, completeness

_DEGENERATE_S = 1e-12
_START_PERTURB = 1e-6
_KICK_SCALE = 1e-3
_MAX_KICKS = 2
_GRAD_STOP = 1e-12
_NEAR_PROPER_SIGMAS = (0.1, 0.3, 1.0)
CAP_SLACK = 1e-9


@dataclass(frozen=True)
class AttackConfig:
    """Multi-start ascent parameters.

    Defaults are calibrated so satisfiable desk-scale instances recover the
    completeness value to 1e-6.
    """

    starts: int = 64
    max_iters: int = 2000
    step: float = 0.1
    tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.starts < 1:
            raise ValueError("starts must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1 or self.step <= 0:
            raise ValueError("max_iters and step must be positive")


@dataclass(frozen=True)
class StartTrace:
    start: int
    kind: str
    iterations: int
    value: float


@dataclass(frozen=True)
class AttackResult:
    best_value: float
    best_psi: StateVec
    traces: tuple[StartTrace, ...]
    distance_to_proper: float
    completeness_cap: float
    seed: int

    def to_dict(self) -> dict:
        return {
            "best_value": self.best_value,
            "best_psi": [[float(a.real), float(a.imag)] for a in self.best_psi.amps],
            "per_start": [
                {"start": t.start, "kind": t.kind, "iterations": t.iterations, "value": t.value}
                for t in self.traces
            ],
            "distance_to_proper": self.distance_to_proper,
            "completeness_cap": self.completeness_cap,
            "seed": self.seed,
        }


@dataclass
class _Problem:
    n: int
    m_clauses: int
    idx: np.ndarray | None
    sgn: np.ndarray | None
    max_evaluated: float = field(default=-math.inf)

    @staticmethod
    def from_instance(inst: TwoFourInstance) -> "_Problem":
        if inst.num_vars < 2:
            raise ValueError("attack needs an instance with at least 2 variables")
        if inst.num_clauses == 0:
            return _Problem(n=inst.num_vars, m_clauses=0, idx=None, sgn=None)
        cvs = ClauseVectorSet.from_instance(inst)
        return _Problem(n=inst.num_vars, m_clauses=inst.num_clauses, idx=cvs.idx, sgn=cvs.sgn)

    def overlaps(self, x: np.ndarray) -> np.ndarray:
        return (self.sgn * x[self.idx]).sum(axis=1)

    def value(self, x: np.ndarray) -> float:
        s = _s_raw(x)
        val = 0.25 + math.sqrt(max(s, 0.0)) / (6.0 * self.n) + 0.5
        if self.m_clauses:
            z = self.overlaps(x)
            val -= 0.5 * float(np.mean(np.abs(z) ** 2))
        if val > self.max_evaluated:
            self.max_evaluated = val
        return val

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Projected conjugate-cogradient of the objective at unit-norm x."""
        s = _s_raw(x)
        if s <= _DEGENERATE_S:
            raise ValueError("gradient is degenerate at S ~ 0 (square-root cusp)")
        g = _s_grad_raw(x) / (12.0 * self.n * math.sqrt(s))
        if self.m_clauses:
            z = self.overlaps(x)
            sat = np.zeros_like(x)
            np.add.at(sat, self.idx.ravel(), (z[:, None] * self.sgn).ravel())
            g -= sat / (2.0 * self.m_clauses)
        return _project(x, g)


def _s_raw(x: np.ndarray) -> float:
    sq = np.abs(x) ** 2
    return float(abs(np.sum(x * x)) ** 2 + np.sum(sq) ** 2 - 2 * np.sum(sq * sq))


def _s_grad_raw(x: np.ndarray) -> np.ndarray:
    """Unprojected conjugate-cogradient of S at unit norm."""
    p = np.sum(x * x)
    return 2.0 * p * np.conj(x) + 2.0 * x - 4.0 * (np.abs(x) ** 2) * x


def _project(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    return g - x * np.vdot(x, g)


def _normalize(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x)


def cheat_objective(psi: StateVec, inst: TwoFourInstance) -> float:
    """Best combined acceptance over all pair witnesses for this psi."""
    if psi.n != inst.num_vars:
        raise ValueError(f"psi has dimension {psi.n}, instance has {inst.num_vars} variables")
    prob = _Problem.from_instance(inst)
    return prob.value(psi.amps)


def objective_gradient(psi: StateVec, inst: TwoFourInstance) -> np.ndarray:
    """Sphere-tangent ascent direction of the cheat objective at psi.

    Raises for S(psi) below 1e-12, where the square root is non-smooth.
    """
    if psi.n != inst.num_vars:
        raise ValueError(f"psi has dimension {psi.n}, instance has {inst.num_vars} variables")
    if s_value(psi) <= _DEGENERATE_S:
        raise ValueError("gradient is degenerate at S ~ 0 (square-root cusp)")
    return _Problem.from_instance(inst).gradient(psi.amps)


def _ascend(x0, value_fn, grad_fn, max_iters, step0, tol, record=None):
    """Backtracking projected gradient ascent; accepted values never decrease.

    Returns (x, value, iterations_used).
    """
    x = x0.copy()
    f = value_fn(x)
    if record is not None:
        record.append(f)
    step = step0
    small = 0
    iters = 0
    for _ in range(max_iters):
        g = grad_fn(x)
        gn2 = float(np.vdot(g, g).real)
        if gn2 < _GRAD_STOP**2:
            break
        accepted = False
        trial = step
        for _ in range(40):
            cand = _normalize(x + trial * g)
            fc = value_fn(cand)
            if fc >= f + 1e-4 * trial * gn2:
                accepted = True
                break
            trial *= 0.5
        iters += 1
        if not accepted:
            break
        gain = fc - f
        x, f = cand, fc
        if record is not None:
            record.append(f)
        step = min(trial * 2.0, 1.0)
        small = small + 1 if gain < tol else 0
        if small >= 3:
            break
    return x, f, iters


def _ascend_with_kicks(x0, prob_value, prob_grad, cfg_iters, step, tol, rng, record=None):
    """Ascent plus up to two seeded restart kicks to slip off saddle plateaus.

    A kick perturbs the converged point and re-ascends; it is kept only if
    the objective strictly improves, so reported values stay monotone.
    """
    x, f, used = _ascend(x0, prob_value, prob_grad, cfg_iters, step, tol, record)
    for _ in range(_MAX_KICKS):
        if used >= cfg_iters:
            break
        noise = _KICK_SCALE * (rng.standard_normal(x.size) + 1j * rng.standard_normal(x.size))
        x2, f2, used2 = _ascend(
            _normalize(x + noise), prob_value, prob_grad, cfg_iters - used, step, tol
        )
        used += used2
        if f2 > f + tol:
            x, f = x2, f2
            if record is not None:
                record.append(f)
        else:
            break
    return x, f, used


def _degenerate_safe(x: np.ndarray, rng) -> np.ndarray:
    if _s_raw(x) > _DEGENERATE_S:
        return x
    noise = _START_PERTURB * (rng.standard_normal(x.size) + 1j * rng.standard_normal(x.size))
    return _normalize(x + noise)


def _start_state(kind: str, n: int, rng) -> np.ndarray:
    if kind == "random":
        return _normalize(rng.standard_normal(n) + 1j * rng.standard_normal(n))
    sigma = float(kind.split(":")[1])
    signs = rng.choice(np.array([-1.0, 1.0]), size=n)
    signs[0] = 1.0
    delta = (sigma / math.sqrt(n)) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return _normalize(signs / math.sqrt(n) + delta)


def optimize_cheat(inst: TwoFourInstance, cfg: AttackConfig) -> AttackResult:
    """Multi-start projected gradient ascent over cheating state witnesses.

    Starts are drawn from Haar-random states, randomly perturbed proper
    states, and (when the instance fits the enumeration budget) the best
    exhaustive proper state. The best value over starts is returned along
    with per-start traces; ties resolve to the lowest start index. The
    result never exceeds the completeness value a(m) beyond 1e-9.
    """
    prob = _Problem.from_instance(inst)
    cap = completeness(prob.n)

    kinds: list[str] = []
    exhaustive_start: np.ndarray | None = None
    try:
        min_w, arg_idx, _ = _min_violation_scan(inst, weighted=True)
        signs = _assignment_from_index(arg_idx, inst.num_vars).signs
        exhaustive_start = signs.astype(np.float64) / math.sqrt(inst.num_vars)
        kinds.append("exhaustive-proper")
    except ValueError:
        pass
    i = 0
    while len(kinds) < cfg.starts:
        if i % 2 == 0:
            kinds.append("random")
        else:
            sigma = _NEAR_PROPER_SIGMAS[(i // 2) % len(_NEAR_PROPER_SIGMAS)]
            kinds.append(f"near-proper:{sigma}")
        i += 1

    traces: list[StartTrace] = []
    best_value, best_x = -math.inf, None
    for k, kind in enumerate(kinds):
        rng = np.random.default_rng([cfg.seed, k])
        if kind == "exhaustive-proper":
            x0 = exhaustive_start.astype(np.complex128)
        else:
            x0 = _start_state(kind, prob.n, rng)
        x0 = _degenerate_safe(x0, rng)
        x, f, used = _ascend_with_kicks(
            x0, prob.value, prob.gradient, cfg.max_iters, cfg.step, cfg.tol, rng
        )
        traces.append(StartTrace(start=k, kind=kind, iterations=used, value=f))
        if f > best_value:
            best_value, best_x = f, x

    if prob.max_evaluated > cap + CAP_SLACK:
        raise InvariantError(
            f"attack evaluated {prob.max_evaluated!r}, above the completeness cap {cap!r}"
        )
    psi = StateVec(_normalize(best_x))
    _, dist = nearest_proper(psi)
    return AttackResult(
        best_value=best_value,
        best_psi=psi,
        traces=tuple(traces),
        distance_to_proper=dist,
        completeness_cap=cap,
        seed=cfg.seed,
    )


def enumerate_proper_cheats(inst: TwoFourInstance) -> tuple[float, Assignment]:
    """Exact maximum of the cheat objective over all canonical proper states.

    For a proper state the coupling term is constant and each clause
    contributes (T-2)^2/n to the mean squared overlap, where T is its
    true-literal count, so the scan minimizes the total squared excess.
    """
    n = inst.num_vars
    if n < 2:
        raise ValueError("needs an instance with at least 2 variables")
    min_w, arg_idx, _ = _min_violation_scan(inst, weighted=True)
    assignment = _assignment_from_index(arg_idx, n)
    prop_term = 0.25 + math.sqrt(2.0 - 2.0 / n) / (6.0 * n)
    if inst.num_clauses == 0:
        return prop_term + 0.5, assignment
    reject = min_w / (n * inst.num_clauses)
    return prop_term + 0.5 * (1.0 - reject), assignment


def maximize_s(
    n: int, starts: int = 100, max_iters: int = 2000, seed: int = 0, step: float = 0.1, tol: float = 1e-12
) -> tuple[float, list[float]]:
    """Multi-start ascent of the pair-correlation functional S on the sphere.

    Returns (best S, per-start final S values); every start should converge
    to the maximum 2 - 2/n.
    """
    per_start: list[float] = []
    for k in range(starts):
        rng = np.random.default_rng([seed, n, k])
        x0 = _degenerate_safe(_normalize(rng.standard_normal(n) + 1j * rng.standard_normal(n)), rng)
        _, f, _ = _ascend_with_kicks(
            x0,
            lambda x: _s_raw(x),
            lambda x: _project(x, _s_grad_raw(x)),
            max_iters,
            step,
            tol,
            rng,
        )
        per_start.append(f)
    return max(per_start), per_start
