"""Arthur's protocol: properness test, satisfiability test, and their mixture.

The verifier receives a pair witness phi and a state witness psi for a
2-out-of-4 instance over m variables. With probability 1/2 it throws the
properness coin (head probability = expectation of (1/2)I + H/(3m)), and
with probability 1/2 it picks a clause uniformly at random and projects psi
onto the clause vector, rejecting on a hit. Honest witnesses from a
satisfying assignment are accepted with probability exactly

    a(m) = 3/4 + (1/(6m)) * sqrt(2 - 2/m).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import PairWitness, optimal_phi, properness_accept_prob
from .qstate import StateVec, proper_state
from .sat_io import Assignment, TwoFourInstance, clause_true_count


@dataclass(frozen=True)
class ClauseVectorSet:
    """The clause vectors of an instance: unit vectors with four +-1/2 entries."""

    n: int
    idx: np.ndarray  # (m, 4) 0-based variable positions
    sgn: np.ndarray  # (m, 4) entries +-0.5

    @staticmethod
    def from_instance(inst: TwoFourInstance) -> "ClauseVectorSet":
        m = inst.num_clauses
        idx = np.zeros((m, 4), dtype=np.intp)
        sgn = np.zeros((m, 4))
        for k, cl in enumerate(inst.clauses):
            for t, lit in enumerate(cl):
                idx[k, t] = abs(lit) - 1
                sgn[k, t] = 0.5 if lit > 0 else -0.5
        return ClauseVectorSet(n=inst.num_vars, idx=idx, sgn=sgn)

    def overlaps(self, amps: np.ndarray) -> np.ndarray:
        """<a_k|psi> for every clause vector (the vectors are real)."""
        if self.idx.shape[0] == 0:
            return np.zeros(0, dtype=np.complex128)
        return (self.sgn * amps[self.idx]).sum(axis=1)

    def dense(self) -> np.ndarray:
        out = np.zeros((self.idx.shape[0], self.n))
        for k in range(self.idx.shape[0]):
            out[k, self.idx[k]] = self.sgn[k]
        return out


@dataclass(frozen=True)
class ProtocolConstants:
    """Completeness a, the far-witness soundness bound b1, and the
    properness-test gap they differ by half of."""

    a: float
    b1: float
    gap_lemma4: float
    epsilon: float

    def __post_init__(self):
        if not (0.0 < self.b1 < self.a < 1.0):
            raise ValueError("need 0 < b1 < a < 1")
        if abs((self.a - self.b1) - self.gap_lemma4 / 2.0) > 1e-15:
            raise ValueError("a - b1 must equal gap_lemma4 / 2")


def completeness(m: int) -> float:
    """a(m) = 3/4 + (1/(6m)) sqrt(2 - 2/m)."""
    if m < 2:
        raise ValueError("need m >= 2")
    return 0.75 + math.sqrt(2.0 - 2.0 / m) / (6.0 * m)


def protocol_constants(m: int, epsilon: float) -> ProtocolConstants:
    """Exact protocol constants for an m-variable instance.

    The properness test separates far-from-proper witnesses by
    gap_lemma4 = 1/(20 m^(3+eps)); mixing halves it, so
    b1 = a - 1/(40 m^(3+eps)).
    """
    if m < 2:
        raise ValueError("need m >= 2")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    a = completeness(m)
    gap = 1.0 / (20.0 * m ** (3.0 + epsilon))
    return ProtocolConstants(a=a, b1=a - gap / 2.0, gap_lemma4=gap, epsilon=epsilon)


def sat_reject_prob(psi: StateVec, inst: TwoFourInstance) -> float:
    """Rejection probability of the satisfiability test: the mean squared
    clause-vector overlap (1/m) sum_k |<a_k|psi>|^2.

    Zero for any proper witness encoding a satisfying assignment, so this
    branch has perfect completeness. Instances without clauses never reject.
    """
    if psi.n != inst.num_vars:
        raise ValueError(f"psi has dimension {psi.n}, instance has {inst.num_vars} variables")
    if inst.num_clauses == 0:
        return 0.0
    z = ClauseVectorSet.from_instance(inst).overlaps(psi.amps)
    return float(np.mean(np.abs(z) ** 2))


def combined_accept_prob(phi: PairWitness, psi: StateVec, inst: TwoFourInstance) -> float:
    """Acceptance of the half/half mixture of the two tests."""
    return 0.5 * properness_accept_prob(phi, psi) + 0.5 * (1.0 - sat_reject_prob(psi, inst))


def honest_witnesses(inst: TwoFourInstance, assignment: Assignment) -> tuple[PairWitness, StateVec]:
    """The optimal witness pair for a satisfying assignment.

    psi is the proper state of the assignment's signs and phi is the best
    pair witness for it; the combined acceptance equals a(m).
    """
    if assignment.signs.size != inst.num_vars:
        raise ValueError("assignment length does not match instance")
    bad = [cl for cl in inst.clauses if clause_true_count(cl, assignment.signs) != 2]
    if bad:
        raise ValueError(f"assignment does not satisfy {len(bad)} clauses, e.g. {bad[0]}")
    psi = proper_state(assignment.signs)
    phi, _ = optimal_phi(psi)
    return phi, psi


def run_protocol_sampled(
    phi: PairWitness,
    psi: StateVec,
    inst: TwoFourInstance,
    shots: int,
    seed,
) -> tuple[float, float]:
    """Monte-Carlo run of the protocol; returns (accept_freq, stderr).

    Per shot: a fair coin selects the test; the properness branch draws a
    Bernoulli with the exact head probability, the satisfiability branch
    picks a clause uniformly and rejects with its squared overlap.
    Deterministic for a fixed seed.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p_prop = properness_accept_prob(phi, psi)
    rng = np.random.default_rng(seed)
    coin = rng.random(shots) < 0.5
    u = rng.random(shots)
    if inst.num_clauses:
        z = ClauseVectorSet.from_instance(inst).overlaps(psi.amps)
        reject = np.abs(z) ** 2
        picks = rng.integers(0, inst.num_clauses, size=shots)
        sat_accept = u >= reject[picks]
    else:
        sat_accept = np.ones(shots, dtype=bool)
    accept = np.where(coin, u < p_prop, sat_accept)
    freq = float(accept.mean())
    stderr = float(math.sqrt(freq * (1.0 - freq) / shots))
    return freq, stderr
