"""The pair-register block operator and its rank-two closed forms.

The measurement operator is (1/2)I + H/(3n), where H couples a designated
"top" index of the pair register to each pair (j,l) through the swap-like
coupling B_jl = |j><l| + |l><j| on the second register. For a fixed second
state psi, H collapses to an arrowhead matrix whose only nonzero entries are
b_jl = <psi|B_jl|psi> = 2 Re(conj(x_j) x_l) along the top row/column, so the
optimal pair witness and all acceptance probabilities have closed forms in
the b-vector and H never has to be materialized outside of test oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qstate import StateVec

NORM_ATOL = 1e-10
DENSE_MAX_N = 9
_DEGENERATE_B = 1e-12


class PairBasis:
    """Index map {top} | {(j,l) : 1 <= j < l <= n} -> 0..C(n,2).

    Position 0 is the top index; pair (j,l) sits at 1 + its rank in
    lexicographic order. This order is part of the witness wire format.
    """

    def __init__(self, n: int):
        if n < 2:
            raise ValueError("pair basis needs n >= 2")
        self.n = n
        rows, cols = np.triu_indices(n, k=1)
        self.rows = rows  # 0-based j-1
        self.cols = cols  # 0-based l-1
        self.dim = 1 + rows.size

    def pair_index(self, j: int, l: int) -> int:
        """Position of pair (j,l), 1-based indices with j < l."""
        if not (1 <= j < l <= self.n):
            raise ValueError(f"({j},{l}) is not a pair of 1..{self.n}")
        return 1 + (j - 1) * (2 * self.n - j) // 2 + (l - j - 1)

    def pairs(self):
        """Iterate 1-based (j,l) pairs in serialization order."""
        for j, l in zip(self.rows, self.cols):
            yield int(j) + 1, int(l) + 1


@dataclass(frozen=True)
class PairWitness:
    """First prover's state over the pair basis of dimension 1 + C(n,2)."""

    n: int
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=np.complex128)
        expect = 1 + self.n * (self.n - 1) // 2
        if amps.ndim != 1 or amps.size != expect:
            raise ValueError(f"pair witness for n={self.n} needs {expect} amplitudes")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"witness not normalized: {norm!r}")
        object.__setattr__(self, "amps", amps)

    @staticmethod
    def top_basis(n: int) -> "PairWitness":
        amps = np.zeros(1 + n * (n - 1) // 2, dtype=np.complex128)
        amps[0] = 1.0
        return PairWitness(n=n, amps=amps)


def b_coeffs(psi: StateVec) -> np.ndarray:
    """Vector of 2 Re(conj(x_j) x_l) over pairs j < l, in pair-basis order."""
    basis = PairBasis(psi.n)
    x = psi.amps
    return 2.0 * (np.conj(x[basis.rows]) * x[basis.cols]).real


def properness_accept_prob(phi: PairWitness, psi: StateVec) -> float:
    """Head probability of the properness coin for witnesses (phi, psi).

    Equals 1/2 + (1/(3n)) * sum_{j<l} 2 Re(conj(phi_top) phi_(j,l)) * b_jl,
    the expectation of (1/2)I + H/(3n) on the product state, computed
    without materializing H.
    """
    if phi.n != psi.n:
        raise ValueError(f"dimension mismatch: phi over n={phi.n}, psi over n={psi.n}")
    b = b_coeffs(psi)
    cross = 2.0 * (np.conj(phi.amps[0]) * phi.amps[1:]).real
    return float(0.5 + (cross @ b) / (3.0 * psi.n))


def optimal_phi(psi: StateVec) -> tuple[PairWitness, float]:
    """Best pair witness for a fixed psi and the attained coupling value.

    The arrowhead matrix with top row b has extreme eigenvalues +-|b| and
    top eigenvector (1, b/|b|)/sqrt(2), so phi_top = 1/sqrt(2) and
    phi_(j,l) = b_jl/(sqrt(2)|b|); the value is |b| = sqrt(S(psi)). A
    degenerate b (norm below 1e-12) pins phi to the top basis vector with
    value 0.
    """
    b = b_coeffs(psi)
    norm_b = float(np.linalg.norm(b))
    if norm_b < _DEGENERATE_B:
        return PairWitness.top_basis(psi.n), 0.0
    amps = np.concatenate(([1.0], b / norm_b)) / np.sqrt(2.0)
    return PairWitness(n=psi.n, amps=amps.astype(np.complex128)), norm_b


def dense_h(n: int) -> np.ndarray:
    """Dense H on the tensor product (pair register) x (state register).

    Test oracle only: the matrix has dimension (1 + C(n,2)) * n.
    """
    if n > DENSE_MAX_N:
        raise ValueError(f"dense oracle limited to n <= {DENSE_MAX_N}")
    basis = PairBasis(n)
    dim = basis.dim * n
    h = np.zeros((dim, dim))
    for p, (j, l) in enumerate(basis.pairs()):
        block = np.zeros((n, n))
        block[j - 1, l - 1] = block[l - 1, j - 1] = 1.0
        h[0:n, (p + 1) * n : (p + 2) * n] += block
        h[(p + 1) * n : (p + 2) * n, 0:n] += block
    return h


def dense_operator(n: int) -> np.ndarray:
    """Dense (1/2)I + H/(3n); Hermitian, positive semi-definite, norm < 1."""
    h = dense_h(n)
    return 0.5 * np.eye(h.shape[0]) + h / (3.0 * n)


def product_expectation(op: np.ndarray, phi: PairWitness, psi: StateVec) -> float:
    """<phi psi| op |phi psi> for a dense operator on the product space."""
    vec = np.kron(phi.amps, psi.amps)
    return float(np.real(np.vdot(vec, op @ vec)))


# ---------------------------------------------------------------------------
# Witness wire format: first line n, then one "re im" line per amplitude.
# Pair witnesses list the top amplitude first, then pairs in basis order.


def dumps_state(psi: StateVec) -> str:
    lines = [str(psi.n)]
    lines += [f"{a.real!r} {a.imag!r}" for a in psi.amps]
    return "\n".join(lines) + "\n"


def loads_state(text: str) -> StateVec:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    n = int(lines[0])
    if len(lines) != n + 1:
        raise ValueError(f"expected {n} amplitude lines, found {len(lines) - 1}")
    amps = np.array([complex(float(a), float(b)) for a, b in (ln.split() for ln in lines[1:])])
    return StateVec(amps)


def dumps_pair_witness(phi: PairWitness) -> str:
    lines = [str(phi.n)]
    lines += [f"{a.real!r} {a.imag!r}" for a in phi.amps]
    return "\n".join(lines) + "\n"


def loads_pair_witness(text: str) -> PairWitness:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    n = int(lines[0])
    amps = np.array([complex(float(a), float(b)) for a, b in (ln.split() for ln in lines[1:])])
    return PairWitness(n=n, amps=amps)


def save_state(psi: StateVec, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_state(psi))


def load_state(path) -> StateVec:
    with open(path) as fh:
        return loads_state(fh.read())


def save_pair_witness(phi: PairWitness, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_pair_witness(phi))


def load_pair_witness(path) -> PairWitness:
    with open(path) as fh:
        return loads_pair_witness(fh.read())
