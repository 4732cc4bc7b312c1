"""3-SAT parsing, the 2-out-of-4-SAT reduction, and exhaustive classical oracles.

A 2-out-of-4 clause holds four signed, distinct variable indices and is
satisfied when exactly two of its literals are true. Satisfaction is invariant
under a global sign flip of all variables, so exhaustive search enumerates
only canonical assignments (variable 1 pinned to +1) and every count of
satisfying assignments doubles when the flipped mirror is included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from collections import Counter

import numpy as np

# Enumeration budget for the exhaustive oracles: 2^(ENUM_MAX_VARS - 1)
# canonical assignments. 28 is a few seconds of bit-packed scanning.
ENUM_MAX_VARS = 28

_CHUNK_WORDS = 1 << 15  # 64-bit words per enumeration chunk (2 MiB of masks)
_ALL_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)
# Truth pattern of assignment-index bit b (b < 6) across one 64-bit word.
_INTRAWORD = np.array(
    [
        0xAAAAAAAAAAAAAAAA,
        0xCCCCCCCCCCCCCCCC,
        0xF0F0F0F0F0F0F0F0,
        0xFF00FF00FF00FF00,
        0xFFFF0000FFFF0000,
        0xFFFFFFFF00000000,
    ],
    dtype=np.uint64,
)


class DimacsError(ValueError):
    """Raised for malformed DIMACS or 2-out-of-4 instance text."""


@dataclass(frozen=True)
class Cnf3:
    """A 3-CNF formula: clauses are triples of signed variable indices.

    Duplicate variables inside a clause are allowed; `num_vars` may be 0 only
    for the empty formula.
    """

    num_vars: int
    clauses: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if self.num_vars < 0:
            raise ValueError("num_vars must be nonnegative")
        if self.num_vars == 0 and self.clauses:
            raise ValueError("clauses over an empty variable set")
        for cl in self.clauses:
            if len(cl) != 3:
                raise ValueError(f"clause {cl} does not have 3 literals")
            for lit in cl:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range in {cl}")


@dataclass(frozen=True)
class TwoFourInstance:
    """A 2-out-of-4-SAT instance over `num_vars` variables.

    Each clause is a 4-tuple of signed, pairwise-distinct variable indices;
    the implied clause vector has entries +-1/2 at those indices and is a
    unit vector.
    """

    num_vars: int
    clauses: tuple[tuple[int, int, int, int], ...]

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError("num_vars must be positive")
        for cl in self.clauses:
            if len(cl) != 4:
                raise ValueError(f"clause {cl} does not have 4 literals")
            vs = [abs(l) for l in cl]
            if 0 in vs or max(vs) > self.num_vars:
                raise ValueError(f"literal out of range in {cl}")
            if len(set(vs)) != 4:
                raise ValueError(f"clause {cl} repeats a variable")

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def occurrences(self) -> Counter:
        """Histogram: variable index -> number of clauses containing it."""
        counts = Counter()
        for cl in self.clauses:
            for lit in cl:
                counts[abs(lit)] += 1
        return counts

    def max_occurrence(self) -> int:
        occ = self.occurrences()
        return max(occ.values()) if occ else 0


@dataclass(frozen=True)
class Assignment:
    """A +-1 sign vector; canonical form pins variable 1 to +1."""

    signs: np.ndarray

    def __post_init__(self):
        signs = np.asarray(self.signs, dtype=np.int8)
        if signs.ndim != 1 or signs.size == 0:
            raise ValueError("signs must be a nonempty vector")
        if not np.all(np.abs(signs) == 1):
            raise ValueError("signs must be +-1")
        object.__setattr__(self, "signs", signs)

    def canonical(self) -> "Assignment":
        if self.signs[0] == 1:
            return self
        return Assignment(-self.signs)

    def flipped(self) -> "Assignment":
        return Assignment(-self.signs)


def clause_true_count(clause, signs) -> int:
    """Number of true literals of one clause under a sign vector."""
    return sum(1 for lit in clause if signs[abs(lit) - 1] == (1 if lit > 0 else -1))


def count_satisfied(inst: TwoFourInstance, signs) -> int:
    return sum(1 for cl in inst.clauses if clause_true_count(cl, signs) == 2)


def satisfies(inst: TwoFourInstance, assignment: Assignment) -> bool:
    if assignment.signs.size != inst.num_vars:
        raise ValueError("assignment length does not match instance")
    return count_satisfied(inst, assignment.signs) == inst.num_clauses


# ---------------------------------------------------------------------------
# DIMACS parsing


def parse_dimacs(text: str) -> Cnf3:
    """Parse DIMACS CNF text into a 3-CNF.

    Clauses with 1 or 2 literals are padded to 3 by repeating the last
    literal. Clauses with more than 3 literals are rejected.
    """
    num_vars = num_clauses = None
    tokens: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if num_vars is not None:
                raise DimacsError("duplicate header line")
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"malformed header: {line!r}")
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"malformed header: {line!r}") from None
            if num_vars < 0 or num_clauses < 0:
                raise DimacsError(f"malformed header: {line!r}")
            continue
        if num_vars is None:
            raise DimacsError("clause data before header")
        try:
            tokens.extend(int(t) for t in line.split())
        except ValueError:
            raise DimacsError(f"bad token on line: {line!r}") from None
    if num_vars is None:
        raise DimacsError("missing 'p cnf' header")

    clauses: list[tuple[int, int, int]] = []
    cur: list[int] = []
    for tok in tokens:
        if tok == 0:
            if not cur:
                raise DimacsError("empty clause")
            if len(cur) > 3:
                raise DimacsError(f"clause exceeds 3 literals: {cur}")
            while len(cur) < 3:
                cur.append(cur[-1])
            clauses.append(tuple(cur))
            cur = []
        else:
            if abs(tok) > num_vars:
                raise DimacsError(f"literal {tok} out of range (header says {num_vars})")
            cur.append(tok)
    if cur:
        raise DimacsError(f"missing terminating 0 after {cur}")
    if len(clauses) != num_clauses:
        raise DimacsError(f"header promises {num_clauses} clauses, found {len(clauses)}")
    return Cnf3(num_vars=num_vars, clauses=tuple(clauses))


def write_dimacs(cnf: Cnf3) -> str:
    lines = [f"p cnf {cnf.num_vars} {len(cnf.clauses)}"]
    lines += [" ".join(str(l) for l in cl) + " 0" for cl in cnf.clauses]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Reduction


def reduce_to_2of4(alpha: Cnf3) -> TwoFourInstance:
    """Compile a 3-CNF into an equisatisfiable 2-out-of-4-SAT instance.

    One global reference variable t is appended last. Each clause (x|y|z)
    gets four fresh auxiliaries a,b,c,d and the three clauses
    (~x,a,b,t), (y,b,c,t), (~z,c,d,t): with t true they say "exactly one of
    the first three literals is true", a chain that is satisfiable exactly
    when x|y|z holds. Output size: num_vars = n + 4m + 1, num_clauses = 3m.
    """
    n, m = alpha.num_vars, len(alpha.clauses)
    t = n + 4 * m + 1
    clauses: list[tuple[int, int, int, int]] = []
    for k, (x, y, z) in enumerate(alpha.clauses):
        a = n + 4 * k + 1
        b, c, d = a + 1, a + 2, a + 3
        clauses.append((-x, a, b, t))
        clauses.append((y, b, c, t))
        clauses.append((-z, c, d, t))
    return TwoFourInstance(num_vars=t, clauses=tuple(clauses))


def bound_occurrences(beta: TwoFourInstance, cap: int) -> TwoFourInstance:
    """Split variables occurring in more than `cap` clauses into chained copies.

    Each chain link introduces two fresh auxiliaries u,v and the clause pair
    (t_a,~t_b,u,v), (t_a,~t_b,~u,~v), which force sign(t_a)=sign(t_b) and
    sign(u)=-sign(v). The output is equisatisfiable with the input and every
    variable occurs at most cap + 2 times. Instances already within the cap
    are returned unchanged.
    """
    if cap < 3:
        raise ValueError("cap must be >= 3")
    occ: dict[int, list[tuple[int, int]]] = {}
    for ci, cl in enumerate(beta.clauses):
        for si, lit in enumerate(cl):
            occ.setdefault(abs(lit), []).append((ci, si))
    if all(len(slots) <= cap for slots in occ.values()):
        return beta

    clauses = [list(cl) for cl in beta.clauses]
    next_var = beta.num_vars + 1
    links: list[tuple[int, int, int, int]] = []
    for var in sorted(occ):
        slots = occ[var]
        o = len(slots)
        if o <= cap:
            continue
        # Chain-end copies carry `cap` original occurrences, interior copies
        # cap-2, so that link occurrences keep every copy within cap + 2.
        if o <= 2 * cap:
            k = 2
        else:
            k = 2 + math.ceil((o - 2 * cap) / (cap - 2))
        sizes = [cap] + [cap - 2] * (k - 2)
        sizes.append(o - sum(sizes))
        copies = [var] + list(range(next_var, next_var + k - 1))
        next_var += k - 1
        pos = 0
        for copy_var, size in zip(copies, sizes):
            for ci, si in slots[pos : pos + size]:
                lit = clauses[ci][si]
                clauses[ci][si] = copy_var if lit > 0 else -copy_var
            pos += size
        for left, right in zip(copies, copies[1:]):
            u, v = next_var, next_var + 1
            next_var += 2
            links.append((left, -right, u, v))
            links.append((left, -right, -u, -v))
    out_clauses = tuple(tuple(cl) for cl in clauses) + tuple(links)
    return TwoFourInstance(num_vars=next_var - 1, clauses=out_clauses)


# ---------------------------------------------------------------------------
# Bit-packed exhaustive search
#
# Canonical assignment i in [0, 2^(n-1)): variable 1 is true, variable j >= 2
# is true iff bit (j-2) of i is set. Truth masks are packed 64 assignments
# per uint64 word (assignment w*64+b <-> bit b of word w) and scanned in
# chunks, so memory stays bounded for the largest budgeted instances.


def _var_words(var: int, w0: int, nwords: int) -> np.ndarray:
    if var == 1:
        return np.full(nwords, _ALL_ONES)
    b = var - 2
    if b < 6:
        return np.full(nwords, _INTRAWORD[b])
    w = np.arange(w0, w0 + nwords, dtype=np.uint64)
    return ((w >> np.uint64(b - 6)) & np.uint64(1)) * _ALL_ONES


def _clause_bits(clause, w0: int, nwords: int) -> tuple[np.ndarray, np.ndarray]:
    """(s0, s1) bits of the per-assignment count of true literals (0..4)."""
    lits = []
    for lit in clause:
        mask = _var_words(abs(lit), w0, nwords)
        lits.append(mask if lit > 0 else ~mask)
    a, b, c, d = lits
    ab1, ab2 = a ^ b, a & b
    cd1, cd2 = c ^ d, c & d
    s0 = ab1 ^ cd1
    carry = ab1 & cd1
    s1 = ab2 ^ cd2 ^ carry
    # s2 (the fours bit) is implied: count==2 iff s1 & ~s0 & ~s2, and
    # s2 = (ab2 & cd2) | ((ab2 ^ cd2) & carry).
    s2 = (ab2 & cd2) | ((ab2 ^ cd2) & carry)
    return s0, s1, s2


def _clause_sat_words(clause, w0: int, nwords: int) -> np.ndarray:
    s0, s1, s2 = _clause_bits(clause, w0, nwords)
    return s1 & ~s0 & ~s2


def _counter_add(planes: list[np.ndarray], mask: np.ndarray, start: int = 0) -> None:
    carry = mask
    for i in range(start, len(planes)):
        planes[i], carry = planes[i] ^ carry, planes[i] & carry


def _popcount(words: np.ndarray) -> int:
    return int(np.bitwise_count(words).sum())


def _unpack_counts(planes: list[np.ndarray], nbits_valid: int) -> np.ndarray:
    counts = np.zeros(len(planes[0]) * 64, dtype=np.uint32)
    for k, plane in enumerate(planes):
        bits = np.unpackbits(plane.view(np.uint8), bitorder="little")
        counts += bits.astype(np.uint32) << k
    return counts[:nbits_valid]


def _assignment_from_index(index: int, num_vars: int) -> Assignment:
    signs = np.ones(num_vars, dtype=np.int8)
    for j in range(2, num_vars + 1):
        if not (index >> (j - 2)) & 1:
            signs[j - 1] = -1
    return Assignment(signs)


def _chunks(num_vars: int):
    """Yield (w0, nwords, first_assignment_index, valid_bits_in_chunk)."""
    total = 1 << (num_vars - 1)
    nwords_total = max(1, total // 64)
    w0 = 0
    while w0 < nwords_total:
        nwords = min(_CHUNK_WORDS, nwords_total - w0)
        yield w0, nwords, w0 * 64, min(total - w0 * 64, nwords * 64)
        w0 += nwords


def _valid_mask(nwords: int, valid_bits: int) -> np.ndarray | None:
    if valid_bits >= nwords * 64:
        return None
    mask = np.zeros(nwords, dtype=np.uint64)
    full, rem = divmod(valid_bits, 64)
    mask[:full] = _ALL_ONES
    if rem:
        mask[full] = np.uint64((1 << rem) - 1)
    return mask


@dataclass(frozen=True)
class ExhaustiveResult:
    satisfiable: bool
    best: Assignment
    max_satisfied: int
    num_best: int  # canonical assignments attaining max_satisfied


def _check_budget(inst: TwoFourInstance) -> None:
    if inst.num_vars > ENUM_MAX_VARS:
        raise ValueError(
            f"instance with {inst.num_vars} variables exceeds the "
            f"enumeration budget of {ENUM_MAX_VARS}"
        )


def exhaustive_sat_search(beta: TwoFourInstance) -> ExhaustiveResult:
    """Enumerate all canonical sign vectors; maximize satisfied clauses.

    `best` maximizes the number of clauses with exactly two true literals;
    `satisfiable` iff that maximum equals the clause count.
    """
    _check_budget(beta)
    mc = beta.num_clauses
    if mc == 0:
        return ExhaustiveResult(
            satisfiable=True,
            best=_assignment_from_index(0, beta.num_vars),
            max_satisfied=0,
            num_best=1 << (beta.num_vars - 1),
        )

    # Pass 1: satisfiability only (AND of per-clause masks).
    num_sat = 0
    first_index = None
    for w0, nwords, base, valid_bits in _chunks(beta.num_vars):
        allmask = _clause_sat_words(beta.clauses[0], w0, nwords)
        for cl in beta.clauses[1:]:
            if not allmask.any():
                break
            allmask &= _clause_sat_words(cl, w0, nwords)
        vmask = _valid_mask(nwords, valid_bits)
        if vmask is not None:
            allmask &= vmask
        hits = _popcount(allmask)
        if hits and first_index is None:
            w = int(np.flatnonzero(allmask)[0])
            bit = int(allmask[w]) & -int(allmask[w])
            first_index = base + w * 64 + bit.bit_length() - 1
        num_sat += hits
    if first_index is not None:
        return ExhaustiveResult(
            satisfiable=True,
            best=_assignment_from_index(first_index, beta.num_vars),
            max_satisfied=mc,
            num_best=num_sat,
        )

    # Pass 2: unsatisfiable; count violated clauses per assignment.
    min_w, arg_idx, num_min = _min_violation_scan(beta, weighted=False)
    return ExhaustiveResult(
        satisfiable=False,
        best=_assignment_from_index(arg_idx, beta.num_vars),
        max_satisfied=mc - min_w,
        num_best=num_min,
    )


def _min_violation_scan(beta: TwoFourInstance, weighted: bool) -> tuple[int, int, int]:
    """Minimum over canonical assignments of the total violation weight.

    Unit mode counts violated clauses. Weighted mode scores each clause by
    the squared excess of its true-literal count over 2 (0, 1 or 4), the
    quantity that drives a proper witness's clause-projection overlaps.

    Returns (min_weight, argmin_index, count_at_min); ties resolve to the
    smallest assignment index.
    """
    _check_budget(beta)
    mc = beta.num_clauses
    if mc == 0:
        return 0, 0, 1 << (beta.num_vars - 1)
    max_total = 4 * mc if weighted else mc
    nplanes = max(1, max_total.bit_length())
    best_w, best_idx, best_count = max_total + 1, -1, 0
    for w0, nwords, base, valid_bits in _chunks(beta.num_vars):
        planes = [np.zeros(nwords, dtype=np.uint64) for _ in range(nplanes)]
        for cl in beta.clauses:
            s0, s1, s2 = _clause_bits(cl, w0, nwords)
            if weighted:
                near = s0  # odd count: one literal away
                far = ~s0 & ~s1  # count 0 or 4: weight 4
                _counter_add(planes, near, start=0)
                _counter_add(planes, far, start=2)
            else:
                _counter_add(planes, ~(s1 & ~s0 & ~s2), start=0)
        counts = _unpack_counts(planes, valid_bits)
        w = int(counts.min())
        if w < best_w:
            best_w = w
            best_idx = base + int(np.argmax(counts == w))
            best_count = int((counts == w).sum())
        elif w == best_w:
            best_count += int((counts == w).sum())
    return best_w, best_idx, best_count


# ---------------------------------------------------------------------------
# Instance text format


def _normalized_clauses(inst: TwoFourInstance) -> list[tuple[int, int, int, int]]:
    def key(cl):
        return tuple((abs(l), l < 0) for l in cl)

    ordered = [tuple(sorted(cl, key=lambda l: (abs(l), l < 0))) for cl in inst.clauses]
    return sorted(ordered, key=key)


def write_2of4(inst: TwoFourInstance) -> str:
    """Serialize with header `p 2of4 <vars> <clauses>`; clauses are emitted
    with literals ordered by variable and sorted by first index."""
    lines = [f"p 2of4 {inst.num_vars} {inst.num_clauses}"]
    for cl in _normalized_clauses(inst):
        lines.append(" ".join(str(l) for l in cl) + " 0")
    return "\n".join(lines) + "\n"


def parse_2of4(text: str) -> TwoFourInstance:
    num_vars = num_clauses = None
    clauses: list[tuple[int, int, int, int]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "2of4":
                raise DimacsError(f"malformed header: {line!r}")
            num_vars, num_clauses = int(parts[2]), int(parts[3])
            continue
        if num_vars is None:
            raise DimacsError("clause data before header")
        toks = [int(t) for t in line.split()]
        if len(toks) != 5 or toks[-1] != 0:
            raise DimacsError(f"expected four literals and terminating 0: {line!r}")
        clauses.append(tuple(toks[:4]))
    if num_vars is None:
        raise DimacsError("missing 'p 2of4' header")
    if len(clauses) != num_clauses:
        raise DimacsError(f"header promises {num_clauses} clauses, found {len(clauses)}")
    return TwoFourInstance(num_vars=num_vars, clauses=tuple(clauses))


def write_assignment(assignment: Assignment) -> str:
    return " ".join(
        str(i + 1 if s > 0 else -(i + 1)) for i, s in enumerate(assignment.signs)
    ) + " 0\n"


def parse_assignment(text: str, num_vars: int) -> Assignment:
    signs = np.zeros(num_vars, dtype=np.int8)
    seen = set()
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith(("c", "#")):
            continue
        if line.startswith("v"):
            line = line[1:]
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                continue
            var = abs(lit)
            if var > num_vars:
                raise ValueError(f"literal {lit} out of range")
            if var in seen:
                raise ValueError(f"variable {var} assigned twice")
            seen.add(var)
            signs[var - 1] = 1 if lit > 0 else -1
    if len(seen) != num_vars:
        missing = sorted(set(range(1, num_vars + 1)) - seen)
        raise ValueError(f"assignment missing variables {missing}")
    return Assignment(signs)
