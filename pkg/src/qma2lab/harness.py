"""Experiment orchestration: CLI, gap scans, reports, and selftest.

All randomness flows from one root seed; child seeds are derived as
SeedSequence([root, counter]) with a per-purpose counter (instance index for
scans, start index inside attacks), so every report reproduces bit-for-bit
at printed precision apart from wall-clock timings.

Exit codes: 0 success, 1 usage error, 2 corpus/input error, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import adversary, hamiltonian, qstate, sat_io, verifier
from .adversary import AttackConfig
from .errors import InvariantError

GAP_TOL = 1e-9


def child_seed(root: int, counter: int) -> int:
    """Deterministic child seed for stream `counter` under a root seed."""
    return int(np.random.SeedSequence(entropy=[root, counter]).generate_state(1, np.uint64)[0])


def random_cnf3(num_vars: int, num_clauses: int, seed) -> sat_io.Cnf3:
    """Minimal seeded random 3-SAT generator for corpus building.

    Each literal picks a uniform variable and sign; duplicate variables
    within a clause are allowed.
    """
    rng = np.random.default_rng(seed)
    clauses = []
    for _ in range(num_clauses):
        vs = rng.integers(1, num_vars + 1, size=3)
        ss = rng.choice([-1, 1], size=3)
        clauses.append(tuple(int(v * s) for v, s in zip(vs, ss)))
    return sat_io.Cnf3(num_vars=num_vars, clauses=tuple(clauses))


@dataclass(frozen=True)
class GapReport:
    """Self-contained record of one instance's completeness/attack gap."""

    instance_id: str
    source: str
    m_vars: int
    num_clauses: int
    max_occurrence: int
    epsilon: float
    satisfiable: bool | None
    a: float
    honest_value: float | None
    attack_value: float
    gap: float
    lemma4_threshold: float
    root_seed: int
    instance_seed: int
    attack_starts: int
    attack_max_iters: int
    attack_tol: float
    timings: dict

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def run_gap_scan(
    sources,
    epsilon: float,
    cfg: AttackConfig,
) -> tuple[list[GapReport], str, list[tuple[str, str]]]:
    """Reduce, verify honestly when possible, and attack each corpus entry.

    `sources` is a list of DIMACS file paths or (id, Cnf3) pairs. Returns
    (reports, csv_text, errors); unreadable entries are reported and the
    scan continues. Raises ValueError on an empty corpus.
    """
    if not sources:
        raise ValueError("empty corpus")
    reports: list[GapReport] = []
    errors: list[tuple[str, str]] = []
    for i, src in enumerate(sources):
        try:
            if isinstance(src, tuple):
                instance_id, cnf = src
                source = "<memory>"
            else:
                instance_id = Path(src).name
                source = str(src)
                cnf = sat_io.parse_dimacs(Path(src).read_text())
            reports.append(_scan_one(instance_id, source, cnf, i, epsilon, cfg))
        except InvariantError:
            raise
        except (OSError, ValueError) as exc:
            errors.append((str(src), str(exc)))
    csv_text = _gap_csv(reports, epsilon)
    return reports, csv_text, errors


def _scan_one(instance_id, source, cnf, index, epsilon, cfg) -> GapReport:
    t0 = time.perf_counter()
    inst = sat_io.reduce_to_2of4(cnf)
    m = inst.num_vars
    consts = verifier.protocol_constants(m, epsilon)
    t1 = time.perf_counter()

    satisfiable: bool | None = None
    honest_value: float | None = None
    if m <= sat_io.ENUM_MAX_VARS:
        found = sat_io.exhaustive_sat_search(inst)
        satisfiable = found.satisfiable
        if found.satisfiable:
            phi, psi = verifier.honest_witnesses(inst, found.best)
            honest_value = verifier.combined_accept_prob(phi, psi, inst)
    t2 = time.perf_counter()

    iseed = child_seed(cfg.seed, index)
    attack = adversary.optimize_cheat(inst, dataclasses.replace(cfg, seed=iseed))
    t3 = time.perf_counter()

    gap = consts.a - attack.best_value
    if gap < -GAP_TOL:
        raise InvariantError(f"{instance_id}: attack value {attack.best_value!r} exceeds a = {consts.a!r}")
    return GapReport(
        instance_id=instance_id,
        source=source,
        m_vars=m,
        num_clauses=inst.num_clauses,
        max_occurrence=inst.max_occurrence(),
        epsilon=epsilon,
        satisfiable=satisfiable,
        a=consts.a,
        honest_value=honest_value,
        attack_value=attack.best_value,
        gap=gap,
        lemma4_threshold=5.0 * m ** (-epsilon / 4.0),
        root_seed=cfg.seed,
        instance_seed=iseed,
        attack_starts=cfg.starts,
        attack_max_iters=cfg.max_iters,
        attack_tol=cfg.tol,
        timings={
            "reduce_s": t1 - t0,
            "honest_s": t2 - t1,
            "attack_s": t3 - t2,
            "total_s": t3 - t0,
        },
    )


def _gap_csv(reports: list[GapReport], epsilon: float) -> str:
    lines = ["m,a,attack_value,gap,theory_gap"]
    for r in reports:
        theory = 1.0 / (40.0 * r.m_vars ** (3.0 + epsilon))
        lines.append(
            f"{r.m_vars},{r.a:.12g},{r.attack_value:.12g},{r.gap:.12g},{theory:.12g}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# CLI


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _load_config(path: str | None) -> dict:
    """Flat key=value config; '#' starts a comment. Flags win over config."""
    if path is None:
        return {}
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


def _pick(args_value, config: dict, key: str, cast, default):
    if args_value is not None:
        return args_value
    if key in config:
        return cast(config[key])
    return default


def _attack_config(args, config) -> AttackConfig:
    return AttackConfig(
        starts=_pick(args.starts, config, "starts", int, 64),
        max_iters=_pick(args.iters, config, "iters", int, 2000),
        step=_pick(args.step, config, "step", float, 0.1),
        tol=_pick(args.tol, config, "tol", float, 1e-10),
        seed=_pick(args.seed, config, "seed", int, 0),
    )


def _build_parser() -> _Parser:
    parser = _Parser(prog="qma2lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reduce", help="compile DIMACS 3-SAT to a 2-out-of-4 instance")
    p.add_argument("cnf")
    p.add_argument("--bound-occurrences", type=int, default=None, metavar="C")
    p.add_argument("-o", "--out", default=None)
    p.add_argument("--config", default=None)

    p = sub.add_parser("verify", help="exact and sampled acceptance for an assignment")
    p.add_argument("instance")
    p.add_argument("--assignment", required=True)
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--emit-witness-prefix", default=None, metavar="PREFIX")
    p.add_argument("--config", default=None)

    p = sub.add_parser("attack", help="optimize cheating witnesses for an instance")
    p.add_argument("instance")
    p.add_argument("--starts", type=int, default=None)
    p.add_argument("--iters", type=int, default=None)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--out", default=None)
    p.add_argument("--config", default=None)

    p = sub.add_parser("gapscan", help="scan a directory of .cnf files")
    p.add_argument("corpus_dir")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--starts", type=int, default=None)
    p.add_argument("--iters", type=int, default=None)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--out", default=None, help="output directory for reports + CSV")
    p.add_argument("--config", default=None)

    p = sub.add_parser("selftest", help="run the oracle cross-check suite")
    p.add_argument("--config", default=None)
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        config = _load_config(args.config)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return _dispatch(args, config)
    except InvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3
    except (OSError, ValueError, sat_io.DimacsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args, config) -> int:
    if args.command == "reduce":
        cnf = sat_io.parse_dimacs(Path(args.cnf).read_text())
        inst = sat_io.reduce_to_2of4(cnf)
        cap = _pick(args.bound_occurrences, config, "bound_occurrences", int, None)
        if cap is not None:
            inst = sat_io.bound_occurrences(inst, cap)
        text = sat_io.write_2of4(inst)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return 0

    if args.command == "verify":
        inst = sat_io.parse_2of4(Path(args.instance).read_text())
        assignment = sat_io.parse_assignment(Path(args.assignment).read_text(), inst.num_vars)
        shots = _pick(args.shots, config, "shots", int, 100_000)
        seed = _pick(args.seed, config, "seed", int, 0)
        phi, psi = verifier.honest_witnesses(inst, assignment)
        if args.emit_witness_prefix:
            hamiltonian.save_pair_witness(phi, args.emit_witness_prefix + ".phi.txt")
            hamiltonian.save_state(psi, args.emit_witness_prefix + ".psi.txt")
        p_prop = hamiltonian.properness_accept_prob(phi, psi)
        p_sat = 1.0 - verifier.sat_reject_prob(psi, inst)
        p_comb = verifier.combined_accept_prob(phi, psi, inst)
        freq, _ = verifier.run_protocol_sampled(phi, psi, inst, shots, seed)
        rng = np.random.default_rng([seed, 1])
        prop_freq = float((rng.random(shots) < p_prop).mean())
        rng = np.random.default_rng([seed, 2])
        if inst.num_clauses:
            z = verifier.ClauseVectorSet.from_instance(inst).overlaps(psi.amps)
            picks = rng.integers(0, inst.num_clauses, size=shots)
            sat_freq = float((rng.random(shots) >= np.abs(z[picks]) ** 2).mean())
        else:
            sat_freq = 1.0
        records = [
            {"test": "properness", "exact_prob": p_prop, "sampled_freq": prop_freq, "shots": shots, "seed": seed},
            {"test": "satisfiability", "exact_prob": p_sat, "sampled_freq": sat_freq, "shots": shots, "seed": seed},
            {"test": "combined", "exact_prob": p_comb, "sampled_freq": freq, "shots": shots, "seed": seed},
        ]
        json.dump(records, sys.stdout, indent=2)
        sys.stdout.write("\n")
        return 0

    if args.command == "attack":
        inst = sat_io.parse_2of4(Path(args.instance).read_text())
        cfg = _attack_config(args, config)
        result = adversary.optimize_cheat(inst, cfg)
        payload = result.to_dict()
        payload["completeness_gap"] = payload["completeness_cap"] - payload["best_value"]
        text = json.dumps(payload, indent=2) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return 0

    if args.command == "gapscan":
        corpus_dir = Path(args.corpus_dir)
        if not corpus_dir.is_dir():
            print(f"corpus error: {corpus_dir} is not a directory", file=sys.stderr)
            return 2
        sources = sorted(corpus_dir.glob("*.cnf"))
        if not sources:
            print(f"corpus error: no .cnf files in {corpus_dir}", file=sys.stderr)
            return 2
        epsilon = _pick(args.epsilon, config, "epsilon", float, 1.0)
        cfg = _attack_config(args, config)
        reports, csv_text, errors = run_gap_scan(sources, epsilon, cfg)
        out_dir = Path(_pick(args.out, config, "out", str, str(corpus_dir / "gapscan-out")))
        out_dir.mkdir(parents=True, exist_ok=True)
        for report in reports:
            path = out_dir / f"{Path(report.instance_id).stem}.report.json"
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
            tmp.replace(path)
        (out_dir / "gapscan.csv").write_text(csv_text)
        for report in reports:
            print(
                f"{report.instance_id}: m={report.m_vars} a={report.a:.12g} "
                f"attack={report.attack_value:.12g} gap={report.gap:.12g}"
            )
        for src, msg in errors:
            print(f"corpus error: {src}: {msg}", file=sys.stderr)
        return 2 if errors else 0

    if args.command == "selftest":
        return selftest()
    raise _UsageError(f"unknown command {args.command!r}")


# ---------------------------------------------------------------------------
# Selftest: quick oracle cross-checks, printable without pytest.


def _selftest_checks():
    rng = np.random.default_rng(12345)

    def closed_form_vs_pairwise():
        for n in (2, 3, 5, 8):
            for _ in range(25):
                psi = qstate.random_state(n, rng.integers(2**32))
                x = psi.amps
                direct = sum(
                    (2 * (np.conj(x[j]) * x[l]).real) ** 2
                    for j in range(n)
                    for l in range(j + 1, n)
                )
                if abs(qstate.s_value(psi) - direct) > 1e-10:
                    return f"S closed form deviates at n={n}"
        return None

    def rank_two_vs_dense():
        for n in (2, 4, 5):
            op = hamiltonian.dense_operator(n)
            for _ in range(10):
                psi = qstate.random_state(n, rng.integers(2**32))
                phi, value = hamiltonian.optimal_phi(psi)
                dense_val = hamiltonian.product_expectation(op, phi, psi)
                struct = hamiltonian.properness_accept_prob(phi, psi)
                if abs(dense_val - struct) > 1e-10:
                    return f"structured vs dense acceptance deviates at n={n}"
                if abs(value - math.sqrt(qstate.s_value(psi))) > 1e-10:
                    return f"coupling value vs sqrt(S) deviates at n={n}"
        return None

    def norm_bound():
        for n in range(2, 6):
            h = hamiltonian.dense_h(n)
            top = float(np.abs(np.linalg.eigvalsh(h)).max())
            if top > n:
                return f"|H| = {top} exceeds {n}"
        return None

    def gadget_table():
        import itertools

        cnf = sat_io.Cnf3(3, ((1, 2, 3),))
        inst = sat_io.reduce_to_2of4(cnf)
        for bits in itertools.product([1, -1], repeat=3):
            want = 1 in bits
            got = False
            for aux in itertools.product([1, -1], repeat=4):
                signs = np.array(bits + aux + (1,), dtype=np.int8)
                if sat_io.count_satisfied(inst, signs) == inst.num_clauses:
                    got = True
                    break
            if want != got:
                return f"gadget truth table broken at {bits}"
        return None

    def roundtrip_sample():
        import itertools

        lits = [1, -1, 2, -2]
        pool = list(itertools.combinations_with_replacement(lits, 3))
        for cl1 in pool[::3]:
            cnf = sat_io.Cnf3(2, (cl1,))
            brute = any(
                all(any((signs[abs(l) - 1] == (1 if l > 0 else -1)) for l in cl) for cl in cnf.clauses)
                for signs in itertools.product([1, -1], repeat=2)
            )
            reduced = sat_io.exhaustive_sat_search(sat_io.reduce_to_2of4(cnf))
            if brute != reduced.satisfiable:
                return f"round trip failed for {cl1}"
        return None

    def completeness_check():
        cnf = random_cnf3(4, 3, 7)
        inst = sat_io.reduce_to_2of4(cnf)
        found = sat_io.exhaustive_sat_search(inst)
        if not found.satisfiable:
            return "expected satisfiable sample formula"
        phi, psi = verifier.honest_witnesses(inst, found.best)
        a = verifier.completeness(inst.num_vars)
        exact = verifier.combined_accept_prob(phi, psi, inst)
        if abs(exact - a) > 1e-12:
            return f"honest acceptance {exact} != a = {a}"
        freq, stderr = verifier.run_protocol_sampled(phi, psi, inst, 50_000, 11)
        if abs(freq - exact) > 4 * max(stderr, 1e-6):
            return f"sampled acceptance {freq} too far from {exact}"
        return None

    def attack_determinism():
        cnf = random_cnf3(3, 2, 3)
        inst = sat_io.reduce_to_2of4(cnf)
        cfg = AttackConfig(starts=4, max_iters=300, seed=5)
        r1 = adversary.optimize_cheat(inst, cfg)
        r2 = adversary.optimize_cheat(inst, cfg)
        if r1.best_value != r2.best_value:
            return "attack is not deterministic under a fixed seed"
        return None

    return [
        ("s-value closed form vs pairwise oracle", closed_form_vs_pairwise),
        ("rank-two closed form vs dense oracle", rank_two_vs_dense),
        ("dense operator norm bound", norm_bound),
        ("reduction gadget truth table", gadget_table),
        ("reduction round-trip sample", roundtrip_sample),
        ("protocol completeness (exact + sampled)", completeness_check),
        ("attack determinism", attack_determinism),
    ]


def selftest() -> int:
    failures = 0
    for name, check in _selftest_checks():
        msg = check()
        if msg is None:
            print(f"PASS {name}")
        else:
            print(f"FAIL {name}: {msg}")
            failures += 1
    if failures:
        print(f"{failures} selftest check(s) failed", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
