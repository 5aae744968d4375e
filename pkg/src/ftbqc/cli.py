"""Command-line driver.

Exit codes: 0 on success, 1 for runtime or numerical failures, 2 for usage
and configuration errors.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from ftbqc.config import EXPERIMENTS, ConfigError, RunConfig, load_config

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ftbqc", description="Fault-tolerant blind quantum computation simulator.")
    p.add_argument("--config", metavar="PATH", help="key = value configuration file")
    p.add_argument("--experiment", choices=EXPERIMENTS)
    p.add_argument("--seed", type=int, metavar="U64")
    p.add_argument("--out", metavar="PATH", help="CSV/report file, or output directory for 'run'")
    p.add_argument("--level", type=int, metavar="N", help="concatenation level")
    p.add_argument("--e0", type=float, help="physical (level-0) block error rate")
    p.add_argument("--samples", type=int, metavar="N")
    p.add_argument("--workers", type=int, metavar="N", help="process pool size for sweeps")
    g = p.add_argument_group("prepare / correct")
    g.add_argument("--theta", default="0", help="input angle, a multiple of pi/4 (e.g. 3pi/4)")
    g.add_argument("--export-pattern", metavar="PATH", help="write the preparation pattern as text")
    g.add_argument("--error", default="I", help="Pauli error: 7-letter string (IIXIIII) or terms like X3 or X1Z5")
    g = p.add_argument_group("run")
    g.add_argument("--circuit", metavar="PATH", help="circuit file, one 'gate target [control] [angle]' per line")
    g.add_argument("--mode", choices=("logical-abstraction", "physical-block"), default="logical-abstraction")
    g.add_argument("--physical-noise", type=float, default=0.0, metavar="P",
                   help="depolarizing probability per physical qubit (physical-block mode)")
    g.add_argument("--allow-swaps", action="store_true", help="route non-adjacent gates through SWAPs")
    return p


def _emit(text: str, path: str | None, stream: TextIO) -> None:
    if path is None:
        stream.write(text)
    else:
        Path(path).write_text(text)


# prepare ------------------------------------------------------------------------


def grid_theta(text: str) -> float:
    from ftbqc.brickwork import parse_angle

    try:
        theta = parse_angle(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    k = theta / (math.pi / 4)
    if abs(k - round(k)) > 1e-9:
        raise UsageError(f"theta={text} is not a multiple of pi/4")
    return (round(k) % 8) * math.pi / 4


def cmd_prepare(cfg: RunConfig, args, out: TextIO) -> int:
    from ftbqc.encoding import encode_by_circuit
    from ftbqc.mbqc import encoding_pattern, run_pattern
    from ftbqc.statevector import fidelity, plus_theta

    theta = grid_theta(args.theta)
    pattern = encoding_pattern()
    if args.export_pattern:
        Path(args.export_pattern).write_text(pattern.to_text())
    report = run_pattern(pattern, theta, np.random.default_rng(cfg.seed))
    oracle = encode_by_circuit(plus_theta(theta))
    lines = [
        f"theta = {theta:.12f}",
        f"seed = {cfg.seed}",
        f"fidelity = {fidelity(report.block, oracle):.12f}",
        f"ancilla = {report.ancilla_count}",
        f"peak_qubits = {report.peak_qubits}",
        f"byproduct = {report.byproduct.unsigned().label()}",
        f"bases = {' '.join(sorted(b.value for b in pattern.basis_alphabet()))}",
    ]
    _emit("\n".join(lines) + "\n", cfg.out, out)
    return EXIT_OK


# correct -------------------------------------------------------------------------

_TERM = re.compile(r"([XYZ])(\d+)")


def parse_error(text: str, n: int = 7):
    """``IIXIIII`` or terms ``X3``, ``X1Z5`` (1-indexed qubits)."""
    from ftbqc.pauli import PauliOperator

    t = text.strip().upper().replace(",", "").replace(" ", "")
    if t in ("", "I"):
        return PauliOperator.from_string("I" * n)
    if re.fullmatch(r"[IXYZ]+", t) and len(t) == n:
        return PauliOperator.from_string(t)
    pos = 0
    op = PauliOperator.from_string("I" * n)
    for mt in _TERM.finditer(t):
        if mt.start() != pos:
            break
        q = int(mt.group(2))
        if not 1 <= q <= n:
            raise UsageError(f"qubit {q} out of range 1..{n}")
        op = op * PauliOperator.single(n, q - 1, mt.group(1))
        pos = mt.end()
    if pos != len(t):
        raise UsageError(f"cannot parse Pauli error {text!r}")
    return op.unsigned()


def cmd_correct(cfg: RunConfig, args, out: TextIO) -> int:
    from ftbqc.encoding import correct_error

    error = parse_error(args.error)
    if error.weight > 2:
        raise UsageError(f"error weight {error.weight} exceeds 2")
    theta = grid_theta(args.theta)
    rep = correct_error(error, theta, np.random.default_rng(cfg.seed))
    bits = "".join(map(str, rep.circuit_syndrome))
    lines = [
        f"error = {error.label()}",
        f"theta = {theta:.12f}",
        f"syndrome = {bits}",
        f"syndrome_bit_flip = {bits[3:]}",
        f"syndrome_phase_flip = {bits[:3]}",
        f"algebraic_syndrome = {''.join(map(str, rep.algebraic_syndrome))}",
        f"syndromes_agree = {rep.syndromes_agree}",
        f"correction = {rep.correction.unsigned().label()}",
        f"fidelity_before = {rep.fidelity_before:.12f}",
        f"fidelity_after = {rep.fidelity_after:.12f}",
    ]
    if rep.beyond_distance:
        lines.append("beyond distance: a logical error is possible")
    _emit("\n".join(lines) + "\n", cfg.out, out)
    return EXIT_OK if rep.syndromes_agree else EXIT_RUNTIME


# run ---------------------------------------------------------------------------------


def load_spec(args):
    from ftbqc.brickwork import BrickworkError, parse_circuit
    from ftbqc.protocol import ComputationSpec

    if not args.circuit:
        raise UsageError("--circuit is required for the run experiment")
    try:
        circuit = parse_circuit(Path(args.circuit).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read circuit {args.circuit}: {exc.strerror}") from exc
    except ValueError as exc:
        raise UsageError(f"{args.circuit}: {exc}") from exc
    try:
        return circuit, ComputationSpec.from_circuit(circuit, allow_swaps=args.allow_swaps)
    except BrickworkError as exc:
        raise UsageError(f"{args.circuit}: {exc}") from exc


def _tv(counts: dict, oracle: dict) -> float:
    total = sum(counts.values())
    keys = set(counts) | set(oracle)
    return 0.5 * sum(abs(counts.get(k, 0) / total - oracle.get(k, 0.0)) for k in keys)


CHUNK = 50_000


def cmd_run(cfg: RunConfig, args, out: TextIO) -> int:
    from ftbqc.pauli import PauliChannel
    from ftbqc.protocol import LogicalNoiseModel, run_protocol, run_protocol_batch
    from ftbqc.resources import level_error

    circuit, spec = load_spec(args)
    e_block = level_error(cfg.e0, cfg.level) if cfg.e0 > 0 else 0.0
    noise = LogicalNoiseModel(e_block)
    level = cfg.level if cfg.e0 > 0 else None
    e0 = cfg.e0 if cfg.e0 > 0 else None
    seeds = np.random.SeedSequence(cfg.seed).spawn(math.ceil(cfg.samples / CHUNK))
    counts: dict = {}
    flips = measured = 0
    out_dir = Path(cfg.out) if cfg.out else None
    tfile = None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        tfile = (out_dir / "transcripts.txt").open("w")
    try:
        if args.mode == "physical-block":
            p = args.physical_noise
            phys = PauliChannel.depolarizing(p) if p > 0 else None
            for ss in np.random.SeedSequence(cfg.seed).spawn(cfg.samples):
                res, tr = run_protocol(spec, None, noise, "physical-block", ss, physical_noise=phys)
                for k, c in res.counts().items():
                    counts[k] = counts.get(k, 0) + c
                flips += int(tr.true_flips.sum())
                measured += tr.true_flips.size
                if tfile:
                    tfile.write(tr.to_text())
        else:
            left = cfg.samples
            for ss in seeds:
                runs = min(CHUNK, left)
                left -= runs
                res, ts = run_protocol_batch(spec, runs, noise, ss, level=level, e0=e0)
                for k, c in res.counts().items():
                    counts[k] = counts.get(k, 0) + c
                flips += int(ts.true_flips.sum())
                measured += ts.true_flips.size
                if tfile:
                    tfile.write(ts.to_text())
    finally:
        if tfile:
            tfile.close()

    oracle = circuit.output_distribution()
    keys = sorted(set(counts) | {k for k, v in oracle.items() if v > 1e-15})
    hist = ["outcome,count,empirical,oracle"]
    for k in keys:
        c = counts.get(k, 0)
        hist.append(f"{''.join(map(str, k))},{c},{c / cfg.samples:.10g},{oracle.get(k, 0.0):.10g}")
    hist_text = "\n".join(hist) + "\n"
    if out_dir is not None:
        (out_dir / "histogram.csv").write_text(hist_text)
    rate = flips / measured
    sigma = math.sqrt(e_block * (1 - e_block) / measured)
    summary = [
        f"rows = {spec.n}",
        f"cols = {spec.m}",
        f"samples = {cfg.samples}",
        f"mode = {args.mode}",
        f"level = {cfg.level}",
        f"e0 = {cfg.e0}",
        f"e_block = {e_block:.10g}",
        f"node_measurements = {measured}",
        f"flip_rate = {rate:.10g}",
        f"flip_rate_sigma = {sigma:.3g}",
        f"tv_vs_oracle = {_tv(counts, oracle):.6f}",
    ]
    out.write(hist_text + "\n".join(summary) + "\n")
    return EXIT_OK


# sweeps --------------------------------------------------------------------------------


def _sweep_point(job):
    from ftbqc.resources import sweep_row

    L, n, resources, channel, decoy = job
    return sweep_row(L, n, resources, channel, decoy)


def _sweep(cfg: RunConfig, distances: Sequence[float]) -> list[dict]:
    resources, channel, decoy = cfg.resources(), cfg.channel(), cfg.decoy()
    jobs = [(L, n, resources, channel, decoy) for L in distances for n in sorted(cfg.levels)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            return list(pool.map(_sweep_point, jobs, chunksize=8))
    return [_sweep_point(j) for j in jobs]


def _sibling(path: str, tag: str) -> Path:
    p = Path(path)
    return p.with_name(f"{p.stem}_{tag}{p.suffix or '.csv'}")


def cmd_sweep_distance(cfg: RunConfig, args, out: TextIO) -> int:
    from ftbqc.resources import asymptotic_row, rows_to_csv

    if cfg.e0 <= 0:
        raise UsageError("sweeps need e0 > 0")
    rows = _sweep(cfg, cfg.distances)
    asym = [asymptotic_row(L, cfg.resources(), cfg.channel(), cfg.decoy()) for L in cfg.distances]
    if cfg.out is None:
        out.write(rows_to_csv(rows))
        return EXIT_OK
    Path(cfg.out).write_text(rows_to_csv(rows))
    _sibling(cfg.out, "asymptotic").write_text(rows_to_csv(asym))
    by = {(r["L_km"], r["n"]): r for r in rows}
    coding = 1 if 1 in cfg.levels else max(cfg.levels)
    out.write(f"L_km,N_coding_n{coding},N_noncoding_kNd,N_asymptotic,E_n{coding}\n")
    for L, a in zip(cfg.distances, asym):
        r = by[(L, coding)]
        out.write(f"{L:g},{r['N_n']:.6g},{r['k'] * r['N_lower']:.6g},{a['N_n']:.6g},{r['E']:.6g}\n")
    return EXIT_OK


def cmd_sweep_level(cfg: RunConfig, args, out: TextIO) -> int:
    from ftbqc.resources import rows_to_csv

    if cfg.e0 <= 0:
        raise UsageError("sweeps need e0 > 0")
    rows = _sweep(cfg, cfg.level_distances)
    if cfg.out is None:
        out.write(rows_to_csv(rows))
        return EXIT_OK
    Path(cfg.out).write_text(rows_to_csv(rows))
    for L in cfg.level_distances:
        sub = [r for r in rows if r["L_km"] == L]
        best = min(sub, key=lambda r: (r["R"], r["n"]))
        out.write(f"L_km={L:g} optimal_n={best['n']} R={best['R']:.6g}\n")
    return EXIT_OK


COMMANDS = {
    "prepare": cmd_prepare,
    "correct": cmd_correct,
    "run": cmd_run,
    "sweep-distance": cmd_sweep_distance,
    "sweep-level": cmd_sweep_level,
}


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = load_config(args.config, {
            "experiment": args.experiment, "seed": args.seed, "out": args.out,
            "level": args.level, "e0": args.e0, "samples": args.samples, "workers": args.workers,
        })
        if cfg.experiment is None:
            raise UsageError("no experiment selected (use --experiment or the config key)")
        return COMMANDS[cfg.experiment](cfg, args, out)
    except (UsageError, ConfigError) as exc:
        print(f"ftbqc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError, RuntimeError, OSError) as exc:
        print(f"ftbqc: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
