"""Command line entry point: ``noisykv <command> ...``.

Exit status: 0 on success, 1 on usage errors, 2 on runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from . import automata
from .automata import DfaFormatError, GenParams
from .devices import CounterDevice, DfaOracle, NoisyInputDevice, NoisyOutputDevice, PathologicalDevice, statistical_distance
from .experiments import SCALES, parse_config, reproduce_table, run_experiment
from .learner import PacParams, learn_pac
from .metrics import RECORD_FIELDS, _fmt
from .words import DESK_STAT, PAPER_STAT, StatParams, WordDistribution, chernoff_sample_size, rng_for

log = logging.getLogger("noisykv")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_noise_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--noise", choices=["none", "noisy_output", "noisy_input", "counter", "pathological"], default="none")
    p.add_argument("--p", type=float, help="noise probability for noisy_output / noisy_input")
    p.add_argument("--counter", type=Path, help="counter-function file (for --noise counter)")
    p.add_argument("--w-a", default="0 0 0", help="pathological prefix, letters separated by spaces")
    p.add_argument("--noise-seed", type=int, default=0)


def _add_stat_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--scale", choices=sorted(SCALES), default="desk")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="noisykv", description="KV learning of DFAs behind noisy membership oracles")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a random DFA")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=Path)
    g.add_argument("--min-states", type=int, default=20)
    g.add_argument("--max-states", type=int, default=60)
    g.add_argument("--min-alphabet", type=int, help="default 3, or 5 with --pathological")
    g.add_argument("--max-alphabet", type=int, default=20)
    g.add_argument("--pathological", action="store_true", help="reject the cone aaa·Σ* (alphabet 5..20)")
    g.add_argument("--plus-out", type=Path, help="with --pathological: also write the DFA accepting the cone")

    lp = sub.add_parser("learn", help="learn a DFA through a (noisy) membership oracle")
    lp.add_argument("dfa", type=Path)
    _add_noise_flags(lp)
    lp.add_argument("--mu", type=float, default=0.01)
    lp.add_argument("--epsilon", type=float, default=0.005)
    lp.add_argument("--delta", type=float, default=0.005)
    lp.add_argument("--maxround", type=int, default=250)
    lp.add_argument("--seed", type=int, default=0)
    lp.add_argument("--out", type=Path)
    lp.add_argument("--trace", type=Path, help="CSV of round, hypothesis size, queries so far")

    dp = sub.add_parser("distance", help="estimate the distance between two DFAs (the second may be noisy)")
    dp.add_argument("first", type=Path)
    dp.add_argument("second", type=Path)
    _add_noise_flags(dp)
    _add_stat_flags(dp)
    dp.add_argument("--mu", type=float, default=0.01)
    dp.add_argument("--seed", type=int, default=0)
    dp.add_argument("--exact", action="store_true", help="exact distance (both operands must be plain DFAs)")

    ep = sub.add_parser("eld-check", help="is the DFA equal-length-distinguishing?")
    ep.add_argument("dfa", type=Path)

    xp = sub.add_parser("experiment", help="run an experiment config, write records CSV")
    xp.add_argument("config", type=Path)
    xp.add_argument("--out", type=Path)

    tp = sub.add_parser("reproduce-table", help="table-shaped CSV for one of the tables 2-9")
    tp.add_argument("table_id", type=int, choices=range(2, 10), metavar="TABLE")
    tp.add_argument("--scale", choices=sorted(SCALES), default="desk")
    tp.add_argument("--dfa-count", type=int)
    tp.add_argument("--maxround", type=int)
    tp.add_argument("--seed", type=int, default=0)
    tp.add_argument("--parallelism", type=int, default=1)
    tp.add_argument("--out", type=Path)
    return parser


def _write(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _stat(args) -> StatParams:
    base = PAPER_STAT if args.scale == "paper" else DESK_STAT
    stat = StatParams(alpha=args.alpha or base.alpha, gamma=args.gamma or base.gamma)
    if args.scale == "paper":
        print(f"warning: paper scale uses {chernoff_sample_size(stat):,} samples per distance",
              file=sys.stderr)
    return stat


def _device(args, dfa):
    kind = args.noise
    if kind == "none":
        return DfaOracle(dfa)
    if kind in ("noisy_output", "noisy_input"):
        if args.p is None:
            raise UsageError(f"--noise {kind} needs --p")
        cls = NoisyOutputDevice if kind == "noisy_output" else NoisyInputDevice
        return cls(dfa, args.p, args.noise_seed)
    if kind == "counter":
        if args.counter is None:
            raise UsageError("--noise counter needs --counter FILE")
        return CounterDevice(dfa, automata.loads_counter(args.counter.read_text()))
    w_a = tuple(int(t) for t in args.w_a.split())
    return PathologicalDevice(dfa, w_a, args.noise_seed)


def cmd_generate(args) -> int:
    min_alphabet = args.min_alphabet or (5 if args.pathological else 3)
    gen = GenParams(args.min_states, args.max_states, min_alphabet, args.max_alphabet, args.seed)
    if args.pathological:
        dfa, w_a = automata.random_pathological_dfa(gen)
        if args.plus_out:
            automata.save(automata.plus_variant(dfa, w_a), args.plus_out)
    else:
        dfa = automata.random_dfa(gen)
    _write(automata.dumps(dfa), args.out)
    return 0


def cmd_learn(args) -> int:
    dfa = automata.load(args.dfa)
    oracle = _device(args, dfa)
    d = WordDistribution(args.mu, dfa.alphabet_size)
    pac = PacParams(args.epsilon, args.delta, args.maxround)
    outcome = learn_pac(oracle, d, pac, rng_for(args.seed, "learner"), trace=args.trace is not None)
    _write(automata.dumps(outcome.learned), args.out)
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["round", "hypothesis_size", "queries"])
            w.writerows(outcome.trace)
    print(
        f"rounds={outcome.rounds_used} stopped_by={outcome.stopped_by.value} "
        f"states={outcome.learned.state_count} queries={outcome.membership_queries}",
        file=sys.stderr,
    )
    return 0


def cmd_distance(args) -> int:
    a, b = automata.load(args.first), automata.load(args.second)
    if args.exact:
        if args.noise != "none":
            raise UsageError("--exact works on plain DFAs only")
        print(repr(automata.distance(a, b, args.mu)))
        return 0
    d = WordDistribution(args.mu, a.alphabet_size)
    first = DfaOracle(a)
    second = first if args.first.resolve() == args.second.resolve() and args.noise == "none" else _device(args, b)
    print(repr(statistical_distance(first, second, d, _stat(args), rng_for(args.seed, "distance"))))
    return 0


def cmd_eld_check(args) -> int:
    dfa = automata.load(args.dfa)
    witness = automata.eld_witness(dfa)
    if witness is None:
        print("false")
    else:
        print("true")
        print(f"witness {witness[0]} {witness[1]}")
    return 0


def cmd_experiment(args) -> int:
    config = parse_config(args.config.read_text())
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.DictWriter(fh, fieldnames=RECORD_FIELDS, lineterminator="\n")
    writer.writeheader()

    def flush(rec):
        writer.writerow({k: _fmt(v) for k, v in rec.row().items()})
        fh.flush()

    try:
        run_experiment(config, on_record=flush)
    finally:
        if args.out:
            fh.close()
    return 0


def cmd_reproduce_table(args) -> int:
    if args.scale == "paper":
        print("warning: paper scale runs 15.2M-sample distances and takes many hours", file=sys.stderr)
    text = reproduce_table(
        args.table_id, args.scale, dfa_count=args.dfa_count, maxround=args.maxround,
        master_seed=args.seed, parallelism=args.parallelism,
    )
    _write(text, args.out)
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "learn": cmd_learn,
    "distance": cmd_distance,
    "eld-check": cmd_eld_check,
    "experiment": cmd_experiment,
    "reproduce-table": cmd_reproduce_table,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"noisykv: error: {exc}", file=sys.stderr)
        return 1
    except DfaFormatError as exc:
        print(f"noisykv: malformed input: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"noisykv: error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        print("noisykv: interrupted", file=sys.stderr)
        return 2


cli_dispatch = main

if __name__ == "__main__":
    sys.exit(main())
