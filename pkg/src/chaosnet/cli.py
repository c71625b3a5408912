"""Command line entry point: ``chaosnet <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

import numpy as np

from . import bridge, codec, experiment, graph, mlp, topology
from .dynamics import BoolConfig, resolve_map


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def cmd_certify(args) -> int:
    if args.model:
        model = mlp.MlpModel.load(args.model)
        cert = bridge.certify_network(bridge.MlpOracle(model))
        name = args.model
    else:
        f = resolve_map(args.map)
        cert = graph.certify_chaos(f)
        name = f.name or args.map
    print(cert.report(name))
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(cert.to_json() + "\n")
    else:
        print(cert.to_json())
    return 0


def cmd_dataset(args) -> int:
    f = resolve_map(args.map)
    ds = codec.enumerate_dataset(f, args.n if args.n else f.n, args.k, args.scheme)
    ds.write_csv(args.out)
    print(f"wrote {len(ds)} samples ({ds.p} inputs, {ds.q} outputs) to {args.out}")
    return 0


def cmd_steer(args) -> int:
    f = resolve_map(args.map)
    word = graph.steer(graph.build_graph(f), BoolConfig.parse(args.src), BoolConfig.parse(args.dst))
    if word is None:
        print(f"no strategy drives {args.src} to {args.dst}")
        return 1
    print(str(word) if len(word) else "(empty strategy)")
    return 0


def cmd_probe(args) -> int:
    f = resolve_map(args.map)
    reports = topology.separated_set_curve(
        f, _ints(args.t), args.epsilon, args.sample_size, args.seed, args.strategy_length
    )
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["t", "epsilon", "h_lower"])
    for r in reports:
        w.writerow([r.t, r.epsilon, r.h_lower])
    if args.horizon:
        exp = topology.expansivity_probe(f, args.trials, args.horizon, args.seed, args.exhaustive)
        print(f"expansivity: {exp}", file=sys.stderr)
    return 0


def cmd_train(args) -> int:
    ds = codec.read_dataset_csv(args.dataset)
    if args.split:
        ds.scheme = "2-split"
    reports = []
    for r in range(args.reps):
        seed = experiment.derive_seed(args.seed, args.dataset, args.hidden, args.epochs, r)
        pred, test, models = experiment.train_cell_run(ds, args.hidden, args.epochs, seed)
        reports.append(mlp.evaluate_predictions(pred, test))
        if r == 0:
            if args.save_model:
                models[0].save(args.save_model)
            if args.log:
                mlp.write_history(models[0], args.log)
            if args.series:
                experiment.emit_prediction_series(pred, test, args.series)
    agg = mlp.SuccessReport.combine(reports)
    mean, std = agg.mean, agg.std
    for name in agg.names:
        print(f"{name:>9}: {mean[name]:6.2f}% +/- {std[name]:.2f}")
    return 0


def cmd_build_network(args) -> int:
    """Train a CI-MLP on all (x, s) -> F_f(s, x) pairs and report whether it is exact."""
    f = resolve_map(args.map)
    ds = codec.step_dataset(f)
    model = mlp.init_model((ds.p, args.hidden, ds.q), args.seed)
    model = mlp.lbfgs_train(model, ds, ds, mlp.TrainConfig(max_epochs=args.epochs, hidden=args.hidden))
    model.save(args.out)
    oracle = bridge.MlpOracle(model)
    extracted = bridge.extract_map(oracle)
    cert = graph.certify_chaos(extracted)
    exact = extracted == f
    print(f"saved model to {args.out}; extracted map {'equals' if exact else 'differs from'} {args.map}")
    print(cert.report("extracted"))
    return 0


def cmd_experiment(args) -> int:
    cfg = experiment.ExperimentConfig.from_file(args.config)
    if args.out:
        cfg.out = args.out
    rows = experiment.run_experiment(cfg)
    print(f"wrote {len(rows)} rows to {cfg.out}/results.csv")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chaosnet", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("certify", help="decide whether iterations of a map (or a saved network) are chaotic")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--map", help="builtin (f0, f1(n), paper_f, paper_g) or map file")
    src.add_argument("--model", help="saved step network (see build-network)")
    c.add_argument("--json", help="write the machine-readable certificate here")
    c.set_defaults(func=cmd_certify)

    d = sub.add_parser("dataset", help="enumerate a learning dataset to CSV")
    d.add_argument("--map", required=True)
    d.add_argument("--n", type=int)
    d.add_argument("--k", type=int, default=3)
    d.add_argument("--scheme", choices=codec.SCHEMES, default="1")
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_dataset)

    s = sub.add_parser("steer", help="shortest strategy between two configurations")
    s.add_argument("--map", required=True)
    s.add_argument("--from", dest="src", required=True)
    s.add_argument("--to", dest="dst", required=True)
    s.set_defaults(func=cmd_steer)

    pr = sub.add_parser("probe", help="separated-set growth (CSV) and expansivity")
    pr.add_argument("--map", required=True)
    pr.add_argument("--t", default="1,2,3,4,5,6", help="comma-separated horizons")
    pr.add_argument("--epsilon", type=float, default=0.5)
    pr.add_argument("--sample-size", type=int, default=200)
    pr.add_argument("--strategy-length", type=int)
    pr.add_argument("--horizon", type=int, default=0, help="expansivity horizon (0 = skip)")
    pr.add_argument("--trials", type=int, default=1000)
    pr.add_argument("--exhaustive", action="store_true")
    pr.add_argument("--seed", type=int, default=0)
    pr.set_defaults(func=cmd_probe)

    t = sub.add_parser("train", help="train and score networks on a dataset CSV")
    t.add_argument("--dataset", required=True)
    t.add_argument("--hidden", type=int, default=25)
    t.add_argument("--epochs", type=int, default=500)
    t.add_argument("--reps", type=int, default=10)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--split", action="store_true", help="one network per output")
    t.add_argument("--save-model")
    t.add_argument("--log", help="training log CSV of the first repetition")
    t.add_argument("--series", help="prediction series CSV of the first repetition")
    t.set_defaults(func=cmd_train)

    b = sub.add_parser("build-network", help="train a recurrent step network for a map")
    b.add_argument("--map", required=True)
    b.add_argument("--hidden", type=int, default=16)
    b.add_argument("--epochs", type=int, default=2000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build_network)

    e = sub.add_parser("experiment", help="run the training matrix from a key=value config")
    e.add_argument("--config", required=True)
    e.add_argument("--out", help="override the output directory")
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
