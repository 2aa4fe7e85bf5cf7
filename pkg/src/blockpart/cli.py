"""Command-line entry point: partition / train / predict / eval / sweep / synth.

Defaults can come from a TOML config file (one table per subcommand); flags
given on the command line win over the config.  Exit codes: 0 success,
1 input/parse error, 2 optimization or dimension error.  Progress and
warnings go to stderr; only results are printed to stdout.
"""

from __future__ import annotations

import argparse
import sys
from time import perf_counter
from types import SimpleNamespace

from .dataio import holdout_split, load_dataset, save_dataset
from .errors import DataFormatError, OptimizationError
from .logistic import TrainConfig
from .metrics import label_propensities, precision_at_k, psp_at_k, recall_at_k, speedup
from .partition import BpConfig, Partition, export_permuted_matrix, fit_partition
from .pipeline import (BpModel, predict_bp, read_mults_csv, read_predictions,
                       write_mults_csv, write_predictions)
from .pipeline import train_with_partition
from .sparse import column_sums, take_dataset_rows
from .synth import PlantedSpec, generate
from .tuning import search_q
from . import serialize


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_config(path: str) -> dict:
    try:
        import tomllib
    except ModuleNotFoundError:  # Python 3.10
        import tomli as tomllib
    with open(path, "rb") as fh:
        return tomllib.load(fh)


_DEFAULTS: dict[str, dict] = {
    "partition": {"lam": 1.0, "q": "auto", "q_max": 16, "min_labels": 1, "seed": 0,
                  "normalize": True, "image_rows": 400, "threads": 1},
    "train": {"lam": 1.0, "q": "auto", "q_max": 16, "min_labels": 1, "seed": 0,
              "normalize": True, "partition": None, "C": 1.0, "tol": 1e-4,
              "max_epochs": 100, "prune": 1e-6, "balance": False, "threads": 1},
    "predict": {"k": 5, "normalize": True, "threads": 1},
    "eval": {"k_list": "1,3,5", "mults": None, "out": None, "threads": 1},
    "sweep": {"q": "auto", "q_max": 16, "min_labels": 1, "k_list": "1,3,5", "seed": 0,
              "normalize": True, "C": 1.0, "tol": 1e-4, "max_epochs": 100,
              "prune": 1e-6, "balance": False, "threads": 1},
    "synth": {"q_true": 3, "instances_per_block": 200, "labels_per_block": 20,
              "d": 50, "density": 0.8, "noise": 0.01, "popular": 0,
              "separation": 10.0, "num_labels": None, "test_fraction": 0.2,
              "seed": 0, "threads": 1},
}


def _parse_q(text) -> int | str:
    if isinstance(text, int):
        return text
    if text == "auto":
        return "auto"
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"--q must be 'auto' or an integer, got {text!r}") from None


def _parse_int_list(text) -> list[int]:
    if isinstance(text, list):
        return [int(x) for x in text]
    return [int(tok) for tok in str(text).split(",") if tok]


def _parse_float_list(text) -> list[float]:
    if isinstance(text, list):
        return [float(x) for x in text]
    return [float(tok) for tok in str(text).split(",") if tok]


def _merged_options(args: argparse.Namespace, command: str) -> SimpleNamespace:
    eff = dict(_DEFAULTS[command])
    if getattr(args, "config", None):
        section = _load_config(args.config).get(command, {})
        unknown = sorted(set(section) - set(eff))
        if unknown:
            raise DataFormatError(f"config: unknown keys {unknown} in [{command}]")
        eff.update(section)
    for key in eff:
        val = getattr(args, key, None)
        if val is not None:
            eff[key] = val
    for key, val in vars(args).items():
        if key not in eff and key not in ("config", "handler", "command"):
            eff[key] = val
    return SimpleNamespace(**eff)


def _train_config(o) -> TrainConfig:
    return TrainConfig(reg_strength=o.C, tol=o.tol, max_epochs=o.max_epochs,
                       seed=o.seed, prune_threshold=o.prune,
                       balance_classes=o.balance, threads=o.threads)


def _resolve_partition(ds, o) -> Partition:
    q = _parse_q(o.q)
    if q == "auto":
        res = search_q(ds, o.lam, o.q_max, seed=o.seed, min_labels=o.min_labels)
        _err(f"q search chose q = {res.chosen_q}")
        return res.partition
    cfg = BpConfig(lam=o.lam, q=q, min_labels_per_cluster=o.min_labels, seed=o.seed)
    return fit_partition(ds, cfg)


def _cmd_partition(o) -> int:
    ds = load_dataset(o.train, normalize=o.normalize)
    q = _parse_q(o.q)
    t0 = perf_counter()
    if q == "auto":
        res = search_q(ds, o.lam, o.q_max, seed=o.seed, min_labels=o.min_labels)
        part = res.partition
        with open(o.out + ".qsearch.csv", "w", encoding="utf-8") as fh:
            fh.write("q,captured_proportion,any_empty_pair\n")
            for rep in res.reports:
                fh.write(f"{rep.q},{rep.captured_proportion!r},{int(rep.any_empty_pair)}\n")
        print(f"chosen q: {res.chosen_q}")
    else:
        if q == 1:
            _err("warning: q = 1 keeps a single cluster; expect no prediction speedup")
        part = fit_partition(ds, BpConfig(lam=o.lam, q=q,
                                          min_labels_per_cluster=o.min_labels, seed=o.seed))
    _err(f"data partitioning: {perf_counter() - t0:.2f} s")
    serialize.save(part, o.out + ".partition.bpx")
    with open(o.out + ".partition.json", "w", encoding="utf-8") as fh:
        fh.write(serialize.partition_to_json(part))
    pixels, csv_text = export_permuted_matrix(ds.labels, part, o.image_rows)
    serialize.write_pgm(pixels, o.out + ".permuted.pgm")
    with open(o.out + ".permuted.csv", "w", encoding="utf-8") as fh:
        fh.write(csv_text)
    final_f = part.objective_trace[-1] if part.objective_trace.size else float("nan")
    _err(f"objective f = {final_f:g} after {part.objective_trace.size} iterations")
    return 0


def _cmd_train(o) -> int:
    ds = load_dataset(o.train, normalize=o.normalize)
    t0 = perf_counter()
    if o.partition:
        part = serialize.load(o.partition)
        if not isinstance(part, Partition):
            raise DataFormatError(f"{o.partition} does not contain a partition")
    else:
        part = _resolve_partition(ds, o)
    t_part = perf_counter() - t0
    t0 = perf_counter()
    model = train_with_partition(ds, part, _train_config(o))
    t_train = perf_counter() - t0
    serialize.save(model, o.out)
    _err(f"data partitioning: {t_part:.2f} s")
    _err(f"training: {t_train:.2f} s")
    return 0


def _cmd_predict(o) -> int:
    model = serialize.load(o.model)
    if not isinstance(model, BpModel):
        raise DataFormatError(f"{o.model} does not contain a trained model")
    ds = load_dataset(o.test, normalize=o.normalize)
    result = predict_bp(model, ds.features, o.k)
    with open(o.out, "w", encoding="utf-8") as fh:
        write_predictions(result, fh)
    with open(o.out + ".mults.csv", "w", encoding="utf-8") as fh:
        write_mults_csv(result, fh)
    _err(f"predicted {result.n} instances, mean multiplications "
         f"{float(result.mults_used.mean()):.1f}")
    return 0


def _cmd_eval(o) -> int:
    with open(o.predictions, "r", encoding="utf-8") as fh:
        top_labels, _ = read_predictions(fh)
    test = load_dataset(o.test, normalize=False)
    train = load_dataset(o.train, normalize=False)
    if len(top_labels) != test.n:
        raise ValueError(f"{len(top_labels)} prediction rows for {test.n} test instances")
    props = label_propensities(column_sums(train.labels), train.n)
    ks = _parse_int_list(o.k_list)
    mults_path = o.mults or (o.predictions + ".mults.csv")
    sp = None
    try:
        with open(mults_path, "r", encoding="utf-8") as fh:
            mults = read_mults_csv(fh)
        sp = float(test.labels.cols) / float(mults.mean())
    except FileNotFoundError:
        _err(f"note: no multiplication ledger at {mults_path}; skipping speedup")

    rows = []
    for k in ks:
        rows.append(("P", k, precision_at_k(test.labels, top_labels, k)))
        rows.append(("R", k, recall_at_k(test.labels, top_labels, k)))
        rows.append(("PSP", k, psp_at_k(test.labels, top_labels, props, k)))
    lines = ["metric,k,value"]
    for name, k, val in rows:
        lines.append(f"{name},{k},{val!r}")
    if sp is not None:
        lines.append(f"speedup,,{sp!r}")
    csv_text = "\n".join(lines) + "\n"
    if o.out:
        with open(o.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    header = [f"P@{k}" for k in ks] + [f"PSP@{k}" for k in ks] + ["Speedup"]
    values = [f"{100 * v:.2f}" for name, k, v in rows if name == "P"]
    values += [f"{100 * v:.2f}" for name, k, v in rows if name == "PSP"]
    values += [f"{round(sp)}x" if sp is not None else "-"]
    width = max(len(h) for h in header) + 2
    print("".join(h.ljust(width) for h in header))
    print("".join(v.ljust(width) for v in values))
    return 0


def _cmd_sweep(o) -> int:
    lambdas = _parse_float_list(o.lambdas)
    if not lambdas:
        raise ValueError("--lambdas must name at least one value")
    ks = _parse_int_list(o.k_list)
    train = load_dataset(o.train, normalize=o.normalize)
    test = load_dataset(o.test, normalize=o.normalize)
    m = train.labels.cols
    lines = ["lambda," + ",".join(f"P@{k}" for k in ks) + ",speedup"]
    for lam in lambdas:
        opts = SimpleNamespace(**{**vars(o), "lam": lam})
        part = _resolve_partition(train, opts)
        model = train_with_partition(train, part, _train_config(o))
        result = predict_bp(model, test.features, max(ks))
        precs = [precision_at_k(test.labels, result.top_labels, k) for k in ks]
        sp = speedup(result, m)
        lines.append(f"{lam!r}," + ",".join(repr(p) for p in precs) + f",{sp!r}")
        _err(f"lam = {lam:g}: " + " ".join(f"P@{k}={p:.4f}" for k, p in zip(ks, precs))
             + f" speedup={sp:.2f}x")
    with open(o.out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return 0


def _cmd_synth(o) -> int:
    spec = PlantedSpec(q_true=o.q_true, instances_per_block=o.instances_per_block,
                       labels_per_block=o.labels_per_block, d=o.d,
                       in_block_density=o.density, off_block_noise=o.noise,
                       popular_labels=o.popular, feature_separation=o.separation,
                       seed=o.seed, num_labels=o.num_labels)
    ds, truth = generate(spec)
    train, test, train_rows, _ = holdout_split(ds, o.test_fraction, seed=o.seed,
                                               stratify_by=truth.instance_cluster_of)
    save_dataset(train, o.out + ".train.txt")
    save_dataset(test, o.out + ".test.txt")
    truth_train = Partition(q=truth.q, lam=truth.lam,
                            instance_cluster_of=truth.instance_cluster_of[train_rows],
                            label_clusters=truth.label_clusters,
                            objective_trace=truth.objective_trace)
    serialize.save(truth_train, o.out + ".truth.bpx")
    with open(o.out + ".truth.json", "w", encoding="utf-8") as fh:
        fh.write(serialize.partition_to_json(truth_train))
    _err(f"wrote {train.n} train / {test.n} test instances, d = {spec.d}, m = {spec.m}")
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML config file; flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blockpart",
                                     description="Block-wise instance/label co-clustering "
                                                 "for fast multi-label prediction")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("partition", help="fit the co-clustering and export it")
    p.add_argument("train")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--q")
    p.add_argument("--q-max", dest="q_max", type=int)
    p.add_argument("--min-labels", dest="min_labels", type=int)
    p.add_argument("--image-rows", dest="image_rows", type=int)
    p.add_argument("--no-normalize", dest="normalize", action="store_const", const=False)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(handler=_cmd_partition)

    p = sub.add_parser("train", help="train router and per-cluster classifiers")
    p.add_argument("train")
    p.add_argument("--partition", help="previously saved partition file")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--q")
    p.add_argument("--q-max", dest="q_max", type=int)
    p.add_argument("--min-labels", dest="min_labels", type=int)
    p.add_argument("--C", dest="C", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-epochs", dest="max_epochs", type=int)
    p.add_argument("--prune", type=float)
    p.add_argument("--balance", action="store_const", const=True)
    p.add_argument("--no-normalize", dest="normalize", action="store_const", const=False)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(handler=_cmd_train)

    p = sub.add_parser("predict", help="predict top-k labels for a test file")
    p.add_argument("model")
    p.add_argument("test")
    p.add_argument("--k", type=int)
    p.add_argument("--no-normalize", dest="normalize", action="store_const", const=False)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(handler=_cmd_predict)

    p = sub.add_parser("eval", help="score predictions against ground truth")
    p.add_argument("predictions")
    p.add_argument("test")
    p.add_argument("train", help="training file, used for label propensities")
    p.add_argument("--mults", help="multiplication ledger (default: predictions + .mults.csv)")
    p.add_argument("--k", dest="k_list", help="comma-separated k values")
    p.add_argument("--out", help="metrics CSV path")
    _add_common(p)
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser("sweep", help="accuracy/speedup as a function of lambda")
    p.add_argument("train")
    p.add_argument("test")
    p.add_argument("--lambdas", required=True, help="comma-separated lambda values")
    p.add_argument("--q")
    p.add_argument("--q-max", dest="q_max", type=int)
    p.add_argument("--min-labels", dest="min_labels", type=int)
    p.add_argument("--k", dest="k_list", help="comma-separated k values")
    p.add_argument("--C", dest="C", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-epochs", dest="max_epochs", type=int)
    p.add_argument("--prune", type=float)
    p.add_argument("--balance", action="store_const", const=True)
    p.add_argument("--no-normalize", dest="normalize", action="store_const", const=False)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(handler=_cmd_sweep)

    p = sub.add_parser("synth", help="generate a planted block-diagonal dataset")
    p.add_argument("--q-true", dest="q_true", type=int)
    p.add_argument("--instances-per-block", dest="instances_per_block", type=int)
    p.add_argument("--labels-per-block", dest="labels_per_block", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--density", type=float)
    p.add_argument("--noise", type=float)
    p.add_argument("--popular", type=int)
    p.add_argument("--separation", type=float)
    p.add_argument("--num-labels", dest="num_labels", type=int)
    p.add_argument("--test-fraction", dest="test_fraction", type=float)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(handler=_cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "handler", None) is None:
        parser.print_help(sys.stderr)
        return 1
    try:
        opts = _merged_options(args, args.command)
        return args.handler(opts)
    except DataFormatError as exc:
        _err(f"error: {exc}")
        return 1
    except OSError as exc:
        _err(f"error: {exc}")
        return 1
    except OptimizationError as exc:
        _err(f"error: {exc}")
        return 2
    except ValueError as exc:
        _err(f"error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
