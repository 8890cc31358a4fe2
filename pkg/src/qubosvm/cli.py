"""Command-line interface.

One executable with subcommands covering the whole toolkit: synthetic data
generation, dimensionality reduction, training (sampled or classical),
prediction, evaluation, the full experiment protocol, and a standalone QUBO
solver. Flags mirror the library parameter names.

Conventions shared by every subcommand:

* the resolved configuration is printed before any work happens,
* output files are written atomically (temp file + rename),
* a missing --seed falls back to the QUBOSVM_SEED environment variable,
  then to 0, and equal seeds give byte-identical outputs,
* exit code 0 on success, 1 on usage or data errors, 2 on internal errors.

--threads is accepted everywhere for interface stability and caps worker
processes; the current implementation is serial, so results never depend
on it.
"""

from __future__ import annotations

import argparse
import os
import sys
import traceback
from pathlib import Path

import numpy as np

from ._util import atomic_write_text, format_real, parse_ints, parse_points
from .dataset import (
    BlobSpec,
    Dataset,
    PressureProfileSpec,
    generate_synthetic,
    load_csv,
    load_feature_csv,
    save_csv,
)
from .kernels import KERNEL_KINDS, KernelParams
from .metrics import (
    adjacency_errors,
    binary_confusion,
    binary_report,
    confusion,
    format_binary_report,
    format_confusion,
    multiclass_accuracy,
    report_kv_lines,
)
from .multiclass import (
    MANIFEST_HEADER,
    load_multiclass,
    multiclass_decision_values,
    predict_multiclass_batch,
    save_multiclass,
    train_multiclass,
    train_multiclass_classical,
)
from .pca import PcaReducer
from .pipeline import (
    apply_bias_adjustment,
    load_config,
    run_experiment,
    spec_from_options,
)
from .qubo import EncodingParams, build_qubo, encode_alphas, load_qubo, max_alpha, qubo_energy
from .solver import AnnealSchedule, solve_anneal, solve_exhaustive
from .svm import (
    MODEL_HEADER,
    EnsembleModel,
    TrainConfig,
    ensemble_decision_values,
    load_model,
    predict_labels,
    save_model,
    train_binary,
    train_classical,
)


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with code 1, not 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _resolve_seed(value: int | None) -> int:
    """Flag value, else QUBOSVM_SEED, else 0."""
    if value is not None:
        return int(value)
    env = os.environ.get("QUBOSVM_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ValueError(f"QUBOSVM_SEED must be an integer, got {env!r}") from None


def _show(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _print_config(settings: dict) -> None:
    print("resolved configuration:")
    for key, value in settings.items():
        print(f"  {key} = {_show(value)}")


def _load_any_model(path):
    """Load either a single model file or a multiclass manifest, telling
    them apart by the format header."""
    path = Path(path)
    lines = path.read_text().splitlines()
    first = lines[0].strip() if lines else ""
    if first == MANIFEST_HEADER:
        return "multiclass", load_multiclass(path)
    if first == MODEL_HEADER:
        return "binary", load_model(path)
    raise ValueError(f"{path}: neither a model file nor a manifest")


def _model_dim(kind: str, model) -> int:
    data = model.data if kind == "binary" else model.classifiers[0].data
    return data.dim


def _emit(text: str, output, what: str) -> None:
    if output:
        atomic_write_text(output, text)
        print(f"wrote {what} to {output}")
    else:
        sys.stdout.write(text)


# --- datagen ------------------------------------------------------------------


def _cmd_datagen(args) -> int:
    seed = _resolve_seed(args.seed)
    if args.kind == "blobs":
        if args.centers is None or args.counts is None:
            raise ValueError("datagen --kind blobs needs --centers and --counts")
        spec = BlobSpec(
            centers=parse_points(args.centers),
            counts=parse_ints(args.counts),
            spread=args.spread,
            class_ids=parse_ints(args.class_ids) if args.class_ids else None,
        )
        _print_config(
            {
                "kind": "blobs",
                "centers": args.centers,
                "counts": args.counts,
                "spread": args.spread,
                "class_ids": args.class_ids,
                "label": args.label,
                "seed": seed,
                "output": args.output,
            }
        )
    else:
        if args.classes is None:
            raise ValueError("datagen --kind profiles needs --classes")
        spec = PressureProfileSpec(
            num_classes=args.classes,
            counts=parse_ints(args.counts) if args.counts else 9,
            taps=args.taps,
            noise=args.noise,
            angle_start=args.angle_start,
            angle_step=args.angle_step,
            class_ids=parse_ints(args.class_ids) if args.class_ids else None,
        )
        _print_config(
            {
                "kind": "profiles",
                "classes": args.classes,
                "counts": args.counts if args.counts else "9 per class",
                "taps": args.taps,
                "noise": args.noise,
                "angle_start": args.angle_start,
                "angle_step": args.angle_step,
                "class_ids": args.class_ids,
                "label": args.label,
                "seed": seed,
                "output": args.output,
            }
        )
    data = generate_synthetic(spec, seed)
    save_csv(data, args.output, args.label)
    print(
        f"wrote {data.num_points} points ({data.dim} features, "
        f"{len(data.class_ids())} classes) to {args.output}"
    )
    return 0


# --- pca ----------------------------------------------------------------------


def _cmd_pca(args) -> int:
    _print_config(
        {
            "data": args.data,
            "label": args.label,
            "dim": args.dim,
            "standardize": args.standardize,
            "output": args.output,
        }
    )
    data = load_csv(args.data, args.label)
    reducer = PcaReducer(n_components=args.dim, standardize=args.standardize)
    transformed = reducer.fit(data.features).transform(data.features)
    names = tuple(f"pc{i + 1}" for i in range(args.dim))
    save_csv(Dataset(transformed, data.labels, names), args.output, args.label)
    for i, variance in enumerate(reducer.explained_variance_, start=1):
        print(f"component {i} variance {variance:.6g}")
    print(f"wrote {data.num_points} points ({args.dim} features) to {args.output}")
    return 0


# --- train --------------------------------------------------------------------


def _sampler_stats(ensemble: EnsembleModel) -> tuple[float, int]:
    """(energy of the best member, number of distinct members).

    Recomputed from the stored coefficients: member alphas re-encode
    uniquely to their bit vector, whose energy on the rebuilt problem is
    exactly what the sampler reported.
    """
    enc = ensemble.encoding
    problem = build_qubo(ensemble.data, enc)
    bits = encode_alphas(ensemble.members[0].alphas, enc.base, enc.bits_per_alpha)
    return qubo_energy(problem, bits), len(ensemble.members)


def _cmd_train(args) -> int:
    seed = _resolve_seed(args.seed)
    data = load_csv(args.data, args.label)
    if args.output:
        output = Path(args.output)
    else:
        output = Path(args.data).with_suffix(".manifest" if args.multiclass else ".model")
    c_bound = (
        float(args.c_bound)
        if args.c_bound is not None
        else float(max_alpha(args.base, args.bits_per_alpha))
    )
    kernel = KernelParams(kind=args.kernel, gamma=args.gamma)

    settings = {
        "data": args.data,
        "label": args.label,
        "multiclass": args.multiclass,
        "classical": args.classical,
        "kernel": args.kernel,
        "gamma": args.gamma,
    }
    if args.classical:
        settings["c_bound"] = c_bound
    else:
        settings.update(
            base=args.base,
            bits_per_alpha=args.bits_per_alpha,
            penalty=args.penalty,
            c_bound=c_bound,
            sampler=args.sampler,
            ensemble=args.ensemble,
            sweeps=args.sweeps,
            num_reads=args.num_reads,
            initial_temperature=args.initial_temperature,
            final_temperature=args.final_temperature,
            seed=seed,
        )
    settings["adjust_bias"] = args.adjust_bias
    if args.adjust_bias:
        settings["adjust_radius"] = args.adjust_radius
        settings["adjust_step"] = args.adjust_step
    settings["output"] = output
    _print_config(settings)

    if args.classical:
        if args.multiclass:
            model = train_multiclass_classical(data, kernel, c_bound)
        else:
            model = EnsembleModel((train_classical(data, kernel, c_bound),))
    else:
        config = TrainConfig(
            encoding=EncodingParams(
                base=args.base,
                bits_per_alpha=args.bits_per_alpha,
                penalty=args.penalty,
                kernel=kernel,
            ),
            sampler=args.sampler,
            schedule=AnnealSchedule(
                initial_temperature=args.initial_temperature,
                final_temperature=args.final_temperature,
                sweeps=args.sweeps,
                num_reads=args.num_reads,
                seed=seed,
            ),
            ensemble_size=args.ensemble,
        )
        if args.multiclass:
            model = train_multiclass(data, config)
        else:
            model = train_binary(data, config)
    if args.adjust_bias:
        model = apply_bias_adjustment(model, data, args.adjust_radius, args.adjust_step)

    if args.multiclass:
        predicted = predict_multiclass_batch(model, data.features)
    else:
        predicted = predict_labels(ensemble_decision_values(model, data.features))
    print(f"training accuracy {float(np.mean(predicted == data.labels)):.6f}")

    if not args.classical:
        print(f"qubo variables {args.bits_per_alpha * data.num_points}")
        if args.multiclass:
            for class_id, classifier in zip(model.class_ids, model.classifiers):
                energy, distinct = _sampler_stats(classifier)
                print(
                    f"class {class_id}: best energy {format_real(energy)}, "
                    f"distinct solutions {distinct}"
                )
        else:
            energy, distinct = _sampler_stats(model)
            print(f"best energy {format_real(energy)}, distinct solutions {distinct}")
    elif not args.multiclass and not model.members[0].converged:
        print("warning: dual solver did not converge")

    if args.multiclass:
        save_multiclass(model, output)
        print(f"wrote manifest to {output} ({len(model.class_ids)} member files)")
    else:
        save_model(model, output)
        print(f"wrote model to {output}")
    return 0


# --- predict ------------------------------------------------------------------


def _cmd_predict(args) -> int:
    _print_config(
        {
            "model": args.model,
            "data": args.data,
            "label": args.label,
            "output": args.output,
        }
    )
    kind, model = _load_any_model(args.model)
    expected = _model_dim(kind, model)

    raw = Path(args.data).read_text()
    if not raw.strip():
        features = np.zeros((0, expected))
    else:
        features = load_feature_csv(args.data, args.label)
    if features.shape[0] and features.shape[1] != expected:
        raise ValueError(
            f"model expects {expected} features, input has {features.shape[1]}"
        )

    lines = []
    if features.shape[0]:
        if kind == "binary":
            values = ensemble_decision_values(model, features)
            labels = predict_labels(values)
            lines = [
                f"{int(label)} {format_real(value)}"
                for label, value in zip(labels, values)
            ]
        else:
            values = multiclass_decision_values(model, features)
            labels = predict_multiclass_batch(model, features)
            lines = [
                f"{int(label)} " + " ".join(format_real(v) for v in row)
                for label, row in zip(labels, values)
            ]
    text = "".join(line + "\n" for line in lines)
    _emit(text, args.output, f"{len(lines)} predictions")
    return 0


# --- evaluate -----------------------------------------------------------------


def _cmd_evaluate(args) -> int:
    _print_config(
        {
            "model": args.model,
            "data": args.data,
            "label": args.label,
            "format": args.format,
        }
    )
    kind, model = _load_any_model(args.model)
    data = load_csv(args.data, args.label)
    expected = _model_dim(kind, model)
    if data.dim != expected:
        raise ValueError(f"model expects {expected} features, input has {data.dim}")

    if kind == "binary":
        predicted = predict_labels(ensemble_decision_values(model, data.features))
        report = binary_report(binary_confusion(data.labels, predicted))
        if args.format == "csv":
            print("\n".join(report_kv_lines(report)))
        else:
            print(format_binary_report(report))
        return 0

    class_ids = model.class_ids
    unknown = sorted(set(data.labels.tolist()) - set(class_ids))
    if unknown:
        raise ValueError(f"labels {unknown} not among model classes {list(class_ids)}")
    index_of = {c: i for i, c in enumerate(class_ids)}
    predicted = predict_multiclass_batch(model, data.features)
    actual_idx = np.array([index_of[int(c)] for c in data.labels])
    predicted_idx = np.array([index_of[int(c)] for c in predicted])
    cm = confusion(actual_idx, predicted_idx, len(class_ids))
    accuracy = multiclass_accuracy(cm)
    adjacent, distant = adjacency_errors(cm, range(len(class_ids)))
    if args.format == "csv":
        lines = [f"accuracy,{format_real(accuracy)}"]
        lines.append(f"adjacent_errors,{adjacent}")
        lines.append(f"distant_errors,{distant}")
        for i, actual_id in enumerate(class_ids):
            for j, predicted_id in enumerate(class_ids):
                lines.append(f"confusion_{actual_id}_{predicted_id},{cm[i, j]}")
        print("\n".join(lines))
    else:
        print(format_confusion(cm, class_names=class_ids))
        print()
        print(f"accuracy {accuracy:.6f}")
        print(f"adjacent-class errors {adjacent}")
        print(f"distant-class errors {distant}")
    return 0


# --- experiment ---------------------------------------------------------------


def _cmd_experiment(args) -> int:
    options = load_config(args.config) if args.config else {}
    for item in args.set or []:
        if "=" not in item:
            raise ValueError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        options[key.strip()] = value.strip()
    if args.seed is not None:
        options["seed"] = str(args.seed)
    elif "seed" not in options:
        options["seed"] = str(_resolve_seed(None))
    spec = spec_from_options(options)
    _print_config(dict(sorted(options.items())))

    result = run_experiment(spec)

    chosen = result.chosen
    print(f"task {result.task}")
    print("classes " + " ".join(str(c) for c in result.class_ids))
    print(
        f"chosen base={chosen.base} bits_per_alpha={chosen.bits_per_alpha} "
        f"penalty={chosen.penalty:g} gamma={chosen.gamma:g}"
    )
    print(f"split {result.num_train} train / {result.num_test} test per shuffle")
    print("shuffle  sampled  classical")
    rows = zip(result.qsvm_accuracies, result.classical_accuracies)
    for i, (q, c) in enumerate(rows):
        print(f"{i:>7}  {q:<7.4f}  {c:.4f}")
    print(f"sampled mean {result.qsvm_mean:.4f} std {result.qsvm_std:.4f}")
    print(f"classical mean {result.classical_mean:.4f} std {result.classical_std:.4f}")
    if result.qsvm_adjacency is not None:
        qa = sum(a for a, _ in result.qsvm_adjacency)
        qd = sum(d for _, d in result.qsvm_adjacency)
        ca = sum(a for a, _ in result.classical_adjacency)
        cd = sum(d for _, d in result.classical_adjacency)
        print(f"sampled errors adjacent={qa} distant={qd}")
        print(f"classical errors adjacent={ca} distant={cd}")

    if args.csv:
        lines = ["shuffle,sampled_accuracy,classical_accuracy"]
        for i, (q, c) in enumerate(zip(result.qsvm_accuracies, result.classical_accuracies)):
            lines.append(f"{i},{repr(float(q))},{repr(float(c))}")
        atomic_write_text(args.csv, "".join(line + "\n" for line in lines))
        print(f"wrote per-shuffle accuracies to {args.csv}")
    return 0


# --- solve-qubo ---------------------------------------------------------------


def _cmd_solve_qubo(args) -> int:
    seed = _resolve_seed(args.seed)
    _print_config(
        {
            "qubo": args.qubo,
            "solver": args.solver,
            "top_k": args.top_k,
            "sweeps": args.sweeps,
            "num_reads": args.num_reads,
            "initial_temperature": args.initial_temperature,
            "final_temperature": args.final_temperature,
            "seed": seed,
            "output": args.output,
        }
    )
    problem = load_qubo(args.qubo)
    if args.solver == "exhaustive":
        samples = solve_exhaustive(problem, top_k=args.top_k)
    else:
        schedule = AnnealSchedule(
            initial_temperature=args.initial_temperature,
            final_temperature=args.final_temperature,
            sweeps=args.sweeps,
            num_reads=args.num_reads,
            seed=seed,
        )
        samples = solve_anneal(problem, schedule, top_k=args.top_k)
    lines = [
        "".join(str(int(b)) for b in sample.bits) + f" {format_real(sample.energy)}"
        for sample in samples
    ]
    _emit("".join(line + "\n" for line in lines), args.output, f"{len(lines)} samples")
    return 0


# --- parser -------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="qubosvm", description=__doc__.splitlines()[0], allow_abbrev=False)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--threads",
        type=_positive_int,
        default=1,
        help="worker cap; execution is serial so results never depend on it",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser(
        "datagen", parents=[common], allow_abbrev=False, help="generate a synthetic dataset"
    )
    p.add_argument("--kind", choices=("blobs", "profiles"), required=True)
    p.add_argument("--centers", help="blob centers, e.g. --centers=-5,0;5,0")
    p.add_argument("--counts", help="points per class, e.g. 30,30")
    p.add_argument("--spread", type=float, default=0.5, help="blob standard deviation")
    p.add_argument("--classes", type=_positive_int, help="number of profile classes")
    p.add_argument("--taps", type=_positive_int, default=10, help="profile stations per sample")
    p.add_argument("--noise", type=float, default=0.05, help="profile noise level")
    p.add_argument("--angle-start", type=float, default=14.0)
    p.add_argument("--angle-step", type=float, default=2.0)
    p.add_argument("--class-ids", help="explicit class ids, e.g. --class-ids=-1,1")
    p.add_argument("--label", default="label", help="label column name")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", "-o", required=True)
    p.set_defaults(func=_cmd_datagen)

    p = sub.add_parser(
        "pca", parents=[common], allow_abbrev=False, help="project a dataset onto principal components"
    )
    p.add_argument("--data", required=True)
    p.add_argument("--label", default="label")
    p.add_argument("--dim", type=_positive_int, required=True, help="components to keep")
    p.add_argument("--standardize", action="store_true", help="scale columns to unit variance first")
    p.add_argument("--output", "-o", required=True)
    p.set_defaults(func=_cmd_pca)

    p = sub.add_parser(
        "train", parents=[common], allow_abbrev=False, help="train a classifier on a labeled CSV"
    )
    p.add_argument("--data", required=True)
    p.add_argument("--label", default="label")
    p.add_argument("--multiclass", action="store_true", help="one-against-all over the class ids")
    p.add_argument("--classical", action="store_true", help="continuous dual solver instead of sampling")
    p.add_argument("--kernel", choices=KERNEL_KINDS, default="gaussian")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--B", "--base", dest="base", type=int, default=2, help="encoding base")
    p.add_argument(
        "--K", "--bits-per-alpha", dest="bits_per_alpha", type=_positive_int, default=2,
        help="digits per dual variable",
    )
    p.add_argument("--xi", "--penalty", dest="penalty", type=float, default=0.0,
                   help="balance-constraint penalty weight")
    p.add_argument("--c-bound", type=float, default=None,
                   help="classical box bound (default: largest encodable alpha)")
    p.add_argument("--ensemble", type=_positive_int, default=1, help="solutions to keep")
    p.add_argument("--sampler", choices=("anneal", "exhaustive"), default="anneal")
    p.add_argument("--sweeps", type=_positive_int, default=1000)
    p.add_argument("--num-reads", type=_positive_int, default=64)
    p.add_argument("--initial-temperature", type=float, default=None)
    p.add_argument("--final-temperature", type=float, default=None)
    p.add_argument("--adjust-bias", action="store_true", help="post-fit bias scan on training data")
    p.add_argument("--adjust-radius", type=float, default=1.0)
    p.add_argument("--adjust-step", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", "-o", default=None, help="model (or manifest) path")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser(
        "predict", parents=[common], allow_abbrev=False, help="classify rows of a feature CSV"
    )
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--label", default="label", help="label column to ignore if present")
    p.add_argument("--output", "-o", default=None, help="write predictions here instead of stdout")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser(
        "evaluate", parents=[common], allow_abbrev=False, help="score a model on a labeled CSV"
    )
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--label", default="label")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser(
        "experiment", parents=[common], allow_abbrev=False,
        help="full protocol: reduce, shuffle, grid-search, compare against the classical baseline",
    )
    p.add_argument("--config", default=None, help="flat key = value file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one config key (repeatable)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--csv", default=None, help="write per-shuffle accuracies as CSV")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser(
        "solve-qubo", parents=[common], allow_abbrev=False, help="sample a QUBO text file"
    )
    p.add_argument("--qubo", required=True)
    p.add_argument("--solver", choices=("anneal", "exhaustive"), default="anneal")
    p.add_argument("--top-k", type=_positive_int, default=10)
    p.add_argument("--sweeps", type=_positive_int, default=1000)
    p.add_argument("--num-reads", type=_positive_int, default=64)
    p.add_argument("--initial-temperature", type=float, default=None)
    p.add_argument("--final-temperature", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=_cmd_solve_qubo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse help (0) or usage error (1)
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
