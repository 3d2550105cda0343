"""Command-line pipeline: synth, extract, train, evaluate, discriminate.

Every command is reproducible: the same inputs and seed produce
byte-identical outputs.  Exit codes: 0 success, 1 computational failure
(partial outputs are not left behind), 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import shutil
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import boostmetric, dataio, evaluation
from .filterbank import FilterBankConfig, build_filter_bank, extract_features
from .signals import dft321_magnitude, truncate_spectrum

_STD_FLOOR = 1e-12


@dataclass(frozen=True)
class PipelineConfig:
    """End-to-end knobs; file values override defaults, flags override both."""

    bins: int = 11
    alpha: float = 1.8
    fmax: float = 1000.0
    mode: str = "full"
    log_energy: bool = False
    standardize: bool = False
    regularizer: float = 1e-7
    iterations: int = 3000
    convergence_tol: float = 1e-8
    line_search_tol: float = 1e-9
    impostors_per_pair: int = 1
    seed: int = 0
    k: int = 3
    classifier: str = "knn"

    def __post_init__(self) -> None:
        if self.mode not in ("full", "bounded"):
            raise ValueError("mode must be 'full' or 'bounded'")
        if self.classifier not in ("knn", "nb"):
            raise ValueError("classifier must be 'knn' or 'nb'")

    def train_config(self) -> boostmetric.TrainConfig:
        return boostmetric.TrainConfig(
            regularizer=self.regularizer,
            max_iterations=self.iterations,
            convergence_tol=self.convergence_tol,
            line_search_tol=self.line_search_tol,
            rng_seed=self.seed,
        )

    def bank_config(self, bins: int | None = None) -> FilterBankConfig:
        return FilterBankConfig(
            n_bins=self.bins if bins is None else bins,
            alpha=self.alpha,
            f_max=self.fmax,
        )


_CONFIG_FIELDS = {f.name: f.type for f in fields(PipelineConfig)}


def load_pipeline_config(path) -> PipelineConfig:
    with open(path, "rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ValueError(f"{path}: invalid TOML: {exc}") from exc
    unknown = set(raw) - set(_CONFIG_FIELDS)
    if unknown:
        raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
    return PipelineConfig(**raw)


def _resolve_config(args: argparse.Namespace) -> PipelineConfig:
    cfg = (
        load_pipeline_config(args.config)
        if getattr(args, "config", None)
        else PipelineConfig()
    )
    overrides = {
        name: getattr(args, name)
        for name in _CONFIG_FIELDS
        if getattr(args, name, None) is not None
    }
    return replace(cfg, **overrides) if overrides else cfg


def _resolve_metric(value: str):
    """'euclidean' or a model-file path."""
    if value.lower() == "euclidean":
        return None
    path = Path(value)
    if not path.is_file():
        raise ValueError(f"metric model file not found: {path}")
    return boostmetric.load_model(path)


def _extract_matrix(dataset: dataio.Dataset, cfg: PipelineConfig, bins: int | None = None):
    bank = build_filter_bank(cfg.bank_config(bins))
    rows, labels = [], []
    for label, signal in dataset.entries:
        spectrum = truncate_spectrum(dft321_magnitude(signal), cfg.fmax)
        rows.append(extract_features(spectrum, bank, cfg.mode).energies)
        labels.append(label)
    features = np.vstack(rows)
    if cfg.log_energy:
        features = np.log1p(features)
    if cfg.standardize:
        features = (features - features.mean(axis=0)) / np.maximum(
            features.std(axis=0), _STD_FLOOR
        )
    return features, labels


def _pick_representatives(features, labels, seed):
    """One seeded representative per class, in sorted class order."""
    rng = np.random.Generator(np.random.PCG64(seed))
    labels_arr = np.asarray(labels)
    keep = []
    for label in sorted(set(labels)):
        members = np.flatnonzero(labels_arr == label)
        keep.append(int(rng.choice(members)))
    return features[keep], [labels[i] for i in keep]


def _classify(train_x, train_y, test_x, cfg: PipelineConfig, metric):
    if cfg.classifier == "knn":
        return evaluation.knn_classify(train_x, train_y, test_x, k=cfg.k, metric=metric)
    # Naive Bayes has no distance argument; a learned metric enters by
    # projecting both sets into its embedding space first.
    if metric is not None:
        transform = boostmetric.embedding_transform(metric)
        train_x = transform.transform(train_x)
        test_x = transform.transform(test_x)
    return evaluation.gaussian_nb(train_x, train_y, test_x)


# ---------------------------------------------------------------------------
# commands


def cmd_synth(args: argparse.Namespace) -> int:
    spec = dataio.load_synth_spec(args.spec_file)
    if args.seed is not None:
        spec = replace(spec, rng_seed=args.seed)
    out_dir = Path(args.out_dir)
    if out_dir.exists() and any(out_dir.iterdir()):
        raise ValueError(f"output directory {out_dir} exists and is not empty")
    corpus = dataio.synth_corpus(spec)
    created = not out_dir.exists()
    try:
        dataio.save_dataset(corpus, out_dir)
    except BaseException:
        if created and out_dir.exists():
            shutil.rmtree(out_dir, ignore_errors=True)
        raise
    print(f"wrote {len(corpus)} recordings to {out_dir}")
    return 0


def cmd_extract(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    dataset = dataio.load_dataset(args.dataset_dir)
    features, labels = _extract_matrix(dataset, cfg)
    dataio.write_features_csv(args.out_csv, features, labels)
    print(f"wrote {features.shape[0]}x{features.shape[1]} features to {args.out_csv}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    features, labels = dataio.read_features_csv(args.features_csv)
    triplets = boostmetric.generate_triplets(
        features, labels, impostors_per_pair=cfg.impostors_per_pair, rng_seed=cfg.seed
    )
    model = boostmetric.train_metric(triplets, features, cfg.train_config())
    boostmetric.save_model(model, args.out_model)
    print(
        f"trained {model.n_terms} terms on {len(triplets)} triplets, "
        f"final loss {model.loss_history[-1]:.6g}; model written to {args.out_model}"
    )
    return 0


def _parse_sweep(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split("..")
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise ValueError(f"--sweep-dims expects 'N1..N2', got {text!r}") from None
    if not 2 <= lo <= hi:
        raise ValueError("--sweep-dims bounds must satisfy 2 <= N1 <= N2")
    return lo, hi


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    if args.sweep_dims:
        if args.metric.lower() != "euclidean":
            raise ValueError(
                "--sweep-dims retrains per dimension; a fixed model file cannot be used"
            )
        lo, hi = _parse_sweep(args.sweep_dims)
        train_set = dataio.load_dataset(args.train)
        test_set = dataio.load_dataset(args.test)
        for bins in range(lo, hi + 1):
            train_x, train_y = _extract_matrix(train_set, cfg, bins=bins)
            test_x, test_y = _extract_matrix(test_set, cfg, bins=bins)
            plain = _classify(train_x, train_y, test_x, cfg, metric=None)
            triplets = boostmetric.generate_triplets(
                train_x, train_y, cfg.impostors_per_pair, cfg.seed
            )
            model = boostmetric.train_metric(triplets, train_x, cfg.train_config())
            boosted = _classify(train_x, train_y, test_x, cfg, metric=model)
            acc_plain = evaluation.accuracy(
                evaluation.ConfusionMatrix.from_predictions(test_y, plain)
            )
            acc_boost = evaluation.accuracy(
                evaluation.ConfusionMatrix.from_predictions(test_y, boosted)
            )
            print(f"bins={bins} euclidean={acc_plain:.4f} boosted={acc_boost:.4f}")
        return 0

    metric = _resolve_metric(args.metric)
    train_x, train_y = dataio.read_features_csv(args.train)
    test_x, test_y = dataio.read_features_csv(args.test)
    if args.representatives:
        train_x, train_y = _pick_representatives(train_x, train_y, cfg.seed)
    predictions = _classify(train_x, train_y, test_x, cfg, metric)
    confusion = evaluation.ConfusionMatrix.from_predictions(test_y, predictions)
    confusion.write_csv(args.confusion_out)
    acc = evaluation.accuracy(confusion)
    print(f"accuracy: {acc:.4f} ({acc * 100:.2f}%)")
    return 0


def cmd_discriminate(args: argparse.Namespace) -> int:
    metric = _resolve_metric(args.metric)
    features, labels = dataio.read_features_csv(args.features_csv)
    matrix = evaluation.dissimilarity_matrix(features, labels, metric)
    matrix.write_csv(args.out_csv)
    error = evaluation.discrimination_error(matrix)
    print(f"average discrimination error: {error:.2f}%")
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_config_flags(parser: argparse.ArgumentParser, *names: str) -> None:
    flag_spec = {
        "bins": dict(type=int, help="filter-bank size N"),
        "alpha": dict(type=float, help="geometric ratio of the filter bank"),
        "fmax": dict(type=float, help="upper analysis frequency in Hz"),
        "mode": dict(choices=["full", "bounded"], help="window integration mode"),
        "k": dict(type=int, help="neighbor count for k-NN"),
        "classifier": dict(choices=["knn", "nb"], help="classifier choice"),
        "seed": dict(type=int, help="seed for all randomized steps"),
        "regularizer": dict(type=float, help="trace penalty for metric training"),
        "iterations": dict(type=int, help="maximum boosting rounds"),
        "impostors_per_pair": dict(type=int, help="impostors drawn per same-class pair"),
    }
    for name in names:
        parser.add_argument(
            f"--{name.replace('_', '-')}", default=None, **flag_spec[name]
        )
    parser.add_argument("--config", default=None, help="TOML config file")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hapticmetric",
        description="Spectral texture features and boosted metric evaluation pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic recording corpus")
    p_synth.add_argument("spec_file", help="TOML synthesis spec")
    p_synth.add_argument("out_dir", help="directory to create the corpus in")
    p_synth.add_argument("--seed", type=int, default=None, help="override the spec seed")
    p_synth.set_defaults(func=cmd_synth)

    p_extract = sub.add_parser("extract", help="dataset -> feature CSV")
    p_extract.add_argument("dataset_dir", help="root/<class>/<sample>.csv tree")
    p_extract.add_argument("out_csv", help="feature CSV to write")
    _add_config_flags(p_extract, "bins", "alpha", "fmax", "mode")
    p_extract.add_argument(
        "--log-energy", dest="log_energy", action="store_true", default=None,
        help="apply log(1 + energy) to every component",
    )
    p_extract.add_argument(
        "--standardize", dest="standardize", action="store_true", default=None,
        help="z-score each feature column over this extraction",
    )
    p_extract.set_defaults(func=cmd_extract)

    p_train = sub.add_parser("train", help="feature CSV -> metric model file")
    p_train.add_argument("features_csv")
    p_train.add_argument("out_model")
    _add_config_flags(
        p_train, "seed", "regularizer", "iterations", "impostors_per_pair"
    )
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("evaluate", help="classify a test set and report accuracy")
    p_eval.add_argument("train", help="train feature CSV (dataset dir with --sweep-dims)")
    p_eval.add_argument("test", help="test feature CSV (dataset dir with --sweep-dims)")
    _add_config_flags(
        p_eval, "k", "classifier", "seed", "alpha", "fmax", "mode",
        "regularizer", "iterations", "impostors_per_pair",
    )
    p_eval.add_argument(
        "--metric", default="euclidean",
        help="'euclidean' or a trained model file",
    )
    p_eval.add_argument(
        "--sweep-dims", default=None, metavar="N1..N2",
        help="re-extract and re-train per filter-bank size in the range",
    )
    p_eval.add_argument(
        "--confusion-out", default="confusion.csv", help="confusion matrix CSV path"
    )
    p_eval.add_argument(
        "--representatives", action="store_true", default=False,
        help="reduce the train set to one seeded representative per class",
    )
    p_eval.set_defaults(func=cmd_evaluate)

    p_disc = sub.add_parser(
        "discriminate", help="pairwise class separability and mean error"
    )
    p_disc.add_argument("features_csv")
    p_disc.add_argument("out_csv", help="dissimilarity matrix CSV to write")
    p_disc.add_argument(
        "--metric", default="euclidean",
        help="'euclidean' or a trained model file",
    )
    p_disc.set_defaults(func=cmd_discriminate)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except (OSError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # unexpected numeric failure
        print(f"computation failed: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
