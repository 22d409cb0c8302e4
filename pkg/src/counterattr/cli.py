"""Command-line pipeline: generate, train, robust-train, sweep, explain, report.

Every command reads one nested configuration (defaults, optionally overridden
by a JSON file, then by ``--set`` flags), works inside a single output
directory, and appends its stage to ``manifest.json`` with wall-clock time
and sha256 digests of every file it wrote. Commands are deterministic given
config + seed; all randomness flows through named per-stage substreams of the
global seed.

Exit codes: 0 success, 1 validation failure, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .data import (Dataset, SplitAssignment, SyntheticSpec, generate_synthetic,
                   load_dataset, save_dataset, split_dataset)
from .embed import (FeatureMap, TrainConfig, accuracy, predict_attributes,
                    train_general, train_sje)
from .exceptions import NumericalError, ValidationError
from .explain import (build_explanation, distance_analysis_robust,
                      distance_analysis_standard, eligible_indices,
                      write_records_jsonl)
from .modelio import load_model, save_model
from .perturb import AttackConfig, attack_dataset
from .rng import derive_seed
from .robust import (RobustTrainConfig, adversarial_train, make_report,
                     write_sweep_csv)

__all__ = ["DEFAULT_CONFIG", "resolve_config", "main", "cmd_generate", "cmd_train",
           "cmd_robust_train", "cmd_sweep", "cmd_explain", "cmd_report"]

DEFAULT_CONFIG = {
    "seed": 0,
    "out_dir": "out",
    "dataset": {
        "num_classes": 10,
        "num_attributes": 8,
        "feature_dim": 16,
        "samples_per_class": 60,
        "noise_sigma": 0.05,
        "class_similarity": 0.7,
    },
    "split": {"train": 0.6, "val": 0.2, "test": 0.2},
    "feature_map": {"kind": "identity", "hidden_dim": 32, "sigma": 0.5},
    "train": {
        "learning_rate": 0.05,
        "epochs": 50,
        "margin_scale": 2.5,
        "weight_init_sigma": 0.01,
        "normalize_class_attributes": False,
        "prediction_rule": "compatibility-argmax",
        "general_learning_rate": 0.05,
        "general_epochs": 50,
    },
    "attack": {"epsilon": 0.3, "alpha": None, "steps": 10, "relative": False},
    # Robust training needs a longer schedule than standard training to recover
    # clean accuracy while resisting the attack, hence its own epoch count.
    "robust": {"epsilon": 0.3, "alpha": None, "steps": 10, "mix_alpha": 0.5,
               "epochs": 150, "relative": False},
    "sweep": {"epsilons": [0.0, 0.05, 0.1, 0.2, 0.3, 0.5], "steps": 10,
              "relative": False},
    "explain": {"top_k": None, "num_examples": 5},
}

# File names inside the output directory, shared across stages.
FEATURES = "features.csv"
ATTRIBUTES = "attributes.csv"
NAMES = "names.txt"
SPLIT = "split.json"
MODEL_FILES = {
    ("attribute", "standard"): "attribute_standard.model",
    ("attribute", "robust"): "attribute_robust.model",
    ("general", "standard"): "general_standard.model",
    ("general", "robust"): "general_robust.model",
}
MANIFEST = "manifest.json"


# ---------------------------------------------------------------------------
# Configuration handling


def _merge(defaults: dict, override: dict, path: str = "") -> dict:
    """Deep-merge ``override`` into a copy of ``defaults``, rejecting unknown keys."""
    merged = copy.deepcopy(defaults)
    for key, value in override.items():
        where = f"{path}{key}"
        if key not in defaults:
            raise ValidationError(f"unknown config key {where!r}")
        if isinstance(defaults[key], dict):
            if not isinstance(value, dict):
                raise ValidationError(f"config key {where!r} must be a table")
            merged[key] = _merge(defaults[key], value, f"{where}.")
        else:
            merged[key] = value
    return merged


def _apply_set(config: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ValidationError(f"--set expects KEY=VALUE, got {assignment!r}")
    dotted, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw  # unquoted strings are taken literally
    node = config
    parts = dotted.split(".")
    for i, part in enumerate(parts[:-1]):
        if part not in node or not isinstance(node[part], dict):
            raise ValidationError(f"unknown config key {'.'.join(parts[:i + 1])!r}")
        node = node[part]
    leaf = parts[-1]
    if leaf not in node:
        raise ValidationError(f"unknown config key {dotted!r}")
    if isinstance(node[leaf], dict):
        raise ValidationError(f"config key {dotted!r} is a table; set its fields instead")
    node[leaf] = value


def resolve_config(config_path: str | None = None, overrides=(),
                   seed: int | None = None, out_dir: str | None = None) -> dict:
    """Defaults <- config file <- ``--set`` overrides <- explicit flags."""
    config = copy.deepcopy(DEFAULT_CONFIG)
    if config_path is not None:
        path = Path(config_path)
        if not path.is_file():
            raise ValidationError(f"config file not found: {path}")
        try:
            loaded = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ValidationError(f"config file {path} must hold a JSON object")
        config = _merge(config, loaded)
    for assignment in overrides:
        _apply_set(config, assignment)
    if seed is not None:
        config["seed"] = seed
    if out_dir is not None:
        config["out_dir"] = out_dir
    if not isinstance(config["seed"], int) or config["seed"] < 0:
        raise ValidationError("seed must be a non-negative integer")
    return config


# ---------------------------------------------------------------------------
# Shared plumbing


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _update_manifest(out: Path, stage: str, config: dict, wall_clock_s: float,
                     artifacts: list[str]) -> None:
    manifest_path = out / MANIFEST
    manifest = {"tool": "counterattr", "version": __version__, "stages": {}}
    if manifest_path.is_file():
        try:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError:
            pass  # rebuild a fresh manifest over a corrupt one
        manifest.setdefault("stages", {})
        manifest["tool"] = "counterattr"
        manifest["version"] = __version__
    manifest["stages"][stage] = {
        "config": config,
        "wall_clock_s": wall_clock_s,
        "artifacts": {name: _sha256(out / name) for name in sorted(artifacts)},
    }
    _write_json(manifest_path, manifest)


def _require(out: Path, name: str, hint: str) -> Path:
    path = out / name
    if not path.is_file():
        raise ValidationError(f"missing {name} in {out}; run `counterattr {hint}` first")
    return path


def _load_workspace(out: Path) -> tuple[Dataset, SplitAssignment]:
    dataset = load_dataset(
        _require(out, FEATURES, "generate"),
        _require(out, ATTRIBUTES, "generate"),
        _require(out, NAMES, "generate"),
    )
    raw = json.loads(_require(out, SPLIT, "generate").read_text(encoding="utf-8"))
    try:
        split = SplitAssignment(
            train=tuple(int(i) for i in raw["train"]),
            val=tuple(int(i) for i in raw["val"]),
            test=tuple(int(i) for i in raw["test"]),
            seed=int(raw["seed"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed split file {out / SPLIT}: {exc}") from exc
    all_ids = sorted(split.train + split.val + split.test)
    if all_ids != list(range(dataset.num_samples)):
        raise ValidationError(f"split file {out / SPLIT} does not cover the dataset")
    return dataset, split


def _build_feature_map(config: dict, feature_dim: int) -> FeatureMap:
    fm = config["feature_map"]
    if fm["kind"] == "identity":
        return FeatureMap.identity(feature_dim)
    if fm["kind"] == "hidden":
        return FeatureMap.random_hidden(feature_dim, int(fm["hidden_dim"]), feature_dim,
                                        sigma=float(fm["sigma"]), seed=config["seed"])
    raise ValidationError(f"unknown feature map kind {fm['kind']!r}")


def _feature_scale(dataset: Dataset, split: SplitAssignment) -> float:
    """Mean per-dimension standard deviation of the training features."""
    scale = float(np.mean(np.std(dataset.features[np.asarray(split.train)], axis=0)))
    if scale <= 0.0:
        raise ValidationError("training features are constant; relative epsilon undefined")
    return scale


def _resolve_epsilon(epsilon: float, relative: bool, dataset: Dataset,
                     split: SplitAssignment) -> float:
    return float(epsilon) * _feature_scale(dataset, split) if relative else float(epsilon)


def _load_model_checked(out: Path, classifier: str, variant: str, dataset: Dataset,
                        hint: str):
    path = _require(out, MODEL_FILES[(classifier, variant)], hint)
    return load_model(path, dataset=dataset)


# ---------------------------------------------------------------------------
# Stage commands. Each returns the list of files it wrote (relative names).


def cmd_generate(config: dict, out: Path) -> list[str]:
    ds = config["dataset"]
    spec = SyntheticSpec(
        num_classes=int(ds["num_classes"]),
        num_attributes=int(ds["num_attributes"]),
        feature_dim=int(ds["feature_dim"]),
        samples_per_class=int(ds["samples_per_class"]),
        noise_sigma=float(ds["noise_sigma"]),
        class_similarity=float(ds["class_similarity"]),
        seed=derive_seed(config["seed"], "generate"),
    )
    dataset = generate_synthetic(spec)
    save_dataset(dataset, out / FEATURES, out / ATTRIBUTES, out / NAMES)

    sp = config["split"]
    ratios = (float(sp["train"]), float(sp["val"]), float(sp["test"]))
    split = split_dataset(dataset, ratios, seed=derive_seed(config["seed"], "split"))
    _write_json(out / SPLIT, {"seed": split.seed, "train": list(split.train),
                              "val": list(split.val), "test": list(split.test)})
    print(f"generated {dataset.num_samples} samples "
          f"({dataset.num_classes} classes, {dataset.feature_dim} dims) -> {out}")
    print(f"split sizes: train={len(split.train)} val={len(split.val)} "
          f"test={len(split.test)}")
    return [FEATURES, ATTRIBUTES, NAMES, SPLIT]


def cmd_train(config: dict, out: Path) -> list[str]:
    dataset, split = _load_workspace(out)
    dmap = _build_feature_map(config, dataset.feature_dim)
    tr = config["train"]

    attr_config = TrainConfig(
        learning_rate=float(tr["learning_rate"]),
        epochs=int(tr["epochs"]),
        margin_scale=float(tr["margin_scale"]),
        seed=derive_seed(config["seed"], "train-attribute"),
        weight_init_sigma=float(tr["weight_init_sigma"]),
    )
    model = train_sje(dataset, split, dmap, attr_config,
                      normalize_class_attributes=bool(tr["normalize_class_attributes"]),
                      prediction_rule=tr["prediction_rule"])
    general_config = TrainConfig(
        learning_rate=float(tr["general_learning_rate"]),
        epochs=int(tr["general_epochs"]),
        margin_scale=float(tr["margin_scale"]),
        seed=derive_seed(config["seed"], "train-general"),
        weight_init_sigma=float(tr["weight_init_sigma"]),
    )
    general = train_general(dataset, split, general_config)

    save_model(model, dmap, out / MODEL_FILES[("attribute", "standard")])
    save_model(general, FeatureMap.identity(dataset.feature_dim),
               out / MODEL_FILES[("general", "standard")])

    acc_attr = accuracy(model, dataset, split.test, dmap=dmap)
    acc_gen = accuracy(general, dataset, split.test)
    report = {"split": "test", "attribute_clean_acc": acc_attr,
              "general_clean_acc": acc_gen, "difference": abs(acc_attr - acc_gen)}
    _write_json(out / "train_report.json", report)
    print(f"attribute classifier test accuracy: {acc_attr:.4f}")
    print(f"general classifier test accuracy:   {acc_gen:.4f}")
    return [MODEL_FILES[("attribute", "standard")], MODEL_FILES[("general", "standard")],
            "train_report.json"]


def cmd_robust_train(config: dict, out: Path) -> list[str]:
    dataset, split = _load_workspace(out)
    dmap = _build_feature_map(config, dataset.feature_dim)
    tr, rb = config["train"], config["robust"]
    epsilon = _resolve_epsilon(rb["epsilon"], bool(rb["relative"]), dataset, split)
    alpha = None if rb["alpha"] is None else float(rb["alpha"])

    attr_config = RobustTrainConfig(
        base=TrainConfig(
            learning_rate=float(tr["learning_rate"]),
            epochs=int(rb["epochs"]),
            margin_scale=float(tr["margin_scale"]),
            seed=derive_seed(config["seed"], "robust-attribute"),
            weight_init_sigma=float(tr["weight_init_sigma"]),
        ),
        attack=AttackConfig(epsilon=epsilon, alpha=alpha, steps=int(rb["steps"]),
                            loss="ranking"),
        mix_alpha=float(rb["mix_alpha"]),
    )
    model = adversarial_train(dataset, split, dmap, attr_config, "embedding",
                              normalize_class_attributes=bool(tr["normalize_class_attributes"]),
                              prediction_rule=tr["prediction_rule"])

    general_config = RobustTrainConfig(
        base=TrainConfig(
            learning_rate=float(tr["general_learning_rate"]),
            epochs=int(rb["epochs"]),
            margin_scale=float(tr["margin_scale"]),
            seed=derive_seed(config["seed"], "robust-general"),
            weight_init_sigma=float(tr["weight_init_sigma"]),
        ),
        attack=AttackConfig(epsilon=epsilon, alpha=alpha, steps=int(rb["steps"]),
                            loss="cross_entropy"),
        mix_alpha=float(rb["mix_alpha"]),
    )
    general = adversarial_train(dataset, split, FeatureMap.identity(dataset.feature_dim),
                                general_config, "general")

    save_model(model, dmap, out / MODEL_FILES[("attribute", "robust")])
    save_model(general, FeatureMap.identity(dataset.feature_dim),
               out / MODEL_FILES[("general", "robust")])

    acc_attr = accuracy(model, dataset, split.test, dmap=dmap)
    acc_gen = accuracy(general, dataset, split.test)
    report = {"split": "test", "epsilon": epsilon, "attribute_clean_acc": acc_attr,
              "general_clean_acc": acc_gen, "difference": abs(acc_attr - acc_gen)}
    _write_json(out / "robust_train_report.json", report)
    print(f"robust attribute classifier test accuracy: {acc_attr:.4f} "
          f"(trained at epsilon={epsilon!r})")
    print(f"robust general classifier test accuracy:   {acc_gen:.4f}")
    return [MODEL_FILES[("attribute", "robust")], MODEL_FILES[("general", "robust")],
            "robust_train_report.json"]


def _sweep_epsilons(config: dict, dataset: Dataset, split: SplitAssignment) -> list[float]:
    grid = config["sweep"]["epsilons"]
    if not isinstance(grid, (list, tuple)) or not grid:
        raise ValidationError("sweep.epsilons must be a non-empty list")
    epsilons = []
    for value in grid:
        if not isinstance(value, (int, float)) or isinstance(value, bool) or value < 0:
            raise ValidationError(f"sweep epsilon {value!r} must be a number >= 0")
        epsilons.append(_resolve_epsilon(value, bool(config["sweep"]["relative"]),
                                         dataset, split))
    return epsilons


def cmd_sweep(config: dict, out: Path) -> list[str]:
    dataset, split = _load_workspace(out)
    epsilons = _sweep_epsilons(config, dataset, split)
    steps = int(config["sweep"]["steps"])

    models = {}
    for classifier, loss in (("attribute", "ranking"), ("general", "cross_entropy")):
        models[(classifier, "standard")] = _load_model_checked(
            out, classifier, "standard", dataset, "train") + (loss,)
        robust_path = out / MODEL_FILES[(classifier, "robust")]
        if robust_path.is_file():
            models[(classifier, "robust")] = load_model(robust_path, dataset=dataset) + (loss,)

    # adv_acc[(classifier, variant)] follows the epsilon grid order.
    adv_acc = {key: [] for key in models}
    for epsilon in epsilons:
        for (classifier, variant), (model, dmap, loss) in models.items():
            attack = AttackConfig(epsilon=epsilon, steps=steps, loss=loss)
            _, summary = attack_dataset(dmap, model, dataset, split.test, attack)
            adv_acc[(classifier, variant)].append(summary.adv_acc)

    # Report each budget both in raw feature units and relative to the typical
    # per-dimension spread of the training features.
    scale = _feature_scale(dataset, split)
    written = ["sweep.csv"]
    with open(out / "sweep.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("epsilon,epsilon_relative,classifier,model,accuracy\n")
        for i, epsilon in enumerate(epsilons):
            for classifier in ("attribute", "general"):
                for variant in ("standard", "robust"):
                    if (classifier, variant) in adv_acc:
                        fh.write(f"{epsilon!r},{epsilon / scale!r},{classifier},{variant},"
                                 f"{adv_acc[(classifier, variant)][i]!r}\n")

    for classifier in ("attribute", "general"):
        if (classifier, "robust") not in models:
            continue
        model, dmap, _ = models[(classifier, "standard")]
        model_r, dmap_r, _ = models[(classifier, "robust")]
        clean = accuracy(model, dataset, split.test, dmap=dmap)
        clean_r = accuracy(model_r, dataset, split.test, dmap=dmap_r)
        rows = []
        reports = []
        for i, epsilon in enumerate(epsilons):
            adv_s = adv_acc[(classifier, "standard")][i]
            adv_r = adv_acc[(classifier, "robust")][i]
            report = make_report(clean, adv_s, clean_r, adv_r)
            rows.append((epsilon, clean, adv_s, adv_r, report.measure))
            reports.append({"epsilon": epsilon, **report.to_json_dict()})
        write_sweep_csv(out / f"robustification_{classifier}.csv", rows)
        _write_json(out / f"robustification_{classifier}.json", {"reports": reports})
        written += [f"robustification_{classifier}.csv",
                    f"robustification_{classifier}.json"]

    n_models = len(models)
    print(f"swept {len(epsilons)} epsilon values over {n_models} models "
          f"({len(split.test)} test samples each) -> {out / 'sweep.csv'}")
    return written


def cmd_explain(config: dict, out: Path) -> list[str]:
    dataset, split = _load_workspace(out)
    model, dmap = _load_model_checked(out, "attribute", "standard", dataset, "train")
    ex, at = config["explain"], config["attack"]
    top_k = None if ex["top_k"] is None else int(ex["top_k"])
    num_examples = int(ex["num_examples"])
    attack = AttackConfig(
        epsilon=_resolve_epsilon(at["epsilon"], bool(at["relative"]), dataset, split),
        alpha=None if at["alpha"] is None else float(at["alpha"]),
        steps=int(at["steps"]),
        loss="ranking",
    )

    robust = None
    robust_path = out / MODEL_FILES[("attribute", "robust")]
    if robust_path.is_file():
        robust = load_model(robust_path, dataset=dataset)

    records, summary = attack_dataset(dmap, model, dataset, split.test, attack)
    eligible = eligible_indices(records)
    test_ids = np.asarray(split.test, dtype=np.int64)

    explanations = [
        build_explanation(int(test_ids[i]), records[i], dmap, model, dataset,
                          k=top_k, m=num_examples, gallery_indices=split.train,
                          robust_model=None if robust is None else robust[0])
        for i in eligible
    ]
    write_records_jsonl(explanations, out / "records.jsonl")
    written = ["records.jsonl"]

    n = len(records)
    clean_correct = sum(r.predicted_label_clean == r.true_label for r in records)
    counts = {
        "attack": summary.to_json_dict(),
        "n_test": n,
        "clean_wrong_skipped": n - clean_correct,
        "unflipped_skipped": clean_correct - len(eligible),
        "eligible": len(eligible),
        "records_written": len(explanations),
    }

    if eligible:
        clean_attrs = np.array([predict_attributes(dmap, model, records[i].original)
                                for i in eligible])
        adv_attrs = np.array([predict_attributes(dmap, model, records[i].perturbed)
                              for i in eligible])
        true_labels = np.array([records[i].true_label for i in eligible])
        counter_labels = np.array([records[i].predicted_label_perturbed for i in eligible])
        ids = [int(test_ids[i]) for i in eligible]
        standard = distance_analysis_standard(clean_attrs, adv_attrs, true_labels,
                                              counter_labels, dataset.class_attributes,
                                              sample_ids=ids)
        standard.write_csv(out / "distances_standard.csv")
        _write_json(out / "distances_standard.json", standard.stats())
        written += ["distances_standard.csv", "distances_standard.json"]

        if robust is not None:
            model_r, dmap_r = robust
            records_r, summary_r = attack_dataset(dmap_r, model_r, dataset, split.test,
                                                  attack)
            recovered = [i for i in eligible
                         if records_r[i].predicted_label_perturbed == records_r[i].true_label]
            counts["robust"] = {"attack": summary_r.to_json_dict(),
                                "recovered_eligible": len(recovered)}
            if recovered:
                rec_ids = [int(test_ids[i]) for i in recovered]
                robust_attrs = np.array([
                    predict_attributes(dmap_r, model_r, records_r[i].perturbed)
                    for i in recovered])
                std_attrs = np.array([
                    predict_attributes(dmap, model, records[i].perturbed)
                    for i in recovered])
                summary_robust = distance_analysis_robust(
                    rec_ids, robust_attrs, rec_ids, std_attrs,
                    np.array([records[i].true_label for i in recovered]),
                    np.array([records[i].predicted_label_perturbed for i in recovered]),
                    dataset.class_attributes,
                )
                summary_robust.write_csv(out / "distances_robust.csv")
                _write_json(out / "distances_robust.json", summary_robust.stats())
                written += ["distances_robust.csv", "distances_robust.json"]

    _write_json(out / "explain_summary.json", counts)
    written.append("explain_summary.json")
    print(f"attacked {n} test samples at epsilon={attack.epsilon!r}: "
          f"{len(eligible)} eligible, {len(explanations)} records -> {out / 'records.jsonl'}")
    return written


def cmd_report(config: dict, out: Path) -> list[str]:
    manifest_path = out / MANIFEST
    if not manifest_path.is_file():
        raise ValidationError(f"no manifest at {manifest_path}; run a pipeline stage first")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    print(f"{manifest.get('tool', '?')} {manifest.get('version', '?')} — {out}")

    problems = []
    for stage in ("generate", "train", "robust-train", "sweep", "explain"):
        entry = manifest.get("stages", {}).get(stage)
        if entry is None:
            continue
        try:
            wall = float(entry["wall_clock_s"])
            artifacts = dict(entry["artifacts"])
            seed = entry["config"]["seed"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed manifest entry for stage {stage}: {exc}") from exc
        print(f"stage {stage}: {wall:.2f}s, {len(artifacts)} artifacts, seed {seed}")
        for name, digest in sorted(artifacts.items()):
            path = out / name
            if not path.is_file():
                status = "MISSING"
                problems.append(f"{name}: missing")
            elif _sha256(path) != digest:
                status = "CHANGED"
                problems.append(f"{name}: digest mismatch")
            else:
                status = "ok"
            print(f"  {name}: {status} ({digest[:12]})")

    for name, keys in (("train_report.json", ("attribute_clean_acc", "general_clean_acc")),
                       ("robust_train_report.json", ("attribute_clean_acc",
                                                     "general_clean_acc")),
                       ("explain_summary.json", ("eligible", "records_written"))):
        path = out / name
        if path.is_file():
            payload = json.loads(path.read_text(encoding="utf-8"))
            facts = ", ".join(f"{key}={payload[key]}" for key in keys if key in payload)
            print(f"{name}: {facts}")

    if problems:
        raise ValidationError("manifest check failed: " + "; ".join(problems))
    print("all recorded digests verified")
    return []


_COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "robust-train": cmd_robust_train,
    "sweep": cmd_sweep,
    "explain": cmd_explain,
    "report": cmd_report,
}


def _parse_args(argv):
    parser = argparse.ArgumentParser(
        prog="counterattr",
        description="Attribute-based counter explanations for classifier decisions.",
    )
    parser.add_argument("--version", action="version",
                        version=f"counterattr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "generate": "generate a synthetic dataset and split",
        "train": "train the attribute-based and general classifiers",
        "robust-train": "adversarially train both classifiers",
        "sweep": "evaluate adversarial accuracy over an epsilon grid",
        "explain": "attack test samples and emit explanation records",
        "report": "summarize the manifest and verify artifact digests",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", default=None, metavar="FILE",
                       help="JSON config file overriding the defaults")
        p.add_argument("--seed", type=int, default=None,
                       help="global seed (overrides config)")
        p.add_argument("--out-dir", default=None, metavar="DIR",
                       help="output directory (overrides config)")
        p.add_argument("--set", action="append", default=[], dest="overrides",
                       metavar="KEY=VALUE",
                       help="override one config key, e.g. train.epochs=50")
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = _parse_args(argv)
    try:
        config = resolve_config(args.config, args.overrides, args.seed, args.out_dir)
        out = Path(config["out_dir"])
        if args.command != "report":
            out.mkdir(parents=True, exist_ok=True)
        started = time.perf_counter()
        artifacts = _COMMANDS[args.command](config, out)
        if artifacts:
            _update_manifest(out, args.command, config, time.perf_counter() - started,
                             artifacts)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
