"""Dataset ingestion, whole-sequence descriptor extraction, leave-one-person-out
cross-validation, parameter sweeps, and metrics.

Dataset layout: a JSON manifest lists sequences; each sequence is a directory
of 1-indexed PGM frames (frame_000001.pgm ...) plus a plain-text annotation
file with one "frame x y w h" bounding box per line. Relative paths in the
manifest resolve against the manifest's own directory.
"""

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from functools import partial
from pathlib import Path

import numpy as np

from .errors import (
    BoxTooSmall,
    Empty,
    EmptyGrid,
    Malformed,
    MissingPath,
    NoUsableFrames,
    SinglePerson,
)
from .flow import FarnebackParams, TvL1Params, farneback_flow, tvl1_flow
from .learn import ForestConfig, Sample, SvmConfig, rf_predict, rf_train, svm_predict, svm_train
from .raster import load_pgm
from .sta import BoundingBox, Sta2Accumulator, grid_vector

ACTIONS = ("walking", "jogging", "running", "boxing", "handwaving", "handclapping")


@dataclass(frozen=True)
class SequenceRecord:
    id: str
    person: int
    action: str
    scenario: int
    frame_dir: str
    annotation_file: str
    frame_count: int


@dataclass(frozen=True)
class DatasetManifest:
    records: tuple

    def persons(self):
        return sorted({r.person for r in self.records})

    def __len__(self):
        return len(self.records)


class ConfusionMatrix:
    """C x C counts; rows = true class, columns = predicted class."""

    def __init__(self, labels):
        self.labels = tuple(labels)
        self.counts = np.zeros((len(self.labels), len(self.labels)), dtype=np.int64)

    def add(self, true_label, predicted_label, count=1):
        self.counts[true_label, predicted_label] += count

    @property
    def total(self):
        return int(self.counts.sum())

    def __eq__(self, other):
        return (
            isinstance(other, ConfusionMatrix)
            and self.labels == other.labels
            and np.array_equal(self.counts, other.counts)
        )


def accuracy(confusion):
    """Trace over total; accepts a ConfusionMatrix or a raw count matrix."""
    counts = confusion.counts if hasattr(confusion, "counts") else np.asarray(confusion)
    total = counts.sum()
    if total == 0:
        raise Empty("confusion matrix holds no counts")
    return float(np.trace(counts) / total)


def format_confusion(confusion):
    """Render in the usual table convention: true classes down, predictions across."""
    labels = confusion.labels
    width = max(len(lbl) for lbl in labels) + 2
    num_w = max(width, 7)
    lines = [" " * width + "".join(f"{lbl:>{num_w}}" for lbl in labels)]
    for i, lbl in enumerate(labels):
        row = "".join(f"{int(n):>{num_w}}" for n in confusion.counts[i])
        lines.append(f"{lbl:<{width}}" + row)
    return "\n".join(lines)


def load_manifest(path):
    """Parse and path-validate a dataset manifest."""
    path = Path(os.fspath(path))
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise Malformed(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "records" not in doc:
        raise Malformed(f"{path}: manifest must be an object with a 'records' list")

    base = path.parent
    records = []
    seen = set()
    for raw in doc["records"]:
        try:
            rec_id = str(raw["id"])
            person = int(raw["person"])
            action = str(raw["action"])
            scenario = int(raw["scenario"])
            frame_dir = base / str(raw["frame_dir"])
            ann_file = base / str(raw["annotation_file"])
        except (KeyError, TypeError, ValueError) as exc:
            raise Malformed(f"{path}: bad record: {exc}") from exc
        if rec_id in seen:
            raise Malformed(f"{path}: duplicate sequence id {rec_id!r}")
        seen.add(rec_id)
        if action not in ACTIONS:
            raise Malformed(f"{path}: record {rec_id}: unknown action {action!r}")
        if person < 1:
            raise Malformed(f"{path}: record {rec_id}: person must be >= 1")
        if not frame_dir.is_dir():
            raise MissingPath(f"record {rec_id}: frame_dir {frame_dir} does not exist")
        if not ann_file.is_file():
            raise MissingPath(f"record {rec_id}: annotation_file {ann_file} does not exist")
        if "frame_count" in raw:
            frame_count = int(raw["frame_count"])
        else:
            frame_count = len(
                [p for p in frame_dir.iterdir() if p.name.startswith("frame_") and p.suffix == ".pgm"]
            )
        if frame_count < 2:
            raise Malformed(f"{path}: record {rec_id}: needs at least 2 frames, has {frame_count}")
        records.append(
            SequenceRecord(
                id=rec_id,
                person=person,
                action=action,
                scenario=scenario,
                frame_dir=os.fspath(frame_dir),
                annotation_file=os.fspath(ann_file),
                frame_count=frame_count,
            )
        )
    return DatasetManifest(records=tuple(records))


def load_annotations(path, frame_count=None):
    """Per-frame bounding boxes from "frame x y w h" lines (1-indexed frames).

    Frames absent from the file have no box; `frame_count` is accepted for
    interface symmetry but unlisted frames need no placeholder.
    """
    boxes = {}
    with open(os.fspath(path)) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) != 5:
                raise Malformed(f"{path}:{line_no}: expected 5 fields, got {len(fields)}")
            try:
                frame = int(fields[0])
                x, y, w, h = (int(float(tok)) for tok in fields[1:])
            except ValueError as exc:
                raise Malformed(f"{path}:{line_no}: non-numeric field: {exc}") from exc
            boxes[frame] = BoundingBox(x=x, y=y, w=w, h=h)
    return boxes


def frame_path(frame_dir, index):
    return os.path.join(os.fspath(frame_dir), f"frame_{index:06d}.pgm")


def flow_function(algo, params=None):
    """Bind a solver name + params into a picklable (prev, next) -> FlowField."""
    if algo == "farneback":
        return partial(farneback_flow, params=params if params is not None else FarnebackParams())
    if algo == "tvl1":
        return partial(tvl1_flow, params=params if params is not None else TvL1Params())
    raise ValueError(f"unknown flow algorithm {algo!r}")


def _usable_pairs(record, truncate):
    last_pair = record.frame_count - 1
    if truncate is not None:
        last_pair = max(1, math.floor(last_pair * truncate))
    return range(1, last_pair + 1)


def sequence_descriptor(record, flow_fn, sta_params, truncate=None):
    """STA2 descriptor of a whole sequence.

    For each frame pair (k, k+1) with an annotated box on frame k, the flow's
    grid vector refines the accumulator; the last frame never starts a pair, so
    at most frame_count - 1 grid vectors contribute. Pairs whose clamped box
    cannot hold the grid are skipped like un-annotated ones.
    """
    boxes = load_annotations(record.annotation_file, record.frame_count)
    acc = Sta2Accumulator(sta_params)
    prev_frame = None
    prev_index = None
    for k in _usable_pairs(record, truncate):
        box = boxes.get(k)
        if box is None:
            continue
        frame_a = prev_frame if prev_index == k else load_pgm(frame_path(record.frame_dir, k))
        frame_b = load_pgm(frame_path(record.frame_dir, k + 1))
        flow = flow_fn(frame_a, frame_b)
        try:
            acc.push(grid_vector(flow, box, sta_params))
        except BoxTooSmall:
            pass
        prev_frame, prev_index = frame_b, k + 1
    if acc.t == 0:
        raise NoUsableFrames(f"sequence {record.id}: no frame pair had a usable box")
    return acc.extract()


def _extract_worker(args):
    record, algo, flow_params, sta_params, truncate = args
    flow_fn = flow_function(algo, flow_params)
    try:
        desc = sequence_descriptor(record, flow_fn, sta_params, truncate=truncate)
        return record.id, desc.values
    except NoUsableFrames:
        return record.id, None


def _run_jobs(worker, work_items, jobs):
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(worker, work_items))
    return [worker(item) for item in work_items]


def extract_dataset(manifest, algo, flow_params, sta_params, jobs=1, truncate=None):
    """Descriptors for every sequence; returns (samples, skipped ids).

    Samples carry label = action index and group = person id; sequences with
    no usable frames are reported in `skipped` and excluded.
    """
    work = [(rec, algo, flow_params, sta_params, truncate) for rec in manifest.records]
    results = _run_jobs(_extract_worker, work, jobs)
    samples, skipped = [], []
    for record, (rec_id, values) in zip(manifest.records, results):
        if values is None:
            skipped.append(rec_id)
        else:
            samples.append(
                Sample(features=values, label=ACTIONS.index(record.action), group=record.person)
            )
    return samples, skipped


def lopo_folds(manifest_or_samples):
    """Leave-one-person-out folds ordered by person id.

    Accepts a DatasetManifest (folds of sequence ids) or a list of Samples
    (folds of sample indices).
    """
    if isinstance(manifest_or_samples, DatasetManifest):
        keyed = [(r.person, r.id) for r in manifest_or_samples.records]
    else:
        keyed = [(s.group, idx) for idx, s in enumerate(manifest_or_samples)]
    persons = sorted({person for person, _ in keyed})
    if len(persons) < 2:
        raise SinglePerson(f"cross-validation needs >= 2 persons, found {len(persons)}")
    folds = []
    for person in persons:
        test = [key for p, key in keyed if p == person]
        train = [key for p, key in keyed if p != person]
        folds.append((train, test))
    return folds


def _fold_seed(master_seed, fold_index):
    return int(np.random.SeedSequence([master_seed, fold_index]).generate_state(1, np.uint64)[0])


def _evaluate_fold(args):
    train_samples, test_samples, config = args
    if isinstance(config, ForestConfig):
        model = rf_train(train_samples, config)
        return [(s.label, rf_predict(model, s.features)[0]) for s in test_samples]
    if isinstance(config, SvmConfig):
        model = svm_train(
            train_samples, c=config.c, max_iterations=config.max_iterations, tolerance=config.tolerance
        )
        return [(s.label, svm_predict(model, s.features)) for s in test_samples]
    raise ValueError(f"unknown classifier config {type(config).__name__}")


def cross_validate(samples, config=None, class_names=None, jobs=1):
    """Leave-one-group-out CV; accumulates one confusion matrix over all folds.

    Forest folds get seeds derived from (config.seed, fold index), so results
    are identical for any `jobs` and any fold execution order.
    """
    config = config if config is not None else ForestConfig()
    if not samples:
        raise Empty("no samples to cross-validate")
    n_classes = max(s.label for s in samples) + 1
    if class_names is None:
        class_names = ACTIONS if n_classes == len(ACTIONS) else [str(i) for i in range(n_classes)]

    folds = lopo_folds(samples)
    work = []
    for fold_idx, (train_idx, test_idx) in enumerate(folds):
        fold_config = config
        if isinstance(config, ForestConfig):
            fold_config = replace(config, seed=_fold_seed(config.seed, fold_idx))
        work.append(
            ([samples[i] for i in train_idx], [samples[i] for i in test_idx], fold_config)
        )
    results = _run_jobs(_evaluate_fold, work, jobs)

    confusion = ConfusionMatrix(class_names)
    for fold_pairs in results:
        for true_label, predicted in fold_pairs:
            confusion.add(true_label, predicted)
    return confusion


@dataclass(frozen=True)
class SweepRow:
    algo: str
    flow_params: object
    sta_params: object
    classifier: object
    confusion: ConfusionMatrix
    accuracy: float
    skipped: tuple


def _sweep_descriptor_worker(args):
    """All-sta-combo descriptors for one sequence, computing each flow once."""
    record, algo, flow_params, sta_list, truncate = args
    flow_fn = flow_function(algo, flow_params)
    boxes = load_annotations(record.annotation_file, record.frame_count)
    accs = [Sta2Accumulator(p) for p in sta_list]
    prev_frame = None
    prev_index = None
    for k in _usable_pairs(record, truncate):
        box = boxes.get(k)
        if box is None:
            continue
        frame_a = prev_frame if prev_index == k else load_pgm(frame_path(record.frame_dir, k))
        frame_b = load_pgm(frame_path(record.frame_dir, k + 1))
        flow = flow_fn(frame_a, frame_b)
        for acc, params in zip(accs, sta_list):
            try:
                acc.push(grid_vector(flow, box, params))
            except BoxTooSmall:
                pass
        prev_frame, prev_index = frame_b, k + 1
    return record.id, [acc.extract().values if acc.t > 0 else None for acc in accs]


def sweep(manifest, flow_settings, sta_settings, classifier_settings, jobs=1, truncate=None):
    """Cartesian-product evaluation; rows sorted by accuracy descending.

    flow_settings: list of (algo, params); sta_settings: list of StaParams;
    classifier_settings: list of ForestConfig/SvmConfig.
    """
    flow_settings = list(flow_settings)
    sta_settings = list(sta_settings)
    classifier_settings = list(classifier_settings)
    if not flow_settings or not sta_settings or not classifier_settings:
        raise EmptyGrid("every sweep grid needs at least one entry")

    rows = []
    for algo, flow_params in flow_settings:
        work = [(rec, algo, flow_params, sta_settings, truncate) for rec in manifest.records]
        per_record = _run_jobs(_sweep_descriptor_worker, work, jobs)
        for sta_idx, sta_params in enumerate(sta_settings):
            samples, skipped = [], []
            for record, (rec_id, values_list) in zip(manifest.records, per_record):
                values = values_list[sta_idx]
                if values is None:
                    skipped.append(rec_id)
                else:
                    samples.append(
                        Sample(
                            features=values,
                            label=ACTIONS.index(record.action),
                            group=record.person,
                        )
                    )
            for clf in classifier_settings:
                confusion = cross_validate(samples, clf, jobs=jobs)
                rows.append(
                    SweepRow(
                        algo=algo,
                        flow_params=flow_params,
                        sta_params=sta_params,
                        classifier=clf,
                        confusion=confusion,
                        accuracy=accuracy(confusion),
                        skipped=tuple(skipped),
                    )
                )
    rows.sort(key=lambda row: -row.accuracy)
    return rows


def _params_dict(obj):
    return asdict(obj) if hasattr(obj, "__dataclass_fields__") else dict(obj)


def sweep_rows_to_json(rows, path):
    doc = []
    for row in rows:
        doc.append(
            {
                "algo": row.algo,
                "flow_params": _params_dict(row.flow_params),
                "sta_params": _params_dict(row.sta_params),
                "classifier": {
                    "kind": type(row.classifier).__name__,
                    **_params_dict(row.classifier),
                },
                "accuracy": row.accuracy,
                "confusion": row.confusion.counts.tolist(),
                "labels": list(row.confusion.labels),
                "skipped": list(row.skipped),
            }
        )
    with open(os.fspath(path), "w") as fh:
        json.dump(doc, fh, indent=1)


def sweep_rows_to_csv(rows, path):
    with open(os.fspath(path), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algo", "flow_params", "sta_params", "classifier", "accuracy", "skipped"])
        for row in rows:
            writer.writerow(
                [
                    row.algo,
                    json.dumps(_params_dict(row.flow_params)),
                    json.dumps(_params_dict(row.sta_params)),
                    json.dumps({"kind": type(row.classifier).__name__, **_params_dict(row.classifier)}),
                    f"{row.accuracy:.6f}",
                    ";".join(row.skipped),
                ]
            )


def descriptors_to_csv(records, samples, path):
    """One descriptor per row, label columns (id, person, action) first.

    `records` must align with `samples` (skipped sequences already removed).
    """
    with open(os.fspath(path), "w", newline="") as fh:
        writer = csv.writer(fh)
        for record, sample in zip(records, samples):
            writer.writerow(
                [record.id, record.person, record.action, *np.asarray(sample.features).tolist()]
            )


def descriptor_to_json(descriptor, sta_params, path, meta=None):
    """JSON descriptor dump carrying its StaParams provenance."""
    doc = {
        "kind": descriptor.kind,
        "sta_params": _params_dict(sta_params),
        "values": np.asarray(descriptor.values).tolist(),
    }
    if meta:
        doc.update(meta)
    with open(os.fspath(path), "w") as fh:
        json.dump(doc, fh)
