"""Scoring of detector predictions against a labeled dataset.

All metrics are computed in exact rational arithmetic; rounding (two
decimals, half-up) happens only at rendering time, and an undefined metric
renders as "n/a", never as 0.

The imbalance sweep redraws the consistent side of the dataset at fixed
positive/negative ratios. Draws use the Mersenne Twister from the standard
``random`` module; each draw is seeded with a SHA-256-derived sub-seed of
(seed, ratio index, draw index), so serial and parallel execution, and any
two platforms, produce identical reports.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from pathlib import Path
from statistics import median
from typing import Iterable, Literal, Mapping

from .errors import (
    DanglingPairError,
    InsufficientPoolError,
    MissingPairError,
    MissingPredictionError,
    SchemaError,
)

Label = Literal["inconsistent", "consistent"]
PredictionValue = Literal["positive", "negative"]

DEFAULT_RATIOS = ("50/50", "40/60", "30/70", "20/80", "10/90")
DEFAULT_DRAWS = 1000

METRIC_NAMES = ("precision", "recall", "specificity", "f1", "pfp")


# --- dataset ----------------------------------------------------------------

@dataclass(frozen=True)
class DatasetEntry:
    id: str
    label: Label
    project: str = ""
    revision: str = ""
    file: str = ""
    function: str = ""
    pair_id: str | None = None


_REQUIRED_FIELDS = ("id", "label")
_OPTIONAL_FIELDS = ("project", "revision", "file", "function", "pair_id")
_ALL_FIELDS = set(_REQUIRED_FIELDS) | set(_OPTIONAL_FIELDS)


def load_dataset(manifest: Path | str) -> list[DatasetEntry]:
    """Read a line-delimited JSON manifest.

    Each non-blank line is one record with fields id, label
    ("inconsistent" | "consistent"), optional project/revision/file/function,
    and an optional pair_id naming the oppositely-labeled counterpart.
    Schema violations are hard errors citing the offending line.
    """
    path = Path(manifest)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read manifest {path}: {exc}") from exc

    entries: list[DatasetEntry] = []
    by_id: dict[str, DatasetEntry] = {}
    lines_by_id: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            record = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc.msg}", line=lineno) from exc
        if not isinstance(record, dict):
            raise SchemaError("record must be a JSON object", line=lineno)
        unknown = sorted(set(record) - _ALL_FIELDS)
        if unknown:
            raise SchemaError(f"unknown field(s): {', '.join(unknown)}", line=lineno)
        for name in _REQUIRED_FIELDS:
            if name not in record:
                raise SchemaError(f"missing required field {name!r}", line=lineno)
        entry_id = record["id"]
        if not isinstance(entry_id, str) or not entry_id:
            raise SchemaError("id must be a non-empty string", line=lineno)
        if entry_id in by_id:
            raise SchemaError(f"duplicate id {entry_id!r}", line=lineno)
        label = record["label"]
        if label not in ("inconsistent", "consistent"):
            raise SchemaError(
                f"label must be 'inconsistent' or 'consistent', got {label!r}", line=lineno
            )
        pair_id = record.get("pair_id")
        if pair_id is not None and (not isinstance(pair_id, str) or not pair_id):
            raise SchemaError("pair_id must be a non-empty string or omitted", line=lineno)
        for name in ("project", "revision", "file", "function"):
            value = record.get(name, "")
            if not isinstance(value, str):
                raise SchemaError(f"{name} must be a string", line=lineno)
        entry = DatasetEntry(
            id=entry_id,
            label=label,
            project=record.get("project", ""),
            revision=record.get("revision", ""),
            file=record.get("file", ""),
            function=record.get("function", ""),
            pair_id=pair_id,
        )
        entries.append(entry)
        by_id[entry_id] = entry
        lines_by_id[entry_id] = lineno

    for entry in entries:
        if entry.pair_id is None:
            continue
        other = by_id.get(entry.pair_id)
        if other is None:
            raise DanglingPairError(
                f"line {lines_by_id[entry.id]}: pair_id {entry.pair_id!r} does not exist"
            )
        if other.label == entry.label:
            raise SchemaError(
                f"pair_id {entry.pair_id!r} must reference the opposite label",
                line=lines_by_id[entry.id],
            )
    return entries


# --- confusion counts and metrics --------------------------------------------

@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "tn", "fn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def _normalize_prediction(value: object, entry_id: str) -> PredictionValue:
    text = getattr(value, "value", value)
    if text in ("positive", "negative"):
        return text  # type: ignore[return-value]
    raise MissingPredictionError(
        f"prediction for {entry_id!r} must be 'positive' or 'negative', got {value!r}"
    )


def score(
    predictions: Mapping[str, object], entries: Iterable[DatasetEntry]
) -> ConfusionMatrix:
    """Count TP/FP/TN/FN: inconsistent entries are the positive class."""
    tp = fp = tn = fn = 0
    for entry in entries:
        if entry.id not in predictions:
            raise MissingPredictionError(f"no prediction for entry {entry.id!r}")
        predicted = _normalize_prediction(predictions[entry.id], entry.id)
        if entry.label == "inconsistent":
            if predicted == "positive":
                tp += 1
            else:
                fn += 1
        else:
            if predicted == "positive":
                fp += 1
            else:
                tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)


@dataclass(frozen=True)
class MetricsReport:
    """Exact metric values; None marks an undefined metric (zero denominator)."""

    precision: Fraction | None
    recall: Fraction | None
    specificity: Fraction | None
    f1: Fraction | None
    pfp: Fraction | None
    cm: ConfusionMatrix

    def rendered(self) -> dict[str, str]:
        return {name: format_metric(getattr(self, name)) for name in METRIC_NAMES}

    def to_dict(self) -> dict:
        return {
            "exact": {name: format_fraction(getattr(self, name)) for name in METRIC_NAMES},
            "rendered": self.rendered(),
            "cm": {"tp": self.cm.tp, "fp": self.cm.fp, "tn": self.cm.tn, "fn": self.cm.fn},
        }


def metrics(cm: ConfusionMatrix, *, pfp: Fraction | None = None) -> MetricsReport:
    """Precision, recall, specificity, and F1 from confusion counts.

    Each metric is undefined (None) when its denominator is zero; F1 needs
    both precision and recall defined and not both zero.
    """
    precision = Fraction(cm.tp, cm.tp + cm.fp) if cm.tp + cm.fp else None
    recall = Fraction(cm.tp, cm.tp + cm.fn) if cm.tp + cm.fn else None
    specificity = Fraction(cm.tn, cm.tn + cm.fp) if cm.tn + cm.fp else None
    if precision is not None and recall is not None and precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1 = None
    return MetricsReport(
        precision=precision,
        recall=recall,
        specificity=specificity,
        f1=f1,
        pfp=pfp,
        cm=cm,
    )


def pair_fix_precision(
    predictions: Mapping[str, object], entries: Iterable[DatasetEntry]
) -> Fraction | None:
    """Among true positives, the fraction whose fixed counterpart is judged
    consistent. Undefined when there are no true positives."""
    entries = list(entries)
    true_positives = [
        e
        for e in entries
        if e.label == "inconsistent"
        and e.id in predictions
        and _normalize_prediction(predictions[e.id], e.id) == "positive"
    ]
    if not true_positives:
        return None
    recognized = 0
    for entry in true_positives:
        if entry.pair_id is None:
            raise MissingPairError(f"true positive {entry.id!r} has no pair link")
        if entry.pair_id not in predictions:
            raise MissingPredictionError(f"no prediction for paired entry {entry.pair_id!r}")
        if _normalize_prediction(predictions[entry.pair_id], entry.pair_id) == "negative":
            recognized += 1
    return Fraction(recognized, len(true_positives))


# --- rendering ----------------------------------------------------------------

def format_fraction(value: Fraction | None) -> str | None:
    if value is None:
        return None
    return f"{value.numerator}/{value.denominator}"


def parse_fraction(text: str | None) -> Fraction | None:
    if text is None:
        return None
    numerator, denominator = text.split("/")
    return Fraction(int(numerator), int(denominator))


def format_metric(value: Fraction | None) -> str:
    """Two decimals, half-up, leading zero stripped: 15/17 renders as '.88'.

    The value is first settled at three decimals (also half-up) before the
    final two-decimal step, mirroring tables whose entries passed through an
    intermediate three-decimal precision: a figure carried as 0.345 renders
    as '.35', not '.34'. Exact values are never stored rounded.
    """
    if value is None:
        return "n/a"
    at_three = (Decimal(value.numerator) / Decimal(value.denominator)).quantize(
        Decimal("0.001"), rounding=ROUND_HALF_UP
    )
    quantized = at_three.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    text = str(quantized)
    if text.startswith("0."):
        return text[1:]
    if text.startswith("-0."):
        return "-" + text[2:]
    return text


def render_metrics_table(report: MetricsReport, *, title: str = "") -> str:
    """A fixed-width row of the usual columns plus the confusion counts."""
    rendered = report.rendered()
    header = f"{'':12s}{'prec.':>8s}{'spec.':>8s}{'rec.':>8s}{'PFP':>8s}{'F1':>8s}" \
             f"{'TP':>6s}{'FP':>6s}{'TN':>6s}{'FN':>6s}"
    row = (
        f"{(title or 'run'):12s}"
        f"{rendered['precision']:>8s}{rendered['specificity']:>8s}{rendered['recall']:>8s}"
        f"{rendered['pfp']:>8s}{rendered['f1']:>8s}"
        f"{report.cm.tp:>6d}{report.cm.fp:>6d}{report.cm.tn:>6d}{report.cm.fn:>6d}"
    )
    return header + "\n" + row


# --- imbalance sweep -----------------------------------------------------------

@dataclass(frozen=True)
class MetricSummary:
    minimum: Fraction | None
    median: Fraction | None
    maximum: Fraction | None

    def __post_init__(self) -> None:
        values = [self.minimum, self.median, self.maximum]
        defined = [v for v in values if v is not None]
        if defined and len(defined) == 3:
            if not (self.minimum <= self.median <= self.maximum):
                raise ValueError("summary must satisfy min <= median <= max")

    def to_dict(self) -> dict:
        return {
            "min": format_fraction(self.minimum),
            "median": format_fraction(self.median),
            "max": format_fraction(self.maximum),
            "rendered_median": format_metric(self.median),
        }


@dataclass(frozen=True)
class RatioSweep:
    ratio: str
    negatives_drawn: int
    summaries: dict[str, MetricSummary] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "ratio": self.ratio,
            "negatives_drawn": self.negatives_drawn,
            "metrics": {name: summary.to_dict() for name, summary in sorted(self.summaries.items())},
        }


@dataclass(frozen=True)
class SweepReport:
    positives_fixed: int
    n_draws: int
    seed: int
    prng: str
    ratios: tuple[RatioSweep, ...]

    def to_dict(self) -> dict:
        return {
            "positives_fixed": self.positives_fixed,
            "n_draws": self.n_draws,
            "seed": self.seed,
            "prng": self.prng,
            "ratios": [r.to_dict() for r in self.ratios],
        }


_PRNG_NAME = "mersenne-twister (python random module, sha256-derived sub-seeds)"


def _parse_ratio(text: str) -> tuple[int, int]:
    try:
        pos_share, neg_share = (int(part) for part in text.split("/"))
    except (ValueError, TypeError):
        raise ValueError(f"ratio {text!r} must look like '30/70'") from None
    if pos_share <= 0 or neg_share <= 0:
        raise ValueError(f"ratio {text!r} must have positive shares")
    return pos_share, neg_share


def _sub_seed(seed: int, ratio_index: int, draw_index: int) -> int:
    material = f"{seed}|{ratio_index}|{draw_index}".encode("utf-8")
    return int.from_bytes(hashlib.sha256(material).digest()[:8], "big")


def _summarize(values: list[Fraction | None]) -> MetricSummary:
    defined = sorted(v for v in values if v is not None)
    if not defined:
        return MetricSummary(None, None, None)
    return MetricSummary(defined[0], median(defined), defined[-1])


def imbalance_sweep(
    predictions: Mapping[str, object],
    entries: Iterable[DatasetEntry],
    ratios: Iterable[str] = DEFAULT_RATIOS,
    n_draws: int = DEFAULT_DRAWS,
    seed: int = 0,
) -> SweepReport:
    """Redraw the consistent side at each ratio and summarize every metric.

    The inconsistent entries stay fixed in every draw; consistent entries are
    sampled uniformly without replacement. Fully reproducible given the seed.
    """
    entries = list(entries)
    positives = [e for e in entries if e.label == "inconsistent"]
    pool = sorted((e for e in entries if e.label == "consistent"), key=lambda e: e.id)
    if not positives:
        raise ValueError("the sweep needs at least one inconsistent entry")
    if n_draws < 1:
        raise ValueError("n_draws must be >= 1")

    ratio_list = list(ratios)
    ratio_reports: list[RatioSweep] = []
    for ratio_index, ratio_text in enumerate(ratio_list):
        pos_share, neg_share = _parse_ratio(ratio_text)
        needed = (len(positives) * neg_share) // pos_share
        if needed > len(pool):
            raise InsufficientPoolError(
                f"ratio {ratio_text} needs {needed} consistent entries, pool has {len(pool)}"
            )
        per_metric: dict[str, list[Fraction | None]] = {name: [] for name in METRIC_NAMES}
        for draw_index in range(n_draws):
            rng = random.Random(_sub_seed(seed, ratio_index, draw_index))
            drawn = rng.sample(pool, needed)
            subset = positives + drawn
            cm = score(predictions, subset)
            try:
                pfp = pair_fix_precision(predictions, subset)
            except MissingPairError:
                pfp = None  # unpaired datasets still sweep; the pfp cell stays n/a
            report = metrics(cm, pfp=pfp)
            for name in METRIC_NAMES:
                per_metric[name].append(getattr(report, name))
        ratio_reports.append(
            RatioSweep(
                ratio=ratio_text,
                negatives_drawn=needed,
                summaries={name: _summarize(values) for name, values in per_metric.items()},
            )
        )
    return SweepReport(
        positives_fixed=len(positives),
        n_draws=n_draws,
        seed=seed,
        prng=_PRNG_NAME,
        ratios=tuple(ratio_reports),
    )
