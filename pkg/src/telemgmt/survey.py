"""Subjective (user-centric) evaluation: five-level Likert item statistics
and the two composite assessment metrics, system ease of use (SEU) and
system degree of relevance (SDR).

Input is a tab-separated table (one item per row: id, prompt, the five
response counts from strongly-disagree to strongly-agree, then the
dataset's own printed mean/mode when it has them). The analyzer always
recomputes from the raw counts; where a printed mean disagrees with its
own distribution the item is flagged rather than trusted. Composites can
be computed from either source so the published summary numbers remain
reproducible alongside the corrected ones.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Literal, Optional

from .rounding import round_frac

SCALE_LABELS = ["strongly disagree", "disagree", "neutral", "agree", "strongly agree"]
MEAN_TOLERANCE = 0.005  # printed vs recomputed means equal within half a cent

MeanSource = Literal["recomputed", "as-printed"]


class EmptyItem(ValueError):
    pass


class UnknownItem(KeyError):
    pass


class SurveyFormatError(ValueError):
    pass


def _check_counts(counts) -> list[int]:
    counts = list(counts)
    if len(counts) != 5:
        raise SurveyFormatError(f"expected 5 counts, got {len(counts)}")
    if any((not isinstance(c, int)) or c < 0 for c in counts):
        raise SurveyFormatError(f"counts must be non-negative integers: {counts}")
    if sum(counts) == 0:
        raise EmptyItem("all-zero response counts")
    return counts


def _mean_frac(counts) -> Fraction:
    counts = _check_counts(counts)
    return Fraction(sum((i + 1) * c for i, c in enumerate(counts)), sum(counts))


def item_mean(counts) -> float:
    """Weighted response mean on the 1..5 scale, two decimals."""
    return round_frac(_mean_frac(counts), 2)


def item_mode(counts) -> int:
    """Modal response level (1..5); ties resolve to the higher level."""
    counts = _check_counts(counts)
    best = max(counts)
    return max(i + 1 for i, c in enumerate(counts) if c == best)


def _agreement_frac(counts) -> Fraction:
    counts = _check_counts(counts)
    return Fraction(counts[3] + counts[4], sum(counts)) * 100


def percent_agreement(counts) -> float:
    """Share of agree + strongly-agree responses, as a percentage."""
    return round_frac(_agreement_frac(counts), 2)


@dataclass
class LikertItem:
    item_id: str
    prompt: str
    counts: list[int]
    printed_mean: Optional[Fraction] = None
    printed_mode: Optional[int] = None

    def __post_init__(self):
        self.counts = _check_counts(self.counts)

    @property
    def respondents(self) -> int:
        return sum(self.counts)


@dataclass
class ItemStats:
    item: LikertItem
    mean: float
    mode: int
    agreement_pct: float
    mean_discrepancy: bool  # printed mean inconsistent with its own counts

    def to_dict(self) -> dict:
        return {
            "item_id": self.item.item_id,
            "counts": self.item.counts,
            "respondents": self.item.respondents,
            "mean": self.mean,
            "printed_mean": None if self.item.printed_mean is None else float(self.item.printed_mean),
            "mode": self.mode,
            "agreement_pct": self.agreement_pct,
            "mean_discrepancy": self.mean_discrepancy,
        }


def analyze_item(item: LikertItem) -> ItemStats:
    mean = item_mean(item.counts)
    discrepancy = (
        item.printed_mean is not None
        and abs(float(item.printed_mean) - mean) > MEAN_TOLERANCE
    )
    return ItemStats(
        item=item,
        mean=mean,
        mode=item_mode(item.counts),
        agreement_pct=percent_agreement(item.counts),
        mean_discrepancy=discrepancy,
    )


@dataclass
class CompositeSpec:
    name: str
    members: list[str]

    def __post_init__(self):
        if not self.members:
            raise SurveyFormatError(f"composite {self.name}: empty member list")


# Membership that reproduces both published composite rows (means 4.22 /
# 4.20 and agreement 90.67% / 88%) from the item-level data; the grouping
# itself was never published. Overridable via a composites config file.
DEFAULT_COMPOSITES = [
    CompositeSpec("SEU", ["Q3", "Q4", "Q10"]),
    CompositeSpec("SDR", ["Q5", "Q6", "Q7", "Q8", "Q9", "Q11"]),
]


def composite(
    spec: CompositeSpec,
    items: dict[str, LikertItem],
    mean_source: MeanSource = "recomputed",
) -> tuple[float, float]:
    """(mean of member means, mean of member agreement percentages).

    mean_source selects recomputed means or the dataset's printed means;
    agreement is always recomputed (the datasets never print it).
    """
    means: list[Fraction] = []
    agreements: list[Fraction] = []
    for member in spec.members:
        item = items.get(member)
        if item is None:
            raise UnknownItem(member)
        if mean_source == "as-printed":
            if item.printed_mean is None:
                raise SurveyFormatError(f"{member}: no printed mean in dataset")
            means.append(item.printed_mean)
        else:
            means.append(_mean_frac(item.counts))
        agreements.append(_agreement_frac(item.counts))
    n = len(spec.members)
    return (
        round_frac(sum(means, Fraction(0)) / n, 2),
        round_frac(sum(agreements, Fraction(0)) / n, 2),
    )


# ---------------------------------------------------------------------------
# Dataset file handling
# ---------------------------------------------------------------------------

def parse_dataset(text: str) -> dict[str, LikertItem]:
    """Parse the tab-separated item table; raises with line numbers."""
    items: dict[str, LikertItem] = {}
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) < 7:
            raise SurveyFormatError(f"line {n}: expected at least 7 tab-separated columns")
        item_id, prompt = cols[0].strip(), cols[1].strip()
        if item_id in items:
            raise SurveyFormatError(f"line {n}: duplicate item id {item_id}")
        try:
            counts = [int(c) for c in cols[2:7]]
        except ValueError as exc:
            raise SurveyFormatError(f"line {n}: bad count: {exc}") from exc
        printed_mean = None
        printed_mode = None
        try:
            if len(cols) > 7 and cols[7].strip():
                printed_mean = Fraction(cols[7].strip())
            if len(cols) > 8 and cols[8].strip():
                printed_mode = int(cols[8].strip())
        except ValueError as exc:
            raise SurveyFormatError(f"line {n}: bad printed statistic: {exc}") from exc
        try:
            items[item_id] = LikertItem(item_id, prompt, counts, printed_mean, printed_mode)
        except (EmptyItem, SurveyFormatError) as exc:
            raise SurveyFormatError(f"line {n}: {exc}") from exc
    if not items:
        raise SurveyFormatError("dataset contains no items")
    return items


def load_dataset(path: str | Path) -> dict[str, LikertItem]:
    return parse_dataset(Path(path).read_text())


def bundled_dataset_text() -> str:
    return resources.files("telemgmt.data").joinpath("appendix_survey.tsv").read_text()


def load_composites(path: str | Path) -> list[CompositeSpec]:
    doc = json.loads(Path(path).read_text())
    return [CompositeSpec(name, list(members)) for name, members in doc.items()]


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------

@dataclass
class SurveyReport:
    stats: list[ItemStats]
    composites_printed: dict[str, tuple[float, float]]
    composites_recomputed: dict[str, tuple[float, float]]
    discrepancies: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "items": [s.to_dict() for s in self.stats],
            "composites": {
                name: {
                    "as_printed": {
                        "mean": self.composites_printed[name][0],
                        "agreement_pct": self.composites_printed[name][1],
                    } if name in self.composites_printed else None,
                    "recomputed": {
                        "mean": self.composites_recomputed[name][0],
                        "agreement_pct": self.composites_recomputed[name][1],
                    },
                }
                for name in self.composites_recomputed
            },
            "discrepancies": self.discrepancies,
        }


def analyze_survey(
    items: dict[str, LikertItem],
    composites: list[CompositeSpec] | None = None,
) -> SurveyReport:
    composites = composites if composites is not None else DEFAULT_COMPOSITES
    stats = [analyze_item(item) for item in items.values()]
    discrepancies = []
    for s in stats:
        if s.mean_discrepancy:
            discrepancies.append(
                f"{s.item.item_id}: printed mean {float(s.item.printed_mean):.2f} "
                f"inconsistent with its counts (recomputed {s.mean:.2f})"
            )
        if s.item.printed_mode is not None and s.item.printed_mode != s.mode:
            discrepancies.append(
                f"{s.item.item_id}: printed mode {s.item.printed_mode} "
                f"inconsistent with its counts (recomputed {s.mode})"
            )
    printed: dict[str, tuple[float, float]] = {}
    recomputed: dict[str, tuple[float, float]] = {}
    for spec in composites:
        # default composites may not apply to a custom dataset
        if not all(m in items for m in spec.members):
            continue
        recomputed[spec.name] = composite(spec, items, "recomputed")
        if all(items[m].printed_mean is not None for m in spec.members):
            printed[spec.name] = composite(spec, items, "as-printed")
    return SurveyReport(stats, printed, recomputed, discrepancies)


def render_survey_report(report: SurveyReport) -> str:
    lines = []
    header = (
        f"{'item':6} {'SD':>4} {'D':>4} {'N':>4} {'A':>4} {'SA':>4} "
        f"{'mean':>6} {'printed':>8} {'mode':>5} {'agree%':>7}"
    )
    lines.append(header)
    for s in report.stats:
        printed = "-" if s.item.printed_mean is None else f"{float(s.item.printed_mean):.2f}"
        flag = "  !" if s.mean_discrepancy else ""
        c = s.item.counts
        lines.append(
            f"{s.item.item_id:6} {c[0]:>4} {c[1]:>4} {c[2]:>4} {c[3]:>4} {c[4]:>4} "
            f"{s.mean:>6.2f} {printed:>8} {s.mode:>5} {s.agreement_pct:>7.2f}{flag}"
        )
    lines.append("")
    for name, (mean, agree) in report.composites_recomputed.items():
        lines.append(f"{name} recomputed: mean {mean:.2f}, agreement {agree:.2f}%")
        if name in report.composites_printed:
            pmean, pagree = report.composites_printed[name]
            lines.append(f"{name} as-printed: mean {pmean:.2f}, agreement {pagree:.2f}%")
    if report.discrepancies:
        lines.append("")
        lines.append(f"discrepancies ({len(report.discrepancies)}):")
        for d in report.discrepancies:
            lines.append(f"  ! {d}")
    else:
        lines.append("")
        lines.append("discrepancies: none")
    return "\n".join(lines) + "\n"
