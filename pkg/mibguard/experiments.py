"""
Comparison grid: every classifier evaluated on every attribute selection.
"""

import json
import logging
from dataclasses import dataclass
from typing import Sequence, TypedDict

from typing_extensions import Unpack

from .common import MaybeList, permute_options
from .dataset import Dataset
from .evaluation import EvalReport, evaluate_cv
from .features import AttributeSelection
from .model import ClassifierSpec
from .types import LABELS, OutputFormat

log = logging.getLogger(__name__)

DEFAULT_CLASSIFIERS = ["bayes", "ibk:1", "j48:2", "rules:1", "bagging:10:j48:2"]
"""The five classifier families with their default parameters"""

DEFAULT_SELECTIONS = [
    "all",
    "top:4:relieff",
    "top:3:relieff",
    "top:4:infogain",
    "top:3:infogain",
    "top:4:correlation",
    "top:3:correlation",
]
"""Full attribute set plus the top 4 and top 3 of every evaluator"""


class GridOptions(TypedDict, total=False):
    """
    Options of a comparison grid. Each value may be a single value or a list of
    values to evaluate one cell per value.
    """

    selection: MaybeList[AttributeSelection]
    classifier: MaybeList[ClassifierSpec]


@dataclass(frozen=True)
class GridResult:
    """Evaluation of one (attribute selection, classifier) cell"""

    selection: AttributeSelection
    report: EvalReport

    def to_dict(self) -> dict:
        """JSON-ready form"""
        return {"selection": str(self.selection), "report": self.report.to_dict()}


def run_grid(
    ds: Dataset,
    k: int = 10,
    seed: int = 1,
    workers: int = 1,
    **kwargs: Unpack[GridOptions],
) -> list[GridResult]:
    """
    Cross-validate every permutation of the given options. Selections vary
    slowest; each selection is applied to the full dataset once.
    """
    kwargs.setdefault(
        "selection", [AttributeSelection.parse(text) for text in DEFAULT_SELECTIONS]
    )
    kwargs.setdefault(
        "classifier", [ClassifierSpec.parse(text) for text in DEFAULT_CLASSIFIERS]
    )

    selected: dict[AttributeSelection, Dataset] = {}
    results = []
    for options in permute_options(
        selection=kwargs["selection"], classifier=kwargs["classifier"]
    ):
        selection = options["selection"]
        if selection not in selected:
            selected[selection] = selection.apply(ds, seed)
            log.info("%s: %s", selection, ", ".join(selected[selection].schema))
        report = evaluate_cv(
            selected[selection], options["classifier"], k, seed, workers
        )
        results.append(GridResult(selection, report))
    return results


def render_grid(results: Sequence[GridResult], fmt: OutputFormat) -> str:
    """
    Per-class F-measure of every classifier, one table per attribute selection,
    each ending with the weighted-average row.
    """
    if fmt == OutputFormat.JSON:
        return json.dumps([result.to_dict() for result in results], indent=2) + "\n"

    by_selection: dict[str, list[GridResult]] = {}
    for result in results:
        by_selection.setdefault(str(result.selection), []).append(result)

    blocks = []
    for selection, cells in by_selection.items():
        width = max(11, *(len(cell.report.classifier) + 2 for cell in cells))
        lines = [
            f"F-measure, attributes {selection}: "
            + ", ".join(cells[0].report.attributes),
            f"{'Class':<13}"
            + "".join(f"{c.report.classifier:>{width}}" for c in cells),
        ]
        for label in LABELS:
            scores = [cell.report.per_class[label.index] for cell in cells]
            if all(m.support == 0 for m in scores):
                continue
            lines.append(
                f"{label.canonical:<13}"
                + "".join(f"{m.f_measure:>{width}.3f}" for m in scores)
            )
        lines.append(
            f"{'Weighted Avg':<13}"
            + "".join(f"{c.report.weighted.f_measure:>{width}.3f}" for c in cells)
        )
        lines.append(
            f"{'Accuracy':<13}"
            + "".join(f"{c.report.accuracy:>{width}.3f}" for c in cells)
        )
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"
