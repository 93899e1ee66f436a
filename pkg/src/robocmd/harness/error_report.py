"""Error analysis over aligned (input, prediction, gold) lists.

Two detectors: collapse clusters, where three or more distinct inputs map to
the same incorrect form (the model falling back to a default), and
sensitivity pairs, inputs one word-edit apart that produce different
predictions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..metrics import levenshtein


@dataclass
class ErrorReport:
    collapse_clusters: list[dict] = field(default_factory=list)
    sensitivity_pairs: list[dict] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.collapse_clusters and not self.sensitivity_pairs

    def to_json(self) -> str:
        return json.dumps(
            {
                "collapse_clusters": self.collapse_clusters,
                "sensitivity_pairs": self.sensitivity_pairs,
            },
            indent=2,
            ensure_ascii=False,
        )

    def to_text(self) -> str:
        lines: list[str] = []
        if self.collapse_clusters:
            lines.append("== inputs collapsing to one incorrect form ==")
            for cluster in self.collapse_clusters:
                lines.append(f"prediction: {cluster['prediction']}")
                for text in cluster["inputs"]:
                    lines.append(f"  - {text}")
        if self.sensitivity_pairs:
            lines.append("== single-word input changes flipping the prediction ==")
            for pair in self.sensitivity_pairs:
                lines.append(f"  {pair['input_a']}  ->  {pair['prediction_a']}")
                lines.append(f"  {pair['input_b']}  ->  {pair['prediction_b']}")
                lines.append("")
        if not lines:
            lines.append("no error patterns detected")
        return "\n".join(lines)


def error_report(
    predictions: list[str],
    inputs: list[str],
    gold: list[str],
    min_cluster: int = 3,
) -> ErrorReport:
    if not (len(predictions) == len(inputs) == len(gold)):
        raise ValueError("predictions, inputs, and gold must align")
    report = ErrorReport()

    wrong_by_prediction: dict[str, set[str]] = {}
    for pred, text, gold_lf in zip(predictions, inputs, gold):
        if pred != gold_lf:
            wrong_by_prediction.setdefault(pred, set()).add(text)
    for pred in sorted(wrong_by_prediction):
        texts = wrong_by_prediction[pred]
        if len(texts) >= min_cluster:
            report.collapse_clusters.append(
                {"prediction": pred, "inputs": sorted(texts)}
            )

    seen_pairs: set[tuple[str, str]] = set()
    for a in range(len(inputs)):
        for b in range(a + 1, len(inputs)):
            if predictions[a] == predictions[b] or inputs[a] == inputs[b]:
                continue
            key = tuple(sorted((inputs[a], inputs[b])))
            if key in seen_pairs:
                continue
            if levenshtein(inputs[a].split(), inputs[b].split()) == 1:
                seen_pairs.add(key)
                report.sensitivity_pairs.append(
                    {
                        "input_a": inputs[a],
                        "prediction_a": predictions[a],
                        "input_b": inputs[b],
                        "prediction_b": predictions[b],
                    }
                )
    return report
