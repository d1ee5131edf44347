"""Detection reports: a text verdict, a fragments table and a summary figure."""

from __future__ import annotations

import csv
from collections import Counter
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .rigidity import FrameRewrite  # noqa: E402

FRAGMENT_COLUMNS = ("fragment", "construct", "variant", "predecessors", "branches", "followers",
                    "consumed", "status", "counterexample")


def fragment_rows(rewrite: FrameRewrite):
    groups = [("accepted", f) for f in rewrite.accepted]
    groups += [("approximate", f) for f in rewrite.fragments if f.approximate]
    groups += [("rolled back", f) for f in rewrite.rejected]
    for status, f in groups:
        yield {
            "fragment": f.name,
            "construct": f.construct.value,
            "variant": f.variant.value,
            "predecessors": " ".join(f.predecessor_group),
            "branches": " | ".join(" ".join(b) for b in f.body_branches),
            "followers": " ".join(f.follower_group),
            "consumed": len(f.consumed),
            "status": status,
            "counterexample": "" if f.counterexample is None else ",".join(f.counterexample),
        }


def write_fragments_csv(rewrite: FrameRewrite, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=FRAGMENT_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in fragment_rows(rewrite):
            w.writerow(row)


def validation_text(rewrite: FrameRewrite, verdict) -> str:
    lines = [f"equivalent: {'yes' if verdict is True else 'no'}"]
    if verdict is not True:
        lines.append("counterexample: " + ",".join(verdict))
    lines.append(f"fragments: {len(rewrite.accepted)}")
    for f in rewrite.accepted:
        lines.append(f"  {f.name}: consumed {len(f.consumed)} constraints")
    approx = [f for f in rewrite.fragments if f.approximate]
    if approx:
        lines.append(f"approximate: {len(approx)}")
        for f in approx:
            ce = ",".join(f.counterexample or ())
            lines.append(f"  {f.name}: mined model also accepts {ce}")
    if rewrite.rejected:
        lines.append(f"rolled back: {len(rewrite.rejected)}")
        for f in rewrite.rejected:
            lines.append(f"  {f.name}: counterexample {','.join(f.counterexample or ())}")
    lines.append(f"residual constraints: {len(rewrite.residual)}")
    return "\n".join(lines) + "\n"


def plot_rewrite(rewrite: FrameRewrite, path) -> None:
    """Stacked bars: constraints per template, for each fragment and the residual."""
    columns = [(f.name, f.consumed) for f in rewrite.accepted] + [("residual", rewrite.residual)]
    counts = [Counter(c.template.value for c in cons) for _, cons in columns]
    templates = sorted(set().union(*counts)) if counts else []
    fig, ax = plt.subplots(figsize=(max(4.0, 1.6 * len(columns) + 2), 4.0))
    bottom = [0] * len(columns)
    xs = range(len(columns))
    cmap = plt.get_cmap("tab20")
    for i, t in enumerate(templates):
        heights = [c.get(t, 0) for c in counts]
        ax.bar(xs, heights, bottom=bottom, label=t, color=cmap(i % 20))
        bottom = [b + h for b, h in zip(bottom, heights)]
    ax.set_xticks(list(xs))
    ax.set_xticklabels([n for n, _ in columns], rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("constraints")
    ax.set_title("Constraints per fragment and residual")
    if templates:
        ax.legend(fontsize=7, loc="upper left", bbox_to_anchor=(1.0, 1.0))
    fig.tight_layout()
    fig.savefig(Path(path), dpi=120)
    plt.close(fig)
