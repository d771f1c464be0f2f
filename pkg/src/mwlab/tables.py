"""CSV and markdown rendering of Monte Carlo summaries."""

from __future__ import annotations

import csv
import io

from mwlab.simulate import McSummary

CSV_COLUMNS = ("scenario", "panel", "estimator", "outcome", "true_ate", "est_ate", "se", "reps", "seed")
TRUE_LABEL = "True average causal effect"


def outcome_header(name: str) -> str:
    if name == "emp":
        return "Emp."
    return name.replace("-", " - ")


def _fmt(x: float) -> str:
    s = f"{x:.3f}"
    return "0.000" if s == "-0.000" and x == 0 else s


def csv_rows(summary: McSummary):
    for label in summary.estimators:
        for o in summary.outcomes:
            yield {
                "scenario": summary.scenario,
                "panel": summary.panel,
                "estimator": label,
                "outcome": o,
                "true_ate": repr(summary.true_ate[o]),
                "est_ate": repr(summary.est_ate[(label, o)]),
                "se": repr(summary.se[(label, o)]),
                "reps": summary.reps,
                "seed": summary.seed,
            }


def to_csv(summaries) -> str:
    if isinstance(summaries, McSummary):
        summaries = [summaries]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for s in summaries:
        writer.writerows(csv_rows(s))
    return buf.getvalue()


def read_csv(text: str) -> list:
    """Parse CSV output back into summaries (one per scenario, in file order)."""
    out = {}
    for row in csv.DictReader(io.StringIO(text)):
        key = row["scenario"]
        if key not in out:
            out[key] = McSummary(
                scenario=key,
                table="",
                panel=row["panel"],
                description="",
                seed=int(row["seed"]),
                reps=int(row["reps"]),
                outcomes=[],
                estimators=[],
                true_ate={},
                est_ate={},
                se={},
            )
        s = out[key]
        label, o = row["estimator"], row["outcome"]
        if label not in s.estimators:
            s.estimators.append(label)
        if o not in s.outcomes:
            s.outcomes.append(o)
        s.true_ate[o] = float(row["true_ate"])
        s.est_ate[(label, o)] = float(row["est_ate"])
        s.se[(label, o)] = float(row["se"])
    return list(out.values())


def to_markdown(summaries, title: str | None = None) -> str:
    """Panels stacked vertically: truth row, then each estimator with its SE row below."""
    if isinstance(summaries, McSummary):
        summaries = [summaries]
    if not summaries:
        return ""
    outcomes = summaries[0].outcomes
    lines = []
    if title:
        lines += [f"**{title}**", ""]
    lines.append("| | " + " | ".join(outcome_header(o) for o in outcomes) + " |")
    lines.append("|---|" + "---|" * len(outcomes))
    for s in summaries:
        heading = f"Panel {s.panel}" + (f": {s.description}" if s.description else "")
        lines.append(f"| *{heading}* |" + " |" * len(outcomes))
        lines.append(f"| {TRUE_LABEL} | " + " | ".join(_fmt(s.true_ate[o]) for o in s.outcomes) + " |")
        for label in s.estimators:
            lines.append(f"| {label} | " + " | ".join(_fmt(s.est_ate[(label, o)]) for o in s.outcomes) + " |")
            lines.append("| | " + " | ".join(f"({_fmt(s.se[(label, o)])})" for o in s.outcomes) + " |")
    lines.append("")
    lines.append(f"Averages over {summaries[0].reps} replications, seed {summaries[0].seed}.")
    return "\n".join(lines) + "\n"


def emit_table(summaries, fmt: str = "csv", title: str | None = None) -> str:
    if fmt == "csv":
        return to_csv(summaries)
    if fmt == "markdown":
        return to_markdown(summaries, title)
    raise ValueError(f"unknown format {fmt!r}; expected csv or markdown")
