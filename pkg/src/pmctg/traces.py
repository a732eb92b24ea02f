"""Search trace export: newline-delimited JSON records.

One header record with config and seed, one record per step, one final
record naming the selected sentence. The trace is the primary debugging
artifact for a stochastic search, so every proposal's component scores
are kept.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from .search import EditProposal, SearchTrace


def _proposal_record(prop: EditProposal) -> dict:
    scores = prop.scores
    return {
        "action": prop.action,
        "position": prop.position,
        "candidate": prop.candidate.surface if prop.candidate else None,
        "side": prop.side,
        "flu_raw": scores.flu_raw,
        "edit_raw": scores.edit_raw,
        "sem_raw": scores.sem_raw,
        "exp_raw": scores.exp_raw,
        "flu_norm": scores.flu_norm,
        "edit_norm": scores.edit_norm,
        "sem_norm": scores.sem_norm,
        "exp_norm": scores.exp_norm,
        "combined": scores.combined,
        "probability": prop.probability,
    }


def trace_records(trace: SearchTrace) -> Iterable[dict]:
    cfg = trace.config
    yield {
        "record": "header",
        "task": cfg.task,
        "seed": cfg.seed,
        "max_steps": cfg.resolved_max_steps(),
        "top_k": cfg.top_k,
        "candidate_direction": cfg.candidate_direction,
        "weights": {
            "fluency": cfg.weights.fluency,
            "edit": cfg.weights.edit,
            "semantic": cfg.weights.semantic,
            "expression": cfg.weights.expression,
        },
        "initial": trace.initial.text(),
        "keywords": [
            {"surface": tok.surface, "index": index}
            for tok, index in trace.keywords
        ],
    }
    for i, step in enumerate(trace.steps):
        yield {
            "record": "step",
            "step": i,
            "position": step.position,
            "forced_insert": step.forced_insert,
            "p_edit": list(step.p_edit),
            "proposals": [_proposal_record(p) for p in step.proposals],
            "chosen": step.chosen,
            "action": step.proposals[step.chosen].action,
            "candidate": (
                step.proposals[step.chosen].candidate.surface
                if step.proposals[step.chosen].candidate
                else None
            ),
            "sentence": step.sentence.text(),
        }
    yield {
        "record": "final",
        "best": trace.best.text() if trace.best else None,
        "best_objective": trace.best_objective,
        "best_index": trace.best_index,
    }


def write_trace(trace: SearchTrace, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in trace_records(trace):
            handle.write(json.dumps(record, sort_keys=True) + "\n")


def read_trace(path: str | Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def format_trace(records: list[dict]) -> str:
    """Human-readable rendering of a trace file."""
    lines = []
    for rec in records:
        kind = rec.get("record")
        if kind == "header":
            lines.append(
                f"task={rec['task']} seed={rec['seed']} "
                f"max_steps={rec['max_steps']} top_k={rec['top_k']}"
            )
            lines.append(f"initial: {rec['initial']}")
            if rec.get("keywords"):
                joined = ", ".join(k["surface"] for k in rec["keywords"])
                lines.append(f"keywords: {joined}")
        elif kind == "step":
            chosen = rec["proposals"][rec["chosen"]]
            cand = f" {chosen['candidate']!r}" if chosen["candidate"] else ""
            lines.append(
                f"[{rec['step']:>4}] pos={rec['position']:<3} "
                f"{chosen['action']:<8}{cand:<14} "
                f"combined={chosen['combined']:.4f}  ->  {rec['sentence']}"
            )
        elif kind == "final":
            lines.append(f"best (index {rec['best_index']}): {rec['best']}")
    return "\n".join(lines)
