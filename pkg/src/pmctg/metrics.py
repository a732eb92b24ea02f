"""Evaluation metrics: sentence BLEU, iBLEU, ROUGE-1/2, judge NLL, and
the PMCTG-vs-uniform step-count comparison harness."""

from __future__ import annotations

import statistics
from collections import Counter
from dataclasses import dataclass, field
from math import exp, log
from typing import TYPE_CHECKING, Sequence

from .errors import EmptyInputError
from .lm import CausalLMHandle, sequence_nll
from .text import Sentence

if TYPE_CHECKING:  # pragma: no cover - import cycle guard
    from .encoder import EncoderHandle
    from .keywords import KeywordExtractor
    from .search import SearchConfig, TaskInput


@dataclass(frozen=True)
class BleuConfig:
    """Sentence-BLEU settings: 4-gram, epsilon-smoothed, brevity penalty."""

    max_order: int = 4
    epsilon: float = 0.1
    brevity_penalty: bool = True

    def __post_init__(self):
        if self.max_order < 1:
            raise ValueError("max_order must be >= 1")


DEFAULT_BLEU = BleuConfig()


def _ngrams(surfaces: Sequence[str], n: int) -> Counter:
    return Counter(tuple(surfaces[i : i + n]) for i in range(len(surfaces) - n + 1))


def bleu(hyp: Sentence, ref: Sentence, cfg: BleuConfig = DEFAULT_BLEU) -> float:
    """Smoothed sentence BLEU of hyp against ref, in [0, 1].

    Geometric mean of clipped modified n-gram precisions over orders
    1..min(max_order, len(hyp)); a zero match count is replaced by the
    epsilon numerator. Capping the order at the hypothesis length keeps
    bleu(x, x) = 1 for every non-empty x.
    """
    hyp_surfaces = hyp.surfaces
    ref_surfaces = ref.surfaces
    effective_order = min(cfg.max_order, len(hyp_surfaces))
    log_sum = 0.0
    for n in range(1, effective_order + 1):
        hyp_counts = _ngrams(hyp_surfaces, n)
        ref_counts = _ngrams(ref_surfaces, n)
        matches = sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())
        total = sum(hyp_counts.values())
        numerator = matches if matches > 0 else cfg.epsilon
        log_sum += log(numerator / total)
    score = exp(log_sum / effective_order)
    if cfg.brevity_penalty and len(hyp_surfaces) < len(ref_surfaces):
        score *= exp(1.0 - len(ref_surfaces) / len(hyp_surfaces))
    return min(score, 1.0)


def ibleu(
    gen: Sentence,
    ref: Sentence,
    src: Sentence,
    alpha: float = 0.9,
    cfg: BleuConfig = DEFAULT_BLEU,
) -> float:
    """BLEU against the reference penalized by BLEU against the source."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    return alpha * bleu(gen, ref, cfg) - (1.0 - alpha) * bleu(gen, src, cfg)


def rouge_n(hyp: Sentence, ref: Sentence, n: int) -> float:
    """F1 over clipped n-gram overlap; 0 when ref has no n-grams of order n."""
    if n not in (1, 2):
        raise ValueError("rouge_n supports n in {1, 2}")
    hyp_counts = _ngrams(hyp.surfaces, n)
    ref_counts = _ngrams(ref.surfaces, n)
    ref_total = sum(ref_counts.values())
    hyp_total = sum(hyp_counts.values())
    if ref_total == 0 or hyp_total == 0:
        return 0.0
    matches = sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())
    if matches == 0:
        return 0.0
    recall = matches / ref_total
    precision = matches / hyp_total
    return 2.0 * precision * recall / (precision + recall)


def corpus_nll(judge: CausalLMHandle, sentences: Sequence[Sentence]) -> float:
    """Mean per-token NLL (EOS included) across sentences.

    The judge should be trained on a corpus disjoint from the generation
    backends; that separation is the caller's responsibility.
    """
    if not sentences:
        raise EmptyInputError("corpus_nll requires at least one sentence")
    values = [sequence_nll(judge, s, include_eos=True) for s in sentences]
    return sum(values) / len(values)


@dataclass
class EvalRow:
    index: int
    bleu: float
    rouge1: float
    rouge2: float
    ibleu: float | None = None
    nll: float | None = None


@dataclass
class EvalReport:
    """Per-sentence metric rows plus their arithmetic means."""

    rows: list[EvalRow] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.rows)

    def mean(self, name: str) -> float | None:
        values = [getattr(r, name) for r in self.rows if getattr(r, name) is not None]
        if not values:
            return None
        return sum(values) / len(values)

    def summary(self) -> dict[str, float | int | None]:
        return {
            "count": self.count,
            "bleu": self.mean("bleu"),
            "ibleu": self.mean("ibleu"),
            "rouge1": self.mean("rouge1"),
            "rouge2": self.mean("rouge2"),
            "nll": self.mean("nll"),
        }


def evaluate_sentences(
    hyps: Sequence[Sentence],
    refs: Sequence[Sentence],
    srcs: Sequence[Sentence] | None = None,
    judge: CausalLMHandle | None = None,
    alpha: float = 0.9,
    cfg: BleuConfig = DEFAULT_BLEU,
) -> EvalReport:
    """Aligned per-sentence evaluation; iBLEU only when sources are given."""
    from .errors import LineCountMismatchError

    if len(hyps) != len(refs) or (srcs is not None and len(srcs) != len(hyps)):
        raise LineCountMismatchError("hyp/ref/src line counts differ")
    report = EvalReport()
    for i, (hyp, ref) in enumerate(zip(hyps, refs)):
        row = EvalRow(
            index=i,
            bleu=bleu(hyp, ref, cfg),
            rouge1=rouge_n(hyp, ref, 1),
            rouge2=rouge_n(hyp, ref, 2),
        )
        if srcs is not None:
            row.ibleu = ibleu(hyp, ref, srcs[i], alpha, cfg)
        if judge is not None:
            row.nll = sequence_nll(judge, hyp, include_eos=True)
        report.rows.append(row)
    return report


@dataclass
class MethodResult:
    """One searcher's outcomes over all (input, trial) runs."""

    name: str
    steps_to_target: list[int] = field(default_factory=list)
    final_nll: list[float] = field(default_factory=list)

    @property
    def median_steps(self) -> float:
        return statistics.median(self.steps_to_target)

    @property
    def median_final_nll(self) -> float:
        return statistics.median(self.final_nll)


@dataclass
class ComparisonReport:
    target: float
    max_steps: int
    trials: int
    pmctg: MethodResult = field(default_factory=lambda: MethodResult("pmctg"))
    uniform: MethodResult = field(default_factory=lambda: MethodResult("uniform"))

    def as_table(self) -> str:
        lines = [
            f"target judge NLL <= {self.target:.4f}   "
            f"budget {self.max_steps} steps   trials {self.trials}",
            f"{'method':<10}{'median steps':>14}{'median final NLL':>20}",
        ]
        for m in (self.pmctg, self.uniform):
            lines.append(
                f"{m.name:<10}{m.median_steps:>14.1f}{m.median_final_nll:>20.4f}"
            )
        return "\n".join(lines)


def steps_until_target(
    trace_sentences: Sequence[Sentence],
    judge: CausalLMHandle,
    target: float,
    max_steps: int,
) -> int:
    """Steps until judge NLL first drops to the target; max_steps if never."""
    for k, sentence in enumerate(trace_sentences):
        if sequence_nll(judge, sentence, include_eos=True) <= target:
            return min(k, max_steps)
    return max_steps


def compare_searchers(
    inputs: "Sequence[TaskInput]",
    lm_forward: CausalLMHandle,
    lm_backward: CausalLMHandle | None,
    enc: "EncoderHandle",
    kx: "KeywordExtractor | None",
    judge: CausalLMHandle,
    config: "SearchConfig",
    trials: int,
    target: float,
) -> ComparisonReport:
    """Race PMCTG position selection against uniform position sampling.

    Both searchers get identical budgets and per-trial seeds; the target
    is a judge-NLL threshold, and runs that never reach it are censored
    at the step budget.
    """
    from .search import search, search_baseline_uniform

    if trials < 1:
        raise ValueError("trials must be >= 1")
    max_steps = config.resolved_max_steps()
    report = ComparisonReport(target=target, max_steps=max_steps, trials=trials)
    for task_input in inputs:
        for trial in range(trials):
            trial_config = config.with_seed(config.seed + trial)
            for method, runner in (
                (report.pmctg, search),
                (report.uniform, search_baseline_uniform),
            ):
                best, trace = runner(
                    task_input, lm_forward, lm_backward, enc, kx, trial_config
                )
                method.steps_to_target.append(
                    steps_until_target(trace.sentences(), judge, target, max_steps)
                )
                method.final_nll.append(sequence_nll(judge, best, include_eos=True))
    return report
