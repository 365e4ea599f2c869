"""Mitigation report shared by the gate and measurement pipelines."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

from .neumann import TruncationPlan, combine
from .sampling import EstimateSummary, SeededStream


@dataclass(frozen=True)
class OrderEstimate:
    k: int
    exact: float
    sampled: float
    std_error: float

    def to_dict(self) -> dict:
        return {"k": self.k, "exact": self.exact, "sampled": self.sampled, "std_error": self.std_error}


@dataclass(frozen=True)
class MitigationReport:
    """Exact and sampled noisy values per order, and their truncated-series combinations.

    ``per_order[k-1]`` holds order ``k``; ``per_order[0]`` is the plain noisy
    estimate.  ``combined_std_error`` propagates the per-order standard errors
    through the coefficients.
    """

    plan: TruncationPlan
    per_order: list = field(default_factory=list)
    combined_exact: float = 0.0
    combined_sampled: float = 0.0
    ideal: float = 0.0
    remainder_bound: float = 0.0
    combined_std_error: float = 0.0

    @property
    def guarantee(self) -> str:
        return self.plan.guarantee

    @property
    def noisy_exact(self) -> float:
        return self.per_order[0].exact

    @property
    def noisy_sampled(self) -> float:
        return self.per_order[0].sampled

    def to_dict(self) -> dict:
        return {
            "plan": self.plan.to_dict(),
            "per_order": [o.to_dict() for o in self.per_order],
            "combined_exact": self.combined_exact,
            "combined_sampled": self.combined_sampled,
            "ideal": self.ideal,
            "remainder_bound": self.remainder_bound,
            "combined_std_error": self.combined_std_error,
            "guarantee": self.guarantee,
        }

    def to_json(self, **kwargs) -> str:
        kwargs.setdefault("indent", 2)
        return json.dumps(self.to_dict(), **kwargs)


def sample_orders(
    sampler: Callable[[int, int, SeededStream], EstimateSummary],
    K: int,
    shots: int,
    stream: SeededStream,
    threads: int = 1,
) -> list[EstimateSummary]:
    """Estimate orders ``1..K+1``, each from its own ``("eta", k)`` sub-stream."""
    jobs = [(k, stream.child("eta", k)) for k in range(1, K + 2)]
    if threads <= 1 or len(jobs) == 1:
        return [sampler(k, shots, s) for k, s in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: sampler(job[0], shots, job[1]), jobs))


def build_report(plan, exact, estimates, ideal, remainder_bound) -> MitigationReport:
    per_order = [
        OrderEstimate(k=i + 1, exact=float(e), sampled=est.mean, std_error=est.std_error)
        for i, (e, est) in enumerate(zip(exact, estimates))
    ]
    se = math.sqrt(sum((c * est.std_error) ** 2 for c, est in zip(plan.coeffs, estimates)))
    return MitigationReport(
        plan=plan,
        per_order=per_order,
        combined_exact=combine(exact, plan.coeffs),
        combined_sampled=combine([est.mean for est in estimates], plan.coeffs),
        ideal=float(ideal),
        remainder_bound=float(remainder_bound),
        combined_std_error=se,
    )
