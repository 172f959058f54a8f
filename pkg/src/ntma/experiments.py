"""Monte-Carlo drivers: matching-rate slopes, the tree-correlation test, alignment sweeps.

All drivers take a master seed; trial ``i`` of configuration ``c`` draws
from ``substream(seed, c..., i)``, so results do not depend on execution
order and identical inputs give byte-identical CSV output.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import statistics
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .alignment import NtmaParams, align, score
from .random_models import GWParams, sample_erc, sample_gw_pair, substream
from .structures import CorrelatedTreePair, RootedTree
from .weights import weight_root

MIN_SAMPLES_PER_DEPTH = 10
MAX_ATTEMPTS = 1000


# ------------------------------------------------------------ rate slopes


@dataclass(frozen=True)
class DepthSamples:
    d: int
    log_w: tuple[float, ...]
    attempts: int

    @property
    def survival(self) -> float:
        return len(self.log_w) / self.attempts if self.attempts else 0.0


@dataclass(frozen=True)
class RateEstimate:
    """Per-depth samples of ``log W_d`` and the least-squares growth rate."""

    per_d: tuple[DepthSamples, ...]
    slope: float
    intercept: float
    stderr: float
    reference: float  # log(lambda), the slope of d*log(lambda)

    CSV_HEADER = ("d", "samples", "attempts", "survival", "mean_log_w", "std_log_w", "used_in_fit")

    def rows(self) -> list[tuple]:
        out = []
        for ds in self.per_d:
            arr = np.array(ds.log_w)
            out.append(
                (
                    ds.d,
                    len(ds.log_w),
                    ds.attempts,
                    repr(ds.survival),
                    repr(float(arr.mean())) if arr.size else "",
                    repr(float(arr.std())) if arr.size else "",
                    int(len(ds.log_w) >= MIN_SAMPLES_PER_DEPTH),
                )
            )
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.CSV_HEADER)
        writer.writerows(self.rows())
        return buf.getvalue()

    def summary(self) -> dict[str, float]:
        return {"slope": self.slope, "stderr": self.stderr, "intercept": self.intercept, "reference": self.reference}


def _surviving(pair: CorrelatedTreePair, d: int, condition: str) -> bool:
    if condition == "both":
        return pair.t1.count_at_depth(d) > 0 and pair.t2.count_at_depth(d) > 0
    assert pair.intersection is not None
    return pair.intersection.count_at_depth(d) > 0


def sample_conditioned_pair(
    params: GWParams, d: int, seed: int, stream: Sequence[int], condition: str = "both"
) -> tuple[CorrelatedTreePair | None, int]:
    """Rejection-sample a pair surviving to depth ``d``; returns ``(pair or None, attempts)``."""
    if condition not in ("both", "intersection"):
        raise ValueError("condition must be 'both' or 'intersection'")
    if condition == "intersection" and params.independent:
        raise ValueError("independent trees have no intersection")
    p = replace(params, depth_cap=max(d, params.delta, 1))
    for attempt in range(MAX_ATTEMPTS):
        pair = sample_gw_pair(p, substream(seed, *stream, attempt))
        if _surviving(pair, d, condition):
            return pair, attempt + 1
    return None, MAX_ATTEMPTS


def estimate_rate(
    params: GWParams,
    d_min: int,
    d_max: int,
    trials: int,
    seed: int,
    condition: str = "both",
) -> RateEstimate:
    """Estimate the growth rate of ``log W_d`` for a tree-pair model.

    For every ``d`` in ``[d_min, d_max]``, ``trials`` pairs are drawn
    conditioned (by rejection) on survival to depth ``d`` -- of both trees,
    or of their intersection with ``condition="intersection"`` -- and
    ``log W_d`` is recorded.  The slope is the ordinary least-squares fit of
    the per-depth mean of ``log W_d`` against ``d``, over depths with at
    least ``MIN_SAMPLES_PER_DEPTH`` samples.
    """
    if trials < 30:
        raise ValueError("need at least 30 trials")
    if not 1 <= d_min <= d_max:
        raise ValueError("need 1 <= d_min <= d_max")
    per_d = []
    for d in range(d_min, d_max + 1):
        logs = []
        attempts = 0
        for i in range(trials):
            pair, used = sample_conditioned_pair(params, d, seed, (d, i), condition)
            attempts += used
            if pair is None:
                continue
            w = weight_root(pair.t1, pair.t2, d)
            if w > 0:
                logs.append(math.log(w))
        per_d.append(DepthSamples(d, tuple(logs), attempts))
    usable = [ds for ds in per_d if len(ds.log_w) >= MIN_SAMPLES_PER_DEPTH]
    if not usable:
        raise ValueError("no depth collected enough surviving samples (all-extinct regime?)")
    xs = np.array([ds.d for ds in usable], dtype=float)
    ys = np.array([np.mean(ds.log_w) for ds in usable])
    if xs.size >= 3:
        fit = stats.linregress(xs, ys)
        slope, intercept, stderr = float(fit.slope), float(fit.intercept), float(fit.stderr)
    elif xs.size == 2:
        slope = float((ys[1] - ys[0]) / (xs[1] - xs[0]))
        intercept, stderr = float(ys[0] - slope * xs[0]), float("nan")
    else:
        # single depth: fit through the origin, W_0 = 1
        slope, intercept, stderr = float(ys[0] / xs[0]), 0.0, float("nan")
    reference = math.log(params.lam) if params.lam > 0 else float("-inf")
    return RateEstimate(tuple(per_d), slope, intercept, stderr, reference)


# ------------------------------------------------------ hypothesis test


class Decision(str, enum.Enum):
    H0 = "H0"
    H1 = "H1"


def tree_independence_test(t1: RootedTree, t2: RootedTree, d: int, gamma: float) -> Decision:
    """Decide "correlated" (H1) iff ``W_d(t1, t2) >= gamma**d``."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return Decision.H1 if weight_root(t1, t2, d) >= gamma**d else Decision.H0


@dataclass(frozen=True)
class TestReport:
    gamma: float
    d: int
    type1: float
    power_cond: float
    trials: int

    __test__ = False  # not a pytest class

    def as_dict(self) -> dict:
        return {"gamma": self.gamma, "d": self.d, "type1": self.type1, "power_cond": self.power_cond, "trials": self.trials}


def null_weights(lam: float, d: int, trials: int, seed: int) -> np.ndarray:
    """``W_d`` of ``trials`` independent GW(lam) pairs (no conditioning)."""
    params = GWParams(lam, depth_cap=d, independent=True)
    return np.array(
        [weight_root(*_trees(sample_gw_pair(params, substream(seed, 0, i))), d) for i in range(trials)],
        dtype=np.int64,
    )


def alternative_weights(lam: float, s: float, d: int, trials: int, seed: int) -> np.ndarray:
    """``W_d`` of ``trials`` GW(lam, s) pairs conditioned on intersection survival to ``d``."""
    params = GWParams(lam, s, 0, d)
    out = []
    for i in range(trials):
        pair, _ = sample_conditioned_pair(params, d, seed, (1, i), "intersection")
        if pair is None:
            raise ValueError("the intersection tree essentially never survives; need lam*s > 1")
        out.append(weight_root(pair.t1, pair.t2, d))
    return np.array(out, dtype=np.int64)


def _trees(pair: CorrelatedTreePair) -> tuple[RootedTree, RootedTree]:
    return pair.t1, pair.t2


def test_error_rates(lam: float, s: float, d: int, gamma: float, trials: int, seed: int) -> TestReport:
    """Empirical type-I error and conditional power of the threshold test.

    Type-I error is measured on independent GW(lam) pairs; power on GW(lam, s)
    pairs whose intersection tree reaches depth ``d``.
    """
    if trials < 30:
        raise ValueError("need at least 30 trials")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    thr = gamma**d
    h0 = null_weights(lam, d, trials, seed)
    h1 = alternative_weights(lam, s, d, trials, seed)
    return TestReport(gamma, d, float(np.mean(h0 >= thr)), float(np.mean(h1 >= thr)), trials)


test_error_rates.__test__ = False  # type: ignore[attr-defined]


# ------------------------------------------------------- alignment sweep


@dataclass(frozen=True)
class SweepConfig:
    n: tuple[int, ...]
    lam: tuple[float, ...]
    s: tuple[float, ...]
    d: tuple[int, ...]
    gamma: tuple[float, ...]
    variant: tuple[str, ...] = ("ntma2",)
    trials: int = 25
    seed: int = 0

    def cells(self) -> list[tuple[int, float, float, int, float, str]]:
        return [
            (n, lam, s, d, g, v)
            for n in self.n
            for lam in self.lam
            for s in self.s
            for d in self.d
            for g in self.gamma
            for v in self.variant
        ]


SWEEP_HEADER = (
    "n", "lambda", "s", "d", "gamma", "variant", "trials",
    "mean_correct", "sem_correct", "mean_err", "sem_err", "error",
)


@dataclass(frozen=True)
class SweepRow:
    n: int
    lam: float
    s: float
    d: int
    gamma: float
    variant: str
    trials: int
    correct: tuple[float, ...] = ()
    err: tuple[float, ...] = ()
    error: str = ""

    @staticmethod
    def _mean_sem(xs: Sequence[float]) -> tuple[float, float]:
        if not xs:
            return float("nan"), float("nan")
        mean = statistics.fmean(xs)
        sem = statistics.stdev(xs) / math.sqrt(len(xs)) if len(xs) > 1 else 0.0
        return mean, sem

    @property
    def mean_correct(self) -> float:
        return self._mean_sem(self.correct)[0]

    @property
    def mean_err(self) -> float:
        return self._mean_sem(self.err)[0]

    def csv_row(self) -> tuple:
        mc, sc = self._mean_sem(self.correct)
        me, se = self._mean_sem(self.err)
        return (
            self.n, repr(self.lam), repr(self.s), self.d, repr(self.gamma), self.variant, self.trials,
            repr(mc), repr(sc), repr(me), repr(se), self.error,
        )


def run_cell(
    n: int, lam: float, s: float, d: int, gamma: float, variant: str, trials: int, seed: int, cell: int
) -> SweepRow:
    """Score one aligner on ``trials`` ERC(n, lam/n, s) samples."""
    try:
        params = NtmaParams(d, gamma, variant)
        correct, err = [], []
        for i in range(trials):
            pair = sample_erc(n, lam / n, s, substream(seed, cell, i))
            sc = score(align(pair.g1, pair.g2, params), pair.sigma, n)
            correct.append(sc.correct_fraction)
            err.append(sc.err_fraction)
        return SweepRow(n, lam, s, d, gamma, variant, trials, tuple(correct), tuple(err))
    except Exception as exc:  # recorded, never aborts the sweep
        return SweepRow(n, lam, s, d, gamma, variant, trials, error=f"{type(exc).__name__}: {exc}")


def alignment_sweep(config: SweepConfig) -> list[SweepRow]:
    """Run every grid cell; cell ``k`` (in grid order) uses substreams ``(seed, k, trial)``."""
    if not config.cells():
        raise ValueError("empty sweep grid")
    return [
        run_cell(*cell, config.trials, config.seed, k) for k, cell in enumerate(config.cells())
    ]


def sweep_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    writer.writerows(r.csv_row() for r in rows)
    return buf.getvalue()


def parse_sweep_config(text: str) -> SweepConfig:
    """Parse ``key = value`` lines; list values are comma separated, ``#`` starts a comment.

    Keys: ``n``, ``lambda``, ``s``, ``d``, ``gamma``, ``variant`` (lists) and
    ``trials``, ``seed`` (scalars).
    """
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, value = (x.strip() for x in line.split("=", 1))
        raw[key] = value.strip("[]")
    known = {"n", "lambda", "s", "d", "gamma", "variant", "trials", "seed"}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown sweep keys: {sorted(unknown)}")
    missing = {"n", "lambda", "s", "d", "gamma"} - set(raw)
    if missing:
        raise ValueError(f"missing sweep keys: {sorted(missing)}")

    def items(key: str) -> list[str]:
        return [x.strip().strip("\"'") for x in raw[key].split(",") if x.strip()]

    return SweepConfig(
        n=tuple(int(x) for x in items("n")),
        lam=tuple(float(x) for x in items("lambda")),
        s=tuple(float(x) for x in items("s")),
        d=tuple(int(x) for x in items("d")),
        gamma=tuple(float(x) for x in items("gamma")),
        variant=tuple(items("variant")) if "variant" in raw else ("ntma2",),
        trials=int(raw.get("trials", 25)),
        seed=int(raw.get("seed", 0)),
    )
