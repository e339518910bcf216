"""The add-one-column-at-a-time cokernel process and Monte Carlo sweeps.

A process trial samples one uniformly ordered edge list and computes the
exact cokernel of every recorded column prefix from scratch; recording
happens on a stride grid plus one-step refinement while torsion is in
sight, which localises bursts without paying for every step.  Sweeps and
curves aggregate independent trials keyed by (seed, trial_id), so results
are identical under any parallelism level.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from . import exactla
from .errors import BudgetError, ParameterError
from .matrix import SignPattern, incidence_matrix
from .model import Hypergraph, sample_gnm, sample_gnp


def n_star(n, k) -> int:
    """Largest achievable rank of an alternating incidence matrix: n for
    odd k, n - 1 for even k (vanishing column sums cost one dimension)."""
    if k < 2:
        raise ParameterError(f"uniformity must be >= 2, got {k}")
    return n if k % 2 else n - 1


@dataclass(frozen=True)
class TraceStep:
    m: int
    free_rank: int
    torsion_factors: tuple[int, ...]

    @property
    def torsion_order(self) -> int:
        out = 1
        for d in self.torsion_factors:
            out *= d
        return out

    @property
    def has_torsion(self) -> bool:
        return bool(self.torsion_factors)


@dataclass(frozen=True)
class ProcessTrace:
    n: int
    k: int
    pattern: SignPattern
    seed: int
    trial_id: int
    steps: tuple[TraceStep, ...]


@dataclass(frozen=True)
class BurstSummary:
    first_step: int
    last_step: int
    max_torsion_order: int


def _coker_step(prefix, k, n, max_entries=None) -> exactla.CokernelSummary:
    summary = exactla.cokernel(prefix, max_entries)
    # Columns have Euclidean norm sqrt(k), so the torsion part can never
    # exceed sqrt(k)^n; a breach means the elimination kernel is broken.
    order = summary.torsion_order
    assert order * order <= k**n, "torsion order breached the column-norm budget"
    return summary


def trace_hypergraph(
    h: Hypergraph,
    pattern=SignPattern.ALTERNATING,
    seed=0,
    trial_id=0,
    record_every=1,
    max_entries=None,
) -> ProcessTrace:
    """Prefix process over an already-sampled edge order.

    Records step 0, every record_every-th step, every step following one
    with torsion, and the final step.
    """
    if record_every < 1:
        raise ParameterError(f"record_every must be >= 1, got {record_every}")
    pattern = SignPattern.parse(pattern)
    mat = incidence_matrix(h, pattern)
    m_total = h.m
    steps = []
    m = 0
    prev = None
    while True:
        summary = _coker_step(mat.prefix_columns(m), h.k, h.n, max_entries)
        step = TraceStep(m, summary.free_rank, summary.torsion_factors)
        if prev is not None:
            drop = prev.free_rank - step.free_rank
            assert 0 <= drop <= m - prev.m, "free rank must fall by <= 1 per column"
        steps.append(step)
        prev = step
        if m >= m_total:
            break
        if step.has_torsion:
            m += 1
        else:
            m = min(m_total, (m // record_every + 1) * record_every)
    return ProcessTrace(h.n, h.k, pattern, seed, trial_id, tuple(steps))


def run_process(
    n,
    k,
    m_max,
    pattern=SignPattern.ALTERNATING,
    seed=0,
    trial_id=0,
    record_every=1,
    max_entries=None,
) -> ProcessTrace:
    """Sample one H(n, m_max) edge order and trace its prefix cokernels."""
    h = sample_gnm(n, k, m_max, seed, trial_id)
    return trace_hypergraph(h, pattern, seed, trial_id, record_every, max_entries)


def detect_burst(trace: ProcessTrace) -> BurstSummary | None:
    """First/last recorded step with torsion and the largest torsion order;
    None when the trace is torsion-free."""
    torsion_steps = [s for s in trace.steps if s.has_torsion]
    if not torsion_steps:
        return None
    return BurstSummary(
        torsion_steps[0].m,
        torsion_steps[-1].m,
        max(s.torsion_order for s in torsion_steps),
    )


def trace_to_jsonl(trace: ProcessTrace) -> str:
    """One JSON object per recorded step; torsion values are decimal strings
    because they outgrow doubles long before they outgrow the burst."""
    lines = []
    for s in trace.steps:
        lines.append(
            json.dumps(
                {
                    "step": s.m,
                    "free_rank": s.free_rank,
                    "torsion": [str(d) for d in s.torsion_factors],
                    "torsion_order": str(s.torsion_order),
                },
                separators=(",", ":"),
            )
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Sweeps.


@dataclass(frozen=True)
class SweepCell:
    """One Monte Carlo cell: fixed (n, k, density parameter, pattern).

    param_kind "p" carries an exact rational probability, "m" an exact
    edge count, and "c" the coefficient in p = c log(n) / n^(k-1).
    """

    n: int
    k: int
    param_kind: str
    param_value: object
    pattern: SignPattern = SignPattern.ALTERNATING

    def __post_init__(self):
        if self.param_kind not in ("p", "m", "c"):
            raise ParameterError(f"param_kind must be p, m or c, got {self.param_kind!r}")
        object.__setattr__(self, "pattern", SignPattern.parse(self.pattern))

    def edge_probability(self) -> Fraction:
        if self.param_kind == "p":
            return Fraction(self.param_value)
        if self.param_kind == "c":
            p = float(self.param_value) * math.log(self.n) / self.n ** (self.k - 1)
            return Fraction(p)
        raise ParameterError("cell is parameterised by edge count, not probability")

    def sample(self, seed, trial_id) -> Hypergraph:
        if self.param_kind == "m":
            return sample_gnm(self.n, self.k, int(self.param_value), seed, trial_id)
        return sample_gnp(self.n, self.k, self.edge_probability(), seed, trial_id)


@dataclass(frozen=True)
class SweepRecord:
    cell: SweepCell
    trials: int
    torsion_final: int
    torsion_ever: int
    trivial: int
    coker_Z: int
    mean_free_rank: float
    burst_min: int | None
    burst_max: int | None
    error_count: int = 0


def _sweep_trial(args):
    cell, seed, trial_id, record_every, max_entries = args
    try:
        h = cell.sample(seed, trial_id)
        if record_every >= 1:
            trace = trace_hypergraph(
                h, cell.pattern, seed, trial_id, record_every, max_entries
            )
            final = trace.steps[-1]
            torsion_steps = [s.m for s in trace.steps if s.has_torsion]
        else:
            # Final snapshot only: the *_ever statistics degrade to the
            # final state, which is what the threshold sweeps need.
            summary = _coker_step(
                incidence_matrix(h, cell.pattern), cell.k, cell.n, max_entries
            )
            final = TraceStep(h.m, summary.free_rank, summary.torsion_factors)
            torsion_steps = [h.m] if summary.has_torsion else []
        return {
            "ok": True,
            "free_rank": final.free_rank,
            "torsion_final": final.has_torsion,
            "torsion_steps": torsion_steps,
        }
    except BudgetError as exc:
        return {"ok": False, "error": str(exc)}


def _run_jobs(jobs, worker, parallelism):
    if parallelism <= 1 or len(jobs) <= 1:
        return [worker(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        chunk = max(1, len(jobs) // (parallelism * 4))
        return list(pool.map(worker, jobs, chunksize=chunk))


def sweep(
    cells, trials, seed, parallelism=1, record_every=0, max_entries=None
) -> list[SweepRecord]:
    """Aggregate `trials` independent runs per cell.

    record_every=0 (the default) computes the final cokernel only, which is
    what the threshold probes need; record_every >= 1 runs the full prefix
    process per trial so torsion_ever / burst_window reflect the recorded
    step resolution.  Deterministic for fixed inputs at any parallelism.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    cells = list(cells)
    jobs = [
        (cell, seed, trial, record_every, max_entries)
        for cell in cells
        for trial in range(trials)
    ]
    results = _run_jobs(jobs, _sweep_trial, parallelism)
    records = []
    for idx, cell in enumerate(cells):
        block = results[idx * trials : (idx + 1) * trials]
        oks = [r for r in block if r["ok"]]
        errors = len(block) - len(oks)
        torsion_steps = [m for r in oks for m in r["torsion_steps"]]
        free_ranks = [r["free_rank"] for r in oks]
        records.append(
            SweepRecord(
                cell=cell,
                trials=trials,
                torsion_final=sum(1 for r in oks if r["torsion_final"]),
                torsion_ever=sum(1 for r in oks if r["torsion_steps"]),
                trivial=sum(
                    1
                    for r in oks
                    if r["free_rank"] == 0 and not r["torsion_final"]
                ),
                coker_Z=sum(
                    1
                    for r in oks
                    if r["free_rank"] == 1 and not r["torsion_final"]
                ),
                mean_free_rank=(
                    sum(free_ranks) / len(free_ranks) if free_ranks else float("nan")
                ),
                burst_min=min(torsion_steps) if torsion_steps else None,
                burst_max=max(torsion_steps) if torsion_steps else None,
                error_count=errors,
            )
        )
    return records


def sweep_records_to_csv(records) -> str:
    header = (
        "n,k,param_kind,param_value,pattern,trials,torsion_final,torsion_ever,"
        "trivial,coker_Z,mean_free_rank,burst_min,burst_max"
    )
    lines = [header]
    for r in records:
        c = r.cell
        lines.append(
            ",".join(
                [
                    str(c.n),
                    str(c.k),
                    c.param_kind,
                    str(c.param_value),
                    c.pattern.value,
                    str(r.trials),
                    str(r.torsion_final),
                    str(r.torsion_ever),
                    str(r.trivial),
                    str(r.coker_Z),
                    repr(r.mean_free_rank),
                    "" if r.burst_min is None else str(r.burst_min),
                    "" if r.burst_max is None else str(r.burst_max),
                ]
            )
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Torsion probability curve.


@dataclass(frozen=True)
class CurvePoint:
    m: int
    trials: int
    torsion_fraction: float


def _curve_trial(args):
    n, k, grid, pattern, seed, trial_id, max_entries = args
    h = sample_gnm(n, k, grid[-1], seed, trial_id)
    mat = incidence_matrix(h, pattern)
    flags = []
    for m in grid:
        summary = _coker_step(mat.prefix_columns(m), k, n, max_entries)
        flags.append(summary.has_torsion)
    return flags


def torsion_probability_curve(
    n,
    k,
    m_grid,
    trials,
    seed,
    pattern=SignPattern.ALTERNATING,
    parallelism=1,
    max_entries=None,
) -> list[CurvePoint]:
    """Fraction of trials whose prefix matrix has torsion at exactly m
    columns, for each m in the grid.

    Each trial samples one edge order and evaluates every grid prefix of
    it, so each point is exactly H(n, m)-distributed.
    """
    pattern = SignPattern.parse(pattern)
    grid = sorted(set(int(m) for m in m_grid))
    if not grid:
        raise ParameterError("empty m grid")
    total = math.comb(n, k)
    if grid[0] < 0 or grid[-1] > total:
        raise ParameterError(f"grid outside [0, C({n},{k})={total}]")
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    jobs = [
        (n, k, grid, pattern, seed, trial, max_entries) for trial in range(trials)
    ]
    per_trial = _run_jobs(jobs, _curve_trial, parallelism)
    points = []
    for idx, m in enumerate(grid):
        hits = sum(1 for flags in per_trial if flags[idx])
        points.append(CurvePoint(m, trials, hits / trials))
    return points


def curve_to_csv(points) -> str:
    lines = ["m,trials,torsion_fraction"]
    lines.extend(
        f"{p.m},{p.trials},{p.torsion_fraction!r}" for p in points
    )
    return "\n".join(lines) + "\n"
