"""Torsion cocycles and the counting bounds behind torsion-freeness.

A column subset S is a torsion cocycle of M when rank over Q of M_S
strictly exceeds its rank over Z/qZ for some prime q; equivalently, some
invariant factor of M_S exceeds 1.  Witnessing primes are read off the
largest invariant factor instead of looping over the exponentially many
primes a union bound would consider: a rank gap at q happens exactly when
q divides an invariant factor.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from . import _rng, budgets, exactla
from ._primes import witness_prime
from .errors import BudgetError, ParameterError
from .matrix import SparseIntMatrix, incidence_matrix, restrict_columns, transpose
from .model import Hypergraph, sample_gnm


@dataclass(frozen=True)
class CocycleReport:
    """Outcome of testing one column subset for q-torsion.

    witness_prime is the smallest prime factor of the largest invariant
    factor; when that factor has no factor below the trial-division bound
    and is itself composite, torsion is still certified but only a
    "composite witness" is reported (witness_is_composite=True).
    """

    subset: tuple[int, ...]
    is_torsion_cocycle: bool
    witness_prime: int | None
    witness_is_composite: bool
    rank_rational: int
    rank_mod_witness: int | None


@dataclass(frozen=True)
class BalancedProfile:
    """Residue-multiplicity profile of a vector over Z/qZ."""

    vector: tuple[int, ...]
    support_size: int
    max_multiplicity: int
    epsilon: Fraction
    is_balanced: bool


def detect_torsion_cocycle(m: SparseIntMatrix, subset) -> CocycleReport:
    """Smith-normal-form test of one column subset."""
    s = tuple(sorted(subset))
    if len(set(s)) != len(s):
        raise ParameterError("column subset contains repeats")
    ms = restrict_columns(m, s)
    snf = exactla.smith_normal_form(ms)
    torsion = [d for d in snf.invariant_factors if d > 1]
    rank_q = exactla.rank_rational(ms)
    if not torsion:
        return CocycleReport(s, False, None, False, rank_q, None)
    prime, composite = witness_prime(torsion[-1])
    rank_mod = exactla.rank_mod_q(ms, prime) if prime is not None else None
    return CocycleReport(s, True, prime, composite, rank_q, rank_mod)


def _unit_singleton_rows(ms: SparseIntMatrix):
    counts = Counter()
    value = {}
    for i, _, v in ms.entries():
        counts[i] += 1
        value[i] = v
    return [i for i, c in counts.items() if c == 1 and value[i] in (1, -1)]


def _validate_minimal(m: SparseIntMatrix, rep: CocycleReport):
    # Structural consequences of inclusion-minimality; a failure here means
    # the elimination kernel produced an impossible cocycle.
    ms = restrict_columns(m, rep.subset)
    if rep.rank_rational != len(rep.subset):
        raise RuntimeError(
            f"minimal torsion cocycle {rep.subset} has rational rank "
            f"{rep.rank_rational} != {len(rep.subset)}"
        )
    bad = _unit_singleton_rows(ms)
    if bad:
        raise RuntimeError(
            f"minimal torsion cocycle {rep.subset} has unit singleton rows {bad}"
        )


def find_minimal_torsion_cocycles(
    m: SparseIntMatrix, max_subset_size, max_subsets=None
) -> list[CocycleReport]:
    """All inclusion-minimal torsion cocycles with at most max_subset_size
    columns.

    Sizes are searched in ascending order and supersets of found cocycles
    are pruned, so minimality holds by construction; each find is also
    validated against the structural minimality conditions.  The search is
    exponential: it stops with a BudgetError (listing the sizes completed)
    once the subset budget is spent.
    """
    if not 0 <= max_subset_size <= m.n_cols:
        raise ParameterError(
            f"max_subset_size {max_subset_size} outside [0, {m.n_cols}]"
        )
    budget = budgets.enumeration_budget(max_subsets)
    found: list[CocycleReport] = []
    found_sets: list[frozenset] = []
    examined = 0
    for size in range(1, max_subset_size + 1):
        for combo in itertools.combinations(range(m.n_cols), size):
            cs = frozenset(combo)
            if any(f <= cs for f in found_sets):
                continue
            examined += 1
            if examined > budget:
                raise BudgetError(
                    f"cocycle search exceeded its budget of {budget} subsets",
                    completed_sizes=list(range(1, size)),
                )
            rep = detect_torsion_cocycle(m, combo)
            if rep.is_torsion_cocycle:
                _validate_minimal(m, rep)
                found.append(rep)
                found_sets.append(cs)
    return found


def check_small_obstruction(h: Hypergraph, w) -> bool:
    """Both structural preconditions for a minimal torsion cocycle of
    M(h)^T supported on the vertex set w: no hyperedge meets w exactly
    once, and at least |w| hyperedges meet w.  Empty w passes by
    convention."""
    ws = set(w)
    for v in ws:
        if not 1 <= v <= h.n:
            raise ParameterError(f"vertex {v} outside [1, {h.n}]")
    if not ws:
        return True
    touching = 0
    for e in h.edges:
        hits = len(ws.intersection(e))
        if hits == 1:
            return False
        if hits:
            touching += 1
    return touching >= len(ws)


def count_bad_vectors(v, k, q, max_enumeration=None) -> int:
    """|B_q(v)|: sign-alternating k-support vectors w of length len(v)
    with w . v != 0 over Z/qZ, counted by full enumeration of the C(n, k)
    supports."""
    n = len(v)
    if q < 2:
        raise ParameterError(f"modulus must be >= 2, got {q}")
    if not 2 <= k <= n:
        raise ParameterError(f"need 2 <= k <= n, got k={k}, n={n}")
    total = math.comb(n, k)
    budget = budgets.enumeration_budget(max_enumeration)
    if total > budget:
        raise BudgetError(
            f"enumerating C({n},{k}) = {total} supports exceeds the budget {budget}"
        )
    vv = [x % q for x in v]
    count = 0
    for combo in itertools.combinations(range(n), k):
        s = 0
        sign = 1
        for pos in combo:
            s += sign * vv[pos]
            sign = -sign
        if s % q:
            count += 1
    return count


def epsilon_balanced(v, epsilon, q=None) -> BalancedProfile:
    """Profile of v: balanced iff no nonzero residue fills more than an
    epsilon fraction of the support."""
    eps = Fraction(epsilon)
    if not 0 < eps < 1:
        raise ParameterError(f"epsilon must lie in (0, 1), got {eps}")
    vals = tuple(x % q for x in v) if q is not None else tuple(v)
    counts = Counter(x for x in vals if x != 0)
    support = sum(counts.values())
    max_mult = max(counts.values(), default=0)
    balanced = max_mult <= eps * support
    return BalancedProfile(vals, support, max_mult, eps, balanced)


def gamma_bound(k, epsilon) -> Fraction:
    """The exact rational lower-bound constant gamma(k, epsilon) with
    |B_q(v)| >= gamma * |supp(v)|^k.

    Unconditional over all v for odd k; for even k it covers the
    epsilon-balanced vectors.  epsilon must lie in (0, (k-1)!/k^k).
    """
    if k < 3:
        raise ParameterError(f"need k >= 3, got {k}")
    eps = Fraction(epsilon)
    cap = Fraction(math.factorial(k - 1), k**k)
    if not 0 < eps < cap:
        raise ParameterError(f"epsilon {eps} outside the admissible range (0, {cap})")
    balanced_term = Fraction(1, k**k) - eps / math.factorial(k - 1)
    skew_term = eps**k / Fraction(k**k)
    return min(balanced_term, skew_term)


def kernel_support_profile(m: SparseIntMatrix, q, max_enumeration=None):
    """(kernel dimension, largest support size among nonzero kernel
    vectors) of m over Z/qZ, by enumerating the kernel from a basis.

    Fails with a BudgetError (reporting the kernel dimension) when q^dim
    exceeds the enumeration budget.
    """
    basis = exactla.kernel_basis_mod_q(m, q)
    dim = len(basis)
    if dim == 0:
        return 0, 0
    budget = budgets.enumeration_budget(max_enumeration)
    if dim * int(q).bit_length() > 64 or q**dim > budget:
        raise BudgetError(
            f"kernel enumeration needs {q}^{dim} vectors, above the budget {budget}",
            kernel_dim=dim,
        )
    n = m.n_cols
    best = 0
    for coeffs in itertools.product(range(q), repeat=dim):
        vec = [0] * n
        zero = True
        for c, b in zip(coeffs, basis):
            if c:
                zero = False
                for idx, bv in enumerate(b):
                    if bv:
                        vec[idx] = (vec[idx] + c * bv) % q
        if zero:
            continue
        support = sum(1 for x in vec if x)
        if support > best:
            best = support
    return dim, best


# ---------------------------------------------------------------------------
# Verification suites (the CLI `verify` surface).


def _random_dense_matrix(rng, n_rows, n_cols, bound=3):
    rows = [
        [int(rng.integers(-bound, bound + 1)) for _ in range(n_cols)]
        for _ in range(n_rows)
    ]
    return SparseIntMatrix.from_dense(rows)


def claim6_suite(n=8, k=3, trials=30, seed=2026, max_cols=10):
    """Every minimal torsion cocycle found by exhaustive search satisfies
    the two structural minimality conditions, re-checked independently of
    the search: full rational column rank, and no unit singleton row.

    Runs over random integer matrices (up to max_cols columns) and over
    transposed incidence matrices of random hypergraphs.
    """
    violations = 0
    cocycles = 0
    matrices = 0
    for t in range(trials):
        rng = _rng.stream(seed, t)
        if t % 2 == 0:
            n_rows = 2 + int(rng.integers(0, 5))
            n_cols = 2 + int(rng.integers(0, max_cols - 1))
            mat = _random_dense_matrix(rng, n_rows, n_cols)
        else:
            m_edges = int(rng.integers(n // 2 + 1, 2 * n + 1))
            m_edges = min(m_edges, math.comb(n, k))
            h = sample_gnm(n, k, m_edges, seed + 1, t)
            mat = transpose(incidence_matrix(h))
        matrices += 1
        try:
            reps = find_minimal_torsion_cocycles(mat, min(mat.n_cols, max_cols))
        except RuntimeError as exc:
            if isinstance(exc, BudgetError):
                raise
            violations += 1
            continue
        for rep in reps:
            cocycles += 1
            ms = restrict_columns(mat, rep.subset)
            if exactla.rank_rational(ms) != len(rep.subset):
                violations += 1
            if _unit_singleton_rows(ms):
                violations += 1
    return {
        "suite": "claim6",
        "passed": violations == 0,
        "matrices": matrices,
        "cocycles": cocycles,
        "violations": violations,
    }


def lemma7_suite(n=8, k=3, trials=30, seed=2026):
    """Supports of minimal torsion cocycles of M(H)^T always pass the
    hypergraph obstruction check (no edge meets the support exactly once,
    and at least |support| edges meet it)."""
    violations = 0
    cocycles = 0
    for t in range(trials):
        rng = _rng.stream(seed, t)
        m_edges = int(rng.integers(n // 2 + 1, 2 * n + 1))
        m_edges = min(m_edges, math.comb(n, k))
        h = sample_gnm(n, k, m_edges, seed + 1, t)
        mt = transpose(incidence_matrix(h))
        reps = find_minimal_torsion_cocycles(mt, n)
        for rep in reps:
            cocycles += 1
            support = {j + 1 for j in rep.subset}
            if not check_small_obstruction(h, support):
                violations += 1
    return {
        "suite": "lemma7",
        "passed": violations == 0,
        "hypergraphs": trials,
        "cocycles": cocycles,
        "violations": violations,
    }


def _bound_suite(name, k, n_max, qs, trials, seed, epsilon, balanced_only):
    eps = Fraction(epsilon) if epsilon is not None else Fraction(1, k**k)
    gamma = gamma_bound(k, eps)
    violations = 0
    checked = 0
    skipped = 0
    for t in range(trials):
        rng = _rng.stream(seed, t)
        n = k + int(rng.integers(0, n_max - k + 1))
        q = qs[int(rng.integers(0, len(qs)))]
        # mix of dense, sparse and constant-patch vectors
        style = t % 3
        if style == 0:
            v = [int(rng.integers(0, q)) for _ in range(n)]
        elif style == 1:
            v = [
                int(rng.integers(1, q)) if rng.integers(0, 2) else 0
                for _ in range(n)
            ]
        else:
            c = int(rng.integers(1, q))
            v = [c] * n
        profile = epsilon_balanced(v, eps, q)
        if balanced_only and not profile.is_balanced:
            skipped += 1
            continue
        s = profile.support_size
        count = count_bad_vectors(v, k, q)
        checked += 1
        if count < gamma * s**k:
            violations += 1
    return {
        "suite": name,
        "passed": violations == 0,
        "k": k,
        "epsilon": str(eps),
        "gamma": str(gamma),
        "checked": checked,
        "skipped_unbalanced": skipped,
        "violations": violations,
    }


def lemma8_suite(k=3, n_max=10, qs=(2, 3, 5), trials=60, seed=2026, epsilon=None):
    """|B_q(v)| >= gamma(k, eps) |supp(v)|^k over all sampled v, odd k."""
    if k % 2 == 0:
        raise ParameterError("lemma8 suite is for odd k; use lemma10 for even k")
    return _bound_suite("lemma8", k, n_max, qs, trials, seed, epsilon, False)


def lemma10_suite(k=4, n_max=10, qs=(2, 3, 5), trials=60, seed=2026, epsilon=None):
    """Same bound restricted to epsilon-balanced vectors, even k."""
    if k % 2 == 1:
        raise ParameterError("lemma10 suite is for even k; use lemma8 for odd k")
    return _bound_suite("lemma10", k, n_max, qs, trials, seed, epsilon, True)


_SUITES = {
    "claim6": claim6_suite,
    "lemma7": lemma7_suite,
    "lemma8": lemma8_suite,
    "lemma10": lemma10_suite,
}


def run_verification(suites=("claim6", "lemma7", "lemma8", "lemma10"), **kwargs):
    """Run the named suites and aggregate a pass/fail report.

    kwargs are forwarded to each suite where its signature accepts them.
    """
    import inspect

    reports = []
    for name in suites:
        if name not in _SUITES:
            raise ParameterError(f"unknown suite {name!r}")
        fn = _SUITES[name]
        accepted = inspect.signature(fn).parameters
        fn_kwargs = {k: v for k, v in kwargs.items() if k in accepted and v is not None}
        # The bound suites have a fixed parity; when running several suites
        # with one shared k, let a mismatched parity fall back to defaults.
        if name == "lemma8" and fn_kwargs.get("k", 3) % 2 == 0:
            fn_kwargs.pop("k")
        if name == "lemma10" and fn_kwargs.get("k", 4) % 2 == 1:
            fn_kwargs.pop("k")
        reports.append(fn(**fn_kwargs))
    return {"passed": all(r["passed"] for r in reports), "suites": reports}
