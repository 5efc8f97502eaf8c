"""Monte Carlo risk estimation.

Risk of a test = P(reject | null) + mean over members of P(accept | member),
estimated by independent trials.  Every trial owns the substream
(master_seed, arm, trial_index), so results are byte-identical for a given
(seed, config) regardless of chunking or worker count: per-trial values are
written into a preallocated array and reduced once, in index order.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from ._version import __version__
from .classes import ExplicitClass, SetClass
from .core import AsymmetricClassError, IndexSet, ProblemInstance, SeededRng
from .rules import batch_rejections

_NULL_ARM = 0
_MIXTURE_ARM = 1


def fmt17(x: float) -> str:
    """17 significant digits: exact round trip for IEEE doubles."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class RiskEstimate:
    type1: float
    se_type1: float
    type2: float
    se_type2: float
    total: float
    se_total: float
    trials: int

    @classmethod
    def from_counts(cls, rejects_null: int, accepts_mixture: int, trials: int) -> "RiskEstimate":
        t1 = rejects_null / trials
        t2 = accepts_mixture / trials
        se1 = math.sqrt(t1 * (1 - t1) / trials)
        se2 = math.sqrt(t2 * (1 - t2) / trials)
        return cls(t1, se1, t2, se2, t1 + t2, math.sqrt(se1**2 + se2**2), trials)


@dataclass(frozen=True)
class RiskCurve:
    mu_grid: tuple[float, ...]
    estimates: tuple[RiskEstimate, ...]
    critical_mu: float | None


class EmaxEstimate(NamedTuple):
    emax: float
    std_error: float
    gaussian_cap: float


def emax_upper_cap(spec: SetClass) -> float:
    """sqrt(2 K log N): always an admissible stand-in for the null maximum."""
    return math.sqrt(2.0 * spec.K * math.log(spec.cardinality()))


def _chunk_size(n: int) -> int:
    # bounded work set per chunk; depends on the config only, never on workers
    return max(1, min(1024, 2_000_000 // max(1, n)))


def _draw_block(
    instance: ProblemInstance, arm: int, lo: int, hi: int, rng: SeededRng
) -> np.ndarray:
    n = instance.n
    X = np.empty((hi - lo, n))
    for t in range(lo, hi):
        gen = rng.child(arm, t).generator()
        if arm == _MIXTURE_ARM:
            s = instance.set_class.sample(gen)
            x = gen.standard_normal(n)
            x[s.zero_based()] += instance.mu
        else:
            x = gen.standard_normal(n)
        X[t - lo] = x
    return X


def _per_trial_values(
    value_batch: Callable[[np.ndarray], np.ndarray],
    instance: ProblemInstance,
    arm: int,
    trials: int,
    rng: SeededRng,
    workers: int,
    out_dtype=np.float64,
) -> np.ndarray:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    # warm up caches (and surface cap errors) on this thread before fanning out
    value_batch(np.zeros((1, instance.n)))
    out = np.empty(trials, dtype=out_dtype)
    chunk = _chunk_size(instance.n)
    spans = [(lo, min(lo + chunk, trials)) for lo in range(0, trials, chunk)]

    def run(span):
        lo, hi = span
        out[lo:hi] = value_batch(_draw_block(instance, arm, lo, hi, rng))

    if workers <= 1 or len(spans) <= 1:
        for span in spans:
            run(span)
    else:
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            list(pool.map(run, spans))
    return out


def estimate_risk(
    test: str,
    instance: ProblemInstance,
    trials: int,
    rng: SeededRng,
    *,
    emax0: float | None = None,
    cap: int | None = None,
    workers: int = 1,
) -> RiskEstimate:
    """Monte Carlo risk of one rule: ``trials`` null draws for the type-I
    rate, ``trials`` mixture draws (uniform member, then the shifted vector)
    for the type-II rate."""

    def decide(X: np.ndarray) -> np.ndarray:
        return batch_rejections(test, instance, X, emax0=emax0, cap=cap)

    rej_null = _per_trial_values(decide, instance, _NULL_ARM, trials, rng, workers, np.bool_)
    rej_mix = _per_trial_values(decide, instance, _MIXTURE_ARM, trials, rng, workers, np.bool_)
    return RiskEstimate.from_counts(
        int(np.count_nonzero(rej_null)), trials - int(np.count_nonzero(rej_mix)), trials
    )


def _loglik_batch(instance: ProblemInstance, cap: int | None):
    shift = instance.K * instance.mu**2 / 2.0

    def values(X: np.ndarray) -> np.ndarray:
        return instance.set_class.log_mean_exp_batch(instance.mu, X, cap) - shift

    return values


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))


def estimate_bayes_risk(
    instance: ProblemInstance,
    trials: int,
    rng: SeededRng,
    *,
    cap: int | None = None,
    workers: int = 1,
) -> tuple[float, float]:
    """(estimate, std_error) of the optimum risk 1 - E|L - 1|/2 from null
    draws only.  Sharp near mu = 0; the per-trial variance blows up for
    large mu."""
    if trials < 2:
        raise ValueError("trials must be >= 2")
    loglik = _loglik_batch(instance, cap)

    def values(X: np.ndarray) -> np.ndarray:
        return 1.0 - 0.5 * np.abs(np.expm1(loglik(X)))

    v = _per_trial_values(values, instance, _NULL_ARM, trials, rng, workers)
    return _mean_se(v)


def estimate_bhattacharyya(
    instance: ProblemInstance,
    trials: int,
    rng: SeededRng,
    *,
    cap: int | None = None,
    workers: int = 1,
) -> tuple[float, float]:
    """(estimate, std_error) of rho = E sqrt(L)/2 from null draws."""
    if trials < 2:
        raise ValueError("trials must be >= 2")
    loglik = _loglik_batch(instance, cap)

    def values(X: np.ndarray) -> np.ndarray:
        return 0.5 * np.exp(0.5 * loglik(X))

    v = _per_trial_values(values, instance, _NULL_ARM, trials, rng, workers)
    return _mean_se(v)


def estimate_emax0(
    spec: SetClass,
    trials: int,
    rng: SeededRng,
    *,
    cap: int | None = None,
    workers: int = 1,
) -> EmaxEstimate:
    """Null expectation of max_S X_S, with the analytic cap sqrt(2 K log N)
    reported alongside."""
    if trials < 2:
        raise ValueError("trials must be >= 2")
    instance = ProblemInstance(spec, 0.0)

    def values(X: np.ndarray) -> np.ndarray:
        return spec.max_values_batch(X, cap)

    v = _per_trial_values(values, instance, _NULL_ARM, trials, rng, workers)
    mean, se = _mean_se(v)
    return EmaxEstimate(mean, se, emax_upper_cap(spec))


def _interpolate_half(mu_grid: Sequence[float], totals: Sequence[float]) -> float | None:
    # first grid interval where the total crosses 1/2 from above, linear interp
    for i in range(len(mu_grid) - 1):
        a, b = totals[i], totals[i + 1]
        if a >= 0.5 >= b:
            if a == b:
                return float(mu_grid[i])
            frac = (a - 0.5) / (a - b)
            return float(mu_grid[i] + frac * (mu_grid[i + 1] - mu_grid[i]))
    return None


def scan_critical_mu(
    spec: SetClass,
    test: str,
    mu_grid: Sequence[float],
    trials: int,
    rng: SeededRng,
    *,
    emax0: float | None = None,
    cap: int | None = None,
    workers: int = 1,
) -> RiskCurve:
    """Risk at every grid point (one fresh substream per point), plus the
    interpolated mu where the total first crosses 1/2."""
    grid = [float(m) for m in mu_grid]
    if len(grid) < 1:
        raise ValueError("mu_grid must be nonempty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("mu_grid must be strictly increasing")
    if test == "maximum" and emax0 is None:
        emax0 = emax_upper_cap(spec)
    estimates = []
    for i, mu in enumerate(grid):
        est = estimate_risk(
            test,
            ProblemInstance(spec, mu),
            trials,
            rng.child(i),
            emax0=emax0,
            cap=cap,
            workers=workers,
        )
        estimates.append(est)
    crit = _interpolate_half(grid, [e.total for e in estimates])
    return RiskCurve(tuple(grid), tuple(estimates), crit)


# -- subclass comparisons -------------------------------------------------


@dataclass(frozen=True)
class MonotonicityReport:
    mu_grid: tuple[float, ...]
    class_size: int
    subclass_size: int
    subclass_risk: tuple[RiskEstimate, ...]
    class_risk: tuple[RiskEstimate, ...]
    violated: tuple[bool, ...]

    @property
    def any_violation(self) -> bool:
        return any(self.violated)


def monotonicity_check(
    spec: SetClass,
    subclass_fraction: float,
    mu_grid: Sequence[float],
    trials: int,
    rng: SeededRng,
    *,
    cap: int | None = None,
    workers: int = 1,
) -> MonotonicityReport:
    """Estimate the optimum risk of a uniformly drawn subclass against the
    full class at every grid point.

    Only symmetric families are accepted: for them, the subclass optimum risk
    can never exceed the full-class optimum risk, so a violation beyond
    3 combined standard errors flags an implementation fault.
    """
    if not spec.is_symmetric:
        raise AsymmetricClassError(
            f"{spec!r} is not a symmetric family; the subclass risk ordering is not guaranteed"
        )
    if not 0.0 < subclass_fraction <= 1.0:
        raise ValueError("subclass_fraction must be in (0, 1]")
    N = spec.cardinality()
    spec.member_matrix(cap)  # enumerability gate
    size = max(1, round(subclass_fraction * N))
    gen = rng.child(0).generator()
    ranks = np.sort(gen.choice(int(N), size=size, replace=False))
    members = [
        IndexSet(tuple(int(i) + 1 for i in row), spec.n)
        for row in spec.member_matrix(cap)[ranks]
    ]
    sub = ExplicitClass(spec.n, members)

    grid = [float(m) for m in mu_grid]
    sub_est, full_est, violated = [], [], []
    for i, mu in enumerate(grid):
        ra = estimate_risk(
            "optimal", ProblemInstance(sub, mu), trials, rng.child(1, i), cap=cap, workers=workers
        )
        rc = estimate_risk(
            "optimal", ProblemInstance(spec, mu), trials, rng.child(2, i), cap=cap, workers=workers
        )
        margin = 3.0 * math.sqrt(ra.se_total**2 + rc.se_total**2)
        sub_est.append(ra)
        full_est.append(rc)
        violated.append(ra.total > rc.total + margin)
    return MonotonicityReport(
        tuple(grid), int(N), size, tuple(sub_est), tuple(full_est), tuple(violated)
    )


@dataclass(frozen=True)
class NonmonotonicityReport:
    K: int
    epsilon: float
    mu: float
    n: int
    risk_disjoint: RiskEstimate
    risk_union: RiskEstimate
    risk_witness_averaging: RiskEstimate
    gap: float
    gap_se: float
    side_condition_holds: bool
    side_condition_lhs: float
    side_condition_rhs: float


def _shifted_partition(K: int) -> list[IndexSet]:
    # K+1 cyclic blocks of K+1 consecutive residues starting at j(K+1)+2;
    # for K >= 2 no block contains {1..K}, so the blocks avoid the witness
    # family entirely
    n = (K + 1) ** 2
    blocks = []
    for j in range(K + 1):
        start = j * (K + 1) + 1  # 0-based
        blocks.append(IndexSet(tuple((start + t) % n + 1 for t in range(K + 1)), n))
    return blocks


def nonmonotonicity_demo(
    K: int,
    epsilon: float,
    trials: int,
    rng: SeededRng,
    *,
    workers: int = 1,
) -> NonmonotonicityReport:
    """Subclass whose optimum risk exceeds the full class's.

    The subclass A is a disjoint family of K+1 sets of size K+1 on
    n = (K+1)^2 coordinates; the full class adds every set {1..K, i}.  Those
    added sets share the fixed block {1..K}, which a K-coordinate averaging
    rule detects, so enlarging the class can only help -- while A alone stays
    hard at mu = sqrt(log(4 (K+1) eps^2) / (K+1)).
    """
    if K < 2:
        raise ValueError("K must be >= 2 (no disjoint family avoids the witness sets at K = 1)")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must be in (0, 1)")
    arg = 4.0 * (K + 1) * epsilon**2
    if arg <= 1.0:
        raise ValueError("4 (K+1) epsilon^2 must exceed 1 for a positive mu")
    n = (K + 1) ** 2
    mu = math.sqrt(math.log(arg) / (K + 1))

    blocks = _shifted_partition(K)
    witness = [
        IndexSet(tuple(range(1, K + 1)) + (i,), n) for i in range(K + 1, n + 1)
    ]
    block_keys = {b.indices for b in blocks}
    assert all(w.indices not in block_keys for w in witness)

    sub = ExplicitClass(n, blocks)
    full = ExplicitClass(n, blocks + witness)

    risk_a = estimate_risk(
        "optimal", ProblemInstance(sub, mu), trials, rng.child(0), workers=workers
    )
    risk_c = estimate_risk(
        "optimal", ProblemInstance(full, mu), trials, rng.child(1), workers=workers
    )

    # the witness rule: averaging over the shared block only, ties rejecting
    thr = mu * K / 2.0
    winst = ProblemInstance(ExplicitClass(n, witness), mu)

    def witness_decide(X: np.ndarray) -> np.ndarray:
        return X[:, :K].sum(axis=1) >= thr

    wrej0 = _per_trial_values(witness_decide, winst, _NULL_ARM, trials, rng.child(2), workers, np.bool_)
    wrej1 = _per_trial_values(witness_decide, winst, _MIXTURE_ARM, trials, rng.child(2), workers, np.bool_)
    risk_w = RiskEstimate.from_counts(
        int(np.count_nonzero(wrej0)), trials - int(np.count_nonzero(wrej1)), trials
    )

    side_rhs = math.sqrt(8.0 / K * math.log(2.0 / epsilon))
    return NonmonotonicityReport(
        K=K,
        epsilon=float(epsilon),
        mu=mu,
        n=n,
        risk_disjoint=risk_a,
        risk_union=risk_c,
        risk_witness_averaging=risk_w,
        gap=risk_a.total - risk_c.total,
        gap_se=math.sqrt(risk_a.se_total**2 + risk_c.se_total**2),
        side_condition_holds=mu >= side_rhs,
        side_condition_lhs=mu,
        side_condition_rhs=side_rhs,
    )


# -- serialization --------------------------------------------------------

_CURVE_COLUMNS = ("mu", "type1", "se1", "type2", "se2", "total", "se_total", "trials")


def _config_line(config: dict) -> str:
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


def risk_rows_to_csv(
    rows: Sequence[tuple[float, RiskEstimate]],
    config: dict,
    schema: str,
    critical_mu: float | None = ...,
) -> str:
    """CSV with schema/version/config comment header; 17-significant-digit
    numbers, LF line ends, '.' decimal separator."""
    lines = [
        f"#schema={schema}",
        f"#version={__version__}",
        f"#config={_config_line(config)}",
        ",".join(_CURVE_COLUMNS),
    ]
    for mu, e in rows:
        lines.append(
            ",".join(
                [
                    fmt17(mu),
                    fmt17(e.type1),
                    fmt17(e.se_type1),
                    fmt17(e.type2),
                    fmt17(e.se_type2),
                    fmt17(e.total),
                    fmt17(e.se_total),
                    str(e.trials),
                ]
            )
        )
    if critical_mu is not ...:
        value = "none" if critical_mu is None else fmt17(critical_mu)
        lines.append(f"#critical_mu={value}")
    return "\n".join(lines) + "\n"


def _estimate_dict(mu: float, e: RiskEstimate) -> dict:
    return {
        "mu": mu,
        "type1": e.type1,
        "se1": e.se_type1,
        "type2": e.type2,
        "se2": e.se_type2,
        "total": e.total,
        "se_total": e.se_total,
        "trials": e.trials,
    }


def risk_rows_to_json(
    rows: Sequence[tuple[float, RiskEstimate]],
    config: dict,
    schema: str,
    critical_mu: float | None = ...,
) -> str:
    doc = {
        "schema": schema,
        "version": __version__,
        "config": config,
        "results": [_estimate_dict(mu, e) for mu, e in rows],
    }
    if critical_mu is not ...:
        doc["critical_mu"] = critical_mu
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def curve_to_csv(curve: RiskCurve, config: dict) -> str:
    rows = list(zip(curve.mu_grid, curve.estimates))
    return risk_rows_to_csv(rows, config, "combidetect.scan.v1", curve.critical_mu)


def curve_to_json(curve: RiskCurve, config: dict) -> str:
    rows = list(zip(curve.mu_grid, curve.estimates))
    return risk_rows_to_json(rows, config, "combidetect.scan.v1", curve.critical_mu)
