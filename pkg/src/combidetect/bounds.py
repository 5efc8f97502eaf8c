"""Closed-form risk bounds and metric-entropy surrogates.

Thresholds are exact formula evaluations; cover/packing sizes are greedy
surrogates in canonical member order (upper bounds on the true covering
number, valid inside every bound that consumes them).  Nothing here draws
data except the type-I cover threshold, which Monte Carlos the null maximum
over the cover it builds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._version import __version__
from .classes import ExplicitClass, SetClass
from .core import IndexSet, SeededRng
from .risk import estimate_emax0

#: direction literals for BoundReport
LOWER_ON_RISK = "lower_bound_on_risk"
UPPER_ON_RISK = "upper_bound_on_risk"
MU_FOR_RISK_LE = "mu_threshold_for_risk_le_delta"
MU_FOR_RISK_GE = "mu_threshold_for_risk_ge_delta"
UPPER_ON_COVER = "upper_bound_on_covering_number"
UPPER_ON_EMAX = "upper_bound_on_emax0"


@dataclass(frozen=True)
class BoundReport:
    name: str
    direction: str
    value: float
    inputs: dict
    degenerate: bool = False
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema": "combidetect.bound.v1",
            "version": __version__,
            "name": self.name,
            "direction": self.direction,
            "value": self.value,
            "inputs": self.inputs,
            "degenerate": self.degenerate,
            "extras": self.extras,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _check_delta(delta: float):
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must be in (0, 1]")


def averaging_threshold(n: int, K: int, delta: float) -> float:
    """mu above which the averaging test's risk is at most delta."""
    _check_delta(delta)
    return math.sqrt(8.0 * n / K**2 * math.log(2.0 / delta))


def max_test_threshold(emax0: float, K: int, delta: float) -> float:
    """mu above which the maximum test run with ``emax0`` has risk <= delta."""
    _check_delta(delta)
    if not np.isfinite(emax0):
        raise ValueError("emax0 must be finite")
    return emax0 / K + 2.0 * math.sqrt(2.0 / K * math.log(2.0 / delta))


def universal_threshold(K: int) -> float:
    """mu below which no test beats risk 1/2, for any class of K-sets."""
    return math.sqrt(4.0 / K * math.log(4.0 / 3.0))


def pairs_risk_lower_bound(mgf: float) -> float:
    """Optimum-risk lower bound 1 - sqrt(mgf - 1)/2 from the overlap MGF
    E exp(mu^2 |S ∩ S'|), clipped at zero."""
    if not mgf >= 1.0:
        raise ValueError("overlap MGF must be >= 1")
    return max(0.0, 1.0 - 0.5 * math.sqrt(mgf - 1.0))


def symmetric_threshold(n: int, K: int, delta: float) -> float:
    """mu below which every symmetric class of K-sets has risk >= delta."""
    _check_delta(delta)
    return math.sqrt(math.log(1.0 + 4.0 * n * (1.0 - delta) ** 2 / K) / K)


def negass_threshold(n: int, K: int, delta: float) -> float:
    """Like symmetric_threshold under negative overlap association; m-free
    for perfect matchings (n = K^2)."""
    _check_delta(delta)
    inner = 1.0 + 4.0 * (1.0 - delta) ** 2
    return math.sqrt(math.log(1.0 + n * math.log(inner) / K**2))


def clique_admissible(m: int, k: int) -> bool:
    return k <= math.sqrt(m * math.log(2.0) / math.e)


def clique_bounds(m: int, k: int, delta: float) -> tuple[float, float]:
    """(upper_mu, lower_mu) for k-cliques of K_m: risk <= delta above
    upper_mu, risk >= 1/2 below lower_mu.  Requires k <= sqrt(m log2 / e)."""
    _check_delta(delta)
    if k < 2 or k > m:
        raise ValueError("need 2 <= k <= m")
    if not clique_admissible(m, k):
        raise ValueError(
            f"clique bounds need k <= sqrt(m log2/e) = {math.sqrt(m * math.log(2.0) / math.e):.4f}, got k = {k}"
        )
    upper = 2.0 * math.sqrt(math.log(m * math.e / k) / (k - 1)) + 4.0 * math.sqrt(
        math.log(2.0 / delta) / (k * (k - 1))
    )
    lower = math.sqrt(math.log(m / (2.0 * k)) / k)
    return upper, lower


def random_subclass_bound(K: int, M: int, t: float) -> BoundReport:
    """Threshold below which the optimum risk stays >= 1/4, from a random
    M-member subclass with median minimum distance t.

    The second term of the published minimum carries a nonpositive constant
    log(sqrt(3)/8); it is evaluated verbatim, reported, and flagged
    degenerate.  The usable value is the first term, which is also the whole
    bound when t^2 = 2K (the median-zero-overlap case).
    """
    if K < 1 or M < 2:
        raise ValueError("need K >= 1 and M >= 2")
    if t < 0 or t * t > 2 * K + 1e-9:
        raise ValueError("need 0 <= t <= sqrt(2K)")
    degenerate = False
    extras: dict = {}
    if M <= 16:
        first = float("nan")
        degenerate = True
        extras["note"] = "M <= 16 makes log(M/16) nonpositive; no usable first term"
    else:
        first = math.sqrt(math.log(M / 16.0) / K)
    denom_sq = K - t * t / 2.0
    if denom_sq <= 0.0:
        second = None
        extras["second_term"] = None
    else:
        second = 8.0 * math.log(math.sqrt(3.0) / 8.0) / math.sqrt(denom_sq)
        extras["second_term"] = second
        extras["verbatim_min"] = min(first, second) if not math.isnan(first) else second
        degenerate = True  # second term is negative, the verbatim minimum is vacuous
    extras["first_term"] = first
    return BoundReport(
        name="random-subclass",
        direction=MU_FOR_RISK_GE,
        value=first,
        inputs={"K": K, "M": M, "t": t},
        degenerate=degenerate,
        extras=extras,
    )


# -- covers, packings, chaining -------------------------------------------


def greedy_cover(spec: SetClass, radius: float, cap: int | None = None) -> list[IndexSet]:
    """Cover of the class at the given canonical radius: walk members in
    canonical order, keep each one not yet within ``radius`` of a kept
    member.  Size upper-bounds the true covering number."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    M = spec.member_matrix(cap)
    N, K = M.shape
    covered = np.zeros(N, dtype=bool)
    kept: list[int] = []
    for i in range(N):
        if covered[i]:
            continue
        kept.append(i)
        ov = np.isin(M, M[i]).sum(axis=1)
        # d = sqrt(2(K - ov)) with an exact integer inside, so the correctly
        # rounded sqrt compares cleanly against a radius given as sqrt(int)
        covered |= np.sqrt(2.0 * (K - ov)) <= radius
    return [IndexSet(tuple(int(v) + 1 for v in M[i]), spec.n) for i in kept]


def packing_estimate(spec: SetClass, t: float, cap: int | None = None) -> int:
    """Size of the greedy maximal t-separated subset in canonical order."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    M = spec.member_matrix(cap)
    N, K = M.shape
    excluded = np.zeros(N, dtype=bool)
    count = 0
    for i in range(N):
        if excluded[i]:
            continue
        count += 1
        ov = np.isin(M, M[i]).sum(axis=1)
        excluded |= np.sqrt(2.0 * (K - ov)) < t  # keep members at distance >= t
    return count


def dudley_bound(
    spec: SetClass,
    constant: float,
    cap: int | None = None,
    grid_points: int = 64,
) -> float:
    """Chaining bound on the null maximum: constant times the entropy
    integral of sqrt(log cover size), midpoint rule on [0, sqrt(2K)].

    The integrand vanishes beyond the class diameter (cover size 1), so the
    upper limit sqrt(2K) >= diam adds nothing.
    """
    if constant <= 0:
        raise ValueError("constant must be positive")
    if grid_points < 1:
        raise ValueError("grid_points must be >= 1")
    hi = math.sqrt(2.0 * spec.K)
    h = hi / grid_points
    total = 0.0
    for i in range(grid_points):
        t = (i + 0.5) * h
        size = len(greedy_cover(spec, t, cap))
        total += math.sqrt(math.log(size)) * h
    return constant * total


def vc_cover_bound(n: int, V: int, t: float) -> float:
    """Uniform cover-size bound e (V+1) (2 e n / t^2)^V for a class of
    VC dimension V in the canonical metric."""
    if V < 1:
        raise ValueError("V must be >= 1")
    if t <= 0:
        raise ValueError("t must be positive")
    return math.e * (V + 1) * (2.0 * math.e * n / t**2) ** V


def evaluate_bound(
    prop: str,
    params: dict,
    *,
    spec: SetClass | None = None,
    rng: SeededRng | None = None,
    trials: int = 10_000,
    cap: int | None = None,
    workers: int = 1,
) -> BoundReport:
    """Uniform entry point for the named closed-form bounds.

    ``params`` carries the scalar inputs each proposition needs; ``spec``
    (and for type1-cover ``rng``) only matter for the class-dependent ones.
    """

    def need(*keys):
        missing = [k for k in keys if k not in params]
        if missing:
            raise ValueError(f"{prop} needs parameters: {', '.join(missing)}")
        return [params[k] for k in keys]

    if prop == "averaging":
        n, K, delta = need("n", "K", "delta")
        return BoundReport(
            "averaging", MU_FOR_RISK_LE, averaging_threshold(n, K, delta),
            inputs={"n": n, "K": K, "delta": delta},
        )
    if prop == "maxtest":
        emax0, K, delta = need("emax0", "K", "delta")
        return BoundReport(
            "maxtest", MU_FOR_RISK_LE, max_test_threshold(emax0, K, delta),
            inputs={"emax0": emax0, "K": K, "delta": delta},
        )
    if prop == "universal":
        (K,) = need("K")
        return BoundReport(
            "universal", MU_FOR_RISK_GE, universal_threshold(K),
            inputs={"K": K}, extras={"delta": 0.5},
        )
    if prop == "pairs":
        (mgf,) = need("mgf")
        return BoundReport(
            "pairs", LOWER_ON_RISK, pairs_risk_lower_bound(mgf),
            inputs={"mgf": mgf},
        )
    if prop == "symmetric":
        n, K, delta = need("n", "K", "delta")
        return BoundReport(
            "symmetric", MU_FOR_RISK_GE, symmetric_threshold(n, K, delta),
            inputs={"n": n, "K": K, "delta": delta},
        )
    if prop == "negass":
        n, K, delta = need("n", "K", "delta")
        return BoundReport(
            "negass", MU_FOR_RISK_GE, negass_threshold(n, K, delta),
            inputs={"n": n, "K": K, "delta": delta},
        )
    if prop == "cliques":
        m, k, delta = need("m", "k", "delta")
        upper, lower = clique_bounds(m, k, delta)
        return BoundReport(
            "cliques", MU_FOR_RISK_LE, upper,
            inputs={"m": m, "k": k, "delta": delta},
            extras={"lower_mu": lower, "lower_delta": 0.5},
        )
    if prop == "random-subclass":
        K, M, t = need("K", "M", "t")
        return random_subclass_bound(K, M, t)
    if prop == "vc-cover":
        n, V, t = need("n", "V", "t")
        return BoundReport(
            "vc-cover", UPPER_ON_COVER, vc_cover_bound(n, V, t),
            inputs={"n": n, "V": V, "t": t},
        )
    if prop == "dudley":
        (constant,) = need("constant")
        if spec is None:
            raise ValueError("dudley needs a set class")
        return BoundReport(
            "dudley", UPPER_ON_EMAX, dudley_bound(spec, constant, cap),
            inputs={"class": spec.to_params(), "constant": constant},
        )
    if prop == "type1-cover":
        (delta,) = need("delta")
        if spec is None or rng is None:
            raise ValueError("type1-cover needs a set class and a seed")
        return type1_bound_threshold(
            spec, delta, trials, rng, cap=cap, workers=workers
        )
    raise ValueError(f"unknown proposition {prop!r}")


PROPS = (
    "averaging", "maxtest", "universal", "pairs", "symmetric", "negass",
    "cliques", "random-subclass", "vc-cover", "dudley", "type1-cover",
)


def type1_bound_threshold(
    spec: SetClass,
    delta: float,
    trials: int,
    rng: SeededRng,
    *,
    cap: int | None = None,
    workers: int = 1,
) -> BoundReport:
    """mu above which the likelihood-ratio rule's type-I error is <= delta,
    via a sqrt(K)/2-cover of the class.

    The null maximum over the cover is Monte Carlo estimated with ``trials``
    draws; the Sudakov-style cap 2 sqrt(2 K log |A|)/K is reported for
    context."""
    _check_delta(delta)
    K = spec.K
    cover = greedy_cover(spec, math.sqrt(K) / 2.0, cap)
    cover_class = ExplicitClass(spec.n, cover)
    est = estimate_emax0(cover_class, trials, rng, cap=cap, workers=workers)
    value = 2.0 / K * est.emax + math.sqrt(32.0 * math.log(2.0 / delta) / K)
    size = len(cover)
    sudakov = 2.0 * math.sqrt(2.0 * K * math.log(size)) / K if size > 1 else 0.0
    return BoundReport(
        name="type1-cover",
        direction=MU_FOR_RISK_LE,
        value=value,
        inputs={
            "class": spec.to_params(),
            "delta": delta,
            "trials": trials,
            "seed": rng.master_seed,
        },
        extras={
            "controls": "type1 only",
            "cover_size": size,
            "emax_cover": est.emax,
            "emax_cover_se": est.std_error,
            "sudakov_cap": sudakov,
        },
    )
