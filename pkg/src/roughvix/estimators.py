"""Plain Monte Carlo and multilevel Monte Carlo price estimators.

The multilevel estimator telescopes over grids ``n_l = n0 * 2**l``: the
base level averages plain payoffs, and each correction level averages
``phi(fine) - phi(coarse)`` with the coarse value computed from the same
Gaussian draw by index restriction.  Level counts follow the closed-form
allocation rules: given the Lipschitz constant ``L_phi`` of the payoff
and the rectangle scheme's exact L^2 error constant ``Lambda``,

    c1 = L_phi * Lambda / n0,          c2 = 10 * (L_phi * Lambda)^2 / n0^2,
    L  = max(0, ceil(ln(sqrt(2) c1 / eps) / ln 2)),
    M0 = ceil(2 eps^-2 c2 (L + 1)),

with per-level sample counts ``M_l = ceil(M0 * 2**(-2 l))`` for the
rectangle scheme and ``ceil(M0 * 2**(-(2+H) l))`` for the trapezoid
(which reuses the rectangle's L and M0).  When the closed form for
``Lambda`` does not apply (H >= 1/2, non-constant initial curve, or a
non-Lipschitz payoff), the constants are estimated from a pilot run.

Cost is accounted in normalized units: one unit per scalar multiply in
the ``L @ G`` product, i.e. ``n^2`` per sample at grid size ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HypothesisError, NumericError, UsageError
from .model import ModelParams, gaussian_spec, lambda_integral
from .payoffs import (
    Payoff,
    cv_corrected_payoff,
    cv_moments,
    cv_price,
    geometric_vix2,
    lipschitz_constant,
    payoff_eval,
)
from .sampler import (
    DOMAIN_MC,
    DOMAIN_MLMC,
    DOMAIN_PILOT,
    batch_sizes,
    factor_for,
    restrict_to_coarse,
    sample_fine,
    stream_for,
)
from .schemes import SchemeKind, scheme_vix2

__all__ = [
    "Estimate",
    "MlmcPlan",
    "LevelStat",
    "lambda_constant",
    "mc_price",
    "mlmc_plan",
    "mlmc_price",
    "level_statistics",
]

# Fixed internal seed for pilot constant estimation, so that plans are a
# deterministic function of their arguments.
_PILOT_SEED = 1405
_PILOT_LEVELS = 4
_PILOT_PROBE_M = 10_000


@dataclass(frozen=True)
class Estimate:
    """A priced quantity.

    Attributes
    ----------
    value : float
        Price estimate.
    std_error : float
        Sample standard error of the estimator.
    cost : float
        Normalized cost units (n^2 per sample at grid size n).
    samples_used : tuple
        Sample count per level (single entry for plain MC).
    scheme : SchemeKind
        Discretization used.
    cv_used : bool
        Whether the control variate was applied.
    bias_proxy : float or None
        For multilevel runs, |mean of the last correction level|;
        diagnostic only.
    """

    value: float
    std_error: float
    cost: float
    samples_used: tuple
    scheme: SchemeKind
    cv_used: bool
    bias_proxy: float | None = None

    def __post_init__(self):
        if self.std_error < 0:
            raise UsageError("std_error must be >= 0")
        if self.cost <= 0:
            raise UsageError("cost must be > 0")
        if any(m < 1 for m in self.samples_used):
            raise UsageError("samples_used entries must be >= 1")


@dataclass(frozen=True)
class MlmcPlan:
    """A fully specified multilevel allocation.

    ``n_levels[l] = n0 * 2**l``; ``m_levels`` are the per-level sample
    counts; `lam` is the closed-form error constant when available
    (None when constants came from a pilot run).
    """

    n0: int
    L: int
    n_levels: tuple
    m_levels: tuple
    lam: float | None
    c1: float
    c2: float
    epsilon: float
    scheme: SchemeKind
    constants_source: str = "closed-form"

    def __post_init__(self):
        if self.L < 0 or len(self.n_levels) != self.L + 1 or len(self.m_levels) != self.L + 1:
            raise UsageError("plan must carry L+1 grid sizes and sample counts")
        for level, n in enumerate(self.n_levels):
            if n != self.n0 * 2**level:
                raise UsageError(
                    f"n_levels[{level}] = {n} != n0 * 2^{level} = {self.n0 * 2 ** level}"
                )
        if any(m < 1 for m in self.m_levels):
            raise UsageError("all m_levels must be >= 1")
        if any(b > a for a, b in zip(self.m_levels, self.m_levels[1:])):
            raise UsageError("m_levels must be monotone nonincreasing")

    @property
    def cost(self) -> float:
        """Normalized cost ``sum_l M_l * n_l^2``."""
        return float(
            sum(m * n**2 for m, n in zip(self.m_levels, self.n_levels))
        )


@dataclass(frozen=True)
class LevelStat:
    """Empirical statistics of one multilevel correction level."""

    level: int
    n: int
    variance: float
    mean_correction: float
    cost_per_sample: float


def lambda_constant(params: ModelParams) -> float:
    """Exact leading constant of the rectangle scheme's L^2 error.

    ``Lambda = (exp(X0)/2) * sqrt(exp(eta^2 T^{2H}/(2H))
    + exp(eta^2 ((T+Delta)^{2H} - Delta^{2H})/(2H)) - 2 exp(eta^2 I))``
    with ``I`` the :func:`~roughvix.model.lambda_integral`.  Requires
    H in (0, 1/2) and a constant initial curve.
    """
    if not params.x0_is_constant:
        raise HypothesisError(
            "the closed-form error constant requires a constant initial curve; "
            "use pilot estimation instead"
        )
    if not (0.0 < params.H < 0.5):
        raise HypothesisError(
            f"the closed-form error constant requires H in (0, 1/2), got H={params.H}; "
            "use pilot estimation instead"
        )
    H, eta, T, Delta = params.H, params.eta, params.T, params.Delta
    x0 = params.x0_constant_value
    t1 = math.exp(eta**2 * T ** (2 * H) / (2 * H))
    t2 = math.exp(eta**2 * ((T + Delta) ** (2 * H) - Delta ** (2 * H)) / (2 * H))
    t3 = math.exp(eta**2 * lambda_integral(params))
    bracket = t1 + t2 - 2.0 * t3
    if bracket < -1e-9 * max(t1, t2):
        raise NumericError(f"error-constant bracket is negative: {bracket}")
    return 0.5 * math.exp(x0) * math.sqrt(max(bracket, 0.0))


class _MomentAccumulator:
    """Streaming mean/variance with a fixed shift and extended-precision totals.

    The shift (first batch mean) removes the catastrophic cancellation that
    a direct sum-of-squares accumulation would suffer when the variance is
    many orders of magnitude below the mean, as happens with the control
    variate.  Totals are combined with ``math.fsum`` so the result does not
    depend on the number of batches.
    """

    def __init__(self):
        self._shift = None
        self._linear = []
        self._square = []
        self._count = 0

    def add(self, values: np.ndarray) -> None:
        if self._shift is None:
            self._shift = float(values.mean())
        centered = values - self._shift
        self._linear.append(float(np.sum(centered)))
        self._square.append(float(np.sum(centered * centered)))
        self._count += values.size

    @property
    def count(self) -> int:
        return self._count

    @property
    def mean(self) -> float:
        return self._shift + math.fsum(self._linear) / self._count

    @property
    def variance(self) -> float:
        if self._count < 2:
            return 0.0
        s1 = math.fsum(self._linear)
        s2 = math.fsum(self._square)
        return max(s2 - s1 * s1 / self._count, 0.0) / (self._count - 1)


def mc_price(
    scheme: SchemeKind,
    n: int,
    M: int,
    payoff: Payoff,
    use_cv: bool,
    params: ModelParams,
    seed: int,
    stream_key: tuple = (),
) -> Estimate:
    """Plain Monte Carlo price from `M` i.i.d. samples at grid size `n`.

    With ``use_cv`` the control-variate-corrected payoff is averaged
    instead of the plain one.  ``stream_key`` prefixes the RNG spawn keys
    so that embedding experiments can guarantee stream independence.
    """
    if n < 1:
        raise UsageError(f"n must be >= 1, got {n}")
    if M < 2:
        raise UsageError(f"M must be >= 2, got {M}")
    spec = gaussian_spec(params, n)
    factor = factor_for(params, n)
    cv_n = cv_price(payoff, cv_moments(spec, n)) if use_cv else 0.0

    acc = _MomentAccumulator()
    for index, width in enumerate(batch_sizes(n, M)):
        stream = stream_for(seed, *stream_key, DOMAIN_MC, index)
        sample = sample_fine(factor, spec.mean, stream, size=width)
        vix2 = scheme_vix2(scheme, sample)
        if use_cv:
            values = cv_corrected_payoff(
                payoff, vix2, geometric_vix2(sample.values), cv_n
            )
        else:
            values = payoff_eval(payoff, vix2)
        acc.add(np.asarray(values))

    variance = acc.variance
    return Estimate(
        value=acc.mean,
        std_error=math.sqrt(variance / M),
        cost=float(n) ** 2 * M,
        samples_used=(M,),
        scheme=scheme,
        cv_used=use_cv,
    )


def _remark_allocation(epsilon: float, c1: float, c2: float) -> tuple:
    """The closed-form (L, M0) allocation for a target RMSE `epsilon`."""
    if c1 > 0:
        levels = max(0, math.ceil(math.log(math.sqrt(2.0) * c1 / epsilon) / math.log(2.0)))
    else:
        levels = 0
    m0 = max(1, math.ceil(2.0 * epsilon**-2 * c2 * (levels + 1)))
    return levels, m0


def _level_decay(scheme: SchemeKind, params: ModelParams) -> float:
    """Per-level decay exponent of the sample counts."""
    return 2.0 if scheme is SchemeKind.RECTANGLE else 2.0 + params.H


def mlmc_plan(
    epsilon: float,
    n0: int,
    scheme: SchemeKind,
    payoff: Payoff,
    params: ModelParams,
    constants: str = "auto",
) -> MlmcPlan:
    """Build the multilevel allocation for a target RMSE `epsilon`.

    `constants` selects where (c1, c2) come from: "closed-form" insists on
    the exact error constant (raises when its hypotheses fail), "pilot"
    always estimates them from a probe run, and "auto" prefers the closed
    form with a pilot fallback.  The trapezoid scheme reuses the
    rectangle-based (L, M0) and only changes the per-level decay.
    """
    if epsilon <= 0:
        raise UsageError(f"epsilon must be > 0, got {epsilon}")
    if n0 < 1:
        raise UsageError(f"n0 must be >= 1, got {n0}")
    if constants not in ("auto", "closed-form", "pilot"):
        raise UsageError(f"unknown constants mode: {constants!r}")

    lam = None
    if constants in ("auto", "closed-form"):
        try:
            lam = lambda_constant(params)
            lphi = lipschitz_constant(payoff)
        except HypothesisError:
            if constants == "closed-form":
                raise
            lam = None
    if lam is not None:
        c1 = lphi * lam / n0
        c2 = 10.0 * lphi**2 * lam**2 / n0**2
        source = "closed-form"
    else:
        c1, c2 = _pilot_constants(n0, payoff, params)
        source = "pilot"

    levels, m0 = _remark_allocation(epsilon, c1, c2)
    decay = _level_decay(scheme, params)
    m_levels = tuple(
        max(1, math.ceil(m0 * 2.0 ** (-decay * level))) for level in range(levels + 1)
    )
    return MlmcPlan(
        n0=n0,
        L=levels,
        n_levels=tuple(n0 * 2**level for level in range(levels + 1)),
        m_levels=m_levels,
        lam=lam,
        c1=c1,
        c2=c2,
        epsilon=epsilon,
        scheme=scheme,
        constants_source=source,
    )


def _correction_batch(
    scheme: SchemeKind,
    payoff: Payoff,
    params: ModelParams,
    n_fine: int,
    width: int,
    stream,
) -> np.ndarray:
    """One batch of coupled corrections ``phi(fine) - phi(coarse)``."""
    spec = gaussian_spec(params, n_fine)
    factor = factor_for(params, n_fine)
    fine = sample_fine(factor, spec.mean, stream, size=width)
    coarse = restrict_to_coarse(fine)
    return np.asarray(
        payoff_eval(payoff, scheme_vix2(scheme, fine))
        - payoff_eval(payoff, scheme_vix2(scheme, coarse))
    )


def _base_batch(
    scheme: SchemeKind,
    payoff: Payoff,
    params: ModelParams,
    n0: int,
    width: int,
    stream,
) -> np.ndarray:
    """One batch of plain payoffs at the base grid."""
    spec = gaussian_spec(params, n0)
    factor = factor_for(params, n0)
    sample = sample_fine(factor, spec.mean, stream, size=width)
    return np.asarray(payoff_eval(payoff, scheme_vix2(scheme, sample)))


def _level_moments(
    scheme: SchemeKind,
    payoff: Payoff,
    params: ModelParams,
    plan_n0: int,
    level: int,
    m: int,
    seed: int,
    stream_key: tuple,
    domain: int,
) -> _MomentAccumulator:
    """Mean/variance accumulator for one level's samples."""
    n_fine = plan_n0 * 2**level
    acc = _MomentAccumulator()
    for index, width in enumerate(batch_sizes(n_fine, m)):
        stream = stream_for(seed, *stream_key, domain, level, index)
        if level == 0:
            batch = _base_batch(scheme, payoff, params, plan_n0, width, stream)
        else:
            batch = _correction_batch(scheme, payoff, params, n_fine, width, stream)
        acc.add(batch)
    return acc


def mlmc_price(
    plan: MlmcPlan,
    payoff: Payoff,
    params: ModelParams,
    seed: int,
    stream_key: tuple = (),
) -> Estimate:
    """Run the multilevel estimator described by `plan`.

    Level 0 averages plain payoffs on the base grid; level l >= 1 averages
    coupled corrections on independent streams.  The reported standard
    error is ``sqrt(sum_l V_l / M_l)`` from the same run.
    """
    value = 0.0
    variance_total = 0.0
    last_mean = None
    for level, m in enumerate(plan.m_levels):
        acc = _level_moments(
            plan.scheme, payoff, params, plan.n0, level, m, seed, stream_key, DOMAIN_MLMC
        )
        value += acc.mean
        variance_total += acc.variance / m
        last_mean = acc.mean
    return Estimate(
        value=value,
        std_error=math.sqrt(variance_total),
        cost=plan.cost,
        samples_used=plan.m_levels,
        scheme=plan.scheme,
        cv_used=False,
        bias_proxy=abs(last_mean) if plan.L >= 1 else None,
    )


def level_statistics(
    plan: MlmcPlan,
    payoff: Payoff,
    params: ModelParams,
    probe_M: int,
    seed: int,
) -> tuple:
    """Empirical per-level variances and mean corrections.

    Draws `probe_M` samples at every level of `plan` (on streams
    independent of :func:`mlmc_price` runs) and reports a
    :class:`LevelStat` per level; used for diagnostics and pilot
    constant estimation.
    """
    if probe_M < 100:
        raise UsageError(f"probe_M must be >= 100, got {probe_M}")
    stats = []
    for level in range(plan.L + 1):
        acc = _level_moments(
            plan.scheme, payoff, params, plan.n0, level, probe_M, seed, (), DOMAIN_PILOT
        )
        n_fine = plan.n0 * 2**level
        stats.append(
            LevelStat(
                level=level,
                n=n_fine,
                variance=acc.variance,
                mean_correction=acc.mean,
                cost_per_sample=float(n_fine) ** 2,
            )
        )
    return tuple(stats)


def _pilot_constants(n0: int, payoff: Payoff, params: ModelParams) -> tuple:
    """Estimate (c1, c2) from a probe run of rectangle corrections.

    Fits ``|mean correction| ~ c1 * 2^-l`` and ``variance ~ c2 * 2^-2l``
    over a fixed probe geometry, taking medians across levels for
    robustness.  Uses a fixed internal seed so plans stay deterministic.
    """
    probe = MlmcPlan(
        n0=n0,
        L=_PILOT_LEVELS,
        n_levels=tuple(n0 * 2**level for level in range(_PILOT_LEVELS + 1)),
        m_levels=(_PILOT_PROBE_M,) * (_PILOT_LEVELS + 1),
        lam=None,
        c1=1.0,
        c2=1.0,
        epsilon=1.0,
        scheme=SchemeKind.RECTANGLE,
        constants_source="pilot",
    )
    stats = level_statistics(probe, payoff, params, _PILOT_PROBE_M, _PILOT_SEED)
    c1 = float(
        np.median([abs(s.mean_correction) * 2.0**s.level for s in stats[1:]])
    )
    c2 = float(np.median([s.variance * 4.0**s.level for s in stats[1:]]))
    if c1 <= 0 or c2 <= 0:
        raise NumericError(
            "pilot run produced degenerate constants; the model may be deterministic"
        )
    return c1, c2
