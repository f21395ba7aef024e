"""Benchmark studies: strong error, weak error, and MSE-versus-cost.

Three experiment drivers produce plot-ready tables:

* :func:`strong_error_curve` — L^2 distance between the reference-grid
  VIX^2 and coarser-grid versions built from the same Gaussian draw by
  index restriction.
* :func:`weak_error_curve` — absolute bias of control-variate prices
  against a frozen reference price.
* :func:`mse_cost_curve` — empirical MSE of repeated estimator runs
  against normalized cost, for plain MC and both multilevel variants.

Named presets bundle the full protocols at two scales: a fast "desk"
scale used by default, and the original large-scale protocol behind
``paper_scale=True``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import HypothesisError, UsageError
from .estimators import lambda_constant, mc_price, mlmc_plan, mlmc_price
from .model import ModelParams, gaussian_spec
from .payoffs import Payoff, PayoffKind
from .sampler import (
    DOMAIN_EXPERIMENT,
    GaussianSample,
    batch_sizes,
    factor_for,
    sample_fine,
    stream_for,
)
from .schemes import SchemeKind, scheme_vix2

__all__ = [
    "ErrorCurve",
    "MseCostCurve",
    "strong_error_curve",
    "weak_error_curve",
    "mse_cost_curve",
    "fit_loglog_slope",
    "preset",
    "PRESET_NAMES",
]

_Z95 = 1.959963984540054  # two-sided 95% normal quantile

# Experiment identifiers inside the DOMAIN_EXPERIMENT stream namespace.
_EXP_STRONG = 1
_EXP_WEAK = 2
_EXP_MSE = 3


@dataclass(frozen=True)
class ErrorCurve:
    """A fitted error-versus-grid-size table.

    ``lambda_over_n`` carries the exact-asymptotics overlay ``Lambda/n``
    for the rectangle scheme when the closed-form constant applies, else
    None.  `protocol` records every input needed to reproduce the run.
    """

    n_values: tuple
    errors: tuple
    ci_halfwidths: tuple
    fitted_slope: float
    protocol: dict = field(repr=False)
    lambda_over_n: tuple | None = None

    def __post_init__(self):
        if not (len(self.n_values) == len(self.errors) == len(self.ci_halfwidths)):
            raise UsageError("curve fields must have equal lengths")
        if any(e < 0 for e in self.errors):
            raise UsageError("errors must be >= 0")
        if self.lambda_over_n is not None and len(self.lambda_over_n) != len(self.n_values):
            raise UsageError("overlay length must match n_values")


@dataclass(frozen=True)
class MseCostCurve:
    """Empirical MSE against normalized cost for one estimator family."""

    family: str
    epsilons: tuple
    costs: tuple
    mses: tuple
    mse_ci_halfwidths: tuple
    fitted_slope: float
    protocol: dict = field(repr=False)

    def __post_init__(self):
        lengths = {
            len(self.epsilons),
            len(self.costs),
            len(self.mses),
            len(self.mse_ci_halfwidths),
        }
        if len(lengths) != 1:
            raise UsageError("curve fields must have equal lengths")


def fit_loglog_slope(x, y) -> tuple:
    """Ordinary least squares of ln(y) on ln(x).

    Returns ``(slope, intercept, r2)``.  Requires at least three strictly
    positive points and non-degenerate x values.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 3:
        raise UsageError("need at least 3 paired points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise UsageError("log-log fit requires strictly positive x and y")
    lx, ly = np.log(x), np.log(y)
    if np.allclose(lx, lx[0]):
        raise UsageError("x values are degenerate; slope is undefined")
    slope, intercept = np.polyfit(lx, ly, 1)
    residuals = ly - (slope * lx + intercept)
    total = ly - ly.mean()
    ss_tot = float(total @ total)
    r2 = 1.0 - float(residuals @ residuals) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def _fit_or_nan(x, y) -> float:
    try:
        return fit_loglog_slope(x, y)[0]
    except UsageError:
        return float("nan")


def _params_dict(params: ModelParams) -> dict:
    x0 = params.x0
    if not isinstance(x0, float):
        x0 = {"knots": list(x0.knots), "values": list(x0.values), "mode": x0.mode}
    return {
        "H": params.H,
        "eta": params.eta,
        "T": params.T,
        "Delta": params.Delta,
        "x0": x0,
    }


def _payoff_dict(payoff: Payoff) -> dict:
    return {"kind": payoff.kind.value, "strike": payoff.strike}


def strong_error_curve(
    scheme: SchemeKind,
    n_values,
    n_ref: int,
    M: int,
    params: ModelParams,
    seed: int,
) -> ErrorCurve:
    """L^2 strong error of coarse-grid VIX^2 against a fine reference.

    Every `n` must divide `n_ref`; the coarse vector is the restriction
    of the same reference-grid Gaussian draw, so the squared differences
    share all randomness with the reference.  For the rectangle scheme
    with H < 1/2 and a constant initial curve, the exact first-order
    overlay ``Lambda/n`` is attached for comparison.
    """
    n_values = tuple(int(n) for n in n_values)
    if len(n_values) == 0:
        raise UsageError("n_values must be nonempty")
    if any(n < 1 for n in n_values):
        raise UsageError("grid sizes must be >= 1")
    for n in n_values:
        if n >= n_ref or n_ref % n != 0:
            raise UsageError(
                f"every n must be a proper divisor of n_ref={n_ref}; offending n={n}"
            )
    if M < 1_000:
        raise UsageError(f"M must be >= 1000, got {M}")

    spec = gaussian_spec(params, n_ref)
    factor = factor_for(params, n_ref)
    sq_sums = {n: [] for n in n_values}
    quad_sums = {n: [] for n in n_values}
    for index, width in enumerate(batch_sizes(n_ref, M)):
        stream = stream_for(seed, DOMAIN_EXPERIMENT, _EXP_STRONG, index)
        fine = sample_fine(factor, spec.mean, stream, size=width)
        v_ref = np.asarray(scheme_vix2(scheme, fine))
        for n in n_values:
            step = n_ref // n
            coarse = GaussianSample(values=fine.values[::step], grid_n=n)
            diff = v_ref - np.asarray(scheme_vix2(scheme, coarse))
            sq = diff * diff
            sq_sums[n].append(float(np.sum(sq)))
            quad_sums[n].append(float(np.sum(sq * sq)))

    errors, halfwidths = [], []
    for n in n_values:
        s2 = math.fsum(sq_sums[n])
        s4 = math.fsum(quad_sums[n])
        mean_sq = s2 / M
        var_sq = max(s4 - s2 * s2 / M, 0.0) / (M - 1)
        err = math.sqrt(mean_sq)
        hw_mean_sq = _Z95 * math.sqrt(var_sq / M)
        halfwidths.append(hw_mean_sq / (2.0 * err) if err > 0 else 0.0)
        errors.append(err)

    overlay = None
    if scheme is SchemeKind.RECTANGLE:
        try:
            lam = lambda_constant(params)
            overlay = tuple(lam / n for n in n_values)
        except HypothesisError:
            overlay = None

    protocol = {
        "experiment": "strong-error",
        "scheme": scheme.value,
        "n_ref": n_ref,
        "M": M,
        "params": _params_dict(params),
        "seed": seed,
    }
    return ErrorCurve(
        n_values=n_values,
        errors=tuple(errors),
        ci_halfwidths=tuple(halfwidths),
        fitted_slope=_fit_or_nan(n_values, errors),
        protocol=protocol,
        lambda_over_n=overlay,
    )


def weak_error_curve(
    scheme: SchemeKind,
    n_values,
    payoff: Payoff,
    reference_price: float,
    reference_ci: float,
    M: int,
    params: ModelParams,
    seed: int,
) -> ErrorCurve:
    """Absolute bias of control-variate Monte Carlo prices per grid size.

    Each grid size runs `M` samples with the control variate on an
    independent stream; the error is ``|estimate - reference_price|``.
    `reference_ci` documents the reference's own uncertainty and is
    recorded in the protocol (a warning flag is set when it is not an
    order of magnitude below the smallest measured error).
    """
    n_values = tuple(int(n) for n in n_values)
    if len(n_values) == 0:
        raise UsageError("n_values must be nonempty")
    if M < 2:
        raise UsageError(f"M must be >= 2, got {M}")
    if reference_ci < 0:
        raise UsageError("reference_ci must be >= 0")

    errors, halfwidths, estimates, std_errors = [], [], [], []
    for n in n_values:
        est = mc_price(
            scheme,
            n,
            M,
            payoff,
            use_cv=True,
            params=params,
            seed=seed,
            stream_key=(DOMAIN_EXPERIMENT, _EXP_WEAK, n),
        )
        estimates.append(est.value)
        std_errors.append(est.std_error)
        errors.append(abs(est.value - reference_price))
        halfwidths.append(_Z95 * est.std_error)

    positive = [e for e in errors if e > 0]
    protocol = {
        "experiment": "weak-error",
        "scheme": scheme.value,
        "payoff": _payoff_dict(payoff),
        "reference_price": reference_price,
        "reference_ci": reference_ci,
        "M": M,
        "params": _params_dict(params),
        "seed": seed,
        "estimates": estimates,
        "std_errors": std_errors,
        "reference_ci_warning": bool(
            positive and reference_ci > 0.1 * min(positive)
        ),
    }
    return ErrorCurve(
        n_values=n_values,
        errors=tuple(errors),
        ci_halfwidths=tuple(halfwidths),
        fitted_slope=_fit_or_nan(n_values, errors),
        protocol=protocol,
    )


def _mse_point_mc(epsilon, N_mse, reference_price, params, payoff, seed, eps_index):
    """Plain-MC replications at the ceiling allocation n=1/eps, M=1/eps^2."""
    n = math.ceil(1.0 / epsilon)
    M = math.ceil(epsilon**-2)
    M = max(M, 2)
    sq_errors = []
    for rep in range(N_mse):
        est = mc_price(
            SchemeKind.RECTANGLE,
            n,
            M,
            payoff,
            use_cv=False,
            params=params,
            seed=seed,
            stream_key=(DOMAIN_EXPERIMENT, _EXP_MSE, eps_index, rep),
        )
        sq_errors.append((est.value - reference_price) ** 2)
    return float(n) ** 2 * M, sq_errors


def _mse_point_ml(
    scheme, epsilon, N_mse, reference_price, params, payoff, seed, eps_index, n0, constants
):
    """Multilevel replications at the planned allocation for `epsilon`."""
    plan = mlmc_plan(epsilon, n0, scheme, payoff, params, constants=constants)
    sq_errors = []
    for rep in range(N_mse):
        est = mlmc_price(
            plan,
            payoff,
            params,
            seed=seed,
            stream_key=(DOMAIN_EXPERIMENT, _EXP_MSE, eps_index, rep),
        )
        sq_errors.append((est.value - reference_price) ** 2)
    return plan.cost, sq_errors, plan


_FAMILIES = ("mc-rect", "ml-rect", "ml-trap")


def mse_cost_curve(
    estimator_family: str,
    epsilons,
    N_mse: int,
    reference_price: float,
    params: ModelParams,
    payoff: Payoff,
    seed: int,
    n0: int = 6,
    constants: str = "auto",
) -> MseCostCurve:
    """Empirical MSE against normalized cost over a grid of RMSE targets.

    Families: ``"mc-rect"`` (plain Monte Carlo, rectangle scheme, no
    control variate, at the ceiling allocation ``n = ceil(1/eps)``,
    ``M = ceil(1/eps^2)``), ``"ml-rect"`` and ``"ml-trap"`` (multilevel
    at the planned allocations with base grid `n0`).  Each target runs
    `N_mse` independent replications; the MSE half-width is the normal
    95% interval for the mean of the squared errors.
    """
    if estimator_family not in _FAMILIES:
        raise UsageError(
            f"unknown estimator family {estimator_family!r}; choose from {_FAMILIES}"
        )
    epsilons = tuple(float(e) for e in epsilons)
    if len(epsilons) == 0 or any(e <= 0 for e in epsilons):
        raise UsageError("epsilons must be nonempty and > 0")
    if N_mse < 2:
        raise UsageError(f"N_mse must be >= 2, got {N_mse}")

    costs, mses, halfwidths = [], [], []
    plans = []
    for eps_index, epsilon in enumerate(epsilons):
        if estimator_family == "mc-rect":
            cost, sq_errors = _mse_point_mc(
                epsilon, N_mse, reference_price, params, payoff, seed, eps_index
            )
        else:
            scheme = (
                SchemeKind.RECTANGLE
                if estimator_family == "ml-rect"
                else SchemeKind.TRAPEZOID
            )
            cost, sq_errors, plan = _mse_point_ml(
                scheme,
                epsilon,
                N_mse,
                reference_price,
                params,
                payoff,
                seed,
                eps_index,
                n0,
                constants,
            )
            plans.append(
                {
                    "epsilon": epsilon,
                    "L": plan.L,
                    "m_levels": list(plan.m_levels),
                    "constants_source": plan.constants_source,
                }
            )
        mse = math.fsum(sq_errors) / N_mse
        spread = math.fsum((s - mse) ** 2 for s in sq_errors) / (N_mse - 1)
        costs.append(cost)
        mses.append(mse)
        halfwidths.append(_Z95 * math.sqrt(spread / N_mse))

    protocol = {
        "experiment": "mse-cost",
        "family": estimator_family,
        "epsilons": list(epsilons),
        "N_mse": N_mse,
        "reference_price": reference_price,
        "params": _params_dict(params),
        "payoff": _payoff_dict(payoff),
        "seed": seed,
        "n0": n0,
        "plans": plans,
    }
    return MseCostCurve(
        family=estimator_family,
        epsilons=epsilons,
        costs=tuple(costs),
        mses=tuple(mses),
        mse_ci_halfwidths=tuple(halfwidths),
        fitted_slope=_fit_or_nan(costs, mses),
        protocol=protocol,
    )


# ---------------------------------------------------------------------------
# Presets


_X0_FLAT = math.log(0.235**2)


def _strong_preset(H: float, paper_scale: bool) -> dict:
    base = {
        "experiment": "strong-error",
        "params": ModelParams(H=H, eta=0.5, T=0.5, Delta=1.0 / 12.0, x0=_X0_FLAT),
    }
    if paper_scale:
        base.update(n_ref=2000, M=100_000, n_values=(10, 20, 40, 80, 125, 250, 500))
    else:
        base.update(n_ref=512, M=20_000, n_values=(8, 16, 32, 64, 128))
    return base


def _weak_preset(paper_scale: bool) -> dict:
    return {
        "experiment": "weak-error",
        "params": ModelParams(H=0.3, eta=0.5, T=0.25, Delta=1.0 / 12.0, x0=_X0_FLAT),
        "payoff": Payoff(PayoffKind.CALL, strike=0.1),
        "n_values": tuple(range(5, 15)),
        "reference_price": 0.13093742,
        "reference_ci": 5e-8,
        "M": 1_000_000 if paper_scale else 200_000,
    }


def _mse_preset(paper_scale: bool) -> dict:
    return {
        "experiment": "mse-cost",
        "params": ModelParams(H=0.1, eta=0.5, T=0.5, Delta=1.0 / 12.0, x0=_X0_FLAT),
        "payoff": Payoff(PayoffKind.CALL, strike=0.1),
        "epsilons": (0.04, 0.02, 0.01, 0.005),
        "N_mse": 400 if paper_scale else 100,
        "reference_price": 0.121971,
        "reference_ci": 6e-7,
        "n0": 6,
        "family": "ml-rect",
    }


def _ref_a_preset(paper_scale: bool) -> dict:
    return {
        "experiment": "price",
        "params": ModelParams(H=0.3, eta=0.5, T=0.25, Delta=1.0 / 12.0, x0=_X0_FLAT),
        "payoff": Payoff(PayoffKind.CALL, strike=0.1),
        "scheme": SchemeKind.RECTANGLE,
        "n": 400,
        "M": 3_000_000 if paper_scale else 100_000,
        "use_cv": True,
        "reference_price": 0.13093742,
    }


def _ref_b_preset(paper_scale: bool) -> dict:
    return {
        "experiment": "price",
        "params": ModelParams(H=0.1, eta=0.5, T=0.5, Delta=1.0 / 12.0, x0=_X0_FLAT),
        "payoff": Payoff(PayoffKind.CALL, strike=0.1),
        "scheme": SchemeKind.RECTANGLE,
        "n": 500 if paper_scale else 250,
        "M": 10_000_000 if paper_scale else 200_000,
        "use_cv": True,
        "reference_price": 0.121971,
    }


_PRESETS = {
    "fig1": lambda paper: _strong_preset(0.1, paper),
    "fig1-h01": lambda paper: _strong_preset(0.1, paper),
    "fig1-h02": lambda paper: _strong_preset(0.2, paper),
    "fig1-h03": lambda paper: _strong_preset(0.3, paper),
    "fig2": _weak_preset,
    "fig3": _mse_preset,
    "ref-a": _ref_a_preset,
    "ref-b": _ref_b_preset,
}

PRESET_NAMES = tuple(sorted(_PRESETS))


def preset(name: str, paper_scale: bool = False) -> dict:
    """Named experiment protocol, at desk scale or full scale.

    Strong-error presets ``fig1[-h01|-h02|-h03]`` (H in {0.1, 0.2, 0.3})
    use grids of divisors of the reference size.  ``fig2`` is the weak
    study, ``fig3`` the MSE-cost study, and ``ref-a``/``ref-b`` the two
    reference-price protocols.
    """
    if name not in _PRESETS:
        raise UsageError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    return _PRESETS[name](paper_scale)
