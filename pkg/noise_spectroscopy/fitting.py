#  Copyright 2024 Red Hat, Inc.
#
#  Licensed under the Apache License, Version 2.0 (the "License");
#  you may not use this file except in compliance with the License.
#  You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.

"""Weighted least-squares engine and the spectral model fits built on it."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import (
    Callable,
    Dict,
    Iterable,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
)

import numpy as np
from scipy import optimize

from noise_spectroscopy.dataset_types import CoherenceCurve, SpectrumEstimate
from noise_spectroscopy.exception import (
    CovarianceInvalidException,
    DegenerateFitException,
    FitFailedException,
    NotGlobalException,
    ScalingUnderdeterminedException,
    SpectrumUnderdeterminedException,
    error_tag,
)
from noise_spectroscopy.filter_functions import chi_exact, chi_time_domain
from noise_spectroscopy.noise_model import (
    DoubleLorentzian,
    LorentzianComponent,
    NoiseSpectrumModel,
    PowerLaw,
    SingleLorentzian,
)

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1.0e-10
BOUND_TOLERANCE = 1.0e-8
TOLERANCE = 1.0e-12
MAX_EVALUATIONS = 2000
DEFAULT_SIGMA_FLOOR = 1.0e-12

TAU_LATTICE_SINGLE = 7
TAU_LATTICE_DOUBLE = 6
TAU_BOUND_FACTORS = (0.01, 100.0)
EXPONENT_BOUNDS = (0.05, 2.95)
EXPONENT_LATTICE = (0.5, 1.0, 1.5, 2.0)
GLOBAL_TAU_FACTORS = (
    (1.0, 1.0),
    (0.5, 1.0),
    (2.0, 1.0),
    (1.0, 0.5),
    (1.0, 2.0),
)
EFFECTIVE_VARIANCE_ROUNDS = 5
BOOTSTRAP_MIN_SUCCESS = 0.5
BAND_PERCENTILES = (15.865, 84.135)

Model = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FitOutcome:
    names: Tuple[str, ...]
    params: np.ndarray
    covariance: np.ndarray
    chi2: float
    dof: int
    at_bound: Tuple[str, ...] = ()
    n_starts: int = 1

    @property
    def reduced_chi2(self) -> float:
        return self.chi2 / self.dof

    @property
    def errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(self.names, (float(p) for p in self.params)))


def _covariance(
    jacobian: np.ndarray, names: Sequence[str]
) -> np.ndarray:
    _, singular, vt = np.linalg.svd(jacobian, full_matrices=False)
    if singular[0] == 0 or singular[-1] <= CONDITION_LIMIT * singular[0]:
        direction = int(np.argmax(np.abs(vt[-1])))
        raise DegenerateFitException(
            f"parameter '{names[direction]}' is not identifiable",
            parameter=names[direction],
        )
    return (vt.T / singular**2) @ vt


def _pinned(
    params: np.ndarray, lower: np.ndarray, upper: np.ndarray, names
) -> Tuple[str, ...]:
    pinned = []
    for name, value, lo, hi in zip(names, params, lower, upper):
        for bound in (lo, hi):
            if np.isfinite(bound) and abs(value - bound) <= (
                BOUND_TOLERANCE * max(1.0, abs(bound))
            ):
                pinned.append(name)
                break
    return tuple(pinned)


def nls_fit(
    model: Model,
    x,
    y,
    sigma,
    initial: Iterable[Sequence[float]],
    bounds: Tuple[Sequence[float], Sequence[float]],
    names: Sequence[str],
    sigma_floor: float = DEFAULT_SIGMA_FLOOR,
) -> FitOutcome:
    """Minimize sum(((y - model(theta, x)) / sigma)^2) from every start.

    The best optimum is chosen by (chi2, parameters), so the result does
    not depend on the order of the starting lattice. The covariance is
    (J^T W J)^-1 with the given sigma taken as absolute.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    weight = 1.0 / np.maximum(np.asarray(sigma, dtype=float), sigma_floor)
    names = tuple(names)
    lower = np.asarray(bounds[0], dtype=float)
    upper = np.asarray(bounds[1], dtype=float)
    if len(y) <= len(names):
        raise ValueError(
            f"{len(y)} points cannot constrain {len(names)} parameters"
        )

    def residual(theta: np.ndarray) -> np.ndarray:
        return (model(theta, x) - y) * weight

    best = None
    starts = 0
    for start in initial:
        starts += 1
        start = np.clip(np.asarray(start, dtype=float), lower, upper)
        try:
            with np.errstate(all="ignore"):
                result = optimize.least_squares(
                    residual,
                    start,
                    bounds=(lower, upper),
                    method="trf",
                    x_scale="jac",
                    xtol=TOLERANCE,
                    ftol=TOLERANCE,
                    gtol=TOLERANCE,
                    max_nfev=MAX_EVALUATIONS,
                )
        except (ValueError, FloatingPointError) as err:
            logger.debug("start %s rejected: %s", start, err)
            continue
        chi2 = float(np.sum(result.fun**2))
        if result.status <= 0 or not np.isfinite(chi2):
            continue
        key = (chi2, tuple(result.x))
        if best is None or key < best[0]:
            best = (key, result)
    if best is None:
        raise FitFailedException(f"no start out of {starts} converged")
    (chi2, _), result = best
    covariance = _covariance(result.jac, names)
    return FitOutcome(
        names=names,
        params=np.array(result.x),
        covariance=covariance,
        chi2=chi2,
        dof=len(y) - len(names),
        at_bound=_pinned(result.x, lower, upper, names),
        n_starts=starts,
    )


class ModelKind(Enum):
    SINGLE = "single"
    DOUBLE = "double"
    POWER_LAW = "powerlaw"


PARAMETER_NAMES = {
    ModelKind.SINGLE: ("delta", "tau_c"),
    ModelKind.DOUBLE: ("delta1", "tau_c1", "delta2", "tau_c2"),
    ModelKind.POWER_LAW: ("amplitude", "exponent"),
}


def _lorentz(omega: np.ndarray, tau) -> np.ndarray:
    return tau / np.pi / (1.0 + (omega * tau) ** 2)


def spectrum_values(kind: ModelKind, theta, omega) -> np.ndarray:
    """S(omega) of ``kind`` at raw parameters, with no validation."""
    omega = np.asarray(omega, dtype=float)
    if kind is ModelKind.SINGLE:
        return theta[0] ** 2 * _lorentz(omega, theta[1])
    if kind is ModelKind.DOUBLE:
        slow = theta[0] ** 2 * _lorentz(omega, theta[1])
        return slow + theta[2] ** 2 * _lorentz(omega, theta[3])
    return theta[0] / omega ** theta[1]


def build_model(kind: ModelKind, theta) -> NoiseSpectrumModel:
    theta = [float(v) for v in theta]
    if kind is ModelKind.SINGLE:
        return SingleLorentzian(LorentzianComponent(abs(theta[0]), theta[1]))
    if kind is ModelKind.DOUBLE:
        return DoubleLorentzian(
            LorentzianComponent(abs(theta[0]), theta[1]),
            LorentzianComponent(abs(theta[2]), theta[3]),
        )
    return PowerLaw(theta[0], theta[1])


@dataclass(frozen=True)
class SpectralFitResult:
    """A spectral model fitted to a SpectrumEstimate.

    Parameters are in internal units: couplings in rad/us, correlation
    times in us, power-law amplitude in rad^2/us^(1-exponent).
    """

    kind: ModelKind
    outcome: FitOutcome
    bounds: Tuple[Tuple[float, ...], Tuple[float, ...]] = ((), ())

    @property
    def names(self) -> Tuple[str, ...]:
        return self.outcome.names

    @property
    def params(self) -> np.ndarray:
        return self.outcome.params

    @property
    def errors(self) -> np.ndarray:
        return self.outcome.errors

    @property
    def covariance(self) -> np.ndarray:
        return self.outcome.covariance

    @property
    def reduced_chi2(self) -> float:
        return self.outcome.reduced_chi2

    @property
    def dof(self) -> int:
        return self.outcome.dof

    @property
    def at_bound(self) -> Tuple[str, ...]:
        return self.outcome.at_bound

    def model(self) -> NoiseSpectrumModel:
        return build_model(self.kind, self.params)

    def evaluate(self, omega) -> np.ndarray:
        return spectrum_values(self.kind, self.params, omega)


def _tau_range(omega: np.ndarray) -> Tuple[float, float]:
    return 1.0 / omega.max(), 1.0 / omega.min()


def _tau_bounds(omega: np.ndarray) -> Tuple[float, float]:
    low, high = _tau_range(omega)
    return TAU_BOUND_FACTORS[0] * low, TAU_BOUND_FACTORS[1] * high


def _coupling_start(value: float, scale: float) -> float:
    return math.sqrt(max(value, 1.0e-6 * scale))


def _single_starts(omega, s, sigma) -> List[List[float]]:
    weight = 1.0 / sigma**2
    starts = []
    for tau in np.geomspace(*_tau_range(omega), TAU_LATTICE_SINGLE):
        column = _lorentz(omega, tau)
        variance = np.sum(weight * s * column) / np.sum(weight * column**2)
        scale = np.max(np.abs(s)) * np.pi / tau
        starts.append([_coupling_start(variance, scale), tau])
    return starts


def _double_starts(omega, s, sigma) -> List[List[float]]:
    weight = 1.0 / sigma
    starts = []
    taus = np.geomspace(*_tau_range(omega), TAU_LATTICE_DOUBLE)
    for slow, fast in itertools.combinations(taus[::-1], 2):
        design = np.column_stack(
            [_lorentz(omega, slow), _lorentz(omega, fast)]
        )
        variances, _ = optimize.nnls(design * weight[:, None], s * weight)
        scale = np.max(np.abs(s)) * np.pi / fast
        starts.append(
            [
                _coupling_start(variances[0], scale),
                slow,
                _coupling_start(variances[1], scale),
                fast,
            ]
        )
    return starts


def _power_law_starts(omega, s, sigma) -> List[List[float]]:
    weight = 1.0 / sigma**2
    exponents = list(EXPONENT_LATTICE)
    positive = s > 0
    if positive.sum() >= 2:
        slope = np.polyfit(np.log(omega[positive]), np.log(s[positive]), 1)
        exponents.append(float(np.clip(-slope[0], *EXPONENT_BOUNDS)))
    starts = []
    for exponent in exponents:
        column = omega**-exponent
        amplitude = np.sum(weight * s * column) / np.sum(weight * column**2)
        starts.append([max(amplitude, 1.0e-12), exponent])
    return starts


def _kind_setup(kind: ModelKind, omega, s, sigma):
    tau_low, tau_high = _tau_bounds(omega)
    if kind is ModelKind.SINGLE:
        bounds = ((0.0, tau_low), (np.inf, tau_high))
        return _single_starts(omega, s, sigma), bounds
    if kind is ModelKind.DOUBLE:
        bounds = (
            (0.0, tau_low, 0.0, tau_low),
            (np.inf, tau_high, np.inf, tau_high),
        )
        return _double_starts(omega, s, sigma), bounds
    bounds = ((0.0, EXPONENT_BOUNDS[0]), (np.inf, EXPONENT_BOUNDS[1]))
    return _power_law_starts(omega, s, sigma), bounds


def _reorder(outcome: FitOutcome, order: Sequence[int]) -> FitOutcome:
    """Permute parameter values; names keep their positions."""
    order = list(order)
    return FitOutcome(
        names=outcome.names,
        params=outcome.params[order],
        covariance=outcome.covariance[np.ix_(order, order)],
        chi2=outcome.chi2,
        dof=outcome.dof,
        at_bound=tuple(
            outcome.names[order.index(outcome.names.index(n))]
            for n in outcome.at_bound
        ),
        n_starts=outcome.n_starts,
    )


def _order_components(outcome: FitOutcome) -> FitOutcome:
    """Label the slower Lorentzian as component 1."""
    if outcome.params[1] >= outcome.params[3]:
        return outcome
    return _reorder(outcome, [2, 3, 0, 1])


def fit_spectrum_model(
    estimate: SpectrumEstimate,
    kind: ModelKind,
    sigma_floor: float = DEFAULT_SIGMA_FLOOR,
    initial: Optional[Sequence[Sequence[float]]] = None,
) -> SpectralFitResult:
    omega, s, sigma = estimate.arrays()
    names = PARAMETER_NAMES[kind]
    if len(omega) < len(names) + 2:
        raise SpectrumUnderdeterminedException(
            f"{kind.value} fit needs {len(names) + 2} points, "
            f"got {len(omega)}"
        )
    starts, bounds = _kind_setup(kind, omega, s, sigma)
    if initial is not None:
        starts = [list(p) for p in initial]

    def model(theta, x):
        return spectrum_values(kind, theta, x)

    outcome = nls_fit(
        model, omega, s, sigma, starts, bounds, names, sigma_floor
    )
    if kind is ModelKind.DOUBLE:
        outcome = _order_components(outcome)
    logger.debug(
        "%s fit: %s, reduced chi2 %.4g",
        kind.value,
        outcome.as_dict(),
        outcome.reduced_chi2,
    )
    return SpectralFitResult(kind, outcome, bounds)


@dataclass(frozen=True)
class ModelComparison:
    ranked: Tuple[SpectralFitResult, ...]
    failures: Dict[str, str] = field(default_factory=dict)

    @property
    def best(self) -> Optional[SpectralFitResult]:
        return self.ranked[0] if self.ranked else None


def compare_models(
    estimate: SpectrumEstimate,
    kinds: Sequence[ModelKind] = tuple(ModelKind),
    sigma_floor: float = DEFAULT_SIGMA_FLOOR,
) -> ModelComparison:
    """Fit every kind and rank the successes by reduced chi2."""
    results, failures = [], {}
    for kind in kinds:
        try:
            results.append(fit_spectrum_model(estimate, kind, sigma_floor))
        except (
            DegenerateFitException,
            FitFailedException,
            SpectrumUnderdeterminedException,
        ) as err:
            logger.info("%s model rejected: %s", kind.value, err)
            failures[kind.value] = error_tag(err)
    results.sort(key=lambda r: (r.reduced_chi2, r.kind.value))
    return ModelComparison(tuple(results), failures)


@dataclass(frozen=True)
class GlobalFitResult:
    """Shared correlation times with per-dataset couplings.

    ``couplings`` maps dataset id to (delta1, err1, delta2, err2).
    """

    tau_c1: float
    tau_c1_err: float
    tau_c2: float
    tau_c2_err: float
    couplings: Dict[str, Tuple[float, float, float, float]]
    reduced_chi2: float
    dof: int
    independent_reduced_chi2: float
    outcome: FitOutcome

    def model_for(self, dataset_id: str) -> DoubleLorentzian:
        delta1, _, delta2, _ = self.couplings[dataset_id]
        return DoubleLorentzian(
            LorentzianComponent(abs(delta1), self.tau_c1),
            LorentzianComponent(abs(delta2), self.tau_c2),
        )


def _global_names(ids: Sequence[str]) -> Tuple[str, ...]:
    names = ["tau_c1", "tau_c2"]
    for dataset_id in ids:
        names.extend([f"{dataset_id}.delta1", f"{dataset_id}.delta2"])
    return tuple(names)


def global_fit(
    estimates: Sequence[Tuple[str, SpectrumEstimate]],
    sigma_floor: float = DEFAULT_SIGMA_FLOOR,
) -> GlobalFitResult:
    """Joint double-Lorentzian fit with correlation times shared."""
    if len(estimates) < 2:
        raise NotGlobalException(
            f"global fit needs at least 2 datasets, got {len(estimates)}"
        )
    ids = [dataset_id for dataset_id, _ in estimates]
    if len(set(ids)) != len(ids):
        raise ValueError("dataset ids must be unique")

    slow, fast, independent = [], [], []
    for dataset_id, estimate in estimates:
        try:
            fit = fit_spectrum_model(estimate, ModelKind.DOUBLE, sigma_floor)
        except (
            DegenerateFitException,
            FitFailedException,
            SpectrumUnderdeterminedException,
        ) as err:
            logger.info("independent fit of %s failed: %s", dataset_id, err)
            continue
        slow.append(fit.params[1])
        fast.append(fit.params[3])
        independent.append(fit.reduced_chi2)

    omega = np.concatenate([e.arrays()[0] for _, e in estimates])
    s = np.concatenate([e.arrays()[1] for _, e in estimates])
    sigma = np.concatenate([e.arrays()[2] for _, e in estimates])
    owner = np.concatenate(
        [np.full(len(e), i) for i, (_, e) in enumerate(estimates)]
    )
    tau_low, tau_high = _tau_bounds(omega)
    if slow:
        tau1, tau2 = float(np.median(slow)), float(np.median(fast))
    else:
        tau1, tau2 = tau_high / TAU_BOUND_FACTORS[1], tau_low * 10.0

    starts = []
    for f1, f2 in GLOBAL_TAU_FACTORS:
        t1 = float(np.clip(tau1 * f1, tau_low, tau_high))
        t2 = float(np.clip(tau2 * f2, tau_low, tau_high))
        start = [t1, t2]
        for _, estimate in estimates:
            w, y, e = estimate.arrays()
            design = np.column_stack([_lorentz(w, t1), _lorentz(w, t2)])
            variances, _ = optimize.nnls(design / e[:, None], y / e)
            scale = np.max(np.abs(y)) * np.pi / t2
            start.extend(
                _coupling_start(v, scale) for v in variances
            )
        starts.append(start)

    def model(theta, x):
        couplings = np.asarray(theta[2:]).reshape(-1, 2)
        d1 = couplings[owner, 0]
        d2 = couplings[owner, 1]
        return d1**2 * _lorentz(x, theta[0]) + d2**2 * _lorentz(x, theta[1])

    size = 2 + 2 * len(estimates)
    lower = [tau_low, tau_low] + [0.0] * (size - 2)
    upper = [tau_high, tau_high] + [np.inf] * (size - 2)
    names = _global_names(ids)
    outcome = nls_fit(
        model, omega, s, sigma, starts, (lower, upper), names, sigma_floor
    )
    if outcome.params[0] < outcome.params[1]:
        order = [1, 0]
        for index in range(len(estimates)):
            order.extend([3 + 2 * index, 2 + 2 * index])
        outcome = _reorder(outcome, order)
    params = outcome.params
    errors = outcome.errors
    couplings = {
        dataset_id: (
            float(params[2 + 2 * i]),
            float(errors[2 + 2 * i]),
            float(params[3 + 2 * i]),
            float(errors[3 + 2 * i]),
        )
        for i, dataset_id in enumerate(ids)
    }
    mean_independent = (
        float(np.mean(independent)) if independent else float("nan")
    )
    logger.info(
        "global fit: tau_c1 %.4g us, tau_c2 %.4g us, reduced chi2 %.4g",
        params[0],
        params[1],
        outcome.reduced_chi2,
    )
    return GlobalFitResult(
        tau_c1=float(params[0]),
        tau_c1_err=float(errors[0]),
        tau_c2=float(params[1]),
        tau_c2_err=float(errors[1]),
        couplings=couplings,
        reduced_chi2=outcome.reduced_chi2,
        dof=outcome.dof,
        independent_reduced_chi2=mean_independent,
        outcome=outcome,
    )


@dataclass(frozen=True)
class DepthScalingFit:
    """Delta(d) = a / d^n, a in rad/us nm^n."""

    a: float
    a_err: float
    n: float
    n_err: float
    reduced_chi2: float
    dof: int

    def at(self, depth_nm) -> np.ndarray:
        return self.a / np.asarray(depth_nm, dtype=float) ** self.n


def fit_depth_scaling(
    points: Sequence[Tuple[float, float, float, float]],
    exponent_bounds: Tuple[float, float] = (0.0, 3.0),
    sigma_floor: float = 1.0e-6,
) -> DepthScalingFit:
    """Fit (depth, depth_err, delta, delta_err) points in log-log space.

    Depth errors enter through the effective variance
    (delta_err/delta)^2 + n^2 (depth_err/depth)^2, iterated on n.
    """
    if len(points) < 3:
        raise ScalingUnderdeterminedException(
            f"depth scaling needs 3 depths, got {len(points)}"
        )
    data = np.asarray(points, dtype=float)
    depth, depth_err, delta, delta_err = data.T
    if np.any(depth <= 0) or np.any(delta <= 0):
        raise ValueError("depths and couplings must be > 0")
    log_d = np.log(depth)
    log_delta = np.log(delta)
    slope, intercept = np.polyfit(log_d, log_delta, 1)
    exponent = float(np.clip(-slope, *exponent_bounds))

    def model(theta, x):
        return theta[0] - theta[1] * x

    lower = (-np.inf, exponent_bounds[0])
    upper = (np.inf, exponent_bounds[1])
    start = [intercept, exponent]
    outcome = None
    for _ in range(EFFECTIVE_VARIANCE_ROUNDS):
        sigma = np.sqrt(
            (delta_err / delta) ** 2 + (exponent * depth_err / depth) ** 2
        )
        outcome = nls_fit(
            model,
            log_d,
            log_delta,
            sigma,
            [start],
            (lower, upper),
            ("log_a", "n"),
            sigma_floor,
        )
        start = list(outcome.params)
        if abs(outcome.params[1] - exponent) < 1.0e-10:
            break
        exponent = float(outcome.params[1])
    log_a, exponent = outcome.params
    errors = outcome.errors
    a = float(np.exp(log_a))
    return DepthScalingFit(
        a=a,
        a_err=a * float(errors[0]),
        n=float(exponent),
        n_err=float(errors[1]),
        reduced_chi2=outcome.reduced_chi2,
        dof=outcome.dof,
    )


def depth_scaling_curve(fit: DepthScalingFit, depths) -> np.ndarray:
    return fit.at(depths)


@dataclass(frozen=True)
class ConfidenceBand:
    omega: np.ndarray
    value: np.ndarray
    sigma: np.ndarray
    mode: str = "linear"

    @property
    def lower(self) -> np.ndarray:
        return self.value - self.sigma

    @property
    def upper(self) -> np.ndarray:
        return self.value + self.sigma


def _check_covariance(covariance: np.ndarray) -> None:
    if not np.all(np.isfinite(covariance)):
        raise CovarianceInvalidException("covariance has non-finite entries")
    if not np.allclose(covariance, covariance.T, rtol=1e-8, atol=0.0):
        raise CovarianceInvalidException("covariance is not symmetric")
    eigenvalues = np.linalg.eigvalsh(covariance)
    scale = max(np.max(np.abs(eigenvalues)), np.finfo(float).tiny)
    if eigenvalues.min() < -1.0e-10 * scale:
        raise CovarianceInvalidException(
            f"covariance is not positive semi-definite "
            f"(eigenvalue {eigenvalues.min():.3g})"
        )


def _gradient(kind: ModelKind, theta: np.ndarray, omega) -> np.ndarray:
    gradient = np.empty((len(theta), len(omega)))
    for index, value in enumerate(theta):
        step = 1.0e-6 * max(abs(value), 1.0e-12)
        up, down = theta.copy(), theta.copy()
        up[index] += step
        down[index] -= step
        gradient[index] = (
            spectrum_values(kind, up, omega)
            - spectrum_values(kind, down, omega)
        ) / (2.0 * step)
    return gradient


def _bootstrap(
    result: SpectralFitResult,
    estimate: SpectrumEstimate,
    omega: np.ndarray,
    replicas: int,
    seed: int,
    sigma_floor: float,
) -> np.ndarray:
    x, y, sigma = estimate.arrays()
    fitted = result.evaluate(x)
    # residuals are resampled in units of their own sigma
    scale = np.maximum(sigma, sigma_floor)
    standardized = (y - fitted) / scale
    rng = np.random.default_rng(seed)
    curves = []
    for _ in range(replicas):
        picks = rng.integers(0, len(y), len(y))
        resampled = SpectrumEstimate(
            omega=x,
            s=fitted + standardized[picks] * scale,
            sigma=sigma,
            provenance=estimate.provenance,
        )
        try:
            refit = fit_spectrum_model(
                resampled,
                result.kind,
                sigma_floor,
                initial=[result.params],
            )
        except (DegenerateFitException, FitFailedException) as err:
            logger.debug("bootstrap replica dropped: %s", err)
            continue
        curves.append(refit.evaluate(omega))
    if len(curves) < BOOTSTRAP_MIN_SUCCESS * replicas:
        raise FitFailedException(
            f"only {len(curves)} of {replicas} bootstrap refits converged"
        )
    low, high = np.percentile(np.asarray(curves), BAND_PERCENTILES, axis=0)
    return 0.5 * (high - low)


def confidence_band(
    result: SpectralFitResult,
    omega,
    mode: str = "linear",
    estimate: Optional[SpectrumEstimate] = None,
    replicas: int = 200,
    seed: int = 0,
    sigma_floor: float = DEFAULT_SIGMA_FLOOR,
) -> ConfidenceBand:
    """1-sigma band of the fitted S(omega).

    ``linear`` propagates the covariance through the gradient of S;
    ``bootstrap`` refits copies of ``estimate`` with resampled
    standardized residuals.
    """
    omega = np.asarray(omega, dtype=float)
    covariance = np.asarray(result.covariance, dtype=float)
    _check_covariance(covariance)
    value = result.evaluate(omega)
    if mode == "linear":
        gradient = _gradient(result.kind, result.params.copy(), omega)
        variance = np.einsum("iw,ij,jw->w", gradient, covariance, gradient)
        sigma = np.sqrt(np.clip(variance, 0.0, None))
    elif mode == "bootstrap":
        if estimate is None:
            raise ValueError("bootstrap band needs the fitted estimate")
        sigma = _bootstrap(
            result, estimate, omega, replicas, seed, sigma_floor
        )
    else:
        raise ValueError(f"unknown band mode {mode!r}")
    return ConfidenceBand(omega, value, sigma, mode)


def fit_coherence_model(
    curves: Sequence[CoherenceCurve],
    kind: ModelKind,
    initial: Sequence[float],
    amplitudes: Optional[Mapping[int, float]] = None,
    sigma_floor: float = 1.0e-6,
) -> SpectralFitResult:
    """Fit a spectral model straight to coherence data.

    Minimizes C - A_N exp(-chi) over every curve point; Lorentzian kinds
    use the exact time-domain chi, power laws the quadrature.
    """
    amplitudes = amplitudes or {}
    sequences, y, sigma, scale = [], [], [], []
    for curve in curves:
        times, coherence, errors = curve.arrays()
        for time, value, error in zip(times, coherence, errors):
            sequences.append(curve.pulse_sequence(float(time)))
            y.append(value)
            sigma.append(error)
            scale.append(amplitudes.get(curve.n_pulses, 1.0))
    scale = np.asarray(scale)
    chi = chi_exact if kind is ModelKind.POWER_LAW else chi_time_domain
    names = PARAMETER_NAMES[kind]
    initial = np.asarray(initial, dtype=float)
    if kind is ModelKind.POWER_LAW:
        bounds = ((0.0, EXPONENT_BOUNDS[0]), (np.inf, EXPONENT_BOUNDS[1]))
    else:
        taus = initial[1::2]
        lower, upper = [], []
        for _ in taus:
            lower.extend([0.0, 1.0e-3 * taus.min()])
            upper.extend([np.inf, 1.0e3 * taus.max()])
        bounds = (tuple(lower), tuple(upper))

    def model(theta, index):
        candidate = build_model(kind, np.maximum(theta, 0.0))
        values = np.array(
            [chi(candidate, sequences[int(i)]) for i in index]
        )
        return scale * np.exp(-values)

    outcome = nls_fit(
        model,
        np.arange(len(y)),
        y,
        sigma,
        [initial],
        bounds,
        names,
        sigma_floor,
    )
    if kind is ModelKind.DOUBLE:
        outcome = _order_components(outcome)
    return SpectralFitResult(kind, outcome, bounds)
