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

"""Stochastic forward model of the sensor bath.

Ornstein-Uhlenbeck paths, Monte-Carlo coherence and the factory that turns
a synthetic environment into sensor datasets.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, signal

from noise_spectroscopy.dataset_types import (
    CoherenceCurve,
    NvDataset,
    T1Curve,
)
from noise_spectroscopy.exception import UndersampledBathException
from noise_spectroscopy.filter_functions import (
    DEFAULT_RTOL,
    PulseSequence,
    SequenceKind,
    chi_exact,
    chi_time_domain,
)
from noise_spectroscopy.noise_model import (
    DoubleLorentzian,
    GaussianLine,
    LorentzianComponent,
    NoiseSpectrumModel,
    SumModel,
)
from noise_spectroscopy.units import (
    GAMMA_E_RAD_PER_US_T,
    GAMMA_H_KHZ_PER_G,
    GAMMA_H_RAD_PER_S_T,
    HALF_SPACE_FACTOR,
    HBAR,
    MAGIC_ANGLE,
    MU0_OVER_4PI,
    TWO_PI,
)
from noise_spectroscopy.util import derive_seed

logger = logging.getLogger(__name__)

MIN_TRAJECTORIES = 100
DEFAULT_BLOCK = 1000
# rows of a block drawn at once; bounds memory for long fine grids
MAX_BLOCK_SAMPLES = 4_000_000

MIN_STEPS_PER_TAU = 10
MIN_STEPS_PER_SEGMENT = 20
DEFAULT_STEPS_PER_TAU = 20
DEFAULT_STEPS_PER_SEGMENT = 40

GRID_SPAN = (0.15, 2.0)
GRID_BRACKET = (1.0e-3, 1.0e5)
UNDECAYED_TIME_SCALE = 10.0
T1_SPAN = 3.0
LINE_WIDTH_FRACTION = 1.0e-3
SWEEP_TARGET_CHI = 0.35
SWEEP_COARSE = np.linspace(-0.2, 0.2, 21)
SWEEP_FINE_HALF_WIDTH = 4.0
SWEEP_FINE_POINTS = 25

NM = 1.0e-9


@dataclass(frozen=True)
class OuParams:
    """One Ornstein-Uhlenbeck component with its sampling step.

    Attributes
    ----------
    delta: float
        Coupling, rad/us.
    tau_c: float
        Correlation time, us.
    dt: float
        Requested step, us; the simulator may refine it to fit pulses.
    seed: int
        Per-component seed mixed into every trajectory sub-stream.
    """

    __slots__ = ["delta", "tau_c", "dt", "seed"]
    delta: float
    tau_c: float
    dt: float
    seed: int

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if not self.tau_c > 0:
            raise ValueError("tau_c must be > 0")
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if self.dt * MIN_STEPS_PER_TAU > self.tau_c:
            raise UndersampledBathException(
                f"dt={self.dt} us exceeds tau_c/{MIN_STEPS_PER_TAU} "
                f"for tau_c={self.tau_c} us"
            )

    @classmethod
    def from_component(
        cls,
        component: LorentzianComponent,
        dt: Optional[float] = None,
        seed: int = 0,
    ) -> "OuParams":
        step = dt or component.tau_c / DEFAULT_STEPS_PER_TAU
        return cls(component.delta, component.tau_c, step, seed)


def _ou_drive(
    params: OuParams, dt: float, rng: np.random.Generator, shape
) -> np.ndarray:
    """Stationary OU samples along the last axis of ``shape``."""
    decay = math.exp(-dt / params.tau_c)
    kick = params.delta * math.sqrt(-math.expm1(-2.0 * dt / params.tau_c))
    noise = rng.standard_normal(shape)
    noise[..., 0] *= params.delta
    noise[..., 1:] *= kick
    return signal.lfilter([1.0], [1.0, -decay], noise, axis=-1)


def ou_path(params: OuParams, duration: float) -> np.ndarray:
    """Exactly discretized OU path b(k dt), k = 0..ceil(duration/dt)."""
    if not duration > 0:
        raise ValueError("duration must be > 0")
    steps = int(math.ceil(duration / params.dt - 1e-9))
    if params.delta == 0:
        return np.zeros(steps + 1)
    rng = np.random.default_rng(params.seed)
    return _ou_drive(params, params.dt, rng, (steps + 1,))


def _segment(seq: PulseSequence) -> float:
    """Shortest piece between consecutive edges of the sequence."""
    if seq.n_pulses == 0:
        return seq.total_time
    return seq.total_time / (2.0 * seq.n_pulses)


def default_dt(components: Sequence[OuParams], seq: PulseSequence) -> float:
    tau = min((p.tau_c for p in components), default=math.inf)
    return min(
        tau / DEFAULT_STEPS_PER_TAU, _segment(seq) / DEFAULT_STEPS_PER_SEGMENT
    )


def _time_grid(
    components: Sequence[OuParams], seq: PulseSequence
) -> Tuple[float, int]:
    """Step that puts every pulse on the grid, and the number of steps."""
    segment = _segment(seq)
    requested = min(p.dt for p in components)
    if requested * MIN_STEPS_PER_SEGMENT > segment:
        raise UndersampledBathException(
            f"dt={requested} us exceeds the pulse spacing "
            f"{segment} us / {MIN_STEPS_PER_SEGMENT}"
        )
    per_segment = int(math.ceil(segment / requested - 1e-9))
    dt = segment / per_segment
    pieces = 1 if seq.n_pulses == 0 else 2 * seq.n_pulses
    return dt, per_segment * pieces


def _step_weights(seq: PulseSequence, dt: float, steps: int) -> np.ndarray:
    """Toggling sign times dt for every trapezoid step."""
    middles = (np.arange(steps) + 0.5) * dt
    passed = np.searchsorted(seq.pulse_times(), middles, side="left")
    return dt * np.where(passed % 2, -1.0, 1.0)


def _block_phases(
    components: Sequence[OuParams],
    seq: PulseSequence,
    seed: int,
    block: int,
    size: int,
    dt: float,
    steps: int,
) -> np.ndarray:
    weights = _step_weights(seq, dt, steps)
    rows = max(1, min(size, MAX_BLOCK_SAMPLES // (steps + 1)))
    phases = np.zeros(size)
    generators = [
        np.random.default_rng(
            np.random.SeedSequence([seed, params.seed, block, index])
        )
        for index, params in enumerate(components)
    ]
    for start in range(0, size, rows):
        count = min(rows, size - start)
        field_ = np.zeros((count, steps + 1))
        for params, rng in zip(components, generators):
            field_ += _ou_drive(params, dt, rng, (count, steps + 1))
        middle = 0.5 * (field_[:, :-1] + field_[:, 1:])
        phases[start : start + count] = middle @ weights
    return phases


def mc_phases(
    components: Sequence[OuParams],
    seq: PulseSequence,
    n_traj: int,
    seed: int,
    workers: int = 1,
    block: int = DEFAULT_BLOCK,
) -> np.ndarray:
    """Accumulated phase of ``n_traj`` independent trajectories.

    Trajectories are drawn in fixed-size blocks with one sub-stream per
    (block, component), so the result does not depend on ``workers``.
    """
    if n_traj < MIN_TRAJECTORIES:
        raise ValueError(f"n_traj must be >= {MIN_TRAJECTORIES}")
    active = [p for p in components if p.delta > 0]
    if not active:
        return np.zeros(n_traj)
    dt, steps = _time_grid(active, seq)
    logger.debug(
        "MC %s-%d t=%g: %d trajectories, %d steps of %g us",
        seq.kind.value,
        seq.n_pulses,
        seq.total_time,
        n_traj,
        steps,
        dt,
    )
    sizes = [min(block, n_traj - s) for s in range(0, n_traj, block)]

    def run(index: int) -> np.ndarray:
        return _block_phases(
            active, seq, seed, index, sizes[index], dt, steps
        )

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(index) for index in range(len(sizes))]
    return np.concatenate(parts)


def mc_coherence(
    components: Sequence[OuParams],
    seq: PulseSequence,
    n_traj: int,
    seed: int,
    workers: int = 1,
    block: int = DEFAULT_BLOCK,
) -> Tuple[float, float]:
    """Monte-Carlo coherence <cos phi> and its standard error."""
    phases = mc_phases(components, seq, n_traj, seed, workers, block)
    values = np.cos(phases)
    sigma = float(values.std(ddof=1) / math.sqrt(n_traj))
    return float(values.mean()), sigma


def nmr_signal_amplitude(depth_nm: float, proton_density: float) -> float:
    """RMS field (tesla) of a semi-infinite proton layer above the sensor."""
    if not depth_nm > 0:
        raise ValueError("depth must be > 0")
    if proton_density < 0:
        raise ValueError("proton density must be >= 0")
    moment = MU0_OVER_4PI * HBAR * GAMMA_H_RAD_PER_S_T
    depth = depth_nm * NM
    b_squared = proton_density * moment**2 * HALF_SPACE_FACTOR / depth**3
    return float(math.sqrt(b_squared))


def dipolar_brms_monte_carlo(
    depth_nm: float,
    proton_density: float,
    n_protons: int = 200_000,
    seed: int = 0,
    axis_angle: float = MAGIC_ANGLE,
) -> Tuple[float, float]:
    """Brute-force RMS field from randomly placed, precessing protons.

    Protons are drawn in the half-space beyond ``depth_nm`` (radial density
    proportional to r^-4 along each direction, then reweighted) with a
    random transverse spin of magnitude 1/sqrt(2) about the sensor axis.
    Returns (B_rms, standard error) in tesla.
    """
    if not depth_nm > 0:
        raise ValueError("depth must be > 0")
    rng = np.random.default_rng(seed)
    cos_theta = 1.0 - rng.random(n_protons)
    phi = TWO_PI * rng.random(n_protons)
    psi = TWO_PI * rng.random(n_protons)
    sin_theta = np.sqrt(1.0 - cos_theta**2)
    unit = np.stack(
        [sin_theta * np.cos(phi), sin_theta * np.sin(phi), cos_theta]
    )
    axis = np.array([np.sin(axis_angle), 0.0, np.cos(axis_angle)])
    across = np.array([np.cos(axis_angle), 0.0, -np.sin(axis_angle)])
    lateral = np.array([0.0, 1.0, 0.0])
    spin = (
        np.outer(across, np.cos(psi)) + np.outer(lateral, np.sin(psi))
    ) / math.sqrt(2.0)
    nearest = depth_nm * NM / cos_theta
    radius = nearest * (1.0 - rng.random(n_protons)) ** (-1.0 / 3.0)
    along = np.sum(spin * unit, axis=0)
    projected = 3.0 * along * (axis @ unit) / radius**3
    weight = projected**2 * TWO_PI * radius**6 / (3.0 * nearest**3)
    scale = proton_density * (MU0_OVER_4PI * HBAR * GAMMA_H_RAD_PER_S_T) ** 2
    mean = scale * weight.mean()
    error = scale * weight.std(ddof=1) / math.sqrt(n_protons)
    b_rms = math.sqrt(mean)
    return b_rms, error / (2.0 * b_rms)


def proton_larmor(field_gauss: float) -> float:
    """Proton Larmor frequency in MHz for a field in gauss."""
    if field_gauss < 0:
        raise ValueError("field must be >= 0")
    return GAMMA_H_KHZ_PER_G * 1.0e-3 * field_gauss


def expected_line_power(b_rms: float) -> float:
    """Two-sided variance (rad^2/us^2) of the proton line seen by the spin."""
    return float((GAMMA_E_RAD_PER_US_T * b_rms) ** 2)


@dataclass(frozen=True)
class CouplingLaw:
    """Delta(d) = a / d^n with a in rad/us nm^n."""

    a: float
    n: float

    def __post_init__(self):
        if self.a < 0:
            raise ValueError("coupling amplitude must be >= 0")
        if not 0.0 <= self.n <= 3.0:
            raise ValueError("coupling exponent must lie in [0, 3]")

    def at(self, depth_nm: float) -> float:
        return self.a / depth_nm**self.n


@dataclass(frozen=True)
class SyntheticEnvSpec:
    depths_nm: Tuple[float, ...]
    couplings: Tuple[CouplingLaw, CouplingLaw]
    tau_c1: float
    tau_c2: float
    proton_density: float = 6.0e28
    protons: bool = True
    sigma_c: float = 0.02
    t1_us: Optional[Tuple[float, ...]] = None
    field_gauss: float = 454.0
    temperature_k: Optional[float] = None
    coating: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "depths_nm", tuple(self.depths_nm))
        object.__setattr__(self, "couplings", tuple(self.couplings))
        if not self.depths_nm or min(self.depths_nm) <= 0:
            raise ValueError("depths must be > 0")
        if len(self.couplings) != 2:
            raise ValueError("two coupling laws are required")
        if not (self.tau_c1 > 0 and self.tau_c2 > 0):
            raise ValueError("correlation times must be > 0")
        if self.sigma_c < 0:
            raise ValueError("sigma_c must be >= 0")
        if self.t1_us is not None:
            object.__setattr__(self, "t1_us", tuple(self.t1_us))
            if len(self.t1_us) != len(self.depths_nm):
                raise ValueError("one T1 per depth is required")

    def model_at(self, depth_nm: float) -> DoubleLorentzian:
        first, second = self.couplings
        return DoubleLorentzian(
            LorentzianComponent(first.at(depth_nm), self.tau_c1),
            LorentzianComponent(second.at(depth_nm), self.tau_c2),
        )


@dataclass(frozen=True)
class MeasurementPlan:
    """What the synthetic experiment measures.

    ``time_grids`` maps N to explicit times; other N get a grid spanning
    GRID_SPAN times the 1/e decay time of the broadband model.
    """

    n_values: Tuple[int, ...] = (1, 2, 4, 8, 16, 32, 64)
    points_per_curve: int = 16
    time_grids: Dict[int, Tuple[float, ...]] = field(default_factory=dict)
    n_traj: int = 10000
    mc_oracle: bool = False
    nmr_sweep: bool = True
    t1_points: int = 16
    t1_sigma: float = 0.03

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(self.n_values))
        if not self.n_values or min(self.n_values) < 0:
            raise ValueError("pulse numbers must be >= 0")
        if self.points_per_curve < 4 or self.t1_points < 4:
            raise ValueError("curves need at least 4 points")
        if self.n_traj < MIN_TRAJECTORIES:
            raise ValueError(f"n_traj must be >= {MIN_TRAJECTORIES}")
        if self.t1_sigma < 0:
            raise ValueError("t1_sigma must be >= 0")


def reference_env_spec() -> SyntheticEnvSpec:
    """Shallow-to-deep ensemble with a slow and a fast surface bath."""
    return SyntheticEnvSpec(
        depths_nm=(2.0, 3.0, 4.0, 20.0),
        couplings=(CouplingLaw(4.24, 1.75), CouplingLaw(1.0, 0.9)),
        tau_c1=11.0,
        tau_c2=0.146,
        proton_density=6.0e28,
        protons=True,
        sigma_c=0.02,
        t1_us=(430.0, 860.0, 960.0, 3000.0),
        field_gauss=454.0,
    )


def _sequence(n_pulses: int, time: float) -> PulseSequence:
    if n_pulses == 0:
        return PulseSequence.ramsey(time)
    return PulseSequence.cpmg(n_pulses, time)


def decay_time(model: NoiseSpectrumModel, n_pulses: int) -> Optional[float]:
    """Time where chi reaches 1, or None if it stays below in the bracket."""
    low, high = GRID_BRACKET

    def excess(log_t: float) -> float:
        seq = _sequence(n_pulses, math.exp(log_t))
        return chi_time_domain(model, seq) - 1.0

    if excess(math.log(high)) < 0:
        return None
    if excess(math.log(low)) > 0:
        return low
    return math.exp(optimize.brentq(excess, math.log(low), math.log(high)))


def auto_time_grid(
    model: NoiseSpectrumModel, n_pulses: int, points: int
) -> np.ndarray:
    scale = decay_time(model, n_pulses)
    if scale is None:
        scale = UNDECAYED_TIME_SCALE * max(n_pulses, 1) ** (2.0 / 3.0)
        logger.debug(
            "N=%d does not decay, using %g us time scale", n_pulses, scale
        )
    return scale * np.linspace(*GRID_SPAN, points)


def _sweep_times(line_power: float, larmor: float) -> Tuple[int, np.ndarray]:
    """XY8 repeats and total times probing +-20 % around the line."""
    peak_time = math.pi * math.sqrt(SWEEP_TARGET_CHI / line_power)
    pulses = larmor * peak_time / math.pi
    repeats = 2 ** max(0, int(round(math.log2(max(pulses / 8.0, 1.0)))))
    n_pulses = 8 * repeats
    fine = SWEEP_FINE_HALF_WIDTH / n_pulses
    offsets = np.unique(
        np.round(
            np.concatenate(
                [SWEEP_COARSE, np.linspace(-fine, fine, SWEEP_FINE_POINTS)]
            ),
            12,
        )
    )
    probes = larmor * (1.0 + offsets)
    return repeats, np.sort(math.pi * n_pulses / probes)


class _CurveFactory:
    def __init__(
        self,
        model: NoiseSpectrumModel,
        broadband: DoubleLorentzian,
        spec: SyntheticEnvSpec,
        plan: MeasurementPlan,
        seed: int,
        label: str,
        workers: int,
        rtol: float,
    ):
        self.model = model
        self.broadband = broadband
        self.spec = spec
        self.plan = plan
        self.seed = seed
        self.label = label
        self.workers = workers
        self.rtol = rtol

    def _oracle(self, seq: PulseSequence, index: int) -> Tuple[float, float]:
        components = [
            OuParams.from_component(
                c,
                seed=derive_seed(self.seed, self.label, "ou", pos),
            )
            for pos, c in enumerate(
                (self.broadband.c1, self.broadband.c2)
            )
        ]
        dt = default_dt(components, seq)
        components = [
            OuParams(p.delta, p.tau_c, dt, p.seed) for p in components
        ]
        mc_seed = derive_seed(
            self.seed, self.label, seq.kind.value, seq.n_pulses, index
        )
        return mc_coherence(
            components, seq, self.plan.n_traj, mc_seed, self.workers
        )

    def curve(
        self, sequence: str, n_pulses: int, times: np.ndarray
    ) -> CoherenceCurve:
        values, spread = [], []
        for index, time in enumerate(times):
            seq = PulseSequence.for_curve(sequence, n_pulses, float(time))
            use_mc = self.plan.mc_oracle and seq.kind is not SequenceKind.XY8
            if use_mc:
                value, sigma = self._oracle(seq, index)
            else:
                value = math.exp(-chi_exact(self.model, seq, self.rtol))
                sigma = 0.0
            values.append(value)
            spread.append(sigma)
        rng = np.random.default_rng(
            derive_seed(self.seed, self.label, sequence, n_pulses, "noise")
        )
        noisy = np.asarray(values)
        if self.spec.sigma_c > 0:
            noisy = noisy + rng.normal(0.0, self.spec.sigma_c, len(times))
        sigma = np.hypot(self.spec.sigma_c, np.asarray(spread))
        return CoherenceCurve(
            n_pulses=n_pulses,
            sequence=sequence,
            times=times,
            coherence=np.clip(noisy, -0.2, 1.2),
            sigma=sigma,
        )


def _t1_curve(
    t1: float, plan: MeasurementPlan, seed: int, label: str
) -> T1Curve:
    times = t1 * np.linspace(0.0, T1_SPAN, plan.t1_points)
    population = np.exp(-times / t1)
    if plan.t1_sigma > 0:
        rng = np.random.default_rng(derive_seed(seed, label, "t1"))
        population = population + rng.normal(
            0.0, plan.t1_sigma, plan.t1_points
        )
    return T1Curve(
        times=times,
        population=population,
        sigma=np.full(plan.t1_points, plan.t1_sigma),
    )


def synthesize_sensor(
    spec: SyntheticEnvSpec,
    plan: MeasurementPlan,
    depth_nm: float,
    t1: Optional[float] = None,
    seed: int = 0,
    workers: int = 1,
    rtol: float = DEFAULT_RTOL,
) -> NvDataset:
    label = f"NV{depth_nm:g}"
    broadband = spec.model_at(depth_nm)
    model: NoiseSpectrumModel = broadband
    larmor = TWO_PI * proton_larmor(spec.field_gauss)
    line_power = 0.0
    if spec.protons and spec.proton_density > 0 and larmor > 0:
        b_rms = nmr_signal_amplitude(depth_nm, spec.proton_density)
        line_power = expected_line_power(b_rms)
        model = SumModel(
            (
                broadband,
                GaussianLine(larmor, LINE_WIDTH_FRACTION * larmor, line_power),
            )
        )
        logger.debug(
            "%s: proton line %g rad^2/us^2 at %g rad/us",
            label,
            line_power,
            larmor,
        )
    factory = _CurveFactory(
        model, broadband, spec, plan, seed, label, workers, rtol
    )
    curves: List[CoherenceCurve] = []
    for n_pulses in plan.n_values:
        if n_pulses in plan.time_grids:
            times = np.asarray(plan.time_grids[n_pulses], dtype=float)
        else:
            times = auto_time_grid(broadband, n_pulses, plan.points_per_curve)
        sequence = "Ramsey" if n_pulses == 0 else "CPMG"
        curves.append(factory.curve(sequence, n_pulses, times))
    if plan.nmr_sweep and line_power > 0:
        repeats, times = _sweep_times(line_power, larmor)
        curves.append(factory.curve("XY8", 8 * repeats, times))
    t1_curve = None
    if t1 is not None:
        t1_curve = _t1_curve(t1, plan, seed, label)
    return NvDataset(
        id=label,
        nominal_depth_nm=depth_nm,
        field_gauss=spec.field_gauss,
        curves=tuple(curves),
        temperature_k=spec.temperature_k,
        coating=spec.coating,
        t1=t1_curve,
    )


def synthesize_dataset(
    spec: SyntheticEnvSpec,
    plan: MeasurementPlan,
    seed: int = 0,
    workers: int = 1,
    rtol: float = DEFAULT_RTOL,
) -> List[NvDataset]:
    """One dataset per depth of ``spec``; bit-identical for a fixed seed."""
    datasets = []
    for index, depth in enumerate(spec.depths_nm):
        t1 = spec.t1_us[index] if spec.t1_us is not None else None
        logger.info("Synthesizing sensor at %g nm", depth)
        datasets.append(
            synthesize_sensor(spec, plan, depth, t1, seed, workers, rtol)
        )
    return datasets


def env_spec_from_dict(data: Optional[Dict]) -> SyntheticEnvSpec:
    """Synthetic environment from a config ``synthetic:`` section.

    Missing keys keep the reference ensemble's values.
    """
    reference = reference_env_spec()
    if not data:
        return reference
    couplings = reference.couplings
    if "couplings" in data:
        couplings = tuple(
            CouplingLaw(c["a"], c["n"]) for c in data["couplings"]
        )
    depths = tuple(data.get("depths_nm", reference.depths_nm))
    t1_us = data.get("t1_us")
    if t1_us is None and depths == reference.depths_nm:
        t1_us = reference.t1_us
    return SyntheticEnvSpec(
        depths_nm=depths,
        couplings=couplings,
        tau_c1=data.get("tau_c1_us", reference.tau_c1),
        tau_c2=data.get("tau_c2_us", reference.tau_c2),
        proton_density=data.get("proton_density", reference.proton_density),
        protons=data.get("protons", reference.protons),
        sigma_c=data.get("sigma_c", reference.sigma_c),
        t1_us=t1_us,
        field_gauss=data.get("field_gauss", reference.field_gauss),
        temperature_k=data.get("temperature_k"),
        coating=data.get("coating"),
    )


def plan_from_dict(
    data: Optional[Dict], mc_oracle: bool = False
) -> MeasurementPlan:
    return MeasurementPlan(**dict(data or {}, mc_oracle=mc_oracle))
