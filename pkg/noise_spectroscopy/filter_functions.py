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

"""Pulse sequences, filter functions and the coherence integral.

The decay exponent of a sequence of total time t is

    chi(t) = integral_0^inf S(w) F(w t) / w^2 dw,   C = exp(-chi)

with F(w t) = w^2 |integral_0^t s(t') exp(i w t') dt'|^2 and s the
toggling-frame sign. The integrand oscillates on the scale pi/t, so the
integral is evaluated cell by cell on that grid with an analytic tail.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Tuple

import numpy as np

from noise_spectroscopy.exception import (
    QuadratureFailureException,
    TimeOutOfWindowException,
)
from noise_spectroscopy.noise_model import (
    LorentzianComponent,
    NoiseSpectrumModel,
    bandwidth_hints,
    components,
    evaluate_spectrum,
    tail_moment,
)

logger = logging.getLogger(__name__)

DEFAULT_RTOL = 1.0e-5
DEFAULT_MAX_SUBDIVISIONS = 40
MAX_TAIL_EXTENSIONS = 60
MAX_CELLS = 2_000_000
SINGULAR_GUARD = 1.0e-3

# 15-point Kronrod rule and its embedded 7-point Gauss rule on [-1, 1]
_XK = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
    ]
)
_WK = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
    ]
)
_WK_CENTER = 0.209482141084727828012999174891714
_WG = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
    ]
)
_WG_CENTER = 0.417959183673469387755102040816327

NODES = np.concatenate([_XK, [0.0], -_XK])
KRONROD_WEIGHTS = np.concatenate([_WK, [_WK_CENTER], _WK])
_gauss_half = np.array([0.0, _WG[0], 0.0, _WG[1], 0.0, _WG[2], 0.0])
GAUSS_WEIGHTS = np.concatenate([_gauss_half, [_WG_CENTER], _gauss_half])

KNEE_FACTORS = 2.0 ** np.arange(-4, 5)
LINE_OFFSETS = np.arange(-10.0, 10.5, 0.5)


class SequenceKind(Enum):
    RAMSEY = "Ramsey"
    CPMG = "CPMG"
    XY8 = "XY8"


@dataclass(frozen=True)
class PulseSequence:
    """Timing of an ideal pi-pulse sequence.

    ``count`` is the number of pi pulses for CPMG and the number of XY8
    blocks for XY8; Ramsey carries no pulses. Pulses sit at
    t (2j - 1) / (2N), j = 1..N.
    """

    kind: SequenceKind
    total_time: float
    count: int = 0

    def __post_init__(self):
        if not np.isfinite(self.total_time) or self.total_time <= 0:
            raise ValueError(
                f"total_time must be > 0, got {self.total_time}"
            )
        if self.kind is SequenceKind.RAMSEY:
            if self.count != 0:
                raise ValueError("Ramsey carries no pulses")
        elif int(self.count) != self.count or self.count < 1:
            raise ValueError(
                f"{self.kind.value} needs a positive integer count"
            )

    @classmethod
    def ramsey(cls, total_time: float) -> "PulseSequence":
        return cls(SequenceKind.RAMSEY, total_time)

    @classmethod
    def hahn(cls, total_time: float) -> "PulseSequence":
        return cls(SequenceKind.CPMG, total_time, 1)

    @classmethod
    def cpmg(cls, n_pulses: int, total_time: float) -> "PulseSequence":
        return cls(SequenceKind.CPMG, total_time, n_pulses)

    @classmethod
    def xy8(cls, repeats: int, total_time: float) -> "PulseSequence":
        return cls(SequenceKind.XY8, total_time, repeats)

    @classmethod
    def for_curve(
        cls, sequence: str, n_pulses: int, total_time: float
    ) -> "PulseSequence":
        """Build from the (sequence name, effective pulse count) of a curve."""
        kind = SequenceKind(sequence)
        if kind is SequenceKind.RAMSEY:
            return cls.ramsey(total_time)
        if kind is SequenceKind.XY8:
            if n_pulses % 8:
                raise ValueError("XY8 pulse count must be a multiple of 8")
            return cls.xy8(n_pulses // 8, total_time)
        return cls.cpmg(n_pulses, total_time)

    @property
    def n_pulses(self) -> int:
        if self.kind is SequenceKind.XY8:
            return 8 * self.count
        return self.count

    def at(self, total_time: float) -> "PulseSequence":
        return replace(self, total_time=total_time)

    def pulse_times(self) -> np.ndarray:
        n = self.n_pulses
        j = np.arange(1, n + 1)
        return self.total_time * (2 * j - 1) / (2.0 * n) if n else j * 0.0

    def edges(self) -> np.ndarray:
        return np.concatenate(
            [[0.0], self.pulse_times(), [self.total_time]]
        )

    def signs(self) -> np.ndarray:
        return (-1.0) ** np.arange(self.n_pulses + 1)


def probe_frequency(seq: PulseSequence) -> float:
    """Centre of the main filter passband, pi N / t."""
    return np.pi * seq.n_pulses / seq.total_time


def toggling_function(seq: PulseSequence, time: float) -> int:
    if not 0.0 <= time <= seq.total_time:
        raise TimeOutOfWindowException(
            f"time {time} outside [0, {seq.total_time}]"
        )
    passed = int(np.searchsorted(seq.pulse_times(), time, side="left"))
    return -1 if passed % 2 else 1


@functools.lru_cache(maxsize=256)
def _edge_weights(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Edge positions (fraction of t) and weights of the phase integral."""
    m = np.arange(1, n + 1)
    positions = np.concatenate([[0.0], (2 * m - 1) / (2.0 * n), [1.0]])
    weights = np.concatenate(
        [[-1.0], 2.0 * (-1.0) ** (m - 1), [(-1.0) ** n]]
    )
    return positions, weights


def filter_numeric(seq: PulseSequence, omega):
    """F(w t) from the exact integral over each toggling interval."""
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise ValueError("omega must be > 0")
    positions, weights = _edge_weights(seq.n_pulses)
    z = np.atleast_1d(w) * seq.total_time
    amplitude = np.exp(1j * np.outer(z, positions)) @ weights
    value = np.abs(amplitude) ** 2
    if w.ndim == 0:
        return float(value[0])
    return value.reshape(w.shape)


def _dirichlet(n: int, u: np.ndarray) -> np.ndarray:
    zero = u == 0
    ratio = np.sin(n * u) / np.where(zero, 1.0, np.sin(u))
    return np.where(zero, float(n), ratio)


def _closed_form(n: int, z: np.ndarray) -> np.ndarray:
    quarter = np.sin(z / (4.0 * n)) ** 4
    if n % 2:
        numerator = np.cos(z / 2.0) ** 2
    else:
        numerator = np.sin(z / 2.0) ** 2
    denominator = np.cos(z / (2.0 * n))
    near = np.abs(denominator) < SINGULAR_GUARD
    safe = np.where(near, 1.0, denominator) ** 2
    value = 16.0 * quarter * numerator / safe
    if np.any(near):
        # F = 16 sin^4(z/4N) (sin(N u) / sin(u))^2 around z0 = N pi (2k+1)
        zn = z[near]
        k = np.round((zn / (n * np.pi) - 1.0) / 2.0)
        u = (zn - n * np.pi * (2.0 * k + 1.0)) / (2.0 * n)
        value[near] = 16.0 * quarter[near] * _dirichlet(n, u) ** 2
    return value


def filter_closed_form(seq: PulseSequence, omega):
    """Closed-form F(w t) for CPMG and XY8, parity-correct in N."""
    if seq.kind is SequenceKind.RAMSEY:
        raise ValueError("closed form requires a CPMG or XY8 sequence")
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise ValueError("omega must be > 0")
    z = np.atleast_1d(w) * seq.total_time
    value = _closed_form(seq.n_pulses, z)
    if w.ndim == 0:
        return float(value[0])
    return value.reshape(w.shape)


def filter_values(seq: PulseSequence, omega: np.ndarray) -> np.ndarray:
    """Fastest exact F for any kind; omega is a positive array."""
    z = omega * seq.total_time
    if seq.kind is SequenceKind.RAMSEY:
        return 4.0 * np.sin(z / 2.0) ** 2
    return _closed_form(seq.n_pulses, z)


def filter_average(seq: PulseSequence) -> float:
    """Mean of F over a period, 4N + 2."""
    return 4.0 * seq.n_pulses + 2.0


@functools.lru_cache(maxsize=256)
def _oscillation_sum(n: int) -> float:
    positions, weights = _edge_weights(n)
    i, j = np.triu_indices(len(positions), k=1)
    spacing = positions[j] - positions[i]
    return float(np.sum(2.0 * np.abs(weights[i] * weights[j]) / spacing))


def oscillation_bound(seq: PulseSequence) -> float:
    """Sum of |cosine amplitude| / frequency of F - mean(F), in units of t."""
    return _oscillation_sum(seq.n_pulses)


def _gauss_kronrod(
    func: Callable[[np.ndarray], np.ndarray], a: np.ndarray, b: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = center[:, None] + half[:, None] * NODES[None, :]
    fx = func(x.ravel()).reshape(x.shape)
    kronrod = half * (fx @ KRONROD_WEIGHTS)
    gauss = half * (fx @ GAUSS_WEIGHTS)
    return kronrod, np.abs(kronrod - gauss)


def _adaptive_integral(
    func: Callable[[np.ndarray], np.ndarray],
    edges: np.ndarray,
    rtol: float,
    max_subdivisions: int,
    reference: float = 0.0,
) -> Tuple[float, float]:
    a, b = edges[:-1], edges[1:]
    values, errors = _gauss_kronrod(func, a, b)
    total = float(values.sum())
    error = float(errors.sum())
    for _ in range(max_subdivisions):
        target = max(rtol * max(abs(total), reference), np.finfo(float).tiny)
        if error <= target:
            return total, error
        split = errors > target / len(errors)
        if len(errors) + split.sum() > MAX_CELLS:
            break
        middle = 0.5 * (a[split] + b[split])
        new_a = np.concatenate([a[split], middle])
        new_b = np.concatenate([middle, b[split]])
        new_values, new_errors = _gauss_kronrod(func, new_a, new_b)
        keep = ~split
        a = np.concatenate([a[keep], new_a])
        b = np.concatenate([b[keep], new_b])
        values = np.concatenate([values[keep], new_values])
        errors = np.concatenate([errors[keep], new_errors])
        total = float(values.sum())
        error = float(errors.sum())
    target = max(rtol * max(abs(total), reference), np.finfo(float).tiny)
    if error <= target:
        return total, error
    raise QuadratureFailureException(
        "coherence integral did not converge", error / max(abs(total), 1e-300)
    )


def _grid(lo: float, hi: float, cell: float, hints) -> np.ndarray:
    points = [np.arange(lo, hi, cell), [hi]]
    for knee in hints["knees"]:
        points.append(knee * KNEE_FACTORS)
    for center, width in hints["lines"]:
        points.append(center + width * LINE_OFFSETS)
    edges = np.unique(np.concatenate(points))
    return edges[(edges >= lo) & (edges <= hi)]


def _initial_cutoff(model: NoiseSpectrumModel, seq: PulseSequence) -> float:
    cell = np.pi / seq.total_time
    cutoff = max(4.0 * (seq.n_pulses + 1) * cell, 40.0 * cell)
    hints = bandwidth_hints(model)
    for knee in hints["knees"]:
        cutoff = max(cutoff, 20.0 * knee)
    for center, width in hints["lines"]:
        cutoff = max(cutoff, center + 10.0 * width)
    return cutoff


def chi_exact(
    model: NoiseSpectrumModel,
    seq: PulseSequence,
    rtol: float = DEFAULT_RTOL,
    max_subdivisions: int = DEFAULT_MAX_SUBDIVISIONS,
) -> float:
    """Decay exponent chi(t) of ``seq`` in the bath ``model``.

    Cells of width pi/t (plus breakpoints at spectral knees and lines) are
    integrated with a 15-point Kronrod rule and bisected until the summed
    error estimate meets ``rtol``. Beyond the cutoff W the filter is
    replaced by its mean 4N+2; the neglected oscillating part is bounded by
    2 g(W) B / t with g = S/w^2, and W is doubled until that bound is below
    a tenth of the target.
    """
    t = seq.total_time
    cell = np.pi / t
    hints = bandwidth_hints(model)

    def integrand(omega: np.ndarray) -> np.ndarray:
        spectrum = evaluate_spectrum(model, omega)
        return spectrum * filter_values(seq, omega) / omega**2

    cutoff = _initial_cutoff(model, seq)
    body, _ = _adaptive_integral(
        integrand, _grid(0.0, cutoff, cell, hints), rtol, max_subdivisions
    )
    mean_filter = filter_average(seq)
    spread = oscillation_bound(seq)
    total = body + mean_filter * tail_moment(model, cutoff)
    for _ in range(MAX_TAIL_EXTENSIONS):
        g = evaluate_spectrum(model, cutoff) / cutoff**2
        bound = 2.0 * g * spread / t
        if bound <= 0.1 * rtol * abs(total):
            return total
        extra, _ = _adaptive_integral(
            integrand,
            _grid(cutoff, 2.0 * cutoff, cell, hints),
            rtol,
            max_subdivisions,
            reference=abs(total),
        )
        body += extra
        cutoff *= 2.0
        total = body + mean_filter * tail_moment(model, cutoff)
        logger.debug("chi tail extended to %g rad/us", cutoff)
    raise QuadratureFailureException(
        "high-frequency tail bound did not converge",
        bound / max(abs(total), 1e-300),
    )


def coherence_analytic(
    model: NoiseSpectrumModel,
    seq: PulseSequence,
    rtol: float = DEFAULT_RTOL,
    max_subdivisions: int = DEFAULT_MAX_SUBDIVISIONS,
) -> float:
    return float(np.exp(-chi_exact(model, seq, rtol, max_subdivisions)))


def chi_lorentzian(
    component: LorentzianComponent, seq: PulseSequence
) -> float:
    """Exact chi of one Ornstein-Uhlenbeck component in the time domain.

    chi = <phi^2>/2 with phi summed over toggling intervals; each pair of
    intervals integrates the exponential autocorrelation in closed form.
    """
    tau = component.tau_c
    edges = seq.edges()
    start, stop = edges[:-1], edges[1:]
    x = (stop - start) / tau
    same = 2.0 * tau**2 * (x + np.expm1(-x))
    rise = -np.expm1(-x)
    signs = seq.signs()
    i, j = np.triu_indices(len(start), k=1)
    gap = (start[j] - stop[i]) / tau
    cross = tau**2 * np.exp(-gap) * rise[i] * rise[j]
    pairs = np.sum(signs[i] * signs[j] * cross)
    return float(0.5 * component.delta**2 * (same.sum() + 2.0 * pairs))


def chi_time_domain(model: NoiseSpectrumModel, seq: PulseSequence) -> float:
    """Exact chi for models made only of Lorentzian components."""
    terms = components(model)
    if not all(isinstance(c, LorentzianComponent) for c in terms):
        raise ValueError("time-domain chi needs Lorentzian components only")
    return float(sum(chi_lorentzian(c, seq) for c in terms))


def ou_ramsey_chi(delta: float, tau_c: float, t: float) -> float:
    x = t / tau_c
    return float(delta**2 * tau_c**2 * (x + np.expm1(-x)))


def ou_hahn_chi(delta: float, tau_c: float, t: float) -> float:
    x = t / tau_c
    return float(
        delta**2 * tau_c**2 * (x - 3.0 + 4.0 * np.exp(-x / 2.0) - np.exp(-x))
    )
