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

"""Static figure panels of a report.

Each panel is written as ``<panel>.svg`` together with
``<panel>_points.csv`` and ``<panel>_curves.csv`` holding exactly the
numbers drawn, so the figure data can be re-read bit for bit.
"""

import logging
import os
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from noise_spectroscopy.decomposition import decay_model  # noqa: E402
from noise_spectroscopy.fitting import depth_scaling_curve  # noqa: E402
from noise_spectroscopy.report import Report, band_arrays  # noqa: E402
from noise_spectroscopy.units import TWO_PI  # noqa: E402

logger = logging.getLogger(__name__)

CSV_FORMAT = "%.17g"
SVG_HASH_SALT = "noise-spectroscopy"
CURVE_POINTS = 200
POINT_COLUMNS = ("series", "x", "y", "yerr", "xerr")
CURVE_COLUMNS = ("series", "x", "y", "lower", "upper")


@dataclass
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray
    yerr: Optional[np.ndarray] = None
    xerr: Optional[np.ndarray] = None


@dataclass
class Curve:
    label: str
    x: np.ndarray
    y: np.ndarray
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None


@dataclass
class Panel:
    name: str
    title: str
    xlabel: str
    ylabel: str
    xscale: str = "linear"
    yscale: str = "linear"
    points: List[Series] = field(default_factory=list)
    curves: List[Curve] = field(default_factory=list)
    vlines: List[Tuple[float, str]] = field(default_factory=list)


def _column(values, size: int) -> np.ndarray:
    if values is None:
        return np.full(size, np.nan)
    return np.asarray(values, dtype=float)


def _table(items: Sequence, columns: Tuple[str, ...]) -> np.ndarray:
    rows = []
    for index, item in enumerate(items):
        size = len(item.x)
        block = [np.full(size, float(index))]
        block.extend(
            _column(getattr(item, name), size) for name in columns[1:]
        )
        rows.append(np.column_stack(block))
    if not rows:
        return np.empty((0, len(columns)))
    return np.vstack(rows)


def _write_csv(path: str, items: Sequence, columns: Tuple[str, ...]) -> None:
    labels = "; ".join(f"{i}={item.label}" for i, item in enumerate(items))
    np.savetxt(
        path,
        _table(items, columns),
        fmt=CSV_FORMAT,
        delimiter=",",
        header=f"series: {labels}\n{','.join(columns)}",
    )


def _render(panel: Panel, path: str, stamp: bool) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    try:
        for series in panel.points:
            ax.errorbar(
                series.x,
                series.y,
                yerr=series.yerr,
                xerr=series.xerr,
                fmt="o",
                ms=3.5,
                capsize=2,
                label=series.label,
            )
        for curve in panel.curves:
            (line,) = ax.plot(curve.x, curve.y, "-", lw=1.5, label=curve.label)
            if curve.lower is not None and curve.upper is not None:
                ax.fill_between(
                    curve.x,
                    curve.lower,
                    curve.upper,
                    color=line.get_color(),
                    alpha=0.2,
                    lw=0,
                )
        for x, label in panel.vlines:
            ax.axvline(x, color="gray", ls="--", lw=1.0, label=label)
        if panel.xscale == "log":
            ax.set_xscale("log", nonpositive="mask")
        if panel.yscale == "log":
            ax.set_yscale("log", nonpositive="mask")
        ax.set_xlabel(panel.xlabel)
        ax.set_ylabel(panel.ylabel)
        ax.set_title(panel.title)
        ax.grid(True, alpha=0.25)
        ax.legend(fontsize="small")
        fig.tight_layout()
        metadata = None if stamp else {"Date": None}
        with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT}):
            fig.savefig(path, format="svg", metadata=metadata)
    finally:
        plt.close(fig)


def coherence_panel(dataset, rows) -> Panel:
    panel = Panel(
        name=f"{dataset.id}_coherence",
        title=f"{dataset.id}: CPMG coherence",
        xlabel="Free evolution time t (us)",
        ylabel="Coherence C (normalized)",
    )
    for row in rows:
        times, values, sigma = row.curve.arrays()
        panel.points.append(Series(f"N={row.n_pulses}", times, values, sigma))
        if row.fit is None:
            continue
        grid = np.linspace(0.0, float(times.max()), CURVE_POINTS)
        theta = (row.fit.amplitude, row.fit.t2, row.fit.stretch)
        panel.curves.append(
            Curve(f"N={row.n_pulses} fit", grid, decay_model(theta, grid))
        )
    return panel


def scaling_panel(dataset, rows, scaling) -> Optional[Panel]:
    fitted = [row for row in rows if row.fit is not None]
    if not fitted:
        return None
    panel = Panel(
        name=f"{dataset.id}_t2_scaling",
        title=f"{dataset.id}: coherence time vs pulse number",
        xlabel="Number of pulses N",
        ylabel="Coherence time T2 (us)",
        xscale="log",
        yscale="log",
    )
    panel.points.append(
        Series(
            "T2(N)",
            np.array([float(r.n_pulses) for r in fitted]),
            np.array([r.fit.t2 for r in fitted]),
            np.array([r.fit.t2_err for r in fitted]),
        )
    )
    if scaling is not None:
        grid = np.geomspace(1.0, max(r.n_pulses for r in fitted), 100)
        label = f"k = {scaling.k:.3g}"
        if scaling.saturates:
            label += f", T2sat = {scaling.t2_sat:.3g} us"
        panel.curves.append(Curve(label, grid, scaling.t2_at(grid)))
    return panel


def _log_series(label: str, estimate) -> Series:
    """Points with S > 0; the others cannot be drawn on a log axis."""
    omega, s, sigma = estimate.arrays()
    keep = s > 0
    dropped = int(np.count_nonzero(~keep))
    if dropped:
        label = f"{label} ({dropped} points with S <= 0 not shown)"
    return Series(label, omega[keep] / TWO_PI, s[keep], sigma[keep])


def spectrum_panel(dataset, spectrum, models, nmr) -> Optional[Panel]:
    if spectrum is None and nmr is None:
        return None
    panel = Panel(
        name=f"{dataset.id}_spectrum",
        title=f"{dataset.id}: noise spectrum",
        xlabel="Frequency f = omega/2pi (MHz)",
        ylabel="S(omega) (rad^2/us)",
        xscale="log",
        yscale="log",
    )
    if spectrum is not None:
        panel.points.append(_log_series("CPMG", spectrum.estimate))
    if nmr is not None:
        panel.points.append(_log_series("XY8 sweep", nmr.estimate))
    if models is not None:
        for result in models.comparison.ranked:
            label = (
                f"{result.kind.value} "
                f"(reduced chi2 {result.reduced_chi2:.3g})"
            )
            arrays = band_arrays(models, result.kind.value)
            if arrays is not None:
                frequency, value, lower, upper = arrays
                panel.curves.append(
                    Curve(label, frequency, value, lower, upper)
                )
            elif spectrum is not None:
                omega = np.asarray(spectrum.broadband.omega)
                grid = np.geomspace(omega.min(), omega.max(), CURVE_POINTS)
                panel.curves.append(
                    Curve(label, grid / TWO_PI, result.evaluate(grid))
                )
    larmor = spectrum.larmor_mhz if spectrum is not None else None
    if larmor:
        panel.vlines.append((larmor, f"proton Larmor {larmor:.4f} MHz"))
    return panel


def depth_scaling_panel(result) -> Panel:
    panel = Panel(
        name="depth_scaling",
        title="Coupling strength vs depth",
        xlabel="Depth d (nm)",
        ylabel="Coupling Delta (rad/us)",
        xscale="log",
        yscale="log",
    )
    for name, points in sorted(result.points.items()):
        data = np.array([p[1:] for p in points], dtype=float)
        depth, depth_err, delta, delta_err = data.T
        panel.points.append(
            Series(name, depth, delta, delta_err, depth_err)
        )
        fit = result.fits.get(name)
        if fit is None:
            continue
        grid = np.geomspace(0.8 * depth.min(), 1.2 * depth.max(), 100)
        panel.curves.append(
            Curve(
                f"{name}: a/d^n, n = {fit.n:.3g}",
                grid,
                depth_scaling_curve(fit, grid),
            )
        )
    return panel


def report_panels(report: Report) -> List[Panel]:
    panels = []
    for dataset in report.datasets:
        results = report.results[dataset.id]
        rows = results.get("decay", ())
        if rows:
            panels.append(coherence_panel(dataset, rows))
        candidates = (
            scaling_panel(dataset, rows, results.get("scaling")),
            spectrum_panel(
                dataset,
                results.get("spectrum"),
                results.get("models"),
                results.get("nmr"),
            ),
        )
        panels.extend(p for p in candidates if p is not None)
    depth_scaling = report.ensemble.get("depth_scaling")
    if depth_scaling is not None:
        panels.append(depth_scaling_panel(depth_scaling))
    return panels


def write_panel(panel: Panel, outdir: str, stamp: bool = False) -> List[str]:
    base = os.path.join(outdir, panel.name)
    paths = [f"{base}.svg", f"{base}_points.csv", f"{base}_curves.csv"]
    _render(panel, paths[0], stamp)
    _write_csv(paths[1], panel.points, POINT_COLUMNS)
    _write_csv(paths[2], panel.curves, CURVE_COLUMNS)
    return paths


def emit_plots(report: Report, outdir: str, stamp: bool = False) -> List[str]:
    """Write every panel of ``report`` to ``outdir``; returns the paths."""
    os.makedirs(outdir, exist_ok=True)
    written = []
    for panel in report_panels(report):
        logger.debug("Writing panel %s", panel.name)
        written.extend(write_panel(panel, outdir, stamp))
    logger.info("Wrote %d plot files to %s", len(written), outdir)
    return written
