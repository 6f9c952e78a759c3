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

"""Reading and writing datasets and spectra.

A dataset is either one JSON document or a directory holding
``metadata.json``, one ``curve_<sequence>_<N>.csv`` per curve (columns
``time_us,coherence[,sigma]``) and an optional ``t1.csv`` (columns
``time_us,population[,sigma]``).
"""

import glob
import json
import logging
import os
import re
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml
from jsonschema.exceptions import ValidationError

from noise_spectroscopy.dataset_types import (
    CoherenceCurve,
    NvDataset,
    SpectrumEstimate,
    T1Curve,
)
from noise_spectroscopy.exception import (
    DatasetNotFoundException,
    DatasetSchemaException,
    OutOfRangeException,
    TimesNotIncreasingException,
    TooFewPointsException,
)
from noise_spectroscopy.units import TWO_PI, to_float
from noise_spectroscopy.validators import Validate

logger = logging.getLogger(__name__)

METADATA_FILE = "metadata.json"
T1_FILE = "t1.csv"
CURVE_PATTERN = re.compile(r"^curve_(Ramsey|CPMG|XY8)_(\d+)\.csv$")
DEFAULT_SIGMA_C = 0.02

CURVE_ERRORS = (
    ValueError,
    OutOfRangeException,
    TimesNotIncreasingException,
    TooFewPointsException,
)


def _node_line(text: str, path: Sequence[Any]) -> Optional[int]:
    """1-based line of the element at ``path`` in a JSON/YAML document."""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return None
    line = None
    for key in path:
        if node is None:
            break
        line = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            node = next(
                (v for k, v in node.value if k.value == str(key)), None
            )
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int):
            node = node.value[key] if key < len(node.value) else None
        else:
            node = None
    if node is not None:
        line = node.start_mark.line + 1
    return line


def _field_name(path: Sequence[Any]) -> str:
    name = ""
    for key in path:
        if isinstance(key, int):
            name += f"[{key}]"
        else:
            name += f".{key}" if name else str(key)
    return name or "<document>"


def _validate(data: Dict, text: Optional[str]) -> None:
    try:
        Validate.dataset(data)
    except ValidationError as err:
        path = list(err.absolute_path)
        line = _node_line(text, path) if text is not None else None
        raise DatasetSchemaException(
            err.message, _field_name(path), line
        ) from err


def _with_sigma(
    record: Dict, key: str, sigma_c: float, what: str
) -> List[float]:
    sigma = record.get("sigma")
    if sigma is None:
        logger.warning(
            "%s has no sigma, using %g for every point", what, sigma_c
        )
        return [sigma_c] * len(record[key])
    return sigma


def dataset_from_dict(
    data: Dict, sigma_c: float = DEFAULT_SIGMA_C, text: Optional[str] = None
) -> NvDataset:
    _validate(data, text)
    curves = []
    for index, record in enumerate(data["curves"]):
        what = f"curve {record['sequence']}-{record['n_pulses']}"
        try:
            curves.append(
                CoherenceCurve(
                    n_pulses=record["n_pulses"],
                    sequence=record["sequence"],
                    times=record["times_us"],
                    coherence=record["coherence"],
                    sigma=_with_sigma(record, "coherence", sigma_c, what),
                )
            )
        except CURVE_ERRORS as err:
            path = ["curves", index]
            line = _node_line(text, path) if text is not None else None
            raise DatasetSchemaException(
                str(err), _field_name(path), line
            ) from err
    t1 = None
    record = data.get("t1")
    if record is not None:
        try:
            t1 = T1Curve(
                times=record["times_us"],
                population=record["population"],
                sigma=_with_sigma(record, "population", sigma_c, "T1 curve"),
            )
        except CURVE_ERRORS as err:
            line = _node_line(text, ["t1"]) if text is not None else None
            raise DatasetSchemaException(str(err), "t1", line) from err
    return NvDataset(
        id=data["id"],
        nominal_depth_nm=data["nominal_depth_nm"],
        field_gauss=data["field_gauss"],
        curves=tuple(curves),
        temperature_k=data.get("temperature_k"),
        coating=data.get("coating"),
        t1=t1,
        measured_depth_nm=data.get("measured_depth_nm"),
        measured_depth_err_nm=data.get("measured_depth_err_nm"),
    )


def _read_columns(path: str, names: Tuple[str, ...]) -> Dict[str, list]:
    with open(path) as f:
        header = [h.strip() for h in f.readline().split(",")]
    if tuple(header[: len(names)]) != names or len(header) > len(names) + 1:
        raise DatasetSchemaException(
            f"expected columns {','.join(names)}[,sigma], got {header}",
            os.path.basename(path),
            1,
        )
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    columns = {
        name: [float(v) for v in table[:, i]] for i, name in enumerate(names)
    }
    if len(header) > len(names):
        columns["sigma"] = [float(v) for v in table[:, len(names)]]
    return columns


def _dict_from_directory(path: str) -> Dict:
    metadata_path = os.path.join(path, METADATA_FILE)
    if not os.path.isfile(metadata_path):
        raise DatasetNotFoundException(f"{metadata_path} not found")
    with open(metadata_path) as f:
        data = json.load(f)
    curves = []
    for name in sorted(os.listdir(path)):
        match = CURVE_PATTERN.match(name)
        if not match:
            continue
        columns = _read_columns(
            os.path.join(path, name), ("time_us", "coherence")
        )
        record = {
            "sequence": match.group(1),
            "n_pulses": int(match.group(2)),
            "times_us": columns["time_us"],
            "coherence": columns["coherence"],
        }
        if "sigma" in columns:
            record["sigma"] = columns["sigma"]
        curves.append(record)
    curves.sort(key=lambda r: (r["sequence"], r["n_pulses"]))
    data["curves"] = curves
    t1_path = os.path.join(path, T1_FILE)
    if os.path.isfile(t1_path):
        columns = _read_columns(t1_path, ("time_us", "population"))
        data["t1"] = {
            "times_us": columns["time_us"],
            "population": columns["population"],
        }
        if "sigma" in columns:
            data["t1"]["sigma"] = columns["sigma"]
    return data


def ingest_dataset(path: str, sigma_c: float = DEFAULT_SIGMA_C) -> NvDataset:
    """Load a dataset from a JSON file or a CSV directory."""
    if os.path.isdir(path):
        logger.debug("Reading CSV dataset directory %s", path)
        return dataset_from_dict(_dict_from_directory(path), sigma_c)
    if not os.path.isfile(path):
        raise DatasetNotFoundException(f"Dataset {path} not found")
    with open(path) as f:
        text = f.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise DatasetSchemaException(
            err.msg, "<document>", err.lineno
        ) from err
    return dataset_from_dict(data, sigma_c, text)


def ingest_datasets(
    paths: Sequence[str],
    sigma_c: float = DEFAULT_SIGMA_C,
    strict: bool = True,
) -> List[NvDataset]:
    """Expand directories of dataset JSON files and ingest everything.

    With ``strict`` off a dataset that cannot be read is logged and
    skipped; it is still an error when none can be read.
    """
    expanded = []
    for path in paths:
        if os.path.isdir(path) and not os.path.isfile(
            os.path.join(path, METADATA_FILE)
        ):
            expanded.extend(sorted(glob.glob(os.path.join(path, "*.json"))))
        else:
            expanded.append(path)
    datasets = []
    for path in expanded:
        try:
            datasets.append(ingest_dataset(path, sigma_c))
        except (DatasetNotFoundException, DatasetSchemaException) as err:
            if strict:
                raise
            logger.error("Skipping dataset %s: %s", path, err)
    if not datasets:
        raise DatasetNotFoundException(
            f"no dataset could be read from {', '.join(paths)}"
        )
    return datasets


def dataset_to_dict(dataset: NvDataset) -> Dict:
    data = {
        "id": dataset.id,
        "nominal_depth_nm": dataset.nominal_depth_nm,
        "field_gauss": dataset.field_gauss,
        "temperature_k": dataset.temperature_k,
        "coating": dataset.coating,
        "measured_depth_nm": dataset.measured_depth_nm,
        "measured_depth_err_nm": dataset.measured_depth_err_nm,
        "curves": [
            {
                "n_pulses": curve.n_pulses,
                "sequence": curve.sequence,
                "times_us": list(curve.times),
                "coherence": list(curve.coherence),
                "sigma": list(curve.sigma),
            }
            for curve in dataset.curves
        ],
        "t1": None,
    }
    if dataset.t1 is not None:
        data["t1"] = {
            "times_us": list(dataset.t1.times),
            "population": list(dataset.t1.population),
            "sigma": list(dataset.t1.sigma),
        }
    return data


def write_json(path: str, data: Any) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w") as f:
        f.write(json.dumps(data, indent=2, sort_keys=True, allow_nan=False))
        f.write("\n")


def write_dataset(dataset: NvDataset, path: str) -> None:
    write_json(path, dataset_to_dict(dataset))


def spectrum_to_dict(
    estimate: SpectrumEstimate,
    dataset_id: str,
    depth_nm: Optional[float] = None,
    field_gauss: Optional[float] = None,
) -> Dict:
    omega, s, sigma = estimate.arrays()
    return {
        "dataset_id": dataset_id,
        "depth_nm": depth_nm,
        "field_gauss": field_gauss,
        "frequency_mhz": to_float(omega / TWO_PI),
        "s_rad2_per_us": to_float(s),
        "sigma_rad2_per_us": to_float(sigma),
        "n_pulses": [n for n, _ in estimate.provenance],
        "times_us": [t for _, t in estimate.provenance],
        "harmonic_corrected": estimate.harmonic_corrected,
    }


def spectrum_from_dict(data: Dict) -> SpectrumEstimate:
    try:
        Validate.spectrum(data)
    except ValidationError as err:
        raise DatasetSchemaException(
            err.message, _field_name(list(err.absolute_path))
        ) from err
    size = len(data["frequency_mhz"])
    n_pulses = data.get("n_pulses") or [0] * size
    times = data.get("times_us") or [0.0] * size
    return SpectrumEstimate(
        omega=np.asarray(data["frequency_mhz"], dtype=float) * TWO_PI,
        s=data["s_rad2_per_us"],
        sigma=data["sigma_rad2_per_us"],
        provenance=list(zip(n_pulses, times)),
        harmonic_corrected=data.get("harmonic_corrected", False),
    )


def read_spectrum(path: str) -> Tuple[SpectrumEstimate, Dict]:
    """Spectrum estimate and its metadata (dataset id, depth, field)."""
    if not os.path.isfile(path):
        raise DatasetNotFoundException(f"Spectrum {path} not found")
    with open(path) as f:
        data = json.load(f)
    estimate = spectrum_from_dict(data)
    meta = {
        "dataset_id": data["dataset_id"],
        "depth_nm": data.get("depth_nm"),
        "field_gauss": data.get("field_gauss"),
    }
    return estimate, meta
