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

import re
from typing import Optional


class SingularFrequencyException(Exception):
    pass


class TimeOutOfWindowException(Exception):
    pass


class QuadratureFailureException(Exception):
    def __init__(self, message: str, achieved_error: float):
        super().__init__(message)
        self.achieved_error = achieved_error

    def __str__(self):
        return f"{self.args[0]} (achieved error {self.achieved_error:.3g})"


class UndersampledBathException(Exception):
    pass


class DecayFitFailedException(Exception):
    pass


class UndecayedException(Exception):
    def __init__(self, message: str, lower_bound: float):
        super().__init__(message)
        self.lower_bound = lower_bound


class ScalingUnderdeterminedException(Exception):
    pass


class SpectrumUnderdeterminedException(Exception):
    pass


class EmptySpectrumException(Exception):
    pass


class T1FitFailedException(Exception):
    pass


class FitFailedException(Exception):
    pass


class DegenerateFitException(Exception):
    def __init__(self, message: str, parameter: Optional[str] = None):
        super().__init__(message)
        self.parameter = parameter


class NotGlobalException(Exception):
    pass


class CovarianceInvalidException(Exception):
    pass


class NmrNotFoundException(Exception):
    pass


class WindowUncoveredException(Exception):
    pass


class DatasetSchemaException(Exception):
    def __init__(self, message: str, field: str, line: Optional[int] = None):
        super().__init__(message)
        self.field = field
        self.line = line

    def __str__(self):
        where = f"field '{self.field}'"
        if self.line is not None:
            where = f"{where} at line {self.line}"
        return f"{self.args[0]} ({where})"


class DatasetNotFoundException(Exception):
    pass


class TimesNotIncreasingException(Exception):
    pass


class OutOfRangeException(Exception):
    pass


class TooFewPointsException(Exception):
    pass


class InvalidModelException(Exception):
    pass


class InvalidConfigException(Exception):
    pass


def error_tag(exc: BaseException) -> str:
    """Kebab-case tag used in reports, e.g. ``scaling-underdetermined``."""
    name = type(exc).__name__
    if name.endswith("Exception"):
        name = name[: -len("Exception")]
    return re.sub(r"(?<!^)(?=[A-Z])", "-", name).lower()
