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

"""Physical constants and unit conversions.

Internally frequencies are angular (rad/us), times are in us and couplings
are in rad/us. Files carry ordinary frequencies in MHz.
"""

import numpy as np

TWO_PI = 2.0 * np.pi

# g=2 electron-electron dipolar coupling, MHz nm^3
C_DIP_MHZ_NM3 = 52.04

# proton gyromagnetic ratio / 2pi
GAMMA_H_KHZ_PER_G = 4.25774
GAMMA_H_RAD_PER_S_T = TWO_PI * GAMMA_H_KHZ_PER_G * 1.0e7

# electron gyromagnetic ratio in rad/us/T, couples B to the sensor phase
GAMMA_E_RAD_PER_US_T = 1.76086e5

MU0_OVER_4PI = 1.0e-7
HBAR = 1.0546e-34

# half-space geometry factor for an axis at the magic angle
HALF_SPACE_FACTOR = 5.0 * np.pi / 96.0
MAGIC_ANGLE = np.arccos(1.0 / np.sqrt(3.0))

DEFAULT_PROTON_DENSITY = 6.0e28


def to_float(value):
    """Plain python float(s) for serialization."""
    if np.ndim(value) == 0:
        return float(value)
    return [float(v) for v in np.ravel(value)]
