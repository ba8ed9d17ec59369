# Copyright © py4mammo developers,
# Licensed under the Apache License 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
import logging
import re
from dataclasses import dataclass

import numpy as np

from py4mammo._util import convert
from py4mammo.exception import MissingKey, ParserError
from py4mammo.model import CaseInputs, build_measurements

logger = logging.getLogger(__name__)

MEASUREMENT_KEYS = ("fthrx", "brsep", "vertical_arc", "crc_arc", "lat_x", "lat_z")
OBSERVATION_KEYS = ("xc", "zc", "pw", "pz", "bc")
REQUIRED_KEYS = MEASUREMENT_KEYS + OBSERVATION_KEYS
EXTREME_KEYS = ("lw", "lz", "rw", "rz")
CALIBRATION_KEYS = (
    "cal_x",
    "cal_z",
    "cal_y1",
    "cal_cc1x",
    "cal_cc1z",
    "cal_y2",
    "cal_cc2x",
    "cal_cc2z",
)
CHOICES = {
    "projector": ("affine", "calibrated"),
    "geodesic": ("closed", "numeric"),
    "phantom_coupling": ("yes", "no"),
}
NUMBER_KEYS = REQUIRED_KEYS + EXTREME_KEYS + CALIBRATION_KEYS + ("H",)

_NUMBER = re.compile(r"[+-]?(\d+\.\d*|\.\d+)([eE][+-]?\d+)?")
_DECIMAL_COMMA = re.compile(r"[+-]?\d*,\d+")


@dataclass
class ParseCase:
    """Read a case file of ``key = value`` lines.

    Lines starting with ``#`` and everything after a ``#`` are comments. The order of
    the keys does not matter and unknown keys are ignored. Numbers must be written with
    a decimal point, e.g., ``bc = 0.95`` or ``fthrx = 65.0``."""

    text: str

    def __post_init__(self):
        self.entries = {}
        for number, line in enumerate(self.text.splitlines(), start=1):
            content = line.split("#", 1)[0].strip()
            if not content:
                continue
            key, separator, value = content.partition("=")
            key, value = key.strip(), value.strip()
            if not separator or not key:
                message = f"Expected 'key = value' but found '{content}'."
                raise ParserError(message, number)
            if key in self.entries:
                raise ParserError(f"The key '{key}' is defined more than once.", number)
            if key in NUMBER_KEYS:
                self.entries[key] = _parse_number(key, value, number)
            elif key in CHOICES:
                self.entries[key] = _parse_choice(key, value, number)
            else:
                logger.debug("ignore the key '%s' in line %d", key, number)

    def number(self, key):
        try:
            return self.entries[key]
        except KeyError as error:
            raise MissingKey(key) from error

    def choice(self, key, default=None):
        return self.entries.get(key, default)

    @property
    def measurements(self):
        return build_measurements(*(self.number(key) for key in MEASUREMENT_KEYS))

    @property
    def case_inputs(self):
        xc, zc, pw, pz, bc = (self.number(key) for key in OBSERVATION_KEYS)
        return CaseInputs(
            cc_coords=(xc, zc), mlo_coords=(pw, pz), b_c=bc, H=self.entries.get("H")
        )

    @property
    def extremes(self):
        "MLO images (mlo_L, mlo_R) of the chord ends if the case file provides them."
        values = self._group(EXTREME_KEYS)
        if values[0] is None:
            return None
        mlo_L, mlo_R = convert.to_complex(np.reshape(values, (2, 2)))
        return complex(mlo_L), complex(mlo_R)

    @property
    def calibration(self):
        "Options of the calibrated projector if the case file overrides them."
        values = self._group(CALIBRATION_KEYS)
        if values[0] is None:
            return {}
        x, z, y1, cc1x, cc1z, y2, cc2x, cc2z = values
        return {
            "reference": (x, z),
            "calibration": ((y1, (cc1x, cc1z)), (y2, (cc2x, cc2z))),
        }

    def _group(self, keys):
        present = [key for key in keys if key in self.entries]
        if not present:
            return (None,) * len(keys)
        return tuple(self.number(key) for key in keys)


def _parse_number(key, value, line):
    if _NUMBER.fullmatch(value):
        return float(value)
    if _DECIMAL_COMMA.fullmatch(value):
        message = f"The value '{value}' of '{key}' uses a decimal comma, please use a decimal point."
    else:
        message = f"The value '{value}' of '{key}' is not a number with a decimal point."
    raise ParserError(message, line)


def _parse_choice(key, value, line):
    if value in CHOICES[key]:
        return value
    allowed = ", ".join(CHOICES[key])
    raise ParserError(f"The value '{value}' of '{key}' must be one of {allowed}.", line)
