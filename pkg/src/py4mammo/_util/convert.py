# Copyright © py4mammo developers,
# Licensed under the Apache License 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
import numpy as np


def to_complex(array):
    "Interpret the last axis of length 2 as (re, im) pairs, e.g., (w, z) in a view."
    array = np.asarray(array, dtype=np.float64)
    assert array.shape[-1] == 2
    result = np.ascontiguousarray(array).view(np.complex128).reshape(array.shape[:-1])
    return result[()] if result.ndim == 0 else result


def to_pair(value):
    "Split a complex number into its (re, im) pair of floats."
    value = complex(value)
    return value.real, value.imag


def format_length(value):
    return _format_number(value, 4)


def format_angle(value):
    return _format_number(value, 3)


def _format_number(value, digits):
    # "%" formatting ignores the locale; avoid printing -0.0000
    text = "%.*f" % (digits, value)
    if float(text) == 0:
        text = "%.*f" % (digits, 0.0)
    return text


def to_decimal_text(value):
    "Write a float with a decimal point and without exponent, e.g., 5e-05 as 0.00005."
    return np.format_float_positional(float(value), trim="0")
