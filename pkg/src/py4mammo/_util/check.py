# Copyright © py4mammo developers,
# Licensed under the Apache License 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
import inspect
import math
import numbers

from py4mammo import exception


def raise_error_if_not_number(value, field):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        message = f"expected a real number but got {value!r}."
        raise exception.ValidationError(field, message)
    if not math.isfinite(value):
        raise exception.ValidationError(field, f"expected a finite value, got {value}.")


def raise_error_if_not_positive(value, field):
    raise_error_if_not_number(value, field)
    if value <= 0:
        message = f"must be strictly positive but is {value}."
        raise exception.ValidationError(field, message)


def raise_error_if_outside(value, field, lower, upper, *, closed_upper=True):
    raise_error_if_not_number(value, field)
    above = value > upper if closed_upper else value >= upper
    if value < lower or above:
        bracket = "]" if closed_upper else "["
        message = f"must lie in [{lower}, {upper}{bracket} but is {value}."
        raise exception.ValidationError(field, message)


def raise_error_if_not_callable(function, *args, **kwargs):
    signature = inspect.signature(function)
    try:
        signature.bind(*args, **kwargs)
    except TypeError as error:
        message = f"You tried to call {function.__name__}, but the arguments are incorrect! Please double check your input."
        raise exception.IncorrectUsage(message) from error
