"""
Utility functions for cycle parsing, periods and worker configuration
"""

import logging
import math
import os
import re
from typing import Dict, Optional, Sequence

import numpy as np

from hus_hill import constants

logger = logging.getLogger("hus_hill.utils")


_NUMBER = re.compile(r"^[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?$")


def minimal_period(values: Sequence[float], tol: float = 0.0) -> int:
    """
    Smallest d dividing len(values) such that values repeat with period d.

    Args:
        values: One full period of a sequence
        tol: Absolute tolerance, scaled by max(1, max |value|)

    Returns:
        The minimal period (len(values) when no proper divisor works)
    """
    arr = np.asarray(values, dtype=float)
    n = arr.size
    bound = tol * max(1.0, float(np.max(np.abs(arr)))) if n else 0.0
    for d in range(1, n):
        if n % d:
            continue
        if np.all(np.abs(arr - np.tile(arr[:d], n // d)) <= bound):
            return d
    return n


def evaluate_expression(text: str, names: Optional[Dict[str, float]] = None) -> float:
    """
    Evaluate a simple product expression such as "2*pi", "-1/h" or "A".

    Factors are separated by '*' or '/'. Each factor is a number, 'pi',
    or a name from `names`, optionally preceded by a sign.

    Args:
        text: Expression to evaluate
        names: Values for named parameters (e.g. {"h": 0.1, "A": 2.0})

    Returns:
        The value of the expression

    Raises:
        ValueError: If a factor is empty, unknown, or a division by zero occurs
    """
    lookup = {"pi": math.pi}
    if names:
        lookup.update(names)

    tokens = re.split(r"([*/])", text.replace(" ", ""))
    if not tokens or tokens == [""]:
        raise ValueError("Empty expression")

    result = 1.0
    operator = "*"
    for i, token in enumerate(tokens):
        if i % 2 == 1:
            operator = token
            continue
        factor = _evaluate_factor(token, lookup)
        if operator == "*":
            result *= factor
        else:
            if factor == 0:
                raise ValueError(f"Division by zero in '{text}'")
            result /= factor
    return result


def _evaluate_factor(token: str, lookup: Dict[str, float]) -> float:
    sign = 1.0
    while token[:1] in ("-", "+"):
        if token[0] == "-":
            sign = -sign
        token = token[1:]
    if not token:
        raise ValueError("Missing factor in expression")
    if _NUMBER.match(token):
        return sign * float(token)
    if token in lookup:
        return sign * float(lookup[token])
    raise ValueError(f"Unknown name '{token}' in expression")


def worker_count(requested: Optional[int] = None) -> int:
    """
    Number of worker threads, capped by HUS_HILL_THREADS when set.

    Args:
        requested: Explicit worker count, used when given

    Returns:
        A positive worker count
    """
    workers = requested or min(constants.DEFAULT_MAX_WORKERS, os.cpu_count() or 1)
    cap = os.environ.get(constants.THREADS_ENV, "").strip()
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            logger.warning(f"Ignoring {constants.THREADS_ENV}={cap!r}: expected an integer")
    return max(1, workers)
