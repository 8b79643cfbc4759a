import math
from pathlib import Path
from typing import Optional, Union

import numpy as np
from dotenv import dotenv_values


def ceil_sqrt(k: int) -> int:
    """
    Smallest integer s with s * s >= k.

    Args:
        k (int): A positive integer.

    Returns:
        int: ceil(sqrt(k)), computed without floating point.
    """
    s = math.isqrt(k)
    return s if s * s == k else s + 1


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """
    Wilson score interval for a binomial proportion.

    Args:
        successes (int): Number of observed successes.
        trials (int): Number of Bernoulli trials.
        z (float): Normal quantile, 1.96 for a 95% interval.

    Returns:
        tuple[float, float]: Lower and upper bound, (0.0, 1.0) when trials is 0.
    """
    if trials <= 0:
        return 0.0, 1.0
    p = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def log_ratio_interval(
    count_a: int, count_b: int, trials_a: int, trials_b: int, z: float = 1.96
) -> tuple[float, float, float]:
    """
    Point estimate and conservative interval of log(P_a[E] / P_b[E]).

    The interval combines the Wilson bounds of both proportions, so the lower
    bound is log(lo_a / hi_b) and the upper bound log(hi_a / lo_b).

    Returns:
        tuple[float, float, float]: (estimate, lower, upper); infinite values are
        returned when a proportion or bound is zero.
    """
    lo_a, hi_a = wilson_interval(count_a, trials_a, z)
    lo_b, hi_b = wilson_interval(count_b, trials_b, z)
    p_a = count_a / trials_a if trials_a else 0.0
    p_b = count_b / trials_b if trials_b else 0.0
    return _safe_log_ratio(p_a, p_b), _safe_log_ratio(lo_a, hi_b), _safe_log_ratio(hi_a, lo_b)


def _safe_log_ratio(num: float, den: float) -> float:
    if num <= 0.0 and den <= 0.0:
        return 0.0
    if den <= 0.0:
        return math.inf
    if num <= 0.0:
        return -math.inf
    return math.log(num / den)


def fit_exponent(xs: list[float], ys: list[float]) -> Optional[float]:
    """
    Slope of the least-squares line through (log x, log y).

    Returns:
        Optional[float]: The fitted exponent, or None with fewer than two usable points.
    """
    points = [(x, y) for x, y in zip(xs, ys) if x > 0 and y > 0]
    if len(points) < 2 or len({x for x, _ in points}) < 2:
        return None
    log_x = np.log([x for x, _ in points])
    log_y = np.log([y for _, y in points])
    slope, _ = np.polyfit(log_x, log_y, 1)
    return float(slope)


def evenly_spaced_checkpoints(budget: int, count: int) -> frozenset[int]:
    """
    Steps at which error samples are kept: `count` evenly spaced values in 1..budget.
    """
    if budget <= 0 or count <= 0:
        return frozenset()
    if budget <= count:
        return frozenset(range(1, budget + 1))
    return frozenset(max(1, round((i + 1) * budget / count)) for i in range(count))


def parse_number_list(value: Union[str, list, None], cast=int) -> list:
    """
    Parses a comma separated list such as '4,16,64'.

    Args:
        value (Union[str, list, None]): Raw flag value or an already parsed list.
        cast: Element type, int or float.

    Returns:
        list: The parsed values, empty for None or blank input.

    Raises:
        ValueError: If an element cannot be converted.
    """
    if value is None:
        return []
    if isinstance(value, list):
        return [cast(v) for v in value]
    parts = [p.strip() for p in value.split(",")]
    try:
        return [cast(p) for p in parts if p]
    except ValueError as e:
        raise ValueError(f"Invalid list value: '{value}'") from e


def read_key_value_file(path: Union[str, Path]) -> dict[str, str]:
    """
    Reads a flat key=value configuration file.

    Blank lines and '#' comments are ignored; keys are lower-cased and dashes
    become underscores so file keys match flag names.

    Raises:
        FileNotFoundError: If the file does not exist.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Config file not found: {path}")
    raw = dotenv_values(path)
    return {
        key.strip().lower().replace("-", "_"): (value or "").strip()
        for key, value in raw.items()
    }
