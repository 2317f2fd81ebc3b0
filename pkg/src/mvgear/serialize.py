"""
Deterministic JSON/CSV emission and the portfolio wire format.

Floating-point values are rendered with 17 significant digits so repeated
runs on identical inputs produce byte-identical artifacts.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import InvalidPortfolio
from .solvers import Portfolio, Program


def fmt_float(value: float) -> str:
    value = float(value)
    if math.isnan(value) or math.isinf(value):
        raise InvalidPortfolio(f"non-finite value {value} cannot be serialized")
    return format(value, ".17g")


def dumps(obj) -> str:
    """JSON with fixed float formatting; dict order is preserved."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items())
        return "{" + items + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def csv_lines(header: list[str], rows) -> str:
    """CSV text with 17-significant-digit floats and newline terminators."""
    out = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, bool):
                cells.append("1" if cell else "0")
            elif isinstance(cell, (float, np.floating)):
                cells.append(fmt_float(cell))
            else:
                cells.append(str(cell))
        out.append(",".join(cells))
    return "\n".join(out) + "\n"


def portfolio_to_dict(portfolio: Portfolio) -> dict:
    """Wire form: program, params, assets, weights, gearing, leverage, alpha_p, sigma_p."""
    params = {k: portfolio.params[k] for k in sorted(portfolio.params)}
    return {
        "program": portfolio.program.value,
        "params": params,
        "assets": list(portfolio.assets) if portfolio.assets is not None else None,
        "weights": [float(w) for w in portfolio.weights],
        "gearing": portfolio.gearing,
        "leverage": portfolio.leverage,
        "alpha_p": portfolio.alpha_p,
        "sigma_p": portfolio.sigma_p,
    }


def portfolio_from_dict(data: dict) -> Portfolio:
    try:
        weights = np.asarray(data["weights"], dtype=float)
        program = Program(data["program"])
        params = dict(data.get("params") or {})
    except (KeyError, ValueError) as exc:
        raise InvalidPortfolio(f"malformed portfolio record: {exc}") from exc
    assets = data.get("assets")
    return Portfolio(
        weights=weights,
        program=program,
        params=params,
        gearing=float(data.get("gearing", weights.sum())),
        leverage=float(data.get("leverage", np.abs(weights).sum())),
        alpha_p=None if data.get("alpha_p") is None else float(data["alpha_p"]),
        sigma_p=None if data.get("sigma_p") is None else float(data["sigma_p"]),
        assets=tuple(assets) if assets is not None else None,
    )


def load_portfolio_json(path) -> Portfolio:
    with open(path, "r", encoding="utf-8") as handle:
        return portfolio_from_dict(json.load(handle))
