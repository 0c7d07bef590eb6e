"""Flat key=value experiment configuration.

Syntax: one ``key = value`` per line, ``#`` starts a comment.  Unknown
keys are rejected.  The ``orders`` value lists per-order rate pairs as
``m:a,b`` separated by semicolons, e.g. ``orders = 2:80,2;3:40,2``.

Keys by command (required unless a default is shown):

    common      n, k, orders, nu (0.75), seed (0)
    snr         nothing extra
    sample      labels (true), colors (false)
    detect      input (path, optional; sample inline when absent)
    experiment  ladder (e.g. 10,20,40,80), base_b, ladder_order (2),
                trials (1)
    conclab     sizes (e.g. 500,1000), tau (20 * max order), trials (1)
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import ModelParams

__all__ = ["ExperimentConfig", "parse_config", "CONFIG_KEYS"]

_COMMON = {"n", "k", "orders", "nu", "seed"}

CONFIG_KEYS = {
    "snr": _COMMON,
    "sample": _COMMON | {"labels", "colors"},
    "detect": _COMMON | {"input"},
    "experiment": _COMMON | {"ladder", "base_b", "ladder_order", "trials"},
    "conclab": _COMMON | {"sizes", "tau", "trials"},
}


@dataclass
class ExperimentConfig:
    """Validated configuration for one CLI command."""

    command: str
    n: int
    k: int
    orders: dict[int, tuple[float, float]]
    nu: float = 0.75
    seed: int = 0
    labels: bool = True
    colors: bool = False
    input: str | None = None
    ladder: tuple[float, ...] = ()
    base_b: float = 0.0
    ladder_order: int = 2
    trials: int = 1
    sizes: tuple[int, ...] = ()
    tau: float | None = None

    def model_params(self, n: int | None = None) -> ModelParams:
        return ModelParams(n if n is not None else self.n, self.k, dict(self.orders))

    def resolved_tau(self) -> float:
        if self.tau is not None:
            return self.tau
        return 20.0 * max(self.orders)


def _parse_orders(value: str) -> dict[int, tuple[float, float]]:
    orders = {}
    for part in value.split(";"):
        part = part.strip()
        if not part:
            continue
        m_s, rates = part.split(":")
        a_s, b_s = rates.split(",")
        m = int(m_s)
        if m in orders:
            raise ValueError(f"duplicate order {m} in orders")
        orders[m] = (float(a_s), float(b_s))
    if not orders:
        raise ValueError("orders must list at least one m:a,b entry")
    return orders


def _parse_bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("true", "1", "yes"):
        return True
    if v in ("false", "0", "no"):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


def parse_config(text: str, command: str) -> ExperimentConfig:
    """Parse and validate the config text for the given command."""
    if command not in CONFIG_KEYS:
        raise ValueError(f"unknown command {command!r}")
    allowed = CONFIG_KEYS[command]
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in allowed:
            raise ValueError(f"line {lineno}: unknown key {key!r} for command {command}")
        if key in values:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        values[key] = val

    for req in ("n", "k", "orders"):
        if req not in values:
            raise ValueError(f"missing required key {req!r}")

    cfg = ExperimentConfig(
        command=command,
        n=int(values["n"]),
        k=int(values["k"]),
        orders=_parse_orders(values["orders"]),
        nu=float(values.get("nu", "0.75")),
        seed=int(values.get("seed", "0")),
    )
    if not 0.5 < cfg.nu < 1.0:
        raise ValueError(f"nu must lie in (0.5, 1), got {cfg.nu}")
    if cfg.seed < 0 or cfg.seed >= 2**64:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    if "labels" in values:
        cfg.labels = _parse_bool(values["labels"])
    if "colors" in values:
        cfg.colors = _parse_bool(values["colors"])
    if "input" in values:
        cfg.input = values["input"]
    if "ladder" in values:
        cfg.ladder = tuple(float(t) for t in values["ladder"].split(","))
    if "base_b" in values:
        cfg.base_b = float(values["base_b"])
    if "ladder_order" in values:
        cfg.ladder_order = int(values["ladder_order"])
    if "trials" in values:
        cfg.trials = int(values["trials"])
        if cfg.trials < 1:
            raise ValueError("trials must be at least 1")
    if "sizes" in values:
        cfg.sizes = tuple(int(t) for t in values["sizes"].split(","))
    if "tau" in values:
        cfg.tau = float(values["tau"])
        if cfg.tau < 0:
            raise ValueError("tau must be nonnegative")

    if command == "experiment" and not cfg.ladder:
        raise ValueError("experiment needs a ladder of rate gaps")
    # validate model preconditions up front
    cfg.model_params()
    return cfg
