"""Experiment configuration: TOML sections for system, partition,
distribution, certificate parameters, verification queries and the
infinite-horizon strategy.

Where exactness matters (the hybrid map's reset window, threshold
breakpoints) values may be given as "p/q" strings; they are parsed as exact
rationals and only narrowed to float at the simulation boundary.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Union

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .systems import (
    AffineSystem,
    Box,
    Gridworld,
    Hybrid1d,
    InitialDistribution,
    PartitionSpec,
    RegionLabels,
    SystemSpec,
    Thresholds1d,
    UniformBox,
    UniformGrid,
)

ENV_SEED = "LCV_SEED"


def parse_rational(value: Union[str, int, float, Fraction]) -> Fraction:
    """Accept 'p/q' strings, ints and Fractions; floats via exact conversion."""
    if isinstance(value, str):
        return Fraction(value)
    return Fraction(value)


def _as_float(value: Any) -> float:
    if isinstance(value, str):
        return float(Fraction(value))
    return float(value)


@dataclass(frozen=True)
class VerifyQuery:
    kind: str  # "invariance" | "reach_stay"
    bad: tuple[str, ...] = ()
    target: tuple[str, ...] = ()


@dataclass(frozen=True)
class ExperimentConfig:
    raw: dict[str, Any]
    n: int
    horizon: int
    l: int
    beta: float
    seed: int
    system_cfg: dict[str, Any]
    partition_cfg: dict[str, Any]
    distribution_cfg: dict[str, Any]
    queries: tuple[VerifyQuery, ...]
    strategy: str  # none | affine_phi | bisimulation | oracle_1d
    strategy_cfg: dict[str, Any] = field(default_factory=dict)
    empirical_cfg: Optional[dict[str, Any]] = None
    output_cfg: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.l > self.horizon:
            raise ValueError("config requires l <= H")
        if not (0.0 < self.beta < 1.0):
            raise ValueError("beta must lie in (0, 1)")
        known = {"none", "affine_phi", "bisimulation", "oracle_1d"}
        if self.strategy not in known:
            raise ValueError(f"unknown infinite-horizon strategy {self.strategy!r}")
        if self.strategy == "affine_phi":
            missing = {"alpha", "rho", "d_min", "d_max"} - set(self.strategy_cfg)
            if missing:
                raise ValueError(f"affine_phi strategy needs {sorted(missing)}")
        if self.strategy == "oracle_1d" and self.system_cfg.get("variant") != "hybrid1d":
            raise ValueError("the oracle_1d strategy needs the hybrid1d system")


def _parse_queries(section: dict[str, Any]) -> tuple[VerifyQuery, ...]:
    # symbol names are kept as written (DAGGER included); resolution against
    # the automaton alphabet happens at verification time
    queries: list[VerifyQuery] = []
    if "invariance" in section:
        queries.append(VerifyQuery(kind="invariance", bad=tuple(section["invariance"])))
    if "reach_stay" in section:
        spec = section["reach_stay"]
        queries.append(
            VerifyQuery(
                kind="reach_stay",
                target=tuple(spec.get("target", ())),
                bad=tuple(spec.get("bad", ())),
            )
        )
    return tuple(queries)


def config_from_dict(data: dict[str, Any]) -> ExperimentConfig:
    seed = int(data.get("seed", 0))
    env_seed = os.environ.get(ENV_SEED)
    if env_seed is not None:
        seed = int(env_seed)
    inf = data.get("infinite_horizon", {"strategy": "none"})
    strategy_cfg = {k: v for k, v in inf.items() if k != "strategy"}
    return ExperimentConfig(
        raw=data,
        n=int(data["n"]),
        horizon=int(data["horizon"]),
        l=int(data["l"]),
        beta=float(data["beta"]),
        seed=seed,
        system_cfg=dict(data["system"]),
        partition_cfg=dict(data.get("partition", {})),
        distribution_cfg=dict(data.get("distribution", {})),
        queries=_parse_queries(data.get("verify", {})),
        strategy=inf.get("strategy", "none"),
        strategy_cfg=strategy_cfg,
        empirical_cfg=dict(data["empirical"]) if "empirical" in data else None,
        output_cfg=dict(data.get("output", {})),
    )


def load_config(path: str) -> ExperimentConfig:
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    return config_from_dict(data)


def build_environment(
    cfg: ExperimentConfig,
) -> tuple[SystemSpec, PartitionSpec, InitialDistribution]:
    """Instantiate the system, partition and initial distribution.

    A gridworld system is returned untrained; the pipeline attaches the
    policy after training so the (slow) training step stays explicit.
    """
    sys_cfg = cfg.system_cfg
    variant = sys_cfg["variant"]

    if variant == "hybrid1d":
        lam = parse_rational(sys_cfg["lam"])
        system: SystemSpec = Hybrid1d(lam=float(lam))
        part_cfg = cfg.partition_cfg
        if part_cfg.get("variant", "thresholds_1d") != "thresholds_1d":
            raise ValueError("hybrid1d pairs with the thresholds_1d partition")
        partition: PartitionSpec = Thresholds1d.build(
            lo=_as_float(part_cfg.get("lo", 0.0)),
            hi=_as_float(part_cfg.get("hi", 1.0)),
            breakpoints=[_as_float(b) for b in part_cfg["breakpoints"]],
            labels=part_cfg["labels"],
            alphabet_order=part_cfg.get("alphabet"),
        )
    elif variant == "affine":
        a = tuple(tuple(_as_float(v) for v in row) for row in sys_cfg["a"])
        x_eq = tuple(_as_float(v) for v in sys_cfg["x_eq"])
        box = Box(
            tuple(_as_float(v) for v in sys_cfg["domain_lo"]),
            tuple(_as_float(v) for v in sys_cfg["domain_hi"]),
        )
        system = AffineSystem(a=a, x_eq=x_eq, domain=box)
        part_cfg = cfg.partition_cfg
        if part_cfg.get("variant", "uniform_grid") != "uniform_grid":
            raise ValueError("affine pairs with the uniform_grid partition")
        partition = UniformGrid.build(box, part_cfg["cells_per_axis"])
    elif variant == "gridworld":
        size = int(sys_cfg.get("size", 10))
        obstacles = frozenset((int(i), int(j)) for i, j in sys_cfg.get("obstacles", ()))
        targets = frozenset((int(i), int(j)) for i, j in sys_cfg["targets"])
        system = Gridworld(size=size, obstacles=obstacles, targets=targets)
        partition = RegionLabels.build(system)
    else:
        raise ValueError(f"unknown system variant {variant!r}")

    dist_cfg = cfg.distribution_cfg
    if dist_cfg:
        if dist_cfg.get("variant", "uniform_box") != "uniform_box":
            raise ValueError("only the uniform_box distribution is supported")
        within = dist_cfg.get("within_labels")
        dist = UniformBox(
            Box(
                tuple(_as_float(v) for v in dist_cfg["lo"]),
                tuple(_as_float(v) for v in dist_cfg["hi"]),
            ),
            within_labels=tuple(within) if within is not None else None,
        )
    else:
        # default: uniform over the system domain (white area for gridworld)
        if variant == "gridworld":
            dist = UniformBox(system.domain, within_labels=("W",))
        else:
            dist = UniformBox(system.domain)
    if not all(
        a <= lo and hi <= b
        for a, b, lo, hi in zip(system.domain.lo, system.domain.hi, dist.box.lo, dist.box.hi)
    ):
        raise ValueError("initial-distribution box must lie inside the domain")
    return system, partition, dist
