"""Black-box benchmark systems, output partitions and the trajectory sampler.

Three built-in dynamics are provided:

* ``AffineSystem``    -- x_{k+1} = A (x_k - x_eq) on an axis-aligned box
* ``Hybrid1d``        -- the contractive 1-D hybrid map with reset window
                         (1/2 x on (lam, 1], 1/2 x + 1/2 on [0, lam])
* ``Gridworld``       -- a continuous-space agent on [0, size]^2 steered by a
                         tabular policy trained on the unit grid

Everything observable is an output symbol: partitions map states to symbols
and return the reserved dagger symbol outside the domain.  Sampling draws
i.i.d. initial states; each trajectory's randomness is derived from
``(seed, trace_index)`` so results do not depend on evaluation order.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .core import (
    DAGGER_NAME,
    Alphabet,
    Provenance,
    Trace,
    TraceSet,
)


@dataclass(frozen=True)
class Box:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.lo) != len(self.hi) or any(a > b for a, b in zip(self.lo, self.hi)):
            raise ValueError("box bounds must satisfy lo <= hi componentwise")

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains(self, x: Sequence[float]) -> bool:
        return all(a <= v <= b for v, a, b in zip(x, self.lo, self.hi))


# ---------------------------------------------------------------------------
# Systems


@dataclass(frozen=True)
class AffineSystem:
    """x_{k+1} = A (x_k - x_eq); A must be full rank."""

    a: tuple[tuple[float, ...], ...]
    x_eq: tuple[float, ...]
    domain: Box
    name: str = "affine"

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("A must be square")
        if abs(np.linalg.det(a)) < 1e-14:
            raise ValueError("A must be full rank")
        if len(self.x_eq) != a.shape[0]:
            raise ValueError("x_eq dimension mismatch")

    def step(self, x: Sequence[float]) -> tuple[float, ...]:
        a = np.asarray(self.a, dtype=float)
        xv = np.asarray(x, dtype=float)
        if xv.shape != (a.shape[0],):
            raise ValueError("state dimension mismatch")
        return tuple(a @ (xv - np.asarray(self.x_eq)))


@dataclass(frozen=True)
class Hybrid1d:
    """Contractive 1-D hybrid map: halve above lam, halve-and-reset below."""

    lam: float
    name: str = "hybrid1d"

    def __post_init__(self) -> None:
        if not (0.0 < self.lam < 2.0**-4):
            raise ValueError("hybrid1d requires 0 < lam < 2^-4")

    @property
    def domain(self) -> Box:
        return Box((0.0,), (1.0,))

    def step(self, x: Sequence[float]) -> tuple[float, ...]:
        if np.shape(x) != (1,):
            raise ValueError("state dimension mismatch")
        v = float(x[0])
        if v > self.lam:
            return (0.5 * v,)
        return (0.5 * v + 0.5,)


Cell = tuple[int, int]
# action ids: 0 up, 1 down, 2 left, 3 right
ACTION_NAMES = ("up", "down", "left", "right")
ACTION_VECTORS = ((0.0, 1.0), (0.0, -1.0), (-1.0, 0.0), (1.0, 0.0))


@dataclass(frozen=True)
class Policy:
    """Greedy tabular policy over grid cells, with its Q-table."""

    size: int
    q: tuple[float, ...]  # flattened (size*size*4,), row-major (i, j, action)
    valid: frozenset[Cell]  # cells holding a trained action (non-obstacle, non-target)

    def q_value(self, cell: Cell, action: int) -> float:
        i, j = cell
        return self.q[(i * self.size + j) * 4 + action]

    def greedy_action(self, cell: Cell) -> int:
        if cell not in self.valid:
            raise KeyError(f"no trained action for cell {cell}")
        base = (cell[0] * self.size + cell[1]) * 4
        row = self.q[base : base + 4]
        return max(range(4), key=lambda a: (row[a], -a))

    def action_vector(self, cell: Cell) -> tuple[float, float]:
        return ACTION_VECTORS[self.greedy_action(cell)]


@dataclass(frozen=True)
class Gridworld:
    """Continuous-space path-planning benchmark on [0, size]^2.

    The unit cell (i, j) spans [i, i+1) x [j, j+1); the policy is trained on
    cells and blended between cell centres for continuous positions.  Target
    and obstacle cells are absorbing: once the position falls in one, it
    stays there (the verified property is reach-and-stay).
    """

    size: int
    obstacles: frozenset[Cell]
    targets: frozenset[Cell]
    policy: Optional[Policy] = None
    name: str = "gridworld"

    def __post_init__(self) -> None:
        if not self.targets:
            raise ValueError("gridworld needs at least one target cell")
        if self.obstacles & self.targets:
            raise ValueError("obstacle and target cells overlap")

    @property
    def domain(self) -> Box:
        s = float(self.size)
        return Box((0.0, 0.0), (s, s))

    def cell_of(self, x: Sequence[float]) -> Cell:
        return (
            min(int(x[0]), self.size - 1),
            min(int(x[1]), self.size - 1),
        )

    def white_cells(self) -> list[Cell]:
        return [
            (i, j)
            for i in range(self.size)
            for j in range(self.size)
            if (i, j) not in self.obstacles and (i, j) not in self.targets
        ]

    def with_policy(self, policy: Policy) -> "Gridworld":
        return Gridworld(self.size, self.obstacles, self.targets, policy, self.name)

    def step(self, x: Sequence[float]) -> tuple[float, ...]:
        if self.policy is None:
            raise ValueError("gridworld has no trained policy")
        if np.shape(x) != (2,):
            raise ValueError("state dimension mismatch")
        px, py = float(x[0]), float(x[1])
        if self.cell_of((px, py)) in self.targets | self.obstacles:
            return (px, py)  # absorbing
        dx, dy = continuous_action(self, self.policy, (px, py))
        norm = math.hypot(dx, dy)
        if norm < 1e-12:
            return (px, py)
        nx = min(max(px + dx / norm, 0.0), float(self.size))
        ny = min(max(py + dy / norm, 0.0), float(self.size))
        return (nx, ny)


SystemSpec = Union[AffineSystem, Hybrid1d, Gridworld]


def step(system: SystemSpec, x: Sequence[float]) -> tuple[float, ...]:
    """One step of the (deterministic) flow."""
    return system.step(x)


def continuous_action(
    grid: Gridworld, policy: Policy, x: Sequence[float]
) -> tuple[float, float]:
    """Blend greedy grid actions over the cell centres within distance 1.

    Weights are (1 - d)/sum(1 - d'); centres without a trained action
    (obstacle and target cells) are skipped.  On a unit grid the centre of
    the cell containing x is always within distance 1, so the sum is never
    empty for positions in trained cells.
    """
    px, py = float(x[0]), float(x[1])
    ci, cj = int(px - 0.5), int(py - 0.5)
    sx = sy = sw = 0.0
    for a in (ci, ci + 1):
        if not 0 <= a < grid.size:
            continue
        for b in (cj, cj + 1):
            if not 0 <= b < grid.size:
                continue
            if (a, b) not in policy.valid:
                continue
            d = math.hypot(px - a - 0.5, py - b - 0.5)
            if d < 1.0:
                w = 1.0 - d
                ax, ay = policy.action_vector((a, b))
                sx += w * ax
                sy += w * ay
                sw += w
    if sw == 0.0:
        raise AssertionError("no trained grid point within distance 1")
    return (sx / sw, sy / sw)


# ---------------------------------------------------------------------------
# Partitions


@dataclass(frozen=True)
class Thresholds1d:
    """1-D partition [lo, b1], (b1, b2], ..., (bm, hi].

    The lowest cell is closed on both ends; every other cell is half-open
    (lo, hi].  States outside [lo, hi] map to the dagger.
    """

    lo: float
    hi: float
    breakpoints: tuple[float, ...]
    labels: tuple[str, ...]
    alphabet: Alphabet = field(compare=False)

    @classmethod
    def build(
        cls,
        lo: float,
        hi: float,
        breakpoints: Sequence[float],
        labels: Sequence[str],
        alphabet_order: Optional[Sequence[str]] = None,
    ) -> "Thresholds1d":
        bp = tuple(float(b) for b in breakpoints)
        if list(bp) != sorted(set(bp)) or (bp and not (lo < bp[0] and bp[-1] < hi)):
            raise ValueError("breakpoints must be strictly increasing inside (lo, hi)")
        if len(labels) != len(bp) + 1:
            raise ValueError("need exactly one label per cell")
        alphabet = Alphabet(alphabet_order if alphabet_order is not None else labels)
        for lab in labels:
            alphabet.intern(lab)
        alphabet.intern(DAGGER_NAME)
        return cls(float(lo), float(hi), bp, tuple(labels), alphabet)

    def output(self, x: Sequence[float]) -> int:
        v = float(x[0])
        if not (self.lo <= v <= self.hi):
            return self.alphabet.dagger_id  # type: ignore[return-value]
        return self.alphabet.id(self.labels[bisect_left(self.breakpoints, v)])


@dataclass(frozen=True)
class UniformGrid:
    """Uniform grid partition of a box; cells named ``c<i0>_<i1>...``.

    Cells are half-open boxes closed on the minimal face, except the cells
    touching the box maximum, which are closed there so the grid covers the
    domain exactly.
    """

    box: Box
    cells_per_axis: tuple[int, ...]
    alphabet: Alphabet = field(compare=False)

    @classmethod
    def build(cls, box: Box, cells_per_axis: Sequence[int]) -> "UniformGrid":
        cpa = tuple(int(c) for c in cells_per_axis)
        if len(cpa) != box.dim or any(c < 1 for c in cpa):
            raise ValueError("need one positive cell count per axis")
        alphabet = Alphabet()
        for idx in np.ndindex(*cpa):
            alphabet.intern("c" + "_".join(str(i) for i in idx))
        alphabet.intern(DAGGER_NAME)
        return cls(box, cpa, alphabet)

    def cell_index(self, x: Sequence[float]) -> Optional[tuple[int, ...]]:
        idx = []
        for v, lo, hi, n in zip(x, self.box.lo, self.box.hi, self.cells_per_axis):
            if not (lo <= v <= hi):
                return None
            idx.append(min(int((v - lo) / ((hi - lo) / n)), n - 1))
        return tuple(idx)

    def cell_bounds(self, index: Sequence[int]) -> tuple[tuple[float, ...], tuple[float, ...]]:
        lo, hi = [], []
        for i, a, b, n in zip(index, self.box.lo, self.box.hi, self.cells_per_axis):
            w = (b - a) / n
            lo.append(a + i * w)
            hi.append(a + (i + 1) * w)
        return tuple(lo), tuple(hi)

    def output(self, x: Sequence[float]) -> int:
        idx = self.cell_index(x)
        if idx is None:
            return self.alphabet.dagger_id  # type: ignore[return-value]
        return self.alphabet.id("c" + "_".join(str(i) for i in idx))


@dataclass(frozen=True)
class RegionLabels:
    """W/R/G labelling of the gridworld cells (white, obstacle, target)."""

    size: int
    obstacles: frozenset[Cell]
    targets: frozenset[Cell]
    alphabet: Alphabet = field(compare=False)

    @classmethod
    def build(cls, grid: Gridworld) -> "RegionLabels":
        alphabet = Alphabet(("W", "R", "G"))
        alphabet.intern(DAGGER_NAME)
        return cls(grid.size, grid.obstacles, grid.targets, alphabet)

    def output(self, x: Sequence[float]) -> int:
        px, py = float(x[0]), float(x[1])
        if not (0.0 <= px <= self.size and 0.0 <= py <= self.size):
            return self.alphabet.dagger_id  # type: ignore[return-value]
        cell = (min(int(px), self.size - 1), min(int(py), self.size - 1))
        if cell in self.targets:
            return self.alphabet.id("G")
        if cell in self.obstacles:
            return self.alphabet.id("R")
        return self.alphabet.id("W")


PartitionSpec = Union[Thresholds1d, UniformGrid, RegionLabels]


def output(partition: PartitionSpec, x: Sequence[float]) -> int:
    """Symbol of the unique cell containing ``x``; dagger outside the domain."""
    return partition.output(x)


# ---------------------------------------------------------------------------
# Initial-state distribution and sampling


@dataclass(frozen=True)
class UniformBox:
    """Uniform distribution over a box.

    ``within_labels`` restricts the support to the sub-region carrying those
    output labels (rejection sampling); the path-planning benchmark starts
    uniformly over the white area this way.
    """

    box: Box
    within_labels: Optional[tuple[str, ...]] = None

    def sample(
        self, rng: np.random.Generator, partition: Optional[PartitionSpec] = None
    ) -> tuple[float, ...]:
        lo = np.asarray(self.box.lo)
        hi = np.asarray(self.box.hi)
        if self.within_labels is None:
            return tuple(lo + (hi - lo) * rng.random(len(lo)))
        if partition is None:
            raise ValueError("label-restricted sampling needs the partition")
        wanted = {partition.alphabet.id(name) for name in self.within_labels}
        while True:
            x = tuple(lo + (hi - lo) * rng.random(len(lo)))
            if partition.output(x) in wanted:
                return x


InitialDistribution = UniformBox


def simulate(
    system: SystemSpec, partition: PartitionSpec, x0: Sequence[float], horizon: int
) -> Trace:
    """Output trace of length ``horizon`` from ``x0``.

    Once the dagger appears the flow is no longer applied and the remaining
    outputs are dagger (the out-of-domain symbol is absorbing).
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    alphabet = partition.alphabet
    dag = alphabet.dagger_id
    symbols: list[int] = []
    x = tuple(float(v) for v in x0)
    for k in range(horizon):
        y = partition.output(x)
        symbols.append(y)
        if y == dag:
            symbols.extend([y] * (horizon - k - 1))
            break
        if k < horizon - 1:
            x = system.step(x)
    return Trace.checked(symbols, alphabet)


def _trace_rng(seed: int, index: int) -> np.random.Generator:
    # per-trace stream: deterministic in (seed, index), independent of order
    return np.random.default_rng((seed, index))


def sample_traces(
    system: SystemSpec,
    partition: PartitionSpec,
    dist: InitialDistribution,
    n: int,
    horizon: int,
    seed: int,
    threads: int = 1,
) -> TraceSet:
    """N i.i.d. trajectories of length ``horizon``.

    The i-th trajectory draws its initial state from a generator keyed by
    ``(seed, i)``, so the result is reproducible and identical under any
    thread count.
    """
    if n < 1 or horizon < 1:
        raise ValueError("need n >= 1 and horizon >= 1")

    def one(i: int) -> Trace:
        x0 = dist.sample(_trace_rng(seed, i), partition)
        return simulate(system, partition, x0, horizon)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            traces = tuple(pool.map(one, range(n)))
    else:
        traces = tuple(one(i) for i in range(n))
    return TraceSet(
        traces=traces,
        alphabet=partition.alphabet,
        horizon=horizon,
        provenance=Provenance(seed=seed, system=system.name),
    )


# ---------------------------------------------------------------------------
# Q-learning for the path-planning benchmark


def train_gridworld_policy(
    grid: Gridworld,
    episodes: int = 100_000,
    alpha: float = 0.2,
    gamma: float = 0.95,
    epsilon: float = 0.1,
    max_steps: int = 40,
    seed: int = 0,
) -> Policy:
    """Tabular Q-learning with epsilon-greedy exploration.

    Reward: +1 on entering a target cell (terminal), -1 on entering an
    obstacle or attempting to leave the grid (terminal), 0 otherwise.
    Episodes start uniformly over white cells.  Training is single-threaded;
    a fixed seed yields a bit-identical Q-table.
    """
    white = grid.white_cells()
    if not white:
        raise ValueError("gridworld has no white cells to start from")
    size = grid.size
    rng = np.random.default_rng(seed)
    q = [[0.0] * 4 for _ in range(size * size)]

    for _ in range(episodes):
        i, j = white[rng.integers(len(white))]
        for _ in range(max_steps):
            cell = i * size + j
            if rng.random() < epsilon:
                a = int(rng.integers(4))
            else:
                row = q[cell]
                a = 0
                for cand in (1, 2, 3):
                    if row[cand] > row[a]:
                        a = cand
            di, dj = ACTION_VECTORS[a]
            ni, nj = i + int(di), j + int(dj)
            if not (0 <= ni < size and 0 <= nj < size):
                reward, terminal, ni, nj = -1.0, True, i, j
            elif (ni, nj) in grid.obstacles:
                reward, terminal = -1.0, True
            elif (ni, nj) in grid.targets:
                reward, terminal = 1.0, True
            else:
                reward, terminal = 0.0, False
            if terminal:
                target = reward
            else:
                target = reward + gamma * max(q[ni * size + nj])
            q[cell][a] += alpha * (target - q[cell][a])
            if terminal:
                break
            i, j = ni, nj

    flat = tuple(v for row in q for v in row)
    return Policy(size=size, q=flat, valid=frozenset(white))


def policy_success_rate(
    grid: Gridworld,
    policy: Policy,
    rollouts: int = 10_000,
    horizon: int = 40,
    seed: int = 1,
) -> float:
    """Monte-Carlo success rate of the greedy policy on the discrete grid.

    A rollout succeeds when it enters a target cell within ``horizon`` steps
    without hitting an obstacle or the border.
    """
    white = grid.white_cells()
    rng = np.random.default_rng(seed)
    wins = 0
    for _ in range(rollouts):
        i, j = white[rng.integers(len(white))]
        for _ in range(horizon):
            di, dj = policy.action_vector((i, j))
            ni, nj = i + int(di), j + int(dj)
            if not (0 <= ni < grid.size and 0 <= nj < grid.size):
                break
            if (ni, nj) in grid.obstacles:
                break
            if (ni, nj) in grid.targets:
                wins += 1
                break
            i, j = ni, nj
    return wins / rollouts


# ---------------------------------------------------------------------------
# Built-in benchmark factories


def hybrid_benchmark(lam: float = 0.01) -> tuple[Hybrid1d, Thresholds1d, UniformBox]:
    """The 1-D hybrid map with the five dyadic threshold cells y1..y5.

    y1 is the top cell (1/2, 1]; y5 is the bottom cell [0, 1/16].
    """
    system = Hybrid1d(lam=float(lam))
    partition = Thresholds1d.build(
        lo=0.0,
        hi=1.0,
        breakpoints=(2.0**-4, 2.0**-3, 2.0**-2, 2.0**-1),
        labels=("y5", "y4", "y3", "y2", "y1"),
        alphabet_order=("y1", "y2", "y3", "y4", "y5"),
    )
    dist = UniformBox(Box((0.0,), (1.0,)))
    return system, partition, dist


def affine_benchmark() -> tuple[AffineSystem, UniformGrid, UniformBox]:
    """Planar stable rotation A = (1/3) [[1, 2], [-1, 1]] on a 9x9 grid."""
    box = Box((-1.0, -1.0), (1.0, 1.0))
    system = AffineSystem(
        a=((1 / 3, 2 / 3), (-1 / 3, 1 / 3)),
        x_eq=(0.0, 0.0),
        domain=box,
    )
    partition = UniformGrid.build(box, (9, 9))
    dist = UniformBox(box)
    return system, partition, dist


DEFAULT_GRID_OBSTACLES: frozenset[Cell] = frozenset(
    {(5, 0), (5, 1), (5, 2), (3, 7), (3, 8), (3, 9), (8, 5), (9, 5)}
)
DEFAULT_GRID_TARGETS: frozenset[Cell] = frozenset({(7, 7), (7, 8)})


def gridworld_benchmark(
    obstacles: frozenset[Cell] = DEFAULT_GRID_OBSTACLES,
    targets: frozenset[Cell] = DEFAULT_GRID_TARGETS,
) -> tuple[Gridworld, RegionLabels, UniformBox]:
    """10x10 path-planning arena: target box [7,8] x [7,9], walls on borders.

    The returned system has no policy yet; train one and attach it with
    ``with_policy`` before sampling.
    """
    grid = Gridworld(size=10, obstacles=obstacles, targets=targets)
    partition = RegionLabels.build(grid)
    dist = UniformBox(grid.domain, within_labels=("W",))
    return grid, partition, dist
