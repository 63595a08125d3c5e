"""Extending finite-horizon risk bounds to infinite horizon.

Three routes are implemented:

* a measure-contraction profile ``phi(k)`` for stable affine systems, from
  coarse bounds on the spectral norm, the determinant and the geometry of
  the equilibrium cell;
* a structural check for systems admitting a deterministic abstraction at
  the chosen window length (bisimulation route);
* an exact interval-arithmetic oracle for the 1-D hybrid benchmark, which
  computes equivalence classes, their probabilities and the exact Pre-chain
  depth with rational endpoints.
"""

from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional, Sequence, Union

from .abstraction import Slca, is_deterministic, is_non_blocking
from .core import DAGGER_NAME, Alphabet, LSeq


# ---------------------------------------------------------------------------
# Measure-contraction profile for stable affine systems


@dataclass(frozen=True)
class AffineBoundParams:
    """Coarse knowledge about a stable affine map.

    alpha: upper bound on the induced 2-norm of A, in (0, 1).
    rho:   upper bound on |det(A^-1)|, > 1.
    d_min: radius of the largest 2-norm ball around the equilibrium inside
           the equilibrium's output cell.
    d_max: radius of the smallest 2-norm ball around the equilibrium
           containing the whole domain.

    Only bounds are needed: a smaller d_min or larger d_max yields a larger
    (more conservative) settling horizon.
    """

    alpha: float
    rho: float
    d_min: float
    d_max: float

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha < 1.0):
            raise ValueError("alpha must lie in (0, 1)")
        if not self.rho > 1.0:
            raise ValueError("rho must be > 1")
        if not (0.0 < self.d_min <= self.d_max):
            raise ValueError("need 0 < d_min <= d_max")


def kbar(params: AffineBoundParams) -> int:
    """Settling horizon: ceil(log_alpha(d_min / d_max))."""
    return math.ceil(math.log(params.d_min / params.d_max) / math.log(params.alpha))


@dataclass(frozen=True)
class PhiProfile:
    """The bound phi(k) relating k-step and infinite-horizon pre-image mass."""

    rho: float
    k_bar: int
    params: Optional[AffineBoundParams] = None

    def __post_init__(self) -> None:
        if not self.rho > 1.0:
            raise ValueError("rho must be > 1")
        if self.k_bar < 0:
            raise ValueError("k_bar must be >= 0")

    @classmethod
    def from_params(cls, params: AffineBoundParams) -> "PhiProfile":
        return cls(rho=params.rho, k_bar=kbar(params), params=params)


def phi_affine(profile: PhiProfile, k: int) -> float:
    """phi(k) = min((1-rho)/(1-rho^(kbar-k)), rho^(k-kbar)) below kbar, else 1."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k >= profile.k_bar:
        return 1.0
    rho, delta = profile.rho, profile.k_bar - k
    log_pow = delta * math.log(rho)
    if log_pow > 700.0:  # rho^delta overflows; both branches collapse in logs
        branch1 = math.exp(math.log(rho - 1.0) - log_pow)
        branch2 = math.exp(-log_pow)
    else:
        branch1 = (rho - 1.0) / (rho**delta - 1.0)
        branch2 = rho**-delta
    return min(branch1, branch2)


def gamma_bar(epsilon: float, phi_value: float) -> float:
    """Infinite-horizon risk bound epsilon / phi(k), for phi evaluated at k = H - l."""
    if not (0.0 < phi_value <= 1.0):
        raise ValueError("phi_value must lie in (0, 1]")
    return epsilon / phi_value


def inscribed_radius(
    cell_lo: Sequence[float], cell_hi: Sequence[float], x_eq: Sequence[float]
) -> float:
    """Largest 2-norm ball around x_eq inside the axis-aligned cell."""
    r = min(min(x - lo, hi - x) for x, lo, hi in zip(x_eq, cell_lo, cell_hi))
    if r <= 0.0:
        raise ValueError("x_eq must lie strictly inside the cell")
    return r


def circumscribed_radius(
    dom_lo: Sequence[float], dom_hi: Sequence[float], x_eq: Sequence[float]
) -> float:
    """Smallest 2-norm ball around x_eq containing the axis-aligned domain."""
    return math.sqrt(
        sum(max(x - lo, hi - x) ** 2 for x, lo, hi in zip(x_eq, dom_lo, dom_hi))
    )


# ---------------------------------------------------------------------------
# Bisimulation route


class BisimExtension(enum.Enum):
    EXTENDS_BY_HORIZON = "ExtendsByHorizon"
    EXTENDS_BY_DETERMINISM = "ExtendsByDeterminism"
    NOT_ESTABLISHED = "NotEstablished"


def check_bisim_extension(
    slca: Slca, horizon: int, l: int, n_outputs: int
) -> BisimExtension:
    """Structural conditions extending the certificate to infinite horizon.

    Assuming the concrete system admits a deterministic abstraction at
    window length l (an assumption that cannot be verified from data), the
    guarantee extends when either the sampling horizon reaches
    |Y|^(l-1) + l - 1, or the sampled automaton is itself deterministic and
    non-blocking at a shorter horizon.  Extra horizon beyond the bound only
    collects more windows per trajectory, so the first condition uses >=.
    """
    if n_outputs < 1 or l < 1:
        raise ValueError("need n_outputs >= 1 and l >= 1")
    bound = n_outputs ** (l - 1) + l - 1  # exact integer arithmetic
    if horizon >= bound:
        return BisimExtension.EXTENDS_BY_HORIZON
    if l <= horizon and is_deterministic(slca) and is_non_blocking(slca):
        return BisimExtension.EXTENDS_BY_DETERMINISM
    return BisimExtension.NOT_ESTABLISHED


# ---------------------------------------------------------------------------
# Exact rational interval sets

Interval = tuple[Fraction, Fraction, bool, bool]  # lo, hi, lo_closed, hi_closed


class IntervalSet:
    """Finite union of intervals with exact rational endpoints.

    Intervals carry open/closed flags; degenerate single points are kept
    only when closed on both sides.  All operations are exact.
    """

    __slots__ = ("intervals",)

    def __init__(self, intervals: Iterable[Interval] = ()) -> None:
        self.intervals: tuple[Interval, ...] = self._normalize(intervals)

    @staticmethod
    def _normalize(intervals: Iterable[Interval]) -> tuple[Interval, ...]:
        items = [
            iv
            for iv in intervals
            if iv[0] < iv[1] or (iv[0] == iv[1] and iv[2] and iv[3])
        ]
        items.sort(key=lambda iv: (iv[0], not iv[2]))
        out: list[Interval] = []
        for lo, hi, lc, hc in items:
            if out:
                plo, phi, plc, phc = out[-1]
                touches = lo < phi or (lo == phi and (lc or phc))
                if touches:
                    if hi > phi or (hi == phi and hc and not phc):
                        out[-1] = (plo, max(phi, hi), plc, hc if hi > phi else (hc or phc))
                    continue
            out.append((lo, hi, lc, hc))
        return tuple(out)

    @classmethod
    def interval(
        cls,
        lo: Fraction,
        hi: Fraction,
        lo_closed: bool = True,
        hi_closed: bool = True,
    ) -> "IntervalSet":
        return cls(((Fraction(lo), Fraction(hi), lo_closed, hi_closed),))

    @classmethod
    def point(cls, x: Fraction) -> "IntervalSet":
        return cls.interval(x, x, True, True)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, IntervalSet) and self.intervals == other.intervals

    def __hash__(self) -> int:
        return hash(self.intervals)

    def __repr__(self) -> str:
        def b(c: bool, side: str) -> str:
            return ("[" if c else "(") if side == "lo" else ("]" if c else ")")

        return " u ".join(
            f"{b(lc, 'lo')}{lo}, {hi}{b(hc, 'hi')}" for lo, hi, lc, hc in self.intervals
        ) or "{}"

    def measure(self) -> Fraction:
        return sum((hi - lo for lo, hi, _, _ in self.intervals), Fraction(0))

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.intervals + other.intervals)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out: list[Interval] = []
        for a, b, ac, bc in self.intervals:
            for c, d, cc, dc in other.intervals:
                lo, hi = max(a, c), min(b, d)
                if lo > hi:
                    continue
                lc = ac if a > c else cc if c > a else (ac and cc)
                hc = bc if b < d else dc if d < b else (bc and dc)
                if lo < hi or (lo == hi and lc and hc):
                    out.append((lo, hi, lc, hc))
        return IntervalSet(out)

    def affine_image(self, mul: Fraction, add: Fraction) -> "IntervalSet":
        """Image under x -> mul*x + add (mul != 0)."""
        if mul == 0:
            raise ValueError("affine image needs mul != 0")
        out: list[Interval] = []
        for lo, hi, lc, hc in self.intervals:
            a, b = mul * lo + add, mul * hi + add
            if a <= b:
                out.append((a, b, lc, hc))
            else:
                out.append((b, a, hc, lc))
        return IntervalSet(out)


# ---------------------------------------------------------------------------
# Exact oracle for the 1-D hybrid benchmark


def _as_fraction(lam: Union[Fraction, int, str]) -> Fraction:
    if isinstance(lam, float):
        raise ValueError(
            "pass lam as an exact rational (Fraction, int or 'p/q' string); "
            "a float would corrupt the fixpoint detection"
        )
    return Fraction(lam)


@dataclass(frozen=True)
class Hybrid1dGeometry:
    """Exact equivalence-class geometry of the 1-D hybrid benchmark.

    ``classes`` maps each realizable l-sequence (ids into ``alphabet``) to
    the set of initial states producing it; ``k_bar_exact`` is the smallest
    k at which the k-step pre-image mass equals the infinite-horizon mass
    for every union of classes.
    """

    lam: Fraction
    l: int
    alphabet: Alphabet
    classes: dict[LSeq, IntervalSet]
    k_bar_exact: int

    def probabilities(self) -> dict[LSeq, Fraction]:
        return {seq: ivs.measure() for seq, ivs in sorted(self.classes.items())}

    def probability(self, seq: LSeq) -> Fraction:
        ivs = self.classes.get(tuple(seq))
        return ivs.measure() if ivs is not None else Fraction(0)


def _hybrid_partition(lam: Fraction) -> tuple[Alphabet, dict[int, IntervalSet]]:
    alphabet = Alphabet(("y1", "y2", "y3", "y4", "y5"))
    alphabet.intern(DAGGER_NAME)
    cells = {
        alphabet.id("y1"): IntervalSet.interval(Fraction(1, 2), Fraction(1), False, True),
        alphabet.id("y2"): IntervalSet.interval(Fraction(1, 4), Fraction(1, 2), False, True),
        alphabet.id("y3"): IntervalSet.interval(Fraction(1, 8), Fraction(1, 4), False, True),
        alphabet.id("y4"): IntervalSet.interval(Fraction(1, 16), Fraction(1, 8), False, True),
        alphabet.id("y5"): IntervalSet.interval(Fraction(0), Fraction(1, 16), True, True),
    }
    return alphabet, cells


def _hybrid_pre(lam: Fraction):
    """Exact pre-image operator of the hybrid map restricted to [0, 1].

    Branch 1 (halve) maps (lam, 1] onto (lam/2, 1/2]; branch 2 (reset) maps
    [0, lam] onto [1/2, lam/2 + 1/2].  Both branches are affine bijections
    onto their ranges, so the pre-image of an interval set is again an
    interval set with rational endpoints.
    """
    half = Fraction(1, 2)
    range1 = IntervalSet.interval(lam / 2, half, False, True)
    range2 = IntervalSet.interval(half, lam / 2 + half, True, True)

    def pre(s: IntervalSet) -> IntervalSet:
        via1 = s.intersect(range1).affine_image(Fraction(2), Fraction(0))
        via2 = s.intersect(range2).affine_image(Fraction(2), Fraction(-1))
        return via1.union(via2)

    return pre


def _pre_chain_depth(start: IntervalSet, pre) -> int:
    """Smallest k at which the cumulative pre-image mass stops growing.

    Increments of the chain U_{k+1} = U_k u Pre(U_k) are pre-images of the
    previous increments; a zero-measure increment is a finite point set and
    its pre-image stays finite, so the first measure-flat step certifies
    the infinite-horizon limit.
    """
    u = start
    k = 0
    while True:
        nxt = u.union(pre(u))
        if nxt.measure() == u.measure():
            return k
        u = nxt
        k += 1


def hybrid_pre_analysis(lam: Union[Fraction, int, str], l: int) -> Hybrid1dGeometry:
    """Exact equivalence classes, probabilities and Pre-chain depth.

    Supports l in {1, 2}; lam must be a rational in (0, 1/16).  Class
    probabilities are interval lengths under the uniform initial law and
    sum to 1 exactly.
    """
    lam = _as_fraction(lam)
    if not Fraction(0) < lam < Fraction(1, 16):
        raise ValueError("need 0 < lam < 1/16")
    if l not in (1, 2):
        raise ValueError("the exact oracle supports l in {1, 2}")

    alphabet, cells = _hybrid_partition(lam)
    pre = _hybrid_pre(lam)

    classes: dict[LSeq, IntervalSet] = {}
    if l == 1:
        for sym, ivs in cells.items():
            if ivs:
                classes[(sym,)] = ivs
    else:
        for si, ivs_i in cells.items():
            for sj, ivs_j in cells.items():
                cls = ivs_i.intersect(pre(ivs_j))
                if cls:
                    classes[(si, sj)] = cls

    keys = sorted(classes)
    depth = 0
    for r in range(1, len(keys) + 1):
        for combo in combinations(keys, r):
            s = IntervalSet()
            for key in combo:
                s = s.union(classes[key])
            depth = max(depth, _pre_chain_depth(s, pre))
    return Hybrid1dGeometry(
        lam=lam, l=l, alphabet=alphabet, classes=classes, k_bar_exact=depth
    )


def geometry_to_csv(geometry: Hybrid1dGeometry) -> str:
    """Class intervals as CSV with rational numerator/denominator columns."""
    out = io.StringIO()
    out.write("sequence,lo_num,lo_den,lo_closed,hi_num,hi_den,hi_closed\n")
    for seq in sorted(geometry.classes):
        name = geometry.alphabet.format_lseq(seq, sep="")
        for lo, hi, lc, hc in geometry.classes[seq].intervals:
            out.write(
                f"{name},{lo.numerator},{lo.denominator},{int(lc)},"
                f"{hi.numerator},{hi.denominator},{int(hc)}\n"
            )
    return out.getvalue()
