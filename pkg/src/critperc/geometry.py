"""Partition of Lambda_n into blocks, annuli and corridors, and the (x, eps, N) search.

Blocks ``B[i, j] = Lambda_s + (2is, 2js)`` carry three nested annuli of width
``t``: ``A_I`` (outermost), ``A_II`` (holds the skeleton circuit) and
``A_III`` (holds the decoupling dual circuit). Corridor ``H[i, j]`` joins
the annuli of ``B[i, j]`` and ``B[i+1, j]``; ``V[i, j]`` joins ``B[i, j]`` and
``B[i, j+1]``.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple

import numpy as np

from .lattice import Region

__all__ = [
    "PartitionSpec",
    "BlockRegions",
    "block_regions",
    "PartitionRegions",
    "build_partition",
    "ConstantsConfig",
    "ParameterChoice",
    "InfeasibleParameters",
    "PowerLawPi",
    "TablePi",
    "parse_pi_model",
    "construction_inequalities",
    "choose_parameters",
    "verify_choice",
]


@dataclass(frozen=True)
class PartitionSpec:
    m: int
    s: int
    t: int

    def __post_init__(self):
        for name in ("m", "s", "t"):
            val = getattr(self, name)
            if int(val) != val or val < 1:
                raise ValueError(f"{name} must be a positive integer, got {val}")
        if self.m % 2 == 0:
            raise ValueError(f"m must be odd, got {self.m}")
        if 3 * self.t > self.s:
            raise ValueError(f"t must satisfy t <= s/3, got s={self.s}, t={self.t}")

    @property
    def half(self) -> int:
        return (self.m - 1) // 2

    def indices(self) -> list[tuple[int, int]]:
        r = range(-self.half, self.half + 1)
        return [(i, j) for j in r for i in r]

    def offset(self, i, j) -> tuple[int, int]:
        return 2 * i * self.s, 2 * j * self.s


class BlockRegions(NamedTuple):
    B: Region
    A_I: Region
    A_II: Region
    A_III: Region
    A_prime: Region
    H: Region
    V: Region


@lru_cache(maxsize=4096)
def block_regions(spec: PartitionSpec, i: int, j: int) -> BlockRegions:
    """Regions attached to block (i, j); defined for every integer i, j."""
    s, t = spec.s, spec.t
    c = spec.offset(i, j)
    cx, cy = c
    return BlockRegions(
        B=Region.box(s, c),
        A_I=Region.annulus(s, s - t, c),
        A_II=Region.annulus(s - t, s - 2 * t, c),
        A_III=Region.annulus(s - 2 * t, s - 3 * t, c),
        A_prime=Region.annulus(s, s - 3 * t, c),
        H=Region.rect(cx + s - 2 * t, cx + s + 2 * t, cy, cy + t),
        V=Region.rect(cx, cx + t, cy + s - 2 * t, cy + s + 2 * t),
    )


@dataclass
class PartitionRegions:
    spec: PartitionSpec
    n: int
    big: Region
    box: Region
    blocks: dict = field(repr=False)
    _Q: Region | None = field(default=None, repr=False)

    def __getitem__(self, ij) -> BlockRegions:
        if ij not in self.blocks:
            return block_regions(self.spec, *ij)
        return self.blocks[ij]

    @property
    def Q(self) -> Region:
        """(Lambda_n minus Lambda_ms) together with every A'."""
        if self._Q is None:
            mask = self.box.mask & ~self.big.mask_in(self.box.x0, self.box.y0, *self.box.shape)
            for blk in self.blocks.values():
                mask |= blk.A_prime.mask_in(self.box.x0, self.box.y0, *self.box.shape)
            self._Q = Region("sites", (), self.box.x0, self.box.y0, mask)
        return self._Q


def build_partition(spec: PartitionSpec, n: int) -> PartitionRegions:
    ms = spec.m * spec.s
    if ms > n:
        raise ValueError(f"partition needs m*s <= n, got m*s={ms} > n={n}")
    blocks = {ij: block_regions(spec, *ij) for ij in spec.indices()}
    return PartitionRegions(spec, n, Region.box(ms), Region.box(n), blocks)


# -- constants and the parameter search -----------------------------------


@dataclass(frozen=True)
class ConstantsConfig:
    a: float
    b: float
    C10: float = 1.0
    C15: float = 1.0
    C17: float = 1.0
    C18: float = 1.0

    def __post_init__(self):
        for name in ("a", "C10", "C15", "C17", "C18"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.a < self.b:
            raise ValueError(f"need a < b, got a={self.a}, b={self.b}")


@dataclass(frozen=True)
class ParameterChoice:
    x: float
    eps: float
    N: int

    @property
    def inv_x(self) -> int:
        return round(1 / self.x)

    def partition_spec(self, n: int) -> PartitionSpec:
        s = math.floor(self.x * n + 1e-12)
        return PartitionSpec(self.inv_x, s, math.floor(self.eps * s))


class InfeasibleParameters(ValueError):
    """No grid point satisfies the construction inequalities."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


class PowerLawPi:
    """pi(n) = min(1, amplitude * n^-exponent), pi(0) = 1."""

    def __init__(self, exponent: float, amplitude: float = 1.0):
        if not 0 <= exponent < 1:
            raise ValueError(f"one-arm model needs an exponent in [0, 1), got {exponent}")
        if amplitude <= 0:
            raise ValueError("amplitude must be positive")
        self.exponent = float(exponent)
        self.amplitude = float(amplitude)

    def __call__(self, n):
        n = np.asarray(n, dtype=float)
        with np.errstate(divide="ignore"):
            val = self.amplitude * np.where(n > 0, n, 1.0) ** -self.exponent
        return np.where(n > 0, np.minimum(val, 1.0), 1.0)

    def __repr__(self):
        return f"PowerLawPi(exponent={self.exponent}, amplitude={self.amplitude})"


class TablePi:
    """Tabulated pi with log-log interpolation and power-law extrapolation."""

    def __init__(self, table: dict):
        items = sorted((int(k), float(v)) for k, v in table.items() if int(k) >= 1)
        if len(items) < 2:
            raise ValueError("a pi table needs at least two sizes n >= 1")
        ns = np.array([k for k, _ in items], float)
        vals = np.array([v for _, v in items])
        if (vals <= 0).any():
            raise ValueError("pi table values must be positive")
        if (np.diff(vals) > 0).any():
            raise ValueError("pi table must be non-increasing")
        self.log_n = np.log(ns)
        self.log_pi = np.log(vals)
        slope, intercept = np.polyfit(self.log_n, self.log_pi, 1)
        self.exponent = -slope
        if not self.exponent < 1:
            raise ValueError(f"fitted one-arm exponent {self.exponent:.3f} is not below 1")
        self.tail = PowerLawPi(max(self.exponent, 0.0), math.exp(intercept))
        self._last = vals[-1]

    def __call__(self, n):
        n = np.asarray(n, dtype=float)
        safe = np.maximum(n, 1.0)
        inside = np.exp(np.interp(np.log(safe), self.log_n, self.log_pi))
        # continue from the last tabulated value with the fitted slope
        beyond = self._last * (safe / math.exp(self.log_n[-1])) ** -self.tail.exponent
        out = np.where(safe > math.exp(self.log_n[-1]), beyond, inside)
        return np.where(n > 0, np.minimum(out, 1.0), 1.0)


def parse_pi_model(text: str) -> Callable:
    """``power:<exponent>[:<amplitude>]``, ``const`` or ``table:<n>=<pi>,...``."""
    kind, _, rest = text.partition(":")
    if kind == "power":
        parts = rest.split(":")
        return PowerLawPi(float(parts[0]), float(parts[1]) if len(parts) > 1 else 1.0)
    if kind == "const":
        return PowerLawPi(0.0)
    if kind == "table":
        table = dict(item.split("=") for item in rest.split(","))
        return TablePi(table)
    raise ValueError(f"unknown pi model {text!r}")


INEQUALITY_NAMES = ("lower-size", "upper-size", "width", "t>=1", "overhang")


def construction_inequalities(x, eps, n, constants: ConstantsConfig, pi_model):
    """Boolean arrays (one per condition, over ``n``) of the construction lemma.

    ``lower-size``  C17 s^2 pi(s) / x^2 >= a n^2 pi(n)
    ``upper-size``  C18 s^2 pi(s) <= (b - a)/3 n^2 pi(n)
    ``width``       max(4 C10, C15) t s pi(t) / x^2 <= (b - a)/3 n^2 pi(n)
    ``t>=1``        the corridor width t is at least 1
    ``overhang``    n - s/x <= t
    with s = floor(x n) and t = floor(eps s).
    """
    n = np.asarray(n, dtype=np.int64)
    inv_x = round(1 / x)
    s = n // inv_x
    t = np.floor(eps * s + 1e-12).astype(np.int64)
    pn = pi_model(n)
    ps = pi_model(s)
    pt = pi_model(t)
    a, b = constants.a, constants.b
    third = (b - a) / 3
    target = n.astype(float) ** 2 * pn
    return {
        "lower-size": constants.C17 * s.astype(float) ** 2 * ps * inv_x**2 >= a * target,
        "upper-size": constants.C18 * s.astype(float) ** 2 * ps <= third * target,
        "width": max(4 * constants.C10, constants.C15) * inv_x**2 * t * s * pt <= third * target,
        "t>=1": t >= 1,
        "overhang": n - inv_x * s <= t,
    }


def _threshold(ok: np.ndarray, ns: np.ndarray):
    """Smallest N in ns with ok true for every n >= N, or None."""
    if not ok[-1]:
        return None
    bad = np.nonzero(~ok)[0]
    return int(ns[0] if len(bad) == 0 else ns[bad[-1] + 1])


def choose_parameters(
    constants: ConstantsConfig,
    pi_model,
    n_range: Iterable[int] = range(1, 4097),
    inv_x_grid: Iterable[int] = range(3, 32, 2),
    eps_exponents: Iterable[int] = range(4, 21),
) -> ParameterChoice:
    """Grid search for (x, eps, N) with every condition holding for n >= N.

    Candidates are odd 1/x and eps = 2^-k (k >= 4, so eps < 1/12). The
    candidate with the smallest N wins; ties prefer larger x, then larger eps.
    """
    ns = np.array(sorted(set(int(n) for n in n_range)), dtype=np.int64)
    if len(ns) == 0 or ns[0] < 1:
        raise ValueError("n_range must be a nonempty set of positive integers")
    best = None
    closest = None
    for inv_x in inv_x_grid:
        if inv_x % 2 == 0 or inv_x < 1:
            raise ValueError(f"1/x must be an odd positive integer, got {inv_x}")
        for k in eps_exponents:
            eps = 2.0**-k
            if not eps < 1 / 12:
                continue
            checks = construction_inequalities(1 / inv_x, eps, ns, constants, pi_model)
            ok = np.logical_and.reduce(list(checks.values()))
            N = _threshold(ok, ns)
            if N is not None:
                key = (N, inv_x, k)
                if best is None or key < best[0]:
                    best = (key, ParameterChoice(1 / inv_x, eps, N))
            else:
                failing = [name for name in INEQUALITY_NAMES if not checks[name][-1]]
                if closest is None or len(failing) < len(closest[1]):
                    closest = ((inv_x, eps), failing)
    if best is None:
        (inv_x, eps), failing = closest
        report = {"inv_x": inv_x, "eps": eps, "n": int(ns[-1]), "violated": failing}
        raise InfeasibleParameters(
            f"no feasible (x, eps) on the grid; closest candidate 1/x={inv_x}, eps={eps} "
            f"violates {failing[0]} at n={int(ns[-1])}",
            report,
        )
    return best[1]


def verify_choice(choice: ParameterChoice, constants: ConstantsConfig, pi_model, ns) -> list:
    """Every (n, condition) pair violated for n >= N; empty when the choice is valid."""
    ns = np.array([n for n in ns if n >= choice.N], dtype=np.int64)
    if len(ns) == 0:
        return []
    checks = construction_inequalities(choice.x, choice.eps, ns, constants, pi_model)
    return [(int(n), name) for name in INEQUALITY_NAMES for n in ns[~checks[name]]]
