"""Geometry of Z^d: lattice models, canonical edges, and region predicates.

Regions are closed descriptions (never materialized vertex lists), so
membership queries cost O(d) even for boxes with 10^11 sites.  Explicit
enumeration is available only for finite regions and is guarded by a size cap.

Boundaries are always measured in the nearest-neighbor graph, even under the
spread-out model: the spread-out range changes which edges can be open, not
what counts as the surface of a vertex set.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from ._rows import isin_rows
from .errors import ResourceCapExceeded, UnsupportedRegionError

Vertex = tuple[int, ...]

NEAREST_NEIGHBOR = "nearest-neighbor"
SPREAD_OUT = "spread-out"

#: default cap on explicit region enumeration, in sites
ENUMERATION_CAP = 10**8


@dataclass(frozen=True)
class LatticeModel:
    """Ambient lattice: Z^d with nearest-neighbor bonds, or its spread-out variant.

    In the spread-out variant every pair of vertices at l-infinity distance at
    most `lam` is joined by an edge.
    """

    d: int
    kind: str = NEAREST_NEIGHBOR
    lam: int | None = None

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.kind not in (NEAREST_NEIGHBOR, SPREAD_OUT):
            raise ValueError(f"unknown lattice kind {self.kind!r}")
        if self.kind == SPREAD_OUT:
            if self.lam is None or self.lam < 1:
                raise ValueError("spread-out model requires lam >= 1")
        elif self.lam is not None:
            raise ValueError("lam only applies to the spread-out model")

    @property
    def degree(self) -> int:
        if self.kind == NEAREST_NEIGHBOR:
            return 2 * self.d
        return (2 * self.lam + 1) ** self.d - 1

    @property
    def max_step(self) -> int:
        """Largest l-infinity displacement of a single edge."""
        return 1 if self.kind == NEAREST_NEIGHBOR else self.lam


def neighbor_offsets(model: LatticeModel) -> np.ndarray:
    """Displacement vectors of the model's adjacency, in canonical order.

    Nearest-neighbor: axis-major with the negative step first
    (-e1, +e1, -e2, +e2, ...).  Spread-out: lexicographic order over the
    punctured l-infinity ball of radius lam.
    """
    d = model.d
    if model.kind == NEAREST_NEIGHBOR:
        offs = np.zeros((2 * d, d), dtype=np.int32)
        for k in range(d):
            offs[2 * k, k] = -1
            offs[2 * k + 1, k] = 1
        return offs
    lam = model.lam
    rng = range(-lam, lam + 1)
    rows = [off for off in itertools.product(rng, repeat=d) if any(off)]
    return np.array(rows, dtype=np.int32)


def neighbors(v: Vertex, model: LatticeModel) -> list[Vertex]:
    """Adjacency of `v` in the model, in the canonical deterministic order."""
    if len(v) != model.d:
        raise ValueError(f"vertex has {len(v)} coordinates, model is {model.d}-dimensional")
    base = np.asarray(v, dtype=np.int64)
    return [tuple(int(c) for c in base + off) for off in neighbor_offsets(model)]


def _lex_less(a: Vertex, b: Vertex) -> bool:
    return a < b


@dataclass(frozen=True, init=False)
class Edge:
    """Canonical undirected bond: endpoints stored with `a` lexicographically below `b`.

    The constructor accepts the endpoints in either order and canonicalizes
    silently; equal endpoints are rejected.
    """

    a: Vertex
    b: Vertex

    def __init__(self, a: Iterable[int], b: Iterable[int]):
        ta = tuple(int(c) for c in a)
        tb = tuple(int(c) for c in b)
        if len(ta) != len(tb):
            raise ValueError("edge endpoints have mismatched dimensions")
        if ta == tb:
            raise ValueError(f"degenerate edge at {ta}")
        if not _lex_less(ta, tb):
            ta, tb = tb, ta
        object.__setattr__(self, "a", ta)
        object.__setattr__(self, "b", tb)

    @property
    def d(self) -> int:
        return len(self.a)


def validate_edge(e: Edge, model: LatticeModel) -> None:
    """Raise ValueError unless `e` is an edge of `model`."""
    if e.d != model.d:
        raise ValueError(f"edge dimension {e.d} does not match model dimension {model.d}")
    diff = [abs(x - y) for x, y in zip(e.a, e.b)]
    if model.kind == NEAREST_NEIGHBOR:
        if sum(diff) != 1:
            raise ValueError(f"{e.a}-{e.b} is not a nearest-neighbor bond")
    else:
        if max(diff) > model.lam:
            raise ValueError(f"{e.a}-{e.b} exceeds spread-out range {model.lam}")


# ---------------------------------------------------------------------------
# Regions


class Region:
    """Sublattice of Z^d with decidable membership.

    Subclasses implement `contains` / `contains_batch` plus finiteness
    metadata; everything else (boundaries, enumeration) is generic.
    """

    d: int

    def contains(self, v: Vertex) -> bool:
        raise NotImplementedError

    def contains_batch(self, arr: np.ndarray) -> np.ndarray:
        """Vectorized membership for an (N, d) integer array."""
        return np.fromiter((self.contains(tuple(int(c) for c in row)) for row in arr), dtype=bool, count=len(arr))

    @property
    def is_finite(self) -> bool:
        raise NotImplementedError

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Inclusive coordinate bounds (lo, hi) covering the region; finite regions only."""
        raise UnsupportedRegionError(f"{type(self).__name__} is not finite")

    def on_boundary(self, v: Vertex) -> bool:
        """True iff v is in the region and has a nearest-neighbor outside it."""
        if not self.contains(v):
            return False
        for k in range(self.d):
            for s in (-1, 1):
                u = list(v)
                u[k] += s
                if not self.contains(tuple(u)):
                    return True
        return False

    def on_boundary_batch(self, arr: np.ndarray) -> np.ndarray:
        inside = self.contains_batch(arr)
        if not inside.any():
            return inside
        exterior = np.zeros(len(arr), dtype=bool)
        for k in range(self.d):
            for s in (-1, 1):
                shifted = arr.copy()
                shifted[:, k] += s
                exterior |= ~self.contains_batch(shifted)
        return inside & exterior

    def _size_upper_bound(self) -> int:
        lo, hi = self.bounds()
        return int(np.prod((hi - lo + 1).astype(np.float64)))

    def enumerate(self, cap: int = ENUMERATION_CAP) -> np.ndarray:
        """All vertices of a finite region as an (N, d) int32 array, lexicographic order."""
        if not self.is_finite:
            raise UnsupportedRegionError(f"cannot enumerate infinite region {type(self).__name__}")
        bound = self._size_upper_bound()
        if bound > cap:
            raise ResourceCapExceeded(
                f"region bounding box holds {bound} sites, above the enumeration cap of {cap}"
            )
        lo, hi = self.bounds()
        if np.any(hi < lo):
            return np.empty((0, self.d), dtype=np.int32)
        axes = [np.arange(int(l), int(h) + 1, dtype=np.int32) for l, h in zip(lo, hi)]
        grid = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grid], axis=1)
        return pts[self.contains_batch(pts)]

    def __iter__(self) -> Iterator[Vertex]:
        for row in self.enumerate():
            yield tuple(int(c) for c in row)


@dataclass(frozen=True)
class FullLattice(Region):
    """All of Z^d."""

    d: int

    def contains(self, v: Vertex) -> bool:
        return len(v) == self.d

    def contains_batch(self, arr: np.ndarray) -> np.ndarray:
        return np.ones(len(arr), dtype=bool)

    @property
    def is_finite(self) -> bool:
        return False


@dataclass(frozen=True)
class Box(Region):
    """l-infinity ball: center + [-radius, radius]^d."""

    center: Vertex
    radius: int

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("box radius must be >= 0")
        object.__setattr__(self, "center", tuple(int(c) for c in self.center))

    @property
    def d(self) -> int:
        return len(self.center)

    def contains(self, v: Vertex) -> bool:
        return len(v) == self.d and all(abs(x - c) <= self.radius for x, c in zip(v, self.center))

    def contains_batch(self, arr: np.ndarray) -> np.ndarray:
        c = np.asarray(self.center, dtype=np.int64)
        return np.all(np.abs(arr.astype(np.int64) - c) <= self.radius, axis=1)

    @property
    def is_finite(self) -> bool:
        return True

    def bounds(self):
        c = np.asarray(self.center, dtype=np.int64)
        return c - self.radius, c + self.radius


@dataclass(frozen=True)
class HalfSpace(Region):
    """Axis-aligned half-space, e.g. {x : x(1) >= 0} for axis=0, sign=+1, offset=0."""

    d: int
    axis: int = 0
    sign: int = 1
    offset: int = 0

    def __post_init__(self):
        if not 0 <= self.axis < self.d:
            raise ValueError("half-space axis out of range")
        if self.sign not in (-1, 1):
            raise ValueError("half-space sign must be +1 or -1")

    def contains(self, v: Vertex) -> bool:
        if len(v) != self.d:
            return False
        return v[self.axis] >= self.offset if self.sign == 1 else v[self.axis] <= self.offset

    def contains_batch(self, arr: np.ndarray) -> np.ndarray:
        col = arr[:, self.axis]
        return col >= self.offset if self.sign == 1 else col <= self.offset

    @property
    def is_finite(self) -> bool:
        return False


@dataclass(frozen=True)
class HalfBox(Region):
    """Box intersected with the half-space x(1) >= 0: [0, n] x [-n, n]^(d-1)."""

    d: int
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("half-box size must be >= 0")

    def contains(self, v: Vertex) -> bool:
        if len(v) != self.d:
            return False
        if not 0 <= v[0] <= self.n:
            return False
        return all(abs(x) <= self.n for x in v[1:])

    def contains_batch(self, arr: np.ndarray) -> np.ndarray:
        ok = (arr[:, 0] >= 0) & (arr[:, 0] <= self.n)
        if self.d > 1:
            ok &= np.all(np.abs(arr[:, 1:].astype(np.int64)) <= self.n, axis=1)
        return ok

    @property
    def is_finite(self) -> bool:
        return True

    def bounds(self):
        lo = np.full(self.d, -self.n, dtype=np.int64)
        lo[0] = 0
        hi = np.full(self.d, self.n, dtype=np.int64)
        return lo, hi


@dataclass(frozen=True)
class Annulus(Region):
    """B(center; n) minus B(center; m), for m < n."""

    center: Vertex
    m: int
    n: int

    def __post_init__(self):
        if not 0 <= self.m < self.n:
            raise ValueError("annulus requires 0 <= m < n")
        object.__setattr__(self, "center", tuple(int(c) for c in self.center))

    @property
    def d(self) -> int:
        return len(self.center)

    def contains(self, v: Vertex) -> bool:
        if len(v) != self.d:
            return False
        r = max(abs(x - c) for x, c in zip(v, self.center))
        return self.m < r <= self.n

    def contains_batch(self, arr: np.ndarray) -> np.ndarray:
        c = np.asarray(self.center, dtype=np.int64)
        r = np.max(np.abs(arr.astype(np.int64) - c), axis=1)
        return (r > self.m) & (r <= self.n)

    @property
    def is_finite(self) -> bool:
        return True

    def bounds(self):
        c = np.asarray(self.center, dtype=np.int64)
        return c - self.n, c + self.n


@dataclass(frozen=True)
class Rect(Region):
    """Elongated box [-alpha*n, n] x [-alpha*n, alpha*n]^(d-1), shifted.

    Empty by convention when n < 0.
    """

    d: int
    alpha: int
    n: int
    shift: Vertex = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.alpha < 1:
            raise ValueError("rect aspect alpha must be >= 1")
        shift = self.shift if self.shift is not None else (0,) * self.d
        shift = tuple(int(c) for c in shift)
        if len(shift) != self.d:
            raise ValueError("rect shift has wrong dimension")
        object.__setattr__(self, "shift", shift)

    @property
    def is_empty(self) -> bool:
        return self.n < 0

    def contains(self, v: Vertex) -> bool:
        if self.is_empty or len(v) != self.d:
            return False
        a = self.alpha * self.n
        x0 = v[0] - self.shift[0]
        if not -a <= x0 <= self.n:
            return False
        return all(-a <= x - s <= a for x, s in zip(v[1:], self.shift[1:]))

    def contains_batch(self, arr: np.ndarray) -> np.ndarray:
        if self.is_empty:
            return np.zeros(len(arr), dtype=bool)
        a = self.alpha * self.n
        rel = arr.astype(np.int64) - np.asarray(self.shift, dtype=np.int64)
        ok = (rel[:, 0] >= -a) & (rel[:, 0] <= self.n)
        if self.d > 1:
            ok &= np.all(np.abs(rel[:, 1:]) <= a, axis=1)
        return ok

    @property
    def is_finite(self) -> bool:
        return True

    def bounds(self):
        if self.is_empty:
            s = np.asarray(self.shift, dtype=np.int64)
            return s, s - 1  # empty range
        a = self.alpha * self.n
        s = np.asarray(self.shift, dtype=np.int64)
        lo = s - a
        hi = s + a
        hi[0] = s[0] + self.n
        return lo, hi


@dataclass(frozen=True)
class Difference(Region):
    """`inner` minus an explicit vertex set, with an optional exempt anchor.

    The anchor encodes the restricted-connection convention: it is a member of
    the region even when listed in the excluded set, so it can serve as the
    source of an exploration whose paths must otherwise avoid the set.
    """

    inner: Region
    excluded: frozenset[Vertex]
    anchor: Vertex | None = None

    def __post_init__(self):
        object.__setattr__(self, "excluded", frozenset(tuple(int(c) for c in v) for v in self.excluded))
        if self.anchor is not None:
            object.__setattr__(self, "anchor", tuple(int(c) for c in self.anchor))

    @property
    def d(self) -> int:
        return self.inner.d

    def contains(self, v: Vertex) -> bool:
        v = tuple(v)
        if not self.inner.contains(v):
            return False
        return v == self.anchor or v not in self.excluded

    def contains_batch(self, arr: np.ndarray) -> np.ndarray:
        ok = self.inner.contains_batch(arr)
        if self.excluded and ok.any():
            table = np.array(sorted(self.excluded), dtype=arr.dtype).reshape(len(self.excluded), self.d)
            hit = isin_rows(np.ascontiguousarray(arr), table)
            if self.anchor is not None:
                hit &= ~np.all(arr == np.asarray(self.anchor, dtype=arr.dtype), axis=1)
            ok &= ~hit
        return ok

    @property
    def is_finite(self) -> bool:
        return self.inner.is_finite

    def bounds(self):
        return self.inner.bounds()


# ---------------------------------------------------------------------------
# Boundary operations (all in the nearest-neighbor graph)


def boundary(r: Region, cap: int = ENUMERATION_CAP) -> set[Vertex]:
    """{x in r : some nearest neighbor of x lies outside r}; finite regions only."""
    if not r.is_finite:
        raise UnsupportedRegionError("boundary enumeration requires a finite region")
    pts = r.enumerate(cap=cap)
    if len(pts) == 0:
        return set()
    mask = r.on_boundary_batch(pts)
    return {tuple(int(c) for c in row) for row in pts[mask]}


def partial_boundary(r: Rect, side: str) -> set[Vertex]:
    """Right boundary (face x(1) = shift(1) + n) or west boundary (the rest) of a Rect."""
    if not isinstance(r, Rect):
        raise UnsupportedRegionError("partial_boundary is defined for Rect regions only")
    if side not in ("right", "west"):
        raise ValueError(f"side must be 'right' or 'west', got {side!r}")
    if r.is_empty:
        return set()
    full = boundary(r)
    right_coord = r.shift[0] + r.n
    right = {v for v in full if v[0] == right_coord}
    return right if side == "right" else full - right


def relative_boundary(a: Region, d_outer: Region, cap: int = ENUMERATION_CAP) -> set[Vertex]:
    """{x in a : some nearest neighbor of x lies in d_outer but not in a}.

    Requires a to be finite and contained in d_outer.
    """
    if not a.is_finite:
        raise UnsupportedRegionError("relative_boundary requires a finite inner region")
    pts = a.enumerate(cap=cap)
    if len(pts) and not d_outer.contains_batch(pts).all():
        bad = pts[~d_outer.contains_batch(pts)][0]
        raise ValueError(f"inner region is not contained in the outer region (e.g. {tuple(int(c) for c in bad)})")
    out: set[Vertex] = set()
    if len(pts) == 0:
        return out
    escape = np.zeros(len(pts), dtype=bool)
    for k in range(a.d):
        for s in (-1, 1):
            shifted = pts.copy()
            shifted[:, k] += s
            escape |= d_outer.contains_batch(shifted) & ~a.contains_batch(shifted)
    return {tuple(int(c) for c in row) for row in pts[escape]}
