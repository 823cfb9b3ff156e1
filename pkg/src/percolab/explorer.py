"""Cluster exploration: restricted BFS, chemical distances, arm events, spanning census.

The BFS runs layer by layer over a whole batch of trials at once, so the per
layer work (neighbor generation, edge openness, region membership, dedup) is a
handful of vectorized array operations regardless of how many trials are in
flight.  On the nearest-neighbor lattice the graph is bipartite, so dedup only
needs the previous layer; the spread-out lattice keeps the full visited set.

All reported quantities are order-independent aggregates (volumes, radii,
first-contact layers, boundary-hit counts), so reports are bit-reproducible
for a fixed (seed, trial) regardless of batch composition or thread count.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass, field

import numpy as np

from ._rows import isin_rows, unique_rows
from .errors import BudgetExceeded, ResourceCapExceeded
from .geometry import (
    NEAREST_NEIGHBOR,
    Box,
    Difference,
    LatticeModel,
    Region,
    Vertex,
    neighbor_offsets,
)
from .sampler import SamplerConfig, uniform_batch

#: default spanning-census memory cap, in sites
CENSUS_SITE_CAP = 2 * 10**7

TRUNC_NONE = 0
TRUNC_VOLUME = 1
TRUNC_RADIUS = 2
TRUNC_REASONS = {TRUNC_NONE: None, TRUNC_VOLUME: "volume budget", TRUNC_RADIUS: "radius budget"}


@dataclass(frozen=True)
class Budget:
    """Exploration truncation limits.

    Critical clusters have heavy tails (the volume survival scales like
    t^(-1/2)), so untruncated exploration is not an option; truncated trials
    are flagged, never dropped, and estimators decide their disposition.
    """

    max_volume: int = 1_000_000
    max_intrinsic_radius: int = 100_000

    def __post_init__(self):
        if self.max_volume < 1 or self.max_intrinsic_radius < 1:
            raise ValueError("budgets must be positive")


@dataclass(frozen=True)
class Target:
    """Named set of vertices for chemical-distance queries."""

    name: str
    where: Region | frozenset[Vertex]


@dataclass
class ClusterReport:
    """Everything one exploration yields."""

    origin: Vertex
    region: Region
    p: float
    volume: int
    boundary_hits: frozenset[Vertex] | None
    extrinsic_radius: int
    intrinsic_radius: int
    chem_dist: dict[str, int | None]
    truncated: bool
    truncated_reason: str | None
    vertices: frozenset[Vertex] | None = None


class _BatchResult:
    """Per-trial arrays produced by one batched exploration."""

    __slots__ = (
        "volume",
        "extrinsic",
        "intrinsic",
        "boundary_hits",
        "chem",
        "truncated",
        "resolved",
    )

    def __init__(self, n: int, target_names: tuple[str, ...]):
        self.volume = np.ones(n, dtype=np.int64)
        self.extrinsic = np.zeros(n, dtype=np.int64)
        self.intrinsic = np.zeros(n, dtype=np.int64)
        self.boundary_hits = np.zeros(n, dtype=np.int64)
        self.chem = {name: np.full(n, -1, dtype=np.int64) for name in target_names}
        self.truncated = np.zeros(n, dtype=np.uint8)
        self.resolved = np.ones(n, dtype=bool)  # False while a stop condition is pending


def _target_mask(where: Region | frozenset, rows: np.ndarray) -> np.ndarray:
    if isinstance(where, Region):
        return where.contains_batch(rows)
    table = np.array(sorted(where), dtype=rows.dtype).reshape(len(where), rows.shape[1])
    return isin_rows(np.ascontiguousarray(rows), table)


class _Dedup:
    """Duplicate filtering for (trial, coords) rows.

    Uses packed int64 keys when the coordinate span fits in 63 bits (fast
    path: sort-free membership via searchsorted), otherwise lexicographic row
    operations.  Mode is chosen once per exploration, from the radius cap.
    """

    def __init__(self, n_trials: int, d: int, origin: np.ndarray, radius_cap: int, max_step: int):
        span = 2 * (radius_cap + max_step) + 2
        bits = int(np.ceil(np.log2(span))) * d + int(np.ceil(np.log2(max(n_trials, 2))))
        self.packed = bits <= 62
        self.origin = origin
        self.offset = radius_cap + max_step + 1
        if self.packed:
            base = int(span)
            strides = [1]
            for _ in range(d - 1):
                strides.append(strides[-1] * base)
            strides.append(strides[-1] * base)  # trial stride
            self.strides = np.array(strides[:-1], dtype=np.int64)
            self.trial_stride = np.int64(strides[-1])

    def keys(self, tids: np.ndarray, rows: np.ndarray) -> np.ndarray:
        rel = rows.astype(np.int64) - self.origin + self.offset
        return rel @ self.strides + tids.astype(np.int64) * self.trial_stride

    def tagged(self, tids: np.ndarray, rows: np.ndarray) -> np.ndarray:
        return np.concatenate([tids.reshape(-1, 1).astype(np.int32), rows], axis=1)


def explore_batch(
    origin: Vertex,
    region: Region,
    p: float,
    model: LatticeModel,
    seed: int,
    trials: np.ndarray,
    budget: Budget,
    *,
    stop_at_extrinsic: int | None = None,
    stop_at_intrinsic: int | None = None,
    targets: tuple[Target, ...] = (),
    stop_at_targets: bool = False,
    record_boundary_hits: bool = False,
    collect: bool = False,
) -> _BatchResult | tuple[_BatchResult, list[set[Vertex]]]:
    """Explore the open cluster of `origin` for each trial index in `trials`.

    BFS over open edges whose far endpoint is admissible in `region`; the
    origin itself is only required to be the region's anchor exemption, so
    restricted connections with an excluded cluster work out of the box.
    `stop_*` arguments deactivate a trial early once its question is answered;
    quantities not yet final at that point are lower bounds.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    origin = tuple(int(c) for c in origin)
    if not region.contains(origin):
        raise ValueError(f"origin {origin} is not admissible in the region")
    d = model.d
    trials = np.asarray(trials, dtype=np.uint64)
    n = len(trials)
    names = tuple(t.name for t in targets)
    res = _BatchResult(n, names)
    sets: list[set[Vertex]] = [{origin} for _ in range(n)] if collect else []

    offsets = neighbor_offsets(model)
    deg = len(offsets)
    origin_arr = np.asarray(origin, dtype=np.int64)

    depth_cap = budget.max_intrinsic_radius
    if stop_at_intrinsic is not None:
        depth_cap = min(depth_cap, stop_at_intrinsic)
    # coordinates stay within depth * step of the origin, and within a finite region's bounds
    coord_bound = depth_cap * model.max_step
    if region.is_finite:
        lo, hi = region.bounds()
        spatial = int(max(np.max(np.abs(hi - origin_arr)), np.max(np.abs(lo - origin_arr)), 1))
        coord_bound = min(coord_bound, spatial)
    dedup = _Dedup(n, d, origin_arr, coord_bound, model.max_step)
    bipartite = model.kind == NEAREST_NEIGHBOR

    # trial-local bookkeeping; "pending" trials still expand their frontier
    pending = np.ones(n, dtype=bool)
    want_stop = stop_at_extrinsic is not None or stop_at_intrinsic is not None or stop_at_targets
    if want_stop:
        res.resolved[:] = False

    def _stops_met(i_arr):
        # trials whose stop conditions are all met get deactivated
        done = np.ones(len(i_arr), dtype=bool)
        if stop_at_extrinsic is not None:
            done &= res.extrinsic[i_arr] >= stop_at_extrinsic
        if stop_at_intrinsic is not None:
            done &= res.intrinsic[i_arr] >= stop_at_intrinsic
        if stop_at_targets and names:
            for name in names:
                done &= res.chem[name][i_arr] >= 0
        return done

    # layer 0: the origin
    frontier = np.tile(np.asarray(origin, dtype=np.int32), (n, 1))
    ftid = np.arange(n, dtype=np.int64)
    if bipartite:
        prev_keys = dedup.keys(ftid, frontier) if dedup.packed else dedup.tagged(ftid, frontier)
        if dedup.packed:
            prev_keys = np.sort(prev_keys)
    else:
        visited = dedup.keys(ftid, frontier) if dedup.packed else dedup.tagged(ftid, frontier)
        if dedup.packed:
            visited = np.sort(visited)

    if record_boundary_hits and region.is_finite and region.on_boundary(origin):
        res.boundary_hits[:] += 1
    for t in targets:
        if _target_mask(t.where, frontier[:1])[0]:
            res.chem[t.name][:] = 0
    if want_stop:
        done0 = _stops_met(ftid)
        res.resolved[done0] = True
        pending[done0] = False
        frontier = frontier[pending[ftid]]
        ftid = np.flatnonzero(pending).astype(np.int64)

    depth = 0
    while len(frontier):
        if depth >= depth_cap:
            # frontier still alive at the cap: these trials are radius-truncated
            alive = np.unique(ftid)
            untr = alive[res.truncated[alive] == TRUNC_NONE]
            res.truncated[untr] = TRUNC_RADIUS
            break
        depth += 1

        k = len(frontier)
        cand = (frontier[:, None, :] + offsets[None, :, :]).reshape(k * deg, d)
        ctid = np.repeat(ftid, deg)
        # openness of the connecting edges (canonical order per offset sign)
        src = np.repeat(frontier, deg, axis=0)
        u = uniform_batch(seed, trials[ctid], d, src, cand)
        keep = u < p
        cand = cand[keep]
        ctid = ctid[keep]
        if len(cand):
            inside = region.contains_batch(cand)
            cand = cand[inside]
            ctid = ctid[inside]
        if len(cand) == 0:
            break

        # dedup: not previously visited, once per (trial, vertex)
        if dedup.packed:
            keys = dedup.keys(ctid, cand)
            seen = prev_keys if bipartite else visited
            if len(seen):
                idx = np.searchsorted(seen, keys)
                np.minimum(idx, len(seen) - 1, out=idx)
                fresh = seen[idx] != keys
            else:
                fresh = np.ones(len(keys), dtype=bool)
            keys = keys[fresh]
            cand = cand[fresh]
            ctid = ctid[fresh]
            if len(keys):
                order = np.argsort(keys, kind="stable")
                keys = keys[order]
                cand = cand[order]
                ctid = ctid[order]
                first = np.ones(len(keys), dtype=bool)
                first[1:] = keys[1:] != keys[:-1]
                keys = keys[first]
                cand = cand[first]
                ctid = ctid[first]
        else:
            tagged = dedup.tagged(ctid, cand)
            seen = prev_keys if bipartite else visited
            fresh = ~isin_rows(tagged, seen)
            tagged = unique_rows(tagged[fresh])
            ctid = tagged[:, 0].astype(np.int64)
            cand = tagged[:, 1:]
        if len(cand) == 0:
            break

        # fold the new layer into per-trial aggregates
        np.add.at(res.volume, ctid, 1)
        linf = np.max(np.abs(cand.astype(np.int64) - origin_arr), axis=1)
        np.maximum.at(res.extrinsic, ctid, linf)
        np.maximum.at(res.intrinsic, ctid, depth)
        if record_boundary_hits and region.is_finite:
            onb = region.on_boundary_batch(cand)
            if onb.any():
                np.add.at(res.boundary_hits, ctid[onb], 1)
        for t in targets:
            col = res.chem[t.name]
            unres = col[ctid] < 0
            if unres.any():
                hit = _target_mask(t.where, cand[unres])
                if hit.any():
                    hit_tids = ctid[unres][hit]
                    # first contact only; layer index is the chemical distance
                    col[np.unique(hit_tids)] = depth
        if collect:
            for tid, row in zip(ctid, cand):
                sets[int(tid)].add(tuple(int(c) for c in row))

        # volume budget
        over = np.unique(ctid[res.volume[ctid] >= budget.max_volume])
        if len(over):
            over = over[res.truncated[over] == TRUNC_NONE]
            res.truncated[over] = TRUNC_VOLUME
            pending[over] = False

        if want_stop:
            alive = np.unique(ctid)
            done = _stops_met(alive)
            res.resolved[alive[done]] = True
            pending[alive[done]] = False

        keepmask = pending[ctid]
        frontier = cand[keepmask]
        ftid = ctid[keepmask]

        if bipartite:
            if dedup.packed:
                prev_keys = keys
            else:
                prev_keys = tagged
        else:
            if dedup.packed:
                visited = np.sort(np.concatenate([visited, keys]))
            else:
                visited = np.concatenate([visited, tagged], axis=0)

    # trials that ran out of cluster resolved their stop conditions negatively
    res.resolved[:] = res.resolved | (res.truncated == TRUNC_NONE)
    if collect:
        return res, sets
    return res


def explore(
    origin: Vertex,
    region: Region,
    p: float,
    cfg: SamplerConfig,
    budget: Budget | None = None,
    targets: tuple[Target, ...] = (),
    *,
    stop_at_targets: bool = False,
    record_boundary_hits: bool = True,
    collect_vertices: bool = False,
) -> ClusterReport:
    """Single-trial exploration; see `explore_batch` for the mechanics.

    By default the cluster is exhausted (subject to budget), so volume, radii
    and chemical distances are exact for untruncated reports.  With
    `stop_at_targets` the walk ends once every target is contacted, and
    volume/radii become lower bounds (reported via the truncation reason
    "targets resolved").
    """
    budget = budget or Budget()
    out = explore_batch(
        origin,
        region,
        p,
        cfg.model,
        cfg.seed,
        np.array([cfg.trial], dtype=np.uint64),
        budget,
        targets=targets,
        stop_at_targets=stop_at_targets,
        record_boundary_hits=record_boundary_hits and region.is_finite,
        collect=True,
    )
    res, sets = out
    verts = sets[0]
    hits: frozenset[Vertex] | None = None
    if record_boundary_hits and region.is_finite:
        hits = frozenset(v for v in verts if region.on_boundary(v))
    chem = {name: (int(v) if v >= 0 else None) for name, v in ((nm, col[0]) for nm, col in res.chem.items())}
    reason = TRUNC_REASONS[int(res.truncated[0])]
    truncated = res.truncated[0] != TRUNC_NONE
    if not truncated and stop_at_targets and targets and all(v is not None for v in chem.values()):
        truncated, reason = True, "targets resolved"
    return ClusterReport(
        origin=tuple(int(c) for c in origin),
        region=region,
        p=p,
        volume=int(res.volume[0]),
        boundary_hits=hits,
        extrinsic_radius=int(res.extrinsic[0]),
        intrinsic_radius=int(res.intrinsic[0]),
        chem_dist=chem,
        truncated=truncated,
        truncated_reason=reason,
        vertices=frozenset(verts) if collect_vertices else None,
    )


def chemical_distance(
    origin: Vertex,
    target: Target,
    region: Region,
    p: float,
    cfg: SamplerConfig,
    budget: Budget | None = None,
) -> int | None:
    """Exact chemical distance from origin to the target set, or None if the
    cluster is exhausted without contact.  Budget exhaustion raises, because
    "unknown" must never be conflated with "disconnected"."""
    report = explore(origin, region, p, cfg, budget or Budget(), targets=(target,), stop_at_targets=True, record_boundary_hits=False)
    dist = report.chem_dist[target.name]
    if dist is None and report.truncated_reason in ("volume budget", "radius budget"):
        raise BudgetExceeded(
            f"exploration hit the {report.truncated_reason} before resolving the connection"
        )
    return dist


def _arm_region(origin: Vertex, n: int, model: LatticeModel) -> Box:
    # every open path to l-infinity distance n stays inside this box until
    # first contact (edges move at most max_step per hop)
    return Box(origin, n + model.max_step - 1)


def arm_event(origin: Vertex, n: int, p: float, cfg: SamplerConfig, budget: Budget | None = None) -> bool:
    """Whether the origin's cluster reaches l-infinity distance n."""
    if n < 1:
        raise ValueError("arm distance must be >= 1")
    budget = budget or Budget()
    res = explore_batch(
        tuple(origin),
        _arm_region(tuple(origin), n, cfg.model),
        p,
        cfg.model,
        cfg.seed,
        np.array([cfg.trial], dtype=np.uint64),
        budget,
        stop_at_extrinsic=n,
    )
    if res.extrinsic[0] >= n:
        return True
    if res.truncated[0] == TRUNC_VOLUME:
        raise BudgetExceeded("volume budget hit before the arm question was resolved")
    return False


def intrinsic_arm_event(origin: Vertex, n: int, p: float, cfg: SamplerConfig, budget: Budget | None = None) -> bool:
    """Whether the cluster's chemical (BFS-depth) radius reaches n."""
    if n < 1:
        raise ValueError("arm distance must be >= 1")
    budget = budget or Budget()
    res = explore_batch(
        tuple(origin),
        Box(tuple(origin), n * cfg.model.max_step),
        p,
        cfg.model,
        cfg.seed,
        np.array([cfg.trial], dtype=np.uint64),
        budget,
        stop_at_intrinsic=n,
    )
    if res.intrinsic[0] >= n:
        return True
    if res.truncated[0] == TRUNC_VOLUME:
        raise BudgetExceeded("volume budget hit before the intrinsic-arm question was resolved")
    return False


# ---------------------------------------------------------------------------
# Spanning census


def _census_open_edges(n: int, p: float, cfg: SamplerConfig, chunk: int = 1 << 19):
    """Yield (site_index, neighbor_index) arrays of open edges of B(n), streamed."""
    d = cfg.model.d
    side = 2 * n + 1
    nsites = side**d
    strides = np.array([side**i for i in range(d)], dtype=np.int64)
    for start in range(0, nsites, chunk):
        idx = np.arange(start, min(start + chunk, nsites), dtype=np.int64)
        coords = np.empty((len(idx), d), dtype=np.int32)
        rem = idx.copy()
        for i in range(d):
            coords[:, i] = rem % side - n
            rem //= side
        for k in range(d):
            movable = coords[:, k] < n
            a = coords[movable]
            b = a.copy()
            b[:, k] += 1
            if len(a) == 0:
                continue
            u = uniform_batch(cfg.seed, cfg.trial, d, a, b, assume_canonical=True)
            open_mask = u < p
            if open_mask.any():
                ai = idx[movable][open_mask]
                yield ai, ai + strides[k]


def spanning_census(n: int, p: float, cfg: SamplerConfig, site_cap: int = CENSUS_SITE_CAP) -> tuple[int, list[int]]:
    """Number and sizes of open clusters of B(n) joining the faces x(1) = -n and x(1) = +n.

    Union-find over all open edges with both endpoints in the box; only a
    parent/rank array is materialized, edges are streamed from the sampler.
    """
    if n < 1:
        raise ValueError("box size must be >= 1")
    if cfg.model.kind != NEAREST_NEIGHBOR:
        raise NotImplementedError("spanning census supports the nearest-neighbor model")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    d = cfg.model.d
    side = 2 * n + 1
    nsites = side**d
    if nsites > site_cap:
        raise ResourceCapExceeded(f"box has {nsites} sites, above the census cap of {site_cap}")

    parent = array("q", range(nsites))
    rank = array("b", bytes(nsites))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for ai, bi in _census_open_edges(n, p, cfg):
        for a, b in zip(ai.tolist(), bi.tolist()):
            ra, rb = find(a), find(b)
            if ra == rb:
                continue
            if rank[ra] < rank[rb]:
                ra, rb = rb, ra
            parent[rb] = ra
            if rank[ra] == rank[rb]:
                rank[ra] += 1

    # resolve all roots at once by pointer jumping
    parents = np.frombuffer(parent, dtype=np.int64).copy()
    while True:
        jumped = parents[parents]
        if np.array_equal(jumped, parents):
            break
        parents = jumped

    # faces x(1) = -n and x(1) = n; coordinate 0 has stride 1
    face_shape_idx = np.arange(0, nsites, side, dtype=np.int64)
    left = parents[face_shape_idx]  # coordinate 0 == -n
    right = parents[face_shape_idx + (side - 1)]
    spanning_roots = np.intersect1d(np.unique(left), np.unique(right))
    if len(spanning_roots) == 0:
        return 0, []
    sizes = np.bincount(parents, minlength=nsites)[spanning_roots]
    return int(len(spanning_roots)), sorted((int(s) for s in sizes), reverse=True)
