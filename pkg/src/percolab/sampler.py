"""Deterministic i.i.d. Uniform(0,1) edge field with monotone coupling across p.

Every edge's variate is a pure function of (seed, trial, canonical edge): no
sequential state, so lazy cluster exploration needs no lattice storage and
parallel trials are reproducible by construction.  An edge is p-open iff its
variate is < p, which realizes the standard monotone coupling: the p-open edge
set is nondecreasing in p pointwise per (seed, trial).

Wire contract (frozen; cross-check vectors live in tests/fixtures/sampler_vectors.json):

  edge bytes = LE32(d) || LE32(a_1) .. LE32(a_d) || LE32(b_1) .. LE32(b_d)

with each coordinate a signed two's-complement little-endian 32-bit integer and
(a, b) the canonical edge order (a lexicographically smaller than b).  The byte
string is zero-padded to a multiple of 8 and read as little-endian unsigned
64-bit words w_0, w_1, ...  Then, with all arithmetic mod 2**64,

  state   = M(M(seed) ^ trial)
  state   = M(state ^ w_i)          for each word, in order
  uniform = (state >> 11) * 2**-53  (53-bit mantissa, exact float64 in [0, 1))

where M is the splitmix64 step

  z = z + 0x9E3779B97F4A7C15
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
  z = (z ^ (z >> 27)) * 0x94D049BB133111EB
  M(z) = z ^ (z >> 31)

Coordinates must satisfy |x(i)| < 2**31.  This generator is statistical, not
cryptographic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Edge, LatticeModel, validate_edge

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_U64_GOLDEN = np.uint64(_GOLDEN)
_U64_MIX1 = np.uint64(_MIX1)
_U64_MIX2 = np.uint64(_MIX2)
_U64_30 = np.uint64(30)
_U64_27 = np.uint64(27)
_U64_31 = np.uint64(31)
_U64_32 = np.uint64(32)
_U64_11 = np.uint64(11)
_INV_2_53 = 2.0**-53


@dataclass(frozen=True)
class SamplerConfig:
    """Keys of the edge field: (seed, trial) fully determine every variate."""

    seed: int
    trial: int
    model: LatticeModel

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if not 0 <= self.trial < 2**64:
            raise ValueError("trial must fit in 64 bits")


def _mix(z: int) -> int:
    z = (z + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def _mix_vec(z: np.ndarray) -> np.ndarray:
    z = z + _U64_GOLDEN
    z = (z ^ (z >> _U64_30)) * _U64_MIX1
    z = (z ^ (z >> _U64_27)) * _U64_MIX2
    return z ^ (z >> _U64_31)


def trial_state(seed: int, trial: int) -> int:
    """Chain state after absorbing the (seed, trial) key."""
    return _mix(_mix(seed & _MASK) ^ (trial & _MASK))


def _edge_words(d: int, a: tuple[int, ...], b: tuple[int, ...]) -> list[int]:
    u32 = [d & 0xFFFFFFFF]
    for c in a:
        u32.append(c & 0xFFFFFFFF)
    for c in b:
        u32.append(c & 0xFFFFFFFF)
    if len(u32) % 2:
        u32.append(0)
    return [u32[2 * j] | (u32[2 * j + 1] << 32) for j in range(len(u32) // 2)]


def uniform(cfg: SamplerConfig, e: Edge) -> float:
    """The edge's Uniform(0,1) variate; pure in (seed, trial, canonical edge)."""
    validate_edge(e, cfg.model)
    for c in e.a + e.b:
        if not -(2**31) <= c < 2**31:
            raise ValueError(f"coordinate {c} outside the supported 32-bit range")
    state = trial_state(cfg.seed, cfg.trial)
    for w in _edge_words(cfg.model.d, e.a, e.b):
        state = _mix(state ^ w)
    return (state >> 11) * _INV_2_53


def is_open(cfg: SamplerConfig, e: Edge, p: float) -> bool:
    """Whether the edge is p-open: uniform(cfg, e) < p (monotone in p)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return uniform(cfg, e) < p


# ---------------------------------------------------------------------------
# Vectorized path.  Same contract, bit-identical output (tested).


def canonicalize_rows(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reorder endpoint rows so that a <lex b rowwise; errors on equal rows."""
    diff = a.astype(np.int64) - b.astype(np.int64)
    nonzero = diff != 0
    if not nonzero.any(axis=1).all():
        raise ValueError("degenerate edge rows with equal endpoints")
    first = np.argmax(nonzero, axis=1)
    lead = diff[np.arange(len(a)), first]
    swap = lead > 0
    if swap.any():
        a = a.copy()
        b = b.copy()
        a[swap], b[swap] = b[swap], a[swap].copy()
    return a, b


def uniform_batch(
    seed: int,
    trials: np.ndarray | int,
    d: int,
    a: np.ndarray,
    b: np.ndarray,
    assume_canonical: bool = False,
) -> np.ndarray:
    """Variates for N edges given as (N, d) int32 endpoint arrays.

    `trials` may be a scalar or a per-row array.  Rows are canonicalized unless
    the caller asserts they already are.
    """
    a = np.ascontiguousarray(a, dtype=np.int32)
    b = np.ascontiguousarray(b, dtype=np.int32)
    if not assume_canonical:
        a, b = canonicalize_rows(a, b)
    n = a.shape[0]
    seed_state = np.uint64(_mix(seed & _MASK))
    trials_arr = np.asarray(trials, dtype=np.uint64)
    state = _mix_vec(seed_state ^ trials_arr)
    if state.ndim == 0:
        state = np.full(n, state, dtype=np.uint64)
    # words: [d, a_1..a_d, b_1..b_d] as u32, zero-padded, packed LE into u64
    n32 = 1 + 2 * d
    nw = (n32 + 1) // 2
    u32 = np.zeros((n, 2 * nw), dtype=np.uint32)
    u32[:, 0] = np.uint32(d)
    u32[:, 1 : 1 + d] = a.view(np.uint32)
    u32[:, 1 + d : 1 + 2 * d] = b.view(np.uint32)
    for j in range(nw):
        w = u32[:, 2 * j].astype(np.uint64) | (u32[:, 2 * j + 1].astype(np.uint64) << _U64_32)
        state = _mix_vec(state ^ w)
    return (state >> _U64_11) * _INV_2_53
