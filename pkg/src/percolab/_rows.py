"""Vectorized set operations on integer coordinate rows.

These back the cluster explorer's frontier bookkeeping.  Rows are compared
lexicographically; all functions are pure and allocation-only (no Python-level
loops over rows).
"""

from __future__ import annotations

import numpy as np


def lex_order(rows: np.ndarray) -> np.ndarray:
    """Permutation sorting rows lexicographically (first column is primary)."""
    if rows.shape[0] <= 1:
        return np.arange(rows.shape[0])
    return np.lexsort(rows.T[::-1])


def unique_rows(rows: np.ndarray) -> np.ndarray:
    """Distinct rows, in lexicographic order."""
    if rows.shape[0] <= 1:
        return rows.copy()
    s = rows[lex_order(rows)]
    keep = np.ones(s.shape[0], dtype=bool)
    keep[1:] = np.any(s[1:] != s[:-1], axis=1)
    return s[keep]


def isin_rows(query: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Boolean mask: which rows of `query` appear among the rows of `table`."""
    nq = query.shape[0]
    if nq == 0 or table.shape[0] == 0:
        return np.zeros(nq, dtype=bool)
    tu = unique_rows(table)
    comb = np.concatenate([tu, query], axis=0)
    from_table = np.zeros(comb.shape[0], dtype=bool)
    from_table[: tu.shape[0]] = True
    order = lex_order(comb)
    s = comb[order]
    new_run = np.ones(s.shape[0], dtype=bool)
    new_run[1:] = np.any(s[1:] != s[:-1], axis=1)
    run_id = np.cumsum(new_run) - 1
    run_has_table = np.zeros(run_id[-1] + 1, dtype=bool)
    np.logical_or.at(run_has_table, run_id, from_table[order])
    hit_sorted = run_has_table[run_id]
    out = np.empty(comb.shape[0], dtype=bool)
    out[order] = hit_sorted
    return out[tu.shape[0] :]
