"""Independent brute-force oracles.

Everything here is deliberately naive -- direct summation, exhaustive
enumeration over Pruefer sequences, full path enumeration -- and shares no
code with the implementations under test.
"""

from __future__ import annotations

import itertools
import math


# ---------------------------------------------------------------------------
# Mutual information: direct cell-by-cell summation
# ---------------------------------------------------------------------------


def mi_brute(table) -> float:
    rows = len(table)
    cols = len(table[0])
    total = sum(sum(row) for row in table)
    row_sums = [sum(table[i][j] for j in range(cols)) for i in range(rows)]
    col_sums = [sum(table[i][j] for i in range(rows)) for j in range(cols)]
    info = 0.0
    for i in range(rows):
        for j in range(cols):
            nij = table[i][j]
            if nij == 0:
                continue
            pij = nij / total
            pi = row_sums[i] / total
            pj = col_sums[j] / total
            info += pij * math.log2(pij / (pi * pj))
    return info


# ---------------------------------------------------------------------------
# Spanning trees: exhaustive enumeration via Pruefer sequences
# ---------------------------------------------------------------------------


def pruefer_to_tree(seq: tuple[int, ...], n: int) -> list[tuple[int, int]]:
    degree = [1] * n
    for node in seq:
        degree[node] += 1
    edges = []
    for node in seq:
        for leaf in range(n):
            if degree[leaf] == 1:
                edges.append((min(leaf, node), max(leaf, node)))
                degree[leaf] -= 1
                degree[node] -= 1
                break
    u, v = [i for i in range(n) if degree[i] == 1]
    edges.append((u, v))
    return edges


def all_spanning_trees(n: int):
    """Every labeled tree on n nodes (n^(n-2) of them)."""
    if n == 1:
        yield []
        return
    if n == 2:
        yield [(0, 1)]
        return
    for seq in itertools.product(range(n), repeat=n - 2):
        yield pruefer_to_tree(seq, n)


def max_spanning_tree_weight(n: int, weight) -> float:
    """Maximum total weight over all spanning trees; weight(i, j) callable."""
    best = -math.inf
    for tree in all_spanning_trees(n):
        total = sum(weight(i, j) for i, j in tree)
        best = max(best, total)
    return best


# ---------------------------------------------------------------------------
# Hidden-state models: full path enumeration
# ---------------------------------------------------------------------------


def path_weight(pi, a, b, path, obs) -> float:
    w = pi[path[0]] * b[path[0]][obs[0]]
    for t in range(1, len(obs)):
        w *= a[path[t - 1]][path[t]] * b[path[t]][obs[t]]
    return w


def posterior_brute(pi, a, b, obs) -> list[float]:
    """P(final state | observations) by summing every state path."""
    n = len(pi)
    T = len(obs)
    mass = [0.0] * n
    for path in itertools.product(range(n), repeat=T):
        mass[path[-1]] += path_weight(pi, a, b, path, obs)
    total = sum(mass)
    return [m / total for m in mass]


def predict_next_brute(pi, a, b, obs, n_symbols: int) -> list[float]:
    """P(next symbol | observations) by joint path-and-next enumeration,
    with one state transition before the emission."""
    n = len(pi)
    T = len(obs)
    scores = [0.0] * n_symbols
    for path in itertools.product(range(n), repeat=T):
        w = path_weight(pi, a, b, path, obs)
        for nxt in range(n):
            step = w * a[path[-1]][nxt]
            for sym in range(n_symbols):
                scores[sym] += step * b[nxt][sym]
    total = sum(scores)
    return [s / total for s in scores]


def loglik_brute(pi, a, b, obs) -> float:
    """log P(observations) by summing every state path."""
    n = len(pi)
    total = 0.0
    for path in itertools.product(range(n), repeat=len(obs)):
        total += path_weight(pi, a, b, path, obs)
    return math.log(total)


# ---------------------------------------------------------------------------
# Chain continuity: raw-JSON state scan
# ---------------------------------------------------------------------------


def continuity_scan(library_doc: dict, chain: list[str]):
    """(continuous, first_break) computed from the raw library JSON with
    plain dict equality over the state documents."""
    states = {s["id"]: (s["begin_state"], s["end_state"]) for s in library_doc["skills"]}
    for i in range(1, len(chain)):
        prev_end = states[chain[i - 1]][1]
        begin = states[chain[i]][0]
        if prev_end != begin:
            return False, i
    return True, None
