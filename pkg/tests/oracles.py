"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written the slow, obvious way with the
standard library only (plain loops, fractions, exhaustive enumeration) so
that agreement with the optimized numpy code is meaningful evidence and
not two copies of the same mistake.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache


def cosine_oracle(x, y):
    """Cosine similarity via plain accumulation loops."""
    if len(x) != len(y):
        raise ValueError("length mismatch")
    dot = math.fsum(float(a) * float(b) for a, b in zip(x, y))
    nx = math.fsum(float(a) * float(a) for a in x)
    ny = math.fsum(float(b) * float(b) for b in y)
    if nx == 0.0 or ny == 0.0:
        raise ValueError("zero vector")
    return dot / math.sqrt(nx * ny)


def nearest_centroid_oracle(centroids, frames):
    """Brute-force nearest-centroid scan, first centroid wins ties."""
    out = []
    for frame in frames:
        best_id = 0
        best_d = math.inf
        for j, c in enumerate(centroids):
            d = math.fsum((float(f) - float(v)) ** 2 for f, v in zip(frame, c))
            if d < best_d:
                best_d = d
                best_id = j
        out.append(best_id)
    return out


def exhaustive_two_means(points):
    """Optimal 2-means objective by enumerating every bipartition.

    Only feasible for small inputs; callers keep len(points) <= 12.
    Returns (objective, partition) where partition is a tuple of 0/1
    cluster marks in input order.
    """
    n = len(points)
    if n < 2:
        raise ValueError("need at least two points")
    dim = len(points[0])
    best = (math.inf, None)
    # mask enumerates membership of cluster 1; skip empty/full assignments
    for mask in range(1, (1 << n) - 1):
        groups = ([], [])
        for i in range(n):
            groups[(mask >> i) & 1].append(points[i])
        obj = 0.0
        for grp in groups:
            mean = [math.fsum(p[d] for p in grp) / len(grp) for d in range(dim)]
            obj += math.fsum(
                (p[d] - mean[d]) ** 2 for p in grp for d in range(dim)
            )
        if obj < best[0]:
            best = (obj, tuple((mask >> i) & 1 for i in range(n)))
    return best


def midranks(values):
    """Ranks 1..n with ties sharing the average of their positions."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


@lru_cache(maxsize=None)
def _signed_rank_null(n):
    """Distribution of sum(ranks with + sign) over all 2^n sign choices.

    Uses integer ranks 1..n (the null ignores observed ties). Returns a
    dict mapping each achievable sum to its assignment count.
    """
    counts = {}
    ranks = range(1, n + 1)
    for signs in itertools.product((0, 1), repeat=n):
        t = sum(r for r, s in zip(ranks, signs) if s)
        counts[t] = counts.get(t, 0) + 1
    return counts


def wilcoxon_oracle(a, b):
    """Exact two-sided signed-rank p-value by full enumeration.

    Zero differences are dropped. The observed statistic uses mid-ranks
    of |d|; the reference null enumerates sign assignments of integer
    ranks, and a non-integral statistic is rounded toward the center of
    the distribution for each tail so the test never overstates
    significance. Returns (w_plus, p).
    """
    diffs = [float(x) - float(y) for x, y in zip(a, b)]
    diffs = [d for d in diffs if d != 0.0]
    n = len(diffs)
    if n == 0:
        raise ValueError("all differences are zero")
    ranks = midranks([abs(d) for d in diffs])
    w_plus = math.fsum(r for d, r in zip(diffs, ranks) if d > 0)
    null = _signed_rank_null(n)
    hi = sum(c for t, c in null.items() if t >= math.floor(w_plus))
    lo = sum(c for t, c in null.items() if t <= math.ceil(w_plus))
    p = min(1.0, 2.0 * min(hi, lo) / (2 ** n))
    return w_plus, p


def quad_fit_3pt(points):
    """Exact quadratic through three points with distinct x, via Cramer.

    Returns (a, b, c) as floats computed from exact rational arithmetic.
    """
    if len(points) != 3:
        raise ValueError("need exactly three points")
    (x1, y1), (x2, y2), (x3, y3) = [
        (Fraction(float(x)), Fraction(float(y))) for x, y in points
    ]
    det = (x1 - x2) * (x1 - x3) * (x2 - x3)
    if det == 0:
        raise ValueError("x values must be distinct")
    a = ((y1 - y2) * (x1 - x3) - (y1 - y3) * (x1 - x2)) / det
    b = (y1 - y2) / (x1 - x2) - a * (x1 + x2)
    c = y1 - a * x1 * x1 - b * x1
    return float(a), float(b), float(c)


def pearson_oracle(xs, ys):
    """Pearson correlation from the raw definition."""
    n = len(xs)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    cov = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    vx = math.fsum((x - mx) ** 2 for x in xs)
    vy = math.fsum((y - my) ** 2 for y in ys)
    return cov / math.sqrt(vx * vy)


def collapse_oracle(seq):
    """Remove consecutive duplicates with a plain loop."""
    out = []
    for s in seq:
        if not out or out[-1] != s:
            out.append(s)
    return out


def encode_by_replay(symbols, merges, alphabet_size):
    """Encode by replaying the merge list in training order.

    Each merge (left, right) is applied in one left-to-right pass,
    never re-matching a token just produced. Token ids follow the
    trainer's scheme: base symbols keep their value, merge i becomes
    alphabet_size + i.
    """
    seq = list(symbols)
    for i, (left, right) in enumerate(merges):
        new_id = alphabet_size + i
        out = []
        pos = 0
        while pos < len(seq):
            if pos + 1 < len(seq) and seq[pos] == left and seq[pos + 1] == right:
                out.append(new_id)
                pos += 2
            else:
                out.append(seq[pos])
                pos += 1
        seq = out
    return seq


def freq_vector_oracle(token_seqs, vocab_size):
    """Token counting with a dict, densified to a list."""
    counts = [0] * vocab_size
    for seq in token_seqs:
        for t in seq:
            counts[int(t)] += 1
    return counts
