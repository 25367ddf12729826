"""Statistical validation and reporting.

Implements the exact paired Wilcoxon signed-rank test used to compare
selection strategies, Pearson correlation for the token-count diagnostics,
mean/std summaries, and the scatter/report exports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from ._validation import check_vector
from .corpusio import ScoreRecord


@dataclass
class PairedResults:
    """Matched metric values (e.g. WER) for two methods over the same cells."""

    labels: list[str]
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.a = check_vector(self.a, "a")
        self.b = check_vector(self.b, "b")
        self.labels = list(self.labels)
        if not (len(self.labels) == self.a.shape[0] == self.b.shape[0]):
            raise ValueError("labels, a and b must have equal length")


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float  # min(w_plus, w_minus)
    p_value: float
    n_eff: int
    w_plus: float
    w_minus: float


def _exact_null_cdf_counts(n: int) -> np.ndarray:
    """Distribution of T = sum of a random subset of ranks {1..n}.

    Returns integer counts over sums 0..n(n+1)/2; each of the 2^n sign
    assignments contributes one count. Computed by subset-sum convolution,
    which tallies exactly the same assignments as a literal enumeration.
    """
    top = n * (n + 1) // 2
    counts = np.zeros(top + 1, dtype=np.int64)
    counts[0] = 1
    for r in range(1, n + 1):
        counts[r:] = counts[r:] + counts[:-r]
    return counts


def wilcoxon_signed_rank(pairs: PairedResults) -> WilcoxonResult:
    """Two-tailed paired Wilcoxon signed-rank test.

    Zero differences are dropped (n_eff reports the remainder) and tied
    absolute differences receive mid-ranks. For n_eff <= 25 the p-value is
    exact: the observed statistic is referred to the null distribution of
    signed-rank sums enumerated over all 2^n_eff sign assignments of the
    ranks 1..n_eff, with a fractional mid-rank statistic rounded
    conservatively toward the distribution center (the convention of
    mainstream exact implementations, which reproduces published values
    such as p = 2/2^12 for 12 same-sign pairs). Above n_eff = 25 a normal
    approximation with tie correction is used.
    """
    d = pairs.a - pairs.b
    d = d[d != 0.0]
    n = int(d.shape[0])
    if n == 0:
        raise ValueError("all differences are zero; test undefined")

    absd = np.abs(d)
    ranks = rankdata(absd)
    w_plus = float(ranks[d > 0].sum())
    total = n * (n + 1) / 2.0
    w_minus = total - w_plus
    w_lo = min(w_plus, w_minus)

    if n <= 25:
        counts = _exact_null_cdf_counts(n)
        denom = 2**n
        # mid-ranks can make the statistic non-integral while the enumerated
        # null is integral; round conservatively toward the center so the
        # result is symmetric in the two samples
        upper_tail = int(counts[math.floor(w_plus):].sum())
        lower_tail = int(counts[: math.ceil(w_plus) + 1].sum())
        p = min(1.0, 2.0 * min(upper_tail, lower_tail) / denom)
    else:
        mu = n * (n + 1) / 4.0
        _, tie_counts = np.unique(absd, return_counts=True)
        tie_term = float(((tie_counts**3 - tie_counts).sum())) / 48.0
        sigma2 = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term
        z = (w_plus - mu) / math.sqrt(sigma2)
        p = math.erfc(abs(z) / math.sqrt(2.0))

    return WilcoxonResult(statistic=w_lo, p_value=p, n_eff=n, w_plus=w_plus, w_minus=w_minus)


def pearson_r(xs, ys) -> float:
    """Sample Pearson correlation coefficient."""
    x = check_vector(xs, "xs")
    y = check_vector(ys, "ys")
    if x.shape[0] != y.shape[0]:
        raise ValueError("xs and ys must have equal length")
    if x.shape[0] < 2:
        raise ValueError("need at least 2 points")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = float(np.sqrt(np.dot(xc, xc)))
    sy = float(np.sqrt(np.dot(yc, yc)))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("zero variance series")
    r = float(np.dot(xc, yc)) / (sx * sy)
    return min(1.0, max(-1.0, r))


@dataclass(frozen=True)
class Summary:
    mean: float
    std: float
    n: int
    degenerate_std: bool  # True when n == 1 and std is reported as 0


def summarize(values) -> Summary:
    """Arithmetic mean and sample standard deviation (ddof=1)."""
    v = check_vector(values, "values")
    if v.shape[0] == 0:
        raise ValueError("empty input")
    if v.shape[0] == 1:
        return Summary(mean=float(v[0]), std=0.0, n=1, degenerate_std=True)
    return Summary(mean=float(v.mean()), std=float(v.std(ddof=1)), n=int(v.shape[0]),
                   degenerate_std=False)


def export_scatter(scores: list[ScoreRecord], scaled: bool) -> str:
    """Two-column TSV (token_count, score) for external plotting."""
    column = "catds" if scaled else "raw_similarity"
    lines = [f"token_count\t{column}"]
    for r in scores:
        value = r.catds if scaled else r.raw_similarity
        lines.append(f"{r.token_count}\t{value!r}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ResultRow:
    condition: str
    method: str
    size: int
    metric: float


_RESULTS_HEADER = "condition\tmethod\tsize\tmetric"


def read_results_table(path) -> list[ResultRow]:
    """Read an experiment results TSV: condition, method, size, metric."""
    rows: list[ResultRow] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != _RESULTS_HEADER:
            raise ValueError(f"{path}: expected header {_RESULTS_HEADER!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValueError(f"{path}: malformed results line {lineno}")
            try:
                rows.append(ResultRow(parts[0], parts[1], int(parts[2]), float(parts[3])))
            except ValueError as exc:
                raise ValueError(f"{path}: malformed results line {lineno}: {exc}") from exc
    return rows


def build_report(rows: list[ResultRow], baseline: str = "random") -> str:
    """Summaries per (method, size) plus a paired Wilcoxon test of every
    method against the baseline over matching (condition, size) cells.

    Multiple rows for one (condition, method, size) cell (e.g. random
    repeats) are averaged before pairing.
    """
    if not rows:
        raise ValueError("empty results table")
    cells: dict[tuple[str, str, int], list[float]] = {}
    for row in rows:
        cells.setdefault((row.condition, row.method, row.size), []).append(row.metric)
    methods = sorted({m for _, m, _ in cells})
    sizes = sorted({s for _, _, s in cells})

    lines = ["# summary: method, size, mean, std, n"]
    for method in methods:
        for size in sizes:
            values = [v for (c, m, s), vs in sorted(cells.items()) if m == method and s == size for v in vs]
            if not values:
                continue
            stats = summarize(np.array(values, dtype=np.float64))
            lines.append(f"{method}\t{size}\t{stats.mean:.4f}\t{stats.std:.4f}\t{stats.n}")

    if baseline in methods:
        lines.append("")
        lines.append(f"# wilcoxon signed-rank vs {baseline}: method, n_cells, W, p")
        base_cells = {
            (c, s): float(np.mean(vs)) for (c, m, s), vs in cells.items() if m == baseline
        }
        for method in methods:
            if method == baseline:
                continue
            labels, a, b = [], [], []
            for (c, m, s), vs in sorted(cells.items()):
                if m != method or (c, s) not in base_cells:
                    continue
                labels.append(f"{c}:{s}")
                a.append(base_cells[(c, s)])
                b.append(float(np.mean(vs)))
            if not labels:
                continue
            result = wilcoxon_signed_rank(PairedResults(labels, np.array(a), np.array(b)))
            lines.append(
                f"{method}\t{result.n_eff}\t{result.statistic:g}\t{result.p_value:.6g}"
            )
    return "\n".join(lines) + "\n"
