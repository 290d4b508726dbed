"""Two-class separation statistics: Fisher discriminant ratio, Mann-Whitney U
and per-feature genuine/spoof summaries."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

EXACT_MAX_N = 12
P_FLOOR = 5e-324


class DegenerateSeparationError(ValueError):
    pass


def fisher_discriminant_ratio(a, b) -> float:
    """(mean_a - mean_b)^2 / (var_a + var_b) with population variances."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("FDR needs at least two samples per class")
    diff2 = (a.mean() - b.mean()) ** 2
    spread = a.var() + b.var()
    if spread == 0.0:
        if diff2 == 0.0:
            return 0.0
        raise DegenerateSeparationError("degenerate separation: zero variance with distinct means")
    return float(diff2 / spread)


def midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties given their average rank."""
    order = np.argsort(values, kind="mergesort")
    sorted_vals = values[order]
    ranks = np.empty(values.size, dtype=np.float64)
    i = 0
    n = values.size
    while i < n:
        j = i
        while j + 1 < n and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


@lru_cache(maxsize=64)
def exact_u_distribution(n_a: int, n_b: int) -> np.ndarray:
    """Counts of U_a = 0..n_a*n_b over all C(n_a+n_b, n_a) untied labelings.

    The returned array is cached and shared; do not modify it.
    """
    counts = np.zeros(n_a * n_b + 1, dtype=np.int64)
    offset = n_a * (n_a + 1) // 2
    for combo in combinations(range(1, n_a + n_b + 1), n_a):
        counts[sum(combo) - offset] += 1
    counts.flags.writeable = False
    return counts


def _exact_p(u: float, n_a: int, n_b: int) -> float:
    counts = exact_u_distribution(n_a, n_b)
    total = counts.sum()
    k = int(round(u))
    lower = counts[: k + 1].sum() / total
    upper = counts[k:].sum() / total
    return float(min(1.0, 2.0 * min(lower, upper)))


def _normal_p(u: float, n_a: int, n_b: int, ranks: np.ndarray) -> float:
    n = n_a + n_b
    _, ties = np.unique(ranks, return_counts=True)
    tie_term = float(np.sum(ties**3 - ties))
    var = n_a * n_b / 12.0 * ((n + 1) - tie_term / (n * (n - 1))) if n > 1 else 0.0
    if var <= 0:
        return 1.0
    z = max(abs(u - n_a * n_b / 2.0) - 0.5, 0.0) / math.sqrt(var)
    return float(min(1.0, max(math.erfc(z / math.sqrt(2.0)), P_FLOOR)))


def mann_whitney_u(a, b, method: str = "auto") -> tuple[float, float]:
    """U statistic of sample ``a`` and its two-sided p-value.

    ``method="auto"`` enumerates exactly when ``len(a) + len(b) <= 12`` and
    there are no ties; otherwise the tie-corrected normal approximation
    with continuity correction is used.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("Mann-Whitney U needs non-empty samples")
    ranks = midranks(np.concatenate([a, b]))
    n_a, n_b = a.size, b.size
    u = float(ranks[:n_a].sum() - n_a * (n_a + 1) / 2.0)
    no_ties = np.unique(ranks).size == ranks.size
    if method == "auto":
        method = "exact" if (n_a + n_b <= EXACT_MAX_N and no_ties) else "normal"
    if method == "exact":
        if not no_ties:
            raise ValueError("exact p-value requires untied samples")
        return u, _exact_p(u, n_a, n_b)
    if method == "normal":
        return u, _normal_p(u, n_a, n_b, ranks)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class FeatureSeparation:
    name: str
    genuine_mean: float
    genuine_std: float
    spoof_mean: float
    spoof_std: float
    fdr: float | None
    u_statistic: float
    p_value: float
    delta: float


@dataclass(frozen=True)
class SeparationReport:
    illumination: str
    features: tuple[FeatureSeparation, ...]

    def by_name(self) -> dict[str, FeatureSeparation]:
        return {f.name: f for f in self.features}

    def top(self) -> FeatureSeparation:
        """Feature with the largest FDR; degenerate (perfect) separations rank first."""
        return max(self.features, key=lambda f: math.inf if f.fdr is None else f.fdr)

    def to_dict(self) -> dict:
        return {"illumination": self.illumination, "features": [asdict(f) for f in self.features]}


def separate(name: str, genuine, spoof) -> FeatureSeparation:
    g = np.asarray(genuine, dtype=np.float64)
    s = np.asarray(spoof, dtype=np.float64)
    try:
        fdr = fisher_discriminant_ratio(g, s)
    except DegenerateSeparationError:
        fdr = None
    u, p = mann_whitney_u(g, s)
    return FeatureSeparation(
        name=name,
        genuine_mean=float(g.mean()),
        genuine_std=float(g.std()),
        spoof_mean=float(s.mean()),
        spoof_std=float(s.std()),
        fdr=fdr,
        u_statistic=u,
        p_value=p,
        delta=float(g.mean() - s.mean()),
    )


def build_separation_report(features_by_class: Mapping[str, Mapping[str, Sequence[float]]],
                            illumination: str,
                            names: Sequence[str] | None = None) -> SeparationReport:
    """Per-feature statistics for ``{"genuine": {...}, "spoof": {...}}`` sample tables.

    Features are reported in ``names`` order when given, else in the
    genuine table's key order. A perfectly separated zero-variance feature
    reports ``fdr=None``.
    """
    for cls in ("genuine", "spoof"):
        if cls not in features_by_class:
            raise ValueError(f"missing class {cls!r}")
    gen, spf = features_by_class["genuine"], features_by_class["spoof"]
    names = list(gen.keys()) if names is None else list(names)
    rows = []
    for name in names:
        g, s = gen[name], spf[name]
        if len(g) < 2 or len(s) < 2:
            raise ValueError(f"feature {name!r} needs at least two samples per class")
        rows.append(separate(name, g, s))
    return SeparationReport(illumination, tuple(rows))
