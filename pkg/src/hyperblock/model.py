"""Closed-form model algebra for the non-uniform hypergraph block model.

Everything here is deterministic arithmetic on the model parameters: the
signal-to-noise ratio and the order-subset selection built on it, the
expected adjacency matrix (entries, dense form, eigenvalues), and the
decision thresholds consumed by the correction, merging, and set-filtering
stages of the detection pipeline.

Conventions used throughout:

* ``comb(x, j)`` is 0 whenever ``floor(x) < j`` (empty-set convention).
* Fractional block-size expressions (``n/k``, ``nu*n/(2k)``, ...) are
  floored before entering a binomial coefficient.
* Rates are per-order pairs ``(a_m, b_m)`` with ``a_m >= b_m >= 0``; the
  within-block connection probability of an order-``m`` edge is
  ``a_m / comb(n, m-1)`` and the cross-block one is ``b_m / comb(n, m-1)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModelParams",
    "OrderSubset",
    "ExpectedRates",
    "Thresholds",
    "comb_floor",
    "degree_scale",
    "snr_subset",
    "preprocess_select",
    "expected_rates",
    "expected_adjacency",
    "expected_eigenvalues",
    "blue_conditional_probs",
    "correction_threshold",
    "merging_threshold",
    "binary_correction_threshold",
    "blue_density_thresholds",
    "thresholds",
    "error_rate_constant",
    "block_sizes",
    "ResourceLimitError",
]

DENSE_CAP_DEFAULT = 2000


class ResourceLimitError(RuntimeError):
    """Requested object exceeds a configured dense-size cap."""


def comb_floor(x: float, j: int) -> int:
    """Binomial coefficient C(floor(x), j), 0 when floor(x) < j or j < 0.

    The floor absorbs a 1e-9 rounding slack so block-size expressions that
    are integers in exact arithmetic (e.g. 0.9 * 40 / 4) do not get
    truncated by floating-point noise.
    """
    if j < 0:
        return 0
    xi = math.floor(x + 1e-9)
    if xi < j:
        return 0
    return math.comb(xi, j)


@dataclass(frozen=True)
class ModelParams:
    """Model parameters: n vertices, k blocks, per-order rate pairs.

    ``orders`` maps the edge order m (>= 2) to the pair ``(a_m, b_m)`` of
    within-block and cross-block rates.
    """

    n: int
    k: int
    orders: dict[int, tuple[float, float]]

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("n must be positive")
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if not self.orders:
            raise ValueError("at least one order is required")
        if self.n < self.k:
            raise ValueError("n must be at least k (nonempty blocks)")
        for m, (a, b) in self.orders.items():
            if m < 2:
                raise ValueError(f"edge order {m} < 2")
            if m > self.n:
                raise ValueError(f"edge order {m} exceeds n = {self.n}")
            if not (a >= b >= 0):
                raise ValueError(f"order {m}: need a_m >= b_m >= 0, got ({a}, {b})")
        # normalize to a plain sorted dict so iteration order is stable
        object.__setattr__(self, "orders", dict(sorted(self.orders.items())))

    @property
    def max_order(self) -> int:
        return max(self.orders)


@dataclass(frozen=True)
class OrderSubset:
    """A nonempty subset of edge orders together with its maximum element."""

    members: frozenset[int]

    def __post_init__(self):
        if not self.members:
            raise ValueError("order subset must be nonempty")
        object.__setattr__(self, "members", frozenset(int(m) for m in self.members))

    @property
    def m_max(self) -> int:
        return max(self.members)

    def sorted(self) -> tuple[int, ...]:
        return tuple(sorted(self.members))

    def __iter__(self):
        return iter(self.sorted())

    def __contains__(self, m) -> bool:
        return m in self.members

    def __len__(self) -> int:
        return len(self.members)


def _check_subset(params: ModelParams, subset: OrderSubset) -> tuple[int, ...]:
    ms = subset.sorted()
    missing = [m for m in ms if m not in params.orders]
    if missing:
        raise ValueError(f"orders {missing} not present in the model")
    return ms


@dataclass(frozen=True)
class ExpectedRates:
    """Expected adjacency entries: within (alpha) and cross (beta), per order."""

    alpha: float
    beta: float
    alpha_m: dict[int, float]
    beta_m: dict[int, float]


@dataclass(frozen=True)
class Thresholds:
    """Decision thresholds for the refinement stages at a given nu.

    mu_c drives the red-edge correction vote, mu_m the blue-edge merging
    test, and (mu_1, mu_t, mu_2) the blue-density filtering of candidate
    sets.  psi_m / phi_m are the per-order probabilities that an edge is
    blue conditioned on it not being red, within and across blocks.
    """

    nu: float
    d: float
    mu_c: float
    mu_m: float
    mu_1: float
    mu_2: float
    mu_t: float
    psi_m: dict[int, float] = field(repr=False)
    phi_m: dict[int, float] = field(repr=False)


def degree_scale(params: ModelParams, subset: OrderSubset) -> float:
    """Degree scale d = sum over the subset of (m-1) * a_m."""
    ms = _check_subset(params, subset)
    return float(sum((m - 1) * params.orders[m][0] for m in ms))


def snr_subset(params: ModelParams, subset: OrderSubset) -> float:
    """Signal-to-noise ratio of the sub-model restricted to ``subset``.

    Returns ``num^2 / den`` with
    ``num = sum (m-1) (a_m - b_m) / k^(m-1)`` and
    ``den = sum (m-1) ((a_m - b_m) / k^(m-1) + b_m)``, and 0 when the
    denominator vanishes (all rates in the subset are zero).
    """
    ms = _check_subset(params, subset)
    k = params.k
    num = 0.0
    den = 0.0
    for m in ms:
        a, b = params.orders[m]
        diff = (a - b) / k ** (m - 1)
        num += (m - 1) * diff
        den += (m - 1) * (diff + b)
    if den == 0.0:
        return 0.0
    return num * num / den


def preprocess_select(params: ModelParams) -> OrderSubset:
    """Exhaustively pick the order subset with maximal signal-to-noise ratio.

    Ties are broken by smaller cardinality, then by lexicographically
    smallest sorted member tuple.
    """
    if all(a == 0 and b == 0 for a, b in params.orders.values()):
        raise ValueError("all rates are zero; no subset carries signal")
    orders = sorted(params.orders)
    best = None
    best_key = None
    for r in range(1, len(orders) + 1):
        for combo in itertools.combinations(orders, r):
            subset = OrderSubset(frozenset(combo))
            snr = snr_subset(params, subset)
            key = (-snr, len(combo), combo)
            if best_key is None or key < best_key:
                best_key = key
                best = subset
    return best


def block_sizes(n: int, k: int) -> np.ndarray:
    """Ground-truth block sizes: floor(n/k) each, remainder on the lowest ids."""
    base = n // k
    sizes = np.full(k, base, dtype=np.int64)
    sizes[: n % k] += 1
    return sizes


def expected_rates(params: ModelParams) -> ExpectedRates:
    """Expected adjacency entries alpha (within-block) and beta (cross-block)."""
    n, k = params.n, params.k
    nk = n // k
    alpha_m: dict[int, float] = {}
    beta_m: dict[int, float] = {}
    for m, (a, b) in params.orders.items():
        denom = math.comb(n, m - 1)
        same = comb_floor(nk - 2, m - 2)
        allp = comb_floor(n - 2, m - 2)
        alpha_m[m] = (same * a + (allp - same) * b) / denom
        beta_m[m] = allp * b / denom
    return ExpectedRates(
        alpha=float(sum(alpha_m.values())),
        beta=float(sum(beta_m.values())),
        alpha_m=alpha_m,
        beta_m=beta_m,
    )


def expected_adjacency(params: ModelParams, dense_cap: int = DENSE_CAP_DEFAULT) -> np.ndarray:
    """Dense expected adjacency matrix: alpha within blocks, beta across, 0 diagonal."""
    n = params.n
    if n > dense_cap:
        raise ResourceLimitError(f"n = {n} exceeds the dense cap {dense_cap}")
    rates = expected_rates(params)
    labels = np.repeat(np.arange(params.k), block_sizes(n, params.k))
    same = labels[:, None] == labels[None, :]
    ea = np.where(same, rates.alpha, rates.beta)
    np.fill_diagonal(ea, 0.0)
    return ea


def expected_eigenvalues(params: ModelParams) -> tuple[float, float, float]:
    """Eigenvalues of the expected adjacency for exact equal blocks.

    Returns ``(lam1, lam2, lam_rest)`` where lam2 has multiplicity k-1 and
    lam_rest has multiplicity n-k.  Requires k | n.
    """
    n, k = params.n, params.k
    if n % k != 0:
        raise ValueError("closed-form eigenvalues require k to divide n")
    rates = expected_rates(params)
    nk = n // k
    lam1 = nk * (rates.alpha + (k - 1) * rates.beta) - rates.alpha
    lam2 = nk * (rates.alpha - rates.beta) - rates.alpha
    return float(lam1), float(lam2), float(-rates.alpha)


def blue_conditional_probs(
    params: ModelParams, subset: OrderSubset
) -> dict[int, tuple[float, float]]:
    """Per-order (psi_m, phi_m): P(edge is blue | edge is not red).

    psi_m uses the within-block rate, phi_m the cross-block rate; both are
    ``q / (1 - q)`` with ``q = rate / (2 comb(n, m-1))``.
    """
    ms = _check_subset(params, subset)
    n = params.n
    out: dict[int, tuple[float, float]] = {}
    for m in ms:
        a, b = params.orders[m]
        denom = 2.0 * math.comb(n, m - 1)
        qa, qb = a / denom, b / denom
        if qa >= 1.0 or qb >= 1.0:
            raise ValueError(f"order {m}: rate / (2 comb(n, m-1)) must be < 1")
        out[m] = (qa / (1.0 - qa), qb / (1.0 - qb))
    return out


def _check_nu(nu: float) -> None:
    if not 0.5 < nu < 1.0:
        raise ValueError(f"nu must lie in (0.5, 1), got {nu}")


def correction_threshold(params: ModelParams, subset: OrderSubset, nu: float) -> float:
    """Red-edge correction threshold mu_C.

    Midpoint of the expected weighted red-neighbor counts of a correctly
    and an incorrectly assigned vertex, given nu-correct candidate sets of
    size n/(2k).
    """
    _check_nu(nu)
    ms = _check_subset(params, subset)
    n, k = params.n, params.k
    total = 0.0
    for m in ms:
        a, b = params.orders[m]
        denom = 2.0 * math.comb(n, m - 1)
        good = comb_floor(nu * n / (2 * k), m - 1)
        bad = comb_floor((1.0 - nu) * n / (2 * k), m - 1)
        base = comb_floor(n / (2 * k), m - 1)
        total += (m - 1) * ((good + bad) * (a - b) / denom + 2.0 * base * b / denom)
    return 0.5 * total


def merging_threshold(params: ModelParams, subset: OrderSubset, nu: float) -> float:
    """Blue-edge merging threshold mu_M (same shape as mu_C with psi/phi rates)."""
    _check_nu(nu)
    ms = _check_subset(params, subset)
    n, k = params.n, params.k
    probs = blue_conditional_probs(params, subset)
    total = 0.0
    for m in ms:
        psi, phi = probs[m]
        good = comb_floor(nu * n / (2 * k), m - 1)
        bad = comb_floor((1.0 - nu) * n / (2 * k), m - 1)
        base = comb_floor(n / (2 * k), m - 1)
        total += (m - 1) * ((good + bad) * (psi - phi) + 2.0 * base * phi)
    return 0.5 * total


def binary_correction_threshold(params: ModelParams, subset: OrderSubset, nu: float) -> float:
    """Blue cross-neighbor threshold for the two-block correction stage.

    Midpoint of the expected weighted blue cross-neighbor counts of a
    correctly and an incorrectly placed vertex when the two estimated
    sides have size n/2 and are nu-correct; built from psi_m/phi_m like the
    merging threshold but with half-sized (n/2) blocks.
    """
    _check_nu(nu)
    ms = _check_subset(params, subset)
    n = params.n
    probs = blue_conditional_probs(params, subset)
    total = 0.0
    for m in ms:
        psi, phi = probs[m]
        good = comb_floor(nu * n / 2, m - 1)
        bad = comb_floor((1.0 - nu) * n / 2, m - 1)
        base = comb_floor(n / 2, m - 1)
        total += (m - 1) * ((good + bad) * (psi - phi) + 2.0 * base * phi)
    return 0.5 * total


def blue_density_thresholds(
    params: ModelParams, subset: OrderSubset, nu: float
) -> tuple[float, float, float]:
    """Blue-density separation thresholds (mu_1, mu_2, mu_T) for candidate sets.

    mu_1 upper-bounds the expected weighted blue-edge count inside a set of
    size n/(2k) that is at most nu-aligned with every block; mu_2 lower-bounds
    it when the set is at least (1+nu)/2-aligned with one block; mu_T is
    their midpoint.
    """
    _check_nu(nu)
    if params.k < 2:
        raise ValueError("k must be at least 2")
    ms = _check_subset(params, subset)
    n, k = params.n, params.k
    mu1 = 0.0
    mu2 = 0.0
    for m in ms:
        a, b = params.orders[m]
        denom = math.comb(n, m - 1)
        w = m * (m - 1)
        noise = comb_floor(n / (2 * k), m) * b / denom
        split1 = comb_floor(nu * n / (2 * k), m) + comb_floor((1.0 - nu) * n / (2 * k), m)
        split2 = comb_floor((1.0 + nu) * n / (4 * k), m) + (k - 1) * comb_floor(
            (1.0 - nu) * n / (4 * k * (k - 1)), m
        )
        mu1 += w * (split1 * (a - b) / denom + noise)
        mu2 += w * (split2 * (a - b) / denom + noise)
    mu1 *= 0.5
    mu2 *= 0.5
    return mu1, mu2, 0.5 * (mu1 + mu2)


def thresholds(params: ModelParams, subset: OrderSubset, nu: float) -> Thresholds:
    """Bundle every refinement threshold for one (subset, nu) choice."""
    probs = blue_conditional_probs(params, subset)
    mu1, mu2, mut = blue_density_thresholds(params, subset, nu)
    return Thresholds(
        nu=nu,
        d=degree_scale(params, subset),
        mu_c=correction_threshold(params, subset, nu),
        mu_m=merging_threshold(params, subset, nu),
        mu_1=mu1,
        mu_2=mu2,
        mu_t=mut,
        psi_m={m: pq[0] for m, pq in probs.items()},
        phi_m={m: pq[1] for m, pq in probs.items()},
    )


def error_rate_constant(subset: OrderSubset, nu: float, k: int) -> float:
    """Exponential error-rate constant for the selected subset (reported only).

    The misclassification fraction decays like exp(-const * SNR); the
    constant depends on the maximal order and on nu, with a different
    normalization for the two-block case.
    """
    _check_nu(nu)
    mm = subset.m_max
    gap = nu ** (mm - 1) - (1.0 - nu) ** (mm - 1)
    if k == 2:
        return gap * gap / (8.0 * (mm - 1) ** 2)
    return gap * gap / ((mm - 1) ** 2 * 2.0 ** (2 * mm + 3))
