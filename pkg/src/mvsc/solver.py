"""Augmented-Lagrangian solver for graph-regularized multi-view subspace
clustering.

Minimizes, over the shared representation Z and per-view column-sparse
errors E, the nuclear norm of Z plus lambda1 times the summed l2,1 norms
of the errors plus lambda2 times the graph regularizer (consistent part
plus alpha times complementary part), subject to X = X Z + E per view.
A copy variable Q carries the nuclear norm; multipliers Y1 (per view)
and Y2 enforce the constraints with a growing penalty mu.

The Z step solves the normal equations derived from the stationarity of
the Z subproblem:

    [lambda2 * sum_k (L_k + L_k^T) + mu (sum_k X_k^T X_k + I)] Z
        = sum_k X_k^T Y1_k + mu sum_k X_k^T (X_k - E_k) + mu Q - Y2

An alternative "as-printed" right-hand side (sign flipped on the error
term, no -Y2) is kept behind a switch for comparison; it does not satisfy
the stationarity condition and fails gradient checks.

Variants: "grmsc" (full model), "grmsc-naive" (first-order graphs used
directly, no consensus split), "msc-naive" (lambda2 = 0), and "lrr-bsv"
(independent single-view solves, best view selected by NMI against
ground truth).
"""

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from . import metrics as _metrics
from . import spectral as _spectral
from .errors import ValidationError
from .graphs import build_graph_set
from .linalg import inf_norm, l21_norm, nuclear_norm, prox_l21, solve_spd, svt

VARIANTS = ("grmsc", "grmsc-naive", "msc-naive", "lrr-bsv")
Z_UPDATE_MODES = ("derived", "as-printed")


def variant_label(variant):
    """Table-style label for a variant name, e.g. 'msc-naive' -> 'MSC_NAIVE'."""
    return variant.upper().replace("-", "_")


@dataclass(frozen=True)
class HyperParams:
    """Solver and graph hyperparameters with their defaults.

    knn left as None resolves to min(10, n // clusters) at fit time.
    """

    lambda1: float = 0.5
    lambda2: float = 1.0
    alpha: float = 1e-3
    knn: int | None = None
    rho: float = 1.9
    mu0: float = 1e-4
    mu_max: float = 1e6
    eps: float = 1e-6
    max_iter: int = 300
    seed: int = 0
    variant: str = "grmsc"
    z_update: str = "derived"

    def __post_init__(self):
        if self.lambda1 <= 0:
            raise ValidationError(f"lambda1 must be positive, got {self.lambda1}")
        if self.lambda2 < 0:
            raise ValidationError(f"lambda2 must be nonnegative, got {self.lambda2}")
        if self.alpha < 0:
            raise ValidationError(f"alpha must be nonnegative, got {self.alpha}")
        if self.knn is not None and self.knn < 1:
            raise ValidationError(f"knn must be at least 1, got {self.knn}")
        if self.rho <= 1:
            raise ValidationError(f"rho must exceed 1, got {self.rho}")
        if self.mu0 <= 0 or self.mu_max <= 0 or self.mu0 >= self.mu_max:
            raise ValidationError(
                f"need 0 < mu0 < mu_max, got mu0={self.mu0}, mu_max={self.mu_max}"
            )
        if self.eps <= 0:
            raise ValidationError(f"eps must be positive, got {self.eps}")
        if self.max_iter < 1:
            raise ValidationError(f"max_iter must be at least 1, got {self.max_iter}")
        if self.variant not in VARIANTS:
            raise ValidationError(f"unknown variant {self.variant!r}; one of {VARIANTS}")
        if self.z_update not in Z_UPDATE_MODES:
            raise ValidationError(
                f"unknown z_update {self.z_update!r}; one of {Z_UPDATE_MODES}"
            )

    @property
    def effective_lambda2(self):
        """lambda2 actually applied: zero for the graph-free variants."""
        return self.lambda2 if self.variant in ("grmsc", "grmsc-naive") else 0.0

    def resolve_knn(self, n, clusters):
        if self.knn is not None:
            k = self.knn
        else:
            k = min(10, n // max(clusters, 1))
        return max(1, min(k, n - 1))


@dataclass
class SolverState:
    """Mutable optimization state plus per-iteration diagnostics."""

    Z: np.ndarray
    Q: np.ndarray
    E: list
    Y1: list
    Y2: np.ndarray
    mu: float
    iteration: int = 0
    converged: bool = False
    # (max over views of ||X - XZ - E||_inf, ||Z - Q||_inf) per iteration
    residual_history: list = field(default_factory=list)
    view_residual_history: list = field(default_factory=list)
    mu_history: list = field(default_factory=list)
    objective_history: list = field(default_factory=list)
    selected_view: int | None = None


def _init_state(X_list, params):
    n = X_list[0].shape[1]
    rng = np.random.default_rng(params.seed)
    # uniform on [0, 1/n] keeps the initial reconstruction residual O(1)
    Z = rng.uniform(0.0, 1.0 / n, size=(n, n))
    return SolverState(
        Z=Z,
        Q=np.zeros((n, n)),
        E=[np.zeros_like(X) for X in X_list],
        Y1=[np.zeros_like(X) for X in X_list],
        Y2=np.zeros((n, n)),
        mu=params.mu0,
    )


def update_E(state, X_list, lambda1):
    """Column-sparse error update: per view the l2,1 prox at
    X - X Z + Y1 / mu with threshold lambda1 / mu."""
    out = []
    for X, Y1 in zip(X_list, state.Y1):
        T_E = X - X @ state.Z + Y1 / state.mu
        out.append(prox_l21(T_E, lambda1 / state.mu))
    return out


def update_Q(state):
    """Nuclear-norm copy update: singular value thresholding of
    Z + Y2 / mu at level 1 / mu."""
    return svt(state.Z + state.Y2 / state.mu, 1.0 / state.mu)


def update_Z(state, X_list, L_list, lambda2, mode="derived", gram=None):
    """Solve the Z subproblem's normal equations.

    gram may carry a precomputed sum of X^T X across views. mode
    "as-printed" reproduces the inconsistent closed form (error-term sign
    flipped, -Y2 missing) for comparison runs.
    """
    n = state.Z.shape[0]
    mu = state.mu
    if gram is None:
        gram = sum(X.T @ X for X in X_list)
    T_ZA = mu * (gram + np.eye(n))
    if lambda2 > 0 and L_list:
        T_ZA = T_ZA + lambda2 * sum(L + L.T for L in L_list)
    T_ZA = (T_ZA + T_ZA.T) / 2.0  # scrub accumulation asymmetry before Cholesky
    xty = sum(X.T @ Y1 for X, Y1 in zip(X_list, state.Y1))
    xte = sum(X.T @ E for X, E in zip(X_list, state.E))
    if mode == "derived":
        T_ZB = xty + mu * (gram - xte) + mu * state.Q - state.Y2
    elif mode == "as-printed":
        T_ZB = xty + mu * gram + mu * (xte + state.Q)
    else:
        raise ValidationError(f"unknown z_update mode {mode!r}")
    return solve_spd(T_ZA, T_ZB)


def update_multipliers(state, X_list, rho, mu_max, residuals=None):
    """Dual ascent on Y1 (per view) and Y2, then grow mu by rho up to mu_max.

    residuals, when given, is the precomputed pair (R_list, R_zq) with
    R_k = X_k - X_k Z - E_k and R_zq = Z - Q.
    """
    if residuals is None:
        R_list = [X - X @ state.Z - E for X, E in zip(X_list, state.E)]
        R_zq = state.Z - state.Q
    else:
        R_list, R_zq = residuals
    Y1 = [Y + state.mu * R for Y, R in zip(state.Y1, R_list)]
    Y2 = state.Y2 + state.mu * R_zq
    return Y1, Y2, min(rho * state.mu, mu_max)


def objective_value(state, X_list, graphs, params):
    """Objective of the full model at the current state, for diagnostics.

    The graph regularizer is evaluated from its defining double sums, not
    through the Laplacian trace identity, so this value can cross-check
    the solver's trace-form machinery.
    """
    val = nuclear_norm(state.Z)
    val += params.lambda1 * sum(l21_norm(E) for E in state.E)
    lam2 = params.effective_lambda2
    if lam2 > 0 and graphs is not None:
        val += lam2 * graphs.regularizer_direct(state.Z)
    return float(val)


def _alm_loop(X_list, L_list, params, lambda2, graphs=None, trace_objective=False):
    state = _init_state(X_list, params)
    gram = sum(X.T @ X for X in X_list)
    for _ in range(params.max_iter):
        state.E = update_E(state, X_list, params.lambda1)
        state.Q = update_Q(state)
        state.Z = update_Z(
            state, X_list, L_list, lambda2, mode=params.z_update, gram=gram
        )
        R_list = [X - X @ state.Z - E for X, E in zip(X_list, state.E)]
        R_zq = state.Z - state.Q
        view_resids = [inf_norm(R) for R in R_list]
        zq_resid = inf_norm(R_zq)

        state.mu_history.append(state.mu)
        state.view_residual_history.append(view_resids)
        state.residual_history.append((max(view_resids), zq_resid))
        if trace_objective:
            state.objective_history.append(
                objective_value(state, X_list, graphs, params)
            )

        state.Y1, state.Y2, state.mu = update_multipliers(
            state, X_list, params.rho, params.mu_max, residuals=(R_list, R_zq)
        )
        state.iteration += 1
        if max(view_resids) < params.eps and zq_resid < params.eps:
            state.converged = True
            break
    return state.Z, state


def _fit_best_single_view(dataset, params, trace_objective):
    if dataset.labels is None:
        raise ValidationError(
            "variant lrr-bsv selects the best view by NMI and needs ground-truth labels"
        )
    best = None
    for k, X in enumerate(dataset.views):
        Z, state = _alm_loop(
            [X], [], params, 0.0, trace_objective=trace_objective
        )
        A = _spectral.affinity_from_representation(Z)
        labels = _spectral.spectral_cluster(A, dataset.n_clusters, params.seed)
        score = _metrics.nmi(labels, dataset.labels)
        if best is None or score > best[0]:
            state.selected_view = k
            best = (score, Z, state)
    return best[1], best[2]


def fit(dataset, params, graphs=None, trace_objective=False):
    """Run the full optimization on a multi-view dataset.

    Returns (Z, state); state.converged is False when the iteration cap
    was reached with residuals still above eps (that is a flagged result,
    not an error). Graphs are built once up front unless a precomputed
    GraphSet is supplied (it must match the dataset and variant).
    Deterministic given (dataset, params).
    """
    if params.variant == "lrr-bsv":
        return _fit_best_single_view(dataset, params, trace_objective)
    X_list = dataset.views
    lambda2 = params.effective_lambda2
    if lambda2 > 0:
        if graphs is None:
            n = X_list[0].shape[1]
            knn = params.resolve_knn(n, dataset.n_clusters)
            mode = "first_order" if params.variant == "grmsc-naive" else "fused"
            graphs = build_graph_set(X_list, knn, params.alpha, mode=mode)
        L_list = graphs.laplacians
    else:
        graphs = None
        L_list = []
    return _alm_loop(
        X_list, L_list, params, lambda2, graphs=graphs,
        trace_objective=trace_objective,
    )


def replace_params(params, **changes):
    """HyperParams copy with fields changed (validation re-runs)."""
    return dataclasses.replace(params, **changes)
