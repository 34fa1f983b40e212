import numpy as np
import pytest

from mvsc.data import SyntheticSpec, generate_synthetic, normalize_views
from mvsc.errors import ValidationError
from mvsc.graphs import laplacian_from_weights, laplacian_quadratic
from mvsc.linalg import l21_norm, nuclear_norm, prox_l21
from mvsc.solver import (
    HyperParams,
    SolverState,
    fit,
    objective_value,
    update_E,
    update_multipliers,
    update_Q,
    update_Z,
)


def random_state(rng, n, v, mu=None):
    X_list = [rng.standard_normal((4 + k, n)) for k in range(v)]
    state = SolverState(
        Z=rng.standard_normal((n, n)),
        Q=rng.standard_normal((n, n)),
        E=[0.1 * rng.standard_normal(X.shape) for X in X_list],
        Y1=[0.1 * rng.standard_normal(X.shape) for X in X_list],
        Y2=0.1 * rng.standard_normal((n, n)),
        mu=float(mu if mu is not None else rng.uniform(0.05, 2.0)),
    )
    return X_list, state


def random_laplacians(rng, n, v):
    out = []
    for _ in range(v):
        W = rng.uniform(0, 1, (n, n))
        W = (W + W.T) / 2
        np.fill_diagonal(W, 0)
        out.append(laplacian_from_weights(W))
    return out


def z_subproblem_objective(Z, X_list, L_list, lambda2, state):
    """The quantity the Z step is supposed to minimize, written directly."""
    val = lambda2 * laplacian_quadratic(L_list, Z) if L_list else 0.0
    for X, E, Y1 in zip(X_list, state.E, state.Y1):
        R = X - X @ Z - E
        val += float(np.sum(Y1 * R)) + state.mu / 2 * float(np.sum(R * R))
    RQ = Z - state.Q
    val += float(np.sum(state.Y2 * RQ)) + state.mu / 2 * float(np.sum(RQ * RQ))
    return val


def fd_gradient(f, Z, h=1e-5):
    g = np.zeros_like(Z)
    for i in range(Z.shape[0]):
        for j in range(Z.shape[1]):
            Zp = Z.copy()
            Zp[i, j] += h
            Zm = Z.copy()
            Zm[i, j] -= h
            g[i, j] = (f(Zp) - f(Zm)) / (2 * h)
    return g


# ---------------------------------------------------------------- E step


def test_update_E_zero_when_reconstruction_exact():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((4, 6))
    _, state = random_state(rng, 6, 1)
    state.Z = np.eye(6)  # X @ I = X
    state.Y1 = [np.zeros_like(X)]
    out = update_E(state, [X], lambda1=0.5)
    assert np.all(out[0] == 0)


def test_update_E_vanishing_shrinkage_at_large_mu():
    rng = np.random.default_rng(1)
    X_list, state = random_state(rng, 8, 2, mu=1e9)
    out = update_E(state, X_list, lambda1=0.5)
    for X, E, Y1 in zip(X_list, out, state.Y1):
        T = X - X @ state.Z + Y1 / state.mu
        assert np.max(np.abs(E - T)) <= 0.5 / state.mu + 1e-12


def test_update_E_is_the_l21_prox():
    rng = np.random.default_rng(2)
    X_list, state = random_state(rng, 7, 2)
    lam1 = 0.8
    out = update_E(state, X_list, lam1)
    for X, E, Y1 in zip(X_list, out, state.Y1):
        T = X - X @ state.Z + Y1 / state.mu
        np.testing.assert_allclose(E, prox_l21(T, lam1 / state.mu), atol=1e-12)
        # prox optimality: beats small perturbations on the subproblem
        base = lam1 * l21_norm(E) + state.mu / 2 * np.sum((E - T) ** 2)
        for _ in range(50):
            D = rng.standard_normal(E.shape)
            D *= 1e-4 / np.linalg.norm(D)
            trial = lam1 * l21_norm(E + D) + state.mu / 2 * np.sum((E + D - T) ** 2)
            assert trial >= base - 1e-9


# ---------------------------------------------------------------- Q step


def test_update_Q_zero_input():
    rng = np.random.default_rng(3)
    _, state = random_state(rng, 5, 1, mu=1.0)
    state.Z = np.diag([1.0, 2.0, 0.0, 0.0, 0.0])
    state.Y2 = -state.Z  # Z + Y2/mu = 0
    assert np.all(update_Q(state) == 0)


def test_update_Q_diagonal_case():
    rng = np.random.default_rng(4)
    _, state = random_state(rng, 2, 1, mu=1.0)
    state.Z = np.diag([3.0, 0.5])
    state.Y2 = np.zeros((2, 2))
    np.testing.assert_allclose(update_Q(state), np.diag([2.0, 0.0]), atol=1e-12)


def test_update_Q_perturbation_optimality():
    rng = np.random.default_rng(5)
    _, state = random_state(rng, 6, 1)
    Q = update_Q(state)
    M = state.Z + state.Y2 / state.mu

    def obj(Qc):
        return nuclear_norm(Qc) / state.mu + 0.5 * np.sum((Qc - M) ** 2)

    base = obj(Q)
    for _ in range(100):
        D = rng.standard_normal(Q.shape)
        D *= 1e-3 / np.linalg.norm(D)
        assert obj(Q + D) >= base - 1e-9


# ---------------------------------------------------------------- Z step


def test_update_Z_no_graph_closed_form():
    # lambda2=0, Y=0, E=0, Q=0 forces Z = (sum X^T X + I)^-1 sum X^T X
    rng = np.random.default_rng(6)
    X_list, state = random_state(rng, 6, 2)
    state.E = [np.zeros_like(X) for X in X_list]
    state.Y1 = [np.zeros_like(X) for X in X_list]
    state.Y2 = np.zeros((6, 6))
    state.Q = np.zeros((6, 6))
    Z = update_Z(state, X_list, [], 0.0)
    G = sum(X.T @ X for X in X_list)
    expected = np.linalg.solve(G + np.eye(6), G)
    np.testing.assert_allclose(Z, expected, atol=1e-8)


def test_update_Z_identity_view_gives_half_identity():
    rng = np.random.default_rng(7)
    n = 5
    _, state = random_state(rng, n, 1)
    X = np.eye(n)
    state.E = [np.zeros((n, n))]
    state.Y1 = [np.zeros((n, n))]
    state.Y2 = np.zeros((n, n))
    state.Q = np.zeros((n, n))
    Z = update_Z(state, [X], [np.zeros((n, n))], 1.0)
    np.testing.assert_allclose(Z, np.eye(n) / 2, atol=1e-10)


def test_update_Z_gradient_vanishes():
    rng = np.random.default_rng(8)
    for _ in range(8):
        n = int(rng.integers(5, 12))
        v = int(rng.integers(1, 4))
        X_list, state = random_state(rng, n, v)
        L_list = random_laplacians(rng, n, v)
        lam2 = float(rng.uniform(0.1, 2.0))
        Z = update_Z(state, X_list, L_list, lam2)
        g = fd_gradient(
            lambda Zc: z_subproblem_objective(Zc, X_list, L_list, lam2, state), Z
        )
        assert np.linalg.norm(g) <= 1e-6 * (1 + np.linalg.norm(Z))


def test_update_Z_as_printed_is_not_stationary():
    """The literal closed form from the write-up flips the error term's
    sign and drops -Y2; its output fails the same gradient check."""
    rng = np.random.default_rng(9)
    failures = 0
    for _ in range(5):
        n, v = 8, 2
        X_list, state = random_state(rng, n, v)
        L_list = random_laplacians(rng, n, v)
        Z = update_Z(state, X_list, L_list, 0.5, mode="as-printed")
        g = fd_gradient(
            lambda Zc: z_subproblem_objective(Zc, X_list, L_list, 0.5, state), Z
        )
        if np.linalg.norm(g) > 1e-6 * (1 + np.linalg.norm(Z)):
            failures += 1
    assert failures >= 1


def test_update_Z_rejects_unknown_mode():
    rng = np.random.default_rng(10)
    X_list, state = random_state(rng, 4, 1)
    with pytest.raises(ValidationError):
        update_Z(state, X_list, [], 0.0, mode="bogus")


# ------------------------------------------------------- multipliers, mu


def test_update_multipliers_zero_residuals():
    rng = np.random.default_rng(11)
    X_list, state = random_state(rng, 5, 1, mu=1e-4)
    X = X_list[0]
    state.E = [X - X @ state.Z]  # residual exactly zero
    state.Q = state.Z.copy()
    Y1_old = [Y.copy() for Y in state.Y1]
    Y2_old = state.Y2.copy()
    Y1, Y2, mu = update_multipliers(state, X_list, rho=1.9, mu_max=1e6)
    np.testing.assert_allclose(Y1[0], Y1_old[0])
    np.testing.assert_allclose(Y2, Y2_old)
    assert mu == pytest.approx(1.9e-4)


def test_mu_caps_at_mu_max():
    rng = np.random.default_rng(12)
    X_list, state = random_state(rng, 4, 1, mu=1e6)
    _, _, mu = update_multipliers(state, X_list, rho=1.9, mu_max=1e6)
    assert mu == 1e6


def test_update_multipliers_ascent_direction():
    rng = np.random.default_rng(13)
    X_list, state = random_state(rng, 5, 2, mu=2.0)
    Y1, Y2, _ = update_multipliers(state, X_list, rho=1.9, mu_max=1e6)
    for X, E, Ynew, Yold in zip(X_list, state.E, Y1, state.Y1):
        np.testing.assert_allclose(Ynew - Yold, 2.0 * (X - X @ state.Z - E))
    np.testing.assert_allclose(Y2 - state.Y2, 2.0 * (state.Z - state.Q))


# ------------------------------------------------------------- objective


def test_objective_trivial_cases():
    rng = np.random.default_rng(14)
    X_list, state = random_state(rng, 6, 2)
    params = HyperParams(lambda1=0.7, lambda2=0.0, variant="msc-naive")
    state.Z = np.zeros((6, 6))
    state.E = [X.copy() for X in X_list]
    expected = 0.7 * sum(l21_norm(X) for X in X_list)
    assert objective_value(state, X_list, None, params) == pytest.approx(expected)
    state.E = [np.zeros_like(X) for X in X_list]
    assert objective_value(state, X_list, None, params) == 0.0


def test_objective_cross_module_recomputation():
    from mvsc.graphs import build_graph_set

    rng = np.random.default_rng(15)
    views = [rng.standard_normal((4, 12)) for _ in range(2)]
    gs = build_graph_set(views, 3, 0.01)
    _, state = random_state(rng, 12, 2)
    state.E = [0.1 * rng.standard_normal(X.shape) for X in views]
    params = HyperParams(lambda1=0.4, lambda2=0.9)
    got = objective_value(state, views, gs, params)
    expected = (
        nuclear_norm(state.Z)
        + 0.4 * sum(l21_norm(E) for E in state.E)
        + 0.9 * laplacian_quadratic(gs.laplacians, state.Z)
    )
    assert got == pytest.approx(expected, rel=1e-8)


# ------------------------------------------------------------------- fit


def small_dataset(seed=0, **kw):
    spec = SyntheticSpec(
        n=kw.pop("n", 45),
        clusters=3,
        dims=kw.pop("dims", (8, 10)),
        subspace_rank=2,
        noise_sigma=kw.pop("noise_sigma", 0.03),
        seed=seed,
        **kw,
    )
    return normalize_views(generate_synthetic(spec), "unit_column")


def test_fit_converges_on_small_synthetic():
    ds = small_dataset()
    Z, state = fit(ds, HyperParams(seed=1))
    assert state.converged
    assert state.iteration <= 200
    last_view, last_zq = state.residual_history[-1]
    assert last_view < 1e-6 and last_zq < 1e-6
    assert len(state.residual_history) == state.iteration


def test_fit_mu_monotone_and_capped():
    ds = small_dataset()
    _, state = fit(ds, HyperParams(seed=2))
    mus = np.array(state.mu_history)
    assert np.all(np.diff(mus) >= 0)
    assert np.all(mus <= 1e6)


def test_fit_deterministic():
    ds = small_dataset()
    p = HyperParams(seed=5)
    Z1, s1 = fit(ds, p)
    Z2, s2 = fit(ds, p)
    assert np.array_equal(Z1, Z2)
    assert s1.residual_history == s2.residual_history


def test_fit_single_view_lambda2_zero_matches_lrr_path():
    # with one view and no graph term, the full model IS plain LRR; the
    # best-single-view variant must therefore return the identical Z
    ds = small_dataset(dims=(9,))
    p = HyperParams(lambda2=0.0, variant="msc-naive", seed=3, max_iter=150)
    Z_full, _ = fit(ds, p)
    p_bsv = HyperParams(variant="lrr-bsv", seed=3, max_iter=150)
    Z_bsv, state = fit(ds, p_bsv)
    assert state.selected_view == 0
    np.testing.assert_array_equal(Z_full, Z_bsv)


def test_fit_lrr_bsv_needs_labels():
    ds = small_dataset()
    ds.labels = None
    with pytest.raises(ValidationError, match="labels"):
        fit(ds, HyperParams(variant="lrr-bsv"))


def test_fit_lrr_bsv_records_selected_view():
    ds = small_dataset()
    _, state = fit(ds, HyperParams(variant="lrr-bsv", seed=4, max_iter=150))
    assert state.selected_view in range(ds.n_views)


def test_fit_nuclear_norm_continuity_after_convergence():
    ds = small_dataset()
    Z, state = fit(ds, HyperParams(seed=6))
    assert state.converged
    assert abs(nuclear_norm(Z) - nuclear_norm(state.Q)) <= 1e-3


def test_fit_objective_trace_length():
    ds = small_dataset()
    _, state = fit(ds, HyperParams(seed=7), trace_objective=True)
    assert len(state.objective_history) == state.iteration
    assert all(np.isfinite(v) for v in state.objective_history)


def test_block_updates_weakly_decrease_their_subproblems():
    rng = np.random.default_rng(16)
    X_list, state = random_state(rng, 9, 2)
    L_list = random_laplacians(rng, 9, 2)
    lam1, lam2 = 0.6, 0.4

    def e_obj(E_list):
        total = 0.0
        for X, E, Y1 in zip(X_list, E_list, state.Y1):
            T = X - X @ state.Z + Y1 / state.mu
            total += lam1 * l21_norm(E) + state.mu / 2 * np.sum((E - T) ** 2)
        return total

    assert e_obj(update_E(state, X_list, lam1)) <= e_obj(state.E) + 1e-10

    M = state.Z + state.Y2 / state.mu

    def q_obj(Q):
        return nuclear_norm(Q) + state.mu / 2 * np.sum((Q - M) ** 2)

    assert q_obj(update_Q(state)) <= q_obj(state.Q) + 1e-10

    z_new = update_Z(state, X_list, L_list, lam2)
    assert z_subproblem_objective(
        z_new, X_list, L_list, lam2, state
    ) <= z_subproblem_objective(state.Z, X_list, L_list, lam2, state) + 1e-10


# ------------------------------------------------------------ parameters


def test_hyperparams_validation():
    with pytest.raises(ValidationError):
        HyperParams(lambda1=0.0)
    with pytest.raises(ValidationError):
        HyperParams(lambda2=-1.0)
    with pytest.raises(ValidationError):
        HyperParams(rho=1.0)
    with pytest.raises(ValidationError):
        HyperParams(mu0=1.0, mu_max=0.5)
    with pytest.raises(ValidationError):
        HyperParams(variant="nope")
    with pytest.raises(ValidationError):
        HyperParams(z_update="sideways")
    with pytest.raises(ValidationError):
        HyperParams(knn=0)
    with pytest.raises(ValidationError):
        HyperParams(max_iter=0)


def test_hyperparams_effective_lambda2():
    assert HyperParams(lambda2=3.0, variant="grmsc").effective_lambda2 == 3.0
    assert HyperParams(lambda2=3.0, variant="grmsc-naive").effective_lambda2 == 3.0
    assert HyperParams(lambda2=3.0, variant="msc-naive").effective_lambda2 == 0.0
    assert HyperParams(lambda2=3.0, variant="lrr-bsv").effective_lambda2 == 0.0


def test_hyperparams_knn_resolution():
    p = HyperParams()
    assert p.resolve_knn(150, 3) == 10  # min(10, 50)
    assert p.resolve_knn(12, 4) == 3  # n // c
    assert HyperParams(knn=7).resolve_knn(150, 3) == 7
    assert HyperParams(knn=99).resolve_knn(20, 2) == 19  # clamped to n-1


def test_algorithm_defaults():
    p = HyperParams()
    assert p.rho == 1.9
    assert p.mu0 == 1e-4
    assert p.mu_max == 1e6
    assert p.eps == 1e-6
    assert p.max_iter == 300
    assert p.alpha == 0.001
