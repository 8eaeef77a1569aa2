import numpy as np
import pytest

from kerneldrift import CondExpParams, SolverError, diffusion_model, section_matrix
from kerneldrift.condexp import (
    fit,
    fit_targets,
    load_condexp_model,
    predict,
    save_condexp_model,
    select_centers,
    solve_regularized,
    with_delta,
)


def test_params_validation():
    with pytest.raises(ValueError):
        CondExpParams(eta1=0.0)
    with pytest.raises(ValueError):
        CondExpParams(delta=-1.0)
    with pytest.raises(ValueError):
        CondExpParams(n_centers=0)
    with pytest.raises(ValueError):
        CondExpParams(center_selection="best")
    with pytest.raises(ValueError):
        CondExpParams(eps2=-0.5)


def test_select_centers_strided_and_random():
    params = CondExpParams(n_centers=5)
    np.testing.assert_array_equal(select_centers(20, params), [0, 4, 8, 12, 16])
    r1 = select_centers(20, CondExpParams(n_centers=5, center_selection="random", center_seed=3))
    r2 = select_centers(20, CondExpParams(n_centers=5, center_selection="random", center_seed=3))
    np.testing.assert_array_equal(r1, r2)
    assert len(set(r1)) == 5
    with pytest.raises(ValueError):
        select_centers(4, params)


def test_constant_target_recovery_zero_ridge():
    rng = np.random.default_rng(1)
    x = rng.uniform(-1, 1, size=300)
    y = np.full(300, 3.7)
    model = fit(zip(x, y), CondExpParams(n_centers=80, delta=0.0))
    for xi in np.linspace(-0.8, 0.8, 7):
        value, _ = predict(model, np.array([xi]))
        assert abs(value - 3.7) < 1e-8
    # training points too
    preds = np.array([predict(model, xi)[0] for xi in x[:40]])
    assert np.abs(preds - 3.7).max() < 1e-8


def test_identity_smoothing_limit_interpolates():
    # with P = G = I and no ridge the solve reduces to K a = y
    rng = np.random.default_rng(2)
    pts = rng.uniform(-1, 1, size=(60, 1))
    kernel, _ = diffusion_model(pts, epsilon=0.05)
    sections, _ = section_matrix(kernel, pts)
    y = np.sin(pts[:, 0])
    a, residuals, _ = solve_regularized(sections, y, delta=0.0)
    assert residuals[0] < 1e-6
    np.testing.assert_allclose(sections @ a, y, atol=1e-6)


def test_matches_nadaraya_watson_oracle():
    x = np.linspace(-1, 1, 500)
    y = x**2
    model = fit(zip(x, y), CondExpParams(n_centers=100))
    eps1 = model.diagnostics["eps1"]
    probes = np.linspace(-0.9, 0.9, 20)
    for p in probes:
        weights = np.exp(-((x - p) ** 2) / eps1)
        oracle = (weights * y).sum() / weights.sum()
        value, _ = predict(model, np.array([p]))
        assert abs(value - oracle) < 0.05


def test_residual_monotone_in_ridge():
    rng = np.random.default_rng(3)
    x = rng.uniform(-2, 2, size=400)
    y = np.sin(2 * x) + 0.3 * rng.standard_normal(400)
    residuals = []
    for delta in (0.0, 0.01, 0.1, 1.0):
        model = fit(zip(x, y), with_delta(CondExpParams(n_centers=80), delta))
        residuals.append(model.diagnostics["residual_norm"])
    assert all(a <= b for a, b in zip(residuals, residuals[1:]))


def test_permutation_equivariance():
    rng = np.random.default_rng(4)
    x = rng.uniform(-1, 1, size=(120, 1))
    y = np.cos(3 * x[:, 0])
    # fixed bandwidths and all points as centers keep the model intrinsic
    params = CondExpParams(n_centers=120, delta=0.1, eps1=0.05, eps2=0.1, eps3=0.1)
    base = fit(zip(x, y), params)
    perm = rng.permutation(120)
    shuffled = fit(zip(x[perm], y[perm]), params)
    probes = rng.uniform(-0.9, 0.9, size=(10, 1))
    for p in probes:
        v1, _ = predict(base, p)
        v2, _ = predict(shuffled, p)
        assert abs(v1 - v2) < 1e-10


def test_denoising_improves_with_sample_size():
    sizes = (200, 1000, 5000)
    mean_errors = []
    probes = np.linspace(-2.5, 2.5, 20)
    for n in sizes:
        errs = []
        for seed in range(5):
            rng = np.random.default_rng(seed)
            x = rng.uniform(-3, 3, size=n)
            y = np.sin(x) + 0.3 * rng.standard_normal(n)
            model = fit(zip(x, y), CondExpParams(n_centers=100))
            pred = np.array([predict(model, np.array([p]))[0] for p in probes])
            errs.append(np.sqrt(np.mean((pred - np.sin(probes)) ** 2)))
        mean_errors.append(np.mean(errs))
    assert mean_errors[0] > mean_errors[1] > mean_errors[2]


def test_smoothing_shrink_keeps_training_error():
    # tightening the smoothing bandwidth must not degrade a smooth target
    n = 5000
    rng = np.random.default_rng(6)
    x = rng.uniform(-3, 3, size=n)
    y = np.sin(x)
    probes = x[::100]
    errors = []
    for eta1 in (0.01, 0.003, 0.001):
        model = fit(zip(x, y), CondExpParams(eta1=eta1, n_centers=100))
        pred = np.array([predict(model, np.array([p]))[0] for p in probes])
        errors.append(np.sqrt(np.mean((pred - np.sin(probes)) ** 2)))
    assert errors[1] <= 2.0 * errors[0]
    assert errors[2] <= 2.0 * errors[0]


def test_far_query_flagged():
    rng = np.random.default_rng(7)
    x = rng.uniform(-1, 1, size=200)
    y = x.copy()
    model = fit(zip(x, y), CondExpParams(n_centers=50))
    value, flag = predict(model, np.array([1e5]))
    assert flag
    nearest = model.kernel.centers[np.argmax(model.kernel.centers[:, 0])]
    expected, _ = predict(model, nearest)
    assert value == expected


def test_eps2_tied_to_eps1():
    rng = np.random.default_rng(8)
    x = rng.uniform(-1, 1, size=150)
    y = x**3
    model = fit(zip(x, y), CondExpParams(n_centers=50, eps2_twice_eps1=True))
    assert model.diagnostics["eps2"] == 2.0 * model.diagnostics["eps1"]


def test_fit_rejects_bad_inputs():
    with pytest.raises(ValueError):
        fit_targets(np.ones((5, 1)), np.ones(4), CondExpParams(n_centers=2))
    bad = np.ones(5)
    bad[2] = np.inf
    with pytest.raises(ValueError):
        fit_targets(np.ones((5, 1)), bad, CondExpParams(n_centers=2))


def test_solver_failure_raises():
    b = np.ones((4, 2))
    b[0, 0] = np.nan
    with pytest.raises(SolverError):
        solve_regularized(b, np.ones(4), delta=0.1)


def test_model_roundtrip(tmp_path):
    rng = np.random.default_rng(9)
    x = rng.uniform(-1, 1, size=200)
    y = np.sin(3 * x)
    model = fit(zip(x, y), CondExpParams(n_centers=60))
    path = tmp_path / "condexp.json"
    save_condexp_model(model, path)
    loaded = load_condexp_model(path)
    np.testing.assert_array_equal(loaded.coefficients, model.coefficients)
    probes = rng.uniform(-0.9, 0.9, size=5)
    for p in probes:
        assert predict(loaded, np.array([p])) == predict(model, np.array([p]))


def test_fit_targets_shares_kernel_across_columns():
    rng = np.random.default_rng(10)
    x = rng.uniform(-1, 1, size=(300, 2))
    targets = np.stack([x[:, 0] ** 2, np.sin(x[:, 1])], axis=1)
    kernel, coef, diags = fit_targets(x, targets, CondExpParams(n_centers=80))
    assert coef.shape == (2, 80)
    assert len(diags["residual_norms"]) == 2
    single_kernel, single_coef, _ = fit_targets(x, targets[:, 0],
                                                CondExpParams(n_centers=80))
    np.testing.assert_allclose(single_coef[0], coef[0], rtol=1e-10, atol=1e-12)
