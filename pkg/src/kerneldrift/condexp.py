"""Scalar conditional expectation as a kernel expansion.

Given paired samples ``(x_n, y_n)`` the regression function ``E[Y | X = x]``
is represented as ``sum_m a_m k(x, c_m)`` over a subsampled set of centers
``c_m``, with ``k`` a diffusion kernel.  The coefficients solve a
ridge-regularized least-squares problem

    min_a || P K a - P G y ||^2 + delta ||a||^2,

where ``G`` and ``P`` are row-stochastic Gaussian smoothing matrices over
the inputs and ``K`` is the matrix of kernel sections at the inputs.  All
three bandwidths are tuned by sparsity targets unless given explicitly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import SolverError
from .kernels import (
    BandwidthPolicy,
    DEFAULT_THETA_ZERO,
    KernelModel,
    diffusion_model,
    evaluate_expansion,
    kernel_model_from_dict,
    kernel_model_to_dict,
    markov_apply,
    section_matrix,
    select_bandwidth,
)


@dataclass(frozen=True)
class CondExpParams:
    """Tuning knobs for the conditional-expectation fit.

    ``eta1``/``eta2``/``eta3`` are the sparsity targets used to auto-select
    the bandwidths of the smoothing matrix, the expansion kernel and the
    Markov matrix respectively (defaults follow the benchmark tuning:
    0.3% / 1% / 1%).  Explicit ``eps*`` values bypass auto-selection;
    ``eps2_twice_eps1`` instead ties the expansion bandwidth to twice the
    smoothing bandwidth.  ``n_centers`` is the number of subsampled kernel
    centers, chosen ``strided`` (every (N // M)-th input, deterministic) or
    ``random`` (seeded by ``center_seed``).
    """

    eta1: float = 0.003
    eta2: float = 0.01
    eta3: float = 0.01
    delta: float = 0.1
    n_centers: int = 500
    center_selection: str = "strided"
    center_seed: Optional[int] = None
    theta_zero: float = DEFAULT_THETA_ZERO
    subsample_fraction: float = 0.1
    eps1: Optional[float] = None
    eps2: Optional[float] = None
    eps3: Optional[float] = None
    eps2_twice_eps1: bool = False

    def __post_init__(self):
        for name in ("eta1", "eta2", "eta3"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {value}")
        if self.delta < 0:
            raise ValueError(f"delta must be nonnegative, got {self.delta}")
        if self.n_centers < 1:
            raise ValueError(f"n_centers must be positive, got {self.n_centers}")
        if self.center_selection not in ("strided", "random"):
            raise ValueError(
                f"center_selection must be 'strided' or 'random', got {self.center_selection!r}"
            )
        for name in ("eps1", "eps2", "eps3"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"{name} must be positive when given, got {value}")


@dataclass
class CondExpModel:
    """Fitted conditional expectation: a kernel plus coefficient vector."""

    kernel: KernelModel
    coefficients: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def select_centers(n: int, params: CondExpParams) -> np.ndarray:
    """Indices of the subsampled kernel centers among n inputs."""
    m = params.n_centers
    if m > n:
        raise ValueError(f"n_centers={m} exceeds the number of inputs {n}")
    if params.center_selection == "strided":
        return np.arange(m) * (n // m)
    rng = np.random.default_rng(params.center_seed)
    return np.sort(rng.choice(n, size=m, replace=False))


def solve_regularized(smoothed_sections: np.ndarray, smoothed_targets: np.ndarray,
                      delta: float) -> tuple[np.ndarray, np.ndarray, float]:
    """Ridge solution of ``min || B a - g ||^2 + delta ||a||^2`` per column.

    Uses the regularized normal equations with a Cholesky factorization;
    for ``delta = 0`` falls back to a minimum-norm least-squares solve.
    Returns ``(coefficients, residual_norms, condition)`` with one column /
    entry per target column and the condition number of the (regularized)
    normal matrix.
    """
    b = smoothed_sections
    g = smoothed_targets if smoothed_targets.ndim == 2 else smoothed_targets[:, None]
    normal = b.T @ b
    rhs = b.T @ g
    try:
        if delta > 0:
            normal = normal + delta * np.eye(b.shape[1])
            coef = cho_solve(cho_factor(normal), rhs)
        else:
            coef, *_ = np.linalg.lstsq(normal, rhs, rcond=None)
    except (np.linalg.LinAlgError, ValueError) as err:
        raise SolverError(f"least-squares solve failed: {err}",
                          diagnostics={"delta": delta}) from err
    if not np.isfinite(coef).all():
        bad = np.flatnonzero(~np.isfinite(coef).all(axis=0))
        raise SolverError(
            f"least-squares solve produced non-finite coefficients "
            f"for target column(s) {bad.tolist()}",
            diagnostics={"delta": delta, "nonfinite_columns": bad.tolist()},
        )
    condition = float(np.linalg.cond(normal))
    residuals = np.linalg.norm(b @ coef - g, axis=0)
    if smoothed_targets.ndim == 1:
        return coef[:, 0], residuals, condition
    return coef, residuals, condition


def fit_targets(inputs, targets, params: CondExpParams
                ) -> tuple[KernelModel, np.ndarray, dict]:
    """Fit one kernel and one coefficient vector per target column.

    ``inputs`` has shape (N, d) and ``targets`` (N,) or (N, k); all columns
    share the bandwidth selection, smoothing matrices, centers and the
    factorization of the normal equations.  Returns
    ``(kernel_model, coefficients with shape (k, M), diagnostics)``.
    """
    inputs = np.asarray(inputs, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if inputs.ndim != 2:
        raise ValueError("inputs must be a 2-d array (N, d)")
    if len(targets) != len(inputs):
        raise ValueError(f"{len(targets)} targets for {len(inputs)} inputs")
    if not (np.isfinite(inputs).all() and np.isfinite(targets).all()):
        raise ValueError("inputs and targets must be finite")
    single = targets.ndim == 1
    y = targets[:, None] if single else targets

    def bandwidth(explicit, eta):
        if explicit is not None:
            return explicit
        policy = BandwidthPolicy(eta=eta, theta_zero=params.theta_zero,
                                 subsample_fraction=params.subsample_fraction)
        return select_bandwidth(inputs, policy)

    eps1 = bandwidth(params.eps1, params.eta1)
    eps3 = bandwidth(params.eps3, params.eta3)
    eps2 = 2.0 * eps1 if params.eps2_twice_eps1 else bandwidth(params.eps2, params.eta2)

    centers = select_centers(len(inputs), params)
    kernel, _ = diffusion_model(inputs[centers], eps2, params.theta_zero)
    sections, _ = section_matrix(kernel, inputs)

    # one streamed pass applies the Markov matrix to the kernel sections and
    # the smoothed targets together
    smoothed_y = markov_apply(inputs, inputs, eps1, y, params.theta_zero)
    stacked = markov_apply(inputs, inputs, eps3,
                           np.hstack([sections, smoothed_y]), params.theta_zero)
    b = stacked[:, : sections.shape[1]]
    g = stacked[:, sections.shape[1] :]
    coef, residuals, condition = solve_regularized(b, g, params.delta)

    diagnostics = {
        "eps1": eps1,
        "eps2": eps2,
        "eps3": eps3,
        "delta": params.delta,
        "n_train": len(inputs),
        "n_centers": params.n_centers,
        "residual_norms": residuals.tolist(),
        "coefficient_norms": np.linalg.norm(coef, axis=0).tolist(),
        "normal_condition": condition,
    }
    return kernel, coef.T, diagnostics


def fit(pairs, params: CondExpParams) -> CondExpModel:
    """Fit a scalar conditional expectation from (x, y) sample pairs."""
    xs, ys = zip(*pairs)
    inputs = np.asarray(xs, dtype=float)
    if inputs.ndim == 1:
        inputs = inputs[:, None]
    targets = np.asarray(ys, dtype=float)
    kernel, coef, diagnostics = fit_targets(inputs, targets, params)
    diagnostics["residual_norm"] = diagnostics["residual_norms"][0]
    return CondExpModel(kernel=kernel, coefficients=coef[0], diagnostics=diagnostics)


def predict(model: CondExpModel, x) -> tuple[float, bool]:
    """Evaluate the fitted expansion at a point.

    Returns ``(value, extrapolated)``; the flag marks the nearest-center
    fallback for queries far from every center.
    """
    return evaluate_expansion(model.kernel, model.coefficients, x)


# --- persistence ------------------------------------------------------------


def save_condexp_model(model: CondExpModel, path) -> None:
    payload = {
        "kernel": kernel_model_to_dict(model.kernel),
        "coefficients": np.asarray(model.coefficients).tolist(),
        "diagnostics": model.diagnostics,
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n")


def load_condexp_model(path) -> CondExpModel:
    data = json.loads(Path(path).read_text())
    return CondExpModel(
        kernel=kernel_model_from_dict(data["kernel"]),
        coefficients=np.asarray(data["coefficients"], dtype=float),
        diagnostics=data.get("diagnostics", {}),
    )


def with_delta(params: CondExpParams, delta: float) -> CondExpParams:
    """Copy of the parameters with a different ridge strength."""
    return replace(params, delta=delta)
