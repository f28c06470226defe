//! Single-layer solver.
//!
//! For a layer input `A` (`n x N`) this minimises
//!
//! ```text
//! 1/2 (|Z|_F^2 + |P|_F^2) + alpha/2 |P A - P A Z|_F^2 + lambda |E|_1
//!     s.t.  A = A Z + P A + E
//! ```
//!
//! by inexact ALM: one closed-form pass over `Z`, `P` and `E` per outer
//! iteration (in that order, each using the freshest values of the others),
//! followed by the multiplier step and a geometric penalty increase.

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::linalg::{all_finite, max_abs, spd_solve};
use crate::matrix::Matrix;

/// Learned triple for one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    /// `N x N` deep coefficients.
    pub z: Matrix,
    /// `n x n` deep projection.
    pub p: Matrix,
    /// `n x N` deep sparse error.
    pub e: Matrix,
}

impl LayerParams {
    pub fn zeros(n: usize, samples: usize) -> Self {
        LayerParams {
            z: Matrix::zeros(samples, samples),
            p: Matrix::zeros(n, n),
            e: Matrix::zeros(n, samples),
        }
    }
}

/// Solver iterate and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct AlmState {
    /// Lagrange multiplier, `n x N`.
    pub y: Matrix,
    /// Penalty for the next iteration.
    pub mu: f64,
    /// Completed outer iterations.
    pub iter: usize,
    pub converged: bool,
    /// Element-wise infinity norm of `A - A Z - P A - E` after each iteration.
    pub residual_history: Vec<f64>,
    /// Layer objective after each iteration.
    pub objective_history: Vec<f64>,
    /// Penalty used during each iteration.
    pub mu_history: Vec<f64>,
}

impl AlmState {
    pub fn final_residual(&self) -> Option<f64> {
        self.residual_history.last().copied()
    }
}

/// Coefficient step: minimiser over `Z` of
/// `1/2|Z|^2 + 1/2|Lambda - Delta Z|^2 + tr(Y^T (Xi - A Z))` with
/// `Lambda = [sqrt(alpha) P A; sqrt(mu) Xi]`, `Delta = [sqrt(alpha) P A; sqrt(mu) A]`
/// and `Xi = A - P A - E`, i.e. `Z = (I + Delta^T Delta)^-1 (Delta^T Lambda + A^T Y)`.
pub fn update_z(a: &Matrix, p: &Matrix, e: &Matrix, y: &Matrix, mu: f64, alpha: f64) -> Result<Matrix> {
    let pa = p * a;
    let xi = a - &pa - e;
    let at = a.transpose();
    update_z_with(a, &at, &(&at * a), &pa, &xi, y, mu, alpha)
}

// Stacked blocks are never formed: Delta^T Delta = alpha (PA)^T PA + mu A^T A and
// Delta^T Lambda = alpha (PA)^T PA + mu A^T Xi.
#[allow(clippy::too_many_arguments)]
fn update_z_with(
    a: &Matrix,
    at: &Matrix,
    gram: &Matrix,
    pa: &Matrix,
    xi: &Matrix,
    y: &Matrix,
    mu: f64,
    alpha: f64,
) -> Result<Matrix> {
    let samples = a.ncols();
    let pat_pa = pa.transpose() * pa;
    let mut system = gram * mu + &pat_pa * alpha;
    for i in 0..samples {
        system[(i, i)] += 1.0;
    }
    let rhs = pat_pa * alpha + (at * xi) * mu + at * y;
    spd_solve(system, &rhs, "coefficient update")
}

/// Projection step: `P = (Y A^T + mu (Phi - E) A^T)(I + alpha Phi Phi^T + mu A A^T)^-1`
/// with `Phi = A - A Z`.
pub fn update_p(a: &Matrix, z: &Matrix, e: &Matrix, y: &Matrix, mu: f64, alpha: f64) -> Result<Matrix> {
    let at = a.transpose();
    update_p_with(a, &at, &(a * &at), z, e, y, mu, alpha)
}

#[allow(clippy::too_many_arguments)]
fn update_p_with(
    a: &Matrix,
    at: &Matrix,
    outer: &Matrix,
    z: &Matrix,
    e: &Matrix,
    y: &Matrix,
    mu: f64,
    alpha: f64,
) -> Result<Matrix> {
    let n = a.nrows();
    let phi = a - a * z;
    let mut system = outer * mu + (&phi * phi.transpose()) * alpha;
    for i in 0..n {
        system[(i, i)] += 1.0;
    }
    let rhs = (y + (&phi - e) * mu) * at;
    // P S = R with S symmetric  <=>  S P^T = R^T
    Ok(spd_solve(system, &rhs.transpose(), "projection update")?.transpose())
}

/// Soft-thresholding: `sgn(x) max(|x| - threshold, 0)`.
#[inline]
pub fn shrink(x: f64, threshold: f64) -> f64 {
    if x > threshold {
        x - threshold
    } else if x < -threshold {
        x + threshold
    } else {
        0.0
    }
}

/// Sparse-error step: element-wise shrinkage of `A - A Z - P A + Y / mu` by `lambda / mu`.
pub fn update_e(a: &Matrix, z: &Matrix, p: &Matrix, y: &Matrix, mu: f64, lambda: f64) -> Matrix {
    let sigma = a - a * z - p * a + y / mu;
    let t = lambda / mu;
    sigma.map(|v| shrink(v, t))
}

/// `A - A Z - P A - E`.
pub fn residual(a: &Matrix, z: &Matrix, p: &Matrix, e: &Matrix) -> Matrix {
    a - a * z - p * a - e
}

/// `Y + mu (A - A Z - P A - E)`.
pub fn update_multiplier(y: &Matrix, mu: f64, a: &Matrix, z: &Matrix, p: &Matrix, e: &Matrix) -> Matrix {
    multiplier_step(y, mu, &residual(a, z, p, e))
}

fn multiplier_step(y: &Matrix, mu: f64, r: &Matrix) -> Matrix {
    y.zip_map(r, |yv, rv| yv + mu * rv)
}

/// Layer objective with the l1 norm on `E`.
pub fn layer_objective(a: &Matrix, params: &LayerParams, alpha: f64, lambda: f64) -> f64 {
    let pa = &params.p * a;
    let neighborhood = &pa - &pa * &params.z;
    0.5 * (params.z.norm_squared() + params.p.norm_squared())
        + 0.5 * alpha * neighborhood.norm_squared()
        + lambda * params.e.iter().map(|v| v.abs()).sum::<f64>()
}

fn check(m: &Matrix, stage: &'static str, iteration: usize) -> Result<()> {
    if all_finite(m) {
        Ok(())
    } else {
        Err(Error::NumericalFailure { stage, iteration })
    }
}

fn solver_error(err: Error, iteration: usize) -> Error {
    match err {
        Error::LinearSolve(stage) => Error::NumericalFailure { stage, iteration },
        other => other,
    }
}

/// Runs inexact ALM on one layer from an all-zero start.
///
/// Stops once the infinity-norm residual reaches `cfg.eps` or after
/// `cfg.max_iter` iterations; in the latter case `converged` is false. Any
/// non-finite iterate is a hard error.
pub fn solve_layer(a: &Matrix, cfg: &SolverConfig, lambda: f64, alpha: f64) -> Result<(LayerParams, AlmState)> {
    if !all_finite(a) {
        return Err(Error::NumericalFailure {
            stage: "layer input",
            iteration: 0,
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyDimension);
    }
    if lambda.is_nan() || lambda <= 0.0 || alpha.is_nan() || alpha < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "lambda {lambda} must be positive and alpha {alpha} non-negative"
        )));
    }
    let (n, samples) = a.shape();
    let at = a.transpose();
    let gram = &at * a;
    let outer = a * &at;

    let mut params = LayerParams::zeros(n, samples);
    let mut state = AlmState {
        y: Matrix::zeros(n, samples),
        mu: cfg.mu0,
        iter: 0,
        converged: false,
        residual_history: Vec::new(),
        objective_history: Vec::new(),
        mu_history: Vec::new(),
    };

    while state.iter < cfg.max_iter {
        let k = state.iter + 1;
        let mu = state.mu;

        let pa = &params.p * a;
        let xi = a - &pa - &params.e;
        params.z = update_z_with(a, &at, &gram, &pa, &xi, &state.y, mu, alpha).map_err(|e| solver_error(e, k))?;
        check(&params.z, "coefficient update", k)?;

        params.p =
            update_p_with(a, &at, &outer, &params.z, &params.e, &state.y, mu, alpha).map_err(|e| solver_error(e, k))?;
        check(&params.p, "projection update", k)?;

        params.e = update_e(a, &params.z, &params.p, &state.y, mu, lambda);
        check(&params.e, "error update", k)?;

        let r = residual(a, &params.z, &params.p, &params.e);
        state.y = multiplier_step(&state.y, mu, &r);
        check(&state.y, "multiplier update", k)?;

        state.mu = (cfg.eta * mu).min(cfg.mu_max);
        state.iter = k;

        let res = max_abs(&r);
        state.residual_history.push(res);
        state.objective_history.push(layer_objective(a, &params, alpha, lambda));
        state.mu_history.push(mu);

        if res <= cfg.eps {
            state.converged = true;
            break;
        }
    }
    Ok((params, state))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    fn scalar(v: f64) -> Matrix {
        Matrix::from_element(1, 1, v)
    }

    #[test]
    fn zero_data_gives_zero_updates() {
        let a = Matrix::zeros(3, 4);
        let p = Matrix::from_element(3, 3, 0.7);
        let y = Matrix::zeros(3, 4);
        let z = update_z(&a, &p, &Matrix::zeros(3, 4), &y, 2.0, 1.0).unwrap();
        assert_eq!(z, Matrix::zeros(4, 4));
        let p = update_p(&a, &Matrix::identity(4, 4), &Matrix::zeros(3, 4), &y, 2.0, 1.0).unwrap();
        assert_eq!(p, Matrix::zeros(3, 3));
    }

    // 1-D grid minimisers of the scalar sub-objectives.
    fn grid_argmin(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> f64 {
        let n = ((hi - lo) / step).round() as usize;
        (0..=n)
            .map(|i| lo + i as f64 * step)
            .min_by(|x, y| f(*x).total_cmp(&f(*y)))
            .unwrap()
    }

    #[test]
    fn scalar_z_update() {
        let z = update_z(&scalar(2.0), &scalar(0.0), &scalar(0.0), &scalar(0.0), 1.0, 0.0).unwrap();
        let grid = grid_argmin(|z| 0.5 * z * z + 0.5 * (2.0 - 2.0 * z).powi(2), -2.0, 2.0, 1e-4);
        assert!((grid - 0.8).abs() <= 1e-4);
        assert!((z[(0, 0)] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn scalar_p_update() {
        let p = update_p(&scalar(2.0), &scalar(0.0), &scalar(0.0), &scalar(0.0), 1.0, 0.0).unwrap();
        // J(P) = 1/2 p^2 + 1/2 (2 - 2p)^2 with Phi = 2
        let grid = grid_argmin(|p| 0.5 * p * p + 0.5 * (2.0 - 2.0 * p).powi(2), -2.0, 2.0, 1e-4);
        assert!((grid - 0.8).abs() <= 1e-4);
        assert!((p[(0, 0)] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn shrink_examples() {
        assert!((shrink(1.2, 0.5) - 0.7).abs() < 1e-15);
        assert_eq!(shrink(-0.3, 0.5), 0.0);
        assert!((shrink(-1.5, 0.5) + 1.0).abs() < 1e-15);
        assert_eq!(shrink(0.5, 0.5), 0.0);
        assert_eq!(shrink(3.0, 0.0), 3.0);
    }

    #[test]
    fn full_shrinkage_when_threshold_dominates() {
        let a = Matrix::from_row_slice(2, 2, &[0.1, -0.2, 0.05, 0.0]);
        let zero_z = Matrix::zeros(2, 2);
        let zero_p = Matrix::zeros(2, 2);
        let y = Matrix::zeros(2, 2);
        // threshold lambda / mu = 0.2 >= max |Sigma_E|
        assert_eq!(update_e(&a, &zero_z, &zero_p, &y, 1.0, 0.2), Matrix::zeros(2, 2));
        assert_eq!(
            update_e(&Matrix::zeros(2, 2), &zero_z, &zero_p, &y, 1.0, 1e-3),
            Matrix::zeros(2, 2)
        );
    }

    #[test]
    fn multiplier_rules() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let z = Matrix::zeros(2, 2);
        let p = Matrix::zeros(2, 2);
        let y = Matrix::from_element(2, 2, 0.25);
        // feasible iterate: E = A
        let same = update_multiplier(&y, 3.0, &a, &z, &p, &a);
        assert_eq!(same, y);
        assert_eq!(update_multiplier(&same, 3.0, &a, &z, &p, &a), y);
        let e = Matrix::zeros(2, 2);
        let y2 = update_multiplier(&Matrix::zeros(2, 2), 2.0, &a, &z, &p, &e);
        assert_eq!(y2, &a * 2.0);
    }

    #[test]
    fn zero_input_converges_immediately() {
        let a = Matrix::zeros(4, 5);
        let (params, state) = solve_layer(&a, &cfg(), 0.1, 1.0).unwrap();
        assert!(state.converged);
        assert_eq!(state.iter, 1);
        assert_eq!(state.residual_history, vec![0.0]);
        assert_eq!(params, LayerParams::zeros(4, 5));
    }

    #[test]
    fn penalty_schedule_is_exact() {
        let a = Matrix::from_fn(3, 4, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let mut c = cfg();
        c.max_iter = 60;
        c.eps = 1e-300;
        let (_, state) = solve_layer(&a, &c, 0.1, 1.0).unwrap();
        assert_eq!(state.mu_history[0], c.mu0);
        for w in state.mu_history.windows(2) {
            assert_eq!(w[1], (c.eta * w[0]).min(c.mu_max));
        }
        assert!(state.mu_history.iter().all(|&m| m <= c.mu_max));
        assert_eq!(state.mu, (c.eta * state.mu_history.last().unwrap()).min(c.mu_max));
        assert!(!state.converged);
        assert_eq!(state.iter, 60);
    }

    #[test]
    fn rejects_bad_parameters() {
        let a = Matrix::identity(2, 2);
        assert!(solve_layer(&a, &cfg(), 0.0, 1.0).is_err());
        assert!(solve_layer(&a, &cfg(), 0.1, -1.0).is_err());
        let bad = Matrix::from_element(2, 2, f64::NAN);
        assert!(matches!(
            solve_layer(&bad, &cfg(), 0.1, 1.0),
            Err(Error::NumericalFailure { .. })
        ));
    }

    #[test]
    fn overflow_is_reported_as_numeric_failure() {
        let a = Matrix::from_fn(3, 4, |i, j| (i + 2 * j) as f64);
        let err = solve_layer(&a, &cfg(), 0.1, 1e308).unwrap_err();
        assert!(err.is_numeric(), "{err}");
    }
}
