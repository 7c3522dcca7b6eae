//! Primal solver for the L1-regularized squared-hinge SVM
//!
//! ```text
//! min_{w,b}  h(w,b) + λ‖w‖₁,   h(w,b) = ½ Σᵢ max(1 − yᵢ(wᵀxᵢ + b), 0)²
//! ```
//!
//! solved by accelerated proximal gradient (soft-thresholding on `w`, plain
//! gradient step on the unpenalized bias) with backtracking and
//! function-value restarts. Once the support and the set of margin violators
//! settle, the solver tries an exact solve of the piecewise-quadratic problem
//! on that piece; the result is only accepted if it does not increase the
//! objective, so accepted objectives stay monotone.
//!
//! The dual point used everywhere else is recovered as
//! `θᵢ = max(0, 1 − yᵢ(wᵀxᵢ + b))/λ`, and optimality is measured through the
//! residuals of `θᵀf̂_j = sign(w_j)` (active) / `|θᵀf̂_j| ≤ 1` (inactive),
//! `θᵀy = 0`, `θ ≥ 0`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::vecops::{all_finite, dot};

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Stop once the largest KKT residual is at most this.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial `(w, b)`; `w` must have one entry per feature.
    pub warm_start: Option<(Vec<f64>, f64)>,
    /// Try exact solves on the identified piece of the objective.
    pub polish: bool,
    /// Keep the objective of every accepted iterate in [`PrimalModel::history`].
    pub record_history: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 100_000,
            warm_start: None,
            polish: true,
            record_history: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalModel {
    pub lambda: f64,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Largest KKT residual at the returned point.
    pub kkt_residual: f64,
    /// Objective after each accepted iteration (only with `record_history`).
    pub history: Vec<f64>,
}

impl PrimalModel {
    /// The model `w = 0, b = b*` that is optimal for every `λ ≥ λ_max`.
    pub fn zero_at(data: &Dataset, lambda: f64) -> Self {
        let bias = data.label_sum() / data.n_samples() as f64;
        let weights = vec![0.0; data.n_features()];
        let objective = objective(data, &weights, bias, lambda);
        Self {
            lambda,
            weights,
            bias,
            objective,
            iterations: 0,
            converged: false,
            kkt_residual: f64::NAN,
            history: Vec::new(),
        }
    }

    /// 0-based indices of nonzero weights.
    pub fn support(&self) -> Vec<usize> {
        support_of(&self.weights, 0.0)
    }

    pub fn to_json(&self) -> ModelJson {
        ModelJson {
            lambda: self.lambda,
            bias: self.bias,
            weights: self
                .weights
                .iter()
                .enumerate()
                .filter(|(_, w)| **w != 0.0)
                .map(|(j, &w)| (j + 1, w))
                .collect(),
            objective: self.objective,
            iterations: self.iterations,
            converged: self.converged,
        }
    }
}

/// Indices `j` with `|v_j| > threshold`.
pub fn support_of(v: &[f64], threshold: f64) -> Vec<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, x)| x.abs() > threshold)
        .map(|(j, _)| j)
        .collect()
}

/// On-disk model layout; weight indices are 1-based like the input format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelJson {
    pub lambda: f64,
    pub bias: f64,
    pub weights: Vec<(usize, f64)>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl ModelJson {
    pub fn dense_weights(&self, n_features: usize) -> Result<Vec<f64>> {
        let mut w = vec![0.0; n_features];
        for &(idx, v) in &self.weights {
            if idx == 0 || idx > n_features {
                return Err(Error::InvalidArgument(format!(
                    "weight index {idx} outside 1..={n_features}"
                )));
            }
            w[idx - 1] = v;
        }
        Ok(w)
    }
}

/// Dual point `θ` together with the λ it belongs to (`α = λθ`).
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaVector {
    pub values: Vec<f64>,
    pub lambda: f64,
}

impl ThetaVector {
    pub fn new(values: Vec<f64>, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("λ must be positive, got {lambda}")));
        }
        if !all_finite(&values) {
            return Err(Error::NonFinite("θ"));
        }
        Ok(Self { values, lambda })
    }

    pub fn dot_labels(&self, labels: &[f64]) -> f64 {
        dot(&self.values, labels)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "λ must be positive and finite, got {lambda}"
        )))
    }
}

/// Hinge slacks `ξᵢ = max(1 − yᵢzᵢ, 0)` from decision values `z`.
fn slacks(labels: &[f64], z: &[f64]) -> Vec<f64> {
    labels
        .iter()
        .zip(z)
        .map(|(y, zi)| (1.0 - y * zi).max(0.0))
        .collect()
}

/// `Xᵀ(−ξ ∘ y)` and `−Σ ξᵢyᵢ`.
fn grad_from_slacks(data: &Dataset, xi: &[f64]) -> (Vec<f64>, f64) {
    let y = data.labels();
    let gw = data
        .columns()
        .iter()
        .map(|c| -c.weighted_dot(y, xi))
        .collect();
    let gb = -dot(xi, y);
    (gw, gb)
}

/// `h(w,b) = ½ Σ max(1 − yᵢ(wᵀxᵢ + b), 0)²`.
pub fn smooth_loss(data: &Dataset, w: &[f64], b: f64) -> f64 {
    let xi = slacks(data.labels(), &data.decision_values(w, b));
    0.5 * dot(&xi, &xi)
}

pub fn objective(data: &Dataset, w: &[f64], b: f64, lambda: f64) -> f64 {
    smooth_loss(data, w, b) + lambda * w.iter().map(|x| x.abs()).sum::<f64>()
}

/// Gradient of the smooth part:
/// `∇_w h = −Σ ξᵢyᵢxᵢ`, `∂_b h = −Σ ξᵢyᵢ`.
pub fn grad_h(data: &Dataset, w: &[f64], b: f64) -> (Vec<f64>, f64) {
    let xi = slacks(data.labels(), &data.decision_values(w, b));
    grad_from_slacks(data, &xi)
}

/// `θᵢ = max(0, 1 − yᵢ(wᵀxᵢ + b))/λ`.
pub fn theta_from_primal(data: &Dataset, w: &[f64], b: f64, lambda: f64) -> Result<ThetaVector> {
    check_lambda(lambda)?;
    let xi = slacks(data.labels(), &data.decision_values(w, b));
    ThetaVector::new(xi.into_iter().map(|v| v / lambda).collect(), lambda)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    /// `θᵀf̂_j` for every feature.
    pub correlations: Vec<f64>,
    /// `max_j (|θᵀf̂_j| − 1)₊`
    pub max_violation: f64,
    /// `max_{w_j ≠ 0} |θᵀf̂_j − sign(w_j)|`
    pub max_sign_mismatch: f64,
    /// `|θᵀy|`
    pub label_balance: f64,
    /// `(−min θᵢ)₊`
    pub negativity: f64,
}

impl KktReport {
    pub fn max_residual(&self) -> f64 {
        self.max_violation
            .max(self.max_sign_mismatch)
            .max(self.label_balance)
            .max(self.negativity)
    }
}

fn kkt_from_theta(data: &Dataset, theta: &[f64], w: &[f64]) -> KktReport {
    let y = data.labels();
    let correlations: Vec<f64> = data
        .columns()
        .iter()
        .map(|c| c.weighted_dot(y, theta))
        .collect();
    let mut max_violation = 0.0f64;
    let mut max_sign_mismatch = 0.0f64;
    for (&c, &wj) in correlations.iter().zip(w) {
        max_violation = max_violation.max(c.abs() - 1.0);
        if wj != 0.0 {
            max_sign_mismatch = max_sign_mismatch.max((c - wj.signum()).abs());
        }
    }
    let min_theta = theta.iter().copied().fold(f64::INFINITY, f64::min);
    KktReport {
        correlations,
        max_violation,
        max_sign_mismatch,
        label_balance: dot(theta, y).abs(),
        negativity: (-min_theta).max(0.0),
    }
}

pub fn kkt_report(data: &Dataset, w: &[f64], b: f64, lambda: f64) -> Result<KktReport> {
    let theta = theta_from_primal(data, w, b, lambda)?;
    Ok(kkt_from_theta(data, &theta.values, w))
}

/// Residual computed from slacks already at hand (θ = ξ/λ, θᵀf̂_j = −∂_j h/λ).
fn kkt_residual_from_grad(gw: &[f64], gb: f64, w: &[f64], lambda: f64) -> f64 {
    let mut r = (gb / lambda).abs();
    for (&g, &wj) in gw.iter().zip(w) {
        let corr = -g / lambda;
        r = r.max(corr.abs() - 1.0);
        if wj != 0.0 {
            r = r.max((corr - wj.signum()).abs());
        }
    }
    r
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaMax {
    pub lambda_max: f64,
    /// Optimal bias at `w = 0`: `(n₊ − n₋)/n`.
    pub bias: f64,
    /// `Σᵢ (yᵢ − b*) xᵢ`; its largest-magnitude entries enter the model first.
    pub direction: Vec<f64>,
}

pub fn lambda_max(data: &Dataset) -> LambdaMax {
    let bias = data.label_sum() / data.n_samples() as f64;
    let coef: Vec<f64> = data.labels().iter().map(|y| y - bias).collect();
    let direction: Vec<f64> = data.columns().iter().map(|c| c.dot(&coef)).collect();
    let lambda_max = direction.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    LambdaMax {
        lambda_max,
        bias,
        direction,
    }
}

/// Indices (0-based) of the largest-magnitude entries, ties within a relative
/// `1e-12`. Empty for a zero direction.
pub fn first_features(direction: &[f64]) -> Vec<usize> {
    let max = direction.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if max == 0.0 {
        return Vec::new();
    }
    let cut = max * (1.0 - 1e-12);
    support_of(direction, 0.0)
        .into_iter()
        .filter(|&j| direction[j].abs() >= cut)
        .collect()
}

/// Largest eigenvalue of `[X 1]ᵀ[X 1]` by power iteration.
fn lipschitz_estimate(data: &Dataset) -> f64 {
    let m = data.n_features();
    let n = data.n_samples();
    let mut v = vec![1.0 / ((m + 1) as f64).sqrt(); m + 1];
    let mut est = n as f64;
    for _ in 0..50 {
        let z = data.decision_values(&v[..m], v[m]);
        let mut next: Vec<f64> = data.columns().iter().map(|c| c.dot(&z)).collect();
        next.push(z.iter().sum());
        let nn = dot(&next, &next).sqrt();
        if nn == 0.0 {
            break;
        }
        let prev = est;
        est = nn;
        v = next.into_iter().map(|x| x / nn).collect();
        if (est - prev).abs() <= 1e-6 * est {
            break;
        }
    }
    est.max(f64::MIN_POSITIVE)
}

fn soft_threshold(x: f64, k: f64) -> f64 {
    if x > k {
        x - k
    } else if x < -k {
        x + k
    } else {
        0.0
    }
}

/// Point `(w, b)` with the quantities the iteration reuses.
#[derive(Clone)]
struct Iterate {
    w: Vec<f64>,
    b: f64,
    xi: Vec<f64>,
    loss: f64,
    obj: f64,
}

impl Iterate {
    fn at(data: &Dataset, w: Vec<f64>, b: f64, lambda: f64) -> Self {
        let xi = slacks(data.labels(), &data.decision_values(&w, b));
        let loss = 0.5 * dot(&xi, &xi);
        let obj = loss + lambda * w.iter().map(|x| x.abs()).sum::<f64>();
        Self { w, b, xi, loss, obj }
    }

    fn piece_signature(&self) -> (Vec<(usize, bool)>, Vec<usize>) {
        let support = self
            .w
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0.0)
            .map(|(j, w)| (j, *w > 0.0))
            .collect();
        let violators = support_of(&self.xi, 0.0);
        (support, violators)
    }
}

/// Exact minimizer on the piece where the support, its signs and the set of
/// margin violators are fixed: a least-squares problem with a linear term,
/// `min ½‖y_A − X_{A,S}w_S − b‖² + λ sᵀw_S`.
fn polish_piece(data: &Dataset, cur: &Iterate, lambda: f64) -> Option<(Vec<f64>, f64)> {
    let (support, violators) = cur.piece_signature();
    if violators.is_empty() {
        return None;
    }
    let k = support.len() + 1;
    let rows = violators.len();
    let mut row_of = vec![usize::MAX; data.n_samples()];
    for (r, &i) in violators.iter().enumerate() {
        row_of[i] = r;
    }
    let mut z = DMatrix::<f64>::zeros(rows, k);
    for (c, &(j, _)) in support.iter().enumerate() {
        for (i, x) in data.column(j).iter() {
            if row_of[i] != usize::MAX {
                z[(row_of[i], c)] = x;
            }
        }
    }
    for r in 0..rows {
        z[(r, k - 1)] = 1.0;
    }
    let y = data.labels();
    let target = DVector::from_iterator(rows, violators.iter().map(|&i| y[i]));
    let mut rhs = z.transpose() * target;
    for (c, &(_, pos)) in support.iter().enumerate() {
        rhs[c] -= lambda * if pos { 1.0 } else { -1.0 };
    }
    let gram = z.transpose() * &z;
    let sol = gram.cholesky()?.solve(&rhs);
    if !sol.iter().all(|v| v.is_finite()) {
        return None;
    }
    let mut w = vec![0.0; data.n_features()];
    for (c, &(j, pos)) in support.iter().enumerate() {
        // A sign flip leaves the piece; the prox iteration handles that.
        if (sol[c] > 0.0) != pos || sol[c] == 0.0 {
            return None;
        }
        w[j] = sol[c];
    }
    Some((w, sol[k - 1]))
}

/// Objective changes below this are indistinguishable from rounding; near the
/// optimum the gradient is still informative when the objective is not.
pub fn rounding_slack(obj: f64) -> f64 {
    4.0 * f64::EPSILON * obj.abs().max(f64::MIN_POSITIVE)
}

/// Accelerated proximal gradient on `h(w,b) + λ‖w‖₁`.
pub fn solve_primal(data: &Dataset, lambda: f64, opts: &SolverOptions) -> Result<PrimalModel> {
    check_lambda(lambda)?;
    if !(opts.tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be ≥ 0, got {}", opts.tol)));
    }
    let m = data.n_features();
    let (w0, b0) = match &opts.warm_start {
        Some((w, b)) => {
            if w.len() != m {
                return Err(Error::InvalidArgument(format!(
                    "warm start has {} weights, dataset has {m} features",
                    w.len()
                )));
            }
            if !all_finite(w) || !b.is_finite() {
                return Err(Error::NonFinite("warm start"));
            }
            (w.clone(), *b)
        }
        None => (vec![0.0; m], data.label_sum() / data.n_samples() as f64),
    };

    let mut step = 1.0 / lipschitz_estimate(data);
    let mut x = Iterate::at(data, w0, b0, lambda);
    let (gw, gb) = grad_from_slacks(data, &x.xi);
    let mut residual = kkt_residual_from_grad(&gw, gb, &x.w, lambda);
    let mut history = Vec::new();
    if opts.record_history {
        history.push(x.obj);
    }

    let mut y_pt = x.clone();
    let mut momentum = 1.0f64;
    let mut iterations = 0;
    let mut stable_count = 0usize;
    let mut last_sig = x.piece_signature();
    let mut last_polished_sig = None;

    while residual > opts.tol && iterations < opts.max_iter {
        let (gw, gb) = grad_from_slacks(data, &y_pt.xi);
        let mut candidate;
        let mut halvings = 0;
        loop {
            let w: Vec<f64> = y_pt
                .w
                .iter()
                .zip(&gw)
                .map(|(wj, g)| soft_threshold(wj - step * g, step * lambda))
                .collect();
            let b = y_pt.b - step * gb;
            candidate = Iterate::at(data, w, b, lambda);
            let dw: Vec<f64> = candidate.w.iter().zip(&y_pt.w).map(|(a, c)| a - c).collect();
            let db = candidate.b - y_pt.b;
            let lin = dot(&gw, &dw) + gb * db;
            let quad = (dot(&dw, &dw) + db * db) / (2.0 * step);
            let majorant = y_pt.loss + lin + quad;
            if candidate.loss <= majorant + 1e-15 * y_pt.loss.abs().max(1.0) || halvings >= 60 {
                break;
            }
            step *= 0.5;
            halvings += 1;
        }

        let restarted = momentum == 1.0;
        if candidate.obj > x.obj + rounding_slack(x.obj) {
            if restarted {
                // A plain proximal step from x failed to descend: rounding floor.
                break;
            }
            momentum = 1.0;
            y_pt = x.clone();
            continue;
        }

        iterations += 1;
        let prev = std::mem::replace(&mut x, candidate);
        let (gw, gb) = grad_from_slacks(data, &x.xi);
        residual = kkt_residual_from_grad(&gw, gb, &x.w, lambda);
        if opts.record_history {
            history.push(x.obj);
        }
        if residual <= opts.tol {
            break;
        }

        if opts.polish {
            let sig = x.piece_signature();
            if sig == last_sig {
                stable_count += 1;
            } else {
                stable_count = 0;
                last_sig = sig.clone();
            }
            if stable_count >= 10 && last_polished_sig.as_ref() != Some(&sig) {
                last_polished_sig = Some(sig);
                if let Some((w, b)) = polish_piece(data, &x, lambda) {
                    let p = Iterate::at(data, w, b, lambda);
                    if p.obj <= x.obj + rounding_slack(x.obj) {
                        let (gw, gb) = grad_from_slacks(data, &p.xi);
                        residual = kkt_residual_from_grad(&gw, gb, &p.w, lambda);
                        x = p;
                        if opts.record_history {
                            history.push(x.obj);
                        }
                        momentum = 1.0;
                        y_pt = x.clone();
                        continue;
                    }
                }
            }
        }

        let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        let beta = (momentum - 1.0) / next_momentum;
        momentum = next_momentum;
        let w: Vec<f64> = x
            .w
            .iter()
            .zip(&prev.w)
            .map(|(a, p)| a + beta * (a - p))
            .collect();
        let b = x.b + beta * (x.b - prev.b);
        y_pt = Iterate::at(data, w, b, lambda);
    }

    Ok(PrimalModel {
        lambda,
        objective: x.obj,
        weights: x.w,
        bias: x.b,
        iterations,
        converged: residual <= opts.tol,
        kkt_residual: residual,
        history,
    })
}
