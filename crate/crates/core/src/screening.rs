//! Safe screening for the squared-hinge L1 SVM.
//!
//! Given the dual optimum `θ₁` at `λ₁` and a target `λ₂ < λ₁`, the dual
//! optimum `θ₂` lies in
//!
//! ```text
//! K = { θ : ‖θ − c‖ ≤ ‖b‖,  âᵀ(θ − θ₁) ≤ 0,  θᵀy = 0 }
//! b = ½(1/λ₂ − θ₁),  c = ½(1/λ₂ + θ₁),  â = (1/λ₁ − θ₁)/‖1/λ₁ − θ₁‖
//! ```
//!
//! and feature `j` can only be active at `λ₂` if `max_K |θᵀf̂_j| ≥ 1`. The
//! maximum splits into `−min_K θᵀf̂` and `−min_K θᵀ(−f̂)`, each of which has a
//! closed form depending on where the minimizer sits:
//!
//! * `BetaZero`: `P_y(f̂)` points against `P_y(â)` (cosine within `COS_EPS`
//!   of −1); at exact collinearity the minimizer is `θ₁` itself and the value
//!   is `‖P_y f̂‖/‖P_y â‖ · âᵀθ₁`. The value is taken from the corner
//!   expression, which has that limit and stays exact inside the band.
//! * `AlphaZero`: the minimizer over the ball slice already satisfies the
//!   halfspace; value `‖P_y b‖‖P_y f̂‖ − P_y(b)ᵀP_y(f̂) − θ₁ᵀf̂`.
//! * `InteriorCorner`: the minimizer lies on the halfspace boundary, where the
//!   slice can be taken from the minimal-radius ball instead; value
//!   `½(1/λ₂ − 1/λ₁)(‖q‖‖f⊥‖ − qᵀf⊥) − θ₁ᵀf̂` with `q`, `f⊥` the components of
//!   `1` and `f̂` orthogonal to `span{â, y}`.
//!
//! All shared quantities are computed once per context; per feature the only
//! O(nnz) work is `θ₁ᵀf̂`.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureStats};
use crate::error::{Error, Result};
use crate::geometry::{self, Ball};
use crate::solver::{self, ThetaVector};
use crate::vecops::{axpy, dot, norm};

/// Keep a feature when its bound reaches `1 − KEEP_EPS`.
pub const KEEP_EPS: f64 = 1e-9;
/// Tolerance on the cosine for the collinear (`BetaZero`) branch.
pub const COS_EPS: f64 = 1e-9;
/// Largest `|θ₁ᵀy|` accepted from an approximate solve.
pub const THETA_BALANCE_TOL: f64 = 1e-6;
/// Most negative entry accepted in `θ₁`.
pub const THETA_NEG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `P_y(f̂) = 0`: `θᵀf̂` vanishes on the whole feasible set.
    DegenerateF,
    BetaZero,
    AlphaZero,
    InteriorCorner,
}

/// Everything derived from `(λ₁, θ₁, λ₂)` that all features share.
#[derive(Debug, Clone)]
pub struct ScreeningContext {
    pub lambda1: f64,
    pub lambda2: f64,
    /// `θ₁` with its (tiny) component along `y` removed.
    pub theta1: Vec<f64>,
    pub labels: Vec<f64>,
    /// `â`; `None` when the halfspace carries no information.
    pub normal: Option<Vec<f64>>,
    pub b_vec: Vec<f64>,
    pub c_vec: Vec<f64>,
    pub scalars: SharedScalars,
    /// Minimal-radius ball `(t*, B_{t*})` (only with a normal).
    pub min_ball: Option<(f64, Ball)>,
    /// `P_â(1)`
    pub proj_a_one: Option<Vec<f64>>,
    /// `P_{P_â(y)}(P_â(1))`
    pub nested_one: Option<Vec<f64>>,
}

/// Scalars reused by every feature.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SharedScalars {
    pub n: f64,
    /// `yᵀ1`
    pub label_sum: f64,
    pub inv_lambda1: f64,
    pub inv_lambda2: f64,
    /// `‖θ₁ − 1/λ₁‖`
    pub dist_to_unconstrained: f64,
    /// `âᵀ1`, `âᵀy`, `âᵀθ₁`, `‖P_y(â)‖`
    pub a_dot_one: f64,
    pub a_dot_y: f64,
    pub a_dot_theta1: f64,
    pub proj_y_a_norm: f64,
    /// `bᵀy`, `‖P_y(b)‖`, `P_y(â)ᵀP_y(b)`
    pub b_dot_y: f64,
    pub proj_y_b_norm: f64,
    pub proj_y_a_dot_b: f64,
    /// `P_y(1)ᵀu` with `u = P_y(â)/‖P_y(â)‖`
    pub one_dot_u: f64,
    /// `‖P_{P_â(y)}(P_â(1))‖`
    pub nested_one_norm: f64,
}

/// The per-feature inputs to the bound: cached statistics and `θ₁ᵀf̂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedFeature {
    pub stats: FeatureStats,
    pub theta1_dot: f64,
}

impl WeightedFeature {
    pub fn from_column(ctx: &ScreeningContext, data: &Dataset, stats: FeatureStats, j: usize) -> Self {
        Self {
            stats,
            theta1_dot: data.column(j).weighted_dot(data.labels(), &ctx.theta1),
        }
    }

    /// From an explicit dense `f̂` (already multiplied by the labels).
    pub fn from_dense(ctx: &ScreeningContext, fhat: &[f64]) -> Self {
        let y = &ctx.labels;
        let dot_y = dot(fhat, y);
        let mu = dot_y / y.len() as f64;
        let proj = axpy(fhat, -mu, y);
        Self {
            stats: FeatureStats {
                dot_y,
                dot_one: fhat.iter().sum(),
                sq_norm: dot(fhat, fhat),
                proj_y_norm: norm(&proj),
            },
            theta1_dot: dot(fhat, &ctx.theta1),
        }
    }

    /// The same quantities for `−f̂`.
    pub fn negated(&self) -> Self {
        Self {
            stats: FeatureStats {
                dot_y: -self.stats.dot_y,
                dot_one: -self.stats.dot_one,
                ..self.stats
            },
            theta1_dot: -self.theta1_dot,
        }
    }
}

/// Inner products of one feature in the `y`-orthogonal frame. Flipping the
/// sign of `f̂` flips every linear term and leaves the norms alone.
#[derive(Debug, Clone, Copy)]
struct Projected {
    norm_f: f64,
    /// `‖P_y(f̂)‖`
    pf: f64,
    /// `θ₁ᵀf̂`
    t1f: f64,
    /// `P_y(f̂)ᵀu`
    fu: f64,
    /// `P_y(b)ᵀP_y(f̂)`
    fb: f64,
    /// `‖f⊥‖`, component of `f̂` orthogonal to `span{â, y}`
    f_perp: f64,
    /// `qᵀf⊥`
    qf: f64,
}

impl Projected {
    fn new(ctx: &ScreeningContext, wf: &WeightedFeature) -> Self {
        let s = &ctx.scalars;
        let st = &wf.stats;
        let t1f = wf.theta1_dot;
        let b_dot_f = 0.5 * (s.inv_lambda2 * st.dot_one - t1f);
        let fb = b_dot_f - s.b_dot_y * st.dot_y / s.n;
        let pf = st.proj_y_norm;
        let (fu, f_perp, qf) = if ctx.normal.is_some() {
            let a_dot_f = (s.inv_lambda1 * st.dot_one - t1f) / s.dist_to_unconstrained;
            let fu = (a_dot_f - s.a_dot_y * st.dot_y / s.n) / s.proj_y_a_norm;
            let f_perp = (pf * pf - fu * fu).max(0.0).sqrt();
            let f_one = st.dot_one - s.label_sum * st.dot_y / s.n;
            (fu, f_perp, f_one - s.one_dot_u * fu)
        } else {
            (0.0, pf, 0.0)
        };
        Self {
            norm_f: st.sq_norm.sqrt(),
            pf,
            t1f,
            fu,
            fb,
            f_perp,
            qf,
        }
    }

    fn negated(self) -> Self {
        Self {
            t1f: -self.t1f,
            fu: -self.fu,
            fb: -self.fb,
            qf: -self.qf,
            ..self
        }
    }
}

fn neg_min_projected(ctx: &ScreeningContext, p: &Projected) -> (f64, Branch) {
    if p.pf <= 1e-12 * p.norm_f || p.pf == 0.0 {
        return (0.0, Branch::DegenerateF);
    }
    if ctx.normal.is_some() && p.fu / p.pf <= -1.0 + COS_EPS {
        // At exact collinearity the corner value reduces to
        // ‖P_y f̂‖/‖P_y â‖·âᵀθ₁; inside the ε band it stays exact where that
        // expression drifts by O(‖P_y f̂‖·sin φ·l). Below the √ε noise floor
        // of f⊥ the closed form is the better of the two.
        let s = &ctx.scalars;
        let value = if p.f_perp <= 4.0 * f64::EPSILON.sqrt() * p.pf {
            p.pf / s.proj_y_a_norm * s.a_dot_theta1
        } else {
            ball_or_corner(ctx, p).0
        };
        return (value, Branch::BetaZero);
    }
    ball_or_corner(ctx, p)
}

/// Branches 2 and 3.
fn ball_or_corner(ctx: &ScreeningContext, p: &Projected) -> (f64, Branch) {
    let s = &ctx.scalars;
    let has_normal = ctx.normal.is_some();
    let corner = || {
        let delta = s.inv_lambda2 - s.inv_lambda1;
        (
            0.5 * delta * (s.nested_one_norm * p.f_perp - p.qf) - p.t1f,
            Branch::InteriorCorner,
        )
    };
    if s.proj_y_b_norm == 0.0 {
        // The ball meets θᵀy = 0 only at θ₁.
        return if has_normal {
            corner()
        } else {
            (-p.t1f, Branch::AlphaZero)
        };
    }
    let ball_min_feasible =
        !has_normal || s.proj_y_a_dot_b / s.proj_y_b_norm - s.proj_y_a_norm * p.fu / p.pf <= 0.0;
    if ball_min_feasible {
        return (s.proj_y_b_norm * p.pf - p.fb - p.t1f, Branch::AlphaZero);
    }
    corner()
}

/// `−min_{θ∈K} θᵀf̂` and the branch that produced it.
pub fn neg_min(ctx: &ScreeningContext, feature: &WeightedFeature) -> (f64, Branch) {
    neg_min_projected(ctx, &Projected::new(ctx, feature))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureBound {
    pub index: usize,
    /// `−min θᵀf̂`
    pub m1: f64,
    /// `−min θᵀ(−f̂) = max θᵀf̂`
    pub m2: f64,
    pub bound: f64,
    pub branch_pos: Branch,
    pub branch_neg: Branch,
    pub keep: bool,
}

/// Bound for a feature given its cached statistics and `θ₁ᵀf̂`.
pub fn bound_feature(ctx: &ScreeningContext, index: usize, feature: &WeightedFeature) -> FeatureBound {
    let p = Projected::new(ctx, feature);
    let (m1, branch_pos) = neg_min_projected(ctx, &p);
    let (m2, branch_neg) = neg_min_projected(ctx, &p.negated());
    let bound = m1.max(m2);
    FeatureBound {
        index,
        m1,
        m2,
        bound,
        branch_pos,
        branch_neg,
        keep: bound >= 1.0 - KEEP_EPS,
    }
}

pub fn screen_feature(
    ctx: &ScreeningContext,
    data: &Dataset,
    stats: &[FeatureStats],
    j: usize,
) -> FeatureBound {
    bound_feature(ctx, j, &WeightedFeature::from_column(ctx, data, stats[j], j))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    /// Rayon's current pool; output order is still by feature index.
    Rayon,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchCounts {
    pub degenerate_f: usize,
    pub beta_zero: usize,
    pub alpha_zero: usize,
    pub interior_corner: usize,
}

impl BranchCounts {
    pub fn add(&mut self, b: Branch) {
        match b {
            Branch::DegenerateF => self.degenerate_f += 1,
            Branch::BetaZero => self.beta_zero += 1,
            Branch::AlphaZero => self.alpha_zero += 1,
            Branch::InteriorCorner => self.interior_corner += 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScreenReport {
    pub lambda1: f64,
    pub lambda2: f64,
    /// 0-based indices of features that may be active at `λ₂`.
    pub kept: Vec<usize>,
    pub bounds: Vec<FeatureBound>,
    /// Branches over both signs of every feature.
    pub branches: BranchCounts,
    pub elapsed_seconds: f64,
}

impl ScreenReport {
    pub fn rejection_rate(&self) -> f64 {
        if self.bounds.is_empty() {
            return 0.0;
        }
        1.0 - self.kept.len() as f64 / self.bounds.len() as f64
    }

    pub fn discarded(&self) -> Vec<usize> {
        self.bounds.iter().filter(|b| !b.keep).map(|b| b.index).collect()
    }

    pub fn to_json(&self) -> ScreenReportJson {
        ScreenReportJson {
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            kept: self.kept.iter().map(|j| j + 1).collect(),
            bounds: self.bounds.iter().map(|b| b.bound).collect(),
            branches: self.branches,
            elapsed_seconds: self.elapsed_seconds,
            rejection_rate: self.rejection_rate(),
        }
    }
}

/// Serialized report; `kept` is 1-based to match the input format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenReportJson {
    pub lambda1: f64,
    pub lambda2: f64,
    pub kept: Vec<usize>,
    pub bounds: Vec<f64>,
    pub branches: BranchCounts,
    pub elapsed_seconds: f64,
    pub rejection_rate: f64,
}

/// Runs the screening test over every feature.
pub fn screen_all(
    ctx: &ScreeningContext,
    data: &Dataset,
    stats: &[FeatureStats],
    parallelism: Parallelism,
) -> ScreenReport {
    let start = Instant::now();
    let m = data.n_features();
    let bounds: Vec<FeatureBound> = match parallelism {
        Parallelism::Sequential => (0..m).map(|j| screen_feature(ctx, data, stats, j)).collect(),
        Parallelism::Rayon => (0..m)
            .into_par_iter()
            .map(|j| screen_feature(ctx, data, stats, j))
            .collect(),
    };
    let mut branches = BranchCounts::default();
    let mut kept = Vec::new();
    for b in &bounds {
        branches.add(b.branch_pos);
        branches.add(b.branch_neg);
        if b.keep {
            kept.push(b.index);
        }
    }
    ScreenReport {
        lambda1: ctx.lambda1,
        lambda2: ctx.lambda2,
        kept,
        bounds,
        branches,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    }
}

impl ScreeningContext {
    /// Builds the context from labels and a dual point, without reference to a
    /// dataset (so `λ₁ ≤ λ_max` is not checked here; see [`build_context`]).
    pub fn new(labels: &[f64], theta1: &ThetaVector, lambda2: f64) -> Result<Self> {
        let lambda1 = theta1.lambda;
        let n = labels.len();
        if !(lambda2 > 0.0) || !lambda2.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda2 must be positive, got {lambda2}")));
        }
        if !(lambda2 < lambda1) {
            return Err(Error::InvalidArgument("lambda2 must be < lambda1".into()));
        }
        if theta1.values.len() != n {
            return Err(Error::InvalidArgument(format!(
                "θ₁ has {} entries, dataset has {n} samples",
                theta1.values.len()
            )));
        }
        let min_theta = theta1.values.iter().copied().fold(f64::INFINITY, f64::min);
        if min_theta < -THETA_NEG_TOL {
            return Err(Error::InfeasibleTheta(format!("min θ₁ = {min_theta:e} < 0")));
        }
        let balance = dot(&theta1.values, labels);
        if balance.abs() > THETA_BALANCE_TOL {
            return Err(Error::InfeasibleTheta(format!("|θ₁ᵀy| = {:e}", balance.abs())));
        }

        let nf = n as f64;
        let theta = axpy(&theta1.values, -balance / nf, labels);
        let inv1 = 1.0 / lambda1;
        let inv2 = 1.0 / lambda2;
        let ones = vec![1.0; n];
        let label_sum: f64 = labels.iter().sum();

        let b_vec: Vec<f64> = theta.iter().map(|t| 0.5 * (inv2 - t)).collect();
        let c_vec: Vec<f64> = theta.iter().map(|t| 0.5 * (inv2 + t)).collect();
        let b_dot_y = dot(&b_vec, labels);
        let proj_y_b = axpy(&b_vec, -b_dot_y / nf, labels);
        let proj_y_b_norm = norm(&proj_y_b);

        let to_unc: Vec<f64> = theta.iter().map(|t| inv1 - t).collect();
        let dist = norm(&to_unc);
        let mut scalars = SharedScalars {
            n: nf,
            label_sum,
            inv_lambda1: inv1,
            inv_lambda2: inv2,
            dist_to_unconstrained: dist,
            b_dot_y,
            proj_y_b_norm,
            ..Default::default()
        };

        let mut normal = None;
        let mut min_ball = None;
        let mut proj_a_one = None;
        let mut nested_one = None;
        if dist > 1e-12 * inv1 * nf.sqrt() {
            let a: Vec<f64> = to_unc.iter().map(|x| x / dist).collect();
            let a_dot_y = dot(&a, labels);
            let proj_y_a = axpy(&a, -a_dot_y / nf, labels);
            let pya_norm = norm(&proj_y_a);
            if pya_norm > 1e-12 {
                let u: Vec<f64> = proj_y_a.iter().map(|x| x / pya_norm).collect();
                let proj_y_one = axpy(&ones, -label_sum / nf, labels);
                let one_dot_u = dot(&proj_y_one, &u);
                let nested = axpy(&proj_y_one, -one_dot_u, &u);
                scalars.a_dot_one = a.iter().sum();
                scalars.a_dot_y = a_dot_y;
                scalars.a_dot_theta1 = dot(&a, &theta);
                scalars.proj_y_a_norm = pya_norm;
                scalars.proj_y_a_dot_b = dot(&proj_y_a, &proj_y_b);
                scalars.one_dot_u = one_dot_u;
                scalars.nested_one_norm = norm(&nested);
                min_ball = Some(geometry::min_radius_ball(&theta, lambda1, lambda2, &a)?);
                proj_a_one = Some(geometry::project_null(&a, &ones)?);
                nested_one = Some(nested);
                normal = Some(a);
            }
        }

        Ok(Self {
            lambda1,
            lambda2,
            theta1: theta,
            labels: labels.to_vec(),
            normal,
            b_vec,
            c_vec,
            scalars,
            min_ball,
            proj_a_one,
            nested_one,
        })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Radius of the `t = 0` ball, `‖b‖`.
    pub fn radius(&self) -> f64 {
        norm(&self.b_vec)
    }

    /// `θ ∈ K` up to `tol` on each constraint.
    pub fn contains(&self, theta: &[f64], tol: f64) -> bool {
        let d: Vec<f64> = theta.iter().zip(&self.c_vec).map(|(a, c)| a - c).collect();
        let in_ball = norm(&d) <= self.radius() + tol;
        let in_half = self.normal.as_ref().is_none_or(|a| {
            let s: f64 = a
                .iter()
                .zip(theta.iter().zip(&self.theta1))
                .map(|(ai, (t, t1))| ai * (t - t1))
                .sum();
            s <= tol
        });
        in_ball && in_half && dot(theta, &self.labels).abs() <= tol
    }
}

/// Validates `λ_max ≥ λ₁ > λ₂ > 0` against the data and builds the context.
pub fn build_context(data: &Dataset, theta1: &ThetaVector, lambda2: f64) -> Result<ScreeningContext> {
    let lmax = solver::lambda_max(data).lambda_max;
    if theta1.lambda > lmax * (1.0 + 1e-9) {
        return Err(Error::InvalidArgument(format!(
            "lambda1 = {} exceeds lambda_max = {lmax}",
            theta1.lambda
        )));
    }
    ScreeningContext::new(data.labels(), theta1, lambda2)
}

/// Dual point at `λ₁ = λ_max`: `w = 0`, `b = (n₊ − n₋)/n`.
pub fn theta_at_lambda_max(data: &Dataset) -> Result<ThetaVector> {
    let lm = solver::lambda_max(data);
    if lm.lambda_max <= 0.0 {
        return Err(Error::InvalidArgument(
            "lambda_max is 0 (single-class labels); nothing to screen".into(),
        ));
    }
    solver::theta_from_primal(data, &vec![0.0; data.n_features()], lm.bias, lm.lambda_max)
}
