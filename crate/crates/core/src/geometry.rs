//! Vector geometry behind the screening set: null-space projections, the
//! one-parameter ball family `B_t` and its minimal-radius member.
//!
//! Every ball in the family passes through `θ₁`, and on the hyperplane
//! `(θ₁ − 1/λ₁)ᵀ(θ − θ₁) = 0` all of them cut out the same slice. The
//! minimal-radius member is centered on that hyperplane.

use crate::error::{Error, Result};
use crate::vecops::{axpy, dot, norm, sub};

/// Absolute tolerance used for membership tests on squared distances.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// `P_u(v) = v − (vᵀu/‖u‖²)u`, the projection of `v` onto the null space of `u`.
pub fn project_null(u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let uu = dot(u, u);
    if uu == 0.0 || !uu.is_finite() {
        return Err(Error::UndefinedProjection);
    }
    Ok(axpy(v, -dot(v, u) / uu, u))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    /// `‖p − c‖² ≤ r² + tol`
    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        let d = sub(p, &self.center);
        dot(&d, &d) <= self.radius * self.radius + tol
    }
}

/// The set `{p : normalᵀ(p − anchor) ≤ 0}`; `normal` points out of the set.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub unit_normal: Vec<f64>,
    pub anchor: Vec<f64>,
}

impl Halfspace {
    pub fn new(normal: &[f64], anchor: &[f64]) -> Result<Self> {
        let nn = norm(normal);
        if nn == 0.0 || !nn.is_finite() {
            return Err(Error::UndefinedProjection);
        }
        Ok(Self {
            unit_normal: normal.iter().map(|x| x / nn).collect(),
            anchor: anchor.to_vec(),
        })
    }

    /// Signed distance `normalᵀ(p − anchor)`; nonpositive inside.
    pub fn signed_distance(&self, p: &[f64]) -> f64 {
        dot(&self.unit_normal, &sub(p, &self.anchor))
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        self.signed_distance(p) <= tol
    }
}

fn check_lambdas(lambda1: f64, lambda2: f64) -> Result<()> {
    if !(lambda1.is_finite() && lambda2.is_finite()) || lambda2 <= 0.0 || lambda1 <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "regularization weights must be positive, got λ₁={lambda1}, λ₂={lambda2}"
        )));
    }
    if lambda1 < lambda2 {
        return Err(Error::InvalidArgument(format!(
            "need λ₁ ≥ λ₂, got λ₁={lambda1}, λ₂={lambda2}"
        )));
    }
    Ok(())
}

/// Member `t ≥ 0` of the ball family:
/// `c = ½(tθ₁ − t/λ₁ + 1/λ₂ + θ₁)`, `l = ½‖tθ₁ − t/λ₁ + 1/λ₂ − θ₁‖`.
pub fn ball_at_t(theta1: &[f64], lambda1: f64, lambda2: f64, t: f64) -> Result<Ball> {
    check_lambdas(lambda1, lambda2)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("t must be finite and ≥ 0, got {t}")));
    }
    let (inv1, inv2) = (1.0 / lambda1, 1.0 / lambda2);
    let mut center = Vec::with_capacity(theta1.len());
    let mut half_diff = Vec::with_capacity(theta1.len());
    for &th in theta1 {
        let shift = t * th - t * inv1 + inv2;
        center.push(0.5 * (shift + th));
        half_diff.push(0.5 * (shift - th));
    }
    Ok(Ball {
        center,
        radius: norm(&half_diff),
    })
}

/// The `t` at which the family's radius is smallest,
/// `t* = 1 − (1/λ₂ − 1/λ₁)·(dᵀ1)/‖d‖²` with `d = θ₁ − 1/λ₁`.
///
/// Returns `None` when `d = 0`: every member is then the same ball.
pub fn optimal_t(theta1: &[f64], lambda1: f64, lambda2: f64) -> Result<Option<f64>> {
    check_lambdas(lambda1, lambda2)?;
    let inv1 = 1.0 / lambda1;
    let d: Vec<f64> = theta1.iter().map(|th| th - inv1).collect();
    let dd = dot(&d, &d);
    if dd == 0.0 {
        return Ok(None);
    }
    let delta = 1.0 / lambda2 - inv1;
    Ok(Some(1.0 - delta * d.iter().sum::<f64>() / dd))
}

/// Minimal-radius member of the ball family, in closed form:
/// `ĉ = ½(1/λ₂ − 1/λ₁)P_a(1) + θ₁`, `l = ½(1/λ₂ − 1/λ₁)‖P_a(1)‖`.
///
/// `a` must be a unit vector parallel (either sign) to `θ₁ − 1/λ₁`. With
/// `λ₁ = λ₂` the result is the zero-radius ball at `θ₁`.
pub fn min_radius_ball(
    theta1: &[f64],
    lambda1: f64,
    lambda2: f64,
    a: &[f64],
) -> Result<(f64, Ball)> {
    check_lambdas(lambda1, lambda2)?;
    if a.len() != theta1.len() {
        return Err(Error::InconsistentInputs("normal and θ₁ lengths differ".into()));
    }
    if (norm(a) - 1.0).abs() > 1e-9 {
        return Err(Error::InconsistentInputs("normal is not a unit vector".into()));
    }
    let inv1 = 1.0 / lambda1;
    let d: Vec<f64> = theta1.iter().map(|th| th - inv1).collect();
    let dn = norm(&d);
    if dn == 0.0 || (dot(a, &d).abs() / dn - 1.0).abs() > 1e-9 {
        return Err(Error::InconsistentInputs(
            "normal is not parallel to θ₁ − 1/λ₁".into(),
        ));
    }
    let t = optimal_t(theta1, lambda1, lambda2)?.expect("d is nonzero");
    let delta = 1.0 / lambda2 - inv1;
    let ones = vec![1.0; theta1.len()];
    let pa1 = project_null(a, &ones)?;
    let center = axpy(theta1, 0.5 * delta, &pa1);
    let radius = 0.5 * delta * norm(&pa1);
    Ok((t, Ball { center, radius }))
}
