//! Brute-force maximizer of a linear function over the screening set.
//!
//! The equality `θᵀy = 0` is eliminated with an orthonormal basis `U` of the
//! hyperplane, writing `θ = P_y(c) + Uz`. What remains is a ball and at most
//! one halfspace (or, in slice mode, one hyperplane) in `n − 1` dimensions,
//! where a linear objective is maximized either at the ball's own maximizer
//! or at the maximizer of the cap cut out by the hyperplane. For `n ≤ 3` the
//! result is checked against dense sampling of the boundary.
//!
//! This is a correctness instrument, not a fast path; it refuses problems
//! larger than [`OracleConfig::max_n`].

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Ball, Halfspace};
use crate::screening::ScreeningContext;
use crate::vecops::{axpy, dot, norm, scale};

/// Feasibility tolerance checked on every returned argmax.
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// Dense sampling must reproduce the candidate value to this absolute accuracy.
pub const SAMPLING_AGREEMENT: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub max_n: usize,
    /// Boundary samples for `n ≤ 3`; 0 skips sampling.
    pub dense_samples: usize,
    /// Vectors spanning the hyperplane `θᵀy = 0` (after orthogonalization);
    /// the standard basis is used when absent or insufficient.
    pub basis_hint: Option<Vec<Vec<f64>>>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            max_n: 10,
            dense_samples: 1_000_000,
            basis_hint: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceMode {
    /// `normalᵀ(θ − anchor) ≤ 0`
    Inequality,
    /// `normalᵀ(θ − anchor) = 0`
    Equality,
}

/// `max gᵀθ` over `ball ∩ {θᵀy = 0}`, optionally cut by a halfspace or
/// restricted to its boundary.
#[derive(Debug, Clone, Copy)]
pub struct LinearProblem<'a> {
    pub ball: &'a Ball,
    pub cut: Option<(&'a Halfspace, SliceMode)>,
    pub labels: &'a [f64],
    /// A feasible point, returned when the feasible set collapses to a point.
    pub anchor: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    pub argmax: Vec<f64>,
    /// Argmax feasible, first-order conditions hold, and (for `n ≤ 3`)
    /// sampling agrees.
    pub certified: bool,
    /// Best sampled value, when sampling ran.
    pub sampled: Option<f64>,
}

/// Orthonormal basis of `{v : vᵀy = 0}`.
pub fn hyperplane_basis(labels: &[f64], hint: Option<&[Vec<f64>]>) -> Result<Vec<Vec<f64>>> {
    let n = labels.len();
    let yn = norm(labels);
    if yn == 0.0 {
        return Err(Error::UndefinedProjection);
    }
    let mut basis: Vec<Vec<f64>> = vec![scale(labels, 1.0 / yn)];
    let standard = (0..n).map(|i| {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        e
    });
    let candidates: Vec<Vec<f64>> = hint
        .unwrap_or(&[])
        .iter()
        .filter(|v| v.len() == n)
        .cloned()
        .chain(standard)
        .collect();
    for v in candidates {
        if basis.len() == n {
            break;
        }
        let scale_in = norm(&v);
        if scale_in == 0.0 {
            continue;
        }
        let mut r = v;
        // Two passes of modified Gram–Schmidt.
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&r, q);
                r = axpy(&r, -c, q);
            }
        }
        let rn = norm(&r);
        if rn > 1e-8 * scale_in {
            basis.push(scale(&r, 1.0 / rn));
        }
    }
    basis.remove(0);
    Ok(basis)
}

fn lift(p0: &[f64], basis: &[Vec<f64>], z: &[f64]) -> Vec<f64> {
    let mut out = p0.to_vec();
    for (u, &zi) in basis.iter().zip(z) {
        for (o, ui) in out.iter_mut().zip(u) {
            *o += zi * ui;
        }
    }
    out
}

/// The reduced problem: maximize `qᵀz` on `‖z‖ ≤ r` with `eᵀz ≤ h` (or `= h`).
struct Reduced {
    q: Vec<f64>,
    r: f64,
    cut: Option<(Vec<f64>, f64, SliceMode)>,
}

impl Reduced {
    fn feasible(&self, z: &[f64], tol: f64) -> bool {
        if norm(z) > self.r + tol {
            return false;
        }
        match &self.cut {
            None => true,
            Some((e, h, SliceMode::Inequality)) => dot(e, z) <= h + tol * norm(e),
            Some((e, h, SliceMode::Equality)) => (dot(e, z) - h).abs() <= tol * norm(e),
        }
    }

    /// Closed-form candidate and whether its multipliers check out.
    fn solve(&self) -> (Vec<f64>, bool) {
        let k = self.q.len();
        let qn = norm(&self.q);
        let tol = 1e-10 * self.r.max(1.0);
        let ball_max = if qn > 0.0 {
            scale(&self.q, self.r / qn)
        } else {
            vec![0.0; k]
        };
        let plane = match &self.cut {
            None => return (ball_max, true),
            Some((e, h, mode)) => {
                if *mode == SliceMode::Inequality && self.feasible(&ball_max, tol) {
                    return (ball_max, true);
                }
                (e, *h)
            }
        };
        let (e, h) = plane;
        let ee = dot(e, e);
        if ee < 1e-24 {
            // The cut is parallel to the eliminated direction: it either holds
            // everywhere or nowhere on the hyperplane.
            return (ball_max, h >= -tol);
        }
        let z0 = scale(e, h / ee);
        let rem = (self.r * self.r - h * h / ee).max(0.0).sqrt();
        let q_perp = axpy(&self.q, -dot(&self.q, e) / ee, e);
        let qpn = norm(&q_perp);
        let z = if qpn > 1e-12 * norm(&self.q) {
            axpy(&z0, rem / qpn, &q_perp)
        } else {
            z0
        };
        // q = αz + βe with α ≥ 0 (ball), β ≥ 0 in inequality mode.
        let ok = self.multipliers_ok(&z, e);
        (z, ok)
    }

    fn multipliers_ok(&self, z: &[f64], e: &[f64]) -> bool {
        let zz = dot(z, z);
        let ze = dot(z, e);
        let ee = dot(e, e);
        let det = zz * ee - ze * ze;
        let qz = dot(&self.q, z);
        let qe = dot(&self.q, e);
        let scale_q = norm(&self.q).max(1e-300);
        let (alpha, beta) = if det.abs() <= 1e-14 * zz.max(1e-300) * ee {
            // z ∥ e: the slice is a single point, any multipliers do.
            return true;
        } else {
            ((qz * ee - qe * ze) / det, (zz * qe - ze * qz) / det)
        };
        let resid: Vec<f64> = self
            .q
            .iter()
            .zip(z.iter().zip(e))
            .map(|(qi, (zi, ei))| qi - alpha * zi - beta * ei)
            .collect();
        // Near-tangent cuts make the 2×2 system ill-conditioned, so measure
        // everything against the size of the two terms.
        let ta = alpha * zz.sqrt();
        let tb = beta * ee.sqrt();
        let tol = 1e-8 * (ta.abs() + tb.abs() + scale_q);
        let sign_ok = ta >= -tol
            && match &self.cut {
                Some((_, _, SliceMode::Inequality)) => tb >= -tol,
                _ => true,
            };
        norm(&resid) <= tol && sign_ok
    }

    /// Dense boundary sampling; only for `k ≤ 2`.
    fn sample(&self, samples: usize) -> f64 {
        let samples = samples.max(2);
        let val = |z: &[f64]| dot(&self.q, z);
        match self.q.len() {
            0 => 0.0,
            1 => {
                let (lo, hi) = self.interval_1d();
                (0..samples)
                    .map(|i| lo + (hi - lo) * i as f64 / (samples - 1) as f64)
                    .map(|z| val(&[z]))
                    .fold(f64::NEG_INFINITY, f64::max)
            }
            _ => self.sample_2d(samples),
        }
    }

    fn interval_1d(&self) -> (f64, f64) {
        let r = self.r;
        match &self.cut {
            None => (-r, r),
            Some((e, h, mode)) => {
                let (e, h) = (e[0], *h);
                if e.abs() < 1e-12 {
                    return (-r, r);
                }
                let x = (h / e).clamp(-r, r);
                match mode {
                    SliceMode::Equality => (x, x),
                    SliceMode::Inequality if e > 0.0 => (-r, x),
                    SliceMode::Inequality => (x, r),
                }
            }
        }
    }

    fn sample_2d(&self, samples: usize) -> f64 {
        let r = self.r;
        let val = |z: [f64; 2]| self.q[0] * z[0] + self.q[1] * z[1];
        let mut best = f64::NEG_INFINITY;
        let mut best_phi = None;
        let on_arc = matches!(self.cut, None | Some((_, _, SliceMode::Inequality)));
        let arc_ok = |phi: f64| {
            let z = [r * phi.cos(), r * phi.sin()];
            self.feasible(&z, 0.0).then_some(z)
        };
        if on_arc {
            let step = 2.0 * PI / samples as f64;
            for i in 0..samples {
                let phi = i as f64 * step;
                if let Some(z) = arc_ok(phi) {
                    let v = val(z);
                    if v > best {
                        best = v;
                        best_phi = Some(phi);
                    }
                }
            }
            if let Some(phi) = best_phi {
                // Golden-section refinement inside the neighbouring samples.
                let (mut a, mut b) = (phi - step, phi + step);
                let g = 0.5 * (5f64.sqrt() - 1.0);
                let f = |p: f64| arc_ok(p).map_or(f64::NEG_INFINITY, val);
                for _ in 0..80 {
                    let c = b - g * (b - a);
                    let d = a + g * (b - a);
                    if f(c) >= f(d) {
                        b = d;
                    } else {
                        a = c;
                    }
                }
                best = best.max(f(0.5 * (a + b)));
            }
        }
        if let Some((e, h, _)) = &self.cut {
            let ee = e[0] * e[0] + e[1] * e[1];
            if ee > 1e-24 {
                let z0 = [e[0] * h / ee, e[1] * h / ee];
                let half = (r * r - h * h / ee).max(0.0).sqrt();
                let t = [-e[1] / ee.sqrt(), e[0] / ee.sqrt()];
                for i in 0..samples {
                    let s = -half + 2.0 * half * i as f64 / (samples - 1) as f64;
                    best = best.max(val([z0[0] + s * t[0], z0[1] + s * t[1]]));
                }
            }
        }
        best
    }
}

/// Maximizes `gᵀθ` over the problem's feasible set.
pub fn maximize_linear(problem: &LinearProblem<'_>, g: &[f64], cfg: &OracleConfig) -> Result<OracleResult> {
    let y = problem.labels;
    let n = y.len();
    if n > cfg.max_n {
        return Err(Error::OracleTooLarge { n, cap: cfg.max_n });
    }
    if g.len() != n || problem.ball.center.len() != n || problem.anchor.len() != n {
        return Err(Error::InvalidArgument("oracle inputs have mismatched lengths".into()));
    }
    let yy = dot(y, y);
    let c = &problem.ball.center;
    let p0 = axpy(c, -dot(c, y) / yy, y);
    let r2 = problem.ball.radius.powi(2) - dot(c, y).powi(2) / yy;
    let r = r2.max(0.0).sqrt();
    if r < 1e-14 {
        let value = dot(g, problem.anchor);
        return Ok(OracleResult {
            value,
            argmax: problem.anchor.to_vec(),
            certified: true,
            sampled: None,
        });
    }
    let basis = hyperplane_basis(y, cfg.basis_hint.as_deref())?;
    let project = |v: &[f64]| basis.iter().map(|u| dot(u, v)).collect::<Vec<f64>>();
    let cut = problem.cut.map(|(hs, mode)| {
        let e = project(&hs.unit_normal);
        let h = dot(&hs.unit_normal, &axpy(&hs.anchor, -1.0, &p0));
        (e, h, mode)
    });
    let reduced = Reduced {
        q: project(g),
        r,
        cut,
    };
    let (z, kkt_ok) = reduced.solve();
    let argmax = lift(&p0, &basis, &z);
    let value = dot(g, &argmax);

    let feasible = problem.ball.contains(&argmax, FEASIBILITY_TOL * problem.ball.radius.max(1.0))
        && dot(&argmax, y).abs() <= FEASIBILITY_TOL
        && problem.cut.is_none_or(|(hs, mode)| {
            let s = hs.signed_distance(&argmax);
            match mode {
                SliceMode::Inequality => s <= FEASIBILITY_TOL,
                SliceMode::Equality => s.abs() <= FEASIBILITY_TOL,
            }
        });
    let mut certified = feasible && kkt_ok;
    let mut sampled = None;
    if n <= 3 && cfg.dense_samples > 0 {
        let offset = dot(g, &p0);
        let s = reduced.sample(cfg.dense_samples) + offset;
        certified &= (s - value).abs() <= SAMPLING_AGREEMENT;
        sampled = Some(s);
    }
    Ok(OracleResult {
        value,
        argmax,
        certified,
        sampled,
    })
}

/// The screening set as a [`LinearProblem`] input: ball `(c, ‖b‖)` and the
/// halfspace through `θ₁` when the context has a normal.
pub fn context_ball(ctx: &ScreeningContext) -> Ball {
    Ball {
        center: ctx.c_vec.clone(),
        radius: ctx.radius(),
    }
}

pub fn context_halfspace(ctx: &ScreeningContext) -> Option<Halfspace> {
    ctx.normal.as_ref().map(|a| Halfspace {
        unit_normal: a.clone(),
        anchor: ctx.theta1.clone(),
    })
}

pub fn oracle_max_with(ctx: &ScreeningContext, g: &[f64], cfg: &OracleConfig) -> Result<OracleResult> {
    let ball = context_ball(ctx);
    let hs = context_halfspace(ctx);
    let problem = LinearProblem {
        ball: &ball,
        cut: hs.as_ref().map(|h| (h, SliceMode::Inequality)),
        labels: &ctx.labels,
        anchor: &ctx.theta1,
    };
    maximize_linear(&problem, g, cfg)
}

/// `max_{θ∈K} gᵀθ` with the default configuration.
pub fn oracle_max(ctx: &ScreeningContext, g: &[f64]) -> Result<OracleResult> {
    oracle_max_with(ctx, g, &OracleConfig::default())
}

/// `−min_{θ∈K} θᵀf̂`
pub fn oracle_neg_min_with(ctx: &ScreeningContext, fhat: &[f64], cfg: &OracleConfig) -> Result<OracleResult> {
    oracle_max_with(ctx, &scale(fhat, -1.0), cfg)
}

pub fn oracle_neg_min(ctx: &ScreeningContext, fhat: &[f64]) -> Result<f64> {
    Ok(oracle_neg_min_with(ctx, fhat, &OracleConfig::default())?.value)
}
