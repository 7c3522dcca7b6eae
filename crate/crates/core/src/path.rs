//! Regularization path with screening between grid points.
//!
//! Each step screens at the new `λ` using the previous step's converged dual
//! point, solves only over the kept features (warm-started from the previous
//! weights), and writes the result back into a full-length weight vector. In
//! verify mode the full problem is also solved from scratch and any feature
//! that screening discarded but the full solve uses is counted as a violation.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{compute_feature_stats, Dataset};
use crate::error::{Error, Result};
use crate::screening::{screen_all, Parallelism, ScreeningContext};
use crate::solver::{self, solve_primal, theta_from_primal, PrimalModel, SolverOptions, ThetaVector};

/// Weights with magnitude at or below this count as zero.
pub const ACTIVE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    /// `λ_max·ratio^i` for `i = 1..=size`.
    Geometric { size: usize, ratio: f64 },
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct PathConfig {
    pub grid: Grid,
    /// `warm_start` is ignored; the path supplies its own.
    pub solver: SolverOptions,
    pub verify: bool,
    pub screen: bool,
    pub parallelism: Parallelism,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            grid: Grid::Geometric { size: 10, ratio: 0.8 },
            solver: SolverOptions::default(),
            verify: false,
            screen: true,
            parallelism: Parallelism::Rayon,
        }
    }
}

/// `[λ_max·ratio, …, λ_max·ratioᵏ]`
pub fn lambda_grid(lambda_max: f64, k: usize, ratio: f64) -> Result<Vec<f64>> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!("ratio must be in (0, 1), got {ratio}")));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("grid size must be at least 1".into()));
    }
    if !(lambda_max > 0.0) || !lambda_max.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda_max must be positive, got {lambda_max}")));
    }
    let mut out = Vec::with_capacity(k);
    let mut lam = lambda_max;
    for _ in 0..k {
        lam *= ratio;
        out.push(lam);
    }
    Ok(out)
}

fn check_explicit(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty lambda list".into()));
    }
    if grid.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
        return Err(Error::InvalidArgument("every lambda must be positive and finite".into()));
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("lambda list must be strictly decreasing".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStep {
    pub lambda: f64,
    pub kept: usize,
    pub active: usize,
    /// Discarded features the full solve uses; `None` when not verified.
    pub violations: Option<usize>,
    pub screen_ms: f64,
    pub solve_ms: f64,
    pub objective: f64,
    pub converged: bool,
    /// False when the screening point came from an unconverged solve.
    pub trusted: bool,
    /// Largest `|w_reduced − w_full|` in verify mode.
    pub max_weight_diff: Option<f64>,
    pub full_objective: Option<f64>,
    #[serde(skip)]
    pub weights: Vec<f64>,
    #[serde(skip)]
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathReport {
    pub lambda_max: f64,
    pub steps: Vec<PathStep>,
}

impl PathReport {
    pub fn total_violations(&self) -> usize {
        self.steps.iter().filter_map(|s| s.violations).sum()
    }

    /// `lambda,kept,active,violations,screen_ms,solve_ms,objective`; the
    /// violations cell is empty for unverified steps.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["lambda", "kept", "active", "violations", "screen_ms", "solve_ms", "objective"])?;
        for s in &self.steps {
            w.write_record([
                s.lambda.to_string(),
                s.kept.to_string(),
                s.active.to_string(),
                s.violations.map(|v| v.to_string()).unwrap_or_default(),
                format!("{:.3}", s.screen_ms),
                format!("{:.3}", s.solve_ms),
                s.objective.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub fn run_path(data: &Dataset, cfg: &PathConfig) -> Result<PathReport> {
    let lm = solver::lambda_max(data);
    if !(lm.lambda_max > 0.0) {
        return Err(Error::InvalidArgument(
            "lambda_max is 0 (all labels identical or all features zero); the path is empty".into(),
        ));
    }
    let grid = match &cfg.grid {
        Grid::Geometric { size, ratio } => lambda_grid(lm.lambda_max, *size, *ratio)?,
        Grid::Explicit(g) => {
            check_explicit(g)?;
            g.clone()
        }
    };
    let m = data.n_features();
    let stats = compute_feature_stats(data);

    let mut prev_theta = theta_from_primal(data, &vec![0.0; m], lm.bias, lm.lambda_max)?;
    let mut prev_w = vec![0.0; m];
    let mut prev_b = lm.bias;
    let mut prev_converged = true;
    let mut steps = Vec::with_capacity(grid.len());

    for &lambda in &grid {
        if lambda >= lm.lambda_max {
            let model = PrimalModel::zero_at(data, lambda);
            steps.push(PathStep {
                lambda,
                kept: 0,
                active: 0,
                violations: cfg.verify.then_some(0),
                screen_ms: 0.0,
                solve_ms: 0.0,
                objective: model.objective,
                converged: true,
                trusted: true,
                max_weight_diff: None,
                full_objective: None,
                weights: model.weights,
                bias: model.bias,
            });
            continue;
        }

        let t0 = Instant::now();
        let kept: Vec<usize> = if cfg.screen {
            let ctx = ScreeningContext::new(data.labels(), &prev_theta, lambda)?;
            screen_all(&ctx, data, &stats, cfg.parallelism).kept
        } else {
            (0..m).collect()
        };
        let screen_ms = millis(t0);

        let t1 = Instant::now();
        let reduced = data.select_columns(&kept);
        let opts = SolverOptions {
            warm_start: Some((kept.iter().map(|&j| prev_w[j]).collect(), prev_b)),
            ..cfg.solver.clone()
        };
        let model = solve_primal(&reduced, lambda, &opts)?;
        let mut weights = vec![0.0; m];
        for (&j, &w) in kept.iter().zip(&model.weights) {
            weights[j] = w;
        }
        let solve_ms = millis(t1);
        let objective = solver::objective(data, &weights, model.bias, lambda);

        let (mut violations, mut max_weight_diff, mut full_objective) = (None, None, None);
        if cfg.verify && model.converged {
            let full_opts = SolverOptions {
                warm_start: None,
                ..cfg.solver.clone()
            };
            let full = solve_primal(data, lambda, &full_opts)?;
            if full.converged {
                let mut is_kept = vec![false; m];
                for &j in &kept {
                    is_kept[j] = true;
                }
                violations = Some(
                    (0..m)
                        .filter(|&j| !is_kept[j] && full.weights[j].abs() > ACTIVE_TOL)
                        .count(),
                );
                max_weight_diff = Some(
                    weights
                        .iter()
                        .zip(&full.weights)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max),
                );
                full_objective = Some(full.objective);
            }
        }

        steps.push(PathStep {
            lambda,
            kept: kept.len(),
            active: solver::support_of(&weights, ACTIVE_TOL).len(),
            violations,
            screen_ms,
            solve_ms,
            objective,
            converged: model.converged,
            trusted: prev_converged,
            max_weight_diff,
            full_objective,
            weights: weights.clone(),
            bias: model.bias,
        });

        prev_theta = theta_from_primal(data, &weights, model.bias, lambda)?;
        // The reassembled point is exactly feasible only up to the solve's
        // accuracy; remove the label component so the next context accepts it.
        prev_theta = rebalance(prev_theta, data.labels());
        prev_w = weights;
        prev_b = model.bias;
        prev_converged = model.converged;
    }

    Ok(PathReport {
        lambda_max: lm.lambda_max,
        steps,
    })
}

fn rebalance(theta: ThetaVector, labels: &[f64]) -> ThetaVector {
    let n = labels.len() as f64;
    let s = theta.dot_labels(labels) / n;
    let values = theta
        .values
        .iter()
        .zip(labels)
        .map(|(t, y)| (t - s * y).max(0.0))
        .collect();
    ThetaVector {
        values,
        lambda: theta.lambda,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Dataset {
        Dataset::from_dense(
            &[
                vec![1.0, 0.0, 0.3, 1.0],
                vec![0.2, 1.0, 0.0, 1.0],
                vec![0.9, 0.1, 0.5, 1.0],
                vec![0.0, 0.8, 0.7, 1.0],
                vec![0.4, 0.4, 0.1, 1.0],
            ],
            &[1.0, -1.0, 1.0, -1.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn grid_examples() {
        assert_eq!(lambda_grid(2.0, 2, 0.5).unwrap(), vec![1.0, 0.5]);
        assert_eq!(lambda_grid(2.0, 1, 0.5).unwrap(), vec![1.0]);
        assert!(lambda_grid(2.0, 2, 1.0).is_err());
        assert!(lambda_grid(2.0, 2, 0.0).is_err());
        assert!(lambda_grid(2.0, 0, 0.5).is_err());
    }

    #[test]
    fn explicit_grid_checked() {
        assert!(check_explicit(&[1.0, 1.0]).is_err());
        assert!(check_explicit(&[1.0, -1.0]).is_err());
        assert!(check_explicit(&[]).is_err());
        assert!(check_explicit(&[2.0, 1.0]).is_ok());
    }

    #[test]
    fn single_class_has_no_path() {
        let d = Dataset::from_dense(&[vec![1.0], vec![2.0]], &[1.0, 1.0]).unwrap();
        let err = run_path(&d, &PathConfig::default()).unwrap_err();
        assert!(err.to_string().contains("lambda_max is 0"));
    }

    #[test]
    fn constant_feature_never_kept() {
        let d = small();
        let cfg = PathConfig {
            grid: Grid::Geometric { size: 6, ratio: 0.7 },
            verify: true,
            ..Default::default()
        };
        let rep = run_path(&d, &cfg).unwrap();
        assert_eq!(rep.total_violations(), 0);
        for s in &rep.steps {
            assert!(s.converged);
            assert_eq!(s.weights[3], 0.0);
            assert!(s.max_weight_diff.unwrap() <= 1e-8);
        }
    }

    #[test]
    fn screening_does_not_change_weights() {
        let d = small();
        let on = run_path(&d, &PathConfig::default()).unwrap();
        let off = run_path(
            &d,
            &PathConfig {
                screen: false,
                ..Default::default()
            },
        )
        .unwrap();
        for (a, b) in on.steps.iter().zip(&off.steps) {
            for (x, y) in a.weights.iter().zip(&b.weights) {
                assert!((x - y).abs() <= 1e-8);
            }
            assert_eq!(b.kept, d.n_features());
        }
    }

    #[test]
    fn lambdas_above_max_give_zero_model() {
        let d = small();
        let lmax = solver::lambda_max(&d).lambda_max;
        let cfg = PathConfig {
            grid: Grid::Explicit(vec![2.0 * lmax, 0.5 * lmax]),
            ..Default::default()
        };
        let rep = run_path(&d, &cfg).unwrap();
        assert_eq!(rep.steps[0].active, 0);
        assert!(rep.steps[1].converged);
    }

    #[test]
    fn csv_layout() {
        let rep = PathReport {
            lambda_max: 1.0,
            steps: vec![PathStep {
                lambda: 0.5,
                kept: 3,
                active: 1,
                violations: None,
                screen_ms: 0.25,
                solve_ms: 1.0,
                objective: 2.5,
                converged: true,
                trusted: true,
                max_weight_diff: None,
                full_objective: None,
                weights: vec![],
                bias: 0.0,
            }],
        };
        assert_eq!(
            rep.to_csv().unwrap(),
            "lambda,kept,active,violations,screen_ms,solve_ms,objective\n0.5,3,1,,0.250,1.000,2.5\n"
        );
    }
}
