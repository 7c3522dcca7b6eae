//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Tolerances are fixed constants below.

mod common;

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use svmscreen::cli;
use svmscreen::data::{compute_feature_stats, Dataset};
use svmscreen::geometry::{ball_at_t, min_radius_ball, Ball};
use svmscreen::oracle::{oracle_neg_min_with, OracleConfig};
use svmscreen::screening::{
    build_context, neg_min, screen_all, theta_at_lambda_max, Branch, Parallelism, ScreeningContext,
    WeightedFeature,
};
use svmscreen::solver::{
    first_features, grad_h, kkt_report, lambda_max, rounding_slack, smooth_loss, solve_primal,
    support_of, theta_from_primal, SolverOptions,
};
use svmscreen::vecops::{axpy, dot, norm, scale, sub};

const SAFETY_WEIGHT_TOL: f64 = 1e-8;
const KKT_TOL: f64 = 1e-9;
const BOUND_TOL: f64 = 1e-6;
const ORACLE_TOL: f64 = 1e-6;
const RADIUS_TOL: f64 = 1e-12;
const MEMBERSHIP_TOL: f64 = 1e-9;
const FD_REL_TOL: f64 = 1e-5;
const FD_STEP: f64 = 1e-6;
const LINEAR_RATIO: (f64, f64) = (1.6, 2.5);
const PATH_WEIGHT_TOL: f64 = 1e-8;

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: u32, name: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { id, name, pass, detail }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn solve(d: &Dataset, lambda: f64) -> svmscreen::solver::PrimalModel {
    solve_primal(d, lambda, &SolverOptions::default()).unwrap()
}

/// Criteria 1, 2 and the "converged KKT" half of 6 share one randomized suite.
fn safety_suite() -> (Outcome, Outcome, (usize, usize, f64)) {
    let mut rng = common::rng(1);
    let (mut instances, mut screenings, mut unconverged) = (0, 0, 0);
    let (mut unsafe_discards, mut invalid_bounds) = (0usize, 0usize);
    let mut worst_slack = f64::INFINITY;
    let mut rejection_sum = 0.0;
    let mut worst_kkt = 0.0f64;
    let mut solves = 0;
    while instances < 200 {
        let d = common::suite_instance(&mut rng);
        let lm = lambda_max(&d).lambda_max;
        if lm <= 0.0 {
            continue;
        }
        instances += 1;
        let stats = compute_feature_stats(&d);
        for l1_frac in [1.0, 0.7] {
            let theta1 = if l1_frac == 1.0 {
                theta_at_lambda_max(&d).unwrap()
            } else {
                let m1 = solve(&d, 0.7 * lm);
                solves += 1;
                worst_kkt = worst_kkt.max(kkt_report(&d, &m1.weights, m1.bias, m1.lambda).unwrap().max_residual());
                if !m1.converged {
                    unconverged += 1;
                    continue;
                }
                theta_from_primal(&d, &m1.weights, m1.bias, m1.lambda).unwrap()
            };
            for ratio in [0.5, 0.8, 0.95] {
                let l2 = ratio * theta1.lambda;
                let full = solve(&d, l2);
                solves += 1;
                let kkt = kkt_report(&d, &full.weights, full.bias, l2).unwrap();
                worst_kkt = worst_kkt.max(kkt.max_residual());
                if !full.converged || kkt.max_residual() > KKT_TOL {
                    unconverged += 1;
                    continue;
                }
                let ctx = build_context(&d, &theta1, l2).unwrap();
                let rep = screen_all(&ctx, &d, &stats, Parallelism::Rayon);
                screenings += 1;
                rejection_sum += rep.rejection_rate();
                for b in &rep.bounds {
                    if !b.keep && full.weights[b.index].abs() > SAFETY_WEIGHT_TOL {
                        unsafe_discards += 1;
                    }
                    let corr = kkt.correlations[b.index].abs();
                    worst_slack = worst_slack.min(b.bound - corr);
                    if b.bound < corr - BOUND_TOL {
                        invalid_bounds += 1;
                    }
                }
            }
        }
    }
    let c1 = outcome(
        1,
        "safety suite",
        unsafe_discards == 0 && unconverged == 0,
        format!(
            "{instances} instances, {screenings} screenings, unconverged full solves {unconverged}, \
             discarded-but-active features {unsafe_discards} (|w| > {SAFETY_WEIGHT_TOL:e}), \
             mean rejection rate {:.1}%",
            100.0 * rejection_sum / screenings.max(1) as f64
        ),
    );
    let c2 = outcome(
        2,
        "bound validity",
        invalid_bounds == 0 && unconverged == 0,
        format!(
            "bound < |θ₂ᵀf̂| − {BOUND_TOL:e} in {invalid_bounds} feature-screenings; \
             smallest bound − |θ₂ᵀf̂| = {worst_slack:.3e}"
        ),
    );
    (c1, c2, (solves, unconverged, worst_kkt))
}

fn branch_index(b: Branch) -> usize {
    match b {
        Branch::DegenerateF => 0,
        Branch::BetaZero => 1,
        Branch::AlphaZero => 2,
        Branch::InteriorCorner => 3,
    }
}

/// A context with `n ∈ {2, 3}` from an actual solve at `λ₁ < λ_max`.
fn small_context(rng: &mut ChaCha8Rng, n: usize) -> Option<ScreeningContext> {
    let m = rng.random_range(2..=5);
    let d = common::instance(rng, n, m, 1.0, 0.5);
    let lm = lambda_max(&d).lambda_max;
    if lm <= 0.0 {
        return None;
    }
    let l1 = lm * rng.random_range(0.2..0.95);
    let model = solve(&d, l1);
    if !model.converged {
        return None;
    }
    let theta = theta_from_primal(&d, &model.weights, model.bias, l1).unwrap();
    let l2 = l1 * rng.random_range(0.1..0.95);
    build_context(&d, &theta, l2).ok()
}

fn oracle_equivalence() -> Outcome {
    let mut rng = common::rng(3);
    let cfg = OracleConfig::default();
    let mut counts = [0usize; 4];
    let mut worst = [0.0f64; 4];
    let (mut contexts, mut uncertified, mut failures, mut with_normal) = (0, 0, 0, 0);
    let mut check = |ctx: &ScreeningContext, f: &[f64], counts: &mut [usize; 4], worst: &mut [f64; 4]| {
        let (closed, br) = neg_min(ctx, &WeightedFeature::from_dense(ctx, f));
        let o = oracle_neg_min_with(ctx, f, &cfg).unwrap();
        let k = branch_index(br);
        counts[k] += 1;
        if !o.certified {
            uncertified += 1;
            return;
        }
        let err = (closed - o.value).abs();
        worst[k] = worst[k].max(err);
        if err > ORACLE_TOL {
            failures += 1;
        }
    };
    while contexts < 120 || counts.iter().any(|&c| c < 20) {
        if contexts > 2000 {
            break;
        }
        let n = 2 + contexts % 2;
        let Some(ctx) = small_context(&mut rng, n) else {
            continue;
        };
        contexts += 1;
        let y = ctx.labels.clone();
        // f̂ ∝ y
        let c = rng.random_range(-2.0..2.0);
        check(&ctx, &scale(&y, c), &mut counts, &mut worst);
        // random directions, both signs
        for _ in 0..3 {
            let f: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            check(&ctx, &f, &mut counts, &mut worst);
            check(&ctx, &scale(&f, -1.0), &mut counts, &mut worst);
        }
        // P_y(f̂) pointing exactly against P_y(â)
        if let Some(a) = &ctx.normal {
            with_normal += 1;
            let pya = axpy(a, -dot(a, &y) / n as f64, &y);
            let k = rng.random_range(0.1..3.0);
            let mu = rng.random_range(-1.0..1.0);
            let f = axpy(&scale(&pya, -k), mu, &y);
            check(&ctx, &f, &mut counts, &mut worst);
        }
    }
    let enough = counts.iter().all(|&c| c >= 20);
    outcome(
        3,
        "oracle equivalence",
        enough && failures == 0 && uncertified == 0 && contexts >= 100,
        format!(
            "{contexts} contexts (n ∈ {{2,3}}, {with_normal} with a halfspace); branch counts \
             degenerate/beta0/alpha0/corner = {counts:?}; max |closed − oracle| per branch = \
             [{:.1e}, {:.1e}, {:.1e}, {:.1e}]; {failures} above {ORACLE_TOL:e}; {uncertified} uncertified",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn lambda_max_bracketing() -> Outcome {
    let mut rng = common::rng(4);
    let (mut instances, mut nonzero_above, mut empty_below, mut outside) = (0, 0, 0, 0);
    let mut notes = Vec::new();
    while instances < 50 {
        let d = common::suite_instance(&mut rng);
        let lm = lambda_max(&d);
        if lm.lambda_max <= 0.0 {
            continue;
        }
        instances += 1;
        let first = first_features(&lm.direction);
        let above = solve(&d, 1.01 * lm.lambda_max);
        if max_abs(&above.weights) > SAFETY_WEIGHT_TOL {
            nonzero_above += 1;
        }
        let below = solve(&d, 0.99 * lm.lambda_max);
        if max_abs(&below.weights) == 0.0 {
            empty_below += 1;
        }
        let support = support_of(&below.weights, SAFETY_WEIGHT_TOL);
        let extra: Vec<usize> = support.iter().copied().filter(|j| !first.contains(j)).collect();
        if !extra.is_empty() {
            outside += 1;
            let top = max_abs(&lm.direction);
            let ratios: Vec<String> = extra
                .iter()
                .map(|&j| format!("{:.4}", lm.direction[j].abs() / top))
                .collect();
            notes.push(format!("|d_j|/λ_max of extra features = [{}]", ratios.join(", ")));
        }
    }
    let mut detail = format!(
        "{instances} instances; ‖w‖∞ > {SAFETY_WEIGHT_TOL:e} at 1.01·λ_max: {nonzero_above}; \
         w = 0 at 0.99·λ_max: {empty_below}; support ⊄ first_features: {outside}"
    );
    if !notes.is_empty() {
        detail.push_str(&format!(" ({})", notes.join("; ")));
    }
    outcome(
        4,
        "λ_max bracketing",
        nonzero_above == 0 && empty_below == 0 && outside == 0,
        detail,
    )
}

struct GeoConfig {
    theta1: Vec<f64>,
    l1: f64,
    l2: f64,
    d: Vec<f64>,
}

fn geo_config(rng: &mut ChaCha8Rng) -> GeoConfig {
    loop {
        let n = rng.random_range(2..=30);
        let theta1: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
        // An optimal θ₁ satisfies dᵀθ₁ ≤ 0 (0 is dual feasible), i.e.
        // λ₁ ≤ Σθ₁/‖θ₁‖²; this is what puts t* at or above 1.
        let l1 = rng.random_range(0.1..1.0) * theta1.iter().sum::<f64>() / dot(&theta1, &theta1);
        let l2 = l1 * rng.random_range(0.05..0.99);
        let d: Vec<f64> = theta1.iter().map(|t| t - 1.0 / l1).collect();
        if norm(&d) > 1e-6 {
            return GeoConfig { theta1, l1, l2, d };
        }
    }
}

/// Uniform direction from Box–Muller normals.
fn unit_random(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n)
            .map(|_| {
                let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
                let u2: f64 = rng.random_range(0.0..1.0);
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            })
            .collect();
        let nv = norm(&v);
        if nv > 1e-9 {
            return scale(&v, 1.0 / nv);
        }
    }
}

/// `‖p − c‖² − r²`: negative inside, zero on the sphere.
fn power(b: &Ball, p: &[f64]) -> f64 {
    let v = sub(p, &b.center);
    dot(&v, &v) - b.radius * b.radius
}

fn geometry_properties() -> Outcome {
    let mut rng = common::rng(5);
    let configs = 60;

    let mut t2_fail = 0;
    let mut t2_margin = f64::INFINITY;
    for _ in 0..configs {
        let g = geo_config(&mut rng);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let a = scale(&g.d, sign / norm(&g.d));
        let (t_star, ball) = min_radius_ball(&g.theta1, g.l1, g.l2, &a).unwrap();
        let grid_min = (0..=100)
            .map(|k| ball_at_t(&g.theta1, g.l1, g.l2, 0.1 * k as f64).unwrap().radius)
            .fold(f64::INFINITY, f64::min);
        let direct = ball_at_t(&g.theta1, g.l1, g.l2, t_star).unwrap();
        let center_gap = max_abs(&sub(&direct.center, &ball.center));
        t2_margin = t2_margin.min(grid_min - ball.radius);
        if ball.radius > grid_min + RADIUS_TOL
            || (direct.radius - ball.radius).abs() > RADIUS_TOL * direct.radius.max(1.0)
            || center_gap > RADIUS_TOL * max_abs(&direct.center).max(1.0)
        {
            t2_fail += 1;
        }
    }

    let mut t3_fail = 0;
    let mut t3_worst = 0.0f64;
    for _ in 0..configs {
        let g = geo_config(&mut rng);
        let n = g.theta1.len();
        let t1 = rng.random_range(0.0..10.0);
        let t2 = rng.random_range(0.0..10.0);
        let b1 = ball_at_t(&g.theta1, g.l1, g.l2, t1).unwrap();
        let b2 = ball_at_t(&g.theta1, g.l1, g.l2, t2).unwrap();
        let dn = norm(&g.d);
        for _ in 0..200 {
            // A point on the hyperplane dᵀ(p − θ₁) = 0 at a random distance from θ₁.
            let v = unit_random(&mut rng, n);
            let v = axpy(&v, -dot(&v, &g.d) / (dn * dn), &g.d);
            let p = axpy(&g.theta1, rng.random_range(0.0..3.0) * b1.radius.max(1e-3), &v);
            let (p1, p2) = (power(&b1, &p), power(&b2, &p));
            t3_worst = t3_worst.max((p1 - p2).abs());
            let in1 = p1 <= MEMBERSHIP_TOL;
            let in2 = p2 <= MEMBERSHIP_TOL;
            if in1 != in2 && p1.abs() > MEMBERSHIP_TOL && p2.abs() > MEMBERSHIP_TOL {
                t3_fail += 1;
            }
        }
    }

    let mut t4_fail = 0;
    let mut t4_points = 0usize;
    for _ in 0..configs {
        let g = geo_config(&mut rng);
        let n = g.theta1.len();
        let dn = norm(&g.d);
        let dir = scale(&g.d, 1.0 / dn);
        let t1 = rng.random_range(0.0..5.0);
        let t2 = t1 + rng.random_range(0.0..5.0);
        let b1 = ball_at_t(&g.theta1, g.l1, g.l2, t1).unwrap();
        let b2 = ball_at_t(&g.theta1, g.l1, g.l2, t2).unwrap();
        // The point of B_{t1} furthest along d lies in Q_{t1}; points on segments
        // from it to random ball points, cut at the hyperplane, fill Q_{t1}.
        let apex = axpy(&b1.center, b1.radius, &dir);
        let side = |p: &[f64]| dot(&g.d, &sub(p, &g.theta1));
        if side(&apex) < 0.0 {
            continue;
        }
        for _ in 0..10_000 {
            let u = unit_random(&mut rng, n);
            let r = b1.radius * rng.random_range(0.0f64..1.0).powf(1.0 / n as f64);
            let q = axpy(&b1.center, r, &u);
            let (sa, sq) = (side(&apex), side(&q));
            let end = if sq >= 0.0 { 1.0 } else { sa / (sa - sq) };
            let s = rng.random_range(0.0..=end);
            let p = axpy(&apex, s, &sub(&q, &apex));
            if side(&p) < 0.0 || !b1.contains(&p, MEMBERSHIP_TOL) {
                continue;
            }
            t4_points += 1;
            if !b2.contains(&p, MEMBERSHIP_TOL) {
                t4_fail += 1;
            }
        }
    }

    outcome(
        5,
        "geometry properties",
        t2_fail == 0 && t3_fail == 0 && t4_fail == 0 && t4_points >= configs * 10_000 / 2,
        format!(
            "minimal radius: {t2_fail}/{configs} failures (smallest grid margin {t2_margin:.2e}); \
             slice invariance: {t3_fail} mismatches over {} points (max power difference {t3_worst:.1e}); \
             containment: {t4_fail} escapes over {t4_points} points",
            configs * 200
        ),
    )
}

fn solver_numerics(suite: (usize, usize, f64)) -> Outcome {
    let mut rng = common::rng(6);
    let mut fd_worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(5..=30);
        let m = rng.random_range(3..=10);
        let d = common::instance(&mut rng, n, m, 0.7, 0.5);
        let w: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b = rng.random_range(-1.0..1.0);
        let (gw, gb) = grad_h(&d, &w, b);
        let mut fd = Vec::with_capacity(m + 1);
        for j in 0..m {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[j] += FD_STEP;
            wm[j] -= FD_STEP;
            fd.push((smooth_loss(&d, &wp, b) - smooth_loss(&d, &wm, b)) / (2.0 * FD_STEP));
        }
        fd.push((smooth_loss(&d, &w, b + FD_STEP) - smooth_loss(&d, &w, b - FD_STEP)) / (2.0 * FD_STEP));
        let mut g = gw.clone();
        g.push(gb);
        fd_worst = fd_worst.max(norm(&sub(&g, &fd)) / norm(&g));
    }

    let mut increases = 0;
    let mut histories = 0;
    for _ in 0..50 {
        let d = common::suite_instance(&mut rng);
        let lm = lambda_max(&d).lambda_max;
        if lm <= 0.0 {
            continue;
        }
        let opts = SolverOptions {
            record_history: true,
            ..Default::default()
        };
        let model = solve_primal(&d, lm * rng.random_range(0.1..0.9), &opts).unwrap();
        histories += 1;
        increases += model
            .history
            .windows(2)
            .filter(|w| w[1] > w[0] + rounding_slack(w[0]))
            .count();
    }

    let (solves, unconverged, worst_kkt) = suite;
    outcome(
        6,
        "solver numerics",
        fd_worst <= FD_REL_TOL && increases == 0 && unconverged == 0 && worst_kkt <= KKT_TOL,
        format!(
            "gradient vs central differences: worst relative error {fd_worst:.1e} over 100 triples; \
             objective increases over accepted iterations: {increases} in {histories} solves; \
             suite solves {solves}, unconverged {unconverged}, worst recomputed KKT residual {worst_kkt:.1e}"
        ),
    )
}

/// Fastest of a batch of calls, by `screen_all`'s own timer.
/// Fastest mean time per `screen_all` call over blocks of repeated calls.
fn batch_time(ctx: &ScreeningContext, d: &Dataset, stats: &[svmscreen::data::FeatureStats]) -> f64 {
    const CALLS: usize = 10;
    (0..5)
        .map(|_| {
            let start = Instant::now();
            for _ in 0..CALLS {
                std::hint::black_box(screen_all(ctx, d, stats, Parallelism::Sequential));
            }
            start.elapsed().as_secs_f64() / CALLS as f64
        })
        .fold(f64::INFINITY, f64::min)
}

fn complexity() -> Outcome {
    let mut rng = common::rng(7);
    // Sparse enough that every size stays cache-resident; at higher densities
    // the smallest size fits in a faster cache level than the largest and the
    // ratios reflect the memory hierarchy rather than the algorithm.
    let (n, density) = (1000, 0.01);
    let sizes = [2500usize, 5000, 10_000];
    let full = common::instance(&mut rng, n, *sizes.last().unwrap(), density, 0.5);
    // Interleaved rounds so that background load hits every size alike, and
    // fresh copies of the data so that no size is stuck with an unlucky memory
    // layout. The minimum over all calls estimates the undisturbed cost.
    let mut times = vec![f64::INFINITY; sizes.len()];
    for _ in 0..3 {
        let setups: Vec<_> = sizes
            .iter()
            .map(|&m| {
                let d = full.select_columns(&(0..m).collect::<Vec<_>>());
                let lm = lambda_max(&d).lambda_max;
                let th = theta_at_lambda_max(&d).unwrap();
                let ctx = build_context(&d, &th, 0.5 * lm).unwrap();
                let stats = compute_feature_stats(&d);
                (d, ctx, stats)
            })
            .collect();
        for round in 0..6 {
            for (k, (d, ctx, stats)) in setups.iter().enumerate() {
                let t = batch_time(ctx, d, stats);
                if round > 0 {
                    times[k] = times[k].min(t);
                }
            }
        }
    }
    let ratios: Vec<f64> = times.windows(2).map(|w| w[1] / w[0]).collect();
    let ok = ratios.iter().all(|r| *r >= LINEAR_RATIO.0 && *r <= LINEAR_RATIO.1);
    outcome(
        7,
        "complexity",
        ok,
        format!(
            "n = {n}, density {density}, m = {sizes:?}: screening times (ms) [{}], doubling ratios [{}], allowed {LINEAR_RATIO:?}",
            times.iter().map(|t| format!("{:.3}", t * 1e3)).collect::<Vec<_>>().join(", "),
            ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn end_to_end_path() -> Outcome {
    let mut rng = common::rng(8);
    let dir = tempfile::tempdir().unwrap();
    let (mut runs, mut violations, mut bad_exit, mut unverified) = (0, 0u64, 0, 0);
    let mut worst_diff = 0.0f64;
    while runs < 20 {
        let d = common::instance(&mut rng, 10, 100, 1.0, 0.5);
        if lambda_max(&d).lambda_max <= 0.0 {
            continue;
        }
        runs += 1;
        let input = dir.path().join(format!("inst{runs}.txt"));
        std::fs::write(&input, d.to_sparse_text()).unwrap();
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = cli::run(
            [
                "svmscreen",
                "path",
                input.to_str().unwrap(),
                "--verify",
                "--grid-size",
                "8",
                "--ratio",
                "0.8",
            ],
            &mut out,
            &mut err,
        );
        if code != 0 {
            bad_exit += 1;
        }
        let rep: serde_json::Value = serde_json::from_slice(&out).unwrap();
        for step in rep["steps"].as_array().unwrap() {
            match (step["violations"].as_u64(), step["max_weight_diff"].as_f64()) {
                (Some(v), Some(diff)) => {
                    violations += v;
                    worst_diff = worst_diff.max(diff);
                }
                _ => unverified += 1,
            }
        }
    }
    outcome(
        8,
        "end-to-end path",
        violations == 0 && bad_exit == 0 && unverified == 0 && worst_diff <= PATH_WEIGHT_TOL,
        format!(
            "{runs} runs of `path --verify` (10×100, 8 points, ratio 0.8): total violations {violations}, \
             unverified steps {unverified}, nonzero exits {bad_exit}, max |w_screened − w_full| {worst_diff:.1e}"
        ),
    )
}

fn main() {
    let start = Instant::now();
    let mut results = Vec::new();
    let mut timed = |label: &str, f: &mut dyn FnMut() -> Vec<Outcome>| {
        let t = Instant::now();
        let out = f();
        eprintln!("{label}: {:.1}s", t.elapsed().as_secs_f64());
        results.extend(out);
    };
    let mut suite = (0, 0, 0.0);
    timed("safety suite", &mut || {
        let (c1, c2, s) = safety_suite();
        suite = s;
        vec![c1, c2]
    });
    timed("oracle", &mut || vec![oracle_equivalence()]);
    timed("bracketing", &mut || vec![lambda_max_bracketing()]);
    timed("geometry", &mut || vec![geometry_properties()]);
    timed("solver", &mut || vec![solver_numerics(suite)]);
    timed("complexity", &mut || vec![complexity()]);
    timed("path", &mut || vec![end_to_end_path()]);
    results.sort_by_key(|r| r.id);

    println!();
    for r in &results {
        println!(
            "[{}] {}. {}: {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.id,
            r.name,
            r.detail
        );
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    println!(
        "acceptance: {} passed, {failed} failed ({:.1}s)",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
