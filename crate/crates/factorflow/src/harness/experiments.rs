//! Denoising, random-init, plateau and divergence experiments built on `run_scenario`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    detect_divergence, factor_scalars_step, run_scalar, scalar_limit, scalar_path, InitKind, DEFAULT_SCALAR_CAP,
};
use crate::spectral::numerical_rank;
use crate::theory::{
    c_n, divergence_threshold, flow_plateau, gd_plateau, iteration_windows, stepsize_bound, StepsizeContext,
};

use super::config::{ConfigError, RandInitSpec, ScenarioConfig};
use super::report::{
    fmt_float, Check, DenoiseSummary, DivergenceProbe, PlateauWindow, RandomInitRun, Report, WindowKind,
};
use super::scenario::{base_report, finite_check, hit_table, run_with_tracking, simulate, Tracking};
use super::HarnessError;

fn invalid(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(ConfigError::Invalid(vec![msg.into()]))
}

/// Early-stopping denoising: error to the clean low-rank matrix along the run.
pub fn denoise_experiment(cfg: &ScenarioConfig) -> Result<Report, HarnessError> {
    if cfg.noise.is_none() {
        return Err(invalid("denoise needs a noise section"));
    }
    let (mut report, target, trace) = run_with_tracking(cfg, Tracking { approx_error: true, effective_rank: false })?;
    let reference = target.reference.as_ref().expect("noise configured");
    let series = &trace.approx_series;
    let (best_k, best_error) = series
        .iter()
        .enumerate()
        .fold((0usize, f64::INFINITY), |(bk, be), (k, e)| if *e < be { (k, *e) } else { (bk, be) });
    let final_error = *series.last().expect("at least one step");
    let rank = numerical_rank(&reference.values);

    // best rank-L approximation of the noisy target, measured in its own eigenbasis
    let mut trunc_sq = reference.off_diag_sq;
    for (i, (lam, b)) in target.values.iter().zip(&reference.coupled_diag).enumerate() {
        let kept = if i < rank { *lam } else { 0.0 };
        trunc_sq += (kept - b).powi(2);
    }
    let truncation_error = trunc_sq.sqrt() / reference.frobenius;

    let mut window = None;
    if let (InitKind::Identical { alpha }, Some(eps)) = (cfg.init, cfg.epsilon.first()) {
        let mut clipped: Vec<f64> = target.values.iter().map(|v| v.max(0.0)).collect();
        clipped.sort_by(|a, b| b.total_cmp(a));
        let eps_prime = cfg.plateau.as_ref().and_then(|p| p.epsilon_prime).unwrap_or(0.5 * c_n(cfg.depth));
        if rank >= 1 && rank < clipped.len() {
            if let Ok(g) = gd_plateau(&clipped, rank, *eps, eps_prime, alpha, report.eta, cfg.depth) {
                window = (g.k_lo <= g.k_hi).then_some((g.k_lo, g.k_hi));
            }
        }
    }
    let noise_error = reference.noise_frobenius / reference.frobenius;
    if noise_error > 0.0 {
        report.checks.push(Check::advisory(
            "waterfall_dip",
            best_error < final_error,
            format!("min error {best_error:e} at k = {best_k}, endpoint {final_error:e}"),
        ));
    } else {
        let monotone = series.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
        report.checks.push(Check::advisory("monotone_error", monotone, format!("final error {final_error:e}")));
    }
    report.denoise = Some(DenoiseSummary {
        rank,
        best_k: best_k as u64,
        best_error,
        final_error,
        noise_error,
        truncation_error,
        window,
        best_k_in_window: window.map(|(lo, hi)| lo <= best_k as f64 && best_k as f64 <= hi),
    });
    Ok(report)
}

/// Count index pairs where |λ_i| > |λ_j| but j arrives strictly first; optionally only within a sign class.
pub fn arrival_inversions(lambdas: &[f64], arrivals: &[Option<u64>], same_sign_only: bool) -> usize {
    let late = |a: Option<u64>| a.unwrap_or(u64::MAX);
    let mut count = 0;
    for i in 0..lambdas.len() {
        for j in 0..lambdas.len() {
            let same = lambdas[i].signum() == lambdas[j].signum();
            if (same || !same_sign_only) && lambdas[i].abs() > lambdas[j].abs() && late(arrivals[i]) > late(arrivals[j]) {
                count += 1;
            }
        }
    }
    count
}

/// Largest deviation between a run and its sign-flipped mirror: negating two factors leaves the
/// product unchanged; negating one factor and λ negates it.
fn sign_symmetry_defect(init: &[f64], lambda: f64, eta: f64, steps: u64) -> f64 {
    let n = init.len();
    let mut a = init.to_vec();
    let mut even = init.to_vec();
    let mut odd = init.to_vec();
    if n >= 2 {
        even[0] = -even[0];
        even[1] = -even[1];
    }
    odd[0] = -odd[0];
    let mut worst = 0.0f64;
    for _ in 0..=steps {
        let p: f64 = a.iter().product();
        let pe: f64 = even.iter().product();
        let po: f64 = odd.iter().product();
        if n >= 2 {
            worst = worst.max((p - pe).abs());
        }
        worst = worst.max((p + po).abs());
        a = factor_scalars_step(&a, lambda, eta);
        even = factor_scalars_step(&even, lambda, eta);
        odd = factor_scalars_step(&odd, -lambda, eta);
    }
    worst
}

const SYMMETRY_STEPS: u64 = 1000;

/// Scaled-identity factors W_j = α_j I with α_j ~ N(0, α²), over a grid of α and seeds.
pub fn random_init_experiment(cfg: &ScenarioConfig) -> Result<Report, HarnessError> {
    cfg.validate()?;
    if !matches!(cfg.init, InitKind::RandomScaledIdentity { .. }) {
        return Err(invalid("randinit needs init.kind = random_scaled_identity"));
    }
    if cfg.epsilon.is_empty() {
        return Err(invalid("randinit needs an epsilon target for arrival times"));
    }
    let spec = cfg.randinit.clone().unwrap_or_default();
    let RandInitSpec { alphas, seeds } = spec;
    let mut report: Option<Report> = None;
    let mut runs = Vec::new();
    let mut checks = Vec::new();
    for alpha in &alphas {
        for seed in &seeds {
            let mut c = cfg.clone();
            c.init = InitKind::RandomScaledIdentity { alpha: *alpha, seed: *seed };
            let (r, target, trace) = run_with_tracking(&c, Tracking::default())?;
            let arrivals: Vec<Option<u64>> = trace.hits.iter().map(|h| h[0]).collect();
            let mut order: Vec<usize> = (0..arrivals.len()).collect();
            order.sort_by_key(|i| (arrivals[*i].unwrap_or(u64::MAX), *i));
            let initial = c.init.scalar_factors(c.depth).expect("scaled identity");
            let tag = format!("alpha={alpha}, seed={seed}");
            checks.push(finite_check(&trace).renamed(format!("finite_trajectory[{tag}]")));
            let defect = target
                .values
                .iter()
                .map(|l| sign_symmetry_defect(&initial, *l, r.eta, SYMMETRY_STEPS.min(c.max_iters)))
                .fold(0.0f64, f64::max);
            checks.push(Check::enforced(
                format!("sign_symmetry[{tag}]"),
                defect <= 1e-12,
                format!("max product deviation under factor sign flips {defect:e}"),
            ));
            checks.push(Check::advisory(
                format!("all_arrived[{tag}]"),
                arrivals.iter().all(Option::is_some),
                format!("arrivals {arrivals:?}"),
            ));
            runs.push(RandomInitRun {
                alpha: *alpha,
                seed: *seed,
                initial_factors: initial,
                inversions: arrival_inversions(&target.values, &arrivals, true),
                magnitude_inversions: arrival_inversions(&target.values, &arrivals, false),
                arrivals,
                order,
                records: trace.records.clone(),
            });
            if report.is_none() {
                let mut first = r;
                first.config = cfg.clone();
                first.hit_times = hit_table(&c, &target, &trace);
                report = Some(first);
            }
        }
    }
    let mut report = report.ok_or_else(|| invalid("randinit needs at least one alpha and one seed"))?;
    report.checks = checks;
    report.random_init = runs;
    Ok(report)
}

impl Check {
    fn renamed(mut self, name: String) -> Check {
        self.name = name;
        self
    }
}

/// Plateau windows for each configured rank and the simulated effective rank inside them.
pub fn plateau_experiment(cfg: &ScenarioConfig) -> Result<Report, HarnessError> {
    cfg.validate()?;
    let spec = cfg.plateau.clone().ok_or_else(|| invalid("plateau needs a plateau section"))?;
    let InitKind::Identical { alpha } = cfg.init else {
        return Err(invalid("plateau windows are stated for identical init"));
    };
    if cfg.noise.is_some() {
        return Err(invalid("plateau windows need a noise-free target"));
    }
    let eps = *cfg.epsilon.first().ok_or_else(|| invalid("plateau needs epsilon"))?;
    let mut values = cfg.spectrum.values();
    values.sort_by(|a, b| b.total_cmp(a));
    let mut sorted_cfg = cfg.clone();
    sorted_cfg.spectrum = super::config::Spectrum::Embedded {
        values: values.clone(),
        n: values.len(),
        seed: None,
    };
    sorted_cfg.simulation = super::config::SimulationMode::Decoupled;
    let target = super::scenario::build_target(&sorted_cfg)?;
    let eta = sorted_cfg.resolve_eta(&target.values)?;
    let trace = simulate(&sorted_cfg, &target, eta, &[], Tracking { approx_error: false, effective_rank: true })?;
    let mut report = base_report(cfg, &target, eta);
    report.checks.push(finite_check(&trace));
    let lam1 = values[0];
    for &rank in &spec.ranks {
        let target_rank: f64 = values[..rank].iter().map(|v| v.abs()).sum::<f64>() / lam1.abs();
        let (kind, windows, bound, refined) = match spec.epsilon_prime {
            None => {
                if cfg.depth != 2 {
                    return Err(invalid("continuous-time plateau windows need depth 2; set plateau.epsilon_prime"));
                }
                let fp = flow_plateau(&values, rank, eps, spec.big_c, alpha)?;
                (WindowKind::Flow, iteration_windows(&fp.window, eta), fp.flow_bound, Some(fp.flow_bound_refined))
            }
            Some(eps_prime) => {
                let g = gd_plateau(&values, rank, eps, eps_prime, alpha, eta, cfg.depth)?;
                let w = if g.empty { Vec::new() } else { vec![(g.k_lo.ceil() as u64, Some(g.k_hi.floor() as u64))] };
                (WindowKind::Discrete, w, g.gd_bound, None)
            }
        };
        let mut max_dev: Option<f64> = None;
        let mut checked_until = 0;
        for (start, end) in &windows {
            let stop = end.unwrap_or(u64::MAX).min(trace.steps);
            if *start > stop {
                continue;
            }
            checked_until = checked_until.max(stop);
            for k in *start..=stop {
                let dev = (trace.rank_series[k as usize] - target_rank).abs();
                max_dev = Some(max_dev.map_or(dev, |m: f64| m.max(dev)));
            }
        }
        let tag = format!("L={rank}");
        report.checks.push(Check::enforced(
            format!("plateau_bound[{tag}]"),
            bound < spec.tolerance,
            format!("bound {} vs {}", fmt_float(bound), spec.tolerance),
        ));
        report.checks.push(Check::enforced(
            format!("plateau_window_nonempty[{tag}]"),
            max_dev.is_some(),
            format!("windows {windows:?} within {} simulated steps", trace.steps),
        ));
        if let Some(dev) = max_dev {
            report.checks.push(Check::enforced(
                format!("plateau_deviation[{tag}]"),
                dev <= spec.tolerance,
                format!("max |r(W(k)) - r(W_L)| = {dev:e} up to k = {checked_until}"),
            ));
        }
        report.plateaus.push(PlateauWindow {
            rank,
            kind,
            windows,
            bound,
            bound_refined: refined,
            target_effective_rank: target_rank,
            max_deviation: max_dev,
            checked_until,
        });
    }
    report.records = trace.records;
    Ok(report)
}

/// (depth, λ, α) points probed around the step-size thresholds.
pub const PROBE_GRID: [(u32, f64, f64); 12] = [
    (1, -1.0, 0.5),
    (1, 2.0, 0.5),
    (2, -1.0, 0.5),
    (2, -4.0, 0.5),
    (3, -1.0, 0.5),
    (3, -4.0, 0.5),
    (2, 1.0, 0.5),
    (2, 5.0, 0.5),
    (3, 1.0, 0.5),
    (3, 5.0, 0.5),
    (4, 1.0, 0.5),
    (4, 5.0, 0.5),
];

const PROBE_STEPS: usize = 20_000;
const FIXED_POINT_KICK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub probes: Vec<DivergenceProbe>,
    pub checks: Vec<Check>,
}

impl ProbeReport {
    pub fn all_pass(&self) -> bool {
        !self.checks.iter().any(Check::failed)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("depth,lambda,alpha,case,threshold,convergence_bound,diverged_above,converged_below\n");
        for p in &self.probes {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                p.depth,
                fmt_float(p.lambda),
                fmt_float(p.alpha),
                p.case,
                fmt_float(p.threshold),
                fmt_float(p.convergence_bound),
                p.diverged_above,
                p.converged_below
            ));
        }
        out
    }
}

/// Above 1.1× the threshold the iteration must blow up (λ < 0, N = 1) or leave the fixed point (λ > 0);
/// at 0.9× the convergence bound it must converge.
pub fn probe(depth: u32, lambda: f64, alpha: f64) -> Result<DivergenceProbe, HarnessError> {
    let threshold = divergence_threshold(lambda, alpha, depth)?;
    let convergence_bound = stepsize_bound(StepsizeContext::Convergence, lambda, alpha, depth);
    let above = 1.1 * threshold;
    let (case, diverged_above) = if depth == 1 || lambda < 0.0 {
        let traj = scalar_path(lambda, alpha, above, depth, PROBE_STEPS);
        (if depth == 1 { "linear" } else { "negative" }, detect_divergence(&traj))
    } else {
        let r = scalar_limit(lambda, depth);
        let traj = scalar_path(lambda, r * (1.0 + FIXED_POINT_KICK), above, depth, PROBE_STEPS);
        let left = traj.values.iter().any(|d| !d.is_finite() || (d - r).abs() > 1e-3 * r);
        ("unstable_fixed_point", left)
    };
    let below = 0.9 * convergence_bound;
    let limit = scalar_limit(lambda, depth);
    let converged_below = if limit == 0.0 {
        // sublinear decay to zero: bounded, monotone and at least halfway there
        let traj = scalar_path(lambda, alpha, below, depth, PROBE_STEPS);
        !traj.diverged
            && traj.values.windows(2).all(|w| w[1].abs() <= w[0].abs())
            && traj.values.last().unwrap().abs() <= 0.5 * alpha
    } else {
        let traj = run_scalar(lambda, alpha, below, depth, 1e-8 * limit.abs().max(1.0), DEFAULT_SCALAR_CAP);
        traj.hit_index.is_some()
    };
    Ok(DivergenceProbe {
        depth,
        lambda,
        alpha,
        case: case.to_string(),
        threshold,
        convergence_bound,
        diverged_above,
        converged_below,
    })
}

pub fn divergence_probes() -> Result<ProbeReport, HarnessError> {
    let mut probes = Vec::new();
    let mut checks = Vec::new();
    for (depth, lambda, alpha) in PROBE_GRID {
        let p = probe(depth, lambda, alpha)?;
        checks.push(Check::enforced(
            format!("divergence_threshold[N={depth}, lambda={lambda}, alpha={alpha}]"),
            p.diverged_above && p.converged_below,
            format!(
                "{}: above 1.1x{} diverged={}, below 0.9x{} converged={}",
                p.case, p.threshold, p.diverged_above, p.convergence_bound, p.converged_below
            ),
        ));
        probes.push(p);
    }
    Ok(ProbeReport { probes, checks })
}
