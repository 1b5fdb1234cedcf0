//! Target construction, the decoupled and full-matrix simulation loops, and `run_scenario`.

use crate::dynamics::{
    factor_scalars_step, matrix_gd_step, perturbed_step, scalar_limit, scalar_step, FactorState, InitKind,
    PerturbedPair, DIVERGENCE_GUARD,
};
use crate::spectral::{eigh, symmetrize, Matrix, SymmetricMatrix};
use crate::theory::{error_bound, evaluate_identical, evaluate_perturbed, InitRegime, PredictionBundle};

use super::config::{init_scale, NoiseKind, NoiseSpec, ScenarioConfig};
use super::report::{Check, HitTime, Record, Report};
use super::rng::Prng;
use super::HarnessError;

/// The clean low-rank matrix behind a noisy target, seen from the noisy eigenbasis U.
#[derive(Debug, Clone)]
pub struct LowRankReference {
    pub matrix: SymmetricMatrix,
    pub values: Vec<f64>,
    /// diag(Uᵀ W_LR U).
    pub coupled_diag: Vec<f64>,
    /// Σ_{i≠j} (Uᵀ W_LR U)_ij².
    pub off_diag_sq: f64,
    pub frobenius: f64,
    pub noise_frobenius: f64,
}

#[derive(Debug, Clone)]
pub struct Target {
    /// Eigenvalues in the column order of `basis`.
    pub values: Vec<f64>,
    /// Eigenvectors as columns; `None` is the standard basis.
    pub basis: Option<Matrix>,
    /// The assembled noisy matrix, when noise was added.
    pub noisy: Option<SymmetricMatrix>,
    pub reference: Option<LowRankReference>,
}

impl Target {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn matrix(&self) -> SymmetricMatrix {
        if let Some(m) = &self.noisy {
            return m.clone();
        }
        match &self.basis {
            None => SymmetricMatrix::diag(&self.values),
            Some(q) => SymmetricMatrix::from_factors(q, &self.values).expect("basis matches the spectrum"),
        }
    }

    pub fn basis_or_identity(&self) -> Matrix {
        self.basis.clone().unwrap_or_else(|| Matrix::identity(self.dim()))
    }
}

fn noise_matrix(spec: &NoiseSpec, n: usize, reference_norm: f64) -> Result<SymmetricMatrix, HarnessError> {
    let mut rng = Prng::new(spec.seed);
    let amplitude = spec.scale * reference_norm;
    Ok(match spec.kind {
        NoiseKind::Uniform => {
            let data = (0..n * n).map(|_| rng.uniform_symmetric(amplitude)).collect();
            symmetrize(&Matrix::from_vec(n, n, data)?)?
        }
        NoiseKind::Gaussian => {
            let xi = symmetrize(&rng.gaussian_matrix(n, n, 1.0))?;
            let norm = eigh(&xi)?.spectral_norm();
            if norm > 0.0 {
                xi.scale(amplitude / norm)
            } else {
                xi
            }
        }
    })
}

/// Ŵ from the config, with symmetrized noise added when configured.
pub fn build_target(cfg: &ScenarioConfig) -> Result<Target, HarnessError> {
    let values = cfg.spectrum.values();
    let basis = cfg.spectrum.basis();
    let Some(noise) = &cfg.noise else {
        return Ok(Target { values, basis, noisy: None, reference: None });
    };
    let n = values.len();
    let clean = match &basis {
        None => SymmetricMatrix::diag(&values),
        Some(q) => SymmetricMatrix::from_factors(q, &values)?,
    };
    let spectral = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let xi = noise_matrix(noise, n, spectral)?;
    let noisy = SymmetricMatrix::from_matrix(clean.matrix().add(xi.matrix())?)?;
    let spectrum = eigh(&noisy)?;
    let u = &spectrum.eigenvectors;
    let coupled = u.transpose().matmul(clean.matrix())?.matmul(u)?;
    let coupled_diag = coupled.diagonal();
    let total_sq = coupled.frobenius().powi(2);
    let diag_sq: f64 = coupled_diag.iter().map(|x| x * x).sum();
    let reference = LowRankReference {
        frobenius: clean.matrix().frobenius(),
        noise_frobenius: xi.matrix().frobenius(),
        matrix: clean,
        values,
        coupled_diag,
        off_diag_sq: (total_sq - diag_sq).max(0.0),
    };
    Ok(Target {
        values: spectrum.eigenvalues.clone(),
        basis: Some(spectrum.eigenvectors),
        noisy: Some(noisy),
        reference: Some(reference),
    })
}

/// |p − λ| tolerance used for arrival of randomly initialized runs.
pub fn arrival_tolerance(lambda: f64, epsilon: f64, n: u32) -> f64 {
    if lambda == 0.0 {
        epsilon.powi(n as i32)
    } else {
        epsilon * n as f64 * lambda.abs().powf(1.0 - 1.0 / n as f64)
    }
}

/// How the hit of one (eigenvalue, ε) pair is measured.
#[derive(Debug, Clone, Copy)]
struct HitRule {
    /// Measure the factor scalar d (identical init) instead of the product.
    root_space: bool,
    target: f64,
    tolerance: f64,
}

fn hit_rule(init: &InitKind, lambda: f64, epsilon: f64, n: u32) -> HitRule {
    match *init {
        InitKind::Identical { .. } => HitRule { root_space: true, target: scalar_limit(lambda, n), tolerance: epsilon },
        InitKind::Perturbed { alpha, .. } => HitRule {
            root_space: false,
            target: lambda,
            tolerance: error_bound(lambda, epsilon, alpha, n, InitRegime::Perturbed),
        },
        InitKind::RandomScaledIdentity { .. } | InitKind::GaussianDense { .. } => {
            HitRule { root_space: false, target: lambda, tolerance: arrival_tolerance(lambda, epsilon, n) }
        }
    }
}

/// Per-step series to keep besides the records.
#[derive(Debug, Clone, Copy, Default)]
pub struct Tracking {
    pub approx_error: bool,
    pub effective_rank: bool,
}

/// Raw simulation output.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub records: Vec<Record>,
    /// hits[i][e]: first k at which eigenvalue i meets the tolerance of epsilon e.
    pub hits: Vec<Vec<Option<u64>>>,
    pub tolerances: Vec<Vec<f64>>,
    /// Product value at each requested (eigenvalue, k) probe, if reached.
    pub probe_values: Vec<Option<f64>>,
    /// Last simulated iteration.
    pub steps: u64,
    pub diverged: bool,
    /// Largest relative Δ₁, Δ₂ recursion defect (perturbed init only).
    pub recursion_defect: Option<(f64, f64)>,
    pub approx_series: Vec<f64>,
    /// NaN where W = 0.
    pub rank_series: Vec<f64>,
}

struct Collector<'a> {
    rules: Vec<Vec<HitRule>>,
    hits: Vec<Vec<Option<u64>>>,
    probes: &'a [(usize, u64)],
    probe_values: Vec<Option<f64>>,
    depth: u32,
}

impl Collector<'_> {
    fn observe(&mut self, k: u64, p: &[f64], d: Option<&[f64]>) {
        for (i, rules) in self.rules.iter().enumerate() {
            for (e, rule) in rules.iter().enumerate() {
                if self.hits[i][e].is_some() {
                    continue;
                }
                let x = if rule.root_space {
                    match d {
                        Some(d) => d[i],
                        None => p[i].signum() * p[i].abs().powf(1.0 / self.depth as f64),
                    }
                } else {
                    p[i]
                };
                if (x - rule.target).abs() <= rule.tolerance {
                    self.hits[i][e] = Some(k);
                }
            }
        }
        for (slot, (i, at)) in self.probe_values.iter_mut().zip(self.probes) {
            if *at == k {
                *slot = Some(p[*i]);
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Unit {
    Single(f64),
    Pair(PerturbedPair),
    Factors(Vec<f64>),
}

impl Unit {
    fn new(init: &InitKind, lambda: f64, n: u32) -> Unit {
        match *init {
            InitKind::Identical { alpha } => Unit::Single(alpha),
            InitKind::Perturbed { alpha, beta } => Unit::Pair(PerturbedPair::new(alpha - beta, alpha, lambda, n)),
            _ => Unit::Factors(init.scalar_factors(n).expect("scaled-identity init")),
        }
    }

    fn product(&self, n: u32) -> f64 {
        match self {
            Unit::Single(d) => d.powi(n as i32),
            Unit::Pair(p) => p.product,
            Unit::Factors(v) => v.iter().product(),
        }
    }

    fn step(&self, lambda: f64, eta: f64, n: u32) -> Unit {
        match self {
            Unit::Single(d) => Unit::Single(scalar_step(*d, lambda, eta, n)),
            Unit::Pair(p) => Unit::Pair(perturbed_step(p, lambda, eta, n)),
            Unit::Factors(v) => Unit::Factors(factor_scalars_step(v, lambda, eta)),
        }
    }

    fn factors(&self) -> Vec<f64> {
        match self {
            Unit::Single(d) => vec![*d],
            Unit::Pair(p) => vec![p.d1, p.d2],
            Unit::Factors(v) => v.clone(),
        }
    }

    fn healthy(&self) -> bool {
        self.factors().iter().all(|x| x.is_finite() && x.abs() <= DIVERGENCE_GUARD)
    }
}

fn relative_gap(x: f64, y: f64) -> f64 {
    let scale = x.abs().max(y.abs());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).abs() / scale
    }
}

fn effective_rank_of(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, max) = values.fold((0.0, 0.0f64), |(s, m), v| (s + v.abs(), m.max(v.abs())));
    if max == 0.0 {
        f64::NAN
    } else {
        sum / max
    }
}

fn optional(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Simulate the configured dynamics for `max_iters` steps or until divergence.
pub fn simulate(
    cfg: &ScenarioConfig,
    target: &Target,
    eta: f64,
    probes: &[(usize, u64)],
    tracking: Tracking,
) -> Result<Trace, HarnessError> {
    let n = cfg.depth;
    let rules: Vec<Vec<HitRule>> = target
        .values
        .iter()
        .map(|l| cfg.epsilon.iter().map(|e| hit_rule(&cfg.init, *l, *e, n)).collect())
        .collect();
    let mut collector = Collector {
        hits: vec![vec![None; cfg.epsilon.len()]; target.dim()],
        rules,
        probes,
        probe_values: vec![None; probes.len()],
        depth: n,
    };
    let mut trace = if cfg.decoupled() {
        simulate_decoupled(cfg, target, eta, &mut collector, tracking)
    } else {
        simulate_matrix(cfg, target, eta, &mut collector, tracking)?
    };
    trace.tolerances = collector.rules.iter().map(|r| r.iter().map(|h| h.tolerance).collect()).collect();
    trace.hits = collector.hits;
    trace.probe_values = collector.probe_values;
    Ok(trace)
}

fn simulate_decoupled(
    cfg: &ScenarioConfig,
    target: &Target,
    eta: f64,
    collector: &mut Collector,
    tracking: Tracking,
) -> Trace {
    let n = cfg.depth;
    // equal eigenvalues share one scalar trajectory
    let mut distinct: Vec<f64> = Vec::new();
    let class: Vec<usize> = target
        .values
        .iter()
        .map(|l| match distinct.iter().position(|x| x.to_bits() == l.to_bits()) {
            Some(c) => c,
            None => {
                distinct.push(*l);
                distinct.len() - 1
            }
        })
        .collect();
    let mut units: Vec<Unit> = distinct.iter().map(|l| Unit::new(&cfg.init, *l, n)).collect();
    let identical = matches!(cfg.init, InitKind::Identical { .. });
    let mut trace = Trace::default();
    let mut defect = matches!(cfg.init, InitKind::Perturbed { .. }).then_some((0.0f64, 0.0f64));
    let dim = target.dim();
    let mut p = vec![0.0; dim];
    let mut d = vec![0.0; dim];
    for k in 0..=cfg.max_iters {
        let products: Vec<f64> = units.iter().map(|u| u.product(n)).collect();
        for i in 0..dim {
            p[i] = products[class[i]];
            if identical {
                if let Unit::Single(x) = units[class[i]] {
                    d[i] = x;
                }
            }
        }
        collector.observe(k, &p, identical.then_some(&d[..]));

        let next: Vec<Unit> = if k < cfg.max_iters {
            units.iter().zip(&distinct).map(|(u, l)| u.step(*l, eta, n)).collect()
        } else {
            Vec::new()
        };
        let blown = k < cfg.max_iters && next.iter().any(|u| !u.healthy());
        let last = k == cfg.max_iters || blown;

        let approx = target.reference.as_ref().map(|r| {
            let sq: f64 = p.iter().zip(&r.coupled_diag).map(|(x, b)| (x - b).powi(2)).sum();
            (sq + r.off_diag_sq).sqrt() / r.frobenius
        });
        let rank = effective_rank_of(p.iter().copied());
        if tracking.approx_error {
            trace.approx_series.push(approx.unwrap_or(f64::NAN));
        }
        if tracking.effective_rank {
            trace.rank_series.push(rank);
        }
        if k % cfg.record_every == 0 || last {
            let loss = 0.5 * p.iter().zip(&target.values).map(|(x, l)| (x - l).powi(2)).sum::<f64>();
            trace.records.push(Record {
                k,
                eig: p.clone(),
                factors: class.iter().map(|c| units[*c].factors()).collect(),
                loss,
                approx_error: approx,
                effective_rank: optional(rank),
            });
        }
        trace.steps = k;
        if blown {
            trace.diverged = true;
            break;
        }
        if last {
            break;
        }
        if let Some(worst) = defect.as_mut() {
            for (u, v) in units.iter().zip(&next) {
                if let (Unit::Pair(a), Unit::Pair(b)) = (u, v) {
                    let ek = eta * a.kappa;
                    worst.0 = worst.0.max(relative_gap(b.delta1, (1.0 + ek) * a.delta1));
                    worst.1 = worst.1.max(relative_gap(b.delta2, (1.0 - ek * ek) * a.delta2));
                }
            }
        }
        units = next;
    }
    trace.recursion_defect = defect;
    trace
}

fn singular_value_rank(w: &Matrix) -> Result<f64, HarnessError> {
    let gram = symmetrize(&w.transpose().matmul(w)?)?;
    let values = eigh(&gram)?.eigenvalues;
    Ok(effective_rank_of(values.into_iter().map(|v| v.max(0.0).sqrt())))
}

fn simulate_matrix(
    cfg: &ScenarioConfig,
    target: &Target,
    eta: f64,
    collector: &mut Collector,
    tracking: Tracking,
) -> Result<Trace, HarnessError> {
    let dim = target.dim();
    let hat = target.matrix();
    let u = target.basis_or_identity();
    let mut state = FactorState::new(dim, cfg.depth, eta, cfg.init)?;
    let mut trace = Trace::default();
    for k in 0..=cfg.max_iters {
        let w = state.product();
        let rotated = u.transpose().matmul(&w)?.matmul(&u)?;
        let p = rotated.diagonal();
        collector.observe(k, &p, None);

        let next = if k < cfg.max_iters { Some(matrix_gd_step(&state, &hat)?) } else { None };
        let blown = next
            .as_ref()
            .is_some_and(|s| s.factors.iter().any(|f| f.as_slice().iter().any(|x| !x.is_finite() || x.abs() > DIVERGENCE_GUARD)));
        let last = k == cfg.max_iters || blown;
        let record_now = k % cfg.record_every == 0 || last;

        let approx = match &target.reference {
            Some(r) if record_now || tracking.approx_error => {
                Some(w.sub(r.matrix.matrix())?.frobenius() / r.frobenius)
            }
            _ => None,
        };
        if tracking.approx_error {
            trace.approx_series.push(approx.unwrap_or(f64::NAN));
        }
        let rank = if record_now || tracking.effective_rank { singular_value_rank(&w)? } else { f64::NAN };
        if tracking.effective_rank {
            trace.rank_series.push(rank);
        }
        if record_now {
            let loss = 0.5 * w.sub(hat.matrix())?.frobenius().powi(2);
            trace.records.push(Record {
                k,
                eig: p,
                factors: Vec::new(),
                loss,
                approx_error: approx,
                effective_rank: optional(rank),
            });
        }
        trace.steps = k;
        if blown {
            trace.diverged = true;
            break;
        }
        match next {
            Some(s) => state = s,
            None => break,
        }
    }
    Ok(trace)
}

/// Distinct eigenvalues in order of first appearance, with the index where each first occurs.
pub(crate) fn distinct_values(values: &[f64]) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        if !out.iter().any(|(_, x)| x.to_bits() == v.to_bits()) {
            out.push((i, *v));
        }
    }
    out
}

struct Planned {
    bundle: PredictionBundle,
    index: usize,
    epsilon_index: usize,
    /// Predicted iteration count and the limit the product approaches.
    predicted: Option<f64>,
    limit: f64,
}

fn plan_predictions(cfg: &ScenarioConfig, target: &Target, eta: f64, checks: &mut Vec<Check>) -> Vec<Planned> {
    let n = cfg.depth;
    let mut planned = Vec::new();
    if n < 2 {
        return planned;
    }
    for (index, lambda) in distinct_values(&target.values) {
        for (epsilon_index, eps) in cfg.epsilon.iter().enumerate() {
            let result = match cfg.init {
                InitKind::Identical { alpha } => evaluate_identical(lambda, *eps, alpha, eta, n)
                    .map(|b| (b.t_id, lambda.max(0.0), b)),
                InitKind::Perturbed { alpha, beta } => {
                    evaluate_perturbed(lambda, *eps, alpha, beta, eta, n).map(|b| (b.t_perturbed, lambda, b))
                }
                _ => return planned,
            };
            match result {
                Ok((predicted, limit, bundle)) => {
                    planned.push(Planned { bundle, index, epsilon_index, predicted, limit })
                }
                Err(e) => checks.push(Check::skipped(
                    format!("prediction[lambda={lambda}, epsilon={eps}]"),
                    e.to_string(),
                )),
            }
        }
    }
    planned
}

fn prediction_checks(plan: &[Planned], trace: &Trace, checks: &mut Vec<Check>) {
    for (slot, p) in plan.iter().enumerate() {
        let b = &p.bundle;
        let tag = format!("lambda={}, epsilon={}", b.lambda, b.epsilon);
        let valid = b.violations.is_empty();
        let note = if valid { String::new() } else { format!(" (outside preconditions: {})", b.violations.join("; ")) };
        let make = |name: String, passed: bool, detail: String| {
            if valid {
                Check::enforced(name, passed, detail)
            } else {
                Check::advisory(name, passed, detail + &note)
            }
        };
        let Some(t) = p.predicted else { continue };
        let hit = trace.hits[p.index][p.epsilon_index];
        let steps = trace.steps as f64;
        match hit {
            Some(k) => checks.push(make(format!("hit_time_upper[{tag}]"), k as f64 <= t, format!("T_emp = {k}, T = {t}"))),
            None if t <= steps => {
                checks.push(make(format!("hit_time_upper[{tag}]"), false, format!("no hit within {steps} steps, T = {t}")))
            }
            None => checks.push(Check::skipped(format!("hit_time_upper[{tag}]"), format!("T = {t} beyond max_iters"))),
        }
        if let Some(lower) = b.t_id_lower.filter(|_| b.beta.is_none()) {
            match hit {
                Some(k) => checks.push(make(
                    format!("hit_time_lower[{tag}]"),
                    lower <= k as f64,
                    format!("T_lower = {lower}, T_emp = {k}"),
                )),
                None => checks.push(Check::skipped(format!("hit_time_lower[{tag}]"), "no hit observed")),
            }
        }
        match trace.probe_values[slot] {
            Some(value) => {
                let err = (value - p.limit).abs();
                checks.push(make(
                    format!("error_at_prediction[{tag}]"),
                    err <= b.error_bound,
                    format!("|W_ii - target| = {err:e} at k = {}, bound {:e}", t.ceil(), b.error_bound),
                ))
            }
            None => checks.push(Check::skipped(format!("error_at_prediction[{tag}]"), "prediction beyond simulated range")),
        }
    }
}

/// N = 1: d(k) − λ = (α − λ)(1 − η)^k, so the hit time is ⌈ln(|α−λ|/ε)/|ln(1−η)|⌉.
fn linear_checks(cfg: &ScenarioConfig, target: &Target, eta: f64, trace: &Trace, checks: &mut Vec<Check>) {
    let InitKind::Identical { alpha } = cfg.init else { return };
    if cfg.depth != 1 || !(eta > 0.0 && eta < 1.0) {
        return;
    }
    for (index, lambda) in distinct_values(&target.values) {
        for (e, eps) in cfg.epsilon.iter().enumerate() {
            let gap = (alpha - lambda).abs();
            if gap <= *eps {
                continue;
            }
            let t = ((gap / eps).ln() / (1.0 - eta).ln().abs()).ceil();
            let name = format!("linear_hit_time[lambda={lambda}, epsilon={eps}]");
            match trace.hits[index][e] {
                Some(k) => checks.push(Check::enforced(name, (k as f64 - t).abs() <= 1.0, format!("T_emp = {k}, closed form {t}"))),
                None if t > trace.steps as f64 => checks.push(Check::skipped(name, "closed form beyond max_iters")),
                None => checks.push(Check::enforced(name, false, format!("no hit, closed form {t}"))),
            }
        }
    }
}

pub(crate) fn hit_table(cfg: &ScenarioConfig, target: &Target, trace: &Trace) -> Vec<HitTime> {
    let mut out = Vec::new();
    for (i, lambda) in target.values.iter().enumerate() {
        for (e, eps) in cfg.epsilon.iter().enumerate() {
            out.push(HitTime {
                index: i,
                lambda: *lambda,
                epsilon: *eps,
                tolerance: trace.tolerances[i][e],
                k: trace.hits[i][e],
            });
        }
    }
    out
}

pub(crate) fn finite_check(trace: &Trace) -> Check {
    Check::enforced(
        "finite_trajectory",
        !trace.diverged,
        if trace.diverged { format!("diverged after {} steps", trace.steps) } else { "bounded".to_string() },
    )
}

pub(crate) fn base_report(cfg: &ScenarioConfig, target: &Target, eta: f64) -> Report {
    Report {
        config: cfg.clone(),
        eta,
        mode: if cfg.decoupled() { "decoupled" } else { "matrix" }.to_string(),
        target_eigenvalues: target.values.clone(),
        records: Vec::new(),
        predictions: Vec::new(),
        hit_times: Vec::new(),
        plateaus: Vec::new(),
        denoise: None,
        random_init: Vec::new(),
        checks: Vec::new(),
    }
}

pub(crate) fn run_with_tracking(cfg: &ScenarioConfig, tracking: Tracking) -> Result<(Report, Target, Trace), HarnessError> {
    cfg.validate()?;
    let target = build_target(cfg)?;
    let eta = cfg.resolve_eta(&target.values)?;
    let mut report = base_report(cfg, &target, eta);
    let plan = plan_predictions(cfg, &target, eta, &mut report.checks);
    let probes: Vec<(usize, u64)> = plan
        .iter()
        .map(|p| (p.index, p.predicted.filter(|t| t.is_finite() && *t >= 0.0).map_or(u64::MAX, |t| t.ceil() as u64)))
        .collect();
    let trace = simulate(cfg, &target, eta, &probes, tracking)?;
    report.checks.push(finite_check(&trace));
    prediction_checks(&plan, &trace, &mut report.checks);
    linear_checks(cfg, &target, eta, &trace, &mut report.checks);
    if let Some((d1, d2)) = trace.recursion_defect {
        report.checks.push(Check::enforced(
            "balancedness_recursions",
            d1 <= 1e-12 && d2 <= 1e-12,
            format!("max relative defect: delta1 {d1:e}, delta2 {d2:e}"),
        ));
    }
    report.hit_times = hit_table(cfg, &target, &trace);
    report.predictions = plan.into_iter().map(|p| p.bundle).collect();
    report.records = trace.records.clone();
    Ok((report, target, trace))
}

/// Build Ŵ, run the dynamics, evaluate the matching predictions and attach the invariant checks.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Report, HarnessError> {
    Ok(run_with_tracking(cfg, Tracking::default())?.0)
}

/// Prediction bundles for every distinct eigenvalue and ε, without simulating.
pub fn predict(cfg: &ScenarioConfig) -> Result<(Vec<PredictionBundle>, Vec<Check>), HarnessError> {
    cfg.validate()?;
    let target = build_target(cfg)?;
    let eta = cfg.resolve_eta(&target.values)?;
    let mut checks = Vec::new();
    let plan = plan_predictions(cfg, &target, eta, &mut checks);
    Ok((plan.into_iter().map(|p| p.bundle).collect(), checks))
}

/// The α (or σ) of the configured init.
pub fn scale_of(cfg: &ScenarioConfig) -> f64 {
    init_scale(&cfg.init)
}
