//! Time windows where the effective rank of the iterates sits near r(Ŵ_L).

use serde::{Deserialize, Serialize};

use super::constants::c_n;
use super::potentials::t_plus;
use super::times::t_identical_value;
use super::TheoryError;

const GRID_POINTS: usize = 10_000;
const EDGE_REL_TOL: f64 = 1e-10;

/// g_{λ,α}(t) = 1 + (λ/α² − 1)e^{−2λt}; the N = 2 flow is y(t)² = λ/g(t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowProfile {
    pub lambda: f64,
    pub alpha: f64,
}

impl FlowProfile {
    pub fn new(lambda: f64, alpha: f64) -> Self {
        FlowProfile { lambda, alpha }
    }

    pub fn g(&self, t: f64) -> f64 {
        1.0 + (self.lambda / (self.alpha * self.alpha) - 1.0) * (-2.0 * self.lambda * t).exp()
    }

    /// First t with g(t) = level, for λ > α² and 1 < level < g(0).
    pub fn time_to(&self, level: f64) -> f64 {
        ((self.lambda / (self.alpha * self.alpha) - 1.0) / (level - 1.0)).ln() / (2.0 * self.lambda)
    }
}

/// Closed interval [start, end]; `end = None` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: Option<f64>,
}

impl Interval {
    pub fn unbounded_from(start: f64) -> Self {
        Interval { start, end: None }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && self.end.is_none_or(|e| t <= e)
    }

    fn end_or_inf(&self) -> f64 {
        self.end.unwrap_or(f64::INFINITY)
    }
}

/// Intersection of two sorted, disjoint interval unions.
pub fn intersect(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let start = a[i].start.max(b[j].start);
        let end = a[i].end_or_inf().min(b[j].end_or_inf());
        if start <= end {
            out.push(Interval { start, end: end.is_finite().then_some(end) });
        }
        if a[i].end_or_inf() < b[j].end_or_inf() {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Integer iterations k with ηk inside one of the intervals, as [k_lo, k_hi] pairs.
pub fn iteration_windows(intervals: &[Interval], eta: f64) -> Vec<(u64, Option<u64>)> {
    intervals
        .iter()
        .filter_map(|iv| {
            let lo = (iv.start / eta).ceil().max(0.0) as u64;
            match iv.end {
                None => Some((lo, None)),
                Some(e) => {
                    let hi = (e / eta).floor() as u64;
                    (hi >= lo).then_some((lo, Some(hi)))
                }
            }
        })
        .collect()
}

/// {t ≥ 0 : f(t) < 0}, found on a geometric grid plus bisection; f is assumed
/// to keep its sign beyond the grid.
fn sublevel_set(f: impl Fn(f64) -> f64, t_min: f64, t_max: f64) -> Vec<Interval> {
    let mut ts = Vec::with_capacity(GRID_POINTS + 1);
    ts.push(0.0);
    let ratio = (t_max / t_min).powf(1.0 / (GRID_POINTS - 1) as f64);
    for i in 0..GRID_POINTS {
        ts.push(t_min * ratio.powi(i as i32));
    }
    let refine = |mut a: f64, mut b: f64| -> f64 {
        // f(a) and f(b) have opposite membership
        let inside_a = f(a) < 0.0;
        while b - a > EDGE_REL_TOL * b.abs().max(f64::MIN_POSITIVE) {
            let mid = 0.5 * (a + b);
            if (f(mid) < 0.0) == inside_a {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    let mut out = Vec::new();
    let mut open: Option<f64> = if f(0.0) < 0.0 { Some(0.0) } else { None };
    for w in ts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ia, ib) = (f(a) < 0.0, f(b) < 0.0);
        if ia == ib {
            continue;
        }
        let edge = refine(a, b);
        if ib {
            open = Some(edge);
        } else if let Some(s) = open.take() {
            out.push(Interval { start: s, end: Some(edge) });
        }
    }
    if let Some(s) = open {
        out.push(Interval::unbounded_from(s));
    }
    out
}

fn effective_rank_top(values: &[f64], l: usize) -> f64 {
    values[..l].iter().sum::<f64>() / values[0]
}

fn check_sorted_nonneg(values: &[f64]) -> Result<(), TheoryError> {
    if values.is_empty() {
        return Err(TheoryError::Precondition("empty spectrum".into()));
    }
    if values.windows(2).any(|w| w[0] < w[1]) {
        return Err(TheoryError::Precondition("eigenvalues must be sorted non-increasing".into()));
    }
    if values.iter().any(|v| *v < 0.0) {
        return Err(TheoryError::Precondition("plateau windows need a positive semi-definite spectrum".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowPlateau {
    pub rank: usize,
    pub l_prime: usize,
    pub epsilon: f64,
    pub big_c: f64,
    pub alpha: f64,
    pub i1: Vec<Interval>,
    pub i2: Vec<Interval>,
    pub i3: Vec<Interval>,
    pub window: Vec<Interval>,
    /// 2ε r(Ŵ_L) + C(n−L′)α²/‖Ŵ‖.
    pub flow_bound: f64,
    /// The same bound with the I₁ term dropped when L = 1 and the I₂ term dropped when L′ = L.
    pub flow_bound_refined: f64,
    /// Upper end of the sampled time range; membership beyond it is extrapolated.
    pub horizon: f64,
}

/// Gradient-flow (N = 2) plateau intervals for rank L.
pub fn flow_plateau(values: &[f64], rank: usize, epsilon: f64, big_c: f64, alpha: f64) -> Result<FlowPlateau, TheoryError> {
    check_sorted_nonneg(values)?;
    let n = values.len();
    if rank < 1 || rank > n {
        return Err(TheoryError::Precondition(format!("rank L = {rank} out of range 1..={n}")));
    }
    let a2 = alpha * alpha;
    if !(values[rank - 1] > a2) {
        return Err(TheoryError::Precondition(format!(
            "lambda_L = {} must exceed alpha^2 = {a2}",
            values[rank - 1]
        )));
    }
    if !(big_c > 1.0) {
        return Err(TheoryError::Precondition(format!("C = {big_c} must exceed 1")));
    }
    let l_prime = values.iter().rposition(|v| *v > a2).unwrap() + 1;
    let lam1 = values[0];
    let r_l = effective_rank_top(values, rank);
    let g1 = FlowProfile::new(lam1, alpha);
    let t_min = 1e-4 / lam1;
    let horizon = 1e2 * FlowProfile::new(values[l_prime - 1], alpha).time_to(1.0 + 1e-6);

    let everything = vec![Interval::unbounded_from(0.0)];
    let i1 = if rank == 1 {
        everything.clone()
    } else {
        let profiles: Vec<FlowProfile> = values[1..rank].iter().map(|v| FlowProfile::new(*v, alpha)).collect();
        sublevel_set(
            |t| {
                let a = g1.g(t);
                profiles.iter().map(|p| (a / p.g(t) - 1.0).abs()).fold(0.0, f64::max) - epsilon
            },
            t_min,
            horizon,
        )
    };
    let i2 = if l_prime == rank {
        everything.clone()
    } else {
        let next = FlowProfile::new(values[rank], alpha);
        let level = r_l * epsilon / (l_prime - rank) as f64;
        sublevel_set(|t| (g1.g(t) / next.g(t) * values[rank] / lam1).abs() - level, t_min, horizon)
    };
    let i3 = if g1.g(0.0) < big_c {
        everything.clone()
    } else {
        vec![Interval::unbounded_from(g1.time_to(big_c))]
    };
    let window = intersect(&intersect(&i1, &i2), &i3);

    let tail = big_c * (n - l_prime) as f64 * a2 / lam1;
    let flow_bound = 2.0 * epsilon * r_l + tail;
    let refined_lead = epsilon * r_l * (u8::from(rank > 1) + u8::from(l_prime > rank)) as f64;
    Ok(FlowPlateau {
        rank,
        l_prime,
        epsilon,
        big_c,
        alpha,
        i1,
        i2,
        i3,
        window,
        flow_bound,
        flow_bound_refined: refined_lead + tail,
        horizon,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdPlateau {
    pub rank: usize,
    pub l_prime: usize,
    pub l_dprime: usize,
    pub epsilon: f64,
    pub epsilon_prime: f64,
    pub alpha: f64,
    pub eta: f64,
    pub depth: u32,
    pub t_max: f64,
    /// T_Id(λ₁, λ₁/2, α, η) with the ε-argument taken literally.
    pub t_half_literal: f64,
    /// T_Id(λ₁, λ₁^{1/N} − (λ₁/2)^{1/N}, α, η): the reading where d^N ≥ λ₁/2.
    pub t_half_value_space: f64,
    pub k_lo: f64,
    pub k_hi: f64,
    pub empty: bool,
    pub gd_bound_sum: f64,
    pub gd_bound_count: f64,
    pub gd_bound: f64,
}

/// Discrete-time plateau window for rank L and depth N.
pub fn gd_plateau(
    values: &[f64],
    rank: usize,
    epsilon: f64,
    epsilon_prime: f64,
    alpha: f64,
    eta: f64,
    n: u32,
) -> Result<GdPlateau, TheoryError> {
    check_sorted_nonneg(values)?;
    let dim = values.len();
    let nf = n as f64;
    let c = c_n(n);
    let an = alpha.powi(n as i32);
    let mut bad = Vec::new();
    if n < 2 {
        bad.push(format!("depth N = {n} must be at least 2"));
    }
    if rank < 1 || rank >= dim {
        bad.push(format!("rank L = {rank} must satisfy 1 <= L < n = {dim}"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        bad.push(format!("epsilon = {epsilon} must lie in (0, 1)"));
    }
    if !(epsilon_prime > 0.0 && epsilon_prime < c) {
        bad.push(format!("epsilon' = {epsilon_prime} must lie in (0, c_N = {c})"));
    }
    if !bad.is_empty() {
        return Err(TheoryError::Precondition(bad.join("; ")));
    }
    let lam1 = values[0];
    let next = values[rank];
    if !(next > 0.0) {
        bad.push(format!("lambda_(L+1) = {next} must be positive"));
    }
    if !(an <= epsilon_prime * next) {
        bad.push(format!("alpha^N = {an} must not exceed epsilon' * lambda_(L+1) = {}", epsilon_prime * next));
    }
    let eta_bound = 1.0 / ((3.0 * nf - 2.0) * alpha.powi(n as i32 - 2).max(lam1.powf(2.0 - 2.0 / nf)));
    if !(eta > 0.0 && eta < eta_bound) {
        bad.push(format!("eta = {eta} must lie in (0, {eta_bound})"));
    }
    if !bad.is_empty() {
        return Err(TheoryError::Precondition(bad.join("; ")));
    }

    let l_prime = values.iter().rposition(|v| epsilon_prime * v > an).map_or(0, |i| i + 1);
    let l_dprime = values.iter().rposition(|v| *v > an).map_or(0, |i| i + 1);

    let mut t_max = f64::NEG_INFINITY;
    for lam in &values[..rank] {
        let eps_l = lam.powf(1.0 / nf) * epsilon / (4.0 * nf);
        t_max = t_max.max(t_identical_value(*lam, eps_l, alpha, eta, n)?.0);
    }
    let t_half_literal = t_identical_value(lam1, lam1 / 2.0, alpha, eta, n)?.0;
    let t_half_value_space =
        t_identical_value(lam1, lam1.powf(1.0 / nf) - (lam1 / 2.0).powf(1.0 / nf), alpha, eta, n)?.0;
    let k_lo = t_half_literal.max(t_max);
    let k_hi = t_plus(next, (epsilon_prime * next).powf(1.0 / nf), alpha, n)? / eta;

    let r_l = effective_rank_top(values, rank);
    let lead = epsilon * r_l + 2.0 * (l_prime - rank) as f64 / c * next / lam1 * epsilon_prime;
    let mid_sum: f64 = values[l_prime.min(l_dprime)..l_dprime].iter().sum();
    let gd_bound_sum = lead + 2.0 / lam1 * (mid_sum + (dim - l_dprime) as f64 * an);
    let gd_bound_count = lead + (dim - l_prime) as f64 * 2.0 * an / (epsilon_prime * lam1);
    Ok(GdPlateau {
        rank,
        l_prime,
        l_dprime,
        epsilon,
        epsilon_prime,
        alpha,
        eta,
        depth: n,
        t_max,
        t_half_literal,
        t_half_value_space,
        k_lo,
        k_hi,
        empty: k_lo.ceil() > k_hi.floor(),
        gd_bound_sum,
        gd_bound_count,
        gd_bound: gd_bound_sum.min(gd_bound_count),
    })
}

/// (ε′, α) making each term of the discrete bound at most ε r(Ŵ_L).
pub fn recommended_params(values: &[f64], rank: usize, epsilon: f64, n: u32) -> Result<(f64, f64), TheoryError> {
    check_sorted_nonneg(values)?;
    let dim = values.len();
    if rank < 1 || rank >= dim {
        return Err(TheoryError::Precondition(format!("rank L = {rank} must satisfy 1 <= L < n = {dim}")));
    }
    let next = values[rank];
    if !(next > 0.0) {
        return Err(TheoryError::Precondition(format!("lambda_(L+1) = {next} must be positive")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(TheoryError::Precondition(format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    let nf = n as f64;
    let lam1 = values[0];
    let share = epsilon * effective_rank_top(values, rank) / (2.0 * (dim - rank) as f64);
    let eps_prime = c_n(n) * (lam1 / next * share).min(1.0);
    let alpha = ((eps_prime * lam1).powf(1.0 / nf) * share.powf(1.0 / nf)).min((eps_prime * next).powf(1.0 / nf));
    Ok((eps_prime, alpha))
}
