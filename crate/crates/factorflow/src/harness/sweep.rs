//! Grid sweep comparing empirical hit times with the upper and lower predictions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{run_scalar, DEFAULT_SCALAR_CAP};
use crate::theory::{evaluate_identical, stepsize_bound, IdCase, StepsizeContext};

use super::report::{fmt_float, Check};
use super::with_thread_cap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub depths: Vec<u32>,
    pub lambdas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub epsilons: Vec<f64>,
    /// η = eta_fraction × the hitting-time step-size bound (the convergence bound for N = 1).
    pub eta_fraction: f64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            depths: vec![2, 3, 4],
            lambdas: vec![0.5, 1.0, 5.0, 10.0],
            alphas: vec![1e-1, 1e-2],
            epsilons: vec![1e-2, 1e-3],
            eta_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub depth: u32,
    pub lambda: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub eta: f64,
    pub t_emp: Option<u64>,
    pub t_lower: Option<f64>,
    /// T_Id, or the closed-form count for N = 1.
    pub t_id: Option<f64>,
    pub case_tag: Option<IdCase>,
    pub bracket_ok: Option<bool>,
    /// Why the row was not evaluated.
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub grid: SweepGrid,
    pub rows: Vec<SweepRow>,
    pub checks: Vec<Check>,
}

impl SweepTable {
    pub fn all_pass(&self) -> bool {
        !self.checks.iter().any(Check::failed)
    }

    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(fmt_float).unwrap_or_default();
        let mut out = String::from("depth,lambda,alpha,epsilon,eta,t_emp,t_lower,t_id,case,bracket_ok,skipped\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                r.depth,
                fmt_float(r.lambda),
                fmt_float(r.alpha),
                fmt_float(r.epsilon),
                fmt_float(r.eta),
                r.t_emp.map(|k| k.to_string()).unwrap_or_default(),
                opt(r.t_lower),
                opt(r.t_id),
                r.case_tag.map(|c| serde_json::to_value(c).unwrap().as_str().unwrap().to_string()).unwrap_or_default(),
                r.bracket_ok.map(|b| b.to_string()).unwrap_or_default(),
                r.skipped.as_deref().unwrap_or("").replace(',', ";"),
            ));
        }
        out
    }
}

fn sweep_row(depth: u32, lambda: f64, alpha: f64, epsilon: f64, fraction: f64) -> SweepRow {
    let mut row = SweepRow {
        depth,
        lambda,
        alpha,
        epsilon,
        eta: 0.0,
        t_emp: None,
        t_lower: None,
        t_id: None,
        case_tag: None,
        bracket_ok: None,
        skipped: None,
    };
    if depth == 0 {
        row.skipped = Some("depth must be at least 1".into());
        return row;
    }
    if depth == 1 {
        row.eta = fraction * stepsize_bound(StepsizeContext::Convergence, lambda, alpha, 1);
        let gap = (alpha - lambda).abs();
        if gap <= epsilon {
            row.skipped = Some(format!("epsilon = {epsilon} >= |alpha - lambda| = {gap}"));
            return row;
        }
        let t = ((gap / epsilon).ln() / (1.0 - row.eta).ln().abs()).ceil();
        let traj = run_scalar(lambda, alpha, row.eta, 1, epsilon, (2.0 * t) as usize + 10);
        row.t_id = Some(t);
        row.t_emp = traj.hit_index.map(|k| k as u64);
        row.bracket_ok = Some(row.t_emp.is_some_and(|k| (k as f64 - t).abs() <= 1.0));
        return row;
    }
    row.eta = fraction * stepsize_bound(StepsizeContext::HittingTime, lambda, alpha, depth);
    let bundle = match evaluate_identical(lambda, epsilon, alpha, row.eta, depth) {
        Ok(b) => b,
        Err(e) => {
            row.skipped = Some(e.to_string());
            return row;
        }
    };
    if !bundle.violations.is_empty() {
        row.skipped = Some(bundle.violations.join("; "));
        return row;
    }
    let t_id = bundle.t_id.expect("identical bundle carries T_Id");
    row.t_id = Some(t_id);
    row.t_lower = bundle.t_id_lower;
    row.case_tag = bundle.case_tag;
    let cap = ((2.0 * t_id).ceil() as usize + 100).min(DEFAULT_SCALAR_CAP);
    let traj = run_scalar(lambda, alpha, row.eta, depth, epsilon, cap);
    row.t_emp = traj.hit_index.map(|k| k as u64);
    row.bracket_ok = Some(match row.t_emp {
        Some(k) => k as f64 <= t_id && row.t_lower.is_none_or(|lo| lo <= k as f64),
        None => false,
    });
    row
}

/// One row per grid point, evaluated in parallel (capped by FACTORFLOW_THREADS) and kept in grid order.
pub fn sweep_bracket(grid: &SweepGrid) -> SweepTable {
    let mut points = Vec::new();
    for &n in &grid.depths {
        for &l in &grid.lambdas {
            for &a in &grid.alphas {
                for &e in &grid.epsilons {
                    points.push((n, l, a, e));
                }
            }
        }
    }
    let fraction = grid.eta_fraction;
    let rows: Vec<SweepRow> =
        with_thread_cap(|| points.par_iter().map(|&(n, l, a, e)| sweep_row(n, l, a, e, fraction)).collect());
    let evaluated: Vec<&SweepRow> = rows.iter().filter(|r| r.bracket_ok.is_some()).collect();
    let ok = evaluated.iter().filter(|r| r.bracket_ok == Some(true)).count();
    let mut checks = vec![Check::enforced(
        "bracket",
        ok == evaluated.len(),
        format!("{ok}/{} admissible rows bracketed, {} skipped", evaluated.len(), rows.len() - evaluated.len()),
    )];
    if !(fraction > 0.0 && fraction < 1.0) {
        checks.push(Check::enforced("eta_fraction", false, format!("eta_fraction = {fraction} must lie in (0, 1)")));
    }
    SweepTable { grid: grid.clone(), rows, checks }
}
