use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::potentials::root_log_sum;

/// (N−1)/(2N−1); (c_N λ)^{1/N} is the inflection point of the scalar flow.
pub fn c_n(n: u32) -> f64 {
    let n = n as f64;
    (n - 1.0) / (2.0 * n - 1.0)
}

pub fn a_n(n: u32) -> f64 {
    (1.0 - c_n(n).powf(1.0 / n as f64)).ln().abs()
}

pub fn b_n(n: u32) -> f64 {
    let c = c_n(n);
    (1.0 / (2.0 * c) - c.powf(1.0 / n as f64)).ln().abs()
}

/// Root in (1, 2) of (c−1)c^{N−1} = 1, by bisection.
pub fn c_root(n: u32) -> f64 {
    assert!(n >= 2, "c_root needs N >= 2");
    let f = |c: f64| (c - 1.0) * c.powi(n as i32 - 1) - 1.0;
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let mid = 0.5 * (lo + hi);
    // pick whichever endpoint has the smaller residual
    [lo, mid, hi].into_iter().min_by(|a, b| f(*a).abs().total_cmp(&f(*b).abs())).unwrap()
}

/// π·cot(2π/N) for even N, π/sin(2π/N) for odd N.
pub fn q_n(n: u32) -> f64 {
    let theta = 2.0 * PI / n as f64;
    if n.is_multiple_of(2) {
        if n == 4 {
            return 0.0;
        }
        PI * theta.cos() / theta.sin()
    } else {
        PI / theta.sin()
    }
}

/// Constant term of the small-α expansion of the time to reach the inflection point.
pub fn big_c_n(n: u32) -> f64 {
    assert!(n >= 3, "C_N needs N >= 3");
    let c = c_n(n);
    let nf = n as f64;
    q_n(n) - root_log_sum(c.powf(1.0 / nf), n) - nf / ((nf - 2.0) * c.powf(1.0 - 2.0 / nf))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    pub depth: u32,
    pub c_n: f64,
    pub a_n: f64,
    pub b_n: f64,
    pub c_root: f64,
    /// Only defined for N ≥ 3.
    pub big_c_n: Option<f64>,
    pub q_n: Option<f64>,
}

impl TheoryConstants {
    pub fn new(depth: u32) -> Self {
        assert!(depth >= 2, "constants need N >= 2");
        TheoryConstants {
            depth,
            c_n: c_n(depth),
            a_n: a_n(depth),
            b_n: b_n(depth),
            c_root: c_root(depth),
            big_c_n: (depth >= 3).then(|| big_c_n(depth)),
            q_n: (depth >= 3).then(|| q_n(depth)),
        }
    }
}
