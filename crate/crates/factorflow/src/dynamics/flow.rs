//! Gradient flow y′ = −y^{N−1}(y^N − λ), y(0) = α.

use super::DynamicsError;
use crate::theory::t_plus;

const BISECT_MAX_ITERS: usize = 200;

fn rhs(y: f64, lambda: f64, n: u32) -> f64 {
    -y.powi(n as i32 - 1) * (y.powi(n as i32) - lambda)
}

/// Classical RK4 with fixed step h; the last step is shortened to land on t.
pub fn rk4_flow(lambda: f64, alpha: f64, n: u32, t: f64, h: f64) -> f64 {
    let f = |y: f64| rhs(y, lambda, n);
    let mut y = alpha;
    let full = (t / h).floor() as u64;
    let step = |y: f64, h: f64| {
        let k1 = f(y);
        let k2 = f(y + 0.5 * h * k1);
        let k3 = f(y + 0.5 * h * k2);
        let k4 = f(y + h * k3);
        y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };
    for _ in 0..full {
        y = step(y, h);
    }
    let rest = t - full as f64 * h;
    if rest > 0.0 {
        y = step(y, rest);
    }
    y
}

/// RK4 step used as the reference for λ < 0.
pub fn negative_flow_step(lambda: f64, alpha: f64, n: u32) -> f64 {
    let m = alpha.max(lambda.abs().powf(1.0 / n as f64));
    1e-4f64.min(1e-2 / (lambda.abs() * m.powi(2 * n as i32 - 2)))
}

/// Upper comparator for λ < 0: the solution of y′ = −|λ|y^{N−1}.
pub fn y_minus(lambda: f64, alpha: f64, n: u32, t: f64) -> f64 {
    if n == 2 {
        alpha * (lambda * t).exp()
    } else {
        let k = n as f64 - 2.0;
        ((2.0 - n as f64) * lambda * t + alpha.powf(-k)).powf(-1.0 / k)
    }
}

pub fn flow_value(lambda: f64, alpha: f64, n: u32, t: f64) -> Result<f64, DynamicsError> {
    if !(alpha > 0.0) || !(t >= 0.0) || n < 1 {
        return Err(DynamicsError::Invalid(format!("flow needs alpha > 0, t >= 0, N >= 1 (alpha={alpha}, t={t}, N={n})")));
    }
    if t == 0.0 {
        return Ok(alpha);
    }
    if n == 1 {
        return Ok(lambda - (lambda - alpha) * (-t).exp());
    }
    let nf = n as f64;
    if lambda == 0.0 {
        let p = 2.0 * nf - 2.0;
        return Ok((p * t + alpha.powf(-p)).powf(-1.0 / p));
    }
    if lambda < 0.0 {
        return Ok(rk4_flow(lambda, alpha, n, t, negative_flow_step(lambda, alpha, n)));
    }
    if n == 2 {
        return Ok((lambda / (1.0 + (lambda / (alpha * alpha) - 1.0) * (-2.0 * lambda * t).exp())).sqrt());
    }
    let r = lambda.powf(1.0 / nf);
    if alpha == r {
        return Ok(alpha);
    }
    // y moves monotonically from α towards r; t_plus(λ, y, α) increases along the way
    let (mut near, mut far) = (alpha, r);
    let tol = 1e-12 * r.max(1.0);
    let regime = |msg: &str| DynamicsError::NoBracket(format!("N={n}, lambda={lambda} > 0: {msg}"));
    for _ in 0..BISECT_MAX_ITERS {
        if (far - near).abs() <= tol {
            break;
        }
        let mid = 0.5 * (near + far);
        if mid == near || mid == far {
            break;
        }
        let tm = t_plus(lambda, mid, alpha, n).map_err(|e| regime(&e.to_string()))?;
        if tm < t {
            near = mid;
        } else {
            far = mid;
        }
    }
    Ok(0.5 * (near + far))
}
