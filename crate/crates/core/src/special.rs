//! Special functions used by the closed forms.

use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::sync::OnceLock;

const TABLE_LEN: usize = 256;

fn factorial_table() -> &'static [f64; TABLE_LEN] {
    static TABLE: OnceLock<[f64; TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; TABLE_LEN];
        for k in 1..TABLE_LEN {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    })
}

/// `ln k!`, exact table below 256 and Stirling's series above.
pub fn ln_factorial(k: u64) -> f64 {
    if (k as usize) < TABLE_LEN {
        return factorial_table()[k as usize];
    }
    let x = k as f64 + 1.0;
    let x2 = x * x;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x2)
        + 1.0 / (1260.0 * x2 * x2 * x)
        - 1.0 / (1680.0 * x2 * x2 * x2 * x)
}

/// Logarithmic mean `(a − b)/(ln a − ln b)`, equal to `a` when `a = b`.
pub fn log_mean(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "logarithmic mean needs positive finite arguments, got ({a}, {b})"
        )));
    }
    let r = a / b;
    if (r - 1.0).abs() < 1e-6 {
        // Series in u = ln(a/b): L = b·(e^u − 1)/u = b·(1 + u/2 + u²/6 + u³/24 + …)
        let u = r.ln();
        return Ok(b * (1.0 + u / 2.0 + u * u / 6.0 + u * u * u / 24.0));
    }
    Ok((a - b) / (a.ln() - b.ln()))
}

/// Arithmetic–geometric mean of two non-negative numbers.
pub fn agm(a: f64, b: f64) -> f64 {
    let (mut a, mut b) = (a, b);
    for _ in 0..64 {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        if (an - bn).abs() <= 4.0 * f64::EPSILON * an {
            return 0.5 * (an + bn);
        }
        a = an;
        b = bn;
    }
    a
}

/// Complete elliptic integral of the first kind in the *parameter* convention,
/// `K(m) = ∫₀^{π/2} (1 − m sin²u)^{−1/2} du`, i.e. `m = k²`.
///
/// Computed as `π / (2·AGM(1, √(1−m)))`.
pub fn elliptic_k(m: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::Domain(format!("elliptic K needs 0 <= m < 1, got {m}")));
    }
    Ok(PI / (2.0 * agm(1.0, (1.0 - m).sqrt())))
}
