//! Closed forms for pairs of Cauchy laws under the constant weight.

use crate::error::{Error, Result};
use crate::models::{Model, Weight};
use crate::special::elliptic_k;
use std::f64::consts::PI;

fn params(m: &Model) -> Result<(f64, f64)> {
    match m {
        Model::Cauchy { location, scale } => Ok((*location, *scale)),
        other => Err(Error::Unsupported(format!(
            "expected a Cauchy model, got {:?}",
            other.family()
        ))),
    }
}

/// `D_KL(p ‖ q) = ln[((s₁+s₂)² + (l₁−l₂)²) / (4 s₁ s₂)]`.
///
/// Symmetric in its arguments.
pub fn cauchy_kl(p: &Model, q: &Model) -> Result<f64> {
    let (l1, s1) = params(p)?;
    let (l2, s2) = params(q)?;
    let d = l1 - l2;
    Ok((((s1 + s2).powi(2) + d * d) / (4.0 * s1 * s2)).ln())
}

/// Bhattacharyya coefficient `ρ_½ = ∫ √(pq)` through the elliptic integral
/// `K` in the parameter convention:
///
/// `ρ_½ = 4√(s₁s₂) / (π √((s₁+s₂)² + δ²)) · K(((s₁−s₂)² + δ²) / ((s₁+s₂)² + δ²))`.
///
/// Only the constant weight is supported.
pub fn cauchy_bhattacharyya_half(p: &Model, q: &Model, weight: &Weight) -> Result<f64> {
    if !weight.is_const() {
        return Err(Error::Unsupported(
            "the Cauchy closed form needs the constant weight".into(),
        ));
    }
    let (l1, s1) = params(p)?;
    let (l2, s2) = params(q)?;
    let d2 = (l1 - l2).powi(2);
    let big = (s1 + s2).powi(2) + d2;
    let m = ((s1 - s2).powi(2) + d2) / big;
    Ok(4.0 * (s1 * s2).sqrt() / (PI * big.sqrt()) * elliptic_k(m)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, Range};

    fn cauchy(l: f64, s: f64) -> Model {
        Model::cauchy(l, s).unwrap()
    }

    fn pdf(l: f64, s: f64, x: f64) -> f64 {
        s / (PI * (s * s + (x - l).powi(2)))
    }

    #[test]
    fn kl_matches_quadrature() {
        for (a, b) in [((0.0, 1.0), (3.0, 2.0)), ((0.0, 1.0), (2.0, 1.0))] {
            let direct = integrate(
                |x| pdf(a.0, a.1, x) * (pdf(a.0, a.1, x) / pdf(b.0, b.1, x)).ln(),
                Range::RealLine {
                    center: 0.0,
                    scale: 1.0,
                },
            )
            .unwrap()
            .value;
            let closed = cauchy_kl(&cauchy(a.0, a.1), &cauchy(b.0, b.1)).unwrap();
            assert!((closed - direct).abs() < 1e-8, "{closed} vs {direct}");
        }
        assert!((cauchy_kl(&cauchy(0.0, 1.0), &cauchy(3.0, 2.0)).unwrap() - (18f64 / 8.0).ln()).abs() < 1e-15);
        assert_eq!(cauchy_kl(&cauchy(1.0, 2.0), &cauchy(1.0, 2.0)).unwrap(), 0.0);
    }

    #[test]
    fn half_affinity_matches_quadrature() {
        for (a, b) in [
            ((0.0f64, 1.0f64), (2.0f64, 1.0f64)),
            ((0.0, 4.0), (0.0, 1.0)),
            ((-1.0, 0.5), (2.0, 3.0)),
        ] {
            let direct = integrate(
                |x| (pdf(a.0, a.1, x) * pdf(b.0, b.1, x)).sqrt(),
                Range::RealLine {
                    center: 0.5 * (a.0 + b.0),
                    scale: a.1.max(b.1),
                },
            )
            .unwrap()
            .value;
            let closed = cauchy_bhattacharyya_half(&cauchy(a.0, a.1), &cauchy(b.0, b.1), &Weight::Const).unwrap();
            assert!((closed - direct).abs() < 1e-8, "{closed} vs {direct}");
        }
    }

    #[test]
    fn half_affinity_special_values() {
        let same = cauchy_bhattacharyya_half(&cauchy(1.0, 3.0), &cauchy(1.0, 3.0), &Weight::Const).unwrap();
        assert!((same - 1.0).abs() < 1e-15);
        let v = cauchy_bhattacharyya_half(&cauchy(0.0, 1.0), &cauchy(2.0, 1.0), &Weight::Const).unwrap();
        assert!((v - 0.834_626_841_674_073).abs() < 1e-12);
        let scale_only = cauchy_bhattacharyya_half(&cauchy(0.0, 4.0), &cauchy(0.0, 1.0), &Weight::Const).unwrap();
        let reduced = 8.0 / (5.0 * PI) * elliptic_k(9.0 / 25.0).unwrap();
        assert!((scale_only - reduced).abs() < 1e-15);
    }

    #[test]
    fn tilted_weight_is_rejected() {
        let w = Weight::tilt(0.1).unwrap();
        assert!(matches!(
            cauchy_bhattacharyya_half(&cauchy(0.0, 1.0), &cauchy(1.0, 1.0), &w),
            Err(Error::Unsupported(_))
        ));
    }
}
