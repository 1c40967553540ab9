//! Closed forms for same-family Gaussian, Poisson and exponential pairs.

use crate::error::{Error, Result};
use crate::models::{Gaussian, Model, Weight};
use crate::special::log_mean;
use nalgebra::DVector;

pub(super) fn available(p: &Model, q: &Model) -> bool {
    matches!(
        (p, q),
        (Model::Gaussian(_), Model::Gaussian(_))
            | (Model::Poisson { .. }, Model::Poisson { .. })
            | (Model::Exponential { .. }, Model::Exponential { .. })
    )
}

fn tilt_vector(weight: &Weight, dim: usize) -> DVector<f64> {
    match weight {
        Weight::ExpTilt(g) => DVector::from_column_slice(g),
        _ => DVector::zeros(dim),
    }
}

fn common_cov(a: &Gaussian, b: &Gaussian) -> bool {
    a.cov() == b.cov()
}

fn gaussian_log_rho(a: &Gaussian, b: &Gaussian, weight: &Weight, alpha: f64) -> f64 {
    let gamma = tilt_vector(weight, a.dim());
    let prec = a.precision() * alpha + b.precision() * (1.0 - alpha);
    let Some(chol) = prec.clone().cholesky() else {
        return f64::INFINITY;
    };
    let lin = a.precision() * a.mean() * alpha + b.precision() * b.mean() * (1.0 - alpha);
    let mean = chol.solve(&lin);
    let ln_det_prec = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let quad_terms = alpha * a.mean().dot(&(a.precision() * a.mean()))
        + (1.0 - alpha) * b.mean().dot(&(b.precision() * b.mean()))
        - lin.dot(&mean);
    -0.5 * quad_terms - 0.5 * ln_det_prec - 0.5 * alpha * a.log_det() - 0.5 * (1.0 - alpha) * b.log_det()
        + gamma.dot(&mean)
        + 0.5 * gamma.dot(&chol.solve(&gamma))
}

/// `ln ρ^w_α` for any real `α`; `+∞` where the integral diverges.
pub(super) fn log_rho(p: &Model, q: &Model, weight: &Weight, alpha: f64) -> f64 {
    match (p, q) {
        (Model::Gaussian(a), Model::Gaussian(b)) => gaussian_log_rho(a, b, weight, alpha),
        (Model::Poisson { lambda: l1 }, Model::Poisson { lambda: l2 }) => {
            let g = weight.scalar_tilt().unwrap_or(0.0);
            -alpha * l1 - (1.0 - alpha) * l2 + (g + alpha * l1.ln() + (1.0 - alpha) * l2.ln()).exp()
        }
        (Model::Exponential { rate: l1 }, Model::Exponential { rate: l2 }) => {
            let g = weight.scalar_tilt().unwrap_or(0.0);
            let den = alpha * l1 + (1.0 - alpha) * l2 - g;
            if den <= 0.0 {
                f64::INFINITY
            } else {
                alpha * l1.ln() + (1.0 - alpha) * l2.ln() - den.ln()
            }
        }
        _ => f64::NAN,
    }
}

/// Analytic `F′(α)` where one is available.
pub(super) fn derivative(p: &Model, q: &Model, weight: &Weight, alpha: f64) -> Option<Result<f64>> {
    match (p, q) {
        (Model::Gaussian(a), Model::Gaussian(b)) if common_cov(a, b) => {
            let gamma = tilt_vector(weight, a.dim());
            let delta = a.mean() - b.mean();
            let dist2 = delta.dot(&(a.precision() * &delta));
            Some(Ok(-(1.0 - 2.0 * alpha) * 0.5 * dist2 + gamma.dot(&delta)))
        }
        (Model::Poisson { lambda: l1 }, Model::Poisson { lambda: l2 }) => {
            let g = weight.scalar_tilt().unwrap_or(0.0);
            let geo = (g + alpha * l1.ln() + (1.0 - alpha) * l2.ln()).exp();
            Some(Ok(l2 - l1 + geo * (l1.ln() - l2.ln())))
        }
        (Model::Exponential { rate: l1 }, Model::Exponential { rate: l2 }) => {
            let g = weight.scalar_tilt().unwrap_or(0.0);
            let den = alpha * l1 + (1.0 - alpha) * l2 - g;
            if den <= 0.0 {
                return Some(Err(Error::Divergent(format!(
                    "affinity is infinite at alpha = {alpha}"
                ))));
            }
            Some(Ok(l1.ln() - l2.ln() - (l1 - l2) / den))
        }
        _ => None,
    }
}

/// Unconstrained stationary point `α̃`.
///
/// `Some(None)` means the curve is constant in `α`; `None` means no closed
/// form is known for this pair.
pub(super) fn alpha_tilde(p: &Model, q: &Model, weight: &Weight) -> Option<Option<f64>> {
    match (p, q) {
        (Model::Gaussian(a), Model::Gaussian(b)) if common_cov(a, b) => {
            let gamma = tilt_vector(weight, a.dim());
            let delta = a.mean() - b.mean();
            let dist2 = delta.dot(&(a.precision() * &delta));
            if dist2 == 0.0 {
                return Some(None);
            }
            Some(Some(0.5 - gamma.dot(&delta) / dist2))
        }
        (Model::Poisson { lambda: l1 }, Model::Poisson { lambda: l2 }) => {
            if l1 == l2 {
                return Some(None);
            }
            let g = weight.scalar_tilt().unwrap_or(0.0);
            let l = log_mean(*l1, *l2).ok()?;
            Some(Some((l.ln() - g - l2.ln()) / (l1.ln() - l2.ln())))
        }
        (Model::Exponential { rate: l1 }, Model::Exponential { rate: l2 }) => {
            if l1 == l2 {
                return Some(None);
            }
            let g = weight.scalar_tilt().unwrap_or(0.0);
            let l = log_mean(*l1, *l2).ok()?;
            Some(Some((g + l - l2) / (l1 - l2)))
        }
        _ => None,
    }
}
