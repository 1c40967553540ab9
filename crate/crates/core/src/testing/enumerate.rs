//! Exact sums over `𝒳ⁿ` grouped by type class.
//!
//! Every summand used by the exact estimators depends on `x₁ⁿ` only through
//! a sufficient statistic: the count vector for categorical models, the sum
//! `S = Σ xᵢ` for Poisson models. Each class is visited once with its
//! log-multiplicity, the log-weight and the log-likelihood under every
//! hypothesis.

use crate::error::{Error, Result};
use crate::models::{poisson_truncation, Model, Point, Weight};
use crate::special::ln_factorial;

/// Largest number of type classes an exact sum may visit.
pub const STATE_LIMIT: f64 = 1e7;

/// One type class.
pub struct Class<'a> {
    pub ln_mult: f64,
    pub ln_weight: f64,
    pub ln_lik: &'a [f64],
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Number of classes visited for `n` observations.
pub fn class_count(models: &[Model], weight: &Weight, n: usize) -> Result<f64> {
    match &models[0] {
        Model::Categorical { probs } => {
            let m = probs.len() as u64;
            Ok(ln_binomial(n as u64 + m - 1, m - 1).exp().round())
        }
        Model::Poisson { .. } => Ok(poisson_upper(models, weight, n) as f64 + 1.0),
        other => Err(Error::Unsupported(format!(
            "exact enumeration needs categorical or Poisson models, got {:?}",
            other.family()
        ))),
    }
}

fn poisson_upper(models: &[Model], weight: &Weight, n: usize) -> u64 {
    let g = weight.scalar_tilt().unwrap_or(0.0);
    let top = models
        .iter()
        .map(|m| match m {
            Model::Poisson { lambda } => *lambda,
            _ => 0.0,
        })
        .fold(0.0, f64::max);
    poisson_truncation(n as f64 * top * g.exp().max(1.0))
}

/// Visit every class of `𝒳ⁿ`.
pub fn for_each_class(models: &[Model], weight: &Weight, n: usize, mut visit: impl FnMut(&Class<'_>)) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    let states = class_count(models, weight, n)?;
    if states > STATE_LIMIT {
        return Err(Error::StateSpace {
            states,
            limit: STATE_LIMIT,
        });
    }
    let mut ln_lik = vec![0.0; models.len()];
    match &models[0] {
        Model::Categorical { probs } => {
            let m = probs.len();
            let ln_p: Vec<Vec<f64>> = models
                .iter()
                .map(|model| (0..m as u64).map(|k| model.ln_mass(k)).collect())
                .collect();
            let ln_w: Vec<f64> = (0..m as u64)
                .map(|k| weight.ln_value(&Point::Count(k)))
                .collect::<Result<_>>()?;
            let mut counts = vec![0usize; m];
            compositions(n, 0, &mut counts, &mut |c| {
                let mut ln_mult = ln_factorial(n as u64);
                let mut ln_weight = 0.0;
                for v in ln_lik.iter_mut() {
                    *v = 0.0;
                }
                for (k, &ck) in c.iter().enumerate() {
                    if ck == 0 {
                        continue;
                    }
                    ln_mult -= ln_factorial(ck as u64);
                    ln_weight += ck as f64 * ln_w[k];
                    for (i, v) in ln_lik.iter_mut().enumerate() {
                        *v += ck as f64 * ln_p[i][k];
                    }
                }
                visit(&Class {
                    ln_mult,
                    ln_weight,
                    ln_lik: &ln_lik,
                });
            });
        }
        Model::Poisson { .. } => {
            let g = weight.scalar_tilt().unwrap_or(0.0);
            let lambdas: Vec<f64> = models
                .iter()
                .map(|m| match m {
                    Model::Poisson { lambda } => *lambda,
                    _ => f64::NAN,
                })
                .collect();
            let nf = n as f64;
            for s in 0..=poisson_upper(models, weight, n) {
                let sf = s as f64;
                for (v, l) in ln_lik.iter_mut().zip(&lambdas) {
                    *v = -nf * l + sf * l.ln();
                }
                visit(&Class {
                    ln_mult: sf * nf.ln() - ln_factorial(s),
                    ln_weight: g * sf,
                    ln_lik: &ln_lik,
                });
            }
        }
        _ => unreachable!("checked by class_count"),
    }
    Ok(())
}

fn compositions(left: usize, pos: usize, counts: &mut [usize], f: &mut impl FnMut(&[usize])) {
    if pos + 1 == counts.len() {
        counts[pos] = left;
        f(counts);
        return;
    }
    for c in (0..=left).rev() {
        counts[pos] = c;
        compositions(left - c, pos + 1, counts, f);
    }
}
