//! M-ary classification with a context weight.
//!
//! The maximum-likelihood classifier (maximum of `wᵢ pᵢ` with priors)
//! has loss `L*_{n,M} = ∫ φ (Σᵢ wᵢ pᵢ − maxⱼ wⱼ pⱼ)`, pinned between the
//! largest and the sum of the pairwise minima `I^{i,j}_n = ∫ φ min{wᵢpᵢ, wⱼpⱼ}`.

use super::{check_replicates, enumerate, mean_and_error, LossEstimate, LossMethod};
use crate::affinity::{self, Boundary};
use crate::error::{Error, Result};
use crate::models::{Model, Weight};
use crate::rng::{self, pairwise_sum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct MAryProblem {
    pub models: Vec<Model>,
    pub weight: Weight,
    pub priors: Option<Vec<f64>>,
}

impl MAryProblem {
    pub fn new(models: Vec<Model>, weight: Weight, priors: Option<Vec<f64>>) -> Result<Self> {
        if models.len() < 2 {
            return Err(Error::InvalidArgument(
                "M-ary problems need at least two hypotheses".into(),
            ));
        }
        for m in &models {
            weight.check_pair(&models[0], m)?;
            weight.check_model(m)?;
        }
        if let Some(w) = &priors {
            if w.len() != models.len() {
                return Err(Error::InvalidArgument(format!(
                    "{} priors for {} hypotheses",
                    w.len(),
                    models.len()
                )));
            }
            if w.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(Error::InvalidArgument("priors must be strictly positive".into()));
            }
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!("priors must sum to 1, got {total}")));
            }
        }
        Ok(MAryProblem { models, weight, priors })
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    fn ln_priors(&self) -> Vec<f64> {
        match &self.priors {
            Some(w) => w.iter().map(|v| v.ln()).collect(),
            None => vec![0.0; self.models.len()],
        }
    }

    pub fn without_priors(&self) -> Self {
        MAryProblem {
            priors: None,
            ..self.clone()
        }
    }
}

/// `ln(Σ eᵃ − max eᵃ)`, computed relative to the maximum.
fn ln_sum_minus_max(values: &[f64]) -> f64 {
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut seen_top = false;
    let mut rest = 0.0;
    for &v in values {
        if v == top && !seen_top {
            seen_top = true;
            continue;
        }
        rest += (v - top).exp();
    }
    top + rest.ln()
}

/// Loss of the maximum-likelihood classifier by exact enumeration or Monte
/// Carlo.
pub fn mary_optimal_loss(
    problem: &MAryProblem,
    n: usize,
    method: LossMethod,
    replicates: usize,
    seed: u64,
) -> Result<LossEstimate> {
    match method {
        LossMethod::ExactEnumeration => mary_optimal_loss_exact(problem, n),
        LossMethod::MonteCarlo => mary_optimal_loss_mc(problem, n, replicates, seed),
    }
}

fn mary_optimal_loss_exact(problem: &MAryProblem, n: usize) -> Result<LossEstimate> {
    let ln_w = problem.ln_priors();
    let mut terms = Vec::new();
    let mut scratch = vec![0.0; problem.len()];
    enumerate::for_each_class(&problem.models, &problem.weight, n, |c| {
        if c.ln_weight == f64::NEG_INFINITY {
            return;
        }
        for (s, (l, w)) in scratch.iter_mut().zip(c.ln_lik.iter().zip(&ln_w)) {
            *s = l + w;
        }
        let lv = ln_sum_minus_max(&scratch);
        if lv > f64::NEG_INFINITY {
            terms.push((c.ln_mult + c.ln_weight + lv).exp());
        }
    })?;
    Ok(LossEstimate::new(
        pairwise_sum(&terms),
        0.0,
        LossMethod::ExactEnumeration,
        0,
        n,
    ))
}

/// Monte Carlo M-ary loss: replicate `r` samples hypothesis `i` from stream
/// `r·M + i` and scores `wᵢ φ 1{classifier ≠ i}`, ties going to the lowest
/// index.
pub fn mary_optimal_loss_mc(problem: &MAryProblem, n: usize, replicates: usize, seed: u64) -> Result<LossEstimate> {
    check_replicates(replicates)?;
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    let m = problem.len() as u64;
    let ln_w = problem.ln_priors();
    let scores: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let mut total = 0.0;
            for (i, model) in problem.models.iter().enumerate() {
                let xs = model.sample(&mut rng::stream(seed, r * m + i as u64), n)?;
                let mut best = (0usize, f64::NEG_INFINITY);
                let mut ln_phi = 0.0;
                for x in &xs {
                    ln_phi += problem.weight.ln_value(x)?;
                }
                for (j, other) in problem.models.iter().enumerate() {
                    let mut s = ln_w[j];
                    for x in &xs {
                        s += other.log_density(x)?;
                    }
                    if s > best.1 {
                        best = (j, s);
                    }
                }
                if best.0 != i {
                    total += (ln_w[i] + ln_phi).exp();
                }
            }
            Ok(total)
        })
        .collect::<Result<_>>()?;
    let (mean, se) = mean_and_error(&scores);
    Ok(LossEstimate::new(mean, se, LossMethod::MonteCarlo, replicates, n))
}

/// Pairwise minima `I^{i,j}_n` for `i < j`, in lexicographic order.
pub fn pairwise_minima(problem: &MAryProblem, n: usize) -> Result<Vec<((usize, usize), f64)>> {
    let ln_w = problem.ln_priors();
    let m = problem.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let mut terms: Vec<Vec<f64>> = vec![Vec::new(); pairs.len()];
    enumerate::for_each_class(&problem.models, &problem.weight, n, |c| {
        if c.ln_weight == f64::NEG_INFINITY {
            return;
        }
        for (k, &(i, j)) in pairs.iter().enumerate() {
            let lm = (c.ln_lik[i] + ln_w[i]).min(c.ln_lik[j] + ln_w[j]);
            if lm > f64::NEG_INFINITY {
                terms[k].push((c.ln_mult + c.ln_weight + lm).exp());
            }
        }
    })?;
    Ok(pairs.into_iter().zip(terms.iter().map(|t| pairwise_sum(t))).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairExponent {
    pub i: usize,
    pub j: usize,
    pub d_c_w: f64,
    pub alpha_star: f64,
    pub boundary: Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaryExponent {
    /// Symmetric matrix of `D^w_C(Pᵢ, Pⱼ)` with a zero diagonal.
    pub matrix: Vec<Vec<f64>>,
    pub pairs: Vec<PairExponent>,
    /// `C^w_M = min_{i<j} D^w_C(Pᵢ, Pⱼ)`.
    pub c_m_w: f64,
    pub attained_by: (usize, usize),
    /// True when the minimising pair is flat, e.g. a repeated hypothesis.
    pub degenerate: bool,
}

/// Pairwise weighted Chernoff informations and their minimum.
pub fn mary_exponent(problem: &MAryProblem) -> Result<MaryExponent> {
    let m = problem.len();
    let mut matrix = vec![vec![0.0; m]; m];
    let mut pairs = Vec::new();
    for (i, pi) in problem.models.iter().enumerate() {
        for (j, pj) in problem.models.iter().enumerate().skip(i + 1) {
            let c = affinity::chernoff(pi, pj, &problem.weight)?;
            pairs.push(PairExponent {
                i,
                j,
                d_c_w: c.d_c_w,
                alpha_star: c.alpha_star,
                boundary: c.boundary,
            });
        }
    }
    for pair in &pairs {
        matrix[pair.i][pair.j] = pair.d_c_w;
        matrix[pair.j][pair.i] = pair.d_c_w;
    }
    let best = pairs
        .iter()
        .min_by(|a, b| a.d_c_w.total_cmp(&b.d_c_w))
        .expect("at least one pair");
    Ok(MaryExponent {
        c_m_w: best.d_c_w,
        attained_by: (best.i, best.j),
        degenerate: best.boundary == Boundary::Flat,
        matrix,
        pairs: pairs.clone(),
    })
}
