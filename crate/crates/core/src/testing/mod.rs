//! Context-weighted hypothesis testing.
//!
//! For `H₀: X₁ⁿ ∼ P^{⊗n}` against `H₁: X₁ⁿ ∼ Q^{⊗n}` and a weight `φ(x₁ⁿ)`,
//! the weighted loss of a decision rule is `∫ φ p 1{decide H₁} + ∫ φ q 1{decide H₀}`.
//! The likelihood-ratio rule `1{q ≥ p}` is optimal and its loss is
//! `L*_n = ∫ φ min{p, q}`; `−(1/n) ln L*_n` approaches `D^w_C`.

mod concentration;
mod enumerate;
mod mary;

pub use concentration::{
    bernoulli_kl, cumulants, likelihood_stats, martingale_increments, rate_function, tail_bound, tail_frequency_mc,
    tilted_llr, Cumulants, MeanEstimate, RatePair, TailFrequency, TiltedLikelihoodStats,
};
pub use enumerate::STATE_LIMIT;
pub use mary::{
    mary_exponent, mary_optimal_loss, mary_optimal_loss_mc, pairwise_minima, MAryProblem, MaryExponent, PairExponent,
};

use crate::affinity;
use crate::error::{Error, Result};
use crate::models::{weighted_normaliser, Model, Point, Weight};
use crate::rng::{self, pairwise_sum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Smallest replicate count accepted by the Monte Carlo estimators.
pub const MIN_REPLICATES: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryTestProblem {
    pub p: Model,
    pub q: Model,
    pub weight: Weight,
    pub n: usize,
}

impl BinaryTestProblem {
    /// Both weighted normalisers must be finite.
    pub fn new(p: Model, q: Model, weight: Weight, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample size must be at least 1".into()));
        }
        weight.check_pair(&p, &q)?;
        weight.check_model(&p)?;
        weight.check_model(&q)?;
        Ok(BinaryTestProblem { p, q, weight, n })
    }

    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(self.p.clone(), self.q.clone(), self.weight.clone(), n)
    }

    /// `(ln E_φ(p), ln E_φ(q))` for a single observation.
    pub fn log_normalisers(&self) -> Result<(f64, f64)> {
        Ok((
            weighted_normaliser(&self.p, &self.weight)?.ln(),
            weighted_normaliser(&self.q, &self.weight)?.ln(),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossMethod {
    ExactEnumeration,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossEstimate {
    pub value: f64,
    pub std_error: f64,
    pub method: LossMethod,
    pub replicates: usize,
    pub n: usize,
    /// `−(1/n) ln value`.
    pub exponent_estimate: f64,
}

impl LossEstimate {
    fn new(value: f64, std_error: f64, method: LossMethod, replicates: usize, n: usize) -> Self {
        LossEstimate {
            value,
            std_error,
            method,
            replicates,
            n,
            exponent_estimate: -value.ln() / n as f64,
        }
    }
}

/// Machine-readable summary of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub loss: f64,
    pub std_error: f64,
    pub exponent_estimate: f64,
    pub d_c_w_reference: f64,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub method: LossMethod,
}

/// `L*_n = ∫ φ min{p, q}` summed exactly over type classes.
///
/// Categorical and Poisson models only; more than [`STATE_LIMIT`] classes
/// is an error pointing to [`optimal_loss_mc`].
pub fn optimal_loss_exact(problem: &BinaryTestProblem) -> Result<LossEstimate> {
    let models = [problem.p.clone(), problem.q.clone()];
    let mut terms = Vec::new();
    enumerate::for_each_class(&models, &problem.weight, problem.n, |c| {
        let lm = c.ln_lik[0].min(c.ln_lik[1]);
        if lm > f64::NEG_INFINITY && c.ln_weight > f64::NEG_INFINITY {
            terms.push((c.ln_mult + c.ln_weight + lm).exp());
        }
    })?;
    Ok(LossEstimate::new(
        pairwise_sum(&terms),
        0.0,
        LossMethod::ExactEnumeration,
        0,
        problem.n,
    ))
}

/// `TV_φ = ½ ∫ φ |p − q|` over `𝒳ⁿ`, exactly.
pub fn weighted_tv(problem: &BinaryTestProblem) -> Result<f64> {
    let models = [problem.p.clone(), problem.q.clone()];
    let mut terms = Vec::new();
    enumerate::for_each_class(&models, &problem.weight, problem.n, |c| {
        if c.ln_weight == f64::NEG_INFINITY {
            return;
        }
        let (a, b) = (c.ln_lik[0], c.ln_lik[1]);
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        if hi == f64::NEG_INFINITY {
            return;
        }
        // |e^a − e^b| = e^hi (1 − e^{lo − hi})
        let diff = -(lo - hi).exp_m1();
        terms.push((c.ln_mult + c.ln_weight + hi).exp() * diff);
    })?;
    Ok(0.5 * pairwise_sum(&terms))
}

/// `½((E_φp)ⁿ + (E_φq)ⁿ) − TV_φ`, which equals `L*_n`.
pub fn loss_from_tv(problem: &BinaryTestProblem) -> Result<f64> {
    let (lp, lq) = problem.log_normalisers()?;
    let n = problem.n as f64;
    Ok(0.5 * ((n * lp).exp() + (n * lq).exp()) - weighted_tv(problem)?)
}

/// Sums of `ln p`, `ln q` and `ln φ` over a sample.
pub(crate) fn sample_sums(problem: &BinaryTestProblem, xs: &[Point]) -> Result<(f64, f64, f64)> {
    let (mut sp, mut sq, mut sw) = (0.0, 0.0, 0.0);
    for x in xs {
        sp += problem.p.log_density(x)?;
        sq += problem.q.log_density(x)?;
        sw += problem.weight.ln_value(x)?;
    }
    Ok((sp, sq, sw))
}

fn mean_and_error(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    let mean = pairwise_sum(values) / r;
    let dev: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    let var = pairwise_sum(&dev) / (r - 1.0);
    (mean, (var / r).sqrt())
}

pub(crate) fn check_replicates(replicates: usize) -> Result<()> {
    if replicates < MIN_REPLICATES {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_REPLICATES} replicates are needed, got {replicates}"
        )));
    }
    Ok(())
}

/// Monte Carlo estimate of the loss of the likelihood-ratio rule.
///
/// Replicate `r` draws one sample of size `n` under `P` from stream `2r`
/// and one under `Q` from stream `2r+1`, and scores
/// `φ(x^P) 1{q ≥ p} + φ(x^Q) 1{q < p}`. Replicates run in parallel; the
/// result depends only on `seed`.
pub fn optimal_loss_mc(problem: &BinaryTestProblem, replicates: usize, seed: u64) -> Result<LossEstimate> {
    check_replicates(replicates)?;
    let n = problem.n;
    let scores: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let xs = problem.p.sample(&mut rng::stream(seed, 2 * r), n)?;
            let (sp, sq, sw) = sample_sums(problem, &xs)?;
            let under_p = if sq >= sp { sw.exp() } else { 0.0 };
            let ys = problem.q.sample(&mut rng::stream(seed, 2 * r + 1), n)?;
            let (sp, sq, sw) = sample_sums(problem, &ys)?;
            let under_q = if sq < sp { sw.exp() } else { 0.0 };
            Ok(under_p + under_q)
        })
        .collect::<Result<_>>()?;
    let (mean, se) = mean_and_error(&scores);
    Ok(LossEstimate::new(mean, se, LossMethod::MonteCarlo, replicates, n))
}

/// [`optimal_loss_mc`] packaged with the weighted Chernoff information.
pub fn simulate(problem: &BinaryTestProblem, replicates: usize, seed: u64) -> Result<SimReport> {
    let est = optimal_loss_mc(problem, replicates, seed)?;
    let reference = affinity::chernoff(&problem.p, &problem.q, &problem.weight)?;
    Ok(SimReport {
        loss: est.value,
        std_error: est.std_error,
        exponent_estimate: est.exponent_estimate,
        d_c_w_reference: reference.d_c_w,
        n: problem.n,
        replicates,
        seed,
        method: est.method,
    })
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub exponent_estimate: f64,
    pub d_c_w: f64,
}

/// Exponent estimates for several sample sizes: exact where enumeration
/// is possible, Monte Carlo otherwise.
pub fn convergence_table(
    problem: &BinaryTestProblem,
    sizes: &[usize],
    replicates: usize,
    seed: u64,
) -> Result<Vec<ConvergenceRow>> {
    let d_c_w = affinity::chernoff(&problem.p, &problem.q, &problem.weight)?.d_c_w;
    sizes
        .iter()
        .map(|&n| {
            let pb = problem.with_n(n)?;
            let est = match optimal_loss_exact(&pb) {
                Ok(e) => e,
                Err(Error::StateSpace { .. } | Error::Unsupported(_)) => optimal_loss_mc(&pb, replicates, seed)?,
                Err(e) => return Err(e),
            };
            Ok(ConvergenceRow {
                n,
                exponent_estimate: est.exponent_estimate,
                d_c_w,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bern(a: f64) -> Model {
        Model::categorical(vec![a, 1.0 - a]).unwrap()
    }

    fn problem(w: Weight, n: usize) -> BinaryTestProblem {
        BinaryTestProblem::new(bern(0.5), bern(0.25), w, n).unwrap()
    }

    /// Raw loop over all 2ⁿ binary sequences.
    fn brute_force(pb: &BinaryTestProblem) -> (f64, f64) {
        let (mut loss, mut tv) = (0.0, 0.0);
        for mask in 0u64..(1 << pb.n) {
            let xs: Vec<Point> = (0..pb.n).map(|i| Point::Count((mask >> i) & 1)).collect();
            let (sp, sq, sw) = sample_sums(pb, &xs).unwrap();
            let (pv, qv, wv) = (sp.exp(), sq.exp(), sw.exp());
            loss += wv * pv.min(qv);
            tv += 0.5 * wv * (pv - qv).abs();
        }
        (loss, tv)
    }

    #[test]
    fn single_observation() {
        let pb = problem(Weight::Const, 1);
        assert!((optimal_loss_exact(&pb).unwrap().value - 0.75).abs() < 1e-15);
        assert!((weighted_tv(&pb).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn identical_hypotheses_lose_everything() {
        let pb = BinaryTestProblem::new(bern(0.3), bern(0.3), Weight::Const, 3).unwrap();
        assert!((optimal_loss_exact(&pb).unwrap().value - 1.0).abs() < 1e-15);
        assert_eq!(weighted_tv(&pb).unwrap(), 0.0);
    }

    #[test]
    fn classes_agree_with_product_space() {
        for w in [
            Weight::Const,
            Weight::table(vec![1.0, 2.0]).unwrap(),
            Weight::tilt(0.4).unwrap(),
        ] {
            for n in [1, 3, 6, 9] {
                let pb = problem(w.clone(), n);
                let (loss, tv) = brute_force(&pb);
                assert!((optimal_loss_exact(&pb).unwrap().value - loss).abs() < 1e-12 * loss.max(1.0));
                assert!((weighted_tv(&pb).unwrap() - tv).abs() < 1e-12 * tv.max(1.0));
                assert!((loss_from_tv(&pb).unwrap() - loss).abs() < 1e-12 * loss.max(1.0));
            }
        }
    }

    #[test]
    fn exponent_never_beats_chernoff() {
        let d = affinity::chernoff(&bern(0.5), &bern(0.25), &Weight::Const)
            .unwrap()
            .d_c_w;
        assert!((d - 0.034_688).abs() < 1e-6);
        let mut last = f64::INFINITY;
        for n in 1..=6 {
            let e = optimal_loss_exact(&problem(Weight::Const, n))
                .unwrap()
                .exponent_estimate;
            assert!(e >= d - 1e-12);
            assert!(e <= last);
            last = e;
        }
    }

    #[test]
    fn poisson_enumeration() {
        let pb = BinaryTestProblem::new(
            Model::poisson(2.0).unwrap(),
            Model::poisson(1.0).unwrap(),
            Weight::Const,
            1,
        )
        .unwrap();
        let direct: f64 = (0..60u64).map(|k| pb.p.ln_mass(k).min(pb.q.ln_mass(k)).exp()).sum();
        assert!((optimal_loss_exact(&pb).unwrap().value - direct).abs() < 1e-14);
    }

    #[test]
    fn monte_carlo_is_unbiased_for_identical_hypotheses() {
        let pb = BinaryTestProblem::new(bern(0.3), bern(0.3), Weight::Const, 5).unwrap();
        let est = optimal_loss_mc(&pb, 2000, 3).unwrap();
        assert_eq!(est.value, 1.0);
        assert!(optimal_loss_mc(&pb, 10, 3).is_err());
    }

    #[test]
    fn monte_carlo_matches_enumeration() {
        let pb = problem(Weight::table(vec![1.0, 2.0]).unwrap(), 4);
        let exact = optimal_loss_exact(&pb).unwrap().value;
        let mc = optimal_loss_mc(&pb, 200_000, 7).unwrap();
        assert!((mc.value - exact).abs() < 3.0 * mc.std_error, "{mc:?} vs {exact}");
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let pb = problem(Weight::Const, 8);
        assert_eq!(
            optimal_loss_mc(&pb, 5000, 11).unwrap(),
            optimal_loss_mc(&pb, 5000, 11).unwrap()
        );
    }
}
