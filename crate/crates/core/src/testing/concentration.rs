//! The tilted log-likelihood and its large deviations.
//!
//! `L*(x₁ⁿ) = Σ ln(q/p)(xᵢ) − n ln E_φ(q) + n ln E_φ(p)` is the
//! log-likelihood ratio of the tilted hypotheses `q*` against `p*`; it is the
//! plain ratio shifted by `n·shift` with `shift = ln E_φ(p) − ln E_φ(q)`.
//! Its per-observation cumulants are
//!
//! ```text
//! ψ_P(α) = ln ∫ q^α p^{1−α} + α·shift,    ψ_Q(α) = ln ∫ q^{1+α} p^{−α} + α·shift,
//! ```
//!
//! so that `ψ_Q(α) = ψ_P(α + 1) − shift`, and their Legendre transforms
//! `I_P`, `I_Q` satisfy `I_Q(r) = I_P(r) − r + shift`.

use super::{check_replicates, mean_and_error, BinaryTestProblem};
use crate::affinity::AffinityCurve;
use crate::error::{Error, Result};
use crate::expfam::weighted_kl;
use crate::models::{poisson_truncation, Model, Point, SampleSpace, Weight};
use crate::quad::{self, Range};
use crate::rng::{self, pairwise_sum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const SCAN_LIMIT: f64 = 20.0;
const SCAN_POINTS: usize = 400;
const GOLDEN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltedLikelihoodStats {
    /// `D_KL(Q ‖ P)`, unweighted.
    pub kl_qp: f64,
    /// `d = sup_{q > 0} |ln(q/p) − D_KL(Q ‖ P)|`; infinite for unbounded
    /// log-ratios.
    pub d_bound: f64,
    /// `Var_Q[ln(q/p)]`.
    pub sigma2: f64,
    /// `ln E_φ(p) − ln E_φ(q)`.
    pub shift: f64,
}

/// Log-likelihood ratio statistics of a single observation under `Q`.
pub fn likelihood_stats(problem: &BinaryTestProblem) -> Result<TiltedLikelihoodStats> {
    let (p, q) = (&problem.p, &problem.q);
    let kl = weighted_kl(q, p, &Weight::Const)?;
    let (lp, lq) = problem.log_normalisers()?;
    let (sigma2, d_bound) = match q.sample_space() {
        SampleSpace::Finite(m) => {
            let mut sq = Vec::with_capacity(m);
            let mut d: f64 = 0.0;
            for k in 0..m as u64 {
                let l = q.ln_mass(k);
                if l == f64::NEG_INFINITY {
                    continue;
                }
                let c = l - p.ln_mass(k) - kl;
                d = d.max(c.abs());
                sq.push(l.exp() * c * c);
            }
            (pairwise_sum(&sq), d)
        }
        SampleSpace::Counts => {
            let top = match (p, q) {
                (Model::Poisson { lambda: a }, Model::Poisson { lambda: b }) => a.max(*b),
                _ => unreachable!("counts are Poisson only"),
            };
            let terms: Vec<f64> = (0..=poisson_truncation(top))
                .map(|k| {
                    let c = q.ln_mass(k) - p.ln_mass(k) - kl;
                    q.ln_mass(k).exp() * c * c
                })
                .collect();
            (pairwise_sum(&terms), f64::INFINITY)
        }
        SampleSpace::Euclidean(1) | SampleSpace::HalfLine => {
            let (center, scale) = q.placement();
            let range = if q.sample_space() == SampleSpace::HalfLine {
                Range::HalfLine { lower: 0.0, scale }
            } else {
                Range::RealLine { center, scale }
            };
            let f = |x: f64| {
                let l = q.ln_pdf(x);
                if l == f64::NEG_INFINITY {
                    return 0.0;
                }
                let c = l - p.ln_pdf(x) - kl;
                l.exp() * c * c
            };
            (quad::integrate(f, range)?.value, f64::INFINITY)
        }
        SampleSpace::Euclidean(d) => return Err(Error::Unsupported(format!("log-ratio variance in dimension {d}"))),
    };
    Ok(TiltedLikelihoodStats {
        kl_qp: kl,
        d_bound,
        sigma2,
        shift: lp - lq,
    })
}

/// `L*(x₁ⁿ)` for a sample of size `problem.n`.
///
/// A point where exactly one density vanishes contributes `±∞`; a point
/// outside both supports, or a sample mixing `+∞` and `−∞` contributions,
/// is an error.
pub fn tilted_llr(problem: &BinaryTestProblem, xs: &[Point]) -> Result<f64> {
    if xs.len() != problem.n {
        return Err(Error::InvalidArgument(format!(
            "expected {} observations, got {}",
            problem.n,
            xs.len()
        )));
    }
    let mut total = 0.0;
    for x in xs {
        let (lp, lq) = (problem.p.log_density(x)?, problem.q.log_density(x)?);
        if lp == f64::NEG_INFINITY && lq == f64::NEG_INFINITY {
            return Err(Error::PointMismatch(format!("{x:?} lies outside both supports")));
        }
        total += lq - lp;
    }
    if total.is_nan() {
        return Err(Error::InvalidArgument(
            "sample has points outside each of the two supports".into(),
        ));
    }
    let (lp, lq) = problem.log_normalisers()?;
    Ok(total + problem.n as f64 * (lp - lq))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cumulants {
    pub psi_p: f64,
    pub psi_q: f64,
}

struct CumulantCurve {
    qp: AffinityCurve,
    shift: f64,
}

impl CumulantCurve {
    fn new(problem: &BinaryTestProblem) -> Result<Self> {
        let (lp, lq) = problem.log_normalisers()?;
        Ok(CumulantCurve {
            qp: AffinityCurve::new(&problem.q, &problem.p, &Weight::Const)?,
            shift: lp - lq,
        })
    }

    /// `ψ_P(α)`; `+∞` outside the finite region.
    fn psi_p(&self, alpha: f64) -> f64 {
        match self.qp.log_rho_any(alpha) {
            Ok(v) if v.is_finite() => v + alpha * self.shift,
            _ => f64::INFINITY,
        }
    }

    /// `ψ_Q(α)`, from `∫ q^{1+α} p^{−α}`.
    fn psi_q(&self, alpha: f64) -> f64 {
        match self.qp.log_rho_any(alpha + 1.0) {
            Ok(v) if v.is_finite() => v + alpha * self.shift,
            _ => f64::INFINITY,
        }
    }
}

/// `(ψ_P(α), ψ_Q(α))`.
pub fn cumulants(problem: &BinaryTestProblem, alpha: f64) -> Result<Cumulants> {
    let c = CumulantCurve::new(problem)?;
    let (psi_p, psi_q) = (c.psi_p(alpha), c.psi_q(alpha));
    if !psi_p.is_finite() {
        return Err(Error::Divergent(format!("integral of q^a p^(1-a) at a = {alpha}")));
    }
    if !psi_q.is_finite() {
        return Err(Error::Divergent(format!("integral of q^(a+1) p^(-a) at a = {alpha}")));
    }
    Ok(Cumulants { psi_p, psi_q })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub r: f64,
    pub i_p: f64,
    pub i_q: f64,
    /// Maximisers of `αr − ψ(α)`.
    pub alpha_p: f64,
    pub alpha_q: f64,
}

/// `sup_α [α r − ψ(α)]` over the finite part of `[−20, 20]`.
fn legendre(psi: impl Fn(f64) -> f64, r: f64) -> Result<(f64, f64)> {
    let g = |a: f64| {
        let v = psi(a);
        if v.is_finite() {
            a * r - v
        } else {
            f64::NEG_INFINITY
        }
    };
    let step = 2.0 * SCAN_LIMIT / SCAN_POINTS as f64;
    let grid = |k: usize| -SCAN_LIMIT + step * k as f64;
    let (best, best_val) = (0..=SCAN_POINTS)
        .map(|k| (k, g(grid(k))))
        .fold((0, f64::NEG_INFINITY), |acc, cur| {
            // Flat stretches resolve towards α = 0.
            let nearer = grid(cur.0).abs() < grid(acc.0).abs();
            if cur.1 > acc.1 || (cur.1 == acc.1 && nearer) {
                cur
            } else {
                acc
            }
        });
    if best_val == f64::NEG_INFINITY {
        return Err(Error::Divergent("cumulant is infinite on the whole scan".into()));
    }
    if best == 0 || best == SCAN_POINTS {
        return Err(Error::RateInfinite(r));
    }
    let (mut a, mut b) = (grid(best - 1), grid(best + 1));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while b - a > GOLDEN_TOL {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    let x = 0.5 * (a + b);
    let (gx, gb) = (g(x), g(grid(best)));
    Ok(if gx >= gb { (gx, x) } else { (gb, grid(best)) })
}

/// Rate functions `I_P(r)` and `I_Q(r)`, each from its own cumulant.
///
/// `I_P(0)` is the Chernoff exponent of the tilted likelihood; under the
/// constant weight it is the classical Chernoff information. An unbounded
/// supremum is reported as [`Error::RateInfinite`].
pub fn rate_function(problem: &BinaryTestProblem, r: f64) -> Result<RatePair> {
    let c = CumulantCurve::new(problem)?;
    let (i_p, alpha_p) = legendre(|a| c.psi_p(a), r)?;
    let (i_q, alpha_q) = legendre(|a| c.psi_q(a), r)?;
    Ok(RatePair {
        r,
        i_p,
        i_q,
        alpha_p,
        alpha_q,
    })
}

/// Bernoulli divergence `D(a ‖ b) = a ln(a/b) + (1−a) ln((1−a)/(1−b))`
/// with `0 ln 0 = 0`.
pub fn bernoulli_kl(a: f64, b: f64) -> f64 {
    let term = |x: f64, y: f64| {
        if x == 0.0 {
            0.0
        } else if y == 0.0 {
            f64::INFINITY
        } else {
            x * (x / y).ln()
        }
    };
    term(a, b) + term(1.0 - a, 1.0 - b)
}

/// Upper bound on `P_Q(L* ≥ βn)` for bounded log-ratios.
///
/// With `β* = β − shift`, `γ = (β* − D_KL(Q‖P))/d` and `δ = σ²/d²` the
/// bound is `exp{−n D((δ+γ)/(1+δ) ‖ δ/(1+δ))}`, the Bennett-type inequality
/// for the Doob martingale of `L*` under `Q`. It is 1 when `β*` does not
/// exceed the mean `D_KL(Q‖P)` and 0 when `γ > 1`.
pub fn tail_bound(problem: &BinaryTestProblem, beta: f64) -> Result<f64> {
    let s = likelihood_stats(problem)?;
    if !s.d_bound.is_finite() {
        return Err(Error::Unsupported(
            "tail bound needs a bounded log-likelihood ratio (categorical models)".into(),
        ));
    }
    let beta_star = beta - s.shift;
    if beta_star < 0.0 {
        return Err(Error::Precondition(format!(
            "beta* = beta - ln E(p) + ln E(q) = {beta_star} must be non-negative"
        )));
    }
    if beta_star == 0.0 {
        return Ok(1.0);
    }
    let dev = beta_star - s.kl_qp;
    if dev <= 0.0 {
        return Ok(1.0);
    }
    if s.d_bound == 0.0 {
        return Ok(0.0);
    }
    let gamma = dev / s.d_bound;
    if gamma > 1.0 {
        return Ok(0.0);
    }
    let delta = s.sigma2 / (s.d_bound * s.d_bound);
    let d = bernoulli_kl((delta + gamma) / (1.0 + delta), delta / (1.0 + delta));
    Ok((-(problem.n as f64) * d).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFrequency {
    pub frequency: f64,
    /// Binomial standard error `√(f(1−f)/R)`.
    pub std_error: f64,
    pub replicates: usize,
}

/// Empirical frequency of `{L* ≥ βn}` under `Q`; replicate `r` uses stream `r`.
pub fn tail_frequency_mc(
    problem: &BinaryTestProblem,
    beta: f64,
    replicates: usize,
    seed: u64,
) -> Result<TailFrequency> {
    check_replicates(replicates)?;
    let threshold = beta * problem.n as f64;
    let hits: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let xs = problem.q.sample(&mut rng::stream(seed, r), problem.n)?;
            Ok(if tilted_llr(problem, &xs)? >= threshold {
                1.0
            } else {
                0.0
            })
        })
        .collect::<Result<_>>()?;
    let f = pairwise_sum(&hits) / replicates as f64;
    Ok(TailFrequency {
        frequency: f,
        std_error: (f * (1.0 - f) / replicates as f64).sqrt(),
        replicates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

/// Mean of the martingale increments `U_k − U_{k−1} = ln(q/p)(X_k) − D_KL(Q‖P)`
/// over `draws` observations from `Q`.
pub fn martingale_increments(problem: &BinaryTestProblem, draws: usize, seed: u64) -> Result<MeanEstimate> {
    if draws < 2 {
        return Err(Error::InvalidArgument("need at least two draws".into()));
    }
    let kl = weighted_kl(&problem.q, &problem.p, &Weight::Const)?;
    let xs = problem.q.sample(&mut rng::stream(seed, 0), draws)?;
    let inc: Vec<f64> = xs
        .iter()
        .map(|x| Ok(problem.q.log_density(x)? - problem.p.log_density(x)? - kl))
        .collect::<Result<_>>()?;
    let (mean, std_error) = mean_and_error(&inc);
    Ok(MeanEstimate {
        mean,
        std_error,
        count: draws,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affinity;

    fn bern(a: f64) -> Model {
        Model::categorical(vec![a, 1.0 - a]).unwrap()
    }

    fn bernoulli_problem(n: usize) -> BinaryTestProblem {
        BinaryTestProblem::new(bern(0.5), bern(0.25), Weight::Const, n).unwrap()
    }

    fn poisson_problem(w: Weight) -> BinaryTestProblem {
        BinaryTestProblem::new(Model::poisson(2.0).unwrap(), Model::poisson(1.0).unwrap(), w, 1).unwrap()
    }

    #[test]
    fn bernoulli_kl_values() {
        assert!((bernoulli_kl(0.5, 0.25) - 0.143_841_036).abs() < 1e-9);
        assert_eq!(bernoulli_kl(0.3, 0.3), 0.0);
        assert_eq!(bernoulli_kl(0.0, 0.5), 2f64.ln());
        assert_eq!(bernoulli_kl(0.5, 0.0), f64::INFINITY);
    }

    #[test]
    fn bernoulli_stats() {
        let s = likelihood_stats(&bernoulli_problem(1)).unwrap();
        assert!((s.kl_qp - 0.130_812).abs() < 1e-6);
        assert!((s.d_bound - 0.823_959).abs() < 1e-6);
        assert!((s.sigma2 - 0.226_303).abs() < 1e-6);
        assert!(s.sigma2 <= s.d_bound * s.d_bound);
        assert_eq!(s.shift, 0.0);
    }

    #[test]
    fn tail_bound_cases() {
        let pb = bernoulli_problem(200);
        let s = likelihood_stats(&pb).unwrap();
        let b = tail_bound(&pb, s.kl_qp + 0.1).unwrap();
        assert!((b - 0.016_17).abs() < 1e-4, "{b}");
        assert_eq!(tail_bound(&pb, 0.0).unwrap(), 1.0);
        assert_eq!(tail_bound(&pb, s.kl_qp).unwrap(), 1.0);
        assert!(matches!(tail_bound(&pb, -0.1), Err(Error::Precondition(_))));
        assert_eq!(tail_bound(&pb, 5.0).unwrap(), 0.0);
        assert!(matches!(
            tail_bound(&poisson_problem(Weight::Const), 1.0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn tail_bound_dominates_simulation() {
        let pb = bernoulli_problem(200);
        let beta = likelihood_stats(&pb).unwrap().kl_qp + 0.1;
        let bound = tail_bound(&pb, beta).unwrap();
        let f = tail_frequency_mc(&pb, beta, 20_000, 1).unwrap();
        assert!(bound >= f.frequency + 3.0 * f.std_error, "{bound} vs {f:?}");
    }

    #[test]
    fn llr_shift() {
        let w = Weight::tilt(0.3).unwrap();
        let pb = BinaryTestProblem::new(Model::poisson(2.0).unwrap(), Model::poisson(2.0).unwrap(), w, 3).unwrap();
        let xs = vec![Point::Count(1), Point::Count(4), Point::Count(0)];
        assert_eq!(tilted_llr(&pb, &xs).unwrap(), 0.0);
        let pb = BinaryTestProblem::new(
            Model::poisson(2.0).unwrap(),
            Model::poisson(1.0).unwrap(),
            Weight::tilt(0.3).unwrap(),
            3,
        )
        .unwrap();
        let (lp, lq) = pb.log_normalisers().unwrap();
        let plain: f64 = xs
            .iter()
            .map(|x| pb.q.log_density(x).unwrap() - pb.p.log_density(x).unwrap())
            .sum();
        assert!((tilted_llr(&pb, &xs).unwrap() - plain - 3.0 * (lp - lq)).abs() < 1e-13);
        assert!(tilted_llr(&pb, &xs[..2]).is_err());
    }

    #[test]
    fn llr_sentinels() {
        let pb = BinaryTestProblem::new(bern(1.0), bern(0.5), Weight::Const, 1).unwrap();
        assert_eq!(tilted_llr(&pb, &[Point::Count(1)]).unwrap(), f64::INFINITY);
        let pb = BinaryTestProblem::new(bern(1.0), bern(1.0), Weight::Const, 1).unwrap();
        assert!(tilted_llr(&pb, &[Point::Count(1)]).is_err());
    }

    #[test]
    fn cumulant_identities() {
        let w = Weight::tilt(0.25).unwrap();
        let pb = poisson_problem(w.clone());
        assert!(cumulants(&pb, 0.0).unwrap().psi_p.abs() < 1e-15);
        let (lp, lq) = pb.log_normalisers().unwrap();
        for a in [-1.5, -0.3, 0.5, 2.0] {
            let c = cumulants(&pb, a).unwrap();
            let next = cumulants(&pb, a + 1.0).unwrap();
            assert!((c.psi_q - (next.psi_p + lq - lp)).abs() < 1e-10);
        }
        // summation oracle at alpha = 1/2
        let (p, q) = (&pb.p, &pb.q);
        let direct: f64 = (0..80u64)
            .map(|k| (0.5 * q.ln_mass(k) + 0.5 * p.ln_mass(k)).exp())
            .sum();
        let c = cumulants(&pb, 0.5).unwrap();
        assert!((c.psi_p - (direct.ln() + 0.5 * (lp - lq))).abs() < 1e-12);
        let plain = poisson_problem(Weight::Const);
        let rho = affinity::rho_w(&plain.p, &plain.q, &Weight::Const, 0.7).unwrap();
        assert!((cumulants(&plain, 0.3).unwrap().psi_p - rho.ln()).abs() < 1e-14);
    }

    #[test]
    fn rate_at_zero_is_chernoff() {
        let pb = poisson_problem(Weight::Const);
        let r = rate_function(&pb, 0.0).unwrap();
        assert!((r.i_p - 0.086_071_332_06).abs() < 1e-10);
        let same = BinaryTestProblem::new(
            Model::poisson(2.0).unwrap(),
            Model::poisson(2.0).unwrap(),
            Weight::Const,
            1,
        )
        .unwrap();
        assert!(rate_function(&same, 0.0).unwrap().i_p.abs() < 1e-12);
    }

    #[test]
    fn legendre_relation() {
        let pb = poisson_problem(Weight::tilt(0.25).unwrap());
        let shift = likelihood_stats(&pb).unwrap().shift;
        for r in [-1.0, 0.1, 0.8] {
            let rp = rate_function(&pb, r).unwrap();
            assert!((rp.i_q - (rp.i_p - r + shift)).abs() < 1e-8, "{rp:?}");
        }
    }

    #[test]
    fn bounded_ratio_has_infinite_rate_outside_range() {
        let pb = bernoulli_problem(1);
        assert!(matches!(rate_function(&pb, 5.0), Err(Error::RateInfinite(_))));
    }

    #[test]
    fn increments_are_centred() {
        let m = martingale_increments(&bernoulli_problem(1), 100_000, 4).unwrap();
        assert!(m.mean.abs() < 3.0 * m.std_error, "{m:?}");
    }
}
