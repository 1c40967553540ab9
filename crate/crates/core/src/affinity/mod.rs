//! Weighted affinities and the weighted Chernoff information.
//!
//! For hypotheses `p`, `q` and a weight `φ`,
//!
//! ```text
//! ρ^w_α = ∫ φ p^α q^{1−α} dμ,   D^w_{B,α} = −ln ρ^w_α,   D^w_C = max_{α∈[0,1]} D^w_{B,α}.
//! ```
//!
//! `F(α) = ln ρ^w_α` is convex, so `D^w_{B,α}` is concave and its maximiser
//! `α*` is either an interior stationary point or one of the end points.
//! Under a non-constant weight `D^w_C` can be negative; it is never clamped.

mod cauchy;
mod closed;

pub use crate::special::{elliptic_k, log_mean};
pub use cauchy::{cauchy_bhattacharyya_half, cauchy_kl};

use crate::error::{Error, Result};
use crate::models::{poisson_truncation, weighted_normaliser, Model, Point, SampleSpace, Weight};
use crate::quad::{self, Range};
use crate::rng::pairwise_sum;
use serde::{Deserialize, Serialize};

const DERIVATIVE_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 200;
const FLAT_TOL: f64 = 1e-12;

/// How `ρ^w_α` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    ClosedForm,
    Quadrature,
    Summation,
}

/// Where the maximiser of `D^w_{B,α}` sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Interior,
    AtZero,
    AtOne,
    /// The curve does not depend on `α`; `α* = ½` by convention.
    Flat,
}

/// Which route produced `α*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    ClosedForm,
    Bisection,
    GoldenSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChernoffResult {
    pub alpha_star: f64,
    pub d_c_w: f64,
    pub boundary: Boundary,
    pub solver: Solver,
    pub iterations: usize,
    /// `|F′(α*)|` for an interior maximiser, 0 otherwise.
    pub residual: f64,
    /// `F′(α*)`, one-sided at the end points.
    pub derivative: f64,
}

/// The curve `α ↦ F(α) = ln ρ^w_α(p, q)` together with its derivative
/// `F′(α) = E_{(pq)_α}[ln p/q]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityCurve {
    p: Model,
    q: Model,
    weight: Weight,
    mode: EvalMode,
}

fn default_mode(p: &Model, q: &Model) -> EvalMode {
    if closed::available(p, q) {
        EvalMode::ClosedForm
    } else if p.sample_space().is_discrete() {
        EvalMode::Summation
    } else {
        EvalMode::Quadrature
    }
}

/// `α ln p + (1−α) ln q` with `x^0 = 1` at the end points and `0^α = 0`
/// inside.
fn mix(alpha: f64, lp: f64, lq: f64) -> f64 {
    if alpha == 0.0 {
        lq
    } else if alpha == 1.0 {
        lp
    } else if lp == f64::NEG_INFINITY || lq == f64::NEG_INFINITY {
        let (a, b) = if lp == f64::NEG_INFINITY {
            (alpha, lq)
        } else {
            (1.0 - alpha, lp)
        };
        // A negative exponent on a vanishing density blows up.
        if a < 0.0 && b > f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    } else {
        alpha * lp + (1.0 - alpha) * lq
    }
}

fn to_log(value: f64) -> f64 {
    if value > 0.0 {
        value.ln()
    } else if value == 0.0 {
        f64::NEG_INFINITY
    } else {
        f64::NAN
    }
}

impl AffinityCurve {
    /// Curve with the preferred evaluation mode for the pair: closed form
    /// where known, otherwise quadrature (continuous) or summation (discrete).
    pub fn new(p: &Model, q: &Model, weight: &Weight) -> Result<Self> {
        Self::with_mode(p, q, weight, default_mode(p, q))
    }

    pub fn with_mode(p: &Model, q: &Model, weight: &Weight, mode: EvalMode) -> Result<Self> {
        weight.check_pair(p, q)?;
        let space = p.sample_space();
        let ok = match mode {
            EvalMode::ClosedForm => closed::available(p, q),
            EvalMode::Summation => space.is_discrete(),
            EvalMode::Quadrature => {
                matches!(space, SampleSpace::Euclidean(1) | SampleSpace::HalfLine)
            }
        };
        if !ok {
            return Err(Error::Unsupported(format!(
                "{mode:?} evaluation for {:?} vs {:?}",
                p.family(),
                q.family()
            )));
        }
        Ok(AffinityCurve {
            p: p.clone(),
            q: q.clone(),
            weight: weight.clone(),
            mode,
        })
    }

    pub fn p(&self) -> &Model {
        &self.p
    }
    pub fn q(&self) -> &Model {
        &self.q
    }
    pub fn weight(&self) -> &Weight {
        &self.weight
    }
    pub fn mode(&self) -> EvalMode {
        self.mode
    }

    /// `F(α) = ln ρ^w_α` for `α ∈ [0, 1]`; `+∞` where the integral diverges.
    pub fn log_rho(&self, alpha: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        self.log_rho_any(alpha)
    }

    /// `ρ^w_α`.
    pub fn rho(&self, alpha: f64) -> Result<f64> {
        self.log_rho(alpha).map(f64::exp)
    }

    /// `ln ∫ φ p^α q^{1−α}` for any real `α`, `+∞` where it diverges.
    pub(crate) fn log_rho_any(&self, alpha: f64) -> Result<f64> {
        match self.mode {
            EvalMode::ClosedForm if self.p == self.q => Ok(weighted_normaliser(&self.p, &self.weight)?.ln()),
            EvalMode::ClosedForm => Ok(closed::log_rho(&self.p, &self.q, &self.weight, alpha)),
            EvalMode::Summation => self.summation(alpha, |_| 1.0).map(to_log),
            EvalMode::Quadrature => match self.quad_range(alpha) {
                None => Ok(f64::INFINITY),
                Some(range) => self.quadrature(alpha, range, |_| 1.0).map(to_log),
            },
        }
    }

    fn ln_integrand_count(&self, alpha: f64, k: u64) -> f64 {
        let lw = self.weight.ln_value(&Point::Count(k)).unwrap_or(f64::NEG_INFINITY);
        if lw == f64::NEG_INFINITY {
            return lw;
        }
        lw + mix(alpha, self.p.ln_mass(k), self.q.ln_mass(k))
    }

    fn ln_integrand_real(&self, alpha: f64, x: f64) -> f64 {
        self.weight.ln_scalar(x) + mix(alpha, self.p.ln_pdf(x), self.q.ln_pdf(x))
    }

    fn count_upper(&self, alpha: f64) -> u64 {
        match (&self.p, &self.q) {
            (Model::Categorical { probs }, _) => probs.len() as u64 - 1,
            (Model::Poisson { lambda: l1 }, Model::Poisson { lambda: l2 }) => {
                let g = self.weight.scalar_tilt().unwrap_or(0.0);
                let m = (g + alpha * l1.ln() + (1.0 - alpha) * l2.ln()).exp();
                poisson_truncation(m.max(*l1).max(*l2))
            }
            _ => 0,
        }
    }

    /// `Σ_k φ(k) p^α q^{1−α}(k) h(k)`.
    fn summation(&self, alpha: f64, h: impl Fn(u64) -> f64) -> Result<f64> {
        let upper = self.count_upper(alpha);
        let terms: Vec<f64> = (0..=upper)
            .filter_map(|k| {
                let lt = self.ln_integrand_count(alpha, k);
                (lt > f64::NEG_INFINITY).then(|| lt.exp() * h(k))
            })
            .collect();
        let total = pairwise_sum(&terms);
        if total.is_nan() {
            return Err(Error::Divergent(format!("affinity sum at alpha = {alpha}")));
        }
        Ok(total)
    }

    /// Substitution range placing nodes where the integrand has its mass.
    fn quad_range(&self, alpha: f64) -> Option<Range> {
        let g = self.weight.scalar_tilt().unwrap_or(0.0);
        match (&self.p, &self.q) {
            (Model::Exponential { rate: l1 }, Model::Exponential { rate: l2 }) => {
                let den = alpha * l1 + (1.0 - alpha) * l2 - g;
                (den > 0.0).then(|| Range::HalfLine {
                    lower: 0.0,
                    scale: 1.0 / den,
                })
            }
            (Model::Gaussian(a), Model::Gaussian(b)) => {
                let (v1, v2) = (a.cov()[(0, 0)], b.cov()[(0, 0)]);
                let tau = alpha / v1 + (1.0 - alpha) / v2;
                if tau <= 0.0 {
                    return None;
                }
                let var = 1.0 / tau;
                let center = var * (alpha * a.mean()[0] / v1 + (1.0 - alpha) * b.mean()[0] / v2) + g * var;
                Some(Range::RealLine {
                    center,
                    scale: var.sqrt(),
                })
            }
            _ => {
                let (cp, sp) = self.p.placement();
                let (cq, sq) = self.q.placement();
                let w = alpha.clamp(0.0, 1.0);
                if self.p.sample_space() == SampleSpace::HalfLine {
                    Some(Range::HalfLine {
                        lower: 0.0,
                        scale: sp.max(sq),
                    })
                } else {
                    Some(Range::RealLine {
                        center: w * cp + (1.0 - w) * cq,
                        scale: w * sp + (1.0 - w) * sq,
                    })
                }
            }
        }
    }

    fn quadrature(&self, alpha: f64, range: Range, h: impl Fn(f64) -> f64) -> Result<f64> {
        let f = |x: f64| {
            let lt = self.ln_integrand_real(alpha, x);
            if lt == f64::NEG_INFINITY {
                0.0
            } else {
                lt.exp() * h(x)
            }
        };
        Ok(quad::integrate(f, range)?.value)
    }

    fn ln_ratio_real(&self, x: f64) -> f64 {
        self.p.ln_pdf(x) - self.q.ln_pdf(x)
    }

    fn ln_ratio_count(&self, k: u64) -> f64 {
        self.p.ln_mass(k) - self.q.ln_mass(k)
    }

    /// `F′(α) = E_{(pq)_α}[ln p/q]`.
    ///
    /// Analytic for closed-form pairs where a formula is known, by central
    /// differences of the closed form for unequal Gaussian covariances, and
    /// as a tilted expectation by quadrature or summation otherwise.
    pub fn derivative(&self, alpha: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        match self.mode {
            EvalMode::ClosedForm => {
                if let Some(d) = closed::derivative(&self.p, &self.q, &self.weight, alpha) {
                    return d;
                }
                let h = 1e-5;
                let up = closed::log_rho(&self.p, &self.q, &self.weight, alpha + h);
                let down = closed::log_rho(&self.p, &self.q, &self.weight, alpha - h);
                Ok((up - down) / (2.0 * h))
            }
            EvalMode::Summation => {
                let norm = self.summation(alpha, |_| 1.0)?;
                let m = self.summation(alpha, |k| self.ln_ratio_count(k))?;
                Ok(m / norm)
            }
            EvalMode::Quadrature => {
                let range = self
                    .quad_range(alpha)
                    .ok_or_else(|| Error::Divergent(format!("affinity is infinite at alpha = {alpha}")))?;
                let norm = self.quadrature(alpha, range, |_| 1.0)?;
                let m = self.quadrature(alpha, range, |x| self.ln_ratio_real(x))?;
                Ok(m / norm)
            }
        }
    }

    /// Log-density of the arc member `(pq)_α = φ p^α q^{1−α} / ρ^w_α`.
    pub fn log_arc_density(&self, alpha: f64, x: &Point) -> Result<f64> {
        let f = self.log_rho(alpha)?;
        if !f.is_finite() {
            return Err(Error::Divergent(format!("affinity is infinite at alpha = {alpha}")));
        }
        let lw = self.weight.ln_value(x)?;
        Ok(lw + mix(alpha, self.p.log_density(x)?, self.q.log_density(x)?) - f)
    }

    fn flat(&self) -> Result<Option<ChernoffResult>> {
        let f0 = self.log_rho(0.0)?;
        let fh = self.log_rho(0.5)?;
        let f1 = self.log_rho(1.0)?;
        if !fh.is_finite() {
            return Err(Error::Divergent("affinity is infinite at alpha = 0.5".into()));
        }
        if (f0 - fh).abs() < FLAT_TOL && (f1 - fh).abs() < FLAT_TOL {
            return Ok(Some(ChernoffResult {
                alpha_star: 0.5,
                d_c_w: -fh,
                boundary: Boundary::Flat,
                solver: Solver::ClosedForm,
                iterations: 0,
                residual: 0.0,
                derivative: 0.0,
            }));
        }
        if !(f0.is_finite() || f1.is_finite()) {
            return Err(Error::Divergent("affinity is infinite at both end points".into()));
        }
        Ok(None)
    }

    fn at(&self, alpha: f64, boundary: Boundary, solver: Solver, iterations: usize) -> Result<ChernoffResult> {
        let f = self.log_rho(alpha)?;
        let derivative = self.derivative(alpha).unwrap_or(f64::NAN);
        Ok(ChernoffResult {
            alpha_star: alpha,
            d_c_w: -f,
            boundary,
            solver,
            iterations,
            residual: if boundary == Boundary::Interior {
                derivative.abs()
            } else {
                0.0
            },
            derivative,
        })
    }

    /// Maximise `D^w_{B,α}` over `[0, 1]` without closed-form shortcuts.
    ///
    /// Bisection on the monotone `F′`; golden-section search on `F` when the
    /// derivative cannot be evaluated.
    pub fn maximise(&self) -> Result<ChernoffResult> {
        if let Some(flat) = self.flat()? {
            return Ok(flat);
        }
        let slope = |a: f64, if_infinite: f64| -> Result<f64> {
            if self.log_rho(a)?.is_finite() {
                self.derivative(a)
            } else {
                Ok(if_infinite)
            }
        };
        match (slope(0.0, f64::NEG_INFINITY), slope(1.0, f64::INFINITY)) {
            (Ok(d0), _) if d0 >= 0.0 => self.at(0.0, Boundary::AtZero, Solver::Bisection, 0),
            (_, Ok(d1)) if d1 <= 0.0 => self.at(1.0, Boundary::AtOne, Solver::Bisection, 0),
            (Ok(_), Ok(_)) => match self.bisect() {
                Ok(r) => Ok(r),
                Err(e) if e.is_numerical() || matches!(e, Error::Divergent(_)) => self.golden(),
                Err(e) => Err(e),
            },
            _ => self.golden(),
        }
    }

    fn bisect(&self) -> Result<ChernoffResult> {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut mid = 0.5;
        for it in 1..=MAX_ITERATIONS {
            mid = 0.5 * (lo + hi);
            let d = self.derivative(mid)?;
            if d.abs() <= DERIVATIVE_TOL || hi - lo <= 4.0 * f64::EPSILON {
                return self.at(mid, Boundary::Interior, Solver::Bisection, it);
            }
            if d < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::NonConvergence(format!(
            "bisection on the affinity derivative stopped at alpha = {mid}"
        )))
    }

    fn golden(&self) -> Result<ChernoffResult> {
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let f = |a: f64| self.log_rho(a);
        let (mut a, mut b) = (0.0f64, 1.0f64);
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut fc, mut fd) = (f(c)?, f(d)?);
        let mut iterations = 0;
        while b - a > 1e-10 && iterations < MAX_ITERATIONS {
            iterations += 1;
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = f(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = f(d)?;
            }
        }
        let x = 0.5 * (a + b);
        let fx = f(x)?;
        let (f0, f1) = (f(0.0)?, f(1.0)?);
        if f0 <= fx && f0 <= f1 {
            self.at(0.0, Boundary::AtZero, Solver::GoldenSection, iterations)
        } else if f1 <= fx {
            self.at(1.0, Boundary::AtOne, Solver::GoldenSection, iterations)
        } else {
            let mut r = self.at(x, Boundary::Interior, Solver::GoldenSection, iterations)?;
            if !r.derivative.is_finite() {
                r.residual = 0.0;
            }
            Ok(r)
        }
    }
}

/// `ρ^w_α(p, q)`.
pub fn rho_w(p: &Model, q: &Model, weight: &Weight, alpha: f64) -> Result<f64> {
    AffinityCurve::new(p, q, weight)?.rho(alpha)
}

/// `D^w_{B,α} = −ln ρ^w_α`; may be negative under a non-constant weight.
pub fn weighted_bhattacharyya(p: &Model, q: &Model, weight: &Weight, alpha: f64) -> Result<f64> {
    Ok(-AffinityCurve::new(p, q, weight)?.log_rho(alpha)?)
}

/// Weighted Chernoff information and its maximiser.
///
/// Uses the closed-form stationary point `α̃` projected onto `[0, 1]`
/// when one is known (common-covariance Gaussians, Poisson, exponential,
/// Cauchy under the constant weight) and [`AffinityCurve::maximise`]
/// otherwise.
pub fn chernoff(p: &Model, q: &Model, weight: &Weight) -> Result<ChernoffResult> {
    let curve = AffinityCurve::new(p, q, weight)?;
    if let (Model::Cauchy { .. }, Model::Cauchy { .. }) = (p, q) {
        if p == q {
            return curve
                .flat()?
                .ok_or_else(|| Error::NonConvergence("identical laws".into()));
        }
        let rho = cauchy_bhattacharyya_half(p, q, weight)?;
        let derivative = curve.derivative(0.5).unwrap_or(0.0);
        return Ok(ChernoffResult {
            alpha_star: 0.5,
            d_c_w: -rho.ln(),
            boundary: Boundary::Interior,
            solver: Solver::ClosedForm,
            iterations: 0,
            residual: derivative.abs(),
            derivative,
        });
    }
    match closed::alpha_tilde(p, q, weight) {
        Some(None) => Ok(curve.flat()?.unwrap_or(ChernoffResult {
            alpha_star: 0.5,
            d_c_w: -curve.log_rho(0.5)?,
            boundary: Boundary::Flat,
            solver: Solver::ClosedForm,
            iterations: 0,
            residual: 0.0,
            derivative: 0.0,
        })),
        Some(Some(a)) => {
            if let Some(flat) = curve.flat()? {
                return Ok(flat);
            }
            if a <= 0.0 {
                curve.at(0.0, Boundary::AtZero, Solver::ClosedForm, 0)
            } else if a >= 1.0 {
                curve.at(1.0, Boundary::AtOne, Solver::ClosedForm, 0)
            } else {
                curve.at(a, Boundary::Interior, Solver::ClosedForm, 0)
            }
        }
        None => curve.maximise(),
    }
}

/// [`chernoff`] computed purely numerically: quadrature or summation for
/// the curve and the generic maximiser for `α*`.
pub fn chernoff_numeric(p: &Model, q: &Model, weight: &Weight) -> Result<ChernoffResult> {
    let mode = if p.sample_space().is_discrete() {
        EvalMode::Summation
    } else {
        EvalMode::Quadrature
    };
    AffinityCurve::with_mode(p, q, weight, mode)?.maximise()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson(l: f64) -> Model {
        Model::poisson(l).unwrap()
    }
    fn expo(r: f64) -> Model {
        Model::exponential(r).unwrap()
    }
    fn normal(m: f64, v: f64) -> Model {
        Model::normal(m, v).unwrap()
    }

    /// Dense-grid maximiser of `−F`, independent of every solver here.
    fn grid_oracle(curve: &AffinityCurve, points: usize) -> (f64, f64) {
        (0..=points)
            .map(|i| {
                let a = i as f64 / points as f64;
                (a, -curve.log_rho(a).unwrap())
            })
            .fold(
                (0.0, f64::NEG_INFINITY),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            )
    }

    #[test]
    fn identical_models_have_unit_affinity() {
        for m in [normal(1.0, 2.0), poisson(3.0), expo(0.5)] {
            for a in [0.0, 0.3, 1.0] {
                assert!((rho_w(&m, &m, &Weight::Const, a).unwrap() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rho_examples() {
        let g = rho_w(&normal(1.0, 1.0), &normal(0.0, 1.0), &Weight::tilt(0.25).unwrap(), 0.25).unwrap();
        assert!((g - 1.0).abs() < 1e-14);
        let p = rho_w(&poisson(2.0), &poisson(1.0), &Weight::Const, 0.5).unwrap();
        assert!((p - (-1.5 + 2f64.sqrt()).exp()).abs() < 1e-14);
        let p_sum = AffinityCurve::with_mode(&poisson(2.0), &poisson(1.0), &Weight::Const, EvalMode::Summation)
            .unwrap()
            .rho(0.5)
            .unwrap();
        assert!((p_sum - p).abs() < 1e-12);
    }

    #[test]
    fn bhattacharyya_examples() {
        let e = weighted_bhattacharyya(&expo(2.0), &expo(1.0), &Weight::tilt(0.5).unwrap(), 0.942_695).unwrap();
        // alpha is the stationary point rounded to six digits
        assert!((e + 0.286_912).abs() < 1e-5, "{e}");
        let g = weighted_bhattacharyya(&normal(1.0, 1.0), &normal(0.0, 1.0), &Weight::Const, 0.5).unwrap();
        assert!((g - 0.125).abs() < 1e-15);
    }

    #[test]
    fn poisson_chernoff_matches_grid() {
        let c = chernoff(&poisson(2.0), &poisson(1.0), &Weight::Const).unwrap();
        assert_eq!(c.boundary, Boundary::Interior);
        assert!((c.alpha_star - 0.528_766_372_9).abs() < 1e-9);
        assert!((c.d_c_w - 0.086_071_332_1).abs() < 1e-9);
        assert!(c.residual < 1e-12);
        let curve = AffinityCurve::new(&poisson(2.0), &poisson(1.0), &Weight::Const).unwrap();
        let (_, best) = grid_oracle(&curve, 100_000);
        assert!((best - c.d_c_w).abs() < 1e-9);
    }

    #[test]
    fn boundary_cases() {
        let c = chernoff(&expo(2.0), &expo(1.0), &Weight::tilt(1.0).unwrap()).unwrap();
        assert_eq!(c.boundary, Boundary::AtOne);
        assert!((c.d_c_w + 2f64.ln()).abs() < 1e-14);
        assert!(c.derivative < 0.0);
        let c = chernoff(&poisson(2.0), &poisson(1.0), &Weight::tilt(2f64.ln()).unwrap()).unwrap();
        assert_eq!(c.boundary, Boundary::AtZero);
        assert!((c.d_c_w + 1.0).abs() < 1e-14);
        assert!(c.derivative > 0.0);
    }

    #[test]
    fn generic_solver_agrees_with_closed_forms() {
        let cases = [
            (poisson(2.0), poisson(1.0), Weight::Const),
            (poisson(2.0), poisson(1.0), Weight::tilt(0.25).unwrap()),
            (poisson(2.0), poisson(1.0), Weight::tilt(2f64.ln()).unwrap()),
            (expo(2.0), expo(1.0), Weight::tilt(0.5).unwrap()),
            (expo(2.0), expo(1.0), Weight::tilt(1.0).unwrap()),
            (normal(1.0, 1.0), normal(0.0, 1.0), Weight::tilt(0.25).unwrap()),
            (normal(1.0, 1.0), normal(0.0, 1.0), Weight::tilt(-0.25).unwrap()),
        ];
        for (p, q, w) in cases {
            let closed = chernoff(&p, &q, &w).unwrap();
            let generic = chernoff_numeric(&p, &q, &w).unwrap();
            assert_eq!(closed.boundary, generic.boundary, "{p:?} {q:?} {w:?}");
            assert!(
                (closed.alpha_star - generic.alpha_star).abs() < 1e-8,
                "{closed:?} vs {generic:?}"
            );
            assert!((closed.d_c_w - generic.d_c_w).abs() < 1e-8);
        }
    }

    #[test]
    fn flat_pairs() {
        let c = chernoff(&poisson(2.0), &poisson(2.0), &Weight::tilt(0.3).unwrap()).unwrap();
        assert_eq!(c.boundary, Boundary::Flat);
        assert_eq!(c.alpha_star, 0.5);
        let cat = Model::categorical(vec![0.3, 0.7]).unwrap();
        assert_eq!(chernoff(&cat, &cat, &Weight::Const).unwrap().boundary, Boundary::Flat);
    }

    #[test]
    fn unequal_gaussian_covariances_use_the_generic_path() {
        let p = normal(0.0, 1.0);
        let q = normal(1.0, 4.0);
        let c = chernoff(&p, &q, &Weight::tilt(0.2).unwrap()).unwrap();
        assert_eq!(c.solver, Solver::Bisection);
        let n = chernoff_numeric(&p, &q, &Weight::tilt(0.2).unwrap()).unwrap();
        assert!((c.alpha_star - n.alpha_star).abs() < 1e-7);
        assert!((c.d_c_w - n.d_c_w).abs() < 1e-9);
    }

    #[test]
    fn cauchy_chernoff_is_at_one_half() {
        let p = Model::cauchy(0.0, 1.0).unwrap();
        let q = Model::cauchy(2.0, 1.0).unwrap();
        let c = chernoff(&p, &q, &Weight::Const).unwrap();
        assert!((c.d_c_w - 0.180_770_550_217_863).abs() < 1e-12);
        assert!(c.residual < 1e-8);
        let curve = AffinityCurve::new(&p, &q, &Weight::Const).unwrap();
        let quad_half = -curve.log_rho(0.5).unwrap();
        assert!((quad_half - c.d_c_w).abs() < 1e-8);
    }

    #[test]
    fn categorical_zero_masses() {
        let p = Model::categorical(vec![0.5, 0.5, 0.0]).unwrap();
        let q = Model::categorical(vec![0.2, 0.3, 0.5]).unwrap();
        let curve = AffinityCurve::new(&p, &q, &Weight::Const).unwrap();
        assert!((curve.rho(0.0).unwrap() - 1.0).abs() < 1e-15);
        let inner = curve.rho(0.5).unwrap();
        assert!((inner - (0.1f64.sqrt() + 0.15f64.sqrt())).abs() < 1e-15);
        assert_eq!(curve.log_rho_any(-0.5).unwrap(), f64::INFINITY);
    }

    #[test]
    fn exponential_boundary_tilt_is_infinite_at_zero() {
        let curve = AffinityCurve::new(&expo(2.0), &expo(1.0), &Weight::tilt(1.0).unwrap()).unwrap();
        assert_eq!(curve.log_rho(0.0).unwrap(), f64::INFINITY);
        assert!(curve.log_rho(0.5).unwrap().is_finite());
    }

    #[test]
    fn modes_are_checked() {
        let p = poisson(1.0);
        assert!(AffinityCurve::with_mode(&p, &p, &Weight::Const, EvalMode::Quadrature).is_err());
        let c = Model::cauchy(0.0, 1.0).unwrap();
        assert!(AffinityCurve::with_mode(&c, &c, &Weight::Const, EvalMode::ClosedForm).is_err());
        assert!(rho_w(&p, &p, &Weight::Const, 1.5).is_err());
    }
}
