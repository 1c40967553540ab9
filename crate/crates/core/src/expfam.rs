//! One-parameter exponential families under an exponential tilt.
//!
//! A member is `p_θ(x) = exp{θ t(x) − F(θ) + k(x)}`. Against a weight
//! `φ(x) = e^{γ t(x)}` the weighted normaliser is `E_φ(θ) = e^{F̂(θ) − F(θ)}`
//! with the tilted log-normaliser `F̂(θ) = F(θ + γ)`.
//!
//! | family          | `θ`      | `F(θ)`       | `F*(η)`        |
//! |-----------------|----------|--------------|----------------|
//! | Poisson         | `ln λ`   | `e^θ`        | `η ln η − η`   |
//! | exponential     | `−λ`     | `−ln(−θ)`    | `−1 − ln η`    |
//! | Gaussian, `σ²` fixed | `μ/σ²` | `σ²θ²/2` | `η²/(2σ²)`     |

use crate::affinity::{self, cauchy_kl, AffinityCurve, Boundary, ChernoffResult};
use crate::error::{Error, Result};
use crate::models::{poisson_truncation, weighted_normaliser, Model, Point, SampleSpace, TiltedDensity, Weight};
use crate::quad::{self, Range};
use crate::rng::pairwise_sum;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// Default pass threshold of [`verify_identities`].
pub const IDENTITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltIn {
    Poisson,
    Exponential,
    GaussianMean { variance: f64 },
}

/// How `F̂′` and its inverse `Ĝ` are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gradient {
    #[default]
    Analytic,
    /// Central differences with step `1e-6·max(1, |θ|)`; `Ĝ` by bisection.
    CentralDifference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFamily1D {
    kind: BuiltIn,
    gamma: f64,
    gradient: Gradient,
}

fn scalar_gamma(weight: &Weight) -> Result<f64> {
    weight
        .scalar_tilt()
        .ok_or_else(|| Error::Unsupported("exponential families need a constant or scalar exponential weight".into()))
}

impl ExpFamily1D {
    pub fn new(kind: BuiltIn, weight: &Weight) -> Result<Self> {
        if let BuiltIn::GaussianMean { variance } = kind {
            if !(variance > 0.0 && variance.is_finite()) {
                return Err(Error::InvalidModel(format!(
                    "variance must be positive, got {variance}"
                )));
            }
        }
        Ok(ExpFamily1D {
            kind,
            gamma: scalar_gamma(weight)?,
            gradient: Gradient::Analytic,
        })
    }

    pub fn with_gradient(mut self, gradient: Gradient) -> Self {
        self.gradient = gradient;
        self
    }

    pub fn kind(&self) -> BuiltIn {
        self.kind
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Embed a same-family pair, returning the family and `(θ₁, θ₂)`.
    pub fn embed(p: &Model, q: &Model, weight: &Weight) -> Result<(Self, f64, f64)> {
        let kind = match (p, q) {
            (Model::Poisson { .. }, Model::Poisson { .. }) => BuiltIn::Poisson,
            (Model::Exponential { .. }, Model::Exponential { .. }) => BuiltIn::Exponential,
            (Model::Gaussian(a), Model::Gaussian(b)) if a.dim() == 1 && a.cov()[(0, 0)] == b.cov()[(0, 0)] => {
                BuiltIn::GaussianMean {
                    variance: a.cov()[(0, 0)],
                }
            }
            _ => {
                return Err(Error::Unsupported(format!(
                    "{:?} vs {:?} is not a pair in one built-in exponential family",
                    p.family(),
                    q.family()
                )))
            }
        };
        let fam = ExpFamily1D::new(kind, weight)?;
        Ok((fam, fam.theta_of(p)?, fam.theta_of(q)?))
    }

    /// Natural parameter of a model of this family.
    pub fn theta_of(&self, m: &Model) -> Result<f64> {
        match (self.kind, m) {
            (BuiltIn::Poisson, Model::Poisson { lambda }) => Ok(lambda.ln()),
            (BuiltIn::Exponential, Model::Exponential { rate }) => Ok(-rate),
            (BuiltIn::GaussianMean { variance }, Model::Gaussian(g)) if g.dim() == 1 => Ok(g.mean()[0] / variance),
            _ => Err(Error::Unsupported(format!(
                "{:?} is not in {:?}",
                m.family(),
                self.kind
            ))),
        }
    }

    /// The member `p_θ`.
    pub fn model(&self, theta: f64) -> Result<Model> {
        self.check(theta)?;
        match self.kind {
            BuiltIn::Poisson => Model::poisson(theta.exp()),
            BuiltIn::Exponential => Model::exponential(-theta),
            BuiltIn::GaussianMean { variance } => Model::normal(variance * theta, variance),
        }
    }

    /// Open interval of `θ` on which both `F` and `F̂` are finite.
    pub fn domain(&self) -> (f64, f64) {
        match self.kind {
            BuiltIn::Exponential => (f64::NEG_INFINITY, 0f64.min(-self.gamma)),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn check(&self, theta: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if theta.is_finite() && theta > lo && theta < hi {
            Ok(())
        } else {
            Err(Error::Domain(format!("theta = {theta} outside ({lo}, {hi})")))
        }
    }

    fn f_raw(&self, theta: f64) -> f64 {
        match self.kind {
            BuiltIn::Poisson => theta.exp(),
            BuiltIn::Exponential => -(-theta).ln(),
            BuiltIn::GaussianMean { variance } => 0.5 * variance * theta * theta,
        }
    }

    fn grad_raw(&self, theta: f64) -> f64 {
        match self.kind {
            BuiltIn::Poisson => theta.exp(),
            BuiltIn::Exponential => -1.0 / theta,
            BuiltIn::GaussianMean { variance } => variance * theta,
        }
    }

    /// `F(θ)`.
    pub fn log_normaliser(&self, theta: f64) -> Result<f64> {
        self.check(theta)?;
        Ok(self.f_raw(theta))
    }

    /// `F̂(θ) = F(θ + γ)`.
    pub fn tilted_log_normaliser(&self, theta: f64) -> Result<f64> {
        self.check(theta)?;
        Ok(self.f_raw(theta + self.gamma))
    }

    /// `E_φ(θ) = e^{F̂(θ) − F(θ)}`.
    pub fn e_phi(&self, theta: f64) -> Result<f64> {
        Ok((self.tilted_log_normaliser(theta)? - self.log_normaliser(theta)?).exp())
    }

    /// `F′(θ)`, the mean of `t` under `p_θ`.
    pub fn grad(&self, theta: f64) -> Result<f64> {
        self.check(theta)?;
        Ok(self.grad_raw(theta))
    }

    /// `F̂′(θ)`, the mean of `t` under the tilted `p*_θ`.
    pub fn grad_tilted(&self, theta: f64) -> Result<f64> {
        self.check(theta)?;
        match self.gradient {
            Gradient::Analytic => Ok(self.grad_raw(theta + self.gamma)),
            Gradient::CentralDifference => {
                let h = 1e-6 * theta.abs().max(1.0);
                let up = self.tilted_log_normaliser(theta + h)?;
                let down = self.tilted_log_normaliser(theta - h)?;
                Ok((up - down) / (2.0 * h))
            }
        }
    }

    /// `Ĝ = (F̂′)⁻¹`.
    pub fn inverse_grad_tilted(&self, y: f64) -> Result<f64> {
        match self.gradient {
            Gradient::Analytic => {
                let theta = match self.kind {
                    BuiltIn::Poisson if y > 0.0 => y.ln() - self.gamma,
                    BuiltIn::Exponential if y > 0.0 => -1.0 / y - self.gamma,
                    BuiltIn::GaussianMean { variance } => y / variance - self.gamma,
                    _ => return Err(Error::Domain(format!("{y} is not a tilted mean of {:?}", self.kind))),
                };
                self.check(theta)?;
                Ok(theta)
            }
            Gradient::CentralDifference => self.bisect_inverse(y),
        }
    }

    /// Monotone bisection for `F̂′(θ) = y` to width `1e-12·max(1, |θ|)`.
    fn bisect_inverse(&self, y: f64) -> Result<f64> {
        let (lo_dom, hi_dom) = self.domain();
        let inside = |t: f64| t.max(lo_dom).min(hi_dom);
        let step_down = |t: f64, s: f64| if lo_dom.is_finite() { 0.5 * (t + lo_dom) } else { t - s };
        let step_up = |t: f64, s: f64| if hi_dom.is_finite() { 0.5 * (t + hi_dom) } else { t + s };
        let start = if hi_dom.is_finite() { hi_dom - 1.0 } else { 0.0 };
        let (mut lo, mut hi) = (inside(start - 1.0), inside(start));
        let mut s = 1.0;
        for _ in 0..400 {
            if self.grad_tilted(lo)? <= y {
                break;
            }
            lo = step_down(lo, s);
            s *= 2.0;
        }
        s = 1.0;
        for _ in 0..400 {
            if self.grad_tilted(hi)? >= y {
                break;
            }
            hi = step_up(hi, s);
            s *= 2.0;
        }
        if !(self.grad_tilted(lo)? <= y && self.grad_tilted(hi)? >= y) {
            return Err(Error::Domain(format!("{y} is not a tilted mean of {:?}", self.kind)));
        }
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-12 * mid.abs().max(1.0) {
                break;
            }
            if self.grad_tilted(mid)? < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Legendre conjugate `F*(η)`.
    pub fn conjugate(&self, eta: f64) -> Result<f64> {
        match self.kind {
            BuiltIn::Poisson if eta > 0.0 => Ok(eta * eta.ln() - eta),
            BuiltIn::Exponential if eta > 0.0 => Ok(-1.0 - eta.ln()),
            BuiltIn::GaussianMean { variance } => Ok(eta * eta / (2.0 * variance)),
            _ => Err(Error::Domain(format!("eta = {eta} outside the mean domain"))),
        }
    }

    /// `∇F*(η) = (F′)⁻¹(η)`.
    pub fn grad_conjugate(&self, eta: f64) -> Result<f64> {
        match self.kind {
            BuiltIn::Poisson if eta > 0.0 => Ok(eta.ln()),
            BuiltIn::Exponential if eta > 0.0 => Ok(-1.0 / eta),
            BuiltIn::GaussianMean { variance } => Ok(eta / variance),
            _ => Err(Error::Domain(format!("eta = {eta} outside the mean domain"))),
        }
    }

    /// `F̂*(η) = F*(η) + ln E_φ(∇F*(η))`, following the convention
    /// `E_φ(η) := E_φ(θ)` for `θ = ∇F*(η)`.
    pub fn tilted_conjugate(&self, eta: f64) -> Result<f64> {
        let theta = self.grad_conjugate(eta)?;
        Ok(self.conjugate(eta)? + self.e_phi(theta)?.ln())
    }
}

/// `B^w_{φ,F}(θ₁, θ₂) = E_φ(θ₂)·[F(θ₁) − F(θ₂) − (θ₁ − θ₂) F̂′(θ₂)]`.
pub fn weighted_bregman(family: &ExpFamily1D, theta1: f64, theta2: f64) -> Result<f64> {
    let gap = family.log_normaliser(theta1)?
        - family.log_normaliser(theta2)?
        - (theta1 - theta2) * family.grad_tilted(theta2)?;
    Ok(family.e_phi(theta2)? * gap)
}

/// Unweighted `B_F(θ₁, θ₂) = F(θ₁) − F(θ₂) − (θ₁ − θ₂) F′(θ₂)`.
pub fn bregman(family: &ExpFamily1D, theta1: f64, theta2: f64) -> Result<f64> {
    Ok(family.log_normaliser(theta1)? - family.log_normaliser(theta2)? - (theta1 - theta2) * family.grad(theta2)?)
}

/// Weighted Bregman divergence generated by `F*` with `F̂*` in place of `F̂`,
/// `E_φ(η₂)·[F*(η₁) − F*(η₂) − (η₁ − η₂) F̂*′(η₂)]`.
fn weighted_bregman_dual(family: &ExpFamily1D, eta1: f64, eta2: f64) -> Result<f64> {
    let h = 1e-6 * eta2.abs().max(1.0);
    let slope = (family.tilted_conjugate(eta2 + h)? - family.tilted_conjugate(eta2 - h)?) / (2.0 * h);
    let gap = family.conjugate(eta1)? - family.conjugate(eta2)? - (eta1 - eta2) * slope;
    Ok(family.e_phi(family.grad_conjugate(eta2)?)? * gap)
}

/// `D^w_KL(p ‖ q) = ∫ φ p ln(p/q) dμ`.
///
/// Closed form for same-family pairs (`E_φ(p)` times the mean of `ln p/q`
/// under the tilted `p*`, which stays in the family), finite sums for
/// categorical pairs and quadrature otherwise.
pub fn weighted_kl(p: &Model, q: &Model, weight: &Weight) -> Result<f64> {
    weight.check_model(p)?;
    weight.check_pair(p, q)?;
    if p == q {
        return Ok(0.0);
    }
    let e_p = || weighted_normaliser(p, weight);
    match (p, q) {
        (Model::Poisson { lambda: l1 }, Model::Poisson { lambda: l2 }) => {
            let g = weight.scalar_tilt().unwrap_or(0.0);
            Ok(e_p()? * (g.exp() * l1 * (l1 / l2).ln() - l1 + l2))
        }
        (Model::Exponential { rate: l1 }, Model::Exponential { rate: l2 }) => {
            let g = weight.scalar_tilt().unwrap_or(0.0);
            Ok(e_p()? * ((l1 / l2).ln() - (l1 - l2) / (l1 - g)))
        }
        (Model::Gaussian(a), Model::Gaussian(b)) => {
            let gamma = match weight {
                Weight::ExpTilt(g) => DVector::from_column_slice(g),
                _ => DVector::zeros(a.dim()),
            };
            let m = a.mean() + a.cov() * gamma;
            let d1 = &m - a.mean();
            let d2 = &m - b.mean();
            let tr = |prec: &nalgebra::DMatrix<f64>| (prec * a.cov()).trace();
            let e_quad_a = tr(a.precision()) + d1.dot(&(a.precision() * &d1));
            let e_quad_b = tr(b.precision()) + d2.dot(&(b.precision() * &d2));
            Ok(e_p()? * (0.5 * (b.log_det() - a.log_det()) - 0.5 * e_quad_a + 0.5 * e_quad_b))
        }
        (Model::Cauchy { .. }, Model::Cauchy { .. }) => cauchy_kl(p, q),
        (Model::Categorical { .. }, Model::Categorical { .. }) => weighted_kl_numeric(p, q, weight),
        _ => weighted_kl_numeric(p, q, weight),
    }
}

/// [`weighted_kl`] by summation or quadrature only.
pub fn weighted_kl_numeric(p: &Model, q: &Model, weight: &Weight) -> Result<f64> {
    weight.check_model(p)?;
    weight.check_pair(p, q)?;
    let g = weight.scalar_tilt().unwrap_or(0.0);
    match p.sample_space() {
        SampleSpace::Finite(m) => {
            let mut terms = Vec::with_capacity(m);
            for k in 0..m as u64 {
                let lp = p.ln_mass(k);
                let lw = weight.ln_value(&Point::Count(k))?;
                if lp == f64::NEG_INFINITY || lw == f64::NEG_INFINITY {
                    continue;
                }
                let lq = q.ln_mass(k);
                if lq == f64::NEG_INFINITY {
                    return Err(Error::Divergent(format!(
                        "weighted KL is infinite: q vanishes at {k} where p does not"
                    )));
                }
                terms.push((lw + lp).exp() * (lp - lq));
            }
            Ok(pairwise_sum(&terms))
        }
        SampleSpace::Counts => {
            let (Model::Poisson { lambda }, Model::Poisson { lambda: l2 }) = (p, q) else {
                unreachable!("counts are Poisson only")
            };
            let upper = poisson_truncation((lambda * g.exp()).max(*lambda).max(*l2));
            let terms: Vec<f64> = (0..=upper)
                .map(|k| (g * k as f64 + p.ln_mass(k)).exp() * (p.ln_mass(k) - q.ln_mass(k)))
                .collect();
            Ok(pairwise_sum(&terms))
        }
        SampleSpace::Euclidean(1) | SampleSpace::HalfLine => {
            let f = |x: f64| {
                let lp = p.ln_pdf(x);
                if lp == f64::NEG_INFINITY {
                    0.0
                } else {
                    (weight.ln_scalar(x) + lp).exp() * (lp - q.ln_pdf(x))
                }
            };
            let (center, scale) = p.placement();
            let range = match p {
                Model::Exponential { rate } => Range::HalfLine {
                    lower: 0.0,
                    scale: 1.0 / (rate - g),
                },
                Model::Gaussian(_) => Range::RealLine {
                    center: center + g * scale * scale,
                    scale,
                },
                _ => Range::RealLine { center, scale },
            };
            Ok(quad::integrate(f, range)?.value)
        }
        SampleSpace::Euclidean(d) => Err(Error::Unsupported(format!("numeric weighted KL in dimension {d}"))),
    }
}

/// The exponential arc `(pq)_α ∝ φ p^α q^{1−α}` joining the tilted
/// hypotheses `r₀ = φq/E_φ(q)` and `r₁ = φp/E_φ(p)`.
#[derive(Debug, Clone)]
pub struct ChernoffArc {
    curve: AffinityCurve,
}

impl ChernoffArc {
    pub fn new(curve: AffinityCurve) -> Self {
        ChernoffArc { curve }
    }

    pub fn curve(&self) -> &AffinityCurve {
        &self.curve
    }

    pub fn log_density(&self, alpha: f64, x: &Point) -> Result<f64> {
        self.curve.log_arc_density(alpha, x)
    }

    /// `r₁ = φ p / E_φ(p)`.
    pub fn r1(&self) -> Result<TiltedDensity> {
        TiltedDensity::new(self.curve.p().clone(), self.curve.weight().clone())
    }

    /// `r₀ = φ q / E_φ(q)`.
    pub fn r0(&self) -> Result<TiltedDensity> {
        TiltedDensity::new(self.curve.q().clone(), self.curve.weight().clone())
    }
}

/// `F′_pq(α) = E_{(pq)_α}[ln p/q]`.
pub fn chernoff_arc_derivative(curve: &AffinityCurve, alpha: f64) -> Result<f64> {
    curve.derivative(alpha)
}

/// `e = d₁/d₂` with `dᵢ = −ln ρᵢ`: how many observations of the first
/// experiment match one of the second.
pub fn chernoff_efficiency(d1: f64, d2: f64) -> Result<f64> {
    if d2 == 0.0 || !d2.is_finite() || !d1.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "efficiency needs finite d1 and non-zero finite d2, got ({d1}, {d2})"
        )));
    }
    Ok(d1 / d2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityStatus {
    Passed,
    Failed,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub id: String,
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub status: IdentityStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub theta1: f64,
    pub theta2: f64,
    pub alpha_star: f64,
    pub boundary: Boundary,
    pub tolerance: f64,
    pub rows: Vec<IdentityRow>,
}

impl IdentityReport {
    /// True when no applicable identity failed.
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.status != IdentityStatus::Failed)
    }

    pub fn row(&self, id: &str) -> Option<&IdentityRow> {
        self.rows.iter().find(|r| r.id == id)
    }
}

struct Rows {
    tol: f64,
    rows: Vec<IdentityRow>,
}

impl Rows {
    fn push(&mut self, id: &str, name: &str, lhs: f64, rhs: f64) {
        let residual = (lhs - rhs).abs();
        let ok = residual <= self.tol * (1.0 + lhs.abs().max(rhs.abs()));
        self.rows.push(IdentityRow {
            id: id.into(),
            name: name.into(),
            lhs,
            rhs,
            residual,
            status: if ok {
                IdentityStatus::Passed
            } else {
                IdentityStatus::Failed
            },
        });
    }

    fn skip(&mut self, id: &str, name: &str) {
        self.rows.push(IdentityRow {
            id: id.into(),
            name: name.into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            residual: f64::NAN,
            status: IdentityStatus::NotApplicable,
        });
    }
}

/// `D_KL(r_α ‖ end)` between the normalised arc member and a tilted
/// endpoint, by direct summation or quadrature of the two log-densities.
fn arc_kl(arc: &ChernoffArc, fam: &ExpFamily1D, theta_alpha: f64, alpha: f64, end: &TiltedDensity) -> Result<f64> {
    let tilted_mean = fam.grad_raw(theta_alpha + fam.gamma);
    match fam.kind {
        BuiltIn::Poisson => {
            let upper = poisson_truncation(tilted_mean.max(end.base().placement().0 * fam.gamma.exp()));
            let mut terms = Vec::with_capacity(upper as usize + 1);
            for k in 0..=upper {
                let x = Point::Count(k);
                let la = arc.log_density(alpha, &x)?;
                terms.push(la.exp() * (la - end.log_density(&x)?));
            }
            Ok(pairwise_sum(&terms))
        }
        BuiltIn::Exponential | BuiltIn::GaussianMean { .. } => {
            let range = match fam.kind {
                BuiltIn::Exponential => Range::HalfLine {
                    lower: 0.0,
                    scale: tilted_mean,
                },
                BuiltIn::GaussianMean { variance } => Range::RealLine {
                    center: tilted_mean,
                    scale: variance.sqrt(),
                },
                BuiltIn::Poisson => unreachable!(),
            };
            let f = |x: f64| {
                let pt = Point::Real(x);
                match (arc.log_density(alpha, &pt), end.log_density(&pt)) {
                    (Ok(la), Ok(le)) if la > f64::NEG_INFINITY => la.exp() * (la - le),
                    _ => 0.0,
                }
            };
            Ok(quad::integrate(f, range)?.value)
        }
    }
}

/// Numerical check of the exponential-family identities for a same-family
/// pair `p = p_{θ₁}`, `q = p_{θ₂}`:
///
/// * (i) `D^w_KL(p_{θ₁} ‖ p_{θ₂}) = B^w_{φ,F}(θ₂, θ₁)`
/// * (ii) `B^w_{φ,F}(θ₁, θ_{α*}) = B^w_{φ,F}(θ₂, θ_{α*})`
/// * (iii) `D^w_C = D_KL(r_{α*} ‖ r₁) − ln E_φ(p) = D_KL(r_{α*} ‖ r₀) − ln E_φ(q)`
/// * (iv) `D^w_C = B_{F_pq}(1, α*) − ln E_φ(p) = B_{F_pq}(0, α*) − ln E_φ(q)`
/// * (v) `α* = [Ĝ((F(θ₁) − F(θ₂))/(θ₁ − θ₂)) − θ₂] / (θ₁ − θ₂)`
/// * (vi) the weighted primal–dual identity
///   `B^w_{φ,F}(θ₁,θ₂) = B^w_{φ,F*}(θ₂*,θ₁*) − (θ₁−θ₂) ln E_φ(θ₂) + (θ₂*−θ₁*) ln E_φ(θ₁)`
///   and (vi.b) its classical form `B_F(θ₁,θ₂) = F(θ₁) + F*(θ₂*) − θ₁θ₂*`
/// * (vii) `D^w_{B,α} = U_{F,α}(θ₁, θ₂) − ln E_φ(θ_α)` at `α ∈ {¼, ½, ¾}`
///
/// (ii)–(v) need an interior `α*` and are reported as not applicable
/// otherwise.
pub fn verify_identities(p: &Model, q: &Model, weight: &Weight) -> Result<IdentityReport> {
    verify_identities_with(p, q, weight, IDENTITY_TOL)
}

pub fn verify_identities_with(p: &Model, q: &Model, weight: &Weight, tol: f64) -> Result<IdentityReport> {
    let (fam, t1, t2) = ExpFamily1D::embed(p, q, weight)?;
    fam.check(t1)?;
    fam.check(t2)?;
    let curve = AffinityCurve::new(p, q, weight)?;
    let chernoff: ChernoffResult = affinity::chernoff(p, q, weight)?;
    let a = chernoff.alpha_star;
    let ta = a * t1 + (1.0 - a) * t2;
    let ln_ep = weighted_normaliser(p, weight)?.ln();
    let ln_eq = weighted_normaliser(q, weight)?.ln();
    let interior = chernoff.boundary == Boundary::Interior;
    let mut rows = Rows { tol, rows: Vec::new() };

    rows.push(
        "i",
        "weighted KL as weighted Bregman",
        weighted_kl(p, q, weight)?,
        weighted_bregman(&fam, t2, t1)?,
    );

    if interior {
        rows.push(
            "ii",
            "Bregman bisector at alpha*",
            weighted_bregman(&fam, t1, ta)?,
            weighted_bregman(&fam, t2, ta)?,
        );
        let arc = ChernoffArc::new(curve.clone());
        let kl1 = arc_kl(&arc, &fam, ta, a, &arc.r1()?)?;
        let kl0 = arc_kl(&arc, &fam, ta, a, &arc.r0()?)?;
        rows.push("iii.a", "Chernoff-KL, p side", chernoff.d_c_w, kl1 - ln_ep);
        rows.push("iii.b", "Chernoff-KL, q side", chernoff.d_c_w, kl0 - ln_eq);
        let fa = curve.log_rho(a)?;
        let da = curve.derivative(a)?;
        let breg1 = curve.log_rho(1.0)? - fa - (1.0 - a) * da;
        let breg0 = curve.log_rho(0.0)? - fa - (0.0 - a) * da;
        rows.push("iv.a", "Bregman on the arc, p side", chernoff.d_c_w, breg1 - ln_ep);
        rows.push("iv.b", "Bregman on the arc, q side", chernoff.d_c_w, breg0 - ln_eq);
        let slope = (fam.log_normaliser(t1)? - fam.log_normaliser(t2)?) / (t1 - t2);
        let formula = (fam.inverse_grad_tilted(slope)? - t2) / (t1 - t2);
        rows.push("v", "one-parameter alpha* formula", formula, a);
    } else {
        for (id, name) in [
            ("ii", "Bregman bisector at alpha*"),
            ("iii.a", "Chernoff-KL, p side"),
            ("iii.b", "Chernoff-KL, q side"),
            ("iv.a", "Bregman on the arc, p side"),
            ("iv.b", "Bregman on the arc, q side"),
            ("v", "one-parameter alpha* formula"),
        ] {
            rows.skip(id, name);
        }
    }

    let (e1, e2) = (fam.grad(t1)?, fam.grad(t2)?);
    let dual = weighted_bregman_dual(&fam, e2, e1)? - (t1 - t2) * fam.e_phi(t2)?.ln() + (e2 - e1) * fam.e_phi(t1)?.ln();
    rows.push(
        "vi",
        "weighted primal-dual identity",
        weighted_bregman(&fam, t1, t2)?,
        dual,
    );
    rows.push(
        "vi.b",
        "classical Legendre form",
        bregman(&fam, t1, t2)?,
        fam.log_normaliser(t1)? + fam.conjugate(e2)? - t1 * e2,
    );

    for (id, alpha) in [("vii.25", 0.25), ("vii.50", 0.5), ("vii.75", 0.75)] {
        let tal = alpha * t1 + (1.0 - alpha) * t2;
        let jensen =
            alpha * fam.log_normaliser(t1)? + (1.0 - alpha) * fam.log_normaliser(t2)? - fam.log_normaliser(tal)?;
        rows.push(
            id,
            "Jensen decomposition",
            -curve.log_rho(alpha)?,
            jensen - fam.e_phi(tal)?.ln(),
        );
    }

    Ok(IdentityReport {
        theta1: t1,
        theta2: t2,
        alpha_star: a,
        boundary: chernoff.boundary,
        tolerance: tol,
        rows: rows.rows,
    })
}
