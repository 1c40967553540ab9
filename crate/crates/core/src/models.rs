//! Hypothesis distributions, context weights and their tilted versions.
//!
//! Each family carries a fixed reference measure: Lebesgue on ℝᵈ (Gaussian),
//! on `[0, ∞)` (exponential) and on ℝ (Cauchy); counting measure on ℕ₀
//! (Poisson) and on `{0, …, m−1}` (categorical).
//!
//! Weights factorise over observations, so a single-letter weight `φ(x)` is
//! all that is ever stored. `E_φ(p) = ∫ φ p dμ` is the weighted normaliser and
//! `p* = φ p / E_φ(p)` the tilted density.

use crate::error::{Error, Result};
use crate::quad::{self, Range};
use crate::special::ln_factorial;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest supported Gaussian dimension.
pub const MAX_GAUSSIAN_DIM: usize = 64;

/// A point of a model's sample space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Count(u64),
    Real(f64),
    Vector(Vec<f64>),
}

impl Point {
    fn scalar(&self) -> Option<f64> {
        match self {
            Point::Real(x) => Some(*x),
            Point::Vector(v) if v.len() == 1 => Some(v[0]),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    Poisson,
    Exponential,
    Cauchy,
    Categorical,
}

/// Sample spaces; two hypotheses must live on the same one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleSpace {
    Euclidean(usize),
    HalfLine,
    Counts,
    Finite(usize),
}

impl SampleSpace {
    pub fn is_discrete(self) -> bool {
        matches!(self, SampleSpace::Counts | SampleSpace::Finite(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    precision: DMatrix<f64>,
    chol_lower: DMatrix<f64>,
    log_det: f64,
}

impl Gaussian {
    pub fn new(mean: Vec<f64>, cov: Vec<Vec<f64>>) -> Result<Self> {
        let d = mean.len();
        if d == 0 || d > MAX_GAUSSIAN_DIM {
            return Err(Error::InvalidModel(format!(
                "gaussian dimension must be in 1..={MAX_GAUSSIAN_DIM}, got {d}"
            )));
        }
        if cov.len() != d || cov.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidModel(format!("gaussian covariance must be {d}x{d}")));
        }
        if mean.iter().chain(cov.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("gaussian parameters must be finite".into()));
        }
        let cov = DMatrix::from_fn(d, d, |i, j| cov[i][j]);
        for i in 0..d {
            for j in 0..i {
                let (a, b) = (cov[(i, j)], cov[(j, i)]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::InvalidModel("gaussian covariance is not symmetric".into()));
                }
            }
        }
        let chol = cov
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidModel("gaussian covariance is not positive definite".into()))?;
        let chol_lower = chol.l();
        let log_det = 2.0 * chol_lower.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let precision = chol.inverse();
        Ok(Gaussian {
            mean: DVector::from_vec(mean),
            cov,
            precision,
            chol_lower,
            log_det,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }
    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }
    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }
    /// `ln |Σ|`.
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let diff = DVector::from_column_slice(x) - &self.mean;
        let quad = diff.dot(&(&self.precision * &diff));
        -0.5 * (self.dim() as f64 * (2.0 * PI).ln() + self.log_det + quad)
    }
}

/// Parametric hypothesis distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelFields", into = "ModelRepr")]
pub enum Model {
    Gaussian(Gaussian),
    Poisson { lambda: f64 },
    Exponential { rate: f64 },
    Cauchy { location: f64, scale: f64 },
    Categorical { probs: Vec<f64> },
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
enum ModelRepr {
    Gaussian { mean: Vec<f64>, cov: Vec<Vec<f64>> },
    Poisson { lambda: f64 },
    Exponential { rate: f64 },
    Cauchy { location: f64, scale: f64 },
    Categorical { probs: Vec<f64> },
}

/// Flat mirror of the JSON schema, so that decoding errors point at a field.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFields {
    family: Family,
    mean: Option<Vec<f64>>,
    cov: Option<Vec<Vec<f64>>>,
    lambda: Option<f64>,
    rate: Option<f64>,
    location: Option<f64>,
    scale: Option<f64>,
    probs: Option<Vec<f64>>,
}

fn field<T>(family: &str, name: &str, v: Option<T>) -> Result<T> {
    v.ok_or_else(|| Error::InvalidModel(format!("{family} needs `{name}`")))
}

impl TryFrom<ModelFields> for Model {
    type Error = Error;
    fn try_from(f: ModelFields) -> Result<Model> {
        let present = [
            ("mean", f.mean.is_some()),
            ("cov", f.cov.is_some()),
            ("lambda", f.lambda.is_some()),
            ("rate", f.rate.is_some()),
            ("location", f.location.is_some()),
            ("scale", f.scale.is_some()),
            ("probs", f.probs.is_some()),
        ];
        let allowed: &[&str] = match f.family {
            Family::Gaussian => &["mean", "cov"],
            Family::Poisson => &["lambda"],
            Family::Exponential => &["rate"],
            Family::Cauchy => &["location", "scale"],
            Family::Categorical => &["probs"],
        };
        let name = format!("{:?}", f.family).to_lowercase();
        if let Some((extra, _)) = present.iter().find(|(k, set)| *set && !allowed.contains(k)) {
            return Err(Error::InvalidModel(format!("{name} does not take `{extra}`")));
        }
        match f.family {
            Family::Gaussian => Model::gaussian(field(&name, "mean", f.mean)?, field(&name, "cov", f.cov)?),
            Family::Poisson => Model::poisson(field(&name, "lambda", f.lambda)?),
            Family::Exponential => Model::exponential(field(&name, "rate", f.rate)?),
            Family::Cauchy => Model::cauchy(field(&name, "location", f.location)?, field(&name, "scale", f.scale)?),
            Family::Categorical => Model::categorical(field(&name, "probs", f.probs)?),
        }
    }
}

impl From<Model> for ModelRepr {
    fn from(m: Model) -> ModelRepr {
        match m {
            Model::Gaussian(g) => ModelRepr::Gaussian {
                mean: g.mean.iter().copied().collect(),
                cov: (0..g.dim())
                    .map(|i| (0..g.dim()).map(|j| g.cov[(i, j)]).collect())
                    .collect(),
            },
            Model::Poisson { lambda } => ModelRepr::Poisson { lambda },
            Model::Exponential { rate } => ModelRepr::Exponential { rate },
            Model::Cauchy { location, scale } => ModelRepr::Cauchy { location, scale },
            Model::Categorical { probs } => ModelRepr::Categorical { probs },
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl Model {
    pub fn gaussian(mean: Vec<f64>, cov: Vec<Vec<f64>>) -> Result<Model> {
        Gaussian::new(mean, cov).map(Model::Gaussian)
    }

    /// One-dimensional normal law with the given variance.
    pub fn normal(mean: f64, variance: f64) -> Result<Model> {
        Model::gaussian(vec![mean], vec![vec![variance]])
    }

    pub fn poisson(lambda: f64) -> Result<Model> {
        positive("poisson lambda", lambda)?;
        Ok(Model::Poisson { lambda })
    }

    pub fn exponential(rate: f64) -> Result<Model> {
        positive("exponential rate", rate)?;
        Ok(Model::Exponential { rate })
    }

    pub fn cauchy(location: f64, scale: f64) -> Result<Model> {
        if !location.is_finite() {
            return Err(Error::InvalidModel("cauchy location must be finite".into()));
        }
        positive("cauchy scale", scale)?;
        Ok(Model::Cauchy { location, scale })
    }

    pub fn categorical(probs: Vec<f64>) -> Result<Model> {
        if probs.is_empty() {
            return Err(Error::InvalidModel("categorical needs at least one outcome".into()));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidModel(
                "categorical probabilities must be finite and non-negative".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel(format!(
                "categorical probabilities must sum to 1, got {total}"
            )));
        }
        Ok(Model::Categorical { probs })
    }

    pub fn family(&self) -> Family {
        match self {
            Model::Gaussian(_) => Family::Gaussian,
            Model::Poisson { .. } => Family::Poisson,
            Model::Exponential { .. } => Family::Exponential,
            Model::Cauchy { .. } => Family::Cauchy,
            Model::Categorical { .. } => Family::Categorical,
        }
    }

    pub fn sample_space(&self) -> SampleSpace {
        match self {
            Model::Gaussian(g) => SampleSpace::Euclidean(g.dim()),
            Model::Cauchy { .. } => SampleSpace::Euclidean(1),
            Model::Exponential { .. } => SampleSpace::HalfLine,
            Model::Poisson { .. } => SampleSpace::Counts,
            Model::Categorical { probs } => SampleSpace::Finite(probs.len()),
        }
    }

    /// Log-density (or log-mass) at `x`; `−∞` outside the support.
    ///
    /// Points of the wrong kind (a vector for a Poisson model, a vector of the
    /// wrong length, …) are errors rather than zero-density points.
    pub fn log_density(&self, x: &Point) -> Result<f64> {
        match (self, x) {
            (Model::Gaussian(g), Point::Vector(v)) if v.len() == g.dim() => Ok(g.log_density(v)),
            (Model::Gaussian(g), Point::Real(v)) if g.dim() == 1 => Ok(g.log_density(&[*v])),
            (Model::Poisson { .. } | Model::Categorical { .. }, Point::Count(k)) => Ok(self.ln_mass(*k)),
            (Model::Exponential { .. } | Model::Cauchy { .. }, p) if p.scalar().is_some() => {
                Ok(self.ln_pdf(p.scalar().unwrap_or_default()))
            }
            _ => Err(Error::PointMismatch(format!("{x:?} for a {:?} model", self.family()))),
        }
    }

    pub fn density(&self, x: &Point) -> Result<f64> {
        self.log_density(x).map(f64::exp)
    }

    /// Log-density of a one-dimensional continuous model.
    pub(crate) fn ln_pdf(&self, x: f64) -> f64 {
        match self {
            Model::Gaussian(g) => {
                let var = g.cov[(0, 0)];
                let z = x - g.mean[0];
                -0.5 * ((2.0 * PI * var).ln() + z * z / var)
            }
            Model::Exponential { rate } => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    rate.ln() - rate * x
                }
            }
            Model::Cauchy { location, scale } => {
                let z = x - location;
                scale.ln() - (PI * (scale * scale + z * z)).ln()
            }
            _ => f64::NAN,
        }
    }

    /// Log-mass of a discrete model.
    pub(crate) fn ln_mass(&self, k: u64) -> f64 {
        match self {
            Model::Poisson { lambda } => -lambda + k as f64 * lambda.ln() - ln_factorial(k),
            Model::Categorical { probs } => match probs.get(k as usize) {
                Some(p) => p.ln(),
                None => f64::NEG_INFINITY,
            },
            _ => f64::NAN,
        }
    }

    /// Centre and length scale used to place quadrature nodes.
    pub(crate) fn placement(&self) -> (f64, f64) {
        match self {
            Model::Gaussian(g) => (g.mean[0], g.cov[(0, 0)].sqrt()),
            Model::Exponential { rate } => (1.0 / rate, 1.0 / rate),
            Model::Cauchy { location, scale } => (*location, *scale),
            Model::Poisson { lambda } => (*lambda, lambda.sqrt()),
            Model::Categorical { probs } => (0.0, probs.len() as f64),
        }
    }

    /// One draw.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self {
            Model::Gaussian(g) => {
                let z = DVector::from_fn(g.dim(), |_, _| StandardNormal.sample(rng));
                let x = &g.mean + &g.chol_lower * z;
                if g.dim() == 1 {
                    Point::Real(x[0])
                } else {
                    Point::Vector(x.iter().copied().collect())
                }
            }
            Model::Poisson { lambda } => {
                let d = rand_distr::Poisson::new(*lambda).expect("validated lambda");
                let k: f64 = d.sample(rng);
                Point::Count(k as u64)
            }
            Model::Exponential { rate } => {
                let d = rand_distr::Exp::new(*rate).expect("validated rate");
                Point::Real(d.sample(rng))
            }
            Model::Cauchy { location, scale } => {
                let d = rand_distr::Cauchy::new(*location, *scale).expect("validated scale");
                Point::Real(d.sample(rng))
            }
            Model::Categorical { probs } => {
                let u: f64 = rng.random();
                Point::Count(categorical_index(probs, u))
            }
        }
    }

    /// `count` i.i.d. draws.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Result<Vec<Point>> {
        if count == 0 {
            return Err(Error::InvalidArgument("sample count must be at least 1".into()));
        }
        Ok((0..count).map(|_| self.draw(rng)).collect())
    }
}

/// Inverse-CDF lookup that never returns an outcome of zero mass.
fn categorical_index(probs: &[f64], u: f64) -> u64 {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i as u64;
        }
    }
    last as u64
}

/// Context weight `φ` for a single observation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightFields", into = "WeightRepr")]
pub enum Weight {
    /// `φ ≡ 1`.
    #[default]
    Const,
    /// `φ(x) = exp(γᵀx)`.
    ExpTilt(Vec<f64>),
    /// Tabulated weight on a categorical support.
    Table(Vec<f64>),
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum WeightRepr {
    Const,
    ExpTilt { gamma: Vec<f64> },
    Table { values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum WeightKind {
    Const,
    ExpTilt,
    Table,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightFields {
    kind: WeightKind,
    gamma: Option<Vec<f64>>,
    values: Option<Vec<f64>>,
}

impl TryFrom<WeightFields> for Weight {
    type Error = Error;
    fn try_from(f: WeightFields) -> Result<Weight> {
        match (f.kind, f.gamma, f.values) {
            (WeightKind::Const, None, None) => Ok(Weight::Const),
            (WeightKind::ExpTilt, Some(gamma), None) => Weight::exp_tilt(gamma),
            (WeightKind::Table, None, Some(values)) => Weight::table(values),
            (WeightKind::Const, ..) => Err(Error::InvalidWeight("const takes no parameters".into())),
            (WeightKind::ExpTilt, ..) => Err(Error::InvalidWeight("exp_tilt takes exactly `gamma`".into())),
            (WeightKind::Table, ..) => Err(Error::InvalidWeight("table takes exactly `values`".into())),
        }
    }
}

impl From<Weight> for WeightRepr {
    fn from(w: Weight) -> WeightRepr {
        match w {
            Weight::Const => WeightRepr::Const,
            Weight::ExpTilt(gamma) => WeightRepr::ExpTilt { gamma },
            Weight::Table(values) => WeightRepr::Table { values },
        }
    }
}

impl Weight {
    pub fn exp_tilt(gamma: Vec<f64>) -> Result<Weight> {
        if gamma.is_empty() || gamma.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidWeight(
                "exponential tilt needs a non-empty finite gamma".into(),
            ));
        }
        Ok(Weight::ExpTilt(gamma))
    }

    /// Scalar tilt `φ(x) = e^{γx}`.
    pub fn tilt(gamma: f64) -> Result<Weight> {
        Weight::exp_tilt(vec![gamma])
    }

    pub fn table(values: Vec<f64>) -> Result<Weight> {
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidWeight(
                "table weights must be finite and non-negative".into(),
            ));
        }
        if !values.iter().any(|v| *v > 0.0) {
            return Err(Error::InvalidWeight("table weights must not all vanish".into()));
        }
        Ok(Weight::Table(values))
    }

    pub fn is_const(&self) -> bool {
        match self {
            Weight::Const => true,
            Weight::ExpTilt(g) => g.iter().all(|v| *v == 0.0),
            Weight::Table(_) => false,
        }
    }

    /// `γ` of a one-dimensional tilt, 0 for the constant weight.
    pub fn scalar_tilt(&self) -> Option<f64> {
        match self {
            Weight::Const => Some(0.0),
            Weight::ExpTilt(g) if g.len() == 1 => Some(g[0]),
            _ => None,
        }
    }

    /// `ln φ(x)`; `−∞` where the weight vanishes.
    pub fn ln_value(&self, x: &Point) -> Result<f64> {
        match (self, x) {
            (Weight::Const, _) => Ok(0.0),
            (Weight::ExpTilt(g), Point::Vector(v)) if v.len() == g.len() => {
                Ok(g.iter().zip(v).map(|(a, b)| a * b).sum())
            }
            (Weight::ExpTilt(g), Point::Real(v)) if g.len() == 1 => Ok(g[0] * v),
            (Weight::ExpTilt(g), Point::Count(k)) if g.len() == 1 => Ok(g[0] * *k as f64),
            (Weight::Table(t), Point::Count(k)) => match t.get(*k as usize) {
                Some(v) => Ok(v.ln()),
                None => Err(Error::InvalidArgument(format!(
                    "table weight index {k} out of range 0..{}",
                    t.len()
                ))),
            },
            _ => Err(Error::PointMismatch(format!("{x:?} for weight {self:?}"))),
        }
    }

    pub fn value(&self, x: &Point) -> Result<f64> {
        self.ln_value(x).map(f64::exp)
    }

    /// `ln φ` at a scalar point, for one-dimensional weights.
    pub(crate) fn ln_scalar(&self, x: f64) -> f64 {
        match self {
            Weight::Const => 0.0,
            Weight::ExpTilt(g) => g[0] * x,
            Weight::Table(t) => t.get(x as usize).map_or(f64::NEG_INFINITY, |v| v.ln()),
        }
    }

    /// Shape checks that do not depend on integrability.
    pub fn check_shape(&self, model: &Model) -> Result<()> {
        match (self, model.sample_space()) {
            (Weight::Const, _) => Ok(()),
            (Weight::ExpTilt(g), SampleSpace::Euclidean(d)) if g.len() != d => Err(Error::InvalidWeight(format!(
                "tilt has dimension {}, model has {d}",
                g.len()
            ))),
            (Weight::ExpTilt(g), _) if model.sample_space() != SampleSpace::Euclidean(g.len()) && g.len() != 1 => Err(
                Error::InvalidWeight(format!("tilt has dimension {}, model is one-dimensional", g.len())),
            ),
            (Weight::ExpTilt(_), _) if model.family() == Family::Cauchy && !self.is_const() => Err(
                Error::NonIntegrableWeight("exponential tilts are not integrable against Cauchy tails".into()),
            ),
            (Weight::ExpTilt(_), _) => Ok(()),
            (Weight::Table(t), SampleSpace::Finite(m)) if t.len() == m => Ok(()),
            (Weight::Table(t), SampleSpace::Finite(m)) => Err(Error::InvalidWeight(format!(
                "table has {} entries, support has {m}",
                t.len()
            ))),
            (Weight::Table(_), _) => Err(Error::InvalidWeight("table weights need a categorical model".into())),
        }
    }

    /// Admissibility for a single model: `E_φ(model)` must be finite.
    pub fn check_model(&self, model: &Model) -> Result<()> {
        self.check_shape(model)?;
        if let (Model::Exponential { rate }, Some(g)) = (model, self.scalar_tilt()) {
            if g >= *rate {
                return Err(Error::NonIntegrableWeight(format!(
                    "exponential tilt gamma = {g} must be below the rate {rate}"
                )));
            }
        }
        Ok(())
    }

    /// Admissibility for a pair of hypotheses.
    ///
    /// Exponential pairs accept `γ` equal to the smaller rate when the rates
    /// differ; the affinity then diverges only at one end point of `[0, 1]`.
    pub fn check_pair(&self, p: &Model, q: &Model) -> Result<()> {
        check_same_space(p, q)?;
        self.check_shape(p)?;
        self.check_shape(q)?;
        if let (Model::Exponential { rate: r1 }, Model::Exponential { rate: r2 }, Some(g)) = (p, q, self.scalar_tilt())
        {
            let lo = r1.min(*r2);
            if g > lo || (g == lo && r1 == r2) {
                return Err(Error::NonIntegrableWeight(format!(
                    "weight not integrable under both hypotheses: gamma = {g} exceeds min rate {lo}"
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn check_same_space(p: &Model, q: &Model) -> Result<()> {
    if p.sample_space() != q.sample_space() {
        return Err(Error::Unsupported(format!(
            "hypotheses live on different sample spaces: {:?} vs {:?}",
            p.sample_space(),
            q.sample_space()
        )));
    }
    Ok(())
}

/// Truncation point `K` for sums over ℕ₀ whose summand is dominated by a
/// Poisson mass of mean at most `max_mean`.
///
/// `K = ⌈m + 12√m + 30⌉`; beyond it the Poisson tail is below 1e-16 relative
/// to the total.
pub fn poisson_truncation(max_mean: f64) -> u64 {
    let m = max_mean.max(0.0);
    (m + 12.0 * m.sqrt() + 30.0).ceil() as u64
}

/// Sum of `exp(ln_term(k))` for `k = 0..=upper`.
pub(crate) fn sum_exp(upper: u64, ln_term: impl Fn(u64) -> f64) -> f64 {
    let terms: Vec<f64> = (0..=upper).map(|k| ln_term(k).exp()).collect();
    crate::rng::pairwise_sum(&terms)
}

/// `E_φ(model) = ∫ φ dP`, closed form for every supported combination.
pub fn weighted_normaliser(model: &Model, weight: &Weight) -> Result<f64> {
    weight.check_model(model)?;
    if weight.is_const() {
        return Ok(1.0);
    }
    match (model, weight) {
        (Model::Gaussian(g), Weight::ExpTilt(gamma)) => {
            let gv = DVector::from_column_slice(gamma);
            Ok((gv.dot(&g.mean) + 0.5 * gv.dot(&(&g.cov * &gv))).exp())
        }
        (Model::Poisson { lambda }, Weight::ExpTilt(g)) => Ok((lambda * (g[0].exp() - 1.0)).exp()),
        (Model::Exponential { rate }, Weight::ExpTilt(g)) => Ok(rate / (rate - g[0])),
        (Model::Categorical { probs }, _) => {
            let total: f64 = (0..probs.len() as u64)
                .map(|k| (model.ln_mass(k) + weight.ln_value(&Point::Count(k)).unwrap_or(f64::NEG_INFINITY)).exp())
                .sum();
            if total > 0.0 {
                Ok(total)
            } else {
                Err(Error::NonIntegrableWeight(
                    "weight vanishes on the support of the model".into(),
                ))
            }
        }
        _ => Err(Error::Unsupported(format!(
            "weighted normaliser for {:?} with {weight:?}",
            model.family()
        ))),
    }
}

/// `E_φ(model)` by quadrature or truncated summation.
///
/// Independent of the closed forms in [`weighted_normaliser`]; only
/// one-dimensional sample spaces are supported.
pub fn weighted_normaliser_numeric(model: &Model, weight: &Weight) -> Result<f64> {
    weight.check_model(model)?;
    match model.sample_space() {
        SampleSpace::Finite(m) => Ok(sum_exp(m as u64 - 1, |k| {
            model.ln_mass(k) + weight.ln_value(&Point::Count(k)).unwrap_or(f64::NEG_INFINITY)
        })),
        SampleSpace::Counts => {
            let lambda = match model {
                Model::Poisson { lambda } => *lambda,
                _ => unreachable!(),
            };
            let g = weight.scalar_tilt().unwrap_or(0.0);
            let upper = poisson_truncation(lambda * g.exp().max(1.0));
            Ok(sum_exp(upper, |k| model.ln_mass(k) + g * k as f64))
        }
        SampleSpace::Euclidean(1) | SampleSpace::HalfLine => {
            let (center, scale) = model.placement();
            let g = weight.scalar_tilt().unwrap_or(0.0);
            let f = |x: f64| (model.ln_pdf(x) + weight.ln_scalar(x)).exp();
            let range = if model.sample_space() == SampleSpace::HalfLine {
                let rate = 1.0 / scale;
                Range::HalfLine {
                    lower: 0.0,
                    scale: 1.0 / (rate - g),
                }
            } else {
                Range::RealLine {
                    center: center + g * scale * scale,
                    scale,
                }
            };
            Ok(quad::integrate(f, range)?.value)
        }
        SampleSpace::Euclidean(d) => Err(Error::Unsupported(format!("numeric normaliser in dimension {d}"))),
    }
}

/// `p* = φ p / E_φ(p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltedDensity {
    base: Model,
    weight: Weight,
    normaliser: f64,
}

impl TiltedDensity {
    pub fn new(base: Model, weight: Weight) -> Result<Self> {
        let normaliser = weighted_normaliser(&base, &weight)?;
        Ok(TiltedDensity {
            base,
            weight,
            normaliser,
        })
    }

    pub fn base(&self) -> &Model {
        &self.base
    }
    pub fn weight(&self) -> &Weight {
        &self.weight
    }
    pub fn normaliser(&self) -> f64 {
        self.normaliser
    }

    pub fn log_density(&self, x: &Point) -> Result<f64> {
        Ok(self.base.log_density(x)? + self.weight.ln_value(x)? - self.normaliser.ln())
    }

    pub fn density(&self, x: &Point) -> Result<f64> {
        self.log_density(x).map(f64::exp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn log_density_examples() {
        let g = Model::normal(0.0, 1.0).unwrap();
        assert!((g.log_density(&Point::Real(0.0)).unwrap() + 0.5 * (2.0 * PI).ln()).abs() < 1e-15);
        let p = Model::poisson(2.0).unwrap();
        assert!((p.log_density(&Point::Count(0)).unwrap() + 2.0).abs() < 1e-15);
        let c = Model::cauchy(0.0, 1.0).unwrap();
        assert!((c.log_density(&Point::Real(0.0)).unwrap() - (1.0 / PI).ln()).abs() < 1e-15);
    }

    #[test]
    fn outside_support_is_negative_infinity() {
        let e = Model::exponential(2.0).unwrap();
        assert_eq!(e.log_density(&Point::Real(-1.0)).unwrap(), f64::NEG_INFINITY);
        let c = Model::categorical(vec![0.5, 0.5]).unwrap();
        assert_eq!(c.log_density(&Point::Count(7)).unwrap(), f64::NEG_INFINITY);
        let z = Model::categorical(vec![1.0, 0.0]).unwrap();
        assert_eq!(z.density(&Point::Count(1)).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_points_are_errors() {
        let p = Model::poisson(1.0).unwrap();
        assert!(matches!(
            p.log_density(&Point::Vector(vec![1.0, 2.0])),
            Err(Error::PointMismatch(_))
        ));
        let g = Model::gaussian(vec![0.0, 0.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(g.log_density(&Point::Real(0.0)).is_err());
    }

    #[test]
    fn constructor_invariants() {
        assert!(Model::poisson(0.0).is_err());
        assert!(Model::exponential(-1.0).is_err());
        assert!(Model::cauchy(0.0, 0.0).is_err());
        assert!(Model::categorical(vec![0.5, 0.6]).is_err());
        assert!(Model::categorical(vec![-0.1, 1.1]).is_err());
        assert!(Model::gaussian(vec![0.0, 0.0], vec![vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
        assert!(Model::gaussian(vec![0.0, 0.0], vec![vec![1.0, 0.5], vec![0.4, 1.0]]).is_err());
        assert!(Model::gaussian(vec![0.0; 65], vec![vec![0.0; 65]; 65]).is_err());
    }

    #[test]
    fn weight_values() {
        assert_eq!(Weight::Const.value(&Point::Real(3.0)).unwrap(), 1.0);
        let t = Weight::tilt(0.5).unwrap();
        assert!((t.value(&Point::Real(2.0)).unwrap() - std::f64::consts::E).abs() < 1e-15);
        let tab = Weight::table(vec![1.0, 0.0]).unwrap();
        assert_eq!(tab.value(&Point::Count(1)).unwrap(), 0.0);
        assert!(tab.value(&Point::Count(2)).is_err());
        assert!(Weight::table(vec![0.0, 0.0]).is_err());
        assert!(Weight::table(vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn weight_admissibility() {
        let c = Model::cauchy(0.0, 1.0).unwrap();
        assert!(Weight::tilt(0.1).unwrap().check_model(&c).is_err());
        assert!(Weight::tilt(0.0).unwrap().check_model(&c).is_ok());
        let e = Model::exponential(1.0).unwrap();
        assert!(Weight::tilt(1.0).unwrap().check_model(&e).is_err());
        let e2 = Model::exponential(2.0).unwrap();
        let w = Weight::tilt(1.0).unwrap();
        assert!(w.check_pair(&e2, &e).is_ok());
        assert!(w.check_pair(&e, &e).is_err());
        assert!(Weight::tilt(1.5).unwrap().check_pair(&e2, &e).is_err());
        let cat = Model::categorical(vec![0.5, 0.5]).unwrap();
        assert!(Weight::table(vec![1.0, 1.0, 1.0]).unwrap().check_model(&cat).is_err());
        assert!(Weight::table(vec![1.0]).unwrap().check_model(&e).is_err());
    }

    #[test]
    fn normaliser_examples() {
        let p = Model::poisson(2.0).unwrap();
        let w = Weight::tilt(2f64.ln()).unwrap();
        let closed = weighted_normaliser(&p, &w).unwrap();
        assert!((closed - 2f64.exp()).abs() < 1e-12);
        assert!((weighted_normaliser_numeric(&p, &w).unwrap() - closed).abs() < 1e-8 * closed);

        let e = Model::exponential(2.0).unwrap();
        let w = Weight::tilt(0.5).unwrap();
        let closed = weighted_normaliser(&e, &w).unwrap();
        assert!((closed - 2.0 / 1.5).abs() < 1e-15);
        assert!((weighted_normaliser_numeric(&e, &w).unwrap() - closed).abs() < 1e-8 * closed);
    }

    #[test]
    fn const_normaliser_is_one() {
        let cat = Model::categorical(vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(weighted_normaliser(&cat, &Weight::Const).unwrap(), 1.0);
        for m in [
            Model::normal(1.0, 2.0).unwrap(),
            Model::exponential(3.0).unwrap(),
            Model::cauchy(-1.0, 0.5).unwrap(),
        ] {
            let v = weighted_normaliser_numeric(&m, &Weight::Const).unwrap();
            assert!((v - 1.0).abs() < 1e-10, "{m:?}: {v}");
        }
    }

    #[test]
    fn tilted_density_integrates_to_one() {
        let e = Model::exponential(2.0).unwrap();
        let t = TiltedDensity::new(e, Weight::tilt(0.5).unwrap()).unwrap();
        let v = quad::integrate(
            |x| t.density(&Point::Real(x)).unwrap(),
            Range::HalfLine { lower: 0.0, scale: 1.0 },
        )
        .unwrap()
        .value;
        assert!((v - 1.0).abs() < 1e-8);
    }

    #[test]
    fn degenerate_categorical_sampling() {
        let m = Model::categorical(vec![1.0, 0.0]).unwrap();
        let xs = m.sample(&mut rng::stream(9, 0), 5).unwrap();
        assert_eq!(xs, vec![Point::Count(0); 5]);
        assert!(m.sample(&mut rng::stream(9, 0), 0).is_err());
    }

    #[test]
    fn poisson_sample_mean() {
        let m = Model::poisson(2.0).unwrap();
        let n = 100_000;
        let xs = m.sample(&mut rng::stream(42, 0), n).unwrap();
        let mean = xs
            .iter()
            .map(|p| match p {
                Point::Count(k) => *k as f64,
                _ => unreachable!(),
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 2.0).abs() < 3.0 * (2.0 / n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn gaussian_sample_variance() {
        let m = Model::normal(0.0, 1.0).unwrap();
        let xs: Vec<f64> = m
            .sample(&mut rng::stream(1, 0), 100_000)
            .unwrap()
            .into_iter()
            .map(|p| match p {
                Point::Real(x) => x,
                _ => unreachable!(),
            })
            .collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((0.98..=1.02).contains(&var), "variance {var}");
    }

    #[test]
    fn json_schema() {
        let m: Model = serde_json::from_str(r#"{"family":"poisson","lambda":2.0}"#).unwrap();
        assert_eq!(m, Model::poisson(2.0).unwrap());
        let g: Model = serde_json::from_str(r#"{"family":"gaussian","mean":[0,1],"cov":[[1,0],[0,2]]}"#).unwrap();
        assert_eq!(g.sample_space(), SampleSpace::Euclidean(2));
        assert!(serde_json::from_str::<Model>(r#"{"family":"poisson","lambda":-1}"#).is_err());
        assert!(serde_json::from_str::<Model>(r#"{"family":"poisson","rate":1}"#).is_err());
        assert!(serde_json::from_str::<Model>(r#"{"family":"poisson","lambda":1,"extra":0}"#).is_err());
        assert!(serde_json::from_str::<Weight>(r#"{"kind":"const","gamma":[1]}"#).is_err());
        let w: Weight = serde_json::from_str(r#"{"kind":"exp_tilt","gamma":[0.5]}"#).unwrap();
        assert_eq!(w, Weight::tilt(0.5).unwrap());
        let back = serde_json::to_string(&Weight::table(vec![1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(back, r#"{"kind":"table","values":[1.0,2.0]}"#);
        let c: Weight = serde_json::from_str(r#"{"kind":"const"}"#).unwrap();
        assert_eq!(c, Weight::Const);
    }
}
