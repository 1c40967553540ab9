//! Adaptive Gauss–Kronrod quadrature on finite and infinite ranges.
//!
//! Infinite ranges are mapped onto a bounded parameter interval before the
//! adaptive 21-point Kronrod rule is applied:
//!
//! | range         | substitution                     |
//! |---------------|----------------------------------|
//! | `[a, ∞)`      | `x = a + s·t/(1−t)`, `t ∈ [0,1)`   |
//! | `(−∞, ∞)`     | `x = c + s·t/(1−t²)`, `t ∈ (−1,1)` |
//!
//! The centre `c` and scale `s` do not change the value of the integral; they
//! only tell the substitution where the mass of the integrand sits.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Integration range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Range {
    Finite {
        lower: f64,
        upper: f64,
    },
    /// `[lower, ∞)` with characteristic length `scale`.
    HalfLine {
        lower: f64,
        scale: f64,
    },
    /// `(−∞, ∞)` centred at `center` with characteristic length `scale`.
    RealLine {
        center: f64,
        scale: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-12, rel: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub tolerance: Tolerance,
    pub max_intervals: usize,
    pub initial_pieces: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator {
            tolerance: Tolerance::default(),
            max_intervals: 4000,
            initial_pieces: 8,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = fc.abs() * WGK[10];
    let mut values = [0.0f64; 21];
    values[10] = fc;
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        values[j] = f1;
        values[20 - j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((values[j] - mean).abs() + (values[20 - j] - mean).abs());
    }
    let value = kronrod * half;
    let asc = asc * half.abs();
    let abs_sum = abs_sum * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * abs_sum);
    }
    (value, err)
}

impl Integrator {
    pub fn with_tolerance(abs: f64, rel: f64) -> Self {
        Integrator {
            tolerance: Tolerance { abs, rel },
            ..Integrator::default()
        }
    }

    /// Integrate `f` over `range`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, range: Range) -> Result<Integral> {
        match range {
            Range::Finite { lower, upper } => {
                if !(lower.is_finite() && upper.is_finite()) {
                    return Err(Error::InvalidArgument("finite range needs finite end points".into()));
                }
                if lower == upper {
                    return Ok(Integral {
                        value: 0.0,
                        abs_error: 0.0,
                        intervals: 0,
                    });
                }
                self.adaptive(&f, lower, upper)
            }
            Range::HalfLine { lower, scale } => {
                check_scale(scale)?;
                let g = |t: f64| {
                    let u = 1.0 - t;
                    let fx = f(lower + scale * t / u);
                    if fx == 0.0 {
                        0.0
                    } else {
                        fx * scale / (u * u)
                    }
                };
                self.adaptive(&g, 0.0, 1.0)
            }
            Range::RealLine { center, scale } => {
                check_scale(scale)?;
                let g = |t: f64| {
                    let u = 1.0 - t * t;
                    let fx = f(center + scale * t / u);
                    if fx == 0.0 {
                        0.0
                    } else {
                        fx * scale * (1.0 + t * t) / (u * u)
                    }
                };
                self.adaptive(&g, -1.0, 1.0)
            }
        }
    }

    fn adaptive<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> Result<Integral> {
        let pieces = self.initial_pieces.max(1);
        let width = (b - a) / pieces as f64;
        let mut heap = BinaryHeap::with_capacity(self.max_intervals + pieces);
        for i in 0..pieces {
            let lo = a + width * i as f64;
            let hi = if i + 1 == pieces { b } else { lo + width };
            let (value, error) = kronrod21(f, lo, hi);
            heap.push(Piece {
                a: lo,
                b: hi,
                value,
                error,
            });
        }
        loop {
            let (total, err) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
            if !total.is_finite() || !err.is_finite() {
                return Err(Error::Quadrature {
                    achieved: f64::INFINITY,
                    requested: self.tolerance.abs,
                });
            }
            let target = self.tolerance.abs.max(self.tolerance.rel * total.abs());
            if err <= target {
                return Ok(Integral {
                    value: total,
                    abs_error: err,
                    intervals: heap.len(),
                });
            }
            if heap.len() >= self.max_intervals {
                return Err(Error::Quadrature {
                    achieved: err,
                    requested: target,
                });
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // Interval at machine resolution; accept what we have.
                let rest: f64 = heap.iter().map(|p| p.error).sum();
                if rest <= target {
                    return Ok(Integral {
                        value: total,
                        abs_error: err,
                        intervals: heap.len() + 1,
                    });
                }
                return Err(Error::Quadrature {
                    achieved: err,
                    requested: target,
                });
            }
            let (v1, e1) = kronrod21(f, worst.a, mid);
            let (v2, e2) = kronrod21(f, mid, worst.b);
            heap.push(Piece {
                a: worst.a,
                b: mid,
                value: v1,
                error: e1,
            });
            heap.push(Piece {
                a: mid,
                b: worst.b,
                value: v2,
                error: e2,
            });
        }
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if scale > 0.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "substitution scale must be positive, got {scale}"
        )))
    }
}

/// Integrate with the default tolerances (absolute 1e-12, relative 1e-10).
pub fn integrate<F: Fn(f64) -> f64>(f: F, range: Range) -> Result<Integral> {
    Integrator::default().integrate(f, range)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| 3.0 * x * x, Range::Finite { lower: 0.0, upper: 2.0 }).unwrap();
        assert!((r.value - 8.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_on_real_line() {
        let r = integrate(
            |x: f64| (-0.5 * (x - 3.0) * (x - 3.0)).exp(),
            Range::RealLine {
                center: 0.0,
                scale: 1.0,
            },
        )
        .unwrap();
        assert!((r.value - (2.0 * PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn cauchy_tails() {
        let r = integrate(
            |x: f64| 1.0 / (PI * (1.0 + x * x)),
            Range::RealLine {
                center: 0.0,
                scale: 1.0,
            },
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slow_exponential_on_half_line() {
        let r = integrate(
            |x: f64| (-0.01 * x).exp(),
            Range::HalfLine {
                lower: 0.0,
                scale: 100.0,
            },
        )
        .unwrap();
        assert!((r.value - 100.0).abs() < 1e-8);
    }

    #[test]
    fn divergent_integral_fails() {
        let err = Integrator {
            max_intervals: 200,
            ..Integrator::default()
        }
        .integrate(
            |x: f64| 1.0 / (1.0 + x.abs()),
            Range::RealLine {
                center: 0.0,
                scale: 1.0,
            },
        );
        assert!(err.is_err());
    }
}
