//! Seeded sampling of evaluation points and residual measurement.
//!
//! Points are drawn sequentially from a ChaCha stream, so the point set only
//! depends on the seed. Evaluation over points may run on rayon (feature
//! `parallel`); results are gathered in point order, so reports are
//! bit-identical either way.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, EvalError, Result};
use crate::expr::Expr;
use crate::field::{Evaluator, Field, Kind};
use crate::parse::parse;

pub const DEFAULT_POINTS: usize = 20;
pub const DEFAULT_MARGIN: f64 = 0.05;

/// Region removed from the sampling box.
#[derive(Clone, Debug)]
pub enum Exclusion {
    /// Reject points with `|lhs − rhs| < margin`.
    NotEqual { lhs: Expr, rhs: Expr, margin: f64 },
    /// Keep only points with `lhs > rhs`.
    Greater { lhs: Expr, rhs: Expr },
    /// Keep only points with `lhs < rhs`.
    Less { lhs: Expr, rhs: Expr },
}

impl Exclusion {
    /// Parses `"a != b"`, `"r > 0.5"` or `"x < y"` over the given coordinates.
    pub fn parse(text: &str, coords: &[String]) -> Result<Exclusion> {
        for (op, build) in [("!=", 0), (">", 1), ("<", 2)] {
            if let Some(at) = text.find(op) {
                let lhs = parse(&text[..at], coords)?;
                let rhs = parse(&text[at + op.len()..], coords)?;
                return Ok(match build {
                    0 => Exclusion::NotEqual { lhs, rhs, margin: DEFAULT_MARGIN },
                    1 => Exclusion::Greater { lhs, rhs },
                    _ => Exclusion::Less { lhs, rhs },
                });
            }
        }
        Err(Error::Invalid(format!("exclusion `{text}` needs one of !=, >, <")))
    }

    /// True when the point is allowed.
    pub fn admits(&self, p: &[f64]) -> bool {
        let ev = |e: &Expr| e.eval(p).map(|z| z.re).unwrap_or(f64::NAN);
        match self {
            Exclusion::NotEqual { lhs, rhs, margin } => (ev(lhs) - ev(rhs)).abs() >= *margin,
            Exclusion::Greater { lhs, rhs } => ev(lhs) > ev(rhs),
            Exclusion::Less { lhs, rhs } => ev(lhs) < ev(rhs),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SampleSpec {
    pub boxes: Vec<(f64, f64)>,
    pub n_points: usize,
    pub seed: u64,
    pub exclusions: Vec<Exclusion>,
}

impl SampleSpec {
    pub fn new(boxes: Vec<(f64, f64)>, n_points: usize, seed: u64) -> SampleSpec {
        SampleSpec { boxes, n_points, seed, exclusions: Vec::new() }
    }

    /// Same box `[lo, hi]` in every direction.
    pub fn cube(dim: usize, lo: f64, hi: f64, n_points: usize, seed: u64) -> SampleSpec {
        SampleSpec::new(vec![(lo, hi); dim], n_points, seed)
    }

    pub fn exclude(mut self, e: Exclusion) -> SampleSpec {
        self.exclusions.push(e);
        self
    }

    pub fn dim(&self) -> usize {
        self.boxes.len()
    }

    /// Rejection-sample `n_points` admissible points.
    pub fn points(&self) -> Result<Vec<Vec<f64>>> {
        if self.n_points == 0 {
            return Err(Error::Invalid("sample count must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let tries = 1000 * self.n_points;
        let mut out = Vec::with_capacity(self.n_points);
        for _ in 0..tries {
            let p: Vec<f64> = self.boxes.iter().map(|&(lo, hi)| if hi > lo { rng.gen_range(lo..hi) } else { lo }).collect();
            if self.exclusions.iter().all(|e| e.admits(&p)) {
                out.push(p);
                if out.len() == self.n_points {
                    return Ok(out);
                }
            }
        }
        Err(Error::AllExcluded { tried: tries })
    }
}

/// How to iterate over sample points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Apply `f` to every point, preserving order.
pub fn map_points<T, F>(points: &[Vec<f64>], exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return points.par_iter().map(|p| f(p)).collect();
    }
    let _ = exec;
    points.iter().map(|p| f(p)).collect()
}

/// Worst entry over sample points, with the scale used for relative tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub max_abs: f64,
    pub argmax_point: Vec<f64>,
    pub scale: f64,
}

impl Residual {
    pub fn zero(point: Vec<f64>) -> Residual {
        Residual { max_abs: 0.0, argmax_point: point, scale: 0.0 }
    }

    /// `max_abs / (1 + scale)`, the quantity compared against tolerances.
    pub fn relative(&self) -> f64 {
        self.max_abs / (1.0 + self.scale)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_abs <= tol * (1.0 + self.scale)
    }

    /// Combine residuals of independent parts (max over both).
    pub fn merge(mut self, other: &Residual) -> Residual {
        if other.max_abs > self.max_abs {
            self.max_abs = other.max_abs;
            self.argmax_point = other.argmax_point.clone();
        }
        self.scale = self.scale.max(other.scale);
        self
    }
}

/// `(max |entry|, scale)` of a set of fields at one point. The scale is the
/// largest magnitude among top-level summands, so cancellations are judged
/// against the size of what cancelled.
pub fn fields_at(fields: &[Field], point: &[f64]) -> std::result::Result<(f64, f64), EvalError> {
    let mut ev = Evaluator::new(point.to_vec());
    for f in fields {
        ev.demand(f, 0);
    }
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for f in fields {
        let v = ev.eval(f, 0)?;
        worst = worst.max(v.max_abs());
        match f.kind() {
            Kind::Sum(parts) => {
                for (c, g) in parts {
                    scale = scale.max(c.norm() * ev.eval(g, 0)?.max_abs());
                }
            }
            _ => scale = scale.max(v.max_abs()),
        }
    }
    Ok((worst, scale))
}

/// Residual of a set of fields over the given points.
pub fn residual_of_fields(fields: &[Field], points: &[Vec<f64>], exec: Execution) -> Result<Residual> {
    let per_point = map_points(points, exec, |p| fields_at(fields, p));
    let mut out = Residual::zero(points.first().cloned().unwrap_or_default());
    for (p, r) in points.iter().zip(per_point) {
        let (worst, scale) = r.map_err(|source| Error::AtPoint { point: p.clone(), source })?;
        if worst > out.max_abs || worst.is_nan() {
            out.max_abs = worst;
            out.argmax_point = p.clone();
        }
        out.scale = out.scale.max(scale);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_seeded_and_respects_exclusions() {
        let names = vec!["a".to_string(), "b".to_string()];
        let spec = SampleSpec::cube(2, -1.0, 1.0, 20, 7).exclude(Exclusion::parse("a != b", &names).unwrap());
        let p1 = spec.points().unwrap();
        let p2 = spec.points().unwrap();
        assert_eq!(p1, p2);
        assert!(p1.iter().all(|p| (p[0] - p[1]).abs() >= DEFAULT_MARGIN));
    }

    #[test]
    fn impossible_exclusion_reports() {
        let names = vec!["x".to_string()];
        let spec = SampleSpec::cube(1, 0.0, 1.0, 3, 1).exclude(Exclusion::parse("x > 2", &names).unwrap());
        assert!(matches!(spec.points(), Err(Error::AllExcluded { .. })));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let f = Field::expr(Expr::coord(0).sin() * 1e-3);
        let pts = SampleSpec::cube(1, -2.0, 2.0, 20, 3).points().unwrap();
        let a = residual_of_fields(std::slice::from_ref(&f), &pts, Execution::Sequential).unwrap();
        let b = residual_of_fields(&[f], &pts, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
