use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{substream, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LocalizationKind {
    /// `G(t) = exp(2 alpha t)`.
    Exponential { alpha: f64 },
    /// `G(t) = <t>^{2s} = (1 + t^2)^s`.
    Polynomial { s: f64 },
}

/// Weight function of a localization moment together with its constant in
/// `G(|x - y|) <= C_G G(|x - z|) G(|z - y|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationFunction {
    pub kind: LocalizationKind,
    pub c_g: f64,
}

impl LocalizationFunction {
    pub fn exponential(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter { name: "alpha".into(), reason: format!("must be positive, got {alpha}") });
        }
        Ok(Self { kind: LocalizationKind::Exponential { alpha }, c_g: 1.0 })
    }

    pub fn polynomial(s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter { name: "s".into(), reason: format!("must be positive, got {s}") });
        }
        // Peetre: <x + y>^2 <= 2 <x>^2 <y>^2.
        Ok(Self { kind: LocalizationKind::Polynomial { s }, c_g: 2f64.powf(s) })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.kind {
            LocalizationKind::Exponential { alpha } => (2.0 * alpha * t).exp(),
            LocalizationKind::Polynomial { s } => (1.0 + t * t).powf(s),
        }
    }

    /// Rate `lambda` with `G(t) <= C exp(lambda t)`; zero for polynomial `G`,
    /// which is dominated by every exponential.
    pub fn exponential_rate(&self) -> f64 {
        match self.kind {
            LocalizationKind::Exponential { alpha } => 2.0 * alpha,
            LocalizationKind::Polynomial { .. } => 0.0,
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            LocalizationKind::Exponential { alpha } => format!("exp(alpha={alpha})"),
            LocalizationKind::Polynomial { s } => format!("poly(s={s})"),
        }
    }

    /// Largest relative violation of the triangle inequality over `samples`
    /// random triples in the disc of radius `radius`; non-positive means it holds.
    pub fn triangle_violation(&self, samples: usize, radius: f64, seed: u64) -> f64 {
        let mut rng = substream(seed, Stream::Sampling);
        let mut point = || {
            let r = radius * rng.random::<f64>().sqrt();
            let phi = std::f64::consts::TAU * rng.random::<f64>();
            [r * phi.cos(), r * phi.sin()]
        };
        let dist = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..samples {
            let (x, y, z) = (point(), point(), point());
            let lhs = self.eval(dist(x, y));
            let rhs = self.c_g * self.eval(dist(x, z)) * self.eval(dist(z, y));
            worst = worst.max(lhs / rhs - 1.0);
        }
        worst
    }
}
