use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::min_pairwise_distance;
use crate::rng::{substream, Stream};

/// Gauss-Legendre nodes and weights on `[-1, 1]` (`order >= 1`).
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order.max(1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut pm, mut pn) = (1.0, x);
            for k in 2..=n {
                let next = ((2 * k - 1) as f64 * x * pn - (k - 1) as f64 * pm) / k as f64;
                pm = pn;
                pn = next;
            }
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    fn integrate(&self, f: &impl Fn([f64; 2]) -> f64, lo: [f64; 2], hi: [f64; 2]) -> f64 {
        let h = [(hi[0] - lo[0]) / 2.0, (hi[1] - lo[1]) / 2.0];
        let m = [(hi[0] + lo[0]) / 2.0, (hi[1] + lo[1]) / 2.0];
        let mut total = 0.0;
        for (xi, wi) in self.nodes.iter().zip(&self.weights) {
            for (yj, wj) in self.nodes.iter().zip(&self.weights) {
                total += wi * wj * f([m[0] + h[0] * xi, m[1] + h[1] * yj]);
            }
        }
        total * h[0] * h[1]
    }
}

const QUADRATURE_ORDER: usize = 10;
const MAX_DEPTH: usize = 12;

/// Adaptive tensor Gauss-Legendre integral of `f` over the rectangle
/// `[lo, hi]`, refined by quadrisection until parent and children agree to
/// `rel_tol` of the running total.
pub fn integrate_rectangle(f: impl Fn([f64; 2]) -> f64, lo: [f64; 2], hi: [f64; 2], rel_tol: f64) -> f64 {
    let (nodes, weights) = gauss_legendre(QUADRATURE_ORDER);
    let rule = Rule { nodes, weights };
    let whole = rule.integrate(&f, lo, hi);
    let scale = whole.abs().max(f64::MIN_POSITIVE);
    refine(&rule, &f, lo, hi, whole, rel_tol * scale, 0)
}

fn refine(rule: &Rule, f: &impl Fn([f64; 2]) -> f64, lo: [f64; 2], hi: [f64; 2], whole: f64, tol: f64, depth: usize) -> f64 {
    let mid = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    let quads = [
        ([lo[0], lo[1]], [mid[0], mid[1]]),
        ([mid[0], lo[1]], [hi[0], mid[1]]),
        ([lo[0], mid[1]], [mid[0], hi[1]]),
        ([mid[0], mid[1]], [hi[0], hi[1]]),
    ];
    let parts: Vec<f64> = quads.iter().map(|(a, b)| rule.integrate(f, *a, *b)).collect();
    let sum: f64 = parts.iter().sum();
    if (sum - whole).abs() <= tol || depth >= MAX_DEPTH {
        return sum;
    }
    quads
        .iter()
        .zip(parts)
        .map(|((a, b), part)| refine(rule, f, *a, *b, part, tol / 4.0, depth + 1))
        .sum()
}

/// Number of random points used to test radial monotonicity.
const MONOTONICITY_SAMPLES: usize = 4000;

/// Checks `|D(x)| >= |D(y)|` whenever `|x| <= |y|` on seeded samples of the
/// disk of radius `radius`.
pub fn check_radial_monotonicity(d: &impl Fn([f64; 2]) -> f64, radius: f64, seed: u64) -> Result<()> {
    let mut rng = substream(seed, Stream::Sampling);
    let mut samples: Vec<(f64, f64)> = (0..MONOTONICITY_SAMPLES)
        .map(|k| {
            let rho = if k == 0 { 0.0 } else { radius * rng.random::<f64>().sqrt() };
            let theta = std::f64::consts::TAU * rng.random::<f64>();
            (rho, d([rho * theta.cos(), rho * theta.sin()]).abs())
        })
        .collect();
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let scale = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    let mut running_min = f64::INFINITY;
    for &(rho, v) in &samples {
        if v > running_min + 1e-12 * scale {
            return Err(Error::Precondition(format!(
                "|D| increases with the radius near |x| = {rho:.4}"
            )));
        }
        running_min = running_min.min(v);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaclaurinCauchyReport {
    pub r: f64,
    pub rho: f64,
    pub half_width: f64,
    pub points_inside: usize,
    /// `sum_{gamma in box} |D(gamma)|`.
    pub sum: f64,
    /// `int_{box} |D|`.
    pub integral: f64,
    /// Contribution of the points with `|gamma| < rho`.
    pub k_rho: f64,
    /// `int_{[-rho, rho]^2} |D|`.
    pub integral_rho: f64,
    /// `(r^2 K_rho / 2 (int_{Lambda_rho} |D|)^{-1} + 1) 2 / r^2`.
    pub k_r: f64,
    pub bound: f64,
    pub holds: bool,
}

const QUADRATURE_TOL: f64 = 1e-10;

/// Compares the sum of `|D|` over the points of `centers` inside
/// `[-L, L]^2` with `K_r` times the integral of `|D|` over the box.
///
/// `r` defaults to half the measured minimum spacing; a supplied `r` must
/// not exceed it.
pub fn maclaurin_cauchy_check(
    centers: &[[f64; 2]],
    d: impl Fn([f64; 2]) -> f64,
    half_width: f64,
    r: Option<f64>,
    seed: u64,
) -> Result<MaclaurinCauchyReport> {
    if centers.is_empty() {
        return Err(Error::Precondition("empty point set".into()));
    }
    let spacing = min_pairwise_distance(centers);
    if spacing <= 0.0 {
        return Err(Error::Precondition("point set has coincident points".into()));
    }
    let r = match r {
        Some(r) if !(r > 0.0 && r.is_finite()) => return Err(Error::InvalidTolerance { name: "r", value: r }),
        Some(r) if 2.0 * r > spacing => {
            return Err(Error::Precondition(format!("points closer than 2r: spacing {spacing} < {}", 2.0 * r)))
        }
        Some(r) => r,
        None if spacing.is_finite() => spacing / 2.0,
        None => 1.0,
    };
    if !(half_width > 2.0 * r) {
        return Err(Error::Precondition(format!("box half-width {half_width} must exceed 2r = {}", 2.0 * r)));
    }
    check_radial_monotonicity(&d, half_width * std::f64::consts::SQRT_2, seed)?;
    let rho = 2.0 * r;
    let inside: Vec<&[f64; 2]> = centers.iter().filter(|c| c[0].abs() <= half_width && c[1].abs() <= half_width).collect();
    let sum: f64 = inside.iter().map(|c| d(**c).abs()).sum();
    let k_rho: f64 = inside.iter().filter(|c| c[0].hypot(c[1]) < rho).map(|c| d(**c).abs()).sum();
    let abs_d = |x: [f64; 2]| d(x).abs();
    let integral = integrate_rectangle(abs_d, [-half_width; 2], [half_width; 2], QUADRATURE_TOL);
    let integral_rho = integrate_rectangle(abs_d, [-rho; 2], [rho; 2], QUADRATURE_TOL);
    let k_r = (r * r * k_rho / 2.0 / integral_rho + 1.0) * 2.0 / (r * r);
    let bound = k_r * integral;
    Ok(MaclaurinCauchyReport {
        r,
        rho,
        half_width,
        points_inside: inside.len(),
        sum,
        integral,
        k_rho,
        integral_rho,
        k_r,
        bound,
        holds: sum <= bound,
    })
}
