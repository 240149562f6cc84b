use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::construct::GwbSet;
use super::localization::LocalizationFunction;
use crate::chern::orbital_coordinates;
use crate::error::{Error, Result};
use crate::fit::fit_linear;
use crate::linalg::{compress_diagonal, dagger, max_abs, max_abs_diff, scale_cols, C64};
use crate::spectral::KernelDecayFit;

/// Sup-moment of one localization function across a size sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSweep {
    pub g: LocalizationFunction,
    /// `sup_gamma` moment for each set, in sweep order.
    pub sup_moments: Vec<f64>,
    /// `(max_k M_k - M_0) / M_0`.
    pub growth: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub sizes: Vec<usize>,
    pub polynomial: Vec<MomentSweep>,
    pub exponential: Vec<MomentSweep>,
    /// Largest `s` such that every tested `s' <= s` is stable.
    pub largest_stable_s: Option<f64>,
    /// Largest `alpha` such that every tested `alpha' <= alpha` is stable.
    pub largest_stable_alpha: Option<f64>,
    pub growth_tolerance: f64,
}

impl LocalizationReport {
    pub fn stable_s_at_least(&self, s: f64) -> bool {
        self.largest_stable_s.is_some_and(|v| v >= s)
    }

    pub fn exponentially_localized(&self) -> bool {
        self.largest_stable_alpha.is_some()
    }

    pub fn polynomial_sweep(&self, s: f64) -> Option<&MomentSweep> {
        self.polynomial
            .iter()
            .find(|m| matches!(m.g.kind, super::LocalizationKind::Polynomial { s: v } if v == s))
    }
}

fn sweep(sets: &[&GwbSet], g: LocalizationFunction, tol: f64) -> MomentSweep {
    let sup_moments: Vec<f64> = sets.iter().map(|set| set.max_moment(&g)).collect();
    let first = sup_moments[0];
    let peak = sup_moments.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let growth = (peak - first) / first;
    let stable = sup_moments.iter().all(|m| m.is_finite()) && growth < tol;
    MomentSweep { g, sup_moments, growth, stable }
}

fn largest_prefix(grid: &[f64], sweeps: &[MomentSweep]) -> Option<f64> {
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[a].total_cmp(&grid[b]));
    let mut best = None;
    for i in order {
        if !sweeps[i].stable {
            break;
        }
        best = Some(grid[i]);
    }
    best
}

/// Sup-moments over a size sweep (sets ordered by increasing size).
///
/// A weight is declared stable when its sup-moment grows by less than
/// `growth_tolerance` relative to the smallest size.
pub fn fit_localization(
    sets: &[&GwbSet],
    s_grid: &[f64],
    alpha_grid: &[f64],
    growth_tolerance: f64,
) -> Result<LocalizationReport> {
    if sets.is_empty() || sets.iter().any(|s| s.is_empty()) {
        return Err(Error::Precondition("localization fit needs non-empty Wannier sets".into()));
    }
    let polynomial = s_grid
        .iter()
        .map(|&s| Ok(sweep(sets, LocalizationFunction::polynomial(s)?, growth_tolerance)))
        .collect::<Result<Vec<_>>>()?;
    let exponential = alpha_grid
        .iter()
        .map(|&a| Ok(sweep(sets, LocalizationFunction::exponential(a)?, growth_tolerance)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalizationReport {
        sizes: sets.iter().map(|s| s.geometry().linear_size()).collect(),
        largest_stable_s: largest_prefix(s_grid, &polynomial),
        largest_stable_alpha: largest_prefix(alpha_grid, &exponential),
        polynomial,
        exponential,
        growth_tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinfReport {
    /// Smallest `K` with `|w(x)| <= K G(|x - gamma|)^{-1/2}` for all members.
    pub k_min: f64,
    pub k_candidate: f64,
    pub holds: bool,
    /// `C_G^{1/2} sup_x (sum_y G(|x-y|) |P(x,y)|^2)^{1/2} sup_w M_w^{1/2}`,
    /// the constant produced by the Cauchy-Schwarz argument.
    pub schwarz_bound: f64,
    /// Whether the exponential rate of `G` is below twice the kernel decay rate.
    pub hypothesis_satisfied: Option<bool>,
}

pub fn linf_bound_check(
    set: &GwbSet,
    g: &LocalizationFunction,
    k_candidate: f64,
    decay: Option<&KernelDecayFit>,
) -> LinfReport {
    let geometry = set.geometry();
    let n = geometry.dim();
    let positions: Vec<[f64; 2]> = (0..n).map(|i| geometry.position(i)).collect();
    let dist = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
    let vectors = set.vectors();
    let mut k_min = 0.0_f64;
    for (j, c) in set.centers().iter().enumerate() {
        for (i, r) in positions.iter().enumerate() {
            k_min = k_min.max(vectors[[i, j]].norm() * g.eval(dist(*r, *c)).sqrt());
        }
    }
    let p = set.source().matrix();
    let mut kernel_sup = 0.0_f64;
    for x in 0..n {
        let row: f64 = (0..n).map(|y| g.eval(dist(positions[x], positions[y])) * p[[x, y]].norm_sqr()).sum();
        kernel_sup = kernel_sup.max(row);
    }
    let moment_sup = set.max_moment(g);
    let schwarz_bound = g.c_g.sqrt() * kernel_sup.sqrt() * moment_sup.sqrt();
    LinfReport {
        k_min,
        k_candidate,
        holds: k_min <= k_candidate,
        schwarz_bound,
        hypothesis_satisfied: decay.map(|d| g.exponential_rate() < 2.0 * d.beta),
    }
}

#[derive(Debug, Clone)]
pub struct GammaOperator {
    pub direction: usize,
    pub matrix: Array2<C64>,
}

impl GammaOperator {
    /// `max(|Gamma P - Gamma|, |P Gamma - Gamma|)`.
    pub fn range_defect(&self, p: &ndarray::ArrayView2<C64>) -> f64 {
        let gp = self.matrix.dot(p);
        let pg = p.dot(&self.matrix);
        max_abs_diff(&gp.view(), &self.matrix.view()).max(max_abs_diff(&pg.view(), &self.matrix.view()))
    }
}

/// Largest completeness defect accepted by the Gamma and profile builders.
pub const COMPLETENESS_TOL: f64 = 1e-6;

fn require_complete(set: &GwbSet) -> Result<()> {
    let defect = set.completeness_defect();
    if defect > COMPLETENESS_TOL {
        return Err(Error::IncompleteBasis { defect });
    }
    Ok(())
}

/// `Gamma_i = sum gamma_i |w><w|`.
pub fn gamma_operator(set: &GwbSet, direction: usize) -> Result<GammaOperator> {
    if !(direction == 1 || direction == 2) {
        return Err(Error::InvalidParameter { name: "direction".into(), reason: format!("must be 1 or 2, got {direction}") });
    }
    require_complete(set)?;
    let coords: Vec<f64> = set.centers().iter().map(|c| c[direction - 1]).collect();
    let w = set.vectors();
    let matrix = scale_cols(&w, &coords).dot(&dagger(&w));
    Ok(GammaOperator { direction, matrix })
}

/// `max |[Gamma_1, Gamma_2]|`.
pub fn gamma_commutator_defect(g1: &GammaOperator, g2: &GammaOperator) -> f64 {
    let ab = g1.matrix.dot(&g2.matrix);
    let ba = g2.matrix.dot(&g1.matrix);
    max_abs(&(&ab - &ba).view())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    pub k_s: f64,
    /// `p` in `F(t) = k_s <t>^{-p}`.
    pub exponent: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffDiagonalProfile {
    pub direction: usize,
    /// `(|gamma - eta|, sum_{a,b} |<w_{gamma,a}, (X_i - gamma_i) w_{eta,b}>|)`
    /// over all ordered pairs of distinct centers, then the diagonal terms.
    pub samples: Vec<(f64, f64)>,
    pub s: f64,
    pub epsilon: f64,
    /// `s - 2 - epsilon`, the exponent of the envelope implied by `s`-localization.
    pub model_exponent: f64,
    pub fitted: Option<EnvelopeFit>,
    /// Truncated lattice sums `max_gamma sum_eta S`, `S^2` and `S |gamma - eta|`.
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
}

/// Off-diagonal matrix elements of `X_i` in the Wannier basis, aggregated per
/// pair of centers, with the power-law envelope `k_s <t>^{-p}` fitted on the
/// binned maxima at distance >= 1.
pub fn off_diagonal_profile(set: &GwbSet, direction: usize, s: f64) -> Result<OffDiagonalProfile> {
    if !(direction == 1 || direction == 2) {
        return Err(Error::InvalidParameter { name: "direction".into(), reason: format!("must be 1 or 2, got {direction}") });
    }
    require_complete(set)?;
    let axis = direction - 1;
    let x = orbital_coordinates(set.geometry(), axis);
    let m = compress_diagonal(&set.vectors(), &x);
    let centers = set.distinct_centers();
    let nc = centers.len();
    let of = set.center_indices();
    let mut agg = Array2::<f64>::zeros((nc, nc));
    for a in 0..set.len() {
        let ga = of[a];
        let shift = centers[ga][axis];
        for b in 0..set.len() {
            let mut z = m[[a, b]];
            if a == b {
                z -= shift;
            }
            agg[[ga, of[b]]] += z.norm();
        }
    }
    let dist = |a: usize, b: usize| (centers[a][0] - centers[b][0]).hypot(centers[a][1] - centers[b][1]);
    let mut samples = Vec::with_capacity(nc * nc);
    let (mut i1, mut i2, mut i3) = (0.0_f64, 0.0_f64, 0.0_f64);
    for g in 0..nc {
        let (mut r1, mut r2, mut r3) = (0.0, 0.0, 0.0);
        for h in 0..nc {
            let v = agg[[g, h]];
            let d = dist(g, h);
            if g != h {
                samples.push((d, v));
            }
            r1 += v;
            r2 += v * v;
            r3 += v * d;
        }
        i1 = i1.max(r1);
        i2 = i2.max(r2);
        i3 = i3.max(r3);
    }
    samples.extend((0..nc).map(|g| (0.0, agg[[g, g]])));
    let epsilon = (s - 2.0) / 100.0;
    Ok(OffDiagonalProfile {
        direction,
        fitted: fit_envelope(&samples),
        samples,
        s,
        epsilon,
        model_exponent: s - 2.0 - epsilon,
        i1,
        i2,
        i3,
    })
}

fn fit_envelope(samples: &[(f64, f64)]) -> Option<EnvelopeFit> {
    let mut bins: Vec<f64> = Vec::new();
    for &(d, v) in samples {
        if d < 1.0 || v <= 1e-14 {
            continue;
        }
        let b = d.floor() as usize;
        if bins.len() <= b {
            bins.resize(b + 1, 0.0);
        }
        bins[b] = bins[b].max(v);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = bins
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(b, &v)| {
            let t = b as f64 + 0.5;
            ((1.0 + t * t).sqrt().ln(), v.ln())
        })
        .unzip();
    let fit = fit_linear(&xs, &ys).ok()?;
    Some(EnvelopeFit { k_s: fit.intercept.exp(), exponent: -fit.slope, residual: fit.residual })
}
