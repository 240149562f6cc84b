use std::f64::consts::TAU;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::chern::{orbital_coordinates, BoxRestriction};
use crate::error::{Error, Result};
use crate::fit::{fit_proportional, power_law_exponent, LinearFit};
use crate::gwb::{gamma_operator, GwbSet};
use crate::linalg::{diag_of_product, scale_rows, C64};
use crate::spectral::Projector;

/// Decomposition traces below this value per unit length of the box
/// boundary are treated as zero when fitting growth exponents.
pub const PERIMETER_NOISE_FLOOR: f64 = 1e-5;

/// Mass sums below this value are treated as zero when fitting exponents.
pub const MASS_NOISE_FLOOR: f64 = 1e-9;

/// Marker traces per unit box area below this value count as zero when
/// fitting the trace-bound exponent.
pub const AREA_NOISE_FLOOR: f64 = 1e-6;

/// `diag(i[A, B])` for Hermitian `A`, `B`.
fn commutator_density(a: &Array2<C64>, b: &Array2<C64>) -> Vec<f64> {
    diag_of_product(&a.view(), &b.view()).into_iter().map(|z| -2.0 * z.im).collect()
}

fn validate_boxes(l_values: &[f64]) -> Result<()> {
    if l_values.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: l_values.len() });
    }
    if l_values[0] <= 0.0 || l_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::UnorderedBoxes);
    }
    Ok(())
}

fn exponent(l_values: &[f64], values: &[f64], floor: impl Fn(f64) -> f64) -> Result<f64> {
    Ok(power_law_exponent(l_values, values, floor)?.slope)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub l_values: Vec<f64>,
    /// `Tr(chi_L i T_j)` for `j = 1, 2, 3`, indexed `[j - 1][L]`.
    pub traces: [Vec<f64>; 3],
    /// The same traces times `2 pi / 4L^2`.
    pub normalized: [Vec<f64>; 3],
    /// Growth exponents `p_j` of `|Tr(chi_L T_j)| ~ L^p_j`.
    pub exponents: [f64; 3],
    /// `Tr(chi_L i[X1~, X2~])` per box.
    pub reduced_commutator: Vec<f64>,
    /// `Tr(chi_L i[Gamma_1, Gamma_2])` per box.
    pub gamma_commutator: Vec<f64>,
    /// `max_L |sum_j Tr(chi_L T_j) - Tr(chi_L ([X1~, X2~] - [Gamma_1, Gamma_2]))|`.
    pub identity_defect: f64,
}

impl DecompositionReport {
    /// `(2 pi / 4L^2) sum_j Tr(chi_L i T_j)` per box.
    pub fn normalized_sum(&self) -> Vec<f64> {
        (0..self.l_values.len()).map(|k| self.normalized.iter().map(|t| t[k]).sum()).collect()
    }
}

/// Splits `[X1~, X2~] - [Gamma_1, Gamma_2]` into
/// `T1 = [X1~ - Gamma_1, X2~ - Gamma_2]`, `T2 = [X1~ - Gamma_1, Gamma_2]` and
/// `T3 = [Gamma_1, X2~ - Gamma_2]`, and traces each over the boxes.
pub fn commutator_decomposition(p: &Projector, set: &GwbSet, l_values: &[f64]) -> Result<DecompositionReport> {
    validate_boxes(l_values)?;
    let geometry = p.geometry();
    let boxes = l_values
        .iter()
        .map(|&l| BoxRestriction::new(geometry, l))
        .collect::<Result<Vec<_>>>()?;
    let g1 = gamma_operator(set, 1)?.matrix;
    let g2 = gamma_operator(set, 2)?.matrix;
    let pm = p.matrix();
    let xt1 = pm.dot(&scale_rows(&orbital_coordinates(geometry, 0), &pm));
    let xt2 = pm.dot(&scale_rows(&orbital_coordinates(geometry, 1), &pm));
    let d1 = &xt1 - &g1;
    let d2 = &xt2 - &g2;
    let densities = [
        commutator_density(&d1, &d2),
        commutator_density(&d1, &g2),
        commutator_density(&g1, &d2),
    ];
    let reduced = commutator_density(&xt1, &xt2);
    let gamma = commutator_density(&g1, &g2);

    let traces: [Vec<f64>; 3] = std::array::from_fn(|j| boxes.iter().map(|b| b.restrict_sum(&densities[j])).collect());
    let normalized: [Vec<f64>; 3] = std::array::from_fn(|j| {
        traces[j].iter().zip(&boxes).map(|(t, b)| TAU * t / b.area()).collect()
    });
    let reduced_commutator: Vec<f64> = boxes.iter().map(|b| b.restrict_sum(&reduced)).collect();
    let gamma_commutator: Vec<f64> = boxes.iter().map(|b| b.restrict_sum(&gamma)).collect();
    let identity_defect = (0..boxes.len())
        .map(|k| {
            let sum: f64 = traces.iter().map(|t| t[k]).sum();
            (sum - (reduced_commutator[k] - gamma_commutator[k])).abs()
        })
        .fold(0.0, f64::max);
    let mut exponents = [0.0; 3];
    for j in 0..3 {
        exponents[j] = exponent(l_values, &traces[j], |l| PERIMETER_NOISE_FLOOR * 8.0 * l)?;
    }
    Ok(DecompositionReport {
        l_values: l_values.to_vec(),
        traces,
        normalized,
        exponents,
        reduced_commutator,
        gamma_commutator,
        identity_defect,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassEstimates {
    pub l_values: Vec<f64>,
    /// `sum_{xi in box} |chi_{outside} w_xi|` per box.
    pub mass_out: Vec<f64>,
    /// `sum_{xi outside box} |chi_{box} w_xi|` per box.
    pub mass_in: Vec<f64>,
    /// Fits `mass = I * L`.
    pub fit_out: LinearFit,
    pub fit_in: LinearFit,
    /// Root-mean-square residual relative to the mean mass.
    pub relative_residual_out: f64,
    pub relative_residual_in: f64,
    pub exponent_out: f64,
    pub exponent_in: f64,
}

fn relative_residual(fit: &LinearFit, values: &[f64]) -> f64 {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if mean == 0.0 {
        0.0
    } else {
        fit.residual / mean
    }
}

/// Mass-out and mass-in sums of a Wannier set over boxes centered at the origin.
pub fn mass_estimates(set: &GwbSet, l_values: &[f64]) -> Result<MassEstimates> {
    validate_boxes(l_values)?;
    let geometry = set.geometry();
    let w = set.vectors();
    let mut mass_out = Vec::with_capacity(l_values.len());
    let mut mass_in = Vec::with_capacity(l_values.len());
    for &l in l_values {
        let b = BoxRestriction::new(geometry, l)?;
        let (mut out, mut inn) = (0.0, 0.0);
        for (j, c) in set.centers().iter().enumerate() {
            let center_inside = c.iter().all(|v| v.abs() <= l + 1e-9);
            let col = w.column(j);
            let weight: f64 = col
                .iter()
                .enumerate()
                .filter(|&(i, _)| b.contains_index(i) != center_inside)
                .map(|(_, z)| z.norm_sqr())
                .sum();
            if center_inside {
                out += weight.sqrt();
            } else {
                inn += weight.sqrt();
            }
        }
        mass_out.push(out);
        mass_in.push(inn);
    }
    let fit_out = fit_proportional(l_values, &mass_out)?;
    let fit_in = fit_proportional(l_values, &mass_in)?;
    Ok(MassEstimates {
        l_values: l_values.to_vec(),
        relative_residual_out: relative_residual(&fit_out, &mass_out),
        relative_residual_in: relative_residual(&fit_in, &mass_in),
        exponent_out: exponent(l_values, &mass_out, |_| MASS_NOISE_FLOOR)?,
        exponent_in: exponent(l_values, &mass_in, |_| MASS_NOISE_FLOOR)?,
        mass_out,
        mass_in,
        fit_out,
        fit_in,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceBoundReport {
    pub l_values: Vec<f64>,
    /// `|Tr(chi_L c_P chi_L)|` per box.
    pub traces: Vec<f64>,
    pub exponent: f64,
    pub exponent_limit: f64,
    pub holds: bool,
}

/// Largest accepted growth exponent of the boxed marker trace.
pub const TRACE_EXPONENT_LIMIT: f64 = 2.2;

/// Growth of `|Tr(chi_L i P[[X1, P], [X2, P]] chi_L)|` with the box size.
///
/// Values below [`AREA_NOISE_FLOOR`] per unit box area are clamped to that
/// level before the log-log fit.
pub fn trace_bound_check(p: &Projector, l_values: &[f64]) -> Result<TraceBoundReport> {
    validate_boxes(l_values)?;
    let density = crate::chern::marker_density(p)?;
    let traces = l_values
        .iter()
        .map(|&l| Ok(BoxRestriction::new(p.geometry(), l)?.restrict_sum(&density).abs()))
        .collect::<Result<Vec<_>>>()?;
    let exponent = exponent(l_values, &traces, |l| AREA_NOISE_FLOOR * 4.0 * l * l)?;
    Ok(TraceBoundReport {
        l_values: l_values.to_vec(),
        traces,
        exponent,
        exponent_limit: TRACE_EXPONENT_LIMIT,
        holds: exponent <= TRACE_EXPONENT_LIMIT,
    })
}

/// `max |P - conj(P)|` in the site basis.
pub fn trs_defect(p: &Projector) -> f64 {
    p.matrix().iter().fold(0.0, |m, z| m.max(2.0 * z.im.abs()))
}
