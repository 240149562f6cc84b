//! Chern marker on interior boxes, its commutator form, switch-function Hall
//! conductance and the Bloch Chern number.
//!
//! Orientation: `x1, x2` form a right-handed frame and the marker is
//! `2 pi / (4 L^2) Tr(chi_L i P[[X1, P], [X2, P]] P chi_L)`. With this sign
//! the lowest band of the Hofstadter model at flux `+1/q` has Chern number
//! `+1`, and the Bloch oracle is oriented to agree with the marker.

use std::f64::consts::TAU;
use std::ops::Range;

use ndarray::{s, Array2, ArrayView2};
use ndarray_linalg::Determinant;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_linear, LinearFit};
use crate::lattice::{grid_point, BlochHamiltonian, SiteGeometry};
use crate::linalg::{dagger, diag_of_product, diagonal_commutator, eigh, scale_rows, C64};
use crate::spectral::{per_site_sum, Projector};

/// Sign applied to the plaquette sum of the Bloch oracle.
const BLOCH_ORIENTATION: f64 = 1.0;

/// Smallest direct gap accepted by the Bloch oracle.
pub const MIN_DIRECT_GAP: f64 = 1e-8;

/// Characteristic function of `center + [-L, L]^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRestriction {
    pub half_width: f64,
    pub center: [f64; 2],
    /// 0/1 diagonal, one entry per matrix index.
    pub mask: Vec<f64>,
    pub sites_inside: usize,
}

impl BoxRestriction {
    pub fn new(geometry: &SiteGeometry, half_width: f64) -> Result<Self> {
        Self::centered_at(geometry, half_width, [0.0, 0.0])
    }

    /// Box around `center`, which must lie strictly inside the sample.
    pub fn centered_at(geometry: &SiteGeometry, half_width: f64, center: [f64; 2]) -> Result<Self> {
        require_2d(geometry)?;
        let room = (0..2)
            .map(|a| {
                let (lo, hi) = geometry.extent(a);
                (center[a] - lo).min(hi - center[a])
            })
            .fold(f64::INFINITY, f64::min);
        if !(half_width > 0.0 && half_width < room) {
            return Err(Error::BoxExceedsSample { half_width, sample_half_width: room });
        }
        let inside_site: Vec<bool> = geometry
            .sites()
            .iter()
            .map(|r| (0..2).all(|a| (r[a] - center[a]).abs() <= half_width + 1e-9))
            .collect();
        let orbitals = geometry.orbitals_per_site();
        let mask = (0..geometry.dim())
            .map(|i| if inside_site[i / orbitals] { 1.0 } else { 0.0 })
            .collect();
        Ok(Self {
            half_width,
            center,
            mask,
            sites_inside: inside_site.iter().filter(|&&b| b).count(),
        })
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_width * self.half_width
    }

    pub fn matrix(&self) -> Array2<C64> {
        Array2::from_diag(&self.mask.iter().map(|&m| C64::from(m)).collect::<ndarray::Array1<_>>())
    }

    pub fn contains_index(&self, i: usize) -> bool {
        self.mask[i] != 0.0
    }

    /// `sum_{i in box} values[i]`.
    pub fn restrict_sum(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.mask).map(|(v, m)| v * m).sum()
    }
}

fn require_2d(geometry: &SiteGeometry) -> Result<()> {
    if geometry.dimension() != 2 {
        return Err(Error::WrongDimension { expected: 2, found: geometry.dimension() });
    }
    Ok(())
}

fn validate_l_values(l_values: &[f64]) -> Result<()> {
    if l_values.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: l_values.len() });
    }
    if l_values[0] <= 0.0 || l_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::UnorderedBoxes);
    }
    Ok(())
}

/// Per-orbital diagonal of `i P[[X1, P], [X2, P]] P` (real).
pub fn marker_density(p: &Projector) -> Result<Vec<f64>> {
    let geometry = p.geometry();
    require_2d(geometry)?;
    let x1 = orbital_coordinates(geometry, 0);
    let x2 = orbital_coordinates(geometry, 1);
    let pm = p.matrix();
    let a1 = diagonal_commutator(&x1, &pm);
    let a2 = diagonal_commutator(&x2, &pm);
    // [A1, A2] = K - K^dagger for anti-Hermitian A1, A2.
    let k = a1.dot(&a2);
    let c = &k - &dagger(&k.view());
    let pc = pm.dot(&c);
    Ok(diag_of_product(&pc.view(), &pm).into_iter().map(|z| -z.im).collect())
}

/// Coordinate of every matrix index along `axis`.
pub(crate) fn orbital_coordinates(geometry: &SiteGeometry, axis: usize) -> Vec<f64> {
    (0..geometry.dim()).map(|i| geometry.position(i)[axis]).collect()
}

/// Per-site marker `2 pi * sum_orbitals diag(i P[[X1,P],[X2,P]] P)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalChernMap {
    pub positions: Vec<[f64; 2]>,
    pub values: Vec<f64>,
}

impl LocalChernMap {
    /// Mean of the map over the sites within `frac` of the sample half-width
    /// around the center.
    pub fn bulk_average(&self, geometry: &SiteGeometry, frac: f64) -> f64 {
        let c = geometry.center();
        let reach = frac * geometry.half_width();
        let picked: Vec<f64> = self
            .positions
            .iter()
            .zip(&self.values)
            .filter(|(r, _)| (r[0] - c[0]).abs() <= reach && (r[1] - c[1]).abs() <= reach)
            .map(|(_, &v)| v)
            .collect();
        picked.iter().sum::<f64>() / picked.len().max(1) as f64
    }
}

pub fn local_chern_map(p: &Projector) -> Result<LocalChernMap> {
    let density = marker_density(p)?;
    Ok(local_map_from_density(p.geometry(), &density))
}

fn local_map_from_density(geometry: &SiteGeometry, density: &[f64]) -> LocalChernMap {
    LocalChernMap {
        positions: geometry.sites().to_vec(),
        values: per_site_sum(geometry, density).into_iter().map(|v| TAU * v).collect(),
    }
}

/// `(L, t_L)` pairs with their `1/L` extrapolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuvSequence {
    pub entries: Vec<(f64, f64)>,
    pub extrapolated: f64,
    pub model_fit: LinearFit,
}

/// Intercept of the least-squares fit `t_L = t_inf + a / L`.
pub fn tuv_extrapolate(entries: &[(f64, f64)]) -> Result<(f64, LinearFit)> {
    if entries.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: entries.len() });
    }
    let xs: Vec<f64> = entries.iter().map(|(l, _)| 1.0 / l).collect();
    let ys: Vec<f64> = entries.iter().map(|(_, t)| *t).collect();
    let fit = fit_linear(&xs, &ys)?;
    Ok((fit.intercept, fit))
}

pub fn chern_marker_boxed(p: &Projector, l_values: &[f64]) -> Result<TuvSequence> {
    chern_marker_boxed_at(p, l_values, [0.0, 0.0])
}

pub fn chern_marker_boxed_at(p: &Projector, l_values: &[f64], center: [f64; 2]) -> Result<TuvSequence> {
    let density = marker_density(p)?;
    sequence_from_density(p.geometry(), &density, l_values, center)
}

fn sequence_from_density(
    geometry: &SiteGeometry,
    density: &[f64],
    l_values: &[f64],
    center: [f64; 2],
) -> Result<TuvSequence> {
    validate_l_values(l_values)?;
    let map = local_map_from_density(geometry, density);
    let mut entries = Vec::with_capacity(l_values.len());
    for &l in l_values {
        let b = BoxRestriction::centered_at(geometry, l, center)?;
        let total: f64 = map
            .positions
            .iter()
            .zip(&map.values)
            .filter(|(r, _)| (0..2).all(|a| (r[a] - center[a]).abs() <= l + 1e-9))
            .map(|(_, v)| v)
            .sum();
        entries.push((l, total / b.area()));
    }
    let (extrapolated, model_fit) = tuv_extrapolate(&entries)?;
    Ok(TuvSequence { entries, extrapolated, model_fit })
}

/// `n * max|X|^2`, the natural scale of the commutator identity defect.
pub fn identity_scale(geometry: &SiteGeometry) -> f64 {
    let xmax = geometry
        .sites()
        .iter()
        .flat_map(|r| r.iter().map(|v| v.abs()))
        .fold(0.0_f64, f64::max);
    geometry.dim() as f64 * xmax * xmax
}

/// `|Tr(chi c_P chi) - Tr(chi i[X1~, X2~] chi)|` with `Xj~ = P Xj P`.
pub fn commutator_identity_defect(p: &Projector, half_width: f64) -> Result<f64> {
    let b = BoxRestriction::new(p.geometry(), half_width)?;
    let density = marker_density(p)?;
    let lhs = b.restrict_sum(&density);
    let rhs = b.restrict_sum(&reduced_position_density(p)?);
    Ok((lhs - rhs).abs())
}

/// Per-orbital diagonal of `i [P X1 P, P X2 P]`.
pub fn reduced_position_density(p: &Projector) -> Result<Vec<f64>> {
    let geometry = p.geometry();
    require_2d(geometry)?;
    let pm = p.matrix();
    let xt1 = pm.dot(&scale_rows(&orbital_coordinates(geometry, 0), &pm));
    let xt2 = pm.dot(&scale_rows(&orbital_coordinates(geometry, 1), &pm));
    // diag(i[A, B]) = -2 Im diag(A B) for Hermitian A, B.
    Ok(diag_of_product(&xt1.view(), &xt2.view()).into_iter().map(|z| -2.0 * z.im).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SwitchProfile {
    /// 0 below `position`, 1 above, 1/2 exactly at it.
    Step { position: f64 },
    /// `(1 + tanh(steepness (x - position))) / 2`.
    Tanh { position: f64, steepness: f64 },
    /// Explicit per-site values.
    Sampled { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchFunction {
    pub direction: usize,
    pub profile: SwitchProfile,
}

impl SwitchFunction {
    pub fn step(direction: usize, position: f64) -> Self {
        Self { direction, profile: SwitchProfile::Step { position } }
    }

    pub fn tanh(direction: usize, position: f64, steepness: f64) -> Self {
        Self { direction, profile: SwitchProfile::Tanh { position, steepness } }
    }

    /// Coordinate where the profile passes 1/2.
    pub fn crossing(&self, geometry: &SiteGeometry) -> Result<f64> {
        match &self.profile {
            SwitchProfile::Step { position } | SwitchProfile::Tanh { position, .. } => Ok(*position),
            SwitchProfile::Sampled { .. } => {
                let values = self.site_values(geometry)?;
                let axis = self.direction - 1;
                let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
                let mut best: Option<(f64, f64)> = None;
                for (r, v) in geometry.sites().iter().zip(&values) {
                    let d = (v - lo - 0.5).abs();
                    if best.is_none_or(|(bd, _)| d < bd) {
                        best = Some((d, r[axis]));
                    }
                }
                Ok(best.map(|(_, x)| x).unwrap_or(0.0))
            }
        }
    }

    /// Per-site profile values, validated to be monotone with unit increment.
    pub fn site_values(&self, geometry: &SiteGeometry) -> Result<Vec<f64>> {
        if !(self.direction == 1 || self.direction == 2) {
            return Err(Error::InvalidParameter {
                name: "switch.direction".into(),
                reason: format!("must be 1 or 2, got {}", self.direction),
            });
        }
        let axis = self.direction - 1;
        let coords: Vec<f64> = geometry.sites().iter().map(|r| r[axis]).collect();
        let values: Vec<f64> = match &self.profile {
            SwitchProfile::Step { position } => coords
                .iter()
                .map(|&x| match x.partial_cmp(position) {
                    Some(std::cmp::Ordering::Less) => 0.0,
                    Some(std::cmp::Ordering::Greater) => 1.0,
                    _ => 0.5,
                })
                .collect(),
            SwitchProfile::Tanh { position, steepness } => {
                if !(*steepness > 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "switch.steepness".into(),
                        reason: "must be positive".into(),
                    });
                }
                coords.iter().map(|&x| 0.5 * (1.0 + (steepness * (x - position)).tanh())).collect()
            }
            SwitchProfile::Sampled { values } => {
                if values.len() != coords.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "{} switch samples for {} sites",
                        values.len(),
                        coords.len()
                    )));
                }
                values.clone()
            }
        };
        let mut order: Vec<usize> = (0..coords.len()).collect();
        order.sort_by(|&a, &b| coords[a].total_cmp(&coords[b]));
        for w in order.windows(2) {
            let (a, b) = (w[0], w[1]);
            let bad = if coords[a] == coords[b] { values[a] != values[b] } else { values[b] < values[a] };
            if bad {
                return Err(Error::Precondition(format!(
                    "switch function is not monotone non-decreasing near x{} = {}",
                    self.direction, coords[b]
                )));
            }
        }
        let lo = values[order[0]];
        let hi = values[*order.last().unwrap()];
        if ((hi - lo) - 1.0).abs() > 1e-10 {
            return Err(Error::Precondition(format!(
                "switch function increases by {} across the sample instead of 1",
                hi - lo
            )));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HallConductance {
    /// `Tr(chi_W i P[[P, L1], [P, L2]] P chi_W)` over the window `W` around
    /// the crossing point of the two switches.
    pub trace: f64,
    /// `2 pi` times the windowed trace, directly comparable with a Chern number.
    pub chern_estimate: f64,
    pub window_half_width: f64,
    /// The same trace over the whole sample. On a finite sample it vanishes
    /// identically by cyclicity, so only the windowed value carries the Hall
    /// response.
    pub full_trace: f64,
}

/// Switch-function conductance with a window of half the sample half-width.
pub fn hall_conductance_switch(p: &Projector, s1: &SwitchFunction, s2: &SwitchFunction) -> Result<HallConductance> {
    let window = 0.5 * p.geometry().half_width();
    hall_conductance_switch_in(p, s1, s2, window)
}

pub fn hall_conductance_switch_in(
    p: &Projector,
    s1: &SwitchFunction,
    s2: &SwitchFunction,
    window: f64,
) -> Result<HallConductance> {
    let geometry = p.geometry();
    require_2d(geometry)?;
    if s1.direction != 1 || s2.direction != 2 {
        return Err(Error::InvalidParameter {
            name: "switch.direction".into(),
            reason: "expected switches along directions 1 and 2".into(),
        });
    }
    let crossing = [s1.crossing(geometry)?, s2.crossing(geometry)?];
    let b = BoxRestriction::centered_at(geometry, window, crossing)?;
    let orbitals = geometry.orbitals_per_site();
    let expand = |v: Vec<f64>| -> Vec<f64> { v.into_iter().flat_map(|x| std::iter::repeat_n(x, orbitals)).collect() };
    let l1 = expand(s1.site_values(geometry)?);
    let l2 = expand(s2.site_values(geometry)?);
    let pm = p.matrix();
    // [P, L] = -[L, P]; the two signs cancel in the double commutator.
    let b1 = diagonal_commutator(&l1, &pm);
    let b2 = diagonal_commutator(&l2, &pm);
    let k = b1.dot(&b2);
    let c = &k - &dagger(&k.view());
    let pc = pm.dot(&c);
    let density: Vec<f64> = diag_of_product(&pc.view(), &pm).into_iter().map(|z| -z.im).collect();
    let trace = b.restrict_sum(&density);
    Ok(HallConductance {
        trace,
        chern_estimate: TAU * trace,
        window_half_width: window,
        full_trace: density.iter().sum(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochChern {
    pub chern: i64,
    /// Distance of the unrounded plaquette sum from `chern`.
    pub residual: f64,
    pub grid: usize,
    /// Smallest direct gap between the band range and the other bands.
    pub min_gap: f64,
}

/// Link-variable (plaquette) Chern number of the bands `bands`, doubling the
/// grid until the unrounded sum lies within 0.05 of an integer.
pub fn bloch_chern_number(bh: &BlochHamiltonian, bands: Range<usize>, grid: usize) -> Result<BlochChern> {
    if grid < 6 {
        return Err(Error::InvalidParameter { name: "k_grid".into(), reason: format!("must be >= 6, got {grid}") });
    }
    if bh.dimension() != 2 {
        return Err(Error::WrongDimension { expected: 2, found: bh.dimension() });
    }
    let nb = bh.num_bands();
    if bands.start >= bands.end || bands.end > nb {
        return Err(Error::InvalidParameter {
            name: "band_range".into(),
            reason: format!("{}..{} is not a non-empty range within {nb} bands", bands.start, bands.end),
        });
    }
    let mut g = grid;
    loop {
        let result = plaquette_sum(bh, &bands, g)?;
        if result.residual < 0.05 || g >= grid * 8 {
            return Ok(result);
        }
        g *= 2;
    }
}

fn plaquette_sum(bh: &BlochHamiltonian, bands: &Range<usize>, g: usize) -> Result<BlochChern> {
    let nb = bh.num_bands();
    let mut frames: Vec<Array2<C64>> = Vec::with_capacity(g * g);
    let mut min_gap = f64::INFINITY;
    for j in 0..g {
        for i in 0..g {
            let k = grid_point(i, j, g, g);
            let (e, v) = eigh(&bh.at(k).view())?;
            let mut gap = f64::INFINITY;
            if bands.start > 0 {
                gap = gap.min(e[bands.start] - e[bands.start - 1]);
            }
            if bands.end < nb {
                gap = gap.min(e[bands.end] - e[bands.end - 1]);
            }
            if gap <= MIN_DIRECT_GAP {
                return Err(Error::BandCrossing { k1: k[0], k2: k[1], gap });
            }
            min_gap = min_gap.min(gap);
            frames.push(v.slice(s![.., bands.clone()]).to_owned());
        }
    }
    let at = |i: usize, j: usize| &frames[(j % g) * g + (i % g)];
    let link = |a: &Array2<C64>, b: &Array2<C64>| -> Result<C64> {
        let overlap = dagger(&a.view()).dot(b);
        let d = overlap.det().map_err(|e| Error::Eigensolver(e.to_string()))?;
        if d.norm() < 1e-14 {
            return Err(Error::Precondition("vanishing link variable; refine the k-grid".into()));
        }
        Ok(d / d.norm())
    };
    let mut total = 0.0;
    for j in 0..g {
        for i in 0..g {
            let u1 = link(at(i, j), at(i + 1, j))?;
            let u2 = link(at(i + 1, j), at(i + 1, j + 1))?;
            let u3 = link(at(i, j + 1), at(i + 1, j + 1))?;
            let u4 = link(at(i, j), at(i, j + 1))?;
            total += (u1 * u2 / (u3 * u4)).arg();
        }
    }
    let raw = BLOCH_ORIENTATION * total / TAU;
    let chern = raw.round();
    Ok(BlochChern { chern: chern as i64, residual: (raw - chern).abs(), grid: g, min_gap })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChernReport {
    pub marker: f64,
    pub sequence: TuvSequence,
    pub commutator_identity_defect: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub local_map: Option<LocalChernMap>,
    pub oracle_chern: Option<i64>,
}

/// Marker sequence, identity defect at the smallest box and optional local map.
pub fn chern_report(p: &Projector, l_values: &[f64], oracle: Option<i64>, with_map: bool) -> Result<ChernReport> {
    let density = marker_density(p)?;
    let sequence = sequence_from_density(p.geometry(), &density, l_values, [0.0, 0.0])?;
    let b = BoxRestriction::new(p.geometry(), l_values[0])?;
    let defect = (b.restrict_sum(&density) - b.restrict_sum(&reduced_position_density(p)?)).abs();
    Ok(ChernReport {
        marker: sequence.extrapolated,
        sequence,
        commutator_identity_defect: defect,
        local_map: with_map.then(|| local_map_from_density(p.geometry(), &density)),
        oracle_chern: oracle,
    })
}

/// `Tr(chi_L A chi_L)` for a dense matrix.
pub fn boxed_trace(a: &ArrayView2<C64>, b: &BoxRestriction) -> C64 {
    a.diag().iter().zip(&b.mask).map(|(z, m)| z * *m).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Boundary, CellModel};
    use crate::linalg::identity;
    use std::sync::Arc;

    fn square(n: usize) -> Arc<SiteGeometry> {
        let off = (n as f64 - 1.0) / 2.0;
        let sites = (0..n * n).map(|i| [(i % n) as f64 - off, (i / n) as f64 - off]).collect();
        Arc::new(SiteGeometry::new(2, sites, 1, n, Boundary::Open).unwrap())
    }

    #[test]
    fn identity_projector_has_zero_marker() {
        let g = square(8);
        let p = Projector::from_frame(identity(64), g).unwrap();
        let seq = chern_marker_boxed(&p, &[1.0, 2.0, 3.0]).unwrap();
        assert!(seq.entries.iter().all(|(_, t)| *t == 0.0));
        assert_eq!(seq.extrapolated, 0.0);
    }

    #[test]
    fn single_site_projector_has_zero_marker() {
        let g = square(6);
        let mut frame = Array2::<C64>::zeros((36, 1));
        frame[[14, 0]] = C64::from(1.0);
        let p = Projector::from_frame(frame, g).unwrap();
        let seq = chern_marker_boxed(&p, &[1.0, 2.0]).unwrap();
        assert!(seq.entries.iter().all(|(_, t)| *t == 0.0));
    }

    #[test]
    fn boxes_must_be_interior_and_increasing() {
        let g = square(6);
        let p = Projector::from_frame(identity(36), g).unwrap();
        assert!(matches!(chern_marker_boxed(&p, &[1.0, 3.0]), Err(Error::BoxExceedsSample { .. })));
        assert!(matches!(chern_marker_boxed(&p, &[2.0, 1.0]), Err(Error::UnorderedBoxes)));
        assert!(matches!(chern_marker_boxed(&p, &[1.0]), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn one_dimensional_geometry_rejected() {
        let sites = (0..4).map(|i| [i as f64, 0.0]).collect();
        let g = Arc::new(SiteGeometry::new(1, sites, 1, 4, Boundary::Open).unwrap());
        let p = Projector::from_frame(identity(4), g).unwrap();
        assert!(matches!(chern_marker_boxed(&p, &[0.5, 1.0]), Err(Error::WrongDimension { .. })));
    }

    #[test]
    fn box_mask_counts_sites() {
        let g = square(6);
        let b = BoxRestriction::new(&g, 1.0).unwrap();
        assert_eq!(b.sites_inside, 4);
        assert_eq!(b.mask.iter().sum::<f64>(), 4.0);
    }

    #[test]
    fn exact_extrapolation() {
        let (c, _) = tuv_extrapolate(&[(4.0, 1.0 + 3.0 / 4.0), (8.0, 1.0 + 3.0 / 8.0)]).unwrap();
        assert!((c - 1.0).abs() < 1e-14);
        let (c, _) = tuv_extrapolate(&[(2.0, 0.3), (3.0, 0.3), (5.0, 0.3)]).unwrap();
        assert!((c - 0.3).abs() < 1e-14);
        assert!(tuv_extrapolate(&[(2.0, 0.3)]).is_err());
    }

    #[test]
    fn switch_identity_projector_vanishes() {
        let g = square(6);
        let p = Projector::from_frame(identity(36), g).unwrap();
        let h = hall_conductance_switch(&p, &SwitchFunction::step(1, 0.0), &SwitchFunction::step(2, 0.0)).unwrap();
        assert_eq!(h.trace, 0.0);
    }

    #[test]
    fn non_monotone_switch_rejected() {
        let g = square(4);
        let mut values: Vec<f64> = g.sites().iter().map(|r| if r[0] > 0.0 { 1.0 } else { 0.0 }).collect();
        values[0] = 1.0;
        let s1 = SwitchFunction { direction: 1, profile: SwitchProfile::Sampled { values } };
        assert!(s1.site_values(&g).is_err());
    }

    #[test]
    fn atomic_bands_have_zero_chern() {
        let cell = CellModel {
            dimension: 2,
            extent: [1, 1],
            basis: vec![[0.0, 0.0]],
            orbitals: 2,
            onsite: vec![-1.0, 1.0],
            hops: vec![],
        };
        let bh = BlochHamiltonian::new(cell).unwrap();
        let c = bloch_chern_number(&bh, 0..1, 8).unwrap();
        assert_eq!(c.chern, 0);
        assert!(c.residual < 1e-12);
    }

    #[test]
    fn degenerate_bands_are_reported_as_crossing() {
        let cell = CellModel {
            dimension: 2,
            extent: [1, 1],
            basis: vec![[0.0, 0.0]],
            orbitals: 2,
            onsite: vec![0.0, 0.0],
            hops: vec![],
        };
        let bh = BlochHamiltonian::new(cell).unwrap();
        assert!(matches!(bloch_chern_number(&bh, 0..1, 8), Err(Error::BandCrossing { .. })));
    }
}
