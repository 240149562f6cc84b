use std::sync::Arc;

use ndarray::{s, Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::localization::LocalizationFunction;
use crate::chern::orbital_coordinates;
use crate::error::{Error, Result};
use crate::lattice::{min_pairwise_distance, SiteGeometry};
use crate::linalg::{compress_diagonal, dagger, eigh, frame_projector, identity, max_abs_diff, C64};
use crate::spectral::Projector;

/// One generalized Wannier function.
#[derive(Debug, Clone, PartialEq)]
pub struct WannierFunction {
    pub vector: Array1<C64>,
    pub center: [f64; 2],
    /// Index `a` among the functions sharing `center`.
    pub band_index: usize,
}

impl WannierFunction {
    pub fn norm(&self) -> f64 {
        self.vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// `sum_x |w(x)|^2 G(|x - gamma|)`.
pub fn localization_moment(w: &WannierFunction, geometry: &SiteGeometry, g: &LocalizationFunction) -> f64 {
    moment_of(w.vector.iter().copied(), w.center, geometry, g)
}

fn moment_of(
    entries: impl Iterator<Item = C64>,
    center: [f64; 2],
    geometry: &SiteGeometry,
    g: &LocalizationFunction,
) -> f64 {
    entries
        .enumerate()
        .map(|(i, z)| {
            let r = geometry.position(i);
            z.norm_sqr() * g.eval((r[0] - center[0]).hypot(r[1] - center[1]))
        })
        .sum()
}

/// Orthonormal basis of `Ran P` with declared localization centers.
#[derive(Debug, Clone)]
pub struct GwbSet {
    /// Functions as columns.
    vectors: Array2<C64>,
    /// Center of every function.
    centers: Vec<[f64; 2]>,
    band_index: Vec<usize>,
    /// Distinct centers and their multiplicities.
    distinct: Vec<[f64; 2]>,
    multiplicity: Vec<usize>,
    center_of: Vec<usize>,
    centroids: Vec<[f64; 2]>,
    geometry: Arc<SiteGeometry>,
    source: Projector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GwbSummary {
    pub functions: usize,
    pub distinct_centers: usize,
    pub m_star: usize,
    pub min_center_spacing: f64,
    pub gram_defect: f64,
    pub completeness_defect: f64,
}

impl GwbSet {
    /// Assembles a set from columns grouped by center. `groups` lists
    /// `(center, column indices)`.
    fn assemble(
        vectors: Array2<C64>,
        groups: Vec<([f64; 2], Vec<usize>)>,
        geometry: Arc<SiteGeometry>,
        source: Projector,
    ) -> Self {
        let k = vectors.ncols();
        let mut centers = vec![[0.0; 2]; k];
        let mut band_index = vec![0; k];
        let mut center_of = vec![0; k];
        let mut distinct = Vec::with_capacity(groups.len());
        let mut multiplicity = Vec::with_capacity(groups.len());
        for (g, (c, members)) in groups.into_iter().enumerate() {
            for (a, &j) in members.iter().enumerate() {
                centers[j] = c;
                band_index[j] = a;
                center_of[j] = g;
            }
            distinct.push(c);
            multiplicity.push(members.len());
        }
        let x1 = orbital_coordinates(&geometry, 0);
        let x2 = orbital_coordinates(&geometry, 1);
        let centroids = (0..k)
            .map(|j| {
                let col = vectors.column(j);
                let mut c = [0.0; 2];
                for (i, z) in col.iter().enumerate() {
                    c[0] += z.norm_sqr() * x1[i];
                    c[1] += z.norm_sqr() * x2[i];
                }
                c
            })
            .collect();
        Self { vectors, centers, band_index, distinct, multiplicity, center_of, centroids, geometry, source }
    }

    pub fn len(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vectors(&self) -> ArrayView2<'_, C64> {
        self.vectors.view()
    }

    pub fn centers(&self) -> &[[f64; 2]] {
        &self.centers
    }

    pub fn band_indices(&self) -> &[usize] {
        &self.band_index
    }

    pub fn distinct_centers(&self) -> &[[f64; 2]] {
        &self.distinct
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicity
    }

    /// Index into [`Self::distinct_centers`] of every function.
    pub fn center_indices(&self) -> &[usize] {
        &self.center_of
    }

    pub fn centroids(&self) -> &[[f64; 2]] {
        &self.centroids
    }

    pub fn m_star(&self) -> usize {
        self.multiplicity.iter().copied().max().unwrap_or(0)
    }

    pub fn geometry(&self) -> &Arc<SiteGeometry> {
        &self.geometry
    }

    pub fn source(&self) -> &Projector {
        &self.source
    }

    pub fn function(&self, j: usize) -> WannierFunction {
        WannierFunction { vector: self.vectors.column(j).to_owned(), center: self.centers[j], band_index: self.band_index[j] }
    }

    /// Measured minimum distance between distinct centers (`inf` for one center).
    pub fn min_center_spacing(&self) -> f64 {
        min_pairwise_distance(&self.distinct)
    }

    /// `max |W^dagger W - I|`.
    pub fn gram_defect(&self) -> f64 {
        let gram = dagger(&self.vectors.view()).dot(&self.vectors);
        max_abs_diff(&gram.view(), &identity(self.len()).view())
    }

    /// `max |P - sum |w><w||`.
    pub fn completeness_defect(&self) -> f64 {
        let sum = frame_projector(&self.vectors.view());
        max_abs_diff(&self.source.matrix(), &sum.view())
    }

    pub fn summary(&self) -> GwbSummary {
        GwbSummary {
            functions: self.len(),
            distinct_centers: self.distinct.len(),
            m_star: self.m_star(),
            min_center_spacing: self.min_center_spacing(),
            gram_defect: self.gram_defect(),
            completeness_defect: self.completeness_defect(),
        }
    }

    /// Localization moment of every function.
    pub fn moments(&self, g: &LocalizationFunction) -> Vec<f64> {
        (0..self.len())
            .map(|j| moment_of(self.vectors.column(j).iter().copied(), self.centers[j], &self.geometry, g))
            .collect()
    }

    /// `sup_gamma` of the moments.
    pub fn max_moment(&self, g: &LocalizationFunction) -> f64 {
        self.moments(g).into_iter().fold(0.0, f64::max)
    }

    /// The set with function `j` removed (no longer complete).
    pub fn without(&self, j: usize) -> Self {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| i != j).collect();
        self.select(&keep, None)
    }

    /// The set with function `j` replaced by `vector`.
    pub fn with_replaced(&self, j: usize, vector: Array1<C64>) -> Self {
        let all: Vec<usize> = (0..self.len()).collect();
        self.select(&all, Some((j, vector)))
    }

    /// The set with every function mapped through `u` (same centers).
    pub fn transformed(&self, u: &ArrayView2<C64>, target: Projector) -> Self {
        let mut out = self.clone();
        out.vectors = u.dot(&self.vectors);
        out.source = target;
        out.recompute_centroids();
        out
    }

    fn select(&self, keep: &[usize], replace: Option<(usize, Array1<C64>)>) -> Self {
        let mut vectors = Array2::<C64>::zeros((self.vectors.nrows(), keep.len()));
        for (c, &j) in keep.iter().enumerate() {
            vectors.column_mut(c).assign(&self.vectors.column(j));
        }
        if let Some((j, v)) = replace {
            if let Some(c) = keep.iter().position(|&i| i == j) {
                vectors.column_mut(c).assign(&v);
            }
        }
        let mut groups: Vec<([f64; 2], Vec<usize>)> = self.distinct.iter().map(|&c| (c, Vec::new())).collect();
        for (c, &j) in keep.iter().enumerate() {
            groups[self.center_of[j]].1.push(c);
        }
        groups.retain(|(_, m)| !m.is_empty());
        Self::assemble(vectors, groups, self.geometry.clone(), self.source.clone())
    }

    fn recompute_centroids(&mut self) {
        let rebuilt = Self::assemble(
            self.vectors.clone(),
            self.distinct
                .iter()
                .enumerate()
                .map(|(g, &c)| (c, (0..self.len()).filter(|&j| self.center_of[j] == g).collect()))
                .collect(),
            self.geometry.clone(),
            self.source.clone(),
        );
        *self = rebuilt;
    }
}

fn validate_tol(cluster_tol: f64) -> Result<()> {
    if !(cluster_tol > 0.0 && cluster_tol.is_finite()) {
        return Err(Error::InvalidTolerance { name: "cluster_tol", value: cluster_tol });
    }
    Ok(())
}

/// Default clustering tolerance: half the minimum site spacing.
pub fn default_cluster_tol(geometry: &SiteGeometry) -> f64 {
    0.5 * geometry.min_spacing()
}

/// Splits ascending `values` into maximal runs whose consecutive gaps are at
/// most `tol`.
fn clusters(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            out.push(start..i);
            start = i;
        }
    }
    out
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Eigenvectors of the reduced position operator `P X P` on `Ran P` (1D).
pub fn construct_gwb_1d(p: &Projector, cluster_tol: f64) -> Result<GwbSet> {
    let geometry = p.geometry().clone();
    if geometry.dimension() != 1 {
        return Err(Error::WrongDimension { expected: 1, found: geometry.dimension() });
    }
    if p.rank() == 0 {
        return Err(Error::EmptyProjector);
    }
    validate_tol(cluster_tol)?;
    let frame = p.frame();
    let x = orbital_coordinates(&geometry, 0);
    let (values, u) = eigh(&compress_diagonal(&frame, &x).view())?;
    let vectors = frame.dot(&u);
    let groups = clusters(&values, cluster_tol)
        .into_iter()
        .map(|r| ([mean(&values[r.clone()]), 0.0], r.collect()))
        .collect();
    Ok(GwbSet::assemble(vectors, groups, geometry, p.clone()))
}

/// Sequential fibre construction: diagonalize `P X1 P` on `Ran P`, cluster its
/// eigenvalues into fibres, then diagonalize the compressed `X2` inside
/// every fibre.
pub fn construct_gwb_2d(p: &Projector, cluster_tol: f64) -> Result<GwbSet> {
    let geometry = p.geometry().clone();
    if geometry.dimension() != 2 {
        return Err(Error::WrongDimension { expected: 2, found: geometry.dimension() });
    }
    if p.rank() == 0 {
        return Err(Error::EmptyProjector);
    }
    validate_tol(cluster_tol)?;
    let frame = p.frame();
    let x1 = orbital_coordinates(&geometry, 0);
    let x2 = orbital_coordinates(&geometry, 1);
    let (values1, u1) = eigh(&compress_diagonal(&frame, &x1).view())?;
    let lifted = frame.dot(&u1);
    let mut vectors = Array2::<C64>::zeros((frame.nrows(), frame.ncols()));
    let mut groups = Vec::new();
    let mut next = 0;
    for fibre in clusters(&values1, cluster_tol) {
        let gamma1 = mean(&values1[fibre.clone()]);
        let basis = lifted.slice(s![.., fibre.clone()]);
        let (values2, u2) = eigh(&compress_diagonal(&basis, &x2).view())?;
        let rotated = basis.dot(&u2);
        let offset = next;
        vectors.slice_mut(s![.., offset..offset + fibre.len()]).assign(&rotated);
        next += fibre.len();
        for r in clusters(&values2, cluster_tol) {
            let gamma2 = mean(&values2[r.clone()]);
            groups.push(([gamma1, gamma2], r.map(|j| offset + j).collect()));
        }
    }
    Ok(GwbSet::assemble(vectors, groups, geometry, p.clone()))
}

/// Dispatches on the dimension of the projector's geometry.
pub fn construct_gwb(p: &Projector, cluster_tol: f64) -> Result<GwbSet> {
    match p.geometry().dimension() {
        1 => construct_gwb_1d(p, cluster_tol),
        _ => construct_gwb_2d(p, cluster_tol),
    }
}
