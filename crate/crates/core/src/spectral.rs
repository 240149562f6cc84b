//! Eigendecomposition, spectral islands, Fermi projections and kernel decay.

use std::sync::Arc;

use ndarray::{s, Array2, ArrayView2, Axis};
use ndarray_linalg::QR;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::fit_linear;
use crate::lattice::{HermitianOperator, SiteGeometry};
use crate::linalg::{dagger, eigh, frame_projector, hermiticity_defect, identity, max_abs_diff, C64};
use crate::rng::{substream, Stream};

/// Eigenvalues closer than this are one degenerate cluster and never split.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: Array2<C64>,
    geometry: Arc<SiteGeometry>,
}

impl Spectrum {
    pub fn geometry(&self) -> &Arc<SiteGeometry> {
        &self.geometry
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

pub fn diagonalize(h: &HermitianOperator) -> Result<Spectrum> {
    let defect = hermiticity_defect(&h.matrix());
    if defect > crate::lattice::HERMITICITY_TOL {
        return Err(Error::NotHermitian { deviation: defect });
    }
    let (eigenvalues, eigenvectors) = eigh(&h.matrix())?;
    if eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigensolver("non-finite eigenvalue".into()));
    }
    Ok(Spectrum { eigenvalues, eigenvectors, geometry: h.geometry().clone() })
}

/// Contiguous block of eigenvalues `start..end` isolated by gaps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralIsland {
    pub start: usize,
    pub end: usize,
    pub sigma0: (f64, f64),
    /// `(E-, E+)`, both in the resolvent set.
    pub enclosure: (f64, f64),
    pub gap_below: f64,
    pub gap_above: f64,
}

impl SpectralIsland {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    fn from_range(values: &[f64], start: usize, end: usize, lower: f64, upper: f64) -> Self {
        let sigma0 = (values[start], values[end - 1]);
        Self {
            start,
            end,
            sigma0,
            enclosure: (lower, upper),
            gap_below: sigma0.0 - lower,
            gap_above: upper - sigma0.1,
        }
    }
}

/// Splits the spectrum at every gap wider than `gap_tol`.
///
/// Returns an empty list when no such gap exists. The outermost enclosure
/// points sit `gap_tol` beyond the spectrum.
pub fn detect_islands(spec: &Spectrum, gap_tol: f64) -> Result<Vec<SpectralIsland>> {
    if !(gap_tol > 0.0 && gap_tol.is_finite()) {
        return Err(Error::InvalidTolerance { name: "gap_tol", value: gap_tol });
    }
    let values = &spec.eigenvalues;
    let threshold = gap_tol.max(DEGENERACY_TOL);
    let cuts: Vec<usize> = (1..values.len())
        .filter(|&i| values[i] - values[i - 1] > threshold)
        .collect();
    if cuts.is_empty() {
        return Ok(Vec::new());
    }
    let mut bounds = vec![0];
    bounds.extend(&cuts);
    bounds.push(values.len());
    let mut islands = Vec::with_capacity(bounds.len() - 1);
    for w in bounds.windows(2) {
        let (start, end) = (w[0], w[1]);
        let lower = if start == 0 {
            values[0] - gap_tol
        } else {
            0.5 * (values[start - 1] + values[start])
        };
        let upper = if end == values.len() {
            values[end - 1] + gap_tol
        } else {
            0.5 * (values[end - 1] + values[end])
        };
        islands.push(SpectralIsland::from_range(values, start, end, lower, upper));
    }
    Ok(islands)
}

/// All eigenvalues below `fermi_energy`, enclosed up to the midpoint of the
/// straddling pair.
///
/// Unlike [`detect_islands`] this accepts small gaps, which is what an open
/// sample with edge states in the bulk gap needs.
pub fn island_below(spec: &Spectrum, fermi_energy: f64) -> Result<SpectralIsland> {
    let values = &spec.eigenvalues;
    let end = values.partition_point(|&v| v < fermi_energy);
    if end == 0 {
        return Err(Error::NoGapAtFermiLevel { fermi_energy, reason: "no state below the Fermi energy".into() });
    }
    let upper = if end == values.len() {
        values[end - 1] + 1.0
    } else {
        if values[end] - values[end - 1] <= DEGENERACY_TOL {
            return Err(Error::NoGapAtFermiLevel {
                fermi_energy,
                reason: format!("eigenvalue {} sits at the Fermi energy", values[end]),
            });
        }
        0.5 * (values[end - 1] + values[end])
    };
    let lower = values[0] - (upper - values[end - 1]);
    Ok(SpectralIsland::from_range(values, 0, end, lower, upper))
}

/// Orthogonal projector with an orthonormal frame spanning its range.
#[derive(Debug, Clone)]
pub struct Projector {
    matrix: Array2<C64>,
    frame: Array2<C64>,
    geometry: Arc<SiteGeometry>,
}

impl Projector {
    /// Projector onto the span of the orthonormal columns of `frame`.
    pub fn from_frame(frame: Array2<C64>, geometry: Arc<SiteGeometry>) -> Result<Self> {
        let n = geometry.dim();
        if frame.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "frame has {} rows, geometry has {} orbitals",
                frame.nrows(),
                n
            )));
        }
        let gram = dagger(&frame.view()).dot(&frame);
        let defect = max_abs_diff(&gram.view(), &identity(frame.ncols()).view());
        if defect > 1e-8 {
            return Err(Error::Precondition(format!("frame is not orthonormal (defect {defect:e})")));
        }
        let mut matrix = frame_projector(&frame.view());
        symmetrize(&mut matrix);
        Ok(Self { matrix, frame, geometry })
    }

    pub fn matrix(&self) -> ArrayView2<'_, C64> {
        self.matrix.view()
    }

    pub fn frame(&self) -> ArrayView2<'_, C64> {
        self.frame.view()
    }

    pub fn geometry(&self) -> &Arc<SiteGeometry> {
        &self.geometry
    }

    pub fn rank(&self) -> usize {
        self.frame.ncols()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |P^2 - P|`.
    pub fn idempotency_defect(&self) -> f64 {
        let p2 = self.matrix.dot(&self.matrix);
        max_abs_diff(&p2.view(), &self.matrix.view())
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix.view())
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diag().iter().map(|z| z.re).sum()
    }

    /// The same projector with every coordinate shifted by `shift`.
    pub fn translated(&self, shift: [f64; 2]) -> Self {
        Self {
            matrix: self.matrix.clone(),
            frame: self.frame.clone(),
            geometry: Arc::new(self.geometry.translated(shift)),
        }
    }

    /// Complex conjugate `conj(P)` in the site basis.
    pub fn conjugate(&self) -> Self {
        Self {
            matrix: self.matrix.mapv(|z| z.conj()),
            frame: self.frame.mapv(|z| z.conj()),
            geometry: self.geometry.clone(),
        }
    }
}

fn symmetrize(a: &mut Array2<C64>) {
    let n = a.nrows();
    for i in 0..n {
        a[[i, i]] = C64::new(a[[i, i]].re, 0.0);
        for j in 0..i {
            let avg = 0.5 * (a[[i, j]] + a[[j, i]].conj());
            a[[i, j]] = avg;
            a[[j, i]] = avg.conj();
        }
    }
}

pub fn fermi_projection(spec: &Spectrum, island: &SpectralIsland) -> Result<Projector> {
    if island.start >= island.end || island.end > spec.len() {
        return Err(Error::IslandMismatch { start: island.start, end: island.end, len: spec.len() });
    }
    let frame = spec.eigenvectors.slice(s![.., island.start..island.end]).to_owned();
    Projector::from_frame(frame, spec.geometry().clone())
}

/// Haar-random rank-`rank` projector on `geometry`.
pub fn random_projector(geometry: Arc<SiteGeometry>, rank: usize, seed: u64) -> Result<Projector> {
    let n = geometry.dim();
    if rank == 0 || rank > n {
        return Err(Error::InvalidParameter { name: "rank".into(), reason: format!("must lie in 1..={n}") });
    }
    let mut rng = substream(seed, Stream::RandomProjector);
    let gauss = Array2::from_shape_simple_fn((n, rank), || {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re, im)
    });
    let (q, _) = gauss.qr().map_err(|e| Error::Eigensolver(e.to_string()))?;
    Projector::from_frame(q.slice(s![.., ..rank]).to_owned(), geometry)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFitOptions {
    /// Pairs closer than this are excluded.
    pub min_distance: f64,
    pub bin_width: f64,
    /// Largest RMS log-residual for which a decay rate is declared.
    pub residual_threshold: f64,
}

impl Default for DecayFitOptions {
    fn default() -> Self {
        Self { min_distance: 2.0, bin_width: 0.5, residual_threshold: 1.0 }
    }
}

/// Fit of `|P(x, y)| <= C exp(-beta |x - y|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelDecayFit {
    /// `f64::INFINITY` when the kernel is ultralocal.
    pub beta: f64,
    #[serde(rename = "C")]
    pub prefactor: f64,
    pub residual: f64,
    pub pairs_used: usize,
    pub ultralocal: bool,
    /// `beta > 0` with residual below the configured threshold.
    pub localized: bool,
}

pub fn kernel_decay_fit(p: &Projector, opts: &DecayFitOptions) -> Result<KernelDecayFit> {
    if p.rank() == 0 {
        return Err(Error::EmptyProjector);
    }
    let geometry = p.geometry();
    let center = geometry.center();
    let orbitals = geometry.orbitals_per_site();
    let sites = geometry.sites();
    let mut central = Vec::new();
    let dim = geometry.dimension();
    let extents: Vec<(f64, f64)> = (0..dim).map(|a| geometry.extent(a)).collect();
    for (s, r) in sites.iter().enumerate() {
        let inside = (0..dim).all(|a| {
            let half = 0.5 * (extents[a].1 - extents[a].0);
            (r[a] - center[a]).abs() <= 0.5 * half + 1e-9
        });
        if inside {
            central.push(s);
        }
    }
    let m = p.matrix();
    let ultralocal = (0..m.nrows())
        .all(|i| (0..m.ncols()).all(|j| geometry.site_of(i) == geometry.site_of(j) || m[[i, j]].norm() < 1e-14));
    if ultralocal {
        return Ok(KernelDecayFit {
            beta: f64::INFINITY,
            prefactor: 0.0,
            residual: 0.0,
            pairs_used: 0,
            ultralocal: true,
            localized: true,
        });
    }
    let mut bins: Vec<f64> = Vec::new();
    let mut pairs = 0;
    for (ia, &a) in central.iter().enumerate() {
        for &b in &central[ia + 1..] {
            let (ra, rb) = (sites[a], sites[b]);
            let d = ((ra[0] - rb[0]).powi(2) + (ra[1] - rb[1]).powi(2)).sqrt();
            if d < opts.min_distance {
                continue;
            }
            let mut best = 0.0_f64;
            for oa in 0..orbitals {
                for ob in 0..orbitals {
                    best = best.max(m[[a * orbitals + oa, b * orbitals + ob]].norm());
                }
            }
            let bin = (d / opts.bin_width).floor() as usize;
            if bins.len() <= bin {
                bins.resize(bin + 1, 0.0);
            }
            bins[bin] = bins[bin].max(best);
            pairs += 1;
        }
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = bins
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 1e-14)
        .map(|(i, &v)| ((i as f64 + 0.5) * opts.bin_width, v.ln()))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: xs.len() });
    }
    let fit = fit_linear(&xs, &ys)?;
    let beta = -fit.slope;
    Ok(KernelDecayFit {
        beta,
        prefactor: fit.intercept.exp(),
        residual: fit.residual,
        pairs_used: pairs,
        ultralocal: false,
        localized: beta > 0.0 && fit.residual < opts.residual_threshold,
    })
}

/// Sum of projectors over `islands`.
pub fn projector_sum(spec: &Spectrum, islands: &[SpectralIsland]) -> Result<Array2<C64>> {
    let n = spec.len();
    let mut total = Array2::<C64>::zeros((n, n));
    for island in islands {
        total += &fermi_projection(spec, island)?.matrix();
    }
    Ok(total)
}

/// Folds a per-orbital diagonal into per-site sums.
pub(crate) fn per_site_sum(geometry: &SiteGeometry, diag: &[f64]) -> Vec<f64> {
    diag.chunks(geometry.orbitals_per_site())
        .map(|c| c.iter().sum())
        .collect()
}

/// Residual `max |H V - V diag(lambda)|`.
pub fn eigen_residual(h: &HermitianOperator, spec: &Spectrum) -> f64 {
    let hv = h.matrix().dot(&spec.eigenvectors);
    let mut worst = 0.0_f64;
    for (j, col) in hv.axis_iter(Axis(1)).enumerate() {
        for (i, z) in col.iter().enumerate() {
            worst = worst.max((z - spec.eigenvectors[[i, j]] * spec.eigenvalues[j]).norm());
        }
    }
    worst
}
