//! From a model description to the occupied-state projector of a finite sample.

use serde::{Deserialize, Serialize};

use crate::chern::bloch_chern_number;
use crate::error::{Error, Result};
use crate::lattice::{bloch_hamiltonian, build_model, Boundary, HermitianOperator, ModelSpec};
use crate::spectral::{detect_islands, diagonalize, fermi_projection, island_below, Projector, SpectralIsland, Spectrum};

/// k-points per axis used to locate Bloch band edges.
const BAND_EDGE_GRID: usize = 48;

/// Which states are occupied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Filling {
    /// Fermi energy in the middle of the Bloch gap above the lowest `bands` bands.
    OccupiedBands { bands: usize },
    /// Explicit Fermi energy.
    FermiEnergy { energy: f64 },
    /// The `index`-th island of the finite-sample spectrum split at gaps wider
    /// than `gap_tol`.
    Island { index: usize, gap_tol: f64 },
}

impl Default for Filling {
    fn default() -> Self {
        Filling::OccupiedBands { bands: 1 }
    }
}

/// Fermi energy implied by `filling`, or `None` for island fillings.
pub fn fermi_energy(spec: &ModelSpec, filling: &Filling) -> Result<Option<f64>> {
    match *filling {
        Filling::FermiEnergy { energy } => {
            if !energy.is_finite() {
                return Err(Error::InvalidParameter { name: "filling.energy".into(), reason: "must be finite".into() });
            }
            Ok(Some(energy))
        }
        Filling::Island { .. } => Ok(None),
        Filling::OccupiedBands { bands } => {
            let mut clean = spec.clone();
            clean.disorder = None;
            let bh = bloch_hamiltonian(&clean)?;
            let ranges = bh.band_ranges(BAND_EDGE_GRID)?;
            if bands == 0 || bands >= ranges.len() {
                return Err(Error::InvalidParameter {
                    name: "filling.bands".into(),
                    reason: format!("must lie in 1..{}", ranges.len()),
                });
            }
            let below = ranges[..bands].iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
            let above = ranges[bands..].iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
            if above <= below {
                return Err(Error::NoGapAtFermiLevel {
                    fermi_energy: 0.5 * (below + above),
                    reason: format!("bands {bands} and {} overlap", bands + 1),
                });
            }
            Ok(Some(0.5 * (below + above)))
        }
    }
}

/// Starting k-grid of the Bloch oracle.
pub const ORACLE_GRID: usize = 24;

/// Link-variable Chern number of the occupied Bloch bands, or `None` when the
/// model has no Bloch form (1D, disordered or custom without periodicity) or
/// the filling is an island of a finite sample.
pub fn oracle_chern(spec: &ModelSpec, filling: &Filling) -> Result<Option<i64>> {
    oracle_chern_on_grid(spec, filling, ORACLE_GRID)
}

/// As [`oracle_chern`] with an explicit starting k-grid.
pub fn oracle_chern_on_grid(spec: &ModelSpec, filling: &Filling, grid: usize) -> Result<Option<i64>> {
    if spec.active_disorder().is_some() || spec.family()?.dimension() != 2 {
        return Ok(None);
    }
    let bh = match bloch_hamiltonian(spec) {
        Ok(bh) => bh,
        Err(Error::NotPeriodic(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let bands = match *filling {
        Filling::OccupiedBands { bands } => bands,
        Filling::FermiEnergy { energy } => {
            bh.band_ranges(BAND_EDGE_GRID)?.iter().filter(|r| r.1 < energy).count()
        }
        Filling::Island { .. } => return Ok(None),
    };
    if bands == 0 || bands >= bh.num_bands() {
        return Ok(Some(0));
    }
    Ok(Some(bloch_chern_number(&bh, 0..bands, grid)?.chern))
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub hamiltonian: HermitianOperator,
    pub spectrum: Spectrum,
    pub island: SpectralIsland,
    pub projector: Projector,
    pub fermi_energy: Option<f64>,
}

/// Occupied-state projector of `spec` on a sample of linear size `size`.
pub fn ground_state(spec: &ModelSpec, size: usize, boundary: Boundary, filling: &Filling) -> Result<GroundState> {
    let ef = fermi_energy(spec, filling)?;
    ground_state_at(spec, size, boundary, filling, ef)
}

/// As [`ground_state`] with a precomputed Fermi energy.
pub fn ground_state_at(
    spec: &ModelSpec,
    size: usize,
    boundary: Boundary,
    filling: &Filling,
    fermi_energy: Option<f64>,
) -> Result<GroundState> {
    let hamiltonian = build_model(spec, size, boundary)?;
    let spectrum = diagonalize(&hamiltonian)?;
    let island = match (*filling, fermi_energy) {
        (Filling::Island { index, gap_tol }, _) => {
            let islands = detect_islands(&spectrum, gap_tol)?;
            *islands.get(index).ok_or_else(|| Error::GapClosed {
                context: format!("size {size}: only {} islands with gap > {gap_tol}", islands.len()),
            })?
        }
        (_, Some(ef)) => island_below(&spectrum, ef)?,
        (_, None) => unreachable!("energy fillings always resolve a Fermi energy"),
    };
    let projector = fermi_projection(&spectrum, &island)?;
    Ok(GroundState { hamiltonian, spectrum, island, projector, fermi_energy })
}

/// Gap around `fermi_energy` in the spectrum of the periodic sample of the
/// same model (same disorder spec). Sizes incompatible with the magnetic cell
/// are rounded up to the next compatible size.
pub fn bulk_gap(spec: &ModelSpec, size: usize, fermi_energy: f64) -> Result<f64> {
    let h = match build_model(spec, size, Boundary::Periodic) {
        Err(Error::IncompatibleSize { size, period }) => build_model(spec, size.next_multiple_of(period), Boundary::Periodic)?,
        other => other?,
    };
    let spectrum = diagonalize(&h)?;
    let values = &spectrum.eigenvalues;
    let k = values.partition_point(|&v| v < fermi_energy);
    if k == 0 || k == values.len() {
        return Ok(0.0);
    }
    Ok(values[k] - values[k - 1])
}

/// Checks that the occupied states are separated by more than `min_gap`:
/// the bulk gap at the Fermi energy, or the gaps bordering the chosen island.
pub fn check_gap(spec: &ModelSpec, size: usize, state: &GroundState, min_gap: f64, context: &str) -> Result<f64> {
    let gap = match state.fermi_energy {
        Some(ef) => bulk_gap(spec, size, ef)?,
        None => {
            let values = &state.spectrum.eigenvalues;
            let (start, end) = (state.island.start, state.island.end);
            let mut gap = f64::INFINITY;
            if start > 0 {
                gap = gap.min(values[start] - values[start - 1]);
            }
            if end < values.len() {
                gap = gap.min(values[end] - values[end - 1]);
            }
            gap
        }
    };
    if gap <= min_gap {
        return Err(Error::GapClosed { context: format!("{context}: gap {gap:.3e} <= {min_gap:.3e}") });
    }
    Ok(gap)
}
