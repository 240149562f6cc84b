//! Translation-invariant tight-binding models described by one unit cell.

use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::geometry::{Boundary, SiteGeometry};
use super::operator::HermitianOperator;
use crate::error::{Error, Result};
use crate::linalg::C64;

/// `H[(row, R)][(col, R + shift)] += amplitude`; the Hermitian conjugate
/// entry is added automatically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hop {
    pub row: usize,
    pub col: usize,
    pub shift: [i64; 2],
    pub amplitude: C64,
}

/// A Bravais cell with axis-aligned primitive vectors of lengths `extent`.
///
/// Basis sites carry `orbitals` orbitals each; a cell orbital is
/// `basis_site * orbitals + orbital`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellModel {
    pub dimension: usize,
    pub extent: [usize; 2],
    pub basis: Vec<[f64; 2]>,
    pub orbitals: usize,
    pub onsite: Vec<f64>,
    pub hops: Vec<Hop>,
}

impl CellModel {
    pub fn orbitals_per_cell(&self) -> usize {
        self.basis.len() * self.orbitals
    }

    pub fn validate(&self) -> Result<()> {
        let nb = self.orbitals_per_cell();
        if nb == 0 {
            return Err(Error::InvalidParameter { name: "basis".into(), reason: "empty unit cell".into() });
        }
        if self.onsite.len() != nb {
            return Err(Error::InvalidParameter {
                name: "onsite".into(),
                reason: format!("expected {nb} onsite energies, got {}", self.onsite.len()),
            });
        }
        for hop in &self.hops {
            if hop.row >= nb || hop.col >= nb {
                return Err(Error::InvalidParameter {
                    name: "hoppings".into(),
                    reason: format!("orbital index out of range in {hop:?}"),
                });
            }
            if self.dimension == 1 && hop.shift[1] != 0 {
                return Err(Error::InvalidParameter {
                    name: "hoppings".into(),
                    reason: "1D model with a shift along the second axis".into(),
                });
            }
        }
        Ok(())
    }

    /// Bloch matrix `H(k) = sum_hops amplitude e^{i k.shift} + h.c.`, with `k`
    /// in reduced units (`k_i` in `[0, 2 pi)`).
    pub fn bloch_matrix(&self, k: [f64; 2]) -> Array2<C64> {
        let nb = self.orbitals_per_cell();
        let mut h = Array2::<C64>::zeros((nb, nb));
        for (i, &e) in self.onsite.iter().enumerate() {
            h[[i, i]] += e;
        }
        for hop in &self.hops {
            let phase = k[0] * hop.shift[0] as f64 + k[1] * hop.shift[1] as f64;
            let amp = hop.amplitude * C64::from_polar(1.0, phase);
            h[[hop.row, hop.col]] += amp;
            h[[hop.col, hop.row]] += amp.conj();
        }
        h
    }

    /// Real-space geometry of `cells[0] x cells[1]` tiled cells, centered at the origin.
    pub fn tile_geometry(&self, cells: [usize; 2], linear_size: usize, boundary: Boundary) -> Result<SiteGeometry> {
        let cells = self.effective_cells(cells);
        let mut sites = Vec::with_capacity(cells[0] * cells[1] * self.basis.len());
        for cy in 0..cells[1] {
            for cx in 0..cells[0] {
                for b in &self.basis {
                    let x = (cx * self.extent[0]) as f64 + b[0];
                    let y = if self.dimension == 2 { (cy * self.extent[1]) as f64 + b[1] } else { 0.0 };
                    sites.push([x, y]);
                }
            }
        }
        let (lo, hi) = bounds(&sites);
        let center = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
        for s in &mut sites {
            s[0] -= center[0];
            s[1] -= center[1];
        }
        SiteGeometry::new(self.dimension, sites, self.orbitals, linear_size, boundary)
    }

    fn effective_cells(&self, cells: [usize; 2]) -> [usize; 2] {
        if self.dimension == 1 {
            [cells[0], 1]
        } else {
            cells
        }
    }

    /// Real-space Hamiltonian of the tiled sample.
    pub fn tile(&self, cells: [usize; 2], linear_size: usize, boundary: Boundary) -> Result<HermitianOperator> {
        self.validate()?;
        let geometry = Arc::new(self.tile_geometry(cells, linear_size, boundary)?);
        let cells = self.effective_cells(cells);
        let nb = self.orbitals_per_cell();
        let n = cells[0] * cells[1] * nb;
        let mut h = Array2::<C64>::zeros((n, n));
        let cell_index = |cx: usize, cy: usize| cy * cells[0] + cx;
        for cy in 0..cells[1] {
            for cx in 0..cells[0] {
                let base = cell_index(cx, cy) * nb;
                for (i, &e) in self.onsite.iter().enumerate() {
                    h[[base + i, base + i]] += e;
                }
                for hop in &self.hops {
                    let Some(tx) = wrap(cx as i64 + hop.shift[0], cells[0], boundary) else { continue };
                    let Some(ty) = wrap(cy as i64 + hop.shift[1], cells[1], boundary) else { continue };
                    let target = cell_index(tx, ty) * nb;
                    let (r, c) = (base + hop.row, target + hop.col);
                    h[[r, c]] += hop.amplitude;
                    h[[c, r]] += hop.amplitude.conj();
                }
            }
        }
        HermitianOperator::new(h, geometry)
    }
}

fn wrap(coord: i64, len: usize, boundary: Boundary) -> Option<usize> {
    let len = len as i64;
    match boundary {
        Boundary::Open => (0..len).contains(&coord).then_some(coord as usize),
        Boundary::Periodic => Some(coord.rem_euclid(len) as usize),
    }
}

fn bounds(sites: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    sites.iter().fold(
        ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]),
        |(lo, hi), s| ([lo[0].min(s[0]), lo[1].min(s[1])], [hi[0].max(s[0]), hi[1].max(s[1])]),
    )
}

/// Hamiltonian in reciprocal space of a clean periodic model.
#[derive(Debug, Clone)]
pub struct BlochHamiltonian {
    cell: CellModel,
}

impl BlochHamiltonian {
    pub fn new(cell: CellModel) -> Result<Self> {
        cell.validate()?;
        Ok(Self { cell })
    }

    pub fn cell(&self) -> &CellModel {
        &self.cell
    }

    pub fn num_bands(&self) -> usize {
        self.cell.orbitals_per_cell()
    }

    pub fn dimension(&self) -> usize {
        self.cell.dimension
    }

    pub fn at(&self, k: [f64; 2]) -> Array2<C64> {
        self.cell.bloch_matrix(k)
    }

    /// Band energies on a `grid x grid` mesh (`grid x 1` in 1D), ordered by
    /// k-point then ascending energy.
    pub fn band_energies(&self, grid: usize) -> Result<Vec<Vec<f64>>> {
        let g2 = if self.dimension() == 2 { grid } else { 1 };
        let mut out = Vec::with_capacity(grid * g2);
        for j in 0..g2 {
            for i in 0..grid {
                let k = grid_point(i, j, grid, g2);
                let (e, _) = crate::linalg::eigh(&self.at(k).view())?;
                out.push(e);
            }
        }
        Ok(out)
    }

    /// Energy ranges `[min, max]` of every band over a k-grid.
    pub fn band_ranges(&self, grid: usize) -> Result<Vec<(f64, f64)>> {
        let energies = self.band_energies(grid)?;
        let nb = self.num_bands();
        let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); nb];
        for e in &energies {
            for (b, &v) in e.iter().enumerate() {
                ranges[b].0 = ranges[b].0.min(v);
                ranges[b].1 = ranges[b].1.max(v);
            }
        }
        Ok(ranges)
    }
}

pub(crate) fn grid_point(i: usize, j: usize, g1: usize, g2: usize) -> [f64; 2] {
    let tau = std::f64::consts::TAU;
    [tau * i as f64 / g1 as f64, tau * j as f64 / g2 as f64]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> CellModel {
        CellModel {
            dimension: 1,
            extent: [1, 1],
            basis: vec![[0.0, 0.0]],
            orbitals: 1,
            onsite: vec![0.0],
            hops: vec![Hop { row: 0, col: 0, shift: [1, 0], amplitude: C64::new(-1.0, 0.0) }],
        }
    }

    #[test]
    fn periodic_chain_matches_cosine_band() {
        let cell = chain();
        let h = cell.tile([8, 1], 8, Boundary::Periodic).unwrap();
        let (mut e, _) = crate::linalg::eigh(&h.matrix()).unwrap();
        let mut expected: Vec<f64> = (0..8)
            .map(|m| -2.0 * (std::f64::consts::TAU * m as f64 / 8.0).cos())
            .collect();
        expected.sort_by(f64::total_cmp);
        e.sort_by(f64::total_cmp);
        for (a, b) in e.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn open_chain_is_centered() {
        let g = chain().tile_geometry([4, 1], 4, Boundary::Open).unwrap();
        let xs: Vec<f64> = g.sites().iter().map(|s| s[0]).collect();
        assert_eq!(xs, vec![-1.5, -0.5, 0.5, 1.5]);
    }

    #[test]
    fn rejects_bad_orbital_index() {
        let mut cell = chain();
        cell.hops[0].col = 3;
        assert!(cell.validate().is_err());
    }
}
