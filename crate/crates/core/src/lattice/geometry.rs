use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// Positions of the lattice sites carrying the orbitals of a tight-binding model.
///
/// Matrix index `i` refers to site `i / orbitals_per_site` and orbital
/// `i % orbitals_per_site`. Coordinates are in lattice-constant units and
/// centered so that the bounding box of the sample is symmetric about the
/// origin. For 1D geometries the second coordinate is identically zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SiteGeometry {
    dimension: usize,
    sites: Vec<[f64; 2]>,
    orbitals_per_site: usize,
    linear_size: usize,
    boundary: Boundary,
    min_spacing: f64,
}

impl SiteGeometry {
    pub fn new(
        dimension: usize,
        sites: Vec<[f64; 2]>,
        orbitals_per_site: usize,
        linear_size: usize,
        boundary: Boundary,
    ) -> Result<Self> {
        if !(dimension == 1 || dimension == 2) {
            return Err(Error::InvalidParameter {
                name: "dimension".into(),
                reason: format!("must be 1 or 2, got {dimension}"),
            });
        }
        if orbitals_per_site == 0 {
            return Err(Error::InvalidParameter {
                name: "orbitals_per_site".into(),
                reason: "must be positive".into(),
            });
        }
        if sites.is_empty() {
            return Err(Error::InvalidParameter { name: "sites".into(), reason: "empty geometry".into() });
        }
        if dimension == 1 && sites.iter().any(|s| s[1] != 0.0) {
            return Err(Error::InvalidParameter {
                name: "sites".into(),
                reason: "1D geometry with a nonzero second coordinate".into(),
            });
        }
        let min_spacing = min_pairwise_distance(&sites);
        if min_spacing <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "sites".into(),
                reason: "two sites share a position".into(),
            });
        }
        Ok(Self { dimension, sites, orbitals_per_site, linear_size, boundary, min_spacing })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn sites(&self) -> &[[f64; 2]] {
        &self.sites
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn orbitals_per_site(&self) -> usize {
        self.orbitals_per_site
    }

    pub fn linear_size(&self) -> usize {
        self.linear_size
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.sites.len() * self.orbitals_per_site
    }

    pub fn site_of(&self, index: usize) -> usize {
        index / self.orbitals_per_site
    }

    pub fn position(&self, index: usize) -> [f64; 2] {
        self.sites[self.site_of(index)]
    }

    /// Coordinate along `axis` for every matrix index.
    pub fn coordinates(&self, axis: usize) -> Vec<f64> {
        (0..self.dim()).map(|i| self.position(i)[axis]).collect()
    }

    /// Smallest distance between two distinct sites (`+inf` for one site).
    pub fn min_spacing(&self) -> f64 {
        self.min_spacing
    }

    /// Midpoint of the bounding box.
    pub fn center(&self) -> [f64; 2] {
        let mut c = [0.0; 2];
        for axis in 0..2 {
            let (lo, hi) = self.extent(axis);
            c[axis] = 0.5 * (lo + hi);
        }
        c
    }

    pub fn extent(&self, axis: usize) -> (f64, f64) {
        self.sites.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s[axis]), hi.max(s[axis]))
        })
    }

    /// Largest half-width of a square centered at the sample center that
    /// still touches sites on every side.
    pub fn half_width(&self) -> f64 {
        let c = self.center();
        (0..self.dimension)
            .map(|axis| {
                let (lo, hi) = self.extent(axis);
                (hi - c[axis]).min(c[axis] - lo)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// The same geometry with every site shifted by `shift`.
    pub fn translated(&self, shift: [f64; 2]) -> Self {
        let shift = if self.dimension == 1 { [shift[0], 0.0] } else { shift };
        let sites = self.sites.iter().map(|s| [s[0] + shift[0], s[1] + shift[1]]).collect();
        Self { sites, ..self.clone() }
    }
}

pub(crate) fn min_pairwise_distance(points: &[[f64; 2]]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let d = (a[0] - b[0]).hypot(a[1] - b[1]);
            best = best.min(d);
        }
    }
    best
}
