use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gwb::{GwbSet, LocalizationFunction};
use crate::linalg::{dagger, hermitian_function, identity, max_abs, max_abs_diff, spectral_norm_hermitian, C64};
use crate::spectral::Projector;

#[derive(Debug, Clone)]
pub struct TransportResult {
    pub unitary: Array2<C64>,
    pub transported: GwbSet,
    /// Spectral norm `|P1 - P0|`.
    pub distance: f64,
    /// `max |U^dagger U - I|`.
    pub unitary_defect: f64,
    /// `max |U P0 U^dagger - P1|`.
    pub intertwining_defect: f64,
}

impl TransportResult {
    /// Sup-moment of the transported set over that of the original.
    pub fn moment_ratio(&self, original: &GwbSet, g: &LocalizationFunction) -> f64 {
        self.transported.max_moment(g) / original.max_moment(g)
    }
}

/// Kato-Nagy unitary `U = (I - (P1 - P0)^2)^{-1/2} (P1 P0 + (I - P1)(I - P0))`
/// and the Wannier set `{U w}` for `Ran P1`.
pub fn kato_nagy_transport(p0: &Projector, p1: &Projector, set0: &GwbSet) -> Result<TransportResult> {
    if p0.dim() != p1.dim() || set0.source().dim() != p0.dim() {
        return Err(Error::DimensionMismatch(format!(
            "projectors of dimension {} and {}, set of dimension {}",
            p0.dim(),
            p1.dim(),
            set0.source().dim()
        )));
    }
    let a = p0.matrix();
    let b = p1.matrix();
    let d = &b - &a;
    let n = a.nrows();
    let id = identity(n);
    let (unitary, distance) = if max_abs(&d.view()) == 0.0 {
        (id.clone(), 0.0)
    } else {
        let distance = spectral_norm_hermitian(&d.view())?;
        if distance >= 1.0 {
            return Err(Error::TransportUndefined { norm: distance });
        }
        let gap = &id - &d.dot(&d);
        let root = hermitian_function(&gap.view(), |v| v.powf(-0.5))?;
        let qa = &id - &a;
        let qb = &id - &b;
        let inner = b.dot(&a) + qb.dot(&qa);
        (root.dot(&inner), distance)
    };
    let ud = dagger(&unitary.view());
    let unitary_defect = max_abs_diff(&ud.dot(&unitary).view(), &id.view());
    let moved = unitary.dot(&a).dot(&ud);
    let intertwining_defect = max_abs_diff(&moved.view(), &b);
    let transported = set0.transformed(&unitary.view(), p1.clone());
    Ok(TransportResult { unitary, transported, distance, unitary_defect, intertwining_defect })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportSummary {
    pub distance: f64,
    pub unitary_defect: f64,
    pub intertwining_defect: f64,
}

impl From<&TransportResult> for TransportSummary {
    fn from(t: &TransportResult) -> Self {
        Self { distance: t.distance, unitary_defect: t.unitary_defect, intertwining_defect: t.intertwining_defect }
    }
}
