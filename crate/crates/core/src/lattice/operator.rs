use std::sync::Arc;

use ndarray::{Array2, ArrayView2};

use super::geometry::SiteGeometry;
use crate::error::{Error, Result};
use crate::linalg::{hermiticity_defect, C64};

/// Hermiticity tolerance enforced on construction.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Dense Hermitian matrix attached to a site geometry.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    matrix: Array2<C64>,
    geometry: Arc<SiteGeometry>,
}

impl HermitianOperator {
    pub fn new(matrix: Array2<C64>, geometry: Arc<SiteGeometry>) -> Result<Self> {
        if matrix.nrows() != geometry.dim() || matrix.ncols() != geometry.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix on a geometry of dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                geometry.dim()
            )));
        }
        let deviation = hermiticity_defect(&matrix.view());
        if deviation > HERMITICITY_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { matrix, geometry })
    }

    pub fn matrix(&self) -> ArrayView2<'_, C64> {
        self.matrix.view()
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn geometry(&self) -> &Arc<SiteGeometry> {
        &self.geometry
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Position operators as diagonal matrices; `X2` is absent for 1D geometries.
pub fn position_operators(
    geometry: &Arc<SiteGeometry>,
) -> Result<(HermitianOperator, Option<HermitianOperator>)> {
    let build = |axis: usize| {
        let diag: Vec<C64> = geometry.coordinates(axis).into_iter().map(C64::from).collect();
        HermitianOperator::new(Array2::from_diag(&ndarray::Array1::from(diag)), geometry.clone())
    };
    let x1 = build(0)?;
    let x2 = if geometry.dimension() == 2 { Some(build(1)?) } else { None };
    Ok((x1, x2))
}
