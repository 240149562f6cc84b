//! Model specifications and the builders turning them into Hamiltonians.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, TAU};
use std::sync::Arc;

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cell::{BlochHamiltonian, CellModel, Hop};
use super::geometry::{Boundary, SiteGeometry};
use super::operator::HermitianOperator;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::rng::{substream, Stream};

/// Orientation of the magnetic field. With this sign the lowest Hofstadter
/// band at flux `+1/q` has Chern number `+1` in the orientation used by both
/// the Bloch oracle and the real-space marker.
pub(crate) const FLUX_SIGN: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderKind {
    /// Onsite energies uniform in `[-strength, strength]`.
    OnsiteUniform,
    /// Onsite energies `+-strength` with equal probability.
    OnsiteBinary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSpec {
    pub kind: DisorderKind,
    pub strength: f64,
    /// Realization seed; unset means 0 (the command-line driver fills in the run seed).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl DisorderSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.strength.is_finite() && self.strength >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "disorder.strength".into(),
                reason: format!("must be finite and >= 0, got {}", self.strength),
            });
        }
        Ok(())
    }

    /// Diagonal disorder potential (before scaling by the strength) for `n` orbitals.
    pub fn realization(&self, n: usize) -> Vec<f64> {
        let mut rng = substream(self.seed.unwrap_or(0), Stream::Disorder);
        (0..n)
            .map(|_| match self.kind {
                DisorderKind::OnsiteUniform => rng.random_range(-1.0..=1.0),
                DisorderKind::OnsiteBinary => {
                    if rng.random_bool(0.5) {
                        1.0
                    } else {
                        -1.0
                    }
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    Symmetric,
    Landau,
}

/// A user-described unit cell (`family = "custom"`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomCell {
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default = "default_extent")]
    pub extent: [usize; 2],
    pub basis: Vec<[f64; 2]>,
    #[serde(default = "default_orbitals")]
    pub orbitals: usize,
    pub onsite: Vec<f64>,
    #[serde(default)]
    pub hoppings: Vec<CustomHop>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomHop {
    pub row: usize,
    pub col: usize,
    pub shift: [i64; 2],
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

fn default_dimension() -> usize {
    2
}
fn default_extent() -> [usize; 2] {
    [1, 1]
}
fn default_orbitals() -> usize {
    1
}

/// Flux per plaquette in units of the flux quantum, in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flux {
    pub p: i64,
    pub q: i64,
}

impl Flux {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if q < 1 {
            return Err(Error::InvalidFlux { p, q, reason: "denominator must be >= 1".into() });
        }
        let g = gcd(p.unsigned_abs(), q as u64) as i64;
        let g = g.max(1);
        Ok(Self { p: p / g, q: q / g })
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// Field strength `B` such that one plaquette encloses phase `B`.
    pub fn field(&self) -> f64 {
        FLUX_SIGN * TAU * self.value()
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Validated model family with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Haldane { t1: f64, t2: f64, phi: f64, mass: f64 },
    Hofstadter { t: f64, flux: Flux, gauge: Option<Gauge> },
    AtomicLimit { onsite_a: f64, onsite_b: f64, dimension: usize },
    Ssh1d { v: f64, w: f64 },
    Custom(CustomCell),
}

/// Serializable model description (`family`, `parameters.*`, `disorder.*`,
/// `size`, `boundary`, `gauge`, `custom`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder: Option<DisorderSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Boundary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<Gauge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomCell>,
}

impl ModelSpec {
    pub fn new(family: &str) -> Self {
        Self {
            family: family.to_string(),
            parameters: BTreeMap::new(),
            disorder: None,
            size: None,
            boundary: None,
            gauge: None,
            custom: None,
        }
    }

    pub fn param(mut self, name: &str, value: f64) -> Self {
        self.parameters.insert(name.to_string(), value);
        self
    }

    pub fn with_disorder(mut self, disorder: DisorderSpec) -> Self {
        self.disorder = Some(disorder);
        self
    }

    pub fn with_gauge(mut self, gauge: Gauge) -> Self {
        self.gauge = Some(gauge);
        self
    }

    /// Disorder that actually perturbs the model (`strength > 0`).
    pub fn active_disorder(&self) -> Option<&DisorderSpec> {
        self.disorder.as_ref().filter(|d| d.strength > 0.0)
    }

    pub fn family(&self) -> Result<Family> {
        let allowed: &[&str] = match self.family.as_str() {
            "haldane" => &["t1", "t2", "phi", "mass"],
            "hofstadter" => &["t", "p", "q"],
            "atomic_limit" => &["onsite_a", "onsite_b", "dimension"],
            "ssh_1d" => &["v", "w"],
            "custom" => &[],
            other => return Err(Error::UnknownFamily(other.to_string())),
        };
        for (name, value) in &self.parameters {
            if !allowed.contains(&name.as_str()) {
                return Err(Error::InvalidParameter {
                    name: format!("parameters.{name}"),
                    reason: format!("not a parameter of family `{}`", self.family),
                });
            }
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name: format!("parameters.{name}"),
                    reason: "must be finite".into(),
                });
            }
        }
        let get = |name: &str, default: f64| self.parameters.get(name).copied().unwrap_or(default);
        let integer = |name: &str, default: i64| -> Result<i64> {
            let v = get(name, default as f64);
            if v.fract() != 0.0 {
                return Err(Error::InvalidParameter {
                    name: format!("parameters.{name}"),
                    reason: format!("must be an integer, got {v}"),
                });
            }
            Ok(v as i64)
        };
        if let Some(d) = &self.disorder {
            d.validate()?;
        }
        Ok(match self.family.as_str() {
            "haldane" => Family::Haldane {
                t1: get("t1", 1.0),
                t2: get("t2", 0.1),
                phi: get("phi", FRAC_PI_2),
                mass: get("mass", 0.0),
            },
            "hofstadter" => Family::Hofstadter {
                t: get("t", 1.0),
                flux: Flux::new(integer("p", 1)?, integer("q", 3)?)?,
                gauge: self.gauge,
            },
            "atomic_limit" => {
                let dimension = integer("dimension", 2)?;
                if !(dimension == 1 || dimension == 2) {
                    return Err(Error::InvalidParameter {
                        name: "parameters.dimension".into(),
                        reason: format!("must be 1 or 2, got {dimension}"),
                    });
                }
                Family::AtomicLimit {
                    onsite_a: get("onsite_a", -1.0),
                    onsite_b: get("onsite_b", 1.0),
                    dimension: dimension as usize,
                }
            }
            "ssh_1d" => Family::Ssh1d { v: get("v", 0.5), w: get("w", 1.0) },
            "custom" => Family::Custom(self.custom.clone().ok_or_else(|| Error::InvalidParameter {
                name: "custom".into(),
                reason: "family `custom` needs a [custom] cell description".into(),
            })?),
            _ => unreachable!(),
        })
    }
}

impl Family {
    pub fn dimension(&self) -> usize {
        match self {
            Family::AtomicLimit { dimension, .. } => *dimension,
            Family::Ssh1d { .. } => 1,
            Family::Custom(c) => c.dimension,
            _ => 2,
        }
    }

    /// Unit cell of the periodic model. Hofstadter uses the `q x 1`
    /// magnetic cell in the Landau gauge.
    pub fn cell_model(&self) -> CellModel {
        match *self {
            Family::Haldane { t1, t2, phi, mass } => haldane_cell(t1, t2, phi, mass),
            Family::Hofstadter { t, flux, .. } => hofstadter_cell(t, flux),
            Family::AtomicLimit { onsite_a, onsite_b, dimension } => CellModel {
                dimension,
                extent: [1, 1],
                basis: vec![[0.0, 0.0]],
                orbitals: 2,
                onsite: vec![onsite_a, onsite_b],
                hops: vec![],
            },
            Family::Ssh1d { v, w } => CellModel {
                dimension: 1,
                extent: [2, 1],
                basis: vec![[0.0, 0.0], [1.0, 0.0]],
                orbitals: 1,
                onsite: vec![0.0, 0.0],
                hops: vec![
                    Hop { row: 0, col: 1, shift: [0, 0], amplitude: C64::from(v) },
                    Hop { row: 1, col: 0, shift: [1, 0], amplitude: C64::from(w) },
                ],
            },
            Family::Custom(ref c) => CellModel {
                dimension: c.dimension,
                extent: c.extent,
                basis: c.basis.clone(),
                orbitals: c.orbitals,
                onsite: c.onsite.clone(),
                hops: c
                    .hoppings
                    .iter()
                    .map(|h| Hop { row: h.row, col: h.col, shift: h.shift, amplitude: C64::new(h.re, h.im) })
                    .collect(),
            },
        }
    }
}

/// Honeycomb lattice in Bravais-reduced coordinates: primitive vectors are
/// the unit axes, so one cell has unit area, and the two sublattices sit at
/// `-(1/6, 1/6)` (A) and `+(1/6, 1/6)` (B).
fn haldane_cell(t1: f64, t2: f64, phi: f64, mass: f64) -> CellModel {
    let nn = |shift| Hop { row: 0, col: 1, shift, amplitude: C64::from(t1) };
    let nnn = |row, shift, sign: f64| Hop { row, col: row, shift, amplitude: C64::from_polar(t2, sign * phi) };
    let mut hops = vec![nn([0, 0]), nn([-1, 0]), nn([0, -1])];
    // The three next-nearest-neighbour vectors a1, a2 - a1, -a2 all circulate
    // the same way around a hexagon; the phase sign flips between sublattices.
    for shift in [[1, 0], [-1, 1], [0, -1]] {
        hops.push(nnn(0, shift, 1.0));
        hops.push(nnn(1, shift, -1.0));
    }
    CellModel {
        dimension: 2,
        extent: [1, 1],
        basis: vec![[-1.0 / 6.0, -1.0 / 6.0], [1.0 / 6.0, 1.0 / 6.0]],
        orbitals: 1,
        onsite: vec![mass, -mass],
        hops,
    }
}

fn hofstadter_cell(t: f64, flux: Flux) -> CellModel {
    let q = flux.q as usize;
    let mut hops = Vec::new();
    for m in 0..q {
        let (col, shift) = if m + 1 < q { (m + 1, [0, 0]) } else { (0, [1, 0]) };
        hops.push(Hop { row: m, col, shift, amplitude: C64::from(-t) });
        let theta = landau_phase(flux.field(), [m as f64, 0.0], [m as f64, 1.0], 0.0);
        hops.push(Hop { row: m, col: m, shift: [0, 1], amplitude: -t * C64::from_polar(1.0, theta) });
    }
    CellModel {
        dimension: 2,
        extent: [q, 1],
        basis: (0..q).map(|m| [m as f64, 0.0]).collect(),
        orbitals: 1,
        onsite: vec![0.0; q],
        hops,
    }
}

/// Peierls phase of `H[i][j]` (hop from `rj` to `ri`) for `A = B (0, x - x0)`.
fn landau_phase(field: f64, ri: [f64; 2], rj: [f64; 2], x0: f64) -> f64 {
    let xm = 0.5 * (ri[0] + rj[0]) - x0;
    field * xm * (ri[1] - rj[1])
}

/// Peierls phase of `H[i][j]` for `A = (B/2)(-y, x)`.
fn symmetric_phase(field: f64, ri: [f64; 2], rj: [f64; 2]) -> f64 {
    let xm = 0.5 * (ri[0] + rj[0]);
    let ym = 0.5 * (ri[1] + rj[1]);
    0.5 * field * (xm * (ri[1] - rj[1]) - ym * (ri[0] - rj[0]))
}

/// Square-lattice Hofstadter model on `n x n` sites with Peierls phases.
fn hofstadter_real_space(
    t: f64,
    flux: Flux,
    n: usize,
    boundary: Boundary,
    gauge: Gauge,
) -> Result<HermitianOperator> {
    if boundary == Boundary::Periodic {
        if gauge == Gauge::Symmetric {
            return Err(Error::InvalidParameter {
                name: "gauge".into(),
                reason: "the symmetric gauge is not periodic; use `landau` with a periodic boundary".into(),
            });
        }
        if !n.is_multiple_of(flux.q as usize) {
            return Err(Error::IncompatibleSize { size: n, period: flux.q as usize });
        }
    }
    let offset = (n as f64 - 1.0) / 2.0;
    let sites: Vec<[f64; 2]> = (0..n * n)
        .map(|idx| [(idx % n) as f64 - offset, (idx / n) as f64 - offset])
        .collect();
    let geometry = Arc::new(SiteGeometry::new(2, sites.clone(), 1, n, boundary)?);
    let field = flux.field();
    let mut h = Array2::<C64>::zeros((n * n, n * n));
    for iy in 0..n {
        for ix in 0..n {
            let i = iy * n + ix;
            let ri = sites[i];
            for (dx, dy) in [(1i64, 0i64), (0, 1)] {
                let (tx, ty) = (ix as i64 + dx, iy as i64 + dy);
                let (tx, ty) = match boundary {
                    Boundary::Open if tx >= n as i64 || ty >= n as i64 => continue,
                    _ => (tx.rem_euclid(n as i64) as usize, ty.rem_euclid(n as i64) as usize),
                };
                let j = ty * n + tx;
                // Unwrapped position of the neighbour.
                let rj = [ri[0] + dx as f64, ri[1] + dy as f64];
                let theta = match gauge {
                    Gauge::Symmetric => symmetric_phase(field, ri, rj),
                    Gauge::Landau => landau_phase(field, ri, rj, -offset),
                };
                let amp = -t * C64::from_polar(1.0, theta);
                h[[i, j]] += amp;
                h[[j, i]] += amp.conj();
            }
        }
    }
    HermitianOperator::new(h, geometry)
}

/// Real-space Hamiltonian of `spec` on a sample of linear size `size`.
///
/// `size` counts unit cells per axis (sites per axis for Hofstadter). Any
/// disorder in `spec` is added on top.
pub fn build_model(spec: &ModelSpec, size: usize, boundary: Boundary) -> Result<HermitianOperator> {
    let family = spec.family()?;
    if size < 2 {
        return Err(Error::InvalidParameter { name: "size".into(), reason: format!("must be >= 2, got {size}") });
    }
    let clean = match &family {
        Family::Hofstadter { t, flux, gauge } => {
            let gauge = gauge.unwrap_or(match boundary {
                Boundary::Open => Gauge::Symmetric,
                Boundary::Periodic => Gauge::Landau,
            });
            hofstadter_real_space(*t, *flux, size, boundary, gauge)?
        }
        other => {
            let cell = other.cell_model();
            cell.tile([size, size], size, boundary)?
        }
    };
    match &spec.disorder {
        Some(d) => add_disorder(&clean, d),
        None => Ok(clean),
    }
}

/// Builds the model at `spec.size` with `spec.boundary` (open by default).
pub fn build_model_from_spec(spec: &ModelSpec) -> Result<HermitianOperator> {
    let size = spec.size.ok_or_else(|| Error::InvalidParameter {
        name: "size".into(),
        reason: "missing".into(),
    })?;
    build_model(spec, size, spec.boundary.unwrap_or_default())
}

/// `h + strength * W` with a seeded diagonal `W`.
pub fn add_disorder(h: &HermitianOperator, d: &DisorderSpec) -> Result<HermitianOperator> {
    d.validate()?;
    let mut m = h.matrix().to_owned();
    if d.strength > 0.0 {
        for (i, w) in d.realization(m.nrows()).into_iter().enumerate() {
            m[[i, i]] += d.strength * w;
        }
    }
    HermitianOperator::new(m, h.geometry().clone())
}

pub fn bloch_hamiltonian(spec: &ModelSpec) -> Result<BlochHamiltonian> {
    let family = spec.family()?;
    if spec.active_disorder().is_some() {
        return Err(Error::NotPeriodic("disordered models have no Bloch decomposition".into()));
    }
    BlochHamiltonian::new(family.cell_model())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigh, max_abs_diff};

    #[test]
    fn unknown_family_is_rejected() {
        let err = build_model(&ModelSpec::new("kagome"), 4, Boundary::Open);
        assert!(matches!(err, Err(Error::UnknownFamily(_))));
    }

    #[test]
    fn zero_denominator_flux_is_rejected() {
        let spec = ModelSpec::new("hofstadter").param("q", 0.0);
        assert!(matches!(spec.family(), Err(Error::InvalidFlux { .. })));
    }

    #[test]
    fn flux_is_reduced_to_lowest_terms() {
        assert_eq!(Flux::new(2, 6).unwrap(), Flux { p: 1, q: 3 });
    }

    #[test]
    fn periodic_hofstadter_needs_commensurate_size() {
        let spec = ModelSpec::new("hofstadter");
        assert!(matches!(
            build_model(&spec, 10, Boundary::Periodic),
            Err(Error::IncompatibleSize { size: 10, period: 3 })
        ));
    }

    #[test]
    fn unknown_parameter_is_named() {
        let spec = ModelSpec::new("haldane").param("t3", 1.0);
        let msg = spec.family().unwrap_err().to_string();
        assert!(msg.contains("parameters.t3"), "{msg}");
    }

    #[test]
    fn atomic_limit_is_diagonal_with_two_levels() {
        let h = build_model(&ModelSpec::new("atomic_limit"), 4, Boundary::Open).unwrap();
        let m = h.matrix();
        let mut minus = 0;
        let mut plus = 0;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if i != j {
                    assert_eq!(m[[i, j]], C64::new(0.0, 0.0));
                }
            }
            if m[[i, i]].re == -1.0 {
                minus += 1;
            } else if m[[i, i]].re == 1.0 {
                plus += 1;
            }
        }
        assert_eq!((minus, plus), (16, 16));
    }

    #[test]
    fn dimerized_ssh_spectrum() {
        let spec = ModelSpec::new("ssh_1d").param("v", 0.0).param("w", 1.0);
        let h = build_model(&spec, 10, Boundary::Open).unwrap();
        let (e, _) = eigh(&h.matrix()).unwrap();
        assert_eq!(e.len(), 20);
        for v in &e {
            let nearest = v.round();
            assert!((v - nearest).abs() < 1e-12 && nearest.abs() <= 1.0, "{v}");
        }
        assert_eq!(e.iter().filter(|v| v.abs() < 1e-12).count(), 2);
    }

    #[test]
    fn zero_disorder_is_identity() {
        let h = build_model(&ModelSpec::new("haldane"), 3, Boundary::Open).unwrap();
        let d = DisorderSpec { kind: DisorderKind::OnsiteUniform, strength: 0.0, seed: Some(9) };
        let h2 = add_disorder(&h, &d).unwrap();
        assert_eq!(h.matrix(), h2.matrix());
    }

    #[test]
    fn disorder_is_bounded_and_reproducible() {
        let h = build_model(&ModelSpec::new("haldane"), 4, Boundary::Open).unwrap();
        for kind in [DisorderKind::OnsiteUniform, DisorderKind::OnsiteBinary] {
            let d = DisorderSpec { kind, strength: 0.3, seed: Some(11) };
            let a = add_disorder(&h, &d).unwrap();
            let b = add_disorder(&h, &d).unwrap();
            assert_eq!(a.matrix(), b.matrix());
            assert!(max_abs_diff(&a.matrix(), &h.matrix()) <= 0.3 + 1e-15);
        }
    }

    #[test]
    fn negative_disorder_strength_is_rejected() {
        let d = DisorderSpec { kind: DisorderKind::OnsiteUniform, strength: -0.1, seed: Some(0) };
        assert!(d.validate().is_err());
    }

    #[test]
    fn bloch_rejects_disorder() {
        let spec = ModelSpec::new("haldane").with_disorder(DisorderSpec {
            kind: DisorderKind::OnsiteBinary,
            strength: 0.1,
            seed: Some(1),
        });
        assert!(matches!(bloch_hamiltonian(&spec), Err(Error::NotPeriodic(_))));
    }

    #[test]
    fn atomic_limit_bloch_is_constant() {
        let bh = bloch_hamiltonian(&ModelSpec::new("atomic_limit")).unwrap();
        let a = bh.at([0.0, 0.0]);
        let b = bh.at([1.3, -2.1]);
        assert_eq!(a, b);
        assert_eq!(a[[0, 1]], C64::new(0.0, 0.0));
    }
}
