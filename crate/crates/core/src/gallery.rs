//! Reference models used by the experiments and the acceptance checks.

use std::f64::consts::FRAC_PI_2;

use crate::lattice::ModelSpec;
use crate::pipeline::Filling;

#[derive(Debug, Clone)]
pub struct GalleryModel {
    pub name: &'static str,
    pub spec: ModelSpec,
    pub filling: Filling,
    /// Sample sizes of the localization sweep, ascending.
    pub sizes: Vec<usize>,
    /// Box half-widths for markers on the largest sample.
    pub l_values: Vec<f64>,
    /// Real Hamiltonian (time-reversal symmetric without spin).
    pub real_hamiltonian: bool,
}

impl GalleryModel {
    pub fn dimension(&self) -> usize {
        self.spec.family().map(|f| f.dimension()).unwrap_or(2)
    }

    pub fn largest_size(&self) -> usize {
        *self.sizes.last().expect("gallery sweeps are non-empty")
    }
}

pub fn haldane_topological() -> ModelSpec {
    ModelSpec::new("haldane").param("t1", 1.0).param("t2", 0.1).param("phi", FRAC_PI_2).param("mass", 0.0)
}

pub fn haldane_trivial() -> ModelSpec {
    ModelSpec::new("haldane").param("t1", 1.0).param("t2", 0.1).param("phi", FRAC_PI_2).param("mass", 3.0)
}

pub fn haldane_trs() -> ModelSpec {
    ModelSpec::new("haldane").param("t1", 1.0).param("t2", 0.1).param("phi", 0.0).param("mass", 0.5)
}

pub fn hofstadter_third() -> ModelSpec {
    ModelSpec::new("hofstadter").param("t", 1.0).param("p", 1.0).param("q", 3.0)
}

pub fn gallery() -> Vec<GalleryModel> {
    let square = vec![8, 12, 16];
    let boxes = vec![3.0, 4.0, 5.0, 6.0];
    vec![
        GalleryModel {
            name: "atomic_limit",
            spec: ModelSpec::new("atomic_limit"),
            filling: Filling::default(),
            sizes: square.clone(),
            l_values: boxes.clone(),
            real_hamiltonian: true,
        },
        GalleryModel {
            name: "haldane_topological",
            spec: haldane_topological(),
            filling: Filling::default(),
            sizes: square.clone(),
            l_values: boxes.clone(),
            real_hamiltonian: false,
        },
        GalleryModel {
            name: "haldane_trivial",
            spec: haldane_trivial(),
            filling: Filling::default(),
            sizes: square.clone(),
            l_values: boxes.clone(),
            real_hamiltonian: false,
        },
        GalleryModel {
            name: "haldane_trs",
            spec: haldane_trs(),
            filling: Filling::default(),
            sizes: square,
            l_values: boxes.clone(),
            real_hamiltonian: true,
        },
        GalleryModel {
            name: "hofstadter_1_3",
            spec: hofstadter_third(),
            filling: Filling::default(),
            sizes: vec![9, 12, 15],
            l_values: boxes,
            real_hamiltonian: false,
        },
        GalleryModel {
            name: "ssh_1d",
            spec: ModelSpec::new("ssh_1d").param("v", 0.3).param("w", 1.0),
            filling: Filling::Island { index: 0, gap_tol: 0.5 },
            sizes: vec![20, 30, 40],
            l_values: vec![],
            real_hamiltonian: true,
        },
    ]
}

pub fn find(name: &str) -> Option<GalleryModel> {
    gallery().into_iter().find(|m| m.name == name)
}
