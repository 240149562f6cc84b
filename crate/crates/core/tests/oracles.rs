//! Library results checked against independently computed references.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use chernlab::chern::{bloch_chern_number, local_chern_map, marker_density, reduced_position_density, BoxRestriction};
use chernlab::dichotomy::{gauss_legendre, integrate_rectangle, kato_nagy_transport};
use chernlab::gallery::{haldane_topological, haldane_trivial, hofstadter_third};
use chernlab::gwb::construct_gwb;
use chernlab::lattice::{bloch_hamiltonian, build_model, Boundary, Gauge, ModelSpec, SiteGeometry};
use chernlab::linalg::{eigh, identity, max_abs_diff, C64};
use chernlab::pipeline::{ground_state, Filling};
use chernlab::spectral::{random_projector, Projector};
use ndarray::{Array1, Array2};

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Union of Bloch eigenvalues over the `cells[0] x cells[1]` discrete momenta.
fn bloch_union(spec: &ModelSpec, cells: [usize; 2]) -> Vec<f64> {
    let bh = bloch_hamiltonian(spec).unwrap();
    let mut out = Vec::new();
    for m in 0..cells[0] {
        for n in 0..cells[1] {
            let k = [TAU * m as f64 / cells[0] as f64, TAU * n as f64 / cells[1] as f64];
            out.extend(eigh(&bh.at(k).view()).unwrap().0);
        }
    }
    sorted(out)
}

fn real_space(spec: &ModelSpec, n: usize) -> Vec<f64> {
    let h = build_model(spec, n, Boundary::Periodic).unwrap();
    sorted(eigh(&h.matrix()).unwrap().0)
}

#[test]
fn periodic_sample_spectrum_is_union_of_bloch_spectra() {
    for spec in [haldane_topological(), haldane_trivial(), ModelSpec::new("atomic_limit")] {
        let d = max_gap(&real_space(&spec, 6), &bloch_union(&spec, [6, 6]));
        assert!(d < 1e-10, "{}: {d:e}", spec.family);
    }
    // The magnetic cell is 3 sites wide.
    let spec = hofstadter_third();
    let d = max_gap(&real_space(&spec, 9), &bloch_union(&spec, [3, 9]));
    assert!(d < 1e-10, "hofstadter: {d:e}");
}

/// Chern number of the lowest `occ` bands from the Kubo formula
/// `(1/2pi) sum_k 2 Im <n|dH1|m><m|dH2|n> / (E_n - E_m)^2` on a midpoint grid.
fn kubo_chern(spec: &ModelSpec, occ: usize, grid: usize) -> f64 {
    let bh = bloch_hamiltonian(spec).unwrap();
    let h = 1e-5;
    let dk = TAU / grid as f64;
    let mut total = 0.0;
    for i in 0..grid {
        for j in 0..grid {
            let k = [(i as f64 + 0.5) * dk, (j as f64 + 0.5) * dk];
            let d1 = (bh.at([k[0] + h, k[1]]) - bh.at([k[0] - h, k[1]])) / C64::from(2.0 * h);
            let d2 = (bh.at([k[0], k[1] + h]) - bh.at([k[0], k[1] - h])) / C64::from(2.0 * h);
            let (e, v) = eigh(&bh.at(k).view()).unwrap();
            let vd = v.t().mapv(|z| z.conj());
            let a = vd.dot(&d1).dot(&v);
            let b = vd.dot(&d2).dot(&v);
            for n in 0..occ {
                for m in occ..e.len() {
                    total += 2.0 * (a[[n, m]] * b[[m, n]]).im / (e[n] - e[m]).powi(2);
                }
            }
        }
    }
    total * dk * dk / TAU
}

#[test]
fn link_chern_agrees_with_kubo_curvature() {
    let cases = [(haldane_topological(), 1), (haldane_trivial(), 1), (hofstadter_third(), 1), (hofstadter_third(), 2)];
    for (spec, occ) in cases {
        let bh = bloch_hamiltonian(&spec).unwrap();
        let link = bloch_chern_number(&bh, 0..occ, 24).unwrap();
        let kubo = kubo_chern(&spec, occ, 96);
        assert!((kubo - link.chern as f64).abs() < 1e-3, "{} occ {occ}: kubo {kubo} link {}", spec.family, link.chern);
    }
}

#[test]
fn haldane_phase_diagram_follows_sign_of_mass_relative_to_gap_closing() {
    // |M| < 3 sqrt(3) t2 |sin phi| is topological with the sign of sin phi.
    let critical = 3.0 * 3f64.sqrt() * 0.1;
    for (mass, phi, expected) in [
        (0.0, PI / 2.0, 1),
        (0.0, -PI / 2.0, -1),
        (0.8 * critical, PI / 2.0, 1),
        (1.2 * critical, PI / 2.0, 0),
        (-1.2 * critical, PI / 2.0, 0),
    ] {
        let spec = haldane_topological().param("mass", mass).param("phi", phi);
        let bh = bloch_hamiltonian(&spec).unwrap();
        assert_eq!(bloch_chern_number(&bh, 0..1, 24).unwrap().chern, expected, "M={mass} phi={phi}");
        assert!((kubo_chern(&spec, 1, 64) - expected as f64).abs() < 1e-3);
    }
}

/// Phase of `H[b][a]` around the unit square with lower-left site `(ix, iy)`.
fn plaquette_phase(h: &Array2<C64>, n: usize, ix: usize, iy: usize) -> f64 {
    let idx = |x: usize, y: usize| (y % n) * n + (x % n);
    let corners = [idx(ix, iy), idx(ix + 1, iy), idx(ix + 1, iy + 1), idx(ix, iy + 1)];
    let mut prod = C64::new(1.0, 0.0);
    for c in 0..4 {
        let (a, b) = (corners[c], corners[(c + 1) % 4]);
        prod *= h[[b, a]] / h[[b, a]].norm();
    }
    prod.arg()
}

#[test]
fn every_plaquette_carries_the_same_flux_in_both_gauges() {
    let n = 9;
    let mut phases = Vec::new();
    for (gauge, boundary, span) in
        [(Gauge::Symmetric, Boundary::Open, n - 1), (Gauge::Landau, Boundary::Open, n - 1), (Gauge::Landau, Boundary::Periodic, n)]
    {
        let spec = hofstadter_third().with_gauge(gauge);
        let h = build_model(&spec, n, boundary).unwrap().into_matrix();
        for iy in 0..span {
            for ix in 0..span {
                phases.push(plaquette_phase(&h, n, ix, iy));
            }
        }
    }
    let first = phases[0];
    assert!((first.abs() - TAU / 3.0).abs() < 1e-12, "{first}");
    assert!(phases.iter().all(|p| (p - first).abs() < 1e-12));
}

#[test]
fn open_sample_observables_are_gauge_invariant() {
    let n = 12;
    let states: Vec<_> = [Gauge::Symmetric, Gauge::Landau]
        .into_iter()
        .map(|g| ground_state(&hofstadter_third().with_gauge(g), n, Boundary::Open, &Filling::default()).unwrap())
        .collect();
    let d = max_gap(&states[0].spectrum.eigenvalues, &states[1].spectrum.eigenvalues);
    assert!(d < 1e-10);
    let m0 = local_chern_map(&states[0].projector).unwrap();
    let m1 = local_chern_map(&states[1].projector).unwrap();
    assert!(max_gap(&m0.values, &m1.values) < 1e-8);
}

fn square_geometry(k: usize) -> Arc<SiteGeometry> {
    let off = (k as f64 - 1.0) / 2.0;
    let sites = (0..k * k).map(|i| [(i % k) as f64 - off, (i / k) as f64 - off]).collect();
    Arc::new(SiteGeometry::new(2, sites, 1, k, Boundary::Open).unwrap())
}

fn diag_matrix(v: &[f64]) -> Array2<C64> {
    Array2::from_diag(&v.iter().map(|&x| C64::from(x)).collect::<Array1<_>>())
}

fn boxed_trace(a: &Array2<C64>, b: &BoxRestriction) -> C64 {
    (0..a.nrows()).filter(|&i| b.contains_index(i)).map(|i| a[[i, i]]).sum()
}

#[test]
fn marker_and_reduced_commutator_match_dense_products() {
    let geometry = square_geometry(8);
    let x1 = diag_matrix(&geometry.coordinates(0));
    let x2 = diag_matrix(&geometry.coordinates(1));
    let i = C64::new(0.0, 1.0);
    for seed in 0..4 {
        let p = random_projector(geometry.clone(), 20 + 5 * seed as usize, seed).unwrap();
        let pm = p.matrix().to_owned();
        let c1 = x1.dot(&pm) - pm.dot(&x1);
        let c2 = x2.dot(&pm) - pm.dot(&x2);
        let cp = pm.dot(&(c1.dot(&c2) - c2.dot(&c1))).dot(&pm).mapv(|z| i * z);
        let xt1 = pm.dot(&x1).dot(&pm);
        let xt2 = pm.dot(&x2).dot(&pm);
        let red = (xt1.dot(&xt2) - xt2.dot(&xt1)).mapv(|z| i * z);
        let md = marker_density(&p).unwrap();
        let rd = reduced_position_density(&p).unwrap();
        for l in [1.5, 2.5, 3.0] {
            let b = BoxRestriction::new(&geometry, l).unwrap();
            let (lhs, rhs) = (boxed_trace(&cp, &b), boxed_trace(&red, &b));
            assert!(lhs.im.abs() < 1e-10 && rhs.im.abs() < 1e-10);
            assert!((lhs.re - b.restrict_sum(&md)).abs() < 1e-10);
            assert!((rhs.re - b.restrict_sum(&rd)).abs() < 1e-10);
            assert!((lhs.re - rhs.re).abs() < 1e-10);
        }
    }
}

#[test]
fn gauss_legendre_is_exact_to_degree_19() {
    let (x, w) = gauss_legendre(10);
    assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    for deg in 0..20 {
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
        let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
        assert!((q - exact).abs() < 1e-13, "degree {deg}");
    }
}

#[test]
fn adaptive_quadrature_matches_closed_forms() {
    let e = 1f64.exp() - 1.0;
    let q = integrate_rectangle(|x| (x[0] + x[1]).exp(), [0.0, 0.0], [1.0, 1.0], 1e-12);
    assert!((q - e * e).abs() < 1e-12);
    // Solid-angle formula: int over [-L, L]^2 of (1 + |x|^2)^{-3/2}.
    for l in [1.0, 4.0, 10.0] {
        let q = integrate_rectangle(|x| (1.0 + x[0] * x[0] + x[1] * x[1]).powf(-1.5), [-l; 2], [l; 2], 1e-10);
        let exact = 4.0 * (l * l / (1.0 + 2.0 * l * l).sqrt()).atan();
        assert!((q - exact).abs() < 1e-9 * exact, "L={l}: {q} vs {exact}");
    }
}

#[test]
fn kato_nagy_rotates_a_line_onto_a_line() {
    let sites = vec![[0.0, 0.0], [1.0, 0.0]];
    let geometry = Arc::new(SiteGeometry::new(1, sites, 1, 2, Boundary::Open).unwrap());
    for theta in [0.1, 0.7, 1.2] {
        let e1 = Array2::from_shape_vec((2, 1), vec![C64::from(1.0), C64::from(0.0)]).unwrap();
        let v = Array2::from_shape_vec((2, 1), vec![C64::from(f64::cos(theta)), C64::from(f64::sin(theta))]).unwrap();
        let p0 = Projector::from_frame(e1, geometry.clone()).unwrap();
        let p1 = Projector::from_frame(v.clone(), geometry.clone()).unwrap();
        let set = construct_gwb(&p0, 0.25).unwrap();
        let t = kato_nagy_transport(&p0, &p1, &set).unwrap();
        // The minimal rotation in the plane.
        let rot = Array2::from_shape_vec(
            (2, 2),
            vec![theta.cos(), -theta.sin(), theta.sin(), theta.cos()].into_iter().map(C64::from).collect(),
        )
        .unwrap();
        assert!(max_abs_diff(&t.unitary.view(), &rot.view()) < 1e-12, "theta {theta}");
        assert!((t.distance - theta.sin()).abs() < 1e-12);
    }
}

#[test]
fn kato_nagy_identity_for_equal_projectors() {
    let gs = ground_state(&haldane_trivial(), 6, Boundary::Open, &Filling::default()).unwrap();
    let set = construct_gwb(&gs.projector, 0.2).unwrap();
    let t = kato_nagy_transport(&gs.projector, &gs.projector, &set).unwrap();
    assert_eq!(t.unitary, identity(gs.projector.dim()));
    assert_eq!(t.distance, 0.0);
}
