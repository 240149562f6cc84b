use serde::{Deserialize, Serialize};

use super::decomposition::{commutator_decomposition, mass_estimates, trs_defect, DecompositionReport, MassEstimates};
use crate::chern::{chern_report, ChernReport};
use crate::error::{Error, Result};
use crate::gwb::{construct_gwb, default_cluster_tol, fit_localization, GwbSet, GwbSummary, LocalizationFunction, LocalizationReport};
use crate::lattice::{Boundary, DisorderKind, DisorderSpec, ModelSpec};
use crate::pipeline::{check_gap, fermi_energy, ground_state_at, oracle_chern, Filling};

/// Which localization threshold a claim refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    /// Polynomial localization with `s` above the proven threshold.
    TheoremCheck,
    /// The conjectured threshold `s = 1`.
    ConjectureCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    ViolationFlag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DichotomyConfig {
    pub filling: Filling,
    /// Box half-widths used at the largest size.
    pub l_values: Vec<f64>,
    pub s_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub cluster_tol: Option<f64>,
    pub growth_tolerance: f64,
    /// `|C|` below this counts as vanishing.
    pub marker_tolerance: f64,
    /// `|C|` above this counts as nontrivial.
    pub chern_threshold: f64,
    pub theorem_s: f64,
    pub conjecture_s: f64,
    pub exponent_limit: f64,
    pub min_gap: f64,
    /// `|P - conj(P)|` below this counts as time-reversal symmetric.
    pub trs_tolerance: f64,
}

impl Default for DichotomyConfig {
    fn default() -> Self {
        Self {
            filling: Filling::default(),
            l_values: vec![3.0, 4.0, 5.0, 6.0],
            s_grid: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            alpha_grid: vec![0.05, 0.1, 0.25, 0.5],
            cluster_tol: None,
            growth_tolerance: 0.1,
            marker_tolerance: 0.05,
            chern_threshold: 0.5,
            theorem_s: 5.0,
            conjecture_s: 1.0,
            exponent_limit: 1.2,
            min_gap: 1e-6,
            trs_tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeEvidence {
    pub size: usize,
    pub gap: f64,
    pub rank: usize,
    pub gwb: GwbSummary,
    /// Sup second moment `max_gamma sum <x - gamma>^2 |w|^2`.
    pub second_moment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub mode: CheckMode,
    pub s_threshold: f64,
    pub localized: bool,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub model: String,
    pub sizes: Vec<usize>,
    pub chern: ChernReport,
    pub localization: LocalizationReport,
    pub evidence: Vec<SizeEvidence>,
    pub decomposition: DecompositionReport,
    pub mass: MassEstimates,
    pub trs_defect: f64,
    pub time_reversal_symmetric: bool,
    pub exponentially_localized: bool,
    pub claims: Vec<Claim>,
    pub verdict: Verdict,
}

fn verdict(marker: f64, localized: bool, exp_localized: bool, trs: bool, cfg: &DichotomyConfig) -> Verdict {
    let nontrivial_but_localized = marker.abs() > cfg.chern_threshold && localized;
    let trivial_but_delocalized = marker.abs() < cfg.marker_tolerance && trs && !exp_localized;
    if nontrivial_but_localized || trivial_but_delocalized {
        Verdict::ViolationFlag
    } else {
        Verdict::Consistent
    }
}

fn validate_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter { name: "sizes".into(), reason: "must be strictly ascending".into() });
    }
    Ok(())
}

/// Projector, marker, Wannier basis, localization sweep, decomposition and
/// mass estimates on open samples of every size, assembled into a verdict.
pub fn dichotomy_experiment(name: &str, spec: &ModelSpec, sizes: &[usize], cfg: &DichotomyConfig) -> Result<DichotomyReport> {
    validate_sizes(sizes)?;
    let ef = fermi_energy(spec, &cfg.filling)?;
    let mut sets: Vec<GwbSet> = Vec::with_capacity(sizes.len());
    let mut evidence = Vec::with_capacity(sizes.len());
    let second = LocalizationFunction::polynomial(1.0)?;
    for &size in sizes {
        let state = ground_state_at(spec, size, Boundary::Open, &cfg.filling, ef)?;
        let gap = check_gap(spec, size, &state, cfg.min_gap, &format!("size {size}"))?;
        let tol = cfg.cluster_tol.unwrap_or_else(|| default_cluster_tol(state.projector.geometry()));
        let set = construct_gwb(&state.projector, tol)?;
        evidence.push(SizeEvidence {
            size,
            gap,
            rank: state.projector.rank(),
            gwb: set.summary(),
            second_moment: set.max_moment(&second),
        });
        sets.push(set);
    }
    let refs: Vec<&GwbSet> = sets.iter().collect();
    let localization = fit_localization(&refs, &cfg.s_grid, &cfg.alpha_grid, cfg.growth_tolerance)?;
    let largest = sets.last().expect("sizes are non-empty");
    let p = largest.source();
    let chern = chern_report(p, &cfg.l_values, oracle_chern(spec, &cfg.filling)?, false)?;
    let decomposition = commutator_decomposition(p, largest, &cfg.l_values)?;
    let mass = mass_estimates(largest, &cfg.l_values)?;
    let trs = trs_defect(p);
    let time_reversal_symmetric = trs <= cfg.trs_tolerance;
    let exponentially_localized = localization.exponentially_localized();
    let claims: Vec<Claim> = [(CheckMode::TheoremCheck, cfg.theorem_s), (CheckMode::ConjectureCheck, cfg.conjecture_s)]
        .into_iter()
        .map(|(mode, s)| {
            let localized = localization.stable_s_at_least(s);
            Claim {
                mode,
                s_threshold: s,
                localized,
                verdict: verdict(chern.marker, localized, exponentially_localized, time_reversal_symmetric, cfg),
            }
        })
        .collect();
    let overall = claims
        .iter()
        .find(|c| c.mode == CheckMode::TheoremCheck)
        .map(|c| c.verdict)
        .unwrap_or(Verdict::Consistent);
    Ok(DichotomyReport {
        model: name.to_string(),
        sizes: sizes.to_vec(),
        chern,
        localization,
        evidence,
        decomposition,
        mass,
        trs_defect: trs,
        time_reversal_symmetric,
        exponentially_localized,
        claims,
        verdict: overall,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityPoint {
    pub lambda: f64,
    pub gap: f64,
    pub report: ChernReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub size: usize,
    pub points: Vec<StabilityPoint>,
    /// `max - min` of the extrapolated marker over the grid.
    pub variation: f64,
    pub tolerance: f64,
    pub stable: bool,
}

/// Largest accepted marker variation across a disorder sweep.
pub const STABILITY_TOLERANCE: f64 = 0.1;

/// Marker of `spec` with onsite disorder of every strength in `lambda_grid`
/// (one seeded realization per strength), with the gap checked per strength.
#[allow(clippy::too_many_arguments)]
pub fn stability_sweep(
    spec: &ModelSpec,
    lambda_grid: &[f64],
    size: usize,
    filling: &Filling,
    l_values: &[f64],
    kind: DisorderKind,
    seed: u64,
    min_gap: f64,
) -> Result<StabilityReport> {
    if lambda_grid.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    let mut clean = spec.clone();
    clean.disorder = None;
    let ef = fermi_energy(&clean, filling)?;
    let oracle = oracle_chern(&clean, filling)?;
    let mut points = Vec::with_capacity(lambda_grid.len());
    for &lambda in lambda_grid {
        let disorder = DisorderSpec { kind, strength: lambda, seed: Some(seed) };
        disorder.validate()?;
        let dirty = clean.clone().with_disorder(disorder);
        let state = ground_state_at(&dirty, size, Boundary::Open, filling, ef)?;
        let gap = check_gap(&dirty, size, &state, min_gap, &format!("lambda = {lambda}"))?;
        let report = chern_report(&state.projector, l_values, oracle, false)?;
        points.push(StabilityPoint { lambda, gap, report });
    }
    let markers: Vec<f64> = points.iter().map(|p| p.report.marker).collect();
    let hi = markers.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = markers.iter().copied().fold(f64::INFINITY, f64::min);
    let variation = hi - lo;
    Ok(StabilityReport {
        size,
        points,
        variation,
        tolerance: STABILITY_TOLERANCE,
        stable: variation <= STABILITY_TOLERANCE,
    })
}
