//! Experiment dispatch: configuration in, result bundle and exit status out.

use chernlab::chern::{chern_report, hall_conductance_switch, ChernReport, HallConductance};
use chernlab::dichotomy::{dichotomy_experiment, stability_sweep, DichotomyConfig, DichotomyReport, StabilityReport, Verdict};
use chernlab::gwb::{construct_gwb, default_cluster_tol, fit_localization, GwbSet, GwbSummary, LocalizationFunction};
use chernlab::lattice::Boundary;
use chernlab::pipeline::{check_gap, fermi_energy, ground_state_at, oracle_chern_on_grid};
use chernlab::Error;
use rayon::prelude::*;
use serde::Serialize;

use crate::bundle::{num, ResultBundle, Table};
use crate::config::{ConfigError, Experiment, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Violation,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Violation => 1,
        }
    }
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numerical(String),
    Io(String),
}

impl RunError {
    pub fn code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) | RunError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Numerical(m) => write!(f, "numerical failure: {m}"),
            RunError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

/// Classifies a library error raised while processing `context`.
fn classify(context: &str, e: Error) -> RunError {
    let message = format!("{context}: {e}");
    let field = match &e {
        Error::UnknownFamily(_) | Error::InvalidFlux { .. } => "model",
        Error::InvalidParameter { name, .. } => name.as_str(),
        Error::IncompatibleSize { .. } => "sizes",
        Error::BoxExceedsSample { .. } | Error::UnorderedBoxes => "l_values",
        Error::TooFewPoints { .. } | Error::InvalidTolerance { .. } | Error::Parse(_) => "config",
        Error::Io { source, .. } => return RunError::Io(format!("{message} ({source})")),
        _ => return RunError::Numerical(message),
    };
    RunError::Config(ConfigError { field: field.to_string(), message })
}

fn size_context(size: usize) -> String {
    format!("size {size}")
}

pub fn execute(cfg: &RunConfig, config_bytes: &[u8]) -> Result<(ResultBundle, Status), RunError> {
    let mut bundle = ResultBundle::new(cfg.experiment.name(), cfg.seed, config_bytes);
    let status = match cfg.experiment {
        Experiment::Marker => marker(cfg, &mut bundle)?,
        Experiment::Gwb => gwb(cfg, &mut bundle)?,
        Experiment::Dichotomy => dichotomy(cfg, &mut bundle)?,
        Experiment::Stability => stability(cfg, &mut bundle)?,
    };
    Ok((bundle, status))
}

#[derive(Serialize)]
struct MarkerRun {
    size: usize,
    gap: f64,
    report: ChernReport,
    hall: Option<HallConductance>,
}

fn marker(cfg: &RunConfig, bundle: &mut ResultBundle) -> Result<Status, RunError> {
    let ef = fermi_energy(&cfg.model, &cfg.filling).map_err(|e| classify("filling", e))?;
    let oracle = oracle_chern_on_grid(&cfg.model, &cfg.filling, cfg.chern.k_grid).map_err(|e| classify("oracle", e))?;
    let runs = cfg
        .sizes
        .par_iter()
        .map(|&size| {
            let ctx = size_context(size);
            let run = || -> chernlab::Result<MarkerRun> {
                let state = ground_state_at(&cfg.model, size, Boundary::Open, &cfg.filling, ef)?;
                let gap = check_gap(&cfg.model, size, &state, cfg.min_gap, &ctx)?;
                let report = chern_report(&state.projector, &cfg.l_values, oracle, cfg.chern.local_map)?;
                let hall = match &cfg.chern.switch {
                    Some(pair) => Some(hall_conductance_switch(&state.projector, &pair.first, &pair.second)?),
                    None => None,
                };
                Ok(MarkerRun { size, gap, report, hall })
            };
            run().map_err(|e| classify(&ctx, e))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut summary = Table::new(&["size", "marker", "oracle", "identity_defect", "gap"]);
    let mut sequences = Table::new(&["size", "L", "t_L"]);
    let mut hall = Table::new(&["size", "trace", "chern_estimate", "window_half_width"]);
    for r in &runs {
        let oracle = r.report.oracle_chern.map(|c| c.to_string()).unwrap_or_default();
        summary.push(vec![
            r.size.to_string(),
            num(r.report.marker),
            oracle,
            num(r.report.commutator_identity_defect),
            num(r.gap),
        ]);
        for &(l, t) in &r.report.sequence.entries {
            sequences.push(vec![r.size.to_string(), num(l), num(t)]);
        }
        if let Some(h) = &r.hall {
            hall.push(vec![r.size.to_string(), num(h.trace), num(h.chern_estimate), num(h.window_half_width)]);
        }
        if let Some(map) = &r.report.local_map {
            let mut t = Table::new(&["x", "y", "marker"]);
            for (p, v) in map.positions.iter().zip(&map.values) {
                t.push(vec![num(p[0]), num(p[1]), num(*v)]);
            }
            bundle.add_table(format!("local_map_N{}", r.size), t);
        }
    }
    bundle.add_table("marker", summary);
    bundle.add_table("tuv_sequences", sequences);
    if cfg.chern.switch.is_some() {
        bundle.add_table("hall_conductance", hall);
    }
    bundle.add_report("marker", &runs);
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct GwbRun {
    size: usize,
    gap: f64,
    cluster_tol: f64,
    summary: GwbSummary,
}

fn gwb(cfg: &RunConfig, bundle: &mut ResultBundle) -> Result<Status, RunError> {
    let ef = fermi_energy(&cfg.model, &cfg.filling).map_err(|e| classify("filling", e))?;
    let built: Vec<(GwbRun, GwbSet)> = cfg
        .sizes
        .par_iter()
        .map(|&size| {
            let ctx = size_context(size);
            let run = || -> chernlab::Result<(GwbRun, GwbSet)> {
                let state = ground_state_at(&cfg.model, size, Boundary::Open, &cfg.filling, ef)?;
                let gap = check_gap(&cfg.model, size, &state, cfg.min_gap, &ctx)?;
                let tol = cfg.gwb.cluster_tol.unwrap_or_else(|| default_cluster_tol(state.projector.geometry()));
                let set = construct_gwb(&state.projector, tol)?;
                Ok((GwbRun { size, gap, cluster_tol: tol, summary: set.summary() }, set))
            };
            run().map_err(|e| classify(&ctx, e))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let sets: Vec<&GwbSet> = built.iter().map(|(_, s)| s).collect();
    let localization = fit_localization(&sets, &cfg.gwb.s_grid, &cfg.gwb.alpha_grid, cfg.gwb.growth_tolerance)
        .map_err(|e| classify("gwb", e))?;

    let weights = cfg
        .gwb
        .s_grid
        .iter()
        .map(|&s| LocalizationFunction::polynomial(s))
        .collect::<chernlab::Result<Vec<_>>>()
        .map_err(|e| classify("gwb.s_grid", e))?;
    for (run, set) in &built {
        let mut columns: Vec<String> = vec!["gamma1".into(), "gamma2".into(), "a".into()];
        columns.extend(cfg.gwb.s_grid.iter().map(|s| format!("moment_s{s}")));
        let mut t = Table::with_columns(columns);
        let moments: Vec<Vec<f64>> = weights.iter().map(|g| set.moments(g)).collect();
        for (j, c) in set.centers().iter().enumerate() {
            let mut row = vec![num(c[0]), num(c[1]), set.band_indices()[j].to_string()];
            row.extend(moments.iter().map(|m| num(m[j])));
            t.push(row);
        }
        bundle.add_table(format!("gwb_N{}", run.size), t);
    }

    let mut summary = Table::new(&[
        "size",
        "functions",
        "distinct_centers",
        "m_star",
        "min_center_spacing",
        "gram_defect",
        "completeness_defect",
    ]);
    for (run, _) in &built {
        let s = &run.summary;
        summary.push(vec![
            run.size.to_string(),
            s.functions.to_string(),
            s.distinct_centers.to_string(),
            s.m_star.to_string(),
            num(s.min_center_spacing),
            num(s.gram_defect),
            num(s.completeness_defect),
        ]);
    }
    bundle.add_table("gwb_summary", summary);
    bundle.add_table("sup_moments", moment_table(&localization));

    #[derive(Serialize)]
    struct GwbReport<'a> {
        sets: Vec<&'a GwbRun>,
        localization: &'a chernlab::gwb::LocalizationReport,
    }
    bundle.add_report("gwb", &GwbReport { sets: built.iter().map(|(r, _)| r).collect(), localization: &localization });
    Ok(Status::Ok)
}

fn moment_table(localization: &chernlab::gwb::LocalizationReport) -> Table {
    let mut t = Table::new(&["weight", "size", "sup_moment"]);
    for sweep in localization.polynomial.iter().chain(&localization.exponential) {
        for (size, m) in localization.sizes.iter().zip(&sweep.sup_moments) {
            t.push(vec![sweep.g.label(), size.to_string(), num(*m)]);
        }
    }
    t
}

fn dichotomy(cfg: &RunConfig, bundle: &mut ResultBundle) -> Result<Status, RunError> {
    let dcfg = DichotomyConfig {
        filling: cfg.filling,
        l_values: cfg.l_values.clone(),
        s_grid: cfg.gwb.s_grid.clone(),
        alpha_grid: cfg.gwb.alpha_grid.clone(),
        cluster_tol: cfg.gwb.cluster_tol,
        growth_tolerance: cfg.gwb.growth_tolerance,
        min_gap: cfg.min_gap,
        ..DichotomyConfig::default()
    };
    let report = dichotomy_experiment(&cfg.model.family, &cfg.model, &cfg.sizes, &dcfg)
        .map_err(|e| classify("dichotomy", e))?;
    add_dichotomy_tables(bundle, &report);
    bundle.add_report("dichotomy", &report);
    Ok(match report.verdict {
        Verdict::Consistent => Status::Ok,
        Verdict::ViolationFlag => Status::Violation,
    })
}

fn add_dichotomy_tables(bundle: &mut ResultBundle, report: &DichotomyReport) {
    let mut tuv = Table::new(&["L", "t_L"]);
    for &(l, t) in &report.chern.sequence.entries {
        tuv.push(vec![num(l), num(t)]);
    }
    bundle.add_table("tuv_sequence", tuv);

    let d = &report.decomposition;
    let mut dec = Table::new(&["L", "T1", "T2", "T3", "reduced_commutator", "gamma_commutator"]);
    for (k, l) in d.l_values.iter().enumerate() {
        dec.push(vec![
            num(*l),
            num(d.traces[0][k]),
            num(d.traces[1][k]),
            num(d.traces[2][k]),
            num(d.reduced_commutator[k]),
            num(d.gamma_commutator[k]),
        ]);
    }
    bundle.add_table("decomposition", dec);

    let m = &report.mass;
    let mut mass = Table::new(&["L", "mass_out", "mass_in"]);
    for (k, l) in m.l_values.iter().enumerate() {
        mass.push(vec![num(*l), num(m.mass_out[k]), num(m.mass_in[k])]);
    }
    bundle.add_table("mass", mass);
    bundle.add_table("sup_moments", moment_table(&report.localization));

    let mut ev = Table::new(&["size", "gap", "rank", "functions", "m_star", "gram_defect", "completeness_defect", "second_moment"]);
    for e in &report.evidence {
        ev.push(vec![
            e.size.to_string(),
            num(e.gap),
            e.rank.to_string(),
            e.gwb.functions.to_string(),
            e.gwb.m_star.to_string(),
            num(e.gwb.gram_defect),
            num(e.gwb.completeness_defect),
            num(e.second_moment),
        ]);
    }
    bundle.add_table("size_evidence", ev);
}

fn stability(cfg: &RunConfig, bundle: &mut ResultBundle) -> Result<Status, RunError> {
    let reports = cfg
        .sizes
        .par_iter()
        .map(|&size| {
            stability_sweep(
                &cfg.model,
                &cfg.stability.lambda_grid,
                size,
                &cfg.filling,
                &cfg.l_values,
                cfg.stability.disorder_kind,
                cfg.seed,
                cfg.min_gap,
            )
            .map_err(|e| classify(&size_context(size), e))
        })
        .collect::<Result<Vec<StabilityReport>, _>>()?;
    let mut t = Table::new(&["size", "lambda", "gap", "marker"]);
    for r in &reports {
        for p in &r.points {
            t.push(vec![r.size.to_string(), num(p.lambda), num(p.gap), num(p.report.marker)]);
        }
    }
    bundle.add_table("stability", t);
    bundle.add_report("stability", &reports);
    Ok(if reports.iter().all(|r| r.stable) { Status::Ok } else { Status::Violation })
}
