use std::f64::consts::TAU;
use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use serde_json::{json, Value};

use qiopa_core::fock::{qiopa_unitary, Basis, BipartiteState, FockCutoff, GainParams, ModeTensor, Site};
use qiopa_core::macrostates::{
    branch_distinguishability, build_macro_state, build_micro_macro, has_branch_parity, mean_photon_numbers,
    predicted_deficit, GammaTable, MacroBranch,
};
use qiopa_core::measurement::{
    chsh, correlations_csv, fringe_scan, phase_range, ChshSettings, Estimation, MeasurementSetting, SiteFilters,
};
use qiopa_core::protocols::{
    double_amplify, entanglement_swap, macro_singlet, make_singlet, micro_bell_state, BellOutcome, OFilter,
    OFilterConfig, ProgramKind,
};
use qiopa_core::wigner::{negativity_report, residual_report, wigner_grid, Layer, SliceSpec, WignerSource};
use qiopa_core::QiopaError;

use crate::config::{ConfigError, ExperimentConfig, FilterSites, Mode, Protocol, StateKind};

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numerics(QiopaError),
    Io(String),
}

impl RunError {
    /// 2 for configuration errors, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerics(_) => 3,
            RunError::Io(_) => 1,
        }
    }

    /// Single-line JSON description.
    pub fn to_json(&self) -> String {
        let v = match self {
            RunError::Config(e) => json!({"error": "config", "field": e.field, "message": e.message}),
            RunError::Numerics(e) => json!({"error": "numerics", "message": e.to_string()}),
            RunError::Io(m) => json!({"error": "io", "message": m}),
        };
        v.to_string()
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Numerics(e) => write!(f, "{e}"),
            RunError::Io(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<QiopaError> for RunError {
    fn from(e: QiopaError) -> Self {
        match e {
            QiopaError::InvalidParameter { name, reason } => RunError::Config(ConfigError::new(name, reason)),
            QiopaError::UnsupportedInjection(_) => RunError::Config(ConfigError::new("injection", e.to_string())),
            QiopaError::NotResolvable(_) => RunError::Config(ConfigError::new("outcome", e.to_string())),
            other => RunError::Numerics(other),
        }
    }
}

/// What one protocol produced, before it is written out.
struct Products {
    csv: Option<String>,
    summary: Value,
    diagnostics: Value,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub outputs: Vec<PathBuf>,
    pub manifest: PathBuf,
    pub diagnostics: Value,
}

/// Runs `config.protocol`, writing `<stem>.csv` (when the protocol has a
/// table), `<stem>.json` and `<stem>.manifest.json` into `config.out`.
pub fn run(config: &ExperimentConfig) -> Result<RunReport, RunError> {
    let protocol = config
        .protocol
        .ok_or_else(|| ConfigError::new("protocol", "no protocol selected"))?;
    config.validate()?;
    let start = Instant::now();
    let products = match protocol {
        Protocol::Macrostate => macrostate(config)?,
        Protocol::MicroMacro => micro_macro(config)?,
        Protocol::Swap => swap(config)?,
        Protocol::DoubleAmp => double_amp(config)?,
        Protocol::Wigner => wigner(config)?,
        Protocol::Chsh => chsh_run(config)?,
        Protocol::Fringe => fringe(config)?,
    };
    let wall_time = start.elapsed().as_secs_f64();

    std::fs::create_dir_all(&config.out)
        .map_err(|e| RunError::Io(format!("cannot create {}: {e}", config.out.display())))?;
    let stem = protocol.file_stem();
    let mut outputs = Vec::new();
    let mut write = |name: String, text: &str| -> Result<(), RunError> {
        let path = config.out.join(&name);
        std::fs::write(&path, text).map_err(|e| RunError::Io(format!("cannot write {}: {e}", path.display())))?;
        outputs.push(path);
        Ok(())
    };
    if let Some(csv) = &products.csv {
        write(format!("{stem}.csv"), csv)?;
    }
    write(format!("{stem}.json"), &pretty(&products.summary))?;
    let names: Vec<String> = outputs
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    let manifest = json!({
        "protocol": protocol.name(),
        "config": config,
        "versions": {
            "qiopa-cli": env!("CARGO_PKG_VERSION"),
            "qiopa-core": qiopa_core::VERSION,
        },
        "diagnostics": products.diagnostics,
        "outputs": names,
        "wall_time_s": wall_time,
    });
    let manifest_path = config.out.join(format!("{stem}.manifest.json"));
    std::fs::write(&manifest_path, pretty(&manifest))
        .map_err(|e| RunError::Io(format!("cannot write {}: {e}", manifest_path.display())))?;
    Ok(RunReport {
        outputs,
        manifest: manifest_path,
        diagnostics: products.diagnostics,
    })
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn gain(field: &'static str, g: f64) -> Result<GainParams, RunError> {
    GainParams::new(g).map_err(|e| RunError::Config(ConfigError::new(field, e.to_string())))
}

fn gain_json(g: GainParams) -> Value {
    json!({"g": g.g(), "C": g.cosh(), "S": g.sinh(), "Gamma": g.gamma()})
}

fn macrostate(c: &ExperimentConfig) -> Result<Products, RunError> {
    let g = gain("gain", c.gain)?;
    let k = FockCutoff::new(c.cutoff)?;
    let table = GammaTable::adaptive(g);
    let mut branches = serde_json::Map::new();
    let mut deficits = serde_json::Map::new();
    let mut states = Vec::new();
    for (name, branch) in [("parallel", MacroBranch::PhiParallel), ("perp", MacroBranch::PhiPerp)] {
        let psi = build_macro_state(g, c.phase, branch, k)?;
        let norm = psi.norm_sqr();
        branches.insert(
            name.into(),
            json!({
                "norm": norm,
                "mean_photons": mean_photon_numbers(&psi),
                "parity_support": has_branch_parity(&psi, branch),
            }),
        );
        deficits.insert(name.into(), json!(1.0 - norm));
        states.push(psi);
    }
    let overlap = states[0].overlap(&states[1])?;
    let summary = json!({
        "gain": gain_json(g),
        "phase": c.phase,
        "cutoff": c.cutoff,
        "gamma_table": {"i_max": table.i_max, "j_max": table.j_max, "total_mass": table.total_mass()},
        "branches": branches,
        "overlap_abs": overlap.norm(),
        "distinguishability": branch_distinguishability(g, c.phase, k)?,
    });
    let diagnostics = json!({
        "predicted_deficit": predicted_deficit(g, c.cutoff),
        "norm_deficit": deficits,
        "gamma_mass_deficit": 1.0 - table.total_mass(),
    });
    Ok(Products {
        csv: Some(table.to_csv()),
        summary,
        diagnostics,
    })
}

fn micro_macro(c: &ExperimentConfig) -> Result<Products, RunError> {
    let g = gain("gain", c.gain)?;
    let k = FockCutoff::new(c.cutoff)?;
    let sigma = build_micro_macro(g, c.phase, k)?;
    let mut csv = String::from("n,p_parallel,p_perp\n");
    let dists: Vec<Vec<f64>> = sigma.terms().iter().map(|t| t.site_b.total_photon_distribution()).collect();
    for n in 0..dists[0].len() {
        csv.push_str(&format!("{n},{:.12e},{:.12e}\n", dists[0][n], dists[1][n]));
    }
    // the micro sides are orthogonal, so the macro site is an even mixture
    let (mut n_par, mut n_perp) = (0.0, 0.0);
    for t in sigma.terms() {
        let (a, b) = mean_photon_numbers(&t.site_b);
        let w = t.weight.norm_sqr();
        n_par += w * a;
        n_perp += w * b;
    }
    let norm = sigma.norm_sqr();
    let summary = json!({
        "gain": gain_json(g),
        "phase": c.phase,
        "cutoff": c.cutoff,
        "norm": norm,
        "schmidt_rank": sigma.terms().len(),
        "macro_mean_photons": [n_par, n_perp],
    });
    let diagnostics = json!({
        "predicted_deficit": predicted_deficit(g, c.cutoff),
        "norm_deficit": 1.0 - norm,
    });
    Ok(Products {
        csv: Some(csv),
        summary,
        diagnostics,
    })
}

fn swap(c: &ExperimentConfig) -> Result<Products, RunError> {
    let g = gain("gain", c.gain)?;
    let k = FockCutoff::new(c.cutoff)?;
    let mut csv = String::from("outcome,probability,fidelity_vs_macro_bell,fidelity_vs_micro_bell,norm_deficit\n");
    let mut rows = Vec::new();
    let mut total = 0.0;
    let mut deficit: f64 = 0.0;
    for outcome in c.outcomes()? {
        let r = entanglement_swap(g, c.phase, k, outcome)?;
        let micro = micro_bell_state(c.phase, k, outcome);
        let vs_micro = r.post_state.fidelity(&micro)?;
        csv.push_str(&format!(
            "{},{:.15},{:.15},{:.15},{:.6e}\n",
            outcome.label(),
            r.probability,
            r.fidelity_vs_macro_bell,
            vs_micro,
            r.norm_deficit
        ));
        total += r.probability;
        deficit = deficit.max(r.norm_deficit);
        rows.push(json!({
            "outcome": outcome.label(),
            "probability": r.probability,
            "fidelity_vs_macro_bell": r.fidelity_vs_macro_bell,
            "fidelity_vs_micro_bell": vs_micro,
            "norm_deficit": r.norm_deficit,
        }));
    }
    let summary = json!({
        "gain": gain_json(g),
        "phase": c.phase,
        "cutoff": c.cutoff,
        "outcomes": rows,
        "total_probability": total,
    });
    let diagnostics = json!({
        "predicted_deficit": predicted_deficit(g, c.cutoff),
        "norm_deficit": deficit,
        "outcomes": rows,
    });
    Ok(Products {
        csv: Some(csv),
        summary,
        diagnostics,
    })
}

fn double_amp(c: &ExperimentConfig) -> Result<Products, RunError> {
    let ga = gain("gain", c.gain)?;
    let gb = gain("gain_b", c.gain_b())?;
    let k = FockCutoff::new(c.cutoff)?;
    let r = double_amplify(ga, gb, c.phase, k)?;
    let direct = macro_singlet(ga, gb, c.phase, k)?;
    let fidelity = r.state.fidelity(&direct)?;
    let swapped = r.state.overlap(&r.state.swap_sites())?;
    let summary = json!({
        "gain_a": gain_json(ga),
        "gain_b": gain_json(gb),
        "unequal_gains": r.unequal_gains,
        "phase": c.phase,
        "cutoff": c.cutoff,
        "fidelity_vs_macro_singlet": fidelity,
        "site_swap_overlap": [swapped.re, swapped.im],
    });
    let diagnostics = json!({
        "predicted_deficit": predicted_deficit(ga, c.cutoff).max(predicted_deficit(gb, c.cutoff)),
        "norm_deficit": r.norm_deficit,
        "fidelity_vs_macro_singlet": fidelity,
    });
    Ok(Products {
        csv: None,
        summary,
        diagnostics,
    })
}

/// |n_+, 0⟩ through the amplifier, in the {+, −} basis the oracle expects.
pub fn amplified_injection(g: GainParams, photons: u32, cutoff: usize) -> Result<ModeTensor, QiopaError> {
    let k = FockCutoff::new(cutoff)?.lenient();
    let seed = ModeTensor::fock(k, Basis::equatorial(0.0), photons as usize, 0)?;
    qiopa_unitary(&seed, g, 0.0)
}

fn wigner(c: &ExperimentConfig) -> Result<Products, RunError> {
    let g = gain("gain", c.gain)?;
    let e = c.grid_extent;
    let slice = SliceSpec {
        x_range: (-e, e),
        y_range: (-e, e),
        nx: c.grid_points,
        ny: c.grid_points,
        ..SliceSpec::default()
    };
    let (oracle_state, norm_deficit) = if c.oracle {
        let psi = amplified_injection(g, c.injection, c.cutoff)?;
        let lost = (1.0 - psi.norm_sqr()).max(0.0);
        (Some(vec![(1.0, psi)]), Some(lost))
    } else {
        (None, None)
    };
    let source = WignerSource {
        gain: g,
        injection: c.injection,
        oracle_state,
    };
    let grid = wigner_grid(&source, &slice)?;
    let closed = negativity_report(&grid, Layer::Closed)?;
    let mut summary = json!({
        "gain": gain_json(g),
        "injection": c.injection,
        "cutoff": c.cutoff,
        "slice": slice,
        "min_value": closed.min_value,
        "min_location": closed.min_location,
        "negative_fraction": closed.negative_fraction,
    });
    let mut diagnostics = json!({ "norm_deficit": norm_deficit });
    if grid.values_oracle.is_some() {
        let oracle = negativity_report(&grid, Layer::Oracle)?;
        summary["oracle"] = json!({
            "min_value": oracle.min_value,
            "min_location": oracle.min_location,
            "negative_fraction": oracle.negative_fraction,
            "tolerance": grid.oracle_tolerance,
        });
        let residual = residual_report(&grid)?;
        summary["residual"] = serde_json::to_value(residual).expect("serializable");
        diagnostics["oracle_tolerance"] = json!(grid.oracle_tolerance);
        diagnostics["max_abs_residual"] = json!(residual.max_abs_residual);
    }
    Ok(Products {
        csv: Some(grid.to_csv()),
        summary,
        diagnostics,
    })
}

fn filters(c: &ExperimentConfig) -> Result<(SiteFilters, Option<OFilterConfig>), RunError> {
    let Some(k) = c.of_threshold else {
        return Ok((SiteFilters::none(), None));
    };
    let config = OFilterConfig {
        reflectivity: c.of_reflectivity,
        threshold: k,
        filter_phase: c.of_phase,
        program: ProgramKind::Orthogonality,
    };
    let filter = OFilter::new(config)?;
    let sites = match c.of_sites {
        FilterSites::B => SiteFilters::only(Site::B, filter),
        FilterSites::Both => SiteFilters::both(filter),
    };
    Ok((sites, Some(config)))
}

fn estimation(c: &ExperimentConfig) -> Estimation {
    match c.mode {
        Mode::Enumerate => Estimation::Enumerate,
        Mode::Sample => Estimation::Sample {
            n_samples: c.samples,
            seed: c.seed,
        },
    }
}

/// The state `chsh` or `fringe` analyses, with its truncation deficit.
fn analysed_state(c: &ExperimentConfig, default: StateKind) -> Result<(StateKind, BipartiteState, f64), RunError> {
    let kind = c.state.unwrap_or(default);
    let g = gain("gain", c.gain)?;
    let (state, deficit) = match kind {
        StateKind::MicroSinglet => (make_singlet(FockCutoff::new(1)?), 0.0),
        StateKind::MicroMacro => {
            let k = FockCutoff::new(c.cutoff)?;
            (build_micro_macro(g, c.phase, k)?, predicted_deficit(g, c.cutoff))
        }
        StateKind::Swap => {
            let outcome = match c.outcomes()?.as_slice() {
                [one] => *one,
                _ => BellOutcome::PsiMinus,
            };
            let r = entanglement_swap(g, c.phase, FockCutoff::new(c.cutoff)?, outcome)?;
            (r.post_state, r.norm_deficit)
        }
        StateKind::DoubleAmp => {
            let gb = gain("gain_b", c.gain_b())?;
            let r = double_amplify(g, gb, c.phase, FockCutoff::new(c.cutoff)?)?;
            (r.state, r.norm_deficit)
        }
        StateKind::Product => {
            let k = FockCutoff::new(c.cutoff)?;
            let par = build_macro_state(g, c.phase, MacroBranch::PhiParallel, k)?;
            let perp = build_macro_state(g, c.phase, MacroBranch::PhiPerp, k)?;
            (
                BipartiteState::product(Complex64::new(1.0, 0.0), par, perp),
                predicted_deficit(g, c.cutoff),
            )
        }
    };
    Ok((kind, state, deficit))
}

fn chsh_run(c: &ExperimentConfig) -> Result<Products, RunError> {
    let (kind, state, deficit) = analysed_state(c, StateKind::MicroSinglet)?;
    let settings = match c.settings.as_deref() {
        Some(&[a, a_prime, b, b_prime]) => ChshSettings { a, a_prime, b, b_prime },
        _ => ChshSettings::default(),
    };
    let (sites, filter) = filters(c)?;
    let result = chsh(&state, settings, &sites, estimation(c))?;
    let summary = json!({
        "state": kind,
        "S": result.s,
        "stderr": result.standard_error,
        "violation": result.violation,
        "settings": settings,
        "filter": filter,
        "filter_sites": filter.map(|_| c.of_sites),
        "gain": c.gain,
        "gain_b": c.gain_b(),
        "cutoff": c.cutoff,
        "mode": c.mode,
        "samples": c.samples,
        "seed": c.seed,
        "conclusive_fraction": result.correlations.iter().map(|e| e.conclusive_fraction).collect::<Vec<_>>(),
    });
    let diagnostics = json!({ "norm_deficit": deficit, "S": result.s, "stderr": result.standard_error });
    Ok(Products {
        csv: Some(correlations_csv(&result.correlations)),
        summary,
        diagnostics,
    })
}

fn fringe(c: &ExperimentConfig) -> Result<Products, RunError> {
    let (kind, state, deficit) = analysed_state(c, StateKind::MicroMacro)?;
    let fixed = c.settings.as_deref().map_or(0.0, |s| s[0]);
    let phases = phase_range(0.0, TAU, c.scan_points);
    let (sites, filter) = filters(c)?;
    let scan = fringe_scan(&state, MeasurementSetting::a(fixed), &phases, &sites, estimation(c))?;
    let summary = json!({
        "state": kind,
        "visibility": scan.visibility,
        "fixed_phase_a": fixed,
        "scan_points": c.scan_points,
        "filter": filter,
        "filter_sites": filter.map(|_| c.of_sites),
        "gain": c.gain,
        "cutoff": c.cutoff,
        "mode": c.mode,
        "samples": c.samples,
        "seed": c.seed,
    });
    let diagnostics = json!({ "norm_deficit": deficit, "visibility": scan.visibility });
    Ok(Products {
        csv: Some(correlations_csv(&scan.points)),
        summary,
        diagnostics,
    })
}
