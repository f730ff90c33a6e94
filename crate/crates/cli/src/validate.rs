use serde::Serialize;

use qiopa_core::fock::GainParams;
use qiopa_core::macrostates::{predicted_deficit, suggest_cutoff};

use crate::config::{ConfigError, ExperimentConfig, MAX_CUTOFF};

/// Deficit at or below which a cutoff is reported OK.
pub const DEFICIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Ok,
    Insufficient,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub gain: f64,
    pub gain_b: f64,
    pub cutoff: usize,
    /// Mass of the amplified photon lost past the cutoff, for the larger gain.
    pub predicted_deficit: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub suggested_cutoff: usize,
    /// ⟨N⟩ = 1 + 4 sinh²g of the amplified photon at the larger gain.
    pub mean_photons: f64,
    pub feasible: bool,
    pub note: Option<String>,
}

/// Predicts the truncation deficit from the γ tail without building anything.
pub fn validate(config: &ExperimentConfig) -> Result<Diagnostics, ConfigError> {
    config.validate()?;
    let g = config.gain.max(config.gain_b());
    let gain = GainParams::new(g).map_err(|e| ConfigError::new("gain", e.to_string()))?;
    let deficit = predicted_deficit(gain, config.cutoff);
    let suggested = suggest_cutoff(gain, DEFICIT_TOLERANCE);
    let verdict = if deficit <= DEFICIT_TOLERANCE {
        Verdict::Ok
    } else {
        Verdict::Insufficient
    };
    let feasible = suggested <= MAX_CUTOFF;
    let note = match (verdict, feasible) {
        (Verdict::Ok, _) => None,
        (Verdict::Insufficient, true) => Some(format!("raise the cutoff to {suggested}")),
        (Verdict::Insufficient, false) => {
            let amps = (suggested as f64 + 1.0).powi(2);
            Some(format!(
                "infeasible at desk scale: g = {g} needs cutoff {suggested}, a dense mode tensor of {amps:.2e} amplitudes ({:.1} GB), far past the limit {MAX_CUTOFF}",
                amps * 16.0 / 1e9
            ))
        }
    };
    Ok(Diagnostics {
        gain: config.gain,
        gain_b: config.gain_b(),
        cutoff: config.cutoff,
        predicted_deficit: deficit,
        tolerance: DEFICIT_TOLERANCE,
        verdict,
        suggested_cutoff: suggested,
        mean_photons: 1.0 + 4.0 * gain.sinh().powi(2),
        feasible,
        note,
    })
}
