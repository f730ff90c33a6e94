//! The two Macro-Macro schemes: entanglement swapping through a Bell
//! measurement on the micro modes, and double amplification of one EPR pair.
//! The O-Filter post-selection device lives in [`filter`].

pub mod filter;

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, QiopaError, Result};
use crate::fock::{qiopa_unitary, Basis, BipartiteState, FockCutoff, GainParams, ModeTensor, SchmidtTerm, Site};
use crate::macrostates::{build_macro_state, build_micro_macro, micro_cutoff, micro_qubit, MacroBranch};

pub use filter::{o_filter, AcceptAll, FilterEnumeration, FilterSample, FilterSampler, OFilter, OFilterConfig, Orthogonality, ProgramKind, TapCounts, TapProgram};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellOutcome {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome::PhiPlus,
        BellOutcome::PhiMinus,
        BellOutcome::PsiPlus,
        BellOutcome::PsiMinus,
    ];

    pub fn label(self) -> &'static str {
        match self {
            BellOutcome::PhiPlus => "phi-plus",
            BellOutcome::PhiMinus => "phi-minus",
            BellOutcome::PsiPlus => "psi-plus",
            BellOutcome::PsiMinus => "psi-minus",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|o| o.label() == s)
            .ok_or_else(|| invalid("outcome", format!("unknown Bell outcome {s:?}")))
    }

    /// c[x][y] in Σ c_xy |x⟩|y⟩ with x, y ∈ {φ, φ⊥}.
    fn coefficients(self) -> [[f64; 2]; 2] {
        let s = FRAC_1_SQRT_2;
        match self {
            BellOutcome::PhiPlus => [[s, 0.0], [0.0, s]],
            BellOutcome::PhiMinus => [[s, 0.0], [0.0, -s]],
            BellOutcome::PsiPlus => [[0.0, s], [s, 0.0]],
            BellOutcome::PsiMinus => [[0.0, s], [-s, 0.0]],
        }
    }

    /// Whether a 50/50 beamsplitter with two detectors can single it out.
    pub fn physically_resolvable(self) -> bool {
        matches!(self, BellOutcome::PsiPlus | BellOutcome::PsiMinus)
    }
}

/// Bell-state analyzer used at the central beamsplitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BsmMode {
    /// Direct projector onto all four Bell states.
    #[default]
    Ideal,
    /// Only Ψ± are resolvable; Φ± requests are refused.
    Physical,
}

/// Σ c_xy left[x] ⊗ right[y].
fn bell_combination(left: [&ModeTensor; 2], right: [&ModeTensor; 2], outcome: BellOutcome) -> Result<BipartiteState> {
    let c = outcome.coefficients();
    let mut terms = Vec::with_capacity(2);
    for x in 0..2 {
        for y in 0..2 {
            if c[x][y] != 0.0 {
                terms.push(SchmidtTerm {
                    weight: Complex64::new(c[x][y], 0.0),
                    site_a: left[x].clone(),
                    site_b: right[y].clone(),
                });
            }
        }
    }
    BipartiteState::new(terms)
}

/// The SPDC singlet 2^{−1/2}(|H⟩_A|V⟩_B − |V⟩_A|H⟩_B).
pub fn make_singlet(cutoff: FockCutoff) -> BipartiteState {
    let h = ModeTensor::fock(cutoff, Basis::HV, 1, 0).expect("cutoff >= 1");
    let v = ModeTensor::fock(cutoff, Basis::HV, 0, 1).expect("cutoff >= 1");
    let w = FRAC_1_SQRT_2;
    BipartiteState::new(vec![
        SchmidtTerm {
            weight: Complex64::new(w, 0.0),
            site_a: h.clone(),
            site_b: v.clone(),
        },
        SchmidtTerm {
            weight: Complex64::new(-w, 0.0),
            site_a: v,
            site_b: h,
        },
    ])
    .expect("matching cutoffs")
}

/// Micro-Micro Bell states of two single photons in the φ basis.
pub fn micro_bell_state(phase: f64, cutoff: FockCutoff, which: BellOutcome) -> BipartiteState {
    let par = micro_qubit(phase, MacroBranch::PhiParallel, cutoff);
    let perp = micro_qubit(phase, MacroBranch::PhiPerp, cutoff);
    bell_combination([&par, &perp], [&par, &perp], which).expect("matching cutoffs")
}

/// Macro-Macro Bell states over |Φ^φ⟩, |Φ^φ⊥⟩, e.g.
/// Φ± = 2^{−1/2}(|Φ^φ⟩|Φ^φ⟩ ± |Φ^φ⊥⟩|Φ^φ⊥⟩), Ψ± = 2^{−1/2}(|Φ^φ⟩|Φ^φ⊥⟩ ± |Φ^φ⊥⟩|Φ^φ⟩).
pub fn macro_bell_state(gain: GainParams, phase: f64, cutoff: FockCutoff, which: BellOutcome) -> Result<BipartiteState> {
    let par = build_macro_state(gain, phase, MacroBranch::PhiParallel, cutoff)?;
    let perp = build_macro_state(gain, phase, MacroBranch::PhiPerp, cutoff)?;
    bell_combination([&par, &perp], [&par, &perp], which)
}

#[derive(Debug, Clone)]
pub struct SwapResult {
    pub outcome: BellOutcome,
    /// Probability of the outcome relative to the normalized input.
    pub probability: f64,
    /// Normalized conditional state on (k_B, k_B′).
    pub post_state: BipartiteState,
    /// Fidelity of `post_state` with [`macro_bell_state`] for `outcome`.
    pub fidelity_vs_macro_bell: f64,
    /// Truncation mass missing from each macro branch.
    pub norm_deficit: f64,
}

/// Projects the micro modes (k_A, k_A′) of |Σ⟩_{A,B} ⊗ |Σ⟩_{A′,B′} onto
/// the Bell state `outcome` and returns the conditional Macro-Macro state.
pub fn entanglement_swap(gain: GainParams, phase: f64, cutoff: FockCutoff, outcome: BellOutcome) -> Result<SwapResult> {
    entanglement_swap_with(gain, phase, cutoff, outcome, BsmMode::Ideal)
}

pub fn entanglement_swap_with(
    gain: GainParams,
    phase: f64,
    cutoff: FockCutoff,
    outcome: BellOutcome,
    mode: BsmMode,
) -> Result<SwapResult> {
    if mode == BsmMode::Physical && !outcome.physically_resolvable() {
        return Err(QiopaError::NotResolvable(outcome.label()));
    }
    let left = build_micro_macro(gain, phase, cutoff)?;
    let right = build_micro_macro(gain, phase, cutoff)?;
    let micro = micro_cutoff();
    let kets = [
        micro_qubit(phase, MacroBranch::PhiParallel, micro),
        micro_qubit(phase, MacroBranch::PhiPerp, micro),
    ];
    let c = outcome.coefficients();
    let mut terms = Vec::new();
    for s in left.terms() {
        for u in right.terms() {
            // ⟨β| (a_s ⊗ a′_u)
            let mut amp = Complex64::new(0.0, 0.0);
            for x in 0..2 {
                for y in 0..2 {
                    if c[x][y] != 0.0 {
                        amp += c[x][y] * kets[x].overlap(&s.site_a)? * kets[y].overlap(&u.site_a)?;
                    }
                }
            }
            let weight = s.weight * u.weight * amp;
            if weight.norm() > 0.0 {
                terms.push(SchmidtTerm {
                    weight,
                    site_a: s.site_b.clone(),
                    site_b: u.site_b.clone(),
                });
            }
        }
    }
    let projected = BipartiteState::new(terms)?;
    let probability = projected.norm_sqr() / (left.norm_sqr() * right.norm_sqr());
    let post_state = projected.normalized()?;
    let reference = macro_bell_state(gain, phase, cutoff, outcome)?;
    let fidelity_vs_macro_bell = post_state.fidelity(&reference)?;
    let norm_deficit = 1.0 - left.site(Site::B, 0).norm_sqr();
    Ok(SwapResult {
        outcome,
        probability,
        post_state,
        fidelity_vs_macro_bell,
        norm_deficit,
    })
}

/// All outcomes the analyzer can report, with their probabilities.
pub fn swap_outcomes(gain: GainParams, phase: f64, cutoff: FockCutoff, mode: BsmMode) -> Result<Vec<SwapResult>> {
    BellOutcome::ALL
        .into_iter()
        .filter(|o| mode == BsmMode::Ideal || o.physically_resolvable())
        .map(|o| entanglement_swap_with(gain, phase, cutoff, o, mode))
        .collect()
}

#[derive(Debug, Clone)]
pub struct DoubleAmpResult {
    pub state: BipartiteState,
    pub gain_a: GainParams,
    pub gain_b: GainParams,
    pub unequal_gains: bool,
    /// Norm lost to truncation by the site-A amplifier.
    pub norm_deficit: f64,
}

/// Amplifies the micro side of |Σ⟩_{A,B} (whose B side already carries
/// `gain_b`) with a second QI-OPA of gain `gain_a`.
pub fn double_amplify(gain_a: GainParams, gain_b: GainParams, phase: f64, cutoff: FockCutoff) -> Result<DoubleAmpResult> {
    let sigma = build_micro_macro(gain_b, phase, cutoff)?;
    let mut lost: f64 = 0.0;
    let amplified = sigma.map_site(Site::A, |micro| {
        let embedded = micro.embed(cutoff);
        let out = qiopa_unitary(&embedded, gain_a, phase)?;
        lost = lost.max(embedded.norm_sqr() - out.norm_sqr());
        Ok(out)
    })?;
    Ok(DoubleAmpResult {
        state: amplified.normalized()?,
        gain_a,
        gain_b,
        unequal_gains: gain_a != gain_b,
        norm_deficit: lost,
    })
}

/// 2^{−1/2}(|Φ^φ⟩_A|Φ^φ⊥⟩_B − |Φ^φ⊥⟩_A|Φ^φ⟩_B), built directly from γ_ij.
pub fn macro_singlet(gain_a: GainParams, gain_b: GainParams, phase: f64, cutoff: FockCutoff) -> Result<BipartiteState> {
    let w = FRAC_1_SQRT_2;
    BipartiteState::new(vec![
        SchmidtTerm {
            weight: Complex64::new(w, 0.0),
            site_a: build_macro_state(gain_a, phase, MacroBranch::PhiParallel, cutoff)?,
            site_b: build_macro_state(gain_b, phase, MacroBranch::PhiPerp, cutoff)?,
        },
        SchmidtTerm {
            weight: Complex64::new(-w, 0.0),
            site_a: build_macro_state(gain_a, phase, MacroBranch::PhiPerp, cutoff)?,
            site_b: build_macro_state(gain_b, phase, MacroBranch::PhiParallel, cutoff)?,
        },
    ])
}
