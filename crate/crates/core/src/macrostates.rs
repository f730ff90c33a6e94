//! Closed-form Macro-qubits built from the γ_ij expansion.
//!
//! γ_ij = C⁻² (−Γ/2)^i (Γ/2)^j √((2i+1)! (2j)!) / (i! j!)
//!
//! factorizes into an odd-mode weight (photon numbers 2i+1) and an
//! even-mode weight (photon numbers 2j). Both are evaluated in the
//! log-factorial domain with the sign (−1)^i tracked separately.
//!
//! At equatorial phase φ the amplitudes also carry e^{∓iφ(i−j)}, which is
//! what the phase-covariant amplifier produces when the indices refer to the
//! (π_φ, π_φ⊥) modes; at φ = 0 they reduce to the real γ_ij.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fock::{Basis, BipartiteState, FockCutoff, GainParams, ModeTensor, SchmidtTerm};
use crate::math::ln_factorial;

/// Tail mass (relative) at which the adaptive γ table stops growing.
pub const TABLE_TAIL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MacroBranch {
    /// |Φ^φ⟩: odd occupation on π_φ, even on π_φ⊥.
    PhiParallel,
    /// |Φ^φ⊥⟩: the mirror image.
    PhiPerp,
}

impl MacroBranch {
    pub fn other(self) -> Self {
        match self {
            MacroBranch::PhiParallel => MacroBranch::PhiPerp,
            MacroBranch::PhiPerp => MacroBranch::PhiParallel,
        }
    }
}

/// ln of the odd-mode factor C^{-3/2} (Γ/2)^i √(2i+1)! / i!.
fn ln_odd(i: usize, gain: &GainParams) -> f64 {
    -1.5 * gain.cosh().ln()
        + i as f64 * (gain.gamma() / 2.0).ln()
        + 0.5 * ln_factorial(2 * i + 1)
        - ln_factorial(i)
}

/// ln of the even-mode factor C^{-1/2} (Γ/2)^j √(2j)! / j!.
fn ln_even(j: usize, gain: &GainParams) -> f64 {
    -0.5 * gain.cosh().ln() + j as f64 * (gain.gamma() / 2.0).ln() + 0.5 * ln_factorial(2 * j)
        - ln_factorial(j)
}

/// Probability that the odd mode holds 2i+1 photons.
fn odd_weight(i: usize, gain: &GainParams) -> f64 {
    if gain.g() == 0.0 {
        return if i == 0 { 1.0 } else { 0.0 };
    }
    (2.0 * ln_odd(i, gain)).exp()
}

/// Probability that the even mode holds 2j photons.
fn even_weight(j: usize, gain: &GainParams) -> f64 {
    if gain.g() == 0.0 {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    (2.0 * ln_even(j, gain)).exp()
}

/// γ_ij, real with sign (−1)^i.
pub fn gamma_coeff(i: usize, j: usize, gain: GainParams) -> f64 {
    if gain.g() == 0.0 {
        return if i == 0 && j == 0 { 1.0 } else { 0.0 };
    }
    let mag = (ln_odd(i, &gain) + ln_even(j, &gain)).exp();
    if i % 2 == 0 {
        mag
    } else {
        -mag
    }
}

/// Σ_{k > limit} weight(k), summed until the terms are negligible.
fn tail_sum(limit: Option<usize>, weight: impl Fn(usize) -> f64) -> f64 {
    let start = limit.map_or(0, |l| l + 1);
    let mut acc = 0.0;
    let mut prev = f64::INFINITY;
    let mut k = start;
    loop {
        let w = weight(k);
        acc += w;
        // past the peak and below resolution
        if w <= prev && w <= 1e-20 * acc.max(1e-300) {
            break;
        }
        if w == 0.0 && prev == 0.0 {
            break;
        }
        prev = w;
        k += 1;
        if k - start > 50_000_000 {
            break;
        }
    }
    acc
}

/// Probability mass of |Φ^φ⟩ lost by truncating each mode at `n_max`.
pub fn predicted_deficit(gain: GainParams, n_max: usize) -> f64 {
    let odd_limit = if n_max >= 1 { Some((n_max - 1) / 2) } else { None };
    let t_odd = tail_sum(odd_limit, |i| odd_weight(i, &gain));
    let t_even = tail_sum(Some(n_max / 2), |j| even_weight(j, &gain));
    (t_odd + t_even - t_odd * t_even).clamp(0.0, 1.0)
}

/// Smallest cutoff whose predicted deficit is at most `tolerance`.
pub fn suggest_cutoff(gain: GainParams, tolerance: f64) -> usize {
    let mut hi = 1usize;
    while predicted_deficit(gain, hi) > tolerance {
        hi *= 2;
        if hi > 1 << 24 {
            return hi;
        }
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if predicted_deficit(gain, mid) > tolerance {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi.max(1)
}

/// γ_ij over an index range large enough that the last row and column hold
/// a negligible share of the mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaTable {
    pub gain: GainParams,
    pub i_max: usize,
    pub j_max: usize,
    values: Vec<f64>,
}

impl GammaTable {
    pub fn adaptive(gain: GainParams) -> Self {
        let grow = |weight: &dyn Fn(usize) -> f64| {
            let mut total = weight(0);
            let mut k = 0;
            loop {
                let next = weight(k + 1);
                if next < TABLE_TAIL * (total + next) && k >= 1 {
                    return k + 1;
                }
                total += next;
                k += 1;
            }
        };
        let i_max = grow(&|i| odd_weight(i, &gain));
        let j_max = grow(&|j| even_weight(j, &gain));
        Self::with_limits(gain, i_max, j_max)
    }

    pub fn with_limits(gain: GainParams, i_max: usize, j_max: usize) -> Self {
        let mut values = Vec::with_capacity((i_max + 1) * (j_max + 1));
        for i in 0..=i_max {
            for j in 0..=j_max {
                values.push(gamma_coeff(i, j, gain));
            }
        }
        Self {
            gain,
            i_max,
            j_max,
            values,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * (self.j_max + 1) + j]
    }

    /// Σ |γ_ij|² over the table.
    pub fn total_mass(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// CSV with header `i,j,gamma_value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,gamma_value\n");
        for i in 0..=self.i_max {
            for j in 0..=self.j_max {
                writeln!(out, "{i},{j},{:.17e}", self.get(i, j)).unwrap();
            }
        }
        out
    }
}

/// |Φ^φ⟩ or |Φ^φ⊥⟩ truncated at `cutoff`, tagged with the φ basis.
///
/// Both branches equal the amplifier applied to |1_φ⟩ and |1_φ⊥⟩. The φ⊥
/// squeezer runs with the opposite sign, so |Φ^φ⊥⟩ carries γ_ij (−1)^{i+j}
/// at (2j, 2i+1) rather than a plain mirror of |Φ^φ⟩.
///
/// A strict cutoff requires the retained mass to be at least 1 − 10⁻⁶.
pub fn build_macro_state(
    gain: GainParams,
    phase: f64,
    branch: MacroBranch,
    cutoff: FockCutoff,
) -> Result<ModeTensor> {
    let n_max = cutoff.n_max();
    cutoff.check_deficit(predicted_deficit(gain, n_max))?;
    let basis = Basis::equatorial(phase);
    let phi = match basis {
        Basis::Equatorial(p) => p,
        Basis::HV => unreachable!(),
    };
    let mut psi = ModeTensor::zeros(cutoff, basis);
    let mut amps = psi.amplitudes().clone();
    for i in 0..=n_max.saturating_sub(1) / 2 {
        if 2 * i + 1 > n_max {
            break;
        }
        for j in 0..=n_max / 2 {
            let g = gamma_coeff(i, j, gain);
            if g == 0.0 {
                continue;
            }
            let rel = phi * (i as f64 - j as f64);
            match branch {
                MacroBranch::PhiParallel => {
                    amps[(2 * i + 1, 2 * j)] = Complex64::from_polar(g, -rel);
                }
                MacroBranch::PhiPerp => {
                    let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    amps[(2 * j, 2 * i + 1)] = Complex64::from_polar(sign * g, rel);
                }
            }
        }
    }
    psi = ModeTensor::from_amplitudes(cutoff, basis, amps)?;
    Ok(psi)
}

/// True when every nonzero amplitude sits on the branch's parity pattern
/// (odd on the occupied mode, even on the other).
pub fn has_branch_parity(state: &ModeTensor, branch: MacroBranch) -> bool {
    let d = state.cutoff().dim();
    let amps = state.amplitudes();
    (0..d).all(|n1| {
        (0..d).all(|n2| {
            let allowed = match branch {
                MacroBranch::PhiParallel => n1 % 2 == 1 && n2 % 2 == 0,
                MacroBranch::PhiPerp => n1 % 2 == 0 && n2 % 2 == 1,
            };
            allowed || amps[(n1, n2)] == Complex64::new(0.0, 0.0)
        })
    })
}

/// Cutoff used for the single-photon (micro) side of entangled states.
pub fn micro_cutoff() -> FockCutoff {
    FockCutoff::new(1).expect("1 is a valid cutoff")
}

/// |1_φ⟩ or |1_φ⊥⟩ on a micro site.
pub fn micro_qubit(phase: f64, branch: MacroBranch, cutoff: FockCutoff) -> ModeTensor {
    let (n1, n2) = match branch {
        MacroBranch::PhiParallel => (1, 0),
        MacroBranch::PhiPerp => (0, 1),
    };
    ModeTensor::fock(cutoff, Basis::equatorial(phase), n1, n2).expect("cutoff >= 1")
}

/// The Micro-Macro state 2^{−1/2}(|Φ^φ⟩_B |1φ⊥⟩_A − |Φ^φ⊥⟩_B |1φ⟩_A).
/// Site A holds the micro photon, site B the amplified field.
pub fn build_micro_macro(gain: GainParams, phase: f64, cutoff: FockCutoff) -> Result<BipartiteState> {
    let w = std::f64::consts::FRAC_1_SQRT_2;
    let micro = micro_cutoff();
    BipartiteState::new(vec![
        SchmidtTerm {
            weight: Complex64::new(w, 0.0),
            site_a: micro_qubit(phase, MacroBranch::PhiPerp, micro),
            site_b: build_macro_state(gain, phase, MacroBranch::PhiParallel, cutoff)?,
        },
        SchmidtTerm {
            weight: Complex64::new(-w, 0.0),
            site_a: micro_qubit(phase, MacroBranch::PhiParallel, micro),
            site_b: build_macro_state(gain, phase, MacroBranch::PhiPerp, cutoff)?,
        },
    ])
}

pub fn mean_photon_numbers(state: &ModeTensor) -> (f64, f64) {
    state.mean_photons()
}

/// ⟨n_φ − n_φ⊥⟩ on |Φ^φ⟩ minus the same on |Φ^φ⊥⟩.
pub fn branch_distinguishability(gain: GainParams, phase: f64, cutoff: FockCutoff) -> Result<f64> {
    let imbalance = |branch| -> Result<f64> {
        let s = build_macro_state(gain, phase, branch, cutoff)?;
        let (a, b) = s.mean_photons();
        Ok(a - b)
    };
    Ok(imbalance(MacroBranch::PhiParallel)? - imbalance(MacroBranch::PhiPerp)?)
}
