use num_complex::Complex64;

use super::ModeTensor;
use crate::error::{invalid, Result};
use crate::math::ln_binomial;

/// Branches whose probability falls below this are not materialized.
const BRANCH_FLOOR: f64 = 1e-20;

/// One reflected-count outcome of a beamsplitter tap.
#[derive(Debug, Clone)]
pub struct TapBranch {
    /// Reflected photons per polarization mode, in the tapped tensor's basis.
    pub reflected: (usize, usize),
    pub probability: f64,
    /// Unnormalized conditional transmitted tensor; its squared norm is
    /// `probability`.
    pub transmitted: ModeTensor,
}

impl TapBranch {
    pub fn total_reflected(&self) -> usize {
        self.reflected.0 + self.reflected.1
    }
}

#[derive(Debug, Clone)]
pub struct TapResult {
    pub reflectivity: f64,
    pub branches: Vec<TapBranch>,
}

impl TapResult {
    /// Distribution of the total reflected photon count.
    pub fn count_distribution(&self) -> Vec<f64> {
        let top = self
            .branches
            .iter()
            .map(TapBranch::total_reflected)
            .max()
            .unwrap_or(0);
        let mut dist = vec![0.0; top + 1];
        for b in &self.branches {
            dist[b.total_reflected()] += b.probability;
        }
        dist
    }

    pub fn probability_of(&self, reflected: (usize, usize)) -> f64 {
        self.branches
            .iter()
            .find(|b| b.reflected == reflected)
            .map_or(0.0, |b| b.probability)
    }

    /// Normalized transmitted state conditional on a reflected count pair.
    pub fn conditional(&self, reflected: (usize, usize)) -> Option<ModeTensor> {
        self.branches
            .iter()
            .find(|b| b.reflected == reflected)
            .and_then(|b| b.transmitted.normalized().ok())
    }
}

/// Kraus image of `state` for `reflected` photons leaving through a tap of
/// reflectivity `r`, counted per mode in the state's basis.
pub(crate) fn tap_kraus(state: &ModeTensor, r: f64, reflected: (usize, usize)) -> ModeTensor {
    let (k1, k2) = reflected;
    let t_amp = (1.0 - r).sqrt();
    let r_amp = r.sqrt();
    let mut out = ModeTensor::zeros(state.cutoff(), state.basis());
    let d = state.cutoff().dim();
    for n1 in k1..d {
        for n2 in k2..d {
            let a = state.amps[(n1, n2)];
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let c = (0.5 * (ln_binomial(n1, k1) + ln_binomial(n2, k2))).exp()
                * t_amp.powi((n1 - k1 + n2 - k2) as i32)
                * r_amp.powi((k1 + k2) as i32);
            out.amps[(n1 - k1, n2 - k2)] = a * c;
        }
    }
    out
}

/// Splits `state` on a beamsplitter of reflectivity `r` and measures the
/// reflected photon number in each polarization mode.
///
/// Every branch carries the conditional transmitted tensor; summing the
/// branches as a mixture gives tr_R ρ. At `r = 0` the only branch is
/// (0, 0) with the input unchanged.
pub fn partial_trace_bs_tap(state: &ModeTensor, r: f64) -> Result<TapResult> {
    if !(0.0..=1.0).contains(&r) {
        return Err(invalid("reflectivity", format!("must lie in [0, 1], got {r}")));
    }
    let d = state.cutoff().dim();
    let mut branches = Vec::new();
    for k1 in 0..d {
        for k2 in 0..d {
            if r == 0.0 && k1 + k2 > 0 {
                continue;
            }
            let transmitted = tap_kraus(state, r, (k1, k2));
            let probability = transmitted.norm_sqr();
            if probability < BRANCH_FLOOR && k1 + k2 > 0 {
                continue;
            }
            branches.push(TapBranch {
                reflected: (k1, k2),
                probability,
                transmitted,
            });
        }
    }
    Ok(TapResult {
        reflectivity: r,
        branches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{Basis, FockCutoff};

    fn one_photon() -> ModeTensor {
        ModeTensor::fock(FockCutoff::new(3).unwrap(), Basis::HV, 1, 0).unwrap()
    }

    #[test]
    fn no_tap_leaves_state_alone() {
        let psi = one_photon();
        let tap = partial_trace_bs_tap(&psi, 0.0).unwrap();
        assert_eq!(tap.branches.len(), 1);
        assert_eq!(tap.branches[0].transmitted, psi);
        assert_eq!(tap.count_distribution(), vec![1.0]);
    }

    #[test]
    fn full_reflection_takes_the_photon() {
        let tap = partial_trace_bs_tap(&one_photon(), 1.0).unwrap();
        let dist = tap.count_distribution();
        assert!((dist[1] - 1.0).abs() < 1e-15);
        assert!(dist[0].abs() < 1e-15);
    }

    #[test]
    fn ten_percent_tap_of_one_photon() {
        let tap = partial_trace_bs_tap(&one_photon(), 0.1).unwrap();
        assert!((tap.probability_of((1, 0)) - 0.1).abs() < 1e-15);
        assert!((tap.probability_of((0, 0)) - 0.9).abs() < 1e-15);
        let cond = tap.conditional((1, 0)).unwrap();
        assert!((cond.amp(0, 0).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_range_reflectivity() {
        assert!(partial_trace_bs_tap(&one_photon(), 1.5).is_err());
        assert!(partial_trace_bs_tap(&one_photon(), -0.1).is_err());
    }
}
