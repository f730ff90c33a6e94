//! O-Filter: a low-reflectivity tap whose reflected photon counts drive a
//! program P that opens or closes the main beam.
//!
//! A program only ever sees the tapped counts ([`TapCounts`]); nothing about
//! the downstream measurement settings reaches it.

use std::fmt::Debug;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fock::tap::tap_kraus;
use crate::fock::{Basis, ModeTensor};

/// Branches below this probability (for every tensor involved) are dropped.
const BRANCH_FLOOR: f64 = 1e-20;

/// Photons counted on the reflected arm, per mode of the filter basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TapCounts {
    pub m: usize,
    pub n: usize,
}

pub trait TapProgram: Debug + Send + Sync {
    fn accept(&self, counts: TapCounts) -> bool;
    fn name(&self) -> String;
}

/// Accepts iff |m − n| ≥ k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Orthogonality {
    pub k: usize,
}

impl TapProgram for Orthogonality {
    fn accept(&self, c: TapCounts) -> bool {
        c.m.abs_diff(c.n) >= self.k
    }

    fn name(&self) -> String {
        format!("orthogonality(k={})", self.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AcceptAll;

impl TapProgram for AcceptAll {
    fn accept(&self, _: TapCounts) -> bool {
        true
    }

    fn name(&self) -> String {
        "accept-all".into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProgramKind {
    #[default]
    Orthogonality,
    AcceptAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OFilterConfig {
    /// Tap reflectivity R, in [0, 1).
    pub reflectivity: f64,
    /// Threshold k of the orthogonality program.
    pub threshold: usize,
    /// Equatorial phase of the basis the tapped photons are counted in.
    pub filter_phase: f64,
    pub program: ProgramKind,
}

impl OFilterConfig {
    pub fn orthogonality(reflectivity: f64, threshold: usize) -> Self {
        Self {
            reflectivity,
            threshold,
            filter_phase: 0.0,
            program: ProgramKind::Orthogonality,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OFilter {
    config: OFilterConfig,
    program: Arc<dyn TapProgram>,
}

/// One tap outcome with the filter's verdict.
#[derive(Debug, Clone)]
pub(crate) struct FilterBranch {
    pub counts: TapCounts,
    pub accepted: bool,
    /// Kraus images of the input tensors, in the filter basis.
    pub tensors: Vec<ModeTensor>,
}

#[derive(Debug, Clone)]
pub struct FilterEnumeration {
    pub acceptance_probability: f64,
    /// Accepted branches as (probability, normalized transmitted state);
    /// together they form the post-selected mixture.
    pub accepted: Vec<(f64, TapCounts, ModeTensor)>,
}

#[derive(Debug, Clone)]
pub struct FilterSample {
    pub accepted: bool,
    pub counts: TapCounts,
    /// Normalized transmitted state for the sampled tap outcome.
    pub post_state: ModeTensor,
    pub acceptance_probability: f64,
}

impl OFilter {
    pub fn new(config: OFilterConfig) -> Result<Self> {
        let program: Arc<dyn TapProgram> = match config.program {
            ProgramKind::Orthogonality => Arc::new(Orthogonality { k: config.threshold }),
            ProgramKind::AcceptAll => Arc::new(AcceptAll),
        };
        Self::with_program(config, program)
    }

    pub fn with_program(config: OFilterConfig, program: Arc<dyn TapProgram>) -> Result<Self> {
        if !(0.0..1.0).contains(&config.reflectivity) {
            return Err(invalid(
                "of_reflectivity",
                format!("must lie in [0, 1), got {}", config.reflectivity),
            ));
        }
        if !config.filter_phase.is_finite() {
            return Err(invalid("filter_phase", "must be finite"));
        }
        Ok(Self { config, program })
    }

    pub fn config(&self) -> &OFilterConfig {
        &self.config
    }

    pub fn program_name(&self) -> String {
        self.program.name()
    }

    pub fn decide(&self, counts: TapCounts) -> bool {
        self.program.accept(counts)
    }

    /// Taps every tensor with the same Kraus operators, counting reflected
    /// photons in the filter basis.
    pub(crate) fn branches(&self, tensors: &[ModeTensor]) -> Vec<FilterBranch> {
        let r = self.config.reflectivity;
        let zero = TapCounts { m: 0, n: 0 };
        if r == 0.0 {
            return vec![FilterBranch {
                counts: zero,
                accepted: self.decide(zero),
                tensors: tensors.to_vec(),
            }];
        }
        let basis = Basis::equatorial(self.config.filter_phase);
        let rotated: Vec<ModeTensor> = tensors.iter().map(|t| t.in_basis(basis)).collect();
        let d = rotated.iter().map(|t| t.cutoff().dim()).max().unwrap_or(1);
        let mut out = Vec::new();
        for m in 0..d {
            for n in 0..d {
                let images: Vec<ModeTensor> = rotated.iter().map(|t| tap_kraus(t, r, (m, n))).collect();
                if m + n > 0 && images.iter().all(|t| t.norm_sqr() < BRANCH_FLOOR) {
                    continue;
                }
                let counts = TapCounts { m, n };
                out.push(FilterBranch {
                    counts,
                    accepted: self.decide(counts),
                    tensors: images,
                });
            }
        }
        out
    }

    /// Exact acceptance probability and post-selected mixture.
    pub fn enumerate(&self, state: &ModeTensor) -> Result<FilterEnumeration> {
        let branches = self.branches(std::slice::from_ref(state));
        let norm = branch_mass(&branches);
        let mut acceptance_probability = 0.0;
        let mut accepted = Vec::new();
        for b in branches {
            let p = b.tensors[0].norm_sqr() / norm;
            if b.accepted && p > 0.0 {
                acceptance_probability += p;
                accepted.push((p, b.counts, b.tensors[0].normalized()?));
            }
        }
        Ok(FilterEnumeration {
            acceptance_probability,
            accepted,
        })
    }

    /// Samples one tap outcome and applies the program to it.
    pub fn sample<R: Rng + ?Sized>(&self, state: &ModeTensor, rng: &mut R) -> Result<FilterSample> {
        self.sampler(state)?.draw(rng)
    }

    /// Enumerates the tap branches of `state` once for repeated draws.
    pub fn sampler(&self, state: &ModeTensor) -> Result<FilterSampler> {
        let branches = self.branches(std::slice::from_ref(state));
        let norm = branch_mass(&branches);
        let mut cumulative = Vec::with_capacity(branches.len());
        let mut acc = 0.0;
        let mut acceptance_probability = 0.0;
        for b in &branches {
            let p = b.tensors[0].norm_sqr() / norm;
            acc += p;
            cumulative.push(acc);
            if b.accepted {
                acceptance_probability += p;
            }
        }
        Ok(FilterSampler {
            branches,
            cumulative,
            acceptance_probability,
        })
    }
}

/// Norm of the tapped state, which can fall short of the input norm when
/// rotating into the filter basis drops mass past the top sector.
fn branch_mass(branches: &[FilterBranch]) -> f64 {
    branches.iter().map(|b| b.tensors[0].norm_sqr()).sum()
}

/// Tap branches of one state, ready for repeated sampling.
#[derive(Debug, Clone)]
pub struct FilterSampler {
    branches: Vec<FilterBranch>,
    cumulative: Vec<f64>,
    acceptance_probability: f64,
}

impl FilterSampler {
    pub fn acceptance_probability(&self) -> f64 {
        self.acceptance_probability
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FilterSample> {
        let total = *self.cumulative.last().expect("at least the empty tap branch");
        let u = rng.random::<f64>() * total;
        let pick = self.cumulative.partition_point(|c| *c <= u).min(self.branches.len() - 1);
        let b = &self.branches[pick];
        Ok(FilterSample {
            accepted: b.accepted,
            counts: b.counts,
            post_state: b.tensors[0].normalized()?,
            acceptance_probability: self.acceptance_probability,
        })
    }
}

/// Samples the filter once on `state`.
pub fn o_filter<R: Rng + ?Sized>(state: &ModeTensor, config: OFilterConfig, rng: &mut R) -> Result<FilterSample> {
    OFilter::new(config)?.sample(state, rng)
}
