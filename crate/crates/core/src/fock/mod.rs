//! Truncated Fock-space representation of one spatial mode carrying two
//! polarization modes.
//!
//! A [`ModeTensor`] holds amplitudes `amps[(n1, n2)]` where `n1` counts photons
//! in the first mode of its [`Basis`] and `n2` in the second. For an equatorial
//! basis with phase φ the modes are
//!
//! ```text
//! a†_φ  = (a†_H + e^{iφ} a†_V) / √2
//! a†_φ⊥ = (−e^{−iφ} a†_H + a†_V) / √2
//! ```

mod bipartite;
mod rotation;
mod squeeze;
pub(crate) mod tap;

pub use bipartite::{BipartiteState, SchmidtTerm, Site};
pub use squeeze::{qiopa_unitary, squeeze_operator, squeeze_padding};
pub use tap::{partial_trace_bs_tap, TapBranch, TapResult};
pub use rotation::BasisRotation;

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, QiopaError, Result};

/// Norm deficit above which strict cutoffs raise `CutoffOverflow`.
pub const TRUNCATION_TOLERANCE: f64 = 1e-6;

/// Slack allowed on norms exceeding one.
pub const NORM_SLACK: f64 = 1e-12;

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// Maximum photon number retained per polarization mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockCutoff {
    n_max: usize,
    strict: bool,
}

impl FockCutoff {
    /// Strict cutoff: truncation losses above [`TRUNCATION_TOLERANCE`] are errors.
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(invalid("cutoff", "n_max must be at least 1"));
        }
        Ok(Self { n_max, strict: true })
    }

    /// Same cutoff, but truncation losses are only reported, never raised.
    pub fn lenient(self) -> Self {
        Self {
            strict: false,
            ..self
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    /// Raises `CutoffOverflow` for a strict cutoff when `deficit` is too large.
    pub fn check_deficit(&self, deficit: f64) -> Result<()> {
        if self.strict && deficit > TRUNCATION_TOLERANCE {
            return Err(QiopaError::CutoffOverflow {
                deficit,
                tolerance: TRUNCATION_TOLERANCE,
                n_max: self.n_max,
            });
        }
        Ok(())
    }
}

/// Polarization basis the two tensor indices refer to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Basis {
    /// Horizontal / vertical.
    HV,
    /// Equatorial pair {π_φ, π_φ⊥}.
    Equatorial(f64),
}

impl Basis {
    pub fn equatorial(phase: f64) -> Self {
        Basis::Equatorial(phase.rem_euclid(TAU))
    }

    /// Rows express the basis creation operators in terms of (a†_H, a†_V).
    pub(crate) fn creation_matrix(&self) -> [[Complex64; 2]; 2] {
        match *self {
            Basis::HV => [
                [Complex64::new(1.0, 0.0), C0],
                [C0, Complex64::new(1.0, 0.0)],
            ],
            Basis::Equatorial(phi) => {
                let s = FRAC_1_SQRT_2;
                [
                    [Complex64::new(s, 0.0), Complex64::from_polar(s, phi)],
                    [-Complex64::from_polar(s, -phi), Complex64::new(s, 0.0)],
                ]
            }
        }
    }

    pub fn same_as(&self, other: &Basis) -> bool {
        match (*self, *other) {
            (Basis::HV, Basis::HV) => true,
            (Basis::Equatorial(a), Basis::Equatorial(b)) => {
                let d = (a - b).rem_euclid(TAU);
                d < 1e-14 || TAU - d < 1e-14
            }
            _ => false,
        }
    }
}

/// Amplifier gain g with C = cosh g, S = sinh g and Γ = S / C.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainParams {
    g: f64,
}

impl GainParams {
    pub fn new(g: f64) -> Result<Self> {
        if !g.is_finite() || g < 0.0 {
            return Err(invalid("gain", format!("must be finite and >= 0, got {g}")));
        }
        Ok(Self { g })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn cosh(&self) -> f64 {
        self.g.cosh()
    }

    pub fn sinh(&self) -> f64 {
        self.g.sinh()
    }

    /// Γ = tanh g.
    pub fn gamma(&self) -> f64 {
        self.g.tanh()
    }
}

/// Which of the two polarization modes of a basis an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeIndex {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Create,
    Annihilate,
}

/// Amplitudes over two-mode Fock occupations `(n1, n2)` up to a shared cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTensor {
    cutoff: FockCutoff,
    basis: Basis,
    amps: DMatrix<Complex64>,
}

impl ModeTensor {
    pub fn vacuum(cutoff: FockCutoff) -> Self {
        Self::fock(cutoff, Basis::HV, 0, 0).expect("vacuum fits any cutoff")
    }

    /// The number state |n1, n2⟩ in `basis`.
    pub fn fock(cutoff: FockCutoff, basis: Basis, n1: usize, n2: usize) -> Result<Self> {
        if n1 > cutoff.n_max || n2 > cutoff.n_max {
            return Err(QiopaError::CutoffOverflow {
                deficit: 1.0,
                tolerance: TRUNCATION_TOLERANCE,
                n_max: cutoff.n_max,
            });
        }
        let mut amps = DMatrix::from_element(cutoff.dim(), cutoff.dim(), C0);
        amps[(n1, n2)] = Complex64::new(1.0, 0.0);
        Ok(Self {
            cutoff,
            basis,
            amps,
        })
    }

    pub fn zeros(cutoff: FockCutoff, basis: Basis) -> Self {
        Self {
            cutoff,
            basis,
            amps: DMatrix::from_element(cutoff.dim(), cutoff.dim(), C0),
        }
    }

    pub fn from_amplitudes(
        cutoff: FockCutoff,
        basis: Basis,
        amps: DMatrix<Complex64>,
    ) -> Result<Self> {
        if amps.nrows() != cutoff.dim() || amps.ncols() != cutoff.dim() {
            return Err(invalid(
                "amplitudes",
                format!(
                    "expected {0}x{0}, got {1}x{2}",
                    cutoff.dim(),
                    amps.nrows(),
                    amps.ncols()
                ),
            ));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(invalid("amplitudes", "non-finite entry"));
        }
        Ok(Self {
            cutoff,
            basis,
            amps,
        })
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn amplitudes(&self) -> &DMatrix<Complex64> {
        &self.amps
    }

    pub fn amp(&self, n1: usize, n2: usize) -> Complex64 {
        if n1 <= self.cutoff.n_max && n2 <= self.cutoff.n_max {
            self.amps[(n1, n2)]
        } else {
            C0
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n <= f64::MIN_POSITIVE {
            return Err(QiopaError::ZeroNorm);
        }
        Ok(self.scaled(Complex64::new(1.0 / n.sqrt(), 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            amps: self.amps.map(|a| a * c),
            ..self.clone()
        }
    }

    /// Sum of two tensors, expressed in `self`'s basis.
    pub fn add(&self, other: &ModeTensor) -> Result<Self> {
        self.check_cutoff(other)?;
        let other = other.in_basis(self.basis);
        Ok(Self {
            amps: &self.amps + &other.amps,
            ..self.clone()
        })
    }

    /// Relabels the basis without touching amplitudes.
    pub fn retagged(&self, basis: Basis) -> Self {
        Self {
            basis,
            ..self.clone()
        }
    }

    /// Copies the amplitudes into a different cutoff, dropping what does not fit.
    pub fn embed(&self, cutoff: FockCutoff) -> Self {
        let mut out = Self::zeros(cutoff, self.basis);
        let d = self.cutoff.dim().min(cutoff.dim());
        out.amps
            .view_mut((0, 0), (d, d))
            .copy_from(&self.amps.view((0, 0), (d, d)));
        out
    }

    /// Highest total photon number n1 + n2 with a nonzero amplitude.
    pub fn top_sector(&self) -> usize {
        self.indexed()
            .filter(|(_, a)| **a != Complex64::new(0.0, 0.0))
            .map(|((i, j), _)| i + j)
            .max()
            .unwrap_or(0)
    }

    /// Rotation that keeps every occupied photon-number sector whole. A
    /// square cutoff clips sectors above n_max once they are rotated, so the
    /// tensor is first embedded in a cutoff of `top_sector()` when needed.
    pub fn in_basis_whole(&self, basis: Basis) -> ModeTensor {
        if self.basis.same_as(&basis) {
            return self.clone();
        }
        let top = self.top_sector();
        if top <= self.cutoff.n_max {
            return self.in_basis(basis);
        }
        let cutoff = FockCutoff { n_max: top, strict: false };
        self.embed(cutoff).in_basis(basis)
    }

    pub(crate) fn check_cutoff(&self, other: &ModeTensor) -> Result<()> {
        if self.cutoff.n_max != other.cutoff.n_max {
            return Err(QiopaError::CutoffMismatch {
                left: self.cutoff.n_max,
                right: other.cutoff.n_max,
            });
        }
        Ok(())
    }

    /// The tensor re-expressed in `basis` (a no-op when already there).
    pub fn in_basis(&self, basis: Basis) -> ModeTensor {
        if self.basis.same_as(&basis) {
            self.clone()
        } else {
            self.rotate_basis(basis)
        }
    }

    /// Hermitian inner product ⟨self|other⟩; `other` is rotated into
    /// `self`'s basis when the tags differ.
    pub fn overlap(&self, other: &ModeTensor) -> Result<Complex64> {
        self.check_cutoff(other)?;
        let other = other.in_basis(self.basis);
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// |⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩).
    pub fn fidelity(&self, other: &ModeTensor) -> Result<f64> {
        let ov = self.overlap(other)?;
        let denom = self.norm_sqr() * other.norm_sqr();
        if denom <= f64::MIN_POSITIVE {
            return Err(QiopaError::ZeroNorm);
        }
        Ok(ov.norm_sqr() / denom)
    }

    /// Per-mode photon-number expectations, normalized by the tensor norm.
    pub fn mean_photons(&self) -> (f64, f64) {
        let norm = self.norm_sqr();
        if norm == 0.0 {
            return (0.0, 0.0);
        }
        let (mut n1, mut n2) = (0.0, 0.0);
        for ((i, j), a) in self.indexed() {
            let p = a.norm_sqr();
            n1 += i as f64 * p;
            n2 += j as f64 * p;
        }
        (n1 / norm, n2 / norm)
    }

    /// Probability of each total photon number N = n1 + n2 (unnormalized).
    pub fn total_photon_distribution(&self) -> Vec<f64> {
        let mut dist = vec![0.0; 2 * self.cutoff.n_max + 1];
        for ((i, j), a) in self.indexed() {
            dist[i + j] += a.norm_sqr();
        }
        dist
    }

    /// Mass held in the top `levels` Fock levels of either mode.
    pub fn edge_mass(&self, levels: usize) -> f64 {
        let lo = self.cutoff.dim().saturating_sub(levels);
        self.indexed()
            .filter(|((i, j), _)| *i >= lo || *j >= lo)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub(crate) fn indexed(&self) -> impl Iterator<Item = ((usize, usize), &Complex64)> {
        let d = self.cutoff.dim();
        // nalgebra storage is column-major
        self.amps
            .iter()
            .enumerate()
            .map(move |(k, a)| ((k % d, k / d), a))
    }

    /// Applies a† or a to one polarization mode.
    ///
    /// Creation drops whatever would land above the cutoff; a strict cutoff
    /// reports that as `CutoffOverflow` when the dropped mass is above
    /// tolerance.
    pub fn apply_ladder(&self, mode: ModeIndex, kind: Ladder) -> Result<ModeTensor> {
        let d = self.cutoff.dim();
        let mut out = Self::zeros(self.cutoff, self.basis);
        let mut dropped = 0.0;
        for ((i, j), &a) in self.indexed() {
            let n = match mode {
                ModeIndex::First => i,
                ModeIndex::Second => j,
            };
            let (target, coeff) = match kind {
                Ladder::Create => (n + 1, ((n + 1) as f64).sqrt()),
                Ladder::Annihilate => {
                    if n == 0 {
                        continue;
                    }
                    (n - 1, (n as f64).sqrt())
                }
            };
            if target >= d {
                dropped += a.norm_sqr() * coeff * coeff;
                continue;
            }
            let idx = match mode {
                ModeIndex::First => (target, j),
                ModeIndex::Second => (i, target),
            };
            out.amps[idx] = a * coeff;
        }
        self.cutoff.check_deficit(dropped)?;
        Ok(out)
    }
}
