//! Wigner functions of the amplified field on the (π_+, π_−) modes.
//!
//! Two independent evaluators live here:
//!
//! * [`wigner_closed_form`]: the printed closed form
//!   W(α, β) = −W̄(α) W̄(β) F(X) with W̄ = (2/π) exp(−|Δ|²), implemented
//!   verbatim, including the e^{−g} on all four squeezing variables.
//! * [`wigner_oracle`]: the displaced-parity expectation evaluated on a Fock
//!   tensor, W = (2/π)² ⟨ψ| D(2α) Π₊ D(2β) Π₋ |ψ⟩, which needs only the exact
//!   matrix elements of D inside the retained subspace.
//!
//! Phase-space coordinate β belongs to π_− = (π_H − π_V)/√2, which is
//! −a†_{0⊥} in the equatorial φ = 0 basis; the oracle accounts for that sign.

use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_2_PI};
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, QiopaError, Result};
use crate::fock::{Basis, GainParams, ModeTensor};

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// Values above −NEGATIVITY_FLOOR count as non-negative; exact evaluations
/// carry round-off of about this size.
pub const NEGATIVITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpacePoint {
    /// Coordinate of mode π_+.
    pub alpha: Complex64,
    /// Coordinate of mode π_−.
    pub beta: Complex64,
}

impl PhaseSpacePoint {
    pub fn new(alpha: Complex64, beta: Complex64) -> Self {
        Self { alpha, beta }
    }

    pub fn origin() -> Self {
        Self::new(C0, C0)
    }

    pub fn component(&self, axis: Axis) -> f64 {
        match axis {
            Axis::ReAlpha => self.alpha.re,
            Axis::ImAlpha => self.alpha.im,
            Axis::ReBeta => self.beta.re,
            Axis::ImBeta => self.beta.im,
        }
    }

    fn with_component(mut self, axis: Axis, v: f64) -> Self {
        match axis {
            Axis::ReAlpha => self.alpha.re = v,
            Axis::ImAlpha => self.alpha.im = v,
            Axis::ReBeta => self.beta.re = v,
            Axis::ImBeta => self.beta.im = v,
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezedCoords {
    pub gamma_a_plus: Complex64,
    pub gamma_a_minus: Complex64,
    pub gamma_b_plus: Complex64,
    pub gamma_b_minus: Complex64,
    pub delta_a: Complex64,
    pub delta_b: Complex64,
    pub x: f64,
}

/// γ_A± = (α ± β*) e^{−g}, γ_B± = (α* ± β) e^{−g}, Δ = (γ₊ − iγ₋)/√2,
/// X = |Δ_A + Δ_B|.
pub fn squeezed_coords(point: PhaseSpacePoint, gain: GainParams) -> SqueezedCoords {
    let shrink = (-gain.g()).exp();
    let (a, b) = (point.alpha, point.beta);
    let gamma_a_plus = (a + b.conj()) * shrink;
    let gamma_a_minus = (a - b.conj()) * shrink;
    let gamma_b_plus = (a.conj() + b) * shrink;
    let gamma_b_minus = (a.conj() - b) * shrink;
    let i = Complex64::i();
    let delta_a = (gamma_a_plus - i * gamma_a_minus) * FRAC_1_SQRT_2;
    let delta_b = (gamma_b_plus - i * gamma_b_minus) * FRAC_1_SQRT_2;
    SqueezedCoords {
        gamma_a_plus,
        gamma_a_minus,
        gamma_b_plus,
        gamma_b_minus,
        delta_a,
        delta_b,
        x: (delta_a + delta_b).norm(),
    }
}

/// F(X) = 1 − X² for one injected photon, 1 − 2X² + X⁴/4 for two.
pub fn interference_term(x: f64, injected_photons: u32) -> Result<f64> {
    let x2 = x * x;
    match injected_photons {
        1 => Ok(1.0 - x2),
        2 => Ok(1.0 - 2.0 * x2 + 0.25 * x2 * x2),
        k => Err(QiopaError::UnsupportedInjection(k)),
    }
}

/// −(2/π)² exp(−|Δ_A|² − |Δ_B|²) F(X).
pub fn wigner_closed_form(point: PhaseSpacePoint, gain: GainParams, injected_photons: u32) -> Result<f64> {
    let c = squeezed_coords(point, gain);
    let f = interference_term(c.x, injected_photons)?;
    let envelope = FRAC_2_PI * FRAC_2_PI * (-c.delta_a.norm_sqr() - c.delta_b.norm_sqr()).exp();
    Ok(-envelope * f)
}

/// ⟨m|D(z)|n⟩ for m, n ≤ `n_max`, exact up to rounding.
///
/// Column 0 is the coherent state; further columns follow from
/// D a† = (a† − z*) D, which never reaches outside the retained rows.
pub fn displacement_matrix(z: Complex64, n_max: usize) -> DMatrix<Complex64> {
    let d = n_max + 1;
    let mut m = DMatrix::from_element(d, d, C0);
    let mut c = Complex64::new((-0.5 * z.norm_sqr()).exp(), 0.0);
    for row in 0..d {
        if row > 0 {
            c = c * z / (row as f64).sqrt();
        }
        m[(row, 0)] = c;
    }
    let zc = z.conj();
    for n in 0..n_max {
        let s = 1.0 / ((n + 1) as f64).sqrt();
        for row in 0..d {
            let mut v = -zc * m[(row, n)];
            if row > 0 {
                v += (row as f64).sqrt() * m[(row - 1, n)];
            }
            m[(row, n + 1)] = v * s;
        }
    }
    m
}

fn plus_minus_basis() -> Basis {
    Basis::equatorial(0.0)
}

/// Symmetric-ordered characteristic function ⟨ψ| D₊(η) D₋(ξ) |ψ⟩.
///
/// The Heisenberg arguments η(t) = ηC − η*S, ξ(t) = ξC − ξ*S are the
/// caller's business. The value depends only on matrix elements inside the
/// retained subspace, so truncation does not bias it.
pub fn characteristic_fn_oracle(state: &ModeTensor, eta: Complex64, xi: Complex64) -> Result<Complex64> {
    let psi = state.in_basis_whole(plus_minus_basis());
    let norm = psi.norm_sqr();
    if norm <= f64::MIN_POSITIVE {
        return Err(QiopaError::ZeroNorm);
    }
    let n_max = psi.cutoff().n_max();
    let amps = psi.amplitudes();
    let d1 = displacement_matrix(eta, n_max);
    // a_− = −a_{0⊥}
    let d2 = displacement_matrix(-xi, n_max);
    let image = &d1 * amps * d2.transpose();
    let value: Complex64 = amps.iter().zip(image.iter()).map(|(a, b)| a.conj() * b).sum();
    Ok(value / norm)
}

/// Amplitudes in the (+, −) basis with the two-mode parity applied.
struct ParityPrepared {
    amps: DMatrix<Complex64>,
    parity_amps: DMatrix<Complex64>,
    norm: f64,
    n_max: usize,
}

impl ParityPrepared {
    fn new(state: &ModeTensor) -> Result<Self> {
        let psi = state.in_basis_whole(plus_minus_basis());
        let norm = psi.norm_sqr();
        if norm <= f64::MIN_POSITIVE {
            return Err(QiopaError::ZeroNorm);
        }
        let amps = psi.amplitudes().clone();
        let parity_amps =
            DMatrix::from_fn(amps.nrows(), amps.ncols(), |i, j| {
                if (i + j) % 2 == 0 {
                    amps[(i, j)]
                } else {
                    -amps[(i, j)]
                }
            });
        Ok(Self {
            amps,
            parity_amps,
            norm,
            n_max: psi.cutoff().n_max(),
        })
    }

    /// ψ† D₊(2α) Π; everything in the value that depends on α alone.
    fn alpha_part(&self, alpha: Complex64) -> DMatrix<Complex64> {
        let d1 = displacement_matrix(alpha * 2.0, self.n_max);
        self.amps.adjoint() * d1 * &self.parity_amps
    }

    /// tr(N D₋(−2β)ᵀ) = Σ N ∘ D₋(−2β), scaled to a Wigner value.
    fn finish(&self, alpha_part: &DMatrix<Complex64>, beta: Complex64) -> f64 {
        let d2 = displacement_matrix(-beta * 2.0, self.n_max);
        let v: Complex64 = alpha_part.iter().zip(d2.iter()).map(|(a, b)| a * b).sum();
        FRAC_2_PI * FRAC_2_PI * v.re / self.norm
    }

    fn eval(&self, point: PhaseSpacePoint) -> f64 {
        self.finish(&self.alpha_part(point.alpha), point.beta)
    }
}

/// A normalized mixture prepared for grid evaluation. The α half of every
/// member is summed before the β half, which is linear in it.
enum MixturePrepared {
    Members(Vec<(f64, ParityPrepared)>),
    /// R[(i,k),(j,l)] = Σ_w c_w ψ*_ij (Πψ)_kl, so N = Rᵀ vec D₊(2α); cheaper
    /// than per-member products once the mixture has more than ~d/2 members.
    Density { r: DMatrix<Complex64>, n_max: usize },
}

impl MixturePrepared {
    fn new(members: &[(f64, ModeTensor)]) -> Result<Self> {
        let live: Vec<(f64, ModeTensor)> = members
            .iter()
            .filter(|(p, psi)| *p * psi.norm_sqr() > 0.0)
            .map(|(p, psi)| (*p * psi.norm_sqr(), psi.in_basis_whole(plus_minus_basis())))
            .collect();
        if live.is_empty() {
            return Err(QiopaError::ZeroNorm);
        }
        // rotated members may have grown; bring them to one cutoff
        let widest = live.iter().map(|(_, psi)| psi.cutoff()).max_by_key(|c| c.n_max()).expect("nonempty");
        let prepared = live
            .iter()
            .map(|(w, psi)| Ok((*w, ParityPrepared::new(&psi.embed(widest))?)))
            .collect::<Result<Vec<_>>>()?;
        let total: f64 = prepared.iter().map(|(w, _)| w).sum();
        let scaled: Vec<_> = prepared.into_iter().map(|(w, pp)| (w / (total * pp.norm), pp)).collect();
        let n_max = scaled[0].1.n_max;
        let d = n_max + 1;
        if 2 * scaled.len() <= d {
            return Ok(Self::Members(scaled));
        }
        let mut r = DMatrix::zeros(d * d, d * d);
        for (c, pp) in &scaled {
            let left = pp.amps.map(|a| a.conj() * *c);
            for (col, &pa) in pp.parity_amps.iter().enumerate() {
                // column-major storage: entry (k, l) sits at k + l·d
                let (k, l) = (col % d, col / d);
                for j in 0..d {
                    for i in 0..d {
                        r[(i + k * d, j + l * d)] += left[(i, j)] * pa;
                    }
                }
            }
        }
        Ok(Self::Density { r, n_max })
    }

    fn n_max(&self) -> usize {
        match self {
            Self::Members(m) => m[0].1.n_max,
            Self::Density { n_max, .. } => *n_max,
        }
    }

    fn alpha_part(&self, alpha: Complex64) -> DMatrix<Complex64> {
        let d1 = displacement_matrix(alpha * 2.0, self.n_max());
        match self {
            Self::Members(members) => {
                let mut n = DMatrix::zeros(d1.nrows(), d1.ncols());
                for (c, pp) in members {
                    n += (pp.amps.adjoint() * &d1 * &pp.parity_amps) * Complex64::from(*c);
                }
                n
            }
            Self::Density { r, n_max } => {
                let d = n_max + 1;
                let flat = r.tr_mul(&DMatrix::from_column_slice(d * d, 1, d1.as_slice()));
                DMatrix::from_column_slice(d, d, flat.as_slice())
            }
        }
    }

    fn beta_part(&self, beta: Complex64) -> DMatrix<Complex64> {
        displacement_matrix(-beta * 2.0, self.n_max())
    }

    fn finish(alpha_part: &DMatrix<Complex64>, beta_part: &DMatrix<Complex64>) -> f64 {
        let v: Complex64 = alpha_part.iter().zip(beta_part.iter()).map(|(a, b)| a * b).sum();
        FRAC_2_PI * FRAC_2_PI * v.re
    }
}

fn bits(z: Complex64) -> (u64, u64) {
    (z.re.to_bits(), z.im.to_bits())
}

/// Displaced-parity Wigner value of a (normalized or not) two-mode tensor.
pub fn wigner_oracle(state: &ModeTensor, point: PhaseSpacePoint) -> Result<f64> {
    Ok(ParityPrepared::new(state)?.eval(point))
}

/// Wigner value of a statistical mixture Σ p_k |ψ_k⟩⟨ψ_k| with unnormalized
/// members; the weight of member k is p_k ‖ψ_k‖².
pub fn wigner_oracle_mixture(members: &[(f64, ModeTensor)], point: PhaseSpacePoint) -> Result<f64> {
    let mut total = 0.0;
    let mut weight = 0.0;
    for (p, psi) in members {
        let w = p * psi.norm_sqr();
        if w == 0.0 {
            continue;
        }
        total += w * wigner_oracle(psi, point)?;
        weight += w;
    }
    if weight == 0.0 {
        return Err(QiopaError::ZeroNorm);
    }
    Ok(total / weight)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    ReAlpha,
    ImAlpha,
    ReBeta,
    ImBeta,
}

/// A 2-D slice through the 4-D phase space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceSpec {
    pub x_axis: Axis,
    pub y_axis: Axis,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    /// Supplies the two components that do not vary.
    pub fixed: PhaseSpacePoint,
}

impl Default for SliceSpec {
    fn default() -> Self {
        Self {
            x_axis: Axis::ReAlpha,
            y_axis: Axis::ReBeta,
            x_range: (-4.0, 4.0),
            y_range: (-4.0, 4.0),
            nx: 101,
            ny: 101,
            fixed: PhaseSpacePoint::origin(),
        }
    }
}

impl SliceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.x_axis == self.y_axis {
            return Err(invalid("slice", "the two varying axes must differ"));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(QiopaError::EmptyGrid);
        }
        for (lo, hi) in [self.x_range, self.y_range] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(invalid("slice", format!("bad range [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    fn coord(range: (f64, f64), n: usize, k: usize) -> f64 {
        if n == 1 {
            return range.0;
        }
        range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64
    }

    /// Nodes with x as the slow index.
    pub fn nodes(&self) -> Vec<PhaseSpacePoint> {
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for ix in 0..self.nx {
            let x = Self::coord(self.x_range, self.nx, ix);
            for iy in 0..self.ny {
                let y = Self::coord(self.y_range, self.ny, iy);
                out.push(
                    self.fixed
                        .with_component(self.x_axis, x)
                        .with_component(self.y_axis, y),
                );
            }
        }
        out
    }
}

/// What a grid is evaluated for.
#[derive(Debug, Clone)]
pub struct WignerSource {
    pub gain: GainParams,
    /// Photons injected on π_+; the closed form exists for 1 and 2.
    pub injection: u32,
    /// Mixture members for the oracle layer; `None` skips the oracle.
    pub oracle_state: Option<Vec<(f64, ModeTensor)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub slice: SliceSpec,
    pub nodes: Vec<PhaseSpacePoint>,
    pub values_closed: Option<Vec<f64>>,
    pub values_oracle: Option<Vec<f64>>,
    /// Bound on how far the oracle layer can sit from the untruncated state.
    /// The displaced parity has unit norm, so a dropped tail δ moves W by at
    /// most (2/π)²(2‖δ‖ + ‖δ‖²); ‖δ‖² is estimated by the two top levels.
    #[serde(default)]
    pub oracle_tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layer {
    Closed,
    Oracle,
}

pub fn wigner_grid(source: &WignerSource, slice: &SliceSpec) -> Result<WignerGrid> {
    slice.validate()?;
    let nodes = slice.nodes();
    let values_closed = match source.injection {
        1 | 2 => Some(
            nodes
                .par_iter()
                .map(|p| wigner_closed_form(*p, source.gain, source.injection))
                .collect::<Result<Vec<_>>>()?,
        ),
        _ => None,
    };
    let oracle_tolerance = match &source.oracle_state {
        None => 0.0,
        Some(members) => {
            let total: f64 = members.iter().map(|(p, psi)| p * psi.norm_sqr()).sum();
            let edge: f64 = members.iter().map(|(p, psi)| p * psi.edge_mass(2)).sum();
            let tail = if total > 0.0 { (edge / total).sqrt() } else { 0.0 };
            FRAC_2_PI * FRAC_2_PI * (2.0 * tail + tail * tail)
        }
    };
    let values_oracle = match &source.oracle_state {
        None => None,
        Some(members) => {
            let prepared = MixturePrepared::new(members)?;
            // nodes sharing α share the α half, nodes sharing β the β half
            let mut groups: Vec<(Complex64, Vec<usize>)> = Vec::new();
            let mut index: HashMap<(u64, u64), usize> = HashMap::new();
            let mut betas: Vec<Complex64> = Vec::new();
            let mut beta_index: HashMap<(u64, u64), usize> = HashMap::new();
            let mut beta_of = vec![0; nodes.len()];
            for (k, p) in nodes.iter().enumerate() {
                let g = *index.entry(bits(p.alpha)).or_insert_with(|| {
                    groups.push((p.alpha, Vec::new()));
                    groups.len() - 1
                });
                groups[g].1.push(k);
                beta_of[k] = *beta_index.entry(bits(p.beta)).or_insert_with(|| {
                    betas.push(p.beta);
                    betas.len() - 1
                });
            }
            let beta_parts: Vec<_> = betas.par_iter().map(|b| prepared.beta_part(*b)).collect();
            let evaluated: Vec<Vec<(usize, f64)>> = groups
                .par_iter()
                .map(|(alpha, members)| {
                    let part = prepared.alpha_part(*alpha);
                    members
                        .iter()
                        .map(|&k| (k, MixturePrepared::finish(&part, &beta_parts[beta_of[k]])))
                        .collect()
                })
                .collect();
            let mut values = vec![0.0; nodes.len()];
            for (k, v) in evaluated.into_iter().flatten() {
                values[k] = v;
            }
            Some(values)
        }
    };
    if values_closed.is_none() && values_oracle.is_none() {
        return Err(QiopaError::UnsupportedInjection(source.injection));
    }
    Ok(WignerGrid {
        slice: slice.clone(),
        nodes,
        values_closed,
        values_oracle,
        oracle_tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativityReport {
    pub min_value: f64,
    pub min_location: PhaseSpacePoint,
    pub negative_fraction: f64,
}

pub fn negativity_report(grid: &WignerGrid, layer: Layer) -> Result<NegativityReport> {
    let values = grid.layer(layer).ok_or(QiopaError::EmptyGrid)?;
    if values.is_empty() {
        return Err(QiopaError::EmptyGrid);
    }
    let (k, &min_value) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    let floor = match layer {
        Layer::Closed => NEGATIVITY_FLOOR,
        Layer::Oracle => NEGATIVITY_FLOOR.max(grid.oracle_tolerance),
    };
    let negatives = values.iter().filter(|v| **v < -floor).count();
    Ok(NegativityReport {
        min_value,
        min_location: grid.nodes[k],
        negative_fraction: negatives as f64 / values.len() as f64,
    })
}

/// Side-by-side comparison of the closed-form and oracle layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_abs_residual: f64,
    pub rms_residual: f64,
    /// Least-squares c minimizing Σ (closed − c·oracle)².
    pub best_scale: f64,
    pub rms_after_scale: f64,
    pub min_closed: f64,
    pub min_oracle: f64,
}

pub fn residual_report(grid: &WignerGrid) -> Result<ResidualReport> {
    let (closed, oracle) = match (&grid.values_closed, &grid.values_oracle) {
        (Some(c), Some(o)) if !c.is_empty() => (c, o),
        _ => return Err(QiopaError::EmptyGrid),
    };
    let n = closed.len() as f64;
    let mut max_abs = 0.0f64;
    let mut ss = 0.0;
    let mut co = 0.0;
    let mut oo = 0.0;
    for (c, o) in closed.iter().zip(oracle) {
        let r = c - o;
        max_abs = max_abs.max(r.abs());
        ss += r * r;
        co += c * o;
        oo += o * o;
    }
    let best_scale = if oo > 0.0 { co / oo } else { 0.0 };
    let rms_after = (closed
        .iter()
        .zip(oracle)
        .map(|(c, o)| (c - best_scale * o).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(ResidualReport {
        max_abs_residual: max_abs,
        rms_residual: (ss / n).sqrt(),
        best_scale,
        rms_after_scale: rms_after,
        min_closed: closed.iter().copied().fold(f64::INFINITY, f64::min),
        min_oracle: oracle.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

impl WignerGrid {
    pub fn layer(&self, layer: Layer) -> Option<&[f64]> {
        match layer {
            Layer::Closed => self.values_closed.as_deref(),
            Layer::Oracle => self.values_oracle.as_deref(),
        }
    }

    /// CSV with header `a_re,a_im,b_re,b_im,w_closed,w_oracle`; a missing
    /// layer leaves its column empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a_re,a_im,b_re,b_im,w_closed,w_oracle\n");
        let fmt = |layer: &Option<Vec<f64>>, k: usize| {
            layer
                .as_ref()
                .map(|v| format!("{:.12e}", v[k]))
                .unwrap_or_default()
        };
        for (k, p) in self.nodes.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                p.alpha.re,
                p.alpha.im,
                p.beta.re,
                p.beta.im,
                fmt(&self.values_closed, k),
                fmt(&self.values_oracle, k)
            )
            .unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockCutoff;

    fn g(v: f64) -> GainParams {
        GainParams::new(v).unwrap()
    }

    #[test]
    fn grid_mixture_paths_agree_with_pointwise_oracle() {
        let cut = FockCutoff::new(5).unwrap();
        let member = |n1, n2, s: f64| {
            let a = ModeTensor::fock(cut, Basis::equatorial(0.3), n1, n2).unwrap();
            let b = ModeTensor::fock(cut, Basis::equatorial(0.3), n2, n1).unwrap();
            a.add(&b.scaled(Complex64::new(0.2, s))).unwrap()
        };
        let few = vec![(0.7, member(1, 0, 0.1)), (0.3, member(2, 1, -0.4))];
        let many: Vec<_> = (0..5).map(|k| (1.0 + k as f64, member(k, 4 - k, 0.1 * k as f64))).collect();
        let slice = SliceSpec { nx: 4, ny: 3, x_range: (-0.8, 0.5), y_range: (-0.3, 0.9), ..SliceSpec::default() };
        for members in [few, many] {
            let source = WignerSource { gain: GainParams::new(0.0).unwrap(), injection: 0, oracle_state: Some(members.clone()) };
            let grid = wigner_grid(&source, &slice).unwrap();
            for (p, v) in grid.nodes.iter().zip(grid.values_oracle.unwrap()) {
                assert!((v - wigner_oracle_mixture(&members, *p).unwrap()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn coordinates_at_origin_vanish() {
        let c = squeezed_coords(PhaseSpacePoint::origin(), g(0.7));
        assert_eq!(c.x, 0.0);
        assert_eq!(c.delta_a, C0);
    }

    #[test]
    fn zero_gain_substitution() {
        let p = PhaseSpacePoint::new(Complex64::new(1.0, 0.0), C0);
        let c = squeezed_coords(p, g(0.0));
        for v in [c.gamma_a_plus, c.gamma_a_minus, c.gamma_b_plus, c.gamma_b_minus] {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn interference_polynomials() {
        assert_eq!(interference_term(0.0, 1).unwrap(), 1.0);
        assert_eq!(interference_term(1.0, 1).unwrap(), 0.0);
        assert_eq!(interference_term(1.0, 2).unwrap(), -0.75);
        assert_eq!(
            interference_term(1.0, 3),
            Err(QiopaError::UnsupportedInjection(3))
        );
    }

    #[test]
    fn closed_form_origin_value() {
        let w = wigner_closed_form(PhaseSpacePoint::origin(), g(0.9), 1).unwrap();
        assert!((w + FRAC_2_PI * FRAC_2_PI).abs() < 1e-15);
    }

    #[test]
    fn oracle_vacuum_and_single_photon_at_origin() {
        let cut = FockCutoff::new(5).unwrap();
        let vac = ModeTensor::vacuum(cut);
        let w = wigner_oracle(&vac, PhaseSpacePoint::origin()).unwrap();
        assert!((w - FRAC_2_PI * FRAC_2_PI).abs() < 1e-14);
        let one = ModeTensor::fock(cut, Basis::equatorial(0.0), 1, 0).unwrap();
        let w = wigner_oracle(&one, PhaseSpacePoint::origin()).unwrap();
        assert!((w + FRAC_2_PI * FRAC_2_PI).abs() < 1e-14);
    }

    #[test]
    fn characteristic_function_basics() {
        let cut = FockCutoff::new(12).unwrap();
        let vac = ModeTensor::vacuum(cut);
        let eta = Complex64::new(0.3, -0.2);
        let xi = Complex64::new(-0.1, 0.25);
        let chi = characteristic_fn_oracle(&vac, eta, xi).unwrap();
        let expected = (-0.5 * (eta.norm_sqr() + xi.norm_sqr())).exp();
        assert!((chi - expected).norm() < 1e-14);
        let one = ModeTensor::fock(cut, Basis::equatorial(0.0), 1, 0).unwrap();
        assert!((characteristic_fn_oracle(&one, C0, C0).unwrap() - 1.0).norm() < 1e-15);
        let chi = characteristic_fn_oracle(&one, eta, C0).unwrap();
        let e2 = eta.norm_sqr();
        assert!((chi - (1.0 - e2) * (-0.5 * e2).exp()).norm() < 1e-14);
    }

    #[test]
    fn empty_layer_is_an_error() {
        let grid = WignerGrid {
            slice: SliceSpec::default(),
            nodes: vec![],
            values_closed: Some(vec![]),
            values_oracle: None,
            oracle_tolerance: 0.0,
        };
        assert_eq!(
            negativity_report(&grid, Layer::Closed),
            Err(QiopaError::EmptyGrid)
        );
        assert_eq!(
            negativity_report(&grid, Layer::Oracle),
            Err(QiopaError::EmptyGrid)
        );
    }
}
