//! Single-mode squeezers and the phase-covariant parametric amplifier.
//!
//! Sign convention: for equatorial phase φ and gain g the amplifier acts as
//!
//! ```text
//! U = S(−g e^{−iφ}) ⊗ S(g e^{iφ}),   S(z) = exp(½ (z a†² − z* a²))
//! ```
//!
//! on the (π_φ, π_φ⊥) modes. This is exp(+i H t/ħ) for the interaction
//! H = iχħ a†_H a†_V + h.c. with g = χt, and it is the choice under which the
//! injected |1_φ, 0_φ⊥⟩ evolves into the closed-form γ_ij expansion with
//! (−Γ/2)^i on the odd mode and (Γ/2)^j on the even mode.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Basis, GainParams, ModeTensor};
use crate::error::Result;

/// Extra Fock levels kept beyond the cutoff when exponentiating the
/// truncated squeeze generator, so that the retained matrix elements do not
/// feel the artificial boundary.
pub fn squeeze_padding(r: f64) -> usize {
    let t = r.tanh();
    if t < 1e-3 {
        return 16;
    }
    ((64.0 / -t.ln()).ceil() as usize).clamp(16, 2000)
}

/// Matrix elements ⟨m|S(z)|n⟩ for m, n ≤ `n_max`.
///
/// Computed as exp of the padded real generator ½r(a†² − a²), split into
/// its even and odd parity blocks, with the phase of `z` restored by
/// e^{iθ(m−n)/2}.
pub fn squeeze_operator(z: Complex64, n_max: usize) -> DMatrix<Complex64> {
    let r = z.norm();
    let theta = z.arg();
    let dim = n_max + 1 + squeeze_padding(r);
    let mut real = DMatrix::<f64>::zeros(n_max + 1, n_max + 1);
    for parity in 0..2 {
        let size = (dim - parity).div_ceil(2);
        let mut gen = DMatrix::<f64>::zeros(size, size);
        for k in 0..size - 1 {
            let n = (parity + 2 * k) as f64;
            let c = 0.5 * r * ((n + 1.0) * (n + 2.0)).sqrt();
            gen[(k + 1, k)] = c;
            gen[(k, k + 1)] = -c;
        }
        let block = gen.exp();
        for (bm, m) in (parity..=n_max).step_by(2).enumerate() {
            for (bn, n) in (parity..=n_max).step_by(2).enumerate() {
                real[(m, n)] = block[(bm, bn)];
            }
        }
    }
    DMatrix::from_fn(n_max + 1, n_max + 1, |m, n| {
        let phase = 0.5 * theta * (m as f64 - n as f64);
        Complex64::from_polar(real[(m, n)], phase)
    })
}

/// Amplifies `state` with the phase-covariant QI-OPA unitary at `gain`.
///
/// The state is rotated into the equatorial basis of `phase` and the result
/// carries that basis tag. The physical unitary does not depend on `phase`;
/// it only selects the basis the computation runs in.
pub fn qiopa_unitary(state: &ModeTensor, gain: GainParams, phase: f64) -> Result<ModeTensor> {
    let basis = Basis::equatorial(phase);
    let psi = state.in_basis(basis);
    let n_max = psi.cutoff.n_max();
    let g = gain.g();
    if g == 0.0 {
        return Ok(psi);
    }
    let phi = match basis {
        Basis::Equatorial(p) => p,
        Basis::HV => unreachable!(),
    };
    let s_par = squeeze_operator(-Complex64::from_polar(g, -phi), n_max);
    let s_perp = squeeze_operator(Complex64::from_polar(g, phi), n_max);
    let amps = &s_par * &psi.amps * s_perp.transpose();
    let out = ModeTensor {
        cutoff: psi.cutoff,
        basis,
        amps,
    };
    let deficit = psi.norm_sqr() - out.norm_sqr();
    psi.cutoff.check_deficit(deficit)?;
    Ok(out)
}
