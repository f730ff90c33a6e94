#![allow(dead_code)]

use num_complex::Complex64;
use proptest::prelude::*;
use qiopa_core::fock::{Basis, BipartiteState, FockCutoff, Ladder, ModeIndex, ModeTensor};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// (a†_φ, a†_φ⊥) in terms of (a†_H, a†_V), written out from the definition.
pub fn creation_rows(phase: f64) -> [[Complex64; 2]; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        [c(s, 0.0), Complex64::from_polar(s, phase)],
        [-Complex64::from_polar(s, -phase), c(s, 0.0)],
    ]
}

fn apply_combo(t: &ModeTensor, row: [Complex64; 2]) -> ModeTensor {
    let h = t.apply_ladder(ModeIndex::First, Ladder::Create).unwrap();
    let v = t.apply_ladder(ModeIndex::Second, Ladder::Create).unwrap();
    h.scaled(row[0]).add(&v.scaled(row[1])).unwrap()
}

/// |n1, n2⟩ of the φ basis built in H/V by repeated creation operators.
pub fn fock_by_ladders(cutoff: FockCutoff, phase: f64, n1: usize, n2: usize) -> ModeTensor {
    let rows = creation_rows(phase);
    let mut t = ModeTensor::vacuum(cutoff.lenient());
    for _ in 0..n1 {
        t = apply_combo(&t, rows[0]);
    }
    for _ in 0..n2 {
        t = apply_combo(&t, rows[1]);
    }
    let f: f64 = (1..=n1).chain(1..=n2).map(|k| k as f64).product();
    t.scaled(c(1.0 / f.sqrt(), 0.0))
}

/// H/V amplitudes of an equatorial-basis tensor, by superposing ladder-built kets.
pub fn to_hv_by_ladders(t: &ModeTensor) -> ModeTensor {
    let phase = match t.basis() {
        Basis::HV => return t.clone(),
        Basis::Equatorial(p) => p,
    };
    let cutoff = t.cutoff().lenient();
    let d = cutoff.dim();
    let mut out = ModeTensor::zeros(cutoff, Basis::HV);
    for n1 in 0..d {
        for n2 in 0..d {
            let a = t.amp(n1, n2);
            if a != ZERO {
                out = out.add(&fock_by_ladders(cutoff, phase, n1, n2).scaled(a)).unwrap();
            }
        }
    }
    out
}

/// Largest elementwise distance between two tensors compared in H/V.
pub fn max_diff(a: &ModeTensor, b: &ModeTensor) -> f64 {
    let (a, b) = (a.in_basis(Basis::HV), b.in_basis(Basis::HV));
    a.amplitudes()
        .iter()
        .zip(b.amplitudes().iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Flattened dense joint tensor ψ[(a1, a2, b1, b2)] in H/V on both sites.
pub fn dense(state: &BipartiteState) -> Vec<Complex64> {
    let da = state.terms()[0].site_a.cutoff().dim();
    let db = state.terms()[0].site_b.cutoff().dim();
    let mut out = vec![ZERO; da * da * db * db];
    for term in state.terms() {
        let a = term.site_a.in_basis(Basis::HV);
        let b = term.site_b.in_basis(Basis::HV);
        let mut k = 0;
        for a1 in 0..da {
            for a2 in 0..da {
                for b1 in 0..db {
                    for b2 in 0..db {
                        out[k] += term.weight * a.amp(a1, a2) * b.amp(b1, b2);
                        k += 1;
                    }
                }
            }
        }
    }
    out
}

pub fn dense_inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn dense_norm_sqr(x: &[Complex64]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum()
}

/// Random tensor supported on n1 + n2 ≤ n_max.
pub fn tensor_from(cutoff: FockCutoff, basis: Basis, raw: &[(f64, f64)]) -> ModeTensor {
    let d = cutoff.dim();
    let mut t = ModeTensor::zeros(cutoff, basis);
    let mut k = 0;
    for n1 in 0..d {
        for n2 in 0..d - n1 {
            let (re, im) = raw[k % raw.len()];
            let ket = ModeTensor::fock(cutoff, basis, n1, n2).unwrap();
            t = t.add(&ket.scaled(c(re, im))).unwrap();
            k += 1;
        }
    }
    t
}

pub fn raw_amps(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
}

/// Normalized random tensor supported on n1 + n2 ≤ n_max.
pub fn random_tensor(cutoff: FockCutoff, basis: Basis) -> impl Strategy<Value = ModeTensor> {
    raw_amps(cutoff.dim() * (cutoff.dim() + 1) / 2)
        .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(move |v| tensor_from(cutoff, basis, &v).normalized().unwrap())
}

/// ⟨n1 + n2⟩ by direct sum over the amplitudes.
pub fn total_photons_brute(t: &ModeTensor) -> f64 {
    let d = t.cutoff().dim();
    let mut s = 0.0;
    for n1 in 0..d {
        for n2 in 0..d {
            s += (n1 + n2) as f64 * t.amp(n1, n2).norm_sqr();
        }
    }
    s / t.norm_sqr()
}

/// Active equatorial rotation by φ: |n1, n2⟩_0 ↦ e^{iφ(n2 − n1)/2} |n1, n2⟩_φ.
pub fn rotate_equatorial(t: &ModeTensor, phase: f64) -> ModeTensor {
    let t = t.in_basis(Basis::equatorial(0.0));
    let d = t.cutoff().dim();
    let amps = nalgebra::DMatrix::from_fn(d, d, |n1, n2| {
        t.amp(n1, n2) * Complex64::from_polar(1.0, phase * (n2 as f64 - n1 as f64) / 2.0)
    });
    ModeTensor::from_amplitudes(t.cutoff(), Basis::equatorial(phase), amps).unwrap()
}

/// Max elementwise distance after removing the best global phase.
pub fn diff_up_to_phase(a: &ModeTensor, b: &ModeTensor) -> f64 {
    let ov = a.overlap(b).unwrap();
    let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { c(1.0, 0.0) };
    max_diff(&a.scaled(phase), b)
}
