use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Basis, ModeTensor};

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// 2×2 map M with a†_{from,k} = Σ_l M[k][l] a†_{to,l}.
fn mode_map(from: Basis, to: Basis) -> [[Complex64; 2]; 2] {
    let bx = from.creation_matrix();
    let by = to.creation_matrix();
    let mut m = [[C0; 2]; 2];
    for k in 0..2 {
        for l in 0..2 {
            // (B_from · B_to†)[k][l]
            m[k][l] = (0..2).map(|q| bx[k][q] * by[l][q].conj()).sum();
        }
    }
    m
}

/// Columns of the (N+1)×(N+1) matrix representing the mode map on the
/// N-photon sector, built column by column from sector N−1 so that every
/// column stays a unit vector.
fn next_sector(prev: &[Vec<Complex64>], n: usize, m: &[[Complex64; 2]; 2]) -> Vec<Vec<Complex64>> {
    let raise = |v: &[Complex64], row: [Complex64; 2], norm: f64| -> Vec<Complex64> {
        let mut out = vec![C0; n + 1];
        for (p, slot) in out.iter_mut().enumerate() {
            let mut acc = C0;
            if p >= 1 {
                acc += row[0] * (p as f64).sqrt() * v[p - 1];
            }
            if p < n {
                acc += row[1] * ((n - p) as f64).sqrt() * v[p];
            }
            *slot = acc / norm;
        }
        out
    };
    let mut cols = Vec::with_capacity(n + 1);
    // k = 0: |0, N⟩ = a†_{from,1} |0, N−1⟩ / √N
    cols.push(raise(&prev[0], m[1], (n as f64).sqrt()));
    for k in 1..=n {
        cols.push(raise(&prev[k - 1], m[0], (k as f64).sqrt()));
    }
    cols
}

/// The sector matrices of one basis change, reusable across tensors that
/// share the source basis and cutoff.
#[derive(Debug, Clone)]
pub struct BasisRotation {
    from: Basis,
    to: Basis,
    n_max: usize,
    /// sectors[N][k] is column k of the N-photon block.
    sectors: Vec<Vec<Vec<Complex64>>>,
}

impl BasisRotation {
    pub fn new(from: Basis, to: Basis, n_max: usize) -> Self {
        let m = mode_map(from, to);
        let mut sectors: Vec<Vec<Vec<Complex64>>> = Vec::with_capacity(2 * n_max + 1);
        sectors.push(vec![vec![Complex64::new(1.0, 0.0)]]);
        for n in 1..=2 * n_max {
            let next = next_sector(&sectors[n - 1], n, &m);
            sectors.push(next);
        }
        Self { from, to, n_max, sectors }
    }

    /// Rotates `t`, falling back to a fresh rotation when `t` does not match
    /// the source basis or cutoff.
    pub fn apply(&self, t: &ModeTensor) -> ModeTensor {
        if t.basis.same_as(&self.to) {
            return t.clone();
        }
        if !t.basis.same_as(&self.from) || t.cutoff.n_max() != self.n_max {
            return t.rotate_basis(self.to);
        }
        let n_max = self.n_max;
        let d = n_max + 1;
        let mut out = DMatrix::from_element(d, d, C0);
        for (n, sector) in self.sectors.iter().enumerate() {
            let k_lo = n.saturating_sub(n_max);
            let k_hi = n.min(n_max);
            for k in k_lo..=k_hi {
                let a = t.amps[(k, n - k)];
                if a == C0 {
                    continue;
                }
                let col = &sector[k];
                for p in k_lo..=k_hi {
                    out[(p, n - p)] += col[p] * a;
                }
            }
        }
        ModeTensor {
            cutoff: t.cutoff,
            basis: self.to,
            amps: out,
        }
    }
}

impl ModeTensor {
    /// Re-expresses the amplitudes in another polarization basis.
    ///
    /// The transformation is block diagonal in total photon number, so the
    /// photon-number distribution is preserved up to the occupations that
    /// no longer fit under the cutoff in the target basis.
    pub fn rotate_basis(&self, to: Basis) -> ModeTensor {
        BasisRotation::new(self.basis, to, self.cutoff.n_max()).apply(self)
    }
}
