use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Basis, ModeTensor, NORM_SLACK};
use crate::error::{invalid, QiopaError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Site {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtTerm {
    pub weight: Complex64,
    pub site_a: ModeTensor,
    pub site_b: ModeTensor,
}

/// A two-site pure state kept as a short sum of weighted product terms.
///
/// Nothing here ever materializes the joint four-mode tensor; norms and
/// overlaps go through pairwise single-site overlaps.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    terms: Vec<SchmidtTerm>,
}

impl BipartiteState {
    pub fn new(terms: Vec<SchmidtTerm>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| invalid("terms", "a bipartite state needs at least one term"))?;
        for t in &terms[1..] {
            first.site_a.check_cutoff(&t.site_a)?;
            first.site_b.check_cutoff(&t.site_b)?;
        }
        Ok(Self { terms })
    }

    pub fn product(weight: Complex64, site_a: ModeTensor, site_b: ModeTensor) -> Self {
        Self {
            terms: vec![SchmidtTerm {
                weight,
                site_a,
                site_b,
            }],
        }
    }

    pub fn terms(&self) -> &[SchmidtTerm] {
        &self.terms
    }

    pub fn site(&self, site: Site, term: usize) -> &ModeTensor {
        match site {
            Site::A => &self.terms[term].site_a,
            Site::B => &self.terms[term].site_b,
        }
    }

    /// Hermitian inner product ⟨self|other⟩.
    pub fn overlap(&self, other: &BipartiteState) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for s in &self.terms {
            for o in &other.terms {
                acc += s.weight.conj()
                    * o.weight
                    * s.site_a.overlap(&o.site_a)?
                    * s.site_b.overlap(&o.site_b)?;
            }
        }
        Ok(acc)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.overlap(self)
            .expect("terms share cutoffs by construction")
            .re
    }

    pub fn fidelity(&self, other: &BipartiteState) -> Result<f64> {
        let denom = self.norm_sqr() * other.norm_sqr();
        if denom <= f64::MIN_POSITIVE {
            return Err(QiopaError::ZeroNorm);
        }
        Ok(self.overlap(other)?.norm_sqr() / denom)
    }

    /// Rescales the weights to unit norm.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n <= f64::MIN_POSITIVE {
            return Err(QiopaError::ZeroNorm);
        }
        let s = 1.0 / n.sqrt();
        Ok(Self {
            terms: self
                .terms
                .iter()
                .map(|t| SchmidtTerm {
                    weight: t.weight * s,
                    ..t.clone()
                })
                .collect(),
        })
    }

    /// Normalizes and folds together terms whose site tensors are both
    /// parallel to an earlier term's.
    pub fn normalized_merged(&self, tol: f64) -> Result<Self> {
        let mut merged: Vec<SchmidtTerm> = Vec::new();
        'outer: for t in &self.terms {
            for m in merged.iter_mut() {
                if let (Some(ca), Some(cb)) = (
                    parallel_factor(&m.site_a, &t.site_a, tol)?,
                    parallel_factor(&m.site_b, &t.site_b, tol)?,
                ) {
                    m.weight += t.weight * ca * cb;
                    continue 'outer;
                }
            }
            merged.push(t.clone());
        }
        merged.retain(|t| t.weight.norm() > 0.0);
        if merged.is_empty() {
            return Err(QiopaError::ZeroNorm);
        }
        Self { terms: merged }.normalized()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| SchmidtTerm {
                    weight: t.weight * c,
                    ..t.clone()
                })
                .collect(),
        }
    }

    /// Exchanges the roles of the two sites.
    pub fn swap_sites(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| SchmidtTerm {
                    weight: t.weight,
                    site_a: t.site_b.clone(),
                    site_b: t.site_a.clone(),
                })
                .collect(),
        }
    }

    /// Applies a linear map to every tensor of one site.
    pub fn map_site<F>(&self, site: Site, mut f: F) -> Result<Self>
    where
        F: FnMut(&ModeTensor) -> Result<ModeTensor>,
    {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                Ok(match site {
                    Site::A => SchmidtTerm {
                        site_a: f(&t.site_a)?,
                        ..t.clone()
                    },
                    Site::B => SchmidtTerm {
                        site_b: f(&t.site_b)?,
                        ..t.clone()
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(terms)
    }

    pub fn in_bases(&self, basis_a: Basis, basis_b: Basis) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| SchmidtTerm {
                    weight: t.weight,
                    site_a: t.site_a.in_basis(basis_a),
                    site_b: t.site_b.in_basis(basis_b),
                })
                .collect(),
        }
    }

    /// Reduced density matrix of one site over its flattened (n1, n2) index,
    /// row index `n1 * dim + n2`. Quadratic in the site dimension; meant for
    /// small cutoffs.
    pub fn reduced_density(&self, site: Site) -> Result<DMatrix<Complex64>> {
        let (keep, other) = match site {
            Site::A => (
                self.terms.iter().map(|t| &t.site_a).collect::<Vec<_>>(),
                self.terms.iter().map(|t| &t.site_b).collect::<Vec<_>>(),
            ),
            Site::B => (
                self.terms.iter().map(|t| &t.site_b).collect::<Vec<_>>(),
                self.terms.iter().map(|t| &t.site_a).collect::<Vec<_>>(),
            ),
        };
        let basis = keep[0].basis();
        let d = keep[0].cutoff().dim();
        let flat: Vec<Vec<Complex64>> = keep
            .iter()
            .map(|k| {
                let k = k.in_basis(basis);
                let mut v = vec![Complex64::new(0.0, 0.0); d * d];
                for ((i, j), a) in k.indexed() {
                    v[i * d + j] = *a;
                }
                v
            })
            .collect();
        let mut rho = DMatrix::from_element(d * d, d * d, Complex64::new(0.0, 0.0));
        for (s, ts) in self.terms.iter().enumerate() {
            for (u, tu) in self.terms.iter().enumerate() {
                let c = ts.weight * tu.weight.conj() * other[u].overlap(other[s])?;
                for (x, vx) in flat[s].iter().enumerate() {
                    if *vx == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for (y, vy) in flat[u].iter().enumerate() {
                        rho[(x, y)] += c * vx * vy.conj();
                    }
                }
            }
        }
        Ok(rho)
    }

    /// Checks the container invariant: norm in (0, 1 + slack].
    pub fn check_norm(&self) -> Result<f64> {
        let n = self.norm_sqr();
        if n <= 0.0 {
            return Err(QiopaError::ZeroNorm);
        }
        if n > 1.0 + NORM_SLACK {
            return Err(invalid("state", format!("norm² {n} exceeds one")));
        }
        Ok(n)
    }
}

/// Some(c) with `b = c·a` when the two tensors are parallel.
fn parallel_factor(a: &ModeTensor, b: &ModeTensor, tol: f64) -> Result<Option<Complex64>> {
    let na = a.norm_sqr();
    let nb = b.norm_sqr();
    if na == 0.0 || nb == 0.0 {
        return Ok(None);
    }
    let ov = a.overlap(b)?;
    if (ov.norm_sqr() - na * nb).abs() <= tol * na * nb {
        Ok(Some(ov / na))
    } else {
        Ok(None)
    }
}
