//! Cholesky factor `S_n = <l| L_1 ... L_n |r>` and the steady state
//! `ρ = S S† / tr(S S†)`.
//!
//! The contraction is a depth-first sweep over physical index pairs carrying
//! one auxiliary row vector per level of the recursion, so memory stays at
//! `O(n · dim)` besides the output. Branches whose partial vector vanishes
//! are pruned, which makes vacuum contractions cheap.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lax::LaxOp;
use crate::qalgebra::{AuxRep, SMALL_ANGLE};
use crate::sparse::dense_max_abs;
use crate::C64;

/// Default bound on the number of rows of a dense many-body operator.
pub const DENSE_LIMIT: usize = 4096;

#[derive(Clone, Debug)]
pub struct MpoFactor {
    pub lax: LaxOp,
    pub n_sites: usize,
    pub left_vec: Vec<C64>,
    pub right_vec: Vec<C64>,
}

fn unit(dim: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); dim];
    v[0] = C64::new(1.0, 0.0);
    v
}

impl MpoFactor {
    /// Vacuum boundary vectors.
    pub fn new(lax: LaxOp, n_sites: usize) -> Result<Self> {
        let d = lax.dim;
        Self::with_vectors(lax, n_sites, unit(d), unit(d))
    }

    pub fn with_vectors(lax: LaxOp, n_sites: usize, left_vec: Vec<C64>, right_vec: Vec<C64>) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidParam("chain needs at least one site".into()));
        }
        if lax.dim < n_sites + 2 {
            return Err(Error::Precondition(format!(
                "auxiliary dim {} below n + 2 = {}",
                lax.dim,
                n_sites + 2
            )));
        }
        if left_vec.len() != lax.dim || right_vec.len() != lax.dim {
            return Err(Error::DimMismatch("boundary vectors do not match auxiliary dim".into()));
        }
        Ok(Self {
            lax,
            n_sites,
            left_vec,
            right_vec,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    pub n_phys: usize,
    pub n_sites: usize,
    pub matrix: DMatrix<C64>,
    pub hermitian: bool,
    pub positive: bool,
}

impl DenseOperator {
    pub fn new(n_phys: usize, n_sites: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let d = n_phys.pow(n_sites as u32);
        if matrix.shape() != (d, d) {
            return Err(Error::DimMismatch(format!(
                "matrix {:?} for {n_sites} sites of dimension {n_phys}",
                matrix.shape()
            )));
        }
        Ok(Self {
            n_phys,
            n_sites,
            matrix,
            hermitian: false,
            positive: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        dense_max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    /// Smallest eigenvalue of the hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        dense_max_abs(&(&self.matrix - &other.matrix))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            self.matrix
                .row_iter()
                .map(|r| r.iter().map(f).collect())
                .collect()
        };
        serde_json::json!({
            "n": self.n_sites,
            "N": self.n_phys,
            "re": rows(|z| z.re),
            "im": rows(|z| z.im),
        })
    }

    /// Row-major interleaved `(re, im)` little-endian doubles.
    pub fn to_bin(&self) -> Vec<u8> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d * 16);
        for i in 0..d {
            for j in 0..d {
                let z = self.matrix[(i, j)];
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        out
    }
}

fn check_capacity(n_phys: usize, n_sites: usize, limit: usize) -> Result<usize> {
    let rows = (n_phys as u128).checked_pow(n_sites as u32).unwrap_or(u128::MAX);
    if rows > limit as u128 {
        return Err(Error::Capacity {
            what: "dense many-body operator rows",
            needed: rows.min(usize::MAX as u128) as usize,
            limit,
        });
    }
    Ok(rows as usize)
}

/// `<l| O_1 ... O_n |r>` as a dense `N^n x N^n` matrix, with `O_k` given
/// per site. Entry `(α, β)` multiplies `E^{α_1 β_1} ⊗ ... ⊗ E^{α_n β_n}`.
pub fn contract_chain(ops: &[&LaxOp], left: &[C64], right: &[C64], limit: usize) -> Result<DMatrix<C64>> {
    let n = ops.len();
    if n == 0 {
        return Err(Error::InvalidParam("empty chain".into()));
    }
    let np = ops[0].n_phys;
    let rows = check_capacity(np, n, limit)?;
    let mut out = DMatrix::zeros(rows, rows);
    let zero = C64::new(0.0, 0.0);
    // stack of (site, alpha, beta, partial row vector)
    let mut stack: Vec<(usize, usize, usize, Vec<C64>)> = vec![(0, 0, 0, left.to_vec())];
    while let Some((site, a, b, v)) = stack.pop() {
        if site == n {
            let val: C64 = v.iter().zip(right).map(|(x, y)| x * y).sum();
            out[(a, b)] = val;
            continue;
        }
        let op = ops[site];
        for i in 0..np {
            for j in 0..np {
                let w = op.block(i, j).vec_mul(&v);
                if w.iter().all(|&x| x == zero) {
                    continue;
                }
                stack.push((site + 1, a * np + i, b * np + j, w));
            }
        }
    }
    Ok(out)
}

pub fn build_s_with_limit(factor: &MpoFactor, limit: usize) -> Result<DenseOperator> {
    let ops = vec![&factor.lax; factor.n_sites];
    let m = contract_chain(&ops, &factor.left_vec, &factor.right_vec, limit)?;
    DenseOperator::new(factor.lax.n_phys, factor.n_sites, m)
}

pub fn build_s(factor: &MpoFactor) -> Result<DenseOperator> {
    build_s_with_limit(factor, DENSE_LIMIT)
}

/// `S S† / tr(S S†)` with hermiticity and positivity flags checked.
pub fn steady_state(factor: &MpoFactor) -> Result<DenseOperator> {
    let s = build_s(factor)?;
    let rho = &s.matrix * s.matrix.adjoint();
    let tr = rho.trace();
    if !(tr.norm() > 1e-300) || !tr.norm().is_finite() {
        return Err(Error::ZeroTrace(tr.norm()));
    }
    let mut out = DenseOperator::new(s.n_phys, s.n_sites, rho / tr)?;
    out.hermitian = out.hermiticity_residual() <= 1e-14;
    out.positive = out.min_eigenvalue() >= -1e-12;
    Ok(out)
}

/// Spin parameter solving `Γ = 4 sin γ coth(γ Im s)` with `s = i Im s`.
///
/// `Im s = arcoth(Γ / (4 sin γ)) / γ` on the principal branch
/// `arcoth x = ½ ln((x+1)/(x-1))`. For `|Γ/(4 sin γ)| < 1` the branch is
/// complex and the returned `s` acquires a real part `-π/(2γ)`; the steady
/// state built from it is still exact. At `γ = 0` this is `s = 4i/Γ`.
pub fn solve_spin_param(gamma: f64, coupling: f64) -> Result<C64> {
    if !(coupling > 0.0) || !coupling.is_finite() {
        return Err(Error::InvalidParam(format!("coupling must be positive, got {coupling}")));
    }
    if gamma.abs() < SMALL_ANGLE {
        return Ok(C64::new(0.0, 4.0 / coupling));
    }
    let x = C64::new(coupling / (4.0 * gamma.sin()), 0.0);
    let acoth = ((x + 1.0) / (x - 1.0)).ln() * 0.5;
    Ok(C64::i() * acoth / gamma)
}

/// Inverse of `solve_spin_param`: `Γ = 4 sin γ coth(γ Im s)` evaluated on
/// the complex branch, i.e. `4 sin γ coth(-iγ s)`.
pub fn coupling_from_spin(gamma: f64, s: C64) -> C64 {
    if gamma.abs() < SMALL_ANGLE {
        return C64::new(0.0, 4.0) / s;
    }
    let a = -C64::i() * gamma * s;
    a.cosh() / a.sinh() * (4.0 * gamma.sin())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlnWeights {
    pub weights: Vec<C64>,
    pub gamma_left: f64,
    pub gamma_right: f64,
}

/// `r_0 = -4i/((N-1)² Γ)`, `r_{N-1} = -N r_0`, couplings `Γ_L = Γ`,
/// `Γ_R = (N-1)² Γ`.
pub fn gln_weights(n: usize, coupling: f64) -> Result<GlnWeights> {
    if n < 2 {
        return Err(Error::InvalidParam(format!("N must be >= 2, got {n}")));
    }
    if !(coupling > 0.0) || !coupling.is_finite() {
        return Err(Error::InvalidParam(format!("coupling must be positive, got {coupling}")));
    }
    let m = ((n - 1) * (n - 1)) as f64;
    let r0 = C64::new(0.0, -4.0 / (m * coupling));
    let mut weights = vec![C64::new(0.0, 0.0); n];
    weights[0] = r0;
    weights[n - 1] = -r0 * n as f64;
    Ok(GlnWeights {
        weights,
        gamma_left: coupling,
        gamma_right: m * coupling,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// `exp(φ S^+)|0>` (right) or `<0| exp(φ S^-)` (left) as a finite sum.
pub fn coherent_vector(rep: &AuxRep, phi: C64, side: Side) -> Result<Vec<C64>> {
    let mut term = rep.vacuum();
    let mut out = term.clone();
    for k in 1..rep.dim {
        term = match side {
            Side::Right => rep.generator("S+")?.mul_vec(&term),
            Side::Left => rep.generator("S-")?.vec_mul(&term),
        };
        let c = phi / k as f64;
        for t in term.iter_mut() {
            *t *= c;
        }
        for (o, t) in out.iter_mut().zip(&term) {
            *o += t;
        }
    }
    Ok(out)
}

/// Largest entries strictly below and strictly above the diagonal after
/// permuting the basis by `order`, relative to the largest entry.
pub fn triangular_defect(m: &DMatrix<C64>, order: &[usize]) -> (f64, f64) {
    let scale = dense_max_abs(m).max(f64::MIN_POSITIVE);
    let (mut lo, mut up) = (0.0f64, 0.0f64);
    for (a, &i) in order.iter().enumerate() {
        for (b, &j) in order.iter().enumerate() {
            let v = m[(i, j)].norm() / scale;
            if a > b {
                lo = lo.max(v);
            } else if a < b {
                up = up.max(v);
            }
        }
    }
    (lo, up)
}

/// Basis states of `n` spin-1/2 sites sorted by total magnetization, ties
/// kept in natural order. Index bit 1 is spin down.
pub fn magnetization_order(n_sites: usize, descending: bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..1usize << n_sites).collect();
    idx.sort_by_key(|&i| {
        let ups = n_sites as i64 - i.count_ones() as i64;
        if descending {
            -ups
        } else {
            ups
        }
    });
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lax::lax_xxz;
    use crate::qalgebra::{verma_sl2, QParams};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn single_site_vacuum() {
        let s = c(0.0, 4.0);
        let p = QParams::new(0.0);
        let l = lax_xxz(&verma_sl2(s, &p, 3).unwrap(), &p).unwrap();
        let m = build_s(&MpoFactor::new(l, 1).unwrap()).unwrap().matrix;
        assert!((m[(0, 0)] + s).norm() < 1e-15);
        assert!((m[(1, 1)] - s).norm() < 1e-15);
        assert!(m[(0, 1)].norm() == 0.0 && m[(1, 0)].norm() == 0.0);
    }

    #[test]
    fn two_sites_by_hand() {
        // S_{(a1 a2),(b1 b2)} = Σ_k <0|L(a1,b1)|k><k|L(a2,b2)|0>
        let g = PI / 4.0;
        let s = solve_spin_param(g, 1.0).unwrap();
        let p = QParams::new(g);
        let l = lax_xxz(&verma_sl2(s, &p, 4).unwrap(), &p).unwrap();
        let m = build_s(&MpoFactor::new(l.clone(), 2).unwrap()).unwrap().matrix;
        for a in 0..4 {
            for b in 0..4 {
                let (a1, a2, b1, b2) = (a / 2, a % 2, b / 2, b % 2);
                let want: C64 = (0..4).map(|k| l.block(a1, b1).get(0, k) * l.block(a2, b2).get(k, 0)).sum();
                assert!((m[(a, b)] - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn capacity_is_enforced() {
        let p = QParams::new(0.0);
        let l = lax_xxz(&verma_sl2(c(0.0, 4.0), &p, 15).unwrap(), &p).unwrap();
        let f = MpoFactor::new(l, 13).unwrap();
        assert!(build_s(&f).unwrap_err().is_capacity());
    }

    #[test]
    fn aux_dim_precondition() {
        let p = QParams::new(0.0);
        let l = lax_xxz(&verma_sl2(c(0.0, 4.0), &p, 4).unwrap(), &p).unwrap();
        assert!(MpoFactor::new(l, 3).is_err());
    }

    #[test]
    fn spin_param_examples() {
        assert_eq!(solve_spin_param(0.0, 1.0).unwrap(), c(0.0, 4.0));
        assert!(solve_spin_param(0.3, 0.0).is_err());
        for (g, gam) in [(PI / 4.0, 8.0), (PI / 3.0, 2.0), (0.3, 0.5), (PI / 4.0, 1.0)] {
            let s = solve_spin_param(g, gam).unwrap();
            assert!((coupling_from_spin(g, s) - gam).norm() < 1e-12, "γ={g} Γ={gam}");
        }
        // real branch yields purely imaginary s
        let s = solve_spin_param(PI / 3.0, 8.0).unwrap();
        assert!(s.re.abs() < 1e-15 && s.im > 0.0);
    }

    #[test]
    fn gln_weight_examples() {
        let w = gln_weights(2, 1.0).unwrap();
        assert_eq!(w.weights, vec![c(0.0, -4.0), c(0.0, 8.0)]);
        assert_eq!((w.gamma_left, w.gamma_right), (1.0, 1.0));
        let w = gln_weights(3, 1.0).unwrap();
        assert_eq!(w.weights, vec![c(0.0, -1.0), c(0.0, 0.0), c(0.0, 3.0)]);
        assert_eq!(w.gamma_right, 4.0);
        let lam = w.weights[0] * 3.0 + w.weights[2];
        assert!(lam.norm() < 1e-15);
    }

    #[test]
    fn coherent_components() {
        let s = c(0.0, 4.0);
        let p = QParams::new(0.0);
        let rep = verma_sl2(s, &p, 5).unwrap();
        assert_eq!(coherent_vector(&rep, c(0.0, 0.0), Side::Right).unwrap(), rep.vacuum());
        let phi = c(0.3, 0.0);
        let v = coherent_vector(&rep, phi, Side::Right).unwrap();
        let mut fall = c(1.0, 0.0);
        let mut fact = 1.0;
        for k in 0..5 {
            if k > 0 {
                fall *= s * 2.0 - (k - 1) as f64;
                fact *= k as f64;
            }
            let want = phi.powu(k as u32) * fall / fact;
            assert!((v[k] - want).norm() < 1e-12 * want.norm().max(1.0));
        }
    }

    #[test]
    fn magnetization_order_is_sorted() {
        let o = magnetization_order(3, false);
        assert_eq!(o[0], 7);
        assert_eq!(*o.last().unwrap(), 0);
    }
}
