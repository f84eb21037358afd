//! Vertex operators on the doubled auxiliary space `aux ⊗ conj(aux)`.
//!
//! A vertex operator is a sum of terms `c · A ⊗ conj(B)`. Besides the full
//! doubled matrix (index `a·d + b`), each vertex carries its compression onto
//! the diagonal states `|k,k>`, computed entrywise as
//! `Σ c · A[k,k'] · conj(B[k,k'])`. For Lax operators whose blocks map basis
//! vectors to single basis vectors the diagonal subspace is invariant, so the
//! compression is exact under products and large chains never touch the
//! doubled space.
//!
//! Long products are evaluated as normalized sweeps; only ratios of vacuum
//! matrix elements are formed, which stay finite at any chain length.

use crate::error::{Error, Result};
use crate::lax::LaxOp;
use crate::qalgebra::{qnum, sinc};
use crate::sparse::SparseMat;
use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct VertexOp {
    pub dim: usize,
    pub matrix: Option<SparseMat>,
    pub reduced: Option<SparseMat>,
}

struct Terms {
    dim: usize,
    terms: Vec<(C64, SparseMat, SparseMat)>,
}

impl Terms {
    fn new(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    fn push(&mut self, c: C64, a: SparseMat, b: SparseMat) {
        self.terms.push((c, a, b));
    }

    fn build(self, full: bool) -> VertexOp {
        let d = self.dim;
        let mut t = Vec::new();
        for (c, a, b) in &self.terms {
            for (i, j, x) in a.triplets() {
                let y = b.get(i, j);
                if y != C64::new(0.0, 0.0) {
                    t.push((i, j, c * x * y.conj()));
                }
            }
        }
        let reduced = SparseMat::from_triplets(d, d, t);
        let matrix = full.then(|| {
            let mut acc = SparseMat::zeros(d * d, d * d);
            for (c, a, b) in &self.terms {
                acc = acc.add_scaled(&a.kron(&b.conj()), *c);
            }
            acc
        });
        VertexOp {
            dim: d,
            matrix,
            reduced: Some(reduced),
        }
    }
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

impl VertexOp {
    fn full(&self) -> Result<&SparseMat> {
        self.matrix
            .as_ref()
            .ok_or_else(|| Error::Precondition("vertex built without its doubled-space matrix".into()))
    }

    pub fn reduced(&self) -> &SparseMat {
        self.reduced.as_ref().expect("every vertex carries its compression")
    }

    /// `max |P M P - reduced|` with `P` the projector on diagonal states.
    pub fn compression_defect(&self) -> Result<f64> {
        let m = self.full()?;
        let d = self.dim;
        let r = self.reduced();
        let mut worst = 0.0f64;
        for k in 0..d {
            for l in 0..d {
                worst = worst.max((m.get(k * d + k, l * d + l) - r.get(k, l)).norm());
            }
        }
        Ok(worst)
    }

    /// Largest component outside the diagonal subspace of `M |k,k>`,
    /// over all `k`.
    pub fn diagonal_leakage(&self) -> Result<f64> {
        let m = self.full()?;
        let d = self.dim;
        let mut worst = 0.0f64;
        for (r, c, v) in m.triplets() {
            let col_diag = c / d == c % d;
            let row_diag = r / d == r % d;
            if col_diag && !row_diag {
                worst = worst.max(v.norm());
            }
        }
        Ok(worst)
    }

    pub fn add(&self, other: &VertexOp, c: C64) -> VertexOp {
        VertexOp {
            dim: self.dim,
            matrix: match (&self.matrix, &other.matrix) {
                (Some(a), Some(b)) => Some(a.add_scaled(b, c)),
                _ => None,
            },
            reduced: Some(self.reduced().add_scaled(other.reduced(), c)),
        }
    }
}

fn site_terms(lax: &LaxOp, species: &[usize]) -> Terms {
    let mut t = Terms::new(lax.dim);
    for &k in species {
        for j in 0..lax.n_phys {
            let b = lax.block(k, j);
            t.push(one(), b.clone(), b.clone());
        }
    }
    t
}

fn check_species(lax: &LaxOp, k: usize) -> Result<()> {
    if k >= lax.n_phys {
        return Err(Error::InvalidParam(format!("species {k} out of range 0..{}", lax.n_phys)));
    }
    Ok(())
}

/// `V^{(k)} = Σ_j block(k,j) ⊗ conj(block(k,j))`; its vacuum contraction
/// is the occupation of species `k`.
pub fn vertex_site(lax: &LaxOp, k: usize) -> Result<VertexOp> {
    check_species(lax, k)?;
    Ok(site_terms(lax, &[k]).build(true))
}

pub fn vertex_site_reduced(lax: &LaxOp, k: usize) -> Result<VertexOp> {
    check_species(lax, k)?;
    Ok(site_terms(lax, &[k]).build(false))
}

/// `T = Σ_k V^{(k)}`.
pub fn transition(lax: &LaxOp) -> VertexOp {
    site_terms(lax, &(0..lax.n_phys).collect::<Vec<_>>()).build(true)
}

pub fn transition_reduced(lax: &LaxOp) -> VertexOp {
    site_terms(lax, &(0..lax.n_phys).collect::<Vec<_>>()).build(false)
}

fn current_terms(lax: &LaxOp, k: usize, l: usize) -> Result<Terms> {
    check_species(lax, k)?;
    check_species(lax, l)?;
    if k == l {
        return Err(Error::InvalidParam("current needs two distinct species".into()));
    }
    let mut t = Terms::new(lax.dim);
    let i_ = C64::i();
    for i in 0..lax.n_phys {
        for j in 0..lax.n_phys {
            let b = |a: usize, c: usize| lax.block(a, c);
            t.push(i_, b(l, i) * b(k, j), b(k, i) * b(l, j));
            t.push(-i_, b(k, i) * b(l, j), b(l, i) * b(k, j));
        }
    }
    Ok(t)
}

/// Two-site vertex of `j^{(k,l)} = i(E^{kl} ⊗ E^{lk} - E^{lk} ⊗ E^{kl})`.
pub fn current_vertex(lax: &LaxOp, k: usize, l: usize) -> Result<VertexOp> {
    Ok(current_terms(lax, k, l)?.build(true))
}

pub fn current_reduced(lax: &LaxOp, k: usize, l: usize) -> Result<VertexOp> {
    Ok(current_terms(lax, k, l)?.build(false))
}

/// `ρ_γ(s) = i sinc²γ [2i Im s]_q`.
pub fn rho_gamma(gamma: f64, s: C64) -> C64 {
    C64::i() * sinc(gamma).powi(2) * qnum(C64::new(0.0, 2.0 * s.im), gamma)
}

fn normalize(v: &mut [C64]) -> f64 {
    let n = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
    n
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn vacuum(d: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); d];
    v[0] = one();
    v
}

fn require_levels(dim: usize, n: usize) -> Result<()> {
    if dim < n + 2 {
        return Err(Error::Precondition(format!("auxiliary dim {dim} below n + 2 = {}", n + 2)));
    }
    Ok(())
}

/// Normalized powers `T^m |0>` (right) or `<0| T^m` (left), `m = 0..=n`.
/// Returns the vectors and `ln` of the accumulated scale factors.
pub struct Sweep {
    pub vecs: Vec<Vec<C64>>,
    pub log_scale: Vec<f64>,
}

pub fn sweep(t: &SparseMat, n: usize, left: bool) -> Sweep {
    let d = t.rows();
    let mut v = vacuum(d);
    let mut vecs = vec![v.clone()];
    let mut log_scale = vec![0.0];
    let mut acc = 0.0;
    for _ in 0..n {
        v = if left { t.vec_mul(&v) } else { t.mul_vec(&v) };
        acc += normalize(&mut v).ln();
        vecs.push(v.clone());
        log_scale.push(acc);
    }
    Sweep { vecs, log_scale }
}

/// `Z^{(n)} = <0,0| T^n |0,0>` from the reduced transition operator.
pub fn partition_fn(lax: &LaxOp, n: usize) -> Result<C64> {
    require_levels(lax.dim, n)?;
    let t = transition_reduced(lax);
    let s = sweep(t.reduced(), n, false);
    Ok(s.vecs[n][0] * s.log_scale[n].exp())
}

/// `ln Z^{(n)}` (principal branch), safe for long chains.
pub fn log_partition_fn(lax: &LaxOp, n: usize) -> Result<C64> {
    require_levels(lax.dim, n)?;
    let t = transition_reduced(lax);
    let s = sweep(t.reduced(), n, false);
    Ok(s.vecs[n][0].ln() + s.log_scale[n])
}

/// `<0,0| M^n |0,0>` with the full doubled matrix; a cross-check for the
/// reduced path.
pub fn vacuum_power_full(v: &VertexOp, n: usize) -> Result<C64> {
    let m = v.full()?;
    let mut x = vacuum(m.rows());
    for _ in 0..n {
        x = m.mul_vec(&x);
    }
    Ok(x[0])
}

/// `Z^{(n-1)} / Z^{(n)}`.
pub fn partition_ratio(lax: &LaxOp, n: usize) -> Result<C64> {
    if n == 0 {
        return Err(Error::InvalidParam("ratio needs n >= 1".into()));
    }
    require_levels(lax.dim, n)?;
    let t = transition_reduced(lax);
    let s = sweep(t.reduced(), n - 1, false);
    let w = &s.vecs[n - 1];
    Ok(w[0] / t.reduced().mul_vec(w)[0])
}

/// Spin-1/2 current `<j^{(0,1)}> = -ρ_γ(Im s) Z^{(n-1)}/Z^{(n)}`.
pub fn current_from_ratio(lax: &LaxOp, n: usize) -> Result<C64> {
    let s = lax.params.spin_s;
    Ok(-rho_gamma(lax.params.gamma, s) * partition_ratio(lax, n)?)
}

/// `<j^{(k,l)}>` on the bond `(bond, bond+1)`, zero-based, from the reduced
/// current vertex.
pub fn current_at_bond(lax: &LaxOp, n: usize, bond: usize, k: usize, l: usize) -> Result<C64> {
    if n < 2 || bond + 1 >= n {
        return Err(Error::InvalidParam(format!("bond {bond} outside a chain of {n} sites")));
    }
    require_levels(lax.dim, n)?;
    let t = transition_reduced(lax);
    let j = current_reduced(lax, k, l)?;
    let left = sweep(t.reduced(), bond, true);
    let right = sweep(t.reduced(), n - bond - 2, false);
    let lv = &left.vecs[bond];
    let rv = &right.vecs[n - bond - 2];
    let num = dot(lv, &j.reduced().mul_vec(rv));
    let den = dot(&t.reduced().vec_mul(lv), &t.reduced().mul_vec(rv));
    Ok(num / den)
}

/// `<E^{kk}_j>` for every site `j` and species `k`.
pub fn density_profile(lax: &LaxOp, n: usize) -> Result<Vec<Vec<C64>>> {
    if n == 0 {
        return Err(Error::InvalidParam("chain needs at least one site".into()));
    }
    require_levels(lax.dim, n)?;
    let t = transition_reduced(lax);
    let vs: Vec<VertexOp> = (0..lax.n_phys)
        .map(|k| vertex_site_reduced(lax, k))
        .collect::<Result<_>>()?;
    let left = sweep(t.reduced(), n - 1, true);
    let right = sweep(t.reduced(), n - 1, false);
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let lv = &left.vecs[j];
        let rv = &right.vecs[n - 1 - j];
        let z = dot(lv, &t.reduced().mul_vec(rv));
        out.push(vs.iter().map(|v| dot(lv, &v.reduced().mul_vec(rv)) / z).collect());
    }
    Ok(out)
}

/// `<σ^z_j> = <E^{00}_j> - <E^{11}_j>` for spin-1/2 chains.
pub fn magnetization_profile(lax: &LaxOp, n: usize) -> Result<Vec<f64>> {
    if lax.n_phys != 2 {
        return Err(Error::InvalidParam("magnetization profile needs N = 2".into()));
    }
    Ok(density_profile(lax, n)?.iter().map(|p| (p[0] - p[1]).re).collect())
}

/// Coefficients `(κ⁰, κ¹)` of the cubic relation for `s = iσ`.
pub fn cubic_kappas(gamma: f64, s: C64) -> (C64, C64) {
    let sc2 = sinc(gamma).powi(2);
    let k0 = qnum(C64::new(0.0, s.im), gamma).powi(2) * (8.0 * sc2 * sc2 * (2.0 * gamma).cos() * (2.0 * gamma * s.im).cosh());
    let k1 = C64::new(-2.0 * sc2 * (2.0 * gamma).cos(), 0.0);
    (k0, k1)
}

/// `max |[T,[T,V]] - κ⁰ V - κ¹{T,V}|` on levels `<= dim - 3`, with
/// `V = V^{(0)} - V^{(1)}` reduced. No domain check.
pub fn cubic_relation_residual_unchecked(lax: &LaxOp) -> Result<f64> {
    if lax.n_phys != 2 {
        return Err(Error::InvalidParam("cubic relation is stated for N = 2".into()));
    }
    let t = transition_reduced(lax);
    let v = vertex_site_reduced(lax, 0)?.add(&vertex_site_reduced(lax, 1)?, C64::new(-1.0, 0.0));
    let (t, v) = (t.reduced(), v.reduced());
    let (k0, k1) = cubic_kappas(lax.params.gamma, lax.params.spin_s);
    let tv = t * v;
    let vt = v * t;
    let c1 = &tv - &vt;
    let c2 = &(t * &c1) - &(&c1 * t);
    let anti = &tv + &vt;
    let res = c2.add_scaled(v, -k0).add_scaled(&anti, -k1);
    Ok(res.leading(lax.dim.saturating_sub(2)).max_abs())
}

/// Checked version: requires `λ = 0` and `Re s = 0`.
pub fn cubic_relation_residual(lax: &LaxOp) -> Result<f64> {
    if lax.params.lambda.norm() > 1e-14 {
        return Err(Error::Precondition("cubic relation needs λ = 0".into()));
    }
    if lax.params.spin_s.re.abs() > 1e-14 {
        return Err(Error::Precondition("cubic relation needs Re s = 0".into()));
    }
    cubic_relation_residual_unchecked(lax)
}

/// Fits `A |0> = c B |0>` (or the left analogue) and returns `(c, residual)`.
pub fn vacuum_proportionality(a: &SparseMat, b: &SparseMat, left: bool) -> (C64, f64) {
    let v = vacuum(a.rows());
    let (x, y) = if left { (a.vec_mul(&v), b.vec_mul(&v)) } else { (a.mul_vec(&v), b.mul_vec(&v)) };
    let k = (0..y.len())
        .max_by(|&i, &j| y[i].norm().total_cmp(&y[j].norm()))
        .unwrap_or(0);
    let c = if y[k].norm() > 0.0 { x[k] / y[k] } else { C64::new(0.0, 0.0) };
    let res = x.iter().zip(&y).map(|(p, q)| (p - c * q).norm()).fold(0.0, f64::max);
    (c, res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lax::lax_xxz;
    use crate::mpo::solve_spin_param;
    use crate::qalgebra::{verma_sl2, QParams};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn xxz(g: f64, s: C64, lam: C64, d: usize) -> LaxOp {
        let p = QParams::new(g).with_lambda(lam);
        lax_xxz(&verma_sl2(s, &p, d).unwrap(), &p).unwrap()
    }

    #[test]
    fn transition_is_sum_of_site_vertices() {
        let l = xxz(0.4, c(0.2, 1.1), c(0.0, 0.1), 5);
        let t = transition(&l);
        let s = vertex_site(&l, 0).unwrap().add(&vertex_site(&l, 1).unwrap(), one());
        assert_eq!(t.matrix, s.matrix);
        assert!(t.compression_defect().unwrap() < 1e-15);
    }

    #[test]
    fn spin_half_vertices_by_hand() {
        // s = 1/2, γ = 0, λ = 0: blocks diag(-1/2, 1/2), S^-, S^+, diag(1/2, -1/2)
        let l = xxz(0.0, c(0.5, 0.0), c(0.0, 0.0), 2);
        let v0 = vertex_site(&l, 0).unwrap().matrix.unwrap().to_dense();
        // |0,0>,|0,1>,|1,0>,|1,1>
        assert!((v0[(0, 0)] - 0.25).norm() < 1e-15);
        assert!((v0[(3, 3)] - 0.25).norm() < 1e-15);
        assert!((v0[(1, 1)] + 0.25).norm() < 1e-15);
        assert!((v0[(0, 3)] - 1.0).norm() < 1e-15);
        assert!(v0[(3, 0)].norm() < 1e-15);
    }

    #[test]
    fn empty_power_is_one() {
        let l = xxz(0.3, c(0.0, 2.0), c(0.0, 0.0), 4);
        assert_eq!(partition_fn(&l, 0).unwrap(), one());
    }

    #[test]
    fn current_antisymmetry() {
        let l = xxz(0.5, c(0.1, 0.8), c(0.0, 0.0), 4);
        let a = current_vertex(&l, 0, 1).unwrap();
        let b = current_vertex(&l, 1, 0).unwrap();
        let sum = a.add(&b, one());
        assert!(sum.matrix.unwrap().max_abs() < 1e-14);
        assert!(current_vertex(&l, 1, 1).is_err());
    }

    #[test]
    fn reduced_transition_closed_form() {
        // sinc^-2 T̂ = |[u+k-s]|² + |[u-k+s]|² on the diagonal,
        // [k+1]² above and |[2s-k]|² below, at real γ
        let g = 0.7;
        let s = c(0.3, 1.2);
        let lam = c(0.0, 0.2);
        let l = xxz(g, s, lam, 6);
        let t = transition_reduced(&l);
        let r = t.reduced();
        let u = -C64::i() * lam;
        let sc2 = sinc(g).powi(2);
        for k in 0..6 {
            let kk = c(k as f64, 0.0);
            let want = (qnum(u + kk - s, g).norm_sqr() + qnum(u - kk + s, g).norm_sqr()) * sc2;
            assert!((r.get(k, k) - want).norm() < 1e-12 * want.max(1.0));
            if k + 1 < 6 {
                let up = qnum(kk + 1.0, g).norm_sqr() * sc2;
                assert!((r.get(k, k + 1) - up).norm() < 1e-12 * up.max(1.0));
                let down = qnum(s * 2.0 - kk, g).norm_sqr() * sc2;
                assert!((r.get(k + 1, k) - down).norm() < 1e-12 * down.max(1.0));
            }
        }
    }

    #[test]
    fn undeformed_kappas() {
        let (k0, k1) = cubic_kappas(1e-10, c(0.0, 0.7));
        assert!((k0 + 8.0 * 0.49).norm() < 1e-12);
        assert!((k1 + 2.0).norm() < 1e-12);
    }

    #[test]
    fn cubic_domain_is_enforced() {
        let l = xxz(0.0, c(0.0, 0.7), c(0.2, 0.0), 6);
        assert!(cubic_relation_residual(&l).is_err());
        assert!(cubic_relation_residual_unchecked(&l).unwrap() > 1e-3);
    }

    #[test]
    fn profile_is_normalized() {
        let g = 0.3;
        let s = solve_spin_param(g, 1.0).unwrap();
        let l = xxz(g, s, c(0.0, 0.0), 10);
        for p in density_profile(&l, 8).unwrap() {
            assert!((p[0] + p[1] - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn long_chains_stay_finite() {
        let l = xxz(0.0, c(0.0, 4.0), c(0.0, 0.0), 258);
        let j = current_from_ratio(&l, 256).unwrap();
        assert!(j.re.is_finite() && j.re.abs() > 0.0);
        assert!(log_partition_fn(&l, 256).unwrap().re.is_finite());
    }
}
