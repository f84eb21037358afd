//! R-matrices, Lax and boundary operators, local Hamiltonians, FRT objects
//! and the Θ-twist.
//!
//! Physical index 0 is spin up, so `σ^+ = E^{01}` and `σ^z = diag(1, -1)`.
//! A `LaxOp` stores the auxiliary operator multiplying each `E^{ij}`.
//! Two-site operators use the index `N·a + b` for `|a, b>`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qalgebra::{qfactorial, qnum, sinc, sparse_json, AuxRep, GlnRep, QParams};
use crate::sparse::SparseMat;
use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct LaxOp {
    pub n_phys: usize,
    pub dim: usize,
    blocks: Vec<SparseMat>,
    pub params: QParams,
    /// Diagonal of `S^z` for sl2-based operators; needed by the twist.
    pub sz_diag: Option<Vec<C64>>,
}

impl LaxOp {
    pub fn new(n_phys: usize, blocks: Vec<SparseMat>, params: QParams) -> Result<Self> {
        if blocks.len() != n_phys * n_phys {
            return Err(Error::DimMismatch(format!("{} blocks for N = {n_phys}", blocks.len())));
        }
        let dim = blocks[0].rows();
        if blocks.iter().any(|b| b.shape() != (dim, dim)) {
            return Err(Error::DimMismatch("blocks differ in auxiliary dimension".into()));
        }
        Ok(Self {
            n_phys,
            dim,
            blocks,
            params,
            sz_diag: None,
        })
    }

    pub fn block(&self, i: usize, j: usize) -> &SparseMat {
        &self.blocks[i * self.n_phys + j]
    }

    pub fn blocks(&self) -> &[SparseMat] {
        &self.blocks
    }

    pub fn map_blocks<F: Fn(usize, usize, &SparseMat) -> SparseMat>(&self, f: F) -> Self {
        let n = self.n_phys;
        let blocks = (0..n * n).map(|k| f(k / n, k % n, &self.blocks[k])).collect();
        Self { blocks, ..self.clone() }
    }

    /// `Σ E^{ij} ⊗ block(i,j)` on `C^N ⊗ aux`.
    pub fn full(&self) -> SparseMat {
        let n = self.n_phys;
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for (a, b, v) in self.block(i, j).triplets() {
                    t.push((i * self.dim + a, j * self.dim + b, v));
                }
            }
        }
        SparseMat::from_triplets(n * self.dim, n * self.dim, t)
    }

    /// The operator acting on site `which` (0 or 1) of `C^N ⊗ C^N ⊗ aux`.
    pub fn on_pair(&self, which: usize) -> SparseMat {
        let n = self.n_phys;
        let d = self.dim;
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for (a, b, v) in self.block(i, j).triplets() {
                    for o in 0..n {
                        let (r, c) = if which == 0 { (i * n + o, j * n + o) } else { (o * n + i, o * n + j) };
                        t.push((r * d + a, c * d + b, v));
                    }
                }
            }
        }
        SparseMat::from_triplets(n * n * d, n * n * d, t)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut m = serde_json::Map::new();
        for i in 0..self.n_phys {
            for j in 0..self.n_phys {
                m.insert(format!("{i},{j}"), sparse_json(self.block(i, j)));
            }
        }
        serde_json::json!({ "N": self.n_phys, "dim": self.dim, "blocks": m })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Xxz { gamma: f64 },
    Sun { n: usize },
    /// `zz_scale` multiplies `cos γ`; 1 is the main-text normalization.
    ThetaXxz { gamma: f64, theta: f64, zz_scale: f64 },
}

impl Model {
    pub fn n_phys(&self) -> usize {
        match *self {
            Model::Sun { n } => n,
            _ => 2,
        }
    }

    /// Bond term of the chain Hamiltonian. For SU(N) this is `2P`, the
    /// normalization in which N = 2 coincides with the XXX chain up to a
    /// constant.
    pub fn bond(&self) -> HamiltonianDensity {
        let h = h_density(*self);
        match self {
            Model::Sun { .. } => HamiltonianDensity {
                matrix: h.matrix * C64::new(2.0, 0.0),
                ..h
            },
            _ => h,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianDensity {
    pub n_phys: usize,
    pub matrix: DMatrix<C64>,
    pub hermitian: bool,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn diag_map(d: &[C64], f: impl Fn(C64) -> C64) -> SparseMat {
    SparseMat::from_diag(&d.iter().map(|&z| f(z)).collect::<Vec<_>>())
}

pub fn permutation(n: usize) -> DMatrix<C64> {
    let mut p = DMatrix::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            p[(a * n + b, b * n + a)] = c(1.0, 0.0);
        }
    }
    p
}

fn xxz_density(hop_plus: C64, hop_minus: C64, zz: f64) -> DMatrix<C64> {
    // basis |uu>, |ud>, |du>, |dd>
    let mut h = DMatrix::zeros(4, 4);
    h[(0, 0)] = c(zz, 0.0);
    h[(3, 3)] = c(zz, 0.0);
    h[(1, 1)] = c(-zz, 0.0);
    h[(2, 2)] = c(-zz, 0.0);
    // σ⁺σ⁻ maps |du> to |ud>
    h[(1, 2)] = hop_plus * 2.0;
    h[(2, 1)] = hop_minus * 2.0;
    h
}

pub fn h_density(model: Model) -> HamiltonianDensity {
    let matrix = match model {
        Model::Xxz { gamma } => xxz_density(c(1.0, 0.0), c(1.0, 0.0), gamma.cos()),
        Model::Sun { n } => permutation(n),
        Model::ThetaXxz { gamma, theta, zz_scale } => xxz_density(
            C64::from_polar(1.0, theta),
            C64::from_polar(1.0, -theta),
            zz_scale * gamma.cos(),
        ),
    };
    let hermitian = crate::sparse::dense_max_abs(&(&matrix - matrix.adjoint())) <= 1e-14;
    HamiltonianDensity {
        n_phys: model.n_phys(),
        matrix,
        hermitian,
    }
}

fn six_vertex(lambda: C64, gamma: f64, cplus: C64, cminus: C64) -> DMatrix<C64> {
    let q = C64::from_polar(1.0, gamma);
    let f = q - 1.0 / q;
    let u = -C64::i() * lambda;
    let a = f * qnum(u + 1.0, gamma);
    let b = f * qnum(u, gamma);
    let mut r = DMatrix::zeros(4, 4);
    r[(0, 0)] = a;
    r[(3, 3)] = a;
    r[(1, 1)] = b;
    r[(2, 2)] = b;
    r[(1, 2)] = f * cplus;
    r[(2, 1)] = f * cminus;
    r
}

/// Trigonometric 6-vertex R-matrix in the gauge carrying `e^{±γλ}` on the
/// off-diagonal weights. Intertwines `lax_xxz_baxterized`.
pub fn r6v(lambda: C64, params: &QParams) -> DMatrix<C64> {
    let g = params.gamma;
    six_vertex(lambda, g, (lambda * g).exp(), (-lambda * g).exp())
}

/// Symmetric-gauge 6-vertex R-matrix. Intertwines `lax_xxz`.
pub fn r6v_symmetric(lambda: C64, params: &QParams) -> DMatrix<C64> {
    six_vertex(lambda, params.gamma, c(1.0, 0.0), c(1.0, 0.0))
}

/// `sinc γ · [[ [u+S^z]_q, S^- ], [ S^+, [u-S^z]_q ]]`, `u = -iλ`.
pub fn lax_xxz(rep: &AuxRep, params: &QParams) -> Result<LaxOp> {
    rep.require_sl2()?;
    let g = params.gamma;
    let sc = c(sinc(g), 0.0);
    let u = params.u();
    let sz = rep.sz_diag()?;
    let blocks = vec![
        diag_map(&sz, |z| qnum(u + z, g) * sc),
        rep.generator("S-")?.scale(sc),
        rep.generator("S+")?.scale(sc),
        diag_map(&sz, |z| qnum(u - z, g) * sc),
    ];
    let mut l = LaxOp::new(2, blocks, params.clone().with_spin(rep.spin_s))?;
    l.sz_diag = Some(sz);
    Ok(l)
}

/// `lax_xxz` with the spectral gauge `e^{γλ} S^-`, `e^{-γλ} S^+`.
pub fn lax_xxz_baxterized(rep: &AuxRep, params: &QParams) -> Result<LaxOp> {
    let l = lax_xxz(rep, params)?;
    let e = (params.lambda * params.gamma).exp();
    Ok(l.map_blocks(|i, j, b| match (i, j) {
        (0, 1) => b.scale(e),
        (1, 0) => b.scale(1.0 / e),
        _ => b.clone(),
    }))
}

fn boundary_from(rep: &AuxRep, params: &QParams, sign_lower: f64) -> Result<LaxOp> {
    rep.require_sl2()?;
    let g = params.gamma;
    let pre = c(-2.0 * sinc(g), 0.0);
    let u = params.u();
    let sz = rep.sz_diag()?;
    let d = rep.dim;
    let blocks = vec![
        diag_map(&sz, |z| ((u + z) * g).cos() * pre),
        SparseMat::zeros(d, d),
        SparseMat::zeros(d, d),
        diag_map(&sz, |z| ((u + z * sign_lower) * g).cos() * pre),
    ];
    let mut b = LaxOp::new(2, blocks, params.clone().with_spin(rep.spin_s))?;
    b.sz_diag = Some(sz);
    Ok(b)
}

/// Boundary operator `-2 sinc γ · diag(cos γ(u + S^z), cos γ(u - S^z))`,
/// the partner of `lax_xxz` in the divergence condition.
pub fn boundary_xxz(rep: &AuxRep, params: &QParams) -> Result<LaxOp> {
    boundary_from(rep, params, -1.0)
}

/// Variant with `+S^z` in both diagonal entries. It agrees with
/// `boundary_xxz` only at `λ = 0`; kept as a reference point.
pub fn boundary_xxz_same_sign(rep: &AuxRep, params: &QParams) -> Result<LaxOp> {
    boundary_from(rep, params, 1.0)
}

/// `blocks(i,j) = u δ_ij + E^{ji}`.
pub fn lax_gln(rep: &GlnRep, params: &QParams) -> Result<LaxOp> {
    if !params.weights.is_empty() && params.weights.len() != rep.n_phys {
        return Err(Error::DimMismatch(format!(
            "{} weights for N = {}",
            params.weights.len(),
            rep.n_phys
        )));
    }
    let n = rep.n_phys;
    let u = params.u();
    let id = SparseMat::identity(rep.dim);
    let mut blocks = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let e = rep.element(j, i);
            blocks.push(if i == j { e.add_scaled(&id, u) } else { e.clone() });
        }
    }
    LaxOp::new(n, blocks, params.clone().with_weights(rep.weights.clone()))
}

/// `-2 · identity` on the diagonal blocks.
pub fn boundary_gln(n: usize, dim: usize, params: &QParams) -> LaxOp {
    let m2 = SparseMat::identity(dim).scale(c(-2.0, 0.0));
    let blocks = (0..n * n)
        .map(|k| if k / n == k % n { m2.clone() } else { SparseMat::zeros(dim, dim) })
        .collect();
    LaxOp::new(n, blocks, params.clone()).expect("consistent blocks")
}

/// Twist by `e^{iΘ(S^z ∓ 1/2)}` factors. Applies to Lax and boundary
/// operators alike.
pub fn theta_twist(lax: &LaxOp, theta: f64) -> Result<LaxOp> {
    if lax.n_phys != 2 {
        return Err(Error::InvalidParam(format!("twist needs N = 2, got {}", lax.n_phys)));
    }
    let sz = lax
        .sz_diag
        .as_ref()
        .ok_or_else(|| Error::MissingGenerator("Sz".into()))?;
    let phase = |shift: f64| diag_map(sz, |z| (C64::i() * theta * (z + shift)).exp());
    let minus = phase(-0.5);
    let plus = phase(0.5);
    Ok(lax.map_blocks(|i, j, b| match (i, j) {
        (0, 0) => b * &minus,
        (0, 1) => &plus * b,
        _ => b * &plus,
    }))
}

#[derive(Clone, Debug)]
pub struct FrtObjects {
    pub l_plus: LaxOp,
    pub l_minus: LaxOp,
    pub r_plus: DMatrix<C64>,
    pub r_minus: DMatrix<C64>,
}

/// Borel L-operators and the constant R-matrices of the FRT presentation.
pub fn frt_objects(params: &QParams, rep: &AuxRep) -> Result<FrtObjects> {
    rep.require_sl2()?;
    let q = params.q();
    let f = q - 1.0 / q;
    let d = rep.dim;
    let z = SparseMat::zeros(d, d);
    let kp = rep.generator("K+")?.clone();
    let km = rep.generator("K-")?.clone();
    let l_plus = LaxOp::new(2, vec![kp.clone(), rep.generator("S-")?.scale(f), z.clone(), km.clone()], params.clone())?;
    let l_minus = LaxOp::new(2, vec![km, z, rep.generator("S+")?.scale(-f), kp], params.clone())?;
    let mut r_plus = DMatrix::zeros(4, 4);
    r_plus[(0, 0)] = q;
    r_plus[(1, 1)] = c(1.0, 0.0);
    r_plus[(1, 2)] = f;
    r_plus[(2, 2)] = c(1.0, 0.0);
    r_plus[(3, 3)] = q;
    let p = permutation(2);
    let inv = r_plus.clone().try_inverse().ok_or_else(|| Error::Conditioning("R+ singular".into()))?;
    let r_minus = &p * inv * &p;
    Ok(FrtObjects {
        l_plus,
        l_minus,
        r_plus,
        r_minus,
    })
}

/// Universal R evaluated on `repA ⊗ repB`, series truncated after `order`.
pub fn universal_r_eval(params: &QParams, rep_a: &AuxRep, rep_b: &AuxRep, order: usize) -> Result<DMatrix<C64>> {
    if order < 1 {
        return Err(Error::InvalidParam("series order must be >= 1".into()));
    }
    rep_a.require_sl2()?;
    rep_b.require_sl2()?;
    let g = params.gamma;
    let lq = C64::i() * g;
    let qpow = |x: C64| (lq * x).exp();
    let za = rep_a.sz_diag()?;
    let zb = rep_b.sz_diag()?;
    let x = rep_a.generator("S+")?.to_dense();
    let y = rep_b.generator("S-")?.to_dense();
    let ka = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(za.len(), za.iter().map(|&z| qpow(z))));
    let kb = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(zb.len(), zb.iter().map(|&z| qpow(-z))));
    let step = (ka * x).kronecker(&(kb * y));
    let dim = za.len() * zb.len();
    let mut sum = DMatrix::<C64>::zeros(dim, dim);
    let mut power = DMatrix::<C64>::identity(dim, dim);
    let base = c(1.0, 0.0) - qpow(c(-2.0, 0.0));
    for k in 0..=order {
        let kf = k as f64;
        let coef = base.powf(kf) / qfactorial(k, g) * qpow(c(kf * (kf - 1.0) / 2.0, 0.0));
        sum += &power * coef;
        power = &power * &step;
    }
    let cartan = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        dim,
        za.iter().flat_map(|&a| zb.iter().map(move |&b| (lq * 2.0 * a * b).exp())),
    ));
    Ok(cartan * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qalgebra::verma_sl2;
    use crate::sparse::dense_max_abs;
    use std::f64::consts::PI;

    #[test]
    fn r6v_shift_point_is_permutation() {
        for g in [0.3, PI / 4.0, 1.1] {
            let p = QParams::new(g);
            let q = p.q();
            let diff = r6v(c(0.0, 0.0), &p) - permutation(2) * (q - 1.0 / q);
            assert!(dense_max_abs(&diff) < 1e-14);
        }
    }

    #[test]
    fn r6v_rational_limit() {
        // rescaled by 1/(γ·2i) the weights tend to u + 1, u, 1
        let g = 1e-6;
        let lam = c(0.4, 0.1);
        let r = r6v(lam, &QParams::new(g)) / C64::new(0.0, 2.0 * g.sin());
        let u = -C64::i() * lam;
        let want = DMatrix::<C64>::identity(4, 4) * u + permutation(2);
        assert!(dense_max_abs(&(r - want)) < 1e-5);
    }

    #[test]
    fn undeformed_lax_is_xxx() {
        let p = QParams::new(0.0).with_lambda(c(0.3, -0.2));
        let s = c(0.1, 2.0);
        let rep = verma_sl2(s, &p, 5).unwrap();
        let l = lax_xxz(&rep, &p).unwrap();
        let u = p.u();
        for k in 0..5 {
            let z = c(k as f64, 0.0) - s;
            assert!((l.block(0, 0).get(k, k) - (u + z)).norm() < 1e-14);
            assert!((l.block(1, 1).get(k, k) - (u - z)).norm() < 1e-14);
        }
        assert_eq!(l.block(0, 1), rep.generator("S-").unwrap());
        let b = boundary_xxz(&rep, &p).unwrap();
        for k in 0..5 {
            assert!((b.block(0, 0).get(k, k) + 2.0).norm() < 1e-12);
            assert!((b.block(1, 1).get(k, k) + 2.0).norm() < 1e-12);
        }
    }

    #[test]
    fn vacuum_actions() {
        let g = 0.7;
        let s = c(0.0, 1.3);
        let p = QParams::new(g).with_lambda(c(0.25, 0.0));
        let rep = verma_sl2(s, &p, 4).unwrap();
        let l = lax_xxz(&rep, &p).unwrap();
        let u = p.u();
        assert!((l.block(1, 1).get(0, 0) - qnum(u + s, g) * sinc(g)).norm() < 1e-14);
        assert!((l.block(1, 0).get(1, 0) - qnum(s * 2.0, g) * sinc(g)).norm() < 1e-14);
        let b = boundary_xxz(&rep, &p).unwrap();
        let want = ((u + s) * g).cos() * (-2.0 * sinc(g));
        assert!((b.block(1, 1).get(0, 0) - want).norm() < 1e-14);
    }

    #[test]
    fn boundary_explicit_entries() {
        let g = PI / 4.0;
        let s = c(0.0, 4.0);
        let p = QParams::new(g);
        let b = boundary_xxz(&verma_sl2(s, &p, 3).unwrap(), &p).unwrap();
        for k in 0..3 {
            let z = c(k as f64, 0.0) - s;
            let up = (z * g).cos() * (-2.0 * g.sin() / g);
            assert!((b.block(0, 0).get(k, k) - up).norm() < 1e-12 * up.norm());
            // cos is even, so at λ = 0 both entries agree
            assert!((b.block(1, 1).get(k, k) - up).norm() < 1e-12 * up.norm());
        }
    }

    #[test]
    fn spin_half_lax_is_r_matrix() {
        // reversing the two-level aux basis maps level 0 to spin down
        let g = PI / 3.0;
        let p = QParams::new(g).with_lambda(c(0.35, 0.1));
        let l = lax_xxz(&verma_sl2(c(0.5, 0.0), &p, 2).unwrap(), &p).unwrap();
        let mut m = DMatrix::<C64>::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        m[(2 * i + 1 - a, 2 * j + 1 - b)] = l.block(i, j).get(a, b);
                    }
                }
            }
        }
        let q = p.q();
        let r = r6v_symmetric(p.lambda - c(0.0, 0.5), &p) * (c(sinc(g), 0.0) / (q - 1.0 / q));
        assert!(dense_max_abs(&(m - r)) < 1e-14);
    }

    #[test]
    fn densities() {
        let h = h_density(Model::Xxz { gamma: PI / 2.0 });
        assert!(h.matrix[(0, 0)].norm() < 1e-15 && h.hermitian);
        let p = h_density(Model::Sun { n: 2 });
        let xxx = h_density(Model::Xxz { gamma: 0.0 });
        let diff = &xxx.matrix + DMatrix::<C64>::identity(4, 4) - &p.matrix * c(2.0, 0.0);
        assert!(dense_max_abs(&diff) < 1e-15);
        let t = h_density(Model::ThetaXxz { gamma: 0.4, theta: 0.0, zz_scale: 1.0 });
        assert!(t.hermitian);
        assert!(dense_max_abs(&(t.matrix - h_density(Model::Xxz { gamma: 0.4 }).matrix)) < 1e-15);
        // the Θ phases are conjugate to each other, so the density stays hermitian
        assert!(h_density(Model::ThetaXxz { gamma: 0.4, theta: 0.5, zz_scale: 1.0 }).hermitian);
    }

    #[test]
    fn twist_phases() {
        let p = QParams::new(0.5);
        let rep = verma_sl2(c(0.0, 4.0), &p, 4).unwrap();
        let l = lax_xxz(&rep, &p).unwrap();
        assert_eq!(theta_twist(&l, 0.0).unwrap(), l);
        let t = theta_twist(&l, PI).unwrap();
        let sz = rep.sz_diag().unwrap();
        for k in 0..3 {
            let ph = (C64::i() * PI * (sz[k] + 0.5)).exp();
            assert!((t.block(1, 0).get(k + 1, k) - l.block(1, 0).get(k + 1, k) * ph).norm() < 1e-12);
        }
    }

    #[test]
    fn frt_r_matrices() {
        let p = QParams::new(0.6);
        let rep = verma_sl2(c(0.2, 0.9), &p, 4).unwrap();
        let f = frt_objects(&p, &rep).unwrap();
        let q = p.q();
        assert_eq!(f.r_plus[(0, 0)], q);
        assert_eq!(f.r_plus[(1, 2)], q - 1.0 / q);
        let prod = &f.r_minus * permutation(2) * &f.r_plus * permutation(2);
        assert!(dense_max_abs(&(prod - DMatrix::identity(4, 4))) < 1e-14);
    }

    #[test]
    fn universal_r_fundamental() {
        let g = 0.45;
        let p = QParams::new(g);
        let f = verma_sl2(c(0.5, 0.0), &p, 2).unwrap();
        let r = universal_r_eval(&p, &f, &f, 3).unwrap();
        let q = p.q();
        let mut want = DMatrix::<C64>::zeros(4, 4);
        want[(0, 0)] = q;
        want[(1, 1)] = c(1.0, 0.0);
        want[(2, 2)] = c(1.0, 0.0);
        want[(3, 3)] = q;
        want[(2, 1)] = q - 1.0 / q;
        let want = want * q.powf(-0.5);
        assert!(dense_max_abs(&(r - want)) < 1e-14);
    }

    #[test]
    fn universal_r_order_saturates() {
        let p = QParams::new(0.3);
        let rep = verma_sl2(c(0.0, 4.0), &p, 4).unwrap();
        let a = universal_r_eval(&p, &rep, &rep, 4).unwrap();
        let b = universal_r_eval(&p, &rep, &rep, 9).unwrap();
        assert!(dense_max_abs(&(a - b)) < 1e-12);
    }
}
