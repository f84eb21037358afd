//! Brute-force Lindblad oracle.
//!
//! Superoperators use column stacking: `ρ_{ij}` sits at index `i + D j`.
//! The fixed point is found by SVD, block by block: the sparsity graph of the
//! generator splits the `D²` operator basis into invariant components (for
//! the driven chains these are the sectors of fixed ket-minus-bra charge),
//! and each component is decomposed separately.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lax::{HamiltonianDensity, Model};
use crate::mpo::{gln_weights, DenseOperator, DENSE_LIMIT};
use crate::sparse::{dense_max_abs, SparseMat};
use crate::C64;

/// Default bound on the superoperator dimension `N^{2n}`.
pub const ORACLE_LIMIT: usize = 8192;
/// Singular values below this count as stationary.
pub const NULL_TOL: f64 = 1e-10;

/// Hermitian positive rate matrix indexed by Weyl pairs `(ij) -> N i + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct RateMatrix {
    pub n_phys: usize,
    pub matrix: DMatrix<C64>,
}

impl RateMatrix {
    pub fn new(n_phys: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let m = n_phys * n_phys;
        if matrix.shape() != (m, m) {
            return Err(Error::DimMismatch(format!("rate matrix {:?} for N = {n_phys}", matrix.shape())));
        }
        if dense_max_abs(&(&matrix - matrix.adjoint())) > 1e-12 {
            return Err(Error::InvalidParam("rate matrix is not hermitian".into()));
        }
        let r = Self { n_phys, matrix };
        if r.min_eigenvalue() < -1e-12 {
            return Err(Error::InvalidParam("rate matrix is not positive semidefinite".into()));
        }
        Ok(r)
    }

    pub fn zero(n_phys: usize) -> Self {
        let m = n_phys * n_phys;
        Self {
            n_phys,
            matrix: DMatrix::zeros(m, m),
        }
    }

    /// `G = Σ vec(A) vec(A)†` for jump operators `A = Σ a_{ij} E^{ij}`.
    pub fn from_jumps(n_phys: usize, jumps: &[DMatrix<C64>]) -> Self {
        let m = n_phys * n_phys;
        let mut g = DMatrix::zeros(m, m);
        for a in jumps {
            for p in 0..m {
                for q in 0..m {
                    g[(p, q)] += a[(p / n_phys, p % n_phys)] * a[(q / n_phys, q % n_phys)].conj();
                }
            }
        }
        Self { n_phys, matrix: g }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Canonical jump operators from the eigendecomposition of `G`.
    pub fn jump_operators(&self) -> Vec<DMatrix<C64>> {
        let n = self.n_phys;
        let eig = self.matrix.clone().symmetric_eigen();
        let top = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max);
        let mut out = Vec::new();
        for (k, &ev) in eig.eigenvalues.iter().enumerate() {
            if ev <= 1e-14 * top.max(1e-300) || ev <= 0.0 {
                continue;
            }
            let v = eig.eigenvectors.column(k);
            out.push(DMatrix::from_fn(n, n, |i, j| v[i * n + j] * ev.sqrt()));
        }
        out
    }
}

fn unit_op(n: usize, i: usize, j: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(n, n);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

#[derive(Clone, Debug, PartialEq)]
pub struct DrivingSpec {
    pub left: RateMatrix,
    pub right: RateMatrix,
    pub couplings: (f64, f64),
}

impl DrivingSpec {
    /// Single channel `√Γ σ^+` on the first site and `√Γ σ^-` on the last.
    pub fn maximal_xxz(coupling: f64) -> Self {
        Self {
            left: RateMatrix::from_jumps(2, &[unit_op(2, 0, 1)]),
            right: RateMatrix::from_jumps(2, &[unit_op(2, 1, 0)]),
            couplings: (coupling, coupling),
        }
    }

    /// `E^{kN}` channels on the left and `E^{Nk}` on the right, `k < N`,
    /// with `Γ_L = Γ`, `Γ_R = (N-1)² Γ`.
    pub fn sun_max(n: usize, coupling: f64) -> Result<Self> {
        let w = gln_weights(n, coupling)?;
        let left: Vec<_> = (0..n - 1).map(|k| unit_op(n, k, n - 1)).collect();
        let right: Vec<_> = (0..n - 1).map(|k| unit_op(n, n - 1, k)).collect();
        Ok(Self {
            left: RateMatrix::from_jumps(n, &left),
            right: RateMatrix::from_jumps(n, &right),
            couplings: (w.gamma_left, w.gamma_right),
        })
    }

    pub fn undriven(n_phys: usize) -> Self {
        Self {
            left: RateMatrix::zero(n_phys),
            right: RateMatrix::zero(n_phys),
            couplings: (0.0, 0.0),
        }
    }

    pub fn preset(name: &str, n_phys: usize, coupling: f64) -> Result<Self> {
        match (name, n_phys) {
            ("maxpol", 2) => Ok(Self::maximal_xxz(coupling)),
            ("sun-max", n) => Self::sun_max(n, coupling),
            _ => Err(Error::InvalidParam(format!("unknown driving preset `{name}` for N = {n_phys}"))),
        }
    }

    /// Scaled single-site jump operators `(site_is_left, A)`.
    pub fn jumps(&self) -> Vec<(bool, DMatrix<C64>)> {
        let mut out = Vec::new();
        for (left, rm, g) in [(true, &self.left, self.couplings.0), (false, &self.right, self.couplings.1)] {
            if g == 0.0 {
                continue;
            }
            for a in rm.jump_operators() {
                out.push((left, a * C64::new(g.sqrt(), 0.0)));
            }
        }
        out
    }
}

/// `1^{⊗site} ⊗ op ⊗ 1^{⊗rest}` where `op` spans `span` sites.
pub fn embed(op: &SparseMat, n_phys: usize, site: usize, span: usize, n_sites: usize) -> SparseMat {
    let pre = SparseMat::identity(n_phys.pow(site as u32));
    let post = SparseMat::identity(n_phys.pow((n_sites - site - span) as u32));
    pre.kron(op).kron(&post)
}

pub fn hamiltonian_from_density(h: &HamiltonianDensity, n_sites: usize) -> SparseMat {
    let d = h.n_phys.pow(n_sites as u32);
    let hs = SparseMat::from_dense(&h.matrix);
    let mut acc = SparseMat::zeros(d, d);
    for j in 0..n_sites.saturating_sub(1) {
        acc = &acc + &embed(&hs, h.n_phys, j, 2, n_sites);
    }
    acc
}

pub fn hamiltonian_sparse(model: Model, n_sites: usize) -> SparseMat {
    hamiltonian_from_density(&model.bond(), n_sites)
}

pub fn build_hamiltonian(model: Model, n_sites: usize) -> Result<DenseOperator> {
    let rows = model.n_phys().pow(n_sites as u32);
    if rows > DENSE_LIMIT {
        return Err(Error::Capacity {
            what: "dense many-body operator rows",
            needed: rows,
            limit: DENSE_LIMIT,
        });
    }
    DenseOperator::new(model.n_phys(), n_sites, hamiltonian_sparse(model, n_sites).to_dense())
}

/// Many-body pieces of a driven chain, all sparse.
#[derive(Clone, Debug)]
pub struct ChainGenerator {
    pub dim: usize,
    pub h: SparseMat,
    pub jumps: Vec<SparseMat>,
}

impl ChainGenerator {
    pub fn new(h: SparseMat, jumps: Vec<SparseMat>) -> Self {
        Self { dim: h.rows(), h, jumps }
    }

    pub fn driven(model: Model, n_sites: usize, driving: &DrivingSpec) -> Result<Self> {
        let np = model.n_phys();
        if driving.left.n_phys != np || driving.right.n_phys != np {
            return Err(Error::DimMismatch("driving and model disagree on N".into()));
        }
        let h = hamiltonian_sparse(model, n_sites);
        let jumps = driving
            .jumps()
            .into_iter()
            .map(|(left, a)| {
                let site = if left { 0 } else { n_sites - 1 };
                embed(&SparseMat::from_dense(&a), np, site, 1, n_sites)
            })
            .collect();
        Ok(Self::new(h, jumps))
    }

    /// `ℒ(ρ) = -i[H, ρ] + Σ (A ρ A† - ½{A†A, ρ})`.
    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let mi = C64::new(0.0, -1.0);
        let mut out = (spmm(&self.h, rho) - dmsp(rho, &self.h)) * mi;
        for a in &self.jumps {
            let ad = a.adjoint();
            let ada = ad.matmul(a);
            out += dmsp(&spmm(a, rho), &ad);
            out -= (spmm(&ada, rho) + dmsp(rho, &ada)) * C64::new(0.5, 0.0);
        }
        out
    }

    /// Column `i + D j` of the superoperator, as `(row, value)` pairs.
    fn column(&self, i: usize, j: usize, t: &Transposes) -> Vec<(usize, C64)> {
        let d = self.dim;
        let mi = C64::new(0.0, -1.0);
        let mut col = Vec::new();
        // -i H|i><j|
        for (k, v) in t.h.row(i) {
            col.push((k + d * j, mi * v));
        }
        // +i |i><j| H
        for (k, v) in self.h.row(j) {
            col.push((i + d * k, -mi * v));
        }
        for ((at, mt), m) in t.a.iter().zip(&t.m).zip(&t.m_rows) {
            // A|i><j|A†
            for (k, x) in at.row(i) {
                for (l, y) in at.row(j) {
                    col.push((k + d * l, x * y.conj()));
                }
            }
            // -½ A†A|i><j|
            for (k, v) in mt.row(i) {
                col.push((k + d * j, -0.5 * v));
            }
            // -½ |i><j|A†A
            for (k, v) in m.row(j) {
                col.push((i + d * k, -0.5 * v));
            }
        }
        col
    }

    pub fn superoperator_dim(&self) -> usize {
        self.dim * self.dim
    }

    /// Dense superoperator (column stacking).
    pub fn superoperator(&self) -> DMatrix<C64> {
        let d = self.dim;
        let t = Transposes::new(self);
        let mut m = DMatrix::zeros(d * d, d * d);
        for j in 0..d {
            for i in 0..d {
                for (r, v) in self.column(i, j, &t) {
                    m[(r, i + d * j)] += v;
                }
            }
        }
        m
    }

    /// Invariant components of the operator basis under the generator.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let d = self.dim;
        let t = Transposes::new(self);
        let mut uf = UnionFind::new(d * d);
        for j in 0..d {
            for i in 0..d {
                for (r, v) in self.column(i, j, &t) {
                    if v != C64::new(0.0, 0.0) {
                        uf.union(r, i + d * j);
                    }
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for p in 0..d * d {
            groups.entry(uf.find(p)).or_default().push(p);
        }
        groups.into_values().collect()
    }

    fn block(&self, members: &[usize], t: &Transposes) -> DMatrix<C64> {
        let d = self.dim;
        let mut local = std::collections::HashMap::with_capacity(members.len());
        for (k, &p) in members.iter().enumerate() {
            local.insert(p, k);
        }
        let m = members.len();
        let mut b = DMatrix::zeros(m, m);
        for (c, &p) in members.iter().enumerate() {
            for (r, v) in self.column(p % d, p / d, t) {
                b[(local[&r], c)] += v;
            }
        }
        b
    }

    pub fn fixed_point(&self, n_phys: usize, n_sites: usize, limit: usize) -> Result<FixedPoint> {
        let d = self.dim;
        let sdim = d.checked_mul(d).unwrap_or(usize::MAX);
        if sdim > limit {
            return Err(Error::Capacity {
                what: "superoperator dimension",
                needed: sdim,
                limit,
            });
        }
        let t = Transposes::new(self);
        let comps = self.components();
        let mut comp_of = vec![0usize; sdim];
        for (k, members) in comps.iter().enumerate() {
            for &p in members {
                comp_of[p] = k;
            }
        }
        // ℒ(X†) = ℒ(X)†, so the component holding the adjoints of a sector
        // is the complex conjugate of its block up to ordering
        let mirror = |p: usize| (p % d) * d + p / d;
        let mut counts: Vec<Option<usize>> = vec![None; comps.len()];
        let mut null_dim = 0usize;
        let mut best: Option<(f64, DMatrix<C64>)> = None;
        for (k, members) in comps.iter().enumerate() {
            let carries_trace = members.iter().any(|&p| p % d == p / d);
            if !carries_trace {
                let twin = comp_of[mirror(members[0])];
                let cnt = match counts[twin] {
                    Some(c) => c,
                    None => {
                        let blk = self.block(members, &t);
                        blk.singular_values().iter().filter(|&&s| s < NULL_TOL).count()
                    }
                };
                counts[k] = Some(cnt);
                null_dim += cnt;
                continue;
            }
            let blk = self.block(members, &t);
            let mut found = Vec::new();
            let cnt = blk.singular_values().iter().filter(|&&s| s < NULL_TOL).count();
            if cnt == 1 {
                if let Some(v) = trace_normalized_null(&blk, members, d) {
                    found.push(v);
                }
            }
            if cnt > 1 || (cnt == 1 && found.is_empty()) {
                let svd = blk.svd(false, true);
                let vt = svd.v_t.as_ref().expect("right singular vectors requested");
                for (r, &s) in svd.singular_values.iter().enumerate() {
                    if s < NULL_TOL {
                        found.push(vt.row(r).iter().map(|z| z.conj()).collect());
                    }
                }
            }
            null_dim += cnt;
            for v in found {
                let mut rho = DMatrix::zeros(d, d);
                for (c, &p) in members.iter().enumerate() {
                    rho[(p % d, p / d)] = v[c];
                }
                let tr = rho.trace().norm();
                if best.as_ref().map_or(true, |(t0, _)| tr > *t0) {
                    best = Some((tr, rho));
                }
            }
        }
        let rho = match best {
            Some((tr, rho)) if tr > 1e-12 => rho,
            _ => return Err(Error::NoStationaryState { tol: NULL_TOL }),
        };
        let rho = &rho / rho.trace();
        let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
        let residual = dense_max_abs(&self.apply(&rho));
        let mut op = DenseOperator::new(n_phys, n_sites, rho)?;
        op.hermitian = true;
        let min_eig = op.min_eigenvalue();
        op.positive = min_eig >= -NULL_TOL;
        Ok(FixedPoint {
            trace: op.trace().re,
            rho: op,
            residual,
            null_dim,
            min_eig,
        })
    }
}

/// Null vector of a block with a one-dimensional kernel. Trace preservation
/// makes the rows at diagonal positions sum to zero, so one of them can be
/// swapped for the trace condition and the system solved by LU.
fn trace_normalized_null(blk: &DMatrix<C64>, members: &[usize], d: usize) -> Option<Vec<C64>> {
    let diag: Vec<usize> = (0..members.len()).filter(|&c| members[c] % d == members[c] / d).collect();
    let &drop = diag.first()?;
    let mut m = blk.clone();
    let mut rhs = nalgebra::DVector::<C64>::zeros(members.len());
    for c in 0..members.len() {
        m[(drop, c)] = C64::new(0.0, 0.0);
    }
    for &c in &diag {
        m[(drop, c)] = C64::new(1.0, 0.0);
    }
    rhs[drop] = C64::new(1.0, 0.0);
    let x = m.lu().solve(&rhs)?;
    // reject a solve that does not land in the kernel
    let res = (blk * &x).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    (res <= NULL_TOL * scale.max(1.0) && scale.is_finite()).then(|| x.iter().copied().collect())
}

struct Transposes {
    h: SparseMat,
    a: Vec<SparseMat>,
    m: Vec<SparseMat>,
    m_rows: Vec<SparseMat>,
}

impl Transposes {
    fn new(g: &ChainGenerator) -> Self {
        let ms: Vec<SparseMat> = g.jumps.iter().map(|a| a.adjoint().matmul(a)).collect();
        Self {
            h: g.h.transpose(),
            a: g.jumps.iter().map(|a| a.transpose()).collect(),
            m: ms.iter().map(|m| m.transpose()).collect(),
            m_rows: ms,
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// `S D` for sparse `S`, dense `D`.
pub fn spmm(s: &SparseMat, d: &DMatrix<C64>) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(s.rows(), d.ncols());
    for i in 0..s.rows() {
        for (k, v) in s.row(i) {
            for j in 0..d.ncols() {
                out[(i, j)] += v * d[(k, j)];
            }
        }
    }
    out
}

/// `D S` for dense `D`, sparse `S`.
pub fn dmsp(d: &DMatrix<C64>, s: &SparseMat) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(d.nrows(), s.cols());
    for k in 0..s.rows() {
        for (j, v) in s.row(k) {
            for i in 0..d.nrows() {
                out[(i, j)] += d[(i, k)] * v;
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct FixedPoint {
    pub rho: DenseOperator,
    pub residual: f64,
    pub null_dim: usize,
    pub trace: f64,
    pub min_eig: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub residual_max: f64,
    pub null_dim: usize,
    pub trace: f64,
    pub min_eig: f64,
}

impl FixedPoint {
    pub fn report(&self) -> ResidualReport {
        ResidualReport {
            residual_max: self.residual,
            null_dim: self.null_dim,
            trace: self.trace,
            min_eig: self.min_eig,
        }
    }
}

pub fn lindblad_apply(rho: &DenseOperator, model: Model, driving: &DrivingSpec) -> Result<DenseOperator> {
    if rho.n_phys != model.n_phys() {
        return Err(Error::DimMismatch("state and model disagree on N".into()));
    }
    let g = ChainGenerator::driven(model, rho.n_sites, driving)?;
    DenseOperator::new(rho.n_phys, rho.n_sites, g.apply(&rho.matrix))
}

pub fn fixed_point(model: Model, n_sites: usize, driving: &DrivingSpec) -> Result<FixedPoint> {
    fixed_point_with_limit(model, n_sites, driving, ORACLE_LIMIT)
}

pub fn fixed_point_with_limit(model: Model, n_sites: usize, driving: &DrivingSpec, limit: usize) -> Result<FixedPoint> {
    let np = model.n_phys();
    let sdim = (np as u128).pow(2 * n_sites as u32);
    if sdim > limit as u128 {
        return Err(Error::Capacity {
            what: "superoperator dimension",
            needed: sdim.min(usize::MAX as u128) as usize,
            limit,
        });
    }
    ChainGenerator::driven(model, n_sites, driving)?.fixed_point(np, n_sites, limit)
}
