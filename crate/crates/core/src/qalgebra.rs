//! q-calculus and truncated lowest-weight representations.
//!
//! The sl2 module uses the basis `|k> = x^k`, `k = 0..dim-1`, with
//! `S^z|k> = (k - s)|k>`, `S^+|k> = [2s - k]_q |k+1>`, `S^-|k> = [k]_q |k-1>`
//! and `K^± = q^{±S^z}`. Truncation only breaks the relations at the top
//! level.
//!
//! The gl(N) module is the restricted realization on polynomials in `N-1`
//! variables with weights `(r_0, 0, .., 0, r_{N-1})`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseMat;
use crate::C64;

/// Below this |γ| the q-deformation is replaced by its analytic limit.
pub const SMALL_ANGLE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QParams {
    pub gamma: f64,
    pub lambda: C64,
    pub spin_s: C64,
    pub weights: Vec<C64>,
}

impl QParams {
    pub fn new(gamma: f64) -> Self {
        Self {
            gamma,
            lambda: C64::new(0.0, 0.0),
            spin_s: C64::new(0.0, 0.0),
            weights: Vec::new(),
        }
    }

    pub fn with_lambda(mut self, lambda: C64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_spin(mut self, s: C64) -> Self {
        self.spin_s = s;
        self
    }

    pub fn with_weights(mut self, w: Vec<C64>) -> Self {
        self.weights = w;
        self
    }

    /// `q = e^{iγ}`, always derived.
    pub fn q(&self) -> C64 {
        C64::from_polar(1.0, self.gamma)
    }

    /// Spectral argument `u = -iλ` entering the Lax operators.
    pub fn u(&self) -> C64 {
        -C64::i() * self.lambda
    }

    pub fn is_undeformed(&self) -> bool {
        self.gamma.abs() < SMALL_ANGLE
    }
}

/// `[x]_q = sin(γx)/sin(γ)`.
pub fn qnum(x: C64, gamma: f64) -> C64 {
    if gamma.abs() < SMALL_ANGLE {
        x
    } else {
        (x * gamma).sin() / gamma.sin()
    }
}

pub fn q_number(x: C64, params: &QParams) -> C64 {
    qnum(x, params.gamma)
}

pub fn sinc(gamma: f64) -> f64 {
    if gamma.abs() < SMALL_ANGLE {
        1.0 - gamma * gamma / 6.0
    } else {
        gamma.sin() / gamma
    }
}

pub fn qfactorial(k: usize, gamma: f64) -> C64 {
    (1..=k).map(|j| qnum(C64::new(j as f64, 0.0), gamma)).product()
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuxRep {
    pub dim: usize,
    pub interior_dim: usize,
    pub gamma: f64,
    pub spin_s: C64,
    pub generators: BTreeMap<String, SparseMat>,
}

pub const SL2_LABELS: [&str; 5] = ["S+", "S-", "Sz", "K+", "K-"];

impl AuxRep {
    pub fn generator(&self, label: &str) -> Result<&SparseMat> {
        self.generators
            .get(label)
            .ok_or_else(|| Error::MissingGenerator(label.to_string()))
    }

    pub fn require_sl2(&self) -> Result<()> {
        for l in SL2_LABELS {
            self.generator(l)?;
        }
        Ok(())
    }

    /// Eigenvalues of the diagonal `S^z`.
    pub fn sz_diag(&self) -> Result<Vec<C64>> {
        Ok(self.generator("Sz")?.diag())
    }

    pub fn vacuum(&self) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.dim];
        v[0] = C64::new(1.0, 0.0);
        v
    }

    pub fn to_json(&self) -> serde_json::Value {
        let gens: serde_json::Map<String, serde_json::Value> = self
            .generators
            .iter()
            .map(|(k, m)| (k.clone(), sparse_json(m)))
            .collect();
        serde_json::json!({ "dim": self.dim, "generators": gens })
    }
}

/// Sparse-triplet list `[[row, col, re, im], ...]`.
pub fn sparse_json(m: &SparseMat) -> serde_json::Value {
    serde_json::Value::Array(
        m.triplets()
            .map(|(i, j, v)| serde_json::json!([i, j, v.re, v.im]))
            .collect(),
    )
}

pub fn verma_sl2(s: C64, params: &QParams, dim: usize) -> Result<AuxRep> {
    if dim < 2 {
        return Err(Error::InvalidParam(format!("Verma truncation dim must be >= 2, got {dim}")));
    }
    let g = params.gamma;
    let lvl = |k: usize| C64::new(k as f64, 0.0);
    let sz: Vec<C64> = (0..dim).map(|k| lvl(k) - s).collect();
    let sp = SparseMat::from_triplets(dim, dim, (0..dim - 1).map(|k| (k + 1, k, qnum(s * 2.0 - lvl(k), g))));
    let sm = SparseMat::from_triplets(dim, dim, (0..dim - 1).map(|k| (k, k + 1, qnum(lvl(k + 1), g))));
    let q = params.q();
    let kp: Vec<C64> = sz.iter().map(|&z| (q.ln() * z).exp()).collect();
    let km: Vec<C64> = sz.iter().map(|&z| (-q.ln() * z).exp()).collect();
    let mut generators = BTreeMap::new();
    generators.insert("S+".into(), sp);
    generators.insert("S-".into(), sm);
    generators.insert("Sz".into(), SparseMat::from_diag(&sz));
    generators.insert("K+".into(), SparseMat::from_diag(&kp));
    generators.insert("K-".into(), SparseMat::from_diag(&km));
    Ok(AuxRep {
        dim,
        interior_dim: dim - 1,
        gamma: g,
        spin_s: s,
        generators,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlnRep {
    pub n_phys: usize,
    pub weights: Vec<C64>,
    pub cutoff: usize,
    /// Exponent vectors in graded lexicographic order; index 0 is the vacuum.
    pub basis: Vec<Vec<u32>>,
    pub dim: usize,
    /// `(i, j) -> E^{ij}` realized on the truncated monomial space.
    pub elements: BTreeMap<(usize, usize), SparseMat>,
}

impl GlnRep {
    pub fn element(&self, i: usize, j: usize) -> &SparseMat {
        &self.elements[&(i, j)]
    }

    /// Number of basis monomials of total degree below `deg`.
    pub fn dim_below_degree(&self, deg: usize) -> usize {
        self.basis
            .iter()
            .filter(|e| (e.iter().sum::<u32>() as usize) < deg)
            .count()
    }
}

/// Exponent vectors of `vars` variables with total degree `<= cutoff`.
pub fn graded_monomials(vars: usize, cutoff: usize) -> Vec<Vec<u32>> {
    fn fill(rest: usize, deg: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 1 {
            cur.push(deg);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for e in (0..=deg).rev() {
            cur.push(e);
            fill(rest - 1, deg - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if vars == 0 {
        out.push(Vec::new());
        return out;
    }
    for d in 0..=cutoff as u32 {
        fill(vars, d, &mut Vec::new(), &mut out);
    }
    out
}

pub fn multinomial_dim(vars: usize, cutoff: usize) -> usize {
    // C(cutoff + vars, vars)
    (1..=vars).fold(1usize, |acc, k| acc * (cutoff + k) / k)
}

/// Restricted gl(N) realization with homogeneous coordinate `x_N`:
/// `E^{jk} = x_j ∂_k`, `E^{Nk} = ∂_k`, `E^{jN} = x_j (r_{N-1} - Σ x∂)`,
/// `E^{NN} = r_{N-1} - Σ x∂`, and `r_0` added to every diagonal element.
pub fn verma_gln(n: usize, weights: &[C64], cutoff: usize) -> Result<GlnRep> {
    if n < 2 {
        return Err(Error::InvalidParam(format!("gl(N) needs N >= 2, got {n}")));
    }
    if weights.len() != n {
        return Err(Error::DimMismatch(format!("{} weights for N = {n}", weights.len())));
    }
    if weights[1..n - 1].iter().any(|w| w.norm() != 0.0) {
        return Err(Error::InvalidParam("interior weights r_1..r_{N-2} must vanish".into()));
    }
    if cutoff < 1 {
        return Err(Error::InvalidParam("degree cutoff must be >= 1".into()));
    }
    let vars = n - 1;
    let basis = graded_monomials(vars, cutoff);
    let dim = basis.len();
    let index: BTreeMap<Vec<u32>, usize> = basis.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
    let (r0, rn) = (weights[0], weights[n - 1]);

    // Each generator maps a monomial to at most one monomial.
    let build = |f: &dyn Fn(&[u32]) -> Option<(Vec<u32>, C64)>| {
        let t: Vec<_> = basis
            .iter()
            .enumerate()
            .filter_map(|(col, e)| {
                let (img, c) = f(e)?;
                index.get(&img).map(|&row| (row, col, c))
            })
            .collect();
        SparseMat::from_triplets(dim, dim, t)
    };
    let degree = |e: &[u32]| e.iter().sum::<u32>() as f64;

    let mut elements = BTreeMap::new();
    for j in 0..n {
        for k in 0..n {
            let m = match (j == n - 1, k == n - 1) {
                (false, false) => build(&|e: &[u32]| {
                    if e[k] == 0 {
                        return if j == k { Some((e.to_vec(), r0)) } else { None };
                    }
                    let mut img = e.to_vec();
                    img[k] -= 1;
                    img[j] += 1;
                    let c = C64::new(e[k] as f64, 0.0) + if j == k { r0 } else { C64::new(0.0, 0.0) };
                    Some((img, c))
                }),
                (true, false) => build(&|e: &[u32]| {
                    if e[k] == 0 {
                        return None;
                    }
                    let mut img = e.to_vec();
                    img[k] -= 1;
                    Some((img, C64::new(e[k] as f64, 0.0)))
                }),
                (false, true) => build(&|e: &[u32]| {
                    let mut img = e.to_vec();
                    img[j] += 1;
                    Some((img, rn - degree(e)))
                }),
                (true, true) => build(&|e: &[u32]| Some((e.to_vec(), rn - degree(e) + r0))),
            };
            elements.insert((j, k), m);
        }
    }
    Ok(GlnRep {
        n_phys: n,
        weights: weights.to_vec(),
        cutoff,
        basis,
        dim,
        elements,
    })
}
