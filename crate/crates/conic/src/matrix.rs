//! Symmetric and Hermitian matrices whose entries are affine in the program variables.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::expr::{CExpr, LinExpr, VarId};
use crate::ConicError;

/// Sparse upper-triangular entry list `(row, col, value)` with `row <= col`.
pub type Entries = Vec<(usize, usize, f64)>;

/// Real symmetric matrix `F0 + sum_k x_k F_k`, stored as upper-triangular sparse entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymAffine {
    pub n: usize,
    pub constant: Entries,
    pub terms: BTreeMap<VarId, Entries>,
}

impl SymAffine {
    pub fn new(n: usize) -> Self {
        Self { n, constant: Vec::new(), terms: BTreeMap::new() }
    }

    /// Adds `e` at `(i, j)` and, implicitly, at `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, e: &LinExpr) {
        assert!(i < self.n && j < self.n, "entry ({i},{j}) outside {}x{}", self.n, self.n);
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        if e.constant != 0.0 {
            self.constant.push((r, c, e.constant));
        }
        for (v, coef) in &e.terms {
            if *coef != 0.0 {
                self.terms.entry(*v).or_default().push((r, c, *coef));
            }
        }
    }

    /// Sums duplicate positions and drops zeros.
    pub fn compact(mut self) -> Self {
        self.constant = merge_entries(std::mem::take(&mut self.constant));
        let terms = std::mem::take(&mut self.terms);
        self.terms = terms
            .into_iter()
            .map(|(v, e)| (v, merge_entries(e)))
            .filter(|(_, e)| !e.is_empty())
            .collect();
        self
    }

    pub fn constant_dense(&self) -> DMatrix<f64> {
        dense_from_entries(self.n, &self.constant)
    }

    pub fn coefficient_dense(&self, v: VarId) -> DMatrix<f64> {
        self.terms
            .get(&v)
            .map(|e| dense_from_entries(self.n, e))
            .unwrap_or_else(|| DMatrix::zeros(self.n, self.n))
    }

    pub fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        let mut m = self.constant_dense();
        for (v, e) in &self.terms {
            let s = x[v.0];
            for &(i, j, c) in e {
                m[(i, j)] += s * c;
                if i != j {
                    m[(j, i)] += s * c;
                }
            }
        }
        m
    }

    /// Largest absolute summand entering any entry at `x`.
    pub fn magnitude_at(&self, x: &[f64]) -> f64 {
        let mut mag = self.constant.iter().fold(0.0f64, |a, e| a.max(e.2.abs()));
        for (v, e) in &self.terms {
            let s = x[v.0].abs();
            mag = e.iter().fold(mag, |a, t| a.max(t.2.abs() * s));
        }
        mag
    }
}

impl std::ops::Add for SymAffine {
    type Output = SymAffine;
    fn add(mut self, rhs: SymAffine) -> SymAffine {
        assert_eq!(self.n, rhs.n, "size mismatch in SymAffine addition");
        self.constant.extend(rhs.constant);
        for (v, e) in rhs.terms {
            self.terms.entry(v).or_default().extend(e);
        }
        self.compact()
    }
}

fn merge_entries(mut e: Entries) -> Entries {
    e.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut out: Entries = Vec::with_capacity(e.len());
    for (i, j, c) in e {
        match out.last_mut() {
            Some(last) if last.0 == i && last.1 == j => last.2 += c,
            _ => out.push((i, j, c)),
        }
    }
    out.retain(|t| t.2 != 0.0);
    out
}

pub(crate) fn dense_from_entries(n: usize, e: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for &(i, j, c) in e {
        m[(i, j)] += c;
        if i != j {
            m[(j, i)] += c;
        }
    }
    m
}

/// Complex square matrix with affine entries; intended to be Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermAffine {
    pub n: usize,
    entries: Vec<CExpr>,
}

impl HermAffine {
    pub fn zeros(n: usize) -> Self {
        Self { n, entries: vec![CExpr::zero(); n * n] }
    }

    pub fn get(&self, i: usize, j: usize) -> &CExpr {
        &self.entries[i * self.n + j]
    }

    /// Sets a single entry, leaving its mirror untouched.
    pub fn set(&mut self, i: usize, j: usize, e: CExpr) {
        self.entries[i * self.n + j] = e;
    }

    /// Sets `(i, j)` to `e` and `(j, i)` to its conjugate.
    pub fn set_herm(&mut self, i: usize, j: usize, e: CExpr) {
        if i != j {
            self.entries[j * self.n + i] = e.conj();
        }
        self.entries[i * self.n + j] = e;
    }

    /// Places a fixed complex matrix with its top-left corner at `(r0, c0)` and mirrors it.
    pub fn set_block_const(&mut self, r0: usize, c0: usize, m: &DMatrix<Complex64>) {
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                self.set_herm(r0 + i, c0 + j, CExpr::constant(m[(i, j)]));
            }
        }
    }

    /// Adds `e * I_k` on the diagonal starting at `r0`.
    pub fn set_scaled_identity(&mut self, r0: usize, k: usize, e: &CExpr) {
        for d in 0..k {
            self.set(r0 + d, r0 + d, e.clone());
        }
    }

    pub fn eval(&self, x: &[f64]) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).eval(x))
    }

    /// Checks `M = M^H` coefficient-wise (constant and every variable).
    pub fn check_hermitian(&self, tol: f64) -> Result<(), ConicError> {
        for i in 0..self.n {
            for j in i..self.n {
                let a = self.get(i, j).clone().compact();
                let b = self.get(j, i).conj().compact();
                let d = (a.clone() - b.clone()).compact();
                let scale = 1.0
                    + a.terms.iter().map(|t| t.1.norm()).fold(a.constant.norm(), f64::max)
                    + b.terms.iter().map(|t| t.1.norm()).fold(b.constant.norm(), f64::max);
                let worst = d.terms.iter().map(|t| t.1.norm()).fold(d.constant.norm(), f64::max);
                if worst > tol * scale {
                    return Err(ConicError::NotHermitian { row: i, col: j });
                }
            }
        }
        Ok(())
    }
}

/// Real embedding `[[Re M, -Im M], [Im M, Re M]]` of a Hermitian affine matrix.
pub fn herm_embed(m: &HermAffine) -> Result<SymAffine, ConicError> {
    m.check_hermitian(1e-12)?;
    let n = m.n;
    let mut s = SymAffine::new(2 * n);
    for i in 0..n {
        for j in 0..n {
            let c = m.get(i, j);
            if c.is_constant() && c.constant.norm_sqr() == 0.0 {
                continue;
            }
            let re = c.re();
            let im = c.im();
            if i <= j {
                s.add(i, j, &re);
                s.add(n + i, n + j, &re);
            }
            // Upper cross block (i, n + j) holds -Im M_ij for every (i, j).
            s.add(i, n + j, &(-im));
        }
    }
    Ok(s.compact())
}
