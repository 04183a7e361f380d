//! Affine expressions over real scalar program variables.

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

/// Handle to a real scalar variable of a [`crate::ConicProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// Real affine expression `constant + sum coef * var`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    pub constant: f64,
    pub terms: Vec<(VarId, f64)>,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self { constant: c, terms: Vec::new() }
    }

    pub fn var(v: VarId) -> Self {
        Self { constant: 0.0, terms: vec![(v, 1.0)] }
    }

    pub fn term(v: VarId, coef: f64) -> Self {
        Self { constant: 0.0, terms: vec![(v, coef)] }
    }

    /// Merges duplicate variables and drops exact zeros.
    pub fn compact(mut self) -> Self {
        if self.terms.len() > 1 {
            let mut acc: BTreeMap<VarId, f64> = BTreeMap::new();
            for (v, c) in self.terms.drain(..) {
                *acc.entry(v).or_insert(0.0) += c;
            }
            self.terms = acc.into_iter().filter(|(_, c)| *c != 0.0).collect();
        } else {
            self.terms.retain(|(_, c)| *c != 0.0);
        }
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|(v, c)| c * x[v.0]).sum::<f64>()
    }

    /// Magnitude of the largest summand at `x`; used to judge residuals relative to cancellation.
    pub fn magnitude_at(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(v, c)| (c * x[v.0]).abs())
            .fold(self.constant.abs(), f64::max)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(_, c)| *c == 0.0)
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.constant *= s;
        for t in &mut self.terms {
            t.1 *= s;
        }
        self
    }
}

impl From<f64> for LinExpr {
    fn from(c: f64) -> Self {
        LinExpr::constant(c)
    }
}

impl From<VarId> for LinExpr {
    fn from(v: VarId) -> Self {
        LinExpr::var(v)
    }
}

impl AddAssign<&LinExpr> for LinExpr {
    fn add_assign(&mut self, rhs: &LinExpr) {
        self.constant += rhs.constant;
        self.terms.extend_from_slice(&rhs.terms);
    }
}

impl AddAssign for LinExpr {
    fn add_assign(&mut self, rhs: LinExpr) {
        *self += &rhs;
    }
}

impl SubAssign<&LinExpr> for LinExpr {
    fn sub_assign(&mut self, rhs: &LinExpr) {
        self.constant -= rhs.constant;
        self.terms.extend(rhs.terms.iter().map(|(v, c)| (*v, -c)));
    }
}

impl<T: Into<LinExpr>> Add<T> for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: T) -> LinExpr {
        self += rhs.into();
        self
    }
}

impl<T: Into<LinExpr>> Sub<T> for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: T) -> LinExpr {
        self -= &rhs.into();
        self
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(self, s: f64) -> LinExpr {
        self.scaled(s)
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self.scaled(-1.0)
    }
}

/// Complex-valued affine function of real variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CExpr {
    pub constant: Complex64,
    pub terms: Vec<(VarId, Complex64)>,
}

impl CExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self { constant: c, terms: Vec::new() }
    }

    pub fn real(c: f64) -> Self {
        Self::constant(Complex64::new(c, 0.0))
    }

    pub fn term(v: VarId, coef: Complex64) -> Self {
        Self { constant: Complex64::new(0.0, 0.0), terms: vec![(v, coef)] }
    }

    pub fn from_lin(e: &LinExpr) -> Self {
        Self {
            constant: Complex64::new(e.constant, 0.0),
            terms: e.terms.iter().map(|(v, c)| (*v, Complex64::new(*c, 0.0))).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            constant: self.constant.conj(),
            terms: self.terms.iter().map(|(v, c)| (*v, c.conj())).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            constant: self.constant * s,
            terms: self.terms.iter().map(|(v, c)| (*v, c * s)).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &CExpr, s: Complex64) {
        self.constant += other.constant * s;
        self.terms.extend(other.terms.iter().map(|(v, c)| (*v, c * s)));
    }

    pub fn compact(mut self) -> Self {
        if self.terms.len() > 1 {
            let mut acc: BTreeMap<VarId, Complex64> = BTreeMap::new();
            for (v, c) in self.terms.drain(..) {
                *acc.entry(v).or_insert(Complex64::new(0.0, 0.0)) += c;
            }
            self.terms = acc.into_iter().filter(|(_, c)| c.norm_sqr() != 0.0).collect();
        } else {
            self.terms.retain(|(_, c)| c.norm_sqr() != 0.0);
        }
        self
    }

    pub fn re(&self) -> LinExpr {
        LinExpr {
            constant: self.constant.re,
            terms: self.terms.iter().map(|(v, c)| (*v, c.re)).collect(),
        }
        .compact()
    }

    pub fn im(&self) -> LinExpr {
        LinExpr {
            constant: self.constant.im,
            terms: self.terms.iter().map(|(v, c)| (*v, c.im)).collect(),
        }
        .compact()
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.constant + self.terms.iter().map(|(v, c)| c * x[v.0]).sum::<Complex64>()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(_, c)| c.norm_sqr() == 0.0)
    }
}

impl Add for CExpr {
    type Output = CExpr;
    fn add(mut self, rhs: CExpr) -> CExpr {
        self.add_scaled(&rhs, Complex64::new(1.0, 0.0));
        self
    }
}

impl Sub for CExpr {
    type Output = CExpr;
    fn sub(mut self, rhs: CExpr) -> CExpr {
        self.add_scaled(&rhs, Complex64::new(-1.0, 0.0));
        self
    }
}

/// Complex decision vector carried as separate real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVar {
    pub re: Vec<VarId>,
    pub im: Vec<VarId>,
}

impl ComplexVar {
    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    /// Entry `k` as the affine expression `re_k + i im_k`.
    pub fn entry(&self, k: usize) -> CExpr {
        CExpr {
            constant: Complex64::new(0.0, 0.0),
            terms: vec![(self.re[k], Complex64::new(1.0, 0.0)), (self.im[k], Complex64::new(0.0, 1.0))],
        }
    }

    pub fn entries(&self) -> Vec<CExpr> {
        (0..self.len()).map(|k| self.entry(k)).collect()
    }
}
