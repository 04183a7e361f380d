//! Program container: variables, objective and cone constraints.

use crate::expr::{ComplexVar, LinExpr, VarId};
use crate::matrix::{herm_embed, HermAffine, SymAffine};
use crate::ConicError;

/// One constraint of a conic program.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// `expr == 0`
    Eq(LinExpr),
    /// `expr >= 0`
    NonNeg(LinExpr),
    /// `t >= ||x||_2`
    Soc { t: LinExpr, x: Vec<LinExpr> },
    /// `2 u v >= ||x||_2^2`, `u, v >= 0`
    RotatedSoc { u: LinExpr, v: LinExpr, x: Vec<LinExpr> },
    /// `S(x)` positive semidefinite
    Psd(SymAffine),
}

impl Constraint {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Constraint::Eq(_) => "eq",
            Constraint::NonNeg(_) => "nonneg",
            Constraint::Soc { .. } => "soc",
            Constraint::RotatedSoc { .. } => "rsoc",
            Constraint::Psd(_) => "psd",
        }
    }

    pub(crate) fn for_each_var(&self, mut f: impl FnMut(VarId)) {
        let mut lin = |e: &LinExpr| e.terms.iter().for_each(|(v, _)| f(*v));
        match self {
            Constraint::Eq(e) | Constraint::NonNeg(e) => lin(e),
            Constraint::Soc { t, x } => {
                lin(t);
                x.iter().for_each(&mut lin);
            }
            Constraint::RotatedSoc { u, v, x } => {
                lin(u);
                lin(v);
                x.iter().for_each(&mut lin);
            }
            Constraint::Psd(s) => s.terms.keys().for_each(|v| f(*v)),
        }
    }
}

/// A labelled constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledConstraint {
    pub label: String,
    pub constraint: Constraint,
}

/// Convex program over real scalars: maximize an affine objective subject to cone constraints.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConicProgram {
    names: Vec<String>,
    objective: LinExpr,
    constraints: Vec<LabeledConstraint>,
}

impl ConicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.names[v.0]
    }

    pub fn objective(&self) -> &LinExpr {
        &self.objective
    }

    pub fn constraints(&self) -> &[LabeledConstraint] {
        &self.constraints
    }

    pub fn add_var(&mut self, name: impl Into<String>) -> VarId {
        self.names.push(name.into());
        VarId(self.names.len() - 1)
    }

    pub fn add_vars(&mut self, name: &str, n: usize) -> Vec<VarId> {
        (0..n).map(|k| self.add_var(format!("{name}[{k}]"))).collect()
    }

    pub fn add_complex(&mut self, name: &str, n: usize) -> ComplexVar {
        let re = self.add_vars(&format!("{name}.re"), n);
        let im = self.add_vars(&format!("{name}.im"), n);
        ComplexVar { re, im }
    }

    /// Sets the objective to be maximized.
    pub fn maximize(&mut self, obj: LinExpr) {
        self.objective = obj.compact();
    }

    pub fn add(&mut self, label: impl Into<String>, c: Constraint) -> Result<(), ConicError> {
        let mut bad = None;
        c.for_each_var(|v| {
            if v.0 >= self.names.len() {
                bad = Some(v.0);
            }
        });
        if let Some(v) = bad {
            return Err(ConicError::UnknownVariable(v));
        }
        if let Constraint::Psd(s) = &c {
            let n = s.n;
            let ok = s.constant.iter().chain(s.terms.values().flatten()).all(|&(i, j, _)| i <= j && j < n);
            if !ok {
                return Err(ConicError::Malformed("psd entry outside the upper triangle".into()));
            }
        }
        self.constraints.push(LabeledConstraint { label: label.into(), constraint: c });
        Ok(())
    }

    pub fn add_eq(&mut self, label: &str, lhs: LinExpr, rhs: LinExpr) -> Result<(), ConicError> {
        self.add(label, Constraint::Eq((lhs - rhs).compact()))
    }

    /// `lhs >= rhs`
    pub fn add_ge(&mut self, label: &str, lhs: LinExpr, rhs: LinExpr) -> Result<(), ConicError> {
        self.add(label, Constraint::NonNeg((lhs - rhs).compact()))
    }

    /// `lhs <= rhs`
    pub fn add_le(&mut self, label: &str, lhs: LinExpr, rhs: LinExpr) -> Result<(), ConicError> {
        self.add(label, Constraint::NonNeg((rhs - lhs).compact()))
    }

    pub fn add_soc(&mut self, label: &str, t: LinExpr, x: Vec<LinExpr>) -> Result<(), ConicError> {
        let x = x.into_iter().map(LinExpr::compact).collect();
        self.add(label, Constraint::Soc { t: t.compact(), x })
    }

    /// `2 u v >= ||x||^2` with `u, v >= 0`.
    pub fn add_rotated_soc(&mut self, label: &str, u: LinExpr, v: LinExpr, x: Vec<LinExpr>) -> Result<(), ConicError> {
        let x = x.into_iter().map(LinExpr::compact).collect();
        self.add(label, Constraint::RotatedSoc { u: u.compact(), v: v.compact(), x })
    }

    pub fn add_psd(&mut self, label: &str, s: SymAffine) -> Result<(), ConicError> {
        self.add(label, Constraint::Psd(s.compact()))
    }

    /// Adds `M >= 0` for a Hermitian affine matrix through its real embedding.
    pub fn add_herm_psd(&mut self, label: &str, m: &HermAffine) -> Result<(), ConicError> {
        let s = herm_embed(m)?;
        self.add_psd(label, s)
    }
}
