//! Lowering of a [`ConicProgram`] to block form, backend dispatch and residual verification.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::expr::{ComplexVar, LinExpr, VarId};
use crate::ipm::{self, BlockSdp, Coef, IpmSettings, IpmStatus, LpBlock, PsdBlock};
use crate::matrix::{dense_from_entries, SymAffine};
use crate::program::{ConicProgram, Constraint};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::NumericalFailure => "numerical-failure",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub objective: f64,
    pub values: Vec<f64>,
    pub iterations: usize,
    pub wall_time: Duration,
    /// Largest scaled constraint violation found by the residual check.
    pub max_violation: f64,
    /// Label of the constraint attaining `max_violation`.
    pub worst_constraint: Option<String>,
}

impl SolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn value(&self, v: VarId) -> f64 {
        self.values[v.0]
    }

    pub fn complex_value(&self, cv: &ComplexVar) -> DVector<Complex64> {
        DVector::from_fn(cv.len(), |k, _| Complex64::new(self.values[cv.re[k].0], self.values[cv.im[k].0]))
    }

    fn failed(status: SolveStatus, nvars: usize, start: Instant) -> Self {
        Self {
            status,
            objective: f64::NAN,
            values: vec![0.0; nvars],
            iterations: 0,
            wall_time: start.elapsed(),
            max_violation: f64::INFINITY,
            worst_constraint: None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverSettings {
    /// Scaled residual accepted by the independent check.
    pub feasibility_tol: f64,
    /// Relative primal/dual infeasibility and gap targeted by the interior-point loop.
    pub gap_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { feasibility_tol: 1e-7, gap_tol: 1e-8, max_iter: 100 }
    }
}

/// Pluggable conic backend.
pub trait ConicBackend {
    fn name(&self) -> &str;
    fn solve(&self, p: &ConicProgram, settings: &SolverSettings) -> SolveResult;
}

/// Built-in primal-dual interior-point backend.
#[derive(Debug, Clone, Copy, Default)]
pub struct InteriorPoint;

impl ConicBackend for InteriorPoint {
    fn name(&self) -> &str {
        "hkm-ipm"
    }

    fn solve(&self, p: &ConicProgram, settings: &SolverSettings) -> SolveResult {
        solve_interior_point(p, settings)
    }
}

/// Solves with the default backend and settings.
pub fn solve(p: &ConicProgram) -> SolveResult {
    InteriorPoint.solve(p, &SolverSettings::default())
}

/// Affine substitution `x = x0 + N z` produced by eliminating equality constraints.
struct Reduction {
    /// For each original variable: reduced index, or the expansion of a pivot variable.
    map: Vec<VarMap>,
    nred: usize,
}

#[derive(Clone)]
enum VarMap {
    Free(usize),
    Pivot(f64, Vec<(usize, f64)>),
    Unused,
}

fn eliminate(p: &ConicProgram) -> Result<Reduction, SolveStatus> {
    let nv = p.num_vars();
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for lc in p.constraints() {
        if let Constraint::Eq(e) = &lc.constraint {
            let mut r = vec![0.0; nv];
            for (v, c) in &e.terms {
                r[v.0] += c;
            }
            rows.push((r, -e.constant));
        }
    }
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
    let mut keep = vec![true; rows.len()];
    for r in 0..rows.len() {
        let scale = rows[r].0.iter().fold(rows[r].1.abs(), |m, v| m.max(v.abs())).max(1e-300);
        let (col, best) = rows[r]
            .0
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (j, v)| if v.abs() > acc.1 { (j, v.abs()) } else { acc });
        if best <= 1e-12 * scale {
            if rows[r].1.abs() > 1e-9 * scale.max(1.0) {
                return Err(SolveStatus::Infeasible);
            }
            keep[r] = false;
            continue;
        }
        let piv = rows[r].0[col];
        for v in rows[r].0.iter_mut() {
            *v /= piv;
        }
        rows[r].1 /= piv;
        let (prow, prhs) = rows[r].clone();
        for (k, row) in rows.iter_mut().enumerate() {
            if k != r && row.0[col] != 0.0 {
                let f = row.0[col];
                for (a, b) in row.0.iter_mut().zip(&prow) {
                    *a -= f * b;
                }
                row.0[col] = 0.0;
                row.1 -= f * prhs;
            }
        }
        pivots.push((r, col));
    }
    let mut is_pivot = vec![None; nv];
    for &(r, c) in &pivots {
        if keep[r] {
            is_pivot[c] = Some(r);
        }
    }
    // Variables referenced anywhere outside equalities, or in the objective.
    let mut used = vec![false; nv];
    for lc in p.constraints() {
        if !matches!(lc.constraint, Constraint::Eq(_)) {
            lc.constraint.for_each_var(|v| used[v.0] = true);
        }
    }
    for (v, _) in &p.objective().terms {
        used[v.0] = true;
    }
    let mut map = vec![VarMap::Unused; nv];
    let mut nred = 0;
    for v in 0..nv {
        if is_pivot[v].is_none() {
            // Free variables that feed a pivot must stay, even if unused elsewhere.
            let feeds = pivots.iter().any(|&(r, c)| keep[r] && c != v && rows[r].0[v] != 0.0);
            if used[v] || feeds {
                map[v] = VarMap::Free(nred);
                nred += 1;
            }
        }
    }
    for v in 0..nv {
        if let Some(r) = is_pivot[v] {
            let (row, rhs) = &rows[r];
            let mut terms = Vec::new();
            for (j, c) in row.iter().enumerate() {
                if j != v && *c != 0.0 {
                    if let VarMap::Free(idx) = map[j] {
                        terms.push((idx, -c));
                    }
                }
            }
            map[v] = VarMap::Pivot(*rhs, terms);
        }
    }
    Ok(Reduction { map, nred })
}

impl Reduction {
    fn lin(&self, e: &LinExpr) -> (f64, BTreeMap<usize, f64>) {
        let mut c0 = e.constant;
        let mut t = BTreeMap::new();
        for (v, c) in &e.terms {
            match &self.map[v.0] {
                VarMap::Free(i) => *t.entry(*i).or_insert(0.0) += c,
                VarMap::Pivot(r, ex) => {
                    c0 += c * r;
                    for (i, a) in ex {
                        *t.entry(*i).or_insert(0.0) += c * a;
                    }
                }
                VarMap::Unused => {}
            }
        }
        t.retain(|_, v| *v != 0.0);
        (c0, t)
    }

    fn sym(&self, s: &SymAffine) -> (DMatrix<f64>, BTreeMap<usize, DMatrix<f64>>) {
        let n = s.n;
        let mut f0 = dense_from_entries(n, &s.constant);
        let mut terms: BTreeMap<usize, DMatrix<f64>> = BTreeMap::new();
        for (v, ent) in &s.terms {
            let dense = dense_from_entries(n, ent);
            match &self.map[v.0] {
                VarMap::Free(i) => {
                    *terms.entry(*i).or_insert_with(|| DMatrix::zeros(n, n)) += &dense;
                }
                VarMap::Pivot(r, ex) => {
                    f0 += &dense * *r;
                    for (i, a) in ex {
                        *terms.entry(*i).or_insert_with(|| DMatrix::zeros(n, n)) += &dense * *a;
                    }
                }
                VarMap::Unused => {}
            }
        }
        terms.retain(|_, m| m.amax() != 0.0);
        (f0, terms)
    }

    fn expand(&self, y: &DVector<f64>) -> Vec<f64> {
        self.map
            .iter()
            .map(|m| match m {
                VarMap::Free(i) => y[*i],
                VarMap::Pivot(r, ex) => r + ex.iter().map(|(i, a)| a * y[*i]).sum::<f64>(),
                VarMap::Unused => 0.0,
            })
            .collect()
    }
}

/// Arrow matrix `[[t, x'], [x, t I]]` (second-order cone) as a symmetric affine block.
fn soc_block(t: &LinExpr, x: &[LinExpr]) -> SymAffine {
    let mut s = SymAffine::new(x.len() + 1);
    for d in 0..=x.len() {
        s.add(d, d, t);
    }
    for (k, e) in x.iter().enumerate() {
        s.add(0, k + 1, e);
    }
    s
}

/// `[[2u, x'], [x, v I]]`, which is PSD iff `2uv >= ||x||^2`, `u, v >= 0`.
fn rsoc_block(u: &LinExpr, v: &LinExpr, x: &[LinExpr]) -> SymAffine {
    let mut s = SymAffine::new(x.len() + 1);
    s.add(0, 0, &u.clone().scaled(2.0));
    for d in 1..=x.len() {
        s.add(d, d, v);
    }
    for (k, e) in x.iter().enumerate() {
        s.add(0, k + 1, e);
    }
    s
}

fn solve_interior_point(p: &ConicProgram, settings: &SolverSettings) -> SolveResult {
    let start = Instant::now();
    let nv = p.num_vars();
    let red = match eliminate(p) {
        Ok(r) => r,
        Err(s) => return SolveResult::failed(s, nv, start),
    };
    let m = red.nred;

    let mut lp_rows: Vec<(f64, BTreeMap<usize, f64>)> = Vec::new();
    let mut blocks: Vec<SymAffine> = Vec::new();
    for lc in p.constraints() {
        match &lc.constraint {
            Constraint::Eq(_) => {}
            Constraint::NonNeg(e) => lp_rows.push(red.lin(e)),
            Constraint::Soc { t, x } if x.is_empty() => lp_rows.push(red.lin(t)),
            Constraint::Soc { t, x } => blocks.push(soc_block(t, x)),
            Constraint::RotatedSoc { u, v, x } if x.is_empty() => {
                lp_rows.push(red.lin(u));
                lp_rows.push(red.lin(v));
            }
            Constraint::RotatedSoc { u, v, x } => blocks.push(rsoc_block(u, v, x)),
            Constraint::Psd(s) => blocks.push(s.clone()),
        }
    }

    let mut psd = Vec::new();
    for s in &blocks {
        let (f0, terms) = red.sym(s);
        if terms.is_empty() {
            let scale = f0.amax().max(1.0);
            if SymmetricEigen::new(f0).eigenvalues.min() < -settings.feasibility_tol * scale {
                return SolveResult::failed(SolveStatus::Infeasible, nv, start);
            }
            continue;
        }
        if s.n == 1 {
            let row: BTreeMap<usize, f64> = terms.iter().map(|(i, t)| (*i, t[(0, 0)])).collect();
            lp_rows.push((f0[(0, 0)], row));
            continue;
        }
        let terms = terms.into_iter().map(|(i, t)| (i, Coef::from_dense(t))).collect();
        psd.push(PsdBlock { n: s.n, f0, terms });
    }
    let mut kept_lp = Vec::new();
    for (c0, t) in lp_rows {
        if t.is_empty() {
            if c0 < -settings.feasibility_tol * c0.abs().max(1.0) {
                return SolveResult::failed(SolveStatus::Infeasible, nv, start);
            }
        } else {
            kept_lp.push((c0, t));
        }
    }
    let (objc, objt) = red.lin(p.objective());
    let mut appears = vec![false; m];
    for (_, t) in &kept_lp {
        t.keys().for_each(|i| appears[*i] = true);
    }
    for b in &psd {
        b.terms.iter().for_each(|(i, _)| appears[*i] = true);
    }
    for (i, c) in &objt {
        if !appears[*i] && *c != 0.0 {
            return SolveResult::failed(SolveStatus::Unbounded, nv, start);
        }
    }
    // Compress to variables that actually appear in some cone.
    let mut idx = vec![usize::MAX; m];
    let mut mm = 0;
    for i in 0..m {
        if appears[i] {
            idx[i] = mm;
            mm += 1;
        }
    }
    let mut b = DVector::zeros(mm);
    for (i, c) in &objt {
        b[idx[*i]] = *c;
    }
    let lp = LpBlock {
        f0: DVector::from_iterator(kept_lp.len(), kept_lp.iter().map(|r| r.0)),
        a: DMatrix::from_fn(kept_lp.len(), mm, |_, _| 0.0),
    };
    let mut lp = lp;
    for (r, (_, t)) in kept_lp.iter().enumerate() {
        for (i, c) in t {
            lp.a[(r, idx[*i])] = *c;
        }
    }
    for blk in &mut psd {
        for t in &mut blk.terms {
            t.0 = idx[t.0];
        }
    }
    let mut sdp = BlockSdp { m: mm, b, lp, psd };
    let d = sdp.equilibrate();
    let bmax = sdp.b.amax();
    if bmax > 0.0 {
        sdp.b /= bmax;
    }
    let out = ipm::solve(&sdp, IpmSettings { tol: settings.gap_tol * 0.1, max_iter: settings.max_iter });
    let y_compact = out.y.component_mul(&d);
    let mut y = DVector::zeros(m);
    for i in 0..m {
        if idx[i] != usize::MAX {
            y[i] = y_compact[idx[i]];
        }
    }
    let values = red.expand(&y);
    let (max_violation, worst) = residual_check(p, &values);
    let status = match out.status {
        IpmStatus::Optimal if max_violation <= settings.feasibility_tol => SolveStatus::Optimal,
        IpmStatus::Optimal | IpmStatus::Failed => SolveStatus::NumericalFailure,
        IpmStatus::Infeasible => SolveStatus::Infeasible,
        IpmStatus::Unbounded => SolveStatus::Unbounded,
    };
    let objective = objc + objt.iter().map(|(i, c)| c * y[*i]).sum::<f64>();
    SolveResult {
        status,
        objective,
        values,
        iterations: out.iterations,
        wall_time: start.elapsed(),
        max_violation,
        worst_constraint: worst,
    }
}

/// Independent check of every constraint at `x`; violations are scaled by term magnitude.
pub fn residual_check(p: &ConicProgram, x: &[f64]) -> (f64, Option<String>) {
    let mut worst = 0.0f64;
    let mut label = None;
    for lc in p.constraints() {
        let v = constraint_violation(&lc.constraint, x);
        if !(v <= worst) {
            worst = if v.is_nan() { f64::INFINITY } else { v };
            label = Some(lc.label.clone());
        }
    }
    (worst, label)
}

/// Scaled violation of a single constraint (0 when satisfied).
pub fn constraint_violation(c: &Constraint, x: &[f64]) -> f64 {
    match c {
        Constraint::Eq(e) => e.eval(x).abs() / e.magnitude_at(x).max(1.0),
        Constraint::NonNeg(e) => (-e.eval(x)).max(0.0) / e.magnitude_at(x).max(1.0),
        Constraint::Soc { t, x: xs } => {
            let mag = xs.iter().fold(t.magnitude_at(x), |m, e| m.max(e.magnitude_at(x)));
            let nx = xs.iter().map(|e| e.eval(x).powi(2)).sum::<f64>().sqrt();
            (nx - t.eval(x)).max(0.0) / mag.max(1.0)
        }
        Constraint::RotatedSoc { u, v, x: xs } => {
            let mag = xs.iter().fold(u.magnitude_at(x).max(v.magnitude_at(x)), |m, e| m.max(e.magnitude_at(x)));
            let (uu, vv) = (u.eval(x), v.eval(x));
            let nx2 = xs.iter().map(|e| e.eval(x).powi(2)).sum::<f64>();
            let lhs = ((uu - vv).powi(2) + 2.0 * nx2).sqrt();
            (lhs - (uu + vv)).max(-uu).max(-vv).max(0.0) / mag.max(1.0)
        }
        Constraint::Psd(s) => {
            let mat = s.eval(x);
            let ev = SymmetricEigen::new(mat).eigenvalues.min();
            (-ev).max(0.0) / s.magnitude_at(x).max(1.0)
        }
    }
}
