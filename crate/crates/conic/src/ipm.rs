//! Infeasible-start primal-dual interior-point method for block-diagonal SDPs.
//!
//! Problem (dual form): maximize `b'y` subject to `F0 + sum_i y_i F_i >= 0`, where
//! the cone is a product of one nonnegative orthant (the LP block) and dense PSD blocks.
//! Search directions follow the HKM scaling with a Mehrotra predictor-corrector step.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

/// Coefficient matrix of one variable in one PSD block.
#[derive(Debug, Clone)]
pub(crate) struct Coef {
    /// Full symmetric entry list (both triangles).
    entries: Vec<(usize, usize, f64)>,
    /// Distinct columns holding nonzeros.
    cols: Vec<usize>,
    /// `entries` with the column replaced by its position in `cols`.
    packed: Vec<(usize, usize, f64)>,
    /// Optional factorization `A = L R'`.
    lowrank: Option<(DMatrix<f64>, DMatrix<f64>)>,
    dense: DMatrix<f64>,
}

impl Coef {
    pub(crate) fn from_dense(a: DMatrix<f64>) -> Self {
        let n = a.nrows();
        let mut entries = Vec::new();
        let mut colmark = vec![usize::MAX; n];
        let mut cols = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let v = a[(i, j)];
                if v != 0.0 {
                    entries.push((i, j, v));
                    if colmark[j] == usize::MAX {
                        colmark[j] = cols.len();
                        cols.push(j);
                    }
                }
            }
        }
        let packed = entries.iter().map(|&(i, j, v)| (i, colmark[j], v)).collect();
        let lowrank = if cols.len() > 6 { cross_approximation(&a, (n / 4).max(2)) } else { None };
        Self { entries, cols, packed, lowrank, dense: a }
    }

    fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, e| m.max(e.2.abs()))
    }

    fn scale(&mut self, s: f64) {
        for e in &mut self.entries {
            e.2 *= s;
        }
        for e in &mut self.packed {
            e.2 *= s;
        }
        if let Some((l, _)) = &mut self.lowrank {
            *l *= s;
        }
        self.dense *= s;
    }

    fn inner(&self, g: &DMatrix<f64>) -> f64 {
        self.entries.iter().map(|&(i, j, v)| g[(i, j)] * v).sum()
    }

    fn add_to(&self, target: &mut DMatrix<f64>, s: f64) {
        for &(i, j, v) in &self.entries {
            target[(i, j)] += s * v;
        }
    }

    /// `X A Zinv` using the cheapest available representation.
    fn sandwich(&self, x: &DMatrix<f64>, zinv: &DMatrix<f64>) -> DMatrix<f64> {
        let n = x.nrows();
        let nf = n as f64;
        let sparse_cost = nf * self.entries.len() as f64 + nf * nf * self.cols.len() as f64;
        let dense_cost = 2.0 * nf * nf * nf;
        let lr_cost = self.lowrank.as_ref().map(|(l, _)| 3.0 * nf * nf * l.ncols() as f64).unwrap_or(f64::INFINITY);
        if lr_cost < sparse_cost && lr_cost < dense_cost {
            let (l, r) = self.lowrank.as_ref().unwrap();
            let xl = x * l;
            let zr = zinv * r;
            return xl * zr.transpose();
        }
        if sparse_cost < dense_cost {
            let k = self.cols.len();
            let mut t = DMatrix::zeros(n, k);
            for &(a, pb, v) in &self.packed {
                let mut col = t.column_mut(pb);
                col.axpy(v, &x.column(a), 1.0);
            }
            let zsub = zinv.select_rows(self.cols.iter());
            return t * zsub;
        }
        x * &self.dense * zinv
    }
}

/// Adaptive cross approximation with full pivoting; returns `A = L R'` when rank <= `max_rank`.
fn cross_approximation(a: &DMatrix<f64>, max_rank: usize) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let amax = a.amax();
    if amax == 0.0 {
        return None;
    }
    let mut r = a.clone();
    let mut ls: Vec<DVector<f64>> = Vec::new();
    let mut rs: Vec<DVector<f64>> = Vec::new();
    loop {
        let (mut p, mut q, mut best) = (0, 0, 0.0);
        for j in 0..n {
            for i in 0..n {
                let v = r[(i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                    q = j;
                }
            }
        }
        if best <= 1e-13 * amax {
            break;
        }
        if ls.len() >= max_rank {
            return None;
        }
        let piv = r[(p, q)];
        let u: DVector<f64> = r.column(q).clone_owned() / piv;
        let w: DVector<f64> = r.row(p).transpose();
        r.ger(-1.0, &u, &w, 1.0);
        ls.push(u);
        rs.push(w);
    }
    if ls.is_empty() {
        return None;
    }
    Some((DMatrix::from_columns(&ls), DMatrix::from_columns(&rs)))
}

#[derive(Debug, Clone)]
pub(crate) struct PsdBlock {
    pub n: usize,
    pub f0: DMatrix<f64>,
    pub terms: Vec<(usize, Coef)>,
}

#[derive(Debug, Clone)]
pub(crate) struct LpBlock {
    pub f0: DVector<f64>,
    /// Row-major coefficient rows, `rows x m`.
    pub a: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct BlockSdp {
    pub m: usize,
    pub b: DVector<f64>,
    pub lp: LpBlock,
    pub psd: Vec<PsdBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum IpmStatus {
    Optimal,
    Infeasible,
    Unbounded,
    Failed,
}

#[derive(Debug, Clone)]
pub(crate) struct IpmOutcome {
    pub status: IpmStatus,
    pub y: DVector<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct IpmSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IpmSettings {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 100 }
    }
}

impl BlockSdp {
    /// Equilibrates blocks and variables; returns the variable scale `y = d .* y_scaled`.
    pub(crate) fn equilibrate(&mut self) -> DVector<f64> {
        let mut d = DVector::from_element(self.m, 1.0);
        for _pass in 0..2 {
            // Block / row scaling by the largest variable coefficient.
            for r in 0..self.lp.a.nrows() {
                let s = self.lp.a.row(r).amax();
                if s > 0.0 {
                    self.lp.a.row_mut(r).scale_mut(1.0 / s);
                    self.lp.f0[r] /= s;
                }
            }
            for blk in &mut self.psd {
                let s = blk.terms.iter().fold(0.0f64, |m, t| m.max(t.1.max_abs()));
                if s > 0.0 {
                    blk.f0 /= s;
                    for t in &mut blk.terms {
                        t.1.scale(1.0 / s);
                    }
                }
            }
            // Column scaling so every variable's largest coefficient is one.
            let mut cmax = vec![0.0f64; self.m];
            for i in 0..self.m {
                cmax[i] = self.lp.a.column(i).amax();
            }
            for blk in &self.psd {
                for (i, c) in &blk.terms {
                    cmax[*i] = cmax[*i].max(c.max_abs());
                }
            }
            for i in 0..self.m {
                if cmax[i] > 0.0 {
                    let s = 1.0 / cmax[i];
                    d[i] *= s;
                    self.b[i] *= s;
                    self.lp.a.column_mut(i).scale_mut(s);
                }
            }
            for blk in &mut self.psd {
                for (i, c) in &mut blk.terms {
                    if cmax[*i] > 0.0 {
                        c.scale(1.0 / cmax[*i]);
                    }
                }
            }
        }
        d
    }

    fn total_dim(&self) -> usize {
        self.lp.f0.len() + self.psd.iter().map(|b| b.n).sum::<usize>()
    }

    /// `sum_i y_i F_i` per block (constant excluded).
    fn apply_adjoint(&self, y: &DVector<f64>) -> (DVector<f64>, Vec<DMatrix<f64>>) {
        let lp = &self.lp.a * y;
        let psd = self
            .psd
            .iter()
            .map(|blk| {
                let mut m = DMatrix::zeros(blk.n, blk.n);
                for (i, c) in &blk.terms {
                    if y[*i] != 0.0 {
                        c.add_to(&mut m, y[*i]);
                    }
                }
                m
            })
            .collect();
        (lp, psd)
    }

    /// `(tr(F_i M))_i` summed over blocks.
    fn apply(&self, lp: &DVector<f64>, psd: &[DMatrix<f64>]) -> DVector<f64> {
        let mut out = self.lp.a.tr_mul(lp);
        for (blk, m) in self.psd.iter().zip(psd) {
            for (i, c) in &blk.terms {
                out[*i] += c.inner(m);
            }
        }
        out
    }
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Smallest eigenvalue of a symmetric matrix (exact for small sizes, Lanczos otherwise).
pub(crate) fn min_eig(w: &DMatrix<f64>) -> f64 {
    let n = w.nrows();
    if n == 0 {
        return f64::INFINITY;
    }
    if n <= 32 {
        return SymmetricEigen::new(w.clone()).eigenvalues.min();
    }
    lanczos_min(w, 36.min(n))
}

fn lanczos_min(w: &DMatrix<f64>, k: usize) -> f64 {
    let n = w.nrows();
    let mut q = DVector::from_fn(n, |i, _| 1.0 + 0.37 * ((i as f64) * 1.618).sin());
    q.normalize_mut();
    let mut basis: Vec<DVector<f64>> = vec![q];
    let mut alpha = Vec::with_capacity(k);
    let mut beta: Vec<f64> = Vec::with_capacity(k);
    let scale = w.amax().max(1e-300);
    for j in 0..k {
        let mut v = w * &basis[j];
        let a = basis[j].dot(&v);
        alpha.push(a);
        for _ in 0..2 {
            for qb in &basis {
                let c = qb.dot(&v);
                v.axpy(-c, qb, 1.0);
            }
        }
        let bnorm = v.norm();
        if j + 1 == k || bnorm <= 1e-12 * scale {
            break;
        }
        beta.push(bnorm);
        basis.push(v / bnorm);
    }
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    SymmetricEigen::new(t).eigenvalues.min()
}

/// Inverse of a lower-triangular matrix by column-wise forward substitution.
fn lower_inverse(l: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    let mut inv = DMatrix::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = 1.0 / l[(j, j)];
        for i in j + 1..n {
            let mut acc = 0.0;
            for k in j..i {
                acc += l[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -acc / l[(i, i)];
        }
    }
    inv
}

/// Largest `a <= 1` keeping `X + a dX` positive definite, given `L^-1` with `X = L L'`.
fn psd_step(linv: &DMatrix<f64>, dx: &DMatrix<f64>) -> f64 {
    let w = linv * dx * linv.transpose();
    let lam = min_eig(&sym(&w));
    if lam >= -1e-300 {
        f64::INFINITY
    } else {
        -1.0 / lam
    }
}

fn lp_step(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    let mut a = f64::INFINITY;
    for (xi, di) in x.iter().zip(dx.iter()) {
        if *di < 0.0 {
            a = a.min(-xi / di);
        }
    }
    a
}

struct Iterate {
    xl: DVector<f64>,
    zl: DVector<f64>,
    xs: Vec<DMatrix<f64>>,
    zs: Vec<DMatrix<f64>>,
    y: DVector<f64>,
}

struct Direction {
    dxl: DVector<f64>,
    dzl: DVector<f64>,
    dxs: Vec<DMatrix<f64>>,
    dzs: Vec<DMatrix<f64>>,
    dy: DVector<f64>,
}

fn chol_or_none(m: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    Cholesky::new(m.clone())
}

/// Step length keeping both primal and dual iterates interior.
fn step_lengths(it: &Iterate, d: &Direction, xlinv: &[DMatrix<f64>], zlinv: &[DMatrix<f64>]) -> (f64, f64) {
    let mut ap = lp_step(&it.xl, &d.dxl);
    let mut ad = lp_step(&it.zl, &d.dzl);
    for (k, dx) in d.dxs.iter().enumerate() {
        ap = ap.min(psd_step(&xlinv[k], dx));
    }
    for (k, dz) in d.dzs.iter().enumerate() {
        ad = ad.min(psd_step(&zlinv[k], dz));
    }
    (ap, ad)
}

fn positive_after(x: &DMatrix<f64>, dx: &DMatrix<f64>, a: f64) -> bool {
    chol_or_none(&(x + dx * a)).is_some()
}

fn backtrack(xs: &[DMatrix<f64>], dxs: &[DMatrix<f64>], xl: &DVector<f64>, dxl: &DVector<f64>, mut a: f64) -> f64 {
    for _ in 0..30 {
        let lp_ok = xl.iter().zip(dxl.iter()).all(|(x, d)| x + a * d > 0.0);
        if lp_ok && xs.iter().zip(dxs).all(|(x, d)| positive_after(x, d, a)) {
            return a;
        }
        a *= 0.8;
    }
    0.0
}

pub(crate) fn solve(p: &BlockSdp, settings: IpmSettings) -> IpmOutcome {
    let m = p.m;
    let ntot = p.total_dim().max(1) as f64;
    let a_vec = -&p.b;
    // C = -F0
    let c_lp = -&p.lp.f0;
    let c_psd: Vec<DMatrix<f64>> = p.psd.iter().map(|b| -&b.f0).collect();
    let c_norm = (c_lp.norm_squared() + c_psd.iter().map(|c| c.norm_squared()).sum::<f64>()).sqrt();
    let a_norm = a_vec.norm();

    // Coefficient norms for the standard starting point.
    let mut coef_norm = vec![0.0f64; m];
    for i in 0..m {
        coef_norm[i] = p.lp.a.column(i).norm_squared();
    }
    for blk in &p.psd {
        for (i, c) in &blk.terms {
            coef_norm[*i] += c.dense.norm_squared();
        }
    }
    let mut alpha0 = 1.0f64;
    let mut fmax = c_norm;
    for i in 0..m {
        let n = coef_norm[i].sqrt();
        alpha0 = alpha0.max(ntot * (1.0 + a_vec[i].abs()) / (1.0 + n));
        fmax = fmax.max(n);
    }
    let beta0 = (1.0 + fmax) / ntot.sqrt();
    let mut it = Iterate {
        xl: DVector::from_element(p.lp.f0.len(), 10.0 * alpha0),
        zl: DVector::from_element(p.lp.f0.len(), 10.0 * beta0),
        xs: p.psd.iter().map(|b| DMatrix::identity(b.n, b.n) * (10.0 * alpha0)).collect(),
        zs: p.psd.iter().map(|b| DMatrix::identity(b.n, b.n) * (10.0 * beta0)).collect(),
        y: DVector::zeros(m),
    };

    let mut best: Option<(f64, DVector<f64>)> = None;
    let mut infeas_hits = 0;
    let mut stall = 0;
    for iter in 0..settings.max_iter {
        let xchol: Option<Vec<_>> = it.xs.iter().map(chol_or_none).collect();
        let zchol: Option<Vec<_>> = it.zs.iter().map(chol_or_none).collect();
        let (Some(xchol), Some(zchol)) = (xchol, zchol) else {
            return finish(best, it.y, iter);
        };
        let xlinv: Vec<DMatrix<f64>> = xchol.iter().map(|c| lower_inverse(&c.l())).collect();
        let zlinv: Vec<DMatrix<f64>> = zchol.iter().map(|c| lower_inverse(&c.l())).collect();
        let zinv: Vec<DMatrix<f64>> = zlinv.iter().map(|li| li.tr_mul(li)).collect();

        // Residuals.
        let (aty_l, aty_s) = p.apply_adjoint(&it.y);
        let fd_l = &aty_l - &c_lp - &it.zl;
        let fd_s: Vec<DMatrix<f64>> = (0..p.psd.len()).map(|k| &aty_s[k] - &c_psd[k] - &it.zs[k]).collect();
        let ax = p.apply(&it.xl, &it.xs);
        let rp = &a_vec - &ax;
        let pobj = c_lp.dot(&it.xl) + c_psd.iter().zip(&it.xs).map(|(c, x)| dot(c, x)).sum::<f64>();
        let dobj = a_vec.dot(&it.y);
        let compl = it.xl.dot(&it.zl) + it.xs.iter().zip(&it.zs).map(|(x, z)| dot(x, z)).sum::<f64>();
        let mu = compl / ntot;
        let pinf = rp.norm() / (1.0 + a_norm);
        let dinf = (fd_l.norm_squared() + fd_s.iter().map(|f| f.norm_squared()).sum::<f64>()).sqrt() / (1.0 + c_norm);
        let denom = 1.0 + pobj.abs() + dobj.abs();
        let relgap = (pobj - dobj).abs() / denom;
        let relcompl = compl / denom;
        if !(pinf.is_finite() && dinf.is_finite() && relgap.is_finite()) {
            return finish(best, it.y, iter);
        }
        let merit = pinf.max(dinf).max(relgap).max(relcompl);
        if best.as_ref().map_or(true, |b| merit < b.0) {
            best = Some((merit, it.y.clone()));
        }
        if merit <= settings.tol {
            return IpmOutcome { status: IpmStatus::Optimal, y: it.y, iterations: iter };
        }
        // Certificates of infeasibility.
        if pobj > 0.0 && ax.norm() <= 1e-8 * pobj && dinf > settings.tol {
            infeas_hits += 1;
            if infeas_hits >= 2 {
                return IpmOutcome { status: IpmStatus::Infeasible, y: it.y, iterations: iter };
            }
        } else {
            infeas_hits = 0;
        }
        if it.y.amax() > 1e13 && dobj < 0.0 && dinf <= 1e-6 {
            return IpmOutcome { status: IpmStatus::Unbounded, y: it.y, iterations: iter };
        }

        // Schur complement.
        let mut mmat = DMatrix::zeros(m, m);
        if !it.xl.is_empty() {
            let ratio = it.xl.component_div(&it.zl);
            let scaled = DMatrix::from_fn(p.lp.a.nrows(), m, |r, c| p.lp.a[(r, c)] * ratio[r]);
            mmat += p.lp.a.tr_mul(&scaled);
        }
        for (k, blk) in p.psd.iter().enumerate() {
            for (ti, (i, ci)) in blk.terms.iter().enumerate() {
                let g = ci.sandwich(&it.xs[k], &zinv[k]);
                for (j, cj) in blk.terms[ti..].iter() {
                    let v = cj.inner(&g);
                    mmat[(*i, *j)] += v;
                    if i != j {
                        mmat[(*j, *i)] += v;
                    }
                }
            }
        }
        let Some(mchol) = factor_schur(&mmat) else {
            return finish(best, it.y, iter);
        };

        let xfz_l = it.xl.component_mul(&fd_l).component_div(&it.zl);
        let xfz_s: Vec<DMatrix<f64>> = (0..p.psd.len()).map(|k| &it.xs[k] * &fd_s[k] * &zinv[k]).collect();
        let base_rhs = -&a_vec - p.apply(&xfz_l, &xfz_s);

        let direction = |q_l: &DVector<f64>, q_s: &[DMatrix<f64>], rhs: DVector<f64>| -> Direction {
            let dy = mchol.solve(&rhs);
            let (dz_l0, dz_s0) = p.apply_adjoint(&dy);
            let dzl = dz_l0 + &fd_l;
            let dzs: Vec<DMatrix<f64>> = dz_s0.into_iter().zip(&fd_s).map(|(a, f)| a + f).collect();
            let dxl = q_l - &it.xl - it.xl.component_mul(&dzl).component_div(&it.zl);
            let dxs = (0..p.psd.len())
                .map(|k| sym(&q_s[k]) - &it.xs[k] - sym(&(&it.xs[k] * &dzs[k] * &zinv[k])))
                .collect();
            Direction { dxl, dzl, dxs, dzs, dy }
        };

        // Predictor.
        let zero_l = DVector::zeros(it.xl.len());
        let zero_s: Vec<DMatrix<f64>> = p.psd.iter().map(|b| DMatrix::zeros(b.n, b.n)).collect();
        let pred = direction(&zero_l, &zero_s, base_rhs.clone());
        let (ap, ad) = step_lengths(&it, &pred, &xlinv, &zlinv);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mut compl_aff = (&it.xl + &pred.dxl * ap).dot(&(&it.zl + &pred.dzl * ad));
        for k in 0..p.psd.len() {
            compl_aff += dot(&(&it.xs[k] + &pred.dxs[k] * ap), &(&it.zs[k] + &pred.dzs[k] * ad));
        }
        let sigma = ((compl_aff / ntot) / mu).max(0.0).powi(3).min(1.0);

        // Corrector.
        let smu = sigma * mu;
        let q_l = (DVector::from_element(it.xl.len(), smu) - pred.dxl.component_mul(&pred.dzl)).component_div(&it.zl);
        let q_s: Vec<DMatrix<f64>> = (0..p.psd.len())
            .map(|k| {
                let n = p.psd[k].n;
                (DMatrix::identity(n, n) * smu - &pred.dxs[k] * &pred.dzs[k]) * &zinv[k]
            })
            .collect();
        let rhs = &base_rhs + p.apply(&q_l, &q_s);
        let corr = direction(&q_l, &q_s, rhs);
        let (ap, ad) = step_lengths(&it, &corr, &xlinv, &zlinv);
        let tau = if merit < 1e-4 { 0.98 } else { 0.95 };
        let ap = backtrack(&it.xs, &corr.dxs, &it.xl, &corr.dxl, (tau * ap).min(1.0));
        let ad = backtrack(&it.zs, &corr.dzs, &it.zl, &corr.dzl, (tau * ad).min(1.0));
        if ap < 1e-10 && ad < 1e-10 {
            stall += 1;
            if stall >= 3 {
                return finish(best, it.y, iter);
            }
        } else {
            stall = 0;
        }
        it.xl += &corr.dxl * ap;
        it.zl += &corr.dzl * ad;
        for k in 0..p.psd.len() {
            it.xs[k] += &corr.dxs[k] * ap;
            it.xs[k] = sym(&it.xs[k]);
            it.zs[k] += &corr.dzs[k] * ad;
            it.zs[k] = sym(&it.zs[k]);
        }
        it.y += &corr.dy * ad;
    }
    finish(best, it.y, settings.max_iter)
}

/// Returns the best iterate seen; the caller's residual check decides whether it is usable.
fn finish(best: Option<(f64, DVector<f64>)>, y: DVector<f64>, iterations: usize) -> IpmOutcome {
    match best {
        Some((merit, yb)) if merit <= 1e-6 => IpmOutcome { status: IpmStatus::Optimal, y: yb, iterations },
        Some((_, yb)) => IpmOutcome { status: IpmStatus::Failed, y: yb, iterations },
        None => IpmOutcome { status: IpmStatus::Failed, y, iterations },
    }
}

fn factor_schur(m: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    if m.nrows() == 0 {
        return Cholesky::new(DMatrix::zeros(0, 0));
    }
    if let Some(c) = Cholesky::new(m.clone()) {
        return Some(c);
    }
    let dmax = m.diagonal().amax().max(1e-300);
    let mut reg = 1e-14 * dmax;
    for _ in 0..8 {
        let mut r = m.clone();
        for i in 0..r.nrows() {
            r[(i, i)] += reg;
        }
        if let Some(c) = Cholesky::new(r) {
            return Some(c);
        }
        reg *= 100.0;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_approximation_recovers_rank_two() {
        let u = DVector::from_vec(vec![1.0, 2.0, 0.0, -1.0, 3.0, 0.5, 0.0, 1.0]);
        let e = DVector::from_fn(8, |i, _| if i == 3 { 1.0 } else { 0.0 });
        let a = &u * e.transpose() + &e * u.transpose();
        let (l, r) = cross_approximation(&a, 4).unwrap();
        assert!(l.ncols() <= 2);
        assert!((l * r.transpose() - a).amax() < 1e-13);
    }

    #[test]
    fn lanczos_matches_dense_minimum() {
        let n = 60;
        let w = DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) as f64).sin() + ((j * 7 + i * 3) as f64).sin());
        let exact = SymmetricEigen::new(w.clone()).eigenvalues.min();
        let approx = lanczos_min(&w, 36);
        assert!(approx >= exact - 1e-9);
        assert!((approx - exact).abs() < 1e-3 * exact.abs().max(1.0));
    }
}
