//! Robust matrix inequalities certifying the worst-case jamming quantities.
//!
//! Three certificates are built over the Frobenius uncertainty balls around the
//! jammer-channel estimates:
//!
//! * an upper bound on the jamming gain `||w_D^H (H_JD + H_RD Theta H_JR)||^2`,
//! * a lower bound on the same gain,
//! * an upper bound on the jamming power reaching the surface `||Theta H_JR w_J||^2`.
//!
//! Each builder adds its block, fresh nonnegative multipliers and any linking
//! constraints to a [`ConicProgram`] and returns the Hermitian block for inspection.

use antijam_conic::{solve, CExpr, ComplexVar, ConicError, ConicProgram, HermAffine, LinExpr, SolveStatus, VarId};
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg::{real, CMat, CVec};
use crate::scene::ChannelSet;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LmiError {
    #[error("receive beamformer and reflection vector cannot both be program variables")]
    BothSymbolic,
    #[error("mode does not match the operands: {0}")]
    ModeMismatch(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Conic(#[from] ConicError),
    #[error("certificate program ended with status {0}")]
    Solve(SolveStatus),
}

/// A strategy vector that is either fixed data or a program variable.
#[derive(Debug, Clone, Copy)]
pub enum Operand<'a> {
    Fixed(&'a CVec),
    Var(&'a ComplexVar),
}

impl Operand<'_> {
    pub fn len(&self) -> usize {
        match self {
            Operand::Fixed(v) => v.len(),
            Operand::Var(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Operand::Var(_))
    }

    pub fn entry(&self, k: usize) -> CExpr {
        match self {
            Operand::Fixed(v) => CExpr::constant(v[k]),
            Operand::Var(v) => v.entry(k),
        }
    }
}

/// Certificate values and the multipliers that certify them.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RobustAuxiliaries {
    pub psi_jd: f64,
    pub phi_jd: f64,
    pub psi_jr: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub eta1: f64,
    pub eta2: f64,
}

impl RobustAuxiliaries {
    pub fn is_valid(&self) -> bool {
        [self.psi_jd, self.phi_jd, self.psi_jr, self.rho1, self.rho2, self.rho3, self.eta1, self.eta2]
            .iter()
            .all(|x| *x >= 0.0)
    }
}

/// A robust block added to a program, with its multipliers.
#[derive(Debug, Clone)]
pub struct RobustBlock {
    pub block: HermAffine,
    /// Multipliers in block order; entries for zero-radius balls are absent.
    pub multipliers: Vec<VarId>,
    /// Auxiliary Hermitian slack variables (compact lower-bound form only).
    pub slack: Vec<VarId>,
}

fn check_shapes(ch: &ChannelSet, w_d: &Operand, theta: &Operand) -> Result<(), LmiError> {
    if w_d.len() != ch.n_d() || theta.len() != ch.n() {
        return Err(LmiError::Shape(format!(
            "w_D has {} entries (expected {}), theta has {} (expected {})",
            w_d.len(),
            ch.n_d(),
            theta.len(),
            ch.n()
        )));
    }
    if ch.h_rd.shape() != (ch.n_d(), ch.n())
        || ch.hhat_jd.shape() != (ch.n_d(), ch.n_j())
        || ch.hhat_jr.shape() != (ch.n(), ch.n_j())
    {
        return Err(LmiError::Shape("estimate shapes are inconsistent".into()));
    }
    Ok(())
}

/// Row `u = w_D^H H_RD diag(theta)` as affine entries.
pub fn surface_row(w_d: &Operand, theta: &Operand, h_rd: &CMat) -> Result<Vec<CExpr>, LmiError> {
    if w_d.is_var() && theta.is_var() {
        return Err(LmiError::BothSymbolic);
    }
    let n = theta.len();
    let mut u = Vec::with_capacity(n);
    for k in 0..n {
        let e = match (w_d, theta) {
            (Operand::Var(_), Operand::Fixed(t)) => {
                let mut acc = CExpr::zero();
                for i in 0..w_d.len() {
                    acc.add_scaled(&w_d.entry(i).conj(), h_rd[(i, k)] * t[k]);
                }
                acc
            }
            (Operand::Fixed(w), _) => {
                let r: Complex64 = (0..w.len()).map(|i| w[i].conj() * h_rd[(i, k)]).sum();
                theta.entry(k).scale(r)
            }
            _ => unreachable!(),
        };
        u.push(e.compact());
    }
    Ok(u)
}

/// Nominal jamming row `v = w_D^H Hhat_JD + u Hhat_JR`.
fn jamming_row(w_d: &Operand, u: &[CExpr], ch: &ChannelSet) -> Vec<CExpr> {
    (0..ch.n_j())
        .map(|j| {
            let mut acc = CExpr::zero();
            for i in 0..ch.n_d() {
                acc.add_scaled(&w_d.entry(i).conj(), ch.hhat_jd[(i, j)]);
            }
            for (n, un) in u.iter().enumerate() {
                acc.add_scaled(un, ch.hhat_jr[(n, j)]);
            }
            acc.compact()
        })
        .collect()
}

fn nonneg_multiplier(p: &mut ConicProgram, name: &str) -> Result<VarId, LmiError> {
    let v = p.add_var(name);
    p.add_ge(&format!("{name}>=0"), LinExpr::var(v), LinExpr::zero())?;
    Ok(v)
}

fn real_expr(e: &LinExpr) -> CExpr {
    CExpr::from_lin(e)
}

/// Upper bound `psi >= max ||w_D^H (H_JD + H_RD Theta H_JR)||^2` over both balls.
pub fn lmi_psi_jd(
    p: &mut ConicProgram,
    label: &str,
    w_d: Operand,
    theta: Operand,
    ch: &ChannelSet,
    psi: &LinExpr,
) -> Result<RobustBlock, LmiError> {
    check_shapes(ch, &w_d, &theta)?;
    let u = surface_row(&w_d, &theta, &ch.h_rd)?;
    let v = jamming_row(&w_d, &u, ch);
    let (nj, nd, n) = (ch.n_j(), ch.n_d(), ch.n());
    let use_jd = ch.eps_jd > 0.0;
    let use_jr = ch.eps_jr > 0.0 && n > 0;
    let dim = nj + 1 + if use_jd { nd } else { 0 } + if use_jr { n } else { 0 };
    let mut m = HermAffine::zeros(dim);
    let mut corner = psi.clone();
    let mut multipliers = Vec::new();
    let mut next = nj + 1;
    if use_jd {
        let rho = nonneg_multiplier(p, &format!("{label}.rho_jd"))?;
        multipliers.push(rho);
        corner = corner - LinExpr::var(rho);
        let s = ch.eps_jd.sqrt();
        for k in 0..nd {
            m.set_herm(nj, next + k, w_d.entry(k).conj().scale(real(s)));
        }
        m.set_scaled_identity(next, nd, &real_expr(&LinExpr::var(rho)));
        next += nd;
    }
    if use_jr {
        let rho = nonneg_multiplier(p, &format!("{label}.rho_jr"))?;
        multipliers.push(rho);
        corner = corner - LinExpr::var(rho);
        let s = ch.eps_jr.sqrt();
        for (k, uk) in u.iter().enumerate() {
            m.set_herm(nj, next + k, uk.scale(real(s)));
        }
        m.set_scaled_identity(next, n, &real_expr(&LinExpr::var(rho)));
    }
    m.set_scaled_identity(0, nj, &real_expr(&corner));
    for (i, vi) in v.iter().enumerate() {
        m.set_herm(i, nj, vi.conj());
    }
    m.set(nj, nj, CExpr::real(1.0));
    p.add_herm_psd(label, &m)?;
    Ok(RobustBlock { block: m, multipliers, slack: Vec::new() })
}

/// Upper bound `psi >= max ||Theta H_JR w_J||^2` over the surface-side ball.
pub fn lmi_psi_jr(
    p: &mut ConicProgram,
    label: &str,
    theta: Operand,
    w_j: &CVec,
    ch: &ChannelSet,
    psi: &LinExpr,
) -> Result<RobustBlock, LmiError> {
    let n = ch.n();
    if theta.len() != n || w_j.len() != ch.n_j() || ch.hhat_jr.shape() != (n, ch.n_j()) {
        return Err(LmiError::Shape("surface-side jammer block shapes".into()));
    }
    if n == 0 {
        p.add_ge(&format!("{label}.empty"), psi.clone(), LinExpr::zero())?;
        return Ok(RobustBlock { block: HermAffine::zeros(0), multipliers: Vec::new(), slack: Vec::new() });
    }
    let kvec = &ch.hhat_jr * w_j;
    let use_jr = ch.eps_jr > 0.0;
    let dim = n + 1 + if use_jr { n } else { 0 };
    let mut m = HermAffine::zeros(dim);
    m.set_scaled_identity(0, n, &real_expr(psi));
    for i in 0..n {
        m.set_herm(i, n, theta.entry(i).scale(kvec[i]));
    }
    let mut multipliers = Vec::new();
    if use_jr {
        let rho = nonneg_multiplier(p, &format!("{label}.rho"))?;
        multipliers.push(rho);
        let s = ch.eps_jr.sqrt();
        for i in 0..n {
            m.set_herm(i, n + 1 + i, theta.entry(i).scale(real(s)));
        }
        m.set_scaled_identity(n + 1, n, &real_expr(&LinExpr::var(rho)));
        let wn = w_j.norm_squared();
        m.set(n, n, real_expr(&(LinExpr::constant(1.0) - LinExpr::term(rho, wn))));
    } else {
        m.set(n, n, CExpr::real(1.0));
    }
    p.add_herm_psd(label, &m)?;
    Ok(RobustBlock { block: m, multipliers, slack: Vec::new() })
}

/// How the stacked outer product `b b^H` enters the lower-bound block.
#[derive(Debug, Clone, Copy)]
pub enum PhiMode<'a> {
    /// All strategy data fixed; `A = b b^H`.
    Exact,
    /// `w_D` symbolic, linearized at the given expansion point.
    ScaReceive { w0: &'a CVec },
    /// `theta` symbolic, linearized at the given expansion point.
    ScaReflection { theta0: &'a CVec },
}

/// Stacked vector `b = [w_D; conj(u)]` for symbolic or fixed operands.
pub fn stacked_b(w_d: &Operand, theta: &Operand, h_rd: &CMat) -> Result<Vec<CExpr>, LmiError> {
    let u = surface_row(w_d, theta, h_rd)?;
    let mut b: Vec<CExpr> = (0..w_d.len()).map(|i| w_d.entry(i)).collect();
    b.extend(u.iter().map(CExpr::conj));
    Ok(b)
}

/// Numeric `b` for fixed `w_D`, `theta`.
pub fn stacked_b_value(w_d: &CVec, theta: &CVec, h_rd: &CMat) -> CVec {
    let nd = w_d.len();
    let mut b = CVec::zeros(nd + theta.len());
    for i in 0..nd {
        b[i] = w_d[i];
    }
    for k in 0..theta.len() {
        let r: Complex64 = (0..nd).map(|i| w_d[i].conj() * h_rd[(i, k)]).sum();
        b[nd + k] = (r * theta[k]).conj();
    }
    b
}

/// Affine Hermitian matrix standing in for `b b^H` under the given mode.
fn outer_surrogate(w_d: &Operand, theta: &Operand, mode: PhiMode, ch: &ChannelSet) -> Result<Vec<Vec<CExpr>>, LmiError> {
    let b0 = match (mode, w_d, theta) {
        (PhiMode::Exact, Operand::Fixed(w), Operand::Fixed(t)) => {
            let b = stacked_b_value(w, t, &ch.h_rd);
            let k = b.len();
            return Ok((0..k)
                .map(|i| (0..k).map(|j| CExpr::constant(b[i] * b[j].conj())).collect())
                .collect());
        }
        (PhiMode::ScaReceive { w0 }, Operand::Var(_), Operand::Fixed(t)) => {
            if w0.len() != w_d.len() {
                return Err(LmiError::Shape("expansion point length".into()));
            }
            stacked_b_value(w0, t, &ch.h_rd)
        }
        (PhiMode::ScaReflection { theta0 }, Operand::Fixed(w), Operand::Var(_)) => {
            if theta0.len() != theta.len() {
                return Err(LmiError::Shape("expansion point length".into()));
            }
            stacked_b_value(w, theta0, &ch.h_rd)
        }
        (PhiMode::Exact, _, _) => return Err(LmiError::ModeMismatch("exact mode needs fixed operands".into())),
        (PhiMode::ScaReceive { .. }, _, _) => {
            return Err(LmiError::ModeMismatch("receive linearization needs symbolic w_D and fixed theta".into()))
        }
        (PhiMode::ScaReflection { .. }, _, _) => {
            return Err(LmiError::ModeMismatch("reflection linearization needs symbolic theta and fixed w_D".into()))
        }
    };
    let b = stacked_b(w_d, theta, &ch.h_rd)?;
    let k = b.len();
    let mut a = vec![vec![CExpr::zero(); k]; k];
    for i in 0..k {
        for j in i..k {
            // b b0^H + b0 b^H - b0 b0^H
            let mut e = b[i].scale(b0[j].conj());
            e.add_scaled(&b[j].conj(), b0[i]);
            e.constant -= b0[i] * b0[j].conj();
            let mut e = e.compact();
            if i == j {
                e = CExpr::from_lin(&e.re());
            }
            a[j][i] = e.conj();
            a[i][j] = e;
        }
    }
    Ok(a)
}

/// Stacked channel estimate `G = [Hhat_JD; Hhat_JR]`, `(N_D + N) x N_J`.
pub fn stacked_estimate(ch: &ChannelSet) -> CMat {
    let (nd, n, nj) = (ch.n_d(), ch.n(), ch.n_j());
    let mut g = DMatrix::zeros(nd + n, nj);
    g.view_mut((0, 0), (nd, nj)).copy_from(&ch.hhat_jd);
    if n > 0 {
        g.view_mut((nd, 0), (n, nj)).copy_from(&ch.hhat_jr);
    }
    g
}

/// Rows of the stacked channel carrying a positive radius, with the radius index (0 or 1).
fn uncertain_rows(ch: &ChannelSet) -> Vec<(usize, usize)> {
    let mut s = Vec::new();
    if ch.eps_jd > 0.0 {
        s.extend((0..ch.n_d()).map(|r| (r, 0)));
    }
    if ch.eps_jr > 0.0 {
        s.extend((0..ch.n()).map(|r| (ch.n_d() + r, 1)));
    }
    s
}

fn phi_multipliers(p: &mut ConicProgram, label: &str, ch: &ChannelSet) -> Result<[Option<VarId>; 2], LmiError> {
    let mut eta = [None, None];
    if ch.eps_jd > 0.0 {
        eta[0] = Some(nonneg_multiplier(p, &format!("{label}.eta_jd"))?);
    }
    if ch.eps_jr > 0.0 && ch.n() > 0 {
        eta[1] = Some(nonneg_multiplier(p, &format!("{label}.eta_jr"))?);
    }
    Ok(eta)
}

/// `tr(G^H A G) - phi - sum eta_i eps_i` as a real affine expression.
fn phi_corner(a: &[Vec<CExpr>], g: &CMat, phi: &LinExpr, eta: &[Option<VarId>; 2], ch: &ChannelSet) -> LinExpr {
    let ggh = g * g.adjoint();
    let k = a.len();
    let mut tr = CExpr::zero();
    for i in 0..k {
        for j in 0..k {
            tr.add_scaled(&a[i][j], ggh[(j, i)]);
        }
    }
    let mut out = tr.compact().re() - phi.clone();
    for (e, eps) in eta.iter().zip([ch.eps_jd, ch.eps_jr]) {
        if let Some(v) = e {
            out -= &LinExpr::term(*v, eps);
        }
    }
    out.compact()
}

/// Lower bound `phi <= min ||w_D^H (H_JD + H_RD Theta H_JR)||^2` in compact form.
///
/// The block has size `|S| + N_J`, where `S` are the stacked-channel rows with a
/// positive radius, and carries an `N_J x N_J` Hermitian slack `T` linked through
/// `tr(T) <= tr(G^H A G) - phi - sum eta_i eps_i`.
pub fn lmi_phi_jd(
    p: &mut ConicProgram,
    label: &str,
    w_d: Operand,
    theta: Operand,
    mode: PhiMode,
    ch: &ChannelSet,
    phi: &LinExpr,
) -> Result<RobustBlock, LmiError> {
    check_shapes(ch, &w_d, &theta)?;
    let a = outer_surrogate(&w_d, &theta, mode, ch)?;
    let g = stacked_estimate(ch);
    let eta = phi_multipliers(p, label, ch)?;
    let corner = phi_corner(&a, &g, phi, &eta, ch);
    let rows = uncertain_rows(ch);
    let multipliers: Vec<VarId> = eta.iter().flatten().copied().collect();
    if rows.is_empty() {
        p.add_ge(label, corner, LinExpr::zero())?;
        return Ok(RobustBlock { block: HermAffine::zeros(0), multipliers, slack: Vec::new() });
    }
    let (s, nj, k) = (rows.len(), ch.n_j(), g.nrows());
    let mut m = HermAffine::zeros(s + nj);
    for (x, &(rx, bx)) in rows.iter().enumerate() {
        for (y, &(ry, _)) in rows.iter().enumerate().skip(x) {
            let mut e = a[rx][ry].clone();
            if x == y {
                if let Some(v) = eta[bx] {
                    e = e + CExpr::from_lin(&LinExpr::var(v));
                }
            }
            m.set_herm(x, y, e);
        }
        for j in 0..nj {
            let mut e = CExpr::zero();
            for l in 0..k {
                e.add_scaled(&a[rx][l], g[(l, j)]);
            }
            m.set_herm(x, s + j, e.compact());
        }
    }
    let mut slack = Vec::new();
    let mut trace = LinExpr::zero();
    for i in 0..nj {
        let d = p.add_var(format!("{label}.T{i}{i}"));
        slack.push(d);
        trace += LinExpr::var(d);
        m.set(s + i, s + i, CExpr::from_lin(&LinExpr::var(d)));
        for j in i + 1..nj {
            let re = p.add_var(format!("{label}.T{i}{j}.re"));
            let im = p.add_var(format!("{label}.T{i}{j}.im"));
            slack.push(re);
            slack.push(im);
            let e = CExpr::term(re, real(1.0)) + CExpr::term(im, Complex64::new(0.0, 1.0));
            m.set_herm(s + i, s + j, e);
        }
    }
    p.add_le(&format!("{label}.trace"), trace, corner)?;
    p.add_herm_psd(label, &m)?;
    Ok(RobustBlock { block: m, multipliers, slack })
}

/// Lower-bound block in the lifted vectorized form of size `N_J (N_D + N) + 1`.
///
/// Equivalent to [`lmi_phi_jd`]; kept for cross-checking the compact form.
pub fn lmi_phi_jd_full(
    p: &mut ConicProgram,
    label: &str,
    w_d: Operand,
    theta: Operand,
    mode: PhiMode,
    ch: &ChannelSet,
    phi: &LinExpr,
) -> Result<RobustBlock, LmiError> {
    check_shapes(ch, &w_d, &theta)?;
    let a = outer_surrogate(&w_d, &theta, mode, ch)?;
    let g = stacked_estimate(ch);
    let eta = phi_multipliers(p, label, ch)?;
    let multipliers: Vec<VarId> = eta.iter().flatten().copied().collect();
    let (nj, k) = (ch.n_j(), g.nrows());
    let hvec = |c: usize, r: usize| g[(c, r)].conj();
    // B = A^T (x) I: entry ((c, r), (c', r')) = A[c'][c] when r = r'.
    // (B h)_(c, r) = sum_c' A[c'][c] h_(c', r)
    let bh = |c: usize, r: usize| {
        let mut e = CExpr::zero();
        for c2 in 0..k {
            e.add_scaled(&a[c2][c], hvec(c2, r));
        }
        e.compact()
    };
    let mut corner = CExpr::zero();
    for c in 0..k {
        for r in 0..nj {
            corner.add_scaled(&bh(c, r), hvec(c, r).conj());
        }
    }
    let mut corner = corner.compact().re() - phi.clone();
    for (e, eps) in eta.iter().zip([ch.eps_jd, ch.eps_jr]) {
        if let Some(v) = e {
            corner -= &LinExpr::term(*v, eps);
        }
    }
    let rows = uncertain_rows(ch);
    if rows.is_empty() {
        p.add_ge(label, corner, LinExpr::zero())?;
        return Ok(RobustBlock { block: HermAffine::zeros(0), multipliers, slack: Vec::new() });
    }
    let coords: Vec<(usize, usize, usize)> =
        rows.iter().flat_map(|&(c, blk)| (0..nj).map(move |r| (c, r, blk))).collect();
    let dim = coords.len() + 1;
    let mut m = HermAffine::zeros(dim);
    for (x, &(c, r, blk)) in coords.iter().enumerate() {
        for (y, &(c2, r2, _)) in coords.iter().enumerate().skip(x) {
            if r != r2 {
                continue;
            }
            let mut e = a[c2][c].clone();
            if x == y {
                if let Some(v) = eta[blk] {
                    e = e + CExpr::from_lin(&LinExpr::var(v));
                }
            }
            m.set_herm(x, y, e);
        }
        m.set_herm(x, dim - 1, bh(c, r));
    }
    m.set(dim - 1, dim - 1, CExpr::from_lin(&corner));
    p.add_herm_psd(label, &m)?;
    Ok(RobustBlock { block: m, multipliers, slack: Vec::new() })
}

/// Numeric view of the stacked jammer channel and its Kronecker lift.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedJammerChannel {
    pub b: CVec,
    /// `[Hhat_JD; Hhat_JR]^H`, `N_J x (N_D + N)`.
    pub hhat_j: CMat,
    pub n_d: usize,
    pub n: usize,
}

impl StackedJammerChannel {
    pub fn new(w_d: &CVec, theta: &CVec, ch: &ChannelSet) -> Self {
        Self {
            b: stacked_b_value(w_d, theta, &ch.h_rd),
            hhat_j: stacked_estimate(ch).adjoint(),
            n_d: ch.n_d(),
            n: ch.n(),
        }
    }

    /// Column-major `vec(Hhat_J)`.
    pub fn vec_h(&self) -> CVec {
        CVec::from_column_slice(self.hhat_j.as_slice())
    }

    /// `(b b^H)^T (x) I_{N_J}`.
    pub fn lifted(&self) -> CMat {
        let a = &self.b * self.b.adjoint();
        a.transpose().kronecker(&DMatrix::identity(self.hhat_j.nrows(), self.hhat_j.nrows()))
    }

    /// Selectors of the coordinates of `vec(Delta_J)` belonging to each ball.
    pub fn selectors(&self) -> (CMat, CMat) {
        let nj = self.hhat_j.nrows();
        let dim = nj * (self.n_d + self.n);
        let sel = |lo: usize, hi: usize| {
            DMatrix::from_fn(dim, dim, |i, j| if i == j && (lo..hi).contains(&(i / nj)) { real(1.0) } else { real(0.0) })
        };
        (sel(0, self.n_d), sel(self.n_d, self.n_d + self.n))
    }

    /// Nominal jamming gain `||b^H Hhat_J^H||^2`.
    pub fn nominal_gain(&self) -> f64 {
        (&self.hhat_j * &self.b).norm_squared()
    }
}

fn scaled_view(ch: &ChannelSet, kappa: f64) -> ChannelSet {
    let mut s = ch.clone();
    s.hhat_jd *= real(kappa);
    s.hhat_jr *= real(kappa);
    s.eps_jd *= kappa * kappa;
    s.eps_jr *= kappa * kappa;
    s
}

fn solve_certificate(p: &ConicProgram, target: VarId) -> Result<(f64, Vec<f64>), LmiError> {
    let r = solve(p);
    if !r.is_optimal() {
        return Err(LmiError::Solve(r.status));
    }
    Ok((r.value(target), r.values))
}

/// Upper scale for the jamming gain, used to normalize certificate programs.
fn gain_scale(w_d: &CVec, theta: &CVec, ch: &ChannelSet) -> f64 {
    let sj = StackedJammerChannel::new(w_d, theta, ch);
    let u2: f64 = sj.b.rows(ch.n_d(), ch.n()).norm_squared();
    sj.nominal_gain() + ch.eps_jd * w_d.norm_squared() + ch.eps_jr * u2
}

/// Smallest certified upper bound on the jamming gain.
pub fn certify_psi_jd(w_d: &CVec, theta: &CVec, ch: &ChannelSet) -> Result<(f64, [f64; 2]), LmiError> {
    let s2 = gain_scale(w_d, theta, ch);
    if s2 == 0.0 {
        return Ok((0.0, [0.0; 2]));
    }
    let kappa = 1.0 / s2.sqrt();
    let view = scaled_view(ch, kappa);
    let mut p = ConicProgram::new();
    let psi = p.add_var("psi_jd");
    let blk = lmi_psi_jd(&mut p, "psi_jd", Operand::Fixed(w_d), Operand::Fixed(theta), &view, &LinExpr::var(psi))?;
    p.maximize(-LinExpr::var(psi));
    let (v, x) = solve_certificate(&p, psi)?;
    // The upper-bound multipliers carry the units of the bound; the lower-bound ones do not.
    Ok((v / (kappa * kappa), multiplier_values(&blk, &x, ch, 1.0 / (kappa * kappa))))
}

/// Largest certified lower bound on the jamming gain.
pub fn certify_phi_jd(w_d: &CVec, theta: &CVec, ch: &ChannelSet) -> Result<(f64, [f64; 2]), LmiError> {
    certify_phi_with(w_d, theta, ch, lmi_phi_jd)
}

/// As [`certify_phi_jd`], through the lifted block.
pub fn certify_phi_jd_full(w_d: &CVec, theta: &CVec, ch: &ChannelSet) -> Result<(f64, [f64; 2]), LmiError> {
    certify_phi_with(w_d, theta, ch, lmi_phi_jd_full)
}

type PhiBuilder = fn(&mut ConicProgram, &str, Operand, Operand, PhiMode, &ChannelSet, &LinExpr) -> Result<RobustBlock, LmiError>;

fn certify_phi_with(w_d: &CVec, theta: &CVec, ch: &ChannelSet, build: PhiBuilder) -> Result<(f64, [f64; 2]), LmiError> {
    let s2 = gain_scale(w_d, theta, ch);
    if s2 == 0.0 {
        return Ok((0.0, [0.0; 2]));
    }
    let kappa = 1.0 / s2.sqrt();
    let view = scaled_view(ch, kappa);
    let mut p = ConicProgram::new();
    let phi = p.add_var("phi_jd");
    let blk = build(&mut p, "phi_jd", Operand::Fixed(w_d), Operand::Fixed(theta), PhiMode::Exact, &view, &LinExpr::var(phi))?;
    p.maximize(LinExpr::var(phi));
    let (v, x) = solve_certificate(&p, phi)?;
    Ok((v / (kappa * kappa), multiplier_values(&blk, &x, ch, 1.0)))
}

/// Multiplier values in the caller's units, ordered `[jd, jr]`; zero when absent.
fn multiplier_values(blk: &RobustBlock, x: &[f64], ch: &ChannelSet, unscale: f64) -> [f64; 2] {
    let mut out = [0.0; 2];
    let mut it = blk.multipliers.iter();
    if ch.eps_jd > 0.0 {
        if let Some(v) = it.next() {
            out[0] = x[v.0];
        }
    }
    if ch.eps_jr > 0.0 && ch.n() > 0 {
        if let Some(v) = it.next() {
            out[1] = x[v.0];
        }
    }
    out.map(|v| v * unscale)
}

/// Smallest certified upper bound on the jamming power reaching the surface.
pub fn certify_psi_jr(theta: &CVec, w_j: &CVec, ch: &ChannelSet) -> Result<(f64, f64), LmiError> {
    let n = ch.n();
    if n == 0 {
        return Ok((0.0, 0.0));
    }
    let kvec = &ch.hhat_jr * w_j;
    let nominal: f64 = kvec.iter().zip(theta.iter()).map(|(a, t)| (a * t).norm_sqr()).sum();
    let tmax = theta.iter().map(|t| t.norm_sqr()).fold(0.0, f64::max);
    let s2 = nominal + ch.eps_jr * tmax * w_j.norm_squared();
    if s2 == 0.0 {
        return Ok((0.0, 0.0));
    }
    let kappa = 1.0 / s2.sqrt();
    let view = scaled_view(ch, kappa);
    let mut p = ConicProgram::new();
    let psi = p.add_var("psi_jr");
    let blk = lmi_psi_jr(&mut p, "psi_jr", Operand::Fixed(theta), w_j, &view, &LinExpr::var(psi))?;
    p.maximize(-LinExpr::var(psi));
    let (v, x) = solve_certificate(&p, psi)?;
    let rho = blk.multipliers.first().map_or(0.0, |m| x[m.0]);
    Ok((v / (kappa * kappa), rho))
}

/// All three certificates for a fixed strategy pair.
pub fn certify_all(w_d: &CVec, theta: &CVec, w_j: &CVec, ch: &ChannelSet) -> Result<RobustAuxiliaries, LmiError> {
    let (psi_jd, rho) = certify_psi_jd(w_d, theta, ch)?;
    let (phi_jd, eta) = certify_phi_jd(w_d, theta, ch)?;
    let (psi_jr, rho3) = certify_psi_jr(theta, w_j, ch)?;
    Ok(RobustAuxiliaries {
        psi_jd,
        phi_jd: phi_jd.max(0.0),
        psi_jr,
        rho1: rho[0],
        rho2: rho[1],
        rho3,
        eta1: eta[0],
        eta2: eta[1],
    })
}
