//! Plain-text sparse-triplet serialization of a [`ConicProgram`].
//!
//! ```text
//! conic-program v1
//! var <index> <name>
//! objective <constant>
//! obj <var> <coef>
//! constraint <kind> <dim> <label>
//! e <row> <col> <var|-> <value>
//! end
//! ```
//!
//! Entry rows are relative to the enclosing constraint. Linear rows use `(0, 0)`,
//! second-order cones put `t` at row 0 and `x_k` at row `k + 1`, rotated cones put
//! `u`, `v` at rows 0 and 1 and `x_k` at row `k + 2`. PSD blocks list their upper triangle.

use std::fmt::Write as _;

use crate::expr::{LinExpr, VarId};
use crate::matrix::SymAffine;
use crate::program::{ConicProgram, Constraint};

const HEADER: &str = "conic-program v1";
const MAX_DIM: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct DumpParseError {
    pub line: usize,
    pub msg: String,
}

fn sanitize(s: &str) -> String {
    let t: String = s.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect();
    if t.is_empty() {
        "_".into()
    } else {
        t
    }
}

fn write_lin(out: &mut String, row: usize, e: &LinExpr) {
    if e.constant != 0.0 {
        let _ = writeln!(out, "e {row} 0 - {:e}", e.constant);
    }
    for (v, c) in &e.terms {
        let _ = writeln!(out, "e {row} 0 {} {:e}", v.0, c);
    }
}

impl ConicProgram {
    /// Serializes the program in the sparse-triplet text format.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{HEADER}");
        for k in 0..self.num_vars() {
            let _ = writeln!(out, "var {k} {}", sanitize(self.var_name(VarId(k))));
        }
        let obj = self.objective();
        let _ = writeln!(out, "objective {:e}", obj.constant);
        for (v, c) in &obj.terms {
            let _ = writeln!(out, "obj {} {:e}", v.0, c);
        }
        for lc in self.constraints() {
            let c = &lc.constraint;
            let dim = match c {
                Constraint::Eq(_) | Constraint::NonNeg(_) => 1,
                Constraint::Soc { x, .. } => x.len() + 1,
                Constraint::RotatedSoc { x, .. } => x.len() + 2,
                Constraint::Psd(s) => s.n,
            };
            let _ = writeln!(out, "constraint {} {dim} {}", c.kind_name(), sanitize(&lc.label));
            match c {
                Constraint::Eq(e) | Constraint::NonNeg(e) => write_lin(&mut out, 0, e),
                Constraint::Soc { t, x } => {
                    write_lin(&mut out, 0, t);
                    for (k, e) in x.iter().enumerate() {
                        write_lin(&mut out, k + 1, e);
                    }
                }
                Constraint::RotatedSoc { u, v, x } => {
                    write_lin(&mut out, 0, u);
                    write_lin(&mut out, 1, v);
                    for (k, e) in x.iter().enumerate() {
                        write_lin(&mut out, k + 2, e);
                    }
                }
                Constraint::Psd(s) => {
                    for &(i, j, val) in &s.constant {
                        let _ = writeln!(out, "e {i} {j} - {val:e}");
                    }
                    for (v, ent) in &s.terms {
                        for &(i, j, val) in ent {
                            let _ = writeln!(out, "e {i} {j} {} {val:e}", v.0);
                        }
                    }
                }
            }
        }
        let _ = writeln!(out, "end");
        out
    }

    /// Parses the text produced by [`ConicProgram::dump`].
    pub fn parse_dump(text: &str) -> Result<ConicProgram, DumpParseError> {
        Parser::default().run(text)
    }
}

struct Pending {
    kind: String,
    dim: usize,
    label: String,
    rows: Vec<LinExpr>,
    psd: Option<SymAffine>,
}

#[derive(Default)]
struct Parser {
    prog: ConicProgram,
    pending: Option<Pending>,
    objective: LinExpr,
}

fn err(line: usize, msg: impl Into<String>) -> DumpParseError {
    DumpParseError { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, DumpParseError> {
    tok.ok_or_else(|| err(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| err(line, format!("bad {what}")))
}

fn finite(x: f64, line: usize) -> Result<f64, DumpParseError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(err(line, "non-finite value"))
    }
}

impl Parser {
    fn run(mut self, text: &str) -> Result<ConicProgram, DumpParseError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        match lines.next() {
            Some((_, h)) if h == HEADER => {}
            _ => return Err(err(1, "missing header")),
        }
        let mut ended = false;
        for (ln, line) in lines {
            if line.is_empty() {
                continue;
            }
            if ended {
                return Err(err(ln, "content after end"));
            }
            let mut tok = line.split_whitespace();
            match tok.next() {
                Some("var") => {
                    if self.pending.is_some() {
                        return Err(err(ln, "var after constraints"));
                    }
                    let k: usize = num(tok.next(), ln, "index")?;
                    if k != self.prog.num_vars() {
                        return Err(err(ln, "variables must be listed in order"));
                    }
                    let name = tok.next().ok_or_else(|| err(ln, "missing name"))?;
                    self.prog.add_var(name);
                }
                Some("objective") => {
                    self.objective.constant = finite(num(tok.next(), ln, "constant")?, ln)?;
                }
                Some("obj") => {
                    let v = self.var(tok.next(), ln)?;
                    let c = finite(num(tok.next(), ln, "coefficient")?, ln)?;
                    self.objective.terms.push((v, c));
                }
                Some("constraint") => {
                    self.flush(ln)?;
                    let kind = tok.next().ok_or_else(|| err(ln, "missing kind"))?.to_string();
                    let dim: usize = num(tok.next(), ln, "dimension")?;
                    if dim == 0 || dim > MAX_DIM {
                        return Err(err(ln, "dimension out of range"));
                    }
                    let label = tok.next().unwrap_or("").to_string();
                    let (rows, psd) = match kind.as_str() {
                        "eq" | "nonneg" if dim == 1 => (vec![LinExpr::zero()], None),
                        "soc" => (vec![LinExpr::zero(); dim], None),
                        "rsoc" if dim >= 2 => (vec![LinExpr::zero(); dim], None),
                        "psd" => (Vec::new(), Some(SymAffine::new(dim))),
                        _ => return Err(err(ln, "unknown kind or bad dimension")),
                    };
                    self.pending = Some(Pending { kind, dim, label, rows, psd });
                }
                Some("e") => {
                    let i: usize = num(tok.next(), ln, "row")?;
                    let j: usize = num(tok.next(), ln, "col")?;
                    let vtok = tok.next();
                    let var = if vtok == Some("-") { None } else { Some(self.var(vtok, ln)?) };
                    let val = finite(num(tok.next(), ln, "value")?, ln)?;
                    let p = self.pending.as_mut().ok_or_else(|| err(ln, "entry outside a constraint"))?;
                    if i >= p.dim || j >= p.dim {
                        return Err(err(ln, "entry outside the constraint"));
                    }
                    let e = match var {
                        None => LinExpr::constant(val),
                        Some(v) => LinExpr::term(v, val),
                    };
                    match &mut p.psd {
                        Some(s) => {
                            if i > j {
                                return Err(err(ln, "psd entry below the diagonal"));
                            }
                            s.add(i, j, &e);
                        }
                        None => {
                            if j != 0 {
                                return Err(err(ln, "linear rows use column 0"));
                            }
                            p.rows[i] += e;
                        }
                    }
                }
                Some("end") => {
                    self.flush(ln)?;
                    ended = true;
                }
                _ => return Err(err(ln, "unknown record")),
            }
        }
        if !ended {
            return Err(err(text.lines().count(), "missing end"));
        }
        let obj = std::mem::take(&mut self.objective);
        self.prog.maximize(obj);
        Ok(self.prog)
    }

    fn var(&self, tok: Option<&str>, ln: usize) -> Result<VarId, DumpParseError> {
        let k: usize = num(tok, ln, "variable")?;
        if k >= self.prog.num_vars() {
            return Err(err(ln, "undeclared variable"));
        }
        Ok(VarId(k))
    }

    fn flush(&mut self, ln: usize) -> Result<(), DumpParseError> {
        let Some(p) = self.pending.take() else { return Ok(()) };
        let mut rows = p.rows.into_iter().map(LinExpr::compact);
        let c = match p.kind.as_str() {
            "eq" => Constraint::Eq(rows.next().unwrap_or_default()),
            "nonneg" => Constraint::NonNeg(rows.next().unwrap_or_default()),
            "soc" => {
                let t = rows.next().unwrap_or_default();
                Constraint::Soc { t, x: rows.collect() }
            }
            "rsoc" => {
                let u = rows.next().unwrap_or_default();
                let v = rows.next().unwrap_or_default();
                Constraint::RotatedSoc { u, v, x: rows.collect() }
            }
            _ => Constraint::Psd(p.psd.unwrap_or_else(|| SymAffine::new(p.dim)).compact()),
        };
        self.prog.add(p.label, c).map_err(|e| err(ln, e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_program() {
        let mut p = ConicProgram::new();
        let x = p.add_var("x");
        let t = p.add_var("t");
        p.maximize(LinExpr::var(t) * 2.0 + 1.5);
        p.add_le("cap", LinExpr::var(x), LinExpr::constant(3.0)).unwrap();
        p.add_soc("cone", LinExpr::var(x), vec![LinExpr::var(t), LinExpr::constant(0.25)]).unwrap();
        p.add_rotated_soc("rot", LinExpr::var(x), LinExpr::constant(0.5), vec![LinExpr::var(t)]).unwrap();
        let mut s = SymAffine::new(2);
        s.add(0, 0, &LinExpr::constant(1.0));
        s.add(1, 1, &LinExpr::constant(1.0));
        s.add(0, 1, &LinExpr::var(t));
        p.add_psd("lmi", s).unwrap();
        p.add_eq("fix", LinExpr::var(x) + LinExpr::var(t), LinExpr::constant(1.0)).unwrap();

        let text = p.dump();
        let q = ConicProgram::parse_dump(&text).unwrap();
        assert_eq!(q.dump(), text);
        assert_eq!(q.constraints().len(), 5);
    }

    #[test]
    fn rejects_garbage() {
        assert!(ConicProgram::parse_dump("").is_err());
        assert!(ConicProgram::parse_dump("conic-program v1\nvar 0 x\n").is_err());
        assert!(ConicProgram::parse_dump("conic-program v1\nconstraint psd 2 a\ne 1 0 - 1\nend\n").is_err());
        assert!(ConicProgram::parse_dump("conic-program v1\nobj 3 1\nend\n").is_err());
    }
}
