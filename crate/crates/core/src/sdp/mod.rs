//! Minimal semidefinite-program abstraction.
//!
//! A problem holds named scalar and matrix decision variables, affine
//! symmetric matrix expressions required positive semidefinite, affine scalar
//! inequalities and equalities, and an optional linear objective. Strictness
//! (`>= eps*I`) is expressed by shifting the constant term of a constraint;
//! callers decide per constraint.
//!
//! The shipped backend is a dense log-det barrier interior-point method in
//! [`solver`]; it is adequate for the desk-scale blocks this crate produces
//! (up to roughly 200x200). [`verify_solution`] re-checks any solution by
//! direct substitution and never consults the solver.

mod solver;

pub use solver::{solve_sdp, SdpOptions, SdpStatus};

use nalgebra::DMatrix;
use std::collections::BTreeMap;
use thiserror::Error;

/// Handle to one scalar decision coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct VarId(pub(crate) usize);

/// A (possibly symmetric, possibly masked) matrix of decision coordinates.
#[derive(Debug, Clone)]
pub struct MatVar {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub symmetric: bool,
    ids: Vec<Option<VarId>>,
}

impl MatVar {
    /// Coordinate holding entry `(i, j)`; `None` marks a structural zero.
    pub fn entry(&self, i: usize, j: usize) -> Option<VarId> {
        if self.symmetric {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            self.ids[a * self.cols + b]
        } else {
            self.ids[i * self.cols + j]
        }
    }
}

/// Affine scalar expression `constant + sum coeff * var`.
#[derive(Debug, Clone, Default)]
pub struct LinExpr {
    pub constant: f64,
    pub terms: Vec<(VarId, f64)>,
}

impl LinExpr {
    pub fn constant(c: f64) -> Self {
        Self { constant: c, terms: Vec::new() }
    }
    pub fn var(v: VarId) -> Self {
        Self { constant: 0.0, terms: vec![(v, 1.0)] }
    }
    pub fn scaled(v: VarId, c: f64) -> Self {
        Self { constant: 0.0, terms: vec![(v, c)] }
    }
    pub fn plus(mut self, other: LinExpr) -> Self {
        self.constant += other.constant;
        self.terms.extend(other.terms);
        self
    }
    pub fn plus_term(mut self, v: VarId, c: f64) -> Self {
        self.terms.push((v, c));
        self
    }
}

/// One affine symmetric matrix constraint `C + sum x_i A_i >= 0`.
#[derive(Debug, Clone)]
pub struct MatrixConstraint {
    pub name: String,
    pub dim: usize,
    pub constant: DMatrix<f64>,
    /// Per-variable symmetric coefficient matrices, sparse triplets.
    pub coeffs: Vec<(VarId, Vec<(usize, usize, f64)>)>,
}

impl MatrixConstraint {
    /// Evaluate the constraint matrix at an assignment.
    pub fn evaluate(&self, x: &[f64]) -> DMatrix<f64> {
        let mut m = self.constant.clone();
        for (v, trips) in &self.coeffs {
            let xv = x[v.0];
            for &(r, c, a) in trips {
                m[(r, c)] += xv * a;
            }
        }
        m
    }
}

/// Builder for one affine symmetric matrix expression.
///
/// Entries are written at their exact positions, mirroring nothing; write both
/// triangles the way the block matrix is printed. `build` checks symmetry to
/// rounding tolerance and then averages the triangles so the stored constraint
/// is exactly symmetric.
pub struct LmiBuilder {
    name: String,
    dim: usize,
    constant: DMatrix<f64>,
    terms: BTreeMap<usize, DMatrix<f64>>,
}

impl LmiBuilder {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Self { name: name.into(), dim, constant: DMatrix::zeros(dim, dim), terms: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn term_mut(&mut self, v: VarId) -> &mut DMatrix<f64> {
        let dim = self.dim;
        self.terms.entry(v.0).or_insert_with(|| DMatrix::zeros(dim, dim))
    }

    pub fn add_const(&mut self, r: usize, c: usize, v: f64) {
        self.constant[(r, c)] += v;
    }

    pub fn add_const_block(&mut self, r0: usize, c0: usize, m: &DMatrix<f64>) {
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                self.constant[(r0 + r, c0 + c)] += m[(r, c)];
            }
        }
    }

    /// Add `coeff * var` at entry `(r, c)`.
    pub fn add_term(&mut self, r: usize, c: usize, v: VarId, coeff: f64) {
        self.term_mut(v)[(r, c)] += coeff;
    }

    /// Add `m * var` as a block at `(r0, c0)`.
    pub fn add_var_block(&mut self, r0: usize, c0: usize, v: VarId, m: &DMatrix<f64>) {
        let t = self.term_mut(v);
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                t[(r0 + r, c0 + c)] += m[(r, c)];
            }
        }
    }

    /// Add the product `left * mv * right` as a block at `(r0, c0)`.
    ///
    /// `left` is `p x mv.rows`, `right` is `mv.cols x q`; the block is `p x q`.
    /// Masked entries of `mv` contribute nothing.
    pub fn add_product(
        &mut self,
        r0: usize,
        c0: usize,
        left: &DMatrix<f64>,
        mv: &MatVar,
        right: &DMatrix<f64>,
        coeff: f64,
    ) {
        assert_eq!(left.ncols(), mv.rows, "left/mv dimension mismatch");
        assert_eq!(right.nrows(), mv.cols, "mv/right dimension mismatch");
        for k in 0..mv.rows {
            for l in 0..mv.cols {
                let Some(v) = mv.entry(k, l) else { continue };
                let t = self.term_mut(v);
                for i in 0..left.nrows() {
                    let lv = left[(i, k)];
                    if lv == 0.0 {
                        continue;
                    }
                    for j in 0..right.ncols() {
                        let rv = right[(l, j)];
                        if rv != 0.0 {
                            t[(r0 + i, c0 + j)] += coeff * lv * rv;
                        }
                    }
                }
            }
        }
    }

    /// Add `mv` itself as a block at `(r0, c0)` (optionally transposed).
    pub fn add_matvar(&mut self, r0: usize, c0: usize, mv: &MatVar, coeff: f64, transpose: bool) {
        for k in 0..mv.rows {
            for l in 0..mv.cols {
                let Some(v) = mv.entry(k, l) else { continue };
                let (r, c) = if transpose { (l, k) } else { (k, l) };
                self.term_mut(v)[(r0 + r, c0 + c)] += coeff;
            }
        }
    }

    /// Subtract `shift * I` from the diagonal (pass a positive `shift` for a
    /// `>= shift*I` strictness margin).
    pub fn add_identity_shift(&mut self, shift: f64) {
        for i in 0..self.dim {
            self.constant[(i, i)] += shift;
        }
    }

    fn build(self) -> Result<MatrixConstraint, SdpError> {
        let sym_tol = 1e-8;
        let check = |m: &DMatrix<f64>, what: &str| -> Result<DMatrix<f64>, SdpError> {
            let scale = m.amax().max(1.0);
            let asym = (m - m.transpose()).amax();
            if asym > sym_tol * scale {
                return Err(SdpError::Asymmetric {
                    constraint: self.name.clone(),
                    what: what.to_string(),
                    asym,
                });
            }
            Ok((m + m.transpose()) * 0.5)
        };
        let constant = check(&self.constant, "constant")?;
        let mut coeffs = Vec::new();
        for (v, m) in &self.terms {
            let m = check(m, &format!("coefficient of var {v}"))?;
            let mut trips = Vec::new();
            for r in 0..self.dim {
                for c in 0..self.dim {
                    if m[(r, c)] != 0.0 {
                        trips.push((r, c, m[(r, c)]));
                    }
                }
            }
            if !trips.is_empty() {
                coeffs.push((VarId(*v), trips));
            }
        }
        Ok(MatrixConstraint { name: self.name, dim: self.dim, constant, coeffs })
    }
}

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("constraint `{constraint}` {what} is asymmetric by {asym:e}")]
    Asymmetric { constraint: String, what: String, asym: f64 },
    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("solver failed: {0}")]
    Numerical(String),
}

/// Declared problem; immutable once handed to the solver.
#[derive(Debug, Clone, Default)]
pub struct SdpProblem {
    pub(crate) n_vars: usize,
    pub(crate) var_names: Vec<String>,
    pub(crate) constraints: Vec<MatrixConstraint>,
    /// Affine scalar expressions required `>= 0`.
    pub(crate) nonneg: Vec<(String, LinExpr)>,
    /// Affine scalar expressions required `== 0`.
    pub(crate) equalities: Vec<(String, LinExpr)>,
    pub(crate) objective: Option<LinExpr>,
    /// Default strictness margin used by LMI assemblers.
    pub epsilon: f64,
}

impl SdpProblem {
    pub fn new() -> Self {
        Self { epsilon: 1e-6, ..Default::default() }
    }

    pub fn scalar(&mut self, name: impl Into<String>) -> VarId {
        let id = VarId(self.n_vars);
        self.n_vars += 1;
        self.var_names.push(name.into());
        id
    }

    /// Symmetric matrix variable; `mask(i, j) == false` pins that entry to zero.
    pub fn sym_matrix(
        &mut self,
        name: impl Into<String>,
        n: usize,
        mask: Option<&dyn Fn(usize, usize) -> bool>,
    ) -> MatVar {
        let name = name.into();
        let mut ids = vec![None; n * n];
        for i in 0..n {
            for j in i..n {
                let keep = mask.map_or(true, |m| m(i, j));
                if keep {
                    ids[i * n + j] = Some(self.scalar(format!("{name}[{i},{j}]")));
                }
            }
        }
        MatVar { name, rows: n, cols: n, symmetric: true, ids }
    }

    /// General (rectangular) matrix variable with an optional structural mask.
    pub fn matrix(
        &mut self,
        name: impl Into<String>,
        rows: usize,
        cols: usize,
        mask: Option<&dyn Fn(usize, usize) -> bool>,
    ) -> MatVar {
        let name = name.into();
        let mut ids = vec![None; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                let keep = mask.map_or(true, |m| m(i, j));
                if keep {
                    ids[i * cols + j] = Some(self.scalar(format!("{name}[{i},{j}]")));
                }
            }
        }
        MatVar { name, rows, cols, symmetric: false, ids }
    }

    pub fn lmi(&mut self, builder: LmiBuilder) -> Result<(), SdpError> {
        self.constraints.push(builder.build()?);
        Ok(())
    }

    /// Require `expr >= 0`.
    pub fn nonneg(&mut self, name: impl Into<String>, expr: LinExpr) {
        self.nonneg.push((name.into(), expr));
    }

    /// Require `expr == 0`.
    pub fn equality(&mut self, name: impl Into<String>, expr: LinExpr) {
        self.equalities.push((name.into(), expr));
    }

    /// Minimize `expr`.
    pub fn minimize(&mut self, expr: LinExpr) {
        self.objective = Some(expr);
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn constraints(&self) -> &[MatrixConstraint] {
        &self.constraints
    }

    /// Text dump of variables and dense constraint matrices, for
    /// cross-implementation diffing.
    pub fn dump(&self, x: Option<&[f64]>) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        writeln!(out, "variables: {}", self.n_vars).unwrap();
        for (i, name) in self.var_names.iter().enumerate() {
            match x {
                Some(x) => writeln!(out, "  [{i}] {name} = {:.17e}", x[i]).unwrap(),
                None => writeln!(out, "  [{i}] {name}").unwrap(),
            }
        }
        for c in &self.constraints {
            writeln!(out, "constraint `{}` ({}x{}):", c.name, c.dim, c.dim).unwrap();
            match x {
                Some(x) => {
                    let m = c.evaluate(x);
                    for r in 0..c.dim {
                        let row: Vec<String> =
                            (0..c.dim).map(|cc| format!("{:+.10e}", m[(r, cc)])).collect();
                        writeln!(out, "  {}", row.join(" ")).unwrap();
                    }
                }
                None => {
                    writeln!(out, "  constant:").unwrap();
                    for r in 0..c.dim {
                        let row: Vec<String> =
                            (0..c.dim).map(|cc| format!("{:+.10e}", c.constant[(r, cc)])).collect();
                        writeln!(out, "    {}", row.join(" ")).unwrap();
                    }
                    for (v, trips) in &c.coeffs {
                        writeln!(out, "  d/d {}: {} entries", self.var_names[v.0], trips.len())
                            .unwrap();
                    }
                }
            }
        }
        for (name, e) in &self.equalities {
            writeln!(out, "equality `{name}`: const {:+.10e}, {} terms", e.constant, e.terms.len())
                .unwrap();
        }
        out
    }
}

/// Solver output. Variable values are read back through the handles.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub x: Vec<f64>,
    pub objective: Option<f64>,
    /// Smallest eigenvalue over all matrix constraints at `x`.
    pub worst_min_eig: f64,
    /// Constraint achieving `worst_min_eig`.
    pub worst_constraint: Option<String>,
    pub newton_iterations: usize,
    /// Upper bound on the remaining objective suboptimality.
    pub gap: f64,
}

impl SdpSolution {
    pub fn value(&self, v: VarId) -> f64 {
        self.x[v.0]
    }

    pub fn matrix_value(&self, mv: &MatVar) -> DMatrix<f64> {
        DMatrix::from_fn(mv.rows, mv.cols, |i, j| mv.entry(i, j).map_or(0.0, |v| self.x[v.0]))
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self.status, SdpStatus::Optimal | SdpStatus::Feasible)
    }
}

/// Smallest eigenvalue of a symmetric matrix.
///
/// Rejects matrices whose asymmetry exceeds `1e-12` relative to their largest
/// entry; symmetrizes the rounding residue before the eigensolve.
pub fn min_eig_sym(m: &DMatrix<f64>) -> Result<f64, SdpError> {
    if m.nrows() != m.ncols() {
        return Err(SdpError::NotSymmetric(f64::INFINITY));
    }
    if m.is_empty() {
        return Ok(f64::INFINITY);
    }
    let scale = m.amax().max(1.0);
    let asym = (m - m.transpose()).amax();
    if asym > 1e-12 * scale {
        return Err(SdpError::NotSymmetric(asym));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    Ok(eig.eigenvalues.min())
}

/// Verification report for one solution, built by direct substitution.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub passed: bool,
    /// Per-constraint `(name, min_eigenvalue)`.
    pub constraint_margins: Vec<(String, f64)>,
    /// Per-equality `(name, residual)`.
    pub equality_residuals: Vec<(String, f64)>,
    pub nonneg_margins: Vec<(String, f64)>,
}

/// Re-evaluate every constraint of `p` at `sol` and report margins.
///
/// Passes iff every matrix constraint has min-eigenvalue `>= -tol_psd`, every
/// scalar inequality is `>= -tol_psd`, and equality residuals stay within
/// `tol_psd` relative to their coefficient scale. Empty problems pass.
pub fn verify_solution(p: &SdpProblem, sol: &SdpSolution, tol_psd: f64) -> VerifyReport {
    let eval_expr = |e: &LinExpr| -> f64 {
        e.constant + e.terms.iter().map(|(v, c)| c * sol.x[v.0]).sum::<f64>()
    };
    let mut passed = true;
    let mut constraint_margins = Vec::new();
    for c in &p.constraints {
        let m = c.evaluate(&sol.x);
        let eig = min_eig_sym(&m).unwrap_or(f64::NEG_INFINITY);
        if eig < -tol_psd {
            passed = false;
        }
        constraint_margins.push((c.name.clone(), eig));
    }
    let mut equality_residuals = Vec::new();
    for (name, e) in &p.equalities {
        let scale = e
            .terms
            .iter()
            .map(|(v, c)| (c * sol.x[v.0]).abs())
            .fold(e.constant.abs(), f64::max)
            .max(1.0);
        let r = eval_expr(e);
        if r.abs() > tol_psd * scale {
            passed = false;
        }
        equality_residuals.push((name.clone(), r));
    }
    let mut nonneg_margins = Vec::new();
    for (name, e) in &p.nonneg {
        let r = eval_expr(e);
        if r < -tol_psd {
            passed = false;
        }
        nonneg_margins.push((name.clone(), r));
    }
    VerifyReport { passed, constraint_margins, equality_residuals, nonneg_margins }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn min_eig_basics() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0]));
        assert_eq!(min_eig_sym(&m).unwrap(), -1.0);
        let m = DMatrix::<f64>::identity(5, 5);
        assert!((min_eig_sym(&m).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn min_eig_rejects_asymmetry() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(min_eig_sym(&m).is_err());
    }

    #[test]
    fn min_eig_matches_2x2_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let a: f64 = rng.random_range(-3.0..3.0);
            let b: f64 = rng.random_range(-3.0..3.0);
            let d: f64 = rng.random_range(-3.0..3.0);
            let m = DMatrix::from_row_slice(2, 2, &[a, b, b, d]);
            // Characteristic polynomial root for [[a,b],[b,d]].
            let expect = 0.5 * (a + d) - (0.25 * (a - d) * (a - d) + b * b).sqrt();
            let got = min_eig_sym(&m).unwrap();
            assert!((got - expect).abs() < 1e-10 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn builder_symmetrizes_and_catches_mistakes() {
        let mut p = SdpProblem::new();
        let x = p.scalar("x");
        let mut b = LmiBuilder::new("ok", 2);
        b.add_term(0, 1, x, 1.0);
        b.add_term(1, 0, x, 1.0);
        b.add_const(0, 0, 2.0);
        b.add_const(1, 1, 2.0);
        p.lmi(b).unwrap();

        let mut b = LmiBuilder::new("bad", 2);
        b.add_term(0, 1, x, 1.0); // missing mirror entry
        assert!(matches!(b.build(), Err(SdpError::Asymmetric { .. })));
    }

    #[test]
    fn product_block_places_matvar_terms() {
        let mut p = SdpProblem::new();
        let pv = p.sym_matrix("P", 2, None);
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        // H(A P) at block (0,0): A P + (A P)^T.
        let mut b = LmiBuilder::new("h", 2);
        b.add_product(0, 0, &a, &pv, &DMatrix::identity(2, 2), 1.0);
        b.add_product(0, 0, &DMatrix::identity(2, 2), &pv, &a.transpose(), 1.0);
        p.lmi(b).unwrap();
        // At P = [[2, 3], [3, 5]]: A P = [[3, 5], [-2, -3]], H = [[6, 3], [3, -6]].
        let x = {
            let mut x = vec![0.0; p.n_vars()];
            x[pv.entry(0, 0).unwrap().0] = 2.0;
            x[pv.entry(0, 1).unwrap().0] = 3.0;
            x[pv.entry(1, 1).unwrap().0] = 5.0;
            x
        };
        let m = p.constraints()[0].evaluate(&x);
        let expect = DMatrix::from_row_slice(2, 2, &[6.0, 3.0, 3.0, -6.0]);
        assert!((m - expect).norm() < 1e-12);
    }

    #[test]
    fn verify_empty_problem_passes() {
        let p = SdpProblem::new();
        let sol = SdpSolution {
            status: SdpStatus::Feasible,
            x: vec![],
            objective: None,
            worst_min_eig: f64::INFINITY,
            worst_constraint: None,
            newton_iterations: 0,
            gap: 0.0,
        };
        assert!(verify_solution(&p, &sol, 1e-7).passed);
    }
}
