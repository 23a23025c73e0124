//! Dense log-det barrier interior-point method.
//!
//! Problems here have few decision coordinates (tens) and moderate block
//! sizes (up to ~200), so a barrier Newton method with explicit Hessian
//! assembly is both simple and fast: the per-iteration cost is one Cholesky
//! and one triangular inverse per block plus an m x m solve.
//!
//! Pipeline: eliminate equalities through an orthonormal nullspace basis,
//! scale every block by a power of two near its coefficient magnitude, find a
//! strictly feasible point by minimizing a uniform slack, then follow the
//! central path on the (scaled) objective. Feasibility-only problems instead
//! maximize the uniform margin, which lands on a well-centered interior
//! point. The returned iterate is always strictly inside the cone, so direct
//! re-substitution of a feasible solve never shows negative eigenvalues.

use super::{SdpProblem, SdpSolution};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    /// Objective minimized to within the reported gap.
    Optimal,
    /// Strictly feasible point found (no objective requested).
    Feasible,
    Infeasible,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct SdpOptions {
    /// Centering parameter: factor by which the path parameter grows.
    pub mu: f64,
    /// Relative duality-gap target for objective problems.
    pub gap_tol: f64,
    /// Box half-width applied to every variable; keeps iterates compact.
    pub var_bound: f64,
    pub max_outer: usize,
    pub max_newton_per_stage: usize,
    /// Newton decrement threshold that ends one centering stage.
    pub centering_tol: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            mu: 8.0,
            gap_tol: 1e-9,
            var_bound: 1e9,
            max_outer: 80,
            max_newton_per_stage: 60,
            centering_tol: 0.25,
        }
    }
}

/// One PSD block in reduced coordinates, scaled.
struct Block {
    dim: usize,
    c: DMatrix<f64>,
    /// Per reduced coordinate: sparse symmetric coefficient triplets.
    a: Vec<Vec<(u32, u32, f64)>>,
}

/// Affine scalar row `b + a.z >= 0`, scaled.
struct Row {
    b: f64,
    a: DVector<f64>,
    /// Whether the phase-1 slack participates in this row.
    slacked: bool,
}

struct Reduced {
    m: usize,
    x_part: DVector<f64>,
    null: DMatrix<f64>,
    blocks: Vec<Block>,
    block_names: Vec<String>,
    rows: Vec<Row>,
    obj: Option<(DVector<f64>, f64, f64)>, // (direction, constant, scale)
}

fn pow2_near(x: f64) -> f64 {
    if x <= 0.0 || !x.is_finite() {
        1.0
    } else {
        (2.0f64).powi(x.log2().round() as i32)
    }
}

fn reduce(p: &SdpProblem, opts: &SdpOptions) -> Result<Reduced, String> {
    let n = p.n_vars;
    // Equality elimination: x = x_part + null * z.
    let (x_part, null) = if p.equalities.is_empty() {
        (DVector::zeros(n), DMatrix::identity(n, n))
    } else {
        let k = p.equalities.len();
        let mut e = DMatrix::zeros(k, n);
        let mut h = DVector::zeros(k);
        for (r, (_, expr)) in p.equalities.iter().enumerate() {
            h[r] = -expr.constant;
            for &(v, c) in &expr.terms {
                e[(r, v.0)] += c;
            }
        }
        let svd = e.clone().svd(true, true);
        let smax: f64 = svd.singular_values.max();
        let tol = 1e-12 * smax.max(1.0) * (n.max(k) as f64);
        let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
        let xp = svd.solve(&h, tol).map_err(|e| e.to_string())?;
        let resid = (&e * &xp - &h).amax();
        if resid > 1e-8 * (1.0 + h.amax()) {
            return Err(format!("inconsistent equality constraints (residual {resid:.3e})"));
        }
        let vt = svd.v_t.as_ref().ok_or("svd failed")?;
        // Null space basis: rows of V^T below the rank.
        let null = vt.rows(rank, n - rank).transpose().into_owned();
        (xp, null)
    };
    let m = null.ncols();

    let mut blocks = Vec::new();
    let mut block_names = Vec::new();
    for c in &p.constraints {
        let scale_raw = c
            .coeffs
            .iter()
            .flat_map(|(_, t)| t.iter().map(|&(_, _, v)| v.abs()))
            .fold(c.constant.amax(), f64::max);
        let s = pow2_near(scale_raw);
        let mut cm = c.constant.clone() / s;
        // Shift constant by the particular solution, collect reduced coeffs.
        let mut reduced: Vec<std::collections::BTreeMap<(u32, u32), f64>> =
            (0..m).map(|_| std::collections::BTreeMap::new()).collect();
        for (v, trips) in &c.coeffs {
            let xp = x_part[v.0];
            for &(r, cc, val) in trips {
                let val = val / s;
                if xp != 0.0 {
                    cm[(r, cc)] += xp * val;
                }
                for j in 0..m {
                    let nv = null[(v.0, j)];
                    if nv != 0.0 {
                        *reduced[j].entry((r as u32, cc as u32)).or_insert(0.0) += nv * val;
                    }
                }
            }
        }
        let a = reduced
            .into_iter()
            .map(|map| {
                map.into_iter()
                    .filter(|&(_, v)| v != 0.0)
                    .map(|((r, cc), v)| (r, cc, v))
                    .collect::<Vec<_>>()
            })
            .collect();
        blocks.push(Block { dim: c.dim, c: cm, a });
        block_names.push(c.name.clone());
    }

    let mut rows = Vec::new();
    for (_, expr) in &p.nonneg {
        let scale_raw =
            expr.terms.iter().map(|(_, c)| c.abs()).fold(expr.constant.abs(), f64::max);
        let s = pow2_near(scale_raw);
        let mut b = expr.constant / s;
        let mut a = DVector::zeros(m);
        for &(v, c) in &expr.terms {
            b += c / s * x_part[v.0];
            for j in 0..m {
                a[j] += c / s * null[(v.0, j)];
            }
        }
        rows.push(Row { b, a, slacked: true });
    }
    // Compactness box on every original variable.
    for v in 0..n {
        let xp = x_part[v];
        let dir = null.row(v).transpose();
        if dir.amax() == 0.0 {
            continue;
        }
        let bscale = opts.var_bound;
        rows.push(Row { b: (bscale - xp) / bscale, a: -&dir / bscale, slacked: false });
        rows.push(Row { b: (bscale + xp) / bscale, a: dir / bscale, slacked: false });
    }

    let obj = p.objective.as_ref().map(|e| {
        let mut c: DVector<f64> = DVector::zeros(m);
        let mut k = e.constant;
        for &(v, coeff) in &e.terms {
            k += coeff * x_part[v.0];
            for j in 0..m {
                c[j] += coeff * null[(v.0, j)];
            }
        }
        let scale = c.amax().max(1e-300);
        (c / scale, k, scale)
    });

    Ok(Reduced { m, x_part, null, blocks, block_names, rows, obj })
}

/// Barrier state at one iterate: Cholesky factors plus row values.
struct Cursor {
    chols: Vec<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
    row_vals: Vec<f64>,
}

impl Reduced {
    fn block_at(&self, k: usize, z: &DVector<f64>, slack: f64) -> DMatrix<f64> {
        let b = &self.blocks[k];
        let mut mmat = b.c.clone();
        for (j, trips) in b.a.iter().enumerate() {
            let zj = z[j];
            if zj == 0.0 {
                continue;
            }
            for &(r, c, v) in trips {
                mmat[(r as usize, c as usize)] += zj * v;
            }
        }
        if slack != 0.0 {
            for i in 0..b.dim {
                mmat[(i, i)] += slack;
            }
        }
        mmat
    }

    fn row_at(&self, r: &Row, z: &DVector<f64>, slack: f64) -> f64 {
        r.b + r.a.dot(z) + if r.slacked { slack } else { 0.0 }
    }

    /// Try to factor every block at `(z, slack)`; `None` if not interior.
    fn cursor(&self, z: &DVector<f64>, slack: f64) -> Option<Cursor> {
        let mut chols = Vec::with_capacity(self.blocks.len());
        for k in 0..self.blocks.len() {
            let m = self.block_at(k, z, slack);
            chols.push(nalgebra::Cholesky::new(m)?);
        }
        let mut row_vals = Vec::with_capacity(self.rows.len());
        for r in &self.rows {
            let v = self.row_at(r, z, slack);
            if v <= 0.0 {
                return None;
            }
            row_vals.push(v);
        }
        Some(Cursor { chols, row_vals })
    }

    fn barrier_value(&self, cur: &Cursor) -> f64 {
        let mut val = 0.0;
        for ch in &cur.chols {
            // logdet = 2 sum log diag(L)
            let l = ch.l_dirty();
            for i in 0..l.nrows() {
                val -= 2.0 * l[(i, i)].ln();
            }
        }
        for &v in &cur.row_vals {
            val -= v.ln();
        }
        val
    }

    fn total_degree(&self) -> f64 {
        let b: usize = self.blocks.iter().map(|b| b.dim).sum();
        (b + self.rows.len()) as f64
    }

    /// Gradient and Hessian of the barrier in `(z, slack)` space.
    ///
    /// `with_slack` appends the slack coordinate (identity direction on
    /// every block and slacked row).
    fn barrier_derivs(
        &self,
        cur: &Cursor,
        with_slack: bool,
    ) -> (DVector<f64>, DMatrix<f64>) {
        let dim = self.m + usize::from(with_slack);
        let mut g = DVector::zeros(dim);
        let mut h = DMatrix::zeros(dim, dim);

        for (k, b) in self.blocks.iter().enumerate() {
            let n = b.dim;
            let l = cur.chols[k].l();
            // G = L^{-1}
            let ginv = l
                .solve_lower_triangular(&DMatrix::identity(n, n))
                .expect("triangular solve");
            // W_j = G A_j G^T, flattened; slack direction has A = I.
            let mut w = DMatrix::zeros(dim, n * n);
            for (j, trips) in b.a.iter().enumerate() {
                if trips.is_empty() {
                    continue;
                }
                let mut wj = DMatrix::zeros(n, n);
                for &(r, c, v) in trips {
                    let (r, c) = (r as usize, c as usize);
                    let gr = ginv.column(r);
                    let gc = ginv.column(c);
                    // v * (gr gc^T + gc gr^T) for off-diagonal, v * gr gr^T on the diagonal.
                    if r == c {
                        for p in 0..n {
                            let grp = gr[p] * v;
                            if grp == 0.0 {
                                continue;
                            }
                            for q in 0..n {
                                wj[(p, q)] += grp * gc[q];
                            }
                        }
                    } else {
                        for p in 0..n {
                            let grp = gr[p] * v;
                            let gcp = gc[p] * v;
                            for q in 0..n {
                                wj[(p, q)] += grp * gc[q] + gcp * gr[q];
                            }
                        }
                    }
                }
                g[j] -= wj.trace();
                w.row_mut(j).copy_from_slice(wj.as_slice());
            }
            if with_slack {
                // A = I: W = G G^T.
                let wj = &ginv * ginv.transpose();
                g[dim - 1] -= wj.trace();
                w.row_mut(dim - 1).copy_from_slice(wj.as_slice());
            }
            h.gemm(1.0, &w, &w.transpose(), 1.0);
        }

        for (ri, r) in self.rows.iter().enumerate() {
            let v = cur.row_vals[ri];
            let mut dir = DVector::zeros(dim);
            dir.rows_mut(0, self.m).copy_from(&r.a);
            if with_slack && r.slacked {
                dir[dim - 1] = 1.0;
            }
            g.axpy(-1.0 / v, &dir, 1.0);
            h.ger(1.0 / (v * v), &dir, &dir, 1.0);
        }
        (g, h)
    }
}

struct StageResult {
    z: DVector<f64>,
    slack: f64,
    newton_used: usize,
    decrement: f64,
}

/// Minimize `t * lin.(z, slack) + barrier` from a strictly interior start.
#[allow(clippy::too_many_arguments)]
fn center(
    red: &Reduced,
    mut z: DVector<f64>,
    mut slack: f64,
    with_slack: bool,
    lin: &DVector<f64>,
    t: f64,
    opts: &SdpOptions,
    stage_tol: f64,
) -> Result<StageResult, String> {
    let dim = red.m + usize::from(with_slack);
    let mut newton_used = 0;
    let mut decrement = f64::INFINITY;
    for _ in 0..opts.max_newton_per_stage {
        let cur = red
            .cursor(&z, if with_slack { slack } else { 0.0 })
            .ok_or("iterate left the interior")?;
        let (mut g, h) = red.barrier_derivs(&cur, with_slack);
        g.axpy(t, lin, 1.0);

        // Levenberg fallback for near-singular Hessians.
        let mut ridge = 0.0;
        let step = loop {
            let mut hr = h.clone();
            if ridge > 0.0 {
                for i in 0..dim {
                    hr[(i, i)] += ridge;
                }
            }
            match nalgebra::Cholesky::new(hr) {
                Some(ch) => break ch.solve(&(-&g)),
                None => {
                    ridge = if ridge == 0.0 { 1e-12 * (1.0 + h.trace().abs() / dim as f64) } else { ridge * 100.0 };
                    if ridge > 1e20 {
                        return Err("singular Newton system".into());
                    }
                }
            }
        };
        let dec2 = -g.dot(&step);
        decrement = dec2.max(0.0).sqrt();
        if decrement <= stage_tol {
            break;
        }

        // Largest interior step, then Armijo on the merit.
        let phi0 = t * lin.dot(
            &DVector::from_fn(dim, |i, _| if i < red.m { z[i] } else { slack }),
        ) + red.barrier_value(&cur);
        let mut alpha = 1.0f64;
        let mut accepted = false;
        for _ in 0..90 {
            let zc = &z + step.rows(0, red.m) * alpha;
            let sc = if with_slack { slack + alpha * step[dim - 1] } else { slack };
            if let Some(cur2) = red.cursor(&zc, if with_slack { sc } else { 0.0 }) {
                let phi = t * lin.dot(
                    &DVector::from_fn(dim, |i, _| if i < red.m { zc[i] } else { sc }),
                ) + red.barrier_value(&cur2);
                if phi <= phi0 - 0.01 * alpha * dec2 + 1e-12 * phi0.abs() {
                    z = zc;
                    slack = sc;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.6;
        }
        newton_used += 1;
        if !accepted {
            // No descent available: numerically centered.
            break;
        }
    }
    Ok(StageResult { z, slack, newton_used, decrement })
}

/// Solve the problem with the native barrier backend.
pub fn solve_sdp(p: &SdpProblem, opts: &SdpOptions) -> SdpSolution {
    let mut sol = SdpSolution {
        status: SdpStatus::NumericalFailure,
        x: vec![0.0; p.n_vars],
        objective: None,
        worst_min_eig: f64::NEG_INFINITY,
        worst_constraint: None,
        newton_iterations: 0,
        gap: f64::INFINITY,
    };

    let red = match reduce(p, opts) {
        Ok(r) => r,
        Err(e) => {
            if e.starts_with("inconsistent equality") {
                sol.status = SdpStatus::Infeasible;
                sol.worst_constraint = Some(e);
            } else {
                sol.worst_constraint = Some(e);
            }
            return sol;
        }
    };

    let finish = |mut sol: SdpSolution, red: &Reduced, z: &DVector<f64>| -> SdpSolution {
        let x = &red.x_part + &red.null * z;
        sol.x = x.iter().copied().collect();
        let mut worst = f64::INFINITY;
        let mut worst_name = None;
        for (c, name) in p.constraints.iter().zip(red.block_names.iter()) {
            let m = c.evaluate(&sol.x);
            if let Ok(e) = super::min_eig_sym(&m) {
                if e < worst {
                    worst = e;
                    worst_name = Some(name.clone());
                }
            }
        }
        if p.constraints.is_empty() {
            worst = f64::INFINITY;
        }
        sol.worst_min_eig = worst;
        sol.worst_constraint = worst_name;
        if let Some(obj) = &p.objective {
            sol.objective = Some(
                obj.constant + obj.terms.iter().map(|(v, c)| c * sol.x[v.0]).sum::<f64>(),
            );
        }
        sol
    };

    // Degenerate: no free coordinates left.
    if red.m == 0 {
        let z = DVector::zeros(0);
        sol = finish(sol, &red, &z);
        let feasible = sol.worst_min_eig >= -1e-12
            && red.rows.iter().all(|r| red.row_at(r, &z, 0.0) >= -1e-12);
        sol.status = if feasible {
            if p.objective.is_some() {
                SdpStatus::Optimal
            } else {
                SdpStatus::Feasible
            }
        } else {
            SdpStatus::Infeasible
        };
        sol.gap = 0.0;
        return sol;
    }

    // Phase 1: drive a uniform slack negative.
    let mut z = DVector::zeros(red.m);
    let start_margin = {
        let mut worst = f64::INFINITY;
        for k in 0..red.blocks.len() {
            let m = red.block_at(k, &z, 0.0);
            let e = super::min_eig_sym(&((&m + m.transpose()) * 0.5)).unwrap_or(f64::NEG_INFINITY);
            worst = worst.min(e);
        }
        for r in &red.rows {
            worst = worst.min(red.row_at(r, &z, 0.0));
        }
        worst
    };

    let mut total_newton = 0usize;
    let feas_target = 1e-9 * (1.0 + start_margin.abs());
    let mut slack = if start_margin > feas_target { 0.0 } else { 1.25 * start_margin.abs() + 0.1 };

    if slack > 0.0 {
        // Minimize the slack along the central path of the augmented problem.
        let mut lin = DVector::zeros(red.m + 1);
        lin[red.m] = 1.0;
        let mut t = 1.0;
        let mut done = false;
        for _ in 0..opts.max_outer {
            match center(&red, z.clone(), slack, true, &lin, t, opts, opts.centering_tol) {
                Ok(st) => {
                    z = st.z;
                    slack = st.slack;
                    total_newton += st.newton_used;
                }
                Err(e) => {
                    sol.worst_constraint = Some(format!("phase 1: {e}"));
                    sol.newton_iterations = total_newton;
                    return sol;
                }
            }
            if slack <= -feas_target {
                done = true;
                break;
            }
            // Certified infeasible once the centering gap cannot bridge to zero.
            let gap = (red.total_degree() + 1.0) / t;
            if slack - gap > 0.0 {
                sol.status = SdpStatus::Infeasible;
                sol = finish(sol, &red, &z);
                sol.status = SdpStatus::Infeasible;
                sol.newton_iterations = total_newton;
                sol.gap = gap;
                return sol;
            }
            t *= opts.mu;
        }
        if !done {
            sol = finish(sol, &red, &z);
            sol.status = SdpStatus::NumericalFailure;
            sol.worst_constraint =
                Some(format!("phase 1 stalled (slack {slack:.3e})"));
            sol.newton_iterations = total_newton;
            return sol;
        }
    }

    match &red.obj {
        None => {
            // Feasibility problem: maximize the uniform interior margin, which
            // yields a well-centered point.
            let mut lin = DVector::zeros(red.m + 1);
            lin[red.m] = 1.0;
            let mut t = 1.0;
            let mut gap = f64::INFINITY;
            for _ in 0..opts.max_outer {
                match center(&red, z.clone(), slack, true, &lin, t, opts, opts.centering_tol) {
                    Ok(st) => {
                        z = st.z;
                        slack = st.slack;
                        total_newton += st.newton_used;
                    }
                    Err(_) => break,
                }
                gap = (red.total_degree() + 1.0) / t;
                if gap < 1e-6 * (1.0 + slack.abs()) {
                    break;
                }
                t *= opts.mu;
            }
            sol = finish(sol, &red, &z);
            sol.status = SdpStatus::Feasible;
            sol.newton_iterations = total_newton;
            sol.gap = gap;
            sol
        }
        Some((c, k0, scale)) => {
            let mut lin = DVector::zeros(red.m);
            lin.copy_from(c);
            let mut t = 1.0;
            let mut gap;
            loop {
                match center(&red, z.clone(), 0.0, false, &lin, t, opts, opts.centering_tol) {
                    Ok(st) => {
                        z = st.z;
                        total_newton += st.newton_used;
                    }
                    Err(e) => {
                        sol = finish(sol, &red, &z);
                        sol.status = SdpStatus::NumericalFailure;
                        sol.worst_constraint = Some(format!("phase 2: {e}"));
                        sol.newton_iterations = total_newton;
                        return sol;
                    }
                }
                gap = red.total_degree() / t;
                let obj_scaled = lin.dot(&z);
                if gap <= opts.gap_tol * (1.0 + obj_scaled.abs()) {
                    break;
                }
                t *= opts.mu;
                if t > 1e18 || total_newton > opts.max_outer * opts.max_newton_per_stage {
                    break;
                }
            }
            // Final polish at fixed t.
            if let Ok(st) = center(&red, z.clone(), 0.0, false, &lin, t, opts, 1e-6) {
                z = st.z;
                total_newton += st.newton_used;
            }
            sol = finish(sol, &red, &z);
            sol.status = SdpStatus::Optimal;
            sol.newton_iterations = total_newton;
            sol.gap = gap * scale;
            let _ = k0;
            sol
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::{verify_solution, LinExpr, LmiBuilder};

    #[test]
    fn psd_2x2_minimum() {
        // min x s.t. [[x, 1], [1, x]] >= 0  =>  x* = 1.
        let mut p = SdpProblem::new();
        let x = p.scalar("x");
        let mut b = LmiBuilder::new("m", 2);
        b.add_term(0, 0, x, 1.0);
        b.add_term(1, 1, x, 1.0);
        b.add_const(0, 1, 1.0);
        b.add_const(1, 0, 1.0);
        p.lmi(b).unwrap();
        p.minimize(LinExpr::var(x));
        let sol = solve_sdp(&p, &SdpOptions::default());
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.value(x) - 1.0).abs() < 1e-6, "x = {}", sol.value(x));
        assert!(verify_solution(&p, &sol, 1e-7).passed);
    }

    #[test]
    fn strict_feasibility_with_shift() {
        // x * I2 >= 1e-6 * I is feasible with any x >= 1e-6.
        let mut p = SdpProblem::new();
        let x = p.scalar("x");
        let mut b = LmiBuilder::new("m", 2);
        b.add_term(0, 0, x, 1.0);
        b.add_term(1, 1, x, 1.0);
        b.add_identity_shift(-1e-6);
        p.lmi(b).unwrap();
        let sol = solve_sdp(&p, &SdpOptions::default());
        assert_eq!(sol.status, SdpStatus::Feasible);
        assert!(sol.value(x) >= 1e-6);
        assert!(verify_solution(&p, &sol, 1e-7).passed);
    }

    #[test]
    fn detects_infeasibility() {
        // x >= 1 and -x - 1 >= 0 cannot both hold.
        let mut p = SdpProblem::new();
        let x = p.scalar("x");
        let mut b = LmiBuilder::new("lower", 1);
        b.add_term(0, 0, x, 1.0);
        b.add_const(0, 0, -1.0);
        p.lmi(b).unwrap();
        let mut b = LmiBuilder::new("upper", 1);
        b.add_term(0, 0, x, -1.0);
        b.add_const(0, 0, -1.0);
        p.lmi(b).unwrap();
        let sol = solve_sdp(&p, &SdpOptions::default());
        assert_eq!(sol.status, SdpStatus::Infeasible);
    }

    #[test]
    fn equality_elimination() {
        // min x + y s.t. x - y = 1, x >= 0, y >= 0  =>  (1, 0).
        let mut p = SdpProblem::new();
        let x = p.scalar("x");
        let y = p.scalar("y");
        p.equality("sum", LinExpr::constant(-1.0).plus_term(x, 1.0).plus_term(y, -1.0));
        p.nonneg("x>=0", LinExpr::var(x));
        p.nonneg("y>=0", LinExpr::var(y));
        p.minimize(LinExpr::var(x).plus_term(y, 1.0));
        let sol = solve_sdp(&p, &SdpOptions::default());
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.value(x) - 1.0).abs() < 1e-5);
        assert!(sol.value(y).abs() < 1e-5);
        assert!(verify_solution(&p, &sol, 1e-7).passed);
    }

    fn line_lmi_problem(r: f64, l: f64, omega0: f64) -> (SdpProblem, crate::sdp::MatVar, crate::sdp::VarId, crate::sdp::VarId) {
        use nalgebra::DMatrix;
        let mut p = SdpProblem::new();
        let pm = p.sym_matrix("P", 2, None);
        let nu = p.scalar("nu");
        let rho = p.scalar("rho");
        let a = DMatrix::from_row_slice(2, 2, &[-r / l, omega0, -omega0, -r / l]);
        let bm = DMatrix::from_diagonal_element(2, 2, 1.0 / l);
        let eye = DMatrix::identity(2, 2);

        let mut b = LmiBuilder::new("line-passivity", 4);
        // (0,0): -H(P A) - rho I
        b.add_product(0, 0, &eye, &pm, &a, -1.0);
        b.add_product(0, 0, &a.transpose(), &pm, &eye, -1.0);
        b.add_term(0, 0, rho, -1.0);
        b.add_term(1, 1, rho, -1.0);
        // (0,2): -P B + I/2, mirrored
        b.add_product(0, 2, &eye, &pm, &bm, -1.0);
        b.add_product(2, 0, &bm.transpose(), &pm, &eye, -1.0);
        b.add_const_block(0, 2, &(eye.clone() * 0.5));
        b.add_const_block(2, 0, &(eye.clone() * 0.5));
        // (2,2): -nu I
        b.add_term(2, 2, nu, -1.0);
        b.add_term(3, 3, nu, -1.0);
        p.lmi(b).unwrap();

        let mut b = LmiBuilder::new("P-pd", 2);
        b.add_matvar(0, 0, &pm, 1.0, false);
        b.add_identity_shift(-1e-9);
        p.lmi(b).unwrap();
        p.nonneg("nu<=0", LinExpr::scaled(nu, -1.0));
        (p, pm, nu, rho)
    }

    #[test]
    fn line_passivity_maximum_matches_closed_form() {
        // max rho over the RL-line LMI lands on rho = R with P = L/2 * I.
        let (mut p, pm, _nu, rho) = line_lmi_problem(0.05, 0.002, 377.0);
        p.minimize(LinExpr::scaled(rho, -1.0));
        let sol = solve_sdp(&p, &SdpOptions::default());
        assert_eq!(sol.status, SdpStatus::Optimal);
        let rho_star = sol.value(rho);
        assert!((rho_star - 0.05).abs() <= 1e-6 * 0.05, "rho* = {rho_star}");
        let pv = sol.matrix_value(&pm);
        assert!((pv[(0, 0)] - 0.001).abs() < 1e-5);
        assert!((pv[(1, 1)] - 0.001).abs() < 1e-5);
        assert!(pv[(0, 1)].abs() < 1e-5);
        assert!(verify_solution(&p, &sol, 1e-7).passed);
    }

    #[test]
    fn objective_scaling_leaves_argmin() {
        let (mut p1, _, _, rho) = line_lmi_problem(0.11, 0.0007, 377.0);
        p1.minimize(LinExpr::scaled(rho, -1.0));
        let s1 = solve_sdp(&p1, &SdpOptions::default());
        let (mut p2, _, _, rho2) = line_lmi_problem(0.11, 0.0007, 377.0);
        p2.minimize(LinExpr::scaled(rho2, -10.0));
        let s2 = solve_sdp(&p2, &SdpOptions::default());
        assert!((s1.value(rho) - s2.value(rho2)).abs() < 1e-6 * (1.0 + s1.value(rho).abs()));
    }

    #[test]
    fn feasibility_point_is_interior() {
        let (p, _, _, _) = line_lmi_problem(0.05, 0.002, 377.0);
        let sol = solve_sdp(&p, &SdpOptions::default());
        assert_eq!(sol.status, SdpStatus::Feasible);
        assert!(sol.worst_min_eig > 0.0);
        assert!(verify_solution(&p, &sol, 1e-7).passed);
    }
}
