//! Microgrid data model: generator, line, and load parameter records, the
//! incidence structure of the physical graph, and the raw state-space matrices
//! of every subsystem.
//!
//! Conventions:
//! - All values are SI; the nominal frequency defaults to `2*pi*60` rad/s.
//! - Node ids are strings; matrix row/column order is the declaration order in
//!   the config, so every downstream index is reproducible.
//! - Each line connects exactly two distinct DG/load nodes. Its incidence
//!   column carries `+1` at the head (current leaves) and `-1` at the tail.
//!
//! The augmented per-DG state is
//! `x_i = [V_d, V_q, It_d, It_q, v_d, v_q, w~]` (PCC voltage, filter current,
//! voltage-error integral, frequency error); lines carry `[I_d, I_q]` and load
//! buses `[V_d, V_q]`.

use crate::dq::DqValue;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DG_STATE_DIM: usize = 7;
pub const LINE_STATE_DIM: usize = 2;
pub const LOAD_STATE_DIM: usize = 2;
/// DG port input `[u_P, u_Q, u_Omega, xi_d, xi_q, w_1..w_7]`.
pub const DG_INPUT_DIM: usize = 12;
/// DG port output `[V_d, V_q, P, Q]`.
pub const DG_OUTPUT_DIM: usize = 4;

/// Inverter-interfaced generator with RLC output filter and local ZIP load
/// (constant-power component fixed to zero).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgParams {
    pub id: String,
    /// Filter resistance (ohm).
    #[serde(rename = "R_t")]
    pub r_t: f64,
    /// Filter inductance (henry).
    #[serde(rename = "L_t")]
    pub l_t: f64,
    /// Filter capacitance (farad).
    #[serde(rename = "C_t")]
    pub c_t: f64,
    /// Local constant-impedance load admittance (siemens).
    #[serde(rename = "Y_L")]
    pub y_l: f64,
    /// Local constant-current load (ampere, dq).
    #[serde(rename = "I_L_bar")]
    pub i_l_bar: DqValue,
    /// Frequency-loop time constant (seconds).
    pub tau: f64,
    /// Active power rating (watt).
    #[serde(rename = "P_max")]
    pub p_max: f64,
    /// Reactive power rating (var).
    #[serde(rename = "Q_max")]
    pub q_max: f64,
}

/// RL distribution line between two DG/load nodes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineParams {
    pub id: String,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "L")]
    pub l: f64,
    /// Head node id (incidence +1; positive current leaves this node).
    pub from: String,
    /// Tail node id (incidence -1).
    pub to: String,
}

/// Bus load: filter capacitance plus ZIP components (constant power omitted).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadParams {
    pub id: String,
    #[serde(rename = "C_t")]
    pub c_t: f64,
    /// Constant-impedance admittance (siemens). Strictly positive so the bus
    /// keeps a positive output passivity index.
    #[serde(rename = "Y_L")]
    pub y_l: f64,
    #[serde(rename = "I_L_bar")]
    pub i_l_bar: DqValue,
}

/// Full plant description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MgNetwork {
    /// Nominal electrical frequency (rad/s).
    pub omega0: f64,
    pub dgs: Vec<DgParams>,
    pub loads: Vec<LoadParams>,
    pub lines: Vec<LineParams>,
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("dg `{id}`: {what} must be {cond} (got {got})")]
    DgParam { id: String, what: &'static str, cond: &'static str, got: f64 },
    #[error("line `{id}`: {what} must be {cond} (got {got})")]
    LineParam { id: String, what: &'static str, cond: &'static str, got: f64 },
    #[error("load `{id}`: {what} must be {cond} (got {got})")]
    LoadParam { id: String, what: &'static str, cond: &'static str, got: f64 },
    #[error("line `{line}` endpoint `{node}` is not a declared DG or load node")]
    DanglingEndpoint { line: String, node: String },
    #[error("line `{line}` connects node `{node}` to itself")]
    SelfLoop { line: String, node: String },
    #[error("duplicate node or line id `{0}`")]
    DuplicateId(String),
    #[error("non-finite value in dg `{id}` field {what}")]
    NonFinite { id: String, what: &'static str },
    #[error("physical graph is not connected (node `{0}` unreachable)")]
    Disconnected(String),
    #[error("omega0 must be finite and positive (got {0})")]
    BadOmega0(f64),
}

/// Incidence matrices of the physical graph.
///
/// `b` is (N+M) x L over DG rows then load rows; `b_d` and `b_l` are the two
/// row partitions. Every column has exactly one `+1` and one `-1`.
#[derive(Debug, Clone)]
pub struct Incidence {
    pub b: DMatrix<f64>,
    pub b_d: DMatrix<f64>,
    pub b_l: DMatrix<f64>,
}

/// Endpoint of a line, resolved to the node ordering of the config.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRef {
    Dg(usize),
    Load(usize),
}

impl MgNetwork {
    pub fn n_dgs(&self) -> usize {
        self.dgs.len()
    }
    pub fn n_loads(&self) -> usize {
        self.loads.len()
    }
    pub fn n_lines(&self) -> usize {
        self.lines.len()
    }

    /// Parse a network config document and validate all invariants.
    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        let net: MgNetwork = serde_json::from_str(text)?;
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<(), NetworkError> {
        if !(self.omega0.is_finite() && self.omega0 > 0.0) {
            return Err(NetworkError::BadOmega0(self.omega0));
        }
        let mut seen = std::collections::BTreeSet::new();
        for dg in &self.dgs {
            if !seen.insert(dg.id.clone()) {
                return Err(NetworkError::DuplicateId(dg.id.clone()));
            }
            dg.validate()?;
        }
        for load in &self.loads {
            if !seen.insert(load.id.clone()) {
                return Err(NetworkError::DuplicateId(load.id.clone()));
            }
            load.validate()?;
        }
        let mut line_ids = std::collections::BTreeSet::new();
        for line in &self.lines {
            if !line_ids.insert(line.id.clone()) {
                return Err(NetworkError::DuplicateId(line.id.clone()));
            }
            line.validate()?;
            for node in [&line.from, &line.to] {
                if self.node_ref(node).is_none() {
                    return Err(NetworkError::DanglingEndpoint {
                        line: line.id.clone(),
                        node: node.clone(),
                    });
                }
            }
            if line.from == line.to {
                return Err(NetworkError::SelfLoop {
                    line: line.id.clone(),
                    node: line.from.clone(),
                });
            }
        }
        self.check_connected()?;
        Ok(())
    }

    /// Resolve a node id to its (kind, declaration index).
    pub fn node_ref(&self, id: &str) -> Option<NodeRef> {
        if let Some(i) = self.dgs.iter().position(|d| d.id == id) {
            return Some(NodeRef::Dg(i));
        }
        self.loads.iter().position(|l| l.id == id).map(NodeRef::Load)
    }

    /// Row index of a node in the stacked (DG rows, then load rows) ordering.
    fn node_row(&self, r: NodeRef) -> usize {
        match r {
            NodeRef::Dg(i) => i,
            NodeRef::Load(m) => self.n_dgs() + m,
        }
    }

    fn check_connected(&self) -> Result<(), NetworkError> {
        let n_nodes = self.n_dgs() + self.n_loads();
        if n_nodes <= 1 {
            return Ok(());
        }
        let mut adj = vec![Vec::new(); n_nodes];
        for line in &self.lines {
            let a = self.node_row(self.node_ref(&line.from).unwrap());
            let b = self.node_row(self.node_ref(&line.to).unwrap());
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut visited = vec![false; n_nodes];
        let mut stack = vec![0usize];
        visited[0] = true;
        while let Some(k) = stack.pop() {
            for &n in &adj[k] {
                if !visited[n] {
                    visited[n] = true;
                    stack.push(n);
                }
            }
        }
        if let Some(k) = visited.iter().position(|v| !v) {
            let id = if k < self.n_dgs() {
                self.dgs[k].id.clone()
            } else {
                self.loads[k - self.n_dgs()].id.clone()
            };
            return Err(NetworkError::Disconnected(id));
        }
        Ok(())
    }

    /// Build the incidence matrices `(B, B_D, B_L)`.
    pub fn incidence(&self) -> Result<Incidence, NetworkError> {
        let (n, m, l) = (self.n_dgs(), self.n_loads(), self.n_lines());
        let mut b = DMatrix::zeros(n + m, l);
        for (col, line) in self.lines.iter().enumerate() {
            let from = self.node_ref(&line.from).ok_or_else(|| NetworkError::DanglingEndpoint {
                line: line.id.clone(),
                node: line.from.clone(),
            })?;
            let to = self.node_ref(&line.to).ok_or_else(|| NetworkError::DanglingEndpoint {
                line: line.id.clone(),
                node: line.to.clone(),
            })?;
            if line.from == line.to {
                return Err(NetworkError::SelfLoop {
                    line: line.id.clone(),
                    node: line.from.clone(),
                });
            }
            b[(self.node_row(from), col)] = 1.0;
            b[(self.node_row(to), col)] = -1.0;
        }
        let b_d = b.rows(0, n).into_owned();
        let b_l = b.rows(n, m).into_owned();
        Ok(Incidence { b, b_d, b_l })
    }
}

impl DgParams {
    fn validate(&self) -> Result<(), NetworkError> {
        let checks: [(&'static str, f64, bool); 6] = [
            ("R_t", self.r_t, self.r_t > 0.0),
            ("L_t", self.l_t, self.l_t > 0.0),
            ("C_t", self.c_t, self.c_t > 0.0),
            ("tau", self.tau, self.tau > 0.0),
            ("P_max", self.p_max, self.p_max > 0.0),
            ("Q_max", self.q_max, self.q_max > 0.0),
        ];
        for (what, got, ok) in checks {
            if !got.is_finite() {
                return Err(NetworkError::NonFinite { id: self.id.clone(), what });
            }
            if !ok {
                return Err(NetworkError::DgParam { id: self.id.clone(), what, cond: "> 0", got });
            }
        }
        if !(self.y_l.is_finite() && self.y_l >= 0.0) {
            return Err(NetworkError::DgParam {
                id: self.id.clone(),
                what: "Y_L",
                cond: ">= 0",
                got: self.y_l,
            });
        }
        if !self.i_l_bar.is_finite() {
            return Err(NetworkError::NonFinite { id: self.id.clone(), what: "I_L_bar" });
        }
        Ok(())
    }

    /// Open-loop system matrices `(A, B, E, F)` of the augmented DG.
    ///
    /// Rows of `A`: capacitor KCL (x2), inductor KVL (x2), voltage-error
    /// integrator (x2), frequency loop. `B` routes `(u_Vd, u_Vq, u_Omega)`,
    /// `E` the exogenous channel, and `F` the net line-current injection.
    pub fn state_matrices(
        &self,
        omega0: f64,
    ) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let (ct, lt, rt, yl, tau) = (self.c_t, self.l_t, self.r_t, self.y_l, self.tau);
        let mut a = DMatrix::zeros(7, 7);
        a[(0, 0)] = -yl / ct;
        a[(0, 1)] = omega0;
        a[(0, 2)] = 1.0 / ct;
        a[(1, 0)] = -omega0;
        a[(1, 1)] = -yl / ct;
        a[(1, 3)] = 1.0 / ct;
        a[(2, 0)] = -1.0 / lt;
        a[(2, 2)] = -rt / lt;
        a[(2, 3)] = omega0;
        a[(3, 1)] = -1.0 / lt;
        a[(3, 2)] = -omega0;
        a[(3, 3)] = -rt / lt;
        a[(4, 0)] = 1.0;
        a[(5, 1)] = 1.0;
        a[(6, 6)] = -1.0 / tau;

        let mut b = DMatrix::zeros(7, 3);
        b[(2, 0)] = 1.0 / lt;
        b[(3, 1)] = 1.0 / lt;
        b[(6, 2)] = 1.0 / tau;

        let e = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            1.0 / ct,
            1.0 / ct,
            1.0 / lt,
            1.0 / lt,
            1.0,
            1.0,
            1.0 / tau,
        ]));

        let mut f = DMatrix::zeros(7, 2);
        f[(0, 0)] = -1.0 / ct;
        f[(1, 1)] = -1.0 / ct;

        (a, b, e, f)
    }
}

impl LineParams {
    fn validate(&self) -> Result<(), NetworkError> {
        for (what, got) in [("R", self.r), ("L", self.l)] {
            if !(got.is_finite() && got > 0.0) {
                return Err(NetworkError::LineParam { id: self.id.clone(), what, cond: "> 0", got });
            }
        }
        Ok(())
    }

    /// RL line state matrices `(A_bar, B_bar)`.
    pub fn state_matrices(&self, omega0: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let rl = self.r / self.l;
        let a = DMatrix::from_row_slice(2, 2, &[-rl, omega0, -omega0, -rl]);
        let b = DMatrix::from_diagonal_element(2, 2, 1.0 / self.l);
        (a, b)
    }
}

impl LoadParams {
    fn validate(&self) -> Result<(), NetworkError> {
        if !(self.c_t.is_finite() && self.c_t > 0.0) {
            return Err(NetworkError::LoadParam {
                id: self.id.clone(),
                what: "C_t",
                cond: "> 0",
                got: self.c_t,
            });
        }
        // Strict: the bus output passivity index equals Y_L.
        if !(self.y_l.is_finite() && self.y_l > 0.0) {
            return Err(NetworkError::LoadParam {
                id: self.id.clone(),
                what: "Y_L",
                cond: "> 0",
                got: self.y_l,
            });
        }
        if !self.i_l_bar.is_finite() {
            return Err(NetworkError::NonFinite { id: self.id.clone(), what: "I_L_bar" });
        }
        Ok(())
    }

    /// Load bus state matrices `(A_check, B_check)`.
    pub fn state_matrices(&self, omega0: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let yc = self.y_l / self.c_t;
        let a = DMatrix::from_row_slice(2, 2, &[-yc, omega0, -omega0, -yc]);
        let b = DMatrix::from_diagonal_element(2, 2, -1.0 / self.c_t);
        (a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dg(id: &str) -> DgParams {
        DgParams {
            id: id.to_string(),
            r_t: 0.2,
            l_t: 0.01,
            c_t: 2.2e-3,
            y_l: 0.05,
            i_l_bar: DqValue::ZERO,
            tau: 0.05,
            p_max: 1e4,
            q_max: 5e3,
        }
    }

    fn load(id: &str) -> LoadParams {
        LoadParams { id: id.to_string(), c_t: 0.01, y_l: 0.5, i_l_bar: DqValue::new(1.0, 0.0) }
    }

    fn line(id: &str, from: &str, to: &str) -> LineParams {
        LineParams { id: id.to_string(), r: 0.05, l: 0.002, from: from.into(), to: to.into() }
    }

    #[test]
    fn incidence_single_edge() {
        let net = MgNetwork {
            omega0: 377.0,
            dgs: vec![dg("g1")],
            loads: vec![load("b1")],
            lines: vec![line("l1", "g1", "b1")],
        };
        net.validate().unwrap();
        let inc = net.incidence().unwrap();
        assert_eq!(inc.b, DMatrix::from_column_slice(2, 1, &[1.0, -1.0]));
        assert_eq!(inc.b_d, DMatrix::from_element(1, 1, 1.0));
        assert_eq!(inc.b_l, DMatrix::from_element(1, 1, -1.0));
    }

    #[test]
    fn incidence_two_dg_star() {
        let net = MgNetwork {
            omega0: 377.0,
            dgs: vec![dg("g1"), dg("g2")],
            loads: vec![load("b1")],
            lines: vec![line("l1", "g1", "b1"), line("l2", "g2", "b1")],
        };
        let inc = net.incidence().unwrap();
        assert_eq!(inc.b_d, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]));
        assert_eq!(inc.b_l, DMatrix::from_row_slice(1, 2, &[-1.0, -1.0]));
    }

    #[test]
    fn incidence_partition_and_column_sums_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xb1d);
        for _ in 0..25 {
            let n = rng.random_range(1..5usize);
            let m = rng.random_range(0..3usize);
            let net = crate::presets::random_connected(&mut rng, n, m);
            let inc = net.incidence().unwrap();
            for c in 0..net.n_lines() {
                assert_eq!(inc.b.column(c).sum(), 0.0);
            }
            let stacked = DMatrix::from_fn(n + m, net.n_lines(), |r, c| {
                if r < n {
                    inc.b_d[(r, c)]
                } else {
                    inc.b_l[(r - n, c)]
                }
            });
            assert_eq!(stacked, inc.b);
        }
    }

    #[test]
    fn dangling_and_self_loop_rejected() {
        let mut net = MgNetwork {
            omega0: 377.0,
            dgs: vec![dg("g1")],
            loads: vec![load("b1")],
            lines: vec![line("l1", "g1", "nope")],
        };
        assert!(matches!(net.validate(), Err(NetworkError::DanglingEndpoint { .. })));
        net.lines[0].to = "g1".into();
        assert!(matches!(net.validate(), Err(NetworkError::SelfLoop { .. })));
    }

    #[test]
    fn dg_matrix_entries_match_printed_form() {
        let d = dg("g1");
        let w0 = 2.0 * std::f64::consts::PI * 60.0;
        let (a, b, e, f) = d.state_matrices(w0);
        assert_eq!(a[(0, 1)], w0);
        assert_eq!(a[(1, 0)], -w0);
        assert_eq!(a[(6, 6)], -1.0 / d.tau);
        assert_eq!(b[(6, 2)], 1.0 / d.tau);
        // E diagonal positive definite, F^T F = I / C_t^2.
        for i in 0..7 {
            assert!(e[(i, i)] > 0.0);
        }
        let scale = 1.0 / (d.c_t * d.c_t);
        let ftf = f.transpose() * &f;
        assert!((ftf - DMatrix::from_diagonal_element(2, 2, scale)).norm() < 1e-12 * scale);
    }

    #[test]
    fn dg_matrix_unit_parameters() {
        let d = DgParams {
            id: "u".into(),
            r_t: 1.0,
            l_t: 1.0,
            c_t: 1.0,
            y_l: 0.0,
            i_l_bar: DqValue::ZERO,
            tau: 1.0,
            p_max: 1.0,
            q_max: 1.0,
        };
        let (a, _, _, _) = d.state_matrices(0.0);
        let expect = DMatrix::from_row_slice(
            7,
            7,
            &[
                0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, //
                -1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, //
                0.0, -1.0, 0.0, -1.0, 0.0, 0.0, 0.0, //
                1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0,
            ],
        );
        assert_eq!(a, expect);
    }

    #[test]
    fn line_matrices() {
        let l = LineParams { id: "l".into(), r: 1.0, l: 1.0, from: "a".into(), to: "b".into() };
        let (a, b) = l.state_matrices(0.0);
        assert_eq!(a, -DMatrix::identity(2, 2));
        assert_eq!(b, DMatrix::identity(2, 2));

        let l = LineParams { id: "l".into(), r: 0.05, l: 0.002, from: "a".into(), to: "b".into() };
        let (a, b) = l.state_matrices(377.0);
        assert_eq!(a, DMatrix::from_row_slice(2, 2, &[-25.0, 377.0, -377.0, -25.0]));
        // B_bar is symmetric positive definite (diagonal 1/L).
        assert!(b[(0, 0)] > 0.0 && b[(0, 1)] == 0.0);
    }

    #[test]
    fn load_matrices() {
        let m = LoadParams { id: "m".into(), c_t: 1.0, y_l: 1.0, i_l_bar: DqValue::ZERO };
        let (a, b) = m.state_matrices(0.0);
        assert_eq!(a, -DMatrix::identity(2, 2));
        assert_eq!(b, -DMatrix::identity(2, 2));

        let m = LoadParams { id: "m".into(), c_t: 0.01, y_l: 0.5, i_l_bar: DqValue::ZERO };
        let (a, _) = m.state_matrices(377.0);
        assert_eq!(a, DMatrix::from_row_slice(2, 2, &[-50.0, 377.0, -377.0, -50.0]));
        assert!((a.trace() - (-2.0 * m.y_l / m.c_t)).abs() < 1e-12);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let text = r#"{
            "omega0": 377.0,
            "dgs": [{"id":"g1","R_t":0.2,"L_t":0.01,"C_t":0.0022,"Y_L":0.05,
                     "I_L_bar":{"d":0.0,"q":0.0},"tau":0.05,"P_max":1e4,"Q_max":5e3,
                     "P_constant": 5.0}],
            "loads": [],
            "lines": []
        }"#;
        assert!(MgNetwork::from_json(text).is_err());
    }

    #[test]
    fn config_round_trip() {
        let text = r#"{
            "omega0": 376.99111843077515,
            "dgs": [{"id":"g1","R_t":0.2,"L_t":0.01,"C_t":0.0022,"Y_L":0.05,
                     "I_L_bar":{"d":1.0,"q":0.0},"tau":0.05,"P_max":1e4,"Q_max":5e3}],
            "loads": [{"id":"b1","C_t":0.01,"Y_L":0.5,"I_L_bar":{"d":2.0,"q":0.0}}],
            "lines": [{"id":"l1","R":0.05,"L":0.002,"from":"g1","to":"b1"}]
        }"#;
        let net = MgNetwork::from_json(text).unwrap();
        assert_eq!(net.n_dgs(), 1);
        assert_eq!(net.lines[0].from, "g1");
        let back = serde_json::to_string(&net).unwrap();
        let net2 = MgNetwork::from_json(&back).unwrap();
        assert_eq!(net2.dgs[0].c_t, net.dgs[0].c_t);
    }
}
