//! Ready-made networks: the shipped demos and a randomized generator for
//! property tests.

use crate::dq::DqValue;
use crate::network::{DgParams, LineParams, LoadParams, MgNetwork};
use rand::Rng;

pub const OMEGA0_60HZ: f64 = 2.0 * std::f64::consts::PI * 60.0;

fn demo_dg(id: &str) -> DgParams {
    DgParams {
        id: id.to_string(),
        r_t: 0.1,
        l_t: 1.8e-3,
        c_t: 2.5e-5,
        y_l: 0.02,
        i_l_bar: DqValue::new(2.0, 0.0),
        tau: 0.05,
        p_max: 1.2e4,
        q_max: 6.0e3,
    }
}

/// Three identical DGs feeding one common load bus over identical lines.
///
/// The symmetry makes proportional sharing hold exactly at every operating
/// point, which is what the closed-loop demo scenarios exercise.
pub fn three_dg_star() -> MgNetwork {
    MgNetwork {
        omega0: OMEGA0_60HZ,
        dgs: vec![demo_dg("dg1"), demo_dg("dg2"), demo_dg("dg3")],
        loads: vec![LoadParams {
            id: "bus1".to_string(),
            c_t: 2.0e-5,
            y_l: 0.05,
            i_l_bar: DqValue::new(10.0, 0.0),
        }],
        lines: vec![
            LineParams { id: "ln1".into(), r: 0.08, l: 8.0e-4, from: "dg1".into(), to: "bus1".into() },
            LineParams { id: "ln2".into(), r: 0.08, l: 8.0e-4, from: "dg2".into(), to: "bus1".into() },
            LineParams { id: "ln3".into(), r: 0.08, l: 8.0e-4, from: "dg3".into(), to: "bus1".into() },
        ],
    }
}

/// Two identical DGs joined by a single line through a load bus.
pub fn two_dg_one_load() -> MgNetwork {
    MgNetwork {
        omega0: OMEGA0_60HZ,
        dgs: vec![demo_dg("dg1"), demo_dg("dg2")],
        loads: vec![LoadParams {
            id: "bus1".to_string(),
            c_t: 2.0e-5,
            y_l: 0.05,
            i_l_bar: DqValue::new(8.0, 0.0),
        }],
        lines: vec![
            LineParams { id: "ln1".into(), r: 0.08, l: 8.0e-4, from: "dg1".into(), to: "bus1".into() },
            LineParams { id: "ln2".into(), r: 0.08, l: 8.0e-4, from: "dg2".into(), to: "bus1".into() },
        ],
    }
}

/// The single-DG configuration used by the local synthesis examples.
pub fn bench_dg() -> DgParams {
    DgParams {
        id: "dg1".to_string(),
        r_t: 0.2,
        l_t: 0.01,
        c_t: 2.2e-3,
        y_l: 0.05,
        i_l_bar: DqValue::ZERO,
        tau: 0.05,
        p_max: 1.0e4,
        q_max: 5.0e3,
    }
}

/// Random connected network with `n` DGs and `m` load buses.
///
/// Every non-first node gets one line to a random earlier node (spanning
/// tree), then a few extra lines are sprinkled in; orientations are random.
pub fn random_connected<R: Rng>(rng: &mut R, n: usize, m: usize) -> MgNetwork {
    assert!(n >= 1);
    let mut dgs = Vec::new();
    for i in 0..n {
        dgs.push(DgParams {
            id: format!("dg{}", i + 1),
            r_t: rng.random_range(0.05..0.3),
            l_t: rng.random_range(5e-4..5e-3),
            c_t: rng.random_range(1e-5..1e-4),
            y_l: rng.random_range(0.0..0.1),
            i_l_bar: DqValue::new(rng.random_range(-5.0..5.0), rng.random_range(-2.0..2.0)),
            tau: rng.random_range(0.02..0.1),
            p_max: rng.random_range(5e3..2e4),
            q_max: rng.random_range(2e3..1e4),
        });
    }
    let mut loads = Vec::new();
    for i in 0..m {
        loads.push(LoadParams {
            id: format!("bus{}", i + 1),
            c_t: rng.random_range(1e-5..1e-4),
            y_l: rng.random_range(0.02..0.5),
            i_l_bar: DqValue::new(rng.random_range(-10.0..10.0), rng.random_range(-3.0..3.0)),
        });
    }

    let ids: Vec<String> =
        dgs.iter().map(|d| d.id.clone()).chain(loads.iter().map(|l| l.id.clone())).collect();
    let mut lines = Vec::new();
    let add_line = |rng: &mut R, lines: &mut Vec<LineParams>, a: usize, b: usize| {
        let (from, to) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
        lines.push(LineParams {
            id: format!("ln{}", lines.len() + 1),
            r: rng.random_range(0.02..0.2),
            l: rng.random_range(2e-4..2e-3),
            from: ids[from].clone(),
            to: ids[to].clone(),
        });
    };
    for k in 1..ids.len() {
        let other = rng.random_range(0..k);
        add_line(rng, &mut lines, k, other);
    }
    // Occasionally close a mesh loop.
    if ids.len() >= 3 && rng.random_bool(0.3) {
        let a = rng.random_range(0..ids.len());
        let b = (a + 1 + rng.random_range(0..ids.len() - 1)) % ids.len();
        if a != b {
            add_line(rng, &mut lines, a, b);
        }
    }

    MgNetwork { omega0: OMEGA0_60HZ, dgs, loads, lines }
}
