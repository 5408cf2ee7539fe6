//! Sweep output does not depend on scheduling.

use rabi_core::io::csv::records_to_string;
use rabi_core::{run_sweep, Execution, GridAxis, Method, SolverConfig, SweepSpec};

fn spec(method: Method) -> SweepSpec {
    SweepSpec {
        delta: GridAxis::new(0.2, 6.0, 7).unwrap(),
        g: GridAxis::new(0.3, 2.5, 6).unwrap(),
        method,
        solver: SolverConfig::default(),
    }
}

#[test]
fn worker_count_does_not_change_bits() {
    let s = spec(Method::Spectral);
    let reference = records_to_string(&run_sweep(&s, Execution::Sequential).unwrap()).unwrap();
    for workers in [1, 2, 3, 8] {
        let out = records_to_string(&run_sweep(&s, Execution::Parallel { workers }).unwrap()).unwrap();
        assert_eq!(out, reference, "{workers} workers");
    }
}

#[test]
fn oracle_sweep_is_deterministic_too() {
    let s = SweepSpec {
        delta: GridAxis::new(0.5, 2.0, 3).unwrap(),
        g: GridAxis::new(0.5, 1.5, 3).unwrap(),
        ..spec(Method::Oracle)
    };
    let a = run_sweep(&s, Execution::Sequential).unwrap();
    let b = run_sweep(&s, Execution::Parallel { workers: 4 }).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|r| r.error.is_none()));
}

#[test]
fn sweep_matches_pointwise_solves() {
    let s = spec(Method::Spectral);
    let records = run_sweep(&s, Execution::default()).unwrap();
    assert_eq!(records.len(), 42);
    for r in records.iter().step_by(5) {
        let p = rabi_core::RabiParams::normalized(r.delta, r.g).unwrap();
        let sol = rabi_core::solve_point(&p, &s.solver).unwrap();
        assert_eq!(r.stats, Some(sol.stats));
        assert_eq!(r.truncation_n, Some(sol.truncation_n()));
    }
}
