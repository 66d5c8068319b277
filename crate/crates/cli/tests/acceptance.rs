//! Acceptance suite: prints one line per criterion and exits non-zero if any is not a pass.
//!
//! Criteria 8 and 9 draw their cases from proptest strategies with a fixed-seed runner.

use ppconv::checks::{self, Check, DesignCase, Evidence, Status};
use ppconv_core::analytic::waveforms;
use ppconv_core::*;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

fn params() -> impl Strategy<Value = ConverterParams> {
    (0.55..0.74f64, 20e3..80e3f64, 4.0..10.0f64, 2.0..12.0f64, 2.0..12.0f64, 30e-6..150e-6f64, 0.0..1e-9f64).prop_map(
        |(d, fs, n, r1, r2, llk, csn)| ConverterParams {
            d,
            fs,
            n,
            r1,
            r2,
            llk1: llk,
            llk2: llk,
            csn: [csn; 6],
            ..ConverterParams::reference()
        },
    )
}

fn design_cases() -> impl Strategy<Value = DesignCase> {
    (1.0..20.0f64, 0.501..0.999f64, 5.0..400.0f64, 0.01..50.0f64, 1e3..1e6f64)
        .prop_map(|(n, d, vi, i_l, fs)| DesignCase { n, d, vi, i_l, fs })
}

fn sample<S: Strategy>(s: S, count: usize) -> Vec<S::Value> {
    let mut runner = TestRunner::deterministic();
    (0..count).map(|_| s.new_tree(&mut runner).expect("strategy yields values").current()).collect()
}

fn evidence() -> Evidence {
    let p = ConverterParams::reference();
    let sol = solve_steady_state(&p).expect("reference point solves");
    let cfg = SimConfig::default();
    let transient = simulate(&p, &build_schedule(&p, &p.derive()), &cfg).expect("reference run converges");
    Evidence { params: p, sol, analytic: waveforms(&p, &sol, cfg.samples), transient }
}

fn main() {
    let ev = evidence();
    let results: Vec<Check> = checks::run_all(
        &ev,
        sample(params(), checks::tol::NODE_MIN_CASES + 7),
        sample(design_cases(), 4 * checks::tol::ROUNDTRIP_MIN_CASES),
    );
    println!("\nrunning {} acceptance criteria", results.len());
    for r in &results {
        println!("{r}");
    }
    let bad = results.iter().filter(|r| r.status != Status::Pass).count();
    println!("\nacceptance result: {} passed; {bad} not passed\n", results.len() - bad);
    if results.len() != 10 || bad > 0 {
        std::process::exit(1);
    }
}
