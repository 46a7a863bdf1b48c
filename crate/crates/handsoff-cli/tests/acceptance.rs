//! Acceptance suite: every criterion the artifact promises, one test per
//! criterion, each printing a PASS line with the measured margin.
//!
//! The reference plant is the scalar decaying system (a = -1, b = 1, T = 5)
//! whose reachable set, optimal control and value function are known in
//! closed form; structural criteria run additionally on the undamped
//! harmonic oscillator, where no closed form exists.
//!
//! Run with `cargo test -p handsoff-cli --test acceptance -- --nocapture`
//! to see the per-criterion margins.

use std::fs;
use std::process::Command;

use nalgebra::{DMatrix, DVector};

use handsoff::analysis::{
    boundary_radius, continuity_suite, convexity_suite, level_set_suite, ConvexityOptions,
};
use handsoff::matfun::validate_assumption;
use handsoff::solver::{verify_terminal, SolveContext};
use handsoff::{analysis, LtiSystem, Scalar1dSystem, ValidatedSystem};

const SCALAR_CELLS: usize = 1000;
const OSCILLATOR_CELLS: usize = 500;

fn scalar_plant() -> ValidatedSystem {
    validate_assumption(
        LtiSystem::new(
            DMatrix::from_row_slice(1, 1, &[-1.0]),
            DVector::from_column_slice(&[1.0]),
            5.0,
        )
        .unwrap(),
    )
    .unwrap()
}

fn scalar_oracle() -> Scalar1dSystem {
    Scalar1dSystem::new(-1.0, 1.0, 5.0).unwrap()
}

fn oscillator_plant() -> ValidatedSystem {
    validate_assumption(
        LtiSystem::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            DVector::from_column_slice(&[0.0, 1.0]),
            std::f64::consts::TAU,
        )
        .unwrap(),
    )
    .unwrap()
}

fn xi1(v: f64) -> DVector<f64> {
    DVector::from_column_slice(&[v])
}

/// 1. Value function against the closed form: 50 states spanning
///    [-140, 140] at N = 1000, absolute error at most 0.01.
#[test]
fn criterion_1_value_matches_closed_form() {
    let started = std::time::Instant::now();
    let sys = scalar_plant();
    let oracle = scalar_oracle();
    let ctx = SolveContext::new(&sys, SCALAR_CELLS).unwrap();

    let mut max_error = 0.0f64;
    for i in 0..50 {
        let xi_val = -140.0 + 280.0 * i as f64 / 49.0;
        let lp = ctx.value(&xi1(xi_val)).unwrap();
        let reference = oracle.value(xi_val).unwrap();
        max_error = max_error.max((lp - reference).abs());
        assert!(
            (lp - reference).abs() <= 0.01,
            "V({xi_val}): LP {lp} vs closed form {reference}"
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}, budget is 60 s");
    println!(
        "[PASS] criterion 1: value matches closed form, max |ΔV| = {max_error:.2e} (≤ 1e-2), {:?}",
        elapsed
    );
}

/// 2. Control shape at ξ = 100, N = 1000: off before the switching time,
///    negative rail after, matching on at least 99.5% of cells.
#[test]
fn criterion_2_control_shape_matches_closed_form() {
    let sys = scalar_plant();
    let oracle = scalar_oracle();
    let ctx = SolveContext::new(&sys, SCALAR_CELLS).unwrap();
    let report = ctx.solve(&xi1(100.0)).unwrap();
    let reference = oracle.control(100.0, &ctx.grid()).unwrap();

    let matching = report
        .control
        .values()
        .iter()
        .zip(reference.values())
        .filter(|(lp, cf)| (**lp - **cf).abs() <= 1e-3)
        .count();
    let fraction = matching as f64 / SCALAR_CELLS as f64;
    assert!(
        fraction >= 0.995,
        "only {matching}/{SCALAR_CELLS} cells match the closed-form control"
    );
    println!(
        "[PASS] criterion 2: control shape matches on {matching}/{SCALAR_CELLS} cells ({:.2}% ≥ 99.5%)",
        100.0 * fraction
    );
}

/// 3. Reachable boundary along ±1 at N = 1000 within 0.1% of e^5 - 1.
#[test]
fn criterion_3_reachable_boundary_radius() {
    let sys = scalar_plant();
    let expected = 5f64.exp() - 1.0;
    let mut worst_rel = 0.0f64;
    for direction in [1.0, -1.0] {
        let d = xi1(direction);
        let radius = boundary_radius(&sys, &d, SCALAR_CELLS, None).unwrap();
        let rel = (radius - expected).abs() / expected;
        worst_rel = worst_rel.max(rel);
        assert!(
            rel <= 1e-3,
            "direction {direction}: radius {radius} vs {expected}"
        );
    }
    println!(
        "[PASS] criterion 3: boundary radius = e^5 - 1 within {:.2e} relative (≤ 1e-3)",
        worst_rel
    );
}

/// 4. Bang-off-bang: across 100 seeded solves on both plants, at most `n`
///    fractional cells per optimal solution, hence |l0 - l1| ≤ n·h.
#[test]
fn criterion_4_bang_off_bang_structure() {
    let scalar = analysis::bang_off_bang_suite(&scalar_plant(), SCALAR_CELLS, 50, 42).unwrap();
    assert!(scalar.pass, "scalar plant failures: {:?}", scalar.failures);
    let oscillator =
        analysis::bang_off_bang_suite(&oscillator_plant(), OSCILLATOR_CELLS, 50, 42).unwrap();
    assert!(
        oscillator.pass,
        "oscillator failures: {:?}",
        oscillator.failures
    );
    println!(
        "[PASS] criterion 4: {} solves bang-off-bang with ≤ n fractional cells and |l0 - l1| ≤ n·h",
        scalar.samples + oscillator.samples
    );
}

/// 5. Convexity: 100 pairs at seed 42 on both plants with zero midpoint
///    violations beyond 1e-7; on the scalar plant the strictness gap
///    reaches at least half the closed-form gap for pairs separated by 5.
#[test]
fn criterion_5_midpoint_convexity() {
    let scalar = convexity_suite(
        &scalar_plant(),
        SCALAR_CELLS,
        100,
        42,
        ConvexityOptions {
            strict_separation: Some(5.0),
        },
    )
    .unwrap();
    assert!(scalar.pass, "scalar plant failures: {:?}", scalar.failures);

    let oscillator = convexity_suite(
        &oscillator_plant(),
        OSCILLATOR_CELLS,
        100,
        42,
        ConvexityOptions::default(),
    )
    .unwrap();
    assert!(
        oscillator.pass,
        "oscillator failures: {:?}",
        oscillator.failures
    );
    println!(
        "[PASS] criterion 5: midpoint convexity exact to 1e-7 on {} pairs; scalar strict gaps ≥ 0.5× closed form",
        scalar.samples + oscillator.samples
    );
}

/// 6. Continuity: two-pass Lipschitz estimate on the scalar plant must not
///    exceed twice the closed-form slope bound at the box edge, and must be
///    stable within a factor of two under halving δ.
#[test]
fn criterion_6_continuity_two_pass_lipschitz() {
    let limit = 2.0 / (5f64.exp() - 132.0);
    let report = continuity_suite(&scalar_plant(), SCALAR_CELLS, 100, 42).unwrap();
    assert!(report.pass, "failures: {:?}", report.failures);
    let first = report.metrics["lipschitz_first_pass"];
    let second = report.metrics["lipschitz_second_pass"];
    assert!(first <= limit, "first-pass L = {first} exceeds {limit}");
    assert!(second <= limit, "second-pass L = {second} exceeds {limit}");
    println!(
        "[PASS] criterion 6: empirical L = {first:.4} / {second:.4} ≤ {limit:.4}, stable under δ/2"
    );
}

/// 7. Level sets at α ∈ {0.25, 0.5, 1.0, 2.0}: boundary value within 5e-3
///    of α, interior strictly below, radii nested, and α = T reproducing
///    the reachable set.
#[test]
fn criterion_7_level_set_identities() {
    let report = level_set_suite(
        &scalar_plant(),
        SCALAR_CELLS,
        &[0.25, 0.5, 1.0, 2.0],
        4,
        42,
    )
    .unwrap();
    assert!(report.pass, "failures: {:?}", report.failures);
    assert_eq!(report.tolerances["level_value_abs"], 5e-3);
    println!(
        "[PASS] criterion 7: level-set boundary carries V = α within 5e-3; nesting and α = T checks hold"
    );
}

/// 8. Terminal constraint: re-simulated optimal solves reach the origin
///    within 1e-6·(1 + ‖ξ‖∞).
#[test]
fn criterion_8_terminal_constraint() {
    let mut worst = 0.0f64;
    let scalar = scalar_plant();
    let ctx = SolveContext::new(&scalar, SCALAR_CELLS).unwrap();
    for i in 0..10 {
        let xi = xi1(-139.0 + 278.0 * i as f64 / 9.0);
        let report = ctx.solve(&xi).unwrap();
        let residual = verify_terminal(&scalar, &report).unwrap().amax();
        let allowance = 1e-6 * (1.0 + xi.amax());
        worst = worst.max(residual / allowance);
        assert!(residual <= allowance, "ξ = {}: residual {residual}", xi[0]);
    }

    let oscillator = oscillator_plant();
    let ctx = SolveContext::new(&oscillator, OSCILLATOR_CELLS).unwrap();
    for i in 0..10 {
        let angle = std::f64::consts::TAU * i as f64 / 10.0;
        let xi = DVector::from_column_slice(&[3.0 * angle.cos(), 3.0 * angle.sin()]);
        let report = ctx.solve(&xi).unwrap();
        let residual = verify_terminal(&oscillator, &report).unwrap().amax();
        let allowance = 1e-6 * (1.0 + xi.amax());
        worst = worst.max(residual / allowance);
        assert!(residual <= allowance, "angle {angle}: residual {residual}");
    }
    println!(
        "[PASS] criterion 8: terminal residual ≤ 1e-6·(1 + ‖ξ‖∞) on 20 solves (worst at {:.1}% of allowance)",
        100.0 * worst
    );
}

/// 9. Determinism: two identical `verify --suite all --seed 42` invocations
///    produce byte-identical report files.
#[test]
fn criterion_9_verify_is_byte_deterministic() {
    let dir = std::env::temp_dir().join(format!("handsoff-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let system = dir.join("scalar.json");
    fs::write(&system, r#"{"A": [[-1.0]], "B": [1.0], "T": 5.0, "N": 1000}"#).unwrap();

    let mut reports = Vec::new();
    for name in ["first.json", "second.json"] {
        let out = dir.join(name);
        let output = Command::new(env!("CARGO_BIN_EXE_handsoff"))
            .args([
                "verify",
                "--system",
                system.to_str().unwrap(),
                "--suite",
                "all",
                "--seed",
                "42",
                "--samples",
                "40",
                "--out",
                out.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert_eq!(
            output.status.code(),
            Some(0),
            "verify failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
        reports.push(fs::read(&out).unwrap());
    }
    assert_eq!(reports[0], reports[1], "reports differ between identical runs");
    println!(
        "[PASS] criterion 9: `verify --suite all --seed 42` is byte-deterministic ({} bytes)",
        reports[0].len()
    );
}
