//! Property checks shared by the proptest suite and the acceptance run.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::Signed;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use prlab::analysis_checks::{estimate_sobolev_constant, Domain, SobolevProbe};
use prlab::diophantine::{ContinuedFraction, RatInterval, Tail};
use prlab::floer_solver::{
    choose_truncation, floer_energy, l2_s_derivative, rigid_rotation_exact_solution, solve_floer,
    solver::noisy_seed, CylinderGrid, NAlpha, SolverConfig,
};
use prlab::hamiltonian_disk::{area_preservation_defect, flow, DiskPoint, FlowConfig, Hamiltonian};

pub const AREA_TOL: f64 = 1e-8;
pub const SCALE_TOL: f64 = 1e-12;

pub fn quotients() -> impl Strategy<Value = (i64, Vec<u64>)> {
    (-50i64..50, prop::collection::vec(1u64..1_000_000, 1..40))
}

/// `p_m q_{m−1} − p_{m−1} q_m = (−1)^{m−1}` for every m.
pub fn convergent_determinant(a0: i64, qs: &[u64]) -> Result<(), TestCaseError> {
    let cf = ContinuedFraction::new(
        BigInt::from(a0),
        qs.iter().map(|&a| BigInt::from(a)).collect(),
        Tail::Terminated,
    )
    .map_err(|e| TestCaseError::fail(e.to_string()))?;
    let c = cf.all_convergents();
    for m in 1..c.len() {
        let det = &c[m].p * &c[m - 1].q - &c[m - 1].p * &c[m].q;
        let want = if m % 2 == 1 {
            BigInt::from(1)
        } else {
            BigInt::from(-1)
        };
        prop_assert_eq!(&det, &want, "m = {}", m);
        prop_assert!(c[m].q.is_positive());
    }
    Ok(())
}

pub fn area_preservation(alpha: f64, epsilon: f64) -> Result<(), TestCaseError> {
    let h = Hamiltonian::perturbed_standard(alpha, epsilon);
    let cfg = FlowConfig::default();
    let d = area_preservation_defect(&h, 2, 4, 1e-4, &cfg)
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(d < AREA_TOL, "defect {d}");
    Ok(())
}

/// Solver output keeps the boundary degree `⌊nα⌋` of the seed.
pub fn winding_conservation(
    alpha: f64,
    epsilon: f64,
    n: u32,
    seed: u64,
) -> Result<(), TestCaseError> {
    let fail = |e: prlab::floer_solver::FloerError| TestCaseError::fail(e.to_string());
    let iv = RatInterval::point(num_rational::BigRational::from_float(alpha).unwrap());
    let na = match NAlpha::from_enclosure(&iv, n) {
        Ok(na) if na.frac() > 1e-3 => na,
        _ => return Err(TestCaseError::reject("nα too close to an integer")),
    };
    let tr = choose_truncation(na.frac(), n, 1e-2, 50.0);
    let g = CylinderGrid::new(n, tr.s_max, 16, 32).map_err(fail)?;
    let oracle = rigid_rotation_exact_solution(&iv, n, 0.3, &g).map_err(fail)?;
    let start = noisy_seed(&oracle, 0.01, seed);
    prop_assert_eq!(start.measured_winding(), na.degree);
    let h = Hamiltonian::perturbed_standard(alpha, epsilon);
    let cfg = SolverConfig {
        max_iterations: 4,
        ..Default::default()
    };
    let sol = solve_floer(&h, n, &iv, &g, Some(&start), &cfg).map_err(fail)?;
    prop_assert_eq!(sol.boundary_degree, na.degree);
    prop_assert_eq!(sol.measured_winding(), na.degree);
    Ok(())
}

/// `E_Floer ≥ ‖∂ₛz‖²` on arbitrary discrete fields.
pub fn energy_monotonicity(
    alpha: f64,
    n: u32,
    amplitude: f64,
    seed: u64,
) -> Result<(), TestCaseError> {
    let iv = RatInterval::point(num_rational::BigRational::from_float(alpha).unwrap());
    let Ok(na) = NAlpha::from_enclosure(&iv, n) else {
        return Err(TestCaseError::reject("degree undetermined"));
    };
    let tr = choose_truncation(na.frac().max(1e-3), n, 1e-2, 50.0);
    let g = CylinderGrid::new(n, tr.s_max, 12, 24).unwrap();
    let oracle = rigid_rotation_exact_solution(&iv, n, 0.0, &g).unwrap();
    let mut sol = noisy_seed(&oracle, amplitude, seed);
    sol.hamiltonian = Hamiltonian::perturbed_standard(alpha, 0.05);
    let e = floer_energy(&sol);
    let l2 = l2_s_derivative(&sol);
    prop_assert!(e >= l2 * (1.0 - 1e-14), "E = {e}, l2 = {l2}");
    Ok(())
}

pub fn domain_from(k: u8, n: u32) -> Domain {
    match k % 4 {
        0 => Domain::Plane,
        1 => Domain::HalfPlane,
        2 => Domain::Cylinder { n },
        _ => Domain::HalfCylinder { n },
    }
}

/// Ratios are unchanged under `f ↦ λf`.
pub fn sobolev_scale_invariance(
    domain: Domain,
    seed: u64,
    lambda: f64,
) -> Result<(), TestCaseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let Ok(p) = SobolevProbe::random(domain, &mut rng) else {
        return Err(TestCaseError::reject("probe misses the half domain"));
    };
    let q = p.scaled(lambda).unwrap();
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs();
    prop_assert!(
        rel(p.ratio, q.ratio) < SCALE_TOL,
        "{} vs {}",
        p.ratio,
        q.ratio
    );
    prop_assert!(rel(p.gradient_ratio, q.gradient_ratio) < SCALE_TOL);
    Ok(())
}

/// Same inputs give byte-identical CSV text.
pub fn csv_determinism(seed: u64, x: f64, y: f64) -> Result<(), TestCaseError> {
    let sob = |s| {
        let mut out = Vec::new();
        estimate_sobolev_constant(true, &[1, 3], 4, s)
            .unwrap()
            .write_csv(&mut out)
            .unwrap();
        out
    };
    prop_assert_eq!(sob(seed), sob(seed));
    let h = Hamiltonian::perturbed_standard(0.37, 0.02);
    let p = DiskPoint::new(x, y);
    let traj = || {
        let mut out = Vec::new();
        flow(
            &h,
            p,
            0.0,
            2.0,
            &FlowConfig {
                step: 1e-2,
                ..Default::default()
            },
        )
        .unwrap()
        .write_csv(&mut out)
        .unwrap();
        out
    };
    let a = traj();
    prop_assert_eq!(&a, &traj());
    prop_assert!(!a.contains(&b'\r'));
    Ok(())
}

fn unit_point() -> impl Strategy<Value = (f64, f64)> {
    (0.0f64..0.95, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| (r * t.cos(), r * t.sin()))
}

/// Runs every property with `cases` cases each; returns the failures.
pub fn run_all(cases: u32) -> Vec<String> {
    let mut failures = Vec::new();
    let cfg = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut check = |name: &str, r: Result<(), String>| {
        if let Err(e) = r {
            failures.push(format!("{name}: {e}"));
        }
    };
    macro_rules! run {
        ($name:expr, $strat:expr, $body:expr) => {{
            let mut runner = TestRunner::new(cfg.clone());
            check($name, runner.run(&$strat, $body).map_err(|e| e.to_string()));
        }};
    }
    run!("convergent determinant", quotients(), |(a0, qs)| {
        convergent_determinant(a0, &qs)
    });
    run!("area preservation", (0.05f64..0.95, 0.0f64..0.05), |(
        a,
        e,
    )| {
        area_preservation(a, e)
    });
    run!(
        "winding conservation",
        (0.05f64..0.95, 0.0f64..0.01, 1u32..5, any::<u64>()),
        |(a, e, n, s)| winding_conservation(a, e, n, s)
    );
    run!(
        "energy monotonicity",
        (0.05f64..0.95, 1u32..6, 0.0f64..0.3, any::<u64>()),
        |(a, n, amp, s)| energy_monotonicity(a, n, amp, s)
    );
    run!(
        "sobolev scale invariance",
        (any::<u8>(), 1u32..20, any::<u64>(), 1e-3f64..1e3),
        |(k, n, s, l)| sobolev_scale_invariance(domain_from(k, n), s, l)
    );
    run!("csv determinism", (any::<u64>(), unit_point()), |(
        s,
        (x, y),
    )| {
        csv_determinism(s, x, y)
    });
    failures
}
