//! Acceptance criteria 1-9. Each test prints one PASS/FAIL line with the
//! measured value, its threshold and the wall time.

use std::path::Path;
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use gaugeflow_core::dynamics::{gauge_covariance_check, integrate_lagrangian, Trajectory};
use gaugeflow_core::forms::Quadrature;
use gaugeflow_core::gauge::{ExpMap, Monopole, Patch};
use gaugeflow_core::internal::PointOrbit;
use gaugeflow_core::lie::LieAlgebra;
use gaugeflow_core::linalg;
use gaugeflow_core::mesh::TriMesh;
use gaugeflow_core::quantization::{
    base_sphere_map, dirac_condition, euler_lagrange_residual, flux_quantization_check, sternberg_two_form,
};
use gaugeflow_core::scenario::{
    build_system, builtin_config, builtin_names, crosscheck, initial_state, method, parse_config, quantize,
    simulate, verify_identities, Formulation, ScenarioConfig,
};

// criteria share the machine; run them one at a time so timings are honest
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

struct Check {
    criterion: u32,
    title: &'static str,
    start: Instant,
    limit: Duration,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn new(criterion: u32, title: &'static str, limit_s: u64) -> Self {
        Check {
            criterion,
            title,
            start: Instant::now(),
            limit: Duration::from_secs(limit_s),
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn at_most(&mut self, what: &str, value: f64, bound: f64) {
        let line = format!("{what} = {value:.3e} (<= {bound:.0e})");
        if !(value <= bound) {
            self.failures.push(line.clone());
        }
        self.notes.push(line);
    }

    fn holds(&mut self, what: &str, ok: bool) {
        if !ok {
            self.failures.push(what.to_string());
        }
        self.notes.push(format!("{what}: {ok}"));
    }

    fn finish(mut self) {
        let elapsed = self.start.elapsed();
        if elapsed > self.limit {
            self.failures
                .push(format!("runtime {:.2} s over {} s", elapsed.as_secs_f64(), self.limit.as_secs()));
        }
        let verdict = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        println!(
            "criterion {} [{}] {}: {} ({:.2} s, limit {} s)",
            self.criterion,
            verdict,
            self.title,
            self.notes.join("; "),
            elapsed.as_secs_f64(),
            self.limit.as_secs()
        );
        assert!(
            self.failures.is_empty(),
            "criterion {} failed: {}",
            self.criterion,
            self.failures.join("; ")
        );
    }
}

fn builtin(name: &str) -> ScenarioConfig {
    builtin_config(name).unwrap()
}

fn lagrangian_run(c: &ScenarioConfig) -> Trajectory {
    let system = build_system(c).unwrap();
    integrate_lagrangian(&system, &initial_state(c).unwrap(), c.integrator.t_end, method(c)).unwrap()
}

#[test]
fn criterion_1_identity_suite() {
    let _g = serial();
    let mut check = Check::new(1, "identity suite", 10);
    let report = verify_identities(&builtin("wong_su2"), 0).unwrap();
    for row in &report.rows {
        let bound = if row.name.contains("kappa symplectic") {
            1e-10
        } else if row.name.contains("moment map") {
            1e-8
        } else if row.name.contains("alpha = kappa o beta") {
            0.0
        } else if row.name.contains("Liouville formulas") {
            1e-12
        } else if row.name.contains("covariant") {
            1e-7
        } else {
            1e-6
        };
        assert!(row.tolerance <= bound, "{} tolerance {}", row.name, row.tolerance);
        assert!(row.samples >= 100, "{} used {} samples", row.name, row.samples);
        if !row.passed {
            check.failures.push(format!("{} = {:.3e}", row.name, row.max_residual));
        }
    }
    let worst = |key: &str| {
        report
            .rows
            .iter()
            .filter(|r| r.name.contains(key))
            .map(|r| r.max_residual)
            .fold(0.0, f64::max)
    };
    check.at_most("kappa symplectic", worst("kappa symplectic"), 1e-10);
    check.at_most("theta_L - theta_H = d theta_hat", worst("d theta_hat"), 1e-6);
    let boxed = report
        .rows
        .iter()
        .filter(|r| r.name.starts_with("magnetized:") && !r.name.contains("Liouville"))
        .count();
    check.holds("eight magnetized identities sampled", boxed == 8);
    check.at_most("phi1", worst("Y_xi -| Omega"), 1e-8);
    check.at_most("phi2", worst("Omega(Y_xi1"), 1e-8);
    check.holds("all rows pass", report.pass);
    check.finish();
}

/// Times at which `v_y` crosses zero going downward, by linear
/// interpolation between samples (the crossing at `t = 0` included).
fn downward_crossings(tr: &Trajectory, component: usize) -> Vec<f64> {
    let mut out = vec![0.0];
    for k in 1..tr.len() - 1 {
        let (a, b) = (tr.states[k][component], tr.states[k + 1][component]);
        if a > 0.0 && b <= 0.0 {
            let (t0, t1) = (tr.times[k], tr.times[k + 1]);
            out.push(t0 + (t1 - t0) * a / (a - b));
        }
    }
    out
}

#[test]
fn criterion_2_lorentz_gyro_period() {
    let _g = serial();
    let mut check = Check::new(2, "Lorentz gyro-period", 5);
    let c = builtin("lorentz");
    assert_eq!(c.integrator.dt, 1e-3);
    let tr = lagrangian_run(&c);
    let crossings = downward_crossings(&tr, 4);
    let exact = 2.0 * std::f64::consts::PI / (1.0 * 2.0);
    check.holds("two full periods observed", crossings.len() >= 3);
    let worst = crossings
        .windows(2)
        .map(|w| ((w[1] - w[0]) - exact).abs() / exact)
        .fold(0.0, f64::max);
    check.at_most("relative period error", worst, 1e-6);
    let speed = linalg::norm(&tr.states.last().unwrap()[3..6]);
    check.at_most("speed change", (speed - 1.0).abs(), 1e-9);
    check.finish();
}

#[test]
fn criterion_3_dirac_monopole() {
    let _g = serial();
    let mut check = Check::new(3, "Dirac monopole", 10);
    let c = builtin("dirac_monopole");
    let system = build_system(&c).unwrap();
    let (lag, _, report) = simulate(&c, &system).unwrap();
    assert!(lag.is_some());
    for k in ["J1", "J2", "J3"] {
        check.at_most(&format!("{k} drift"), report.drift(k).unwrap(), 1e-7);
    }
    let q = quantize(&c).unwrap();
    check.at_most(
        "flux/2pi - 2 q_e q_m",
        (q.base_flux.report.flux_over_2pi - 1.0).abs(),
        1e-3,
    );
    check.holds("level 4", q.base_flux.level == 4);
    check.holds("flux check passes", q.base_flux.report.pass);

    // the Dirac condition on the product grid, and the flux check agreeing
    let space = PointOrbit::charge(1.0);
    let expect = [(0.0, true), (0.25, false), (0.3, false), (0.5, true), (1.0, true)];
    for (q_m, integral) in expect {
        check.holds(&format!("dirac_condition(1, {q_m}) = {integral}"), dirac_condition(1.0, q_m) == integral);
        let form = sternberg_two_form(&space, &Monopole::new(q_m, Patch::Auto));
        let r = flux_quantization_check(
            &form,
            &TriMesh::icosphere(4),
            &base_sphere_map(vec![0.0; 3], 1.0, vec![]),
            Quadrature::EdgeMidpoint,
            1e-3,
        )
        .unwrap();
        if r.pass != integral || (r.flux_over_2pi - 2.0 * q_m).abs() > 1e-3 {
            check.failures.push(format!("flux at q_m = {q_m}: {:?}", r));
        }
    }
    check.finish();
}

#[test]
fn criterion_4_wong_su2() {
    let _g = serial();
    let mut check = Check::new(4, "Wong SU(2)", 20);
    let c = builtin("wong_su2");
    assert_eq!(c.integrator.t_end, 5.0);
    let cross = crosscheck(&c, 0).unwrap();
    check.at_most("q sup-norm, Legendre Hamiltonian vs Lagrangian", cross.q_difference, 1e-6);
    let system = build_system(&c).unwrap();
    let (_, ham, report) = simulate(&c, &system).unwrap();
    assert!(ham.is_some());
    check.at_most(
        "q sup-norm, exact Hamiltonian vs Lagrangian",
        report.crosscheck_residual.unwrap(),
        1e-6,
    );
    check.at_most("|Phi(z)| drift", report.drift("casimir").unwrap(), 64.0 * f64::EPSILON);
    check.at_most("covariant residual, 100 states", cross.covariant_residual, 1e-7);
    check.holds("100 covariant samples", cross.covariant_samples >= 100);
    check.at_most("kinetic energy drift", report.drift("kinetic").unwrap(), 1e-8);
    check.finish();
}

/// Root of `dV/dr` for `V = ℓ²/(2r²) − 1/r + μ²/(2r²)` by bisection.
fn circular_radius(l2: f64, mu: f64) -> f64 {
    let dv = |r: f64| -(l2 + mu * mu) / (r * r * r) + 1.0 / (r * r);
    let (mut lo, mut hi) = (1e-3, 1e3);
    assert!(dv(lo) < 0.0 && dv(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dv(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn criterion_5_magnetized_kepler() {
    let _g = serial();
    let mut check = Check::new(5, "magnetized Kepler", 10);
    let mut c = builtin("magnetized_kepler");
    c.formulation = Formulation::Hamiltonian;
    let system = build_system(&c).unwrap();
    let (_, ham, report) = simulate(&c, &system).unwrap();
    let ham = ham.unwrap();
    check.at_most("H drift", report.drift("energy").unwrap(), 1e-7);

    // unit mass, so p = v
    let (q, p) = (&c.q, &c.v);
    let l2 = linalg::norm(&linalg::cross(q, p)).powi(2);
    let r_star = circular_radius(l2, 1.0);
    let radius_error = ham
        .states
        .iter()
        .map(|x| (linalg::norm(&x[..3]) - r_star).abs())
        .fold(0.0, f64::max);
    check.at_most("max |r(t) - r*|", radius_error, 1e-6);

    let quant = quantize(&c).unwrap();
    let orbit = quant.orbit_flux.expect("orbit check");
    check.at_most("orbit flux/2pi - 2 mu", (orbit.report.flux_over_2pi - 2.0).abs(), 1e-3);
    check.holds("orbit prequantizable", orbit.report.pass);
    check.finish();
}

#[test]
fn criterion_6_gauge_covariance() {
    let _g = serial();
    let mut check = Check::new(6, "gauge covariance", 10);
    let c = builtin("lorentz");
    let system = build_system(&c).unwrap();
    let map = ExpMap::linear(LieAlgebra::u1(), vec![1.0], vec![1.0, 0.5, -0.3]);
    let r = gauge_covariance_check(&system, &map, &initial_state(&c).unwrap(), c.integrator.t_end, method(&c))
        .unwrap();
    check.at_most("abelian map", r, 1e-6);

    let c = builtin("wong_su2");
    let system = build_system(&c).unwrap();
    let map = ExpMap::constant(LieAlgebra::so3(), vec![0.4, -1.1, 0.7]);
    let r = gauge_covariance_check(&system, &map, &initial_state(&c).unwrap(), c.integrator.t_end, method(&c))
        .unwrap();
    check.at_most("constant SU(2) map", r, 1e-6);
    check.finish();
}

#[test]
fn criterion_7_textbook_lagrangian() {
    let _g = serial();
    let mut check = Check::new(7, "textbook Lagrangian", 10);
    for name in ["lorentz", "dirac_monopole", "wong_su2", "magnetized_kepler"] {
        let c = builtin(name);
        let system = build_system(&c).unwrap();
        let tr = lagrangian_run(&c);
        check.at_most(
            &format!("{name} Euler-Lagrange residual"),
            euler_lagrange_residual(&system, &tr).unwrap(),
            1e-5,
        );
    }
    check.finish();
}

/// (label, config text, expected exit code, expected error kind).
const MALFORMED: &[(&str, &str, i32, &str)] = &[
    ("negative step", "[initial]\nq = 0, 0, 0\n[integrator]\ndt = -1\n", 2, "integrator.dt"),
    ("zero step", "[initial]\nq = 0\n[integrator]\ndt = 0\n", 2, "integrator.dt"),
    ("unknown key", "[gauge]\ncolour = red\n", 2, "unknown key"),
    ("unknown section", "[physics]\nq = 1\n", 2, "unknown section"),
    ("missing equals", "[initial]\nq 1, 2\n", 2, "line 2"),
    ("bad number", "[initial]\nq = 1, two, 3\n", 2, "column 8"),
    ("key outside section", "q = 1\n", 2, "outside"),
    ("duplicate key", "[initial]\nq = 1\nq = 2\n", 2, "duplicate"),
    ("unclosed header", "[initial\nq = 1\n", 2, "line 1"),
    ("missing q", "[gauge]\nkind = none\n", 2, "initial.q"),
    ("unknown gauge", "[gauge]\nkind = instanton\n[initial]\nq = 0, 0, 1\n", 2, "gauge.kind"),
    (
        "orbit of the wrong group",
        "[system]\ngroup = so3\n[initial]\nq = 0, 0, 1\n",
        2,
        "internal.kind",
    ),
    ("wrong z length", "[internal]\nkind = point\n[initial]\nq = 1\nz = 0.5\n", 2, "initial.z"),
    ("non-finite number", "[initial]\nq = inf\n", 2, "expected a number"),
    (
        "start on the Dirac string",
        "[gauge]\nkind = monopole\n[initial]\nq = 0, 0, -1\nv = 1, 0, 0\n",
        3,
        "monopole axis",
    ),
];

fn run_cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_gaugeflow")).args(args).output().unwrap();
    let text = format!(
        "{}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    (out.status.code().unwrap_or(-1), text)
}

#[test]
fn criterion_8_parser() {
    let _g = serial();
    let mut check = Check::new(8, "config parser", 10);
    for name in builtin_names() {
        let c = builtin(name);
        let again = parse_config(&c.to_text()).unwrap();
        check.holds(&format!("{name} round-trips"), again == c);
    }
    let dir = tempfile::tempdir().unwrap();
    let mut ok = 0;
    for (label, text, code, needle) in MALFORMED {
        let path = dir.path().join("bad.cfg");
        std::fs::write(&path, text).unwrap();
        let (got, msg) = run_cli(&["integrate", "--config", path.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
        if got == *code && msg.contains(needle) {
            ok += 1;
        } else {
            check.failures.push(format!("{label}: exit {got}, message {msg:?}"));
        }
    }
    check.holds(&format!("{ok}/{} malformed inputs classified", MALFORMED.len()), ok == MALFORMED.len());
    check.holds("corpus has at least 10 cases", MALFORMED.len() >= 10);
    let (missing, _) = run_cli(&["integrate", "--config", Path::new("/nonexistent/x.cfg").to_str().unwrap()]);
    check.holds("missing file exits 5", missing == 5);
    check.finish();
}

#[test]
fn criterion_9_rk4_energy_convergence() {
    let _g = serial();
    let mut check = Check::new(9, "RK4 energy-drift ratio", 10);
    let mut c = builtin("oscillator");
    let coarse = {
        let system = build_system(&c).unwrap();
        simulate(&c, &system).unwrap().2.drift("energy").unwrap()
    };
    c.integrator.dt /= 2.0;
    let fine = {
        let system = build_system(&c).unwrap();
        simulate(&c, &system).unwrap().2.drift("energy").unwrap()
    };
    let ratio = coarse / fine;
    check.notes.push(format!("drift(dt) = {coarse:.3e}, drift(dt/2) = {fine:.3e}"));
    let in_band = (12.0..=20.0).contains(&ratio);
    check.notes.push(format!("ratio = {ratio:.2} (band [12, 20])"));
    if !in_band {
        check.failures.push(format!("ratio {ratio:.2} outside [12, 20]"));
    }
    check.finish();
}

#[test]
fn verify_identities_cli_exit_status() {
    let _g = serial();
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_cli(&["verify-identities", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0, "{text}");
    assert!(dir.path().join("wong_su2_identities.json").exists());
}
