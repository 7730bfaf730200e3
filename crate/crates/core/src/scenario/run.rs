//! Building systems from configs and running them.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{
    ConfigError, Formulation, GaugeSpec, GroupSpec, InternalSpec, LagrangianSpec, MethodSpec, PatchSpec,
    ScenarioConfig,
};
use super::json;
use crate::dynamics::{
    diagnose, energy, integrate_hamiltonian, integrate_lagrangian, q_difference, to_hamiltonian,
    DiagnosticsReport, Hamiltonian, LagrangianState, Quantity, LegendreHamiltonian, Mechanical, Method, PotentialTerm,
    System, Trajectory,
};

use crate::error::{Error, Result};
use crate::forms::Quadrature;
use crate::gauge::{GaugePotential, Monopole, Patch, Potential, UniformField, WongPotential, ZeroPotential};
use crate::internal::{check_moment_identities, InternalSpace, Orbit, PointOrbit, SphereOrbit};
use crate::lie::LieAlgebra;
use crate::linalg;
use crate::mesh::TriMesh;
use crate::quantization::{
    base_sphere_map, dirac_condition, euler_lagrange_residual, flux_quantization_check, latitude_cap,
    latitude_loop, loop_action, orbit_fiber_map, sternberg_two_form, FluxReport, LoopWithCap,
};
use crate::tulczyjew::{classical_identities, magnetized_identities, IdentityCheck};

/// The system type every scenario builds.
pub type RuntimeSystem = System<Orbit, Potential, Mechanical>;

/// Random states drawn for identity and residual tables.
pub const SAMPLES: usize = 100;
/// Flux checks pass within this distance of an integer.
pub const FLUX_TOL: f64 = 1e-3;
pub const MOMENT_TOL: f64 = 1e-8;
pub const COVARIANT_TOL: f64 = 1e-7;
pub const CROSSCHECK_TOL: f64 = 1e-6;
pub const EULER_LAGRANGE_TOL: f64 = 1e-5;
/// Base-sphere refinement level for flux integrals.
pub const BASE_FLUX_LEVEL: usize = 4;
/// Orbit-fiber refinement level.
pub const ORBIT_FLUX_LEVEL: usize = 4;
/// Quadrature for the flux checks.
pub const FLUX_RULE: Quadrature = Quadrature::EdgeMidpoint;
/// Polar angle of the loop used for the two-cap comparison.
pub const CAP_LOOP_ANGLE: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Integrate,
    Crosscheck,
    Quantize,
    VerifyIdentities,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Integrate, Mode::Crosscheck, Mode::Quantize, Mode::VerifyIdentities];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Integrate => "integrate",
            Mode::Crosscheck => "crosscheck",
            Mode::Quantize => "quantize",
            Mode::VerifyIdentities => "verify-identities",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

/// Files written by a run and whether its checks passed.
#[derive(Clone, Debug, Default)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub passed: bool,
    pub lines: Vec<String>,
}

fn algebra(group: GroupSpec) -> LieAlgebra {
    match group {
        GroupSpec::U1 => LieAlgebra::u1(),
        GroupSpec::So3 => LieAlgebra::so3(),
        GroupSpec::So2k(k) => LieAlgebra::so2k(k),
    }
}

pub fn build_system(c: &ScenarioConfig) -> Result<RuntimeSystem> {
    c.validate()?;
    let space = match (c.group, c.internal) {
        (GroupSpec::U1, InternalSpec::Point { charge }) => Orbit::Point(PointOrbit::charge(charge)),
        (GroupSpec::So2k(1), InternalSpec::Point { charge }) => Orbit::Point(PointOrbit::so2(charge)),
        (GroupSpec::So3, InternalSpec::Sphere { mu }) => Orbit::Sphere(SphereOrbit::new(mu)?),
        _ => unreachable!("validated"),
    };
    let chart = match &c.gauge {
        GaugeSpec::None => Potential::Zero(ZeroPotential {
            algebra: algebra(c.group),
            n: c.base_dim(),
        }),
        GaugeSpec::Uniform { field } => Potential::Uniform(UniformField::new(*field)),
        GaugeSpec::Monopole { q_m, patch } => Potential::Monopole(Monopole {
            algebra: algebra(c.group),
            q_m: *q_m,
            patch: match patch {
                PatchSpec::North => Patch::North,
                PatchSpec::South => Patch::South,
            },
        }),
        GaugeSpec::Wong { strength, offset } => Potential::Wong(WongPotential::new(*strength, *offset)),
    };
    let lagrangian = match c.lagrangian {
        LagrangianSpec::Free { mass } => Mechanical {
            mass,
            potential: PotentialTerm::None,
        },
        LagrangianSpec::Kepler { mass, mu, k } => Mechanical {
            mass,
            potential: PotentialTerm::Kepler { mu, k },
        },
        LagrangianSpec::Oscillator { mass, omega } => Mechanical {
            mass,
            potential: PotentialTerm::Oscillator { omega },
        },
    };
    Ok(System {
        space,
        chart,
        lagrangian,
    })
}

pub fn initial_state(c: &ScenarioConfig) -> Result<LagrangianState> {
    LagrangianState::new(c.q.clone(), c.v.clone(), c.z.clone())
}

pub fn method(c: &ScenarioConfig) -> Method {
    match c.integrator.method {
        MethodSpec::Rk4 => Method::Rk4 { dt: c.integrator.dt },
        MethodSpec::Rkf45 => Method::Rkf45 {
            dt: c.integrator.dt,
            tol: c.integrator.tolerance,
        },
    }
}

/// `q_e` of a point orbit, `Φ = −q_e e¹`.
fn point_charge(system: &RuntimeSystem) -> Option<f64> {
    match &system.space {
        Orbit::Point(p) => Some(-p.value()[0]),
        Orbit::Sphere(_) => None,
    }
}

fn monopole_strength(system: &RuntimeSystem) -> Option<f64> {
    match &system.chart {
        Potential::Monopole(m) => Some(m.q_m),
        _ => None,
    }
}

/// Built-in conserved quantities of a system, for states packed as
/// `(q, v, z)` (Lagrangian) or `(q, p, z)` (Hamiltonian).
///
/// `energy` and `kinetic` always; `casimir = |Φ(z)|` for sphere orbits;
/// `J1..J3`, `J = r × mv − q_e q_m r/|r|`, for a point charge in a monopole.
pub fn quantities(system: &RuntimeSystem, hamiltonian: bool) -> BTreeMap<String, Quantity<'_>> {
    let n = system.base_dim();
    let l = &system.lagrangian;
    let velocity = move |x: &[f64]| -> Vec<f64> {
        if hamiltonian {
            x[n..2 * n].iter().map(|p| p / l.mass).collect()
        } else {
            x[n..2 * n].to_vec()
        }
    };
    let mut out: BTreeMap<String, Quantity<'_>> = BTreeMap::new();
    out.insert(
        "energy".into(),
        Box::new(move |x: &[f64]| {
            let (q, z) = (&x[..n], &x[2 * n..]);
            Ok(if hamiltonian {
                l.hamiltonian().eval(q, &x[n..2 * n], z)
            } else {
                energy(l, q, &x[n..2 * n], z)
            })
        }),
    );
    out.insert(
        "kinetic".into(),
        Box::new(move |x: &[f64]| {
            let v = velocity(x);
            Ok(0.5 * l.mass * linalg::dot(&v, &v))
        }),
    );
    if let Orbit::Sphere(s) = &system.space {
        out.insert(
            "casimir".into(),
            Box::new(move |x: &[f64]| Ok(linalg::norm(&s.moment(&x[2 * n..])))),
        );
    }
    if let (Some(q_e), Some(q_m), 3) = (point_charge(system), monopole_strength(system), n) {
        for k in 0..3 {
            out.insert(
                format!("J{}", k + 1),
                Box::new(move |x: &[f64]| {
                    let r = &x[..3];
                    let mv: Vec<f64> = velocity(x).iter().map(|v| l.mass * v).collect();
                    let c = linalg::cross(r, &mv);
                    Ok(c[k] - q_e * q_m * r[k] / linalg::norm(r))
                }),
            );
        }
    }
    out
}

/// Draws a base point and internal point inside the chart domains.
pub fn sample_configuration(system: &RuntimeSystem, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let n = system.base_dim();
    let q = match &system.chart {
        Potential::Monopole(_) => loop {
            let dir: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let len = linalg::norm(&dir);
            if !(0.2..=1.0).contains(&len) {
                continue;
            }
            let r = rng.random_range(0.5..2.0);
            let q: Vec<f64> = dir.iter().map(|d| d * r / len).collect();
            // stay well away from the Dirac string
            if system.chart.check_domain(&q).is_ok() && (q[2] / r).abs() < 0.95 {
                break q;
            }
        },
        _ => {
            let far = matches!(system.lagrangian.potential, PotentialTerm::Kepler { .. });
            loop {
                let q: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                if !far || linalg::norm(&q) > 0.5 {
                    break q;
                }
            }
        }
    };
    let z = match &system.space {
        Orbit::Point(_) => Vec::new(),
        Orbit::Sphere(s) => vec![rng.random_range(-PI..PI), s.mu() * rng.random_range(-0.8..0.8)],
    };
    (q, z)
}

fn sample_state(system: &RuntimeSystem, rng: &mut ChaCha8Rng) -> Result<LagrangianState> {
    let (q, z) = sample_configuration(system, rng);
    let v = (0..q.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    LagrangianState::new(q, v, z)
}

/// Largest covariant-form residual over `samples` random states.
pub fn covariant_table(system: &RuntimeSystem, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        worst = worst.max(system.covariant_residual(&sample_state(system, &mut rng)?)?);
    }
    Ok(worst)
}

fn write_file(out_dir: &Path, name: &str, text: &str, outcome: &mut RunOutcome) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(&path, text)?;
    outcome.files.push(path);
    Ok(())
}

/// CSV with header `t,q1..,v1..,z1..` (`p` instead of `v` for Hamiltonian
/// states). Rows at every `stride`-th sample plus the last one.
pub fn trajectory_csv(traj: &Trajectory, n: usize, m: usize, hamiltonian: bool, stride: usize) -> String {
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("q{i}")));
    let mid = if hamiltonian { "p" } else { "v" };
    header.extend((1..=n).map(|i| format!("{mid}{i}")));
    header.extend((1..=m).map(|i| format!("z{i}")));
    let mut s = header.join(",");
    s.push('\n');
    let last = traj.len().saturating_sub(1);
    for (k, (t, x)) in traj.times.iter().zip(&traj.states).enumerate() {
        if k % stride.max(1) != 0 && k != last {
            continue;
        }
        let mut row = vec![json::format_float(*t)];
        row.extend(x.iter().map(|v| json::format_float(*v)));
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn file_stem(path: &str) -> &str {
    path.strip_suffix(".csv").unwrap_or(path)
}

/// Integrates in the configured formulation(s) and diagnoses the result.
pub fn simulate(
    c: &ScenarioConfig,
    system: &RuntimeSystem,
) -> Result<(Option<Trajectory>, Option<Trajectory>, DiagnosticsReport)> {
    let state0 = initial_state(c)?;
    system.check_domain(&state0.q, &state0.z)?;
    let m = method(c);
    let t_end = c.integrator.t_end;
    let lag = match c.formulation {
        Formulation::Lagrangian | Formulation::Both => Some(integrate_lagrangian(system, &state0, t_end, m)?),
        Formulation::Hamiltonian => None,
    };
    let ham = match c.formulation {
        Formulation::Hamiltonian | Formulation::Both => {
            let h0 = to_hamiltonian(&system.lagrangian, &state0);
            Some(integrate_hamiltonian(system, &system.lagrangian.hamiltonian(), &h0, t_end, m)?)
        }
        Formulation::Lagrangian => None,
    };
    let names_of = |q: &BTreeMap<String, Quantity<'_>>| q.keys().cloned().collect::<Vec<String>>();
    let mut report = if let Some(tr) = &lag {
        let q = quantities(system, false);
        let names = names_of(&q);
        diagnose(tr, &q, &names.iter().map(String::as_str).collect::<Vec<_>>())?
    } else {
        let q = quantities(system, true);
        let names = names_of(&q);
        diagnose(ham.as_ref().unwrap(), &q, &names.iter().map(String::as_str).collect::<Vec<_>>())?
    };
    if let (Some(a), Some(b)) = (&lag, &ham) {
        if a.times == b.times {
            report.crosscheck_residual = Some(q_difference(a, b, system.base_dim())?);
        }
    }
    Ok((lag, ham, report))
}

fn run_integrate(c: &ScenarioConfig, out_dir: &Path) -> Result<RunOutcome> {
    let system = build_system(c)?;
    let (n, m) = (system.base_dim(), system.internal_dim());
    let (lag, ham, report) = simulate(c, &system)?;
    let mut outcome = RunOutcome {
        passed: true,
        ..Default::default()
    };
    let traj_name = c.output.trajectory.clone().unwrap_or_else(|| format!("{}.csv", c.name));
    let stride = c.output.stride;
    match (&lag, &ham) {
        (Some(l), Some(h)) => {
            write_file(out_dir, &traj_name, &trajectory_csv(l, n, m, false, stride), &mut outcome)?;
            let h_name = format!("{}_hamiltonian.csv", file_stem(&traj_name));
            write_file(out_dir, &h_name, &trajectory_csv(h, n, m, true, stride), &mut outcome)?;
        }
        (Some(l), None) => write_file(out_dir, &traj_name, &trajectory_csv(l, n, m, false, stride), &mut outcome)?,
        (None, Some(h)) => write_file(out_dir, &traj_name, &trajectory_csv(h, n, m, true, stride), &mut outcome)?,
        (None, None) => unreachable!(),
    }
    let diag_name = c
        .output
        .diagnostics
        .clone()
        .unwrap_or_else(|| format!("{}_diagnostics.json", c.name));
    write_file(out_dir, &diag_name, &json::to_string(&report)?, &mut outcome)?;
    for (name, r) in &report.quantities {
        outcome.lines.push(format!("{name}: max drift {:.3e}", r.max_drift));
    }
    if let Some(r) = report.crosscheck_residual {
        outcome.lines.push(format!("lagrangian vs hamiltonian q difference {r:.3e}"));
    }
    Ok(outcome)
}

#[derive(Clone, Debug, Serialize)]
pub struct CrosscheckReport {
    pub scenario: String,
    pub t_end: f64,
    pub dt: f64,
    /// Sup-norm `q` difference between the Lagrangian flow and the Sternberg
    /// Hamiltonian flow of the numerically Legendre-transformed `L`.
    pub q_difference: f64,
    pub q_difference_tolerance: f64,
    pub covariant_residual: f64,
    pub covariant_samples: usize,
    pub covariant_tolerance: f64,
    pub euler_lagrange_residual: f64,
    pub euler_lagrange_tolerance: f64,
    pub pass: bool,
}

pub fn crosscheck(c: &ScenarioConfig, seed: u64) -> Result<CrosscheckReport> {
    let system = build_system(c)?;
    let MethodSpec::Rk4 = c.integrator.method else {
        return Err(ConfigError::Invariant {
            key: "integrator.method".into(),
            message: "crosscheck compares samples on a common grid and needs rk4".into(),
        }
        .into());
    };
    let state0 = initial_state(c)?;
    system.check_domain(&state0.q, &state0.z)?;
    let m = method(c);
    let t_end = c.integrator.t_end;
    let lag = integrate_lagrangian(&system, &state0, t_end, m)?;
    let h = LegendreHamiltonian(system.lagrangian.clone());
    let ham = integrate_hamiltonian(&system, &h, &to_hamiltonian(&system.lagrangian, &state0), t_end, m)?;
    let q_diff = q_difference(&lag, &ham, system.base_dim())?;
    let cov = covariant_table(&system, SAMPLES, seed)?;
    let el = euler_lagrange_residual(&system, &lag)?;
    Ok(CrosscheckReport {
        scenario: c.name.clone(),
        t_end,
        dt: c.integrator.dt,
        q_difference: q_diff,
        q_difference_tolerance: CROSSCHECK_TOL,
        covariant_residual: cov,
        covariant_samples: SAMPLES,
        covariant_tolerance: COVARIANT_TOL,
        euler_lagrange_residual: el,
        euler_lagrange_tolerance: EULER_LAGRANGE_TOL,
        pass: q_diff <= CROSSCHECK_TOL && cov <= COVARIANT_TOL && el <= EULER_LAGRANGE_TOL,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FluxEntry {
    #[serde(flatten)]
    pub report: FluxReport,
    pub expected: f64,
    pub level: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CapDifference {
    pub loop_polar_angle: f64,
    pub action_difference: f64,
    /// `q_e · 4π q_m`
    pub expected: f64,
    pub over_2pi: f64,
    pub single_valued: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuantizeReport {
    pub scenario: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_e: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dirac_condition: Option<bool>,
    pub base_flux: FluxEntry,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbit_flux: Option<FluxEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap_difference: Option<CapDifference>,
}

/// Flux of `Ω_Θ` through the base sphere of radius `|q₀|` (the monopole is
/// evaluated on whichever patch is regular at each point), the orbit-fiber
/// area, the Dirac condition and the two-cap action difference.
pub fn quantize(c: &ScenarioConfig) -> Result<QuantizeReport> {
    let system = build_system(c)?;
    let n = system.base_dim();
    if n != 3 {
        return Err(ConfigError::Invariant {
            key: "initial.q".into(),
            message: "flux checks need a 3-dimensional base".into(),
        }
        .into());
    }
    let q_e = point_charge(&system);
    let q_m = monopole_strength(&system);
    let mut auto_chart = system.chart.clone();
    if let Potential::Monopole(mono) = &mut auto_chart {
        mono.patch = Patch::Auto;
    }
    let radius = match linalg::norm(&c.q) {
        r if r > 1e-6 => r,
        _ => 1.0,
    };
    let form = sternberg_two_form(&system.space, &auto_chart);
    let map = base_sphere_map(vec![0.0; 3], radius, c.z.clone());
    let report = flux_quantization_check(
        &form,
        &TriMesh::icosphere(BASE_FLUX_LEVEL),
        &map,
        FLUX_RULE,
        FLUX_TOL,
    )?;
    let expected = match (q_e, q_m) {
        (Some(e), Some(m)) => 2.0 * e * m,
        _ => 0.0,
    };
    let base_flux = FluxEntry {
        report,
        expected,
        level: BASE_FLUX_LEVEL,
    };

    // the orbit check uses the coadjoint sphere of radius μ = |q_e| when the
    // internal space is a point
    let orbit_mu = match (&system.space, c.group) {
        (Orbit::Sphere(s), _) => Some(s.mu()),
        (Orbit::Point(_), GroupSpec::So2k(_)) => q_e.map(f64::abs).filter(|&mu| mu > 0.0),
        _ => None,
    };
    let orbit_flux = match orbit_mu {
        Some(mu) => {
            let space = SphereOrbit::new(mu)?;
            let chart = ZeroPotential {
                algebra: LieAlgebra::so3(),
                n,
            };
            let form = match &system.space {
                Orbit::Sphere(_) => sternberg_two_form(&system.space, &system.chart),
                Orbit::Point(_) => sternberg_two_form(&Orbit::Sphere(space.clone()), &Potential::Zero(chart)),
            };
            let map = orbit_fiber_map(c.q.clone(), mu);
            let report = flux_quantization_check(
                &form,
                &TriMesh::icosphere(ORBIT_FLUX_LEVEL),
                &map,
                FLUX_RULE,
                FLUX_TOL,
            )?;
            Some(FluxEntry {
                report,
                expected: 2.0 * mu,
                level: ORBIT_FLUX_LEVEL,
            })
        }
        None => None,
    };

    let cap_difference = match (q_e, q_m) {
        (Some(e), Some(m)) => {
            let auto = System {
                space: system.space.clone(),
                chart: auto_chart.clone(),
                lagrangian: system.lagrangian.clone(),
            };
            let caps = [true, false].map(|north| {
                LoopWithCap::new(
                    latitude_loop(CAP_LOOP_ANGLE, vec![]),
                    TriMesh::disk(5),
                    latitude_cap(CAP_LOOP_ANGLE, north, vec![]),
                )
            });
            let [north, south] = caps;
            let diff = loop_action(&auto, &north?, 256)? - loop_action(&auto, &south?, 256)?;
            let over = diff / (2.0 * PI);
            Some(CapDifference {
                loop_polar_angle: CAP_LOOP_ANGLE,
                action_difference: diff,
                expected: e * 4.0 * PI * m,
                over_2pi: over,
                single_valued: (over - over.round()).abs() <= 1e-2,
            })
        }
        _ => None,
    };

    Ok(QuantizeReport {
        scenario: c.name.clone(),
        q_e,
        q_m,
        dirac_condition: match (q_e, q_m) {
            (Some(e), Some(m)) => Some(dirac_condition(e, m)),
            _ => None,
        },
        base_flux,
        orbit_flux,
        cap_difference,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityRow {
    pub name: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl From<IdentityCheck> for IdentityRow {
    fn from(c: IdentityCheck) -> Self {
        let passed = c.passed();
        IdentityRow {
            name: c.name,
            samples: c.samples,
            max_residual: c.max_residual,
            tolerance: c.tolerance,
            passed,
        }
    }
}

fn row(name: &str, samples: usize, max_residual: f64, tolerance: f64) -> IdentityRow {
    IdentityRow {
        name: name.into(),
        samples,
        max_residual,
        tolerance,
        passed: max_residual <= tolerance,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub scenario: String,
    pub seed: u64,
    pub rows: Vec<IdentityRow>,
    pub pass: bool,
}

/// Every identity table for the scenario's phase space.
pub fn verify_identities(c: &ScenarioConfig, seed: u64) -> Result<IdentityReport> {
    let system = build_system(c)?;
    let n = system.base_dim();
    let mut rows: Vec<IdentityRow> = Vec::new();
    for r in classical_identities(n, SAMPLES, seed)? {
        let mut r = IdentityRow::from(r);
        r.name = format!("classical: {}", r.name);
        rows.push(r);
    }
    let mut sampler_rng_owner = |rng: &mut ChaCha8Rng| sample_configuration(&system, rng);
    for r in magnetized_identities(&system.space, &system.chart, &mut sampler_rng_owner, SAMPLES, seed)? {
        let mut r = IdentityRow::from(r);
        r.name = format!("magnetized: {}", r.name);
        rows.push(r);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let d = system.space.algebra().dim();
    let zs: Vec<Vec<f64>> = (0..SAMPLES).map(|_| sample_configuration(&system, &mut rng).1).collect();
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..4)
        .map(|_| {
            let mut draw = || (0..d).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
            (draw(), draw())
        })
        .collect();
    let moments = check_moment_identities(&system.space, &zs, &pairs)?;
    rows.push(row("moment map: Y_xi -| Omega = <xi, dPhi>", SAMPLES, moments.phi1, MOMENT_TOL));
    rows.push(row("moment map: Omega(Y_xi1, Y_xi2) = <[xi1, xi2], Phi>", SAMPLES, moments.phi2, MOMENT_TOL));
    rows.push(row(
        "covariant equations of motion",
        SAMPLES,
        covariant_table(&system, SAMPLES, seed)?,
        COVARIANT_TOL,
    ));
    let pass = rows.iter().all(|r| r.passed);
    Ok(IdentityReport {
        scenario: c.name.clone(),
        seed,
        rows,
        pass,
    })
}

/// Runs one mode and writes its output files into `out_dir`.
pub fn run(c: &ScenarioConfig, mode: Mode, out_dir: &Path, seed: u64) -> Result<RunOutcome> {
    match mode {
        Mode::Integrate => run_integrate(c, out_dir),
        Mode::Crosscheck => {
            let r = crosscheck(c, seed)?;
            let mut out = RunOutcome {
                passed: true,
                lines: vec![
                    format!("q difference {:.3e} (tolerance {:.0e})", r.q_difference, r.q_difference_tolerance),
                    format!("covariant residual {:.3e} (tolerance {:.0e})", r.covariant_residual, r.covariant_tolerance),
                    format!(
                        "Euler-Lagrange residual {:.3e} (tolerance {:.0e})",
                        r.euler_lagrange_residual, r.euler_lagrange_tolerance
                    ),
                ],
                ..Default::default()
            };
            write_file(out_dir, &format!("{}_crosscheck.json", c.name), &json::to_string(&r)?, &mut out)?;
            Ok(out)
        }
        Mode::Quantize => {
            let r = quantize(c)?;
            let mut out = RunOutcome {
                passed: true,
                ..Default::default()
            };
            let fmt_flux = |label: &str, f: &FluxEntry| {
                format!(
                    "{label}: flux/2pi {:.6} (expected {:.6}), {}",
                    f.report.flux_over_2pi,
                    f.expected,
                    if f.report.pass { "integral" } else { "not integral" }
                )
            };
            out.lines.push(fmt_flux("base sphere", &r.base_flux));
            if let Some(f) = &r.orbit_flux {
                out.lines.push(fmt_flux("orbit fiber", f));
            }
            if let Some(ok) = r.dirac_condition {
                out.lines.push(format!("dirac condition q_e q_m in Z/2: {ok}"));
            }
            if let Some(cd) = &r.cap_difference {
                out.lines.push(format!(
                    "cap difference {:.6} (expected {:.6})",
                    cd.action_difference, cd.expected
                ));
            }
            write_file(out_dir, &format!("{}_quantize.json", c.name), &json::to_string(&r)?, &mut out)?;
            Ok(out)
        }
        Mode::VerifyIdentities => {
            let r = verify_identities(c, seed)?;
            let mut out = RunOutcome {
                passed: r.pass,
                lines: r
                    .rows
                    .iter()
                    .map(|row| {
                        format!(
                            "{} {:<58} {:.3e} <= {:.0e}",
                            if row.passed { "PASS" } else { "FAIL" },
                            row.name,
                            row.max_residual,
                            row.tolerance
                        )
                    })
                    .collect(),
                ..Default::default()
            };
            write_file(out_dir, &format!("{}_identities.json", c.name), &json::to_string(&r)?, &mut out)?;
            Ok(out)
        }
    }
}

/// Reads a config file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path)?;
    Ok(super::parse_config(&text)?)
}

/// Parses a built-in scenario by name.
pub fn builtin_config(name: &str) -> Result<ScenarioConfig> {
    let text = super::builtin_text(name).ok_or_else(|| {
        Error::Config(ConfigError::Invariant {
            key: "builtin".into(),
            message: format!("no built-in scenario `{name}`; known: {}", super::builtin_names().join(", ")),
        })
    })?;
    Ok(super::parse_config(text)?)
}
