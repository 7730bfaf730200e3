//! The textbook Lagrangian, the loop action with its surface term, and
//! charge quantization by flux integration.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use serde::Serialize;

use crate::ad::{self, Dual, Real, D1};
use crate::dynamics::{sternberg_matrix_generic, Lagrangian, LagrangianState, System, Trajectory};
use crate::error::{check_dim, Error, Result};
use crate::forms::{self, DifferentialForm, Quadrature};
use crate::gauge::GaugePotential;
use crate::internal::InternalSpace;
use crate::mesh::TriMesh;

/// Tolerance on [`dirac_condition`].
pub const DIRAC_TOL: f64 = 1e-9;
/// Distance allowed between a cap boundary and its loop.
pub const CAP_BOUNDARY_TOL: f64 = 1e-10;

/// `𝓛 = L − ⟨q̇^iA_i, Φ⟩ + x·ẏ` for a Darboux chart `z = (x, y)`,
/// `Ω = Σ dx^k∧dy^k`.
#[derive(Clone, Debug)]
pub struct TextbookLagrangian<'a, I, A, L> {
    system: &'a System<I, A, L>,
}

/// Builds `𝓛`; the internal chart must be Darboux.
pub fn textbook_lagrangian<I: InternalSpace, A: GaugePotential, L: Lagrangian>(
    system: &System<I, A, L>,
) -> Result<TextbookLagrangian<'_, I, A, L>> {
    if !system.space.is_darboux() {
        return Err(Error::InvalidArgument(
            "textbook Lagrangian needs a Darboux internal chart".into(),
        ));
    }
    Ok(TextbookLagrangian { system })
}

impl<I: InternalSpace, A: GaugePotential, L: Lagrangian> TextbookLagrangian<'_, I, A, L> {
    pub fn eval<S: Real>(&self, q: &[S], v: &[S], z: &[S], zdot: &[S]) -> S {
        let s = self.system;
        let phi = s.space.moment(z);
        let pot = s.chart.potential(q);
        let mut out = s.lagrangian.eval(q, v, z);
        for (vi, ai) in v.iter().zip(&pot) {
            for (a, p) in ai.iter().zip(&phi) {
                out -= *vi * *a * *p;
            }
        }
        let m = z.len() / 2;
        for k in 0..m {
            out += z[k] * zdot[m + k];
        }
        out
    }

    /// `(∂𝓛/∂(q, z), ∂𝓛/∂(q̇, ż))` at a point.
    fn partials(&self, q: &[f64], v: &[f64], z: &[f64], zdot: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (n, m) = (q.len(), z.len());
        let x = [q, z, v, zdot].concat();
        let g = ad::gradient(&x, |d| self.eval(&d[..n], &d[n + m..2 * n + m], &d[n..n + m], &d[2 * n + m..]));
        (g[..n + m].to_vec(), g[n + m..].to_vec())
    }
}

/// Max Euler-Lagrange residual `|d/dt ∂𝓛/∂ẏ − ∂𝓛/∂y|` over the interior
/// samples of a Lagrangian trajectory, `y = (q, z)`. Velocities `ż` come from
/// the equations of motion; the time derivative is a central difference on
/// the sample grid.
pub fn euler_lagrange_residual<I: InternalSpace, A: GaugePotential, L: Lagrangian>(
    system: &System<I, A, L>,
    trajectory: &Trajectory,
) -> Result<f64> {
    let tl = textbook_lagrangian(system)?;
    let n = system.base_dim();
    if trajectory.len() < 3 {
        return Err(Error::InvalidArgument("need at least three samples".into()));
    }
    let mut force = Vec::with_capacity(trajectory.len());
    let mut momenta = Vec::with_capacity(trajectory.len());
    for x in &trajectory.states {
        let st = LagrangianState::from_slice(x, n);
        let rhs = system.lagrangian_rhs(&st)?;
        let (f, p) = tl.partials(&st.q, &st.v, &st.z, &rhs[2 * n..]);
        force.push(f);
        momenta.push(p);
    }
    let t = &trajectory.times;
    let mut worst: f64 = 0.0;
    for k in 1..t.len() - 1 {
        // three-point derivative at t[k], exact for quadratics on uneven grids
        let (h1, h2) = (t[k] - t[k - 1], t[k + 1] - t[k]);
        let (a, b, c2) = (-h2 / (h1 * (h1 + h2)), (h2 - h1) / (h1 * h2), h1 / (h2 * (h1 + h2)));
        for c in 0..force[k].len() {
            let dp = a * momenta[k - 1][c] + b * momenta[k][c] + c2 * momenta[k + 1][c];
            worst = worst.max((dp - force[k][c]).abs());
        }
    }
    Ok(worst)
}

/// `Ω_Θ = Ω − d⟨A, Φ⟩` on the `(q, z)` chart.
pub fn sternberg_two_form<I, A>(space: &I, chart: &A) -> DifferentialForm
where
    I: InternalSpace + Clone + Send + Sync + 'static,
    A: GaugePotential + Clone + Send + Sync + 'static,
{
    let n = chart.base_dim();
    let m = space.dim();
    let (space, chart) = (space.clone(), chart.clone());
    DifferentialForm::two_form(n + m, move |y| {
        let w = sternberg_matrix_generic(&space, &chart, &y[..n], &y[n..]);
        let idx: Vec<usize> = (0..n).chain(2 * n..2 * n + m).collect();
        idx.iter().map(|&r| idx.iter().map(|&c| w[r][c]).collect()).collect()
    })
}

/// A closed curve in the `(q, z)` chart with a spanning disk.
///
/// The cap is parameterized on [`TriMesh::disk`]; the boundary point at
/// polar angle `φ` must map to `loop(φ/2π)`.
#[derive(Clone)]
pub struct LoopWithCap {
    curve: Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
    cap: TriMesh,
    cap_map: Arc<dyn Fn(&[D1]) -> Vec<D1> + Send + Sync>,
}

impl std::fmt::Debug for LoopWithCap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LoopWithCap({} triangles)", self.cap.triangles.len())
    }
}

impl LoopWithCap {
    pub fn new(
        curve: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static,
        cap: TriMesh,
        cap_map: impl Fn(&[D1]) -> Vec<D1> + Send + Sync + 'static,
    ) -> Result<Self> {
        let lc = Self {
            curve: Arc::new(curve),
            cap,
            cap_map: Arc::new(cap_map),
        };
        for i in lc.cap.boundary_vertices() {
            let v = &lc.cap.vertices[i];
            let t = v[1].atan2(v[0]).rem_euclid(TAU) / TAU;
            let on_cap: Vec<f64> = (lc.cap_map)(&ad::lift(v)).iter().map(|d| d.re).collect();
            let on_loop = (lc.curve)(t);
            check_dim(on_loop.len(), on_cap.len())?;
            let gap = crate::linalg::max_abs_diff(&on_cap, &on_loop);
            if !(gap <= CAP_BOUNDARY_TOL) {
                return Err(Error::InvalidArgument(format!(
                    "cap boundary misses the loop by {gap:e} at t = {t}"
                )));
            }
        }
        Ok(lc)
    }

    pub fn point(&self, t: f64) -> Vec<f64> {
        (self.curve)(t)
    }
}

/// `S[γ] = ∫₀¹ L(q, q', z) dt + ∫_Σ Ω_Θ`. The first term is the periodic
/// trapezoid rule on `n_time` nodes with central-difference velocities.
pub fn loop_action<I, A, L>(system: &System<I, A, L>, loop_cap: &LoopWithCap, n_time: usize) -> Result<f64>
where
    I: InternalSpace + Clone + Send + Sync + 'static,
    A: GaugePotential + Clone + Send + Sync + 'static,
    L: Lagrangian,
{
    if n_time == 0 {
        return Err(Error::InvalidArgument("n_time must be positive".into()));
    }
    let n = system.base_dim();
    let h = 1e-5;
    let mut line = 0.0;
    for k in 0..n_time {
        let t = k as f64 / n_time as f64;
        let y = loop_cap.point(t);
        check_dim(n + system.internal_dim(), y.len())?;
        system.check_domain(&y[..n], &y[n..])?;
        let (a, b) = (loop_cap.point(t + h), loop_cap.point(t - h));
        let v: Vec<f64> = (0..n).map(|i| (a[i] - b[i]) / (2.0 * h)).collect();
        line += system.lagrangian.eval(&y[..n], &v, &y[n..]);
    }
    line /= n_time as f64;
    let surface = forms::surface_integral(
        &sternberg_two_form(&system.space, &system.chart),
        &loop_cap.cap,
        &*loop_cap.cap_map,
    )?;
    Ok(line + surface)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FluxReport {
    pub flux_over_2pi: f64,
    pub nearest_integer: i64,
    pub tolerance: f64,
    pub pass: bool,
}

/// `∫ form / 2π` over a closed triangulated cycle, and whether it is within
/// `tol` of an integer.
pub fn flux_quantization_check(
    form: &DifferentialForm,
    cycle: &TriMesh,
    map: &dyn Fn(&[D1]) -> Vec<D1>,
    rule: Quadrature,
    tol: f64,
) -> Result<FluxReport> {
    if !cycle.is_closed() {
        return Err(Error::InvalidArgument("flux cycle must be closed".into()));
    }
    let value = forms::surface_integral_with(form, cycle, map, rule)? / TAU;
    let nearest = value.round();
    Ok(FluxReport {
        flux_over_2pi: value,
        nearest_integer: nearest as i64,
        tolerance: tol,
        pass: (value - nearest).abs() <= tol,
    })
}

/// `q_e q_m ∈ ½ℤ`.
pub fn dirac_condition(q_e: f64, q_m: f64) -> bool {
    let x = 2.0 * q_e * q_m;
    (x - x.round()).abs() <= DIRAC_TOL
}

/// Icosphere of radius `radius` about `center` in the base, at fixed internal
/// point `z`, as a map from mesh coordinates to the `(q, z)` chart.
pub fn base_sphere_map(center: Vec<f64>, radius: f64, z: Vec<f64>) -> impl Fn(&[D1]) -> Vec<D1> {
    move |u| {
        let r = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        let mut out: Vec<D1> = (0..3).map(|k| u[k] * D1::cst(radius) / r + D1::cst(center[k])).collect();
        out.extend(z.iter().map(|&x| D1::cst(x)));
        out
    }
}

/// The sphere-orbit fiber over a base point `q`: mesh point `u` goes to
/// `(q, atan2(u₂, u₁), μ u₃/|u|)`.
pub fn orbit_fiber_map(q: Vec<f64>, mu: f64) -> impl Fn(&[D1]) -> Vec<D1> {
    move |u| {
        let r = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        let mut out: Vec<D1> = q.iter().map(|&x| D1::cst(x)).collect();
        out.push(u[1].atan2(u[0]));
        out.push(u[2].scale(mu) / r);
        out
    }
}

/// Loop at polar angle `theta0` on the unit base sphere, traversed once
/// counter-clockwise about `+z`, with internal point `z`.
pub fn latitude_loop(theta0: f64, z: Vec<f64>) -> impl Fn(f64) -> Vec<f64> + Send + Sync + Clone {
    move |t| {
        let phi = TAU * t;
        let mut out = vec![theta0.sin() * phi.cos(), theta0.sin() * phi.sin(), theta0.cos()];
        out.extend_from_slice(&z);
        out
    }
}

/// Cap of [`latitude_loop`] through the north pole (`north = true`) or the
/// south pole. Disk radius `ρ` maps to polar angle `ρθ₀` or `π − ρ(π − θ₀)`.
pub fn latitude_cap(theta0: f64, north: bool, z: Vec<f64>) -> impl Fn(&[D1]) -> Vec<D1> + Send + Sync {
    move |w| {
        let rho = (w[0] * w[0] + w[1] * w[1]).sqrt();
        let span = if north { theta0 } else { PI - theta0 };
        let angle = rho.scale(span);
        // sin(ρs)/ρ extended smoothly to ρ = 0
        let s = if rho.re < 1e-12 {
            D1::cst(span)
        } else {
            angle.sin() / rho
        };
        let height = if north { angle.cos() } else { -angle.cos() };
        let mut out = vec![w[0] * s, w[1] * s, height];
        out.extend(z.iter().map(|&x| Dual::constant(x)));
        out
    }
}
