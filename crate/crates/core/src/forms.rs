//! Differential forms as black-box multilinear evaluators on a chart.
//!
//! A `k`-form on an `n`-dimensional chart is a function of a base point and
//! `k` tangent vectors. Derivatives of black-box forms use central
//! differences with `h = 1e-5·max(1, |x|∞)`; forms built from AD-traceable
//! components should be assembled directly instead.

use std::fmt;
use std::sync::Arc;

use crate::ad::{self, D1};
use crate::error::{check_dim, Error, Result};
use crate::mesh::TriMesh;

type FormFn = dyn Fn(&[f64], &[&[f64]]) -> f64 + Send + Sync;

/// A vector field on a chart.
pub type VectorField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub struct DifferentialForm {
    degree: usize,
    dim: usize,
    eval: Arc<FormFn>,
}

impl fmt::Debug for DifferentialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DifferentialForm({}-form on ℝ^{})", self.degree, self.dim)
    }
}

impl DifferentialForm {
    pub fn new(
        degree: usize,
        dim: usize,
        eval: impl Fn(&[f64], &[&[f64]]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            degree,
            dim,
            eval: Arc::new(eval),
        }
    }

    pub fn zero(degree: usize, dim: usize) -> Self {
        Self::new(degree, dim, |_, _| 0.0)
    }

    pub fn function(dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(0, dim, move |x, _| f(x))
    }

    /// `α = α_i(x) dx^i`.
    pub fn one_form(dim: usize, coeffs: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self::new(1, dim, move |x, v| {
            coeffs(x).iter().zip(v[0]).map(|(a, b)| a * b).sum()
        })
    }

    /// `ω(u, w) = uᵀ W(x) w` for antisymmetric `W`.
    pub fn two_form(
        dim: usize,
        matrix: impl Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        Self::new(2, dim, move |x, v| {
            crate::internal::bilinear(&matrix(x), v[0], v[1])
        })
    }

    /// `dx^i`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        Self::new(1, dim, move |_, v| v[0][i])
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn evaluate(&self, x: &[f64], vectors: &[&[f64]]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        check_dim(self.degree, vectors.len())?;
        for v in vectors {
            check_dim(self.dim, v.len())?;
        }
        Ok((self.eval)(x, vectors))
    }

    /// Evaluation without dimension checks, for inner loops.
    pub fn eval(&self, x: &[f64], vectors: &[&[f64]]) -> f64 {
        (self.eval)(x, vectors)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Ok(Self::new(self.degree, self.dim, move |x, v| a(x, v) + b(x, v)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Ok(Self::new(self.degree, self.dim, move |x, v| a(x, v) - b(x, v)))
    }

    pub fn scale(&self, c: f64) -> Self {
        let a = self.eval.clone();
        Self::new(self.degree, self.dim, move |x, v| c * a(x, v))
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        check_dim(self.degree, other.degree)?;
        check_dim(self.dim, other.dim)
    }
}

fn step(x: &[f64]) -> f64 {
    1e-5 * x.iter().fold(1.0_f64, |m, v| m.max(v.abs()))
}

fn without(vs: &[&[f64]], skip: usize) -> Vec<Vec<f64>> {
    vs.iter()
        .enumerate()
        .filter(|&(i, _)| i != skip)
        .map(|(_, v)| v.to_vec())
        .collect()
}

fn as_refs(vs: &[Vec<f64>]) -> Vec<&[f64]> {
    vs.iter().map(Vec::as_slice).collect()
}

/// `dα(v₀…v_k) = Σ (−1)^i D_{v_i} α(v₀…v̂_i…v_k)` for constant vector fields.
pub fn exterior_derivative(form: &DifferentialForm) -> Result<DifferentialForm> {
    if form.degree >= form.dim {
        return Err(Error::InvalidArgument(format!(
            "cannot differentiate a {}-form on a {}-dimensional chart",
            form.degree, form.dim
        )));
    }
    let a = form.eval.clone();
    Ok(DifferentialForm::new(form.degree + 1, form.dim, move |x, vs| {
        let h = step(x);
        let mut total = 0.0;
        for (i, vi) in vs.iter().enumerate() {
            let rest = without(vs, i);
            let rest = as_refs(&rest);
            let xp: Vec<f64> = x.iter().zip(*vi).map(|(a, b)| a + h * b).collect();
            let xm: Vec<f64> = x.iter().zip(*vi).map(|(a, b)| a - h * b).collect();
            let d = (a(&xp, &rest) - a(&xm, &rest)) / (2.0 * h);
            total += if i % 2 == 0 { d } else { -d };
        }
        total
    }))
}

/// `X ⌟ α`, contracting in the first slot.
pub fn interior_product(field: VectorField, form: &DifferentialForm) -> Result<DifferentialForm> {
    if form.degree == 0 {
        return Err(Error::InvalidArgument("interior product of a 0-form".into()));
    }
    let a = form.eval.clone();
    Ok(DifferentialForm::new(form.degree - 1, form.dim, move |x, vs| {
        let xv = field(x);
        let mut args: Vec<&[f64]> = Vec::with_capacity(vs.len() + 1);
        args.push(&xv);
        args.extend_from_slice(vs);
        a(x, &args)
    }))
}

/// `α ∧ β` by a sum over shuffles.
pub fn wedge(alpha: &DifferentialForm, beta: &DifferentialForm) -> Result<DifferentialForm> {
    check_dim(alpha.dim, beta.dim)?;
    let (k, l) = (alpha.degree, beta.degree);
    let shuffles = shuffles(k, l);
    let (a, b) = (alpha.eval.clone(), beta.eval.clone());
    Ok(DifferentialForm::new(k + l, alpha.dim, move |x, vs| {
        shuffles
            .iter()
            .map(|(sign, left, right)| {
                let lv: Vec<&[f64]> = left.iter().map(|&i| vs[i]).collect();
                let rv: Vec<&[f64]> = right.iter().map(|&i| vs[i]).collect();
                sign * a(x, &lv) * b(x, &rv)
            })
            .sum()
    }))
}

/// `(k, l)`-shuffles with their signs.
fn shuffles(k: usize, l: usize) -> Vec<(f64, Vec<usize>, Vec<usize>)> {
    let n = k + l;
    let mut out = Vec::new();
    for mask in 0u64..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let left: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let right: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 0).collect();
        // inversions between the two blocks
        let inv: usize = left
            .iter()
            .map(|&i| right.iter().filter(|&&j| j < i).count())
            .sum();
        out.push((if inv % 2 == 0 { 1.0 } else { -1.0 }, left, right));
    }
    out
}

/// Pullback `F*α` along a chart map with its pushforward `DF(x)·v`.
pub fn pullback(
    form: &DifferentialForm,
    source_dim: usize,
    map: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    push: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
) -> DifferentialForm {
    let a = form.eval.clone();
    DifferentialForm::new(form.degree, source_dim, move |x, vs| {
        let y = map(x);
        let pushed: Vec<Vec<f64>> = vs.iter().map(|v| push(x, v)).collect();
        a(&y, &as_refs(&pushed))
    })
}

/// Pullback along an AD-traceable map; the pushforward is exact.
pub fn pullback_ad(
    form: &DifferentialForm,
    source_dim: usize,
    map: impl Fn(&[D1]) -> Vec<D1> + Send + Sync + 'static,
) -> DifferentialForm {
    let map = Arc::new(map);
    let m2 = map.clone();
    pullback(
        form,
        source_dim,
        move |x| map(&ad::lift(x)).into_iter().map(|d| d.re).collect(),
        move |x, v| ad::jvp(x, v, |d| m2(d)),
    )
}

/// `i_T α` on the tangent chart `(x, ẋ)`: `(i_Tα)(V…) = α(x)(ẋ, πV…)`,
/// with `π` the projection onto base components. `i_T` of a function is 0.
pub fn tangent_interior(form: &DifferentialForm) -> DifferentialForm {
    let n = form.dim;
    if form.degree == 0 {
        return DifferentialForm::zero(0, 2 * n);
    }
    let a = form.eval.clone();
    DifferentialForm::new(form.degree - 1, 2 * n, move |x, vs| {
        let (base, vel) = x.split_at(n);
        let mut args: Vec<&[f64]> = Vec::with_capacity(vs.len() + 1);
        args.push(vel);
        args.extend(vs.iter().map(|v| &v[..n]));
        a(base, &args)
    })
}

/// Pullback of `α` to the tangent chart along the projection `τ`.
pub fn tangent_projection(form: &DifferentialForm) -> DifferentialForm {
    let n = form.dim;
    let a = form.eval.clone();
    DifferentialForm::new(form.degree, 2 * n, move |x, vs| {
        let proj: Vec<&[f64]> = vs.iter().map(|v| &v[..n]).collect();
        a(&x[..n], &proj)
    })
}

/// `d_T = d∘i_T + i_T∘d`.
pub fn tangent_lift(form: &DifferentialForm) -> Result<DifferentialForm> {
    let first = if form.degree == 0 {
        DifferentialForm::zero(0, 2 * form.dim)
    } else {
        exterior_derivative(&tangent_interior(form))?
    };
    let second = if form.degree < form.dim {
        tangent_interior(&exterior_derivative(form)?)
    } else {
        DifferentialForm::zero(form.degree, 2 * form.dim)
    };
    if form.degree == 0 {
        return Ok(second);
    }
    first.add(&second)
}

/// Quadrature rule applied on each flat parameter triangle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Quadrature {
    /// One point at the centroid; second order under refinement.
    #[default]
    Centroid,
    /// Three edge midpoints with equal weights; exact for quadratic
    /// integrands on the parameter triangle.
    EdgeMidpoint,
}

/// Centroid quadrature of a 2-form over a triangulated surface. `map` sends
/// mesh coordinates to chart coordinates, including any reprojection onto
/// the cycle. Triangles are summed in index order.
pub fn surface_integral(
    form: &DifferentialForm,
    mesh: &TriMesh,
    map: &dyn Fn(&[D1]) -> Vec<D1>,
) -> Result<f64> {
    surface_integral_with(form, mesh, map, Quadrature::Centroid)
}

pub fn surface_integral_with(
    form: &DifferentialForm,
    mesh: &TriMesh,
    map: &dyn Fn(&[D1]) -> Vec<D1>,
    rule: Quadrature,
) -> Result<f64> {
    if form.degree != 2 {
        return Err(Error::InvalidArgument(format!(
            "surface integral needs a 2-form, got degree {}",
            form.degree
        )));
    }
    let nodes: &[([f64; 3], f64)] = match rule {
        Quadrature::Centroid => &[([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 1.0)],
        Quadrature::EdgeMidpoint => &[
            ([0.5, 0.5, 0.0], 1.0 / 3.0),
            ([0.0, 0.5, 0.5], 1.0 / 3.0),
            ([0.5, 0.0, 0.5], 1.0 / 3.0),
        ],
    };
    let mut total = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let [p0, p1, p2] = tri.map(|i| mesh.vertices[i].as_slice());
        let e1: Vec<f64> = p1.iter().zip(p0).map(|(a, b)| a - b).collect();
        let e2: Vec<f64> = p2.iter().zip(p0).map(|(a, b)| a - b).collect();
        let gram = crate::linalg::dot(&e1, &e1) * crate::linalg::dot(&e2, &e2)
            - crate::linalg::dot(&e1, &e2).powi(2);
        if !(gram > 1e-30) {
            return Err(Error::InvalidArgument(format!("degenerate triangle {t}")));
        }
        for (bary, weight) in nodes {
            let c: Vec<f64> = (0..p0.len())
                .map(|k| bary[0] * p0[k] + bary[1] * p1[k] + bary[2] * p2[k])
                .collect();
            let y: Vec<f64> = map(&ad::lift(&c)).into_iter().map(|d| d.re).collect();
            check_dim(form.dim, y.len())?;
            let u = ad::jvp(&c, &e1, map);
            let w = ad::jvp(&c, &e2, map);
            total += 0.5 * weight * form.eval(&y, &[&u, &w]);
        }
    }
    if !total.is_finite() {
        return Err(Error::NonFinite("surface integral"));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rv(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn area12(dim: usize) -> DifferentialForm {
        wedge(&DifferentialForm::coordinate(dim, 0), &DifferentialForm::coordinate(dim, 1)).unwrap()
    }

    #[test]
    fn derivative_of_constant_form_vanishes() {
        let f = DifferentialForm::one_form(3, |_| vec![1.0, -2.0, 0.5]);
        let df = exterior_derivative(&f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let (x, u, w) = (rv(&mut rng, 3), rv(&mut rng, 3), rv(&mut rng, 3));
            assert!(df.evaluate(&x, &[&u, &w]).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn d_of_q1_dq2_is_area_form() {
        let f = DifferentialForm::one_form(2, |x| vec![0.0, x[0]]);
        let df = exterior_derivative(&f).unwrap();
        let v = df.evaluate(&[0.3, 0.7], &[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn d_squared_vanishes() {
        let f = DifferentialForm::function(3, |x| (x[0] * x[1]).sin() + x[2].powi(3) * x[0]);
        let ddf = exterior_derivative(&exterior_derivative(&f).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let (x, u, w) = (rv(&mut rng, 3), rv(&mut rng, 3), rv(&mut rng, 3));
            assert!(ddf.evaluate(&x, &[&u, &w]).unwrap().abs() < 1e-5);
        }
    }

    #[test]
    fn interior_product_examples() {
        let a = area12(2);
        let e1: VectorField = Arc::new(|_| vec![1.0, 0.0]);
        let c = interior_product(e1.clone(), &a).unwrap();
        let dq2 = DifferentialForm::coordinate(2, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let (x, v) = (rv(&mut rng, 2), rv(&mut rng, 2));
            assert!((c.eval(&x, &[&v]) - dq2.eval(&x, &[&v])).abs() < 1e-15);
        }
        let cc = interior_product(e1.clone(), &c).unwrap();
        assert_eq!(cc.eval(&[0.2, 0.1], &[]), 0.0);
        assert!(interior_product(e1, &DifferentialForm::function(2, |_| 1.0)).is_err());
    }

    #[test]
    fn wedge_is_antisymmetric_and_multilinear() {
        let a = DifferentialForm::one_form(3, |x| vec![x[1], 1.0, x[0] * x[2]]);
        let b = DifferentialForm::one_form(3, |x| vec![0.5, x[2], -x[0]]);
        let c = DifferentialForm::one_form(3, |x| vec![x[0], x[1], 2.0]);
        let w = wedge(&wedge(&a, &b).unwrap(), &c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let x = rv(&mut rng, 3);
            let (u, v, t, s) = (rv(&mut rng, 3), rv(&mut rng, 3), rv(&mut rng, 3), rv(&mut rng, 3));
            let base = w.eval(&x, &[&u, &v, &t]);
            assert!((base + w.eval(&x, &[&v, &u, &t])).abs() < 1e-10);
            assert!((base + w.eval(&x, &[&u, &t, &v])).abs() < 1e-10);
            let us: Vec<f64> = u.iter().zip(&s).map(|(p, q)| 2.0 * p + q).collect();
            let lin = 2.0 * base + w.eval(&x, &[&s, &v, &t]);
            assert!((w.eval(&x, &[&us, &v, &t]) - lin).abs() < 1e-10);
        }
    }

    #[test]
    fn leibniz_rule() {
        let f = DifferentialForm::one_form(3, |x| vec![x[1] * x[2], x[0].sin(), x[2] * x[0]]);
        let g = DifferentialForm::one_form(3, |x| vec![x[0] * x[0], x[2], x[1].cos()]);
        let lhs = exterior_derivative(&wedge(&f, &g).unwrap()).unwrap();
        let rhs = wedge(&exterior_derivative(&f).unwrap(), &g)
            .unwrap()
            .sub(&wedge(&f, &exterior_derivative(&g).unwrap()).unwrap())
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let x = rv(&mut rng, 3);
            let (u, v, t) = (rv(&mut rng, 3), rv(&mut rng, 3), rv(&mut rng, 3));
            let r = lhs.eval(&x, &[&u, &v, &t]) - rhs.eval(&x, &[&u, &v, &t]);
            assert!(r.abs() < 1e-5);
        }
    }

    #[test]
    fn tangent_interior_examples() {
        let t = tangent_interior(&area12(2));
        // i_T(dq¹∧dq²) = q̇¹dq² − q̇²dq¹
        let x = [0.3, -0.2, 1.5, 0.7];
        let v = [0.4, 0.9, -3.0, 8.0];
        assert!((t.eval(&x, &[&v]) - (1.5 * 0.9 - 0.7 * 0.4)).abs() < 1e-15);
        let a = DifferentialForm::one_form(2, |x| vec![x[0], 2.0]);
        let ta = tangent_interior(&a);
        assert!((ta.eval(&x, &[]) - (0.3 * 1.5 + 2.0 * 0.7)).abs() < 1e-15);
        assert_eq!(tangent_interior(&DifferentialForm::function(2, |_| 1.0)).eval(&x, &[]), 0.0);
    }

    #[test]
    fn tangent_lift_of_closed_form() {
        let f = area12(2);
        let lifted = tangent_lift(&f).unwrap();
        let reference = exterior_derivative(&tangent_interior(&f)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let (x, u, w) = (rv(&mut rng, 4), rv(&mut rng, 4), rv(&mut rng, 4));
            assert!((lifted.eval(&x, &[&u, &w]) - reference.eval(&x, &[&u, &w])).abs() < 1e-8);
        }
    }

    #[test]
    fn pullback_of_area_under_rotation() {
        let f = area12(2);
        let p = pullback_ad(&f, 2, |x| {
            use crate::ad::Real;
            let (c, s) = (D1::cst(0.6), D1::cst(0.8));
            vec![x[0] * c - x[1] * s, x[0] * s + x[1] * c]
        });
        let v = p.evaluate(&[0.1, 0.2], &[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    fn unit_sphere_area_form() -> DifferentialForm {
        DifferentialForm::new(2, 3, |x, v| {
            let n = crate::linalg::norm(x);
            crate::linalg::dot(&crate::linalg::cross(v[0], v[1]), x) / n
        })
    }

    fn onto_sphere(x: &[D1]) -> Vec<D1> {
        use crate::ad::Real;
        let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        x.iter().map(|&c| c / n).collect()
    }

    #[test]
    fn sphere_area_by_icosahedral_refinement() {
        let area = unit_sphere_area_form();
        let mut errs = Vec::new();
        for level in 0..=4 {
            let v = surface_integral(&area, &TriMesh::icosphere(level), &onto_sphere).unwrap();
            errs.push((v - 4.0 * std::f64::consts::PI).abs());
        }
        // second order: each refinement cuts the error by about 4
        for w in errs.windows(2) {
            assert!(w[1] < w[0] / 3.0 && w[1] > w[0] / 5.0);
        }
        assert!(errs[4] < 1e-2);
        let v = surface_integral_with(&area, &TriMesh::icosphere(4), &onto_sphere, Quadrature::EdgeMidpoint)
            .unwrap();
        assert!((v - 4.0 * std::f64::consts::PI).abs() < 1e-3);
        let zero = DifferentialForm::zero(2, 3);
        assert_eq!(surface_integral(&zero, &TriMesh::icosphere(1), &onto_sphere).unwrap(), 0.0);
    }

    #[test]
    fn shuffle_signs() {
        let s = shuffles(1, 1);
        assert_eq!(s.len(), 2);
        let s = shuffles(2, 1);
        assert_eq!(s.len(), 3);
        assert_eq!(s.iter().map(|x| x.0).sum::<f64>(), 1.0);
    }
}
