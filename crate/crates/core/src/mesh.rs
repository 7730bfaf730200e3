//! Triangulated parameter surfaces for flux and action integrals.

use std::collections::HashMap;

/// Flat triangles in a parameter space, oriented counter-clockwise as seen
/// from the side the surface normal points to.
#[derive(Clone, Debug, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Vec<f64>>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriMesh {
    /// Regular icosahedron inscribed in the unit sphere, outward normals.
    /// No vertex lies on the coordinate axes.
    pub fn icosahedron() -> Self {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let raw = [
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ];
        let vertices = raw.iter().map(|v| normalized(v)).collect();
        let triangles = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        Self { vertices, triangles }
    }

    /// Icosahedron refined `level` times with midpoints pushed onto the unit
    /// sphere.
    pub fn icosphere(level: usize) -> Self {
        let mut m = Self::icosahedron();
        for _ in 0..level {
            m = m.subdivide(|p, _| {
                let n = normalized(p);
                p.copy_from_slice(&n);
            });
        }
        m
    }

    /// Unit disk in the plane starting from a hexagon fan, refined `level`
    /// times with boundary midpoints pushed onto the unit circle.
    pub fn disk(level: usize) -> Self {
        let mut vertices = vec![vec![0.0, 0.0]];
        for k in 0..6 {
            let a = std::f64::consts::TAU * k as f64 / 6.0;
            vertices.push(vec![a.cos(), a.sin()]);
        }
        let triangles = (0..6).map(|k| [0, 1 + k, 1 + (k + 1) % 6]).collect();
        let mut m = Self { vertices, triangles };
        for _ in 0..level {
            m = m.subdivide(|p, boundary| {
                if boundary {
                    let n = normalized(p);
                    p.copy_from_slice(&n);
                }
            });
        }
        m
    }

    /// Four-way subdivision. `project` receives each new midpoint and whether
    /// it lies on a boundary edge.
    pub fn subdivide(&self, project: impl Fn(&mut [f64], bool)) -> Self {
        let counts = self.edge_counts();
        let mut vertices = self.vertices.clone();
        let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vec<f64>>| -> usize {
            let key = (a.min(b), a.max(b));
            *mids.entry(key).or_insert_with(|| {
                let mut p: Vec<f64> = vertices[a]
                    .iter()
                    .zip(&vertices[b])
                    .map(|(x, y)| 0.5 * (x + y))
                    .collect();
                project(&mut p, counts[&key] == 1);
                vertices.push(p);
                vertices.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        Self { vertices, triangles }
    }

    fn edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut counts = HashMap::new();
        for &[a, b, c] in &self.triangles {
            for (u, v) in [(a, b), (b, c), (c, a)] {
                *counts.entry((u.min(v), u.max(v))).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Vertices on edges used by exactly one triangle.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edge_counts()
            .into_iter()
            .filter(|&(_, c)| c == 1)
            .flat_map(|((a, b), _)| [a, b])
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// True when every edge is shared by exactly two triangles with opposite
    /// orientations.
    pub fn is_closed(&self) -> bool {
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for &[a, b, c] in &self.triangles {
            for e in [(a, b), (b, c), (c, a)] {
                *directed.entry(e).or_insert(0) += 1;
            }
        }
        directed
            .iter()
            .all(|(&(a, b), &n)| n == 1 && directed.get(&(b, a)) == Some(&1))
    }
}

fn normalized(p: &[f64]) -> Vec<f64> {
    let n = crate::linalg::norm(p);
    p.iter().map(|x| x / n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cross, dot};

    #[test]
    fn icosahedron_is_closed_and_outward() {
        let m = TriMesh::icosahedron();
        assert!(m.is_closed());
        for &[a, b, c] in &m.triangles {
            let (pa, pb, pc) = (&m.vertices[a], &m.vertices[b], &m.vertices[c]);
            let e1: Vec<f64> = pb.iter().zip(pa).map(|(x, y)| x - y).collect();
            let e2: Vec<f64> = pc.iter().zip(pa).map(|(x, y)| x - y).collect();
            let centroid: Vec<f64> = (0..3).map(|k| pa[k] + pb[k] + pc[k]).collect();
            assert!(dot(&cross(&e1, &e2), &centroid) > 0.0);
        }
    }

    #[test]
    fn icosphere_counts() {
        let m = TriMesh::icosphere(2);
        assert_eq!(m.triangles.len(), 20 * 16);
        assert_eq!(m.vertices.len(), 10 * 16 + 2);
        assert!(m.is_closed());
        assert!(m.vertices.iter().all(|v| (crate::linalg::norm(v) - 1.0).abs() < 1e-15));
    }

    #[test]
    fn disk_boundary_on_circle() {
        let m = TriMesh::disk(3);
        let b = m.boundary_vertices();
        assert_eq!(b.len(), 6 * 8);
        for i in b {
            assert!((crate::linalg::norm(&m.vertices[i]) - 1.0).abs() < 1e-15);
        }
        assert!(!m.is_closed());
    }
}
