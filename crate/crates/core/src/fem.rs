//! P1 finite elements on 2D triangulations.
//!
//! A continuous piecewise-affine field has a constant gradient on each
//! triangle, so any density of ∇y integrates exactly with one point per
//! triangle. Summation runs in triangle order, which keeps integrals
//! bit-stable.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::decompose::Decomposition;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Triangles with signed area below this are rejected.
pub const MIN_AREA: f64 = 1e-14;

/// Triangulation of a polygonal domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeshRepr", into = "MeshRepr")]
pub struct Mesh2 {
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<usize>,
    geometry: Vec<TriangleGeometry>,
}

/// Cached per-triangle data: area and the inverse of the edge matrix
/// [x₁ − x₀, x₂ − x₀] (row-major).
#[derive(Debug, Clone, Copy, PartialEq)]
struct TriangleGeometry {
    area: f64,
    inv: [f64; 4],
}

#[derive(Serialize, Deserialize)]
struct MeshRepr {
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<usize>,
}

impl TryFrom<MeshRepr> for Mesh2 {
    type Error = Error;
    fn try_from(r: MeshRepr) -> Result<Self> {
        let mesh = Mesh2::new(r.nodes, r.triangles)?;
        let mut given = r.boundary;
        given.sort_unstable();
        if given != mesh.boundary {
            return Err(Error::InvalidMesh(
                "boundary list does not match the boundary edges of the triangulation".into(),
            ));
        }
        Ok(mesh)
    }
}

impl From<Mesh2> for MeshRepr {
    fn from(m: Mesh2) -> Self {
        MeshRepr {
            nodes: m.nodes,
            triangles: m.triangles,
            boundary: m.boundary,
        }
    }
}

impl Mesh2 {
    /// Validates the triangles and derives the boundary nodes: endpoints of
    /// edges that belong to exactly one triangle.
    pub fn new(nodes: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if nodes.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidMesh("non-finite node coordinate".into()));
        }
        let mut geometry = Vec::with_capacity(triangles.len());
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for (index, tri) in triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&v| v >= nodes.len()) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {index} references node {bad}"
                )));
            }
            let [p0, p1, p2] = tri.map(|v| nodes[v]);
            let e1 = [p1[0] - p0[0], p1[1] - p0[1]];
            let e2 = [p2[0] - p0[0], p2[1] - p0[1]];
            let det = e1[0] * e2[1] - e2[0] * e1[1];
            let area = 0.5 * det;
            if area.is_nan() || area < MIN_AREA {
                return Err(Error::DegenerateTriangle { index, area });
            }
            // Edge matrix columns e1, e2: [[e1x, e2x], [e1y, e2y]].
            let inv = [e2[1] / det, -e2[0] / det, -e1[1] / det, e1[0] / det];
            geometry.push(TriangleGeometry { area, inv });
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        if let Some((edge, count)) = edges.iter().find(|(_, &c)| c > 2) {
            return Err(Error::InvalidMesh(format!(
                "edge {edge:?} shared by {count} triangles"
            )));
        }
        let mut boundary: Vec<usize> = edges
            .iter()
            .filter(|(_, &c)| c == 1)
            .flat_map(|(&(a, b), _)| [a, b])
            .collect();
        boundary.sort_unstable();
        boundary.dedup();
        Ok(Mesh2 {
            nodes,
            triangles,
            boundary,
            geometry,
        })
    }

    /// Unit square split into m×m cells, each cut along its SW–NE diagonal.
    /// Node (i, j) sits at (i/m, j/m) with index j(m+1) + i.
    pub fn unit_square(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidOptions("mesh subdivisions must be >= 1".into()));
        }
        let side = m + 1;
        let nodes = (0..side)
            .flat_map(|j| (0..side).map(move |i| [i as f64 / m as f64, j as f64 / m as f64]))
            .collect();
        let mut triangles = Vec::with_capacity(2 * m * m);
        for j in 0..m {
            for i in 0..m {
                let sw = j * side + i;
                let se = sw + 1;
                let nw = sw + side;
                let ne = nw + 1;
                triangles.push([sw, se, ne]);
                triangles.push([sw, ne, nw]);
            }
        }
        Mesh2::new(nodes, triangles)
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }
    /// Sorted boundary node indices.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary.binary_search(&node).is_ok()
    }
    /// Non-boundary node indices, ascending.
    pub fn interior(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&v| !self.is_boundary(v)).collect()
    }
    pub fn area(&self, triangle: usize) -> f64 {
        self.geometry[triangle].area
    }
    pub fn total_area(&self) -> f64 {
        self.geometry.iter().map(|g| g.area).sum()
    }

    fn check_field(&self, y: &VectorField) -> Result<()> {
        if y.len() == self.nodes.len() {
            Ok(())
        } else {
            Err(Error::FieldLength {
                expected: self.nodes.len(),
                got: y.len(),
            })
        }
    }

    /// Gradient of y on one triangle.
    pub fn triangle_gradient(&self, triangle: usize, y: &VectorField) -> Matrix {
        let [v0, v1, v2] = self.triangles[triangle];
        let y0 = y.values[v0];
        let d1 = [y.values[v1][0] - y0[0], y.values[v1][1] - y0[1]];
        let d2 = [y.values[v2][0] - y0[0], y.values[v2][1] - y0[1]];
        let inv = &self.geometry[triangle].inv;
        // [d1 d2] · inv
        Matrix::new(
            2,
            vec![
                d1[0] * inv[0] + d2[0] * inv[2],
                d1[0] * inv[1] + d2[0] * inv[3],
                d1[1] * inv[0] + d2[1] * inv[2],
                d1[1] * inv[1] + d2[1] * inv[3],
            ],
        )
        .expect("finite field on a valid mesh")
    }

    /// Constant gradient of y on every triangle.
    pub fn gradients(&self, y: &VectorField) -> Result<Vec<Matrix>> {
        self.check_field(y)?;
        Ok((0..self.triangles.len())
            .map(|t| self.triangle_gradient(t, y))
            .collect())
    }

    /// Σ_T |T| · density(∇y|_T).
    pub fn integrate<F>(&self, y: &VectorField, density: F) -> Result<f64>
    where
        F: Fn(&Matrix) -> Result<f64>,
    {
        self.check_field(y)?;
        let mut total = 0.0;
        for t in 0..self.triangles.len() {
            total += self.geometry[t].area * density(&self.triangle_gradient(t, y))?;
        }
        Ok(total)
    }

    /// Accumulates the nodal gradient of Σ_T |T| · density(∇y|_T) into
    /// `out` (length 2·num_nodes, interleaved components), given the
    /// density gradient `dens_grad`. Returns the energy.
    pub fn integrate_with_gradient<F, G>(
        &self,
        y: &VectorField,
        density: F,
        dens_grad: G,
        out: &mut [f64],
    ) -> Result<f64>
    where
        F: Fn(&Matrix) -> Result<f64>,
        G: Fn(&Matrix) -> Result<Matrix>,
    {
        self.check_field(y)?;
        assert_eq!(out.len(), 2 * self.nodes.len());
        out.iter_mut().for_each(|x| *x = 0.0);
        let mut total = 0.0;
        for (t, tri) in self.triangles.iter().enumerate() {
            let geo = &self.geometry[t];
            let g = self.triangle_gradient(t, y);
            total += geo.area * density(&g)?;
            let p = dens_grad(&g)?;
            // dE/d[d1 d2] = area · P · invᵀ
            let inv = &geo.inv;
            for c in 0..2 {
                let (p0, p1) = (p.get(c, 0), p.get(c, 1));
                let g1 = geo.area * (p0 * inv[0] + p1 * inv[1]);
                let g2 = geo.area * (p0 * inv[2] + p1 * inv[3]);
                out[2 * tri[1] + c] += g1;
                out[2 * tri[2] + c] += g2;
                out[2 * tri[0] + c] -= g1 + g2;
            }
        }
        Ok(total)
    }

    /// Writes `node_index,x,y,y1,y2` rows for a field.
    pub fn field_csv(&self, y: &VectorField) -> Result<String> {
        self.check_field(y)?;
        let mut s = String::from("node_index,x,y,y1,y2\n");
        for (k, (p, v)) in self.nodes.iter().zip(&y.values).enumerate() {
            writeln!(s, "{k},{},{},{},{}", p[0], p[1], v[0], v[1]).expect("write to string");
        }
        Ok(s)
    }

    /// Parses the CSV written by [`Mesh2::field_csv`]. Node coordinates must
    /// match this mesh.
    pub fn parse_field_csv(&self, text: &str) -> Result<VectorField> {
        let mut values = vec![None; self.nodes.len()];
        for (line_no, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 5 {
                return Err(Error::Parse(format!("line {}: expected 5 columns", line_no + 1)));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", line_no + 1)))
            };
            let k: usize = cols[0]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: node_index: {e}", line_no + 1)))?;
            if k >= self.nodes.len() {
                return Err(Error::Parse(format!(
                    "line {}: node {k} out of range",
                    line_no + 1
                )));
            }
            let (x, yy) = (num(cols[1])?, num(cols[2])?);
            if (x - self.nodes[k][0]).abs() > 1e-9 || (yy - self.nodes[k][1]).abs() > 1e-9 {
                return Err(Error::Parse(format!(
                    "line {}: coordinates of node {k} do not match mesh",
                    line_no + 1
                )));
            }
            values[k] = Some([num(cols[3])?, num(cols[4])?]);
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(k, v)| v.ok_or_else(|| Error::Parse(format!("missing node {k}"))))
            .collect::<Result<Vec<_>>>()?;
        VectorField::new(values)
    }
}

/// Nodal values of a P1 map y: Ω → ℝ².
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub values: Vec<[f64; 2]>,
}

impl VectorField {
    pub fn new(values: Vec<[f64; 2]>) -> Result<Self> {
        if values.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite field value".into()));
        }
        Ok(VectorField { values })
    }

    pub fn zeros(len: usize) -> Self {
        VectorField {
            values: vec![[0.0; 2]; len],
        }
    }

    /// Interpolates x ↦ M x + c at the mesh nodes.
    pub fn affine(mesh: &Mesh2, m: &Matrix, c: [f64; 2]) -> Result<Self> {
        if m.n() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: m.n(),
            });
        }
        Ok(VectorField::interpolate(mesh, |p| {
            [
                m.get(0, 0) * p[0] + m.get(0, 1) * p[1] + c[0],
                m.get(1, 0) * p[0] + m.get(1, 1) * p[1] + c[1],
            ]
        }))
    }

    pub fn interpolate<F: Fn([f64; 2]) -> [f64; 2]>(mesh: &Mesh2, f: F) -> Self {
        VectorField {
            values: mesh.nodes().iter().map(|&p| f(p)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// max over nodes and components of |self − other|.
    pub fn max_abs_diff(&self, other: &VectorField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .flat_map(|(a, b)| [(a[0] - b[0]).abs(), (a[1] - b[1]).abs()])
            .fold(0.0, f64::max)
    }
}

/// |I_L(y₁) − I_L(y₂)| for fields with bitwise-equal boundary values.
pub fn null_lagrangian_gap(
    mesh: &Mesh2,
    y1: &VectorField,
    y2: &VectorField,
    dec: &Decomposition,
) -> Result<f64> {
    mesh.check_field(y1)?;
    mesh.check_field(y2)?;
    if dec.n() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: dec.n(),
        });
    }
    if let Some(&node) = mesh
        .boundary()
        .iter()
        .find(|&&v| y1.values[v].map(f64::to_bits) != y2.values[v].map(f64::to_bits))
    {
        return Err(Error::BoundaryMismatch { node });
    }
    let i1 = mesh.integrate(y1, |g| dec.eval_null(g))?;
    let i2 = mesh.integrate(y2, |g| dec.eval_null(g))?;
    Ok((i1 - i2).abs())
}
