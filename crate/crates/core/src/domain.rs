//! Domain geometries, uniform grids and the quadrature that goes with them.
//!
//! Node ordering is lexicographic with the first axis fastest, so node
//! `(i, j)` of a rectangle lives at `i + nx * j`. One-dimensional grids
//! (intervals and radial balls) store their single coordinate in slot 0 of
//! each node and leave slot 1 at zero.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_RESOLUTION: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DomainKind {
    Interval { length: f64 },
    RadialBall { dimension: u32, radius: f64 },
    Rectangle { lx: f64, ly: f64 },
}

/// Geometry descriptor together with its exact volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainSpec {
    kind: DomainKind,
    measure: f64,
}

impl DomainSpec {
    pub fn new(kind: DomainKind) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        let measure = match kind {
            DomainKind::Interval { length } => {
                positive("interval length", length)?;
                length
            }
            DomainKind::RadialBall { dimension, radius } => {
                positive("ball radius", radius)?;
                if dimension < 1 {
                    return Err(Error::Config("ball dimension must be at least 1".into()));
                }
                unit_ball_volume(dimension) * radius.powi(dimension as i32)
            }
            DomainKind::Rectangle { lx, ly } => {
                positive("rectangle side lx", lx)?;
                positive("rectangle side ly", ly)?;
                lx * ly
            }
        };
        Ok(Self { kind, measure })
    }

    pub fn interval(length: f64) -> Result<Self> {
        Self::new(DomainKind::Interval { length })
    }

    pub fn ball(dimension: u32, radius: f64) -> Result<Self> {
        Self::new(DomainKind::RadialBall { dimension, radius })
    }

    pub fn rectangle(lx: f64, ly: f64) -> Result<Self> {
        Self::new(DomainKind::Rectangle { lx, ly })
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    /// Volume |Ω| of the described set.
    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.kind, DomainKind::RadialBall { .. })
    }
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: u32) -> f64 {
    use std::f64::consts::PI;
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * PI / n as f64,
    }
}

/// Surface area of the unit sphere `S^{n-1}` in `R^n`.
pub fn unit_sphere_area(n: u32) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// One side of an axis-aligned boundary face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Face {
    pub axis: usize,
    pub upper: bool,
}

impl Face {
    pub fn normal(&self) -> [f64; 2] {
        let mut n = [0.0; 2];
        n[self.axis] = if self.upper { 1.0 } else { -1.0 };
        n
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryNode {
    pub index: usize,
    /// Unit outward normal. At rectangle corners this is the normalized
    /// average of the two edge normals and is bookkeeping only; the
    /// discretization applies each entry of `faces` separately.
    pub normal: [f64; 2],
    pub faces: Vec<Face>,
}

/// Uniform grid over a [`DomainSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    domain: DomainSpec,
    shape: [usize; 2],
    spacing: [f64; 2],
    nodes: Vec<[f64; 2]>,
    boundary: Vec<BoundaryNode>,
    symmetry: Option<usize>,
    weights: Vec<f64>,
}

/// Builds a uniform grid with `resolution` nodes along each axis.
///
/// Quadrature weights are trapezoidal; on radial grids they carry the factor
/// `|S^{N-1}| r^{N-1}` so that sums are true N-dimensional volume integrals.
pub fn build_grid(domain: DomainSpec, resolution: usize) -> Result<Grid> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::Config(format!(
            "resolution must be at least {MIN_RESOLUTION}, got {resolution}"
        )));
    }
    let last = resolution - 1;
    let trap = |i: usize, h: f64| if i == 0 || i == last { 0.5 * h } else { h };

    let grid = match domain.kind() {
        DomainKind::Interval { length } => {
            let h = length / last as f64;
            let nodes: Vec<[f64; 2]> = (0..resolution).map(|i| [i as f64 * h, 0.0]).collect();
            let weights = (0..resolution).map(|i| trap(i, h)).collect();
            let boundary = vec![
                BoundaryNode {
                    index: 0,
                    normal: [-1.0, 0.0],
                    faces: vec![Face { axis: 0, upper: false }],
                },
                BoundaryNode {
                    index: last,
                    normal: [1.0, 0.0],
                    faces: vec![Face { axis: 0, upper: true }],
                },
            ];
            Grid {
                domain,
                shape: [resolution, 1],
                spacing: [h, 0.0],
                nodes,
                boundary,
                symmetry: None,
                weights,
            }
        }
        DomainKind::RadialBall { dimension, radius } => {
            let h = radius / last as f64;
            let area = unit_sphere_area(dimension);
            let nodes: Vec<[f64; 2]> = (0..resolution).map(|i| [i as f64 * h, 0.0]).collect();
            let weights = nodes
                .iter()
                .enumerate()
                .map(|(i, p)| area * p[0].powi(dimension as i32 - 1) * trap(i, h))
                .collect();
            let boundary = vec![BoundaryNode {
                index: last,
                normal: [1.0, 0.0],
                faces: vec![Face { axis: 0, upper: true }],
            }];
            Grid {
                domain,
                shape: [resolution, 1],
                spacing: [h, 0.0],
                nodes,
                boundary,
                symmetry: Some(0),
                weights,
            }
        }
        DomainKind::Rectangle { lx, ly } => {
            let hx = lx / last as f64;
            let hy = ly / last as f64;
            let n = resolution * resolution;
            let mut nodes = Vec::with_capacity(n);
            let mut weights = Vec::with_capacity(n);
            let mut boundary = Vec::new();
            for j in 0..resolution {
                for i in 0..resolution {
                    let index = nodes.len();
                    nodes.push([i as f64 * hx, j as f64 * hy]);
                    weights.push(trap(i, hx) * trap(j, hy));
                    let mut faces = Vec::new();
                    if i == 0 {
                        faces.push(Face { axis: 0, upper: false });
                    }
                    if i == last {
                        faces.push(Face { axis: 0, upper: true });
                    }
                    if j == 0 {
                        faces.push(Face { axis: 1, upper: false });
                    }
                    if j == last {
                        faces.push(Face { axis: 1, upper: true });
                    }
                    if !faces.is_empty() {
                        let mut normal = [0.0; 2];
                        for f in &faces {
                            let fnorm = f.normal();
                            normal[0] += fnorm[0];
                            normal[1] += fnorm[1];
                        }
                        let len = normal[0].hypot(normal[1]);
                        normal = [normal[0] / len, normal[1] / len];
                        boundary.push(BoundaryNode { index, normal, faces });
                    }
                }
            }
            Grid {
                domain,
                shape: [resolution, resolution],
                spacing: [hx, hy],
                nodes,
                boundary,
                symmetry: None,
                weights,
            }
        }
    };
    Ok(grid)
}

impl Grid {
    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of spatial axes carried by the grid (1 or 2).
    pub fn axes(&self) -> usize {
        if self.shape[1] > 1 {
            2
        } else {
            1
        }
    }

    /// Nodes per axis; the second entry is 1 on one-dimensional grids.
    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    pub fn spacing(&self) -> [f64; 2] {
        self.spacing
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn node(&self, index: usize) -> [f64; 2] {
        self.nodes[index]
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.shape[0] * j
    }

    pub fn boundary(&self) -> &[BoundaryNode] {
        &self.boundary
    }

    /// Index of the radial symmetry node `r = 0`, if any.
    pub fn symmetry_node(&self) -> Option<usize> {
        self.symmetry
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sum of the quadrature weights, i.e. the discrete measure of the domain.
    pub fn discrete_measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Grid with the same domain and every spacing halved.
    pub fn refined(&self) -> Result<Grid> {
        build_grid(self.domain, 2 * self.shape[0] - 1)
    }

    pub(crate) fn check_field(&self, field: &ScalarField) -> Result<()> {
        if field.len() != self.len() {
            return Err(Error::Mismatch {
                expected: self.len(),
                found: field.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_boundary_values(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.boundary.len() {
            return Err(Error::Mismatch {
                expected: self.boundary.len(),
                found: values.len(),
            });
        }
        Ok(())
    }
}

/// Node-indexed real values on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarField(Vec<f64>);

impl ScalarField {
    pub fn from_vec(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self(vec![value; grid.len()])
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 2]) -> f64) -> Self {
        Self(grid.nodes().iter().map(|&p| f(p)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index and value of the smallest entry.
    pub fn argmin(&self) -> (usize, f64) {
        self.0
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc })
    }

    pub fn argmax(&self) -> (usize, f64) {
        self.0
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc })
    }

    /// Sup-norm distance to another field of the same length.
    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

impl Index<usize> for ScalarField {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for ScalarField {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// Saturation level and boundary permeability, one value of `g` per
/// boundary node in [`Grid::boundary`] order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryData {
    gamma: f64,
    g: Vec<f64>,
}

impl BoundaryData {
    pub fn new(grid: &Grid, gamma: f64, g: Vec<f64>) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Config(format!("saturation gamma must be positive, got {gamma}")));
        }
        grid.check_boundary_values(&g)?;
        if let Some(bad) = g.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Config(format!("permeability g must be nonnegative, got {bad}")));
        }
        if !g.iter().any(|&v| v > 0.0) {
            return Err(Error::Config("permeability g must not vanish identically".into()));
        }
        Ok(Self { gamma, g })
    }

    pub fn constant(grid: &Grid, gamma: f64, g: f64) -> Result<Self> {
        Self::new(grid, gamma, vec![g; grid.boundary().len()])
    }

    /// Permeability evaluated per boundary node from its coordinates.
    pub fn from_fn(grid: &Grid, gamma: f64, g: impl Fn(&BoundaryNode, [f64; 2]) -> f64) -> Result<Self> {
        let values = grid.boundary().iter().map(|b| g(b, grid.node(b.index))).collect();
        Self::new(grid, gamma, values)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    /// The constant value of `g` when it is the same on every boundary node.
    pub fn constant_g(&self) -> Option<f64> {
        let first = self.g[0];
        self.g.iter().all(|&v| v == first).then_some(first)
    }
}

/// Quadrature `Σ w_i f_i` of a field over its grid.
pub fn integrate(field: &ScalarField, grid: &Grid) -> Result<f64> {
    grid.check_field(field)?;
    Ok(field.iter().zip(grid.weights()).map(|(f, w)| f * w).sum())
}
