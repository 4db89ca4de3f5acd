//! Triangulations of planar domains and the built-in unit-disk mesher.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{invalid, FemError, Result};

pub type Point = [f64; 2];

/// Conforming, positively oriented triangulation with a marked source
/// region `Ω₀` (a set of elements).
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<[usize; 2]>,
    boundary_nodes: Vec<usize>,
    omega0_elements: Vec<usize>,
    omega0_nodes: Vec<usize>,
    edge_count: usize,
}

/// Twice the signed area of `(a, b, c)`.
pub(crate) fn cross(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl Mesh {
    /// Validates and builds a mesh; `Ω₀` starts as the whole domain.
    pub fn new(
        nodes: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<[usize; 2]>,
    ) -> Result<Self> {
        if triangles.is_empty() {
            return Err(FemError::InvalidMesh("no triangles".into()));
        }
        if let Some(i) = nodes
            .iter()
            .position(|p| !(p[0].is_finite() && p[1].is_finite()))
        {
            return Err(FemError::InvalidMesh(format!(
                "node {i} has a non-finite coordinate"
            )));
        }
        let n = nodes.len();
        let mut used = vec![false; n];
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for (k, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= n) {
                return Err(FemError::InvalidMesh(format!(
                    "triangle {k} references a missing node"
                )));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(FemError::DegenerateTriangle {
                    element: k,
                    area: 0.0,
                });
            }
            let [a, b, c] = t.map(|v| nodes[v]);
            let area = 0.5 * cross(a, b, c);
            let scale = [b, c]
                .iter()
                .map(|p| (p[0] - a[0]).hypot(p[1] - a[1]))
                .fold(0.0f64, f64::max);
            if area.abs() <= 1e-14 * scale * scale {
                return Err(FemError::DegenerateTriangle { element: k, area });
            }
            if area < 0.0 {
                return Err(FemError::InvalidMesh(format!(
                    "triangle {k} is oriented clockwise"
                )));
            }
            for j in 0..3 {
                used[t[j]] = true;
                *edges.entry(edge_key(t[j], t[(j + 1) % 3])).or_insert(0) += 1;
            }
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(FemError::InvalidMesh(format!(
                "node {i} belongs to no triangle"
            )));
        }
        if let Some((e, c)) = edges.iter().find(|(_, c)| **c > 2) {
            return Err(FemError::InvalidMesh(format!(
                "edge {e:?} is shared by {c} triangles"
            )));
        }
        let mut listed = HashMap::new();
        for (i, e) in boundary_edges.iter().enumerate() {
            let key = edge_key(e[0], e[1]);
            match edges.get(&key) {
                Some(1) => {}
                Some(_) => {
                    return Err(FemError::InvalidMesh(format!(
                        "boundary edge {i} is interior"
                    )))
                }
                None => {
                    return Err(FemError::InvalidMesh(format!(
                        "boundary edge {i} is not a triangle edge"
                    )))
                }
            }
            if listed.insert(key, i).is_some() {
                return Err(FemError::InvalidMesh(format!(
                    "boundary edge {i} listed twice"
                )));
            }
        }
        if let Some((e, _)) = edges
            .iter()
            .find(|(e, c)| **c == 1 && !listed.contains_key(e))
        {
            return Err(FemError::InvalidMesh(format!(
                "edge {e:?} has one neighbour but is not a boundary edge (non-conforming mesh)"
            )));
        }
        let mut boundary_nodes: Vec<usize> = boundary_edges.iter().flatten().copied().collect();
        boundary_nodes.sort_unstable();
        boundary_nodes.dedup();
        let mut mesh = Self {
            nodes,
            omega0_elements: (0..triangles.len()).collect(),
            triangles,
            boundary_edges,
            boundary_nodes,
            omega0_nodes: Vec::new(),
            edge_count: edges.len(),
        };
        mesh.omega0_nodes = mesh.nodes_of(&mesh.omega0_elements);
        Ok(mesh)
    }

    fn nodes_of(&self, elements: &[usize]) -> Vec<usize> {
        let mut nodes: Vec<usize> = elements.iter().flat_map(|&k| self.triangles[k]).collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    /// Replaces `Ω₀` by an explicit element list.
    pub fn with_omega0_elements(mut self, mut elements: Vec<usize>) -> Result<Self> {
        elements.sort_unstable();
        elements.dedup();
        if elements.is_empty() {
            return Err(invalid("the source region contains no elements"));
        }
        if let Some(k) = elements.iter().find(|&&k| k >= self.triangles.len()) {
            return Err(invalid(format!(
                "source region references missing triangle {k}"
            )));
        }
        self.omega0_nodes = self.nodes_of(&elements);
        self.omega0_elements = elements;
        Ok(self)
    }

    /// Marks as `Ω₀` every triangle whose centroid lies strictly inside
    /// `region`.
    pub fn mark_omega0(self, region: &Region) -> Result<Self> {
        let elements = (0..self.triangles.len())
            .filter(|&k| region.contains(self.centroid(k)))
            .collect();
        self.with_omega0_elements(elements)
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[[usize; 2]] {
        &self.boundary_edges
    }

    /// Sorted node indices on `Γ`.
    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    /// Sorted triangle indices in `Ω₀`.
    pub fn omega0_elements(&self) -> &[usize] {
        &self.omega0_elements
    }

    /// Sorted vertices of `Ω₀` triangles; the source unknowns.
    pub fn omega0_nodes(&self) -> &[usize] {
        &self.omega0_nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edge_count
    }

    /// `V − E + F`; 1 for a disk.
    pub fn euler_characteristic(&self) -> i64 {
        self.nodes.len() as i64 - self.edge_count as i64 + self.triangles.len() as i64
    }

    pub fn vertices(&self, k: usize) -> [Point; 3] {
        self.triangles[k].map(|v| self.nodes[v])
    }

    pub fn area(&self, k: usize) -> f64 {
        let [a, b, c] = self.vertices(k);
        0.5 * cross(a, b, c)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|k| self.area(k)).sum()
    }

    pub fn centroid(&self, k: usize) -> Point {
        let [a, b, c] = self.vertices(k);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Longest edge in the mesh.
    pub fn mesh_size(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| (0..3).map(move |j| (t[j], t[(j + 1) % 3])))
            .map(|(a, b)| {
                let (p, q) = (self.nodes[a], self.nodes[b]);
                (p[0] - q[0]).hypot(p[1] - q[1])
            })
            .fold(0.0, f64::max)
    }
}

/// Candidate source regions; membership is strict.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Square {
        center: Point,
        half_width: f64,
    },
    Disk {
        center: Point,
        radius: f64,
    },
    Union(Vec<Region>),
    /// `Ω₀ = Ω`.
    Everywhere,
}

impl Region {
    pub fn contains(&self, p: Point) -> bool {
        match self {
            Region::Square { center, half_width } => {
                (p[0] - center[0]).abs() < *half_width && (p[1] - center[1]).abs() < *half_width
            }
            Region::Disk { center, radius } => (p[0] - center[0]).hypot(p[1] - center[1]) < *radius,
            Region::Union(parts) => parts.iter().any(|r| r.contains(p)),
            Region::Everywhere => true,
        }
    }
}

/// Unit-disk mesh at a refinement level: a structured core of
/// `4·2^level` squares per side on `[-1/2, 1/2]²` and `2·2^level` layers
/// blending the core perimeter onto the circle.
pub fn disk_mesh(level: u32) -> Result<Mesh> {
    if level > 8 {
        return Err(invalid(format!(
            "refinement level {level} is too large (max 8)"
        )));
    }
    disk_mesh_with(4 << level, 2 << level)
}

/// Unit-disk mesh with `core` cells per side of the inner square and
/// `layers` rings out to the circle.
pub fn disk_mesh_with(core: usize, layers: usize) -> Result<Mesh> {
    if core == 0 || layers == 0 {
        return Err(invalid("disk mesh needs core >= 1 and layers >= 1"));
    }
    let n = core;
    let half = 0.5;
    let grid = |i: usize, j: usize| j * (n + 1) + i;
    let mut nodes: Vec<Point> = Vec::with_capacity((n + 1) * (n + 1) + 4 * n * layers);
    for j in 0..=n {
        for i in 0..=n {
            nodes.push([
                -half + 2.0 * half * i as f64 / n as f64,
                -half + 2.0 * half * j as f64 / n as f64,
            ]);
        }
    }
    // Core perimeter walked counterclockwise from the corner (n, 0).
    let perimeter = |p: usize| {
        let p = p % (4 * n);
        let (side, j) = (p / n, p % n);
        match side {
            0 => (n, j),
            1 => (n - j, n),
            2 => (0, n - j),
            _ => (j, 0),
        }
    };
    let ring_start = nodes.len();
    let node_id = |layer: usize, p: usize| {
        let p = p % (4 * n);
        if layer == 0 {
            let (i, j) = perimeter(p);
            grid(i, j)
        } else {
            ring_start + (layer - 1) * 4 * n + p
        }
    };
    for l in 1..=layers {
        for p in 0..4 * n {
            let (i, j) = perimeter(p);
            let base = nodes[grid(i, j)];
            let theta = -PI / 4.0 + PI / 2.0 * p as f64 / n as f64;
            let circle = [theta.cos(), theta.sin()];
            let x = if l == layers {
                circle
            } else {
                let w = l as f64 / layers as f64;
                [
                    base[0] + w * (circle[0] - base[0]),
                    base[1] + w * (circle[1] - base[1]),
                ]
            };
            nodes.push(x);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n + 8 * n * layers);
    for j in 0..n {
        for i in 0..n {
            let (a0, a1, a2, a3) = (
                grid(i, j),
                grid(i + 1, j),
                grid(i + 1, j + 1),
                grid(i, j + 1),
            );
            if (i + j) % 2 == 0 {
                triangles.push([a0, a1, a2]);
                triangles.push([a0, a2, a3]);
            } else {
                triangles.push([a0, a1, a3]);
                triangles.push([a1, a2, a3]);
            }
        }
    }
    for l in 0..layers {
        for p in 0..4 * n {
            let (b0, b1, b2, b3) = (
                node_id(l, p),
                node_id(l, p + 1),
                node_id(l + 1, p + 1),
                node_id(l + 1, p),
            );
            triangles.push([b0, b1, b2]);
            triangles.push([b0, b2, b3]);
        }
    }
    for t in &mut triangles {
        if cross(nodes[t[0]], nodes[t[1]], nodes[t[2]]) < 0.0 {
            t.swap(1, 2);
        }
    }
    let boundary = (0..4 * n)
        .map(|p| [node_id(layers, p), node_id(layers, p + 1)])
        .collect();
    Mesh::new(nodes, triangles, boundary)
}
