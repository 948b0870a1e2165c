//! Structured quadrilateral grid with lowest-order edge unknowns.
//!
//! Unknowns are edge circulations. Edges are numbered row by row: for cell
//! row `j` the `nx` x-directed edges at height `j*hy` come first, followed by
//! the `nx+1` y-directed edges of that row; the top x-edges close the list.
//! This interleaving keeps the bandwidth of every assembled matrix near
//! `2nx+1`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeDir {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeTag {
    Interior,
    /// Outer impedance boundary.
    Gamma,
    /// Perfect conductor; the unknown is eliminated.
    Pec,
}

/// Condition applied on the outer rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterBoundary {
    #[default]
    Impedance,
    Pec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: [f64; 2],
    pub radius: f64,
}

/// Shape assigning a material region to the cells whose centers it contains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum RegionShape {
    Disk { center: [f64; 2], radius: f64 },
    Rect { min: [f64; 2], max: [f64; 2] },
}

impl RegionShape {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        match *self {
            RegionShape::Disk { center, radius } => {
                (p[0] - center[0]).hypot(p[1] - center[1]) <= radius
            }
            RegionShape::Rect { min, max } => {
                p[0] >= min[0] && p[0] <= max[0] && p[1] >= min[1] && p[1] <= max[1]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inclusion {
    #[serde(flatten)]
    pub shape: RegionShape,
    pub region: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioGeometry {
    pub width: f64,
    pub height: f64,
    /// Conducting circle; only an arc of it is conducting when `alpha > 0`.
    pub pec_circle: Option<Circle>,
    /// Slot opening angle in radians; `2π` removes the conductor entirely.
    pub alpha: f64,
    /// Direction (radians) the slot faces, measured from the circle center.
    #[serde(default)]
    pub slot_direction: f64,
    /// Later entries override earlier ones; uncovered cells are region 0.
    #[serde(default)]
    pub inclusions: Vec<Inclusion>,
    #[serde(default)]
    pub outer: OuterBoundary,
}

impl ScenarioGeometry {
    /// A `width × height` box with no conductor and one material.
    pub fn plain(width: f64, height: f64) -> Self {
        Self {
            width,
            height,
            pec_circle: None,
            alpha: 2.0 * PI,
            slot_direction: 0.0,
            inclusions: Vec::new(),
            outer: OuterBoundary::Impedance,
        }
    }

    /// Adds the centered PEC circle of radius `0.25·min(width, height)`.
    pub fn with_centered_circle(mut self, alpha: f64) -> Self {
        self.pec_circle = Some(Circle {
            center: [0.5 * self.width, 0.5 * self.height],
            radius: 0.25 * self.width.min(self.height),
        });
        self.alpha = alpha;
        self
    }

    pub fn region_at(&self, p: [f64; 2]) -> usize {
        self.inclusions.iter().rev().find(|inc| inc.shape.contains(p)).map_or(0, |inc| inc.region)
    }
}

fn wrap_angle(a: f64) -> f64 {
    let mut x = a % (2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    } else if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

#[derive(Debug, Clone)]
pub struct EdgeMesh {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub geometry: ScenarioGeometry,
    tags: Vec<EdgeTag>,
    dof_of_edge: Vec<Option<usize>>,
    free_edges: Vec<usize>,
    cell_region: Vec<usize>,
}

/// Orientation signs of a cell's edges in counter-clockwise circulation
/// order: bottom, right, top, left.
pub const CELL_SIGNS: [f64; 4] = [1.0, 1.0, -1.0, -1.0];

impl EdgeMesh {
    pub fn new(nx: usize, ny: usize, geometry: ScenarioGeometry) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::Geometry(format!("grid must be at least 2x2, got {nx}x{ny}")));
        }
        if !(geometry.width > 0.0 && geometry.height > 0.0) {
            return Err(Error::Geometry("domain extents must be positive".into()));
        }
        if !(0.0..=2.0 * PI).contains(&geometry.alpha) {
            return Err(Error::Geometry(format!("slot angle {} outside [0, 2π]", geometry.alpha)));
        }
        let hx = geometry.width / nx as f64;
        let hy = geometry.height / ny as f64;
        let n_edges = nx * (ny + 1) + (nx + 1) * ny;
        let mut mesh = Self {
            nx,
            ny,
            hx,
            hy,
            tags: vec![EdgeTag::Interior; n_edges],
            dof_of_edge: Vec::new(),
            free_edges: Vec::new(),
            cell_region: Vec::with_capacity(nx * ny),
            geometry,
        };
        for j in 0..ny {
            for i in 0..nx {
                let region = mesh.geometry.region_at(mesh.cell_center(i, j));
                mesh.cell_region.push(region);
            }
        }
        let outer_tag = match mesh.geometry.outer {
            OuterBoundary::Impedance => EdgeTag::Gamma,
            OuterBoundary::Pec => EdgeTag::Pec,
        };
        let mut outer: Vec<usize> = Vec::with_capacity(2 * (nx + ny));
        for i in 0..nx {
            outer.push(mesh.x_edge(i, 0));
            outer.push(mesh.x_edge(i, ny));
        }
        for j in 0..ny {
            outer.push(mesh.y_edge(0, j));
            outer.push(mesh.y_edge(nx, j));
        }
        for e in outer {
            mesh.tags[e] = outer_tag;
        }
        if let Some(circle) = mesh.geometry.pec_circle {
            mesh.tag_arc(circle)?;
        }
        let mut next = 0;
        mesh.dof_of_edge = mesh
            .tags
            .iter()
            .map(|t| {
                if *t == EdgeTag::Pec {
                    None
                } else {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect();
        mesh.free_edges = (0..n_edges).filter(|e| mesh.dof_of_edge[*e].is_some()).collect();
        Ok(mesh)
    }

    /// Staircase conductor: edges separating cells inside the circle from
    /// cells outside it, kept where the edge lies outside the slot.
    fn tag_arc(&mut self, circle: Circle) -> Result<()> {
        let [cx, cy] = circle.center;
        let r = circle.radius;
        let (w, h) = (self.geometry.width, self.geometry.height);
        if !(r > 0.0)
            || cx - r < self.hx
            || cx + r > w - self.hx
            || cy - r < self.hy
            || cy + r > h - self.hy
        {
            return Err(Error::Geometry(format!(
                "PEC circle (center {cx}, {cy}; radius {r}) must lie strictly inside the domain"
            )));
        }
        let alpha = self.geometry.alpha;
        if alpha >= 2.0 * PI {
            return Ok(());
        }
        let inside = |m: &Self, i: usize, j: usize| {
            let p = m.cell_center(i, j);
            (p[0] - cx).hypot(p[1] - cy) <= r
        };
        let keep = |p: [f64; 2]| {
            let theta = (p[1] - cy).atan2(p[0] - cx);
            wrap_angle(theta - self.geometry.slot_direction).abs() >= 0.5 * alpha
        };
        let mut pec = Vec::new();
        for j in 1..self.ny {
            for i in 0..self.nx {
                if inside(self, i, j - 1) != inside(self, i, j) && keep(self.edge_midpoint(self.x_edge(i, j))) {
                    pec.push(self.x_edge(i, j));
                }
            }
        }
        for j in 0..self.ny {
            for i in 1..self.nx {
                if inside(self, i - 1, j) != inside(self, i, j) && keep(self.edge_midpoint(self.y_edge(i, j))) {
                    pec.push(self.y_edge(i, j));
                }
            }
        }
        for e in pec {
            self.tags[e] = EdgeTag::Pec;
        }
        Ok(())
    }

    pub fn n_edges(&self) -> usize {
        self.tags.len()
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    /// Number of unknowns after eliminating conductor edges.
    pub fn n_dofs(&self) -> usize {
        self.free_edges.len()
    }

    /// x-directed edge from node `(i, j)` to `(i+1, j)`; `i < nx`, `j ≤ ny`.
    #[inline]
    pub fn x_edge(&self, i: usize, j: usize) -> usize {
        j * (2 * self.nx + 1) + i
    }

    /// y-directed edge from node `(i, j)` to `(i, j+1)`; `i ≤ nx`, `j < ny`.
    #[inline]
    pub fn y_edge(&self, i: usize, j: usize) -> usize {
        j * (2 * self.nx + 1) + self.nx + i
    }

    /// Direction and lower-left node `(i, j)` of an edge.
    pub fn edge_info(&self, e: usize) -> (EdgeDir, usize, usize) {
        let block = 2 * self.nx + 1;
        let (j, r) = (e / block, e % block);
        if r < self.nx {
            (EdgeDir::X, r, j)
        } else {
            (EdgeDir::Y, r - self.nx, j)
        }
    }

    pub fn edge_midpoint(&self, e: usize) -> [f64; 2] {
        match self.edge_info(e) {
            (EdgeDir::X, i, j) => [(i as f64 + 0.5) * self.hx, j as f64 * self.hy],
            (EdgeDir::Y, i, j) => [i as f64 * self.hx, (j as f64 + 0.5) * self.hy],
        }
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        match self.edge_info(e).0 {
            EdgeDir::X => self.hx,
            EdgeDir::Y => self.hy,
        }
    }

    pub fn edge_nodes(&self, e: usize) -> (usize, usize) {
        let (d, i, j) = self.edge_info(e);
        let node = |i: usize, j: usize| j * (self.nx + 1) + i;
        match d {
            EdgeDir::X => (node(i, j), node(i + 1, j)),
            EdgeDir::Y => (node(i, j), node(i, j + 1)),
        }
    }

    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [(i as f64 + 0.5) * self.hx, (j as f64 + 0.5) * self.hy]
    }

    /// Edges of cell `(i, j)` in the order matching [`CELL_SIGNS`].
    pub fn cell_edges(&self, i: usize, j: usize) -> [usize; 4] {
        [self.x_edge(i, j), self.y_edge(i + 1, j), self.x_edge(i, j + 1), self.y_edge(i, j)]
    }

    pub fn cell_region(&self, i: usize, j: usize) -> usize {
        self.cell_region[j * self.nx + i]
    }

    pub fn regions(&self) -> &[usize] {
        &self.cell_region
    }

    pub fn tag(&self, e: usize) -> EdgeTag {
        self.tags[e]
    }

    pub fn tags(&self) -> &[EdgeTag] {
        &self.tags
    }

    pub fn dof_of(&self, e: usize) -> Option<usize> {
        self.dof_of_edge[e]
    }

    pub fn free_edges(&self) -> &[usize] {
        &self.free_edges
    }

    /// Region of the single cell adjacent to an outer-boundary edge.
    pub fn boundary_cell_region(&self, e: usize) -> usize {
        let (d, i, j) = self.edge_info(e);
        match d {
            EdgeDir::X => self.cell_region(i, j.min(self.ny - 1)),
            EdgeDir::Y => self.cell_region(i.min(self.nx - 1), j),
        }
    }

    /// Nearest x-directed edge midpoint to `p`; ties go to the lowest edge id.
    pub fn locate_source_dof(&self, p: [f64; 2]) -> usize {
        let fi = (p[0] / self.hx - 0.5).round().clamp(0.0, (self.nx - 1) as f64) as usize;
        let fj = (p[1] / self.hy).round().clamp(0.0, self.ny as f64) as usize;
        // rounding picks a candidate; scan its neighborhood for exact ties
        let mut best = (f64::INFINITY, usize::MAX);
        for j in fj.saturating_sub(1)..=(fj + 1).min(self.ny) {
            for i in fi.saturating_sub(1)..=(fi + 1).min(self.nx - 1) {
                let e = self.x_edge(i, j);
                let m = self.edge_midpoint(e);
                let d = (m[0] - p[0]).hypot(m[1] - p[1]);
                if d < best.0 || (d == best.0 && e < best.1) {
                    best = (d, e);
                }
            }
        }
        best.1
    }

    /// Full-length edge vector from reduced unknowns (zero on conductors).
    pub fn expand<T: Copy + Default>(&self, reduced: &[T]) -> Vec<T> {
        let mut full = vec![T::default(); self.n_edges()];
        for (k, &e) in self.free_edges.iter().enumerate() {
            full[e] = reduced[k];
        }
        full
    }

    /// Per-cell |E| from edge circulations, averaging opposite edges
    /// (row-major, `j` outer).
    pub fn cell_field_magnitude(&self, full: &[num_complex::Complex64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_cells());
        for j in 0..self.ny {
            for i in 0..self.nx {
                let [b, r, t, l] = self.cell_edges(i, j);
                let ex = (full[b] + full[t]) * (0.5 / self.hx);
                let ey = (full[l] + full[r]) * (0.5 / self.hy);
                out.push((ex.norm_sqr() + ey.norm_sqr()).sqrt());
            }
        }
        out
    }

    /// Node-to-edge incidence `(edge, node, ±1)` of the discrete gradient.
    pub fn gradient_incidence(&self) -> Vec<(usize, usize, i64)> {
        let mut t = Vec::with_capacity(2 * self.n_edges());
        for e in 0..self.n_edges() {
            let (a, b) = self.edge_nodes(e);
            t.push((e, a, -1));
            t.push((e, b, 1));
        }
        t
    }

    /// Edge-to-cell circulation incidence `(cell, edge, ±1)`.
    pub fn circulation_incidence(&self) -> Vec<(usize, usize, i64)> {
        let mut t = Vec::with_capacity(4 * self.n_cells());
        for j in 0..self.ny {
            for i in 0..self.nx {
                for (e, s) in self.cell_edges(i, j).iter().zip(CELL_SIGNS) {
                    t.push((j * self.nx + i, *e, s as i64));
                }
            }
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(mesh: &EdgeMesh, tag: EdgeTag) -> usize {
        mesh.tags().iter().filter(|t| **t == tag).count()
    }

    #[test]
    fn two_by_two_counts() {
        let m = EdgeMesh::new(2, 2, ScenarioGeometry::plain(1.0, 1.0)).unwrap();
        assert_eq!(m.n_edges(), 12);
        assert_eq!(count(&m, EdgeTag::Gamma), 8);
        assert_eq!(count(&m, EdgeTag::Interior), 4);
        assert_eq!(m.n_dofs(), 12);
    }

    #[test]
    fn edge_numbering_roundtrips() {
        let m = EdgeMesh::new(5, 3, ScenarioGeometry::plain(1.0, 1.0)).unwrap();
        for j in 0..=3 {
            for i in 0..5 {
                assert_eq!(m.edge_info(m.x_edge(i, j)), (EdgeDir::X, i, j));
            }
        }
        for j in 0..3 {
            for i in 0..=5 {
                assert_eq!(m.edge_info(m.y_edge(i, j)), (EdgeDir::Y, i, j));
            }
        }
    }

    #[test]
    fn full_slot_has_no_conductor() {
        let g = ScenarioGeometry::plain(4.0, 4.0).with_centered_circle(2.0 * PI);
        let m = EdgeMesh::new(32, 32, g).unwrap();
        assert_eq!(count(&m, EdgeTag::Pec), 0);
    }

    #[test]
    fn circle_must_fit() {
        let mut g = ScenarioGeometry::plain(4.0, 4.0).with_centered_circle(0.0);
        g.pec_circle = Some(Circle { center: [1.0, 2.0], radius: 1.5 });
        assert!(matches!(EdgeMesh::new(16, 16, g), Err(Error::Geometry(_))));
    }

    #[test]
    fn closed_circle_forms_loop() {
        let g = ScenarioGeometry::plain(1.0, 1.0).with_centered_circle(0.0);
        let m = EdgeMesh::new(64, 64, g).unwrap();
        let pec: Vec<usize> = (0..m.n_edges()).filter(|e| m.tag(*e) == EdgeTag::Pec).collect();
        assert!(!pec.is_empty());
        let mut degree = vec![0usize; m.n_nodes()];
        for &e in &pec {
            let (a, b) = m.edge_nodes(e);
            degree[a] += 1;
            degree[b] += 1;
        }
        // every node touched by the staircase is passed through exactly once
        assert!(degree.iter().all(|d| *d == 0 || *d == 2));
        // and the edges form a single cycle
        let mut seen = vec![false; pec.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(k) = stack.pop() {
            let (a, b) = m.edge_nodes(pec[k]);
            for (l, &f) in pec.iter().enumerate() {
                let (c, d) = m.edge_nodes(f);
                if !seen[l] && (c == a || c == b || d == a || d == b) {
                    seen[l] = true;
                    stack.push(l);
                }
            }
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn locate_center_with_odd_nx() {
        let m = EdgeMesh::new(7, 6, ScenarioGeometry::plain(7.0, 6.0)).unwrap();
        assert_eq!(m.locate_source_dof([3.5, 3.0]), m.x_edge(3, 3));
        assert_eq!(m.locate_source_dof([0.0, 0.0]), m.x_edge(0, 0));
        assert_eq!(m.locate_source_dof([7.0, 6.0]), m.x_edge(6, 6));
    }

    #[test]
    fn region_map_uses_last_inclusion() {
        let mut g = ScenarioGeometry::plain(4.0, 4.0);
        g.inclusions.push(Inclusion { shape: RegionShape::Rect { min: [0.0, 0.0], max: [4.0, 2.0] }, region: 1 });
        g.inclusions.push(Inclusion { shape: RegionShape::Disk { center: [1.5, 1.5], radius: 0.3 }, region: 2 });
        let m = EdgeMesh::new(4, 4, g).unwrap();
        assert_eq!(m.cell_region(0, 3), 0);
        assert_eq!(m.cell_region(3, 0), 1);
        assert_eq!(m.cell_region(1, 1), 2);
    }

    #[test]
    fn outer_pec_removes_boundary_dofs() {
        let mut g = ScenarioGeometry::plain(1.0, 1.0);
        g.outer = OuterBoundary::Pec;
        let m = EdgeMesh::new(3, 3, g).unwrap();
        assert_eq!(m.n_dofs(), m.n_edges() - 12);
        assert_eq!(count(&m, EdgeTag::Gamma), 0);
    }
}
