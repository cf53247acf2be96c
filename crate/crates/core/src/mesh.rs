//! Admissible finite volume meshes.
//!
//! A [`Mesh`] is a list of control volumes and edges. Every edge carries the
//! distance `d_σ` used by the two-point flux together with the
//! transmissibility `τ_σ = m(σ) / d_σ`. Only uniform rectangular grids are
//! constructed here ([`build_uniform_rect_mesh`]); the types themselves do not
//! assume a grid, so other admissible meshes can be loaded through
//! [`Mesh::from_parts`].

use std::io::Write;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct ControlVolume {
    pub index: usize,
    /// The cell point `x_K`; the centroid for rectangular cells.
    pub center: Point,
    pub measure: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Interior { left: usize, right: usize },
    Boundary { cell: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub index: usize,
    pub kind: EdgeKind,
    pub measure: f64,
    /// `d(x_K, x_L)` for interior edges and `d(x_K, σ)` on the boundary.
    pub distance: f64,
    pub transmissibility: f64,
    /// Distances from the cell points to the edge line, `(d(x_K,σ), d(x_L,σ))`.
    /// The second entry equals the first for boundary edges.
    pub center_to_edge: (f64, f64),
}

impl Edge {
    fn new(index: usize, kind: EdgeKind, measure: f64, distance: f64, center_to_edge: (f64, f64)) -> Self {
        Edge {
            index,
            kind,
            measure,
            distance,
            transmissibility: measure / distance,
            center_to_edge,
        }
    }

    pub fn is_interior(&self) -> bool {
        matches!(self.kind, EdgeKind::Interior { .. })
    }

    /// Neighbor of `cell` across this edge, if the edge is interior and
    /// incident to `cell`.
    pub fn other(&self, cell: usize) -> Option<usize> {
        match self.kind {
            EdgeKind::Interior { left, right } if left == cell => Some(right),
            EdgeKind::Interior { left, right } if right == cell => Some(left),
            _ => None,
        }
    }
}

/// Geometry of a uniform rectangular grid; cells are numbered row-major with
/// x varying fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl UniformGrid {
    pub fn cell_index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn area(&self) -> f64 {
        (self.x_range.1 - self.x_range.0) * (self.y_range.1 - self.y_range.0)
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    cells: Vec<ControlVolume>,
    edges: Vec<Edge>,
    cell_edges: Vec<Vec<usize>>,
    neighbors: Vec<Vec<usize>>,
    h: f64,
    regularity: f64,
    grid: Option<UniformGrid>,
}

impl Mesh {
    /// Assembles a mesh from cells and edges, deriving adjacency and
    /// checking the structural invariants.
    pub fn from_parts(cells: Vec<ControlVolume>, edges: Vec<Edge>, h: f64) -> Result<Self> {
        let n = cells.len();
        if n == 0 {
            return Err(Error::InvalidMesh("mesh has no cells".into()));
        }
        for (i, cell) in cells.iter().enumerate() {
            if cell.index != i {
                return Err(Error::InvalidMesh(format!("cell {i} carries index {}", cell.index)));
            }
            if !(cell.measure > 0.0) {
                return Err(Error::InvalidMesh(format!("cell {i} has measure {}", cell.measure)));
            }
        }
        let mut cell_edges = vec![Vec::new(); n];
        let mut neighbors = vec![Vec::new(); n];
        for (i, edge) in edges.iter().enumerate() {
            if edge.index != i {
                return Err(Error::InvalidMesh(format!("edge {i} carries index {}", edge.index)));
            }
            if !(edge.measure > 0.0 && edge.distance > 0.0) {
                return Err(Error::InvalidMesh(format!("edge {i} has nonpositive length or distance")));
            }
            match edge.kind {
                EdgeKind::Interior { left, right } => {
                    if left == right || left >= n || right >= n {
                        return Err(Error::InvalidMesh(format!("edge {i} has invalid cells ({left}, {right})")));
                    }
                    cell_edges[left].push(i);
                    cell_edges[right].push(i);
                    neighbors[left].push(right);
                    neighbors[right].push(left);
                }
                EdgeKind::Boundary { cell } => {
                    if cell >= n {
                        return Err(Error::InvalidMesh(format!("edge {i} references cell {cell}")));
                    }
                    cell_edges[cell].push(i);
                }
            }
        }
        let regularity = regularity_of(&edges);
        Ok(Mesh {
            cells,
            edges,
            cell_edges,
            neighbors,
            h,
            regularity,
            grid: None,
        })
    }

    pub fn cells(&self) -> &[ControlVolume] {
        &self.cells
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Edge indices incident to `cell` (the set `E_K`), in increasing order.
    pub fn cell_edges(&self, cell: usize) -> &[usize] {
        &self.cell_edges[cell]
    }

    /// Cells sharing an edge with `cell` (the set `N(K)`).
    pub fn neighbors(&self, cell: usize) -> &[usize] {
        &self.neighbors[cell]
    }

    pub fn measure(&self, cell: usize) -> f64 {
        self.cells[cell].measure
    }

    pub fn measures(&self) -> impl Iterator<Item = f64> + '_ {
        self.cells.iter().map(|c| c.measure)
    }

    /// Maximal cell diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn regularity(&self) -> f64 {
        self.regularity
    }

    pub fn grid(&self) -> Option<&UniformGrid> {
        self.grid.as_ref()
    }

    pub fn total_measure(&self) -> f64 {
        self.measures().sum()
    }

    /// Axis-aligned bounding box `((xmin, xmax), (ymin, ymax))` of the domain.
    pub fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        if let Some(g) = &self.grid {
            return (g.x_range, g.y_range);
        }
        let mut bx = (f64::INFINITY, f64::NEG_INFINITY);
        let mut by = (f64::INFINITY, f64::NEG_INFINITY);
        for c in &self.cells {
            bx = (bx.0.min(c.center[0]), bx.1.max(c.center[0]));
            by = (by.0.min(c.center[1]), by.1.max(c.center[1]));
        }
        (bx, by)
    }

    /// Writes `cell_index,cx,cy,measure` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["cell_index", "cx", "cy", "measure"])?;
        for c in &self.cells {
            w.write_record(&[
                c.index.to_string(),
                c.center[0].to_string(),
                c.center[1].to_string(),
                c.measure.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn regularity_of(edges: &[Edge]) -> f64 {
    edges
        .iter()
        .filter(|e| e.is_interior())
        .map(|e| (e.center_to_edge.0.min(e.center_to_edge.1)) / e.distance)
        .fold(1.0, f64::min)
}

/// Builds the uniform `nx × ny` rectangular mesh of `x_range × y_range`.
pub fn build_uniform_rect_mesh(x_range: (f64, f64), y_range: (f64, f64), nx: usize, ny: usize) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidMesh(format!("grid must have at least one cell per direction, got {nx}x{ny}")));
    }
    for (name, (lo, hi)) in [("x", x_range), ("y", y_range)] {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidMesh(format!("{name} range ({lo}, {hi}) is empty or reversed")));
        }
    }
    let dx = (x_range.1 - x_range.0) / nx as f64;
    let dy = (y_range.1 - y_range.0) / ny as f64;
    let grid = UniformGrid { x_range, y_range, nx, ny, dx, dy };

    let cells: Vec<ControlVolume> = (0..ny)
        .flat_map(|iy| (0..nx).map(move |ix| (ix, iy)))
        .map(|(ix, iy)| ControlVolume {
            index: grid.cell_index(ix, iy),
            center: [
                x_range.0 + (ix as f64 + 0.5) * dx,
                y_range.0 + (iy as f64 + 0.5) * dy,
            ],
            measure: dx * dy,
        })
        .collect();

    // Edge order: faces normal to x (row by row, left to right), then faces
    // normal to y (bottom to top). Boundary faces are interleaved in sweep
    // order so that each cell's edge list is sorted.
    let mut edges = Vec::with_capacity(2 * nx * ny + nx + ny);
    for iy in 0..ny {
        for ix in 0..=nx {
            let index = edges.len();
            let kind = if ix == 0 {
                EdgeKind::Boundary { cell: grid.cell_index(0, iy) }
            } else if ix == nx {
                EdgeKind::Boundary { cell: grid.cell_index(nx - 1, iy) }
            } else {
                EdgeKind::Interior {
                    left: grid.cell_index(ix - 1, iy),
                    right: grid.cell_index(ix, iy),
                }
            };
            edges.push(face(index, kind, dy, dx));
        }
    }
    for iy in 0..=ny {
        for ix in 0..nx {
            let index = edges.len();
            let kind = if iy == 0 {
                EdgeKind::Boundary { cell: grid.cell_index(ix, 0) }
            } else if iy == ny {
                EdgeKind::Boundary { cell: grid.cell_index(ix, ny - 1) }
            } else {
                EdgeKind::Interior {
                    left: grid.cell_index(ix, iy - 1),
                    right: grid.cell_index(ix, iy),
                }
            };
            edges.push(face(index, kind, dx, dy));
        }
    }

    let h = (dx * dx + dy * dy).sqrt();
    let mut mesh = Mesh::from_parts(cells, edges, h)?;
    mesh.grid = Some(grid);
    Ok(mesh)
}

/// A face of length `length` separating cells `spacing` apart.
fn face(index: usize, kind: EdgeKind, length: f64, spacing: f64) -> Edge {
    let half = 0.5 * spacing;
    match kind {
        EdgeKind::Interior { .. } => Edge::new(index, kind, length, spacing, (half, half)),
        EdgeKind::Boundary { .. } => Edge::new(index, kind, length, half, (half, half)),
    }
}

/// The mesh regularity `ξ = min d(x_K, σ) / d(x_K, x_L)` over interior edges;
/// 1 when there are none.
pub fn compute_regularity(mesh: &Mesh) -> f64 {
    regularity_of(mesh.edges())
}

/// Finds the cell containing `point`. Points on a shared face belong to the
/// cell with the smaller index.
pub fn locate_cell(mesh: &Mesh, point: Point) -> Result<usize> {
    let outside = || Error::PointOutside { x: point[0], y: point[1] };
    let g = mesh
        .grid()
        .ok_or_else(|| Error::InvalidMesh("cell lookup requires a uniform grid".into()))?;
    let [x, y] = point;
    if !(x >= g.x_range.0 && x <= g.x_range.1 && y >= g.y_range.0 && y <= g.y_range.1) {
        return Err(outside());
    }
    let axis = |v: f64, lo: f64, d: f64, n: usize| -> usize {
        let t = ((v - lo) / d).ceil();
        // ceil - 1 sends points on a face to the lower cell
        (t as isize - 1).clamp(0, n as isize - 1) as usize
    };
    let ix = axis(x, g.x_range.0, g.dx, g.nx);
    let iy = axis(y, g.y_range.0, g.dy, g.ny);
    Ok(g.cell_index(ix, iy))
}
