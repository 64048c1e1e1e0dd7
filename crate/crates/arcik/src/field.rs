//! Obstacle sets and the artificial potential field.
//!
//! The obstacle cost is a function of the signed distance `d` to the
//! nearest obstacle:
//!
//! ```text
//! c(d) = k_o (-d + e/2)          d < 0        (linearized inside)
//! c(d) = k_o / (2 e) (d - e)^2   0 <= d <= e
//! c(d) = 0                       d > e
//! ```
//!
//! which is continuous everywhere and C1 at both branch joints. For fast
//! queries the field is precomputed on a dense grid over the workspace and
//! trilinearly interpolated; the exact evaluation stays available as an
//! oracle and as a grid-free fallback.

use crate::geometry::{Aabb, Vec3};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

/// Node-count cap for grid construction.
pub const DEFAULT_GRID_NODE_CAP: u64 = 50_000_000;

/// A workspace obstacle. Tagged so other shapes can be added to the file
/// format without breaking it; only spheres exist today.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Obstacle {
    Sphere { center: Vec3, radius: f64 },
}

impl Obstacle {
    pub fn signed_distance(&self, p: Vec3) -> f64 {
        match self {
            Obstacle::Sphere { center, radius } => (p - *center).norm() - radius,
        }
    }

    pub fn is_valid(&self) -> bool {
        match self {
            Obstacle::Sphere { center, radius } => center.is_finite() && *radius > 0.0,
        }
    }
}

/// Distance from `p` to the nearest obstacle surface, negative inside.
/// An empty obstacle list yields `+inf` (zero cost everywhere).
pub fn signed_distance(obstacles: &[Obstacle], p: Vec3) -> f64 {
    obstacles
        .iter()
        .map(|o| o.signed_distance(p))
        .fold(f64::INFINITY, f64::min)
}

/// Shape parameters of the potential field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldParams {
    /// Influence distance: obstacles farther than this contribute nothing.
    pub epsilon: f64,
    /// Slope gain of the field.
    pub k_o: f64,
}

impl FieldParams {
    pub fn new(epsilon: f64, k_o: f64) -> Self {
        FieldParams { epsilon, k_o }
    }

    pub fn is_valid(&self) -> bool {
        self.epsilon > 0.0 && self.k_o > 0.0 && self.epsilon.is_finite() && self.k_o.is_finite()
    }
}

/// Three-branch obstacle cost of a signed distance.
pub fn obstacle_cost(d: f64, params: &FieldParams) -> f64 {
    let e = params.epsilon;
    if d < 0.0 {
        params.k_o * (-d + 0.5 * e)
    } else if d <= e {
        params.k_o / (2.0 * e) * (d - e) * (d - e)
    } else {
        0.0
    }
}

/// Exact field evaluation, bypassing any grid.
pub fn query_cost_exact(obstacles: &[Obstacle], p: Vec3, params: &FieldParams) -> f64 {
    obstacle_cost(signed_distance(obstacles, p), params)
}

/// Dense precomputed obstacle-cost field with trilinear interpolation.
///
/// Values are stored row-major with z fastest: index (i, j, k) maps to
/// `(i * ny + j) * nz + k`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialGrid {
    origin: Vec3,
    spacing: f64,
    dims: [usize; 3],
    values: Vec<f64>,
    params: FieldParams,
}

impl PotentialGrid {
    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn params(&self) -> &FieldParams {
        &self.params
    }

    pub fn node_count(&self) -> usize {
        self.values.len()
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    pub fn node_position(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64, j as f64, k as f64) * self.spacing
    }

    pub fn node_value(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.index(i, j, k)]
    }

    /// Trilinear interpolation of the eight surrounding node values.
    /// Queries outside the grid are clamped to the boundary cell with a
    /// logged warning; the optimizer may momentarily step outside the
    /// workspace box and a finite conservative cost is the useful answer.
    pub fn query(&self, p: Vec3) -> f64 {
        let rel = (p - self.origin) / self.spacing;
        let mut coords = [rel.x, rel.y, rel.z];
        let mut clamped = false;
        for (axis, c) in coords.iter_mut().enumerate() {
            let hi = (self.dims[axis] - 1) as f64;
            if *c < 0.0 {
                *c = 0.0;
                clamped = true;
            } else if *c > hi {
                *c = hi;
                clamped = true;
            }
        }
        if clamped {
            log::warn!("potential grid query at {p:?} outside bounds; clamped");
        }
        let cell = |c: f64, axis: usize| -> (usize, f64) {
            let i = (c.floor() as usize).min(self.dims[axis].saturating_sub(2));
            (i, c - i as f64)
        };
        let (i0, fx) = cell(coords[0], 0);
        let (j0, fy) = cell(coords[1], 1);
        let (k0, fz) = cell(coords[2], 2);
        let mut acc = 0.0;
        for (di, wx) in [(0, 1.0 - fx), (1, fx)] {
            for (dj, wy) in [(0, 1.0 - fy), (1, fy)] {
                for (dk, wz) in [(0, 1.0 - fz), (1, fz)] {
                    let w = wx * wy * wz;
                    if w != 0.0 {
                        acc += w * self.node_value(i0 + di, j0 + dj, k0 + dk);
                    }
                }
            }
        }
        acc
    }

    /// Writes the grid in the `APFGRID1` little-endian binary layout:
    /// magic, origin (3 f64), spacing, dims (3 u64), epsilon, k_o, then the
    /// node values row-major (z fastest).
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(b"APFGRID1")?;
        for v in [self.origin.x, self.origin.y, self.origin.z, self.spacing] {
            w.write_all(&v.to_le_bytes())?;
        }
        for d in self.dims {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        for v in [self.params.epsilon, self.params.k_o] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != b"APFGRID1" {
            return Err(Error::BadGridFile("bad magic".into()));
        }
        let mut f64_buf = [0u8; 8];
        let mut read_f64 = |r: &mut BufReader<File>| -> Result<f64> {
            r.read_exact(&mut f64_buf)?;
            Ok(f64::from_le_bytes(f64_buf))
        };
        let ox = read_f64(&mut r)?;
        let oy = read_f64(&mut r)?;
        let oz = read_f64(&mut r)?;
        let spacing = read_f64(&mut r)?;
        let mut u64_buf = [0u8; 8];
        let mut dims = [0usize; 3];
        for d in &mut dims {
            r.read_exact(&mut u64_buf)?;
            let v = u64::from_le_bytes(u64_buf);
            if v == 0 || v > DEFAULT_GRID_NODE_CAP {
                return Err(Error::BadGridFile(format!("implausible dimension {v}")));
            }
            *d = v as usize;
        }
        let mut f64_buf2 = [0u8; 8];
        let mut read_f64b = |r: &mut BufReader<File>| -> Result<f64> {
            r.read_exact(&mut f64_buf2)?;
            Ok(f64::from_le_bytes(f64_buf2))
        };
        let epsilon = read_f64b(&mut r)?;
        let k_o = read_f64b(&mut r)?;
        let total = dims[0] * dims[1] * dims[2];
        let mut values = vec![0.0f64; total];
        let mut buf = vec![0u8; total * 8];
        r.read_exact(&mut buf)?;
        for (chunk, v) in buf.chunks_exact(8).zip(values.iter_mut()) {
            *v = f64::from_le_bytes(chunk.try_into().unwrap());
        }
        Ok(PotentialGrid {
            origin: Vec3::new(ox, oy, oz),
            spacing,
            dims,
            values,
            params: FieldParams::new(epsilon, k_o),
        })
    }
}

/// Precomputes the field over `bounds` at the given node spacing. Node
/// values equal `obstacle_cost(signed_distance(node))` exactly; the build
/// parallelizes over nodes and is deterministic regardless of thread count.
pub fn build_grid(
    obstacles: &[Obstacle],
    bounds: &Aabb,
    spacing: f64,
    params: &FieldParams,
) -> Result<PotentialGrid> {
    build_grid_with_cap(obstacles, bounds, spacing, params, DEFAULT_GRID_NODE_CAP)
}

pub fn build_grid_with_cap(
    obstacles: &[Obstacle],
    bounds: &Aabb,
    spacing: f64,
    params: &FieldParams,
    node_cap: u64,
) -> Result<PotentialGrid> {
    assert!(spacing > 0.0, "grid spacing must be positive");
    assert!(bounds.is_valid(), "grid bounds must be a nondegenerate box");
    let extent = bounds.extent();
    let dims = [
        (extent.x / spacing).ceil() as usize + 1,
        (extent.y / spacing).ceil() as usize + 1,
        (extent.z / spacing).ceil() as usize + 1,
    ];
    let nodes = dims[0] as u64 * dims[1] as u64 * dims[2] as u64;
    if nodes > node_cap {
        return Err(Error::GridTooLarge { nodes, cap: node_cap });
    }
    let origin = bounds.min;
    let (ny, nz) = (dims[1], dims[2]);
    let values: Vec<f64> = (0..nodes as usize)
        .into_par_iter()
        .map(|idx| {
            let k = idx % nz;
            let j = (idx / nz) % ny;
            let i = idx / (nz * ny);
            let p = origin + Vec3::new(i as f64, j as f64, k as f64) * spacing;
            obstacle_cost(signed_distance(obstacles, p), params)
        })
        .collect();
    Ok(PotentialGrid { origin, spacing, dims, values, params: *params })
}

/// The cost source a solve runs against: a precomputed grid or the exact
/// field. Both are queried identically by the cost assembly.
#[derive(Clone, Debug)]
pub enum CostField {
    Grid(PotentialGrid),
    Exact { obstacles: Vec<Obstacle>, params: FieldParams },
}

impl CostField {
    pub fn query(&self, p: Vec3) -> f64 {
        match self {
            CostField::Grid(g) => g.query(p),
            CostField::Exact { obstacles, params } => query_cost_exact(obstacles, p, params),
        }
    }

    /// True when no obstacle can ever contribute cost.
    pub fn is_free(&self) -> bool {
        match self {
            CostField::Grid(g) => g.values.iter().all(|v| *v == 0.0),
            CostField::Exact { obstacles, .. } => obstacles.is_empty(),
        }
    }
}
