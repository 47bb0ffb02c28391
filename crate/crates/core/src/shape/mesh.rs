//! Isosurface of a binary mask.
//!
//! The mask is padded by one empty voxel and triangulated with marching
//! cubes at the 0.5 level; on a binary field every vertex sits at the
//! midpoint of its edge. The staircase this produces overestimates the area
//! of smooth objects by close to 10%, so the mesh is relaxed with Taubin
//! (lambda/mu) smoothing in which every vertex stays within a quarter voxel
//! of its starting position along each axis. The clamp keeps small
//! structures from collapsing and leaves the topology untouched.

use std::collections::HashMap;

use super::tables::TRIANGLES;
use crate::volume_io::Mask;

pub const SMOOTHING_ITERATIONS: usize = 20;
pub const SMOOTHING_LAMBDA: f64 = 0.5;
pub const SMOOTHING_MU: f64 = -0.53;
/// Largest per-axis vertex displacement, in voxels.
pub const SMOOTHING_CLAMP: f64 = 0.25;

const CORNERS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

const EDGES: [[usize; 2]; 12] = [
    [0, 1],
    [1, 2],
    [2, 3],
    [3, 0],
    [4, 5],
    [5, 6],
    [6, 7],
    [7, 4],
    [0, 4],
    [1, 5],
    [2, 6],
    [3, 7],
];

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    /// Vertex positions in mm, relative to the centre of voxel (0, 0, 0).
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
}

impl SurfaceMesh {
    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize]);
                let u = sub(b, a);
                let v = sub(c, a);
                0.5 * norm(cross(u, v))
            })
            .sum()
    }

    /// Volume enclosed by the (closed, consistently oriented) mesh, from the
    /// divergence theorem.
    pub fn enclosed_volume(&self) -> f64 {
        let signed: f64 = self
            .triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize]);
                dot(a, cross(b, c))
            })
            .sum();
        (signed / 6.0).abs()
    }

    /// Undirected edges, each listed once as `(low, high)`, sorted.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut edges: Vec<(u32, u32)> = self
            .triangles
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Midpoint marching-cubes triangulation of the mask boundary, unsmoothed.
pub fn marching_cubes(mask: &Mask, spacing: [f64; 3]) -> SurfaceMesh {
    let [nx, ny, nz] = mask.dims();
    // padded grid: one empty layer on every side
    let p = [nx + 2, ny + 2, nz + 2];
    let mut inside = vec![false; p[0] * p[1] * p[2]];
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                if mask.get(x, y, z) {
                    inside[(x + 1) + p[0] * ((y + 1) + p[1] * (z + 1))] = true;
                }
            }
        }
    }
    let at = |x: usize, y: usize, z: usize| inside[x + p[0] * (y + p[1] * z)];

    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    // key: (padded index of the lower grid point, axis of the edge)
    let mut vertex_ids: HashMap<(usize, u8), u32> = HashMap::new();

    for z in 0..p[2] - 1 {
        for y in 0..p[1] - 1 {
            for x in 0..p[0] - 1 {
                let mut case = 0usize;
                for (k, c) in CORNERS.iter().enumerate() {
                    if at(x + c[0], y + c[1], z + c[2]) {
                        case |= 1 << k;
                    }
                }
                if case == 0 || case == 255 {
                    continue;
                }
                let row = &TRIANGLES[case];
                let mut corner_ids = [0u32; 3];
                for tri in row.chunks_exact(3).take_while(|t| t[0] >= 0) {
                    for (slot, &edge) in tri.iter().enumerate() {
                        let [a, b] = EDGES[edge as usize];
                        let (ca, cb) = (CORNERS[a], CORNERS[b]);
                        let low = [
                            x + ca[0].min(cb[0]),
                            y + ca[1].min(cb[1]),
                            z + ca[2].min(cb[2]),
                        ];
                        let axis = (0..3).find(|&i| ca[i] != cb[i]).unwrap() as u8;
                        let key = (low[0] + p[0] * (low[1] + p[1] * low[2]), axis);
                        let id = *vertex_ids.entry(key).or_insert_with(|| {
                            let mut pos = [0.0; 3];
                            for i in 0..3 {
                                let offset = if i as u8 == axis { 0.5 } else { 0.0 };
                                pos[i] = (low[i] as f64 + offset - 1.0) * spacing[i];
                            }
                            vertices.push(pos);
                            (vertices.len() - 1) as u32
                        });
                        corner_ids[slot] = id;
                    }
                    triangles.push(corner_ids);
                }
            }
        }
    }
    SurfaceMesh {
        vertices,
        triangles,
    }
}

/// Clamped Taubin smoothing in place; see the module docs.
pub fn smooth(mesh: &mut SurfaceMesh, spacing: [f64; 3], iterations: usize) {
    let n = mesh.vertices.len();
    let mut neighbours: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (a, b) in mesh.edges() {
        neighbours[a as usize].push(b);
        neighbours[b as usize].push(a);
    }
    let origin = mesh.vertices.clone();
    let limit = spacing.map(|s| SMOOTHING_CLAMP * s);
    let mut scratch = vec![[0.0; 3]; n];
    for _ in 0..iterations {
        for factor in [SMOOTHING_LAMBDA, SMOOTHING_MU] {
            for (i, nb) in neighbours.iter().enumerate() {
                let v = mesh.vertices[i];
                if nb.is_empty() {
                    scratch[i] = v;
                    continue;
                }
                let mut mean = [0.0; 3];
                for &j in nb {
                    let w = mesh.vertices[j as usize];
                    for a in 0..3 {
                        mean[a] += w[a];
                    }
                }
                for a in 0..3 {
                    mean[a] /= nb.len() as f64;
                    let moved = v[a] + factor * (mean[a] - v[a]);
                    scratch[i][a] = moved.clamp(origin[i][a] - limit[a], origin[i][a] + limit[a]);
                }
            }
            std::mem::swap(&mut mesh.vertices, &mut scratch);
        }
    }
}

/// Marching cubes followed by clamped smoothing.
pub fn surface_mesh(mask: &Mask, spacing: [f64; 3]) -> SurfaceMesh {
    let mut mesh = marching_cubes(mask, spacing);
    smooth(&mut mesh, spacing, SMOOTHING_ITERATIONS);
    mesh
}
