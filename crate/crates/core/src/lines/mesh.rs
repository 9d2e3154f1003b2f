//! Triangle meshes in ℝ³ and line-crossing counts.
//!
//! The line/triangle predicate uses Plücker side products
//! `s(a, b) = d · ((a − o) × (b − o))`, which flip sign exactly when an edge
//! is reversed. A line meets a triangle when its three side products agree in
//! sign. An exact zero on edge `(i, j)` is read as positive iff `i < j`, so a
//! line through an edge shared by two consistently oriented triangles is
//! owned by exactly one of them.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{cross, dot3, Line3D};
use crate::error::{Error, Result};

/// Triangles with smaller area are rejected.
pub const MIN_TRIANGLE_AREA: f64 = 1e-14;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<[f64; 3]>,
    triangles: Vec<[usize; 3]>,
    bvh: Vec<Node>,
    order: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Node {
    lo: [f64; 3],
    hi: [f64; 3],
    // Leaves index `order[start..end]`; inner nodes store child indices.
    kind: NodeKind,
}

#[derive(Debug, Clone)]
enum NodeKind {
    Leaf { start: usize, end: usize },
    Inner { left: usize, right: usize },
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

impl TriMesh {
    pub fn new(vertices: Vec<[f64; 3]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::invalid("mesh has no triangles"));
        }
        if vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::invalid("mesh coordinates must be finite"));
        }
        for (k, t) in triangles.iter().enumerate() {
            if t.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::invalid(format!("triangle {k} references a missing vertex")));
            }
            let [a, b, c] = t.map(|i| vertices[i]);
            let n = cross(sub(b, a), sub(c, a));
            let area = 0.5 * dot3(n, n).sqrt();
            if !(area > MIN_TRIANGLE_AREA) {
                return Err(Error::invalid(format!("triangle {k} is degenerate (area {area:e})")));
            }
        }
        let mut mesh = TriMesh { vertices, triangles, bvh: Vec::new(), order: Vec::new() };
        mesh.build_bvh();
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, k: usize) -> [[f64; 3]; 3] {
        self.triangles[k].map(|i| self.vertices[i])
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|k| {
                let [a, b, c] = self.triangle(k);
                let n = cross(sub(b, a), sub(c, a));
                0.5 * dot3(n, n).sqrt()
            })
            .sum()
    }

    /// Center of the bounding box and the largest vertex distance from it.
    pub fn bounding_sphere(&self) -> ([f64; 3], f64) {
        let root = &self.bvh[0];
        let c = [0, 1, 2].map(|k| 0.5 * (root.lo[k] + root.hi[k]));
        let r = self
            .vertices
            .iter()
            .map(|v| {
                let d = sub(*v, c);
                dot3(d, d).sqrt()
            })
            .fold(0.0, f64::max);
        (c, r)
    }

    /// Reads an ASCII OFF file containing only triangles.
    pub fn from_off(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_off(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse_off(text: &str) -> Result<Self> {
        let mut tokens = text.lines().map(|l| l.split('#').next().unwrap_or("")).flat_map(str::split_whitespace);
        let bad = |m: &str| Error::Parse(m.to_string());
        if tokens.next() != Some("OFF") {
            return Err(bad("missing OFF header"));
        }
        let mut int = |what: &str| -> Result<usize> {
            tokens
                .next()
                .ok_or_else(|| bad(&format!("unexpected end of file reading {what}")))?
                .parse()
                .map_err(|_| bad(&format!("invalid {what}")))
        };
        let nv = int("vertex count")?;
        let nf = int("face count")?;
        let _ne = int("edge count")?;
        let mut vertices = Vec::with_capacity(nv);
        let mut triangles = Vec::with_capacity(nf);
        for _ in 0..nv {
            let mut v = [0.0; 3];
            for x in &mut v {
                *x = tokens
                    .next()
                    .ok_or_else(|| bad("unexpected end of file in vertices"))?
                    .parse()
                    .map_err(|_| bad("invalid vertex coordinate"))?;
            }
            vertices.push(v);
        }
        for _ in 0..nf {
            let mut next = || -> Result<usize> {
                tokens
                    .next()
                    .ok_or_else(|| bad("unexpected end of file in faces"))?
                    .parse()
                    .map_err(|_| bad("invalid face index"))
            };
            if next()? != 3 {
                return Err(bad("only triangular faces are supported"));
            }
            triangles.push([next()?, next()?, next()?]);
        }
        Self::new(vertices, triangles)
    }

    pub fn to_off(&self) -> String {
        let mut s = format!("OFF\n{} {} 0\n", self.vertices.len(), self.triangles.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{:?} {:?} {:?}", v[0], v[1], v[2]);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
        }
        s
    }

    pub fn write_off(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_off())?;
        Ok(())
    }

    /// Geodesic icosphere of radius 1; `subdivisions = 4` gives 2562 vertices.
    pub fn icosphere(subdivisions: u32) -> Self {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut vertices: Vec<[f64; 3]> = [
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
        ]
        .into_iter()
        .map(unit)
        .collect();
        let mut faces: Vec<[usize; 3]> = vec![
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
        for _ in 0..subdivisions {
            let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
            let mut midpoint = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| {
                *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    let (p, q) = (verts[a], verts[b]);
                    verts.push(unit([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                    verts.len() - 1
                })
            };
            let mut next = Vec::with_capacity(faces.len() * 4);
            for [a, b, c] in faces {
                let ab = midpoint(a, b, &mut vertices);
                let bc = midpoint(b, c, &mut vertices);
                let ca = midpoint(c, a, &mut vertices);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            faces = next;
        }
        Self::new(vertices, faces).expect("icosphere is valid")
    }

    /// Unit disk in the plane `z = 0`, triangulated by `rings` concentric
    /// rings of `sectors` vertices plus the center, counterclockwise seen
    /// from `+z`.
    pub fn disk(rings: usize, sectors: usize) -> Self {
        let rings = rings.max(1);
        let sectors = sectors.max(3);
        let mut vertices = vec![[0.0, 0.0, 0.0]];
        for i in 1..=rings {
            let rad = i as f64 / rings as f64;
            for j in 0..sectors {
                let a = 2.0 * std::f64::consts::PI * j as f64 / sectors as f64;
                vertices.push([rad * a.cos(), rad * a.sin(), 0.0]);
            }
        }
        let ring = |i: usize, j: usize| 1 + (i - 1) * sectors + j % sectors;
        let mut faces = Vec::new();
        for j in 0..sectors {
            faces.push([0, ring(1, j), ring(1, j + 1)]);
        }
        for i in 1..rings {
            for j in 0..sectors {
                let (a, b) = (ring(i, j), ring(i, j + 1));
                let (c, d) = (ring(i + 1, j), ring(i + 1, j + 1));
                faces.push([a, c, d]);
                faces.push([a, d, b]);
            }
        }
        Self::new(vertices, faces).expect("disk is valid")
    }

    /// The square `[0, side]² × {0}` split into `2n²` triangles.
    pub fn square(side: f64, n: usize) -> Self {
        let n = n.max(1);
        let h = side / n as f64;
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for i in 0..=n {
            for j in 0..=n {
                vertices.push([j as f64 * h, i as f64 * h, 0.0]);
            }
        }
        let id = |i: usize, j: usize| i * (n + 1) + j;
        let mut faces = Vec::with_capacity(2 * n * n);
        for i in 0..n {
            for j in 0..n {
                faces.push([id(i, j), id(i, j + 1), id(i + 1, j + 1)]);
                faces.push([id(i, j), id(i + 1, j + 1), id(i + 1, j)]);
            }
        }
        Self::new(vertices, faces).expect("square is valid")
    }

    /// The mesh with every vertex mapped through `f`.
    pub fn map_vertices(&self, f: impl Fn([f64; 3]) -> [f64; 3]) -> Result<Self> {
        Self::new(self.vertices.iter().map(|&v| f(v)).collect(), self.triangles.clone())
    }

    fn tri_bounds(&self, k: usize) -> ([f64; 3], [f64; 3]) {
        let tri = self.triangle(k);
        let mut lo = tri[0];
        let mut hi = tri[0];
        for v in &tri[1..] {
            for a in 0..3 {
                lo[a] = lo[a].min(v[a]);
                hi[a] = hi[a].max(v[a]);
            }
        }
        (lo, hi)
    }

    fn build_bvh(&mut self) {
        let n = self.triangles.len();
        let bounds: Vec<_> = (0..n).map(|k| self.tri_bounds(k)).collect();
        let centroids: Vec<[f64; 3]> = bounds.iter().map(|(lo, hi)| [0, 1, 2].map(|a| 0.5 * (lo[a] + hi[a]))).collect();
        let mut order: Vec<usize> = (0..n).collect();
        let mut nodes = Vec::with_capacity(2 * n / LEAF_SIZE + 1);
        build_node(&mut nodes, &mut order, 0, n, &bounds, &centroids);
        self.bvh = nodes;
        self.order = order;
    }

    /// Triangles whose padded bounding boxes meet the line, in BVH order.
    fn candidates(&self, line: &Line3D, out: &mut Vec<usize>) {
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let node = &self.bvh[i];
            if !line_hits_box(line, node.lo, node.hi) {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, end } => out.extend_from_slice(&self.order[start..end]),
                NodeKind::Inner { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
    }
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let l = dot3(v, v).sqrt();
    [v[0] / l, v[1] / l, v[2] / l]
}

fn build_node(
    nodes: &mut Vec<Node>,
    order: &mut [usize],
    start: usize,
    end: usize,
    bounds: &[([f64; 3], [f64; 3])],
    centroids: &[[f64; 3]],
) -> usize {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &k in &order[start..end] {
        for a in 0..3 {
            lo[a] = lo[a].min(bounds[k].0[a]);
            hi[a] = hi[a].max(bounds[k].1[a]);
        }
    }
    let pad = 1e-9 * (0..3).map(|a| hi[a] - lo[a]).fold(1.0, f64::max);
    for a in 0..3 {
        lo[a] -= pad;
        hi[a] += pad;
    }
    let idx = nodes.len();
    nodes.push(Node { lo, hi, kind: NodeKind::Leaf { start, end } });
    if end - start <= LEAF_SIZE {
        return idx;
    }
    let axis = (0..3).max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b]))).expect("three axes");
    let mid = start + (end - start) / 2;
    order[start..end].select_nth_unstable_by(mid - start, |&x, &y| {
        centroids[x][axis].total_cmp(&centroids[y][axis]).then(x.cmp(&y))
    });
    let left = build_node(nodes, order, start, mid, bounds, centroids);
    let right = build_node(nodes, order, mid, end, bounds, centroids);
    nodes[idx].kind = NodeKind::Inner { left, right };
    idx
}

/// Slab test for an infinite line against a closed box.
fn line_hits_box(line: &Line3D, lo: [f64; 3], hi: [f64; 3]) -> bool {
    let (mut tmin, mut tmax) = (f64::NEG_INFINITY, f64::INFINITY);
    for a in 0..3 {
        let o = line.point[a];
        let d = line.direction[a];
        if d == 0.0 {
            if o < lo[a] || o > hi[a] {
                return false;
            }
            continue;
        }
        let (t1, t2) = ((lo[a] - o) / d, (hi[a] - o) / d);
        let (t1, t2) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        tmin = tmin.max(t1);
        tmax = tmax.min(t2);
        if tmin > tmax {
            return false;
        }
    }
    true
}

#[inline]
fn side(d: [f64; 3], o: [f64; 3], a: [f64; 3], b: [f64; 3]) -> f64 {
    dot3(d, cross(sub(a, o), sub(b, o)))
}

#[inline]
fn side_sign(s: f64, i: usize, j: usize) -> bool {
    if s == 0.0 {
        i < j
    } else {
        s > 0.0
    }
}

/// Whether the line meets triangle `k`, with the ownership rule above.
pub(crate) fn line_hits_triangle(mesh: &TriMesh, k: usize, line: &Line3D) -> bool {
    let [i, j, l] = mesh.triangles[k];
    let [a, b, c] = mesh.triangle(k);
    let (o, d) = (line.point, line.direction);
    let n = cross(sub(b, a), sub(c, a));
    if dot3(d, n) == 0.0 {
        return false;
    }
    let s1 = side_sign(side(d, o, a, b), i, j);
    let s2 = side_sign(side(d, o, b, c), j, l);
    let s3 = side_sign(side(d, o, c, a), l, i);
    s1 == s2 && s2 == s3
}

/// Number of triangles met by the line.
pub fn mesh_line_crossings(mesh: &TriMesh, line: &Line3D) -> u32 {
    let mut cand = Vec::new();
    mesh_line_crossings_with(mesh, line, &mut cand)
}

/// As [`mesh_line_crossings`], reusing a scratch buffer.
pub fn mesh_line_crossings_with(mesh: &TriMesh, line: &Line3D, scratch: &mut Vec<usize>) -> u32 {
    scratch.clear();
    mesh.candidates(line, scratch);
    scratch.iter().filter(|&&k| line_hits_triangle(mesh, k, line)).count() as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(mesh: &TriMesh, line: &Line3D) -> u32 {
        (0..mesh.triangles().len()).filter(|&k| line_hits_triangle(mesh, k, line)).count() as u32
    }

    #[test]
    fn icosphere_counts() {
        let m = TriMesh::icosphere(4);
        assert_eq!(m.vertices().len(), 2562);
        assert_eq!(m.triangles().len(), 5120);
        let area = m.area();
        assert!(area < 4.0 * std::f64::consts::PI && area > 12.5);
        let line = Line3D::new([0.0; 3], [0.3, -0.2, 0.9]).unwrap();
        assert_eq!(mesh_line_crossings(&m, &line), 2);
        let miss = Line3D::new([0.0, 0.0, 1.5], [1.0, 0.2, 0.0]).unwrap();
        assert_eq!(mesh_line_crossings(&m, &miss), 0);
    }

    #[test]
    fn parallel_line_misses_square() {
        let sq = TriMesh::square(1.0, 4);
        let line = Line3D::new([0.5, 0.5, 0.0], [1.0, 0.0, 0.0]).unwrap();
        assert_eq!(mesh_line_crossings(&sq, &line), 0);
        let above = Line3D::new([0.5, 0.5, 0.3], [1.0, 1.0, 0.0]).unwrap();
        assert_eq!(mesh_line_crossings(&sq, &above), 0);
    }

    #[test]
    fn shared_edge_counted_once() {
        let sq = TriMesh::square(1.0, 1);
        // The diagonal is shared by both triangles.
        let line = Line3D::new([0.5, 0.5, 0.0], [0.0, 0.0, 1.0]).unwrap();
        assert_eq!(mesh_line_crossings(&sq, &line), 1);
        let line = Line3D::new([0.25, 0.25, -1.0], [0.1, -0.2, 1.0]).unwrap();
        assert_eq!(mesh_line_crossings(&sq, &line), 1);
        // Horizontal, vertical and diagonal interior edges of a finer grid.
        let sq = TriMesh::square(1.0, 4);
        for p in [[0.375, 0.5, 0.0], [0.5, 0.375, 0.0], [0.3, 0.3, 0.0]] {
            let line = Line3D::new(p, [0.0, 0.0, 1.0]).unwrap();
            assert_eq!(mesh_line_crossings(&sq, &line), 1, "{p:?}");
        }
    }

    #[test]
    fn bvh_matches_brute_force() {
        let m = TriMesh::icosphere(2);
        let mut rng = 12345u64;
        let mut next = || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (rng >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for _ in 0..500 {
            let o = [next(), next(), next()];
            let d = [next(), next(), next()];
            let line = Line3D::new(o, d).unwrap();
            assert_eq!(mesh_line_crossings(&m, &line), brute(&m, &line));
        }
    }

    #[test]
    fn disk_area_and_hits() {
        let d = TriMesh::disk(16, 128);
        let exact = 128.0 / 2.0 * (2.0 * std::f64::consts::PI / 128.0).sin();
        assert!((d.area() - exact).abs() < 1e-12);
        let line = Line3D::new([0.1, 0.2, 0.0], [0.2, 0.1, 1.0]).unwrap();
        assert_eq!(mesh_line_crossings(&d, &line), 1);
    }

    #[test]
    fn off_roundtrip_and_errors() {
        let m = TriMesh::icosphere(1);
        let back = TriMesh::parse_off(&m.to_off()).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.triangles(), m.triangles());
        assert!(TriMesh::parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n2 0 0\n3 0 1 2\n").is_err());
        assert!(TriMesh::parse_off("OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n4 0 1 2 3\n").is_err());
        assert!(TriMesh::parse_off("PLY\n").is_err());
        assert!(TriMesh::parse_off("OFF\n1 0 0\nnan 0 0\n").is_err());
    }
}
