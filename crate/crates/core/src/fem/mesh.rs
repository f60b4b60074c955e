use std::collections::HashMap;
use std::f64::consts::PI;
use std::hash::{DefaultHasher, Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::bounds::DomainGeometry;
use crate::constants::{poincare_default, Dimension};
use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BoundaryTag {
    Dirichlet,
    Neumann,
}

impl BoundaryTag {
    pub fn letter(self) -> char {
        match self {
            BoundaryTag::Dirichlet => 'D',
            BoundaryTag::Neumann => 'N',
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "d" | "dirichlet" => Some(BoundaryTag::Dirichlet),
            "n" | "neumann" => Some(BoundaryTag::Neumann),
            _ => None,
        }
    }
}

impl<'de> Deserialize<'de> for BoundaryTag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        BoundaryTag::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown boundary tag {s:?} (use D or N)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub tag: BoundaryTag,
}

/// A conforming triangulation of a polygon with tagged boundary edges.
///
/// Cells are positively oriented; every boundary edge carries exactly one
/// tag. Areas and the gradients of the barycentric coordinates are cached.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    cells: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    h_max: f64,
    areas: Vec<f64>,
    grads: Vec<[Point; 3]>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

impl Mesh {
    pub fn new(vertices: Vec<Point>, cells: Vec<[usize; 3]>, boundary_edges: Vec<BoundaryEdge>) -> Result<Mesh> {
        let nv = vertices.len();
        if nv < 3 || cells.is_empty() {
            return Err(Error::Configuration("mesh needs at least one cell".into()));
        }
        if let Some(i) = vertices.iter().position(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::Configuration(format!("vertex {i} has a non-finite coordinate")));
        }
        let mut used = vec![false; nv];
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        let mut areas = Vec::with_capacity(cells.len());
        let mut grads = Vec::with_capacity(cells.len());
        let mut h_max = 0f64;
        for (k, c) in cells.iter().enumerate() {
            if c.iter().any(|&v| v >= nv) || c[0] == c[1] || c[1] == c[2] || c[0] == c[2] {
                return Err(Error::Configuration(format!("cell {k} has invalid vertex indices {c:?}")));
            }
            let [p0, p1, p2] = c.map(|v| vertices[v]);
            let twice = cross(p0, p1, p2);
            let scale = dist(p0, p1).max(dist(p1, p2)).max(dist(p0, p2));
            if !(twice > 1e-14 * scale * scale) {
                return Err(Error::Assembly(format!("cell {k} is degenerate or negatively oriented (2*area = {twice:e})")));
            }
            h_max = h_max.max(scale);
            areas.push(0.5 * twice);
            grads.push([
                [(p1[1] - p2[1]) / twice, (p2[0] - p1[0]) / twice],
                [(p2[1] - p0[1]) / twice, (p0[0] - p2[0]) / twice],
                [(p0[1] - p1[1]) / twice, (p1[0] - p0[0]) / twice],
            ]);
            for i in 0..3 {
                used[c[i]] = true;
                *edge_count.entry(edge_key(c[i], c[(i + 1) % 3])).or_default() += 1;
            }
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(Error::Configuration(format!("vertex {i} belongs to no cell")));
        }
        if let Some((e, n)) = edge_count.iter().filter(|(_, &n)| n > 2).min() {
            return Err(Error::Configuration(format!("edge {}-{} is shared by {n} cells", e.0, e.1)));
        }
        let mut tagged: HashMap<(usize, usize), BoundaryTag> = HashMap::new();
        let mut degree = vec![0usize; nv];
        for e in &boundary_edges {
            let [a, b] = e.vertices;
            let key = edge_key(a, b);
            if edge_count.get(&key) != Some(&1) {
                return Err(Error::Configuration(format!("tagged edge {a}-{b} is not a boundary edge of the mesh")));
            }
            if tagged.insert(key, e.tag).is_some() {
                return Err(Error::Configuration(format!("boundary edge {a}-{b} is tagged twice")));
            }
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut untagged: Vec<_> =
            edge_count.iter().filter(|(k, &n)| n == 1 && !tagged.contains_key(k)).map(|(k, _)| *k).collect();
        untagged.sort_unstable();
        if let Some(&(a, b)) = untagged.first() {
            return Err(Error::Configuration(format!("boundary edge {a}-{b} carries no tag")));
        }
        if let Some(v) = degree.iter().position(|&d| d != 0 && d != 2) {
            return Err(Error::Configuration(format!("boundary does not form closed loops at vertex {v}")));
        }
        Ok(Mesh { vertices, cells, boundary_edges, h_max, areas, grads })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    /// Longest edge.
    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn area(&self, cell: usize) -> f64 {
        self.areas[cell]
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    /// Gradients of the three barycentric coordinates of `cell`.
    pub fn basis_gradients(&self, cell: usize) -> &[Point; 3] {
        &self.grads[cell]
    }

    pub fn cell_points(&self, cell: usize) -> [Point; 3] {
        self.cells[cell].map(|v| self.vertices[v])
    }

    pub fn centroid(&self, cell: usize) -> Point {
        let [a, b, c] = self.cell_points(cell);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn edge_length(&self, edge: &BoundaryEdge) -> f64 {
        dist(self.vertices[edge.vertices[0]], self.vertices[edge.vertices[1]])
    }

    pub fn edge_midpoint(&self, edge: &BoundaryEdge) -> Point {
        let [a, b] = edge.vertices.map(|v| self.vertices[v]);
        [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]
    }

    /// `|Ω|`
    pub fn volume(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn boundary_measure(&self, tag: BoundaryTag) -> f64 {
        self.boundary_edges.iter().filter(|e| e.tag == tag).map(|e| self.edge_length(e)).sum()
    }

    pub fn has_dirichlet(&self) -> bool {
        self.boundary_edges.iter().any(|e| e.tag == BoundaryTag::Dirichlet)
    }

    /// Vertices on the closure of the Dirichlet part.
    pub fn dirichlet_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_vertices()];
        for e in self.boundary_edges.iter().filter(|e| e.tag == BoundaryTag::Dirichlet) {
            mask[e.vertices[0]] = true;
            mask[e.vertices[1]] = true;
        }
        mask
    }

    pub fn boundary_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_vertices()];
        for e in &self.boundary_edges {
            mask[e.vertices[0]] = true;
            mask[e.vertices[1]] = true;
        }
        mask
    }

    /// Lumped P1 masses `∫ φ_i`; `Σ m_i u_i` integrates a P1 field exactly.
    pub fn lumped_mass(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.n_vertices()];
        for (c, a) in self.cells.iter().zip(&self.areas) {
            for &v in c {
                m[v] += a / 3.0;
            }
        }
        m
    }

    /// Boundary counterpart of [`lumped_mass`](Mesh::lumped_mass).
    pub fn boundary_lumped_mass(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.n_vertices()];
        for e in &self.boundary_edges {
            let l = self.edge_length(e);
            m[e.vertices[0]] += l / 2.0;
            m[e.vertices[1]] += l / 2.0;
        }
        m
    }

    /// Diameter, attained at boundary vertices.
    pub fn diameter(&self) -> f64 {
        let b: Vec<Point> = self.boundary_mask().iter().zip(&self.vertices).filter(|(m, _)| **m).map(|(_, p)| *p).collect();
        let mut d = 0f64;
        for (i, p) in b.iter().enumerate() {
            for q in &b[i + 1..] {
                d = d.max(dist(*p, *q));
            }
        }
        d
    }

    /// Every boundary vertex lies on the inner side of every boundary edge.
    pub fn is_convex(&self) -> bool {
        let mut third: HashMap<(usize, usize), usize> = HashMap::new();
        for c in &self.cells {
            for i in 0..3 {
                third.insert(edge_key(c[i], c[(i + 1) % 3]), c[(i + 2) % 3]);
            }
        }
        let bmask = self.boundary_mask();
        let tol = 1e-10 * self.diameter().powi(2);
        self.boundary_edges.iter().all(|e| {
            let [a, b] = e.vertices.map(|v| self.vertices[v]);
            let inner = cross(a, b, self.vertices[third[&edge_key(e.vertices[0], e.vertices[1])]]).signum();
            self.vertices.iter().zip(&bmask).filter(|(_, m)| **m).all(|(p, _)| inner * cross(a, b, *p) >= -tol)
        })
    }

    /// Measurable descriptors for the bounds module. Convex meshes default
    /// the Poincaré constant to `δ/π`; otherwise it must be given.
    pub fn geometry(&self, poincare: Option<f64>) -> Result<DomainGeometry> {
        let diameter = self.diameter();
        let convex = self.is_convex();
        Ok(DomainGeometry {
            n: Dimension::new(2)?,
            volume: self.volume(),
            diameter,
            gamma_d_measure: self.boundary_measure(BoundaryTag::Dirichlet),
            gamma_measure: self.boundary_measure(BoundaryTag::Neumann),
            poincare: poincare_default(diameter, convex, poincare)?,
            convex,
        })
    }

    /// Barycentric coordinates of `p` in `cell`.
    pub fn barycentric(&self, cell: usize, p: Point) -> [f64; 3] {
        let [a, b, c] = self.cell_points(cell);
        let twice = 2.0 * self.areas[cell];
        let l0 = cross(p, b, c) / twice;
        let l1 = cross(a, p, c) / twice;
        [l0, l1, 1.0 - l0 - l1]
    }

    /// First cell containing `p` (closed cells, relative tolerance 1e-12).
    pub fn locate(&self, p: Point) -> Option<usize> {
        (0..self.n_cells()).find(|&k| self.barycentric(k, p).iter().all(|&l| l >= -1e-12))
    }

    pub fn contains(&self, p: Point) -> bool {
        self.locate(p).is_some()
    }

    pub fn nearest_vertex(&self, p: Point) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, q) in self.vertices.iter().enumerate() {
            let d = dist(p, *q);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        self.boundary_edges
            .iter()
            .map(|e| {
                let [a, b] = e.vertices.map(|v| self.vertices[v]);
                let d = [b[0] - a[0], b[1] - a[1]];
                let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1])).clamp(0.0, 1.0);
                dist(p, [a[0] + t * d[0], a[1] + t * d[1]])
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// A hash of the exact vertex coordinates, cells and tags.
    pub fn content_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for p in &self.vertices {
            p[0].to_bits().hash(&mut h);
            p[1].to_bits().hash(&mut h);
        }
        self.cells.hash(&mut h);
        for e in &self.boundary_edges {
            e.vertices.hash(&mut h);
            e.tag.hash(&mut h);
        }
        h.finish()
    }

    /// The same triangulation with boundary tags chosen from edge midpoints.
    pub fn retag(&self, tag_at: impl Fn(Point) -> BoundaryTag) -> Mesh {
        let mut m = self.clone();
        for e in &mut m.boundary_edges {
            e.tag = tag_at(self.edge_midpoint(e));
        }
        m
    }
}

/// A sub-segment `[from, to]` of a side, in the side's arclength parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub tag: BoundaryTag,
    pub from: f64,
    pub to: f64,
}

/// Tags along one side: a single tag or a partition into segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SideTags {
    Uniform(BoundaryTag),
    Segments(Vec<Segment>),
}

impl SideTags {
    fn validate(&self, side: &str) -> Result<()> {
        let SideTags::Segments(segs) = self else { return Ok(()) };
        let bad = |msg: String| Err(Error::Configuration(format!("boundary side {side}: {msg}")));
        if segs.is_empty() {
            return bad("no segments".into());
        }
        let mut at = 0.0;
        for s in segs {
            if !(s.from < s.to) || s.from < 0.0 || s.to > 1.0 {
                return bad(format!("segment [{}, {}] is not a nonempty part of [0, 1]", s.from, s.to));
            }
            if (s.from - at).abs() > 1e-12 {
                return bad(format!("segments leave a gap or overlap at {at}"));
            }
            at = s.to;
        }
        if (at - 1.0).abs() > 1e-12 {
            return bad(format!("segments end at {at}, not 1"));
        }
        Ok(())
    }

    fn tag_at(&self, t: f64) -> BoundaryTag {
        match self {
            SideTags::Uniform(tag) => *tag,
            SideTags::Segments(segs) => segs.iter().find(|s| t <= s.to).unwrap_or(segs.last().expect("validated")).tag,
        }
    }
}

/// Boundary tags of the unit square `[0,1]²`, side by side. Sides are
/// parameterized by `y` (left, right) or `x` (bottom, top).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SquareTags {
    pub left: SideTags,
    pub right: SideTags,
    pub bottom: SideTags,
    pub top: SideTags,
}

impl SquareTags {
    pub fn uniform(tag: BoundaryTag) -> Self {
        let s = SideTags::Uniform(tag);
        SquareTags { left: s.clone(), right: s.clone(), bottom: s.clone(), top: s }
    }

    /// Dirichlet on `x = 0`, Neumann elsewhere.
    pub fn dirichlet_left() -> Self {
        SquareTags { left: SideTags::Uniform(BoundaryTag::Dirichlet), ..SquareTags::uniform(BoundaryTag::Neumann) }
    }

    pub fn validate(&self) -> Result<()> {
        self.left.validate("left")?;
        self.right.validate("right")?;
        self.bottom.validate("bottom")?;
        self.top.validate("top")
    }

    fn tag_at(&self, p: Point) -> BoundaryTag {
        let eps = 1e-12;
        if p[0] < eps {
            self.left.tag_at(p[1])
        } else if p[0] > 1.0 - eps {
            self.right.tag_at(p[1])
        } else if p[1] < eps {
            self.bottom.tag_at(p[0])
        } else {
            self.top.tag_at(p[0])
        }
    }
}

/// `2m²` right triangles on `[0,1]²`, every square cut along its `(1,1)`
/// diagonal. Each edge takes the tag of the segment holding its midpoint.
pub fn build_structured_square(m: usize, tags: &SquareTags) -> Result<Mesh> {
    if m < 2 {
        return Err(Error::Configuration(format!("square mesh needs m >= 2 divisions (got {m})")));
    }
    tags.validate()?;
    let idx = |i: usize, j: usize| j * (m + 1) + i;
    let h = 1.0 / m as f64;
    let mut vertices = Vec::with_capacity((m + 1) * (m + 1));
    for j in 0..=m {
        for i in 0..=m {
            vertices.push([i as f64 * h, j as f64 * h]);
        }
    }
    let mut cells = Vec::with_capacity(2 * m * m);
    for j in 0..m {
        for i in 0..m {
            cells.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            cells.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    let mut loop_: Vec<usize> = Vec::with_capacity(4 * m);
    loop_.extend((0..m).map(|i| idx(i, 0)));
    loop_.extend((0..m).map(|j| idx(m, j)));
    loop_.extend((0..m).map(|i| idx(m - i, m)));
    loop_.extend((0..m).map(|j| idx(0, m - j)));
    let edges = (0..loop_.len())
        .map(|k| {
            let (a, b) = (loop_[k], loop_[(k + 1) % loop_.len()]);
            let mid = [(vertices[a][0] + vertices[b][0]) / 2.0, (vertices[a][1] + vertices[b][1]) / 2.0];
            BoundaryEdge { vertices: [a, b], tag: tags.tag_at(mid) }
        })
        .collect();
    Mesh::new(vertices, cells, edges)
}

/// Inscribed polygonal unit disk: a centre vertex and `m` concentric rings,
/// ring `k` carrying `6k` equally spaced vertices. Boundary all Dirichlet.
pub fn build_disk(m: usize) -> Result<Mesh> {
    if m < 1 {
        return Err(Error::Configuration("disk mesh needs m >= 1 rings".into()));
    }
    let start = |k: usize| if k == 0 { 0 } else { 1 + 3 * k * (k - 1) };
    let count = |k: usize| if k == 0 { 1 } else { 6 * k };
    let mut vertices = vec![[0.0, 0.0]];
    for k in 1..=m {
        let r = k as f64 / m as f64;
        for i in 0..6 * k {
            let th = 2.0 * PI * i as f64 / (6 * k) as f64;
            vertices.push([r * th.cos(), r * th.sin()]);
        }
    }
    let mut cells = Vec::new();
    let mut push = |tri: [usize; 3], vs: &[Point]| {
        if cross(vs[tri[0]], vs[tri[1]], vs[tri[2]]) > 0.0 {
            cells.push(tri);
        } else {
            cells.push([tri[0], tri[2], tri[1]]);
        }
    };
    for k in 0..m {
        let (na, nb) = (count(k), count(k + 1));
        let a = |i: usize| start(k) + i % na;
        let b = |j: usize| start(k + 1) + j % nb;
        let (mut i, mut j) = (0, 0);
        while i < na || j < nb {
            // with a single centre vertex the inner ring never advances
            let next_a = if k == 0 { f64::INFINITY } else { (i + 1) as f64 / na as f64 };
            let next_b = (j + 1) as f64 / nb as f64;
            if i < na && k > 0 && (j == nb || next_a < next_b) {
                push([a(i), b(j), a(i + 1)], &vertices);
                i += 1;
            } else {
                push([a(i), b(j), b(j + 1)], &vertices);
                j += 1;
            }
            if k == 0 && j == nb {
                i = na;
            }
        }
    }
    let outer = start(m);
    let edges = (0..6 * m)
        .map(|j| BoundaryEdge { vertices: [outer + j, outer + (j + 1) % (6 * m)], tag: BoundaryTag::Dirichlet })
        .collect();
    Mesh::new(vertices, cells, edges)
}
