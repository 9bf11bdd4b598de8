//! The subsystem toric code on the open-boundary cubic lattice.
//!
//! The lattice is described by its cubic picture: qubits sit on edges of a
//! box of cubes, cubes are red or blue in a checkerboard, and the lattice
//! vertices are green or yellow. Each qubit is an octahedron whose six
//! corners are its two endpoint vertices (one G, one Y) and the four cubes
//! around the edge (two R, two B, antipodal pairs of equal color).
//!
//! Outside the box six boundary vertices close the lattice up:
//! front/rear are B, left/right are R, top is G and bottom is Y. Cube slots
//! outside the box on the front and rear become virtual red cubes or the
//! front/rear B vertex; on the left and right they become virtual blue cubes
//! or the left/right R vertex. Top-layer G vertices merge into the top
//! vertex, bottom-layer Y vertices into the bottom vertex, and every top Y
//! (bottom G) vertex carries one extra qubit joining it to the top (bottom)
//! vertex.
//!
//! X-type gauge generators are attached to RG and RY pairs, Z-type ones to
//! BG and BY pairs; the support is the set of octahedra containing both.
//! Stabilizers are attached to interior R and B vertices.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{self, Basis, BinMatrix, BitVec, Echelon};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Color {
    R,
    B,
    G,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    Front,
    Rear,
    Left,
    Right,
    Top,
    Bottom,
}

impl Side {
    pub fn color(self) -> Color {
        match self {
            Side::Front | Side::Rear => Color::B,
            Side::Left | Side::Right => Color::R,
            Side::Top => Color::G,
            Side::Bottom => Color::Y,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PauliKind {
    X,
    Z,
}

/// Support of an X- or Z-type Pauli operator over the qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliSupport {
    pub kind: PauliKind,
    pub bits: BitVec,
}

impl PauliSupport {
    pub fn new(kind: PauliKind, bits: BitVec) -> Self {
        assert_eq!(bits.basis(), Basis::Qubits);
        PauliSupport { kind, bits }
    }

    pub fn zero(kind: PauliKind, n: usize) -> Self {
        PauliSupport { kind, bits: BitVec::zeros(Basis::Qubits, n) }
    }

    pub fn weight(&self) -> usize {
        self.bits.weight()
    }

    /// True iff the two operators anticommute (only meaningful for X vs Z).
    pub fn anticommutes(&self, other: &PauliSupport) -> bool {
        self.kind != other.kind && self.bits.dot(&other.bits)
    }
}

/// A primal lattice vertex: a cube (R/B), a cubic-lattice vertex (G/Y), or
/// one of the six boundary vertices (no coordinate).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub color: Color,
    pub coord: Option<[i32; 3]>,
    pub boundary: Option<Side>,
}

impl Vertex {
    pub fn is_boundary(&self) -> bool {
        self.boundary.is_some()
    }
}

/// One qubit = one octahedron.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Qubit {
    /// Doubled coordinate of the edge midpoint.
    pub coord: [i32; 3],
    pub red: [usize; 2],
    pub blue: [usize; 2],
    pub green: usize,
    pub yellow: usize,
}

impl Qubit {
    pub fn corners(&self) -> [usize; 6] {
        [self.red[0], self.red[1], self.blue[0], self.blue[1], self.green, self.yellow]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaugeGenerator {
    /// The R (X-type) or B (Z-type) vertex.
    pub cell: usize,
    /// The G or Y vertex.
    pub partner: usize,
    /// Color of the partner, i.e. the RG/RY or BG/BY class.
    pub class: Color,
    pub support: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stabilizer {
    pub cell: usize,
    pub support: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphVertex {
    /// Index into [`SubsystemCode::vertices`].
    pub lattice: usize,
    pub color: Color,
    pub boundary: bool,
}

/// Undirected multigraph with boundary flags. Edges keep both endpoints; an
/// edge touching a boundary vertex acts, for relative boundaries, as an edge
/// with its single interior endpoint.
#[derive(Clone, Debug)]
pub struct Graph {
    pub vertices: Vec<GraphVertex>,
    pub edges: Vec<[usize; 2]>,
    adjacency: Vec<Vec<(u32, u32)>>,
    interior: Vec<usize>,
    interior_index: Vec<Option<usize>>,
    by_lattice: BTreeMap<usize, usize>,
}

impl Graph {
    pub fn new(vertices: Vec<GraphVertex>, edges: Vec<[usize; 2]>) -> Self {
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for (e, &[u, v]) in edges.iter().enumerate() {
            adjacency[u].push((v as u32, e as u32));
            if u != v {
                adjacency[v].push((u as u32, e as u32));
            }
        }
        for a in adjacency.iter_mut() {
            a.sort_unstable();
        }
        let mut interior = Vec::new();
        let mut interior_index = vec![None; vertices.len()];
        for (i, v) in vertices.iter().enumerate() {
            if !v.boundary {
                interior_index[i] = Some(interior.len());
                interior.push(i);
            }
        }
        let by_lattice = vertices.iter().enumerate().map(|(i, v)| (v.lattice, i)).collect();
        Graph { vertices, edges, adjacency, interior, interior_index, by_lattice }
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.vertices[v].boundary
    }

    /// Neighbors as `(vertex, edge)` pairs sorted by vertex then edge.
    pub fn neighbors(&self, v: usize) -> &[(u32, u32)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Interior vertices in increasing order; position = syndrome index.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn interior_index(&self, v: usize) -> Option<usize> {
        self.interior_index[v]
    }

    pub fn vertex_of_lattice(&self, lattice: usize) -> Option<usize> {
        self.by_lattice.get(&lattice).copied()
    }

    /// Interior endpoints of an edge (one or two).
    pub fn interior_endpoints(&self, e: usize) -> impl Iterator<Item = usize> + '_ {
        let [u, v] = self.edges[e];
        let second = if u == v { None } else { Some(v) };
        std::iter::once(u).chain(second).filter(move |&x| !self.vertices[x].boundary)
    }

    /// Relative boundary of an edge set, indexed by interior position.
    pub fn relative_boundary(&self, edges: &BitVec, basis: Basis) -> BitVec {
        let mut out = BitVec::zeros(basis, self.interior.len());
        for e in edges.ones() {
            let [u, v] = self.edges[e];
            if u == v {
                continue;
            }
            for x in [u, v] {
                if let Some(i) = self.interior_index[x] {
                    out.flip(i);
                }
            }
        }
        out
    }
}

/// Box dimensions (cubes along x, y, z) for linear size `l`.
///
/// Even sizes use `l × l × (l+1)`, odd sizes `(l+1) × l × l`. Both keep the
/// front–rear extent at `l` cubes so the X-type string logical has weight
/// `l+1`, and both give a front face whose boundary degree sum is
/// `4l² + 6l + 2`.
pub fn box_dims(l: usize) -> [usize; 3] {
    if l % 2 == 0 {
        [l, l, l + 1]
    } else {
        [l + 1, l, l]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Cell([i32; 3]),
    Bd(Side),
}

struct Builder {
    a: i32,
    b: i32,
    c: i32,
}

impl Builder {
    fn cube_red(i: i32, j: i32, k: i32) -> bool {
        (i + j + k).rem_euclid(2) == 0
    }

    fn vertex_green(i: i32, j: i32, k: i32) -> bool {
        (i + j + k).rem_euclid(2) == 1
    }

    fn cube(i: i32, j: i32, k: i32) -> Key {
        Key::Cell([2 * i + 3, 2 * j + 3, 2 * k + 3])
    }

    fn slot(&self, i: i32, j: i32, k: i32) -> (Key, Color) {
        debug_assert!(k >= 0 && k < self.c);
        let ox = i < 0 || i >= self.a;
        let oy = j < 0 || j >= self.b;
        let red = Self::cube_red(i, j, k);
        let col = if red { Color::R } else { Color::B };
        let lr = if i < 0 { Side::Left } else { Side::Right };
        let fr = if j < 0 { Side::Front } else { Side::Rear };
        let key = match (ox, oy, red) {
            (false, false, _) => Self::cube(i, j, k),
            (false, true, true) => Self::cube(i, j, k),
            (false, true, false) => Key::Bd(fr),
            (true, false, true) => Key::Bd(lr),
            (true, false, false) => Self::cube(i, j, k),
            (true, true, true) => Key::Bd(lr),
            (true, true, false) => Key::Bd(fr),
        };
        (key, col)
    }

    fn vertex(&self, i: i32, j: i32, k: i32) -> (Key, Color) {
        let green = Self::vertex_green(i, j, k);
        if k == self.c && green {
            return (Key::Bd(Side::Top), Color::G);
        }
        if k == 0 && !green {
            return (Key::Bd(Side::Bottom), Color::Y);
        }
        (Key::Cell([2 * i + 2, 2 * j + 2, 2 * k + 2]), if green { Color::G } else { Color::Y })
    }

    /// Octahedra as (coord, four cube slots, two endpoints).
    fn octahedra(&self) -> Vec<([i32; 3], [(Key, Color); 6])> {
        let (a, b, c) = (self.a, self.b, self.c);
        let mut out = Vec::new();
        let v = |i, j, k| self.vertex(i, j, k);
        let top = (Key::Bd(Side::Top), Color::G);
        let bottom = (Key::Bd(Side::Bottom), Color::Y);
        let mut push = |coord: [i32; 3], slots: [(i32, i32, i32); 4], e0: (Key, Color), e1: (Key, Color)| {
            let s = slots.map(|(i, j, k)| self.slot(i, j, k));
            out.push((coord, [s[0], s[1], s[2], s[3], e0, e1]));
        };
        for i in 0..a {
            for j in 0..=b {
                for k in 1..c {
                    push(
                        [2 * i + 3, 2 * j + 2, 2 * k + 2],
                        [(i, j - 1, k - 1), (i, j, k - 1), (i, j - 1, k), (i, j, k)],
                        v(i, j, k),
                        v(i + 1, j, k),
                    );
                }
            }
        }
        for i in 0..=a {
            for j in 0..b {
                for k in 1..c {
                    push(
                        [2 * i + 2, 2 * j + 3, 2 * k + 2],
                        [(i - 1, j, k - 1), (i, j, k - 1), (i - 1, j, k), (i, j, k)],
                        v(i, j, k),
                        v(i, j + 1, k),
                    );
                }
            }
        }
        for i in 0..=a {
            for j in 0..=b {
                let around = |k: i32| [(i - 1, j - 1, k), (i, j - 1, k), (i - 1, j, k), (i, j, k)];
                for k in 0..c {
                    push([2 * i + 2, 2 * j + 2, 2 * k + 3], around(k), v(i, j, k), v(i, j, k + 1));
                }
                if !Self::vertex_green(i, j, c) {
                    push([2 * i + 2, 2 * j + 2, 2 * c + 3], around(c - 1), v(i, j, c), top);
                }
                if Self::vertex_green(i, j, 0) {
                    push([2 * i + 2, 2 * j + 2, 1], around(0), v(i, j, 0), bottom);
                }
            }
        }
        out
    }
}

/// The full code on the lattice for one linear size.
#[derive(Clone, Debug)]
pub struct SubsystemCode {
    pub l: usize,
    pub dims: [usize; 3],
    pub vertices: Vec<Vertex>,
    pub qubits: Vec<Qubit>,
    pub x_gauge: Vec<GaugeGenerator>,
    pub z_gauge: Vec<GaugeGenerator>,
    /// One per interior R vertex, in vertex order.
    pub x_stab: Vec<Stabilizer>,
    /// One per interior B vertex, in vertex order; aligned with the interior
    /// vertices of `qubit_graph`.
    pub z_stab: Vec<Stabilizer>,
    /// B, G and Y vertices; one edge per Z-type gauge generator.
    pub meas_graph: Graph,
    /// B vertices; one edge per qubit joining its two B corners.
    pub qubit_graph: Graph,
    /// String-like dressed X logical running front to rear.
    pub logical_x: PauliSupport,
    /// String-like dressed Z logical running left to right.
    pub logical_z: PauliSupport,
    /// Bare X logical (commutes with every Z-type gauge generator).
    pub bare_logical_x: PauliSupport,
    /// Bare Z logical (commutes with every X-type gauge generator).
    pub bare_logical_z: PauliSupport,
}

/// Builds the code for linear size `l ≥ 1`.
pub fn build_code(l: usize) -> Result<SubsystemCode> {
    if l == 0 {
        return Err(Error::Usage("linear size L must be at least 1".into()));
    }
    let dims = box_dims(l);
    let bld = Builder { a: dims[0] as i32, b: dims[1] as i32, c: dims[2] as i32 };
    let mut raw = bld.octahedra();
    raw.sort_by_key(|(coord, _)| *coord);

    let mut keys: BTreeMap<Key, Color> = BTreeMap::new();
    for (_, corners) in &raw {
        for &(k, col) in corners {
            if let Some(prev) = keys.insert(k, col) {
                if prev != col {
                    return Err(Error::Invariant(format!("vertex {k:?} colored {prev:?} and {col:?}")));
                }
            }
        }
    }
    let ids: BTreeMap<Key, usize> = keys.keys().enumerate().map(|(i, &k)| (k, i)).collect();
    let vertices: Vec<Vertex> = keys
        .iter()
        .map(|(&k, &color)| match k {
            Key::Cell(c) => Vertex { color, coord: Some(c), boundary: None },
            Key::Bd(s) => Vertex { color, coord: None, boundary: Some(s) },
        })
        .collect();

    let mut qubits = Vec::with_capacity(raw.len());
    for (coord, corners) in &raw {
        let mut red = Vec::new();
        let mut blue = Vec::new();
        let mut green = None;
        let mut yellow = None;
        for &(k, col) in corners {
            let id = ids[&k];
            match col {
                Color::R => red.push(id),
                Color::B => blue.push(id),
                Color::G => green = Some(id),
                Color::Y => yellow = Some(id),
            }
        }
        let mut all: Vec<usize> = corners.iter().map(|(k, _)| ids[k]).collect();
        all.sort_unstable();
        all.dedup();
        if red.len() != 2 || blue.len() != 2 || green.is_none() || yellow.is_none() || all.len() != 6 {
            return Err(Error::Invariant(format!("octahedron at {coord:?} is not antipodally colored")));
        }
        red.sort_unstable();
        blue.sort_unstable();
        qubits.push(Qubit {
            coord: *coord,
            red: [red[0], red[1]],
            blue: [blue[0], blue[1]],
            green: green.unwrap(),
            yellow: yellow.unwrap(),
        });
    }
    let n = qubits.len();

    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); vertices.len()];
    for (q, qb) in qubits.iter().enumerate() {
        for v in qb.corners() {
            incident[v].push(q);
        }
    }

    let gauges = |cell_color: Color| -> Vec<GaugeGenerator> {
        let mut out = Vec::new();
        for (u, vu) in vertices.iter().enumerate() {
            if vu.color != cell_color {
                continue;
            }
            let mut by_partner: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for &q in &incident[u] {
                let qb = &qubits[q];
                for w in [qb.green, qb.yellow] {
                    by_partner.entry(w).or_default().push(q);
                }
            }
            for (w, support) in by_partner {
                if vu.is_boundary() && vertices[w].is_boundary() {
                    continue;
                }
                out.push(GaugeGenerator { cell: u, partner: w, class: vertices[w].color, support });
            }
        }
        out
    };
    let x_gauge = gauges(Color::R);
    let z_gauge = gauges(Color::B);
    let stabs = |color: Color| -> Vec<Stabilizer> {
        vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| v.color == color && !v.is_boundary())
            .map(|(u, _)| Stabilizer { cell: u, support: incident[u].clone() })
            .collect()
    };
    let x_stab = stabs(Color::R);
    let z_stab = stabs(Color::B);

    let gv = |i: usize| GraphVertex { lattice: i, color: vertices[i].color, boundary: vertices[i].is_boundary() };
    let qverts: Vec<GraphVertex> =
        (0..vertices.len()).filter(|&i| vertices[i].color == Color::B).map(gv).collect();
    let qpos: BTreeMap<usize, usize> = qverts.iter().enumerate().map(|(i, v)| (v.lattice, i)).collect();
    let qedges: Vec<[usize; 2]> = qubits.iter().map(|q| [qpos[&q.blue[0]], qpos[&q.blue[1]]]).collect();
    let qubit_graph = Graph::new(qverts, qedges);

    let mverts: Vec<GraphVertex> =
        (0..vertices.len()).filter(|&i| vertices[i].color != Color::R).map(gv).collect();
    let mpos: BTreeMap<usize, usize> = mverts.iter().enumerate().map(|(i, v)| (v.lattice, i)).collect();
    let medges: Vec<[usize; 2]> = z_gauge.iter().map(|g| [mpos[&g.cell], mpos[&g.partner]]).collect();
    let meas_graph = Graph::new(mverts, medges);

    let mid = |extent: usize| (extent / 2) as i32;
    let (i0, j0, k0) = (mid(dims[0]), mid(dims[1]), mid(dims[2]));
    let qindex: BTreeMap<[i32; 3], usize> = qubits.iter().enumerate().map(|(i, q)| (q.coord, i)).collect();
    let string = |coords: Vec<[i32; 3]>| -> Result<BitVec> {
        let mut v = BitVec::zeros(Basis::Qubits, n);
        for c in coords {
            let q = qindex.get(&c).ok_or_else(|| Error::Invariant(format!("no qubit at {c:?}")))?;
            v.set(*q, true);
        }
        Ok(v)
    };
    let logical_x = PauliSupport::new(
        PauliKind::X,
        string((0..=dims[1] as i32).map(|j| [2 * i0 + 2, 2 * j + 2, 2 * k0 + 3]).collect())?,
    );
    let logical_z = PauliSupport::new(
        PauliKind::Z,
        string((0..=dims[0] as i32).map(|i| [2 * i + 2, 2 * j0 + 2, 2 * k0 + 3]).collect())?,
    );

    let mut code = SubsystemCode {
        l,
        dims,
        vertices,
        qubits,
        x_gauge,
        z_gauge,
        x_stab,
        z_stab,
        meas_graph,
        qubit_graph,
        bare_logical_x: PauliSupport::zero(PauliKind::X, n),
        bare_logical_z: PauliSupport::zero(PauliKind::Z, n),
        logical_x,
        logical_z,
    };
    code.check_structure()?;
    code.bare_logical_z = code.find_bare(PauliKind::Z)?;
    code.bare_logical_x = code.find_bare(PauliKind::X)?;
    Ok(code)
}

fn rows_of<'a>(sets: impl Iterator<Item = &'a Vec<usize>>, row_basis: Basis, n: usize) -> BinMatrix {
    BinMatrix::from_sparse_rows(row_basis, Basis::Qubits, n, sets.map(|s| s.iter().copied()))
}

impl SubsystemCode {
    pub fn n(&self) -> usize {
        self.qubits.len()
    }

    /// Code distance implied by the construction.
    pub fn d(&self) -> usize {
        self.l + 1
    }

    pub fn x_gauge_matrix(&self) -> BinMatrix {
        rows_of(self.x_gauge.iter().map(|g| &g.support), Basis::XGauge, self.n())
    }

    pub fn z_gauge_matrix(&self) -> BinMatrix {
        rows_of(self.z_gauge.iter().map(|g| &g.support), Basis::Meas, self.n())
    }

    pub fn x_stab_matrix(&self) -> BinMatrix {
        rows_of(self.x_stab.iter().map(|s| &s.support), Basis::Generic, self.n())
    }

    pub fn z_stab_matrix(&self) -> BinMatrix {
        rows_of(self.z_stab.iter().map(|s| &s.support), Basis::Stabilizers, self.n())
    }

    fn support_bits(&self, s: &[usize]) -> BitVec {
        BitVec::from_indices(Basis::Qubits, self.n(), s.iter().copied())
    }

    /// Cheap structural checks run on every build: generator weights, the
    /// two-way stabilizer decomposition, and the logical strings.
    fn check_structure(&self) -> Result<()> {
        for g in self.x_gauge.iter().chain(&self.z_gauge) {
            if g.support.is_empty() || g.support.len() > 4 {
                return Err(Error::Invariant(format!("gauge generator of weight {}", g.support.len())));
            }
        }
        for (stabs, gauges) in [(&self.x_stab, &self.x_gauge), (&self.z_stab, &self.z_gauge)] {
            let mut by_cell: BTreeMap<usize, [BitVec; 2]> = BTreeMap::new();
            for g in gauges.iter() {
                let e = by_cell
                    .entry(g.cell)
                    .or_insert_with(|| [BitVec::zeros(Basis::Qubits, self.n()), BitVec::zeros(Basis::Qubits, self.n())]);
                let slot = if g.class == Color::G { 0 } else { 1 };
                e[slot].xor_assign(&self.support_bits(&g.support));
            }
            for s in stabs.iter() {
                let target = self.support_bits(&s.support);
                let ways = by_cell.get(&s.cell).ok_or_else(|| Error::Invariant("stabilizer without gauges".into()))?;
                if ways[0] != target || ways[1] != target {
                    return Err(Error::Invariant(format!("stabilizer at vertex {} is not a product both ways", s.cell)));
                }
            }
        }
        let bs = self.qubit_graph.relative_boundary(&self.logical_x.bits, Basis::Stabilizers);
        if !bs.is_zero() {
            return Err(Error::Invariant("X string has a nonzero syndrome".into()));
        }
        for s in &self.x_stab {
            if self.support_bits(&s.support).dot(&self.logical_z.bits) {
                return Err(Error::Invariant("Z string has a nonzero syndrome".into()));
            }
        }
        Ok(())
    }

    /// A bare logical of the given type: commutes with every gauge generator
    /// of the opposite type and anticommutes with the dressed string of the
    /// opposite type.
    fn find_bare(&self, kind: PauliKind) -> Result<PauliSupport> {
        let (gauge, partner) = match kind {
            PauliKind::Z => (self.x_gauge_matrix(), &self.logical_x),
            PauliKind::X => (self.z_gauge_matrix(), &self.logical_z),
        };
        for v in gf2::nullspace(&gauge) {
            let v = v.relabel(Basis::Qubits);
            if v.dot(&partner.bits) {
                return Ok(PauliSupport::new(kind, v));
            }
        }
        Err(Error::Invariant(format!("no bare {kind:?} logical anticommutes with the dressed string")))
    }

    /// Whether the given vertex is the center of a full-size bulk cube.
    pub fn is_bulk_cube(&self, v: usize) -> bool {
        let Some(c) = self.vertices[v].coord else { return false };
        let inside = |x: i32, n: usize| x >= 3 && x <= 2 * n as i32 + 1;
        c.iter().all(|x| x % 2 != 0)
            && inside(c[0], self.dims[0])
            && inside(c[1], self.dims[1])
            && c[2] >= 5
            && c[2] <= 2 * self.dims[2] as i32 - 1
    }
}

/// `(N, K, D_upper)`: `K` from GF(2) ranks of the gauge and stabilizer
/// generator matrices, `D_upper` from the stored string logicals.
pub fn code_parameters(code: &SubsystemCode) -> (usize, usize, usize) {
    let n = code.n();
    let log_g = gf2::rank(&code.x_gauge_matrix()) + gf2::rank(&code.z_gauge_matrix());
    let log_s = gf2::rank(&code.x_stab_matrix()) + gf2::rank(&code.z_stab_matrix());
    let twice_k = 2 * n as i64 - (log_g + log_s) as i64;
    assert!(twice_k >= 0 && twice_k % 2 == 0, "inconsistent ranks: 2K = {twice_k}");
    let d_upper = code.logical_x.weight().min(code.logical_z.weight());
    (n, (twice_k / 2) as usize, d_upper)
}

/// `(Δ_L, Δ_qub, Σ_qub)`.
pub fn graph_constants(code: &SubsystemCode) -> (usize, usize, usize) {
    let qg = &code.qubit_graph;
    let mg = &code.meas_graph;
    let delta_qub = qg.interior().iter().map(|&v| qg.degree(v)).max().unwrap_or(0);
    let sigma_qub = (0..qg.n_vertices()).filter(|&v| qg.is_boundary(v)).map(|v| qg.degree(v)).sum();
    let mut delta_l = 0;
    for &v in mg.interior() {
        let lat = mg.vertices[v].lattice;
        let q = qg.vertex_of_lattice(lat).map(|u| qg.degree(u)).unwrap_or(0);
        delta_l = delta_l.max(mg.degree(v) + q);
    }
    (delta_l, delta_qub, sigma_qub)
}

/// Dressed string logical of Z type (left to right).
pub fn logical_z_representative(code: &SubsystemCode) -> PauliSupport {
    code.logical_z.clone()
}

/// Minimum weight of a dressed logical of either type, by enumeration in
/// order of weight. Refuses sizes above `L = 2`.
pub fn distance_exhaustive(code: &SubsystemCode) -> Result<usize> {
    if code.l > 2 {
        return Err(Error::Size(format!("exhaustive distance needs L <= 2, got {}", code.l)));
    }
    let n = code.n();
    let cases = [
        (code.z_stab_matrix(), Echelon::new(&code.x_gauge_matrix(), false)),
        (code.x_stab_matrix(), Echelon::new(&code.z_gauge_matrix(), false)),
    ];
    let cols: Vec<Vec<BitVec>> = cases.iter().map(|(s, _)| s.transpose().rows().to_vec()).collect();
    for w in 1..=n {
        for (case, (_, gauge)) in cases.iter().enumerate() {
            let zero = BitVec::zeros(cols[case][0].basis(), cols[case][0].len());
            let mut chosen = Vec::with_capacity(w);
            if search(&cols[case], gauge, n, w, 0, &zero, &mut chosen)? {
                return Ok(w);
            }
        }
    }
    Err(Error::Invariant("no logical operator found".into()))
}

fn search(
    cols: &[BitVec],
    gauge: &Echelon,
    n: usize,
    left: usize,
    start: usize,
    syn: &BitVec,
    chosen: &mut Vec<usize>,
) -> Result<bool> {
    if left == 0 {
        if !syn.is_zero() {
            return Ok(false);
        }
        let v = BitVec::from_indices(Basis::Qubits, n, chosen.iter().copied());
        return Ok(!gauge.contains(&v)?);
    }
    for q in start..=(n - left) {
        let s = syn.xor(&cols[q]);
        chosen.push(q);
        let hit = search(cols, gauge, n, left - 1, q + 1, &s, chosen)?;
        chosen.pop();
        if hit {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Serialize, Deserialize)]
pub struct CodeExport {
    pub schema: String,
    pub l: usize,
    pub dims: [usize; 3],
    pub n: usize,
    pub vertices: Vec<Vertex>,
    pub qubits: Vec<Qubit>,
    pub x_gauge: Vec<GaugeGenerator>,
    pub z_gauge: Vec<GaugeGenerator>,
    pub x_stab: Vec<Stabilizer>,
    pub z_stab: Vec<Stabilizer>,
    pub meas_graph: GraphExport,
    pub qubit_graph: GraphExport,
    pub logical_x: Vec<usize>,
    pub logical_z: Vec<usize>,
    pub bare_logical_x: Vec<usize>,
    pub bare_logical_z: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
pub struct GraphExport {
    pub vertices: Vec<GraphVertex>,
    pub edges: Vec<[usize; 2]>,
}

pub const CODE_SCHEMA: &str = "stc-code/1";

impl SubsystemCode {
    pub fn export(&self) -> CodeExport {
        let g = |g: &Graph| GraphExport { vertices: g.vertices.clone(), edges: g.edges.clone() };
        CodeExport {
            schema: CODE_SCHEMA.to_string(),
            l: self.l,
            dims: self.dims,
            n: self.n(),
            vertices: self.vertices.clone(),
            qubits: self.qubits.clone(),
            x_gauge: self.x_gauge.clone(),
            z_gauge: self.z_gauge.clone(),
            x_stab: self.x_stab.clone(),
            z_stab: self.z_stab.clone(),
            meas_graph: g(&self.meas_graph),
            qubit_graph: g(&self.qubit_graph),
            logical_x: self.logical_x.bits.ones().collect(),
            logical_z: self.logical_z.bits.ones().collect(),
            bare_logical_x: self.bare_logical_x.bits.ones().collect(),
            bare_logical_z: self.bare_logical_z.bits.ones().collect(),
        }
    }
}
