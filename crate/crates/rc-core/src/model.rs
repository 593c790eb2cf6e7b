//! Core graph model: complete bipartite shapes, edge orientations, directed
//! reachability, avoidance events, and the three vertex placements.
//!
//! Conventions pinned here and relied on by every engine:
//!
//! * The edge between X_i and Y_j carries flag `(i, j)`; flag true means the
//!   edge is directed X_i -> Y_j, false means Y_j -> X_i.
//! * Enumeration index bit `i*n + j` (row-major) sets flag `(i, j)`, giving a
//!   bijection between `[0, 2^(m*n))` and orientations.
//! * `reaches(u, u)` is true (empty path).

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Clone, Copy, Debug, Eq, Hash, PartialEq, serde::Serialize)]
pub enum Side {
    X,
    Y,
}

/// A vertex of K_{m,n}: side plus index within its class.
#[derive(Clone, Copy, Debug, Eq, Hash, PartialEq)]
pub struct Vertex {
    pub side: Side,
    pub index: u32,
}

impl Vertex {
    pub fn x(index: u32) -> Self {
        Vertex { side: Side::X, index }
    }

    pub fn y(index: u32) -> Self {
        Vertex { side: Side::Y, index }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::X => write!(f, "X{}", self.index),
            Side::Y => write!(f, "Y{}", self.index),
        }
    }
}

#[derive(Debug, Error, Eq, PartialEq)]
pub enum ModelError {
    #[error("both vertex classes must be non-empty (got m={m}, n={n})")]
    EmptyClass { m: u32, n: u32 },
    #[error("vertex {vertex} out of range for K_{{{m},{n}}}")]
    VertexOutOfRange { vertex: String, m: u32, n: u32 },
    #[error("orientation index {index} out of range for {edges} edges")]
    IndexOutOfRange { index: u64, edges: u64 },
    #[error("u64 orientation indices require m*n <= 63 (got {edges} edges)")]
    IndexWidth { edges: u64 },
    #[error("an avoidance event needs between 1 and 3 atoms (got {count})")]
    AtomCount { count: usize },
    #[error("atom source and target must differ (got {vertex})")]
    SelfLoop { vertex: String },
    #[error("duplicate atom ({src}, {dst})")]
    DuplicateAtom { src: String, dst: String },
    #[error("placement {placement} needs {requirement} (got m={m}, n={n})")]
    PlacementTooSmall { placement: &'static str, requirement: &'static str, m: u32, n: u32 },
    #[error("relabeling must be a permutation of the class indices")]
    BadPermutation,
}

/// Class sizes (m, n) of K_{m,n}, both at least 1.
#[derive(Clone, Copy, Debug, Eq, Hash, PartialEq, serde::Serialize)]
pub struct GraphShape {
    m: u32,
    n: u32,
}

impl GraphShape {
    pub fn new(m: u32, n: u32) -> Result<Self, ModelError> {
        if m == 0 || n == 0 {
            return Err(ModelError::EmptyClass { m, n });
        }
        Ok(GraphShape { m, n })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn edges(&self) -> u64 {
        self.m as u64 * self.n as u64
    }

    pub fn contains(&self, v: Vertex) -> bool {
        match v.side {
            Side::X => v.index < self.m,
            Side::Y => v.index < self.n,
        }
    }

    fn check_vertex(&self, v: Vertex) -> Result<(), ModelError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(ModelError::VertexOutOfRange { vertex: v.to_string(), m: self.m, n: self.n })
        }
    }
}

impl fmt::Display for GraphShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "K_{{{},{}}}", self.m, self.n)
    }
}

#[derive(Clone, Copy, Debug, Eq, PartialEq)]
pub enum Direction {
    Out,
    In,
}

/// A full orientation of K_{m,n}: one direction flag per edge.
///
/// Rows are bit-packed per X vertex (`words` u64 words each), so lookups and
/// whole-orientation transforms stay cheap even for Monte Carlo shapes.
#[derive(Clone, Debug, Eq, PartialEq)]
pub struct Orientation {
    shape: GraphShape,
    words: usize,
    rows: Vec<u64>,
}

impl Orientation {
    /// All-false orientation (every edge directed Y -> X).
    pub fn all_toward_x(shape: GraphShape) -> Self {
        let words = (shape.n as usize).div_ceil(64);
        Orientation { shape, words, rows: vec![0; shape.m as usize * words] }
    }

    /// Decodes an enumeration index: bit `i*n + j` sets flag `(i, j)`.
    pub fn from_index(shape: GraphShape, index: u64) -> Result<Self, ModelError> {
        let edges = shape.edges();
        if edges > 63 {
            return Err(ModelError::IndexWidth { edges });
        }
        if index >= 1u64 << edges {
            return Err(ModelError::IndexOutOfRange { index, edges });
        }
        let mut o = Self::all_toward_x(shape);
        for i in 0..shape.m {
            for j in 0..shape.n {
                if index >> (i as u64 * shape.n as u64 + j as u64) & 1 == 1 {
                    o.set_flag(i, j, true);
                }
            }
        }
        Ok(o)
    }

    /// Inverse of [`from_index`](Self::from_index).
    pub fn to_index(&self) -> Result<u64, ModelError> {
        let edges = self.shape.edges();
        if edges > 63 {
            return Err(ModelError::IndexWidth { edges });
        }
        let mut index = 0u64;
        for i in 0..self.shape.m {
            for j in 0..self.shape.n {
                if self.flag(i, j) {
                    index |= 1u64 << (i as u64 * self.shape.n as u64 + j as u64);
                }
            }
        }
        Ok(index)
    }

    pub fn from_fn(shape: GraphShape, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut o = Self::all_toward_x(shape);
        for i in 0..shape.m {
            for j in 0..shape.n {
                if f(i, j) {
                    o.set_flag(i, j, true);
                }
            }
        }
        o
    }

    pub fn shape(&self) -> GraphShape {
        self.shape
    }

    /// True iff the edge between X_i and Y_j points X -> Y.
    pub fn flag(&self, i: u32, j: u32) -> bool {
        debug_assert!(i < self.shape.m && j < self.shape.n);
        let w = self.words * i as usize + j as usize / 64;
        self.rows[w] >> (j % 64) & 1 == 1
    }

    fn set_flag(&mut self, i: u32, j: u32, value: bool) {
        let w = self.words * i as usize + j as usize / 64;
        if value {
            self.rows[w] |= 1u64 << (j % 64);
        } else {
            self.rows[w] &= !(1u64 << (j % 64));
        }
    }

    /// Out- or in-neighbourhood of `v`, as vertices of the opposite class in
    /// index order.
    pub fn neighborhood(&self, v: Vertex, dir: Direction) -> Vec<Vertex> {
        debug_assert!(self.shape.contains(v));
        let want_flag = match (v.side, dir) {
            (Side::X, Direction::Out) | (Side::Y, Direction::In) => true,
            (Side::X, Direction::In) | (Side::Y, Direction::Out) => false,
        };
        match v.side {
            Side::X => (0..self.shape.n)
                .filter(|&j| self.flag(v.index, j) == want_flag)
                .map(Vertex::y)
                .collect(),
            Side::Y => (0..self.shape.m)
                .filter(|&i| self.flag(i, v.index) == want_flag)
                .map(Vertex::x)
                .collect(),
        }
    }

    /// Directed reachability along the orientation; `reaches(u, u)` is true.
    pub fn reaches(&self, from: Vertex, to: Vertex) -> bool {
        debug_assert!(self.shape.contains(from) && self.shape.contains(to));
        if from == to {
            return true;
        }
        let mut seen_x = vec![false; self.shape.m as usize];
        let mut seen_y = vec![false; self.shape.n as usize];
        match from.side {
            Side::X => seen_x[from.index as usize] = true,
            Side::Y => seen_y[from.index as usize] = true,
        }
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            for w in self.neighborhood(v, Direction::Out) {
                if w == to {
                    return true;
                }
                let seen = match w.side {
                    Side::X => &mut seen_x[w.index as usize],
                    Side::Y => &mut seen_y[w.index as usize],
                };
                if !*seen {
                    *seen = true;
                    queue.push_back(w);
                }
            }
        }
        false
    }

    /// Flips every edge.
    pub fn reverse(&self) -> Self {
        Orientation::from_fn(self.shape, |i, j| !self.flag(i, j))
    }

    /// Applies class-preserving vertex permutations: X_i of the result plays
    /// the role X_{x_perm\[i\]} played, likewise for Y.
    pub fn relabel(&self, x_perm: &[u32], y_perm: &[u32]) -> Result<Self, ModelError> {
        if !is_permutation(x_perm, self.shape.m) || !is_permutation(y_perm, self.shape.n) {
            return Err(ModelError::BadPermutation);
        }
        Ok(Orientation::from_fn(self.shape, |i, j| {
            self.flag(x_perm[i as usize], y_perm[j as usize])
        }))
    }
}

fn is_permutation(perm: &[u32], len: u32) -> bool {
    if perm.len() != len as usize {
        return false;
    }
    let mut seen = vec![false; len as usize];
    for &p in perm {
        if p >= len || seen[p as usize] {
            return false;
        }
        seen[p as usize] = true;
    }
    true
}

/// Conjunction of up to three pairwise-distinct avoidance atoms `{u -/-> v}`.
#[derive(Clone, Debug, Eq, PartialEq)]
pub struct AvoidanceEvent {
    atoms: Vec<(Vertex, Vertex)>,
}

impl AvoidanceEvent {
    pub fn new(shape: GraphShape, atoms: Vec<(Vertex, Vertex)>) -> Result<Self, ModelError> {
        if atoms.is_empty() || atoms.len() > 3 {
            return Err(ModelError::AtomCount { count: atoms.len() });
        }
        for (idx, &(src, dst)) in atoms.iter().enumerate() {
            shape.check_vertex(src)?;
            shape.check_vertex(dst)?;
            if src == dst {
                return Err(ModelError::SelfLoop { vertex: src.to_string() });
            }
            if atoms[..idx].contains(&(src, dst)) {
                return Err(ModelError::DuplicateAtom { src: src.to_string(), dst: dst.to_string() });
            }
        }
        Ok(AvoidanceEvent { atoms })
    }

    pub fn atoms(&self) -> &[(Vertex, Vertex)] {
        &self.atoms
    }

    /// True iff every atom's source fails to reach its target.
    pub fn holds(&self, o: &Orientation) -> bool {
        self.atoms.iter().all(|&(src, dst)| !o.reaches(src, dst))
    }
}

/// Which class the ordered triple (x, y, z) lives in.
#[derive(Clone, Copy, Debug, Eq, Hash, PartialEq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlacementKind {
    /// x, y, z all in X (needs m >= 3).
    AllInX,
    /// x, y in X and z in Y (needs m >= 2).
    Xxy,
    /// x, z in X and y in Y (needs m >= 2).
    Xyx,
}

impl PlacementKind {
    pub const ALL: [PlacementKind; 3] = [PlacementKind::AllInX, PlacementKind::Xxy, PlacementKind::Xyx];

    pub fn as_str(self) -> &'static str {
        match self {
            PlacementKind::AllInX => "all-x",
            PlacementKind::Xxy => "xxy",
            PlacementKind::Xyx => "xyx",
        }
    }
}

impl fmt::Display for PlacementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlacementKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all-x" => Ok(PlacementKind::AllInX),
            "xxy" => Ok(PlacementKind::Xxy),
            "xyx" => Ok(PlacementKind::Xyx),
            other => Err(format!("unknown placement {other:?} (expected all-x, xxy or xyx)")),
        }
    }
}

/// A placement kind instantiated on a shape, with its canonical vertices.
#[derive(Clone, Copy, Debug, Eq, PartialEq)]
pub struct Placement {
    pub kind: PlacementKind,
    pub x: Vertex,
    pub y: Vertex,
    pub z: Vertex,
}

impl Placement {
    pub fn new(kind: PlacementKind, shape: GraphShape) -> Result<Self, ModelError> {
        let too_small = |requirement| ModelError::PlacementTooSmall {
            placement: kind.as_str(),
            requirement,
            m: shape.m,
            n: shape.n,
        };
        match kind {
            PlacementKind::AllInX => {
                if shape.m < 3 {
                    return Err(too_small("m >= 3"));
                }
                Ok(Placement { kind, x: Vertex::x(0), y: Vertex::x(1), z: Vertex::x(2) })
            }
            PlacementKind::Xxy => {
                if shape.m < 2 {
                    return Err(too_small("m >= 2"));
                }
                Ok(Placement { kind, x: Vertex::x(0), y: Vertex::x(1), z: Vertex::y(0) })
            }
            PlacementKind::Xyx => {
                if shape.m < 2 {
                    return Err(too_small("m >= 2"));
                }
                Ok(Placement { kind, x: Vertex::x(0), y: Vertex::y(0), z: Vertex::x(1) })
            }
        }
    }

    /// The avoidance events (Ac, Bc, joint) for this placement, where
    /// Ac = {x -/-> y}, Bc = {y -/-> z} and joint is their conjunction.
    pub fn events(&self, shape: GraphShape) -> Result<(AvoidanceEvent, AvoidanceEvent, AvoidanceEvent), ModelError> {
        let ac = AvoidanceEvent::new(shape, vec![(self.x, self.y)])?;
        let bc = AvoidanceEvent::new(shape, vec![(self.y, self.z)])?;
        let joint = AvoidanceEvent::new(shape, vec![(self.x, self.y), (self.y, self.z)])?;
        Ok((ac, bc, joint))
    }
}

/// Builds the placement and its three events in one call.
pub fn placement_events(
    shape: GraphShape,
    kind: PlacementKind,
) -> Result<(AvoidanceEvent, AvoidanceEvent, AvoidanceEvent), ModelError> {
    Placement::new(kind, shape)?.events(shape)
}

/// Regime of the aspect ratio beta = lim m/n along a sweep.
#[derive(Clone, Copy, Debug, Eq, Hash, PartialEq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaClass {
    LessThanOne,
    EqualOne,
    GreaterThanOne,
}

impl BetaClass {
    pub const ALL: [BetaClass; 3] = [BetaClass::LessThanOne, BetaClass::EqualOne, BetaClass::GreaterThanOne];

    /// Classifies the exact ratio num/den.
    pub fn of_ratio(num: u64, den: u64) -> Self {
        match num.cmp(&den) {
            std::cmp::Ordering::Less => BetaClass::LessThanOne,
            std::cmp::Ordering::Equal => BetaClass::EqualOne,
            std::cmp::Ordering::Greater => BetaClass::GreaterThanOne,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BetaClass::LessThanOne => "beta<1",
            BetaClass::EqualOne => "beta=1",
            BetaClass::GreaterThanOne => "beta>1",
        }
    }
}

impl fmt::Display for BetaClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
