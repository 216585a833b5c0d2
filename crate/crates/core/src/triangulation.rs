//! Oriented triangulated pseudo 3-manifolds with shape and level data.
//!
//! A complex is built from tetrahedra with ordered vertices `0..4` and
//! face gluings.  Face `f` of a tetrahedron is the triangle omitting
//! vertex `f`; a gluing identifies two faces by the unique map that
//! preserves the order of the remaining three vertices.  Cell classes
//! (vertices, edges, faces) are the orbits of the induced identifications.
//!
//! Shapes assign to each tetrahedron a triple of pair angles (stored as
//! exact rational multiples of pi) for the opposite-edge pairs
//! `(01|23)`, `(02|13)`, `(03|12)`, summing to pi, together with a real
//! level.  Gauge transformations, edge weights, 3-2 Pachner moves and the
//! homological admissibility test operate on this data.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Vertex pairs of the six edges of a tetrahedron, in lexicographic order.
pub const EDGE_ENDS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Opposite-edge pair index (0: 01|23, 1: 02|13, 2: 03|12) of each edge.
pub const PAIR_OF_EDGE: [usize; 6] = [0, 1, 2, 2, 1, 0];

/// Vertices of face `f` (the triangle omitting vertex `f`), ascending.
pub const FACE_VERTS: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

/// Index into [`EDGE_ENDS`] of the edge with endpoints `{v, w}`, `v != w`.
pub fn edge_index(v: usize, w: usize) -> usize {
    let (a, b) = if v < w { (v, w) } else { (w, v) };
    EDGE_ENDS.iter().position(|&e| e == (a, b)).expect("valid vertex pair")
}

#[derive(Debug, Clone, Error)]
pub enum TriError {
    #[error("face slot (tet {tet}, face {face}) appears in more than one gluing")]
    DuplicateFace { tet: usize, face: usize },
    #[error("gluing references tetrahedron or face out of range")]
    IndexOutOfRange,
    #[error("gluing of (tet {0}, face {1}) to (tet {2}, face {3}) violates the face-sign parity rule")]
    OrientationParity(usize, usize, usize, usize),
    #[error("gluing glues a face to itself")]
    SelfGluedFace,
    #[error("angle triple of tetrahedron {0} does not sum to pi")]
    AngleSum(usize),
    #[error("shape has {got} angle triples, complex has {want} tetrahedra")]
    Dimension { got: usize, want: usize },
    #[error("gauge parameter is nonzero on boundary edge class {0}")]
    BoundaryGauge(usize),
    #[error("edge class {0} is not balanced")]
    NotBalanced(usize),
    #[error("edge class {0} is not shared by exactly three distinct tetrahedra")]
    NotThreeTets(usize),
    #[error("edge class {0} touches the boundary")]
    BoundaryEdge(usize),
    #[error("no vertex ordering of the two replacement tetrahedra is compatible with the outer face gluings")]
    OrderConstraint,
    #[error("move would produce a non-positive angle")]
    NonPositiveAngle,
}

/// Minimal union-find over `0..n`.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    pub fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != c {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }
    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
    /// Renumber classes consecutively; returns (class index per slot, class count).
    pub fn classes(&mut self) -> (Vec<usize>, usize) {
        let n = self.parent.len();
        let mut label = vec![usize::MAX; n];
        let mut ids = Vec::with_capacity(n);
        let mut count = 0;
        for x in 0..n {
            let r = self.find(x);
            if label[r] == usize::MAX {
                label[r] = count;
                count += 1;
            }
            ids.push(label[r]);
        }
        (ids, count)
    }
}

/// One face identification; the vertex map is implied order-preserving.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FaceGluing {
    pub tet: usize,
    pub face: usize,
    pub to_tet: usize,
    pub to_face: usize,
}

/// Combinatorial gluing data of a triangulated pseudo 3-manifold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TetGluingSpec {
    pub tet_count: usize,
    pub gluings: Vec<FaceGluing>,
}

impl TetGluingSpec {
    /// Partner of every face slot `4*tet + face`, or `None` on the boundary.
    /// Validates ranges, disjointness and involutivity.
    pub fn partner_map(&self) -> Result<Vec<Option<(usize, usize)>>, TriError> {
        let mut partner = vec![None; 4 * self.tet_count];
        for g in &self.gluings {
            if g.tet >= self.tet_count || g.to_tet >= self.tet_count || g.face > 3 || g.to_face > 3 {
                return Err(TriError::IndexOutOfRange);
            }
            if (g.tet, g.face) == (g.to_tet, g.to_face) {
                return Err(TriError::SelfGluedFace);
            }
            for &(t, f, u, h) in &[(g.tet, g.face, g.to_tet, g.to_face), (g.to_tet, g.to_face, g.tet, g.face)] {
                let slot = 4 * t + f;
                match partner[slot] {
                    None => partner[slot] = Some((u, h)),
                    Some(p) if p == (u, h) => {}
                    Some(_) => return Err(TriError::DuplicateFace { tet: t, face: f }),
                }
            }
        }
        Ok(partner)
    }
}

/// A built pseudo 3-manifold: gluing data, orientations and cell classes.
#[derive(Debug, Clone)]
pub struct PseudoManifold {
    pub spec: TetGluingSpec,
    /// Orientation sign of each tetrahedron (+1 or -1).
    pub tet_signs: Vec<i8>,
    /// Partner of each face slot `4t+f`.
    pub face_partner: Vec<Option<(usize, usize)>>,
    /// Face class of each face slot.
    pub face_class: Vec<usize>,
    pub face_class_count: usize,
    /// Edge class of each edge slot `6t+e`.
    pub edge_class: Vec<usize>,
    pub edge_class_count: usize,
    /// Vertex class of each vertex slot `4t+v`.
    pub vertex_class: Vec<usize>,
    pub vertex_class_count: usize,
    /// Unglued face slots.
    pub boundary_faces: Vec<(usize, usize)>,
}

impl PseudoManifold {
    /// Build the quotient CW structure from gluing data and orientations.
    pub fn build(spec: TetGluingSpec, orientations: Vec<i8>) -> Result<Self, TriError> {
        if orientations.len() != spec.tet_count || orientations.iter().any(|s| s.abs() != 1) {
            return Err(TriError::Dimension { got: orientations.len(), want: spec.tet_count });
        }
        let partner = spec.partner_map()?;
        // Face signs must be opposite across every gluing:
        // (-1)^f sign(T) = -(-1)^g sign(T').
        for g in &spec.gluings {
            let sa = (if g.face % 2 == 0 { 1 } else { -1 }) * orientations[g.tet] as i32;
            let sb = (if g.to_face % 2 == 0 { 1 } else { -1 }) * orientations[g.to_tet] as i32;
            if sa != -sb {
                return Err(TriError::OrientationParity(g.tet, g.face, g.to_tet, g.to_face));
            }
        }
        let n = spec.tet_count;
        let mut faces = UnionFind::new(4 * n);
        let mut verts = UnionFind::new(4 * n);
        let mut edges = UnionFind::new(6 * n);
        for g in &spec.gluings {
            faces.union(4 * g.tet + g.face, 4 * g.to_tet + g.to_face);
            let va = FACE_VERTS[g.face];
            let vb = FACE_VERTS[g.to_face];
            for k in 0..3 {
                verts.union(4 * g.tet + va[k], 4 * g.to_tet + vb[k]);
            }
            for k in 0..3 {
                for l in (k + 1)..3 {
                    let ea = edge_index(va[k], va[l]);
                    let eb = edge_index(vb[k], vb[l]);
                    edges.union(6 * g.tet + ea, 6 * g.to_tet + eb);
                }
            }
        }
        let (face_class, face_class_count) = faces.classes();
        let (vertex_class, vertex_class_count) = verts.classes();
        let (edge_class, edge_class_count) = edges.classes();
        let boundary_faces = (0..4 * n)
            .filter(|&s| partner[s].is_none())
            .map(|s| (s / 4, s % 4))
            .collect();
        Ok(PseudoManifold {
            spec,
            tet_signs: orientations,
            face_partner: partner,
            face_class,
            face_class_count,
            edge_class,
            edge_class_count,
            vertex_class,
            vertex_class_count,
            boundary_faces,
        })
    }

    pub fn tet_count(&self) -> usize {
        self.spec.tet_count
    }

    /// (vertex, edge, face, tetrahedron) class counts.
    pub fn delta_counts(&self) -> (usize, usize, usize, usize) {
        (self.vertex_class_count, self.edge_class_count, self.face_class_count, self.tet_count())
    }

    /// Sign of a face slot: `(-1)^f sign(T)`.
    pub fn face_sign(&self, tet: usize, face: usize) -> i8 {
        let p = if face % 2 == 0 { 1 } else { -1 };
        p * self.tet_signs[tet]
    }

    /// Boundary faces split by sign.
    pub fn boundary_split(&self) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for &(t, f) in &self.boundary_faces {
            if self.face_sign(t, f) > 0 {
                plus.push((t, f));
            } else {
                minus.push((t, f));
            }
        }
        (plus, minus)
    }

    /// All edge slots `(tet, edge index)` in the given edge class.
    pub fn edge_class_slots(&self, class: usize) -> Vec<(usize, usize)> {
        (0..6 * self.tet_count())
            .filter(|&s| self.edge_class[s] == class)
            .map(|s| (s / 6, s % 6))
            .collect()
    }

    /// An edge class touches the boundary iff one of its slots lies on an
    /// unglued face.
    pub fn is_boundary_edge_class(&self, class: usize) -> bool {
        self.edge_class_slots(class).iter().any(|&(t, e)| {
            let (v, w) = EDGE_ENDS[e];
            (0..4).filter(|&f| f != v && f != w).any(|f| self.face_partner[4 * t + f].is_none())
        })
    }
}

/// Shape data: per tetrahedron the pair-angle triple in units of pi
/// (each triple sums to 1 exactly), plus the level.
#[derive(Debug, Clone, PartialEq)]
pub struct LeveledShape {
    pub angles: Vec<[BigRational; 3]>,
    pub level: BigRational,
}

/// Shorthand for a rational from an integer pair.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl LeveledShape {
    pub fn new(angles: Vec<[BigRational; 3]>, level: BigRational) -> Result<Self, TriError> {
        for (t, a) in angles.iter().enumerate() {
            if &a[0] + &a[1] + &a[2] != BigRational::one() {
                return Err(TriError::AngleSum(t));
            }
        }
        Ok(LeveledShape { angles, level })
    }

    /// Convenience constructor from `(num, den)` pairs.
    pub fn from_pairs(triples: &[[(i64, i64); 3]], level: (i64, i64)) -> Result<Self, TriError> {
        let angles = triples
            .iter()
            .map(|t| [rat(t[0].0, t[0].1), rat(t[1].0, t[1].1), rat(t[2].0, t[2].1)])
            .collect();
        Self::new(angles, rat(level.0, level.1))
    }

    /// Angle (units of pi) at the opposite-edge pair containing edge `e`.
    pub fn angle_of_edge(&self, tet: usize, e: usize) -> &BigRational {
        &self.angles[tet][PAIR_OF_EDGE[e]]
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.angles.iter().all(|a| a.iter().all(|x| x.is_positive()))
    }
}

/// Edge weights: the sum of pair angles over all slots of each edge class,
/// in units of pi (a balanced edge has weight 2).
pub fn weights(x: &PseudoManifold, ls: &LeveledShape) -> Result<Vec<BigRational>, TriError> {
    if ls.angles.len() != x.tet_count() {
        return Err(TriError::Dimension { got: ls.angles.len(), want: x.tet_count() });
    }
    let mut w = vec![BigRational::zero(); x.edge_class_count];
    for t in 0..x.tet_count() {
        for e in 0..6 {
            w[x.edge_class[6 * t + e]] += ls.angle_of_edge(t, e);
        }
    }
    Ok(w)
}

/// The skew-symmetric pair function: 0 across distinct tetrahedra, and on
/// the three opposite-edge pairs of one tetrahedron the cyclic order
/// (01|23) -> (02|13) -> (03|12) taken positively for a positive
/// tetrahedron and reversed for a negative one.
pub fn epsilon_pair(sign: i8, p: usize, q: usize) -> i8 {
    let d = (3 + q - p) % 3;
    let cyc = match d {
        0 => 0,
        1 => 1,
        _ => -1,
    };
    sign * cyc
}

/// Gauge transformation along `g` (one rational per edge class; must vanish
/// on boundary edge classes).  Angles move within each tetrahedron by the
/// pair function against the edge classes; the level shifts by
/// `sum_e g(e) * sum_{slots a over e} (1/3 - alpha(a)/pi)`.
pub fn apply_gauge(
    x: &PseudoManifold,
    ls: &LeveledShape,
    g: &[BigRational],
) -> Result<LeveledShape, TriError> {
    if ls.angles.len() != x.tet_count() || g.len() != x.edge_class_count {
        return Err(TriError::Dimension { got: g.len(), want: x.edge_class_count });
    }
    for (e, ge) in g.iter().enumerate() {
        if !ge.is_zero() && x.is_boundary_edge_class(e) {
            return Err(TriError::BoundaryGauge(e));
        }
    }
    let mut angles = ls.angles.clone();
    for t in 0..x.tet_count() {
        for q in 0..3 {
            let mut shift = BigRational::zero();
            for e in 0..6 {
                let eps = epsilon_pair(x.tet_signs[t], q, PAIR_OF_EDGE[e]);
                if eps != 0 {
                    let term = &g[x.edge_class[6 * t + e]] * BigRational::from(BigInt::from(eps));
                    shift += term;
                }
            }
            angles[t][q] += shift;
        }
    }
    let mut level = ls.level.clone();
    for t in 0..x.tet_count() {
        for e in 0..6 {
            let class = x.edge_class[6 * t + e];
            level += &g[class] * (rat(1, 3) - ls.angle_of_edge(t, e));
        }
    }
    LeveledShape::new(angles, level)
}

/// Everything the 3-2 move needs to know about the three tetrahedra
/// around the central edge, in cyclic walk order.
struct Bipyramid {
    /// (tet, north vertex, south vertex, rim vertex shared with the
    /// previous tet, rim vertex shared with the next tet) per position.
    tets: [(usize, usize, usize, usize, usize); 3],
}

fn bipyramid_around(x: &PseudoManifold, class: usize) -> Result<Bipyramid, TriError> {
    let slots = x.edge_class_slots(class);
    let distinct: std::collections::BTreeSet<usize> = slots.iter().map(|&(t, _)| t).collect();
    if slots.len() != 3 || distinct.len() != 3 {
        return Err(TriError::NotThreeTets(class));
    }
    if x.is_boundary_edge_class(class) {
        return Err(TriError::BoundaryEdge(class));
    }
    // Walk around the edge.  Each step exits through one of the two faces
    // containing the central edge; the rim vertex kept on the exit face is
    // the one shared with the next tetrahedron.
    let (t0, e0) = slots[0];
    let (n0, s0) = EDGE_ENDS[e0];
    let first_prev = (0..4).find(|&v| v != n0 && v != s0).expect("rim");
    // (tet, north, south, prev rim, next rim) per walk position
    let mut order: Vec<(usize, usize, usize, usize, usize)> = Vec::new();
    let mut cur = (t0, n0, s0, first_prev);
    for _ in 0..3 {
        let (t, n, s, prev) = cur;
        let next = (0..4).find(|&v| v != n && v != s && v != prev).expect("rim");
        order.push((t, n, s, prev, next));
        // exit through the face omitting the prev rim (it contains n, s, next)
        let exit_face = prev;
        let (t2, f2) = x.face_partner[4 * t + exit_face].ok_or(TriError::BoundaryEdge(class))?;
        let va = FACE_VERTS[exit_face];
        let vb = FACE_VERTS[f2];
        let map = |v: usize| vb[va.iter().position(|&w| w == v).expect("vertex on face")];
        cur = (t2, map(n), map(s), map(next));
    }
    // The walk must close up: after three steps we are back at the start.
    if cur.0 != t0 || cur.1 != n0 || cur.2 != s0 {
        return Err(TriError::NotThreeTets(class));
    }
    Ok(Bipyramid { tets: [order[0], order[1], order[2]] })
}

/// Result of a 3-2 Pachner move.
pub struct PachnerResult {
    pub complex: PseudoManifold,
    pub shape: LeveledShape,
    /// Old outer face slot -> new face slot, for boundary bookkeeping.
    pub face_map: Vec<((usize, usize), (usize, usize))>,
    /// Old tet index -> new tet index for the untouched tetrahedra.
    pub tet_map: Vec<Option<usize>>,
    /// Each new pair angle is a sum of two old ones: entry `(t, q)` of the
    /// outer index (new tet relative to `complex`, pair) lists the old
    /// `(tet, pair)` slots it sums.
    pub angle_sources: Vec<((usize, usize), [(usize, usize); 2])>,
}

/// The 3-2 Pachner move along a balanced interior edge class shared by
/// exactly three distinct tetrahedra.  The two replacement tetrahedra get
/// the unique weight-preserving angles; their vertex orders are searched
/// so that every surviving gluing stays order-preserving (an error is
/// returned when no ordering works).
pub fn pachner_32(
    x: &PseudoManifold,
    ls: &LeveledShape,
    class: usize,
    require_positive: bool,
) -> Result<PachnerResult, TriError> {
    let w = weights(x, ls)?;
    if w[class] != rat(2, 1) {
        return Err(TriError::NotBalanced(class));
    }
    let bp = bipyramid_around(x, class)?;
    let triple: Vec<usize> = bp.tets.iter().map(|&(t, ..)| t).collect();

    // Angles u_k (north-previous pair) and v_k (north-next pair).
    let mut u = Vec::new();
    let mut v = Vec::new();
    let mut usrc = Vec::new();
    let mut vsrc = Vec::new();
    for &(t, n, _s, prev, next) in &bp.tets {
        u.push(ls.angle_of_edge(t, edge_index(n, prev)).clone());
        v.push(ls.angle_of_edge(t, edge_index(n, next)).clone());
        usrc.push((t, PAIR_OF_EDGE[edge_index(n, prev)]));
        vsrc.push((t, PAIR_OF_EDGE[edge_index(n, next)]));
    }
    // New tet "north" (apex = north pole) has pair angle x_k at the pair of
    // edge {N, w_k}; "south" has y_k at {S, w_k}.  Here w_k is the rim
    // vertex shared by old tets k-1 and k (i.e. prev-rim of position k).
    let xk: Vec<BigRational> = (0..3).map(|k| &u[k] + &v[(k + 2) % 3]).collect();
    let yk: Vec<BigRational> = (0..3).map(|k| &v[k] + &u[(k + 2) % 3]).collect();
    let xsrc: Vec<[(usize, usize); 2]> = (0..3).map(|k| [usrc[k], vsrc[(k + 2) % 3]]).collect();
    let ysrc: Vec<[(usize, usize); 2]> = (0..3).map(|k| [vsrc[k], usrc[(k + 2) % 3]]).collect();
    if require_positive && xk.iter().chain(yk.iter()).any(|a| !a.is_positive()) {
        return Err(TriError::NonPositiveAngle);
    }

    // Abstract vertices of the replacement pair: 0 = pole, 1..=3 = w_1..w_3
    // (w_k as above).  Collect the outer faces of the old triple together
    // with their abstract vertex triple.
    // Outer faces of old tet k: the face omitting the south pole contains
    // {N, w_k, w_{k+1}} -> north tet; the face omitting north contains
    // {S, w_k, w_{k+1}} -> south tet.
    struct Outer {
        old: (usize, usize),
        north_side: bool,
        /// abstract labels (1..=3 for rim, 0 for pole) of the old face
        /// vertices in ascending old-vertex order
        abs: [usize; 3],
    }
    let mut outers: Vec<Outer> = Vec::new();
    for (k, &(t, n, s, prev, next)) in bp.tets.iter().enumerate() {
        let wk = k + 1; // abstract index of prev rim
        let wk1 = (k + 1) % 3 + 1; // abstract index of next rim
        for &(omit, north_side) in &[(s, true), (n, false)] {
            let fv = FACE_VERTS[omit];
            let mut abs = [0usize; 3];
            for (i, &vv) in fv.iter().enumerate() {
                abs[i] = if vv == prev {
                    wk
                } else if vv == next {
                    wk1
                } else {
                    0 // the pole on this face
                };
            }
            outers.push(Outer { old: (t, omit), north_side, abs });
        }
    }

    // Candidate vertex orders: permutation sigma[abstract] = position.
    let perms: Vec<[usize; 4]> = {
        let mut p = Vec::new();
        let mut idx = [0usize; 4];
        fn gen(depth: usize, used: &mut [bool; 4], idx: &mut [usize; 4], out: &mut Vec<[usize; 4]>) {
            if depth == 4 {
                out.push(*idx);
                return;
            }
            for pos in 0..4 {
                if !used[pos] {
                    used[pos] = true;
                    idx[depth] = pos;
                    gen(depth + 1, used, idx, out);
                    used[pos] = false;
                }
            }
        }
        gen(0, &mut [false; 4], &mut idx, &mut p);
        p
    };

    // For a candidate ordering, the new face replacing an outer face is the
    // face omitting the absent abstract vertex; the gluing to the old
    // partner must be order-preserving: sorting the shared vertices by new
    // position must reproduce the old correspondence.
    let outer_new = |sigma: &[usize; 4], o: &Outer| -> ((usize, [usize; 3]), bool) {
        // Which abstract vertex is absent from this face?
        let present: Vec<usize> = o.abs.to_vec();
        let absent = (0..4).find(|a| !present.contains(a)).expect("one absent");
        let face = sigma[absent];
        // New positions of the face vertices in old ascending order.
        let mut pos = [0usize; 3];
        for i in 0..3 {
            pos[i] = sigma[o.abs[i]];
        }
        // Order-preserving iff pos is increasing (old partner correspondence
        // is by ascending order on both sides).
        let ok = pos[0] < pos[1] && pos[1] < pos[2];
        ((face, pos), ok)
    };

    let mut found: Option<([usize; 4], [usize; 4], i8, i8)> = None;
    'search: for sn in &perms {
        // North tet external faces must be order-preserving.
        if !outers.iter().filter(|o| o.north_side).all(|o| outer_new(sn, o).1) {
            continue;
        }
        for ss in &perms {
            if !outers.iter().filter(|o| !o.north_side).all(|o| outer_new(ss, o).1) {
                continue;
            }
            // Shared face: both omit the pole; the identity on w_1..w_3 must
            // be order-preserving for both orderings simultaneously.
            let rank = |sigma: &[usize; 4]| {
                let mut rim: Vec<(usize, usize)> = (1..4).map(|a| (sigma[a], a)).collect();
                rim.sort();
                [rim[0].1, rim[1].1, rim[2].1]
            };
            if rank(sn) != rank(ss) {
                continue;
            }
            // Signs: every new gluing fixes a parity relation.  Collect and
            // solve for (s_north, s_south).
            let mut s_north: Option<i8> = None;
            let mut s_south: Option<i8> = None;
            let mut consistent = true;
            for o in &outers {
                let (t2, f2) = match x.face_partner[4 * o.old.0 + o.old.1] {
                    Some(p) => p,
                    None => continue, // boundary: no parity constraint
                };
                if triple.contains(&t2) {
                    // Glued to another outer face of the triple; handled as
                    // a relation between the two new tets below via both
                    // entries of `outers`; skip half to avoid double work.
                    continue;
                }
                let sigma = if o.north_side { sn } else { ss };
                let ((face, _), _) = outer_new(sigma, o);
                let pf = if face % 2 == 0 { 1i8 } else { -1 };
                let pg = if f2 % 2 == 0 { 1i8 } else { -1 };
                // need pf * s_new = -(pg * sign(t2))
                let s_needed = -pg * x.tet_signs[t2] * pf;
                let slot = if o.north_side { &mut s_north } else { &mut s_south };
                match *slot {
                    None => *slot = Some(s_needed),
                    Some(sv) if sv == s_needed => {}
                    Some(_) => {
                        consistent = false;
                        break;
                    }
                }
            }
            if !consistent {
                continue;
            }
            // Shared north-south face parity: pf(north)*s_n = -pf(south)*s_s.
            let fn_ = sn[0];
            let fs = ss[0];
            let pn = if fn_ % 2 == 0 { 1i8 } else { -1 };
            let pso = if fs % 2 == 0 { 1i8 } else { -1 };
            // Resolve remaining freedom.
            let (s_n, s_s) = match (s_north, s_south) {
                (Some(a), Some(b)) => {
                    if pn * a != -(pso * b) {
                        continue;
                    }
                    (a, b)
                }
                (Some(a), None) => (a, -(pn * a) * pso),
                (None, Some(b)) => (-(pso * b) * pn, b),
                (None, None) => (1, -(pn) * pso),
            };
            // Outer faces glued to each other within the triple: check
            // parity across the new pair.
            for o in &outers {
                if let Some((t2, f2)) = x.face_partner[4 * o.old.0 + o.old.1] {
                    if let Some(o2) = outers.iter().find(|q| q.old == (t2, f2)) {
                        let sig1 = if o.north_side { sn } else { ss };
                        let sig2 = if o2.north_side { sn } else { ss };
                        let ((fa, _), _) = outer_new(sig1, o);
                        let ((fb, _), _) = outer_new(sig2, o2);
                        let pa = if fa % 2 == 0 { 1i8 } else { -1 };
                        let pb = if fb % 2 == 0 { 1i8 } else { -1 };
                        let sa = if o.north_side { s_n } else { s_s };
                        let sb = if o2.north_side { s_n } else { s_s };
                        if pa * sa != -(pb * sb) {
                            consistent = false;
                            break;
                        }
                    }
                }
            }
            if consistent {
                found = Some((*sn, *ss, s_n, s_s));
                break 'search;
            }
        }
    }
    let (sn, ss, s_n, s_s) = found.ok_or(TriError::OrderConstraint)?;

    // Renumber: untouched old tets keep relative order; north = m, south = m+1.
    let mut tet_map = vec![None; x.tet_count()];
    let mut next = 0usize;
    for t in 0..x.tet_count() {
        if !triple.contains(&t) {
            tet_map[t] = Some(next);
            next += 1;
        }
    }
    let (north_id, south_id) = (next, next + 1);

    // New gluing list.
    let mut gluings: Vec<FaceGluing> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for g in &x.spec.gluings {
        let a_in = triple.contains(&g.tet);
        let b_in = triple.contains(&g.to_tet);
        if !a_in && !b_in {
            gluings.push(FaceGluing {
                tet: tet_map[g.tet].unwrap(),
                face: g.face,
                to_tet: tet_map[g.to_tet].unwrap(),
                to_face: g.to_face,
            });
        }
    }
    // Map each outer face slot to its new slot.
    let mut face_map = Vec::new();
    let new_slot = |o: &Outer| -> (usize, usize) {
        let sigma = if o.north_side { &sn } else { &ss };
        let ((face, _), _) = outer_new(sigma, o);
        (if o.north_side { north_id } else { south_id }, face)
    };
    for o in &outers {
        face_map.push((o.old, new_slot(o)));
    }
    // External and intra-triple outer gluings.
    for o in &outers {
        if let Some((t2, f2)) = x.face_partner[4 * o.old.0 + o.old.1] {
            let (nt, nf) = new_slot(o);
            let (pt, pf2) = if triple.contains(&t2) {
                let o2 = outers.iter().find(|q| q.old == (t2, f2)).expect("outer partner");
                new_slot(o2)
            } else {
                (tet_map[t2].unwrap(), f2)
            };
            let key = if (nt, nf) <= (pt, pf2) { (nt, nf, pt, pf2) } else { (pt, pf2, nt, nf) };
            if seen.insert(key) {
                gluings.push(FaceGluing { tet: key.0, face: key.1, to_tet: key.2, to_face: key.3 });
            }
        }
    }
    // Shared pole face.
    gluings.push(FaceGluing { tet: north_id, face: sn[0], to_tet: south_id, to_face: ss[0] });

    let mut signs: Vec<i8> = (0..x.tet_count()).filter(|t| !triple.contains(t)).map(|t| x.tet_signs[t]).collect();
    signs.push(s_n);
    signs.push(s_s);

    let spec = TetGluingSpec { tet_count: next + 2, gluings };
    let complex = PseudoManifold::build(spec, signs)?;

    // Angles for the new tetrahedra: pair containing edge {pole, w_k}.
    let place = |sigma: &[usize; 4], ang: &[BigRational]| -> [BigRational; 3] {
        let mut out = [BigRational::zero(), BigRational::zero(), BigRational::zero()];
        for k in 1..4 {
            let e = edge_index(sigma[0], sigma[k]);
            out[PAIR_OF_EDGE[e]] = ang[k - 1].clone();
        }
        out
    };
    let mut angles: Vec<[BigRational; 3]> = (0..x.tet_count())
        .filter(|t| !triple.contains(t))
        .map(|t| ls.angles[t].clone())
        .collect();
    angles.push(place(&sn, &xk));
    angles.push(place(&ss, &yk));
    let mut angle_sources = Vec::new();
    for (tet_id, (sigma, src)) in [(north_id, (&sn, &xsrc)), (south_id, (&ss, &ysrc))] {
        for k in 1..4 {
            let q = PAIR_OF_EDGE[edge_index(sigma[0], sigma[k])];
            angle_sources.push(((tet_id, q), src[k - 1]));
        }
    }

    // Level shift: (1/12) sum over slots a of the dead edge class of
    // sum_b eps_{p(a), p(b)} alpha(b), all in units of pi.
    let mut shift = BigRational::zero();
    for (t, e) in x.edge_class_slots(class) {
        let pa = PAIR_OF_EDGE[e];
        for e2 in 0..6 {
            let eps = epsilon_pair(x.tet_signs[t], pa, PAIR_OF_EDGE[e2]);
            if eps != 0 {
                shift += ls.angle_of_edge(t, e2) * BigRational::from(BigInt::from(eps));
            }
        }
    }
    let level = &ls.level + shift * rat(1, 12);
    let shape = LeveledShape::new(angles, level)?;
    Ok(PachnerResult { complex, shape, face_map, tet_map, angle_sources })
}

// ---------------------------------------------------------------------------
// Admissibility: homology of the truncated-cell model.
// ---------------------------------------------------------------------------

/// Integer chain complex of the truncated-cell model of `X - vertices`:
/// every tetrahedron is truncated at its corners; 2-cells are hexagon
/// classes (one per face class) and corner triangles, 1-cells are long
/// edge classes and short edge classes, 0-cells are corner-vertex classes.
pub struct TruncatedComplex {
    pub n3: usize,
    pub n2: usize,
    pub n1: usize,
    pub n0: usize,
    /// d3\[col = tet\] = list of (2-cell row, coefficient).
    pub d3: Vec<Vec<(usize, i64)>>,
    pub d2: Vec<Vec<(usize, i64)>>,
    pub d1: Vec<Vec<(usize, i64)>>,
    /// corner triangle 2-cell index of slot (t, v)
    pub tri_cell: Vec<usize>,
    /// short edge class of slot (t, v, m), v != m, else usize::MAX
    pub short_class: Vec<usize>,
    pub short_count: usize,
    /// 0-cell class of slot (t, v, j), v != j, else usize::MAX
    pub corner_class: Vec<usize>,
    pub corner_count: usize,
}

fn pair_slot12(t: usize, a: usize, b: usize) -> usize {
    // index of ordered pair (a, b), a != b, within tet t: 12 per tet
    debug_assert!(a != b);
    let k = 3 * a + if b < a { b } else { b - 1 };
    12 * t + k
}

impl TruncatedComplex {
    pub fn build(x: &PseudoManifold) -> Self {
        let n = x.tet_count();
        // Short edges s(t, v, m): side of corner triangle (t, v) lying in
        // face m.  0-cells (t, v, j): corner of triangle (t, v) on the
        // original edge {v, j}.
        let mut shorts = UnionFind::new(12 * n);
        let mut corners = UnionFind::new(12 * n);
        for g in &x.spec.gluings {
            let va = FACE_VERTS[g.face];
            let vb = FACE_VERTS[g.to_face];
            let map = |v: usize| vb[va.iter().position(|&w| w == v).unwrap()];
            for &v in &va {
                shorts.union(pair_slot12(g.tet, v, g.face), pair_slot12(g.to_tet, map(v), g.to_face));
                for &j in &va {
                    if j != v {
                        corners.union(pair_slot12(g.tet, v, j), pair_slot12(g.to_tet, map(v), map(j)));
                    }
                }
            }
        }
        let (short_class, short_count) = shorts.classes();
        let (corner_class, corner_count) = corners.classes();

        let hex = x.face_class_count;
        let n2 = hex + 4 * n;
        let tri_cell: Vec<usize> = (0..4 * n).map(|s| hex + s).collect();
        let long = x.edge_class_count;
        let n1 = long + short_count;
        let n0 = corner_count;

        // d3: boundary of the truncated tet.
        let mut d3 = Vec::with_capacity(n);
        for t in 0..n {
            let mut col: Vec<(usize, i64)> = Vec::new();
            for f in 0..4 {
                let sgn = if f % 2 == 0 { 1 } else { -1 };
                col.push((x.face_class[4 * t + f], sgn));
            }
            for v in 0..4 {
                let sgn = if v % 2 == 0 { 1 } else { -1 };
                col.push((tri_cell[4 * t + v], -sgn));
            }
            d3.push(merge_terms(col));
        }

        // d2: hexagons (one representative slot per class) then triangles.
        let mut hex_rep: Vec<Option<(usize, usize)>> = vec![None; hex];
        for t in 0..n {
            for f in 0..4 {
                let c = x.face_class[4 * t + f];
                if hex_rep[c].is_none() {
                    hex_rep[c] = Some((t, f));
                }
            }
        }
        let mut d2 = Vec::with_capacity(n2);
        for c in 0..hex {
            let (t, f) = hex_rep[c].unwrap();
            let fv = FACE_VERTS[f];
            let mut col: Vec<(usize, i64)> = Vec::new();
            for (ci, &omit) in fv.iter().enumerate() {
                let sgn = if ci % 2 == 0 { 1i64 } else { -1 };
                // long edge joining the other two face vertices
                let others: Vec<usize> = fv.iter().copied().filter(|&v| v != omit).collect();
                let le = x.edge_class[6 * t + edge_index(others[0], others[1])];
                col.push((le, sgn));
                // short edge of the corner triangle at `omit`, lying in face f
                let se = long + short_class[pair_slot12(t, omit, f)];
                col.push((se, -sgn));
            }
            d2.push(merge_terms(col));
        }
        for t in 0..n {
            for v in 0..4 {
                let js: Vec<usize> = (0..4).filter(|&j| j != v).collect();
                let mut col: Vec<(usize, i64)> = Vec::new();
                for (ci, &j) in js.iter().enumerate() {
                    let sgn = if ci % 2 == 0 { 1i64 } else { -1 };
                    // side of the triangle lying in face j
                    let se = long + short_class[pair_slot12(t, v, j)];
                    col.push((se, sgn));
                }
                d2.push(merge_terms(col));
            }
        }

        // d1: long edges then short edges.
        let mut long_rep: Vec<Option<(usize, usize)>> = vec![None; long];
        for t in 0..n {
            for e in 0..6 {
                let c = x.edge_class[6 * t + e];
                if long_rep[c].is_none() {
                    long_rep[c] = Some((t, e));
                }
            }
        }
        let mut short_rep: Vec<Option<usize>> = vec![None; short_count];
        for s in 0..12 * n {
            let c = short_class[s];
            if short_rep[c].is_none() {
                short_rep[c] = Some(s);
            }
        }
        let mut d1 = Vec::with_capacity(n1);
        for c in 0..long {
            let (t, e) = long_rep[c].unwrap();
            let (i, j) = EDGE_ENDS[e];
            let col = vec![
                (corner_class[pair_slot12(t, j, i)], 1i64),
                (corner_class[pair_slot12(t, i, j)], -1),
            ];
            d1.push(merge_terms(col));
        }
        for c in 0..short_count {
            let s = short_rep[c].unwrap();
            let (t, rem) = (s / 12, s % 12);
            let v = rem / 3;
            let m = {
                let b = rem % 3;
                if b < v { b } else { b + 1 }
            };
            // endpoints: corners of triangle (t, v) on edges {v, j} for the
            // two face-m vertices j != v, canonical direction low -> high.
            let js: Vec<usize> = FACE_VERTS[m].iter().copied().filter(|&j| j != v).collect();
            let (ja, jb) = (js[0], js[1]);
            let col = vec![
                (corner_class[pair_slot12(t, v, jb)], 1i64),
                (corner_class[pair_slot12(t, v, ja)], -1),
            ];
            d1.push(merge_terms(col));
        }

        TruncatedComplex {
            n3: n,
            n2,
            n1,
            n0,
            d3,
            d2,
            d1,
            tri_cell,
            short_class,
            short_count,
            corner_class,
            corner_count,
        }
    }

    fn dense(cols: &[Vec<(usize, i64)>], rows: usize) -> Vec<Vec<BigInt>> {
        let mut m = vec![vec![BigInt::zero(); cols.len()]; rows];
        for (j, col) in cols.iter().enumerate() {
            for &(i, v) in col {
                m[i][j] += BigInt::from(v);
            }
        }
        m
    }

    /// (free rank of H2, torsion invariant factors of H2).
    pub fn h2(&self) -> (usize, Vec<BigInt>) {
        let m3 = Self::dense(&self.d3, self.n2);
        let m2 = Self::dense(&self.d2, self.n1);
        let f3 = smith_normal_form(m3);
        let r3 = f3.iter().filter(|v| !v.is_zero()).count();
        let f2 = smith_normal_form(m2);
        let r2 = f2.iter().filter(|v| !v.is_zero()).count();
        let free = self.n2 - r2 - r3;
        let torsion: Vec<BigInt> = f3.into_iter().filter(|v| v.abs() > BigInt::one()).collect();
        (free, torsion)
    }

    /// (free rank of H1, torsion invariant factors of H1).
    pub fn h1(&self) -> (usize, Vec<BigInt>) {
        let m2 = Self::dense(&self.d2, self.n1);
        let m1 = Self::dense(&self.d1, self.n0);
        let f2 = smith_normal_form(m2);
        let r2 = f2.iter().filter(|v| !v.is_zero()).count();
        let f1 = smith_normal_form(m1);
        let r1 = f1.iter().filter(|v| !v.is_zero()).count();
        let free = self.n1 - r1 - r2;
        let torsion: Vec<BigInt> = f2.into_iter().filter(|v| v.abs() > BigInt::one()).collect();
        (free, torsion)
    }

    /// Check d.d = 0 on both composites (test hook).
    pub fn boundary_squares_to_zero(&self) -> bool {
        let compose = |outer: &[Vec<(usize, i64)>], inner: &[Vec<(usize, i64)>]| -> bool {
            for col in outer {
                let mut acc: std::collections::BTreeMap<usize, i64> = Default::default();
                for &(mid, cv) in col {
                    for &(row, cw) in &inner[mid] {
                        *acc.entry(row).or_insert(0) += cv * cw;
                    }
                }
                if acc.values().any(|&v| v != 0) {
                    return false;
                }
            }
            true
        };
        compose(&self.d3, &self.d2) && compose(&self.d2, &self.d1)
    }
}

fn merge_terms(mut terms: Vec<(usize, i64)>) -> Vec<(usize, i64)> {
    terms.sort_by_key(|&(i, _)| i);
    let mut out: Vec<(usize, i64)> = Vec::new();
    for (i, v) in terms {
        match out.last_mut() {
            Some(last) if last.0 == i => last.1 += v,
            _ => out.push((i, v)),
        }
    }
    out.retain(|&(_, v)| v != 0);
    out
}

/// Smith normal form diagonal of an integer matrix (destructive, naive
/// smallest-pivot reduction; fine at the scales the complexes here reach).
pub fn smith_normal_form(mut m: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let rows = m.len();
    let cols = if rows > 0 { m[0].len() } else { 0 };
    let mut out = Vec::new();
    let mut top = 0usize;
    while top < rows.min(cols) {
        // find smallest nonzero entry in the remaining block
        let mut pivot: Option<(usize, usize)> = None;
        for i in top..rows {
            for j in top..cols {
                if !m[i][j].is_zero()
                    && pivot.map_or(true, |(pi, pj)| m[i][j].abs() < m[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let (pi, pj) = match pivot {
            Some(p) => p,
            None => break,
        };
        m.swap(top, pi);
        for row in m.iter_mut() {
            row.swap(top, pj);
        }
        // eliminate
        let mut clean = true;
        for i in (top + 1)..rows {
            if !m[i][top].is_zero() {
                let q = &m[i][top] / &m[top][top];
                if !q.is_zero() {
                    for j in top..cols {
                        let s = &q * &m[top][j];
                        m[i][j] -= s;
                    }
                }
                if !m[i][top].is_zero() {
                    clean = false;
                }
            }
        }
        for j in (top + 1)..cols {
            if !m[top][j].is_zero() {
                let q = &m[top][j] / &m[top][top];
                if !q.is_zero() {
                    for i in top..rows {
                        let s = &q * &m[i][top];
                        m[i][j] -= s;
                    }
                }
                if !m[top][j].is_zero() {
                    clean = false;
                }
            }
        }
        if !clean {
            continue; // re-pick a smaller pivot in the same block
        }
        out.push(m[top][top].abs());
        top += 1;
    }
    // normalize divisibility chain
    for i in 0..out.len() {
        for j in (i + 1)..out.len() {
            if !out[i].is_zero() && !(&out[j] % &out[i]).is_zero() {
                let g = gcd_big(&out[i], &out[j]);
                let l = (&out[i] * &out[j]) / &g;
                out[i] = g;
                out[j] = l;
            }
        }
    }
    out
}

fn gcd_big(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut a, mut b) = (a.abs(), b.abs());
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

/// Admissibility: `H_2(X - vertices; Z) = 0` in the truncated-cell model.
pub fn admissible(x: &PseudoManifold) -> bool {
    let (free, torsion) = TruncatedComplex::build(x).h2();
    free == 0 && torsion.is_empty()
}

/// Per-component Euler characteristics of the boundary surface of the
/// truncated complex (the links of the original vertices, merged along any
/// original boundary).  Returns a list of (triangle count, chi).
pub fn link_surface_chi(x: &PseudoManifold) -> Vec<(usize, i64)> {
    let tc = TruncatedComplex::build(x);
    let n = x.tet_count();
    // components over corner triangles via shared short edge classes
    let mut uf = UnionFind::new(4 * n);
    let mut owner: Vec<Option<usize>> = vec![None; tc.short_count];
    for t in 0..n {
        for v in 0..4 {
            for m in 0..4 {
                if m != v {
                    let c = tc.short_class[pair_slot12(t, v, m)];
                    match owner[c] {
                        None => owner[c] = Some(4 * t + v),
                        Some(o) => uf.union(o, 4 * t + v),
                    }
                }
            }
        }
    }
    let (comp, count) = uf.classes();
    let mut tris = vec![0usize; count];
    for (_, &c) in comp.iter().enumerate() {
        tris[c] += 1;
    }
    // assign 1-cells and 0-cells to components via any incident triangle
    let mut edge_comp = vec![usize::MAX; tc.short_count];
    let mut vert_comp = vec![usize::MAX; tc.corner_count];
    for t in 0..n {
        for v in 0..4 {
            let k = comp[4 * t + v];
            for m in 0..4 {
                if m != v {
                    edge_comp[tc.short_class[pair_slot12(t, v, m)]] = k;
                    vert_comp[tc.corner_class[pair_slot12(t, v, m)]] = k;
                }
            }
        }
    }
    let mut e = vec![0i64; count];
    let mut vv = vec![0i64; count];
    for &c in edge_comp.iter() {
        if c != usize::MAX {
            e[c] += 1;
        }
    }
    for &c in vert_comp.iter() {
        if c != usize::MAX {
            vv[c] += 1;
        }
    }
    (0..count).map(|k| (tris[k], vv[k] - e[k] + tris[k] as i64)).collect()
}

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

/// Built-in gluing data for the manifolds used throughout the crate.
pub mod fixtures {
    use super::{FaceGluing, TetGluingSpec};

    fn spec(n: usize, list: &[(usize, usize, usize, usize)]) -> TetGluingSpec {
        TetGluingSpec {
            tet_count: n,
            gluings: list
                .iter()
                .map(|&(a, b, c, d)| FaceGluing { tet: a, face: b, to_tet: c, to_face: d })
                .collect(),
        }
    }

    /// Trefoil knot complement: two positive tetrahedra, face i of the
    /// first glued to face 3-i of the second.
    pub fn trefoil() -> (TetGluingSpec, Vec<i8>) {
        (spec(2, &[(0, 0, 1, 3), (0, 1, 1, 2), (0, 2, 1, 1), (0, 3, 1, 0)]), vec![1, 1])
    }

    /// One-vertex one-tetrahedron H-triangulation of (S^3, trefoil).
    pub fn h31() -> (TetGluingSpec, Vec<i8>) {
        (spec(1, &[(0, 0, 0, 3), (0, 1, 0, 2)]), vec![1])
    }

    /// One tetrahedron with a single face identification (faces 0 and 1),
    /// two free faces.
    pub fn one_tet_one_face() -> (TetGluingSpec, Vec<i8>) {
        (spec(1, &[(0, 0, 0, 1)]), vec![1])
    }

    /// Figure-eight knot complement: one positive, one negative tetrahedron.
    pub fn fig8() -> (TetGluingSpec, Vec<i8>) {
        (spec(2, &[(0, 0, 1, 2), (0, 1, 1, 3), (0, 2, 1, 0), (0, 3, 1, 1)]), vec![1, -1])
    }

    /// One-vertex H-triangulation of (S^3, figure-eight): a central
    /// one-face-identified tetrahedron attached to a positive/negative pair.
    pub fn h41() -> (TetGluingSpec, Vec<i8>) {
        (
            spec(
                3,
                &[
                    (0, 0, 0, 1),
                    (0, 2, 1, 1),
                    (0, 3, 2, 3),
                    (1, 0, 2, 2),
                    (1, 2, 2, 0),
                    (1, 3, 2, 1),
                ],
            ),
            vec![1, 1, -1],
        )
    }

    /// 5_2 knot complement: three positive tetrahedra.
    pub fn five_two() -> (TetGluingSpec, Vec<i8>) {
        (
            spec(
                3,
                &[
                    (0, 0, 2, 3),
                    (0, 1, 2, 2),
                    (0, 2, 1, 3),
                    (0, 3, 1, 0),
                    (1, 1, 2, 0),
                    (1, 2, 2, 1),
                ],
            ),
            vec![1, 1, 1],
        )
    }

    /// One-vertex H-triangulation of (S^3, 5_2): negative central
    /// one-face-identified tetrahedron plus three positive ones.
    pub fn h52() -> (TetGluingSpec, Vec<i8>) {
        (
            spec(
                4,
                &[
                    (0, 0, 0, 1),
                    (0, 2, 2, 0),
                    (0, 3, 1, 3),
                    (1, 0, 3, 3),
                    (1, 1, 3, 2),
                    (1, 2, 2, 3),
                    (2, 1, 3, 0),
                    (2, 2, 3, 1),
                ],
            ),
            vec![-1, 1, 1, 1],
        )
    }

    /// Suspension of an n-gon: n tetrahedra sharing one interior edge
    /// (their 01-edge), all outer faces free.
    pub fn sp_n(n: usize) -> (TetGluingSpec, Vec<i8>) {
        assert!(n >= 3, "suspension needs at least three tetrahedra");
        let mut list = Vec::new();
        for k in 0..n.saturating_sub(2) {
            list.push((k, 2, k + 1, 3));
        }
        list.push((n - 2, 2, n - 1, 2));
        list.push((n - 1, 3, 0, 3));
        let mut signs = vec![1i8; n];
        signs[n - 1] = -1;
        (spec(n, &list), signs)
    }

    /// A closed one-vertex two-tetrahedron complex of S^2 x S^1 type:
    /// inadmissible, H_2 = Z.  Found by exhaustive search over closed
    /// two-tetrahedron gluings (see tests) and frozen here.
    pub fn s2xs1() -> (TetGluingSpec, Vec<i8>) {
        (
            spec(2, &[(0, 0, 0, 3), (0, 1, 1, 1), (0, 2, 1, 2), (1, 0, 1, 3)]),
            vec![1, -1],
        )
    }

    /// Fixture lookup by CLI name.
    pub fn by_name(name: &str) -> Option<(TetGluingSpec, Vec<i8>)> {
        match name {
            "3_1_complement" | "trefoil" => Some(trefoil()),
            "h31" => Some(h31()),
            "one_tet_one_face" => Some(one_tet_one_face()),
            "4_1_complement" | "fig8" => Some(fig8()),
            "h41" => Some(h41()),
            "5_2_complement" => Some(five_two()),
            "h52" => Some(h52()),
            "sp_3" => Some(sp_n(3)),
            "sp_4" => Some(sp_n(4)),
            "s2xs1_fixture" => Some(s2xs1()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(fix: (TetGluingSpec, Vec<i8>)) -> PseudoManifold {
        PseudoManifold::build(fix.0, fix.1).expect("fixture builds")
    }

    #[test]
    fn cell_counts_of_fixtures() {
        assert_eq!(build(fixtures::trefoil()).delta_counts(), (1, 2, 4, 2));
        assert_eq!(build(fixtures::fig8()).delta_counts(), (1, 2, 4, 2));
        assert_eq!(build(fixtures::five_two()).delta_counts(), (1, 3, 6, 3));
        assert_eq!(build(fixtures::h31()).delta_counts(), (1, 2, 2, 1));
        assert_eq!(build(fixtures::h41()).delta_counts(), (1, 4, 6, 3));
        assert_eq!(build(fixtures::h52()).delta_counts(), (1, 5, 8, 4));
        let sp3 = build(fixtures::sp_n(3));
        assert_eq!(sp3.boundary_faces.len(), 6);
        assert_eq!(sp3.vertex_class_count, 5);
    }

    #[test]
    fn parity_rule_rejected() {
        // Gluing face 0 to face 2 of two positive tets has equal face signs.
        let spec = TetGluingSpec {
            tet_count: 2,
            gluings: vec![FaceGluing { tet: 0, face: 0, to_tet: 1, to_face: 2 }],
        };
        assert!(matches!(
            PseudoManifold::build(spec, vec![1, 1]),
            Err(TriError::OrientationParity(..))
        ));
    }

    #[test]
    fn duplicate_face_rejected() {
        let spec = TetGluingSpec {
            tet_count: 2,
            gluings: vec![
                FaceGluing { tet: 0, face: 0, to_tet: 1, to_face: 1 },
                FaceGluing { tet: 0, face: 0, to_tet: 1, to_face: 3 },
            ],
        };
        assert!(spec.partner_map().is_err());
    }

    #[test]
    fn epsilon_pair_convention() {
        // cyclic, antisymmetric, sign-reversed for negative tetrahedra
        assert_eq!(epsilon_pair(1, 0, 1), 1);
        assert_eq!(epsilon_pair(1, 1, 2), 1);
        assert_eq!(epsilon_pair(1, 2, 0), 1);
        assert_eq!(epsilon_pair(1, 1, 0), -1);
        assert_eq!(epsilon_pair(1, 0, 0), 0);
        for p in 0..3 {
            for q in 0..3 {
                assert_eq!(epsilon_pair(1, p, q), -epsilon_pair(1, q, p));
                assert_eq!(epsilon_pair(-1, p, q), -epsilon_pair(1, p, q));
            }
        }
    }

    #[test]
    fn trefoil_weights() {
        let x = build(fixtures::trefoil());
        let ls = LeveledShape::from_pairs(
            &[[(1, 2), (1, 3), (1, 6)], [(1, 4), (1, 4), (1, 2)]],
            (0, 1),
        )
        .unwrap();
        let w = weights(&x, &ls).unwrap();
        // one class collects the two third-pair angles, the rest is 4 - that
        let expect = rat(1, 6) + rat(1, 2);
        assert!(w.contains(&expect));
        assert_eq!(&w[0] + &w[1], rat(4, 1));
    }

    #[test]
    fn fig8_weights() {
        let x = build(fixtures::fig8());
        // positive tet (a+, b+, c+), negative tet (a-, b-, c-)
        let ap = rat(1, 5);
        let cp = rat(3, 10);
        let bm = rat(1, 8);
        let cm = rat(1, 4);
        let ls = LeveledShape::new(
            vec![
                [ap.clone(), rat(1, 2), cp.clone()],
                [rat(5, 8), bm.clone(), cm.clone()],
            ],
            rat(0, 1),
        )
        .unwrap();
        let w = weights(&x, &ls).unwrap();
        let expect = rat(2, 1) * &ap + &cp + rat(2, 1) * &bm + &cm;
        assert!(w.contains(&expect), "weights {w:?} expect {expect}");
        assert_eq!(&w[0] + &w[1], rat(4, 1));
    }

    #[test]
    fn h31_weights() {
        let x = build(fixtures::h31());
        let ls = LeveledShape::from_pairs(&[[(1, 2), (1, 3), (1, 6)]], (0, 1)).unwrap();
        let w = weights(&x, &ls).unwrap();
        // the knotted edge carries the third pair angle, the other the rest
        assert!(w.contains(&rat(1, 6)));
        assert_eq!(&w[0] + &w[1], rat(2, 1));
    }

    #[test]
    fn one_tet_one_face_interior_weight() {
        let x = build(fixtures::one_tet_one_face());
        let ls = LeveledShape::from_pairs(&[[(1, 2), (1, 3), (1, 6)]], (0, 1)).unwrap();
        let w = weights(&x, &ls).unwrap();
        let interior: Vec<usize> =
            (0..x.edge_class_count).filter(|&e| !x.is_boundary_edge_class(e)).collect();
        assert_eq!(interior.len(), 1);
        assert_eq!(w[interior[0]], rat(1, 2)); // first pair angle
    }

    #[test]
    fn gauge_preserves_weights_and_shifts_level() {
        let x = build(fixtures::fig8());
        let ls = LeveledShape::from_pairs(
            &[[(2, 5), (1, 5), (2, 5)], [(1, 5), (2, 5), (2, 5)]],
            (1, 3),
        )
        .unwrap();
        let g = vec![rat(1, 7), rat(-2, 9)];
        let ls2 = apply_gauge(&x, &ls, &g).unwrap();
        assert_eq!(weights(&x, &ls).unwrap(), weights(&x, &ls2).unwrap());
        // level shift: sum_e g(e) sum_{slots over e} (1/3 - angle)
        let mut expect = rat(1, 3);
        for t in 0..2 {
            for e in 0..6 {
                expect += &g[x.edge_class[6 * t + e]] * (rat(1, 3) - ls.angle_of_edge(t, e));
            }
        }
        assert_eq!(ls2.level, expect);
        // composing with the inverse gauge restores the shape exactly
        let back = apply_gauge(&x, &ls2, &[-&g[0], -&g[1]]).unwrap();
        assert_eq!(back, ls);
    }

    #[test]
    fn gauge_rejected_on_boundary_edge() {
        let x = build(fixtures::sp_n(3));
        let boundary = (0..x.edge_class_count)
            .find(|&e| x.is_boundary_edge_class(e))
            .expect("has boundary edges");
        let mut g = vec![rat(0, 1); x.edge_class_count];
        g[boundary] = rat(1, 5);
        let ls = LeveledShape::from_pairs(
            &[[(1, 3), (1, 3), (1, 3)]; 3].iter().copied().collect::<Vec<_>>(),
            (0, 1),
        )
        .unwrap();
        assert!(matches!(apply_gauge(&x, &ls, &g), Err(TriError::BoundaryGauge(_))));
    }

    #[test]
    fn pachner_32_symmetric_suspension() {
        let x = build(fixtures::sp_n(3));
        let ls = LeveledShape::from_pairs(
            &[[(2, 3), (1, 6), (1, 6)]; 3].iter().copied().collect::<Vec<_>>(),
            (0, 1),
        )
        .unwrap();
        let central = x.edge_class[0]; // edge (0,1) of tet 0
        let w = weights(&x, &ls).unwrap();
        assert_eq!(w[central], rat(2, 1));
        let res = pachner_32(&x, &ls, central, true).expect("move applies");
        assert_eq!(res.complex.tet_count(), 2);
        assert_eq!(res.complex.boundary_faces.len(), 6);
        // symmetric input: both new tetrahedra are equilateral
        for t in 0..2 {
            for q in 0..3 {
                assert_eq!(res.shape.angles[t][q], rat(1, 3));
            }
        }
        // equal pair angles around the dead edge leave the level unchanged
        assert_eq!(res.shape.level, rat(0, 1));
        // boundary edge weights carried across via the face map
        let w2 = weights(&res.complex, &res.shape).unwrap();
        for &((t, f), (t2, f2)) in &res.face_map {
            let va = FACE_VERTS[f];
            let vb = FACE_VERTS[f2];
            for i in 0..3 {
                for j in (i + 1)..3 {
                    let e_old = x.edge_class[6 * t + edge_index(va[i], va[j])];
                    let e_new = res.complex.edge_class[6 * t2 + edge_index(vb[i], vb[j])];
                    if x.is_boundary_edge_class(e_old) {
                        assert_eq!(w[e_old], w2[e_new], "weight mismatch across move");
                    }
                }
            }
        }
    }

    #[test]
    fn pachner_32_asymmetric_weights_preserved() {
        let x = build(fixtures::sp_n(3));
        let ls = LeveledShape::from_pairs(
            &[
                [(3, 5), (1, 5), (1, 5)],
                [(7, 10), (1, 5), (1, 10)],
                [(7, 10), (1, 10), (1, 5)],
            ],
            (1, 2),
        )
        .unwrap();
        let central = x.edge_class[0];
        let w = weights(&x, &ls).unwrap();
        assert_eq!(w[central], rat(2, 1));
        let res = pachner_32(&x, &ls, central, true).expect("move applies");
        let w2 = weights(&res.complex, &res.shape).unwrap();
        for &((t, f), (t2, f2)) in &res.face_map {
            let va = FACE_VERTS[f];
            let vb = FACE_VERTS[f2];
            for i in 0..3 {
                for j in (i + 1)..3 {
                    let e_old = x.edge_class[6 * t + edge_index(va[i], va[j])];
                    let e_new = res.complex.edge_class[6 * t2 + edge_index(vb[i], vb[j])];
                    if x.is_boundary_edge_class(e_old) {
                        assert_eq!(w[e_old], w2[e_new]);
                    }
                }
            }
        }
        // angle sums stay normalized and positive
        assert!(res.shape.is_strictly_positive());
    }

    #[test]
    fn pachner_32_rejects_unbalanced() {
        let x = build(fixtures::sp_n(3));
        let ls = LeveledShape::from_pairs(
            &[[(1, 3), (1, 3), (1, 3)]; 3].iter().copied().collect::<Vec<_>>(),
            (0, 1),
        )
        .unwrap();
        let central = x.edge_class[0];
        assert!(matches!(pachner_32(&x, &ls, central, true), Err(TriError::NotBalanced(_))));
    }

    #[test]
    fn boundary_maps_square_to_zero() {
        for fix in [
            fixtures::trefoil(),
            fixtures::fig8(),
            fixtures::five_two(),
            fixtures::h31(),
            fixtures::h41(),
            fixtures::h52(),
            fixtures::one_tet_one_face(),
            fixtures::sp_n(3),
            fixtures::sp_n(5),
            fixtures::s2xs1(),
        ] {
            let x = build(fix);
            assert!(TruncatedComplex::build(&x).boundary_squares_to_zero());
        }
    }

    #[test]
    fn admissibility_verdicts() {
        assert!(admissible(&build(fixtures::trefoil())));
        assert!(admissible(&build(fixtures::fig8())));
        assert!(admissible(&build(fixtures::five_two())));
        assert!(admissible(&build(fixtures::h31())));
        assert!(admissible(&build(fixtures::h41())));
        assert!(admissible(&build(fixtures::h52())));
        let bad = build(fixtures::s2xs1());
        assert!(!admissible(&bad));
        let (free, torsion) = TruncatedComplex::build(&bad).h2();
        assert_eq!((free, torsion.len()), (1, 0));
    }

    #[test]
    fn knot_complement_links_are_tori() {
        for fix in [fixtures::trefoil(), fixtures::fig8(), fixtures::five_two()] {
            let links = link_surface_chi(&build(fix));
            assert_eq!(links.len(), 1);
            assert_eq!(links[0].1, 0);
        }
        // H-triangulations and the closed fixture have sphere links
        for fix in [fixtures::h31(), fixtures::h41(), fixtures::h52(), fixtures::s2xs1()] {
            for (_, chi) in link_surface_chi(&build(fix)) {
                assert_eq!(chi, 2);
            }
        }
    }

    #[test]
    fn smith_normal_form_basics() {
        let m: Vec<Vec<BigInt>> = vec![
            vec![BigInt::from(2), BigInt::from(4), BigInt::from(4)],
            vec![BigInt::from(-6), BigInt::from(6), BigInt::from(12)],
            vec![BigInt::from(10), BigInt::from(4), BigInt::from(16)],
        ];
        let f = smith_normal_form(m);
        assert_eq!(f, vec![BigInt::from(2), BigInt::from(2), BigInt::from(156)]);
    }
}
