//! Exact rational symplectic structure on shape variables.
//!
//! Each tetrahedron contributes three pair angles summing to pi, hence an
//! affine plane with coordinates (first pair, second pair).  The bracket
//! of two angle slots within one tetrahedron is the cyclic pair function
//! of [`crate::triangulation::epsilon_pair`]; distinct tetrahedra commute.
//! Edge-weight functions generate the gauge action as Hamiltonian flows;
//! everything here verifies those statements by exact rational linear
//! algebra, with no tolerances.

use crate::triangulation::{
    epsilon_pair, pachner_32, LeveledShape, PseudoManifold, TriError, PAIR_OF_EDGE,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// An affine function of the angle slots `(tet, pair)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearFunctional {
    pub coefficients: BTreeMap<(usize, usize), BigRational>,
    pub constant: BigRational,
}

impl LinearFunctional {
    pub fn slot(tet: usize, pair: usize) -> Self {
        let mut coefficients = BTreeMap::new();
        coefficients.insert((tet, pair), BigRational::one());
        LinearFunctional { coefficients, constant: BigRational::zero() }
    }

    pub fn add_slot(&mut self, tet: usize, pair: usize, c: BigRational) {
        let entry = self.coefficients.entry((tet, pair)).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coefficients.remove(&(tet, pair));
        }
    }

    /// The weight function of an edge class: the sum of the pair-angle
    /// slots lying over it.
    pub fn edge_weight(x: &PseudoManifold, class: usize) -> Self {
        let mut f = LinearFunctional::default();
        for (t, e) in x.edge_class_slots(class) {
            f.add_slot(t, PAIR_OF_EDGE[e], BigRational::one());
        }
        f
    }

    pub fn evaluate(&self, ls: &LeveledShape) -> BigRational {
        let mut v = self.constant.clone();
        for (&(t, q), c) in &self.coefficients {
            v += c * &ls.angles[t][q];
        }
        v
    }
}

/// The antisymmetric bracket matrix on angle slots, block diagonal per
/// tetrahedron with the signed cyclic 3x3 block.
#[derive(Debug, Clone)]
pub struct BracketMatrix {
    pub tet_signs: Vec<i8>,
}

impl BracketMatrix {
    pub fn of(x: &PseudoManifold) -> Self {
        BracketMatrix { tet_signs: x.tet_signs.clone() }
    }

    pub fn entry(&self, a: (usize, usize), b: (usize, usize)) -> i8 {
        if a.0 != b.0 {
            0
        } else {
            epsilon_pair(self.tet_signs[a.0], a.1, b.1)
        }
    }
}

/// Bilinear extension of the slot bracket to affine functionals.
pub fn poisson_bracket(u: &LinearFunctional, v: &LinearFunctional, x: &PseudoManifold) -> BigRational {
    let eps = BracketMatrix::of(x);
    let mut acc = BigRational::zero();
    for (&a, ca) in &u.coefficients {
        for (&b, cb) in &v.coefficients {
            let e = eps.entry(a, b);
            if e != 0 {
                acc += ca * cb * BigRational::from(BigInt::from(e));
            }
        }
    }
    acc
}

/// Reduced chart: slot `(t, q)` for `q < 2` maps to coordinate `2t + q`;
/// the third pair angle is `1 - first - second` (in units of pi).
/// Returns the covector of an affine functional in the reduced chart.
pub fn reduced_covector(f: &LinearFunctional, n: usize) -> Vec<BigRational> {
    let mut v = vec![BigRational::zero(); 2 * n];
    for (&(t, q), c) in &f.coefficients {
        match q {
            0 => v[2 * t] += c,
            1 => v[2 * t + 1] += c,
            _ => {
                v[2 * t] -= c;
                v[2 * t + 1] -= c;
            }
        }
    }
    v
}

/// The gauge vector field of an edge class, in the reduced chart: the
/// derivative of every angle slot under a unit gauge parameter on the
/// class, i.e. slot `(t, p)` moves by `sum_{slots b of e in t} eps_{p, b}`.
pub fn gauge_field(x: &PseudoManifold, class: usize) -> Vec<BigRational> {
    let n = x.tet_count();
    let mut v = vec![BigRational::zero(); 2 * n];
    for (t, e) in x.edge_class_slots(class) {
        let pb = PAIR_OF_EDGE[e];
        for p in 0..2 {
            let eps = epsilon_pair(x.tet_signs[t], p, pb);
            if eps != 0 {
                v[2 * t + p] += BigRational::from(BigInt::from(eps));
            }
        }
    }
    v
}

/// Contraction of a reduced tangent vector with the symplectic form (the
/// inverse of the per-tetrahedron bracket block): the covector
/// `w -> omega(v, w)`.
pub fn contract_symplectic(x: &PseudoManifold, v: &[BigRational]) -> Vec<BigRational> {
    // bracket block is s*[[0,1],[-1,0]]; its inverse is s*[[0,-1],[1,0]];
    // the contraction covector of v is v^T * Omega, i.e. per tetrahedron
    // s * (v_1, -v_0).
    let n = x.tet_count();
    let mut out = vec![BigRational::zero(); 2 * n];
    for t in 0..n {
        let s = BigRational::from(BigInt::from(x.tet_signs[t]));
        out[2 * t] = &s * &v[2 * t + 1];
        out[2 * t + 1] = -(&s * &v[2 * t]);
    }
    out
}

/// Per-edge verification that the gauge field is the Hamiltonian flow of
/// minus the weight function: `iota_{X_e} omega = -d omega_X(e)`.
#[derive(Debug, Clone)]
pub struct MomentMapReport {
    pub violations: Vec<usize>,
}

pub fn check_moment_map(x: &PseudoManifold) -> MomentMapReport {
    let n = x.tet_count();
    let mut violations = Vec::new();
    for e in 0..x.edge_class_count {
        let xe = gauge_field(x, e);
        let lhs = contract_symplectic(x, &xe);
        let dw = reduced_covector(&LinearFunctional::edge_weight(x, e), n);
        let rhs: Vec<BigRational> = dw.iter().map(|c| -c).collect();
        if lhs != rhs {
            violations.push(e);
        }
    }
    MomentMapReport { violations }
}

/// Rank of a rational matrix (rows of equal length) by Gaussian elimination.
pub fn rank(rows: &[Vec<BigRational>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let pivot = (rank..m.len()).find(|&r| !m[r][c].is_zero());
        let p = match pivot {
            Some(p) => p,
            None => continue,
        };
        m.swap(rank, p);
        let inv = m[rank][c].recip();
        for j in c..cols {
            m[rank][j] = &m[rank][j] * &inv;
        }
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for j in c..cols {
                    let s = &f * &m[rank][j];
                    m[r][j] -= s;
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Dimensions of the shape space fibration:
/// (total, gauge orbit, reduced, weight fiber).  The orbit dimension is
/// the rank of the gauge fields of the interior edges; the fiber dimension
/// subtracts additionally the rank of the interior weight differentials.
pub fn reduced_dims(x: &PseudoManifold) -> (usize, usize, usize, usize) {
    let n = x.tet_count();
    let interior: Vec<usize> =
        (0..x.edge_class_count).filter(|&e| !x.is_boundary_edge_class(e)).collect();
    let g: Vec<Vec<BigRational>> = interior.iter().map(|&e| gauge_field(x, e)).collect();
    let w: Vec<Vec<BigRational>> = interior
        .iter()
        .map(|&e| reduced_covector(&LinearFunctional::edge_weight(x, e), n))
        .collect();
    let rg = rank(&g);
    let mut gw = g;
    gw.extend(w);
    let rgw = rank(&gw);
    (2 * n, rg, 2 * n - rg, 2 * n - rgw)
}

/// Report of the Poisson properties of a 3-2 move.
#[derive(Debug, Clone)]
pub struct PachnerPoissonReport {
    /// The dead edge's gauge field is annihilated by the transfer map.
    pub central_gauge_killed: bool,
    /// Brackets of the transferred reduced coordinates match the new
    /// complex's brackets up to the gauge directions (exact test on
    /// covectors annihilating the new gauge fields).
    pub intertwines_reduced_brackets: bool,
    /// The same comparison without quotienting (recorded for information).
    pub intertwines_on_the_nose: bool,
    /// Pushed-forward interior weight functionals still Poisson-commute.
    pub weights_commute: bool,
    /// Old gauge fields push forward into the span of new gauge fields.
    pub gauge_to_gauge: bool,
}

impl PachnerPoissonReport {
    pub fn all_hold(&self) -> bool {
        self.central_gauge_killed
            && self.intertwines_reduced_brackets
            && self.weights_commute
            && self.gauge_to_gauge
    }
}

/// Exact verification that the angle-transfer map of the 3-2 move along
/// `class` respects the reduced Poisson structure.
pub fn pachner_poisson_check(
    x: &PseudoManifold,
    ls: &LeveledShape,
    class: usize,
) -> Result<PachnerPoissonReport, TriError> {
    let res = pachner_32(x, ls, class, false)?;
    let y = &res.complex;
    let (n_old, n_new) = (x.tet_count(), y.tet_count());

    // Transfer matrix A: reduced new coordinate -> affine functional on old
    // slots -> reduced old covector... as a linear map of tangent vectors we
    // need the Jacobian: new reduced coordinate (t', q') as a function of
    // old reduced coordinates.
    let mut new_coord_func: Vec<LinearFunctional> = Vec::new();
    for t2 in 0..n_new {
        for q2 in 0..2 {
            let mut f = LinearFunctional::default();
            if let Some(told) = res.tet_map.iter().position(|&m| m == Some(t2)) {
                f.add_slot(told, q2, BigRational::one());
            } else {
                let (_, srcs) = res
                    .angle_sources
                    .iter()
                    .find(|&&((tt, qq), _)| tt == t2 && qq == q2)
                    .expect("source recorded for every new pair");
                for &(t, q) in srcs {
                    f.add_slot(t, q, BigRational::one());
                }
            }
            new_coord_func.push(f);
        }
    }
    let a: Vec<Vec<BigRational>> =
        new_coord_func.iter().map(|f| reduced_covector(f, n_old)).collect();

    // 1. The dead edge's gauge direction is annihilated.
    let xc = gauge_field(x, class);
    let central_gauge_killed = a
        .iter()
        .all(|row| row.iter().zip(&xc).map(|(r, v)| r * v).sum::<BigRational>().is_zero());

    // 2. Bracket intertwining: B_old[i][j] = {f_i, f_j} under the old
    // bracket must agree with the new complex's slot brackets, exactly on
    // the quotient by the new gauge directions.
    let dim_new = 2 * n_new;
    let mut b_old = vec![vec![BigRational::zero(); dim_new]; dim_new];
    let mut b_new = vec![vec![BigRational::zero(); dim_new]; dim_new];
    let eps_new = BracketMatrix::of(y);
    for i in 0..dim_new {
        for j in 0..dim_new {
            b_old[i][j] = poisson_bracket(&new_coord_func[i], &new_coord_func[j], x);
            b_new[i][j] = BigRational::from(BigInt::from(
                eps_new.entry((i / 2, i % 2), (j / 2, j % 2)),
            ));
        }
    }
    let intertwines_on_the_nose = b_old == b_new;
    // Quotient test: D = B_old - B_new must vanish on covectors that kill
    // the new gauge fields; equivalently each row/column of D lies in the
    // span of the new gauge fields.
    let new_gauge: Vec<Vec<BigRational>> = (0..y.edge_class_count)
        .filter(|&e| !y.is_boundary_edge_class(e))
        .map(|e| gauge_field(y, e))
        .collect();
    let base_rank = rank(&new_gauge);
    let in_gauge_span = |v: Vec<BigRational>| -> bool {
        if v.iter().all(|c| c.is_zero()) {
            return true;
        }
        let mut rows = new_gauge.clone();
        rows.push(v);
        rank(&rows) == base_rank
    };
    let mut intertwines_reduced_brackets = true;
    for i in 0..dim_new {
        let row: Vec<BigRational> = (0..dim_new).map(|j| &b_old[i][j] - &b_new[i][j]).collect();
        if !in_gauge_span(row) {
            intertwines_reduced_brackets = false;
            break;
        }
    }

    // 3. Pushed-forward weight functionals commute (they are the old
    // weight functionals of the surviving edges, which are moment-map
    // components; verify on the new side as well).
    let new_interior: Vec<usize> =
        (0..y.edge_class_count).filter(|&e| !y.is_boundary_edge_class(e)).collect();
    let mut weights_commute = true;
    for (k, &e1) in new_interior.iter().enumerate() {
        for &e2 in &new_interior[k + 1..] {
            let w1 = LinearFunctional::edge_weight(y, e1);
            let w2 = LinearFunctional::edge_weight(y, e2);
            if !poisson_bracket(&w1, &w2, y).is_zero() {
                weights_commute = false;
            }
            // pull both back through A and bracket in the old chart
            let pull = |w: &LinearFunctional| {
                let mut f = LinearFunctional::default();
                for (&(t, q), c) in &w.coefficients {
                    let fq = &new_coord_func[2 * t + q.min(1)];
                    // q == 2 contributes 1 - first - second
                    if q < 2 {
                        for (&s, cc) in &fq.coefficients {
                            f.add_slot(s.0, s.1, c * cc);
                        }
                    } else {
                        for qq in 0..2 {
                            for (&s, cc) in &new_coord_func[2 * t + qq].coefficients {
                                f.add_slot(s.0, s.1, -(c * cc));
                            }
                        }
                    }
                }
                f
            };
            if !poisson_bracket(&pull(&w1), &pull(&w2), x).is_zero() {
                weights_commute = false;
            }
        }
    }

    // 4. Old gauge fields push forward into the span of the new ones.
    let mut gauge_to_gauge = true;
    for e in 0..x.edge_class_count {
        if x.is_boundary_edge_class(e) || e == class {
            continue;
        }
        let v = gauge_field(x, e);
        let pushed: Vec<BigRational> = a
            .iter()
            .map(|row| row.iter().zip(&v).map(|(r, c)| r * c).sum::<BigRational>())
            .collect();
        if !in_gauge_span(pushed) {
            gauge_to_gauge = false;
        }
    }

    Ok(PachnerPoissonReport {
        central_gauge_killed,
        intertwines_reduced_brackets,
        intertwines_on_the_nose,
        weights_commute,
        gauge_to_gauge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangulation::{fixtures, rat, PseudoManifold};

    fn build(fix: (crate::triangulation::TetGluingSpec, Vec<i8>)) -> PseudoManifold {
        PseudoManifold::build(fix.0, fix.1).unwrap()
    }

    #[test]
    fn slot_brackets_are_cyclic() {
        let x = build(fixtures::trefoil());
        let a = LinearFunctional::slot(0, 0);
        let b = LinearFunctional::slot(0, 1);
        let c = LinearFunctional::slot(0, 2);
        assert_eq!(poisson_bracket(&a, &a, &x), rat(0, 1));
        assert_eq!(poisson_bracket(&a, &b, &x), rat(1, 1));
        assert_eq!(poisson_bracket(&b, &c, &x), rat(1, 1));
        assert_eq!(poisson_bracket(&c, &a, &x), rat(1, 1));
        assert_eq!(poisson_bracket(&b, &a, &x), rat(-1, 1));
        // distinct tetrahedra commute
        let d = LinearFunctional::slot(1, 1);
        assert_eq!(poisson_bracket(&a, &d, &x), rat(0, 1));
    }

    #[test]
    fn weight_functionals_commute() {
        for fix in [
            fixtures::trefoil(),
            fixtures::fig8(),
            fixtures::five_two(),
            fixtures::h41(),
            fixtures::h52(),
            fixtures::sp_n(4),
        ] {
            let x = build(fix);
            for e1 in 0..x.edge_class_count {
                for e2 in 0..x.edge_class_count {
                    // interior weights are moment-map components of an
                    // abelian action: they commute with every weight
                    if x.is_boundary_edge_class(e1) && x.is_boundary_edge_class(e2) {
                        continue;
                    }
                    let w1 = LinearFunctional::edge_weight(&x, e1);
                    let w2 = LinearFunctional::edge_weight(&x, e2);
                    assert_eq!(poisson_bracket(&w1, &w2, &x), rat(0, 1));
                }
            }
        }
    }

    #[test]
    fn moment_map_holds_everywhere() {
        for fix in [
            fixtures::trefoil(),
            fixtures::fig8(),
            fixtures::five_two(),
            fixtures::h31(),
            fixtures::h41(),
            fixtures::h52(),
            fixtures::one_tet_one_face(),
            fixtures::sp_n(3),
            fixtures::s2xs1(),
        ] {
            let x = build(fix);
            assert!(check_moment_map(&x).violations.is_empty());
        }
    }

    #[test]
    fn gauge_field_matches_gauge_action_derivative() {
        // the linearized apply_gauge must reproduce gauge_field exactly
        let x = build(fixtures::fig8());
        let ls = crate::triangulation::LeveledShape::from_pairs(
            &[[(2, 5), (1, 5), (2, 5)], [(1, 5), (2, 5), (2, 5)]],
            (0, 1),
        )
        .unwrap();
        for e in 0..x.edge_class_count {
            let mut g = vec![rat(0, 1); x.edge_class_count];
            g[e] = rat(1, 1);
            let moved = crate::triangulation::apply_gauge(&x, &ls, &g).unwrap();
            let field = gauge_field(&x, e);
            for t in 0..x.tet_count() {
                for q in 0..2 {
                    assert_eq!(&moved.angles[t][q] - &ls.angles[t][q], field[2 * t + q]);
                }
            }
        }
    }

    #[test]
    fn reduced_dims_of_fixtures() {
        // knot complements fiber over H^1(torus): dimension 2
        assert_eq!(reduced_dims(&build(fixtures::fig8())), (4, 1, 3, 2));
        assert_eq!(reduced_dims(&build(fixtures::five_two())), (6, 2, 4, 2));
        assert_eq!(reduced_dims(&build(fixtures::trefoil())), (4, 1, 3, 2));
        // single tetrahedron: no interior edges at all
        let single = PseudoManifold::build(
            crate::triangulation::TetGluingSpec { tet_count: 1, gluings: vec![] },
            vec![1],
        )
        .unwrap();
        assert_eq!(reduced_dims(&single), (2, 0, 2, 2));
    }

    #[test]
    fn fiber_dimension_matches_boundary_h1() {
        for fix in [fixtures::trefoil(), fixtures::fig8(), fixtures::five_two()] {
            let x = build(fix);
            let h1: i64 = crate::triangulation::link_surface_chi(&x)
                .iter()
                .map(|&(_, chi)| 2 - chi)
                .sum();
            let (_, _, _, fiber) = reduced_dims(&x);
            assert_eq!(fiber as i64, h1);
        }
    }

    #[test]
    fn pachner_move_is_poisson() {
        let x = build(fixtures::sp_n(3));
        let ls = crate::triangulation::LeveledShape::from_pairs(
            &[
                [(3, 5), (1, 5), (1, 5)],
                [(7, 10), (1, 5), (1, 10)],
                [(7, 10), (1, 10), (1, 5)],
            ],
            (0, 1),
        )
        .unwrap();
        let central = x.edge_class[0];
        let report = pachner_poisson_check(&x, &ls, central).unwrap();
        assert!(report.central_gauge_killed);
        assert!(report.intertwines_reduced_brackets);
        assert!(report.weights_commute);
        assert!(report.gauge_to_gauge);
    }
}
