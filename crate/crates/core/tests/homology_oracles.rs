//! Cross-checks of the truncated-cell homology against manifolds whose
//! answers are classical, plus the exhaustive search that produced the
//! frozen two-tetrahedron inadmissible fixture.

use tqft_core::triangulation::*;

fn matchings(slots: Vec<usize>) -> Vec<Vec<(usize, usize)>> {
    if slots.is_empty() {
        return vec![vec![]];
    }
    let a = slots[0];
    let mut out = Vec::new();
    for k in 1..slots.len() {
        let b = slots[k];
        let rest: Vec<usize> = slots[1..].iter().copied().filter(|&s| s != b).collect();
        for mut m in matchings(rest) {
            m.push((a, b));
            out.push(m);
        }
    }
    out
}

#[test]
fn double_tetrahedron_sphere() {
    // Two tetrahedra glued along all four faces by the identity vertex
    // maps: a 3-sphere with four vertices.  Removing the vertices leaves
    // second homology Z^3 (three of the four vertex-link spheres are
    // independent) and no first homology.
    let gl: Vec<FaceGluing> =
        (0..4).map(|i| FaceGluing { tet: 0, face: i, to_tet: 1, to_face: i }).collect();
    let x =
        PseudoManifold::build(TetGluingSpec { tet_count: 2, gluings: gl }, vec![1, -1]).unwrap();
    assert_eq!(x.vertex_class_count, 4);
    let tc = TruncatedComplex::build(&x);
    assert!(tc.boundary_squares_to_zero());
    assert_eq!(tc.h2(), (3, vec![]));
    assert_eq!(tc.h1(), (0, vec![]));
    assert_eq!(link_surface_chi(&x), vec![(2, 2); 4]);
    assert!(!admissible(&x));
}

#[test]
fn knot_complements_have_vanishing_h2_and_h1_of_rank_one() {
    for fix in [fixtures::trefoil(), fixtures::fig8(), fixtures::five_two()] {
        let x = PseudoManifold::build(fix.0, fix.1).unwrap();
        let tc = TruncatedComplex::build(&x);
        assert_eq!(tc.h2(), (0, vec![]));
        assert_eq!(tc.h1(), (1, vec![]));
    }
}

#[test]
fn two_tet_search_recovers_frozen_fixture() {
    // Enumerate every closed oriented two-tetrahedron complex (perfect
    // matchings of the eight face slots compatible with the face-sign
    // parity rule) and keep those with one vertex, sphere links, and the
    // homology of a sphere bundle over the circle: H2 = Z, H1 = Z, no
    // torsion.  Exactly one complex qualifies and it is the frozen fixture.
    let mut found = Vec::new();
    for s1 in [1i8, -1] {
        for m in matchings((0..8).collect()) {
            let gl: Vec<FaceGluing> = m
                .iter()
                .map(|&(a, b)| FaceGluing {
                    tet: a / 4,
                    face: a % 4,
                    to_tet: b / 4,
                    to_face: b % 4,
                })
                .collect();
            let spec = TetGluingSpec { tet_count: 2, gluings: gl };
            let x = match PseudoManifold::build(spec, vec![1, s1]) {
                Ok(x) => x,
                Err(_) => continue,
            };
            if !x.boundary_faces.is_empty() || x.vertex_class_count != 1 {
                continue;
            }
            if link_surface_chi(&x).iter().any(|&(_, chi)| chi != 2) {
                continue;
            }
            let tc = TruncatedComplex::build(&x);
            if tc.h2() == (1, vec![]) && tc.h1() == (1, vec![]) {
                found.push((x.spec.gluings.clone(), vec![1, s1]));
            }
        }
    }
    assert_eq!(found.len(), 1, "search should isolate one complex");
    let frozen = fixtures::s2xs1();
    let mut a = found[0].0.clone();
    let mut b = frozen.0.gluings.clone();
    let key = |g: &FaceGluing| {
        let p = (g.tet, g.face);
        let q = (g.to_tet, g.to_face);
        if p <= q { (p, q) } else { (q, p) }
    };
    a.sort_by_key(key);
    b.sort_by_key(key);
    assert_eq!(a, b);
    assert_eq!(found[0].1, frozen.1);
}
