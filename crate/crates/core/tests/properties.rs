use std::sync::OnceLock;

use ovoidlab::gf2code::BitVec;
use ovoidlab::gfield::{FieldCtx, FieldElem};
use ovoidlab::linalg::Mat4;
use ovoidlab::ovoids::{elliptic_quadric, Ovoid};
use ovoidlab::projspace::Geometry;
use ovoidlab::symplectic::{polarity_from_ovoid, SymplecticForm};
use ovoidlab::verify::{verify_proposition1, verify_segre};
use ovoidlab::fibration::SingerContext;
use ovoidlab::gfield::ExtFieldCtx;
use proptest::prelude::*;

fn q4() -> &'static Geometry {
    static G: OnceLock<Geometry> = OnceLock::new();
    G.get_or_init(|| Geometry::build(2, false).unwrap())
}

fn mat(entries: &[u32]) -> Mat4 {
    Mat4(std::array::from_fn(|i| std::array::from_fn(|j| FieldElem(entries[4 * i + j]))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(n in 1u32..=12, a: u32, b: u32, c: u32) {
        let f = FieldCtx::new(n).unwrap();
        let m = (1u32 << n) - 1;
        let (a, b, c) = (FieldElem(a & m), FieldElem(b & m), FieldElem(c & m));
        prop_assert_eq!(f.mul(a, b + c), f.mul(a, b) + f.mul(a, c));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElem::ONE);
        }
    }

    #[test]
    fn two_points_span_one_line(p in 0usize..85, r in 1usize..85) {
        let g = q4();
        let p2 = (p + r) % 85;
        let l = g.line_through(p, p2).unwrap();
        prop_assert!(g.is_on_line(p, l) && g.is_on_line(p2, l));
        let through_both = g.lines_through(p).iter().filter(|&&m| g.is_on_line(p2, m as usize)).count();
        prop_assert_eq!(through_both, 1);
    }

    #[test]
    fn lines_meet_iff_coplanar(l1 in 0usize..357, l2 in 0usize..357) {
        let g = q4();
        let pts: Vec<u32> = g.line_points(l1).iter().chain(g.line_points(l2)).copied().collect();
        let coplanar = (0..g.num_planes()).any(|h| pts.iter().all(|p| g.plane_points(h).contains(p)));
        prop_assert_eq!(g.meet(l1, l2).is_some() || l1 == l2, coplanar);
    }

    #[test]
    fn xor_weight_identity(a in proptest::collection::vec(0usize..200, 0..60),
                           b in proptest::collection::vec(0usize..200, 0..60)) {
        let va = BitVec::from_indices(200, a).unwrap();
        let vb = BitVec::from_indices(200, b).unwrap();
        prop_assert_eq!(va.xor(&vb).weight() + 2 * va.overlap(&vb), va.weight() + vb.weight());
    }

    /// The polarity of M(theta) is the polarity of theta transported by M.
    #[test]
    fn polarity_is_natural(entries in proptest::collection::vec(0u32..4, 16)) {
        let g = q4();
        let f = g.field();
        let m = mat(&entries);
        prop_assume!(m.is_invertible(f));
        let theta = elliptic_quadric(g).unwrap();
        let image = theta.mapped(&g.point_permutation(&m), theta.kind());
        let before = polarity_from_ovoid(&theta, g).unwrap();
        let after = polarity_from_ovoid(&image, g).unwrap();
        let moved = before.transformed_by_inverse(&m.inverse(f).unwrap(), f);
        prop_assert_eq!(moved.gram().normalized(f), *after.gram());
        let perp = after.perp_table(g);
        for l in 0..g.num_lines() {
            prop_assert_eq!(perp[perp[l] as usize] as usize, l);
        }
    }

    /// Replacing one point of an ovoid by any outside point is always caught.
    #[test]
    fn any_single_point_replacement_breaks_segre(i in 0usize..17, j in 0usize..68) {
        let g = q4();
        let theta = elliptic_quadric(g).unwrap();
        let outside: Vec<usize> = (0..85).filter(|&p| !theta.contains(p)).collect();
        let mut pts = theta.points().to_vec();
        pts[i] = outside[j];
        let bad = Ovoid::unchecked(pts);
        prop_assert!(!bad.is_ovoid(g));
        prop_assert!(!verify_segre(&bad, g).pass);
    }

    /// Swapping any two points between two fibration members is caught.
    #[test]
    fn any_swap_between_members_breaks_prop1(a in 0usize..5, da in 1usize..5, i in 0usize..17, j in 0usize..17) {
        let g = q4();
        let sc = SingerContext::new(g, &ExtFieldCtx::new(2).unwrap());
        let fib = sc.t_orbit_fibration(g);
        let b = (a + da) % 5;
        let mut sets: Vec<Vec<usize>> = fib.ovoids().iter().map(|o| o.points().to_vec()).collect();
        let (x, y) = (sets[a][i], sets[b][j]);
        sets[a][i] = y;
        sets[b][j] = x;
        let bad = ovoidlab::fibration::Fibration::unchecked(sets.into_iter().map(Ovoid::unchecked).collect(), g).unwrap();
        prop_assert!(!verify_proposition1(&bad, g).pass);
    }
}

#[test]
fn standard_form_is_self_transport_under_identity() {
    let g = q4();
    let f = g.field();
    let s = SymplecticForm::standard();
    assert_eq!(s.transformed_by_inverse(&Mat4::identity(), f), s);
}
