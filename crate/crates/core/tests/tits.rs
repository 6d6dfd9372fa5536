//! The Suzuki-Tits ovoid at q = 8 and the fibration built around it.

use ovoidlab::fibration::{
    common_tangent_spread, cyclic_generator, fibrate_ovoid, find_regular_spread_in_complex,
    is_regular_spread, k_stabilizer, permutation_order, RegularityMode, Spread,
};
use ovoidlab::ovoids::{elliptic_quadric, fit_quadric, no_three_collinear, tits_ovoid};
use ovoidlab::projspace::Geometry;
use ovoidlab::symplectic::polarity_from_ovoid;
use ovoidlab::verify::{verify_main_theorem_sweep, verify_proposition1, verify_segre};
use ovoidlab::Error;

#[test]
fn tits_q8_is_a_non_quadric_ovoid() {
    let g = Geometry::build(3, false).unwrap();
    let t = tits_ovoid(&g).unwrap();
    assert_eq!(t.len(), 65);
    assert!(no_three_collinear(t.points(), &g));
    assert_eq!(fit_quadric(t.points(), &g), Err(Error::NoQuadric));
    // the elliptic quadric at the same q is recovered by the same fit
    let e = elliptic_quadric(&g).unwrap();
    let qf = fit_quadric(e.points(), &g).unwrap();
    assert_eq!(qf.zero_set(&g), e.points());
}

#[test]
fn tits_polarity_and_segre_suite() {
    let g = Geometry::build(3, false).unwrap();
    let t = tits_ovoid(&g).unwrap();
    let form = polarity_from_ovoid(&t, &g).unwrap();
    assert!(form.is_nondegenerate(g.field()));
    assert_eq!(form.isotropic_lines(&g), t.tangent_lines(&g).unwrap());
    let r = verify_segre(&t, &g);
    assert!(r.pass, "{:?}", r.failures);
}

#[test]
fn tits_fibration_via_regular_spread() {
    let g = Geometry::build(3, false).unwrap();
    let t = tits_ovoid(&g).unwrap();
    let tl = t.tangent_lines(&g).unwrap();
    let res = find_regular_spread_in_complex(&tl, &g, 1_000_000, false);
    assert!(res.found, "no spread after {} nodes", res.nodes);
    let s = Spread::new(res.spread, &g).unwrap();
    assert!(is_regular_spread(&s, &g, RegularityMode::Exhaustive));

    let k = k_stabilizer(&s, &g).unwrap();
    assert_eq!(k.len(), 9);
    let gen = cyclic_generator(&k, &g).unwrap();
    assert_eq!(permutation_order(&g.point_permutation(&gen)), 9);

    let fib = fibrate_ovoid(&t, &s, &g).unwrap();
    assert_eq!(fib.len(), 9);
    assert!(fib.ovoids().iter().any(|o| o.points() == t.points()));
    assert_eq!(common_tangent_spread(&fib, &g).unwrap(), s);

    let p = verify_proposition1(&fib, &g);
    assert!(p.pass, "{:?}", p.failures);
    assert_eq!(p.counters["profile_1_4_4"], 4680);
    let m = verify_main_theorem_sweep(&fib, &g);
    assert!(m.pass, "{:?}", m.failures);
    assert_eq!(m.counters["dual_grids"], 9 * 2080);
}

#[test]
fn elliptic_fibration_q4_via_search() {
    let g = Geometry::build(2, false).unwrap();
    let e = elliptic_quadric(&g).unwrap();
    let res = find_regular_spread_in_complex(&e.tangent_lines(&g).unwrap(), &g, 1_000_000, false);
    let s = Spread::new(res.spread, &g).unwrap();
    let fib = fibrate_ovoid(&e, &s, &g).unwrap();
    assert!(verify_proposition1(&fib, &g).pass);
    assert!(verify_main_theorem_sweep(&fib, &g).pass);
}
