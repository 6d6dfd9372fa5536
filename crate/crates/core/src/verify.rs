//! Exhaustive verification suites. Each suite sweeps every line, dual grid or
//! point involved and returns a report; failures are data, never panics.
//!
//! Sweeps run on the ambient rayon pool. Per-item results are collected in
//! index order before being folded into the report, so output does not depend
//! on scheduling.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fibration::{regularity_witness, Fibration, RegularityMode, SingerContext, Spread};
use crate::gf2code::{
    char_vector, code_c, code_d_from_grids, pairwise_sum_span,
    radical_codim_check, t_orbit_sum, t_orbit_sum_vector, BitVec,
};
use crate::ovoids::Ovoid;
use crate::projspace::Geometry;
use crate::symplectic::{forms_vanishing_on, polarity_from_lines, polarity_from_ovoid, SymplecticForm};

/// Witness lists are truncated to this length; the `failures` counter keeps
/// the full count.
pub const MAX_FAILURES: usize = 20;

pub const Q2_ADVISORY: &str = "q=2 is outside the hypothesis q > 2; outcome recorded only";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub witness: String,
    pub indices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub theorem: String,
    pub q: usize,
    pub pass: bool,
    pub counters: BTreeMap<String, i64>,
    pub failures: Vec<Failure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub advisory: Option<String>,
    pub elapsed_ms: u64,
}

struct Recorder {
    theorem: &'static str,
    q: usize,
    counters: BTreeMap<String, i64>,
    failures: Vec<Failure>,
    total: i64,
    start: Instant,
}

impl Recorder {
    fn new(theorem: &'static str, q: usize) -> Self {
        Recorder {
            theorem,
            q,
            counters: BTreeMap::new(),
            failures: Vec::new(),
            total: 0,
            start: Instant::now(),
        }
    }

    fn set(&mut self, key: impl Into<String>, v: usize) {
        self.counters.insert(key.into(), v as i64);
    }

    fn bump(&mut self, key: impl Into<String>) {
        *self.counters.entry(key.into()).or_insert(0) += 1;
    }

    fn fail(&mut self, witness: impl Into<String>, indices: Vec<usize>) {
        self.total += 1;
        if self.failures.len() < MAX_FAILURES {
            self.failures.push(Failure {
                witness: witness.into(),
                indices,
            });
        }
    }

    fn absorb(&mut self, f: Option<Failure>) {
        if let Some(f) = f {
            self.fail(f.witness, f.indices);
        }
    }

    fn finish(mut self) -> VerificationReport {
        self.counters.insert("failures".into(), self.total);
        VerificationReport {
            theorem: self.theorem.into(),
            q: self.q,
            pass: self.total == 0,
            counters: self.counters,
            failures: self.failures,
            advisory: (self.q == 2).then(|| Q2_ADVISORY.to_string()),
            elapsed_ms: self.start.elapsed().as_millis() as u64,
        }
    }
}

fn failure(witness: String, indices: Vec<usize>) -> Option<Failure> {
    Some(Failure { witness, indices })
}

/// Common tangents form a regular spread, the tangent complexes of the
/// members are linear complexes meeting pairwise in that spread, and every
/// other line is tangent to one member and secant to q/2 of them.
pub fn verify_proposition1(fib: &Fibration, g: &Geometry) -> VerificationReport {
    let q = g.q();
    let mut r = Recorder::new("prop1", q);
    let members = fib.len();
    r.set("members", members);
    let counts: Vec<Vec<usize>> = (0..g.num_lines())
        .into_par_iter()
        .map(|l| fib.meet_counts(g, l))
        .collect();
    let tangents = |l: usize| counts[l].iter().filter(|&&c| c == 1).count();

    let spread_lines: Vec<usize> = (0..g.num_lines()).filter(|&l| tangents(l) == members).collect();
    r.set("spread", spread_lines.len());
    match Spread::new(spread_lines.clone(), g) {
        Ok(s) => match regularity_witness(&s, g, RegularityMode::Exhaustive) {
            Some(w) => r.fail("regulus of three spread lines leaves the spread", w.to_vec()),
            None => r.set("regular", 1),
        },
        Err(e) => r.fail(
            format!("common tangents do not form a spread: {e}"),
            spread_lines.iter().copied().take(MAX_FAILURES).collect(),
        ),
    }

    let pencil = forms_vanishing_on(g, &spread_lines);
    r.set("pencil_dim", pencil.len());
    if pencil.len() != 2 {
        r.fail(format!("forms vanishing on the spread span dimension {}", pencil.len()), vec![]);
    }

    // each member's tangent lines are the isotropic lines of one form
    let complexes: Vec<Option<Failure>> = (0..members)
        .into_par_iter()
        .map(|i| {
            let tl: Vec<usize> = (0..g.num_lines()).filter(|&l| counts[l][i] == 1).collect();
            match polarity_from_lines(g, &tl) {
                Ok(form) if form.isotropic_lines(g) == tl => None,
                Ok(_) => failure(format!("tangents of member {i} are a proper subset of a complex"), vec![i]),
                Err(e) => failure(format!("tangents of member {i} are not a linear complex: {e}"), vec![i]),
            }
        })
        .collect();
    for f in complexes {
        if f.is_none() {
            r.bump("linear_complexes");
        }
        r.absorb(f);
    }

    let half = q / 2;
    let mut checked = 0;
    for l in 0..g.num_lines() {
        let t = tangents(l);
        if t == members {
            continue;
        }
        checked += 1;
        if t >= 2 {
            r.fail(format!("line tangent to {t} members lies outside the spread"), vec![l]);
        }
        let s = counts[l].iter().filter(|&&c| c == 2).count();
        let e = counts[l].iter().filter(|&&c| c == 0).count();
        r.bump(format!("profile_{t}_{s}_{e}"));
        if (t, s, e) != (1, half, half) {
            r.fail(format!("profile ({t},{s},{e}) instead of (1,{half},{half})"), vec![l]);
        }
    }
    r.set("lines_checked", checked);
    r.finish()
}

/// sigma(l) is the all-one vector for spread lines and the characteristic
/// vector of the unique tangent member otherwise. `fib` supplies the members
/// E_i and must be the T-orbit fibration of `sc`.
pub fn verify_lemma5(sc: &SingerContext, fib: &Fibration, g: &Geometry) -> VerificationReport {
    let mut r = Recorder::new("lemma5", g.q());
    let np = g.num_points();
    let all_one = BitVec::ones(np);
    let members: Vec<BitVec> = fib
        .ovoids()
        .iter()
        .map(|o| char_vector(o.points(), g).expect("points in range"))
        .collect();

    let results: Vec<(bool, usize, Option<Failure>)> = (0..g.num_lines())
        .into_par_iter()
        .map(|l| {
            let sigma = t_orbit_sum(l, sc, g);
            let in_s = fib.meet_counts(g, l).iter().all(|&c| c == 1);
            let f = if in_s {
                (sigma != all_one)
                    .then(|| Failure {
                        witness: "orbit sum of a spread line is not the all-one vector".into(),
                        indices: vec![l],
                    })
            } else {
                match fib.tangent_label(g, l) {
                    Some(i) if sigma == members[i] => None,
                    Some(i) if sigma == all_one => failure(
                        format!("orbit sum of a non-spread line is all-one (tangent member {i})"),
                        vec![l, i],
                    ),
                    Some(i) => failure(format!("orbit sum differs from tangent member {i}"), vec![l, i]),
                    None => failure("line has no unique tangent member".into(), vec![l]),
                }
            };
            (in_s, sigma.weight(), f)
        })
        .collect();

    let (mut spread, mut other) = (0, 0);
    for (in_s, w, f) in results {
        if in_s {
            spread += 1;
        } else {
            other += 1;
        }
        r.bump(format!("weight_{w}"));
        r.absorb(f);
    }
    r.set("lines_checked", spread + other);
    r.set("spread_lines", spread);
    r.set("non_spread_lines", other);
    if spread == 0 || other == 0 {
        r.fail("one of the two line classes is empty", vec![spread, other]);
    }
    r.finish()
}

fn main_check(fib: &Fibration, theta0: usize, g: &Geometry, r: &mut Recorder) -> usize {
    let Some(theta) = fib.ovoids().get(theta0) else {
        r.fail(format!("no member {theta0}"), vec![theta0]);
        return 0;
    };
    let form = match polarity_from_ovoid(theta, g) {
        Ok(f) => f,
        Err(e) => {
            r.fail(format!("member {theta0} gives no polarity: {e}"), vec![theta0]);
            return 0;
        }
    };
    let grids = form.enumerate_dual_grids(g);
    let results: Vec<Option<Failure>> = grids
        .par_iter()
        .map(|d| {
            let idx = vec![theta0, d.m, d.m_perp];
            match (fib.tangent_label(g, d.m), fib.tangent_label(g, d.m_perp)) {
                (Some(j), Some(k)) if j == k => failure(format!("both lines tangent to member {j}"), idx),
                (Some(j), Some(k)) if j == theta0 || k == theta0 => {
                    failure(format!("tangent members ({j},{k}) include the polarity member"), idx)
                }
                (Some(_), Some(_)) => None,
                _ => failure("a grid line has no unique tangent member".into(), idx),
            }
        })
        .collect();
    for f in results {
        r.absorb(f);
    }
    grids.len()
}

/// For the polarity of member `theta0`, every dual grid {m, m^perp} has its
/// two lines tangent to two distinct members, both different from `theta0`.
pub fn verify_main_theorem(fib: &Fibration, theta0: usize, g: &Geometry) -> VerificationReport {
    let mut r = Recorder::new("main", g.q());
    r.set("theta0", theta0);
    let n = main_check(fib, theta0, g, &mut r);
    r.set("dual_grids", n);
    r.finish()
}

/// `verify_main_theorem` for every choice of the polarity member.
pub fn verify_main_theorem_sweep(fib: &Fibration, g: &Geometry) -> VerificationReport {
    let mut r = Recorder::new("main", g.q());
    r.set("theta0_choices", fib.len());
    let mut total = 0;
    for t in 0..fib.len() {
        let n = main_check(fib, t, g, &mut r);
        r.set(format!("dual_grids_theta{t}"), n);
        total += n;
    }
    r.set("dual_grids", total);
    r.finish()
}

/// Radical codimension and the containment D < C^perp for the W(q) of
/// `form`, plus sigma of dual grids and of W(q)-lines against the members
/// of the T-orbit fibration `fib`; `theta0` is the member defining `form`.
pub fn verify_radical_and_corollary3(
    form: &SymplecticForm,
    theta0: usize,
    sc: &SingerContext,
    fib: &Fibration,
    g: &Geometry,
) -> VerificationReport {
    let mut r = Recorder::new("codes", g.q());
    let np = g.num_points();
    let grids = form.enumerate_dual_grids(g);
    let c = code_c(form, g);
    let d = code_d_from_grids(&grids, g);
    r.set("points", np);
    r.set("w_lines", c.num_rows());
    r.set("dual_grids", grids.len());

    let rc = match radical_codim_check(&d) {
        Ok(rc) => rc,
        Err(e) => {
            r.fail(format!("no dual grids: {e}"), vec![]);
            return r.finish();
        }
    };
    r.set("dim_d", rc.dim_d);
    r.set("dim_pairwise_sum_span", rc.dim_sumspan);
    r.set("radical_codim", rc.codim);
    if rc.codim != 1 {
        r.fail(format!("pairwise-sum span has codimension {}", rc.codim), vec![]);
    }

    let dim_c = c.rank();
    r.set("dim_c", dim_c);
    r.set("dim_c_perp", np - dim_c);
    if rc.dim_d >= np - dim_c {
        r.fail(format!("dim D = {} is not below dim C^perp = {}", rc.dim_d, np - dim_c), vec![]);
    }

    let sums = pairwise_sum_span(&d).expect("d has rows");
    sums.echelon();
    let members: Vec<BitVec> = fib
        .ovoids()
        .iter()
        .map(|o| char_vector(o.points(), g).expect("points in range"))
        .collect();

    let grid_results: Vec<Vec<Failure>> = grids
        .par_iter()
        .zip(d.rows().par_iter())
        .map(|(gr, row)| {
            let idx = vec![gr.m, gr.m_perp];
            let mut out = Vec::new();
            if sums.in_span(row).expect("same width") {
                out.push(Failure {
                    witness: "dual grid lies in the pairwise-sum span".into(),
                    indices: idx.clone(),
                });
            }
            if let Some(l) = c.rows().iter().position(|cr| cr.dot(row)) {
                out.push(Failure {
                    witness: format!("dual grid is not orthogonal to W-line row {l}"),
                    indices: idx.clone(),
                });
            }
            let sigma = t_orbit_sum_vector(row, sc);
            let labels: BTreeSet<usize> = sigma.ones_iter().map(|p| fib.label(p)).collect();
            let ok = match labels.iter().copied().collect::<Vec<_>>()[..] {
                [i, j] if i != theta0 && j != theta0 => sigma == members[i].xor(&members[j]),
                _ => false,
            };
            if !ok {
                out.push(Failure {
                    witness: format!("orbit sum of dual grid is not E_i + E_j avoiding member {theta0}"),
                    indices: idx,
                });
            }
            out
        })
        .collect();
    for fs in grid_results {
        for f in fs {
            r.fail(f.witness, f.indices);
        }
    }

    // sigma of the W(q)-lines: recorded, only "all-one or a member" asserted
    let all_one = BitVec::ones(np);
    let line_sigmas: Vec<BitVec> = c.rows().par_iter().map(|row| t_orbit_sum_vector(row, sc)).collect();
    let iso = form.isotropic_lines(g);
    let mut distinct = BTreeSet::new();
    for (l, sigma) in iso.iter().zip(&line_sigmas) {
        if *sigma == all_one {
            r.bump("sigma_c_all_one");
            distinct.insert(usize::MAX);
        } else if let Some(i) = members.iter().position(|m| m == sigma) {
            r.bump(format!("sigma_c_member_{i}"));
            distinct.insert(i);
        } else {
            r.fail("orbit sum of a W-line is neither all-one nor a member", vec![*l]);
        }
    }
    r.set("sigma_c_distinct", distinct.len());
    r.finish()
}

/// `verify_radical_and_corollary3` with the form taken from member `theta0`;
/// a member admitting no polarity is reported as a failure.
pub fn verify_codes_for_member(
    fib: &Fibration,
    theta0: usize,
    sc: &SingerContext,
    g: &Geometry,
) -> VerificationReport {
    let form = fib
        .ovoids()
        .get(theta0)
        .ok_or(Error::IndexOutOfRange { index: theta0, len: fib.len() })
        .and_then(|o| polarity_from_ovoid(o, g));
    match form {
        Ok(form) => verify_radical_and_corollary3(&form, theta0, sc, fib, g),
        Err(e) => {
            let mut r = Recorder::new("codes", g.q());
            r.fail(format!("member {theta0} gives no polarity: {e}"), vec![theta0]);
            r.finish()
        }
    }
}

/// The tangent lines of an ovoid are the isotropic lines of a nondegenerate
/// alternating form whose point-perps are the tangent planes, and perp swaps
/// secant and external lines.
pub fn verify_segre(theta: &Ovoid, g: &Geometry) -> VerificationReport {
    let mut r = Recorder::new("segre", g.q());
    r.set("points", theta.len());
    let form = match polarity_from_ovoid(theta, g) {
        Ok(f) => f,
        Err(e) => {
            let heavy: Vec<usize> = (0..g.num_lines())
                .filter(|&l| theta.meet_count(g, l) > 2)
                .take(MAX_FAILURES)
                .collect();
            r.fail(format!("no polarity: {e}"), heavy);
            return r.finish();
        }
    };
    r.set("nondegenerate", form.is_nondegenerate(g.field()) as usize);
    if !form.is_nondegenerate(g.field()) {
        r.fail("reconstructed form is degenerate", vec![]);
    }

    let mask = theta.mask(g);
    let meet = |l: usize| g.line_points(l).iter().filter(|&&p| mask[p as usize]).count();
    let results: Vec<(usize, bool, Option<Failure>)> = (0..g.num_lines())
        .into_par_iter()
        .map(|l| {
            let k = meet(l);
            let iso = form.is_isotropic_line(g, l);
            if iso != (k == 1) {
                return (k, iso, failure(format!("isotropic={iso} but line meets the ovoid {k} times"), vec![l]));
            }
            if k == 1 {
                return (k, iso, None);
            }
            let lp = form.perp_line(g, l);
            let kp = meet(lp);
            let f = (k + kp != 2).then(|| Failure {
                witness: format!("perp of a line meeting {k} points meets {kp}"),
                indices: vec![l, lp],
            });
            (k, iso, f)
        })
        .collect();
    let mut swaps = 0;
    for (k, iso, f) in results {
        r.bump(match k {
            0 => "external",
            1 => "tangent",
            _ => "secant",
        });
        if iso {
            r.bump("isotropic");
        }
        if k != 1 && f.is_none() {
            swaps += 1;
        }
        r.absorb(f);
    }
    r.set("lines_checked", g.num_lines());
    r.set("perp_swaps", swaps);

    let planes: Vec<Option<Failure>> = theta
        .points()
        .par_iter()
        .map(|&x| {
            let h = form.perp_point(g, x);
            (theta.tangent_plane(g, x) != Some(h))
                .then(|| Failure {
                    witness: "tangent plane differs from the point's perp plane".into(),
                    indices: vec![x, h],
                })
        })
        .collect();
    for f in planes {
        r.absorb(f);
    }
    r.set("planes_checked", theta.len());
    r.finish()
}

fn pick(pts: &[usize], which: usize) -> usize {
    match which {
        0 => pts[0],
        1 => pts[pts.len() - 1],
        _ => pts[pts.len() / 2],
    }
}

/// Canned single-point corruptions of a fibration: one point of a member is
/// exchanged with one point of another. The point sets still partition P.
pub fn mutate_fibration(fib: &Fibration, k: usize, g: &Geometry) -> Result<Fibration> {
    let last = fib.len() - 1;
    // (member, which point, member, which point)
    let (a, wa, b, wb) = match k {
        1 => (0, 0, 1, 0),
        2 => (1, 1, last, 1),
        3 => (0, 1, 1, 1),
        _ => return Err(Error::UnknownMutation(k)),
    };
    let mut sets: Vec<Vec<usize>> = fib.ovoids().iter().map(|o| o.points().to_vec()).collect();
    let (x, y) = (pick(&sets[a], wa), pick(&sets[b], wb));
    for (s, from, to) in [(a, x, y), (b, y, x)] {
        let pos = sets[s].iter().position(|&p| p == from).expect("picked from this set");
        sets[s][pos] = to;
    }
    let ovoids = sets.into_iter().map(Ovoid::unchecked).collect();
    Fibration::unchecked(ovoids, g)
}

/// Canned single-point corruptions of an ovoid: one point is replaced by a
/// point outside it.
pub fn mutate_ovoid(theta: &Ovoid, k: usize, g: &Geometry) -> Result<Ovoid> {
    if !(1..=3).contains(&k) {
        return Err(Error::UnknownMutation(k));
    }
    let which = k - 1;
    let outside: Vec<usize> = (0..g.num_points()).filter(|&p| !theta.contains(p)).collect();
    let (x, y) = (pick(theta.points(), which), pick(&outside, which));
    let pts = theta
        .points()
        .iter()
        .map(|&p| if p == x { y } else { p })
        .collect();
    Ok(Ovoid::unchecked(pts).with_kind(theta.kind()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfield::ExtFieldCtx;
    use crate::ovoids::elliptic_quadric;

    fn setup(n: u32) -> (Geometry, SingerContext, Fibration) {
        let g = Geometry::build(n, false).unwrap();
        let ext = ExtFieldCtx::new(n).unwrap();
        let sc = SingerContext::new(&g, &ext);
        let fib = sc.t_orbit_fibration(&g);
        (g, sc, fib)
    }

    fn c(r: &VerificationReport, k: &str) -> i64 {
        r.counters.get(k).copied().unwrap_or(-1)
    }

    #[test]
    fn prop1_q4_counters() {
        let (g, _, fib) = setup(2);
        let r = verify_proposition1(&fib, &g);
        assert!(r.pass, "{:?}", r.failures);
        assert_eq!(c(&r, "spread"), 17);
        assert_eq!(c(&r, "lines_checked"), 340);
        assert_eq!(c(&r, "profile_1_2_2"), 340);
        assert_eq!(c(&r, "pencil_dim"), 2);
        assert_eq!(c(&r, "linear_complexes"), 5);
        assert!(r.advisory.is_none());
    }

    #[test]
    fn lemma5_q4_weight_histogram() {
        let (g, sc, fib) = setup(2);
        let r = verify_lemma5(&sc, &fib, &g);
        assert!(r.pass, "{:?}", r.failures);
        assert_eq!(c(&r, "weight_85"), 17);
        assert_eq!(c(&r, "weight_17"), 340);
        assert_eq!(c(&r, "lines_checked"), 357);
    }

    #[test]
    fn main_theorem_q4_all_members() {
        let (g, _, fib) = setup(2);
        let r = verify_main_theorem(&fib, 0, &g);
        assert!(r.pass);
        assert_eq!(c(&r, "dual_grids"), 136);
        let r = verify_main_theorem_sweep(&fib, &g);
        assert!(r.pass, "{:?}", r.failures);
        assert_eq!(c(&r, "dual_grids"), 5 * 136);
    }

    #[test]
    fn codes_q4() {
        let (g, sc, fib) = setup(2);
        let form = polarity_from_ovoid(&fib.ovoids()[0], &g).unwrap();
        let r = verify_radical_and_corollary3(&form, 0, &sc, &fib, &g);
        assert!(r.pass, "{:?}", r.failures);
        assert_eq!(c(&r, "radical_codim"), 1);
        assert!(c(&r, "dim_d") < c(&r, "dim_c_perp"));
        assert_eq!(c(&r, "dual_grids"), 136);
    }

    #[test]
    fn segre_q4_elliptic() {
        let g = Geometry::build(2, false).unwrap();
        let r = verify_segre(&elliptic_quadric(&g).unwrap(), &g);
        assert!(r.pass, "{:?}", r.failures);
        assert_eq!(c(&r, "tangent"), 85);
        assert_eq!(c(&r, "isotropic"), 85);
        assert_eq!(c(&r, "perp_swaps"), 272);
        assert_eq!(c(&r, "tangent") + c(&r, "secant") + c(&r, "external"), c(&r, "lines_checked"));
    }

    #[test]
    fn q2_reports_carry_advisory() {
        let (g, _, fib) = setup(1);
        let r = verify_main_theorem(&fib, 0, &g);
        assert_eq!(r.advisory.as_deref(), Some(Q2_ADVISORY));
    }

    #[test]
    fn mutations_break_every_suite() {
        let (g, sc, fib) = setup(2);
        let theta = elliptic_quadric(&g).unwrap();
        let form = polarity_from_ovoid(&fib.ovoids()[0], &g).unwrap();
        for k in 1..=3 {
            let bad = mutate_fibration(&fib, k, &g).unwrap();
            assert!(!bad.same_members(&fib));
            for r in [
                verify_proposition1(&bad, &g),
                verify_lemma5(&sc, &bad, &g),
                verify_main_theorem(&bad, 0, &g),
                verify_radical_and_corollary3(&form, 0, &sc, &bad, &g),
                verify_segre(&mutate_ovoid(&theta, k, &g).unwrap(), &g),
            ] {
                assert!(!r.pass, "mutation {k} survived {}", r.theorem);
                assert!(!r.failures.is_empty());
                assert!(r.failures.len() <= MAX_FAILURES);
            }
        }
        assert!(mutate_fibration(&fib, 4, &g).is_err());
    }

    #[test]
    fn report_json_shape() {
        let (g, _, fib) = setup(2);
        let r = verify_main_theorem(&fib, 0, &g);
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for k in ["theorem", "q", "pass", "counters", "failures", "elapsed_ms"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        assert!(v.get("advisory").is_none());
    }
}
