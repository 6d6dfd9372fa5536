//! Singer cycles and their subgroups T (order q^2+1) and K (order q+1),
//! ovoidal fibrations, common-tangent spreads, regularity of spreads, the
//! line-fixing group of a spread, and K-orbit fibrations of an ovoid.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfield::{ExtFieldCtx, FieldElem};
use crate::linalg::{nullspace, Mat4, Vec4};
use crate::ovoids::{Ovoid, OvoidKind};
use crate::projspace::Geometry;

pub mod search;

pub use search::{find_regular_spread_in_complex, find_regular_spread_seeded, SpreadSearch};

/// A Singer generator with its T and K powers and their point permutations.
#[derive(Clone, Debug)]
pub struct SingerContext {
    gen: Mat4,
    t_gen: Mat4,
    k_gen: Mat4,
    gen_perm: Vec<u32>,
    t_perm: Vec<u32>,
    k_perm: Vec<u32>,
    t_order: usize,
}

/// Order of a permutation: lcm of its cycle lengths.
pub fn permutation_order(perm: &[u32]) -> u64 {
    let mut seen = vec![false; perm.len()];
    let mut order = 1u64;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0u64;
        let mut p = start;
        while !seen[p] {
            seen[p] = true;
            p = perm[p] as usize;
            len += 1;
        }
        order = lcm(order, len);
    }
    order
}

fn lcm(a: u64, b: u64) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// Orbit of a point under repeated application of a permutation.
pub fn orbit(perm: &[u32], start: usize) -> Vec<usize> {
    let mut out = vec![start];
    let mut p = perm[start] as usize;
    while p != start {
        out.push(p);
        p = perm[p] as usize;
    }
    out
}

impl SingerContext {
    /// Singer cycle from multiplication by the primitive element of GF(q^4).
    pub fn new(g: &Geometry, ext: &ExtFieldCtx) -> Self {
        assert_eq!(ext.base().n(), g.n(), "field contexts disagree");
        let f = g.field();
        let q = g.q() as u64;
        let gen = ext.mult_matrix(ext.omega()).expect("omega is nonzero");
        let t_gen = gen.pow(q + 1, f);
        let k_gen = gen.pow(q * q + 1, f);
        let gen_perm = g.point_permutation(&gen);
        let t_perm = g.point_permutation(&t_gen);
        let k_perm = g.point_permutation(&k_gen);
        let sc = SingerContext {
            gen,
            t_gen,
            k_gen,
            gen_perm,
            t_perm,
            k_perm,
            t_order: (q * q + 1) as usize,
        };
        assert_eq!(permutation_order(&sc.gen_perm), (q * q + 1) * (q + 1));
        assert_eq!(orbit(&sc.gen_perm, 0).len(), g.num_points());
        assert_eq!(permutation_order(&sc.t_perm), q * q + 1);
        assert_eq!(permutation_order(&sc.k_perm), q + 1);
        sc
    }

    pub fn gen(&self) -> &Mat4 {
        &self.gen
    }

    pub fn t_gen(&self) -> &Mat4 {
        &self.t_gen
    }

    pub fn k_gen(&self) -> &Mat4 {
        &self.k_gen
    }

    pub fn gen_perm(&self) -> &[u32] {
        &self.gen_perm
    }

    /// |T| = q^2 + 1.
    pub fn t_order(&self) -> usize {
        self.t_order
    }

    pub fn t_perm(&self) -> &[u32] {
        &self.t_perm
    }

    pub fn k_perm(&self) -> &[u32] {
        &self.k_perm
    }

    /// The point orbits of T, labeled by least point index.
    pub fn t_orbit_fibration(&self, g: &Geometry) -> Fibration {
        let mut seen = vec![false; g.num_points()];
        let mut ovoids = Vec::new();
        for p in 0..g.num_points() {
            if seen[p] {
                continue;
            }
            let orb = orbit(&self.t_perm, p);
            for &x in &orb {
                seen[x] = true;
            }
            ovoids.push(Ovoid::unchecked(orb).with_kind(OvoidKind::Orbit));
        }
        Fibration::new(ovoids, g).expect("T-orbits form an ovoidal fibration")
    }
}

/// q + 1 ovoids partitioning the points, labeled 0..=q by least point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fibration {
    ovoids: Vec<Ovoid>,
    #[serde(skip)]
    labels: Vec<u32>,
}

impl Fibration {
    pub fn new(ovoids: Vec<Ovoid>, g: &Geometry) -> Result<Self> {
        let fib = Self::unchecked(ovoids, g)?;
        fib.validate(g)?;
        Ok(fib)
    }

    /// Order members and build the label table, checking only that every
    /// point is covered exactly once.
    pub fn unchecked(mut ovoids: Vec<Ovoid>, g: &Geometry) -> Result<Self> {
        ovoids.sort_by_key(|o| o.points().first().copied().unwrap_or(usize::MAX));
        let mut labels = vec![u32::MAX; g.num_points()];
        for (i, o) in ovoids.iter().enumerate() {
            for &p in o.points() {
                if p >= labels.len() || labels[p] != u32::MAX {
                    return Err(Error::NotAFibration(format!("point {p} covered twice or out of range")));
                }
                labels[p] = i as u32;
            }
        }
        if let Some(p) = labels.iter().position(|&l| l == u32::MAX) {
            return Err(Error::NotAFibration(format!("point {p} is not covered")));
        }
        Ok(Fibration { ovoids, labels })
    }

    pub fn validate(&self, g: &Geometry) -> Result<()> {
        if self.ovoids.len() != g.q() + 1 {
            return Err(Error::NotAFibration(format!("{} members", self.ovoids.len())));
        }
        if let Some(i) = self.ovoids.iter().position(|o| !o.is_ovoid(g)) {
            return Err(Error::NotAFibration(format!("member {i} is not an ovoid")));
        }
        Ok(())
    }

    pub fn ovoids(&self) -> &[Ovoid] {
        &self.ovoids
    }

    pub fn len(&self) -> usize {
        self.ovoids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ovoids.is_empty()
    }

    pub fn label(&self, p: usize) -> usize {
        self.labels[p] as usize
    }

    /// Number of points of line `l` on each member.
    pub fn meet_counts(&self, g: &Geometry, l: usize) -> Vec<usize> {
        let mut counts = vec![0; self.ovoids.len()];
        for &p in g.line_points(l) {
            counts[self.labels[p as usize] as usize] += 1;
        }
        counts
    }

    /// The unique member meeting `l` in exactly one point, if unique.
    pub fn tangent_label(&self, g: &Geometry, l: usize) -> Option<usize> {
        let counts = self.meet_counts(g, l);
        let mut it = counts.iter().enumerate().filter(|(_, &c)| c == 1);
        match (it.next(), it.next()) {
            (Some((i, _)), None) => Some(i),
            _ => None,
        }
    }

    /// (tangent, secant, external) counts of `l` over the members.
    pub fn profile(&self, g: &Geometry, l: usize) -> (usize, usize, usize) {
        let counts = self.meet_counts(g, l);
        let t = counts.iter().filter(|&&c| c == 1).count();
        let s = counts.iter().filter(|&&c| c == 2).count();
        let e = counts.iter().filter(|&&c| c == 0).count();
        (t, s, e)
    }

    /// Same members, compared as sets of point sets.
    pub fn same_members(&self, other: &Fibration) -> bool {
        self.ovoids.len() == other.ovoids.len()
            && self
                .ovoids
                .iter()
                .zip(other.ovoids.iter())
                .all(|(a, b)| a.points() == b.points())
    }
}

/// q^2 + 1 pairwise skew lines, sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spread {
    lines: Vec<usize>,
}

impl Spread {
    pub fn new(mut lines: Vec<usize>, g: &Geometry) -> Result<Self> {
        lines.sort_unstable();
        lines.dedup();
        let q = g.q();
        if lines.len() != q * q + 1 {
            return Err(Error::NotASpread(format!("{} lines", lines.len())));
        }
        let mut covered = vec![false; g.num_points()];
        for &l in &lines {
            for &p in g.line_points(l) {
                if covered[p as usize] {
                    return Err(Error::NotASpread(format!("line {l} meets another member")));
                }
                covered[p as usize] = true;
            }
        }
        Ok(Spread { lines })
    }

    pub fn lines(&self) -> &[usize] {
        &self.lines
    }

    pub fn contains(&self, l: usize) -> bool {
        self.lines.binary_search(&l).is_ok()
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}

/// Lines tangent to every member of the fibration.
pub fn common_tangent_spread(fib: &Fibration, g: &Geometry) -> Result<Spread> {
    let lines: Vec<usize> = (0..g.num_lines())
        .filter(|&l| fib.meet_counts(g, l).iter().all(|&c| c == 1))
        .collect();
    let q = g.q();
    if lines.len() != q * q + 1 {
        return Err(Error::NotAFibration(format!(
            "{} common tangents instead of {}",
            lines.len(),
            q * q + 1
        )));
    }
    Spread::new(lines, g).map_err(|e| Error::NotAFibration(e.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegularityMode {
    Exhaustive,
    Sampled { triples: usize, seed: u64 },
}

/// Whether the regulus of every (or of sampled) triple of lines lies in the
/// spread. Returns the first failing triple, if any.
pub fn regularity_witness(s: &Spread, g: &Geometry, mode: RegularityMode) -> Option<[usize; 3]> {
    let ls = s.lines();
    let check = |a: usize, b: usize, c: usize| -> bool {
        let (reg, _) = g.regulus(ls[a], ls[b], ls[c]).expect("spread lines are skew");
        reg.iter().all(|&l| s.contains(l))
    };
    match mode {
        RegularityMode::Exhaustive => {
            for a in 0..ls.len() {
                for b in a + 1..ls.len() {
                    for c in b + 1..ls.len() {
                        if !check(a, b, c) {
                            return Some([ls[a], ls[b], ls[c]]);
                        }
                    }
                }
            }
            None
        }
        RegularityMode::Sampled { triples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..triples {
                let mut idx = sample(&mut rng, ls.len(), 3).into_vec();
                idx.sort_unstable();
                if !check(idx[0], idx[1], idx[2]) {
                    return Some([ls[idx[0]], ls[idx[1]], ls[idx[2]]]);
                }
            }
            None
        }
    }
}

pub fn is_regular_spread(s: &Spread, g: &Geometry, mode: RegularityMode) -> bool {
    regularity_witness(s, g, mode).is_none()
}

/// Two linear forms cutting out the line `l`.
fn line_equations(g: &Geometry, l: usize) -> [Vec4; 2] {
    let (a, b) = g.line_gens(l);
    let rows = vec![g.point(a).to_vec(), g.point(b).to_vec()];
    let ns = nullspace(&rows, 4, g.field());
    [0, 1].map(|k| std::array::from_fn(|i| ns[k][i]))
}

/// All collineations (as normalized matrices) fixing every line of the
/// spread, sorted. A regular spread gives a cyclic group of order q + 1.
pub fn k_stabilizer(s: &Spread, g: &Geometry) -> Result<Vec<Mat4>> {
    let f = g.field();
    let mut rows = Vec::with_capacity(4 * s.len());
    for &l in s.lines() {
        let (a, b) = g.line_gens(l);
        for eq in line_equations(g, l) {
            for u in [g.point(a), g.point(b)] {
                // eq . (M u) = sum_ij eq_i m_ij u_j
                let row: Vec<FieldElem> = (0..16).map(|k| f.mul(eq[k / 4], u[k % 4])).collect();
                rows.push(row);
            }
        }
    }
    let basis = nullspace(&rows, 16, f);
    if basis.len() > 2 {
        return Err(Error::NotRegular(format!(
            "line-fixing matrices span dimension {}",
            basis.len()
        )));
    }
    let q = f.order();
    let mut group = Vec::new();
    for code in 1..q.pow(basis.len() as u32) {
        let mut m = Mat4::zero();
        let mut c = code;
        for b in &basis {
            let coef = FieldElem((c % q) as u32);
            c /= q;
            for k in 0..16 {
                m.0[k / 4][k % 4] = m.0[k / 4][k % 4] + f.mul(coef, b[k]);
            }
        }
        if m.is_invertible(f) {
            group.push(m.normalized(f));
        }
    }
    group.sort();
    group.dedup();
    if group.len() != g.q() + 1 {
        return Err(Error::NotRegular(format!(
            "line-fixing group has order {} instead of {}",
            group.len(),
            g.q() + 1
        )));
    }
    Ok(group)
}

/// An element of maximal order in a cyclic group of collineations.
pub fn cyclic_generator(group: &[Mat4], g: &Geometry) -> Option<Mat4> {
    group
        .iter()
        .find(|m| permutation_order(&g.point_permutation(m)) == group.len() as u64)
        .copied()
}

/// The K-orbit {k(theta)} of an ovoid whose tangent complex contains the
/// regular spread `s`.
pub fn fibrate_ovoid(theta: &Ovoid, s: &Spread, g: &Geometry) -> Result<Fibration> {
    let mask = theta.mask(g);
    for &l in s.lines() {
        let k = g.line_points(l).iter().filter(|&&p| mask[p as usize]).count();
        if k != 1 {
            return Err(Error::SpreadNotTangent(l));
        }
    }
    let group = k_stabilizer(s, g)?;
    let mut members: Vec<Ovoid> = group
        .iter()
        .map(|m| theta.mapped(&g.point_permutation(m), theta.kind()))
        .collect();
    members.sort_by(|a, b| a.points().cmp(b.points()));
    members.dedup_by(|a, b| a.points() == b.points());
    Fibration::new(members, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(n: u32) -> (Geometry, SingerContext) {
        let g = Geometry::build(n, false).unwrap();
        let ext = ExtFieldCtx::new(n).unwrap();
        let sc = SingerContext::new(&g, &ext);
        (g, sc)
    }

    #[test]
    fn singer_orders_q4() {
        let (g, sc) = setup(2);
        assert_eq!(permutation_order(sc.gen_perm()), 85);
        assert_eq!(orbit(sc.t_perm(), 0).len(), 17);
        for p in [0, 13, 84] {
            assert_eq!(orbit(sc.k_perm(), p).len(), g.q() + 1);
        }
    }

    #[test]
    fn t_orbits_partition_into_ovoids() {
        let (g, sc) = setup(2);
        let fib = sc.t_orbit_fibration(&g);
        assert_eq!(fib.len(), 5);
        assert!(fib.ovoids().iter().all(|o| o.len() == 17 && o.is_ovoid(&g)));
        assert_eq!(fib.ovoids()[0].points()[0], 0);
    }

    #[test]
    fn common_tangents_form_regular_t_invariant_spread() {
        let (g, sc) = setup(2);
        let fib = sc.t_orbit_fibration(&g);
        let s = common_tangent_spread(&fib, &g).unwrap();
        assert_eq!(s.len(), 17);
        assert!(is_regular_spread(&s, &g, RegularityMode::Exhaustive));
        // T permutes the spread regularly
        let orb: Vec<usize> = {
            let mut l = s.lines()[0];
            let mut out = vec![l];
            loop {
                l = g.line_image(sc.t_perm(), l);
                if l == out[0] {
                    break;
                }
                out.push(l);
            }
            out
        };
        assert_eq!(orb.len(), 17);
        assert!(orb.iter().all(|&l| s.contains(l)));
        for &l in s.lines() {
            assert!(fib.meet_counts(&g, l).iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn swapped_line_breaks_regularity() {
        let (g, sc) = setup(2);
        let fib = sc.t_orbit_fibration(&g);
        let s = common_tangent_spread(&fib, &g).unwrap();
        // switch one regulus for its opposite: same points, no longer regular
        let ls = s.lines();
        let (reg, opp) = g.regulus(ls[0], ls[1], ls[2]).unwrap();
        let mut lines: Vec<usize> = ls.iter().copied().filter(|l| !reg.contains(l)).collect();
        lines.extend(opp.iter().copied());
        let switched = Spread::new(lines, &g).unwrap();
        assert!(!is_regular_spread(&switched, &g, RegularityMode::Exhaustive));
        assert!(matches!(k_stabilizer(&switched, &g), Err(Error::NotRegular(_))));
    }

    #[test]
    fn k_stabilizer_matches_k_gen() {
        let (g, sc) = setup(2);
        let f = g.field();
        let fib = sc.t_orbit_fibration(&g);
        let s = common_tangent_spread(&fib, &g).unwrap();
        let group = k_stabilizer(&s, &g).unwrap();
        assert!(group.contains(&Mat4::identity()));
        let mut powers: Vec<Mat4> = (0..=g.q() as u64).map(|e| sc.k_gen().pow(e, f).normalized(f)).collect();
        powers.sort();
        assert_eq!(group, powers);
    }

    #[test]
    fn fibrate_singer_orbit_recovers_t_fibration() {
        let (g, sc) = setup(2);
        let fib = sc.t_orbit_fibration(&g);
        let s = common_tangent_spread(&fib, &g).unwrap();
        let theta = &fib.ovoids()[0];
        let again = fibrate_ovoid(theta, &s, &g).unwrap();
        assert!(again.same_members(&fib));
    }

    #[test]
    fn fibrate_rejects_non_tangent_spread() {
        let (g, sc) = setup(2);
        let fib = sc.t_orbit_fibration(&g);
        let s = common_tangent_spread(&fib, &g).unwrap();
        let other = crate::ovoids::elliptic_quadric(&g).unwrap();
        match fibrate_ovoid(&other, &s, &g) {
            Err(Error::SpreadNotTangent(_)) | Ok(_) => {}
            Err(e) => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn spread_validation() {
        let g = Geometry::build(1, false).unwrap();
        assert!(matches!(Spread::new(vec![0, 1], &g), Err(Error::NotASpread(_))));
    }
}
