//! Ovoids of PG(3,q): elliptic quadrics, Suzuki-Tits ovoids, the ovoid test,
//! line classification and quadric fitting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfield::{FieldCtx, FieldElem};
use crate::linalg::{nullspace, Vec4};
use crate::projspace::Geometry;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OvoidKind {
    EllipticClaimed,
    TitsClaimed,
    Orbit,
    Unknown,
}

/// A set of q^2 + 1 points, stored sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ovoid {
    pts: Vec<usize>,
    kind: OvoidKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    quadric: Option<QuadricForm>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LineClass {
    Tangent,
    Secant,
    External,
}

impl LineClass {
    pub fn meet(self) -> usize {
        match self {
            LineClass::Tangent => 1,
            LineClass::Secant => 2,
            LineClass::External => 0,
        }
    }
}

/// Coefficients of sum_{i<=j} c_ij x_i x_j, in the order
/// x0x0, x0x1, x0x2, x0x3, x1x1, x1x2, x1x3, x2x2, x2x3, x3x3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadricForm(pub [FieldElem; 10]);

const MONOMIALS: [(usize, usize); 10] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 2),
    (2, 3),
    (3, 3),
];

fn monomials(x: &Vec4, f: &FieldCtx) -> [FieldElem; 10] {
    MONOMIALS.map(|(i, j)| f.mul(x[i], x[j]))
}

impl QuadricForm {
    pub fn eval(&self, x: &Vec4, f: &FieldCtx) -> FieldElem {
        monomials(x, f)
            .iter()
            .zip(self.0.iter())
            .fold(FieldElem::ZERO, |acc, (&m, &c)| acc + f.mul(m, c))
    }

    pub fn zero_set(&self, g: &Geometry) -> Vec<usize> {
        (0..g.num_points())
            .filter(|&p| self.eval(g.point(p), g.field()).is_zero())
            .collect()
    }
}

impl Ovoid {
    /// Validate and wrap a point set.
    pub fn new(mut pts: Vec<usize>, kind: OvoidKind, g: &Geometry) -> Result<Self> {
        pts.sort_unstable();
        pts.dedup();
        if !is_ovoid(&pts, g) {
            return Err(Error::NotAnOvoid(format!("{} points fail the ovoid test", pts.len())));
        }
        Ok(Ovoid {
            pts,
            kind,
            quadric: None,
        })
    }

    /// Wrap without validation; downstream checks report the defect.
    pub fn unchecked(mut pts: Vec<usize>) -> Self {
        pts.sort_unstable();
        pts.dedup();
        Ovoid {
            pts,
            kind: OvoidKind::Unknown,
            quadric: None,
        }
    }

    pub fn with_kind(mut self, kind: OvoidKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_quadric(mut self, quadric: QuadricForm) -> Self {
        self.quadric = Some(quadric);
        self
    }

    pub fn points(&self) -> &[usize] {
        &self.pts
    }

    pub fn kind(&self) -> OvoidKind {
        self.kind
    }

    pub fn quadric(&self) -> Option<&QuadricForm> {
        self.quadric.as_ref()
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn contains(&self, p: usize) -> bool {
        self.pts.binary_search(&p).is_ok()
    }

    pub fn mask(&self, g: &Geometry) -> Vec<bool> {
        let mut m = vec![false; g.num_points()];
        for &p in &self.pts {
            m[p] = true;
        }
        m
    }

    pub fn is_ovoid(&self, g: &Geometry) -> bool {
        is_ovoid(&self.pts, g)
    }

    pub fn meet_count(&self, g: &Geometry, l: usize) -> usize {
        g.line_points(l)
            .iter()
            .filter(|&&p| self.contains(p as usize))
            .count()
    }

    pub fn classify_line(&self, g: &Geometry, l: usize) -> Result<LineClass> {
        classify_count(self.meet_count(g, l), l)
    }

    /// Lines meeting the ovoid in exactly one point.
    pub fn tangent_lines(&self, g: &Geometry) -> Result<Vec<usize>> {
        let mask = self.mask(g);
        let mut out = Vec::new();
        for l in 0..g.num_lines() {
            let k = g.line_points(l).iter().filter(|&&p| mask[p as usize]).count();
            if classify_count(k, l)? == LineClass::Tangent {
                out.push(l);
            }
        }
        Ok(out)
    }

    /// Plane containing every tangent at x, if the tangents at x are coplanar.
    pub fn tangent_plane(&self, g: &Geometry, x: usize) -> Option<usize> {
        let mut pts: Vec<u32> = g
            .lines_through(x)
            .iter()
            .filter(|&&l| self.meet_count(g, l as usize) == 1)
            .flat_map(|&l| g.line_points(l as usize).iter().copied())
            .collect();
        pts.sort_unstable();
        pts.dedup();
        if pts.len() != g.plane_size() {
            return None;
        }
        (0..g.num_planes()).find(|&h| g.plane_points(h) == pts.as_slice())
    }

    /// Image under a point permutation.
    pub fn mapped(&self, perm: &[u32], kind: OvoidKind) -> Ovoid {
        let mut pts: Vec<usize> = self.pts.iter().map(|&p| perm[p] as usize).collect();
        pts.sort_unstable();
        Ovoid {
            pts,
            kind,
            quadric: None,
        }
    }
}

fn classify_count(k: usize, l: usize) -> Result<LineClass> {
    match k {
        0 => Ok(LineClass::External),
        1 => Ok(LineClass::Tangent),
        2 => Ok(LineClass::Secant),
        _ => Err(Error::NotAnOvoid(format!("line {l} meets the set in {k} points"))),
    }
}

/// q^2 + 1 distinct points with every line meeting the set at most twice.
pub fn is_ovoid(pts: &[usize], g: &Geometry) -> bool {
    let q = g.q();
    if pts.len() != q * q + 1 || pts.iter().any(|&p| p >= g.num_points()) {
        return false;
    }
    let mut mask = vec![false; g.num_points()];
    for &p in pts {
        if mask[p] {
            return false;
        }
        mask[p] = true;
    }
    (0..g.num_lines()).all(|l| g.line_points(l).iter().filter(|&&p| mask[p as usize]).count() <= 2)
}

/// No three of the points are collinear. Exhaustive over triples for q <= 8;
/// for larger q every point must lie on exactly q + 1 tangent lines.
pub fn no_three_collinear(pts: &[usize], g: &Geometry) -> bool {
    if g.q() <= 8 {
        for (i, &a) in pts.iter().enumerate() {
            for (j, &b) in pts.iter().enumerate().skip(i + 1) {
                for &c in &pts[j + 1..] {
                    if g.is_collinear(a, b, c).unwrap_or(true) {
                        return false;
                    }
                }
            }
        }
        return true;
    }
    let mut mask = vec![false; g.num_points()];
    for &p in pts {
        mask[p] = true;
    }
    pts.iter().all(|&x| {
        let mut tangents = 0;
        for &l in g.lines_through(x) {
            let k = g.line_points(l as usize).iter().filter(|&&p| mask[p as usize]).count();
            if k > 2 {
                return false;
            }
            if k == 1 {
                tangents += 1;
            }
        }
        tangents == g.q() + 1
    })
}

/// Smallest a (by bitmask) with y^2 + y + a irreducible over GF(q).
pub fn elliptic_constant(f: &FieldCtx) -> Result<FieldElem> {
    f.elements()
        .find(|&a| f.elements().all(|y| !(f.square(y) + y + a).is_zero()))
        .ok_or(Error::NoIrreducibleConstant)
}

/// Zero set of x0 x1 + x2^2 + x2 x3 + a x3^2.
pub fn elliptic_quadric(g: &Geometry) -> Result<Ovoid> {
    let f = g.field();
    let a = elliptic_constant(f)?;
    let mut c = [FieldElem::ZERO; 10];
    c[1] = FieldElem::ONE;
    c[7] = FieldElem::ONE;
    c[8] = FieldElem::ONE;
    c[9] = a;
    let form = QuadricForm(c);
    let pts = form.zero_set(g);
    Ok(Ovoid::new(pts, OvoidKind::EllipticClaimed, g)?.with_quadric(form))
}

/// {(0:1:0:0)} u {(1 : st + s^(sigma+2) + t^sigma : s : t)} with
/// sigma = x -> x^(2^((n+1)/2)).
pub fn tits_ovoid(g: &Geometry) -> Result<Ovoid> {
    let f = g.field();
    let n = f.n();
    if n % 2 == 0 || n < 3 {
        return Err(Error::EvenDegree(n));
    }
    let sigma = |x: FieldElem| f.frobenius(x, (n + 1) / 2);
    let (zero, one) = (FieldElem::ZERO, FieldElem::ONE);
    let mut pts = vec![g.point_index(&[zero, one, zero, zero]).expect("nonzero")];
    for s in f.elements() {
        for t in f.elements() {
            let x1 = f.mul(s, t) + f.mul(sigma(s), f.square(s)) + sigma(t);
            pts.push(g.point_index(&[one, x1, s, t]).expect("nonzero"));
        }
    }
    Ovoid::new(pts, OvoidKind::TitsClaimed, g)
}

/// A quadratic form whose zero set is exactly `pts`.
pub fn fit_quadric(pts: &[usize], g: &Geometry) -> Result<QuadricForm> {
    if pts.is_empty() {
        return Err(Error::NoQuadric);
    }
    let f = g.field();
    let rows: Vec<Vec<FieldElem>> = pts.iter().map(|&p| monomials(g.point(p), f).to_vec()).collect();
    let basis = nullspace(&rows, 10, f);
    if basis.is_empty() {
        return Err(Error::NoQuadric);
    }
    let mut target = pts.to_vec();
    target.sort_unstable();
    target.dedup();

    let to_form = |v: &[FieldElem]| QuadricForm(std::array::from_fn(|i| v[i]));
    // Small solution spaces are searched completely; otherwise only the
    // canonical basis vectors are tried.
    let q = f.order();
    let exhaustive = (basis.len() as u32) * f.n() <= 16;
    if exhaustive {
        let total = q.pow(basis.len() as u32);
        for code in 1..total {
            let mut v = vec![FieldElem::ZERO; 10];
            let mut c = code;
            for b in &basis {
                let coef = FieldElem((c % q) as u32);
                c /= q;
                for (vi, &bi) in v.iter_mut().zip(b.iter()) {
                    *vi = *vi + f.mul(coef, bi);
                }
            }
            let form = to_form(&v);
            if form.zero_set(g) == target {
                return Ok(form);
            }
        }
    } else {
        for b in &basis {
            let form = to_form(b);
            if form.zero_set(g) == target {
                return Ok(form);
            }
        }
    }
    Err(Error::NoQuadric)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elliptic_sizes() {
        for (n, size) in [(1u32, 5usize), (2, 17), (3, 65)] {
            let g = Geometry::build(n, false).unwrap();
            let e = elliptic_quadric(&g).unwrap();
            assert_eq!(e.len(), size);
            assert!(no_three_collinear(e.points(), &g));
        }
    }

    #[test]
    fn elliptic_constant_at_q2_is_one() {
        let f = FieldCtx::new(1).unwrap();
        assert_eq!(elliptic_constant(&f).unwrap(), FieldElem::ONE);
    }

    #[test]
    fn q2_quadric_brute_force() {
        // x0x1 + x2^2 + x2x3 + x3^2 over the 15 points of PG(3,2)
        let g = Geometry::build(1, false).unwrap();
        let mut zeros = Vec::new();
        for (i, p) in g.points().iter().enumerate() {
            let b: Vec<u32> = p.iter().map(|e| e.0).collect();
            let v = (b[0] * b[1] + b[2] * b[2] + b[2] * b[3] + b[3] * b[3]) % 2;
            if v == 0 {
                zeros.push(i);
            }
        }
        assert_eq!(zeros.len(), 5);
        assert_eq!(elliptic_quadric(&g).unwrap().points(), zeros.as_slice());
    }

    #[test]
    fn tits_rejects_even_degree() {
        let g = Geometry::build(2, false).unwrap();
        assert_eq!(tits_ovoid(&g).unwrap_err(), Error::EvenDegree(2));
    }

    #[test]
    fn line_classes_for_elliptic_q4() {
        let g = Geometry::build(2, false).unwrap();
        let e = elliptic_quadric(&g).unwrap();
        let mut counts = [0usize; 3];
        for l in 0..g.num_lines() {
            counts[e.classify_line(&g, l).unwrap().meet()] += 1;
        }
        assert_eq!(counts, [136, 85, 136]);
        let (a, b) = (e.points()[0], e.points()[1]);
        assert_eq!(e.classify_line(&g, g.line_through(a, b).unwrap()).unwrap(), LineClass::Secant);
        for &x in e.points() {
            let t = g
                .lines_through(x)
                .iter()
                .filter(|&&l| e.meet_count(&g, l as usize) == 1)
                .count();
            assert_eq!(t, 5);
            assert!(e.tangent_plane(&g, x).is_some());
        }
    }

    #[test]
    fn swapped_point_breaks_ovoid() {
        let g = Geometry::build(2, false).unwrap();
        let e = elliptic_quadric(&g).unwrap();
        // replace a point by an outside point on a secant through two others
        let (a, b) = (e.points()[1], e.points()[2]);
        let l = g.line_through(a, b).unwrap();
        let outside = g
            .line_points(l)
            .iter()
            .map(|&p| p as usize)
            .find(|&p| !e.contains(p))
            .unwrap();
        let mut pts = e.points().to_vec();
        pts[0] = outside;
        assert!(!is_ovoid(&pts, &g));
        let bad = Ovoid::unchecked(pts);
        assert!(matches!(bad.classify_line(&g, l), Err(Error::NotAnOvoid(_))));
        assert!(bad.tangent_lines(&g).is_err());
    }

    #[test]
    fn plane_is_not_an_ovoid() {
        let g = Geometry::build(2, false).unwrap();
        let pts: Vec<usize> = g.plane_points(3).iter().map(|&p| p as usize).collect();
        assert!(!is_ovoid(&pts, &g));
        assert!(!no_three_collinear(&pts, &g));
    }

    #[test]
    fn fit_recovers_elliptic_zero_set() {
        for n in 2..=3 {
            let g = Geometry::build(n, false).unwrap();
            let e = elliptic_quadric(&g).unwrap();
            let form = fit_quadric(e.points(), &g).unwrap();
            assert_eq!(form.zero_set(&g), e.points());
        }
    }

    #[test]
    fn fit_rejects_empty_and_non_quadric() {
        let g = Geometry::build(2, false).unwrap();
        assert_eq!(fit_quadric(&[], &g), Err(Error::NoQuadric));
        let e = elliptic_quadric(&g).unwrap();
        let mut pts = e.points().to_vec();
        pts.pop();
        assert_eq!(fit_quadric(&pts, &g), Err(Error::NoQuadric));
    }
}
