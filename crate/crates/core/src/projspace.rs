//! Points, lines and planes of PG(3,q) with incidence tables.
//!
//! Points are normalized so the first nonzero coordinate is 1 and indexed in
//! lexicographic order of their coordinates (field elements compared by
//! bitmask). Lines are indexed by their lexicographically least pair of
//! points; planes share the point indexing through their normal vectors.

use crate::error::{Error, Result};
use crate::gfield::{FieldCtx, FieldElem};
use crate::linalg::{dot, normalize_vec, row_reduce, Mat4, Vec4};

/// Largest n built without an explicit override.
pub const DESK_GUARD: u32 = 8;

const NO_LINE: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct Geometry {
    field: FieldCtx,
    q: usize,
    points: Vec<Vec4>,
    line_gens: Vec<(u32, u32)>,
    line_pts: Vec<u32>,
    plane_pts: Vec<u32>,
    pair_to_line: Vec<u32>,
    point_lines: Vec<u32>,
}

impl Geometry {
    /// Build PG(3, 2^n). Fails with `SizeGuard` above n = 8 unless `force`.
    pub fn build(n: u32, force: bool) -> Result<Self> {
        if n > DESK_GUARD && !force {
            return Err(Error::SizeGuard { n, guard: DESK_GUARD });
        }
        let field = FieldCtx::new(n)?;
        Ok(Self::from_field(field))
    }

    pub(crate) fn from_field(field: FieldCtx) -> Self {
        let q = field.order() as usize;
        let points = enumerate_points(&field);
        let np = points.len();
        let mut pair_to_line = vec![NO_LINE; np * np];
        let mut line_gens = Vec::with_capacity((q * q + 1) * (q * q + q + 1));
        let mut line_pts = Vec::with_capacity(line_gens.capacity() * (q + 1));
        let mut buf = Vec::with_capacity(q + 1);
        for p1 in 0..np {
            for p2 in p1 + 1..np {
                if pair_to_line[p1 * np + p2] != NO_LINE {
                    continue;
                }
                let id = line_gens.len() as u32;
                span_points(&field, &points[p1], &points[p2], &mut buf);
                for (i, &a) in buf.iter().enumerate() {
                    for &b in &buf[i + 1..] {
                        pair_to_line[a as usize * np + b as usize] = id;
                        pair_to_line[b as usize * np + a as usize] = id;
                    }
                }
                debug_assert_eq!((buf[0], buf[1]), (p1 as u32, p2 as u32));
                line_gens.push((buf[0], buf[1]));
                line_pts.extend_from_slice(&buf);
            }
        }
        let mut g = Geometry {
            field,
            q,
            points,
            line_gens,
            line_pts,
            plane_pts: Vec::new(),
            pair_to_line,
            point_lines: Vec::new(),
        };
        g.fill_derived();
        g
    }

    /// Rebuild from stored points and line lists (used by the cache loader).
    pub(crate) fn from_parts(field: FieldCtx, points: Vec<Vec4>, line_pts: Vec<u32>) -> Result<Self> {
        let q = field.order() as usize;
        let np = points.len();
        if np != (q * q + 1) * (q + 1) || line_pts.len() != (q * q + 1) * (q * q + q + 1) * (q + 1) {
            return Err(Error::Cache("table sizes do not match q".into()));
        }
        let mut pair_to_line = vec![NO_LINE; np * np];
        let mut line_gens = Vec::with_capacity(line_pts.len() / (q + 1));
        for (id, pts) in line_pts.chunks(q + 1).enumerate() {
            if pts.iter().any(|&p| p as usize >= np) {
                return Err(Error::Cache("point index out of range".into()));
            }
            for (i, &a) in pts.iter().enumerate() {
                for &b in &pts[i + 1..] {
                    pair_to_line[a as usize * np + b as usize] = id as u32;
                    pair_to_line[b as usize * np + a as usize] = id as u32;
                }
            }
            line_gens.push((pts[0], pts[1]));
        }
        let covered = (0..np).all(|a| (a + 1..np).all(|b| pair_to_line[a * np + b] != NO_LINE));
        if !covered {
            return Err(Error::Cache("some point pair lies on no line".into()));
        }
        let mut g = Geometry {
            field,
            q,
            points,
            line_gens,
            line_pts,
            plane_pts: Vec::new(),
            pair_to_line,
            point_lines: Vec::new(),
        };
        g.fill_derived();
        Ok(g)
    }

    fn fill_derived(&mut self) {
        let np = self.points.len();
        let per_point = self.q * self.q + self.q + 1;
        let mut point_lines = vec![Vec::with_capacity(per_point); np];
        for l in 0..self.num_lines() {
            for &p in self.line_points(l) {
                point_lines[p as usize].push(l as u32);
            }
        }
        self.point_lines = point_lines.into_iter().flatten().collect();

        // plane i has normal vector points[i]
        let mut plane_pts = Vec::with_capacity(np * per_point);
        for normal in &self.points {
            for (j, x) in self.points.iter().enumerate() {
                if dot(normal, x, &self.field).is_zero() {
                    plane_pts.push(j as u32);
                }
            }
        }
        self.plane_pts = plane_pts;
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    pub fn n(&self) -> u32 {
        self.field.n()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn num_lines(&self) -> usize {
        self.line_gens.len()
    }

    pub fn num_planes(&self) -> usize {
        self.points.len()
    }

    /// Points per line.
    pub fn line_size(&self) -> usize {
        self.q + 1
    }

    /// Points per plane, also lines per point.
    pub fn plane_size(&self) -> usize {
        self.q * self.q + self.q + 1
    }

    pub fn point(&self, p: usize) -> &Vec4 {
        &self.points[p]
    }

    pub fn points(&self) -> &[Vec4] {
        &self.points
    }

    /// Index of the point spanned by a nonzero vector.
    pub fn point_index(&self, v: &Vec4) -> Option<usize> {
        let v = normalize_vec(v, &self.field)?;
        Some(normalized_index(self.q, &v))
    }

    pub fn line_points(&self, l: usize) -> &[u32] {
        let k = self.q + 1;
        &self.line_pts[l * k..(l + 1) * k]
    }

    pub fn line_gens(&self, l: usize) -> (usize, usize) {
        let (a, b) = self.line_gens[l];
        (a as usize, b as usize)
    }

    pub fn lines_through(&self, p: usize) -> &[u32] {
        let k = self.plane_size();
        &self.point_lines[p * k..(p + 1) * k]
    }

    pub fn plane_normal(&self, h: usize) -> &Vec4 {
        &self.points[h]
    }

    pub fn plane_points(&self, h: usize) -> &[u32] {
        let k = self.plane_size();
        &self.plane_pts[h * k..(h + 1) * k]
    }

    /// Index of the plane {x : a . x = 0}.
    pub fn plane_index(&self, normal: &Vec4) -> Option<usize> {
        self.point_index(normal)
    }

    pub fn line_through(&self, p1: usize, p2: usize) -> Result<usize> {
        if p1 == p2 {
            return Err(Error::SamePoint);
        }
        Ok(self.pair_to_line[p1 * self.points.len() + p2] as usize)
    }

    /// Line spanned by two independent vectors.
    pub fn line_spanned(&self, u: &Vec4, v: &Vec4) -> Option<usize> {
        let a = self.point_index(u)?;
        let b = self.point_index(v)?;
        self.line_through(a, b).ok()
    }

    pub fn is_on_line(&self, p: usize, l: usize) -> bool {
        self.line_points(l).binary_search(&(p as u32)).is_ok()
    }

    pub fn is_collinear(&self, p1: usize, p2: usize, p3: usize) -> Result<bool> {
        if p1 == p2 || p1 == p3 || p2 == p3 {
            return Err(Error::DuplicatePoint);
        }
        let mut rows = vec![
            self.points[p1].to_vec(),
            self.points[p2].to_vec(),
            self.points[p3].to_vec(),
        ];
        Ok(row_reduce(&mut rows, &self.field).len() <= 2)
    }

    /// Common point of two lines, if any.
    pub fn meet(&self, l1: usize, l2: usize) -> Option<usize> {
        let (a, b) = (self.line_points(l1), self.line_points(l2));
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return Some(a[i] as usize),
            }
        }
        None
    }

    pub fn are_skew(&self, l1: usize, l2: usize) -> bool {
        l1 != l2 && self.meet(l1, l2).is_none()
    }

    fn check_skew(&self, ls: &[usize]) -> Result<()> {
        for (i, &a) in ls.iter().enumerate() {
            for &b in &ls[i + 1..] {
                if !self.are_skew(a, b) {
                    return Err(Error::NotSkew(a, b));
                }
            }
        }
        Ok(())
    }

    /// All lines meeting each of three pairwise skew lines, sorted.
    pub fn transversals(&self, l1: usize, l2: usize, l3: usize) -> Result<Vec<usize>> {
        self.check_skew(&[l1, l2, l3])?;
        let mut out = Vec::with_capacity(self.q + 1);
        for &x in self.line_points(l1) {
            // exactly one point y of l3 makes the line xy meet l2
            for &y in self.line_points(l3) {
                let t = self.pair_to_line[x as usize * self.points.len() + y as usize] as usize;
                if self.meet(t, l2).is_some() {
                    out.push(t);
                    break;
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// The regulus through three pairwise skew lines and its opposite.
    pub fn regulus(&self, l1: usize, l2: usize, l3: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        let opp = self.transversals(l1, l2, l3)?;
        let reg = self.transversals(opp[0], opp[1], opp[2])?;
        Ok((reg, opp))
    }

    /// Permutation of point indices induced by an invertible matrix.
    pub fn point_permutation(&self, m: &Mat4) -> Vec<u32> {
        self.points
            .iter()
            .map(|v| {
                self.point_index(&m.apply(v, &self.field))
                    .expect("matrix is invertible") as u32
            })
            .collect()
    }

    /// Image of a line under a point permutation that preserves lines.
    pub fn line_image(&self, perm: &[u32], l: usize) -> usize {
        let (a, b) = self.line_gens(l);
        self.pair_to_line[perm[a] as usize * self.points.len() + perm[b] as usize] as usize
    }
}

/// Position of a normalized vector in the lexicographic point order.
fn normalized_index(q: usize, v: &Vec4) -> usize {
    let d = |e: FieldElem| e.0 as usize;
    if v[0] == FieldElem::ONE {
        1 + q + q * q + d(v[1]) * q * q + d(v[2]) * q + d(v[3])
    } else if v[1] == FieldElem::ONE {
        1 + q + d(v[2]) * q + d(v[3])
    } else if v[2] == FieldElem::ONE {
        1 + d(v[3])
    } else {
        0
    }
}

fn enumerate_points(f: &FieldCtx) -> Vec<Vec4> {
    let (zero, one) = (FieldElem::ZERO, FieldElem::ONE);
    let mut pts = vec![[zero, zero, zero, one]];
    for c in f.elements() {
        pts.push([zero, zero, one, c]);
    }
    for b in f.elements() {
        for c in f.elements() {
            pts.push([zero, one, b, c]);
        }
    }
    for a in f.elements() {
        for b in f.elements() {
            for c in f.elements() {
                pts.push([one, a, b, c]);
            }
        }
    }
    pts
}

/// Sorted point indices of the line through two points.
fn span_points(f: &FieldCtx, u: &Vec4, v: &Vec4, out: &mut Vec<u32>) {
    let q = f.order() as usize;
    let index = |w: &Vec4| normalized_index(q, &normalize_vec(w, f).expect("nonzero")) as u32;
    out.clear();
    out.push(index(v));
    for lambda in f.elements() {
        let w: Vec4 = std::array::from_fn(|i| u[i] + f.mul(lambda, v[i]));
        out.push(index(&w));
    }
    out.sort_unstable();
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(q: usize) -> (usize, usize) {
        ((q * q + 1) * (q + 1), (q * q + 1) * (q * q + q + 1))
    }

    #[test]
    fn sizes() {
        let g = Geometry::build(1, false).unwrap();
        assert_eq!((g.num_points(), g.num_lines()), (15, 35));
        let g = Geometry::build(2, false).unwrap();
        assert_eq!((g.num_points(), g.num_lines(), g.num_planes()), (85, 357, 85));
        assert_eq!((g.num_points(), g.num_lines()), counts(4));
    }

    #[test]
    fn size_guard() {
        assert_eq!(
            Geometry::build(9, false).unwrap_err(),
            Error::SizeGuard { n: 9, guard: 8 }
        );
    }

    #[test]
    fn point_indexing_matches_enumeration() {
        let g = Geometry::build(2, false).unwrap();
        for (i, p) in g.points().iter().enumerate() {
            assert_eq!(g.point_index(p), Some(i));
            let scaled = p.map(|e| g.field().mul(e, FieldElem(3)));
            assert_eq!(g.point_index(&scaled), Some(i));
        }
        assert!(g.points().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g.point_index(&[FieldElem::ZERO; 4]), None);
    }

    #[test]
    fn line_through_contract() {
        let g = Geometry::build(1, false).unwrap();
        assert_eq!(g.line_through(3, 3), Err(Error::SamePoint));
        for a in 0..g.num_points() {
            for b in 0..g.num_points() {
                if a == b {
                    continue;
                }
                let l = g.line_through(a, b).unwrap();
                assert_eq!(l, g.line_through(b, a).unwrap());
                assert!(g.is_on_line(a, l) && g.is_on_line(b, l));
                assert_eq!(g.line_points(l).len(), 3);
            }
        }
    }

    #[test]
    fn collinearity() {
        let g = Geometry::build(2, false).unwrap();
        let pts = g.line_points(10).to_vec();
        assert!(g.is_collinear(pts[0] as usize, pts[1] as usize, pts[2] as usize).unwrap());
        let off = (0..g.num_points()).find(|&p| !g.is_on_line(p, 10)).unwrap();
        assert!(!g.is_collinear(pts[0] as usize, pts[1] as usize, off).unwrap());
        assert_eq!(g.is_collinear(1, 1, 2), Err(Error::DuplicatePoint));
    }

    #[test]
    fn every_line_in_q_plus_one_planes_and_planes_meet_lines_correctly() {
        let g = Geometry::build(2, false).unwrap();
        let q = g.q();
        for l in 0..g.num_lines() {
            let mut containing = 0;
            for h in 0..g.num_planes() {
                let plane = g.plane_points(h);
                let k = g
                    .line_points(l)
                    .iter()
                    .filter(|p| plane.binary_search(p).is_ok())
                    .count();
                assert!(k == 1 || k == q + 1);
                if k == q + 1 {
                    containing += 1;
                }
            }
            assert_eq!(containing, q + 1);
        }
    }

    #[test]
    fn transversals_and_regulus() {
        let g = Geometry::build(2, false).unwrap();
        let l1 = 0;
        let l2 = (0..g.num_lines()).find(|&l| g.are_skew(l1, l)).unwrap();
        let l3 = (0..g.num_lines())
            .find(|&l| g.are_skew(l1, l) && g.are_skew(l2, l))
            .unwrap();
        let t = g.transversals(l1, l2, l3).unwrap();
        assert_eq!(t.len(), 5);
        for (i, &a) in t.iter().enumerate() {
            for &b in &t[i + 1..] {
                assert!(g.are_skew(a, b));
            }
        }
        let (r, opp) = g.regulus(l1, l2, l3).unwrap();
        assert_eq!(opp, t);
        assert_eq!(r.len(), 5);
        assert!(r.contains(&l1) && r.contains(&l2) && r.contains(&l3));
        let (r2, opp2) = g.regulus(r[1], r[3], r[4]).unwrap();
        assert_eq!((r2, opp2), (r.clone(), t));
        let meeting = g.line_through(g.line_points(l1)[0] as usize, g.line_points(l2)[0] as usize).unwrap();
        assert!(matches!(g.transversals(l1, l2, meeting), Err(Error::NotSkew(..))));
    }
}
