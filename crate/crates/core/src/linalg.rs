//! Dense linear algebra over GF(q): 4x4 matrices for collineations and forms,
//! and row reduction of small systems (nullspaces for form and quadric fits).

use serde::{Deserialize, Serialize};

use crate::gfield::{FieldCtx, FieldElem};

pub type Vec4 = [FieldElem; 4];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mat4(pub [[FieldElem; 4]; 4]);

impl Mat4 {
    pub fn zero() -> Self {
        Mat4([[FieldElem::ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..4 {
            m.0[i][i] = FieldElem::ONE;
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(|e| e.is_zero())
    }

    pub fn transpose(&self) -> Self {
        Mat4(std::array::from_fn(|i| std::array::from_fn(|j| self.0[j][i])))
    }

    pub fn mul(&self, rhs: &Mat4, f: &FieldCtx) -> Mat4 {
        Mat4(std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                (0..4).fold(FieldElem::ZERO, |acc, k| acc + f.mul(self.0[i][k], rhs.0[k][j]))
            })
        }))
    }

    pub fn apply(&self, v: &Vec4, f: &FieldCtx) -> Vec4 {
        std::array::from_fn(|i| {
            (0..4).fold(FieldElem::ZERO, |acc, k| acc + f.mul(self.0[i][k], v[k]))
        })
    }

    pub fn scale(&self, c: FieldElem, f: &FieldCtx) -> Mat4 {
        Mat4(self.0.map(|row| row.map(|e| f.mul(c, e))))
    }

    pub fn add(&self, rhs: &Mat4) -> Mat4 {
        Mat4(std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j] + rhs.0[i][j])))
    }

    pub fn pow(&self, mut e: u64, f: &FieldCtx) -> Mat4 {
        let mut base = *self;
        let mut acc = Mat4::identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, f);
            }
            base = base.mul(&base, f);
            e >>= 1;
        }
        acc
    }

    pub fn rank(&self, f: &FieldCtx) -> usize {
        let mut rows: Vec<Vec<FieldElem>> = self.0.iter().map(|r| r.to_vec()).collect();
        row_reduce(&mut rows, f).len()
    }

    pub fn is_invertible(&self, f: &FieldCtx) -> bool {
        self.rank(f) == 4
    }

    /// Gauss-Jordan on [M | I].
    pub fn inverse(&self, f: &FieldCtx) -> Option<Mat4> {
        let mut rows: Vec<Vec<FieldElem>> = (0..4)
            .map(|i| {
                let mut r = self.0[i].to_vec();
                r.extend((0..4).map(|j| if i == j { FieldElem::ONE } else { FieldElem::ZERO }));
                r
            })
            .collect();
        let pivots = row_reduce(&mut rows, f);
        if pivots[..] != [0, 1, 2, 3] {
            return None;
        }
        Some(Mat4(std::array::from_fn(|i| std::array::from_fn(|j| rows[i][4 + j]))))
    }

    /// Rescale so the first nonzero entry in row-major order is 1; the
    /// canonical representative of the projective class.
    pub fn normalized(&self, f: &FieldCtx) -> Mat4 {
        match self.0.iter().flatten().find(|e| !e.is_zero()) {
            Some(&lead) => self.scale(f.inv(lead).expect("nonzero"), f),
            None => *self,
        }
    }
}

/// Row reduce in place to reduced row echelon form, dropping zero rows.
/// Returns the pivot column of each remaining row.
pub fn row_reduce(rows: &mut Vec<Vec<FieldElem>>, f: &FieldCtx) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = f.inv(rows[r][c]).expect("pivot is nonzero");
        for x in rows[r].iter_mut() {
            *x = f.mul(*x, inv);
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let factor = rows[i][c];
                for k in 0..ncols {
                    let sub = f.mul(factor, rows[r][k]);
                    rows[i][k] = rows[i][k] + sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

/// Basis of the right nullspace {x : A x = 0} for an `ncols`-column system,
/// one vector per free column, with a 1 in that column.
pub fn nullspace(rows: &[Vec<FieldElem>], ncols: usize, f: &FieldCtx) -> Vec<Vec<FieldElem>> {
    let mut rr: Vec<Vec<FieldElem>> = rows.to_vec();
    let pivots = row_reduce(&mut rr, f);
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![FieldElem::ZERO; ncols];
        v[free] = FieldElem::ONE;
        for (row, &pc) in rr.iter().zip(pivots.iter()) {
            // characteristic 2: -a = a
            v[pc] = row[free];
        }
        basis.push(v);
    }
    basis
}

/// Normalize a nonzero vector so its first nonzero entry is 1.
pub fn normalize_vec(v: &Vec4, f: &FieldCtx) -> Option<Vec4> {
    let lead = *v.iter().find(|e| !e.is_zero())?;
    let inv = f.inv(lead).ok()?;
    Some(v.map(|e| f.mul(e, inv)))
}

pub fn dot(a: &Vec4, b: &Vec4, f: &FieldCtx) -> FieldElem {
    (0..4).fold(FieldElem::ZERO, |acc, i| acc + f.mul(a[i], b[i]))
}
