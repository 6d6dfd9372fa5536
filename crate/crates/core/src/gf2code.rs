//! Binary codes over the point set: bit vectors, row spans with cached
//! echelon forms, the codes C (lines of W(q)) and D (dual grids), the
//! pairwise-sum witness for the radical of D, and T-orbit sums.

use std::fmt::Write as _;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fibration::SingerContext;
use crate::projspace::Geometry;
use crate::symplectic::{DualGrid, SymplecticForm};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len {
            v.set(i);
        }
        v
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, idx: I) -> Result<Self> {
        let mut v = Self::zeros(len);
        for i in idx {
            if i >= len {
                return Err(Error::IndexOutOfRange { index: i, len });
            }
            v.set(i);
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Size of the intersection of supports.
    pub fn overlap(&self, other: &BitVec) -> usize {
        self.words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Standard dot product over GF(2).
    pub fn dot(&self, other: &BitVec) -> bool {
        self.overlap(other) % 2 == 1
    }

    fn lowest_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    /// Hex string, least significant word first.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.words.len() * 16);
        for w in &self.words {
            let _ = write!(s, "{w:016x}");
        }
        s
    }
}

/// Reduced row basis: row k has no bits at the pivots of rows 0..k.
#[derive(Clone, Debug, Default)]
pub struct EchelonBasis {
    rows: Vec<BitVec>,
    pivots: Vec<usize>,
}

impl EchelonBasis {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn reduce(&self, v: &BitVec) -> BitVec {
        let mut v = v.clone();
        for (row, &p) in self.rows.iter().zip(self.pivots.iter()) {
            if v.get(p) {
                v.xor_assign(row);
            }
        }
        v
    }

    /// Add `v` to the span; true if it was independent.
    pub fn insert(&mut self, v: &BitVec) -> bool {
        let r = self.reduce(v);
        match r.lowest_one() {
            Some(p) => {
                self.rows.push(r);
                self.pivots.push(p);
                true
            }
            None => false,
        }
    }
}

/// A list of rows with a lazily computed echelon basis.
#[derive(Debug, Default)]
pub struct BitMat {
    width: usize,
    rows: Vec<BitVec>,
    echelon: OnceLock<EchelonBasis>,
}

impl Clone for BitMat {
    fn clone(&self) -> Self {
        BitMat {
            width: self.width,
            rows: self.rows.clone(),
            echelon: OnceLock::new(),
        }
    }
}

impl BitMat {
    pub fn new(width: usize) -> Self {
        BitMat {
            width,
            rows: Vec::new(),
            echelon: OnceLock::new(),
        }
    }

    pub fn from_rows(width: usize, rows: Vec<BitVec>) -> Result<Self> {
        let mut m = Self::new(width);
        for r in rows {
            m.push(r)?;
        }
        Ok(m)
    }

    pub fn push(&mut self, row: BitVec) -> Result<()> {
        if row.len() != self.width {
            return Err(Error::LengthMismatch {
                expected: self.width,
                got: row.len(),
            });
        }
        self.rows.push(row);
        self.echelon = OnceLock::new();
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn echelon(&self) -> &EchelonBasis {
        self.echelon.get_or_init(|| {
            let mut e = EchelonBasis::default();
            for r in &self.rows {
                e.insert(r);
            }
            e
        })
    }

    pub fn rank(&self) -> usize {
        self.echelon().rank()
    }

    pub fn in_span(&self, v: &BitVec) -> Result<bool> {
        if v.len() != self.width {
            return Err(Error::LengthMismatch {
                expected: self.width,
                got: v.len(),
            });
        }
        Ok(self.echelon().reduce(v).is_zero())
    }
}

pub fn char_vector(pts: &[usize], g: &Geometry) -> Result<BitVec> {
    BitVec::from_indices(g.num_points(), pts.iter().copied())
}

pub fn line_vector(g: &Geometry, l: usize) -> BitVec {
    BitVec::from_indices(g.num_points(), g.line_points(l).iter().map(|&p| p as usize))
        .expect("line points are in range")
}

pub fn span_rank(m: &BitMat) -> usize {
    m.rank()
}

/// Rows: the isotropic lines of the form.
pub fn code_c(form: &SymplecticForm, g: &Geometry) -> BitMat {
    let rows = form
        .isotropic_lines(g)
        .into_iter()
        .map(|l| line_vector(g, l))
        .collect();
    BitMat::from_rows(g.num_points(), rows).expect("widths agree")
}

pub fn dual_grid_vector(d: &DualGrid, g: &Geometry) -> BitVec {
    line_vector(g, d.m).xor(&line_vector(g, d.m_perp))
}

/// Rows: the dual grids of the form.
pub fn code_d(form: &SymplecticForm, g: &Geometry) -> BitMat {
    code_d_from_grids(&form.enumerate_dual_grids(g), g)
}

pub fn code_d_from_grids(grids: &[DualGrid], g: &Geometry) -> BitMat {
    let rows = grids.iter().map(|d| dual_grid_vector(d, g)).collect();
    BitMat::from_rows(g.num_points(), rows).expect("widths agree")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadicalCheck {
    pub dim_d: usize,
    pub dim_sumspan: usize,
    pub codim: usize,
}

/// The span of {row_0 + row_i} (equal to the span of all pairwise sums)
/// and its codimension in the row span of `d`.
pub fn pairwise_sum_span(d: &BitMat) -> Result<BitMat> {
    let first = d.rows().first().ok_or(Error::EmptyMatrix)?;
    let rows = d.rows()[1..].iter().map(|r| r.xor(first)).collect();
    BitMat::from_rows(d.width(), rows)
}

pub fn radical_codim_check(d: &BitMat) -> Result<RadicalCheck> {
    let sums = pairwise_sum_span(d)?;
    let dim_d = d.rank();
    let dim_sumspan = sums.rank();
    Ok(RadicalCheck {
        dim_d,
        dim_sumspan,
        codim: dim_d - dim_sumspan,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSummary {
    pub dim_c: usize,
    pub dim_c_perp: usize,
    pub dim_d: usize,
    pub dim_pairwise_sum_span: usize,
    pub radical_codim: usize,
}

pub fn code_summary(c: &BitMat, d: &BitMat) -> Result<CodeSummary> {
    let rc = radical_codim_check(d)?;
    let dim_c = c.rank();
    Ok(CodeSummary {
        dim_c,
        dim_c_perp: c.width() - dim_c,
        dim_d: rc.dim_d,
        dim_pairwise_sum_span: rc.dim_sumspan,
        radical_codim: rc.codim,
    })
}

/// sigma(w) = sum over t in T of t(w).
pub fn t_orbit_sum_vector(w: &BitVec, sc: &SingerContext) -> BitVec {
    let perm = sc.t_perm();
    let mut acc = BitVec::zeros(w.len());
    let mut cur: Vec<usize> = w.ones_iter().collect();
    for _ in 0..sc.t_order() {
        for &p in &cur {
            acc.flip(p);
        }
        for p in cur.iter_mut() {
            *p = perm[*p] as usize;
        }
    }
    acc
}

/// sigma applied to the characteristic vector of a line.
pub fn t_orbit_sum(l: usize, sc: &SingerContext, g: &Geometry) -> BitVec {
    t_orbit_sum_vector(&line_vector(g, l), sc)
}
