//! Alternating forms on V(4,q), the quadrangle W(q) of isotropic lines,
//! polarity of lines, and dual grids {m, m^perp}.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfield::{FieldCtx, FieldElem};
use crate::linalg::{nullspace, Mat4, Vec4};
use crate::ovoids::Ovoid;
use crate::projspace::Geometry;

/// Positions of the six free entries of an alternating 4x4 matrix.
const UPPER: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// A nondegenerate alternating form, stored as its Gram matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymplecticForm {
    gram: Mat4,
}

/// The point set m u m^perp of a non-isotropic line and its polar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DualGrid {
    pub m: usize,
    pub m_perp: usize,
}

impl DualGrid {
    pub fn points(&self, g: &Geometry) -> Vec<usize> {
        let mut pts: Vec<usize> = g
            .line_points(self.m)
            .iter()
            .chain(g.line_points(self.m_perp))
            .map(|&p| p as usize)
            .collect();
        pts.sort_unstable();
        pts
    }
}

/// Pfaffian of an alternating 4x4 matrix; the determinant is its square.
fn pfaffian(m: &Mat4, f: &FieldCtx) -> FieldElem {
    let a = &m.0;
    f.mul(a[0][1], a[2][3]) + f.mul(a[0][2], a[1][3]) + f.mul(a[0][3], a[1][2])
}

fn from_upper(c: &[FieldElem]) -> Mat4 {
    let mut m = Mat4::zero();
    for (k, &(i, j)) in UPPER.iter().enumerate() {
        m.0[i][j] = c[k];
        m.0[j][i] = c[k];
    }
    m
}

impl SymplecticForm {
    /// x1 y4 + x2 y3 + x3 y2 + x4 y1.
    pub fn standard() -> Self {
        let mut gram = Mat4::zero();
        for i in 0..4 {
            gram.0[i][3 - i] = FieldElem::ONE;
        }
        SymplecticForm { gram }
    }

    pub fn from_gram(gram: Mat4, f: &FieldCtx) -> Result<Self> {
        for i in 0..4 {
            if !gram.0[i][i].is_zero() {
                return Err(Error::NoPolarity("diagonal entry is nonzero".into()));
            }
            for j in 0..4 {
                if gram.0[i][j] != gram.0[j][i] {
                    return Err(Error::NoPolarity("matrix is not symmetric".into()));
                }
            }
        }
        if pfaffian(&gram, f).is_zero() {
            return Err(Error::NoPolarity("form is degenerate".into()));
        }
        Ok(SymplecticForm { gram })
    }

    pub fn gram(&self) -> &Mat4 {
        &self.gram
    }

    pub fn is_nondegenerate(&self, f: &FieldCtx) -> bool {
        !pfaffian(&self.gram, f).is_zero()
    }

    pub fn eval(&self, x: &Vec4, y: &Vec4, f: &FieldCtx) -> FieldElem {
        let gy = self.gram.apply(y, f);
        (0..4).fold(FieldElem::ZERO, |acc, i| acc + f.mul(x[i], gy[i]))
    }

    pub fn is_isotropic_line(&self, g: &Geometry, l: usize) -> bool {
        let (a, b) = g.line_gens(l);
        self.eval(g.point(a), g.point(b), g.field()).is_zero()
    }

    pub fn isotropic_lines(&self, g: &Geometry) -> Vec<usize> {
        (0..g.num_lines()).filter(|&l| self.is_isotropic_line(g, l)).collect()
    }

    /// Plane index of x^perp.
    pub fn perp_point(&self, g: &Geometry, p: usize) -> usize {
        let normal = self.gram.apply(g.point(p), g.field());
        g.plane_index(&normal).expect("nondegenerate form")
    }

    pub fn perp_line(&self, g: &Geometry, l: usize) -> usize {
        let f = g.field();
        let (a, b) = g.line_gens(l);
        let rows = vec![
            self.gram.apply(g.point(a), f).to_vec(),
            self.gram.apply(g.point(b), f).to_vec(),
        ];
        let ns = nullspace(&rows, 4, f);
        debug_assert_eq!(ns.len(), 2);
        let u: Vec4 = std::array::from_fn(|i| ns[0][i]);
        let v: Vec4 = std::array::from_fn(|i| ns[1][i]);
        g.line_spanned(&u, &v).expect("polar of a line is a line")
    }

    /// perp_line for every line index.
    pub fn perp_table(&self, g: &Geometry) -> Vec<u32> {
        (0..g.num_lines()).map(|l| self.perp_line(g, l) as u32).collect()
    }

    /// All dual grids, ordered by their smaller line index.
    pub fn enumerate_dual_grids(&self, g: &Geometry) -> Vec<DualGrid> {
        (0..g.num_lines())
            .filter_map(|m| {
                let mp = self.perp_line(g, m);
                (mp > m).then_some(DualGrid { m, m_perp: mp })
            })
            .collect()
    }

    /// Apply a coordinate change: the form (x, y) -> B(M^-1 x, M^-1 y),
    /// given M^-1, so that isotropic lines map along with M.
    pub fn transformed_by_inverse(&self, m_inv: &Mat4, f: &FieldCtx) -> Self {
        let gram = m_inv.transpose().mul(&self.gram, f).mul(m_inv, f);
        SymplecticForm { gram }
    }
}

/// Basis of the space of alternating forms under which every given line is
/// totally isotropic.
pub fn forms_vanishing_on(g: &Geometry, lines: &[usize]) -> Vec<Mat4> {
    let f = g.field();
    let rows: Vec<Vec<FieldElem>> = lines
        .iter()
        .map(|&l| {
            let (a, b) = g.line_gens(l);
            let (u, v) = (g.point(a), g.point(b));
            UPPER
                .iter()
                .map(|&(i, j)| f.mul(u[i], v[j]) + f.mul(u[j], v[i]))
                .collect()
        })
        .collect();
    nullspace(&rows, 6, f).iter().map(|c| from_upper(c)).collect()
}

/// The polarity x -> pi_x determined by the tangent lines of an ovoid.
pub fn polarity_from_ovoid(theta: &Ovoid, g: &Geometry) -> Result<SymplecticForm> {
    if !theta.is_ovoid(g) {
        return Err(Error::NoPolarity("input is not an ovoid".into()));
    }
    let tangents = theta.tangent_lines(g)?;
    polarity_from_lines(g, &tangents)
}

/// The unique nondegenerate alternating form whose isotropic lines include
/// the given ones, normalized so its first nonzero entry is 1.
pub fn polarity_from_lines(g: &Geometry, lines: &[usize]) -> Result<SymplecticForm> {
    let f = g.field();
    let sols = forms_vanishing_on(g, lines);
    if sols.len() != 1 {
        return Err(Error::NoPolarity(format!(
            "solution space has dimension {}",
            sols.len()
        )));
    }
    SymplecticForm::from_gram(sols[0].normalized(f), f)
}
