//! Linear and affine flats in canonical form.
//!
//! A linear flat is stored as the reduced row-echelon basis of its span, so
//! two flats are equal iff their representations are identical. An affine
//! flat adds the canonical base point: the orthogonal projection of the
//! origin onto the flat.

use serde::{Deserialize, Serialize};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{self, is_zero_vec, rref, sub_vec, Mat};
use crate::rational::Rat;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LinearFlat {
    dim: usize,
    ambient: usize,
    /// Reduced row-echelon basis rows; unique per subspace.
    #[serde(with = "crate::rational::serde_rat_mat")]
    generators: Mat,
}

impl LinearFlat {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn generators(&self) -> &Mat {
        &self.generators
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        in_row_space(&self.generators, x)
    }

    /// Extends the flat to dimension `k` by adjoining standard basis
    /// directions in index order. Deterministic.
    pub fn padded_to(&self, k: usize) -> Result<LinearFlat> {
        if k < self.dim || k > self.ambient {
            return Err(Error::ParamOutOfRange(format!(
                "cannot pad a {}-flat to dimension {k}",
                self.dim
            )));
        }
        let mut gens = self.generators.clone();
        for i in 0..self.ambient {
            if gens.len() == k {
                break;
            }
            let mut e = vec![Rat::zero(); self.ambient];
            e[i] = Rat::from_integer(1.into());
            if !in_row_space(&gens, &e) {
                gens.push(e);
                gens = rref(&gens);
            }
        }
        canonical_linear_flat(&gens, self.ambient)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AffineFlat {
    /// Projection of the origin onto the flat; the canonical representative.
    #[serde(with = "crate::rational::serde_rat_vec")]
    base: Vec<Rat>,
    direction: LinearFlat,
}

impl AffineFlat {
    pub fn dim(&self) -> usize {
        self.direction.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.direction.ambient_dim()
    }

    pub fn base_point(&self) -> &[Rat] {
        &self.base
    }

    pub fn direction(&self) -> &LinearFlat {
        &self.direction
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        let shifted = sub_vec(x, &self.base);
        self.direction.contains(&shifted)
    }
}

fn in_row_space(rref_rows: &Mat, x: &[Rat]) -> bool {
    // Reduce x by the echelon rows and test for a zero remainder.
    let mut v = x.to_vec();
    for row in rref_rows {
        let pivot = row.iter().position(|c| !c.is_zero()).unwrap();
        if v[pivot].is_zero() {
            continue;
        }
        let f = v[pivot].clone();
        for (vi, ri) in v.iter_mut().zip(row) {
            let t = ri * &f;
            *vi = &*vi - &t;
        }
    }
    is_zero_vec(&v)
}

/// Canonicalizes a generator list: dependent generators are dropped, the
/// result is the unique echelon basis of the span. The zero flat (no
/// generators) is allowed and has dimension 0.
pub fn canonical_linear_flat(generators: &Mat, ambient: usize) -> Result<LinearFlat> {
    for g in generators {
        if g.len() != ambient {
            return Err(Error::ParamOutOfRange("generator length mismatch".into()));
        }
    }
    let rows = rref(generators);
    Ok(LinearFlat { dim: rows.len(), ambient, generators: rows })
}

pub fn linear_flat_from_points(points: &[Vec<Rat>], ambient: usize) -> Result<LinearFlat> {
    canonical_linear_flat(&points.to_vec(), ambient)
}

/// Affine flat through `point` with the given direction generators.
pub fn canonical_affine_flat(point: &[Rat], generators: &Mat, ambient: usize) -> Result<AffineFlat> {
    let direction = canonical_linear_flat(generators, ambient)?;
    // base = point - proj_span(point), computed against an orthogonalized
    // copy of the direction basis.
    let mut ortho: Mat = Vec::new();
    for g in direction.generators() {
        let mut v = g.clone();
        for u in &ortho {
            let c = &linalg::dot(&v, u) / &linalg::dot(u, u);
            let scaled = linalg::scale_vec(u, &c);
            v = sub_vec(&v, &scaled);
        }
        if !is_zero_vec(&v) {
            ortho.push(v);
        }
    }
    let mut base = point.to_vec();
    for u in &ortho {
        let c = &linalg::dot(&base, u) / &linalg::dot(u, u);
        let scaled = linalg::scale_vec(u, &c);
        base = sub_vec(&base, &scaled);
    }
    Ok(AffineFlat { base, direction })
}

/// Affine hull of a nonempty point set, canonicalized.
pub fn affine_hull(points: &[Vec<Rat>], ambient: usize) -> Result<AffineFlat> {
    let Some(first) = points.first() else {
        return Err(Error::ParamOutOfRange("affine hull of an empty set".into()));
    };
    let dirs: Mat = points[1..].iter().map(|p| sub_vec(p, first)).collect();
    canonical_affine_flat(first, &dirs, ambient)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    fn v(xs: &[i64]) -> Vec<Rat> {
        xs.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn dependent_generators_are_dropped() {
        let f = canonical_linear_flat(&vec![v(&[2, 0]), v(&[3, 0])], 2).unwrap();
        assert_eq!(f.dim(), 1);
        assert_eq!(f.generators(), &vec![v(&[1, 0])]);
    }

    #[test]
    fn independent_generators_span_everything() {
        let f = canonical_linear_flat(&vec![v(&[1, 1]), v(&[1, -1])], 2).unwrap();
        assert_eq!(f.dim(), 2);
    }

    #[test]
    fn canonicalization_is_permutation_and_scale_invariant() {
        let a = canonical_linear_flat(&vec![v(&[1, 2, 0]), v(&[0, 0, 3])], 3).unwrap();
        let b = canonical_linear_flat(&vec![v(&[0, 0, -1]), v(&[2, 4, 3])], 3).unwrap();
        assert_eq!(a, b);
        // Idempotent.
        let again = canonical_linear_flat(a.generators(), 3).unwrap();
        assert_eq!(a, again);
    }

    #[test]
    fn affine_base_point_is_origin_projection() {
        // Line y = 1 in the plane: base point (0, 1).
        let f = canonical_affine_flat(&v(&[3, 1]), &vec![v(&[1, 0])], 2).unwrap();
        assert_eq!(f.base_point(), &v(&[0, 1])[..]);
        assert!(f.contains(&v(&[-5, 1])));
        assert!(!f.contains(&v(&[0, 0])));
        // Same flat from a different representative point.
        let g = canonical_affine_flat(&v(&[-2, 1]), &vec![v(&[-4, 0])], 2).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn affine_hull_of_two_points() {
        let f = affine_hull(&[v(&[1, 0]), v(&[0, 1])], 2).unwrap();
        assert_eq!(f.dim(), 1);
        assert!(f.contains(&[ratio(1, 2), ratio(1, 2)]));
    }

    #[test]
    fn padding_adds_standard_directions() {
        let f = canonical_linear_flat(&vec![v(&[0, 1, 0])], 3).unwrap();
        let p = f.padded_to(2).unwrap();
        assert_eq!(p.dim(), 2);
        assert!(p.contains(&v(&[1, 0, 0])));
        assert!(f.padded_to(4).is_err());
    }
}
