//! Lattice bases with exact rational coordinates.
//!
//! A [`LatticeBasis`] stores `rank` linearly independent vectors living in
//! an ambient space of dimension `ambient_dim >= rank`, so sublattices
//! produced by hyperplane sections keep their ambient coordinates and
//! compose across recursion levels without re-parametrization.

use serde::{Deserialize, Serialize};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{
    self, clear_denominators, det, gram, hnf_rows, int_to_rat_vec, integer_kernel, inverse,
    mat_vec, rref, transpose, Mat,
};
use crate::rational::{fmt_rat, gcd_vec, Int, Rat};

/// Hard cap on dimension: the enumeration kernels are exponential in it.
pub const MAX_DIM: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBasis {
    #[serde(rename = "dim")]
    ambient: usize,
    /// Basis vectors, one per row, each of length `ambient`.
    #[serde(rename = "basis", with = "crate::rational::serde_rat_mat")]
    vectors: Vec<Vec<Rat>>,
}

impl LatticeBasis {
    pub fn new(vectors: Vec<Vec<Rat>>, ambient: usize) -> Result<Self> {
        if ambient == 0 || ambient > MAX_DIM {
            return Err(Error::DimensionTooLarge(ambient, MAX_DIM));
        }
        if vectors.is_empty() || vectors.len() > ambient {
            return Err(Error::SingularBasis);
        }
        if vectors.iter().any(|v| v.len() != ambient) {
            return Err(Error::SingularBasis);
        }
        let g = gram(&vectors, None);
        if det(&g).is_zero() {
            return Err(Error::SingularBasis);
        }
        Ok(Self { ambient, vectors })
    }

    /// The integer lattice Z^d.
    pub fn standard(d: usize) -> Self {
        let vectors = (0..d)
            .map(|i| (0..d).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect())
            .collect();
        Self { ambient: d, vectors }
    }

    pub fn from_integer_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let ambient = rows.first().map(|r| r.len()).unwrap_or(0);
        let vectors = rows
            .iter()
            .map(|r| r.iter().map(|&x| Rat::from_integer(Int::from(x))).collect())
            .collect();
        Self::new(vectors, ambient)
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.ambient
    }

    pub fn vectors(&self) -> &[Vec<Rat>] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &[Rat] {
        &self.vectors[i]
    }

    /// Matrix with the basis vectors as columns (full-rank case).
    fn column_matrix(&self) -> Mat {
        transpose(&self.vectors)
    }

    /// |det B| for a full-rank lattice.
    pub fn determinant(&self) -> Result<Rat> {
        if !self.is_full_rank() {
            return Err(Error::SingularBasis);
        }
        Ok(det(&self.column_matrix()).abs())
    }

    /// Gram determinant det(V V^T): the squared covolume, defined for any
    /// rank. Equals determinant^2 when full-rank.
    pub fn gram_det(&self) -> Rat {
        det(&gram(&self.vectors, None))
    }

    /// Dual basis within the span: vectors d_i in span(V) with
    /// <d_i, b_j> = delta_ij. Full-rank case reduces to (B^-1)^T.
    pub fn dual(&self) -> LatticeBasis {
        let g = gram(&self.vectors, None);
        let ginv = inverse(&g).expect("basis Gram matrix is invertible");
        let vectors = ginv
            .iter()
            .map(|coeffs| {
                let mut acc = vec![Rat::zero(); self.ambient];
                for (c, b) in coeffs.iter().zip(&self.vectors) {
                    for (a, x) in acc.iter_mut().zip(b) {
                        *a += c * x;
                    }
                }
                acc
            })
            .collect();
        LatticeBasis { ambient: self.ambient, vectors }
    }

    /// Rational coordinates of `v` in this basis, or `None` when `v` lies
    /// outside the span.
    pub fn span_coords(&self, v: &[Rat]) -> Option<Vec<Rat>> {
        let g = gram(&self.vectors, None);
        let ginv = inverse(&g)?;
        let proj: Vec<Rat> = self.vectors.iter().map(|b| linalg::dot(b, v)).collect();
        let coords = mat_vec(&ginv, &proj);
        // Verify v = sum coords_i b_i exactly (rejects off-span inputs).
        let mut recon = vec![Rat::zero(); self.ambient];
        for (c, b) in coords.iter().zip(&self.vectors) {
            for (r, x) in recon.iter_mut().zip(b) {
                *r += c * x;
            }
        }
        if recon.iter().zip(v).all(|(a, b)| a == b) {
            Some(coords)
        } else {
            None
        }
    }

    /// Integer coordinates when `v` is a lattice point.
    pub fn lattice_coords(&self, v: &[Rat]) -> Option<Vec<Int>> {
        let coords = self.span_coords(v)?;
        let mut out = Vec::with_capacity(coords.len());
        for c in coords {
            if !c.denom().is_one() {
                return None;
            }
            out.push(c.numer().clone());
        }
        Some(out)
    }

    pub fn is_lattice_point(&self, v: &[Rat]) -> bool {
        self.lattice_coords(v).is_some()
    }

    /// Ambient vector of integer coordinates `a`: sum a_i b_i.
    pub fn point_from_coords(&self, coords: &[Int]) -> Vec<Rat> {
        let mut acc = vec![Rat::zero(); self.ambient];
        for (c, b) in coords.iter().zip(&self.vectors) {
            if c.is_zero() {
                continue;
            }
            let cr = Rat::from_integer(c.clone());
            for (a, x) in acc.iter_mut().zip(b) {
                *a += &cr * x;
            }
        }
        acc
    }

    /// True iff `v` is a lattice point whose coordinate gcd equals 1.
    pub fn is_primitive(&self, v: &[Rat]) -> Result<bool> {
        if v.iter().all(|x| x.is_zero()) {
            return Err(Error::ZeroVector);
        }
        let coords = self.lattice_coords(v).ok_or(Error::NotLatticePoint)?;
        Ok(gcd_vec(&coords).is_one())
    }

    /// Sublattice `{x in L : <x, z> = 0}` for `z` primitive in the dual.
    /// Computed as the integer kernel of the coordinate functional
    /// a -> <sum a_i b_i, z>; rank drops by exactly one.
    pub fn hyperplane_section(&self, z: &[Rat]) -> Result<LatticeBasis> {
        if z.iter().all(|x| x.is_zero()) {
            return Err(Error::ZeroVector);
        }
        // m_i = <b_i, z> must be integers (z in the dual lattice).
        let mut m = Vec::with_capacity(self.rank());
        for b in &self.vectors {
            let ip = linalg::dot(b, z);
            if !ip.denom().is_one() {
                return Err(Error::NotPrimitive);
            }
            m.push(ip.numer().clone());
        }
        if m.iter().all(|x| x.is_zero()) {
            return Err(Error::ZeroVector);
        }
        if !gcd_vec(&m).is_one() {
            return Err(Error::NotPrimitive);
        }
        let kernel = integer_kernel(&vec![m]);
        debug_assert_eq!(kernel.len(), self.rank() - 1);
        let vectors: Vec<Vec<Rat>> =
            kernel.iter().map(|a| self.point_from_coords(a)).collect();
        LatticeBasis::new(vectors, self.ambient)
    }

    /// Saturated sublattice `L ∩ span(w_1..w_r)` where the `w`s are given by
    /// integer coordinate vectors in this basis. The result has rank equal
    /// to the rank of the span and keeps ambient coordinates.
    pub fn sublattice_in_span(&self, span_coords: &[Vec<Int>]) -> Result<LatticeBasis> {
        let r = self.rank();
        let rows: Mat = span_coords.iter().map(|v| int_to_rat_vec(v)).collect();
        let reduced = rref(&rows);
        let span_rank = reduced.len();
        if span_rank == 0 {
            return Err(Error::ZeroVector);
        }
        if span_rank == r {
            return Ok(self.clone());
        }
        // Linear functionals vanishing exactly on the span: one per free
        // (non-pivot) column of the reduced generator matrix.
        let pivots: Vec<usize> = reduced
            .iter()
            .map(|row| row.iter().position(|x| !x.is_zero()).unwrap())
            .collect();
        let mut eqs: Vec<Vec<Int>> = Vec::new();
        for f in (0..r).filter(|c| !pivots.contains(c)) {
            let mut func = vec![Rat::zero(); r];
            func[f] = Rat::one();
            for (i, &p) in pivots.iter().enumerate() {
                func[p] = -reduced[i][f].clone();
            }
            eqs.push(clear_denominators(&func));
        }
        let kernel = integer_kernel(&eqs);
        debug_assert_eq!(kernel.len(), span_rank);
        let vectors: Vec<Vec<Rat>> =
            kernel.iter().map(|a| self.point_from_coords(a)).collect();
        LatticeBasis::new(vectors, self.ambient)
    }

    /// Lattice scaled by a positive rational factor.
    pub fn scale(&self, factor: &Rat) -> LatticeBasis {
        assert!(factor.is_positive());
        LatticeBasis {
            ambient: self.ambient,
            vectors: self
                .vectors
                .iter()
                .map(|v| v.iter().map(|x| x * factor).collect())
                .collect(),
        }
    }

    /// Replaces the basis by `U * V` for unimodular integer `U` (rows are
    /// integer combinations). The lattice is unchanged.
    pub fn transformed(&self, u: &[Vec<Int>]) -> LatticeBasis {
        let vectors = u.iter().map(|row| self.point_from_coords(row)).collect();
        LatticeBasis { ambient: self.ambient, vectors }
    }

    /// Canonical form `(denominator, integer HNF rows)`: two bases describe
    /// the same lattice iff their canonical forms are identical.
    pub fn canonical_form(&self) -> (Int, Vec<Vec<Int>>) {
        let mut lcm = Int::one();
        for v in &self.vectors {
            for x in v {
                lcm = num_integer::lcm(lcm, x.denom().clone());
            }
        }
        let int_rows: Vec<Vec<Int>> = self
            .vectors
            .iter()
            .map(|v| v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect())
            .collect();
        (lcm, hnf_rows(&int_rows))
    }

    pub fn same_lattice(&self, other: &LatticeBasis) -> bool {
        self.ambient == other.ambient && self.canonical_form() == other.canonical_form()
    }

    pub fn describe(&self) -> String {
        let rows: Vec<String> = self
            .vectors
            .iter()
            .map(|v| {
                let parts: Vec<String> = v.iter().map(fmt_rat).collect();
                format!("({})", parts.join(", "))
            })
            .collect();
        format!("[{}]", rows.join(", "))
    }
}
