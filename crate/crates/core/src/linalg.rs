//! Exact linear algebra over rationals and integers.
//!
//! Matrices are dense `Vec<Vec<_>>` in row-major order; dimensions stay at
//! most 8 in this crate, so simple Gaussian elimination is the right tool.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{gcd_vec, rat_of, Int, Rat};

pub type Mat = Vec<Vec<Rat>>;
pub type IntMat = Vec<Vec<Int>>;

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect())
        .collect()
}

pub fn int_identity(n: usize) -> IntMat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Int::one() } else { Int::zero() }).collect())
        .collect()
}

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len())
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let cols = if b.is_empty() { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    row.iter()
                        .zip(b.iter())
                        .map(|(x, brow)| x * &brow[j])
                        .fold(Rat::zero(), |acc, t| acc + t)
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &Mat, v: &[Rat]) -> Vec<Rat> {
    a.iter().map(|row| dot(row, v)).collect()
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).fold(Rat::zero(), |acc, t| acc + t)
}

pub fn int_dot(a: &[Int], b: &[Int]) -> Int {
    a.iter().zip(b).map(|(x, y)| x * y).fold(Int::zero(), |acc, t| acc + t)
}

pub fn scale_vec(v: &[Rat], c: &Rat) -> Vec<Rat> {
    v.iter().map(|x| x * c).collect()
}

pub fn add_vec(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub_vec(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn is_zero_vec(v: &[Rat]) -> bool {
    v.iter().all(|x| x.is_zero())
}

/// Determinant by fraction-free-ish Gaussian elimination (exact rationals).
pub fn det(m: &Mat) -> Rat {
    let n = m.len();
    if n == 0 {
        return Rat::one();
    }
    let mut a = m.to_vec();
    let mut result = Rat::one();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero());
        let Some(p) = pivot else { return Rat::zero() };
        if p != col {
            a.swap(p, col);
            result = -result;
        }
        let pv = a[col][col].clone();
        result *= &pv;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &pv;
            for c in col..n {
                let t = &a[col][c] * &f;
                a[r][c] = &a[r][c] - &t;
            }
        }
    }
    result
}

/// Inverse by Gauss-Jordan; `None` when singular.
pub fn inverse(m: &Mat) -> Option<Mat> {
    let n = m.len();
    let mut a = m.to_vec();
    let mut inv = identity(n);
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(p, col);
        inv.swap(p, col);
        let pv = a[col][col].clone();
        for c in 0..n {
            a[col][c] = &a[col][c] / &pv;
            inv[col][c] = &inv[col][c] / &pv;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..n {
                let t1 = &a[col][c] * &f;
                a[r][c] = &a[r][c] - &t1;
                let t2 = &inv[col][c] * &f;
                inv[r][c] = &inv[r][c] - &t2;
            }
        }
    }
    Some(inv)
}

/// Reduced row-echelon form with unit pivots; drops zero rows.
/// The result is the unique canonical basis of the row space.
pub fn rref(rows: &[Vec<Rat>]) -> Mat {
    let mut a: Mat = rows.to_vec();
    let nrows = a.len();
    if nrows == 0 {
        return a;
    }
    let ncols = a[0].len();
    let mut pivot_row = 0;
    for col in 0..ncols {
        let Some(p) = (pivot_row..nrows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(p, pivot_row);
        let pv = a[pivot_row][col].clone();
        for c in 0..ncols {
            a[pivot_row][c] = &a[pivot_row][c] / &pv;
        }
        for r in 0..nrows {
            if r == pivot_row || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..ncols {
                let t = &a[pivot_row][c] * &f;
                a[r][c] = &a[r][c] - &t;
            }
        }
        pivot_row += 1;
        if pivot_row == nrows {
            break;
        }
    }
    a.truncate(pivot_row);
    a
}

pub fn rank(rows: &[Vec<Rat>]) -> usize {
    rref(rows).len()
}

/// Rank of an integer matrix, computed fraction-free.
pub fn int_rank(rows: &[Vec<Int>]) -> usize {
    let mut a: IntMat = rows.to_vec();
    let nrows = a.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = a[0].len();
    let mut r = 0;
    for col in 0..ncols {
        let Some(p) = (r..nrows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        for i in r + 1..nrows {
            if a[i][col].is_zero() {
                continue;
            }
            let (pv, cv) = (a[r][col].clone(), a[i][col].clone());
            let g = pv.gcd(&cv);
            let (pm, cm) = (&pv / &g, &cv / &g);
            for c in col..ncols {
                a[i][c] = &a[i][c] * &pm - &a[r][c] * &cm;
            }
        }
        r += 1;
        if r == nrows {
            break;
        }
    }
    r
}

/// Solves `A x = b` for invertible square A.
pub fn solve(a: &Mat, b: &[Rat]) -> Option<Vec<Rat>> {
    let inv = inverse(a)?;
    Some(mat_vec(&inv, b))
}

/// Gram matrix of `rows` under the quadratic form `form` (or the standard
/// inner product when `form` is `None`).
pub fn gram(rows: &[Vec<Rat>], form: Option<&Mat>) -> Mat {
    let images: Vec<Vec<Rat>> = match form {
        Some(f) => rows.iter().map(|r| mat_vec(f, r)).collect(),
        None => rows.to_vec(),
    };
    rows.iter()
        .map(|r| images.iter().map(|im| dot(r, im)).collect())
        .collect()
}

/// Exact LDL^T decomposition of a symmetric matrix. Returns `(l, d)` with
/// `m = l * diag(d) * l^T`, `l` unit lower triangular. Fails with
/// `NotPositiveDefinite` when a pivot is non-positive or elimination breaks.
pub fn ldlt(m: &Mat) -> Result<(Mat, Vec<Rat>)> {
    let n = m.len();
    for i in 0..n {
        for j in 0..i {
            if m[i][j] != m[j][i] {
                return Err(Error::NotPositiveDefinite);
            }
        }
    }
    let mut l = identity(n);
    let mut d = vec![Rat::zero(); n];
    for j in 0..n {
        let mut dj = m[j][j].clone();
        for k in 0..j {
            dj -= &l[j][k] * &l[j][k] * &d[k];
        }
        if !dj.is_positive() {
            return Err(Error::NotPositiveDefinite);
        }
        d[j] = dj;
        for i in j + 1..n {
            let mut v = m[i][j].clone();
            for k in 0..j {
                v -= &l[i][k] * &l[j][k] * &d[k];
            }
            l[i][j] = &v / &d[j];
        }
    }
    Ok((l, d))
}

/// Rational Cholesky `m = r^T r` with upper-triangular rational `r`;
/// exists exactly when every LDL pivot is the square of a rational.
pub fn rational_cholesky(m: &Mat) -> Result<Mat> {
    let (l, d) = ldlt(m)?;
    let n = m.len();
    let mut sqrts = Vec::with_capacity(n);
    for di in &d {
        let sn = crate::rational::isqrt(di.numer());
        let sd = crate::rational::isqrt(di.denom());
        if &(&sn * &sn) != di.numer() || &(&sd * &sd) != di.denom() {
            return Err(Error::NotRationalCholesky);
        }
        sqrts.push(Rat::new(sn, sd));
    }
    // r = diag(sqrt d) * l^T
    let lt = transpose(&l);
    Ok((0..n)
        .map(|i| lt[i].iter().map(|x| x * &sqrts[i]).collect())
        .collect())
}

/// Clears denominators of a rational row, returning the primitive integer
/// row with the same direction (lexicographically sign-normalized rows keep
/// their orientation; this helper does not flip signs).
pub fn clear_denominators(row: &[Rat]) -> Vec<Int> {
    let mut lcm = Int::one();
    for x in row {
        lcm = num_integer::lcm(lcm, x.denom().clone());
    }
    let ints: Vec<Int> = row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let g = gcd_vec(&ints);
    if g.is_zero() || g.is_one() {
        return ints;
    }
    ints.iter().map(|x| x / &g).collect()
}

pub fn int_to_rat_vec(v: &[Int]) -> Vec<Rat> {
    v.iter().map(rat_of).collect()
}

/// Extended gcd: returns `(g, x, y)` with `a*x + b*y = g = gcd(a, b)`, g >= 0.
pub fn ext_gcd(a: &Int, b: &Int) -> (Int, Int, Int) {
    if b.is_zero() {
        let sign = if a.is_negative() { -Int::one() } else { Int::one() };
        return (a.abs(), sign, Int::zero());
    }
    let (g, x1, y1) = ext_gcd(b, &(a % b));
    let y = x1 - (a / b) * &y1;
    (g, y1, y)
}

/// Coefficients `c` with `sum c_i v_i = gcd(v)`; gcd returned too.
pub fn ext_gcd_vec(v: &[Int]) -> (Int, Vec<Int>) {
    let mut g = Int::zero();
    let mut coeffs = vec![Int::zero(); v.len()];
    for (i, x) in v.iter().enumerate() {
        if g.is_zero() && x.is_zero() {
            continue;
        }
        let (ng, a, b) = ext_gcd(&g, x);
        for c in coeffs.iter_mut() {
            *c = &*c * &a;
        }
        coeffs[i] = b;
        g = ng;
    }
    (g, coeffs)
}

/// Basis of the integer kernel `{x : A x = 0}` of an integer matrix.
/// Column-reduces A with unimodular column operations tracked in U; kernel
/// generators are the U-columns matching zero columns of the reduced A.
pub fn integer_kernel(a: &IntMat) -> Vec<Vec<Int>> {
    if a.is_empty() {
        return Vec::new();
    }
    let rows = a.len();
    let cols = a[0].len();
    let mut m = a.clone();
    let mut u = int_identity(cols);
    let mut pivot_col = 0;
    for r in 0..rows {
        if pivot_col >= cols {
            break;
        }
        // Gcd-reduce row r across columns pivot_col..cols.
        loop {
            let mut nonzero: Vec<usize> =
                (pivot_col..cols).filter(|&c| !m[r][c].is_zero()).collect();
            if nonzero.is_empty() {
                break;
            }
            if nonzero.len() == 1 {
                let c = nonzero[0];
                if c != pivot_col {
                    for row in m.iter_mut() {
                        row.swap(c, pivot_col);
                    }
                    for row in u.iter_mut() {
                        row.swap(c, pivot_col);
                    }
                }
                pivot_col += 1;
                break;
            }
            // Reduce the larger entries by the smallest nonzero one.
            nonzero.sort_by(|&x, &y| m[r][x].abs().cmp(&m[r][y].abs()));
            let small = nonzero[0];
            for &c in &nonzero[1..] {
                let q = div_round(&m[r][c], &m[r][small]);
                if q.is_zero() {
                    continue;
                }
                for row in m.iter_mut() {
                    let t = &row[small] * &q;
                    row[c] = &row[c] - &t;
                }
                for row in u.iter_mut() {
                    let t = &row[small] * &q;
                    row[c] = &row[c] - &t;
                }
            }
        }
    }
    // Zero columns of m give kernel vectors.
    (0..cols)
        .filter(|&c| (0..rows).all(|r| m[r][c].is_zero()))
        .map(|c| (0..cols).map(|i| u[i][c].clone()).collect())
        .collect()
}

fn div_round(a: &Int, b: &Int) -> Int {
    // Round a/b to a nearby integer quotient (floor division is fine for
    // the gcd sweep; exactness is not required, only progress).
    let (q, r) = num_integer::Integer::div_rem(a, b);
    if (&r + &r).abs() > b.abs() {
        if (r.is_negative()) == (b.is_negative()) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

/// Row-style Hermite normal form of a full-row-rank integer matrix:
/// positive pivots, entries above each pivot reduced to `[0, pivot)`.
/// Canonical for the row lattice.
pub fn hnf_rows(rows: &IntMat) -> IntMat {
    let mut m = rows.clone();
    let nrows = m.len();
    if nrows == 0 {
        return m;
    }
    let ncols = m[0].len();
    let mut r = 0;
    for col in 0..ncols {
        if r == nrows {
            break;
        }
        // Gcd sweep down the column.
        loop {
            let mut nz: Vec<usize> = (r..nrows).filter(|&i| !m[i][col].is_zero()).collect();
            if nz.is_empty() {
                break;
            }
            nz.sort_by(|&x, &y| m[x][col].abs().cmp(&m[y][col].abs()));
            let small = nz[0];
            if nz.len() == 1 {
                m.swap(small, r);
                break;
            }
            for &i in &nz[1..] {
                let q = div_round(&m[i][col], &m[small][col]);
                if q.is_zero() {
                    continue;
                }
                for c in 0..ncols {
                    let t = &m[small][c] * &q;
                    m[i][c] = &m[i][c] - &t;
                }
            }
        }
        if m[r][col].is_zero() {
            continue;
        }
        if m[r][col].is_negative() {
            for c in 0..ncols {
                m[r][c] = -std::mem::take(&mut m[r][c]);
            }
        }
        // Reduce entries above the pivot.
        for i in 0..r {
            let q = num_integer::Integer::div_floor(&m[i][col], &m[r][col]);
            if q.is_zero() {
                continue;
            }
            for c in 0..ncols {
                let t = &m[r][c] * &q;
                m[i][c] = &m[i][c] - &t;
            }
        }
        r += 1;
    }
    m.truncate(r);
    m
}

/// Given an `(r-1) x r` integer matrix whose rows extend to a unimodular
/// r x r matrix, produces a completing last row (via the Laplace cofactor
/// identity and an extended gcd over the maximal minors).
pub fn unimodular_completion(rows: &IntMat) -> Result<Vec<Int>> {
    let r = rows.len() + 1;
    for row in rows {
        if row.len() != r {
            return Err(Error::SingularBasis);
        }
    }
    // Cofactors along the would-be last row.
    let mut cof = Vec::with_capacity(r);
    for l in 0..r {
        let minor: Mat = rows
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != l)
                    .map(|(_, x)| rat_of(x))
                    .collect()
            })
            .collect();
        let d = det(&minor);
        debug_assert!(d.denom().is_one());
        let sign = if (r - 1 + l) % 2 == 0 { 1 } else { -1 };
        cof.push(d.numer() * sign);
    }
    let (g, coeffs) = ext_gcd_vec(&cof);
    if !g.is_one() {
        return Err(Error::SingularBasis);
    }
    Ok(coeffs)
}
