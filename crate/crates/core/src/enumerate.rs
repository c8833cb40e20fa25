//! Enumeration kernel: exact lattice reduction and bounded point listing.
//!
//! Everything runs on coordinate Gram forms, so balls, ellipsoids, and
//! embedded sublattices all use the same code path. Reduction is classic
//! LLL (delta = 3/4) over exact rationals; enumeration is depth-first with
//! exact interval pruning at every level (no floating-point decisions, the
//! float only seeds a guess that is then corrected exactly).

use num_traits::{One, Signed, Zero};

use crate::body::{body_form, Body};
use crate::error::{Error, Result};
use crate::lattice::LatticeBasis;
use crate::linalg::{int_identity, ldlt, IntMat, Mat};
use crate::rational::{
    rat_of, round_half_up, shifted_sqrt_ceil, shifted_sqrt_floor, Int, Rat,
};

/// Default guard on materialized point sets.
pub const POINT_GUARD: usize = 10_000_000;

/// Gram-Schmidt data of a Gram matrix: `mu` (unit lower triangular) and the
/// squared lengths `d` of the orthogonalized vectors.
fn gso(gram: &Mat) -> Result<(Mat, Vec<Rat>)> {
    ldlt(gram)
}

/// Exact LLL on a Gram matrix. Returns the unimodular transform `u` (rows
/// are integer combinations of the input basis) and the reduced Gram.
pub fn lll_reduce(gram: &Mat) -> Result<(IntMat, Mat)> {
    let m = gram.len();
    let mut u = int_identity(m);
    let mut g = gram.clone();
    if m <= 1 {
        return Ok((u, g));
    }
    let delta = crate::rational::ratio(3, 4);
    let half = crate::rational::ratio(1, 2);

    let recompute = |u: &IntMat, base: &Mat| -> Mat {
        // g' = U G U^T
        let m = u.len();
        (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let mut acc = Rat::zero();
                        for a in 0..m {
                            if u[i][a].is_zero() {
                                continue;
                            }
                            let ua = rat_of(&u[i][a]);
                            for b in 0..m {
                                if u[j][b].is_zero() {
                                    continue;
                                }
                                acc += &ua * rat_of(&u[j][b]) * &base[a][b];
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    };

    let mut k = 1;
    let mut rounds = 0usize;
    while k < m {
        rounds += 1;
        if rounds > 100_000 {
            return Err(Error::VerificationFailed("lattice reduction did not converge".into()));
        }
        let (mu, d) = gso(&g)?;
        // Size-reduce row k against rows k-1 .. 0.
        let mut changed = false;
        for j in (0..k).rev() {
            let (mu_kj, _) = {
                let (mu2, d2) = gso(&g)?;
                (mu2[k][j].clone(), d2)
            };
            if mu_kj.abs() > half {
                let r = round_half_up(&mu_kj);
                for c in 0..m {
                    let t = &u[j][c] * &r;
                    u[k][c] = &u[k][c] - &t;
                }
                g = recompute(&u, gram);
                changed = true;
            }
        }
        let (mu, d) = if changed { gso(&g)? } else { (mu, d) };
        // Lovász condition between rows k-1 and k.
        let lhs = &d[k];
        let rhs = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &d[k - 1];
        if *lhs >= rhs {
            k += 1;
        } else {
            u.swap(k, k - 1);
            g = recompute(&u, gram);
            k = k.max(2) - 1;
        }
    }
    Ok((u, g))
}

/// All integer vectors `x` with `(x - t)^T G (x - t) <= bound`, together
/// with the exact form value. `t` defaults to the origin. Output order is
/// the DFS order; callers sort when they need a canonical order.
pub fn enumerate_form(
    gram: &Mat,
    bound: &Rat,
    center: Option<&[Rat]>,
    guard: usize,
) -> Result<Vec<(Vec<Int>, Rat)>> {
    let m = gram.len();
    let (l, d) = gso(gram)?;
    let zero = vec![Rat::zero(); m];
    let t = center.unwrap_or(&zero);
    if bound.is_negative() {
        return Ok(Vec::new());
    }

    // With G = L D L^T (L unit lower), the form splits as
    // Q(x - t) = sum_i d_i y_i^2 where y_i = (x_i - t_i) + sum_{j>i} L_ji (x_j - t_j).
    struct Dfs<'a> {
        l: &'a Mat,
        d: &'a [Rat],
        t: &'a [Rat],
        bound: &'a Rat,
        guard: usize,
        x: Vec<Int>,
        z: Vec<Rat>,
        out: Vec<(Vec<Int>, Rat)>,
    }

    impl Dfs<'_> {
        fn go(&mut self, level: usize, used: Rat) -> Result<()> {
            let m = self.x.len();
            let mut c = Rat::zero();
            for j in level + 1..m {
                c += &self.l[j][level] * &self.z[j];
            }
            let budget = self.bound - &used;
            let r = &budget / &self.d[level];
            // d_level * y^2 <= budget bounds x_level to an exact interval.
            let center_x = &self.t[level] - &c;
            let lo = shifted_sqrt_ceil(&center_x, &r);
            let hi = shifted_sqrt_floor(&center_x, &r);
            let mut xi = lo;
            while xi <= hi {
                self.x[level] = xi.clone();
                self.z[level] = rat_of(&xi) - &self.t[level];
                let y = &self.z[level] + &c;
                let used_here = &used + &self.d[level] * &y * &y;
                debug_assert!(used_here <= *self.bound);
                if level == 0 {
                    self.out.push((self.x.clone(), used_here));
                    if self.out.len() > self.guard {
                        return Err(Error::TooManyPoints(self.guard));
                    }
                } else {
                    self.go(level - 1, used_here)?;
                }
                xi += 1;
            }
            Ok(())
        }
    }

    let mut dfs = Dfs {
        l: &l,
        d: &d,
        t,
        bound,
        guard,
        x: vec![Int::zero(); m],
        z: vec![Rat::zero(); m],
        out: Vec::new(),
    };
    dfs.go(m - 1, Rat::zero())?;
    Ok(dfs.out)
}

/// Reduced enumeration context for a lattice/body pair: form is LLL-reduced
/// once, then reused across scale queries.
pub struct ReducedForm {
    /// Rows express the reduced basis in original lattice coordinates.
    pub transform: IntMat,
    pub gram: Mat,
}

impl ReducedForm {
    pub fn new(form: &Mat) -> Result<Self> {
        let (u, g) = lll_reduce(form)?;
        Ok(Self { transform: u, gram: g })
    }

    /// Coordinates in the original basis for reduced-coordinates `a`.
    pub fn original_coords(&self, a: &[Int]) -> Vec<Int> {
        let m = self.transform.len();
        (0..m)
            .map(|j| {
                let mut acc = Int::zero();
                for (ai, row) in a.iter().zip(&self.transform) {
                    if !ai.is_zero() && !row[j].is_zero() {
                        acc += ai * &row[j];
                    }
                }
                acc
            })
            .collect()
    }

    /// All original-basis coordinate vectors with form value at most
    /// `bound`, paired with the exact value, sorted by (value, coords).
    pub fn points_within(&self, bound: &Rat, guard: usize) -> Result<Vec<(Vec<Int>, Rat)>> {
        let raw = enumerate_form(&self.gram, bound, None, guard)?;
        let mut pts: Vec<(Vec<Int>, Rat)> = raw
            .into_iter()
            .map(|(a, v)| (self.original_coords(&a), v))
            .collect();
        pts.sort_by(|(ca, va), (cb, vb)| va.cmp(vb).then_with(|| ca.cmp(cb)));
        Ok(pts)
    }
}

/// Shortest nonzero vector outside a given coordinate subspace.
///
/// Searches integer vectors `x` with `x^T G x <= bound` that do not lie in
/// the row space of `span` (rational RREF rows over the same coordinates),
/// returning the minimum by `(form value, lexicographic coords)`. The
/// search radius shrinks onto the incumbent as candidates appear, and any
/// subtree known to stay inside the span is skipped outright, so dense
/// sublattices inside the span cost nothing.
pub fn shortest_outside_span(
    gram: &Mat,
    bound: &Rat,
    span: &Mat,
) -> Result<Option<(Vec<Int>, Rat)>> {
    let m = gram.len();
    let (l, d) = gso(gram)?;
    let in_span = |v: &[Rat]| -> bool {
        let mut rem = v.to_vec();
        for row in span {
            let pivot = row.iter().position(|c| !c.is_zero()).unwrap();
            if rem[pivot].is_zero() {
                continue;
            }
            let f = rem[pivot].clone();
            for (ri, si) in rem.iter_mut().zip(row) {
                let t = si * &f;
                *ri = &*ri - &t;
            }
        }
        rem.iter().all(|x| x.is_zero())
    };
    // prefix_in_span[i]: all unit directions e_0..e_{i-1} lie in the span,
    // so a subtree with zero fixed tail is contained in it.
    let mut prefix_in_span = vec![true; m + 1];
    for i in 0..m {
        let mut e = vec![Rat::zero(); m];
        e[i] = Rat::one();
        prefix_in_span[i + 1] = prefix_in_span[i] && in_span(&e);
    }

    struct Search<'a> {
        l: &'a Mat,
        d: &'a [Rat],
        x: Vec<Int>,
        z: Vec<Rat>,
        best: Option<(Vec<Int>, Rat)>,
        radius: Rat,
        prefix_in_span: &'a [bool],
        in_span: &'a dyn Fn(&[Rat]) -> bool,
    }

    impl Search<'_> {
        fn tail_point(&self, level: usize) -> Vec<Rat> {
            let m = self.x.len();
            (0..m)
                .map(|j| if j < level { Rat::zero() } else { rat_of(&self.x[j]) })
                .collect()
        }

        fn consider(&mut self, val: Rat) {
            let cand = self.x.clone();
            let better = match &self.best {
                None => true,
                Some((bc, bv)) => match val.cmp(bv) {
                    std::cmp::Ordering::Less => true,
                    std::cmp::Ordering::Equal => cand < *bc,
                    std::cmp::Ordering::Greater => false,
                },
            };
            if better {
                self.radius = val.clone();
                self.best = Some((cand, val));
            }
        }

        fn go(&mut self, level: usize, used: Rat) {
            let m = self.x.len();
            let mut c = Rat::zero();
            for j in level + 1..m {
                c += &self.l[j][level] * &self.z[j];
            }
            let center_x = -&c;
            // Zig-zag outward from the nearest integer so the incumbent
            // shrinks the radius early; the interval is re-derived from the
            // current radius at every step.
            let start = round_half_up(&center_x);
            let mut t_up = Int::zero();
            let mut t_down = Int::one();
            let mut up_done = false;
            let mut down_done = false;
            let mut prefer_up = true;
            while !(up_done && down_done) {
                let budget = &self.radius - &used;
                if budget.is_negative() {
                    return;
                }
                let r = &budget / &self.d[level];
                let lo = shifted_sqrt_ceil(&center_x, &r);
                let hi = shifted_sqrt_floor(&center_x, &r);
                if lo > hi {
                    return;
                }
                let use_up = if up_done { false } else if down_done { true } else { prefer_up };
                let xi: Int = if use_up {
                    let v = &start + &t_up;
                    if v > hi {
                        up_done = true;
                        continue;
                    }
                    t_up += 1;
                    v
                } else {
                    let v = &start - &t_down;
                    if v < lo {
                        down_done = true;
                        continue;
                    }
                    t_down += 1;
                    v
                };
                prefer_up = !use_up;
                self.x[level] = xi.clone();
                self.z[level] = rat_of(&xi);
                let y = &self.z[level] + &c;
                let used_here = &used + &self.d[level] * &y * &y;
                if used_here > self.radius {
                    continue;
                }
                // Subtrees with all free directions and the fixed tail
                // inside the span cannot contain a witness.
                if self.prefix_in_span[level] && (self.in_span)(&self.tail_point(level)) {
                    continue;
                }
                if level == 0 {
                    if self.x.iter().any(|v| !v.is_zero()) {
                        self.consider(used_here);
                    }
                } else {
                    self.go(level - 1, used_here);
                }
            }
        }
    }

    let mut s = Search {
        l: &l,
        d: &d,
        x: vec![Int::zero(); m],
        z: vec![Rat::zero(); m],
        best: None,
        radius: bound.clone(),
        prefix_in_span: &prefix_in_span,
        in_span: &in_span,
    };
    s.go(m - 1, Rat::zero());
    Ok(s.best)
}

/// Exactly the set `L ∩ K`, as ambient points sorted ascending
/// lexicographically. Includes the origin.
pub fn enumerate_points(lattice: &LatticeBasis, body: &Body) -> Result<Vec<Vec<Rat>>> {
    enumerate_points_guarded(lattice, body, POINT_GUARD)
}

pub fn enumerate_points_guarded(
    lattice: &LatticeBasis,
    body: &Body,
    guard: usize,
) -> Result<Vec<Vec<Rat>>> {
    body.validate(lattice.ambient_dim())?;
    let form = body_form(lattice, body);
    let red = ReducedForm::new(&form)?;
    let pts = red.points_within(&Rat::one(), guard)?;
    let mut ambient: Vec<Vec<Rat>> = pts
        .iter()
        .map(|(coords, _)| lattice.point_from_coords(coords))
        .collect();
    ambient.sort();
    Ok(ambient)
}
