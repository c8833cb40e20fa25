//! Successive minima, their witnesses, and the checks built on them.
//!
//! Minima are stored as exact squared scales. Quantities of the form
//! `(lambda_j ... lambda_d)^(-1/(d-j))` are irrational in general, so they
//! are carried as [`PowerVal`]s and every comparison is decided by raising
//! both sides to an integer power.

use serde::{Deserialize, Serialize};

use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

use crate::body::{body_form, body_volume_f64, body_volume_interval, Body};
use crate::enumerate::ReducedForm;
use crate::error::{Error, Result};
use crate::lattice::LatticeBasis;
use crate::linalg::{self, Mat};
use crate::rational::{
    fmt_rat, pow_u, rat, rat_of, rat_to_f64, round_half_up, shifted_sqrt_floor, Int, Rat,
};

/// A positive value of the form `pow2e^(1/(2e))`, compared exactly by
/// cross-powering to integer exponents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerVal {
    #[serde(with = "crate::rational::serde_rat")]
    pub pow2e: Rat,
    pub e: u32,
}

impl PowerVal {
    pub fn new(pow2e: Rat, e: u32) -> Self {
        assert!(pow2e.is_positive() && e >= 1);
        Self { pow2e, e }
    }

    pub fn from_rational(v: &Rat) -> Self {
        Self::new(v * v, 1)
    }

    /// Compares against a positive rational.
    pub fn cmp_rat(&self, t: &Rat) -> Ordering {
        assert!(t.is_positive());
        self.pow2e.cmp(&pow_u(t, 2 * self.e))
    }

    /// Exact comparison of two power values.
    pub fn cmp_val(&self, other: &PowerVal) -> Ordering {
        pow_u(&self.pow2e, other.e).cmp(&pow_u(&other.pow2e, self.e))
    }

    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.pow2e).powf(1.0 / (2.0 * self.e as f64))
    }

    /// self^exp as f64, for report decorations.
    pub fn powi_f64(&self, exp: u32) -> f64 {
        rat_to_f64(&self.pow2e).powf(exp as f64 / (2.0 * self.e as f64))
    }

    /// Largest integer `a >= 0` with `a * m <= c * self`, where `m` is given
    /// by its square. Used for box side lengths.
    pub fn floor_div_sqrt(&self, c: &Rat, m_sq: &Rat) -> Int {
        assert!(c.is_positive() && m_sq.is_positive());
        // a <= c * v / m  with  v = pow2e^(1/2e):
        // a^(2e) m_sq^e <= c^(2e) pow2e
        let rhs = pow_u(c, 2 * self.e) * &self.pow2e;
        let me = pow_u(m_sq, self.e);
        let ok = |a: &Int| -> bool {
            if a.is_negative() {
                return false;
            }
            rat_of(a).pow(2 * self.e as i32) * &me <= rhs
        };
        let guess = (c.numer().to_string().parse::<f64>().unwrap_or(f64::MAX)
            / c.denom().to_string().parse::<f64>().unwrap_or(1.0))
            * self.to_f64()
            / rat_to_f64(m_sq).sqrt();
        let mut a = if guess.is_finite() && guess > 0.0 {
            Int::from(guess as i64)
        } else {
            Int::zero()
        };
        if !ok(&a) {
            a = Int::zero();
            debug_assert!(ok(&a));
        }
        while ok(&(&a + 1)) {
            a += 1;
        }
        a
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimaTranscript {
    pub doublings: u32,
    #[serde(with = "crate::rational::serde_rat")]
    pub initial_bound_sq: Rat,
    #[serde(with = "crate::rational::serde_rat")]
    pub final_bound_sq: Rat,
}

/// Successive minima of a lattice/body pair, with witness vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimaProfile {
    /// lambda_i^2, ascending.
    #[serde(with = "crate::rational::serde_rat_vec")]
    pub lambdas_sq: Vec<Rat>,
    /// Witness lattice points, ambient coordinates; witness i realizes
    /// lambda_i and the set is linearly independent.
    #[serde(with = "crate::rational::serde_rat_mat")]
    pub witnesses: Vec<Vec<Rat>>,
    /// The same witnesses in basis coordinates.
    pub witness_coords: Vec<Vec<i64>>,
    pub transcript: MinimaTranscript,
}

impl MinimaProfile {
    pub fn rank(&self) -> usize {
        self.lambdas_sq.len()
    }

    pub fn lambda_sq(&self, i: usize) -> &Rat {
        &self.lambdas_sq[i - 1]
    }

    /// lambda_d <= 1, decided exactly on squares.
    pub fn last_at_most_one(&self) -> bool {
        *self.lambdas_sq.last().unwrap() <= Rat::one()
    }

    pub fn last_below_one(&self) -> bool {
        *self.lambdas_sq.last().unwrap() < Rat::one()
    }

    pub fn lambdas_f64(&self) -> Vec<f64> {
        self.lambdas_sq.iter().map(|s| rat_to_f64(s).sqrt()).collect()
    }
}

fn coords_to_i64(v: &[Int]) -> Vec<i64> {
    v.iter()
        .map(|x| x.to_string().parse::<i64>().expect("witness coordinate fits i64"))
        .collect()
}

/// Exact successive minima by doubling enumeration on the squared scale.
pub fn successive_minima(lattice: &LatticeBasis, body: &Body) -> Result<MinimaProfile> {
    body.validate(lattice.ambient_dim())?;
    let form = body_form(lattice, body);
    successive_minima_form(lattice, &form)
}

/// Same, on an explicit coordinate form (used for dual problems).
///
/// The i-th minimum is the shortest lattice vector outside the span of the
/// previous witnesses. The search radius starts at the i-th smallest
/// diagonal of the reduced Gram matrix, which always suffices; the doubling
/// loop is a safety net.
pub fn successive_minima_form(lattice: &LatticeBasis, form: &Mat) -> Result<MinimaProfile> {
    let m = lattice.rank();
    let red = ReducedForm::new(form)?;
    let mut diag: Vec<Rat> = (0..m).map(|i| red.gram[i][i].clone()).collect();
    diag.sort();
    let initial = diag[0].clone();
    let mut final_bound = initial.clone();
    let mut doublings = 0u32;
    let mut chosen: Vec<(Vec<Int>, Rat)> = Vec::new();
    let mut span: Mat = Vec::new();
    for r in 0..m {
        let mut bound = diag[r].clone();
        if let Some((_, prev)) = chosen.last() {
            if bound < *prev {
                bound = prev.clone();
            }
        }
        loop {
            match crate::enumerate::shortest_outside_span(&red.gram, &bound, &span)? {
                Some((coords, val)) => {
                    let mut rows = span.clone();
                    rows.push(coords.iter().map(rat_of).collect());
                    span = linalg::rref(&rows);
                    debug_assert_eq!(span.len(), r + 1);
                    if bound > final_bound {
                        final_bound = bound;
                    }
                    chosen.push((coords, val));
                    break;
                }
                None => {
                    bound = &bound * rat(2);
                    doublings += 1;
                    if doublings > 200 {
                        return Err(Error::VerificationFailed(
                            "minima search failed to find independent witnesses".into(),
                        ));
                    }
                }
            }
        }
    }
    let lambdas_sq: Vec<Rat> = chosen.iter().map(|(_, v)| v.clone()).collect();
    debug_assert!(lambdas_sq.windows(2).all(|w| w[0] <= w[1]));
    let witnesses: Vec<Vec<Rat>> = chosen
        .iter()
        .map(|(c, _)| lattice.point_from_coords(&red.original_coords(c)))
        .collect();
    let witness_coords: Vec<Vec<i64>> = chosen
        .iter()
        .map(|(c, _)| coords_to_i64(&red.original_coords(c)))
        .collect();
    Ok(MinimaProfile {
        lambdas_sq,
        witnesses,
        witness_coords,
        transcript: MinimaTranscript {
            doublings,
            initial_bound_sq: initial,
            final_bound_sq: final_bound,
        },
    })
}

/// alpha / beta minima aggregates.
///
/// `alpha` minimizes `(lambda_j ... lambda_d)^(-1/(d-j))` over `1 <= j <= k`,
/// `beta` over `1 <= j <= d-1`. `j_star` is the smallest minimizing j for
/// alpha; `q` is the smallest index in `{d-k+1, ..., d}` realizing alpha in
/// the re-indexed form `(lambda_{d-q+1} ... lambda_d)^(-1/(q-1))`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlphaBeta {
    pub alpha: PowerVal,
    pub beta: PowerVal,
    pub q: usize,
    pub j_star: usize,
    pub j_star_beta: usize,
}

fn tail_product_val(lambdas_sq: &[Rat], j: usize) -> PowerVal {
    // (lambda_j ... lambda_d)^(-1/(d-j)), 1-based j < d.
    let d = lambdas_sq.len();
    let prod_sq: Rat = lambdas_sq[j - 1..d]
        .iter()
        .fold(Rat::one(), |acc, x| acc * x);
    PowerVal::new(Rat::one() / prod_sq, (d - j) as u32)
}

pub fn alpha_beta(lambdas_sq: &[Rat], k: usize) -> Result<AlphaBeta> {
    let d = lambdas_sq.len();
    if !(1..d).contains(&k) {
        return Err(Error::ParamOutOfRange(format!("k = {k} not in 1..{d}")));
    }
    let argmin = |hi: usize| -> (usize, PowerVal) {
        let mut best_j = 1;
        let mut best = tail_product_val(lambdas_sq, 1);
        for j in 2..=hi {
            let v = tail_product_val(lambdas_sq, j);
            if v.cmp_val(&best) == Ordering::Less {
                best = v;
                best_j = j;
            }
        }
        (best_j, best)
    };
    let (j_star, alpha) = argmin(k);
    let (j_star_beta, beta) = argmin(d - 1);
    // Smallest q in {d-k+1..d} with (lambda_{d-q+1}..lambda_d)^(-1/(q-1))
    // equal to alpha; q = d-j+1 maps the ranges onto each other.
    let mut q = d - k + 1;
    for cand_q in d - k + 1..=d {
        let j = d - cand_q + 1;
        if tail_product_val(lambdas_sq, j).cmp_val(&alpha) == Ordering::Equal {
            q = cand_q;
            break;
        }
    }
    Ok(AlphaBeta { alpha, beta, q, j_star, j_star_beta })
}

/// Both inequalities relating minima products to alpha, checked whenever
/// the hypothesis `q >= d-k+2` holds. Returns `None` when it does not.
pub fn minima_product_inequalities(lambdas_sq: &[Rat], k: usize) -> Result<Option<bool>> {
    let d = lambdas_sq.len();
    let ab = alpha_beta(lambdas_sq, k)?;
    let q = ab.q;
    if q < d - k + 2 {
        return Ok(None);
    }
    // (i) 1/lambda_i <= alpha for i in {d-q+1, .., d}:
    // (1/lambda_i^2)^e <= alpha.pow2e with e = alpha.e.
    for i in d - q + 1..=d {
        let lhs = pow_u(&(Rat::one() / &lambdas_sq[i - 1]), ab.alpha.e);
        if lhs > ab.alpha.pow2e {
            return Ok(Some(false));
        }
    }
    // (ii) (lambda_{d-i+2}..lambda_d)^((q-i+1)/(i-2)) <= lambda_{d-q+1}..lambda_{d-i+1}
    // for i in {3, .., d-k+2}; compared via squared products and integer powers.
    for i in 3..=d - k + 2 {
        let a_sq: Rat = lambdas_sq[d - i + 1..d].iter().fold(Rat::one(), |x, y| x * y);
        let b_sq: Rat = lambdas_sq[d - q..d - i + 1].iter().fold(Rat::one(), |x, y| x * y);
        let lhs = pow_u(&a_sq, (q - i + 1) as u32);
        let rhs = pow_u(&b_sq, (i - 2) as u32);
        if lhs > rhs {
            return Ok(Some(false));
        }
    }
    Ok(Some(true))
}

/// Verdicts and decorations for Minkowski's second-theorem bounds:
/// `vol(K)/(2^d det) <= 1/(lambda_1...lambda_d) <= d! vol(K)/(2^d det)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinkowskiReport {
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub volume: f64,
    pub determinant: f64,
    pub inv_minima_product: f64,
    pub lower_value: f64,
    pub upper_value: f64,
}

pub fn check_minkowski2(lattice: &LatticeBasis, body: &Body) -> Result<MinkowskiReport> {
    if !lattice.is_full_rank() {
        return Err(Error::SingularBasis);
    }
    let d = lattice.rank() as u32;
    let profile = successive_minima(lattice, body)?;
    let det = lattice.determinant()?;
    let (vlo, vhi) = body_volume_interval(body, d);
    let prod_sq: Rat = profile.lambdas_sq.iter().fold(Rat::one(), |a, x| a * x);
    // Squared comparisons keep the verdicts exact: with P2 = prod of
    // lambda^2, "x <= 1/prod" becomes "x^2 * P2 <= 1" for positive x.
    let two_d = pow_u(&rat(2), d);
    let lhs_hi = &vhi / (&two_d * &det);
    let lower_ok = &lhs_hi * &lhs_hi * &prod_sq <= Rat::one();
    let fact: Rat = (2..=d as i64).fold(Rat::one(), |a, i| a * rat(i));
    let rhs_lo = &fact * &vlo / (&two_d * &det);
    let upper_ok = &rhs_lo * &rhs_lo * &prod_sq >= Rat::one();
    let vol = body_volume_f64(body, d);
    let det_f = rat_to_f64(&det);
    Ok(MinkowskiReport {
        lower_ok,
        upper_ok,
        volume: vol,
        determinant: det_f,
        inv_minima_product: 1.0 / rat_to_f64(&prod_sq).sqrt(),
        lower_value: vol / (2f64.powi(d as i32) * det_f),
        upper_value: rat_to_f64(&fact) * vol / (2f64.powi(d as i32) * det_f),
    })
}

/// Transference products `lambda_i * mu_{d-i+1}`, verified inside `[1, d]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransferenceReport {
    /// Exact squared products, as strings `p/q`.
    pub products_sq: Vec<String>,
    pub all_in_range: bool,
}

pub fn check_transference(lattice: &LatticeBasis, body: &Body) -> Result<TransferenceReport> {
    let Body::Ball { radius } = body else {
        return Err(Error::BodyNotBall);
    };
    let d = lattice.rank();
    let primal = successive_minima(lattice, body)?;
    let dual = lattice.dual();
    let dual_profile = successive_minima(&dual, &Body::unit_ball())?;
    // Rescale to the unit ball: lambda_i(L, B)^2 = lambda_i(L, ball(r))^2 r^2.
    let r_sq = radius * radius;
    let mut products = Vec::with_capacity(d);
    let mut ok = true;
    let d_sq = rat((d * d) as i64);
    for i in 1..=d {
        let p = primal.lambda_sq(i) * &r_sq * dual_profile.lambda_sq(d - i + 1);
        if p < Rat::one() || p > d_sq {
            ok = false;
        }
        products.push(fmt_rat(&p));
    }
    Ok(TransferenceReport { products_sq: products, all_in_range: ok })
}

/// Point-enumerator bound: `|L ∩ K| <= 2^(d-1) prod floor(2/lambda_i + 1)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointCountReport {
    pub count: usize,
    pub bound: String,
    pub ok: bool,
}

pub fn point_count_check(lattice: &LatticeBasis, body: &Body) -> Result<PointCountReport> {
    let d = lattice.rank();
    let profile = successive_minima(lattice, body)?;
    let points = crate::enumerate::enumerate_points(lattice, body)?;
    let mut bound = Int::one() << (d - 1);
    for ls in &profile.lambdas_sq {
        // floor(2/lambda) = floor(sqrt(4/lambda^2))
        let f = shifted_sqrt_floor(&Rat::zero(), &(rat(4) / ls));
        bound *= f + 1;
    }
    let ok = Int::from(points.len()) <= bound;
    Ok(PointCountReport { count: points.len(), bound: bound.to_string(), ok })
}

/// A basis meeting the first-finiteness scale bounds
/// `b_i in (3/2)^(i-1) lambda_i K`, built constructively from the witnesses.
#[derive(Debug, Clone)]
pub struct ReducedBasis {
    pub basis: LatticeBasis,
    pub profile: MinimaProfile,
    /// Exact squared scales of the returned vectors.
    pub scales_sq: Vec<Rat>,
}

pub fn reduce_basis(lattice: &LatticeBasis, body: &Body) -> Result<ReducedBasis> {
    let profile = successive_minima(lattice, body)?;
    let m = lattice.rank();
    let ambient_form = body.form(lattice.ambient_dim());
    let witness_coords: Vec<Vec<Int>> = profile
        .witness_coords
        .iter()
        .map(|v| v.iter().map(|&x| Int::from(x)).collect())
        .collect();

    let mut chosen: Vec<Vec<Rat>> = Vec::new(); // ambient vectors
    let mut scales = Vec::new();
    for i in 1..=m {
        let sub = lattice.sublattice_in_span(&witness_coords[..i])?;
        debug_assert_eq!(sub.rank(), i);
        // Coordinates of the already-chosen vectors in the sublattice basis.
        let rows: Vec<Vec<Int>> = chosen
            .iter()
            .map(|b| sub.lattice_coords(b).expect("chosen vectors lie in the sublattice"))
            .collect();
        let completion = linalg::unimodular_completion(&rows)?;
        let mut cand = sub.point_from_coords(&completion);
        // Size-reduce against the chosen vectors (Gram-Schmidt in the body
        // inner product), then search small offsets for the best scale.
        let ortho = orthogonalize(&chosen, &ambient_form);
        for j in (0..chosen.len()).rev() {
            let mu = form_dot(&cand, &ortho[j], &ambient_form)
                / form_dot(&ortho[j], &ortho[j], &ambient_form);
            let r = round_half_up(&mu);
            if !r.is_zero() {
                let shift = linalg::scale_vec(&chosen[j], &rat_of(&r));
                cand = linalg::sub_vec(&cand, &shift);
            }
        }
        let width_limit = rat(9) / rat(4); // (3/2)^2 per level, squared
        let target_sq = pow_u(&width_limit, (i - 1) as u32) * profile.lambda_sq(i);
        let mut best = cand.clone();
        let mut best_sq = body.scale_sq(&cand);
        for width in [2i64, 4] {
            if best_sq <= target_sq {
                break;
            }
            let (b, s) = offset_search(&cand, &chosen, body, width);
            if s < best_sq {
                best = b;
                best_sq = s;
            }
        }
        if best_sq > target_sq {
            return Err(Error::VerificationFailed(format!(
                "reduced vector {i} exceeds its scale bound"
            )));
        }
        scales.push(best_sq);
        chosen.push(best);
    }
    let basis = LatticeBasis::new(chosen, lattice.ambient_dim())?;
    // The construction guarantees a genuine basis; verify anyway.
    if !basis.same_lattice(lattice) {
        return Err(Error::VerificationFailed(
            "reduced vectors do not span the original lattice".into(),
        ));
    }
    Ok(ReducedBasis { basis, profile, scales_sq: scales })
}

fn form_dot(a: &[Rat], b: &[Rat], form: &Mat) -> Rat {
    linalg::dot(a, &linalg::mat_vec(form, b))
}

fn orthogonalize(vecs: &[Vec<Rat>], form: &Mat) -> Vec<Vec<Rat>> {
    let mut out: Vec<Vec<Rat>> = Vec::with_capacity(vecs.len());
    for v in vecs {
        let mut w = v.clone();
        for u in &out {
            let c = form_dot(&w, u, form) / form_dot(u, u, form);
            let shift = linalg::scale_vec(u, &c);
            w = linalg::sub_vec(&w, &shift);
        }
        out.push(w);
    }
    out
}

fn offset_search(
    cand: &[Rat],
    chosen: &[Vec<Rat>],
    body: &Body,
    width: i64,
) -> (Vec<Rat>, Rat) {
    let n = chosen.len();
    let mut best = cand.to_vec();
    let mut best_sq = body.scale_sq(cand);
    let mut offsets = vec![-width; n];
    if n == 0 {
        return (best, best_sq);
    }
    loop {
        let mut v = cand.to_vec();
        for (t, b) in offsets.iter().zip(chosen) {
            if *t != 0 {
                let shift = linalg::scale_vec(b, &rat(*t));
                v = linalg::add_vec(&v, &shift);
            }
        }
        let s = body.scale_sq(&v);
        if s < best_sq {
            best_sq = s;
            best = v;
        }
        // Advance the odometer.
        let mut pos = 0;
        loop {
            offsets[pos] += 1;
            if offsets[pos] <= width {
                break;
            }
            offsets[pos] = -width;
            pos += 1;
            if pos == n {
                return (best, best_sq);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn grid_ball_minima_are_inverse_radius() {
        for d in 1..=4usize {
            let l = LatticeBasis::standard(d);
            let n = 3i64;
            let p = successive_minima(&l, &Body::ball(rat(n)).unwrap()).unwrap();
            for ls in &p.lambdas_sq {
                assert_eq!(*ls, ratio(1, n * n));
            }
        }
    }

    #[test]
    fn anisotropic_example_minima() {
        // Lattice {(x1/n, x2/2, x3/2)}: minima 1/n, 1/2, 1/2 for the unit ball.
        let n = 6i64;
        let l = LatticeBasis::new(
            vec![
                vec![ratio(1, n), rat(0), rat(0)],
                vec![rat(0), ratio(1, 2), rat(0)],
                vec![rat(0), rat(0), ratio(1, 2)],
            ],
            3,
        )
        .unwrap();
        let p = successive_minima(&l, &Body::unit_ball()).unwrap();
        assert_eq!(p.lambdas_sq[0], ratio(1, n * n));
        assert_eq!(p.lambdas_sq[1], ratio(1, 4));
        assert_eq!(p.lambdas_sq[2], ratio(1, 4));
    }

    #[test]
    fn witnesses_are_independent_and_on_scale() {
        let l = LatticeBasis::from_integer_rows(&[vec![2, 1], vec![1, 3]]).unwrap();
        let body = Body::ball(rat(5)).unwrap();
        let p = successive_minima(&l, &body).unwrap();
        assert_eq!(linalg::rank(&p.witnesses), 2);
        for (w, ls) in p.witnesses.iter().zip(&p.lambdas_sq) {
            assert_eq!(body.scale_sq(w), *ls);
        }
        assert!(p.lambdas_sq[0] <= p.lambdas_sq[1]);
    }

    #[test]
    fn alpha_beta_on_flat_profile() {
        // All lambda = 1/n: alpha at j=1, q = d.
        let lam: Vec<Rat> = vec![ratio(1, 16); 4];
        let ab = alpha_beta(&lam, 2).unwrap();
        assert_eq!(ab.j_star, 1);
        assert_eq!(ab.q, 4);
        // alpha = (n^-4)^(-1/3) = n^(4/3): alpha^6 = n^8
        assert_eq!(ab.alpha.e, 3);
        assert_eq!(ab.alpha.pow2e, pow_u(&rat(16), 4));
        // beta = min over j<=3 is also at j=1 here.
        assert_eq!(ab.j_star_beta, 1);
        // alpha >= beta always.
        assert_ne!(ab.alpha.cmp_val(&ab.beta), Ordering::Less);
    }

    #[test]
    fn alpha_beta_separation_profile() {
        // lambda = (1/n, 1/2, 1/2): beta realized at j = 2, alpha stuck at j = 1.
        let n = 10i64;
        let lam = vec![ratio(1, n * n), ratio(1, 4), ratio(1, 4)];
        let ab = alpha_beta(&lam, 1).unwrap();
        assert_eq!(ab.j_star, 1);
        assert_eq!(ab.j_star_beta, 2);
        // beta = (lambda_2 lambda_3)^(-1/1) = 4
        assert_eq!(ab.beta.cmp_rat(&rat(4)), Ordering::Equal);
        // alpha^2 = 4n: decide via cmp_rat on alpha^2... alpha = (4n)^(1/2)
        assert_eq!(ab.alpha.pow2e, rat(16 * n * n)); // (1/(1/n^2 * 1/16))
        assert_eq!(ab.q, 3);
    }

    #[test]
    fn minkowski_bounds_on_simple_lattices() {
        let z2 = LatticeBasis::standard(2);
        let rep = check_minkowski2(&z2, &Body::unit_ball()).unwrap();
        assert!(rep.lower_ok && rep.upper_ok);
        // Skewed diagonal lattice sits near the lower bound.
        let l = LatticeBasis::from_integer_rows(&[vec![1, 0], vec![0, 1_000_000]]).unwrap();
        let rep = check_minkowski2(&l, &Body::unit_ball()).unwrap();
        assert!(rep.lower_ok && rep.upper_ok);
    }

    #[test]
    fn transference_products_for_self_dual() {
        let z3 = LatticeBasis::standard(3);
        let rep = check_transference(&z3, &Body::unit_ball()).unwrap();
        assert!(rep.all_in_range);
        for p in &rep.products_sq {
            assert_eq!(p, "1");
        }
        let diag = LatticeBasis::new(
            vec![vec![rat(2), rat(0)], vec![rat(0), ratio(1, 2)]],
            2,
        )
        .unwrap();
        let rep = check_transference(&diag, &Body::unit_ball()).unwrap();
        assert!(rep.all_in_range);
        assert!(matches!(
            check_transference(&z3, &Body::ellipsoid(linalg::identity(3)).unwrap()),
            Err(Error::BodyNotBall)
        ));
    }

    #[test]
    fn point_count_bound_on_grids() {
        // d=1: equality case 2n+1 <= 2n+1.
        let z1 = LatticeBasis::standard(1);
        let rep = point_count_check(&z1, &Body::ball(rat(4)).unwrap()).unwrap();
        assert_eq!(rep.count, 9);
        assert_eq!(rep.bound, "9");
        assert!(rep.ok);
        // d=2, n=4: 49 points vs 2 * 81.
        let z2 = LatticeBasis::standard(2);
        let rep = point_count_check(&z2, &Body::ball(rat(4)).unwrap()).unwrap();
        assert_eq!(rep.count, 49);
        assert_eq!(rep.bound, "162");
        assert!(rep.ok);
    }

    #[test]
    fn reduce_basis_on_grid_and_halfinteger_lattice() {
        let z3 = LatticeBasis::standard(3);
        let body = Body::unit_ball();
        let red = reduce_basis(&z3, &body).unwrap();
        assert!(red.basis.same_lattice(&z3));
        for (i, s) in red.scales_sq.iter().enumerate() {
            let bound = pow_u(&ratio(9, 4), i as u32) * red.profile.lambda_sq(i + 1);
            assert!(*s <= bound);
        }
        // Z^3 plus the half-integer midpoint.
        let l = LatticeBasis::new(
            vec![
                vec![rat(1), rat(0), rat(0)],
                vec![rat(0), rat(1), rat(0)],
                vec![ratio(1, 2), ratio(1, 2), ratio(1, 2)],
            ],
            3,
        )
        .unwrap();
        let red = reduce_basis(&l, &body).unwrap();
        assert!(red.basis.same_lattice(&l));
        assert_eq!(red.basis.determinant().unwrap(), l.determinant().unwrap());
        for (i, s) in red.scales_sq.iter().enumerate() {
            let bound = pow_u(&ratio(9, 4), i as u32) * red.profile.lambda_sq(i + 1);
            assert!(*s <= bound);
        }
    }

    #[test]
    fn scaling_covariance() {
        // lambda_i(L, ball(r)) = lambda_i(L, ball(1)) / r exactly (squares).
        let l = LatticeBasis::from_integer_rows(&[vec![1, 2], vec![3, 1]]).unwrap();
        let unit = successive_minima(&l, &Body::unit_ball()).unwrap();
        let r = ratio(7, 2);
        let scaled = successive_minima(&l, &Body::ball(r.clone()).unwrap()).unwrap();
        for (a, b) in unit.lambdas_sq.iter().zip(&scaled.lambdas_sq) {
            assert_eq!(*a, b * &r * &r);
        }
    }
}
