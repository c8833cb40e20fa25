//! Subspace-evasive point sets.
//!
//! Three builders: random flat-evasive subsets of `F_p^(d-1)` (every
//! low-dimensional affine flat holds at most r-1 points), their lifts into
//! a lattice/body pair through a prime modulus (producing sets with every
//! k-dimensional linear subspace of R^d holding at most r-1 points), and
//! random affine-evasive subsets of grid balls. Every produced set carries
//! a verified certificate; randomness is seeded and platform-independent.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::body::{body_form, form_unit_box_max, Body};
use crate::enumerate::enumerate_form;
use crate::error::{Error, Result};
use crate::lattice::LatticeBasis;
use crate::linalg::{self, int_rank, Mat};
use crate::minima::{alpha_beta, successive_minima_form, MinimaProfile, PowerVal};
use crate::rational::{
    cmp_surd, pow_int_u, pow_u, rat, rat_of, rat_to_f64, round_half_up, Int, Rat,
};
use crate::rng::{bernoulli_root, stream, uniform_usize};

/// Primes above this are rejected everywhere in this module.
pub const PRIME_GUARD: u64 = 10_000;
/// Work guard for exhaustive flat verification.
const FLAT_WORK_GUARD: u64 = 100_000_000;
/// Exhaustive r-subset verification cap; sampled mode beyond.
const SUBSET_EXHAUSTIVE_CAP: u128 = 1_000_000;
const SUBSET_SAMPLES: usize = 100_000;
pub const DEFAULT_MAX_RETRIES: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeField {
    pub p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p > PRIME_GUARD {
            return Err(Error::ParamOutOfRange(format!("prime {p} exceeds guard {PRIME_GUARD}")));
        }
        if !is_prime(p) {
            return Err(Error::ParamOutOfRange(format!("{p} is not prime")));
        }
        Ok(Self { p })
    }
}

/// Deterministic trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Number of b-dimensional subspaces of F_p^a:
/// `prod_{i=0}^{b-1} (p^a - p^i) / (p^b - p^i)`, exact.
pub fn gaussian_binomial(a: u32, b: u32, p: u64) -> Result<Int> {
    if b > a || p < 2 {
        return Err(Error::ParamOutOfRange(format!("gaussian binomial ({a}, {b}, {p})")));
    }
    let p = Int::from(p);
    let mut num = Int::one();
    let mut den = Int::one();
    for i in 0..b {
        num *= pow_int_u(&p, a) - pow_int_u(&p, i);
        den *= pow_int_u(&p, b) - pow_int_u(&p, i);
    }
    debug_assert!((&num % &den).is_zero());
    Ok(num / den)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verification {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvasiveAmbient {
    PrimeField { p: u64, dim: usize },
    Grid { dim: usize, scale: i64 },
    LatticeBody { dim: usize },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EvasiveTranscript {
    pub attempts: u32,
    pub prime: Option<u64>,
    pub prime_source: Option<String>,
    /// Size floor that was certified, as a human-readable inequality.
    pub size_floor: String,
    pub notes: Vec<String>,
}

/// A point set with a verified "no flat of the declared kind contains r or
/// more of these points" certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvasiveSet {
    pub ambient: EvasiveAmbient,
    /// Flat dimension the certificate speaks about.
    pub k: usize,
    /// Descriptive kind: which flats are capped.
    pub flat_kind: String,
    pub r: u64,
    #[serde(with = "crate::rational::serde_rat")]
    pub epsilon: Rat,
    pub verification: Verification,
    #[serde(with = "crate::rational::serde_rat_mat")]
    pub points: Vec<Vec<Rat>>,
    pub transcript: EvasiveTranscript,
}

impl EvasiveSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points as integer vectors (grid / prime-field ambients).
    pub fn integer_points(&self) -> Vec<Vec<Int>> {
        self.points
            .iter()
            .map(|p| p.iter().map(|x| x.numer().clone()).collect())
            .collect()
    }
}

fn check_epsilon(eps: &Rat) -> Result<(u32, u32)> {
    // Rational in (0,1) with a small denominator so cross-powered
    // comparisons stay cheap and exact.
    if !eps.is_positive() || *eps >= Rat::one() {
        return Err(Error::ParamOutOfRange("epsilon must lie in (0, 1)".into()));
    }
    let den = eps.denom().to_u32().unwrap_or(u32::MAX);
    if den > 48 {
        return Err(Error::ParamOutOfRange(
            "epsilon denominator above 48 is not supported".into(),
        ));
    }
    let num = eps.numer().to_u32().expect("epsilon numerator fits");
    Ok((num, den))
}

/// ceil(x * b / a) for the threshold r = ceil(c / eps) shapes.
fn ceil_rat(x: &Rat) -> u64 {
    crate::rational::ceil_int(x).to_u64().expect("threshold fits u64")
}

/// Smallest integer `t` with `2 t >= p^(f/b)`, exact.
fn ceil_half_power(p: u64, f: u32, b: u32) -> u64 {
    let target = pow_int_u(&Int::from(p), f);
    let ok = |t: u64| -> bool {
        if t == 0 {
            return false;
        }
        pow_int_u(&Int::from(2 * t), b) >= target
    };
    let guess = ((f as f64) * (p as f64).ln() / (b as f64)).exp() / 2.0;
    let mut t = if guess.is_finite() && guess >= 1.0 { guess as u64 } else { 1 };
    while t > 1 && ok(t - 1) {
        t -= 1;
    }
    while !ok(t) {
        t += 1;
    }
    t
}

/// `count >= p^(f/b) / 2`, exact: `(2 count)^b >= p^f`.
fn meets_half_power_floor(count: u64, p: u64, f: u32, b: u32) -> bool {
    pow_int_u(&Int::from(2 * count), b) >= pow_int_u(&Int::from(p), f)
}

/// All points of F_p^dim in lexicographic order.
fn all_fp_points(p: u64, dim: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::with_capacity((p as usize).pow(dim as u32));
    let mut cur = vec![0u64; dim];
    loop {
        out.push(cur.clone());
        let mut pos = dim;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            cur[pos] += 1;
            if cur[pos] < p {
                break;
            }
            cur[pos] = 0;
        }
    }
}

/// Random subset of `F_p^(d-1)` in which every (k-1)-dimensional affine
/// flat contains at most r-1 points, for `r = ceil(k (d-k+1) / eps)`.
/// Deterministic branch for k = 1: the whole space with r = 2.
pub fn build_flat_evasive(
    d: usize,
    k: usize,
    epsilon: &Rat,
    p: u64,
    seed: u64,
    max_retries: u32,
) -> Result<EvasiveSet> {
    let field = PrimeField::new(p)?;
    let (eps_num, eps_den) = check_epsilon(epsilon)?;
    let dim = d - 1;
    if k == 1 {
        let points: Vec<Vec<Rat>> = all_fp_points(p, dim)
            .iter()
            .map(|v| v.iter().map(|&x| rat(x as i64)).collect())
            .collect();
        return Ok(EvasiveSet {
            ambient: EvasiveAmbient::PrimeField { p, dim },
            k: 0,
            flat_kind: format!("affine 0-flats over F_{p}"),
            r: 2,
            epsilon: epsilon.clone(),
            verification: Verification::Exhaustive,
            points,
            transcript: EvasiveTranscript {
                attempts: 0,
                prime: Some(p),
                prime_source: None,
                size_floor: format!("|R| = p^{} = {}", dim, (p as u128).pow(dim as u32)),
                notes: vec!["whole space; distinct points certify r = 2".into()],
            },
        });
    }
    if !(2..=d.saturating_sub(2)).contains(&k) {
        return Err(Error::ParamOutOfRange(format!("flat-evasive needs 2 <= k <= d-2, got k={k}, d={d}")));
    }
    let r = ceil_rat(&(rat((k * (d - k + 1)) as i64) / epsilon));
    // For p^(k-1) <= r the per-flat cap cannot bind on (k-1)-flats; the
    // certificate still verifies literally, so record it and continue.
    let mut notes = Vec::new();
    if pow_int_u(&Int::from(p), (k - 1) as u32) <= Int::from(r) {
        notes.push(format!("cap r = {r} at or above the flat size p^{}", k - 1));
    }
    // Sampling probability p^(1-k-eps) = (1/p^E)^(1/eps_den).
    let e_exp = (k as u32 - 1) * eps_den + eps_num;
    let theta_base = Rat::new(Int::one(), pow_int_u(&Int::from(p), e_exp));
    let f_exp = (d - k) as u32 * eps_den - eps_num;

    let universe = all_fp_points(p, dim);
    let mut rng = stream(seed, "flat-evasive");
    for attempt in 1..=max_retries {
        let sample: Vec<Vec<u64>> = universe
            .iter()
            .filter(|_| bernoulli_root(&mut rng, &theta_base, eps_den))
            .cloned()
            .collect();
        if !meets_half_power_floor(sample.len() as u64, p, f_exp, eps_den) {
            continue;
        }
        if verify_flat_evasive(&sample, k, r, field)? {
            let points: Vec<Vec<Rat>> = sample
                .iter()
                .map(|v| v.iter().map(|&x| rat(x as i64)).collect())
                .collect();
            return Ok(EvasiveSet {
                ambient: EvasiveAmbient::PrimeField { p, dim },
                k: k - 1,
                flat_kind: format!("affine {}-flats over F_{p}", k - 1),
                r,
                epsilon: epsilon.clone(),
                verification: Verification::Exhaustive,
                points,
                transcript: EvasiveTranscript {
                    attempts: attempt,
                    prime: Some(p),
                    prime_source: None,
                    size_floor: format!(
                        "(2 |R|)^{eps_den} >= p^{f_exp} with |R| = {}",
                        sample.len()
                    ),
                    notes: notes.clone(),
                },
            });
        }
    }
    Err(Error::RetriesExhausted(max_retries))
}

/// Exhaustive verification that no (k-1)-dimensional affine flat of
/// `F_p^(d-1)` contains `r` or more of the given points. Iterates linear
/// subspaces in echelon form and histograms the points by coset.
pub fn verify_flat_evasive(points: &[Vec<u64>], k: usize, r: u64, field: PrimeField) -> Result<bool> {
    let p = field.p;
    if points.is_empty() {
        return Ok(true);
    }
    let dim = points[0].len();
    let m = k - 1;
    if m == 0 {
        // 0-flats are single points; distinctness decides.
        let mut seen = std::collections::HashSet::new();
        for pt in points {
            if !seen.insert(pt.clone()) && r <= 1 {
                return Ok(false);
            }
        }
        return Ok(r >= 2 || points.len() < r as usize);
    }
    // Work guard: p^((k-1)(d-k+1)) * p^(d-k) with d = dim + 1.
    let d = dim + 1;
    let work = pow_int_u(&Int::from(p), ((k - 1) * (d - k + 1)) as u32)
        * pow_int_u(&Int::from(p), (d - k) as u32);
    if work > Int::from(FLAT_WORK_GUARD) {
        return Err(Error::TooManyFlats);
    }
    let cap = (r - 1) as usize;
    let mut hist: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut ok = true;
    for_each_echelon_basis(p, dim, m, &mut |rows| {
        if !ok {
            return;
        }
        hist.clear();
        for pt in points {
            let coset = reduce_by_echelon(pt, rows, p);
            let c = hist.entry(coset).or_insert(0);
            *c += 1;
            if *c > cap {
                ok = false;
                return;
            }
        }
    });
    Ok(ok)
}

/// Visits every m-dimensional linear subspace of F_p^dim exactly once, as
/// reduced-echelon basis rows (pivot entries 1, zeros above/below pivots).
fn for_each_echelon_basis(p: u64, dim: usize, m: usize, visit: &mut impl FnMut(&[Vec<u64>])) {
    let mut pivots: Vec<usize> = (0..m).collect();
    loop {
        // Free positions: row i, columns beyond pivot_i that are not pivots.
        let free: Vec<(usize, usize)> = (0..m)
            .flat_map(|i| {
                let pivots = pivots.clone();
                ((pivots[i] + 1)..dim)
                    .filter(move |c| !pivots.contains(c))
                    .map(move |c| (i, c))
            })
            .collect();
        let mut values = vec![0u64; free.len()];
        loop {
            let mut rows = vec![vec![0u64; dim]; m];
            for (i, &pc) in pivots.iter().enumerate() {
                rows[i][pc] = 1;
            }
            for (&(i, c), &v) in free.iter().zip(&values) {
                rows[i][c] = v;
            }
            visit(&rows);
            // Advance values odometer.
            let mut pos = 0;
            loop {
                if pos == values.len() {
                    break;
                }
                values[pos] += 1;
                if values[pos] < p {
                    break;
                }
                values[pos] = 0;
                pos += 1;
            }
            if pos == values.len() {
                break;
            }
        }
        // Next pivot combination (lexicographic).
        let mut i = m;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if pivots[i] < dim - (m - i) {
                pivots[i] += 1;
                for j in i + 1..m {
                    pivots[j] = pivots[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return;
            }
        }
    }
}

/// Canonical coset representative of `x` modulo the row space.
fn reduce_by_echelon(x: &[u64], rows: &[Vec<u64>], p: u64) -> Vec<u64> {
    let mut rem: Vec<u64> = x.to_vec();
    for row in rows {
        let pivot = row.iter().position(|&c| c == 1).unwrap();
        let f = rem[pivot] % p;
        if f == 0 {
            continue;
        }
        for (ri, &si) in rem.iter_mut().zip(row) {
            *ri = (*ri + p * f - (f * si) % p) % p;
        }
    }
    rem
}

/// Affine rank over F_p of a point set (dimension of the affine hull + 1).
pub fn affine_rank_mod_p(points: &[Vec<u64>], p: u64) -> usize {
    let Some(first) = points.first() else { return 0 };
    let rows: Vec<Vec<Int>> = points[1..]
        .iter()
        .map(|pt| {
            pt.iter()
                .zip(first)
                .map(|(&a, &b)| Int::from((a + p - b) % p))
                .collect()
        })
        .collect();
    rank_mod_p(&rows, p) + 1
}

/// Rank of an integer matrix modulo p.
pub fn rank_mod_p(rows: &[Vec<Int>], p: u64) -> usize {
    let pi = Int::from(p);
    let mut a: Vec<Vec<Int>> = rows
        .iter()
        .map(|r| r.iter().map(|x| ((x % &pi) + &pi) % &pi).collect())
        .collect();
    let nrows = a.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = a[0].len();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pr) = (rank..nrows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(pr, rank);
        let inv = mod_inverse(&a[rank][col], &pi);
        for i in 0..nrows {
            if i == rank || a[i][col].is_zero() {
                continue;
            }
            let f = (&a[i][col] * &inv) % &pi;
            for c in col..ncols {
                let t = (&a[rank][c] * &f) % &pi;
                a[i][c] = ((&a[i][c] - t) % &pi + &pi) % &pi;
            }
        }
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

fn mod_inverse(x: &Int, p: &Int) -> Int {
    let (g, a, _) = linalg::ext_gcd(x, p);
    debug_assert!(g.is_one());
    ((a % p) + p) % p
}

/// How the lifting prime is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimePolicy {
    /// Largest prime strictly inside the admissible range; error when none.
    Strict,
    /// Strict first; when the range is empty, fall back to the largest
    /// prime for which every lift is still guaranteed and all verification
    /// guards hold. The fallback is recorded in the transcript.
    Auto,
    /// Caller-supplied prime; lifts and certificates are still verified.
    Explicit(u64),
}

/// Largest prime `p` with `1 < p < (1 - lambda_d) beta / (8 d^2)`,
/// decided exactly (the bound mixes a square root and a fractional power).
pub fn largest_valid_prime(profile: &MinimaProfile) -> Result<PrimeField> {
    if !profile.last_below_one() {
        return Err(Error::MinimaTooLarge);
    }
    let d = profile.rank();
    let ab = alpha_beta(&profile.lambdas_sq, d.max(2) - 1)?;
    let mut p_cand = prime_bound_floor(profile, &ab.beta)?;
    while p_cand > 1 {
        if is_prime(p_cand) {
            let field = PrimeField::new(p_cand)?;
            // Bertrand clause asserted per call: p >= bound / 2, i.e. NOT
            // (16 d^2 p < (1 - lambda_d) beta).
            if prime_below_bound(profile, &ab.beta, p_cand, 16)? {
                return Err(Error::VerificationFailed(
                    "largest prime fell below half the admissible bound".into(),
                ));
            }
            return Ok(field);
        }
        p_cand -= 1;
    }
    Err(Error::NoValidPrime)
}

/// Whether `m * d^2 * x < (1 - lambda_d) * beta` holds exactly, where the
/// caller packs the factor (8 or 16) and the candidate into `x` and `m`.
fn prime_below_bound(
    profile: &MinimaProfile,
    beta: &PowerVal,
    x: u64,
    factor: u64,
) -> Result<bool> {
    let d = profile.rank() as u64;
    let t = rat((factor * d * d) as i64) * rat(x as i64);
    // t < (1 - sqrt(s)) * beta with s = lambda_d^2:
    // raise to 2e: t^(2e) < (A - C sqrt(s)) * B, expand the binomial.
    let s = profile.lambdas_sq.last().unwrap();
    let e = beta.e;
    let (a, c) = surd_binomial_expansion(s, 2 * e);
    let ab = &a * &beta.pow2e;
    let cb = &c * &beta.pow2e;
    let lhs = pow_u(&t, 2 * e);
    // Condition: ab - lhs - cb sqrt(s) > 0.
    Ok(cmp_surd(&(&ab - &lhs), &(-&cb), s) == std::cmp::Ordering::Greater)
}

/// `(1 - sqrt(s))^n = A - C sqrt(s)` for rational `s`; returns `(A, C)`.
fn surd_binomial_expansion(s: &Rat, n: u32) -> (Rat, Rat) {
    let mut a = Rat::zero();
    let mut c = Rat::zero();
    let mut binom = Int::one();
    for i in 0..=n {
        let term = rat_of(&binom) * pow_u(s, i / 2);
        if i % 2 == 0 {
            a += term;
        } else {
            c += term;
        }
        binom = binom * Int::from(n - i) / Int::from(i + 1);
    }
    (a, c)
}

/// Largest integer strictly below the prime bound (0 when the bound <= 2).
fn prime_bound_floor(profile: &MinimaProfile, beta: &PowerVal) -> Result<u64> {
    let d = profile.rank();
    let s = profile.lambdas_sq.last().unwrap();
    let est = (1.0 - rat_to_f64(s).sqrt()) * beta.to_f64() / (8.0 * (d * d) as f64);
    let mut x = if est.is_finite() && est > 0.0 { est as u64 } else { 0 };
    if x > PRIME_GUARD + 1 {
        x = PRIME_GUARD + 1;
    }
    // Correct the float guess exactly.
    while x + 1 <= PRIME_GUARD + 1 && prime_below_bound(profile, beta, x + 1, 8)? {
        x += 1;
    }
    while x > 0 && !prime_below_bound(profile, beta, x, 8)? {
        x -= 1;
    }
    Ok(x)
}

/// A lift `u' = j v + p w` of `v` into the body, searched over
/// `j in 1..p` with nearest-integer rounding plus unit offsets, then an
/// exhaustive centered enumeration as fallback.
#[derive(Debug, Clone)]
pub struct Lift {
    pub j: u64,
    pub w: Vec<Int>,
    pub point: Vec<Int>,
}

pub fn lift_to_body(v: &[Int], p: u64, coord_form: &Mat) -> Result<Lift> {
    let dim = v.len();
    let pr = rat(p as i64);
    let scale = |u: &[Int]| -> Rat {
        let ur: Vec<Rat> = u.iter().map(rat_of).collect();
        linalg::dot(&ur, &linalg::mat_vec(coord_form, &ur))
    };
    if v.iter().all(|x| x.is_zero()) {
        return Ok(Lift { j: 1, w: vec![Int::zero(); dim], point: vec![Int::zero(); dim] });
    }
    for j in 1..p {
        let jv: Vec<Int> = v.iter().map(|x| x * Int::from(j)).collect();
        let base: Vec<Int> = jv
            .iter()
            .map(|x| round_half_up(&(-rat_of(x) / &pr)))
            .collect();
        // Unit offsets around the rounded center, odometer order.
        let sides = vec![Int::one(); dim];
        let mut found: Option<Lift> = None;
        let mut visit = |offsets: &[Int]| {
            if found.is_some() {
                return;
            }
            let w: Vec<Int> = base.iter().zip(offsets).map(|(b, o)| b + o).collect();
            let u: Vec<Int> = jv
                .iter()
                .zip(&w)
                .map(|(a, wi)| a + wi * Int::from(p))
                .collect();
            if scale(&u) <= Rat::one() {
                found = Some(Lift { j, w, point: u });
            }
        };
        crate::covering::odometer(&sides, true, &mut visit);
        if let Some(l) = found {
            return Ok(l);
        }
    }
    // Exhaustive fallback: enumerate w with (j v + p w) in the body, i.e.
    // integer w with (w + j v / p)^T (p^2 Q) (w + j v / p) <= 1.
    let p_sq = &pr * &pr;
    let scaled_form: Mat = coord_form
        .iter()
        .map(|row| row.iter().map(|x| x * &p_sq).collect())
        .collect();
    for j in 1..p {
        let center: Vec<Rat> = v.iter().map(|x| -(rat_of(x) * rat(j as i64)) / &pr).collect();
        let hits = enumerate_form(&scaled_form, &Rat::one(), Some(&center), 1000)?;
        if let Some((w, _)) = hits.into_iter().min_by(|(a, _), (b, _)| a.cmp(b)) {
            let u: Vec<Int> = v
                .iter()
                .zip(&w)
                .map(|(x, wi)| x * Int::from(j) + wi * Int::from(p))
                .collect();
            return Ok(Lift { j, w, point: u });
        }
    }
    Err(Error::LiftNotFound)
}

/// Points of `L ∩ K` with every k-dimensional linear subspace of the
/// ambient space containing at most r-1 of them: the finite-field set is
/// lifted through a prime modulus, and the certificate re-verified over
/// the rationals (exhaustively when feasible, sampled otherwise).
pub fn build_linear_evasive(
    lattice: &LatticeBasis,
    body: &Body,
    k: usize,
    epsilon: &Rat,
    seed: u64,
    policy: PrimePolicy,
) -> Result<EvasiveSet> {
    body.validate(lattice.ambient_dim())?;
    check_epsilon(epsilon)?;
    let d = lattice.rank();
    if !(1..d).contains(&k) {
        return Err(Error::ParamOutOfRange(format!("k = {k} out of range for rank {d}")));
    }
    if k == d - 1 && d > 2 {
        return Err(Error::ParamOutOfRange(
            "k = d-1 linear-evasive sets are outside the finite-field pipeline".into(),
        ));
    }
    let coord_form = body_form(lattice, body);
    let profile = successive_minima_form(lattice, &coord_form)?;
    if !profile.last_below_one() {
        return Err(Error::MinimaTooLarge);
    }
    let (p, prime_source) = choose_prime(&profile, &coord_form, d, k, epsilon, policy)?;
    PrimeField::new(p)?;

    // The finite-field stage.
    let base = build_flat_evasive(d, k, epsilon, p, seed, DEFAULT_MAX_RETRIES)?;
    let (_, eps_den) = check_epsilon(epsilon)?;
    let eps_num = epsilon.numer().to_u32().unwrap();
    let t = if k == 1 {
        (p as u64).pow((d - 1) as u32)
    } else {
        ceil_half_power(p, (d - k) as u32 * eps_den - eps_num, eps_den)
    };
    let mut fp_points = base.integer_points();
    fp_points.truncate(t as usize);
    let r = base.r;

    // Append 1 and lift each point into the body.
    let mut lifted: Vec<Vec<Int>> = Vec::with_capacity(fp_points.len());
    let mut notes = Vec::new();
    for v in &fp_points {
        let mut u = v.clone();
        u.push(Int::one());
        let lift = lift_to_body(&u, p, &coord_form)?;
        // Congruence certificate: u' = j u (mod p), coordinatewise.
        let pi = Int::from(p);
        for (a, b) in lift.point.iter().zip(&u) {
            let delta = a - b * Int::from(lift.j);
            if !(&delta % &pi).is_zero() {
                return Err(Error::VerificationFailed("lift congruence failed".into()));
            }
        }
        lifted.push(lift.point);
    }
    // Distinctness (duplicates would contradict the independence certificate).
    {
        let mut sorted = lifted.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != lifted.len() {
            return Err(Error::VerificationFailed("lifted points collide".into()));
        }
    }

    // Rank certificate over the rationals.
    let verification = verify_rank_certificate(&lifted, k, r, p, seed, &mut notes)?;

    let points: Vec<Vec<Rat>> = lifted
        .iter()
        .map(|c| lattice.point_from_coords(c))
        .collect();
    Ok(EvasiveSet {
        ambient: EvasiveAmbient::LatticeBody { dim: d },
        k,
        flat_kind: format!("linear {k}-flats in the ambient space"),
        r,
        epsilon: epsilon.clone(),
        verification,
        points,
        transcript: EvasiveTranscript {
            attempts: base.transcript.attempts,
            prime: Some(p),
            prime_source: Some(prime_source),
            size_floor: format!("|S| = t = {t}"),
            notes,
        },
    })
}

fn choose_prime(
    profile: &MinimaProfile,
    coord_form: &Mat,
    d: usize,
    k: usize,
    epsilon: &Rat,
    policy: PrimePolicy,
) -> Result<(u64, String)> {
    match policy {
        PrimePolicy::Explicit(p) => Ok((p, "explicit".into())),
        PrimePolicy::Strict => largest_valid_prime(profile).map(|f| (f.p, "strict".into())),
        PrimePolicy::Auto => match largest_valid_prime(profile) {
            Ok(f) => Ok((f.p, "strict".into())),
            Err(Error::NoValidPrime) => {
                let p = best_effort_prime(coord_form, d, k, epsilon)?;
                Ok((p, "fallback".into()))
            }
            Err(e) => Err(e),
        },
    }
}

/// Largest prime for which (a) the finite-field stage is admissible,
/// (b) the exhaustive flat verification fits its guard, (c) the sampling
/// domain fits, and (d) nearest-integer rounding certifies every lift
/// (p^2 max-over-unit-box of the form <= 1).
fn best_effort_prime(coord_form: &Mat, d: usize, k: usize, epsilon: &Rat) -> Result<u64> {
    let box_max = form_unit_box_max(coord_form);
    let r = if k == 1 {
        2
    } else {
        ceil_rat(&(rat((k * (d - k + 1)) as i64) / epsilon))
    };
    let admissible = |p: u64| -> bool {
        if !is_prime(p) {
            return false;
        }
        if k >= 2 && pow_int_u(&Int::from(p), (k - 1) as u32) <= Int::from(r) {
            return false;
        }
        let verify_work = pow_int_u(&Int::from(p), ((k.max(1) - 1) * (d - k + 1) + (d - k)) as u32);
        if verify_work > Int::from(FLAT_WORK_GUARD) {
            return false;
        }
        if pow_int_u(&Int::from(p), (d - 1) as u32) > Int::from(FLAT_WORK_GUARD) {
            return false;
        }
        rat((p * p) as i64) * &box_max <= Rat::one()
    };
    (2..=PRIME_GUARD)
        .rev()
        .find(|&p| admissible(p))
        .ok_or(Error::NoValidPrime)
}

/// Verifies that every r-subset of the lifted points spans at least k+1
/// dimensions over Q; exhaustive when the subset count is small, sampled
/// otherwise. Also spot-checks the finite-field-to-rational rank transfer.
fn verify_rank_certificate(
    points: &[Vec<Int>],
    k: usize,
    r: u64,
    p: u64,
    seed: u64,
    notes: &mut Vec<String>,
) -> Result<Verification> {
    let n = points.len();
    let r = r as usize;
    if n < r {
        notes.push("fewer points than r; certificate vacuous".into());
        return Ok(Verification::Exhaustive);
    }
    let total = binomial_u128(n, r);
    let check = |idx: &[usize]| -> Result<()> {
        let rows: Vec<Vec<Int>> = idx.iter().map(|&i| points[i].clone()).collect();
        if int_rank(&rows) < k + 1 {
            return Err(Error::VerificationFailed(format!(
                "an r-subset spans fewer than {} dimensions",
                k + 1
            )));
        }
        Ok(())
    };
    if total <= SUBSET_EXHAUSTIVE_CAP {
        let mut idx: Vec<usize> = (0..r).collect();
        loop {
            check(&idx)?;
            // Next combination.
            let mut i = r;
            loop {
                if i == 0 {
                    return Ok(Verification::Exhaustive);
                }
                i -= 1;
                if idx[i] < n - (r - i) {
                    idx[i] += 1;
                    for j in i + 1..r {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
                if i == 0 {
                    return Ok(Verification::Exhaustive);
                }
            }
        }
    }
    let mut rng = stream(seed, "rank-certificate");
    for _ in 0..SUBSET_SAMPLES {
        let idx = sample_distinct(&mut rng, n, r);
        check(&idx)?;
    }
    // Rank-transfer spot check: F_p rank >= k+1 must imply rational rank.
    for _ in 0..1000 {
        let idx = sample_distinct(&mut rng, n, r);
        let rows: Vec<Vec<Int>> = idx.iter().map(|&i| points[i].clone()).collect();
        let fp_rank = rank_mod_p(&rows, p);
        let q_rank = int_rank(&rows);
        if fp_rank >= k + 1 && q_rank < k + 1 {
            return Err(Error::VerificationFailed("rank transfer violated".into()));
        }
    }
    notes.push(format!("sampled {SUBSET_SAMPLES} subsets of size {r}"));
    Ok(Verification::Sampled { samples: SUBSET_SAMPLES, seed })
}

fn sample_distinct(rng: &mut impl rand::RngCore, n: usize, r: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = Vec::with_capacity(r);
    while idx.len() < r {
        let c = uniform_usize(rng, n);
        if !idx.contains(&c) {
            idx.push(c);
        }
    }
    idx.sort_unstable();
    idx
}

fn binomial_u128(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Grid points of `Z^d ∩ B^d(s)` sorted lexicographically.
pub fn grid_ball_points(d: usize, s: i64) -> Result<Vec<Vec<Int>>> {
    let lattice = LatticeBasis::standard(d);
    let body = Body::ball(rat(s))?;
    let pts = crate::enumerate::enumerate_points(&lattice, &body)?;
    Ok(pts
        .iter()
        .map(|p| p.iter().map(|x| x.numer().clone()).collect())
        .collect())
}

/// Random subset of the grid ball in which every k-dimensional affine flat
/// holds at most r-1 points, with
/// `r = ceil((k+1)(d-k+1)/eps) + k + 1`. The k = 0 branch returns the whole
/// grid ball with the vacuous cap r = 1.
pub fn build_affine_evasive(
    d: usize,
    k: usize,
    s: i64,
    epsilon: &Rat,
    seed: u64,
) -> Result<EvasiveSet> {
    let (eps_num, eps_den) = check_epsilon(epsilon)?;
    if d == 0 || d > crate::lattice::MAX_DIM || k >= d {
        return Err(Error::ParamOutOfRange(format!("affine-evasive (d, k) = ({d}, {k})")));
    }
    if s < 1 {
        return Err(Error::ParamOutOfRange("scale must be >= 1".into()));
    }
    let universe = grid_ball_points(d, s)?;
    if k == 0 {
        let points: Vec<Vec<Rat>> =
            universe.iter().map(|v| v.iter().map(rat_of).collect()).collect();
        let n = points.len();
        return Ok(EvasiveSet {
            ambient: EvasiveAmbient::Grid { dim: d, scale: s },
            k: 0,
            flat_kind: "affine 0-flats in the grid (vacuous cap)".into(),
            r: 1,
            epsilon: epsilon.clone(),
            verification: Verification::Exhaustive,
            points,
            transcript: EvasiveTranscript {
                attempts: 0,
                prime: None,
                prime_source: None,
                size_floor: format!("|S| = |grid ball| = {n}"),
                notes: vec!["whole grid ball".into()],
            },
        });
    }
    let r = ceil_rat(&(rat(((k + 1) * (d - k + 1)) as i64) / epsilon)) + k as u64 + 1;
    // Sampling probability s^(-k-eps).
    let e_exp = k as u32 * eps_den + eps_num;
    let theta = Rat::new(Int::one(), pow_int_u(&Int::from(s), e_exp));
    let f_exp = (d - k) as u32 * eps_den - eps_num;
    let mut rng = stream(seed, "affine-evasive");
    for attempt in 1..=DEFAULT_MAX_RETRIES {
        let sample: Vec<Vec<Int>> = universe
            .iter()
            .filter(|_| bernoulli_root(&mut rng, &theta, eps_den))
            .cloned()
            .collect();
        // Floor |S| >= s^(d-k-eps) / 4: (4 m)^b >= s^((d-k)b - a) * 1.
        let floor_ok = pow_int_u(&Int::from(4 * sample.len() as u64), eps_den)
            >= pow_int_u(&Int::from(s), f_exp);
        if !floor_ok {
            continue;
        }
        if verify_affine_hull_caps(&sample, k, r)? {
            let points: Vec<Vec<Rat>> =
                sample.iter().map(|v| v.iter().map(rat_of).collect()).collect();
            return Ok(EvasiveSet {
                ambient: EvasiveAmbient::Grid { dim: d, scale: s },
                k,
                flat_kind: format!("affine {k}-flats in the grid"),
                r,
                epsilon: epsilon.clone(),
                verification: Verification::Exhaustive,
                points,
                transcript: EvasiveTranscript {
                    attempts: attempt,
                    prime: None,
                    prime_source: None,
                    size_floor: format!(
                        "(4 |S|)^{eps_den} >= s^{f_exp} with |S| = {}",
                        sample.len()
                    ),
                    notes: Vec::new(),
                },
            });
        }
    }
    Err(Error::RetriesExhausted(DEFAULT_MAX_RETRIES))
}

/// No k-flat spanned by sample points holds r or more sample points: it is
/// enough to check the affine hull of every (k+1)-subset, because any flat
/// achieving the cap is spanned (inside itself) by such a subset.
pub fn verify_affine_hull_caps(points: &[Vec<Int>], k: usize, r: u64) -> Result<bool> {
    let n = points.len();
    if n <= k + 1 {
        return Ok(true);
    }
    let work = binomial_u128(n, k + 1).saturating_mul(n as u128);
    if work > FLAT_WORK_GUARD as u128 {
        return Err(Error::TooManyFlats);
    }
    let cap = (r - 1) as usize;
    let mut idx: Vec<usize> = (0..=k).collect();
    loop {
        let base = &points[idx[0]];
        let dirs: Vec<Vec<Int>> = idx[1..]
            .iter()
            .map(|&i| points[i].iter().zip(base).map(|(a, b)| a - b).collect())
            .collect();
        let hull_rank = int_rank(&dirs);
        let mut count = 0usize;
        for q in points {
            let shifted: Vec<Int> = q.iter().zip(base).map(|(a, b)| a - b).collect();
            let mut rows = dirs.clone();
            rows.push(shifted);
            if int_rank(&rows) == hull_rank {
                count += 1;
                if count > cap {
                    return Ok(false);
                }
            }
        }
        // Next combination.
        let mut i = k + 1;
        loop {
            if i == 0 {
                return Ok(true);
            }
            i -= 1;
            if idx[i] < n - (k + 1 - i) {
                idx[i] += 1;
                for j in i + 1..=k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return Ok(true);
            }
        }
    }
}

/// Linear counterpart used by the incidence pipeline when the prime route
/// is unavailable: sampled grid points, no k-flat (through the origin)
/// spanned by sample points holding r or more of them. The origin itself
/// is excluded from the sample.
pub fn build_linear_evasive_grid(
    d: usize,
    k: usize,
    s: i64,
    epsilon: &Rat,
    seed: u64,
) -> Result<EvasiveSet> {
    let (eps_num, eps_den) = check_epsilon(epsilon)?;
    if d == 0 || d > crate::lattice::MAX_DIM || k == 0 || k >= d {
        return Err(Error::ParamOutOfRange(format!("linear-evasive grid (d, k) = ({d}, {k})")));
    }
    let universe: Vec<Vec<Int>> = grid_ball_points(d, s)?
        .into_iter()
        .filter(|v| v.iter().any(|x| !x.is_zero()))
        .collect();
    let r = ceil_rat(&(rat(((k + 1) * (d - k + 1)) as i64) / epsilon)) + k as u64 + 1;
    let e_exp = k as u32 * eps_den + eps_num;
    let theta = Rat::new(Int::one(), pow_int_u(&Int::from(s), e_exp));
    let f_exp = (d - k) as u32 * eps_den - eps_num;
    let mut rng = stream(seed, "linear-evasive-grid");
    for attempt in 1..=DEFAULT_MAX_RETRIES {
        let sample: Vec<Vec<Int>> = universe
            .iter()
            .filter(|_| bernoulli_root(&mut rng, &theta, eps_den))
            .cloned()
            .collect();
        let floor_ok = pow_int_u(&Int::from(4 * sample.len() as u64), eps_den)
            >= pow_int_u(&Int::from(s), f_exp);
        if !floor_ok {
            continue;
        }
        if verify_linear_span_caps(&sample, k, r)? {
            let points: Vec<Vec<Rat>> =
                sample.iter().map(|v| v.iter().map(rat_of).collect()).collect();
            return Ok(EvasiveSet {
                ambient: EvasiveAmbient::Grid { dim: d, scale: s },
                k,
                flat_kind: format!("linear {k}-flats in the grid"),
                r,
                epsilon: epsilon.clone(),
                verification: Verification::Exhaustive,
                points,
                transcript: EvasiveTranscript {
                    attempts: attempt,
                    prime: None,
                    prime_source: Some("sampled grid".into()),
                    size_floor: format!(
                        "(4 |S|)^{eps_den} >= s^{f_exp} with |S| = {}",
                        sample.len()
                    ),
                    notes: Vec::new(),
                },
            });
        }
    }
    Err(Error::RetriesExhausted(DEFAULT_MAX_RETRIES))
}

/// Linear analogue of the hull check: spans of k-subsets.
pub fn verify_linear_span_caps(points: &[Vec<Int>], k: usize, r: u64) -> Result<bool> {
    let n = points.len();
    if n <= k {
        return Ok(true);
    }
    let work = binomial_u128(n, k).saturating_mul(n as u128);
    if work > FLAT_WORK_GUARD as u128 {
        return Err(Error::TooManyFlats);
    }
    let cap = (r - 1) as usize;
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let dirs: Vec<Vec<Int>> = idx.iter().map(|&i| points[i].clone()).collect();
        let span_rank = int_rank(&dirs);
        let mut count = 0usize;
        for q in points {
            let mut rows = dirs.clone();
            rows.push(q.clone());
            if int_rank(&rows) == span_rank {
                count += 1;
                if count > cap {
                    return Ok(false);
                }
            }
        }
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(true);
            }
            i -= 1;
            if idx[i] < n - (k - i) {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return Ok(true);
            }
        }
    }
}
