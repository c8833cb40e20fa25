#![allow(dead_code)] // each test target compiles its own copy and uses a subset

//! Shared helpers for integration tests: seeded random lattices and an
//! independent brute-force minima oracle.

use lattice_cover::lattice::LatticeBasis;
use lattice_cover::linalg;
use lattice_cover::rational::{rat_of, rat_to_f64, Int, Rat};
use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha12Rng;

pub fn test_stream(seed: u64, label: &str) -> ChaCha12Rng {
    lattice_cover::rng::stream(seed, label)
}

/// Random nonsingular integer lattice with entries in [-max_entry, max_entry].
pub fn random_lattice(rng: &mut ChaCha12Rng, d: usize, max_entry: i64) -> LatticeBasis {
    loop {
        let rows: Vec<Vec<i64>> = (0..d)
            .map(|_| (0..d).map(|_| rng.gen_range(-max_entry..=max_entry)).collect())
            .collect();
        if let Ok(l) = LatticeBasis::from_integer_rows(&rows) {
            return l;
        }
    }
}

/// Random unimodular integer matrix: a product of elementary operations.
pub fn random_unimodular(rng: &mut ChaCha12Rng, d: usize, steps: usize) -> Vec<Vec<Int>> {
    let mut u = linalg::int_identity(d);
    for _ in 0..steps {
        let i = rng.gen_range(0..d);
        let mut j = rng.gen_range(0..d);
        while j == i {
            j = rng.gen_range(0..d);
        }
        let c = rng.gen_range(-2i64..=2);
        if c == 0 {
            u.swap(i, j);
            continue;
        }
        // row_i += c * row_j
        let row_j = u[j].clone();
        for (a, b) in u[i].iter_mut().zip(&row_j) {
            *a += Int::from(c) * b;
        }
    }
    u
}

/// Independent successive-minima oracle for the unit ball: scans an integer
/// coordinate box that provably contains witnesses for every minimum, then
/// extracts the minima greedily by squared norm. No lattice reduction, no
/// tree pruning; completely separate from the library's search path.
pub fn minima_brute_unit_ball(lattice: &LatticeBasis) -> Vec<Rat> {
    let d = lattice.rank();
    let vectors = lattice.vectors();
    // T = max generator norm^2 bounds lambda_d^2 from above.
    let t: Rat = vectors
        .iter()
        .map(|v| linalg::dot(v, v))
        .max()
        .unwrap();
    // Coordinate box: |a_i| <= |row_i(B^-1)| sqrt(T); over-approximate in
    // floating point and pad by one.
    let cols: Vec<Vec<Rat>> = linalg::transpose(vectors);
    let binv = linalg::inverse(&cols).expect("basis invertible");
    let sqrt_t = rat_to_f64(&t).sqrt();
    let bounds: Vec<i64> = binv
        .iter()
        .map(|row| {
            let norm = rat_to_f64(&linalg::dot(row, row)).sqrt();
            (norm * sqrt_t).ceil() as i64 + 1
        })
        .collect();
    let mut points: Vec<(Rat, Vec<Int>)> = Vec::new();
    let mut coords = vec![0i64; d];
    scan_box(&bounds, 0, &mut coords, &mut |c| {
        if c.iter().all(|&x| x == 0) {
            return;
        }
        let a: Vec<Int> = c.iter().map(|&x| Int::from(x)).collect();
        let p = lattice.point_from_coords(&a);
        let norm_sq = linalg::dot(&p, &p);
        if norm_sq <= t {
            points.push((norm_sq, a));
        }
    });
    points.sort_by(|(x, a), (y, b)| x.cmp(y).then_with(|| a.cmp(b)));
    let mut lambdas = Vec::new();
    let mut chosen: Vec<Vec<Rat>> = Vec::new();
    for (norm_sq, a) in points {
        let row: Vec<Rat> = a.iter().map(rat_of).collect();
        let mut rows = chosen.clone();
        rows.push(row.clone());
        if linalg::rank(&rows) == chosen.len() + 1 {
            chosen.push(row);
            lambdas.push(norm_sq);
            if lambdas.len() == d {
                break;
            }
        }
    }
    assert_eq!(lambdas.len(), d, "oracle box missed a witness");
    lambdas
}

fn scan_box(bounds: &[i64], level: usize, coords: &mut Vec<i64>, visit: &mut impl FnMut(&[i64])) {
    if level == bounds.len() {
        visit(coords);
        return;
    }
    for v in -bounds[level]..=bounds[level] {
        coords[level] = v;
        scan_box(bounds, level + 1, coords, visit);
    }
}

/// Exact check that a rational vector is an integer multiple of another.
pub fn is_integer_multiple(x: &[Rat], gen: &[Rat]) -> bool {
    // find the first nonzero generator coordinate
    let Some(i) = gen.iter().position(|g| !g.is_zero()) else {
        return x.iter().all(|v| v.is_zero());
    };
    let q = &x[i] / &gen[i];
    if !q.denom().eq(&Int::from(1)) {
        return false;
    }
    gen.iter().zip(x).all(|(g, v)| &(g * &q) == v)
}
