//! Brute-force ground truth at tiny scale: exact minimum subspace covers
//! and exact maximum evasive subsets.
//!
//! Any optimal cover may be assumed to use flats spanned by the points it
//! covers: replacing a flat by the span (or affine hull) of its covered
//! points never uncovers anything and can only lower the dimension, and a
//! lower-dimensional flat can be re-inflated to dimension k afterwards by
//! adjoining unused directions. The candidate pool of spans of <= k-point
//! subsets (hulls of <= k+1 points in the affine case) is therefore
//! complete, and exhaustive branch and bound over it certifies optimality.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::flats::{affine_hull, canonical_linear_flat, AffineFlat, LinearFlat};
use crate::linalg::int_to_rat_vec;
use crate::rational::{Int, Rat};

pub const POINT_GUARD: usize = 200;
pub const CANDIDATE_GUARD: usize = 5000;
pub const NODE_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlatKind {
    Linear,
    Affine,
}

#[derive(Debug, Clone)]
pub struct CoverInstance {
    pub points: Vec<Vec<Int>>,
    pub ambient: usize,
    pub k: usize,
    pub kind: FlatKind,
}

impl CoverInstance {
    pub fn new(points: Vec<Vec<Int>>, ambient: usize, k: usize, kind: FlatKind) -> Result<Self> {
        if points.len() > POINT_GUARD {
            return Err(Error::TooManyPoints(POINT_GUARD));
        }
        let mut sorted = points.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != points.len() {
            return Err(Error::ParamOutOfRange("points must be distinct".into()));
        }
        if k >= ambient {
            return Err(Error::ParamOutOfRange("k must be below the ambient dimension".into()));
        }
        Ok(Self { points, ambient, k, kind })
    }

    pub fn grid_ball(n: i64, d: usize, k: usize, kind: FlatKind) -> Result<Self> {
        let points = crate::evasive::grid_ball_points(d, n)?;
        Self::new(points, d, k, kind)
    }
}

#[derive(Debug, Clone)]
pub enum WitnessFlats {
    Linear(Vec<LinearFlat>),
    Affine(Vec<AffineFlat>),
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub optimum: usize,
    pub witness: WitnessFlats,
    pub nodes: u64,
    /// True when the search exhausted; false when the node budget tripped
    /// and `optimum` is only the best known value.
    pub optimal: bool,
}

type Bits = Vec<u64>;

fn bits_new(n: usize) -> Bits {
    vec![0u64; n.div_ceil(64)]
}

fn bits_set(b: &mut Bits, i: usize) {
    b[i / 64] |= 1 << (i % 64);
}

fn bits_get(b: &Bits, i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

fn bits_or(a: &Bits, b: &Bits) -> Bits {
    a.iter().zip(b).map(|(x, y)| x | y).collect()
}

fn bits_count(b: &Bits) -> usize {
    b.iter().map(|w| w.count_ones() as usize).sum()
}

fn bits_subset(a: &Bits, b: &Bits) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

/// Candidate flats with their exact coverage over the instance points,
/// deduplicated by canonical form.
pub struct Candidates {
    pub linear: Vec<LinearFlat>,
    pub affine: Vec<AffineFlat>,
    pub coverage: Vec<Bits>,
}

pub fn candidate_flats(instance: &CoverInstance) -> Result<Candidates> {
    let n = instance.points.len();
    let rat_points: Vec<Vec<Rat>> = instance.points.iter().map(|p| int_to_rat_vec(p)).collect();
    match instance.kind {
        FlatKind::Linear => {
            let mut seen: BTreeMap<LinearFlat, Bits> = BTreeMap::new();
            let nonzero: Vec<usize> = (0..n)
                .filter(|&i| instance.points[i].iter().any(|x| !x.is_zero()))
                .collect();
            for_each_subset(&nonzero, instance.k, &mut |subset| {
                if subset.is_empty() {
                    return Ok(());
                }
                let gens: Vec<Vec<Rat>> =
                    subset.iter().map(|&i| rat_points[i].clone()).collect();
                let flat = canonical_linear_flat(&gens, instance.ambient)?;
                if seen.len() > CANDIDATE_GUARD {
                    return Err(Error::TooManyFlats);
                }
                seen.entry(flat.clone()).or_insert_with(|| {
                    let mut bits = bits_new(n);
                    for (i, p) in rat_points.iter().enumerate() {
                        if flat.contains(p) {
                            bits_set(&mut bits, i);
                        }
                    }
                    bits
                });
                Ok(())
            })?;
            let (linear, coverage): (Vec<_>, Vec<_>) = seen.into_iter().unzip();
            Ok(Candidates { linear, affine: Vec::new(), coverage })
        }
        FlatKind::Affine => {
            let mut seen: BTreeMap<AffineFlat, Bits> = BTreeMap::new();
            let all: Vec<usize> = (0..n).collect();
            for_each_subset(&all, instance.k + 1, &mut |subset| {
                if subset.is_empty() {
                    return Ok(());
                }
                let pts: Vec<Vec<Rat>> = subset.iter().map(|&i| rat_points[i].clone()).collect();
                let flat = affine_hull(&pts, instance.ambient)?;
                if seen.len() > CANDIDATE_GUARD {
                    return Err(Error::TooManyFlats);
                }
                seen.entry(flat.clone()).or_insert_with(|| {
                    let mut bits = bits_new(n);
                    for (i, p) in rat_points.iter().enumerate() {
                        if flat.contains(p) {
                            bits_set(&mut bits, i);
                        }
                    }
                    bits
                });
                Ok(())
            })?;
            let (affine, coverage): (Vec<_>, Vec<_>) = seen.into_iter().unzip();
            Ok(Candidates { linear: Vec::new(), affine, coverage })
        }
    }
}

/// All subsets of `items` with size between 1 and `max_size`.
fn for_each_subset(
    items: &[usize],
    max_size: usize,
    visit: &mut impl FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    fn rec(
        items: &[usize],
        start: usize,
        max_size: usize,
        current: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]) -> Result<()>,
    ) -> Result<()> {
        if !current.is_empty() {
            visit(current)?;
        }
        if current.len() == max_size {
            return Ok(());
        }
        for i in start..items.len() {
            current.push(items[i]);
            rec(items, i + 1, max_size, current, visit)?;
            current.pop();
        }
        Ok(())
    }
    let mut current = Vec::new();
    rec(items, 0, max_size, &mut current, visit)
}

/// Exact minimum cover by branch and bound with a greedy incumbent,
/// min-degree branching, and dominance pruning of the candidate pool.
pub fn min_cover_exact(instance: &CoverInstance) -> Result<OracleResult> {
    let n = instance.points.len();
    if n == 0 {
        return Ok(OracleResult {
            optimum: 0,
            witness: match instance.kind {
                FlatKind::Linear => WitnessFlats::Linear(Vec::new()),
                FlatKind::Affine => WitnessFlats::Affine(Vec::new()),
            },
            nodes: 0,
            optimal: true,
        });
    }
    let cands = candidate_flats(instance)?;
    let mut coverage = cands.coverage.clone();
    // Points covered by no candidate: only the origin in the linear kind
    // when it is the sole point; one padded flat covers it.
    let mut uncoverable = bits_new(n);
    for i in 0..n {
        if !coverage.iter().any(|c| bits_get(c, i)) {
            bits_set(&mut uncoverable, i);
        }
    }
    let base_extra = if bits_count(&uncoverable) > 0 { 1usize } else { 0 };
    if base_extra > 0 {
        // Only the origin can be candidate-free (every other point spans
        // something); one flat through the origin absorbs it.
        let origin_only = (0..n).all(|i| {
            !bits_get(&uncoverable, i) || instance.points[i].iter().all(|x| x.is_zero())
        });
        if !origin_only {
            return Err(Error::VerificationFailed("a point escaped the candidate pool".into()));
        }
    }
    // Drop dominated candidates (coverage strictly inside another's).
    let order: Vec<usize> = {
        let mut idx: Vec<usize> = (0..coverage.len()).collect();
        idx.sort_by_key(|&i| std::cmp::Reverse(bits_count(&coverage[i])));
        idx
    };
    let mut kept: Vec<usize> = Vec::new();
    for &i in &order {
        if !kept.iter().any(|&j| bits_subset(&coverage[i], &coverage[j])) {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    coverage = kept.iter().map(|&i| coverage[i].clone()).collect();

    let target: Bits = {
        let mut t = bits_new(n);
        for i in 0..n {
            if !bits_get(&uncoverable, i) {
                bits_set(&mut t, i);
            }
        }
        t
    };
    // Greedy incumbent.
    let greedy = {
        let mut chosen: Vec<usize> = Vec::new();
        let mut covered = bits_new(n);
        while !bits_subset(&target, &covered) {
            let best = (0..coverage.len())
                .max_by_key(|&i| {
                    coverage[i]
                        .iter()
                        .zip(&covered)
                        .zip(&target)
                        .map(|((c, v), t)| (c & !v & t).count_ones() as usize)
                        .sum::<usize>()
                })
                .unwrap();
            chosen.push(best);
            covered = bits_or(&covered, &coverage[best]);
        }
        chosen
    };

    struct Search<'a> {
        coverage: &'a [Bits],
        target: &'a Bits,
        per_point: Vec<Vec<usize>>,
        best: Vec<usize>,
        nodes: u64,
        budget_hit: bool,
    }
    impl Search<'_> {
        fn max_cover_size(&self) -> usize {
            self.coverage.iter().map(bits_count).max().unwrap_or(1).max(1)
        }

        fn run(&mut self, chosen: &mut Vec<usize>, covered: Bits) {
            self.nodes += 1;
            if self.nodes > NODE_BUDGET {
                self.budget_hit = true;
                return;
            }
            if bits_subset(self.target, &covered) {
                if chosen.len() < self.best.len() {
                    self.best = chosen.clone();
                }
                return;
            }
            // Lower bound: remaining points / largest candidate.
            let remaining = self
                .target
                .iter()
                .zip(&covered)
                .map(|(t, c)| (t & !c).count_ones() as usize)
                .sum::<usize>();
            let lb = chosen.len() + remaining.div_ceil(self.max_cover_size());
            if lb >= self.best.len() {
                return;
            }
            // Branch on the uncovered point with the fewest candidates.
            let pick = (0..self.per_point.len())
                .filter(|&i| bits_get(self.target, i) && !bits_get(&covered, i))
                .min_by_key(|&i| self.per_point[i].len())
                .unwrap();
            let mut options = self.per_point[pick].clone();
            options.sort_by_key(|&s| {
                std::cmp::Reverse(
                    self.coverage[s]
                        .iter()
                        .zip(&covered)
                        .map(|(c, v)| (c & !v).count_ones() as usize)
                        .sum::<usize>(),
                )
            });
            for s in options {
                chosen.push(s);
                self.run(chosen, bits_or(&covered, &self.coverage[s]));
                chosen.pop();
                if self.budget_hit {
                    return;
                }
            }
        }
    }
    let per_point: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..coverage.len()).filter(|&s| bits_get(&coverage[s], i)).collect())
        .collect();
    let mut search = Search {
        coverage: &coverage,
        target: &target,
        per_point,
        best: greedy,
        nodes: 0,
        budget_hit: false,
    };
    let mut chosen = Vec::new();
    search.run(&mut chosen, bits_new(n));
    let best = search.best.clone();
    let optimum = best.len() + base_extra;

    // Materialize witness flats, padded to dimension k.
    let witness = match instance.kind {
        FlatKind::Linear => {
            let all_linear: Vec<LinearFlat> = {
                let c = candidate_flats(instance)?;
                c.linear
            };
            let keep: Vec<LinearFlat> = kept
                .iter()
                .enumerate()
                .filter(|(pos, _)| best.contains(pos))
                .map(|(_, &orig)| all_linear[orig].clone())
                .collect();
            let mut flats: Vec<LinearFlat> = keep
                .into_iter()
                .map(|f| f.padded_to(instance.k))
                .collect::<Result<_>>()?;
            if base_extra > 0 {
                flats.push(
                    canonical_linear_flat(&Vec::new(), instance.ambient)?.padded_to(instance.k)?,
                );
            }
            flats.sort();
            flats.dedup();
            WitnessFlats::Linear(flats)
        }
        FlatKind::Affine => {
            let all_affine: Vec<AffineFlat> = {
                let c = candidate_flats(instance)?;
                c.affine
            };
            let flats: Vec<AffineFlat> = kept
                .iter()
                .enumerate()
                .filter(|(pos, _)| best.contains(pos))
                .map(|(_, &orig)| all_affine[orig].clone())
                .collect();
            WitnessFlats::Affine(flats)
        }
    };
    Ok(OracleResult { optimum, witness, nodes: search.nodes, optimal: !search.budget_hit })
}

/// Exact maximum subset with every flat of the kind containing at most
/// r-1 chosen points, by include/exclude branch and bound over points in
/// decreasing flat-degree order.
pub fn max_evasive_exact(
    points: &[Vec<Int>],
    ambient: usize,
    k: usize,
    r: u64,
    kind: FlatKind,
) -> Result<usize> {
    let n = points.len();
    if n > 40 {
        return Err(Error::TooManyPoints(40));
    }
    if n == 0 {
        return Ok(0);
    }
    let instance = CoverInstance::new(points.to_vec(), ambient, k, kind)?;
    let cands = candidate_flats(&instance)?;
    let coverage = cands.coverage;
    let cap = (r - 1) as usize;
    // Flat-degree ordering: points on many candidate flats first.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| {
        std::cmp::Reverse(coverage.iter().filter(|c| bits_get(c, i)).count())
    });
    let flats_of: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..coverage.len()).filter(|&f| bits_get(&coverage[f], i)).collect())
        .collect();

    struct Search<'a> {
        order: &'a [usize],
        flats_of: &'a [Vec<usize>],
        counts: Vec<usize>,
        cap: usize,
        best: usize,
        nodes: u64,
    }
    impl Search<'_> {
        fn run(&mut self, pos: usize, chosen: usize) -> Result<()> {
            self.nodes += 1;
            if self.nodes > NODE_BUDGET {
                return Err(Error::TooLarge);
            }
            if pos == self.order.len() {
                self.best = self.best.max(chosen);
                return Ok(());
            }
            if chosen + (self.order.len() - pos) <= self.best {
                return Ok(()); // cannot beat the incumbent
            }
            let p = self.order[pos];
            // Include p when no flat through it is at its cap.
            if self.flats_of[p].iter().all(|&f| self.counts[f] < self.cap) {
                for &f in &self.flats_of[p] {
                    self.counts[f] += 1;
                }
                self.run(pos + 1, chosen + 1)?;
                for &f in &self.flats_of[p] {
                    self.counts[f] -= 1;
                }
            }
            self.run(pos + 1, chosen)
        }
    }
    let mut search = Search {
        order: &order,
        flats_of: &flats_of,
        counts: vec![0; coverage.len()],
        cap,
        best: 0,
        nodes: 0,
    };
    search.run(0, 0)?;
    Ok(search.best)
}
