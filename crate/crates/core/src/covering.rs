//! Coverings of `L ∩ K` by linear and affine flats.
//!
//! Internally every body is a positive-definite ambient form `F` with
//! membership `x^T F x <= 1`, so balls, ellipsoids, and the rescaled bodies
//! appearing after projection steps share one code path. The three
//! construction routes:
//!
//! * a projection route that drops short basis vectors one at a time and
//!   spans each surviving image point with the dropped directions,
//! * a dual-box route that covers by hyperplanes `H(z)` whose normals come
//!   from a box of short dual vectors (a pigeonhole argument certifies,
//!   point by point, that some box difference is orthogonal to each point),
//! * recursion through the hyperplane sections, re-grounding the minima
//!   inside each section and truncating to the witnesses at scale <= 1.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use num_traits::{One, Signed, Zero};

use crate::body::Body;
use crate::enumerate::{enumerate_form, ReducedForm};
use crate::error::{Error, Result};
use crate::flats::{canonical_affine_flat, canonical_linear_flat, AffineFlat, LinearFlat};
use crate::lattice::LatticeBasis;
use crate::linalg::{self, gram, Mat};
use crate::minima::{alpha_beta, successive_minima_form, MinimaProfile, PowerVal};
use crate::rational::{fmt_rat, gcd_vec, lex_normalize_sign, rat, rat_of, rat_to_f64, Int, Rat};

/// Work guard for point enumeration inside covering runs.
const COVER_POINT_GUARD: usize = 2_000_000;
/// Guard on materialized dual boxes.
const BOX_GUARD: u64 = 10_000_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum CoverFlats {
    Linear(Vec<LinearFlat>),
    Affine(Vec<AffineFlat>),
}

impl CoverFlats {
    pub fn len(&self) -> usize {
        match self {
            CoverFlats::Linear(v) => v.len(),
            CoverFlats::Affine(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains_point(&self, x: &[Rat]) -> bool {
        match self {
            CoverFlats::Linear(v) => v.iter().any(|f| f.contains(x)),
            CoverFlats::Affine(v) => v.iter().any(|f| f.contains(x)),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CoverTranscript {
    /// Construction route taken at the top level.
    pub route: String,
    /// Box constant c, when a dual box was built (top level).
    pub box_constant: Option<String>,
    /// Recursion tree sizes: one entry per sub-cover, flat counts.
    pub recursion_sizes: Vec<usize>,
    /// Actual vs worst-case radius growth per projection step.
    pub projection_radii_sq: Vec<(String, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    /// alpha^(d-k) (floating decoration; comparisons elsewhere are exact).
    pub alpha_pow: f64,
    /// beta^(d-k).
    pub beta_pow: f64,
    /// The route-specific predicted size scale.
    pub predicted: f64,
    pub size: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverResult {
    pub k: usize,
    pub flats: CoverFlats,
    pub covered_points: usize,
    pub transcript: CoverTranscript,
    pub bound_report: BoundReport,
}

/// One projection step: the dropped basis vector, the target subspace, the
/// certified radius growth (actual max over images vs the worst-case
/// multiplier, both squared), and the measured band factor between the
/// image minima and the shifted source minima.
#[derive(Debug, Clone)]
pub struct ProjectionStep {
    pub dropped: Vec<Rat>,
    pub target: LinearFlat,
    pub radius_sq: Rat,
    pub radius_cap_sq: Rat,
    /// max over i of max(img_i/src_(i+1), src_(i+1)/img_i) on squared
    /// minima: the step's observed distortion band.
    pub band_factor_sq: Rat,
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub steps: Vec<ProjectionStep>,
    pub dropped: Vec<Vec<Rat>>,
    pub image: LatticeBasis,
    /// Images of the source points (deduplicated, sorted).
    pub image_points: Vec<Vec<Rat>>,
    /// Certified squared radius of the image set w.r.t. the base form.
    pub image_radius_sq: Rat,
}

fn scale_sq(form: &Mat, x: &[Rat]) -> Rat {
    linalg::dot(x, &linalg::mat_vec(form, x))
}

/// Constructive basis meeting the per-index scale bounds, on an explicit
/// ambient form. Mirrors `minima::reduce_basis` for internal reuse.
fn reduce_basis_form(lattice: &LatticeBasis, form: &Mat) -> Result<(LatticeBasis, MinimaProfile)> {
    // The body with form F at scale 1 is an ellipsoid when F is not a
    // multiple of the identity, but reduce_basis only consumes scale_sq and
    // the form itself, so route through a synthetic ellipsoid body.
    let body = Body::Ellipsoid { matrix: form.clone() };
    let red = crate::minima::reduce_basis(lattice, &body)?;
    Ok((red.basis, red.profile))
}

/// Projection along `s` short basis vectors, with exhaustive certification
/// of the image radius. `points` are the source points to carry along.
fn project_along_form(
    lattice: &LatticeBasis,
    form: &Mat,
    s: usize,
    points: &[Vec<Rat>],
) -> Result<Projection> {
    let d = lattice.rank();
    if s >= d {
        return Err(Error::ParamOutOfRange(format!("cannot project along {s} of {d} vectors")));
    }
    let mut current = lattice.clone();
    let mut current_points: Vec<Vec<Rat>> = points.to_vec();
    let mut radius_sq = Rat::one();
    let mut steps = Vec::new();
    let mut dropped_all = Vec::new();
    let dd = lattice.ambient_dim() as u32;
    let cap_mult = {
        let m = rat_of(&(Int::one() << (dd * dd))) + Rat::one();
        &m * &m
    };
    for _ in 0..s {
        // Scale the form so the current image set sits inside the unit body.
        let scaled_form: Mat = form
            .iter()
            .map(|row| row.iter().map(|x| x / &radius_sq).collect())
            .collect();
        let (reduced, _) = reduce_basis_form(&current, &scaled_form)?;
        let b1 = reduced.vector(0).to_vec();
        let rest: Vec<Vec<Rat>> = reduced.vectors()[1..].to_vec();
        let target = canonical_linear_flat(&rest, lattice.ambient_dim())?;
        let next = LatticeBasis::new(rest, lattice.ambient_dim())?;
        // Project each point: drop the first coordinate in the reduced basis.
        let mut images: BTreeSet<Vec<Rat>> = BTreeSet::new();
        for p in &current_points {
            let coords = reduced
                .span_coords(p)
                .ok_or_else(|| Error::VerificationFailed("point fell outside the span".into()))?;
            let shift = linalg::scale_vec(&b1, &coords[0]);
            images.insert(linalg::sub_vec(p, &shift));
        }
        let image_points: Vec<Vec<Rat>> = images.into_iter().collect();
        let actual_sq = image_points
            .iter()
            .map(|p| scale_sq(form, p))
            .max()
            .unwrap_or_else(|| radius_sq.clone());
        let cap_sq = &radius_sq * &cap_mult;
        if actual_sq > cap_sq {
            return Err(Error::VerificationFailed(
                "projected image exceeded the worst-case radius".into(),
            ));
        }
        // Observed minima distortion of this step, recorded per step.
        let band_factor_sq = {
            let src_form = gram(current.vectors(), Some(form));
            let src = successive_minima_form(&current, &src_form)?;
            let img_form = gram(next.vectors(), Some(form));
            let img = successive_minima_form(&next, &img_form)?;
            let mut band = Rat::one();
            for i in 0..img.lambdas_sq.len() {
                let a = &img.lambdas_sq[i];
                let b = &src.lambdas_sq[i + 1];
                let up = a / b;
                let down = b / a;
                if up > band {
                    band = up;
                }
                if down > band {
                    band = down;
                }
            }
            band
        };
        steps.push(ProjectionStep {
            dropped: b1.clone(),
            target,
            radius_sq: actual_sq.clone(),
            radius_cap_sq: cap_sq,
            band_factor_sq,
        });
        dropped_all.push(b1);
        // Images of lattice points stay lattice points of the sublattice.
        debug_assert!(image_points.iter().all(|p| next.is_lattice_point(p)));
        current = next;
        current_points = image_points;
        if actual_sq > radius_sq {
            radius_sq = actual_sq;
        }
    }
    Ok(Projection {
        steps,
        dropped: dropped_all,
        image: current,
        image_points: current_points,
        image_radius_sq: radius_sq,
    })
}

/// Public wrapper: projection along `s` minima vectors for a ball body.
pub fn project_along_minima(
    lattice: &LatticeBasis,
    body: &Body,
    s: usize,
) -> Result<Projection> {
    if !body.is_ball() {
        return Err(Error::BodyNotBall);
    }
    let profile = crate::minima::successive_minima(lattice, body)?;
    if !profile.last_at_most_one() {
        return Err(Error::MinimaTooLarge);
    }
    let form = body.form(lattice.ambient_dim());
    let points = enumerate_ambient(lattice, &form, &Rat::one())?;
    project_along_form(lattice, &form, s, &points)
}

/// All points of the lattice with form scale at most `bound_sq`, ambient
/// coordinates, sorted.
fn enumerate_ambient(lattice: &LatticeBasis, form: &Mat, bound_sq: &Rat) -> Result<Vec<Vec<Rat>>> {
    let coord_form = gram(lattice.vectors(), Some(form));
    let red = ReducedForm::new(&coord_form)?;
    let raw = enumerate_form(&red.gram, bound_sq, None, COVER_POINT_GUARD)?;
    let mut out: Vec<Vec<Rat>> = raw
        .iter()
        .map(|(a, _)| lattice.point_from_coords(&red.original_coords(a)))
        .collect();
    out.sort();
    Ok(out)
}

/// A box of short dual vectors. Coordinates are w.r.t. the dual basis, so
/// the pairing with a lattice point's coordinates is the plain dot product.
#[derive(Debug, Clone)]
pub struct DualBox {
    pub scale_c: Rat,
    pub q: usize,
    /// Dual minima witnesses spanning the box (coordinate vectors).
    pub generators: Vec<Vec<Int>>,
    /// Box side bounds: floor(c alpha / mu_i).
    pub sides: Vec<Int>,
    pub d_plus: Vec<Vec<Int>>,
    pub d_box: Vec<Vec<Int>>,
    /// Primitive parts of the nonzero box points, deduplicated up to sign.
    pub d_prime: Vec<Vec<Int>>,
}

/// Materializes the dual box at scale `c`, or `BoxTooSmall` when the
/// pigeonhole size requirement `|D+| > 2 q c alpha + 1` fails.
pub fn build_dual_box(
    dual_profile: &MinimaProfile,
    alpha: &PowerVal,
    q: usize,
    c: &Rat,
) -> Result<DualBox> {
    if q < 2 {
        return Err(Error::ParamOutOfRange("dual box needs q >= 2".into()));
    }
    if !c.is_positive() {
        return Err(Error::ParamOutOfRange("box constant must be positive".into()));
    }
    let sides: Vec<Int> = (1..=q)
        .map(|i| alpha.floor_div_sqrt(c, dual_profile.lambda_sq(i)))
        .collect();
    let mut dplus_size = Int::one();
    let mut dbox_size = Int::one();
    for f in &sides {
        dplus_size *= f + 1;
        dbox_size *= rat(2).numer() * f + 1;
    }
    if dbox_size > Int::from(BOX_GUARD) {
        return Err(Error::TooManyPoints(BOX_GUARD as usize));
    }
    // |D+| - 1 > 2 q c alpha, exact cross-power comparison.
    let lhs = rat_of(&dplus_size) - Rat::one();
    let two_qc = rat(2) * rat(q as i64) * c;
    if lhs.is_zero() || alpha.cmp_rat(&(&lhs / &two_qc)) != std::cmp::Ordering::Less {
        return Err(Error::BoxTooSmall);
    }
    let generators: Vec<Vec<Int>> = dual_profile.witness_coords[..q]
        .iter()
        .map(|w| w.iter().map(|&x| Int::from(x)).collect())
        .collect();
    let m = generators[0].len();
    let combine = |coeffs: &[Int]| -> Vec<Int> {
        let mut acc = vec![Int::zero(); m];
        for (a, g) in coeffs.iter().zip(&generators) {
            if a.is_zero() {
                continue;
            }
            for (x, y) in acc.iter_mut().zip(g) {
                *x += a * y;
            }
        }
        acc
    };
    let mut d_plus = Vec::new();
    odometer(&sides, false, &mut |coeffs| d_plus.push(combine(coeffs)));
    let mut d_box = Vec::new();
    let mut d_prime_set: BTreeSet<Vec<Int>> = BTreeSet::new();
    odometer(&sides, true, &mut |coeffs| {
        let z = combine(coeffs);
        if z.iter().all(|x| x.is_zero()) {
            d_box.push(z);
            return;
        }
        let g = gcd_vec(&z);
        let mut prim: Vec<Int> = z.iter().map(|x| x / &g).collect();
        lex_normalize_sign(&mut prim);
        d_prime_set.insert(prim);
        d_box.push(z);
    });
    Ok(DualBox {
        scale_c: c.clone(),
        q,
        generators,
        sides,
        d_plus,
        d_box,
        d_prime: d_prime_set.into_iter().collect(),
    })
}

/// Iterates coefficient vectors with entries in `[0, sides_i]` (or
/// `[-sides_i, sides_i]` when `signed`), in lexicographic order.
pub(crate) fn odometer(sides: &[Int], signed: bool, visit: &mut impl FnMut(&[Int])) {
    let q = sides.len();
    let mut coeffs: Vec<Int> = if signed {
        sides.iter().map(|s| -s.clone()).collect()
    } else {
        vec![Int::zero(); q]
    };
    loop {
        visit(&coeffs);
        let mut pos = 0;
        loop {
            coeffs[pos] += 1;
            if coeffs[pos] <= sides[pos] {
                break;
            }
            coeffs[pos] = if signed { -sides[pos].clone() } else { Int::zero() };
            pos += 1;
            if pos == q {
                return;
            }
        }
    }
}

/// For each point (by coordinates in the primal basis), a primitive dual
/// vector from the box orthogonal to it, found by the pigeonhole collision
/// over the box pairings. The collision is guaranteed within
/// `2 q c alpha + 2` draws; failure indicates a bug upstream.
pub fn pigeonhole_certificates(
    point_coords: &[Vec<Int>],
    dual_box: &DualBox,
) -> Result<Vec<Vec<Int>>> {
    let mut certs = Vec::with_capacity(point_coords.len());
    for a in point_coords {
        if a.iter().all(|x| x.is_zero()) {
            // The origin is orthogonal to everything; use the first box
            // direction for determinism.
            certs.push(dual_box.d_prime[0].clone());
            continue;
        }
        let mut seen: HashMap<Int, usize> = HashMap::new();
        let mut found: Option<Vec<Int>> = None;
        for (idx, y) in dual_box.d_plus.iter().enumerate() {
            let v = linalg::int_dot(a, y);
            if let Some(&prev) = seen.get(&v) {
                let z: Vec<Int> = dual_box.d_plus[prev]
                    .iter()
                    .zip(y)
                    .map(|(p, q)| p - q)
                    .collect();
                let g = gcd_vec(&z);
                let mut prim: Vec<Int> = z.iter().map(|x| x / &g).collect();
                lex_normalize_sign(&mut prim);
                debug_assert!(linalg::int_dot(a, &prim).is_zero());
                found = Some(prim);
                break;
            }
            seen.insert(v, idx);
        }
        let Some(z) = found else {
            return Err(Error::VerificationFailed(
                "pigeonhole collision missing; box invariant violated".into(),
            ));
        };
        certs.push(z);
    }
    Ok(certs)
}

struct CoverCtx<'a> {
    base_form: &'a Mat,
    k: usize,
    ambient: usize,
    transcript: CoverTranscript,
}

/// Covering by k-dimensional linear subspaces: route dispatch on the
/// minimizing index, dual-box hyperplanes plus recursion otherwise.
pub fn cover_linear(lattice: &LatticeBasis, body: &Body, k: usize) -> Result<CoverResult> {
    body.validate(lattice.ambient_dim())?;
    let d = lattice.rank();
    if !(1..d).contains(&k) {
        return Err(Error::ParamOutOfRange(format!("k = {k} out of range for rank {d}")));
    }
    let form = body.form(lattice.ambient_dim());
    let coord_form = gram(lattice.vectors(), Some(&form));
    let profile = successive_minima_form(lattice, &coord_form)?;
    if !profile.last_at_most_one() {
        return Err(Error::MinimaTooLarge);
    }
    let points = enumerate_ambient(lattice, &form, &Rat::one())?;
    let mut ctx = CoverCtx {
        base_form: &form,
        k,
        ambient: lattice.ambient_dim(),
        transcript: CoverTranscript::default(),
    };
    let flats = cover_linear_inner(&mut ctx, lattice, &profile, 0)?;
    let flats: Vec<LinearFlat> = flats.into_iter().collect();
    let ab = alpha_beta(&profile.lambdas_sq, k)?;
    let report = BoundReport {
        alpha_pow: ab.alpha.powi_f64((d - k) as u32),
        beta_pow: ab.beta.powi_f64((d - k) as u32),
        predicted: ab.alpha.powi_f64((d - k) as u32),
        size: flats.len(),
    };
    let result = CoverResult {
        k,
        flats: CoverFlats::Linear(flats),
        covered_points: points.len(),
        transcript: ctx.transcript,
        bound_report: report,
    };
    let (ok, missing) = verify_cover_points(&result.flats, &points);
    if !ok {
        return Err(Error::VerificationFailed(format!(
            "cover misses {}",
            describe_point(&missing.unwrap())
        )));
    }
    Ok(result)
}

fn describe_point(p: &[Rat]) -> String {
    let parts: Vec<String> = p.iter().map(fmt_rat).collect();
    format!("({})", parts.join(", "))
}

fn cover_linear_inner(
    ctx: &mut CoverCtx,
    lattice: &LatticeBasis,
    profile: &MinimaProfile,
    depth: usize,
) -> Result<BTreeSet<LinearFlat>> {
    let m = lattice.rank();
    let k = ctx.k;
    if depth > ctx.ambient {
        return Err(Error::RecursionGuard(ctx.ambient));
    }
    debug_assert!(k < m);
    let ab = alpha_beta(&profile.lambdas_sq, k)?;
    if ab.q == m - k + 1 {
        if depth == 0 {
            ctx.transcript.route = "projection".into();
        }
        return cover_linear_simple_inner(ctx, lattice);
    }
    // Dual-box hyperplane stage.
    if depth == 0 {
        ctx.transcript.route =
            if k == m - 1 { "dual-box hyperplanes".into() } else { "dual-box recursion".into() };
    }
    let coord_form = gram(lattice.vectors(), Some(ctx.base_form));
    let dual_form = crate::body::dual_form(&coord_form);
    let dual_lattice = LatticeBasis::standard(m);
    let dual_profile = successive_minima_form(&dual_lattice, &dual_form)?;
    let mut c = Rat::one();
    let dual_box = loop {
        match build_dual_box(&dual_profile, &ab.alpha, ab.q, &c) {
            Ok(b) => break b,
            Err(Error::BoxTooSmall) => {
                c = &c * rat(2);
                if c > rat(1 << 40) {
                    return Err(Error::BoxTooSmall);
                }
            }
            Err(e) => return Err(e),
        }
    };
    if depth == 0 {
        ctx.transcript.box_constant = Some(fmt_rat(&dual_box.scale_c));
    }
    // Per-point pigeonhole certificates (constructive cover guarantee).
    let points = enumerate_ambient(lattice, ctx.base_form, &Rat::one())?;
    let point_coords: Vec<Vec<Int>> = points
        .iter()
        .map(|p| lattice.lattice_coords(p).expect("enumerated point is a lattice point"))
        .collect();
    pigeonhole_certificates(&point_coords, &dual_box)?;

    let dual_basis = lattice.dual();
    let mut flats: BTreeSet<LinearFlat> = BTreeSet::new();
    for z in &dual_box.d_prime {
        let z_amb = dual_basis.point_from_coords(z);
        let section = lattice.hyperplane_section(&z_amb)?;
        if k == m - 1 {
            // The sections themselves are the covering flats.
            let flat =
                canonical_linear_flat(&section.vectors().to_vec(), ctx.ambient)?;
            flats.insert(flat);
            continue;
        }
        // Re-ground inside the section: recompute minima, keep the span of
        // witnesses at scale <= 1, recurse there.
        let sec_form = gram(section.vectors(), Some(ctx.base_form));
        let sec_profile = successive_minima_form(&section, &sec_form)?;
        let r = sec_profile
            .lambdas_sq
            .iter()
            .take_while(|ls| **ls <= Rat::one())
            .count();
        if r == 0 {
            continue; // only the origin survives; any flat covers it
        }
        if r <= k {
            let witness_rows: Vec<Vec<Rat>> = sec_profile.witnesses[..r].to_vec();
            let flat = canonical_linear_flat(&witness_rows, ctx.ambient)?.padded_to(k)?;
            flats.insert(flat);
            continue;
        }
        let coords: Vec<Vec<Int>> = sec_profile.witness_coords[..r]
            .iter()
            .map(|w| w.iter().map(|&x| Int::from(x)).collect())
            .collect();
        let truncated = section.sublattice_in_span(&coords)?;
        let trunc_form = gram(truncated.vectors(), Some(ctx.base_form));
        let trunc_profile = successive_minima_form(&truncated, &trunc_form)?;
        let sub = cover_linear_inner(ctx, &truncated, &trunc_profile, depth + 1)?;
        ctx.transcript.recursion_sizes.push(sub.len());
        flats.extend(sub);
    }
    if flats.is_empty() {
        flats.insert(canonical_linear_flat(&Vec::new(), ctx.ambient)?.padded_to(k)?);
    }
    Ok(flats)
}

/// Projection route: drop k-1 vectors, span each image point with them.
fn cover_linear_simple_inner(
    ctx: &mut CoverCtx,
    lattice: &LatticeBasis,
) -> Result<BTreeSet<LinearFlat>> {
    let k = ctx.k;
    let points = enumerate_ambient(lattice, ctx.base_form, &Rat::one())?;
    let proj = project_along_form(lattice, ctx.base_form, k - 1, &points)?;
    for step in &proj.steps {
        ctx.transcript
            .projection_radii_sq
            .push((fmt_rat(&step.radius_sq), fmt_rat(&step.radius_cap_sq)));
    }
    let mut flats: BTreeSet<LinearFlat> = BTreeSet::new();
    for y in &proj.image_points {
        if y.iter().all(|c| c.is_zero()) {
            continue;
        }
        let mut gens = proj.dropped.clone();
        gens.push(y.clone());
        flats.insert(canonical_linear_flat(&gens, ctx.ambient)?);
    }
    // Points projecting to zero live in the span of the dropped vectors;
    // one extra flat covers them (and the origin when nothing else does).
    let mut gens = proj.dropped.clone();
    gens.push(proj.image.vector(0).to_vec());
    flats.insert(canonical_linear_flat(&gens, ctx.ambient)?.padded_to(k)?);
    Ok(flats)
}

/// Public projection-route covering.
pub fn cover_linear_simple(lattice: &LatticeBasis, body: &Body, k: usize) -> Result<CoverResult> {
    body.validate(lattice.ambient_dim())?;
    let d = lattice.rank();
    if !(1..d).contains(&k) {
        return Err(Error::ParamOutOfRange(format!("k = {k} out of range for rank {d}")));
    }
    let form = body.form(lattice.ambient_dim());
    let coord_form = gram(lattice.vectors(), Some(&form));
    let profile = successive_minima_form(lattice, &coord_form)?;
    if !profile.last_at_most_one() {
        return Err(Error::MinimaTooLarge);
    }
    let points = enumerate_ambient(lattice, &form, &Rat::one())?;
    let mut ctx = CoverCtx {
        base_form: &form,
        k,
        ambient: lattice.ambient_dim(),
        transcript: CoverTranscript { route: "projection".into(), ..Default::default() },
    };
    let flats: Vec<LinearFlat> =
        cover_linear_simple_inner(&mut ctx, lattice)?.into_iter().collect();
    // Predicted scale for this route: (lambda_k ... lambda_d)^(-1).
    let prod_sq: Rat = profile.lambdas_sq[k - 1..].iter().fold(Rat::one(), |a, x| a * x);
    let ab = alpha_beta(&profile.lambdas_sq, k)?;
    let report = BoundReport {
        alpha_pow: ab.alpha.powi_f64((d - k) as u32),
        beta_pow: ab.beta.powi_f64((d - k) as u32),
        predicted: 1.0 / rat_to_f64(&prod_sq).sqrt(),
        size: flats.len(),
    };
    let result = CoverResult {
        k,
        flats: CoverFlats::Linear(flats),
        covered_points: points.len(),
        transcript: ctx.transcript,
        bound_report: report,
    };
    let (ok, missing) = verify_cover_points(&result.flats, &points);
    if !ok {
        return Err(Error::VerificationFailed(format!(
            "cover misses {}",
            describe_point(&missing.unwrap())
        )));
    }
    Ok(result)
}

/// Covering by k-dimensional affine subspaces: project along k vectors and
/// translate their span to every image point.
pub fn cover_affine(lattice: &LatticeBasis, body: &Body, k: usize) -> Result<CoverResult> {
    body.validate(lattice.ambient_dim())?;
    let d = lattice.rank();
    if !(1..d).contains(&k) {
        return Err(Error::ParamOutOfRange(format!("k = {k} out of range for rank {d}")));
    }
    let form = body.form(lattice.ambient_dim());
    let coord_form = gram(lattice.vectors(), Some(&form));
    let profile = successive_minima_form(lattice, &coord_form)?;
    if !profile.last_at_most_one() {
        return Err(Error::MinimaTooLarge);
    }
    let points = enumerate_ambient(lattice, &form, &Rat::one())?;
    let proj = project_along_form(lattice, &form, k, &points)?;
    let mut transcript = CoverTranscript { route: "affine projection".into(), ..Default::default() };
    for step in &proj.steps {
        transcript
            .projection_radii_sq
            .push((fmt_rat(&step.radius_sq), fmt_rat(&step.radius_cap_sq)));
    }
    let mut flats: BTreeSet<AffineFlat> = BTreeSet::new();
    for z in &proj.image_points {
        flats.insert(canonical_affine_flat(z, &proj.dropped, lattice.ambient_dim())?);
    }
    let flats: Vec<AffineFlat> = flats.into_iter().collect();
    let prod_sq: Rat = profile.lambdas_sq[k..].iter().fold(Rat::one(), |a, x| a * x);
    let ab = alpha_beta(&profile.lambdas_sq, k)?;
    let report = BoundReport {
        alpha_pow: ab.alpha.powi_f64((d - k) as u32),
        beta_pow: ab.beta.powi_f64((d - k) as u32),
        predicted: 1.0 / rat_to_f64(&prod_sq).sqrt(),
        size: flats.len(),
    };
    let result = CoverResult {
        k,
        flats: CoverFlats::Affine(flats),
        covered_points: points.len(),
        transcript,
        bound_report: report,
    };
    let (ok, missing) = verify_cover_points(&result.flats, &points);
    if !ok {
        return Err(Error::VerificationFailed(format!(
            "cover misses {}",
            describe_point(&missing.unwrap())
        )));
    }
    Ok(result)
}

/// Exact membership check of every point in some flat; returns the first
/// uncovered point (in the sorted point order) when the cover fails.
pub fn verify_cover(
    cover: &CoverResult,
    lattice: &LatticeBasis,
    body: &Body,
) -> Result<(bool, Option<Vec<Rat>>)> {
    let points = crate::enumerate::enumerate_points_guarded(lattice, body, COVER_POINT_GUARD)?;
    Ok(verify_cover_points(&cover.flats, &points))
}

pub fn verify_cover_points(flats: &CoverFlats, points: &[Vec<Rat>]) -> (bool, Option<Vec<Rat>>) {
    let missing = points
        .par_iter()
        .find_first(|p| !flats.contains_point(p));
    match missing {
        Some(p) => (false, Some(p.clone())),
        None => (true, None),
    }
}

/// Count of enumerated points lying on a single flat; used by size-law and
/// oracle comparisons.
pub fn points_on_linear_flat(points: &[Vec<Rat>], flat: &LinearFlat) -> usize {
    points.iter().filter(|p| flat.contains(p)).count()
}

pub fn points_on_affine_flat(points: &[Vec<Rat>], flat: &AffineFlat) -> usize {
    points.iter().filter(|p| flat.contains(p)).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{pow_u, ratio};

    fn grid_cover(n: i64, d: usize, k: usize) -> CoverResult {
        let l = LatticeBasis::standard(d);
        cover_linear(&l, &Body::ball(rat(n)).unwrap(), k).unwrap()
    }

    #[test]
    fn unit_disc_two_lines() {
        let c = grid_cover(1, 2, 1);
        assert_eq!(c.flats.len(), 2);
        assert_eq!(c.covered_points, 5);
    }

    #[test]
    fn radius_two_disc_four_lines() {
        let c = grid_cover(2, 2, 1);
        assert_eq!(c.flats.len(), 4);
        assert_eq!(c.covered_points, 13);
    }

    #[test]
    fn rejects_large_minima() {
        // Z^2 with a tiny ball: lambda_d > 1.
        let l = LatticeBasis::standard(2);
        let e = cover_linear(&l, &Body::ball(ratio(1, 2)).unwrap(), 1);
        assert!(matches!(e, Err(Error::MinimaTooLarge)));
    }

    #[test]
    fn tiny_ball_after_scaling_single_flat() {
        // Lattice 3Z^2 with radius 3: only 0 and +-(3,0),(0,3)... radius 3
        // exactly reaches the generators; shrink to radius 2 via the lattice
        // scale instead to keep lambda_d <= 1: use Z^2 scaled by 1/2, ball 1:
        // many points. For the {0}-only case take 1Z^2 with ball(1) shrunk
        // by scaling the lattice up.
        let l = LatticeBasis::from_integer_rows(&[vec![1, 0], vec![0, 1]]).unwrap();
        let c = cover_linear(&l, &Body::ball(rat(1)).unwrap(), 1).unwrap();
        assert!(c.flats.len() >= 2);
    }

    #[test]
    fn projection_identity_when_s_zero() {
        let l = LatticeBasis::standard(3);
        let p = project_along_minima(&l, &Body::ball(rat(1)).unwrap(), 0).unwrap();
        assert!(p.steps.is_empty());
        assert_eq!(p.image.rank(), 3);
        assert_eq!(p.image_radius_sq, rat(1));
        assert_eq!(p.image_points.len(), 7);
    }

    #[test]
    fn projection_z3_one_step() {
        let l = LatticeBasis::standard(3);
        let p = project_along_minima(&l, &Body::ball(rat(1)).unwrap(), 1).unwrap();
        assert_eq!(p.image.rank(), 2);
        // All 7 points map into the image set within the certified radius.
        for pt in &p.image_points {
            assert!(scale_sq(&Body::unit_ball().form(3), pt) <= p.image_radius_sq);
            assert!(p.image.is_lattice_point(pt));
        }
    }

    #[test]
    fn affine_cover_of_unit_disc() {
        let l = LatticeBasis::standard(2);
        let c = cover_affine(&l, &Body::ball(rat(1)).unwrap(), 1).unwrap();
        // Three parallel lines through y in {-1, 0, 1} (or the symmetric
        // x-direction family, depending on the reduced basis order).
        assert_eq!(c.flats.len(), 3);
        let (ok, _) = verify_cover(&c, &l, &Body::ball(rat(1)).unwrap()).unwrap();
        assert!(ok);
    }

    #[test]
    fn verify_cover_detects_deletion() {
        let l = LatticeBasis::standard(2);
        let body = Body::ball(rat(2)).unwrap();
        let c = cover_linear(&l, &body, 1).unwrap();
        let CoverFlats::Linear(flats) = &c.flats else { panic!() };
        let mut broken = c.clone();
        broken.flats = CoverFlats::Linear(flats[1..].to_vec());
        let (ok, missing) = verify_cover(&broken, &l, &body).unwrap();
        assert!(!ok);
        assert!(missing.is_some());
    }

    #[test]
    fn dual_box_on_standard_lattice() {
        // Z^2 scaled so lambda = 1/2: dual minima 2, alpha = 4.
        let l = LatticeBasis::standard(2);
        let form = Body::ball(rat(2)).unwrap().form(2);
        let coord_form = gram(l.vectors(), Some(&form));
        let profile = successive_minima_form(&l, &coord_form).unwrap();
        let ab = alpha_beta(&profile.lambdas_sq, 1).unwrap();
        let dual_profile =
            successive_minima_form(&LatticeBasis::standard(2), &crate::body::dual_form(&coord_form))
                .unwrap();
        let mut c = Rat::one();
        let bx = loop {
            match build_dual_box(&dual_profile, &ab.alpha, ab.q, &c) {
                Ok(b) => break b,
                Err(Error::BoxTooSmall) => c = &c * rat(2),
                Err(e) => panic!("{e}"),
            }
        };
        // |D+| matches the side-product formula exactly.
        let expect: Int = bx.sides.iter().map(|f| f + 1).product();
        assert_eq!(Int::from(bx.d_plus.len()), expect);
        // Every primitive direction has gcd 1 and bounded dual norm.
        let qinv = crate::body::dual_form(&coord_form);
        let qc_alpha_side = rat(bx.q as i64) * &bx.scale_c;
        for z in &bx.d_prime {
            assert!(gcd_vec(z).is_one());
            let zr: Vec<Rat> = z.iter().map(rat_of).collect();
            let norm_sq = scale_sq(&qinv, &zr);
            // |z|_dual <= q c alpha: norm_sq^e <= (qc)^(2e) alpha^(2e)
            let lhs = pow_u(&norm_sq, ab.alpha.e);
            let rhs = pow_u(&qc_alpha_side, 2 * ab.alpha.e) * &ab.alpha.pow2e;
            assert!(lhs <= rhs);
        }
        // Simple direction sanity: (1,0),(0,1),(1,1),(1,-1) all appear.
        for v in [[1i64, 0], [0, 1], [1, 1], [1, -1]] {
            let key: Vec<Int> = v.iter().map(|&x| Int::from(x)).collect();
            let mut norm = key.clone();
            lex_normalize_sign(&mut norm);
            assert!(bx.d_prime.contains(&norm), "missing {v:?}");
        }
        // Certificates exist for every point of the scaled lattice ball.
        let pts = enumerate_ambient(&l, &form, &Rat::one()).unwrap();
        let coords: Vec<Vec<Int>> =
            pts.iter().map(|p| l.lattice_coords(p).unwrap()).collect();
        let certs = pigeonhole_certificates(&coords, &bx).unwrap();
        assert_eq!(certs.len(), pts.len());
        for (a, z) in coords.iter().zip(&certs) {
            assert!(linalg::int_dot(a, z).is_zero());
        }
    }

    #[test]
    fn separation_example_grows_with_alpha_not_beta() {
        // Lattice {(x/n, y/2, z/2)}: the 1-subspace cover must grow ~ n
        // even though beta stays bounded.
        let sizes: Vec<usize> = [4i64, 8]
            .iter()
            .map(|&n| {
                let l = LatticeBasis::new(
                    vec![
                        vec![ratio(1, n), rat(0), rat(0)],
                        vec![rat(0), ratio(1, 2), rat(0)],
                        vec![rat(0), rat(0), ratio(1, 2)],
                    ],
                    3,
                )
                .unwrap();
                cover_linear(&l, &Body::unit_ball(), 1).unwrap().flats.len()
            })
            .collect();
        assert!(sizes[1] >= sizes[0] * 3 / 2, "sizes {sizes:?} should grow linearly");
    }

    #[test]
    fn recursive_route_on_z4() {
        // Z^4 scaled to lambda = 1/2, k = 2: the minimizing index forces the
        // dual-box recursion.
        let l = LatticeBasis::standard(4);
        let body = Body::ball(rat(2)).unwrap();
        let form = body.form(4);
        let coord_form = gram(l.vectors(), Some(&form));
        let profile = successive_minima_form(&l, &coord_form).unwrap();
        let ab = alpha_beta(&profile.lambdas_sq, 2).unwrap();
        assert_eq!(ab.q, 4); // flat profile: minimum at j = 1
        let c = cover_linear(&l, &body, 2).unwrap();
        assert_eq!(c.transcript.route, "dual-box recursion");
        assert!(c.flats.len() >= 1);
        let (ok, _) = verify_cover(&c, &l, &body).unwrap();
        assert!(ok);
    }

    #[test]
    fn hyperplane_route_on_z3() {
        let l = LatticeBasis::standard(3);
        let body = Body::ball(rat(2)).unwrap();
        let c = cover_linear(&l, &body, 2).unwrap();
        assert_eq!(c.transcript.route, "dual-box hyperplanes");
        let (ok, _) = verify_cover(&c, &l, &body).unwrap();
        assert!(ok);
        // All flats have dimension exactly k.
        let CoverFlats::Linear(flats) = &c.flats else { panic!() };
        assert!(flats.iter().all(|f| f.dim() == 2));
    }

    #[test]
    fn ellipsoid_cover_round_trip() {
        // Cover computed directly on the ellipsoid matches the cover
        // computed in the ball frame and mapped back.
        let l = LatticeBasis::standard(2);
        let ell = Body::ellipsoid(vec![
            vec![ratio(1, 16), rat(0)],
            vec![rat(0), ratio(1, 4)],
        ])
        .unwrap();
        let direct = cover_linear(&l, &ell, 1).unwrap();
        let (ok, _) = verify_cover(&direct, &l, &ell).unwrap();
        assert!(ok);
        let frame = crate::body::transform_to_ball(&l, &ell).unwrap();
        let in_ball = cover_linear(&frame.lattice, &frame.body, 1).unwrap();
        // Mapped-back flats must cover the original point set.
        let CoverFlats::Linear(ball_flats) = &in_ball.flats else { panic!() };
        let mapped: Vec<LinearFlat> = ball_flats
            .iter()
            .map(|f| {
                let gens: Vec<Vec<Rat>> = f
                    .generators()
                    .iter()
                    .map(|g| linalg::mat_vec(&frame.map_back, g))
                    .collect();
                canonical_linear_flat(&gens, 2).unwrap()
            })
            .collect();
        let pts = crate::enumerate::enumerate_points(&l, &ell).unwrap();
        let (ok, _) = (
            pts.iter().all(|p| mapped.iter().any(|f| f.contains(p))),
            (),
        );
        assert!(ok);
    }
}
