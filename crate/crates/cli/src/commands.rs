use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Value};

use lattice_cover::body::Body;
use lattice_cover::covering;
use lattice_cover::error::{Error, Result};
use lattice_cover::evasive::{self, PrimePolicy};
use lattice_cover::incidence;
use lattice_cover::io;
use lattice_cover::lattice::LatticeBasis;
use lattice_cover::minima;
use lattice_cover::oracle::{self, FlatKind};
use lattice_cover::rational::{fmt_rat, parse_rat, rat};

use crate::args::*;

/// Text artifact plus the derived constants recorded in the manifest.
pub struct Outcome {
    pub stdout: String,
    pub parameters: Value,
    pub derived: Value,
    /// Non-zero when the command ran but its check failed (exit 2).
    pub exit: i32,
}

impl Outcome {
    fn json(value: &Value, parameters: Value, derived: Value) -> Self {
        let mut stdout = serde_json::to_string_pretty(value).expect("encodable");
        stdout.push('\n');
        Self { stdout, parameters, derived, exit: 0 }
    }
}

fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("encodable");
    s.push('\n');
    s
}

pub fn minima(args: &MinimaArgs) -> Result<Outcome> {
    let lattice = io::load_lattice(&args.lattice)?;
    let body = io::load_body(&args.body, lattice.ambient_dim())?;
    let profile = minima::successive_minima(&lattice, &body)?;
    let mut checks: BTreeMap<String, Value> = BTreeMap::new();
    for check in &args.check {
        match check {
            CheckKind::Minkowski => {
                let rep = minima::check_minkowski2(&lattice, &body)?;
                checks.insert("minkowski".into(), serde_json::to_value(&rep)?);
            }
            CheckKind::Transference => {
                let rep = minima::check_transference(&lattice, &body)?;
                checks.insert("transference".into(), serde_json::to_value(&rep)?);
            }
            CheckKind::Count => {
                let rep = minima::point_count_check(&lattice, &body)?;
                checks.insert("count".into(), serde_json::to_value(&rep)?);
            }
        }
    }
    let out = json!({
        "lambdas_squared": profile.lambdas_sq.iter().map(fmt_rat).collect::<Vec<_>>(),
        "witnesses": profile
            .witnesses
            .iter()
            .map(|w| w.iter().map(fmt_rat).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "checks": checks,
    });
    let params = json!({
        "lattice": args.lattice.display().to_string(),
        "body": args.body.display().to_string(),
        "checks": args.check.iter().map(|c| format!("{c:?}").to_lowercase()).collect::<Vec<_>>(),
    });
    let derived = json!({
        "doublings": profile.transcript.doublings,
    });
    Ok(Outcome::json(&out, params, derived))
}

fn resolve_instance(
    lattice: &Option<std::path::PathBuf>,
    body: &Option<std::path::PathBuf>,
    grid: Option<i64>,
    d: Option<usize>,
) -> Result<(LatticeBasis, Body)> {
    match (grid, lattice, body) {
        (Some(n), None, None) => {
            let d = d.ok_or_else(|| {
                Error::ParamOutOfRange("--grid needs a dimension via -d".into())
            })?;
            Ok((LatticeBasis::standard(d), Body::ball(rat(n))?))
        }
        (None, Some(lp), Some(bp)) => {
            let l = io::load_lattice(lp)?;
            let b = io::load_body(bp, l.ambient_dim())?;
            Ok((l, b))
        }
        _ => Err(Error::ParamOutOfRange(
            "give either --grid n with -d, or --lattice and --body files".into(),
        )),
    }
}

pub fn cover(args: &CoverArgs) -> Result<Outcome> {
    let (lattice, body) = resolve_instance(&args.lattice, &args.body, args.grid, args.d)?;
    let result = match args.mode {
        CoverMode::Linear => covering::cover_linear(&lattice, &body, args.k)?,
        CoverMode::Affine => covering::cover_affine(&lattice, &body, args.k)?,
    };
    let verified = if args.verify {
        let (ok, missing) = covering::verify_cover(&result, &lattice, &body)?;
        if !ok {
            return Err(Error::VerificationFailed(format!(
                "cover misses a point: {missing:?}"
            )));
        }
        Some(ok)
    } else {
        None
    };
    if let Some(path) = &args.emit {
        let records = io::flats_to_records(&result.flats);
        std::fs::write(path, pretty(&serde_json::to_value(&records)?))?;
    }
    let out = json!({
        "mode": format!("{:?}", args.mode).to_lowercase(),
        "k": result.k,
        "size": result.flats.len(),
        "covered_points": result.covered_points,
        "bound_report": serde_json::to_value(&result.bound_report)?,
        "transcript": serde_json::to_value(&result.transcript)?,
        "verified": verified,
    });
    let params = json!({
        "mode": format!("{:?}", args.mode).to_lowercase(),
        "k": args.k,
        "grid": args.grid,
        "d": args.d,
        "lattice": args.lattice.as_ref().map(|p| p.display().to_string()),
        "body": args.body.as_ref().map(|p| p.display().to_string()),
    });
    let derived = json!({
        "route": result.transcript.route,
        "box_constant": result.transcript.box_constant,
        "size": result.flats.len(),
    });
    Ok(Outcome::json(&out, params, derived))
}

pub fn evasive(args: &EvasiveArgs, seed: u64) -> Result<Outcome> {
    let eps = parse_rat(&args.epsilon)?;
    let params = json!({
        "ambient": format!("{:?}", args.ambient).to_lowercase(),
        "d": args.d,
        "k": args.k,
        "epsilon": fmt_rat(&eps),
        "scale": args.scale,
        "seed": seed,
    });
    let set = match args.ambient {
        AmbientKind::Fp => {
            let p = u64::try_from(args.scale)
                .map_err(|_| Error::ParamOutOfRange("prime scale must be positive".into()))?;
            evasive::build_flat_evasive(args.d, args.k, &eps, p, seed, evasive::DEFAULT_MAX_RETRIES)?
        }
        AmbientKind::Grid => evasive::build_affine_evasive(args.d, args.k, args.scale, &eps, seed)?,
        AmbientKind::Lattice => {
            let lattice = LatticeBasis::standard(args.d);
            let body = Body::ball(rat(args.scale))?;
            let policy = match args.prime_policy {
                PrimePolicyArg::Strict => PrimePolicy::Strict,
                PrimePolicyArg::Auto => PrimePolicy::Auto,
            };
            match evasive::build_linear_evasive(&lattice, &body, args.k, &eps, seed, policy) {
                Ok(s) => s,
                Err(Error::NoValidPrime) => {
                    // No admissible modulus: the claimed bound is vacuous at
                    // this scale, which is a legitimate (trivial) outcome.
                    let out = json!({
                        "status": "trivial",
                        "reason": "no prime in the admissible range at this scale",
                    });
                    return Ok(Outcome::json(&out, params, Value::Null));
                }
                Err(e) => return Err(e),
            }
        }
    };
    let derived = json!({
        "r": set.r,
        "size": set.len(),
        "prime": set.transcript.prime,
        "prime_source": set.transcript.prime_source,
        "attempts": set.transcript.attempts,
    });
    let out = serde_json::to_value(&set)?;
    Ok(Outcome::json(&out, params, derived))
}

pub fn incidence_build(args: &IncidenceBuildArgs, seed: u64) -> Result<Outcome> {
    let eps = parse_rat(&args.epsilon)?;
    let cfg = incidence::build_incidence_config(args.d, args.k, args.s, args.t, &eps, seed, None)?;
    if let Some(path) = &args.emit {
        std::fs::write(path, pretty(&serde_json::to_value(&cfg)?))?;
    }
    let out = json!({
        "d": cfg.d,
        "k": cfg.k,
        "s": cfg.s,
        "t": cfg.t,
        "n": cfg.points.len(),
        "m": cfg.hyperplanes.len(),
        "incidences": cfg.incidences,
        "freeness": serde_json::to_value(&cfg.freeness)?,
        "transcript": serde_json::to_value(&cfg.transcript)?,
    });
    let params = json!({
        "d": args.d, "k": args.k, "s": args.s, "t": args.t,
        "epsilon": fmt_rat(&eps), "seed": seed,
    });
    let derived = json!({
        "r1": cfg.freeness.r1,
        "r2": cfg.freeness.r2,
        "c1": cfg.transcript.c1,
        "c2": cfg.transcript.c2,
        "normal_source": cfg.transcript.normal_source,
    });
    Ok(Outcome::json(&out, params, derived))
}

pub fn incidence_check(args: &IncidenceCheckArgs) -> Result<Outcome> {
    let text = std::fs::read_to_string(&args.config)?;
    let cfg: incidence::IncidenceConfig = serde_json::from_str(&text)?;
    cfg.validate()?;
    let (free, witness) =
        incidence::check_krr_free(&cfg.points, &cfg.hyperplanes, args.r1, args.r2)?;
    let out = json!({
        "free": free,
        "r1": args.r1,
        "r2": args.r2,
        "witness": witness.map(|(pts, hps)| json!({ "points": pts, "hyperplanes": hps })),
    });
    let params = json!({
        "config": args.config.display().to_string(),
        "r1": args.r1,
        "r2": args.r2,
    });
    let mut outcome = Outcome::json(&out, params, Value::Null);
    if !free {
        outcome.exit = 2;
    }
    Ok(outcome)
}

pub fn incidence_exponents(d_max: u32) -> Result<Outcome> {
    let rows = incidence::exponent_table(d_max)?;
    let mut csv = String::from("d,exponent,decimal,gap_over_previous,nondiagonal_n,nondiagonal_m\n");
    for row in &rows {
        writeln!(
            csv,
            "{},{},{:.6},{},{},{}",
            row.d, row.exponent, row.exponent_f64, row.gap, row.nondiagonal_n, row.nondiagonal_m
        )
        .unwrap();
    }
    let params = json!({ "d_max": d_max });
    Ok(Outcome { stdout: csv, parameters: params, derived: Value::Null, exit: 0 })
}

fn parse_sweep(spec: &str) -> Result<(i64, i64)> {
    let (a, b) = spec
        .split_once("..")
        .ok_or_else(|| Error::Parse(format!("bad sweep spec {spec:?}; expected n1..n2")))?;
    let lo: i64 = a.trim().parse().map_err(|_| Error::Parse("bad sweep start".into()))?;
    let hi: i64 = b.trim().parse().map_err(|_| Error::Parse("bad sweep end".into()))?;
    if lo > hi {
        return Err(Error::ParamOutOfRange("empty sweep".into()));
    }
    Ok((lo, hi))
}

pub fn oracle_cover(args: &OracleCoverArgs) -> Result<Outcome> {
    let kind = match args.kind {
        OracleKind::Linear => FlatKind::Linear,
        OracleKind::Affine => FlatKind::Affine,
    };
    let params = json!({
        "d": args.d, "k": args.k, "kind": format!("{:?}", args.kind).to_lowercase(),
        "grid": args.grid, "sweep": args.sweep,
    });
    if let Some(spec) = &args.sweep {
        let (lo, hi) = parse_sweep(spec)?;
        let mut csv = String::from("n,optimum,optimal,nodes\n");
        for n in lo..=hi {
            let inst = oracle::CoverInstance::grid_ball(n, args.d, args.k, kind)?;
            let r = oracle::min_cover_exact(&inst)?;
            writeln!(csv, "{},{},{},{}", n, r.optimum, r.optimal, r.nodes).unwrap();
        }
        return Ok(Outcome { stdout: csv, parameters: params, derived: Value::Null, exit: 0 });
    }
    let n = args
        .grid
        .ok_or_else(|| Error::ParamOutOfRange("need --grid n or --sweep".into()))?;
    let inst = oracle::CoverInstance::grid_ball(n, args.d, args.k, kind)?;
    let r = oracle::min_cover_exact(&inst)?;
    let out = json!({
        "n": n,
        "optimum": r.optimum,
        "optimal": r.optimal,
        "nodes": r.nodes,
    });
    Ok(Outcome::json(&out, params, json!({ "optimum": r.optimum })))
}

pub fn oracle_evasive(args: &OracleEvasiveArgs) -> Result<Outcome> {
    let kind = match args.kind {
        OracleKind::Linear => FlatKind::Linear,
        OracleKind::Affine => FlatKind::Affine,
    };
    let params = json!({
        "d": args.d, "k": args.k, "r": args.r,
        "kind": format!("{:?}", args.kind).to_lowercase(),
        "grid": args.grid, "sweep": args.sweep,
    });
    let run_one = |n: i64| -> Result<usize> {
        let points = evasive::grid_ball_points(args.d, n)?;
        oracle::max_evasive_exact(&points, args.d, args.k, args.r, kind)
    };
    if let Some(spec) = &args.sweep {
        let (lo, hi) = parse_sweep(spec)?;
        let mut csv = String::from("n,maximum\n");
        for n in lo..=hi {
            writeln!(csv, "{},{}", n, run_one(n)?).unwrap();
        }
        return Ok(Outcome { stdout: csv, parameters: params, derived: Value::Null, exit: 0 });
    }
    let n = args
        .grid
        .ok_or_else(|| Error::ParamOutOfRange("need --grid n or --sweep".into()))?;
    let m = run_one(n)?;
    let out = json!({ "n": n, "maximum": m });
    Ok(Outcome::json(&out, params, json!({ "maximum": m })))
}

pub fn report_cover_sweep(args: &CoverSweepArgs, csv: bool) -> Result<Outcome> {
    if args.n_min > args.n_max {
        return Err(Error::ParamOutOfRange("empty sweep".into()));
    }
    let kind = match args.mode {
        CoverMode::Linear => FlatKind::Linear,
        CoverMode::Affine => FlatKind::Affine,
    };
    let mut rows: Vec<(i64, Option<usize>, usize, f64, f64)> = Vec::new();
    let mut n = args.n_min;
    while n <= args.n_max {
        let lattice = LatticeBasis::standard(args.d);
        let body = Body::ball(rat(n))?;
        let result = match args.mode {
            CoverMode::Linear => covering::cover_linear(&lattice, &body, args.k)?,
            CoverMode::Affine => covering::cover_affine(&lattice, &body, args.k)?,
        };
        let oracle_opt = match oracle::CoverInstance::grid_ball(n, args.d, args.k, kind) {
            Ok(inst) => match oracle::min_cover_exact(&inst) {
                Ok(r) if r.optimal => Some(r.optimum),
                _ => None,
            },
            Err(_) => None,
        };
        rows.push((
            n,
            oracle_opt,
            result.flats.len(),
            result.bound_report.alpha_pow,
            result.bound_report.beta_pow,
        ));
        n += 1;
    }
    let series: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(n, ..)| *n >= 1)
        .map(|(n, _, size, ..)| (*n as f64, *size as f64))
        .collect();
    let slope = incidence::fit_exponent(&series).ok();
    let mut out = String::new();
    if csv {
        out.push_str("n,oracle,construction,alpha_pow,beta_pow\n");
        for (n, oracle_opt, size, a, b) in &rows {
            let o = oracle_opt.map(|v| v.to_string()).unwrap_or_default();
            writeln!(out, "{n},{o},{size},{a:.4},{b:.4}").unwrap();
        }
    } else {
        writeln!(out, "| n | oracle | construction | alpha^(d-k) | beta^(d-k) |").unwrap();
        writeln!(out, "|---|--------|--------------|-------------|------------|").unwrap();
        for (n, oracle_opt, size, a, b) in &rows {
            let o = oracle_opt.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
            writeln!(out, "| {n} | {o} | {size} | {a:.4} | {b:.4} |").unwrap();
        }
    }
    if let Some((s, err)) = slope {
        writeln!(out, "construction slope: {s:.4} +- {err:.4}").unwrap();
    }
    let params = json!({
        "d": args.d, "k": args.k, "n_min": args.n_min, "n_max": args.n_max,
        "mode": format!("{:?}", args.mode).to_lowercase(),
    });
    let derived = json!({ "slope": slope.map(|(s, _)| s) });
    Ok(Outcome { stdout: out, parameters: params, derived, exit: 0 })
}
