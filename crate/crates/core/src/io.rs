//! File formats: lattices, bodies, and flat lists as JSON with rationals
//! serialized as strings `p` or `p/q`.
//!
//! Loading always revalidates invariants (independence, positive
//! definiteness, canonical flat forms), so a hand-edited file cannot smuggle
//! an inconsistent object into a run.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::body::Body;
use crate::covering::CoverFlats;
use crate::error::{Error, Result};
use crate::flats::{canonical_affine_flat, canonical_linear_flat};
use crate::lattice::LatticeBasis;
use crate::rational::{fmt_rat, parse_rat, Rat};

pub fn load_lattice(path: &Path) -> Result<LatticeBasis> {
    #[derive(Deserialize)]
    struct LatticeFile {
        dim: usize,
        basis: Vec<Vec<String>>,
    }
    let text = std::fs::read_to_string(path)?;
    let file: LatticeFile = serde_json::from_str(&text)?;
    let vectors: Result<Vec<Vec<Rat>>> = file
        .basis
        .iter()
        .map(|row| row.iter().map(|s| parse_rat(s)).collect())
        .collect();
    LatticeBasis::new(vectors?, file.dim)
}

pub fn save_lattice(path: &Path, lattice: &LatticeBasis) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(lattice)?)?;
    Ok(())
}

pub fn load_body(path: &Path, dim: usize) -> Result<Body> {
    let text = std::fs::read_to_string(path)?;
    let body: Body = serde_json::from_str(&text)?;
    body.validate(dim)?;
    Ok(body)
}

pub fn save_body(path: &Path, body: &Body) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(body)?)?;
    Ok(())
}

/// One flat on the wire: `dim`, generator rows, and for affine flats the
/// canonical base point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlatRecord {
    pub dim: usize,
    pub generators: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_point: Option<Vec<String>>,
}

pub fn flats_to_records(flats: &CoverFlats) -> Vec<FlatRecord> {
    match flats {
        CoverFlats::Linear(v) => v
            .iter()
            .map(|f| FlatRecord {
                dim: f.dim(),
                generators: f
                    .generators()
                    .iter()
                    .map(|g| g.iter().map(fmt_rat).collect())
                    .collect(),
                base_point: None,
            })
            .collect(),
        CoverFlats::Affine(v) => v
            .iter()
            .map(|f| FlatRecord {
                dim: f.dim(),
                generators: f
                    .direction()
                    .generators()
                    .iter()
                    .map(|g| g.iter().map(fmt_rat).collect())
                    .collect(),
                base_point: Some(f.base_point().iter().map(fmt_rat).collect()),
            })
            .collect(),
    }
}

pub fn records_to_flats(records: &[FlatRecord], ambient: usize) -> Result<CoverFlats> {
    let affine = records.iter().any(|r| r.base_point.is_some());
    let parse_mat = |rows: &[Vec<String>]| -> Result<Vec<Vec<Rat>>> {
        rows.iter()
            .map(|row| row.iter().map(|s| parse_rat(s)).collect())
            .collect()
    };
    if affine {
        let mut flats = Vec::with_capacity(records.len());
        for r in records {
            let base = r
                .base_point
                .as_ref()
                .ok_or_else(|| Error::Parse("mixed affine and linear flats".into()))?;
            let base: Result<Vec<Rat>> = base.iter().map(|s| parse_rat(s)).collect();
            let gens = parse_mat(&r.generators)?;
            let flat = canonical_affine_flat(&base?, &gens, ambient)?;
            if flat.dim() != r.dim {
                return Err(Error::Parse("flat dimension mismatch".into()));
            }
            flats.push(flat);
        }
        Ok(CoverFlats::Affine(flats))
    } else {
        let mut flats = Vec::with_capacity(records.len());
        for r in records {
            let gens = parse_mat(&r.generators)?;
            let flat = canonical_linear_flat(&gens, ambient)?;
            if flat.dim() != r.dim {
                return Err(Error::Parse("flat dimension mismatch".into()));
            }
            flats.push(flat);
        }
        Ok(CoverFlats::Linear(flats))
    }
}
