//! On-disk formats: columnar text for fields, JSON envelopes, CSV reports.
//!
//! Text formats carry 17 significant decimal digits so values round-trip
//! through the decimal representation.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{RealField, SpatialGrid};

/// JSON envelope for a real field.
#[derive(Debug, Serialize, Deserialize)]
pub struct FieldEnvelope {
    pub grid: GridEnvelope,
    pub values: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GridEnvelope {
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "M")]
    pub points: usize,
}

/// Write a field as two columns `x value`.
pub fn write_field_txt(path: &Path, field: &RealField) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for (k, v) in field.values().iter().enumerate() {
        writeln!(out, "{:.16e} {:.16e}", field.grid().point(k), v)?;
    }
    Ok(())
}

/// Read a two-column field file back onto a grid of matching size.
pub fn read_field_txt(path: &Path, grid: std::sync::Arc<SpatialGrid>) -> Result<RealField> {
    let file = std::fs::File::open(path)?;
    let mut values = Vec::with_capacity(grid.point_count());
    for line in BufReader::new(file).lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut cols = trimmed.split_whitespace();
        let _x = cols.next();
        let v = cols
            .next()
            .ok_or_else(|| Error::ConfigParse(format!("malformed field line: {trimmed:?}")))?;
        values.push(
            v.parse::<f64>()
                .map_err(|e| Error::ConfigParse(format!("bad float {v:?}: {e}")))?,
        );
    }
    RealField::new(grid, values)
}

pub fn write_field_json(path: &Path, field: &RealField) -> Result<()> {
    let env = FieldEnvelope {
        grid: GridEnvelope {
            half_width: field.grid().half_width(),
            points: field.grid().point_count(),
        },
        values: field.values().to_vec(),
    };
    let out = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(out, &env)
        .map_err(|e| Error::ConfigParse(format!("json write: {e}")))?;
    Ok(())
}

pub fn read_field_json(path: &Path) -> Result<(FieldEnvelope, RealField)> {
    let file = std::fs::File::open(path)?;
    let env: FieldEnvelope = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::ConfigParse(format!("json read: {e}")))?;
    let grid = SpatialGrid::new(env.grid.half_width, env.grid.points)?;
    let field = RealField::new(grid, env.values.clone())?;
    Ok((env, field))
}
