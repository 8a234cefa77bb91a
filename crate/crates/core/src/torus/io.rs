//! Binary field files.
//!
//! One JSON header line, then little-endian `f64` samples in grid order.
//! Matrix fields store every entry of each n×n block row-major as `re, im`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{MatrixField, ScalarField, TorusGrid};
use crate::error::{Error, Result};
use crate::C64;

const LAYOUT: &str = "row-major";
const PACKING: &str = "full complex interleaved re/im";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Scalar,
    Matrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub n: usize,
    #[serde(rename = "N")]
    pub samples: usize,
    #[serde(default)]
    pub active: Option<usize>,
    pub kind: FieldKind,
    pub layout: String,
    pub packing: String,
}

impl FieldHeader {
    fn for_grid(grid: &TorusGrid, kind: FieldKind) -> Self {
        Self {
            n: grid.n(),
            samples: grid.samples(),
            active: Some(grid.active()),
            kind,
            layout: LAYOUT.into(),
            packing: PACKING.into(),
        }
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.n, self.samples, self.active.unwrap_or(self.n))
            .map_err(|e| Error::Format(format!("header: {e}")))
    }
}

pub fn write_scalar(path: impl AsRef<Path>, field: &ScalarField) -> Result<()> {
    write_raw(
        path.as_ref(),
        &FieldHeader::for_grid(field.grid(), FieldKind::Scalar),
        field.values().iter().copied(),
    )
}

pub fn write_matrix(path: impl AsRef<Path>, field: &MatrixField) -> Result<()> {
    let values = field.raw().iter().flat_map(|z| [z.re, z.im]);
    write_raw(
        path.as_ref(),
        &FieldHeader::for_grid(field.grid(), FieldKind::Matrix),
        values,
    )
}

pub fn read_scalar(path: impl AsRef<Path>) -> Result<ScalarField> {
    let (header, values) = read_raw(path.as_ref(), FieldKind::Scalar)?;
    ScalarField::new(header.grid()?, values)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<MatrixField> {
    let (header, values) = read_raw(path.as_ref(), FieldKind::Matrix)?;
    let data = values
        .chunks_exact(2)
        .map(|c| C64::new(c[0], c[1]))
        .collect();
    MatrixField::new(header.grid()?, data)
}

/// Reads only the header line.
pub fn read_header(path: impl AsRef<Path>) -> Result<FieldHeader> {
    let mut reader = BufReader::new(File::open(path)?);
    parse_header(&mut reader)
}

fn write_raw(path: &Path, header: &FieldHeader, values: impl Iterator<Item = f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, header).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(b"\n")?;
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn parse_header(reader: &mut impl BufRead) -> Result<FieldHeader> {
    let mut line = Vec::new();
    reader.read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(Error::Format("missing header line".into()));
    }
    let header: FieldHeader = serde_json::from_slice(&line[..line.len() - 1])
        .map_err(|e| Error::Format(format!("header: {e}")))?;
    if header.layout != LAYOUT {
        return Err(Error::Format(format!(
            "unsupported layout {:?}",
            header.layout
        )));
    }
    if header.kind == FieldKind::Matrix && header.packing != PACKING {
        return Err(Error::Format(format!(
            "unsupported matrix packing {:?}",
            header.packing
        )));
    }
    Ok(header)
}

fn read_raw(path: &Path, expected: FieldKind) -> Result<(FieldHeader, Vec<f64>)> {
    let mut reader = BufReader::new(File::open(path)?);
    let header = parse_header(&mut reader)?;
    if header.kind != expected {
        return Err(Error::Format(format!(
            "expected a {expected:?} field, file holds {:?}",
            header.kind
        )));
    }
    let grid = header.grid()?;
    let count = match header.kind {
        FieldKind::Scalar => grid.len(),
        FieldKind::Matrix => grid.len() * grid.n() * grid.n() * 2,
    };
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() != count * 8 {
        return Err(Error::Format(format!(
            "payload has {} bytes, header implies {}",
            bytes.len(),
            count * 8
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((header, values))
}
