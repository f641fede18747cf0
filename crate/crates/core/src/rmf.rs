//! Binary `.rmf` field files.
//!
//! Layout: one UTF-8 header line
//! `RMF1 dim=<d> shape=<s0,...> spacing=<h0,...> origin=<o0,...> periodic=<b0,...> kind=<metric|ell|scalar>`
//! terminated by `\n`, then little-endian f64 values per node (upper triangle
//! in row order for metric fields, the full row-major matrix for ell fields,
//! one value for scalar fields), then one mask byte per node, then the CRC32
//! (little-endian u32) of the value and mask bytes.

use std::fs;
use std::path::Path;

use crate::chart::GridChart;
use crate::error::{Error, Result};
use crate::field::{EllField, MetricField, ScalarField};
use crate::linalg::{Mat, SpdMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Metric,
    Ell,
    Scalar,
}

impl FieldKind {
    fn name(self) -> &'static str {
        match self {
            FieldKind::Metric => "metric",
            FieldKind::Ell => "ell",
            FieldKind::Scalar => "scalar",
        }
    }

    fn per_node(self, dim: usize) -> usize {
        match self {
            FieldKind::Metric => dim * (dim + 1) / 2,
            FieldKind::Ell => dim * dim,
            FieldKind::Scalar => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnyField {
    Metric(MetricField),
    Ell(EllField),
    Scalar(ScalarField),
}

impl AnyField {
    pub fn kind(&self) -> FieldKind {
        match self {
            AnyField::Metric(_) => FieldKind::Metric,
            AnyField::Ell(_) => FieldKind::Ell,
            AnyField::Scalar(_) => FieldKind::Scalar,
        }
    }

    pub fn chart(&self) -> &GridChart {
        match self {
            AnyField::Metric(f) => f.chart(),
            AnyField::Ell(f) => f.chart(),
            AnyField::Scalar(f) => f.chart(),
        }
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn header(chart: &GridChart, kind: FieldKind) -> String {
    let periodic: Vec<u8> = chart.periodic().iter().map(|&b| b as u8).collect();
    format!(
        "RMF1 dim={} shape={} spacing={} origin={} periodic={} kind={}\n",
        chart.dim(),
        join(chart.shape()),
        join(chart.spacing()),
        join(chart.origin()),
        join(&periodic),
        kind.name()
    )
}

pub fn encode(field: &AnyField) -> Vec<u8> {
    let chart = field.chart();
    let d = chart.dim();
    let mut out = header(chart, field.kind()).into_bytes();
    let body_start = out.len();
    let mask: &[bool] = match field {
        AnyField::Metric(g) => {
            for v in g.values() {
                for i in 0..d {
                    for j in i..d {
                        out.extend_from_slice(&v.get(i, j).to_le_bytes());
                    }
                }
            }
            g.mask()
        }
        AnyField::Ell(b) => {
            for v in b.values() {
                for x in v.to_vec() {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
            b.mask()
        }
        AnyField::Scalar(s) => {
            for x in s.values() {
                out.extend_from_slice(&x.to_le_bytes());
            }
            s.mask()
        }
    };
    out.extend(mask.iter().map(|&m| m as u8));
    let crc = crc32fast::hash(&out[body_start..]);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format { offset: offset as u64, message: message.into() }
}

fn parse_list<T: std::str::FromStr>(s: &str, offset: usize, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| t.parse::<T>().map_err(|_| format_err(offset, format!("bad {what} value '{t}'"))))
        .collect()
}

fn parse_header(bytes: &[u8]) -> Result<(GridChart, FieldKind, usize)> {
    let nl = bytes
        .iter()
        .take(4096)
        .position(|&b| b == b'\n')
        .ok_or_else(|| format_err(bytes.len().min(4096), "header line not terminated"))?;
    let line = std::str::from_utf8(&bytes[..nl]).map_err(|e| format_err(e.valid_up_to(), "header is not UTF-8"))?;
    let mut tokens = Vec::new();
    let mut pos = 0usize;
    for t in line.split(' ') {
        tokens.push((pos, t));
        pos += t.len() + 1;
    }
    let (_, magic) = tokens[0];
    if magic != "RMF1" {
        return Err(format_err(0, format!("unknown version tag '{magic}'")));
    }
    let keys = ["dim", "shape", "spacing", "origin", "periodic", "kind"];
    if tokens.len() != keys.len() + 1 {
        return Err(format_err(0, format!("expected {} header fields, found {}", keys.len(), tokens.len() - 1)));
    }
    let mut vals = Vec::new();
    for (key, &(off, tok)) in keys.iter().zip(&tokens[1..]) {
        let v = tok
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| format_err(off, format!("expected field '{key}='")))?;
        vals.push((off, v));
    }
    let dim: usize = vals[0].1.parse().map_err(|_| format_err(vals[0].0, "bad dim"))?;
    let shape: Vec<usize> = parse_list(vals[1].1, vals[1].0, "shape")?;
    let spacing: Vec<f64> = parse_list(vals[2].1, vals[2].0, "spacing")?;
    let origin: Vec<f64> = parse_list(vals[3].1, vals[3].0, "origin")?;
    let periodic: Vec<u8> = parse_list(vals[4].1, vals[4].0, "periodic")?;
    if periodic.iter().any(|&b| b > 1) {
        return Err(format_err(vals[4].0, "periodic flags must be 0 or 1"));
    }
    let kind = match vals[5].1 {
        "metric" => FieldKind::Metric,
        "ell" => FieldKind::Ell,
        "scalar" => FieldKind::Scalar,
        other => return Err(format_err(vals[5].0, format!("unknown kind '{other}'"))),
    };
    if shape.len() != dim {
        return Err(format_err(vals[1].0, "shape length differs from dim"));
    }
    let chart = GridChart::new(origin, spacing, shape, periodic.iter().map(|&b| b == 1).collect())
        .map_err(|e| format_err(0, e.to_string()))?;
    Ok((chart, kind, nl + 1))
}

pub fn decode(bytes: &[u8]) -> Result<AnyField> {
    let (chart, kind, start) = parse_header(bytes)?;
    let n = chart.n_nodes();
    let d = chart.dim();
    let per = kind.per_node(d);
    let payload_len = n * per * 8;
    let expected = start + payload_len + n + 4;
    if bytes.len() < expected {
        return Err(format_err(expected, format!("file has {} bytes, expected {expected}", bytes.len())));
    }
    if bytes.len() > expected {
        return Err(format_err(expected, "trailing bytes after checksum"));
    }
    let body = &bytes[start..start + payload_len + n];
    let stored = u32::from_le_bytes(bytes[expected - 4..expected].try_into().expect("4 bytes"));
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(Error::ChecksumMismatch { stored, computed });
    }
    let floats: Vec<f64> = body[..payload_len]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let mut mask = Vec::with_capacity(n);
    for (i, &b) in body[payload_len..].iter().enumerate() {
        match b {
            0 => mask.push(false),
            1 => mask.push(true),
            _ => return Err(format_err(start + payload_len + i, "mask byte must be 0 or 1")),
        }
    }
    match kind {
        FieldKind::Scalar => Ok(AnyField::Scalar(ScalarField::new(chart, floats, mask)?)),
        FieldKind::Ell => {
            let values = floats.chunks_exact(per).map(|c| Mat::from_slice(d, c)).collect::<Result<Vec<_>>>()?;
            Ok(AnyField::Ell(EllField::new(chart, values, mask, None)?))
        }
        FieldKind::Metric => {
            let mut values = Vec::with_capacity(n);
            for (k, c) in floats.chunks_exact(per).enumerate() {
                let mut m = Mat::zeros(d);
                let mut t = 0;
                for i in 0..d {
                    for j in i..d {
                        m[(i, j)] = c[t];
                        m[(j, i)] = c[t];
                        t += 1;
                    }
                }
                if mask[k] {
                    values.push(SpdMatrix::identity(d));
                } else {
                    let v = SpdMatrix::new(m)
                        .map_err(|e| format_err(start + k * per * 8, format!("node {k}: {e}")))?;
                    values.push(v);
                }
            }
            Ok(AnyField::Metric(MetricField::new(chart, values, mask, "")?))
        }
    }
}

pub fn write_any(field: &AnyField, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode(field))?;
    Ok(())
}

pub fn read_any(path: impl AsRef<Path>) -> Result<AnyField> {
    let bytes = fs::read(path)?;
    decode(&bytes)
}

/// Reads a metric field; the label is taken from the file stem.
pub fn read_field(path: impl AsRef<Path>) -> Result<MetricField> {
    let p = path.as_ref();
    match read_any(p)? {
        AnyField::Metric(g) => {
            let label = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(g.with_label(label))
        }
        other => Err(format_err(0, format!("expected kind=metric, found kind={}", other.kind().name()))),
    }
}

pub fn write_field(g: &MetricField, path: impl AsRef<Path>) -> Result<()> {
    write_any(&AnyField::Metric(g.clone()), path)
}

pub fn write_scalar(s: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    write_any(&AnyField::Scalar(s.clone()), path)
}

pub fn write_ell(b: &EllField, path: impl AsRef<Path>) -> Result<()> {
    write_any(&AnyField::Ell(b.clone()), path)
}
