//! Point-cloud CSV files, sequence manifests and IFS definitions.
//!
//! Cloud format: one point per row, comma-separated coordinates. Lines
//! starting with `#` are comments, a first row with no numeric field is a
//! header, and blank lines are only allowed after the last point.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperspace::SetSequence;
use crate::ifs::{Ifs, IfsFile};
use crate::metric::{Metric, Point, PointSet};

/// Upper bound on generated candidate lattices.
pub const MAX_GRID_POINTS: usize = 1_000_000;

pub fn load_cloud(path: impl AsRef<Path>) -> Result<PointSet> {
    load_cloud_with_dim(path, None)
}

/// Loads a cloud, requiring `dim` columns when given.
pub fn load_cloud_with_dim(path: impl AsRef<Path>, dim: Option<usize>) -> Result<PointSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_cloud(&text, path, dim)
}

pub fn parse_cloud(text: &str, path: &Path, dim: Option<usize>) -> Result<PointSet> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut points = Vec::new();
    let mut width: Option<usize> = None;
    let mut pending_blank: Option<usize> = None;
    let mut header_allowed = true;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            pending_blank.get_or_insert(line_no);
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        if let Some(blank) = pending_blank {
            return Err(parse_err(blank, "blank line inside the data".into()));
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Vec<Option<f64>> = fields.iter().map(|f| f.parse::<f64>().ok()).collect();
        if header_allowed && parsed.iter().all(Option::is_none) {
            header_allowed = false;
            continue;
        }
        header_allowed = false;

        let expected = *width.get_or_insert(fields.len());
        if fields.len() != expected {
            return Err(Error::RaggedRow {
                path: path.to_path_buf(),
                line: line_no,
                expected,
                found: fields.len(),
            });
        }
        if let Some(d) = dim {
            if expected != d {
                return Err(parse_err(
                    line_no,
                    format!("row has {expected} columns, expected dimension {d}"),
                ));
            }
        }
        let mut coords = Vec::with_capacity(fields.len());
        for (field, value) in fields.iter().zip(parsed) {
            match value {
                Some(v) if v.is_finite() => coords.push(v),
                _ => return Err(parse_err(line_no, format!("invalid coordinate {field:?}"))),
            }
        }
        points.push(Point::new(coords).map_err(|e| parse_err(line_no, e.to_string()))?);
    }
    if points.is_empty() {
        return Err(Error::EmptyCloud(path.to_path_buf()));
    }
    PointSet::new(points)
}

/// CSV text with every coordinate in shortest round-trip form.
pub fn format_cloud<'a>(points: impl IntoIterator<Item = &'a Point>) -> String {
    let mut out = String::new();
    for p in points {
        for (k, c) in p.coords().iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            write!(out, "{c:?}").expect("writing to a String cannot fail");
        }
        out.push('\n');
    }
    out
}

pub fn save_cloud(set: &PointSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_cloud(set)).map_err(|e| Error::io(path, e))
}

/// `{"dim": d, "entries": [{"index": 1, "path": "a1.csv"}, …]}`; relative
/// paths resolve against the manifest's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub dim: usize,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub index: usize,
    pub path: PathBuf,
}

impl Manifest {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Format("manifest: dim must be positive".into()));
        }
        for (pos, e) in self.entries.iter().enumerate() {
            if e.index != pos + 1 {
                return Err(Error::Format(format!(
                    "manifest: entry {} has index {}, expected {}",
                    pos + 1,
                    e.index,
                    pos + 1
                )));
            }
        }
        Ok(())
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a manifest and every cloud it references, in index order.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<(Manifest, Vec<PointSet>)> {
    let path = path.as_ref();
    let manifest: Manifest = read_json(path)?;
    manifest.validate()?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    let sets = manifest
        .entries
        .iter()
        .map(|e| load_cloud_with_dim(base.join(&e.path), Some(manifest.dim)))
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, sets))
}

pub fn load_sequence(path: impl AsRef<Path>, metric: Metric) -> Result<SetSequence> {
    let (_, sets) = load_manifest(path)?;
    SetSequence::new(sets, metric)
}

/// Writes each set to `<stem><index>.csv` next to the manifest.
pub fn save_manifest(sets: &[PointSet], path: impl AsRef<Path>, stem: &str) -> Result<Manifest> {
    let path = path.as_ref();
    let first = sets
        .first()
        .ok_or_else(|| Error::Format("manifest: no sets to save".into()))?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    let mut entries = Vec::with_capacity(sets.len());
    for (i, s) in sets.iter().enumerate() {
        let file = PathBuf::from(format!("{stem}{}.csv", i + 1));
        save_cloud(s, base.join(&file))?;
        entries.push(ManifestEntry {
            index: i + 1,
            path: file,
        });
    }
    let manifest = Manifest {
        dim: first.dim(),
        entries,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(path, json + "\n").map_err(|e| Error::io(path, e))?;
    Ok(manifest)
}

pub fn load_ifs(path: impl AsRef<Path>) -> Result<Ifs> {
    let file: IfsFile = read_json(path.as_ref())?;
    Ifs::from_file(file)
}

/// Lattice points `k · step` covering the joint bounding box of `sets`
/// grown by `step` on every side.
pub fn candidate_grid(sets: &[PointSet], step: f64) -> Result<PointSet> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "grid step must be > 0, got {step}"
        )));
    }
    let first = sets.first().ok_or(Error::EmptySet)?;
    let (mut lo, mut hi) = first.bounding_box();
    for s in &sets[1..] {
        first.check_dim(s.dim())?;
        let (l, h) = s.bounding_box();
        for k in 0..lo.len() {
            lo[k] = lo[k].min(l[k]);
            hi[k] = hi[k].max(h[k]);
        }
    }
    let ranges: Vec<(i64, i64)> = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| (((l - step) / step).floor() as i64, ((h + step) / step).ceil() as i64))
        .collect();
    let total = ranges
        .iter()
        .try_fold(1usize, |acc, (a, b)| acc.checked_mul((b - a + 1) as usize))
        .filter(|&t| t <= MAX_GRID_POINTS)
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "grid step {step} yields more than {MAX_GRID_POINTS} candidates"
            ))
        })?;
    let mut points = Vec::with_capacity(total);
    let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        points.push(Point::new(idx.iter().map(|&k| k as f64 * step).collect())?);
        let mut k = idx.len();
        loop {
            if k == 0 {
                return PointSet::new(points);
            }
            k -= 1;
            if idx[k] < ranges[k].1 {
                idx[k] += 1;
                break;
            }
            idx[k] = ranges[k].0;
        }
    }
}
