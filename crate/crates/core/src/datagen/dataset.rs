use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::GeneratorConfig;
use crate::{Error, Result};

/// One training example: sensor values `s`, query point `p`, label `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleTriple<'a> {
    pub s: ArrayView1<'a, f64>,
    pub p: ArrayView1<'a, f64>,
    pub y: f64,
}

/// Provenance and bounds carried alongside the numeric arrays.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    /// User-supplied label bound `B`. When absent `B = max |y|`.
    #[serde(default)]
    pub label_bound_override: Option<f64>,
    /// Locations of the sensors feeding the branch net; empty when unknown.
    #[serde(default)]
    pub sensor_grid: Vec<f64>,
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub generator: Option<GeneratorConfig>,
}

/// Triples stored column-wise: `sensors` is `n x m`, `points` is `n x d2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    sensors: Array2<f64>,
    points: Array2<f64>,
    labels: Array1<f64>,
    label_bound: f64,
    meta: DatasetMeta,
}

impl Dataset {
    pub fn new(
        sensors: Array2<f64>,
        points: Array2<f64>,
        labels: Vec<f64>,
        meta: DatasetMeta,
    ) -> Result<Self> {
        let n = labels.len();
        if sensors.nrows() != n || points.nrows() != n {
            return Err(Error::input(format!(
                "{} sensor rows, {} point rows and {n} labels",
                sensors.nrows(),
                points.nrows()
            )));
        }
        let max_abs = labels.iter().fold(0.0f64, |acc, y| acc.max(y.abs()));
        let label_bound = match meta.label_bound_override {
            Some(b) if b < max_abs => {
                return Err(Error::input(format!(
                    "label bound {b} is below the largest |y| = {max_abs}"
                )))
            }
            Some(b) => b,
            None => max_abs,
        };
        Ok(Dataset {
            sensors,
            points,
            labels: Array1::from(labels),
            label_bound,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `m`, the number of sensor values per example.
    pub fn sensor_dim(&self) -> usize {
        self.sensors.ncols()
    }

    /// `d2`, the query point dimension.
    pub fn point_dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn sensors(&self) -> ArrayView2<'_, f64> {
        self.sensors.view()
    }

    pub fn points(&self) -> ArrayView2<'_, f64> {
        self.points.view()
    }

    pub fn labels(&self) -> ArrayView1<'_, f64> {
        self.labels.view()
    }

    /// `B` with `|y_i| <= B` for every label.
    pub fn label_bound(&self) -> f64 {
        self.label_bound
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn triple(&self, i: usize) -> SampleTriple<'_> {
        SampleTriple {
            s: self.sensors.row(i),
            p: self.points.row(i),
            y: self.labels[i],
        }
    }

    pub fn triples(&self) -> impl Iterator<Item = SampleTriple<'_>> {
        (0..self.len()).map(|i| self.triple(i))
    }

    /// Rows `indices`, in that order, with the same metadata.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::input(format!("row {bad} out of range")));
        }
        Dataset::new(
            self.sensors.select(Axis(0), indices),
            self.points.select(Axis(0), indices),
            indices.iter().map(|&i| self.labels[i]).collect(),
            self.meta.clone(),
        )
    }

    /// Keeps the first `n` rows.
    pub fn truncate(self, n: usize) -> Result<Self> {
        if n >= self.len() {
            return Ok(self);
        }
        let idx: Vec<usize> = (0..n).collect();
        self.select(&idx)
    }
}

/// Sidecar file contents written next to each dataset CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Sidecar {
    label_bound: f64,
    rows: usize,
    sensor_count: usize,
    point_dim: usize,
    #[serde(flatten)]
    meta: DatasetMeta,
}

/// `data.csv` -> `data.json`
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes the header `s_0..s_{m-1},p_0..p_{d2-1},y`, one row per triple, and the
/// metadata sidecar. Values use shortest round-trip formatting.
pub fn write_dataset_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    let header: Vec<String> = (0..data.sensor_dim())
        .map(|i| format!("s_{i}"))
        .chain((0..data.point_dim()).map(|i| format!("p_{i}")))
        .chain(std::iter::once("y".to_string()))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for t in data.triples() {
        let mut first = true;
        for v in t.s.iter().chain(t.p.iter()).chain(std::iter::once(&t.y)) {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&format!("{v:?}"));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))?;

    let sidecar = Sidecar {
        label_bound: data.label_bound(),
        rows: data.len(),
        sensor_count: data.sensor_dim(),
        point_dim: data.point_dim(),
        meta: data.meta.clone(),
    };
    let side = sidecar_path(path);
    fs::write(&side, serde_json::to_string_pretty(&sidecar)?).map_err(|e| Error::io(&side, e))
}

/// Reads a dataset CSV and, when present, its sidecar metadata.
pub fn read_dataset_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim().is_empty() {
        return Err(Error::input(format!("{} is empty", path.display())));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    let (m, d2) = parse_header(&header).map_err(|d| Error::format(path, d))?;
    let width = m + d2 + 1;

    let mut sensors = Vec::new();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != width {
            return Err(Error::format(
                path,
                format!(
                    "row {} has {} columns, header has {width}",
                    row + 1,
                    record.len()
                ),
            ));
        }
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::format(path, format!("row {} column {col}: {field:?}", row + 1))
            })?;
            match col {
                c if c < m => sensors.push(v),
                c if c < m + d2 => points.push(v),
                _ => labels.push(v),
            }
        }
    }
    let n = labels.len();
    let sensors = Array2::from_shape_vec((n, m), sensors).expect("row lengths checked");
    let points = Array2::from_shape_vec((n, d2), points).expect("row lengths checked");

    let side = sidecar_path(path);
    let meta = if side.exists() {
        let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
        let sidecar: Sidecar =
            serde_json::from_str(&text).map_err(|e| Error::format(&side, e.to_string()))?;
        if sidecar.rows != n || sidecar.sensor_count != m || sidecar.point_dim != d2 {
            return Err(Error::format(&side, "sidecar shape disagrees with the CSV"));
        }
        sidecar.meta
    } else {
        DatasetMeta::default()
    };
    Dataset::new(sensors, points, labels, meta)
}

fn parse_header(header: &csv::StringRecord) -> std::result::Result<(usize, usize), String> {
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names.last() != Some(&"y") {
        return Err("last column must be `y`".into());
    }
    let m = names.iter().take_while(|n| n.starts_with("s_")).count();
    let d2 = names.len() - 1 - m;
    for (i, name) in names[..m].iter().enumerate() {
        if *name != format!("s_{i}") {
            return Err(format!("expected column s_{i}, found {name}"));
        }
    }
    for (i, name) in names[m..m + d2].iter().enumerate() {
        if *name != format!("p_{i}") {
            return Err(format!("expected column p_{i}, found {name}"));
        }
    }
    if m == 0 || d2 == 0 {
        return Err("need at least one s_ and one p_ column".into());
    }
    Ok((m, d2))
}
