//! Dataset ingestion and demonstration-to-path conversion.
//!
//! A [`Demonstration`] bundles per-timestep modality channels (state, action,
//! observation embedding, reward, or any user-named channel). Signature
//! kernels operate on a single [`Trajectory`] per demonstration, built by
//! concatenating the selected channels at every timestep, optionally
//! subsampled, standardized over the whole dataset, rescaled, and augmented
//! with a normalized time coordinate.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pooled standard deviations below this are treated as zero.
pub const ZERO_VARIANCE: f64 = 1e-12;

/// Channel names with a fixed position when no explicit selection is given.
const CANONICAL_CHANNELS: [&str; 4] = ["state", "action", "observation", "reward"];

/// A piecewise-linear path: `len() >= 2` points in `R^dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    id: String,
    dim: usize,
    data: Vec<f64>,
}

impl Trajectory {
    pub fn new(id: impl Into<String>, points: Vec<Vec<f64>>) -> Result<Self> {
        let id = id.into();
        let dim = points.first().map_or(0, Vec::len);
        if let Some((t, p)) = points.iter().enumerate().find(|(_, p)| p.len() != dim) {
            return Err(Error::InvalidTrajectory {
                id,
                reason: format!("point {t} has dimension {}, expected {dim}", p.len()),
            });
        }
        let data = points.into_iter().flatten().collect();
        Self::from_flat(id, dim, data)
    }

    /// Builds a trajectory from row-major coordinates.
    pub fn from_flat(id: impl Into<String>, dim: usize, data: Vec<f64>) -> Result<Self> {
        let id = id.into();
        let invalid = |reason: String| Error::InvalidTrajectory {
            id: id.clone(),
            reason,
        };
        if dim == 0 {
            return Err(invalid("dimension must be at least 1".into()));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(invalid(format!(
                "{} coordinates do not divide into points of dimension {dim}",
                data.len()
            )));
        }
        if data.len() / dim < 2 {
            return Err(invalid(format!(
                "a path needs at least 2 points, got {}",
                data.len() / dim
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!(
                "non-finite coordinate at point {}, dimension {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Self { id, dim, data })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    /// Always false: a valid trajectory has at least two points.
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Row-major `(len() - 1) x dim` matrix of consecutive differences.
    pub fn increments(&self) -> Vec<f64> {
        self.data
            .windows(2 * self.dim)
            .step_by(self.dim)
            .flat_map(|w| {
                let (a, b) = w.split_at(self.dim);
                a.iter().zip(b).map(|(a, b)| b - a)
            })
            .collect()
    }

    /// Total length of the path: sum of Euclidean increment norms.
    pub fn one_variation(&self) -> f64 {
        self.increments()
            .chunks_exact(self.dim)
            .map(|inc| inc.iter().map(|v| v * v).sum::<f64>().sqrt())
            .sum()
    }

    /// The same points traversed backwards.
    pub fn reversed(&self) -> Trajectory {
        let data = self
            .data
            .chunks_exact(self.dim)
            .rev()
            .flatten()
            .copied()
            .collect();
        Trajectory {
            id: self.id.clone(),
            dim: self.dim,
            data,
        }
    }

    /// Multiplies every coordinate by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Trajectory> {
        let data = self.data.iter().map(|v| v * factor).collect();
        Trajectory::from_flat(self.id.clone(), self.dim, data)
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Trajectory {
        self.id = id.into();
        self
    }
}

/// One recorded demonstration: named per-timestep channels of common length.
#[derive(Debug, Clone, PartialEq)]
pub struct Demonstration {
    id: String,
    channels: BTreeMap<String, Vec<Vec<f64>>>,
    len: usize,
}

impl Demonstration {
    pub fn new(id: impl Into<String>, channels: BTreeMap<String, Vec<Vec<f64>>>) -> Result<Self> {
        let id = id.into();
        let mut lengths = channels.iter().map(|(name, rows)| (name, rows.len()));
        let Some((first_name, len)) = lengths.next() else {
            return Err(Error::InconsistentChannels {
                id,
                detail: "no channels present".into(),
            });
        };
        if let Some((name, other)) = lengths.find(|&(_, l)| l != len) {
            return Err(Error::InconsistentChannels {
                id,
                detail: format!("'{first_name}' has {len} steps but '{name}' has {other}"),
            });
        }
        for (name, rows) in &channels {
            let width = rows.first().map_or(0, Vec::len);
            if width == 0 {
                return Err(Error::InconsistentChannels {
                    id,
                    detail: format!("channel '{name}' has zero width or no steps"),
                });
            }
            if let Some(t) = rows.iter().position(|r| r.len() != width) {
                return Err(Error::InconsistentChannels {
                    id,
                    detail: format!(
                        "channel '{name}' row {t} has width {}, expected {width}",
                        rows[t].len()
                    ),
                });
            }
            if rows.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::InvalidTrajectory {
                    id,
                    reason: format!("channel '{name}' contains a non-finite value"),
                });
            }
        }
        Ok(Self { id, channels, len })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Common number of timesteps across channels.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn channel(&self, name: &str) -> Option<&[Vec<f64>]> {
        self.channels.get(name).map(Vec::as_slice)
    }

    pub fn channel_names(&self) -> impl Iterator<Item = &str> {
        self.channels.keys().map(String::as_str)
    }

    /// Channel names in canonical order: state, action, observation, reward,
    /// then any custom channels alphabetically.
    pub fn default_channel_order(&self) -> Vec<String> {
        let mut order: Vec<String> = CANONICAL_CHANNELS
            .iter()
            .filter(|c| self.channels.contains_key(**c))
            .map(|c| c.to_string())
            .collect();
        order.extend(
            self.channels
                .keys()
                .filter(|k| !CANONICAL_CHANNELS.contains(&k.as_str()))
                .cloned(),
        );
        order
    }
}

/// Knobs for turning demonstrations into kernel-ready trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathConfig {
    pub augment_time: bool,
    pub subsample_stride: usize,
    pub standardize: bool,
    /// Channels to concatenate, in this order. Empty means every channel in
    /// canonical order.
    pub channel_selection: Vec<String>,
    pub prescale: f64,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            augment_time: false,
            subsample_stride: 1,
            standardize: true,
            channel_selection: Vec::new(),
            prescale: 1.0,
        }
    }
}

impl PathConfig {
    pub fn validate(&self) -> Result<()> {
        if self.subsample_stride == 0 {
            return Err(Error::InvalidConfig("subsample_stride must be >= 1".into()));
        }
        if !(self.prescale.is_finite() && self.prescale > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "prescale must be a positive finite number, got {}",
                self.prescale
            )));
        }
        Ok(())
    }
}

/// On-disk dataset layouts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum DatasetFormat {
    #[default]
    Jsonl,
    CsvDir,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonlRecord {
    id: String,
    channels: BTreeMap<String, Vec<Vec<f64>>>,
}

/// Reads every demonstration at `location`, in file (or sorted directory) order.
pub fn load_dataset(location: &Path, format: DatasetFormat) -> Result<Vec<Demonstration>> {
    let demos = match format {
        DatasetFormat::Jsonl => load_jsonl(location)?,
        DatasetFormat::CsvDir => load_csv_dir(location)?,
    };
    if demos.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(demos)
}

fn load_jsonl(location: &Path) -> Result<Vec<Demonstration>> {
    let file = File::open(location).map_err(|e| Error::io(location, e))?;
    let mut demos = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(location, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let where_ = || format!("{}:{}", location.display(), lineno + 1);
        let record: JsonlRecord = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            location: where_(),
            message: e.to_string(),
        })?;
        demos.push(Demonstration::new(record.id, record.channels)?);
    }
    Ok(demos)
}

fn load_csv_dir(location: &Path) -> Result<Vec<Demonstration>> {
    let mut subdirs = Vec::new();
    for entry in fs::read_dir(location).map_err(|e| Error::io(location, e))? {
        let entry = entry.map_err(|e| Error::io(location, e))?;
        if entry.path().is_dir() {
            subdirs.push(entry.path());
        }
    }
    subdirs.sort();

    let mut demos = Vec::with_capacity(subdirs.len());
    for dir in subdirs {
        let id = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let mut files = Vec::new();
        for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let path = entry.map_err(|e| Error::io(&dir, e))?.path();
            if path.extension().is_some_and(|ext| ext == "csv") {
                files.push(path);
            }
        }
        files.sort();
        let mut channels = BTreeMap::new();
        for file in files {
            let name = file
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            channels.insert(name, read_csv_matrix(&file)?);
        }
        demos.push(Demonstration::new(id, channels)?);
    }
    Ok(demos)
}

fn read_csv_matrix(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Malformed {
            location: path.display().to_string(),
            message: e.to_string(),
        })?;
    let mut rows = Vec::new();
    for (rowno, record) in reader.records().enumerate() {
        let where_ = |col: Option<usize>| match col {
            Some(c) => format!("{}:{} column {}", path.display(), rowno + 1, c + 1),
            None => format!("{}:{}", path.display(), rowno + 1),
        };
        let record = record.map_err(|e| Error::Malformed {
            location: where_(None),
            message: e.to_string(),
        })?;
        let row = record
            .iter()
            .enumerate()
            .map(|(col, field)| match field.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Malformed {
                    location: where_(Some(col)),
                    message: format!("'{field}' is not a finite number"),
                }),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Concatenates the selected channels at every timestep, in selection order.
pub fn flatten_stack(demo: &Demonstration, cfg: &PathConfig) -> Result<Trajectory> {
    let selection = if cfg.channel_selection.is_empty() {
        demo.default_channel_order()
    } else {
        cfg.channel_selection.clone()
    };
    let channels = selection
        .iter()
        .map(|name| {
            demo.channel(name).ok_or_else(|| Error::MissingChannel {
                id: demo.id.clone(),
                channel: name.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let dim = channels.iter().map(|c| c[0].len()).sum();
    let mut data = Vec::with_capacity(dim * demo.len());
    for t in 0..demo.len() {
        for channel in &channels {
            data.extend_from_slice(&channel[t]);
        }
    }
    Trajectory::from_flat(demo.id.clone(), dim, data)
}

/// Prepends a time coordinate `t / (T - 1)` to every point.
pub fn augment_time(traj: &Trajectory) -> Trajectory {
    let last = (traj.len() - 1) as f64;
    let dim = traj.dim + 1;
    let mut data = Vec::with_capacity(dim * traj.len());
    for (t, p) in traj.points().enumerate() {
        data.push(t as f64 / last);
        data.extend_from_slice(p);
    }
    Trajectory {
        id: traj.id.clone(),
        dim,
        data,
    }
}

/// Keeps points `0, stride, 2 * stride, ...` plus the final point.
pub fn subsample(traj: &Trajectory, stride: usize) -> Result<Trajectory> {
    if stride == 0 {
        return Err(Error::InvalidConfig("subsample stride must be >= 1".into()));
    }
    let last = traj.len() - 1;
    let mut keep: Vec<usize> = (0..=last).step_by(stride).collect();
    if keep.last() != Some(&last) {
        keep.push(last);
    }
    let data = keep
        .iter()
        .flat_map(|&t| traj.point(t).iter().copied())
        .collect();
    Trajectory::from_flat(traj.id.clone(), traj.dim, data)
}

/// Standardizes each coordinate with statistics pooled over all points of all
/// trajectories. Coordinates with (near-)zero spread are only centered.
pub fn standardize(dataset: &[Trajectory]) -> Result<Vec<Trajectory>> {
    let first = dataset.first().ok_or(Error::EmptyDataset)?;
    let dim = first.dim;
    if let Some(t) = dataset.iter().find(|t| t.dim != dim) {
        return Err(Error::DimensionMismatch(dim, t.dim));
    }
    let count = dataset.iter().map(Trajectory::len).sum::<usize>() as f64;

    let mut mean = vec![0.0; dim];
    for p in dataset.iter().flat_map(Trajectory::points) {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= count);

    let mut var = vec![0.0; dim];
    for p in dataset.iter().flat_map(Trajectory::points) {
        for ((s, v), m) in var.iter_mut().zip(p).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let scale: Vec<f64> = var
        .iter()
        .map(|s| {
            let sd = (s / count).sqrt();
            if sd < ZERO_VARIANCE {
                1.0
            } else {
                sd
            }
        })
        .collect();

    dataset
        .iter()
        .map(|traj| {
            let data = traj
                .data
                .iter()
                .enumerate()
                .map(|(i, v)| (v - mean[i % dim]) / scale[i % dim])
                .collect();
            Trajectory::from_flat(traj.id.clone(), dim, data)
        })
        .collect()
}

/// Full conversion pipeline: flatten, subsample, standardize, prescale, then
/// time augmentation (so the time coordinate stays in `[0, 1]`).
pub fn prepare(demos: &[Demonstration], cfg: &PathConfig) -> Result<Vec<Trajectory>> {
    cfg.validate()?;
    if demos.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut trajs = demos
        .iter()
        .map(|d| subsample(&flatten_stack(d, cfg)?, cfg.subsample_stride))
        .collect::<Result<Vec<_>>>()?;
    if cfg.standardize {
        trajs = standardize(&trajs)?;
    }
    if cfg.prescale != 1.0 {
        trajs = trajs
            .iter()
            .map(|t| t.scaled(cfg.prescale))
            .collect::<Result<_>>()?;
    }
    if cfg.augment_time {
        trajs = trajs.iter().map(augment_time).collect();
    }
    Ok(trajs)
}
