//! Seeded Monte-Carlo sweeps over the synthetic models.
//!
//! A sweep varies either the SNR `gamma` (at fixed `L`) or `L` (at fixed
//! `gamma`). At every sweep point, trial `i` draws one dataset from the
//! seed `seed::derive(master_seed, i)` and evaluates every requested measure
//! on that same dataset, so measures are paired within a trial. Trials run
//! concurrently and are merged by index; output does not depend on
//! scheduling, and adding trials never changes the earlier ones.

mod chart;
mod csv_out;
mod selftest;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::measures::{chsic, hsic};
use crate::pairs::{confounder_order, pair_budget, select_confounder, select_random, SelectionMode};
use crate::par;
use crate::seed;
use crate::synth::{generate, Model, ModelConfig};

pub use chart::{render_chart, render_svg};
pub use csv_out::{parse_csv, read_csv, to_csv_string, write_csv, CSV_HEADER};
pub use selftest::{
    complete_cov_residual, complete_identity_residual, finite_m_agreement, kernel_limit_error, self_test,
    Check, SelfTestReport, LIMIT_BANDWIDTH, LIMIT_DIMS,
};

/// Child stream of a trial seed used for random pair selection.
const RANDOM_PAIRS_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MeasureSpec {
    #[serde(rename = "hsic")]
    Hsic,
    #[serde(rename = "chsic")]
    Chsic,
    #[serde(rename = "chsic-random")]
    ChsicRandom,
}

impl MeasureSpec {
    pub const ALL: [MeasureSpec; 3] = [MeasureSpec::Hsic, MeasureSpec::Chsic, MeasureSpec::ChsicRandom];

    pub fn as_str(&self) -> &'static str {
        match self {
            MeasureSpec::Hsic => "hsic",
            MeasureSpec::Chsic => "chsic",
            MeasureSpec::ChsicRandom => "chsic-random",
        }
    }

    pub fn mode(&self) -> SelectionMode {
        match self {
            MeasureSpec::Hsic => SelectionMode::Complete,
            MeasureSpec::Chsic => SelectionMode::Confounder,
            MeasureSpec::ChsicRandom => SelectionMode::Random,
        }
    }

    pub fn uses_alpha(&self) -> bool {
        !matches!(self, MeasureSpec::Hsic)
    }
}

impl std::fmt::Display for MeasureSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MeasureSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MeasureSpec::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown measure {s:?}")))
    }
}

/// Which variable a sweep varies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SweepAxis {
    /// SNR sweep in dB at a fixed sample count.
    Gamma { len: usize, gamma_db: Vec<f64> },
    /// Sample-count sweep at a fixed SNR.
    Length { gamma_db: f64, lengths: Vec<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    Gamma,
    Length,
}

impl AxisKind {
    /// Tag used in output file names.
    pub fn as_str(&self) -> &'static str {
        match self {
            AxisKind::Gamma => "gamma",
            AxisKind::Length => "L",
        }
    }
}

impl SweepAxis {
    pub fn kind(&self) -> AxisKind {
        match self {
            SweepAxis::Gamma { .. } => AxisKind::Gamma,
            SweepAxis::Length { .. } => AxisKind::Length,
        }
    }

    fn lengths(&self) -> Vec<usize> {
        match self {
            SweepAxis::Gamma { len, .. } => vec![*len],
            SweepAxis::Length { lengths, .. } => lengths.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: Model,
    pub measures: Vec<MeasureSpec>,
    #[serde(default)]
    pub alphas: Vec<f64>,
    pub axis: SweepAxis,
    pub trials: usize,
    pub master_seed: u64,
    /// Directory for CSV and chart output.
    pub output: PathBuf,
}

pub const DEFAULT_TRIALS: usize = 500;
pub const DEFAULT_LENGTHS: [usize; 6] = [100, 200, 300, 400, 500, 600];

/// `-10, -8, .., 20` dB.
pub fn default_gamma_grid() -> Vec<f64> {
    (0..16).map(|i| -10.0 + 2.0 * i as f64).collect()
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Err(Error::Config(m));
        if self.measures.is_empty() {
            return cfg_err("no measures requested".into());
        }
        if self.trials == 0 {
            return cfg_err("trials must be >= 1".into());
        }
        match &self.axis {
            SweepAxis::Gamma { len, gamma_db } => {
                if gamma_db.is_empty() {
                    return cfg_err("empty gamma grid".into());
                }
                if let Some(g) = gamma_db.iter().find(|g| !g.is_finite()) {
                    return cfg_err(format!("non-finite gamma {g}"));
                }
                if *len < 2 {
                    return cfg_err(format!("L must be >= 2, got {len}"));
                }
            }
            SweepAxis::Length { gamma_db, lengths } => {
                if lengths.is_empty() {
                    return cfg_err("empty L grid".into());
                }
                if !gamma_db.is_finite() {
                    return cfg_err(format!("non-finite gamma {gamma_db}"));
                }
                if let Some(l) = lengths.iter().find(|&&l| l < 2) {
                    return cfg_err(format!("L must be >= 2, got {l}"));
                }
            }
        }
        let needs_alpha = self.measures.iter().any(MeasureSpec::uses_alpha);
        if needs_alpha && self.alphas.is_empty() {
            return cfg_err("conditional measures need at least one alpha".into());
        }
        let min_len = self.axis.lengths().into_iter().min().unwrap_or(2);
        for &alpha in &self.alphas {
            if !(alpha.is_finite() && alpha >= 1.0 && alpha <= (min_len - 1) as f64) {
                return cfg_err(format!(
                    "alpha {alpha} outside [1, {}] (smallest swept L is {min_len})",
                    min_len - 1
                ));
            }
        }
        Ok(())
    }

    /// Sweep points in configuration order.
    pub fn points(&self) -> Vec<SweepPoint> {
        match &self.axis {
            SweepAxis::Gamma { len, gamma_db } => gamma_db
                .iter()
                .map(|&g| SweepPoint {
                    model: self.model,
                    len: *len,
                    gamma_db: g,
                })
                .collect(),
            SweepAxis::Length { gamma_db, lengths } => lengths
                .iter()
                .map(|&len| SweepPoint {
                    model: self.model,
                    len,
                    gamma_db: *gamma_db,
                })
                .collect(),
        }
    }

    /// Measures deduplicated, in canonical order.
    fn measure_set(&self) -> Vec<MeasureSpec> {
        let mut m = self.measures.clone();
        m.sort_unstable();
        m.dedup();
        m
    }

    /// Alphas deduplicated, ascending.
    fn alpha_set(&self) -> Vec<f64> {
        let mut a = self.alphas.clone();
        a.sort_by(f64::total_cmp);
        a.dedup();
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub model: Model,
    pub len: usize,
    pub gamma_db: f64,
}

impl SweepPoint {
    pub fn value(&self, axis: AxisKind) -> f64 {
        match axis {
            AxisKind::Gamma => self.gamma_db,
            AxisKind::Length => self.len as f64,
        }
    }

    fn model_config(&self) -> ModelConfig {
        ModelConfig {
            model: self.model,
            gamma_db: self.gamma_db,
            len: self.len,
        }
    }
}

/// One measure evaluated in one trial. `value` is the reported
/// (non-negative) measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialValue {
    pub measure: MeasureSpec,
    pub alpha: Option<f64>,
    pub value: f64,
}

/// Runs trial `trial` at `point`: one dataset, every requested measure.
/// Values come back ordered by measure, then by ascending alpha.
pub fn run_trial(
    point: &SweepPoint,
    measures: &[MeasureSpec],
    alphas: &[f64],
    trial: u64,
    master_seed: u64,
) -> Result<Vec<TrialValue>> {
    let trial_seed = seed::derive(master_seed, trial);
    let data = generate(&point.model_config(), trial_seed)?;
    let kx = KernelSpec::from_samples(&data.x)?;
    let ky = KernelSpec::from_samples(&data.y)?;

    let mut measures = measures.to_vec();
    measures.sort_unstable();
    measures.dedup();
    let mut alphas = alphas.to_vec();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();

    let order = if measures.contains(&MeasureSpec::Chsic) {
        Some(confounder_order(&data.z)?)
    } else {
        None
    };
    let mut out = Vec::new();
    for measure in measures {
        match measure {
            MeasureSpec::Hsic => out.push(TrialValue {
                measure,
                alpha: None,
                value: hsic(&data.x, &data.y, &kx, &ky)?.value,
            }),
            MeasureSpec::Chsic | MeasureSpec::ChsicRandom => {
                for &alpha in &alphas {
                    let k = pair_budget(point.len, alpha)?;
                    let sel = match (&order, measure) {
                        (Some(order), MeasureSpec::Chsic) => select_confounder(order, k)?,
                        _ => select_random(point.len, k, seed::derive(trial_seed, RANDOM_PAIRS_STREAM))?,
                    }
                    .with_alpha(alpha);
                    out.push(TrialValue {
                        measure,
                        alpha: Some(alpha),
                        value: chsic(&data.x, &data.y, &sel, &kx, &ky)?.value,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Per-trial values at one sweep point, indexed by trial.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTrials {
    pub point: SweepPoint,
    pub trials: Vec<Vec<TrialValue>>,
}

/// Runs every trial of every sweep point.
pub fn collect_trials(cfg: &ExperimentConfig) -> Result<Vec<PointTrials>> {
    cfg.validate()?;
    let points = cfg.points();
    let measures = cfg.measure_set();
    let alphas = cfg.alpha_set();
    let trials = cfg.trials;
    let results = par::map_range(points.len() * trials, |job| {
        let (p, t) = (job / trials, job % trials);
        run_trial(&points[p], &measures, &alphas, t as u64, cfg.master_seed).map_err(|e| {
            Error::Trial {
                context: format!(
                    "model {} L {} gamma {} dB trial {t}",
                    cfg.model, points[p].len, points[p].gamma_db
                ),
                source: Box::new(e),
            }
        })
    });
    let mut results = results.into_iter();
    points
        .into_iter()
        .map(|point| {
            let trials = results.by_ref().take(trials).collect::<Result<Vec<_>>>()?;
            Ok(PointTrials { point, trials })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub model: Model,
    pub measure: MeasureSpec,
    pub mode: SelectionMode,
    pub alpha: Option<f64>,
    pub len: usize,
    pub gamma_db: f64,
    pub trials: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub model: Model,
    pub axis: AxisKind,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// The row for `(measure, alpha)` at the given sweep value, if any.
    pub fn find(&self, measure: MeasureSpec, alpha: Option<f64>, at: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| {
            r.measure == measure && r.alpha == alpha && self.axis_value(r) == at
        })
    }

    pub fn axis_value(&self, row: &SweepRow) -> f64 {
        match self.axis {
            AxisKind::Gamma => row.gamma_db,
            AxisKind::Length => row.len as f64,
        }
    }

    /// Conventional file stem, `<model>_<axis>`.
    pub fn file_stem(&self) -> String {
        format!("{}_{}", self.model, self.axis.as_str())
    }
}

/// Mean and sample standard deviation (`1/(n-1)`; zero when `n = 1`).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Aggregates collected trials into one row per (measure, alpha, point),
/// ordered by measure, alpha and sweep value.
pub fn aggregate(cfg: &ExperimentConfig, collected: &[PointTrials]) -> SweepResult {
    let axis = cfg.axis.kind();
    let mut rows = Vec::new();
    for pt in collected {
        let Some(first) = pt.trials.first() else { continue };
        for (slot, tv) in first.iter().enumerate() {
            let values: Vec<f64> = pt.trials.iter().map(|t| t[slot].value).collect();
            let (mean, std) = mean_std(&values);
            rows.push(SweepRow {
                model: cfg.model,
                measure: tv.measure,
                mode: tv.measure.mode(),
                alpha: tv.alpha,
                len: pt.point.len,
                gamma_db: pt.point.gamma_db,
                trials: values.len(),
                mean,
                std,
            });
        }
    }
    rows.sort_by(|a, b| {
        let key = |r: &SweepRow| match axis {
            AxisKind::Gamma => r.gamma_db,
            AxisKind::Length => r.len as f64,
        };
        a.measure
            .cmp(&b.measure)
            .then(a.alpha.unwrap_or(0.0).total_cmp(&b.alpha.unwrap_or(0.0)))
            .then(key(a).total_cmp(&key(b)))
    });
    SweepResult {
        model: cfg.model,
        axis,
        rows,
    }
}

pub fn sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let collected = collect_trials(cfg)?;
    Ok(aggregate(cfg, &collected))
}

/// Runs a sweep and writes `<model>_<axis>.csv` and `.svg` into
/// `cfg.output`. Returns the result and the written paths.
pub fn run(cfg: &ExperimentConfig) -> Result<(SweepResult, Vec<PathBuf>)> {
    let result = sweep(cfg)?;
    let dir: &Path = &cfg.output;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stem = result.file_stem();
    let csv_path = dir.join(format!("{stem}.csv"));
    let svg_path = dir.join(format!("{stem}.svg"));
    write_csv(&result, &csv_path)?;
    render_chart(&result, &svg_path)?;
    Ok((result, vec![csv_path, svg_path]))
}
