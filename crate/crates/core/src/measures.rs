//! HSIC and the confounder-pruned conditional HSIC.
//!
//! For real data and even kernels every conjugate transpose reduces to a
//! transpose, so everything here is real arithmetic.

use crate::error::{Error, Result};
use crate::kernels::{gram, GramMatrix, KernelSpec};
use crate::pairs::{PairSelection, SelectionMode};
use crate::par;

/// Raw values at or above this are reported as non-negative roundoff.
pub const ROUNDOFF_FLOOR: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MeasureKind {
    Hsic,
    Chsic,
}

impl MeasureKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MeasureKind::Hsic => "hsic",
            MeasureKind::Chsic => "chsic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureResult {
    /// Reported value, negative roundoff clamped to zero.
    pub value: f64,
    /// Unclamped value.
    pub raw: f64,
    pub measure: MeasureKind,
    pub len: usize,
    pub alpha: Option<f64>,
    /// Number of pairs; `L(L-1)/2` for HSIC.
    pub pairs: usize,
    pub mode: SelectionMode,
    pub bandwidth_x: f64,
    pub bandwidth_y: f64,
}

fn check_lengths(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!(
            "x has {} samples, y has {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 samples, got {}",
            x.len()
        )));
    }
    Ok(())
}

fn row_means(g: &GramMatrix) -> (Vec<f64>, f64) {
    let n = g.nrows();
    let rows: Vec<f64> = (0..n).map(|i| g.row(i).iter().sum::<f64>() / n as f64).collect();
    // Gram matrices here are symmetric, so column means equal row means.
    let grand = rows.iter().sum::<f64>() / n as f64;
    (rows, grand)
}

/// `sum_ij (P K P)_ij (P Q P)_ij`, each matrix centered through its row,
/// column and grand means. Centering both sides (P is idempotent) makes the
/// value exactly symmetric in `K` and `Q`.
fn centered_inner(k: &GramMatrix, q: &GramMatrix) -> f64 {
    let (kr, kg) = row_means(k);
    let (qr, qg) = row_means(q);
    par::ordered_sum(k.nrows(), |i| {
        let (ki, qi) = (kr[i], qr[i]);
        (0..k.ncols())
            .map(|j| (k.get(i, j) - ki - kr[j] + kg) * (q.get(i, j) - qi - qr[j] + qg))
            .sum()
    })
}

/// `trace(P K P Q) / (L - 1)^2` with `K = gram(x, x)` and `Q = gram(y, y)`.
pub fn hsic(x: &[f64], y: &[f64], kx: &KernelSpec, ky: &KernelSpec) -> Result<MeasureResult> {
    check_lengths(x, y)?;
    let len = x.len();
    let k = gram(x, x, kx)?;
    let q = gram(y, y, ky)?;
    let raw = centered_inner(&k, &q) / ((len - 1) as f64).powi(2);
    Ok(MeasureResult {
        value: raw.max(0.0),
        raw,
        measure: MeasureKind::Hsic,
        len,
        alpha: None,
        pairs: len * (len - 1) / 2,
        mode: SelectionMode::Complete,
        bandwidth_x: kx.bandwidth(),
        bandwidth_y: ky.bandwidth(),
    })
}

/// Symmetric `K x K` matrix of 4-tuple kernel combinations.
#[derive(Debug, Clone, PartialEq)]
pub struct BreveGram {
    size: usize,
    entries: Vec<f64>,
}

impl BreveGram {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, k: usize, k2: usize) -> f64 {
        self.entries[k * self.size + k2]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }
}

/// Kernel values among the distinct sample indices a selection touches,
/// with each pair re-expressed in that compact index space.
struct PairGram {
    gram: GramMatrix,
    first: Vec<usize>,
    second: Vec<usize>,
}

impl PairGram {
    fn new(samples: &[f64], sel: &PairSelection, spec: &KernelSpec) -> Result<Self> {
        sel.check_samples(samples.len())?;
        let mut slot = vec![usize::MAX; samples.len()];
        let mut used = Vec::new();
        let mut compact = |i: usize| {
            if slot[i] == usize::MAX {
                slot[i] = used.len();
                used.push(samples[i]);
            }
            slot[i]
        };
        let (first, second): (Vec<usize>, Vec<usize>) =
            sel.pairs().map(|(a, b)| (compact(a), compact(b))).unzip();
        let gram = gram(&used, &used, spec)?;
        Ok(PairGram {
            gram,
            first,
            second,
        })
    }

    /// `K11 + K22 - K12 - K12^T` at `(k, k2)`. Grouped so that swapping
    /// `k` and `k2` gives the identical float.
    #[inline]
    fn entry(&self, k: usize, k2: usize) -> f64 {
        let (a, b) = (self.first[k], self.second[k]);
        let (c, d) = (self.first[k2], self.second[k2]);
        let g = &self.gram;
        (g.get(a, c) + g.get(b, d)) - (g.get(a, d) + g.get(b, c))
    }
}

/// Materializes the breve Gram matrix of `samples` under `sel`.
pub fn breve_gram(samples: &[f64], sel: &PairSelection, spec: &KernelSpec) -> Result<BreveGram> {
    let pg = PairGram::new(samples, sel, spec)?;
    let size = sel.len();
    let rows = par::map_range(size, |k| (0..size).map(|k2| pg.entry(k, k2)).collect::<Vec<_>>());
    Ok(BreveGram {
        size,
        entries: rows.concat(),
    })
}

/// `trace(Kb Qb) / (4 K^2)` for the breve Gram matrices of `x` and `y` under
/// `sel`. Both matrices are symmetric, so the trace is an entrywise sum over
/// the upper triangle; neither matrix is stored.
pub fn chsic(
    x: &[f64],
    y: &[f64],
    sel: &PairSelection,
    kx: &KernelSpec,
    ky: &KernelSpec,
) -> Result<MeasureResult> {
    check_lengths(x, y)?;
    let px = PairGram::new(x, sel, kx)?;
    let py = PairGram::new(y, sel, ky)?;
    let size = sel.len();
    let trace = par::ordered_sum(size, |k| {
        let diag = px.entry(k, k) * py.entry(k, k);
        let off: f64 = (k + 1..size).map(|k2| px.entry(k, k2) * py.entry(k, k2)).sum();
        diag + 2.0 * off
    });
    Ok(chsic_result(trace, x.len(), sel, kx, ky))
}

fn chsic_result(trace: f64, len: usize, sel: &PairSelection, kx: &KernelSpec, ky: &KernelSpec) -> MeasureResult {
    let k = sel.len() as f64;
    let raw = trace / (4.0 * k * k);
    MeasureResult {
        value: raw.max(0.0),
        raw,
        measure: MeasureKind::Chsic,
        len,
        alpha: sel.alpha(),
        pairs: sel.len(),
        mode: sel.mode(),
        bandwidth_x: kx.bandwidth(),
        bandwidth_y: ky.bandwidth(),
    }
}

/// Literal double loop over `(k, k2)` with eight kernel evaluations per
/// term. Reference for [`chsic`]; quadratic in `K` with a large constant.
pub fn chsic_naive(
    x: &[f64],
    y: &[f64],
    sel: &PairSelection,
    kx: &KernelSpec,
    ky: &KernelSpec,
) -> Result<MeasureResult> {
    check_lengths(x, y)?;
    sel.check_samples(x.len())?;
    if let Some(bad) = x.iter().chain(y).find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite sample {bad}")));
    }
    let f1 = sel.first();
    let f2 = sel.second();
    let mut trace = 0.0;
    for k in 0..sel.len() {
        for k2 in 0..sel.len() {
            let kb = kx.eval(x[f1[k]] - x[f1[k2]]) + kx.eval(x[f2[k]] - x[f2[k2]])
                - kx.eval(x[f1[k]] - x[f2[k2]])
                - kx.eval(x[f2[k]] - x[f1[k2]]);
            let qb = ky.eval(y[f1[k]] - y[f1[k2]]) + ky.eval(y[f2[k]] - y[f2[k2]])
                - ky.eval(y[f1[k]] - y[f2[k2]])
                - ky.eval(y[f2[k]] - y[f1[k2]]);
            trace += kb * qb;
        }
    }
    Ok(chsic_result(trace, x.len(), sel, kx, ky))
}
