//! Translation-invariant kernels, the bandwidth rule and Gram matrices.

use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    /// `kappa(s) = exp(-(s / bandwidth)^2)`
    Gaussian,
}

/// A kernel family together with its bandwidth, in data units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    bandwidth: f64,
}

impl KernelSpec {
    pub fn gaussian(bandwidth: f64) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::InvalidInput(format!(
                "kernel bandwidth must be positive and finite, got {bandwidth}"
            )));
        }
        Ok(KernelSpec {
            family: KernelFamily::Gaussian,
            bandwidth,
        })
    }

    /// Gaussian kernel with the bandwidth rule applied to all of `samples`,
    /// using `samples.len()` as the sample count in the power law.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        KernelSpec::gaussian(bandwidth(samples, samples.len())?)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Kernel value without the finiteness check of [`kappa`].
    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        match self.family {
            KernelFamily::Gaussian => {
                let r = s / self.bandwidth;
                (-(r * r)).exp()
            }
        }
    }
}

/// Sample standard deviation with the `1/(n-1)` normalization.
pub fn sample_std(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "standard deviation needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite sample {bad}")));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let ss: f64 = samples.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok((ss / (n - 1.0)).sqrt())
}

/// `sigma_hat * rule_len^(-1/5)`, the kernel-density power-law bandwidth.
pub fn bandwidth(samples: &[f64], rule_len: usize) -> Result<f64> {
    if rule_len < 2 {
        return Err(Error::InvalidInput(format!(
            "bandwidth rule needs a sample count >= 2, got {rule_len}"
        )));
    }
    let sd = sample_std(samples)?;
    if sd == 0.0 {
        return Err(Error::DegenerateData(
            "zero sample variance, bandwidth would be 0".into(),
        ));
    }
    Ok(sd * (rule_len as f64).powf(-0.2))
}

pub fn kappa(s: f64, spec: &KernelSpec) -> Result<f64> {
    if !s.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite kernel argument {s}")));
    }
    Ok(spec.eval(s))
}

/// Dense row-major matrix of kernel evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl GramMatrix {
    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn transpose(&self) -> GramMatrix {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            entries.extend((0..self.rows).map(|i| self.get(i, j)));
        }
        GramMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }
}

/// Entry `(i, j)` is `kappa(rows[i] - cols[j])`.
pub fn gram(rows: &[f64], cols: &[f64], spec: &KernelSpec) -> Result<GramMatrix> {
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::InsufficientData("Gram matrix of an empty array".into()));
    }
    if let Some(bad) = rows.iter().chain(cols).find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite sample {bad}")));
    }
    let blocks = par::map_range(rows.len(), |i| {
        let r = rows[i];
        cols.iter().map(|&c| spec.eval(r - c)).collect::<Vec<_>>()
    });
    Ok(GramMatrix {
        rows: rows.len(),
        cols: cols.len(),
        entries: blocks.concat(),
    })
}
