//! Finite-dimensional steering-vector feature map.
//!
//! Each scalar sample `x` maps to `d(x) in C^M` with
//! `d_m(x) = M^(-1/4) G(m / sqrt(M)) exp(i 2 pi (m / sqrt(M)) x)` for
//! `m in {-M/2, .., M/2 - 1}`. The inner product `d(x)^H d(x')` is a Riemann
//! sum of `G^2(f) exp(-i 2 pi (x - x') f)`, so it tends to the Fourier
//! transform of `G^2` as `M` grows. With
//! `G^2(f) = sqrt(pi) b exp(-(pi b f)^2)` that limit is the Gaussian kernel
//! `exp(-((x - x') / b)^2)` of bandwidth `b`.
//!
//! Sample covariances of mapped data therefore converge to the kernel
//! measures in [`crate::measures`]. This module exists to check that limit;
//! it is far slower than the kernel path.
//!
//! Covariance matrices are `M x M` but have rank at most `n` (the number of
//! columns), so [`CovMatrix`] keeps them in factored form and materializes
//! rows on demand.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pairs::PairSelection;
use crate::par;

/// Feature dimension and Gaussian window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeringConfig {
    dim: usize,
    bandwidth: f64,
}

impl SteeringConfig {
    /// `dim` is `M` (even, >= 2); `bandwidth` is the bandwidth of the
    /// Gaussian kernel the map converges to.
    pub fn new(dim: usize, bandwidth: f64) -> Result<Self> {
        if dim < 2 || !dim.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "feature dimension must be even and >= 2, got {dim}"
            )));
        }
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::InvalidInput(format!(
                "window bandwidth must be positive and finite, got {bandwidth}"
            )));
        }
        Ok(SteeringConfig { dim, bandwidth })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// `G^2(f)`; integrates to one over the real line.
    pub fn window_sq(&self, f: f64) -> f64 {
        let b = self.bandwidth;
        PI.sqrt() * b * (-(PI * b * f).powi(2)).exp()
    }

    pub fn window(&self, f: f64) -> f64 {
        self.window_sq(f).sqrt()
    }

    /// Sample frequency of element `index` (0-based), `m / sqrt(M)`.
    fn frequency(&self, index: usize) -> f64 {
        let m = index as f64 - (self.dim / 2) as f64;
        m / (self.dim as f64).sqrt()
    }

    /// Discrete counterpart of the unit L2-norm of `G`:
    /// `sum_m M^(-1/2) G^2(m / sqrt(M))`.
    pub fn discrete_norm(&self) -> f64 {
        let scale = 1.0 / (self.dim as f64).sqrt();
        (0..self.dim)
            .map(|i| scale * self.window_sq(self.frequency(i)))
            .sum()
    }

    fn amplitudes(&self) -> Vec<f64> {
        let scale = (self.dim as f64).powf(-0.25);
        (0..self.dim)
            .map(|i| scale * self.window(self.frequency(i)))
            .collect()
    }
}

fn steer_with(x: f64, cfg: &SteeringConfig, amplitudes: &[f64]) -> Vec<Complex64> {
    amplitudes
        .iter()
        .enumerate()
        .map(|(i, &a)| Complex64::from_polar(a, 2.0 * PI * cfg.frequency(i) * x))
        .collect()
}

/// Maps one sample to its steering vector.
pub fn steer(x: f64, cfg: &SteeringConfig) -> Result<Vec<Complex64>> {
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite sample {x}")));
    }
    Ok(steer_with(x, cfg, &cfg.amplitudes()))
}

/// `Re(d(x)^H d(x2))`, the finite-`M` approximation of `kappa(x - x2)`.
pub fn finite_m_kernel(x: f64, x2: f64, cfg: &SteeringConfig) -> Result<f64> {
    let a = steer(x, cfg)?;
    let b = steer(x2, cfg)?;
    Ok(a.iter().zip(&b).map(|(p, q)| p.conj() * q).sum::<Complex64>().re)
}

/// `M x n` matrix whose columns are mapped samples.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    dim: usize,
    cols: usize,
    // column-major: column l occupies [l * dim, (l + 1) * dim)
    entries: Vec<Complex64>,
}

impl FeatureMatrix {
    pub fn from_samples(samples: &[f64], cfg: &SteeringConfig) -> Result<Self> {
        if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite sample {bad}")));
        }
        let amplitudes = cfg.amplitudes();
        let columns = par::map_range(samples.len(), |l| steer_with(samples[l], cfg, &amplitudes));
        Ok(FeatureMatrix {
            dim: cfg.dim,
            cols: samples.len(),
            entries: columns.concat(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, l: usize) -> &[Complex64] {
        &self.entries[l * self.dim..(l + 1) * self.dim]
    }

    pub fn get(&self, m: usize, l: usize) -> Complex64 {
        self.entries[l * self.dim + m]
    }
}

#[derive(Debug, Clone, PartialEq)]
enum CovRepr {
    Dense(Vec<Complex64>),
    /// `scale * left * right^H`; both factors stored row-major as
    /// `dim x rank`.
    Factored {
        rank: usize,
        left: Vec<Complex64>,
        right: Vec<Complex64>,
        scale: f64,
    },
}

/// Square complex covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    dim: usize,
    repr: CovRepr,
}

impl CovMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_dense(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Shape(format!(
                "{} entries for a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        Ok(CovMatrix {
            dim,
            repr: CovRepr::Dense(entries),
        })
    }

    /// `scale * sum_k a_k b_k^H` over column pairs of two `dim x rank`
    /// factors, supplied column by column.
    fn from_columns(dim: usize, left_cols: &[Vec<Complex64>], right_cols: &[Vec<Complex64>], scale: f64) -> Self {
        let rank = left_cols.len();
        let transpose = |cols: &[Vec<Complex64>]| {
            let mut out = Vec::with_capacity(dim * rank);
            for m in 0..dim {
                out.extend(cols.iter().map(|c| c[m]));
            }
            out
        };
        CovMatrix {
            dim,
            repr: CovRepr::Factored {
                rank,
                left: transpose(left_cols),
                right: transpose(right_cols),
                scale,
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, a: usize, b: usize) -> Complex64 {
        match &self.repr {
            CovRepr::Dense(e) => e[a * self.dim + b],
            CovRepr::Factored {
                rank,
                left,
                right,
                scale,
            } => {
                let l = &left[a * rank..(a + 1) * rank];
                let r = &right[b * rank..(b + 1) * rank];
                l.iter().zip(r).map(|(p, q)| p * q.conj()).sum::<Complex64>() * *scale
            }
        }
    }

    pub fn row(&self, a: usize) -> Vec<Complex64> {
        match &self.repr {
            CovRepr::Dense(e) => e[a * self.dim..(a + 1) * self.dim].to_vec(),
            CovRepr::Factored { .. } => (0..self.dim).map(|b| self.entry(a, b)).collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<Complex64> {
        (0..self.dim).flat_map(|a| self.row(a)).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CovMatrix {
        let repr = match &self.repr {
            CovRepr::Dense(e) => {
                let n = self.dim;
                CovRepr::Dense(
                    (0..n * n)
                        .map(|idx| e[(idx % n) * n + idx / n].conj())
                        .collect(),
                )
            }
            CovRepr::Factored {
                rank,
                left,
                right,
                scale,
            } => CovRepr::Factored {
                rank: *rank,
                left: right.clone(),
                right: left.clone(),
                scale: *scale,
            },
        };
        CovMatrix {
            dim: self.dim,
            repr,
        }
    }
}

fn check_pair(u: &FeatureMatrix, v: &FeatureMatrix) -> Result<()> {
    if u.dim != v.dim || u.cols != v.cols {
        return Err(Error::Shape(format!(
            "feature matrices {}x{} and {}x{} differ",
            u.dim, u.cols, v.dim, v.cols
        )));
    }
    Ok(())
}

fn centered_columns(u: &FeatureMatrix) -> Vec<Vec<Complex64>> {
    let n = u.cols as f64;
    let mean: Vec<Complex64> = (0..u.dim)
        .map(|m| (0..u.cols).map(|l| u.get(m, l)).sum::<Complex64>() / n)
        .collect();
    (0..u.cols)
        .map(|l| u.column(l).iter().zip(&mean).map(|(x, mu)| x - mu).collect())
        .collect()
}

/// `(1/(n-1)) sum_l (u_l - u_mean)(v_l - v_mean)^H`.
pub fn sample_cov(u: &FeatureMatrix, v: &FeatureMatrix) -> Result<CovMatrix> {
    check_pair(u, v)?;
    if u.cols < 2 {
        return Err(Error::InsufficientData(format!(
            "sample covariance needs at least 2 columns, got {}",
            u.cols
        )));
    }
    Ok(CovMatrix::from_columns(
        u.dim,
        &centered_columns(u),
        &centered_columns(v),
        1.0 / (u.cols - 1) as f64,
    ))
}

/// `(1/K) sum_k u_k v_k^H` over the virtual samples
/// `u_k = (u_{f1(k)} - u_{f2(k)}) / sqrt(2)`. No centering.
pub fn incomplete_cov(u: &FeatureMatrix, v: &FeatureMatrix, sel: &PairSelection) -> Result<CovMatrix> {
    check_pair(u, v)?;
    if sel.is_empty() {
        return Err(Error::InsufficientData("empty pair selection".into()));
    }
    sel.check_samples(u.cols)?;
    let diffs = |w: &FeatureMatrix| -> Vec<Vec<Complex64>> {
        sel.pairs()
            .map(|(a, b)| {
                w.column(a)
                    .iter()
                    .zip(w.column(b))
                    .map(|(p, q)| (p - q) * std::f64::consts::FRAC_1_SQRT_2)
                    .collect()
            })
            .collect()
    };
    Ok(CovMatrix::from_columns(
        u.dim,
        &diffs(u),
        &diffs(v),
        1.0 / sel.len() as f64,
    ))
}

/// Squared Frobenius norm, accumulated row by row.
pub fn cov_frobenius_sq(c: &CovMatrix) -> f64 {
    par::ordered_sum(c.dim, |a| c.row(a).iter().map(|z| z.norm_sqr()).sum())
}

/// `||a - b||_F^2`.
pub fn cov_distance_sq(a: &CovMatrix, b: &CovMatrix) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::Shape(format!("{} vs {}", a.dim, b.dim)));
    }
    Ok(par::ordered_sum(a.dim, |i| {
        a.row(i)
            .iter()
            .zip(b.row(i))
            .map(|(p, q)| (p - q).norm_sqr())
            .sum()
    }))
}
