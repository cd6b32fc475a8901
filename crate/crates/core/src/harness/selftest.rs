//! Built-in numerical checks: finite-dimensional feature-map convergence and
//! the complete-selection identities.

use std::fmt;

use crate::error::Result;
use crate::feature_map::{
    cov_distance_sq, cov_frobenius_sq, finite_m_kernel, incomplete_cov, sample_cov, FeatureMatrix,
    SteeringConfig,
};
use crate::kernels::KernelSpec;
use crate::measures::{chsic, hsic};
use crate::pairs::PairSelection;
use crate::synth::{generate, Model, ModelConfig};

/// Window bandwidth for the kernel-limit check. Narrow enough that the
/// truncated frequency grid at `M = 256` still shows a visible error.
pub const LIMIT_BANDWIDTH: f64 = 0.1;
pub const LIMIT_DIMS: [usize; 3] = [256, 1024, 4096];

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            threshold,
            passed: measured <= threshold,
            detail: String::new(),
        }
    }

    fn with_detail(mut self, detail: String) -> Self {
        self.detail = detail;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SelfTestReport {
    pub checks: Vec<Check>,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for SelfTestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(
                f,
                "[{}] {:<48} measured {:.3e} (limit {:.1e})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.threshold
            )?;
            if c.detail.is_empty() {
                writeln!(f)?;
            } else {
                writeln!(f, "  [{}]", c.detail)?;
            }
        }
        Ok(())
    }
}

/// Max of `|finite_m_kernel - kappa|` over 61 differences in
/// `[-3b, 3b]` for window bandwidth `b`.
pub fn kernel_limit_error(dim: usize, bandwidth: f64) -> Result<f64> {
    let cfg = SteeringConfig::new(dim, bandwidth)?;
    let spec = KernelSpec::gaussian(bandwidth)?;
    let mut worst: f64 = 0.0;
    for i in 0..=60 {
        let s = bandwidth * (-3.0 + 0.1 * i as f64);
        worst = worst.max((finite_m_kernel(s, 0.0, &cfg)? - spec.eval(s)).abs());
    }
    Ok(worst)
}

fn dataset(len: usize, seed: u64) -> Result<crate::synth::Dataset> {
    generate(
        &ModelConfig {
            model: Model::MPlus,
            gamma_db: 0.0,
            len,
        },
        seed,
    )
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Relative gap between the finite-`M` squared Frobenius norms and the
/// kernel measures on one `L = 30` dataset: `(hsic gap, chsic gap)` for a
/// 60-pair confounder selection.
pub fn finite_m_agreement(dim: usize, seed: u64) -> Result<(f64, f64)> {
    let d = dataset(30, seed)?;
    let kx = KernelSpec::from_samples(&d.x)?;
    let ky = KernelSpec::from_samples(&d.y)?;
    let u = FeatureMatrix::from_samples(&d.x, &SteeringConfig::new(dim, kx.bandwidth())?)?;
    let v = FeatureMatrix::from_samples(&d.y, &SteeringConfig::new(dim, ky.bandwidth())?)?;

    let h = hsic(&d.x, &d.y, &kx, &ky)?.raw;
    let fh = cov_frobenius_sq(&sample_cov(&u, &v)?);

    let sel = PairSelection::by_confounder(&d.z, 4.0)?;
    debug_assert_eq!(sel.len(), 60);
    let c = chsic(&d.x, &d.y, &sel, &kx, &ky)?.raw;
    let fc = cov_frobenius_sq(&incomplete_cov(&u, &v, &sel)?);
    Ok((relative(fh, h), relative(fc, c)))
}

/// Worst relative gap between C-HSIC over the complete selection and HSIC.
pub fn complete_identity_residual(lengths: &[usize], per_length: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &len in lengths {
        for s in 0..per_length {
            let d = dataset(len, 1000 * len as u64 + s)?;
            let kx = KernelSpec::from_samples(&d.x)?;
            let ky = KernelSpec::from_samples(&d.y)?;
            let sel = PairSelection::by_confounder(&d.z, (len - 1) as f64)?;
            let c = chsic(&d.x, &d.y, &sel, &kx, &ky)?.raw;
            let h = hsic(&d.x, &d.y, &kx, &ky)?.raw;
            worst = worst.max(relative(c, h));
        }
    }
    Ok(worst)
}

/// Relative Frobenius gap between the all-pairs incomplete covariance and the
/// centered sample covariance.
pub fn complete_cov_residual(len: usize, dim: usize, seed: u64) -> Result<f64> {
    let d = dataset(len, seed)?;
    let cfg = SteeringConfig::new(dim, KernelSpec::from_samples(&d.x)?.bandwidth())?;
    let u = FeatureMatrix::from_samples(&d.x, &cfg)?;
    let v = FeatureMatrix::from_samples(&d.y, &cfg)?;
    let full = sample_cov(&u, &v)?;
    let pairs = incomplete_cov(&u, &v, &PairSelection::complete(len)?)?;
    Ok((cov_distance_sq(&full, &pairs)? / cov_frobenius_sq(&full)).sqrt())
}

pub fn self_test() -> Result<SelfTestReport> {
    let mut checks = Vec::new();

    let norm = SteeringConfig::new(256, LIMIT_BANDWIDTH)?.discrete_norm();
    checks.push(Check::at_most("window discrete norm |sum - 1| (M=256)", (norm - 1.0).abs(), 1e-3));

    let errors = LIMIT_DIMS
        .iter()
        .map(|&m| kernel_limit_error(m, LIMIT_BANDWIDTH))
        .collect::<Result<Vec<_>>>()?;
    let detail = LIMIT_DIMS
        .iter()
        .zip(&errors)
        .map(|(m, e)| format!("M={m}: {e:.3e}"))
        .collect::<Vec<_>>()
        .join(", ");
    checks.push(
        Check::at_most("kernel limit max error (M=4096)", errors[2], 1e-2).with_detail(detail.clone()),
    );
    let worst_increase = errors
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max);
    checks.push(Check::at_most("kernel limit error increase across M", worst_increase, 0.0).with_detail(detail));

    checks.push(Check::at_most(
        "complete pairs: chsic vs hsic relative gap",
        complete_identity_residual(&[10, 30, 50], 4)?,
        1e-10,
    ));
    checks.push(Check::at_most(
        "complete pairs: covariance relative gap (M=256)",
        complete_cov_residual(20, 256, 3)?,
        1e-10,
    ));

    let (gh, gc) = finite_m_agreement(4096, 11)?;
    checks.push(Check::at_most("finite-M |F|^2 vs hsic (M=4096, L=30)", gh, 1e-2));
    checks.push(Check::at_most("finite-M |F|^2 vs chsic (M=4096, K=60)", gc, 1e-2));

    Ok(SelfTestReport { checks })
}
