//! Sample-index pairs for the incomplete U-statistic.
//!
//! A [`PairSelection`] lists `K` distinct unordered pairs `(f1[k], f2[k])`
//! drawn from `L` samples. Conditioning on a confounder `z` keeps the `K`
//! pairs with the smallest `|z(l) - z(l')|`; the random baseline keeps `K`
//! pairs drawn uniformly; the complete selection keeps all `L(L-1)/2`.

use std::collections::HashSet;

use rand::seq::index;

use crate::error::{Error, Result};
use crate::par;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SelectionMode {
    Confounder,
    Random,
    Complete,
}

impl SelectionMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SelectionMode::Confounder => "confounder",
            SelectionMode::Random => "random",
            SelectionMode::Complete => "complete",
        }
    }
}

impl std::fmt::Display for SelectionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Number of unordered pairs among `len` samples.
pub fn max_pairs(len: usize) -> usize {
    len * len.saturating_sub(1) / 2
}

/// `K = floor(L * alpha / 2)`, clamped to `[1, K_max]`.
pub fn pair_budget(len: usize, alpha: f64) -> Result<usize> {
    if len < 2 {
        return Err(Error::InsufficientData(format!(
            "pairs need at least 2 samples, got {len}"
        )));
    }
    let max_alpha = (len - 1) as f64;
    if !(alpha.is_finite() && (1.0..=max_alpha).contains(&alpha)) {
        return Err(Error::InvalidAlpha {
            alpha,
            max: max_alpha,
        });
    }
    let k = (len as f64 * alpha / 2.0).floor() as usize;
    Ok(k.clamp(1, max_pairs(len)))
}

/// Lexicographic rank of the pair `(i, j)`, `i < j`, among all pairs of
/// `len` samples.
fn pair_rank(len: usize, i: usize, j: usize) -> usize {
    i * len - i * (i + 1) / 2 + (j - i - 1)
}

/// Inverse of [`pair_rank`]; `offsets[i]` is the rank of `(i, i + 1)`.
fn pair_from_rank(offsets: &[usize], len: usize, rank: usize) -> (usize, usize) {
    let i = offsets.partition_point(|&o| o <= rank) - 1;
    let j = rank - offsets[i] + i + 1;
    debug_assert!(j < len);
    (i, j)
}

/// The pruned list of pairs entering an incomplete U-statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSelection {
    first: Vec<usize>,
    second: Vec<usize>,
    len: usize,
    alpha: Option<f64>,
    mode: SelectionMode,
}

impl PairSelection {
    /// Validated selection from explicit pairs. Pairs are normalized so that
    /// the smaller index comes first.
    pub fn new(len: usize, pairs: &[(usize, usize)], mode: SelectionMode) -> Result<Self> {
        let max = max_pairs(len);
        if pairs.is_empty() || pairs.len() > max {
            return Err(Error::InvalidBudget {
                budget: pairs.len(),
                max,
            });
        }
        let mut seen = HashSet::with_capacity(pairs.len());
        let mut first = Vec::with_capacity(pairs.len());
        let mut second = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            if a >= len || b >= len {
                return Err(Error::Shape(format!(
                    "pair ({a}, {b}) out of range for {len} samples"
                )));
            }
            if a == b {
                return Err(Error::InvalidInput(format!("degenerate pair ({a}, {a})")));
            }
            let (lo, hi) = (a.min(b), a.max(b));
            if !seen.insert((lo, hi)) {
                return Err(Error::InvalidInput(format!("duplicate pair ({lo}, {hi})")));
            }
            first.push(lo);
            second.push(hi);
        }
        Ok(PairSelection {
            first,
            second,
            len,
            alpha: None,
            mode,
        })
    }

    /// Every unordered pair, in lexicographic order.
    pub fn complete(len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::InsufficientData(format!(
                "pairs need at least 2 samples, got {len}"
            )));
        }
        let mut first = Vec::with_capacity(max_pairs(len));
        let mut second = Vec::with_capacity(max_pairs(len));
        for i in 0..len {
            for j in i + 1..len {
                first.push(i);
                second.push(j);
            }
        }
        Ok(PairSelection {
            first,
            second,
            len,
            alpha: Some((len - 1) as f64),
            mode: SelectionMode::Complete,
        })
    }

    /// Confounder-driven selection with `K = pair_budget(L, alpha)`.
    pub fn by_confounder(z: &[f64], alpha: f64) -> Result<Self> {
        let k = pair_budget(z.len(), alpha)?;
        let order = confounder_order(z)?;
        Ok(select_confounder(&order, k)?.with_alpha(alpha))
    }

    /// Random baseline with `K = pair_budget(L, alpha)`.
    pub fn by_random(len: usize, alpha: f64, seed: u64) -> Result<Self> {
        let k = pair_budget(len, alpha)?;
        Ok(select_random(len, k, seed)?.with_alpha(alpha))
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    /// Number of pairs `K`.
    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    /// Number of samples `L` the indices refer to.
    pub fn sample_len(&self) -> usize {
        self.len
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn mode(&self) -> SelectionMode {
        self.mode
    }

    pub fn first(&self) -> &[usize] {
        &self.first
    }

    pub fn second(&self) -> &[usize] {
        &self.second
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.first.iter().copied().zip(self.second.iter().copied())
    }

    /// Checks the indices against a sample array of length `len`.
    pub fn check_samples(&self, len: usize) -> Result<()> {
        if len != self.len {
            return Err(Error::Shape(format!(
                "selection built for {} samples applied to {len}",
                self.len
            )));
        }
        Ok(())
    }
}

/// All unordered pairs sorted by their confounder gap `|z(l) - z(l')|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfounderOrder {
    len: usize,
    pairs: Vec<(usize, usize)>,
    gaps: Vec<f64>,
}

impl ConfounderOrder {
    pub fn sample_len(&self) -> usize {
        self.len
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }
}

/// Sorts all pairs by `|z(l) - z(l')|` ascending. Equal gaps fall back to
/// lexicographic `(min, max)` index order, so the order is total.
pub fn confounder_order(z: &[f64]) -> Result<ConfounderOrder> {
    let len = z.len();
    if len < 2 {
        return Err(Error::InsufficientData(format!(
            "pairs need at least 2 samples, got {len}"
        )));
    }
    if let Some(bad) = z.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite confounder sample {bad}")));
    }
    let mut keyed: Vec<(f64, u32, u32)> = Vec::with_capacity(max_pairs(len));
    for i in 0..len {
        for j in i + 1..len {
            keyed.push(((z[i] - z[j]).abs(), i as u32, j as u32));
        }
    }
    par::sort_by(&mut keyed, |a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let gaps = keyed.iter().map(|k| k.0).collect();
    let pairs = keyed
        .into_iter()
        .map(|(_, i, j)| (i as usize, j as usize))
        .collect();
    Ok(ConfounderOrder { len, pairs, gaps })
}

/// The first `k` pairs of `order`.
pub fn select_confounder(order: &ConfounderOrder, k: usize) -> Result<PairSelection> {
    let max = order.pairs.len();
    if k == 0 || k > max {
        return Err(Error::InvalidBudget { budget: k, max });
    }
    let (first, second) = order.pairs[..k].iter().copied().unzip();
    Ok(PairSelection {
        first,
        second,
        len: order.len,
        alpha: None,
        mode: if k == max {
            SelectionMode::Complete
        } else {
            SelectionMode::Confounder
        },
    })
}

/// `k` distinct pairs drawn uniformly without replacement. Deterministic in
/// `(len, k, seed)`; pairs are returned in lexicographic order.
pub fn select_random(len: usize, k: usize, seed: u64) -> Result<PairSelection> {
    let max = max_pairs(len);
    if k == 0 || k > max {
        return Err(Error::InvalidBudget { budget: k, max });
    }
    let offsets: Vec<usize> = (0..len - 1).map(|i| pair_rank(len, i, i + 1)).collect();
    let mut rng = seed::rng(seed);
    let mut ranks = index::sample(&mut rng, max, k).into_vec();
    ranks.sort_unstable();
    let (first, second) = ranks
        .into_iter()
        .map(|r| pair_from_rank(&offsets, len, r))
        .unzip();
    Ok(PairSelection {
        first,
        second,
        len,
        alpha: None,
        mode: SelectionMode::Random,
    })
}
