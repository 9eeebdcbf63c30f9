//! Evaluation metrics for embeddings and distances between barcodes.

mod matching;
mod topoae;

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RtdError};
use crate::geometry::{pairwise_distances, PointCloud};
use crate::persistence::{rips_barcode, Barcode};
use crate::rcross::{check_pair, rtd};

pub use matching::{assignment_cost, bottleneck, wasserstein, Point};
pub use topoae::{minimum_spanning_tree, topoae_loss, topoae_terms, TopoAeTerm};

/// Default number of sampled triplets.
pub const DEFAULT_TRIPLETS: usize = 10_000;

fn check_min_len(x: &PointCloud, z: &PointCloud, min: usize) -> Result<()> {
    check_pair(x, z)?;
    if x.len() < min {
        return Err(RtdError::Input(format!("need at least {min} points, got {}", x.len())));
    }
    Ok(())
}

/// Pearson correlation between the upper-triangular pairwise distances of
/// the two clouds.
pub fn linear_correlation(x: &PointCloud, z: &PointCloud) -> Result<f64> {
    check_min_len(x, z, 3)?;
    let wx = pairwise_distances(x);
    let wz = pairwise_distances(z);
    let a: Vec<f64> = wx.upper_triangle().map(|(_, _, v)| v).collect();
    let b: Vec<f64> = wz.upper_triangle().map(|(_, _, v)| v).collect();
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0f64, 0.0f64, 0.0f64);
    for (p, q) in a.iter().zip(&b) {
        let (da, db) = (p - ma, q - mb);
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    // rounding noise around a constant set is not variance
    let flat = |ss: f64, m: f64| ss <= n * (1e-12 * m.abs()).powi(2);
    if flat(saa, ma) || flat(sbb, mb) {
        return Err(RtdError::Undefined(
            "correlation of a constant distance set".into(),
        ));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Fraction of random triplets `(i, j, k)` on which both clouds agree about
/// whether `j` or `k` is closer to `i`.
pub fn triplet_accuracy(x: &PointCloud, z: &PointCloud, num_triplets: usize, seed: u64) -> Result<f64> {
    check_min_len(x, z, 3)?;
    if num_triplets == 0 {
        return Err(RtdError::Input("num_triplets must be positive".into()));
    }
    let wx = pairwise_distances(x);
    let wz = pairwise_distances(z);
    let n = x.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agree = 0usize;
    for _ in 0..num_triplets {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let (lo, hi) = (i.min(j), i.max(j));
        let mut k = rng.random_range(0..n - 2);
        if k >= lo {
            k += 1;
        }
        if k >= hi {
            k += 1;
        }
        let sx = wx.get(i, j).partial_cmp(&wx.get(i, k));
        let sz = wz.get(i, j).partial_cmp(&wz.get(i, k));
        if sx == sz {
            agree += 1;
        }
    }
    Ok(agree as f64 / num_triplets as f64)
}

/// Vietoris-Rips barcode of a cloud in the given degrees.
pub fn cloud_barcode(x: &PointCloud, dims: &BTreeSet<usize>) -> Result<Barcode> {
    rips_barcode(&pairwise_distances(x), dims, f64::INFINITY)
}

/// Finite bars of degree `dim` as diagram points.
pub fn finite_diagram(barcode: &Barcode, dim: usize) -> Vec<Point> {
    barcode
        .of_dim(dim)
        .filter(|b| b.is_finite())
        .map(|b| (b.birth, b.death))
        .collect()
}

/// 1-Wasserstein distance between the finite degree-0 diagrams of two clouds.
/// The clouds may have different sizes.
pub fn wasserstein_h0(x: &PointCloud, z: &PointCloud) -> Result<f64> {
    wasserstein_dim(x, z, 0)
}

/// As [`wasserstein_h0`] for degree-1 diagrams.
pub fn wasserstein_h1(x: &PointCloud, z: &PointCloud) -> Result<f64> {
    wasserstein_dim(x, z, 1)
}

fn wasserstein_dim(x: &PointCloud, z: &PointCloud, dim: usize) -> Result<f64> {
    let dims = BTreeSet::from([dim]);
    let a = finite_diagram(&cloud_barcode(x, &dims)?, dim);
    let b = finite_diagram(&cloud_barcode(z, &dims)?, dim);
    Ok(wasserstein(&a, &b))
}

/// Bottleneck distance between two barcodes: the largest per-degree
/// bottleneck distance between their finite bars. Infinite bars are ignored.
pub fn bottleneck_distance(a: &Barcode, b: &Barcode) -> f64 {
    let dims: BTreeSet<usize> = a.bars.iter().chain(&b.bars).map(|bar| bar.dim).collect();
    dims.into_iter()
        .map(|d| bottleneck(&finite_diagram(a, d), &finite_diagram(b, d)))
        .fold(0.0, f64::max)
}

/// Metric values, either for one evaluation or as standard deviations over
/// resamples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricValues {
    pub linear_correlation: f64,
    pub triplet_accuracy: f64,
    pub wd_h0: f64,
    pub wd_h1: Option<f64>,
    pub rtd_metric: f64,
}

/// Result of [`evaluate`]. With resampling the values are means and
/// `uncertainty` holds the sample standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub linear_correlation: f64,
    pub triplet_accuracy: f64,
    pub wd_h0: f64,
    pub wd_h1: Option<f64>,
    pub rtd_metric: f64,
    pub uncertainty: Option<MetricValues>,
    pub resamples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalOptions {
    pub num_triplets: usize,
    pub seed: u64,
    pub include_h1: bool,
    /// Evaluate on random subsets of this size instead of the full clouds.
    pub sample_size: Option<usize>,
    /// Number of subsets drawn when `sample_size` is set.
    pub resamples: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            num_triplets: DEFAULT_TRIPLETS,
            seed: 0,
            include_h1: false,
            sample_size: None,
            resamples: 5,
        }
    }
}

fn evaluate_once(x: &PointCloud, z: &PointCloud, opts: &EvalOptions, seed: u64) -> Result<MetricValues> {
    Ok(MetricValues {
        linear_correlation: linear_correlation(x, z)?,
        triplet_accuracy: triplet_accuracy(x, z, opts.num_triplets, seed)?,
        wd_h0: wasserstein_h0(x, z)?,
        wd_h1: opts.include_h1.then(|| wasserstein_h1(x, z)).transpose()?,
        rtd_metric: rtd(x, z)?,
    })
}

/// Runs the whole metric suite on an original cloud `x` and its embedding `z`.
pub fn evaluate(x: &PointCloud, z: &PointCloud, opts: &EvalOptions) -> Result<EvalReport> {
    check_min_len(x, z, 3)?;
    let n = x.len();
    let runs: Vec<MetricValues> = match opts.sample_size {
        Some(m) if m < n => {
            if m < 3 || opts.resamples == 0 {
                return Err(RtdError::Input(
                    "resampling needs sample_size >= 3 and resamples >= 1".into(),
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            (0..opts.resamples)
                .map(|r| {
                    let mut idx = sample(&mut rng, n, m).into_vec();
                    idx.sort_unstable();
                    evaluate_once(&x.select(&idx), &z.select(&idx), opts, opts.seed.wrapping_add(r as u64))
                })
                .collect::<Result<_>>()?
        }
        _ => vec![evaluate_once(x, z, opts, opts.seed)?],
    };
    let mean = |f: &dyn Fn(&MetricValues) -> f64| runs.iter().map(f).sum::<f64>() / runs.len() as f64;
    let sd = |f: &dyn Fn(&MetricValues) -> f64| {
        let mu = mean(f);
        let k = runs.len() as f64;
        (runs.iter().map(|r| (f(r) - mu).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    };
    let h1 = |r: &MetricValues| r.wd_h1.unwrap_or(0.0);
    let uncertainty = (runs.len() > 1).then(|| MetricValues {
        linear_correlation: sd(&|r| r.linear_correlation),
        triplet_accuracy: sd(&|r| r.triplet_accuracy),
        wd_h0: sd(&|r| r.wd_h0),
        wd_h1: opts.include_h1.then(|| sd(&h1)),
        rtd_metric: sd(&|r| r.rtd_metric),
    });
    Ok(EvalReport {
        linear_correlation: mean(&|r| r.linear_correlation),
        triplet_accuracy: mean(&|r| r.triplet_accuracy),
        wd_h0: mean(&|r| r.wd_h0),
        wd_h1: opts.include_h1.then(|| mean(&h1)),
        rtd_metric: mean(&|r| r.rtd_metric),
        uncertainty,
        resamples: runs.len(),
    })
}
