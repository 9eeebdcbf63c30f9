//! Synthetic point clouds and CSV ingestion.
//!
//! Every generator draws from a `ChaCha8Rng` seeded with the spec's seed, so a
//! spec reproduces the same cloud on every platform.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, RtdError};
use crate::geometry::PointCloud;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetName {
    Circle,
    Random,
    Clusters2,
    Clusters3,
    Spheres,
    Torus,
    File,
}

impl std::str::FromStr for DatasetName {
    type Err = RtdError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "circle" => DatasetName::Circle,
            "random" => DatasetName::Random,
            "clusters2" => DatasetName::Clusters2,
            "clusters3" => DatasetName::Clusters3,
            "spheres" => DatasetName::Spheres,
            "torus" => DatasetName::Torus,
            "file" => DatasetName::File,
            other => return Err(RtdError::Input(format!("unknown dataset `{other}`"))),
        })
    }
}

impl DatasetName {
    /// Default number of points.
    pub fn default_size(self) -> usize {
        match self {
            DatasetName::Circle => 100,
            DatasetName::Random => 500,
            DatasetName::Clusters2 => 200,
            DatasetName::Clusters3 => 300,
            DatasetName::Spheres => 17_250,
            DatasetName::Torus => 5_000,
            DatasetName::File => 0,
        }
    }

    /// Default ambient dimension.
    pub fn default_dim(self) -> usize {
        match self {
            DatasetName::Spheres => 101,
            DatasetName::Torus => 100,
            _ => 2,
        }
    }
}

/// What to generate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub name: DatasetName,
    /// Number of points; the dataset default when absent. For `file` it
    /// truncates to the first `n` rows.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Ambient dimension for `spheres` and `torus`.
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

impl DatasetSpec {
    pub fn new(name: DatasetName, seed: u64) -> Self {
        DatasetSpec {
            name,
            n: None,
            seed,
            dim: None,
            path: None,
        }
    }

    pub fn with_size(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = Some(dim);
        self
    }

    pub fn file(path: impl Into<PathBuf>) -> Self {
        DatasetSpec {
            path: Some(path.into()),
            ..DatasetSpec::new(DatasetName::File, 0)
        }
    }
}

/// Standard deviations of the dense and sparse halves of `clusters2`.
pub const CLUSTERS2_SIGMAS: (f64, f64) = (0.1, 0.5);
/// Centers of the three `clusters3` clusters; each has standard deviation
/// [`CLUSTERS3_SIGMA`].
pub const CLUSTERS3_CENTERS: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [5.0, 0.0]];
pub const CLUSTERS3_SIGMA: f64 = 0.1;
/// Number of inner spheres, their radius and the outer sphere radius.
pub const SPHERES_INNER: usize = 10;
pub const SPHERES_INNER_RADIUS: f64 = 1.0;
pub const SPHERES_OUTER_RADIUS: f64 = 5.0;
/// Torus radii before the isometric lift into the ambient space.
pub const TORUS_RADII: (f64, f64) = (2.0, 1.0);

/// Generates the cloud described by `spec`.
pub fn generate(spec: &DatasetSpec) -> Result<PointCloud> {
    if spec.name == DatasetName::File {
        let path = spec
            .path
            .as_ref()
            .ok_or_else(|| RtdError::Input("file dataset needs a path".into()))?;
        let cloud = load_csv(path)?;
        return match spec.n {
            Some(n) if n < cloud.len() => Ok(cloud.select(&(0..n).collect::<Vec<_>>())),
            _ => Ok(cloud),
        };
    }
    let n = spec.n.unwrap_or(spec.name.default_size());
    if n == 0 {
        return Err(RtdError::Input("dataset size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let rng = &mut rng;
    let points = match spec.name {
        DatasetName::Circle => circle(rng, n),
        DatasetName::Random => Array2::from_shape_fn((n, 2), |_| rng.random::<f64>()),
        DatasetName::Clusters2 => clusters2(rng, n),
        DatasetName::Clusters3 => clusters3(rng, n),
        DatasetName::Spheres => spheres(rng, n, spec.dim.unwrap_or(spec.name.default_dim()))?,
        DatasetName::Torus => torus(rng, n, spec.dim.unwrap_or(spec.name.default_dim()))?,
        DatasetName::File => unreachable!(),
    };
    PointCloud::new(points)
}

fn circle(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    let mut p = Array2::zeros((n, 2));
    for mut row in p.rows_mut() {
        let t = rng.random_range(0.0..std::f64::consts::TAU);
        row[0] = t.cos();
        row[1] = t.sin();
    }
    p
}

fn gaussian_blob(rng: &mut ChaCha8Rng, out: &mut Array2<f64>, rows: std::ops::Range<usize>, center: [f64; 2], sigma: f64) {
    let normal = Normal::new(0.0, sigma).expect("positive sigma");
    for i in rows {
        out[[i, 0]] = center[0] + normal.sample(rng);
        out[[i, 1]] = center[1] + normal.sample(rng);
    }
}

/// First half dense, second half sparse, both centred at the origin.
fn clusters2(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    let mut p = Array2::zeros((n, 2));
    let half = n / 2;
    gaussian_blob(rng, &mut p, 0..half, [0.0, 0.0], CLUSTERS2_SIGMAS.0);
    gaussian_blob(rng, &mut p, half..n, [0.0, 0.0], CLUSTERS2_SIGMAS.1);
    p
}

/// Three consecutive blocks of rows, one per center.
fn clusters3(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    let mut p = Array2::zeros((n, 2));
    for (c, center) in CLUSTERS3_CENTERS.iter().enumerate() {
        let rows = c * n / 3..(c + 1) * n / 3;
        gaussian_blob(rng, &mut p, rows, *center, CLUSTERS3_SIGMA);
    }
    p
}

fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Sphere `s` for `s < SPHERES_INNER` has radius 1 around a random center;
/// the last sphere has radius 5 around the origin and encloses the others.
/// Rows are grouped by sphere; inner spheres get `n / 11` points each and the
/// outer sphere the rest.
fn spheres(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Result<Array2<f64>> {
    if d < 2 {
        return Err(RtdError::Input("spheres need ambient dimension >= 2".into()));
    }
    let count = SPHERES_INNER + 1;
    if n < count {
        return Err(RtdError::Input(format!("spheres need at least {count} points")));
    }
    // inner centers at most 3.5 from the origin, at least 2.2 apart, so the
    // inner spheres are disjoint and strictly inside the outer one
    let (max_center, min_gap) = (SPHERES_OUTER_RADIUS - SPHERES_INNER_RADIUS - 0.5, 2.0 * SPHERES_INNER_RADIUS + 0.2);
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(SPHERES_INNER);
    let mut attempts = 0;
    while centers.len() < SPHERES_INNER {
        attempts += 1;
        if attempts > 1_000_000 {
            return Err(RtdError::Input(format!(
                "could not place {SPHERES_INNER} disjoint spheres in dimension {d}"
            )));
        }
        let r = max_center * rng.random::<f64>().powf(1.0 / d as f64);
        let c: Vec<f64> = unit_vector(rng, d).into_iter().map(|x| x * r).collect();
        let clear = centers
            .iter()
            .all(|o| o.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() >= min_gap);
        if clear {
            centers.push(c);
        }
    }
    centers.push(vec![0.0; d]);
    let per_inner = n / count;
    let mut p = Array2::zeros((n, d));
    for i in 0..n {
        let s = (i / per_inner).min(SPHERES_INNER);
        let radius = if s < SPHERES_INNER { SPHERES_INNER_RADIUS } else { SPHERES_OUTER_RADIUS };
        let u = unit_vector(rng, d);
        for k in 0..d {
            p[[i, k]] = centers[s][k] + radius * u[k];
        }
    }
    Ok(p)
}

/// Sphere index of each row of a `spheres` cloud with `n` points.
pub fn sphere_labels(n: usize) -> Vec<usize> {
    let per_inner = n / (SPHERES_INNER + 1);
    (0..n).map(|i| (i / per_inner.max(1)).min(SPHERES_INNER)).collect()
}

/// A torus of revolution sampled uniformly by area, lifted into `d`
/// dimensions by a random orthonormal 3-frame.
fn torus(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Result<Array2<f64>> {
    if d < 3 {
        return Err(RtdError::Input("torus needs ambient dimension >= 3".into()));
    }
    let (big, small) = TORUS_RADII;
    // Gram-Schmidt on three Gaussian vectors
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(3);
    while frame.len() < 3 {
        let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        for f in &frame {
            let dot: f64 = v.iter().zip(f).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(f).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            frame.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let mut p = Array2::zeros((n, d));
    for i in 0..n {
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let phi = loop {
            let phi = rng.random_range(0.0..std::f64::consts::TAU);
            // area element is proportional to big + small * cos(phi)
            if rng.random::<f64>() * (big + small) <= big + small * phi.cos() {
                break phi;
            }
        };
        let ring = big + small * phi.cos();
        let q = [ring * theta.cos(), ring * theta.sin(), small * phi.sin()];
        for k in 0..d {
            p[[i, k]] = q[0] * frame[0][k] + q[1] * frame[1][k] + q[2] * frame[2][k];
        }
    }
    Ok(p)
}

/// Parses a rectangular numeric CSV, one point per row. A first row with a
/// non-numeric cell is treated as a header.
pub fn parse_csv(text: &str) -> Result<PointCloud> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if line == 0 => continue,
            Err(_) => {
                return Err(RtdError::Input(format!(
                    "non-numeric cell on line {}",
                    line + 1
                )))
            }
        }
    }
    if rows.is_empty() {
        return Err(RtdError::Input("CSV contains no points".into()));
    }
    PointCloud::from_rows(&rows)
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<PointCloud> {
    let mut text = String::new();
    File::open(path.as_ref())?.read_to_string(&mut text)?;
    parse_csv(&text)
}

/// Writes one point per row without a header. Values use the shortest
/// representation that parses back to the same bits.
pub fn write_csv<W: Write>(cloud: &PointCloud, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in cloud.points().rows() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    write_csv(cloud, File::create(path.as_ref())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_on_unit_radius() {
        let c = generate(&DatasetSpec::new(DatasetName::Circle, 3)).unwrap();
        assert_eq!(c.len(), 100);
        for row in c.points().rows() {
            assert!((row[0].hypot(row[1]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn default_sizes() {
        for (name, n) in [
            (DatasetName::Random, 500),
            (DatasetName::Clusters2, 200),
            (DatasetName::Clusters3, 300),
        ] {
            let c = generate(&DatasetSpec::new(name, 0)).unwrap();
            assert_eq!((c.len(), c.dim()), (n, 2));
        }
    }

    #[test]
    fn seeded_reproducibility() {
        let spec = DatasetSpec::new(DatasetName::Clusters3, 9);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = DatasetSpec::new(DatasetName::Clusters3, 10);
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn header_and_errors() {
        let c = parse_csv("x,y,z\n1,2,3\n4,5,6\n").unwrap();
        assert_eq!((c.len(), c.dim()), (2, 3));
        assert!(matches!(parse_csv("1,2\n3\n"), Err(RtdError::Input(_))));
        assert!(matches!(parse_csv("1,2\n3,a\n"), Err(RtdError::Input(_))));
        assert!(parse_csv("x,y\n").is_err());
    }

    #[test]
    fn unknown_name() {
        assert!("mnist".parse::<DatasetName>().is_err());
        let spec: DatasetSpec = serde_json::from_str(r#"{"name":"torus","n":50,"seed":2}"#).unwrap();
        assert_eq!(generate(&spec).unwrap().dim(), 100);
        assert!(serde_json::from_str::<DatasetSpec>(r#"{"name":"mnist"}"#).is_err());
    }
}
