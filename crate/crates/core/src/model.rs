//! Fully connected autoencoder trained with a reconstruction loss plus an
//! RTD term between each input batch and its latent codes.
//!
//! Hidden layers use `tanh`; the latent and output layers are linear. The
//! reconstruction loss of a batch of `B` rows is `1/(2B) * sum ||x - x_rec||^2`.

use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RtdError};
use crate::geometry::PointCloud;
use crate::grad::{rtd_subgradient_with, SubgradientOptions};
use crate::rcross::Variant;

/// One affine map `a -> a W + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `fan_in x fan_out`.
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

/// Encoder and decoder layers; `encoder_len` layers map inputs to latents.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub layers: Vec<Layer>,
    pub encoder_len: usize,
}

/// Layer widths `d, h x hidden_layers, p, h x hidden_layers, d`.
pub fn autoencoder_widths(input: usize, hidden: usize, hidden_layers: usize, latent: usize) -> Vec<usize> {
    let mut widths = vec![input];
    widths.extend(std::iter::repeat_n(hidden, hidden_layers));
    widths.push(latent);
    widths.extend(std::iter::repeat_n(hidden, hidden_layers));
    widths.push(input);
    widths
}

impl MlpParams {
    /// Uniform init in `+-1/sqrt(fan_in)` for weights and biases.
    pub fn init(widths: &[usize], encoder_len: usize, rng: &mut impl Rng) -> Result<Self> {
        if widths.len() < 3 || encoder_len == 0 || encoder_len >= widths.len() - 1 {
            return Err(RtdError::Input(format!(
                "bad autoencoder shape {widths:?} with {encoder_len} encoder layers"
            )));
        }
        if widths.contains(&0) {
            return Err(RtdError::Input("layer widths must be positive".into()));
        }
        let layers = widths
            .windows(2)
            .map(|p| {
                let bound = 1.0 / (p[0] as f64).sqrt();
                Layer {
                    w: Array2::from_shape_fn((p[0], p[1]), |_| rng.random_range(-bound..bound)),
                    b: Array1::from_shape_fn(p[1], |_| rng.random_range(-bound..bound)),
                }
            })
            .collect();
        Ok(MlpParams { layers, encoder_len })
    }

    /// All-zero parameters of the given shape.
    pub fn zeros(widths: &[usize], encoder_len: usize) -> Self {
        let layers = widths
            .windows(2)
            .map(|p| Layer {
                w: Array2::zeros((p[0], p[1])),
                b: Array1::zeros(p[1]),
            })
            .collect();
        MlpParams { layers, encoder_len }
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w: Vec<usize> = self.layers.iter().map(|l| l.w.nrows()).collect();
        w.extend(self.layers.last().map(|l| l.w.ncols()));
        w
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.nrows()
    }

    pub fn latent_dim(&self) -> usize {
        self.layers[self.encoder_len - 1].w.ncols()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Checks that consecutive layers chain and the encoder split is valid.
    pub fn validate(&self) -> Result<()> {
        if self.layers.len() < 2 || self.encoder_len == 0 || self.encoder_len >= self.layers.len() {
            return Err(RtdError::Input("autoencoder needs encoder and decoder layers".into()));
        }
        for (k, l) in self.layers.iter().enumerate() {
            if l.b.len() != l.w.ncols() {
                return Err(RtdError::Shape {
                    expected: format!("bias of length {} in layer {k}", l.w.ncols()),
                    got: l.b.len().to_string(),
                });
            }
            if let Some(next) = self.layers.get(k + 1) {
                if next.w.nrows() != l.w.ncols() {
                    return Err(RtdError::Shape {
                        expected: format!("{} inputs to layer {}", l.w.ncols(), k + 1),
                        got: next.w.nrows().to_string(),
                    });
                }
            }
        }
        if self.widths().last() != Some(&self.input_dim()) {
            return Err(RtdError::Input("decoder output width differs from input width".into()));
        }
        if self.layers.iter().any(|l| l.w.iter().chain(&l.b).any(|v| !v.is_finite())) {
            return Err(RtdError::Input("non-finite parameter".into()));
        }
        Ok(())
    }

    fn is_linear(&self, k: usize) -> bool {
        k + 1 == self.encoder_len || k + 1 == self.layers.len()
    }

    /// Activations of every layer, input first.
    fn activations(&self, x: ArrayView2<'_, f64>) -> Result<Vec<Array2<f64>>> {
        if x.ncols() != self.input_dim() {
            return Err(RtdError::Shape {
                expected: format!("{} input columns", self.input_dim()),
                got: x.ncols().to_string(),
            });
        }
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_owned());
        for (k, l) in self.layers.iter().enumerate() {
            let mut z = acts[k].dot(&l.w) + &l.b;
            if !self.is_linear(k) {
                z.mapv_inplace(f64::tanh);
            }
            acts.push(z);
        }
        Ok(acts)
    }
}

/// Latent codes and reconstruction of a batch.
pub fn forward(params: &MlpParams, batch: &PointCloud) -> Result<(PointCloud, PointCloud)> {
    let mut acts = params.activations(batch.points())?;
    let rec = acts.pop().expect("output layer");
    let latent = acts.swap_remove(params.encoder_len);
    Ok((PointCloud::new(latent)?, PointCloud::new(rec)?))
}

/// Latent codes only.
pub fn encode(params: &MlpParams, cloud: &PointCloud) -> Result<PointCloud> {
    Ok(forward(params, cloud)?.0)
}

/// Which RTD terms enter the loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RtdLoss {
    #[default]
    Min,
    /// Sum of the min and max variants.
    MinMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Optimizer {
    #[default]
    Sgd,
    Adam {
        beta1: f64,
        beta2: f64,
        eps: f64,
    },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    /// First epoch (0-based) that includes the RTD term.
    pub rtd_start_epoch: usize,
    pub lambda: f64,
    pub seed: u64,
    pub rtd_loss: RtdLoss,
    pub hidden_dim: usize,
    pub hidden_layers: usize,
    pub latent_dim: usize,
    pub optimizer: Optimizer,
    pub minimum_bypass: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 80,
            learning_rate: 1e-3,
            epochs: 100,
            rtd_start_epoch: 20,
            lambda: 1.0,
            seed: 0,
            rtd_loss: RtdLoss::Min,
            hidden_dim: 16,
            hidden_layers: 3,
            latent_dim: 2,
            optimizer: Optimizer::Sgd,
            minimum_bypass: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(RtdError::Input(m));
        if self.batch_size < 4 {
            return bad(format!("batch_size must be at least 4, got {}", self.batch_size));
        }
        if self.rtd_start_epoch > self.epochs {
            return bad(format!(
                "rtd_start_epoch {} exceeds epochs {}",
                self.rtd_start_epoch, self.epochs
            ));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be nonnegative, got {}", self.lambda));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if self.hidden_dim == 0 || self.latent_dim == 0 {
            return bad("hidden_dim and latent_dim must be positive".into());
        }
        Ok(())
    }
}

/// Loss components of one batch.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BatchLoss {
    pub reconstruction: f64,
    /// Unweighted RTD between the batch and its latent codes, when computed.
    pub rtd: Option<f64>,
}

impl BatchLoss {
    pub fn total(&self, lambda: f64) -> f64 {
        self.reconstruction + lambda * self.rtd.unwrap_or(0.0)
    }
}

/// Reconstruction loss, optional RTD term, and the gradient of
/// `reconstruction + lambda * rtd` with respect to every parameter.
///
/// With `rtd` set to `None` only the reconstruction loss is used. A gradient
/// singularity in the RTD term is returned as an error.
pub fn loss_and_grad(
    params: &MlpParams,
    batch: &PointCloud,
    rtd: Option<(f64, RtdLoss, bool)>,
) -> Result<(BatchLoss, Vec<Layer>)> {
    let acts = params.activations(batch.points())?;
    let rows = batch.len() as f64;
    let out = acts.last().expect("output layer");
    let diff = out - &batch.points();
    let reconstruction = 0.5 * diff.iter().map(|v| v * v).sum::<f64>() / rows;
    let mut delta = diff / rows;

    let mut latent_grad = None;
    let mut rtd_value = None;
    if let Some((lambda, kind, bypass)) = rtd {
        let z = PointCloud::new(acts[params.encoder_len].clone())?;
        let mut variants = vec![Variant::Min];
        if kind == RtdLoss::MinMax {
            variants.push(Variant::Max);
        }
        let mut value = 0.0;
        let mut g = Array2::zeros(z.points().dim());
        for variant in variants {
            let opts = SubgradientOptions {
                minimum_bypass: bypass && variant == Variant::Min,
                variant,
            };
            let (v, field) = rtd_subgradient_with(batch, &z, opts)?;
            value += v;
            g += &field.dx_tilde;
        }
        rtd_value = Some(value);
        latent_grad = Some(g * lambda);
    }

    let mut grads: Vec<Layer> = Vec::with_capacity(params.layers.len());
    for k in (0..params.layers.len()).rev() {
        if k + 1 == params.encoder_len {
            if let Some(g) = &latent_grad {
                delta += g;
            }
        }
        if !params.is_linear(k) {
            delta.zip_mut_with(&acts[k + 1], |d, &a| *d *= 1.0 - a * a);
        }
        let layer = &params.layers[k];
        grads.push(Layer {
            w: acts[k].t().dot(&delta),
            b: delta.sum_axis(Axis(0)),
        });
        if k > 0 {
            delta = delta.dot(&layer.w.t());
        }
    }
    grads.reverse();
    Ok((
        BatchLoss {
            reconstruction,
            rtd: rtd_value,
        },
        grads,
    ))
}

/// Reconstruction loss of a whole cloud.
pub fn reconstruction_loss(params: &MlpParams, data: &PointCloud) -> Result<f64> {
    let (_, rec) = forward(params, data)?;
    let diff = &rec.points() - &data.points();
    Ok(0.5 * diff.iter().map(|v| v * v).sum::<f64>() / data.len() as f64)
}

/// Per-epoch training record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean batch reconstruction loss.
    pub reconstruction: f64,
    /// Mean RTD over the batches where it was computed.
    pub rtd: Option<f64>,
    /// Reconstruction loss of the full data after the epoch.
    pub eval_reconstruction: f64,
    /// Batches whose RTD term was dropped because of a gradient singularity.
    pub skipped_rtd_batches: usize,
}

struct AdamState {
    m: Vec<Layer>,
    v: Vec<Layer>,
    t: i32,
}

fn apply_update(params: &mut MlpParams, grads: &[Layer], lr: f64, opt: Optimizer, state: &mut Option<AdamState>) {
    match opt {
        Optimizer::Sgd => {
            for (l, g) in params.layers.iter_mut().zip(grads) {
                l.w.scaled_add(-lr, &g.w);
                l.b.scaled_add(-lr, &g.b);
            }
        }
        Optimizer::Adam { beta1, beta2, eps } => {
            let st = state.get_or_insert_with(|| {
                let zero = |ls: &[Layer]| {
                    ls.iter()
                        .map(|l| Layer {
                            w: Array2::zeros(l.w.dim()),
                            b: Array1::zeros(l.b.len()),
                        })
                        .collect::<Vec<_>>()
                };
                AdamState {
                    m: zero(grads),
                    v: zero(grads),
                    t: 0,
                }
            });
            st.t += 1;
            let c1 = 1.0 - beta1.powi(st.t);
            let c2 = 1.0 - beta2.powi(st.t);
            let step = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
                *m = beta1 * *m + (1.0 - beta1) * g;
                *v = beta2 * *v + (1.0 - beta2) * g * g;
                *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            };
            for (k, l) in params.layers.iter_mut().enumerate() {
                let (g, m, v) = (&grads[k], &mut st.m[k], &mut st.v[k]);
                for (((p, &gv), mv), vv) in l.w.iter_mut().zip(&g.w).zip(m.w.iter_mut()).zip(v.w.iter_mut()) {
                    step(p, gv, mv, vv);
                }
                for (((p, &gv), mv), vv) in l.b.iter_mut().zip(&g.b).zip(m.b.iter_mut()).zip(v.b.iter_mut()) {
                    step(p, gv, mv, vv);
                }
            }
        }
    }
}

/// Trains an autoencoder on `data`.
///
/// Epochs before `rtd_start_epoch` use the reconstruction loss only; later
/// epochs add `lambda * rtd(batch, latent)`. Rows are reshuffled every epoch
/// with a generator seeded from `cfg.seed`; the final short batch is kept.
pub fn train(data: &PointCloud, cfg: &TrainConfig) -> Result<(MlpParams, Vec<EpochStats>)> {
    cfg.validate()?;
    let n = data.len();
    if n < cfg.batch_size {
        return Err(RtdError::Input(format!(
            "{n} points is fewer than batch_size {}",
            cfg.batch_size
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let widths = autoencoder_widths(data.dim(), cfg.hidden_dim, cfg.hidden_layers, cfg.latent_dim);
    let mut params = MlpParams::init(&widths, cfg.hidden_layers + 1, &mut rng)?;
    let mut adam = None;
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let with_rtd = epoch >= cfg.rtd_start_epoch && cfg.lambda > 0.0;
        let (mut rec_sum, mut rtd_sum, mut batches, mut rtd_batches, mut skipped) = (0.0, 0.0, 0, 0, 0);
        for chunk in order.chunks(cfg.batch_size) {
            let batch = data.select(chunk);
            let rtd_term = (with_rtd && chunk.len() >= 2).then_some((cfg.lambda, cfg.rtd_loss, cfg.minimum_bypass));
            let (loss, grads) = match loss_and_grad(&params, &batch, rtd_term) {
                Err(e) if e.is_singularity() => {
                    skipped += 1;
                    loss_and_grad(&params, &batch, None)?
                }
                other => other?,
            };
            rec_sum += loss.reconstruction;
            batches += 1;
            if let Some(r) = loss.rtd {
                rtd_sum += r;
                rtd_batches += 1;
            }
            apply_update(&mut params, &grads, cfg.learning_rate, cfg.optimizer, &mut adam);
        }
        history.push(EpochStats {
            epoch,
            reconstruction: rec_sum / batches as f64,
            rtd: (rtd_batches > 0).then(|| rtd_sum / rtd_batches as f64),
            eval_reconstruction: reconstruction_loss(&params, data)?,
            skipped_rtd_batches: skipped,
        });
    }
    Ok((params, history))
}

pub const CHECKPOINT_FORMAT: &str = "rtd-autoencoder";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LayerRecord {
    rows: usize,
    cols: usize,
    /// Row-major.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

/// Serialized model: format tag, version, shapes, row-major weights and the
/// training config.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    format: String,
    version: u32,
    encoder_len: usize,
    widths: Vec<usize>,
    layers: Vec<LayerRecord>,
    pub config: Option<TrainConfig>,
}

impl Checkpoint {
    pub fn new(params: &MlpParams, config: Option<TrainConfig>) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            encoder_len: params.encoder_len,
            widths: params.widths(),
            layers: params
                .layers
                .iter()
                .map(|l| LayerRecord {
                    rows: l.w.nrows(),
                    cols: l.w.ncols(),
                    weights: l.w.iter().copied().collect(),
                    bias: l.b.to_vec(),
                })
                .collect(),
            config,
        }
    }

    /// Rebuilds the parameters, validating format, version and shapes.
    pub fn params(&self) -> Result<MlpParams> {
        if self.format != CHECKPOINT_FORMAT || self.version != CHECKPOINT_VERSION {
            return Err(RtdError::Input(format!(
                "unsupported checkpoint {} v{}",
                self.format, self.version
            )));
        }
        if self.widths.len() != self.layers.len() + 1 {
            return Err(RtdError::Input("checkpoint widths do not match layer count".into()));
        }
        let layers = self
            .layers
            .iter()
            .zip(self.widths.windows(2))
            .map(|(r, p)| {
                if (r.rows, r.cols) != (p[0], p[1]) {
                    return Err(RtdError::Shape {
                        expected: format!("{}x{}", p[0], p[1]),
                        got: format!("{}x{}", r.rows, r.cols),
                    });
                }
                Ok(Layer {
                    w: Array2::from_shape_vec((r.rows, r.cols), r.weights.clone())
                        .map_err(|e| RtdError::Input(e.to_string()))?,
                    b: Array1::from(r.bias.clone()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let params = MlpParams {
            layers,
            encoder_len: self.encoder_len,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
