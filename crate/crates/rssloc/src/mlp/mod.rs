//! From-scratch multilayer perceptron for coordinate regression: ELU
//! hidden layers, linear output, mean-squared-error loss with L2
//! regularization over weights and biases, exact backpropagation, Adam
//! updates, and Xavier-uniform initialization.
//!
//! Everything is 64-bit floating point; golden tests depend on the exact
//! arithmetic, so there is no fast-math or reduced-precision path.

pub mod train;

use std::fs;
use std::path::Path;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::dataset::NormStats;
use crate::error::{Error, Result};
use crate::rng::Prng;

pub use train::{train, TrainConfig, TrainLog};

/// Network shape: `input_dim` features in, `hidden_layers` ELU layers of
/// `hidden_units` each, and a linear `output_dim` head.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpArch {
    pub input_dim: usize,
    /// Number of hidden layers; 0 gives a purely linear model.
    pub hidden_layers: usize,
    pub hidden_units: usize,
    pub output_dim: usize,
    /// ELU alpha for the hidden activations.
    pub elu_alpha: f64,
}

impl MlpArch {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 {
            return Err(Error::InvalidArgument(
                "input_dim and output_dim must be at least 1".into(),
            ));
        }
        if self.hidden_layers > 0 && self.hidden_units == 0 {
            return Err(Error::InvalidArgument(
                "hidden_units must be at least 1 when hidden layers exist".into(),
            ));
        }
        if !(self.elu_alpha > 0.0) || !self.elu_alpha.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "elu_alpha must be > 0, got {}",
                self.elu_alpha
            )));
        }
        Ok(())
    }

    /// Activation widths from the input layer to the output layer.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.hidden_layers + 2);
        dims.push(self.input_dim);
        dims.extend(std::iter::repeat(self.hidden_units).take(self.hidden_layers));
        dims.push(self.output_dim);
        dims
    }

    /// Number of weight matrices (hidden layers plus the output head).
    pub fn n_layers(&self) -> usize {
        self.hidden_layers + 1
    }
}

/// Exponential linear unit: identity for positive inputs, `alpha*(e^x - 1)`
/// otherwise. Continuous at zero.
pub fn elu(x: f64, alpha: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        alpha * (x.exp() - 1.0)
    }
}

/// Derivative of [`elu`]. The `x <= 0` branch is used at exactly zero;
/// both branches agree there when alpha = 1.
pub fn elu_deriv(x: f64, alpha: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        alpha * x.exp()
    }
}

/// A trained (or trainable) network together with the input normalization
/// it expects. Weight matrices are row-major fan_in × fan_out, so layer l
/// computes `a_l = act(W_lᵀ a_{l-1} + b_l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub(crate) arch: MlpArch,
    /// Per-layer weights, row-major fan_in x fan_out. Mutations must
    /// preserve the shapes implied by `arch`.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub(crate) norm: NormStats,
}

/// One supervised example: a normalized input vector and the regression
/// target.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainExample {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

/// Parameter-shaped gradient accumulators produced by [`backward`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// Draws initial weights uniform on ±√(6/(fan_in+fan_out)) and zeroes the
/// biases. Weights are drawn layer by layer in row-major order, one
/// uniform draw each; that order is part of the reproducibility contract.
pub fn init_xavier(arch: &MlpArch, rng: &mut Prng) -> Result<MlpModel> {
    use rand::Rng;
    arch.validate()?;
    let dims = arch.dims();
    let mut weights = Vec::with_capacity(arch.n_layers());
    let mut biases = Vec::with_capacity(arch.n_layers());
    for l in 0..arch.n_layers() {
        let (fan_in, fan_out) = (dims[l], dims[l + 1]);
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let w = (0..fan_in * fan_out)
            .map(|_| {
                let u: f64 = rng.gen();
                (2.0 * u - 1.0) * bound
            })
            .collect();
        weights.push(w);
        biases.push(vec![0.0; fan_out]);
    }
    Ok(MlpModel {
        arch: *arch,
        weights,
        biases,
        norm: NormStats {
            mean: vec![0.0; arch.input_dim],
            std: vec![1.0; arch.input_dim],
        },
    })
}

impl MlpModel {
    pub fn arch(&self) -> &MlpArch {
        &self.arch
    }

    pub fn norm_stats(&self) -> &NormStats {
        &self.norm
    }

    /// Runs the network on an already-normalized input vector.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.arch.input_dim {
            return Err(Error::DimensionMismatch(format!(
                "input has {} features, model expects {}",
                input.len(),
                self.arch.input_dim
            )));
        }
        let mut act = input.to_vec();
        let last = self.arch.n_layers() - 1;
        for l in 0..=last {
            let mut pre = self.affine(l, &act);
            if l < last {
                for p in &mut pre {
                    *p = elu(*p, self.arch.elu_alpha);
                }
            }
            act = pre;
        }
        Ok(act)
    }

    /// `W_lᵀ a + b_l` for layer l.
    fn affine(&self, l: usize, a: &[f64]) -> Vec<f64> {
        let dims = self.arch.dims();
        let (fan_in, fan_out) = (dims[l], dims[l + 1]);
        let w = &self.weights[l];
        let mut out = self.biases[l].clone();
        for i in 0..fan_in {
            let ai = a[i];
            if ai != 0.0 {
                let row = &w[i * fan_out..(i + 1) * fan_out];
                for (o, &wij) in out.iter_mut().zip(row) {
                    *o += ai * wij;
                }
            }
        }
        out
    }

    /// Sum of squares over all weights and biases.
    pub(crate) fn param_sq_norm(&self) -> f64 {
        let w: f64 = self.weights.iter().flatten().map(|v| v * v).sum();
        let b: f64 = self.biases.iter().flatten().map(|v| v * v).sum();
        w + b
    }

    fn zero_gradients(&self) -> Gradients {
        Gradients {
            weights: self.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: self.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }
}

fn check_batch(model: &MlpModel, batch: &[TrainExample]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("batch must not be empty".into()));
    }
    for (k, ex) in batch.iter().enumerate() {
        if ex.input.len() != model.arch.input_dim || ex.target.len() != model.arch.output_dim {
            return Err(Error::DimensionMismatch(format!(
                "example {k}: input {} / target {} vs model {} / {}",
                ex.input.len(),
                ex.target.len(),
                model.arch.input_dim,
                model.arch.output_dim
            )));
        }
    }
    Ok(())
}

/// Batch loss: `(1/m)·Σ ½‖û−u‖² + (λ/2m)·Σ p²` where the regularization
/// sum runs over all weights and biases and m is the actual batch size.
pub fn loss(model: &MlpModel, batch: &[TrainExample], lambda: f64) -> Result<f64> {
    check_batch(model, batch)?;
    let m = batch.len() as f64;
    let mut data_term = 0.0;
    for ex in batch {
        let out = model.forward(&ex.input)?;
        data_term += 0.5
            * out
                .iter()
                .zip(&ex.target)
                .map(|(o, t)| (o - t) * (o - t))
                .sum::<f64>();
    }
    Ok(data_term / m + lambda / (2.0 * m) * model.param_sq_norm())
}

/// Exact gradients of [`loss`] with respect to every parameter.
pub fn backward(model: &MlpModel, batch: &[TrainExample], lambda: f64) -> Result<Gradients> {
    loss_and_backward(model, batch, lambda).map(|(_, g)| g)
}

/// Fused loss + gradients; the training loop uses this so each batch does
/// one forward pass.
pub(crate) fn loss_and_backward(
    model: &MlpModel,
    batch: &[TrainExample],
    lambda: f64,
) -> Result<(f64, Gradients)> {
    check_batch(model, batch)?;
    let m = batch.len() as f64;
    let dims = model.arch.dims();
    let last = model.arch.n_layers() - 1;
    let alpha = model.arch.elu_alpha;

    let mut grads = model.zero_gradients();
    let mut data_term = 0.0;

    // Per-sample caches, reused across the batch.
    let mut acts: Vec<Vec<f64>> = dims.iter().map(|&d| vec![0.0; d]).collect();
    let mut pres: Vec<Vec<f64>> = dims[1..].iter().map(|&d| vec![0.0; d]).collect();

    for ex in batch {
        acts[0].copy_from_slice(&ex.input);
        for l in 0..=last {
            let pre = model.affine(l, &acts[l]);
            pres[l].copy_from_slice(&pre);
            let act = &mut acts[l + 1];
            if l < last {
                for (a, &p) in act.iter_mut().zip(&pre) {
                    *a = elu(p, alpha);
                }
            } else {
                act.copy_from_slice(&pre);
            }
        }

        // delta_l = d(sample loss)/d(pre_l); the output layer is linear so
        // its delta is the raw prediction error.
        let mut delta: Vec<f64> = acts[last + 1]
            .iter()
            .zip(&ex.target)
            .map(|(o, t)| o - t)
            .collect();
        data_term += 0.5 * delta.iter().map(|d| d * d).sum::<f64>();

        for l in (0..=last).rev() {
            let (fan_in, fan_out) = (dims[l], dims[l + 1]);
            let gw = &mut grads.weights[l];
            for i in 0..fan_in {
                let ai = acts[l][i];
                if ai != 0.0 {
                    let row = &mut gw[i * fan_out..(i + 1) * fan_out];
                    for (g, &d) in row.iter_mut().zip(&delta) {
                        *g += ai * d;
                    }
                }
            }
            for (g, &d) in grads.biases[l].iter_mut().zip(&delta) {
                *g += d;
            }
            if l > 0 {
                let w = &model.weights[l];
                let mut prev = vec![0.0; fan_in];
                for (i, p) in prev.iter_mut().enumerate() {
                    let row = &w[i * fan_out..(i + 1) * fan_out];
                    let s: f64 = row.iter().zip(&delta).map(|(wij, d)| wij * d).sum();
                    *p = s * elu_deriv(pres[l - 1][i], alpha);
                }
                delta = prev;
            }
        }
    }

    for l in 0..=last {
        for (g, &w) in grads.weights[l].iter_mut().zip(&model.weights[l]) {
            *g = *g / m + lambda / m * w;
        }
        for (g, &b) in grads.biases[l].iter_mut().zip(&model.biases[l]) {
            *g = *g / m + lambda / m * b;
        }
    }
    Ok((data_term / m + lambda / (2.0 * m) * model.param_sq_norm(), grads))
}

/// Adam accumulators, shaped like the model parameters.
#[derive(Debug, Clone)]
pub struct AdamState {
    m_w: Vec<Vec<f64>>,
    v_w: Vec<Vec<f64>>,
    m_b: Vec<Vec<f64>>,
    v_b: Vec<Vec<f64>>,
    step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    /// Fresh state with the conventional defaults β1 = 0.9, β2 = 0.999,
    /// ε = 1e-8.
    pub fn new(model: &MlpModel) -> AdamState {
        let zeros_w: Vec<Vec<f64>> =
            model.weights.iter().map(|w| vec![0.0; w.len()]).collect();
        let zeros_b: Vec<Vec<f64>> =
            model.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        AdamState {
            m_w: zeros_w.clone(),
            v_w: zeros_w,
            m_b: zeros_b.clone(),
            v_b: zeros_b,
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// One bias-corrected Adam update:
/// `θ ← θ − lr · m̂ / (√v̂ + ε)` with `m̂ = m/(1−β1ᵗ)`, `v̂ = v/(1−β2ᵗ)`.
pub fn adam_step(
    state: &mut AdamState,
    model: &mut MlpModel,
    grads: &Gradients,
    lr: f64,
) {
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - state.beta1.powi(t);
    let c2 = 1.0 - state.beta2.powi(t);
    let (b1, b2, eps) = (state.beta1, state.beta2, state.eps);

    let update = |param: &mut [f64], grad: &[f64], m: &mut [f64], v: &mut [f64]| {
        for k in 0..param.len() {
            let g = grad[k];
            m[k] = b1 * m[k] + (1.0 - b1) * g;
            v[k] = b2 * v[k] + (1.0 - b2) * g * g;
            let m_hat = m[k] / c1;
            let v_hat = v[k] / c2;
            param[k] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    };
    for l in 0..model.weights.len() {
        update(&mut model.weights[l], &grads.weights[l], &mut state.m_w[l], &mut state.v_w[l]);
        update(&mut model.biases[l], &grads.biases[l], &mut state.m_b[l], &mut state.v_b[l]);
    }
}

/// On-disk model layout: arch, normalization, and per-layer parameters as
/// base64-encoded little-endian float64 arrays with explicit shapes.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    arch: MlpArch,
    norm: NormStats,
    layers: Vec<LayerFile>,
}

#[derive(Serialize, Deserialize)]
struct LayerFile {
    fan_in: usize,
    fan_out: usize,
    weights: String,
    biases: String,
}

fn encode_f64s(values: &[f64]) -> String {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    BASE64.encode(bytes)
}

fn decode_f64s(text: &str, expected_len: usize, what: &str) -> Result<Vec<f64>> {
    let bytes = BASE64
        .decode(text)
        .map_err(|e| Error::InvalidArgument(format!("{what}: invalid base64: {e}")))?;
    if bytes.len() != expected_len * 8 {
        return Err(Error::InvalidArgument(format!(
            "{what}: expected {} bytes for {expected_len} float64 values, got {}",
            expected_len * 8,
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

impl MlpModel {
    /// Writes the model; the format round-trips parameters bit-exactly.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let dims = self.arch.dims();
        let layers = (0..self.arch.n_layers())
            .map(|l| LayerFile {
                fan_in: dims[l],
                fan_out: dims[l + 1],
                weights: encode_f64s(&self.weights[l]),
                biases: encode_f64s(&self.biases[l]),
            })
            .collect();
        let file = ModelFile { arch: self.arch, norm: self.norm.clone(), layers };
        let text = serde_json::to_string_pretty(&file).expect("model serializes");
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<MlpModel> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ModelFile =
            serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        file.arch.validate()?;
        let dims = file.arch.dims();
        if file.layers.len() != file.arch.n_layers() {
            return Err(Error::InvalidArgument(format!(
                "model file has {} layers, arch implies {}",
                file.layers.len(),
                file.arch.n_layers()
            )));
        }
        if file.norm.mean.len() != file.arch.input_dim
            || file.norm.std.len() != file.arch.input_dim
        {
            return Err(Error::InvalidArgument(
                "normalization length does not match input_dim".into(),
            ));
        }
        let mut weights = Vec::with_capacity(file.layers.len());
        let mut biases = Vec::with_capacity(file.layers.len());
        for (l, layer) in file.layers.iter().enumerate() {
            if layer.fan_in != dims[l] || layer.fan_out != dims[l + 1] {
                return Err(Error::InvalidArgument(format!(
                    "layer {l} has shape {}×{}, arch implies {}×{}",
                    layer.fan_in,
                    layer.fan_out,
                    dims[l],
                    dims[l + 1]
                )));
            }
            let w = decode_f64s(
                &layer.weights,
                layer.fan_in * layer.fan_out,
                &format!("layer {l} weights"),
            )?;
            let b = decode_f64s(&layer.biases, layer.fan_out, &format!("layer {l} biases"))?;
            if w.iter().chain(&b).any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "layer {l} contains non-finite parameters"
                )));
            }
            weights.push(w);
            biases.push(b);
        }
        Ok(MlpModel { arch: file.arch, weights, biases, norm: file.norm })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use approx::assert_abs_diff_eq;

    fn tiny_arch() -> MlpArch {
        MlpArch {
            input_dim: 2,
            hidden_layers: 1,
            hidden_units: 2,
            output_dim: 1,
            elu_alpha: 1.0,
        }
    }

    fn hand_model() -> MlpModel {
        MlpModel {
            arch: tiny_arch(),
            weights: vec![vec![0.5, -1.0, 1.0, 0.25], vec![2.0, -1.0]],
            biases: vec![vec![0.1, -0.2], vec![0.3]],
            norm: NormStats { mean: vec![0.0; 2], std: vec![1.0; 2] },
        }
    }

    #[test]
    fn elu_reference_values() {
        assert_eq!(elu(0.0, 1.0), 0.0);
        assert_eq!(elu(2.0, 1.0), 2.0);
        assert_abs_diff_eq!(elu(-1.0, 1.0), -0.6321205588285577, epsilon = 1e-15);
        assert_eq!(elu_deriv(3.0, 1.0), 1.0);
        assert_eq!(elu_deriv(0.0, 1.0), 1.0);
        assert_abs_diff_eq!(elu_deriv(-1.0, 2.0), 2.0 * (-1.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn xavier_bounds_variance_and_determinism() {
        let arch = MlpArch {
            input_dim: 128,
            hidden_layers: 1,
            hidden_units: 128,
            output_dim: 2,
            elu_alpha: 1.0,
        };
        let model = init_xavier(&arch, &mut rng::from_seed(3)).unwrap();
        let w = &model.weights[0];
        assert_eq!(w.len(), 128 * 128);
        let bound = (6.0_f64 / 256.0).sqrt();
        assert!(w.iter().all(|&x| x.abs() <= bound));
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let var = w.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / w.len() as f64;
        let target = 2.0 / 256.0;
        assert!(
            (var - target).abs() < 0.1 * target,
            "variance {var} vs {target}"
        );
        assert!(model.biases.iter().flatten().all(|&b| b == 0.0));

        let again = init_xavier(&arch, &mut rng::from_seed(3)).unwrap();
        assert_eq!(model, again);
    }

    #[test]
    fn forward_zero_model_outputs_zero() {
        let mut model = hand_model();
        for w in &mut model.weights {
            w.iter_mut().for_each(|v| *v = 0.0);
        }
        for b in &mut model.biases {
            b.iter_mut().for_each(|v| *v = 0.0);
        }
        assert_eq!(model.forward(&[3.0, -4.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn forward_pure_linear_layer_is_affine() {
        let model = MlpModel {
            arch: MlpArch {
                input_dim: 2,
                hidden_layers: 0,
                hidden_units: 1,
                output_dim: 2,
                elu_alpha: 1.0,
            },
            weights: vec![vec![1.0, 0.0, 0.0, 1.0]],
            biases: vec![vec![1.0, 1.0]],
            norm: NormStats { mean: vec![0.0; 2], std: vec![1.0; 2] },
        };
        assert_eq!(model.forward(&[1.0, 2.0]).unwrap(), vec![2.0, 3.0]);
    }

    #[test]
    fn forward_hand_evaluated_network() {
        // Input (1, -0.5): pre-activations 0.1 and -1.325, so the hidden
        // activations are 0.1 and e^(-1.325) - 1; the linear head gives
        // 0.2 - (e^(-1.325) - 1) + 0.3 = 1.5 - e^(-1.325).
        let model = hand_model();
        let out = model.forward(&[1.0, -0.5]).unwrap();
        assert_abs_diff_eq!(out[0], 1.5 - (-1.325f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn forward_rejects_wrong_width() {
        assert!(hand_model().forward(&[1.0]).is_err());
    }

    fn single_weight_model(w: f64, b: f64) -> MlpModel {
        MlpModel {
            arch: MlpArch {
                input_dim: 1,
                hidden_layers: 0,
                hidden_units: 1,
                output_dim: 1,
                elu_alpha: 1.0,
            },
            weights: vec![vec![w]],
            biases: vec![vec![b]],
            norm: NormStats { mean: vec![0.0], std: vec![1.0] },
        }
    }

    #[test]
    fn loss_reference_values() {
        // Perfect prediction, no regularization.
        let model = single_weight_model(2.0, 0.0);
        let perfect = vec![TrainExample { input: vec![1.0], target: vec![2.0] }];
        assert_eq!(loss(&model, &perfect, 0.0).unwrap(), 0.0);

        // One sample with error (3, 4): 0.5 * 25.
        let two_out = MlpModel {
            arch: MlpArch {
                input_dim: 2,
                hidden_layers: 0,
                hidden_units: 1,
                output_dim: 2,
                elu_alpha: 1.0,
            },
            weights: vec![vec![0.0; 4]],
            biases: vec![vec![3.0, 4.0]],
            norm: NormStats { mean: vec![0.0; 2], std: vec![1.0; 2] },
        };
        let batch = vec![TrainExample { input: vec![0.0, 0.0], target: vec![0.0, 0.0] }];
        assert_abs_diff_eq!(loss(&two_out, &batch, 0.0).unwrap(), 12.5, epsilon = 1e-12);

        // Regularization only: lambda/(2m) * w².
        assert_abs_diff_eq!(
            loss(&model, &perfect, 0.01).unwrap(),
            0.02,
            epsilon = 1e-15
        );
        // Biases are regularized too.
        let bias_only = single_weight_model(0.0, 1.0);
        let batch = vec![TrainExample { input: vec![0.0], target: vec![1.0] }];
        assert_abs_diff_eq!(
            loss(&bias_only, &batch, 0.01).unwrap(),
            0.005,
            epsilon = 1e-15
        );
    }

    #[test]
    fn backward_zero_error_gradients() {
        let model = single_weight_model(2.0, 0.0);
        let batch = vec![TrainExample { input: vec![1.0], target: vec![2.0] }];
        let g = backward(&model, &batch, 0.0).unwrap();
        assert!(g.weights.iter().flatten().all(|&v| v == 0.0));
        assert!(g.biases.iter().flatten().all(|&v| v == 0.0));

        // With regularization the only surviving term is (lambda/m)·param.
        let g = backward(&model, &batch, 0.01).unwrap();
        assert_abs_diff_eq!(g.weights[0][0], 0.01 * 2.0, epsilon = 1e-15);
        assert_eq!(g.biases[0][0], 0.0);
    }

    #[test]
    fn backward_matches_finite_differences() {
        use rand::Rng;
        let arch = MlpArch {
            input_dim: 6,
            hidden_layers: 1,
            hidden_units: 8,
            output_dim: 2,
            elu_alpha: 1.0,
        };
        let mut rng = rng::from_seed(17);
        let mut model = init_xavier(&arch, &mut rng).unwrap();
        // Nonzero biases so their gradients are exercised away from 0.
        for b in model.biases.iter_mut().flatten() {
            *b = rng.gen_range(-0.5..0.5);
        }
        let batch: Vec<TrainExample> = (0..10)
            .map(|_| TrainExample {
                input: (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect(),
                target: (0..2).map(|_| rng.gen_range(-3.0..3.0)).collect(),
            })
            .collect();
        let lambda = 0.01;
        let analytic = backward(&model, &batch, lambda).unwrap();

        let h = 1e-5;
        let mut max_rel: f64 = 0.0;
        for l in 0..model.arch.n_layers() {
            for k in 0..model.weights[l].len() {
                let orig = model.weights[l][k];
                model.weights[l][k] = orig + h;
                let up = loss(&model, &batch, lambda).unwrap();
                model.weights[l][k] = orig - h;
                let down = loss(&model, &batch, lambda).unwrap();
                model.weights[l][k] = orig;
                let fd = (up - down) / (2.0 * h);
                let a = analytic.weights[l][k];
                // Mixed absolute/relative guard: tiny gradients are
                // compared absolutely at the 1e-2 scale.
                let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-2);
                max_rel = max_rel.max(rel);
            }
            for k in 0..model.biases[l].len() {
                let orig = model.biases[l][k];
                model.biases[l][k] = orig + h;
                let up = loss(&model, &batch, lambda).unwrap();
                model.biases[l][k] = orig - h;
                let down = loss(&model, &batch, lambda).unwrap();
                model.biases[l][k] = orig;
                let fd = (up - down) / (2.0 * h);
                let a = analytic.biases[l][k];
                let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-2);
                max_rel = max_rel.max(rel);
            }
        }
        assert!(max_rel < 1e-6, "max relative gradient error {max_rel}");
    }

    #[test]
    fn fused_loss_matches_standalone() {
        let mut rng = rng::from_seed(5);
        let model = init_xavier(&tiny_arch(), &mut rng).unwrap();
        let batch = vec![
            TrainExample { input: vec![1.0, -0.5], target: vec![0.3] },
            TrainExample { input: vec![-0.2, 0.8], target: vec![-1.1] },
            TrainExample { input: vec![0.0, 0.0], target: vec![0.5] },
        ];
        let (fused, g1) = loss_and_backward(&model, &batch, 0.02).unwrap();
        assert_abs_diff_eq!(fused, loss(&model, &batch, 0.02).unwrap(), epsilon = 1e-15);
        assert_eq!(g1, backward(&model, &batch, 0.02).unwrap());
    }

    #[test]
    fn adam_two_step_scalar_trace() {
        // Constant gradient 1, lr = 0.1: both steps have fully
        // bias-corrected m̂ = v̂ = 1, so each moves by lr/(1 + eps·tiny).
        let mut model = single_weight_model(0.0, 0.0);
        let mut state = AdamState::new(&model);
        let g = Gradients { weights: vec![vec![1.0]], biases: vec![vec![0.0]] };
        adam_step(&mut state, &mut model, &g, 0.1);
        assert_abs_diff_eq!(model.weights[0][0], -0.09999999900000002, epsilon = 1e-15);
        adam_step(&mut state, &mut model, &g, 0.1);
        assert_abs_diff_eq!(model.weights[0][0], -0.19999999799999935, epsilon = 1e-15);
        assert_eq!(state.step(), 2);
    }

    #[test]
    fn adam_zero_gradient_is_identity() {
        let mut model = single_weight_model(1.5, -0.5);
        let mut state = AdamState::new(&model);
        let g = Gradients { weights: vec![vec![0.0]], biases: vec![vec![0.0]] };
        for _ in 0..5 {
            adam_step(&mut state, &mut model, &g, 0.1);
        }
        assert_eq!(model.weights[0][0], 1.5);
        assert_eq!(model.biases[0][0], -0.5);
    }

    #[test]
    fn adam_first_step_is_signed_learning_rate() {
        for &g0 in &[5.0, -0.3, 1e-3] {
            let mut model = single_weight_model(0.0, 0.0);
            let mut state = AdamState::new(&model);
            let g = Gradients { weights: vec![vec![g0]], biases: vec![vec![0.0]] };
            adam_step(&mut state, &mut model, &g, 0.01);
            let step = model.weights[0][0];
            assert!(
                (step + 0.01 * g0.signum()).abs() < 1e-6,
                "g = {g0}: step {step}"
            );
        }
    }

    #[test]
    fn model_file_round_trips_bit_exactly() {
        let arch = MlpArch {
            input_dim: 6,
            hidden_layers: 2,
            hidden_units: 5,
            output_dim: 2,
            elu_alpha: 1.0,
        };
        let mut model = init_xavier(&arch, &mut rng::from_seed(99)).unwrap();
        model.norm = NormStats {
            mean: vec![-50.1, -60.2, -55.3, -48.9, -52.0, -61.7],
            std: vec![3.1, 4.2, 5.3, 2.9, 3.0, 6.7],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.bin");
        model.save(&path).unwrap();
        let loaded = MlpModel::load(&path).unwrap();
        assert_eq!(model, loaded);
    }

    #[test]
    fn model_load_rejects_corruption() {
        let arch = tiny_arch();
        let model = init_xavier(&arch, &mut rng::from_seed(1)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.bin");
        model.save(&path).unwrap();

        let text = fs::read_to_string(&path).unwrap();
        let mut file: serde_json::Value = serde_json::from_str(&text).unwrap();
        file["layers"][0]["fan_out"] = serde_json::json!(7);
        let bad = dir.path().join("bad.bin");
        fs::write(&bad, serde_json::to_string(&file).unwrap()).unwrap();
        assert!(MlpModel::load(&bad).is_err());

        let mut file: serde_json::Value = serde_json::from_str(&text).unwrap();
        file["layers"][0]["weights"] = serde_json::json!("AAAA");
        fs::write(&bad, serde_json::to_string(&file).unwrap()).unwrap();
        assert!(MlpModel::load(&bad).is_err());
    }

    #[test]
    fn arch_validation() {
        assert!(tiny_arch().validate().is_ok());
        let mut a = tiny_arch();
        a.input_dim = 0;
        assert!(a.validate().is_err());
        let mut a = tiny_arch();
        a.hidden_units = 0;
        assert!(a.validate().is_err());
        a.hidden_layers = 0;
        assert!(a.validate().is_ok());
        let mut a = tiny_arch();
        a.elu_alpha = 0.0;
        assert!(a.validate().is_err());
    }
}
