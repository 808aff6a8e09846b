//! The compact adaptive CNN: hidden layers whose neurons convolve,
//! activate, and subsample in one unit, followed by a small MLP head.
//!
//! The last CNN layer ignores its configured subsampling factors and pools
//! each neuron's whole post-convolution map to a single scalar, which is
//! what lets the same architecture accept any window size: the MLP head
//! always sees one value per final-layer neuron, so hidden CNN layers can
//! be stacked freely as long as the maps stay non-empty.

pub mod gradcheck;
pub mod ops;
pub mod train;

use ndarray::Array2;
use rand_core::SeedableRng;

use crate::error::{Error, Result};
use crate::polsar::feature::ScaleRecord;
use crate::rng::{self, ChaCha8Rng};
use ops::{conv2d_input_grad, conv2d_kernel_grad, subsample, subsample_grad, valid_conv2d};

/// Network input: one `window × window` plane per channel.
pub type Patch = Vec<Array2<f64>>;

/// Neuron nonlinearity. `Identity` exists for linear-mode testing only;
/// real models use `Tanh` on every layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation output (`1 - y²` for
    /// tanh), which is all the backward pass needs.
    #[inline]
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }
}

/// One hidden CNN layer: neuron count, kernel size `(Kx, Ky)` in rows ×
/// columns, and subsampling factors `(ssx, ssy)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CnnLayerSpec {
    pub neurons: usize,
    pub kernel: (usize, usize),
    pub subsample: (usize, usize),
}

/// Complete architecture description; owning one that passes
/// [`NetworkConfig::validate`] guarantees a feasible forward pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkConfig {
    pub input_channels: usize,
    /// Patch side length `N` (odd).
    pub window: usize,
    pub cnn_layers: Vec<CnnLayerSpec>,
    /// Hidden MLP layer sizes; the `num_classes` output layer is implicit.
    pub mlp_layers: Vec<usize>,
    pub num_classes: usize,
    pub activation: Activation,
    /// Seed for weight initialization.
    pub seed: u64,
}

impl NetworkConfig {
    /// The reference architecture: one CNN layer of 20 neurons with 3×3
    /// kernels and 2×2 subsampling, one hidden MLP layer of 10.
    pub fn default_compact(
        input_channels: usize,
        window: usize,
        num_classes: usize,
        seed: u64,
    ) -> Self {
        Self::scaled_compact(1, 1, input_channels, window, num_classes, seed)
    }

    /// The reference architecture scaled up: `n` CNN layers of `20·m`
    /// neurons and a hidden MLP layer of `10·m` (the capacity ladder used
    /// in over-parameterization experiments).
    pub fn scaled_compact(
        m: usize,
        n: usize,
        input_channels: usize,
        window: usize,
        num_classes: usize,
        seed: u64,
    ) -> Self {
        Self {
            input_channels,
            window,
            cnn_layers: vec![
                CnnLayerSpec {
                    neurons: 20 * m,
                    kernel: (3, 3),
                    subsample: (2, 2),
                };
                n
            ],
            mlp_layers: vec![10 * m],
            num_classes,
            activation: Activation::Tanh,
            seed,
        }
    }

    /// Checks structural invariants and forward-shape feasibility.
    pub fn validate(&self) -> Result<()> {
        if self.input_channels == 0 {
            return Err(Error::BadNetworkConfig("no input channels".into()));
        }
        if self.window == 0 || self.window % 2 == 0 {
            return Err(Error::BadWindow(self.window));
        }
        if self.cnn_layers.is_empty() {
            return Err(Error::BadNetworkConfig("no CNN layers".into()));
        }
        if self.mlp_layers.is_empty() {
            return Err(Error::BadNetworkConfig("no hidden MLP layers".into()));
        }
        if self.mlp_layers.iter().any(|&n| n == 0) {
            return Err(Error::BadNetworkConfig("zero-size MLP layer".into()));
        }
        if self.num_classes < 2 {
            return Err(Error::BadNetworkConfig(format!(
                "need at least 2 classes, got {}",
                self.num_classes
            )));
        }
        for (l, spec) in self.cnn_layers.iter().enumerate() {
            if spec.neurons == 0 {
                return Err(Error::BadNetworkConfig(format!("CNN layer {l} has no neurons")));
            }
            if spec.kernel.0 == 0 || spec.kernel.1 == 0 {
                return Err(Error::BadNetworkConfig(format!(
                    "CNN layer {l} has a zero-size kernel"
                )));
            }
            if spec.subsample.0 == 0 || spec.subsample.1 == 0 {
                return Err(Error::BadNetworkConfig(format!(
                    "CNN layer {l} has a zero subsampling factor"
                )));
            }
        }
        self.conv_dims()?;
        Ok(())
    }

    /// Post-convolution map dimensions of every CNN layer when an
    /// `window × window` patch is pushed through, or an error if any map
    /// collapses. The last layer's pooled output is always 1×1 because its
    /// subsampling factors are overridden to the full map size.
    pub fn conv_dims(&self) -> Result<Vec<(usize, usize)>> {
        let mut dims = Vec::with_capacity(self.cnn_layers.len());
        let (mut h, mut w) = (self.window, self.window);
        let last = self.cnn_layers.len() - 1;
        for (l, spec) in self.cnn_layers.iter().enumerate() {
            let (kx, ky) = spec.kernel;
            if kx > h || ky > w {
                return Err(Error::BadNetworkConfig(format!(
                    "CNN layer {l}: kernel {kx}×{ky} exceeds its {h}×{w} input map"
                )));
            }
            (h, w) = (h - kx + 1, w - ky + 1);
            dims.push((h, w));
            if l == last {
                (h, w) = (1, 1);
            } else {
                let (sx, sy) = spec.subsample;
                if sx > h || sy > w {
                    return Err(Error::BadNetworkConfig(format!(
                        "CNN layer {l}: subsampling {sx}×{sy} exceeds its {h}×{w} map"
                    )));
                }
                (h, w) = (h / sx, w / sy);
            }
        }
        Ok(dims)
    }

    /// Subsampling factors actually applied at CNN layer `l`: the spec'd
    /// factors, except the last layer pools its entire map.
    pub fn effective_subsample(&self, l: usize, conv_dim: (usize, usize)) -> (usize, usize) {
        if l == self.cnn_layers.len() - 1 {
            conv_dim
        } else {
            self.cnn_layers[l].subsample
        }
    }

    /// Full MLP chain sizes, from the last CNN layer's neuron count through
    /// the hidden layers to the output layer.
    fn mlp_chain(&self) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.mlp_layers.len() + 2);
        sizes.push(self.cnn_layers.last().expect("validated").neurons);
        sizes.extend_from_slice(&self.mlp_layers);
        sizes.push(self.num_classes);
        sizes
    }
}

/// Kernels and biases of one CNN layer; `kernels[k][i]` connects
/// previous-layer output `i` to neuron `k`. Doubles as that layer's
/// gradient holder.
#[derive(Clone, Debug, PartialEq)]
pub struct CnnLayer {
    pub kernels: Vec<Vec<Array2<f64>>>,
    pub biases: Vec<f64>,
}

/// Dense MLP layer; `weights[[k, i]]` connects input `i` to neuron `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpLayer {
    pub weights: Array2<f64>,
    pub biases: Vec<f64>,
}

/// Preprocessing contract a trained model carries with it: which channels
/// it expects, in which order, scaled with which per-channel dB extrema.
#[derive(Clone, Debug, PartialEq)]
pub struct Preprocessing {
    pub channel_names: Vec<String>,
    pub scaling: Vec<ScaleRecord>,
}

/// The network: architecture plus parameters, and optionally the
/// preprocessing metadata of the cube it was trained on.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactCnn {
    pub(crate) config: NetworkConfig,
    pub(crate) cnn: Vec<CnnLayer>,
    pub(crate) mlp: Vec<MlpLayer>,
    pub(crate) preprocessing: Option<Preprocessing>,
}

/// Gradient of the loss with respect to every parameter, shaped exactly
/// like the parameters themselves.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub cnn: Vec<CnnLayer>,
    pub mlp: Vec<MlpLayer>,
}

impl Gradients {
    /// Gradient values in the same canonical order as
    /// [`CompactCnn::flatten`].
    pub fn flatten(&self) -> Vec<f64> {
        flatten_parts(&self.cnn, &self.mlp)
    }
}

fn flatten_parts(cnn: &[CnnLayer], mlp: &[MlpLayer]) -> Vec<f64> {
    let mut out = Vec::new();
    for layer in cnn {
        for (ks, b) in layer.kernels.iter().zip(&layer.biases) {
            for k in ks {
                out.extend(k.iter());
            }
            out.push(*b);
        }
    }
    for layer in mlp {
        for k in 0..layer.biases.len() {
            out.extend(layer.weights.row(k).iter());
            out.push(layer.biases[k]);
        }
    }
    out
}

/// Intermediate maps of one forward pass, retained for back-propagation:
/// per CNN layer and neuron the pre-activation `x`, activation `y`, and
/// pooled output `s`; per MLP layer the pre-activations and activations.
#[derive(Clone, Debug)]
pub struct ForwardTrace {
    pub conv_x: Vec<Vec<Array2<f64>>>,
    pub conv_y: Vec<Vec<Array2<f64>>>,
    pub conv_s: Vec<Vec<Array2<f64>>>,
    pub mlp_x: Vec<Vec<f64>>,
    pub mlp_y: Vec<Vec<f64>>,
}

/// `±1` target encoding: `+1` at the target class, `-1` elsewhere, matching
/// the tanh output range so a perfect score is reachable.
pub fn target_vector(num_classes: usize, target_class: usize) -> Result<Vec<f64>> {
    if target_class >= num_classes {
        return Err(Error::ClassOutOfRange {
            class: target_class,
            num_classes,
        });
    }
    let mut t = vec![-1.0; num_classes];
    t[target_class] = 1.0;
    Ok(t)
}

/// Squared-error loss `Σ_i (y_i - t_i)²` against the `±1` encoding of
/// `target_class` (unnormalized sum).
pub fn mse_loss(scores: &[f64], target_class: usize) -> Result<f64> {
    let t = target_vector(scores.len(), target_class)?;
    Ok(scores
        .iter()
        .zip(&t)
        .map(|(y, t)| (y - t) * (y - t))
        .sum())
}

/// Initializes a network for `config` with all kernels and biases drawn
/// uniformly from [-0.1, 0.1] using the config seed.
pub fn init_weights(config: &NetworkConfig) -> Result<CompactCnn> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut draw = || rng::uniform_in(&mut rng, -0.1, 0.1);

    let mut cnn = Vec::with_capacity(config.cnn_layers.len());
    let mut prev = config.input_channels;
    for spec in &config.cnn_layers {
        let mut kernels = Vec::with_capacity(spec.neurons);
        let mut biases = Vec::with_capacity(spec.neurons);
        for _ in 0..spec.neurons {
            let mut per_input = Vec::with_capacity(prev);
            for _ in 0..prev {
                per_input.push(Array2::from_shape_simple_fn(spec.kernel, &mut draw));
            }
            kernels.push(per_input);
            biases.push(draw());
        }
        cnn.push(CnnLayer { kernels, biases });
        prev = spec.neurons;
    }

    let chain = config.mlp_chain();
    let mut mlp = Vec::with_capacity(chain.len() - 1);
    for pair in chain.windows(2) {
        let (n_in, n_out) = (pair[0], pair[1]);
        let mut weights = Array2::zeros((n_out, n_in));
        let mut biases = Vec::with_capacity(n_out);
        for k in 0..n_out {
            for i in 0..n_in {
                weights[[k, i]] = draw();
            }
            biases.push(draw());
        }
        mlp.push(MlpLayer { weights, biases });
    }

    Ok(CompactCnn {
        config: config.clone(),
        cnn,
        mlp,
        preprocessing: None,
    })
}

impl CompactCnn {
    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn preprocessing(&self) -> Option<&Preprocessing> {
        self.preprocessing.as_ref()
    }

    /// Attaches the training cube's channel names and scaling records so
    /// they persist with the model.
    pub fn set_preprocessing(&mut self, channel_names: Vec<String>, scaling: Vec<ScaleRecord>) {
        self.preprocessing = Some(Preprocessing {
            channel_names,
            scaling,
        });
    }

    fn check_patch(&self, patch: &Patch) -> Result<()> {
        if patch.len() != self.config.input_channels {
            return Err(Error::ChannelMismatch {
                expected: format!("{} channels", self.config.input_channels),
                found: format!("{} channels", patch.len()),
            });
        }
        let n = self.config.window;
        for plane in patch {
            if plane.dim() != (n, n) {
                return Err(Error::DimensionMismatch {
                    what: "patch plane".into(),
                    expected_width: n,
                    expected_height: n,
                    found_width: plane.ncols(),
                    found_height: plane.nrows(),
                });
            }
        }
        Ok(())
    }

    /// Runs the network on one patch, returning the class scores and the
    /// full per-layer trace.
    pub fn forward(&self, patch: &Patch) -> Result<(Vec<f64>, ForwardTrace)> {
        self.check_patch(patch)?;
        let act = self.config.activation;
        let layers = self.config.cnn_layers.len();

        let mut trace = ForwardTrace {
            conv_x: Vec::with_capacity(layers),
            conv_y: Vec::with_capacity(layers),
            conv_s: Vec::with_capacity(layers),
            mlp_x: Vec::with_capacity(self.mlp.len()),
            mlp_y: Vec::with_capacity(self.mlp.len()),
        };

        for (l, layer) in self.cnn.iter().enumerate() {
            let prev: &[Array2<f64>] = if l == 0 { patch } else { &trace.conv_s[l - 1] };
            let neurons = layer.biases.len();
            let mut xs = Vec::with_capacity(neurons);
            let mut ys = Vec::with_capacity(neurons);
            let mut ss = Vec::with_capacity(neurons);
            for k in 0..neurons {
                let mut x: Option<Array2<f64>> = None;
                for (i, input) in prev.iter().enumerate() {
                    let conv = valid_conv2d(&layer.kernels[k][i], input)?;
                    match &mut x {
                        None => x = Some(conv),
                        Some(acc) => *acc += &conv,
                    }
                }
                let mut x = x.expect("layers have at least one input");
                x += layer.biases[k];
                let y = x.mapv(|v| act.apply(v));
                let (sx, sy) = self.config.effective_subsample(l, y.dim());
                let s = subsample(&y, sx, sy)?;
                xs.push(x);
                ys.push(y);
                ss.push(s);
            }
            trace.conv_x.push(xs);
            trace.conv_y.push(ys);
            trace.conv_s.push(ss);
        }

        // The last CNN layer pooled every map to 1×1; line those scalars up
        // as the MLP input vector.
        let mut v: Vec<f64> = trace
            .conv_s
            .last()
            .expect("at least one CNN layer")
            .iter()
            .map(|s| s[[0, 0]])
            .collect();

        for layer in &self.mlp {
            let n_out = layer.biases.len();
            let mut x = Vec::with_capacity(n_out);
            for k in 0..n_out {
                let mut acc = layer.biases[k];
                for (i, vi) in v.iter().enumerate() {
                    acc += layer.weights[[k, i]] * vi;
                }
                x.push(acc);
            }
            let y: Vec<f64> = x.iter().map(|&xi| act.apply(xi)).collect();
            trace.mlp_x.push(x);
            trace.mlp_y.push(y.clone());
            v = y;
        }

        Ok((v, trace))
    }

    /// Loss of one sample and the exact gradient of that loss with respect
    /// to every parameter.
    pub fn loss_and_gradients(&self, patch: &Patch, target_class: usize) -> Result<(f64, Gradients)> {
        let (scores, trace) = self.forward(patch)?;
        let loss = mse_loss(&scores, target_class)?;
        let t = target_vector(self.config.num_classes, target_class)?;
        let act = self.config.activation;

        let mut grads = Gradients {
            cnn: self
                .cnn
                .iter()
                .map(|l| CnnLayer {
                    kernels: l
                        .kernels
                        .iter()
                        .map(|ks| ks.iter().map(|k| Array2::zeros(k.dim())).collect())
                        .collect(),
                    biases: vec![0.0; l.biases.len()],
                })
                .collect(),
            mlp: self
                .mlp
                .iter()
                .map(|l| MlpLayer {
                    weights: Array2::zeros(l.weights.dim()),
                    biases: vec![0.0; l.biases.len()],
                })
                .collect(),
        };

        // dE/dy at the output layer.
        let mut delta_y: Vec<f64> = scores.iter().zip(&t).map(|(y, t)| 2.0 * (y - t)).collect();

        // MLP layers, last to first.
        let pooled: Vec<f64> = trace.conv_s[self.cnn.len() - 1]
            .iter()
            .map(|s| s[[0, 0]])
            .collect();
        for j in (0..self.mlp.len()).rev() {
            let y = &trace.mlp_y[j];
            let input: &[f64] = if j == 0 { &pooled } else { &trace.mlp_y[j - 1] };
            let delta_x: Vec<f64> = delta_y
                .iter()
                .zip(y)
                .map(|(d, y)| d * act.derivative_from_output(*y))
                .collect();
            let layer = &self.mlp[j];
            let g = &mut grads.mlp[j];
            for (k, dx) in delta_x.iter().enumerate() {
                g.biases[k] = *dx;
                for (i, vi) in input.iter().enumerate() {
                    g.weights[[k, i]] = dx * vi;
                }
            }
            let mut delta_in = vec![0.0; input.len()];
            for (k, dx) in delta_x.iter().enumerate() {
                for (i, di) in delta_in.iter_mut().enumerate() {
                    *di += layer.weights[[k, i]] * dx;
                }
            }
            delta_y = delta_in;
        }

        // CNN layers, last to first. `delta_s` holds dE/ds per neuron of the
        // current layer; at the top those are the 1×1 pooled scalars.
        let mut delta_s: Vec<Array2<f64>> = delta_y
            .iter()
            .map(|d| Array2::from_elem((1, 1), *d))
            .collect();
        for l in (0..self.cnn.len()).rev() {
            let layer = &self.cnn[l];
            let prev: &[Array2<f64>] = if l == 0 { patch } else { &trace.conv_s[l - 1] };
            let mut delta_prev: Vec<Array2<f64>> =
                prev.iter().map(|p| Array2::zeros(p.dim())).collect();
            for (k, ds) in delta_s.iter().enumerate() {
                let y = &trace.conv_y[l][k];
                let (sx, sy) = self.config.effective_subsample(l, y.dim());
                let dy = subsample_grad(ds, sx, sy, y.dim());
                let mut dx = dy;
                dx.zip_mut_with(y, |d, y| *d *= act.derivative_from_output(*y));

                grads.cnn[l].biases[k] = dx.sum();
                for (i, p) in prev.iter().enumerate() {
                    grads.cnn[l].kernels[k][i] = conv2d_kernel_grad(p, &dx);
                    let gi = conv2d_input_grad(&layer.kernels[k][i], &dx, p.dim());
                    delta_prev[i] += &gi;
                }
            }
            delta_s = delta_prev;
        }

        Ok((loss, grads))
    }

    /// Gradient of [`mse_loss`] for one sample.
    pub fn backward(&self, patch: &Patch, target_class: usize) -> Result<Gradients> {
        Ok(self.loss_and_gradients(patch, target_class)?.1)
    }

    /// One gradient-descent step: every parameter moves by `-lr · g`.
    pub fn apply_gradients(&mut self, grads: &Gradients, lr: f64) {
        for (layer, g) in self.cnn.iter_mut().zip(&grads.cnn) {
            for (ks, gs) in layer.kernels.iter_mut().zip(&g.kernels) {
                for (k, gk) in ks.iter_mut().zip(gs) {
                    k.zip_mut_with(gk, |w, g| *w -= lr * g);
                }
            }
            for (b, gb) in layer.biases.iter_mut().zip(&g.biases) {
                *b -= lr * gb;
            }
        }
        for (layer, g) in self.mlp.iter_mut().zip(&grads.mlp) {
            layer.weights.zip_mut_with(&g.weights, |w, g| *w -= lr * g);
            for (b, gb) in layer.biases.iter_mut().zip(&g.biases) {
                *b -= lr * gb;
            }
        }
    }

    /// Total number of parameters.
    pub fn param_count(&self) -> usize {
        let cnn: usize = self
            .cnn
            .iter()
            .map(|l| {
                l.kernels
                    .iter()
                    .map(|ks| ks.iter().map(|k| k.len()).sum::<usize>())
                    .sum::<usize>()
                    + l.biases.len()
            })
            .sum();
        let mlp: usize = self.mlp.iter().map(|l| l.weights.len() + l.biases.len()).sum();
        cnn + mlp
    }

    /// All parameters in canonical order: CNN layers (per neuron: its
    /// kernels row-major, then its bias), then MLP layers (per neuron: its
    /// weight row, then its bias).
    pub fn flatten(&self) -> Vec<f64> {
        flatten_parts(&self.cnn, &self.mlp)
    }

    /// Writes a flat parameter vector (in [`CompactCnn::flatten`] order)
    /// back into the network.
    pub fn assign_flat(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.param_count() {
            return Err(Error::DimensionMismatch {
                what: "flat parameter vector".into(),
                expected_width: self.param_count(),
                expected_height: 1,
                found_width: values.len(),
                found_height: 1,
            });
        }
        let mut it = values.iter();
        let mut next = || *it.next().expect("length checked");
        for layer in &mut self.cnn {
            for (ks, b) in layer.kernels.iter_mut().zip(&mut layer.biases) {
                for k in ks {
                    for w in k.iter_mut() {
                        *w = next();
                    }
                }
                *b = next();
            }
        }
        for layer in &mut self.mlp {
            let n_out = layer.biases.len();
            for k in 0..n_out {
                for w in layer.weights.row_mut(k) {
                    *w = next();
                }
                layer.biases[k] = next();
            }
        }
        Ok(())
    }
}
