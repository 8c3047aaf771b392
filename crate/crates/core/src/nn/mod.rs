//! Minimal dense neural network stack: affine+ReLU composition with exact
//! reverse-mode gradients, Adam, and a tanh-squashed Gaussian policy head.
//!
//! Shapes are batch-major: inputs are `(batch, features)`. Everything is
//! `f64`; training is bit-reproducible for a fixed seed.

mod adam;
mod gaussian;

pub use adam::{AdamScalar, AdamState};
pub use gaussian::{
    gaussian_policy_sample, sample_gradients, GaussianSample, SquashBounds, LOG_STD_MAX,
    LOG_STD_MIN,
};

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// One affine layer, `y = x W^T + b`, with `w` stored `(out, in)`.
#[derive(Debug, Clone)]
pub struct Dense {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

/// Fully connected network with ReLU on every layer except the last.
#[derive(Debug, Clone)]
pub struct Mlp {
    layers: Vec<Dense>,
}

/// Activations recorded by [`Mlp::forward_batch`]; `inputs[l]` is what
/// layer `l` consumed (the raw input for `l = 0`, post-ReLU otherwise).
pub struct ForwardCache {
    inputs: Vec<Array2<f64>>,
}

/// Per-layer parameter gradients, shaped like the network.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<(Array2<f64>, Array1<f64>)>,
}

impl Gradients {
    pub fn zeros_like(mlp: &Mlp) -> Gradients {
        Gradients {
            layers: mlp
                .layers
                .iter()
                .map(|l| (Array2::zeros(l.w.dim()), Array1::zeros(l.b.len())))
                .collect(),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for (w, b) in &mut self.layers {
            w.mapv_inplace(|v| v * factor);
            b.mapv_inplace(|v| v * factor);
        }
    }

    pub fn add(&mut self, other: &Gradients) {
        for ((w, b), (ow, ob)) in self.layers.iter_mut().zip(&other.layers) {
            *w += ow;
            *b += ob;
        }
    }
}

impl Mlp {
    /// Glorot-uniform initialization; biases start at zero. Layer widths
    /// include input and output, e.g. `[58, 64, 64, 4]`.
    pub fn new(widths: &[usize], rng: &mut impl Rng) -> Mlp {
        assert!(widths.len() >= 2, "need at least input and output widths");
        assert!(widths.iter().all(|&w| w > 0), "zero-width layer");
        let layers = widths
            .windows(2)
            .map(|pair| {
                let (fan_in, fan_out) = (pair[0], pair[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let mut w = Array2::zeros((fan_out, fan_in));
                for v in w.iter_mut() {
                    *v = rng.random_range(-limit..limit);
                }
                Dense {
                    w,
                    b: Array1::zeros(fan_out),
                }
            })
            .collect();
        Mlp { layers }
    }

    /// All-zero parameters; useful as a degenerate fixture.
    pub fn zeros(widths: &[usize]) -> Mlp {
        assert!(widths.len() >= 2);
        Mlp {
            layers: widths
                .windows(2)
                .map(|p| Dense {
                    w: Array2::zeros((p[1], p[0])),
                    b: Array1::zeros(p[1]),
                })
                .collect(),
        }
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.layers[0].w.ncols()];
        w.extend(self.layers.iter().map(|l| l.w.nrows()));
        w
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().w.nrows()
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Batched forward pass with the cache needed for [`Mlp::backward`].
    pub fn forward_batch(&self, x: ArrayView2<f64>) -> (Array2<f64>, ForwardCache) {
        assert_eq!(
            x.ncols(),
            self.input_dim(),
            "input width {} does not match first layer {}",
            x.ncols(),
            self.input_dim()
        );
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut current = x.to_owned();
        for (i, layer) in self.layers.iter().enumerate() {
            inputs.push(current.clone());
            let mut z = current.dot(&layer.w.t());
            z += &layer.b;
            if i + 1 < self.layers.len() {
                z.mapv_inplace(|v| v.max(0.0));
            }
            current = z;
        }
        (current, ForwardCache { inputs })
    }

    /// Single-sample forward pass without keeping the cache.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let input = ArrayView2::from_shape((1, x.len()), x).expect("contiguous input");
        let (out, _) = self.forward_batch(input);
        out.row(0).to_vec()
    }

    /// Exact reverse-mode gradients of the scalar loss whose output
    /// gradient is `d_out`. Returns parameter gradients and the gradient
    /// with respect to the input batch.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        d_out: ArrayView2<f64>,
    ) -> (Gradients, Array2<f64>) {
        self.backward_impl(cache, d_out, true)
    }

    /// Gradient with respect to the input batch only; parameters are not
    /// differentiated. Used when a frozen network sits inside a larger loss.
    pub fn input_gradient(&self, cache: &ForwardCache, d_out: ArrayView2<f64>) -> Array2<f64> {
        self.backward_impl(cache, d_out, false).1
    }

    fn backward_impl(
        &self,
        cache: &ForwardCache,
        d_out: ArrayView2<f64>,
        with_params: bool,
    ) -> (Gradients, Array2<f64>) {
        assert_eq!(
            cache.inputs.len(),
            self.layers.len(),
            "cache does not match this network"
        );
        assert_eq!(
            cache.inputs[0].ncols(),
            self.input_dim(),
            "cache does not match this network input"
        );
        assert_eq!(d_out.ncols(), self.output_dim(), "output gradient width");
        assert_eq!(
            d_out.nrows(),
            cache.inputs[0].nrows(),
            "output gradient batch size"
        );

        let mut grads = Vec::with_capacity(self.layers.len());
        let mut delta = d_out.to_owned();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let input = &cache.inputs[l];
            if with_params {
                let dw = delta.t().dot(input);
                let db = delta.sum_axis(Axis(0));
                grads.push((dw, db));
            }
            let mut dx = delta.dot(&layer.w);
            if l > 0 {
                // the stored input of layer l is the post-ReLU output of
                // layer l-1: only positive entries pass gradient
                ndarray::Zip::from(&mut dx)
                    .and(&cache.inputs[l])
                    .for_each(|d, &a| {
                        if a <= 0.0 {
                            *d = 0.0;
                        }
                    });
            }
            delta = dx;
        }
        grads.reverse();
        (Gradients { layers: grads }, delta)
    }
}

/// Serialization DTO with an explicit layout, so checkpoints stay readable
/// independently of the in-memory representation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MlpDto {
    pub widths: Vec<usize>,
    /// row-major `(out, in)` weight matrices, one per layer
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Mlp {
    pub fn to_dto(&self) -> MlpDto {
        MlpDto {
            widths: self.widths(),
            weights: self
                .layers
                .iter()
                .map(|l| l.w.iter().copied().collect())
                .collect(),
            biases: self.layers.iter().map(|l| l.b.to_vec()).collect(),
        }
    }

    pub fn from_dto(dto: &MlpDto) -> Result<Mlp, String> {
        if dto.widths.len() < 2 {
            return Err("checkpoint must contain at least two widths".to_string());
        }
        if dto.weights.len() != dto.widths.len() - 1 || dto.biases.len() != dto.weights.len() {
            return Err("layer count mismatch in checkpoint".to_string());
        }
        let mut layers = Vec::new();
        for (i, pair) in dto.widths.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            if dto.weights[i].len() != fan_in * fan_out || dto.biases[i].len() != fan_out {
                return Err(format!("layer {i} has inconsistent shapes"));
            }
            layers.push(Dense {
                w: Array2::from_shape_vec((fan_out, fan_in), dto.weights[i].clone())
                    .map_err(|e| e.to_string())?,
                b: Array1::from_vec(dto.biases[i].clone()),
            });
        }
        Ok(Mlp { layers })
    }
}
