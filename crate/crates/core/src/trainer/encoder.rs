//! A small strided 2-D convolution stack over the T×60 feature map,
//! mean-over-time pooling, and a linear projection to the embedding.
//!
//! Everything is written out by hand — forward, backward, and
//! initialization — so the whole training path stays dependency-free and
//! checkable against finite differences. The map is laid out as
//! (channels, time, freq); each block halves time and freq with stride 2
//! under "same" padding, so arbitrary frame counts survive the stack.

use ndarray::{Array1, Array2, Array3, Array4, ArrayView1, ArrayView2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::util::rng_for;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvBlockSpec {
    pub channels: usize,
    pub kernel: usize,
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncoderConfig {
    /// Feature dimension of each input frame (the freq axis).
    pub input_dim: usize,
    pub blocks: Vec<ConvBlockSpec>,
    pub embed_dim: usize,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            input_dim: crate::frontend::FEATURE_DIM,
            blocks: vec![
                ConvBlockSpec { channels: 8, kernel: 3, stride: 2 },
                ConvBlockSpec { channels: 16, kernel: 3, stride: 2 },
            ],
            embed_dim: 256,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.embed_dim == 0 {
            return Err(Error::Parse("encoder dims must be positive".into()));
        }
        for (i, b) in self.blocks.iter().enumerate() {
            if b.channels == 0 || b.stride == 0 {
                return Err(Error::Parse(format!(
                    "encoder block {i}: channels and stride must be positive"
                )));
            }
            if b.kernel == 0 || b.kernel % 2 == 0 {
                return Err(Error::Parse(format!(
                    "encoder block {i}: kernel must be odd (got {})",
                    b.kernel
                )));
            }
        }
        Ok(())
    }

    /// Spatial extent after same-padded striding.
    fn strided(n: usize, stride: usize) -> usize {
        (n - 1) / stride + 1
    }

    /// Length of the pooled vector feeding the projection.
    pub fn flat_dim(&self) -> usize {
        let mut w = self.input_dim;
        let mut c = 1;
        for b in &self.blocks {
            w = Self::strided(w, b.stride);
            c = b.channels;
        }
        c * w
    }
}

#[derive(Debug, Clone)]
struct ConvBlock {
    /// (out_channels, in_channels, kernel, kernel)
    w: Array4<f64>,
    b: Array1<f64>,
    stride: usize,
}

#[derive(Debug, Clone)]
pub struct Encoder {
    cfg: EncoderConfig,
    blocks: Vec<ConvBlock>,
    proj_w: Array2<f64>,
    proj_b: Array1<f64>,
}

/// Intermediate maps kept from a forward pass for the backward pass.
pub struct ForwardCache {
    /// Input to each block; index 0 is the (1, T, W) feature map.
    block_inputs: Vec<Array3<f64>>,
    /// tanh output of each block.
    block_outputs: Vec<Array3<f64>>,
    pooled: Array1<f64>,
}

/// Parameter gradients accumulated over a batch.
pub struct EncoderGrads {
    pub blocks: Vec<(Array4<f64>, Array1<f64>)>,
    pub proj_w: Array2<f64>,
    pub proj_b: Array1<f64>,
}

impl Encoder {
    /// Initializes all parameters uniformly in ±1/√fan_in from a stream
    /// derived from `seed`, drawn in a fixed tensor order.
    pub fn new(cfg: EncoderConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = rng_for(seed, "encoder");
        let mut draw = |n: usize, bound: f64| -> Vec<f64> {
            (0..n).map(|_| rng.random_range(-bound..bound)).collect()
        };
        let mut blocks = Vec::with_capacity(cfg.blocks.len());
        let mut cin = 1;
        for spec in &cfg.blocks {
            let k = spec.kernel;
            let bound = 1.0 / ((cin * k * k) as f64).sqrt();
            let w = Array4::from_shape_vec(
                (spec.channels, cin, k, k),
                draw(spec.channels * cin * k * k, bound),
            )
            .expect("shape matches draw count");
            let b = Array1::from_vec(draw(spec.channels, bound));
            blocks.push(ConvBlock { w, b, stride: spec.stride });
            cin = spec.channels;
        }
        let flat = cfg.flat_dim();
        let bound = 1.0 / (flat as f64).sqrt();
        let proj_w = Array2::from_shape_vec(
            (cfg.embed_dim, flat),
            draw(cfg.embed_dim * flat, bound),
        )
        .expect("shape matches draw count");
        let proj_b = Array1::from_vec(draw(cfg.embed_dim, bound));
        Ok(Encoder { cfg, blocks, proj_w, proj_b })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.cfg
    }

    pub fn embed_dim(&self) -> usize {
        self.cfg.embed_dim
    }

    /// Forward pass over one utterance's T×W feature map.
    pub fn forward(&self, feats: ArrayView2<'_, f64>) -> Result<(Array1<f64>, ForwardCache)> {
        let (t, w) = feats.dim();
        if w != self.cfg.input_dim {
            return Err(Error::ShapeMismatch(format!(
                "encoder expects {} feature dims, got {w}",
                self.cfg.input_dim
            )));
        }
        if t == 0 {
            return Err(Error::ShapeMismatch("encoder input has zero frames".into()));
        }
        let mut x = Array3::zeros((1, t, w));
        x.index_axis_mut(ndarray::Axis(0), 0).assign(&feats);

        let mut block_inputs = Vec::with_capacity(self.blocks.len());
        let mut block_outputs = Vec::with_capacity(self.blocks.len());
        for block in &self.blocks {
            let y = conv2d_same(&x, &block.w, &block.b, block.stride);
            let a = y.mapv(f64::tanh);
            block_inputs.push(x);
            block_outputs.push(a.clone());
            x = a;
        }

        // mean over the time axis, flattened channel-major
        let (c, h, wo) = x.dim();
        let mut pooled = Array1::zeros(c * wo);
        for ci in 0..c {
            for j in 0..wo {
                let mut acc = 0.0;
                for i in 0..h {
                    acc += x[(ci, i, j)];
                }
                pooled[ci * wo + j] = acc / h as f64;
            }
        }

        let embedding = self.proj_w.dot(&pooled) + &self.proj_b;
        if embedding.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "embedding (input {t}×{w}, first bad index {})",
                embedding.iter().position(|v| !v.is_finite()).unwrap()
            )));
        }
        // keep the final activation map for pooling backward
        block_inputs.push(x);
        Ok((embedding, ForwardCache { block_inputs, block_outputs, pooled }))
    }

    /// Accumulates parameter gradients for one item into `grads` and
    /// returns the gradient with respect to the input feature map.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        d_embed: ArrayView1<'_, f64>,
        grads: &mut EncoderGrads,
    ) -> Array2<f64> {
        // projection
        for (i, &g) in d_embed.iter().enumerate() {
            grads.proj_b[i] += g;
            for (j, &p) in cache.pooled.iter().enumerate() {
                grads.proj_w[(i, j)] += g * p;
            }
        }
        let d_flat = self.proj_w.t().dot(&d_embed);

        // un-pool: split the mean over time evenly
        let last = cache.block_inputs.last().expect("forward stored final map");
        let (c, h, wo) = last.dim();
        let mut d_a = Array3::zeros((c, h, wo));
        for ci in 0..c {
            for j in 0..wo {
                let g = d_flat[ci * wo + j] / h as f64;
                for i in 0..h {
                    d_a[(ci, i, j)] = g;
                }
            }
        }

        for (bi, block) in self.blocks.iter().enumerate().rev() {
            let a = &cache.block_outputs[bi];
            let x = &cache.block_inputs[bi];
            // through tanh
            let d_y = &d_a * &a.mapv(|v| 1.0 - v * v);
            let (dw, db, dx) = conv2d_backward(x, &block.w, block.stride, &d_y);
            grads.blocks[bi].0 += &dw;
            grads.blocks[bi].1 += &db;
            d_a = dx;
        }

        let (_, t, w) = cache.block_inputs[0].dim();
        let mut d_input = Array2::zeros((t, w));
        d_input.assign(&d_a.index_axis(ndarray::Axis(0), 0));
        d_input
    }

    pub fn zero_grads(&self) -> EncoderGrads {
        EncoderGrads {
            blocks: self
                .blocks
                .iter()
                .map(|b| (Array4::zeros(b.w.dim()), Array1::zeros(b.b.dim())))
                .collect(),
            proj_w: Array2::zeros(self.proj_w.dim()),
            proj_b: Array1::zeros(self.proj_b.dim()),
        }
    }

    /// Named parameter tensors as flat slices, in a fixed order shared
    /// with `grads_flat` and the checkpoint layout.
    pub fn tensors_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out: Vec<(String, &mut [f64])> = Vec::new();
        for (i, b) in self.blocks.iter_mut().enumerate() {
            out.push((format!("enc.block{i}.w"), b.w.as_slice_mut().unwrap()));
            out.push((format!("enc.block{i}.b"), b.b.as_slice_mut().unwrap()));
        }
        out.push(("enc.proj.w".into(), self.proj_w.as_slice_mut().unwrap()));
        out.push(("enc.proj.b".into(), self.proj_b.as_slice_mut().unwrap()));
        out
    }

    pub fn tensors(&self) -> Vec<(String, &[f64])> {
        let mut out: Vec<(String, &[f64])> = Vec::new();
        for (i, b) in self.blocks.iter().enumerate() {
            out.push((format!("enc.block{i}.w"), b.w.as_slice().unwrap()));
            out.push((format!("enc.block{i}.b"), b.b.as_slice().unwrap()));
        }
        out.push(("enc.proj.w".into(), self.proj_w.as_slice().unwrap()));
        out.push(("enc.proj.b".into(), self.proj_b.as_slice().unwrap()));
        out
    }

    /// Rebuilds an encoder from checkpointed tensors (same order as
    /// `tensors`).
    pub fn from_tensors(cfg: EncoderConfig, tensors: Vec<Vec<f64>>) -> Result<Self> {
        cfg.validate()?;
        let expected = cfg.blocks.len() * 2 + 2;
        if tensors.len() != expected {
            return Err(Error::InvalidCheckpoint(format!(
                "encoder expects {expected} tensors, got {}",
                tensors.len()
            )));
        }
        let mut it = tensors.into_iter();
        let mut take = |shape_len: usize, what: &str| -> Result<Vec<f64>> {
            let v = it.next().expect("count checked above");
            if v.len() != shape_len {
                return Err(Error::InvalidCheckpoint(format!(
                    "{what}: expected {shape_len} values, got {}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidCheckpoint(format!("{what}: non-finite value")));
            }
            Ok(v)
        };
        let mut blocks = Vec::with_capacity(cfg.blocks.len());
        let mut cin = 1;
        for (i, spec) in cfg.blocks.iter().enumerate() {
            let k = spec.kernel;
            let w = Array4::from_shape_vec(
                (spec.channels, cin, k, k),
                take(spec.channels * cin * k * k, &format!("enc.block{i}.w"))?,
            )
            .expect("length checked");
            let b = Array1::from_vec(take(spec.channels, &format!("enc.block{i}.b"))?);
            blocks.push(ConvBlock { w, b, stride: spec.stride });
            cin = spec.channels;
        }
        let flat = cfg.flat_dim();
        let proj_w = Array2::from_shape_vec(
            (cfg.embed_dim, flat),
            take(cfg.embed_dim * flat, "enc.proj.w")?,
        )
        .expect("length checked");
        let proj_b = Array1::from_vec(take(cfg.embed_dim, "enc.proj.b")?);
        Ok(Encoder { cfg, blocks, proj_w, proj_b })
    }
}

/// Same-padded strided 2-D convolution: pad = (k−1)/2 on both axes, so
/// the output extent is ⌈n/stride⌉.
fn conv2d_same(
    x: &Array3<f64>,
    w: &Array4<f64>,
    b: &Array1<f64>,
    stride: usize,
) -> Array3<f64> {
    let (cin, h, wd) = x.dim();
    let (cout, _, k, _) = w.dim();
    let pad = (k - 1) / 2;
    let ho = (h - 1) / stride + 1;
    let wo = (wd - 1) / stride + 1;
    let mut y = Array3::zeros((cout, ho, wo));
    for o in 0..cout {
        for i in 0..ho {
            for j in 0..wo {
                let mut acc = b[o];
                for c in 0..cin {
                    for u in 0..k {
                        let m = (i * stride + u) as isize - pad as isize;
                        if m < 0 || m >= h as isize {
                            continue;
                        }
                        for v in 0..k {
                            let n = (j * stride + v) as isize - pad as isize;
                            if n < 0 || n >= wd as isize {
                                continue;
                            }
                            acc += w[(o, c, u, v)] * x[(c, m as usize, n as usize)];
                        }
                    }
                }
                y[(o, i, j)] = acc;
            }
        }
    }
    y
}

/// Gradients of `conv2d_same` with respect to weights, bias, and input.
fn conv2d_backward(
    x: &Array3<f64>,
    w: &Array4<f64>,
    stride: usize,
    d_y: &Array3<f64>,
) -> (Array4<f64>, Array1<f64>, Array3<f64>) {
    let (cin, h, wd) = x.dim();
    let (cout, _, k, _) = w.dim();
    let pad = (k - 1) / 2;
    let (_, ho, wo) = d_y.dim();
    let mut dw = Array4::zeros(w.dim());
    let mut db = Array1::zeros(cout);
    let mut dx = Array3::zeros(x.dim());
    for o in 0..cout {
        for i in 0..ho {
            for j in 0..wo {
                let g = d_y[(o, i, j)];
                if g == 0.0 {
                    continue;
                }
                db[o] += g;
                for c in 0..cin {
                    for u in 0..k {
                        let m = (i * stride + u) as isize - pad as isize;
                        if m < 0 || m >= h as isize {
                            continue;
                        }
                        for v in 0..k {
                            let n = (j * stride + v) as isize - pad as isize;
                            if n < 0 || n >= wd as isize {
                                continue;
                            }
                            let (m, n) = (m as usize, n as usize);
                            dw[(o, c, u, v)] += g * x[(c, m, n)];
                            dx[(c, m, n)] += g * w[(o, c, u, v)];
                        }
                    }
                }
            }
        }
    }
    (dw, db, dx)
}
