//! Binary classification heads for countermeasure embeddings: plain
//! softmax, additive-margin softmax, and one-class softmax.
//!
//! Labels follow the convention bonafide = 0, spoof = 1. Each head maps a
//! batch of embeddings to a scalar loss (mean over the batch) and exposes
//! analytic gradients with respect to both the embeddings and its own
//! weight vectors, including the Jacobian of the L2 normalization used by
//! the margin-based variants. The margin heads differ in intent: AM-softmax
//! pulls *both* classes toward dedicated weight vectors, while OC-softmax
//! only anchors the bonafide class and pushes spoofs beyond a looser
//! margin, deliberately refusing to model spoof artifacts it has not seen.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::util::rng_for;

const NORM_EPS: f64 = 1e-12;

/// Numerically stable ln(1 + e^z).
pub fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Numerically stable logistic function.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn normalized(v: ArrayView1<f64>, what: &str) -> Result<(Array1<f64>, f64)> {
    let norm = v.dot(&v).sqrt();
    if norm < NORM_EPS {
        return Err(Error::ZeroNorm(what.to_string()));
    }
    Ok((v.mapv(|x| x / norm), norm))
}

/// Maps a gradient with respect to v/|v| back to a gradient with respect
/// to v: the normalization Jacobian removes the radial component and
/// divides by the norm.
fn through_norm(g_hat: &Array1<f64>, v_hat: &Array1<f64>, norm: f64) -> Array1<f64> {
    let radial = g_hat.dot(v_hat);
    (g_hat - &(v_hat * radial)) / norm
}

fn init_weight(dim: usize, seed: u64, label: &str) -> Array1<f64> {
    use rand::Rng;
    let mut rng = rng_for(seed, label);
    let bound = 1.0 / (dim as f64).sqrt();
    Array1::from_iter((0..dim).map(|_| rng.random_range(-bound..bound)))
}

#[derive(Debug, Clone, PartialEq)]
pub enum LossHead {
    Softmax {
        w0: Array1<f64>,
        w1: Array1<f64>,
    },
    AmSoftmax {
        w0: Array1<f64>,
        w1: Array1<f64>,
        alpha: f64,
        margin: f64,
    },
    OcSoftmax {
        w0: Array1<f64>,
        alpha: f64,
        m0: f64,
        m1: f64,
    },
}

/// Loss value plus gradients, in the same parameter order as
/// [`LossHead::params`].
#[derive(Debug, Clone)]
pub struct LossOutput {
    pub loss: f64,
    pub grad_x: Array2<f64>,
    pub grad_w: Vec<Array1<f64>>,
}

impl LossHead {
    pub fn new_softmax(dim: usize, seed: u64) -> Self {
        LossHead::Softmax {
            w0: init_weight(dim, seed, "loss.w0"),
            w1: init_weight(dim, seed, "loss.w1"),
        }
    }

    pub fn new_am_softmax(dim: usize, alpha: f64, margin: f64, seed: u64) -> Result<Self> {
        if alpha <= 0.0 || !alpha.is_finite() {
            return Err(Error::Parse(format!("alpha must be positive, got {alpha}")));
        }
        if !(-1.0..=1.0).contains(&margin) {
            return Err(Error::Parse(format!(
                "margin must lie in [-1, 1], got {margin}"
            )));
        }
        Ok(LossHead::AmSoftmax {
            w0: init_weight(dim, seed, "loss.w0"),
            w1: init_weight(dim, seed, "loss.w1"),
            alpha,
            margin,
        })
    }

    pub fn new_oc_softmax(dim: usize, alpha: f64, m0: f64, m1: f64, seed: u64) -> Result<Self> {
        if alpha <= 0.0 || !alpha.is_finite() {
            return Err(Error::Parse(format!("alpha must be positive, got {alpha}")));
        }
        if !(-1.0..=1.0).contains(&m0) || !(-1.0..=1.0).contains(&m1) || m0 <= m1 {
            return Err(Error::InvalidMargins { m0, m1 });
        }
        Ok(LossHead::OcSoftmax {
            w0: init_weight(dim, seed, "loss.w0"),
            alpha,
            m0,
            m1,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            LossHead::Softmax { w0, .. }
            | LossHead::AmSoftmax { w0, .. }
            | LossHead::OcSoftmax { w0, .. } => w0.len(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LossHead::Softmax { .. } => "softmax",
            LossHead::AmSoftmax { .. } => "am_softmax",
            LossHead::OcSoftmax { .. } => "oc_softmax",
        }
    }

    /// Weight vectors in a stable order, paired with names for the
    /// optimizer state.
    pub fn params(&self) -> Vec<(&'static str, &Array1<f64>)> {
        match self {
            LossHead::Softmax { w0, w1 } | LossHead::AmSoftmax { w0, w1, .. } => {
                vec![("head.w0", w0), ("head.w1", w1)]
            }
            LossHead::OcSoftmax { w0, .. } => vec![("head.w0", w0)],
        }
    }

    pub fn params_mut(&mut self) -> Vec<(&'static str, &mut Array1<f64>)> {
        match self {
            LossHead::Softmax { w0, w1 } | LossHead::AmSoftmax { w0, w1, .. } => {
                vec![("head.w0", w0), ("head.w1", w1)]
            }
            LossHead::OcSoftmax { w0, .. } => vec![("head.w0", w0)],
        }
    }

    fn check_batch(&self, x: &Array2<f64>, labels: &[usize]) -> Result<()> {
        if x.nrows() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} embeddings vs {} labels",
                x.nrows(),
                labels.len()
            )));
        }
        if x.ncols() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "embedding dim {} vs head dim {}",
                x.ncols(),
                self.dim()
            )));
        }
        if x.nrows() == 0 {
            return Err(Error::EmptyBatch);
        }
        if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::ShapeMismatch(format!("label {bad} out of range")));
        }
        Ok(())
    }

    /// Mean loss over the batch with gradients for the embeddings and the
    /// head weights.
    pub fn forward(&self, x: &Array2<f64>, labels: &[usize]) -> Result<LossOutput> {
        self.check_batch(x, labels)?;
        let n = x.nrows();
        let scale = 1.0 / n as f64;
        let mut grad_x = Array2::zeros(x.dim());
        let mut loss = 0.0;

        match self {
            LossHead::Softmax { w0, w1 } => {
                let mut g0 = Array1::zeros(w0.len());
                let mut g1 = Array1::zeros(w1.len());
                for (i, &y) in labels.iter().enumerate() {
                    let xi = x.row(i);
                    // z = (w_{1-y} - w_y) . x
                    let diff = if y == 0 { w1 - w0 } else { w0 - w1 };
                    let z = diff.dot(&xi);
                    loss += softplus(z) * scale;
                    let g = sigmoid(z) * scale;
                    grad_x.row_mut(i).assign(&(&diff * g));
                    let gx = xi.mapv(|v| v * g);
                    if y == 0 {
                        g1 += &gx;
                        g0 -= &gx;
                    } else {
                        g0 += &gx;
                        g1 -= &gx;
                    }
                }
                Ok(LossOutput {
                    loss,
                    grad_x,
                    grad_w: vec![g0, g1],
                })
            }
            LossHead::AmSoftmax { w0, w1, alpha, margin } => {
                let (w0h, n0) = normalized(w0.view(), "am-softmax w0")?;
                let (w1h, n1) = normalized(w1.view(), "am-softmax w1")?;
                let mut g0h = Array1::zeros(w0.len());
                let mut g1h = Array1::zeros(w1.len());
                for (i, &y) in labels.iter().enumerate() {
                    let (xh, nx) = normalized(x.row(i), "embedding")?;
                    // z = alpha * (m - (w_y - w_{1-y})^ . x^)
                    let diff = if y == 0 { &w0h - &w1h } else { &w1h - &w0h };
                    let z = alpha * (margin - diff.dot(&xh));
                    loss += softplus(z) * scale;
                    let g = sigmoid(z) * scale;
                    // d z / d x^ = -alpha * diff
                    let gxh = diff.mapv(|v| -alpha * g * v);
                    grad_x.row_mut(i).assign(&through_norm(&gxh, &xh, nx));
                    // d z / d w_y^ = -alpha x^, d z / d w_{1-y}^ = +alpha x^
                    let gw = xh.mapv(|v| alpha * g * v);
                    if y == 0 {
                        g0h -= &gw;
                        g1h += &gw;
                    } else {
                        g1h -= &gw;
                        g0h += &gw;
                    }
                }
                Ok(LossOutput {
                    loss,
                    grad_x,
                    grad_w: vec![
                        through_norm(&g0h, &w0h, n0),
                        through_norm(&g1h, &w1h, n1),
                    ],
                })
            }
            LossHead::OcSoftmax { w0, alpha, m0, m1 } => {
                let (w0h, n0) = normalized(w0.view(), "oc-softmax w0")?;
                let mut g0h = Array1::zeros(w0.len());
                for (i, &y) in labels.iter().enumerate() {
                    let (xh, nx) = normalized(x.row(i), "embedding")?;
                    let cos = w0h.dot(&xh);
                    // bonafide is pulled above m0, spoof pushed below m1:
                    // z = alpha (m_y - cos) (-1)^y
                    let (z, dz_dcos) = if y == 0 {
                        (alpha * (m0 - cos), -alpha)
                    } else {
                        (alpha * (cos - m1), *alpha)
                    };
                    loss += softplus(z) * scale;
                    let g = sigmoid(z) * scale;
                    let gxh = w0h.mapv(|v| g * dz_dcos * v);
                    grad_x.row_mut(i).assign(&through_norm(&gxh, &xh, nx));
                    g0h += &xh.mapv(|v| g * dz_dcos * v);
                }
                Ok(LossOutput {
                    loss,
                    grad_x,
                    grad_w: vec![through_norm(&g0h, &w0h, n0)],
                })
            }
        }
    }

    /// Countermeasure score for one embedding; higher means more bonafide.
    pub fn score(&self, x: ArrayView1<f64>) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "embedding dim {} vs head dim {}",
                x.len(),
                self.dim()
            )));
        }
        match self {
            LossHead::Softmax { w0, w1 } => Ok((w0 - w1).dot(&x)),
            LossHead::AmSoftmax { w0, w1, .. } => {
                let (w0h, _) = normalized(w0.view(), "am-softmax w0")?;
                let (w1h, _) = normalized(w1.view(), "am-softmax w1")?;
                let (xh, _) = normalized(x, "embedding")?;
                Ok((&w0h - &w1h).dot(&xh))
            }
            LossHead::OcSoftmax { w0, .. } => {
                let (w0h, _) = normalized(w0.view(), "oc-softmax w0")?;
                let (xh, _) = normalized(x, "embedding")?;
                Ok(w0h.dot(&xh))
            }
        }
    }

    // --- serialization ---------------------------------------------------

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(HEAD_MAGIC);
        buf.extend_from_slice(&HEAD_VERSION.to_le_bytes());
        let (variant, scalars): (u8, Vec<f64>) = match self {
            LossHead::Softmax { .. } => (0, vec![]),
            LossHead::AmSoftmax { alpha, margin, .. } => (1, vec![*alpha, *margin]),
            LossHead::OcSoftmax { alpha, m0, m1, .. } => (2, vec![*alpha, *m0, *m1]),
        };
        buf.push(variant);
        buf.extend_from_slice(&(self.dim() as u32).to_le_bytes());
        for s in scalars {
            buf.extend_from_slice(&s.to_le_bytes());
        }
        for (_, w) in self.params() {
            for &v in w {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        buf
    }

    pub fn from_bytes(raw: &[u8]) -> Result<Self> {
        let bad = |why: &str| Error::InvalidCheckpoint(format!("loss head: {why}"));
        let mut pos = 0usize;
        let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
            let s = raw.get(*pos..*pos + n).ok_or_else(|| bad("truncated"))?;
            *pos += n;
            Ok(s)
        };
        if take(&mut pos, 8)? != HEAD_MAGIC {
            return Err(bad("bad magic"));
        }
        let version = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
        if version != HEAD_VERSION {
            return Err(bad("unsupported version"));
        }
        let variant = take(&mut pos, 1)?[0];
        let dim = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
        let f64_at = |pos: &mut usize| -> Result<f64> {
            Ok(f64::from_le_bytes(take(pos, 8)?.try_into().unwrap()))
        };
        let weight = |pos: &mut usize| -> Result<Array1<f64>> {
            let mut w = Array1::zeros(dim);
            for i in 0..dim {
                w[i] = f64::from_le_bytes(take(pos, 8)?.try_into().unwrap());
            }
            Ok(w)
        };
        let head = match variant {
            0 => LossHead::Softmax {
                w0: weight(&mut pos)?,
                w1: weight(&mut pos)?,
            },
            1 => {
                let alpha = f64_at(&mut pos)?;
                let margin = f64_at(&mut pos)?;
                LossHead::AmSoftmax {
                    alpha,
                    margin,
                    w0: weight(&mut pos)?,
                    w1: weight(&mut pos)?,
                }
            }
            2 => {
                let alpha = f64_at(&mut pos)?;
                let m0 = f64_at(&mut pos)?;
                let m1 = f64_at(&mut pos)?;
                LossHead::OcSoftmax {
                    alpha,
                    m0,
                    m1,
                    w0: weight(&mut pos)?,
                }
            }
            v => return Err(bad(&format!("unknown variant {v}"))),
        };
        if pos != raw.len() {
            return Err(bad("trailing bytes"));
        }
        Ok(head)
    }
}

const HEAD_MAGIC: &[u8; 8] = b"SPCMHEAD";
const HEAD_VERSION: u32 = 1;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::rng_for;
    use ndarray::array;
    use rand::Rng;

    fn unit(dir: &[f64]) -> Array1<f64> {
        let v = Array1::from_vec(dir.to_vec());
        let n = v.dot(&v).sqrt();
        v / n
    }

    #[test]
    fn stable_softplus_and_sigmoid() {
        assert!((softplus(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((softplus(-1.0) - 0.313_261_687_5).abs() < 1e-9);
        assert!((softplus(3.0) - 3.048_587_351_6).abs() < 1e-9);
        // large arguments must not overflow or vanish
        assert_eq!(softplus(800.0), 800.0);
        assert_eq!(softplus(-800.0), 0.0);
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert!((sigmoid(2.0) + sigmoid(-2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn softmax_frozen_values() {
        // w0 = e0, w1 = e1, x = e0: bonafide z = -1, spoof z = +1
        let head = LossHead::Softmax {
            w0: array![1.0, 0.0],
            w1: array![0.0, 1.0],
        };
        let x = array![[1.0, 0.0]];
        let bona = head.forward(&x, &[0]).unwrap().loss;
        assert!((bona - 0.313_261_687_5).abs() < 1e-9);
        let spoof = head.forward(&x, &[1]).unwrap().loss;
        assert!((spoof - 1.313_261_687_5).abs() < 1e-9);
        // equal weights: z = 0 regardless of input, loss = ln 2
        let head = LossHead::Softmax {
            w0: array![0.3, -0.2],
            w1: array![0.3, -0.2],
        };
        let l = head.forward(&array![[5.0, 7.0]], &[1]).unwrap().loss;
        assert!((l - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn am_softmax_frozen_values() {
        // orthonormal weights, x along w0, alpha 2, margin 0.5:
        // bonafide z = 2(0.5 - 1) = -1, spoof z = 2(0.5 + 1) = 3
        let head = LossHead::AmSoftmax {
            w0: array![1.0, 0.0],
            w1: array![0.0, 1.0],
            alpha: 2.0,
            margin: 0.5,
        };
        let x = array![[3.0, 0.0]]; // normalization makes scale irrelevant
        let bona = head.forward(&x, &[0]).unwrap().loss;
        assert!((bona - 0.313_261_687_5).abs() < 1e-9);
        let spoof = head.forward(&x, &[1]).unwrap().loss;
        assert!((spoof - 3.048_587_351_6).abs() < 1e-9);
    }

    #[test]
    fn oc_softmax_frozen_values() {
        // alpha 1, m0 0.9, m1 0.2; bonafide at cos=1: softplus(-0.1);
        // spoof at cos=0: softplus(-0.2)
        let head = LossHead::OcSoftmax {
            w0: array![2.0, 0.0], // normalized internally
            alpha: 1.0,
            m0: 0.9,
            m1: 0.2,
        };
        let bona = head.forward(&array![[1.0, 0.0]], &[0]).unwrap().loss;
        assert!((bona - 0.644_396_660_8).abs() < 1e-9);
        let spoof = head.forward(&array![[0.0, 1.0]], &[1]).unwrap().loss;
        assert!((spoof - 0.598_138_869_5).abs() < 1e-9);
    }

    #[test]
    fn oc_margins_act_in_opposite_directions() {
        let head = LossHead::OcSoftmax {
            w0: array![1.0, 0.0],
            alpha: 20.0,
            m0: 0.9,
            m1: 0.2,
        };
        // a bonafide embedding aligned with w0 is cheap, one against it dear
        let aligned = head.forward(&array![[1.0, 0.0]], &[0]).unwrap().loss;
        let opposed = head.forward(&array![[-1.0, 0.0]], &[0]).unwrap().loss;
        assert!(aligned < 0.2 && opposed > 30.0);
        // and vice versa for spoof
        let sp_aligned = head.forward(&array![[1.0, 0.0]], &[1]).unwrap().loss;
        let sp_opposed = head.forward(&array![[-1.0, 0.0]], &[1]).unwrap().loss;
        assert!(sp_opposed < 0.2 && sp_aligned > 14.0);
    }

    #[test]
    fn rejects_bad_margins_and_alpha() {
        assert!(matches!(
            LossHead::new_oc_softmax(4, 20.0, 0.2, 0.9, 1),
            Err(Error::InvalidMargins { .. })
        ));
        assert!(matches!(
            LossHead::new_oc_softmax(4, 20.0, 1.5, 0.2, 1),
            Err(Error::InvalidMargins { .. })
        ));
        assert!(LossHead::new_oc_softmax(4, -1.0, 0.9, 0.2, 1).is_err());
        assert!(LossHead::new_am_softmax(4, 20.0, 1.2, 1).is_err());
        assert!(LossHead::new_am_softmax(4, 20.0, 0.9, 1).is_ok());
    }

    #[test]
    fn rejects_zero_norm_embeddings() {
        let head = LossHead::new_oc_softmax(3, 20.0, 0.9, 0.2, 1).unwrap();
        let x = Array2::zeros((1, 3));
        assert!(matches!(
            head.forward(&x, &[0]),
            Err(Error::ZeroNorm(_))
        ));
    }

    #[test]
    fn rejects_shape_and_label_errors() {
        let head = LossHead::new_softmax(3, 1);
        assert!(head.forward(&Array2::zeros((2, 3)), &[0]).is_err());
        assert!(head.forward(&Array2::zeros((1, 4)), &[0]).is_err());
        assert!(head
            .forward(&Array2::from_elem((1, 3), 1.0), &[2])
            .is_err());
    }

    #[test]
    fn score_orders_by_alignment() {
        let head = LossHead::OcSoftmax {
            w0: unit(&[1.0, 1.0, 0.0]),
            alpha: 20.0,
            m0: 0.9,
            m1: 0.2,
        };
        let near = head.score(array![1.0, 0.9, 0.1].view()).unwrap();
        let far = head.score(array![-1.0, 0.2, 3.0].view()).unwrap();
        assert!(near > far);
        // oc score is a cosine: bounded by [-1, 1]
        assert!(near <= 1.0 + 1e-12 && far >= -1.0 - 1e-12);
    }

    /// Central-difference check of every gradient the head reports.
    fn gradient_check(head: &LossHead, x: &Array2<f64>, labels: &[usize]) {
        let h = 1e-5;
        let out = head.forward(x, labels).unwrap();
        let mut analytic: Vec<f64> = Vec::new();
        let mut numeric: Vec<f64> = Vec::new();

        for i in 0..x.nrows() {
            for j in 0..x.ncols() {
                analytic.push(out.grad_x[[i, j]]);
                let mut xp = x.clone();
                xp[[i, j]] += h;
                let lp = head.forward(&xp, labels).unwrap().loss;
                let mut xm = x.clone();
                xm[[i, j]] -= h;
                let lm = head.forward(&xm, labels).unwrap().loss;
                numeric.push((lp - lm) / (2.0 * h));
            }
        }
        for (k, (_, w)) in head.params().iter().enumerate() {
            for j in 0..w.len() {
                analytic.push(out.grad_w[k][j]);
                let mut hp = head.clone();
                hp.params_mut()[k].1[j] += h;
                let lp = hp.forward(x, labels).unwrap().loss;
                let mut hm = head.clone();
                hm.params_mut()[k].1[j] -= h;
                let lm = hm.forward(x, labels).unwrap().loss;
                numeric.push((lp - lm) / (2.0 * h));
            }
        }

        let diff: f64 = analytic
            .iter()
            .zip(&numeric)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let scale: f64 = numeric.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rel = diff / scale.max(1e-12);
        assert!(rel < 1e-6, "gradient mismatch: rel err {rel:.3e}");
    }

    fn random_batch(n: usize, d: usize, seed: u64) -> (Array2<f64>, Vec<usize>) {
        let mut rng = rng_for(seed, "losses.fd");
        // keep coordinates away from zero so embedding norms stay healthy
        let x = Array2::from_shape_fn((n, d), |_| {
            let mag: f64 = rng.random_range(0.2..2.0);
            if rng.random::<bool>() {
                mag
            } else {
                -mag
            }
        });
        let labels = (0..n).map(|_| usize::from(rng.random::<bool>())).collect();
        (x, labels)
    }

    #[test]
    fn softmax_gradients_match_finite_differences() {
        for seed in 0..8 {
            let (x, labels) = random_batch(5, 7, seed);
            gradient_check(&LossHead::new_softmax(7, seed + 100), &x, &labels);
        }
    }

    #[test]
    fn am_softmax_gradients_match_finite_differences() {
        for (i, &margin) in [0.9, 0.3].iter().enumerate() {
            for seed in 0..6 {
                let (x, labels) = random_batch(4, 6, seed + 10 * i as u64);
                let head =
                    LossHead::new_am_softmax(6, 20.0, margin, seed + 200).unwrap();
                gradient_check(&head, &x, &labels);
            }
        }
    }

    #[test]
    fn oc_softmax_gradients_match_finite_differences() {
        for (i, &(m0, m1)) in [(0.9, 0.3), (0.5, 0.2)].iter().enumerate() {
            for seed in 0..6 {
                let (x, labels) = random_batch(4, 6, seed + 10 * i as u64);
                let head =
                    LossHead::new_oc_softmax(6, 20.0, m0, m1, seed + 300).unwrap();
                gradient_check(&head, &x, &labels);
            }
        }
    }

    #[test]
    fn blob_round_trip() {
        for head in [
            LossHead::new_softmax(5, 4),
            LossHead::new_am_softmax(5, 20.0, 0.9, 4).unwrap(),
            LossHead::new_oc_softmax(5, 20.0, 0.9, 0.2, 4).unwrap(),
        ] {
            let raw = head.to_bytes();
            let back = LossHead::from_bytes(&raw).unwrap();
            assert_eq!(head, back);
        }
    }

    #[test]
    fn blob_rejects_corruption() {
        let head = LossHead::new_oc_softmax(5, 20.0, 0.9, 0.2, 4).unwrap();
        let mut raw = head.to_bytes();
        raw[0] = b'x';
        assert!(LossHead::from_bytes(&raw).is_err());
        let raw = head.to_bytes();
        assert!(LossHead::from_bytes(&raw[..raw.len() - 1]).is_err());
        let mut raw = head.to_bytes();
        raw.push(0);
        assert!(LossHead::from_bytes(&raw).is_err());
    }
}
