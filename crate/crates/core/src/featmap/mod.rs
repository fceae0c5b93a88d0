//! Dense feature tensors, valid-mode convolution and cross-correlation, and the
//! fixed seeded feature extractor shared by the tracker and the scheduler.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{seed, Error, Result};

pub mod pnm;

/// Height x width x channels tensor, row-major with channels innermost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor3 {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

/// Frames are plain tensors with values in `[0, 1]`.
pub type Image = Tensor3;

impl Tensor3 {
    pub fn zeros(height: usize, width: usize, channels: usize) -> Tensor3 {
        Tensor3 { height, width, channels, data: vec![0.0; height * width * channels] }
    }

    pub fn from_vec(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Tensor3> {
        if data.len() != height * width * channels {
            return Err(Error::ShapeMismatch(format!(
                "{}x{}x{} tensor needs {} values, got {}",
                height,
                width,
                channels,
                height * width * channels,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::ShapeMismatch("tensor data must be finite".into()));
        }
        Ok(Tensor3 { height, width, channels, data })
    }

    pub fn from_fn(height: usize, width: usize, channels: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Tensor3 {
        let mut data = Vec::with_capacity(height * width * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(y, x, c));
                }
            }
        }
        Tensor3 { height, width, channels, data }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn offset(&self, y: usize, x: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels + c
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f64 {
        self.data[self.offset(y, x, c)]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, c: usize, v: f64) {
        let i = self.offset(y, x, c);
        self.data[i] = v;
    }

    /// Channel vector at one spatial cell.
    #[inline]
    pub fn pixel(&self, y: usize, x: usize) -> &[f64] {
        let i = self.offset(y, x, 0);
        &self.data[i..i + self.channels]
    }

    pub fn crop(&self, y0: usize, x0: usize, height: usize, width: usize) -> Result<Tensor3> {
        if y0 + height > self.height || x0 + width > self.width || height == 0 || width == 0 {
            return Err(Error::ShapeMismatch(format!(
                "crop {}x{} at ({}, {}) outside {}x{}",
                height, width, y0, x0, self.height, self.width
            )));
        }
        let mut data = Vec::with_capacity(height * width * self.channels);
        for y in y0..y0 + height {
            let start = self.offset(y, x0, 0);
            data.extend_from_slice(&self.data[start..start + width * self.channels]);
        }
        Ok(Tensor3 { height, width, channels: self.channels, data })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    None,
}

/// Square-kernel convolution layer. Weights are laid out
/// `[out_channel][ky][kx][in_channel]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvLayer {
    pub kernel: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    pub stride: usize,
    pub activation: Activation,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl ConvLayer {
    pub fn new(
        kernel: usize,
        in_channels: usize,
        out_channels: usize,
        stride: usize,
        activation: Activation,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<ConvLayer> {
        if kernel % 2 == 0 || stride == 0 {
            return Err(Error::ShapeMismatch(format!("kernel {} must be odd and stride {} >= 1", kernel, stride)));
        }
        if weights.len() != out_channels * kernel * kernel * in_channels || bias.len() != out_channels {
            return Err(Error::ShapeMismatch("conv weight/bias count does not match layer shape".into()));
        }
        Ok(ConvLayer { kernel, in_channels, out_channels, stride, activation, weights, bias })
    }

    /// Gaussian weights with standard deviation `1/sqrt(fan_in)`; biases drawn at `bias_scale`.
    pub fn seeded(
        kernel: usize,
        in_channels: usize,
        out_channels: usize,
        stride: usize,
        activation: Activation,
        bias_scale: f64,
        rng: &mut impl Rng,
    ) -> ConvLayer {
        let fan_in = kernel * kernel * in_channels;
        let scale = 1.0 / (fan_in as f64).sqrt();
        let weights = (0..out_channels * fan_in).map(|_| rng.sample::<f64, _>(StandardNormal) * scale).collect();
        let bias = (0..out_channels).map(|_| rng.sample::<f64, _>(StandardNormal) * bias_scale).collect();
        ConvLayer { kernel, in_channels, out_channels, stride, activation, weights, bias }
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn output_dims(&self, height: usize, width: usize) -> Option<(usize, usize)> {
        if height < self.kernel || width < self.kernel {
            return None;
        }
        Some(((height - self.kernel) / self.stride + 1, (width - self.kernel) / self.stride + 1))
    }

    #[inline]
    fn weight_offset(&self, co: usize, ky: usize, kx: usize) -> usize {
        ((co * self.kernel + ky) * self.kernel + kx) * self.in_channels
    }
}

pub fn conv2d_valid(input: &Tensor3, layer: &ConvLayer) -> Result<Tensor3> {
    if input.channels != layer.in_channels {
        return Err(Error::ShapeMismatch(format!(
            "conv expects {} input channels, got {}",
            layer.in_channels, input.channels
        )));
    }
    let (oh, ow) = layer.output_dims(input.height, input.width).ok_or_else(|| {
        Error::ShapeMismatch(format!("input {}x{} smaller than kernel {}", input.height, input.width, layer.kernel))
    })?;
    let k = layer.kernel;
    let cin = layer.in_channels;
    let mut out = Tensor3::zeros(oh, ow, layer.out_channels);
    for oy in 0..oh {
        for ox in 0..ow {
            for co in 0..layer.out_channels {
                let mut acc = layer.bias[co];
                for ky in 0..k {
                    let row = input.offset(oy * layer.stride + ky, ox * layer.stride, 0);
                    let w = layer.weight_offset(co, ky, 0);
                    let xs = &input.data[row..row + k * cin];
                    let ws = &layer.weights[w..w + k * cin];
                    acc += dot(xs, ws);
                }
                if layer.activation == Activation::Relu && acc < 0.0 {
                    acc = 0.0;
                }
                let i = out.offset(oy, ox, co);
                out.data[i] = acc;
            }
        }
    }
    Ok(out)
}

/// Gradients of a convolution layer with respect to its parameters and input.
pub struct ConvGrads {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub input: Option<Tensor3>,
}

/// Backpropagates `grad_output` (taken after the activation) through `layer`.
/// `output` must be the forward result for `input`.
pub fn conv2d_backward(
    input: &Tensor3,
    layer: &ConvLayer,
    output: &Tensor3,
    grad_output: &Tensor3,
    want_input_grad: bool,
) -> ConvGrads {
    let k = layer.kernel;
    let cin = layer.in_channels;
    let mut gw = vec![0.0; layer.weights.len()];
    let mut gb = vec![0.0; layer.bias.len()];
    let mut gx = want_input_grad.then(|| Tensor3::zeros(input.height, input.width, input.channels));
    for oy in 0..output.height {
        for ox in 0..output.width {
            for co in 0..layer.out_channels {
                let mut g = grad_output.get(oy, ox, co);
                if layer.activation == Activation::Relu && output.get(oy, ox, co) <= 0.0 {
                    g = 0.0;
                }
                if g == 0.0 {
                    continue;
                }
                gb[co] += g;
                for ky in 0..k {
                    let row = input.offset(oy * layer.stride + ky, ox * layer.stride, 0);
                    let w = layer.weight_offset(co, ky, 0);
                    let xs = &input.data[row..row + k * cin];
                    for (gwi, xi) in gw[w..w + k * cin].iter_mut().zip(xs) {
                        *gwi += g * xi;
                    }
                    if let Some(gx) = gx.as_mut() {
                        let ws = &layer.weights[w..w + k * cin];
                        for (gxi, wi) in gx.data[row..row + k * cin].iter_mut().zip(ws) {
                            *gxi += g * wi;
                        }
                    }
                }
            }
        }
    }
    ConvGrads { weights: gw, bias: gb, input: gx }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense sliding-window correlation of `target` over `search`; one output channel.
pub fn cross_correlate(target: &Tensor3, search: &Tensor3) -> Result<Tensor3> {
    if target.channels != search.channels {
        return Err(Error::ShapeMismatch(format!(
            "target has {} channels, search has {}",
            target.channels, search.channels
        )));
    }
    if target.height > search.height || target.width > search.width {
        return Err(Error::ShapeMismatch(format!(
            "target {}x{} does not fit in search {}x{}",
            target.height, target.width, search.height, search.width
        )));
    }
    let rh = search.height - target.height + 1;
    let rw = search.width - target.width + 1;
    let mut out = Tensor3::zeros(rh, rw, 1);
    let row_len = target.width * target.channels;
    for oy in 0..rh {
        for ox in 0..rw {
            let mut acc = 0.0;
            for ty in 0..target.height {
                let t = target.offset(ty, 0, 0);
                let s = search.offset(oy + ty, ox, 0);
                acc += dot(&target.data[t..t + row_len], &search.data[s..s + row_len]);
            }
            out.data[oy * rw + ox] = acc;
        }
    }
    Ok(out)
}

/// Two-way softmax with max subtraction.
pub fn softmax2(logits: [f64; 2]) -> [f64; 2] {
    let m = logits[0].max(logits[1]);
    let e0 = (logits[0] - m).exp();
    let e1 = (logits[1] - m).exp();
    let s = e0 + e1;
    [e0 / s, e1 / s]
}

/// Fixed convolutional feature extractor. Deterministic in `(seed, input)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureExtractor {
    pub layers: Vec<ConvLayer>,
    pub seed: u64,
}

impl FeatureExtractor {
    /// Default extractor: 5x5x8 stride 2 then 3x3x16 stride 2, both relu,
    /// followed by a 1x1 identity layer whose bias removes each channel's mean
    /// response to seeded uniform noise.
    ///
    /// Relu features all have a positive mean, so raw correlation scores favour
    /// busy regions over the matching one; the offset removes most of that pull.
    /// Being pointwise, it commutes with cropping.
    pub fn new(seed: u64, in_channels: usize) -> FeatureExtractor {
        let mut rng = seed::rng(seed, &[0xfea7]);
        let mut layers = vec![
            ConvLayer::seeded(5, in_channels, 8, 2, Activation::Relu, 0.1, &mut rng),
            ConvLayer::seeded(3, 8, 16, 2, Activation::Relu, 0.1, &mut rng),
        ];
        let calibration = Tensor3::from_fn(96, 96, in_channels, |_, _, _| rng.random_range(0..256) as f64 / 255.0);
        let raw = extract_features(&calibration, &FeatureExtractor { layers: layers.clone(), seed }).expect("calibration frame fits");
        let (h, w, c) = raw.dims();
        let mut mean = vec![0.0; c];
        for px in raw.data.chunks_exact(c) {
            mean.iter_mut().zip(px).for_each(|(m, v)| *m += v);
        }
        let identity = (0..c * c).map(|i| if i % (c + 1) == 0 { 1.0 } else { 0.0 }).collect();
        let bias = mean.iter().map(|m| -m / (h * w) as f64).collect();
        layers.push(ConvLayer::new(1, c, c, 1, Activation::None, identity, bias).expect("valid 1x1 layer"));
        FeatureExtractor { layers, seed }
    }

    pub fn from_layers(seed: u64, layers: Vec<ConvLayer>) -> Result<FeatureExtractor> {
        if layers.is_empty() {
            return Err(Error::ShapeMismatch("extractor needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].out_channels != pair[1].in_channels {
                return Err(Error::ShapeMismatch("extractor layer channels do not chain".into()));
            }
        }
        Ok(FeatureExtractor { layers, seed })
    }

    pub fn in_channels(&self) -> usize {
        self.layers[0].in_channels
    }

    pub fn out_channels(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out_channels)
    }

    pub fn total_stride(&self) -> usize {
        self.layers.iter().map(|l| l.stride).product()
    }

    /// Side length in pixels of the input patch seen by one output cell.
    pub fn receptive_field(&self) -> usize {
        let mut rf = 1;
        let mut jump = 1;
        for l in &self.layers {
            rf += (l.kernel - 1) * jump;
            jump *= l.stride;
        }
        rf
    }

    /// Output grid size for a `height x width` frame, if it is large enough.
    pub fn output_dims(&self, height: usize, width: usize) -> Option<(usize, usize)> {
        self.layers.iter().try_fold((height, width), |(h, w), l| l.output_dims(h, w))
    }

    pub fn extract(&self, frame: &Image) -> Result<Tensor3> {
        extract_features(frame, self)
    }
}

/// Runs the extractor on a frame. Pixels are centered at 0.5 before the first layer.
pub fn extract_features(frame: &Image, fx: &FeatureExtractor) -> Result<Tensor3> {
    if frame.channels != fx.in_channels() {
        return Err(Error::ShapeMismatch(format!(
            "extractor expects {} channels, frame has {}",
            fx.in_channels(),
            frame.channels
        )));
    }
    if fx.output_dims(frame.height, frame.width).is_none() {
        return Err(Error::ImageTooSmall { height: frame.height, width: frame.width, min: fx.receptive_field() });
    }
    let centered = Tensor3 {
        height: frame.height,
        width: frame.width,
        channels: frame.channels,
        data: frame.data.iter().map(|v| v - 0.5).collect(),
    };
    fx.layers.iter().try_fold(centered, |x, layer| conv2d_valid(&x, layer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(h: usize, w: usize, c: usize, rng: &mut impl Rng) -> Tensor3 {
        Tensor3::from_fn(h, w, c, |_, _, _| rng.random_range(-1.0..1.0))
    }

    fn naive_conv(input: &Tensor3, l: &ConvLayer) -> Tensor3 {
        let oh = (input.height() - l.kernel) / l.stride + 1;
        let ow = (input.width() - l.kernel) / l.stride + 1;
        Tensor3::from_fn(oh, ow, l.out_channels, |oy, ox, co| {
            let mut s = l.bias[co];
            for ky in 0..l.kernel {
                for kx in 0..l.kernel {
                    for ci in 0..l.in_channels {
                        let w = l.weights[((co * l.kernel + ky) * l.kernel + kx) * l.in_channels + ci];
                        s += w * input.get(oy * l.stride + ky, ox * l.stride + kx, ci);
                    }
                }
            }
            match l.activation {
                Activation::Relu => s.max(0.0),
                Activation::None => s,
            }
        })
    }

    #[test]
    fn identity_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_tensor(5, 7, 1, &mut rng);
        let l = ConvLayer::new(1, 1, 1, 1, Activation::None, vec![1.0], vec![0.0]).unwrap();
        assert_eq!(conv2d_valid(&x, &l).unwrap(), x);
    }

    #[test]
    fn ones_kernel_sums() {
        let x = Tensor3::from_fn(3, 3, 1, |_, _, _| 1.0);
        let l = ConvLayer::new(3, 1, 1, 1, Activation::None, vec![1.0; 9], vec![0.0]).unwrap();
        let y = conv2d_valid(&x, &l).unwrap();
        assert_eq!(y.dims(), (1, 1, 1));
        assert_eq!(y.get(0, 0, 0), 9.0);
    }

    #[test]
    fn conv_matches_naive_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random_tensor(8, 8, 2, &mut rng);
        for (k, stride, act) in [(3, 1, Activation::None), (3, 2, Activation::Relu), (5, 1, Activation::Relu), (1, 3, Activation::None)] {
            let l = ConvLayer::seeded(k, 2, 3, stride, act, 0.5, &mut rng);
            let fast = conv2d_valid(&x, &l).unwrap();
            let slow = naive_conv(&x, &l);
            assert_eq!(fast.dims(), slow.dims());
            for (a, b) in fast.data().iter().zip(slow.data()) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn conv_shape_errors() {
        let x = Tensor3::zeros(2, 2, 1);
        let l = ConvLayer::new(3, 1, 1, 1, Activation::None, vec![0.0; 9], vec![0.0]).unwrap();
        assert!(matches!(conv2d_valid(&x, &l), Err(Error::ShapeMismatch(_))));
        let x = Tensor3::zeros(4, 4, 2);
        assert!(matches!(conv2d_valid(&x, &l), Err(Error::ShapeMismatch(_))));
        assert!(ConvLayer::new(2, 1, 1, 1, Activation::None, vec![0.0; 4], vec![0.0]).is_err());
    }

    #[test]
    fn conv_backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_tensor(7, 6, 2, &mut rng);
        let l = ConvLayer::seeded(3, 2, 2, 2, Activation::None, 0.3, &mut rng);
        let y = conv2d_valid(&x, &l).unwrap();
        // loss = sum(y * r) for a fixed random r
        let r = random_tensor(y.height(), y.width(), y.channels(), &mut rng);
        let loss = |l: &ConvLayer, x: &Tensor3| dot(conv2d_valid(x, l).unwrap().data(), r.data());
        let g = conv2d_backward(&x, &l, &y, &r, true);
        let h = 1e-6;
        for i in 0..l.weights.len() {
            let mut lp = l.clone();
            lp.weights[i] += h;
            let mut lm = l.clone();
            lm.weights[i] -= h;
            let num = (loss(&lp, &x) - loss(&lm, &x)) / (2.0 * h);
            assert!((num - g.weights[i]).abs() < 1e-6);
        }
        let gx = g.input.unwrap();
        for i in 0..x.data().len() {
            let mut xp = x.clone();
            xp.data_mut()[i] += h;
            let mut xm = x.clone();
            xm.data_mut()[i] -= h;
            let num = (loss(&l, &xp) - loss(&l, &xm)) / (2.0 * h);
            assert!((num - gx.data()[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn siamfc_response_shape() {
        let t = Tensor3::zeros(6, 6, 128);
        let s = Tensor3::zeros(22, 22, 128);
        assert_eq!(cross_correlate(&t, &s).unwrap().dims(), (17, 17, 1));
    }

    #[test]
    fn correlation_peaks_at_planted_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = random_tensor(12, 14, 3, &mut rng);
        let t = s.crop(4, 7, 5, 4).unwrap();
        let resp = cross_correlate(&t, &s).unwrap();
        let (mut best, mut at) = (f64::NEG_INFINITY, (0, 0));
        for y in 0..resp.height() {
            for x in 0..resp.width() {
                if resp.get(y, x, 0) > best {
                    best = resp.get(y, x, 0);
                    at = (y, x);
                }
            }
        }
        assert_eq!(at, (4, 7));
        // offset (0, 0) equals the dot product with the top-left window
        let tl = s.crop(0, 0, 5, 4).unwrap();
        assert!((resp.get(0, 0, 0) - dot(t.data(), tl.data())).abs() < 1e-12);
    }

    #[test]
    fn zero_target_zero_response() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = random_tensor(9, 9, 2, &mut rng);
        let r = cross_correlate(&Tensor3::zeros(3, 3, 2), &s).unwrap();
        assert!(r.data().iter().all(|&v| v == 0.0));
        assert!(cross_correlate(&Tensor3::zeros(10, 3, 2), &s).is_err());
        assert!(cross_correlate(&Tensor3::zeros(3, 3, 1), &s).is_err());
    }

    #[test]
    fn softmax_cases() {
        assert_eq!(softmax2([0.0, 0.0]), [0.5, 0.5]);
        let p = softmax2([1000.0, 0.0]);
        assert_eq!(p[0], 1.0);
        assert!(p[1] >= 0.0 && p[1] < 1e-300);
        for (x, c) in [(-3.0, 0.7), (12.0, -2.5), (0.0, 4.0)] {
            let p = softmax2([x, x + c]);
            assert!((p[1] - 1.0 / (1.0 + (-c as f64).exp())).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn softmax_normalized_and_shift_invariant(a in -50.0..50.0f64, b in -50.0..50.0f64, s in -100.0..100.0f64) {
            let p = softmax2([a, b]);
            prop_assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
            prop_assert!(p[0] > 0.0 && p[1] > 0.0);
            let q = softmax2([a + s, b + s]);
            prop_assert!((p[1] - q[1]).abs() < 1e-12);
        }

        #[test]
        fn conv_equals_reference_on_random_inputs(seed in 0u64..1000, h in 5usize..16, w in 5usize..16, c in 1usize..4, k in prop::sample::select(vec![1usize, 3, 5]), stride in 1usize..3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_tensor(h, w, c, &mut rng);
            let l = ConvLayer::seeded(k, c, 2, stride, Activation::Relu, 0.2, &mut rng);
            let fast = conv2d_valid(&x, &l).unwrap();
            let slow = naive_conv(&x, &l);
            for (a, b) in fast.data().iter().zip(slow.data()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn extractor_dims_and_determinism() {
        let fx = FeatureExtractor::new(5, 3);
        assert_eq!(fx.total_stride(), 4);
        assert_eq!(fx.receptive_field(), 9);
        assert_eq!(fx.output_dims(300, 500), Some((73, 123)));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let frame = Tensor3::from_fn(40, 52, 3, |_, _, _| rng.random_range(0.0..1.0));
        let a = fx.extract(&frame).unwrap();
        let b = FeatureExtractor::new(5, 3).extract(&frame).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dims(), (8, 11, 16));
        assert!(matches!(fx.extract(&Tensor3::zeros(8, 40, 3)), Err(Error::ImageTooSmall { .. })));
    }

    #[test]
    fn zero_frame_gives_constant_channels() {
        let fx = FeatureExtractor::new(1, 3);
        let f = fx.extract(&Tensor3::zeros(30, 30, 3)).unwrap();
        for c in 0..f.channels() {
            let v = f.get(0, 0, c);
            for y in 0..f.height() {
                for x in 0..f.width() {
                    assert_eq!(f.get(y, x, c), v);
                }
            }
        }
    }

    #[test]
    fn full_size_extraction_shape() {
        let fx = FeatureExtractor::new(0, 3);
        let f = fx.extract(&Tensor3::zeros(300, 500, 3)).unwrap();
        assert_eq!(f.dims(), (73, 123, 16));
    }
}
