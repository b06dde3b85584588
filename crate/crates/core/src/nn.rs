//! Dense multilayer perceptrons with exact reverse-mode gradients and Adam.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative expressed through the activation output `y`.
    fn grad_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn code(self) -> u8 {
        match self {
            Activation::Tanh => 0,
            Activation::Relu => 1,
        }
    }

    fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(Activation::Tanh),
            1 => Some(Activation::Relu),
            _ => None,
        }
    }
}

/// Layer widths (input first, output last) and one activation per hidden
/// layer. The output layer is linear.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpSpec {
    pub widths: Vec<usize>,
    pub activations: Vec<Activation>,
}

impl MlpSpec {
    pub fn new(widths: Vec<usize>, activations: Vec<Activation>) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::Precondition("an MLP needs at least two layers"));
        }
        if widths.iter().any(|&w| w == 0) {
            return Err(Error::Precondition("layer widths must be positive"));
        }
        check_len("hidden activations", widths.len() - 2, activations.len())?;
        Ok(Self { widths, activations })
    }

    /// Every hidden layer uses `act`.
    pub fn uniform(widths: Vec<usize>, act: Activation) -> Result<Self> {
        let hidden = widths.len().saturating_sub(2);
        Self::new(widths, vec![act; hidden])
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        self.widths[self.widths.len() - 1]
    }

    pub fn num_layers(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn num_params(&self) -> usize {
        self.widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// (weight offset, bias offset) of layer `l`. Weights are out × in, row-major.
    fn offsets(&self, l: usize) -> (usize, usize) {
        let start: usize = self.widths[..=l].windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        (start, start + self.widths[l] * self.widths[l + 1])
    }
}

/// Activations of every layer from one forward pass, input included.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    pub layers: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        &self.layers[self.layers.len() - 1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub spec: MlpSpec,
    pub params: Vec<f64>,
}

impl Mlp {
    pub fn zeros(spec: MlpSpec) -> Self {
        let n = spec.num_params();
        Self { spec, params: vec![0.0; n] }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng + ?Sized>(spec: MlpSpec, rng: &mut R) -> Self {
        let mut net = Self::zeros(spec);
        for l in 0..net.spec.num_layers() {
            let (fan_in, fan_out) = (net.spec.widths[l], net.spec.widths[l + 1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let (w, b) = net.spec.offsets(l);
            for p in &mut net.params[w..b] {
                *p = rng.random_range(-limit..limit);
            }
        }
        net
    }

    pub fn from_params(spec: MlpSpec, params: Vec<f64>) -> Result<Self> {
        check_len("parameters", spec.num_params(), params.len())?;
        Ok(Self { spec, params })
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    /// Scales the weights of the output layer, e.g. to start near zero.
    pub fn scale_output_layer(&mut self, factor: f64) {
        let l = self.spec.num_layers() - 1;
        let (w, b) = self.spec.offsets(l);
        for p in &mut self.params[w..b] {
            *p *= factor;
        }
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mut cache = self.forward_cached(input)?;
        Ok(cache.layers.pop().unwrap_or_default())
    }

    pub fn forward_cached(&self, input: &[f64]) -> Result<ForwardCache> {
        check_len("network input", self.spec.input_dim(), input.len())?;
        let n = self.spec.num_layers();
        let mut layers = Vec::with_capacity(n + 1);
        layers.push(input.to_vec());
        for l in 0..n {
            let (fan_in, fan_out) = (self.spec.widths[l], self.spec.widths[l + 1]);
            let (w, b) = self.spec.offsets(l);
            let x = &layers[l];
            let mut y = self.params[b..b + fan_out].to_vec();
            for (o, yo) in y.iter_mut().enumerate() {
                let row = &self.params[w + o * fan_in..w + (o + 1) * fan_in];
                *yo += row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
            }
            if l + 1 < n {
                let act = self.spec.activations[l];
                y.iter_mut().for_each(|v| *v = act.apply(*v));
            }
            layers.push(y);
        }
        Ok(ForwardCache { layers })
    }

    /// Accumulates dL/dparams into `grads` given dL/doutput, and returns
    /// dL/dinput.
    pub fn backward(&self, cache: &ForwardCache, upstream: &[f64], grads: &mut [f64]) -> Result<Vec<f64>> {
        check_len("upstream gradient", self.spec.output_dim(), upstream.len())?;
        check_len("gradient buffer", self.num_params(), grads.len())?;
        check_len("cached layers", self.spec.widths.len(), cache.layers.len())?;
        let n = self.spec.num_layers();
        let mut delta = upstream.to_vec();
        for l in (0..n).rev() {
            let (fan_in, fan_out) = (self.spec.widths[l], self.spec.widths[l + 1]);
            let (w, b) = self.spec.offsets(l);
            if l + 1 < n {
                let act = self.spec.activations[l];
                for (d, y) in delta.iter_mut().zip(&cache.layers[l + 1]) {
                    *d *= act.grad_from_output(*y);
                }
            }
            let x = &cache.layers[l];
            let mut next = vec![0.0; fan_in];
            for o in 0..fan_out {
                let d = delta[o];
                grads[b + o] += d;
                if d == 0.0 {
                    continue;
                }
                let row = w + o * fan_in;
                for i in 0..fan_in {
                    grads[row + i] += d * x[i];
                    next[i] += d * self.params[row + i];
                }
            }
            delta = next;
        }
        Ok(delta)
    }

    /// Checkpoint bytes: magic, version, layer count, widths, activation
    /// codes, then parameters as little-endian f64 in row-major order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 4 * self.spec.widths.len() + 8 * self.params.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.spec.widths.len() as u32).to_le_bytes());
        for &w in &self.spec.widths {
            out.extend_from_slice(&(w as u32).to_le_bytes());
        }
        out.extend(self.spec.activations.iter().map(|a| a.code()));
        for p in &self.params {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("bad magic"));
        }
        if r.u32()? != VERSION {
            return Err(Error::Format("unsupported version"));
        }
        let layers = r.u32()? as usize;
        if !(2..=1024).contains(&layers) {
            return Err(Error::Format("implausible layer count"));
        }
        let widths = (0..layers).map(|_| r.u32().map(|w| w as usize)).collect::<Result<Vec<_>>>()?;
        let activations = r
            .take(layers - 2)?
            .iter()
            .map(|&c| Activation::from_code(c).ok_or(Error::Format("unknown activation code")))
            .collect::<Result<Vec<_>>>()?;
        let spec = MlpSpec::new(widths, activations).map_err(|_| Error::Format("invalid layer widths"))?;
        let n = spec.num_params();
        let raw = r.take(n.checked_mul(8).ok_or(Error::Format("parameter count overflow"))?)?;
        if r.pos != bytes.len() {
            return Err(Error::Format("trailing bytes"));
        }
        let params = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(Self { spec, params })
    }
}

const MAGIC: &[u8; 4] = b"MLPW";
const VERSION: u32 = 1;

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or(Error::Format("truncated checkpoint"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Adam optimizer state for one parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl Adam {
    pub fn new(num_params: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            step: 0,
        }
    }

    pub fn update(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        check_len("parameters", self.m.len(), params.len())?;
        check_len("gradients", self.m.len(), grads.len())?;
        self.step += 1;
        let t = self.step as f64;
        let c1 = 1.0 - self.beta1.powf(t);
        let c2 = 1.0 - self.beta2.powf(t);
        for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + self.eps);
        }
        Ok(())
    }
}

/// Max relative error between `analytic` and central differences of `loss`
/// over every parameter.
pub fn gradient_check<F>(params: &[f64], analytic: &[f64], h: f64, mut loss: F) -> f64
where
    F: FnMut(&[f64]) -> f64,
{
    let mut p = params.to_vec();
    let mut worst = 0.0f64;
    for i in 0..p.len() {
        let orig = p[i];
        p[i] = orig + h;
        let up = loss(&p);
        p[i] = orig - h;
        let down = loss(&p);
        p[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        let scale = numeric.abs().max(analytic[i].abs()).max(1e-6);
        worst = worst.max((numeric - analytic[i]).abs() / scale);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_net(widths: &[usize], act: Activation, seed: u64) -> Mlp {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = Mlp::init(MlpSpec::uniform(widths.to_vec(), act).unwrap(), &mut rng);
        for p in &mut net.params {
            *p += rng.random_range(-0.1..0.1);
        }
        net
    }

    #[test]
    fn zero_weights_output_bias() {
        let mut net = Mlp::zeros(MlpSpec::uniform(vec![3, 2], Activation::Tanh).unwrap());
        let n = net.num_params();
        net.params[n - 2] = 0.5;
        net.params[n - 1] = -1.5;
        assert_eq!(net.forward(&[1.0, 2.0, 3.0]).unwrap(), vec![0.5, -1.5]);
    }

    #[test]
    fn identity_layer() {
        let mut net = Mlp::zeros(MlpSpec::uniform(vec![3, 3], Activation::Tanh).unwrap());
        for i in 0..3 {
            net.params[i * 3 + i] = 1.0;
        }
        assert_eq!(net.forward(&[0.3, -2.0, 7.0]).unwrap(), vec![0.3, -2.0, 7.0]);
    }

    #[test]
    fn forward_matches_straight_line_evaluation() {
        let net = random_net(&[4, 5, 3, 2], Activation::Tanh, 1);
        let x = [0.2, -0.7, 1.1, 0.05];
        let p = &net.params;
        let mut idx = 0;
        let mut take = |n: usize| {
            let s = p[idx..idx + n].to_vec();
            idx += n;
            s
        };
        let (w1, b1) = (take(20), take(5));
        let (w2, b2) = (take(15), take(3));
        let (w3, b3) = (take(6), take(2));
        let h1: Vec<f64> = (0..5)
            .map(|o| (b1[o] + (0..4).map(|i| w1[o * 4 + i] * x[i]).sum::<f64>()).tanh())
            .collect();
        let h2: Vec<f64> = (0..3)
            .map(|o| (b2[o] + (0..5).map(|i| w2[o * 5 + i] * h1[i]).sum::<f64>()).tanh())
            .collect();
        let y: Vec<f64> = (0..2)
            .map(|o| b3[o] + (0..3).map(|i| w3[o * 3 + i] * h2[i]).sum::<f64>())
            .collect();
        let got = net.forward(&x).unwrap();
        for (a, b) in got.iter().zip(&y) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let net = random_net(&[3, 4, 2], Activation::Tanh, 0);
        assert!(matches!(net.forward(&[1.0]), Err(Error::Shape { .. })));
        let cache = net.forward_cached(&[1.0, 2.0, 3.0]).unwrap();
        let mut g = vec![0.0; net.num_params()];
        assert!(net.backward(&cache, &[1.0], &mut g).is_err());
        assert!(MlpSpec::uniform(vec![3], Activation::Tanh).is_err());
        assert!(MlpSpec::uniform(vec![3, 0, 1], Activation::Tanh).is_err());
    }

    #[test]
    fn linear_scalar_gradient_is_input() {
        let net = Mlp::from_params(MlpSpec::uniform(vec![1, 1], Activation::Tanh).unwrap(), vec![0.7, 0.1]).unwrap();
        let cache = net.forward_cached(&[2.5]).unwrap();
        let mut g = vec![0.0; 2];
        let dx = net.backward(&cache, &[1.0], &mut g).unwrap();
        assert_eq!(g, vec![2.5, 1.0]);
        assert_eq!(dx, vec![0.7]);
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let net = random_net(&[3, 6, 2], Activation::Tanh, 4);
        let cache = net.forward_cached(&[0.1, 0.2, 0.3]).unwrap();
        let mut g = vec![0.0; net.num_params()];
        net.backward(&cache, &[0.0, 0.0], &mut g).unwrap();
        assert!(g.iter().all(|&x| x == 0.0));
    }

    fn check_net(widths: &[usize], act: Activation, seed: u64) -> f64 {
        let net = random_net(widths, act, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        let x: Vec<f64> = (0..widths[0]).map(|_| rng.random_range(-1.0..1.0)).collect();
        let target: Vec<f64> = (0..*widths.last().unwrap()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let loss_of = |p: &[f64]| {
            let n = Mlp::from_params(net.spec.clone(), p.to_vec()).unwrap();
            let y = n.forward(&x).unwrap();
            0.5 * y.iter().zip(&target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
        };
        let cache = net.forward_cached(&x).unwrap();
        let upstream: Vec<f64> = cache.output().iter().zip(&target).map(|(a, b)| a - b).collect();
        let mut g = vec![0.0; net.num_params()];
        net.backward(&cache, &upstream, &mut g).unwrap();
        gradient_check(&net.params, &g, 1e-5, loss_of)
    }

    #[test]
    fn gradients_match_central_differences() {
        assert!(check_net(&[3, 5, 2], Activation::Tanh, 1) < 1e-4);
        assert!(check_net(&[6, 8, 8, 3], Activation::Tanh, 2) < 1e-4);
        assert!(check_net(&[4, 7, 2], Activation::Relu, 3) < 1e-4);
    }

    #[test]
    fn gradients_match_at_full_width() {
        assert!(check_net(&[10, 64, 64, 64, 4], Activation::Tanh, 9) < 1e-4);
    }

    #[test]
    fn input_gradient_matches_central_differences() {
        let net = random_net(&[4, 6, 3], Activation::Tanh, 7);
        let x = [0.3, -0.2, 0.9, -1.4];
        let cache = net.forward_cached(&x).unwrap();
        let mut g = vec![0.0; net.num_params()];
        let dx = net.backward(&cache, &[1.0, -2.0, 0.5], &mut g).unwrap();
        let err = gradient_check(&x, &dx, 1e-5, |xi| {
            let y = net.forward(xi).unwrap();
            y[0] - 2.0 * y[1] + 0.5 * y[2]
        });
        assert!(err < 1e-4);
    }

    #[test]
    fn adam_zero_gradient_is_noop() {
        let mut p = vec![1.0, -2.0];
        let mut opt = Adam::new(2, 0.1);
        opt.update(&mut p, &[0.0, 0.0]).unwrap();
        assert_eq!(p, vec![1.0, -2.0]);
        assert_eq!(opt.step, 1);
    }

    #[test]
    fn adam_minimizes_quadratic() {
        let mut x = vec![1.0];
        let mut opt = Adam::new(1, 0.05);
        for _ in 0..200 {
            let g = [2.0 * x[0]];
            opt.update(&mut x, &g).unwrap();
        }
        assert!(x[0].abs() < 0.05, "{}", x[0]);
    }

    #[test]
    fn identical_runs_identical_trajectories() {
        let run = || {
            let mut net = random_net(&[2, 4, 1], Activation::Tanh, 11);
            let mut opt = Adam::new(net.num_params(), 0.01);
            for k in 0..20 {
                let x = [k as f64 * 0.1, 1.0];
                let cache = net.forward_cached(&x).unwrap();
                let mut g = vec![0.0; net.num_params()];
                net.backward(&cache, &[cache.output()[0] - 1.0], &mut g).unwrap();
                opt.update(&mut net.params, &g).unwrap();
            }
            net.params
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn checkpoint_round_trip() {
        let spec = MlpSpec::new(vec![3, 5, 4, 2], vec![Activation::Tanh, Activation::Relu]).unwrap();
        let net = Mlp::init(spec, &mut ChaCha8Rng::seed_from_u64(3));
        let bytes = net.to_bytes();
        assert_eq!(&bytes[..4], b"MLPW");
        assert_eq!(Mlp::from_bytes(&bytes).unwrap(), net);
        assert!(Mlp::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert_eq!(Mlp::from_bytes(&bad), Err(Error::Format("bad magic")));
    }

    proptest! {
        #[test]
        fn tanh_net_finite_on_bounded_inputs(x in prop::collection::vec(-1e3f64..1e3, 5), seed in 0u64..50) {
            let net = random_net(&[5, 16, 16, 3], Activation::Tanh, seed);
            let y = net.forward(&x).unwrap();
            prop_assert!(y.iter().all(|v| v.is_finite()));
        }
    }
}
