//! Small fully-connected network: rectifier on hidden layers, identity output.

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{fmt_exact, parse_exact, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T: Scalar> {
    inputs: usize,
    outputs: usize,
    /// `outputs x inputs`, row-major.
    weights: Vec<T>,
    bias: Vec<T>,
}

impl<T: Scalar> Dense<T> {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![T::zero(); inputs * outputs],
            bias: vec![T::zero(); outputs],
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn weight(&self, out: usize, inp: usize) -> T {
        self.weights[out * self.inputs + inp]
    }

    pub fn weights_mut(&mut self) -> &mut [T] {
        &mut self.weights
    }

    pub fn bias_mut(&mut self) -> &mut [T] {
        &mut self.bias
    }

    fn apply(&self, x: &[T], out: &mut Vec<T>) {
        // One-hot grid inputs are mostly zero; skip those columns.
        let active: Vec<usize> = (0..self.inputs).filter(|&i| x[i] != T::zero()).collect();
        out.clear();
        out.extend(self.bias.iter().enumerate().map(|(o, b)| {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            active.iter().fold(*b, |acc, &i| acc + row[i] * x[i])
        }));
    }
}

/// Activations recorded by [`Mlp::forward_cached`], one vector per layer
/// boundary; entry 0 is the input.
#[derive(Debug, Clone, Default)]
pub struct Activations<T> {
    layers: Vec<Vec<T>>,
}

impl<T: Scalar> Activations<T> {
    pub fn output(&self) -> &[T] {
        self.layers.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T: Scalar> {
    layers: Vec<Dense<T>>,
}

impl<T: Scalar> Mlp<T> {
    /// All-zero network with the given layer sizes, input first.
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Config(format!("bad layer sizes {sizes:?}")));
        }
        Ok(Mlp {
            layers: sizes.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
        })
    }

    /// Uniform init in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn glorot<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        let mut net = Mlp::zeros(sizes)?;
        for layer in &mut net.layers {
            let limit = (6.0 / (layer.inputs + layer.outputs) as f64).sqrt();
            for w in &mut layer.weights {
                *w = T::of(rng.gen_range(-limit..limit));
            }
        }
        Ok(net)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.layers[0].inputs];
        sizes.extend(self.layers.iter().map(|l| l.outputs));
        sizes
    }

    pub fn input_len(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_len(&self) -> usize {
        self.layers.last().expect("at least one layer").outputs
    }

    pub fn layers(&self) -> &[Dense<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense<T>] {
        &mut self.layers
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Flat view over every parameter: each layer's weights, then its biases.
    pub fn parameters_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }

    pub fn parameters(&self) -> impl Iterator<Item = &T> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(l.bias.iter()))
    }

    pub fn is_finite(&self) -> bool {
        self.parameters().all(|p| p.is_finite())
    }

    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        Ok(self.forward_cached(x)?.layers.pop().unwrap_or_default())
    }

    pub fn forward_cached(&self, x: &[T]) -> Result<Activations<T>> {
        if x.len() != self.input_len() {
            return Err(Error::Dimension {
                expected: self.input_len(),
                actual: x.len(),
            });
        }
        let mut layers = Vec::with_capacity(self.layers.len() + 1);
        layers.push(x.to_vec());
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::with_capacity(layer.outputs);
            layer.apply(layers.last().expect("input pushed"), &mut out);
            if i < last {
                for v in &mut out {
                    *v = v.max(T::zero());
                }
            }
            layers.push(out);
        }
        Ok(Activations { layers })
    }

    /// Adds `d loss / d params` into `grad`, given `d loss / d output`.
    pub fn accumulate_gradient(&self, acts: &Activations<T>, d_output: &[T], grad: &mut Mlp<T>) {
        let mut delta = d_output.to_vec();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &acts.layers[i];
            let g = &mut grad.layers[i];
            let active: Vec<usize> = (0..layer.inputs).filter(|&j| input[j] != T::zero()).collect();
            for (o, d) in delta.iter().enumerate() {
                if *d == T::zero() {
                    continue;
                }
                g.bias[o] += *d;
                let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for &j in &active {
                    row[j] += *d * input[j];
                }
            }
            if i == 0 {
                break;
            }
            // Back through the weights, then the rectifier of the layer below.
            let mut below = vec![T::zero(); layer.inputs];
            for (o, d) in delta.iter().enumerate() {
                if *d == T::zero() {
                    continue;
                }
                let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (b, w) in below.iter_mut().zip(row) {
                    *b += *d * *w;
                }
            }
            for (b, a) in below.iter_mut().zip(input) {
                if *a <= T::zero() {
                    *b = T::zero();
                }
            }
            delta = below;
        }
    }

    /// `self -= step * grad`.
    pub fn descend(&mut self, grad: &Mlp<T>, step: T) {
        for (p, g) in self.parameters_mut().zip(grad.parameters()) {
            *p -= step * *g;
        }
    }

    pub fn zero_like(&self) -> Mlp<T> {
        Mlp {
            layers: self.layers.iter().map(|l| Dense::zeros(l.inputs, l.outputs)).collect(),
        }
    }

    /// `mlp <sizes...>` header, then per layer one line per weight row
    /// followed by one bias line.
    pub fn to_snapshot(&self) -> String {
        let mut out = String::from("mlp");
        for s in self.sizes() {
            let _ = write!(out, " {s}");
        }
        out.push('\n');
        for layer in &self.layers {
            for row in layer.weights.chunks(layer.inputs).chain(std::iter::once(layer.bias.as_slice())) {
                let line: Vec<String> = row.iter().map(|v| fmt_exact(*v)).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
        }
        out
    }

    pub fn from_snapshot(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Snapshot(format!("network: {msg}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty"))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("mlp") {
            return Err(bad("missing `mlp` header"));
        }
        let sizes: Vec<usize> = fields
            .map(|f| f.parse().map_err(|_| bad("bad layer size")))
            .collect::<Result<_>>()?;
        let mut net = Mlp::zeros(&sizes)?;
        for layer in &mut net.layers {
            let inputs = layer.inputs;
            let rows = layer.weights.chunks_mut(inputs).chain(std::iter::once(layer.bias.as_mut_slice()));
            for row in rows {
                let line = lines.next().ok_or_else(|| bad("truncated"))?;
                let values: Vec<T> = line
                    .split_whitespace()
                    .map(|v| parse_exact(v).ok_or_else(|| bad("bad value")))
                    .collect::<Result<_>>()?;
                if values.len() != row.len() {
                    return Err(bad("row length mismatch"));
                }
                row.copy_from_slice(&values);
            }
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(bad("trailing data"));
        }
        Ok(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::<f64>::zeros(&[6, 5, 4]).unwrap();
        assert_eq!(net.forward(&[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn single_path_passes_weight_through() {
        let mut net = Mlp::<f64>::zeros(&[3, 2, 4]).unwrap();
        net.layers[0].weights[1] = 1.0; // hidden 0 <- input 1
        net.layers[1].weights[2 * 2] = 0.75; // output 2 <- hidden 0
        let y = net.forward(&[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(y, vec![0.0, 0.0, 0.75, 0.0]);
    }

    #[test]
    fn forward_is_bitwise_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = Mlp::<f32>::glorot(&[10, 8, 8, 4], &mut rng).unwrap();
        let x: Vec<f32> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a = net.forward(&x).unwrap();
        let b = net.forward(&x).unwrap();
        assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()));
    }

    #[test]
    fn input_length_is_checked() {
        let net = Mlp::<f64>::zeros(&[3, 4]).unwrap();
        assert!(matches!(net.forward(&[1.0]), Err(Error::Dimension { expected: 3, actual: 1 })));
        assert!(Mlp::<f64>::zeros(&[3]).is_err());
        assert!(Mlp::<f64>::zeros(&[3, 0, 4]).is_err());
    }

    #[test]
    fn glorot_respects_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Mlp::<f64>::glorot(&[400, 64, 64, 4], &mut rng).unwrap();
        let limit = (6.0f64 / 464.0).sqrt();
        assert!(net.layers[0].weights.iter().all(|w| w.abs() <= limit));
        assert!(net.layers[0].bias.iter().all(|b| *b == 0.0));
        assert_eq!(net.parameter_count(), 400 * 64 + 64 + 64 * 64 + 64 + 64 * 4 + 4);
    }

    #[test]
    fn snapshot_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = Mlp::<f64>::glorot(&[5, 3, 4], &mut rng).unwrap();
        let text = net.to_snapshot();
        assert!(text.starts_with("mlp 5 3 4\n"));
        assert_eq!(text.lines().count(), 1 + 3 + 1 + 4 + 1);
        assert_eq!(Mlp::<f64>::from_snapshot(&text).unwrap(), net);
        assert!(Mlp::<f64>::from_snapshot("mlp 5 3 4\n1 2").is_err());
    }
}
