use super::arch::{Activation, ArchSpec};
use crate::error::{Error, Result};
use crate::tensor::Rng;

/// One dense layer: `y = W x + b`, `W` stored row-major as `outputs × inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    fn affine(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (row, b) in self.weights.chunks_exact(self.inputs).zip(&self.bias) {
            let mut acc = *b;
            for (w, xi) in row.iter().zip(x) {
                acc += w * xi;
            }
            out.push(acc);
        }
    }
}

/// The split network with its trainable parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitModel {
    pub arch: ArchSpec,
    pub layers: Vec<Dense>,
}

impl SplitModel {
    /// Glorot-uniform weights in ±√(6/(fan_in+fan_out)), zero biases.
    pub fn build(arch: &ArchSpec, seed: u64) -> Result<Self> {
        arch.validate()?;
        let mut rng = Rng::new(seed, 0);
        let layers = arch
            .widths
            .windows(2)
            .map(|w| {
                let (fi, fo) = (w[0], w[1]);
                let a = (6.0 / (fi + fo) as f64).sqrt();
                let mut layer = Dense::zeros(fi, fo);
                for v in &mut layer.weights {
                    *v = (2.0 * rng.uniform() - 1.0) * a;
                }
                layer
            })
            .collect();
        Ok(SplitModel {
            arch: arch.clone(),
            layers,
        })
    }

    /// Checks that layer shapes follow the architecture and every value is finite.
    pub fn validate(&self) -> Result<()> {
        self.arch.validate()?;
        if self.layers.len() != self.arch.n_layers() {
            return Err(Error::invalid("layer count does not match the architecture"));
        }
        for (j, (l, w)) in self.layers.iter().zip(self.arch.widths.windows(2)).enumerate() {
            if l.inputs != w[0] || l.outputs != w[1] || l.weights.len() != w[0] * w[1] || l.bias.len() != w[1] {
                return Err(Error::invalid(format!(
                    "layer {j} shape does not match the architecture"
                )));
            }
            if !l.weights.iter().chain(&l.bias).all(|v| v.is_finite()) {
                return Err(Error::invalid(format!("layer {j} has non-finite parameters")));
            }
        }
        Ok(())
    }

    fn activation_for(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers.len() {
            Activation::Linear
        } else {
            self.arch.activation
        }
    }

    fn run(&self, range: std::ops::Range<usize>, x: &[f64]) -> Result<Vec<f64>> {
        let expected = self.layers[range.start].inputs;
        if x.len() != expected {
            return Err(Error::invalid(format!(
                "input has {} values, layer {} expects {expected}",
                x.len(),
                range.start
            )));
        }
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for j in range {
            self.layers[j].affine(&cur, &mut next);
            let act = self.activation_for(j);
            for v in &mut next {
                *v = act.apply(*v);
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// STA side: input to bottleneck activations.
    pub fn infer_head(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.run(0..self.arch.bottleneck, x)
    }

    /// AP side: bottleneck activations to output.
    pub fn infer_tail(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.run(self.arch.bottleneck..self.layers.len(), z)
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.infer_tail(&self.infer_head(x)?)
    }

    /// Every parameter rounded to f32, as stored in a model file.
    pub fn rounded_to_f32(&self) -> SplitModel {
        let mut m = self.clone();
        for l in &mut m.layers {
            for v in l.weights.iter_mut().chain(l.bias.iter_mut()) {
                *v = *v as f32 as f64;
            }
        }
        m
    }

    /// Gradient-shaped zero buffers.
    pub fn zero_grad(&self) -> Gradient {
        Gradient {
            layers: self.layers.iter().map(|l| Dense::zeros(l.inputs, l.outputs)).collect(),
        }
    }

    /// Forward pass keeping every layer's post-activation output.
    pub(crate) fn forward_trace(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        if x.len() != self.arch.input_len() {
            return Err(Error::invalid(format!(
                "input has {} values, model expects {}",
                x.len(),
                self.arch.input_len()
            )));
        }
        let mut trace = Vec::with_capacity(self.layers.len() + 1);
        trace.push(x.to_vec());
        for (j, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::with_capacity(layer.outputs);
            layer.affine(trace.last().unwrap(), &mut out);
            let act = self.activation_for(j);
            for v in &mut out {
                *v = act.apply(*v);
            }
            trace.push(out);
        }
        Ok(trace)
    }

    /// Accumulates `∂L/∂θ` into `grad` given the trace of one input and
    /// `∂L/∂y` at the output.
    pub(crate) fn backward(&self, trace: &[Vec<f64>], d_out: Vec<f64>, grad: &mut Gradient) {
        let mut delta = d_out;
        for j in (0..self.layers.len()).rev() {
            let layer = &self.layers[j];
            let input = &trace[j];
            let g = &mut grad.layers[j];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                g.bias[o] += d;
                let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (gw, &a) in row.iter_mut().zip(input) {
                    *gw += d * a;
                }
            }
            if j == 0 {
                break;
            }
            let act = self.activation_for(j - 1);
            let mut prev = vec![0.0; layer.inputs];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (p, &w) in prev.iter_mut().zip(row) {
                    *p += w * d;
                }
            }
            for (p, &y) in prev.iter_mut().zip(input) {
                *p *= act.derivative_from_output(y);
            }
            delta = prev;
        }
    }
}

/// Parameter-shaped gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub layers: Vec<Dense>,
}

impl Gradient {
    pub fn scale(&mut self, c: f64) {
        for l in &mut self.layers {
            for v in l.weights.iter_mut().chain(l.bias.iter_mut()) {
                *v *= c;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias))
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_model_outputs_zero() {
        let arch = ArchSpec::new(vec![5, 3, 3, 4], 1, Activation::Relu).unwrap();
        let mut m = SplitModel::build(&arch, 1).unwrap();
        for l in &mut m.layers {
            l.weights.fill(0.0);
        }
        assert_eq!(m.forward(&[1.0, -2.0, 3.0, 0.5, 9.0]).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn hand_computed_toy_net() {
        // 2 → 2 (ReLU) → 1 (ReLU) → 1, bottleneck after the first layer.
        let arch = ArchSpec::new(vec![2, 2, 1, 1], 1, Activation::Relu).unwrap();
        let mut m = SplitModel::build(&arch, 0).unwrap();
        m.layers[0].weights = vec![1.0, -1.0, 2.0, 1.0];
        m.layers[0].bias = vec![0.0, -1.0];
        m.layers[1].weights = vec![1.0, 0.5];
        m.layers[1].bias = vec![0.25];
        m.layers[2].weights = vec![-2.0];
        m.layers[2].bias = vec![1.0];
        // x = [1, 3]: h = relu([−2, 4]) = [0, 4]; g = relu(0 + 2 + 0.25) = 2.25; y = −4.5 + 1.
        assert_eq!(m.infer_head(&[1.0, 3.0]).unwrap(), vec![0.0, 4.0]);
        assert_eq!(m.forward(&[1.0, 3.0]).unwrap(), vec![-3.5]);
    }

    #[test]
    fn glorot_bounds_and_determinism() {
        let arch = ArchSpec::ladder(224, 224, 0.125, 3).unwrap();
        let a = SplitModel::build(&arch, 3).unwrap();
        let b = SplitModel::build(&arch, 3).unwrap();
        assert_eq!(a, b);
        let bound = (6.0f64 / 252.0).sqrt();
        assert!(a.layers[0].weights.iter().all(|w| w.abs() <= bound));
        assert!(a.layers.iter().all(|l| l.bias.iter().all(|&v| v == 0.0)));
        assert_ne!(a, SplitModel::build(&arch, 4).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        let arch = ArchSpec::ladder(8, 8, 0.5, 3).unwrap();
        let m = SplitModel::build(&arch, 0).unwrap();
        assert!(m.forward(&[0.0; 7]).is_err());
        assert!(m.infer_tail(&[0.0; 5]).is_err());
    }
}
