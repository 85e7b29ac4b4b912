use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hidden-layer nonlinearity. The output layer is always linear.
///
/// `Tanh` is the default: a ReLU bottleneck zeroes every negative code,
/// which on the 2×2 reference channel leaves roughly twice the beamforming
/// error of a tanh bottleneck of the same width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    #[default]
    Tanh,
    Linear,
}

impl Activation {
    pub fn code(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Tanh => 1,
            Activation::Linear => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Activation::Relu),
            1 => Some(Activation::Tanh),
            2 => Some(Activation::Linear),
            _ => None,
        }
    }

    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Linear => x,
        }
    }

    /// Derivative expressed through the activation output `y = f(x)`.
    #[inline]
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Linear => 1.0,
        }
    }
}

/// Dense network layout. `widths[0]` is the input, the last entry the
/// output, and `widths[bottleneck]` the vector sent over the air: the head
/// holds the layers producing it, the tail the rest.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArchSpec {
    pub widths: Vec<usize>,
    pub bottleneck: usize,
    #[serde(default)]
    pub activation: Activation,
}

impl ArchSpec {
    pub fn new(widths: Vec<usize>, bottleneck: usize, activation: Activation) -> Result<Self> {
        let a = ArchSpec {
            widths,
            bottleneck,
            activation,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.widths.len();
        if n < 3 {
            return Err(Error::invalid(format!(
                "an architecture needs at least 3 widths, got {n}"
            )));
        }
        if self.widths.contains(&0) {
            return Err(Error::invalid("layer widths must be positive"));
        }
        if self.bottleneck == 0 || self.bottleneck >= n - 1 {
            return Err(Error::invalid(format!(
                "bottleneck index {} must lie in 1..{}",
                self.bottleneck,
                n - 1
            )));
        }
        Ok(())
    }

    /// Bottleneck layer at `round(k·n_in)` (at least 1), then `depth − 2`
    /// layers of that width, then the output: depth 3 is `[n_in, b, b, n_out]`.
    /// Hidden layers use the default activation.
    pub fn ladder(n_in: usize, n_out: usize, k: f64, depth: usize) -> Result<Self> {
        if !(k > 0.0 && k < 1.0) {
            return Err(Error::invalid(format!("compression level {k} must lie in (0, 1)")));
        }
        if depth < 3 {
            return Err(Error::invalid(format!("depth {depth} below 3")));
        }
        let b = ((k * n_in as f64).round() as usize).max(1);
        let mut widths = vec![n_in];
        widths.extend(std::iter::repeat_n(b, depth - 1));
        widths.push(n_out);
        ArchSpec::new(widths, 1, Activation::default())
    }

    pub fn input_len(&self) -> usize {
        self.widths[0]
    }

    pub fn output_len(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn bottleneck_width(&self) -> usize {
        self.widths[self.bottleneck]
    }

    /// K = bottleneck width / input width.
    pub fn compression(&self) -> f64 {
        self.bottleneck_width() as f64 / self.input_len() as f64
    }

    /// Number of dense layers.
    pub fn n_layers(&self) -> usize {
        self.widths.len() - 1
    }

    fn macs(widths: &[usize]) -> u64 {
        widths.windows(2).map(|w| (w[0] * w[1]) as u64).sum()
    }

    pub fn head_macs(&self) -> u64 {
        Self::macs(&self.widths[..=self.bottleneck])
    }

    pub fn tail_macs(&self) -> u64 {
        Self::macs(&self.widths[self.bottleneck..])
    }

    pub fn n_params(&self) -> usize {
        self.widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// Widths joined by dashes, e.g. `224-28-28-224`.
    pub fn label(&self) -> String {
        self.widths.iter().map(|w| w.to_string()).collect::<Vec<_>>().join("-")
    }
}
