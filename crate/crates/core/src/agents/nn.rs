//! Fully connected networks with hand-written backpropagation.
//!
//! Hidden layers use the rectifier (subgradient 0 at 0); the output layer is
//! linear or `tanh`. Batches are rows of an `Array2`.

use std::io::{BufRead, Write};

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Tanh,
}

/// `y = x W + b` with `W` stored as `inputs x outputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    /// Uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`.
    pub fn init<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (inputs as f64).sqrt();
        let weights =
            Array2::from_shape_simple_fn((inputs, outputs), || rng.random_range(-bound..=bound));
        let bias = Array1::from_shape_simple_fn(outputs, || rng.random_range(-bound..=bound));
        Self { weights, bias }
    }

    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weights: Array2::zeros((inputs, outputs)),
            bias: Array1::zeros(outputs),
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.nrows()
    }

    pub fn outputs(&self) -> usize {
        self.weights.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Dense>,
    output: Activation,
}

/// Activations saved by [`Mlp::forward_cached`] for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    // inputs[l] is the input to layer l
    inputs: Vec<Array2<f64>>,
    output: Array2<f64>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        &self.output
    }
}

/// Parameter gradients, one [`Dense`] per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl Mlp {
    /// `sizes` lists input width, hidden widths and output width.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], output: Activation, rng: &mut R) -> Result<Self> {
        check_sizes(sizes)?;
        let layers = sizes
            .windows(2)
            .map(|w| Dense::init(w[0], w[1], rng))
            .collect();
        Ok(Self { layers, output })
    }

    pub fn zeros(sizes: &[usize], output: Activation) -> Result<Self> {
        check_sizes(sizes)?;
        let layers = sizes.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect();
        Ok(Self { layers, output })
    }

    pub fn from_layers(layers: Vec<Dense>, output: Activation) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument(
                "a network needs at least one layer".into(),
            ));
        }
        for pair in layers.windows(2) {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::DimensionMismatch {
                    expected: pair[0].outputs(),
                    got: pair[1].inputs(),
                });
            }
        }
        for layer in &layers {
            if layer.bias.len() != layer.outputs() {
                return Err(Error::DimensionMismatch {
                    expected: layer.outputs(),
                    got: layer.bias.len(),
                });
            }
        }
        Ok(Self { layers, output })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn output_activation(&self) -> Activation {
        self.output
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    pub fn forward(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_input(x)?;
        let mut h = x.to_owned();
        for (l, layer) in self.layers.iter().enumerate() {
            h = self.apply(l, layer, h.view());
        }
        Ok(h)
    }

    pub fn forward_one(&self, x: &[f64]) -> Result<Vec<f64>> {
        let view = ArrayView2::from_shape((1, x.len()), x).expect("row view");
        Ok(self.forward(view)?.into_raw_vec_and_offset().0)
    }

    pub fn forward_cached(&self, x: ArrayView2<'_, f64>) -> Result<ForwardCache> {
        self.check_input(x)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut h = x.to_owned();
        for (l, layer) in self.layers.iter().enumerate() {
            let next = self.apply(l, layer, h.view());
            inputs.push(h);
            h = next;
        }
        Ok(ForwardCache { inputs, output: h })
    }

    fn apply(&self, l: usize, layer: &Dense, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut z = x.dot(&layer.weights);
        z += &layer.bias;
        if l + 1 < self.layers.len() {
            z.mapv_inplace(|v| if v > 0.0 { v } else { 0.0 });
        } else if self.output == Activation::Tanh {
            z.mapv_inplace(f64::tanh);
        }
        z
    }

    /// Gradients of `sum(grad_output * output)` with respect to the
    /// parameters and to the input batch.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        grad_output: ArrayView2<'_, f64>,
    ) -> Result<(Gradients, Array2<f64>)> {
        if grad_output.dim() != cache.output.dim() {
            return Err(Error::DimensionMismatch {
                expected: cache.output.len(),
                got: grad_output.len(),
            });
        }
        let mut dz = grad_output.to_owned();
        if self.output == Activation::Tanh {
            Zip::from(&mut dz)
                .and(&cache.output)
                .for_each(|g, &y| *g *= 1.0 - y * y);
        }
        let mut grads = Vec::with_capacity(self.layers.len());
        for l in (0..self.layers.len()).rev() {
            let input = &cache.inputs[l];
            let layer = &self.layers[l];
            grads.push(Dense {
                weights: input.t().dot(&dz),
                bias: dz.sum_axis(Axis(0)),
            });
            let mut dx = dz.dot(&layer.weights.t());
            if l > 0 {
                // input to layer l is relu(z_{l-1}); zero where it was clipped
                Zip::from(&mut dx).and(input).for_each(|g, &a| {
                    if a <= 0.0 {
                        *g = 0.0
                    }
                });
            }
            dz = dx;
        }
        grads.reverse();
        Ok((Gradients { layers: grads }, dz))
    }

    /// `self = tau * online + (1 - tau) * self`.
    pub fn soft_update(&mut self, online: &Mlp, tau: f64) {
        for (t, o) in self.layers.iter_mut().zip(&online.layers) {
            Zip::from(&mut t.weights)
                .and(&o.weights)
                .for_each(|t, &o| *t = tau * o + (1.0 - tau) * *t);
            Zip::from(&mut t.bias)
                .and(&o.bias)
                .for_each(|t, &o| *t = tau * o + (1.0 - tau) * *t);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }

    fn check_input(&self, x: ArrayView2<'_, f64>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.ncols(),
            });
        }
        Ok(())
    }

    /// Writes `name.<layer>.weight,<rows>x<cols>,values...` and
    /// `name.<layer>.bias,<len>,values...` lines.
    pub fn write_tensors<W: Write>(&self, name: &str, out: &mut W) -> Result<()> {
        for (l, layer) in self.layers.iter().enumerate() {
            write!(
                out,
                "{name}.{l}.weight,{}x{}",
                layer.inputs(),
                layer.outputs()
            )?;
            for v in &layer.weights {
                write!(out, ",{v:e}")?;
            }
            writeln!(out)?;
            write!(out, "{name}.{l}.bias,{}", layer.outputs())?;
            for v in &layer.bias {
                write!(out, ",{v:e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "layer sizes {sizes:?} need an input and an output width, all positive"
        )));
    }
    Ok(())
}

/// A named tensor read back from a checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

pub fn read_tensors<R: BufRead>(input: R) -> Result<Vec<NamedTensor>> {
    let mut tensors = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::Snapshot {
            line: i + 1,
            message,
        };
        let mut fields = line.split(',');
        let name = fields.next().unwrap_or_default().to_string();
        let shape = fields
            .next()
            .ok_or_else(|| bad("missing shape".into()))?
            .split('x')
            .map(|d| {
                d.parse::<usize>()
                    .map_err(|_| bad(format!("bad shape dimension {d:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let values = fields
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| bad(format!("bad value {v:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != shape.iter().product::<usize>() {
            return Err(bad(format!("{} values for shape {shape:?}", values.len())));
        }
        tensors.push(NamedTensor {
            name,
            shape,
            values,
        });
    }
    Ok(tensors)
}

/// Rebuilds the layers of the network called `name` from checkpoint tensors.
pub fn mlp_from_tensors(tensors: &[NamedTensor], name: &str, output: Activation) -> Result<Mlp> {
    let mut layers = Vec::new();
    loop {
        let l = layers.len();
        let find = |suffix: &str| {
            tensors
                .iter()
                .find(|t| t.name == format!("{name}.{l}.{suffix}"))
        };
        let (Some(w), Some(b)) = (find("weight"), find("bias")) else {
            break;
        };
        if w.shape.len() != 2 {
            return Err(Error::InvalidArgument(format!(
                "{} is not a matrix",
                w.name
            )));
        }
        let weights = Array2::from_shape_vec((w.shape[0], w.shape[1]), w.values.clone())
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        layers.push(Dense {
            weights,
            bias: Array1::from_vec(b.values.clone()),
        });
    }
    if layers.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no tensors for network {name:?}"
        )));
    }
    Mlp::from_layers(layers, output)
}
