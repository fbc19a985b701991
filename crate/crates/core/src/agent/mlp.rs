//! Fully connected ReLU networks with hand-written backpropagation and an
//! Adam optimiser.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// `inputs × outputs`, so a batch `X` maps to `X·W + b`.
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

/// Parameters of an MLP; also used as the gradient container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub layers: Vec<Layer>,
}

/// Activations kept from a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input to each layer (post-ReLU for hidden layers).
    inputs: Vec<Array2<f64>>,
}

impl MlpParams {
    /// Uniform `±1/sqrt(fan_in)` initialisation; the output layer is scaled
    /// by `out_scale`.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], out_scale: f64, rng: &mut R) -> Self {
        assert!(sizes.len() >= 2, "an MLP needs input and output sizes");
        let n = sizes.len() - 1;
        let layers = (0..n)
            .map(|k| {
                let (fan_in, fan_out) = (sizes[k], sizes[k + 1]);
                let bound = 1.0 / (fan_in as f64).sqrt() * if k + 1 == n { out_scale } else { 1.0 };
                let w = Array2::from_shape_simple_fn((fan_in, fan_out), || rng.random_range(-bound..=bound));
                let b = Array1::from_shape_simple_fn(fan_out, || rng.random_range(-bound..=bound));
                Layer { w, b }
            })
            .collect();
        Self { layers }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    w: Array2::zeros(l.w.raw_dim()),
                    b: Array1::zeros(l.b.raw_dim()),
                })
                .collect(),
        }
    }

    /// Layer widths, input first.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.input_dim()];
        s.extend(self.layers.iter().map(|l| l.w.ncols()));
        s
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.w.ncols())
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.w.iter().all(|v| v.is_finite()) && l.b.iter().all(|v| v.is_finite()))
    }

    fn same_shape(&self, other: &MlpParams) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| a.w.dim() == b.w.dim() && a.b.dim() == b.b.dim())
    }

    fn check_input(&self, cols: usize) -> Result<()> {
        if cols != self.input_dim() {
            return Err(Error::Contract(format!(
                "network expects {} inputs, got {cols}",
                self.input_dim()
            )));
        }
        Ok(())
    }

    /// Batched forward pass, rows are samples.
    pub fn forward(&self, x: ArrayView2<'_, f64>) -> Result<(Array2<f64>, ForwardCache)> {
        self.check_input(x.ncols())?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut h = x.to_owned();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = h.dot(&layer.w);
            z += &layer.b;
            if k != last {
                z.mapv_inplace(|v| v.max(0.0));
            }
            inputs.push(h);
            h = z;
        }
        Ok((h, ForwardCache { inputs }))
    }

    /// Forward pass without keeping activations.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_input(x.ncols())?;
        let mut h = x.to_owned();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = h.dot(&layer.w);
            z += &layer.b;
            if k != last {
                z.mapv_inplace(|v| v.max(0.0));
            }
            h = z;
        }
        Ok(h)
    }

    /// Backpropagates `grad_out` (dLoss/dOutput, same shape as the output).
    /// Returns parameter gradients and dLoss/dInput.
    pub fn backward(&self, cache: &ForwardCache, grad_out: &Array2<f64>) -> (MlpParams, Array2<f64>) {
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut g = grad_out.clone();
        for k in (0..self.layers.len()).rev() {
            let input = &cache.inputs[k];
            let gw = input.t().dot(&g);
            let gb = g.sum_axis(Axis(0));
            let mut g_in = g.dot(&self.layers[k].w.t());
            if k > 0 {
                // The input of layer k is a ReLU output.
                ndarray::Zip::from(&mut g_in)
                    .and(input)
                    .for_each(|gi, &a| {
                        if a <= 0.0 {
                            *gi = 0.0
                        }
                    });
            }
            grads.push(Layer { w: gw, b: gb });
            g = g_in;
        }
        grads.reverse();
        (MlpParams { layers: grads }, g)
    }

    /// All parameters flattened in layer order (weights then bias).
    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.w.iter().chain(l.b.iter()).copied().collect::<Vec<_>>())
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Mutable access to the `i`-th flattened parameter.
    pub fn param_mut(&mut self, mut i: usize) -> &mut f64 {
        for l in &mut self.layers {
            let nw = l.w.len();
            if i < nw {
                return l.w.iter_mut().nth(i).expect("index within weights");
            }
            i -= nw;
            let nb = l.b.len();
            if i < nb {
                return &mut l.b[i];
            }
            i -= nb;
        }
        panic!("parameter index out of range");
    }
}

/// Single-sample forward pass.
pub fn mlp_forward(params: &MlpParams, x: &[f64]) -> Result<Vec<f64>> {
    let view = ArrayView2::from_shape((1, x.len()), x).map_err(|e| Error::Contract(e.to_string()))?;
    Ok(params.predict(view)?.into_raw_vec_and_offset().0)
}

/// `target ← (1 − tau)·target + tau·online`, elementwise.
pub fn soft_update(target: &mut MlpParams, online: &MlpParams, tau: f64) -> Result<()> {
    if !target.same_shape(online) {
        return Err(Error::Contract("soft update between differently shaped networks".into()));
    }
    for (t, o) in target.layers.iter_mut().zip(&online.layers) {
        t.w.zip_mut_with(&o.w, |a, &b| *a = (1.0 - tau) * *a + tau * b);
        t.b.zip_mut_with(&o.b, |a, &b| *a = (1.0 - tau) * *a + tau * b);
    }
    Ok(())
}

/// Adam with the usual (0.9, 0.999, 1e-8) moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    m: MlpParams,
    v: MlpParams,
    t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Adam {
    pub fn new(params: &MlpParams) -> Self {
        Self {
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step(&mut self, params: &mut MlpParams, grads: &MlpParams, lr: f64) {
        self.t += 1;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.eps);
        let c1 = 1.0 - b1.powi(self.t as i32);
        let c2 = 1.0 - b2.powi(self.t as i32);
        let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        };
        for (((p, m), v), g) in params
            .layers
            .iter_mut()
            .zip(&mut self.m.layers)
            .zip(&mut self.v.layers)
            .zip(&grads.layers)
        {
            ndarray::Zip::from(&mut p.w)
                .and(&mut m.w)
                .and(&mut v.w)
                .and(&g.w)
                .for_each(|p, m, v, &g| update(p, m, v, g));
            ndarray::Zip::from(&mut p.b)
                .and(&mut m.b)
                .and(&mut v.b)
                .and(&g.b)
                .for_each(|p, m, v, &g| update(p, m, v, g));
        }
    }
}
