use posit_quant::TensorF;

use crate::TrainError;

/// A trainable tensor with its gradient and momentum buffer. The
/// stored value is kept quantized when quantization is active; the
/// momentum buffer (and the optional master copy) stay wide.
#[derive(Debug, Clone)]
pub struct Param {
    pub name: String,
    pub value: TensorF,
    pub grad: TensorF,
    pub momentum: TensorF,
    pub master: Option<TensorF>,
}

impl Param {
    pub fn new(name: String, value: TensorF) -> Self {
        let dims = value.dims().to_vec();
        Param {
            name,
            value,
            grad: TensorF::zeros(dims.clone()),
            momentum: TensorF::zeros(dims),
            master: None,
        }
    }
}

/// Per-layer forward state needed by backward.
#[derive(Debug, Clone)]
pub enum LayerCache {
    Conv {
        input: TensorF,
        weight: TensorF,
    },
    Dense {
        input: TensorF,
        weight: TensorF,
    },
    Bn {
        xhat: TensorF,
        inv_std: Vec<f64>,
        gamma: TensorF,
    },
    Relu {
        mask: Vec<bool>,
    },
    Flatten {
        dims: Vec<usize>,
    },
    None,
}

fn dims4(t: &TensorF) -> Result<(usize, usize, usize, usize), TrainError> {
    match t.dims() {
        [n, c, h, w] => Ok((*n, *c, *h, *w)),
        other => Err(TrainError::Shape(format!(
            "expected a 4-d activation, got {other:?}"
        ))),
    }
}

// ── Conv2d ──────────────────────────────────────────────────────────

#[derive(Debug, Clone)]
pub struct ConvLayer {
    pub weight: Param, // [out_c, in_c, k, k]
    pub bias: Param,   // [out_c]
    pub in_c: usize,
    pub out_c: usize,
    pub k: usize,
    pub stride: usize,
    pub pad: usize,
}

impl ConvLayer {
    pub fn out_hw(&self, h: usize, w: usize) -> (usize, usize) {
        (
            (h + 2 * self.pad - self.k) / self.stride + 1,
            (w + 2 * self.pad - self.k) / self.stride + 1,
        )
    }

    /// Direct convolution; partial sums accumulate in f64 and only the
    /// assembled output ever sees a quantizer.
    pub fn forward(&self, x: &TensorF, weight: &TensorF, bias: &TensorF) -> Result<(TensorF, LayerCache), TrainError> {
        let (n, c, h, w) = dims4(x)?;
        if c != self.in_c {
            return Err(TrainError::Shape(format!(
                "conv expects {} input channels, got {c}",
                self.in_c
            )));
        }
        let (oh, ow) = self.out_hw(h, w);
        let mut out = TensorF::zeros(vec![n, self.out_c, oh, ow]);
        let wd = weight.data();
        let xd = x.data();
        let od = out.data_mut();
        for i in 0..n {
            for oc in 0..self.out_c {
                let b = bias.data()[oc];
                for y in 0..oh {
                    for xo in 0..ow {
                        let mut acc = b;
                        for ic in 0..c {
                            for ky in 0..self.k {
                                let iy = y * self.stride + ky;
                                if iy < self.pad || iy >= h + self.pad {
                                    continue;
                                }
                                let iy = iy - self.pad;
                                for kx in 0..self.k {
                                    let ix = xo * self.stride + kx;
                                    if ix < self.pad || ix >= w + self.pad {
                                        continue;
                                    }
                                    let ix = ix - self.pad;
                                    acc += wd[((oc * c + ic) * self.k + ky) * self.k + kx]
                                        * xd[((i * c + ic) * h + iy) * w + ix];
                                }
                            }
                        }
                        od[((i * self.out_c + oc) * oh + y) * ow + xo] = acc;
                    }
                }
            }
        }
        Ok((
            out,
            LayerCache::Conv {
                input: x.clone(),
                weight: weight.clone(),
            },
        ))
    }

    /// Returns (d_input, d_weight, d_bias).
    pub fn backward(
        &self,
        grad_out: &TensorF,
        cache: &LayerCache,
    ) -> Result<(TensorF, TensorF, TensorF), TrainError> {
        let (input, weight) = match cache {
            LayerCache::Conv { input, weight } => (input, weight),
            _ => return Err(TrainError::MissingCache),
        };
        let (n, c, h, w) = dims4(input)?;
        let (_, _, oh, ow) = dims4(grad_out)?;
        let mut dx = TensorF::zeros(input.dims().to_vec());
        let mut dw = TensorF::zeros(weight.dims().to_vec());
        let mut db = TensorF::zeros(vec![self.out_c]);
        let xd = input.data();
        let wd = weight.data();
        let gd = grad_out.data();
        {
            let dxd = dx.data_mut();
            for i in 0..n {
                for oc in 0..self.out_c {
                    for y in 0..oh {
                        for xo in 0..ow {
                            let g = gd[((i * self.out_c + oc) * oh + y) * ow + xo];
                            if g == 0.0 {
                                continue;
                            }
                            for ic in 0..c {
                                for ky in 0..self.k {
                                    let iy = y * self.stride + ky;
                                    if iy < self.pad || iy >= h + self.pad {
                                        continue;
                                    }
                                    let iy = iy - self.pad;
                                    for kx in 0..self.k {
                                        let ix = xo * self.stride + kx;
                                        if ix < self.pad || ix >= w + self.pad {
                                            continue;
                                        }
                                        let ix = ix - self.pad;
                                        dxd[((i * c + ic) * h + iy) * w + ix] +=
                                            g * wd[((oc * c + ic) * self.k + ky) * self.k + kx];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        {
            let dwd = dw.data_mut();
            let dbd = db.data_mut();
            for i in 0..n {
                for oc in 0..self.out_c {
                    for y in 0..oh {
                        for xo in 0..ow {
                            let g = gd[((i * self.out_c + oc) * oh + y) * ow + xo];
                            dbd[oc] += g;
                            if g == 0.0 {
                                continue;
                            }
                            for ic in 0..c {
                                for ky in 0..self.k {
                                    let iy = y * self.stride + ky;
                                    if iy < self.pad || iy >= h + self.pad {
                                        continue;
                                    }
                                    let iy = iy - self.pad;
                                    for kx in 0..self.k {
                                        let ix = xo * self.stride + kx;
                                        if ix < self.pad || ix >= w + self.pad {
                                            continue;
                                        }
                                        let ix = ix - self.pad;
                                        dwd[((oc * c + ic) * self.k + ky) * self.k + kx] +=
                                            g * xd[((i * c + ic) * h + iy) * w + ix];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok((dx, dw, db))
    }
}

// ── Dense ───────────────────────────────────────────────────────────

#[derive(Debug, Clone)]
pub struct DenseLayer {
    pub weight: Param, // [out, in]
    pub bias: Param,   // [out]
    pub in_f: usize,
    pub out_f: usize,
}

impl DenseLayer {
    pub fn forward(&self, x: &TensorF, weight: &TensorF, bias: &TensorF) -> Result<(TensorF, LayerCache), TrainError> {
        let (n, d) = match x.dims() {
            [n, d] => (*n, *d),
            other => {
                return Err(TrainError::Shape(format!(
                    "dense expects a 2-d input, got {other:?}"
                )))
            }
        };
        if d != self.in_f {
            return Err(TrainError::Shape(format!(
                "dense expects {} input features, got {d}",
                self.in_f
            )));
        }
        let mut out = TensorF::zeros(vec![n, self.out_f]);
        let od = out.data_mut();
        let xd = x.data();
        let wd = weight.data();
        for i in 0..n {
            for o in 0..self.out_f {
                let mut acc = bias.data()[o];
                for j in 0..d {
                    acc += wd[o * d + j] * xd[i * d + j];
                }
                od[i * self.out_f + o] = acc;
            }
        }
        Ok((
            out,
            LayerCache::Dense {
                input: x.clone(),
                weight: weight.clone(),
            },
        ))
    }

    pub fn backward(
        &self,
        grad_out: &TensorF,
        cache: &LayerCache,
    ) -> Result<(TensorF, TensorF, TensorF), TrainError> {
        let (input, weight) = match cache {
            LayerCache::Dense { input, weight } => (input, weight),
            _ => return Err(TrainError::MissingCache),
        };
        let n = input.dims()[0];
        let d = self.in_f;
        let mut dx = TensorF::zeros(vec![n, d]);
        let mut dw = TensorF::zeros(vec![self.out_f, d]);
        let mut db = TensorF::zeros(vec![self.out_f]);
        let xd = input.data();
        let wd = weight.data();
        let gd = grad_out.data();
        let dxd = dx.data_mut();
        let dwd = dw.data_mut();
        let dbd = db.data_mut();
        for i in 0..n {
            for o in 0..self.out_f {
                let g = gd[i * self.out_f + o];
                dbd[o] += g;
                if g == 0.0 {
                    continue;
                }
                for j in 0..d {
                    dwd[o * d + j] += g * xd[i * d + j];
                    dxd[i * d + j] += g * wd[o * d + j];
                }
            }
        }
        Ok((dx, dw, db))
    }
}

// ── Batch normalization ─────────────────────────────────────────────

#[derive(Debug, Clone)]
pub struct BnLayer {
    pub gamma: Param, // [c]
    pub beta: Param,  // [c]
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub channels: usize,
    pub eps: f64,
    pub stats_momentum: f64,
}

impl BnLayer {
    pub fn new(gamma: Param, beta: Param, channels: usize) -> Self {
        BnLayer {
            gamma,
            beta,
            running_mean: vec![0.0; channels],
            running_var: vec![1.0; channels],
            channels,
            eps: 1e-5,
            stats_momentum: 0.1,
        }
    }

    pub fn forward(
        &mut self,
        x: &TensorF,
        gamma: &TensorF,
        beta: &TensorF,
        train: bool,
    ) -> Result<(TensorF, LayerCache), TrainError> {
        let (n, c, h, w) = dims4(x)?;
        if c != self.channels {
            return Err(TrainError::Shape(format!(
                "batchnorm expects {} channels, got {c}",
                self.channels
            )));
        }
        let m = (n * h * w) as f64;
        let xd = x.data();
        let mut out = TensorF::zeros(x.dims().to_vec());
        let mut xhat = TensorF::zeros(x.dims().to_vec());
        let mut inv_std = vec![0.0; c];
        for ch in 0..c {
            let (mean, var) = if train {
                let mut sum = 0.0;
                for i in 0..n {
                    for y in 0..h {
                        for xo in 0..w {
                            sum += xd[((i * c + ch) * h + y) * w + xo];
                        }
                    }
                }
                let mean = sum / m;
                let mut var = 0.0;
                for i in 0..n {
                    for y in 0..h {
                        for xo in 0..w {
                            let d = xd[((i * c + ch) * h + y) * w + xo] - mean;
                            var += d * d;
                        }
                    }
                }
                let var = var / m;
                self.running_mean[ch] =
                    (1.0 - self.stats_momentum) * self.running_mean[ch] + self.stats_momentum * mean;
                self.running_var[ch] =
                    (1.0 - self.stats_momentum) * self.running_var[ch] + self.stats_momentum * var;
                (mean, var)
            } else {
                (self.running_mean[ch], self.running_var[ch])
            };
            let istd = 1.0 / (var + self.eps).sqrt();
            inv_std[ch] = istd;
            let g = gamma.data()[ch];
            let b = beta.data()[ch];
            let xhd = xhat.data_mut();
            let od = out.data_mut();
            for i in 0..n {
                for y in 0..h {
                    for xo in 0..w {
                        let idx = ((i * c + ch) * h + y) * w + xo;
                        let xh = (xd[idx] - mean) * istd;
                        xhd[idx] = xh;
                        od[idx] = g * xh + b;
                    }
                }
            }
        }
        Ok((
            out,
            LayerCache::Bn {
                xhat,
                inv_std,
                gamma: gamma.clone(),
            },
        ))
    }

    /// Full batch-statistics backward.
    pub fn backward(
        &self,
        grad_out: &TensorF,
        cache: &LayerCache,
    ) -> Result<(TensorF, TensorF, TensorF), TrainError> {
        let (xhat, inv_std, gamma) = match cache {
            LayerCache::Bn {
                xhat,
                inv_std,
                gamma,
            } => (xhat, inv_std, gamma),
            _ => return Err(TrainError::MissingCache),
        };
        let (n, c, h, w) = dims4(xhat)?;
        let m = (n * h * w) as f64;
        let gd = grad_out.data();
        let xhd = xhat.data();
        let mut dgamma = TensorF::zeros(vec![c]);
        let mut dbeta = TensorF::zeros(vec![c]);
        let mut dx = TensorF::zeros(xhat.dims().to_vec());
        for ch in 0..c {
            let mut sum_g = 0.0;
            let mut sum_gx = 0.0;
            for i in 0..n {
                for y in 0..h {
                    for xo in 0..w {
                        let idx = ((i * c + ch) * h + y) * w + xo;
                        sum_g += gd[idx];
                        sum_gx += gd[idx] * xhd[idx];
                    }
                }
            }
            dgamma.data_mut()[ch] = sum_gx;
            dbeta.data_mut()[ch] = sum_g;
            let scale = gamma.data()[ch] * inv_std[ch];
            let dxd = dx.data_mut();
            for i in 0..n {
                for y in 0..h {
                    for xo in 0..w {
                        let idx = ((i * c + ch) * h + y) * w + xo;
                        dxd[idx] = scale * (gd[idx] - sum_g / m - xhd[idx] * sum_gx / m);
                    }
                }
            }
        }
        Ok((dx, dgamma, dbeta))
    }
}

// ── Parameterless layers ────────────────────────────────────────────

pub fn relu_forward(x: &TensorF) -> (TensorF, LayerCache) {
    let mask: Vec<bool> = x.data().iter().map(|&v| v > 0.0).collect();
    let out = x.map(|v| if v > 0.0 { v } else { 0.0 });
    (out, LayerCache::Relu { mask })
}

pub fn relu_backward(grad_out: &TensorF, cache: &LayerCache) -> Result<TensorF, TrainError> {
    let mask = match cache {
        LayerCache::Relu { mask } => mask,
        _ => return Err(TrainError::MissingCache),
    };
    let data = grad_out
        .data()
        .iter()
        .zip(mask)
        .map(|(&g, &keep)| if keep { g } else { 0.0 })
        .collect();
    TensorF::new(grad_out.dims().to_vec(), data).map_err(TrainError::from)
}

pub fn flatten_forward(x: &TensorF) -> Result<(TensorF, LayerCache), TrainError> {
    let n = x.dims()[0];
    let rest: usize = x.dims()[1..].iter().product();
    let out = x.reshape(vec![n, rest])?;
    Ok((
        out,
        LayerCache::Flatten {
            dims: x.dims().to_vec(),
        },
    ))
}

pub fn flatten_backward(grad_out: &TensorF, cache: &LayerCache) -> Result<TensorF, TrainError> {
    let dims = match cache {
        LayerCache::Flatten { dims } => dims,
        _ => return Err(TrainError::MissingCache),
    };
    grad_out.reshape(dims.clone()).map_err(TrainError::from)
}
