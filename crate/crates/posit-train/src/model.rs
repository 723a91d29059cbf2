use posit_quant::{scale_factor, TensorF};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::classes::{LayerClass, TensorClass};
use crate::layers::{
    flatten_backward, flatten_forward, relu_backward, relu_forward, BnLayer, ConvLayer,
    DenseLayer, LayerCache, Param,
};
use crate::plan::LayerSpec;
use crate::quantctx::{LayerScales, QuantCtx};
use crate::TrainError;

#[derive(Debug, Clone)]
pub enum LayerKind {
    Conv(ConvLayer),
    Bn(BnLayer),
    Dense(DenseLayer),
    Relu,
    Flatten,
}

#[derive(Debug, Clone)]
pub struct LayerNode {
    pub name: String,
    pub class: LayerClass,
    pub kind: LayerKind,
}

#[derive(Debug, Clone)]
pub struct Model {
    pub layers: Vec<LayerNode>,
    pub input_shape: [usize; 3],
}

enum Shape {
    Spatial(usize, usize, usize),
    Flat(usize),
}

impl Model {
    /// Build a seeded model from a topology description. Convolution
    /// and dense weights draw from the He-normal distribution; batch
    /// norm starts at scale 1, shift 0.
    pub fn build(
        input_shape: [usize; 3],
        specs: &[LayerSpec],
        seed: u64,
    ) -> Result<Model, TrainError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut shape = Shape::Spatial(input_shape[0], input_shape[1], input_shape[2]);
        let mut layers = Vec::new();
        let mut counts = [0usize; 5];
        for spec in specs {
            let node = match *spec {
                LayerSpec::Conv {
                    out_channels,
                    kernel,
                    stride,
                    pad,
                } => {
                    let (c, h, w) = match shape {
                        Shape::Spatial(c, h, w) => (c, h, w),
                        Shape::Flat(_) => {
                            return Err(TrainError::Shape(
                                "conv after flatten is not supported".into(),
                            ))
                        }
                    };
                    if h + 2 * pad < kernel || w + 2 * pad < kernel || stride == 0 {
                        return Err(TrainError::Shape(format!(
                            "conv kernel {kernel}/stride {stride} does not fit {h}x{w} input"
                        )));
                    }
                    counts[0] += 1;
                    let name = format!("conv{}", counts[0]);
                    let fan_in = c * kernel * kernel;
                    let weight = he_normal(
                        &mut rng,
                        vec![out_channels, c, kernel, kernel],
                        fan_in,
                    );
                    let layer = ConvLayer {
                        weight: Param::new(format!("{name}.weight"), weight),
                        bias: Param::new(
                            format!("{name}.bias"),
                            TensorF::zeros(vec![out_channels]),
                        ),
                        in_c: c,
                        out_c: out_channels,
                        k: kernel,
                        stride,
                        pad,
                    };
                    let (oh, ow) = layer.out_hw(h, w);
                    shape = Shape::Spatial(out_channels, oh, ow);
                    LayerNode {
                        name,
                        class: LayerClass::Conv,
                        kind: LayerKind::Conv(layer),
                    }
                }
                LayerSpec::Batchnorm => {
                    let c = match shape {
                        Shape::Spatial(c, _, _) => c,
                        Shape::Flat(_) => {
                            return Err(TrainError::Shape(
                                "batchnorm after flatten is not supported".into(),
                            ))
                        }
                    };
                    counts[1] += 1;
                    let name = format!("bn{}", counts[1]);
                    let gamma = Param::new(
                        format!("{name}.gamma"),
                        TensorF::new(vec![c], vec![1.0; c])?,
                    );
                    let beta = Param::new(format!("{name}.beta"), TensorF::zeros(vec![c]));
                    LayerNode {
                        name,
                        class: LayerClass::Bn,
                        kind: LayerKind::Bn(BnLayer::new(gamma, beta, c)),
                    }
                }
                LayerSpec::Relu => {
                    counts[2] += 1;
                    LayerNode {
                        name: format!("relu{}", counts[2]),
                        class: LayerClass::Other,
                        kind: LayerKind::Relu,
                    }
                }
                LayerSpec::Flatten => {
                    let d = match shape {
                        Shape::Spatial(c, h, w) => c * h * w,
                        Shape::Flat(d) => d,
                    };
                    shape = Shape::Flat(d);
                    counts[3] += 1;
                    LayerNode {
                        name: format!("flatten{}", counts[3]),
                        class: LayerClass::Other,
                        kind: LayerKind::Flatten,
                    }
                }
                LayerSpec::Dense { out_features } => {
                    let d = match shape {
                        Shape::Flat(d) => d,
                        Shape::Spatial(..) => {
                            return Err(TrainError::Shape(
                                "dense requires a flatten layer before it".into(),
                            ))
                        }
                    };
                    counts[4] += 1;
                    let name = format!("dense{}", counts[4]);
                    let weight = he_normal(&mut rng, vec![out_features, d], d);
                    let layer = DenseLayer {
                        weight: Param::new(format!("{name}.weight"), weight),
                        bias: Param::new(
                            format!("{name}.bias"),
                            TensorF::zeros(vec![out_features]),
                        ),
                        in_f: d,
                        out_f: out_features,
                    };
                    shape = Shape::Flat(out_features);
                    LayerNode {
                        name,
                        class: LayerClass::Dense,
                        kind: LayerKind::Dense(layer),
                    }
                }
            };
            layers.push(node);
        }
        Ok(Model {
            layers,
            input_shape,
        })
    }

    /// Forward pass with quantization inserted at every layer's weight
    /// and activation sites. Returns the logits and the per-layer cache
    /// for backward.
    pub fn forward(
        &mut self,
        images: &TensorF,
        ctx: &QuantCtx,
        train: bool,
    ) -> Result<(TensorF, Vec<LayerCache>), TrainError> {
        let mut act = images.clone();
        let mut caches = Vec::with_capacity(self.layers.len());
        for idx in 0..self.layers.len() {
            let class = self.layers[idx].class;
            let act_q = ctx.apply(&act, idx, class, TensorClass::Activation);
            let (out, cache) = match &mut self.layers[idx].kind {
                LayerKind::Conv(conv) => {
                    let w_q = ctx.apply(&conv.weight.value, idx, class, TensorClass::Weight);
                    let b_q = ctx.apply(&conv.bias.value, idx, class, TensorClass::Weight);
                    conv.forward(&act_q, &w_q, &b_q)?
                }
                LayerKind::Dense(dense) => {
                    let w_q = ctx.apply(&dense.weight.value, idx, class, TensorClass::Weight);
                    let b_q = ctx.apply(&dense.bias.value, idx, class, TensorClass::Weight);
                    dense.forward(&act_q, &w_q, &b_q)?
                }
                LayerKind::Bn(bn) => {
                    let g_q = ctx.apply(&bn.gamma.value, idx, class, TensorClass::Weight);
                    let b_q = ctx.apply(&bn.beta.value, idx, class, TensorClass::Weight);
                    bn.forward(&act_q, &g_q, &b_q, train)?
                }
                LayerKind::Relu => relu_forward(&act_q),
                LayerKind::Flatten => flatten_forward(&act_q)?,
            };
            act = out;
            caches.push(cache);
        }
        Ok((act, caches))
    }

    /// Backward pass mirroring the forward sites: each incoming error
    /// tensor is quantized with the layer's Error spec before use, each
    /// weight gradient with the WeightGradient spec after computation.
    pub fn backward(
        &mut self,
        loss_grad: &TensorF,
        caches: &[LayerCache],
        ctx: &QuantCtx,
    ) -> Result<(), TrainError> {
        if caches.len() != self.layers.len() {
            return Err(TrainError::MissingCache);
        }
        let mut err = loss_grad.clone();
        for idx in (0..self.layers.len()).rev() {
            let class = self.layers[idx].class;
            let err_q = ctx.apply(&err, idx, class, TensorClass::Error);
            err = match &mut self.layers[idx].kind {
                LayerKind::Conv(conv) => {
                    let (dx, dw, db) = conv.backward(&err_q, &caches[idx])?;
                    conv.weight.grad = ctx.apply(&dw, idx, class, TensorClass::WeightGradient);
                    conv.bias.grad = ctx.apply(&db, idx, class, TensorClass::WeightGradient);
                    dx
                }
                LayerKind::Dense(dense) => {
                    let (dx, dw, db) = dense.backward(&err_q, &caches[idx])?;
                    dense.weight.grad = ctx.apply(&dw, idx, class, TensorClass::WeightGradient);
                    dense.bias.grad = ctx.apply(&db, idx, class, TensorClass::WeightGradient);
                    dx
                }
                LayerKind::Bn(bn) => {
                    let (dx, dg, db) = bn.backward(&err_q, &caches[idx])?;
                    bn.gamma.grad = ctx.apply(&dg, idx, class, TensorClass::WeightGradient);
                    bn.beta.grad = ctx.apply(&db, idx, class, TensorClass::WeightGradient);
                    dx
                }
                LayerKind::Relu => relu_backward(&err_q, &caches[idx])?,
                LayerKind::Flatten => flatten_backward(&err_q, &caches[idx])?,
            };
        }
        Ok(())
    }

    /// SGD with momentum. Momentum buffers stay wide; the stored weight
    /// is re-quantized after the step (or tracks the optional wide
    /// master copy, quantizing only the stored view).
    pub fn update_weights(&mut self, lr: f64, momentum: f64, ctx: &QuantCtx) {
        for idx in 0..self.layers.len() {
            let class = self.layers[idx].class;
            let node = &mut self.layers[idx];
            let params: Vec<&mut Param> = match &mut node.kind {
                LayerKind::Conv(c) => vec![&mut c.weight, &mut c.bias],
                LayerKind::Dense(d) => vec![&mut d.weight, &mut d.bias],
                LayerKind::Bn(b) => vec![&mut b.gamma, &mut b.beta],
                LayerKind::Relu | LayerKind::Flatten => vec![],
            };
            for param in params {
                let g = param.grad.data();
                let v = param.momentum.data_mut();
                for (vi, &gi) in v.iter_mut().zip(g) {
                    *vi = momentum * *vi + gi;
                }
                let stepped = match &mut param.master {
                    Some(master) => {
                        let md = master.data_mut();
                        for (mi, &vi) in md.iter_mut().zip(param.momentum.data()) {
                            *mi -= lr * vi;
                        }
                        master.clone()
                    }
                    None => {
                        let mut next = param.value.clone();
                        for (wi, &vi) in next.data_mut().iter_mut().zip(param.momentum.data()) {
                            *wi -= lr * vi;
                        }
                        next
                    }
                };
                param.value = ctx.apply(&stepped, idx, class, TensorClass::Weight);
            }
        }
    }

    /// Enable the wide master-copy ablation: every parameter keeps an
    /// unquantized shadow that the optimizer steps.
    pub fn enable_master_weights(&mut self) {
        for param in self.params_mut() {
            param.master = Some(param.value.clone());
        }
    }

    /// Name of the first layer holding a non-finite weight, if any.
    pub fn first_non_finite(&self) -> Option<String> {
        for node in &self.layers {
            for param in node_params(node) {
                if param.value.data().iter().any(|v| !v.is_finite()) {
                    return Some(node.name.clone());
                }
            }
        }
        None
    }

    /// Weight and activation scale factors for every layer: weights
    /// from the current parameters, activations from a passthrough
    /// forward over the calibration batch.
    pub fn compute_layer_scale_factors(
        &mut self,
        calibration: &TensorF,
        sigma: i32,
    ) -> Result<Vec<LayerScales>, TrainError> {
        let inputs = self.layer_inputs(calibration)?;
        let mut scales = Vec::with_capacity(self.layers.len());
        for (node, input) in self.layers.iter().zip(&inputs) {
            let params = node_params(node);
            let weight = if params.is_empty() {
                None
            } else {
                let mut all = Vec::new();
                for p in &params {
                    all.extend_from_slice(p.value.data());
                }
                let flat = TensorF::new(vec![all.len()], all)?;
                Some(scale_factor(&flat, sigma))
            };
            scales.push(LayerScales {
                weight,
                activation: Some(scale_factor(input, sigma)),
            });
        }
        Ok(scales)
    }

    /// Passthrough evaluation forward that records the input tensor of
    /// every layer. Running statistics are untouched.
    fn layer_inputs(&mut self, images: &TensorF) -> Result<Vec<TensorF>, TrainError> {
        let mut act = images.clone();
        let mut inputs = Vec::with_capacity(self.layers.len());
        for idx in 0..self.layers.len() {
            inputs.push(act.clone());
            let (out, _) = match &mut self.layers[idx].kind {
                LayerKind::Conv(conv) => {
                    let w = conv.weight.value.clone();
                    let b = conv.bias.value.clone();
                    conv.forward(&act, &w, &b)?
                }
                LayerKind::Dense(dense) => {
                    let w = dense.weight.value.clone();
                    let b = dense.bias.value.clone();
                    dense.forward(&act, &w, &b)?
                }
                LayerKind::Bn(bn) => {
                    let g = bn.gamma.value.clone();
                    let b = bn.beta.value.clone();
                    bn.forward(&act, &g, &b, false)?
                }
                LayerKind::Relu => relu_forward(&act),
                LayerKind::Flatten => flatten_forward(&act)?,
            };
            act = out;
        }
        Ok(inputs)
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut out = Vec::new();
        for node in &mut self.layers {
            match &mut node.kind {
                LayerKind::Conv(c) => {
                    out.push(&mut c.weight);
                    out.push(&mut c.bias);
                }
                LayerKind::Dense(d) => {
                    out.push(&mut d.weight);
                    out.push(&mut d.bias);
                }
                LayerKind::Bn(b) => {
                    out.push(&mut b.gamma);
                    out.push(&mut b.beta);
                }
                LayerKind::Relu | LayerKind::Flatten => {}
            }
        }
        out
    }

    /// All persistent tensors in checkpoint order: parameters plus
    /// batch-norm running statistics.
    pub fn export_tensors(&self) -> Vec<(String, TensorF)> {
        let mut out = Vec::new();
        for node in &self.layers {
            for p in node_params(node) {
                out.push((p.name.clone(), p.value.clone()));
            }
            if let LayerKind::Bn(bn) = &node.kind {
                out.push((
                    format!("{}.running_mean", node.name),
                    TensorF::new(vec![bn.channels], bn.running_mean.clone()).unwrap(),
                ));
                out.push((
                    format!("{}.running_var", node.name),
                    TensorF::new(vec![bn.channels], bn.running_var.clone()).unwrap(),
                ));
            }
        }
        out
    }

    /// Restore tensors exported by [`Model::export_tensors`].
    pub fn import_tensors(&mut self, entries: &[(String, TensorF)]) -> Result<(), TrainError> {
        for (name, tensor) in entries {
            if !self.import_one(name, tensor)? {
                return Err(TrainError::Shape(format!(
                    "checkpoint tensor {name} does not match any model parameter"
                )));
            }
        }
        Ok(())
    }

    fn import_one(&mut self, name: &str, tensor: &TensorF) -> Result<bool, TrainError> {
        for node in &mut self.layers {
            if let LayerKind::Bn(bn) = &mut node.kind {
                if name == format!("{}.running_mean", node.name) {
                    bn.running_mean = tensor.data().to_vec();
                    return Ok(true);
                }
                if name == format!("{}.running_var", node.name) {
                    bn.running_var = tensor.data().to_vec();
                    return Ok(true);
                }
            }
        }
        for param in self.params_mut() {
            if param.name == name {
                if param.value.dims() != tensor.dims() {
                    return Err(TrainError::Shape(format!(
                        "checkpoint tensor {name} has dims {:?}, expected {:?}",
                        tensor.dims(),
                        param.value.dims()
                    )));
                }
                param.value = tensor.clone();
                return Ok(true);
            }
        }
        Ok(false)
    }
}

fn node_params(node: &LayerNode) -> Vec<&Param> {
    match &node.kind {
        LayerKind::Conv(c) => vec![&c.weight, &c.bias],
        LayerKind::Dense(d) => vec![&d.weight, &d.bias],
        LayerKind::Bn(b) => vec![&b.gamma, &b.beta],
        LayerKind::Relu | LayerKind::Flatten => vec![],
    }
}

fn he_normal(rng: &mut ChaCha8Rng, dims: Vec<usize>, fan_in: usize) -> TensorF {
    let std = (2.0 / fan_in as f64).sqrt();
    let normal = Normal::new(0.0, std).unwrap();
    let len = dims.iter().product();
    let data: Vec<f64> = (0..len).map(|_| normal.sample(rng)).collect();
    TensorF::new(dims, data).unwrap()
}
