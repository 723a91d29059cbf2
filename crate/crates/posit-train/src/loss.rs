use posit_quant::TensorF;

use crate::TrainError;

/// Mean softmax cross-entropy over the batch plus the gradient with
/// respect to the logits, (softmax - onehot) / batch.
pub fn softmax_cross_entropy(
    logits: &TensorF,
    labels: &[u8],
) -> Result<(f64, TensorF), TrainError> {
    let (n, k) = match logits.dims() {
        [n, k] => (*n, *k),
        other => {
            return Err(TrainError::Shape(format!(
                "loss expects 2-d logits, got {other:?}"
            )))
        }
    };
    if labels.len() != n {
        return Err(TrainError::Shape(format!(
            "{} labels for a batch of {n}",
            labels.len()
        )));
    }
    let ld = logits.data();
    let mut grad = TensorF::zeros(vec![n, k]);
    let gd = grad.data_mut();
    let mut loss = 0.0;
    for i in 0..n {
        let row = &ld[i * k..(i + 1) * k];
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut denom = 0.0;
        for &v in row {
            denom += (v - max).exp();
        }
        let label = labels[i] as usize;
        if label >= k {
            return Err(TrainError::Shape(format!(
                "label {label} out of range for {k} classes"
            )));
        }
        loss += denom.ln() - (row[label] - max);
        for j in 0..k {
            let p = (row[j] - max).exp() / denom;
            gd[i * k + j] = (p - if j == label { 1.0 } else { 0.0 }) / n as f64;
        }
    }
    Ok((loss / n as f64, grad))
}
