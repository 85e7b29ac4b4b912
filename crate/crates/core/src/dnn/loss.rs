//! Normalized squared-error loss and its gradient.
//!
//! For a batch of `b` examples, each covering one or more STAs,
//! `L = (1/b) Σ_batch Σ_sta ‖pred − target‖² / ‖target‖₁`.

use super::model::{Gradient, SplitModel};
use crate::error::{Error, Result};

/// Inputs and targets of every STA in one loss term. Pooled training uses one
/// STA per example; synchronized multi-STA batches put all STAs of a CSI
/// sample in one example.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl Example {
    pub fn single(input: Vec<f64>, target: Vec<f64>) -> Self {
        Example {
            inputs: vec![input],
            targets: vec![target],
        }
    }
}

fn l1(target: &[f64], index: usize) -> Result<f64> {
    let n: f64 = target.iter().map(|v| v.abs()).sum();
    if n > 0.0 {
        Ok(n)
    } else {
        Err(Error::DegenerateTarget { index })
    }
}

/// `‖pred − target‖² / ‖target‖₁` for one STA; `index` labels errors.
pub fn loss_term(pred: &[f64], target: &[f64], index: usize) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::invalid(format!(
            "prediction has {} values, target {}",
            pred.len(),
            target.len()
        )));
    }
    let norm = l1(target, index)?;
    let sse: f64 = pred.iter().zip(target).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(sse / norm)
}

/// Batch loss where every prediction/target pair is its own example.
pub fn loss(preds: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64> {
    if preds.is_empty() || preds.len() != targets.len() {
        return Err(Error::invalid("loss needs matching, non-empty batches"));
    }
    let mut total = 0.0;
    for (i, (p, t)) in preds.iter().zip(targets).enumerate() {
        total += loss_term(p, t, i)?;
    }
    Ok(total / preds.len() as f64)
}

/// Model loss over a batch of examples.
pub fn batch_loss(model: &SplitModel, batch: &[&Example]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let mut total = 0.0;
    for (i, ex) in batch.iter().enumerate() {
        for (x, t) in ex.inputs.iter().zip(&ex.targets) {
            total += loss_term(&model.forward(x)?, t, i)?;
        }
    }
    Ok(total / batch.len() as f64)
}

/// Batch loss and its exact gradient by backpropagation.
pub fn grad(model: &SplitModel, batch: &[&Example]) -> Result<(f64, Gradient)> {
    if batch.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let b = batch.len() as f64;
    let mut g = model.zero_grad();
    let mut total = 0.0;
    for (i, ex) in batch.iter().enumerate() {
        for (x, t) in ex.inputs.iter().zip(&ex.targets) {
            let trace = model.forward_trace(x)?;
            let y = trace.last().unwrap();
            total += loss_term(y, t, i)?;
            let norm = l1(t, i)?;
            let d_out = y.iter().zip(t).map(|(p, q)| 2.0 * (p - q) / (norm * b)).collect();
            model.backward(&trace, d_out, &mut g);
        }
    }
    Ok((total / b, g))
}
