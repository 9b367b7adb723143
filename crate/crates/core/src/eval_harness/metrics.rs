//! Accuracy, macro-F1, MAE and RMSE.

use std::collections::BTreeSet;

use super::EvalError;

/// Accuracy and macro-F1 over (gold, prediction) pairs. A missing
/// prediction counts as wrong and contributes no label of its own.
///
/// Macro-F1 averages per-label F1 over every label seen in gold or
/// predictions; a label with zero precision and recall scores 0.
pub fn classification_metrics(pairs: &[(String, Option<String>)]) -> Result<(f64, f64), EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let n = pairs.len() as f64;
    let correct = pairs
        .iter()
        .filter(|(g, p)| p.as_deref() == Some(g.as_str()))
        .count();

    let labels: BTreeSet<&str> = pairs
        .iter()
        .flat_map(|(g, p)| std::iter::once(g.as_str()).chain(p.as_deref()))
        .collect();
    let f1_sum: f64 = labels
        .iter()
        .map(|&label| {
            let tp = pairs
                .iter()
                .filter(|(g, p)| g == label && p.as_deref() == Some(label))
                .count() as f64;
            let predicted = pairs.iter().filter(|(_, p)| p.as_deref() == Some(label)).count() as f64;
            let actual = pairs.iter().filter(|(g, _)| g == label).count() as f64;
            let precision = if predicted > 0.0 { tp / predicted } else { 0.0 };
            let recall = if actual > 0.0 { tp / actual } else { 0.0 };
            if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            }
        })
        .sum();
    Ok((correct as f64 / n, f1_sum / labels.len() as f64))
}

pub fn regression_metrics(pairs: &[(i64, i64)]) -> Result<(f64, f64), EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let n = pairs.len() as f64;
    let abs: f64 = pairs.iter().map(|(g, p)| (g - p).abs() as f64).sum();
    let sq: f64 = pairs.iter().map(|(g, p)| ((g - p) * (g - p)) as f64).sum();
    Ok((abs / n, (sq / n).sqrt()))
}
