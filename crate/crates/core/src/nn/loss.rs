use super::NnError;
use crate::autodiff::Scalar;

/// Mean of squared componentwise differences.
pub fn mse_loss<S: Scalar>(pred: &[S], target: &[f64]) -> Result<S, NnError> {
    if pred.is_empty() || pred.len() != target.len() {
        return Err(NnError::Shape(format!(
            "{} predictions vs {} targets",
            pred.len(),
            target.len()
        )));
    }
    let mut acc: Option<S> = None;
    for (p, &t) in pred.iter().zip(target) {
        let d = *p - p.lift(t);
        let sq = d * d;
        acc = Some(match acc {
            None => sq,
            Some(a) => a + sq,
        });
    }
    let sum = acc.unwrap();
    Ok(sum / sum.lift(pred.len() as f64))
}
