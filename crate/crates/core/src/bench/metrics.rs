use crate::error::{DpmError, Result};

fn same_len(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(DpmError::LengthMismatch { left: a, right: b })
    }
}

/// `Σ_j (f̂(y_j) − f(y_j))²`.
pub fn density_error(fhat: &[f64], fref: &[f64]) -> Result<f64> {
    same_len(fhat.len(), fref.len())?;
    Ok(fhat.iter().zip(fref).map(|(a, b)| (a - b).powi(2)).sum())
}

/// `Σ_j (f̂(y_j) − f̂_ref(y_j))² / Σ_j f̂_ref(y_j)²`.
///
/// ```
/// use dpm_seq::bench::relative_error;
///
/// let r = relative_error(&[1.0, 1.0], &[1.0, 2.0]).unwrap();
/// assert!((r - 0.2).abs() < 1e-15);
/// ```
pub fn relative_error(method: &[f64], reference: &[f64]) -> Result<f64> {
    let num = density_error(method, reference)?;
    let den: f64 = reference.iter().map(|r| r * r).sum();
    if !(den > 0.0) || !den.is_finite() {
        return Err(DpmError::DegenerateReference);
    }
    Ok(num / den)
}

/// Fraction of positions where the two labelings agree.
pub fn concordance<T: PartialEq>(a: &[T], b: &[T]) -> Result<f64> {
    same_len(a.len(), b.len())?;
    if a.is_empty() {
        return Err(DpmError::EmptyData);
    }
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count();
    Ok(agree as f64 / a.len() as f64)
}
