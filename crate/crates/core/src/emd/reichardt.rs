//! Scalar mirror-symmetric EMD correlator, the reference model behind the
//! grid detector.

use crate::error::{Error, Result};

/// `R[t] = a[t - delay] * b[t] - a[t] * b[t - delay]`, zero for `t < delay`.
///
/// A stimulus that reaches `a` and then `b` after `delay` frames gives a
/// positive response; the mirrored stimulus gives exactly the negation.
///
/// ```
/// use emd_motion::emd::emd_pair_response;
/// let a = [0.0, 1.0, 0.0, 0.0];
/// let b = [0.0, 0.0, 1.0, 0.0];
/// let fwd = emd_pair_response(&a, &b, 1).unwrap();
/// let back = emd_pair_response(&b, &a, 1).unwrap();
/// assert_eq!(fwd, vec![0.0, 0.0, 1.0, 0.0]);
/// assert!(fwd.iter().zip(&back).all(|(f, b)| *f == -*b));
/// ```
pub fn emd_pair_response(a: &[f64], b: &[f64], delay: usize) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::Validation(format!(
            "signal lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if delay == 0 {
        return Err(Error::Validation("delay must be at least one frame".into()));
    }
    Ok((0..a.len())
        .map(|t| {
            if t < delay {
                0.0
            } else {
                a[t - delay] * b[t] - a[t] * b[t - delay]
            }
        })
        .collect())
}
