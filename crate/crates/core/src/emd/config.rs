use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which EMD connections the fast search evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connections {
    #[default]
    Both,
    HorizontalOnly,
    VerticalOnly,
}

impl Connections {
    pub fn horizontal(self) -> bool {
        self != Connections::VerticalOnly
    }

    pub fn vertical(self) -> bool {
        self != Connections::HorizontalOnly
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    /// Search radius `R` in cells.
    pub max_distance: usize,
    /// Side `m` of the square matching patch, odd.
    pub patch_size: usize,
    /// `(w1, w2, w3)` for the Gaussian, occupancy and height energies.
    pub weights: [f64; 3],
    /// A cell is rough-moving when its best directional fast-search score
    /// exceeds this.
    pub fast_score_threshold: f64,
    /// Minimum inhibited displacement, in cells per frame interval.
    pub moving_magnitude_threshold: f64,
    /// A match counts as motion only if it leaves at least this many fewer
    /// mismatched occupancy cells in the patch than zero displacement does.
    pub min_occupancy_gain: f64,
    pub connections: Connections,
    /// Low-pass time constant, in frames.
    pub tau: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            max_distance: 10,
            patch_size: 21,
            weights: [0.1, 0.8, 0.1],
            fast_score_threshold: 0.0,
            moving_magnitude_threshold: 1.0,
            min_occupancy_gain: 4.0,
            connections: Connections::Both,
            tau: 2.0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_distance < 1 {
            return Err(Error::Config("max_distance must be at least 1".into()));
        }
        if self.patch_size < 3 || self.patch_size % 2 == 0 {
            return Err(Error::Config(format!(
                "patch_size must be odd and at least 3, got {}",
                self.patch_size
            )));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::Config("weights must be nonnegative".into()));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("weights must sum to 1, got {sum}")));
        }
        if !self.fast_score_threshold.is_finite()
            || !(self.moving_magnitude_threshold >= 0.0)
            || !(self.min_occupancy_gain >= 0.0)
        {
            return Err(Error::Config("thresholds must be finite and nonnegative".into()));
        }
        if !(self.tau > 0.0) {
            return Err(Error::Config(format!("tau must be positive, got {}", self.tau)));
        }
        Ok(())
    }
}

/// Square ring kernel: `center` at the middle, `border` on the outermost
/// ring, zero elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InhibitionKernel {
    pub size: usize,
    pub center: f64,
    pub border: f64,
}

impl Default for InhibitionKernel {
    fn default() -> Self {
        Self {
            size: 15,
            center: 0.56,
            border: -0.01,
        }
    }
}

impl InhibitionKernel {
    pub fn ring_len(&self) -> usize {
        4 * (self.size - 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.size < 3 || self.size % 2 == 0 {
            return Err(Error::Config(format!(
                "inhibition size must be odd and at least 3, got {}",
                self.size
            )));
        }
        if !(self.center > 0.0) {
            return Err(Error::Config("inhibition center weight must be positive".into()));
        }
        let sum = self.center + self.ring_len() as f64 * self.border;
        if sum.abs() > 1e-12 {
            return Err(Error::Config(format!(
                "inhibition kernel must satisfy p + 4(l-1)q = 0, got {} + 4*{}*{} = {sum}",
                self.center,
                self.size - 1,
                self.border
            )));
        }
        Ok(())
    }

    /// Dense `size x size` kernel, row-major.
    pub fn dense(&self) -> Vec<f64> {
        let l = self.size;
        let mut k = vec![0.0; l * l];
        for r in 0..l {
            for c in 0..l {
                if r == 0 || c == 0 || r == l - 1 || c == l - 1 {
                    k[r * l + c] = self.border;
                }
            }
        }
        k[(l / 2) * l + l / 2] = self.center;
        k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SearchConfig::default().validate().unwrap();
        InhibitionKernel::default().validate().unwrap();
    }

    #[test]
    fn weight_sum_checked() {
        let c = SearchConfig {
            weights: [0.2, 0.8, 0.1],
            ..SearchConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn kernel_identity_quoted() {
        let k = InhibitionKernel {
            border: -0.02,
            ..InhibitionKernel::default()
        };
        match k.validate() {
            Err(Error::Config(msg)) => assert!(msg.contains("p + 4(l-1)q = 0")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dense_kernel_sums_to_zero_with_empty_interior() {
        let k = InhibitionKernel::default();
        let d = k.dense();
        assert!(d.iter().sum::<f64>().abs() < 1e-12);
        let nonzero = d.iter().filter(|&&v| v != 0.0).count();
        assert_eq!(nonzero, k.ring_len() + 1);
    }
}
