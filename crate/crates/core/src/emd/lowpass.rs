//! First-order temporal low-pass filter over BEV maps.

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Filter state `I^f`. Each step moves it toward the input by `1 / (1 + tau)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowPassState {
    tau: f64,
    filtered: Option<Grid<f64>>,
}

impl LowPassState {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Config(format!("low-pass tau must be positive, got {tau}")));
        }
        Ok(Self { tau, filtered: None })
    }

    /// State seeded with an explicit filtered map.
    pub fn with_filtered(tau: f64, filtered: Grid<f64>) -> Result<Self> {
        let mut s = Self::new(tau)?;
        s.filtered = Some(filtered);
        Ok(s)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn gain(&self) -> f64 {
        1.0 / (1.0 + self.tau)
    }

    pub fn filtered(&self) -> Option<&Grid<f64>> {
        self.filtered.as_ref()
    }

    pub fn is_initialized(&self) -> bool {
        self.filtered.is_some()
    }

    pub fn reset(&mut self) {
        self.filtered = None;
    }

    /// Advances the filter by one frame and returns the new `I^f`. The first
    /// call copies the input.
    pub fn step(&mut self, input: &Grid<f64>) -> Result<&Grid<f64>> {
        let gain = self.gain();
        match &mut self.filtered {
            None => self.filtered = Some(input.clone()),
            Some(f) => {
                if !f.same_shape(input) {
                    return Err(Error::Validation(format!(
                        "low-pass input is {:?}, state is {:?}",
                        input.shape(),
                        f.shape()
                    )));
                }
                for (s, &x) in f.as_mut_slice().iter_mut().zip(input.as_slice()) {
                    *s += gain * (x - *s);
                }
            }
        }
        Ok(self.filtered.as_ref().expect("initialized above"))
    }
}

/// Functional form of [`LowPassState::step`].
pub fn lowpass_step(state: &mut LowPassState, input: &Grid<f64>) -> Result<Grid<f64>> {
    state.step(input).cloned()
}
