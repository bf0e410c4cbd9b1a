use super::ModelParams;
use crate::error::{Error, Result};

/// Exponential moving average of the live weights. Only evaluation reads it.
#[derive(Debug, Clone, PartialEq)]
pub struct EmaParams {
    shadow: ModelParams,
    decay: f64,
}

impl EmaParams {
    pub fn new(live: &ModelParams, decay: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&decay) {
            return Err(Error::config(format!("EMA decay must lie in [0, 1], got {decay}")));
        }
        Ok(Self {
            shadow: live.clone(),
            decay,
        })
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn params(&self) -> &ModelParams {
        &self.shadow
    }

    pub fn into_params(self) -> ModelParams {
        self.shadow
    }

    /// `shadow <- decay * shadow + (1 - decay) * live`
    pub fn update(&mut self, live: &ModelParams) -> Result<()> {
        if !self.shadow.same_shape(live) {
            return Err(Error::domain("EMA shadow and live parameters differ in shape"));
        }
        let rho = self.decay;
        for (s, &l) in self.shadow.as_mut_slice().iter_mut().zip(live.as_slice()) {
            *s = rho * *s + (1.0 - rho) * l;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scalar(v: f64) -> ModelParams {
        ModelParams::from_flat(&[1, 1], vec![v, v]).unwrap()
    }

    #[test]
    fn decay_extremes() {
        let mut ema = EmaParams::new(&scalar(0.0), 0.0).unwrap();
        ema.update(&scalar(3.0)).unwrap();
        assert_eq!(ema.params(), &scalar(3.0));

        let mut ema = EmaParams::new(&scalar(2.0), 1.0).unwrap();
        for _ in 0..5 {
            ema.update(&scalar(-9.0)).unwrap();
        }
        assert_eq!(ema.params(), &scalar(2.0));
    }

    #[test]
    fn half_decay_two_updates() {
        let mut ema = EmaParams::new(&scalar(0.0), 0.5).unwrap();
        ema.update(&scalar(1.0)).unwrap();
        ema.update(&scalar(1.0)).unwrap();
        assert_eq!(ema.params().as_slice()[0], 0.75);
    }

    #[test]
    fn rejects_bad_decay_and_shapes() {
        assert!(EmaParams::new(&scalar(0.0), 1.5).is_err());
        let mut ema = EmaParams::new(&scalar(0.0), 0.9).unwrap();
        let other = ModelParams::zeros(&[2, 1]).unwrap();
        assert!(ema.update(&other).is_err());
    }

    proptest! {
        #[test]
        fn matches_closed_form(
            rho in 0.0f64..1.0,
            start in -5.0f64..5.0,
            lives in prop::collection::vec(-5.0f64..5.0, 1..30),
        ) {
            let mut ema = EmaParams::new(&scalar(start), rho).unwrap();
            for &l in &lives {
                ema.update(&scalar(l)).unwrap();
            }
            let t = lives.len() as i32;
            let mut closed = rho.powi(t) * start;
            for (i, &l) in lives.iter().enumerate() {
                closed += (1.0 - rho) * rho.powi(t - 1 - i as i32) * l;
            }
            prop_assert!((ema.params().as_slice()[0] - closed).abs() <= 1e-12);
        }
    }
}
