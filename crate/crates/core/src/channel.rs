//! Large-scale path loss, noise conversion, and Rayleigh fading states.
//!
//! Fading states are stored pre-normalized by the receiver noise power, so
//! `g = |h|^2 / sigma^2` is the only channel quantity the rate formulas use.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Geometry, propagation, and noise parameters shared by both links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    /// Transmitter to legitimate receiver distance in meters.
    pub d_l: f64,
    /// Transmitter to eavesdropper distance in meters.
    pub d_e: f64,
    /// Reference path loss at 1 m, in dB.
    pub pl0_db: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    pub noise_l_dbm: f64,
    pub noise_e_dbm: f64,
    pub seed: u64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            d_l: 30.0,
            d_e: 30.0,
            pl0_db: -30.0,
            alpha: 4.0,
            noise_l_dbm: -80.0,
            noise_e_dbm: -80.0,
            seed: 1,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, d) in [("d_l", self.d_l), ("d_e", self.d_e)] {
            if !(d.is_finite() && d > 0.0) {
                return Err(invalid(format!("channel.{name} must be a positive distance, got {d}")));
            }
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(invalid(format!("channel.alpha must be positive, got {}", self.alpha)));
        }
        if !self.pl0_db.is_finite() {
            return Err(invalid("channel.pl0_db must be finite"));
        }
        for (name, n) in [("noise_l_dbm", self.noise_l_dbm), ("noise_e_dbm", self.noise_e_dbm)] {
            let w = dbm_to_watt(n);
            if !(w.is_finite() && w > 0.0) {
                return Err(invalid(format!("channel.{name} must convert to a positive power, got {n} dBm")));
            }
        }
        Ok(())
    }

    /// Mean normalized gains `(E[g_L], E[g_E])`, i.e. path loss over noise power.
    pub fn mean_gains(&self) -> Result<(f64, f64)> {
        self.validate()?;
        let pl_l = path_loss_linear(self.d_l, self.pl0_db, self.alpha)?;
        let pl_e = path_loss_linear(self.d_e, self.pl0_db, self.alpha)?;
        Ok((pl_l / dbm_to_watt(self.noise_l_dbm), pl_e / dbm_to_watt(self.noise_e_dbm)))
    }
}

/// One fading realization, as noise-normalized power gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingState {
    pub g_l: f64,
    pub g_e: f64,
}

impl FadingState {
    pub fn new(g_l: f64, g_e: f64) -> Result<Self> {
        if !(g_l.is_finite() && g_l >= 0.0 && g_e.is_finite() && g_e >= 0.0) {
            return Err(invalid(format!("fading gains must be finite and non-negative, got ({g_l}, {g_e})")));
        }
        Ok(Self { g_l, g_e })
    }
}

/// Linear power gain `10^(pl0_db/10) * d^(-alpha)`.
pub fn path_loss_linear(d: f64, pl0_db: f64, alpha: f64) -> Result<f64> {
    if !(d.is_finite() && d > 0.0) {
        return Err(invalid(format!("distance must be positive, got {d}")));
    }
    Ok(10f64.powf(pl0_db / 10.0) * d.powf(-alpha))
}

pub fn dbm_to_watt(x: f64) -> f64 {
    10f64.powf((x - 30.0) / 10.0)
}

/// Draws `n` i.i.d. Rayleigh fading states.
///
/// State `i` uses its own ChaCha stream keyed by `(cfg.seed, i)`, so the output
/// does not depend on how the work is scheduled across threads.
pub fn sample_states(cfg: &ChannelConfig, n: usize) -> Result<Vec<FadingState>> {
    if n == 0 {
        return Err(invalid("number of fading states must be at least 1"));
    }
    let (mean_l, mean_e) = cfg.mean_gains()?;
    let states = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let x_l: f64 = Exp1.sample(&mut rng);
            let x_e: f64 = Exp1.sample(&mut rng);
            FadingState { g_l: mean_l * x_l, g_e: mean_e * x_e }
        })
        .collect();
    Ok(states)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn path_loss_examples() {
        assert!(rel(path_loss_linear(1.0, -30.0, 4.0).unwrap(), 1.0e-3) < 1e-12);
        assert!(rel(path_loss_linear(30.0, -30.0, 4.0).unwrap(), 1.23457e-9) < 5e-6);
        assert!(rel(path_loss_linear(1.0, 0.0, 4.0).unwrap(), 1.0) < 1e-15);
    }

    #[test]
    fn path_loss_rejects_bad_distance() {
        assert!(path_loss_linear(0.0, -30.0, 4.0).is_err());
        assert!(path_loss_linear(-2.0, -30.0, 4.0).is_err());
    }

    #[test]
    fn dbm_examples() {
        assert!(rel(dbm_to_watt(30.0), 1.0) < 1e-15);
        assert!(rel(dbm_to_watt(0.0), 1.0e-3) < 1e-15);
        assert!(rel(dbm_to_watt(-80.0), 1.0e-11) < 1e-12);
    }

    #[test]
    fn zero_states_rejected() {
        assert!(sample_states(&ChannelConfig::default(), 0).is_err());
    }

    #[test]
    fn single_state_is_finite() {
        let s = sample_states(&ChannelConfig::default(), 1).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s[0].g_l.is_finite() && s[0].g_l >= 0.0);
        assert!(s[0].g_e.is_finite() && s[0].g_e >= 0.0);
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = ChannelConfig { d_l: 0.0, ..Default::default() };
        assert!(sample_states(&cfg, 3).is_err());
        let cfg = ChannelConfig { alpha: -1.0, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = ChannelConfig { noise_e_dbm: f64::NEG_INFINITY, ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn prefix_stable() {
        // Substreams are keyed by index, so a longer draw extends a shorter one.
        let cfg = ChannelConfig::default();
        let a = sample_states(&cfg, 10).unwrap();
        let b = sample_states(&cfg, 25).unwrap();
        assert_eq!(a[..], b[..10]);
    }

    #[test]
    fn fading_state_validation() {
        assert!(FadingState::new(1.0, 0.0).is_ok());
        assert!(FadingState::new(-1.0, 0.0).is_err());
        assert!(FadingState::new(f64::NAN, 1.0).is_err());
    }
}
