use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::social::Millis;

/// Posting cadence: a base interval with symmetric uniform jitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cadence {
    pub base_interval_ms: u64,
    pub jitter_fraction: f64,
}

impl Cadence {
    pub fn validate(&self) -> Result<(), String> {
        if self.base_interval_ms == 0 {
            return Err("base_interval_ms must be positive".into());
        }
        if !(0.0..1.0).contains(&self.jitter_fraction) {
            return Err(format!("jitter_fraction {} outside [0, 1)", self.jitter_fraction));
        }
        Ok(())
    }
}

/// Draws the next delay uniformly from `[base*(1-j), base*(1+j)]` (inclusive,
/// rounded inward to whole milliseconds). Zero jitter returns `base` exactly.
pub fn schedule_delay<R: Rng + ?Sized>(cadence: &Cadence, rng: &mut R) -> Millis {
    debug_assert!(cadence.validate().is_ok(), "{cadence:?}");
    let base = cadence.base_interval_ms;
    let j = cadence.jitter_fraction;
    if j == 0.0 {
        return base;
    }
    let lo = (base as f64 * (1.0 - j)).ceil() as u64;
    let hi = (base as f64 * (1.0 + j)).floor() as u64;
    rng.random_range(lo..=hi.max(lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_jitter_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = Cadence {
            base_interval_ms: 60_000,
            jitter_fraction: 0.0,
        };
        assert_eq!(schedule_delay(&c, &mut rng), 60_000);
    }

    #[test]
    fn seeded_draws_repeat() {
        let c = Cadence {
            base_interval_ms: 60_000,
            jitter_fraction: 0.5,
        };
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..5).map(|_| schedule_delay(&c, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert!(draw(9).iter().all(|d| (30_000..=90_000).contains(d)));
    }

    #[test]
    fn fractional_bounds_round_inward() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = Cadence {
            base_interval_ms: 3,
            jitter_fraction: 0.5,
        };
        for _ in 0..200 {
            let d = schedule_delay(&c, &mut rng);
            assert!((2..=4).contains(&d));
        }
    }

    #[test]
    fn validation() {
        let ok = Cadence {
            base_interval_ms: 1,
            jitter_fraction: 0.99,
        };
        assert!(ok.validate().is_ok());
        assert!(Cadence { base_interval_ms: 0, ..ok }.validate().is_err());
        assert!(Cadence { jitter_fraction: 1.0, ..ok }.validate().is_err());
        assert!(Cadence { jitter_fraction: -0.1, ..ok }.validate().is_err());
    }
}
