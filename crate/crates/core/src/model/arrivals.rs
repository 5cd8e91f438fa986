use serde::{Deserialize, Serialize};

use super::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalKind {
    /// `batch` packets with probability `mean / batch`, else none.
    BernoulliBatch,
    Poisson,
    /// `floor((t+1) * mean) - floor(t * mean)` packets in slot `t`.
    Deterministic,
}

/// I.i.d. per-slot packet arrivals with finite second moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrivalProcess {
    pub kind: ArrivalKind,
    pub mean: f64,
    #[serde(default = "one")]
    pub batch: u32,
}

fn one() -> u32 {
    1
}

impl ArrivalProcess {
    pub fn bernoulli(mean: f64) -> Self {
        Self { kind: ArrivalKind::BernoulliBatch, mean, batch: 1 }
    }

    pub fn bernoulli_batch(mean: f64, batch: u32) -> Self {
        Self { kind: ArrivalKind::BernoulliBatch, mean, batch }
    }

    pub fn poisson(mean: f64) -> Self {
        Self { kind: ArrivalKind::Poisson, mean, batch: 1 }
    }

    pub fn deterministic(mean: f64) -> Self {
        Self { kind: ArrivalKind::Deterministic, mean, batch: 1 }
    }

    pub fn check(&self) -> Result<(), String> {
        if !(self.mean.is_finite() && self.mean >= 0.0) {
            return Err(format!("arrival mean {} must be finite and >= 0", self.mean));
        }
        if self.kind == ArrivalKind::BernoulliBatch {
            if self.batch == 0 {
                return Err("bernoulli_batch needs batch >= 1".into());
            }
            if self.mean > self.batch as f64 {
                return Err(format!("bernoulli_batch mean {} exceeds batch {}", self.mean, self.batch));
            }
        }
        Ok(())
    }

    /// Per-slot variance, used for confidence bounds.
    pub fn variance(&self) -> f64 {
        match self.kind {
            ArrivalKind::BernoulliBatch => {
                let b = self.batch as f64;
                let p = self.mean / b;
                b * b * p * (1.0 - p)
            }
            ArrivalKind::Poisson => self.mean,
            ArrivalKind::Deterministic => {
                let f = self.mean.fract();
                f * (1.0 - f)
            }
        }
    }

    /// Packets arriving in `slot`.
    pub fn sample(&self, rng: &mut RngStream, slot: u64) -> u64 {
        match self.kind {
            ArrivalKind::BernoulliBatch => {
                if rng.bernoulli(self.mean / self.batch as f64) {
                    self.batch as u64
                } else {
                    0
                }
            }
            ArrivalKind::Poisson => rng.poisson(self.mean),
            ArrivalKind::Deterministic => {
                let hi = ((slot + 1) as f64 * self.mean).floor();
                let lo = (slot as f64 * self.mean).floor();
                (hi - lo) as u64
            }
        }
    }
}

/// Free-function form of [`ArrivalProcess::sample`].
pub fn sample_arrivals(process: &ArrivalProcess, rng: &mut RngStream, slot: u64) -> u64 {
    process.sample(rng, slot)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_and_bound(p: &ArrivalProcess, draws: u64, seed: u64) -> (f64, f64) {
        let mut rng = RngStream::new(seed, 0);
        let total: u64 = (0..draws).map(|t| sample_arrivals(p, &mut rng, t)).sum();
        let se = (p.variance() / draws as f64).sqrt();
        (total as f64 / draws as f64, se)
    }

    #[test]
    fn deterministic_unit_rate() {
        let p = ArrivalProcess::deterministic(1.0);
        let mut rng = RngStream::new(0, 0);
        assert!((0..100).all(|t| p.sample(&mut rng, t) == 1));
        let frac = ArrivalProcess::deterministic(0.25);
        let total: u64 = (0..400).map(|t| frac.sample(&mut rng, t)).sum();
        assert_eq!(total, 100);
    }

    #[test]
    fn bernoulli_half_within_three_sigma() {
        let p = ArrivalProcess::bernoulli(0.5);
        let mut rng = RngStream::new(9, 0);
        assert!((0..1000).all(|t| p.sample(&mut rng, t) <= 1));
        let (m, se) = mean_and_bound(&p, 100_000, 11);
        assert!((m - 0.5).abs() <= 3.0 * se, "mean {m}, se {se}");
    }

    #[test]
    fn zero_mean_poisson() {
        let p = ArrivalProcess::poisson(0.0);
        let mut rng = RngStream::new(3, 0);
        assert!((0..1000).all(|t| p.sample(&mut rng, t) == 0));
    }

    #[test]
    fn every_kind_within_four_standard_errors() {
        for (i, p) in [
            ArrivalProcess::bernoulli(0.3),
            ArrivalProcess::bernoulli_batch(1.2, 4),
            ArrivalProcess::poisson(0.7),
            ArrivalProcess::poisson(12.0),
            ArrivalProcess::deterministic(0.37),
        ]
        .iter()
        .enumerate()
        {
            let (m, se) = mean_and_bound(p, 1_000_000, 100 + i as u64);
            let tol = (4.0 * se).max(1e-6);
            assert!((m - p.mean).abs() <= tol, "{p:?}: {m} vs {} (tol {tol})", p.mean);
        }
    }

    #[test]
    fn checks() {
        assert!(ArrivalProcess::bernoulli_batch(3.0, 2).check().is_err());
        assert!(ArrivalProcess::bernoulli_batch(1.0, 0).check().is_err());
        assert!(ArrivalProcess::poisson(-1.0).check().is_err());
        assert!(ArrivalProcess::poisson(1.0).check().is_ok());
    }
}
