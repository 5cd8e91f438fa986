use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Per-device limits in packets/slot: computing power, energy budget and
/// willingness to relay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile<T = f64> {
    pub r_compute: T,
    pub r_energy: T,
    pub r_incentive: T,
}

impl<T: Scalar> DeviceProfile<T> {
    pub fn new(r_compute: T, r_energy: T, r_incentive: T) -> Self {
        Self { r_compute, r_energy, r_incentive }
    }

    /// A profile whose three limits are all `c`.
    pub fn uniform(c: T) -> Self {
        Self::new(c, c, c)
    }

    pub fn is_valid(&self) -> bool {
        [self.r_compute, self.r_energy, self.r_incentive].iter().all(|v| v.is_finite() && *v >= T::zero())
    }

    pub fn capability(&self) -> T {
        effective_capability(self)
    }
}

impl<T: Scalar> Default for DeviceProfile<T> {
    fn default() -> Self {
        Self::uniform(T::one())
    }
}

/// Per-slot intake a device can sustain: the smallest of its three limits.
pub fn effective_capability<T: Scalar>(profile: &DeviceProfile<T>) -> T {
    profile.r_compute.min(profile.r_energy).min(profile.r_incentive)
}
