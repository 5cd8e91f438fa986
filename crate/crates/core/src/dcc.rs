//! Device-centric cellular + local D2D control with virtual queues.
//!
//! Every device `k` wants its own traffic from the base station. `lambda_k`
//! is the admission virtual queue of `k`, `eta[n][k]` the local-coupling
//! virtual queue, and `Q[n][k]` the real queue of `k`'s packets held by
//! relay `n`. Per slot the base station makes at most one unit cellular
//! transmission and the devices at most one unit local transmission.
//!
//! The schedulers minimize the right-hand side of the drift bound
//!
//! ```text
//!   B - 2 E[ sum_k lambda_k (g_ks^k + sum_n g_kn^k - y_k)
//!          + sum_{n,k} (eta_nk - Q_nk)(g_ns^k - g_kn^k)
//!          + sum_{n,k} Q_nk beta ]
//! ```
//!
//! Collecting coefficients of each decision variable gives the weights:
//!
//! ```text
//!   direct cellular  g_ks^k : lambda_k
//!   relay cellular   g_ns^k : eta_nk - Q_nk
//!   local unicast    g_kn^k : lambda_k - eta_nk + Q_nk
//!   hyperarc       f_{n,J}  : sum_{k in J} (lambda_k - eta_nk + Q_nk)
//! ```
//!
//! and each scheduler activates its largest positive weight.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::UtilitySpec;
use crate::policies::dars_rate_control;
use crate::scalar::Scalar;

/// Devices for which the hyperedge set defaults to every receiver subset.
pub const MAX_DEFAULT_HYPEREDGE_DEVICES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DccMode {
    #[default]
    Unicast,
    Broadcast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalMode {
    /// `y_k(t)` drawn from each device's arrival process.
    #[default]
    Exogenous,
    /// `y_k(t)` chosen by the drift-plus-penalty flow controller.
    FlowControl,
}

/// One broadcast hyperarc: `sender` reaches every device in `receivers`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Hyperedge {
    pub sender: usize,
    pub receivers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DccError {
    #[error("invalid hyperedge {0:?}: receivers must be nonempty, distinct, in range and exclude the sender")]
    BadHyperedge(Hyperedge),
    #[error("{0} devices need an explicit hyperedge list (default covers at most {MAX_DEFAULT_HYPEREDGE_DEVICES})")]
    TooManyDevices(usize),
    #[error("invalid parameter: {0}")]
    BadParams(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DccTopology {
    pub n_devices: usize,
    pub hyperedges: Vec<Hyperedge>,
}

impl DccTopology {
    /// Hyperedges are every nonempty subset of the other devices.
    pub fn all_subsets(n_devices: usize) -> Result<Self, DccError> {
        if n_devices > MAX_DEFAULT_HYPEREDGE_DEVICES {
            return Err(DccError::TooManyDevices(n_devices));
        }
        let mut hyperedges = Vec::new();
        for sender in 0..n_devices {
            let others: Vec<usize> = (0..n_devices).filter(|&k| k != sender).collect();
            let mut subsets: Vec<Vec<usize>> = (1u32..(1 << others.len()))
                .map(|mask| others.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &k)| k).collect())
                .collect();
            subsets.sort();
            hyperedges.extend(subsets.into_iter().map(|receivers| Hyperedge { sender, receivers }));
        }
        Ok(Self { n_devices, hyperedges })
    }

    /// One singleton hyperedge `(n, {k})` per ordered pair.
    pub fn singletons(n_devices: usize) -> Self {
        let hyperedges = (0..n_devices)
            .flat_map(|n| {
                (0..n_devices).filter(move |&k| k != n).map(move |k| Hyperedge { sender: n, receivers: vec![k] })
            })
            .collect();
        Self { n_devices, hyperedges }
    }

    pub fn with_hyperedges(n_devices: usize, mut hyperedges: Vec<Hyperedge>) -> Result<Self, DccError> {
        for h in &mut hyperedges {
            h.receivers.sort_unstable();
            let distinct = h.receivers.windows(2).all(|w| w[0] != w[1]);
            if h.receivers.is_empty()
                || !distinct
                || h.sender >= n_devices
                || h.receivers.iter().any(|&k| k >= n_devices || k == h.sender)
            {
                return Err(DccError::BadHyperedge(h.clone()));
            }
        }
        hyperedges.sort();
        hyperedges.dedup();
        Ok(Self { n_devices, hyperedges })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DccParams<T = f64> {
    pub m: T,
    pub beta: T,
    pub r_k_max: T,
    #[serde(default)]
    pub mode: DccMode,
    #[serde(default)]
    pub arrival_mode: ArrivalMode,
}

impl<T: Scalar> Default for DccParams<T> {
    fn default() -> Self {
        Self {
            m: T::of(100.0),
            beta: T::of(0.05),
            r_k_max: T::one(),
            mode: DccMode::Unicast,
            arrival_mode: ArrivalMode::Exogenous,
        }
    }
}

impl<T: Scalar> DccParams<T> {
    pub fn check(&self) -> Result<(), DccError> {
        if !(self.beta > T::zero() && self.beta.is_finite()) {
            return Err(DccError::BadParams(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.r_k_max > T::zero() && self.r_k_max.is_finite()) {
            return Err(DccError::BadParams(format!("R_k_max must be positive and finite, got {}", self.r_k_max)));
        }
        if !(self.m > T::zero() && self.m.is_finite()) {
            return Err(DccError::BadParams(format!("M must be positive, got {}", self.m)));
        }
        Ok(())
    }
}

/// Virtual and real queues `(lambda, eta, Q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DccState<T = f64> {
    n: usize,
    pub lambda: Vec<T>,
    eta: Vec<T>,
    q: Vec<T>,
}

impl<T: Scalar> DccState<T> {
    pub fn new(n_devices: usize) -> Self {
        Self {
            n: n_devices,
            lambda: vec![T::zero(); n_devices],
            eta: vec![T::zero(); n_devices * n_devices],
            q: vec![T::zero(); n_devices * n_devices],
        }
    }

    pub fn n_devices(&self) -> usize {
        self.n
    }

    fn pair(&self, n: usize, k: usize) -> usize {
        debug_assert!(n != k && n < self.n && k < self.n);
        n * self.n + k
    }

    pub fn eta(&self, n: usize, k: usize) -> T {
        self.eta[self.pair(n, k)]
    }

    pub fn q(&self, n: usize, k: usize) -> T {
        self.q[self.pair(n, k)]
    }

    pub fn set_eta(&mut self, n: usize, k: usize, v: T) {
        let i = self.pair(n, k);
        self.eta[i] = v;
    }

    pub fn set_q(&mut self, n: usize, k: usize, v: T) {
        let i = self.pair(n, k);
        self.q[i] = v;
    }

    /// Ordered pairs `(n, k)`, `n != k`, in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.n;
        (0..n).flat_map(move |a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
    }

    /// `sum lambda + sum eta + sum Q`.
    pub fn total(&self) -> T {
        let lam: T = self.lambda.iter().copied().sum();
        let pairs: T = self.pairs().map(|(n, k)| self.eta(n, k) + self.q(n, k)).sum();
        lam + pairs
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            n: self.n,
            lambda: self.lambda.iter().map(|&v| v * c).collect(),
            eta: self.eta.iter().map(|&v| v * c).collect(),
            q: self.q.iter().map(|&v| v * c).collect(),
        }
    }

    pub fn all_nonnegative(&self) -> bool {
        self.lambda.iter().chain(&self.eta).chain(&self.q).all(|&v| v >= T::zero())
    }

    fn local_weight(&self, n: usize, k: usize) -> T {
        self.lambda[k] - self.eta(n, k) + self.q(n, k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CellularDecision {
    Idle,
    /// `g_{k,s}^k = 1`
    Direct {
        device: usize,
    },
    /// `g_{n,s}^k = 1`
    Relay {
        relay: usize,
        device: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LocalDecision {
    Idle,
    /// `g_{k,n}^k = 1`: relay `relay` delivers one of `device`'s packets.
    Unicast {
        relay: usize,
        device: usize,
    },
    /// `f_{n,J} = 1`
    Broadcast {
        relay: usize,
        receivers: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DccDecision {
    pub cellular: CellularDecision,
    pub local: LocalDecision,
}

impl DccDecision {
    pub fn idle() -> Self {
        Self { cellular: CellularDecision::Idle, local: LocalDecision::Idle }
    }

    pub fn g_direct<T: Scalar>(&self, k: usize) -> T {
        indicator(self.cellular == CellularDecision::Direct { device: k })
    }

    pub fn g_relay<T: Scalar>(&self, n: usize, k: usize) -> T {
        indicator(self.cellular == CellularDecision::Relay { relay: n, device: k })
    }

    /// `g_{k,n}^k`: local deliveries of `k`'s packets by `n`. For a hyperarc
    /// this is `sum_{J : k in J, n = sender} f_{n,J}`.
    pub fn g_local<T: Scalar>(&self, n: usize, k: usize) -> T {
        match &self.local {
            LocalDecision::Unicast { relay, device } => indicator(*relay == n && *device == k),
            LocalDecision::Broadcast { relay, receivers } => indicator(*relay == n && receivers.contains(&k)),
            LocalDecision::Idle => T::zero(),
        }
    }

    /// `x_{n,k} = max(g_{n,s}^k - beta, 0)`.
    pub fn x<T: Scalar>(&self, n: usize, k: usize, beta: T) -> T {
        (self.g_relay::<T>(n, k) - beta).max(T::zero())
    }

    /// `h_{n,k} = g_{k,n}^k`.
    pub fn h<T: Scalar>(&self, n: usize, k: usize) -> T {
        self.g_local(n, k)
    }

    /// Total service offered to `lambda_k`.
    pub fn lambda_service<T: Scalar>(&self, k: usize, n_devices: usize) -> T {
        let local: T = (0..n_devices).filter(|&n| n != k).map(|n| self.g_local::<T>(n, k)).sum();
        self.g_direct::<T>(k) + local
    }
}

fn indicator<T: Scalar>(b: bool) -> T {
    if b {
        T::one()
    } else {
        T::zero()
    }
}

/// Admission `argmax_{0 <= y <= R_k_max} M U_k(y) - lambda_k y`.
pub fn dcc_flow_control<T: Scalar>(lambda_k: T, params: &DccParams<T>, utility: &UtilitySpec<T>) -> T {
    dars_rate_control(lambda_k, params.m, params.r_k_max, utility)
}

/// Keeps the first strictly larger positive weight, so ties resolve to the
/// earliest candidate in enumeration order.
fn argmax_positive<T: Scalar, C>(cands: impl Iterator<Item = (C, T)>) -> Option<(C, T)> {
    cands.fold(None, |best, (c, w)| match best {
        None if w > T::zero() => Some((c, w)),
        Some((_, bw)) if w > bw => Some((c, w)),
        other => other,
    })
}

/// Direct candidates `k = 0..N` come before relay candidates `(n, k)`.
pub fn dcc_cellular_schedule<T: Scalar>(state: &DccState<T>) -> CellularDecision {
    let direct = (0..state.n).map(|k| (CellularDecision::Direct { device: k }, state.lambda[k]));
    let relay =
        state.pairs().map(|(n, k)| (CellularDecision::Relay { relay: n, device: k }, state.eta(n, k) - state.q(n, k)));
    argmax_positive(direct.chain(relay)).map_or(CellularDecision::Idle, |(c, _)| c)
}

pub fn dcc_local_schedule_unicast<T: Scalar>(state: &DccState<T>) -> LocalDecision {
    let cands = state.pairs().map(|(n, k)| (LocalDecision::Unicast { relay: n, device: k }, state.local_weight(n, k)));
    argmax_positive(cands).map_or(LocalDecision::Idle, |(c, _)| c)
}

/// Weight of hyperarc `f_{n,J}`.
pub fn hyperarc_weight<T: Scalar>(state: &DccState<T>, edge: &Hyperedge) -> T {
    edge.receivers.iter().map(|&k| state.local_weight(edge.sender, k)).sum()
}

pub fn dcc_local_schedule_broadcast<T: Scalar>(state: &DccState<T>, hyperedges: &[Hyperedge]) -> LocalDecision {
    let cands = hyperedges.iter().map(|h| (h, hyperarc_weight(state, h)));
    argmax_positive(cands).map_or(LocalDecision::Idle, |(h, _)| LocalDecision::Broadcast {
        relay: h.sender,
        receivers: h.receivers.clone(),
    })
}

pub fn dcc_decide<T: Scalar>(state: &DccState<T>, topo: &DccTopology, mode: DccMode) -> DccDecision {
    let local = match mode {
        DccMode::Unicast => dcc_local_schedule_unicast(state),
        DccMode::Broadcast => dcc_local_schedule_broadcast(state, &topo.hyperedges),
    };
    DccDecision { cellular: dcc_cellular_schedule(state), local }
}

/// Service actually drained from each `lambda_k`.
pub type LambdaService<T> = Vec<T>;

/// Applies `max(old - service, 0) + arrival` to every queue and returns
/// the service drained from each `lambda_k`.
pub fn dcc_update_queues<T: Scalar>(
    state: &mut DccState<T>,
    decision: &DccDecision,
    arrivals: &[T],
    beta: T,
) -> LambdaService<T> {
    let n = state.n;
    let mut drained = Vec::with_capacity(n);
    for k in 0..n {
        let service = decision.lambda_service::<T>(k, n);
        let served = service.min(state.lambda[k]);
        drained.push(served);
        state.lambda[k] = (state.lambda[k] - service).max(T::zero()) + arrivals[k];
    }
    let pairs: Vec<(usize, usize)> = state.pairs().collect();
    for (r, k) in pairs {
        let eta = (state.eta(r, k) - decision.g_relay::<T>(r, k)).max(T::zero()) + decision.g_local::<T>(r, k);
        state.set_eta(r, k, eta);
        let q = (state.q(r, k) - decision.h::<T>(r, k)).max(T::zero()) + decision.x(r, k, beta);
        state.set_q(r, k, q);
    }
    drained
}

#[cfg(test)]
mod tests;
