use serde::{Deserialize, Serialize};

use super::trace::Trace;
use super::{SimError, Window};

/// Cesàro averages over a measurement window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub window: Window,
    /// Delivered packets per slot, per flow.
    pub goodput: Vec<f64>,
    pub total_goodput: f64,
    /// Admitted packets per slot, per flow.
    pub admitted: Vec<f64>,
    pub avg_backlog: f64,
    /// Sum of flow utilities of the window goodputs; for DcC the window
    /// average of `sum_k U_k(y_k(t))`.
    pub utility: f64,
    pub delivered: u64,
    pub losses: u64,
}

impl Metrics {
    pub fn zero(n_flows: usize) -> Self {
        Self {
            window: Window::new(0, 0),
            goodput: vec![0.0; n_flows],
            total_goodput: 0.0,
            admitted: vec![0.0; n_flows],
            avg_backlog: 0.0,
            utility: 0.0,
            delivered: 0,
            losses: 0,
        }
    }
}

pub(crate) fn check_window(window: Window, len: u64) -> Result<(), SimError> {
    if window.is_empty() || window.end > len {
        return Err(SimError::EmptyWindow { start: window.start, end: window.end, len });
    }
    Ok(())
}

pub fn compute_metrics(trace: &Trace, window: Window) -> Result<Metrics, SimError> {
    check_window(window, trace.len())?;
    let slots = &trace.records[window.start as usize..window.end as usize];
    let n = window.len() as f64;
    let s = trace.n_flows();
    let mut delivered = vec![0u64; s];
    let mut admitted = vec![0u64; s];
    let mut losses = 0;
    let mut backlog = 0u128;
    for r in slots {
        for f in 0..s {
            delivered[f] += r.delivered[f];
            admitted[f] += r.admitted[f];
        }
        losses += r.lost.iter().sum::<u64>();
        backlog += r.backlog as u128;
    }
    let goodput: Vec<f64> = delivered.iter().map(|&d| d as f64 / n).collect();
    let utility = goodput.iter().zip(&trace.utilities).map(|(&g, u)| u.value(g).unwrap_or(0.0)).sum();
    Ok(Metrics {
        window,
        total_goodput: delivered.iter().sum::<u64>() as f64 / n,
        goodput,
        admitted: admitted.iter().map(|&a| a as f64 / n).collect(),
        avg_backlog: backlog as f64 / n,
        utility,
        delivered: delivered.iter().sum(),
        losses,
    })
}

/// Mean of `values[start..end]`.
pub fn window_mean(values: &[f64], window: Window) -> Result<f64, SimError> {
    check_window(window, values.len() as u64)?;
    let part = &values[window.start as usize..window.end as usize];
    Ok(part.iter().sum::<f64>() / part.len() as f64)
}

/// `mean[T/2, T) / mean[T/4, T/2)`; a series that stays at zero counts as
/// flat (ratio 1).
pub fn growth_ratio(values: &[f64]) -> Result<f64, SimError> {
    let t = values.len() as u64;
    let late = window_mean(values, Window::new(t / 2, t))?;
    let early = window_mean(values, Window::new(t / 4, t / 2))?;
    Ok(match (early == 0.0, late == 0.0) {
        (true, true) => 1.0,
        (true, false) => f64::INFINITY,
        _ => late / early,
    })
}
