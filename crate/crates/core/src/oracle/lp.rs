use microlp::{ComparisonOp, OptimizationDirection, Problem};

use super::OracleError;
use crate::model::UtilitySpec;

/// Sparse `sum coef * x_var  op  rhs`.
type Row = (Vec<(usize, f64)>, ComparisonOp, f64);

/// Plain description of a maximization LP, rebuilt for every solve so cuts
/// can be appended between iterations.
#[derive(Debug, Clone, Default)]
pub(crate) struct LpModel {
    vars: Vec<(f64, f64, f64)>,
    rows: Vec<Row>,
}

impl LpModel {
    pub(crate) fn var(&mut self, objective: f64, lo: f64, hi: f64) -> usize {
        self.vars.push((objective, lo, hi));
        self.vars.len() - 1
    }

    pub(crate) fn row(&mut self, terms: Vec<(usize, f64)>, op: ComparisonOp, rhs: f64) {
        self.rows.push((terms, op, rhs));
    }

    pub(crate) fn set_objective(&mut self, var: usize, coeff: f64) {
        self.vars[var].0 = coeff;
    }

    pub(crate) fn clear_objective(&mut self) {
        self.vars.iter_mut().for_each(|v| v.0 = 0.0);
    }

    pub(crate) fn maximize(&self) -> Result<(f64, Vec<f64>), OracleError> {
        let mut p = Problem::new(OptimizationDirection::Maximize);
        let handles: Vec<_> = self.vars.iter().map(|&(c, lo, hi)| p.add_var(c, (lo, hi))).collect();
        for (terms, op, rhs) in &self.rows {
            let expr: Vec<_> = terms.iter().map(|&(v, c)| (handles[v], c)).collect();
            p.add_constraint(expr, *op, *rhs);
        }
        let sol = p
            .solve()
            .map_err(|e| OracleError::Solver(e.to_string()))?
            .into_solution()
            .map_err(|_| OracleError::Solver("solve interrupted".into()))?;
        Ok((sol.objective(), handles.iter().map(|&h| sol.var_value(h)).collect()))
    }
}

/// Maximizer of a separable concave utility over an LP feasible set.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcaveOptimum {
    /// Rates at the best point found.
    pub rates: Vec<f64>,
    /// `sum g_s(rates_s)`.
    pub utility: f64,
    /// Cutting-plane upper bound at termination.
    pub upper_bound: f64,
    pub iterations: usize,
    /// Every LP variable at the best point.
    pub(crate) values: Vec<f64>,
}

const MAX_CUT_ROUNDS: usize = 500;

/// Kelley's cutting-plane method: each utility is replaced by a variable
/// `t_s` bounded by tangent lines of `g_s`; the LP optimum is an upper bound
/// and the true utility at its rates a lower bound. Stops when they agree to
/// relative tolerance `tol`.
pub(crate) fn maximize_concave(
    base: &LpModel,
    rates: &[usize],
    utilities: &[UtilitySpec<f64>],
    tol: f64,
) -> Result<ConcaveOptimum, OracleError> {
    let mut model = base.clone();
    model.clear_objective();
    let t: Vec<usize> = rates.iter().map(|_| model.var(1.0, f64::NEG_INFINITY, f64::INFINITY)).collect();
    let cut = |model: &mut LpModel, s: usize, at: f64| {
        let u = &utilities[s];
        let at = at.max(1e-9);
        let (g, d) = (u.value(at).unwrap_or(f64::NEG_INFINITY), u.derivative(at).unwrap_or(0.0));
        model.row(vec![(t[s], 1.0), (rates[s], -d)], ComparisonOp::Le, g - d * at);
    };
    for s in 0..rates.len() {
        for at in [1e-2, 1.0] {
            cut(&mut model, s, at);
        }
    }
    let mut best: Option<ConcaveOptimum> = None;
    let mut gap = f64::INFINITY;
    for iteration in 1..=MAX_CUT_ROUNDS {
        let (upper, values) = model.maximize()?;
        let x: Vec<f64> = rates.iter().map(|&r| values[r].max(0.0)).collect();
        let lower: f64 = x.iter().zip(utilities).map(|(&v, u)| u.value(v).unwrap_or(f64::NEG_INFINITY)).sum();
        if best.as_ref().is_none_or(|b| lower > b.utility) {
            best = Some(ConcaveOptimum {
                rates: x.clone(),
                utility: lower,
                upper_bound: upper,
                iterations: iteration,
                values,
            });
        }
        let b = best.as_mut().expect("set above");
        b.upper_bound = upper.min(b.upper_bound);
        b.iterations = iteration;
        gap = b.upper_bound - b.utility;
        if gap <= tol * b.utility.abs().max(1.0) {
            return Ok(best.expect("set above"));
        }
        for (s, &v) in x.iter().enumerate() {
            cut(&mut model, s, v);
        }
    }
    let b = best.expect("at least one round");
    Err(OracleError::NotConverged { best: b.utility, gap, iterations: MAX_CUT_ROUNDS })
}
