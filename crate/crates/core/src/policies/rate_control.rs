use crate::model::{UtilityKind, UtilitySpec};
use crate::scalar::Scalar;

/// Admission rate `argmax_{0 <= x <= r_max} m * g(x) - backlog * x`.
///
/// Log utilities use the closed form `clamp(m * w / U - 1, 0, r_max)`;
/// other concave utilities fall back to golden-section search.
pub fn dars_rate_control<T: Scalar>(backlog: T, m: T, r_max: T, utility: &UtilitySpec<T>) -> T {
    if backlog <= T::zero() {
        return r_max;
    }
    match utility.kind {
        UtilityKind::Log1p => utility.price_response(m, backlog).min(r_max),
        UtilityKind::AlphaFair => {
            let objective = |x: T| m * utility.value(x).unwrap_or(T::neg_infinity()) - backlog * x;
            golden_section_max(objective, T::zero(), r_max, T::of(1e-9))
        }
    }
}

/// Maximizer of a concave `f` on `[lo, hi]`, to absolute tolerance `tol`
/// (floored at a few ulps of the scalar type).
pub fn golden_section_max<T: Scalar>(f: impl Fn(T) -> T, lo: T, hi: T, tol: T) -> T {
    let tol = tol.max(T::solver_floor() * hi.abs().max(T::one()));
    let inv_phi = T::of(0.618_033_988_749_894_8);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..400 {
        if b - a <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mid = (a + b) / T::of(2.0);
    // The optimum of a concave function may sit on either endpoint.
    [lo, mid, hi]
        .into_iter()
        .filter(|x| f(*x).is_finite())
        .fold((mid, f(mid)), |best, x| if f(x) > best.1 { (x, f(x)) } else { best })
        .0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Maximizes on the grid `0, step, 2*step, ..., r_max`.
    fn grid_argmax(u: &UtilitySpec<f64>, backlog: f64, m: f64, r_max: f64, step: f64) -> f64 {
        let n = (r_max / step).round() as usize;
        (0..=n)
            .map(|i| i as f64 * step)
            .map(|x| (x, m * u.value(x).unwrap() - backlog * x))
            .fold((0.0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b })
            .0
    }

    #[test]
    fn worked_examples_hold_exactly() {
        let u = UtilitySpec::<f64>::log1p(1.0);
        assert_eq!(dars_rate_control(0.0, 200.0, 1.0, &u), 1.0);
        assert_eq!(dars_rate_control(100.0, 200.0, 1.0, &u), 1.0);
        assert_eq!(dars_rate_control(400.0, 200.0, 1.0, &u), 0.0);
        assert!((dars_rate_control(150.0, 200.0, 1.0, &u) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn worked_examples_agree_with_grid() {
        // Frozen from grid maximization at step 1e-5.
        let u = UtilitySpec::log1p(1.0);
        for (backlog, expected) in [(100.0, 1.0), (400.0, 0.0), (150.0, 1.0 / 3.0)] {
            let g = grid_argmax(&u, backlog, 200.0, 1.0, 1e-5);
            assert!((g - expected).abs() <= 1e-5, "U={backlog}: grid {g}");
        }
    }

    #[test]
    fn golden_section_handles_alpha_fair() {
        let u = UtilitySpec::<f64>::alpha_fair(1.0, 2.0);
        // m * x^-2 = U  =>  x = sqrt(m / U)
        let x = dars_rate_control(400.0, 100.0, 1.0, &u);
        assert!((x - 0.5).abs() < 1e-8, "{x}");
        assert_eq!(dars_rate_control(1.0, 100.0, 1.0, &u), 1.0);
        let half = UtilitySpec::<f64>::alpha_fair(1.0, 0.5);
        let y = dars_rate_control(20.0, 10.0, 2.0, &half);
        assert!((y - 0.25).abs() < 1e-8, "{y}");
    }

    #[test]
    fn single_precision() {
        let u = UtilitySpec::<f32>::log1p(1.0);
        assert!((dars_rate_control(150.0f32, 200.0, 1.0, &u) - 1.0 / 3.0).abs() < 1e-6);
        // Value comparisons resolve a maximizer only to about sqrt(eps).
        let a = UtilitySpec::<f32>::alpha_fair(1.0, 2.0);
        assert!((dars_rate_control(400.0f32, 100.0, 1.0, &a) - 0.5).abs() < 1e-3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn closed_form_matches_golden_section(backlog in 0.01f64..1000.0, m in 1.0f64..500.0, w in 0.1f64..5.0) {
            let u = UtilitySpec::log1p(w);
            let closed = dars_rate_control(backlog, m, 1.0, &u);
            let searched = golden_section_max(|x| m * u.value(x).unwrap() - backlog * x, 0.0, 1.0, 1e-9);
            prop_assert!((closed - searched).abs() < 1e-6, "{} vs {}", closed, searched);
        }

        #[test]
        fn nonincreasing_in_backlog(a in 0.0f64..1000.0, b in 0.0f64..1000.0, m in 1.0f64..500.0) {
            let u = UtilitySpec::log1p(1.0);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(dars_rate_control(hi, m, 1.0, &u) <= dars_rate_control(lo, m, 1.0, &u));
        }
    }
}
