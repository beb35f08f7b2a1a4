//! Expected adoption level and the discounted profit functional.

use alloc::vec::Vec;

use crate::economics::{Economics, Horizon};
use crate::error::{Error, Result};
use crate::policy::PromotionPolicy;
use crate::trajectory::Trajectory;
use crate::PROB_TOL;

const SURVIVAL_TOL: f64 = 1e-12;

/// `f(t) = 1 − (1/M) Σ_j [S_j](t)` from the singleton survival probabilities.
pub fn adoption_from_survival(singletons: &Trajectory, nodes: usize) -> Result<Trajectory> {
    if singletons.dim() != nodes {
        return Err(Error::LengthMismatch {
            what: "singleton survival components",
            expected: nodes,
            found: singletons.dim(),
        });
    }
    if let Some(&v) = singletons
        .values()
        .iter()
        .find(|v| **v < -SURVIVAL_TOL || **v > 1.0 + SURVIVAL_TOL)
    {
        return Err(Error::OutOfRange {
            what: "survival probability",
            value: v,
        });
    }
    let inv = 1.0 / nodes as f64;
    let f = (0..singletons.len())
        .map(|k| {
            let mean: f64 = singletons.row(k).iter().sum::<f64>() * inv;
            (1.0 - mean).clamp(0.0, 1.0)
        })
        .collect();
    Trajectory::scalar(*singletons.grid(), f, "f")
}

/// Grid derivative: centered differences inside, second-order one-sided at
/// the two ends.
pub fn grid_derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut d = alloc::vec![0.0; n];
    match n {
        0 | 1 => {}
        2 => {
            let s = (values[1] - values[0]) / h;
            d[0] = s;
            d[1] = s;
        }
        _ => {
            d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
            for k in 1..n - 1 {
                d[k] = (values[k + 1] - values[k - 1]) / (2.0 * h);
            }
            d[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
        }
    }
    d
}

/// `Π = ∫ e^{−θt}(γ f'(t) − spend(t)) dt` by the composite trapezoid rule.
///
/// For an infinite horizon the grid ends at an effective horizon `T_eff`; the
/// adoptions still outstanding there, `1 − f(T_eff)`, are credited at the
/// discount factor of `T_eff`.
pub fn profit(policy: &PromotionPolicy, f: &Trajectory, econ: &Economics) -> Result<f64> {
    let grid = policy.grid();
    if !grid.same_as(f.grid()) {
        return Err(Error::GridMismatch);
    }
    if f.dim() != 1 {
        return Err(Error::LengthMismatch {
            what: "adoption trajectory dimension",
            expected: 1,
            found: f.dim(),
        });
    }
    let fv = f.values();
    if let Some(w) = fv.windows(2).find(|w| w[1] < w[0] - PROB_TOL) {
        return Err(Error::OutOfRange {
            what: "adoption decrease",
            value: w[1] - w[0],
        });
    }
    let h = grid.step();
    let df = grid_derivative(fv, h);
    let integrand: Vec<f64> = (0..grid.len())
        .map(|k| econ.discount(grid.time(k)) * (econ.gamma * df[k] - policy.spend_rate(k)))
        .collect();
    let mut total = trapezoid(&integrand, h);
    if matches!(econ.horizon, Horizon::Infinite) {
        let last = fv[fv.len() - 1];
        total += econ.gamma * econ.discount(grid.t_end()) * (1.0 - last).max(0.0);
    }
    Ok(total)
}

pub(crate) fn trapezoid(y: &[f64], h: f64) -> f64 {
    match y.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * (y[0] + y[n - 1]) + y[1..n - 1].iter().sum::<f64>()),
    }
}

/// Relative profit increase `(Π^opt − Π⁰)/Π⁰`.
pub fn delta_pi(pi_opt: f64, pi_zero: f64) -> Result<f64> {
    if pi_zero == 0.0 {
        return Err(Error::UndefinedBaseline);
    }
    Ok((pi_opt - pi_zero) / pi_zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economics::Horizon;
    use crate::grid::TimeGrid;
    use crate::math;
    use alloc::vec;

    fn econ(gamma: f64, theta: f64, t: f64) -> Economics {
        Economics::new(gamma, theta, Horizon::Finite(t)).unwrap()
    }

    #[test]
    fn survival_extremes() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        let ones = Trajectory::new(g, 3, vec![1.0; 15], "S").unwrap();
        assert!(adoption_from_survival(&ones, 3).unwrap().values().iter().all(|v| *v == 0.0));
        let zeros = Trajectory::new(g, 3, vec![0.0; 15], "S").unwrap();
        assert!(adoption_from_survival(&zeros, 3).unwrap().values().iter().all(|v| *v == 1.0));
    }

    #[test]
    fn survival_errors() {
        let g = TimeGrid::new(1.0, 1).unwrap();
        let s = Trajectory::new(g, 2, vec![1.0, 1.0, 0.5, 1.5], "S").unwrap();
        assert!(matches!(adoption_from_survival(&s, 2), Err(Error::OutOfRange { .. })));
        assert!(matches!(adoption_from_survival(&s, 3), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn zero_income_zero_spend_is_zero_profit() {
        let g = TimeGrid::new(10.0, 100).unwrap();
        let f = Trajectory::scalar(g, g.times().map(|t| 1.0 - math::exp(-0.1 * t)).collect(), "f").unwrap();
        let e = Economics {
            gamma: 0.0,
            theta: 0.1,
            horizon: Horizon::Finite(10.0),
        };
        assert_eq!(profit(&PromotionPolicy::zero(g), &f, &e).unwrap(), 0.0);
    }

    #[test]
    fn constant_spend_closed_form() {
        let (c, theta, t_end) = (2.5, 0.3, 7.0);
        let g = TimeGrid::new(t_end, 2000).unwrap();
        let f = Trajectory::scalar(g, vec![0.0; g.len()], "f").unwrap();
        let pol = PromotionPolicy::constant(g, c, 0.0).unwrap();
        let pi = profit(&pol, &f, &econ(1000.0, theta, t_end)).unwrap();
        let exact = -c * (1.0 - math::exp(-theta * t_end)) / theta;
        assert!((pi - exact).abs() < 1e-6 * exact.abs(), "{pi} vs {exact}");
    }

    #[test]
    fn grid_refinement_is_second_order() {
        // f = 1 - e^{-t}, s_p = 1 + sin-free smooth spend t/(1+t)
        let e = econ(10.0, 0.2, 5.0);
        let run = |n: usize| {
            let g = TimeGrid::new(5.0, n).unwrap();
            let f = Trajectory::scalar(g, g.times().map(|t| 1.0 - math::exp(-t)).collect(), "f").unwrap();
            let sp = g.times().map(|t| t / (1.0 + t)).collect();
            let pol = PromotionPolicy::uniform(g, sp, vec![0.0; g.len()]).unwrap();
            profit(&pol, &f, &e).unwrap()
        };
        let (a, b, c) = (run(50), run(100), run(200));
        let ratio = (a - b) / (b - c);
        assert!((ratio - 4.0).abs() < 0.3, "Richardson ratio {ratio}");
    }

    #[test]
    fn rejects_grid_mismatch_and_decreasing_f() {
        let g = TimeGrid::new(1.0, 2).unwrap();
        let g2 = TimeGrid::new(1.0, 3).unwrap();
        let f = Trajectory::scalar(g2, vec![0.0; 4], "f").unwrap();
        assert_eq!(profit(&PromotionPolicy::zero(g), &f, &econ(1.0, 0.0, 1.0)), Err(Error::GridMismatch));
        let f = Trajectory::scalar(g, vec![0.0, 0.5, 0.4], "f").unwrap();
        assert!(profit(&PromotionPolicy::zero(g), &f, &econ(1.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn delta_pi_arithmetic() {
        assert!((delta_pi(112.0, 100.0).unwrap() - 0.12).abs() < 1e-15);
        assert_eq!(delta_pi(5.0, 5.0).unwrap(), 0.0);
        assert_eq!(delta_pi(1.0, 0.0), Err(Error::UndefinedBaseline));
    }

    proptest::proptest! {
        #[test]
        fn spend_shift_lowers_profit(shift in 1e-3f64..10.0) {
            let g = TimeGrid::new(10.0, 200).unwrap();
            let e = econ(100.0, 0.05, 10.0);
            let f = Trajectory::scalar(g, g.times().map(|t| 1.0 - math::exp(-0.2 * t)).collect(), "f").unwrap();
            let base = PromotionPolicy::constant(g, 0.5, 0.25).unwrap();
            let shifted = PromotionPolicy::constant(g, 0.5 + shift, 0.25).unwrap();
            proptest::prop_assert!(profit(&shifted, &f, &e).unwrap() < profit(&base, &f, &e).unwrap());
        }
    }
}
