//! Box-constrained limited-memory quasi-Newton minimization.
//!
//! Variables at a bound whose gradient pushes outward are frozen; the
//! two-loop recursion runs on the free variables, the step is projected back
//! into the box and accepted by Armijo backtracking along the projection arc.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LbfgsStop {
    GradientTolerance,
    RelativeChange,
    IterationCap,
    LineSearchFailure,
    /// Stopped by the caller, e.g. on a deadline.
    Interrupted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LbfgsSettings {
    pub memory: usize,
    pub gradient_tolerance: f64,
    pub relative_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for LbfgsSettings {
    fn default() -> Self {
        Self {
            memory: 10,
            gradient_tolerance: 1e-8,
            relative_tolerance: 1e-10,
            max_iterations: 500,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub stop: LbfgsStop,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn projected_gradient(x: &[f64], g: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    x.iter()
        .zip(g)
        .map(|(&xi, &gi)| if (xi <= lo && gi > 0.0) || (xi >= hi && gi < 0.0) { 0.0 } else { gi })
        .collect()
}

/// Minimizes `f` over `[lo, hi]^n`. `eval` returns value and gradient;
/// `on_iterate` sees every accepted iterate and may return false to stop.
pub fn minimize_box<E, C>(
    x0: Vec<f64>,
    lo: f64,
    hi: f64,
    settings: &LbfgsSettings,
    mut eval: E,
    mut on_iterate: C,
) -> crate::Result<LbfgsResult>
where
    E: FnMut(&[f64]) -> crate::Result<(f64, Vec<f64>)>,
    C: FnMut(usize, &[f64], f64) -> crate::Result<bool>,
{
    let mut x: Vec<f64> = x0.into_iter().map(|v| v.clamp(lo, hi)).collect();
    let (mut f, mut g) = eval(&x)?;
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iterations = 0;
    let stop = loop {
        let pg = projected_gradient(&x, &g, lo, hi);
        if dot(&pg, &pg).sqrt() < settings.gradient_tolerance {
            break LbfgsStop::GradientTolerance;
        }
        if iterations >= settings.max_iterations {
            break LbfgsStop::IterationCap;
        }
        let free: Vec<bool> = pg.iter().zip(&g).map(|(p, gi)| *p != 0.0 || *gi == 0.0).collect();
        let mask = |v: &[f64]| -> Vec<f64> { v.iter().zip(&free).map(|(a, &m)| if m { *a } else { 0.0 }).collect() };
        // Two-loop recursion on the free subspace.
        let mut q = mask(&g);
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(&mask(s), &q);
            for (qi, yi) in q.iter_mut().zip(mask(y)) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let (s, y) = (mask(s), mask(y));
            let yy = dot(&y, &y);
            let sy = dot(&s, &y);
            if yy > 0.0 && sy > 0.0 {
                let gamma = sy / yy;
                q.iter_mut().for_each(|v| *v *= gamma);
            }
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(&mask(y), &q);
            for (qi, si) in q.iter_mut().zip(mask(s)) {
                *qi += (a - b) * si;
            }
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        if !(dot(&dir, &g) < 0.0) {
            history.clear();
            dir = pg.iter().map(|v| -v).collect();
        }
        let mut step = if history.is_empty() {
            let inf = dir.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            (1.0 / inf).min(1.0)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..40 {
            let xn: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| (xi + step * di).clamp(lo, hi)).collect();
            let decrease: f64 = g.iter().zip(xn.iter().zip(&x)).map(|(gi, (a, b))| gi * (a - b)).sum();
            if decrease < 0.0 {
                let (fnew, gnew) = eval(&xn)?;
                if fnew <= f + 1e-4 * decrease {
                    accepted = Some((xn, fnew, gnew));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gnew)) = accepted else {
            break LbfgsStop::LineSearchFailure;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-16 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            history.push_back((s, y, 1.0 / sy));
            if history.len() > settings.memory {
                history.pop_front();
            }
        }
        let rel = (fnew - f).abs() / f.abs().max(f64::MIN_POSITIVE);
        x = xn;
        f = fnew;
        g = gnew;
        iterations += 1;
        if !on_iterate(iterations, &x, f)? {
            break LbfgsStop::Interrupted;
        }
        if rel < settings.relative_tolerance {
            break LbfgsStop::RelativeChange;
        }
    };
    Ok(LbfgsResult { x, f, iterations, stop })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_with_active_bound() {
        // Minimum of (x0 - 2)^2 + (x1 - 0.3)^2 on [0, 1]^2 is (1, 0.3).
        let r = minimize_box(
            vec![0.5, 0.9],
            0.0,
            1.0,
            &LbfgsSettings::default(),
            |x| Ok(((x[0] - 2.0).powi(2) + (x[1] - 0.3).powi(2), vec![2.0 * (x[0] - 2.0), 2.0 * (x[1] - 0.3)])),
            |_, _, _| Ok(true),
        )
        .unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-12);
        assert!((r.x[1] - 0.3).abs() < 1e-8);
    }

    #[test]
    fn rosenbrock_in_a_box() {
        let r = minimize_box(
            vec![0.1, 0.8],
            -2.0,
            2.0,
            &LbfgsSettings {
                relative_tolerance: 0.0,
                ..LbfgsSettings::default()
            },
            |x| {
                let (a, b) = (x[0], x[1]);
                let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
                Ok((f, vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)]))
            },
            |_, _, _| Ok(true),
        )
        .unwrap();
        assert!(r.f < 1e-14, "{r:?}");
    }
}
