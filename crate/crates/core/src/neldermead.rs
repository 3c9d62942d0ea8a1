//! Deterministic Nelder–Mead simplex minimization.
//!
//! Standard coefficients (reflection 1, expansion 2, contraction 0.5,
//! shrink 0.5). The initial simplex is built from per-coordinate steps, so
//! a run is fully determined by the start point and the step rule.

pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evals: usize,
}

/// Minimizes `f` starting from `x0`, spending at most `max_evals` calls.
///
/// `steps[i]` sets the i-th initial simplex offset; zero steps are bumped
/// to a small absolute value so the simplex is never degenerate.
pub fn minimize<F>(mut f: F, x0: &[f64], steps: &[f64], max_evals: usize) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    assert_eq!(steps.len(), dim);
    assert!(dim >= 1, "need at least one dimension");

    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut p = x0.to_vec();
        let s = if steps[i].abs() > 0.0 { steps[i] } else { 1e-3 };
        p[i] += s;
        simplex.push(p);
    }
    let mut scores: Vec<f64> = simplex.iter().map(|p| eval(p, &mut evals)).collect();

    while evals < max_evals {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&i, &j| scores[i].total_cmp(&scores[j]));
        let best = order[0];
        let second_worst = order[dim - 1];
        let worst = order[dim];

        // Converged when the simplex is flat in both f and x.
        let f_spread = scores[worst] - scores[best];
        if f_spread.abs() <= 1e-12 * (1.0 + scores[best].abs()) {
            let x_spread = (0..dim)
                .map(|d| {
                    simplex
                        .iter()
                        .map(|p| (p[d] - simplex[best][d]).abs())
                        .fold(0.0f64, f64::max)
                })
                .fold(0.0f64, f64::max);
            if x_spread <= 1e-10 {
                break;
            }
        }

        let mut centroid = vec![0.0f64; dim];
        for &i in order.iter().take(dim) {
            for d in 0..dim {
                centroid[d] += simplex[i][d];
            }
        }
        for c in centroid.iter_mut() {
            *c /= dim as f64;
        }

        let reflect: Vec<f64> = (0..dim)
            .map(|d| centroid[d] + (centroid[d] - simplex[worst][d]))
            .collect();
        let f_reflect = eval(&reflect, &mut evals);

        if f_reflect < scores[best] {
            let expand: Vec<f64> = (0..dim)
                .map(|d| centroid[d] + 2.0 * (centroid[d] - simplex[worst][d]))
                .collect();
            let f_expand = eval(&expand, &mut evals);
            if f_expand < f_reflect {
                simplex[worst] = expand;
                scores[worst] = f_expand;
            } else {
                simplex[worst] = reflect;
                scores[worst] = f_reflect;
            }
            continue;
        }
        if f_reflect < scores[second_worst] {
            simplex[worst] = reflect;
            scores[worst] = f_reflect;
            continue;
        }

        let contract: Vec<f64> = if f_reflect < scores[worst] {
            (0..dim)
                .map(|d| centroid[d] + 0.5 * (reflect[d] - centroid[d]))
                .collect()
        } else {
            (0..dim)
                .map(|d| centroid[d] + 0.5 * (simplex[worst][d] - centroid[d]))
                .collect()
        };
        let f_contract = eval(&contract, &mut evals);
        if f_contract < scores[worst].min(f_reflect) {
            simplex[worst] = contract;
            scores[worst] = f_contract;
            continue;
        }

        // Shrink toward the best vertex.
        for &i in order.iter().skip(1) {
            for d in 0..dim {
                simplex[i][d] = simplex[best][d] + 0.5 * (simplex[i][d] - simplex[best][d]);
            }
            scores[i] = eval(&simplex[i].clone(), &mut evals);
            if evals >= max_evals {
                break;
            }
        }
    }

    let best = (0..=dim)
        .min_by(|&i, &j| scores[i].total_cmp(&scores[j]))
        .unwrap();
    NelderMeadResult {
        x: simplex[best].clone(),
        fx: scores[best],
        evals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_quadratic_bowl() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + 2.0 * (x[1] + 1.5).powi(2);
        let r = minimize(f, &[0.0, 0.0], &[0.5, 0.5], 500);
        assert!((r.x[0] - 3.0).abs() < 1e-5, "x0 = {}", r.x[0]);
        assert!((r.x[1] + 1.5).abs() < 1e-5, "x1 = {}", r.x[1]);
        assert!(r.evals <= 500);
    }

    #[test]
    fn minimizes_rosenbrock_2d() {
        let f = |x: &[f64]| {
            100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)
        };
        let r = minimize(f, &[-1.2, 1.0], &[0.1, 0.1], 2000);
        assert!((r.x[0] - 1.0).abs() < 1e-3, "x = {:?}", r.x);
        assert!((r.x[1] - 1.0).abs() < 1e-3, "x = {:?}", r.x);
    }

    #[test]
    fn respects_eval_budget() {
        let mut count = 0usize;
        let r = minimize(
            |x: &[f64]| {
                count += 1;
                x[0] * x[0]
            },
            &[10.0],
            &[1.0],
            30,
        );
        assert!(count <= 31, "budget overrun: {count}");
        assert_eq!(r.evals, count);
    }

    #[test]
    fn deterministic_given_same_start() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + (x[1] - 2.0).powi(2) + x[0].sin() * 0.01;
        let a = minimize(f, &[5.0, 5.0], &[0.3, 0.3], 400);
        let b = minimize(f, &[5.0, 5.0], &[0.3, 0.3], 400);
        assert_eq!(a.x, b.x);
        assert_eq!(a.fx, b.fx);
        assert_eq!(a.evals, b.evals);
    }
}
