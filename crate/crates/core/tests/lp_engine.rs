use approx::assert_abs_diff_eq;
use maxfs::lp::{objective_delta_probe, Deactivation, LpProblem, SimplexSolver, Status};
use maxfs::Sense;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn solver() -> SimplexSolver {
    SimplexSolver::default()
}

/// Exhaustive vertex enumeration for LPs whose variables all have finite
/// bounds: every choice of `n` tight hyperplanes is solved by Gaussian
/// elimination and the best feasible point kept.
fn brute_force_min(p: &LpProblem) -> Option<f64> {
    let n = p.num_cols();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..p.num_rows() {
        let a: Vec<f64> = (0..n).map(|j| p.coeff(i, j)).collect();
        for b in [p.row_lower[i], p.row_upper[i]] {
            if b.is_finite() {
                planes.push((a.clone(), b));
            }
        }
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        for b in [p.col_lower[j], p.col_upper[j]] {
            assert!(b.is_finite());
            planes.push((e.clone(), b));
        }
    }
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let mut a: Vec<Vec<f64>> = idx.iter().map(|&k| {
            let mut r = planes[k].0.clone();
            r.push(planes[k].1);
            r
        }).collect();
        if let Some(x) = gauss(&mut a, n) {
            if p.max_violation(&x) <= 1e-7 {
                let z: f64 = x.iter().zip(&p.cost).map(|(a, b)| a * b).sum();
                best = Some(best.map_or(z, |b: f64| b.min(z)));
            }
        }
        // next combination
        let mut k = n;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            if idx[k] < planes.len() - n + k {
                idx[k] += 1;
                for l in k + 1..n {
                    idx[l] = idx[l - 1] + 1;
                }
                break;
            }
        }
    }
}

fn gauss(a: &mut [Vec<f64>], n: usize) -> Option<Vec<f64>> {
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c].abs() < 1e-10 {
            return None;
        }
        a.swap(c, piv);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..=n {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

fn random_lp(rng: &mut ChaCha8Rng, m: usize, n: usize) -> LpProblem {
    let mut p = LpProblem::new(m, n);
    for j in 0..n {
        p.cost[j] = rng.random_range(-5.0..5.0);
        let lo: f64 = rng.random_range(-3.0..0.0);
        p.set_col_bounds(j, lo, lo + rng.random_range(0.5..4.0));
        for i in 0..m {
            p.set_coeff(i, j, rng.random_range(-2.0..2.0));
        }
    }
    for i in 0..m {
        let sense = match rng.random_range(0..3) {
            0 => Sense::Le,
            1 => Sense::Ge,
            _ => Sense::Eq,
        };
        p.set_row_sense(i, sense, rng.random_range(-2.0..2.0));
    }
    p
}

#[test]
fn single_violated_row_has_nonzero_dual() {
    // min e  s.t.  x + e >= 1,  x <= 0,  e >= 0
    let mut p = LpProblem::new(1, 2);
    p.set_coeff(0, 0, 1.0);
    p.set_coeff(0, 1, 1.0);
    p.set_row_sense(0, Sense::Ge, 1.0);
    p.set_col_bounds(0, f64::NEG_INFINITY, 0.0);
    p.cost[1] = 1.0;
    let sol = solver().solve(&p, None).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert_abs_diff_eq!(sol.objective, 1.0, epsilon = 1e-9);
    assert_abs_diff_eq!(sol.duals[0], 1.0, epsilon = 1e-9);
}

#[test]
fn zero_objective_equality() {
    let mut p = LpProblem::new(1, 1);
    p.set_coeff(0, 0, 1.0);
    p.set_row_sense(0, Sense::Eq, 3.0);
    p.set_col_bounds(0, f64::NEG_INFINITY, f64::INFINITY);
    let sol = solver().solve(&p, None).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert_abs_diff_eq!(sol.objective, 0.0);
    assert_abs_diff_eq!(sol.x[0], 3.0, epsilon = 1e-12);
}

#[test]
fn split_variable_l1_on_one_by_two() {
    // A = [1 1], b = 2, x = u - v: min sum(u + v)
    let mut p = LpProblem::new(1, 4);
    for (j, a) in [1.0, 1.0, -1.0, -1.0].into_iter().enumerate() {
        p.set_coeff(0, j, a);
        p.cost[j] = 1.0;
    }
    p.set_row_sense(0, Sense::Eq, 2.0);
    let sol = solver().solve(&p, None).unwrap();

    // Vertices of {u,v >= 0, u1+u2-v1-v2 = 2} have one nonzero: u_j = 2.
    let vertex_values = [2.0, 2.0];
    let best = vertex_values.iter().cloned().fold(f64::INFINITY, f64::min);
    assert_abs_diff_eq!(sol.objective, best, epsilon = 1e-9);
    let x = [sol.x[0] - sol.x[2], sol.x[1] - sol.x[3]];
    assert_eq!(x.iter().filter(|v| v.abs() > 1e-9).count(), 1);
}

#[test]
fn detects_infeasible_and_unbounded() {
    let mut p = LpProblem::new(2, 1);
    p.set_coeff(0, 0, 1.0);
    p.set_coeff(1, 0, 1.0);
    p.set_row_sense(0, Sense::Ge, 1.0);
    p.set_row_sense(1, Sense::Le, 0.0);
    assert_eq!(solver().solve(&p, None).unwrap().status, Status::Infeasible);

    let mut q = LpProblem::new(1, 2);
    q.set_coeff(0, 0, 1.0);
    q.set_coeff(0, 1, -1.0);
    q.set_row_sense(0, Sense::Ge, 0.0);
    q.cost[1] = -1.0;
    q.cost[0] = 0.5;
    assert_eq!(solver().solve(&q, None).unwrap().status, Status::Unbounded);
}

#[test]
fn matches_vertex_enumeration_and_duality() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for _ in 0..200 {
        let m = rng.random_range(1..5);
        let n = rng.random_range(1..5);
        let p = random_lp(&mut rng, m, n);
        let oracle = brute_force_min(&p);
        let sol = solver().solve(&p, None).unwrap();
        match oracle {
            None => assert_eq!(sol.status, Status::Infeasible),
            Some(z) => {
                assert_eq!(sol.status, Status::Optimal);
                assert_abs_diff_eq!(sol.objective, z, epsilon = 1e-7);
                assert!(p.max_violation(&sol.x) <= 1e-8);
                // dual objective: y'(row bound) + sum over columns of d_j x_j
                let dual: f64 = (0..m)
                    .map(|i| sol.duals[i] * sol.activity[i])
                    .sum::<f64>()
                    + (0..n).map(|j| sol.reduced_costs[j] * sol.x[j]).sum::<f64>();
                assert_abs_diff_eq!(dual, sol.objective, epsilon = 1e-7);
                for i in 0..m {
                    let y = sol.duals[i];
                    let a = sol.activity[i];
                    if a > p.row_lower[i] + 1e-7 {
                        assert!(y <= 1e-8, "row above its lower bound has y = {y}");
                    }
                    if a < p.row_upper[i] - 1e-7 {
                        assert!(y >= -1e-8, "row below its upper bound has y = {y}");
                    }
                }
                checked += 1;
            }
        }
    }
    assert!(checked > 50);
}

#[test]
fn warm_start_agrees_with_cold_start() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s = solver();
    for _ in 0..50 {
        let mut p = random_lp(&mut rng, 6, 5);
        let Ok(first) = s.solve(&p, None) else { continue };
        if first.status != Status::Optimal {
            continue;
        }
        let i = rng.random_range(0..6);
        p.row_lower[i] = f64::NEG_INFINITY;
        p.row_upper[i] = f64::INFINITY;
        p.cost[0] += 1.0;
        let warm = s.solve(&p, Some(&first.basis)).unwrap();
        let cold = s.solve(&p, None).unwrap();
        assert_eq!(warm.status, cold.status);
        if cold.status == Status::Optimal {
            assert_abs_diff_eq!(warm.objective, cold.objective, epsilon = 1e-8);
        }
    }
}

#[test]
fn probe_leaves_problem_untouched() {
    // x + e1 >= 1, x - e2 <= 0, x free: one IIS, Z = 1.
    let mut p = LpProblem::new(2, 3);
    p.set_col_bounds(0, f64::NEG_INFINITY, f64::INFINITY);
    p.set_coeff(0, 0, 1.0);
    p.set_coeff(0, 1, 1.0);
    p.set_coeff(1, 0, 1.0);
    p.set_coeff(1, 2, -1.0);
    p.set_row_sense(0, Sense::Ge, 1.0);
    p.set_row_sense(1, Sense::Le, 0.0);
    p.cost[1] = 1.0;
    p.cost[2] = 1.0;
    let s = solver();
    let base = s.solve(&p, None).unwrap();
    assert_abs_diff_eq!(base.objective, 1.0, epsilon = 1e-9);
    let before = p.clone();
    let z = objective_delta_probe(&s, &mut p, Some(&base.basis), Deactivation::Row(0)).unwrap();
    assert_abs_diff_eq!(z, 0.0, epsilon = 1e-9);
    let z = objective_delta_probe(&s, &mut p, Some(&base.basis), Deactivation::Column(1)).unwrap();
    assert_abs_diff_eq!(z, 0.0, epsilon = 1e-9);
    assert_eq!(p, before);
}
