use maxfs::harness::{gen_instance, is_exact, SweepSpec};
use maxfs::sparse::{
    basis_pursuit, method_b, method_c, method_jp, method_m, method_me1e2, postprocess_result,
    ZeroingLp,
};
use maxfs::{RecoveryProblem, SimplexSolver};

fn instance(m: usize, n: usize, s: usize, idx: usize) -> (RecoveryProblem, Vec<f64>) {
    gen_instance(&SweepSpec::new(m, n, vec![s], 1, 2024), s, idx).unwrap()
}

fn planted(x: &[f64]) -> Vec<usize> {
    (0..x.len()).filter(|&j| x[j] != 0.0).collect()
}

#[test]
fn very_sparse_signal_is_recovered_by_every_method() {
    for idx in 0..5 {
        let (p, x) = instance(16, 32, 3, idx);
        let results = [
            ("bp", basis_pursuit(&p).unwrap()),
            ("b", method_b(&p, Some(2)).unwrap()),
            ("c", method_c(&p, Some(2)).unwrap()),
            ("m", method_m(&p, Some(2)).unwrap()),
            ("me1e2", method_me1e2(&p, 13).unwrap()),
            ("jp", method_jp(&p, Some(2)).unwrap()),
        ];
        for (name, r) in &results {
            assert!(p.residual(&r.y) <= 1e-6, "{name}");
            assert_eq!(r.support, planted(&x), "{name} on instance {idx}");
            assert!(is_exact(r, &x), "{name}");
        }
        let m = &results[3].1;
        assert!(m.bp_shortcut_taken);
        assert_eq!(m.lp_count, 1);
        let me = &results[4].1;
        assert_eq!(me.lp_count, 1);
        assert!(me.bp_shortcut_taken);
    }
}

#[test]
fn method_b_lp_count_follows_probe_pattern() {
    // k = 2 probes per removal, and the last candidate exits without a solve
    let (p, x) = instance(16, 32, 5, 0);
    let r = method_b(&p, Some(2)).unwrap();
    assert!(is_exact(&r, &x));
    assert_eq!(r.lp_count, 2 * 5 - 1);
    assert_eq!(r.min_ulr.len(), 5);
}

#[test]
fn dense_signal_needs_several_iterations() {
    let mut multi = 0;
    for idx in 0..5 {
        let (p, _) = instance(16, 32, 12, idx);
        let bp = basis_pursuit(&p).unwrap();
        let me = method_me1e2(&p, 13).unwrap();
        assert!(p.residual(&me.y) <= 1e-6);
        if bp.t > 13 {
            assert!(me.lp_count > 1);
            assert!(!method_m(&p, Some(2)).unwrap().bp_shortcut_taken);
            multi += 1;
        }
    }
    assert!(multi > 0, "no instance made basis pursuit fail");
}

#[test]
fn shortcut_equivalence_and_lp_dominance() {
    for s in [2, 4, 6, 8, 10, 12] {
        for idx in 0..4 {
            let (p, _) = instance(16, 32, s, idx);
            let bp = basis_pursuit(&p).unwrap();
            let b = method_b(&p, Some(2)).unwrap();
            let c = method_c(&p, Some(2)).unwrap();
            let m = method_m(&p, Some(2)).unwrap();
            let me = method_me1e2(&p, 13).unwrap();
            for r in [&bp, &b, &c, &m, &me] {
                assert!(p.residual(&r.y) <= 1e-6);
                assert!(r.y.iter().enumerate().all(|(j, v)| r.support.contains(&j) || v.abs() <= 1e-7));
            }
            assert!(me.lp_count <= b.lp_count, "S={s} idx={idx}");
            assert!(me.lp_count <= c.lp_count, "S={s} idx={idx}");
            if bp.t + 3 < p.num_rows() {
                assert_eq!(m.support, bp.support);
                assert_eq!(me.support, bp.support);
                assert_eq!((m.lp_count, me.lp_count), (1, 1));
            }
        }
    }
}

#[test]
fn zeroing_lp_has_dual_candidates() {
    let (p, _) = instance(16, 32, 4, 0);
    let zl = ZeroingLp::new(&p);
    let sol = SimplexSolver::default().solve(zl.lp(), None).unwrap();
    let y = zl.signal(&sol);
    let priced = (0..32)
        .filter(|&j| y[j].abs() <= 1e-7 && sol.duals[16 + j].abs() > 1e-8)
        .count();
    assert!(priced > 0);
}

#[test]
fn postprocess_keeps_valid_solution() {
    for idx in 0..3 {
        let (p, x) = instance(16, 32, 12, idx);
        let r = method_b(&p, Some(2)).unwrap();
        let before = r.t;
        let pp = postprocess_result(&p, r).unwrap();
        assert!(pp.t <= before);
        assert!(p.residual(&pp.y) <= 1e-6);
        if is_exact(&pp, &x) {
            assert_eq!(pp.support, planted(&x));
        }
    }
}
