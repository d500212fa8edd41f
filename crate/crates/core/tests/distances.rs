use std::collections::VecDeque;

use proptest::prelude::*;

use stochavg::stats::{bl_distance_1d, bl_distance_nd, bl_exact_1d, EmpiricalLaw, ReportOptions};

/// Discretized oracle: test functions take values on a uniform grid of `levels` points in
/// `[-s, s]`, the Lipschitz constant runs over a uniform grid in `[0, 1]`. Every candidate
/// is feasible, so the result is a lower bound that tightens as both grids are refined.
fn grid_oracle(x: &[f64], y: &[f64], levels: usize, lips: usize) -> f64 {
    let mut pts: Vec<(f64, f64)> = x.iter().map(|&p| (p, 1.0 / x.len() as f64)).chain(y.iter().map(|&p| (p, -1.0 / y.len() as f64))).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best: f64 = 0.0;
    for li in 0..=lips {
        let lip = li as f64 / lips as f64;
        let s = 1.0 - lip;
        if s <= 0.0 {
            continue;
        }
        let h = 2.0 * s / (levels - 1) as f64;
        let level = |g: usize| -s + g as f64 * h;
        let mut val: Vec<f64> = (0..levels).map(|g| pts[0].1 * level(g)).collect();
        for i in 1..pts.len() {
            let reach = ((lip * (pts[i].0 - pts[i - 1].0)) / h + 1e-12).floor() as usize;
            val = window_max(&val, reach).iter().enumerate().map(|(g, m)| m + pts[i].1 * level(g)).collect();
        }
        best = best.max(val.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }
    best
}

/// `out[g] = max(v[g - r ..= g + r])`.
fn window_max(v: &[f64], r: usize) -> Vec<f64> {
    let n = v.len();
    let mut out = Vec::with_capacity(n);
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for g in 0..n {
        while next < n && next <= g + r {
            while dq.back().is_some_and(|&b| v[b] <= v[next]) {
                dq.pop_back();
            }
            dq.push_back(next);
            next += 1;
        }
        while dq.front().is_some_and(|&f| f + r < g) {
            dq.pop_front();
        }
        out.push(v[*dq.front().expect("window is nonempty")]);
    }
    out
}

fn sample(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![-3.0f64..3.0, (-6i32..6).prop_map(|k| k as f64 * 0.5)], 1..max_len)
}

fn rows(max_len: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 2), 2..max_len)
}

fn quick(seed: u64) -> ReportOptions {
    ReportOptions { bootstrap: 8, ..ReportOptions::default() }.with_seed(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_1d_matches_grid_oracle(x in sample(6), y in sample(6)) {
        let exact = bl_exact_1d(&x, &y);
        let oracle = grid_oracle(&x, &y, 801, 400);
        prop_assert!(oracle <= exact + 1e-9, "oracle {oracle} above exact {exact}");
        prop_assert!(exact <= oracle + 0.02, "exact {exact} far above oracle {oracle}");
    }

    #[test]
    fn exact_1d_is_a_bounded_symmetric_metric(x in sample(20), y in sample(20), z in sample(20)) {
        let (dxy, dyx) = (bl_exact_1d(&x, &y), bl_exact_1d(&y, &x));
        prop_assert_eq!(dxy, dyx);
        prop_assert!((0.0..=2.0).contains(&dxy));
        prop_assert_eq!(bl_exact_1d(&x, &x), 0.0);
        prop_assert!(bl_exact_1d(&x, &z) <= dxy + bl_exact_1d(&y, &z) + 1e-8);
    }

    #[test]
    fn exact_1d_is_translation_invariant_and_dominated_by_wasserstein(x in sample(12), y in sample(12), c in -2.0f64..2.0) {
        let d = bl_exact_1d(&x, &y);
        let shift = |v: &[f64]| v.iter().map(|p| p + c).collect::<Vec<_>>();
        prop_assert!((bl_exact_1d(&shift(&x), &shift(&y)) - d).abs() <= 1e-7);
        // Lip(f) <= 1 for every admissible f, so the distance is at most W1
        let mut grid: Vec<f64> = x.iter().chain(&y).copied().collect();
        grid.sort_by(f64::total_cmp);
        let cdf = |v: &[f64], t: f64| v.iter().filter(|&&p| p <= t).count() as f64 / v.len() as f64;
        let w1: f64 = grid.windows(2).map(|w| (cdf(&x, w[0]) - cdf(&y, w[0])).abs() * (w[1] - w[0])).sum();
        prop_assert!(d <= w1 + 1e-9);
    }

    #[test]
    fn lower_bound_is_symmetric_and_dominates_marginals(a in rows(24), b in rows(24), seed in any::<u64>()) {
        let (la, lb) = (EmpiricalLaw::from_rows(&a).unwrap(), EmpiricalLaw::from_rows(&b).unwrap());
        let opts = quick(seed);
        let ab = bl_distance_nd(&la, &lb, &opts).unwrap();
        let ba = bl_distance_nd(&lb, &la, &opts).unwrap();
        prop_assert_eq!(ab.estimate, ba.estimate);
        prop_assert!(ab.estimate <= 2.0);
        for k in 0..2 {
            let m = bl_exact_1d(&la.coordinate(k), &lb.coordinate(k));
            prop_assert!(ab.estimate >= m - 1e-12);
        }
        let mut shuffled = a.clone();
        shuffled.reverse();
        let s = bl_distance_nd(&EmpiricalLaw::from_rows(&shuffled).unwrap(), &lb, &opts).unwrap();
        prop_assert_eq!(s.estimate, ab.estimate);
    }
}

#[test]
fn oracle_reproduces_point_mass_formula() {
    for d in [0.3, 1.0, 2.0, 4.0] {
        let o = grid_oracle(&[0.0], &[d], 2001, 1000);
        let exact = 2.0 * d / (2.0 + d);
        assert!((o - exact).abs() < 5e-3, "{d}: {o} vs {exact}");
        assert!((bl_exact_1d(&[0.0], &[d]) - exact).abs() < 1e-8);
    }
}

#[test]
fn window_max_matches_naive() {
    let v = [0.3, -1.0, 2.0, 0.5, 0.5, -3.0, 1.0];
    for r in 0..8 {
        let naive: Vec<f64> = (0..v.len()).map(|g| v[g.saturating_sub(r)..=(g + r).min(v.len() - 1)].iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect();
        assert_eq!(window_max(&v, r), naive);
    }
}

#[test]
fn report_interval_and_noise_floor_on_interleaved_samples() {
    // quantiles visited in a scrambled order so both halves cover the whole law
    let x: Vec<f64> = (0..2000).map(|i| (((i * 7919) % 2000) as f64 + 0.5) / 2000.0 * 6.0 - 3.0).map(f64::tanh).collect();
    let mut y = x.clone();
    y.rotate_left(7);
    let same = bl_distance_1d(&EmpiricalLaw::from_scalars(&x).unwrap(), &EmpiricalLaw::from_scalars(&y).unwrap(), &quick(1)).unwrap();
    assert_eq!(same.estimate, 0.0);
    let shifted: Vec<f64> = x.iter().map(|p| p + 0.5).collect();
    let r = bl_distance_1d(&EmpiricalLaw::from_scalars(&x).unwrap(), &EmpiricalLaw::from_scalars(&shifted).unwrap(), &quick(2)).unwrap();
    assert!(r.ci_lo <= r.ci_hi && r.estimate > 0.2 && r.estimate > 5.0 * r.noise_floor, "{r:?}");
}
