//! Complex Ornstein-Uhlenbeck examples with closed-form moments.
//!
//! For `da = -a dtau + dbeta` with `E|dbeta|^2 = 2 dtau`:
//! `E a(t) = a0 e^{-t}` and `E I(t) = I0 e^{-2t} + (1 - e^{-2t}) / 2`.

use stochavg::model::system_from_strs;
use stochavg::sde::{simulate_action_sde, simulate_effective, simulate_perturbed, Record, RunParams};
use stochavg::stats::{mean_se, mixing_profile, MixingConfig, ReportOptions};
use stochavg::{ActionVector, AveragingMethod, ComplexVec, DriftVariant, SystemSpec};

const PATHS: usize = 4000;

fn ou(eps: f64) -> SystemSpec {
    system_from_strs(&[1.0, 2f64.sqrt()], eps, &["-v1", "-v2"], None, &[&["1", "0"], &["0", "1"]]).unwrap()
}

fn expected_action(i0: f64, t: f64) -> f64 {
    i0 * (-2.0 * t).exp() + 0.5 * (1.0 - (-2.0 * t).exp())
}

fn within_3se(samples: &[f64], expected: f64) -> bool {
    let (m, se) = mean_se(samples);
    (m - expected).abs() <= 3.0 * se
}

#[test]
fn effective_ou_matches_moments() {
    let v0 = ComplexVec::from_reals(&[1.5, 0.5]).unwrap();
    let times = vec![0.5, 1.0];
    let p = RunParams::new(1.0, 0.001, PATHS, 101).with_record(Record::Times(times.clone()));
    let ens = simulate_effective(&ou(0.1), DriftVariant::Full, &v0, &p, AveragingMethod::Symbolic).unwrap();
    for (idx, &t) in times.iter().enumerate() {
        let states = ens.complex_at(idx).unwrap();
        for k in 0..2 {
            let re: Vec<f64> = states.iter().map(|s| s[k].re).collect();
            let im: Vec<f64> = states.iter().map(|s| s[k].im).collect();
            let i: Vec<f64> = states.iter().map(|s| 0.5 * s[k].norm_sqr()).collect();
            assert!(within_3se(&re, v0[k].re * (-t).exp()), "re k={k} t={t}");
            assert!(within_3se(&im, 0.0), "im k={k} t={t}");
            assert!(within_3se(&i, expected_action(0.5 * v0[k].norm_sqr(), t)), "I k={k} t={t}");
        }
    }
}

#[test]
fn perturbed_ou_actions_match_moments() {
    let v0 = ComplexVec::from_reals(&[1.5, 1.0]).unwrap();
    let p = RunParams::new(1.0, 0.01, PATHS, 202).with_record(Record::Times(vec![1.0]));
    let run = simulate_perturbed(&ou(0.05), &v0, &p).unwrap();
    let v = run.v.actions_at(0);
    let a = run.a.actions_at(0);
    for k in 0..2 {
        let iv: Vec<f64> = v.iter().map(|r| r[k]).collect();
        let ia: Vec<f64> = a.iter().map(|r| r[k]).collect();
        assert!(iv.iter().zip(&ia).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x)));
        assert!(within_3se(&iv, expected_action(0.5 * v0[k].norm_sqr(), 1.0)), "k={k}");
    }
    let states = run.a.complex_at(0).unwrap();
    let re: Vec<f64> = states.iter().map(|s| s[0].re).collect();
    assert!(within_3se(&re, 1.5 * (-1.0f64).exp()));
}

#[test]
fn action_sde_matches_moments() {
    let i0 = ActionVector::new(vec![1.125, 0.0]).unwrap();
    let p = RunParams::new(1.0, 0.001, PATHS, 303).with_record(Record::Times(vec![0.25, 1.0]));
    let ens = simulate_action_sde(&ou(0.1), &i0, &p, AveragingMethod::Symbolic).unwrap();
    for (idx, t) in [0.25, 1.0].into_iter().enumerate() {
        let acts = ens.actions_at(idx);
        for k in 0..2 {
            let col: Vec<f64> = acts.iter().map(|r| r[k]).collect();
            assert!(col.iter().all(|&x| x >= 0.0));
            assert!(within_3se(&col, expected_action(i0.as_slice()[k], t)), "k={k} t={t}");
        }
    }
}

#[test]
fn mixing_distance_falls_below_the_noise_scale() {
    let spec = ou(0.1);
    let v1 = ComplexVec::from_reals(&[2.0, 0.0]).unwrap();
    let v2 = ComplexVec::from_reals(&[0.0, 2.0]).unwrap();
    let cfg = MixingConfig {
        t_end: 4.0,
        dtau: 0.01,
        n_paths: 500,
        seed: 404,
        times: vec![0.25, 1.0, 4.0],
        m_bound: 2.0,
        method: AveragingMethod::Symbolic,
        report: ReportOptions { bootstrap: 20, ..ReportOptions::default() }.with_seed(5),
    };
    let r = mixing_profile(&spec, DriftVariant::Full, &v1, &v2, &cfg).unwrap();
    assert!(r[0].estimate > r[1].estimate && r[1].estimate > r[2].estimate, "{r:?}");
    assert!(r[0].estimate > 5.0 * r[0].noise_floor);
    assert!(r[2].estimate < 3.0 * r[2].noise_floor, "{:?}", r[2]);
    assert!(r.iter().all(|d| d.noise_floor > 0.0 && d.ci_lo <= d.ci_hi));
}

#[test]
fn same_seed_same_paths_regardless_of_recording() {
    let v0 = ComplexVec::from_reals(&[1.0, 1.0]).unwrap();
    let spec = ou(0.1);
    let all = simulate_effective(&spec, DriftVariant::Full, &v0, &RunParams::new(0.5, 0.01, 64, 9).with_record(Record::All), AveragingMethod::Symbolic).unwrap();
    let end = simulate_effective(&spec, DriftVariant::Full, &v0, &RunParams::new(0.5, 0.01, 64, 9).with_record(Record::Times(vec![0.5])), AveragingMethod::Symbolic).unwrap();
    assert_eq!(all.complex_at(all.times().len() - 1), end.complex_at(0));
}
