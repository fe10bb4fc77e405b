//! End-to-end acceptance suite. Each test prints a single PASS line with the
//! quantity it pinned down; tolerances are stated inline.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use maxdet::bounds::{self, BoundMethod};
use maxdet::construction::{
    assemble, det_exact, derive_seed, replace_zeros, run_exhaustive_d1, run_trials, sample_border,
};
use maxdet::exactmath::moments;
use maxdet::hadamard::{build_registry, paley, sylvester, HadamardMatrix};
use maxdet::verify;

fn pass(n: u32, msg: &str) {
    println!("PASS criterion {n}: {msg}");
}

fn ratio_of(reports: &[bounds::BoundReport], m: BoundMethod) -> &bounds::BoundReport {
    reports.iter().find(|r| r.method == m).unwrap()
}

/// |x - printed| <= one unit in the last printed decimal place.
fn last_digit(x: f64, printed: f64, places: i32) {
    let unit = 10f64.powi(-places);
    assert!(
        (x - printed).abs() <= unit * 1.000001,
        "{x} vs printed {printed} (tolerance {unit})"
    );
}

#[test]
fn criterion_01_moment_values() {
    let t0 = Instant::now();
    let m664 = moments(664).unwrap();
    let m996 = moments(996).unwrap();
    assert_eq!(format!("{:.5}", m664.mu_f), "21.55231");
    assert_eq!(format!("{:.8}", m664.sigma2_f), "0.04638855");
    assert_eq!(format!("{:.5}", m996.mu_f), "26.17449");
    assert_eq!(format!("{:.8}", m996.sigma2_f), "0.04594917");
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 1.0, "took {dt:?}");
    pass(1, "mu/sigma^2 at h in {664, 996} match all printed digits");
}

#[test]
fn criterion_02_table_h664() {
    let t0 = Instant::now();
    let stats = moments(664).unwrap();

    let r4 = bounds::evaluate_all(&stats, 4);
    // inapplicable rows render as dashes
    assert!(!r4.iter().any(|r| r.method == BoundMethod::ExpandDet));
    assert!(!ratio_of(&r4, BoundMethod::ChebyshevLll).applicable);
    let expect4: &[(BoundMethod, f64, Option<f64>, Option<f64>)] = &[
        (BoundMethod::Chebyshev, 0.2576, None, None),
        (BoundMethod::ChebyshevOpt, 0.3521, None, None),
        (BoundMethod::CantelliHoeffdingLll, 0.6781, Some(0.05619), Some(0.1341)),
        (BoundMethod::CantelliHoeffdingNoLll, 0.7565, Some(0.03870), Some(0.1222)),
        (BoundMethod::TwoParamCor5, 0.7975, Some(0.01728), Some(0.1394)),
        (BoundMethod::TwoParamOpt, 0.7990, Some(0.01937), Some(0.1352)),
    ];
    for &(m, ratio, lambda, t) in expect4 {
        let r = ratio_of(&r4, m);
        assert!(r.applicable, "{m:?} should apply at d=4");
        last_digit(r.ratio_bound, ratio, 4);
        if let Some(l) = lambda {
            last_digit(r.lambda.unwrap(), l, 5);
        }
        if let Some(t) = t {
            last_digit(r.t.unwrap(), t, 4);
        }
    }

    let r7 = bounds::evaluate_all(&stats, 7);
    for m in [BoundMethod::Chebyshev, BoundMethod::ChebyshevOpt, BoundMethod::ChebyshevLll] {
        assert!(!ratio_of(&r7, m).applicable, "{m:?} should dash at d=7");
    }
    let expect7: &[(BoundMethod, f64, f64, f64)] = &[
        (BoundMethod::CantelliHoeffdingLll, 0.0742, 0.08010, 0.1448),
        (BoundMethod::CantelliHoeffdingNoLll, 0.1326, 0.06924, 0.1405),
        (BoundMethod::TwoParamCor5, 0.1125, 0.02624, 0.1531),
        (BoundMethod::TwoParamOpt, 0.1667, 0.04238, 0.1441),
    ];
    for &(m, ratio, lambda, t) in expect7 {
        let r = ratio_of(&r7, m);
        assert!(r.applicable);
        last_digit(r.ratio_bound, ratio, 4);
        last_digit(r.lambda.unwrap(), lambda, 5);
        last_digit(r.t.unwrap(), t, 4);
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 1.0, "took {dt:?}");
    pass(2, "h=664 table (d=4 values, d=7 values and dashes) within 1 last-digit unit");
}

#[test]
fn criterion_03_table_h996() {
    let stats = moments(996).unwrap();
    let expect: &[(usize, BoundMethod, f64)] = &[
        (2, BoundMethod::ExpandDet, 0.9985),
        (2, BoundMethod::Chebyshev, 0.8472),
        (2, BoundMethod::ChebyshevOpt, 0.8895),
        (2, BoundMethod::ChebyshevLll, 0.7480),
        (2, BoundMethod::CantelliHoeffdingLll, 0.9402),
        (2, BoundMethod::CantelliHoeffdingNoLll, 0.9658),
        (2, BoundMethod::TwoParamCor5, 0.9741),
        (2, BoundMethod::TwoParamOpt, 0.9741),
        (3, BoundMethod::ExpandDet, 0.9910),
        (3, BoundMethod::Chebyshev, 0.6562),
        (3, BoundMethod::ChebyshevOpt, 0.7160),
        (3, BoundMethod::ChebyshevLll, 0.4655),
        (3, BoundMethod::CantelliHoeffdingLll, 0.8581),
        (3, BoundMethod::CantelliHoeffdingNoLll, 0.9058),
        (3, BoundMethod::TwoParamCor5, 0.9287),
        (3, BoundMethod::TwoParamOpt, 0.9288),
    ];
    let cols = [bounds::evaluate_all(&stats, 2), bounds::evaluate_all(&stats, 3)];
    for &(d, m, ratio) in expect {
        let r = ratio_of(&cols[d - 2], m);
        assert!(r.applicable, "{m:?} should apply at d={d}");
        last_digit(r.ratio_bound, ratio, 4);
    }
    pass(3, "h=996 table, all 16 entries for d in {2, 3} within 1 last-digit unit");
}

fn two_constructions(h: u64) -> Vec<HadamardMatrix> {
    let h2 = sylvester(&HadamardMatrix::unit());
    match h {
        4 => vec![sylvester(&h2), paley(3).unwrap()],
        8 => vec![sylvester(&sylvester(&h2)), sylvester(&paley(3).unwrap())],
        12 => vec![paley(11).unwrap(), paley(5).unwrap()],
        _ => panic!("no construction pair for {h}"),
    }
}

#[test]
fn criterion_04_diagonal_enumeration() {
    let t0 = Instant::now();
    for h in [4u64, 8, 12] {
        for a in two_constructions(h) {
            assert!(a.validate());
            let reports = verify::enumerate_diagonal_moments(&a).unwrap();
            for r in &reports {
                assert!(r.equal, "h={h} {}: {} != {}", r.quantity, r.enumerated_value, r.formula_value);
            }
        }
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 10.0, "took {dt:?}");
    pass(4, "2^h diagonal enumeration at h in {4, 8, 12} exact for two constructions each");
}

#[test]
fn criterion_05_offdiag_enumeration() {
    let t0 = Instant::now();
    for h in [4u64, 8] {
        for a in two_constructions(h) {
            let reports = verify::enumerate_offdiag_moments(&a).unwrap();
            for r in &reports {
                assert!(r.equal, "h={h} {}: {} != {}", r.quantity, r.enumerated_value, r.formula_value);
            }
        }
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 30.0, "took {dt:?}");
    pass(5, "2^(2h) off-diagonal enumeration at h in {4, 8}: E[f12] = 0, E[f12^2] = 1 exactly");
}

#[test]
fn criterion_06_schur_identity() {
    let reg = build_registry(16, None).unwrap();
    let mut checked = 0u32;
    let mut i = 0u64;
    'outer: for h in [4u64, 8, 12, 16] {
        let a = reg.materialize(h).unwrap();
        let n = h as usize;
        let a_big: Vec<BigInt> = (0..n * n)
            .map(|k| BigInt::from(a.matrix.get(k / n, k % n)))
            .collect();
        let det_a = det_exact(&a_big, n);
        for d in 1..=4usize {
            for _ in 0..13u64 {
                let sample = sample_border(&a, d, derive_seed(0xACCE97, i));
                i += 1;
                let o = replace_zeros(&a, &sample);
                let full = assemble(&a, &sample.b, &sample.c, &o.d_entries);
                let m = n + d;
                let det_full = det_exact(&full, m);
                let expected = BigRational::from_integer(det_a.abs()) * &o.det_g;
                assert_eq!(
                    BigRational::from_integer(det_full.abs()),
                    expected,
                    "h={h} d={d} sample {i}"
                );
                checked += 1;
                if checked == 200 {
                    break 'outer;
                }
            }
        }
    }
    assert!(checked >= 200);
    pass(6, "200 seeded samples: |det(full)| = |det(A)| * det(Schur complement) exactly");
}

#[test]
fn criterion_07_binomial_identities() {
    let rep = verify::check_binomial_identities(200);
    assert!(rep.passed, "{:?}", rep.details);
    pass(7, "both binomial sum identities exact for all k <= 200");
}

#[test]
fn criterion_08_construction_floor() {
    // exhaustive n = 5 search: best determinant is 48
    let a = sylvester(&sylvester(&HadamardMatrix::unit()));
    let summary = run_exhaustive_d1(&a).unwrap();
    assert_eq!(
        summary.best.det_g,
        BigRational::from_integer(BigInt::from(3))
    );
    assert!((summary.best.dbar - 0.8587).abs() < 1e-4);

    // at (h=12, d=2) the optimized two-parameter bound applies and at least
    // one of 10^4 trials reaches it
    let stats = moments(12).unwrap();
    let (_, bound) = bounds::optimize_lambda(&stats, 2).unwrap();
    assert!(bound.applicable, "optimized bound expected to apply at (12, 2)");
    let h12 = paley(11).unwrap();
    let trials = run_trials(&h12, 2, 10_000, 0xF100D).unwrap();
    assert!(
        trials.max_ratio >= bound.ratio_bound,
        "max ratio {} < guaranteed {}",
        trials.max_ratio,
        bound.ratio_bound
    );
    pass(8, "n=5 exhaustive search hits det 48 (Dbar 0.8587); (12,2) trials reach the positive-probability bound");
}

#[test]
fn criterion_09_perturbation_lemmas() {
    for d in 2..=6usize {
        let rep = verify::check_perturbation_lemmas(d, 10_000, 40 + d as u64);
        assert!(rep.passed, "d={d}: {:?}", rep.details);
    }
    pass(9, "10^4 randomized perturbation trials per d in {2..6}, zero violations");
}

#[test]
fn criterion_10_property_suite() {
    use maxdet::exactmath::mu_monotone_check;
    use std::f64::consts::PI;

    // moment enclosures and residual windows for every valid h <= 400
    let mut prev: Option<(f64, f64)> = None;
    for h in (4..=400u64).step_by(4) {
        let s = moments(h).unwrap();
        let hf = h as f64;
        let root = (2.0 * hf / PI).sqrt();
        assert!(root + 0.9 < s.mu_f && s.mu_f < root + 1.0, "mu enclosure at h={h}");
        assert!(1.0 - 3.0 / PI < s.sigma2_f && s.sigma2_f <= 0.25 + 1e-15, "sigma^2 enclosure at h={h}");
        let alpha = hf * hf * ((s.mu_f - 1.0) / root - 1.0 + 1.0 / (4.0 * hf));
        let beta = hf * hf * ((1.0 - 3.0 / PI) + 11.0 / (4.0 * PI * hf) - s.sigma2_f);
        assert!((0.0..=0.04491 * (1.0 + 1e-12)).contains(&alpha), "alpha(h)={alpha} at h={h}");
        assert!((0.0..=0.23 * (1.0 + 1e-12)).contains(&beta), "beta(h)={beta} at h={h}");
        if let Some((pm, ps)) = prev {
            assert!(s.mu_f > pm, "mu not increasing at h={h}");
            assert!(s.sigma2_f < ps, "sigma^2 not decreasing at h={h}");
        }
        prev = Some((s.mu_f, s.sigma2_f));
    }
    assert!(mu_monotone_check(400).unwrap());

    // dominance orderings among the bound families for d in {2..9}
    let stats = moments(664).unwrap();
    for d in 2..=9usize {
        let rows = bounds::evaluate_all(&stats, d);
        let cheb = ratio_of(&rows, BoundMethod::Chebyshev);
        let opt = ratio_of(&rows, BoundMethod::ChebyshevOpt);
        if cheb.applicable {
            assert!(opt.ratio_bound >= cheb.ratio_bound - 1e-12, "opt < cheb at d={d}");
        }
        let lll = ratio_of(&rows, BoundMethod::CantelliHoeffdingLll);
        let nolll = ratio_of(&rows, BoundMethod::CantelliHoeffdingNoLll);
        if lll.applicable && nolll.applicable {
            assert!(nolll.ratio_bound >= lll.ratio_bound - 1e-12, "nolll < lll at d={d}");
        }
        let cor5 = ratio_of(&rows, BoundMethod::TwoParamCor5);
        let opt2 = ratio_of(&rows, BoundMethod::TwoParamOpt);
        if cor5.applicable && opt2.applicable {
            assert!(
                opt2.ratio_bound >= cor5.ratio_bound * (1.0 - 1e-9),
                "optimized two-param below fixed-lambda at d={d}"
            );
        }
    }

    // the elementary (h/n)^n > exp(-d - d^2/h) inequality for all n <= 1000
    let rep = verify::check_uncond2(1000);
    assert!(rep.passed, "{:?}", rep.details);
    pass(10, "enclosures/residuals h <= 400, monotonicity, dominance d in {2..9}, ratio inequality n <= 1000");
}
