use proptest::prelude::*;
use rayon::prelude::*;

use wgsqueeze::homodyne::*;
use wgsqueeze::squeezer::{squeeze_levels, SqueezerParams};

fn reference_source() -> SqueezerParams {
    SqueezerParams::new(0.79, 12.1).unwrap()
}

fn short_scan() -> ScanSettings {
    ScanSettings {
        duration_s: 1.0,
        sample_rate_hz: 4000.0,
        ..ScanSettings::default()
    }
}

#[test]
fn trace_minimum_sits_at_squeezed_floor() {
    let a = AnalyzerSettings::default();
    let t = phase_scan_trace(&reference_source(), 0.304, &ScanSettings::default(), &a, 7).unwrap();
    let expected_min = -30.0 + 10.0 * (0.2271f64 + 0.01).log10();
    assert!((expected_min + 36.25).abs() < 0.01);
    let sigma_db = 10.0 * (1.0 + a.relative_noise_std()).log10();
    assert!(
        (t.min_dbm() - expected_min).abs() < 5.0 * sigma_db,
        "{}",
        t.min_dbm()
    );
    assert!(t
        .power_dbm
        .iter()
        .all(|p| p.is_finite() && *p >= a.circuit_level_dbm));
}

#[test]
fn expectation_is_mirror_symmetric_about_apex() {
    let s = ScanSettings::default();
    let e =
        expected_trace_mw(&reference_source(), 0.304, &s, &AnalyzerSettings::default()).unwrap();
    let apex = (s.apex_times()[0] * s.sample_rate_hz).round() as usize;
    let span = apex.min(e.len() - 1 - apex);
    let left: Vec<f64> = (1..=span).map(|k| e[apex - k]).collect();
    let right: Vec<f64> = (1..=span).map(|k| e[apex + k]).collect();
    let corr = correlation(&left, &right);
    assert!(corr > 0.99, "{corr}");
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn zero_pump_is_flat_at_shot_plus_circuit() {
    let a = AnalyzerSettings::default();
    let t = phase_scan_trace(&reference_source(), 0.0, &short_scan(), &a, 3).unwrap();
    let level = 10.0 * (1e-3f64 + 1e-5).log10();
    let sigma_db = 10.0 * (1.0 + a.relative_noise_std()).log10();
    let mean = t.power_dbm.iter().sum::<f64>() / t.power_dbm.len() as f64;
    assert!((mean - level).abs() < 0.01);
    assert!(t
        .power_dbm
        .iter()
        .all(|p| (p - level).abs() < 6.0 * sigma_db));
}

#[test]
fn shot_scatter_matches_analyzer_bandwidths() {
    let a = AnalyzerSettings {
        circuit_level_dbm: -90.0,
        ..AnalyzerSettings::default()
    };
    let s = ScanSettings {
        duration_s: 5.0,
        ..short_scan()
    };
    let t = phase_scan_trace(&reference_source(), 0.0, &s, &a, 11).unwrap();
    let lin: Vec<f64> = t
        .power_dbm
        .iter()
        .map(|p| 10f64.powf(p / 10.0) / 1e-3)
        .collect();
    let n = lin.len() as f64;
    let mean = lin.iter().sum::<f64>() / n;
    let sd = (lin.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((sd / a.relative_noise_std() - 1.0).abs() < 0.05, "{sd}");
}

#[test]
fn averaged_traces_recover_expectation() {
    let a = AnalyzerSettings::default();
    let s = short_scan();
    let expected = expected_trace_mw(&reference_source(), 0.304, &s, &a).unwrap();
    let runs = 100;
    let sum = (0..runs as u64)
        .into_par_iter()
        .map(|seed| {
            let t = phase_scan_trace(&reference_source(), 0.304, &s, &a, seed).unwrap();
            t.power_dbm
                .iter()
                .map(|p| 10f64.powf(p / 10.0))
                .collect::<Vec<f64>>()
        })
        .reduce(
            || vec![0.0; expected.len()],
            |mut acc, v| {
                acc.iter_mut().zip(v).for_each(|(a, b)| *a += b);
                acc
            },
        );
    let sigma = a.relative_noise_std();
    let z: Vec<f64> = sum
        .iter()
        .zip(&expected)
        .map(|(s, e)| (s / runs as f64 - e) / (e * sigma / (runs as f64).sqrt()))
        .collect();
    let beyond3 = z.iter().filter(|v| v.abs() > 3.0).count();
    assert!(
        beyond3 as f64 <= 0.01 * z.len() as f64,
        "{beyond3} of {}",
        z.len()
    );
    assert!(z.iter().all(|v| v.abs() <= 5.0));
}

#[test]
fn high_frequency_squeezing_is_circuit_limited() {
    let freqs: Vec<f64> = (1..=60).map(|k| k as f64 * 10e6).collect();
    let det = DetectorResponse::TwoPole { corner_hz: 400e6 };
    let pts = measured_squeezing_vs_frequency(
        &reference_source(),
        0.304,
        &det,
        &CircuitNoise::Constant(0.01),
        -30.0,
        &freqs,
    )
    .unwrap();
    for w in pts.windows(2) {
        assert!(w[1].squeezing_db >= w[0].squeezing_db);
        assert!(w[1].antisqueezing_db <= w[0].antisqueezing_db);
    }
    for p in &pts {
        // detector gain at least 13 dB above the circuit floor
        if p.shot_dbm - p.circuit_dbm >= 13.0 {
            assert!(p.squeezing_db <= -4.5, "{p:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn traces_are_deterministic(seed in any::<u64>(), pump in 0.0..0.4f64) {
        let s = ScanSettings { duration_s: 0.05, ..short_scan() };
        let a = AnalyzerSettings::default();
        let x = phase_scan_trace(&reference_source(), pump, &s, &a, seed).unwrap();
        let y = phase_scan_trace(&reference_source(), pump, &s, &a, seed).unwrap();
        let bits = |t: &HomodyneTrace| t.power_dbm.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&x), bits(&y));
    }

    #[test]
    fn circuit_ceiling_bounds_measured_squeezing(
        eta in 0.05..1.0f64, a in 0.1..100.0f64, pump in 0.0..1.0f64,
        g in 1e-6..1.0f64, c in 0.0..0.2f64,
    ) {
        let p = SqueezerParams::new(eta, a).unwrap();
        let r = squeeze_levels(&p, pump).unwrap();
        let s = measured_relative_noise(r.minus, g, c);
        let ceiling = 10.0 * ((1.0 + c) / (r.minus + c)).log10();
        prop_assert!(-10.0 * s.log10() <= ceiling + 1e-9);
    }

    #[test]
    fn measured_noise_is_monotone_in_true_level(
        r1 in 0.0..50.0f64, dr in 0.0..10.0f64, g in 1e-6..1.0f64, c in 0.0..0.2f64,
    ) {
        prop_assert!(measured_relative_noise(r1, g, c) <= measured_relative_noise(r1 + dr, g, c));
    }
}
