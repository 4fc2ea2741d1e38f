//! Expected values computed independently of the library: closed forms,
//! brute-force integration and root finding.

use std::f64::consts::{LN_2, PI};

use ionjump_core::analysis::dwell_statistics_from;
use ionjump_core::atom::{dark_dwell_sampler, steady_state_populations, DarkStateParams, RateMatrix};
use ionjump_core::interaction::{
    convolve_profiles, temperature_scan_model, BackgroundRates, CouplingFactors,
};
use ionjump_core::rng::{stream_rng, Stream};
use ionjump_core::spdc::{filtered_photon_spectrum, integrated_rate, FilterChainConfig, SpdcSourceConfig};
use ionjump_core::trajectory::{
    simulate_trace, simulate_trace_with, stationary_dark_fraction, Direction, FluorescenceState,
    TelegraphParams,
};
use ionjump_core::LineProfile;
use rand::Rng;
use rand_distr::{Distribution, Exp};

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn random_matrix(seed: u64) -> RateMatrix {
    let mut rng = stream_rng(seed, 0, Stream::Sampler);
    let mut t = Vec::new();
    for from in 0..3 {
        for to in 0..3 {
            if from != to {
                t.push((from, to, 10f64.powf(rng.random_range(-1.0..1.0))));
            }
        }
    }
    RateMatrix::from_transitions(vec!["a".into(), "b".into(), "c".into()], &t).unwrap()
}

#[test]
fn stationary_state_matches_time_integration() {
    for seed in 0..10 {
        let m = random_matrix(seed);
        let r = m.rates();
        let min_rate = (0..3)
            .flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| r[(i, j)])
            .fold(f64::INFINITY, f64::min);
        let max_out = (0..3).map(|j| -r[(j, j)]).fold(0.0, f64::max);
        let t_end = 100.0 / min_rate;
        let steps = (t_end * max_out / 0.05).ceil() as usize;
        let dt = t_end / steps as f64;
        let f = |p: &[f64; 3]| -> [f64; 3] {
            let mut d = [0.0; 3];
            for i in 0..3 {
                for j in 0..3 {
                    d[i] += r[(i, j)] * p[j];
                }
            }
            d
        };
        let add = |p: &[f64; 3], k: &[f64; 3], h: f64| [p[0] + h * k[0], p[1] + h * k[1], p[2] + h * k[2]];
        let mut p = [1.0, 0.0, 0.0];
        for _ in 0..steps {
            let k1 = f(&p);
            let k2 = f(&add(&p, &k1, dt / 2.0));
            let k3 = f(&add(&p, &k2, dt / 2.0));
            let k4 = f(&add(&p, &k3, dt));
            for i in 0..3 {
                p[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        let solved = steady_state_populations(&m).unwrap();
        for (a, b) in solved.populations().iter().zip(p) {
            assert!((a - b).abs() < 1e-6, "seed {seed}: {a} vs {b}");
        }
    }
}

#[test]
fn dwell_sampler_moments() {
    let xs: Vec<f64> = dark_dwell_sampler(DarkStateParams::default(), 21).take(100_000).collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((1.188..=1.212).contains(&mean), "{mean}");
    assert!((var / (mean * mean) - 1.0).abs() <= 0.02, "{}", var / (mean * mean));
}

#[test]
fn dwell_sampler_passes_kolmogorov_smirnov() {
    // Asymptotic critical value of the one-sample KS statistic at α = 0.01.
    const KS_CRITICAL_001: f64 = 1.628;
    let mut xs: Vec<f64> = dark_dwell_sampler(DarkStateParams::default(), 5).take(10_000).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = 1.0 - (-x / 1.2).exp();
            (cdf - i as f64 / n).abs().max(((i + 1) as f64 / n - cdf).abs())
        })
        .fold(0.0, f64::max);
    assert!(d < KS_CRITICAL_001 / n.sqrt(), "D = {d}");
}

#[test]
fn envelope_center_for_100_ghz() {
    let c = SpdcSourceConfig::default();
    let center = c.envelope_center(c.ref_temperature_c - 1.695);
    assert!((center - 100.0).abs() <= 0.1, "{center}");
}

#[test]
fn gaussian_envelope_integral_matches_closed_form() {
    let c = SpdcSourceConfig::default();
    let w = c.envelope_fwhm_ghz;
    let step = w / 1000.0;
    let n = 6000;
    let sum: f64 = (0..=n)
        .map(|i| {
            let x = -3.0 * w + i as f64 * step;
            let weight = if i == 0 || i == n { 0.5 } else { 1.0 };
            weight * c.spectral_flux_density(x, c.ref_temperature_c)
        })
        .sum::<f64>()
        * step;
    let a = 2.0 * LN_2.sqrt() / w;
    let closed = c.peak_flux_density * PI.sqrt() / a * statrs::function::erf::erf(3.0 * w * a);
    assert!((sum / closed - 1.0).abs() < 1e-3, "{sum} vs {closed}");
}

#[test]
fn two_cavity_width_by_root_finding() {
    let chain = FilterChainConfig::default();
    let expected = 22.0 / (2f64.sqrt() - 1.0).sqrt();
    for w in &chain.cavity_fwhms_mhz {
        assert!((w - expected).abs() < 0.01, "{w}");
    }
    let half = bisect(|d| chain.transmission(d) - 0.25, 0.0, 100.0);
    assert!((2.0 * half - 22.0).abs() < 0.01, "{}", 2.0 * half);
}

#[test]
fn single_cavity_filtered_rate_matches_lorentzian_area() {
    let spdc = SpdcSourceConfig::default();
    let chain = FilterChainConfig::identical(1, 22.0, 0.5, 0.0).unwrap();
    let spectrum = filtered_photon_spectrum(&spdc, &chain, spdc.ref_temperature_c).unwrap();
    let expected = 250.0 * 0.5 * (PI / 2.0 * 22.0);
    let got = integrated_rate(&spectrum);
    assert!((got / expected - 1.0).abs() < 0.05, "{got} vs {expected}");
}

#[test]
fn far_detuned_envelope_is_suppressed() {
    let spdc = SpdcSourceConfig::default();
    let chain = FilterChainConfig::default();
    let on = integrated_rate(&filtered_photon_spectrum(&spdc, &chain, spdc.ref_temperature_c).unwrap());
    let t_far = spdc.ref_temperature_c + 3.0 * spdc.envelope_fwhm_ghz / spdc.temp_slope_ghz_per_c;
    match filtered_photon_spectrum(&spdc, &chain, t_far) {
        Ok(s) => assert!(integrated_rate(&s) < 0.01 * on),
        Err(_) => {}
    }
}

#[test]
fn gaussian_widths_add_in_quadrature() {
    let a = LineProfile::gaussian(0.0, 15.0, 1.0).unwrap();
    let b = LineProfile::gaussian(2.0, 40.0, 1.0).unwrap();
    let c = convolve_profiles(&a, &b).unwrap();
    let sigma = |fwhm: f64| fwhm / (8.0 * LN_2).sqrt();
    let expected = (sigma(15.0).powi(2) + sigma(40.0).powi(2)).sqrt();
    assert!((sigma(c.fwhm()) / expected - 1.0).abs() < 0.005);
}

#[test]
fn delta_like_kernel_is_the_identity() {
    let x = LineProfile::lorentzian(1.0, 36.0, 2.0).unwrap();
    let delta = LineProfile::gaussian(0.0, 1e-3, 1.0).unwrap();
    let c = convolve_profiles(&x, &delta).unwrap();
    assert!((c.fwhm() / 36.0 - 1.0).abs() < 0.01);
    assert!((c.center() - 1.0).abs() < 0.36);
    let scale = c.peak() / x.peak();
    for d in [-60.0, -18.0, 0.0, 7.0, 18.0, 90.0] {
        let rel = c.evaluate(1.0 + d) / (scale * x.evaluate(1.0 + d)) - 1.0;
        assert!(rel.abs() < 0.01, "at {d}: {rel}");
    }
}

#[test]
fn temperature_fwhm_by_root_finding() {
    let spdc = SpdcSourceConfig::default();
    let window = LineProfile::lorentzian(0.0, 22.0, 1.0).unwrap();
    let bg = BackgroundRates::default();
    let rate = |t: f64| {
        temperature_scan_model(&spdc, &window, &CouplingFactors::default(), &bg, &[t])
            .unwrap()
            .rates()[0]
            - bg.background_jump_rate
    };
    let t0 = spdc.ref_temperature_c;
    let half = 0.5 * rate(t0);
    let hi = bisect(|t| rate(t) - half, t0, t0 + 10.0);
    let lo = bisect(|t| rate(t) - half, t0 - 10.0, t0);
    assert!((hi - lo - 200.0 / 59.0).abs() < 0.05, "{}", hi - lo);
    let far = rate(t0 + 10.0) + bg.background_jump_rate;
    assert!((far / bg.background_jump_rate - 1.0).abs() < 0.01);
}

#[test]
fn hourly_pair_count_over_a_thousand_seeds() {
    let p = TelegraphParams::new(0.0117, 1.0 / 1.2, 2000.0, 50.0).unwrap();
    let counts: Vec<f64> = (0..1000)
        .map(|seed| simulate_trace(&p, 3600.0, 0.1, seed).unwrap().true_cycle_count() as f64)
        .collect();
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let sd = (counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((mean - 42.0).abs() <= 2.0, "{mean}");
    assert!((mean - 3600.0 * p.cycle_rate()).abs() <= 3.0 * sd / n.sqrt(), "{mean}");
}

#[test]
fn transition_count_matches_renewal_rate() {
    let p = TelegraphParams::new(0.05, 1.0 / 1.2, 2000.0, 50.0).unwrap();
    let d = 2000.0;
    let counts: Vec<f64> = (0..300)
        .map(|seed| simulate_trace(&p, d, 0.5, seed).unwrap().true_transition_count() as f64)
        .collect();
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let sd = (counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let (k1, k2) = (p.bright_to_dark_rate, p.dark_to_bright_rate);
    let expected = 2.0 * d * k1 * k2 / (k1 + k2);
    assert!((mean - expected).abs() <= 3.0 * sd / n.sqrt(), "{mean} vs {expected}");
}

#[test]
fn dark_fraction_of_a_long_trace() {
    let p = TelegraphParams::new(0.00909, 1.0 / 1.2, 2000.0, 50.0).unwrap();
    assert!((stationary_dark_fraction(&p) - 0.01079).abs() < 1e-5);
    let t = simulate_trace(&p, 1e5, 0.1, 8).unwrap();
    let f = t.true_dark_time() / t.duration();
    let expected = stationary_dark_fraction(&p);
    let se = expected * (1.0 - expected) * (2.0 / t.true_cycle_count() as f64).sqrt();
    assert!((f - expected).abs() <= 3.0 * se, "{f} vs {expected} (se {se})");
}

#[test]
fn single_jump_bins_have_interpolated_means() {
    let p = TelegraphParams::new(2.0, 2.0, 3000.0, 200.0).unwrap();
    let bin = 0.5;
    let (mut observed, mut expected) = (0.0, 0.0);
    let mut used = 0;
    for trial in 0..20_000 {
        let t = simulate_trace_with(&p, bin, bin, 3, trial, FluorescenceState::Bright).unwrap();
        if t.true_jumps.len() != 1 {
            continue;
        }
        let j = t.true_jumps[0];
        assert_eq!(j.direction, Direction::BrightToDark);
        let phi = j.time / bin;
        expected += phi * p.bright_count_rate * bin + (1.0 - phi) * p.dark_count_rate * bin;
        observed += t.counts[0] as f64;
        used += 1;
    }
    assert!(used > 1000);
    assert!((observed - expected).abs() <= 3.0 * expected.sqrt(), "{observed} vs {expected}");
}

#[test]
fn synthetic_dwell_mean_within_two_sigma_band() {
    let mut rng = stream_rng(12, 0, Stream::Sampler);
    let exp = Exp::new(1.0 / 1.2).unwrap();
    let dwells: Vec<f64> = (0..10_000).map(|_| exp.sample(&mut rng)).collect();
    let s = dwell_statistics_from(&dwells, &[]).unwrap();
    assert!((1.176..=1.224).contains(&s.mean_dwell), "{}", s.mean_dwell);
    assert!(s.ci_low < s.mle_mean && s.mle_mean < s.ci_high);
}

#[test]
fn dwell_mle_is_unbiased_over_repetitions() {
    let exp = Exp::new(1.0 / 1.2).unwrap();
    let estimates: Vec<f64> = (0..100)
        .map(|seed| {
            let mut rng = stream_rng(seed, 0, Stream::Sampler);
            let dwells: Vec<f64> = (0..200).map(|_| exp.sample(&mut rng)).collect();
            dwell_statistics_from(&dwells, &[]).unwrap().mle_mean
        })
        .collect();
    let n = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let sd = (estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((mean - 1.2).abs() <= 3.0 * sd / n.sqrt(), "{mean}");
}
