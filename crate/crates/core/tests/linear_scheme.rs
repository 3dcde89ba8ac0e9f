use dnastore::channel::NoiseSpec;
use dnastore::codec_index::InnerCodeSpec;
use dnastore::harness::{self, CodecConfig, Experiment, ExperimentConfig, RunOutput, Scheme};
use dnastore::sampling::SamplingSpec;
use dnastore::Alphabet;

fn linear_run(l: usize, b: usize, messages: usize, p: f64, sampling: SamplingSpec<f64>, trials: usize, seed: u64) -> RunOutput {
    let cfg = ExperimentConfig {
        schema_version: harness::SCHEMA_VERSION,
        experiment: Experiment::CodecTrial(CodecConfig {
            scheme: Scheme::Linear,
            outer: None,
            inner: InnerCodeSpec::None,
            rate: None,
            field_bits: None,
            b: Some(b),
            num_messages: Some(messages),
            epsilon: None,
        }),
        m: Some(2),
        l: Some(l),
        beta: None,
        alphabet: Alphabet::Binary,
        sampling: Some(sampling),
        noise: Some(NoiseSpec::Bec { p }),
        trials,
        seed,
        output: None,
        record_runtime: false,
    };
    harness::run(&cfg).unwrap()
}

fn wrong(out: &RunOutput) -> usize {
    out.records.iter().filter(|r| r.metrics["wrong"] > 0.0).count()
}

/// `P(Bin(n, q) < k)`.
fn binom_cdf_below(n: u64, q: f64, k: u64) -> f64 {
    let mut c = 1.0;
    let mut total = 0.0;
    for i in 0..k {
        if i > 0 {
            c = c * (n - i + 1) as f64 / i as f64;
        }
        total += c * q.powi(i as i32) * (1.0 - q).powi((n - i) as i32);
    }
    total
}

#[test]
fn noiseless_single_copy_decodes() {
    let out = linear_run(6, 4, 16, 0.0, SamplingSpec::Fixed { n: 1 }, 100, 7);
    assert_eq!(out.summary.successes, 100);
}

#[test]
fn rates_beyond_capacity_fail_far_more_often() {
    // M=2, L=6, BEC(0.1): capacity 1 - p - 1/β = 0.733
    let below = linear_run(6, 6, 16, 0.1, SamplingSpec::Fixed { n: 1 }, 500, 11);
    let above = linear_run(6, 11, 2048, 0.1, SamplingSpec::Fixed { n: 1 }, 500, 12);
    let capacity = 1.0 - 0.1 - 1.0 / 6.0;
    assert!(below.summary.means["rate"] < capacity && above.summary.means["rate"] > 1.2 * capacity);
    let (fb, fa) = (1.0 - below.summary.success_rate, 1.0 - above.summary.success_rate);
    assert!(fa >= 5.0 * fb, "below {fb}, above {fa}");
    assert_eq!(wrong(&below) + wrong(&above), 0);
}

#[test]
fn too_few_surviving_equations_is_underdetermined() {
    // B=8 needs 8 unerased positions out of 12
    let trials = 500;
    let out = linear_run(6, 8, 64, 0.2, SamplingSpec::Fixed { n: 1 }, trials, 13);
    let floor = binom_cdf_below(12, 0.8, 8);
    let sigma = (floor * (1.0 - floor) / trials as f64).sqrt();
    assert!(out.summary.means["underdetermined"] >= floor - 3.0 * sigma);
    assert!(out.summary.success_rate <= 1.0 - floor + 3.0 * sigma);
    assert_eq!(wrong(&out), 0);
}

#[test]
fn never_silently_wrong_under_multi_draw() {
    for (lambda, p) in [(1.0, 0.1), (2.0, 0.2), (2.0, 0.3)] {
        let out = linear_run(6, 8, 64, p, SamplingSpec::Poisson { lambda }, 200, 14);
        assert_eq!(wrong(&out), 0, "lambda={lambda} p={p}");
    }
}
