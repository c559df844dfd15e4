use std::fs;
use std::sync::atomic::{AtomicU64, Ordering};

use hrla::diagnostics::{law_recursion, BlockLaw};
use hrla::harness::{presets, run_experiment, run_experiment_on, write_outputs, ExperimentConfig, Temperature};
use hrla::potentials::{rastrigin, Potential, QuadraticPotential, Rastrigin};
use hrla::samplers::{run_chain, InitialDistribution};
use hrla::{HrlaParams, RandomStream};

struct Counting {
    inner: Rastrigin,
    gradients: AtomicU64,
    values: AtomicU64,
}

impl Potential for Counting {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.values.fetch_add(1, Ordering::Relaxed);
        self.inner.value(x)
    }
    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        self.gradients.fetch_add(1, Ordering::Relaxed);
        self.inner.gradient(x, grad)
    }
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.gradients.fetch_add(1, Ordering::Relaxed);
        self.values.fetch_add(1, Ordering::Relaxed);
        self.inner.value_and_gradient(x, grad)
    }
    fn known_minimum(&self) -> Option<f64> {
        Some(0.0)
    }
}

#[test]
fn gradient_evaluations_are_m_n_k() {
    let potential = Counting {
        inner: rastrigin(4).unwrap(),
        gradients: AtomicU64::new(0),
        values: AtomicU64::new(0),
    };
    let mut cfg = ExperimentConfig::rastrigin(4, 3, 5, 37, 0.01, 4.0);
    cfg.workers = 2;
    let out = run_experiment_on(&cfg, &potential).unwrap();
    assert_eq!(potential.gradients.load(Ordering::Relaxed), 3 * 5 * 37);
    assert_eq!(out.gradient_evaluations, 3 * 5 * 37);
    // One value per step at the gradient call site, plus one at x_K.
    assert_eq!(potential.values.load(Ordering::Relaxed), 3 * 5 * 38);
}

fn small_annealed() -> ExperimentConfig {
    let mut cfg = presets::table3(4.0);
    cfg.m = 20;
    cfg.n = 8;
    cfg.k = 120;
    cfg
}

#[test]
fn csv_output_is_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for workers in [1, 4, 16] {
        let mut cfg = small_annealed();
        cfg.workers = workers;
        let path = dir.path().join(format!("w{workers}"));
        write_outputs(&path, &run_experiment(&cfg).unwrap()).unwrap();
        let files: Vec<Vec<u8>> = ["curves.csv", "probabilities.csv", "summary.csv"]
            .iter()
            .map(|f| fs::read(path.join(f)).unwrap())
            .collect();
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn csv_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_annealed();
    cfg.m = 3;
    let out = run_experiment(&cfg).unwrap();
    write_outputs(dir.path(), &out).unwrap();
    let header = |f: &str| {
        fs::read_to_string(dir.path().join(f))
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string()
    };
    assert_eq!(header("curves.csv"), "run,iteration,best_value");
    assert_eq!(header("probabilities.csv"), "iteration,epsilon,p_hat");
    assert_eq!(header("summary.csv"), "h,a_final,avg,median,sd,m,n,k,sampler");
    let curves = fs::read_to_string(dir.path().join("curves.csv")).unwrap();
    assert_eq!(curves.lines().count(), 1 + 3 * 121);
    let probs = fs::read_to_string(dir.path().join("probabilities.csv")).unwrap();
    assert_eq!(probs.lines().count(), 1 + 121 * cfg.epsilons.len());
    let saved = ExperimentConfig::parse(&fs::read_to_string(dir.path().join("config.txt")).unwrap()).unwrap();
    assert_eq!(saved, cfg);
}

#[test]
fn running_best_is_nonincreasing_and_probabilities_monotone() {
    let out = run_experiment(&small_annealed()).unwrap();
    for rec in &out.records {
        assert!(rec.running_best.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*rec.running_best.last().unwrap(), rec.best_value);
    }
    for row in &out.curve.p_hat {
        assert!(row.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn annealed_run_matches_direct_chains() {
    let cfg = small_annealed();
    let out = run_experiment(&cfg).unwrap();
    let p = cfg.potential.build().unwrap();
    let init = cfg.init.resolve(10).unwrap();
    let schedule = cfg.schedule().unwrap().unwrap();
    let params = cfg.initial_params().unwrap();
    assert_eq!(cfg.temperature, Temperature::Linear { low: 0.1, high: 4.0 });
    let rec = &out.records[5];
    let best = (0..cfg.n)
        .map(|s| {
            let stream = RandomStream::substream(cfg.seed, 5, s as u32);
            let run = run_chain(&params, p.as_ref(), &init, cfg.k, stream, Some(&schedule)).unwrap();
            run.values.into_iter().fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min);
    assert_eq!(rec.best_value, best);
}

#[test]
fn config_errors_stop_before_compute() {
    let potential = Counting {
        inner: rastrigin(4).unwrap(),
        gradients: AtomicU64::new(0),
        values: AtomicU64::new(0),
    };
    let mut cfg = ExperimentConfig::rastrigin(4, 3, 5, 37, 0.01, 4.0);
    cfg.epsilons = vec![1.0, 0.5];
    assert!(run_experiment_on(&cfg, &potential).is_err());
    assert_eq!(potential.gradients.load(Ordering::Relaxed), 0);
}

/// Empirical moments of many independent chains on `U = ‖x‖²/2` against the
/// exact law recursion, at `k = 100`.
#[test]
fn law_recursion_matches_monte_carlo() {
    const CHAINS: usize = 100_000;
    const K: usize = 100;
    let params = HrlaParams::from_inverse_temperature(4.0, 0.05).unwrap();
    let potential = QuadraticPotential::isotropic(1.0, 1).unwrap();
    let init = InitialDistribution::Gaussian {
        mean: vec![3.0],
        variance: 10.0,
        momentum_variance: Some(0.1),
    };
    let law0 = BlockLaw::new([3.0, 0.0], [[10.0, 0.0], [0.0, 0.1]]);
    let exact = law_recursion(&params, 1.0, K, &law0).unwrap()[K];

    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut xs = Vec::with_capacity(CHAINS);
    for c in 0..CHAINS {
        let stream = RandomStream::substream(99, 0, c as u32);
        let s = run_chain(&params, &potential, &init, K, stream, None).unwrap().final_state;
        let (x, y) = (s.x[0], s.y[0]);
        sx += x;
        sy += y;
        xs.push((x, y));
    }
    let n = CHAINS as f64;
    let (mx, my) = (sx / n, sy / n);
    for (x, y) in &xs {
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
        sxy += (x - mx) * (y - my);
    }
    let (vx, vy, cxy) = (sxx / n, syy / n, sxy / n);

    let (ex, ey) = (exact.mean[0], exact.mean[1]);
    let (evx, evy, ecxy) = (exact.cov[(0, 0)], exact.cov[(1, 1)], exact.cov[(0, 1)]);
    // Gaussian standard errors of the sample mean, variance and covariance.
    let z = |est: f64, truth: f64, se: f64| (est - truth).abs() / se;
    assert!(z(mx, ex, (evx / n).sqrt()) < 5.0);
    assert!(z(my, ey, (evy / n).sqrt()) < 5.0);
    assert!(z(vx, evx, evx * (2.0 / n).sqrt()) < 5.0);
    assert!(z(vy, evy, evy * (2.0 / n).sqrt()) < 5.0);
    assert!(z(cxy, ecxy, ((evx * evy + ecxy * ecxy) / n).sqrt()) < 5.0);
}
