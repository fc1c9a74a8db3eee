use nonpsd_sketch::bench::data::{load_dataset, LoadOptions};
use nonpsd_sketch::bench::output::read_numeric_csv;
use nonpsd_sketch::bench::{run, ExperimentConfig, Subcommand};
use nonpsd_sketch::sampling::leverage_scores_real;
use nonpsd_sketch::vmv::{estimate_vmv, exact_vmv};
use num_complex::Complex64;
use rand::Rng;

fn output<'a>(outs: &'a [(String, String)], name: &str) -> &'a str {
    &outs.iter().find(|(n, _)| n == name).unwrap_or_else(|| panic!("{name} not written")).1
}

fn column(text: &str, name: &str) -> Vec<f64> {
    let (header, rows) = read_numeric_csv(text);
    let j = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[j]).collect()
}

#[test]
fn full_newton_on_tiny_quadratic_converges_in_one_step() {
    let cfg = ExperimentConfig::parse(
        "synth_n = 40\nsynth_d = 3\nsynth_heavy_rows = 0\nloss = \"quadratic\"\nlambda = 0.0\nmethods = [\"newton_cg\"]\nschemes = [\"Full\"]\ngrad_tol = 1e-8\n",
    )
    .unwrap();
    let outs = run(Subcommand::Optimize, &cfg, false).unwrap();
    let trace = output(&outs, "optimize_newton_cg_Full_seed0.csv");
    assert_eq!(trace.lines().count(), 3, "{trace}");
    assert!(column(trace, "grad_norm")[1] <= 1e-8);
    let summary = output(&outs, "optimize_summary.csv");
    assert!(summary.lines().nth(1).unwrap().starts_with("newton_cg,Full,0,converged,"), "{summary}");
}

#[test]
fn heavy_rows_top_the_scores_table() {
    let cfg = ExperimentConfig::parse("synth_n = 600\nsynth_d = 4\nsynth_heavy_rows = 4\nseed = 3\n").unwrap();
    let outs = run(Subcommand::Scores, &cfg, false).unwrap();
    let text = output(&outs, "scores.csv");
    let exact = column(text, "exact");
    let ratio = column(text, "ratio");
    let mut order: Vec<usize> = (0..exact.len()).collect();
    order.sort_by(|&a, &b| exact[b].total_cmp(&exact[a]));
    let top: f64 = order[..4].iter().map(|&i| exact[i]).sum();
    assert!(top >= 0.9 * exact.iter().sum::<f64>(), "top-4 mass {top}");
    let good = ratio.iter().filter(|r| (0.5..=2.0).contains(*r)).count();
    assert!(good as f64 >= 0.95 * ratio.len() as f64);
    for p in ["p_Uniform", "p_LS", "p_RN", "p_LS-MX", "p_RN-MX"] {
        assert!((column(text, p).iter().sum::<f64>() - 1.0).abs() < 1e-9, "{p}");
    }
}

#[test]
fn zero_residual_lpreg_recovers_planted_solution() {
    for p in ["1.0", "inf", "3.0"] {
        let sizes = if p == "inf" { "[2, 3]" } else { "[2, 6]" };
        let cfg = ExperimentConfig::parse(&format!(
            "seeds = 2\nlp_n = 30\nlp_d = 5\nzero_residual = true\np = {p}\nsizes = {sizes}\n"
        ))
        .unwrap();
        let outs = run(Subcommand::Lpreg, &cfg, false).unwrap();
        for e in column(output(&outs, "lpreg.csv"), "err_x") {
            assert!(e <= 1e-6, "p = {p}: {e}");
        }
    }
}

#[test]
fn cancellation_instance_error_vanishes_for_every_k() {
    let cfg = ExperimentConfig::parse("seeds = 5\nks = [1, 4, 32]\ninstance = \"cancellation\"\n").unwrap();
    let outs = run(Subcommand::Vmv, &cfg, false).unwrap();
    for e in column(output(&outs, "vmv.csv"), "abs_err") {
        assert!(e <= 1e-6, "{e}");
    }
}

#[test]
fn doubling_buckets_halves_the_variance() {
    let mut rng = nonpsd_sketch::rng::rng_from_seed(21);
    let mut g = || Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    let (n, d) = (40, 6);
    let a = nonpsd_sketch::linalg::CMat::from_fn(n, d, |_, _| g());
    let b = nonpsd_sketch::linalg::CMat::from_fn(n, d, |_, _| g());
    let u = nonpsd_sketch::linalg::CVec::new((0..d).map(|_| g()).collect());
    let v = nonpsd_sketch::linalg::CVec::new((0..d).map(|_| g()).collect());
    let exact = exact_vmv(&a, &b, &u, &v).unwrap();
    let mse = |k: usize| {
        (0..200u64).map(|s| (estimate_vmv(&a, &b, &u, &v, k, 1, s).unwrap() - exact).norm_sqr()).sum::<f64>() / 200.0
    };
    let ratio = mse(32) / mse(16);
    assert!((0.3..=0.7).contains(&ratio), "variance ratio {ratio}");
}

#[test]
fn covertype_shaped_file_loads_standardized() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cov.csv");
    let mut rng = nonpsd_sketch::rng::rng_from_seed(8);
    let mut text = String::new();
    for _ in 0..5000 {
        for j in 0..54 {
            // 10 continuous columns then 44 binary indicators
            let v = if j < 10 { 3000.0 * rng.random::<f64>() } else { (rng.random::<f64>() < 0.1) as u8 as f64 };
            text.push_str(&format!("{v},"));
        }
        let class = 1 + (rng.random::<f64>() * 7.0) as usize;
        text.push_str(&format!("{}\n", if class > 2 { 2 } else { class }));
    }
    std::fs::write(&path, text).unwrap();
    let ds = load_dataset(&path, &LoadOptions::default()).unwrap();
    assert_eq!(ds.a.shape(), (5000, 54));
    for j in 0..54 {
        let mean = ds.a.column(j).mean();
        assert!(mean.abs() <= 1e-10, "column {j} mean {mean}");
    }
    assert!(ds.labels.iter().all(|&y| y == 0.0 || y == 1.0));
    assert!(leverage_scores_real(&ds.a).is_ok());
}
