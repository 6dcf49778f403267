use std::fs;
use std::path::Path;
use std::process::Command as Process;
use std::time::Instant;

use haarmul_core::audit::{lemma_sum_ids, POINTWISE_IDS};
use haarmul_core::paraproduct::QLabel;
use haarmul_core::spectral::NormOptions;
use haarmul_core::symbol::SymbolSequence;
use haarmul_core::weight::{corpus, generate, WeightFamily, WeightRecipe};
use haarmul_lab::norms::measure_row;
use haarmul_lab::output::{body, without_timestamp};
use haarmul_lab::weights::load_weight_file;
use haarmul_lab::{run, Command, ExperimentConfig, LabError};

fn config(command: Command, out: &Path, text: &str) -> ExperimentConfig {
    let mut c = ExperimentConfig::defaults(command);
    c.apply_text(text).unwrap();
    c.out = out.to_path_buf();
    c
}

fn data_lines(path: &Path) -> Vec<String> {
    body(&fs::read_to_string(path).unwrap()).lines().skip(1).map(str::to_string).collect()
}

#[test]
fn default_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(Command::Verify, dir.path(), "");
    assert_eq!((c.dim, c.depth, c.cases), (1, 4, 20));
    let o = run(&c).unwrap();
    assert!(o.passed, "{}", o.summary);
    let rows = data_lines(&dir.path().join("verify.csv"));
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.ends_with(",pass")));
    assert!(data_lines(&dir.path().join("verify_failures.csv")).is_empty());
}

#[test]
fn verify_in_two_dimensions_is_fast() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let o = run(&config(Command::Verify, dir.path(), "d = 2\nL = 3\n")).unwrap();
    assert!(o.passed, "{}", o.summary);
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn corrupted_weight_file_leaves_no_report() {
    let dir = tempfile::tempdir().unwrap();
    let wf = dir.path().join("bad.weight");
    fs::write(&wf, "1 2\n1.0\nnot-a-number\n2.0\n3.0\n").unwrap();
    let out = dir.path().join("out");
    let c = config(Command::Verify, &out, &format!("weight_file = {}\n", wf.display()));
    let err = run(&c).unwrap_err();
    assert!(matches!(err, LabError::Load { .. }), "{err}");
    assert!(err.to_string().contains("bad.weight"));
    assert!(!out.exists());

    fs::write(&wf, "1 1\n1.0\n-2.0\n").unwrap();
    assert!(matches!(run(&c).unwrap_err(), LabError::Load { .. }));
}

#[test]
fn verify_around_a_weight_file() {
    let dir = tempfile::tempdir().unwrap();
    let gen = config(Command::Generate, dir.path(), "L = 5\ncorpus_size = 4\na2_max = 50\n");
    run(&gen).unwrap();
    let wf = dir.path().join("weights").join("w003.weight");
    let c = config(Command::Verify, &dir.path().join("v"), &format!("weight_file = {}\ncases = 5\n", wf.display()));
    assert!(run(&c).unwrap().passed);
}

#[test]
fn generated_weights_reload_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(Command::Generate, dir.path(), "d = 2\nL = 4\ncorpus_size = 6\na2_max = 100\nseed = 5\n");
    run(&c).unwrap();
    let members = corpus::<f64>(&c.corpus_spec()).unwrap().members;
    for m in &members {
        let (recipe, w) = load_weight_file(&dir.path().join("weights").join(format!("{}.weight", m.id))).unwrap();
        assert_eq!(recipe.as_ref(), Some(&m.recipe));
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(w.base().cells()), bits(m.weight.base().cells()), "{}", m.id);
        let regenerated = generate::<f64>(recipe.as_ref().unwrap()).unwrap();
        assert_eq!(bits(regenerated.base().cells()), bits(m.weight.base().cells()));
    }
    assert_eq!(data_lines(&dir.path().join("corpus.csv")).len(), 6);
}

#[test]
fn constant_weight_norms_match_sweep_row() {
    let dir = tempfile::tempdir().unwrap();
    let n = config(Command::Norms, &dir.path().join("n"), "L = 6\nsigma = ones\n");
    let o = run(&n).unwrap();
    assert!(o.passed);
    let s = config(Command::Sweep, &dir.path().join("s"), "L = 6\nsigma = ones\ncorpus_size = 3\na2_max = 10\nsvg = false\n");
    run(&s).unwrap();
    let norms_row = data_lines(&dir.path().join("n/norms.csv")).remove(0);
    let sweep_row = data_lines(&dir.path().join("s/sweep.csv")).remove(0);
    // Identical past the weight id.
    let tail = |r: &str| r.split_once(',').unwrap().1.to_string();
    assert_eq!(tail(&norms_row), tail(&sweep_row));
    let fields: Vec<&str> = norms_row.split(',').collect();
    for (i, q) in QLabel::all().iter().enumerate() {
        let v: f64 = fields[5 + i].parse().unwrap();
        if q.name() == "q_00_00" {
            assert!((v - 1.0).abs() < 1e-12);
        } else {
            assert!(v.abs() < 1e-12, "{q}: {v}");
        }
    }
    assert_eq!(fields[15], "true");
    assert_eq!(fields[16], "ok");
}

#[test]
fn zero_symbol_gives_zero_norms() {
    let r = WeightRecipe { family: WeightFamily::Cascade { factor: 5.0, seed: 2 }, dim: 1, depth: 6 };
    let w = generate::<f64>(&r).unwrap();
    let row = measure_row("w", "cascade", 2, &w, &SymbolSequence::zeros(w.grid()), &NormOptions::default()).unwrap();
    assert!(row.norms.iter().all(|v| v.unwrap() == 0.0));
    assert_eq!(row.conjugated, Some(0.0));
    assert_eq!(row.triangle_ok(), Some(true));
}

#[test]
fn sweep_is_reproducible_apart_from_the_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let text = "L = 6\ncorpus_size = 5\na2_max = 30\nseed = 3\n";
    let a = config(Command::Sweep, &dir.path().join("run"), text);
    let b = config(Command::Sweep, &dir.path().join("run2"), text);
    run(&a).unwrap();
    run(&b).unwrap();
    for name in ["sweep.csv", "fit.csv"] {
        let ta = fs::read_to_string(a.out.join(name)).unwrap();
        let tb = fs::read_to_string(b.out.join(name)).unwrap();
        assert_eq!(body(&ta), body(&tb));
        let strip_out = |t: &str| without_timestamp(t).lines().filter(|l| !l.starts_with("# out =")).collect::<Vec<_>>().join("\n");
        assert_eq!(strip_out(&ta), strip_out(&tb));
    }
    assert_eq!(fs::read_to_string(a.out.join("sweep.svg")).unwrap(), fs::read_to_string(b.out.join("sweep.svg")).unwrap());
}

#[test]
fn config_is_embedded_in_headers() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(Command::Norms, dir.path(), "L = 3\nsigma = uniform\nseed = 12\n");
    run(&c).unwrap();
    let text = fs::read_to_string(dir.path().join("norms.csv")).unwrap();
    let embedded: String = text.lines().filter_map(|l| l.strip_prefix("# ")).filter(|l| l.contains(" = ") && !l.starts_with("timestamp")).map(|l| format!("{l}\n")).collect();
    let mut back = ExperimentConfig::defaults(Command::Norms);
    back.apply_text(&embedded).unwrap();
    assert_eq!(back, c);
}

#[test]
fn audit_of_constant_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(Command::Audit, dir.path(), "L = 5\ncorpus_size = 1\n");
    let o = run(&c).unwrap();
    assert!(o.passed, "{}", o.summary);
    for line in data_lines(&dir.path().join("audit_lemma_sums.csv")) {
        let ratio: f64 = line.split(',').nth(7).unwrap().parse().unwrap();
        assert_eq!(ratio, 0.0, "{line}");
    }
    let exact = data_lines(&dir.path().join("audit_exact.csv"));
    assert_eq!(exact.len(), 2 * POINTWISE_IDS.len());
}

#[test]
fn audit_summary_counts_and_cascade_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(Command::Audit, dir.path(), "L = 6\ncorpus_size = 7\na2_max = 40\n");
    let o = run(&c).unwrap();
    assert!(o.passed, "{}", o.summary);
    let per_weight = 2 * (lemma_sum_ids().len() + POINTWISE_IDS.len()) + 4;
    assert_eq!(data_lines(&dir.path().join("audit_summary.csv")).len(), per_weight * 7);
    assert_eq!(data_lines(&dir.path().join("audit_maxima.csv")).len(), per_weight);
    let cascades: Vec<String> = corpus::<f64>(&c.corpus_spec())
        .unwrap()
        .members
        .iter()
        .filter(|m| m.recipe.family.name() == "cascade")
        .map(|m| m.id.clone())
        .collect();
    assert!(!cascades.is_empty());
    for line in data_lines(&dir.path().join("audit_lemma_sums.csv")) {
        let f: Vec<&str> = line.split(',').collect();
        if cascades.iter().any(|id| id == f[1]) {
            let ratio: f64 = f[7].parse().unwrap();
            assert!(ratio.is_finite() && ratio > 0.0, "{line}");
        }
    }
}

#[test]
fn audit_selection_filters_ids() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(Command::Audit, dir.path(), "L = 4\ncorpus_size = 3\ninequalities = cross_coeffs,square_function_upper\n");
    run(&c).unwrap();
    let ids: Vec<String> = data_lines(&dir.path().join("audit_maxima.csv")).iter().map(|l| l.split(',').next().unwrap().to_string()).collect();
    assert_eq!(ids, vec!["cross_coeffs", "cross_coeffs_over_avg", "cross_coeffs_mirror", "cross_coeffs_over_avg_mirror", "square_function_upper"]);
}

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_haarmul"))
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let ok = bin().args(["verify", "--out", out, "--L", "3"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));

    let cfg = dir.path().join("strict.cfg");
    fs::write(&cfg, "verify_tol = 1e-300\n").unwrap();
    let fail = bin().args(["verify", "--out", out, "--config", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(fail.status.code(), Some(1));

    let usage = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
    let missing = bin().args(["sweep", "--config", "/nonexistent/x.cfg"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/x.cfg"));
    let bad_grid = bin().args(["norms", "--d", "9", "--out", out]).output().unwrap();
    assert_eq!(bad_grid.status.code(), Some(2));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("n.cfg");
    fs::write(&cfg, "L = 2\nsigma = ones\nweight.family = step\nweight.high = 4\nweight.cut = 0.5\n").unwrap();
    let out = dir.path().join("o");
    let r = bin().args(["norms", "--config", cfg.to_str().unwrap(), "--L", "4", "--out", out.to_str().unwrap()]).output().unwrap();
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let text = fs::read_to_string(out.join("norms.csv")).unwrap();
    assert!(text.contains("# L = 4\n") && text.contains("# weight.L = 4\n") && text.contains("# weight.family = step\n"));
}
