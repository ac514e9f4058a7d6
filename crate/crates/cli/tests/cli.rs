use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use lwshrink::experiments::format_float;
use lwshrink::*;
use lwshrink_cli::config::parse_config;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lwshrink"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn key_values(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn value(text: &str, key: &str) -> String {
    key_values(text).into_iter().find(|(k, _)| k == key).unwrap().1
}

fn write_rows(path: &Path, rows: &[Vec<f64>]) {
    let text: String = rows
        .iter()
        .map(|r| r.iter().map(|v| format_float(*v)).collect::<Vec<_>>().join(",") + "\n")
        .collect();
    fs::write(path, text).unwrap();
}

#[test]
fn estimate_matches_library_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let model = PopulationModel::gaussian(SymmetricMatrix::identity(5)).unwrap();
    let x = sample_gaussian(&model, 20, 17).unwrap();
    let rows: Vec<Vec<f64>> = x.data().column_iter().map(|c| c.iter().copied().collect()).collect();
    let input = dir.path().join("samples.csv");
    write_rows(&input, &rows);

    for variant in Variant::ALL {
        let out = dir.path().join(format!("est_{variant}.csv"));
        let o = run(&[
            "estimate",
            input.to_str().unwrap(),
            "--variant",
            variant.label(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));

        let reread = ObservationMatrix::from_sample_rows(&rows).unwrap();
        let expected = estimate(&reread, variant).unwrap();
        let got: Vec<f64> = fs::read_to_string(&out)
            .unwrap()
            .lines()
            .flat_map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>())
            .collect();
        let want: Vec<f64> = expected
            .estimate
            .data()
            .row_iter()
            .flat_map(|r| r.iter().copied().collect::<Vec<_>>())
            .collect();
        assert_eq!(got, want);

        let text = stdout(&o);
        let s = expected.scalars;
        assert_eq!(value(&text, "m"), s.m.to_string());
        assert_eq!(value(&text, "d2"), s.d2.to_string());
        assert_eq!(value(&text, "bbar2"), s.bbar2.to_string());
        assert_eq!(value(&text, "b2"), s.b2.to_string());
        assert_eq!(value(&text, "a2"), s.a2.to_string());
        assert_eq!(value(&text, "intensity"), expected.shrinkage_intensity.to_string());
    }
}

#[test]
fn estimate_reports_bad_cell_position() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "1,2,3\n4,5,6\n7,oops,9\n1,1,1\n").unwrap();
    let out = dir.path().join("o.csv");
    let o = run(&["estimate", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row 3, column 2"), "{}", stderr(&o));

    fs::write(&input, "1,2,3\n4,5\n").unwrap();
    let o = run(&["estimate", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row 2"));

    let o = run(&["estimate", "does-not-exist.csv", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn estimate_too_few_samples_is_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("three.csv");
    fs::write(&input, "1,2\n3,5\n0,1\n").unwrap();
    let out = dir.path().join("o.csv");
    let o = run(&[
        "estimate",
        input.to_str().unwrap(),
        "--variant",
        "u",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains('4'), "{}", stderr(&o));
    assert!(!out.exists());

    let o = run(&[
        "estimate",
        input.to_str().unwrap(),
        "--variant",
        "m",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());

    let o = run(&[
        "estimate",
        input.to_str().unwrap(),
        "--variant",
        "q",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn quickstart_is_fast_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("quickstart.cfg");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let start = Instant::now();
    let o = run(&[
        "convergence",
        cfg.to_str().unwrap(),
        "--threads",
        "1",
        "--out",
        a.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(start.elapsed().as_secs() < 60);
    let o = run(&["convergence", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert!(o.status.success());
    let table = fs::read(&a).unwrap();
    assert_eq!(table, fs::read(&b).unwrap());

    let text = String::from_utf8(table.clone()).unwrap();
    assert!(text.starts_with("estimator,p,n,c,distribution,sigma_mode,n_mc,mean_loss,std_err,mean_time_s\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 7);

    let manifest_path = dir.path().join("a.manifest.json");
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["config"]["n_mc"], 50);
    assert_eq!(manifest["config"]["distribution"], "gaussian");
    assert!(manifest["artifact"]
        .as_str()
        .unwrap()
        .contains(env!("CARGO_PKG_VERSION")));
    assert!(manifest["started_at"].is_string() && manifest["finished_at"].is_string());

    let c = dir.path().join("c.csv");
    let o = run(&[
        "convergence",
        manifest_path.to_str().unwrap(),
        "--out",
        c.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(table, fs::read(&c).unwrap());

    let d = dir.path().join("d.csv");
    let o = run(&[
        "convergence",
        cfg.to_str().unwrap(),
        "--seed",
        "2",
        "--out",
        d.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_ne!(table, fs::read(&d).unwrap());
}

#[test]
fn grid_writes_difference_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.cfg");
    fs::write(
        &cfg,
        "[experiment]\nmode = grid\nn_mc = 20\nseed = 5\n[distribution]\nkind = student\nnu = 10\n[sigma]\nmode = wishart\n[grid]\np = 5, 15\nn = 5, 15\n",
    )
    .unwrap();
    let out = dir.path().join("grid.csv");
    let o = run(&["grid", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 1 + 4 * 7);
    let diff = fs::read_to_string(dir.path().join("grid_diff.csv")).unwrap();
    assert!(diff.starts_with("p,n,c,estimator_a,estimator_b,"));
    assert_eq!(diff.lines().count(), 1 + 4 * 21);

    let o = run(&["convergence", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

fn run_config(text: &str) -> Output {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    fs::write(&cfg, text).unwrap();
    let out = dir.path().join("o.csv");
    run(&["convergence", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

const BASE: &str = "[experiment]\nmode = convergence\nn_mc = 10\nseed = 1\n[distribution]\nkind = gaussian\n[sigma]\nmode = identity\n[convergence]\nc = 1\nn = 10\n";

#[test]
fn config_errors_exit_2() {
    let o = run_config(&BASE.replace("seed = 1", "seed = 1\nflavour = mint"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("flavour"));

    let o = run_config(&BASE.replace("seed = 1\n", ""));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"));

    let mixed = BASE
        .replace(
            "kind = gaussian",
            "kind = mixed_student\nnu_first = 15\nnu_second = 8.5",
        )
        .replace("seed = 1", "seed = 1\nestimators = LW_u, LW_ex");
    let o = run_config(&mixed);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("LW_ex"), "{}", stderr(&o));
}

#[test]
fn config_domain_errors_exit_3() {
    let heavy = BASE
        .replace("kind = gaussian", "kind = student\nnu = 3.5")
        .replace("seed = 1", "seed = 1\nestimators = LW_u, LW_ex");
    assert_eq!(run_config(&heavy).status.code(), Some(3));
    let small = BASE.replace("n = 10", "n = 3");
    assert_eq!(run_config(&small).status.code(), Some(3));
}

#[test]
fn oracle_gaussian_identity() {
    let o = run(&["oracle", "--gaussian", "--identity", "-p", "5", "-n", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(value(&text, "beta2"), "0.3157894736842105");
    assert_eq!(value(&text, "alpha2"), "0");
    assert_eq!(value(&text, "mu"), "1");
    assert_eq!(value(&text, "theta2"), "0.4");

    let lib = gaussian_beta2(&SymmetricMatrix::identity(5), 20).unwrap();
    assert_eq!(value(&text, "delta2"), lib.delta2.to_string());
}

#[test]
fn oracle_student_limit_and_errors() {
    let g = stdout(&run(&["oracle", "--gaussian", "--identity", "-p", "7", "-n", "30"]));
    let o = run(&["oracle", "--student", "1e8", "--identity", "-p", "7", "-n", "30"]);
    assert!(o.status.success());
    let t = stdout(&o);
    for key in ["mu", "alpha2", "beta2", "delta2"] {
        let (a, b): (f64, f64) = (value(&g, key).parse().unwrap(), value(&t, key).parse().unwrap());
        assert!((a - b).abs() <= 1e-6 * a.abs().max(1e-300), "{key}: {a} vs {b}");
    }
    assert!(!t.contains("theta2"));

    let o = run(&["oracle", "--student", "4", "--identity", "-p", "3", "-n", "10"]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["oracle", "--gaussian", "-n", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_sigma_file() {
    let dir = tempfile::tempdir().unwrap();
    let sigma = dir.path().join("sigma.csv");
    fs::write(&sigma, "2,0.5\n0.5,1\n").unwrap();
    let o = run(&["oracle", "--gaussian", "--sigma", sigma.to_str().unwrap(), "-n", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lib = gaussian_beta2(
        &SymmetricMatrix::new(nalgebra::DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0])).unwrap(),
        10,
    )
    .unwrap();
    assert_eq!(value(&stdout(&o), "beta2"), lib.beta2.to_string());

    fs::write(&sigma, "1,2\n0,1\n").unwrap();
    let o = run(&["oracle", "--gaussian", "--sigma", sigma.to_str().unwrap(), "-n", "10"]);
    assert_eq!(o.status.code(), Some(2));

    fs::write(&sigma, "1,2\n2,1\n").unwrap();
    let o = run(&["oracle", "--gaussian", "--sigma", sigma.to_str().unwrap(), "-n", "10"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bundled_configs_parse() {
    let mut count = 0;
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let config = parse_config(&fs::read_to_string(&path).unwrap()).unwrap();
        config.experiment.validate().unwrap();
        count += 1;
    }
    assert!(count >= 5);
}
