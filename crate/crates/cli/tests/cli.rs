use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn sdcor() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sdcor"));
    cmd.env_remove("SDCOR_SEED");
    cmd
}

fn ok(out: Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn kv(path: &Path) -> BTreeMap<String, String> {
    sdcor::kv::read_kv(path).unwrap()
}

fn kv_text(text: &str) -> BTreeMap<String, String> {
    sdcor::kv::parse_kv(text).unwrap()
}

/// Three 2-D clusters, 3,000 inliers, 2% outliers.
fn small_dataset(dir: &TempDir) -> PathBuf {
    let path = dir.path().join("small.csv");
    ok(sdcor()
        .args(["gen", "--clusters", "3", "--dims", "2", "--n", "3000", "--outliers", "0.02", "--seed", "3", "-o"])
        .arg(&path)
        .output()
        .unwrap());
    path
}

fn auto_run(data: &Path, extra: &[&str]) -> Output {
    sdcor()
        .arg("run")
        .arg(data)
        .args(["--labeled", "--eta", "0.1", "--seed", "2", "--auto-tune", "--k", "9"])
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn gen_writes_data_and_sidecars() {
    let dir = TempDir::new().unwrap();
    let path = small_dataset(&dir);
    let rows = fs::read_to_string(&path).unwrap().lines().count();
    assert_eq!(rows, 3061);
    let classes = sdcor::synth::read_classes(sdcor::synth::classes_path(&path)).unwrap();
    assert_eq!(classes.len(), rows);
    assert_eq!(classes.iter().filter(|&&c| c == 0).count(), 61);
    let manifest = kv(&sdcor::synth::manifest_path(&path));
    assert_eq!(manifest["seed"], "3");
    assert_eq!(manifest["clusters"], "3");
}

#[test]
fn gen_noise_ramp_writes_eleven_files() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("ramp");
    ok(sdcor().args(["gen", "--noise-ramp", "--seed", "1", "-o"]).arg(&out).output().unwrap());
    let csvs: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension().is_some_and(|x| x == "csv")).then_some(p)
        })
        .collect();
    assert_eq!(csvs.len(), 11);
    let last = fs::read_to_string(out.join("noise_150.csv")).unwrap();
    assert_eq!(last.lines().count(), 50_000);
}

#[test]
fn tune_kdist_writes_report_and_graph() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(&dir);
    let report = dir.path().join("t.kv");
    let graph = dir.path().join("g.csv");
    ok(sdcor()
        .arg("tune")
        .arg(&data)
        .args(["--labeled", "--mode", "kdist", "--k", "17", "--eta", "0.1", "--seed", "5", "--report"])
        .arg(&report)
        .arg("--kdist-csv")
        .arg(&graph)
        .output()
        .unwrap());
    let r = kv(&report);
    let eps: f64 = r["eps_sample"].parse().unwrap();
    let half: f64 = r["eps_original"].parse().unwrap();
    assert_eq!(half, eps / 2.0);
    assert_eq!(r["min_pts"], "18");
    assert_eq!(r["seed"], "5");
    assert!(r.contains_key("fitness"));
    let g = fs::read_to_string(&graph).unwrap();
    let mut lines = g.lines();
    assert_eq!(lines.next(), Some("rank,distance"));
    let values: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 306);
    assert!(values.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn tune_pso_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(&dir);
    let report = |name: &str| {
        let path = dir.path().join(name);
        ok(sdcor()
            .arg("tune")
            .arg(&data)
            .args(["--labeled", "--mode", "pso", "--eta", "0.1", "--seed", "1", "--iters", "10", "--swarm", "8", "--report"])
            .arg(&path)
            .output()
            .unwrap());
        fs::read_to_string(path).unwrap()
    };
    assert_eq!(report("a.kv"), report("b.kv"));
}

#[test]
fn tune_on_missing_file_is_an_input_error() {
    let out = sdcor().args(["tune", "/definitely/not/here.csv"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not/here.csv"));
}

#[test]
fn run_then_score_only_reproduces_scores() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(&dir);
    let model = dir.path().join("m.json");
    let scores = dir.path().join("s.csv");
    let log = dir.path().join("log.csv");
    let report = dir.path().join("r.kv");
    let stdout = ok(auto_run(
        &data,
        &[
            "--model",
            model.to_str().unwrap(),
            "--scores",
            scores.to_str().unwrap(),
            "--log",
            log.to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
        ],
    ));
    assert!(stdout.contains("auroc="));
    let r = kv(&report);
    assert_eq!(r["absorption_violations"], "0");
    assert_eq!(r["creation_violations"], "0");
    let cells: usize = r["high_water_cells"].parse().unwrap();
    let budget: usize = r["cell_budget"].parse().unwrap();
    assert!(cells <= budget);
    assert_eq!(fs::read_to_string(&log).unwrap().lines().count(), 11);

    let again = dir.path().join("s2.csv");
    ok(sdcor()
        .arg("run")
        .arg(&data)
        .args(["--labeled", "--score-only", "--model"])
        .arg(&model)
        .arg("--scores")
        .arg(&again)
        .output()
        .unwrap());
    assert_eq!(fs::read_to_string(&scores).unwrap(), fs::read_to_string(&again).unwrap());
}

fn auroc_of(scores: &Path) -> f64 {
    let st = sdcor::data::read_scores(scores).unwrap();
    sdcor::eval::auroc(&st.scores(), &st.labels().unwrap()).unwrap()
}

#[test]
fn chunk_count_barely_moves_accuracy() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(&dir);
    let one = dir.path().join("one.csv");
    let ten = dir.path().join("ten.csv");
    ok(auto_run(&data, &["--chunks", "1", "--scores", one.to_str().unwrap()]));
    ok(auto_run(&data, &["--chunks", "10", "--scores", ten.to_str().unwrap()]));
    assert!((auroc_of(&one) - auroc_of(&ten)).abs() < 0.01);
}

#[test]
fn run_without_parameters_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(&dir);
    let out = sdcor().arg("run").arg(&data).arg("--labeled").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn undersized_sample_is_infeasible() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("wide.csv");
    ok(sdcor()
        .args(["gen", "--clusters", "2", "--dims", "20", "--n", "2000", "--outliers", "10", "--seed", "1", "-o"])
        .arg(&path)
        .output()
        .unwrap());
    // 20 sampled rows cannot give a non-singular 20-D cluster.
    let out = sdcor()
        .arg("run")
        .arg(&path)
        .args(["--labeled", "--eta", "0.01", "--eps", "1000", "--min-pts", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("raise the sampling rate"));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(&dir);
    let config = dir.path().join("run.conf");
    fs::write(&config, "# small run\neta=0.1\nseed=2\nlabeled=true\nk=9\nchunks=4\n").unwrap();
    let report = dir.path().join("r.kv");
    let base = || {
        let mut c = sdcor();
        c.arg("run").arg(&data).arg("--config").arg(&config).arg("--auto-tune").arg("--report").arg(&report);
        c
    };
    ok(base().output().unwrap());
    let r = kv(&report);
    assert_eq!(r["eta"], "0.1");
    assert_eq!(r["chunks"], "4");
    assert_eq!(r["seed"], "2");

    ok(base().args(["--chunks", "2", "--seed", "9"]).output().unwrap());
    let r = kv(&report);
    assert_eq!(r["chunks"], "2");
    assert_eq!(r["seed"], "9");

    fs::write(&config, "etta=0.1\n").unwrap();
    assert_eq!(base().output().unwrap().status.code(), Some(2));
}

#[test]
fn seed_env_var_sets_the_default_seed() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(&dir);
    let tune = |env: Option<&str>, flag: Option<&str>| {
        let report = dir.path().join("t.kv");
        let mut c = sdcor();
        c.arg("tune").arg(&data).args(["--labeled", "--eta", "0.1", "--report"]).arg(&report);
        if let Some(v) = env {
            c.env("SDCOR_SEED", v);
        }
        if let Some(s) = flag {
            c.args(["--seed", s]);
        }
        ok(c.output().unwrap());
        kv(&report)
    };
    assert_eq!(tune(Some("11"), None)["seed"], "11");
    assert_eq!(tune(Some("11"), Some("4"))["seed"], "4");
    assert_eq!(tune(None, None)["seed"], "0");
    assert_eq!(tune(Some("11"), None), tune(None, Some("11")));
}

#[test]
fn eval_reports_all_metrics() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(&dir);
    let scores = dir.path().join("s.csv");
    ok(auto_run(&data, &["--scores", scores.to_str().unwrap()]));
    let roc = dir.path().join("roc.csv");
    let pr = dir.path().join("pr.csv");
    let stdout = ok(sdcor()
        .arg("eval")
        .arg(&scores)
        .arg("--classes")
        .arg(sdcor::synth::classes_path(&data))
        .arg("--roc")
        .arg(&roc)
        .arg("--pr")
        .arg(&pr)
        .output()
        .unwrap());
    let r = kv_text(&stdout);
    for key in ["auroc", "auprc", "purity", "mirkin", "f_measure", "entropy", "vi", "o", "n"] {
        assert!(r.contains_key(key), "missing {key}");
    }
    assert_eq!(r["auroc"], "1");
    assert_eq!(r["o"], "61");
    assert_eq!(r["n"], "3061");
    assert_eq!(fs::read_to_string(&roc).unwrap().lines().next(), Some("fpr,tpr"));
    assert_eq!(fs::read_to_string(&pr).unwrap().lines().next(), Some("recall,precision"));

    let top = ok(sdcor().arg("eval").arg(&scores).args(["--top-o", "10"]).output().unwrap());
    assert_eq!(kv_text(&top)["o"], "10");
}

#[test]
fn eval_of_a_perfect_partition_has_zero_vi() {
    let dir = TempDir::new().unwrap();
    let scores = dir.path().join("s.csv");
    // Rows 0..3 in cluster 1, rows 4..5 are the top-scored outliers.
    fs::write(
        &scores,
        "index,score,cluster,label\n0,0.1,1,0\n1,0.2,1,0\n2,0.3,1,0\n3,0.2,1,0\n4,9,1,1\n5,8,1,1\n",
    )
    .unwrap();
    let r = kv_text(&ok(sdcor().arg("eval").arg(&scores).output().unwrap()));
    assert_eq!(r["vi"], "0");
    assert_eq!(r["purity"], "1");
    assert_eq!(r["auroc"], "1");
}

#[test]
fn eval_without_labels_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let scores = dir.path().join("s.csv");
    fs::write(&scores, "index,score,cluster,label\n0,0.1,1,\n1,3.0,1,\n").unwrap();
    let out = sdcor().arg("eval").arg(&scores).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("label"));
}

#[test]
fn kdist_prints_knee_and_minpts_suggestions() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(&dir);
    let out = dir.path().join("k.csv");
    let stdout = ok(sdcor()
        .arg("kdist")
        .arg(&data)
        .args(["--labeled", "--eta", "0.1", "--k", "4", "-o"])
        .arg(&out)
        .output()
        .unwrap());
    assert!(stdout.contains("knee at rank"));
    assert!(stdout.contains("2p=4"));
    assert!(out.exists());
}
