use std::path::Path;
use std::process::{Command, Output};

use fluorocnn::output::{RunManifest, RunSummary};
use tempfile::TempDir;

const SMALL_NET: &[&str] = &[
    "--filters1",
    "2",
    "--ksize1",
    "9",
    "--pool",
    "2",
    "--filters2",
    "2",
    "--ksize2",
    "5",
    "--dense1",
    "4",
    "--dense2",
    "3",
    "--batch",
    "4",
];

fn fluorocnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fluorocnn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = fluorocnn(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &Path) {
    ok(&[
        "generate",
        "--out",
        s(dir),
        "--pixels",
        "96",
        "--repetitions",
        "3",
        "--seed",
        "11",
    ]);
}

fn loocv(data: &Path, out: &Path, epochs: &str, extra: &[&str]) -> Output {
    let mut args = vec![
        "loocv",
        "--dataset",
        s(data),
        "--parameter",
        "acidity",
        "--epochs",
        epochs,
        "--out",
        s(out),
    ];
    args.extend_from_slice(SMALL_NET);
    args.extend_from_slice(extra);
    ok(&args)
}

#[test]
fn generate_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&["generate", "--out", s(&a), "--seed", "3"]);
    ok(&["generate", "--out", s(&b), "--seed", "3"]);
    let spectra = std::fs::read_to_string(a.join("spectra.csv")).unwrap();
    assert_eq!(spectra, std::fs::read_to_string(b.join("spectra.csv")).unwrap());
    assert_eq!(spectra.lines().count(), 1 + 22 * 20);
    let ma = RunManifest::load(&a).unwrap();
    let mb = RunManifest::load(&b).unwrap();
    assert_eq!(ma.outputs, mb.outputs);
    assert_eq!(ma.seed, Some(3));

    let c = tmp.path().join("c");
    ok(&["generate", "--out", s(&c), "--seed", "4"]);
    assert_ne!(spectra, std::fs::read_to_string(c.join("spectra.csv")).unwrap());
}

#[test]
fn missing_labels_is_an_input_error() {
    let tmp = TempDir::new().unwrap();
    let out = fluorocnn(&[
        "generate",
        "--out",
        s(tmp.path()),
        "--labels",
        "/nonexistent/labels.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("labels.csv"));
}

#[test]
fn unknown_parameter_is_rejected() {
    let tmp = TempDir::new().unwrap();
    generate(tmp.path());
    let out = fluorocnn(&[
        "loocv",
        "--dataset",
        s(tmp.path()),
        "--parameter",
        "moisture",
        "--out",
        "x",
    ]);
    assert!(!out.status.success());
}

#[test]
fn loocv_writes_run_and_compares_with_itself() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    generate(&data);
    let run = tmp.path().join("run");
    let stdout = loocv(&data, &run, "0", &["--jobs", "1"]).stdout;
    assert!(String::from_utf8_lossy(&stdout).contains("Acidity"));

    let summary = RunSummary::load(&run).unwrap();
    assert_eq!(summary.n_oils, 22);
    assert_eq!(summary.selected.per_fold.len(), 22);
    assert!(summary.selected.per_fold.iter().all(|f| f.checkpoint_epoch == 0));
    let folds = std::fs::read_to_string(run.join("folds.csv")).unwrap();
    assert_eq!(folds.lines().count(), 23);
    let scatter = std::fs::read_to_string(run.join("scatter.csv")).unwrap();
    assert_eq!(scatter.lines().count(), 1 + 22 * 3);
    let manifest = RunManifest::load(&run).unwrap();
    assert!(manifest.outputs.contains_key("summary.json"));
    assert!(manifest.dataset_fingerprint.is_some());

    let report = tmp.path().join("cmp.json");
    let out = ok(&["compare", s(&run), s(&run), "--out", s(&report)]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("reject H0        false"), "{text}");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(json["report"]["t_value"], 0.0);
}

#[test]
fn loocv_outputs_are_reproducible() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    generate(&data);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    loocv(&data, &a, "3", &["--seed", "5", "--jobs", "1"]);
    loocv(&data, &b, "3", &["--seed", "5", "--jobs", "2"]);
    let ma = RunManifest::load(&a).unwrap();
    let mb = RunManifest::load(&b).unwrap();
    assert_eq!(ma.outputs, mb.outputs);
    assert_eq!(ma.dataset_fingerprint, mb.dataset_fingerprint);
}

#[test]
fn compare_rejects_mismatched_parameters() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    generate(&data);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    loocv(&data, &a, "0", &[]);
    let mut args = vec![
        "loocv",
        "--dataset",
        s(&data),
        "--parameter",
        "k270",
        "--epochs",
        "0",
        "--out",
        s(&b),
    ];
    args.extend_from_slice(SMALL_NET);
    ok(&args);
    assert_eq!(fluorocnn(&["compare", s(&a), s(&b)]).status.code(), Some(2));
}

#[test]
fn report_without_runs_is_empty() {
    let tmp = TempDir::new().unwrap();
    let out = fluorocnn(&["report", s(&tmp.path().join("missing"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn report_combines_runs() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    generate(&data);
    let run = tmp.path().join("run");
    loocv(&data, &run, "0", &[]);
    let out_dir = tmp.path().join("report");
    let out = ok(&["report", s(&run), s(&tmp.path().join("missing")), "--out", s(&out_dir)]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipping"));
    assert!(out_dir.join("report.txt").exists());
    let scatter = std::fs::read_to_string(out_dir.join("scatter.csv")).unwrap();
    assert_eq!(scatter.lines().count(), 1 + 22 * 3);
}

#[test]
fn classify_bundled_labels_agree() {
    let out = ok(&["classify"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().count(), 23);
    assert!(stdout.lines().skip(1).all(|l| l.ends_with(",yes")), "{stdout}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("22/22"));
}

#[test]
fn classify_with_shipped_thresholds() {
    let conf = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/thresholds.conf");
    let out = ok(&["classify", "--thresholds", s(&conf)]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("22/22"));
}

#[test]
fn train_writes_a_loadable_checkpoint() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    generate(&data);
    let out = tmp.path().join("model");
    let mut args = vec![
        "train",
        "--dataset",
        s(&data),
        "--parameter",
        "acidity",
        "--epochs",
        "2",
        "--out",
        s(&out),
    ];
    args.extend_from_slice(SMALL_NET);
    ok(&args);
    let ckpt = fluorocnn::checkpoint::Checkpoint::load(&out.join("checkpoint.bin")).unwrap();
    assert_eq!(ckpt.network.architecture().input_len, 96);
    let preds = std::fs::read_to_string(out.join("predictions.csv")).unwrap();
    assert_eq!(preds.lines().count(), 1 + 22 * 3);
    let hp = fluorocnn::config::load_hyperparams(&out.join("hyperparams.conf")).unwrap();
    assert_eq!((hp.ksize1, hp.epochs), (9, 2));
}
