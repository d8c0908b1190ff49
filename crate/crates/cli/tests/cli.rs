use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use polarmem::metrics::i_z_bounds_check_tol;
use polarmem_cli::config::ExperimentConfig;
use polarmem_cli::records::{read_csv, ReportRow};
use polarmem_cli::Summary;

const GE: &str = r#"
[model]
kind = "gilbert-elliott"
flip = 0.1
error_good = 0.02
error_bad = 0.25
"#;

fn polarmem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polarmem"))
        .args(args)
        .env("RAYON_NUM_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(format!("{name}.toml"));
    std::fs::write(&path, format!("name = \"{name}\"\nseed = 3\n{body}")).unwrap();
    path
}

fn small_polarize(dir: &Path) -> PathBuf {
    write_config(
        dir,
        "small",
        &format!("{GE}\n[budget]\nsamples = 400\n\n[experiment]\nkind = \"polarize\"\nladder = [2, 4, 16, 32]\n"),
    )
}

fn run(config: &Path, out: &Path) -> Output {
    polarmem(&["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn summary(dir: &Path) -> Summary {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_polarize(tmp.path());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run(&cfg, &a).status.code(), Some(0));
    assert_eq!(run(&cfg, &b).status.code(), Some(0));
    let s = summary(&a);
    let csvs: Vec<&String> = s.files.iter().filter(|f| f.ends_with(".csv")).collect();
    assert_eq!(csvs.len(), 3);
    for f in csvs {
        let x = std::fs::read(a.join(f)).unwrap();
        let y = std::fs::read(b.join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between reruns");
    }
    assert!(a.join("histogram.svg").exists() && a.join("trend.svg").exists());
}

#[test]
fn every_reported_pair_satisfies_the_information_bounds() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    run(&small_polarize(tmp.path()), &out);
    let rows: Vec<ReportRow> = read_csv(&out.join("report.csv")).unwrap();
    assert_eq!(rows.len(), 2 + 4 + 16 + 32);
    for r in rows {
        let tol = 3.0 * (r.mi_stderr + r.z_stderr) + 1e-12;
        assert!(i_z_bounds_check_tol(r.mi, r.z, tol), "L={} i={}", r.len, r.index);
        assert!(r.index >= 1 && r.index <= r.len);
    }
}

#[test]
fn verify_agrees_with_run_and_detects_tampering() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "t4",
        &format!("{GE}\n[experiment]\nkind = \"theorem4\"\nladder = [2]\n"),
    );
    let out = tmp.path().join("o");
    run(&cfg, &out);
    let recorded = summary(&out).checks;
    let v = polarmem(&["verify", out.to_str().unwrap()]);
    let all_pass = recorded.iter().all(|c| c.pass);
    assert_eq!(v.status.code(), Some(if all_pass { 0 } else { 1 }));
    let stdout = String::from_utf8_lossy(&v.stdout);
    for c in &recorded {
        let line = format!("{} {}:", if c.pass { "PASS" } else { "FAIL" }, c.name);
        assert!(stdout.contains(&line), "missing {line}");
    }

    // Flip a recorded verdict: verification must now fail that check.
    let path = out.join("theorem4.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    let tampered = text.replacen(",holds\n", ",violated\n", 1);
    std::fs::write(&path, tampered).unwrap();
    let v = polarmem(&["verify", out.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(1));
}

#[test]
fn schema_violations_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let unknown = write_config(
        tmp.path(),
        "bad1",
        &format!("{GE}\nextra = 1\n[experiment]\nkind = \"metrics\"\n"),
    );
    let invalid = write_config(
        tmp.path(),
        "bad2",
        &format!("{GE}\n[experiment]\nkind = \"polarize\"\nladder = [3]\n"),
    );
    let unknown_kind = write_config(tmp.path(), "bad3", &format!("{GE}\n[experiment]\nkind = \"fig9\"\n"));
    for cfg in [unknown, invalid, unknown_kind] {
        let out = run(&cfg, &tmp.path().join("never"));
        assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert!(!tmp.path().join("never").exists());
}

#[test]
fn io_failures_exit_with_four() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("absent.toml");
    assert_eq!(run(&missing, &tmp.path().join("o")).status.code(), Some(4));
    assert_eq!(polarmem(&["verify", tmp.path().to_str().unwrap()]).status.code(), Some(4));
}

#[test]
fn non_convergence_exits_with_three_and_still_writes_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    // Near-deterministic memory: the output-process information series does
    // not settle within the enumerable number of terms.
    let cfg = write_config(
        tmp.path(),
        "persistent",
        "[model]\nkind = \"gaussian\"\nsigma11 = 1.0\nsigma12 = 0.9999\n\n\
         [channel]\nmodulation = \"antipodal\"\namplitude = 1.0\nfsc_bins = 16\nquantizer = { kind = \"hard-decision\" }\n\n\
         [experiment]\nkind = \"metrics\"\n",
    );
    let out = tmp.path().join("o");
    assert_eq!(run(&cfg, &out).status.code(), Some(3));
    assert!(summary(&out).flagged.iter().any(|f| f == "i-dagger"));
    assert!(out.join("metrics.csv").exists());
}

#[test]
fn metrics_rows_carry_model_identity() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "m", &format!("{GE}\n[experiment]\nkind = \"metrics\"\n"));
    let out = tmp.path().join("o");
    assert_eq!(run(&cfg, &out).status.code(), Some(0));
    let text = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("quantity,model_id,params_hash,value,stderr,method,nodes"));
    let hash = &summary(&out).params_hash;
    for l in lines {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f[1], "gilbert-elliott");
        assert_eq!(f[2], hash);
        assert_eq!(f[5], "enumeration");
    }
    assert!(summary(&out).all_passed);
}

#[test]
fn shipped_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut kinds = std::collections::BTreeSet::new();
    for entry in std::fs::read_dir(&dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|x| x == "toml") {
            let cfg = ExperimentConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            kinds.insert(cfg.experiment.kind());
        }
    }
    let all = ["ber", "fig3", "fig4", "metrics", "polarize", "rate", "theorem4"];
    assert_eq!(kinds.into_iter().collect::<Vec<_>>(), all);
}

#[test]
fn list_experiments_names_every_kind() {
    let out = polarmem(&["list-experiments"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for k in ["metrics", "polarize", "theorem4", "rate", "ber", "fig3", "fig4"] {
        assert!(text.lines().any(|l| l.starts_with(k)), "{k}");
    }
}
