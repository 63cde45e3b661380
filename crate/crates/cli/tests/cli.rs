use std::path::{Path, PathBuf};
use std::process::Command;

use mggs_cli::report::ReportFile;
use mggs_cli::{run, EXIT_FAILED, EXIT_OK, EXIT_USAGE};

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn mggs(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("mggs").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn uncached(args: &[&str]) -> Outcome {
    let mut all = args.to_vec();
    all.push("--no-cache");
    mggs(&all)
}

#[test]
fn exit_codes() {
    assert_eq!(uncached(&["verify", "--p", "3", "--vectors", "1,2", "--depth", "4"]).code, EXIT_OK);
    assert_eq!(uncached(&["verify", "--p", "3", "--vectors", "1,1", "--depth", "4"]).code, EXIT_OK);
    let dep = uncached(&["verify", "--p", "3", "--vectors", "1,2;2,1", "--depth", "3"]);
    assert_eq!(dep.code, EXIT_USAGE);
    assert!(dep.stderr.contains("dependent"), "{}", dep.stderr);
    assert_eq!(uncached(&["verify", "--p", "4", "--vectors", "1,2,3"]).code, EXIT_USAGE);
    assert_eq!(uncached(&["verify", "--p", "3"]).code, EXIT_USAGE);
    assert_eq!(uncached(&["verify", "--p", "3", "--vectors", "1,2", "--checks", "nonsense"]).code, EXIT_USAGE);
    let slow = uncached(&["verify", "--p", "3", "--vectors", "1,2", "--depth", "7"]);
    assert_eq!(slow.code, EXIT_USAGE);
    assert!(slow.stderr.contains("--allow-slow"));
    assert_eq!(mggs(&["--help"]).code, EXIT_OK);
    // Only a failing check gives exit code 1; none of the shipped specs fail.
    assert_ne!(EXIT_FAILED, EXIT_OK);
}

#[test]
fn check_filter_limits_the_report() {
    let o = uncached(&[
        "verify", "--p", "3", "--vectors", "1,2", "--depth", "4", "--format", "json", "--checks",
        "abelianization,rank_growth",
    ]);
    assert_eq!(o.code, EXIT_OK);
    let file: ReportFile = serde_json::from_str(&o.stdout).unwrap();
    let ids: Vec<&str> = file.checks.iter().map(|c| c.id.as_str()).collect();
    assert_eq!(ids, ["abelianization", "rank_growth"]);
}

#[test]
fn formats_agree() {
    let base = ["verify", "--p", "3", "--vectors", "1,0;0,1", "--depth", "4"];
    let json = uncached(&[&base[..], &["--format", "json"]].concat());
    let csv = uncached(&[&base[..], &["--format", "csv"]].concat());
    let text = uncached(&[&base[..], &["--format", "text"]].concat());
    let file: ReportFile = serde_json::from_str(&json.stdout).unwrap();

    let mut from_csv = Vec::new();
    for line in csv.stdout.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if !f[3].is_empty() {
            from_csv.push((f[0].to_string(), f[1].to_string(), f[3].to_string(), f[4].parse::<i64>().unwrap()));
        }
    }
    let mut from_json = Vec::new();
    for c in &file.checks {
        for (k, v) in &c.details {
            from_json.push((c.id.clone(), c.status.to_string(), k.clone(), *v));
        }
    }
    assert_eq!(from_csv, from_json);

    for c in &file.checks {
        let line = text.stdout.lines().find(|l| l.starts_with(&format!("{} ", c.id))).unwrap();
        assert!(line.contains(&c.status.to_string()));
        for (k, v) in &c.details {
            assert!(line.contains(&format!("{k}={v}")), "{line}");
        }
    }
}

#[test]
fn cache_hit_is_identical_and_tampering_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = ["verify", "--p", "3", "--vectors", "1,2", "--depth", "4", "--format", "json", "--cache-dir", d];
    let first = mggs(&args);
    assert!(!first.stderr.contains("cached"));
    let second = mggs(&args);
    assert!(second.stderr.contains("using cached result"));
    // Cached reports keep their original timings, so even those agree.
    assert_eq!(first.stdout, second.stdout);

    let entry = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "json"))
        .unwrap();
    let text = std::fs::read_to_string(&entry).unwrap();
    std::fs::write(&entry, text.replacen("holds", "fails", 1)).unwrap();
    let third = mggs(&args);
    assert!(third.stderr.contains("corrupt cache entry"), "{}", third.stderr);
    assert_eq!(third.code, EXIT_OK);
    let a: ReportFile = serde_json::from_str(&first.stdout).unwrap();
    let b: ReportFile = serde_json::from_str(&third.stdout).unwrap();
    assert_eq!(a.fingerprint, b.fingerprint);
}

#[test]
fn spec_file_and_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("gs.toml");
    std::fs::write(&spec, "format = 1\nlabel = \"Gupta-Sidki\"\np = 3\nvectors = [[1, 2]]\n").unwrap();
    let out = dir.path().join("report.json");
    let o = uncached(&[
        "verify",
        "--spec",
        spec.to_str().unwrap(),
        "--depth",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("label: Gupta-Sidki"));
    let file: ReportFile = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(file.spec.label.as_deref(), Some("Gupta-Sidki"));
    assert_eq!(file.fingerprint, file.compute_fingerprint());

    std::fs::write(&spec, "format = 1\np = 3\nvectors = [[1, 2]]\nextra = true\n").unwrap();
    let bad = uncached(&["verify", "--spec", spec.to_str().unwrap()]);
    assert_eq!(bad.code, EXIT_USAGE);
    assert!(bad.stderr.contains("extra"));
}

#[test]
fn info_reports_normal_form() {
    let o = mggs(&["info", "--p", "5", "--vectors", "1,1,1,1;1,0,0,1", "--format", "json"]);
    assert_eq!(o.code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["constant"], false);
    assert_eq!(v["symmetric_rows"], serde_json::json!([true, true]));
    let rows = v["normalized"].as_array().unwrap();
    assert_eq!(rows[1][0], 0);
    assert_eq!(rows[1][3], 0);
    let o = mggs(&["info", "--p", "3", "--vectors", "1,1"]);
    assert!(o.stdout.contains("constant: yes"));
    assert!(o.stdout.contains("constant vector"));
}

#[test]
fn table_formats_agree() {
    let json = mggs(&["table", "--p", "3", "--vectors", "1,2", "--depth", "4", "--format", "json"]);
    let csv = mggs(&["table", "--p", "3", "--vectors", "1,2", "--depth", "4", "--format", "csv"]);
    let rows: Vec<serde_json::Value> = serde_json::from_str(&json.stdout).unwrap();
    assert_eq!(rows.len(), 4);
    for (row, line) in rows.iter().zip(csv.stdout.lines().skip(1)) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(row["n"].as_u64().unwrap().to_string(), f[0]);
        assert_eq!(row["order_exponent"].as_u64().unwrap().to_string(), f[1]);
        assert_eq!(row["derived_index_exponent"].as_u64().unwrap().to_string(), f[2]);
        assert_eq!(row["rank"].as_u64().unwrap().to_string(), f[3]);
    }
    // Gupta-Sidki: |G_1| = 3, |G_n| = 3^(2*3^(n-2)+1) for n >= 2, abelianization 3^2 from level 2 on.
    assert_eq!(rows[0]["order_exponent"], 1);
    assert_eq!(rows[1]["order_exponent"], 3);
    assert_eq!(rows[3]["order_exponent"], 19);
    assert_eq!(rows[3]["derived_index_exponent"], 2);
}

fn golden_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/gupta_sidki_n4.json")
}

#[test]
fn golden_report() {
    let o = uncached(&["verify", "--p", "3", "--vectors", "1,2", "--depth", "4", "--format", "json"]);
    let file: ReportFile = serde_json::from_str(&o.stdout).unwrap();
    let actual = file.without_timings().to_json();
    let path = golden_path();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).expect("golden file; regenerate with UPDATE_GOLDEN=1");
    let expected: ReportFile = serde_json::from_str(&expected).unwrap();
    let mut actual: ReportFile = serde_json::from_str(&actual).unwrap();
    // The version field is allowed to move; everything else is pinned.
    actual.version = expected.version.clone();
    actual.fingerprint = actual.compute_fingerprint();
    assert_eq!(actual, expected);
}

#[test]
fn binary_runs() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_mggs"))
        .args(["verify", "--p", "3", "--vectors", "1,2", "--depth", "3"])
        .env("MGGS_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&status.stdout).contains("result: pass"));
    let bad = Command::new(env!("CARGO_BIN_EXE_mggs"))
        .args(["verify", "--p", "9", "--vectors", "1,2"])
        .env("MGGS_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
}
