use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

const ATOMIC_MARKER: &str = r#"
experiment = "marker"
seed = 1
sizes = [8, 12]
l_values = [2.0, 3.0]

[model]
family = "atomic_limit"
"#;

const HALDANE_TRIVIAL_DICHOTOMY: &str = r#"
experiment = "dichotomy"
seed = 3
sizes = [8, 12]
l_values = [2.0, 3.0]

[model]
family = "haldane"
parameters = { t1 = 1.0, t2 = 0.1, phi = 1.5707963267948966, mass = 3.0 }
"#;

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn chernlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chernlab")).args(args).env_remove("CHERNLAB_THREADS").output().unwrap()
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    chernlab(&args)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn files(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn atomic_limit_marker_table_is_all_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "atomic.toml", ATOMIC_MARKER);
    let out = dir.path().join("bundle");
    let o = run(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = read_csv(&out.join("tables/marker.csv"));
    assert_eq!(header, ["size", "marker", "oracle", "identity_defect", "gap"]);
    assert_eq!(rows.len(), 2);
    for row in &rows {
        assert_eq!(row[1].parse::<f64>().unwrap(), 0.0);
        assert_eq!(row[2], "0");
    }
    let (_, seq) = read_csv(&out.join("tables/tuv_sequences.csv"));
    assert!(seq.iter().all(|r| r[2].parse::<f64>().unwrap() == 0.0));
}

#[test]
fn descending_sizes_exit_2_naming_sizes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.toml", &ATOMIC_MARKER.replace("[8, 12]", "[12, 8]"));
    let o = run(&cfg, &dir.path().join("bundle"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sizes"), "{}", stderr(&o));
    assert!(!dir.path().join("bundle").exists());

    let v = chernlab(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(2));
    assert!(stderr(&v).contains("sizes"));
}

#[test]
fn malformed_configs_exit_2_naming_the_field() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (ATOMIC_MARKER.replace("seed = 1", "seed = 1\nbogus = 2"), "bogus"),
        (ATOMIC_MARKER.replace("[2.0, 3.0]", "[3.0, 2.0]"), "l_values"),
        (ATOMIC_MARKER.replace("[2.0, 3.0]", "[2.0, 30.0]"), "l_values"),
        (ATOMIC_MARKER.replace("\"atomic_limit\"", "\"kagome\""), "kagome"),
        (ATOMIC_MARKER.replace("sizes = [8, 12]", "sizes = []"), "sizes"),
        (HALDANE_TRIVIAL_DICHOTOMY.replace("mass = 3.0", "mass = 3.0, tprime = 1.0"), "tprime"),
    ];
    for (i, (text, needle)) in cases.iter().enumerate() {
        let cfg = write_config(&dir, &format!("c{i}.toml"), text);
        let o = chernlab(&["validate", "--config", cfg.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "case {i}: {}", stderr(&o));
        assert!(stderr(&o).contains(needle), "case {i}: {}", stderr(&o));
    }
}

#[test]
fn validate_accepts_good_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "ok.toml", HALDANE_TRIVIAL_DICHOTOMY);
    let o = chernlab(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn closed_gap_exits_3() {
    // Haldane gap closes at mass = 3 sqrt(3) t2 sin(phi).
    let critical = 3.0 * 3f64.sqrt() * 0.1;
    let text = HALDANE_TRIVIAL_DICHOTOMY.replace("mass = 3.0", &format!("mass = {critical:?}"));
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "gapless.toml", &text);
    let o = run(&cfg, &dir.path().join("bundle"), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn missing_config_file_exits_3() {
    let dir = TempDir::new().unwrap();
    let o = run(&dir.path().join("absent.toml"), &dir.path().join("bundle"), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("absent.toml"));
}

#[test]
fn trivial_haldane_dichotomy_bundle() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "d.toml", HALDANE_TRIVIAL_DICHOTOMY);
    let out = dir.path().join("bundle");
    let o = run(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("reports/dichotomy.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "consistent");

    let (header, rows) = read_csv(&out.join("tables/tuv_sequence.csv"));
    assert_eq!(header, ["L", "t_L"]);
    assert_eq!(rows.len(), 2);

    let schema: BTreeMap<String, Vec<String>> =
        serde_json::from_slice(&fs::read(out.join("tables/schema.json")).unwrap()).unwrap();
    let csvs: Vec<_> = fs::read_dir(out.join("tables"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    assert_eq!(csvs.len(), schema.len());
    for path in csvs {
        let name = path.file_stem().unwrap().to_str().unwrap();
        let (header, _) = read_csv(&path);
        assert_eq!(&header, &schema[name], "{name}");
    }

    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    let listed: Vec<&str> = manifest["tables"]
        .as_array()
        .unwrap()
        .iter()
        .chain(manifest["reports"].as_array().unwrap())
        .map(|v| v.as_str().unwrap())
        .collect();
    let mut on_disk: Vec<String> =
        files(&out).keys().map(|p| p.to_str().unwrap().to_string()).filter(|p| p != "manifest.json").collect();
    on_disk.sort();
    let mut listed: Vec<String> = listed.into_iter().map(String::from).collect();
    listed.sort();
    assert_eq!(listed, on_disk);
}

#[test]
fn identical_config_gives_identical_bundle() {
    let dir = TempDir::new().unwrap();
    let text = HALDANE_TRIVIAL_DICHOTOMY.replace(
        "[model]",
        "[model]\ndisorder = { kind = \"onsite_uniform\", strength = 0.2 }\n",
    );
    let cfg = write_config(&dir, "d.toml", &text);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&cfg, &a, &["--threads", "1"]).status.code(), Some(0));
    assert_eq!(run(&cfg, &b, &["--threads", "3"]).status.code(), Some(0));
    let (fa, fb) = (files(&a), files(&b));
    assert!(fa.len() > 3);
    assert_eq!(fa, fb);

    let manifest: serde_json::Value = serde_json::from_slice(&fa[Path::new("manifest.json")]).unwrap();
    let expected: String = Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(manifest["config_sha256"], expected);
    assert_eq!(manifest["seed"], 3);
}

#[test]
fn run_seed_drives_disorder() {
    let dir = TempDir::new().unwrap();
    let base = HALDANE_TRIVIAL_DICHOTOMY
        .replace("experiment = \"dichotomy\"", "experiment = \"marker\"")
        .replace("[model]", "[model]\ndisorder = { kind = \"onsite_uniform\", strength = 0.5 }\n");
    let other = base.replace("seed = 3", "seed = 4");
    let (c1, c2) = (write_config(&dir, "s3.toml", &base), write_config(&dir, "s4.toml", &other));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&c1, &a, &[]).status.code(), Some(0));
    assert_eq!(run(&c2, &b, &[]).status.code(), Some(0));
    assert_ne!(
        fs::read(a.join("tables/tuv_sequences.csv")).unwrap(),
        fs::read(b.join("tables/tuv_sequences.csv")).unwrap()
    );
}

#[test]
fn gwb_experiment_on_ssh_chain() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "ssh.toml",
        r#"
experiment = "gwb"
sizes = [20, 30]
l_values = []
filling = { mode = "island", index = 0, gap_tol = 0.5 }

[model]
family = "ssh_1d"
parameters = { v = 0.3, w = 1.0 }
"#,
    );
    let out = dir.path().join("bundle");
    let o = run(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = read_csv(&out.join("tables/gwb_N20.csv"));
    assert_eq!(&header[..3], ["gamma1", "gamma2", "a"]);
    assert_eq!(header.len(), 3 + 6);
    // One Wannier function per dimer, bond centers two sites apart.
    assert_eq!(rows.len(), 19);
    let (_, summary) = read_csv(&out.join("tables/gwb_summary.csv"));
    for row in summary {
        assert!(row[5].parse::<f64>().unwrap() < 1e-8);
        assert!(row[6].parse::<f64>().unwrap() < 1e-8);
    }
}

#[test]
fn output_dir_from_config_is_used() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("from_config");
    let text = format!("output_dir = {:?}\n{ATOMIC_MARKER}", target.to_str().unwrap());
    let cfg = write_config(&dir, "c.toml", &text);
    let o = chernlab(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(target.join("manifest.json").exists());
}
