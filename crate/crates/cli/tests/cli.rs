use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ghzsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ghzsim")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|c| c == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

const SWEEP: &str = r#"
scheme = "qutrit_wave"
n = 2
seed = 9

[rates]
kappa_st = 1000.0
kappa_c = 1000.0
kappa_p = 0.1

[[sweep]]
rate = "kappa_u"
lo = 1.0
hi = 100.0
points = 5
"#;

#[test]
fn steady_error_free_wave_meets_bound() {
    let dir = tempfile::tempdir().unwrap();
    let (n, ku, kst) = (2.0, 1.0, 1000.0);
    let cfg = write(
        dir.path(),
        "c.toml",
        &format!("scheme = \"qutrit_wave\"\nn = 2\n[rates]\nkappa_st = {kst:?}\nkappa_c = {kst:?}\nkappa_u = {ku:?}\nkappa_p = 0.0\n"),
    );
    let out = ghzsim(&["steady", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wall time"));
    let csv = fs::read_to_string(dir.path().join("steady.csv")).unwrap();
    let fidelity: f64 = column(&csv, "fidelity")[0].parse().unwrap();
    assert!(fidelity >= 1.0 - 5.0 * n * ku / kst, "fidelity {fidelity}");
    assert!(dir.path().join("steady.json").exists());
}

#[test]
fn markov_prints_lattice_denominator_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "m.toml", "n = 4\n[markov]\nchains = [\"lattice\"]\n");
    let out = ghzsim(&["markov", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("5+7/8") && stdout.contains("47/8"), "{stdout}");
    let csv = fs::read_to_string(dir.path().join("markov.csv")).unwrap();
    assert_eq!(column(&csv, "exact"), vec!["47/8"]);
}

#[test]
fn sweep_is_deterministic_and_cache_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SWEEP);
    let run = |sub: &str, extra: &[&str]| {
        let out_dir = dir.path().join(sub);
        let mut args = vec!["sweep", "--config", &cfg, "--out", out_dir.to_str().unwrap()];
        args.extend_from_slice(extra);
        let out = ghzsim(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (fs::read(out_dir.join("sweep.csv")).unwrap(), fs::read(out_dir.join("sweep.json")).unwrap())
    };
    let a = run("a", &["--no-cache", "--workers", "1"]);
    let b = run("b", &["--no-cache", "--workers", "3"]);
    assert_eq!(a, b);
    let cold = run("c", &[]);
    assert!(dir.path().join("c/cache").read_dir().unwrap().count() == 5);
    let warm = run("c", &[]);
    assert_eq!(cold, warm);
    let fresh = String::from_utf8(a.0).unwrap();
    let cached = String::from_utf8(warm.0).unwrap();
    for (x, y) in column(&fresh, "error").iter().zip(column(&cached, "error")) {
        let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
        assert!((x - y).abs() <= 1e-12);
    }
}

#[test]
fn config_hash_ignores_key_order() {
    let dir = tempfile::tempdir().unwrap();
    let reordered = "seed = 9\nn = 2\nscheme = \"qutrit_wave\"\n\n[[sweep]]\npoints = 5\nhi = 100.0\nlo = 1.0\nrate = \"kappa_u\"\n\n[rates]\nkappa_p = 0.1\nkappa_c = 1000.0\nkappa_st = 1000.0\n";
    let mut hashes = Vec::new();
    for (name, text) in [("a.toml", SWEEP), ("b.toml", reordered)] {
        let cfg = write(dir.path(), name, text);
        let out_dir = dir.path().join(format!("out_{name}"));
        assert!(ghzsim(&["sweep", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--no-cache"]).status.success());
        let json: serde_json::Value = serde_json::from_slice(&fs::read(out_dir.join("sweep.json")).unwrap()).unwrap();
        hashes.push(json["config_hash"].as_str().unwrap().to_string());
    }
    assert_eq!(hashes[0], hashes[1]);
    assert_eq!(hashes[0].len(), 64);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "u.toml", &SWEEP.replace("kappa_p = 0.1", "kappa_q = 0.1"));
    let out = ghzsim(&["sweep", "--config", &unknown, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("kappa_q") && stderr.contains("line"), "{stderr}");

    let negative = write(dir.path(), "n.toml", &SWEEP.replace("kappa_p = 0.1", "kappa_p = -0.1"));
    assert_eq!(ghzsim(&["sweep", "--config", &negative]).status.code(), Some(2));
    assert_eq!(ghzsim(&["steady"]).status.code(), Some(2));
    let no_axes = write(dir.path(), "x.toml", "scheme = \"qutrit_wave\"\nn = 2\n");
    assert_eq!(ghzsim(&["sweep", "--config", &no_axes, "--out", dir.path().to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn failed_points_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "l.toml", "scheme = \"ltv_only\"\nn = 2\n[rates]\nkappa_c = 1.0\n");
    let out = ghzsim(&["steady", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let csv = fs::read_to_string(dir.path().join("steady.csv")).unwrap();
    assert!(column(&csv, "status")[0].contains("not unique"));
}

#[test]
fn tune_finds_interior_rate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.toml", &SWEEP.replace("points = 5", "points = 9"));
    let out = ghzsim(&["tune", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("tune.csv")).unwrap();
    let best: f64 = column(&csv, "kappa_u")[0].parse().unwrap();
    assert!(best > 1.0 && best < 100.0, "{best}");
    assert_eq!(fs::read_to_string(dir.path().join("tune_surface.csv")).unwrap().lines().count(), 10);
}

#[test]
fn validate_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = ghzsim(&["validate", "--out", dir.path().to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 7, "{stdout}");
    assert!(dir.path().join("validate.csv").exists());
}
