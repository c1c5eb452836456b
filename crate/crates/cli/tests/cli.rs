use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_momentlab"))
        .args(args)
        .env("MOMENTLAB_CACHE", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn coeffs_writes_then_reuses() {
    let dir = tempfile::tempdir().unwrap();
    let first = run(dir.path(), &["coeffs", "--nmax", "5000"]);
    assert_eq!(code(&first), 0);
    assert!(stdout(&first).contains(",true"));
    let file = dir.path().join("coeffs_w12_n5000.dat");
    let before = fs::metadata(&file).unwrap().modified().unwrap();
    let again = run(dir.path(), &["coeffs", "--nmax", "5000"]);
    assert_eq!(code(&again), 0);
    assert!(stdout(&again).contains(",false"));
    assert_eq!(fs::metadata(&file).unwrap().modified().unwrap(), before);

    let text = fs::read_to_string(&file).unwrap();
    fs::write(&file, text.replacen("2 -24\n", "2 -23\n", 1)).unwrap();
    let repaired = run(dir.path(), &["coeffs", "--nmax", "5000"]);
    assert_eq!(code(&repaired), 0);
    assert!(stdout(&repaired).contains(",true"));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["coeffs", "--weight", "14", "--nmax", "100"])), 1);
    assert_eq!(code(&run(dir.path(), &["moments", "--k", "2", "--t", "3"])), 1);
    assert_eq!(code(&run(dir.path(), &["moments", "--k", "2"])), 1);
    assert_eq!(code(&run(dir.path(), &["constant", "--k", "5", "--l", "2", "--y", "4"])), 1);
    assert_eq!(code(&run(dir.path(), &["count", "--lemma", "Apm", "--box", "2,2,2,2", "--delta", "0.3"])), 1);
    assert_eq!(code(&run(dir.path(), &["--precision", "32", "gap", "--max-value", "4"])), 1);
    assert_eq!(code(&run(dir.path(), &["--help"])), 0);
}

#[test]
fn moments_from_cache() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["coeffs", "--nmax", "70000"])), 0);
    assert_eq!(code(&run(dir.path(), &["moments", "--k", "9", "--t", "3"])), 1);

    let single = run(dir.path(), &["moments", "--k", "2", "--t", "3"]);
    assert_eq!(code(&single), 0);
    let out = stdout(&single);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "k,T,exact_moment,main_term,error,ratio");
    assert!(lines[1].starts_with("2,3,530,"));
    assert_eq!(lines.len(), 2);

    let sweep = run(dir.path(), &["moments", "--k", "4", "--t", "256..65536", "--dyadic"]);
    assert_eq!(code(&sweep), 0);
    assert_eq!(stdout(&sweep).lines().count(), 10);
    assert_eq!(code(&run(dir.path(), &["moments", "--k", "4", "--t", "256..65536"])), 1);
    assert_eq!(code(&run(dir.path(), &["moments", "--k", "2", "--t", "100000"])), 1);

    let high = run(dir.path(), &["moments", "--k", "6", "--t", "10,100"]);
    assert_eq!(code(&high), 0);
    assert_eq!(stdout(&high).lines().count(), 3);
}

#[test]
fn constant_reports() {
    let dir = tempfile::tempdir().unwrap();
    let one = json(&run(dir.path(), &["--format", "json", "constant", "--k", "4", "--l", "2", "--y", "1"]));
    assert_eq!(one["value"].as_str().unwrap().parse::<f64>().unwrap(), 1.0);
    assert!(one["tail_slope"].is_null());
    for key in ["k", "l", "y", "weight", "precision_bits", "value", "tail_slope", "timestamp"] {
        assert!(one.get(key).is_some(), "{key}");
    }
    let fit = json(&run(dir.path(), &["--format", "json", "constant", "--k", "4", "--l", "2", "--y", "64..2048", "--dyadic"]));
    assert_eq!(fit["values"].as_array().unwrap().len(), 6);
    assert!(fit["tail_slope"].as_f64().unwrap() < 0.0);
}

#[test]
fn count_decompose_gap_oscillatory() {
    let dir = tempfile::tempdir().unwrap();
    let c = run(dir.path(), &["count", "--lemma", "A1", "--box", "2,2,2,2", "--delta", "0.3"]);
    assert_eq!(code(&c), 0);
    let out = stdout(&c);
    assert_eq!(out.lines().next().unwrap(), "N,M,K,L,delta,sign,count,bound,ratio");
    assert_eq!(out.lines().nth(1).unwrap().split(',').nth(6).unwrap(), "8");

    let d = run(dir.path(), &["--format", "json", "decompose", "--x", "10000.5", "--y", "200"]);
    assert_eq!(code(&d), 0);
    let d = json(&d);
    assert!(d["residual"].as_str().unwrap().parse::<f64>().unwrap() <= 1e-20);
    let strict = run(dir.path(), &["decompose", "--x", "10000.5", "--y", "200", "--tolerance", "1e-90"]);
    assert_eq!(code(&strict), 2);

    let g = stdout(&run(dir.path(), &["gap", "--max-value", "4"]));
    assert!(g.lines().nth(1).unwrap().ends_with("4.988805276465954e-2,2,4,3,3,-"));

    let o = json(&run(dir.path(), &["--format", "json", "oscillatory", "--a", "6.283185307179586", "--t", "1"]));
    assert!((o["value"].as_str().unwrap().parse::<f64>().unwrap() - 0.13692262773).abs() < 1e-10);
}

#[test]
fn voronoi_profile() {
    let dir = tempfile::tempdir().unwrap();
    let v = run(dir.path(), &["voronoi", "--x", "2000..4000", "--n", "16..512", "--dyadic", "--grid", "30"]);
    assert_eq!(code(&v), 0);
    let out = stdout(&v);
    assert_eq!(out.lines().next().unwrap(), "N,max_rel_error");
    assert_eq!(out.lines().count(), 7);
    let summary: serde_json::Value = serde_json::from_slice(&v.stderr).unwrap();
    assert!(summary["slope"].as_f64().unwrap() < 0.0);
}

#[test]
fn reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["voronoi", "--x", "1000..1500", "--n", "8,32,128", "--grid", "20", "--seed", "9"];
    assert_eq!(stdout(&run(dir.path(), &args)), stdout(&run(dir.path(), &args)));

    let args = ["--format", "json", "constant", "--k", "3", "--l", "2", "--y", "10,50"];
    let mut a = json(&run(dir.path(), &args));
    let mut b = json(&run(dir.path(), &args));
    a.as_object_mut().unwrap().remove("timestamp");
    b.as_object_mut().unwrap().remove("timestamp");
    assert_eq!(a, b);
}

#[test]
fn output_file_and_digits() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    let p = path.to_str().unwrap();
    let o = run(dir.path(), &["--precision", "192", "-o", p, "constant", "--k", "2", "--l", "1", "--y", "8"]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let text = fs::read_to_string(&path).unwrap();
    let value = text.lines().nth(1).unwrap().split(',').nth(3).unwrap();
    let mantissa = value.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 64);
}
