use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thetaforge"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("thetaforge-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(path: &PathBuf) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn generate_verify_explore() {
    let dir = workdir("gve");
    let graph = dir.join("g.txt");
    run(bin()
        .args([
            "generate", "--ell", "2", "--q", "5", "--seed", "3", "--output",
        ])
        .arg(&graph)
        .arg("--report")
        .arg(dir.join("g.json"))
        .arg("--sidecar")
        .arg(dir.join("s.json")));
    let text = std::fs::read_to_string(&graph).unwrap();
    assert!(text.starts_with("# ell=2, q=5, seed=3, sides=25,25"));
    assert_eq!(json(&dir.join("g.json"))["left"], 25);
    assert_eq!(json(&dir.join("s.json"))["q"], 5);

    let cert = dir.join("v.json");
    run(bin()
        .args(["verify-theta", "--ell", "2", "--t", "40", "--input"])
        .arg(&graph)
        .arg("--output")
        .arg(&cert));
    let v = json(&cert);
    assert_eq!(v["verdict"], "free");
    assert_eq!(v["exact"], true);

    let exp = dir.join("e.json");
    run(bin()
        .args([
            "explore", "--ell", "2", "--t", "3", "--root", "0", "--input",
        ])
        .arg(&graph)
        .arg("--output")
        .arg(&exp));
    let e = json(&exp);
    assert_eq!(e["root"], 0);
    assert!(e["stages"].as_array().unwrap().len() == 2);
    assert!(e["constants"]["delta"].is_string());
}

#[test]
fn build_odd_report() {
    let dir = workdir("odd");
    let report = dir.join("r.json");
    run(bin()
        .args([
            "build-odd",
            "--ell",
            "3",
            "--t",
            "7",
            "--n",
            "108",
            "--T",
            "3",
            "--output",
        ])
        .arg(dir.join("g.txt"))
        .arg("--report")
        .arg(&report));
    let r = json(&report);
    assert_eq!(r["m"], 2);
    assert_eq!(
        r["vertices"].as_u64().unwrap(),
        2 * r["base"]["vertices"].as_u64().unwrap()
    );
    assert!(r["density_ratio"].as_f64().unwrap() > 0.0);
}

#[test]
fn build_even_with_explicit_h() {
    let dir = workdir("even");
    let report = dir.join("r.json");
    run(bin()
        .args([
            "build-even",
            "--ell",
            "2",
            "--t",
            "32",
            "--n",
            "50",
            "--T",
            "4",
            "--h",
            "2",
            "--output",
        ])
        .arg(dir.join("g.txt"))
        .arg("--report")
        .arg(&report));
    let r = json(&report);
    assert_eq!(r["h"], 2);
    assert_eq!(r["threshold"], 16);
}

#[test]
fn stats_csv_outputs() {
    let dir = workdir("stats");
    let csv = dir.join("b.csv");
    run(bin()
        .args([
            "stats",
            "--experiment",
            "badpairs",
            "--grid",
            "2:3",
            "--seeds",
            "10",
            "--T",
            "2",
            "--csv",
        ])
        .arg(&csv)
        .arg("--output")
        .arg(dir.join("b.json")));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "ell,q,h,seed,vertices,multigraph_edges,threshold,pairs_examined,bad_pairs"
    );
    assert_eq!(lines.count(), 10);

    let csv = dir.join("m.csv");
    run(bin()
        .args([
            "stats",
            "--experiment",
            "moments",
            "--grid",
            "2:5",
            "--seeds",
            "3",
            "--pairs",
            "20",
            "--csv",
        ])
        .arg(&csv)
        .arg("--output")
        .arg(dir.join("m.json")));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 3);

    let csv = dir.join("d.csv");
    run(bin()
        .args([
            "stats",
            "--experiment",
            "dichotomy",
            "--grid",
            "2:5",
            "--seeds",
            "1",
            "--csv",
        ])
        .arg(&csv)
        .arg("--output")
        .arg(dir.join("d.json")));
    assert!(std::fs::read_to_string(&csv)
        .unwrap()
        .starts_with("ell,q,r,count,pairs"));
}

#[test]
fn bad_input_fails_cleanly() {
    let out = bin()
        .args(["generate", "--ell", "2", "--q", "6"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
    let out = bin()
        .args(["stats", "--experiment", "badpairs", "--grid", "nonsense"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
