use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rand::Rng;

fn catbart(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_catbart")).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "catbart {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

const SCHEMA: &str = r#"{
  "columns": [
    {"name": "x1", "kind": "continuous"},
    {"name": "grp", "kind": "categorical", "levels": ["a", "b", "c", "d"]},
    {"name": "site", "kind": "network", "levels": ["s0", "s1", "s2", "s3", "s4", "s5"], "network": "path"}
  ],
  "outcome": "y"
}"#;

const EDGES: &str = "# a path\ns0 s1\ns1 s2\ns2 s3\ns3 s4\ns4 s5\n";

/// Writes schema, edge list, training and new data into `dir`.
fn write_inputs(dir: &Path) {
    let mut rng = catbart::rng::stream(1, 0);
    let mut train = String::from("x1,grp,site,y\n");
    for _ in 0..200 {
        let x: f64 = rng.random_range(-5.0..5.0);
        let g = rng.random_range(0..3usize);
        let s = rng.random_range(0..6usize);
        let noise: f64 = rng.random_range(-0.5..0.5);
        let y = x + [0.0, 3.0, 3.0][g] + s as f64 + noise;
        train.push_str(&format!("{x},{},s{s},{y}\n", ["a", "b", "c"][g]));
    }
    fs::write(dir.join("train.csv"), train).unwrap();
    // "d" never appears in training.
    fs::write(dir.join("new.csv"), "x1,grp,site\n0.5,a,s0\n-2,d,s5\n4.9,c,s3\n").unwrap();
    fs::write(dir.join("schema.json"), SCHEMA).unwrap();
    fs::write(dir.join("edges.txt"), EDGES).unwrap();
}

fn fit_args<'a>(out: &'a str, network: &'a str) -> Vec<&'a str> {
    vec![
        "fit", "--data", "", "--schema", "", "--network", network, "--iters", "300", "--burnin", "100",
        "--thin", "2", "--trees", "20", "--strategy", "gs2", "--seed", "9", "--out", out,
    ]
}

#[test]
fn fit_then_predict() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write_inputs(d);
    let p = |f: &str| d.join(f).to_str().unwrap().to_string();
    let (data, schema, network, out) = (p("train.csv"), p("schema.json"), format!("path={}", p("edges.txt")), p("fit"));
    let mut args = fit_args(&out, &network);
    args[2] = &data;
    args[4] = &schema;
    catbart(&args);

    let samples = fs::read_to_string(d.join("fit/samples.csv")).unwrap();
    let mut lines = samples.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&header[..3], ["draw", "sigma", "fit_1"]);
    assert_eq!(header.len(), 2 + 200);
    assert_eq!(lines.count(), 100);
    assert_eq!(fs::read_to_string(d.join("fit/trees.ndjson")).unwrap().lines().count(), 100);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("fit/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["n_draws"], 100);

    let pred = p("pred.csv");
    catbart(&["predict", "--fit-dir", &out, "--data", &p("new.csv"), "--out", &pred]);
    let text = fs::read_to_string(&pred).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(text.lines().next().unwrap(), "row,mean,q025,q975");
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert!(r[2] <= r[1] && r[1] <= r[3]);
    }
    // 0.5 + 0 + 0 and 4.9 + 3 + 3.
    assert!((rows[0][1] - 0.5).abs() < 1.5, "{rows:?}");
    assert!((rows[2][1] - 10.9).abs() < 1.5, "{rows:?}");
}

#[test]
fn graph_check_reports_structure() {
    let tmp = tempfile::tempdir().unwrap();
    write_inputs(tmp.path());
    let edges = tmp.path().join("edges.txt");
    let out = catbart(&["graph", "check", "--edges", edges.to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("vertices: 6"));
    assert!(text.contains("edges: 5"));
    assert!(text.contains("connected: true"));
    assert!(text.contains("spanning trees: 1"));

    fs::write(&edges, "a b\nb c\nc a\nd e\n").unwrap();
    let text = String::from_utf8(catbart(&["graph", "check", "--edges", edges.to_str().unwrap()]).stdout).unwrap();
    assert!(text.contains("connected: false") && text.contains("components: 2"));

    let schema = tmp.path().join("schema.json");
    let out = Command::new(env!("CARGO_BIN_EXE_catbart"))
        .args(["graph", "check", "--edges", edges.to_str().unwrap(), "--schema", schema.to_str().unwrap(), "--column", "site"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn prior_partitions_and_coclustering() {
    let out = catbart(&["prior-partitions", "--levels", "4", "--draws", "50", "--seed", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("draw,n_blocks,blocks"));
    let mut n = 0;
    for line in lines {
        let fields: Vec<&str> = line.splitn(3, ',').collect();
        let blocks: Vec<&str> = fields[2].split('|').collect();
        assert_eq!(blocks.len(), fields[1].parse::<usize>().unwrap());
        let mut levels: Vec<&str> = blocks.iter().flat_map(|b| b.split(';')).collect();
        levels.sort_unstable();
        assert_eq!(levels, ["1", "2", "3", "4"]);
        n += 1;
    }
    assert_eq!(n, 50);

    let tmp = tempfile::tempdir().unwrap();
    write_inputs(tmp.path());
    let edges = tmp.path().join("edges.txt");
    let out = catbart(&["coclust", "--network", edges.to_str().unwrap(), "--strategy", "gs3", "--draws", "200"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("level,s0,s1,s2,s3,s4,s5"));
    let m: Vec<Vec<f64>> = lines.map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(m.len(), 6);
    for i in 0..6 {
        assert_eq!(m[i][i], 1.0);
        for j in 0..6 {
            assert_eq!(m[i][j], m[j][i]);
        }
    }
    // Neighbours share a block at least as often as the two ends of the path.
    assert!(m[0][1] >= m[0][5]);
}

#[test]
fn bench_writes_its_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bench");
    catbart(&[
        "bench", "--dgp", "dgp2", "--n", "120", "--n-test", "60", "--reps", "2", "--methods", "flex_unif,onehot,oracle",
        "--iters", "40", "--burnin", "20", "--trees", "10", "--seed", "4", "--out", out.to_str().unwrap(),
    ]);
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("method,fold,metric,value"));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["baseline"], "onehot");
    assert!(out.join("manifest.json").exists());
}

#[test]
fn bad_input_fails_cleanly() {
    let out = Command::new(env!("CARGO_BIN_EXE_catbart"))
        .args(["prior-partitions", "--strategy", "gs1", "--levels", "3"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
