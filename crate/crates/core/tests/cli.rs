use std::path::PathBuf;
use std::process::{Command, Output};

use linegraph_ising::estimator::{measure_omega_ratio, OmegaConfig};
use linegraph_ising::graph::cycle;
use linegraph_ising::oracle::{exact_gibbs, tv_distance};
use linegraph_ising::signature::ModelParams;

fn lgising(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lgising")).args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lgising-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn exact_triangle() {
    let out = lgising(&["exact", "--graph", "cycle:3", "--beta", "1"]);
    assert!(out.status.success());
    let v = json(&out);
    let want = (2.0 + 6.0 * 2f64.exp()).ln();
    for key in ["log_Z", "log_H0"] {
        assert!((v[key].as_f64().unwrap() - want).abs() < 1e-12, "{key}");
    }
    assert!(v["log_H2"].is_number());
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["log_H0", "log_H2", "log_Z"]);
}

#[test]
fn exact_single_edge() {
    let out = lgising(&["exact", "--graph", "path:2", "--beta", "0", "--nu", "0"]);
    assert!(out.status.success());
    assert!((json(&out)["log_Z"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-15);
}

#[test]
fn exact_cap_exceeded() {
    let out = lgising(&["exact", "--graph", "hex:3", "--beta", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
}

#[test]
fn fields_file_and_edge_list_file() {
    let graph = scratch("path.txt");
    std::fs::write(&graph, "p 3 2\n0 1\n1 2\n").unwrap();
    let fields = scratch("fields.txt");
    std::fs::write(&fields, "# edge nu\n1 1.0986122886681098\n").unwrap();
    let out = lgising(&[
        "exact", "--graph", graph.to_str().unwrap(), "--beta", "0", "--fields", fields.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // edge 0 takes the default nu = 0, edge 1 has e^nu = 3
    assert!((json(&out)["log_Z"].as_f64().unwrap() - 8f64.ln()).abs() < 1e-12);
}

#[test]
fn sample_is_reproducible() {
    let a = scratch("a.txt");
    let b = scratch("b.txt");
    for path in [&a, &b] {
        let out = lgising(&[
            "sample", "--graph", "cycle:5", "--beta", "0.7", "--seed", "42", "--samples", "500", "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let side_a = std::fs::read(a.with_extension("txt.json")).unwrap();
    let side_b = std::fs::read(b.with_extension("txt.json")).unwrap();
    assert_eq!(side_a, side_b);
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 500);
    assert!(text.lines().all(|l| l.len() == 5 && l.chars().all(|c| c == '0' || c == '1')));
}

#[test]
fn sample_needs_seed() {
    let out = lgising(&["sample", "--graph", "cycle:4", "--beta", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sample_matches_gibbs_and_occupancy() {
    let out = lgising(&["sample", "--graph", "cycle:4", "--beta", "0.5", "--seed", "7", "--samples", "100000"]);
    assert!(out.status.success());
    let mut counts = [0.0f64; 16];
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines() {
        let mask: usize = line.chars().enumerate().filter(|(_, c)| *c == '1').map(|(e, _)| 1 << e).sum();
        counts[mask] += 1.0;
    }
    let total: f64 = counts.iter().sum();
    let empirical: Vec<f64> = counts.iter().map(|c| c / total).collect();
    let g = cycle(4).unwrap();
    let params = ModelParams::uniform(0.5, 0.0);
    let tv = tv_distance(&empirical, &exact_gibbs(&g, &params).unwrap()).unwrap();
    assert!(tv <= 0.02, "TV {tv}");

    let sidecar: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    let occupancy = sidecar["omega0_fraction"].as_f64().unwrap();
    let sample_steps = sidecar["omega0_steps"].as_f64().unwrap() + sidecar["omega2_steps"].as_f64().unwrap();
    let r = measure_omega_ratio(&g, &params, &OmegaConfig::new(1_000_000, 3)).unwrap();
    let p0 = 1.0 / (1.0 + r.ratio);
    let se = r.stderr / (1.0 + r.ratio).powi(2);
    // the sampler's own error scales with its shorter run
    let se_total = se * (1.0 + 1_000_000.0 / sample_steps).sqrt();
    assert!((occupancy - p0).abs() <= 3.0 * se_total, "{occupancy} vs {p0} +- {se_total}");
}

#[test]
fn estimate_at_zero_beta_is_base() {
    let out = lgising(&["estimate", "--graph", "cycle:6", "--beta", "0", "--nu", "0.5", "--seed", "1"]);
    assert!(out.status.success());
    let v = json(&out);
    let base = 6.0 * (1.0 + 0.5f64.exp()).ln();
    assert!((v["log_Z"].as_f64().unwrap() - base).abs() < 1e-12);
    assert_eq!(v["levels"].as_array().unwrap().len(), 0);
}

#[test]
fn estimate_is_thread_independent() {
    let run = |threads: &str| {
        lgising(&[
            "estimate", "--graph", "cycle:6", "--beta", "1", "--nu", "0.5", "--seed", "9", "--samples", "400",
            "--threads", threads,
        ])
        .stdout
    };
    let one = run("1");
    assert_eq!(one, run("4"));
    let v: serde_json::Value = serde_json::from_slice(&one).unwrap();
    assert_eq!(v["levels"].as_array().unwrap().len(), 6);
}

#[test]
fn estimate_rejects_negative_beta_without_override() {
    let out = lgising(&["estimate", "--graph", "cycle:4", "--beta", "-0.2", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = lgising(&[
        "estimate", "--graph", "cycle:4", "--beta", "-0.2", "--seed", "1", "--samples", "200", "--allow-negative-beta",
    ]);
    assert!(out.status.success());
}

#[test]
fn windability_streams() {
    let out = lgising(&["windability", "--beta", "1", "--mu", "0", "--d", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 21);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let mut keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        keys.sort();
        assert_eq!(keys, ["a", "b", "feasible", "h", "m", "margin", "x"]);
        assert_eq!(v["feasible"], true);
    }

    assert_eq!(lgising(&["windability", "--signature", "[1,1,1,1]"]).status.code(), Some(0));

    let out = lgising(&["windability", "--signature", "[1,0.57,0.57,1]"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    let bad: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .filter(|v| v["feasible"] == false)
        .collect();
    assert_eq!(bad.len(), 1);
    assert_eq!((bad[0]["a"].as_u64(), bad[0]["b"].as_u64()), (Some(0), Some(3)));
}

#[test]
fn help_exits_zero() {
    let out = lgising(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for cmd in ["exact", "sample", "estimate", "windability"] {
        assert!(text.contains(cmd));
    }
}
