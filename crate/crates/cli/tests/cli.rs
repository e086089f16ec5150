use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn crd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crd"))
        .args(args)
        .env_remove("CRD_JOBS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = crd(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn edges_of(path: &Path) -> Vec<(usize, usize)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let mut it = l.split_whitespace().map(|x| x.parse().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect()
}

/// Two 5-cliques joined by the edge (4, 5), written as an edge list.
fn two_cliques(dir: &TempDir) -> String {
    let mut text = String::new();
    for base in [0, 5] {
        for u in 0..5 {
            for v in u + 1..5 {
                text += &format!("{} {}\n", base + u, base + v);
            }
        }
    }
    text += "4 5\n";
    let path = dir.path().join("cliques.txt");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn gen_grid_is_deterministic_with_the_declared_edge_count() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for p in [&a, &b] {
        ok(&["gen-grid", "--w", "60", "--h", "60", "--noise", "0.1", "--rng", "7", "--out", p.to_str().unwrap()]);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let edges = edges_of(&a);
    // 2wh - w - h lattice edges plus floor(0.1 * 3600) noise edges.
    assert_eq!(edges.len(), 2 * 3600 - 120 + 360);
    let distinct: HashSet<(usize, usize)> = edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    assert_eq!(distinct.len(), edges.len());
}

#[test]
fn gen_pathstar_writes_graph_and_cluster() {
    let dir = TempDir::new().unwrap();
    let g = dir.path().join("g.txt");
    let b = dir.path().join("b.txt");
    ok(&[
        "gen-pathstar", "--k", "3", "--l", "2", "--outside-degree", "5",
        "--out", g.to_str().unwrap(), "--cluster-out", b.to_str().unwrap(),
    ]);
    // 3 paths of 2 nodes: 6 path edges, plus the hub edge and 4 pendants.
    assert_eq!(edges_of(&g).len(), 11);
    assert_eq!(fs::read_to_string(&b).unwrap().lines().count(), 7);
}

#[test]
fn crd_reports_a_cut_matching_its_members() {
    let dir = TempDir::new().unwrap();
    let g = dir.path().join("grid.txt");
    ok(&["gen-grid", "--w", "20", "--h", "20", "--noise", "0.05", "--rng", "3", "--out", g.to_str().unwrap()]);
    let text = ok(&[
        "crd", "--graph", g.to_str().unwrap(), "--seed", "5", "--phi", "0.333", "--tau", "0.5", "--t", "12",
    ]);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "seed,conductance,volume,boundary_edges,size,members,termination,touched_volume"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "5");
    let members: HashSet<usize> = row[5].split(' ').map(|x| x.parse().unwrap()).collect();
    assert_eq!(members.len(), row[4].parse::<usize>().unwrap());
    assert!(members.contains(&5));

    let edges = edges_of(&g);
    let mut degree = vec![0u64; 400];
    for &(u, v) in &edges {
        degree[u] += 1;
        degree[v] += 1;
    }
    let boundary = edges.iter().filter(|&&(u, v)| members.contains(&u) != members.contains(&v)).count();
    let vol: u64 = members.iter().map(|&v| degree[v]).sum();
    let total: u64 = degree.iter().sum();
    assert_eq!(row[2].parse::<u64>().unwrap(), vol);
    assert_eq!(row[3].parse::<usize>().unwrap(), boundary);
    let phi = boundary as f64 / vol.min(total - vol) as f64;
    assert!((row[1].parse::<f64>().unwrap() - phi).abs() < 1e-12);
}

#[test]
fn crd_finds_one_clique() {
    let dir = TempDir::new().unwrap();
    let g = two_cliques(&dir);
    let text = ok(&["crd", "--graph", &g, "--seed", "0"]);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[5], "0 1 2 3 4");
    // One cut edge over volume 21.
    assert!((row[1].parse::<f64>().unwrap() - 1.0 / 21.0).abs() < 1e-12);
}

#[test]
fn one_based_ids_round_trip() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("g1.txt");
    let shifted: String = fs::read_to_string(two_cliques(&dir))
        .unwrap()
        .lines()
        .map(|l| {
            let v: Vec<usize> = l.split_whitespace().map(|x| x.parse().unwrap()).collect();
            format!("{} {}\n", v[0] + 1, v[1] + 1)
        })
        .collect();
    fs::write(&path, shifted).unwrap();
    let text = ok(&["crd", "--graph", path.to_str().unwrap(), "--seed", "10", "--one-based"]);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[5], "6 7 8 9 10");
    assert_eq!(crd(&["crd", "--graph", path.to_str().unwrap(), "--seed", "0", "--one-based"]).status.code(), Some(1));
}

#[test]
fn acl_needs_alpha_or_lambda() {
    let dir = TempDir::new().unwrap();
    let g = two_cliques(&dir);
    assert_eq!(crd(&["acl", "--graph", &g, "--seed", "0"]).status.code(), Some(1));
    let text = ok(&["acl", "--graph", &g, "--seed", "0", "--alpha", "0.1"]);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[5], "0 1 2 3 4");
    assert_eq!(row[6], "0.1");
    let text = ok(&["acl", "--graph", &g, "--seed", "0", "--lambda", "0.4"]);
    assert!(text.lines().nth(1).unwrap().contains("0 1 2 3 4"));
}

#[test]
fn eval_scores_sets() {
    let dir = TempDir::new().unwrap();
    let g = two_cliques(&dir);
    let set = dir.path().join("set.txt");
    let truth = dir.path().join("truth.txt");
    fs::write(&set, "0 1 2\n3 # comment\n").unwrap();
    fs::write(&truth, "0\n1\n2\n3\n4\n").unwrap();
    let text = ok(&["eval", "--graph", &g, "--set", set.to_str().unwrap(), "--truth", truth.to_str().unwrap()]);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "size,volume,boundary_edges,conductance,precision,recall,f1");
    // {0,1,2,3}: volume 16, boundary 4 edges to node 4.
    assert_eq!(lines.next().unwrap(), "4,16,4,0.25,1,0.8,0.888888888888889");
    let text = ok(&["eval", "--graph", &g, "--set", truth.to_str().unwrap(), "--gap"]);
    // The 5-clique has normalized-Laplacian gap 5/4.
    let gap: f64 = text.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((gap - 1.25).abs() < 1e-9);
    fs::write(&set, "0 99\n").unwrap();
    assert_eq!(crd(&["eval", "--graph", &g, "--set", set.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn input_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let g = two_cliques(&dir);
    let unknown = crd(&["crd", "--graph", &g, "--seed", "0", "--bogus"]);
    assert_eq!(unknown.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("Usage"));
    assert_eq!(crd(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(crd(&["crd", "--graph", &g, "--seed", "0", "--phi", "3/2"]).status.code(), Some(1));
    assert_eq!(crd(&["crd", "--graph", &g, "--seed", "0", "--phi", "zero"]).status.code(), Some(1));
    assert_eq!(crd(&["crd", "--graph", &g, "--seed", "0", "--tau", "1"]).status.code(), Some(1));
    assert_eq!(crd(&["crd", "--graph", &g, "--seed", "42"]).status.code(), Some(1));
    assert_eq!(crd(&["crd", "--graph", "/nonexistent/g.txt", "--seed", "0"]).status.code(), Some(1));
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "0 1\n1 x\n").unwrap();
    let out = crd(&["crd", "--graph", bad.to_str().unwrap(), "--seed", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn help_lists_defaults() {
    let text = ok(&["crd", "--help"]);
    assert!(text.contains("[default: 1/3]"));
    assert!(text.contains("[default: 1/2]"));
    let text = ok(&["acl", "--help"]);
    assert!(text.contains("[default: 1e-7]"));
    let text = ok(&["experiment-grid", "--help"]);
    for needle in ["[default: 1/3]", "[default: 1/2]", "[default: 1e-7]", "[default: 0:0.5:0.05]", "CRD_JOBS"] {
        assert!(text.contains(needle), "missing {needle}");
    }
    ok(&["--help"]);
    ok(&["--version"]);
}

#[test]
fn experiment_grid_output_does_not_depend_on_jobs() {
    let dir = TempDir::new().unwrap();
    let run = |jobs: &str, tag: &str| {
        let records = dir.path().join(format!("r{tag}.csv"));
        let summary = dir.path().join(format!("s{tag}.csv"));
        let means = dir.path().join(format!("m{tag}.csv"));
        let out = Command::new(env!("CARGO_BIN_EXE_crd"))
            .args([
                "experiment-grid", "--w", "12", "--h", "12", "--noise", "0:0.2:0.1", "--trials", "2", "--starts", "3",
                "--out", records.to_str().unwrap(), "--summary", summary.to_str().unwrap(),
                "--means", means.to_str().unwrap(),
            ])
            .env("CRD_JOBS", jobs)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (fs::read(records).unwrap(), fs::read(summary).unwrap(), fs::read(means).unwrap())
    };
    let one = run("1", "a");
    let four = run("4", "b");
    assert_eq!(one, four);
    let records = String::from_utf8(one.0).unwrap();
    // 3 levels x 2 trials x 3 starts x 2 algorithms, plus the header.
    assert_eq!(records.lines().count(), 37);
    let means = String::from_utf8(one.2).unwrap();
    assert_eq!(means.lines().next().unwrap(), "noise,algorithm,mean_conductance,cells");
    assert_eq!(means.lines().count(), 7);
    let summary = String::from_utf8(one.1).unwrap();
    assert_eq!(summary.lines().next().unwrap(), "group,metric,q1,median,q3");
}

#[test]
fn experiment_grid_rejects_bad_ranges() {
    assert_eq!(crd(&["experiment-grid", "--noise", "0:0.5"]).status.code(), Some(1));
    assert_eq!(crd(&["experiment-grid", "--w", "5", "--h", "5", "--block", "4,4,3,3"]).status.code(), Some(1));
    assert_eq!(crd(&["experiment-grid", "--trials", "0"]).status.code(), Some(1));
}

/// Two 30-node blocks, dense inside, sparse across, with a feature that
/// labels them and a second feature that splits them at random.
fn blocks(dir: &TempDir) -> (String, String) {
    let mut edges = String::new();
    let mut state = 12345u64;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 33) as f64 / (1u64 << 31) as f64
    };
    for u in 0..60 {
        for v in u + 1..60 {
            let same = u / 30 == v / 30;
            if next() < if same { 0.5 } else { 0.01 } {
                edges += &format!("{u} {v}\n");
            }
        }
    }
    let g = dir.path().join("blocks.txt");
    fs::write(&g, edges).unwrap();
    let mut table = String::from("node_id\tdorm\tyear\n");
    for v in 0..60 {
        table += &format!("{v}\t{}\t{}\n", 100 + v / 30, 2000 + v % 2);
    }
    let f = dir.path().join("features.tsv");
    fs::write(&f, table).unwrap();
    (g.to_str().unwrap().into(), f.to_str().unwrap().into())
}

#[test]
fn filter_truth_keeps_the_blocks() {
    let dir = TempDir::new().unwrap();
    let (g, f) = blocks(&dir);
    let text = ok(&["filter-truth", "--graph", &g, "--features", &f, "--min-volume", "100"]);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "feature,value,nodes,volume,conductance,spectral_gap,gap");
    let kept: Vec<(String, String)> = lines
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            (c[0].to_string(), c[1].to_string())
        })
        .collect();
    assert_eq!(
        kept,
        vec![("dorm".to_string(), "100".to_string()), ("dorm".to_string(), "101".to_string())]
    );
}

#[test]
fn experiment_clusters_writes_records_and_summary() {
    let dir = TempDir::new().unwrap();
    let (g, f) = blocks(&dir);
    let summary = dir.path().join("summary.csv");
    let text = ok(&[
        "experiment-clusters", "--graph", &g, "--features", &f, "--min-volume", "100",
        "--summary", summary.to_str().unwrap(),
    ]);
    // 15 starts per block, 3 algorithms, 2 blocks, plus the header.
    assert_eq!(text.lines().count(), 91);
    assert!(text.lines().skip(1).all(|l| l.starts_with("blocks,dorm=10")));
    let summary = fs::read_to_string(summary).unwrap();
    let crd_f1 = summary
        .lines()
        .find(|l| l.starts_with("blocks/dorm=100/CRD,f1,"))
        .expect("CRD f1 row");
    let median: f64 = crd_f1.split(',').nth(3).unwrap().parse().unwrap();
    assert!(median >= 0.9, "{crd_f1}");
    let none = crd(&["experiment-clusters", "--graph", &g, "--features", &f]);
    assert_eq!(none.status.code(), Some(1));
}
