use std::process::Command;

fn colorsim() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_colorsim"));
    c.env("COLORSIM_THREADS", "2");
    c
}

#[test]
fn clique_smoke_run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.json");
    let st = colorsim()
        .args(["--model", "clique", "--gen", "gnp:1000,0.1", "--trials", "3", "--seed", "9", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(report["trials"].as_array().unwrap().len(), 3);
    assert_eq!(report["config"]["masterSeed"], 9);
    assert!(report["config"]["knobs"]["clique"]["c_stop"].is_number());
    let csv = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().skip(1).all(|l| l.contains(",true,")));
}

#[test]
fn missing_edge_list_is_a_config_error() {
    let st = colorsim().args(["--model", "lca", "--edge-list", "missing.txt"]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&st.stderr).contains("missing.txt"));
}

#[test]
fn zero_trials_give_an_empty_report() {
    let out = colorsim().args(["--gen", "gnp:50,0.1", "--trials", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["trials"].as_array().unwrap().is_empty());
}

#[test]
fn bad_flags_and_knobs() {
    for args in [
        vec!["--gen", "gnp:50"],
        vec!["--gen", "gnp:50,0.1", "--knob", "nope=1"],
        vec!["--gen", "gnp:50,0.1", "--knob", "cQ"],
        vec!["--gen", "gnp:50,0.1", "--alpha", "1.5"],
        vec!["--model", "quantum", "--gen", "gnp:50,0.1"],
        vec![],
    ] {
        let st = colorsim().args(&args).output().unwrap();
        assert_eq!(st.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn reports_replay_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for (i, threads) in ["1", "3"].iter().enumerate() {
        let out = dir.path().join(format!("r{i}.json"));
        let st = colorsim()
            .env("COLORSIM_THREADS", threads)
            .args(["--model", "mpc", "--gen", "regular:400,12", "--trials", "4", "--seed", "5", "--knob", "cMem=20", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert_eq!(st.code(), Some(0));
        bytes.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn lca_emits_json_lines() {
    let out = colorsim().args(["--model", "lca", "--gen", "good:300,16", "--sweep"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let lines: Vec<serde_json::Value> = String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 300);
    assert!(lines.iter().all(|l| l["color"].is_u64() && l["queries"]["degree"].is_u64()));

    let one = colorsim().args(["--model", "lca", "--gen", "good:300,16", "--query", "7"]).output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    let first: serde_json::Value = serde_json::from_str(String::from_utf8_lossy(&one.stdout).trim()).unwrap();
    assert_eq!(first["vertex"], 7);
    assert_eq!(first["color"], lines[7]["color"]);
}

#[test]
fn edge_list_and_palette_files() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.txt");
    let pals = dir.path().join("p.txt");
    std::fs::write(&edges, "# 4-cycle\n0 1\n1 2\n2 3\n3 0\n").unwrap();
    std::fs::write(&pals, "0: 10 11 12\n1: 11 12 13\n2: 10 13 14\n3: 12 14 15\n").unwrap();
    for model in ["clique", "mpc", "bidding", "lca"] {
        let out = colorsim()
            .args(["--model", model, "--edge-list"])
            .arg(&edges)
            .arg("--palette-file")
            .arg(&pals)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{model}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
