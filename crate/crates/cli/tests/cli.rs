use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ldpc-noc"))
        .args(args)
        .env_remove("LDPC_NOC_DATA")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ldpc-noc-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const TOY: &str = "6 3\n2 3\n2 2 2 1 1 1\n3 3 3\n1 3\n1 2\n2 3\n1 0\n2 0\n3 0\n1 2 4\n2 3 5\n1 3 6\n";

#[test]
fn inspect_reports_message_count() {
    let o = run(&["inspect"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("|E|         7296"), "{s}");
    assert!(s.contains("N           2304"), "{s}");
}

#[test]
fn toy_alist_loads() {
    let dir = scratch("toy");
    let path = dir.join("toy.alist");
    std::fs::write(&path, TOY).unwrap();
    let o = run(&["inspect", "--code", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("N           6") && s.contains("M           3"), "{s}");
}

#[test]
fn data_dir_resolves_names() {
    let dir = scratch("data");
    std::fs::write(dir.join("toy.alist"), TOY).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ldpc-noc"))
        .args(["inspect", "--code", "toy"])
        .env("LDPC_NOC_DATA", &dir)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("M           3"));
}

#[test]
fn missing_code_is_an_error() {
    let o = run(&["inspect", "--code", "/definitely/not/here.alist"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no code"));
}

#[test]
fn throughput_matches_hand_calculation() {
    let o = run(&["throughput", "--k-i", "281", "--n-bits", "2304", "--itmax", "30", "--f-clk", "300e6"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("82.0 Mb/s"), "{}", stdout(&o));
}

#[test]
fn switch_passes_at_the_bound_and_fails_below() {
    let o = run(&["switch", "--k1", "491", "--k2", "466", "--torus-n", "5"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let s = stdout(&o);
    assert!(s.contains("buffer bound 766") && s.contains("PASS"), "{s}");

    let o = run(&["switch", "--k1", "491", "--k2", "466", "--torus-n", "5", "--buffer", "765"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL at cycle"));

    let o = run(&["switch", "--k1", "491", "--k2", "466", "--torus-n", "5", "--gap", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("B 767"));
}

#[test]
fn switch_reads_generated_images() {
    let dir = scratch("switch");
    let a = dir.join("a");
    let b = dir.join("b");
    for (code, out) in [("wimax_576_r12", &a), ("wimax_576_r56", &b)] {
        let o = run(&["genconfig", "--code", code, "--torus-n", "2", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let o = run(&[
        "switch",
        "--from",
        a.join("config.json").to_str().unwrap(),
        "--to",
        b.join("config.json").to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("bus width 2"));
}

#[test]
fn pipeline_on_small_torus_passes() {
    for n in ["1", "2"] {
        let o = run(&["pipeline", "--code", "wimax_576_r12", "--torus-n", n]);
        assert!(o.status.success(), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("PASS"));
    }
}

#[test]
fn non_square_pe_count_is_rejected() {
    let o = run(&["pipeline", "--pes", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("square"));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let mut results = Vec::new();
    for t in ["1", "3"] {
        let dir = scratch(&format!("threads{t}"));
        let o = run(&[
            "ber",
            "--code",
            "wimax_576_r12",
            "--snr",
            "1.0,2.0",
            "--max-frames",
            "256",
            "--threads",
            t,
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        results.push(std::fs::read_to_string(dir.join("ber.csv")).unwrap());
    }
    assert_eq!(results[0], results[1]);
}

#[test]
fn outputs_carry_a_manifest() {
    let dir = scratch("manifest");
    let o = run(&["partition", "--code", "wimax_576_r12", "--torus-n", "2", "--out", dir.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("partition.json")).unwrap()).unwrap();
    assert_eq!(v["manifest"]["seed"], 1);
    assert_eq!(v["manifest"]["code"], "wimax_576_r12");
    assert!(v["manifest_sha256"].as_str().unwrap().len() == 64);
    assert!(v["result"]["cutset"].as_u64().unwrap() > 0);
}
