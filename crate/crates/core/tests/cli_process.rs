use std::process::Command;

fn nharq_sim(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_nharq-sim"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn csv_to_stdout() {
    let out = nharq_sim(&["--snr", "6:8:1", "--frames", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "scheme,snr_db,ber,se,avg_rounds,abandon_rate,frames,seed");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("n-cc,6,"));
}

#[test]
fn json_to_file() {
    let dir = std::env::temp_dir().join(format!("nharq-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("rows.json");
    let out = nharq_sim(&[
        "--scheme", "cc", "--snr", "-2", "--frames", "20", "--format", "json",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let rows: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rows[0]["scheme"], "cc");
    assert_eq!(rows[0]["snr_db"], -2.0);
    assert_eq!(rows[0]["frames"], 20);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn usage_and_range_errors_exit_2() {
    for args in [&["--bogus"][..], &["--alpha2", "0.6"], &["--snr", "9:1:1"], &["--scheme", "ir"], &["--frames", "0"]] {
        let out = nharq_sim(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn unwritable_output_exits_1() {
    let out = nharq_sim(&["--snr", "10", "--frames", "5", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent-dir/x.csv"));
}
