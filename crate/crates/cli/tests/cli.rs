use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CFG_A: &str = "q=2,n=124,k=1,Lmin=15,Lmax=20,f=3";
const CFG_B: &str = "q=2,n=496,k=1,Lmin=31,Lmax=40,f=3";

fn tornpaper(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tornpaper")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = tornpaper(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn noiseless_trials_succeed_for_every_strategy() {
    for s in ["uniform_random_cuts", "all_lmin", "marker_straddle", "index_straddle", "greedy_short"] {
        let text = ok(&["trial", "--params", CFG_A, "--strategy", s, "--seed", "5", "--trials", "4"]);
        assert_eq!(text.lines().count(), 4);
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert_eq!(v["schema"], 1);
            assert_eq!(v["success"], true);
            assert_eq!(v["equal"], true);
            assert_eq!(v["params"]["K"], 7);
        }
    }
}

#[test]
fn file_round_trip_is_byte_exact() {
    let dir = tempfile::tempdir().unwrap();
    let (msg, z, segs, back) = (dir.path().join("m"), dir.path().join("z"), dir.path().join("s"), dir.path().join("o"));
    // Four bytes at q = 4 take 16 of the 72 message symbols; the rest is padding.
    for (params, data) in [(CFG_A, vec![0xa5u8]), ("q=4,n=400,Lmin=16,Lmax=20,f=3", vec![0, 0x1b, 0xff, 0x80])] {
        fs::write(&msg, &data).unwrap();
        ok(&["encode", "--params", params, "--in", p(&msg), "--out", p(&z)]);
        ok(&["tear", "--in", p(&z), "--out", p(&segs), "--strategy", "marker_straddle", "--seed", "2"]);
        ok(&["decode", "--params", p(&z), "--in", p(&segs), "--out", p(&back)]);
        assert_eq!(fs::read(&back).unwrap(), data);
    }
}

#[test]
fn robust_codecs_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let (msg, z, segs, back) = (dir.path().join("m"), dir.path().join("z"), dir.path().join("s"), dir.path().join("o"));
    fs::write(&msg, b"torn paper").unwrap();
    ok(&["encode", "--params", CFG_B, "--t-sub", "1", "--in", p(&msg), "--out", p(&z)]);
    ok(&["tear", "--in", p(&z), "--out", p(&segs), "--t-sub", "1", "--corruption", "index", "--seed", "9"]);
    ok(&["decode", "--params", p(&z), "--in", p(&segs), "--out", p(&back)]);
    assert_eq!(fs::read(&back).unwrap(), b"torn paper");

    fs::write(&msg, [0x5a]).unwrap();
    ok(&["encode", "--params", CFG_A, "--t-del", "1", "--in", p(&msg), "--out", p(&z)]);
    ok(&["tear", "--in", p(&z), "--out", p(&segs), "--strategy", "all_lmin", "--t-del", "1", "--seed", "4"]);
    ok(&["decode", "--params", p(&z), "--in", p(&segs), "--out", p(&back)]);
    assert_eq!(fs::read(&back).unwrap(), [0x5a]);
}

#[test]
fn missing_segment_without_deletion_params_is_a_decode_failure() {
    let dir = tempfile::tempdir().unwrap();
    let (msg, z, segs) = (dir.path().join("m"), dir.path().join("z"), dir.path().join("s"));
    fs::write(&msg, [0x3c]).unwrap();
    ok(&["encode", "--params", CFG_A, "--in", p(&msg), "--out", p(&z)]);
    ok(&["tear", "--in", p(&z), "--out", p(&segs), "--strategy", "all_lmin"]);
    let strand = fs::read_to_string(&z).unwrap().lines().nth(1).unwrap().to_string();
    let first = &strand[..15];
    let kept: Vec<String> =
        fs::read_to_string(&segs).unwrap().lines().filter(|l| *l != first).map(String::from).collect();
    fs::write(&segs, kept.join("\n")).unwrap();
    let out = tornpaper(&["decode", "--params", p(&z), "--in", p(&segs), "--out", p(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn exit_codes_for_params_and_io() {
    let out = tornpaper(&["bounds", "--params", "q=2,n=124,Lmin=15,Lmax=12,f=3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = tornpaper(&["bounds", "--params", CFG_A, "--t-sub", "1", "--t-del", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = tornpaper(&["decode", "--params", CFG_A, "--in", "/nonexistent/segments", "--out", "/tmp/x"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn sweep_has_one_row_per_grid_point() {
    let text = ok(&[
        "sweep", "--n", "124,186", "--lmin", "15", "--f", "3", "--t", "0,1", "--model", "deletion", "--strategy",
        "all_lmin,uniform_random_cuts", "--trials", "3",
    ]);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["n", "Lmin", "f", "t", "strategy", "trials", "successes", "redundancy", "rate"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2 * 2 * 2);
    assert_eq!(&rows[0][7], "110");
    assert!(rows.iter().filter(|r| &r[0] == "124").all(|r| &r[5] == "3" && &r[6] == "3"));
}

#[test]
fn replay_reproduces_reports() {
    let dir = tempfile::tempdir().unwrap();
    let reports = dir.path().join("r.jsonl");
    ok(&[
        "trial", "--params", CFG_B, "--t-sub", "2", "--corruption", "mixed", "--strategy", "index_straddle",
        "--trials", "5", "--threads", "2", "--out", p(&reports),
    ]);
    let text = ok(&["replay", "--in", p(&reports)]);
    assert_eq!(text.matches("reproduced").count(), 5);
    let tampered = fs::read_to_string(&reports).unwrap().replacen("\"segments\":", "\"segments\":1", 1);
    fs::write(&reports, tampered).unwrap();
    assert_eq!(tornpaper(&["replay", "--in", p(&reports)]).status.code(), Some(3));
}

#[test]
fn bounds_report_is_versioned() {
    let v: serde_json::Value = serde_json::from_str(&ok(&["bounds", "--params", CFG_A])).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["implementation_red"], 110);
    assert_eq!(v["cor1_rate_cap"]["exactness"], "asymptotic_dropped_o1");
    let table = ok(&["bounds", "--params", CFG_A, "--t-sub", "0", "--format", "table"]);
    assert!(table.contains("implementation_red"));
}
