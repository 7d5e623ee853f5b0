use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tla(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tla")).args(args).env_remove("TLA_DATA_DIR").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn generate(dir: &Path, seed: u64, orders: usize, lines: usize) {
    let o = tla(&[
        "generate",
        "--out",
        p(dir),
        "--seed",
        &seed.to_string(),
        "--orders",
        &orders.to_string(),
        "--lineitems",
        &lines.to_string(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

/// Result CSV as label tuple to value.
fn read_result(path: &Path) -> BTreeMap<String, f64> {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|l| {
            let (labels, v) = l.rsplit_once(',').unwrap_or(("", l));
            (labels.to_string(), v.parse().unwrap())
        })
        .collect()
}

#[test]
fn run_twice_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    generate(&data, 42, 300, 1800);
    for q in ["q3", "q12", "q14"] {
        let (a, b) = (dir.path().join(format!("{q}_a.csv")), dir.path().join(format!("{q}_b.csv")));
        for out in [&a, &b] {
            let o = tla(&["run", "--data", p(&data), "--query", q, "--out", p(out)]);
            assert_eq!(code(&o), 0, "{}", stderr(&o));
        }
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "{q}");
    }
}

#[test]
fn run_reports_rows_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), 42, 300, 1800);
    let o = tla(&["run", "--data", p(dir.path()), "--query", "q6", "--verify"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout).into_owned();
    assert_eq!(out.lines().next(), Some("value"));
    assert_eq!(out.lines().count(), 2);
    assert!(stderr(&o).contains("1 rows in"), "{}", stderr(&o));
    assert!(stderr(&o).contains("match"), "{}", stderr(&o));
}

#[test]
fn data_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), 5, 100, 600);
    let o = Command::new(env!("CARGO_BIN_EXE_tla"))
        .args(["run", "--query", "q6"])
        .env("TLA_DATA_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn sample_revenue_script() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&tla(&["sample", "--out", p(dir.path())])), 0);
    let script = dir.path().join("revenue.la");
    fs::write(&script, tla_core::assets::SAMPLE_REVENUE).unwrap();
    let out = dir.path().join("revenue.csv");
    let o = tla(&[
        "run",
        "--schema",
        p(&dir.path().join("sample.schema")),
        "--data",
        p(dir.path()),
        "--script",
        p(&script),
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let got = read_result(&out);
    let want = [
        ("1992-07-30,2-HIGH", 285793.80),
        ("1994-09-30,3-MEDIUM", 195655.00),
        ("1995-05-30,2-HIGH", 16994.56),
        ("1995-10-06,2-HIGH", 8497.28),
        ("1995-10-28,3-MEDIUM", 64353.32),
    ];
    assert_eq!(got.len(), want.len());
    for (k, v) in want {
        assert!((got[k] - v).abs() < 1e-6, "{k}: {}", got[k]);
    }
}

#[test]
fn missing_data_file_exits_2_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), 1, 100, 600);
    fs::remove_file(dir.path().join("lineitem.tbl")).unwrap();
    let o = tla(&["run", "--data", p(dir.path()), "--query", "q6"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("lineitem.tbl"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&tla(&["run", "--query", "q6"])), 2);
    assert_eq!(code(&tla(&["run", "--data", ".", "--query", "q99"])), 2);
    assert_eq!(code(&tla(&["frobnicate"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.la");
    fs::write(&bad, "x = dot(l_orderkey, o_orderdate)").unwrap();
    generate(dir.path(), 1, 100, 600);
    let o = tla(&["run", "--data", p(dir.path()), "--script", p(&bad)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_all_queries() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), 42, 300, 1800);
    let o = tla(&["verify", "--data", p(dir.path()), "--query", "all"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let out = String::from_utf8_lossy(&o.stdout).into_owned();
    assert_eq!(out.lines().filter(|l| l.contains("match")).count(), tla_core::assets::QUERY_NAMES.len());
}

#[test]
fn verify_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), 42, 300, 1800);
    let wrong = dir.path().join("wrong.la");
    // q6 with the quantity bound moved
    fs::write(
        &wrong,
        tla_core::assets::query_script("q6").unwrap().replace("l_quantity < 24", "l_quantity < 12"),
    )
    .unwrap();
    let o = tla(&["verify", "--data", p(dir.path()), "--query", "q6", "--script", p(&wrong)]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("engine"));
}

#[test]
fn bench_two_sizes_gives_ordered_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (small, large) = (dir.path().join("small"), dir.path().join("large"));
    generate(&small, 1, 200, 1200);
    generate(&large, 1, 800, 4800);
    let out = dir.path().join("bench.csv");
    let data = format!("{},{}", p(&small), p(&large));
    let o = tla(&["bench", "--data", &data, "--query", "q6", "--runs", "10", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("query,dataset,best,second,third,mem_bytes"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    for (r, name) in rows.iter().zip(["small", "large"]) {
        assert_eq!(r[0], "q6");
        assert_eq!(r[1], name);
        let t: Vec<f64> = r[2..5].iter().map(|x| x.parse().unwrap()).collect();
        assert!(t[0] <= t[1] && t[1] <= t[2], "{r:?}");
    }
    assert_eq!(code(&tla(&["bench", "--data", p(&small), "--query", "q6", "--runs", "2"])), 2);
}

/// Moves the last `moved` lines of `table` from `base` into `delta`.
fn split_table(base: &Path, delta: &Path, table: &str, moved: usize) {
    let file = format!("{table}.tbl");
    let text = fs::read_to_string(base.join(&file)).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let cut = lines.len() - moved;
    fs::create_dir_all(delta).unwrap();
    fs::write(base.join(&file), lines[..cut].iter().map(|l| format!("{l}\n")).collect::<String>()).unwrap();
    fs::write(delta.join(&file), lines[cut..].iter().map(|l| format!("{l}\n")).collect::<String>()).unwrap();
}

#[test]
fn incr_with_empty_delta_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let empty = dir.path().join("empty");
    fs::create_dir_all(&empty).unwrap();
    generate(&data, 9, 300, 1800);
    let (run_out, incr_out) = (dir.path().join("run.csv"), dir.path().join("incr.csv"));
    let o = tla(&["run", "--data", p(&data), "--query", "q3", "--out", p(&run_out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let cache = dir.path().join("q3.cache");
    for _ in 0..2 {
        let o = tla(&[
            "incr", "--data", p(&data), "--query", "q3", "--delta", p(&empty), "--cache", p(&cache), "--out",
            p(&incr_out),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert_eq!(fs::read(&run_out).unwrap(), fs::read(&incr_out).unwrap());
    }
}

#[test]
fn incr_matches_full_reload() {
    let dir = tempfile::tempdir().unwrap();
    let (full, base, delta) = (dir.path().join("full"), dir.path().join("base"), dir.path().join("delta"));
    generate(&full, 13, 300, 1800);
    generate(&base, 13, 300, 1800);
    split_table(&base, &delta, "lineitem", 500);
    for q in ["q3", "q6", "q12", "q4"] {
        let cache = dir.path().join(format!("{q}.cache"));
        let (incr_out, full_out) = (dir.path().join(format!("{q}_incr.csv")), dir.path().join(format!("{q}_full.csv")));
        let o = tla(&[
            "incr", "--data", p(&base), "--query", q, "--delta", p(&delta), "--cache", p(&cache), "--out",
            p(&incr_out),
        ]);
        assert_eq!(code(&o), 0, "{q}: {}", stderr(&o));
        if q == "q4" {
            assert!(stderr(&o).contains("recomputing in full"), "{}", stderr(&o));
        }
        let o = tla(&["run", "--data", p(&full), "--query", q, "--out", p(&full_out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let (a, b) = (read_result(&incr_out), read_result(&full_out));
        assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>(), "{q}");
        for (k, v) in &a {
            assert!((v - b[k]).abs() <= 1e-9 * v.abs().max(b[k].abs()), "{q} {k}: {v} vs {}", b[k]);
        }
        // the cache now reflects base plus delta, which the base files lack
        let o = tla(&["incr", "--data", p(&base), "--query", q, "--delta", p(&delta), "--cache", p(&cache)]);
        assert_eq!(code(&o), 2);
        assert!(stderr(&o).contains("stale"), "{}", stderr(&o));
    }
}
