use std::collections::BTreeSet;
use std::path::Path;

use tla_core::assets;
use tla_core::dsl::parse;
use tla_core::engine::{evaluate, materialize, SortMode};
use tla_core::incremental::{apply_delta, run_incremental, CachedQuery, DeltaBatch, IncrementalError};
use tla_core::ingestion::{generate_mini, load, LoadedDatabase, MiniConfig, SchemaSpec};
use tla_core::oracle::compare;

fn spec() -> SchemaSpec {
    SchemaSpec::parse(assets::TPCH_SCHEMA).unwrap()
}

fn all_attrs() -> BTreeSet<String> {
    spec().attributes().map(|a| a.name.clone()).collect()
}

/// Generates a dataset, keeps the first `base` lines of `table` on disk and
/// returns the remaining lines split into `parts` batches.
fn split(dir: &Path, seed: u64, table: &str, keep: f64, parts: usize) -> Vec<DeltaBatch> {
    generate_mini(&MiniConfig::new(seed, 200, 1200), dir).unwrap();
    let path = dir.join(format!("{table}.tbl"));
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let base = (lines.len() as f64 * keep) as usize;
    std::fs::write(&path, lines[..base].iter().map(|l| format!("{l}\n")).collect::<String>()).unwrap();
    let rest = &lines[base..];
    let per = rest.len().div_ceil(parts).max(1);
    rest.chunks(per)
        .map(|chunk| {
            let mut b = DeltaBatch::new();
            for l in chunk {
                let fields: Vec<&str> = l.trim_end_matches('|').split('|').collect();
                b.push_row(table, &fields);
            }
            b
        })
        .collect()
}

fn one_shot(name: &str, db: &LoadedDatabase) -> tla_core::engine::ResultTable {
    let script = parse(assets::query_script(name).unwrap()).unwrap();
    materialize(evaluate(&script, db).unwrap().result().unwrap(), db, SortMode::Label)
}

#[test]
fn appended_lineitems_match_full_evaluation() {
    for seed in [1, 2] {
        for name in ["q3", "q6", "q11", "q12", "q12_low"] {
            let dir = tempfile::tempdir().unwrap();
            let batches = split(dir.path(), seed, "lineitem", 0.4, 3);
            let mut db = load(&spec(), dir.path(), &all_attrs()).unwrap();
            let script = parse(assets::query_script(name).unwrap()).unwrap();
            let mut cq = CachedQuery::new(script, &db).unwrap();
            for b in &batches {
                run_incremental(&mut cq, &mut db, b).unwrap();
                let got = cq.table(&db, SortMode::Label);
                let c = compare(&got, &one_shot(name, &db), 1e-9);
                assert!(c.passed(), "seed {seed} {name}: {c}");
            }
        }
    }
}

#[test]
fn appended_orders_match_full_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let batches = split(dir.path(), 5, "orders", 0.5, 2);
    // keep only lineitems of orders already on disk
    let orders = std::fs::read_to_string(dir.path().join("orders.tbl")).unwrap();
    let keys: BTreeSet<&str> = orders.lines().map(|l| l.split('|').next().unwrap()).collect();
    let li = std::fs::read_to_string(dir.path().join("lineitem.tbl")).unwrap();
    let kept: String = li.lines().filter(|l| keys.contains(l.split('|').next().unwrap())).map(|l| format!("{l}\n")).collect();
    std::fs::write(dir.path().join("lineitem.tbl"), kept).unwrap();
    let mut db = load(&spec(), dir.path(), &all_attrs()).unwrap();
    let scripts = [
        assets::query_script("q3").unwrap(),
        "Q = sum(krao(o_orderpriority, filter(o_orderdate < '1995-01-01')))",
        "x = dot(filter(c_mktsegment = 'MACHINERY'), o_custkey)\nv = lift(o_totalprice)\nQ = sum(krao(o_orderpriority, krao(x, v)))",
        "Q = sum(krao(o_orderstatus, o_orderkey))",
    ];
    for src in scripts {
        let script = parse(src).unwrap();
        let mut cq = CachedQuery::new(script.clone(), &db.clone()).unwrap();
        let mut db = db.clone();
        for b in &batches {
            run_incremental(&mut cq, &mut db, b).unwrap();
            let full = evaluate(&script, &db).unwrap().into_result().unwrap();
            let c = compare(&cq.table(&db, SortMode::Label), &materialize(&full, &db, SortMode::Label), 1e-9);
            assert!(c.passed(), "{src}: {c}");
        }
        assert!(!cq.result().entries().is_empty() || src.contains("krao(l_orderkey"), "{src}: empty result");
    }
    apply_delta(&mut db, &batches[0]).unwrap();
}

#[test]
fn non_linear_scripts_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let batches = split(dir.path(), 9, "lineitem", 0.5, 1);
    let mut db = load(&spec(), dir.path(), &all_attrs()).unwrap();
    for name in ["q4", "q14"] {
        let script = parse(assets::query_script(name).unwrap()).unwrap();
        let mut cq = CachedQuery::new(script, &db).unwrap();
        let before = db.row_count("lineitem");
        let err = run_incremental(&mut cq, &mut db, &batches[0]).unwrap_err();
        assert!(matches!(err, IncrementalError::NotDeltaSafe { .. }), "{name}: {err}");
        assert_eq!(db.row_count("lineitem"), before, "{name}: rejected batch must not be applied");
    }
}

#[test]
fn empty_delta_is_a_bitwise_no_op() {
    let dir = tempfile::tempdir().unwrap();
    split(dir.path(), 4, "lineitem", 1.0, 1);
    let mut db = load(&spec(), dir.path(), &all_attrs()).unwrap();
    let script = parse(assets::query_script("q3").unwrap()).unwrap();
    let mut cq = CachedQuery::new(script, &db).unwrap();
    let before = cq.result().entries();
    let gen = db.generation();
    let after = run_incremental(&mut cq, &mut db, &DeltaBatch::new()).unwrap();
    let bits = |v: Vec<(u64, u64, f64)>| v.into_iter().map(|(r, c, x)| (r, c, x.to_bits())).collect::<Vec<_>>();
    assert_eq!(bits(before), bits(after.entries()));
    assert_eq!(db.generation(), gen);
}

#[test]
fn stale_cache_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let batches = split(dir.path(), 4, "lineitem", 0.5, 2);
    let mut db = load(&spec(), dir.path(), &all_attrs()).unwrap();
    let script = parse(assets::query_script("q6").unwrap()).unwrap();
    let mut cq = CachedQuery::new(script, &db).unwrap();
    apply_delta(&mut db, &batches[0]).unwrap();
    let err = run_incremental(&mut cq, &mut db, &batches[1]).unwrap_err();
    assert!(matches!(err, IncrementalError::StaleCache(_)), "{err}");
}

#[test]
fn cache_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    split(dir.path(), 6, "lineitem", 1.0, 1);
    let db = load(&spec(), dir.path(), &all_attrs()).unwrap();
    let script = parse(assets::query_script("q3").unwrap()).unwrap();
    let cq = CachedQuery::new(script.clone(), &db).unwrap();
    let mut buf = Vec::new();
    cq.write(&mut buf).unwrap();
    let back = CachedQuery::read(&buf[..], script, &db).unwrap();
    assert_eq!(back.result(), cq.result());
}
