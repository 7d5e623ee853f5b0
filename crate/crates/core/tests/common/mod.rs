#![allow(dead_code)]

//! Algebraic laws of the kernel, checked exactly on small integer matrices.
//! Shared by the `laws` suite and the acceptance run.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use tla_core::assets;
use tla_core::dsl::{Binding, CmpOp, Expr, Literal, Predicate, Script};
use tla_core::engine::evaluate;
use tla_core::ingestion::{generate_mini, load, LoadedDatabase, MiniConfig, SchemaSpec};
use tla_core::sparse::{ops, CscMatrix, Dimension, TypedMatrix};

pub const CASES: u32 = 256;

type Law = fn() -> Result<(), String>;

pub const LAWS: [(&str, Law); 14] = [
    ("converse is contravariant", converse_is_contravariant),
    ("converse is an involution", converse_is_an_involution),
    ("M∘(N+P) = M∘N + M∘P", composition_distributes_on_the_right),
    ("(N+P)∘M = N∘M + P∘M", composition_distributes_on_the_left),
    ("(M+N)° = M° + N°", converse_is_linear),
    ("krao is bilinear", krao_is_bilinear),
    ("M ▽ ! = M", krao_with_bang_is_neutral),
    ("row-vector krao = hadamard", krao_of_row_vectors_is_hadamard),
    ("krao index j·q+k", krao_index_is_j_times_q_plus_k),
    ("three-form tabulation", tabulation_three_forms),
    ("pairing-wheel vector rules", pairing_wheel_vector_rules),
    ("pairing-wheel rotation", pairing_wheel_rotation),
    ("filter(p and q) = hadamard", conjunction_is_hadamard),
    ("filter(not p) = complement", negation_is_complement),
];

fn check<S: Strategy>(strategy: S, law: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let config = Config { cases: CASES, failure_persistence: None, ..Config::default() };
    TestRunner::new(config).run(&strategy, law).map_err(|e| e.to_string())
}

fn dim(id: &str, n: usize) -> Dimension {
    Dimension::labels(id, n as u64)
}

fn typed(cells: &[Vec<f64>], rows: Dimension, cols: Dimension) -> TypedMatrix {
    TypedMatrix::sparse(CscMatrix::from_dense(cells), rows, cols).unwrap()
}

/// Dense cells of an `r × c` matrix, about half of them zero.
fn cells(r: usize, c: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    let cell = prop_oneof![Just(0.0), (1u8..=4).prop_map(f64::from)];
    proptest::collection::vec(proptest::collection::vec(cell, c), r)
}

fn matrix(rows: (&'static str, usize), cols: (&'static str, usize)) -> impl Strategy<Value = TypedMatrix> {
    cells(rows.1, cols.1).prop_map(move |m| typed(&m, dim(rows.0, rows.1), dim(cols.0, cols.1)))
}

/// A total function `n → m` as a matrix: one 1 per column.
fn functional(rows: (&'static str, usize), n: usize) -> impl Strategy<Value = TypedMatrix> {
    proptest::collection::vec(0..rows.1, n).prop_map(move |f| {
        let triplets = f.iter().enumerate().map(|(c, &r)| (r as u64, c as u64, 1.0));
        let csc = CscMatrix::from_triplets(rows.1 as u64, n as u64, triplets);
        TypedMatrix::sparse(csc, dim(rows.0, rows.1), dim("A", n)).unwrap()
    })
}

fn row_vector(n: usize) -> impl Strategy<Value = TypedMatrix> {
    cells(1, n).prop_map(move |m| typed(&m, Dimension::unit(), dim("A", n)))
}

fn same(a: &TypedMatrix, b: &TypedMatrix) -> Result<(), TestCaseError> {
    prop_assert!(a.same_as(b), "\n{:?}\n!=\n{:?}", a.to_csc().to_dense(), b.to_csc().to_dense());
    Ok(())
}

fn sizes() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..=8, 1usize..=8, 1usize..=8)
}

fn any_matrix() -> impl Strategy<Value = TypedMatrix> {
    (1usize..=8, 1usize..=8).prop_flat_map(|(a, b)| matrix(("X", a), ("A", b)))
}

pub fn converse_is_contravariant() -> Result<(), String> {
    let s = sizes().prop_flat_map(|(a, b, c)| (matrix(("X", a), ("Y", b)), matrix(("Y", b), ("Z", c))));
    check(s, |(m, n)| {
        let lhs = ops::converse(&ops::compose(&m, &n).unwrap());
        let rhs = ops::compose(&ops::converse(&n), &ops::converse(&m)).unwrap();
        same(&lhs, &rhs)
    })
}

pub fn converse_is_an_involution() -> Result<(), String> {
    check(any_matrix(), |m| same(&ops::converse(&ops::converse(&m)), &m))
}

pub fn composition_distributes_on_the_right() -> Result<(), String> {
    let s = sizes().prop_flat_map(|(a, b, c)| {
        (matrix(("X", a), ("Y", b)), matrix(("Y", b), ("Z", c)), matrix(("Y", b), ("Z", c)))
    });
    check(s, |(m, n, p)| {
        let lhs = ops::compose(&m, &ops::add(&n, &p).unwrap()).unwrap();
        let rhs = ops::add(&ops::compose(&m, &n).unwrap(), &ops::compose(&m, &p).unwrap()).unwrap();
        same(&lhs, &rhs)
    })
}

pub fn composition_distributes_on_the_left() -> Result<(), String> {
    let s = sizes().prop_flat_map(|(a, b, c)| {
        (matrix(("X", a), ("Y", b)), matrix(("X", a), ("Y", b)), matrix(("Y", b), ("Z", c)))
    });
    check(s, |(n, p, m)| {
        let lhs = ops::compose(&ops::add(&n, &p).unwrap(), &m).unwrap();
        let rhs = ops::add(&ops::compose(&n, &m).unwrap(), &ops::compose(&p, &m).unwrap()).unwrap();
        same(&lhs, &rhs)
    })
}

pub fn converse_is_linear() -> Result<(), String> {
    let s = (1usize..=8, 1usize..=8).prop_flat_map(|(a, b)| (matrix(("X", a), ("Y", b)), matrix(("X", a), ("Y", b))));
    check(s, |(m, n)| {
        let lhs = ops::converse(&ops::add(&m, &n).unwrap());
        let rhs = ops::add(&ops::converse(&m), &ops::converse(&n)).unwrap();
        same(&lhs, &rhs)
    })
}

/// `(M+N) ▽ P = M▽P + N▽P` and `P ▽ (M+N) = P▽M + P▽N`.
pub fn krao_is_bilinear() -> Result<(), String> {
    let s = sizes().prop_flat_map(|(a, b, c)| {
        (matrix(("X", a), ("A", c)), matrix(("X", a), ("A", c)), matrix(("Y", b), ("A", c)))
    });
    check(s, |(m, n, p)| {
        let mn = ops::add(&m, &n).unwrap();
        let lhs = ops::krao(&mn, &p).unwrap();
        let rhs = ops::add(&ops::krao(&m, &p).unwrap(), &ops::krao(&n, &p).unwrap()).unwrap();
        same(&lhs, &rhs)?;
        let lhs = ops::krao(&p, &mn).unwrap();
        let rhs = ops::add(&ops::krao(&p, &m).unwrap(), &ops::krao(&p, &n).unwrap()).unwrap();
        same(&lhs, &rhs)
    })
}

pub fn krao_with_bang_is_neutral() -> Result<(), String> {
    check(any_matrix(), |m| {
        let bang = TypedMatrix::bang(m.col_dim().clone());
        same(&ops::krao(&m, &bang).unwrap(), &m)?;
        same(&ops::krao(&bang, &m).unwrap(), &m)
    })
}

pub fn krao_of_row_vectors_is_hadamard() -> Result<(), String> {
    check((1usize..=8).prop_flat_map(|n| (row_vector(n), row_vector(n))), |(u, v)| {
        same(&ops::krao(&u, &v).unwrap(), &ops::hadamard(&u, &v).unwrap())
    })
}

pub fn krao_index_is_j_times_q_plus_k() -> Result<(), String> {
    check(sizes().prop_flat_map(|(p, q, n)| (cells(p, n), cells(q, n))), |(a, b)| {
        let (p, q, n) = (a.len(), b.len(), a[0].len());
        let k = ops::krao(&typed(&a, dim("P", p), dim("A", n)), &typed(&b, dim("Q", q), dim("A", n))).unwrap();
        let mut want = vec![vec![0.0; n]; p * q];
        for j in 0..p {
            for kk in 0..q {
                for c in 0..n {
                    want[j * q + kk][c] = a[j][c] * b[kk][c];
                }
            }
        }
        prop_assert_eq!(k.to_csc().to_dense(), want);
        prop_assert_eq!(k.row_dim().card(), (p * q) as u64);
        Ok(())
    })
}

/// `p_B ∘ (id ▽ u) ∘ p_A°`, `(p_B ▽ u) ∘ p_A°` and `p_B ∘ (p_A ▽ u)°` agree
/// with each other and with a direct sum over rows.
pub fn tabulation_three_forms() -> Result<(), String> {
    let s = (1usize..=8, 1usize..=6, 1usize..=6)
        .prop_flat_map(|(n, b, c)| (functional(("B", b), n), functional(("C", c), n), row_vector(n)));
    check(s, |(pb, pa, u)| {
        let id = TypedMatrix::identity(u.col_dim().clone());
        let diag = ops::krao(&id, &u).unwrap();
        let one = ops::compose(&ops::compose(&pb, &diag).unwrap(), &ops::converse(&pa)).unwrap();
        let two = ops::compose(&ops::krao(&pb, &u).unwrap(), &ops::converse(&pa)).unwrap();
        let three = ops::compose(&pb, &ops::converse(&ops::krao(&pa, &u).unwrap())).unwrap();
        same(&one, &two)?;
        same(&two, &three)?;
        let (fb, fa, uv) = (pb.to_csc(), pa.to_csc(), u.to_csc());
        let mut want = vec![vec![0.0; pa.nrows() as usize]; pb.nrows() as usize];
        for i in 0..u.ncols() {
            let b = fb.column(i as usize).0[0] as usize;
            let c = fa.column(i as usize).0[0] as usize;
            want[b][c] += uv.get(0, i);
        }
        prop_assert_eq!(one.to_csc().to_dense(), want);
        Ok(())
    })
}

/// `P ∘ (Q ▽ v)° = (v ▽ P) ∘ Q°`, its bang and identity instances, and `id ▽ v = v ▽ id`.
pub fn pairing_wheel_vector_rules() -> Result<(), String> {
    let s = (1usize..=6, 1usize..=6, 1usize..=6)
        .prop_flat_map(|(n, d, c)| (functional(("D", d), n), functional(("C", c), n), row_vector(n)));
    check(s, |(p, q, v)| {
        let lhs = ops::compose(&p, &ops::converse(&ops::krao(&q, &v).unwrap())).unwrap();
        let rhs = ops::compose(&ops::krao(&v, &p).unwrap(), &ops::converse(&q)).unwrap();
        same(&lhs, &rhs)?;

        let bang = TypedMatrix::bang(v.col_dim().clone());
        let lhs = ops::compose(&p, &ops::converse(&v)).unwrap();
        let rhs = ops::compose(&ops::krao(&v, &p).unwrap(), &ops::converse(&bang)).unwrap();
        same(&lhs, &rhs)?;

        let id = TypedMatrix::identity(v.col_dim().clone());
        let id_v = ops::krao(&id, &v).unwrap();
        same(&ops::compose(&p, &ops::converse(&id_v)).unwrap(), &ops::krao(&v, &p).unwrap())?;
        same(&ops::compose(&p, &id_v).unwrap(), &ops::krao(&v, &p).unwrap())?;
        same(&id_v, &ops::krao(&v, &id).unwrap())?;
        same(&id_v, &ops::diagonal(&v).unwrap())
    })
}

/// `(P ▽ Q) ∘ M°`, `(Q ▽ M) ∘ P°` and `(M ▽ P) ∘ Q°` hold the same cells
/// once indices are read back as `(b, c, d)` triples.
pub fn pairing_wheel_rotation() -> Result<(), String> {
    let s = (1usize..=8, 1usize..=6, 1usize..=6, 1usize..=6)
        .prop_flat_map(|(n, b, c, d)| (functional(("B", b), n), functional(("D", d), n), functional(("C", c), n)));
    check(s, |(m, p, q)| {
        let (nb, nc, nd) = (m.nrows(), q.nrows(), p.nrows());
        let cells = |x: TypedMatrix, key: &dyn Fn(u64, u64) -> (u64, u64, u64)| -> BTreeMap<(u64, u64, u64), u64> {
            x.entries().into_iter().map(|(r, c, v)| (key(r, c), v as u64)).collect()
        };
        let pq = ops::compose(&ops::krao(&p, &q).unwrap(), &ops::converse(&m)).unwrap();
        let qm = ops::compose(&ops::krao(&q, &m).unwrap(), &ops::converse(&p)).unwrap();
        let mp = ops::compose(&ops::krao(&m, &p).unwrap(), &ops::converse(&q)).unwrap();
        let bcd = cells(pq, &|r, b| (b, r % nc, r / nc));
        let cdb = cells(qm, &|r, d| (r % nb, r / nb, d));
        let dbc = cells(mp, &|r, c| (r / nd, c, r % nd));
        prop_assert_eq!(&bcd, &cdb);
        prop_assert_eq!(&cdb, &dbc);
        prop_assert_eq!(bcd.values().sum::<u64>(), m.ncols());
        Ok(())
    })
}

fn mini() -> &'static LoadedDatabase {
    static DB: OnceLock<(tempfile::TempDir, LoadedDatabase)> = OnceLock::new();
    &DB.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        generate_mini(&MiniConfig::new(17, 100, 600), dir.path()).unwrap();
        let spec = SchemaSpec::parse(assets::TPCH_SCHEMA).unwrap();
        let attrs: BTreeSet<String> =
            ["l_quantity", "l_discount", "l_shipdate", "l_shipmode", "l_returnflag", "l_linenumber"]
                .iter()
                .map(|s| s.to_string())
                .collect();
        let db = load(&spec, dir.path(), &attrs).unwrap();
        (dir, db)
    })
    .1
}

fn atom() -> impl Strategy<Value = Predicate> {
    let op = prop_oneof![
        Just(CmpOp::Eq),
        Just(CmpOp::Ne),
        Just(CmpOp::Lt),
        Just(CmpOp::Le),
        Just(CmpOp::Gt),
        Just(CmpOp::Ge)
    ];
    let modes = ["MAIL", "SHIP", "AIR", "RAIL", "TRUCK", "FOB", "REG AIR"];
    prop_oneof![
        (op.clone(), 1u32..=50).prop_map(|(op, n)| Predicate::Cmp {
            attr: "l_quantity".into(),
            op,
            value: Literal::Num(n.into())
        }),
        (0u32..=10, 0u32..=10).prop_map(|(a, b)| Predicate::Between {
            attr: "l_discount".into(),
            low: Literal::Num(f64::from(a.min(b)) / 100.0),
            high: Literal::Num(f64::from(a.max(b)) / 100.0),
        }),
        (op.clone(), 1992i32..=1998, 1u32..=12).prop_map(|(op, y, m)| Predicate::Cmp {
            attr: "l_shipdate".into(),
            op,
            value: Literal::Str(format!("{y}-{m:02}-01"))
        }),
        (proptest::sample::subsequence(modes.to_vec(), 1..=3), any::<bool>()).prop_map(|(v, negated)| Predicate::In {
            attr: "l_shipmode".into(),
            values: v.into_iter().map(|s| Literal::Str(s.into())).collect(),
            negated,
        }),
        (op, 1u32..=7).prop_map(|(op, n)| Predicate::Cmp {
            attr: "l_linenumber".into(),
            op,
            value: Literal::Num(n.into())
        }),
        Just(Predicate::Like { attr: "l_returnflag".into(), pattern: "%R%".into(), negated: false }),
    ]
}

fn predicate() -> impl Strategy<Value = Predicate> {
    atom().prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Predicate::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Predicate::Or(Box::new(a), Box::new(b))),
            inner.prop_map(|a| Predicate::Not(Box::new(a))),
        ]
    })
}

fn filters(ps: Vec<Predicate>) -> Vec<TypedMatrix> {
    let bindings = ps
        .into_iter()
        .enumerate()
        .map(|(i, p)| Binding { name: format!("f{i}"), expr: Expr::Filter(p), line: i + 1 })
        .collect();
    evaluate(&Script { bindings }, mini()).unwrap().iter().map(|(_, m)| m.clone()).collect()
}

pub fn conjunction_is_hadamard() -> Result<(), String> {
    check((predicate(), predicate()), |(p, q)| {
        let both = Predicate::And(Box::new(p.clone()), Box::new(q.clone()));
        let f = filters(vec![p, q, both]);
        same(&f[2], &ops::hadamard(&f[0], &f[1]).unwrap())
    })
}

pub fn negation_is_complement() -> Result<(), String> {
    check(predicate(), |p| {
        let f = filters(vec![p.clone(), Predicate::Not(Box::new(p))]);
        let ones = TypedMatrix::bang(f[0].col_dim().clone());
        let ones = ops::realign(&ones, f[0].row_dim(), f[0].col_dim()).unwrap();
        same(&ops::add(&f[0], &f[1]).unwrap(), &ones)
    })
}
