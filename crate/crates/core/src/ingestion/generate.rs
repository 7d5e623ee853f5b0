//! Small deterministic TPC-H-shaped datasets in dbgen `.tbl` layout.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIORITIES: [&str; 5] = ["1-URGENT", "2-HIGH", "3-MEDIUM", "4-NOT SPECIFIED", "5-LOW"];
const SHIPMODES: [&str; 7] = ["REG AIR", "AIR", "RAIL", "SHIP", "TRUCK", "MAIL", "FOB"];
const INSTRUCTIONS: [&str; 4] = ["DELIVER IN PERSON", "COLLECT COD", "NONE", "TAKE BACK RETURN"];
const SEGMENTS: [&str; 5] = ["AUTOMOBILE", "BUILDING", "FURNITURE", "MACHINERY", "HOUSEHOLD"];
const TYPE_1: [&str; 6] = ["STANDARD", "SMALL", "MEDIUM", "LARGE", "ECONOMY", "PROMO"];
const TYPE_2: [&str; 5] = ["ANODIZED", "BURNISHED", "PLATED", "POLISHED", "BRUSHED"];
const TYPE_3: [&str; 5] = ["TIN", "NICKEL", "BRASS", "STEEL", "COPPER"];
const CONTAINERS: [&str; 4] = ["SM CASE", "MED BOX", "LG PACK", "JUMBO JAR"];
const REGIONS: [&str; 5] = ["AFRICA", "AMERICA", "ASIA", "EUROPE", "MIDDLE EAST"];
const NATIONS: [(&str, u32); 25] = [
    ("ALGERIA", 0),
    ("ARGENTINA", 1),
    ("BRAZIL", 1),
    ("CANADA", 1),
    ("EGYPT", 4),
    ("ETHIOPIA", 0),
    ("FRANCE", 3),
    ("GERMANY", 3),
    ("INDIA", 2),
    ("INDONESIA", 2),
    ("IRAN", 4),
    ("IRAQ", 4),
    ("JAPAN", 2),
    ("JORDAN", 4),
    ("KENYA", 0),
    ("MOROCCO", 0),
    ("MOZAMBIQUE", 0),
    ("PERU", 1),
    ("CHINA", 2),
    ("ROMANIA", 3),
    ("SAUDI ARABIA", 4),
    ("VIETNAM", 2),
    ("RUSSIA", 3),
    ("UNITED KINGDOM", 3),
    ("UNITED STATES", 1),
];
const GERMANY: u32 = 7;

/// Sizes for [`generate_mini`]. Supporting table sizes default to values
/// derived from the order and line counts.
#[derive(Clone, Debug)]
pub struct MiniConfig {
    pub seed: u64,
    pub orders: usize,
    pub lineitems: usize,
    pub customers: usize,
    pub parts: usize,
    pub suppliers: usize,
}

impl MiniConfig {
    pub fn new(seed: u64, orders: usize, lineitems: usize) -> Self {
        MiniConfig {
            seed,
            orders,
            lineitems,
            customers: (orders / 4).max(5),
            parts: (lineitems / 15).max(8),
            suppliers: (lineitems / 60).max(5),
        }
    }
}

fn money(cents: i64) -> String {
    let sign = if cents < 0 { "-" } else { "" };
    let c = cents.unsigned_abs();
    format!("{sign}{}.{:02}", c / 100, c % 100)
}

fn date(d: NaiveDate) -> String {
    d.format("%Y-%m-%d").to_string()
}

/// Writes `region`, `nation`, `part`, `supplier`, `partsupp`, `customer`,
/// `orders` and `lineitem` `.tbl` files into `dir`. Output depends only on
/// the configuration.
pub fn generate_mini(cfg: &MiniConfig, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut region = String::new();
    for (i, r) in REGIONS.iter().enumerate() {
        writeln!(region, "{i}|{r}|region {i}|").unwrap();
    }
    let mut nation = String::new();
    for (i, (n, r)) in NATIONS.iter().enumerate() {
        writeln!(nation, "{i}|{n}|{r}|nation {i}|").unwrap();
    }

    let nparts = cfg.parts.max(1);
    let mut part = String::new();
    let mut retail_cents = vec![0i64; nparts + 1];
    for (p, cents) in retail_cents.iter_mut().enumerate().skip(1) {
        let ty = format!(
            "{} {} {}",
            TYPE_1.choose(&mut rng).unwrap(),
            TYPE_2.choose(&mut rng).unwrap(),
            TYPE_3.choose(&mut rng).unwrap()
        );
        let pk = p as i64;
        *cents = 90000 + (pk / 10) % 20001 + 100 * (pk % 1000);
        let mfgr = rng.gen_range(1..=5);
        writeln!(
            part,
            "{p}|part {p}|Manufacturer#{mfgr}|Brand#{mfgr}{}|{ty}|{}|{}|{}|part comment|",
            rng.gen_range(1..=5),
            rng.gen_range(1..=50),
            CONTAINERS.choose(&mut rng).unwrap(),
            money(*cents)
        )
        .unwrap();
    }

    let nsupp = cfg.suppliers.max(1);
    let mut supplier = String::new();
    for s in 1..=nsupp {
        // the first supplier is German so nation-filtered queries see data
        let n = if s == 1 { GERMANY } else { rng.gen_range(0..25) };
        writeln!(
            supplier,
            "{s}|Supplier#{s:09}|address {s}|{n}|{}-555-{:04}|{}|supplier comment|",
            10 + n,
            s % 10000,
            money(rng.gen_range(-99999..=999999))
        )
        .unwrap();
    }

    let per_part = nsupp.min(4);
    let mut partsupp = String::new();
    let mut part_suppliers: Vec<Vec<usize>> = vec![Vec::new(); nparts + 1];
    let supp_ids: Vec<usize> = (1..=nsupp).collect();
    for (p, suppliers) in part_suppliers.iter_mut().enumerate().skip(1) {
        let mut chosen: Vec<usize> = supp_ids.choose_multiple(&mut rng, per_part).copied().collect();
        chosen.sort_unstable();
        for &s in &chosen {
            writeln!(
                partsupp,
                "{p}|{s}|{}|{}|partsupp comment|",
                rng.gen_range(1..=9999),
                money(rng.gen_range(100..=100000))
            )
            .unwrap();
        }
        *suppliers = chosen;
    }

    let ncust = cfg.customers.max(1);
    let mut customer = String::new();
    for c in 1..=ncust {
        let n = rng.gen_range(0..25);
        writeln!(
            customer,
            "{c}|Customer#{c:09}|address {c}|{n}|{}-555-{:04}|{}|{}|customer comment|",
            10 + n,
            c % 10000,
            money(rng.gen_range(-99999..=999999)),
            SEGMENTS.choose(&mut rng).unwrap()
        )
        .unwrap();
    }

    // distinct, non-sequential order keys in shuffled file order
    let mut keys: Vec<u64> = (1..=(cfg.orders as u64 * 4).max(4)).collect();
    keys.shuffle(&mut rng);
    keys.truncate(cfg.orders);

    // every order gets at least one line while lines remain
    let mut lines_per_order = vec![0usize; cfg.orders];
    for (i, slot) in lines_per_order.iter_mut().enumerate() {
        if i < cfg.lineitems {
            *slot = 1;
        }
    }
    if cfg.orders > 0 {
        for _ in cfg.orders.min(cfg.lineitems)..cfg.lineitems {
            lines_per_order[rng.gen_range(0..cfg.orders)] += 1;
        }
    }

    let start = NaiveDate::from_ymd_opt(1992, 1, 1).unwrap();
    let last_order = NaiveDate::from_ymd_opt(1998, 8, 2).unwrap();
    let span = (last_order - start).num_days();
    let current = NaiveDate::from_ymd_opt(1995, 6, 17).unwrap();

    let mut orders = String::new();
    let mut lineitem = String::new();
    for (o, &key) in keys.iter().enumerate() {
        let odate = start + Duration::days(rng.gen_range(0..=span));
        let cust = rng.gen_range(1..=ncust);
        let prio = PRIORITIES.choose(&mut rng).unwrap();
        let mut total = 0i64;
        let mut statuses = (0, 0);
        for ln in 1..=lines_per_order[o] {
            let p = rng.gen_range(1..=nparts);
            let s = *part_suppliers[p].choose(&mut rng).unwrap();
            let qty = rng.gen_range(1..=50i64);
            let price = qty * retail_cents[p];
            let disc = rng.gen_range(0..=10i64);
            let tax = rng.gen_range(0..=8i64);
            let ship = odate + Duration::days(rng.gen_range(1..=121));
            let commit = odate + Duration::days(rng.gen_range(30..=90));
            let receipt = ship + Duration::days(rng.gen_range(1..=30));
            let rflag = if receipt <= current {
                if rng.gen_bool(0.5) {
                    "R"
                } else {
                    "A"
                }
            } else {
                "N"
            };
            let lstatus = if ship > current { "O" } else { "F" };
            if lstatus == "O" {
                statuses.0 += 1;
            } else {
                statuses.1 += 1;
            }
            total += price * (100 - disc) * (100 + tax) / 10000;
            writeln!(
                lineitem,
                "{key}|{p}|{s}|{ln}|{qty}|{}|0.{disc:02}|0.{tax:02}|{rflag}|{lstatus}|{}|{}|{}|{}|{}|line comment|",
                money(price),
                date(ship),
                date(commit),
                date(receipt),
                INSTRUCTIONS.choose(&mut rng).unwrap(),
                SHIPMODES.choose(&mut rng).unwrap()
            )
            .unwrap();
        }
        let ostatus = match statuses {
            (0, _) => "F",
            (_, 0) => "O",
            _ => "P",
        };
        writeln!(
            orders,
            "{key}|{cust}|{ostatus}|{}|{}|{prio}|Clerk#{:09}|0|order comment|",
            money(total),
            date(odate),
            rng.gen_range(1..=1000)
        )
        .unwrap();
    }

    for (name, body) in [
        ("region", region),
        ("nation", nation),
        ("part", part),
        ("supplier", supplier),
        ("partsupp", partsupp),
        ("customer", customer),
        ("orders", orders),
        ("lineitem", lineitem),
    ] {
        fs::write(dir.join(format!("{name}.tbl")), body)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn money_formatting() {
        assert_eq!(money(212432), "2124.32");
        assert_eq!(money(5), "0.05");
        assert_eq!(money(-1050), "-10.50");
    }

    #[test]
    fn deterministic_output() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let cfg = MiniConfig::new(1, 5, 8);
        generate_mini(&cfg, a.path()).unwrap();
        generate_mini(&cfg, b.path()).unwrap();
        for t in ["orders", "lineitem", "customer", "partsupp"] {
            let x = fs::read(a.path().join(format!("{t}.tbl"))).unwrap();
            let y = fs::read(b.path().join(format!("{t}.tbl"))).unwrap();
            assert_eq!(x, y, "{t} differs");
        }
        let lines = fs::read_to_string(a.path().join("lineitem.tbl")).unwrap();
        assert_eq!(lines.lines().count(), 8);
    }
}
