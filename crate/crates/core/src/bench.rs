//! k-best-of-N timing and peak memory for the benchmark harness.

use std::io::{self, Write};
use std::time::{Duration, Instant};

/// Runs `f` `runs` times and returns the `k` fastest wall times, ascending.
pub fn k_best<F: FnMut()>(runs: usize, k: usize, mut f: F) -> Vec<Duration> {
    let mut times: Vec<Duration> = (0..runs)
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed()
        })
        .collect();
    times.sort();
    times.truncate(k);
    times
}

/// Peak resident set size of this process, where the platform reports it.
pub fn peak_memory_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

/// One timed query on one dataset.
#[derive(Clone, Debug)]
pub struct BenchRow {
    pub query: String,
    pub dataset: String,
    /// Fastest runs, ascending.
    pub times: Vec<Duration>,
    pub mem_bytes: Option<u64>,
}

pub const CSV_HEADER: &str = "query,dataset,best,second,third,mem_bytes";

impl BenchRow {
    pub fn best(&self) -> Duration {
        self.times[0]
    }
}

/// Writes rows as `query,dataset,best,second,third,mem_bytes`, times in
/// seconds. Missing ranks and unknown memory are left empty.
pub fn write_csv<W: Write>(rows: &[BenchRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        let t = |i: usize| r.times.get(i).map(|d| format!("{:.9}", d.as_secs_f64())).unwrap_or_default();
        let mem = r.mem_bytes.map(|m| m.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{},{},{}", r.query, r.dataset, t(0), t(1), t(2), mem)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_best_runs_n_times_and_sorts() {
        let mut calls = 0;
        let t = k_best(10, 3, || {
            calls += 1;
            std::thread::sleep(Duration::from_micros(10 * (10 - calls)));
        });
        assert_eq!(calls, 10);
        assert_eq!(t.len(), 3);
        assert!(t[0] <= t[1] && t[1] <= t[2]);
    }

    #[test]
    fn csv_layout() {
        let row = BenchRow {
            query: "q6".into(),
            dataset: "mini".into(),
            times: vec![Duration::from_millis(1), Duration::from_millis(2)],
            mem_bytes: None,
        };
        let mut out = Vec::new();
        write_csv(&[row], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), format!("{CSV_HEADER}\nq6,mini,0.001000000,0.002000000,,\n"));
    }
}
