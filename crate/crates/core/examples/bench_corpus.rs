//! Benchmark every PGM in a directory and print the CSV report.
//!
//! ```text
//! cargo run --release --example bench_corpus -- path/to/corpus
//! ```

use std::env;
use std::path::PathBuf;

use plr::bench::{run_bench, BenchConfig};

fn main() -> plr::Result<()> {
    let dir = env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("corpus"));
    let report = run_bench(&dir, &BenchConfig::default())?;
    for (path, reason) in &report.skipped {
        eprintln!("skipped {}: {reason}", path.display());
    }
    if report.rows.is_empty() {
        eprintln!("no PGM images in {}", dir.display());
        return Ok(());
    }
    print!("{}", report.to_csv_string());
    Ok(())
}
