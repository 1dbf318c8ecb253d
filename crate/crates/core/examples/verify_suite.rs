//! Runs every verification suite with a small trial count and prints the
//! summary table.

use onebody::verify::{self, Suite, SuiteConfig};

fn main() -> onebody::Result<()> {
    let trials = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20);
    let cfg = SuiteConfig { trials, ..Default::default() };
    let runs = Suite::ALL
        .iter()
        .map(|s| verify::run_suite(*s, &cfg))
        .collect::<onebody::Result<Vec<_>>>()?;
    verify::write_summary_csv(&runs, std::io::stdout().lock())?;
    Ok(())
}
