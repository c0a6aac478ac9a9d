//! Shows how pattern length spreads visits over more, rarer patterns: the
//! same chain run is repeated for m = 1..3 and the visit histograms compared.
//!
//! ```bash
//! cargo run --release --example density
//! ```

use necsa::agents::AgentKind;
use necsa::harness::{report_density, run, RunConfig};

fn main() -> necsa::Result<()> {
    for m in 1..=3 {
        let mut config = RunConfig::new("chain", AgentKind::Tabular, 10_000, 1_000, vec![0]);
        config.outdir = std::env::temp_dir().join(format!("necsa_density_m{m}"));
        config.shaping.pattern_len = m;
        config.shaping.epsilon = 0.01;
        config.agent_config.q_init = 1.0;
        let outcome = run(&config)?.remove(0);
        let report = report_density(outcome.memory_path())?;
        println!(
            "m={m}: {} patterns, {} occurrences, once-visited fraction {:.3}",
            report.keys,
            report.occurrences,
            report.once_visited_fraction.unwrap_or(0.0)
        );
        if m == 3 {
            report.write_csv(std::io::stdout())?;
        }
    }
    Ok(())
}
