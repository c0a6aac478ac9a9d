//! Sweeps pattern length and measurement mode on the chain MDP and prints
//! the ablation table.
//!
//! ```bash
//! cargo run --release --example ablation
//! ```

use necsa::agents::AgentKind;
use necsa::harness::{ablate, write_ablation_csv, AblationGrid, RunConfig};

fn main() -> necsa::Result<()> {
    let mut base = RunConfig::new("chain", AgentKind::Tabular, 10_000, 1_000, vec![0, 1]);
    base.outdir = std::env::temp_dir().join("necsa_ablation");
    base.shaping.epsilon = 0.01;
    base.agent_config.explore_rate = 0.2;
    base.agent_config.q_init = 1.0;
    let grid = AblationGrid::parse("m=1,3;measure_mode=score,qvalue")?;
    let cells = ablate(&base, &grid)?;
    write_ablation_csv(&grid, &cells, std::io::stdout())?;
    Ok(())
}
