//! Trains TD3 on the sparse point mass for one seed, with reward revision
//! and without, and compares the runs. Takes about a minute per run in
//! release mode.
//!
//! ```bash
//! cargo run --release --example train_point_mass
//! ```

use necsa::agents::AgentKind;
use necsa::harness::{compare, run, RunConfig};

fn main() -> necsa::Result<()> {
    let root = std::env::temp_dir().join("necsa_train_point_mass");
    let mut dirs = Vec::new();
    for (label, epsilon) in [("baseline", 0.0), ("shaped", 0.2)] {
        let mut config =
            RunConfig::new("sparse_point_mass", AgentKind::Td3, 40_000, 2_000, vec![0]);
        config.outdir = root.join(label);
        config.shaping.epsilon = epsilon;
        config.agent_config.hidden = vec![64, 64];
        for outcome in run(&config)? {
            println!(
                "{label}: seed {} {:?}, {} memory patterns",
                outcome.seed,
                outcome.status,
                outcome.memory.len()
            );
        }
        dirs.push(config.outdir);
    }
    compare(&dirs, std::io::stdout())?;
    Ok(())
}
