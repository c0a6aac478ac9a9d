//! Trains tabular Q-learning on the chain MDP with and without reward
//! revision and prints the learning curves.
//!
//! ```bash
//! cargo run --release --example train_chain
//! ```

use necsa::agents::AgentKind;
use necsa::harness::{load_metrics, run, summarize_dir, RunConfig};

fn main() -> necsa::Result<()> {
    let root = std::env::temp_dir().join("necsa_train_chain");
    for (label, epsilon) in [("baseline", 0.0), ("shaped", 0.01)] {
        let mut config = RunConfig::new("chain", AgentKind::Tabular, 20_000, 2_000, vec![0, 1, 2]);
        config.outdir = root.join(label);
        config.shaping.epsilon = epsilon;
        config.agent_config.explore_rate = 0.2;
        config.agent_config.q_init = 1.0;
        let outcomes = run(&config)?;
        let curve: Vec<String> = load_metrics(outcomes[0].metrics_path())?
            .iter()
            .filter_map(|row| row.eval_return_mean.map(|r| format!("{r:.1}")))
            .collect();
        let summary = summarize_dir(&config.outdir)?;
        println!(
            "{label:8} seed 0 curve [{}]; median steps to {} = {:?}, final {:?}",
            curve.join(" "),
            summary.threshold,
            summary.median_steps_to_threshold(),
            summary.final_eval_mean
        );
    }
    Ok(())
}
