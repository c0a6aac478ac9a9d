//! Builds an episodic memory from a few scored episodes, reads normalized
//! scores back, and round-trips it through a snapshot file.
//!
//! ```bash
//! cargo run --example memory
//! ```

use necsa::abstraction::{extract_pattern, GridKey};
use necsa::memory::{EpisodicMemory, MeasureMode};

fn episode(cells: &[u16], m: usize) -> necsa::Result<Vec<necsa::abstraction::PatternKey>> {
    let history: Vec<GridKey> = cells
        .iter()
        .map(|&c| GridKey::new(vec![c], 8))
        .collect::<necsa::Result<_>>()?;
    (0..history.len())
        .map(|t| extract_pattern(&history, t, m))
        .collect()
}

fn main() -> necsa::Result<()> {
    let mut memory = EpisodicMemory::new(MeasureMode::Score, 2, 8);
    let good = episode(&[0, 1, 2, 3, 4], 2)?;
    let bad = episode(&[0, 1, 0, 1, 0], 2)?;
    memory.observe_episode(&good, 1.0)?;
    memory.observe_episode(&bad, 0.0)?;
    memory.observe_episode(&good, 1.0)?;

    println!(
        "{} patterns, {} occurrences",
        memory.len(),
        memory.total_occurrences()
    );
    for (key, entry) in memory.iter() {
        println!(
            "code {:016x} visits {} score {:.3} normalized {:.3}",
            necsa::abstraction::encode_key(key),
            entry.visits,
            entry.score,
            memory.lookup_score(key).unwrap()
        );
    }
    println!(
        "mean normalized score {:.3}",
        memory.mean_normalized_score()?
    );

    let path = std::env::temp_dir().join("necsa_memory_example.txt");
    memory.snapshot(&path)?;
    let restored = EpisodicMemory::load(&path)?;
    println!(
        "restored {} patterns from {}",
        restored.len(),
        path.display()
    );
    Ok(())
}
