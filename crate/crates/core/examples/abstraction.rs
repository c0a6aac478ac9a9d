//! Maps continuous state-action vectors to grid cells and multi-step
//! patterns, and projects a wide observation before discretizing it.
//!
//! ```bash
//! cargo run --example abstraction
//! ```

use necsa::abstraction::{
    build_projection, concat_state_action, discretize, extract_pattern, project, BoundedVector,
};

fn main() -> necsa::Result<()> {
    let grid_count = 5;
    let mut history = Vec::new();
    for t in 0..4 {
        let x = -0.9 + 0.3 * t as f64;
        let state = BoundedVector::uniform(vec![x, x / 2.0], -1.0, 1.0)?;
        let action = BoundedVector::uniform(vec![0.1], -0.1, 0.1)?;
        let cell = discretize(&concat_state_action(&state, &action), grid_count)?;
        let centre = cell.representative(&[-1.0, -1.0, -0.1], &[1.0, 1.0, 0.1]);
        println!(
            "t={t} x={x:+.2} cell={:?} centre={centre:.3?}",
            cell.indices()
        );
        history.push(cell);
    }

    for m in 1..=3 {
        let pattern = extract_pattern(&history, 3, m)?;
        println!(
            "pattern ending at t=3, m={m}: code {:016x}",
            necsa::abstraction::encode_key(&pattern)
        );
    }

    let wide: Vec<f64> = (0..64).map(|i| (i as f64 * 0.1).sin()).collect();
    let matrix = build_projection(7, wide.len(), 8)?;
    let projected = project(&wide, &matrix)?;
    let cell = discretize(
        &BoundedVector::uniform(projected.clone(), -10.0, 10.0)?,
        grid_count,
    )?;
    println!("64 -> 8 dims: {projected:.3?}");
    println!("projected cell {:?}", cell.indices());
    Ok(())
}
