//! Drives the shaping pipeline by hand on the point-mass task: a scripted
//! controller succeeds, a random walk fails, and later visits to the
//! successful route earn a positive revision.
//!
//! ```bash
//! cargo run --example shaping
//! ```

use necsa::abstraction::BoundedVector;
use necsa::envs::{make_env, Action, Environment};
use necsa::shaping::{ShapingConfig, ShapingPipeline, Transition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rollout(
    env: &mut dyn Environment,
    pipeline: &mut ShapingPipeline,
    mut policy: impl FnMut(&[f64]) -> Vec<f64>,
    seed: u64,
) -> necsa::Result<()> {
    let spec = env.spec().clone();
    let bounded =
        |v: Vec<f64>, lo: &[f64], hi: &[f64]| BoundedVector::new(v, lo.to_vec(), hi.to_vec());
    let mut state = env.reset(seed);
    for t in 0.. {
        let action = policy(&state);
        let step = env.step(&Action::Continuous(action.clone()))?;
        let revised = pipeline.step_hook(
            Transition {
                state: bounded(state.clone(), &spec.state_lower, &spec.state_upper)?,
                action: bounded(action, &spec.action_lower, &spec.action_upper)?,
                reward: step.reward,
                next_state: bounded(step.state.clone(), &spec.state_lower, &spec.state_upper)?,
                done: step.done,
                t,
            },
            None,
        )?;
        if t % 40 == 0 {
            println!(
                "  t={t:3} reward {:.3} revised {:+.4}",
                revised.reward_raw, revised.reward
            );
        }
        if step.episode_over() {
            break;
        }
        state = step.state;
    }
    let summary = pipeline.end_episode()?;
    println!(
        "  {} steps, return {:.1}, revised return {:+.3}, memory {} patterns",
        summary.steps,
        summary.return_raw,
        summary.return_revised,
        pipeline.memory().len()
    );
    Ok(())
}

fn main() -> necsa::Result<()> {
    let mut env = make_env("sparse_point_mass")?;
    let spec = env.spec().clone();
    let config = ShapingConfig {
        epsilon: 0.2,
        ..ShapingConfig::default()
    };
    let mut pipeline = ShapingPipeline::new(config, spec.state_dim, spec.action_dim, 0)?;
    let controller = |s: &[f64]| {
        (0..2)
            .map(|k| 0.05 * (0.9 - s[k]) - 0.3 * s[k + 2])
            .collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    println!("controller episode");
    rollout(env.as_mut(), &mut pipeline, controller, 1)?;
    println!("random episode");
    rollout(
        env.as_mut(),
        &mut pipeline,
        |_| vec![rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1)],
        2,
    )?;
    println!("controller episode again");
    rollout(env.as_mut(), &mut pipeline, controller, 3)?;
    Ok(())
}
