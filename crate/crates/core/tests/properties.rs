use std::collections::{HashMap, HashSet};

use necsa::abstraction::{
    build_projection, discretize, encode_key, project, BoundedVector, PatternKey,
};
use necsa::memory::{EpisodicMemory, MeasureMode};
use necsa::shaping::{revise_reward, ShapingConfig, ShapingPipeline, Transition};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn key(indices: &[u16]) -> PatternKey {
    PatternKey::from_flat(indices.to_vec(), 1, 4).unwrap()
}

fn episodes() -> impl Strategy<Value = Vec<(Vec<Vec<u16>>, f64)>> {
    let pattern = prop::collection::vec(0u16..4, 1..=2);
    prop::collection::vec(
        (prop::collection::vec(pattern, 1..6), -10.0f64..10.0),
        1..12,
    )
}

proptest! {
    #[test]
    fn scores_are_mean_returns_over_occurrences(episodes in episodes()) {
        let mut memory = EpisodicMemory::new(MeasureMode::Score, 2, 4);
        let mut oracle: HashMap<Vec<u16>, (f64, u64)> = HashMap::new();
        for (patterns, ret) in &episodes {
            let keys: Vec<PatternKey> = patterns.iter().map(|p| key(p)).collect();
            memory.observe_episode(&keys, *ret).unwrap();
            for p in patterns {
                let e = oracle.entry(p.clone()).or_default();
                e.0 += ret;
                e.1 += 1;
            }
        }
        prop_assert_eq!(memory.len(), oracle.len());
        let scores: Vec<f64> = oracle.values().map(|(s, n)| s / *n as f64).collect();
        let (lo, hi) = scores.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| (a.min(s), b.max(s)));
        for (p, (sum, n)) in &oracle {
            let entry = memory.get(&key(p)).unwrap();
            prop_assert_eq!(entry.visits, *n);
            prop_assert!((entry.score - sum / *n as f64).abs() < 1e-9);
            let norm = memory.lookup_score(&key(p)).unwrap();
            let expected = if hi - lo > 0.0 { (entry.score - lo) / (hi - lo) } else { 0.5 };
            prop_assert!((norm - expected).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&norm));
        }
        let mean = memory.mean_normalized_score().unwrap();
        prop_assert!((0.0..=1.0).contains(&mean));
        prop_assert_eq!(memory.total_occurrences(), oracle.values().map(|v| v.1).sum::<u64>());
    }

    #[test]
    fn batched_lookup_equals_single_lookups(episodes in episodes(), queries in prop::collection::vec(prop::collection::vec(0u16..4, 1..=2), 0..40)) {
        let mut memory = EpisodicMemory::new(MeasureMode::Score, 2, 4);
        for (patterns, ret) in &episodes {
            let keys: Vec<PatternKey> = patterns.iter().map(|p| key(p)).collect();
            memory.observe_episode(&keys, *ret).unwrap();
        }
        let queries: Vec<PatternKey> = queries.iter().map(|q| key(q)).collect();
        let mut out = vec![Some(-1.0)];
        memory.lookup_scores(&queries, &mut out);
        prop_assert_eq!(out[0], Some(-1.0));
        let single: Vec<Option<f64>> = queries.iter().map(|q| memory.lookup_score(q)).collect();
        prop_assert_eq!(&out[1..], &single[..]);
    }

    #[test]
    fn revision_sign_follows_score_against_mean(
        r in -5.0f64..5.0,
        c in 0.0f64..=1.0,
        mean in 0.0f64..=1.0,
        eps in 0.0f64..1.0,
    ) {
        let revised = revise_reward(r, Some(c), mean, eps).unwrap();
        prop_assert!((revised - r).abs() <= eps + 1e-12);
        prop_assert_eq!((revised - r) > 0.0, c > mean && eps > 0.0 && (c - mean) * eps + r != r);
        prop_assert_eq!(revise_reward(r, Some(c), mean, 0.0).unwrap(), r);
        prop_assert_eq!(revise_reward(r, None, mean, eps).unwrap(), r);
    }

    #[test]
    fn projection_is_linear_and_seeded(
        seed in any::<u64>(),
        x in prop::collection::vec(-1.0f64..1.0, 30),
        y in prop::collection::vec(-1.0f64..1.0, 30),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let matrix = build_projection(seed, 30, 6).unwrap();
        prop_assert_eq!(&matrix, &build_projection(seed, 30, 6).unwrap());
        let mix: Vec<f64> = x.iter().zip(&y).map(|(x, y)| a * x + b * y).collect();
        let (px, py, pm) = (project(&x, &matrix).unwrap(), project(&y, &matrix).unwrap(), project(&mix, &matrix).unwrap());
        for k in 0..6 {
            let expected = a * px[k] + b * py[k];
            prop_assert!((pm[k] - expected).abs() <= 1e-9 * (1.0 + expected.abs()));
        }
    }

    #[test]
    fn discretization_is_monotone_per_component(
        v in prop::collection::vec(-2.0f64..2.0, 3),
        bump in 0.0f64..1.0,
        k in 0usize..3,
        n in 2usize..50,
    ) {
        let base = BoundedVector::uniform(v.clone(), -2.0, 2.0).unwrap();
        let mut w = v.clone();
        w[k] = (w[k] + bump).min(2.0);
        let moved = BoundedVector::uniform(w, -2.0, 2.0).unwrap();
        let (a, b) = (discretize(&base, n).unwrap(), discretize(&moved, n).unwrap());
        prop_assert!(a.indices().iter().all(|&i| (i as usize) < n));
        prop_assert!(b.indices()[k] >= a.indices()[k]);
        for j in (0..3).filter(|&j| j != k) {
            prop_assert_eq!(a.indices()[j], b.indices()[j]);
        }
    }

    #[test]
    fn zero_epsilon_passes_rewards_through(seed in any::<u64>(), rewards in prop::collection::vec(-1.0f64..1.0, 1..60)) {
        let config = ShapingConfig { epsilon: 0.0, pattern_len: 2, ..ShapingConfig::default() };
        let mut pipeline = ShapingPipeline::new(config, 2, 1, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for episode in 0..3 {
            for (t, &r) in rewards.iter().enumerate() {
                let out = pipeline.step_hook(transition(&mut rng, r, t), None).unwrap();
                prop_assert_eq!(out.reward, r);
            }
            let summary = pipeline.end_episode().unwrap();
            prop_assert_eq!(summary.return_raw, summary.return_revised, "episode {}", episode);
        }
    }
}

fn transition(rng: &mut ChaCha8Rng, reward: f64, t: usize) -> Transition {
    let state = BoundedVector::uniform(
        vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
        -1.0,
        1.0,
    )
    .unwrap();
    let action = BoundedVector::uniform(vec![rng.random_range(-1.0..1.0)], -1.0, 1.0).unwrap();
    Transition {
        next_state: state.clone(),
        state,
        action,
        reward,
        done: false,
        t,
    }
}

fn fixed_step(x: f64, reward: f64, t: usize) -> Transition {
    let state = BoundedVector::uniform(vec![x, x], -1.0, 1.0).unwrap();
    Transition {
        next_state: state.clone(),
        action: BoundedVector::uniform(vec![0.0], -1.0, 1.0).unwrap(),
        state,
        reward,
        done: false,
        t,
    }
}

#[test]
fn step_hook_rewards_routes_seen_in_good_episodes() {
    let config = ShapingConfig {
        epsilon: 0.5,
        pattern_len: 1,
        grid_count: 4,
        ..ShapingConfig::default()
    };
    let mut pipeline = ShapingPipeline::new(config, 2, 1, 0).unwrap();
    let good = [-0.9, -0.4, 0.1];
    let bad = [-0.9, -0.9, -0.9];

    for (t, &x) in good.iter().enumerate() {
        let out = pipeline.step_hook(fixed_step(x, 0.0, t), None).unwrap();
        assert_eq!(out.reward, 0.0, "empty memory leaves rewards alone");
    }
    pipeline.end_episode().unwrap();
    for (t, &x) in bad.iter().enumerate() {
        pipeline.step_hook(fixed_step(x, -1.0, t), None).unwrap();
    }
    pipeline.end_episode().unwrap();

    // cells: -0.9 -> 0 (mixed), -0.4 -> 1 (good), 0.1 -> 2 (good), 0.6 -> 3 (unseen)
    let memory = pipeline.memory();
    assert_eq!(memory.len(), 3);
    let mean = memory.mean_normalized_score().unwrap();
    let revised: Vec<f64> = [-0.9, -0.4, 0.6]
        .iter()
        .enumerate()
        .map(|(t, &x)| {
            pipeline
                .step_hook(fixed_step(x, 0.0, t), None)
                .unwrap()
                .reward
        })
        .collect();
    // start cell: mean of 0 and three -1 returns, normalized to 0
    assert!((revised[0] - (0.0 - mean) * 0.5).abs() < 1e-12);
    assert!((revised[1] - (1.0 - mean) * 0.5).abs() < 1e-12);
    assert!(revised[0] < 0.0 && revised[1] > 0.0);
    assert_eq!(revised[2], 0.0);
}

#[test]
fn disabled_shaping_still_maintains_memory() {
    let config = ShapingConfig {
        enabled: false,
        pattern_len: 1,
        ..ShapingConfig::default()
    };
    let mut pipeline = ShapingPipeline::new(config, 2, 1, 0).unwrap();
    for episode in 0..3 {
        for t in 0..5 {
            let out = pipeline
                .step_hook(fixed_step(-0.8 + 0.3 * t as f64, episode as f64, t), None)
                .unwrap();
            assert_eq!(out.reward, out.reward_raw);
        }
        pipeline.end_episode().unwrap();
    }
    assert_eq!(pipeline.memory().total_occurrences(), 15);
}

#[test]
fn million_distinct_patterns_never_merge() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut seen = HashSet::new();
    let mut keys = Vec::with_capacity(1_000_000);
    while keys.len() < 1_000_000 {
        let len = rng.random_range(1..=3) * 4;
        let indices: Vec<u16> = (0..len).map(|_| rng.random_range(0..12)).collect();
        if seen.insert(indices.clone()) {
            keys.push(PatternKey::from_flat(indices, 4, 12).unwrap());
        }
    }
    let mut memory = EpisodicMemory::with_capacity(MeasureMode::Score, 3, 12, keys.len());
    memory.observe_episode(&keys, 1.0).unwrap();
    assert_eq!(memory.len(), keys.len());
    assert!(keys
        .iter()
        .all(|k| memory.get(k).map(|e| e.visits) == Some(1)));
    let codes: HashSet<u64> = keys.iter().map(encode_key).collect();
    // colliding codes, if any, must still have produced separate entries
    assert!(codes.len() <= keys.len());
}
