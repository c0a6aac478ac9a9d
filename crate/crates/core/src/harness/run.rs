use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::agents::{build_agent, Agent};
use crate::envs::{make_env, Environment};
use crate::error::{Error, Result};
use crate::memory::{EpisodicMemory, MeasureMode};
use crate::shaping::{ShapingPipeline, Transition};

use super::config::RunConfig;
use super::metrics::{MetricsRow, MetricsWriter};

const TRAIN_STREAM: u64 = 1;
const EVAL_STREAM: u64 = 2;
const PROJECTION_STREAM: u64 = 3;

/// Deterministic per-purpose seed.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeedStatus {
    Completed,
    Diverged { step: u64, message: String },
}

#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    pub dir: PathBuf,
    pub status: SeedStatus,
    pub rows: Vec<MetricsRow>,
    pub memory: EpisodicMemory,
    /// Pattern occurrences fed to the memory, counted by the loop itself.
    pub occurrences: u64,
}

impl SeedOutcome {
    pub fn metrics_path(&self) -> PathBuf {
        self.dir.join("metrics.csv")
    }

    pub fn memory_path(&self) -> PathBuf {
        self.dir.join("memory.txt")
    }
}

/// Runs every seed in order, writing `<outdir>/<seed>/{metrics.csv,
/// memory.txt, run.toml}`. A diverged seed ends with a NaN eval row and does
/// not stop the others.
pub fn run(config: &RunConfig) -> Result<Vec<SeedOutcome>> {
    config.validate()?;
    config
        .seeds
        .iter()
        .map(|&seed| run_seed(config, seed))
        .collect()
}

pub fn run_seed(config: &RunConfig, seed: u64) -> Result<SeedOutcome> {
    let dir = config.outdir.join(seed.to_string());
    fs::create_dir_all(&dir)?;
    let mut seed_config = config.clone();
    seed_config.seeds = vec![seed];
    fs::write(dir.join("run.toml"), seed_config.to_toml()?)?;

    let file = fs::File::create(dir.join("metrics.csv"))?;
    let mut writer = MetricsWriter::new(BufWriter::new(file));
    let mut runner = SeedRunner::new(config, seed)?;
    let result = runner.train(&mut writer);
    writer.flush()?;
    let status = match result {
        Ok(()) => SeedStatus::Completed,
        Err(Error::Diverged { update, message }) => SeedStatus::Diverged {
            step: runner.step,
            message: format!("update {update}: {message}"),
        },
        Err(e) => return Err(e),
    };
    let memory = runner.pipeline.memory().clone();
    memory.snapshot(dir.join("memory.txt"))?;
    Ok(SeedOutcome {
        seed,
        dir,
        status,
        rows: runner.rows,
        memory,
        occurrences: runner.occurrences,
    })
}

struct SeedRunner<'a> {
    config: &'a RunConfig,
    seed: u64,
    env: Box<dyn Environment>,
    eval_env: Box<dyn Environment>,
    agent: Box<dyn Agent>,
    pipeline: ShapingPipeline,
    rows: Vec<MetricsRow>,
    step: u64,
    episodes: u64,
    evals: u64,
    occurrences: u64,
    started: Instant,
}

impl<'a> SeedRunner<'a> {
    fn new(config: &'a RunConfig, seed: u64) -> Result<Self> {
        let env = make_env(&config.env)?;
        let eval_env = make_env(&config.env)?;
        let spec = env.spec().clone();
        let agent = build_agent(config.agent, &config.agent_config, &spec, seed)?;
        let pipeline = ShapingPipeline::new(
            config.shaping.clone(),
            spec.state_dim,
            spec.action_lower.len(),
            derive_seed(seed, PROJECTION_STREAM, 0),
        )?;
        Ok(Self {
            config,
            seed,
            env,
            eval_env,
            agent,
            pipeline,
            rows: Vec::new(),
            step: 0,
            episodes: 0,
            evals: 0,
            occurrences: 0,
            started: Instant::now(),
        })
    }

    fn train<W: Write>(&mut self, out: &mut MetricsWriter<W>) -> Result<()> {
        let spec = self.env.spec().clone();
        let warmup = self.agent.warmup_steps() as u64;
        let mut state = self.env.reset(derive_seed(self.seed, TRAIN_STREAM, 0));
        let mut t = 0;
        while self.step < self.config.total_steps {
            self.step += 1;
            let action = if self.step <= warmup {
                self.agent.random_action()
            } else {
                self.agent.act(&state, true)
            };
            let out_step = self.env.step(&action)?;
            let q = (self.pipeline.config().measure_mode == MeasureMode::QValue)
                .then(|| self.agent.q_estimate(&state, &action));
            let transition = Transition {
                state: spec.state_vector(state)?,
                action: spec.action_vector(&action)?,
                reward: out_step.reward,
                next_state: spec.state_vector(out_step.state.clone())?,
                done: out_step.done,
                t,
            };
            let revised = self.pipeline.step_hook(transition, q)?;
            self.agent.observe(&revised)?;
            if self.step > warmup {
                if let Err(e) = self.agent.train() {
                    self.record_failure(out)?;
                    return Err(e);
                }
            }
            t += 1;
            let over = out_step.episode_over();
            state = out_step.state;

            if over {
                self.occurrences += self.pipeline.episode_len() as u64;
                let summary = self.pipeline.end_episode()?;
                self.episodes += 1;
                let row = self.row(Some((summary.return_raw, summary.return_revised)), None);
                self.emit(out, row)?;
                state = self
                    .env
                    .reset(derive_seed(self.seed, TRAIN_STREAM, self.episodes));
                t = 0;
            }
            if self.step % self.config.eval_every == 0 {
                let mean = self.evaluate()?;
                let row = self.row(None, Some(mean));
                self.emit(out, row)?;
            }
        }
        Ok(())
    }

    /// Mean raw return of greedy episodes on the separate eval environment.
    fn evaluate(&mut self) -> Result<f64> {
        let episodes = self.config.eval_episodes;
        let mut total = 0.0;
        for k in 0..episodes {
            let index = self.evals * episodes as u64 + k as u64;
            let mut state = self
                .eval_env
                .reset(derive_seed(self.seed, EVAL_STREAM, index));
            loop {
                let action = self.agent.greedy(&state);
                let out = self.eval_env.step(&action)?;
                total += out.reward;
                if out.episode_over() {
                    break;
                }
                state = out.state;
            }
        }
        self.evals += 1;
        Ok(total / episodes as f64)
    }

    fn row(&self, train: Option<(f64, f64)>, eval: Option<f64>) -> MetricsRow {
        let memory = self.pipeline.memory();
        MetricsRow {
            step: self.step,
            episode: self.episodes,
            train_return_raw: train.map(|t| t.0),
            train_return_revised: train.map(|t| t.1),
            eval_return_mean: eval,
            memory_entries: memory.len() as u64,
            mean_score_norm: memory.mean_normalized_score().ok(),
            once_visited_fraction: memory.once_visited_fraction(),
            wall_clock_ms: self.started.elapsed().as_millis() as u64,
        }
    }

    fn emit<W: Write>(&mut self, out: &mut MetricsWriter<W>, row: MetricsRow) -> Result<()> {
        out.write(&row)?;
        self.rows.push(row);
        Ok(())
    }

    fn record_failure<W: Write>(&mut self, out: &mut MetricsWriter<W>) -> Result<()> {
        let row = self.row(None, Some(f64::NAN));
        self.emit(out, row)
    }
}

/// Directories `<outdir>/<seed>` that hold a `metrics.csv`, sorted by seed.
pub fn seed_dirs(outdir: &Path) -> Result<Vec<(u64, PathBuf)>> {
    let mut dirs = Vec::new();
    for entry in fs::read_dir(outdir)? {
        let path = entry?.path();
        let seed = path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.parse().ok());
        if let Some(seed) = seed {
            if path.join("metrics.csv").is_file() {
                dirs.push((seed, path));
            }
        }
    }
    dirs.sort();
    Ok(dirs)
}
