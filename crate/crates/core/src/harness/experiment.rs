use std::path::Path;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use super::{
    ema_smooth, improvement_percent, improvement_report, run_training_with, EnvFactory, HarnessError, ReportRow, RunConfig, RunOutputs,
    ScorePair,
};
use crate::env::{make_env, native_object_count, ObjectCount};
use crate::pipeline::{frame_skip_step, SegmenterKind};

/// EMA factor used for end results.
pub const EMA_FACTOR: f64 = 0.99;

/// Returns of a uniform-random policy acting once per aggregated frame.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaselineStats {
    pub returns: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation of the per-episode returns.
    pub std: f64,
}

impl BaselineStats {
    /// Whether `score` lies within one standard deviation of the mean.
    pub fn contains(&self, score: f64) -> bool {
        (score - self.mean).abs() <= self.std
    }
}

/// Plays `episodes` episodes with uniformly random actions. Episode `i`
/// resets with `seed + i`; actions come from a ChaCha8 stream seeded with `seed`.
pub fn random_policy_baseline(
    env_id: &str,
    episodes: usize,
    seed: u64,
    frameskip: u32,
) -> Result<BaselineStats, HarnessError> {
    random_policy_baseline_with(env_id, episodes, seed, frameskip, &make_env)
}

/// [`random_policy_baseline`] with a caller-supplied environment constructor.
pub fn random_policy_baseline_with(
    env_id: &str,
    episodes: usize,
    seed: u64,
    frameskip: u32,
    factory: EnvFactory<'_>,
) -> Result<BaselineStats, HarnessError> {
    if episodes < 2 || frameskip == 0 {
        return Err(HarnessError::Config("baseline needs >= 2 episodes and frameskip >= 1".into()));
    }
    let mut env = factory(env_id)?;
    let actions = env.action_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut returns = Vec::with_capacity(episodes);
    for i in 0..episodes {
        env.reset(seed.wrapping_add(i as u64));
        let mut total = 0.0;
        loop {
            let r = frame_skip_step(env.as_mut(), rng.random_range(0..actions), frameskip)?;
            total += r.reward;
            if r.done() {
                break;
            }
        }
        returns.push(total);
    }
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let std = (returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    Ok(BaselineStats { returns, mean, std })
}

/// Outcome of one training run within an experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub segmenter: SegmenterKind,
    pub episodes: usize,
    /// Last EMA-smoothed episodic return; `None` without a finished episode.
    pub end_result: Option<f64>,
    pub elapsed: Duration,
    pub sps: f64,
    pub global_step: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentOutcome {
    pub env_id: String,
    /// On-screen object-count class; `None` for environments outside the registry.
    pub objects: Option<ObjectCount>,
    pub raw: RunSummary,
    pub segmented: RunSummary,
    pub baseline: BaselineStats,
    pub pair: ScorePair,
    /// Improvement percentage of the end results, regardless of the
    /// learning classification. `None` if either is missing or raw is zero.
    pub percent: Option<f64>,
    pub row: ReportRow,
    /// JSON paths where the two effective configs differ.
    pub config_diff: Vec<String>,
}

impl ExperimentOutcome {
    /// Raw-run throughput divided by segmented-run throughput.
    pub fn overhead(&self) -> f64 {
        self.raw.sps / self.segmented.sps
    }
}

/// The raw and segmented variants of `base`. They differ only in the
/// segmenter selection; if `base` already selects a segmenter it is kept for
/// the segmented run, otherwise the builtin one is used.
pub fn paired_configs(base: &RunConfig) -> (RunConfig, RunConfig) {
    let mut raw = base.clone();
    raw.pipeline.segmenter = SegmenterKind::None;
    let mut seg = base.clone();
    if seg.pipeline.segmenter == SegmenterKind::None {
        seg.pipeline.segmenter = SegmenterKind::Builtin;
    }
    (raw, seg)
}

/// Dotted JSON paths at which the serialized configs differ.
pub fn config_diff(a: &RunConfig, b: &RunConfig) -> Vec<String> {
    fn walk(path: &str, a: &Value, b: &Value, out: &mut Vec<String>) {
        match (a, b) {
            (Value::Object(x), Value::Object(y)) => {
                let mut keys: Vec<&String> = x.keys().chain(y.keys()).collect();
                keys.sort();
                keys.dedup();
                for k in keys {
                    let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                    walk(&p, x.get(k).unwrap_or(&Value::Null), y.get(k).unwrap_or(&Value::Null), out);
                }
            }
            _ if a != b => out.push(path.to_string()),
            _ => {}
        }
    }
    let to_value = |c: &RunConfig| serde_json::to_value(c).expect("config is always serializable");
    let mut out = Vec::new();
    walk("", &to_value(a), &to_value(b), &mut out);
    out
}

/// Whether a config path belongs to the segmentation stage.
pub fn is_segmentation_field(path: &str) -> bool {
    ["pipeline.segmenter", "pipeline.seg", "pipeline.remote"]
        .iter()
        .any(|p| path == *p || path.starts_with(&format!("{p}.")))
}

fn summarize(run: &super::TrainingRun) -> Result<RunSummary, HarnessError> {
    let returns = run.metrics.episodic_returns();
    let end_result = if returns.is_empty() { None } else { ema_smooth(&returns, EMA_FACTOR)?.last().copied() };
    Ok(RunSummary {
        segmenter: run.config.pipeline.segmenter,
        episodes: returns.len(),
        end_result,
        elapsed: run.elapsed,
        sps: run.sps(),
        global_step: run.global_step,
    })
}

/// Trains a raw and a segmented agent with otherwise identical settings and
/// compares their EMA end results. With `out_dir`, each run writes into a
/// `raw/` or `segmented/` subdirectory.
///
/// A game counts as "no learning" when a run finished no episode, or when both
/// end results fall within one standard deviation of a 100-episode
/// random-policy baseline.
pub fn run_experiment(base: &RunConfig, out_dir: Option<&Path>) -> Result<ExperimentOutcome, HarnessError> {
    run_experiment_with(base, out_dir, &make_env)
}

/// [`run_experiment`] with a caller-supplied environment constructor.
pub fn run_experiment_with(
    base: &RunConfig,
    out_dir: Option<&Path>,
    factory: EnvFactory<'_>,
) -> Result<ExperimentOutcome, HarnessError> {
    let (raw_cfg, seg_cfg) = paired_configs(base);
    let config_diff = config_diff(&raw_cfg, &seg_cfg);
    if let Some(bad) = config_diff.iter().find(|p| !is_segmentation_field(p)) {
        return Err(HarnessError::Config(format!("paired runs differ outside segmentation: {bad}")));
    }
    let outputs = |name: &str| out_dir.map(|d| RunOutputs::in_dir(d.join(name))).unwrap_or_default();
    let raw = summarize(&run_training_with(&raw_cfg, &outputs("raw"), factory)?)?;
    let segmented = summarize(&run_training_with(&seg_cfg, &outputs("segmented"), factory)?)?;
    let baseline = random_policy_baseline_with(&base.env_id, 100, base.seed, base.pipeline.frameskip, factory)?;

    let no_learning = match (raw.end_result, segmented.end_result) {
        (Some(r), Some(s)) => baseline.contains(r) && baseline.contains(s),
        _ => true,
    };
    let pair = ScorePair {
        game: base.env_id.clone(),
        raw: raw.end_result,
        segmented: segmented.end_result,
        no_learning,
    };
    let percent = raw.end_result.zip(segmented.end_result).and_then(|(r, s)| improvement_percent(r, s));
    let row = improvement_report(std::slice::from_ref(&pair)).rows.remove(0);
    Ok(ExperimentOutcome {
        env_id: base.env_id.clone(),
        objects: native_object_count(&base.env_id).ok(),
        raw,
        segmented,
        baseline,
        pair,
        percent,
        row,
        config_diff,
    })
}
