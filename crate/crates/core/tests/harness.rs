use std::time::Instant;

use segrl::env::{make_env, Env, EnvError, ObjectCount, StepResult, MINICATCH, MINICATCH8};
use segrl::harness::{
    read_ppm, run_experiment, run_training, run_training_with, run_experiment_with, MetricsLog, Outcome, RunConfig,
    RunOutputs, METRICS_HEADER,
};
use segrl::nn::{NetShape, PolicyValueNet};
use segrl::pipeline::SegmenterKind;
use segrl::ppo::PpoHyper;
use segrl::Frame;

fn short(total: u64) -> RunConfig {
    RunConfig { ppo: PpoHyper { total_timesteps: total, ..PpoHyper::default() }, ..RunConfig::default() }
}

/// Ten native frames per episode; the terminal reward equals the reset seed
/// and does not depend on the actions taken.
struct SeedRewardEnv {
    seed: u64,
    t: usize,
    fail_after: Option<usize>,
    steps: usize,
}

impl SeedRewardEnv {
    fn boxed(fail_after: Option<usize>) -> Box<dyn Env> {
        Box::new(SeedRewardEnv { seed: 0, t: 0, fail_after, steps: 0 })
    }
}

impl Env for SeedRewardEnv {
    fn id(&self) -> &str {
        "SeedReward-v0"
    }
    fn action_count(&self) -> usize {
        3
    }
    fn reset(&mut self, seed: u64) -> Frame {
        self.seed = seed;
        self.t = 0;
        Frame::filled(160, 210, [(seed % 200) as u8, 30, 90])
    }
    fn step(&mut self, _action: usize) -> Result<StepResult, EnvError> {
        self.steps += 1;
        if self.fail_after.is_some_and(|n| self.steps > n) {
            return Err(EnvError::InvalidParameter("scripted failure".into()));
        }
        self.t += 1;
        let done = self.t == 10;
        let mut frame = Frame::filled(160, 210, [(self.seed % 200) as u8, 30, 90]);
        frame.fill_rect(10 * self.t as i64, 100, 8, 8, [250, 250, 250]);
        Ok(StepResult { frame, reward: if done { self.seed as f64 } else { 0.0 }, terminated: done, truncated: false })
    }
}

#[test]
fn step_budget_sets_the_number_of_updates() {
    let run = run_training(&short(256), &RunOutputs::default()).unwrap();
    assert_eq!(run.updates, 2);
    assert_eq!(run.global_step, 256);
    assert_eq!(run.metrics.update_count(), 2);
    assert!(run.sps() > 0.0);
}

fn without_sps(path: &std::path::Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| {
            let mut cols: Vec<&str> = l.split(',').collect();
            cols.remove(3);
            cols.join(",")
        })
        .collect()
}

#[test]
fn identical_configs_give_identical_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig { env_id: MINICATCH8.into(), ..short(640) };
    for name in ["a", "b"] {
        run_training(&config, &RunOutputs::in_dir(dir.path().join(name))).unwrap();
    }
    let a = without_sps(&dir.path().join("a/metrics.csv"));
    assert_eq!(a, without_sps(&dir.path().join("b/metrics.csv")));
    assert!(a.len() > 5);

    let rows = MetricsLog::read_csv(&dir.path().join("a/metrics.csv")).unwrap();
    assert!(rows.windows(2).all(|w| w[0].global_step < w[1].global_step));
    assert!(rows.iter().all(|r| r.sps > 0.0));
    let header = std::fs::read_to_string(dir.path().join("a/metrics.csv")).unwrap();
    assert_eq!(header.lines().next().unwrap(), METRICS_HEADER);

    // A different seed changes the run.
    run_training(&RunConfig { seed: 48, ..config }, &RunOutputs::in_dir(dir.path().join("c"))).unwrap();
    assert_ne!(a, without_sps(&dir.path().join("c/metrics.csv")));
}

#[test]
fn builtin_segmentation_overhead_is_below_ten_times() {
    let raw = run_training(&short(256), &RunOutputs::default()).unwrap();
    let mut seg = short(256);
    seg.pipeline.segmenter = SegmenterKind::Builtin;
    let seg = run_training(&seg, &RunOutputs::default()).unwrap();
    let ratio = raw.sps() / seg.sps();
    eprintln!("raw {:.1} sps, builtin {:.1} sps, overhead {ratio:.2}x", raw.sps(), seg.sps());
    assert!(ratio < 10.0);
}

#[test]
fn outputs_frames_and_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let outputs = RunOutputs {
        out_dir: Some(dir.path().join("run")),
        frames_out: Some(dir.path().join("frames")),
        frame_every: 50,
        ..Default::default()
    };
    let run = run_training(&short(128), &outputs).unwrap();
    let frame = read_ppm(&dir.path().join("frames/frame_00000050.ppm")).unwrap();
    assert_eq!((frame.width(), frame.height()), (160, 210));
    assert!(dir.path().join("frames/frame_00000100.ppm").exists());
    assert!(!dir.path().join("frames/frame_00000150.ppm").exists());

    let mut loaded = PolicyValueNet::<f32>::zeros(NetShape::atari(3)).unwrap();
    let bytes = std::fs::read(run.params_path.unwrap()).unwrap();
    loaded.load_params(&bytes[..]).unwrap();
    for (a, b) in loaded.params().iter().zip(run.net.params()) {
        assert_eq!(a.data(), b.data());
    }
    let config: RunConfig =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run/config.json")).unwrap()).unwrap();
    assert_eq!(config, short(128));
}

#[test]
fn env_failure_aborts_and_keeps_partial_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let metrics = dir.path().join("m.csv");
    let outputs = RunOutputs { metrics_out: Some(metrics.clone()), ..Default::default() };
    let factory = |_: &str| Ok(SeedRewardEnv::boxed(Some(4 * 200)));
    let err = run_training_with(&short(512), &outputs, &factory).unwrap_err();
    assert!(err.to_string().contains("scripted failure"));
    let rows = MetricsLog::read_csv(&metrics).unwrap();
    // Episodes take 3 agent steps (4 + 4 + 2 native frames); the failure hits
    // agent step 241, after 80 episodes and one update.
    assert_eq!(rows.iter().filter(|r| r.episodic_return.is_some()).count(), 80);
    assert_eq!(rows.iter().filter(|r| r.policy_loss.is_some()).count(), 1);
}

#[test]
fn action_independent_rewards_give_exactly_one_hundred_percent() {
    let factory = |_: &str| Ok(SeedRewardEnv::boxed(None));
    let config = RunConfig { env_id: "SeedReward-v0".into(), ..short(256) };
    let outcome = run_experiment_with(&config, None, &factory).unwrap();
    assert_eq!(outcome.config_diff, ["pipeline.segmenter"]);
    assert_eq!(outcome.raw.end_result, outcome.segmented.end_result);
    assert!(outcome.raw.end_result.unwrap() > 0.0);
    assert_eq!(outcome.percent, Some(100.0));
    // Rewards ignore the actions, so neither agent can leave the random band.
    assert_eq!(outcome.row.outcome, Outcome::NoLearning);
    assert_eq!(outcome.objects, None);
}

#[test]
fn single_and_multi_ball_rows_carry_object_count_tags() {
    let start = Instant::now();
    let one = run_experiment(&short(256), None).unwrap();
    let eight = run_experiment(&RunConfig { env_id: MINICATCH8.into(), ..short(256) }, None).unwrap();
    assert_eq!(one.objects, Some(ObjectCount::Low));
    assert_eq!(eight.objects, Some(ObjectCount::High));
    for o in [&one, &eight] {
        assert!(o.raw.end_result.is_some() && o.segmented.end_result.is_some());
        assert_eq!(o.row.game, o.env_id);
        assert!(o.raw.elapsed.as_nanos() > 0 && o.segmented.elapsed.as_nanos() > 0);
    }
    eprintln!("two short experiments took {:?}", start.elapsed());
}

#[test]
fn unknown_env_and_bad_num_envs_are_rejected() {
    let bad = RunConfig { env_id: "Nope-v0".into(), ..short(128) };
    assert!(run_training(&bad, &RunOutputs::default()).is_err());
    let bad = RunConfig { num_envs: 4, ..short(128) };
    assert!(run_training(&bad, &RunOutputs::default()).is_err());
    assert!(make_env(MINICATCH).is_ok());
}
