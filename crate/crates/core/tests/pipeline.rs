use sha2::{Digest, Sha256};
use segrl::env::{make_env, Env, EnvError, StepResult, MINICATCH, MINICATCH8};
use segrl::pipeline::{Pipeline, PipelineConfig, SegmenterKind};
use segrl::segment::RenderMode;
use segrl::Frame;

/// Emits a fixed reward sequence and a frame whose color encodes the step.
struct ScriptedEnv {
    rewards: Vec<f64>,
    t: usize,
}

impl ScriptedEnv {
    fn frame(&self) -> Frame {
        let v = (self.t * 10 % 256) as u8;
        Frame::filled(160, 210, [v, v, v])
    }
}

impl Env for ScriptedEnv {
    fn id(&self) -> &str {
        "Scripted-v0"
    }
    fn action_count(&self) -> usize {
        2
    }
    fn reset(&mut self, _seed: u64) -> Frame {
        self.t = 0;
        self.frame()
    }
    fn step(&mut self, _action: usize) -> Result<StepResult, EnvError> {
        if self.t >= self.rewards.len() {
            return Err(EnvError::EpisodeOver);
        }
        let reward = self.rewards[self.t];
        self.t += 1;
        Ok(StepResult { frame: self.frame(), reward, terminated: self.t == self.rewards.len(), truncated: false })
    }
}

fn scripted(rewards: &[f64], clip: bool) -> Pipeline {
    let env = Box::new(ScriptedEnv { rewards: rewards.to_vec(), t: 0 });
    Pipeline::build(env, PipelineConfig { clip_rewards: clip, ..Default::default() }).unwrap()
}

#[test]
fn frameskip_sums_and_clips_rewards() {
    let mut p = scripted(&[1.0, 2.0, 0.0, 3.0, -1.0, -1.0, 0.0, 0.0, 0.5], false);
    p.reset(0).unwrap();
    assert_eq!(p.step(0).unwrap().reward, 6.0);
    assert_eq!(p.step(0).unwrap().reward, -2.0);
    let last = p.step(0).unwrap();
    assert_eq!(last.reward, 0.5);
    assert!(last.terminated);

    let mut p = scripted(&[1.0, 2.0, 0.0, 3.0, -1.0, -1.0, 0.0, 0.0], true);
    p.reset(0).unwrap();
    let s = p.step(0).unwrap();
    assert_eq!((s.reward, s.raw_reward), (1.0, 6.0));
    assert_eq!(p.step(0).unwrap().reward, -1.0);
}

#[test]
fn aggregated_frame_is_max_of_last_two() {
    let mut p = scripted(&[0.0; 8], false);
    p.reset(0).unwrap();
    let s = p.step(0).unwrap();
    // Native frames 3 and 4 have gray levels 30 and 40; the newest slice holds 40.
    let newest = s.obs.slice(3);
    assert!(newest.iter().all(|&v| (v * 255.0).round() == 40.0));
    assert!(s.obs.slice(0).iter().all(|&v| v == 0.0));
}

fn run(config: PipelineConfig, env_id: &str, steps: usize) -> Vec<Vec<f32>> {
    let mut p = Pipeline::build(make_env(env_id).unwrap(), config).unwrap();
    let mut out = vec![p.reset(47).unwrap().data().to_vec()];
    for i in 0..steps {
        let s = p.step(i % 3).unwrap();
        out.push(s.obs.data().to_vec());
        if s.done() {
            out.push(p.reset(48).unwrap().data().to_vec());
        }
    }
    out
}

fn digest(obs: &[Vec<f32>]) -> String {
    let mut h = Sha256::new();
    for o in obs {
        for v in o {
            h.update(((v * 255.0).round() as u8).to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn raw_pipeline_output_is_frozen() {
    // Regression golden for the segmenter-free stack on a fixed action script.
    let obs = run(PipelineConfig::default(), MINICATCH, 60);
    assert_eq!(digest(&obs), RAW_GOLDEN);
}

const RAW_GOLDEN: &str = "1b3cbbfc754a280cd8fb83769f58e7ea333100dd59d3fda0ade2807e593c0e89";

#[test]
fn identical_seeds_and_actions_give_identical_observations() {
    let cfg = PipelineConfig { segmenter: SegmenterKind::Builtin, ..Default::default() };
    assert_eq!(run(cfg.clone(), MINICATCH8, 40), run(cfg, MINICATCH8, 40));
}

#[test]
fn overlay_alpha_zero_equals_raw_and_one_equals_replace() {
    let builtin = |mode| {
        let mut c = PipelineConfig { segmenter: SegmenterKind::Builtin, ..Default::default() };
        c.seg.mode = mode;
        c
    };
    for env in [MINICATCH, MINICATCH8] {
        let raw = run(PipelineConfig::default(), env, 50);
        assert_eq!(run(builtin(RenderMode::Overlay(0.0)), env, 50), raw);
        let replace = run(builtin(RenderMode::Replace), env, 50);
        assert_ne!(replace, raw);
        assert_eq!(run(builtin(RenderMode::Overlay(1.0)), env, 50), replace);
    }
}

#[test]
fn step_before_reset_is_rejected() {
    let mut p = Pipeline::build(make_env(MINICATCH).unwrap(), PipelineConfig::default()).unwrap();
    assert!(p.step(0).is_err());
}
