use super::rng::SplitMix64;
use super::{Env, EnvError, StepResult, MINICATCH};
use crate::frame::{Frame, ATARI_HEIGHT, ATARI_WIDTH};

pub const PADDLE_WIDTH: i64 = 16;
pub const PADDLE_HEIGHT: i64 = 4;
/// Top row of the paddle band `[200, 204)`.
pub const PADDLE_Y: i64 = 200;
pub const PADDLE_START_X: i64 = 72;
pub const PADDLE_MAX_X: i64 = ATARI_WIDTH as i64 - PADDLE_WIDTH;
pub const PADDLE_SPEED: i64 = 2;
pub const BALL_SIZE: i64 = 4;
pub const BALL_SPEED: i64 = 2;
/// Ball columns are multiples of [`BALL_SIZE`] in `[0, 156]`.
pub const BALL_COLUMNS: u32 = (ATARI_WIDTH as i64 / BALL_SIZE) as u32;
pub const BALLS_PER_EPISODE: u32 = 10;
pub const MAX_BALLS: usize = 8;

const WHITE: [u8; 3] = [255, 255, 255];
const BORDER: [u8; 3] = [142, 142, 142];
const CAUGHT: [u8; 3] = [92, 186, 92];
const MISSED: [u8; 3] = [200, 72, 72];
const BORDER_WIDTH: i64 = 2;

#[derive(Clone, Debug)]
enum Spawner {
    Seeded(SplitMix64),
    /// Test double: always the same column.
    Fixed(u32),
}

impl Spawner {
    fn column(&mut self) -> u32 {
        match self {
            Spawner::Seeded(rng) => rng.below(BALL_COLUMNS),
            Spawner::Fixed(c) => *c,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ball {
    pub x: i64,
    pub y: i64,
}

/// Catch game: move a paddle at the bottom of the screen under falling balls.
///
/// Actions: 0 NOOP, 1 LEFT, 2 RIGHT. Each resolved ball yields +1 when it
/// overlaps the paddle and -1 otherwise; the episode ends after ten balls.
/// With several balls they start at staggered heights.
#[derive(Clone, Debug)]
pub struct MiniCatch {
    id: &'static str,
    ball_count: usize,
    fixed_column: Option<u32>,
    spawner: Spawner,
    paddle_x: i64,
    balls: Vec<Ball>,
    caught: Vec<bool>,
    started: bool,
    done: bool,
}

impl MiniCatch {
    pub fn new(ball_count: usize) -> Result<Self, EnvError> {
        if !(1..=MAX_BALLS).contains(&ball_count) {
            return Err(EnvError::InvalidParameter(format!(
                "MiniCatch needs 1..={MAX_BALLS} balls, got {ball_count}"
            )));
        }
        Ok(MiniCatch {
            id: MINICATCH,
            ball_count,
            fixed_column: None,
            spawner: Spawner::Fixed(0),
            paddle_x: PADDLE_START_X,
            balls: Vec::new(),
            caught: Vec::new(),
            started: false,
            done: false,
        })
    }

    /// Every ball spawns in `column` regardless of the seed.
    pub fn with_fixed_column(mut self, column: u32) -> Self {
        self.fixed_column = Some(column.min(BALL_COLUMNS - 1));
        self
    }

    pub(crate) fn with_id(mut self, id: &'static str) -> Self {
        self.id = id;
        self
    }

    pub fn paddle_x(&self) -> i64 {
        self.paddle_x
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn balls_resolved(&self) -> u32 {
        self.caught.len() as u32
    }

    fn spawn_x(&mut self) -> i64 {
        self.spawner.column() as i64 * BALL_SIZE
    }

    fn overlaps_paddle(&self, ball: Ball) -> bool {
        ball.x < self.paddle_x + PADDLE_WIDTH && self.paddle_x < ball.x + BALL_SIZE
    }

    pub fn render(&self) -> Frame {
        let mut f = Frame::atari_black();
        let (w, h) = (ATARI_WIDTH as i64, ATARI_HEIGHT as i64);
        f.fill_rect(0, 0, w, BORDER_WIDTH, BORDER);
        f.fill_rect(0, h - BORDER_WIDTH, w, BORDER_WIDTH, BORDER);
        f.fill_rect(0, 0, BORDER_WIDTH, h, BORDER);
        f.fill_rect(w - BORDER_WIDTH, 0, BORDER_WIDTH, h, BORDER);
        // Score strip: one block per resolved ball.
        for (i, caught) in self.caught.iter().enumerate() {
            let color = if *caught { CAUGHT } else { MISSED };
            f.fill_rect(4 + 8 * i as i64, 4, 6, 4, color);
        }
        f.fill_rect(self.paddle_x, PADDLE_Y, PADDLE_WIDTH, PADDLE_HEIGHT, WHITE);
        for b in &self.balls {
            f.fill_rect(b.x, b.y, BALL_SIZE, BALL_SIZE, WHITE);
        }
        f
    }
}

impl Env for MiniCatch {
    fn id(&self) -> &str {
        self.id
    }

    fn action_count(&self) -> usize {
        3
    }

    fn reset(&mut self, seed: u64) -> Frame {
        self.spawner = match self.fixed_column {
            Some(c) => Spawner::Fixed(c),
            None => Spawner::Seeded(SplitMix64::new(seed)),
        };
        self.paddle_x = PADDLE_START_X;
        self.caught.clear();
        self.balls.clear();
        let travel = (PADDLE_Y - BALL_SIZE) / BALL_SPEED;
        for i in 0..self.ball_count as i64 {
            let x = self.spawn_x();
            let y = BALL_SPEED * (i * travel / self.ball_count as i64);
            self.balls.push(Ball { x, y });
        }
        self.started = true;
        self.done = false;
        self.render()
    }

    fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        if !self.started {
            return Err(EnvError::NotReset);
        }
        if self.done {
            return Err(EnvError::EpisodeOver);
        }
        let dx = match action {
            0 => 0,
            1 => -PADDLE_SPEED,
            2 => PADDLE_SPEED,
            _ => return Err(EnvError::InvalidAction { action, count: 3 }),
        };
        self.paddle_x = (self.paddle_x + dx).clamp(0, PADDLE_MAX_X);

        let mut reward = 0.0;
        for i in 0..self.balls.len() {
            self.balls[i].y += BALL_SPEED;
            let ball = self.balls[i];
            // Bottom row of the ball has entered the paddle band.
            if ball.y + BALL_SIZE - 1 >= PADDLE_Y {
                let hit = self.overlaps_paddle(ball);
                reward += if hit { 1.0 } else { -1.0 };
                self.caught.push(hit);
                if self.caught.len() as u32 >= BALLS_PER_EPISODE {
                    self.done = true;
                    break;
                }
                let x = self.spawn_x();
                self.balls[i] = Ball { x, y: 0 };
            }
        }
        Ok(StepResult {
            frame: self.render(),
            reward,
            terminated: self.done,
            truncated: false,
        })
    }
}
