use super::rng::SplitMix64;
use super::{Env, EnvError, StepResult, MINIBRICKS};
use crate::frame::{Frame, ATARI_HEIGHT, ATARI_WIDTH};

const PADDLE_W: i64 = 16;
const PADDLE_H: i64 = 4;
const PADDLE_Y: i64 = 190;
const PADDLE_SPEED: i64 = 4;
const BALL: i64 = 4;
const WALL: i64 = 8;
const TOP: i64 = 24;
const BRICK_ROWS: usize = 3;
const BRICK_COLS: usize = 9;
const BRICK_W: i64 = 16;
const BRICK_H: i64 = 6;
const BRICK_TOP: i64 = 40;
const LIVES: u32 = 3;
const MAX_FRAMES: u32 = 10_000;

const ROW_COLORS: [[u8; 3]; BRICK_ROWS] = [[200, 72, 72], [180, 122, 48], [162, 162, 42]];
const WALL_COLOR: [u8; 3] = [142, 142, 142];
const PADDLE_COLOR: [u8; 3] = [200, 72, 72];

/// Breakout-like game with three brick rows.
///
/// Actions: 0 NOOP, 1 FIRE, 2 RIGHT, 3 LEFT. FIRE launches the ball when it
/// is not in play. Positions are integers and every bounce is an axis-aligned
/// velocity flip. The episode terminates when all lives are lost or every
/// brick is cleared, and is truncated after 10000 frames.
#[derive(Clone, Debug)]
pub struct MiniBricks {
    rng: SplitMix64,
    paddle_x: i64,
    ball: Option<(i64, i64, i64, i64)>,
    bricks: [[bool; BRICK_COLS]; BRICK_ROWS],
    lives: u32,
    score: u32,
    frames: u32,
    started: bool,
    done: bool,
}

impl Default for MiniBricks {
    fn default() -> Self {
        Self::new()
    }
}

impl MiniBricks {
    pub fn new() -> Self {
        MiniBricks {
            rng: SplitMix64::new(0),
            paddle_x: 72,
            ball: None,
            bricks: [[true; BRICK_COLS]; BRICK_ROWS],
            lives: LIVES,
            score: 0,
            frames: 0,
            started: false,
            done: false,
        }
    }

    pub fn lives(&self) -> u32 {
        self.lives
    }

    pub fn score(&self) -> u32 {
        self.score
    }

    fn brick_rect(row: usize, col: usize) -> (i64, i64) {
        (WALL + col as i64 * BRICK_W, BRICK_TOP + row as i64 * BRICK_H)
    }

    fn render(&self) -> Frame {
        let mut f = Frame::atari_black();
        let (w, h) = (ATARI_WIDTH as i64, ATARI_HEIGHT as i64);
        f.fill_rect(0, TOP - WALL, w, WALL, WALL_COLOR);
        f.fill_rect(0, TOP - WALL, WALL, h, WALL_COLOR);
        f.fill_rect(w - WALL, TOP - WALL, WALL, h, WALL_COLOR);
        // Score and lives as small block counters above the wall.
        for i in 0..(self.score.min(18) as i64) {
            f.fill_rect(4 + 8 * i, 4, 6, 6, [170, 170, 170]);
        }
        for i in 0..self.lives as i64 {
            f.fill_rect(w - 12 - 8 * i, 4, 6, 6, [120, 120, 220]);
        }
        for (r, row) in self.bricks.iter().enumerate() {
            for (c, alive) in row.iter().enumerate() {
                if *alive {
                    let (x, y) = Self::brick_rect(r, c);
                    f.fill_rect(x, y, BRICK_W - 1, BRICK_H - 1, ROW_COLORS[r]);
                }
            }
        }
        f.fill_rect(self.paddle_x, PADDLE_Y, PADDLE_W, PADDLE_H, PADDLE_COLOR);
        if let Some((x, y, _, _)) = self.ball {
            f.fill_rect(x, y, BALL, BALL, PADDLE_COLOR);
        }
        f
    }

    fn hit_brick(&mut self, x: i64, y: i64) -> bool {
        for r in 0..BRICK_ROWS {
            for c in 0..BRICK_COLS {
                if !self.bricks[r][c] {
                    continue;
                }
                let (bx, by) = Self::brick_rect(r, c);
                if x < bx + BRICK_W && bx < x + BALL && y < by + BRICK_H && by < y + BALL {
                    self.bricks[r][c] = false;
                    return true;
                }
            }
        }
        false
    }
}

impl Env for MiniBricks {
    fn id(&self) -> &str {
        MINIBRICKS
    }

    fn action_count(&self) -> usize {
        4
    }

    fn reset(&mut self, seed: u64) -> Frame {
        *self = MiniBricks {
            rng: SplitMix64::new(seed),
            started: true,
            ..MiniBricks::new()
        };
        self.render()
    }

    fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        if !self.started {
            return Err(EnvError::NotReset);
        }
        if self.done {
            return Err(EnvError::EpisodeOver);
        }
        let max_x = ATARI_WIDTH as i64 - WALL - PADDLE_W;
        match action {
            0 => {}
            1 => {
                if self.ball.is_none() {
                    let vx = if self.rng.below(2) == 0 { -2 } else { 2 };
                    self.ball = Some((self.paddle_x + PADDLE_W / 2 - BALL / 2, PADDLE_Y - BALL - 2, vx, -2));
                }
            }
            2 => self.paddle_x = (self.paddle_x + PADDLE_SPEED).min(max_x),
            3 => self.paddle_x = (self.paddle_x - PADDLE_SPEED).max(WALL),
            _ => return Err(EnvError::InvalidAction { action, count: 4 }),
        }

        let mut reward = 0.0;
        if let Some((mut x, mut y, mut vx, mut vy)) = self.ball {
            x += vx;
            y += vy;
            if x < WALL {
                x = WALL;
                vx = -vx;
            } else if x > ATARI_WIDTH as i64 - WALL - BALL {
                x = ATARI_WIDTH as i64 - WALL - BALL;
                vx = -vx;
            }
            if y < TOP {
                y = TOP;
                vy = -vy;
            }
            if self.hit_brick(x, y) {
                reward += 1.0;
                self.score += 1;
                vy = -vy;
            }
            let over_paddle = x < self.paddle_x + PADDLE_W && self.paddle_x < x + BALL;
            if vy > 0 && y + BALL >= PADDLE_Y && y + BALL <= PADDLE_Y + PADDLE_H && over_paddle {
                y = PADDLE_Y - BALL;
                vy = -vy;
                let center = x + BALL / 2 - (self.paddle_x + PADDLE_W / 2);
                vx = if center < 0 { -2 } else { 2 };
            }
            if y >= ATARI_HEIGHT as i64 {
                self.ball = None;
                self.lives -= 1;
            } else {
                self.ball = Some((x, y, vx, vy));
            }
        }

        self.frames += 1;
        let cleared = self.bricks.iter().flatten().all(|b| !b);
        let terminated = self.lives == 0 || cleared;
        let truncated = !terminated && self.frames >= MAX_FRAMES;
        self.done = terminated || truncated;
        Ok(StepResult { frame: self.render(), reward, terminated, truncated })
    }
}
