use thiserror::Error;

pub const ATARI_WIDTH: usize = 160;
pub const ATARI_HEIGHT: usize = 210;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("frame of {width}x{height} needs {expected} bytes, got {actual}")]
pub struct FrameSizeError {
    pub width: usize,
    pub height: usize,
    pub expected: usize,
    pub actual: usize,
}

/// Row-major RGB image. Environments emit 160x210; tests and the wire
/// protocol also use other sizes.
#[derive(Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, FrameSizeError> {
        let expected = width * height * 3;
        if pixels.len() != expected {
            return Err(FrameSizeError { width, height, expected, actual: pixels.len() });
        }
        Ok(Frame { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        let pixels = rgb.iter().copied().cycle().take(width * height * 3).collect();
        Frame { width, height, pixels }
    }

    /// A black 160x210 frame.
    pub fn atari_black() -> Self {
        Self::filled(ATARI_WIDTH, ATARI_HEIGHT, [0, 0, 0])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    /// Fills the rectangle `[x, x+w) x [y, y+h)`, clipped to the frame.
    pub fn fill_rect(&mut self, x: i64, y: i64, w: i64, h: i64, rgb: [u8; 3]) {
        let x0 = x.max(0) as usize;
        let y0 = y.max(0) as usize;
        let x1 = (x + w).clamp(0, self.width as i64) as usize;
        let y1 = (y + h).clamp(0, self.height as i64) as usize;
        for yy in y0..y1 {
            for xx in x0..x1 {
                self.set_pixel(xx, yy, rgb);
            }
        }
    }

    pub fn is_atari_sized(&self) -> bool {
        self.width == ATARI_WIDTH && self.height == ATARI_HEIGHT
    }
}

impl std::fmt::Debug for Frame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Frame({}x{})", self.width, self.height)
    }
}
