use std::path::Path;

use super::HarnessError;
use crate::frame::Frame;

/// Writes `frame` as a binary PPM (`P6`), replacing any existing file.
pub fn dump_frame(frame: &Frame, path: &Path) -> Result<(), HarnessError> {
    let mut bytes = format!("P6\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    bytes.extend_from_slice(frame.pixels());
    std::fs::write(path, bytes).map_err(HarnessError::io(path))
}

/// Reads a binary PPM with maxval 255. Comments are accepted in the header.
pub fn read_ppm(path: &Path) -> Result<Frame, HarnessError> {
    let bytes = std::fs::read(path).map_err(HarnessError::io(path))?;
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(HarnessError::Ppm("truncated header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    if fields[0] != "P6" {
        return Err(HarnessError::Ppm(format!("unsupported magic {:?}", fields[0])));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| HarnessError::Ppm(format!("bad number {s:?}")));
    let (w, h, max) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    if max != 255 {
        return Err(HarnessError::Ppm(format!("unsupported maxval {max}")));
    }
    let raster = bytes.get(pos..).unwrap_or_default();
    if raster.len() != 3 * w * h {
        return Err(HarnessError::Ppm(format!("expected {} raster bytes, found {}", 3 * w * h, raster.len())));
    }
    Frame::new(w, h, raster.to_vec()).map_err(|e| HarnessError::Ppm(e.to_string()))
}
