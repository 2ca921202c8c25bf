use std::io::{self, Read, Write};

use thiserror::Error;

use crate::frame::Frame;
use crate::segment::SegmentLabelMap;

pub const MAGIC: [u8; 4] = *b"SEG1";
pub const REQUEST_HEADER_LEN: usize = 12;
pub const RESPONSE_HEADER_LEN: usize = 5;
/// Largest accepted frame, in pixels.
pub const MAX_PIXELS: usize = 1 << 24;

pub const STATUS_OK: u8 = 0;
pub const STATUS_MODEL_ERROR: u8 = 1;
pub const STATUS_BAD_REQUEST: u8 = 2;

/// Malformed message. Offsets are byte positions within the message.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtoError {
    #[error("bad magic at offset 0: expected \"SEG1\", found {found:02X?}")]
    BadMagic { found: Vec<u8> },
    #[error("header truncated at offset {offset}: need {needed} more byte(s)")]
    HeaderShort { offset: usize, needed: usize },
    #[error("payload short by {short_by} byte(s) (payload starts at offset {offset})")]
    PayloadShort { offset: usize, short_by: usize },
    #[error("{extra} trailing byte(s) after payload ending at offset {offset}")]
    TrailingBytes { offset: usize, extra: usize },
    #[error("frame {width}x{height} at offset 4 exceeds the {max}-pixel limit or is empty")]
    BadDimensions { width: u32, height: u32, max: usize },
    #[error("unknown status byte {status} at offset 0")]
    UnknownStatus { status: u8 },
    #[error("invalid label payload at offset {offset}: {reason}")]
    InvalidLabels { offset: usize, reason: String },
}

/// Decoded response. Error statuses carry no label payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SegResponse {
    Labels(SegmentLabelMap),
    ModelError,
    BadRequest,
}

impl SegResponse {
    pub fn status(&self) -> u8 {
        match self {
            SegResponse::Labels(_) => STATUS_OK,
            SegResponse::ModelError => STATUS_MODEL_ERROR,
            SegResponse::BadRequest => STATUS_BAD_REQUEST,
        }
    }
}

/// `"SEG1" | width u32 BE | height u32 BE | RGB bytes`.
pub fn encode_request(frame: &Frame) -> Vec<u8> {
    let mut out = Vec::with_capacity(REQUEST_HEADER_LEN + frame.pixels().len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&(frame.width() as u32).to_be_bytes());
    out.extend_from_slice(&(frame.height() as u32).to_be_bytes());
    out.extend_from_slice(frame.pixels());
    out
}

/// Validates a request header; returns `(width, height)`.
pub fn decode_request_header(header: &[u8]) -> Result<(usize, usize), ProtoError> {
    if header.len() < 4 || header[..4] != MAGIC {
        if header.len() < 4 && MAGIC.starts_with(header) {
            return Err(ProtoError::HeaderShort { offset: header.len(), needed: REQUEST_HEADER_LEN - header.len() });
        }
        return Err(ProtoError::BadMagic { found: header[..header.len().min(4)].to_vec() });
    }
    if header.len() < REQUEST_HEADER_LEN {
        return Err(ProtoError::HeaderShort { offset: header.len(), needed: REQUEST_HEADER_LEN - header.len() });
    }
    let width = u32::from_be_bytes(header[4..8].try_into().unwrap());
    let height = u32::from_be_bytes(header[8..12].try_into().unwrap());
    let pixels = width as u64 * height as u64;
    if pixels == 0 || pixels > MAX_PIXELS as u64 {
        return Err(ProtoError::BadDimensions { width, height, max: MAX_PIXELS });
    }
    Ok((width as usize, height as usize))
}

pub fn decode_request(bytes: &[u8]) -> Result<Frame, ProtoError> {
    let (w, h) = decode_request_header(&bytes[..bytes.len().min(REQUEST_HEADER_LEN)])?;
    let payload = &bytes[REQUEST_HEADER_LEN..];
    let want = 3 * w * h;
    if payload.len() < want {
        return Err(ProtoError::PayloadShort { offset: REQUEST_HEADER_LEN, short_by: want - payload.len() });
    }
    if payload.len() > want {
        return Err(ProtoError::TrailingBytes { offset: REQUEST_HEADER_LEN + want, extra: payload.len() - want });
    }
    Ok(Frame::new(w, h, payload.to_vec()).expect("length checked above"))
}

/// `status u8 | segment count u32 BE | labels u32 BE` (labels only when status is 0).
pub fn encode_response(resp: &SegResponse) -> Vec<u8> {
    match resp {
        SegResponse::Labels(map) => {
            let mut out = Vec::with_capacity(RESPONSE_HEADER_LEN + 4 * map.labels().len());
            out.push(STATUS_OK);
            out.extend_from_slice(&map.segment_count().to_be_bytes());
            for l in map.labels() {
                out.extend_from_slice(&l.to_be_bytes());
            }
            out
        }
        other => {
            let mut out = vec![other.status()];
            out.extend_from_slice(&0u32.to_be_bytes());
            out
        }
    }
}

/// Returns `(status, segment count)` after checking the status byte.
pub fn decode_response_header(header: &[u8]) -> Result<(u8, u32), ProtoError> {
    if header.len() < RESPONSE_HEADER_LEN {
        return Err(ProtoError::HeaderShort { offset: header.len(), needed: RESPONSE_HEADER_LEN - header.len() });
    }
    let status = header[0];
    if status > STATUS_BAD_REQUEST {
        return Err(ProtoError::UnknownStatus { status });
    }
    Ok((status, u32::from_be_bytes(header[1..5].try_into().unwrap())))
}

fn decode_labels(payload: &[u8], width: usize, height: usize, count: u32) -> Result<SegmentLabelMap, ProtoError> {
    let labels = payload
        .chunks_exact(4)
        .map(|c| u32::from_be_bytes(c.try_into().unwrap()))
        .collect();
    SegmentLabelMap::new(width, height, labels, count).map_err(|e| ProtoError::InvalidLabels {
        offset: RESPONSE_HEADER_LEN,
        reason: e.to_string(),
    })
}

/// Decodes a response to a `width x height` request.
pub fn decode_response(bytes: &[u8], width: usize, height: usize) -> Result<SegResponse, ProtoError> {
    let (status, count) = decode_response_header(&bytes[..bytes.len().min(RESPONSE_HEADER_LEN)])?;
    let payload = &bytes[RESPONSE_HEADER_LEN..];
    let want = if status == STATUS_OK { 4 * width * height } else { 0 };
    if payload.len() < want {
        return Err(ProtoError::PayloadShort { offset: RESPONSE_HEADER_LEN, short_by: want - payload.len() });
    }
    if payload.len() > want {
        return Err(ProtoError::TrailingBytes { offset: RESPONSE_HEADER_LEN + want, extra: payload.len() - want });
    }
    match status {
        STATUS_OK => Ok(SegResponse::Labels(decode_labels(payload, width, height, count)?)),
        STATUS_MODEL_ERROR => Ok(SegResponse::ModelError),
        _ => Ok(SegResponse::BadRequest),
    }
}

/// Error while reading a message from a stream.
#[derive(Debug, Error)]
pub enum ReadError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Proto(#[from] ProtoError),
}

/// Reads exactly one request from `r`.
pub fn read_request<R: Read>(r: &mut R) -> Result<Frame, ReadError> {
    let mut header = [0u8; REQUEST_HEADER_LEN];
    r.read_exact(&mut header[..4])?;
    if header[..4] != MAGIC {
        return Err(ProtoError::BadMagic { found: header[..4].to_vec() }.into());
    }
    r.read_exact(&mut header[4..])?;
    let (w, h) = decode_request_header(&header)?;
    let mut payload = vec![0u8; 3 * w * h];
    r.read_exact(&mut payload)?;
    Ok(Frame::new(w, h, payload).expect("sized from header"))
}

pub fn write_message<W: Write>(w: &mut W, bytes: &[u8]) -> io::Result<()> {
    w.write_all(bytes)?;
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_pixel_red_request_bytes() {
        let f = Frame::new(1, 1, vec![255, 0, 0]).unwrap();
        assert_eq!(
            encode_request(&f),
            [0x53, 0x45, 0x47, 0x31, 0, 0, 0, 1, 0, 0, 0, 1, 0xFF, 0, 0]
        );
    }

    #[test]
    fn truncated_request_reports_short_payload() {
        let f = Frame::filled(3, 2, [1, 2, 3]);
        let mut bytes = encode_request(&f);
        bytes.pop();
        let err = decode_request(&bytes).unwrap_err();
        assert_eq!(err, ProtoError::PayloadShort { offset: 12, short_by: 1 });
        assert!(err.to_string().contains("payload short by 1"));
    }

    #[test]
    fn request_decode_errors() {
        let f = Frame::filled(2, 2, [9, 9, 9]);
        let mut bytes = encode_request(&f);
        bytes[0] = b'X';
        assert!(matches!(decode_request(&bytes), Err(ProtoError::BadMagic { .. })));
        let bytes = encode_request(&f);
        assert!(matches!(decode_request(&bytes[..7]), Err(ProtoError::HeaderShort { offset: 7, needed: 5 })));
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(decode_request(&long), Err(ProtoError::TrailingBytes { offset: 24, extra: 1 })));
        let mut zero = bytes;
        zero[4..8].copy_from_slice(&0u32.to_be_bytes());
        assert!(matches!(decode_request(&zero), Err(ProtoError::BadDimensions { .. })));
    }

    #[test]
    fn error_statuses_are_five_bytes() {
        assert_eq!(encode_response(&SegResponse::BadRequest), vec![2, 0, 0, 0, 0]);
        assert_eq!(encode_response(&SegResponse::ModelError), vec![1, 0, 0, 0, 0]);
        assert_eq!(decode_response(&[2, 0, 0, 0, 0], 10, 10).unwrap(), SegResponse::BadRequest);
        assert_eq!(decode_response(&[1, 0, 0, 0, 0], 10, 10).unwrap(), SegResponse::ModelError);
        assert!(matches!(decode_response(&[7, 0, 0, 0, 0], 1, 1), Err(ProtoError::UnknownStatus { status: 7 })));
    }

    #[test]
    fn non_dense_labels_rejected() {
        let mut bytes = vec![0, 0, 0, 0, 2];
        for l in [1u32, 3] {
            bytes.extend_from_slice(&l.to_be_bytes());
        }
        assert!(matches!(decode_response(&bytes, 2, 1), Err(ProtoError::InvalidLabels { .. })));
        let mut bytes = vec![0, 0, 0, 0, 3];
        for l in [1u32, 3] {
            bytes.extend_from_slice(&l.to_be_bytes());
        }
        assert!(matches!(decode_response(&bytes, 2, 1), Err(ProtoError::InvalidLabels { .. })));
    }

    #[test]
    fn stream_reader_matches_slice_decoder() {
        let f = Frame::filled(4, 3, [7, 8, 9]);
        let bytes = encode_request(&f);
        let mut cursor = io::Cursor::new(bytes);
        assert_eq!(read_request(&mut cursor).unwrap(), f);
    }
}
