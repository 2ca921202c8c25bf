//! Length-prefixed binary protocol for out-of-process segmentation.
//!
//! Request: `"SEG1"`, width and height as big-endian `u32`, then `3*w*h` RGB
//! bytes. Response: a status byte (0 ok, 1 model error, 2 bad request), the
//! segment count as big-endian `u32`, then `w*h` big-endian `u32` labels when
//! the status is 0. Labels rather than pixels cross the wire, so remote and
//! builtin segmentation share one renderer.

mod client;
mod codec;
mod server;

pub use client::{RemoteError, SegClient, SegClientConfig, ENDPOINT_ENV};
pub use codec::{
    decode_request, decode_request_header, decode_response, decode_response_header, encode_request,
    encode_response, read_request, write_message, ProtoError, ReadError, SegResponse, MAGIC, MAX_PIXELS,
    REQUEST_HEADER_LEN, RESPONSE_HEADER_LEN, STATUS_BAD_REQUEST, STATUS_MODEL_ERROR, STATUS_OK,
};
pub use server::{builtin_handler, serve_connection, spawn_server};
