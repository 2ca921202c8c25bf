use std::io::{self, BufReader, BufWriter};
use std::net::{TcpListener, TcpStream};
use std::thread::{self, JoinHandle};

use super::codec::{encode_response, read_request, write_message, ReadError, SegResponse};
use crate::frame::Frame;
use crate::segment::{segment_labels, SegmentLabelMap, SegmenterConfig};

/// Serves requests on one connection, in order, until the peer disconnects.
///
/// A malformed request gets a status-2 reply and closes the connection, since
/// the stream position can no longer be trusted. Handler errors become
/// status-1 replies.
pub fn serve_connection<F, E>(stream: TcpStream, handler: &mut F) -> io::Result<()>
where
    F: FnMut(&Frame) -> Result<SegmentLabelMap, E>,
{
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);
    loop {
        let response = match read_request(&mut reader) {
            Ok(frame) => match handler(&frame) {
                Ok(map) => SegResponse::Labels(map),
                Err(_) => SegResponse::ModelError,
            },
            Err(ReadError::Io(e)) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(()),
            Err(ReadError::Io(e)) => return Err(e),
            Err(ReadError::Proto(_)) => {
                write_message(&mut writer, &encode_response(&SegResponse::BadRequest))?;
                return Ok(());
            }
        };
        write_message(&mut writer, &encode_response(&response))?;
    }
}

/// Accepts connections one at a time on a background thread and serves each
/// with `handler`. The thread exits when accepting fails.
pub fn spawn_server<F, E>(listener: TcpListener, mut handler: F) -> JoinHandle<()>
where
    F: FnMut(&Frame) -> Result<SegmentLabelMap, E> + Send + 'static,
{
    thread::spawn(move || {
        for stream in listener.incoming() {
            match stream {
                Ok(s) => {
                    let _ = serve_connection(s, &mut handler);
                }
                Err(_) => break,
            }
        }
    })
}

/// Handler that runs the builtin segmenter, i.e. a model-free stub service.
pub fn builtin_handler(
    config: SegmenterConfig,
) -> impl FnMut(&Frame) -> Result<SegmentLabelMap, crate::segment::SegmentError> + Send + 'static {
    move |frame| segment_labels(frame, &config)
}
