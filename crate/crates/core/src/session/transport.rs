//! Message transports: an in-process queue pair and any byte stream.

use std::io::{BufReader, BufWriter, Read, Write};
use std::net::TcpStream;
use std::sync::mpsc::{channel, Receiver, Sender};

use super::protocol::{decode_message, encode_message, read_message, write_message, ProtocolMessage};
use crate::error::{Error, Result};

pub trait Transport {
    fn send(&mut self, msg: &ProtocolMessage) -> Result<()>;
    fn recv(&mut self) -> Result<ProtocolMessage>;
}

impl<T: Transport + ?Sized> Transport for &mut T {
    fn send(&mut self, msg: &ProtocolMessage) -> Result<()> {
        (**self).send(msg)
    }

    fn recv(&mut self) -> Result<ProtocolMessage> {
        (**self).recv()
    }
}

/// One end of an in-process connection. Frames travel encoded, so the
/// codec is exercised exactly as on a socket.
pub struct ChannelTransport {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
}

impl ChannelTransport {
    pub fn pair() -> (ChannelTransport, ChannelTransport) {
        let (a_tx, b_rx) = channel();
        let (b_tx, a_rx) = channel();
        (
            ChannelTransport { tx: a_tx, rx: a_rx },
            ChannelTransport { tx: b_tx, rx: b_rx },
        )
    }
}

impl Transport for ChannelTransport {
    fn send(&mut self, msg: &ProtocolMessage) -> Result<()> {
        self.tx
            .send(encode_message(msg)?)
            .map_err(|_| Error::Transport("peer hung up".into()))
    }

    fn recv(&mut self) -> Result<ProtocolMessage> {
        let frame = self
            .rx
            .recv()
            .map_err(|_| Error::Transport("connection closed by peer".into()))?;
        decode_message(&frame)
    }
}

/// Length-prefixed framing over a reader/writer pair.
pub struct StreamTransport<R: Read, W: Write> {
    reader: BufReader<R>,
    writer: BufWriter<W>,
}

impl<R: Read, W: Write> StreamTransport<R, W> {
    pub fn new(reader: R, writer: W) -> Self {
        StreamTransport {
            reader: BufReader::new(reader),
            writer: BufWriter::new(writer),
        }
    }
}

impl StreamTransport<TcpStream, TcpStream> {
    pub fn tcp(stream: TcpStream) -> Result<Self> {
        stream.set_nodelay(true)?;
        let reader = stream.try_clone()?;
        Ok(StreamTransport::new(reader, stream))
    }
}

impl<R: Read, W: Write> Transport for StreamTransport<R, W> {
    fn send(&mut self, msg: &ProtocolMessage) -> Result<()> {
        write_message(&mut self.writer, msg)
    }

    fn recv(&mut self) -> Result<ProtocolMessage> {
        read_message(&mut self.reader)
    }
}
