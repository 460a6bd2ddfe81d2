use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, ErrorKind, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, Sender, TryRecvError};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use crossbeam_queue::ArrayQueue;
use log::{debug, info, warn};

use super::protocol::ServerMessage;
use super::session::{ScriptEntry, Session};
use crate::error::{Error, Result};
use crate::io::FieldModel;

pub const DEFAULT_PORT: u16 = 7878;
pub const DEFAULT_RATE: f64 = 60.0;
/// State frames buffered per connection before the oldest are dropped.
const STATE_BUFFER: usize = 8;
const POLL: Duration = Duration::from_millis(4);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transport {
    /// Newline-delimited JSON over a raw TCP stream.
    Tcp,
    /// One JSON message per WebSocket text frame.
    WebSocket,
}

impl FromStr for Transport {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tcp" => Ok(Transport::Tcp),
            "ws" | "websocket" => Ok(Transport::WebSocket),
            other => Err(Error::domain(format!("unknown transport {other:?} (tcp or ws)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub host: String,
    pub port: u16,
    /// State frames per second.
    pub rate: f64,
    pub transport: Transport,
    /// Directory receiving one replayable script per connection.
    pub record: Option<PathBuf>,
}

impl Default for ServeOptions {
    fn default() -> Self {
        ServeOptions {
            host: "127.0.0.1".into(),
            port: DEFAULT_PORT,
            rate: DEFAULT_RATE,
            transport: Transport::Tcp,
            record: None,
        }
    }
}

pub struct Server {
    listener: TcpListener,
    field: Option<Arc<FieldModel>>,
    options: ServeOptions,
}

impl Server {
    pub fn bind(field: Option<Arc<FieldModel>>, options: ServeOptions) -> Result<Self> {
        if !(options.rate > 0.0 && options.rate.is_finite()) {
            return Err(Error::domain(format!("rate must be positive, got {}", options.rate)));
        }
        let addr = (options.host.as_str(), options.port)
            .to_socket_addrs()?
            .next()
            .ok_or_else(|| Error::domain(format!("cannot resolve {}", options.host)))?;
        let listener = TcpListener::bind(addr)?;
        Ok(Server {
            listener,
            field,
            options,
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// Accepts connections forever, one thread pair per connection.
    pub fn run(&self) -> Result<()> {
        info!("listening on {} ({:?})", self.local_addr()?, self.options.transport);
        let ids = AtomicU64::new(0);
        for stream in self.listener.incoming() {
            let stream = match stream {
                Ok(s) => s,
                Err(e) => {
                    warn!("accept failed: {e}");
                    continue;
                }
            };
            let id = ids.fetch_add(1, Ordering::Relaxed);
            let field = self.field.clone();
            let options = self.options.clone();
            thread::spawn(move || {
                if let Err(e) = handle_connection(id, stream, field, &options) {
                    debug!("connection {id} closed: {e}");
                }
            });
        }
        Ok(())
    }
}

trait Wire: Send {
    /// Next complete message, or `None` when nothing arrived within the poll window.
    fn recv(&mut self) -> std::io::Result<Option<String>>;
    fn send(&mut self, text: &str) -> std::io::Result<()>;
}

struct TcpWire {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
    partial: Vec<u8>,
}

impl Wire for TcpWire {
    fn recv(&mut self) -> std::io::Result<Option<String>> {
        match self.reader.read_until(b'\n', &mut self.partial) {
            Ok(0) => Err(ErrorKind::UnexpectedEof.into()),
            Ok(_) if self.partial.ends_with(b"\n") => {
                let line = String::from_utf8_lossy(&self.partial).trim().to_string();
                self.partial.clear();
                Ok(Some(line))
            }
            Ok(_) => Ok(None),
            Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn send(&mut self, text: &str) -> std::io::Result<()> {
        self.writer.write_all(text.as_bytes())?;
        self.writer.write_all(b"\n")?;
        self.writer.flush()
    }
}

struct WsWire(tungstenite::WebSocket<TcpStream>);

fn ws_error(e: tungstenite::Error) -> std::io::Error {
    match e {
        tungstenite::Error::Io(io) => io,
        other => std::io::Error::other(other),
    }
}

impl Wire for WsWire {
    fn recv(&mut self) -> std::io::Result<Option<String>> {
        match self.0.read() {
            Ok(tungstenite::Message::Text(t)) => Ok(Some(t.as_str().to_string())),
            Ok(tungstenite::Message::Close(_)) => Err(ErrorKind::UnexpectedEof.into()),
            Ok(_) => Ok(None),
            Err(tungstenite::Error::Io(e)) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {
                Ok(None)
            }
            Err(e) => Err(ws_error(e)),
        }
    }

    fn send(&mut self, text: &str) -> std::io::Result<()> {
        self.0
            .send(tungstenite::Message::text(text))
            .map_err(ws_error)
    }
}

fn handle_connection(
    id: u64,
    stream: TcpStream,
    field: Option<Arc<FieldModel>>,
    options: &ServeOptions,
) -> Result<()> {
    stream.set_nodelay(true)?;
    let mut wire: Box<dyn Wire> = match options.transport {
        Transport::Tcp => {
            stream.set_read_timeout(Some(POLL))?;
            Box::new(TcpWire {
                reader: BufReader::new(stream.try_clone()?),
                writer: BufWriter::new(stream),
                partial: Vec::new(),
            })
        }
        Transport::WebSocket => {
            let ws = tungstenite::accept(stream).map_err(|e| Error::domain(format!("websocket handshake: {e}")))?;
            ws.get_ref().set_read_timeout(Some(POLL))?;
            Box::new(WsWire(ws))
        }
    };
    info!("connection {id} open");

    let record = match &options.record {
        Some(dir) => Some(BufWriter::new(File::create(dir.join(format!("session-{id}.jsonl")))?)),
        None => None,
    };

    let (to_session, from_client) = mpsc::channel::<String>();
    let (to_client, replies) = mpsc::channel::<ServerMessage>();
    let frames = Arc::new(ArrayQueue::<ServerMessage>::new(STATE_BUFFER));
    let period = Duration::from_secs_f64(1.0 / options.rate);
    let session_frames = Arc::clone(&frames);
    let sim = thread::spawn(move || simulate(field, from_client, to_client, session_frames, period, record));

    // This thread owns the socket: it forwards input and drains output.
    let result = loop {
        match wire.recv() {
            Ok(Some(line)) if line.is_empty() => {}
            Ok(Some(line)) => {
                if to_session.send(line).is_err() {
                    break Ok(());
                }
            }
            Ok(None) => {}
            Err(e) => break Err(e),
        }
        let mut out = Vec::new();
        while let Ok(m) = replies.try_recv() {
            out.push(m);
        }
        while let Some(m) = frames.pop() {
            out.push(m);
        }
        if let Err(e) = out.iter().try_for_each(|m| wire.send(&m.to_line())) {
            break Err(e);
        }
        if sim.is_finished() {
            break Ok(());
        }
    };
    drop(to_session);
    let _ = sim.join();
    info!("connection {id} closed");
    result.map_err(Error::from)
}

fn simulate(
    field: Option<Arc<FieldModel>>,
    inbox: Receiver<String>,
    replies: Sender<ServerMessage>,
    frames: Arc<ArrayQueue<ServerMessage>>,
    period: Duration,
    mut record: Option<BufWriter<File>>,
) {
    let mut session = Session::new(field);
    let mut deadline = Instant::now() + period;
    loop {
        loop {
            match inbox.try_recv() {
                Ok(line) => {
                    let at = session.clock();
                    let (msg, out) = session.handle_line(&line);
                    if let (Some(message), Some(w)) = (msg, record.as_mut()) {
                        let entry = ScriptEntry { at, message };
                        let _ = writeln!(w, "{}", serde_json::to_string(&entry).expect("entry serializes"));
                        let _ = w.flush();
                    }
                    for m in out {
                        // States produced by `start` ride with the acks so they are never dropped.
                        if replies.send(m).is_err() {
                            return;
                        }
                    }
                }
                Err(TryRecvError::Empty) => break,
                Err(TryRecvError::Disconnected) => return,
            }
        }
        for m in session.tick() {
            if m.is_state() {
                frames.force_push(m);
            } else if replies.send(m).is_err() {
                return;
            }
        }
        let now = Instant::now();
        if deadline > now {
            thread::sleep(deadline - now);
            deadline += period;
        } else {
            deadline = now + period;
        }
    }
}
