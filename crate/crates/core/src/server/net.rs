use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;

use super::{ServerError, Session, SessionDefaults};
use crate::metrics::{write_trace, EpisodeTrace};

pub const DEFAULT_PORT: u16 = 7341;

/// Append-only trace log shared by all sessions; each trace is written and
/// flushed as one line under a lock.
pub struct TraceSink {
    file: Mutex<BufWriter<File>>,
}

impl TraceSink {
    pub fn open(path: &Path) -> std::io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            file: Mutex::new(BufWriter::new(file)),
        })
    }

    pub fn append(&self, trace: &EpisodeTrace) -> std::io::Result<()> {
        let mut f = self.file.lock().unwrap_or_else(|e| e.into_inner());
        write_trace(&mut *f, trace)?;
        f.flush()
    }
}

fn pump(
    input: impl BufRead,
    mut output: impl Write,
    defaults: SessionDefaults,
    sink: Option<Arc<TraceSink>>,
) -> std::io::Result<()> {
    let mut session = Session::new(defaults, sink);
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        writeln!(output, "{}", session.handle(&line))?;
        output.flush()?;
        if session.is_closed() {
            break;
        }
    }
    Ok(())
}

/// Runs a single session over a pair of streams until `close` or EOF.
pub fn serve_stdio(
    input: impl BufRead,
    output: impl Write,
    defaults: SessionDefaults,
    sink: Option<Arc<TraceSink>>,
) -> Result<(), ServerError> {
    pump(input, output, defaults, sink)?;
    Ok(())
}

/// TCP server: one thread and one [`Session`] per connection.
pub struct Server {
    listener: TcpListener,
    defaults: SessionDefaults,
    sink: Option<Arc<TraceSink>>,
    stop: Arc<AtomicBool>,
}

/// Stops a running [`Server`] from another thread.
#[derive(Clone)]
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
}

impl ServerHandle {
    pub fn shutdown(&self) {
        self.stop.store(true, Ordering::SeqCst);
        // Wake the accept loop.
        let _ = TcpStream::connect(self.addr);
    }
}

impl Server {
    pub fn bind(
        addr: &str,
        defaults: SessionDefaults,
        sink: Option<Arc<TraceSink>>,
    ) -> Result<Self, ServerError> {
        let listener = TcpListener::bind(addr).map_err(|source| ServerError::Bind {
            addr: addr.to_string(),
            source,
        })?;
        Ok(Self {
            listener,
            defaults,
            sink,
            stop: Arc::new(AtomicBool::new(false)),
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr, ServerError> {
        Ok(self.listener.local_addr()?)
    }

    pub fn handle(&self) -> Result<ServerHandle, ServerError> {
        Ok(ServerHandle {
            addr: self.local_addr()?,
            stop: Arc::clone(&self.stop),
        })
    }

    /// Accepts connections until [`ServerHandle::shutdown`]; then waits for
    /// open sessions to finish.
    pub fn run(self) -> Result<(), ServerError> {
        let mut workers = Vec::new();
        for stream in self.listener.incoming() {
            if self.stop.load(Ordering::SeqCst) {
                break;
            }
            let Ok(stream) = stream else { continue };
            let defaults = self.defaults.clone();
            let sink = self.sink.clone();
            workers.push(thread::spawn(move || {
                let Ok(read) = stream.try_clone() else { return };
                let _ = pump(BufReader::new(read), stream, defaults, sink);
            }));
            workers.retain(|w| !w.is_finished());
        }
        for w in workers {
            let _ = w.join();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::read_traces;

    #[test]
    fn stdio_session_until_close() {
        let input = "{\"cmd\":\"hello\"}\n\n{\"cmd\":\"close\"}\n{\"cmd\":\"hello\"}\n";
        let mut out = Vec::new();
        serve_stdio(input.as_bytes(), &mut out, SessionDefaults::default(), None).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn bind_failure_names_address() {
        let Err(err) = Server::bind("256.0.0.1:1", SessionDefaults::default(), None) else {
            panic!("bound an invalid address");
        };
        assert!(err.to_string().contains("256.0.0.1:1"));
    }

    #[test]
    fn sink_collects_finished_episodes() {
        let dir = std::env::temp_dir().join(format!("escaperoom-sink-{}", std::process::id()));
        let _ = std::fs::remove_file(&dir);
        let sink = Arc::new(TraceSink::open(&dir).unwrap());
        let mut input =
            String::from("{\"cmd\":\"reset\",\"template\":\"a\",\"seed\":2,\"max_steps\":5}\n");
        for _ in 0..5 {
            input.push_str("{\"cmd\":\"step\",\"action\":1}\n");
        }
        input.push_str(
            "{\"cmd\":\"reset\"}\n{\"cmd\":\"step\",\"action\":2}\n{\"cmd\":\"close\"}\n",
        );
        serve_stdio(
            input.as_bytes(),
            std::io::sink(),
            SessionDefaults::default(),
            Some(sink),
        )
        .unwrap();
        let traces = read_traces(BufReader::new(File::open(&dir).unwrap())).unwrap();
        std::fs::remove_file(&dir).unwrap();
        assert_eq!(traces.len(), 2);
        assert_eq!(traces[0].length, 5);
        assert_eq!(traces[1].length, 1);
        assert_eq!(traces[1].episode, 1);
    }
}
