//! A minimal HTTP/1.1 server exposing any [`ViewCompleter`] over the wire
//! format. Meant for loopback use and testing, one request per connection.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use log::{debug, warn};

use super::wire::{self, WireRequest, COMPLETE_PATH};
use super::{CompleterError, ViewCompleter};

pub const MAX_REQUEST_BYTES: usize = 1 << 30;
const MAX_HEADER_BYTES: usize = 64 * 1024;

struct Reply {
    status: u16,
    reason: &'static str,
    body: Vec<u8>,
}

impl Reply {
    fn text(status: u16, reason: &'static str, msg: impl Into<String>) -> Self {
        Self {
            status,
            reason,
            body: msg.into().into_bytes(),
        }
    }
}

fn read_request(stream: &mut TcpStream) -> Result<(String, String, Vec<u8>), Reply> {
    let mut reader = BufReader::new(stream);
    let mut head = Vec::new();
    loop {
        let n = reader
            .read_until(b'\n', &mut head)
            .map_err(|e| Reply::text(400, "Bad Request", e.to_string()))?;
        if n == 0 {
            return Err(Reply::text(400, "Bad Request", "connection closed mid-headers"));
        }
        if head.ends_with(b"\r\n\r\n") || head.ends_with(b"\n\n") {
            break;
        }
        if head.len() > MAX_HEADER_BYTES {
            return Err(Reply::text(431, "Request Header Fields Too Large", "headers too large"));
        }
    }
    let mut headers = [httparse::EMPTY_HEADER; 64];
    let mut parsed = httparse::Request::new(&mut headers);
    match parsed.parse(&head) {
        Ok(httparse::Status::Complete(_)) => {}
        _ => return Err(Reply::text(400, "Bad Request", "malformed request head")),
    }
    let method = parsed.method.unwrap_or_default().to_string();
    let path = parsed.path.unwrap_or_default().to_string();
    let length = parsed
        .headers
        .iter()
        .find(|h| h.name.eq_ignore_ascii_case("content-length"))
        .and_then(|h| std::str::from_utf8(h.value).ok()?.trim().parse::<usize>().ok());
    let body = match length {
        Some(n) if n > MAX_REQUEST_BYTES => {
            return Err(Reply::text(413, "Payload Too Large", "request body too large"))
        }
        Some(n) => {
            let mut body = vec![0u8; n];
            reader
                .read_exact(&mut body)
                .map_err(|e| Reply::text(400, "Bad Request", format!("short body: {e}")))?;
            body
        }
        None if method == "POST" => return Err(Reply::text(411, "Length Required", "content-length required")),
        None => Vec::new(),
    };
    Ok((method, path, body))
}

fn handle(completer: &dyn ViewCompleter, method: &str, path: &str, body: &[u8]) -> Reply {
    if path != COMPLETE_PATH {
        return Reply::text(404, "Not Found", format!("no route for {path}"));
    }
    if method != "POST" {
        return Reply::text(405, "Method Not Allowed", "use POST");
    }
    let wire_req: WireRequest = match serde_json::from_slice(body) {
        Ok(r) => r,
        Err(e) => return Reply::text(400, "Bad Request", format!("json: {e}")),
    };
    let req = match wire::decode_request(&wire_req) {
        Ok(r) => r,
        Err(e) => return Reply::text(400, "Bad Request", e.to_string()),
    };
    let resp = match completer.complete(&req) {
        Ok(r) => r,
        Err(e @ CompleterError::ContractViolation(_)) => {
            return Reply::text(422, "Unprocessable Entity", e.to_string())
        }
        Err(e) => return Reply::text(500, "Internal Server Error", e.to_string()),
    };
    match wire::encode_response(&req.request_id, &resp).and_then(|w| {
        serde_json::to_vec(&w).map_err(|e| CompleterError::ProtocolError(e.to_string()))
    }) {
        Ok(body) => Reply {
            status: 200,
            reason: "OK",
            body,
        },
        Err(e) => Reply::text(500, "Internal Server Error", e.to_string()),
    }
}

fn serve_connection(mut stream: TcpStream, completer: &dyn ViewCompleter) -> std::io::Result<()> {
    stream.set_read_timeout(Some(Duration::from_secs(60)))?;
    let reply = match read_request(&mut stream) {
        Ok((method, path, body)) => {
            debug!("{method} {path} ({} bytes)", body.len());
            handle(completer, &method, &path, &body)
        }
        Err(reply) => reply,
    };
    let content_type = if reply.status == 200 {
        "application/json"
    } else {
        "text/plain; charset=utf-8"
    };
    write!(
        stream,
        "HTTP/1.1 {} {}\r\nContent-Type: {content_type}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        reply.status,
        reply.reason,
        reply.body.len()
    )?;
    stream.write_all(&reply.body)?;
    stream.flush()
}

/// Serves until `stop` is set. Each connection is handled on its own thread.
pub fn serve(listener: TcpListener, completer: Arc<dyn ViewCompleter>, stop: Arc<AtomicBool>) {
    for conn in listener.incoming() {
        if stop.load(Ordering::SeqCst) {
            break;
        }
        match conn {
            Ok(stream) => {
                let completer = Arc::clone(&completer);
                std::thread::spawn(move || {
                    if let Err(e) = serve_connection(stream, completer.as_ref()) {
                        warn!("connection error: {e}");
                    }
                });
            }
            Err(e) => warn!("accept failed: {e}"),
        }
    }
}

/// A server running on a background thread. Stops when dropped.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Base URL suitable for [`super::RemoteCompleter::new`].
    pub fn endpoint(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn stop(mut self) {
        self.shutdown();
    }

    fn shutdown(&mut self) {
        if let Some(t) = self.thread.take() {
            self.stop.store(true, Ordering::SeqCst);
            // wake the blocking accept
            let _ = TcpStream::connect(self.addr);
            let _ = t.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.shutdown();
    }
}

/// Binds `addr` (use port 0 for an ephemeral port) and serves in the background.
pub fn spawn(addr: &str, completer: Arc<dyn ViewCompleter>) -> std::io::Result<ServerHandle> {
    let listener = TcpListener::bind(addr)?;
    let addr = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let flag = Arc::clone(&stop);
    let thread = std::thread::spawn(move || serve(listener, completer, flag));
    Ok(ServerHandle {
        addr,
        stop,
        thread: Some(thread),
    })
}
