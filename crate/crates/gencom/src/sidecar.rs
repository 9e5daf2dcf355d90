//! Client for the external restoration sidecar.
//!
//! Transport is newline-delimited JSON over TCP. Each request carries a
//! string `id`; the sidecar may answer out of order and the client matches
//! responses by id. Images travel as base64-encoded 8-bit PNG.
//!
//! Request: `{"id", "op", "image", "image_b"?, "params"}` with `op` one of
//! `restore`, `clip_sim`, `niqe`, `echo`.
//! Response: `{"id", "ok", "image"?, "score"?, "error"?}`.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::mpsc::{self, RecvTimeoutError};
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use base64::Engine;
use gencom_core::imaging::{block_grid, CompressedImage, Image};
use gencom_core::semdec::{upscale_grid, Capabilities, ErrorMask, InpaintDecoder, SemanticDecoder};
use serde::{Deserialize, Serialize};

pub const ADDR_ENV: &str = "GENCOM_SIDECAR_ADDR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Restore,
    ClipSim,
    Niqe,
    Echo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: String,
    pub op: Op,
    pub image: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_b: Option<String>,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub id: String,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum SidecarError {
    #[error("sidecar unreachable at {addr}: {source}")]
    Unreachable {
        addr: String,
        source: std::io::Error,
    },
    #[error("sidecar transport failure: {0}")]
    Transport(String),
    #[error("sidecar timed out after {0:?}")]
    Timeout(Duration),
    #[error("malformed sidecar response: {0}")]
    Malformed(String),
    #[error("sidecar reported an error: {0}")]
    Remote(String),
    #[error("image encoding failed: {0}")]
    Image(String),
}

/// Base64 PNG of an 8-bit grayscale or RGB image.
pub fn encode_png_base64(image: &Image) -> Result<String, SidecarError> {
    let mut bytes = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut bytes, image.width() as u32, image.height() as u32);
        enc.set_color(if image.channels() == 1 {
            png::ColorType::Grayscale
        } else {
            png::ColorType::Rgb
        });
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().map_err(|e| SidecarError::Image(e.to_string()))?;
        writer
            .write_image_data(image.pixels())
            .map_err(|e| SidecarError::Image(e.to_string()))?;
    }
    Ok(base64::engine::general_purpose::STANDARD.encode(bytes))
}

/// Inverse of [`encode_png_base64`]; alpha channels are dropped.
pub fn decode_png_base64(text: &str) -> Result<Image, SidecarError> {
    let bad = |e: &dyn std::fmt::Display| SidecarError::Malformed(format!("image: {e}"));
    let bytes = base64::engine::general_purpose::STANDARD
        .decode(text)
        .map_err(|e| bad(&e))?;
    let mut decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::normalize_to_color8());
    let mut reader = decoder.read_info().map_err(|e| bad(&e))?;
    let size = reader.output_buffer_size().ok_or_else(|| bad(&"image too large"))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(|e| bad(&e))?;
    buf.truncate(info.buffer_size());
    let (channels, keep) = match info.color_type {
        png::ColorType::Grayscale => (1, 1),
        png::ColorType::GrayscaleAlpha => (1, 2),
        png::ColorType::Rgb => (3, 3),
        png::ColorType::Rgba => (3, 4),
        png::ColorType::Indexed => return Err(bad(&"unexpanded palette")),
    };
    let pixels: Vec<u8> = if keep == channels {
        buf
    } else {
        buf.chunks(keep).flat_map(|px| px[..channels].to_vec()).collect()
    };
    Image::new(info.width as usize, info.height as usize, channels, pixels).map_err(|e| bad(&e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClientOptions {
    pub timeout: Duration,
    pub max_in_flight: usize,
}

impl Default for ClientOptions {
    fn default() -> Self {
        ClientOptions {
            timeout: Duration::from_secs(30),
            max_in_flight: 16,
        }
    }
}

type Pending = Arc<Mutex<HashMap<String, mpsc::Sender<Response>>>>;

/// Connection to one sidecar. Safe to share between threads.
pub struct SidecarClient {
    writer: Mutex<TcpStream>,
    pending: Pending,
    next_id: AtomicU64,
    slots: (Mutex<usize>, Condvar),
    options: ClientOptions,
}

impl SidecarClient {
    pub fn connect(addr: &str, options: ClientOptions) -> Result<Self, SidecarError> {
        let unreachable = |source| SidecarError::Unreachable {
            addr: addr.to_string(),
            source,
        };
        let socket = addr
            .to_socket_addrs()
            .map_err(unreachable)?
            .next()
            .ok_or_else(|| unreachable(std::io::Error::other("address resolves to nothing")))?;
        let stream = TcpStream::connect_timeout(&socket, options.timeout).map_err(unreachable)?;
        stream.set_nodelay(true).ok();
        let reader = stream.try_clone().map_err(unreachable)?;
        let pending: Pending = Arc::default();
        let table = Arc::clone(&pending);
        std::thread::Builder::new()
            .name("sidecar-reader".into())
            .spawn(move || read_responses(reader, table))
            .map_err(unreachable)?;
        Ok(SidecarClient {
            writer: Mutex::new(stream),
            pending,
            next_id: AtomicU64::new(0),
            slots: (Mutex::new(0), Condvar::new()),
            options: ClientOptions {
                max_in_flight: options.max_in_flight.max(1),
                ..options
            },
        })
    }

    /// Connects to the address in `GENCOM_SIDECAR_ADDR`, if set.
    pub fn from_env(options: ClientOptions) -> Option<Result<Self, SidecarError>> {
        std::env::var(ADDR_ENV).ok().map(|addr| Self::connect(&addr, options))
    }

    fn acquire(&self) {
        let (lock, cv) = &self.slots;
        let mut used = lock.lock().unwrap();
        while *used >= self.options.max_in_flight {
            used = cv.wait(used).unwrap();
        }
        *used += 1;
    }

    fn release(&self) {
        let (lock, cv) = &self.slots;
        *lock.lock().unwrap() -= 1;
        cv.notify_one();
    }

    /// Sends one request and waits for the response with the same id.
    pub fn call(
        &self,
        op: Op,
        image: &Image,
        image_b: Option<&Image>,
        params: serde_json::Map<String, serde_json::Value>,
    ) -> Result<Response, SidecarError> {
        let id = format!("req-{}", self.next_id.fetch_add(1, Ordering::Relaxed));
        let request = Request {
            id: id.clone(),
            op,
            image: encode_png_base64(image)?,
            image_b: image_b.map(encode_png_base64).transpose()?,
            params,
        };
        let mut line = serde_json::to_string(&request).map_err(|e| SidecarError::Transport(e.to_string()))?;
        line.push('\n');

        self.acquire();
        let (tx, rx) = mpsc::channel();
        self.pending.lock().unwrap().insert(id.clone(), tx);
        let sent = self
            .writer
            .lock()
            .unwrap()
            .write_all(line.as_bytes())
            .map_err(|e| SidecarError::Transport(e.to_string()));
        let result = sent.and_then(|()| match rx.recv_timeout(self.options.timeout) {
            Ok(resp) => Ok(resp),
            Err(RecvTimeoutError::Timeout) => Err(SidecarError::Timeout(self.options.timeout)),
            Err(RecvTimeoutError::Disconnected) => {
                Err(SidecarError::Transport("connection closed".into()))
            }
        });
        self.pending.lock().unwrap().remove(&id);
        self.release();

        let resp = result?;
        if resp.id != id {
            return Err(SidecarError::Malformed(format!("expected id {id}, got {}", resp.id)));
        }
        if !resp.ok {
            return Err(match resp.error {
                Some(e) => SidecarError::Remote(e),
                None => SidecarError::Malformed("ok=false without error".into()),
            });
        }
        Ok(resp)
    }

    pub fn echo(&self, image: &Image) -> Result<Image, SidecarError> {
        let resp = self.call(Op::Echo, image, None, Default::default())?;
        decode_png_base64(resp.image.as_deref().ok_or_else(|| SidecarError::Malformed("echo without image".into()))?)
    }
}

fn read_responses(stream: TcpStream, pending: Pending) {
    let reader = BufReader::new(stream);
    for line in reader.lines() {
        let Ok(line) = line else { break };
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Response>(&line) {
            Ok(resp) => {
                if let Some(tx) = pending.lock().unwrap().remove(&resp.id) {
                    let _ = tx.send(resp);
                } else {
                    log::warn!("sidecar response for unknown id {:?}", resp.id);
                }
            }
            Err(e) => log::warn!("unparseable sidecar line ({e}): {line:.80}"),
        }
    }
    // Dropping the senders wakes every waiter with a disconnect.
    pending.lock().unwrap().clear();
}

/// Semantic decoder backed by the sidecar's `restore` op.
///
/// The received block-mean grid is sent as an image together with the
/// target size. A response at grid size is upscaled bilinearly; a response
/// at target size is used as is. Any failure falls back to the inpaint
/// decoder with a logged warning.
pub struct ExternalDecoder {
    client: Option<Arc<SidecarClient>>,
    fallback: InpaintDecoder,
    fallbacks: AtomicUsize,
}

impl ExternalDecoder {
    pub fn new(client: Option<Arc<SidecarClient>>) -> Self {
        ExternalDecoder {
            client,
            fallback: InpaintDecoder::default(),
            fallbacks: AtomicUsize::new(0),
        }
    }

    /// Number of restores served by the fallback decoder so far.
    pub fn fallback_count(&self) -> usize {
        self.fallbacks.load(Ordering::Relaxed)
    }

    fn remote(&self, client: &SidecarClient, received: &CompressedImage, width: usize, height: usize) -> Result<Image, SidecarError> {
        let grid = block_grid(received).map_err(|e| SidecarError::Image(e.to_string()))?;
        let grid_image = Image::new(grid.width, grid.height, grid.channels, grid.values.clone())
            .map_err(|e| SidecarError::Image(e.to_string()))?;
        let mut params = serde_json::Map::new();
        params.insert("width".into(), width.into());
        params.insert("height".into(), height.into());
        params.insert("block_size".into(), received.header.param.into());
        let resp = client.call(Op::Restore, &grid_image, None, params)?;
        let out = decode_png_base64(
            resp.image
                .as_deref()
                .ok_or_else(|| SidecarError::Malformed("restore without image".into()))?,
        )?;
        if out.channels() != grid.channels {
            return Err(SidecarError::Malformed("channel count changed".into()));
        }
        match (out.width(), out.height()) {
            (w, h) if (w, h) == (width, height) => Ok(out),
            (w, h) if (w, h) == (grid.width, grid.height) => {
                let restored = gencom_core::imaging::BlockGrid::new(w, h, out.channels(), out.into_pixels())
                    .map_err(|e| SidecarError::Image(e.to_string()))?;
                upscale_grid(received, &restored, width, height).map_err(|e| SidecarError::Image(e.to_string()))
            }
            (w, h) => Err(SidecarError::Malformed(format!("unexpected output size {w}×{h}"))),
        }
    }
}

impl SemanticDecoder for ExternalDecoder {
    fn id(&self) -> &str {
        "external"
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            handles_error_mask: false,
            target_upscale: 0,
        }
    }

    fn restore(
        &self,
        received: &CompressedImage,
        mask: Option<&ErrorMask>,
        width: usize,
        height: usize,
    ) -> gencom_core::Result<Image> {
        if let Some(client) = &self.client {
            match self.remote(client, received, width, height) {
                Ok(image) => return Ok(image),
                Err(e) => log::warn!("external decoder downgraded to inpaint: {e}"),
            }
        }
        self.fallbacks.fetch_add(1, Ordering::Relaxed);
        self.fallback.restore(received, mask, width, height)
    }
}
