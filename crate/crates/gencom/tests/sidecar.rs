//! Protocol tests against an in-process mock sidecar.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use gencom::sidecar::{ClientOptions, ExternalDecoder, Op, Request, Response, SidecarClient, SidecarError};
use gencom_core::imaging::{lpf_encode, Image, LpfConfig, Reconstruction};
use gencom_core::semdec::{InpaintDecoder, SemanticDecoder, UpsampleDecoder};

#[derive(Clone, Copy)]
enum Mode {
    /// Every op returns the input image; replies are delayed out of order.
    Echo,
    Fail,
    Silent,
    Hangup,
}

struct Mock {
    addr: String,
    seen: Arc<Mutex<Vec<String>>>,
}

fn spawn(mode: Mode) -> Mock {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let stream = stream.unwrap();
            if let Mode::Hangup = mode {
                let mut line = String::new();
                let _ = BufReader::new(&stream).read_line(&mut line);
                drop(stream);
                continue;
            }
            let writer = Arc::new(Mutex::new(stream.try_clone().unwrap()));
            let log = Arc::clone(&log);
            std::thread::spawn(move || serve(stream, writer, log, mode));
        }
    });
    Mock { addr, seen }
}

fn serve(stream: TcpStream, writer: Arc<Mutex<TcpStream>>, log: Arc<Mutex<Vec<String>>>, mode: Mode) {
    for line in BufReader::new(stream).lines() {
        let Ok(line) = line else { return };
        let req: Request = serde_json::from_str(&line).unwrap();
        log.lock().unwrap().push(req.id.clone());
        let writer = Arc::clone(&writer);
        std::thread::spawn(move || {
            let resp = match mode {
                Mode::Silent => return,
                Mode::Fail => Response {
                    id: req.id,
                    ok: false,
                    image: None,
                    score: None,
                    error: Some("no model".into()),
                },
                _ => {
                    // Delay by a hash of the id so replies overtake each other.
                    let h = req.id.bytes().fold(7u64, |a, b| a.wrapping_mul(31).wrapping_add(b as u64));
                    std::thread::sleep(Duration::from_millis(h % 25));
                    Response {
                        id: req.id,
                        ok: true,
                        image: Some(req.image),
                        score: None,
                        error: None,
                    }
                }
            };
            let mut text = serde_json::to_string(&resp).unwrap();
            text.push('\n');
            writer.lock().unwrap().write_all(text.as_bytes()).unwrap();
        });
    }
}

fn options(timeout_ms: u64) -> ClientOptions {
    ClientOptions {
        timeout: Duration::from_millis(timeout_ms),
        max_in_flight: 100,
    }
}

fn pattern(seed: usize) -> Image {
    Image::from_fn(24, 16, 1, |x, y, _| ((x * 11 + y * 3 + seed * 29) % 256) as u8).unwrap()
}

#[test]
fn echo_is_byte_identical() {
    let mock = spawn(Mode::Echo);
    let client = SidecarClient::connect(&mock.addr, options(5000)).unwrap();
    for ch in [1, 3] {
        let img = Image::from_fn(9, 5, ch, |x, y, c| (x * 20 + y + c * 90) as u8).unwrap();
        assert_eq!(client.echo(&img).unwrap(), img);
    }
}

#[test]
fn hundred_concurrent_requests_each_get_their_own_response() {
    let mock = spawn(Mode::Echo);
    let client = Arc::new(SidecarClient::connect(&mock.addr, options(10_000)).unwrap());
    let handles: Vec<_> = (0..100)
        .map(|i| {
            let client = Arc::clone(&client);
            std::thread::spawn(move || {
                let img = pattern(i);
                assert_eq!(client.echo(&img).unwrap(), img, "request {i}");
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    let seen = mock.seen.lock().unwrap();
    assert_eq!(seen.len(), 100);
    assert_eq!(seen.iter().collect::<HashSet<_>>().len(), 100);
}

#[test]
fn in_flight_cap_still_completes() {
    let mock = spawn(Mode::Echo);
    let client = Arc::new(
        SidecarClient::connect(
            &mock.addr,
            ClientOptions {
                timeout: Duration::from_secs(10),
                max_in_flight: 2,
            },
        )
        .unwrap(),
    );
    let handles: Vec<_> = (0..20)
        .map(|i| {
            let client = Arc::clone(&client);
            std::thread::spawn(move || client.echo(&pattern(i)).unwrap() == pattern(i))
        })
        .collect();
    assert!(handles.into_iter().all(|h| h.join().unwrap()));
}

fn received() -> (Image, gencom_core::imaging::CompressedImage) {
    let img = Image::from_fn(64, 48, 1, |x, y, _| ((x * 3 + y * 2) % 256) as u8).unwrap();
    let c = lpf_encode(&img, &LpfConfig::new(8, Reconstruction::Bilinear).unwrap());
    (img, c)
}

#[test]
fn identity_sidecar_gives_bilinear_upscale() {
    let mock = spawn(Mode::Echo);
    let client = SidecarClient::connect(&mock.addr, options(5000)).unwrap();
    let dec = ExternalDecoder::new(Some(Arc::new(client)));
    let (img, c) = received();
    let out = dec.restore(&c, None, img.width(), img.height()).unwrap();
    let expected = UpsampleDecoder.restore(&c, None, img.width(), img.height()).unwrap();
    assert_eq!(out, expected);
    assert_eq!(dec.fallback_count(), 0);
}

fn assert_falls_back(dec: &ExternalDecoder) {
    let (img, mut c) = received();
    c.payload[5] ^= 0xF0;
    let out = dec.restore(&c, None, img.width(), img.height()).unwrap();
    let expected = InpaintDecoder::default().restore(&c, None, img.width(), img.height()).unwrap();
    assert_eq!(out, expected);
    assert_eq!(dec.fallback_count(), 1);
}

#[test]
fn unreachable_sidecar_falls_back_to_inpaint() {
    let err = SidecarClient::connect("127.0.0.1:1", options(300)).err().unwrap();
    assert!(matches!(err, SidecarError::Unreachable { .. }));
    assert_falls_back(&ExternalDecoder::new(None));
}

#[test]
fn remote_error_falls_back() {
    let mock = spawn(Mode::Fail);
    let client = SidecarClient::connect(&mock.addr, options(5000)).unwrap();
    assert!(matches!(client.echo(&pattern(0)), Err(SidecarError::Remote(e)) if e == "no model"));
    assert_falls_back(&ExternalDecoder::new(Some(Arc::new(client))));
}

#[test]
fn timeout_falls_back() {
    let mock = spawn(Mode::Silent);
    let client = SidecarClient::connect(&mock.addr, options(150)).unwrap();
    assert!(matches!(client.echo(&pattern(0)), Err(SidecarError::Timeout(_))));
    assert_falls_back(&ExternalDecoder::new(Some(Arc::new(client))));
}

#[test]
fn hangup_is_a_transport_error() {
    let mock = spawn(Mode::Hangup);
    let client = SidecarClient::connect(&mock.addr, options(5000)).unwrap();
    let err = client.call(Op::Niqe, &pattern(1), None, Default::default()).unwrap_err();
    assert!(matches!(err, SidecarError::Transport(_)), "{err}");
}
