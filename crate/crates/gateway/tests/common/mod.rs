#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use fourfa::service::{serve_on, Gateway};
use fourfa::sms::MockSmsTransport;
use fourfa::FileUserStore;
use fourfa_core::factors::{
    enroll_user, render_template, FaceTemplate, GeoPoint, UserRecord, FACE_CELLS, RAMP,
};
use fourfa_core::flow::{FlowPolicy, SealKeys};
use fourfa_core::{Channels, RasterImage};
use serde_json::Value;

pub const PASSWORD: &str = "correct horse battery";
pub const MAC: &str = "merchant-mac";
pub const KEY: &str = "merchant-key";

pub fn face_template() -> FaceTemplate {
    let cells = (0..FACE_CELLS)
        .map(|i| RAMP[(i / 64 * 3 + i % 64 / 5) % 10])
        .collect();
    FaceTemplate::from_cells(cells).unwrap()
}

/// The enrolled face with the first `n` cells changed.
pub fn perturbed(template: &FaceTemplate, n: usize) -> FaceTemplate {
    let mut cells = template.cells().to_vec();
    for c in cells.iter_mut().take(n) {
        let i = RAMP.iter().position(|r| r == c).unwrap();
        *c = RAMP[(i + 5) % 10];
    }
    FaceTemplate::from_cells(cells).unwrap()
}

pub fn face_image() -> RasterImage {
    render_template(&face_template(), 2)
}

pub fn home() -> GeoPoint {
    GeoPoint::new(30.3165, 78.0322).unwrap()
}

/// `meters` due north of `p`.
pub fn north_of(p: GeoPoint, meters: f64) -> GeoPoint {
    GeoPoint::new(p.lat() + meters / 111_195.0, p.lon()).unwrap()
}

pub fn alice() -> UserRecord {
    enroll_user("alice", PASSWORD.as_bytes(), &face_image(), home(), [7; 16]).unwrap()
}

pub fn noise_cover(width: u32, height: u32, seed: u64) -> RasterImage {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let samples = (0..width as usize * height as usize * 3)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 24) as u8
        })
        .collect();
    RasterImage::new(width, height, Channels::Rgb, samples).unwrap()
}

pub fn keys() -> SealKeys {
    SealKeys {
        mac_pass: MAC.as_bytes().to_vec(),
        key_pass: KEY.as_bytes().to_vec(),
    }
}

pub fn png(img: &RasterImage) -> Vec<u8> {
    fourfa::image_io::encode_png(img).unwrap()
}

/// A gateway over a temp-dir store holding alice, served on an ephemeral port.
pub struct TestServer {
    pub dir: tempfile::TempDir,
    pub addr: SocketAddr,
    pub gateway: Arc<Gateway>,
    pub agent: ureq::Agent,
}

impl TestServer {
    pub fn start() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let store = Arc::new(FileUserStore::open(dir.path().join("users.jsonl")).unwrap());
        store.put(alice()).unwrap();
        let transport = Arc::new(MockSmsTransport::new(dir.path().join("sms.log")));
        let gateway = Arc::new(Gateway::new(
            store,
            transport,
            FlowPolicy::default(),
            keys(),
        ));

        let (tx, rx) = std::sync::mpsc::channel();
        let served = gateway.clone();
        std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread()
                .worker_threads(2)
                .enable_all()
                .build()
                .unwrap();
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
                tx.send(listener.local_addr().unwrap()).unwrap();
                serve_on(listener, served).await.unwrap();
            });
        });
        let addr = rx.recv().unwrap();
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .build()
            .new_agent();
        TestServer {
            dir,
            addr,
            gateway,
            agent,
        }
    }

    pub fn url(&self, path: &str) -> String {
        format!("http://{}{path}", self.addr)
    }

    pub fn sms_log(&self) -> PathBuf {
        self.dir.path().join("sms.log")
    }

    pub fn store_path(&self) -> PathBuf {
        self.dir.path().join("users.jsonl")
    }

    pub fn last_code(&self) -> String {
        let log = MockSmsTransport::read_log(&self.sms_log()).unwrap();
        log.last().unwrap().code().unwrap().to_owned()
    }

    pub fn post_json(&self, path: &str, body: Value) -> (u16, Value) {
        let mut r = self.agent.post(self.url(path)).send_json(body).unwrap();
        (
            r.status().as_u16(),
            r.body_mut().read_json().unwrap_or(Value::Null),
        )
    }

    pub fn post_empty(&self, path: &str) -> (u16, Value) {
        let mut r = self.agent.post(self.url(path)).send_empty().unwrap();
        (
            r.status().as_u16(),
            r.body_mut().read_json().unwrap_or(Value::Null),
        )
    }

    pub fn post_png(&self, path: &str, png: &[u8]) -> (u16, Vec<u8>) {
        let mut r = self
            .agent
            .post(self.url(path))
            .header("content-type", "image/png")
            .send(png)
            .unwrap();
        (
            r.status().as_u16(),
            r.body_mut()
                .with_config()
                .limit(u64::MAX)
                .read_to_vec()
                .unwrap(),
        )
    }

    pub fn put_json(&self, path: &str, body: Value) -> u16 {
        self.agent
            .put(self.url(path))
            .send_json(body)
            .unwrap()
            .status()
            .as_u16()
    }

    /// Runs the whole transaction over HTTP; returns the final state view and the stego PNG if any.
    pub fn full_flow(
        &self,
        password: &str,
        otp: Option<&str>,
        face: &RasterImage,
        at: GeoPoint,
    ) -> (Value, Option<Vec<u8>>) {
        let (_, v) = self.post_json("/session", serde_json::json!({ "username": "alice" }));
        let id = v["session_id"].as_str().unwrap().to_owned();
        let steps: Vec<Box<dyn Fn() -> (u16, Value)>> = vec![
            Box::new(|| {
                self.post_json(
                    &format!("/session/{id}/password"),
                    serde_json::json!({ "password": password }),
                )
            }),
            Box::new(|| self.post_empty(&format!("/session/{id}/otp/request"))),
            Box::new(|| {
                let code = otp.map(str::to_owned).unwrap_or_else(|| self.last_code());
                self.post_json(
                    &format!("/session/{id}/otp/verify"),
                    serde_json::json!({ "code": code }),
                )
            }),
            Box::new(|| {
                let (s, b) = self.post_png(&format!("/session/{id}/face"), &png(face));
                (s, serde_json::from_slice(&b).unwrap())
            }),
            Box::new(|| {
                self.post_json(
                    &format!("/session/{id}/location"),
                    serde_json::json!({ "lat": at.lat(), "lon": at.lon() }),
                )
            }),
        ];
        let mut last = Value::Null;
        for step in steps {
            let (status, view) = step();
            assert_eq!(status, 200, "{view}");
            last = view;
            if last["state"] == "denied" {
                return (last, None);
            }
        }
        let (status, stego) = self.post_png(
            &format!("/session/{id}/finalize"),
            &png(&noise_cover(128, 128, 1)),
        );
        assert_eq!(status, 200);
        (last, Some(stego))
    }
}

pub fn bin() -> &'static Path {
    Path::new(env!("CARGO_BIN_EXE_fourfa"))
}
