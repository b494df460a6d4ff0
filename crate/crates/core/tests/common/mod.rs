#![allow(dead_code)]

use std::cell::{Cell, RefCell};

use fourfa_core::factors::{
    enroll_user, render_template, FaceTemplate, GeoPoint, UserRecord, FACE_CELLS, RAMP,
};
use fourfa_core::raster::RasterImage;
use fourfa_core::store::MemoryStore;
use fourfa_core::transport::{DeliveryId, SmsTransport, TransportError};

/// Records every message; can be switched to fail.
#[derive(Default)]
pub struct MockSms {
    pub sent: RefCell<Vec<(String, String)>>,
    pub down: Cell<bool>,
}

impl MockSms {
    pub fn last_code(&self) -> Option<String> {
        self.sent
            .borrow()
            .last()
            .map(|(_, body)| body.rsplit(' ').next().unwrap().to_owned())
    }
}

impl SmsTransport for MockSms {
    fn send(&self, destination: &str, body: &str) -> Result<DeliveryId, TransportError> {
        if self.down.get() {
            return Err(TransportError("mock transport down".into()));
        }
        let mut sent = self.sent.borrow_mut();
        sent.push((destination.into(), body.into()));
        Ok(DeliveryId(format!("mock-{}", sent.len())))
    }
}

pub fn face_template() -> FaceTemplate {
    let cells = (0..FACE_CELLS)
        .map(|i| RAMP[(i / 64 * 3 + i % 64 / 5) % 10])
        .collect();
    FaceTemplate::from_cells(cells).unwrap()
}

/// The enrolled face with the first `n` cells moved to a different ramp character.
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

/// `meters` due north of `p` along the meridian.
pub fn north_of(p: GeoPoint, meters: f64) -> GeoPoint {
    GeoPoint::new(p.lat() + meters / 111_195.0, p.lon()).unwrap()
}

pub const PASSWORD: &str = "correct horse battery";

pub fn alice() -> UserRecord {
    enroll_user("alice", PASSWORD.as_bytes(), &face_image(), home(), [7; 16]).unwrap()
}

pub fn store_with_alice() -> MemoryStore {
    let mut store = MemoryStore::new();
    store.put(alice());
    store
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
    RasterImage::new(width, height, fourfa_core::Channels::Rgb, samples).unwrap()
}
