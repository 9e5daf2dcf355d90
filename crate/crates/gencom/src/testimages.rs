//! Procedural 256×256 grayscale test scenes.
//!
//! The same images ship as PGM files under `data/`; `builtin:<name>` in a
//! config loads them from memory.

use gencom_core::rng::CounterRng;
use gencom_core::Image;

pub const SIZE: usize = 256;
pub const NAMES: [&str; 3] = ["hills", "cells", "terrain"];

const HILLS_PGM: &[u8] = include_bytes!("../data/hills.pgm");
const CELLS_PGM: &[u8] = include_bytes!("../data/cells.pgm");
const TERRAIN_PGM: &[u8] = include_bytes!("../data/terrain.pgm");

/// Loads a shipped image by name.
pub fn builtin(name: &str) -> Option<Image> {
    let bytes = match name {
        "hills" => HILLS_PGM,
        "cells" => CELLS_PGM,
        "terrain" => TERRAIN_PGM,
        _ => return None,
    };
    crate::pnm::decode(bytes).ok()
}

pub fn all_builtin() -> Vec<(&'static str, Image)> {
    NAMES
        .iter()
        .map(|&n| (n, builtin(n).expect("shipped image decodes")))
        .collect()
}

/// Regenerates a scene from its procedure.
pub fn generate(name: &str) -> Option<Image> {
    let f: fn(f64, f64) -> f64 = match name {
        "hills" => hills,
        "cells" => cells,
        "terrain" => terrain,
        _ => return None,
    };
    Some(
        Image::from_fn(SIZE, SIZE, 1, |x, y, _| {
            let u = (x as f64 + 0.5) / SIZE as f64;
            let v = (y as f64 + 0.5) / SIZE as f64;
            quantize(f(u, v))
        })
        .expect("fixed dimensions"),
    )
}

fn quantize(v: f64) -> u8 {
    libm::rint(v).clamp(0.0, 255.0) as u8
}

fn smoothstep(edge0: f64, edge1: f64, x: f64) -> f64 {
    let t = ((x - edge0) / (edge1 - edge0)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

fn hills(u: f64, v: f64) -> f64 {
    let mut value = 200.0 - 50.0 * v + 8.0 * (fbm(u, v, 6.0, 4, 0.5, 11) - 0.5);
    let ridges = [
        (0.35, 0.06, 3.0, 0.4, 165.0),
        (0.50, 0.05, 5.0, 1.7, 135.0),
        (0.65, 0.07, 2.0, 2.9, 105.0),
        (0.80, 0.04, 7.0, 0.8, 80.0),
    ];
    for (layer, (base, amp, freq, phase, shade)) in ridges.into_iter().enumerate() {
        let line = base
            + amp * libm::sin(core::f64::consts::TAU * freq * u / 2.0 + phase)
            + 0.3 * amp * libm::sin(core::f64::consts::TAU * 3.1 * freq * u + 2.0 * phase)
            + 0.015 * (fbm(u, 0.0, 24.0, 3, 0.5, 20 + layer as u64) - 0.5);
        let t = smoothstep(line - 0.004, line + 0.004, v);
        let texture = 90.0 * (fbm(u, v, 16.0 + 8.0 * layer as f64, 5, 0.8, layer as u64) - 0.5);
        value = value * (1.0 - t) + (shade + texture) * t;
    }
    value
}

fn cells(u: f64, v: f64) -> f64 {
    let mut rng = CounterRng::new(0xCE11_5EED);
    let mut value = 110.0 + 30.0 * u - 20.0 * v + 60.0 * (fbm(u, v, 12.0, 5, 0.8, 31) - 0.5);
    for i in 0..14 {
        let cx = 0.1 + 0.8 * rng.next_f64();
        let cy = 0.1 + 0.8 * rng.next_f64();
        let r = 0.09 + 0.08 * rng.next_f64();
        let aspect = 0.7 + 0.6 * rng.next_f64();
        let level = 60.0 + 130.0 * rng.next_f64();
        let dx = (u - cx) / r;
        let dy = (v - cy) / (r * aspect);
        let d = libm::sqrt(dx * dx + dy * dy);
        let inside = 1.0 - smoothstep(0.93, 1.0, d);
        let shading = 1.0 - 0.25 * d * d;
        let grain = 80.0 * (fbm(u, v, 32.0, 4, 0.8, 40 + i) - 0.5);
        value = value * (1.0 - 0.7 * inside) + (level * shading + grain) * 0.7 * inside;
    }
    value
}

fn lattice(ix: i64, iy: i64, octave: u64) -> f64 {
    let h = gencom_core::rng::value_at(
        0x7E44_A1B0 ^ octave,
        (ix.rem_euclid(1 << 16) as u64) << 16 | iy.rem_euclid(1 << 16) as u64,
    );
    gencom_core::rng::unit_closed_low(h)
}

fn value_noise(x: f64, y: f64, octave: u64) -> f64 {
    let (x0, y0) = (libm::floor(x), libm::floor(y));
    let (tx, ty) = (smoothstep(0.0, 1.0, x - x0), smoothstep(0.0, 1.0, y - y0));
    let (ix, iy) = (x0 as i64, y0 as i64);
    let a = lattice(ix, iy, octave);
    let b = lattice(ix + 1, iy, octave);
    let c = lattice(ix, iy + 1, octave);
    let d = lattice(ix + 1, iy + 1, octave);
    let top = a + (b - a) * tx;
    let bottom = c + (d - c) * tx;
    top + (bottom - top) * ty
}

/// Fractal value noise in [0, 1].
fn fbm(u: f64, v: f64, base_freq: f64, octaves: u64, persistence: f64, seed: u64) -> f64 {
    let mut sum = 0.0;
    let mut amp = 1.0;
    let mut freq = base_freq;
    let mut norm = 0.0;
    for octave in 0..octaves {
        sum += amp * value_noise(u * freq, v * freq, seed * 16 + octave);
        norm += amp;
        amp *= persistence;
        freq *= 2.0;
    }
    sum / norm
}

fn terrain(u: f64, v: f64) -> f64 {
    20.0 + 215.0 * fbm(u, v, 4.0, 7, 0.8, 0)
}
