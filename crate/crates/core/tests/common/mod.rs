#![allow(dead_code)]

use luxen_core::{Column, ColumnData, Frame};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const WORDS: [&str; 8] = ["alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta"];

/// Small mixed-type frame: correlated floats, wide and narrow integers,
/// dictionary strings, dates and booleans, with scattered nulls.
pub fn random_frame(seed: u64, max_rows: usize, max_cols: usize) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = rng.random_range(1..=max_rows);
    let cols = rng.random_range(2..=max_cols);
    let latent: Vec<f64> = (0..rows).map(|_| rng.random_range(-3.0..3.0)).collect();
    let mut columns = Vec::new();
    for c in 0..cols {
        let null_p = if rng.random_bool(0.3) { 0.1 } else { 0.0 };
        let kind = rng.random_range(0..6);
        let name = format!("c{c}");
        let data = match kind {
            0 => {
                let a = rng.random_range(-2.0..2.0);
                let skew = rng.random_range(0.0..1.0);
                ColumnData::Float(
                    latent
                        .iter()
                        .map(|l| {
                            let v = a * l + skew * l * l + rng.random_range(-1.0..1.0);
                            (!rng.random_bool(null_p)).then_some(v)
                        })
                        .collect(),
                )
            }
            1 => ColumnData::Integer((0..rows).map(|_| (!rng.random_bool(null_p)).then(|| rng.random_range(-500..500))).collect()),
            2 => ColumnData::Integer((0..rows).map(|_| (!rng.random_bool(null_p)).then(|| rng.random_range(0..4))).collect()),
            3 => {
                let k = rng.random_range(1..=WORDS.len());
                let cells: Vec<Option<&str>> =
                    (0..rows).map(|_| (!rng.random_bool(null_p)).then(|| WORDS[rng.random_range(0..k)])).collect();
                columns.push(Column::from_strings(name, cells));
                continue;
            }
            4 => ColumnData::Datetime(
                (0..rows)
                    .map(|_| (!rng.random_bool(null_p)).then(|| 1_577_836_800 + rng.random_range(0..800) * 86_400))
                    .collect(),
            ),
            _ => ColumnData::Boolean((0..rows).map(|_| (!rng.random_bool(null_p)).then(|| rng.random_bool(0.4))).collect()),
        };
        columns.push(Column::new(name, data));
    }
    Frame::new(columns, "random").unwrap()
}

/// Byte image of a frame's contents, for before/after comparisons.
pub fn frame_bytes(frame: &Frame) -> String {
    let mut s = format!("v{} i{:?}\n", frame.version(), frame.index());
    for c in frame.columns() {
        s.push_str(&format!("{}={:?}\n", c.name, c.data));
    }
    s
}
pub mod expansion;
pub mod oracle;
pub mod processing;
