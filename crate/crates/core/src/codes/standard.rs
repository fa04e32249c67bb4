//! Bundled standard codes.
//!
//! The 802.16e and 802.11n base matrices ship as QC description files under
//! `data/`; the random `(1057, 244)` code is regenerated from a fixed seed.

use std::path::PathBuf;

use super::{expand_qc, random_code, ParityCheckMatrix, QcDescription};
use crate::error::{Error, Result};

/// Environment variable overriding the directory of bundled code files.
pub const DATA_DIR_ENV: &str = "LDPC_NOC_DATA";

/// Seed of the bundled random code.
pub const RANDOM_CODE_SEED: u64 = 0x1057_0244;

struct Entry {
    name: &'static str,
    label: &'static str,
    text: &'static str,
}

const QC_CODES: &[Entry] = &[
    Entry {
        name: "wimax_2304_r12",
        label: "802.16e (2304,1152)",
        text: include_str!("../../data/wimax_2304_r12.qc"),
    },
    Entry {
        name: "wimax_2304_r56",
        label: "802.16e (2304,384)",
        text: include_str!("../../data/wimax_2304_r56.qc"),
    },
    Entry {
        name: "wimax_1632_r12",
        label: "802.16e (1632,816)",
        text: include_str!("../../data/wimax_1632_r12.qc"),
    },
    Entry {
        name: "wimax_1632_r56",
        label: "802.16e (1632,272)",
        text: include_str!("../../data/wimax_1632_r56.qc"),
    },
    Entry {
        name: "wimax_576_r12",
        label: "802.16e (576,288)",
        text: include_str!("../../data/wimax_576_r12.qc"),
    },
    Entry {
        name: "wimax_576_r56",
        label: "802.16e (576,96)",
        text: include_str!("../../data/wimax_576_r56.qc"),
    },
    Entry {
        name: "wifi_1944_r34",
        label: "802.11n (1944,486)",
        text: include_str!("../../data/wifi_1944_r34.qc"),
    },
];

pub const RANDOM_1057: &str = "random_1057_244";

/// Names accepted by [`builtin`].
pub fn builtin_names() -> Vec<&'static str> {
    QC_CODES
        .iter()
        .map(|e| e.name)
        .chain(std::iter::once(RANDOM_1057))
        .collect()
}

/// Loads a bundled code by name.
pub fn builtin(name: &str) -> Result<ParityCheckMatrix> {
    if name == RANDOM_1057 {
        let mut h = random_code(1057, 244, 13, RANDOM_CODE_SEED)?;
        h.set_label("random (1057,244)");
        return Ok(h);
    }
    let entry = QC_CODES
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::InvalidParam(format!("no bundled code named '{name}'")))?;
    let mut h = expand_qc(&QcDescription::parse(entry.text)?)?;
    h.set_label(entry.label);
    Ok(h)
}

/// Directory holding the bundled code files on disk.
pub fn data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data")))
}
