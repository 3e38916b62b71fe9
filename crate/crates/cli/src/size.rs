//! Byte counts with binary suffixes.

use anyhow::{bail, Context, Result};

const UNITS: [(&str, u64); 4] = [("GiB", 1 << 30), ("MiB", 1 << 20), ("KiB", 1 << 10), ("B", 1)];

/// Parses `4096`, `256KiB`, `16GiB`. Decimal units such as `MB` are rejected.
pub fn parse_bytes(text: &str) -> Result<u64> {
    let text = text.trim();
    let (digits, scale) = UNITS
        .iter()
        .find_map(|(suffix, scale)| text.strip_suffix(suffix).map(|d| (d.trim_end(), *scale)))
        .unwrap_or((text, 1));
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        bail!("invalid byte size {text:?} (expected e.g. 4096, 256KiB, 16GiB)");
    }
    let value: u64 = digits.parse().with_context(|| format!("byte size {text:?} out of range"))?;
    value.checked_mul(scale).with_context(|| format!("byte size {text:?} out of range"))
}
