//! Hex escaping for n-grams in text outputs (CSV, JSON, debug dumps).
//!
//! Printable ASCII passes through unchanged except `\`, which doubles.
//! Everything else becomes `\xHH`. The encoding is reversible.

/// Escape raw gram bytes into a printable string.
pub fn escape_bytes(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len());
    for &b in bytes {
        match b {
            b'\\' => out.push_str("\\\\"),
            0x20..=0x7e => out.push(b as char),
            _ => out.push_str(&format!("\\x{b:02x}")),
        }
    }
    out
}

/// Reverse of [`escape_bytes`]. Returns `None` on malformed input.
pub fn unescape_bytes(s: &str) -> Option<Vec<u8>> {
    let mut out = Vec::with_capacity(s.len());
    let mut it = s.bytes();
    while let Some(b) = it.next() {
        if b != b'\\' {
            if !(0x20..=0x7e).contains(&b) {
                return None;
            }
            out.push(b);
            continue;
        }
        match it.next()? {
            b'\\' => out.push(b'\\'),
            b'x' => {
                let hi = hex_val(it.next()?)?;
                let lo = hex_val(it.next()?)?;
                out.push(hi << 4 | lo);
            }
            _ => return None,
        }
    }
    Some(out)
}

fn hex_val(b: u8) -> Option<u8> {
    match b {
        b'0'..=b'9' => Some(b - b'0'),
        b'a'..=b'f' => Some(b - b'a' + 10),
        b'A'..=b'F' => Some(b - b'A' + 10),
        _ => None,
    }
}
