use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObfuscationMode {
    /// Each line becomes the SHA-256 of the line.
    PerLine,
    /// Each whitespace-separated term is hashed; line and term counts stay.
    PerTerm,
}

fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Hash rendered trace text. Not idempotent: applying it twice hashes the
/// hashes, so callers apply it once.
pub fn obfuscate(rendered: &str, mode: ObfuscationMode) -> String {
    rendered
        .split('\n')
        .map(|line| match mode {
            ObfuscationMode::PerLine => sha256_hex(line),
            ObfuscationMode::PerTerm => line.split_whitespace().map(sha256_hex).collect::<Vec<_>>().join(" "),
        })
        .collect::<Vec<_>>()
        .join("\n")
}
