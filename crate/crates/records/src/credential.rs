//! Salted PBKDF2-HMAC-SHA256 credential hashes.
//!
//! Encoded as `pbkdf2-sha256$<rounds>$<salt hex>$<hash hex>`.

use rand::RngCore;
use sha2::Sha256;

const SCHEME: &str = "pbkdf2-sha256";
pub const ROUNDS: u32 = 100_000;
const SALT_LEN: usize = 16;
const HASH_LEN: usize = 32;

pub fn hash(credential: &str) -> String {
    let mut salt = [0u8; SALT_LEN];
    rand::rng().fill_bytes(&mut salt);
    encode(credential, &salt, ROUNDS)
}

fn encode(credential: &str, salt: &[u8], rounds: u32) -> String {
    let mut out = [0u8; HASH_LEN];
    pbkdf2::pbkdf2_hmac::<Sha256>(credential.as_bytes(), salt, rounds, &mut out);
    format!("{SCHEME}${rounds}${}${}", hex::encode(salt), hex::encode(out))
}

/// Checks `credential` against an encoded hash. Malformed hashes verify nothing.
pub fn verify(credential: &str, encoded: &str) -> bool {
    let parts: Vec<&str> = encoded.split('$').collect();
    let [scheme, rounds, salt, expected] = parts[..] else {
        return false;
    };
    let (Ok(rounds), Ok(salt), Ok(expected)) = (rounds.parse::<u32>(), hex::decode(salt), hex::decode(expected)) else {
        return false;
    };
    if scheme != SCHEME || rounds == 0 || expected.len() != HASH_LEN {
        return false;
    }
    let mut out = [0u8; HASH_LEN];
    pbkdf2::pbkdf2_hmac::<Sha256>(credential.as_bytes(), &salt, rounds, &mut out);
    out.iter().zip(&expected).fold(0u8, |acc, (a, b)| acc | (a ^ b)) == 0
}

/// Burns the same work as a real verification, for unknown usernames.
pub fn verify_dummy(credential: &str) {
    let mut out = [0u8; HASH_LEN];
    pbkdf2::pbkdf2_hmac::<Sha256>(credential.as_bytes(), &[0u8; SALT_LEN], ROUNDS, &mut out);
}
