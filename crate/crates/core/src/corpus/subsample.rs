use rand::Rng;

use super::{TokenId, TokenStream};
use crate::error::{Error, Result};

/// Keeps each sentence independently with probability `1/factor`.
///
/// A sentence is a span ending in `eos` (a trailing span without one counts
/// too). `factor == 1` returns the stream untouched without consuming
/// randomness.
pub fn subsample<R: Rng + ?Sized>(
    stream: &TokenStream,
    eos: TokenId,
    factor: u32,
    rng: &mut R,
) -> Result<TokenStream> {
    if factor == 0 {
        return Err(Error::InvalidArgument("subsample factor must be ≥ 1".into()));
    }
    if factor == 1 {
        return Ok(stream.clone());
    }
    let p = 1.0 / f64::from(factor);
    let mut kept = Vec::new();
    for sentence in stream.ids.split_inclusive(|&id| id == eos) {
        if rng.random_bool(p) {
            kept.extend_from_slice(sentence);
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptySubsample);
    }
    TokenStream::new(kept, stream.source)
}
