use rand::seq::SliceRandom;
use rand::Rng;

use crate::{Error, Result};

pub const AUGMENT_FACTORS: [usize; 4] = [1, 10, 100, 1000];

pub fn check_factor(factor: usize) -> Result<()> {
    if AUGMENT_FACTORS.contains(&factor) {
        Ok(())
    } else {
        Err(Error::Contract(format!("augmentation factor {factor} not in {AUGMENT_FACTORS:?}")))
    }
}

/// The original sentence followed by `factor - 1` random shuffles of it.
pub fn augment_shuffle<T: Clone, R: Rng>(tokens: &[T], factor: usize, rng: &mut R) -> Result<Vec<Vec<T>>> {
    check_factor(factor)?;
    if tokens.is_empty() {
        return Err(Error::Contract("cannot augment an empty sentence".into()));
    }
    let mut out = Vec::with_capacity(factor);
    out.push(tokens.to_vec());
    for _ in 1..factor {
        let mut s = tokens.to_vec();
        s.shuffle(rng);
        out.push(s);
    }
    Ok(out)
}
