//! The standard consensus accuracy the finer-grained metrics are compared
//! against.
//!
//! The raw form is `min(f / 3, 1)` where `f` is how many annotators gave the
//! predicted answer. The official form averages the raw score over all
//! leave-one-annotator-out subsets; at `n = 10` this yields the familiar
//! mapping `f = 1, 2, 3, >= 4` to `0.3, 0.6, 0.9, 1.0`. The average is
//! computed here in closed form over a single integer numerator, so it is
//! exact for any annotator count.

use crate::answer::Pattern;
use crate::error::{Error, Result};
use crate::{count, Real};

/// Raw accuracy `min(f / 3, 1)`; `0` when the prediction matches no entry.
pub fn vqa3plus_raw<T: Real, P: Pattern + ?Sized>(pattern: &P, predicted: &str) -> T {
    let f = pattern.frequency_of(predicted).unwrap_or(0);
    count::<T>(f.min(3)) / count::<T>(3)
}

/// Mean raw accuracy over all `n` leave-one-annotator-out subsets.
///
/// Removing one of the `f` matching annotators scores `min((f-1)/3, 1)`;
/// removing any of the other `n - f` scores `min(f/3, 1)`. Both numerators
/// are integers in units of thirds, giving
/// `(f * min(f-1, 3) + (n-f) * min(f, 3)) / (3n)` with a single division.
///
/// Errors on patterns with fewer than two annotations.
pub fn vqa3plus_averaged<T: Real, P: Pattern + ?Sized>(pattern: &P, predicted: &str) -> Result<T> {
    let n = pattern.total();
    if n < 2 {
        return Err(Error::DegeneratePattern { total: n });
    }
    let f = pattern.frequency_of(predicted).unwrap_or(0);
    let thirds = f * f.saturating_sub(1).min(3) + (n - f) * f.min(3);
    Ok(count::<T>(thirds) / count::<T>(3 * n))
}
