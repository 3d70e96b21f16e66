use rand::Rng;

use crate::kernel::TransitionProbs;

/// Samples the buyer-count increment from the exact kernel row:
/// `-1` with `p_pm`, `+1` with `p_mp`, `0` otherwise.
pub fn step_reduced<R: Rng + ?Sized>(rng: &mut R, t: &TransitionProbs) -> i8 {
    let u: f64 = rng.random();
    if u < t.p_pm {
        -1
    } else if u < t.p_pm + t.p_mp {
        1
    } else {
        0
    }
}
