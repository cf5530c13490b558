use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Event times on `[0, horizon)` of a Hawkes process with intensity
/// `mu + sum_{t_k < t} alpha exp(-beta (t - t_k))`, by Ogata thinning.
pub fn simulate_hawkes(
    mu: f64,
    alpha: f64,
    beta: f64,
    horizon: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_hawkes_with(mu, alpha, beta, horizon, &mut rng)
}

pub fn simulate_hawkes_with<R: Rng + ?Sized>(
    mu: f64,
    alpha: f64,
    beta: f64,
    horizon: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::config(
            "hawkes.mu",
            format!("must be >= 0, got {mu}"),
        ));
    }
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::config(
            "hawkes.alpha",
            format!("must be >= 0, got {alpha}"),
        ));
    }
    if !(alpha < beta && beta.is_finite()) {
        return Err(Error::config(
            "hawkes.alpha",
            format!("alpha {alpha} must be below beta {beta} for a stationary process"),
        ));
    }

    let mut events = Vec::new();
    let mut t = 0.0;
    // Excitation sum_k alpha exp(-beta (t - t_k)) at the current time.
    let mut excitation = 0.0;
    loop {
        // Intensity only decays until the next event, so its current value
        // bounds it on the whole waiting interval.
        let bound = mu + excitation;
        if bound <= 0.0 {
            break;
        }
        let wait = -(1.0 - rng.random::<f64>()).ln() / bound;
        t += wait;
        if t >= horizon {
            break;
        }
        excitation *= (-beta * wait).exp();
        let intensity = mu + excitation;
        if rng.random::<f64>() * bound <= intensity {
            events.push(t);
            excitation += alpha;
        }
    }
    Ok(events)
}
