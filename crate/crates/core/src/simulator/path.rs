use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::{hawkes::simulate_hawkes_with, stream, SimConfig};
use crate::error::{Error, Result};
use crate::grid::ReturnGrid;

/// A simulated return grid with everything needed to score a detector.
#[derive(Debug, Clone, PartialEq)]
pub struct SimPath {
    pub config: SimConfig,
    pub grid: ReturnGrid,
    /// `tau(u_j)^2 * max(v, 0)` over slot `j`, annualized.
    pub true_spot_variance: Vec<f64>,
    /// Diffusive part of each return, drift excluded.
    pub brownian_increments: Vec<f64>,
    /// 0-based slots holding at least one jump, increasing.
    pub true_jump_indices: Vec<usize>,
    /// Net jump in each of those slots.
    pub true_jump_sizes: Vec<f64>,
    /// Individual Hawkes event times in years.
    pub jump_event_times: Vec<f64>,
    pub jump_event_sizes: Vec<f64>,
    pub warnings: Vec<String>,
}

impl SimPath {
    pub fn drift_per_step(&self) -> f64 {
        self.config.drift * self.config.delta
    }
}

/// Simulates one path; identical configurations give bit-identical paths.
pub fn simulate_path(config: &SimConfig) -> Result<SimPath> {
    config.validate()?;
    let mut warnings = Vec::new();
    if !config.sv.satisfies_feller() {
        warnings.push(format!(
            "2 kappa theta = {} < xi^2 = {}; variance will hit zero often",
            2.0 * config.sv.kappa * config.sv.theta,
            config.sv.xi * config.sv.xi
        ));
    }

    let (m, n, delta) = (config.m, config.m * config.days, config.delta);

    let mut hawkes_rng = ChaCha8Rng::seed_from_u64(config.seed);
    hawkes_rng.set_stream(stream::HAWKES);
    let h = &config.hawkes;
    let jump_event_times =
        simulate_hawkes_with(h.mu, h.alpha, h.beta, config.horizon(), &mut hawkes_rng)?;

    let mut size_rng = ChaCha8Rng::seed_from_u64(config.seed);
    size_rng.set_stream(stream::JUMP_SIZES);
    let size_dist = Normal::new(config.jump_size.mean, config.jump_size.std_dev)
        .map_err(|e| Error::config("jump_size", e.to_string()))?;
    let jump_event_sizes: Vec<f64> = jump_event_times
        .iter()
        .map(|_| size_dist.sample(&mut size_rng))
        .collect();

    let mut jumps_per_slot = vec![0.0f64; n];
    let mut has_jump = vec![false; n];
    for (&t, &size) in jump_event_times.iter().zip(&jump_event_sizes) {
        let slot = ((t / delta).floor() as usize).min(n - 1);
        jumps_per_slot[slot] += size;
        has_jump[slot] = true;
    }
    let true_jump_indices: Vec<usize> = (0..n).filter(|&j| has_jump[j]).collect();
    let true_jump_sizes: Vec<f64> = true_jump_indices
        .iter()
        .map(|&j| jumps_per_slot[j])
        .collect();

    let tau = config.diurnal.slot_factors(m);
    let sv = &config.sv;
    let sqrt_delta = delta.sqrt();
    let drift_step = config.drift * delta;
    let rho_perp = (1.0 - sv.rho * sv.rho).sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream::DIFFUSION);

    let mut returns = Vec::with_capacity(n);
    let mut brownian_increments = Vec::with_capacity(n);
    let mut true_spot_variance = Vec::with_capacity(n);
    let mut v = sv.v0;
    for j in 0..n {
        let z_price: f64 = StandardNormal.sample(&mut rng);
        let z_other: f64 = StandardNormal.sample(&mut rng);
        let v_plus = v.max(0.0);
        let tau_j = tau[j % m];
        let brownian = tau_j * v_plus.sqrt() * sqrt_delta * z_price;
        true_spot_variance.push(tau_j * tau_j * v_plus);
        brownian_increments.push(brownian);
        returns.push(brownian + drift_step + jumps_per_slot[j]);

        let z_var = sv.rho * z_price + rho_perp * z_other;
        v += sv.kappa * (sv.theta - v_plus) * delta + sv.xi * v_plus.sqrt() * sqrt_delta * z_var;
    }

    Ok(SimPath {
        config: config.clone(),
        grid: ReturnGrid::new(returns, m, delta)?,
        true_spot_variance,
        brownian_increments,
        true_jump_indices,
        true_jump_sizes,
        jump_event_times,
        jump_event_sizes,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{DiurnalShape, HawkesParams, SvParams};

    #[test]
    fn constant_volatility_is_gaussian() {
        let sigma = 0.2;
        let config = SimConfig::constant_volatility(sigma, 77, 252, 4);
        let path = simulate_path(&config).unwrap();
        let r = path.grid.returns();
        assert_eq!(r.len(), 19404);
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        let var = r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r.len() - 1) as f64;
        let target = sigma * sigma * config.delta;
        // Relative sd of a sample variance is sqrt(2/n) ~ 1%.
        assert!((var / target - 1.0).abs() < 0.05, "{}", var / target);
        assert!(path.true_jump_indices.is_empty());
        assert!(path
            .true_spot_variance
            .iter()
            .all(|&s| (s - 0.04).abs() < 1e-15));
    }

    #[test]
    fn reconstruction_identity() {
        for seed in 0..5 {
            let config = SimConfig {
                drift: 0.07,
                days: 40,
                seed,
                ..SimConfig::default()
            };
            let path = simulate_path(&config).unwrap();
            let mut jumps = vec![0.0; path.grid.len()];
            for (&j, &s) in path.true_jump_indices.iter().zip(&path.true_jump_sizes) {
                jumps[j] = s;
            }
            for (j, &r) in path.grid.returns().iter().enumerate() {
                let rebuilt = path.brownian_increments[j] + path.drift_per_step() + jumps[j];
                assert!((r - rebuilt).abs() <= 1e-12, "seed {seed} slot {j}");
            }
            let total: f64 = path.jump_event_sizes.iter().sum();
            let slot_total: f64 = path.true_jump_sizes.iter().sum();
            assert!((total - slot_total).abs() < 1e-12);
        }
    }

    #[test]
    fn seed_determinism() {
        let config = SimConfig {
            days: 20,
            seed: 99,
            ..SimConfig::default()
        };
        let a = simulate_path(&config).unwrap();
        let b = simulate_path(&config).unwrap();
        assert_eq!(a, b);
        let c = simulate_path(&SimConfig {
            seed: 100,
            ..config
        })
        .unwrap();
        assert_ne!(a.grid, c.grid);
    }

    #[test]
    fn no_jumps_without_baseline() {
        let config = SimConfig {
            hawkes: HawkesParams::none(),
            days: 30,
            ..SimConfig::default()
        };
        let path = simulate_path(&config).unwrap();
        assert!(path.true_jump_indices.is_empty());
        assert!(path.jump_event_times.is_empty());
    }

    #[test]
    fn jump_stream_independent_of_diffusion() {
        // Changing only the variance parameters keeps the jump draws.
        let base = SimConfig {
            days: 60,
            seed: 3,
            ..SimConfig::default()
        };
        let other = SimConfig {
            sv: SvParams {
                xi: 0.1,
                ..SvParams::default()
            },
            ..base.clone()
        };
        let a = simulate_path(&base).unwrap();
        let b = simulate_path(&other).unwrap();
        assert_eq!(a.jump_event_times, b.jump_event_times);
        assert_eq!(a.jump_event_sizes, b.jump_event_sizes);
    }

    #[test]
    fn variance_never_negative() {
        // Far outside the Feller region the proposal often crosses zero.
        let config = SimConfig {
            sv: SvParams {
                theta: 0.02,
                kappa: 1.0,
                xi: 3.0,
                rho: -0.9,
                v0: 0.02,
            },
            days: 100,
            seed: 8,
            ..SimConfig::default()
        };
        let path = simulate_path(&config).unwrap();
        assert!(!path.warnings.is_empty());
        assert!(path.true_spot_variance.iter().all(|&s| s >= 0.0));
        assert!(path.true_spot_variance.contains(&0.0));
    }

    #[test]
    fn leverage_sign() {
        let config = SimConfig {
            sv: SvParams {
                rho: -0.7,
                ..SvParams::default()
            },
            diurnal: DiurnalShape::flat(),
            hawkes: HawkesParams::none(),
            days: 500,
            seed: 12,
            ..SimConfig::default()
        };
        let path = simulate_path(&config).unwrap();
        let r = path.grid.returns();
        // Spot variance at j+1 reflects the shock drawn alongside return j.
        let dv: Vec<f64> = path
            .true_spot_variance
            .windows(2)
            .map(|w| w[1] - w[0])
            .collect();
        let x = &r[..dv.len()];
        let mx = x.iter().sum::<f64>() / x.len() as f64;
        let my = dv.iter().sum::<f64>() / dv.len() as f64;
        let cov: f64 = x.iter().zip(&dv).map(|(a, b)| (a - mx) * (b - my)).sum();
        assert!(cov < 0.0);
    }

    #[test]
    fn invalid_config_rejected() {
        let mut config = SimConfig::default();
        config.hawkes.alpha = 3000.0;
        assert!(simulate_path(&config).unwrap_err().is_config());
    }
}
