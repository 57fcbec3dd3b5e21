//! Extended-ensemble Monte Carlo: the twist sector (periodic vs
//! antiperiodic wall) is a dynamical binary variable updated alongside
//! single-spin Metropolis sweeps, and Z⁻/Z is estimated from the time
//! fractions the chain spends in each sector.
//!
//! The generator is ChaCha8 seeded from an explicit 64-bit seed, so a
//! run is bitwise reproducible on any platform. Independent chains use
//! seed, seed+1, ... and are combined by inverse-variance weighting.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::SpinLattice;

/// Configuration of one estimation run.
#[derive(Clone, Debug)]
pub struct McConfig {
    pub lattice: SpinLattice<f64>,
    /// Measured sweeps (one sweep = one Metropolis attempt per site).
    pub sweeps: u64,
    pub thermalization: u64,
    pub seed: u64,
    /// Sector-flip proposals interleaved per sweep.
    pub sector_flips_per_sweep: u32,
    /// Independent chains (seeds seed..seed+chains-1).
    pub chains: u32,
}

impl McConfig {
    pub fn new(lattice: SpinLattice<f64>, sweeps: u64, thermalization: u64, seed: u64) -> Self {
        McConfig {
            lattice,
            sweeps,
            thermalization,
            seed,
            sector_flips_per_sweep: 1,
            chains: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.sweeps == 0 {
            return Err(Error::InvalidSpec("sweeps must be positive".into()));
        }
        if self.chains == 0 {
            return Err(Error::InvalidSpec("need at least one chain".into()));
        }
        Ok(())
    }
}

/// Sector-occupation estimate of Z⁻/Z with a blocking error bar.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct McEstimate {
    /// Ẑ = (time in twisted sector)/(time in untwisted sector).
    pub ratio: f64,
    pub std_err: f64,
    pub spin_acceptance: f64,
    pub sector_acceptance: f64,
    /// Integrated autocorrelation time of the sector variable, in sweeps.
    pub tau: f64,
    pub chains: u32,
}

/// Correlator estimate at one separation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct McCorrelator {
    pub n: u32,
    pub value: f64,
    pub std_err: f64,
}

struct Chain {
    spins: Vec<i8>,
    /// neighbors[i]: (site, coupling, on-wall flag)
    neighbors: Vec<Vec<(usize, f64, bool)>>,
    wall_bonds: Vec<(usize, usize, f64)>,
    sector: bool,
    rng: ChaCha8Rng,
    spin_accepts: u64,
    spin_attempts: u64,
    sector_accepts: u64,
    sector_attempts: u64,
}

impl Chain {
    fn new(lattice: &SpinLattice<f64>, seed: u64) -> Self {
        let n = lattice.sites();
        let mut neighbors = vec![Vec::new(); n];
        let mut wall_bonds = Vec::new();
        for (idx, b) in lattice.bonds.iter().enumerate() {
            let on_wall = lattice.twist_mask[idx];
            neighbors[b.i].push((b.j, b.coupling, on_wall));
            neighbors[b.j].push((b.i, b.coupling, on_wall));
            if on_wall {
                wall_bonds.push((b.i, b.j, b.coupling));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spins = (0..n)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        Chain {
            spins,
            neighbors,
            wall_bonds,
            sector: false,
            rng,
            spin_accepts: 0,
            spin_attempts: 0,
            sector_accepts: 0,
            sector_attempts: 0,
        }
    }

    #[inline]
    fn coupling_sign(&self, on_wall: bool) -> f64 {
        if on_wall && self.sector {
            -1.0
        } else {
            1.0
        }
    }

    fn sweep(&mut self) {
        for i in 0..self.spins.len() {
            let mut field = 0.0;
            for &(j, k, w) in &self.neighbors[i] {
                field += self.coupling_sign(w) * k * self.spins[j] as f64;
            }
            // flipping σ_i changes the weight exponent by -2σ_i·field
            let delta = -2.0 * self.spins[i] as f64 * field;
            self.spin_attempts += 1;
            if delta >= 0.0 || self.rng.random::<f64>() < delta.exp() {
                self.spins[i] = -self.spins[i];
                self.spin_accepts += 1;
            }
        }
    }

    fn propose_sector_flip(&mut self) {
        // only the wall bonds change sign: ΔE = -2 Σ_wall K^{eff} σσ
        let mut wall_energy = 0.0;
        for &(i, j, k) in &self.wall_bonds {
            wall_energy += k * (self.spins[i] * self.spins[j]) as f64;
        }
        if self.sector {
            wall_energy = -wall_energy;
        }
        let delta = -2.0 * wall_energy;
        self.sector_attempts += 1;
        if delta >= 0.0 || self.rng.random::<f64>() < delta.exp() {
            self.sector = !self.sector;
            self.sector_accepts += 1;
        }
    }

    fn step(&mut self, sector_flips: u32) {
        self.sweep();
        for _ in 0..sector_flips {
            self.propose_sector_flip();
        }
    }
}

/// Blocking analysis: doubles the block size as long as at least 32
/// blocks remain and takes the plateau (maximum) of the per-level
/// error estimates, which is where the blocked samples have
/// decorrelated. Returns (mean, err, tau).
fn blocking_error(series: &[f64]) -> (f64, f64, f64) {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let var0 = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    let naive_err2 = var0 / n as f64;

    let mut blocks: Vec<f64> = series.to_vec();
    let mut best_err2 = naive_err2;
    while blocks.len() / 2 >= 32 {
        blocks = blocks
            .chunks_exact(2)
            .map(|c| 0.5 * (c[0] + c[1]))
            .collect();
        let nb = blocks.len();
        let bmean = blocks.iter().sum::<f64>() / nb as f64;
        let bvar = blocks.iter().map(|x| (x - bmean).powi(2)).sum::<f64>() / (nb as f64 - 1.0);
        best_err2 = best_err2.max(bvar / nb as f64);
    }
    let err = best_err2.sqrt();
    let tau = if var0 > 0.0 {
        0.5 * best_err2 * n as f64 / var0
    } else {
        0.5
    };
    (mean, err.max(f64::MIN_POSITIVE), tau)
}

fn run_single_chain(config: &McConfig, seed: u64) -> Result<McEstimate> {
    let mut chain = Chain::new(&config.lattice, seed);
    for _ in 0..config.thermalization {
        chain.step(config.sector_flips_per_sweep);
    }
    let mut indicator = Vec::with_capacity(config.sweeps as usize);
    for _ in 0..config.sweeps {
        chain.step(config.sector_flips_per_sweep);
        indicator.push(if chain.sector { 1.0 } else { 0.0 });
    }
    let visits_twisted = indicator.iter().sum::<f64>() as u64;
    if visits_twisted == 0 || visits_twisted == config.sweeps {
        return Err(Error::FailedTunneling(format!(
            "chain never left the {} sector ({} of {} sweeps twisted; sector acceptance {:.3})",
            if visits_twisted == 0 {
                "untwisted"
            } else {
                "twisted"
            },
            visits_twisted,
            config.sweeps,
            chain.sector_accepts as f64 / chain.sector_attempts.max(1) as f64,
        )));
    }
    let (f, f_err, tau) = blocking_error(&indicator);
    // Ẑ = f/(1-f); δẐ = δf/(1-f)²
    let ratio = f / (1.0 - f);
    let std_err = f_err / (1.0 - f).powi(2);
    Ok(McEstimate {
        ratio,
        std_err,
        spin_acceptance: chain.spin_accepts as f64 / chain.spin_attempts.max(1) as f64,
        sector_acceptance: chain.sector_accepts as f64 / chain.sector_attempts.max(1) as f64,
        tau,
        chains: 1,
    })
}

/// Estimate Z⁻/Z by sector occupation.
pub fn run_extended_ensemble(config: &McConfig) -> Result<McEstimate> {
    config.validate()?;
    let mut estimates = Vec::with_capacity(config.chains as usize);
    for c in 0..config.chains {
        estimates.push(run_single_chain(
            config,
            config.seed.wrapping_add(c as u64),
        )?);
    }
    if estimates.len() == 1 {
        return Ok(estimates.pop().unwrap());
    }
    // inverse-variance combination across chains
    let mut wsum = 0.0;
    let mut mean = 0.0;
    for e in &estimates {
        let w = 1.0 / (e.std_err * e.std_err);
        wsum += w;
        mean += w * e.ratio;
    }
    mean /= wsum;
    Ok(McEstimate {
        ratio: mean,
        std_err: (1.0 / wsum).sqrt(),
        spin_acceptance: estimates.iter().map(|e| e.spin_acceptance).sum::<f64>()
            / estimates.len() as f64,
        sector_acceptance: estimates.iter().map(|e| e.sector_acceptance).sum::<f64>()
            / estimates.len() as f64,
        tau: estimates.iter().map(|e| e.tau).sum::<f64>() / estimates.len() as f64,
        chains: config.chains,
    })
}

/// ⟨σ_{(0,0)} σ_{(n,0)}⟩ sampled in the untwisted sector only.
pub fn mc_correlator(config: &McConfig, separations: &[u32]) -> Result<Vec<McCorrelator>> {
    config.validate()?;
    for &n in separations {
        if n >= config.lattice.l1 {
            return Err(Error::InvalidSpec(format!(
                "separation {n} not below L1 = {}",
                config.lattice.l1
            )));
        }
    }
    let mut chain = Chain::new(&config.lattice, config.seed);
    for _ in 0..config.thermalization {
        chain.sweep();
    }
    let origin = config.lattice.site_index(0, 0);
    let mut series: Vec<Vec<f64>> =
        vec![Vec::with_capacity(config.sweeps as usize); separations.len()];
    for _ in 0..config.sweeps {
        chain.sweep();
        for (slot, &n) in series.iter_mut().zip(separations) {
            let other = config.lattice.site_index(n, 0);
            slot.push((chain.spins[origin] * chain.spins[other]) as f64);
        }
    }
    Ok(series
        .iter()
        .zip(separations)
        .map(|(s, &n)| {
            let (mean, err, _) = blocking_error(s);
            McCorrelator {
                n,
                value: mean,
                std_err: err,
            }
        })
        .collect())
}

/// Detailed-balance audit on a tiny lattice: the empirical stationary
/// distribution over all (configuration, sector) states is compared to
/// the exact Boltzmann weights, each within `sigmas` blocking errors.
pub struct BalanceAudit {
    pub states: usize,
    pub worst_pull: f64,
    pub passed: bool,
}

pub fn detailed_balance_audit(
    lattice: &SpinLattice<f64>,
    sweeps: u64,
    seed: u64,
    sigmas: f64,
) -> Result<BalanceAudit> {
    let n = lattice.sites();
    if n > 8 {
        return Err(Error::SizeCap {
            what: "audit sites",
            requested: n,
            cap: 8,
        });
    }
    let nstates = (1usize << n) * 2;
    // exact weights
    let mut weights = vec![0.0f64; nstates];
    for state in 0..nstates {
        let cfg = state >> 1;
        let sector = state & 1 == 1;
        let mut e = 0.0;
        for (idx, b) in lattice.bonds.iter().enumerate() {
            let k = if sector && lattice.twist_mask[idx] {
                -b.coupling
            } else {
                b.coupling
            };
            let si = if (cfg >> b.i) & 1 == 1 { 1.0 } else { -1.0 };
            let sj = if (cfg >> b.j) & 1 == 1 { 1.0 } else { -1.0 };
            e += k * si * sj;
        }
        weights[state] = e.exp();
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);

    let mut chain = Chain::new(lattice, seed);
    let mut counts = vec![0u64; nstates];
    let mut history: Vec<u16> = Vec::with_capacity(sweeps as usize);
    for _ in 0..sweeps {
        chain.step(1);
        let mut cfg = 0usize;
        for (i, &s) in chain.spins.iter().enumerate() {
            if s == 1 {
                cfg |= 1 << i;
            }
        }
        let state = (cfg << 1) | chain.sector as usize;
        counts[state] += 1;
        history.push(state as u16);
    }

    // per-state indicator blocking errors
    let mut worst = 0.0f64;
    for state in 0..nstates {
        let series: Vec<f64> = history
            .iter()
            .map(|&s| if s as usize == state { 1.0 } else { 0.0 })
            .collect();
        let (mean, err, _) = blocking_error(&series);
        let pull = (mean - weights[state]).abs() / err;
        worst = worst.max(pull);
    }
    Ok(BalanceAudit {
        states: nstates,
        worst_pull: worst,
        passed: worst <= sigmas,
    })
}
