use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::expi_symmetric;
use crate::error::{param, Error, Result};
use crate::floquet::{Boundary, LatticeSpec};
use crate::rng;

/// Eigenvalues `+-1` of the conserved charges, one per charge-carrying site
/// (bulk sites for open chains, all sites for periodic ones).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChargeConfig {
    q: Vec<i8>,
}

impl ChargeConfig {
    pub fn new(q: Vec<i8>) -> Result<Self> {
        if let Some(x) = q.iter().find(|&&x| x != 1 && x != -1) {
            return param(format!("charges must be +1 or -1, got {x}"));
        }
        Ok(ChargeConfig { q })
    }

    pub fn uniform(len: usize, charge: i8) -> Result<Self> {
        Self::new(vec![charge; len])
    }

    /// Bit `i` of `bits` set means charge `-1` on the `i`-th charge site.
    pub fn from_bits(len: usize, bits: u64) -> Self {
        ChargeConfig {
            q: (0..len).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect(),
        }
    }

    pub fn charges(&self) -> &[i8] {
        &self.q
    }

    pub fn product(&self) -> i8 {
        self.q.iter().product()
    }
}

/// Single-particle Hamiltonian of one charge sector.
///
/// Hopping `-J` between neighbours and on-site potential `-2h q_j`, where
/// `q_j` is the measured charge. The constant `h sum_j q_j` is dropped, so
/// only quantities diagonal in the sector are meaningful. On a ring the
/// closing hop carries the fermion-parity sign `(-1)^(N-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorHamiltonian {
    matrix: DMatrix<f64>,
}

impl SectorHamiltonian {
    pub fn new(spec: &LatticeSpec, q: &ChargeConfig, fermions: usize) -> Result<Self> {
        spec.validate()?;
        let charge_sites = spec.charge_sites();
        if q.charges().len() != charge_sites.len() {
            return param(format!(
                "{} charges for {} charge sites",
                q.charges().len(),
                charge_sites.len()
            ));
        }
        let l = spec.sites;
        let mut m = DMatrix::zeros(l, l);
        for (&site, &qj) in charge_sites.iter().zip(q.charges()) {
            m[(site - 1, site - 1)] = -2.0 * spec.h * qj as f64;
        }
        for j in 1..l {
            m[(j - 1, j)] = -spec.j;
            m[(j, j - 1)] = -spec.j;
        }
        if spec.boundary == Boundary::Periodic {
            let sign = if fermions % 2 == 1 { 1.0 } else { -1.0 };
            m[(0, l - 1)] += -spec.j * sign;
            m[(l - 1, 0)] += -spec.j * sign;
        }
        Ok(SectorHamiltonian { matrix: m })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn propagator(&self, t: f64) -> DMatrix<C64> {
        expi_symmetric(&self.matrix, -t)
    }
}

/// `C_jk = <c+_j c_k>`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    c: DMatrix<C64>,
}

impl CorrelationMatrix {
    pub fn from_occupation(occupation: &[bool]) -> Self {
        let d = DVector::from_iterator(
            occupation.len(),
            occupation.iter().map(|&b| C64::new(if b { 1.0 } else { 0.0 }, 0.0)),
        );
        CorrelationMatrix {
            c: DMatrix::from_diagonal(&d),
        }
    }

    pub fn from_matrix(c: DMatrix<C64>) -> Result<Self> {
        if !c.is_square() {
            return param("correlation matrix must be square");
        }
        if (&c - c.adjoint()).norm() > 1e-10 {
            return param("correlation matrix must be Hermitian");
        }
        Ok(CorrelationMatrix { c })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.c
    }

    pub fn densities(&self) -> Vec<f64> {
        self.c.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn particle_number(&self) -> f64 {
        self.c.trace().re
    }
}

/// `C(t) = e^{iHt} C0 e^{-iHt}` in sector `q`.
pub fn sector_evolve(
    spec: &LatticeSpec,
    q: &ChargeConfig,
    c0: &CorrelationMatrix,
    t: f64,
) -> Result<CorrelationMatrix> {
    if c0.matrix().nrows() != spec.sites {
        return param("correlation matrix size does not match the chain");
    }
    let fermions = c0.particle_number().round() as usize;
    let h = SectorHamiltonian::new(spec, q, fermions)?;
    let u = h.propagator(t);
    Ok(CorrelationMatrix {
        c: u.adjoint() * c0.matrix() * u,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SectorStrategy {
    /// Every charge configuration with equal weight.
    Enumerate,
    /// `count` configurations drawn uniformly.
    Sample { count: usize, seed: u64 },
}

/// Largest number of free charges `Enumerate` will visit.
const MAX_ENUMERATED_CHARGES: usize = 24;

/// Sector-averaged densities and imbalance over a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorAverage {
    pub times: Vec<f64>,
    /// `densities[t][j]`, site `j + 1`.
    pub densities: Vec<Vec<f64>>,
    pub imbalance: Vec<f64>,
    /// Standard error of the imbalance mean; zero for `Enumerate`.
    pub imbalance_stderr: Vec<f64>,
    pub sectors: usize,
}

/// Running mean and variance.
#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

/// Densities at each time for one sector, starting from a Fock state.
fn sector_densities(
    spec: &LatticeSpec,
    q: &ChargeConfig,
    occupation: &[bool],
    times: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let fermions = occupation.iter().filter(|&&b| b).count();
    let h = SectorHamiltonian::new(spec, q, fermions)?;
    let eig = h.matrix().clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let l = spec.sites;
    let occupied: Vec<usize> = (0..l).filter(|&i| occupation[i]).collect();
    Ok(times
        .iter()
        .map(|&t| {
            let phases: Vec<C64> = eig.eigenvalues.iter().map(|&e| C64::from_polar(1.0, -e * t)).collect();
            // n_j(t) = sum_{m occupied} |U_jm(t)|^2
            (0..l)
                .map(|j| {
                    occupied
                        .iter()
                        .map(|&m| {
                            (0..l)
                                .map(|k| phases[k] * (v[(j, k)] * v[(m, k)]))
                                .sum::<C64>()
                                .norm_sqr()
                        })
                        .sum()
                })
                .collect()
        })
        .collect())
}

fn imbalance_of(occupation: &[bool], n: &[f64]) -> f64 {
    occupation
        .iter()
        .zip(n)
        .map(|(&b, &x)| if b { x } else { -x })
        .sum()
}

/// Calls `visit` on every charge configuration selected by `strategy` and
/// returns the number of sectors and whether the average is exact.
fn for_each_sector(
    spec: &LatticeSpec,
    occupation: &[bool],
    strategy: SectorStrategy,
    mut visit: impl FnMut(ChargeConfig) -> Result<()>,
) -> Result<(usize, bool)> {
    spec.validate()?;
    if occupation.len() != spec.sites {
        return param(format!(
            "occupation has {} sites, chain has {}",
            occupation.len(),
            spec.sites
        ));
    }
    let n_charges = spec.charge_sites().len();
    let fermions = occupation.iter().filter(|&&b| b).count();
    // on a ring the charges multiply to the fermion parity
    let (free, parity) = match spec.boundary {
        Boundary::Open => (n_charges, None),
        Boundary::Periodic => (n_charges - 1, Some(if fermions % 2 == 0 { 1i8 } else { -1 })),
    };
    let config = |bits: u64| -> ChargeConfig {
        let mut c = ChargeConfig::from_bits(free, bits);
        if let Some(p) = parity {
            let last = p * c.product();
            c.q.push(last);
        }
        c
    };
    match strategy {
        SectorStrategy::Enumerate => {
            if free > MAX_ENUMERATED_CHARGES {
                return Err(Error::Capacity {
                    what: "enumerated charge sectors (log2)",
                    requested: free,
                    limit: MAX_ENUMERATED_CHARGES,
                });
            }
            for bits in 0..1u64 << free {
                visit(config(bits))?;
            }
            Ok((1usize << free, true))
        }
        SectorStrategy::Sample { count, seed } => {
            if count == 0 {
                return Err(Error::Statistics("no sectors sampled".into()));
            }
            let mut r = rng::stream(seed, rng::label("sector-sample"), 0);
            for _ in 0..count {
                let bits = if free == 0 {
                    0
                } else {
                    r.random::<u64>() & (u64::MAX >> (64 - free.min(64)))
                };
                visit(config(bits))?;
            }
            Ok((count, false))
        }
    }
}

/// Densities averaged with equal weight over charge sectors, which is the
/// density dynamics of a Fock state with all bonds polarized along z.
pub fn sector_averaged_densities(
    spec: &LatticeSpec,
    occupation: &[bool],
    times: &[f64],
    strategy: SectorStrategy,
) -> Result<SectorAverage> {
    let mut sums = vec![vec![0.0; spec.sites]; times.len()];
    let mut stats = vec![Welford::default(); times.len()];
    let (sectors, exact) = for_each_sector(spec, occupation, strategy, |q| {
        let dens = sector_densities(spec, &q, occupation, times)?;
        for (t, n) in dens.iter().enumerate() {
            for (s, x) in sums[t].iter_mut().zip(n) {
                *s += x;
            }
            stats[t].push(imbalance_of(occupation, n));
        }
        Ok(())
    })?;

    let densities: Vec<Vec<f64>> = sums
        .into_iter()
        .map(|row| row.into_iter().map(|s| s / sectors as f64).collect())
        .collect();
    let imbalance = densities.iter().map(|n| imbalance_of(occupation, n)).collect();
    let imbalance_stderr = stats
        .iter()
        .map(|w| if exact { 0.0 } else { w.stderr() })
        .collect();
    Ok(SectorAverage {
        times: times.to_vec(),
        densities,
        imbalance,
        imbalance_stderr,
        sectors,
    })
}

/// Normalized imbalance `I / I(0)` averaged over `times` and over sectors,
/// with the standard error across sectors of the per-sector time average.
pub fn sector_imbalance_plateau(
    spec: &LatticeSpec,
    occupation: &[bool],
    times: &[f64],
    strategy: SectorStrategy,
) -> Result<(f64, f64)> {
    if times.is_empty() {
        return param("empty time window");
    }
    let i0 = occupation.iter().filter(|&&b| b).count() as f64;
    if i0 == 0.0 {
        return param("initial state has no fermions");
    }
    let mut stats = Welford::default();
    let (_, exact) = for_each_sector(spec, occupation, strategy, |q| {
        let dens = sector_densities(spec, &q, occupation, times)?;
        let avg = dens.iter().map(|n| imbalance_of(occupation, n)).sum::<f64>() / (times.len() as f64 * i0);
        stats.push(avg);
        Ok(())
    })?;
    Ok((stats.mean, if exact { 0.0 } else { stats.stderr() }))
}

/// Sector-averaged imbalance at time `t`, with its standard error.
pub fn sector_averaged_imbalance(
    spec: &LatticeSpec,
    occupation: &[bool],
    t: f64,
    strategy: SectorStrategy,
) -> Result<(f64, f64)> {
    let avg = sector_averaged_densities(spec, occupation, &[t], strategy)?;
    Ok((avg.imbalance[0], avg.imbalance_stderr[0]))
}

/// Densities of a single sector over a time grid.
pub fn single_sector_densities(
    spec: &LatticeSpec,
    q: &ChargeConfig,
    occupation: &[bool],
    times: &[f64],
) -> Result<Vec<Vec<f64>>> {
    sector_densities(spec, q, occupation, times)
}
