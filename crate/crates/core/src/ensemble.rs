//! Monte Carlo averages of the trajectory energy transfer over epochs drawn
//! uniformly across one cycle, for one microstate or a random set.
//!
//! Work is split into fixed partitions (one microstate, at most
//! [`PARTITION_SIZE`] samples). Partition `p` draws from a ChaCha8 stream
//! with stream id `p`, and partition results are merged in partition order,
//! so a report depends only on its inputs and never on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kinematics::TrajectoryClock;
use crate::model::{ImpulseSpec, Microstate, WellModel};
use crate::perturbation::{
    copenhagen_e1, trajectory_e1_with_clock, MatrixElementVariant, TransferCase,
};

pub const PARTITION_SIZE: u64 = 1 << 16;

/// Stream used for drawing a random microstate set, kept apart from the
/// per-partition epoch streams.
const MICROSTATE_STREAM: u64 = u64::MAX;

/// Attempts before [`sample_trajectory_microstate`] gives up.
const MAX_REJECTIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerParams {
    pub a_min: f64,
    pub a_max: f64,
    pub rho: f64,
}

impl Default for SamplerParams {
    fn default() -> Self {
        Self {
            a_min: 0.2,
            a_max: 5.0,
            rho: 0.95,
        }
    }
}

impl SamplerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a_min > 0.0 && self.a_min.is_finite()) {
            return Err(Error::validation("a_min", "must be > 0"));
        }
        if !(self.a_max >= self.a_min && self.a_max.is_finite()) {
            return Err(Error::validation("a_max", "must be finite and >= a_min"));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::validation("rho", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Draws `b = 1`, `a` log-uniform on `[a_min, a_max]` and `c` uniform on
/// `(-2ρ√(ab), 2ρ√(ab))`.
pub fn sample_microstate<R: Rng + ?Sized>(rng: &mut R, params: &SamplerParams) -> Result<Microstate> {
    params.validate()?;
    let (lo, hi) = (params.a_min.ln(), params.a_max.ln());
    let a = (lo + rng.random::<f64>() * (hi - lo)).exp();
    let c = (2.0 * rng.random::<f64>() - 1.0) * 2.0 * params.rho * a.sqrt();
    Microstate::new(a, 1.0, c)
}

/// As [`sample_microstate`], redrawing until the trajectory is monotone
/// on each sheet (see [`crate::kinematics::monotonicity_margin`]).
pub fn sample_trajectory_microstate<R: Rng + ?Sized>(
    rng: &mut R,
    params: &SamplerParams,
) -> Result<Microstate> {
    for _ in 0..MAX_REJECTIONS {
        let ms = sample_microstate(rng, params)?;
        if crate::kinematics::monotonicity_margin(&ms) > 0.0 {
            return Ok(ms);
        }
    }
    Err(Error::degenerate(
        "microstate sampler",
        format!("no monotone microstate in {MAX_REJECTIONS} draws with {params:?}"),
    ))
}

/// Draws `count` trajectory microstates from `seed`.
pub fn random_microstate_set(seed: u64, count: usize, params: &SamplerParams) -> Result<Vec<Microstate>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(MICROSTATE_STREAM);
    (0..count)
        .map(|_| sample_trajectory_microstate(&mut rng, params))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum MicrostateSource {
    Fixed(Microstate),
    RandomSet {
        seed: u64,
        count: usize,
        sampler: SamplerParams,
    },
    List(Vec<Microstate>),
}

impl MicrostateSource {
    pub fn resolve(&self) -> Result<Vec<Microstate>> {
        match self {
            MicrostateSource::Fixed(ms) => Ok(vec![*ms]),
            MicrostateSource::RandomSet {
                seed,
                count,
                sampler,
            } => {
                if *count == 0 {
                    return Err(Error::validation("count", "random set needs at least one microstate"));
                }
                random_microstate_set(*seed, *count, sampler)
            }
            MicrostateSource::List(list) => {
                if list.is_empty() {
                    return Err(Error::validation("microstates", "list is empty"));
                }
                Ok(list.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TauDistribution {
    /// Epoch uniform over `[0, t_period)` of each microstate.
    #[default]
    UniformOverCycle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorPolicy {
    #[default]
    Abort,
    /// Record the failing sample and leave it out of every statistic.
    Skip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    /// Total number of samples, split evenly across microstates.
    pub n_samples: u64,
    pub tau_distribution: TauDistribution,
    pub microstate_source: MicrostateSource,
    pub rng_seed: u64,
    pub impulse: ImpulseSpec,
    pub error_policy: ErrorPolicy,
    pub keep_samples: bool,
}

impl EnsembleSpec {
    pub fn new(n_samples: u64, microstate_source: MicrostateSource, rng_seed: u64, impulse: ImpulseSpec) -> Self {
        Self {
            n_samples,
            tau_distribution: TauDistribution::UniformOverCycle,
            microstate_source,
            rng_seed,
            impulse,
            error_policy: ErrorPolicy::Abort,
            keep_samples: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRecord {
    pub index: u64,
    pub microstate_index: usize,
    pub tau0: f64,
    pub e1: f64,
    pub case: TransferCase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedSample {
    pub index: u64,
    pub error: Error,
}

/// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64 / n as f64);
        self.n = n;
    }

    /// Sample standard deviation (`n - 1` denominator); 0 below two samples.
    pub fn stdev(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).sqrt()
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.stdev() / (self.n as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MicrostateSummary {
    pub microstate: Microstate,
    pub moments: Moments,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleReport {
    pub n: u64,
    pub mean_e1: f64,
    pub stderr_e1: f64,
    /// Counts indexed by [`TransferCase::index`].
    pub case_histogram: [u64; 5],
    /// Moments of `E₁` within each case.
    pub case_moments: [Moments; 5],
    pub per_microstate: Vec<MicrostateSummary>,
    pub copenhagen_e1_original: f64,
    pub copenhagen_e1_errata: f64,
    pub skipped: Vec<SkippedSample>,
    pub samples: Option<Vec<SampleRecord>>,
}

impl EnsembleReport {
    pub fn case_count(&self, case: TransferCase) -> u64 {
        self.case_histogram[case.index()]
    }

    pub fn case_mean(&self, case: TransferCase) -> f64 {
        self.case_moments[case.index()].mean
    }
}

#[derive(Debug, Clone, Copy)]
struct Partition {
    id: u64,
    microstate_index: usize,
    first_index: u64,
    len: u64,
}

#[derive(Default)]
struct PartitionResult {
    moments: Moments,
    case_moments: [Moments; 5],
    skipped: Vec<SkippedSample>,
    samples: Vec<SampleRecord>,
}

fn partitions(counts: &[u64]) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut first_index = 0;
    for (microstate_index, &count) in counts.iter().enumerate() {
        let mut start = 0;
        while start < count {
            let len = PARTITION_SIZE.min(count - start);
            out.push(Partition {
                id: out.len() as u64,
                microstate_index,
                first_index: first_index + start,
                len,
            });
            start += len;
        }
        first_index += count;
    }
    out
}

fn run_partition(
    part: &Partition,
    clock: &TrajectoryClock,
    spec: &EnsembleSpec,
) -> Result<PartitionResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    rng.set_stream(part.id);
    let period = clock.period();
    let gamma = spec.impulse.gamma();
    let mut out = PartitionResult::default();
    for j in 0..part.len {
        let index = part.first_index + j;
        let tau0 = match spec.tau_distribution {
            TauDistribution::UniformOverCycle => rng.random::<f64>() * period,
        };
        // The clock is anchored at 0, so shift the impulse instead.
        let shifted = spec.impulse.with_gamma(gamma - tau0);
        match trajectory_e1_with_clock(clock, &shifted) {
            Ok(r) => {
                out.moments.push(r.e1);
                out.case_moments[r.case.index()].push(r.e1);
                if spec.keep_samples {
                    out.samples.push(SampleRecord {
                        index,
                        microstate_index: part.microstate_index,
                        tau0,
                        e1: r.e1,
                        case: r.case,
                    });
                }
            }
            Err(e) => match spec.error_policy {
                ErrorPolicy::Abort => {
                    return Err(Error::Sample {
                        index,
                        source: Box::new(e),
                    })
                }
                ErrorPolicy::Skip => {
                    log::debug!("skipping sample {index}: {e}");
                    out.skipped.push(SkippedSample { index, error: e });
                }
            },
        }
    }
    Ok(out)
}

/// Runs the ensemble on the current rayon pool.
pub fn run_ensemble(spec: &EnsembleSpec, well: &WellModel) -> Result<EnsembleReport> {
    if spec.n_samples == 0 {
        return Err(Error::validation("n_samples", "must be >= 1"));
    }
    let microstates = spec.microstate_source.resolve()?;
    let clocks = microstates
        .iter()
        .map(|ms| TrajectoryClock::new(*well, *ms, 0.0))
        .collect::<Result<Vec<_>>>()?;
    let m = microstates.len() as u64;
    let counts: Vec<u64> = (0..m)
        .map(|i| spec.n_samples / m + u64::from(i < spec.n_samples % m))
        .collect();
    let parts = partitions(&counts);
    log::info!(
        "ensemble: {} samples over {} microstates in {} partitions",
        spec.n_samples,
        m,
        parts.len()
    );
    let results: Vec<Result<PartitionResult>> = parts
        .par_iter()
        .map(|p| run_partition(p, &clocks[p.microstate_index], spec))
        .collect();

    let mut total = Moments::default();
    let mut case_moments = [Moments::default(); 5];
    let mut per_microstate: Vec<MicrostateSummary> = microstates
        .iter()
        .map(|ms| MicrostateSummary {
            microstate: *ms,
            moments: Moments::default(),
        })
        .collect();
    let mut skipped = Vec::new();
    let mut samples = spec.keep_samples.then(Vec::new);
    for (part, result) in parts.iter().zip(results) {
        let r = result?;
        total.merge(&r.moments);
        per_microstate[part.microstate_index].moments.merge(&r.moments);
        for (acc, cm) in case_moments.iter_mut().zip(&r.case_moments) {
            acc.merge(cm);
        }
        skipped.extend(r.skipped);
        if let Some(s) = samples.as_mut() {
            s.extend(r.samples);
        }
    }
    if !skipped.is_empty() {
        log::warn!("{} samples skipped", skipped.len());
    }
    let case_histogram = case_moments.map(|c| c.n);
    Ok(EnsembleReport {
        n: total.n,
        mean_e1: total.mean,
        stderr_e1: total.stderr(),
        case_histogram,
        case_moments,
        per_microstate,
        copenhagen_e1_original: copenhagen_e1(well, &spec.impulse, MatrixElementVariant::Original).e1,
        copenhagen_e1_errata: copenhagen_e1(well, &spec.impulse, MatrixElementVariant::Errata).e1,
        skipped,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn impulse(eps: f64) -> ImpulseSpec {
        ImpulseSpec::new(1.0, eps, 0.0, 1.0, &WellModel::natural()).unwrap()
    }

    #[test]
    fn sampler_draws_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let params = SamplerParams::default();
        for _ in 0..100_000 {
            let ms = sample_microstate(&mut rng, &params).unwrap();
            assert!(ms.discriminant() > 0.0);
            assert!((0.2..=5.0).contains(&ms.a()));
            assert_eq!(ms.b(), 1.0);
        }
    }

    #[test]
    fn sampler_is_repeatable() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..10)
                .map(|_| sample_microstate(&mut rng, &SamplerParams::default()).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        assert_ne!(draw(7), draw(8));
    }

    #[test]
    fn degenerate_sampler() {
        let params = SamplerParams {
            a_min: 1.0,
            a_max: 1.0,
            rho: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let ms = sample_microstate(&mut rng, &params).unwrap();
            assert_eq!((ms.a(), ms.b(), ms.c().abs()), (1.0, 1.0, 0.0));
        }
    }

    #[test]
    fn bad_sampler_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in [
            SamplerParams { a_min: 0.0, ..Default::default() },
            SamplerParams { a_max: 0.1, ..Default::default() },
            SamplerParams { rho: 1.0, ..Default::default() },
        ] {
            assert!(sample_microstate(&mut rng, &p).unwrap_err().is_validation());
        }
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1 - 3.0).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut merged = Moments::default();
        for chunk in xs.chunks(77) {
            let mut m = Moments::default();
            chunk.iter().for_each(|&x| m.push(x));
            merged.merge(&m);
        }
        assert_eq!(merged.n, all.n);
        assert!((merged.mean - all.mean).abs() < 1e-13);
        assert!((merged.stdev() - all.stdev()).abs() < 1e-12);
    }

    #[test]
    fn partition_layout() {
        let parts = partitions(&[PARTITION_SIZE + 5, 3]);
        assert_eq!(parts.len(), 3);
        assert_eq!(parts[1].first_index, PARTITION_SIZE);
        assert_eq!(parts[1].len, 5);
        assert_eq!(parts[2].first_index, PARTITION_SIZE + 5);
        assert_eq!(parts[2].microstate_index, 1);
    }

    #[test]
    fn classical_ensemble_signs() {
        let spec = EnsembleSpec::new(
            20_000,
            MicrostateSource::Fixed(Microstate::classical()),
            42,
            impulse(0.1),
        );
        let r = run_ensemble(&spec, &WellModel::natural()).unwrap();
        assert_eq!(r.case_histogram.iter().sum::<u64>(), r.n);
        let v = std::f64::consts::FRAC_PI_2;
        assert!((r.case_mean(TransferCase::LeftWallPlus) - v).abs() < 1e-14);
        assert!((r.case_mean(TransferCase::RightWallMinus) - v).abs() < 1e-14);
        assert!((r.case_mean(TransferCase::RightWallPlus) + v).abs() < 1e-14);
        assert!((r.case_mean(TransferCase::LeftWallMinus) + v).abs() < 1e-14);
        assert!(r.mean_e1.abs() <= 3.0 * r.stderr_e1);
    }

    #[test]
    fn report_is_bit_identical_across_pools() {
        let mut spec = EnsembleSpec::new(
            150_000,
            MicrostateSource::RandomSet {
                seed: 5,
                count: 3,
                sampler: SamplerParams::default(),
            },
            9,
            impulse(0.2),
        );
        spec.keep_samples = true;
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_ensemble(&spec, &WellModel::natural()).unwrap())
        };
        let one = run(1);
        let four = run(4);
        assert_eq!(one, four);
        assert_eq!(one.mean_e1.to_bits(), four.mean_e1.to_bits());
        assert_eq!(one.samples.as_ref().unwrap().len(), 150_000);
    }

    #[test]
    fn zero_samples_is_rejected() {
        let spec = EnsembleSpec::new(0, MicrostateSource::Fixed(Microstate::classical()), 1, impulse(0.1));
        assert!(run_ensemble(&spec, &WellModel::natural()).unwrap_err().is_validation());
    }

    #[test]
    fn random_set_is_monotone() {
        let set = random_microstate_set(1, 50, &SamplerParams::default()).unwrap();
        assert_eq!(set.len(), 50);
        assert!(set.iter().all(|ms| crate::kinematics::monotonicity_margin(ms) > 0.0));
    }
}
