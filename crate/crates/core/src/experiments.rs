//! Number statistics, Mandel Q and the three studies: para-Fermi number
//! evolution, para-Bose Mandel Q sweep over the order, and the cutoff table.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{displaced_vacuum_exact, level_populations, ParaSpec};
use crate::compile::{compile_displacement_fixed_depth, gate_counts, Circuit, GateCounts};
use crate::error::{Error, Result};
use crate::factor::{factorize, DEFAULT_TOL};
use crate::sim::{
    apply_circuit, postselect, postselect_marginals, prepare_initial, run_shots, spam_correct, Marginals,
    NoiseModel, SamplingMode, ShotSet,
};

pub const DEFAULT_SHOTS: u64 = 5000;
pub const DEFAULT_RESAMPLES: usize = 500;
pub const DEFAULT_G: f64 = 0.02;
pub const DEFAULT_ALPHA: f64 = 0.3;
/// Extra levels of the large-cutoff reference column.
pub const REFERENCE_MARGIN: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// Exact propagator on the Fock space.
    Exact,
    /// Ideal state vector of the compiled circuit, no sampling.
    Circuit,
    ShotsRaw,
    ShotsSpam,
    ShotsPostselected,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Exact => "exact",
            Source::Circuit => "circuit",
            Source::ShotsRaw => "shots_raw",
            Source::ShotsSpam => "shots_spam",
            Source::ShotsPostselected => "shots_postselected",
        }
    }

    pub fn is_sampled(self) -> bool {
        matches!(self, Source::ShotsRaw | Source::ShotsSpam | Source::ShotsPostselected)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumberStats {
    pub source: Source,
    pub mean_n: f64,
    pub mean_n2: f64,
    pub mandel_q: Option<f64>,
    /// 1σ of `mean_n`.
    pub stderr_mean: f64,
    /// 1σ of `mandel_q`, when defined.
    pub stderr_q: Option<f64>,
    pub retained_fraction: f64,
    /// 0 for non-sampled sources.
    pub shots: u64,
}

impl NumberStats {
    fn from_moments(source: Source, mean_n: f64, mean_n2: f64) -> Self {
        let mut s = Self {
            source,
            mean_n,
            mean_n2,
            mandel_q: None,
            stderr_mean: 0.0,
            stderr_q: None,
            retained_fraction: 1.0,
            shots: 0,
        };
        s.mandel_q = mandel_q(&s).ok();
        if s.mandel_q.is_some() {
            s.stderr_q = Some(0.0);
        }
        s
    }

    pub fn variance(&self) -> f64 {
        self.mean_n2 - self.mean_n * self.mean_n
    }
}

/// `Q = (⟨N²⟩ − ⟨N⟩²)/⟨N⟩ − 1`.
pub fn mandel_q(stats: &NumberStats) -> Result<f64> {
    if stats.mean_n.abs() < 1e-15 {
        return Err(Error::UndefinedMandelQ);
    }
    Ok(stats.variance() / stats.mean_n - 1.0)
}

/// Moments of a level distribution `P(n)`.
pub fn stats_from_populations(source: Source, pops: &[f64]) -> NumberStats {
    let mean: f64 = pops.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    let mean2: f64 = pops.iter().enumerate().map(|(n, p)| (n * n) as f64 * p).sum();
    NumberStats::from_moments(source, mean, mean2)
}

/// Exact statistics of `exp(iα(A + A†))|p;0⟩`.
pub fn exact_stats(spec: &ParaSpec, alpha: f64) -> NumberStats {
    stats_from_populations(Source::Exact, &level_populations(&displaced_vacuum_exact(spec, alpha)))
}

/// `⟨N⟩ = Σ m P(bit m)` and `⟨N²⟩ = Σ m² P(bit m)`. Both are the level
/// moments on one-hot data; off the one-hot subspace they are the same
/// linear functionals applied bitwise. The error is the spread of the
/// per-shot value `Σ m b_m` over the histogram, divided by `√shots`.
pub fn stats_from_marginals(source: Source, m: &Marginals) -> NumberStats {
    let mean: f64 = m.p_one.iter().enumerate().map(|(q, p)| q as f64 * p).sum();
    let mean2: f64 = m.p_one.iter().enumerate().map(|(q, p)| (q * q) as f64 * p).sum();
    let mut s = NumberStats::from_moments(source, mean, mean2);
    if m.shots > 0 {
        let spread: f64 = m
            .histogram
            .iter()
            .map(|(bits, w)| {
                let v: f64 = bits.chars().enumerate().filter(|(_, ch)| *ch == '1').map(|(q, _)| q as f64).sum();
                w * (v - mean).powi(2)
            })
            .sum();
        s.stderr_mean = (spread.max(0.0) / m.shots as f64).sqrt();
        s.stderr_q = None;
    }
    s.retained_fraction = m.retained_fraction;
    s.shots = m.shots;
    s
}

/// Statistics of a raw shot histogram.
pub fn number_stats(s: &ShotSet) -> Result<NumberStats> {
    Ok(stats_from_marginals(Source::ShotsRaw, &Marginals::from_shots(s)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    MeanN,
    MandelQ,
}

fn resample(s: &ShotSet, rng: &mut ChaCha8Rng) -> ShotSet {
    let mut left = s.total();
    let mut mass = 1.0;
    let total = left as f64;
    let mut counts = std::collections::BTreeMap::new();
    for (bits, &n) in &s.counts {
        if left == 0 {
            break;
        }
        let p = n as f64 / total;
        let k = if p >= mass {
            left
        } else {
            Binomial::new(left, (p / mass).clamp(0.0, 1.0)).expect("valid binomial").sample(rng)
        };
        mass -= p;
        left -= k;
        if k > 0 {
            counts.insert(bits.clone(), k);
        }
    }
    let mut out = ShotSet::new(s.num_qubits, counts, s.seed);
    out.shots = s.shots;
    out.retained_fraction = s.retained_fraction;
    out
}

/// Bootstrap standard deviation of `f` over multinomial resamples of the
/// histogram. Resamples on which `f` fails are skipped.
pub fn bootstrap<F>(s: &ShotSet, resamples: usize, seed: u64, f: F) -> Result<f64>
where
    F: Fn(&ShotSet) -> Result<f64>,
{
    if resamples < 2 {
        return Err(Error::Insufficient {
            what: "bootstrap resamples",
            needed: 2,
            got: resamples,
        });
    }
    let total = s.total() as usize;
    if total < 2 {
        return Err(Error::Insufficient {
            what: "shots",
            needed: 2,
            got: total,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..resamples)
        .filter_map(|_| f(&resample(s, &mut rng)).ok())
        .filter(|v| v.is_finite())
        .collect();
    if values.len() < 2 {
        return Err(Error::Insufficient {
            what: "successful resamples",
            needed: 2,
            got: values.len(),
        });
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Ok((values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

/// Bootstrap 1σ of a raw-histogram statistic.
pub fn uncertainty(s: &ShotSet, statistic: Statistic, resamples: usize, seed: u64) -> Result<f64> {
    bootstrap(s, resamples, seed, |r| {
        let st = number_stats(r)?;
        match statistic {
            Statistic::MeanN => Ok(st.mean_n),
            Statistic::MandelQ => mandel_q(&st),
        }
    })
}

/// Which mitigation runs first when both are requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MitigationOrder {
    #[default]
    SpamFirst,
    PostselectFirst,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// 0 skips the sampled sources.
    pub shots: u64,
    pub noise: Option<NoiseModel>,
    pub spam_correct: bool,
    pub postselect: bool,
    pub order: MitigationOrder,
    pub sampling: SamplingMode,
    pub resamples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            shots: DEFAULT_SHOTS,
            noise: None,
            spam_correct: false,
            postselect: false,
            order: MitigationOrder::default(),
            sampling: SamplingMode::default(),
            resamples: DEFAULT_RESAMPLES,
            seed: 0,
            tol: DEFAULT_TOL,
        }
    }
}

impl RunOptions {
    pub fn exact_only() -> Self {
        Self {
            shots: 0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(n) = &self.noise {
            n.validate()?;
            if self.spam_correct {
                n.inverse_confusion()?;
            }
        }
        if self.shots > 0 && self.resamples < 2 {
            return Err(Error::Insufficient {
                what: "bootstrap resamples",
                needed: 2,
                got: self.resamples,
            });
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidSpec(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    /// Sampled sources this configuration produces.
    pub fn sampled_sources(&self) -> Vec<Source> {
        if self.shots == 0 {
            return Vec::new();
        }
        let mut out = vec![Source::ShotsRaw];
        if self.spam_correct {
            out.push(Source::ShotsSpam);
        }
        if self.postselect {
            out.push(Source::ShotsPostselected);
        }
        out
    }

    fn readout(&self) -> NoiseModel {
        self.noise.unwrap_or_default()
    }

    /// Mitigated distribution of one source.
    fn mitigate(&self, source: Source, s: &ShotSet) -> Result<Marginals> {
        let noise = self.readout();
        match source {
            Source::ShotsRaw => Marginals::from_shots(s),
            Source::ShotsSpam => spam_correct(s, &noise),
            Source::ShotsPostselected => match (self.spam_correct, self.order) {
                (true, MitigationOrder::SpamFirst) => postselect_marginals(&spam_correct(s, &noise)?),
                (true, MitigationOrder::PostselectFirst) => spam_correct(&postselect(s), &noise),
                (false, _) => Marginals::from_shots(&postselect(s)),
            },
            Source::Exact | Source::Circuit => unreachable!("not a sampled source"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    PfEvolution,
    PbMandel,
    Cutoff,
}

impl Study {
    pub fn as_str(self) -> &'static str {
        match self {
            Study::PfEvolution => "pf-evolution",
            Study::PbMandel => "pb-mandel",
            Study::Cutoff => "cutoff",
        }
    }

    /// The statistic whose error bar goes in the `stderr` column.
    pub fn primary(self) -> Statistic {
        match self {
            Study::PfEvolution => Statistic::MeanN,
            Study::PbMandel | Study::Cutoff => Statistic::MandelQ,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub study: Study,
    /// Row group written in the CSV `study` column.
    pub label: String,
    pub x: f64,
    pub seed: u64,
    pub stats: Vec<NumberStats>,
    pub gate_counts: Option<GateCounts>,
}

impl SeriesPoint {
    pub fn get(&self, source: Source) -> Option<&NumberStats> {
        self.stats.iter().find(|s| s.source == source)
    }
}

/// Shot `i` of a point draws from `sampler + i`, so neighbouring point seeds
/// must not feed the sampler directly or their streams would overlap.
fn sampler_seed(point_seed: u64) -> u64 {
    let mut z = point_seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Exact, circuit and sampled statistics of one displacement.
fn evaluate_point(spec: &ParaSpec, alpha: f64, opts: &RunOptions, seed: u64) -> Result<(Vec<NumberStats>, GateCounts)> {
    let mut stats = vec![exact_stats(spec, alpha)];
    let (problem, gv, _) = factorize(spec, alpha, opts.tol, seed)?;
    let circuit: Circuit = compile_displacement_fixed_depth(&gv, &problem.basis)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ideal = apply_circuit(prepare_initial(circuit.num_qubits(), None, &mut rng)?, &circuit, None, &mut rng)?;
    stats.push(stats_from_marginals(Source::Circuit, &Marginals::from_state(&ideal)));

    if opts.shots > 0 {
        let shots = run_shots(&circuit, opts.shots, opts.noise.as_ref(), sampler_seed(seed), opts.sampling)?;
        for source in opts.sampled_sources() {
            let Ok(m) = opts.mitigate(source, &shots) else {
                // nothing survived post-selection
                continue;
            };
            let mut st = stats_from_marginals(source, &m);
            st.shots = opts.shots;
            let boot_seed = seed ^ (source as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            st.stderr_mean = bootstrap(&shots, opts.resamples, boot_seed, |r| {
                Ok(stats_from_marginals(source, &opts.mitigate(source, r)?).mean_n)
            })?;
            if st.mandel_q.is_some() {
                st.stderr_q = bootstrap(&shots, opts.resamples, boot_seed, |r| {
                    mandel_q(&stats_from_marginals(source, &opts.mitigate(source, r)?))
                })
                .ok();
            }
            stats.push(st);
        }
    }
    Ok((stats, gate_counts(&circuit)))
}

/// `gt` spread evenly over `[0, π]` in 25 points, returned as times `t`.
pub fn default_times(g: f64) -> Vec<f64> {
    (0..25).map(|k| k as f64 * std::f64::consts::PI / 24.0 / g).collect()
}

/// Para-Fermi number evolution under the XY hopping: displacement
/// parameter `α = g·t` at every time, one point per time, `x = g·t`.
pub fn run_pf_evolution(p: u32, g: f64, times: &[f64], opts: &RunOptions) -> Result<Vec<SeriesPoint>> {
    let spec = ParaSpec::para_fermi(p)?;
    if !g.is_finite() {
        return Err(Error::InvalidSpec(format!("coupling must be finite, got {g}")));
    }
    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::InvalidSpec(format!("times must be finite and non-negative, got {t}")));
    }
    opts.validate()?;
    let points: Result<Vec<SeriesPoint>> = times
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let seed = opts.seed.wrapping_add(i as u64);
            let x = g * t;
            let (stats, counts) = evaluate_point(&spec, x, opts, seed)?;
            Ok(SeriesPoint {
                study: Study::PfEvolution,
                label: format!("{} p={p}", Study::PfEvolution.as_str()),
                x,
                seed,
                stats,
                gate_counts: Some(counts),
            })
        })
        .collect();
    points
}

/// Mandel Q of displaced para-Bose vacua over the order `p`, `x = p`.
/// Empty at `α = 0`, where Q is undefined.
pub fn run_pb_mandel_sweep(alpha: f64, p_values: &[u32], np: u32, opts: &RunOptions) -> Result<Vec<SeriesPoint>> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidSpec(format!("alpha must be finite and non-negative, got {alpha}")));
    }
    let specs: Vec<ParaSpec> = p_values.iter().map(|&p| ParaSpec::para_bose(p, np)).collect::<Result<_>>()?;
    opts.validate()?;
    if alpha == 0.0 {
        return Ok(Vec::new());
    }
    specs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| {
            let seed = opts.seed.wrapping_add(i as u64);
            let (stats, counts) = evaluate_point(spec, alpha, opts, seed)?;
            Ok(SeriesPoint {
                study: Study::PbMandel,
                label: format!("{} np={np}", Study::PbMandel.as_str()),
                x: spec.p() as f64,
                seed,
                stats,
                gate_counts: Some(counts),
            })
        })
        .collect()
}

/// Exact Mandel Q of `exp(iα(A + A†))|p;0⟩` for a para-Bose cutoff.
pub fn exact_mandel_q(alpha: f64, p: u32, np: u32) -> Result<f64> {
    mandel_q(&exact_stats(&ParaSpec::para_bose(p, np)?, alpha))
}

/// Cutoff table: exact Q for every `(p, np)` plus a reference column at
/// `np_ref = max(np) + 6`. Rows are labelled `cutoff np=<k>` and
/// `cutoff np=<ref> ref`, with `x = p`. Empty at `α = 0`.
pub fn cutoff_study(alpha: f64, p_values: &[u32], np_values: &[u32]) -> Result<Vec<SeriesPoint>> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidSpec(format!("alpha must be finite and non-negative, got {alpha}")));
    }
    let np_ref = np_values
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidSpec("no cutoffs given".into()))?
        + REFERENCE_MARGIN;
    let mut columns: Vec<(u32, String)> = np_values
        .iter()
        .map(|&np| (np, format!("{} np={np}", Study::Cutoff.as_str())))
        .collect();
    columns.push((np_ref, format!("{} np={np_ref} ref", Study::Cutoff.as_str())));
    for &(np, _) in &columns {
        for &p in p_values {
            ParaSpec::para_bose(p, np)?;
        }
    }
    if alpha == 0.0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for (np, label) in &columns {
        for &p in p_values {
            let spec = ParaSpec::para_bose(p, *np)?;
            out.push(SeriesPoint {
                study: Study::Cutoff,
                label: label.clone(),
                x: p as f64,
                seed: 0,
                stats: vec![exact_stats(&spec, alpha)],
                gate_counts: None,
            });
        }
    }
    Ok(out)
}

pub const CSV_HEADER: &str = "study,x,source,mean_n,mean_n2,mandel_q,stderr,retained_fraction,shots,seed";

/// One row per point and source, sorted by study label, x, then source.
/// `provenance` lines are written first as `#` comments.
pub fn to_csv(points: &[SeriesPoint], provenance: &[String]) -> String {
    let mut rows: Vec<(&SeriesPoint, &NumberStats)> =
        points.iter().flat_map(|p| p.stats.iter().map(move |s| (p, s))).collect();
    rows.sort_by(|a, b| {
        a.0.label
            .cmp(&b.0.label)
            .then(a.0.x.total_cmp(&b.0.x))
            .then(a.1.source.cmp(&b.1.source))
    });
    let mut out = String::new();
    for line in provenance {
        for l in line.lines() {
            let _ = writeln!(out, "# {l}");
        }
    }
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (p, s) in rows {
        let stderr = match p.study.primary() {
            Statistic::MeanN => Some(s.stderr_mean),
            Statistic::MandelQ => s.stderr_q,
        };
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            p.label,
            p.x,
            s.source.as_str(),
            s.mean_n,
            s.mean_n2,
            opt(s.mandel_q),
            opt(stderr),
            s.retained_fraction,
            s.shots,
            p.seed
        );
    }
    out
}
