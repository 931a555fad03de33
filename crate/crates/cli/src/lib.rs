//! Commands behind the `k3lat` binary. Each command returns its output as
//! text so the binary only decides where to write it.

use std::io::Write;
use std::sync::Arc;

use k3lat::json::{self, CertificateJson, DiscClassJson, JsonError, PlaneJson};
use k3lat::perturb::check_prime;
use k3lat::sampling::{random_plane, DEFAULT_ENTRY_BOUND};
use k3lat::scalar::{format_rational, parse_rational};
use k3lat::{
    make_property_r, solve_residue_lemma, verify_certificate, BigInt, BigRational, BlockKind, Certificate, GramLattice,
    Lattice, LatticePlane, PerturbError, Prime,
};
use log::{debug, info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const PARSE: i32 = 3;
    pub const PRECONDITION: i32 = 4;
    pub const ENGINE: i32 = 5;
    pub const VERIFY: i32 = 6;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot parse input: {0}")]
    Parse(String),
    #[error("{0}")]
    Precondition(String),
    #[error("engine failed: {0}")]
    Engine(String),
    #[error("certificate does not verify: {}", .0.join("; "))]
    Verify(Vec<String>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Parse(_) => exit::PARSE,
            CliError::Precondition(_) => exit::PRECONDITION,
            CliError::Engine(_) => exit::ENGINE,
            CliError::Verify(_) => exit::VERIFY,
            CliError::Io(_) => exit::IO,
        }
    }
}

impl From<JsonError> for CliError {
    fn from(e: JsonError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<PerturbError> for CliError {
    fn from(e: PerturbError) -> Self {
        match e {
            PerturbError::InvalidPrime { .. } | PerturbError::InvalidEpsilon | PerturbError::Precondition(_) => {
                CliError::Precondition(e.to_string())
            }
            _ => CliError::Engine(e.to_string()),
        }
    }
}

pub fn parse_epsilon(s: &str) -> Result<BigRational, CliError> {
    parse_rational(s).ok_or_else(|| CliError::Usage(format!("epsilon {s:?} is not a rational like 1/100")))
}

pub fn lambda(d: i64) -> Result<Arc<Lattice>, CliError> {
    GramLattice::lambda(d)
        .map(Arc::new)
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn prime_for(l: &Lattice, p: u64) -> Result<Prime, CliError> {
    Ok(check_prime(l, p)?)
}

pub fn read_plane(text: &str) -> Result<LatticePlane, CliError> {
    let doc: PlaneJson = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    Ok(doc.to_plane()?)
}

pub fn read_certificate(text: &str) -> Result<Certificate, CliError> {
    let doc: CertificateJson = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    Ok(doc.to_certificate()?)
}

#[derive(Debug, Serialize)]
pub struct LatticeInfo {
    pub label: String,
    pub d: u64,
    pub rank: usize,
    pub det: serde_json::Number,
    pub signature: [usize; 2],
    pub even: bool,
    pub gram: Vec<Vec<serde_json::Number>>,
}

pub fn cmd_lattice_info(d: i64) -> Result<String, CliError> {
    let l = lambda(d)?;
    let (pos, neg) = l.signature();
    let info = LatticeInfo {
        label: l.label().to_string(),
        d: l.degree().expect("Λ_d has a degree"),
        rank: l.rank(),
        det: json::to_number(&l.det()),
        signature: [pos, neg],
        even: l.is_even(),
        gram: l.gram().rows().iter().map(|r| r.iter().map(json::to_number).collect()).collect(),
    };
    Ok(json::to_pretty(&info)?)
}

#[derive(Debug, Serialize)]
pub struct Verdict {
    pub holds: bool,
    #[serde(flatten)]
    pub class: DiscClassJson,
    /// Smaller square root of the residue, when it is a nonzero square.
    pub sqrt: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub d: u64,
    pub p: u64,
    pub property_r: Verdict,
    pub property_r_integral: Verdict,
    pub integral_basis: [Vec<serde_json::Number>; 2],
}

pub fn cmd_check(plane_json: &str, p: u64) -> Result<String, CliError> {
    let h = read_plane(plane_json)?;
    let prime = prime_for(h.lattice(), p)?;
    let rational = h.property_r(prime);
    let integral = h.property_r_integral(prime);
    let verdict = |holds: bool, class: &k3lat::DiscClass<BigInt>| Verdict {
        holds,
        class: DiscClassJson::from_class(class),
        sqrt: class.sqrt().map(|r| r.value()),
    };
    let report = CheckReport {
        d: h.lattice().degree().expect("parsed planes live in Λ_d"),
        p,
        property_r: verdict(rational.holds, &rational.class),
        property_r_integral: verdict(integral.holds, &integral.class),
        integral_basis: integral.basis.map(|v| v.iter().map(json::to_number).collect()),
    };
    Ok(json::to_pretty(&report)?)
}

/// Run the engine on a plane file. Returns the certificate text and whether
/// it verifies; the caller writes the text before reporting failure.
pub fn cmd_perturb(plane_json: &str, p: u64, epsilon: &BigRational) -> Result<(String, Result<(), CliError>), CliError> {
    let h = read_plane(plane_json)?;
    let c = make_property_r(&h, p, epsilon)?;
    info!(
        "certified plane at distance {} with {} steps",
        format_rational(&c.distance),
        c.steps.len()
    );
    let text = json::to_pretty(&CertificateJson::from_certificate(&c)?)?;
    let v = verify_certificate(&c);
    let status = if v.is_valid() { Ok(()) } else { Err(CliError::Verify(v.reasons)) };
    Ok((text, status))
}

pub fn cmd_verify(certificate_json: &str) -> Result<String, CliError> {
    let c = read_certificate(certificate_json)?;
    let v = verify_certificate(&c);
    if v.is_valid() {
        Ok(format!("ok: distance {} <= {}", format_rational(&c.distance), format_rational(&c.epsilon)))
    } else {
        Err(CliError::Verify(v.reasons))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub p: u64,
    pub pairs: u64,
    pub solved: u64,
    /// Largest `y` returned over all pairs.
    pub max_y: u64,
}

pub fn lemma_sweep(p_max: u64) -> Vec<SweepRow> {
    if p_max < 5 {
        warn!("p_max = {p_max}: the sweep starts at p = 5 (p = 3 is excluded)");
    }
    (5..=p_max)
        .filter_map(|q| Prime::new(q).ok())
        .map(|p| {
            let q = p.get();
            let mut row = SweepRow {
                p: q,
                pairs: 0,
                solved: 0,
                max_y: 0,
            };
            for a in 1..q {
                for b in 1..q {
                    row.pairs += 1;
                    if let Ok((y, s)) = solve_residue_lemma(p.elem(a), p.elem(b)) {
                        if s.is_nonzero_square() {
                            row.solved += 1;
                            row.max_y = row.max_y.max(y.value());
                        }
                    }
                }
            }
            debug!("p = {q}: {} of {} pairs solved", row.solved, row.pairs);
            row
        })
        .collect()
}

pub fn cmd_lemma_sweep<W: Write>(p_max: u64, out: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["p", "pairs", "solved", "max_y"])
        .map_err(|e| CliError::Io(e.into()))?;
    for row in lemma_sweep(p_max) {
        w.serialize(row).map_err(|e| CliError::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistanceStats {
    pub min: String,
    pub max: String,
    pub mean: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleReport {
    pub d: u64,
    pub p: u64,
    pub trials: usize,
    pub successes: usize,
    pub epsilon: String,
    /// Over successful runs only; absent when there were none.
    pub distance_stats: Option<DistanceStats>,
    /// Sampled planes whose restricted form is positive definite.
    pub posdef_count: usize,
    /// Certified output planes whose restricted form is positive definite.
    pub posdef_output_count: usize,
    pub require_posdef: bool,
    /// Planes drawn, including those rejected by `require_posdef`.
    pub draws: u64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SampleOptions {
    pub d: i64,
    pub p: u64,
    pub trials: usize,
    pub epsilon: BigRational,
    pub seed: u64,
    pub require_posdef: bool,
    /// Cap on planes drawn when rejecting non-positive-definite ones.
    pub max_draws: u64,
}

/// Entry bound off the hyperbolic blocks for `require_posdef` sampling.
pub const POSDEF_OFF_BLOCK_BOUND: i64 = 1;

/// Uniform entries in `[-10,10]` on the `U` blocks and in `[-1,1]` elsewhere.
/// Uniform planes in all 21 coordinates are essentially never positive
/// definite, so rejection sampling starts from this distribution instead.
pub fn hyperbolic_weighted_plane<R: Rng + ?Sized>(l: &Arc<Lattice>, rng: &mut R) -> LatticePlane {
    let n = l.rank();
    let mut bound = vec![POSDEF_OFF_BLOCK_BOUND; n];
    for b in l.blocks().iter().filter(|b| b.kind == BlockKind::Hyperbolic) {
        bound[b.offset..b.offset + b.kind.rank()].fill(DEFAULT_ENTRY_BOUND);
    }
    loop {
        let mut draw = || -> Vec<BigInt> { bound.iter().map(|&m| BigInt::from(rng.gen_range(-m..=m))).collect() };
        let (a, b) = (draw(), draw());
        if let Ok(h) = LatticePlane::new(l.clone(), a, b) {
            return h;
        }
    }
}

pub fn sample_density(opts: &SampleOptions) -> Result<SampleReport, CliError> {
    let l = lambda(opts.d)?;
    prime_for(&l, opts.p)?;
    if !num_traits::Signed::is_positive(&opts.epsilon) {
        return Err(PerturbError::InvalidEpsilon.into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut planes = Vec::with_capacity(opts.trials);
    let mut draws = 0u64;
    while planes.len() < opts.trials {
        if draws >= opts.max_draws {
            return Err(CliError::Engine(format!(
                "only {} positive definite planes in {draws} draws",
                planes.len()
            )));
        }
        let h = if opts.require_posdef {
            hyperbolic_weighted_plane(&l, &mut rng)
        } else {
            random_plane(&l, DEFAULT_ENTRY_BOUND, &mut rng)
        };
        draws += 1;
        if !opts.require_posdef || h.is_positive_definite() {
            planes.push(h);
        }
    }
    let runs: Vec<(bool, Option<(BigRational, bool)>)> = planes
        .par_iter()
        .map(|h| {
            let out = match make_property_r(h, opts.p, &opts.epsilon) {
                Ok(c) if verify_certificate(&c).is_valid() => Some((c.distance.clone(), c.output.is_positive_definite())),
                Ok(_) => {
                    warn!("certificate failed verification");
                    None
                }
                Err(e) => {
                    warn!("engine failed: {e}");
                    None
                }
            };
            (h.is_positive_definite(), out)
        })
        .collect();
    let distances: Vec<&BigRational> = runs.iter().filter_map(|(_, o)| o.as_ref().map(|(d, _)| d)).collect();
    let distance_stats = (!distances.is_empty()).then(|| {
        let min = distances.iter().min().expect("nonempty");
        let max = distances.iter().max().expect("nonempty");
        let sum = distances
            .iter()
            .fold(BigRational::from_integer(BigInt::from(0)), |acc, d| acc + *d);
        DistanceStats {
            min: format_rational(min),
            max: format_rational(max),
            mean: format_rational(&(sum / BigRational::from_integer(BigInt::from(distances.len())))),
        }
    });
    Ok(SampleReport {
        d: l.degree().expect("Λ_d has a degree"),
        p: opts.p,
        trials: opts.trials,
        successes: distances.len(),
        epsilon: format_rational(&opts.epsilon),
        distance_stats,
        posdef_count: runs.iter().filter(|(pd, _)| *pd).count(),
        posdef_output_count: runs.iter().filter(|(_, o)| matches!(o, Some((_, true)))).count(),
        require_posdef: opts.require_posdef,
        draws,
        seed: opts.seed,
    })
}

pub fn cmd_sample_density(opts: &SampleOptions) -> Result<String, CliError> {
    Ok(json::to_pretty(&sample_density(opts)?)?)
}
