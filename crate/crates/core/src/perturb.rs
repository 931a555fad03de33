//! Constructive perturbation of a rational plane into one whose
//! discriminant is a nonzero square mod `p`.
//!
//! The engine runs four steps, each of which replaces one basis vector `ω`
//! by the primitive part of `N·ω + v` for a lattice vector `v` and a
//! denominator `N` coprime to `p` (so the plane moves by about `v/N`):
//!
//! 1. make `(ω1,ω1) ≢ 0` using a norm `-2` vector outside the plane;
//! 2. make `disc ≢ 0` using a direction with nonzero leading coefficient
//!    `(ω1,ω1)(δ,δ) - (ω1,δ)^2`;
//! 3. after orthogonalizing the basis, find `η ⊥ H` with `(η,η) ≢ 0`,
//!    perturbing `ω2` along the complement if the complement's form
//!    vanishes mod `p`;
//! 4. choose `y = 1/N` with `A - B y^2` a nonzero square, where
//!    `A = disc` and `B = -(ω1,ω1)(η,η)`.
//!
//! Every step is recorded in a [`PerturbCertificate`] that
//! [`verify_certificate`] replays exactly.

use std::sync::Arc;

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::lattice::GramLattice;
use crate::modp::{solve_residue_lemma, ModP, ModPError, Prime};
use crate::plane::{DiscClass, Plane, PlaneError, Target};
use crate::scalar::{ceil_rational, is_zero_vec, sup_norm, Rational, Scalar};

/// Rounds of the complement fallback in step 3.
pub const STEP3_FALLBACK_ROUNDS: usize = 3;

/// Largest coefficient in the small combinations tried by step 3.
pub const STEP3_COMBINATION_BOUND: i64 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PerturbError {
    #[error("p = {p} must be at least 5 and must not divide det L = {det}")]
    InvalidPrime { p: u64, det: String },
    #[error("epsilon must be positive")]
    InvalidEpsilon,
    #[error("no norm -2 vector outside the plane within the search bound")]
    NoRootVector,
    #[error("no direction with nonzero leading coefficient mod p")]
    NoDeltaFound,
    #[error("no anisotropic vector orthogonal to the plane after {0} fallback rounds")]
    EtaNotFound(usize),
    #[error("precondition failed: {0}")]
    Precondition(&'static str),
    #[error(transparent)]
    Residue(#[from] ModPError),
    #[error(transparent)]
    Plane(#[from] PlaneError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepKind {
    Step1,
    Step2,
    Step3,
    Step4,
}

impl StepKind {
    pub fn name(self) -> &'static str {
        match self {
            StepKind::Step1 => "Step1",
            StepKind::Step2 => "Step2",
            StepKind::Step3 => "Step3",
            StepKind::Step4 => "Step4",
        }
    }
}

/// Basis invariants of a plane reduced mod `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Residues {
    pub omega1_norm: ModP,
    pub omega2_norm: ModP,
    pub pairing: ModP,
    pub disc: ModP,
}

impl Residues {
    pub fn of<T: Scalar>(h: &Plane<T>, p: Prime) -> Self {
        Residues {
            omega1_norm: p.reduce(&h.norm1()),
            omega2_norm: p.reduce(&h.norm2()),
            pairing: p.reduce(&h.pairing()),
            disc: p.reduce(&h.disc()),
        }
    }
}

/// One recorded perturbation `target <- primitive(N * target + direction)`.
/// `n == None` marks an identity step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerturbStep<T> {
    pub kind: StepKind,
    pub direction: Vec<T>,
    pub n: Option<T>,
    pub target: Target,
    pub residues_before: Residues,
    pub residues_after: Residues,
}

impl<T: Scalar> PerturbStep<T> {
    fn identity(kind: StepKind, h: &Plane<T>, p: Prime) -> Self {
        let r = Residues::of(h, p);
        PerturbStep {
            kind,
            direction: vec![T::zero(); h.lattice().rank()],
            n: None,
            target: if kind == StepKind::Step1 {
                Target::Omega1
            } else {
                Target::Omega2
            },
            residues_before: r,
            residues_after: r,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.n.is_none()
    }

    /// Apply the recorded update to `h`.
    pub fn apply(&self, h: &Plane<T>) -> Result<Plane<T>, PlaneError> {
        match &self.n {
            None => Ok(h.clone()),
            Some(n) => h.with_vector(self.target, scaled_sum(h.vector(self.target), n, &self.direction)),
        }
    }

    /// `‖direction‖∞ / (N ‖target‖∞)` measured on the plane before the step.
    pub fn distance(&self, before: &Plane<T>) -> Rational<T> {
        match &self.n {
            None => Ratio::zero(),
            Some(n) => Ratio::new(
                sup_norm(&self.direction),
                n.clone() * sup_norm(before.vector(self.target)),
            ),
        }
    }
}

fn scaled_sum<T: Scalar>(target: &[T], n: &T, dir: &[T]) -> Vec<T> {
    target
        .iter()
        .zip(dir)
        .map(|(w, d)| n.clone() * w.clone() + d.clone())
        .collect()
}

/// How large a step's denominator must be.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Budget<T: Scalar> {
    /// Use `N >= n_min` directly.
    MinDenominator(T),
    /// Keep the step's distance at most this value.
    Epsilon(Rational<T>),
}

impl<T: Scalar> Budget<T> {
    /// Smallest `N` allowed for perturbing `target` along `direction`.
    pub fn n_min(&self, direction: &[T], target: &[T]) -> T {
        let n = match self {
            Budget::MinDenominator(n) => n.clone(),
            Budget::Epsilon(eps) => ceil_rational(
                &(Ratio::from_integer(sup_norm(direction)) / (eps.clone() * Ratio::from_integer(sup_norm(target)))),
            ),
        };
        if n < T::one() {
            T::one()
        } else {
            n
        }
    }
}

/// Smallest `N >= n_min` with `p ∤ N` and `accept(N mod p)`.
fn smallest_denominator<T: Scalar>(n_min: &T, p: Prime, accept: impl Fn(ModP) -> bool) -> Option<T> {
    let mut n = n_min.clone();
    // `accept` rejects at most a handful of residues, so 2p candidates suffice.
    for _ in 0..2 * p.get() + 2 {
        let r = p.reduce(&n);
        if !r.is_zero() && accept(r) {
            return Some(n);
        }
        n = n + T::one();
    }
    None
}

fn modulus_scalar<T: Scalar>(p: Prime) -> T {
    T::from_u64(p.get()).expect("modulus fits the scalar type")
}

/// Step 1: make `(ω1,ω1) ≢ 0 mod p`.
pub fn step1_fix_norm<T: Scalar>(
    h: &Plane<T>,
    p: Prime,
    budget: &Budget<T>,
) -> Result<(Plane<T>, PerturbStep<T>), PerturbError> {
    let before = Residues::of(h, p);
    if !before.omega1_norm.is_zero() {
        return Ok((h.clone(), PerturbStep::identity(StepKind::Step1, h, p)));
    }
    let l = h.lattice();
    let delta = l
        .find_norm_minus2(|v| !h.contains(v))
        .map_err(|_| PerturbError::NoRootVector)?;
    let w1 = h.omega1();
    let a = p.reduce(&h.norm1());
    let b = p.reduce(&l.inner_unchecked(w1, &delta));
    let c = p.reduce(&l.inner_unchecked(&delta, &delta));
    let two = p.elem(2);
    let n_min = budget.n_min(&delta, w1);
    // (Nω1 + δ)^2 = a N^2 + 2 b N + c
    let n = smallest_denominator(&n_min, p, |x| !(a * x * x + two * b * x + c).is_zero())
        .ok_or(PerturbError::Precondition("norm quadratic vanishes identically"))?;
    let out = h.with_vector(Target::Omega1, scaled_sum(w1, &n, &delta))?;
    let step = PerturbStep {
        kind: StepKind::Step1,
        direction: delta,
        n: Some(n),
        target: Target::Omega1,
        residues_before: before,
        residues_after: Residues::of(&out, p),
    };
    Ok((out, step))
}

/// Directions tried by step 2: root candidates, then sums of orthogonal root pairs.
fn step2_candidates<T: Scalar>(l: &GramLattice<T>) -> Vec<Vec<T>> {
    let roots = l.root_candidates();
    let mut out = roots.clone();
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            if l.inner_unchecked(&roots[i], &roots[j]).is_zero() {
                out.push(roots[i].iter().zip(&roots[j]).map(|(a, b)| a.clone() + b.clone()).collect());
            }
        }
    }
    out
}

/// Step 2: make `disc(ω1,ω2) ≢ 0 mod p`, keeping `ω1`.
pub fn step2_fix_disc<T: Scalar>(
    h: &Plane<T>,
    p: Prime,
    budget: &Budget<T>,
) -> Result<(Plane<T>, PerturbStep<T>), PerturbError> {
    let before = Residues::of(h, p);
    if before.omega1_norm.is_zero() {
        return Err(PerturbError::Precondition("step 2 needs (ω1,ω1) ≢ 0 mod p"));
    }
    if !before.disc.is_zero() {
        return Ok((h.clone(), PerturbStep::identity(StepKind::Step2, h, p)));
    }
    let l = h.lattice();
    let (w1, w2) = (h.omega1(), h.omega2());
    let n11 = before.omega1_norm;
    let n12 = before.pairing;
    let leading = |d: &[T]| {
        let w1d = p.reduce(&l.inner_unchecked(w1, d));
        n11 * p.reduce(&l.inner_unchecked(d, d)) - w1d * w1d
    };
    let delta = step2_candidates(l)
        .into_iter()
        .find(|d| !leading(d).is_zero())
        .ok_or(PerturbError::NoDeltaFound)?;
    let lead = leading(&delta);
    let w1d = p.reduce(&l.inner_unchecked(w1, &delta));
    let w2d = p.reduce(&l.inner_unchecked(w2, &delta));
    let cross = n11 * w2d - w1d * n12;
    let d0 = before.disc;
    let two = p.elem(2);
    let n_min = budget.n_min(&delta, w2);
    // disc(ω1, Nω2 + δ) = D0 N^2 + 2 C N + L
    let n = smallest_denominator(&n_min, p, |x| !(d0 * x * x + two * cross * x + lead).is_zero())
        .ok_or(PerturbError::Precondition("disc quadratic vanishes identically"))?;
    let out = h.with_vector(Target::Omega2, scaled_sum(w2, &n, &delta))?;
    let step = PerturbStep {
        kind: StepKind::Step2,
        direction: delta,
        n: Some(n),
        target: Target::Omega2,
        residues_before: before,
        residues_after: Residues::of(&out, p),
    };
    Ok((out, step))
}

fn check_diagonal<T: Scalar>(h: &Plane<T>, p: Prime) -> Result<Residues, PerturbError> {
    if !h.pairing().is_zero() {
        return Err(PerturbError::Precondition("basis must be orthogonal"));
    }
    let r = Residues::of(h, p);
    if r.omega1_norm.is_zero() || r.omega2_norm.is_zero() {
        return Err(PerturbError::Precondition("basis norms must be nonzero mod p"));
    }
    Ok(r)
}

/// First vector with nonzero norm mod `p` among the complement basis and
/// small combinations of pairs of basis vectors.
fn anisotropic_in<T: Scalar>(l: &GramLattice<T>, basis: &[Vec<T>], p: Prime) -> Option<Vec<T>> {
    let anisotropic = |v: &[T]| !p.divides(&l.inner_unchecked(v, v));
    if let Some(v) = basis.iter().find(|v| anisotropic(v)) {
        return Some(v.clone());
    }
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            for a in 1..=STEP3_COMBINATION_BOUND {
                for b in -STEP3_COMBINATION_BOUND..=STEP3_COMBINATION_BOUND {
                    if b == 0 {
                        continue;
                    }
                    let (a, b) = (T::from_int(a), T::from_int(b));
                    let v: Vec<T> = basis[i]
                        .iter()
                        .zip(&basis[j])
                        .map(|(x, y)| a.clone() * x.clone() + b.clone() * y.clone())
                        .collect();
                    if anisotropic(&v) {
                        return crate::matrix::primitivize_int(&v);
                    }
                }
            }
        }
    }
    None
}

/// Outcome of step 3.
#[derive(Debug, Clone)]
pub struct Step3Outcome<T> {
    /// Primitive, orthogonal to `plane`, `(η,η) ≢ 0 mod p`.
    pub eta: Vec<T>,
    pub plane: Plane<T>,
    /// One identity step, or the fallback perturbations that were needed.
    pub steps: Vec<PerturbStep<T>>,
}

/// Step 3: find `η ⊥ H` with `(η,η) ≢ 0 mod p` on an orthogonal basis.
pub fn step3_find_eta<T: Scalar>(
    h: &Plane<T>,
    p: Prime,
    budget: &Budget<T>,
) -> Result<Step3Outcome<T>, PerturbError> {
    check_diagonal(h, p)?;
    let l = h.lattice().clone();
    let mut current = h.clone();
    let mut steps = Vec::new();
    for round in 0..=STEP3_FALLBACK_ROUNDS {
        let complement = current.orth_complement();
        if let Some(eta) = anisotropic_in(&l, &complement, p) {
            if steps.is_empty() {
                steps.push(PerturbStep::identity(StepKind::Step3, &current, p));
            }
            return Ok(Step3Outcome {
                eta,
                plane: current,
                steps,
            });
        }
        if round == STEP3_FALLBACK_ROUNDS {
            break;
        }
        // The form on the complement vanishes mod p: move ω2 along it.
        let eta0 = complement
            .first()
            .cloned()
            .ok_or(PerturbError::EtaNotFound(round))?;
        let before = Residues::of(&current, p);
        let n22 = before.omega2_norm;
        let ee = p.reduce(&l.inner_unchecked(&eta0, &eta0));
        let w2 = current.omega2().to_vec();
        let n_min = budget.n_min(&eta0, &w2);
        let n = smallest_denominator(&n_min, p, |x| !(n22 * x * x + ee).is_zero())
            .ok_or(PerturbError::Precondition("norm quadratic vanishes identically"))?;
        let next = current.with_vector(Target::Omega2, scaled_sum(&w2, &n, &eta0))?;
        steps.push(PerturbStep {
            kind: StepKind::Step3,
            direction: eta0,
            n: Some(n),
            target: Target::Omega2,
            residues_before: before,
            residues_after: Residues::of(&next, p),
        });
        current = next;
    }
    Err(PerturbError::EtaNotFound(STEP3_FALLBACK_ROUNDS))
}

/// Step 4: move `ω2` along `η` so that the discriminant becomes a nonzero
/// square mod `p`.
pub fn step4_make_square<T: Scalar>(
    h: &Plane<T>,
    eta: &[T],
    p: Prime,
    budget: &Budget<T>,
) -> Result<(Plane<T>, PerturbStep<T>), PerturbError> {
    let before = check_diagonal(h, p)?;
    let a = before.disc;
    if a.is_zero() {
        return Err(PerturbError::Precondition("step 4 needs disc ≢ 0 mod p"));
    }
    if a.is_nonzero_square() {
        return Ok((h.clone(), PerturbStep::identity(StepKind::Step4, h, p)));
    }
    let l = h.lattice();
    let (e1, e2) = h.pairings_with(eta).map_err(PlaneError::from)?;
    if !e1.is_zero() || !e2.is_zero() {
        return Err(PerturbError::Precondition("η must be orthogonal to the plane"));
    }
    let ee = p.reduce(&l.inner_unchecked(eta, eta));
    if ee.is_zero() {
        return Err(PerturbError::Precondition("(η,η) must be nonzero mod p"));
    }
    let b = -(before.omega1_norm * ee);
    let (y, _) = solve_residue_lemma(a, b)?;
    if y.is_zero() {
        return Ok((h.clone(), PerturbStep::identity(StepKind::Step4, h, p)));
    }
    let w2 = h.omega2();
    let n_min = budget.n_min(eta, w2);
    let target = y.inverse()?;
    let m: T = modulus_scalar(p);
    let shift = (T::from_u64(target.value()).expect("residue fits") - n_min.clone()).mod_floor(&m);
    let n = n_min + shift;
    let out = h.with_vector(Target::Omega2, scaled_sum(w2, &n, eta))?;
    let step = PerturbStep {
        kind: StepKind::Step4,
        direction: eta.to_vec(),
        n: Some(n),
        target: Target::Omega2,
        residues_before: before,
        residues_after: Residues::of(&out, p),
    };
    Ok((out, step))
}

/// A replayable witness that `output` lies within `epsilon` of `input`
/// and has a square discriminant mod `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerturbCertificate<T: Scalar> {
    pub p: Prime,
    pub epsilon: Rational<T>,
    pub input: Plane<T>,
    pub output: Plane<T>,
    pub steps: Vec<PerturbStep<T>>,
    pub final_class: DiscClass<T>,
    pub sqrt_witness: ModP,
    pub distance: Rational<T>,
}

impl<T: Scalar> PerturbCertificate<T> {
    pub fn lattice(&self) -> &Arc<GramLattice<T>> {
        self.input.lattice()
    }
}

/// `p >= 5` and `p ∤ det L` (for `Λ_d`, `p ∤ d`).
pub fn check_prime<T: Scalar>(l: &GramLattice<T>, p: u64) -> Result<Prime, PerturbError> {
    let det = l.det();
    let invalid = || PerturbError::InvalidPrime {
        p,
        det: det.to_string(),
    };
    let prime = Prime::new(p).map_err(|_| invalid())?;
    if p < 5 || prime.divides(&det) {
        return Err(invalid());
    }
    Ok(prime)
}

/// Run the four steps on `h` with the distance budget split evenly.
pub fn make_property_r<T: Scalar>(
    h: &Plane<T>,
    p: u64,
    epsilon: &Rational<T>,
) -> Result<PerturbCertificate<T>, PerturbError> {
    let p = check_prime(h.lattice(), p)?;
    if !epsilon.is_positive() {
        return Err(PerturbError::InvalidEpsilon);
    }
    let budget = Budget::Epsilon(epsilon.clone() / Ratio::from_integer(T::from_int(4)));
    let mut steps = Vec::with_capacity(4);
    let output = if h.property_r(p).holds {
        for kind in [StepKind::Step1, StepKind::Step2, StepKind::Step3, StepKind::Step4] {
            steps.push(PerturbStep::identity(kind, h, p));
        }
        h.clone()
    } else {
        let (h1, s1) = step1_fix_norm(h, p, &budget)?;
        let (h2, s2) = step2_fix_disc(&h1, p, &budget)?;
        steps.push(s1);
        steps.push(s2);
        if h2.property_r(p).holds {
            steps.push(PerturbStep::identity(StepKind::Step3, &h2, p));
            steps.push(PerturbStep::identity(StepKind::Step4, &h2, p));
            h2
        } else {
            let hd = h2.diagonalize()?;
            let s3 = step3_find_eta(&hd, p, &budget)?;
            let (h4, s4) = step4_make_square(&s3.plane, &s3.eta, p, &budget)?;
            steps.extend(s3.steps);
            steps.push(s4);
            h4
        }
    };
    let (replayed, distance) = replay(h, &steps)?;
    debug_assert_eq!(replayed, output);
    let output = replayed;
    let final_class = output.disc_class(p);
    let sqrt_witness = final_class.residue.sqrt()?;
    Ok(PerturbCertificate {
        p,
        epsilon: epsilon.clone(),
        input: h.clone(),
        output,
        steps,
        final_class,
        sqrt_witness,
        distance,
    })
}

/// Whether replay orthogonalizes the basis before the first step-3 entry:
/// only when some step 3 or 4 actually moves the plane.
fn needs_diagonalize<T: Scalar>(steps: &[PerturbStep<T>]) -> bool {
    steps
        .iter()
        .any(|s| s.kind >= StepKind::Step3 && !s.is_identity())
}

/// Apply `steps` to `input`; returns the final plane and the summed distance.
pub fn replay<T: Scalar>(input: &Plane<T>, steps: &[PerturbStep<T>]) -> Result<(Plane<T>, Rational<T>), PlaneError> {
    let diag = needs_diagonalize(steps);
    let mut h = input.clone();
    let mut dist = Ratio::zero();
    let mut diagonalized = false;
    for s in steps {
        if diag && !diagonalized && s.kind >= StepKind::Step3 {
            h = h.diagonalize()?;
            diagonalized = true;
        }
        dist = dist + s.distance(&h);
        h = s.apply(&h)?;
    }
    Ok((h, dist))
}

/// Outcome of [`verify_certificate`]; valid iff no reasons were recorded.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Verification {
    pub reasons: Vec<String>,
}

impl Verification {
    pub fn is_valid(&self) -> bool {
        self.reasons.is_empty()
    }

    fn fail(&mut self, msg: impl Into<String>) {
        self.reasons.push(msg.into());
    }
}

fn well_formed_kinds(kinds: &[StepKind]) -> bool {
    kinds.len() >= 4
        && kinds[0] == StepKind::Step1
        && kinds[1] == StepKind::Step2
        && kinds[kinds.len() - 1] == StepKind::Step4
        && kinds[2..kinds.len() - 1].iter().all(|k| *k == StepKind::Step3)
}

/// Replay a certificate and recheck every recorded value.
pub fn verify_certificate<T: Scalar>(c: &PerturbCertificate<T>) -> Verification {
    let mut v = Verification::default();
    let p = c.p;
    let l = c.input.lattice().clone();
    if p.get() < 5 || p.divides(&l.det()) {
        v.fail(format!("p = {p} is not admissible for this lattice"));
    }
    if **c.output.lattice() != *l {
        v.fail("input and output live in different lattices");
    }
    let kinds: Vec<StepKind> = c.steps.iter().map(|s| s.kind).collect();
    if !well_formed_kinds(&kinds) {
        v.fail(format!("step sequence {kinds:?} is not Step1, Step2, Step3+, Step4"));
        return v;
    }
    let diag = needs_diagonalize(&c.steps);
    let mut h = c.input.clone();
    let mut diagonalized = false;
    let mut dist: Rational<T> = Ratio::zero();
    for (i, s) in c.steps.iter().enumerate() {
        let tag = format!("step {i} ({})", s.kind.name());
        if diag && !diagonalized && s.kind >= StepKind::Step3 {
            match h.diagonalize() {
                Ok(d) => h = d,
                Err(e) => {
                    v.fail(format!("{tag}: cannot orthogonalize basis: {e}"));
                    return v;
                }
            }
            diagonalized = true;
        }
        if s.direction.len() != l.rank() {
            v.fail(format!("{tag}: direction has wrong length"));
            return v;
        }
        if s.residues_before != Residues::of(&h, p) {
            v.fail(format!("{tag}: recorded residues before the step do not recompute"));
        }
        match &s.n {
            None => {
                if !is_zero_vec(&s.direction) {
                    v.fail(format!("{tag}: identity step carries a direction"));
                }
            }
            Some(n) => {
                if !n.is_positive() {
                    v.fail(format!("{tag}: N = {n} is not positive"));
                }
                if p.divides(n) {
                    v.fail(format!("{tag}: N = {n} is divisible by p"));
                }
                check_direction(&mut v, &tag, s, &h, p);
            }
        }
        dist = dist + s.distance(&h);
        h = match s.apply(&h) {
            Ok(next) => next,
            Err(e) => {
                v.fail(format!("{tag}: update fails: {e}"));
                return v;
            }
        };
        let after = Residues::of(&h, p);
        if s.residues_after != after {
            v.fail(format!("{tag}: recorded residues after the step do not recompute"));
        }
        if !s.is_identity() {
            let post_ok = match s.kind {
                StepKind::Step1 => !after.omega1_norm.is_zero(),
                StepKind::Step2 => !after.disc.is_zero(),
                StepKind::Step3 => !after.omega2_norm.is_zero() && after.pairing.is_zero(),
                StepKind::Step4 => after.disc.is_nonzero_square(),
            };
            if !post_ok {
                v.fail(format!("{tag}: step postcondition fails"));
            }
        }
    }
    if h.omega1() != c.output.omega1() || h.omega2() != c.output.omega2() {
        v.fail("replay does not reproduce the output plane");
    }
    let class = c.output.disc_class(p);
    if class != c.final_class {
        v.fail("recorded final discriminant class does not recompute");
    }
    if !class.is_nonzero_square() {
        v.fail("final discriminant is not a nonzero square mod p");
    }
    if c.sqrt_witness.prime() != p || c.sqrt_witness * c.sqrt_witness != class.residue {
        v.fail("square-root witness does not square to the final residue");
    }
    if dist != c.distance {
        v.fail("recorded distance does not recompute");
    }
    if c.distance > c.epsilon {
        v.fail("distance exceeds epsilon");
    }
    v
}

fn check_direction<T: Scalar>(v: &mut Verification, tag: &str, s: &PerturbStep<T>, h: &Plane<T>, p: Prime) {
    let l = h.lattice();
    let d = &s.direction;
    if is_zero_vec(d) {
        v.fail(format!("{tag}: zero direction"));
        return;
    }
    let expected_target = if s.kind == StepKind::Step1 {
        Target::Omega1
    } else {
        Target::Omega2
    };
    if s.target != expected_target {
        v.fail(format!("{tag}: wrong target vector"));
    }
    match s.kind {
        StepKind::Step1 => {
            if l.inner_unchecked(d, d) != T::from_int(-2) {
                v.fail(format!("{tag}: direction is not a norm -2 vector"));
            }
        }
        StepKind::Step2 => {}
        StepKind::Step3 | StepKind::Step4 => {
            let (a, b) = h.pairings_with(d).expect("length checked");
            if !a.is_zero() || !b.is_zero() {
                v.fail(format!("{tag}: direction is not orthogonal to the plane"));
            }
            if !crate::scalar::content(d).is_one() {
                v.fail(format!("{tag}: direction is not primitive"));
            }
            if s.kind == StepKind::Step4 && p.divides(&l.inner_unchecked(d, d)) {
                v.fail(format!("{tag}: (η,η) vanishes mod p"));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    type P = Plane<BigInt>;

    fn lam(d: i64) -> Arc<GramLattice<BigInt>> {
        Arc::new(GramLattice::lambda(d).unwrap())
    }

    fn v(coords: &[(usize, i64)]) -> Vec<BigInt> {
        let mut out = vec![BigInt::from(0); 21];
        for &(i, c) in coords {
            out[i] = BigInt::from(c);
        }
        out
    }

    // first U: e=1, f=2; second U: e'=3, f'=4; first E8 α₁ = 5
    fn prime(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    fn n_min(n: i64) -> Budget<BigInt> {
        Budget::MinDenominator(BigInt::from(n))
    }

    #[test]
    fn step1_identity_when_norm_nonzero() {
        let h = P::new(lam(4), v(&[(1, 1), (2, 1)]), v(&[(3, 1)])).unwrap();
        let (out, step) = step1_fix_norm(&h, prime(23), &n_min(100)).unwrap();
        assert_eq!(out, h);
        assert!(step.is_identity());
        assert_eq!(step.residues_before.omega1_norm.value(), 2);
    }

    #[test]
    fn step1_on_hyperbolic_pair() {
        let h = P::new(lam(4), v(&[(1, 1)]), v(&[(2, 1)])).unwrap();
        let (out, step) = step1_fix_norm(&h, prime(23), &n_min(100)).unwrap();
        assert_eq!(step.direction, v(&[(5, 1)]));
        assert_eq!(step.n, Some(BigInt::from(100)));
        assert_eq!(out.omega1(), v(&[(1, 100), (5, 1)]).as_slice());
        assert_eq!(out.norm1(), BigInt::from(-2));
        assert_eq!(step.residues_after.omega1_norm.value(), 21);
        assert_eq!(step.apply(&h).unwrap(), out);
    }

    #[test]
    fn step1_skips_denominators_divisible_by_p() {
        let h = P::new(lam(4), v(&[(1, 1)]), v(&[(2, 1)])).unwrap();
        let (_, step) = step1_fix_norm(&h, prime(23), &n_min(92)).unwrap();
        assert_eq!(step.n, Some(BigInt::from(93)));
    }

    #[test]
    fn step2_identity_and_continuation() {
        let p = prime(23);
        let h = P::new(lam(4), v(&[(1, 1), (2, 1)]), v(&[(3, 1), (4, 7)])).unwrap();
        assert_eq!(h.disc_class(p).residue.value(), 5);
        let (out, step) = step2_fix_disc(&h, p, &n_min(100)).unwrap();
        assert!(step.is_identity());
        assert_eq!(out, h);

        let start = P::new(lam(4), v(&[(1, 1)]), v(&[(2, 1)])).unwrap();
        let (h1, _) = step1_fix_norm(&start, p, &n_min(100)).unwrap();
        let (h2, _) = step2_fix_disc(&h1, p, &n_min(100)).unwrap();
        assert!(!h2.disc_class(p).residue.is_zero());
    }

    #[test]
    fn step2_fixes_vanishing_disc() {
        let p = prime(23);
        // (ω1,ω1) = 2, ω2 = 23 f' + e' gives disc = 2 * 46 ≡ 0
        let h = P::new(lam(4), v(&[(1, 1), (2, 1)]), v(&[(3, 1), (4, 23)])).unwrap();
        assert!(h.disc_class(p).residue.is_zero());
        let (out, step) = step2_fix_disc(&h, p, &n_min(10)).unwrap();
        assert!(!step.is_identity());
        assert!(!out.disc_class(p).residue.is_zero());
        assert_eq!(step.residues_after, Residues::of(&out, p));
        assert!(matches!(
            step2_fix_disc(&P::new(lam(4), v(&[(1, 1)]), v(&[(2, 1)])).unwrap(), p, &n_min(1)),
            Err(PerturbError::Precondition(_))
        ));
    }

    #[test]
    fn step3_on_first_u_slot() {
        let p = prime(23);
        let h = P::new(lam(4), v(&[(1, 1), (2, 1)]), v(&[(1, 1), (2, -1)])).unwrap();
        let out = step3_find_eta(&h, p, &n_min(100)).unwrap();
        assert_eq!(out.plane, h);
        assert_eq!(out.steps.len(), 1);
        assert!(out.steps[0].is_identity());
        let (a, b) = h.pairings_with(&out.eta).unwrap();
        assert!(a.is_zero() && b.is_zero());
        // the Z(-4) coordinate comes first in the complement basis
        assert_eq!(out.eta, v(&[(0, 1)]));
        assert_eq!(p.reduce(&h.lattice().norm(&out.eta).unwrap()).value(), 19);
        // an E8 root of the complement also qualifies
        assert_eq!(h.projection_residual_norm(&v(&[(5, 1)]), p).unwrap().value(), 21);
    }

    #[test]
    fn step4_example() {
        let p = prime(23);
        // (ω1,ω1) = 12, (ω2,ω2) = 10, A = 120 ≡ 5, B = -12 * (-2) ≡ 1
        let h = P::new(lam(4), v(&[(1, 1), (2, 6)]), v(&[(3, 1), (4, 5)])).unwrap();
        let eta = v(&[(5, 1)]);
        let (out, step) = step4_make_square(&h, &eta, p, &n_min(100)).unwrap();
        assert_eq!(step.n, Some(BigInt::from(116)));
        let class = out.disc_class(p);
        assert_eq!(class.residue.value(), 4);
        assert_eq!(class.sqrt().unwrap().value(), 2);
        assert_eq!(class.legendre, crate::modp::Legendre::Residue);
    }

    #[test]
    fn step4_identity_when_already_square() {
        let p = prime(29);
        let h = P::new(lam(4), v(&[(1, 1), (2, 1)]), v(&[(5, 1)])).unwrap();
        assert_eq!(h.disc_class(p).residue.value(), 25);
        let (out, step) = step4_make_square(&h, &v(&[(13, 1)]), p, &n_min(1)).unwrap();
        assert!(step.is_identity());
        assert_eq!(out, h);
    }

    #[test]
    fn step4_rejects_bad_eta() {
        let p = prime(23);
        let h = P::new(lam(4), v(&[(1, 1), (2, 6)]), v(&[(3, 1), (4, 5)])).unwrap();
        assert!(matches!(
            step4_make_square(&h, &v(&[(1, 1)]), p, &n_min(1)),
            Err(PerturbError::Precondition(_))
        ));
    }

    #[test]
    fn engine_identity_on_property_r_plane() {
        let h = P::new(lam(4), v(&[(1, 1), (2, 1)]), v(&[(5, 1)])).unwrap();
        let c = make_property_r(&h, 29, &Ratio::new(BigInt::from(1), BigInt::from(100))).unwrap();
        assert_eq!(c.steps.len(), 4);
        assert!(c.steps.iter().all(|s| s.is_identity()));
        assert!(c.distance.is_zero());
        assert_eq!(c.output, h);
        assert!(verify_certificate(&c).is_valid());
    }

    #[test]
    fn engine_on_hyperbolic_pair() {
        let h = P::new(lam(4), v(&[(1, 1)]), v(&[(2, 1)])).unwrap();
        let eps = Ratio::new(BigInt::from(1), BigInt::from(100));
        let c = make_property_r(&h, 23, &eps).unwrap();
        assert!(c.output.property_r(c.p).holds);
        assert!(c.distance <= eps);
        let v = verify_certificate(&c);
        assert!(v.is_valid(), "{:?}", v.reasons);
        // idempotent on its own output
        let again = make_property_r(&c.output, 23, &eps).unwrap();
        assert!(again.steps.iter().all(|s| s.is_identity()));
    }

    #[test]
    fn engine_rejects_bad_parameters() {
        let h = P::new(lam(46), v(&[(1, 1)]), v(&[(2, 1)])).unwrap();
        let eps = Ratio::new(BigInt::from(1), BigInt::from(10));
        assert!(matches!(make_property_r(&h, 23, &eps), Err(PerturbError::InvalidPrime { .. })));
        assert!(matches!(make_property_r(&h, 2, &eps), Err(PerturbError::InvalidPrime { .. })));
        assert!(matches!(make_property_r(&h, 3, &eps), Err(PerturbError::InvalidPrime { .. })));
        assert!(matches!(make_property_r(&h, 25, &eps), Err(PerturbError::InvalidPrime { .. })));
        assert_eq!(
            make_property_r(&h, 29, &Ratio::from_integer(BigInt::from(0))).unwrap_err(),
            PerturbError::InvalidEpsilon
        );
    }

    #[test]
    fn engine_is_generic_over_fixed_width_scalars() {
        let l = Arc::new(GramLattice::<i128>::lambda(4).unwrap());
        let mut e = vec![0i128; 21];
        e[1] = 1;
        let mut f = vec![0i128; 21];
        f[2] = 1;
        let h = Plane::new(l, e, f).unwrap();
        let c = make_property_r(&h, 23, &Ratio::new(1i128, 10)).unwrap();
        assert!(verify_certificate(&c).is_valid());
    }

    #[test]
    fn tampered_certificates_fail() {
        let h = P::new(lam(4), v(&[(1, 1)]), v(&[(2, 1)])).unwrap();
        let c = make_property_r(&h, 23, &Ratio::new(BigInt::from(1), BigInt::from(100))).unwrap();

        let mut bad = c.clone();
        let mut w = bad.output.omega1().to_vec();
        w[7] += 1;
        bad.output = bad.output.with_vector(Target::Omega1, w).unwrap();
        assert!(!verify_certificate(&bad).is_valid());

        let mut bad = c.clone();
        bad.sqrt_witness = bad.sqrt_witness + bad.p.elem(1);
        assert!(!verify_certificate(&bad).is_valid());

        let mut bad = c.clone();
        let s = bad.steps.iter_mut().find(|s| !s.is_identity()).unwrap();
        s.n = s.n.clone().map(|n| n + 1);
        assert!(!verify_certificate(&bad).is_valid());

        let mut bad = c.clone();
        bad.distance = bad.distance.clone() / Ratio::from_integer(BigInt::from(2));
        assert!(!verify_certificate(&bad).is_valid());

        let mut bad = c;
        bad.steps.swap(0, 1);
        assert!(!verify_certificate(&bad).is_valid());
    }
}
