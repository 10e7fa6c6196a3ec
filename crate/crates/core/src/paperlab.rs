//! Executable versions of two constructions over `Q(sqrt(2))` and general fields:
//!
//! * extracting a universal quadratic subform from a universal totally positive definite
//!   generalized form ([`theorem_pipeline`]), target by target up to a trace bound;
//! * the semidefinite form `G = S + H` over `Q(sqrt(2))` that represents every totally
//!   positive integer although none of its quadratic subforms does
//!   ([`build_counterexample`], [`verify_counterexample`]).
//!
//! In the second one, `S = x1^2 + x2^2 + x3^2 + x4^2` and `H` is a sum of eight copies of
//! `g(z) = (2z - t(z))^2` weighted by `eps^i * beta^e` (`eps = 3 + 2 sqrt2`,
//! `beta = 2 + sqrt2`, `0 <= i <= 3`, `e in {0, 1}`).

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{delta_lower_bound, generalized_delta, unit_scale_down, AnalysisError, DeltaCertificate};
use crate::field::{FieldContext, FieldElement};
use crate::forms::{Atom, Definiteness, GeneralizedForm, QuadraticForm};
use crate::search::{
    represent_bounded, represent_definite, IndecomposableListing, RepresentationWitness,
    SearchError, SearchVerdict,
};

/// Height of the generic bounded search used to cross-check small targets.
pub const CROSS_CHECK_HEIGHT: u64 = 8;
/// Targets up to this trace are also re-derived by the bounded search.
pub const CROSS_CHECK_TRACE: u64 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PaperlabError {
    #[error("form is {0}, expected totally_positive_definite")]
    NotDefinite(Definiteness),
    #[error("form has non-integral coefficients")]
    NotIntegral,
    #[error("{0} is not eps^k or eps^k * beta for a totally positive unit eps")]
    NotIndecomposablePattern(FieldElement),
    #[error("witness for {beta} (scaled from {alpha}) has a nonzero proper coordinate")]
    ProperCoordinateNonzero {
        alpha: FieldElement,
        beta: FieldElement,
        witness: Vec<FieldElement>,
    },
    #[error("counterexample check failed at {alpha}: {reason}")]
    CounterexampleFailed { alpha: FieldElement, reason: String },
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl PaperlabError {
    /// Whether the error means a contract that must always hold was broken.
    pub fn is_contract_failure(&self) -> bool {
        matches!(
            self,
            PaperlabError::ProperCoordinateNonzero { .. } | PaperlabError::CounterexampleFailed { .. }
        )
    }
}

/// `(l(z), g(z)) = (2z - t(z), (2z - t(z))^2)`; for `z = a + b sqrt(D)`, `l(z) = a + 3b sqrt(D)`.
pub fn ell_and_g(z: &FieldElement) -> (FieldElement, FieldElement) {
    let ell = &(z + z) - &z.conj();
    let g = ell.square();
    (ell, g)
}

/// The integral `z` with `l(z) = t`; exists iff the `sqrt(D)` part of `t` is divisible by 3.
pub fn ell_preimage(t: &FieldElement) -> Option<FieldElement> {
    let z = FieldElement::new(t.d(), t.a().clone(), t.b() / crate::field::int(3));
    if z.is_integral() {
        Some(z)
    } else {
        None
    }
}

/// `c * (2z - t(z))^2` in variable `var` of an `r`-variable form.
pub fn weighted_g(d: i64, r: usize, var: usize, c: &FieldElement) -> GeneralizedForm {
    GeneralizedForm::new(d, r)
        .with_term(Atom::plain(var), Atom::plain(var), &c.scale(&crate::field::int(4)))
        .with_term(Atom::plain(var), Atom::conj(var), &c.scale(&crate::field::int(-4)))
        .with_term(Atom::conj(var), Atom::conj(var), c)
}

#[derive(Debug, Clone)]
pub struct CounterexampleBundle {
    pub ctx: FieldContext,
    pub s: QuadraticForm,
    pub h: GeneralizedForm,
    pub g: GeneralizedForm,
    pub epsilon: FieldElement,
    pub beta: FieldElement,
    /// Weight of `g(z_{i+1})` in `H`: `eps^(i mod 4) * beta^(i / 4)`.
    pub h_weights: Vec<FieldElement>,
}

pub fn build_counterexample() -> CounterexampleBundle {
    let ctx = FieldContext::new(2).expect("2 is squarefree");
    let d = ctx.d();
    let epsilon = ctx.fundamental_unit().square();
    let beta = ctx.from_ints(2, 1);
    let s = QuadraticForm::sum_of_squares(d, 4);
    let mut h_weights = Vec::with_capacity(8);
    for with_beta in [false, true] {
        for i in 0..4 {
            let w = epsilon.pow(i).expect("nonnegative power");
            h_weights.push(if with_beta { &w * &beta } else { w });
        }
    }
    let mut h = GeneralizedForm::new(d, 8);
    for (var, w) in h_weights.iter().enumerate() {
        for ((a1, a2), c) in weighted_g(d, 8, var, w).coeffs() {
            h.add_term(*a1, *a2, c);
        }
    }
    let g = s.to_generalized().direct_sum(&h);
    CounterexampleBundle {
        ctx,
        s,
        h,
        g,
        epsilon,
        beta,
        h_weights,
    }
}

/// `k` with `base^k = x`, for `x` a totally positive unit and `base > 1` a unit.
fn unit_exponent(base: &FieldElement, x: &FieldElement) -> Option<i64> {
    if !x.is_integral() || !x.norm().is_one() || !x.is_totally_positive() {
        return None;
    }
    let one = FieldElement::one(x.d());
    let inv = base.inverse().ok()?;
    let mut y = x.clone();
    let mut k = 0i64;
    while y.cmp_first(&one).is_gt() && k < MAX_UNIT_EXPONENT {
        y = &y * &inv;
        k += 1;
    }
    while y.cmp_first(&one).is_lt() && k > -MAX_UNIT_EXPONENT {
        y = &y * base;
        k -= 1;
    }
    (y == one).then_some(k)
}

const MAX_UNIT_EXPONENT: i64 = 10_000;

/// Slot of `H` and value for it representing `eta = eps^k` or `eps^k * beta`: with
/// `k = 4q + s`, slot `s` (or `4 + s`) takes the `l`-preimage of `eps^(2q)`.
pub fn h_slot(bundle: &CounterexampleBundle, eta: &FieldElement) -> Result<(usize, FieldElement), PaperlabError> {
    let pattern = || PaperlabError::NotIndecomposablePattern(eta.clone());
    let (base, k) = if let Some(k) = unit_exponent(&bundle.epsilon, eta) {
        (0, k)
    } else {
        let unit = eta.checked_div(&bundle.beta).map_err(|_| pattern())?;
        (4, unit_exponent(&bundle.epsilon, &unit).ok_or_else(pattern)?)
    };
    let (q, s) = k.div_mod_floor(&4);
    let target = bundle.epsilon.pow(2 * q).expect("units are invertible");
    let z = ell_preimage(&target).ok_or_else(pattern)?;
    Ok((base + s as usize, z))
}

/// Constructive representation of an indecomposable by `H`.
pub fn represent_by_h(bundle: &CounterexampleBundle, eta: &FieldElement) -> Result<RepresentationWitness, PaperlabError> {
    let (slot, z) = h_slot(bundle, eta)?;
    let mut assignment = vec![bundle.ctx.zero(); 8];
    assignment[slot] = z;
    let value = bundle.h.evaluate(&assignment).expect("eight variables");
    if &value != eta {
        return Err(PaperlabError::CounterexampleFailed {
            alpha: eta.clone(),
            reason: format!("H-slot {} evaluates to {value}", slot + 1),
        });
    }
    Ok(RepresentationWitness { assignment, value })
}

/// Coordinates of an integral element of `Z[sqrt(d)]` reduced mod `m`, via exact powers.
pub fn residue_mod(x: &FieldElement, m: i64) -> Option<(i64, i64)> {
    let (p, q) = x.integral_coords()?;
    let m = BigInt::from(m);
    Some((
        p.mod_floor(&m).to_i64().expect("residue fits"),
        q.mod_floor(&m).to_i64().expect("residue fits"),
    ))
}

/// `(a + b sqrt(d))^e` computed directly in `Z[sqrt(d)] / m`.
pub fn pow_mod(a: i64, b: i64, d: i64, e: u64, m: i64) -> (i64, i64) {
    let mul = |x: (i64, i64), y: (i64, i64)| {
        (
            (x.0 * y.0 + d * x.1 * y.1).rem_euclid(m),
            (x.0 * y.1 + x.1 * y.0).rem_euclid(m),
        )
    };
    let mut acc = (1 % m, 0);
    let mut sq = (a.rem_euclid(m), b.rem_euclid(m));
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(acc, sq);
        }
        sq = mul(sq, sq);
        e >>= 1;
    }
    acc
}

/// How one target was represented by `G`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CounterexampleTarget {
    pub alpha: FieldElement,
    /// The odd indecomposable handed to `H`, if the irrational part of `alpha` is odd.
    pub eta: Option<FieldElement>,
    pub witness: Vec<FieldElement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubformCheck {
    /// 0-based variables of `S` kept.
    pub kept: Vec<usize>,
    pub target: FieldElement,
    pub verdict: SearchVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CounterexampleReport {
    pub trace_bound: u64,
    pub classify_g: Definiteness,
    pub classify_s: Definiteness,
    pub proper_variables: Vec<usize>,
    pub targets: Vec<CounterexampleTarget>,
    /// Small targets also run through the generic bounded search, and how many it hit.
    pub cross_checked: usize,
    pub cross_found: usize,
    pub subform_target: FieldElement,
    pub subform_checks: Vec<SubformCheck>,
}

impl CounterexampleReport {
    pub fn via_h(&self) -> usize {
        self.targets.iter().filter(|t| t.eta.is_some()).count()
    }
}

fn fail(alpha: &FieldElement, reason: impl Into<String>) -> PaperlabError {
    PaperlabError::CounterexampleFailed {
        alpha: alpha.clone(),
        reason: reason.into(),
    }
}

fn is_even_irrational(x: &FieldElement) -> bool {
    x.b().to_integer().is_even()
}

/// Walks the constructive argument for every totally positive `alpha` with
/// `Tr(alpha) <= trace_bound` and checks that no nonempty subform of `S` represents
/// `3 + sqrt2`.
pub fn verify_counterexample(trace_bound: u64) -> Result<CounterexampleReport, PaperlabError> {
    let bundle = build_counterexample();
    let ctx = &bundle.ctx;
    let d = ctx.d();
    let classify_g = bundle.g.classify();
    let classify_s = bundle.s.classify();
    if classify_g != Definiteness::TotallyPositiveSemidefiniteOnly {
        return Err(fail(&ctx.zero(), format!("G classified as {classify_g}")));
    }
    if classify_s != Definiteness::TotallyPositiveDefinite {
        return Err(fail(&ctx.zero(), format!("S classified as {classify_s}")));
    }
    let proper: Vec<usize> = bundle.g.proper_variables().into_iter().collect();
    if proper != (4..12).collect::<Vec<_>>() {
        return Err(fail(&ctx.zero(), "H variables are not all proper"));
    }

    let s_form = bundle.s.to_generalized();
    let s_cert = delta_lower_bound(&bundle.s)?;
    let indecomposables = crate::search::indecomposables_up_to(ctx, trace_bound);
    let listing = ctx.enumerate_totally_positive(trace_bound);

    let by_s = |x: &FieldElement| -> Result<Vec<FieldElement>, PaperlabError> {
        if x.is_zero() {
            return Ok(vec![ctx.zero(); 4]);
        }
        match represent_definite(&s_form, x, &s_cert)? {
            SearchVerdict::Found { witness } => Ok(witness.assignment),
            other => Err(fail(x, format!("S does not represent it: {other:?}"))),
        }
    };

    let process = |alpha: &FieldElement| -> Result<CounterexampleTarget, PaperlabError> {
        let (eta, s_part, h_part) = if is_even_irrational(alpha) {
            (None, by_s(alpha)?, vec![ctx.zero(); 8])
        } else {
            let parts = decompose_with(&indecomposables, alpha)?;
            let eta = parts
                .into_iter()
                .find(|p| !is_even_irrational(p))
                .ok_or_else(|| fail(alpha, "no indecomposable part with odd irrational part"))?;
            let rest = alpha - &eta;
            if !rest.is_totally_nonnegative() || !is_even_irrational(&rest) {
                return Err(fail(alpha, format!("remainder {rest} is not an even nonnegative")));
            }
            let h_witness = represent_by_h(&bundle, &eta)?;
            (Some(eta), by_s(&rest)?, h_witness.assignment)
        };
        let witness: Vec<FieldElement> = s_part.into_iter().chain(h_part).collect();
        let value = bundle.g.evaluate(&witness).expect("twelve variables");
        if &value != alpha {
            return Err(fail(alpha, format!("G evaluates to {value}")));
        }
        Ok(CounterexampleTarget {
            alpha: alpha.clone(),
            eta,
            witness,
        })
    };
    let targets: Vec<CounterexampleTarget> = listing
        .elements
        .par_iter()
        .map(process)
        .collect::<Result<_, _>>()?;

    let small: Vec<&FieldElement> = listing
        .elements
        .iter()
        .filter(|a| a.trace() <= crate::field::int(CROSS_CHECK_TRACE as i64))
        .collect();
    // A bounded search never proves absence, so only its hits are counted; each hit has
    // already been re-evaluated against its target.
    let cross_found = small
        .par_iter()
        .map(|alpha| represent_bounded(&bundle.g, alpha, CROSS_CHECK_HEIGHT).map(|v| v.is_found()))
        .collect::<Result<Vec<bool>, SearchError>>()?
        .into_iter()
        .filter(|&hit| hit)
        .count();

    let subform_target = ctx.from_ints(3, 1);
    let mut subform_checks = Vec::with_capacity(15);
    for mask in 1u32..16 {
        let keep: BTreeSet<usize> = (0..4).filter(|i| mask >> i & 1 == 1).collect();
        let sub = bundle.g.subform(&keep).expect("indices below 12");
        if !sub.form.is_quadratic() {
            return Err(fail(&subform_target, "subform of S has a proper variable"));
        }
        let q = sub.form.associated_form().q;
        let cert = delta_lower_bound(&q)?;
        let verdict = represent_definite(&sub.form, &subform_target, &cert)?;
        if verdict.is_found() {
            return Err(fail(&subform_target, format!("subform on {keep:?} represents it")));
        }
        subform_checks.push(SubformCheck {
            kept: sub.kept,
            target: subform_target.clone(),
            verdict,
        });
    }
    debug_assert_eq!(d, 2);

    Ok(CounterexampleReport {
        trace_bound,
        classify_g,
        classify_s,
        proper_variables: proper,
        targets,
        cross_checked: small.len(),
        cross_found,
        subform_target,
        subform_checks,
    })
}

fn decompose_with(listing: &IndecomposableListing, alpha: &FieldElement) -> Result<Vec<FieldElement>, PaperlabError> {
    listing
        .decompose(alpha)
        .ok_or_else(|| fail(alpha, "decomposition ran past the indecomposable listing"))
}

/// Per-target record of the subform extraction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TargetCertificate {
    pub alpha: FieldElement,
    pub epsilon: FieldElement,
    pub n: u32,
    pub beta: FieldElement,
    /// Witness of `G(z) = beta`; zero at every proper variable.
    pub beta_witness: Vec<FieldElement>,
    /// Witness of `alpha` in the extracted subform's variables.
    pub alpha_witness: Vec<FieldElement>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremOutcome {
    /// The quadratic subform on the non-proper variables, as a quadratic form in its
    /// appearing atoms.
    pub subform: QuadraticForm,
    pub subform_generalized: GeneralizedForm,
    /// 0-based variables of the input kept in the subform.
    pub kept: Vec<usize>,
    pub delta: DeltaCertificate,
    pub verified_to: u64,
    pub per_target: Vec<TargetCertificate>,
    /// Targets whose scaled version the input form does not represent.
    pub unrepresented: Vec<FieldElement>,
}

impl TheoremOutcome {
    pub fn all_certified(&self) -> bool {
        self.unrepresented.is_empty()
    }
}

/// For each totally positive `alpha` up to the trace bound: scale to `beta = eps^2 alpha`
/// below `delta`, represent `beta` by `g`, confirm the proper coordinates vanish, and
/// divide by `eps` to represent `alpha` by the quadratic subform.
pub fn theorem_pipeline(
    ctx: &FieldContext,
    g: &GeneralizedForm,
    trace_bound: u64,
) -> Result<TheoremOutcome, PaperlabError> {
    if !g.is_integral() {
        return Err(PaperlabError::NotIntegral);
    }
    let class = g.classify();
    if class != Definiteness::TotallyPositiveDefinite {
        return Err(PaperlabError::NotDefinite(class));
    }
    let cert = generalized_delta(g)?;
    let proper = g.proper_variables();
    let keep: BTreeSet<usize> = (0..g.r()).filter(|v| !proper.contains(v)).collect();
    let sub = g.subform(&keep).expect("kept variables are in range");
    let subform = sub.form.associated_form().q;

    let listing = ctx.enumerate_totally_positive(trace_bound);
    let process = |alpha: &FieldElement| -> Result<Option<TargetCertificate>, PaperlabError> {
        let scaled = unit_scale_down(ctx, alpha, &cert.delta)?;
        let verdict = represent_definite(g, &scaled.beta, &cert)?;
        let Some(w) = verdict.witness() else {
            return Ok(None);
        };
        if proper.iter().any(|&v| !w.assignment[v].is_zero()) {
            return Err(PaperlabError::ProperCoordinateNonzero {
                alpha: alpha.clone(),
                beta: scaled.beta.clone(),
                witness: w.assignment.clone(),
            });
        }
        let inv = scaled.epsilon.inverse().expect("units are invertible");
        let alpha_witness: Vec<FieldElement> = sub.kept.iter().map(|&v| &w.assignment[v] * &inv).collect();
        let value = sub.form.evaluate(&alpha_witness).expect("subform arity");
        let quad_value = subform
            .evaluate(&sub.form.associated_form().expand(&alpha_witness))
            .expect("associated arity");
        if &value != alpha || &quad_value != alpha || !alpha_witness.iter().all(FieldElement::is_integral) {
            return Err(PaperlabError::CounterexampleFailed {
                alpha: alpha.clone(),
                reason: format!("recovered witness evaluates to {value}"),
            });
        }
        Ok(Some(TargetCertificate {
            alpha: alpha.clone(),
            epsilon: scaled.epsilon,
            n: scaled.n,
            beta: scaled.beta,
            beta_witness: w.assignment.clone(),
            alpha_witness,
        }))
    };
    let results: Vec<Option<TargetCertificate>> = listing
        .elements
        .par_iter()
        .map(process)
        .collect::<Result<_, _>>()?;
    let mut per_target = Vec::new();
    let mut unrepresented = Vec::new();
    for (alpha, r) in listing.elements.iter().zip(results) {
        match r {
            Some(c) => per_target.push(c),
            None => unrepresented.push(alpha.clone()),
        }
    }
    Ok(TheoremOutcome {
        subform,
        subform_generalized: sub.form,
        kept: sub.kept,
        delta: cert,
        verified_to: trace_bound,
        per_target,
        unrepresented,
    })
}
