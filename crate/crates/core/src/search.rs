//! Representation search, trace-bounded universality checks and indecomposables.
//!
//! Searches walk the variables in order and enumerate each variable's integral-basis
//! coordinates `(p, q)` in descending lexicographic order, so the witness returned is
//! the lexicographically greatest solution (reading `p` before `q`, variable by
//! variable). The form is written as a sum of squares `pivot_k * w_k^2` in which the
//! square of column `k` only involves columns `0..=k`; after each variable is fixed the
//! squares completed so far must stay below the target in both embeddings, which both
//! prunes the walk and bounds every variable.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::DeltaCertificate;
use crate::field::{rational_to_f64, BasisKind, FieldContext, FieldElement};
use crate::forms::{AssociatedForm, Atom, Definiteness, Flag, GeneralizedForm};
use crate::matrix::{self, SquareTerm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("form is {0}; this search needs a totally positive definite form")]
    NotDefinite(Definiteness),
    #[error("form is not totally positive semidefinite")]
    NotSemidefinite,
    #[error("form has non-integral coefficients")]
    NotIntegral,
    #[error("target {0} is not a totally positive integer")]
    BadTarget(FieldElement),
    #[error("certificate does not certify this form")]
    CertificateMismatch,
    #[error("a variable has no finite search range")]
    Unbounded,
}

/// An assignment in the ring of integers and the value the form takes there.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepresentationWitness {
    pub assignment: Vec<FieldElement>,
    pub value: FieldElement,
}

/// Inclusive integral-basis coordinate ranges enumerated for one variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoordinateBox {
    pub p: (i64, i64),
    pub q: (i64, i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum SearchVerdict {
    Found { witness: RepresentationWitness },
    /// The search region contained every solution; there is none.
    NoneComplete { search_box: Vec<CoordinateBox> },
    NoneWithinHeight { height: u64 },
}

impl SearchVerdict {
    pub fn witness(&self) -> Option<&RepresentationWitness> {
        match self {
            SearchVerdict::Found { witness } => Some(witness),
            _ => None,
        }
    }

    pub fn is_found(&self) -> bool {
        self.witness().is_some()
    }
}

/// Rectangle in `(sigma_1(z), sigma_2(z))`.
#[derive(Debug, Clone, Copy)]
struct EmbeddingBox {
    lo: [f64; 2],
    hi: [f64; 2],
}

impl EmbeddingBox {
    fn around(center: [f64; 2], radius: [f64; 2]) -> Self {
        EmbeddingBox {
            lo: [center[0] - radius[0], center[1] - radius[1]],
            hi: [center[0] + radius[0], center[1] + radius[1]],
        }
    }

    fn intersect(self, other: EmbeddingBox) -> Self {
        EmbeddingBox {
            lo: [self.lo[0].max(other.lo[0]), self.lo[1].max(other.lo[1])],
            hi: [self.hi[0].min(other.hi[0]), self.hi[1].min(other.hi[1])],
        }
    }
}

fn widen_down(x: f64) -> i64 {
    (x - 1e-9 * (1.0 + x.abs())).floor() as i64 - 1
}

fn widen_up(x: f64) -> i64 {
    (x + 1e-9 * (1.0 + x.abs())).ceil() as i64 + 1
}

/// Embeddings of the second integral basis vector.
fn basis_embeddings(d: i64) -> [f64; 2] {
    let s = (d as f64).sqrt();
    match BasisKind::for_discriminant(d) {
        BasisKind::Sqrt => [s, -s],
        BasisKind::Half => [(1.0 + s) / 2.0, (1.0 - s) / 2.0],
    }
}

/// Integer points `p + q w` whose embeddings may lie in `b` (a superset; callers filter
/// exactly), optionally clipped to `|p|, |q| <= height`.
fn lattice_candidates(d: i64, b: &EmbeddingBox, height: Option<i64>) -> Vec<(i64, i64)> {
    if b.lo[0] > b.hi[0] || b.lo[1] > b.hi[1] {
        return Vec::new();
    }
    let w = basis_embeddings(d);
    let gap = w[0] - w[1];
    let mut qlo = widen_down((b.lo[0] - b.hi[1]) / gap);
    let mut qhi = widen_up((b.hi[0] - b.lo[1]) / gap);
    if let Some(h) = height {
        qlo = qlo.max(-h);
        qhi = qhi.min(h);
    }
    let mut out = Vec::new();
    for q in (qlo..=qhi).rev() {
        let qf = q as f64;
        let mut plo = widen_down((b.lo[0] - qf * w[0]).max(b.lo[1] - qf * w[1]));
        let mut phi = widen_up((b.hi[0] - qf * w[0]).min(b.hi[1] - qf * w[1]));
        if let Some(h) = height {
            plo = plo.max(-h);
            phi = phi.min(h);
        }
        for p in plo..=phi {
            out.push((p, q));
        }
    }
    out.sort_unstable_by(|x, y| y.cmp(x));
    out
}

fn bounding_box(d: i64, b: &EmbeddingBox) -> CoordinateBox {
    let pts = lattice_candidates(d, b, None);
    let pmin = pts.iter().map(|x| x.0).min().unwrap_or(0);
    let pmax = pts.iter().map(|x| x.0).max().unwrap_or(0);
    let qmin = pts.iter().map(|x| x.1).min().unwrap_or(0);
    let qmax = pts.iter().map(|x| x.1).max().unwrap_or(0);
    CoordinateBox {
        p: (pmin, pmax),
        q: (qmin, qmax),
    }
}

/// `|sigma_e(w)| <= rho_e` for `w = A z + B t(z) + s` gives a parallelogram in
/// `(sigma_1 z, sigma_2 z)`; returns its bounding rectangle, or `None` when the linear
/// part is singular.
fn affine_box(
    a: &FieldElement,
    b: &FieldElement,
    s: &FieldElement,
    rho: [f64; 2],
) -> Option<EmbeddingBox> {
    // sigma_1(w) = s1(A) u1 + s1(B) u2 + s1(s); sigma_2(w) = s2(B) u1 + s2(A) u2 + s2(s)
    let det_exact = a.norm() - b.norm();
    if det_exact.is_zero() {
        return None;
    }
    let m = [
        [a.to_f64_first(), b.to_f64_first()],
        [b.to_f64_second(), a.to_f64_second()],
    ];
    let det = rational_to_f64(&det_exact);
    let inv = [
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ];
    let sv = [s.to_f64_first(), s.to_f64_second()];
    let center = [
        -(inv[0][0] * sv[0] + inv[0][1] * sv[1]),
        -(inv[1][0] * sv[0] + inv[1][1] * sv[1]),
    ];
    let radius = [
        inv[0][0].abs() * rho[0] + inv[0][1].abs() * rho[1],
        inv[1][0].abs() * rho[0] + inv[1][1].abs() * rho[1],
    ];
    Some(EmbeddingBox::around(center, radius))
}

fn sqrt_ratio(num: f64, den: f64) -> f64 {
    (num.max(0.0) / den).sqrt()
}

struct Searcher<'a> {
    form: &'a GeneralizedForm,
    d: i64,
    columns: Vec<Atom>,
    /// Columns belonging to each variable (consecutive, plain before conj).
    var_columns: Vec<Vec<usize>>,
    terms: Vec<Option<SquareTerm>>,
    target: FieldElement,
    height: Option<i64>,
    /// Fixed per-variable region, intersected with the residual bounds.
    static_boxes: Vec<Option<EmbeddingBox>>,
}

impl<'a> Searcher<'a> {
    fn new(
        form: &'a GeneralizedForm,
        assoc: &AssociatedForm,
        terms: Vec<Option<SquareTerm>>,
        target: &FieldElement,
        height: Option<i64>,
    ) -> Self {
        let mut var_columns = vec![Vec::new(); form.r()];
        for (c, atom) in assoc.columns.iter().enumerate() {
            var_columns[atom.var].push(c);
        }
        Searcher {
            form,
            d: form.d(),
            columns: assoc.columns.clone(),
            var_columns,
            terms,
            target: target.clone(),
            height,
            static_boxes: vec![None; form.r()],
        }
    }

    fn run(&self) -> Result<Option<Vec<FieldElement>>, SearchError> {
        let mut z = vec![FieldElement::zero(self.d); self.form.r()];
        let mut x = vec![FieldElement::zero(self.d); self.columns.len()];
        let partial = FieldElement::zero(self.d);
        if self.descend(0, &mut z, &mut x, &partial)? {
            Ok(Some(z))
        } else {
            Ok(None)
        }
    }

    fn descend(
        &self,
        var: usize,
        z: &mut Vec<FieldElement>,
        x: &mut Vec<FieldElement>,
        partial: &FieldElement,
    ) -> Result<bool, SearchError> {
        if var == z.len() {
            return Ok(partial == &self.target);
        }
        let cols = &self.var_columns[var];
        if cols.is_empty() {
            z[var] = FieldElement::zero(self.d);
            return self.descend(var + 1, z, x, partial);
        }
        let residual = &self.target - partial;
        let first_col = cols[0];

        // Per square of this variable: pivot, z-coefficient, t(z)-coefficient, fixed part.
        let mut pieces = Vec::new();
        let mut region: Option<EmbeddingBox> = self.static_boxes[var];
        for &k in cols {
            let Some(term) = &self.terms[k] else { continue };
            let mut a = FieldElement::zero(self.d);
            let mut b = FieldElement::zero(self.d);
            let one = FieldElement::one(self.d);
            for &l in cols.iter().filter(|&&l| l <= k) {
                let coeff = if l == k { &one } else { &term.coeffs[l] };
                match self.columns[l].flag {
                    Flag::Plain => a += coeff,
                    Flag::Conj => b += coeff,
                }
            }
            let mut s = FieldElement::zero(self.d);
            for l in 0..first_col {
                if !term.coeffs[l].is_zero() && !x[l].is_zero() {
                    s += &(&term.coeffs[l] * &x[l]);
                }
            }
            let rho = [
                sqrt_ratio(residual.to_f64_first(), term.pivot.to_f64_first()),
                sqrt_ratio(residual.to_f64_second(), term.pivot.to_f64_second()),
            ];
            if let Some(bx) = affine_box(&a, &b, &s, rho) {
                region = Some(region.map_or(bx, |r| r.intersect(bx)));
            }
            pieces.push((term.pivot.clone(), a, b, s));
        }
        if region.is_none() && self.height.is_none() {
            return Err(SearchError::Unbounded);
        }
        let region = region.unwrap_or(EmbeddingBox {
            lo: [f64::NEG_INFINITY; 2],
            hi: [f64::INFINITY; 2],
        });
        let finite = region.lo.iter().chain(&region.hi).all(|v| v.is_finite());
        let candidates = if finite {
            lattice_candidates(self.d, &region, self.height)
        } else {
            let h = self.height.expect("checked above");
            let mut all: Vec<(i64, i64)> =
                (-h..=h).flat_map(|p| (-h..=h).map(move |q| (p, q))).collect();
            all.sort_unstable_by(|u, v| v.cmp(u));
            all
        };

        for (p, q) in candidates {
            let value = FieldElement::from_integral_coords(self.d, &BigInt::from(p), &BigInt::from(q));
            let conj = value.conj();
            let mut next = partial.clone();
            for (pivot, a, b, s) in &pieces {
                let w = &(&(a * &value) + &(b * &conj)) + s;
                next += &(pivot * &w.square());
            }
            if !next.totally_le(&self.target) {
                continue;
            }
            for &c in cols {
                x[c] = match self.columns[c].flag {
                    Flag::Plain => value.clone(),
                    Flag::Conj => conj.clone(),
                };
            }
            z[var] = value;
            if self.descend(var + 1, z, x, &next)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

fn check_target(alpha: &FieldElement) -> Result<(), SearchError> {
    if alpha.is_integral() && alpha.is_totally_positive() {
        Ok(())
    } else {
        Err(SearchError::BadTarget(alpha.clone()))
    }
}

fn found(form: &GeneralizedForm, z: Vec<FieldElement>, alpha: &FieldElement) -> SearchVerdict {
    let value = form.evaluate(&z).expect("assignment has the form's arity");
    assert_eq!(&value, alpha, "search produced an unsound witness");
    SearchVerdict::Found {
        witness: RepresentationWitness {
            assignment: z,
            value,
        },
    }
}

/// Complete decision for a totally positive definite integral form. Every coordinate of
/// a solution satisfies `delta * x^2 <= alpha` in both embeddings, so the search region
/// is finite; the reported box is that region in integral-basis coordinates.
pub fn represent_definite(
    form: &GeneralizedForm,
    alpha: &FieldElement,
    cert: &DeltaCertificate,
) -> Result<SearchVerdict, SearchError> {
    if !form.is_integral() {
        return Err(SearchError::NotIntegral);
    }
    check_target(alpha)?;
    let assoc = form.associated_form();
    let class = assoc.q.classify();
    if class != Definiteness::TotallyPositiveDefinite {
        return Err(SearchError::NotDefinite(class));
    }
    if cert.form != assoc.q || !cert.verify() {
        return Err(SearchError::CertificateMismatch);
    }
    let terms = matrix::square_completion(&assoc.q.gram()).ok_or(SearchError::NotSemidefinite)?;
    let mut searcher = Searcher::new(form, &assoc, terms, alpha, None);

    let delta = rational_to_f64(&cert.delta);
    let rho = [
        sqrt_ratio(alpha.to_f64_first(), delta),
        sqrt_ratio(alpha.to_f64_second(), delta),
    ];
    let mut report = Vec::with_capacity(form.r());
    for var in 0..form.r() {
        let mut region: Option<EmbeddingBox> = None;
        for &c in &searcher.var_columns[var] {
            // a conjugated column bounds t(z), i.e. swaps the embeddings of z
            let r = match searcher.columns[c].flag {
                Flag::Plain => rho,
                Flag::Conj => [rho[1], rho[0]],
            };
            let bx = EmbeddingBox::around([0.0, 0.0], r);
            region = Some(region.map_or(bx, |g| g.intersect(bx)));
        }
        report.push(match region {
            Some(r) => bounding_box(form.d(), &r),
            None => CoordinateBox { p: (0, 0), q: (0, 0) },
        });
        searcher.static_boxes[var] = region;
    }

    Ok(match searcher.run()? {
        Some(z) => found(form, z, alpha),
        None => SearchVerdict::NoneComplete { search_box: report },
    })
}

/// Exhaustive search over integral-basis coordinates with absolute value at most
/// `height`. Never claims completeness.
pub fn represent_bounded(
    form: &GeneralizedForm,
    alpha: &FieldElement,
    height: u64,
) -> Result<SearchVerdict, SearchError> {
    if !form.is_integral() {
        return Err(SearchError::NotIntegral);
    }
    check_target(alpha)?;
    let assoc = form.associated_form();
    let terms = matrix::square_completion(&assoc.q.gram()).ok_or(SearchError::NotSemidefinite)?;
    let h = i64::try_from(height).unwrap_or(i64::MAX / 4);
    let searcher = Searcher::new(form, &assoc, terms, alpha, Some(h));
    Ok(match searcher.run()? {
        Some(z) => found(form, z, alpha),
        None => SearchVerdict::NoneWithinHeight { height },
    })
}

/// How each target of a universality check is decided.
pub enum Strategy<'a> {
    Definite(&'a DeltaCertificate),
    Bounded(u64),
    Custom(&'a (dyn Fn(&FieldElement) -> Result<SearchVerdict, SearchError> + Sync)),
}

/// Outcome of checking every totally positive integer up to a trace bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UniversalityReport {
    pub trace_bound: u64,
    pub checked: usize,
    pub failures: Vec<(FieldElement, SearchVerdict)>,
}

impl UniversalityReport {
    pub fn is_universal_up_to_bound(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn universality_report(
    ctx: &FieldContext,
    form: &GeneralizedForm,
    trace_bound: u64,
    strategy: Strategy<'_>,
) -> Result<UniversalityReport, SearchError> {
    if !form.is_integral() {
        return Err(SearchError::NotIntegral);
    }
    if !form.classify().is_semidefinite() {
        return Err(SearchError::NotSemidefinite);
    }
    let targets = ctx.enumerate_totally_positive(trace_bound).elements;
    let decide = |alpha: &FieldElement| match &strategy {
        Strategy::Definite(cert) => represent_definite(form, alpha, cert),
        Strategy::Bounded(h) => represent_bounded(form, alpha, *h),
        Strategy::Custom(f) => f(alpha),
    };
    let verdicts: Vec<Result<SearchVerdict, SearchError>> =
        targets.par_iter().map(decide).collect();
    let mut failures = Vec::new();
    for (alpha, verdict) in targets.iter().zip(verdicts) {
        let verdict = verdict?;
        if !verdict.is_found() {
            failures.push((alpha.clone(), verdict));
        }
    }
    Ok(UniversalityReport {
        trace_bound,
        checked: targets.len(),
        failures,
    })
}

/// Indecomposable totally positive integers up to a trace bound, sorted by `(trace, b)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndecomposableListing {
    pub trace_bound: u64,
    pub elements: Vec<FieldElement>,
}

/// An element is decomposable iff it exceeds some indecomposable of smaller trace, since
/// any summand of a split contains an indecomposable below it.
pub fn indecomposables_up_to(ctx: &FieldContext, trace_bound: u64) -> IndecomposableListing {
    let listing = ctx.enumerate_totally_positive(trace_bound);
    let mut elements: Vec<FieldElement> = Vec::new();
    for alpha in listing.elements {
        let tr = alpha.trace();
        let split = elements
            .iter()
            .take_while(|eta| eta.trace() < tr)
            .any(|eta| (&alpha - eta).is_totally_positive());
        if !split {
            elements.push(alpha);
        }
    }
    IndecomposableListing {
        trace_bound,
        elements,
    }
}

impl IndecomposableListing {
    /// Greedy split of `alpha` into indecomposables from this listing: repeatedly take
    /// the largest-trace `eta` (ties: larger `b`) leaving a totally nonnegative remainder.
    /// `None` when the listing's trace bound is below `Tr(alpha)`.
    pub fn decompose(&self, alpha: &FieldElement) -> Option<Vec<FieldElement>> {
        let mut rest = alpha.clone();
        let mut parts = Vec::new();
        while !rest.is_zero() {
            let eta = self
                .elements
                .iter()
                .filter(|eta| (&rest - *eta).is_totally_nonnegative())
                .max_by(|x, y| match x.trace().cmp(&y.trace()) {
                    Ordering::Equal => x.b().cmp(y.b()),
                    o => o,
                })?;
            rest -= eta;
            parts.push(eta.clone());
        }
        Some(parts)
    }
}

/// Writes a totally positive integer as a sum of indecomposables.
pub fn decompose(ctx: &FieldContext, alpha: &FieldElement) -> Result<Vec<FieldElement>, SearchError> {
    check_target(alpha)?;
    let tr = alpha.trace().to_integer().to_u64().expect("trace of a totally positive integer");
    let listing = indecomposables_up_to(ctx, tr);
    let parts = listing
        .decompose(alpha)
        .expect("every totally positive integer splits into indecomposables of no larger trace");
    let mut sum = FieldElement::zero(ctx.d());
    for p in &parts {
        sum += p;
    }
    assert_eq!(&sum, alpha, "decomposition does not re-sum to its input");
    Ok(parts)
}
