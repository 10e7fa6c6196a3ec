//! Quadratic and generalized quadratic forms.
//!
//! A generalized form in `r` variables is a quadratic form in the `2r` atoms
//! `z_i, t(z_i)`, where `t` is the Galois conjugation. Only nonzero coefficients are
//! stored, so whether an atom "appears" is a syntactic question on the coefficient map.
//! Variables are 0-based in the API; text output numbers them from 1.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed};
use serde::ser::SerializeTuple;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::field::{rat, FieldElement, Rational};
use crate::matrix::{self, Matrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("expected {expected} values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("variable index {index} out of range for {count} variables")]
    VariableOutOfRange { index: usize, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flag {
    Plain,
    Conj,
}

/// `z_var` or `t(z_var)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub var: usize,
    pub flag: Flag,
}

impl Atom {
    pub fn plain(var: usize) -> Atom {
        Atom {
            var,
            flag: Flag::Plain,
        }
    }

    pub fn conj(var: usize) -> Atom {
        Atom {
            var,
            flag: Flag::Conj,
        }
    }

    pub fn value(&self, z: &[FieldElement]) -> FieldElement {
        match self.flag {
            Flag::Plain => z[self.var].clone(),
            Flag::Conj => z[self.var].conj(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.flag {
            Flag::Plain => write!(f, "z{}", self.var + 1),
            Flag::Conj => write!(f, "t(z{})", self.var + 1),
        }
    }
}

impl Serialize for Atom {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    TotallyPositiveDefinite,
    TotallyPositiveSemidefiniteOnly,
    NotSemidefinite,
}

impl Definiteness {
    pub fn is_semidefinite(self) -> bool {
        self != Definiteness::NotSemidefinite
    }
}

impl fmt::Display for Definiteness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Definiteness::TotallyPositiveDefinite => "totally_positive_definite",
            Definiteness::TotallyPositiveSemidefiniteOnly => "totally_positive_semidefinite_only",
            Definiteness::NotSemidefinite => "not_semidefinite",
        })
    }
}

/// Definiteness of a symmetric Gram matrix under both real embeddings.
pub fn classify_gram(gram: &Matrix) -> Definiteness {
    if matrix::is_totally_positive_definite(gram) {
        Definiteness::TotallyPositiveDefinite
    } else if matrix::is_totally_positive_semidefinite(gram) {
        Definiteness::TotallyPositiveSemidefiniteOnly
    } else {
        Definiteness::NotSemidefinite
    }
}

fn half() -> Rational {
    rat(1, 2)
}

/// `sum_{i <= j} a_ij x_i x_j` over `Q(sqrt(D))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticForm {
    d: i64,
    n: usize,
    coeffs: BTreeMap<(usize, usize), FieldElement>,
}

impl QuadraticForm {
    pub fn new(d: i64, n: usize) -> Self {
        QuadraticForm {
            d,
            n,
            coeffs: BTreeMap::new(),
        }
    }

    /// `x_1^2 + ... + x_n^2`.
    pub fn sum_of_squares(d: i64, n: usize) -> Self {
        let mut q = QuadraticForm::new(d, n);
        for i in 0..n {
            q.add_term(i, i, &FieldElement::one(d));
        }
        q
    }

    /// Adds `c * x_i * x_j` (indices in either order).
    pub fn add_term(&mut self, i: usize, j: usize, c: &FieldElement) {
        assert!(i < self.n && j < self.n, "variable index out of range");
        let key = (i.min(j), i.max(j));
        let entry = self
            .coeffs
            .entry(key)
            .or_insert_with(|| FieldElement::zero(self.d));
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&key);
        }
    }

    pub fn with_term(mut self, i: usize, j: usize, c: &FieldElement) -> Self {
        self.add_term(i, j, c);
        self
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &BTreeMap<(usize, usize), FieldElement> {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize, j: usize) -> FieldElement {
        self.coeffs
            .get(&(i.min(j), i.max(j)))
            .cloned()
            .unwrap_or_else(|| FieldElement::zero(self.d))
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.values().all(FieldElement::is_integral)
    }

    pub fn evaluate(&self, x: &[FieldElement]) -> Result<FieldElement, FormError> {
        if x.len() != self.n {
            return Err(FormError::Arity {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut acc = FieldElement::zero(self.d);
        for (&(i, j), c) in &self.coeffs {
            acc += &(c * &(&x[i] * &x[j]));
        }
        Ok(acc)
    }

    /// Symmetric Gram matrix: `a_ii` on the diagonal, `a_ij / 2` off it.
    pub fn gram(&self) -> Matrix {
        let mut g = vec![vec![FieldElement::zero(self.d); self.n]; self.n];
        for (&(i, j), c) in &self.coeffs {
            if i == j {
                g[i][i] = c.clone();
            } else {
                let h = c.scale(&half());
                g[i][j] = h.clone();
                g[j][i] = h;
            }
        }
        g
    }

    pub fn classify(&self) -> Definiteness {
        classify_gram(&self.gram())
    }

    pub fn scale(&self, c: &FieldElement) -> QuadraticForm {
        let mut out = QuadraticForm::new(self.d, self.n);
        for (&(i, j), a) in &self.coeffs {
            out.add_term(i, j, &(a * c));
        }
        out
    }

    /// `Q - delta * (x_1^2 + ... + x_n^2)`.
    pub fn minus_scaled_identity(&self, delta: &Rational) -> QuadraticForm {
        let mut out = self.clone();
        let minus = FieldElement::from_rational(self.d, -delta);
        for i in 0..self.n {
            out.add_term(i, i, &minus);
        }
        out
    }

    /// The same polynomial read as a generalized form with only plain atoms.
    pub fn to_generalized(&self) -> GeneralizedForm {
        let mut g = GeneralizedForm::new(self.d, self.n);
        for (&(i, j), c) in &self.coeffs {
            g.add_term(Atom::plain(i), Atom::plain(j), c);
        }
        g
    }
}

impl From<&QuadraticForm> for GeneralizedForm {
    fn from(q: &QuadraticForm) -> Self {
        q.to_generalized()
    }
}

/// `G(z_1..z_r) = G0(z_1, t(z_1), ..., z_r, t(z_r))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralizedForm {
    d: i64,
    r: usize,
    coeffs: BTreeMap<(Atom, Atom), FieldElement>,
}

/// The associated quadratic form: one column per appearing atom, ordered by variable
/// then flag.
#[derive(Debug, Clone)]
pub struct AssociatedForm {
    pub q: QuadraticForm,
    pub columns: Vec<Atom>,
    /// Number of appearing variables that are not proper.
    pub non_proper: usize,
}

impl AssociatedForm {
    /// Column values for an assignment of the source form's variables.
    pub fn expand(&self, z: &[FieldElement]) -> Vec<FieldElement> {
        self.columns.iter().map(|a| a.value(z)).collect()
    }
}

/// A subform with the map from its variables back to the source's.
#[derive(Debug, Clone)]
pub struct Subform {
    pub form: GeneralizedForm,
    /// `kept[new_index] = old_index`, increasing.
    pub kept: Vec<usize>,
}

impl Subform {
    /// Pads an assignment of the subform with zeros at the dropped variables.
    pub fn lift(&self, z: &[FieldElement], source_vars: usize) -> Vec<FieldElement> {
        let mut out = vec![FieldElement::zero(self.form.d); source_vars];
        for (v, &old) in z.iter().zip(&self.kept) {
            out[old] = v.clone();
        }
        out
    }
}

impl GeneralizedForm {
    pub fn new(d: i64, r: usize) -> Self {
        GeneralizedForm {
            d,
            r,
            coeffs: BTreeMap::new(),
        }
    }

    /// Adds `c * a1 * a2`; coefficients that cancel to zero are dropped.
    pub fn add_term(&mut self, a1: Atom, a2: Atom, c: &FieldElement) {
        assert!(a1.var < self.r && a2.var < self.r, "variable index out of range");
        let key = (a1.min(a2), a1.max(a2));
        let entry = self
            .coeffs
            .entry(key)
            .or_insert_with(|| FieldElement::zero(self.d));
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&key);
        }
    }

    pub fn with_term(mut self, a1: Atom, a2: Atom, c: &FieldElement) -> Self {
        self.add_term(a1, a2, c);
        self
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn coeffs(&self) -> &BTreeMap<(Atom, Atom), FieldElement> {
        &self.coeffs
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.values().all(FieldElement::is_integral)
    }

    pub fn evaluate(&self, z: &[FieldElement]) -> Result<FieldElement, FormError> {
        if z.len() != self.r {
            return Err(FormError::Arity {
                expected: self.r,
                got: z.len(),
            });
        }
        let mut acc = FieldElement::zero(self.d);
        for ((a1, a2), c) in &self.coeffs {
            acc += &(c * &(&a1.value(z) * &a2.value(z)));
        }
        Ok(acc)
    }

    pub fn appearing_atoms(&self) -> BTreeSet<Atom> {
        self.coeffs
            .keys()
            .flat_map(|&(a1, a2)| [a1, a2])
            .collect()
    }

    /// Variables whose plain and conjugated atoms both appear.
    pub fn proper_variables(&self) -> BTreeSet<usize> {
        let atoms = self.appearing_atoms();
        atoms
            .iter()
            .filter(|a| a.flag == Flag::Plain && atoms.contains(&Atom::conj(a.var)))
            .map(|a| a.var)
            .collect()
    }

    pub fn is_quadratic(&self) -> bool {
        self.proper_variables().is_empty()
    }

    pub fn associated_form(&self) -> AssociatedForm {
        let columns: Vec<Atom> = self.appearing_atoms().into_iter().collect();
        let index: BTreeMap<Atom, usize> =
            columns.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let mut q = QuadraticForm::new(self.d, columns.len());
        for ((a1, a2), c) in &self.coeffs {
            q.add_term(index[a1], index[a2], c);
        }
        let proper = self.proper_variables();
        let vars: BTreeSet<usize> = columns.iter().map(|a| a.var).collect();
        AssociatedForm {
            q,
            columns,
            non_proper: vars.len() - proper.len(),
        }
    }

    /// Definiteness of the associated quadratic form.
    pub fn classify(&self) -> Definiteness {
        self.associated_form().q.classify()
    }

    /// Keeps the listed variables (renumbered in increasing order) and sets the rest to zero.
    pub fn subform(&self, keep: &BTreeSet<usize>) -> Result<Subform, FormError> {
        if let Some(&bad) = keep.iter().find(|&&v| v >= self.r) {
            return Err(FormError::VariableOutOfRange {
                index: bad,
                count: self.r,
            });
        }
        let kept: Vec<usize> = keep.iter().copied().collect();
        let renumber: BTreeMap<usize, usize> =
            kept.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let mut form = GeneralizedForm::new(self.d, kept.len());
        for ((a1, a2), c) in &self.coeffs {
            if let (Some(&v1), Some(&v2)) = (renumber.get(&a1.var), renumber.get(&a2.var)) {
                form.add_term(
                    Atom {
                        var: v1,
                        flag: a1.flag,
                    },
                    Atom {
                        var: v2,
                        flag: a2.flag,
                    },
                    c,
                );
            }
        }
        Ok(Subform { form, kept })
    }

    /// `self (+) other`, with `other`'s variables placed after `self`'s.
    pub fn direct_sum(&self, other: &GeneralizedForm) -> GeneralizedForm {
        let mut out = GeneralizedForm::new(self.d, self.r + other.r);
        for ((a1, a2), c) in &self.coeffs {
            out.add_term(*a1, *a2, c);
        }
        let shift = |a: &Atom| Atom {
            var: a.var + self.r,
            flag: a.flag,
        };
        for ((a1, a2), c) in &other.coeffs {
            out.add_term(shift(a1), shift(a2), c);
        }
        out
    }

    pub fn scale(&self, c: &FieldElement) -> GeneralizedForm {
        let mut out = GeneralizedForm::new(self.d, self.r);
        for ((a1, a2), a) in &self.coeffs {
            out.add_term(*a1, *a2, &(a * c));
        }
        out
    }
}

fn fmt_monomial(a1: &Atom, a2: &Atom) -> String {
    if a1 == a2 {
        format!("{a1}^2")
    } else {
        format!("{a1}*{a2}")
    }
}

/// Canonical DSL text: terms in atom order, unit coefficients omitted, coefficients with
/// an irrational part parenthesized.
impl fmt::Display for GeneralizedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        for (k, ((a1, a2), c)) in self.coeffs.iter().enumerate() {
            let mono = fmt_monomial(a1, a2);
            let (negative, body) = if c.is_rational() {
                let a = c.a();
                let abs = FieldElement::from_rational(self.d, a.abs());
                let body = if a.abs().is_one() {
                    mono
                } else {
                    format!("{abs}*{mono}")
                };
                (a.is_negative(), body)
            } else {
                (false, format!("({c})*{mono}"))
            };
            match (k, negative) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}

/// Sorted `[atom, atom, element]` triples.
impl Serialize for GeneralizedForm {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        struct Entry<'a>(&'a Atom, &'a Atom, &'a FieldElement);
        impl Serialize for Entry<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                let mut t = serializer.serialize_tuple(3)?;
                t.serialize_element(self.0)?;
                t.serialize_element(self.1)?;
                t.serialize_element(self.2)?;
                t.end()
            }
        }
        serializer.collect_seq(self.coeffs.iter().map(|((a1, a2), c)| Entry(a1, a2, c)))
    }
}

impl fmt::Display for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_generalized().fmt(f)
    }
}

impl Serialize for QuadraticForm {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_generalized().serialize(serializer)
    }
}
