//! Lower bounds for definite forms and unit scaling of targets.

use num_traits::{Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::field::{int, FieldContext, FieldElement, Rational};
use crate::forms::{Definiteness, GeneralizedForm, QuadraticForm};
use crate::matrix;

/// Cap on bisection steps when bracketing delta.
pub const MAX_DELTA_ITERATIONS: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("form is {0}, expected totally_positive_definite")]
    NotDefinite(Definiteness),
    #[error("no positive delta found within {MAX_DELTA_ITERATIONS} bisection steps")]
    DeltaNotFound,
    #[error("target {0} is not totally positive")]
    NotTotallyPositive(FieldElement),
    #[error("delta must be positive")]
    NonPositiveDelta,
}

/// A rational `delta > 0` with `Q - delta * (x_1^2 + ... + x_n^2)` totally positive
/// semidefinite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaCertificate {
    pub delta: Rational,
    pub form: QuadraticForm,
    pub iterations: u32,
}

impl DeltaCertificate {
    /// Re-runs the exact semidefiniteness check.
    pub fn verify(&self) -> bool {
        self.delta.is_positive() && shifted_is_psd(&self.form, &self.delta)
    }
}

impl Serialize for DeltaCertificate {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("DeltaCertificate", 2)?;
        st.serialize_field("delta", &self.delta.to_string())?;
        st.serialize_field("iterations", &self.iterations)?;
        st.end()
    }
}

fn shifted_is_psd(q: &QuadraticForm, delta: &Rational) -> bool {
    matrix::is_totally_positive_semidefinite(&q.minus_scaled_identity(delta).gram())
}

/// Rational upper bound on `min(a - |b| sqrt(D), a + |b| sqrt(D))`.
fn smaller_embedding_upper_bound(x: &FieldElement) -> Rational {
    let floor_sqrt = int((x.d() as f64).sqrt().floor() as i64);
    let floor_sqrt = if &floor_sqrt * &floor_sqrt > int(x.d()) {
        floor_sqrt - int(1)
    } else {
        floor_sqrt
    };
    x.a() - x.b().abs() * floor_sqrt
}

/// Brackets the smallest eigenvalue (over both embeddings) by bisection on rationals,
/// starting from `[0, smallest diagonal entry]` and stopping once `hi <= 2 lo`.
pub fn delta_lower_bound(q: &QuadraticForm) -> Result<DeltaCertificate, AnalysisError> {
    let class = q.classify();
    if class != Definiteness::TotallyPositiveDefinite {
        return Err(AnalysisError::NotDefinite(class));
    }
    if q.n() == 0 {
        return Ok(DeltaCertificate {
            delta: int(1),
            form: q.clone(),
            iterations: 0,
        });
    }
    let mut hi = (0..q.n())
        .map(|i| smaller_embedding_upper_bound(&q.coeff(i, i)))
        .min()
        .expect("at least one variable");
    if shifted_is_psd(q, &hi) {
        return Ok(DeltaCertificate {
            delta: hi,
            form: q.clone(),
            iterations: 0,
        });
    }
    let mut lo = Rational::zero();
    let two = int(2);
    let mut iterations = 0;
    while iterations < MAX_DELTA_ITERATIONS {
        if lo.is_positive() && hi <= &lo * &two {
            break;
        }
        let mid = (&lo + &hi) / &two;
        if shifted_is_psd(q, &mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    if !lo.is_positive() {
        return Err(AnalysisError::DeltaNotFound);
    }
    Ok(DeltaCertificate {
        delta: lo,
        form: q.clone(),
        iterations,
    })
}

/// The certificate of the associated quadratic form. For integral `z` with a nonzero
/// proper variable `z_i`, `G(z) >= delta * Tr(z_i^2) >= delta` in both embeddings.
pub fn generalized_delta(g: &GeneralizedForm) -> Result<DeltaCertificate, AnalysisError> {
    delta_lower_bound(&g.associated_form().q)
}

/// `beta = epsilon^2 * alpha` with `epsilon = u^-n` for the fundamental unit `u`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScaledTarget {
    pub alpha: FieldElement,
    pub epsilon: FieldElement,
    pub n: u32,
    pub beta: FieldElement,
}

/// Smallest `n >= 0` with `u^(-2n) * alpha < delta` in the first embedding.
pub fn unit_scale_down(
    ctx: &FieldContext,
    alpha: &FieldElement,
    delta: &Rational,
) -> Result<ScaledTarget, AnalysisError> {
    if !alpha.is_totally_positive() {
        return Err(AnalysisError::NotTotallyPositive(alpha.clone()));
    }
    if !delta.is_positive() {
        return Err(AnalysisError::NonPositiveDelta);
    }
    let unit = ctx.fundamental_unit();
    let shrink = unit.pow(-2).expect("units are invertible");
    let bound = FieldElement::from_rational(ctx.d(), delta.clone());
    let mut beta = alpha.clone();
    let mut n: u32 = 0;
    while beta.cmp_first(&bound).is_ge() {
        beta = &beta * &shrink;
        n += 1;
    }
    let epsilon = unit
        .pow(-(n.to_i64().expect("u32 fits i64")))
        .expect("units are invertible");
    Ok(ScaledTarget {
        alpha: alpha.clone(),
        epsilon,
        n,
        beta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;
    use crate::forms::Atom;

    fn e(d: i64, a: i64, b: i64) -> FieldElement {
        FieldElement::from_ints(d, a, b)
    }

    #[test]
    fn identity_delta() {
        let cert = delta_lower_bound(&QuadraticForm::sum_of_squares(2, 2)).unwrap();
        assert!(cert.delta >= rat(1, 2) && cert.delta <= int(1));
        assert!(cert.verify());
    }

    #[test]
    fn binary_form_delta() {
        // 4x^2 - 4xy + 2y^2 has smallest eigenvalue 3 - sqrt(5)
        let q = QuadraticForm::new(2, 2)
            .with_term(0, 0, &e(2, 4, 0))
            .with_term(0, 1, &e(2, -4, 0))
            .with_term(1, 1, &e(2, 2, 0));
        let cert = delta_lower_bound(&q).unwrap();
        assert!(cert.verify());
        let three_minus_sqrt5 = FieldElement::new(5, int(3), int(-1));
        let delta5 = FieldElement::from_rational(5, cert.delta.clone());
        assert!(delta5.cmp_first(&three_minus_sqrt5).is_le());
        assert!(cert.delta.is_positive());
        // bisection bracket: twice delta must fail
        assert!(!shifted_is_psd(&q, &(&cert.delta * int(2) + rat(1, 1000))));
    }

    #[test]
    fn conjugate_embedding_binds() {
        let q = QuadraticForm::new(2, 1).with_term(0, 0, &e(2, 2, 1));
        let cert = delta_lower_bound(&q).unwrap();
        assert!(cert.verify());
        let bound = e(2, 2, -1);
        assert!(FieldElement::from_rational(2, cert.delta.clone()).cmp_first(&bound).is_le());
    }

    #[test]
    fn rejects_indefinite() {
        let g = GeneralizedForm::new(2, 1).with_term(Atom::plain(0), Atom::conj(0), &e(2, 1, 0));
        assert_eq!(
            generalized_delta(&g),
            Err(AnalysisError::NotDefinite(Definiteness::NotSemidefinite))
        );
    }

    #[test]
    fn generalized_identity_delta() {
        let one = e(5, 1, 0);
        let g = GeneralizedForm::new(5, 4)
            .with_term(Atom::plain(0), Atom::plain(0), &one)
            .with_term(Atom::plain(1), Atom::plain(1), &one)
            .with_term(Atom::plain(2), Atom::plain(2), &one)
            .with_term(Atom::plain(3), Atom::plain(3), &one)
            .with_term(Atom::conj(3), Atom::conj(3), &one);
        let cert = generalized_delta(&g).unwrap();
        assert_eq!(cert.form.n(), 5);
        assert!(cert.delta >= rat(1, 2) && cert.delta <= int(1));
    }

    #[test]
    fn scale_down_examples() {
        let ctx = FieldContext::new(2).unwrap();
        let s = unit_scale_down(&ctx, &e(2, 2, 1), &rat(1, 10)).unwrap();
        assert_eq!(s.n, 3);
        assert_eq!(s.epsilon, e(2, -7, 5));
        assert_eq!(s.beta, e(2, 58, -41));
        assert!(s.beta.is_totally_positive());

        let s = unit_scale_down(&ctx, &e(2, 1, 0), &int(2)).unwrap();
        assert_eq!((s.n, s.epsilon.clone(), s.beta.clone()), (0, e(2, 1, 0), e(2, 1, 0)));

        let s = unit_scale_down(&ctx, &e(2, 1, 0), &rat(1, 2)).unwrap();
        assert_eq!((s.n, s.beta), (1, e(2, 3, -2)));

        assert!(matches!(
            unit_scale_down(&ctx, &e(2, 1, 1), &int(1)),
            Err(AnalysisError::NotTotallyPositive(_))
        ));
    }
}
