//! Exact symmetric-matrix routines over `Q(sqrt(D))`.
//!
//! A matrix over the field is positive (semi)definite "in both embeddings" exactly when
//! elimination over the field itself succeeds: zero-ness of a pivot does not depend on
//! the embedding, and a nonzero pivot must be totally positive.

use crate::field::FieldElement;

pub type Matrix = Vec<Vec<FieldElement>>;

/// Sylvester: every leading principal minor totally positive. The running pivots are the
/// ratios of consecutive leading minors, so it suffices to check them.
pub fn is_totally_positive_definite(m: &Matrix) -> bool {
    let n = m.len();
    let mut a = m.clone();
    for k in 0..n {
        let p = a[k][k].clone();
        if !p.is_totally_positive() {
            return false;
        }
        let inv = p.inverse().expect("pivot is nonzero");
        for i in k + 1..n {
            let f = &a[i][k] * &inv;
            if f.is_zero() {
                continue;
            }
            for j in k + 1..n {
                let t = &f * &a[k][j];
                a[i][j] -= &t;
            }
        }
    }
    true
}

/// Positive semidefinite in both embeddings, via symmetric elimination that drops
/// zero pivots whose row is zero.
pub fn is_totally_positive_semidefinite(m: &Matrix) -> bool {
    square_completion(m).is_some()
}

/// One square produced by completing the square on variable `k`:
/// `pivot * (x_k + sum_{l<k} coeffs[l] * x_l)^2`.
#[derive(Clone, Debug)]
pub struct SquareTerm {
    pub pivot: FieldElement,
    pub coeffs: Vec<FieldElement>,
}

impl SquareTerm {
    /// Value of the bracketed linear form.
    pub fn linear_value(&self, k: usize, x: &[FieldElement]) -> FieldElement {
        let mut v = x[k].clone();
        for (c, xl) in self.coeffs.iter().zip(x) {
            if !c.is_zero() {
                v += &(c * xl);
            }
        }
        v
    }
}

/// Writes `x^T M x` as a sum of squares, eliminating the last variable first, so that
/// the square attached to variable `k` only involves `x_0..=x_k`. Variables with a zero
/// pivot get `None`. Returns `None` when `M` is not semidefinite in both embeddings.
pub fn square_completion(m: &Matrix) -> Option<Vec<Option<SquareTerm>>> {
    let n = m.len();
    let mut a = m.clone();
    let mut terms = vec![None; n];
    for k in (0..n).rev() {
        let p = a[k][k].clone();
        if p.is_zero() {
            if (0..k).any(|l| !a[l][k].is_zero()) {
                return None;
            }
            continue;
        }
        if !p.is_totally_positive() {
            return None;
        }
        let inv = p.inverse().expect("pivot is nonzero");
        let coeffs: Vec<FieldElement> = (0..k).map(|l| &a[l][k] * &inv).collect();
        for i in 0..k {
            if coeffs[i].is_zero() {
                continue;
            }
            for j in 0..k {
                let t = &coeffs[i] * &a[k][j];
                a[i][j] -= &t;
            }
        }
        terms[k] = Some(SquareTerm { pivot: p, coeffs });
    }
    Some(terms)
}

/// Determinant by Gaussian elimination over the field.
pub fn determinant(m: &Matrix) -> FieldElement {
    let n = m.len();
    let d = m.first().map_or(2, |r| r.first().map_or(2, |x| x.d()));
    let mut a = m.clone();
    let mut det = FieldElement::one(d);
    for k in 0..n {
        let Some(piv) = (k..n).find(|&i| !a[i][k].is_zero()) else {
            return FieldElement::zero(d);
        };
        if piv != k {
            a.swap(piv, k);
            det = -det;
        }
        det = &det * &a[k][k];
        let inv = a[k][k].inverse().expect("pivot is nonzero");
        for i in k + 1..n {
            let f = &a[i][k] * &inv;
            if f.is_zero() {
                continue;
            }
            for j in k..n {
                let t = &f * &a[k][j];
                a[i][j] -= &t;
            }
        }
    }
    det
}

/// The principal submatrix on the given (sorted) index set.
pub fn principal_submatrix(m: &Matrix, idx: &[usize]) -> Matrix {
    idx.iter()
        .map(|&i| idx.iter().map(|&j| m[i][j].clone()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;

    fn e(a: i64, b: i64) -> FieldElement {
        FieldElement::from_ints(2, a, b)
    }

    #[test]
    fn rank_one_is_semidefinite_only() {
        // (2x - y)^2
        let m = vec![vec![e(4, 0), e(-2, 0)], vec![e(-2, 0), e(1, 0)]];
        assert!(!is_totally_positive_definite(&m));
        assert!(is_totally_positive_semidefinite(&m));
        assert!(determinant(&m).is_zero());
    }

    #[test]
    fn indefinite_in_one_embedding() {
        // diag(1+sqrt2) is positive in the first embedding only
        let m = vec![vec![e(1, 1)]];
        assert!(!is_totally_positive_semidefinite(&m));
        let m = vec![vec![e(2, 1)]];
        assert!(is_totally_positive_definite(&m));
    }

    #[test]
    fn hyperbolic_plane() {
        let half = FieldElement::from_rational(2, rat(1, 2));
        let m = vec![vec![e(0, 0), half.clone()], vec![half, e(0, 0)]];
        assert!(!is_totally_positive_semidefinite(&m));
        assert_eq!(determinant(&m), FieldElement::from_rational(2, rat(-1, 4)));
    }

    #[test]
    fn completion_reproduces_form() {
        let m = vec![
            vec![e(4, 0), e(-2, 1), e(0, 0)],
            vec![e(-2, 1), e(5, 0), e(1, 0)],
            vec![e(0, 0), e(1, 0), e(3, 1)],
        ];
        let terms = square_completion(&m).unwrap();
        let x = vec![e(1, 2), e(-3, 1), e(2, 0)];
        let mut direct = e(0, 0);
        for i in 0..3 {
            for j in 0..3 {
                direct += &(&m[i][j] * &(&x[i] * &x[j]));
            }
        }
        let mut squares = e(0, 0);
        for (k, t) in terms.iter().enumerate() {
            let t = t.as_ref().unwrap();
            squares += &(&t.pivot * &t.linear_value(k, &x).square());
        }
        assert_eq!(direct, squares);
    }
}
