//! Independent oracles shared by the integration tests. Everything here works on
//! machine integers in the "doubled" representation `x = (X0 + X1 sqrt(D)) / 2`, so it
//! shares no arithmetic with the library.

#![allow(dead_code)]

use genquad::{int, FieldElement, GeneralizedForm, QuadraticForm};
use num_traits::ToPrimitive;
use rand::Rng;

pub type Pair = (i64, i64);

pub fn half_basis(d: i64) -> bool {
    d.rem_euclid(4) == 1
}

/// `(2a, 2b)` for `x = a + b sqrt(D)`; panics when `x` is not a half-integer pair.
pub fn doubled(x: &FieldElement) -> Pair {
    let two = int(2);
    let a = x.a() * &two;
    let b = x.b() * &two;
    assert!(a.is_integer() && b.is_integer(), "{x} has denominators beyond 2");
    (a.to_integer().to_i64().unwrap(), b.to_integer().to_i64().unwrap())
}

pub fn from_doubled(d: i64, x: Pair) -> FieldElement {
    FieldElement::new(d, genquad::rat(x.0, 2), genquad::rat(x.1, 2))
}

/// Doubled pair of the integral element with basis coordinates `(p, q)`.
pub fn coords_to_doubled(d: i64, p: i64, q: i64) -> Pair {
    if half_basis(d) {
        (2 * p + q, q)
    } else {
        (2 * p, 2 * q)
    }
}

pub fn mul(d: i64, x: Pair, y: Pair) -> Pair {
    (x.0 * y.0 + d * x.1 * y.1, x.0 * y.1 + x.1 * y.0)
}

pub fn add(x: Pair, y: Pair) -> Pair {
    (x.0 + y.0, x.1 + y.1)
}

/// Totally positive test on `X0 + X1 sqrt(D)` with integers only.
pub fn pair_totally_positive(d: i64, x: Pair) -> bool {
    x.0 > 0 && x.0 * x.0 > d * x.1 * x.1
}

/// Every totally positive integral element of trace at most `t`, by scanning a grid of
/// basis coordinates far larger than needed.
pub fn grid_totally_positive(d: i64, t: i64) -> Vec<Pair> {
    let mut out = Vec::new();
    let r = t + 2;
    for p in -4 * r..=4 * r {
        for q in -4 * r..=4 * r {
            let x = coords_to_doubled(d, p, q);
            // doubled trace is 2 * X0 / 2 = X0
            if x.0 <= t && pair_totally_positive(d, x) {
                out.push(x);
            }
        }
    }
    out.sort();
    out
}

/// Smallest unit `> 1` as a doubled pair, by scanning `y` upward and solving
/// `x^2 - D y^2 = +-4` (half basis, `x = y mod 2`) or `+-1`.
pub fn brute_fundamental_unit(d: i64) -> Pair {
    let half = half_basis(d);
    let norms: &[i64] = if half { &[-4, 4] } else { &[-1, 1] };
    for y in 1i64.. {
        for &n in norms {
            let sq = n + d * y * y;
            if sq <= 0 {
                continue;
            }
            let x = (sq as f64).sqrt().round() as i64;
            if x * x != sq {
                continue;
            }
            if half && (x - y) % 2 == 0 {
                return (x, y);
            }
            if !half {
                return (2 * x, 2 * y);
            }
        }
    }
    unreachable!()
}

/// A quadratic form in doubled integer coefficients, `Q = sum_{i<=j} c_ij x_i x_j`.
pub struct IntForm {
    pub d: i64,
    pub n: usize,
    pub coeffs: Vec<(usize, usize, Pair)>,
}

impl IntForm {
    pub fn from_quadratic(q: &QuadraticForm) -> IntForm {
        IntForm {
            d: q.d(),
            n: q.n(),
            coeffs: q.coeffs().iter().map(|(&(i, j), c)| (i, j, doubled(c))).collect(),
        }
    }

    /// Eight times the value, as a doubled pair: `c (2) * x_i (2) * x_j (2)`.
    pub fn eval8(&self, x: &[Pair]) -> Pair {
        let mut acc = (0, 0);
        for &(i, j, c) in &self.coeffs {
            acc = add(acc, mul(self.d, c, mul(self.d, x[i], x[j])));
        }
        acc
    }
}

/// Enlarged coordinate bounds `(pmax, qmax)` for `x` with `delta * x^2 <= alpha` in both
/// embeddings, plus `slack` on each side.
pub fn coordinate_bounds(d: i64, alpha: &FieldElement, delta: f64, slack: i64) -> (i64, i64) {
    let sd = (d as f64).sqrt();
    let r1 = (alpha.to_f64_first() / delta).max(0.0).sqrt();
    let r2 = (alpha.to_f64_second() / delta).max(0.0).sqrt();
    let (p, q) = if half_basis(d) {
        let q = (r1 + r2) / sd;
        (r1 + q * (1.0 + sd) / 2.0, q)
    } else {
        ((r1 + r2) / 2.0, (r1 + r2) / (2.0 * sd))
    };
    (p.ceil() as i64 + slack, q.ceil() as i64 + slack)
}

/// Exhaustive search over the given box in descending lexicographic order of
/// `(p_1, q_1, p_2, q_2, ...)`; returns the first hit.
pub fn brute_force_represent(form: &IntForm, alpha: &FieldElement, pmax: i64, qmax: i64) -> Option<Vec<Pair>> {
    let target = doubled(alpha);
    let target8 = (4 * target.0, 4 * target.1);
    let mut cands = Vec::new();
    for p in (-pmax..=pmax).rev() {
        for q in (-qmax..=qmax).rev() {
            cands.push(coords_to_doubled(form.d, p, q));
        }
    }
    let mut x = vec![(0, 0); form.n];
    fn rec(form: &IntForm, cands: &[Pair], x: &mut Vec<Pair>, k: usize, target8: Pair) -> bool {
        if k == x.len() {
            return form.eval8(x) == target8;
        }
        for &c in cands {
            x[k] = c;
            if rec(form, cands, x, k + 1, target8) {
                return true;
            }
        }
        false
    }
    if rec(form, &cands, &mut x, 0, target8) {
        Some(x)
    } else {
        None
    }
}

/// A random small integral element with basis coordinates in `[-h, h]`.
pub fn random_integral<R: Rng>(rng: &mut R, d: i64, h: i64) -> FieldElement {
    let (p, q) = (rng.gen_range(-h..=h), rng.gen_range(-h..=h));
    from_doubled(d, coords_to_doubled(d, p, q))
}

/// A random totally positive integral element with small coordinates.
pub fn random_totally_positive<R: Rng>(rng: &mut R, d: i64, h: i64) -> FieldElement {
    loop {
        let x = random_integral(rng, d, h);
        let p = doubled(&x);
        if pair_totally_positive(d, p) {
            return x;
        }
    }
}

/// `sum_atoms c_a * a^2 + sum_k t_k * L_k^2` with totally positive `c_a`, `t_k` and random
/// integral linear combinations `L_k` of the atoms. Definite by construction.
pub fn random_definite_generalized<R: Rng>(
    rng: &mut R,
    d: i64,
    r: usize,
    atoms: &[genquad::Atom],
    extra_squares: usize,
) -> GeneralizedForm {
    let mut g = GeneralizedForm::new(d, r);
    for &a in atoms {
        let c = random_totally_positive(rng, d, 2);
        g.add_term(a, a, &c);
    }
    for _ in 0..extra_squares {
        let t = random_totally_positive(rng, d, 1);
        let lin: Vec<FieldElement> = atoms.iter().map(|_| random_integral(rng, d, 1)).collect();
        for (i, &ai) in atoms.iter().enumerate() {
            for (j, &aj) in atoms.iter().enumerate() {
                if j < i {
                    continue;
                }
                let mut c = &t * &(&lin[i] * &lin[j]);
                if i != j {
                    c = &c + &c;
                }
                if !c.is_zero() {
                    g.add_term(ai, aj, &c);
                }
            }
        }
    }
    g
}
