use genquad::{Atom, FieldContext, FieldElement, GeneralizedForm};
use genquad_cli::{parse_element, parse_form};
use proptest::prelude::*;

/// Every form literal from the documentation and the library's own tests.
const LITERALS: &[(i64, &str)] = &[
    (2, "z1^2 + z2*t(z2)"),
    (2, "4*z1^2 - 4*z1*t(z1) + t(z1)^2"),
    (2, "(2+1s)*z1^2"),
    (2, "z1*t(z1)"),
    (2, "z1^2"),
    (2, "(2+1s)*z1*z2 - 1/2*t(z2)^2"),
    (5, "z1^2 + z2^2 + z3^2"),
    (5, "z1^2 + z2^2 + z3^2 + z4^2 + t(z4)^2"),
    (2, "z1^2 + z2^2 + z3^2 + z4^2"),
    (2, "(3+2s)*z5^2 - (12+8s)*z5*t(z5) + (12+8s)*t(z5)^2"),
    (3, "-z1^2 + 3/4*z2*t(z1)"),
    (13, "(1/2+1/2s)*t(z3)^2"),
    (2, "0"),
];

fn ctx(d: i64) -> FieldContext {
    FieldContext::new(d).unwrap()
}

#[test]
fn literal_corpus_round_trips() {
    for &(d, text) in LITERALS {
        let g = parse_form(text, &ctx(d)).unwrap_or_else(|e| panic!("{text}: {e}"));
        let again = parse_form(&g.to_string(), &ctx(d)).unwrap();
        assert_eq!(g.coeffs(), again.coeffs(), "{text}");
        assert_eq!(again.to_string(), g.to_string());
    }
}

#[test]
fn element_examples() {
    assert_eq!(parse_element("2+1s", &ctx(2)).unwrap(), FieldElement::from_ints(2, 2, 1));
    assert_eq!(parse_element("58-41s", &ctx(2)).unwrap(), FieldElement::from_ints(2, 58, -41));
    let x = parse_element("3/2+1/2s", &ctx(5)).unwrap();
    assert_eq!(x, &FieldElement::one(5) + &FieldElement::new(5, genquad::rat(1, 2), genquad::rat(1, 2)));
}

fn coeff(d: i64) -> impl Strategy<Value = FieldElement> {
    (-9i64..=9, 1i64..=4, -9i64..=9, 1i64..=4)
        .prop_map(move |(a, p, b, q)| FieldElement::new(d, genquad::rat(a, p), genquad::rat(b, q)))
}

fn atom() -> impl Strategy<Value = Atom> {
    (0usize..4, any::<bool>()).prop_map(|(v, c)| if c { Atom::conj(v) } else { Atom::plain(v) })
}

fn form() -> impl Strategy<Value = GeneralizedForm> {
    proptest::sample::select(vec![2i64, 3, 5, 13]).prop_flat_map(|d| {
        proptest::collection::vec((atom(), atom(), coeff(d)), 1..7).prop_map(move |terms| {
            let mut g = GeneralizedForm::new(d, 4);
            for (a, b, c) in &terms {
                g.add_term(*a, *b, c);
            }
            g
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printed_forms_reparse(g in form()) {
        let text = g.to_string();
        let back = parse_form(&text, &ctx(g.d())).unwrap();
        prop_assert_eq!(back.coeffs(), g.coeffs());
    }

    #[test]
    fn printed_elements_reparse(d in proptest::sample::select(vec![2i64, 3, 5, 13]), a in -99i64..99, p in 1i64..9, b in -99i64..99, q in 1i64..9) {
        let x = FieldElement::new(d, genquad::rat(a, p), genquad::rat(b, q));
        prop_assert_eq!(parse_element(&x.to_string(), &ctx(d)).unwrap(), x);
    }

    #[test]
    fn malformed_input_is_rejected_with_a_position(text in "[zt()0-9+*^/s -x]{0,24}") {
        let len = text.chars().count();
        if let Err(e) = parse_form(&text, &ctx(2)) {
            prop_assert!(e.pos <= len);
            prop_assert!(e.to_string().contains("at position"));
        }
        if let Err(e) = parse_element(&text, &ctx(2)) {
            prop_assert!(e.pos <= len);
        }
    }
}
