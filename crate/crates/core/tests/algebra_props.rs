use lvform::{Rational, RationalMatrix};
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=6).prop_map(|(n, d)| Rational::new(n, d).unwrap())
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = RationalMatrix> {
    prop::collection::vec(prop::collection::vec(small_rational(), cols), rows)
        .prop_map(move |r| RationalMatrix::from_rows(r, cols).unwrap())
}

fn square() -> impl Strategy<Value = RationalMatrix> {
    (1usize..=5).prop_flat_map(|n| matrix(n, n))
}

fn any_shape() -> impl Strategy<Value = RationalMatrix> {
    (1usize..=5, 1usize..=5).prop_flat_map(|(r, c)| matrix(r, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn inverse_is_exact(m in square()) {
        let n = m.rows();
        match m.inverse() {
            Ok(inv) => {
                prop_assert_eq!(m.mul(&inv).unwrap(), RationalMatrix::identity(n));
                prop_assert_eq!(inv.mul(&m).unwrap(), RationalMatrix::identity(n));
                prop_assert_eq!(m.rank(), n);
            }
            Err(_) => prop_assert!(m.rank() < n),
        }
    }

    #[test]
    fn rank_of_transpose(m in any_shape()) {
        prop_assert_eq!(m.rank(), m.transpose().rank());
        prop_assert!(m.rank() <= m.rows().min(m.cols()));
    }

    #[test]
    fn rational_text_roundtrip(r in small_rational()) {
        let parsed: Rational = r.to_string().parse().unwrap();
        prop_assert_eq!(&parsed, &r);
        prop_assert!(!r.denom().to_string().starts_with('-'));
    }

    #[test]
    fn floats_convert_exactly(x in -1e12f64..1e12) {
        let r = Rational::from_f64(x).unwrap();
        prop_assert_eq!(r.to_f64(), x);
        prop_assert!(r.is_f64());
    }
}

#[test]
fn canonical_form_and_non_floats() {
    let half = Rational::new(2, 4).unwrap();
    assert_eq!(half.to_string(), "1/2");
    assert_eq!(Rational::new(1, -3).unwrap().to_string(), "-1/3");
    assert!(!Rational::new(1, 3).unwrap().is_f64());
    assert!(Rational::from_f64(f64::INFINITY).is_none());
}
