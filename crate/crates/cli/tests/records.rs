use num_complex::Complex64;
use proptest::prelude::*;
use tandyn::Itinerary;
use tandyn_cli::record::{Field, FieldKind, Record};

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        -1e3..1e3_f64,
        Just(0.0),
        Just(-0.0),
    ]
}

fn complex() -> impl Strategy<Value = Complex64> {
    (finite(), finite()).prop_map(|(a, b)| Complex64::new(a, b))
}

fn field() -> impl Strategy<Value = (Field, FieldKind)> {
    prop_oneof![
        any::<i64>().prop_map(|n| (Field::Int(n), FieldKind::Int)),
        finite().prop_map(|x| (Field::Real(x), FieldKind::Real)),
        complex().prop_map(|z| (Field::Complex(z), FieldKind::Complex)),
        proptest::option::of(complex()).prop_map(|z| (Field::Point(z), FieldKind::Point)),
        "[A-Za-z][A-Za-z0-9_.]{0,12}".prop_map(|w| (Field::Word(w), FieldKind::Word)),
        prop::collection::vec(-50i64..50, 1..6)
            .prop_map(|v| (Field::Itinerary(Itinerary::new(v).unwrap()), FieldKind::Itinerary)),
        prop::collection::vec(complex(), 1..5).prop_map(|v| (Field::Points(v), FieldKind::Points)),
        Just((Field::Missing, FieldKind::Complex)),
    ]
}

fn same(a: &Field, b: &Field) -> bool {
    // -0 prints as 0, so compare numerically.
    match (a, b) {
        (Field::Real(x), Field::Real(y)) => x == y,
        _ => a == b,
    }
}

proptest! {
    #[test]
    fn records_roundtrip(fields in prop::collection::vec(field(), 1..8)) {
        let (values, schema): (Vec<Field>, Vec<FieldKind>) = fields.into_iter().unzip();
        let rec = Record(values);
        let line = rec.to_string();
        prop_assert!(!line.contains('\n'));
        let back = Record::parse(&line, &schema).unwrap();
        prop_assert_eq!(back.0.len(), rec.0.len());
        for (a, b) in rec.0.iter().zip(&back.0) {
            prop_assert!(same(a, b), "{:?} vs {:?}", a, b);
        }
    }
}
