//! Proptest strategies shared by the unit tests.

use proptest::prelude::*;

use crate::basefield::{KElem, YPoly};
use crate::numeric::Rat;
use crate::poly::Poly;

pub fn rat_strategy() -> impl Strategy<Value = Rat> {
    (-9i64..10, 1i64..5).prop_map(|(n, d)| Rat::new(n, d))
}

pub fn ypoly_strategy(max_deg: usize) -> impl Strategy<Value = YPoly> {
    prop::collection::vec(rat_strategy(), 0..=max_deg + 1).prop_map(YPoly::from_coeffs)
}

/// Mostly polynomials in `y`, sometimes genuine fractions.
pub fn kelem_strategy() -> impl Strategy<Value = KElem> {
    prop_oneof![
        3 => ypoly_strategy(3).prop_map(KElem::from_ypoly),
        1 => (ypoly_strategy(2), ypoly_strategy(2))
            .prop_filter("nonzero denominator", |(_, d)| !d.is_zero())
            .prop_map(|(n, d)| KElem::new(n, d).unwrap()),
    ]
}

pub fn poly_strategy(max_deg: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec(kelem_strategy(), 0..=max_deg + 1).prop_map(Poly::from_coeffs)
}

/// Polynomials with coefficients in `Z[y]`.
pub fn integral_poly_strategy(max_deg: usize) -> impl Strategy<Value = Poly> {
    let coeff = prop::collection::vec((-3i64..4).prop_map(Rat::from), 0..4)
        .prop_map(|c| KElem::from_ypoly(YPoly::from_coeffs(c)));
    prop::collection::vec(coeff, 0..=max_deg + 1).prop_map(Poly::from_coeffs)
}
