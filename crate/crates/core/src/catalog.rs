//! Small reference bases used by the tests, the acceptance suite and the
//! sample data files.

use crate::basefield::{BaseFieldConfig, YPoly};
use crate::keybasis::{truncated_keys_from_series, WeightedBasis};
use crate::numeric::Rat;
use crate::oracle::{Parametrization, PrecisionPolicy};
use crate::poly::{ExtensionConfig, Poly};
use crate::text;

fn build(keys: &[(&str, i64, i64)]) -> WeightedBasis {
    let cfg = BaseFieldConfig::function_field();
    let keys = keys
        .iter()
        .map(|&(k, n, d)| (text::parse_poly(k, &cfg).expect("valid key"), Rat::new(n, d)))
        .collect();
    WeightedBasis::new(cfg, ExtensionConfig::Transcendental, keys).expect("valid basis")
}

/// `{x, 1/2; x^2 - y, 3/2}`.
pub fn b1() -> WeightedBasis {
    build(&[("x", 1, 2), ("x^2 - y", 3, 2)])
}

/// `{x, 1/2; x^2 - y, 5/4; (x^2 - y)^2 + x*y^2, 11/4}`.
pub fn b2() -> WeightedBasis {
    build(&[("x", 1, 2), ("x^2 - y", 5, 4), ("(x^2 - y)^2 + x*y^2", 11, 4)])
}

/// `{x, 1; x^2 - y^2, 3}`: a weighted basis with `m_1 = 2 != n_1 = 1`.
pub fn b3() -> WeightedBasis {
    build(&[("x", 1, 1), ("x^2 - y^2", 3, 1)])
}

/// `x^2 - y^2 - y^3`.
pub fn conic_minpoly() -> Poly {
    text::parse_poly("x^2 - y^2 - y^3", &BaseFieldConfig::function_field()).expect("valid")
}

/// The conic root `x = -y sqrt(1 + y)`, selected by the branch `-y`.
pub fn conic_parametrization(policy: PrecisionPolicy) -> Parametrization {
    let branch = YPoly::from_coeffs(vec![Rat::zero(), Rat::from(-1i64)]);
    Parametrization::new(conic_minpoly(), branch, policy).expect("regular branch")
}

/// Keys `U_1 = x, U_{i+1} = x - (degree-i truncation of the root)` with
/// `beta_i = i`, over the conic extension.
pub fn conic_truncation(depth: usize) -> WeightedBasis {
    let par = conic_parametrization(PrecisionPolicy::for_depth(depth));
    let phi = par.root_to(depth + 1);
    let ext = ExtensionConfig::algebraic(conic_minpoly()).expect("monic");
    truncated_keys_from_series(&phi, depth, BaseFieldConfig::function_field(), ext)
        .expect("root has zero constant term")
        .basis
}
