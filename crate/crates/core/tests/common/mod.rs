#![allow(dead_code)]

use num_bigint::BigInt;
use newtonsum_core::poly::SparsePoly;
use newtonsum_core::{FaceLattice, Limits, Polynomial};
use proptest::prelude::*;

pub const CORPUS: [&str; 5] = ["x*y", "x^2 + y^3", "x*y + z*u", "x*y + z*u + x*z + 2*y*u", "x^3 + y^3 + z^3"];

pub fn lattice(text: &str) -> FaceLattice {
    FaceLattice::of(&Polynomial::parse(text).unwrap(), &Limits::default()).unwrap()
}

/// Sparse polynomials in `n ∈ 1..=max_n` variables with up to `max_terms`
/// terms, nonzero coefficients and no constant term.
pub fn sparse_poly(max_n: usize, max_terms: usize, max_exp: u32) -> impl Strategy<Value = Polynomial> {
    (1..=max_n).prop_flat_map(move |n| {
        let term = (prop::collection::vec(0..=max_exp, n), (-6i64..=6).prop_filter("nonzero", |c| *c != 0))
            .prop_filter("no constant term", |(e, _)| e.iter().any(|&x| x > 0));
        prop::collection::vec(term, 1..=max_terms).prop_filter_map("cancelled to zero", move |terms| {
            let p = SparsePoly::from_terms(n, terms.into_iter().map(|(e, c)| (e, BigInt::from(c)))).ok()?;
            Polynomial::new(p).ok()
        })
    })
}
