//! The public API end to end: cyclic groups against their characters, and a
//! free-group averaging run against its certified bounds.

use std::f64::consts::PI;
use std::sync::Arc;

use dixmier_core::algebra::CoeffAlgebra;
use dixmier_core::averaging::{ph_average, MonitorOptions};
use dixmier_core::crossed::CrossedElement;
use dixmier_core::group::{FiniteGroup, Group, GroupElement, Word};
use dixmier_core::rep::{PowerOptions, TruncatedRep, WindowSpec};
use dixmier_core::structure::{block_decompose, MatrixModel};
use dixmier_core::twist::{Action, TwistedSystem, TwoCocycle};

fn untwisted(group: Group) -> Arc<TwistedSystem> {
    Arc::new(
        TwistedSystem::new(
            group,
            CoeffAlgebra::scalars(),
            Action::Trivial,
            TwoCocycle::Trivial,
        )
        .unwrap(),
    )
}

#[test]
fn cyclic_norms_match_characters() {
    for n in [3u32, 5, 8] {
        let sys = untwisted(Group::Finite(FiniteGroup::cyclic(n).unwrap()));
        let x = CrossedElement::lambda(&sys, GroupElement::Finite(1))
            .unwrap()
            .add(&CrossedElement::lambda(&sys, GroupElement::Finite(n as usize - 1)).unwrap())
            .unwrap();
        let rep = TruncatedRep::new(&sys, &WindowSpec::Full).unwrap();
        let v = rep.norm_lower(&x, &PowerOptions::default()).unwrap().value;
        let exact = (0..n)
            .map(|k| (2.0 * (2.0 * PI * k as f64 / n as f64).cos()).abs())
            .fold(0.0, f64::max);
        assert!((v - exact).abs() < 1e-6, "n = {n}: {v} vs {exact}");
        let model = MatrixModel::new(&sys).unwrap();
        assert_eq!(block_decompose(&model).unwrap().dims(), vec![1; n as usize]);
    }
}

#[test]
fn free_averaging_stays_under_its_bounds() {
    let sys = untwisted(Group::free(2).unwrap());
    let lam = |s: &str| {
        CrossedElement::lambda(&sys, GroupElement::Free(Word::parse(s).unwrap())).unwrap()
    };
    let x = lam("a")
        .add(&lam("a^-1"))
        .unwrap()
        .add(&lam("b a b^-1"))
        .unwrap()
        .add(&lam("b a^-1 b^-1"))
        .unwrap();
    let run = ph_average(&x, 0.01, 2, &MonitorOptions::default()).unwrap();
    assert_eq!(run.trace.rows.len(), 3);
    assert!(!run.refuted());
    assert!(run.trace.certified_nonincreasing());
    assert!(run.final_bound <= 0.01);
}
