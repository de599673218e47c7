//! Worked examples with values frozen from an independent 30-digit
//! computation (mpmath), not from this crate.

use std::sync::Arc;

use approx::assert_relative_eq;
use xplab::blocks::{functional_apply, make_rosenthal, Block};
use xplab::criteria::{check_thm13, extract_Ei, gen_thm13_witnesses};
use xplab::operators::{BlockProjection, BlockSystem, GramProjector, LinearOperator};
use xplab::splitter::solve_constants;
use xplab::weights::{induced_weights, rosenthal_diagnostic, WeightFamily};
use xplab::{SpVector, SupportSet, WeightedSpace};

fn two() -> Arc<WeightedSpace> {
    WeightedSpace::new(4.0, vec![1.0, 0.5]).unwrap()
}

fn vec2(space: &Arc<WeightedSpace>, a: f64, b: f64) -> SpVector {
    SpVector::new(space, [(1, a), (2, b)]).unwrap()
}

#[test]
fn norms_of_the_two_coordinate_example() {
    let x = vec2(&two(), 1.0, 2.0);
    assert_relative_eq!(x.norm_p(), 2.030_543_184_868_930_7, max_relative = 1e-15);
    assert_relative_eq!(x.norm_2w(), std::f64::consts::SQRT_2, max_relative = 1e-15);
    assert_eq!(x.xp_norm(), x.norm_p());
    assert_relative_eq!(
        x.ratio().unwrap(),
        0.696_470_566_551_570_8,
        max_relative = 1e-14
    );
}

#[test]
fn omega_and_inner_product() {
    let s = two();
    assert_eq!(s.omega(&SupportSet::range(1, 2)).unwrap(), 1.0625);
    let x = vec2(&s, 1.0, 2.0);
    let y = vec2(&s, 1.0, 1.0);
    assert_eq!(x.inner(&y).unwrap(), 1.5);
}

#[test]
fn extremal_block_on_two_coordinates() {
    let s = two();
    let r = make_rosenthal(&s, SupportSet::range(1, 2)).unwrap();
    let y = xplab::blocks::BlockFunctional::vector(&r);
    assert_eq!(y.entries(), &[(1, 1.0), (2, 0.5)]);
    assert_relative_eq!(y.norm_2w(), 1.030_776_406_404_415_1, max_relative = 1e-15);
    assert_relative_eq!(y.norm_p(), 1.015_271_592_434_465_4, max_relative = 1e-15);
    let e1 = SpVector::basis(&s, 1).unwrap();
    assert_relative_eq!(
        functional_apply(&r, &e1).unwrap(),
        0.941_176_470_588_235_3,
        max_relative = 1e-15
    );
}

#[test]
fn basis_vector_ratio_is_below_the_block_value() {
    let s = WeightedSpace::new(4.0, vec![0.5; 3]).unwrap();
    let e2 = SpVector::basis(&s, 2).unwrap();
    assert_relative_eq!(e2.ratio().unwrap(), 0.5, max_relative = 1e-15);
    let r = make_rosenthal(&s, SupportSet::range(1, 3)).unwrap();
    assert_relative_eq!(
        r.omega_ratio(),
        0.658_037_006_476_246_2,
        max_relative = 1e-14
    );
}

#[test]
fn single_block_projection() {
    let s = two();
    let r = make_rosenthal(&s, SupportSet::range(1, 2)).unwrap();
    // (1, 1/2) itself, not normalized, so built without the condition checks
    let y = xplab::blocks::BlockFunctional::vector(&r).clone();
    let b = Block::new_unchecked(y.support(), y, SupportSet::range(1, 2), 1.0, 1.0).unwrap();
    let w = induced_weights(&BlockSystem::new_unchecked(vec![b.clone()], 1.0, 1.0).unwrap());
    assert_relative_eq!(w[0], 1.015_271_592_434_465_4, max_relative = 1e-15);

    let p = BlockProjection::new(BlockSystem::new_unchecked(vec![b], 1.0, 1.0).unwrap());
    let px = p.apply(&vec2(&s, 1.0, 1.0)).unwrap();
    let t = 1.058_823_529_411_764_7;
    assert_relative_eq!(px.get(1), t, max_relative = 1e-15);
    assert_relative_eq!(px.get(2), t / 2.0, max_relative = 1e-15);
}

#[test]
fn orthogonal_projection_on_first_coordinate() {
    let s = two();
    let q = GramProjector::new(vec![SpVector::basis(&s, 1).unwrap()]).unwrap();
    let qx = q.project(&vec2(&s, 1.0, 1.0)).unwrap();
    assert_eq!(qx.entries(), &[(1, 1.0)]);
}

#[test]
fn constant_weight_witnesses_are_singletons() {
    let s = WeightedSpace::new(4.0, vec![0.5; 12]).unwrap();
    let ws = gen_thm13_witnesses(&s, 1.0, 1.0, 0.6, 3, 1, 2).unwrap();
    assert_eq!(ws.len(), 3);
    for (i, w) in ws.iter().enumerate() {
        assert_eq!(w.e.len(), 1);
        assert!(w.e.first().unwrap() > 2);
        assert_relative_eq!(w.eps_prime, 0.3, max_relative = 1e-15);
        assert!(check_thm13(w, 1e-9).unwrap().verdict);
        for v in &ws[i + 1..] {
            assert!(w.e.is_disjoint(&v.e));
        }
    }
}

#[test]
fn extraction_thresholds() {
    let y = vec2(&two(), 1.0, 2.0);
    let f = SupportSet::range(1, 2);
    assert_eq!(extract_Ei(&y, &f, 0.1).unwrap(), f);
    // thresholds rho w_j / sqrt 2 = (0.0707.., 0.0354..)
    let only_second = SupportSet::from(vec![2]);
    assert_eq!(
        extract_Ei(&y, &f, 2.0 * 2f64.sqrt() / 0.5 - 1e-9).unwrap(),
        only_second
    );
}

#[test]
fn split_constants_match_direct_substitution() {
    let k = solve_constants(0.5, 2.0, 0.4, 1.5, 1.2, 4.0).unwrap();
    assert_relative_eq!(k.beta, 0.1, max_relative = 1e-15);
    assert_relative_eq!(k.alpha, 0.085_294_117_647_058_83, max_relative = 1e-14);
    assert_relative_eq!(k.rho, 0.01, max_relative = 1e-14);
    assert_relative_eq!(k.eps_prime, 0.021_323_529_411_764_706, max_relative = 1e-14);

    let k = solve_constants(0.9, 1.0, 0.3, 3.0, 1.05, 3.0).unwrap();
    assert_relative_eq!(k.beta, 0.009_166_666_666_666_656, max_relative = 1e-13);
    assert_relative_eq!(k.alpha, 0.009_037_060_839_760_06, max_relative = 1e-13);
    assert_relative_eq!(k.rho, 7.702_546_296_296_27e-7, max_relative = 1e-12);
    assert_relative_eq!(k.eps_prime, 0.004_066_677_377_892_027, max_relative = 1e-13);
    assert_eq!(k.halvings, 0);
}

#[test]
fn geometric_weights_converge() {
    let fam = WeightFamily::Geometric { ratio: 0.5, d: 16 };
    let rows = rosenthal_diagnostic(&fam, 4.0, 1.0, &[8]).unwrap();
    assert_relative_eq!(rows[0].s, 0.066_666_666_651_144_62, max_relative = 1e-14);
    assert_relative_eq!(
        rows[0].s_double.unwrap(),
        0.066_666_666_666_666_67,
        max_relative = 1e-14
    );
    assert!(!rows[0].diverging);
}
