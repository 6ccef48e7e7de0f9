use proptest::prelude::*;
use uofdm::optim::*;
use uofdm::rates::{haco_asymptote, rate_aco_family, rate_multi};
use uofdm::scheme::{equal_allocation, geometric_allocation};
use uofdm::{ChannelSpec, Error};

fn ch(db: f64) -> ChannelSpec {
    ChannelSpec::from_snr_db(db)
}

#[test]
fn lambda_jumps() {
    let ado = find_lambda_jump(JumpScheme::Ado, 0.01).unwrap();
    let haco = find_lambda_jump(JumpScheme::Haco, 0.01).unwrap();
    assert!((ado - 5.71).abs() < 0.1, "ado jump at {ado}");
    assert!((haco - 3.36).abs() < 0.1, "haco jump at {haco}");
    // lambda* is zero below and clearly positive above
    assert_eq!(optimize_double_lambda(&ch(haco - 0.05)).lambda(), Some(0.0));
    assert!(optimize_double_lambda(&ch(haco + 0.05)).lambda().unwrap() > 0.2);
}

#[test]
fn aco_dco_crossover() {
    let x = find_crossover(
        |db| rate_aco_family(&ch(db)).value(),
        |db| optimize_dco(&ch(db)).rate.value(),
        0.0,
        20.0,
    )
    .unwrap();
    assert!((x - 9.0).abs() < 0.5, "{x}");
    assert!(rate_aco_family(&ch(x - 1.0)) > optimize_dco(&ch(x - 1.0)).rate);
    assert!(rate_aco_family(&ch(x + 1.0)) < optimize_dco(&ch(x + 1.0)).rate);
}

#[test]
fn double_lambda_high_snr() {
    for db in [50.0, 60.0] {
        let r = optimize_double_lambda(&ch(db));
        assert!((r.lambda().unwrap() - 1.0 / 3.0).abs() < 0.01);
        assert!((r.rate.value() - haco_asymptote(&ch(db))).abs() < 0.02);
    }
}

#[test]
fn crossover_without_sign_change() {
    let r = find_crossover(
        |db| rate_multi(&ch(db), &geometric_allocation(4)).unwrap().total.value(),
        |db| uofdm::rates::capacity_bounds(&ch(db - 1.0)).0.value(),
        30.0,
        70.0,
    );
    assert!(matches!(r, Err(Error::NotFound(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn multi_optimum_dominates_starts(db in 0.0f64..60.0, layers in 1usize..=6) {
        let c = ch(db);
        let r = optimize_multi(&c, layers).unwrap();
        let lambdas = r.lambdas().unwrap();
        prop_assert!(lambdas.iter().all(|l| *l >= 0.0));
        prop_assert!(lambdas.iter().sum::<f64>() <= 1.0 + 1e-12);
        let mut first = vec![0.0; layers];
        first[0] = 1.0;
        for start in [geometric_allocation(layers), equal_allocation(layers), first] {
            prop_assert!(r.rate >= rate_multi(&c, &start).unwrap().total);
        }
    }

    #[test]
    fn single_parameter_results_in_bounds(db in -10.0f64..60.0) {
        let c = ch(db);
        let ado = optimize_ado(&c);
        prop_assert!((0.0..=1.0).contains(&ado.lambda().unwrap()) && ado.nu().unwrap() > 0.0);
        prop_assert!(ado.rate >= rate_aco_family(&c));
        let h = optimize_double_lambda(&c);
        prop_assert!((0.0..=1.0).contains(&h.lambda().unwrap()));
        prop_assert!(h.rate >= rate_aco_family(&c));
    }
}
