use std::f64::consts::LN_2;

use privamp::amplification::{amplified_epsilon, GroupProfiles, NeighborRelation, SubsamplingScheme};
use privamp::oracle::scenario::load_scenarios;
use privamp::oracle::{
    check_bound, empirical_group_profiles, enumerate_subsamples, exact_subsampled_divergence, membership_kernel,
    subsample_domain, Dataset, MechanismKernel, Universe,
};
use privamp::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn poisson_membership_by_hand() {
    let u = Universe::new(["a", "b"]).unwrap();
    let x = Dataset::from_elements(&u, &["a", "b"]).unwrap();
    let xp = Dataset::from_elements(&u, &["a"]).unwrap();
    let scheme = SubsamplingScheme::Poisson { gamma: 0.3 };
    let kernel = membership_kernel("b", 0.8).unwrap();
    // Pr[1] is 0.3·0.8 + 0.7·0.2 = 0.38 under x and 0.2 under x'.
    let alpha = amplified_epsilon(0.3, LN_2).unwrap().exp();
    let d = exact_subsampled_divergence(&scheme, &kernel, &x, &xp, alpha).unwrap();
    assert!((d - (0.38 - 1.3 * 0.2)).abs() < 1e-15);
    assert!((d - 0.12).abs() < 1e-15);
}

#[test]
fn random_wor_kernels_are_dominated() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u = Universe::indexed(4).unwrap();
    let x = Dataset::from_elements(&u, &["u0", "u1", "u2"]).unwrap();
    let xp = Dataset::from_elements(&u, &["u0", "u1", "u3"]).unwrap();
    let scheme = SubsamplingScheme::Wor { n: 3, m: 2 };
    let domain = subsample_domain(&scheme, &u).unwrap();
    for _ in 0..20 {
        let kernel = MechanismKernel::random(&domain, 3, &mut rng).unwrap();
        let groups =
            GroupProfiles::Explicit(empirical_group_profiles(&kernel, &domain, NeighborRelation::Substitute, 1).unwrap());
        for eps in [0.0, 0.3, 1.0] {
            let r = check_bound(&scheme, NeighborRelation::Substitute, &kernel, &groups, &x, &xp, eps).unwrap();
            assert!(r.gap >= -1e-10, "{r:?}");
        }
    }
}

#[test]
fn scenario_array_runs_every_entry() {
    let text = r#"[
        {"name": "p", "universe": ["a", "b", "c"], "x": ["a", "b", "c"], "x_prime": ["a", "b"],
         "scheme": {"kind": "poisson", "gamma": 0.5}, "relation": "remove-add", "p": 0.9, "epsilons": [0, 1]},
        {"name": "w", "universe": ["a", "b", "c"], "x": ["a", "b"], "x_prime": ["a", "c"],
         "scheme": {"kind": "wr", "n": 2, "m": 3}, "relation": "substitute", "p": 0.6, "epsilons": [0.5]}
    ]"#;
    let scenarios = load_scenarios(text).unwrap();
    let rows: Vec<_> = scenarios.iter().flat_map(|s| s.run().unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.gap.abs() < 1e-12));
}

#[test]
fn oversized_instances_are_refused() {
    let u = Universe::indexed(17).unwrap();
    let names: Vec<String> = u.names().to_vec();
    let x = Dataset::from_elements(&u, &names).unwrap();
    let err = enumerate_subsamples(&SubsamplingScheme::Poisson { gamma: 0.5 }, &x).unwrap_err();
    assert!(matches!(err, Error::InstanceTooLarge { .. }), "{err:?}");
}
