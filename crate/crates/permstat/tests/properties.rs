//! Randomised invariants over permutations of size up to 10.

use permstat::distribution::{joint_distribution_jobs, Polynomial3};
use permstat::forward::{adjust_capacities, compute_c0};
use permstat::inverse::decompose;
use permstat::render::{ascii_labels, linear_diagram, planar_diagram};
use permstat::stats::*;
use permstat::{phi, phi_inverse, Error, Permutation, StatVector};
use proptest::prelude::*;

fn perm(max_n: usize) -> impl Strategy<Value = Permutation> {
    (1..=max_n)
        .prop_flat_map(|n| Just((1..=n).collect::<Vec<_>>()).prop_shuffle())
        .prop_map(|w| Permutation::new(w).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn text_round_trip(p in perm(12)) {
        prop_assert_eq!(p.to_string().parse::<Permutation>().unwrap(), p.clone());
        if let Some(d) = p.to_digits() {
            prop_assert_eq!(d.parse::<Permutation>().unwrap(), p.clone());
        }
        prop_assert!(p.compose(&p.inverse()).unwrap().is_identity());
    }

    #[test]
    fn stat_bounds(p in perm(10)) {
        let n = p.len();
        for v in StatVector::ALL {
            let t = stat_vector(&p, v);
            prop_assert!(t.x <= n * (n - 1) / 2 && t.y <= n && t.z < n.max(1), "{:?} {}", t, p);
        }
        prop_assert!(des2(&p) <= des(&p));
        prop_assert!(des2_tilde(&p) == des2(&p) || des2_tilde(&p) == des2(&p) + 1);
        prop_assert_eq!(asc2_tilde(&p), asc2(&p) + usize::from(p.at(1) != 1));
        prop_assert_eq!(ides(&p), des(&p.inverse()));
        let inv2 = two_inversion_set(&p);
        prop_assert!(inv2.pairs.iter().all(|&(i, j)| i < j && p.at(i) == p.at(j) + 1));
        prop_assert!(inv2.beginnings().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn forward_preserves_triple(p in perm(10)) {
        let t = phi(&p).unwrap();
        prop_assert_eq!(
            stat_vector(&t, StatVector::Rhs).as_tuple(),
            stat_vector(&p, StatVector::Lhs).as_tuple(),
            "{} -> {}", p, t
        );
    }

    #[test]
    fn capacities_respect_block_bounds(p in perm(10)) {
        let c0 = compute_c0(&p).unwrap();
        prop_assert_eq!(c0.total(), inv2(&p));
        prop_assert!(c0.check_bounds().is_ok(), "{} {:?}", p, c0.values);
        let c = adjust_capacities(&p, &c0).unwrap();
        prop_assert_eq!(c.total(), inv2(&p));
        prop_assert!(c.check_bounds().is_ok(), "{} {:?}", p, c.values);
        let t = phi(&p).unwrap();
        prop_assert_eq!(decompose(&t).c_tau, c.values);
    }

    #[test]
    fn inverse_is_never_wrong(p in perm(8)) {
        let t = phi(&p).unwrap();
        match phi_inverse(&t) {
            Ok(s) => prop_assert_eq!(phi(&s).unwrap(), t),
            Err(e) => prop_assert!(matches!(e, Error::Inconsistent(_) | Error::RoundTrip { .. }), "{}", e),
        }
    }

    #[test]
    fn diagrams_match_statistics(p in perm(11)) {
        let lin = linear_diagram(&p);
        prop_assert_eq!((lin.arc_count(), lin.box_count()), (inv2(&p), des2(&p)));
        let pl = planar_diagram(&p);
        prop_assert_eq!(pl.circled_count(), exc(&p));
        let ys: Vec<usize> = pl.vertices().map(|v| v.1).collect();
        for i in 1..p.len() {
            prop_assert_eq!(ys[i] > ys[i - 1], p.at(i) < p.at(i + 1));
        }
        prop_assert_eq!(ascii_labels(&lin.to_ascii()), p.word().to_vec());
        prop_assert_eq!(ascii_labels(&pl.to_ascii()), p.word().to_vec());
    }
}

#[test]
fn merge_is_order_independent() {
    let parts: Vec<Polynomial3> =
        (1..=4).map(|j| joint_distribution_jobs(5, StatVector::Lhs, j).unwrap()).collect();
    for w in parts.windows(2) {
        assert_eq!(w[0], w[1]);
    }
    let mut a = parts[0].clone();
    a.merge(parts[1].clone());
    let mut b = parts[1].clone();
    b.merge(parts[0].clone());
    assert_eq!(a, b);
}
