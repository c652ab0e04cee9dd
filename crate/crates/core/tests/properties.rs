use proptest::prelude::*;

use plaid::partition::{enumerate_partitions, Partition};
use plaid::posterior::{ari, ecr_relabel_labels, nfd, similarity_matrix, vi_distance};
use plaid::processes::stick_weights;
use plaid::sampler::{active_atoms, xi, ChainTrace};
use plaid::simgen::truth_similarity;
use plaid::theory::{fsbp_eppf, fsbp_new_cluster_prob, new_cluster_recursive, FsbpParams};
use plaid::workbench::io::{fmt_f64, parse_f64};

fn labels(n: std::ops::Range<usize>, k: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..k, n)
}

fn pair(n: usize, k: usize) -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (prop::collection::vec(0..k, n), prop::collection::vec(0..k, n))
}

/// ARI from explicit pair enumeration.
fn ari_pairs(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut both, mut only_a, mut only_b, mut total) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let sa = a[i] == a[j];
            let sb = b[i] == b[j];
            total += 1.0;
            both += f64::from(u8::from(sa && sb));
            only_a += f64::from(u8::from(sa));
            only_b += f64::from(u8::from(sb));
        }
    }
    let expected = only_a * only_b / total;
    let max = 0.5 * (only_a + only_b);
    (both - expected) / (max - expected)
}

fn trace_from(z: Vec<Vec<usize>>) -> ChainTrace {
    let n = z[0].len();
    ChainTrace { model: "test".into(), group_sizes: vec![n], z, ..Default::default() }
}

proptest! {
    #[test]
    fn ari_matches_pair_counting((a, b) in (2usize..30).prop_flat_map(|n| pair(n, 5))) {
        let pa = Partition::from_labels(&a);
        let pb = Partition::from_labels(&b);
        let direct = ari_pairs(&a, &b);
        prop_assume!(direct.is_finite());
        prop_assert!((ari(&pa, &pb).unwrap() - direct).abs() < 1e-10);
    }

    #[test]
    fn ari_symmetric_and_label_free((a, b) in (2usize..30).prop_flat_map(|n| pair(n, 4)), shift in 1usize..7) {
        let pa = Partition::from_labels(&a);
        let pb = Partition::from_labels(&b);
        let renamed: Vec<usize> = b.iter().map(|&l| (l + shift) * 3).collect();
        let pr = Partition::from_labels(&renamed);
        prop_assert_eq!(ari(&pa, &pb).unwrap(), ari(&pb, &pa).unwrap());
        prop_assert_eq!(ari(&pa, &pb).unwrap(), ari(&pa, &pr).unwrap());
        prop_assert_eq!(ari(&pa, &pa).unwrap(), 1.0);
    }

    #[test]
    fn vi_is_a_metric((a, b, c) in (1usize..25).prop_flat_map(|n| (labels(n..n + 1, 4), labels(n..n + 1, 4), labels(n..n + 1, 4)))) {
        let (pa, pb, pc) = (Partition::from_labels(&a), Partition::from_labels(&b), Partition::from_labels(&c));
        let ab = vi_distance(&pa, &pb).unwrap();
        prop_assert!(vi_distance(&pa, &pa).unwrap().abs() < 1e-12);
        prop_assert!((ab - vi_distance(&pb, &pa).unwrap()).abs() < 1e-12);
        prop_assert!(ab >= -1e-12);
        prop_assert!(ab <= (a.len() as f64).ln() + 1e-12);
        prop_assert!(ab <= vi_distance(&pa, &pc).unwrap() + vi_distance(&pc, &pb).unwrap() + 1e-12);
    }

    #[test]
    fn nfd_zero_on_diagonal(a in labels(1..30, 6)) {
        let s = truth_similarity(&Partition::from_labels(&a));
        prop_assert_eq!(nfd(&s, &s).unwrap(), 0.0);
    }

    #[test]
    fn psm_is_a_similarity(z in (1usize..15).prop_flat_map(|n| prop::collection::vec(labels(n..n + 1, 4), 1..20))) {
        let t = z.len() as f64;
        let psm = similarity_matrix(&trace_from(z.clone())).unwrap();
        let n = z[0].len();
        for i in 0..n {
            prop_assert_eq!(psm[(i, i)], 1.0);
            for j in 0..n {
                prop_assert_eq!(psm[(i, j)], psm[(j, i)]);
                let hits = z.iter().filter(|zt| zt[i] == zt[j]).count() as f64;
                prop_assert!((psm[(i, j)] - hits / t).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ecr_keeps_every_partition(z in (1usize..15).prop_flat_map(|n| prop::collection::vec(labels(n..n + 1, 5), 1..10))) {
        let perms = ecr_relabel_labels(&z, 0).unwrap();
        for (zt, perm) in z.iter().zip(&perms) {
            let moved: Vec<usize> = zt.iter().map(|&l| perm[l]).collect();
            prop_assert_eq!(Partition::from_labels(&moved), Partition::from_labels(zt));
        }
        let ref_moved: Vec<usize> = z[0].iter().map(|&l| perms[0][l]).collect();
        prop_assert_eq!(&ref_moved, &z[0]);
    }

    #[test]
    fn stick_weights_are_subprobabilities(f in prop::collection::vec(prop_oneof![Just(0.0), 0.0..1.0f64], 0..40)) {
        let w = stick_weights(&f);
        prop_assert!(w.iter().all(|&x| x >= 0.0));
        prop_assert!(w.iter().sum::<f64>() <= 1.0 + 1e-12);
        for (wi, fi) in w.iter().zip(&f) {
            if *fi == 0.0 {
                prop_assert_eq!(*wi, 0.0);
            }
        }
    }

    #[test]
    fn eppf_normalized_and_exchangeable(p in 0.05..0.95f64, g in 0.2..3.0f64, n in 2usize..6, seed in 0u64..1000) {
        let prm = FsbpParams::new(p, g).unwrap();
        let parts = enumerate_partitions(n);
        let total: f64 = parts.iter().map(|q| fsbp_eppf(q, &prm).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.rotate_left(seed as usize % n);
        perm.swap(0, (seed as usize / n) % n);
        for q in &parts {
            let a = fsbp_eppf(q, &prm).unwrap();
            let b = fsbp_eppf(&q.permute(&perm), &prm).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
        }
    }

    #[test]
    fn new_cluster_routes_agree(p in 0.05..0.95f64, g in 0.2..3.0f64) {
        let prm = FsbpParams::new(p, g).unwrap();
        let rec = new_cluster_recursive(20, &prm).unwrap();
        for (idx, r) in rec.iter().enumerate() {
            let i = idx + 2;
            let closed = fsbp_new_cluster_prob(i, &prm).unwrap();
            prop_assert!(((closed - r) / r).abs() < 1e-9, "i={} {} vs {}", i, closed, r);
            prop_assert!(*r > g / (g + i as f64 - 1.0));
        }
    }

    #[test]
    fn float_text_round_trip(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        let back = parse_f64(&fmt_f64(x), "x").unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn active_atoms_is_the_slice_count(zeta in 0.05..0.95f64, u in 1e-12..0.99f64) {
        let k = active_atoms(zeta, u);
        prop_assert!(k >= 1);
        for l in 0..k.saturating_sub(1) {
            prop_assert!(xi(zeta, l) > u);
        }
        prop_assert!(xi(zeta, k) <= u);
        if k > 1 {
            prop_assert!(xi(zeta, k - 1) > u);
        }
    }
}
