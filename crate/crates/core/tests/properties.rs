use proptest::prelude::*;
use udep_core::kernels::{gram, KernelSpec};
use udep_core::measures::breve_gram;
use udep_core::pairs::{max_pairs, pair_budget, select_confounder, confounder_order};
use udep_core::{chsic, chsic_naive, hsic, PairSelection, SelectionMode};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn specs(x: &[f64], y: &[f64]) -> (KernelSpec, KernelSpec) {
    (KernelSpec::from_samples(x).unwrap(), KernelSpec::from_samples(y).unwrap())
}

/// Non-degenerate sample vectors: values in a modest range, not all equal.
fn samples(len: impl Into<prop::collection::SizeRange>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, len).prop_filter("constant", |v| {
        v.iter().any(|a| (a - v[0]).abs() > 1e-3)
    })
}

/// `(x, y, z)` of a shared length between 4 and 40.
fn triple() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (4usize..40).prop_flat_map(|n| (samples(n), samples(n), samples(n)))
}

fn distinct_gaps(z: &[f64]) -> bool {
    let order = confounder_order(z).unwrap();
    let g = order.gaps();
    g.windows(2).all(|w| w[0] != w[1])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn measures_are_nonnegative((x, y, z) in triple(), alpha in 1.0f64..3.0) {
        let (kx, ky) = specs(&x, &y);
        prop_assert!(hsic(&x, &y, &kx, &ky).unwrap().raw >= -1e-12);
        let sel = PairSelection::by_confounder(&z, alpha).unwrap();
        prop_assert!(chsic(&x, &y, &sel, &kx, &ky).unwrap().raw >= -1e-12);
    }

    #[test]
    fn swapping_arguments_is_exact((x, y, z) in triple(), alpha in 1.0f64..3.0) {
        let (kx, ky) = specs(&x, &y);
        prop_assert_eq!(hsic(&x, &y, &kx, &ky).unwrap().raw, hsic(&y, &x, &ky, &kx).unwrap().raw);
        let sel = PairSelection::by_confounder(&z, alpha).unwrap();
        prop_assert_eq!(
            chsic(&x, &y, &sel, &kx, &ky).unwrap().raw,
            chsic(&y, &x, &sel, &ky, &kx).unwrap().raw
        );
    }

    #[test]
    fn hsic_shift_invariant((x, y, _z) in triple(), b in -10.0f64..10.0) {
        let (kx, ky) = specs(&x, &y);
        let shifted: Vec<f64> = x.iter().map(|v| v + b).collect();
        let ks = KernelSpec::from_samples(&shifted).unwrap();
        let h0 = hsic(&x, &y, &kx, &ky).unwrap().raw;
        let h1 = hsic(&shifted, &y, &ks, &ky).unwrap().raw;
        prop_assert!((h0 - h1).abs() <= 1e-12 * h0.abs().max(1e-3), "{} vs {}", h0, h1);
    }

    #[test]
    fn hsic_scale_invariant((x, y, _z) in triple(), a in prop_oneof![-20.0f64..-0.05, 0.05f64..20.0]) {
        let (kx, ky) = specs(&x, &y);
        let scaled: Vec<f64> = x.iter().map(|v| a * v).collect();
        let ks = KernelSpec::from_samples(&scaled).unwrap();
        let h0 = hsic(&x, &y, &kx, &ky).unwrap().raw;
        let h1 = hsic(&scaled, &y, &ks, &ky).unwrap().raw;
        prop_assert!((h0 - h1).abs() <= 1e-12 * h0.abs().max(1e-3), "{} vs {}", h0, h1);
    }

    #[test]
    fn chsic_invariant_under_affine_confounder(
        (x, y, z) in triple(),
        a in prop_oneof![-8.0f64..-0.125, 0.125f64..8.0],
        b in -10.0f64..10.0,
        alpha in 1.0f64..3.0,
    ) {
        prop_assume!(distinct_gaps(&z));
        let moved: Vec<f64> = z.iter().map(|v| a * v + b).collect();
        prop_assume!(distinct_gaps(&moved));
        let (kx, ky) = specs(&x, &y);
        let s0 = PairSelection::by_confounder(&z, alpha).unwrap();
        let s1 = PairSelection::by_confounder(&moved, alpha).unwrap();
        let mut p0: Vec<_> = s0.pairs().collect();
        let mut p1: Vec<_> = s1.pairs().collect();
        p0.sort_unstable();
        p1.sort_unstable();
        prop_assert_eq!(p0, p1);
        let c0 = chsic(&x, &y, &s0, &kx, &ky).unwrap().raw;
        let c1 = chsic(&x, &y, &s1, &kx, &ky).unwrap().raw;
        prop_assert!((c0 - c1).abs() <= 1e-12 * c0.abs().max(1e-3));
    }

    #[test]
    fn joint_permutation_invariance((x, y, z) in triple(), seed in any::<u64>(), alpha in 1.0f64..3.0) {
        use rand::seq::SliceRandom;
        let mut perm: Vec<usize> = (0..x.len()).collect();
        perm.shuffle(&mut udep_core::seed::rng(seed));
        let px: Vec<f64> = perm.iter().map(|&i| x[i]).collect();
        let py: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
        let pz: Vec<f64> = perm.iter().map(|&i| z[i]).collect();
        let (kx, ky) = specs(&x, &y);
        let (pkx, pky) = specs(&px, &py);
        let h0 = hsic(&x, &y, &kx, &ky).unwrap().raw;
        let h1 = hsic(&px, &py, &pkx, &pky).unwrap().raw;
        prop_assert!((h0 - h1).abs() <= 1e-12 * h0.abs().max(1e-3));
        if distinct_gaps(&z) {
            let c0 = chsic(&x, &y, &PairSelection::by_confounder(&z, alpha).unwrap(), &kx, &ky).unwrap().raw;
            let c1 = chsic(&px, &py, &PairSelection::by_confounder(&pz, alpha).unwrap(), &pkx, &pky).unwrap().raw;
            prop_assert!((c0 - c1).abs() <= 1e-12 * c0.abs().max(1e-3));
        }
    }

    #[test]
    fn naive_and_fast_chsic_agree((x, y, z) in triple(), frac in 0.0f64..1.0, seed in any::<u64>(), random in any::<bool>()) {
        let len = x.len();
        let k = 1 + ((max_pairs(len).min(64) - 1) as f64 * frac) as usize;
        let sel = if random {
            udep_core::pairs::select_random(len, k, seed).unwrap()
        } else {
            select_confounder(&confounder_order(&z).unwrap(), k).unwrap()
        };
        let (kx, ky) = specs(&x, &y);
        let fast = chsic(&x, &y, &sel, &kx, &ky).unwrap().raw;
        let slow = chsic_naive(&x, &y, &sel, &kx, &ky).unwrap().raw;
        prop_assert!((fast - slow).abs() <= 1e-12 * fast.abs().max(slow.abs()).max(1e-3), "{} vs {}", fast, slow);
    }

    #[test]
    fn chsic_self_dependence_is_positive((x, _y, z) in triple(), alpha in 1.0f64..3.0) {
        let k = KernelSpec::from_samples(&x).unwrap();
        let sel = PairSelection::by_confounder(&z, alpha).unwrap();
        prop_assert!(chsic(&x, &x, &sel, &k, &k).unwrap().raw > 0.0);
    }

    #[test]
    fn selection_invariants(z in samples(2..60), alpha in 1.0f64..59.0, seed in any::<u64>()) {
        let len = z.len();
        let alpha = alpha.min((len - 1) as f64);
        let k = pair_budget(len, alpha).unwrap();
        prop_assert!(k >= 1 && k <= max_pairs(len));
        for sel in [
            PairSelection::by_confounder(&z, alpha).unwrap(),
            PairSelection::by_random(len, alpha, seed).unwrap(),
        ] {
            prop_assert_eq!(sel.len(), k);
            prop_assert_eq!(sel.alpha(), Some(alpha));
            let mut seen = std::collections::HashSet::new();
            for (a, b) in sel.pairs() {
                prop_assert!(a < b && b < len);
                prop_assert!(seen.insert((a, b)));
            }
        }
    }

    #[test]
    fn confounder_pairs_are_the_closest(z in samples(2..40), alpha in 1.0f64..39.0) {
        let len = z.len();
        let alpha = alpha.min((len - 1) as f64);
        let sel = PairSelection::by_confounder(&z, alpha).unwrap();
        let kept: std::collections::HashSet<_> = sel.pairs().collect();
        let worst_kept = kept.iter().map(|&(a, b)| (z[a] - z[b]).abs()).fold(0.0, f64::max);
        for i in 0..len {
            for j in i + 1..len {
                if !kept.contains(&(i, j)) {
                    prop_assert!((z[i] - z[j]).abs() >= worst_kept);
                }
            }
        }
    }

    #[test]
    fn larger_budget_extends_selection(z in samples(3..40), a1 in 1.0f64..38.0, a2 in 1.0f64..38.0) {
        let cap = (z.len() - 1) as f64;
        let (lo, hi) = (a1.min(a2).min(cap), a1.max(a2).min(cap));
        let small: Vec<_> = PairSelection::by_confounder(&z, lo).unwrap().pairs().collect();
        let big: Vec<_> = PairSelection::by_confounder(&z, hi).unwrap().pairs().collect();
        prop_assert!(small.len() <= big.len());
        prop_assert_eq!(&big[..small.len()], &small[..]);
    }

    #[test]
    fn complete_selection_mode(z in samples(2..30)) {
        let sel = PairSelection::by_confounder(&z, (z.len() - 1) as f64).unwrap();
        prop_assert_eq!(sel.mode(), SelectionMode::Complete);
        prop_assert_eq!(sel.len(), max_pairs(z.len()));
    }

    #[test]
    fn gram_transpose_is_exact(r in samples(1..30), c in samples(1..30), bw in 0.05f64..5.0) {
        let spec = KernelSpec::gaussian(bw).unwrap();
        prop_assert_eq!(gram(&r, &c, &spec).unwrap().transpose(), gram(&c, &r, &spec).unwrap());
    }

    #[test]
    fn gram_shift_is_exact_on_dyadic_grid(
        r in prop::collection::vec(-256i32..256, 1..20),
        c in prop::collection::vec(-256i32..256, 1..20),
        b in -1024i32..1024,
    ) {
        // Multiples of 1/8 with small magnitude add without rounding.
        let spec = KernelSpec::gaussian(1.7).unwrap();
        let f = |v: &[i32], t: i32| v.iter().map(|&a| (a + t) as f64 / 8.0).collect::<Vec<_>>();
        prop_assert_eq!(gram(&f(&r, b), &f(&c, b), &spec).unwrap(), gram(&f(&r, 0), &f(&c, 0), &spec).unwrap());
    }

    #[test]
    fn gram_scale_with_recomputed_bandwidth(r in samples(2..30), a in prop_oneof![-50.0f64..-0.02, 0.02f64..50.0]) {
        let scaled: Vec<f64> = r.iter().map(|v| a * v).collect();
        let g0 = gram(&r, &r, &KernelSpec::from_samples(&r).unwrap()).unwrap();
        let g1 = gram(&scaled, &scaled, &KernelSpec::from_samples(&scaled).unwrap()).unwrap();
        for (u, v) in g0.as_slice().iter().zip(g1.as_slice()) {
            prop_assert!((u - v).abs() <= 1e-12);
        }
    }

    #[test]
    fn breve_gram_structure(z in samples(3..30), x in samples(30), alpha in 1.0f64..3.0) {
        let x = &x[..z.len()];
        prop_assume!(x.iter().any(|v| (v - x[0]).abs() > 1e-3));
        let sel = PairSelection::by_confounder(&z, alpha.min((z.len() - 1) as f64)).unwrap();
        let b = breve_gram(x, &sel, &KernelSpec::from_samples(x).unwrap()).unwrap();
        for k in 0..b.size() {
            prop_assert!((0.0..=4.0).contains(&b.get(k, k)));
            for k2 in 0..b.size() {
                prop_assert_eq!(b.get(k, k2), b.get(k2, k));
            }
        }
    }
}

#[test]
fn hsic_closed_form_at_two_samples() {
    let (x, y) = ([0.3, -1.2], [2.0, 0.5]);
    let (kx, ky) = (KernelSpec::gaussian(0.8).unwrap(), KernelSpec::gaussian(1.3).unwrap());
    let expected = (1.0 - kx.eval(x[0] - x[1])) * (1.0 - ky.eval(y[0] - y[1]));
    assert!(rel(hsic(&x, &y, &kx, &ky).unwrap().raw, expected) < 1e-14);
}
