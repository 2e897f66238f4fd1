mod common;

use ncopy::criteria::{
    eta_a_bound, eta_b_bound, necessity_check, threshold_bounds, transposition_bounds,
};
use ncopy::eigen::{hermitian_min_eig, is_psd, min_eigenvalue};
use ncopy::extension::{
    apply_sym_extension, critical_eta_b, implementable, min_copies, sym_extension_choi,
};
use ncopy::maps::{
    choi_map_3, depolarizing_to, identity_map, mix, noisy_a, noisy_b, transposition_map, LinearMap,
};
use ncopy::mapspec::MapSpec;
use ncopy::tensor::{
    conjugate_by, permutation_operator, Limits, RectOperator, TensorOperator, C64,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn lim() -> Limits {
    Limits::default()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<usize>>()).prop_shuffle()
}

/// Positive maps on qubits or qutrits: transpositions, the Choi map, and
/// nonnegative combinations of them with the identity and white noise.
fn positive_map() -> impl Strategy<Value = (String, LinearMap)> {
    (0usize..4, 0.0f64..1.0, 0.0f64..1.0).prop_map(|(kind, p, q)| {
        let (name, base) = match kind {
            0 => ("T2", transposition_map(2).unwrap()),
            1 => ("T3", transposition_map(3).unwrap()),
            2 => ("choi3", choi_map_3()),
            _ => ("choi3/2+T3/2", mix(&[choi_map_3(), transposition_map(3).unwrap()], &[0.5, 0.5]).unwrap()),
        };
        let d = base.d_in();
        let m = mix(
            &[base, identity_map(d).unwrap(), depolarizing_to(d, d, 1.0).unwrap()],
            &[1.0 - p, p * (1.0 - q), p * q],
        )
        .unwrap();
        (format!("{name} p={p:.3} q={q:.3}"), m)
    })
}

fn max_diff(a: &TensorOperator, b: &TensorOperator) -> f64 {
    a.max_abs_diff(b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kron_is_associative(seed in any::<u64>(), da in 1usize..4, db in 1usize..4, dc in 1usize..3) {
        let mut r = rng(seed);
        let a = common::random_matrix(&[da], &mut r);
        let b = common::random_matrix(&[db], &mut r);
        let c = common::random_matrix(&[dc], &mut r);
        let left = a.kron(&b, &lim()).unwrap().kron(&c, &lim()).unwrap();
        let right = a.kron(&b.kron(&c, &lim()).unwrap(), &lim()).unwrap();
        prop_assert_eq!(left.dims(), right.dims());
        prop_assert!(max_diff(&left, &right) <= 1e-13 * left.max_abs().max(1.0));
    }

    #[test]
    fn partial_trace_keeps_total_trace(seed in any::<u64>(), dims in prop::collection::vec(1usize..4, 1..4), mask in any::<u8>()) {
        let mut r = rng(seed);
        let x = common::random_hermitian(&dims, &mut r);
        let all: Vec<usize> = (0..dims.len()).collect();
        prop_assert!(max_diff(&x.partial_trace(&all).unwrap(), &x) == 0.0);
        let keep: Vec<usize> = all.iter().copied().filter(|k| mask >> k & 1 == 1).collect();
        let reduced = x.partial_trace(&keep).unwrap();
        prop_assert!((reduced.trace() - x.trace()).norm() <= 1e-12 * x.max_abs().max(1.0) * x.side() as f64);
    }

    #[test]
    fn permutations_are_unitary_and_compose(p in permutation(4), q in permutation(4), d in 1usize..4) {
        let dims = vec![d; 4];
        let pp = permutation_operator(&dims, &p).unwrap();
        let qq = permutation_operator(&dims, &q).unwrap();
        let eye = TensorOperator::identity(&dims).unwrap();
        prop_assert!(max_diff(&pp.matmul(&pp.adjoint()).unwrap(), &eye) <= 1e-12);
        // applying p then q sends factor j to q[p[j]]
        let composed: Vec<usize> = p.iter().map(|&x| q[x]).collect();
        let direct = permutation_operator(&dims, &composed).unwrap();
        prop_assert!(max_diff(&qq.matmul(&pp).unwrap(), &direct) <= 1e-12);
    }

    #[test]
    fn min_eigenvalue_bounds_rayleigh_quotients(seed in any::<u64>(), n in 1usize..12) {
        let mut r = rng(seed);
        let x = common::random_hermitian(&[n], &mut r);
        let m = hermitian_min_eig(&x, 1e-9, &lim()).unwrap();
        let scale = x.norm_inf().max(1.0);
        for _ in 0..100 {
            let v: Vec<C64> = (0..n).map(|_| common::gaussian(&mut r)).collect();
            let nrm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            let rq = x.expectation(&v).unwrap().re / nrm;
            prop_assert!(rq >= m.value - 1e-9 * scale);
        }
        let xv = x.apply(m.vector.amps()).unwrap();
        let resid: f64 = xv.iter().zip(m.vector.amps()).map(|(a, b)| (a - b * m.value).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(resid <= 1e-8 * scale);
    }

    #[test]
    fn congruence_preserves_psd(seed in any::<u64>(), rows in 1usize..5, cols in 1usize..7) {
        let mut r = rng(seed);
        let x = common::random_psd(&[cols], &mut r);
        let data = (0..rows * cols).map(|_| common::gaussian(&mut r)).collect();
        let v = RectOperator::new(vec![rows], vec![cols], data).unwrap();
        let y = conjugate_by(&v, &x).unwrap().hermitian_part();
        let tol = 1e-9 * y.norm_inf().max(1.0);
        prop_assert!(is_psd(&y, tol, &lim()).unwrap());
    }

    #[test]
    fn choi_round_trip_and_linearity(seed in any::<u64>(), (_, m) in positive_map()) {
        let d = m.d_in();
        let mut rebuilt = TensorOperator::zeros(&[d, m.d_out()]).unwrap();
        for i in 0..d {
            for j in 0..d {
                let out = m.apply(&TensorOperator::matrix_unit(d, i, j).unwrap()).unwrap();
                for a in 0..m.d_out() {
                    for b in 0..m.d_out() {
                        rebuilt.set(i * m.d_out() + a, j * m.d_out() + b, out.get(a, b));
                    }
                }
            }
        }
        prop_assert!(max_diff(&rebuilt, m.choi()) <= 1e-12);

        let mut r = rng(seed);
        let x = common::random_matrix(&[d], &mut r);
        let y = common::random_matrix(&[d], &mut r);
        let (al, be) = (common::gaussian(&mut r), common::gaussian(&mut r));
        let mut combo = x.scale_c(al);
        combo.add_scaled(&y, be).unwrap();
        let mut want = m.apply(&x).unwrap().scale_c(al);
        want.add_scaled(&m.apply(&y).unwrap(), be).unwrap();
        prop_assert!(max_diff(&m.apply(&combo).unwrap(), &want) <= 1e-12 * want.max_abs().max(1.0));
    }

    #[test]
    fn noise_keeps_trace_preservation(eta in 0.0f64..=1.0, p in 0.0f64..=1.0, d in 2usize..4) {
        let m = mix(&[transposition_map(d).unwrap(), identity_map(d).unwrap()], &[p, 1.0 - p]).unwrap();
        prop_assert!(noisy_a(&m, eta).unwrap().is_trace_preserving(1e-11));
        prop_assert!(noisy_b(&m, eta).unwrap().is_trace_preserving(1e-11));
    }

    #[test]
    fn extension_is_exact_on_powers(seed in any::<u64>(), (_, m) in positive_map(), n in 1usize..4) {
        let mut r = rng(seed);
        let ext = sym_extension_choi(&m, n, &lim()).unwrap();
        let rho = common::random_density(m.d_in(), &mut r);
        let want = m.apply(&rho).unwrap();
        let copies = vec![rho; n];
        prop_assert!(max_diff(&apply_sym_extension(&m, &copies).unwrap(), &want) <= 1e-12);
        prop_assert!(max_diff(&ext.evaluate_product(&copies).unwrap(), &want) <= 1e-11);
    }

    #[test]
    fn extension_is_permutation_invariant((_, m) in positive_map(), perm in permutation(3)) {
        let ext = sym_extension_choi(&m, 3, &lim()).unwrap();
        let mut full = vec![0];
        full.extend(perm.iter().map(|p| p + 1));
        let moved = ext.op().permute_factors(&full).unwrap();
        prop_assert!(max_diff(&moved, ext.op()) <= 1e-11);
        prop_assert!(ext.op().hermitian_deviation() <= 1e-11);
    }

    #[test]
    fn trace_preservation_is_inherited(eta in 0.0f64..=1.0, d in 2usize..4, n in 1usize..4) {
        let m = noisy_a(&transposition_map(d).unwrap(), eta).unwrap();
        let op = sym_extension_choi(&m, n, &lim()).unwrap().into_op();
        let keep: Vec<usize> = (1..=n).collect();
        let eye = TensorOperator::identity(&vec![d; n]).unwrap();
        prop_assert!(max_diff(&op.partial_trace(&keep).unwrap(), &eye) <= 1e-11);
    }

    #[test]
    fn lambda_min_is_monotone_in_copies((name, m) in positive_map()) {
        let n_max = if m.d_in() == 2 { 5 } else { 4 };
        let mut prev = f64::NEG_INFINITY;
        for n in 1..=n_max {
            let lam = min_eigenvalue(sym_extension_choi(&m, n, &lim()).unwrap().op(), &lim()).unwrap();
            prop_assert!(lam >= prev - 1e-9, "{}: N={} {} after {}", name, n, lam, prev);
            prev = lam;
        }
    }

    #[test]
    fn cp_maps_are_implementable(d in 1usize..4, scale in 0.0f64..2.0, n in 1usize..4) {
        prop_assert!(implementable(&identity_map(d).unwrap(), n, 1e-9, &lim()).unwrap().psd);
        prop_assert!(implementable(&depolarizing_to(d, d, scale).unwrap(), n, 1e-9, &lim()).unwrap().psd);
    }

    #[test]
    fn closed_form_bounds_are_sufficient((name, m) in positive_map(), n in 1usize..4) {
        let eb = eta_b_bound(m.d_in(), n).unwrap();
        let ea = eta_a_bound(m.d_out(), m.d_in(), n).unwrap();
        let lb = min_eigenvalue(sym_extension_choi(&noisy_b(&m, eb).unwrap(), n, &lim()).unwrap().op(), &lim()).unwrap();
        let la = min_eigenvalue(sym_extension_choi(&noisy_a(&m, ea).unwrap(), n, &lim()).unwrap().op(), &lim()).unwrap();
        prop_assert!(lb >= -1e-9, "{}: input noise N={} lambda_min={}", name, n, lb);
        prop_assert!(la >= -1e-9, "{}: white noise N={} lambda_min={}", name, n, la);
    }

    #[test]
    fn critical_input_noise_is_below_the_bound((_, m) in positive_map(), n in 1usize..3) {
        let eta = critical_eta_b(&m, n, 1e-6, &lim()).unwrap();
        prop_assert!((0.0..=eta_b_bound(m.d_in(), n).unwrap() + 1e-6).contains(&eta));
    }

    #[test]
    fn necessity_is_sound((_, m) in positive_map(), n in 1usize..4) {
        if necessity_check(&m, n, None, 1e-9).unwrap().conclusive_negative {
            prop_assert!(!implementable(&m, n, 1e-9, &lim()).unwrap().psd);
        }
    }

    #[test]
    fn bounds_are_ordered(d0 in 1usize..6, d1 in 2usize..6, n in 1usize..200) {
        let b = threshold_bounds(d0, d1, n, true).unwrap();
        prop_assert!(b.eta_a_sufficient > 0.0 && b.eta_a_sufficient < 1.0);
        prop_assert!(b.eta_b_sufficient > 0.0 && b.eta_b_sufficient < 1.0);
        prop_assert!(b.eta_b_sufficient <= b.eta_a_sufficient + 1e-15);
        let next = threshold_bounds(d0, d1, n + 1, true).unwrap();
        prop_assert!(next.eta_a_sufficient < b.eta_a_sufficient);
        prop_assert!(next.eta_b_sufficient < b.eta_b_sufficient);
        let t = transposition_bounds(d1, n).unwrap();
        prop_assert!(t.eta_necessary_below <= t.eta_sufficient);
    }

    #[test]
    fn copy_search_reports_are_monotone((_, m) in positive_map()) {
        let r = min_copies(&m, 4, 1e-9, &Limits::new(256)).unwrap();
        for w in r.reports.windows(2) {
            prop_assert!(w[1].lambda_min >= w[0].lambda_min - 2e-9);
        }
        if let Some(n) = r.min_n {
            prop_assert_eq!(r.reports.len(), n);
            prop_assert!(r.reports.last().unwrap().psd);
        }
    }

    #[test]
    fn map_specs_round_trip_through_display(d in 2usize..5, w in -2.0f64..2.0, eta in 0.0f64..=1.0) {
        let text = format!("noisy_b:(mix:[id:d={d}@{w},transposition:d={d}@{}]):eta={eta}", 1.0 - w);
        let spec = MapSpec::parse(&text).unwrap();
        prop_assert_eq!(MapSpec::parse(&spec.to_string()).unwrap(), spec);
    }
}

#[test]
fn noisy_transposition_below_necessary_threshold_fails() {
    for (d, n_max) in [(2, 5), (3, 4)] {
        let t = transposition_map(d).unwrap();
        for n in 1..=n_max {
            let eta = transposition_bounds(d, n).unwrap().eta_necessary_below - 1e-3;
            let r = implementable(&noisy_a(&t, eta).unwrap(), n, 1e-9, &lim()).unwrap();
            assert!(!r.psd, "d={d} N={n} eta={eta}: lambda_min={}", r.lambda_min);
        }
    }
}

#[test]
fn unital_noise_families_coincide() {
    for d in [2, 3] {
        let t = transposition_map(d).unwrap();
        for eta in [0.0, 0.25, 0.5, 1.0] {
            let a = noisy_a(&t, eta).unwrap();
            let b = noisy_b(&t, eta).unwrap();
            assert!(a.choi().max_abs_diff(b.choi()) <= 1e-12);
        }
    }
}
