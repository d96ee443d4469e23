use proptest::prelude::*;
use rand::Rng;

use gmssc::baselines::{brute_force_opt, mwu_permutations, total_cost};
use gmssc::costs::{fac_value, sw_cost, sw_cost_closed, sw_cost_lp};
use gmssc::instance::{parse_instance, serialize_instance};
use gmssc::model::{access_cost, access_cost_matrix_form, matrix_to_perm, perm_to_matrix, Instance, Permutation, Request};
use gmssc::opgd::{run_online, OnlineConfig, StepRule, SwOracle};
use gmssc::projection::{project_birkhoff, ProjectionConfig};
use gmssc::rounding::{
    block_cost, block_exact, deterministic_blocks, double_matrix, round_deterministic, round_randomized, BlockSolver,
    RoundingParams,
};
use gmssc::sampling::{derive_rng, random_ds_matrix, random_permutation, random_request, StreamRng};
use gmssc::subgradient::sw_subgradient_k1;

fn rng_for(seed: u64) -> StreamRng {
    derive_rng(seed, 0)
}

fn any_request(n: usize, rng: &mut StreamRng) -> Request {
    let size = rng.random_range(1..=n);
    let k = rng.random_range(1..=size);
    random_request(n, size, k, rng)
}

fn unit_request(n: usize, rng: &mut StreamRng) -> Request {
    let size = rng.random_range(1..=n);
    random_request(n, size, 1, rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn access_cost_bounds_and_forms(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = rng_for(seed);
        let pi = random_permutation(n, &mut rng);
        let r = any_request(n, &mut rng);
        let c = access_cost(&pi, &r).unwrap();
        prop_assert!(c >= r.demand() && c <= n - r.len() + r.demand());
        prop_assert_eq!(c as f64, access_cost_matrix_form(&perm_to_matrix(&pi), &r).unwrap());
    }

    #[test]
    fn access_cost_ignores_order_of_unrequested_items(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = rng_for(seed);
        let pi = random_permutation(n, &mut rng);
        let r = any_request(n, &mut rng);
        // swap two adjacent positions holding unrequested items
        let mut order = pi.order().to_vec();
        if let Some(i) = (0..n - 1).find(|&i| !r.contains(order[i]) && !r.contains(order[i + 1])) {
            order.swap(i, i + 1);
        }
        let swapped = Permutation::new(order).unwrap();
        prop_assert_eq!(access_cost(&pi, &r).unwrap(), access_cost(&swapped, &r).unwrap());
    }

    #[test]
    fn permutation_matrix_round_trip(seed in any::<u64>(), n in 1usize..12) {
        let pi = random_permutation(n, &mut rng_for(seed));
        prop_assert_eq!(matrix_to_perm(&perm_to_matrix(&pi)).unwrap(), pi);
    }

    #[test]
    fn instance_json_round_trip(seed in any::<u64>(), n in 1usize..10, t in 0usize..20) {
        let mut rng = rng_for(seed);
        let reqs = (0..t).map(|_| any_request(n, &mut rng)).collect();
        let inst = Instance::new(n, reqs).unwrap();
        prop_assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn sw_forms_agree(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = rng_for(seed);
        let a = random_ds_matrix(n, &mut rng);
        let r = unit_request(n, &mut rng);
        let closed = sw_cost_closed(&a, &r).unwrap();
        prop_assert!((closed - sw_cost(&a, &r).unwrap().value).abs() < 1e-9);
        prop_assert!((closed - sw_cost_lp(&a, &r).unwrap().value).abs() < 1e-7);
    }

    #[test]
    fn sw_general_equals_lp(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = rng_for(seed);
        let a = random_ds_matrix(n, &mut rng);
        let r = any_request(n, &mut rng);
        prop_assert!((sw_cost(&a, &r).unwrap().value - sw_cost_lp(&a, &r).unwrap().value).abs() < 1e-7);
    }

    #[test]
    fn sw_midpoint_convex(seed in any::<u64>(), n in 1usize..8) {
        let mut rng = rng_for(seed);
        let a = random_ds_matrix(n, &mut rng);
        let b = random_ds_matrix(n, &mut rng);
        let r = any_request(n, &mut rng);
        let f = |m| sw_cost(m, &r).unwrap().value;
        prop_assert!(f(&a.mix(&b, 0.5)) <= 0.5 * f(&a) + 0.5 * f(&b) + 1e-9);
    }

    #[test]
    fn fac_weights_and_convexity(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = rng_for(seed);
        let a = random_ds_matrix(n, &mut rng);
        let b = random_ds_matrix(n, &mut rng);
        let r = any_request(n, &mut rng);
        let fa = fac_value(&a, &r, 0.2).unwrap();
        let total: f64 = fa.primal_weights.iter().map(|(_, w)| w).sum();
        prop_assert!((total - 1.0).abs() < 1e-7);
        prop_assert!(fa.value >= 0.0);
        let fb = fac_value(&b, &r, 0.2).unwrap().value;
        let fm = fac_value(&a.mix(&b, 0.5), &r, 0.2).unwrap().value;
        prop_assert!(fm <= 0.5 * fa.value + 0.5 * fb + 1e-7);
    }

    #[test]
    fn sw_subgradient_integral_and_nonpositive(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = rng_for(seed);
        let a = random_ds_matrix(n, &mut rng);
        let r = unit_request(n, &mut rng);
        let g = sw_subgradient_k1(&a, &r).unwrap();
        for &x in g.matrix().as_slice() {
            prop_assert!(x.fract() == 0.0 && x <= 0.0 && x >= -((n - 1) as f64));
        }
    }

    #[test]
    fn projection_commutes_with_relabeling(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = rng_for(seed);
        let data = (0..n * n).map(|_| rng.random_range(-1.0..2.0)).collect();
        let m = gmssc::SquareMatrix::from_vec(n, data).unwrap();
        let rows = random_permutation(n, &mut rng).order().to_vec();
        let cols = random_permutation(n, &mut rng).order().to_vec();
        let cfg = ProjectionConfig::default();
        let lhs = project_birkhoff(&m.relabel(&rows, &cols), &cfg).unwrap().matrix;
        let rhs = project_birkhoff(&m, &cfg).unwrap().matrix.matrix().relabel(&rows, &cols);
        let diff = lhs.matrix().sub(&rhs);
        prop_assert!(diff.as_slice().iter().all(|x| x.abs() < 1e-7));
    }

    #[test]
    fn exact_blocks_are_no_worse_than_any_subset(seed in any::<u64>(), n in 1usize..8, r in 1usize..4) {
        let mut rng = rng_for(seed);
        let a = random_ds_matrix(n, &mut rng);
        let r = r.min(n);
        let all: Vec<usize> = (0..n).collect();
        let best = block_cost(&a, &block_exact(&a, &all, r).unwrap());
        let mut other = random_permutation(n, &mut rng).order().to_vec();
        other.truncate(r);
        prop_assert!(best <= block_cost(&a, &other) + 1e-12);
    }

    #[test]
    fn deterministic_rounding_is_a_deterministic_permutation(seed in any::<u64>(), n in 1usize..10, r in 1usize..4) {
        let a = random_ds_matrix(n, &mut rng_for(seed));
        let r = r.min(n);
        for solver in [BlockSolver::exact(r), BlockSolver::fptas(r, 0.25), BlockSolver::heuristic(r)] {
            let blocks = deterministic_blocks(&a, &solver).unwrap();
            let mut seen: Vec<usize> = blocks.concat();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
            let pi = round_deterministic(&a, &solver).unwrap();
            prop_assert_eq!(pi, round_deterministic(&a, &solver).unwrap());
        }
    }

    #[test]
    fn randomized_rounding_is_reproducible(seed in any::<u64>(), n in 1usize..10) {
        let a = random_ds_matrix(n, &mut rng_for(seed));
        let p = RoundingParams::gmssc();
        let x = round_randomized(&a, &p, &mut derive_rng(seed, 1));
        prop_assert_eq!(x, round_randomized(&a, &p, &mut derive_rng(seed, 1)));
    }

    #[test]
    fn doubling_never_shrinks_entries(seed in any::<u64>(), n in 1usize..12) {
        let a = random_ds_matrix(n, &mut rng_for(seed));
        let d = double_matrix(a.matrix());
        for (x, y) in a.matrix().as_slice().iter().zip(d.as_slice()) {
            prop_assert!(y >= x);
        }
    }

    #[test]
    fn online_choices_ignore_future_requests(seed in any::<u64>(), n in 2usize..6, t in 2usize..30) {
        let mut rng = rng_for(seed);
        let reqs: Vec<Request> = (0..t).map(|_| unit_request(n, &mut rng)).collect();
        let cut = rng.random_range(1..t);
        let mut altered = reqs.clone();
        for r in altered.iter_mut().skip(cut) {
            *r = unit_request(n, &mut rng);
        }
        let cfg = OnlineConfig { step_rule: StepRule::sw_scaled(n, n), ..OnlineConfig::default() };
        let solver = BlockSolver::heuristic(1);
        let x = run_online(&Instance::new(n, reqs).unwrap(), &SwOracle, Some(&solver), &cfg, seed).unwrap();
        let y = run_online(&Instance::new(n, altered).unwrap(), &SwOracle, Some(&solver), &cfg, seed).unwrap();
        prop_assert_eq!(&x.traces[..cut], &y.traces[..cut]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn brute_force_beats_adjacent_swaps(seed in any::<u64>(), n in 1usize..7, t in 1usize..12) {
        let mut rng = rng_for(seed);
        let reqs = (0..t).map(|_| any_request(n, &mut rng)).collect();
        let inst = Instance::new(n, reqs).unwrap();
        let (best, cost) = brute_force_opt(&inst).unwrap();
        prop_assert_eq!(total_cost(&inst, &best).unwrap(), cost);
        for i in 0..n.saturating_sub(1) {
            let mut order = best.order().to_vec();
            order.swap(i, i + 1);
            prop_assert!(total_cost(&inst, &Permutation::new(order).unwrap()).unwrap() >= cost);
        }
    }

    #[test]
    fn weights_expected_cost_within_envelope(seed in any::<u64>(), n in 2usize..5, t in 1usize..60) {
        let mut rng = rng_for(seed);
        let reqs: Vec<Request> = (0..t).map(|_| unit_request(n, &mut rng)).collect();
        let inst = Instance::new(n, reqs).unwrap();
        let eta = gmssc::baselines::default_mwu_eta(n, t);
        let run = mwu_permutations(&inst, eta).unwrap();
        let (_, opt) = brute_force_opt(&inst).unwrap();
        let log_perms = (2..=n).map(|k| (k as f64).ln()).sum::<f64>();
        // losses are scaled to [0, 1] by n
        let total: f64 = run.expected_costs.iter().sum::<f64>() / n as f64;
        let envelope = opt as f64 / n as f64 + eta * t as f64 + log_perms / eta;
        prop_assert!(total <= envelope + 1e-9, "{} > {}", total, envelope);
    }
}
