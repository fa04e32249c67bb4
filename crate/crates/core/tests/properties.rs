use proptest::prelude::*;

use ldpc_noc::channel::awgn_llrs;
use ldpc_noc::codes::{compute_layers, random_code};
use ldpc_noc::config::{encode_rm, gen_config, plan_upload, simulate_upload, Alignment, ConfigOptions};
use ldpc_noc::decoder::{decode_layered_nms, DecodeParams, QFormat};
use ldpc_noc::mapper::{partition_kway, partition_random, WeightedGraph};
use ldpc_noc::noc::{build_schedule, replay_decode, simulate_iteration, Topology, PORTS};

fn format() -> impl Strategy<Value = QFormat> {
    (3u8..=12).prop_flat_map(|bits| (Just(bits), 0..bits)).prop_map(|(b, f)| QFormat::new(b, f).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn saturating_ops_stay_in_range(q in format(), a in -5000i64..5000, b in -5000i64..5000) {
        let (x, y) = (q.from_raw(a), q.from_raw(b));
        for v in [q.add(x, y), q.sub(x, y), q.neg(x), q.abs(x)] {
            prop_assert!(v.raw() >= q.min_raw() && v.raw() <= q.max_raw());
        }
        // saturation, not wraparound: the sign of a sum of like signs holds
        if x.raw() > 0 && y.raw() > 0 {
            prop_assert!(q.add(x, y).raw() > 0);
        }
        if x.raw() < 0 && y.raw() < 0 {
            prop_assert!(q.add(x, y).raw() < 0);
        }
    }

    #[test]
    fn greedy_layers_have_disjoint_support(n in 10usize..80, m in 2usize..30, d in 2usize..6, seed: u64) {
        prop_assume!(d <= n);
        let h = random_code(n, m, d, seed).unwrap();
        let layers = compute_layers(&h);
        let mut seen_rows = vec![false; m];
        for layer in &layers {
            let mut used = vec![false; n];
            for &r in layer {
                prop_assert!(!std::mem::replace(&mut seen_rows[r], true));
                for &j in h.row(r) {
                    prop_assert!(!std::mem::replace(&mut used[j], true));
                }
            }
        }
        prop_assert!(seen_rows.iter().all(|&s| s));
    }

    #[test]
    fn partitions_are_balanced_and_deterministic(m in 4usize..60, p in 1usize..10, seed: u64) {
        prop_assume!(p <= m);
        let h = random_code(3 * m, m, 6, seed).unwrap();
        let g = WeightedGraph::from_message_chains(&h).unwrap();
        let k = partition_kway(&g, p, seed).unwrap();
        let r = partition_random(&g, p, seed).unwrap();
        prop_assert!(k.is_balanced(1) && r.is_balanced(1));
        prop_assert_eq!(k, partition_kway(&g, p, seed).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The whole chain on random small codes and tori: conservation, the
    /// configuration invariants and bit-exact replay.
    #[test]
    fn replay_matches_golden_on_random_codes(
        m in 9usize..40,
        side in 1usize..4,
        delay in 0u64..6,
        seed: u64,
    ) {
        let h = random_code(2 * m, m, 4, seed).unwrap();
        let g = WeightedGraph::from_message_chains(&h).unwrap();
        let mut mapping = partition_kway(&g, side * side, seed).unwrap();
        mapping.apply_serving_order(&h).unwrap();
        let s = build_schedule(&h, &mapping).unwrap().with_pe_delay(delay);
        let trace = simulate_iteration(&Topology::new(side).unwrap(), &s, seed).unwrap();
        prop_assert_eq!(trace.injected, s.network_messages());
        prop_assert!(trace.k_i >= trace.k_lower_bound());

        let img = gen_config(&trace, &mapping, &h, ConfigOptions::default()).unwrap();
        for (node, occ) in img.nodes.iter().zip(&trace.max_occupancy) {
            prop_assert_eq!(node.rm.len() as u64, img.k_i);
            for p in 0..PORTS {
                prop_assert!(node.fifo_depth[p] as usize >= occ[p]);
            }
        }
        // every grant pops exactly one FIFO
        for (words, load) in encode_rm(&trace).unwrap().iter().zip(&trace.port_load) {
            let pops: usize = words.iter().map(|w| (0..PORTS).filter(|&i| w.pop(i)).count()).sum();
            prop_assert_eq!(pops, load.iter().sum::<usize>());
        }

        let params = DecodeParams::default();
        for f in 0..3 {
            let llr = awgn_llrs(h.n_cols(), h.design_rate(), 1.0, seed ^ f).unwrap();
            prop_assert_eq!(
                replay_decode(&h, &mapping, &trace, &img, &llr, &params).unwrap(),
                decode_layered_nms(&h, &llr, &params).unwrap()
            );
        }
    }

    #[test]
    fn early_stop_only_truncates(seed: u64) {
        let h = random_code(96, 48, 6, 3).unwrap();
        let llr = awgn_llrs(96, h.design_rate(), 2.0, seed).unwrap();
        let on = DecodeParams::default();
        let a = decode_layered_nms(&h, &llr, &on).unwrap();
        let off = DecodeParams { early_stop: false, it_max: a.iterations_run, ..on };
        let b = decode_layered_nms(&h, &llr, &off).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn feasible_plans_simulate_cleanly(k1 in 1u64..600, k2 in 0u64..600, n in 1u64..17, extra in 0u64..50) {
        let b = ldpc_noc::config::min_buffer_size(k1, k2, n).max(k1.max(k2)) + extra;
        let plan = plan_upload(k1, k2, n, b).unwrap();
        prop_assert_eq!(plan.w1, b - k1);
        prop_assert!(plan.w2 * n <= k1 && plan.w3 * n <= k2);
        let rep = simulate_upload(&plan, Alignment::Worst);
        prop_assert!(rep.pass(), "{:?}", rep.first_violation);
        prop_assert_eq!(rep.writes.iter().sum::<u64>(), k2);
    }
}
