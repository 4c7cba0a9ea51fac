use dyadic_ergm::graph::{dyad_count, dyads};
use dyadic_ergm::io::{parse_edge_list, write_edge_list, ParamsFile};
use dyadic_ergm::oracle::{brute_expected_stats, total_probability};
use dyadic_ergm::sampling::sample;
use dyadic_ergm::{BlockAssignment, Graph, LogitMatrix, ModelSpec, Permutation, SampleConfig};
use proptest::prelude::*;
use proptest::sample::subsequence;

fn param(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, k)
}

fn graph(n: usize, directed: bool) -> impl Strategy<Value = Graph> {
    prop::collection::vec(any::<bool>(), dyad_count(n, directed))
        .prop_map(move |bits| Graph::from_dyad_bits(n, directed, bits).unwrap())
}

fn permutation(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::new(v).unwrap())
}

fn blocks(n: usize, r: usize) -> impl Strategy<Value = BlockAssignment> {
    prop::collection::vec(0..r, n).prop_map(|l| BlockAssignment::compacted(&l).unwrap())
}

/// Any model of any family on `n` nodes with the given directedness.
fn model(n: usize, directed: bool) -> BoxedStrategy<ModelSpec> {
    let mut options: Vec<BoxedStrategy<ModelSpec>> = vec![
        param(dyad_count(n, directed))
            .prop_map(move |v| ModelSpec::saturated(LogitMatrix::new(n, directed, v).unwrap()))
            .boxed(),
        (-3.0..3.0f64).prop_map(move |t| ModelSpec::erdos_renyi(t, directed).unwrap()).boxed(),
    ];
    if directed {
        options.push((param(n), param(n)).prop_map(|(a, b)| ModelSpec::p1_config(a, b).unwrap()).boxed());
        options.push(
            (blocks(n, 3), param(3), param(3), param(3))
                .prop_map(|(b, d, l, e)| {
                    let r = b.r();
                    ModelSpec::directed_additive_sbm(b, d[..r].to_vec(), l[..r].to_vec(), e[..r].to_vec()).unwrap()
                })
                .boxed(),
        );
    } else {
        options.push(param(n).prop_map(|b| ModelSpec::beta(b).unwrap()).boxed());
        options.push(
            (blocks(n, 3), param(6))
                .prop_map(|(b, u)| {
                    let r = b.r();
                    ModelSpec::sbm_from_upper(b, &u[..r * (r + 1) / 2]).unwrap()
                })
                .boxed(),
        );
        options.push(
            (blocks(n, 3), param(3), param(3))
                .prop_map(|(b, d, e)| {
                    let r = b.r();
                    ModelSpec::additive_sbm(b, d[..r].to_vec(), e[..r].to_vec()).unwrap()
                })
                .boxed(),
        );
    }
    prop::strategy::Union::new(options).boxed()
}

fn model_and_graph() -> impl Strategy<Value = (ModelSpec, Graph)> {
    (3usize..=5, any::<bool>()).prop_flat_map(|(n, directed)| {
        let n = if directed { n.min(4) } else { n };
        (model(n, directed), graph(n, directed))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn probabilities_sum_to_one((m, g) in model_and_graph()) {
        let total = total_probability(&m, g.n()).unwrap();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dyad_and_statistic_forms_agree((m, g) in model_and_graph()) {
        let a = m.log_likelihood(&g).unwrap();
        let b = m.log_likelihood_from_stats(&g).unwrap();
        prop_assert!((a - b).abs() < 1e-11, "{a} vs {b}");
    }

    #[test]
    fn expected_stats_match_enumeration((m, g) in model_and_graph()) {
        let gap = m.expected_stats(g.n()).unwrap().max_abs_diff(&brute_expected_stats(&m, g.n()).unwrap()).unwrap();
        prop_assert!(gap < 1e-10);
    }

    #[test]
    fn beta_likelihood_is_permutation_invariant(
        (beta, g, pi) in (3usize..9).prop_flat_map(|n| (param(n), graph(n, false), permutation(n)))
    ) {
        let a = ModelSpec::beta(beta.clone()).unwrap().log_likelihood(&g).unwrap();
        let b = ModelSpec::beta(pi.permute_values(&beta)).unwrap().log_likelihood(&g.permute(&pi).unwrap()).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{a} vs {b}");
    }

    #[test]
    fn constant_beta_is_erdos_renyi(b in -3.0..3.0f64, g in (2usize..8).prop_flat_map(|n| graph(n, false))) {
        let beta = ModelSpec::beta(vec![b; g.n()]).unwrap();
        let er = ModelSpec::erdos_renyi(2.0 * b, false).unwrap();
        prop_assert_eq!(beta.logits(g.n()).unwrap(), er.logits(g.n()).unwrap());
    }

    #[test]
    fn singleton_additive_sbm_is_beta(d in (2usize..8).prop_flat_map(param)) {
        let n = d.len();
        let additive = ModelSpec::additive_sbm(BlockAssignment::singletons(n), d.clone(), vec![0.0; n]).unwrap();
        let beta = ModelSpec::beta(d).unwrap();
        prop_assert_eq!(additive.logits(n).unwrap(), beta.logits(n).unwrap());
    }

    #[test]
    fn single_block_sbm_is_erdos_renyi(eta in -3.0..3.0f64, n in 2usize..8) {
        let sbm = ModelSpec::sbm(BlockAssignment::new(vec![0; n]).unwrap(), vec![vec![eta]]).unwrap();
        prop_assert_eq!(sbm.logits(n).unwrap(), ModelSpec::erdos_renyi(eta, false).unwrap().logits(n).unwrap());
    }

    #[test]
    fn p1_gauge_shift_leaves_logits_unchanged(
        (a, b) in (3usize..7).prop_flat_map(|n| (param(n), param(n))),
        c in -2.0..2.0f64,
    ) {
        let n = a.len();
        let m = ModelSpec::p1_config(a.clone(), b.clone()).unwrap();
        let shifted = ModelSpec::p1_config(a.iter().map(|x| x + c).collect(), b.iter().map(|x| x - c).collect()).unwrap();
        let ModelSpec::P1Config { beta, .. } = &m else { unreachable!() };
        prop_assert!(beta.iter().sum::<f64>().abs() < 1e-12);
        let (x, y) = (m.logits(n).unwrap(), shifted.logits(n).unwrap());
        for (p, q) in x.values().iter().zip(y.values()) {
            prop_assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn edge_list_parsing_ignores_line_order(
        (lines, order) in (3usize..9).prop_flat_map(|n| {
            let all: Vec<(usize, usize)> = dyads(n, false).collect();
            let k = all.len();
            subsequence(all, 0..=k).prop_flat_map(|edges| {
                let m = edges.len();
                (Just(edges), Just((0..m).collect::<Vec<_>>()).prop_shuffle())
            })
        })
    ) {
        let text = |idx: &mut dyn Iterator<Item = usize>| -> String {
            idx.map(|i| format!("n{} n{}\n", lines[i].0, lines[i].1)).collect()
        };
        let a = parse_edge_list(&text(&mut (0..lines.len()))).unwrap();
        let b = parse_edge_list(&text(&mut order.iter().copied())).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn edge_list_write_read_round_trip(g in (1usize..8, any::<bool>()).prop_flat_map(|(n, d)| graph(n, d))) {
        prop_assert_eq!(parse_edge_list(&write_edge_list(&g, None)).unwrap().graph, g);
    }

    #[test]
    fn params_round_trip_bit_exact((m, _) in model_and_graph()) {
        let back = ParamsFile::from_json(&ParamsFile::from_model(&m, None).to_json()).unwrap().to_model().unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn sampling_is_keyed_by_seed((m, g) in model_and_graph(), seed in any::<u64>()) {
        let cfg = SampleConfig::new(seed, 5).unwrap();
        prop_assert_eq!(sample(&m, g.n(), &cfg).unwrap(), sample(&m, g.n(), &cfg).unwrap());
    }
}

mod checker {
    use dyadic_ergm::equivariance::{check_additivity, check_equivariance, ParametrizationProbe, ProbeKind};
    use dyadic_ergm::estimation::fit_beta;
    use dyadic_ergm::{FitOptions, ModelSpec};
    use proptest::prelude::*;

    use super::{graph, permutation};

    fn additive(a: f64, b: f64, c: f64, directed: bool) -> ParametrizationProbe {
        let g = move |x: f64| a * x.sin() + b * x;
        let h = move |x: f64| c * x * x;
        if directed {
            ParametrizationProbe::shared("additive", ProbeKind::Nodal, 4, true, (-1.0, 1.0), move |u, v| g(u) + h(v))
        } else {
            ParametrizationProbe::shared("additive", ProbeKind::Nodal, 4, false, (-1.0, 1.0), move |u, v| g(u) + g(v))
        }
        .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn shared_functions_have_zero_discrepancy(a in -2.0..2.0f64, b in -2.0..2.0f64, seed in any::<u64>()) {
            let p = ParametrizationProbe::shared("shared", ProbeKind::Nodal, 5, false, (-1.0, 1.0), move |u, v| {
                (a * (u * v)).exp() + b * (u - v).powi(2)
            })
            .unwrap();
            let r = check_equivariance(&p, 100, seed).unwrap();
            prop_assert!(r.equivariant);
            prop_assert_eq!(r.max_discrepancy, 0.0);
        }

        #[test]
        fn additive_probes_reconstruct(a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64, directed in any::<bool>()) {
            let r = check_additivity(&additive(a, b, c, directed), 7, 1e-6).unwrap();
            prop_assert!(r.additive);
            prop_assert!(r.residual <= 10.0 * r.threshold);
        }

        #[test]
        fn constants_do_not_change_the_mixed_partial(a in -2.0..2.0f64, k in -5.0..5.0f64) {
            let f = move |u: f64, v: f64| a * u * v + u.exp() * v;
            let p = ParametrizationProbe::shared("f", ProbeKind::Nodal, 3, true, (-1.0, 1.0), f).unwrap();
            let q = ParametrizationProbe::shared("f+c", ProbeKind::Nodal, 3, true, (-1.0, 1.0), move |u, v| f(u, v) + k).unwrap();
            let (rp, rq) = (check_additivity(&p, 6, 1e-6).unwrap(), check_additivity(&q, 6, 1e-6).unwrap());
            prop_assert!((rp.max_mixed_partial - rq.max_mixed_partial).abs() <= 1e-6 * (1.0 + rp.max_mixed_partial));
        }

        #[test]
        fn beta_fit_commutes_with_relabeling((g, pi) in (5usize..9).prop_flat_map(|n| (graph(n, false), permutation(n)))) {
            let opts = FitOptions::default();
            if let Ok(a) = fit_beta(&g, &opts) {
                let b = fit_beta(&g.permute(&pi).unwrap(), &opts).unwrap();
                let (ModelSpec::Beta { beta: x }, ModelSpec::Beta { beta: y }) = (&a.params, &b.params) else { unreachable!() };
                for (p, q) in pi.permute_values(x).iter().zip(y) {
                    prop_assert!((p - q).abs() < 1e-8);
                }
            }
        }
    }
}
