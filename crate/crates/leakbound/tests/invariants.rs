//! Cross-module invariants on randomized inputs: order monotonicity of the
//! entropy and leakage families, majorization consequences, soundness of
//! the convolution bounds against exact convolutions, and the equality and
//! ordering chain delivered by the exhaustive attack oracle.

use proptest::prelude::*;

use leakbound::bounds::{self, ShareLeakage};
use leakbound::group::FiniteAbelianGroup;
use leakbound::info::{self, DiscreteChannel, JointFinite};
use leakbound::oracle::{self, MaskedSetup, ShareChannels};
use leakbound::pmf::{self, MajorizationOrder, Pmf};
use leakbound::sampling;

fn group_pool() -> Vec<FiniteAbelianGroup> {
    vec![
        FiniteAbelianGroup::cyclic(2).unwrap(),
        FiniteAbelianGroup::cyclic(3).unwrap(),
        FiniteAbelianGroup::cyclic(5).unwrap(),
        FiniteAbelianGroup::cyclic(8).unwrap(),
        FiniteAbelianGroup::cyclic(9).unwrap(),
        FiniteAbelianGroup::cyclic(12).unwrap(),
        FiniteAbelianGroup::cyclic(13).unwrap(),
        FiniteAbelianGroup::cyclic(14).unwrap(),
        FiniteAbelianGroup::new(&[2, 4]).unwrap(),
        FiniteAbelianGroup::new(&[2, 2, 2]).unwrap(),
    ]
}

fn arb_pmf(len: usize) -> impl Strategy<Value = Pmf> {
    proptest::collection::vec(1e-6f64..1.0, len).prop_map(|raw| {
        let total: f64 = raw.iter().sum();
        Pmf::new(raw.into_iter().map(|v| v / total).collect()).unwrap()
    })
}

fn arb_group_with_pmfs(count: usize) -> impl Strategy<Value = (usize, Vec<Pmf>)> {
    let pool = group_pool();
    (0..pool.len()).prop_flat_map(move |gi| {
        let len = group_pool()[gi].order();
        (Just(gi), proptest::collection::vec(arb_pmf(len), count))
    })
}

fn arb_channel() -> impl Strategy<Value = DiscreteChannel> {
    (2usize..=4, 2usize..=5).prop_flat_map(|(nx, ny)| {
        proptest::collection::vec(proptest::collection::vec(1e-6f64..1.0, ny), nx).prop_map(
            |rows| {
                let rows = rows
                    .into_iter()
                    .map(|row| {
                        let total: f64 = row.iter().sum();
                        row.into_iter().map(|v| v / total).collect::<Vec<_>>()
                    })
                    .collect();
                DiscreteChannel::new(rows).unwrap()
            },
        )
    })
}

fn arb_joint() -> impl Strategy<Value = JointFinite> {
    arb_channel().prop_flat_map(|channel| {
        arb_pmf(channel.inputs())
            .prop_map(move |prior| JointFinite::new(prior, channel.clone()).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn renyi_entropy_decreases_in_alpha((_, pmfs) in arb_group_with_pmfs(1),
                                        lo in 0.2f64..0.95, step in 0.1f64..8.0) {
        let p = &pmfs[0];
        let mut hi = lo + step;
        if (hi - 1.0).abs() < 1e-6 {
            hi += 0.2;
        }
        let h_lo = p.renyi_entropy(lo).unwrap();
        let h_hi = p.renyi_entropy(hi).unwrap();
        let h_inf = p.min_entropy();
        prop_assert!(h_lo >= h_hi - 1e-9, "H_{lo} = {h_lo} < H_{hi} = {h_hi}");
        prop_assert!(h_hi >= h_inf - 1e-9);
    }

    #[test]
    fn conditional_measures_are_alpha_monotone(j in arb_joint(),
                                               lo in 1.05f64..4.0, step in 0.1f64..8.0) {
        let hi = lo + step;
        let h_lo = info::arimoto_conditional_entropy(&j, lo).unwrap();
        let h_hi = info::arimoto_conditional_entropy(&j, hi).unwrap();
        let h_inf = info::conditional_min_entropy(&j);
        prop_assert!(h_lo >= h_hi - 1e-9);
        prop_assert!(h_hi >= h_inf - 1e-9);

        let i_lo = info::sibson_information(&j, lo).unwrap();
        let i_hi = info::sibson_information(&j, hi).unwrap();
        let i_inf = info::sibson_information(&j, f64::INFINITY).unwrap();
        prop_assert!(i_lo <= i_hi + 1e-9);
        prop_assert!(i_hi <= i_inf + 1e-9);
    }

    #[test]
    fn mixing_toward_uniform_raises_entropy((_, pmfs) in arb_group_with_pmfs(1),
                                            t in 0.0f64..1.0,
                                            alpha in 1.1f64..12.0) {
        let q = &pmfs[0];
        let len = q.len();
        let mixed: Vec<f64> = q
            .masses()
            .iter()
            .map(|&v| t / len as f64 + (1.0 - t) * v)
            .collect();
        let p = Pmf::new(mixed).unwrap();
        let order = pmf::majorization_order(&p, q);
        prop_assert!(
            matches!(order, MajorizationOrder::LeftPrecedes | MajorizationOrder::Equal),
            "mixture not majorized: {order:?}"
        );
        prop_assert!(p.renyi_entropy(alpha).unwrap() >= q.renyi_entropy(alpha).unwrap() - 1e-9);
        prop_assert!(p.min_entropy() >= q.min_entropy() - 1e-9);
    }

    #[test]
    fn sorted_pairing_maximizes_overlap(mut a in proptest::collection::vec(0.0f64..1.0, 2..8),
                                        mut b in proptest::collection::vec(0.0f64..1.0, 2..8),
                                        shift in 0usize..8) {
        let n = a.len().min(b.len());
        a.truncate(n);
        b.truncate(n);
        a.sort_by(|x, y| y.partial_cmp(x).unwrap());
        b.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let aligned: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        let rotated: f64 = (0..n).map(|i| a[i] * b[(i + shift) % n]).sum();
        prop_assert!(rotated <= aligned + 1e-12);
    }

    #[test]
    fn convolution_never_concentrates((gi, pmfs) in arb_group_with_pmfs(2)) {
        let group = &group_pool()[gi];
        let conv = pmf::convolve(&pmfs[0], &pmfs[1], group).unwrap();
        prop_assert!(conv.max_mass() <= pmfs[0].max_mass() + 1e-12);
        prop_assert!(conv.max_mass() <= pmfs[1].max_mass() + 1e-12);
    }

    #[test]
    fn convolution_bounds_are_sound((gi, pmfs) in arb_group_with_pmfs(4)) {
        let group = &group_pool()[gi];
        let mut conv = pmfs[0].clone();
        let mut peaks = vec![pmfs[0].max_mass()];
        for p in &pmfs[1..] {
            conv = pmf::convolve(&conv, p, group).unwrap();
            peaks.push(p.max_mass());
            let shares = ShareLeakage::new(&peaks, group.order()).unwrap();
            let general = bounds::mgl_multi(&shares);
            let refined = bounds::mgl_refined(&shares).value;
            prop_assert!(conv.max_mass() <= general + 1e-12,
                "peak {} above bound {general}", conv.max_mass());
            prop_assert!(conv.max_mass() <= refined + 1e-12,
                "peak {} above refined bound {refined}", conv.max_mass());
        }
    }

    #[test]
    fn two_share_bound_equals_multi_at_one_mask((gi, pmfs) in arb_group_with_pmfs(2)) {
        let group = &group_pool()[gi];
        let (p, q) = (pmfs[0].max_mass(), pmfs[1].max_mass());
        let pair = bounds::mgl_two(p, q, group.order()).unwrap();
        let multi = bounds::mgl_multi(&ShareLeakage::new(&[p, q], group.order()).unwrap());
        prop_assert!((pair - multi).abs() <= 1e-12, "pair {pair} vs multi {multi}");
    }

    #[test]
    fn map_success_obeys_fano_ceiling(channel in arb_channel()) {
        // Uniform secret: MAP success from Y is the sum of column maxima
        // of the joint, and every order's leakage caps it from above.
        let m = channel.inputs();
        let j = JointFinite::new(Pmf::uniform(m).unwrap(), channel).unwrap();
        let mut ps = 0.0f64;
        for y in 0..j.channel().outputs() {
            let best = (0..m).map(|x| j.joint(x, y)).fold(0.0f64, f64::max);
            ps += best;
        }
        for alpha in [1.5f64, 2.0, 8.0, f64::INFINITY] {
            let i = info::sibson_information(&j, alpha).unwrap();
            let ceiling = info::fano_success_ceiling(i, alpha, m).unwrap();
            prop_assert!(ps <= ceiling + 1e-9,
                "ps {ps} above ceiling {ceiling} (alpha {alpha})");
        }
    }
}

#[test]
fn flat_top_coset_sum_meets_two_share_bound() {
    // Same floor level on both sides and supports on a subgroup coset: the
    // sum's peak equals the bound and the sum is majorized by the bound's
    // flat-top shape.
    let cases = [
        (14usize, 1usize, 0.8f64, 0.55f64),
        (12, 2, 0.34, 0.4),
        (12, 3, 0.26, 0.3),
        (8, 1, 0.9, 0.6),
    ];
    for &(order, k, p, q) in &cases {
        let group = FiniteAbelianGroup::cyclic(order).unwrap();
        let subgroup = group.subgroup_of_order(k + 1).unwrap().unwrap();
        let mut a = vec![0.0; order];
        let mut b = vec![0.0; order];
        for (j, &h) in subgroup.iter().enumerate() {
            let (pa, pb) = if j < k {
                (p, q)
            } else {
                (1.0 - k as f64 * p, 1.0 - k as f64 * q)
            };
            a[h.index()] = pa;
            b[group.neg(h).index()] = pb;
        }
        let a = Pmf::new(a).unwrap();
        let b = Pmf::new(b).unwrap();
        let conv = pmf::convolve(&a, &b, &group).unwrap();
        let bound = bounds::mgl_two(p, q, order).unwrap();
        assert!(
            (conv.max_mass() - bound).abs() < 1e-12,
            "order {order} k {k}: peak {} vs bound {bound}",
            conv.max_mass()
        );
        let cap = Pmf::flat_top(bound, order).unwrap();
        assert!(matches!(
            pmf::majorization_order(&conv, &cap),
            MajorizationOrder::LeftPrecedes | MajorizationOrder::Equal
        ));
    }
}

/// Deterministic random discrete channel from the counter-keyed sampler.
fn seeded_channel(inputs: usize, outputs: usize, seed: u64, tag: u64) -> DiscreteChannel {
    let rows = (0..inputs)
        .map(|x| {
            let raw: Vec<f64> = (0..outputs)
                .map(|y| 0.05 + sampling::uniform(seed, tag * 1000 + (x * outputs + y) as u64))
                .collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / total).collect()
        })
        .collect();
    DiscreteChannel::new(rows).unwrap()
}

#[test]
fn exhaustive_oracle_equality_and_orderings() {
    // Random enumerable setups: the conditional leakage equals log(M Ps),
    // stays below m times the single-trace leakage, and sits below the
    // joint leakage, which the input-side processing chain caps as well.
    let mut checked = 0usize;
    for (case, &(m_alphabet, d, m)) in [
        (2usize, 0usize, 1usize),
        (2, 1, 2),
        (3, 0, 2),
        (3, 1, 1),
        (4, 0, 1),
        (4, 1, 1),
        (2, 2, 1),
        (3, 1, 2),
    ]
    .iter()
    .enumerate()
    {
        let group = FiniteAbelianGroup::cyclic(m_alphabet).unwrap();
        let chans: Vec<DiscreteChannel> = (0..=d)
            .map(|i| seeded_channel(m_alphabet, 2 + (case + i) % 3, 99, (case * 10 + i) as u64))
            .collect();
        let setup = MaskedSetup::new(group, ShareChannels::Discrete(chans)).unwrap();
        let exact = oracle::exact_map_success(&setup, m).unwrap();
        let log_m_ps = (m_alphabet as f64 * exact.ps_exact).ln();
        assert!(
            (exact.i_inf_conditional_nats - log_m_ps).abs() <= 1e-10,
            "case {case}: conditional {} vs log(M Ps) {log_m_ps}",
            exact.i_inf_conditional_nats
        );
        assert!(
            exact.i_inf_conditional_nats
                <= m as f64 * exact.i_inf_single_trace_nats + 1e-10
        );
        assert!(exact.i_inf_joint_nats >= exact.i_inf_conditional_nats - 1e-12);
        assert!(exact.i_inf_joint_nats <= m as f64 * exact.i_inf_single_trace_nats + 1e-10);
        assert!(exact.ps_exact >= 1.0 / m_alphabet as f64 - 1e-12);
        checked += 1;
    }
    assert_eq!(checked, 8);
}

#[test]
fn simulation_never_beats_exact_significantly() {
    let group = FiniteAbelianGroup::cyclic(3).unwrap();
    let chans: Vec<DiscreteChannel> = (0..2).map(|i| seeded_channel(3, 3, 5, i)).collect();
    let setup = MaskedSetup::new(group, ShareChannels::Discrete(chans)).unwrap();
    for m in [1usize, 2] {
        let exact = oracle::exact_map_success(&setup, m).unwrap();
        let sim = oracle::monte_carlo_attack(&setup, m, 10_000, 31, 0).unwrap();
        assert!(
            sim.ci_low <= exact.ps_exact + 1e-12,
            "m {m}: CI [{}, {}] excludes exact {}",
            sim.ci_low,
            sim.ci_high,
            exact.ps_exact
        );
        assert!(sim.ps_empirical <= exact.ps_exact + 3.0 * (sim.ci_high - sim.ci_low));
    }
}
