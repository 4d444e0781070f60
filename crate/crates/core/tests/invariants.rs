use chrono::NaiveDate;
use ndarray::Array2;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use tecnet_core::market::{compute_log_returns, segment_by_calendar, MarketMeta, PricePanel, YearMonth, Zone};
use tecnet_core::metrics::{activity, asymmetry, average_influence, lowpass};
use tecnet_core::netgraph::{
    influential_network, influential_pair_network, pair_correlations, GraphDocument, GraphFormat, PairFilter,
};
use tecnet_core::synthetic::{generate_var_returns, synthetic_calendar, CouplingSpec};
use tecnet_core::te::{te_matrix, te_series, transfer_entropy, Lag, LagPolicy, TeConfig, TeMatrix};
use tecnet_core::Execution;

fn markets(m: usize) -> Vec<MarketMeta> {
    (0..m)
        .map(|i| MarketMeta::new(&format!("M{i}"), "", Zone::ALL[i % 3], i + 1))
        .collect()
}

fn random_matrix(rng: &mut ChaCha8Rng, m: usize) -> TeMatrix {
    let values = Array2::from_shape_fn((m, m), |(i, j)| if i == j { f64::NAN } else { rng.random_range(0.0..0.5) });
    TeMatrix { segment_index: 1, end_date: NaiveDate::from_ymd_opt(2001, 1, 31).unwrap(), values }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prices_survive_the_return_round_trip(seed in any::<u64>(), len in 3usize..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dates = synthetic_calendar(YearMonth { year: 2000, month: 1 }, len);
        let prices = Array2::from_shape_fn((2, len), |_| rng.random_range(0.5..5000.0));
        let panel = PricePanel::new(markets(2), dates.clone(), prices.clone()).unwrap();
        let returns = compute_log_returns(&panel).unwrap();
        for m in 0..2 {
            let base = prices[[m, 0]];
            let mut acc = 0.0;
            for t in 0..len - 1 {
                acc += returns.returns()[[m, t]];
                let rebuilt = base * acc.exp();
                prop_assert!(((rebuilt - prices[[m, t + 1]]) / prices[[m, t + 1]]).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn segments_cover_every_date_up_to_the_last_window(seed in any::<u64>(), months in 14usize..60, l in 1usize..13, step in 1usize..13) {
        prop_assume!(step <= l && l <= months);
        let spec = CouplingSpec::anonymous(2, seed);
        let rp = generate_var_returns(&spec, (months * 21).max(100)).unwrap();
        let segs = segment_by_calendar(&rp, l, step).unwrap();
        let last = segs.segments().last().unwrap().columns.end;
        let mut covered = vec![false; rp.len()];
        for s in segs.segments() {
            for t in s.columns.clone() {
                covered[t] = true;
            }
        }
        prop_assert!(covered[..last].iter().all(|&c| c));
        // full coverage whenever the step divides the leftover months
        let total = (months * 21).max(100).div_ceil(21);
        if (total - l) % step == 0 {
            prop_assert_eq!(last, rp.len());
        }
        for w in segs.segments().windows(2) {
            prop_assert_eq!(w[0].first_month.plus(step as i64), w[1].first_month);
            let shared = w[1].first_month.months_until(w[0].last_month) + 1;
            prop_assert_eq!(shared, (l - step) as i64);
        }
    }

    #[test]
    fn scaling_scales_avi_and_keeps_asi(seed in any::<u64>(), k in 0.01f64..100.0, m in 2usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mat = random_matrix(&mut rng, m);
        let scaled = mat.scaled(k);
        let (a, b) = (average_influence(&mat).unwrap(), average_influence(&scaled).unwrap());
        prop_assert!((b - k * a).abs() <= 1e-12 * k.max(1.0));
        if let (Ok(x), Ok(y)) = (asymmetry(&mat), asymmetry(&scaled)) {
            prop_assert!((x - y).abs() <= 1e-12);
            prop_assert!((0.0..=1.0).contains(&x));
        }
    }

    #[test]
    fn lowpass_is_linear(seed in any::<u64>(), n in 8usize..300, cutoff in 2usize..30, a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let combo: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let (fx, fy, fc) = (lowpass(&x, cutoff).unwrap(), lowpass(&y, cutoff).unwrap(), lowpass(&combo, cutoff).unwrap());
        for t in 0..n {
            prop_assert!((fc[t] - (a * fx[t] + b * fy[t])).abs() <= 1e-9);
        }
    }

    #[test]
    fn te_depends_only_on_the_samples_not_their_position(seed in any::<u64>(), len in 60usize..300, offset in 1usize..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let total = len + offset;
        let data = Array2::from_shape_fn((3, total), |_| rng.sample::<f64, _>(StandardNormal));
        let window = data.slice(ndarray::s![.., offset..]);
        let owned = window.to_owned();
        let metas = markets(3);
        let policy = LagPolicy::time_zone();
        let cfg = TeConfig::default();
        let a = te_matrix(window, &metas, &policy, &cfg, Execution::Sequential).unwrap();
        let b = te_matrix(owned.view(), &metas, &policy, &cfg, Execution::Sequential).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn raising_threshold_never_adds_edges(seed in any::<u64>(), t1 in 0.0f64..0.5, dt in 0.0f64..0.5) {
        let series = small_series(seed);
        let act = activity(&series).unwrap();
        let lo = influential_network(&act, &series.markets, Some(t1));
        let hi = influential_network(&act, &series.markets, Some(t1 + dt));
        prop_assert!(hi.edges.len() <= lo.edges.len());
        for e in &hi.edges {
            prop_assert!(lo.has_edge(e.source, e.target));
        }
    }

    #[test]
    fn widening_band_never_adds_edges(seed in any::<u64>(), lo in -0.5f64..0.5, w in 0.0f64..0.5, grow in 0.0f64..0.5) {
        let series = small_series(seed);
        let corr = pair_correlations(&series, Execution::Sequential).unwrap();
        let narrow = influential_pair_network(&corr, &series.markets, Some(PairFilter::Band { lo, hi: lo + w }));
        let wide = influential_pair_network(&corr, &series.markets, Some(PairFilter::Band { lo: lo - grow, hi: lo + w + grow }));
        prop_assert!(wide.edges.len() <= narrow.edges.len());
    }
}

fn small_series(seed: u64) -> tecnet_core::te::TeMatrixSeries {
    let spec = CouplingSpec::anonymous(4, seed).with_coupling(0, 1, 0.5);
    let rp = generate_var_returns(&spec, 24 * 21).unwrap();
    let segs = segment_by_calendar(&rp, 6, 1).unwrap();
    te_series(&segs, &LagPolicy::time_zone(), &TeConfig::default(), Execution::default()).unwrap()
}

#[test]
fn shuffled_source_falls_inside_the_permutation_null() {
    let cfg = TeConfig::default();
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..500).map(|_| rng.sample(StandardNormal)).collect();
        let y: Vec<f64> = (0..500).map(|_| rng.sample(StandardNormal)).collect();
        let original = transfer_entropy(&x, &y, Lag::PreviousDay, &cfg).unwrap();
        let mut null: Vec<f64> = (0..200)
            .map(|_| {
                let mut xs = x.clone();
                xs.shuffle(&mut rng);
                transfer_entropy(&xs, &y, Lag::PreviousDay, &cfg).unwrap()
            })
            .collect();
        null.sort_by(f64::total_cmp);
        assert!(original <= null[199], "seed {seed}: {original} above every shuffle");
        assert!(original >= null[0], "seed {seed}: {original} below every shuffle");
    }
    // a driven pair sits far above its shuffle null
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let x: Vec<f64> = (0..500).map(|_| rng.sample(StandardNormal)).collect();
    let y: Vec<f64> = (0..500)
        .map(|t| if t > 0 { 0.8 * x[t - 1] } else { 0.0 } + rng.sample::<f64, _>(StandardNormal))
        .collect();
    let original = transfer_entropy(&x, &y, Lag::PreviousDay, &cfg).unwrap();
    let max_null = (0..200)
        .map(|_| {
            let mut xs = x.clone();
            xs.shuffle(&mut rng);
            transfer_entropy(&xs, &y, Lag::PreviousDay, &cfg).unwrap()
        })
        .fold(0.0, f64::max);
    assert!(original > max_null);
}

#[test]
fn te_matrix_orders_planted_direction_across_seeds() {
    let all_zone = |zone| (0..3).map(|i| MarketMeta::new(&format!("M{i}"), "", zone, i + 1)).collect::<Vec<_>>();
    let metas = all_zone(Zone::Europe);
    let policy = LagPolicy::uniform(Lag::PreviousDay);
    let mut hits = 0;
    for seed in 0..100u64 {
        let spec = CouplingSpec::anonymous(3, seed).with_coupling(0, 1, 0.8);
        let rp = generate_var_returns(&spec, 3000).unwrap();
        let te = te_matrix(rp.returns().view(), &metas, &policy, &TeConfig::default(), Execution::Sequential).unwrap();
        if te[[0, 1]] > te[[1, 0]] {
            hits += 1;
        }
    }
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn pair_correlation_matrix_is_symmetric_with_unit_diagonal() {
    let series = small_series(5);
    let corr = pair_correlations(&series, Execution::default()).unwrap();
    for i in 0..corr.size() {
        if !corr.flagged[i] {
            assert_eq!(corr.values[[i, i]], 1.0);
        }
        for j in 0..corr.size() {
            assert_eq!(corr.values[[i, j]].to_bits(), corr.values[[j, i]].to_bits());
        }
    }
}

#[test]
fn exports_are_byte_identical() {
    let series = small_series(8);
    let act = activity(&series).unwrap();
    let g = influential_network(&act, &series.markets, None);
    let corr = pair_correlations(&series, Execution::default()).unwrap();
    let pg = influential_pair_network(&corr, &series.markets, None);
    for format in GraphFormat::ALL {
        assert_eq!(GraphDocument::from(&g).render(format), GraphDocument::from(&g).render(format));
        let a = GraphDocument::from_pair_graph(&pg, &series.markets).render(format);
        let b = GraphDocument::from_pair_graph(&pg, &series.markets).render(format);
        assert_eq!(a, b);
    }
}

#[test]
fn var_panel_is_deterministic_and_a_valid_return_panel() {
    let spec = CouplingSpec::ten_market_demo(21);
    let a = generate_var_returns(&spec, 500).unwrap();
    let b = generate_var_returns(&spec, 500).unwrap();
    assert_eq!(a, b);
    let prices = a.to_prices(NaiveDate::from_ymd_opt(1991, 12, 31).unwrap(), 100.0).unwrap();
    let back = compute_log_returns(&prices).unwrap();
    for (x, y) in back.returns().iter().zip(a.returns().iter()) {
        assert!((x - y).abs() <= 1e-12);
    }
}
