mod common;

use std::collections::HashMap;

use common::{gaussian, identity, rng};
use proptest::prelude::*;
use rand::Rng;
use sdcor::cluster::neighbors::BruteForce;
use sdcor::cluster::{DbscanParams, Partition};
use sdcor::data::RowMatrix;
use sdcor::params::fitness::{cs_index, davies_bouldin, score_partition};
use sdcor::params::{
    detect_knee, fitness_report, kdist_graph, minimize, tuner_registry, Infeasible, KDistGraph, PsoConfig, TuneContext,
};

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn mean_of(rows: &[&[f64]]) -> Vec<f64> {
    let p = rows[0].len();
    (0..p).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / rows.len() as f64).collect()
}

fn db_oracle(groups: &[Vec<&[f64]>]) -> f64 {
    let c: Vec<Vec<f64>> = groups.iter().map(|g| mean_of(g)).collect();
    let s: Vec<f64> = groups
        .iter()
        .zip(&c)
        .map(|(g, c)| g.iter().map(|x| dist(x, c)).sum::<f64>() / g.len() as f64)
        .collect();
    let k = groups.len();
    (0..k)
        .map(|i| {
            (0..k)
                .filter(|&j| j != i)
                .map(|j| (s[i] + s[j]) / dist(&c[i], &c[j]))
                .fold(f64::MIN, f64::max)
        })
        .sum::<f64>()
        / k as f64
}

fn cs_oracle(groups: &[Vec<&[f64]>]) -> f64 {
    let c: Vec<Vec<f64>> = groups.iter().map(|g| mean_of(g)).collect();
    let num: f64 = groups
        .iter()
        .map(|g| g.iter().map(|x| g.iter().map(|y| dist(x, y)).fold(0.0, f64::max)).sum::<f64>() / g.len() as f64)
        .sum();
    let den: f64 = (0..c.len())
        .map(|i| (0..c.len()).filter(|&j| j != i).map(|j| dist(&c[i], &c[j])).fold(f64::MAX, f64::min))
        .sum();
    num / den
}

fn two_blobs(seed: u64, n: usize, noise: usize) -> RowMatrix {
    let mut r = rng(seed);
    let l = identity(2, 0.5);
    let mut m = gaussian(n, &[0.0, 0.0], &l, &mut r);
    let b = gaussian(n, &[10.0, 0.0], &l, &mut r);
    b.rows().for_each(|row| m.push(row));
    for _ in 0..noise {
        m.push(&[r.gen_range(-10.0..20.0), r.gen_range(-15.0..15.0)]);
    }
    m
}

#[test]
fn kdist_matches_brute_force() {
    let mut r = rng(50);
    let rows: Vec<Vec<f64>> = (0..50).map(|_| vec![r.gen_range(0.0..10.0), r.gen_range(0.0..10.0)]).collect();
    let m = RowMatrix::from_rows(&rows).unwrap();
    let g = kdist_graph(&m, 4).unwrap();
    let mut want: Vec<f64> = rows
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let mut d: Vec<f64> = rows.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, y)| dist(x, y)).collect();
            d.sort_by(f64::total_cmp);
            d[3]
        })
        .collect();
    want.sort_by(|a, b| b.total_cmp(a));
    assert_eq!(g.values.len(), 50);
    for (a, b) in g.values.iter().zip(&want) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn kdist_rejects_k_out_of_range() {
    let m = RowMatrix::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
    assert!(kdist_graph(&m, 0).is_err());
    assert!(kdist_graph(&m, 3).is_err());
}

#[test]
fn knee_sits_at_the_bend() {
    // Steep drop for 10 ranks, then a near-flat floor.
    let mut values: Vec<f64> = (0..10).map(|i| 10.0 - i as f64 * 0.9).collect();
    values.extend((0..90).map(|i| 1.0 - i as f64 * 0.001));
    let g = KDistGraph { k: 4, values };
    let knee = detect_knee(&g).unwrap();
    assert!((9..=11).contains(&knee.index), "knee at {}", knee.index);
    assert!(!knee.low_confidence);
    // A straight line has no knee.
    let flat = KDistGraph { k: 4, values: (0..50).map(|i| 50.0 - i as f64).collect() };
    assert!(detect_knee(&flat).unwrap().low_confidence);
}

#[test]
fn infeasible_partitions_cost_infinity() {
    let m = two_blobs(1, 40, 5);
    let n = m.len();

    let all_noise = Partition { assignments: vec![0; n], k: 0 };
    let r = score_partition(&m, &all_noise);
    assert_eq!(r.infeasible, Some(Infeasible::AllNoise));
    assert!(r.value.is_infinite());

    let no_noise = Partition { assignments: (0..n).map(|i| 1 + (i >= 40) as usize).collect(), k: 2 };
    let r = score_partition(&m, &no_noise);
    assert_eq!(r.infeasible, Some(Infeasible::NoNoise));
    assert!(r.value.is_infinite());

    // Cluster 2 has only two members in 2-D, so its covariance is singular.
    let mut a = vec![1; n];
    a[0] = 2;
    a[1] = 2;
    a[n - 1] = 0;
    let r = score_partition(&m, &Partition { assignments: a, k: 2 });
    assert_eq!(r.infeasible, Some(Infeasible::SingularCluster));
    assert!(r.value.is_infinite());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn finite_fitness_matches_textbook_indices(seed in any::<u64>(), k in 2usize..5, p in 1usize..4) {
        let mut r = rng(seed);
        let n = 12 * k + 6;
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| r.gen_range(-5.0..5.0)).collect()).collect();
        let m = RowMatrix::from_rows(&rows).unwrap();
        // First 6 rows are noise, the rest cycle through the clusters.
        let assignments: Vec<usize> = (0..n).map(|i| if i < 6 { 0 } else { 1 + (i % k) }).collect();
        let part = Partition { assignments: assignments.clone(), k };
        let rep = score_partition(&m, &part);
        prop_assume!(rep.infeasible.is_none());

        let mut by_label: HashMap<usize, Vec<&[f64]>> = HashMap::new();
        for (row, &a) in rows.iter().zip(&assignments) {
            by_label.entry(a).or_default().push(row);
        }
        // Clusters 1..k, then the noise group.
        let groups: Vec<Vec<&[f64]>> = (1..=k).chain([0]).map(|c| by_label[&c].clone()).collect();
        let db = db_oracle(&groups);
        let cs = cs_oracle(&groups);
        prop_assert!((rep.davies_bouldin - db).abs() <= 1e-9 * db.max(1.0));
        prop_assert!((rep.cs - cs).abs() <= 1e-9 * cs.max(1.0));
        prop_assert!((rep.value - (db + cs + 6.0 / n as f64)).abs() <= 1e-9 * rep.value.max(1.0));

        let idx: Vec<Vec<usize>> = (1..=k).chain([0]).map(|c| (0..n).filter(|&i| assignments[i] == c).collect()).collect();
        prop_assert!((davies_bouldin(&m, &idx) - db).abs() <= 1e-9 * db.max(1.0));
        prop_assert!((cs_index(&m, &idx) - cs).abs() <= 1e-9 * cs.max(1.0));
    }

    #[test]
    fn swarm_history_never_rises_and_stays_in_bounds(seed in any::<u64>(), d in 1usize..4) {
        let bounds: Vec<(f64, f64)> = (0..d).map(|i| (-3.0 - i as f64, 2.0 + i as f64)).collect();
        let cfg = PsoConfig { seed, iters: 40, ..PsoConfig::default() };
        let mut outside = 0;
        let res = minimize(&bounds, &cfg, |x| {
            if x.iter().zip(&bounds).any(|(v, (lo, hi))| v < lo || v > hi) {
                outside += 1;
            }
            x.iter().map(|v| (v - 0.5) * (v - 0.5)).sum()
        }).unwrap();
        prop_assert_eq!(outside, 0);
        prop_assert!(res.history.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(*res.history.last().unwrap(), res.value);
        prop_assert!(res.value < 1e-2);
    }
}

#[test]
fn swarm_is_reproducible() {
    let bounds = [(-5.0, 5.0), (-5.0, 5.0)];
    let cfg = PsoConfig { seed: 7, ..PsoConfig::default() };
    let f = |x: &[f64]| x[0].powi(2) + (x[1] - 1.0).powi(2);
    let a = minimize(&bounds, &cfg, f).unwrap();
    let b = minimize(&bounds, &cfg, f).unwrap();
    assert_eq!(a.position, b.position);
    assert_eq!(a.history, b.history);
}

#[test]
fn swarm_tuner_separates_two_blobs() {
    let m = two_blobs(4, 150, 12);
    let ctx = TuneContext {
        pso: PsoConfig { seed: 11, ..PsoConfig::default() },
        ..TuneContext::default()
    };
    let out = tuner_registry().get("pso").unwrap().tune(&m, &ctx).unwrap();
    let rep = fitness_report(&m, out.params.sample_params, &BruteForce);
    assert_eq!(rep.clusters, 2);
    assert!(rep.noise > 0);
    assert!(rep.value.is_finite());
    assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn every_tuner_halves_eps_for_the_full_data() {
    let m = two_blobs(8, 100, 10);
    let ctx = TuneContext {
        k: 6,
        pso: PsoConfig { seed: 2, iters: 15, ..PsoConfig::default() },
        ..TuneContext::default()
    };
    for name in tuner_registry().names() {
        let out = tuner_registry().get(name).unwrap().tune(&m, &ctx).unwrap();
        let t = out.params;
        assert_eq!(t.original_params.eps, t.sample_params.eps / 2.0, "{name}");
        assert_eq!(t.original_params.min_pts, t.sample_params.min_pts, "{name}");
    }
    let knee = tuner_registry().get("kdist").unwrap().tune(&m, &ctx).unwrap();
    assert_eq!(knee.params.sample_params.min_pts, 7);
    let fixed = TuneContext { eps_override: Some(1.25), ..ctx };
    let out = tuner_registry().get("kdist").unwrap().tune(&m, &fixed).unwrap();
    assert_eq!(out.params.sample_params, DbscanParams::new(1.25, 7).unwrap());
}
