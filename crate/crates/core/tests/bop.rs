use splitbeam::bop::{cost_report, latency, objective, solve_bop, write_candidates_csv, BopConfig, DevicePlatform};
use splitbeam::channel::{gen_rayleigh, normalize, split, Bandwidth};
use splitbeam::dnn::{ArchSpec, TrainConfig};
use splitbeam::phy::PhyConfig;
use splitbeam::{Error, NetworkConfig, QuantConfig};

fn ranking(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    idx
}

#[test]
fn objective_ranking_ignores_flop_scale() {
    let flops = [120.0, 40.0, 300.0, 75.0];
    let air = [90.0, 400.0, 30.0, 150.0];
    let scaled: Vec<f64> = flops.iter().map(|f| f * 1e3).collect();
    let a = objective(&flops, &air, 0.4, 2).unwrap();
    let b = objective(&scaled, &air, 0.4, 2).unwrap();
    assert_eq!(ranking(&a), ranking(&b));
}

#[test]
fn objective_limits_follow_single_terms() {
    let flops = [1.0, 3.0, 2.0];
    let air = [3.0, 1.0, 2.0];
    assert_eq!(ranking(&objective(&flops, &air, 0.999, 1).unwrap()), ranking(&flops));
    assert_eq!(ranking(&objective(&flops, &air, 0.001, 1).unwrap()), ranking(&air));
}

#[test]
fn latency_takes_slowest_sta() {
    let p = DevicePlatform::REFERENCE;
    let l = latency(&[1_000, 5_000], &[2_000, 100], 4_000, &p).unwrap();
    let t = |f: f64, b: f64| f / p.sta_flops_per_s * 1e3 + b / p.link_rate_bps * 1e3;
    let expected = t(1_000.0, 2_000.0).max(t(5_000.0, 100.0)) + 4_000.0 / p.ap_flops_per_s * 1e3;
    assert!((l.total_ms - expected).abs() < 1e-15);
}

#[test]
fn cost_report_counts_are_consistent() {
    let c = NetworkConfig::symmetric(3, Bandwidth::Mhz40).unwrap();
    let arch = ArchSpec::ladder(c.flat_input_len(), c.flat_output_len(), 0.25, 4).unwrap();
    let r = cost_report(&c, &arch, 8, QuantConfig::MU_HIGH, &DevicePlatform::REFERENCE).unwrap();
    assert_eq!(r.head_flops, 2 * arch.head_macs());
    assert_eq!(r.tail_flops, 2 * arch.tail_macs());
    assert_eq!(r.feedback_bits_splitbeam, 64 + arch.bottleneck_width() as u64 * 8);
    assert!(r.t_total_ms > r.t_tail_ms);
}

#[test]
fn small_search_table_and_csv() {
    let cfg = NetworkConfig::symmetric(2, Bandwidth::Mhz20).unwrap();
    let ds = normalize(&gen_rayleigh(&cfg, 60, 1).unwrap()).unwrap();
    let p = split(&ds, &Default::default(), 2).unwrap();
    let bop = BopConfig {
        gamma: 0.0,
        k_ladder: vec![0.125, 0.25],
        fast_epochs: Some(1),
        ..Default::default()
    };
    let train = TrainConfig {
        batch_size: 8,
        ..Default::default()
    };
    let phy = PhyConfig::default();
    let rows = match solve_bop(&p.train, &p.val, &bop, &train, &phy, &DevicePlatform::REFERENCE) {
        Err(Error::Infeasible { candidates }) => candidates,
        other => panic!("expected infeasible, got {:?}", other.map(|o| o.arch)),
    };
    let order: Vec<(usize, f64)> = rows.iter().map(|r| (r.depth, r.k)).collect();
    assert_eq!(order, vec![(3, 0.125), (3, 0.25), (4, 0.125), (4, 0.25)]);
    assert!(rows.iter().all(|r| !r.feasible && (0.0..=1.0).contains(&r.val_ber)));

    let mut buf = Vec::new();
    write_candidates_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("arch,K,depth,val_ber,head_flops,feedback_bits,t_total_ms,feasible,objective\n"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn tight_delay_bound_is_infeasible() {
    let cfg = NetworkConfig::symmetric(2, Bandwidth::Mhz20).unwrap();
    let ds = normalize(&gen_rayleigh(&cfg, 30, 3).unwrap()).unwrap();
    let p = split(&ds, &Default::default(), 4).unwrap();
    let bop = BopConfig {
        gamma: 0.5,
        tau_ms: 1e-9,
        k_ladder: vec![0.25],
        max_depth: 1,
        fast_epochs: Some(1),
        ..Default::default()
    };
    let r = solve_bop(
        &p.train,
        &p.val,
        &bop,
        &TrainConfig::default(),
        &PhyConfig::default(),
        &DevicePlatform::REFERENCE,
    );
    assert!(matches!(r, Err(Error::Infeasible { ref candidates }) if candidates.len() == 1));
}
