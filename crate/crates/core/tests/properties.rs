use proptest::prelude::*;
use swarmx_core::campaign::{self, CampaignPlan, ConfigGrid};
use swarmx_core::metrics::{log_scale, trace_aocc};
use swarmx_core::topology::{neighbors_ring, neighbors_star};
use swarmx_core::{aocc, make_instance, run, Bounds, Params, Params32, ProblemId, Topology};

fn params(topology: Topology, n: usize, k: usize) -> Params {
    Params { topology, c1: 0.7, c2: 0.6, w: 0.4, n, k, p: 2, r: 1 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn aocc_in_unit_range_and_clip_idempotent(y in prop::collection::vec(-20.0f64..20.0, 1..80)) {
        let b = Bounds::default();
        let a = aocc(&y, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        let clipped: Vec<f64> = y.iter().map(|v| v.clamp(-5.0, 5.0)).collect();
        prop_assert_eq!(aocc(&clipped, &b).unwrap(), a);
    }

    #[test]
    fn aocc_never_drops_when_a_value_improves(
        y in prop::collection::vec(-8.0f64..8.0, 1..50),
        at in any::<prop::sample::Index>(),
        by in 0.0f64..5.0,
    ) {
        let b = Bounds::default();
        let mut better = y.clone();
        better[at.index(y.len())] -= by;
        prop_assert!(aocc(&better, &b).unwrap() >= aocc(&y, &b).unwrap());
    }

    #[test]
    fn traces_are_non_increasing(fid_at in 0usize..12, iid in 1u32..6, seed in any::<u64>()) {
        let pid = ProblemId::new(ProblemId::SUPPORTED[fid_at]).unwrap();
        let inst = make_instance::<f64>(pid, iid, 2).unwrap();
        let trace = run(&params(Topology::Ring, 20, 2), &inst, 30, seed).unwrap();
        prop_assert_eq!(trace.budget(), 30);
        prop_assert!(trace.best_so_far.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(trace.best_so_far.iter().all(|&v| v >= inst.f_opt()));
        let a = trace_aocc(&trace, inst.f_opt(), &Bounds::default()).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn ring_neighborhoods_have_k_plus_self(
        pts in prop::collection::vec(prop::array::uniform2(-5.0f64..5.0), 2..30),
        k in 1usize..5,
        p in 1u32..3,
    ) {
        let positions: Vec<Vec<f64>> = pts.iter().map(|x| x.to_vec()).collect();
        let n = positions.len();
        let k = k.min(n - 1);
        let hood = neighbors_ring(&positions, k, p).unwrap();
        for i in 0..n {
            let set = hood.neighbors(i);
            prop_assert_eq!(set.len(), k + 1);
            prop_assert!(set.contains(&i));
        }
    }
}

#[test]
fn log_scale_floors_exact_hits() {
    let y = log_scale(&[0.0, 1e-20, 100.0], 0.0).unwrap();
    assert_eq!(y, vec![-12.0, -12.0, 2.0]);
}

#[test]
fn full_neighborhood_ring_equals_star() {
    assert_eq!(
        neighbors_ring(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![3.0, -2.0]], 2, 2).unwrap(),
        neighbors_star(3).unwrap()
    );
}

#[test]
fn f32_and_f64_runs_are_both_finite() {
    let pid = ProblemId::new(3).unwrap();
    let hp32 = Params32 { topology: Topology::VonNeumann, c1: 0.5, c2: 0.4, w: 0.9, n: 30, k: 1, p: 1, r: 2 };
    let t32 = run(&hp32, &make_instance::<f32>(pid, 1, 2).unwrap(), 20, 5).unwrap();
    let t64 = run(&params(Topology::VonNeumann, 30, 1), &make_instance::<f64>(pid, 1, 2).unwrap(), 20, 5).unwrap();
    assert!(t32.best_so_far.iter().all(|v| v.is_finite()));
    assert!(t64.best_so_far.iter().all(|v| v.is_finite()));
}

#[test]
fn campaign_records_survive_csv_and_aggregate() {
    let fids = vec![ProblemId::new(1).unwrap(), ProblemId::new(12).unwrap()];
    let mut grid = ConfigGrid::reduced();
    grid.w = vec![0.9, 0.4];
    let plan = CampaignPlan { instances: 2, runs: 3, budget: 20, ..CampaignPlan::new(Topology::Ring, grid, fids) };
    let records = campaign::execute_campaign(&plan, Some(1)).unwrap();
    assert_eq!(records.len(), plan.record_count());
    assert_eq!(records, campaign::execute_campaign(&plan, None).unwrap());

    let mut buf = Vec::new();
    campaign::write_runs_csv(&mut buf, &records).unwrap();
    assert_eq!(campaign::read_runs_csv(buf.as_slice()).unwrap(), records);

    let rows = campaign::aggregate(&records).unwrap();
    assert_eq!(rows.len(), 2);
    for row in &rows {
        let all: Vec<f64> = records.iter().filter(|r| r.fid == row.fid).map(|r| r.aocc).collect();
        assert_eq!(all.len(), 12);
        let mean = all.iter().sum::<f64>() / 12.0;
        assert!((row.all_mean - mean).abs() < 1e-12);
        assert!(row.single_best_mean >= row.avg_best_mean - 1e-12);
    }
}
