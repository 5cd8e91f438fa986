use proptest::prelude::*;

use super::*;

fn state3() -> DccState<f64> {
    DccState::new(3)
}

#[test]
fn flow_control_examples() {
    let u = UtilitySpec::log1p(1.0);
    let p = DccParams::<f64> { m: 100.0, r_k_max: 2.0, ..Default::default() };
    assert_eq!(dcc_flow_control(0.0, &p, &u), 2.0);
    assert_eq!(dcc_flow_control(200.0, &p, &u), 0.0);
    assert!((dcc_flow_control(50.0, &p, &u) - 1.0).abs() < 1e-12);
    let p1 = DccParams::<f64> { m: 100.0, r_k_max: 0.5, ..Default::default() };
    assert_eq!(dcc_flow_control(50.0, &p1, &u), 0.5);
}

#[test]
fn cellular_examples() {
    let mut s = DccState::<f64>::new(2);
    s.lambda = vec![5.0, 0.0];
    assert_eq!(dcc_cellular_schedule(&s), CellularDecision::Direct { device: 0 });

    let mut s = DccState::<f64>::new(2);
    s.set_eta(1, 0, 3.0);
    s.set_q(1, 0, 1.0);
    assert_eq!(dcc_cellular_schedule(&s), CellularDecision::Relay { relay: 1, device: 0 });

    assert_eq!(dcc_cellular_schedule(&DccState::<f64>::new(3)), CellularDecision::Idle);
}

#[test]
fn unicast_examples() {
    let mut s = DccState::<f64>::new(2);
    s.lambda[0] = 5.0;
    s.set_eta(1, 0, 2.0);
    s.set_q(1, 0, 1.0);
    assert_eq!(dcc_local_schedule_unicast(&s), LocalDecision::Unicast { relay: 1, device: 0 });

    let mut s = DccState::<f64>::new(2);
    s.set_eta(1, 0, 3.0);
    s.set_q(1, 0, 1.0);
    assert_eq!(dcc_local_schedule_unicast(&s), LocalDecision::Idle);
    assert_eq!(dcc_local_schedule_unicast(&state3()), LocalDecision::Idle);
}

#[test]
fn broadcast_examples() {
    // Sender 2 reaching {0, 1} with per-receiver weights 4 and -1.
    let mut s = state3();
    s.lambda[0] = 4.0;
    s.set_eta(2, 1, 1.0);
    let pair = Hyperedge { sender: 2, receivers: vec![0, 1] };
    let single = Hyperedge { sender: 2, receivers: vec![0] };
    assert_eq!(hyperarc_weight(&s, &pair), 3.0);
    assert_eq!(hyperarc_weight(&s, &single), 4.0);
    let pick = dcc_local_schedule_broadcast(&s, &[pair, single]);
    assert_eq!(pick, LocalDecision::Broadcast { relay: 2, receivers: vec![0] });
    let all = DccTopology::all_subsets(3).unwrap();
    assert_eq!(dcc_local_schedule_broadcast(&state3(), &all.hyperedges), LocalDecision::Idle);
}

#[test]
fn update_examples() {
    let mut s = DccState::<f64>::new(2);
    s.lambda[0] = 3.0;
    let d = DccDecision { cellular: CellularDecision::Direct { device: 0 }, local: LocalDecision::Idle };
    dcc_update_queues(&mut s, &d, &[2.0, 0.0], 0.05);
    assert_eq!(s.lambda[0], 4.0);

    let mut s = DccState::<f64>::new(2);
    let d = DccDecision { cellular: CellularDecision::Idle, local: LocalDecision::Unicast { relay: 1, device: 0 } };
    dcc_update_queues(&mut s, &d, &[0.0, 0.0], 0.05);
    assert_eq!(s.eta(1, 0), 1.0);
    // Local delivery also drains Q(1,0), which was empty.
    assert_eq!(s.q(1, 0), 0.0);

    let mut s = DccState::<f64>::new(2);
    s.set_q(1, 0, 2.0);
    let d = DccDecision { cellular: CellularDecision::Relay { relay: 1, device: 0 }, local: LocalDecision::Idle };
    dcc_update_queues(&mut s, &d, &[0.0, 0.0], 0.25);
    assert_eq!(s.q(1, 0), 2.75);
}

#[test]
fn coupling_identities() {
    let d = DccDecision {
        cellular: CellularDecision::Relay { relay: 2, device: 0 },
        local: LocalDecision::Broadcast { relay: 1, receivers: vec![0, 2] },
    };
    assert_eq!(d.x::<f64>(2, 0, 0.05), 0.95);
    assert_eq!(d.x::<f64>(1, 0, 0.05), 0.0);
    assert_eq!(d.h::<f64>(1, 0), 1.0);
    assert_eq!(d.h::<f64>(1, 2), 1.0);
    assert_eq!(d.h::<f64>(2, 0), 0.0);
    assert_eq!(d.lambda_service::<f64>(0, 3), 1.0);
}

#[test]
fn default_hyperedges() {
    let t = DccTopology::all_subsets(3).unwrap();
    assert_eq!(t.hyperedges.len(), 3 * 3);
    let t = DccTopology::all_subsets(6).unwrap();
    assert_eq!(t.hyperedges.len(), 6 * 31);
    assert!(t.hyperedges.iter().all(|h| !h.receivers.contains(&h.sender)));
    assert_eq!(DccTopology::all_subsets(7), Err(DccError::TooManyDevices(7)));
    let bad = Hyperedge { sender: 0, receivers: vec![0, 1] };
    assert!(DccTopology::with_hyperedges(3, vec![bad]).is_err());
}

#[test]
fn params_validation() {
    assert!(DccParams::<f64>::default().check().is_ok());
    let p = DccParams::<f64> { beta: 0.0, ..Default::default() };
    assert!(p.check().is_err());
    let p = DccParams::<f64> { r_k_max: f64::INFINITY, ..Default::default() };
    assert!(p.check().is_err());
}

#[test]
fn f32_state_works() {
    let mut s = DccState::<f32>::new(2);
    s.lambda[1] = 2.0;
    assert_eq!(dcc_cellular_schedule(&s), CellularDecision::Direct { device: 1 });
}

fn arb_state(n: usize) -> impl Strategy<Value = DccState<f64>> {
    let len = n + 2 * n * (n - 1);
    prop::collection::vec(0.0f64..20.0, len).prop_map(move |v| {
        let mut s = DccState::new(n);
        s.lambda.copy_from_slice(&v[..n]);
        let mut i = n;
        let pairs: Vec<_> = s.pairs().collect();
        for (a, b) in pairs {
            s.set_eta(a, b, v[i]);
            s.set_q(a, b, v[i + 1]);
            i += 2;
        }
        s
    })
}

/// Independent enumeration over every cellular action.
fn brute_cellular(s: &DccState<f64>) -> f64 {
    let n = s.n_devices();
    let mut best = 0.0f64;
    for k in 0..n {
        best = best.max(s.lambda[k]);
        for r in 0..n {
            if r != k {
                best = best.max(s.eta(r, k) - s.q(r, k));
            }
        }
    }
    best
}

fn cellular_weight(s: &DccState<f64>, c: CellularDecision) -> f64 {
    match c {
        CellularDecision::Idle => 0.0,
        CellularDecision::Direct { device } => s.lambda[device],
        CellularDecision::Relay { relay, device } => s.eta(relay, device) - s.q(relay, device),
    }
}

fn local_weight(s: &DccState<f64>, l: &LocalDecision) -> f64 {
    match l {
        LocalDecision::Idle => 0.0,
        LocalDecision::Unicast { relay, device } => s.lambda[*device] - s.eta(*relay, *device) + s.q(*relay, *device),
        LocalDecision::Broadcast { relay, receivers } => {
            receivers.iter().map(|&k| s.lambda[k] - s.eta(*relay, k) + s.q(*relay, k)).sum()
        }
    }
}

proptest! {
    #[test]
    fn schedulers_match_enumeration(s in arb_state(3)) {
        prop_assert_eq!(cellular_weight(&s, dcc_cellular_schedule(&s)), brute_cellular(&s));
        let topo = DccTopology::all_subsets(3).unwrap();
        let best_b = topo.hyperedges.iter().map(|h| hyperarc_weight(&s, h)).fold(0.0f64, f64::max);
        let pick = dcc_local_schedule_broadcast(&s, &topo.hyperedges);
        prop_assert!((local_weight(&s, &pick) - best_b).abs() < 1e-12);
        let best_u = s.pairs().map(|(r, k)| s.lambda[k] - s.eta(r, k) + s.q(r, k)).fold(0.0f64, f64::max);
        prop_assert!((local_weight(&s, &dcc_local_schedule_unicast(&s)) - best_u).abs() < 1e-12);
    }

    #[test]
    fn unicast_equals_singleton_broadcast(s in arb_state(4)) {
        let topo = DccTopology::singletons(4);
        let u = dcc_local_schedule_unicast(&s);
        let b = dcc_local_schedule_broadcast(&s, &topo.hyperedges);
        let mapped = match b {
            LocalDecision::Broadcast { relay, receivers } => LocalDecision::Unicast { relay, device: receivers[0] },
            other => other,
        };
        prop_assert_eq!(u, mapped);
    }

    #[test]
    fn scaling_invariance(s in arb_state(3), c in 0.01f64..100.0) {
        let t = s.scaled(c);
        let topo = DccTopology::all_subsets(3).unwrap();
        prop_assert_eq!(dcc_decide(&s, &topo, DccMode::Unicast), dcc_decide(&t, &topo, DccMode::Unicast));
        prop_assert_eq!(dcc_decide(&s, &topo, DccMode::Broadcast), dcc_decide(&t, &topo, DccMode::Broadcast));
    }

    #[test]
    fn queues_stay_nonnegative(
        s in arb_state(3),
        steps in prop::collection::vec((0usize..7, 0usize..10, 0.0f64..2.0), 1..50),
    ) {
        let mut s = s;
        let topo = DccTopology::all_subsets(3).unwrap();
        let pairs: Vec<_> = s.pairs().collect();
        for (c, l, y) in steps {
            let cellular = match c {
                0 => CellularDecision::Idle,
                1..=3 => CellularDecision::Direct { device: c - 1 },
                _ => { let (r, k) = pairs[c - 4]; CellularDecision::Relay { relay: r, device: k } }
            };
            let local = if l == 9 { LocalDecision::Idle } else {
                let h = &topo.hyperedges[l];
                LocalDecision::Broadcast { relay: h.sender, receivers: h.receivers.clone() }
            };
            let d = DccDecision { cellular, local };
            dcc_update_queues(&mut s, &d, &[y, 0.0, y / 2.0], 0.05);
            prop_assert!(s.all_nonnegative());
        }
    }
}
