//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so the lines are
//! always printed.

use std::collections::{BTreeSet, VecDeque};
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use iontrap_mbqc::electron_dynamics::{
    classical_trajectory, first_zone_boundary, mathieu_q, mathieu_stable, propagate, q_ratio, AbsorberConfig,
    GridConfig, MathieuParams, Stepper, TrapConfig, Wavepacket, CA40_ION_MASS, DEFAULT_SIGMA0, DEFAULT_T_FINAL,
    DEFAULT_V0, ELECTRON_MASS, HBAR,
};
use iontrap_mbqc::graphstate::{
    new_plus_state, pauli_expectation, statevector_oracle, PauliBasis, PauliString, ORACLE_MAX_QUBITS,
};
use iontrap_mbqc::ionization::{
    discrimination_ratio, find_resonances, nonresonant_rate_au, quadrupole_irradiance, raman_irradiance,
    rate_s, resonant_rate_au, Amplitudes, Calibration, LevelTable, RabiReference,
};
use iontrap_mbqc::lattice::{build_hex_array, decompose_sublattices};
use iontrap_mbqc::mbqc::{
    adapt_angle, apply_mat2, branch_probabilities, clifford_basis, euler_unitary, fidelity, linear_chain_edges,
    linear_chain_pattern, run_branch, InputState, MeasurementPattern, MeasurementStep, OutputQubit,
};
use iontrap_mbqc::resources::{required_op_time, shor_op_count, storage_error, MONTH_SECONDS};
use iontrap_mbqc::scheduler::build_schedule;
use iontrap_mbqc::EdgeSet;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, || format!("took {elapsed:.1?}, limit {limit:?}"))
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let mut sizes = Vec::new();
    for (rows, cols) in [(6, 6), (20, 20), (70, 70)] {
        let array = build_hex_array(rows, cols, 1.0).map_err(|e| e.to_string())?;
        sizes.push(array.len());
        for n in 1..=3 {
            let asg = decompose_sublattices(&array, n).map_err(|e| e.to_string())?;
            let s = build_schedule(&asg, true).map_err(|e| e.to_string())?;
            ensure(s.rounds.len() == 6, || format!("{} rounds for {rows}×{cols}, n = {n}", s.rounds.len()))?;
            ensure(s.rounds.iter().all(|r| r.pairs.is_matching()), || format!("non-matching round, n = {n}"))?;
            let total: usize = s.rounds.iter().map(|r| r.pairs.len()).sum();
            let union = s.all_edges();
            ensure(total == union.len(), || "rounds overlap".into())?;
            ensure(union == asg.cluster_edges(true), || format!("union differs from the cluster, n = {n}"))?;
        }
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("sites {sizes:?}, n = 1..3, 6 matchings each, in {:.1?}", start.elapsed()))
}

fn criterion_2() -> Check {
    let array = build_hex_array(12, 12, 1.0).map_err(|e| e.to_string())?;
    let mut counts = Vec::new();
    for n in 1..=3 {
        let asg = decompose_sublattices(&array, n).map_err(|e| e.to_string())?;
        let distinct: BTreeSet<usize> = array.sites().map(|s| asg.layer(s).unwrap()).collect();
        ensure(asg.layer_count() == distinct.len(), || format!("n = {n}: labels {} vs count {}", distinct.len(), asg.layer_count()))?;
        counts.push(asg.layer_count());
    }
    ensure(counts == [2, 8, 18], || format!("layer counts {counts:?}"))?;
    Ok(format!("layer counts {counts:?}"))
}

/// Random connected subgraph with up to `max` vertices, relabelled 0..k.
fn connected_sample(edges: &EdgeSet, sites: usize, max: usize, rng: &mut ChaCha8Rng) -> EdgeSet {
    let adj = edges.adjacency(sites);
    let target = rng.random_range(2..=max);
    let start = rng.random_range(0..sites);
    let mut chosen = vec![start];
    let mut frontier: Vec<usize> = adj[start].clone();
    while chosen.len() < target && !frontier.is_empty() {
        let v = frontier.swap_remove(rng.random_range(0..frontier.len()));
        if chosen.contains(&v) {
            continue;
        }
        chosen.push(v);
        frontier.extend(adj[v].iter().copied().filter(|u| !chosen.contains(u)));
    }
    let index = |v: usize| chosen.iter().position(|&c| c == v);
    edges.iter().filter_map(|(a, b)| Some((index(a)?, index(b)?))).collect()
}

fn is_connected(edges: &EdgeSet, n: usize) -> bool {
    let adj = edges.adjacency(n);
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &u in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// All `K_a` expectations of the graph state `state_edges`, against the
/// stabilizers of `target`.
fn statevector_verdict(state_edges: &EdgeSet, target: &EdgeSet, n: usize) -> Result<bool, String> {
    let psi = statevector_oracle(state_edges, n).map_err(|e| e.to_string())?;
    Ok((0..n).all(|a| {
        let e = pauli_expectation(&psi, &PauliString::cluster_stabilizer(n, a, target));
        (e.re - 1.0).abs() < 1e-10 && e.im.abs() < 1e-10
    }))
}

fn criterion_3() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let array = build_hex_array(6, 6, 1.0).map_err(|e| e.to_string())?;
    let mut instances = 0;
    let mut largest = 0;
    while instances < 60 {
        let n = rng.random_range(1..=2);
        let periodic = rng.random_bool(0.5);
        let asg = decompose_sublattices(&array, n).map_err(|e| e.to_string())?;
        let edges = connected_sample(&asg.cluster_edges(periodic), array.len(), ORACLE_MAX_QUBITS, &mut rng);
        let k = edges.qubit_bound();
        if k < 2 || !is_connected(&edges, k) {
            continue;
        }
        largest = largest.max(k);
        let mut t = new_plus_state(k).map_err(|e| e.to_string())?;
        t.apply_edges(&edges).map_err(|e| e.to_string())?;
        let tab = t.verify_cluster(&edges);
        let dense = statevector_verdict(&edges, &edges, k)?;
        ensure(tab && dense, || format!("instance {instances}: tableau {tab}, statevector {dense}"))?;

        // a state missing one edge must fail both ways
        let (a, b) = edges.iter().nth(rng.random_range(0..edges.len())).unwrap();
        let mut broken = edges.clone();
        broken.remove(a, b);
        let mut t = new_plus_state(k).map_err(|e| e.to_string())?;
        t.apply_edges(&broken).map_err(|e| e.to_string())?;
        let tab = t.verify_cluster(&edges);
        let dense = statevector_verdict(&broken, &edges, k)?;
        ensure(tab == dense && !tab, || format!("broken instance {instances}: tableau {tab}, statevector {dense}"))?;
        instances += 1;
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("{instances} clusters up to {largest} qubits agree, plus one-edge-deleted variants, in {:.1?}", start.elapsed()))
}

fn random_qubit(rng: &mut ChaCha8Rng) -> [Complex64; 2] {
    let v: [Complex64; 2] = std::array::from_fn(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

fn clifford_agreement(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let edges = EdgeSet::from_pairs([(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4), (2, 5)]).unwrap();
    let mut branches = 0;
    for _ in 0..40 {
        let steps = (0..5)
            .map(|k| {
                let domain = |rng: &mut ChaCha8Rng| -> Vec<usize> {
                    (0..k).filter(|_| rng.random_bool(0.4)).collect()
                };
                MeasurementStep {
                    qubit: k,
                    angle: rng.random_range(0..4) as f64 * PI / 2.0,
                    x_domain: domain(rng),
                    z_domain: domain(rng),
                }
            })
            .collect();
        let pattern = MeasurementPattern {
            num_qubits: 6,
            steps,
            outputs: vec![OutputQubit { qubit: 5, x_domain: vec![], z_domain: vec![] }],
        };
        for (outcomes, p_dense) in branch_probabilities(&edges, None, &pattern).map_err(|e| e.to_string())? {
            let mut t = new_plus_state(6).unwrap();
            t.apply_edges(&edges).unwrap();
            let mut p_tab = 1.0;
            for (k, step) in pattern.steps.iter().enumerate() {
                let (basis, sign) = clifford_basis(adapt_angle(step, &outcomes[..k])).unwrap();
                let eig = if outcomes[k] == 0 { sign } else { -sign };
                p_tab *= t.measure_pauli_forced(step.qubit, basis, eig).unwrap();
                if p_tab == 0.0 {
                    break;
                }
            }
            ensure((p_dense - p_tab).abs() < 1e-12, || format!("branch {outcomes:?}: {p_dense} vs {p_tab}"))?;
            if p_tab > 0.0 {
                let r = run_branch(&edges, None, &pattern, &outcomes).unwrap().unwrap();
                let positive = [PauliBasis::X, PauliBasis::Y, PauliBasis::Z]
                    .into_iter()
                    .find_map(|b| t.stabilizer_sign(&PauliString::single(6, 5, b)).map(|s| (b, s)))
                    .ok_or("output not in a Pauli eigenstate")?;
                let e = pauli_expectation(&r.residual_state, &PauliString::single(1, 0, positive.0));
                let want = if positive.1 { 1.0 } else { -1.0 };
                ensure((e.re - want).abs() < 1e-10, || format!("branch {outcomes:?}: output mismatch"))?;
            }
            branches += 1;
        }
    }
    Ok(branches)
}

fn criterion_4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 1.0;
    for _ in 0..100 {
        let angles: [f64; 4] = std::array::from_fn(|_| rng.random_range(-PI..PI));
        let psi = random_qubit(&mut rng);
        let target = apply_mat2(&euler_unitary(angles), psi);
        let input = InputState { qubits: vec![0], amplitudes: psi.to_vec() };
        let pattern = linear_chain_pattern(angles);
        let mut total = 0.0;
        for code in 0..16u8 {
            let outcomes: Vec<u8> = (0..4).map(|b| (code >> b) & 1).collect();
            let r = run_branch(&linear_chain_edges(), Some(&input), &pattern, &outcomes)
                .map_err(|e| e.to_string())?
                .ok_or("zero-probability branch")?;
            worst = worst.min(fidelity(&r.corrected_state(), &target));
            total += r.probability();
        }
        ensure((total - 1.0).abs() < 1e-10, || format!("branch probabilities sum to {total}"))?;
    }
    ensure(worst >= 1.0 - 1e-9, || format!("worst fidelity {worst}"))?;
    let branches = clifford_agreement(&mut rng)?;
    Ok(format!("worst fidelity 1 - {:.1e} over 1600 branches; {branches} Clifford branches match", 1.0 - worst))
}

fn criterion_5() -> Check {
    let cal = Calibration::bundled();
    let s = Amplitudes { k: 0.0, ..cal.s_state.clone() };
    for (name, j) in &s.j_channels {
        let d = cal.d_state.j_channels[name];
        ensure((j / d - 40.0).abs() < 1e-12, || format!("channel {name}: J_S/J_D = {}", j / d))?;
    }
    let i = 1e9;
    let r = discrimination_ratio(&s.at(i), &cal.d_state.at(i)).map_err(|e| e.to_string())?;
    ensure((r - 1600.0).abs() <= 1e-9, || format!("ratio {r}"))?;
    Ok(format!("ratio {r}"))
}

fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let i: f64 = 10f64.powf(rng.random_range(-9.0..-3.0));
        let lambda: f64 = rng.random_range(0.1..10.0);
        let js: Vec<f64> = (0..3).map(|_| rng.random_range(-1e10..1e10)).collect();
        let (k, l) = (rng.random_range(-1e4..1e4), rng.random_range(0.1..10.0));
        let four = nonresonant_rate_au(lambda * i, &js) / nonresonant_rate_au(i, &js);
        let two = resonant_rate_au(lambda * i, k, l) / resonant_rate_au(i, k, l);
        worst = worst.max((four / lambda.powi(4) - 1.0).abs()).max((two / lambda.powi(2) - 1.0).abs());
    }
    ensure(worst < 1e-12, || format!("worst relative scaling error {worst:e}"))?;
    let rate = rate_s(&Calibration::bundled().s_state.at(1e9)).map_err(|e| e.to_string())?;
    ensure((1e9..=1e10).contains(&rate), || format!("S rate {rate:e} s⁻¹"))?;
    Ok(format!("scaling error ≤ {worst:.1e}; S rate at 1e9 W/cm² = {rate:.3e} s⁻¹"))
}

fn criterion_7() -> Check {
    let table = LevelTable::bundled();
    let scan = find_resonances(&table, (380.0, 410.0), 4, 100.0).map_err(|e| e.to_string())?;
    let found = |level: &str, m: u32, nm: f64| {
        scan.resonances.iter().any(|r| r.level == level && r.photons == m && (r.exact_wavelength_nm - nm).abs() < 0.6)
    };
    for (level, m, nm) in [("4P1/2", 1, 397.0), ("5S1/2", 2, 383.0), ("6P1/2", 3, 403.0), ("6P3/2", 3, 403.0)] {
        ensure(found(level, m, nm), || format!("missing {m}-photon {level} near {nm} nm"))?;
    }
    ensure((table.ionization_threshold_ev - 11.87).abs() < 1e-12, || "threshold".into())?;
    ensure(scan.ionizes_whole_window, || "4 photons do not ionize across the window".into())?;
    ensure(scan.threshold_wavelength_nm >= 417.8, || format!("threshold at {} nm", scan.threshold_wavelength_nm))?;
    Ok(format!(
        "4P1/2 ×1, 5S1/2 ×2, 6P1/2 and 6P3/2 ×3 present; 4 photons ionize below {:.1} nm",
        scan.threshold_wavelength_nm
    ))
}

fn criterion_8() -> Check {
    let rabi = RabiReference::calcium();
    let q = quadrupole_irradiance(&rabi, 2e-9).map_err(|e| e.to_string())?;
    ensure((1e8..=3e9).contains(&q), || format!("quadrupole {q:e} W/cm²"))?;
    let r = raman_irradiance(&rabi, 1e4, 1e-9).map_err(|e| e.to_string())?;
    ensure((1e5 / 3.0..=3e5).contains(&r), || format!("Raman {r:e} W/cm²"))?;
    Ok(format!("quadrupole {q:.3e} W/cm², Raman {r:.3e} W/cm²"))
}

fn criterion_9() -> Check {
    let start = Instant::now();
    let cfg = TrapConfig::default();
    let wp = Wavepacket::gaussian(&cfg, DEFAULT_SIGMA0, DEFAULT_V0).map_err(|e| e.to_string())?;
    let (trace, _) = propagate(wp, &cfg, DEFAULT_T_FINAL).map_err(|e| e.to_string())?;
    let last = trace.last().unwrap();
    let single = last.captured.iter().cloned().fold(0.0, f64::max);
    ensure(single >= 0.85, || format!("best single detector {single:.4}"))?;
    ensure(last.total_captured >= 0.99, || format!("total {:.5} at {:e} s", last.total_captured, last.t))?;
    within(start.elapsed(), Duration::from_secs(600))?;
    Ok(format!(
        "detectors {:.4?}, total {:.5} at 3 ns, in {:.1?}",
        last.captured,
        last.total_captured,
        start.elapsed()
    ))
}

fn free_width(sigma0: f64, t: f64) -> f64 {
    let w = HBAR * t / (2.0 * ELECTRON_MASS * sigma0 * sigma0);
    sigma0 * (1.0 + w * w).sqrt()
}

fn criterion_10() -> Check {
    // free spreading on a lab grid and in the co-moving frame
    let mut worst_width: f64 = 0.0;
    let lab_free = TrapConfig {
        omega_e: 0.0,
        detectors: vec![],
        grid: GridConfig { extent_x: 16e-6, extent_y: 16e-6, points_x: 256, points_y: 256 },
        dt: 1e-12,
        stepper: Stepper::Lab,
        absorber: AbsorberConfig { enabled: false, ..AbsorberConfig::default() },
        sample_interval: 0.5e-9,
        ..TrapConfig::default()
    };
    let co_free = TrapConfig {
        omega_e: 0.0,
        detectors: vec![],
        absorber: AbsorberConfig { enabled: false, ..AbsorberConfig::default() },
        sample_interval: 1e-10,
        ..TrapConfig::default()
    };
    for (cfg, sigma0, t) in [(&lab_free, 300e-9, 3e-9), (&co_free, DEFAULT_SIGMA0, 1e-9)] {
        let wp = Wavepacket::gaussian(cfg, sigma0, 0.0).map_err(|e| e.to_string())?;
        let (trace, _) = propagate(wp, cfg, t).map_err(|e| e.to_string())?;
        for s in &trace.samples {
            let want = free_width(sigma0, s.t);
            worst_width = worst_width.max((s.moments.sigma_x / want - 1.0).abs()).max((s.moments.sigma_y / want - 1.0).abs());
        }
    }
    ensure(worst_width < 1e-4, || format!("width error {worst_width:e}"))?;

    // unitarity and the classical centre on the default trap
    let mut cfg = TrapConfig { detectors: vec![], sample_interval: 1e-10, ..TrapConfig::default() };
    cfg.absorber.enabled = false;
    let wp = Wavepacket::gaussian(&cfg, DEFAULT_SIGMA0, DEFAULT_V0).map_err(|e| e.to_string())?;
    let (trace, _) = propagate(wp, &cfg, DEFAULT_T_FINAL).map_err(|e| e.to_string())?;
    let drift = trace.samples.iter().map(|s| (s.remaining_norm - 1.0).abs()).fold(0.0, f64::max);
    ensure(drift < 1e-6, || format!("norm drift {drift:e}"))?;
    let mut worst_x: f64 = 0.0;
    for s in trace.samples.iter().skip(1) {
        let (x, _) = classical_trajectory(&cfg, DEFAULT_V0, s.t).map_err(|e| e.to_string())?;
        worst_x = worst_x.max((s.moments.mean_x / x - 1.0).abs());
    }

    // independent centre check on a lab grid, stopped before the boundary
    let lab = TrapConfig {
        omega_e: 2.0e8,
        detectors: vec![],
        grid: GridConfig { extent_x: 20e-6, extent_y: 12e-6, points_x: 512, points_y: 256 },
        dt: 1e-12,
        stepper: Stepper::Lab,
        absorber: AbsorberConfig { enabled: false, ..AbsorberConfig::default() },
        sample_interval: 1e-9,
        ..TrapConfig::default()
    };
    let v0 = 600.0;
    let wp = Wavepacket::gaussian(&lab, 300e-9, v0).map_err(|e| e.to_string())?;
    let (trace, _) = propagate(wp, &lab, 12e-9).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for s in trace.samples.iter().skip(1) {
        if s.moments.mean_x + 4.0 * s.moments.sigma_x > 0.5 * lab.grid.extent_x {
            break;
        }
        let (x, _) = classical_trajectory(&lab, v0, s.t).map_err(|e| e.to_string())?;
        worst_x = worst_x.max((s.moments.mean_x / x - 1.0).abs());
        checked += 1;
    }
    ensure(checked >= 5, || format!("only {checked} lab samples before the boundary"))?;
    ensure(worst_x < 5e-3, || format!("centre error {worst_x:e}"))?;
    Ok(format!("width error {worst_width:.1e}, norm drift {drift:.1e}, centre error {worst_x:.1e}"))
}

fn criterion_11() -> Check {
    let q0 = first_zone_boundary(0.0).ok_or("no boundary found")?;
    ensure((q0 - 0.908).abs() <= 0.002, || format!("boundary at {q0}"))?;
    let ion = MathieuParams { a: 0.0, charge: 1.0, mass: CA40_ION_MASS, v_rf: 300.0, r0: 0.5e-3, omega_rf: 2.0 * PI * 25e6 };
    let electron = MathieuParams { charge: -1.0, mass: ELECTRON_MASS, ..ion };
    let ratio = q_ratio(&electron, &ion).map_err(|e| e.to_string())?.standard.abs();
    let want = CA40_ION_MASS / ELECTRON_MASS;
    ensure((ratio / want - 1.0).abs() < 1e-12, || format!("q ratio {ratio} vs {want}"))?;
    let (qi, qe) = (mathieu_q(&ion).map_err(|e| e.to_string())?, mathieu_q(&electron).map_err(|e| e.to_string())?);
    ensure(mathieu_stable(0.0, qi), || format!("ion unstable at q = {qi}"))?;
    ensure(!mathieu_stable(0.0, qe), || format!("electron stable at q = {qe}"))?;
    Ok(format!("boundary q = {q0:.4}; q_e/q_ion = {ratio:.1}; ion q = {qi:.3} stable, electron q = {:.3e} unstable", qe.abs()))
}

fn criterion_12() -> Check {
    let count = shor_op_count(640).map_err(|e| e.to_string())?;
    ensure(count == 8_388_608_000, || format!("count {count}"))?;
    let months = required_op_time(640, 5.0 * MONTH_SECONDS).map_err(|e| e.to_string())?;
    ensure((months / 1.5e-3 - 1.0).abs() <= 0.10, || format!("5 months → {months:e} s"))?;
    let minutes = required_op_time(640, 300.0).map_err(|e| e.to_string())?;
    ensure((minutes / 36e-9 - 1.0).abs() <= 0.05, || format!("5 minutes → {minutes:e} s"))?;
    let e = storage_error(10_000, 3e-9, 10.0).map_err(|e| e.to_string())?;
    ensure((e - 3e-6).abs() < 1e-15 && e < 1e-4, || format!("storage error {e:e}"))?;
    Ok(format!("{count} ops; {:.3} ms; {:.2} ns; storage {e:.1e}", months * 1e3, minutes * 1e9))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("constant-depth schedule", criterion_1),
        ("layer scaling", criterion_2),
        ("cluster verification oracle", criterion_3),
        ("measurement-pattern correctness", criterion_4),
        ("discrimination factor", criterion_5),
        ("rate scaling laws", criterion_6),
        ("resonance identification", criterion_7),
        ("irradiance estimates", criterion_8),
        ("electron capture", criterion_9),
        ("propagator properties", criterion_10),
        ("Mathieu stability", criterion_11),
        ("resource arithmetic", criterion_12),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let id = format!("{}", k + 1);
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        match check() {
            Ok(detail) => println!("PASS [{id:>2}] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{id:>2}] {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
