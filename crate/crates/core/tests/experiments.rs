use spreadcs::experiments::{with_threads, MRule};
use spreadcs::*;

fn single_cell(
    sensing: TransformKind,
    sparsity: TransformKind,
    modulation: ModulationChoice,
    n: usize,
    s: usize,
    m: usize,
    trials: usize,
) -> f64 {
    let mut cfg = PhaseTransitionConfig::new(sensing, sparsity, modulation, n, vec![s], trials, 17);
    cfg.m_rule = MRule::Explicit(vec![m]);
    phase_transition(&cfg).unwrap().cells[0].probability
}

#[test]
fn modulated_dirac_cell_succeeds() {
    let p = single_cell(
        TransformKind::Fourier,
        TransformKind::Dirac,
        ModulationChoice::random(ModulationKind::Rademacher),
        128,
        4,
        40,
        50,
    );
    assert!(p >= 0.9, "{p}");
}

#[test]
fn coherent_pair_fails_without_modulation() {
    let p = single_cell(
        TransformKind::Fourier,
        TransformKind::Fourier,
        ModulationChoice::none(),
        128,
        4,
        40,
        50,
    );
    assert!(p <= 0.1, "{p}");
}

#[test]
fn full_row_set_always_recovers() {
    for sparsity in TransformKind::ALL {
        let mut cfg = PhaseTransitionConfig::new(
            TransformKind::Hadamard,
            sparsity,
            ModulationChoice::none(),
            64,
            vec![1, 8, 32, 64],
            3,
            1,
        );
        cfg.m_rule = MRule::Explicit(vec![64]);
        cfg.index_law = IndexLaw::UniformWithoutReplacement;
        let report = phase_transition(&cfg).unwrap();
        assert!(report.cells.iter().all(|c| c.successes == c.trials), "{sparsity}");
    }
}

#[test]
fn trial_full_sampling_dirac() {
    let mut cfg = SensingConfig::new(
        TransformKind::Fourier,
        TransformKind::Dirac,
        ModulationChoice::none(),
        64,
        64,
        1,
    );
    cfg.index_law = IndexLaw::UniformWithoutReplacement;
    for seed in 0..5 {
        assert!(run_trial(&cfg, seed).unwrap().recovered);
    }
}

#[test]
fn universality_at_small_scale() {
    // Same seeds for every basis, so cells differ only through the basis.
    // Cells sit on the transition where the bases disagree most at this size.
    let run = |sparsity| {
        let mut cfg = PhaseTransitionConfig::new(
            TransformKind::Fourier,
            sparsity,
            ModulationChoice::random(ModulationKind::Steinhaus),
            64,
            vec![4],
            200,
            3,
        );
        cfg.m_rule = MRule::Explicit(vec![12, 16, 24]);
        phase_transition(&cfg).unwrap()
    };
    let reports: Vec<ExperimentReport> = TransformKind::ALL.iter().map(|&k| run(k)).collect();
    for cell in 0..3 {
        let probs: Vec<f64> = reports.iter().map(|r| r.cells[cell].probability).collect();
        let spread = probs.iter().cloned().fold(f64::MIN, f64::max)
            - probs.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread <= 0.2, "cell {cell}: {probs:?}");
    }
}

#[test]
fn more_noise_means_larger_error() {
    let mut errors = [Vec::new(), Vec::new()];
    for (slot, snr) in [20.0, 40.0].into_iter().enumerate() {
        let mut cfg = SensingConfig::new(
            TransformKind::Fourier,
            TransformKind::Haar,
            ModulationChoice::random(ModulationKind::Rademacher),
            64,
            32,
            4,
        );
        cfg.snr_db = Some(snr);
        for seed in 0..25 {
            errors[slot].push(run_trial(&cfg, seed).unwrap().rel_error);
        }
    }
    let median = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let low_snr = median(&mut errors[0]);
    let high_snr = median(&mut errors[1]);
    assert!(low_snr >= high_snr, "{low_snr} < {high_snr}");
}

#[test]
fn chirp_curves_at_full_size() {
    let curve = |sparsity, w_bar, m| {
        let mut cfg = RecoveryCurveConfig::new(sparsity, 1024, 10, vec![w_bar], 10, 21);
        cfg.m_grid = Some(vec![m]);
        recovery_curve(&cfg).unwrap().cells[0].probability
    };
    assert!(curve(TransformKind::Dirac, 0.0, 100) >= 0.9);
    assert!(curve(TransformKind::Fourier, 0.0, 200) <= 0.1);
    assert!(curve(TransformKind::Fourier, 0.5, 150) >= 0.9);
}

#[test]
fn reports_are_schedule_invariant() {
    let cfg = PhaseTransitionConfig::new(
        TransformKind::Hadamard,
        TransformKind::Haar,
        ModulationChoice::random(ModulationKind::Rademacher),
        32,
        vec![2, 4],
        5,
        9,
    );
    let render = |threads| {
        with_threads(Some(threads), || {
            let mut out = Vec::new();
            phase_transition(&cfg).unwrap().write_json(&mut out, false).unwrap();
            out
        })
        .unwrap()
    };
    assert_eq!(render(1), render(3));
}

#[test]
fn oversized_explicit_grid_is_rejected() {
    let mut cfg = PhaseTransitionConfig::new(
        TransformKind::Fourier,
        TransformKind::Dirac,
        ModulationChoice::none(),
        32,
        vec![4],
        2,
        0,
    );
    cfg.m_rule = MRule::Explicit(vec![40]);
    assert!(phase_transition(&cfg).unwrap_err().is_invalid_input());
}
