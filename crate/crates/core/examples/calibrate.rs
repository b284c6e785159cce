//! Integration-only vs fused error over a batch of seeds for the noise
//! presets. `cargo run -p topometric-core --example calibrate --release`

use topometric_core::fusion::fuse;
use topometric_core::metrics::{evaluate, max_translation_error, DEFAULT_SUB_LENGTHS};
use topometric_core::simulator::{OdometryNoiseModel, PathKind, Scenario, ScenarioParams};
use topometric_core::{integrate, FusionConfig};

fn run(label: &str, length: f64, noise: fn(u64) -> OdometryNoiseModel) {
    let cfg = FusionConfig::default();
    let (mut m_sum, mut f_sum, mut worst_ratio, mut worst_f) = (0.0, 0.0, f64::INFINITY, 0.0f64);
    let (mut m_lo, mut m_hi) = (f64::INFINITY, 0.0f64);
    for seed in 0..20 {
        let params = ScenarioParams::new(PathKind::Loop, length, seed).with_noise(noise(seed));
        let sc = Scenario::generate(&params).unwrap();
        let metric = integrate(sc.origin(), &sc.motions);
        let fused = fuse(&sc.motions, &sc.detections, &sc.map, sc.origin(), &cfg).unwrap();
        let rm = evaluate(&metric, &sc.ground_truth, &DEFAULT_SUB_LENGTHS).unwrap();
        let rf = evaluate(&fused, &sc.ground_truth, &DEFAULT_SUB_LENGTHS).unwrap();
        let ratio = rm.avg_translation_pct / rf.avg_translation_pct;
        println!(
            "{label} seed {seed:2}: metric {:.3}% {:.4}deg/m max {:.2}m | fused {:.3}% {:.4}deg/m max {:.3}m | ratio {:.1}",
            rm.avg_translation_pct, rm.avg_rotation_deg_per_m,
            max_translation_error(&metric, &sc.ground_truth).unwrap(),
            rf.avg_translation_pct, rf.avg_rotation_deg_per_m,
            max_translation_error(&fused, &sc.ground_truth).unwrap(), ratio
        );
        m_sum += rm.avg_translation_pct;
        f_sum += rf.avg_translation_pct;
        m_lo = m_lo.min(rm.avg_translation_pct);
        m_hi = m_hi.max(rm.avg_translation_pct);
        worst_ratio = worst_ratio.min(ratio);
        worst_f = worst_f.max(rf.avg_translation_pct);
    }
    println!(
        "{label}: metric mean {:.3}% [{:.3}, {:.3}], fused mean {:.3}% worst {:.3}%, worst ratio {:.1}",
        m_sum / 20.0, m_lo, m_hi, f_sum / 20.0, worst_f, worst_ratio
    );
}

fn main() {
    run("short", 262.0, OdometryNoiseModel::short_sequence);
    run("long", 446.0, OdometryNoiseModel::long_sequence);
}
