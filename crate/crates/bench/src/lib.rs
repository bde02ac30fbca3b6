//! Fixtures shared by the kernel benchmarks.

use qexplore::harness::{build_task, ExperimentConfig, TaskSetup};

/// Cross-resonance PWC task at `duration_ns` with 2 ns steps.
pub fn cross_resonance_pwc(duration_ns: f64) -> TaskSetup {
    let text = format!(
        "task = 'pwc'\noptimizers = ['grape']\ndurations_ns = [{duration_ns:?}]\n[budget]\nepisodes = 1\n"
    );
    build_task(&ExperimentConfig::parse(&text).expect("valid config"), duration_ns).expect("task builds")
}

/// Filtered-pulse GRAPE problem on the cross-resonance pair, 4 ns steps.
pub fn cross_resonance_filtered_config(duration_ns: f64, resolution: usize) -> ExperimentConfig {
    let text = format!(
        "task = 'filtered'\noptimizers = ['grape']\ndurations_ns = [{duration_ns:?}]\n[budget]\nepisodes = 1\n[filtered]\nresolution = {resolution}\n"
    );
    ExperimentConfig::parse(&text).expect("valid config")
}
