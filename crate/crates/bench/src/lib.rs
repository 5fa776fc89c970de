//! Shared fixtures for the benchmarks.

use gdopsel::measurement::{simulate_toa_abstract, NoiseModel, ToaSet};
use gdopsel::scenario::{gen_ioo, gen_umi, IooParams, Scenario, UmiParams};

/// A fixed indoor scenario with its abstract-backend measurements.
pub fn ioo_fixture(seed: u64) -> (Scenario, ToaSet) {
    let scenario = gen_ioo(seed, &IooParams::default()).expect("ioo scenario");
    let toas = simulate_toa_abstract(&scenario, &NoiseModel::INDOOR, seed).expect("toas");
    (scenario, toas)
}

/// A fixed outdoor scenario with its abstract-backend measurements.
pub fn umi_fixture(seed: u64) -> (Scenario, ToaSet) {
    let scenario = gen_umi(seed, &UmiParams::default()).expect("umi scenario");
    let toas = simulate_toa_abstract(&scenario, &NoiseModel::OUTDOOR, seed).expect("toas");
    (scenario, toas)
}
