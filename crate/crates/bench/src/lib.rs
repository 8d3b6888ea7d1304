//! Shared fixtures for the benchmarks.

use saxnav_core::synthetic::{generate, SyntheticSpec};
use saxnav_core::{encode_dataset, znormalize, Dataset, EncodedCorpus, SaxConfig};

/// Synthetic collection of `count` series, 200 to 400 samples each.
pub fn collection(count: usize) -> Dataset {
    let spec = SyntheticSpec {
        count,
        ..SyntheticSpec::default()
    };
    generate(&spec).expect("valid spec").0
}

pub fn corpus(count: usize, alpha: usize, omega: usize) -> EncodedCorpus {
    let config = SaxConfig::new(alpha, omega).expect("valid config");
    let normalized = znormalize(&collection(count)).expect("fresh dataset");
    encode_dataset(&normalized, config).expect("encodable")
}
