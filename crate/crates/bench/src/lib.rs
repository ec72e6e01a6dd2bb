//! Fixtures shared by the benchmarks.

use covercount::monodromy::component_data;
use covercount::{
    Arrangement, ArtalFamilyConfig, Complex64, ComponentCoverData, Result, UnivariatePoly,
};

/// Degree-`n` polynomial with a root of multiplicity `k` at `0.3 + 0.2i`
/// and the remaining roots spread on the unit circle.
pub fn clustered_poly(n: usize, k: usize) -> UnivariatePoly {
    let mut roots = vec![Complex64::new(0.3, 0.2); k];
    let rest = n - k;
    roots.extend((0..rest).map(|i| Complex64::from_polar(1.0, 0.7 + i as f64 * 6.2 / rest as f64)));
    UnivariatePoly::from_roots(&roots)
}

/// The three-line arrangement on `B_{b,mu}` with the standard tangent triple.
pub fn artal(b: u32, mu: u32, seed: u64) -> Result<Arrangement> {
    Arrangement::artal(&ArtalFamilyConfig::new(b, mu, seed)?)
}

/// Cover data of the first line of [`artal`].
pub fn first_component(b: u32, mu: u32, seed: u64) -> Result<ComponentCoverData> {
    let arr = artal(b, mu, seed)?;
    component_data(&arr.cover, &arr.components[0], seed)
}
