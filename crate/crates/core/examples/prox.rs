//! Proximal operator of the DS norm, computed by the closed-form route and by
//! alternating projections.
use dsnorm::prox::{self, ProxSettings};
use dsnorm::{DsParams, GroupStructure};

fn main() {
    let params = DsParams::new(
        GroupStructure::new(vec![3, 3]).unwrap(),
        0.4,
        vec![1.0, 1.0],
        vec![2.0, 3.0],
    )
    .unwrap();
    let z = [2.0, -0.3, 1.1, 0.2, 0.1, -0.4];
    let s = ProxSettings::default();
    for t in [0.1, 0.5, 1.0, 2.0] {
        let fast = prox::prox_ds(&z, t, &params, &s).unwrap();
        let alt = prox::prox_ds_minkowski(&z, t, &params, &s).unwrap();
        let diff = fast.iter().zip(&alt).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("t = {t:<4} prox = {fast:.4?}  max diff = {diff:.1e}");
    }
}
