//! The DS norm and its dual on a three-group layout, checked against Hölder.
use dsnorm::{ds, DsParams, GroupStructure};

fn main() {
    let groups = GroupStructure::new(vec![2, 3, 4]).unwrap();
    let beta = [1.0, -0.5, 0.0, 0.0, 0.0, 2.0, 2.0, -2.0, 1.0];
    let probe = [0.3, 0.1, -0.2, 0.5, 0.0, 0.4, 0.4, -0.1, 0.2];
    for tau in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let params = DsParams::new(groups.clone(), tau, vec![1.0, 1.5, 2.0], vec![2.0, 1.0, f64::INFINITY]).unwrap();
        let n = ds::ds_norm(&beta, &params).unwrap();
        let d = ds::ds_dual_norm(&probe, &params).unwrap();
        let inner: f64 = beta.iter().zip(&probe).map(|(a, b)| a * b).sum();
        println!("tau = {tau:<4} norm = {n:.6}  dual(probe) = {d:.6}  <beta,probe> = {inner:.4} <= {:.4}", n * d);
    }
}
