//! Monte Carlo check that the dual norm of the noise correlation stays below
//! its high-probability bound.
use dsnorm::simulate::{self, InstanceSpec};
use dsnorm::theory::{self, DesignModel, SparsityLevel};
use dsnorm::{ds, DsParams, GroupStructure};
use ndarray::Array2;

fn main() {
    let groups = GroupStructure::uniform(20, 4).unwrap();
    let params = DsParams::uniform_alpha(groups.clone(), 0.3, 2.0).unwrap();
    let model = DesignModel::identity(80, 1.0).unwrap();
    let n = 300;
    let bound = theory::noise_dual_bound(&params, n, &model).unwrap();
    let mut worst = 0.0_f64;
    for seed in 0..200 {
        let inst = simulate::gaussian_design(&InstanceSpec {
            n,
            groups: groups.clone(),
            sigma_matrix: Array2::eye(80),
            noise_sigma: 1.0,
            sparsity: SparsityLevel::new(0, 0),
            signal_magnitude: 1.0,
            seed,
        })
        .unwrap();
        let corr = inst.x.t().dot(&inst.noise) / n as f64;
        worst = worst.max(ds::ds_dual_norm(corr.as_slice().unwrap(), &params).unwrap());
    }
    println!("largest observed {worst:.4} vs bound {bound:.4}");
}
