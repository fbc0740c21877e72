//! Fits a sparse-group penalty on a simulated design and reports the
//! certified duality gap and support recovery.
use dsnorm::simulate::{self, InstanceSpec};
use dsnorm::solver::{self, Problem, SolveOptions};
use dsnorm::theory::{self, DesignModel, SparsityLevel};
use dsnorm::{DsParams, GroupStructure};
use ndarray::Array2;

fn main() {
    let groups = GroupStructure::uniform(10, 5).unwrap();
    let spec = InstanceSpec {
        n: 200,
        groups: groups.clone(),
        sigma_matrix: Array2::eye(50),
        noise_sigma: 0.5,
        sparsity: SparsityLevel::new(6, 2),
        signal_magnitude: 1.0,
        seed: 42,
    };
    let inst = simulate::gaussian_design(&spec).unwrap();
    let params = DsParams::uniform_alpha(groups, 0.5, 2.0).unwrap();
    let model = DesignModel::identity(50, 0.5).unwrap();
    let lambda = 0.25 * theory::lambda_recommendation(&params, 200, &model).unwrap();
    let prob = Problem::new(inst.x, inst.y, lambda, params).unwrap();
    let res = solver::solve_with(&prob, &SolveOptions { tol: 1e-8, ..SolveOptions::default() }).unwrap();
    println!("lambda = {lambda:.3}, iterations = {}, gap = {:.2e}", res.iterations, res.duality_gap);
    for (j, (b, t)) in res.beta_hat.iter().zip(inst.beta_star.iter()).enumerate() {
        if *t != 0.0 || b.abs() > 1e-8 {
            println!("  coef {j:>2}: estimate {b:>8.4}  truth {t:>5.2}");
        }
    }
}
