//! Small simulation study: median estimation error against n and the fitted
//! log-log slope.
use dsnorm::simulate::{self, Covariance, DesignConfig, ExperimentConfig, LambdaRule};
use dsnorm::theory::SparsityLevel;
use dsnorm::{DsParams, GroupStructure};

fn main() {
    let cfg = ExperimentConfig {
        n_grid: vec![100, 200, 400, 800],
        trials_per_n: 10,
        params: DsParams::uniform_alpha(GroupStructure::uniform(10, 3).unwrap(), 0.5, 2.0).unwrap(),
        lambda_rule: LambdaRule::Scaled { factor: 0.25 },
        tol: 1e-8,
        max_iters: 20_000,
        base_seed: 7,
        design: DesignConfig {
            noise_sigma: 1.0,
            covariance: Covariance::Toeplitz { rho: 0.2 },
            sparsity: SparsityLevel::new(4, 2),
            signal_magnitude: 1.0,
        },
    };
    let record = simulate::run_experiment(&cfg).unwrap();
    let summary = simulate::summarize(&record);
    for row in &summary.medians {
        println!("n = {:>4}: median error {:.4}", row.n, row.median_error_l2);
    }
    if let Some(fit) = summary.rate_fit {
        println!("slope {:.3}", fit.slope);
    }
}
