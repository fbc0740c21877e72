//! Error-bound report for a grouped design, and the seven special cases.
use dsnorm::theory::{self, CaseInputs, DesignModel, SparsityLevel, SpecialCase};
use dsnorm::{DsParams, GroupStructure};

fn main() {
    let model = DesignModel::toeplitz(40, 0.3, 1.0).unwrap();
    let params = DsParams::uniform_alpha(GroupStructure::uniform(8, 5).unwrap(), 0.5, 2.0).unwrap();
    for n in [1_000, 100_000, 10_000_000] {
        let lambda = theory::lambda_recommendation(&params, n, &model).unwrap();
        let r = theory::l2_error_bound(&params, &model, n, lambda, SparsityLevel::new(6, 2)).unwrap();
        println!("n = {n:>9}: lambda = {:.1}, n_min = {}, bound = {:?}", r.lambda, r.n_min, r.l2_bound.value());
    }
    for id in 1..=7 {
        let case = SpecialCase::from_id(id).unwrap();
        // the LASSO case works on singletons, so every active coordinate is its own group
        let s_g = if case == SpecialCase::Lasso { 6 } else { 2 };
        let inputs = CaseInputs {
            sizes: vec![5; 8],
            weights: None,
            tau: 0.5,
            n: 10_000_000,
            model: model.clone(),
            sparsity: SparsityLevel::new(6, s_g),
        };
        let e = theory::case_specialization(case, &inputs).unwrap();
        println!("case {id} {case:?}: lambda case/general = {:.3}", e.lambda_case / e.lambda_general);
    }
}
