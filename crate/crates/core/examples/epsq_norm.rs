//! Evaluates the εq-norm of a vector across ε and q, with its decomposition.
use dsnorm::norms::{self, EpsQ};

fn main() {
    let x = [3.0, -1.0, 0.5, 0.0, 2.0];
    for q in [1.0, 2.0, 4.0, f64::INFINITY] {
        for eps in [1.0, 0.5, 0.1, 0.01] {
            let v = norms::epsq_norm(&x, EpsQ::new(eps, q).unwrap());
            println!("q = {q:>4}  eps = {eps:<5} norm = {v:.6}");
        }
    }
    let d = norms::epsq_decompose(&x, EpsQ::new(0.3, 2.0).unwrap());
    println!("spiky part {:?}", d.spiky);
    println!("flat part  {:?}", d.flat);
}
