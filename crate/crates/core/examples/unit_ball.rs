//! Prints the planar unit sphere of the εq-norm as CSV, one block per ε.
use dsnorm::norms::{self, EpsQ};

fn main() {
    println!("eps,x,y");
    for eps in [1.0, 0.5, 0.2, 0.05] {
        for [x, y] in norms::epsq_ball_boundary(EpsQ::new(eps, 2.0).unwrap(), 72).unwrap() {
            println!("{eps},{x:.6},{y:.6}");
        }
    }
}
