//! Writes a Barabasi-Albert edgelist to stdout.
//!
//! `cargo run -p linkbench-core --example gen_ba -- <nodes> <attach> <seed>`

use linkbench_core::generators::barabasi_albert;

fn main() {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("arguments are integers"))
        .collect();
    let [n, attach, seed] = args[..] else {
        eprintln!("usage: gen_ba <nodes> <attach> <seed>");
        std::process::exit(2);
    };
    let g = barabasi_albert(n, attach, seed as u64);
    for &(u, v) in g.edges() {
        println!("{u} {v}");
    }
}
