use meeg_core::lens::{tsne_affinities, tsne_descend};
use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::time::Instant;

fn main() {
    let n = 2000;
    let c = 32;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = Array2::from_shape_fn((n, c), |_| rng.sample::<f64, _>(StandardNormal));
    let t0 = Instant::now();
    let aff = tsne_affinities(&x, 30.0).unwrap();
    println!("affinities: {:.2?}", t0.elapsed());
    let t1 = Instant::now();
    let (emb, _) = tsne_descend(&aff, 100, 200.0, 7, false);
    println!("descent 100 iters: {:.2?}  (x10 for 1000)", t1.elapsed());
    println!("{}", emb[(0,0)]);
}
