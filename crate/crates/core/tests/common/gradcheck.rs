use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sumlife_core::nn::{Architecture, BatchInput, Hyper, Network};
use sumlife_core::tensor::Tensor;

pub const FD_EPS: f64 = 1e-5;
/// Gradients below this magnitude are compared absolutely.
pub const REL_FLOOR: f64 = 1e-6;

/// Small random batch: `n` rows, the first `targets` labeled.
pub fn random_batch(seed: u64, n: usize, targets: usize, width: usize, classes: usize) -> BatchInput {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xba7c);
    let x = Tensor::from_vec(
        n,
        width,
        (0..n * width)
            .map(|_| if rng.gen_bool(0.4) { 1.0 } else { 0.0 })
            .collect(),
    )
    .unwrap();
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in 0..n as u32 {
            if u != v && rng.gen_bool(0.3) {
                edges.push((u, v));
            }
        }
    }
    BatchInput {
        x,
        targets,
        labels: (0..targets).map(|_| rng.gen_range(0..classes as u32)).collect(),
        edges,
    }
}

/// Network with every parameter, biases included, drawn uniformly.
pub fn random_network(arch: Architecture, hyper: Hyper, width: usize, classes: usize, seed: u64) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Network::new(arch, hyper, width, classes, &mut rng).unwrap();
    for p in &mut net.params {
        for x in p.data_mut() {
            *x = rng.gen_range(-1.0..1.0);
        }
    }
    net
}

/// Largest relative deviation between analytic and central-difference
/// gradients over all parameters. Dropout masks are replayed from `seed`.
pub fn max_relative_error(net: &Network, batch: &BatchInput, seed: u64) -> f64 {
    let loss = |n: &Network| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        n.loss_and_grads(batch, Some(&mut rng)).unwrap().loss
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = net.loss_and_grads(batch, Some(&mut rng)).unwrap();
    let mut worst: f64 = 0.0;
    let mut probe = net.clone();
    for (k, g) in step.grads.iter().enumerate() {
        for i in 0..g.len() {
            let orig = probe.params[k].data()[i];
            probe.params[k].data_mut()[i] = orig + FD_EPS;
            let up = loss(&probe);
            probe.params[k].data_mut()[i] = orig - FD_EPS;
            let down = loss(&probe);
            probe.params[k].data_mut()[i] = orig;
            let fd = (up - down) / (2.0 * FD_EPS);
            let an = g.data()[i];
            let rel = (fd - an).abs() / fd.abs().max(an.abs()).max(REL_FLOOR);
            worst = worst.max(rel);
        }
    }
    worst
}

pub fn small_hyper(arch: Architecture, normalize: bool) -> Hyper {
    let mut h = Hyper::defaults(arch);
    h.hidden = if arch == Architecture::GcnEdges { 3 } else { 4 };
    h.normalize = normalize;
    h
}
