//! Checks backprop against central finite differences on a small f64 network.

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use segrl::nn::{ConvSpec, NetShape, PolicyValueNet, Tensor};

fn objective(net: &PolicyValueNet<f64>, obs: &Tensor<f64>, gl: &[f64], gv: &[f64]) -> Result<f64> {
    let (l, v) = net.forward(obs)?;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    Ok(dot(l.data(), gl) + dot(v.data(), gv))
}

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let shape = NetShape {
        in_channels: 2,
        in_height: 10,
        in_width: 10,
        convs: vec![ConvSpec { out_channels: 4, kernel: 4, stride: 2 }, ConvSpec { out_channels: 4, kernel: 2, stride: 1 }],
        hidden: 8,
        actions: 3,
    };
    let mut net = PolicyValueNet::<f64>::new(shape.clone(), &mut rng)?;
    let batch = 2;
    let obs: Vec<f64> = (0..batch * shape.input_len()).map(|_| rng.random_range(0.0..1.0)).collect();
    let obs = Tensor::from_vec(&[batch, 2, 10, 10], obs)?;
    let gl: Vec<f64> = (0..batch * 3).map(|_| rng.random_range(-1.0..1.0)).collect();
    let gv: Vec<f64> = (0..batch).map(|_| rng.random_range(-1.0..1.0)).collect();

    net.forward_train(&obs)?;
    let grads = net.backward(&obs, &Tensor::from_vec(&[batch, 3], gl.clone())?, &Tensor::from_vec(&[batch], gv.clone())?)?;

    // A small step keeps most coordinates clear of ReLU kinks.
    let h = 1e-6;
    for (t, name) in net.param_names().to_vec().iter().enumerate() {
        let mut worst: f64 = 0.0;
        for i in 0..net.params()[t].data().len() {
            let orig = net.params()[t].data()[i];
            net.params_mut()[t].data_mut()[i] = orig + h;
            let up = objective(&net, &obs, &gl, &gv)?;
            net.params_mut()[t].data_mut()[i] = orig - h;
            let down = objective(&net, &obs, &gl, &gv)?;
            net.params_mut()[t].data_mut()[i] = orig;
            let numeric = (up - down) / (2.0 * h);
            let analytic = grads.tensors[t].data()[i];
            worst = worst.max((analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6));
        }
        println!("{name:<16} max relative error {worst:.2e}");
    }
    Ok(())
}
