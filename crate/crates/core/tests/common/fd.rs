//! Central finite-difference checks shared by the unit suites and the acceptance run.

use armplan_core::heuristic::{FeatureMode, Heuristic, HeuristicConfig};
use armplan_core::kinematics::{JointVector, KinematicModel};
use armplan_core::rng::{self, seeded};
use armplan_core::tensor::{Activation, DropoutMode, Graph, Mlp, MlpSpec, ParamStore, Tensor, Var};
use armplan_core::world::{BoxObstacle, Profile, Workspace};
use rand::Rng;

pub const H: f64 = 1e-5;

pub fn random(rows: usize, cols: usize, r: &mut impl Rng) -> Tensor {
    Tensor::new(
        rows,
        cols,
        (0..rows * cols)
            .map(|_| r.random_range(-1.0..1.0))
            .collect(),
    )
    .unwrap()
}

/// Relative error with a small absolute floor so near-zero gradients compare sanely.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

/// Builds `build(inputs)`, projects the output onto fixed random weights, and
/// compares reverse-mode gradients of every input with central differences.
pub fn grad_check<F>(inputs: &[Tensor], build: F) -> f64
where
    F: Fn(&mut Graph, &[Var]) -> Var,
{
    let mut r = rng::seeded(99);
    let eval = |xs: &[Tensor], proj: Option<&Tensor>| -> (Graph, Vec<Var>, Var) {
        let mut g = Graph::new();
        let vars: Vec<Var> = xs.iter().map(|t| g.constant(t.clone())).collect();
        let out = build(&mut g, &vars);
        let loss = match proj {
            Some(p) => g.weighted_sum(out, p).unwrap(),
            None => out,
        };
        (g, vars, loss)
    };
    let (g0, _, out0) = eval(inputs, None);
    let shape = g0.value(out0).shape();
    let proj = if shape == [1, 1] {
        Tensor::scalar(1.0)
    } else {
        random(shape[0], shape[1], &mut r)
    };
    let (g, vars, loss) = eval(inputs, Some(&proj));
    let grads = g.backward(loss).unwrap();
    let mut worst: f64 = 0.0;
    for (i, v) in vars.iter().enumerate() {
        let analytic = grads.get(*v);
        for j in 0..inputs[i].len() {
            let mut plus = inputs.to_vec();
            plus[i].data_mut()[j] += H;
            let mut minus = inputs.to_vec();
            minus[i].data_mut()[j] -= H;
            let (gp, _, lp) = eval(&plus, Some(&proj));
            let (gm, _, lm) = eval(&minus, Some(&proj));
            let numeric = (gp.value(lp).data()[0] - gm.value(lm).data()[0]) / (2.0 * H);
            worst = worst.max(rel_err(analytic.data()[j], numeric));
        }
    }
    worst
}

/// Worst relative gradient error of every differentiable op.
pub fn op_errors() -> Vec<(&'static str, f64)> {
    let mut r = rng::seeded(1);
    let (a, b, bias) = (
        random(3, 4, &mut r),
        random(4, 2, &mut r),
        random(1, 2, &mut r),
    );
    let c = random(5, 4, &mut r);
    let (x, y) = (random(2, 5, &mut r), random(2, 5, &mut r));
    let slope = Tensor::scalar(0.3);
    let (q1, k1, v1) = (
        random(2, 3, &mut r),
        random(2, 3, &mut r),
        random(2, 3, &mut r),
    );
    let (q3, k3, v3) = (
        random(6, 3, &mut r),
        random(12, 3, &mut r),
        random(12, 2, &mut r),
    );
    vec![
        (
            "affine",
            grad_check(&[a.clone(), b, bias], |g, v| {
                g.affine(v[0], v[1], v[2]).unwrap()
            }),
        ),
        (
            "matmul_bt",
            grad_check(&[a, c], |g, v| g.matmul_bt(v[0], v[1]).unwrap()),
        ),
        (
            "add",
            grad_check(&[x.clone(), y.clone()], |g, v| g.add(v[0], v[1]).unwrap()),
        ),
        (
            "sub",
            grad_check(&[x.clone(), y.clone()], |g, v| g.sub(v[0], v[1]).unwrap()),
        ),
        (
            "scale",
            grad_check(std::slice::from_ref(&x), |g, v| {
                g.scale(v[0], -1.7).unwrap()
            }),
        ),
        (
            "relu",
            grad_check(std::slice::from_ref(&x), |g, v| g.relu(v[0]).unwrap()),
        ),
        (
            "prelu",
            grad_check(&[x.clone(), slope], |g, v| g.prelu(v[0], v[1]).unwrap()),
        ),
        (
            "softmax",
            grad_check(std::slice::from_ref(&x), |g, v| {
                g.softmax_rows(v[0]).unwrap()
            }),
        ),
        (
            "reshape",
            grad_check(std::slice::from_ref(&x), |g, v| {
                g.reshape(v[0], 5, 2).unwrap()
            }),
        ),
        (
            "concat",
            grad_check(&[x.clone(), y.clone()], |g, v| {
                g.concat_cols(&[v[0], v[1], v[0]]).unwrap()
            }),
        ),
        (
            "gather",
            grad_check(std::slice::from_ref(&x), |g, v| {
                g.gather_rows(v[0], &[1, 0, 1]).unwrap()
            }),
        ),
        (
            "scatter",
            grad_check(std::slice::from_ref(&x), |g, v| {
                g.scatter_add_rows(v[0], &[2, 2], 3).unwrap()
            }),
        ),
        (
            "mse",
            grad_check(&[x], |g, v| g.mse_loss(v[0], &y).unwrap()),
        ),
        (
            "attention",
            grad_check(&[q1, k1, v1], |g, x| {
                g.scaled_dot_attention(x[0], x[1], x[2]).unwrap()
            }),
        ),
        (
            "grouped_attention",
            grad_check(&[q3, k3, v3], |g, x| {
                g.attention(x[0], x[1], x[2], 3).unwrap()
            }),
        ),
        ("mlp", mlp_param_error()),
    ]
}

/// Worst relative error of MLP parameter gradients under an MSE loss.
pub fn mlp_param_error() -> f64 {
    let mut r = rng::seeded(4);
    let mut store = ParamStore::new();
    let spec = MlpSpec::new(&[4, 5, 3], Activation::Prelu);
    let mlp = Mlp::new(&mut store, "mlp", spec, &mut r).unwrap();
    let x = random(2, 4, &mut r);
    let target = random(2, 3, &mut r);

    let loss_of = |s: &ParamStore| -> f64 {
        let mut g = Graph::new();
        let xv = g.constant(x.clone());
        let y = mlp
            .forward(&mut g, s, xv, DropoutMode::Off, &mut rng::seeded(0))
            .unwrap();
        let l = g.mse_loss(y, &target).unwrap();
        g.value(l).data()[0]
    };
    let mut g = Graph::new();
    let xv = g.constant(x.clone());
    let y = mlp
        .forward(&mut g, &store, xv, DropoutMode::Off, &mut rng::seeded(0))
        .unwrap();
    let l = g.mse_loss(y, &target).unwrap();
    store.zero_grad();
    g.backward(l).unwrap().accumulate(&mut store);

    let mut worst: f64 = 0.0;
    for id in store.ids().collect::<Vec<_>>() {
        for j in 0..store.value(id).len() {
            let mut p = store.clone();
            p.value_mut(id).data_mut()[j] += H;
            let mut m = store.clone();
            m.value_mut(id).data_mut()[j] -= H;
            let numeric = (loss_of(&p) - loss_of(&m)) / (2.0 * H);
            worst = worst.max(rel_err(store.grad(id).data()[j], numeric));
        }
    }
    worst
}

/// Worst relative error over a spread of parameters of the width-8 heuristic,
/// end to end from features to the loss, and the number of entries checked.
pub fn heuristic_end_to_end_error() -> (f64, usize) {
    let model = KinematicModel::ur5e();
    let ws = Workspace::with_obstacles(
        Profile::Simple,
        vec![
            BoxObstacle::new([0.5, 0.2, 0.3], [0.2, 0.2, 0.2]).unwrap(),
            BoxObstacle::new([-0.3, 0.5, 0.6], [0.1, 0.3, 0.15]).unwrap(),
        ],
    )
    .unwrap();
    let cfg = HeuristicConfig::toy(FeatureMode::Full, 6);
    let mut h = Heuristic::new(cfg, 21).unwrap();
    let mut rng = seeded(8);
    let mut random_q = || JointVector(std::array::from_fn(|_| rng.random_range(-3.0..3.0)));
    let mut feats = Vec::new();
    let mut obs = Vec::new();
    for _ in 0..3 {
        let (a, b) = (random_q(), random_q());
        let (f, o) = h.inputs(&a, &b, &ws, &model).unwrap();
        feats.extend(f);
        obs.extend(o);
    }
    let mut rng = seeded(9);
    let target = Tensor::new(3, 6, (0..18).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    let ft = Tensor::new(3, feats.len() / 3, feats).unwrap();
    let ot = Tensor::new(3, obs.len() / 3, obs).unwrap();
    let loss_of = |h: &Heuristic| {
        let mut g = Graph::new();
        let f = g.constant(ft.clone());
        let o = g.constant(ot.clone());
        let out = h
            .forward(&mut g, f, o, DropoutMode::Off, &mut seeded(0))
            .unwrap();
        let loss = g.mse_loss(out, &target).unwrap();
        let grads = g.backward(loss).unwrap();
        (g.value(loss).data()[0], grads)
    };
    let (_, grads) = loss_of(&h);
    h.params_mut().zero_grad();
    grads.accumulate(h.params_mut());
    let ids: Vec<_> = h.params().ids().collect();
    let (mut worst, mut checked): (f64, usize) = (0.0, 0);
    for id in ids {
        let n = h.params().value(id).data().len();
        for k in (0..n).step_by((n / 4).max(1)) {
            let an = h.params().grad(id).data()[k];
            let orig = h.params().value(id).data()[k];
            h.params_mut().value_mut(id).data_mut()[k] = orig + H;
            let lp = loss_of(&h).0;
            h.params_mut().value_mut(id).data_mut()[k] = orig - H;
            let lm = loss_of(&h).0;
            h.params_mut().value_mut(id).data_mut()[k] = orig;
            worst = worst.max(rel_err(an, (lp - lm) / (2.0 * H)));
            checked += 1;
        }
    }
    (worst, checked)
}
