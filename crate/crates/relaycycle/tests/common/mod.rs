// Each integration target compiles this module separately and uses a subset.
#![allow(dead_code)]

//! Shared helpers for the integration suites.

use rand::rngs::StdRng;
use rand::Rng;

use relaycycle::plant::{Plant, PlantSpec};

pub fn reference_plant() -> Plant {
    Plant::new(PlantSpec::new(-1.0, 3.0, 3.0, 2.0)).unwrap()
}

/// Random positive-zero plant of the requested pole class, with pole rates,
/// kappa, and gamma in moderate ranges so simulator runs stay short.
pub fn sample_plant(rng: &mut StdRng, class: usize) -> Plant {
    let kappa = rng.gen_range(0.2..3.0);
    let gamma = rng.gen_range(0.2..3.0);
    match class {
        0 => {
            let beta = rng.gen_range(0.25..1.5);
            let alpha = beta + rng.gen_range(0.2..2.5);
            Plant::from_kappa_gamma(kappa, gamma, alpha + beta, alpha * beta).unwrap()
        }
        1 => {
            let alpha = rng.gen_range(0.25..2.5);
            Plant::from_kappa_gamma(kappa, gamma, 2.0 * alpha, alpha * alpha).unwrap()
        }
        _ => {
            let sigma = rng.gen_range(0.2..1.5);
            let omega = rng.gen_range(0.4..3.0);
            Plant::from_kappa_gamma(kappa, gamma, 2.0 * sigma, sigma * sigma + omega * omega)
                .unwrap()
        }
    }
}

/// Classical RK4 on dx/dt = A x - B with a fixed step: the independent
/// trajectory oracle for the closed forms.
pub fn rk4_flow(plant: &Plant, x0: [f64; 2], t_end: f64, dt: f64) -> [f64; 2] {
    let r = plant.realization();
    let f = |x: [f64; 2]| {
        [
            r.a[0][0] * x[0] + r.a[0][1] * x[1] - r.b[0],
            r.a[1][0] * x[0] + r.a[1][1] * x[1] - r.b[1],
        ]
    };
    let mut x = x0;
    let steps = (t_end / dt).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;
    for _ in 0..steps {
        let k1 = f(x);
        let k2 = f([x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1]]);
        let k3 = f([x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1]]);
        let k4 = f([x[0] + h * k3[0], x[1] + h * k3[1]]);
        x = [
            x[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            x[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
    }
    x
}

/// Print the per-criterion verdict line and panic on failure.
pub fn report(criterion: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("[criterion {criterion}] {name}: {verdict}{}{detail}", if detail.is_empty() { "" } else { " — " });
    assert!(pass, "criterion {criterion} ({name}) failed: {detail}");
}
