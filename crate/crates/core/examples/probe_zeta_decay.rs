use hubbard_boltzmann::collision::collision;
use hubbard_boltzmann::evolve::step_midpoint;
use hubbard_boltzmann::stationary::*;
use hubbard_boltzmann::*;

fn main() {
    let n = 128;
    let model = DispersionModel::Exponential { zeta: 0.4 };
    let mut cfg = RunConfig::new(model, n);
    cfg.t_end = 240.0;
    cfg.snapshot_stride = 0;
    let initial = WignerState::initial_state(n).unwrap();
    let (basis, n_up, n_dn) = spin_eigenbasis(initial.conserved_spin());
    let mut fit = thermal_fit(&model, n_up, n_dn, initial.conserved_energy(&model), n).unwrap();
    fit.basis = basis;
    let th = thermal_state(&fit, &model, n).unwrap();
    let s_inf = th.entropy().unwrap();
    let cache = cfg.build_cache().unwrap();

    let mut state = initial;
    let steps = (cfg.t_end / cfg.dt).round() as usize;
    let mut prev: Option<(f64, f64, f64)> = None;
    println!("t      gap          dist_to_fit   kappa_S   kappa_dist");
    for step in 0..=steps {
        if step % 1000 == 0 {
            let t = state.time();
            let gap = s_inf - state.entropy().unwrap();
            let dist = state.hs_distance(&th).unwrap();
            let (ks, kd) = prev
                .map(|(t0, g0, d0)| (((g0 / gap).ln()) / (t - t0), ((d0 / dist).ln()) / (t - t0)))
                .unwrap_or((f64::NAN, f64::NAN));
            println!("{t:6.1} {gap:+.6e} {dist:.6e}  {ks:+.4}  {kd:+.4}");
            prev = Some((t, gap, dist));
        }
        if step < steps {
            state = step_midpoint(&state, &cfg, &cache).unwrap();
        }
    }
    let out = collision(&state, &model, &cache, cfg.epsilon).unwrap();
    println!("final |C| = {:.3e}", out.max_hs_norm());
}
