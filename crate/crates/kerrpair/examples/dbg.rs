// temporary debug probe: redfield step counts
use kerrpair::fock::{coherent_state, product_density, TruncatedSpace};
use kerrpair::lindblad::IntegratorConfig;
use kerrpair::model::SystemParams;
use kerrpair::redfield::{build_redfield, evolve_redfield};
use num_complex::Complex;

fn main() {
    let params = SystemParams::symmetric(1.0, 1e-3, 5e-4, 1e-3, 0.0).unwrap();
    let space = TruncatedSpace::two_mode(5).unwrap();
    let gen = build_redfield(&params, space).unwrap();
    let psi1 = coherent_state(Complex::new(1.0, 0.0), 5).unwrap();
    let psi2 = coherent_state(Complex::new(0.0, 0.0), 5).unwrap();
    let rho0 = product_density(&psi1, &psi2).unwrap();
    let cfg = IntegratorConfig::new(300.0, 4).unwrap();
    let start = std::time::Instant::now();
    let traj = evolve_redfield(&gen, &rho0, &cfg).unwrap();
    println!(
        "t=300: steps={} rej={} evals={} elapsed={:?}",
        traj.diagnostics.steps_accepted,
        traj.diagnostics.steps_rejected,
        traj.diagnostics.rhs_evals,
        start.elapsed()
    );
}
