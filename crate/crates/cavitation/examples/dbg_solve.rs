use cavitation::assembly::*;
use cavitation::model::*;
use cavitation::solver::*;
use std::time::Instant;

fn run(m: usize, tol_start: f64, cap: u64, y0: Option<UnknownVector>) -> (SolveReport, UnknownVector, Assembler) {
    let (eps, gamma, lambda) = (1e-3, 1.0, 2.0);
    let n = 16usize;
    let domain = AnnulusDomain::new(eps, gamma).unwrap();
    let mat = MaterialModel::experiment_default();
    let stretch = BoundaryStretch::principal(lambda, lambda).unwrap();
    let bc = BoundaryData::from_stretch(&stretch, n, gamma).unwrap();
    let asm = Assembler::new(domain, mat, bc, n, m, 2 * n, 8 * m).unwrap();
    let y0 = y0.unwrap_or_else(|| initial_guess(&asm, lambda, SeedMode::Incompressible).unwrap());
    let config = SolverConfig { tol_start, max_outer_iterations: cap, ..Default::default() };
    let t0 = Instant::now();
    let (report, y) = solve_elastic(&asm, &y0, &config).unwrap();
    eprintln!(
        "M = {m:2} tol0 = {tol_start:.0e}: {:?}, |f| = {:.2e}, E = {:.10}, iters g/qn = {}/{}, trials = {}, restarts = {}, {:.1}s",
        report.status, report.grad_norm, report.energy,
        report.iterations_gradient, report.iterations_quasi_newton, report.trials, report.restarts,
        t0.elapsed().as_secs_f64()
    );
    (report, y, asm)
}

fn main() {
    let arg: Vec<String> = std::env::args().collect();
    match arg.get(1).map(|s| s.as_str()) {
        Some("small") => {
            // pinned algorithm at small M
            for m in [2usize, 3, 4] {
                run(m, 1e-1, 60_000, None);
            }
        }
        Some("direct") => {
            // straight into quasi-Newton from the far seed at M=32
            run(32, 1e6, 60_000, None);
        }
        _ => eprintln!("usage: dbg_solve small|direct"),
    }
}
