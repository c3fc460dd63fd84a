//! Every example runs to completion.

#[path = "../examples/banded_solver.rs"]
#[allow(dead_code)]
mod banded_solver;
#[path = "../examples/benchmark_suite.rs"]
#[allow(dead_code)]
mod benchmark_suite;
#[path = "../examples/complementarity.rs"]
#[allow(dead_code)]
mod complementarity;
#[path = "../examples/convexity_lab.rs"]
#[allow(dead_code)]
mod convexity_lab;
#[path = "../examples/double_projection.rs"]
#[allow(dead_code)]
mod double_projection;
#[path = "../examples/dynamical_systems.rs"]
#[allow(dead_code)]
mod dynamical_systems;
#[path = "../examples/equilibrium.rs"]
#[allow(dead_code)]
mod equilibrium;
#[path = "../examples/gap_functions.rs"]
#[allow(dead_code)]
mod gap_functions;
#[path = "../examples/obstacle_spline.rs"]
#[allow(dead_code)]
mod obstacle_spline;
#[path = "../examples/projection_methods.rs"]
#[allow(dead_code)]
mod projection_methods;
#[path = "../examples/set_projections.rs"]
#[allow(dead_code)]
mod set_projections;
#[path = "../examples/wiener_hopf.rs"]
#[allow(dead_code)]
mod wiener_hopf;

#[test]
fn banded_solver_runs() {
    banded_solver::run_example().unwrap();
}

#[test]
fn benchmark_suite_runs() {
    benchmark_suite::run_example().unwrap();
}

#[test]
fn complementarity_runs() {
    complementarity::run_example().unwrap();
}

#[test]
fn convexity_lab_runs() {
    convexity_lab::run_example().unwrap();
}

#[test]
fn double_projection_runs() {
    double_projection::run_example().unwrap();
}

#[test]
fn dynamical_systems_runs() {
    dynamical_systems::run_example().unwrap();
}

#[test]
fn equilibrium_runs() {
    equilibrium::run_example().unwrap();
}

#[test]
fn gap_functions_runs() {
    gap_functions::run_example().unwrap();
}

#[test]
fn obstacle_spline_runs() {
    obstacle_spline::run_example().unwrap();
}

#[test]
fn projection_methods_runs() {
    projection_methods::run_example().unwrap();
}

#[test]
fn set_projections_runs() {
    set_projections::run_example().unwrap();
}

#[test]
fn wiener_hopf_runs() {
    wiener_hopf::run_example().unwrap();
}
