macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!("../examples/", stringify!($name), ".rs"));
        }
    };
}

example!(analyze_program);
example!(weak_update);
example!(bound_orderings);
example!(constraint_resolution);
example!(relaxation);
example!(interval_domain);
example!(soundness_oracle);
example!(sparse_vs_naive);

#[test]
fn analyze_program_runs() {
    analyze_program::run_example().unwrap();
}

#[test]
fn weak_update_runs() {
    weak_update::run_example().unwrap();
}

#[test]
fn bound_orderings_runs() {
    bound_orderings::run_example().unwrap();
}

#[test]
fn constraint_resolution_runs() {
    constraint_resolution::run_example().unwrap();
}

#[test]
fn relaxation_runs() {
    relaxation::run_example().unwrap();
}

#[test]
fn interval_domain_runs() {
    interval_domain::run_example().unwrap();
}

#[test]
fn soundness_oracle_runs() {
    soundness_oracle::run_example().unwrap();
}

// Timing only; built above but not run here.
#[allow(dead_code)]
fn _sparse_vs_naive() -> fn() -> Result<(), Box<dyn std::error::Error>> {
    sparse_vs_naive::run_example
}
