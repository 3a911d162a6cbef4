// Every example doubles as a test.

macro_rules! example_tests {
    ($($name:ident),* $(,)?) => {
        $(
            #[allow(dead_code)]
            mod $name {
                include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));
            }

            #[test]
            fn $name() {
                $name::run_example().expect(stringify!($name));
            }
        )*
    };
}

example_tests!(
    abc_bound,
    aperiodic_zak,
    classical_siegel,
    classical_zak,
    cps_siegel,
    cut_and_project,
    eigenfunctions,
    eps_dual,
    heisenberg_hull,
    hull_action,
    run_config,
    siegel_duality,
    thinning,
);
