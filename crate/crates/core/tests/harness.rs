use penalearn::harness::{run_benchmark, BenchReport};
use penalearn::oracle::OracleConfig;
use penalearn::problems::make_problem;
use penalearn::trainer::{train, TrainConfig};

#[test]
fn gap_is_nonnegative_for_feasible_rows() {
    for name in ["rosenbrock-1c", "ackley-1c"] {
        let spec = make_problem(name).unwrap();
        let cfg = TrainConfig {
            epochs: 300,
            sample_count: 200,
            batch_size: 50,
            ..TrainConfig::reference(&spec)
        };
        let (net, _) = train(&spec, &cfg).unwrap();
        let params = spec.sample_params(25, 99).unwrap();
        let report = run_benchmark(&spec, &net, &OracleConfig::default(), &params).unwrap();
        assert_eq!(report.aggregates.oracle_failures, 0);
        for row in report.rows.iter().filter(|r| r.viol_dnn <= 1e-3) {
            assert!(row.gap.unwrap() >= -1e-6, "{name}: {row:?}");
        }
        let back = BenchReport::from_csv(&report.to_csv(true)).unwrap();
        assert_eq!(back, report);
    }
}
