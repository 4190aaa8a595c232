use hsoliton_core::examples::{ExampleId, ExampleSpec};
use hsoliton_core::suites::{run_example, run_identity, CheckOptions, IdentityName, IdentitySource};

fn show(o: &hsoliton_core::suites::SuiteOutcome) {
    for c in &o.checks {
        eprintln!(
            "{:>14} {:<28} sup={:.3e} tol={:.1e} pass={} expected={}",
            o.name, c.report.name, c.report.sup_residual, c.report.tolerance, c.report.pass, c.expected
        );
    }
    eprintln!(
        "   class={:?}/{:?} trivial={:?}/{:?}",
        o.classification, o.expected_classification, o.trivial, o.expected_trivial
    );
}

#[test]
fn every_example_suite_passes() {
    for id in ExampleId::ALL {
        let t = std::time::Instant::now();
        let o = run_example(&ExampleSpec::new(id), &CheckOptions::default()).unwrap();
        show(&o);
        eprintln!("   {:?}", t.elapsed());
        assert!(o.pass(), "{id}");
    }
}

#[test]
fn every_identity_suite_passes() {
    let opts = CheckOptions {
        tol: 1e-7,
        ..Default::default()
    };
    for id in IdentityName::ALL {
        let t = std::time::Instant::now();
        let o = run_identity(id, &IdentitySource::default(), &opts).unwrap();
        show(&o);
        eprintln!("   {:?}", t.elapsed());
        assert!(o.pass(), "{id}");
    }
}
