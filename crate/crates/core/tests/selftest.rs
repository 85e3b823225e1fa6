use papm_core::harness::{cmd_selftest, cmd_selftest_with, run_selftest, Faults, EXIT_FAIL, EXIT_OK};

#[test]
fn clean_selftest_passes() {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    assert_eq!(cmd_selftest(&mut out, &mut err), EXIT_OK);
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("selftest passed"));
    assert!(text.lines().any(|l| l.starts_with("elapsed")));
    assert!(err.is_empty());
}

#[test]
fn flipped_q_names_the_curvature_form() {
    let faults = Faults {
        flip_q: true,
        ..Faults::none()
    };
    let (mut out, mut err) = (Vec::new(), Vec::new());
    assert_eq!(cmd_selftest_with(&faults, &mut out, &mut err), EXIT_FAIL);
    let err = String::from_utf8(err).unwrap();
    assert!(err.contains("first failing check: thm.curvature_form"), "{err}");
}

#[test]
fn scaled_k_breaks_the_tau_k_relation() {
    let outcome = run_selftest(&Faults {
        k_scale: 1.01,
        ..Faults::none()
    });
    assert!(outcome.failed("scalar.eq3_4"));
    assert!(outcome
        .failures
        .iter()
        .any(|f| f.id == "scalar.eq3_4" && f.context.starts_with("s3-line")));
}
