mod common;

#[test]
fn backprop_matches_central_differences() {
    for (name, err) in common::gradient_check(3, 1e-6) {
        assert!(err <= 1e-4, "{name}: relative error {err:e}");
    }
}
