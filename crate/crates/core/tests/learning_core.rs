mod common;

#[test]
fn gradients_match_finite_differences_and_updates_keep_invariants() {
    println!("{}", common::learning_oracle().unwrap());
}
